"""Weighted perimeter, volume, and quotient against independent oracles."""

import numpy as np
import pytest

from coniso import cone, domain, measure, weight
from conftest import midpoint_volume, polyline_perimeter, random_star


def test_worked_quadrant_values(quadrant):
    # the one fully worked case: P = 1/2, m = 1/8, Q = 2**(5/4)
    grid = cone.cap_quadrature(quadrant, 256)
    w = weight.monomial((1.0, 1.0))
    rep = measure.quotient(domain.ball(grid, 1.0), w)
    assert rep.P == pytest.approx(0.5, rel=1e-12)
    assert rep.m == pytest.approx(0.125, rel=1e-12)
    assert rep.D == 4.0
    assert rep.Q == pytest.approx(2.0 ** 1.25, rel=1e-12)
    assert abs(rep.deficit) <= 1e-12
    assert rep.resolution == 256


def test_sector_arc_length_trivial():
    # unweighted sector ball: perimeter is the arc, volume the pie slice
    c = cone.sector(1.7)
    grid = cone.cap_quadrature(c, 64)
    w = weight.constant()
    for rho in (1.0, 0.6):
        b = domain.ball(grid, rho)
        assert measure.perimeter_inside_cone(b, w) == pytest.approx(1.7 * rho, rel=1e-13)
        assert measure.volume(b, w) == pytest.approx(1.7 * rho**2 / 2, rel=1e-13)


def test_halfplane_weight_y_ball(halfplane):
    # integral of sin over (0, pi) is 2, exactly the cap integral of w = y
    grid = cone.cap_quadrature(halfplane, 128)
    w = weight.monomial((0.0, 1.0))
    p, m, q = measure.ball_reference(grid, w)
    assert p == pytest.approx(2.0, abs=1e-10)
    assert m == pytest.approx(2.0 / 3.0, abs=1e-10)
    pc, mc, qc = measure.closed_form_ball(halfplane, w)
    assert p == pytest.approx(pc, rel=1e-12)
    assert m == pytest.approx(mc, rel=1e-12)
    assert q == pytest.approx(qc, rel=1e-12)


def test_fractional_exponent_oracle_agreement(quadrant):
    # cos(theta)**0.3 is not smooth at the cap edge, so Gauss-Legendre
    # converges algebraically there; 1e-5 is the honest N=256 tolerance
    grid = cone.cap_quadrature(quadrant, 256)
    w = weight.monomial((0.3, 1.7))
    p, m, _ = measure.ball_reference(grid, w)
    pc, mc, _ = measure.closed_form_ball(quadrant, w)
    assert p == pytest.approx(pc, rel=1e-5)
    assert m == pytest.approx(mc, rel=1e-5)


def test_effective_dimension(quadrant):
    assert measure.effective_dimension(quadrant, weight.monomial((1.0, 1.0))) == 4.0
    assert measure.effective_dimension(cone.sector(2.0), weight.radial_power(1.5)) == 3.5
    assert measure.effective_dimension(cone.sector(1.0), weight.constant()) == 2.0


def test_closed_form_sector_constant():
    beta = 2.3
    p, m, q = measure.closed_form_ball(cone.sector(beta), weight.constant())
    assert (p, m) == (beta, beta / 2)
    assert q == pytest.approx(np.sqrt(2 * beta), rel=1e-14)


def test_closed_form_unavailable_cases():
    with pytest.raises(NotImplementedError):
        measure.closed_form_ball(cone.sector(2.0), weight.monomial((0.0, 1.0)))


def test_perimeter_against_polyline_oracle():
    c = cone.sector(np.pi / 2)
    grid = cone.cap_quadrature(c, 128)
    w = weight.constant()
    rf = lambda t: 1.0 + 0.2 * np.cos(4.0 * t)
    dom = domain.from_profile(grid, rf(grid.angles[:, 0]))
    p_lib = measure.perimeter_inside_cone(dom, w)
    p_ref = polyline_perimeter(rf, 0.0, np.pi / 2, w)
    assert p_lib == pytest.approx(p_ref, rel=1e-5)


def test_weighted_perimeter_against_polyline_oracle(quadrant):
    grid = cone.cap_quadrature(quadrant, 128)
    w = weight.monomial((1.0, 1.0))
    rf = lambda t: 1.0 + 0.15 * np.sin(3.0 * t) - 0.1 * np.cos(2.0 * t)
    dom = domain.from_profile(grid, rf(grid.angles[:, 0]))
    p_lib = measure.perimeter_inside_cone(dom, w)
    p_ref = polyline_perimeter(rf, 0.0, np.pi / 2, w)
    assert p_lib == pytest.approx(p_ref, rel=1e-5)


def test_volume_against_midpoint_oracle(quadrant):
    grid = cone.cap_quadrature(quadrant, 128)
    w = weight.monomial((1.0, 1.0))
    rf = lambda t: 1.0 + 0.25 * np.cos(2.0 * t + 0.4)
    dom = domain.from_profile(grid, rf(grid.angles[:, 0]))
    m_lib = measure.volume(dom, w)
    m_ref = midpoint_volume(rf, 0.0, np.pi / 2, w)
    assert m_lib == pytest.approx(m_ref, rel=1e-5)


def test_deficit_nonnegative_sample(quadrant):
    grid = cone.cap_quadrature(quadrant, 96)
    w = weight.monomial((1.0, 1.0))
    rng = np.random.default_rng(17)
    for _ in range(25):
        rep = measure.quotient(random_star(grid, rng), w)
        assert rep.deficit >= -1e-6


def test_quotient_convergence_in_resolution(quadrant):
    # Q stabilizes fast in N: each doubling shrinks the change by >= 4x
    # until rounding noise takes over
    w = weight.monomial((1.0, 1.0))
    values = []
    for n in (16, 32, 64, 128):
        grid = cone.cap_quadrature(quadrant, n)
        dom = domain.from_profile(grid, 1.0 + 0.2 * np.cos(3.0 * grid.angles[:, 0]))
        values.append(measure.quotient(dom, w).Q)
    deltas = [abs(a - b) for a, b in zip(values, values[1:])]
    for d1, d2 in zip(deltas, deltas[1:]):
        if d1 < 1e-11:
            break
        assert d2 <= d1 / 4.0


def test_scale_invariance(quadrant):
    grid = cone.cap_quadrature(quadrant, 128)
    w = weight.monomial((1.0, 1.0))
    dom = domain.from_profile(grid, 1.0 + 0.2 * np.cos(2.0 * grid.angles[:, 0]))
    q0 = measure.quotient(dom, w).Q
    for t in (0.5, 2.0, 7.0):
        qt = measure.quotient(dom.scaled(t), w).Q
        assert qt == pytest.approx(q0, rel=1e-10)


def test_incompatible_pair_rejected():
    grid = cone.cap_quadrature(cone.sector(2.0), 32)
    with pytest.raises(ValueError):
        measure.quotient(domain.ball(grid, 1.0), weight.monomial((1.0, 1.0)))


def test_ball_report_matches_quotient(quadrant):
    w = weight.monomial((1.0, 1.0))
    rep = measure.ball_report(quadrant, w, 96)
    assert abs(rep.deficit) <= 1e-12
    assert rep.resolution == 96
