"""Shared fixtures and the independent cross-check oracles.

The oracles deliberately avoid the library's own quadrature path: the
perimeter oracle walks a dense polyline, the volume oracle uses a plain
midpoint rule in polar coordinates, and the second-variation oracle is a
closed form obtained by expanding the quotient to second order in the
mode amplitude.  Library results are tested against these, never against
themselves.
"""

import numpy as np
import pytest

from coniso import cone, domain, measure


def polyline_perimeter(radius_fn, lo, hi, w, n_seg=1_000_000):
    """Weighted length of the radial graph by dense polygonal sampling.

    ``radius_fn`` is evaluated on ``n_seg + 1`` equispaced angles over the
    cap interval; each segment contributes w(midpoint) * |segment|.
    Planar domains only.
    """
    t = np.linspace(lo, hi, n_seg + 1)
    r = np.asarray(radius_fn(t), dtype=float)
    pts = r[:, None] * np.stack([np.cos(t), np.sin(t)], axis=-1)
    seg = np.diff(pts, axis=0)
    mid = 0.5 * (pts[:-1] + pts[1:])
    return float(np.sum(w.evaluate(mid) * np.linalg.norm(seg, axis=1)))


def midpoint_volume(radius_fn, lo, hi, w, n_theta=2000, n_r=2000):
    """Weighted area by a midpoint rule on the (theta, r) rectangle.

    Second order in both directions, so ~2.5e-7 relative at the default
    resolution for smooth integrands; plenty under the 1e-5 gates.
    """
    th = lo + (hi - lo) * (np.arange(n_theta) + 0.5) / n_theta
    rmax = np.asarray(radius_fn(th), dtype=float)
    frac = (np.arange(n_r) + 0.5) / n_r
    r = rmax[:, None] * frac[None, :]
    pts = r[..., None] * np.stack([np.cos(th), np.sin(th)], axis=-1)[:, None, :]
    vals = w.evaluate(pts) * r
    dth = (hi - lo) / n_theta
    return float(np.sum(vals * (rmax[:, None] / n_r)) * dth)


def second_variation_exact(beta, alpha, k):
    """Closed-form curvature of Q at the ball for sector + radial weight.

    Expanding R = 1 + eps*cos(k pi theta/beta) gives
    Q(eps) = Q_ball * (1 + eps^2/4 * ((k pi/beta)^2 - (1+alpha)) + O(eps^4)),
    so the symmetric second difference tends to
    Q_ball/2 * ((k pi/beta)^2 - (1+alpha)).  Covers constant weight at
    alpha = 0; the sign flips at beta_0 = pi/sqrt(1+alpha) for mode 1.
    """
    d_eff = 2.0 + alpha
    q_ball = beta / (beta / d_eff) ** ((d_eff - 1.0) / d_eff)
    return 0.5 * q_ball * ((k * np.pi / beta) ** 2 - (1.0 + alpha))


def random_star(grid, rng, max_amp=0.3, modes=5):
    """Random cosine-mode profile around the unit ball, staying positive."""
    lo, hi = grid.cone.angle_intervals()[0]
    t = (grid.angles[:, 0] - lo) / (hi - lo)
    values = np.ones(grid.nodes.shape[0])
    coeffs = rng.uniform(-max_amp, max_amp, size=modes) / np.arange(1, modes + 1)
    for k, c in enumerate(coeffs, start=1):
        values += c * np.cos(k * np.pi * t)
    return domain.from_profile(grid, np.maximum(values, 0.05))


@pytest.fixture(scope="session")
def quadrant():
    return cone.orthant(2, (1, 2))


@pytest.fixture(scope="session")
def quadrant_grid(quadrant):
    return cone.cap_quadrature(quadrant, 128)


@pytest.fixture(scope="session")
def halfplane():
    return cone.orthant(2, (2,))


def quotient_of(radius_fn, grid, w):
    """Library quotient for a profile given as a callable on angles."""
    dom = domain.from_profile(grid, radius_fn(grid.angles[:, 0]))
    return measure.quotient(dom, w)
