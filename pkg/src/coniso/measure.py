"""Weighted volume, perimeter and the isoperimetric quotient.

Homogeneity reduces both measures of a radial-graph domain to cap
integrals, exact in the radial direction:

    volume     = (1/D) * sum_j q_j w(omega_j) R_j**D,         D = n + degree
    perimeter  = sum_j q_j w(omega_j) R_j**(degree + n - 2)
                 * sqrt(R_j**2 + |grad_S R|_j**2)

where q_j are cap quadrature weights and grad_S is the tangential
gradient.  The perimeter counts only the graph part of the boundary; the
lateral boundary along the cone walls never enters, which is exactly the
free-boundary convention of the quotient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import weight as weight_mod
from .cone import FULL, HALFSPACE, ORTHANT, SECTOR, CapGrid, ConvexCone, cap_quadrature
from .domain import StarDomain, ball


@dataclass(frozen=True)
class MeasureReport:
    """Measured quotient of one domain against its cap ball.

    ``deficit`` is the multiplicative gap Q/Q_ball - 1; nonnegative for
    every admissible weight, zero exactly on balls.
    """

    P: float
    m: float
    D: float
    Q: float
    Q_ball: float
    deficit: float
    resolution: int


def _require_compatible(cone: ConvexCone, w):
    if not weight_mod.compatible(cone, w):
        raise ValueError(f"weight {w.kind} is not positive on the given {cone.kind} cone")


def effective_dimension(cone: ConvexCone, w):
    """n + homogeneity degree, the dimension the weighted measures scale with."""
    return cone.dim + w.degree


def _tangential_norm_sq(dom: StarDomain):
    """|grad_S R|^2 at the nodes, with the hyperspherical metric factors."""
    grid = dom.grid
    angles = grid.angles
    total = np.zeros(dom.radii.shape[0])
    prefix = np.ones(dom.radii.shape[0])
    for k in range(angles.shape[1]):
        total += dom.radii_deriv[:, k] ** 2 / prefix
        prefix = prefix * np.sin(angles[:, k]) ** 2
    return total


def volume(dom: StarDomain, w):
    """Weighted volume of the domain."""
    grid = dom.grid
    _require_compatible(grid.cone, w)
    d_eff = effective_dimension(grid.cone, w)
    g = w.evaluate(grid.nodes)
    return float(np.dot(grid.weights, g * dom.radii**d_eff) / d_eff)


def perimeter_inside_cone(dom: StarDomain, w):
    """Weighted perimeter of the graph boundary (cone walls excluded)."""
    grid = dom.grid
    _require_compatible(grid.cone, w)
    n = grid.cone.dim
    g = w.evaluate(grid.nodes)
    slant = np.sqrt(dom.radii**2 + _tangential_norm_sq(dom))
    return float(np.dot(grid.weights, g * dom.radii ** (w.degree + n - 2) * slant))


def ball_reference(grid: CapGrid, w):
    """Quadrature (P_ball, m_ball, Q_ball) of the unit cap ball on ``grid``."""
    _require_compatible(grid.cone, w)
    d_eff = effective_dimension(grid.cone, w)
    p_ball = float(np.dot(grid.weights, w.evaluate(grid.nodes)))
    m_ball = p_ball / d_eff
    return p_ball, m_ball, p_ball / m_ball ** ((d_eff - 1.0) / d_eff)


def quotient(dom: StarDomain, w):
    """Full measurement: P, m, quotient and deficit against the cap ball."""
    grid = dom.grid
    p = perimeter_inside_cone(dom, w)
    m = volume(dom, w)
    d_eff = effective_dimension(grid.cone, w)
    q = p / m ** ((d_eff - 1.0) / d_eff)
    _, _, q_ball = ball_reference(grid, w)
    return MeasureReport(
        P=p,
        m=m,
        D=d_eff,
        Q=q,
        Q_ball=q_ball,
        deficit=q / q_ball - 1.0,
        resolution=grid.resolution,
    )


def closed_form_ball(cone: ConvexCone, w):
    """Exact (P_ball, m_ball, Q_ball) where a closed form exists.

    Covered: monomial and constant weights on axis-aligned cones (a
    Gamma-function product, from factorizing the Gaussian integral over
    the cone), and rotation-invariant weights on planar sectors (the cap
    weight is identically 1 there, so P_ball is the opening angle).

    Raises
    ------
    NotImplementedError
        For pairings without a closed form.
    """
    _require_compatible(cone, w)
    d_eff = effective_dimension(cone, w)

    if cone.kind == SECTOR:
        if w.kind == weight_mod.MONOMIAL:
            raise NotImplementedError("no closed form for monomial weights on a generic sector")
        p_ball = float(cone.beta)
    elif cone.kind in (ORTHANT, HALFSPACE, FULL):
        # radial powers are 1 on the cap, so P_ball is the plain cap area
        exps = w.exponents if w.kind == weight_mod.MONOMIAL else (0.0,) * cone.dim
        log_p = math.log(2.0)
        for i, a in enumerate(exps):
            log_p += math.lgamma((a + 1.0) / 2.0)
            if (i + 1) in cone.mask:
                log_p -= math.log(2.0)
        log_p -= math.lgamma((cone.dim + sum(exps)) / 2.0)
        p_ball = math.exp(log_p)
    else:
        raise NotImplementedError(f"no closed form for cone kind {cone.kind}")

    m_ball = p_ball / d_eff
    return p_ball, m_ball, p_ball / m_ball ** ((d_eff - 1.0) / d_eff)


def ball_report(cone: ConvexCone, w, n):
    """Convenience: quotient report of the unit cap ball at resolution ``n``."""
    grid = cap_quadrature(cone, n)
    return quotient(ball(grid, 1.0), w)
