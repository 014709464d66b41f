"""Star-shaped trial domains given by radial profiles over a cap grid.

The region is { r * omega : omega in the cap, 0 < r < R(omega) }.  Profiles
live on the grid nodes; tangential derivatives are produced at construction
time by local degree-4 polynomial stencils (the non-uniform analogue of
4th-order central differences, one-sided at the interval ends) applied
along each angular axis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cone import CapGrid

R_MIN = 1e-6
STENCIL_WIDTH = 5


def _lagrange_deriv_row(nodes, x0):
    """First-derivative weights at x0 of the Lagrange basis on ``nodes``."""
    k = len(nodes)
    row = np.empty(k)
    for j in range(k):
        others = np.delete(nodes, j)
        denom = np.prod(nodes[j] - others)
        num = 0.0
        for m in range(k - 1):
            num += np.prod(x0 - np.delete(others, m))
        row[j] = num / denom
    return row


def derivative_stencils(x, width=STENCIL_WIDTH):
    """Per-node stencil indices and weights for d/dx on the 1-D grid ``x``.

    Interior nodes get centered windows; windows clip at the ends, which
    keeps the polynomial degree (and hence the order) instead of dropping it.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    width = min(width, n)
    idx = np.empty((n, width), dtype=int)
    wts = np.empty((n, width))
    for i in range(n):
        lo = min(max(i - width // 2, 0), n - width)
        idx[i] = np.arange(lo, lo + width)
        wts[i] = _lagrange_deriv_row(x[idx[i]], x[i])
    return idx, wts


def _axis_derivative(values, axis, stencils):
    idx, wts = stencils
    v = np.moveaxis(values, axis, 0)
    out = np.einsum("iw,iw...->i...", wts, v[idx])
    return np.moveaxis(out, 0, axis)


@dataclass(frozen=True, eq=False)
class StarDomain:
    """Radial-graph domain over a cap grid.

    Attributes
    ----------
    grid : CapGrid
    radii : ndarray, shape (M,)
        Profile values R at the grid nodes, all >= R_MIN.
    radii_deriv : ndarray, shape (M, n-1)
        Angular derivatives dR/dphi_k at the nodes.
    """

    grid: CapGrid
    radii: np.ndarray = field(repr=False)
    radii_deriv: np.ndarray = field(repr=False)

    @property
    def is_ball(self):
        return bool(np.ptp(self.radii) == 0.0)

    def boundary_points(self):
        """The graph points R(omega) * omega, shape (M, n)."""
        return self.radii[:, None] * self.grid.nodes

    def scaled(self, factor):
        """The same shape dilated by ``factor`` > 0."""
        if factor <= 0.0:
            raise ValueError(f"scale factor must be positive, got {factor}")
        return StarDomain(self.grid, self.radii * factor, self.radii_deriv * factor)


def from_profile(grid: CapGrid, values):
    """Domain from nodal profile values; derivatives come from the grid stencils.

    Raises
    ------
    ValueError
        If any value is not finite or falls below R_MIN.
    """
    values = np.asarray(values, dtype=float).reshape(-1)
    if values.shape[0] != grid.nodes.shape[0]:
        raise ValueError(f"profile has {values.shape[0]} values for {grid.nodes.shape[0]} nodes")
    if not np.all(np.isfinite(values)):
        raise ValueError("profile contains non-finite values")
    if np.any(values < R_MIN):
        raise ValueError(f"profile must stay above {R_MIN}, min is {values.min()}")
    shaped = values.reshape(grid.shape)
    derivs = []
    for axis, nodes_1d in enumerate(grid.axes):
        stencils = derivative_stencils(nodes_1d)
        derivs.append(_axis_derivative(shaped, axis, stencils).reshape(-1))
    return StarDomain(grid=grid, radii=values.copy(), radii_deriv=np.stack(derivs, axis=-1))


def ball(grid: CapGrid, rho=1.0):
    """The cap ball of radius ``rho``: constant profile, zero derivative."""
    if rho < R_MIN:
        raise ValueError(f"ball radius must be at least {R_MIN}, got {rho}")
    m = grid.nodes.shape[0]
    return StarDomain(
        grid=grid,
        radii=np.full(m, float(rho)),
        radii_deriv=np.zeros((m, grid.cone.dim - 1)),
    )


def perturb(base: StarDomain, k, eps):
    """Planar cosine-mode perturbation R -> R * (1 + eps cos(k pi t)).

    ``t`` is the polar angle rescaled to [0, 1] over the cap interval, so
    every mode has vanishing angular derivative at both edges.
    """
    grid = base.grid
    if grid.cone.dim != 2:
        raise ValueError("mode perturbations are defined for planar cones only")
    # rescale over the cap interval, not the (open) node span
    lo, hi = grid.cone.angle_intervals()[0]
    t = (grid.angles[:, 0] - lo) / (hi - lo)
    factor = 1.0 + eps * np.cos(k * np.pi * t)
    return from_profile(grid, base.radii * factor)


class PlanarProfile:
    """Barycentric interpolant of a planar profile and its derivative.

    Evaluates R(theta) and R'(theta) anywhere on the cap interval from the
    nodal values; used when a solver needs the profile away from the
    quadrature nodes.
    """

    def __init__(self, domain: StarDomain):
        if domain.grid.cone.dim != 2:
            raise ValueError("profile interpolation is planar-only")
        self._theta = domain.grid.angles[:, 0]
        self._values = domain.radii
        self._derivs = domain.radii_deriv[:, 0]
        # capacity-scaled barycentric weights to dodge under/overflow
        x = self._theta
        scale = 4.0 / (x[-1] - x[0])
        diffs = scale * (x[:, None] - x[None, :])
        np.fill_diagonal(diffs, 1.0)
        signs = np.prod(np.sign(diffs), axis=1)
        logs = np.sum(np.log(np.abs(diffs)), axis=1)
        self._bary = signs * np.exp(-logs)

    def _interp(self, table, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        d = t[:, None] - self._theta[None, :]
        exact = np.isclose(d, 0.0, atol=1e-15)
        d = np.where(exact, 1.0, d)
        ratio = self._bary[None, :] / d
        out = (ratio @ table) / ratio.sum(axis=1)
        hit_rows, hit_cols = np.nonzero(exact)
        out[hit_rows] = table[hit_cols]
        return out

    def radius(self, t):
        return self._interp(self._values, t)

    def radius_deriv(self, t):
        return self._interp(self._derivs, t)
