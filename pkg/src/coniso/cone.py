"""Open convex cones and quadrature grids on their spherical caps.

A cone is represented by the inward normals of its facets; membership is
strict (boundary points are outside).  Caps (cone intersect unit sphere)
carry Gauss-Legendre quadrature grids in angular coordinates: a single
polar angle for planar cones, tensor grids in hyperspherical angles for
axis-aligned cones in higher dimension.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SECTOR = "sector2d"
ORTHANT = "orthant"
HALFSPACE = "halfspace"
FULL = "full"


@dataclass(frozen=True, eq=False)
class ConvexCone:
    """Open convex cone with apex at the origin.

    Attributes
    ----------
    kind : str
        One of ``sector2d``, ``orthant``, ``halfspace``, ``full``.
    dim : int
        Ambient dimension n >= 2.
    normals : ndarray, shape (m, dim)
        Inward unit normals of the facets; empty for the full space.
    beta : float or None
        Opening angle, set for planar sectors only.
    mask : frozenset
        1-based indices of the coordinates constrained positive
        (axis-aligned kinds only).
    """

    kind: str
    dim: int
    normals: np.ndarray = field(repr=False)
    beta: float | None = None
    mask: frozenset = frozenset()

    def contains(self, points):
        """Strict membership test for an array of points shaped (..., dim)."""
        pts = np.asarray(points, dtype=float)
        if pts.shape[-1] != self.dim:
            raise ValueError(f"expected points in dimension {self.dim}, got shape {pts.shape}")
        if len(self.normals) == 0:
            return np.ones(pts.shape[:-1], dtype=bool)
        # strict inequality: facet points do not belong to the open cone
        return np.all(pts @ self.normals.T > 0.0, axis=-1)

    def interior_direction(self):
        """A unit vector strictly inside the cone."""
        if len(self.normals) == 0:
            e = np.zeros(self.dim)
            e[0] = 1.0
            return e
        d = self.normals.sum(axis=0)
        return d / np.linalg.norm(d)

    def angle_intervals(self):
        """Angular coordinate box of the cap, as a list of (lo, hi) pairs.

        Planar cones use a single polar angle; higher-dimensional
        axis-aligned cones use hyperspherical angles phi_1..phi_{n-1} with
        x_1 = cos(phi_1), x_k = sin(phi_1)..sin(phi_{k-1}) cos(phi_k).
        """
        if self.kind == SECTOR:
            return [(0.0, self.beta)]
        n = self.dim
        if n == 2:
            # the four axis-aligned planar cases reduce to one angle interval
            lo, hi = _planar_pair_interval(1 in self.mask, 2 in self.mask)
            return [(lo, hi)]
        intervals = []
        for k in range(1, n - 1):
            intervals.append((0.0, np.pi / 2 if k in self.mask else np.pi))
        intervals.append(_planar_pair_interval(n - 1 in self.mask, n in self.mask))
        return intervals


def _planar_pair_interval(first_constrained, second_constrained):
    """Angle range of (cos t, sin t) under sign constraints on the pair."""
    if first_constrained and second_constrained:
        return (0.0, np.pi / 2)
    if first_constrained:
        return (-np.pi / 2, np.pi / 2)
    if second_constrained:
        return (0.0, np.pi)
    return (0.0, 2 * np.pi)


def sector(beta):
    """Planar sector of opening angle ``beta`` in (0, pi].

    The sector is swept by polar angles in (0, beta).  At beta = pi the two
    edge normals coincide and a single normal remains.
    """
    if not 0.0 < beta <= np.pi:
        raise ValueError(f"sector angle must lie in (0, pi], got {beta}")
    normals = [np.array([0.0, 1.0]), np.array([np.sin(beta), -np.cos(beta)])]
    if abs(beta - np.pi) < 1e-14:
        normals = normals[:1]
    return ConvexCone(kind=SECTOR, dim=2, normals=np.array(normals), beta=float(beta))


def orthant(dim, mask):
    """Axis-aligned cone in dimension ``dim``: x_i > 0 for i in ``mask``.

    ``mask`` holds 1-based coordinate indices.  An empty mask yields the
    full space, a single index a halfspace.
    """
    mask = frozenset(int(i) for i in mask)
    if any(i < 1 or i > dim for i in mask):
        raise ValueError(f"mask {sorted(mask)} out of range for dimension {dim}")
    if dim < 2:
        raise ValueError("dimension must be at least 2")
    normals = np.zeros((len(mask), dim))
    for row, i in enumerate(sorted(mask)):
        normals[row, i - 1] = 1.0
    if not mask:
        kind = FULL
    elif len(mask) == 1:
        kind = HALFSPACE
    else:
        kind = ORTHANT
    return ConvexCone(kind=kind, dim=dim, normals=normals, mask=mask)


@dataclass(frozen=True, eq=False)
class CapGrid:
    """Quadrature grid on a spherical cap.

    Attributes
    ----------
    cone : ConvexCone
    resolution : int
        Gauss-Legendre nodes per angular axis.
    nodes : ndarray, shape (M, n)
        Unit vectors on the cap.
    weights : ndarray, shape (M,)
        Quadrature weights for the surface measure of the cap; they sum to
        the cap area.
    angles : ndarray, shape (M, n-1)
        Angular coordinates of each node.
    axes : tuple of ndarray
        The 1-D angle arrays of the tensor grid.
    shape : tuple of int
        Nodes per axis; ``nodes`` flattens this C-order.
    """

    cone: ConvexCone
    resolution: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    angles: np.ndarray = field(repr=False)
    axes: tuple = field(repr=False)
    shape: tuple = ()

    def integrate(self, values):
        """Quadrature sum of nodal ``values`` against the cap measure."""
        return float(np.dot(self.weights, np.asarray(values, dtype=float)))


def cap_quadrature(cone, n):
    """Gauss-Legendre grid with ``n`` nodes per angular axis on the cap of ``cone``.

    Parameters
    ----------
    cone : ConvexCone
    n : int
        Nodes per angular axis (so M = n**(dim-1) nodes in total).

    Raises
    ------
    ValueError
        If ``n < 2`` or the cone kind carries no angular box.
    """
    if n < 2:
        raise ValueError(f"need at least 2 quadrature nodes per axis, got {n}")
    intervals = cone.angle_intervals()
    if len(intervals) != cone.dim - 1:
        raise ValueError(f"unsupported cone for cap quadrature: {cone.kind}")

    base_x, base_w = np.polynomial.legendre.leggauss(n)
    axes, axis_weights = [], []
    for lo, hi in intervals:
        half = 0.5 * (hi - lo)
        axes.append(lo + half * (base_x + 1.0))
        axis_weights.append(half * base_w)

    mesh = np.meshgrid(*axes, indexing="ij")
    wmesh = np.meshgrid(*axis_weights, indexing="ij")
    angles = np.stack([m.ravel() for m in mesh], axis=-1)
    weights = np.ones(angles.shape[0])
    for wm in wmesh:
        weights *= wm.ravel()

    ndim = cone.dim
    nodes = np.empty((angles.shape[0], ndim))
    # x_k = prod_{j<k} sin(phi_j) * cos(phi_k); the last coordinate takes sin
    prefix = np.ones(angles.shape[0])
    for k in range(ndim - 1):
        nodes[:, k] = prefix * np.cos(angles[:, k])
        prefix = prefix * np.sin(angles[:, k])
    nodes[:, ndim - 1] = prefix
    # surface Jacobian: prod_k sin(phi_k)^(n-1-k), angles 1-based
    for k in range(ndim - 2):
        weights *= np.sin(angles[:, k]) ** (ndim - 2 - k)

    return CapGrid(
        cone=cone,
        resolution=n,
        nodes=nodes,
        weights=weights,
        angles=angles,
        axes=tuple(axes),
        shape=tuple(len(a) for a in axes),
    )
