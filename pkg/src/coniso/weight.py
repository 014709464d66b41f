"""Homogeneous weights and the concavity gate for the sharp inequality.

Three closed families: the constant weight, monomials prod x_i^A_i on
axis-aligned cones, and radial powers |x|^a.  A weight of homogeneity
degree a > 0 admits the sharp quotient bound exactly when w^(1/a) is
concave on the cone; ``check_concavity`` samples that condition and
``concavity_pairwise`` evaluates the equivalent two-point inequality
used pointwise by the certificate chain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cone import ConvexCone

CONSTANT = "constant"
MONOMIAL = "monomial"
RADIAL_POWER = "radial_power"


@dataclass(frozen=True, eq=False)
class HomogeneousWeight:
    """Positively homogeneous weight on a cone.

    Attributes
    ----------
    kind : str
        ``constant``, ``monomial`` or ``radial_power``.
    dim : int
        Ambient dimension.
    exponents : tuple of float
        Per-axis exponents (monomial kind only), all >= 0.
    power : float
        Homogeneity degree of the radial kind, >= 0.
    """

    kind: str
    dim: int
    exponents: tuple = ()
    power: float = 0.0

    @property
    def degree(self):
        """Homogeneity degree: w(t x) = t**degree * w(x) for t > 0."""
        if self.kind == MONOMIAL:
            return float(sum(self.exponents))
        if self.kind == RADIAL_POWER:
            return float(self.power)
        return 0.0

    def evaluate(self, x):
        """Weight values for points shaped (..., dim)."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise ValueError(f"expected points in dimension {self.dim}, got shape {x.shape}")
        if self.kind == CONSTANT:
            return np.ones(x.shape[:-1])
        if self.kind == RADIAL_POWER:
            return np.linalg.norm(x, axis=-1) ** self.power
        out = np.ones(x.shape[:-1])
        for i, a in enumerate(self.exponents):
            if a != 0.0:
                out = out * x[..., i] ** a
        return out

    def gradient(self, x):
        """Gradient arrays shaped like the input points.

        Raises
        ------
        ValueError
            At singular points: x_i = 0 with fractional exponent in (0, 1),
            or the origin for radial powers of degree in (0, 2).
        """
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise ValueError(f"expected points in dimension {self.dim}, got shape {x.shape}")
        if self.kind == CONSTANT:
            return np.zeros_like(x)
        if self.kind == RADIAL_POWER:
            r = np.linalg.norm(x, axis=-1)
            if self.power != 0.0 and self.power < 2.0 and np.any(r == 0.0):
                raise ValueError("radial weight gradient undefined at the origin")
            with np.errstate(divide="ignore", invalid="ignore"):
                scale = np.where(r > 0.0, self.power * r ** (self.power - 2.0), 0.0)
            return scale[..., None] * x
        grad = np.zeros_like(x)
        for i, a in enumerate(self.exponents):
            if a == 0.0:
                continue
            if 0.0 < a < 1.0 and np.any(x[..., i] == 0.0):
                raise ValueError(f"monomial gradient singular where x_{i + 1} = 0 with exponent {a}")
            partial = a * x[..., i] ** (a - 1.0)
            for j, b in enumerate(self.exponents):
                if j != i and b != 0.0:
                    partial = partial * x[..., j] ** b
            grad[..., i] = partial
        return grad


def constant(dim=2):
    """The unweighted case on a ``dim``-dimensional cone."""
    return HomogeneousWeight(kind=CONSTANT, dim=dim)


def monomial(exponents):
    """Monomial weight prod x_i^A_i with all A_i >= 0."""
    exps = tuple(float(a) for a in exponents)
    if len(exps) < 2:
        raise ValueError("monomial weight needs one exponent per coordinate, dimension >= 2")
    if any(a < 0.0 for a in exps):
        raise ValueError(f"monomial exponents must be nonnegative, got {exps}")
    return HomogeneousWeight(kind=MONOMIAL, dim=len(exps), exponents=exps)


def radial_power(power, dim=2):
    """Rotation-invariant weight |x|**power with power >= 0."""
    if power < 0.0:
        raise ValueError(f"radial power must be nonnegative, got {power}")
    return HomogeneousWeight(kind=RADIAL_POWER, dim=dim, power=float(power))


def compatible(cone: ConvexCone, w: HomogeneousWeight):
    """Whether ``w`` is positive on the open cone (required by the measures)."""
    if w.dim != cone.dim:
        return False
    if w.kind != MONOMIAL:
        return True
    needed = {i + 1 for i, a in enumerate(w.exponents) if a > 0.0}
    if cone.kind == "sector2d":
        # x > 0 inside iff beta <= pi/2, y > 0 always on (0, beta) with beta <= pi
        ok = {1: cone.beta <= np.pi / 2 + 1e-15, 2: True}
        return all(ok[i] for i in needed)
    return needed <= cone.mask


def _sample_in_cap_ball(cone, count, radius, rng):
    """Uniform samples from (cone intersect ball of ``radius``), by rejection."""
    out = np.empty((0, cone.dim))
    while len(out) < count:
        batch = rng.uniform(-radius, radius, size=(4 * count, cone.dim))
        keep = np.linalg.norm(batch, axis=-1) <= radius
        keep &= cone.contains(batch)
        out = np.vstack([out, batch[keep]])
    return out[:count]


@dataclass(frozen=True)
class ConcavityReport:
    """Outcome of the sampled midpoint-concavity gate."""

    passed: bool
    degree: float
    n_pairs: int
    min_gap: float
    witness: tuple | None = None


def check_concavity(w, cone, n_pairs=100_000, seed=0, tol=-1e-12):
    """Midpoint-concavity gate for w**(1/degree) on the cone.

    Draws ``n_pairs`` point pairs from the cone intersected with the ball of
    radius 2 and tests v((x+y)/2) >= (v(x) + v(y))/2 + tol for
    v = w**(1/degree).  Degree-zero weights pass trivially.

    Returns
    -------
    ConcavityReport
        ``witness`` holds a violating pair when the gate fails.
    """
    if w.degree == 0.0:
        return ConcavityReport(passed=True, degree=0.0, n_pairs=0, min_gap=np.inf)
    rng = np.random.default_rng(seed)
    xs = _sample_in_cap_ball(cone, n_pairs, 2.0, rng)
    ys = _sample_in_cap_ball(cone, n_pairs, 2.0, rng)
    root = 1.0 / w.degree
    vx = w.evaluate(xs) ** root
    vy = w.evaluate(ys) ** root
    vm = w.evaluate(0.5 * (xs + ys)) ** root
    gaps = vm - 0.5 * (vx + vy)
    worst = int(np.argmin(gaps))
    min_gap = float(gaps[worst])
    if min_gap >= tol:
        return ConcavityReport(passed=True, degree=w.degree, n_pairs=n_pairs, min_gap=min_gap)
    return ConcavityReport(
        passed=False,
        degree=w.degree,
        n_pairs=n_pairs,
        min_gap=min_gap,
        witness=(xs[worst].copy(), ys[worst].copy()),
    )


def concavity_pairwise(w, x, p):
    """Slack of the two-point gradient inequality used by the chain.

    For degree a > 0 the concavity of w**(1/a) is equivalent to
    grad w(x).p / w(x) >= a * (w(p)/w(x))**(1/a) for all x, p in the cone;
    returned is left minus right (nonnegative when the gate holds).
    Degree-zero weights return exact zeros.
    """
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    if w.degree == 0.0:
        return np.zeros(np.broadcast_shapes(x.shape[:-1], p.shape[:-1]))
    wx = w.evaluate(x)
    lhs = np.sum(w.gradient(x) * p, axis=-1) / wx
    rhs = w.degree * (w.evaluate(p) / wx) ** (1.0 / w.degree)
    return lhs - rhs
