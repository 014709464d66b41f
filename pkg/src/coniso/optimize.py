"""Quotient minimization over cosine-mode profiles and the angle scan.

Planar trial profiles R(theta) = c0 * (1 + sum_k c_k cos(k pi t)), t the
polar angle rescaled to [0, 1] over the cap.  The quotient is invariant
under the overall scale c0, so the search runs over the mode vector alone
and the reported profile is rescaled to the cap-ball volume afterwards.

Two independent optimizers are provided (derivative-free Nelder-Mead and
finite-difference gradient descent) so results can be cross-checked, plus
a finite-difference second-variation estimator and a bisection scan for
the angle at which the cap ball stops being optimal.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import measure
from .cone import ConvexCone, cap_quadrature, sector
from .domain import from_profile

PROFILE_FLOOR = 0.05
NELDER_MEAD = "nelder-mead"
FD_GRADIENT = "fd-gradient"

BALL_OPTIMAL = "ball-optimal"
BALL_BEATEN = "ball-beaten"
UNDECIDED = "undecided"


class ModeObjective:
    """Quotient of the cosine-mode profile family on a fixed cap grid.

    Mode derivatives are analytic here (the graph slope is part of the
    objective); the stencil-differentiated path in ``measure`` stays an
    independent check.
    """

    def __init__(self, cone: ConvexCone, w, n=128, modes=8):
        if cone.dim != 2:
            raise ValueError("quotient optimization is planar-only")
        self.cone = cone
        self.w = w
        self.modes = int(modes)
        self.grid = cap_quadrature(cone, n)
        lo, hi = cone.angle_intervals()[0]
        t = (self.grid.angles[:, 0] - lo) / (hi - lo)
        k = np.arange(1, self.modes + 1)
        self.basis = np.cos(np.pi * np.outer(t, k))
        self.dbasis = -(np.pi * k / (hi - lo)) * np.sin(np.pi * np.outer(t, k))
        self.qw = self.grid.weights
        self.g = w.evaluate(self.grid.nodes)
        self.d_eff = measure.effective_dimension(cone, w)
        self.p_ball, self.m_ball, self.q_ball = measure.ball_reference(self.grid, w)

    def quotient(self, coeffs):
        """Q of the profile 1 + basis @ coeffs; penalized when the profile
        dips below the positivity floor."""
        s = 1.0 + self.basis @ coeffs
        smin = s.min()
        if smin < PROFILE_FLOOR:
            return 1e6 * (1.0 + PROFILE_FLOOR - smin)
        sd = self.dbasis @ coeffs
        d = self.d_eff
        p = float(np.dot(self.qw, self.g * s ** (d - 2.0) * np.sqrt(s * s + sd * sd)))
        m = float(np.dot(self.qw, self.g * s**d)) / d
        return p / m ** ((d - 1.0) / d)

    def deficit(self, coeffs):
        return self.quotient(coeffs) / self.q_ball - 1.0

    def domain(self, coeffs, renormalize=True):
        """StarDomain of the mode vector, rescaled to the cap-ball volume."""
        s = 1.0 + self.basis @ coeffs
        dom = from_profile(self.grid, s)
        if renormalize:
            m = measure.volume(dom, self.w)
            dom = dom.scaled((self.m_ball / m) ** (1.0 / self.d_eff))
        return dom


def nelder_mead(f, x0, step=0.05, ftol=1e-12, xtol=1e-8, max_iter=3000):
    """Classic simplex descent; returns (x_best, f_best, history, n_eval).

    ``history`` is the best value seen after each iteration, so it is
    non-increasing by construction.
    """
    x0 = np.asarray(x0, dtype=float)
    k = len(x0)
    simplex = np.vstack([x0] + [x0 + step * np.eye(k)[i] for i in range(k)])
    fvals = np.array([f(x) for x in simplex])
    n_eval = k + 1
    history = [float(fvals.min())]
    for _ in range(max_iter):
        order = np.argsort(fvals, kind="stable")
        simplex, fvals = simplex[order], fvals[order]
        centroid = simplex[:-1].mean(axis=0)
        xr = centroid + (centroid - simplex[-1])
        fr = f(xr)
        n_eval += 1
        if fr < fvals[0]:
            xe = centroid + 2.0 * (centroid - simplex[-1])
            fe = f(xe)
            n_eval += 1
            simplex[-1], fvals[-1] = (xe, fe) if fe < fr else (xr, fr)
        elif fr < fvals[-2]:
            simplex[-1], fvals[-1] = xr, fr
        else:
            inside = fr >= fvals[-1]
            xc = centroid + (-0.5 if inside else 0.5) * (centroid - simplex[-1])
            fc = f(xc)
            n_eval += 1
            if fc < min(fr, fvals[-1]):
                simplex[-1], fvals[-1] = xc, fc
            else:
                # shrink toward the best vertex
                simplex[1:] = simplex[0] + 0.5 * (simplex[1:] - simplex[0])
                fvals[1:] = [f(x) for x in simplex[1:]]
                n_eval += k
        history.append(min(history[-1], float(fvals.min())))
        spread = fvals.max() - fvals.min()
        size = np.max(np.abs(simplex - simplex[0]))
        if spread < ftol and size < xtol:
            break
    best = int(np.argmin(fvals))
    return simplex[best].copy(), float(fvals[best]), history, n_eval


def gradient_descent(f, x0, fd_step=1e-5, max_iter=500, gtol=1e-9, ftol=1e-13):
    """Finite-difference steepest descent with Armijo backtracking."""
    x = np.asarray(x0, dtype=float).copy()
    fx = f(x)
    n_eval = 1
    history = [fx]
    step = 0.1
    for _ in range(max_iter):
        grad = np.empty_like(x)
        for i in range(len(x)):
            e = np.zeros_like(x)
            e[i] = fd_step
            grad[i] = (f(x + e) - f(x - e)) / (2.0 * fd_step)
        n_eval += 2 * len(x)
        gnorm2 = float(np.dot(grad, grad))
        if math.sqrt(gnorm2) < gtol:
            break
        t = step
        accepted = False
        for _ in range(40):
            cand = x - t * grad
            fc = f(cand)
            n_eval += 1
            if fc <= fx - 1e-4 * t * gnorm2:
                x, fx = cand, fc
                step = min(t * 2.0, 1.0)
                accepted = True
                break
            t *= 0.5
        history.append(fx)
        if not accepted or (len(history) > 2 and history[-2] - history[-1] < ftol):
            break
    return x, float(fx), history, n_eval


@dataclass(frozen=True, eq=False)
class OptimResult:
    """Best profile found by the multi-start search.

    ``history`` tracks the winning start's best-so-far objective values.
    ``report`` is an independent re-measurement of the returned profile
    through the stencil-derivative path.
    """

    best_Q: float
    Q_ball: float
    deficit: float
    coeffs: np.ndarray = field(repr=False)
    history: list = field(repr=False)
    n_eval: int = 0
    starts: int = 1
    seed: int = 0
    method: str = NELDER_MEAD
    report: measure.MeasureReport | None = None
    domain: object = field(default=None, repr=False)


def _initial_coeffs(modes, start_index, seed, amplitude):
    if start_index == 0:
        return np.zeros(modes)
    rng = np.random.default_rng([seed, start_index])
    direction = rng.standard_normal(modes)
    amp = rng.uniform(0.05, amplitude)
    return amp * direction / np.abs(direction).sum()


def minimize_quotient(
    cone: ConvexCone,
    w,
    n=128,
    modes=8,
    starts=20,
    seed=0,
    method=NELDER_MEAD,
    max_iter=3000,
    ftol_rel=1e-12,
    init_amplitude=0.25,
    tie_rel=1e-9,
    workers=None,
):
    """Multi-start search for the minimal quotient in the mode family.

    Start 0 is the unperturbed ball; the rest draw mode vectors of relative
    amplitude up to ``init_amplitude``.  Ties within ``tie_rel * Q_ball``
    break toward the smallest mode vector: where minimizers come in exact
    families (the half-plane cap ball slides freely along the wall) the
    least-perturbed representative is returned.

    Starts are independent; ``workers`` > 1 runs them on a thread pool
    (default from CONISO_THREADS).  Results are merged in start order, so
    the outcome does not depend on scheduling.
    """
    if method not in (NELDER_MEAD, FD_GRADIENT):
        raise ValueError(f"unknown optimizer {method!r}")
    if workers is None:
        workers = max(1, int(os.environ.get("CONISO_THREADS", "1")))
    obj = ModeObjective(cone, w, n=n, modes=modes)
    ftol = ftol_rel * obj.q_ball

    def one_start(i):
        x0 = _initial_coeffs(obj.modes, i, seed, init_amplitude)
        if method == NELDER_MEAD:
            return nelder_mead(obj.quotient, x0, ftol=ftol, max_iter=max_iter)
        return gradient_descent(obj.quotient, x0, max_iter=max_iter)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(one_start, range(starts)))
    else:
        runs = [one_start(i) for i in range(starts)]
    candidates = [(fx, x, history) for x, fx, history, _ in runs]
    total_eval = sum(r[3] for r in runs)
    q_min = min(c[0] for c in candidates)
    eligible = [c for c in candidates if c[0] <= q_min + tie_rel * obj.q_ball]
    fx, x, history = min(eligible, key=lambda c: float(np.linalg.norm(c[1])))
    dom = obj.domain(x)
    return OptimResult(
        best_Q=fx,
        Q_ball=obj.q_ball,
        deficit=fx / obj.q_ball - 1.0,
        coeffs=x,
        history=history,
        n_eval=total_eval,
        starts=starts,
        seed=seed,
        method=method,
        report=measure.quotient(dom, w),
        domain=dom,
    )


@dataclass(frozen=True)
class SecondVariation:
    """Richardson-extrapolated curvature of Q at the ball along one mode."""

    mode: int
    value: float
    raw: tuple
    eps: tuple
    tail: float


def second_variation_coefficient(cone, w, mode, n=128, eps_list=(1e-2, 5e-3, 2.5e-3)):
    """Directional second difference of Q at the ball, extrapolated in eps.

    Each eps gives (Q(+eps) + Q(-eps) - 2 Q(0)) / eps**2 with the mode as
    the perturbation; successive halvings feed Richardson extrapolation.
    ``tail`` is the last extrapolation update, a convergence diagnostic.
    """
    if len(eps_list) < 2:
        raise ValueError("need at least two eps values for extrapolation")
    obj = ModeObjective(cone, w, n=n, modes=mode)
    q0 = obj.quotient(np.zeros(mode))
    raw = []
    for eps in eps_list:
        c = np.zeros(mode)
        c[mode - 1] = eps
        qp = obj.quotient(c)
        c[mode - 1] = -eps
        qm = obj.quotient(c)
        raw.append((qp + qm - 2.0 * q0) / eps**2)
    level = list(raw)
    order = 2.0
    while len(level) > 1:
        factor = 2.0**order
        level = [
            (factor * level[i + 1] - level[i]) / (factor - 1.0) for i in range(len(level) - 1)
        ]
        order += 2.0
    prev = raw if len(raw) == 2 else [(4.0 * raw[i + 1] - raw[i]) / 3.0 for i in range(len(raw) - 1)]
    tail = abs(level[0] - prev[-1]) if len(prev) else 0.0
    return SecondVariation(
        mode=mode, value=float(level[0]), raw=tuple(raw), eps=tuple(eps_list), tail=float(tail)
    )


@dataclass(frozen=True, eq=False)
class AngleScan:
    """Dichotomy scan over sector angles for one rotation-invariant weight.

    Classification is reported at the scan angles; the critical-angle
    bracket comes from bisection between them, using both estimators
    (optimizer margin and second-variation sign).  ``agreement_ok`` states
    that the two estimators classify every scan angle outside the bracket
    identically.
    """

    degree: float
    betas: np.ndarray
    deficits: np.ndarray
    c2_min: np.ndarray
    opt_class: list
    c2_class: list
    bracket: tuple | None
    bracket_opt: tuple | None
    bracket_c2: tuple | None
    agreement_ok: bool
    disagreements: list
    competitor_beta: float | None = None
    competitor_deficit: float | None = None
    competitor_remeasured: float | None = None
    competitor_coeffs: np.ndarray | None = field(default=None, repr=False)

    @property
    def bracket_width(self):
        return None if self.bracket is None else self.bracket[1] - self.bracket[0]


def _bisect(predicate, lo, hi, target_width):
    """Shrink [lo, hi] with predicate False at lo, True at hi."""
    while hi - lo > target_width:
        mid = 0.5 * (lo + hi)
        if predicate(mid):
            hi = mid
        else:
            lo = mid
    return lo, hi


def scan_critical_angle(
    w,
    betas=None,
    n=96,
    modes=6,
    starts=10,
    seed=0,
    c2_modes=3,
    ball_tol=1e-6,
    margin=1e-4,
    bracket_target=1e-2,
    max_iter=1500,
):
    """Locate where the cap ball stops minimizing, for sector cones.

    Parameters
    ----------
    w : HomogeneousWeight
        Must be rotation-invariant (constant or radial power), so that a
        single weight makes sense across every sector angle.
    betas : array-like or None
        Scan angles; defaults to 16 points spanning (0.8, 3.05).
    ball_tol, margin : float
        An angle counts ball-optimal when the optimized deficit stays
        above -ball_tol, ball-beaten when it drops below -margin.

    Returns
    -------
    AngleScan
    """
    if w.kind == "monomial":
        raise ValueError("angle scans need a rotation-invariant weight")
    if betas is None:
        betas = np.linspace(0.8, 3.05, 16)
    betas = np.asarray(betas, dtype=float)
    if np.any(np.diff(betas) <= 0.0) or betas[0] <= 0.0 or betas[-1] > np.pi:
        raise ValueError("scan angles must increase within (0, pi]")

    def c2_min_at(beta):
        return min(
            second_variation_coefficient(sector(beta), w, k, n=n).value
            for k in range(1, c2_modes + 1)
        )

    def deficit_at(beta, n_starts):
        res = minimize_quotient(
            sector(beta), w, n=n, modes=modes, starts=n_starts, seed=seed, max_iter=max_iter
        )
        return res

    deficits = np.empty(len(betas))
    c2_vals = np.empty(len(betas))
    results = []
    for i, beta in enumerate(betas):
        res = deficit_at(beta, starts)
        results.append(res)
        deficits[i] = res.deficit
        c2_vals[i] = c2_min_at(beta)

    def opt_classify(d):
        if d >= -ball_tol:
            return BALL_OPTIMAL
        if d < -margin:
            return BALL_BEATEN
        return UNDECIDED

    def c2_classify(c):
        tol = 1e-8
        if c > tol:
            return BALL_OPTIMAL
        if c < -tol:
            return BALL_BEATEN
        return UNDECIDED

    opt_class = [opt_classify(d) for d in deficits]
    c2_class = [c2_classify(c) for c in c2_vals]

    # bracket each estimator's crossing by bisection between grid neighbours
    target = bracket_target / 2.5
    bracket_c2 = bracket_opt = None
    sign_flip = np.nonzero((c2_vals[:-1] > 0.0) & (c2_vals[1:] <= 0.0))[0]
    if len(sign_flip):
        i = int(sign_flip[0])
        bracket_c2 = _bisect(lambda b: c2_min_at(b) <= 0.0, betas[i], betas[i + 1], target)
    flip = np.nonzero((deficits[:-1] >= -ball_tol) & (deficits[1:] < -ball_tol))[0]
    if len(flip):
        i = int(flip[0])
        bisect_starts = max(4, starts // 2)
        bracket_opt = _bisect(
            lambda b: deficit_at(b, bisect_starts).deficit < -ball_tol,
            betas[i],
            betas[i + 1],
            target,
        )

    bracket = None
    if bracket_c2 and bracket_opt:
        bracket = (min(bracket_c2[0], bracket_opt[0]), max(bracket_c2[1], bracket_opt[1]))
    elif bracket_c2 or bracket_opt:
        bracket = bracket_c2 or bracket_opt

    disagreements = []
    for i, beta in enumerate(betas):
        if bracket and bracket[0] <= beta <= bracket[1]:
            continue
        below = bracket is None or beta < bracket[0]
        want = BALL_OPTIMAL if below else BALL_BEATEN
        if opt_class[i] != want or c2_class[i] != want:
            disagreements.append((float(beta), opt_class[i], c2_class[i]))

    competitor_beta = competitor_deficit = competitor_remeasured = None
    competitor_coeffs = None
    beaten = [i for i, cl in enumerate(opt_class) if cl == BALL_BEATEN]
    if beaten:
        i = beaten[-1]
        res = results[i]
        competitor_beta = float(betas[i])
        competitor_deficit = float(res.deficit)
        competitor_remeasured = float(res.report.deficit)
        competitor_coeffs = res.coeffs

    return AngleScan(
        degree=w.degree,
        betas=betas,
        deficits=deficits,
        c2_min=c2_vals,
        opt_class=opt_class,
        c2_class=c2_class,
        bracket=bracket,
        bracket_opt=bracket_opt,
        bracket_c2=bracket_c2,
        agreement_ok=not disagreements,
        disagreements=disagreements,
        competitor_beta=competitor_beta,
        competitor_deficit=competitor_deficit,
        competitor_remeasured=competitor_remeasured,
        competitor_coeffs=competitor_coeffs,
    )
