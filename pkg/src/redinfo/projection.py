"""KL projection onto the convex closure of a conditional family.

Projecting ``p`` onto ``conv{p(.|y)}`` means finding mixture weights
``alpha`` on the simplex that minimize ``D(p || sum_y alpha_y p(.|y))``.
Up to a constant this is the cross-entropy ``-sum_z p(z) log q(z)`` of a
mixture with known components and fractional counts ``p(z)``, so the
expectation-maximization update

    alpha_y <- alpha_y * g_y,   g_y = sum_z p(z) p(z|y) / q(z)

is monotone and stays on the simplex.  EM alone has a slow linear tail, so
every iteration follows the EM step with a Newton step restricted to the
current support (equality constrained, feasibility-limited, accepted only if
it lowers the objective) and, when a dropped component has ``g_y > 1``, a
Frank-Wolfe step toward that vertex.  Every accepted step is a descent step.

At an optimum ``g_y = 1`` on the support and ``g_y <= 1`` off it; the KKT
residual reports the worst violation of that and is the convergence
certificate.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .dist import CondFamily, Dist, Joint3, Selector, cond_family, parse_selector
from .errors import ConsistencyError, DimensionMismatch, InfeasibleSupport, TooManyConditioners, ValidationError
from .infomeasures import kl, mutual_information

ZERO_WEIGHT = 1e-14
LOG_FLOOR = 1e-300
ULP_SLACK = 8 * np.finfo(float).eps


def _no_worse(fc: float, f: float) -> bool:
    # near the optimum the true decrease drops below the resolution of f
    return fc <= f + ULP_SLACK * max(1.0, abs(f))


@dataclass(frozen=True)
class SolverConfig:
    objective_tol: float = 1e-12
    kkt_tol: float = 1e-8
    max_iters: int = 100_000
    init: str = "weights"  # or "uniform"

    def __post_init__(self):
        if not (self.objective_tol > 0 and self.kkt_tol > 0 and self.max_iters > 0):
            raise ValidationError("solver tolerances and iteration cap must be strictly positive")
        if self.init not in ("weights", "uniform"):
            raise ValidationError(f"unknown initialization {self.init!r}")


DEFAULT_CONFIG = SolverConfig()


@dataclass(frozen=True)
class ProjectionResult:
    weights: np.ndarray
    q: Dist
    divergence: float
    kkt_residual: float
    iterations: int
    converged: bool = True
    history: tuple[float, ...] = field(default=(), repr=False)


def mixture(fam: CondFamily, alpha) -> Dist:
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (len(fam),):
        raise DimensionMismatch(f"expected {len(fam)} weights, got shape {alpha.shape}")
    if np.any(alpha < 0) or abs(alpha.sum() - 1.0) > 1e-12:
        raise ValidationError("mixture weights must lie on the simplex")
    q = alpha @ fam.matrix
    return Dist(fam.target, q / q.sum())


class _Problem:
    """Objective and derivatives restricted to supp(p); values in bits."""

    def __init__(self, p: np.ndarray, components: np.ndarray):
        s = p > 0
        self.pz = p[s]
        self.A = components[:, s]
        self.const = float(np.sum(self.pz * np.log2(self.pz)))

    def value(self, alpha) -> float:
        q = alpha @ self.A
        if np.any(q <= LOG_FLOOR):
            return math.inf
        return self.const - float(self.pz @ np.log2(q))

    def ratios(self, alpha) -> np.ndarray:
        return self.A @ (self.pz / (alpha @ self.A))


def kkt_residual(alpha: np.ndarray, g: np.ndarray) -> float:
    on = alpha >= ZERO_WEIGHT
    r_on = np.max(np.abs(g[on] - 1.0)) if on.any() else 0.0
    r_off = np.max(np.maximum(g[~on] - 1.0, 0.0)) if (~on).any() else 0.0
    return float(max(r_on, r_off))


def _newton_step(prob: _Problem, alpha: np.ndarray, f: float):
    free = np.flatnonzero(alpha >= ZERO_WEIGHT)
    if free.size < 2:
        return alpha, f
    q = alpha @ prob.A
    g = prob.A[free] @ (prob.pz / q)
    B = prob.A[free] * (np.sqrt(prob.pz) / q)
    H = B @ B.T
    n = free.size
    K = np.zeros((n + 1, n + 1))
    K[:n, :n] = H
    K[:n, n] = K[n, :n] = 1.0
    rhs = np.concatenate([g, [0.0]])
    sol = np.linalg.lstsq(K, rhs, rcond=1e-13)[0]
    d = sol[:n]
    d -= d.mean()  # re-impose sum(d) = 0 against round-off
    if not np.all(np.isfinite(d)) or float(g @ d) <= 0:
        return alpha, f
    neg = d < 0
    t_max = float(np.min(alpha[free][neg] / -d[neg])) if neg.any() else math.inf
    t = min(1.0, t_max)
    for _ in range(40):
        cand = alpha.copy()
        cand[free] += t * d
        if t == t_max:
            blocking = free[neg][np.argmin(alpha[free][neg] / -d[neg])]
            cand[blocking] = 0.0
        cand = np.clip(cand, 0.0, None)
        cand /= cand.sum()
        fc = prob.value(cand)
        if _no_worse(fc, f):
            return cand, fc
        t *= 0.5
    return alpha, f


def _frank_wolfe_step(prob: _Problem, alpha: np.ndarray, f: float, g: np.ndarray, tol: float):
    off = alpha < ZERO_WEIGHT
    if not off.any():
        return alpha, f
    cand_g = np.where(off, g, -np.inf)
    y = int(np.argmax(cand_g))
    if cand_g[y] <= 1.0 + tol:
        return alpha, f
    e = np.zeros_like(alpha)
    e[y] = 1.0
    q0, qe = alpha @ prob.A, e @ prob.A

    def slope(t):  # derivative of the objective along the segment, up to 1/ln2
        q = (1 - t) * q0 + t * qe
        with np.errstate(divide="ignore", invalid="ignore"):
            s = -float(np.sum(prob.pz * (qe - q0) / q))
        return s if math.isfinite(s) else math.inf

    if slope(1.0) <= 0:
        t = 1.0
    else:
        lo, hi = 0.0, 1.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if slope(mid) < 0:
                lo = mid
            else:
                hi = mid
        t = lo
    while t > 0:
        cand = (1 - t) * alpha + t * e
        fc = prob.value(cand)
        if _no_worse(fc, f):
            return cand / cand.sum(), fc
        t *= 0.5
        if t < 1e-16:
            break
    return alpha, f


def project(p: Dist, fam: CondFamily, cfg: SolverConfig = DEFAULT_CONFIG, *, record: bool = False) -> ProjectionResult:
    """Information projection of ``p`` onto the convex closure of ``fam``.

    Only the achieved divergence is unique; any minimizing weights may be
    returned.  Hitting ``cfg.max_iters`` returns the best iterate with
    ``converged=False`` rather than raising.
    """
    if p.alphabet != fam.target:
        raise DimensionMismatch("distribution and family must share the target alphabet")
    if len(fam) == 0:
        raise ValidationError("cannot project onto an empty family")
    prob = _Problem(p.probs, fam.matrix)
    if np.any(prob.A.max(axis=0) <= 0):
        raise InfeasibleSupport("no mixture of the family covers the support of p")

    alpha = fam.weights.probs.copy() if cfg.init == "weights" else np.full(len(fam), 1.0 / len(fam))
    f = prob.value(alpha)
    if not math.isfinite(f):
        alpha = np.full(len(fam), 1.0 / len(fam))
        f = prob.value(alpha)
    history = [f] if record else None

    g = prob.ratios(alpha)
    res = kkt_residual(alpha, g)
    converged = False
    it = 0
    while it < cfg.max_iters:
        it += 1
        f_prev = f
        em = alpha * g
        em /= em.sum()
        f_em = prob.value(em)
        if _no_worse(f_em, f):
            alpha, f = em, f_em
        alpha, f = _newton_step(prob, alpha, f)
        g = prob.ratios(alpha)
        alpha, f = _frank_wolfe_step(prob, alpha, f, g, cfg.kkt_tol)
        g = prob.ratios(alpha)
        res = kkt_residual(alpha, g)
        if record:
            history.append(f)
        if f_prev - f < cfg.objective_tol and res <= cfg.kkt_tol:
            converged = True
            break

    q = alpha @ fam.matrix
    return ProjectionResult(
        weights=alpha,
        q=Dist(fam.target, q / q.sum()),
        divergence=max(f, 0.0),
        kkt_residual=res,
        iterations=it,
        converged=converged,
        history=tuple(history) if record else (),
    )


def _simplex_grid(n: int, steps: int):
    """Yield integer compositions of ``steps`` into ``n`` parts, chunked.

    The leading ``n - 2`` coordinates are enumerated in Python, the last two
    vectorized.
    """
    if n == 1:
        yield np.array([[steps]])
        return
    for head in itertools.product(range(steps + 1), repeat=n - 2):
        rem = steps - sum(head)
        if rem < 0:
            continue
        k = np.arange(rem + 1)
        chunk = np.empty((rem + 1, n), dtype=np.int64)
        chunk[:, : n - 2] = head
        chunk[:, n - 2] = k
        chunk[:, n - 1] = rem - k
        yield chunk


def brute_force_project(p: Dist, fam: CondFamily, grid_steps: int = 1000) -> ProjectionResult:
    """Exhaustive search over the simplex grid ``alpha = k / grid_steps``."""
    if len(fam) > 4:
        raise TooManyConditioners(f"brute force supports at most 4 conditioners, got {len(fam)}")
    if p.alphabet != fam.target:
        raise DimensionMismatch("distribution and family must share the target alphabet")
    prob = _Problem(p.probs, fam.matrix)
    best_f, best_k = math.inf, None
    with np.errstate(divide="ignore"):
        for chunk in _simplex_grid(len(fam), grid_steps):
            q = (chunk / grid_steps) @ prob.A
            vals = prob.const - np.log2(np.where(q > LOG_FLOOR, q, 0.0)) @ prob.pz
            i = int(np.argmin(vals))
            if vals[i] < best_f:
                best_f, best_k = float(vals[i]), chunk[i]
    if best_k is None or not math.isfinite(best_f):
        raise InfeasibleSupport("no grid point covers the support of p")
    alpha = best_k / grid_steps
    q = alpha @ fam.matrix
    return ProjectionResult(
        weights=alpha,
        q=Dist(fam.target, q / q.sum()),
        divergence=max(best_f, 0.0),
        kkt_residual=kkt_residual(alpha, prob.ratios(alpha)),
        iterations=0,
    )


@dataclass(frozen=True)
class ProjectedInformation:
    value: float
    mutual_information: float
    residuals: tuple[float, ...]  # p(x) * D(p(z|x) || q_x), per conditioner
    projections: tuple[ProjectionResult, ...]

    @property
    def max_kkt(self) -> float:
        return max((r.kkt_residual for r in self.projections), default=0.0)

    @property
    def max_iterations(self) -> int:
        return max((r.iterations for r in self.projections), default=0)

    @property
    def converged(self) -> bool:
        return all(r.converged for r in self.projections)


def projected_information_detail(
    j: Joint3, source: Selector, onto: Selector, target: Selector = "z", cfg: SolverConfig = DEFAULT_CONFIG
) -> ProjectedInformation:
    mi = mutual_information(j, target, source)
    if parse_selector(source) == parse_selector(onto):
        return ProjectedInformation(mi, mi, (), ())
    src = cond_family(j, source, target)
    dst = cond_family(j, onto, target)
    results, residuals = [], []
    for w, row in zip(src.weights.probs, src.matrix):
        r = project(Dist(src.target, row), dst, cfg)
        results.append(r)
        residuals.append(w * r.divergence)
    value = mi - float(np.sum(residuals))
    # the marginal is always feasible, so the residual never exceeds I(Z;X)
    if value < -1e-9:
        raise ConsistencyError(f"projected information {value!r} is negative")
    return ProjectedInformation(min(max(value, 0.0), mi), mi, tuple(residuals), tuple(results))


def projected_information(
    j: Joint3, source: Selector, onto: Selector, target: Selector = "z", cfg: SolverConfig = DEFAULT_CONFIG
) -> float:
    """Information ``source`` carries about ``target`` expressible through ``onto``.

    Computed as ``I(Z;X) - sum_x p(x) D(p(z|x) || proj_x)`` with each
    conditional projected onto the closure of the ``onto`` family.
    """
    return projected_information_detail(j, source, onto, target, cfg).value


def marginal_divergence(p: Dist, fam: CondFamily) -> float:
    """D(p || p(z)), the divergence at the always-feasible marginal."""
    return kl(p, fam.target_marginal())
