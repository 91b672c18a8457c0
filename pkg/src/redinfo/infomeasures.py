"""Shannon quantities in bits, plus specific information and I_min."""

from __future__ import annotations

import numpy as np

from .dist import CondFamily, Dist, Joint3, Selector, cond_family, parse_selector, table
from .errors import AbsoluteContinuityViolation, ConsistencyError, DimensionMismatch, ZeroProbabilityOutcome

CLAMP = 1e-12


def _clamp(value: float, what: str, window: float = CLAMP) -> float:
    if value < -window:
        raise ConsistencyError(f"{what} = {value!r} is negative beyond round-off")
    return max(float(value), 0.0)


def entropy(p) -> float:
    probs = p.probs if isinstance(p, Dist) else np.asarray(p, dtype=float)
    nz = probs[probs > 0]
    return _clamp(-np.sum(nz * np.log2(nz)), "entropy")


def kl(p, q) -> float:
    """D_KL(p || q) in bits, with 0 log 0 = 0."""
    if isinstance(p, Dist) and isinstance(q, Dist) and p.alphabet != q.alphabet:
        raise DimensionMismatch("kl requires distributions over the same alphabet")
    p = p.probs if isinstance(p, Dist) else np.asarray(p, dtype=float)
    q = q.probs if isinstance(q, Dist) else np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise DimensionMismatch(f"shapes {p.shape} and {q.shape} differ")
    s = p > 0
    if np.any(q[s] <= 0):
        raise AbsoluteContinuityViolation("support of p is not contained in support of q")
    return _clamp(np.sum(p[s] * np.log2(p[s] / q[s])), "kl")


def _mi_table(t: np.ndarray) -> float:
    pa = t.sum(axis=1, keepdims=True)
    pb = t.sum(axis=0, keepdims=True)
    s = t > 0
    return float(np.sum(t[s] * np.log2(t[s] / (pa * pb)[s])))


def mutual_information(j: Joint3, a: Selector, b: Selector) -> float:
    return _clamp(_mi_table(table(j, a, b)), "mutual information")


def conditional_mutual_information(j: Joint3, a: Selector, b: Selector, given: Selector) -> float:
    """I(A;B|C) = I(A;B,C) - I(A;C)."""
    bc = tuple(parse_selector(b)) + tuple(parse_selector(given))
    joint = _mi_table(table(j, a, "".join("xyz"[i] for i in bc)))
    return _clamp(joint - _mi_table(table(j, a, given)), "conditional mutual information")


def specific_information(z, fam: CondFamily) -> float:
    """I(Z=z; A) = D_KL(p(a|z) || p(a)) for the family ``{p(.|a)}`` with weights ``p(a)``."""
    k = fam.target.index(z) if not isinstance(z, (int, np.integer)) else int(z)
    pa = fam.weights.probs
    joint = pa * fam.matrix[:, k]
    pz = joint.sum()
    if pz <= 0:
        raise ZeroProbabilityOutcome(f"p(z={fam.target.symbols[k]}) = 0")
    return kl(joint / pz, pa)


def i_min(j: Joint3, source_a: Selector = "x", source_b: Selector = "y", target: Selector = "z") -> float:
    """Williams-Beer minimal information: sum_z p(z) min_i I(Z=z; A_i)."""
    fa = cond_family(j, source_a, target)
    fb = cond_family(j, source_b, target)
    pz = fa.target_marginal().probs
    total = 0.0
    for k in np.flatnonzero(pz > 0):
        total += pz[k] * min(specific_information(int(k), fa), specific_information(int(k), fb))
    return _clamp(total, "I_min")
