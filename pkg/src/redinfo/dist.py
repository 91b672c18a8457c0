"""Finite alphabets, distributions and three-variable joints.

A joint ``p(x, y, z)`` is stored densely as an array of shape
``(|X|, |Y|, |Z|)``.  Variables are addressed by *selectors*: a string of
axis letters (``"x"``, ``"z"``, ``"xy"``) or a tuple of them.  A selector
naming several axes denotes the composite variable over their product
alphabet, with labels joined by commas in lexicographic index order.

All objects are immutable once built; arrays are marked read-only.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import (
    DimensionMismatch,
    NegativeMass,
    NotNormalized,
    RowNotNormalized,
    ValidationError,
    ZeroTotal,
)

INPUT_TOL = 1e-6
INTERNAL_TOL = 1e-9
NEGATIVE_TOL = 1e-12

AXES = "xyz"
Selector = Union[str, Sequence[str]]


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Alphabet:
    symbols: tuple[str, ...]

    def __post_init__(self):
        syms = tuple(str(s) for s in self.symbols)
        if not syms:
            raise ValidationError("alphabet must be nonempty")
        if len(set(syms)) != len(syms):
            raise ValidationError(f"alphabet labels must be unique: {syms}")
        object.__setattr__(self, "symbols", syms)

    @classmethod
    def range(cls, n: int) -> "Alphabet":
        return cls(tuple(str(i) for i in range(n)))

    def __len__(self):
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def index(self, label) -> int:
        try:
            return self.symbols.index(str(label))
        except ValueError:
            raise ValidationError(f"unknown label {label!r}; expected one of {self.symbols}") from None

    @staticmethod
    def product(*alphabets: "Alphabet") -> "Alphabet":
        if len(alphabets) == 1:
            return alphabets[0]
        return Alphabet(tuple(",".join(t) for t in itertools.product(*(a.symbols for a in alphabets))))


@dataclass(frozen=True)
class Dist:
    alphabet: Alphabet
    probs: np.ndarray

    def __post_init__(self):
        p = _frozen(self.probs)
        if p.shape != (len(self.alphabet),):
            raise DimensionMismatch(f"expected {len(self.alphabet)} probabilities, got shape {p.shape}")
        if np.any(p < 0):
            raise NegativeMass(f"negative probability in {p}")
        if abs(p.sum() - 1.0) > INTERNAL_TOL:
            raise NotNormalized(f"probabilities sum to {p.sum()!r}")
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_dict(cls, mapping: Mapping[str, float], alphabet: Alphabet | None = None) -> "Dist":
        alphabet = alphabet or Alphabet(tuple(mapping))
        probs = np.zeros(len(alphabet))
        for label, value in mapping.items():
            probs[alphabet.index(label)] = value
        return cls(alphabet, probs)

    @classmethod
    def uniform(cls, alphabet: Alphabet) -> "Dist":
        return cls(alphabet, np.full(len(alphabet), 1.0 / len(alphabet)))

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.alphabet.symbols, self.probs.tolist()))

    def __getitem__(self, label) -> float:
        return float(self.probs[self.alphabet.index(label)])

    def __len__(self):
        return len(self.probs)


@dataclass(frozen=True)
class Joint3:
    """Joint distribution over X x Y x Z.

    Construction only checks shapes; run it through :func:`validate` to
    enforce non-negativity and normalization.
    """

    x: Alphabet
    y: Alphabet
    z: Alphabet
    probs: np.ndarray
    names: tuple[str, str, str] = field(default=("X", "Y", "Z"))

    def __post_init__(self):
        p = _frozen(self.probs)
        shape = (len(self.x), len(self.y), len(self.z))
        if p.shape != shape:
            raise DimensionMismatch(f"table shape {p.shape} does not match alphabets {shape}")
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "names", tuple(self.names))

    @property
    def alphabets(self) -> tuple[Alphabet, Alphabet, Alphabet]:
        return (self.x, self.y, self.z)

    @property
    def shape(self):
        return self.probs.shape

    def permute(self, order: str) -> "Joint3":
        """Reassign axes: ``order[i]`` is the current axis that becomes axis ``i``.

        ``j.permute("zyx")`` swaps the roles of X and Z.
        """
        if sorted(order) != sorted(AXES):
            raise ValidationError(f"bad axis permutation {order!r}")
        idx = [AXES.index(a) for a in order]
        return Joint3(
            *(self.alphabets[i] for i in idx),
            probs=np.transpose(self.probs, idx),
            names=tuple(self.names[i] for i in idx),
        )


def parse_selector(sel: Selector) -> tuple[int, ...]:
    letters = tuple(sel) if not isinstance(sel, str) else tuple(sel.lower())
    if not letters or any(a not in AXES for a in letters) or len(set(letters)) != len(letters):
        raise ValidationError(f"invalid variable selector {sel!r}")
    return tuple(AXES.index(a) for a in letters)


def selector_alphabet(j: Joint3, sel: Selector) -> Alphabet:
    return Alphabet.product(*(j.alphabets[i] for i in parse_selector(sel)))


def table(j: Joint3, *selectors: Selector) -> np.ndarray:
    """Marginal table with one (flattened) axis per selector."""
    groups = [parse_selector(s) for s in selectors]
    used = [a for g in groups for a in g]
    if len(set(used)) != len(used):
        raise ValidationError(f"selectors must be disjoint: {selectors}")
    rest = tuple(a for a in range(3) if a not in used)
    t = j.probs.sum(axis=rest) if rest else j.probs
    # after summing, remaining axes keep their relative order
    remaining = sorted(used)
    t = np.transpose(t, [remaining.index(a) for a in used])
    sizes = [int(np.prod([j.probs.shape[a] for a in g])) for g in groups]
    return t.reshape(sizes)


def validate(j: Joint3) -> Joint3:
    p = np.asarray(j.probs, dtype=float)
    if not np.all(np.isfinite(p)):
        raise ValidationError("table contains non-finite entries")
    if np.any(p < -NEGATIVE_TOL):
        where = tuple(int(i) for i in np.argwhere(p < -NEGATIVE_TOL)[0])
        labels = tuple(a.symbols[i] for a, i in zip(j.alphabets, where))
        raise NegativeMass(f"negative probability {p[where]} at (x, y, z) = {labels}")
    p = np.clip(p, 0.0, None)
    total = p.sum()
    if total <= 0:
        raise ZeroTotal("table has no probability mass")
    if abs(total - 1.0) > INPUT_TOL:
        raise NotNormalized(f"table sums to {total!r}, outside tolerance {INPUT_TOL}")
    return Joint3(j.x, j.y, j.z, p / total, j.names)


def marginal(j: Joint3, which: Selector) -> Dist:
    return Dist(selector_alphabet(j, which), table(j, which))


@dataclass(frozen=True)
class CondFamily:
    """The conditionals ``p(.|s)`` of a target given a source, with ``p(s)``.

    Conditioners of zero probability are dropped, so every row of
    ``matrix`` is a proper distribution and every weight is positive.
    """

    conditioners: Alphabet
    weights: Dist
    target: Alphabet
    matrix: np.ndarray

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.shape != (len(self.conditioners), len(self.target)):
            raise DimensionMismatch(f"family matrix shape {m.shape} does not match alphabets")
        if np.any(np.abs(m.sum(axis=1) - 1.0) > INTERNAL_TOL):
            raise RowNotNormalized("conditional rows must sum to 1")
        object.__setattr__(self, "matrix", m)

    def __len__(self):
        return len(self.conditioners)

    @property
    def conditionals(self) -> list[Dist]:
        return [Dist(self.target, row) for row in self.matrix]

    def conditional(self, label) -> Dist:
        return Dist(self.target, self.matrix[self.conditioners.index(label)])

    def target_marginal(self) -> Dist:
        q = self.weights.probs @ self.matrix
        return Dist(self.target, q / q.sum())


def cond_family(j: Joint3, source: Selector, target: Selector) -> CondFamily:
    t = table(j, source, target)
    ps = t.sum(axis=1)
    keep = ps > 0
    labels = selector_alphabet(j, source).symbols
    kept = Alphabet(tuple(l for l, k in zip(labels, keep) if k))
    weights = ps[keep] / ps[keep].sum()
    rows = t[keep] / ps[keep, None]
    return CondFamily(kept, Dist(kept, weights), selector_alphabet(j, target), rows)


def from_mechanism(
    pxy,
    mech,
    x: Alphabet | None = None,
    y: Alphabet | None = None,
    z: Alphabet | None = None,
    names=("X", "Y", "Z"),
) -> Joint3:
    """Joint ``p(x,y,z) = p(x,y) p(z|x,y)`` from input table and mechanism.

    ``mech`` has shape ``(|X|, |Y|, |Z|)``; every row ``mech[x, y]`` must be a
    distribution (rows where ``p(x,y) = 0`` are checked too).
    """
    pxy = np.asarray(pxy, dtype=float)
    mech = np.asarray(mech, dtype=float)
    if mech.ndim != 3 or mech.shape[:2] != pxy.shape:
        raise DimensionMismatch(f"mechanism shape {mech.shape} incompatible with inputs {pxy.shape}")
    if np.any(mech < -NEGATIVE_TOL) or np.any(np.abs(mech.sum(axis=2) - 1.0) > INPUT_TOL):
        bad = np.argwhere((np.abs(mech.sum(axis=2) - 1.0) > INPUT_TOL) | np.any(mech < -NEGATIVE_TOL, axis=2))
        raise RowNotNormalized(f"mechanism row {tuple(int(i) for i in bad[0])} is not a distribution")
    x = x or Alphabet.range(mech.shape[0])
    y = y or Alphabet.range(mech.shape[1])
    z = z or Alphabet.range(mech.shape[2])
    return validate(Joint3(x, y, z, pxy[:, :, None] * np.clip(mech, 0, None), names))


def from_records(
    x: Iterable[str],
    y: Iterable[str],
    z: Iterable[str],
    records: Iterable[tuple[str, str, str, float]],
    names=("X", "Y", "Z"),
) -> Joint3:
    """Joint from sparse ``(x, y, z, p)`` records; repeated triples accumulate."""
    ax, ay, az = Alphabet(tuple(x)), Alphabet(tuple(y)), Alphabet(tuple(z))
    p = np.zeros((len(ax), len(ay), len(az)))
    for a, b, c, v in records:
        p[ax.index(a), ay.index(b), az.index(c)] += v
    return validate(Joint3(ax, ay, az, p, names))


def regroup(probs, alphabets: Sequence[Alphabet], x: Sequence[int], y: Sequence[int], z: Sequence[int],
            names=("X", "Y", "Z")) -> Joint3:
    """Collapse a many-variable table into a Joint3 of composite variables.

    Axes not listed in ``x``, ``y`` or ``z`` are summed out.
    """
    probs = np.asarray(probs, dtype=float)
    groups = [tuple(x), tuple(y), tuple(z)]
    used = [a for g in groups for a in g]
    if len(set(used)) != len(used):
        raise ValidationError("axis groups must be disjoint")
    rest = tuple(a for a in range(probs.ndim) if a not in used)
    t = probs.sum(axis=rest) if rest else probs
    remaining = sorted(used)
    t = np.transpose(t, [remaining.index(a) for a in used])
    alph = [Alphabet.product(*(alphabets[a] for a in g)) for g in groups]
    return validate(Joint3(*alph, t.reshape([len(a) for a in alph]), names))


# -- JSON ingestion ---------------------------------------------------------

def joint_from_json(obj) -> Joint3:
    """Parse the ``{"x": [...], "y": [...], "z": [...], "p": [...]}`` format.

    ``obj`` may be a parsed dict, a JSON string or a path-like.
    """
    if not isinstance(obj, Mapping):
        text = str(obj)
        try:
            if text.lstrip()[:1] in ("{", "["):
                obj = json.loads(text)
            else:
                with open(text) as fh:
                    obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"malformed JSON: {exc}") from None
    if not isinstance(obj, Mapping):
        raise ValidationError("top-level JSON value must be an object")
    for key in ("x", "y", "z", "p"):
        if key not in obj:
            raise ValidationError(f"missing key {key!r}")
    ax, ay, az = (Alphabet(tuple(obj[k])) for k in "xyz")
    p = np.zeros((len(ax), len(ay), len(az)))
    seen = set()
    for n, rec in enumerate(obj["p"]):
        try:
            key = (ax.index(rec["x"]), ay.index(rec["y"]), az.index(rec["z"]))
            value = float(rec["p"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"record {n} {rec!r}: {exc}") from None
        if key in seen:
            raise ValidationError(f"record {n} {rec!r}: duplicate triple")
        if not np.isfinite(value) or value < 0:
            raise NegativeMass(f"record {n} {rec!r}: probability must be a finite non-negative number")
        seen.add(key)
        p[key] = value
    names = tuple(obj.get("names", ("X", "Y", "Z")))
    return validate(Joint3(ax, ay, az, p, names))


def joint_to_json(j: Joint3) -> dict:
    recs = [
        {"x": j.x.symbols[a], "y": j.y.symbols[b], "z": j.z.symbols[c], "p": float(j.probs[a, b, c])}
        for a, b, c in zip(*np.nonzero(j.probs))
    ]
    return {"x": list(j.x), "y": list(j.y), "z": list(j.z), "p": recs}


def random_joint(rng: np.random.Generator, shape, zero_prob: float = 0.5) -> Joint3:
    """Uniform[0,1] entries, each zeroed with probability ``zero_prob``, renormalized.

    All-zero draws are rejected and redrawn.
    """
    while True:
        u = rng.random(shape)
        u[rng.random(shape) < zero_prob] = 0.0
        if u.sum() > 0:
            break
    return Joint3(*(Alphabet.range(n) for n in shape), u / u.sum())
