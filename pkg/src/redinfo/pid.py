"""Bivariate redundancy measures and the partial information decomposition."""

from __future__ import annotations

from dataclasses import dataclass

from .dist import Joint3, Selector, parse_selector
from .errors import ConsistencyError, ValidationError
from .infomeasures import i_min, mutual_information
from .projection import DEFAULT_CONFIG, SolverConfig, projected_information_detail

ATOM_CLAMP = 1e-9
MEASURES = ("I_red", "I_min")


def _atom(value: float, what: str) -> float:
    if value < -ATOM_CLAMP:
        raise ConsistencyError(f"{what} atom = {value!r} is negative beyond round-off")
    return max(value, 0.0)


def _join(a: Selector, b: Selector) -> str:
    return "".join("xyz"[i] for i in parse_selector(a) + parse_selector(b))


@dataclass(frozen=True)
class Diagnostics:
    max_kkt: float = 0.0
    max_iterations: int = 0
    converged: bool = True


@dataclass(frozen=True)
class PIDecomposition:
    redundant: float
    unique_x: float
    unique_y: float
    synergy: float
    total: float
    measure_tag: str
    diagnostics: Diagnostics = Diagnostics()

    def as_dict(self) -> dict[str, float]:
        return {
            "redundant": self.redundant,
            "unique_x": self.unique_x,
            "unique_y": self.unique_y,
            "synergy": self.synergy,
            "total": self.total,
        }


def _both_projections(j, a, b, target, cfg):
    pa = projected_information_detail(j, a, b, target, cfg)
    pb = projected_information_detail(j, b, a, target, cfg)
    diag = Diagnostics(
        max(pa.max_kkt, pb.max_kkt),
        max(pa.max_iterations, pb.max_iterations),
        pa.converged and pb.converged,
    )
    return pa.value, pb.value, diag


def i_red(j: Joint3, source_a: Selector = "x", source_b: Selector = "y", target: Selector = "z",
          cfg: SolverConfig = DEFAULT_CONFIG) -> float:
    """Redundancy as the smaller of the two projected informations."""
    ab, ba, _ = _both_projections(j, source_a, source_b, target, cfg)
    return min(ab, ba)


def self_redundancy(j: Joint3, source: Selector = "x", target: Selector = "z",
                    cfg: SolverConfig = DEFAULT_CONFIG) -> float:
    value = projected_information_detail(j, source, source, target, cfg).value
    mi = mutual_information(j, target, source)
    if abs(value - mi) > 1e-9:
        raise ConsistencyError(f"self-redundancy {value} differs from I = {mi}")
    return value


def _normalize_measure(measure: str) -> str:
    m = measure.lower().replace("_", "")
    if m in ("ired", "red"):
        return "I_red"
    if m in ("imin", "min"):
        return "I_min"
    raise ValidationError(f"unknown redundancy measure {measure!r}")


def decompose(j: Joint3, measure: str = "I_red", cfg: SolverConfig = DEFAULT_CONFIG,
              source_a: Selector = "x", source_b: Selector = "y", target: Selector = "z") -> PIDecomposition:
    """Split I(Z;X,Y) into redundant, unique and synergistic atoms."""
    tag = _normalize_measure(measure)
    total = mutual_information(j, target, _join(source_a, source_b))
    ia = mutual_information(j, target, source_a)
    ib = mutual_information(j, target, source_b)
    if tag == "I_red":
        ab, ba, diag = _both_projections(j, source_a, source_b, target, cfg)
        red = min(ab, ba)
    else:
        red, diag = i_min(j, source_a, source_b, target), Diagnostics()
    return PIDecomposition(
        redundant=_atom(red, "redundant"),
        unique_x=_atom(ia - red, "unique X"),
        unique_y=_atom(ib - red, "unique Y"),
        synergy=_atom(total - ia - ib + red, "synergy"),
        total=total,
        measure_tag=tag,
        diagnostics=diag,
    )
