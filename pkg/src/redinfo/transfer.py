"""Transfer-entropy decomposition, example mechanisms and example processes.

Transfer joints use a fixed role layout: axis ``x`` is the current state of
the receiving process, ``y`` the input (source process or controller) and
``z`` the next state.  With that layout the PI decomposition of
``I(next; state, input)`` gives SITE as the input's unique atom and SDTE as
the synergy atom.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dist import Alphabet, Joint3, from_mechanism, from_records
from .errors import NonConvergence, ParamOutOfRange, RowNotNormalized, UnknownExample, ValidationError
from .infomeasures import conditional_mutual_information, mutual_information
from .pid import PIDecomposition, decompose, _atom
from .projection import DEFAULT_CONFIG, SolverConfig

BITS = Alphabet(("0", "1"))


def _check_unit(name: str, value: float):
    if not (0.0 <= value <= 1.0) or math.isnan(value):
        raise ParamOutOfRange(f"{name} = {value!r} must lie in [0, 1]")


# -- Stationary distributions -----------------------------------------------

def stationary_distribution(kernel, tol: float = 1e-12, max_steps: int = 1_000_000) -> np.ndarray:
    """Cesaro limit of power iteration from the uniform start.

    For aperiodic chains this is the plain fixed point; when iterates settle
    into a cycle, the average over one period is returned.  Non-ergodic
    chains get the limit reached from the uniform start.
    """
    K = np.asarray(kernel, dtype=float)
    n = K.shape[0]
    if K.shape != (n, n) or np.any(K < 0) or np.any(np.abs(K.sum(axis=1) - 1) > 1e-9):
        raise RowNotNormalized("kernel must be a square row-stochastic matrix")
    max_period = max(n * n, 2)
    hist = [np.full(n, 1.0 / n)]
    for _ in range(max_steps):
        hist.append(hist[-1] @ K)
        if len(hist) > max_period + 1:
            hist.pop(0)
        for period in range(1, len(hist)):
            if np.max(np.abs(hist[-1] - hist[-1 - period])) <= tol:
                pi = np.mean(hist[-period:], axis=0)
                return pi / pi.sum()
    raise NonConvergence(f"power iteration did not settle within {max_steps} steps")


# -- Channels ---------------------------------------------------------------

@dataclass(frozen=True)
class ChannelSpec:
    """A kernel ``p(next | state, input)`` of shape (|state|, |input|, |next|)."""

    state: Alphabet
    input: Alphabet
    next: Alphabet
    kernel: np.ndarray

    def __post_init__(self):
        k = np.array(self.kernel, dtype=float)
        if k.shape != (len(self.state), len(self.input), len(self.next)):
            raise ValidationError(f"kernel shape {k.shape} does not match alphabets")
        if np.any(k < 0) or np.any(np.abs(k.sum(axis=2) - 1.0) > 1e-9):
            raise RowNotNormalized("every (state, input) row of the kernel must be a distribution")
        k.setflags(write=False)
        object.__setattr__(self, "kernel", k)


def joint_from_channel(ch: ChannelSpec, p_state, p_input_given_state, names=("state", "input", "next")) -> Joint3:
    """One-step joint with layout (x=state, y=input, z=next)."""
    ps = np.asarray(p_state, dtype=float)
    pc = np.asarray(p_input_given_state, dtype=float)
    if pc.ndim == 1:
        pc = np.broadcast_to(pc, (len(ch.state), len(ch.input)))
    return from_mechanism(ps[:, None] * pc, ch.kernel, ch.state, ch.input, ch.next, names)


def stationary_joint(ch: ChannelSpec, p_input, names=("state", "input", "next")) -> Joint3:
    """Joint for an i.i.d. driving input, with the state at its stationary law.

    Requires ``next`` to range over the state alphabet.
    """
    if ch.next != ch.state:
        raise ValidationError("stationary joint needs next and state on the same alphabet")
    p_input = np.asarray(p_input, dtype=float)
    state_kernel = np.einsum("c,scn->sn", p_input, ch.kernel)
    return joint_from_channel(ch, stationary_distribution(state_kernel), p_input, names)


def is_perfectly_controllable(ch: ChannelSpec) -> bool:
    """Every next state is reachable with certainty from every state."""
    return bool(np.all(np.any(ch.kernel >= 1 - 1e-12, axis=1)))


def random_controllable_channel(rng: np.random.Generator, n_states: int, n_controls: int,
                                open_loop: bool = False) -> ChannelSpec:
    """Random perfectly controllable channel.

    Per state, a random permutation of the first ``n_states`` controls hits
    every target deterministically; the remaining controls get random rows.
    With ``open_loop`` the kernel does not depend on the state at all.
    """
    if n_controls < n_states:
        raise ParamOutOfRange("perfect controllability needs at least as many controls as states")
    rows = 1 if open_loop else n_states
    k = np.zeros((rows, n_controls, n_states))
    for s in range(rows):
        perm = rng.permutation(n_states)
        k[s, np.arange(n_states), perm] = 1.0
        extra = rng.random((n_controls - n_states, n_states))
        k[s, n_states:] = extra / extra.sum(axis=1, keepdims=True)
        k[s] = k[s, rng.permutation(n_controls)]
    k = np.broadcast_to(k, (n_states, n_controls, n_states))
    a = Alphabet.range(n_states)
    return ChannelSpec(a, Alphabet.range(n_controls), a, k)


# -- Transfer entropy -------------------------------------------------------

@dataclass(frozen=True)
class TransferDecomposition:
    transfer_entropy: float
    site: float
    sdte: float
    measure_tag: str
    pid: PIDecomposition | None = None


def transfer_entropy(j: Joint3) -> float:
    """T = I(next; input | state)."""
    return conditional_mutual_information(j, "z", "y", "x")


def decompose_transfer(j: Joint3, measure: str = "I_red", cfg: SolverConfig = DEFAULT_CONFIG) -> TransferDecomposition:
    d = decompose(j, measure, cfg)
    te = transfer_entropy(j)
    return TransferDecomposition(
        transfer_entropy=te,
        site=_atom(d.unique_y, "SITE"),
        sdte=_atom(d.synergy, "SDTE"),
        measure_tag=d.measure_tag,
        pid=d,
    )


# -- Example mechanisms -----------------------------------------------------

def _latent_pair(n: int, lam: float) -> np.ndarray:
    """p(a, b) for two copies of a uniform n-ary W, each kept with prob. 1 - lam."""
    _check_unit("lambda", lam)
    cond = lam / n + (1 - lam) * np.eye(n)  # p(a|w), rows indexed by w
    return np.einsum("w,wa,wb->ab", np.full(n, 1.0 / n), cond, cond)


def _deterministic(fn, nx: int, ny: int, nz: int) -> np.ndarray:
    m = np.zeros((nx, ny, nz))
    for a in range(nx):
        for b in range(ny):
            m[a, b, fn(a, b)] = 1.0
    return m


def build_copy(lam: float) -> Joint3:
    """Z = (X, Y) with X, Y noisy copies of a shared uniform bit."""
    pxy = _latent_pair(2, lam)
    return from_mechanism(pxy, _deterministic(lambda a, b: 2 * a + b, 2, 2, 4),
                          BITS, BITS, Alphabet.product(BITS, BITS))


def build_xor() -> Joint3:
    return from_mechanism(np.full((2, 2), 0.25), _deterministic(lambda a, b: a ^ b, 2, 2, 2), BITS, BITS, BITS)


def build_and() -> Joint3:
    return from_mechanism(np.full((2, 2), 0.25), _deterministic(lambda a, b: a & b, 2, 2, 2), BITS, BITS, BITS)


def build_xorand() -> Joint3:
    """Z = (X and Y, X xor Y)."""
    z = Alphabet.product(BITS, BITS)
    return from_mechanism(np.full((2, 2), 0.25), _deterministic(lambda a, b: 2 * (a & b) + (a ^ b), 2, 2, 4),
                          BITS, BITS, z)


def _label(*bits) -> str:
    return ",".join(str(b) for b in bits)


def build_rdnxor() -> Joint3:
    """Inputs (X, W), (Y, W); output Z = (W, X xor Y)."""
    pair = Alphabet.product(BITS, BITS)
    records = [
        (_label(x, w), _label(y, w), _label(w, x ^ y), 1 / 8)
        for x in (0, 1) for y in (0, 1) for w in (0, 1)
    ]
    return from_records(pair, pair, pair, records)


def build_rdnunqxor() -> Joint3:
    """Inputs (X1, X2, W), (Y1, Y2, W); output Z = (X1 xor Y1, (X2, Y2), W)."""
    triple = Alphabet.product(BITS, BITS, BITS)
    quad = Alphabet.product(BITS, BITS, BITS, BITS)
    records = [
        (_label(x1, x2, w), _label(y1, y2, w), _label(x1 ^ y1, x2, y2, w), 1 / 32)
        for x1 in (0, 1) for x2 in (0, 1) for y1 in (0, 1) for y2 in (0, 1) for w in (0, 1)
    ]
    return from_records(triple, triple, quad, records)


def build_dice(alpha: int, lam: float) -> Joint3:
    """R = alpha * D1 + D2 for two six-sided dice (faces 0..5) correlated through lam."""
    if int(alpha) != alpha or not 1 <= alpha <= 6:
        raise ParamOutOfRange(f"alpha = {alpha!r} must be an integer in 1..6")
    alpha = int(alpha)
    pdd = _latent_pair(6, lam)
    nr = 5 * alpha + 6
    return from_mechanism(pdd, _deterministic(lambda a, b: alpha * a + b, 6, 6, nr),
                          Alphabet.range(6), Alphabet.range(6), Alphabet.range(nr), names=("D1", "D2", "R"))


# -- Example processes ------------------------------------------------------

def process1_channel(d: float) -> ChannelSpec:
    """X copies Y when X is 0; when X is 1 it copies Y with prob. 1 - d, else flips it."""
    _check_unit("d", d)
    k = np.zeros((2, 2, 2))
    for y in (0, 1):
        k[0, y, y] = 1.0
        k[1, y, y] = 1 - d
        k[1, y, 1 - y] += d
    return ChannelSpec(BITS, BITS, BITS, k)


def build_process1(d: float) -> Joint3:
    """(x=X_t, y=Y_t, z=X_t+1) with Y uniform i.i.d."""
    return stationary_joint(process1_channel(d), [0.5, 0.5], names=("X_t", "Y_t", "X_t+1"))


def process2_reduced_channel(d: float) -> ChannelSpec:
    """Y_t+1 copies Y_t with prob. 1 - d and Z_t with prob. d."""
    _check_unit("d", d)
    k = np.zeros((2, 2, 2))
    for y in (0, 1):
        for z in (0, 1):
            k[y, z, y] += 1 - d
            k[y, z, z] += d
    return ChannelSpec(BITS, BITS, BITS, k)


def process2_channel(d: float) -> ChannelSpec:
    """State (X, Y): X is frozen, Y follows the reduced channel driven by Z."""
    red = process2_reduced_channel(d).kernel
    k = np.einsum("ab,ycn->aycbn", np.eye(2), red).reshape(4, 2, 4)
    xy = Alphabet.product(BITS, BITS)
    return ChannelSpec(xy, BITS, xy, k)


def build_process2(d: float) -> Joint3:
    """(x=(X_t,Y_t), y=Z_t, z=(X_t+1,Y_t+1)) with Z uniform i.i.d."""
    return stationary_joint(process2_channel(d), [0.5, 0.5], names=("(X_t,Y_t)", "Z_t", "(X_t+1,Y_t+1)"))


def build_process2_reduced(d: float) -> Joint3:
    """(x=Y_t, y=Z_t, z=Y_t+1) with Z uniform i.i.d."""
    return stationary_joint(process2_reduced_channel(d), [0.5, 0.5], names=("Y_t", "Z_t", "Y_t+1"))


# -- Registry used by the CLI -----------------------------------------------

def _h2(p: float) -> float:
    return -sum(v * math.log2(v) for v in (p, 1 - p) if v > 0)


def expected_redundancy(name: str, lam: float = 0.0, alpha: int = 1) -> float | None:
    """The intended redundancy for the classic examples; None when there is none."""
    if name == "copy":
        return mutual_information(build_copy(lam), "x", "y")
    return {
        "xor": 0.0,
        "and": _h2(0.25) - 0.5,
        "rdnxor": 1.0,
        "rdnunqxor": 1.0,
        "xorand": 0.5,
    }.get(name)


def build_example(name: str, lam: float = 0.0, alpha: int = 1) -> Joint3:
    builders = {
        "copy": lambda: build_copy(lam),
        "xor": build_xor,
        "and": build_and,
        "rdnxor": build_rdnxor,
        "rdnunqxor": build_rdnunqxor,
        "xorand": build_xorand,
        "dice": lambda: build_dice(alpha, lam),
    }
    if name not in builders:
        raise UnknownExample(f"unknown example {name!r}; choose from {sorted(builders)}")
    return builders[name]()


PROCESSES = {
    "process1": build_process1,
    "process2": build_process2,
    "process2reduced": build_process2_reduced,
}
