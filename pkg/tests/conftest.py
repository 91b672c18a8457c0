import itertools
import math

import numpy as np
import pytest
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from redinfo.dist import Alphabet, Joint3, regroup, validate

ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE:
        terminalreporter.write_line(line)


@pytest.fixture
def record_criterion():
    def record(number, title, ok, detail=""):
        ACCEPTANCE.append(f"[{'PASS' if ok else 'FAIL'}] AC{number} {title}" + (f" -- {detail}" if detail else ""))
        return ok

    return record


@pytest.fixture
def rng():
    return np.random.default_rng(20120701)


def table_to_joint(p) -> Joint3:
    p = np.asarray(p, dtype=float)
    return validate(Joint3(*(Alphabet.range(n) for n in p.shape), p / p.sum()))


def sparse_table(rng, shape, zero_prob=0.5):
    while True:
        u = rng.random(shape)
        u[rng.random(shape) < zero_prob] = 0.0
        if u.sum() > 0:
            return u / u.sum()


def four_variable(rng, shape=None):
    """Random p(x, y, w, z) as (joint over X,Y,Z ; joint over X,(Y,W),Z)."""
    shape = shape or tuple(int(n) for n in rng.integers(2, 4, size=4))
    p = sparse_table(rng, shape)
    alph = [Alphabet.range(n) for n in shape]
    return regroup(p, alph, [0], [1], [3]), regroup(p, alph, [0], [1, 2], [3])


@st.composite
def joints(draw, max_size=4):
    shape = tuple(draw(st.integers(1, max_size)) for _ in range(3))
    p = draw(hnp.arrays(float, shape, elements=st.floats(0, 1, allow_nan=False, allow_subnormal=False)))
    p = np.where(p < 1e-3, 0.0, p)
    if p.sum() <= 0:
        p = np.zeros(shape)
        p.flat[0] = 1.0
    return table_to_joint(p)


# -- brute-force oracles, written with plain loops --------------------------

def oracle_mi(p2):
    """I(A;B) from a 2-D table by explicit enumeration."""
    rows, cols = len(p2), len(p2[0])
    pa = [sum(p2[a][b] for b in range(cols)) for a in range(rows)]
    pb = [sum(p2[a][b] for a in range(rows)) for b in range(cols)]
    total = 0.0
    for a, b in itertools.product(range(rows), range(cols)):
        if p2[a][b] > 0:
            total += p2[a][b] * math.log2(p2[a][b] / (pa[a] * pb[b]))
    return total


def oracle_entropy(ps):
    return -sum(v * math.log2(v) for v in ps if v > 0)
