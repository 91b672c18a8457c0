import numpy as np
import pytest

from redinfo.dist import Alphabet
from redinfo.errors import ParamOutOfRange, RowNotNormalized, UnknownExample
from redinfo.infomeasures import mutual_information
from redinfo.pid import decompose, i_red
from redinfo.projection import projected_information
from redinfo.transfer import (
    PROCESSES,
    ChannelSpec,
    build_dice,
    build_example,
    build_process1,
    build_process2,
    build_process2_reduced,
    decompose_transfer,
    expected_redundancy,
    is_perfectly_controllable,
    joint_from_channel,
    random_controllable_channel,
    stationary_distribution,
    transfer_entropy,
)

GRID = np.linspace(0, 1, 21)


def test_stationary_aperiodic_and_periodic():
    K = np.array([[0.9, 0.1], [0.3, 0.7]])
    assert np.allclose(stationary_distribution(K), [0.75, 0.25], atol=1e-10)
    flip = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert np.allclose(stationary_distribution(flip), [0.5, 0.5])
    cycle = np.roll(np.eye(3), 1, axis=1)
    assert np.allclose(stationary_distribution(cycle), [1 / 3] * 3)
    assert np.allclose(stationary_distribution(np.eye(2)), [0.5, 0.5])
    with pytest.raises(RowNotNormalized):
        stationary_distribution([[0.5, 0.4], [0.5, 0.5]])


def test_controllability_examples():
    bits = Alphabet.range(2)
    direct = ChannelSpec(bits, bits, bits, np.stack([np.eye(2)] * 2))
    assert is_perfectly_controllable(direct)
    ignore = ChannelSpec(bits, bits, bits, np.array([[[1, 0], [1, 0]], [[0, 1], [0, 1]]], float))
    assert not is_perfectly_controllable(ignore)
    xor = np.zeros((2, 2, 2))
    for x in range(2):
        for c in range(2):
            xor[x, c, x ^ c] = 1.0
    assert is_perfectly_controllable(ChannelSpec(bits, bits, bits, xor))


def test_random_channels_are_controllable():
    rng = np.random.default_rng(0)
    for _ in range(20):
        assert is_perfectly_controllable(random_controllable_channel(rng, 3, 5))
        ch = random_controllable_channel(rng, 3, 4, open_loop=True)
        assert np.array_equal(ch.kernel[0], ch.kernel[2])
    with pytest.raises(ParamOutOfRange):
        random_controllable_channel(rng, 4, 2)


def test_site_plus_sdte_is_transfer_entropy():
    rng = np.random.default_rng(1)
    joints = [PROCESSES[name](d) for name in PROCESSES for d in (0.0, 0.3, 0.7, 1.0)]
    for _ in range(20):
        ch = random_controllable_channel(rng, 3, 4)
        pcx = rng.random((3, 4))
        joints.append(joint_from_channel(ch, rng.dirichlet(np.ones(3)), pcx / pcx.sum(axis=1, keepdims=True)))
    for j in joints:
        for m in ("I_red", "I_min"):
            td = decompose_transfer(j, m)
            assert td.site + td.sdte == pytest.approx(td.transfer_entropy, abs=1e-8)
            assert td.transfer_entropy == pytest.approx(
                mutual_information(j, "z", "xy") - mutual_information(j, "z", "x"), abs=1e-12)


def test_process1_measures_coincide():
    for d in GRID:
        j = build_process1(d)
        assert decompose_transfer(j, "I_red").site == pytest.approx(decompose_transfer(j, "I_min").site, abs=1e-6)
    t0, t1 = decompose_transfer(build_process1(0.0)), decompose_transfer(build_process1(1.0))
    assert t0.site == pytest.approx(1.0, abs=1e-9) and t0.transfer_entropy == pytest.approx(1.0)
    assert t1.sdte == pytest.approx(t1.transfer_entropy, abs=1e-9)


def test_process2_coincidence_region():
    for d in GRID[GRID <= 0.5]:
        j = build_process2(d)
        red, mn = decompose_transfer(j, "I_red"), decompose_transfer(j, "I_min")
        assert red.site == pytest.approx(0.0, abs=1e-8)
        assert (red.site, red.sdte) == pytest.approx((mn.site, mn.sdte), abs=1e-6)
    # past the midpoint I_red finds state-independent transfer
    assert decompose_transfer(build_process2(0.8), "I_red").site > 1e-3


def test_process2_joint_layout():
    j = build_process2(0.4)
    assert j.shape == (4, 2, 4)
    assert mutual_information(j, "z", "x") >= 1.0 - 1e-12  # frozen uniform X bit
    assert np.allclose(j.probs.sum(axis=(1, 2)), 0.25)


def test_dice_trends():
    top = [i_red(build_dice(a, 1.0)) for a in range(1, 7)]
    assert all(a > b for a, b in zip(top, top[1:]))
    assert top[-1] == pytest.approx(0.0, abs=1e-9)
    flat = [i_red(build_dice(a, 0.0)) for a in range(1, 7)]
    assert np.ptp(flat) <= 1e-6
    assert flat[0] == pytest.approx(np.log2(6), abs=1e-6)


def test_builders_validate_params():
    with pytest.raises(ParamOutOfRange):
        build_example("copy", lam=1.5)
    with pytest.raises(ParamOutOfRange):
        build_process1(-0.1)
    with pytest.raises(UnknownExample):
        build_example("nand")


@pytest.mark.parametrize("name", ["copy", "xor", "and", "rdnxor", "rdnunqxor", "xorand"])
def test_examples_meet_expected_redundancy(name):
    j = build_example(name, lam=0.3)
    assert i_red(j) == pytest.approx(expected_redundancy(name, lam=0.3), abs=1e-6)
    assert decompose(j).diagnostics.converged


def test_transfer_entropy_of_copy_channel():
    # next = input exactly, input uniform and independent of state
    bits = Alphabet.range(2)
    k = np.stack([np.eye(2)] * 2)
    j = joint_from_channel(ChannelSpec(bits, bits, bits, k), [0.5, 0.5], [0.5, 0.5])
    assert transfer_entropy(j) == pytest.approx(1.0)
    assert decompose_transfer(j).site == pytest.approx(1.0)


def test_process2_redundancy_closed_form():
    # the smaller projected information equals the MI of the source closer to the marginal
    for d in (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9):
        j = build_process2_reduced(d)  # x = Y_t, y = Z_t, z = Y_t+1
        ref = mutual_information(j, "z", "y") if d <= 0.5 else mutual_information(j, "z", "x")
        low = min(projected_information(j, "x", "y"), projected_information(j, "y", "x"))
        assert low == pytest.approx(ref, abs=1e-6)
        assert i_red(j) == pytest.approx(ref, abs=1e-6)
