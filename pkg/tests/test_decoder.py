import itertools

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from ldpc_sched.channel import ChannelSpec, sample_llr
from ldpc_sched.decoder import (LLR_CAP, DecoderState, ScheduleError, ScheduleSequence, decode,
                                decode_batch, executed_nmp, flood_iteration, hard_decision,
                                serial_cn_step, syndrome_ok)
from ldpc_sched.graph import from_check_lists, from_dense, mark_punctured, random_regular

# cycle-free code on 12 variables, diameter (in check hops) 4
TREE = [(0, 1, 2), (2, 3, 4), (4, 5, 6), (1, 7, 8), (3, 9), (6, 10, 11)]


def map_llrs(graph, llr):
    """Bitwise MAP LLRs by enumerating the code's nullspace."""
    H = graph.to_dense().astype(np.int64)
    n = graph.n_vars
    words = np.array(list(itertools.product([0, 1], repeat=n)), dtype=np.int64)
    words = words[((words @ H.T) % 2 == 0).all(axis=1)]
    # log P(y | x) up to a constant: sum over bits of -x_i * llr_i
    logw = -(words * llr).sum(axis=1)
    out = np.empty(n)
    for i in range(n):
        l0 = np.logaddexp.reduce(logw[words[:, i] == 0])
        l1 = np.logaddexp.reduce(logw[words[:, i] == 1])
        out[i] = l0 - l1
    return out


def test_check_rule_three_vars():
    g = from_check_lists(3, [(0, 1, 2)])
    st_ = serial_cn_step(DecoderState.initial([1.0, 0.5, -0.2], g), g, 0)
    exact = float(2 * mpmath.atanh(mpmath.tanh(mpmath.mpf("0.25")) * mpmath.tanh(mpmath.mpf("-0.1"))))
    assert st_.c2v[0] == pytest.approx(exact, abs=1e-12)
    assert st_.nmp == 6


def test_degree_two_check_swaps():
    g = from_check_lists(2, [(0, 1)])
    st_ = serial_cn_step(DecoderState.initial([1.7, -0.3], g), g, 0)
    assert st_.c2v[0] == -0.3 and st_.c2v[1] == 1.7


def test_first_flood_iteration_uses_channel():
    g = from_dense(np.array([[1, 1, 0, 1], [0, 1, 1, 1]]))
    llr = np.array([0.4, -1.2, 2.0, 0.9])
    s = flood_iteration(DecoderState.initial(llr, g), g)
    # V2C of the first iteration are the channel LLRs
    for a in range(g.n_checks):
        nb = g.check_neighbors[a]
        for k, i in enumerate(nb):
            others = [llr[j] for j in nb if j != i]
            ref = 2 * np.arctanh(np.prod(np.tanh(np.array(others) / 2)))
            assert s.c2v[g.edge_id(i, a)] == pytest.approx(ref, abs=1e-12)
    assert s.nmp == 2 * g.n_edges


def test_fresh_serial_step_equals_flood_update():
    g = from_dense(np.array([[1, 1, 1, 0], [0, 1, 1, 1]]))
    llr = np.array([0.4, -1.2, 2.0, 0.9])
    fl = flood_iteration(DecoderState.initial(llr, g), g)
    se = serial_cn_step(DecoderState.initial(llr, g), g, 0)
    for e in range(g.check_ptr[0], g.check_ptr[1]):
        assert se.c2v[e] == pytest.approx(fl.c2v[e], abs=1e-14)


def test_repeat_step_is_idempotent():
    g = random_regular(24, 3, 6, seed=2)
    llr = sample_llr(ChannelSpec(1.0, 0.5), g, np.random.default_rng(0))
    s = DecoderState.initial(llr, g)
    for a in range(g.n_checks):
        serial_cn_step(s, g, a)
    serial_cn_step(s, g, 5)
    before = s.posterior.copy()
    serial_cn_step(s, g, 5)
    assert np.allclose(s.posterior, before, atol=1e-12)


def test_two_check_chain_by_hand():
    g = from_check_lists(3, [(0, 1), (1, 2)])
    s = DecoderState.initial([1.0, -0.5, 2.0], g)
    serial_cn_step(s, g, 0)
    assert np.allclose(s.posterior, [0.5, 0.5, 2.0])
    serial_cn_step(s, g, 1)
    assert np.allclose(s.posterior, [0.5, 2.5, 2.5])


def test_noiseless_flooding_one_iteration():
    g = random_regular(48, 3, 6, seed=0)
    llr = sample_llr(ChannelSpec(np.inf, 0.5), g, np.random.default_rng(0))
    r = decode(llr, g, mode="flooding")
    assert r.success and r.iterations_used == 1
    assert r.nmp_used == 2 * g.n_edges


def test_iterations_must_be_positive():
    with pytest.raises(ScheduleError):
        ScheduleSequence(np.arange(3), 0)


def test_schedule_validation_and_io(tmp_path):
    with pytest.raises(ScheduleError):
        ScheduleSequence(np.array([0, 0, 1]))
    s = ScheduleSequence(np.array([2, 0, 1]), 4)
    s.save(tmp_path / "s.txt")
    assert ScheduleSequence.load(tmp_path / "s.txt") == s
    assert list(s.full_sequence()) == [2, 0, 1] * 4
    g = from_check_lists(3, [(0, 1)])
    with pytest.raises(ScheduleError):
        s.check_graph(g)
    with pytest.raises(ScheduleError):
        ScheduleSequence.loads("3 4\n0 1\n")


def test_hard_decision_and_syndrome():
    g = random_regular(24, 3, 6, seed=1)
    bits = hard_decision(np.ones(24))
    assert not bits.any() and syndrome_ok(bits, g)
    g1 = from_dense(np.eye(3, dtype=int))
    post = np.ones(3)
    post[1] = -1.0
    assert not syndrome_ok(hard_decision(post), g1)


@given(st.integers(0, 10_000))
def test_syndrome_matches_gf2(seed):
    rng = np.random.default_rng(seed)
    H = rng.integers(0, 2, (5, 9))
    g = from_dense(H)
    bits = rng.integers(0, 2, 9)
    assert syndrome_ok(bits, g) == (not ((H @ bits) % 2).any())


def test_bp_matches_map_on_tree():
    g = from_check_lists(12, TREE)
    rng = np.random.default_rng(11)
    spec = ChannelSpec.from_sigma(1.2, 0.5)
    for _ in range(20):
        llr = sample_llr(spec, g, rng)
        ref = map_llrs(g, llr)
        r = decode(llr, g, ScheduleSequence(np.arange(6), 5), mode="flooding", early_stop=False)
        assert np.abs(r.posterior - ref).max() < 1e-6
        perm = rng.permutation(6)
        r = decode(llr, g, ScheduleSequence(perm, 5), mode="serial", early_stop=False)
        assert np.abs(r.posterior - ref).max() < 1e-6


def test_batch_matches_single():
    g = random_regular(96, 3, 6, seed=4)
    llrs = sample_llr(ChannelSpec(2.0, 0.5), g, np.random.default_rng(5), trials=30)
    sched = ScheduleSequence(np.random.default_rng(1).permutation(g.n_checks), 5)
    for stop in ("iteration", "step"):
        b = decode_batch(llrs, g, sched, stop_check=stop)
        for t in range(30):
            r = decode(llrs[t], g, sched, stop_check=stop)
            assert b.nmp[t] == r.nmp_used
            assert b.success[t] == r.success
            assert b.bit_errors[t] == int(r.hard_bits.sum())


def test_trajectory_rows():
    g = random_regular(96, 3, 6, seed=4)
    llr = sample_llr(ChannelSpec(1.5, 0.5), g, np.random.default_rng(6))
    r = decode(llr, g, record_trajectory=True, early_stop=False)
    tr = r.trajectory
    assert tr.shape == (5 * g.n_checks + 1, 3)
    assert tr[0, 0] == 0 and tr[0, 1] == int((llr < 0).sum())
    assert tr[-1, 0] == r.nmp_used == 5 * 2 * g.n_edges
    assert np.all(np.diff(tr[:, 0]) == 12)


def test_punctured_bits_not_counted():
    g = mark_punctured(from_check_lists(3, [(0, 1, 2)]), [0])
    llr = np.array([0.0, 2.0, 2.0])
    r = decode(llr, g, record_trajectory=True, early_stop=False)
    # the zero LLR decides bit 0 as 0, and it is never counted as a transmitted error
    assert r.trajectory[0, 1] == 0


def test_messages_saturate():
    g = from_check_lists(2, [(0, 1)])
    s = serial_cn_step(DecoderState.initial([100.0, 100.0], g), g, 0)
    assert np.abs(s.c2v).max() <= LLR_CAP


def test_executed_nmp():
    g = from_check_lists(4, [(0, 1), (1, 2, 3)])
    assert executed_nmp(g, [0, 1, 1]) == 4 + 6 + 6
