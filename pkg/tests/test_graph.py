import numpy as np
import pytest
from hypothesis import given, strategies as st

from ldpc_sched.graph import (GraphFormatError, TannerGraph, expand_qc, from_check_lists,
                              from_dense, load_code, mark_punctured, parse_alist, parse_qc,
                              random_regular, to_alist)


def test_toy_alist(toy_alist):
    g = load_code(toy_alist)
    assert (g.n_vars, g.n_checks, g.n_edges) == (3, 2, 4)
    assert set(g.check_neighbors[0]) == {0, 1}
    assert np.array_equal(g.to_dense(), [[1, 1, 0], [0, 1, 1]])


def test_alist_index_out_of_range():
    text = "3 2\n2 2\n1 2 1\n2 2\n1\n1 2\n2\n1 2\n2 4\n"
    with pytest.raises(GraphFormatError, match="index out of range"):
        parse_alist(text)


def test_alist_malformed_header():
    with pytest.raises(GraphFormatError, match="malformed header"):
        parse_alist("3\n")


def test_alist_inconsistent_views():
    # variable 2 claims check 1 but check 1 does not list it
    text = "3 2\n2 2\n1 2 1\n2 1\n1\n1 2\n2\n1 2\n2\n"
    with pytest.raises(GraphFormatError):
        parse_alist(text)


def test_duplicate_edge():
    with pytest.raises(GraphFormatError, match="duplicate edge"):
        from_check_lists(3, [(0, 0, 1)])


def test_regular_code_counts():
    g = random_regular(512, 3, 6, seed=3)
    # count edges independently from the dense matrix
    H = g.to_dense()
    assert H.sum() == 1536
    assert (H.sum(axis=1) == 6).all() and (H.sum(axis=0) == 3).all()
    g2 = parse_alist(to_alist(g))
    assert g2.check_neighbors == g.check_neighbors
    assert g2.n_edges == 1536


def test_qc_identity_and_shift():
    g = expand_qc([[0]], 3)
    assert g.check_neighbors == ((0,), (1,), (2,))
    g = expand_qc([[1]], 3)
    # (variable, check) pairs of the shift-by-one circulant
    assert g.edge_pairs() == {(1, 0), (2, 1), (0, 2)}


def test_qc_edge_count(tmp_path):
    base = [[0, 0, -1], [0, 0, 0]]
    g = expand_qc(base, 4)
    assert g.n_edges == 4 * 5
    p = tmp_path / "b.qc"
    p.write_text("2 3 4\n0 0 -1\n0 0 0\n")
    assert load_code(p).check_neighbors == g.check_neighbors


def test_qc_shift_too_large():
    with pytest.raises(GraphFormatError):
        expand_qc([[3]], 3)


def test_qc_bad_header():
    with pytest.raises(GraphFormatError):
        parse_qc("2 3\n0 0 0\n")


def test_mark_punctured(toy):
    assert mark_punctured(toy, []).punctured == frozenset()
    assert mark_punctured(toy, [0, 1]).punctured == {0, 1}
    with pytest.raises(GraphFormatError):
        mark_punctured(toy, [5])


def test_edge_ids_check_major(toy):
    assert toy.edge_id(0, 0) == 0
    assert toy.edge_id(2, 1) == 3
    assert toy.edge_index[(1, 1)] == 2
    assert list(toy.check_degrees()) == [2, 2]
    assert list(toy.var_degrees()) == [1, 2, 1]


def test_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_code(tmp_path / "nope.alist")


@given(st.integers(2, 8), st.integers(1, 6), st.integers(0, 10_000))
def test_dense_roundtrip(n, m, seed):
    H = np.random.default_rng(seed).integers(0, 2, (m, n))
    g = from_dense(H)
    assert np.array_equal(g.to_dense(), H)
    assert g.n_edges == H.sum()
    # every edge id maps back to its (check, var) pair
    for (i, a), e in g.edge_index.items():
        assert g.edge_check[e] == a and g.edge_var[e] == i
