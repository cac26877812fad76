import numpy as np
import pytest

from permlab import (
    BadConfig,
    MatrixFq,
    NotHollowSymmetric,
    PermGraph,
    RandomStream,
    detect_witnesses,
    determinant,
    find_triangle,
    hollow3_certificate,
    make_field,
    mat_vec,
    minor_dependence_matrix,
    minor_permanent,
    pack_disjoint_triangles,
    pair_minor_matrix,
    rank,
    sample_matrix,
    submatrix,
    uniform_distribution,
)
from conftest import random_matrices


# -- witness detection --------------------------------------------------------


def test_detect_full_deletion_always_holds(f3):
    a = MatrixFq(f3, np.zeros((4, 4), dtype=int))
    rep = detect_witnesses(a, 4, 1)
    assert rep.holds and rep.exhaustive
    assert rep.witnesses == ((1, 2, 3, 4),)


def test_detect_s0_is_nonzero_permanent(f3):
    for a in random_matrices(4, 3, 30, seed=5):
        rep = detect_witnesses(a, 0, 1)
        assert rep.holds == (minor_permanent(a, ()).value != 0)


def test_detect_zero_matrix_s1_false(f3):
    a = MatrixFq(f3, np.zeros((4, 4), dtype=int))
    rep = detect_witnesses(a, 1, 1)
    assert not rep.holds and rep.exhaustive


def test_detect_witness_invariants(f5):
    for a in random_matrices(6, 5, 25, seed=8):
        rep = detect_witnesses(a, 2, 2)
        if rep.holds:
            assert len(rep.witnesses) >= 2
            seen = set()
            for w in rep.witnesses:
                assert len(w) == 2
                assert minor_permanent(a, w).value != 0
                assert not (seen & set(w))
                seen |= set(w)


def test_detect_impossible_packing_is_exact_false(f3):
    a = MatrixFq(f3, np.eye(4, dtype=int))
    rep = detect_witnesses(a, 3, 2)  # 3*2 > 4 columns
    assert not rep.holds and rep.exhaustive


def test_greedy_holds_is_one_sided(f3):
    # greedy (forced via a tiny packing cap) never reports holds falsely
    import permlab.events as ev
    old = ev.EXACT_PACK_CAP
    ev.EXACT_PACK_CAP = 0
    try:
        for a in random_matrices(6, 3, 40, seed=21):
            greedy = detect_witnesses(a, 1, 3)
            assert not greedy.exhaustive or not greedy.witnesses
            ev.EXACT_PACK_CAP = old
            exact = detect_witnesses(a, 1, 3)
            ev.EXACT_PACK_CAP = 0
            if greedy.holds:
                assert exact.holds
    finally:
        ev.EXACT_PACK_CAP = old


def test_event_report_json(f3):
    a = MatrixFq(f3, np.eye(4, dtype=int))
    rep = detect_witnesses(a, 1, 2)
    obj = rep.to_json()
    assert obj["holds"] == rep.holds
    assert obj["witnesses"] == [list(w) for w in rep.witnesses]


# -- pair-minor matrix --------------------------------------------------------


def test_pair_minor_n2_is_exchange(f5):
    a = MatrixFq(f5, [[1, 2], [3, 4]])
    h = pair_minor_matrix(a)
    assert h.array.tolist() == [[0, 1], [1, 0]]


def test_pair_minor_symmetric_hollow(f5):
    for a in random_matrices(6, 5, 200, seed=42):
        h = pair_minor_matrix(a)
        assert np.array_equal(h.array, h.array.T)
        assert np.all(np.diagonal(h.array) == 0)


def test_pair_minor_row_product_identity(f5):
    # entry i of H * xbar (xbar = second-last row) equals the permanent of
    # the (n-1)-minor of the one-row-deleted matrix dropping column i
    for a in random_matrices(6, 5, 100, seed=43):
        h = pair_minor_matrix(a)
        xbar = a.array[a.n - 2]
        hx = mat_vec(h, xbar)
        for i in range(1, a.n + 1):
            assert hx[i - 1] == minor_permanent(a, (i,)).value


def test_triangle_in_pair_minor_graph_gives_rank3(f5):
    # odd characteristic: a triangle's principal 3x3 submatrix has rank 3
    found = 0
    for a in random_matrices(6, 5, 60, seed=44):
        g = PermGraph.from_pair_minors(pair_minor_matrix(a))
        tri = find_triangle(g)
        if tri is None:
            continue
        found += 1
        sub = submatrix(g.h, tri, tri)
        assert rank(sub) == 3
    assert found > 10


# -- hollow 3x3 certificates --------------------------------------------------


def test_hollow3_examples():
    f3 = make_field(3)
    b = MatrixFq(f3, [[0, 1, 1], [1, 0, 1], [1, 1, 0]])
    cert = hollow3_certificate(b)
    assert cert.rank3 and cert.det.value == 2
    f2 = make_field(2)
    b2 = MatrixFq(f2, [[0, 1, 1], [1, 0, 1], [1, 1, 0]])
    cert2 = hollow3_certificate(b2)
    assert not cert2.rank3 and cert2.det.value == 0


def test_hollow3_agrees_with_elimination_determinant():
    f7 = make_field(7)
    rng = np.random.default_rng(9)
    for _ in range(100):
        vals = rng.integers(0, 7, size=3)
        arr = np.zeros((3, 3), dtype=int)
        arr[0, 1] = arr[1, 0] = vals[0]
        arr[0, 2] = arr[2, 0] = vals[1]
        arr[1, 2] = arr[2, 1] = vals[2]
        b = MatrixFq(f7, arr)
        assert hollow3_certificate(b).det.value == determinant(b).value


def test_hollow3_rejects_bad_input(f3):
    with pytest.raises(NotHollowSymmetric):
        hollow3_certificate(MatrixFq(f3, [[1, 0, 0], [0, 0, 0], [0, 0, 0]]))
    with pytest.raises(NotHollowSymmetric):
        hollow3_certificate(MatrixFq(f3, [[0, 1, 0], [2, 0, 0], [0, 0, 0]]))


# -- triangles ----------------------------------------------------------------


def _random_graph_with_edges(n, m, seed):
    pairs = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    keys = RandomStream(seed).next_uint64(len(pairs))
    order = np.argsort(keys, kind="stable")
    return PermGraph(n, [pairs[i] for i in order[:m]])


def test_find_triangle_examples():
    k4 = PermGraph(4, [(i, j) for i in range(1, 5) for j in range(i + 1, 5)])
    tri = find_triangle(k4)
    assert tri is not None and len(set(tri)) == 3
    k33 = PermGraph(6, [(i, j) for i in (1, 2, 3) for j in (4, 5, 6)])
    assert find_triangle(k33) is None


def test_find_triangle_above_extremal_threshold():
    # 500 random graphs with floor(n^2/4)+1 edges always contain a triangle,
    # and the finder agrees with a brute-force triple check
    for trial in range(500):
        n = 6 + (trial % 11)
        m = n * n // 4 + 1
        g = _random_graph_with_edges(n, m, seed=trial)
        tri = find_triangle(g)
        assert tri is not None
        a, b, c = tri
        assert {(a, b), (a, c), (b, c)} <= g.edges


def test_find_triangle_matches_brute_force_on_sparse_graphs():
    from itertools import combinations
    for trial in range(60):
        g = _random_graph_with_edges(8, 9, seed=1000 + trial)
        brute = any({(a, b), (a, c), (b, c)} <= g.edges
                    for a, b, c in combinations(range(1, 9), 3))
        assert (find_triangle(g) is not None) == brute


def test_pack_disjoint_triangles():
    k9 = PermGraph(9, [(i, j) for i in range(1, 10) for j in range(i + 1, 10)])
    tris = pack_disjoint_triangles(k9, 3)
    assert len(tris) == 3
    used = [v for t in tris for v in t]
    assert len(set(used)) == 9
    k33 = PermGraph(6, [(i, j) for i in (1, 2, 3) for j in (4, 5, 6)])
    assert pack_disjoint_triangles(k33, 2) == []
    for trial in range(30):
        g = _random_graph_with_edges(12, 50, seed=trial)
        tris = pack_disjoint_triangles(g, 4)
        used = [v for t in tris for v in t]
        assert len(used) == len(set(used))
        for t in tris:
            a, b, c = t
            assert {(a, b), (a, c), (b, c)} <= g.edges


# -- dependence matrices ------------------------------------------------------


def test_dependence_matrix_product_identity(f5):
    for a in random_matrices(7, 5, 20, seed=60):
        for witness in [(1, 4), (2, 5, 7)]:
            m = minor_dependence_matrix(a, witness)
            s = len(witness)
            xbar = a.array[a.n - s]  # row n-s+1, 1-based
            mv = mat_vec(m, xbar)
            for pos, i in enumerate(sorted(witness)):
                rest = tuple(sorted(set(witness) - {i}))
                assert mv[pos] == minor_permanent(a, rest).value


def test_dependence_matrix_s2_rows_are_pair_minor_rows(f5):
    for a in random_matrices(6, 5, 20, seed=61):
        h = pair_minor_matrix(a)
        i, j = 2, 5
        m = minor_dependence_matrix(a, (i, j))
        assert m.array[0].tolist() == h.array[j - 1].tolist()
        assert m.array[1].tolist() == h.array[i - 1].tolist()


def test_dependence_matrix_diagonal_block(f5):
    for a in random_matrices(6, 5, 30, seed=62):
        witness = (1, 3, 6)
        m = minor_dependence_matrix(a, witness)
        base = minor_permanent(a, witness).value
        block = submatrix(m, (1, 2, 3), witness)
        assert np.array_equal(block.array, np.diag([base] * 3))
        if base != 0:
            assert rank(block) == 3


def test_dependence_matrix_rejects_bad_witness(f3):
    a = MatrixFq(f3, np.zeros((4, 4), dtype=int))
    with pytest.raises(BadConfig):
        minor_dependence_matrix(a, (1, 1))
    with pytest.raises(BadConfig):
        minor_dependence_matrix(a, (0, 2))
