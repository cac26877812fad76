import numpy as np
import pytest

from permlab import (
    DuplicateIndex,
    MatrixFq,
    NotSquare,
    OutOfRange,
    RandomStream,
    SizeCap,
    delete_last_rows,
    det_batch_prime,
    determinant,
    make_field,
    minor_permanent,
    permanent,
    permanent_expansion,
    permanent_ryser,
    rank,
    ryser_batch_prime,
    sample_matrix,
    submatrix,
    uniform_distribution,
)
from conftest import all_matrices, det_oracle, per_oracle, random_matrices


def test_delete_last_rows(f3):
    a = MatrixFq(f3, np.arange(16).reshape(4, 4) % 3)
    assert delete_last_rows(a, 4).shape == (0, 4)
    assert delete_last_rows(a, 0) is a
    b = MatrixFq(f3, np.arange(9).reshape(3, 3) % 3)
    top = delete_last_rows(b, 1)
    assert top.shape == (2, 3)
    assert np.array_equal(top.array, b.array[:2])
    with pytest.raises(OutOfRange):
        delete_last_rows(a, 5)


def test_submatrix(f5):
    m = MatrixFq(f5, np.arange(12).reshape(3, 4) % 5)
    s = submatrix(m, (1, 3), (2, 4))
    assert np.array_equal(s.array, m.array[np.ix_([0, 2], [1, 3])])
    assert submatrix(m, (), (1, 2)).shape == (0, 2)
    assert submatrix(m, (1,), ()).shape == (1, 0)
    with pytest.raises(DuplicateIndex):
        submatrix(m, (1, 1), (2,))
    with pytest.raises(OutOfRange):
        submatrix(m, (1, 4), (2,))


def test_determinant_examples():
    f7 = make_field(7)
    assert determinant(MatrixFq(f7, np.eye(5, dtype=int))).value == 1
    f3 = make_field(3)
    hollow = MatrixFq(f3, [[0, 1, 1], [1, 0, 1], [1, 1, 0]])
    assert determinant(hollow).value == 2
    assert determinant(MatrixFq(f3, np.zeros((0, 0), dtype=int))).value == 1
    with pytest.raises(NotSquare):
        determinant(MatrixFq(f3, np.zeros((2, 3), dtype=int)))


def test_determinant_vs_oracle(f5):
    for a in random_matrices(4, 5, 50, seed=101):
        assert determinant(a).value == det_oracle(a)


def test_rank_examples(f3):
    assert rank(MatrixFq(f3, np.eye(4, dtype=int))) == 4
    assert rank(MatrixFq(f3, np.zeros((0, 3), dtype=int))) == 0
    for p in (3, 5, 7):
        f = make_field(p)
        hollow = MatrixFq(f, [[0, 1, 2 % p], [1, 0, 1], [2 % p, 1, 0]])
        assert rank(hollow) == 3


def test_rank_equals_rank_of_transpose():
    for a in random_matrices(5, 3, 50, seed=7):
        assert rank(a) == rank(a.transpose())


def test_permanent_expansion_examples(f5):
    empty = MatrixFq(f5, np.zeros((0, 0), dtype=int))
    assert permanent_expansion(empty).value == 1
    two = MatrixFq(f5, [[1, 2], [3, 4]])
    assert permanent_expansion(two).value == (1 * 4 + 2 * 3) % 5
    ones4 = MatrixFq(f5, np.ones((4, 4), dtype=int))
    assert permanent_expansion(ones4).value == 24 % 5
    with pytest.raises(SizeCap):
        permanent_expansion(MatrixFq(f5, np.zeros((13, 13), dtype=int)))


def test_permanent_ryser_examples(f3):
    assert permanent_ryser(MatrixFq(f3, np.eye(8, dtype=int))).value == 1
    with pytest.raises(SizeCap):
        permanent_ryser(MatrixFq(f3, np.zeros((31, 31), dtype=int)))


@pytest.mark.parametrize("q", [2, 3, 5, 7, 9])
def test_kernels_agree_on_random_6x6(q):
    for a in random_matrices(6, q, 100, seed=q):
        assert permanent_ryser(a).value == permanent_expansion(a).value


def test_ryser_equals_permutation_sum_all_3x3_f2():
    for a in all_matrices(3, 2):
        assert permanent_ryser(a).value == per_oracle(a)


def test_char2_permanent_equals_determinant():
    for q in (2, 4):
        for a in random_matrices(5, q, 40, seed=13):
            assert permanent_ryser(a).value == determinant(a).value


def test_permanent_row_and_column_permutation_invariance(f5):
    rng = np.random.default_rng(3)
    for _ in range(20):
        a = MatrixFq(f5, rng.integers(0, 5, size=(5, 5)))
        p = permanent_ryser(a).value
        rp = rng.permutation(5)
        cp = rng.permutation(5)
        b = MatrixFq(f5, a.array[np.ix_(rp, cp)])
        assert permanent_ryser(b).value == p


def test_permanent_row_scaling(f5):
    rng = np.random.default_rng(4)
    for c in range(1, 5):
        a = MatrixFq(f5, rng.integers(0, 5, size=(4, 4)))
        scaled = a.array.copy()
        scaled[2] = (scaled[2] * c) % 5
        b = MatrixFq(f5, scaled)
        assert permanent_ryser(b).value == f5.mul(permanent_ryser(a).value, c)


def test_minor_expansion_identity(f5):
    # per(A) = sum_i per(A'_i) * x_i over the last row
    for a in random_matrices(5, 5, 25, seed=99):
        total = 0
        for i in range(5):
            keep = [j for j in range(5) if j != i]
            minor = MatrixFq(f5, a.array[:4][:, keep])
            total = f5.add(total, f5.mul(permanent_ryser(minor).value,
                                         int(a.array[4, i])))
        assert total == permanent_ryser(a).value


def test_minor_permanent_cases(f5):
    a = next(iter(random_matrices(5, 5, 1, seed=1)))
    assert minor_permanent(a, tuple(range(1, 6))).value == 1  # empty minor
    assert minor_permanent(a, ()).value == permanent_ryser(a).value
    # consistency with explicit submatrix + ryser
    for cols in [(1,), (2, 4), (1, 3, 5)]:
        s = len(cols)
        keep = [j for j in range(1, 6) if j not in cols]
        sub = submatrix(a, tuple(range(1, 6 - s)), tuple(keep))
        assert minor_permanent(a, cols).value == permanent_ryser(sub).value


def test_exhaustive_small_f2_f3():
    # production kernels vs the defining permutation sums, n <= 2 fully
    for q in (2, 3):
        for n in (0, 1, 2):
            for a in all_matrices(n, q):
                assert determinant(a).value == det_oracle(a)
                assert permanent_ryser(a).value == per_oracle(a)


def test_batched_kernels_match_scalar(f3):
    rng = np.random.default_rng(11)
    ents = rng.integers(0, 3, size=(500, 7, 7))
    per_fast = ryser_batch_prime(ents, 3)
    det_fast = det_batch_prime(ents, 3)
    for i in range(0, 500, 37):
        a = MatrixFq(f3, ents[i])
        assert per_fast[i] == permanent_ryser(a).value
        assert det_fast[i] == determinant(a).value


def test_matrix_json_roundtrip(f3):
    a = sample_matrix(3, uniform_distribution(f3), RandomStream(5))
    b = MatrixFq.from_json(a.to_json())
    assert a == b
    assert b.field is f3


def test_permanent_dispatch(f3):
    a = next(iter(random_matrices(4, 3, 1, seed=2)))
    b = next(iter(random_matrices(6, 3, 1, seed=2)))
    assert permanent(a).value == permanent_ryser(a).value
    assert permanent(b).value == permanent_ryser(b).value
