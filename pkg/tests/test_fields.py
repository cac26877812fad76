import numpy as np
import pytest

from permlab import (
    DivisionByZero,
    FieldMismatch,
    NotAPrimePower,
    TableCapExceeded,
    make_field,
)
from permlab.fields import _is_irreducible, _poly_mulmod


def test_make_field_prime():
    f = make_field(3)
    assert (f.q, f.p, f.k) == (3, 3, 1)
    assert f.irreducible_poly is None


def test_make_field_extension():
    f = make_field(9)
    assert (f.q, f.p, f.k) == (9, 3, 2)
    assert f.irreducible_poly is not None
    # tables invert each other on the nonzero elements
    for a in range(1, 9):
        assert f.exp_table[f.log_table[a]] == a


def test_make_field_rejects_non_prime_power():
    with pytest.raises(NotAPrimePower):
        make_field(6)
    with pytest.raises(NotAPrimePower):
        make_field(12)
    with pytest.raises(NotAPrimePower):
        make_field(1)


def test_extension_table_cap():
    with pytest.raises(TableCapExceeded):
        make_field(5**6)  # 15625 > 4096


def test_field_specs_are_shared():
    assert make_field(25) is make_field(25)


def test_simple_inverses():
    assert make_field(5).inv(2) == 3
    assert make_field(3).neg(1) == 2


def test_inv_zero_raises():
    with pytest.raises(DivisionByZero):
        make_field(7).inv(0)
    with pytest.raises(DivisionByZero):
        make_field(9).inv(0)


def test_mixed_field_elements_never_combine():
    a = make_field(3).element(1)
    b = make_field(5).element(1)
    with pytest.raises(FieldMismatch):
        a + b


def test_extension_mul_matches_polynomial_arithmetic():
    # brute force over all 81 pairs in F_9 against direct polynomial
    # multiplication mod the stated irreducible
    f = make_field(9)
    for a in range(9):
        for b in range(9):
            assert f.mul(a, b) == _poly_mulmod(a, b, f.irreducible_poly, 3)


def test_irreducible_is_lowest_encoding():
    f = make_field(9)
    p, k = f.p, f.k
    for cand in range(p**k, f.irreducible_poly):
        assert not _is_irreducible(cand, p, k)
    assert _is_irreducible(f.irreducible_poly, p, k)


@pytest.mark.parametrize("q", [2, 3, 5, 7, 127, 4, 8, 9, 16, 25, 27, 49, 64, 81, 121, 128])
def test_field_axioms_exhaustive(q):
    """Associativity, commutativity, distributivity, inverses for q <= 128."""
    f = make_field(q)
    v = np.arange(q, dtype=np.int64)
    a = v[:, None, None]
    b = v[None, :, None]
    c = v[None, None, :]
    assert np.array_equal(f.add(f.add(a, b), c), f.add(a, f.add(b, c)))
    assert np.array_equal(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)))
    assert np.array_equal(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)))
    ab = f.add(v[:, None], v[None, :])
    assert np.array_equal(ab, ab.T)
    mm = f.mul(v[:, None], v[None, :])
    assert np.array_equal(mm, mm.T)
    assert np.all(f.add(v, 0) == v)
    assert np.all(f.mul(v, 1) == v)
    assert np.all(f.add(v, f.neg(v)) == 0)
    nz = v[1:]
    inv = f.inv(nz)
    assert np.all(f.mul(nz, inv) == 1)
    assert np.all(f.sub(f.add(a[:, :, 0], b[:, :, 0]), b[:, :, 0]) == a[:, :, 0])


@pytest.mark.parametrize("q", [2, 3, 5, 9, 25, 27, 8])
def test_characteristic(q):
    f = make_field(q)
    acc = 0
    for m in range(1, f.p):
        acc = f.add(acc, 1)
        assert acc != 0
    assert f.add(acc, 1) == 0  # p * 1 = 0


def test_field_elem_operators():
    f = make_field(7)
    a, b = f.element(3), f.element(5)
    assert (a + b).value == 1
    assert (a - b).value == 5
    assert (a * b).value == 1
    assert (-a).value == 4
    assert (a / b).value == f.mul(3, f.inv(5))
    assert a.inverse().value == 5
    assert f.element(10).value == 3  # reduced mod p on construction
