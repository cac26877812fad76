"""Shared oracles for the test suite.

The permutation-sum definitions below are the independent reference for the
production determinant and permanent kernels; they never share code with the
package implementations.
"""

import itertools

import numpy as np
import pytest

from permlab import MatrixFq, RandomStream, make_field, uniform_distribution


def permutation_sum(a: MatrixFq, signed: bool) -> int:
    """Direct evaluation of the defining sum over all n! permutations."""
    f = a.field
    n = a.n
    total = 0
    for sigma in itertools.permutations(range(n)):
        prod = 1
        for i in range(n):
            prod = f.mul(prod, int(a.array[i, sigma[i]]))
        if signed:
            inversions = sum(
                1 for i in range(n) for j in range(i + 1, n) if sigma[i] > sigma[j]
            )
            if inversions % 2:
                prod = f.neg(prod)
        total = f.add(total, prod)
    return int(total)


def per_oracle(a: MatrixFq) -> int:
    return permutation_sum(a, signed=False)


def det_oracle(a: MatrixFq) -> int:
    return permutation_sum(a, signed=True)


def all_matrices(n: int, q: int):
    """Every n x n matrix over F_q, in odometer order."""
    field = make_field(q)
    for flat in itertools.product(range(q), repeat=n * n):
        yield MatrixFq(field, np.array(flat, dtype=np.int64).reshape(n, n))


def random_matrices(n: int, q: int, count: int, seed: int):
    field = make_field(q)
    dist = uniform_distribution(field)
    stream = RandomStream(seed)
    for _ in range(count):
        entries = dist.sample_entries(n * n, stream).reshape(n, n)
        yield MatrixFq(field, entries)


@pytest.fixture
def f3():
    return make_field(3)


@pytest.fixture
def f5():
    return make_field(5)
