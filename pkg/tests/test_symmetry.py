import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import brute_symmetrize
from strategies import random_args, seeds, tensors

from multipoly.errors import BudgetExceeded, DimensionMismatch, GroupTooLarge, HeterogeneousBlocks
from multipoly.fixtures import example1, example2
from multipoly.polymap import hat
from multipoly.symmetry import (
    block_symmetrize,
    is_block_symmetric,
    is_fully_symmetric,
    polarization_constant,
    polarize,
)
from multipoly.tensor_core import BlockShape, MultilinearMap, eval_multilinear


def x1y2():
    return MultilinearMap.from_array(BlockShape((2,), (2,)), [[[0.0], [1.0]], [[0.0], [0.0]]])


def test_worked_examples_are_block_symmetric():
    assert is_block_symmetric(example1(), tol=1e-12)
    assert is_block_symmetric(example2(), tol=1e-12)


def test_example2_is_not_fully_symmetric():
    assert not is_fully_symmetric(example2())


def test_one_dimensional_example_is_fully_symmetric():
    # on R^1 blocks every slot permutation fixes the single coefficient
    assert is_fully_symmetric(example1())


def test_x1y2_not_symmetric():
    assert not is_block_symmetric(x1y2(), tol=1e-12)


def test_rank_one_fully_symmetric():
    T = MultilinearMap.from_array(BlockShape((2,), (2,)), [[[1.0], [0.0]], [[0.0], [0.0]]])
    assert is_fully_symmetric(T)


def test_heterogeneous_blocks():
    T = MultilinearMap.zeros(BlockShape((1, 1), (2, 3)))
    with pytest.raises(HeterogeneousBlocks):
        is_fully_symmetric(T)


def test_symmetrize_x1y2():
    S = block_symmetrize(x1y2())
    assert S.array[0, 1, 0] == 0.5 and S.array[1, 0, 0] == 0.5
    e1, e2 = np.eye(2)
    assert eval_multilinear(S, [[e1, e2]])[0] == 0.5


def test_symmetrize_zero_and_fixed_point():
    Z = MultilinearMap.zeros(BlockShape((2, 1), (2, 3)))
    assert not np.any(block_symmetrize(Z).coeffs)
    for T in (example1(), example2()):
        assert np.max(np.abs(block_symmetrize(T).coeffs - T.coeffs)) <= 1e-15


def test_group_cap():
    T = MultilinearMap.zeros(BlockShape((4,), (1,)))
    with pytest.raises(GroupTooLarge):
        block_symmetrize(T, method="group", group_cap=10)
    # the orbit path has no cap
    block_symmetrize(T)


def test_polarization_constant():
    assert polarization_constant((2, 2)) == 1 / 64
    assert polarization_constant((1,)) == 0.5


def test_polarize_x2a2_brute_force():
    # brute-force the 16-term sign sum with exact rationals
    total = Fraction(0)
    for eps in itertools.product((1, -1), repeat=4):
        x = eps[0] + eps[1]
        a = eps[2] + eps[3]
        total += math.prod(eps) * x * x * a * a
    assert total / 64 == 1
    P = hat(example1())
    got = polarize(P, None, [[np.ones(1), np.ones(1)], [np.ones(1), np.ones(1)]])
    assert got[0] == pytest.approx(1.0, abs=1e-15)


def test_polarize_callable_and_errors():
    def f(x, a):
        return x[0] ** 2 * a[0] ** 2

    one = np.ones(1)
    assert polarize(f, [one, one], [[one, one], [one, one]]) == pytest.approx(1.0)
    with pytest.raises(BudgetExceeded):
        polarize(f, None, [[one] * 20, [one] * 20], max_slots=30)
    with pytest.raises(DimensionMismatch):
        polarize(hat(example2()), None, [[one, one], [one, one]])


@given(tensors(), seeds)
def test_orbit_matches_group_and_brute(T, seed):
    orbit = block_symmetrize(T)
    group = block_symmetrize(T, method="group")
    brute = brute_symmetrize(T.array, T.shape.degrees)
    assert np.max(np.abs(orbit.array - group.array)) <= 1e-12 * max(1.0, T.max_abs())
    assert np.max(np.abs(orbit.array - brute)) <= 1e-12 * max(1.0, T.max_abs())


@given(tensors(), seeds, st.floats(-2, 2), st.floats(-2, 2))
def test_symmetrize_is_linear_projection(T, seed, a, b):
    gen = np.random.default_rng(seed)
    R = MultilinearMap.from_array(T.shape, gen.standard_normal(T.shape.array_shape))
    lhs = block_symmetrize(a * T + b * R)
    rhs = a * block_symmetrize(T) + b * block_symmetrize(R)
    assert np.max(np.abs(lhs.coeffs - rhs.coeffs)) <= 1e-12 * max(1.0, T.max_abs(), R.max_abs())
    S = block_symmetrize(T)
    assert is_block_symmetric(S)
    assert np.max(np.abs(block_symmetrize(S).coeffs - S.coeffs)) <= 1e-15 * max(1.0, S.max_abs())


@given(tensors(), seeds)
def test_diagonal_identity(T, seed):
    gen = np.random.default_rng(seed)
    xs = [gen.standard_normal((5, d)) for d in T.shape.dims]
    a = hat(T).eval_batch(xs)
    b = hat(block_symmetrize(T)).eval_batch(xs)
    assert np.max(np.abs(a - b)) <= 1e-12 * max(1.0, np.max(np.abs(a)))


@given(tensors(max_degree=2), seeds)
def test_polarize_reconstructs_and_ignores_base(T, seed):
    gen = np.random.default_rng(seed)
    S = block_symmetrize(T)
    P = hat(T)
    args = random_args(gen, T.shape)
    expected = eval_multilinear(S, args)
    scale = max(1.0, np.max(np.abs(expected)))
    for base in (None, [gen.standard_normal(d) * 3 for d in T.shape.dims]):
        got = polarize(P, base, args)
        assert np.max(np.abs(got - expected)) <= 1e-9 * scale


@given(tensors(max_degree=2), seeds)
def test_polarize_zero_argument(T, seed):
    gen = np.random.default_rng(seed)
    args = random_args(gen, T.shape)
    args[-1][0] = np.zeros(T.shape.dims[-1])
    got = polarize(hat(T), None, args)
    assert np.max(np.abs(got)) <= 1e-12 * max(1.0, np.abs(T.coeffs).sum()) * 100


def test_polarize_chunking_is_stable():
    gen = np.random.default_rng(5)
    shape = BlockShape((3, 2), (2, 2))
    T = MultilinearMap.from_array(shape, gen.standard_normal(shape.array_shape))
    args = random_args(gen, shape)
    a = polarize(hat(T), None, args, chunk=4)
    b = polarize(hat(T), None, args, chunk=4)
    assert np.array_equal(a, b)
    c = polarize(hat(T), None, args, chunk=1 << 14)
    assert np.allclose(a, c, rtol=1e-12)
