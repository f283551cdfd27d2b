import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import loop_eval
from strategies import random_args, seeds, shapes, tensors

from multipoly.errors import (
    ArityMismatch,
    DimensionMismatch,
    InvalidPermutation,
    LengthMismatch,
    NonFiniteCoefficient,
    ShapeTooLarge,
)
from multipoly.fixtures import example2
from multipoly.tensor_core import (
    BlockShape,
    MultilinearMap,
    eval_multilinear,
    from_dict,
    make_multilinear,
    permute_arguments,
    to_dict,
)


def test_linear_functional():
    T = make_multilinear(BlockShape((1,), (2,)), [3.0, -1.0])
    assert eval_multilinear(T, [[np.array([2.0, 5.0])]])[0] == 1.0


def test_example2_layout():
    shape = BlockShape((2, 2), (2, 2))
    coeffs = np.zeros(16)
    # slot index (1,1,2,2), 1-based, is flat position 0*8 + 0*4 + 1*2 + 1
    coeffs[3] = 1.0
    T = make_multilinear(shape, coeffs)
    assert np.array_equal(T.coeffs, example2().coeffs)
    e1, e2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    assert eval_multilinear(T, [[e1, e1], [e2, e2]])[0] == 1.0
    assert eval_multilinear(T, [[2 * e1, e1], [e2, e2]])[0] == 2.0


def test_wrong_length():
    with pytest.raises(LengthMismatch):
        make_multilinear(BlockShape((1,), (2,)), [1.0, 2.0, 3.0])


def test_non_finite():
    with pytest.raises(NonFiniteCoefficient):
        make_multilinear(BlockShape((1,), (2,)), [1.0, np.nan])


def test_shape_validation():
    with pytest.raises(ValueError):
        BlockShape((0, 1), (2, 2))
    with pytest.raises(ValueError):
        BlockShape((1,), (0,))
    with pytest.raises(ShapeTooLarge):
        BlockShape((5,), (100,))
    assert BlockShape((5,), (100,), max_coeffs=10**10).coeff_count == 10**10


def test_arity_and_dimension_errors():
    T = example2()
    e = np.ones(2)
    with pytest.raises(ArityMismatch):
        eval_multilinear(T, [[e], [e, e]])
    with pytest.raises(ArityMismatch):
        eval_multilinear(T, [[e, e]])
    with pytest.raises(DimensionMismatch):
        eval_multilinear(T, [[e, np.ones(3)], [e, e]])


def test_coefficients_are_read_only():
    T = example2()
    with pytest.raises(ValueError):
        T.coeffs[0] = 1.0
    with pytest.raises(AttributeError):
        T.shape = None


def test_swap_permutation_by_hand():
    T = MultilinearMap.from_array(BlockShape((2,), (2,)), [[[0.0], [1.0]], [[0.0], [0.0]]])
    S = permute_arguments(T, [(1, 0)])
    assert S.array[1, 0, 0] == 1.0
    assert np.count_nonzero(S.coeffs) == 1


def test_invalid_permutation():
    T = example2()
    with pytest.raises(InvalidPermutation):
        permute_arguments(T, [(0, 0), (0, 1)])
    with pytest.raises(InvalidPermutation):
        permute_arguments(T, [(0, 1)])


@given(tensors(), seeds)
def test_matches_loop_oracle(T, seed):
    gen = np.random.default_rng(seed)
    args = random_args(gen, T.shape)
    flat = [v for blk in args for v in blk]
    expected = loop_eval(T.array, flat)
    got = eval_multilinear(T, args)
    assert np.allclose(got, expected, rtol=1e-12, atol=1e-12 * np.abs(T.coeffs).sum())


@given(tensors(), seeds, st.floats(-3, 3), st.floats(-3, 3))
def test_multilinear_in_every_slot(T, seed, alpha, beta):
    gen = np.random.default_rng(seed)
    args = random_args(gen, T.shape)
    b = int(gen.integers(T.shape.m))
    k = int(gen.integers(T.shape.degrees[b]))
    u, v = gen.standard_normal(T.shape.dims[b]), gen.standard_normal(T.shape.dims[b])

    def at(w):
        a = [list(blk) for blk in args]
        a[b][k] = w
        return eval_multilinear(T, a)

    lhs = at(alpha * u + beta * v)
    rhs = alpha * at(u) + beta * at(v)
    scale = np.abs(T.coeffs).sum() * (1 + abs(alpha) + abs(beta)) * 10
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale


@given(tensors(), seeds)
def test_permutation_contract_exact(T, seed):
    gen = np.random.default_rng(seed)
    # small integers keep every product exact in double precision
    T = MultilinearMap(T.shape, gen.integers(-4, 5, size=T.shape.coeff_count))
    args = [[gen.integers(-3, 4, size=d).astype(float) for _ in range(n)]
            for n, d in zip(T.shape.degrees, T.shape.dims)]
    perms = [tuple(gen.permutation(n)) for n in T.shape.degrees]
    permuted = [[blk[p] for p in perm] for blk, perm in zip(args, perms)]
    assert np.array_equal(eval_multilinear(permute_arguments(T, perms), args),
                          eval_multilinear(T, permuted))


@given(tensors(), seeds)
def test_permutation_inverse_round_trip(T, seed):
    gen = np.random.default_rng(seed)
    perms = [gen.permutation(n) for n in T.shape.degrees]
    inverse = [np.argsort(p) for p in perms]
    back = permute_arguments(permute_arguments(T, perms), inverse)
    assert np.array_equal(back.coeffs, T.coeffs)
    ident = permute_arguments(T, [range(n) for n in T.shape.degrees])
    assert np.array_equal(ident.coeffs, T.coeffs)


@given(tensors())
def test_json_round_trip_bit_exact(T):
    text = json.dumps(to_dict(T))
    back = from_dict(json.loads(text))
    assert back.shape == T.shape
    assert np.array_equal(back.coeffs, T.coeffs)
    again = make_multilinear(T.shape, to_dict(T)["coeffs"])
    assert np.array_equal(again.coeffs, T.coeffs)


@given(shapes())
def test_zero_argument_gives_zero(shape):
    T = MultilinearMap.from_array(shape, np.ones(shape.array_shape))
    args = [[np.ones(d) for _ in range(n)] for n, d in zip(shape.degrees, shape.dims)]
    args[0][0] = np.zeros(shape.dims[0])
    assert not np.any(eval_multilinear(T, args))


def test_file_version_checked():
    data = to_dict(example2())
    data["version"] = 2
    with pytest.raises(ValueError):
        from_dict(data)
