import json

import numpy as np
import pytest
from hypothesis import given

from conftest import explicit_composition
from strategies import seeds, tensors

from multipoly.errors import DimensionMismatch, NotAMultipolynomial, ShapeMismatch
from multipoly.fixtures import example2
from multipoly.polymap import (
    Multipolynomial,
    check,
    compose_poly,
    eval_poly,
    from_black_box,
    from_dict,
    hat,
    id_multipolynomial,
    to_dict,
)
from multipoly.symmetry import block_symmetrize, is_block_symmetric
from multipoly.tensor_core import BlockShape, MultilinearMap


def test_example2_diagonal():
    P = hat(example2())
    assert P.canonical
    assert eval_poly(P, [np.ones(2), np.ones(2)])[0] == 1.0


def test_hat_of_x1y2_is_not_canonical():
    T = MultilinearMap.from_array(BlockShape((2,), (2,)), [[[0.0], [1.0]], [[0.0], [0.0]]])
    P = hat(T)
    assert not P.canonical
    C = check(P)
    assert C.array[0, 1, 0] == 0.5 and C.array[1, 0, 0] == 0.5


def test_zero_polynomial():
    P = hat(MultilinearMap.zeros(BlockShape((2, 1), (3, 2), 2)))
    assert not np.any(eval_poly(P, [np.ones(3), np.ones(2)]))
    assert not np.any(check(P).coeffs)


def test_identity_multipolynomials():
    assert eval_poly(id_multipolynomial((1, 1)), [3.0, 2.0])[0] == 6.0
    assert eval_poly(id_multipolynomial((2, 2)), [1.0, 1.0])[0] == 1.0
    assert eval_poly(id_multipolynomial((2, 3)), [2.0, 1.0])[0] == 4.0


def test_evaluation_dimension_error():
    with pytest.raises(DimensionMismatch):
        eval_poly(hat(example2()), [np.ones(3), np.ones(2)])


def test_black_box_x2a2():
    P = from_black_box(lambda x, a: x[0] ** 2 * a[0] ** 2, BlockShape((2, 2), (1, 1)))
    assert P.canonical
    assert P.rep.coeffs.tolist() == [1.0]


def test_black_box_zero_and_failures():
    shape = BlockShape((2, 1), (2, 2))
    P = from_black_box(lambda x, y: 0.0, shape)
    assert not np.any(P.rep.coeffs)
    with pytest.raises(NotAMultipolynomial):
        from_black_box(lambda x: np.linalg.norm(x), BlockShape((1,), (2,)))
    with pytest.raises(ShapeMismatch):
        from_black_box(lambda x, y: [1.0, 2.0], shape)


@given(tensors(max_degree=2), seeds)
def test_black_box_recovers_symmetric_tensor(T, seed):
    P = hat(T)
    R = from_black_box(lambda *xs: eval_poly(P, xs), T.shape, seed=seed)
    S = block_symmetrize(T)
    assert np.max(np.abs(R.rep.coeffs - S.coeffs)) <= 1e-9 * max(1.0, S.max_abs())


@given(tensors(), seeds)
def test_homogeneity(T, seed):
    gen = np.random.default_rng(seed)
    P = hat(T)
    xs = [gen.standard_normal(d) for d in T.shape.dims]
    lam = gen.uniform(-2, 2, size=T.shape.m)
    scaled = eval_poly(P, [l * x for l, x in zip(lam, xs)])
    factor = np.prod([l**n for l, n in zip(lam, T.shape.degrees)])
    expected = factor * eval_poly(P, xs)
    assert np.allclose(scaled, expected, rtol=1e-10, atol=1e-10 * np.abs(T.coeffs).sum())


@given(tensors(), seeds)
def test_uniqueness_of_symmetric_representative(T, seed):
    gen = np.random.default_rng(seed)
    # a second representative of the same polynomial: add an antisymmetric part
    A = MultilinearMap.from_array(T.shape, gen.standard_normal(T.shape.array_shape))
    R = T + (A - block_symmetrize(A))
    xs = [gen.standard_normal((50, d)) for d in T.shape.dims]
    assert np.allclose(hat(R).eval_batch(xs), hat(T).eval_batch(xs), rtol=1e-9, atol=1e-9)
    assert np.max(np.abs(check(hat(R)).coeffs - check(hat(T)).coeffs)) <= 1e-9


def test_check_of_canonical_is_unchanged():
    P = hat(example2())
    assert np.max(np.abs(check(P).coeffs - example2().coeffs)) <= 1e-15


@given(tensors(max_degree=2), seeds)
def test_composition_identity(T, seed):
    gen = np.random.default_rng(seed)
    P = hat(T)
    t = gen.standard_normal((int(gen.integers(1, 3)), T.shape.codomain_dim))
    u = [gen.standard_normal((d, int(gen.integers(1, 4)))) for d in T.shape.dims]
    composed = check(compose_poly(t, P, u))
    expected = explicit_composition(t, check(P), u)
    assert np.max(np.abs(composed.array - expected)) <= 1e-10 * max(1.0, np.max(np.abs(expected)))


def test_composition_examples():
    P = id_multipolynomial((1, 1))
    Q = compose_poly([[2.0]], P, [np.eye(1), np.eye(1)])
    assert eval_poly(Q, [3.0, 5.0])[0] == 30.0

    P = id_multipolynomial((2, 1))
    Q = compose_poly(np.eye(1), P, [[[1.0, 0.0]], np.eye(1)])
    assert Q.shape.dims == (2, 1)
    gen = np.random.default_rng(0)
    for _ in range(10):
        x, mu = gen.standard_normal(2), gen.standard_normal(1)
        assert eval_poly(Q, [x, mu])[0] == pytest.approx(x[0] ** 2 * mu[0])
    # x^2 mu has a single nonzero symmetric coefficient
    C = check(Q)
    assert C.array[0, 0, 0, 0] == 1.0 and np.count_nonzero(C.coeffs) == 1


@given(tensors())
def test_identity_composition(T):
    P = hat(T)
    Q = compose_poly(np.eye(T.shape.codomain_dim), P, [np.eye(d) for d in T.shape.dims])
    assert np.max(np.abs(check(Q).coeffs - check(P).coeffs)) <= 1e-12 * max(1.0, T.max_abs())


def test_composition_dimension_errors():
    P = id_multipolynomial((1, 1))
    with pytest.raises(DimensionMismatch):
        compose_poly(np.eye(2), P, [np.eye(1), np.eye(1)])
    with pytest.raises(DimensionMismatch):
        compose_poly(np.eye(1), P, [np.eye(2), np.eye(1)])


@given(tensors())
def test_file_round_trip(T):
    P = hat(T)
    back = from_dict(json.loads(json.dumps(to_dict(P))))
    assert back.canonical == P.canonical
    assert np.array_equal(back.rep.coeffs, T.coeffs)


def test_file_rejects_false_canonical_flag():
    data = to_dict(Multipolynomial(MultilinearMap.from_array(
        BlockShape((2,), (2,)), [[[0.0], [1.0]], [[0.0], [0.0]]])))
    data["canonical"] = True
    with pytest.raises(ValueError):
        from_dict(data)
    assert is_block_symmetric(check(hat(example2())))
