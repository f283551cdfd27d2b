"""Multipolynomials as diagonal restrictions of multilinear maps."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import rng as _rng
from .errors import DimensionMismatch, NotAMultipolynomial, ShapeMismatch
from .symmetry import block_symmetrize, is_block_symmetric, polarize
from .tensor_core import (
    BlockShape,
    MultilinearMap,
    contract,
    from_dict as _tensor_from_dict,
    to_dict as _tensor_to_dict,
)


@dataclass(frozen=True, eq=False)
class Multipolynomial:
    """An (n_1, ..., n_m)-homogeneous polynomial carried by a representative.

    ``P(x_1, ..., x_m) = rep(x_1, ..., x_1, ..., x_m, ..., x_m)`` with block
    ``i`` repeated ``n_i`` times.  ``canonical`` is true when ``rep`` is
    block-symmetric, in which case ``rep`` is the unique symmetric map of
    ``P``.
    """

    rep: MultilinearMap
    canonical: bool = False

    @property
    def shape(self):
        return self.rep.shape

    def _block_arrays(self, xs):
        shape = self.rep.shape
        if len(xs) != shape.m:
            raise DimensionMismatch(f"expected {shape.m} block vectors, got {len(xs)}")
        out = []
        for i, (x, d) in enumerate(zip(xs, shape.dims)):
            x = np.asarray(x, dtype=np.float64)
            if x.shape[-1] != d:
                raise DimensionMismatch(f"block {i} lives in R^{d}, got {x.shape}")
            out.append(x)
        return out

    def eval_batch(self, xs):
        """Evaluate at a batch: ``xs[i]`` has shape ``(B, d_i)``; returns ``(B, k)``."""
        xs = self._block_arrays(xs)
        slots = [xs[b] for b in self.rep.shape.slot_blocks]
        return contract(self.rep.array, slots)

    def __call__(self, *xs):
        return eval_poly(self, xs)

    def __mul__(self, alpha):
        return Multipolynomial(self.rep * alpha, self.canonical)

    __rmul__ = __mul__


def eval_poly(P, xs):
    """Evaluate ``P`` at one vector per block; returns a vector in ``R^k``."""
    xs = [np.asarray(x, dtype=np.float64).reshape(1, -1) for x in xs]
    return P.eval_batch(xs)[0]


def hat(T):
    """Diagonal restriction of ``T`` as a :class:`Multipolynomial`."""
    return Multipolynomial(T, is_block_symmetric(T))


def check(P):
    """The unique block-symmetric multilinear map whose diagonal is ``P``."""
    if P.canonical:
        return P.rep
    return block_symmetrize(P.rep)


def canonicalize(P):
    return Multipolynomial(check(P), True)


def _basis_orbit_representatives(shape):
    """Slot multi-indices sorted inside every block."""
    per_block = [
        itertools.combinations_with_replacement(range(d), n)
        for d, n in zip(shape.dims, shape.degrees)
    ]
    for combo in itertools.product(*per_block):
        yield combo


def from_black_box(f, shape, probes=20, rtol=1e-8, seed=0):
    """Recover the canonical tensor of a multipolynomial given as a function.

    Each coefficient orbit is filled by polarizing ``f`` at the matching basis
    vectors (base point at the origin).  The result is then compared with
    ``f`` on ``probes`` random points.

    Parameters
    ----------
    f : callable
        ``f(x_1, ..., x_m)`` returning a scalar or a vector of length ``k``.
    shape : BlockShape
    probes : int
        Number of random consistency probes.
    rtol : float
        Allowed residual relative to the largest probe value.
    seed : int

    Raises
    ------
    ShapeMismatch
        If ``f`` returns a value of the wrong length.
    NotAMultipolynomial
        If the reconstruction disagrees with ``f`` on a probe.
    """
    k = shape.codomain_dim

    def g(*xs):
        out = np.atleast_1d(np.asarray(f(*xs), dtype=np.float64)).reshape(-1)
        if out.size != k:
            raise ShapeMismatch(f"evaluator returned {out.size} values, shape says {k}")
        return out

    eye = [np.eye(d) for d in shape.dims]
    array = np.zeros(shape.array_shape)
    for combo in _basis_orbit_representatives(shape):
        args = [[eye[i][j] for j in idx] for i, idx in enumerate(combo)]
        value = polarize(g, None, args)
        for perm_idx in itertools.product(
            *(set(itertools.permutations(idx)) for idx in combo)
        ):
            array[tuple(j for idx in perm_idx for j in idx)] = value
    P = Multipolynomial(MultilinearMap.from_array(shape, array), True)

    gen = _rng.stream(seed)
    points = [gen.standard_normal((probes, d)) for d in shape.dims]
    expected = np.array([g(*(p[r] for p in points)) for r in range(probes)])
    got = P.eval_batch(points)
    scale = float(np.max(np.abs(expected))) if expected.size else 0.0
    worst = float(np.max(np.abs(got - expected))) if expected.size else 0.0
    if worst > rtol * scale:
        raise NotAMultipolynomial(
            f"probe residual {worst:.3e} exceeds {rtol:g} x scale {scale:.3e}"
        )
    return P


def id_multipolynomial(degrees):
    """Scalar multipolynomial ``(l_1, ..., l_m) -> l_1^n_1 ... l_m^n_m``."""
    shape = BlockShape(degrees, [1] * len(degrees), 1)
    return Multipolynomial(MultilinearMap(shape, [1.0]), True)


def compose_poly(t, P, u):
    """Return ``t o P o (u_1, ..., u_m)``.

    ``t`` is a ``(k', k)`` matrix acting on the codomain and ``u[i]`` a
    ``(d_i, g_i)`` matrix feeding block ``i``.  The representative is composed
    slot by slot, so a canonical ``P`` yields a canonical result.
    """
    shape = P.shape
    t = np.atleast_2d(np.asarray(t, dtype=np.float64))
    if t.shape[1] != shape.codomain_dim:
        raise DimensionMismatch(
            f"t has {t.shape[1]} columns, codomain is R^{shape.codomain_dim}"
        )
    if len(u) != shape.m:
        raise DimensionMismatch(f"need {shape.m} inner maps, got {len(u)}")
    u = [np.atleast_2d(np.asarray(ui, dtype=np.float64)) for ui in u]
    for i, (ui, d) in enumerate(zip(u, shape.dims)):
        if ui.shape[0] != d:
            raise DimensionMismatch(f"u[{i}] maps into R^{ui.shape[0]}, block needs R^{d}")

    array = P.rep.array
    n = shape.n_slots
    for s, b in enumerate(shape.slot_blocks):
        # contract axis s with u_b and put the new axis back in place
        array = np.moveaxis(np.tensordot(array, u[b], axes=(s, 0)), -1, s)
    array = np.tensordot(array, t, axes=(n, 1))
    new_shape = BlockShape(
        shape.degrees, [ui.shape[1] for ui in u], t.shape[0],
        max_coeffs=shape.max_coeffs,
    )
    rep = MultilinearMap.from_array(new_shape, array)
    return Multipolynomial(rep, P.canonical)


def to_dict(P):
    data = _tensor_to_dict(P.rep)
    data["canonical"] = bool(P.canonical)
    return data


def from_dict(data):
    rep = _tensor_from_dict(data)
    if "canonical" in data:
        canonical = bool(data["canonical"])
        if canonical and not is_block_symmetric(rep):
            raise ValueError("file claims a canonical tensor that is not block-symmetric")
        return Multipolynomial(rep, canonical)
    return hat(rep)


__all__ = [
    "Multipolynomial",
    "canonicalize",
    "check",
    "compose_poly",
    "eval_poly",
    "from_black_box",
    "from_dict",
    "hat",
    "id_multipolynomial",
    "to_dict",
]
