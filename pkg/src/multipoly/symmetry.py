"""Block symmetry, block symmetrization and the block polarization formula."""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np

from .errors import (
    BudgetExceeded,
    DimensionMismatch,
    GroupTooLarge,
    HeterogeneousBlocks,
)
from .tensor_core import MultilinearMap, permute_arguments

DEFAULT_GROUP_CAP = 10**6
DEFAULT_MAX_SLOTS = 30
DEFAULT_CHUNK = 1 << 14


@lru_cache(maxsize=64)
def _orbit_labels(slot_dims, groups):
    """Flat index of the canonical representative of every slot multi-index.

    ``groups`` is a tuple of ``(start, stop)`` slot ranges whose indices may
    be permuted freely; sorting inside each range picks the representative.
    """
    idx = np.indices(slot_dims).reshape(len(slot_dims), -1)
    for start, stop in groups:
        if stop - start > 1:
            idx[start:stop] = np.sort(idx[start:stop], axis=0)
    labels = np.ravel_multi_index(tuple(idx), slot_dims)
    labels.flags.writeable = False
    return labels


def _block_groups(shape):
    return tuple((o, o + n) for o, n in zip(shape.block_offsets, shape.degrees))


def group_order(degrees):
    return math.prod(math.factorial(n) for n in degrees)


def _orbit_spread(T, labels):
    values = T.coeffs.reshape(-1, T.shape.codomain_dim)
    order = np.argsort(labels, kind="stable")
    sorted_labels = labels[order]
    starts = np.flatnonzero(np.r_[True, sorted_labels[1:] != sorted_labels[:-1]])
    grouped = values[order]
    hi = np.maximum.reduceat(grouped, starts, axis=0)
    lo = np.minimum.reduceat(grouped, starts, axis=0)
    return float(np.max(hi - lo)) if hi.size else 0.0


def _default_tol(T, tol):
    return 1e-12 * T.max_abs() if tol is None else float(tol)


def is_block_symmetric(T, tol=None):
    """True iff ``T`` is invariant under permutations inside every block.

    Coefficients are compared against every other member of their orbit,
    which is equivalent to checking all ``n_1! ... n_m!`` permutations.
    ``tol`` defaults to ``1e-12 * max|coeff|``.
    """
    tol = _default_tol(T, tol)
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    labels = _orbit_labels(T.shape.slot_dims, _block_groups(T.shape))
    return _orbit_spread(T, labels) <= tol


def is_fully_symmetric(T, tol=None):
    """True iff ``T`` is invariant under every permutation of all its slots.

    Raises
    ------
    HeterogeneousBlocks
        If the blocks do not share a single dimension.
    """
    if len(set(T.shape.dims)) != 1:
        raise HeterogeneousBlocks(
            f"full symmetry needs equal block dimensions, got {T.shape.dims}"
        )
    tol = _default_tol(T, tol)
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    labels = _orbit_labels(T.shape.slot_dims, ((0, T.shape.n_slots),))
    return _orbit_spread(T, labels) <= tol


def _symmetrize_orbits(T):
    shape = T.shape
    labels = _orbit_labels(shape.slot_dims, _block_groups(shape))
    size = labels.size
    values = T.coeffs.reshape(size, shape.codomain_dim)
    counts = np.bincount(labels, minlength=size).astype(np.float64)
    out = np.empty_like(values)
    for c in range(shape.codomain_dim):
        sums = np.bincount(labels, weights=values[:, c], minlength=size)
        out[:, c] = sums[labels] / counts[labels]
    return MultilinearMap(shape, out.reshape(-1))


def all_block_permutations(degrees):
    """Iterate over every tuple of within-block permutations."""
    return itertools.product(*(itertools.permutations(range(n)) for n in degrees))


def _symmetrize_group(T, group_cap):
    order = group_order(T.shape.degrees)
    if order > group_cap:
        raise GroupTooLarge(f"group has {order} elements, cap is {group_cap}")
    total = np.zeros_like(T.coeffs)
    for perms in all_block_permutations(T.shape.degrees):
        total += permute_arguments(T, perms).coeffs
    return MultilinearMap(T.shape, total / order)


def block_symmetrize(T, method="orbit", group_cap=DEFAULT_GROUP_CAP):
    """Average ``T`` over all within-block slot permutations.

    Parameters
    ----------
    T : MultilinearMap
    method : {"orbit", "group"}
        ``"orbit"`` averages coefficients over index orbits and scales to any
        group size.  ``"group"`` sums the permuted maps explicitly and is
        limited to groups of at most ``group_cap`` elements.

    Returns
    -------
    MultilinearMap
        The block-symmetric projection of ``T``.
    """
    if method == "orbit":
        return _symmetrize_orbits(T)
    if method == "group":
        return _symmetrize_group(T, group_cap)
    raise ValueError(f"unknown symmetrization method {method!r}")


def polarization_constant(degrees):
    """``1 / (2^(n_1+...+n_m) n_1! ... n_m!)``."""
    return 1.0 / (2.0 ** sum(degrees) * group_order(degrees))


def _as_blocks(vectors):
    return [np.asarray(v, dtype=np.float64).reshape(-1) for v in vectors]


def sign_patterns(start, stop, n_slots):
    rows = np.arange(start, stop, dtype=np.int64)[:, None]
    bits = (rows >> np.arange(n_slots, dtype=np.int64)[None, :]) & 1
    return 1.0 - 2.0 * bits


def polarize(P, base, args, max_slots=DEFAULT_MAX_SLOTS, chunk=DEFAULT_CHUNK):
    """Recover the block-symmetric map from diagonal values of ``P``.

    Computes ``A * sum_eps (prod eps) P(x0_1 + sum_k eps_k x_k^(1), ...)``
    over all ``2^N`` sign patterns, with ``A`` from
    :func:`polarization_constant`.

    Parameters
    ----------
    P : Multipolynomial or callable
        A callable is invoked as ``P(x_1, ..., x_m)`` and must return a
        scalar or a vector.
    base : sequence of array_like or None
        Base point ``x0`` of every block; ``None`` means the origin.
    args : sequence of sequences of array_like
        ``args[i]`` holds the ``n_i`` vectors of block ``i``.
    max_slots : int
        Refuse to run when ``N = sum n_i`` exceeds this budget.
    chunk : int
        Sign patterns evaluated per batch.  Each batch is summed with
        ``math.fsum`` and the batch totals are combined the same way, so the
        result depends only on ``chunk``.
    """
    blocks = [np.array([np.asarray(v, dtype=np.float64).reshape(-1) for v in blk])
              for blk in args]
    degrees = tuple(len(b) for b in blocks)
    if any(n < 1 for n in degrees):
        raise DimensionMismatch("every block needs at least one argument")
    n_slots = sum(degrees)
    if n_slots > max_slots:
        raise BudgetExceeded(f"2^{n_slots} evaluations exceeds budget 2^{max_slots}")
    dims = tuple(b.shape[1] for b in blocks)
    if base is None:
        base = [np.zeros(d) for d in dims]
    base = _as_blocks(base)
    if len(base) != len(blocks) or any(b.size != d for b, d in zip(base, dims)):
        raise DimensionMismatch("base point does not match the argument blocks")

    rep = getattr(P, "rep", None)
    if rep is not None:
        if rep.shape.degrees != degrees or rep.shape.dims != dims:
            raise DimensionMismatch(
                f"arguments fit degrees {degrees} / dims {dims}, polynomial has "
                f"{rep.shape.degrees} / {rep.shape.dims}"
            )

    offsets = np.cumsum((0,) + degrees)
    total = 1 << n_slots
    partials = []
    for start in range(0, total, chunk):
        signs = sign_patterns(start, min(start + chunk, total), n_slots)
        weight = np.prod(signs, axis=1)
        points = [
            base[i][None, :] + signs[:, offsets[i]:offsets[i + 1]] @ blocks[i]
            for i in range(len(blocks))
        ]
        if rep is not None:
            values = P.eval_batch(points)
        else:
            values = np.array(
                [np.atleast_1d(np.asarray(P(*(p[r] for p in points)), dtype=np.float64))
                 for r in range(signs.shape[0])]
            )
        terms = weight[:, None] * values
        sums = [math.fsum(terms[:, c]) for c in range(terms.shape[1])]
        partials.append(sums)
    out = np.array([math.fsum(col) for col in zip(*partials)])
    return out / 2.0**n_slots / group_order(degrees)
