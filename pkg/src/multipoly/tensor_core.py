"""Dense coefficient tensors for (n_1 + ... + n_m)-linear maps.

A map ``T : E_1^{n_1} x ... x E_m^{n_m} -> F`` with ``E_i = R^{d_i}`` and
``F = R^k`` is stored as a flat float64 array.  Slots are ordered block by
block (block 1 positions 1..n_1, then block 2, ...), the flat index is
row-major over the slot indices, and the codomain coordinate varies fastest.
Reshaping the flat array in C order to ``slot_dims + (k,)`` therefore gives
the natural ``ndarray`` view used throughout the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ArityMismatch,
    DimensionMismatch,
    InvalidPermutation,
    LengthMismatch,
    NonFiniteCoefficient,
    ShapeTooLarge,
)

DEFAULT_MAX_COEFFS = 10**7


@dataclass(frozen=True)
class BlockShape:
    """Signature ``(m; n_1..n_m; d_1..d_m; k)`` of a multilinear map.

    Parameters
    ----------
    degrees : sequence of int
        Number of repeated slots ``n_i`` of each block.
    dims : sequence of int
        Dimension ``d_i`` of the space feeding block ``i``.
    codomain_dim : int
        Dimension ``k`` of the target space.
    max_coeffs : int
        Reject shapes whose dense storage would exceed this many scalars.
    """

    degrees: tuple
    dims: tuple
    codomain_dim: int = 1
    max_coeffs: int = field(default=DEFAULT_MAX_COEFFS, compare=False, repr=False)

    def __post_init__(self):
        degrees = tuple(int(n) for n in self.degrees)
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "degrees", degrees)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "codomain_dim", int(self.codomain_dim))
        if not degrees:
            raise ValueError("a block shape needs at least one block")
        if len(dims) != len(degrees):
            raise ValueError(
                f"got {len(degrees)} degrees but {len(dims)} dims"
            )
        if any(n < 1 for n in degrees):
            raise ValueError(f"degrees must be >= 1, got {degrees}")
        if any(d < 1 for d in dims):
            raise ValueError(f"dims must be >= 1, got {dims}")
        if self.codomain_dim < 1:
            raise ValueError(f"codomain_dim must be >= 1, got {self.codomain_dim}")
        # exact integer arithmetic so huge shapes cannot overflow before the check
        count = self.codomain_dim * math.prod(d**n for d, n in zip(dims, degrees))
        if count > self.max_coeffs:
            raise ShapeTooLarge(
                f"shape needs {count} coefficients, cap is {self.max_coeffs}"
            )

    @property
    def m(self):
        return len(self.degrees)

    @property
    def n_slots(self):
        return sum(self.degrees)

    @property
    def slot_dims(self):
        """Dimension of every slot, in storage order."""
        return tuple(d for d, n in zip(self.dims, self.degrees) for _ in range(n))

    @property
    def slot_blocks(self):
        """Block index owning every slot, in storage order."""
        return tuple(i for i, n in enumerate(self.degrees) for _ in range(n))

    @property
    def block_offsets(self):
        """Index of the first slot of every block."""
        offsets = [0]
        for n in self.degrees[:-1]:
            offsets.append(offsets[-1] + n)
        return tuple(offsets)

    @property
    def array_shape(self):
        return self.slot_dims + (self.codomain_dim,)

    @property
    def coeff_count(self):
        return math.prod(self.array_shape)

    def with_dims(self, dims=None, codomain_dim=None):
        return BlockShape(
            self.degrees,
            self.dims if dims is None else dims,
            self.codomain_dim if codomain_dim is None else codomain_dim,
            max_coeffs=self.max_coeffs,
        )


class MultilinearMap:
    """Immutable dense multilinear map.

    Use :func:`make_multilinear` or :meth:`from_array` to build one.  The
    coefficient storage is read-only; arithmetic returns new maps.
    """

    __slots__ = ("shape", "coeffs")

    def __init__(self, shape, coeffs):
        coeffs = np.array(coeffs, dtype=np.float64).reshape(-1)
        if coeffs.size != shape.coeff_count:
            raise LengthMismatch(
                f"shape {shape.array_shape} needs {shape.coeff_count} "
                f"coefficients, got {coeffs.size}"
            )
        if not np.all(np.isfinite(coeffs)):
            raise NonFiniteCoefficient("coefficients must be finite")
        coeffs.flags.writeable = False
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "coeffs", coeffs)

    def __setattr__(self, name, value):
        raise AttributeError("MultilinearMap is immutable")

    @classmethod
    def from_array(cls, shape, array):
        array = np.asarray(array, dtype=np.float64)
        if array.shape != shape.array_shape:
            raise LengthMismatch(
                f"expected array of shape {shape.array_shape}, got {array.shape}"
            )
        return cls(shape, array.reshape(-1))

    @classmethod
    def zeros(cls, shape):
        return cls(shape, np.zeros(shape.coeff_count))

    @property
    def array(self):
        """Read-only view of shape ``slot_dims + (k,)``."""
        return self.coeffs.reshape(self.shape.array_shape)

    def max_abs(self):
        return float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 0.0

    def _check_compatible(self, other):
        if self.shape != other.shape:
            raise DimensionMismatch(f"{self.shape} vs {other.shape}")

    def __add__(self, other):
        self._check_compatible(other)
        return MultilinearMap(self.shape, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check_compatible(other)
        return MultilinearMap(self.shape, self.coeffs - other.coeffs)

    def __mul__(self, alpha):
        return MultilinearMap(self.shape, float(alpha) * self.coeffs)

    __rmul__ = __mul__

    def __neg__(self):
        return MultilinearMap(self.shape, -self.coeffs)

    def __repr__(self):
        s = self.shape
        return (
            f"MultilinearMap(degrees={s.degrees}, dims={s.dims}, "
            f"codomain_dim={s.codomain_dim})"
        )


def make_multilinear(shape, coeffs):
    """Build a :class:`MultilinearMap` from a flat coefficient list.

    Raises
    ------
    LengthMismatch
        If ``len(coeffs)`` differs from ``k * prod(d_i ** n_i)``.
    NonFiniteCoefficient
        If any coefficient is NaN or infinite.
    """
    return MultilinearMap(shape, coeffs)


def contract(array, slot_vectors):
    """Contract every slot axis of ``array`` with a batch of vectors.

    ``array`` has shape ``slot_dims + (k,)``; ``slot_vectors[s]`` has shape
    ``(B, slot_dims[s])``.  Returns the ``(B, k)`` batch of values.
    """
    out = np.tensordot(slot_vectors[0], array, axes=(1, 0))
    for vec in slot_vectors[1:]:
        out = np.einsum("bi...,bi->b...", out, vec)
    return out


def flatten_args(shape, args):
    """Validate per-block argument lists and return one vector per slot."""
    if len(args) != shape.m:
        raise ArityMismatch(f"expected {shape.m} blocks of arguments, got {len(args)}")
    flat = []
    for i, (block, n, d) in enumerate(zip(args, shape.degrees, shape.dims)):
        if len(block) != n:
            raise ArityMismatch(f"block {i} takes {n} arguments, got {len(block)}")
        for vec in block:
            vec = np.asarray(vec, dtype=np.float64).reshape(-1)
            if vec.size != d:
                raise DimensionMismatch(
                    f"block {i} lives in R^{d}, got a vector of length {vec.size}"
                )
            flat.append(vec)
    return flat


def eval_multilinear(T, args):
    """Evaluate ``T`` at ``args``.

    Parameters
    ----------
    T : MultilinearMap
    args : sequence of sequences of array_like
        ``args[i]`` holds the ``n_i`` vectors fed to block ``i``.

    Returns
    -------
    ndarray of shape (k,)
    """
    flat = flatten_args(T.shape, args)
    return contract(T.array, [v[None, :] for v in flat])[0]


def _check_perms(shape, perms):
    if len(perms) != shape.m:
        raise InvalidPermutation(f"need one permutation per block ({shape.m})")
    checked = []
    for i, (perm, n) in enumerate(zip(perms, shape.degrees)):
        perm = tuple(int(p) for p in perm)
        if sorted(perm) != list(range(n)):
            raise InvalidPermutation(
                f"block {i}: {perm} is not a permutation of range({n})"
            )
        checked.append(perm)
    return checked


def permute_arguments(T, perms):
    """Return ``T_sigma`` with ``T_sigma(x) = T(x permuted within blocks)``.

    ``perms[i]`` is a 0-based permutation of ``range(n_i)``; the result
    evaluates as ``T(x_{sigma(0)}, ..., x_{sigma(n_i - 1)}, ...)``.
    """
    perms = _check_perms(T.shape, perms)
    # T_sigma[i_1..i_N] = T[i_sigma(1)..i_sigma(N)], i.e. transpose by sigma^-1
    sigma = []
    for offset, perm in zip(T.shape.block_offsets, perms):
        sigma.extend(offset + p for p in perm)
    inverse = list(np.argsort(sigma))
    axes = inverse + [T.shape.n_slots]
    return MultilinearMap(T.shape, np.ascontiguousarray(T.array.transpose(axes)))


def to_dict(T):
    """Serialize to the version-1 JSON tensor layout."""
    s = T.shape
    return {
        "version": 1,
        "scalar": "f64",
        "m": s.m,
        "degrees": list(s.degrees),
        "dims": list(s.dims),
        "codomain_dim": s.codomain_dim,
        "coeffs": [float(c) for c in T.coeffs],
    }


def from_dict(data, max_coeffs=DEFAULT_MAX_COEFFS):
    if data.get("version") != 1:
        raise ValueError(f"unsupported tensor file version {data.get('version')!r}")
    if data.get("scalar", "f64") != "f64":
        raise ValueError(f"unsupported scalar type {data.get('scalar')!r}")
    shape = BlockShape(
        data["degrees"], data["dims"], data["codomain_dim"], max_coeffs=max_coeffs
    )
    if "m" in data and int(data["m"]) != shape.m:
        raise ValueError(f"m={data['m']} disagrees with {shape.m} degrees")
    return make_multilinear(shape, data["coeffs"])
