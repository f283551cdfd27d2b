"""Uniform norms over products of p-norm unit balls.

Maximizing a multilinear form over a product of balls is hard in general, so
the estimators here return feasible lower bounds from multi-start ascent
together with a cheap certified upper bound.  For blocks of dimension at most
two with the Euclidean norm, :func:`grid_bracket` gives a two-sided bracket
tight to well under one percent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import rng as _rng
from ._lp import INF, dual_exponent, dual_maximizer, normalize, parse_p, pnorm
from ._parallel import ordered_map
from .polymap import Multipolynomial, check
from .symmetry import group_order, polarization_constant, sign_patterns
from .tensor_core import BlockShape, MultilinearMap, eval_multilinear

DEFAULT_RESTARTS = 32
MAX_SWEEPS = 500
REL_TOL = 1e-12
MAX_HALVINGS = 40


@dataclass(frozen=True)
class NormSpec:
    """Norm exponents of the domain blocks and of the codomain."""

    domain_p: tuple
    codomain_q: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "domain_p", tuple(parse_p(p) for p in self.domain_p))
        object.__setattr__(self, "codomain_q", parse_p(self.codomain_q))

    @classmethod
    def uniform(cls, m, p=2.0, q=2.0):
        return cls((p,) * m, q)

    def check_shape(self, shape):
        if len(self.domain_p) != shape.m:
            raise ValueError(
                f"norm spec has {len(self.domain_p)} exponents for {shape.m} blocks"
            )

    def to_dict(self):
        return {
            "domain_p": [_p_json(p) for p in self.domain_p],
            "codomain_q": _p_json(self.codomain_q),
        }


def _p_json(p):
    return "inf" if p == INF else p


@dataclass
class NormReport:
    lower: float
    upper: float
    argmax: list
    restarts_used: int
    converged: bool
    candidates: list = field(default_factory=list, repr=False)

    def to_dict(self):
        return {
            "lower": self.lower,
            "upper": self.upper,
            "argmax": [[[float(c) for c in v] for v in blk] for blk in self.argmax],
            "restarts_used": self.restarts_used,
            "converged": self.converged,
        }


def coeff_upper_bound(T, spec):
    """Sum over slot multi-indices of the codomain norm of the coefficient vector.

    Valid for every choice of domain exponents, because each coordinate of a
    point in a p-ball is at most one in absolute value.  The sum is rounded
    outward by a relative ``1e-14`` so it also dominates computed values.
    """
    values = T.coeffs.reshape(-1, T.shape.codomain_dim)
    total = math.fsum(pnorm(values, spec.codomain_q, axis=1))
    return total * (1 + 1e-14)


def chain_constant(degrees):
    """``n_1^n_1 ... n_m^n_m / (n_1! ... n_m!)``."""
    return math.prod(n**n for n in degrees) / group_order(degrees)


# -- multilinear ascent -----------------------------------------------------

def _partial(array, vecs, skip):
    """Contract every axis of ``array`` except ``skip`` with ``vecs``."""
    out = array
    for j in reversed(range(len(vecs))):
        if j != skip:
            out = np.tensordot(out, vecs[j], axes=(j, 0))
    return out


def _slot_exponents(shape, spec):
    return [spec.domain_p[b] for b in shape.slot_blocks]


def _random_sphere_point(gen, d, p):
    while True:
        x = normalize(gen.standard_normal(d), p)
        if x is not None:
            return x


def _group_by_block(shape, slot_vectors):
    out = [[] for _ in range(shape.m)]
    for b, v in zip(shape.slot_blocks, slot_vectors):
        out[b].append(np.array(v))
    return out


def _multilinear_ascent(T, spec, start, max_sweeps=MAX_SWEEPS, tol=REL_TOL):
    """Block-coordinate ascent from ``start`` (one vector per slot)."""
    shape = T.shape
    array = T.array
    ps = _slot_exponents(shape, spec)
    q_dual = dual_exponent(spec.codomain_q)
    xs = [np.array(v, dtype=np.float64) for v in start]

    def value(xs):
        return float(pnorm(_partial(array, xs + [None], shape.n_slots), spec.codomain_q))

    best = value(xs)
    best_xs = [x.copy() for x in xs]
    phi = dual_maximizer(_partial(array, xs + [None], shape.n_slots), q_dual)
    if phi is None:
        phi = np.zeros(shape.codomain_dim)
        phi[0] = 1.0
    vecs = xs + [phi]
    prev = None
    converged = False
    for _ in range(max_sweeps):
        for s in range(shape.n_slots):
            y = dual_maximizer(_partial(array, vecs, s), ps[s])
            if y is not None:
                vecs[s] = y
        y = dual_maximizer(_partial(array, vecs, shape.n_slots), q_dual)
        if y is not None:
            vecs[-1] = y
        current = value(vecs[:-1])
        if current > best:
            best = current
            best_xs = [x.copy() for x in vecs[:-1]]
        if prev is not None and current - prev <= tol * max(abs(current), 1e-300):
            converged = True
            break
        prev = current
    return best, best_xs, converged


def _lift_blocks(shape, args):
    """Per-block argument lists flattened to one vector per slot."""
    flat = []
    for blk, n in zip(args, shape.degrees):
        if len(blk) != n:
            raise ValueError("start point does not match the block degrees")
        flat.extend(np.asarray(v, dtype=np.float64) for v in blk)
    return flat


def _best(results):
    """Index of the largest value; the lowest index wins ties."""
    best = 0
    for i, r in enumerate(results):
        if r[0] > results[best][0]:
            best = i
    return best


def multilinear_norm_lower(T, spec, restarts=DEFAULT_RESTARTS, seed=0,
                           extra_starts=(), threads=1):
    """Lower bound on ``||T||`` by multi-start alternating maximization.

    With all slots but one fixed, ``T`` is linear in the free slot, so the
    best vector there is the dual-norm maximizer of the partial gradient.
    The codomain norm enters through a dual functional updated the same way.
    Each sweep can only increase the objective and every iterate is feasible,
    so the returned ``lower`` is a genuine lower bound.

    Parameters
    ----------
    T : MultilinearMap
    spec : NormSpec
    restarts : int
        Random starting points; restart ``r`` draws from ``stream(seed, r)``.
    extra_starts : sequence
        Additional starting points, each given as per-block argument lists.
    threads : int
        Restarts run on this many threads; results do not depend on it.

    Returns
    -------
    NormReport
        ``candidates`` holds the final point of every run, in run order.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    spec.check_shape(T.shape)
    shape = T.shape
    ps = _slot_exponents(shape, spec)

    def run(job):
        kind, payload = job
        if kind == "random":
            gen = _rng.stream(seed, payload)
            start = [_random_sphere_point(gen, d, p) for d, p in zip(shape.slot_dims, ps)]
        else:
            start = _lift_blocks(shape, payload)
        return _multilinear_ascent(T, spec, start)

    jobs = [("random", r) for r in range(restarts)]
    jobs += [("extra", s) for s in extra_starts]
    results = ordered_map(run, jobs, threads)
    i = _best(results)
    return NormReport(
        lower=results[i][0],
        upper=coeff_upper_bound(T, spec),
        argmax=_group_by_block(shape, results[i][1]),
        restarts_used=len(jobs),
        converged=all(r[2] for r in results),
        candidates=[_group_by_block(shape, r[1]) for r in results],
    )


# -- polynomial ascent ------------------------------------------------------

def _poly_value(P, xs, q):
    return float(pnorm(P.eval_batch([x[None, :] for x in xs])[0], q))


def _poly_block_gradient(P, xs, phi, i):
    """Gradient of ``phi . P`` with respect to the vector of block ``i``."""
    shape = P.shape
    slot_vecs = [xs[b] for b in shape.slot_blocks] + [phi]
    offset = shape.block_offsets[i]
    grad = np.zeros(shape.dims[i])
    for s in range(offset, offset + shape.degrees[i]):
        grad += _partial(P.rep.array, slot_vecs, s)
    return grad


def _poly_ascent(P, spec, start, max_sweeps=MAX_SWEEPS, tol=REL_TOL):
    shape = P.shape
    q = spec.codomain_q
    q_dual = dual_exponent(q)
    xs = []
    for x, p in zip(start, spec.domain_p):
        y = normalize(np.asarray(x, dtype=np.float64), p)
        xs.append(y if y is not None else np.asarray(x, dtype=np.float64))
    best = _poly_value(P, xs, q)
    converged = False
    for _ in range(max_sweeps):
        before = best
        for i in range(shape.m):
            phi = dual_maximizer(P.eval_batch([x[None, :] for x in xs])[0], q_dual)
            if phi is None:
                phi = np.eye(shape.codomain_dim)[0]
            g = _poly_block_gradient(P, xs, phi, i)
            gnorm = float(np.linalg.norm(g))
            if gnorm == 0.0:
                continue
            step = max(float(np.linalg.norm(xs[i])), 1.0) / gnorm
            for _ in range(MAX_HALVINGS + 1):
                y = normalize(xs[i] + step * g, spec.domain_p[i])
                if y is not None:
                    trial = xs[:i] + [y] + xs[i + 1:]
                    v = _poly_value(P, trial, q)
                    if v > best:
                        xs, best = trial, v
                        break
                step *= 0.5
        if best - before <= tol * max(abs(best), 1e-300):
            converged = True
            break
    return best, xs, converged


def _diagonal_projections(shape, candidate):
    """Points ``(x_i)`` taking slot ``s`` of every block, for each ``s``."""
    width = max(shape.degrees)
    return [[blk[min(s, len(blk) - 1)] for blk in candidate] for s in range(width)]


def poly_norm_lower(P, spec, restarts=DEFAULT_RESTARTS, seed=0, extra_starts=(),
                    threads=1, seed_from_check=True, check_report=None):
    """Lower bound on ``||P||`` by projected-gradient ascent on the unit spheres.

    Besides ``restarts`` random starts, every final point of
    :func:`multilinear_norm_lower` run on ``check(P)`` with the same seed is
    projected onto the diagonal (one slot per block at a time) and used as a
    start.  Steps follow the gradient of the diagonal restriction, are
    projected back onto the sphere and halved until the value improves.
    Pass ``check_report`` to reuse an existing run on ``check(P)``.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    shape = P.shape
    spec.check_shape(shape)
    starts = []
    for r in range(restarts):
        gen = _rng.stream(seed, r)
        starts.append([_random_sphere_point(gen, d, p)
                       for d, p in zip(shape.dims, spec.domain_p)])
    if seed_from_check:
        seeded = check_report or multilinear_norm_lower(
            check(P), spec, restarts, seed, threads=threads)
        for cand in seeded.candidates:
            starts.extend(_diagonal_projections(shape, cand))
    starts.extend([np.asarray(x, dtype=np.float64) for x in s] for s in extra_starts)

    results = ordered_map(lambda s: _poly_ascent(P, spec, s), starts, threads)
    i = _best(results)
    upper = min(coeff_upper_bound(P.rep, spec), coeff_upper_bound(check(P), spec))
    return NormReport(
        lower=results[i][0],
        upper=upper,
        argmax=[[x] for x in results[i][1]],
        restarts_used=len(starts),
        converged=all(r[2] for r in results),
        candidates=[[[x] for x in r[1]] for r in results],
    )


@dataclass
class ChainReport:
    poly_norm: float
    check_norm: float
    constant: float
    left_ok: bool
    right_ok: bool
    poly_report: NormReport = field(repr=False, default=None)
    check_report: NormReport = field(repr=False, default=None)

    def to_dict(self):
        return {
            "poly_norm": self.poly_norm,
            "check_norm": self.check_norm,
            "constant": self.constant,
            "left_ok": self.left_ok,
            "right_ok": self.right_ok,
        }


def norm_chain_report(P, spec, restarts=DEFAULT_RESTARTS, seed=0, slack=0.02,
                      threads=1):
    """Estimate ``||P||`` and ``||check(P)||`` on matched runs.

    The multilinear estimate is also restarted from the diagonal lift of the
    polynomial's best point.  Ascent never decreases the value, so
    ``||P||_est <= ||check(P)||_est`` holds by construction, up to rounding
    (``left_ok`` allows a factor ``1 + 1e-9``).  ``right_ok`` compares the
    estimates against the chain constant with multiplicative ``1 + slack``;
    it is only meaningful when both estimates are close to the true norms.
    """
    Pc = check(P)
    multi = multilinear_norm_lower(Pc, spec, restarts, seed, threads=threads)
    poly = poly_norm_lower(P, spec, restarts, seed, threads=threads, check_report=multi)
    lift = [[x[0]] * n for x, n in zip(poly.argmax, P.shape.degrees)]
    value, xs, converged = _multilinear_ascent(Pc, spec, _lift_blocks(P.shape, lift))
    multi.restarts_used += 1
    multi.converged = multi.converged and converged
    multi.candidates.append(_group_by_block(P.shape, xs))
    if value > multi.lower:
        multi.lower = value
        multi.argmax = _group_by_block(P.shape, xs)
    const = chain_constant(P.shape.degrees)
    return ChainReport(
        poly_norm=poly.lower,
        check_norm=multi.lower,
        constant=const,
        left_ok=poly.lower <= multi.lower * (1 + 1e-9),
        right_ok=multi.lower <= const * poly.lower * (1 + slack),
        poly_report=poly,
        check_report=multi,
    )


def polarization_sample_bound(P, args, q=2.0):
    """Both sides of ``||check(P)(args)||_q <= A * sum_eps ||P(sum eps x)||_q``.

    The right side follows from the polarization formula (base point at the
    origin) and the triangle inequality.  Returns ``(lhs, rhs)``.
    """
    shape = P.shape
    lhs = float(pnorm(eval_multilinear(check(P), args), q))
    n = shape.n_slots
    signs = sign_patterns(0, 1 << n, n)
    points = []
    for i, blk in enumerate(args):
        X = np.array([np.asarray(v, dtype=np.float64) for v in blk])
        o = shape.block_offsets[i]
        points.append(signs[:, o:o + shape.degrees[i]] @ X)
    values = pnorm(P.eval_batch(points), q, axis=1)
    rhs = polarization_constant(shape.degrees) * math.fsum(values)
    return lhs, rhs


# -- grid bracketing ---------------------------------------------------------

@dataclass
class Bracket:
    lower: float
    upper: float

    @property
    def width(self):
        return (self.upper - self.lower) / self.lower if self.lower > 0 else 0.0


def _half_circle(resolution):
    count = math.ceil(2 * math.pi / resolution)
    spacing = 2 * math.pi / count
    theta = spacing * np.arange(count // 2 + count % 2)
    return np.stack([np.cos(theta), np.sin(theta)], axis=1), spacing


def grid_bracket(obj, spec, resolution=0.005, max_points=5 * 10**6):
    """Two-sided bracket of ``||P||`` (or ``||T||``) for blocks of dimension <= 2.

    Blocks of dimension 2 must carry the Euclidean norm.  On the unit circle,
    ``theta -> phi . P(cos theta, sin theta)`` is a trigonometric polynomial
    of degree ``n_i``, so Bernstein's inequality bounds its derivative by
    ``n_i`` times the maximum.  With grid spacing ``h`` this gives
    ``max <= grid_max / (1 - (h / 2) * sum n_i)`` over the gridded blocks.
    Half circles suffice because ``|P|`` is even in every block.  For a
    scalar-valued map, one degree-1 block of dimension 2 is maximized
    exactly through the dual norm instead of gridded.

    Parameters
    ----------
    obj : Multipolynomial or MultilinearMap
        A multilinear map is bracketed as the (1, ..., 1)-polynomial of its
        slots, which has the same norm.
    """
    if isinstance(obj, MultilinearMap):
        T = obj
        slot_p = _slot_exponents(T.shape, spec)
        shape = BlockShape((1,) * T.shape.n_slots, T.shape.slot_dims,
                           T.shape.codomain_dim, max_coeffs=T.shape.max_coeffs)
        P = Multipolynomial(MultilinearMap(shape, T.coeffs))
        spec = NormSpec(slot_p, spec.codomain_q)
    else:
        P = obj
    shape = P.shape
    spec.check_shape(shape)
    if any(d > 2 for d in shape.dims):
        raise ValueError("grid bracketing needs block dimensions <= 2")
    if any(d == 2 and p != 2.0 for d, p in zip(shape.dims, spec.domain_p)):
        raise ValueError("grid bracketing needs the Euclidean norm on 2-dimensional blocks")

    grid, spacing = _half_circle(resolution)
    exact = None
    if shape.codomain_dim == 1:
        for i in reversed(range(shape.m)):
            if shape.dims[i] == 2 and shape.degrees[i] == 1:
                exact = i
                break

    mats = []
    gridded_degree = 0
    n_points = 1
    for i, (d, n) in enumerate(zip(shape.dims, shape.degrees)):
        if d == 1 or i == exact:
            mats.append(None if i == exact else np.ones((1, 1)))
            continue
        # rows are the diagonal tensor powers x (x) ... (x) x, flattened
        rows = grid
        for _ in range(n - 1):
            rows = np.einsum("ja,jb->jab", rows, grid).reshape(len(grid), -1)
        mats.append(rows)
        gridded_degree += n
        n_points *= len(grid)
    if n_points > max_points:
        raise ValueError(f"grid needs {n_points} points, cap is {max_points}")

    block_sizes = [d**n for d, n in zip(shape.dims, shape.degrees)]
    out = P.rep.array.reshape(block_sizes + [shape.codomain_dim])
    # contract the last block first so earlier axes keep their positions
    for i in reversed(range(shape.m)):
        if mats[i] is None:
            out = np.moveaxis(out, i, -1)
        else:
            out = np.moveaxis(np.tensordot(out, mats[i], axes=(i, 1)), -1, i)
    if exact is not None:
        values = pnorm(out[..., 0, :], dual_exponent(spec.domain_p[exact]), axis=-1)
    else:
        values = pnorm(out, spec.codomain_q, axis=-1)
    best = float(np.max(values))
    factor = 1.0 - 0.5 * spacing * gridded_degree
    if factor <= 0:
        raise ValueError("grid too coarse for a Bernstein bracket")
    return Bracket(best, best / factor)
