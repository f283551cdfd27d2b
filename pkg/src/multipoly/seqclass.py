"""Finite truncations of vector-valued sequence classes.

Three classes are available: strongly p-summable (``lp:<p>``), weakly
p-summable (``wlp:<p>``) and bounded (``linf``).  On finite truncations the
null-sequence class coincides with ``linf``, so it is not listed separately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import rng as _rng
from ._lp import INF, dual_exponent, dual_maximizer, normalize, parse_p, pnorm
from .errors import EmptySamples, ExponentMismatch
from .norms import NormSpec, multilinear_norm_lower
from .tensor_core import BlockShape, MultilinearMap

WEAK_RESTARTS = 16
WEAK_SWEEPS = 200
# exhaustive vertex search on the l_inf dual cube up to this dimension
MAX_CUBE_DIM = 16


@dataclass(frozen=True)
class ClassKind:
    tag: str
    p: float = INF

    def __post_init__(self):
        if self.tag not in ("lp", "wlp", "linf"):
            raise ValueError(f"unknown sequence class {self.tag!r}")
        if self.tag == "linf":
            object.__setattr__(self, "p", INF)
        else:
            p = parse_p(self.p)
            if p == INF:
                raise ValueError("use 'linf' for the bounded class")
            object.__setattr__(self, "p", p)

    @classmethod
    def parse(cls, text):
        text = text.strip().lower()
        if text == "linf":
            return cls("linf")
        tag, _, p = text.partition(":")
        if not p:
            raise ValueError(f"sequence class {text!r} needs an exponent, e.g. lp:2")
        return cls(tag, float(p))

    def __str__(self):
        if self.tag == "linf":
            return "linf"
        p = int(self.p) if float(self.p).is_integer() else self.p
        return f"{self.tag}:{p}"


def Lp(p):
    return ClassKind("lp", p)


def WeakLp(p):
    return ClassKind("wlp", p)


LInf = ClassKind("linf")


@dataclass(frozen=True, eq=False)
class FiniteSequence:
    """Finitely many vectors of ``R^dim`` normed by ``space_p``."""

    entries: np.ndarray
    space_p: float = 2.0
    dim: int = field(default=None)

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=np.float64)
        if entries.ndim == 1:
            # a flat list is a scalar sequence unless a dimension was given
            d = 1 if self.dim is None else int(self.dim)
            entries = entries.reshape(-1, d)
        elif entries.ndim != 2:
            raise ValueError("entries must be a list of vectors")
        if self.dim is not None and entries.shape[1] != int(self.dim) and entries.size:
            raise ValueError(f"entries have dimension {entries.shape[1]}, expected {self.dim}")
        dim = int(self.dim) if self.dim is not None else entries.shape[1]
        if entries.size == 0:
            entries = np.zeros((0, dim))
        if not np.all(np.isfinite(entries)):
            raise ValueError("sequence entries must be finite")
        entries.flags.writeable = False
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "space_p", parse_p(self.space_p))
        object.__setattr__(self, "dim", dim)

    def __len__(self):
        return self.entries.shape[0]

    def prefix(self, k):
        return FiniteSequence(self.entries[:k], self.space_p, self.dim)

    def map(self, u):
        u = np.atleast_2d(np.asarray(u, dtype=np.float64))
        return FiniteSequence(self.entries @ u.T, self.space_p, u.shape[0])

    def to_dict(self):
        return {
            "dim": self.dim,
            "space_p": "inf" if self.space_p == INF else self.space_p,
            "entries": [[float(c) for c in row] for row in self.entries],
        }

    @classmethod
    def from_dict(cls, data):
        return cls(np.array(data["entries"], dtype=np.float64).reshape(-1, int(data["dim"])),
                   data.get("space_p", 2.0), int(data["dim"]))


def scalar_sequence(values):
    return FiniteSequence(np.asarray(values, dtype=np.float64).reshape(-1, 1), 2.0, 1)


def unit_vector(j, length=None):
    """Scalar sequence ``e_j`` (1-based ``j``), padded to ``length`` entries."""
    length = j if length is None else length
    values = np.zeros(length)
    values[j - 1] = 1.0
    return scalar_sequence(values)


def is_exact(s, kind):
    """Whether :func:`seq_norm` is exact (rather than an ascent estimate)."""
    if kind.tag != "wlp":
        return True
    return (
        s.dim == 1
        or len(s) == 0
        or s.space_p == INF
        or (s.space_p == 1.0 and s.dim <= MAX_CUBE_DIM)
        or (s.space_p == 2.0 and kind.p == 2.0)
    )


def _weak_objective(X, phi, p):
    return float(pnorm(X @ phi, p))


def _weak_ascent(X, p, r, phi):
    """Maximize the convex map ``phi -> ||X phi||_p`` over the unit r-ball.

    Each step jumps to the maximizer of the linearization, which for a convex
    objective never decreases it.
    """
    best = _weak_objective(X, phi, p)
    for _ in range(WEAK_SWEEPS):
        v = X @ phi
        if p == 1.0:
            g = X.T @ np.sign(v)
        else:
            g = X.T @ (np.sign(v) * np.abs(v) ** (p - 1.0))
        nxt = dual_maximizer(g, r)
        if nxt is None:
            break
        val = _weak_objective(X, nxt, p)
        if val <= best * (1 + 1e-13):
            best = max(best, val)
            break
        best, phi = val, nxt
    return best


def weak_norm(s, p, restarts=WEAK_RESTARTS, seed=0):
    """Weak p-norm ``sup_{||phi||* <= 1} (sum_j |phi(x_j)|^p)^(1/p)``.

    Returns ``(value, exact)``.  Exact cases: scalar sequences, the
    ``(l2, p=2)`` case through the top singular value, and ``l_inf`` or
    small ``l_1`` spaces whose dual balls are polytopes (the convex objective
    peaks at a vertex).  Otherwise a multi-start ascent gives a lower estimate.
    """
    X = s.entries
    if len(s) == 0:
        return 0.0, True
    if s.dim == 1:
        return float(pnorm(X[:, 0], p)), True
    if s.space_p == 2.0 and p == 2.0:
        return float(np.linalg.norm(X, ord=2)), True
    if s.space_p == INF:
        # dual ball is the l_1 ball, vertices +-e_i
        return float(np.max(pnorm(X, p, axis=0))), True
    if s.space_p == 1.0 and s.dim <= MAX_CUBE_DIM:
        # dual ball is the cube; phi and -phi give the same value
        best = 0.0
        for bits in range(1 << (s.dim - 1)):
            phi = np.array([1.0] + [-1.0 if (bits >> i) & 1 else 1.0
                                    for i in range(s.dim - 1)])
            best = max(best, _weak_objective(X, phi, p))
        return best, True
    r = dual_exponent(s.space_p)
    best = 0.0
    # start from the best entry direction, then random points of the dual sphere
    j = int(np.argmax(pnorm(X, s.space_p, axis=1)))
    starts = []
    phi0 = dual_maximizer(X[j], r)
    if phi0 is not None:
        starts.append(phi0)
    for k in range(restarts):
        gen = _rng.stream(seed, k)
        phi = normalize(gen.standard_normal(s.dim), r)
        if phi is not None:
            starts.append(phi)
    for phi in starts:
        best = max(best, _weak_ascent(X, p, r, phi))
    return best, False


def seq_norm(s, kind):
    """Norm of the finite sequence ``s`` in the class ``kind``.

    ``lp``: ``(sum_j ||x_j||^p)^(1/p)``; ``linf``: ``max_j ||x_j||``;
    ``wlp``: see :func:`weak_norm` (estimated in some cases, check
    :func:`is_exact`).
    """
    if len(s) == 0:
        return 0.0
    if kind.tag == "wlp":
        return weak_norm(s, kind.p)[0]
    entry_norms = pnorm(s.entries, s.space_p, axis=1)
    if kind.tag == "linf":
        return float(np.max(entry_norms))
    return float(pnorm(entry_norms, kind.p))


@dataclass
class CheckReport:
    """Outcome of a verification routine: ``violations`` empty means pass."""

    name: str
    checked: int = 0
    violations: list = field(default_factory=list)
    worst: float = 0.0
    details: dict = field(default_factory=dict)

    @property
    def ok(self):
        return not self.violations

    def to_dict(self):
        return {
            "name": self.name,
            "ok": self.ok,
            "checked": self.checked,
            "violations": self.violations,
            "worst": self.worst,
            "details": self.details,
        }


def check_class_axioms(kind, samples, unit_vectors=100):
    """Check the ``l_inf`` embedding on every sample and ``||e_j|| = 1``.

    The unit-vector check runs for ``j = 1..unit_vectors`` whenever the
    samples are scalar sequences.
    """
    samples = list(samples)
    if not samples:
        raise EmptySamples("need at least one sample sequence")
    report = CheckReport(f"class-axioms[{kind}]")
    for i, s in enumerate(samples):
        strong = seq_norm(s, kind)
        sup = seq_norm(s, LInf)
        report.checked += 1
        report.worst = max(report.worst, sup - strong)
        if strong < sup * (1 - 1e-12):
            report.violations.append(f"sample {i}: ||s|| = {strong} < sup norm {sup}")
    if all(s.dim == 1 for s in samples):
        for j in range(1, unit_vectors + 1):
            value = seq_norm(unit_vector(j), kind)
            report.checked += 1
            if value != 1.0:
                report.violations.append(f"||e_{j}|| = {value!r}")
    return report


def check_finitely_determined(s, kind, norm=seq_norm, tol=1e-12):
    """True iff truncation norms are nondecreasing and end at ``norm(s)``.

    ``norm`` is injectable so a deliberately broken implementation can be
    checked.  Weak norms in estimate mode are not guaranteed monotone.
    """
    values = [norm(s.prefix(k), kind) for k in range(1, len(s) + 1)]
    full = norm(s, kind)
    scale = max([abs(full)] + [abs(v) for v in values] + [1e-300])
    for a, b in zip(values, values[1:]):
        if b < a - tol * scale:
            return False
    if values and abs(values[-1] - full) > tol * scale:
        return False
    return True


def operator_norm(u, p, r):
    """``||u : (R^d, p) -> (R^k, r)||`` and whether the value is exact."""
    u = np.atleast_2d(np.asarray(u, dtype=np.float64))
    if p == 2.0 and r == 2.0:
        return float(np.linalg.norm(u, ord=2)), True
    if p == 1.0:
        # extreme points of the l_1 ball are +-e_j
        return float(np.max(pnorm(u, r, axis=0))), True
    if p == INF and r == INF:
        return float(np.max(np.sum(np.abs(u), axis=1))), True
    shape = BlockShape((1,), (u.shape[1],), u.shape[0])
    T = MultilinearMap.from_array(shape, u.T)
    return multilinear_norm_lower(T, NormSpec((p,), r), restarts=16).lower, False


def check_linear_stability(u, s, kind, trials=100, seed=0, target_p=None):
    """Check ``||(u x_j)||_gamma(F) <= ||u|| ||(x_j)||_gamma(E)``.

    ``s`` and ``trials`` random sequences of the same length and dimension are
    tested.  The supremum of the observed ratios is reported as
    ``details['sup_ratio']``; at finite truncation it can only approach
    ``||u||`` from below.
    """
    u = np.atleast_2d(np.asarray(u, dtype=np.float64))
    target_p = s.space_p if target_p is None else parse_p(target_p)
    op, exact = operator_norm(u, s.space_p, target_p)
    report = CheckReport(f"linear-stability[{kind}]")
    report.details.update(op_norm=op, op_norm_exact=exact, norms_exact=True)
    samples = [s]
    for t in range(trials):
        gen = _rng.stream(seed, t)
        samples.append(FiniteSequence(gen.standard_normal((max(len(s), 1), s.dim)),
                                      s.space_p, s.dim))
    sup_ratio = 0.0
    for i, x in enumerate(samples):
        image = FiniteSequence(x.entries @ u.T, target_p, u.shape[0])
        lhs = seq_norm(image, kind)
        rhs = seq_norm(x, kind)
        report.details["norms_exact"] &= is_exact(image, kind) and is_exact(x, kind)
        report.checked += 1
        if rhs > 0:
            ratio = lhs / rhs
            sup_ratio = max(sup_ratio, ratio)
            report.worst = max(report.worst, ratio - op)
        if lhs > op * rhs * (1 + 1e-12) + 1e-300:
            report.violations.append(f"sample {i}: {lhs} > {op} * {rhs}")
    report.details["sup_ratio"] = sup_ratio
    return report


def check_holder_product(samples, ps, p, tol=1e-12):
    """Generalized Hoelder: ``||prod_i lambda^(i)||_p <= prod_i ||lambda^(i)||_{p_i}``.

    ``samples`` is a list of samples, each a list of ``n`` scalar sequences
    of equal length, one per exponent in ``ps``.

    Raises
    ------
    ExponentMismatch
        If ``1/p`` differs from ``sum 1/p_i`` by more than ``1e-12``.
    """
    ps = [parse_p(q) for q in ps]
    p = parse_p(p)
    if abs(1.0 / p - sum(1.0 / q for q in ps)) > 1e-12:
        raise ExponentMismatch(f"1/{p} != sum of 1/p_i for {ps}")
    report = CheckReport("holder-product")
    for i, sample in enumerate(samples):
        arrays = [np.asarray(lam, dtype=np.float64).reshape(-1) for lam in sample]
        if len(arrays) != len(ps):
            raise ExponentMismatch(f"sample {i} has {len(arrays)} factors for {len(ps)} exponents")
        lhs = float(pnorm(np.prod(arrays, axis=0), p))
        rhs = math.prod(float(pnorm(a, q)) for a, q in zip(arrays, ps))
        report.checked += 1
        report.worst = max(report.worst, lhs - rhs)
        if lhs > rhs * (1 + tol):
            report.violations.append(f"sample {i}: {lhs} > {rhs}")
    return report
