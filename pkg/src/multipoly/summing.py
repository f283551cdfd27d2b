"""Everywhere absolutely summing multipolynomials at finite truncation.

For an anchor ``a = (a_1, ..., a_m)`` and sequences ``(x_j^(i))_j`` the
residual sequence is ``P(a_1 + x_j^(1), ..., a_m + x_j^(m)) - P(a)``.  The
summing constant is the least ``C`` with

    ||residual||_out <= C * prod_i (||a_i|| + ||(x_j^(i))_j||_in_i)^n_i

and :func:`pi_lower_estimate` bounds it from below by the largest ratio seen
over random instances.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import rng as _rng
from ._lp import pnorm
from ._parallel import ordered_map
from .errors import DimensionMismatch, GroupTooLarge, LengthMismatch
from .norms import NormSpec, chain_constant
from .polymap import check
from .seqclass import CheckReport, ClassKind, FiniteSequence, is_exact, seq_norm
from .symmetry import (
    DEFAULT_GROUP_CAP,
    all_block_permutations,
    block_symmetrize,
    group_order,
    polarization_constant,
    sign_patterns,
)
from .tensor_core import contract

DEFAULT_TRIALS = 200
MAX_LENGTH = 8


@dataclass(frozen=True)
class ClassTriple:
    """Input classes (one per block) and the output class."""

    input_kinds: tuple
    output_kind: ClassKind

    def __post_init__(self):
        object.__setattr__(self, "input_kinds", tuple(self.input_kinds))

    @classmethod
    def parse(cls, text):
        """Parse ``"lp:2,lp:2->lp:1"``."""
        left, sep, right = text.partition("->")
        if not sep:
            raise ValueError(f"class triple {text!r} needs '->'")
        inputs = tuple(ClassKind.parse(t) for t in left.split(","))
        return cls(inputs, ClassKind.parse(right))

    def __str__(self):
        return ",".join(str(k) for k in self.input_kinds) + "->" + str(self.output_kind)

    def check_shape(self, shape):
        if len(self.input_kinds) != shape.m:
            raise DimensionMismatch(
                f"{len(self.input_kinds)} input classes for {shape.m} blocks"
            )


@dataclass(eq=False)
class SummingInstance:
    P: object
    triple: ClassTriple
    anchor: list
    sequences: list

    def to_dict(self):
        return {
            "classes": str(self.triple),
            "anchor": [[float(c) for c in a] for a in self.anchor],
            "sequences": [s.to_dict() for s in self.sequences],
        }


@dataclass
class SummingReport:
    ratio: float
    best_instance: SummingInstance
    c_lower: float
    trials: int
    estimate_flags: list = field(default_factory=list)
    ratios: list = field(default_factory=list, repr=False)
    refinement_steps: int = 0
    anchor_mode: str = "origin"
    max_length: int = MAX_LENGTH

    def to_dict(self):
        return {
            "ratio": self.ratio,
            "c_lower": self.c_lower,
            "trials": self.trials,
            "refinement_steps": self.refinement_steps,
            "anchor_mode": self.anchor_mode,
            "max_length": self.max_length,
            "estimate_flags": list(self.estimate_flags),
            "best_instance": self.best_instance.to_dict() if self.best_instance else None,
        }

    def ratios_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["step", "phase", "ratio"])
        for i, r in enumerate(self.ratios):
            phase = "trial" if i < self.trials else "refine"
            writer.writerow([i, phase, repr(float(r))])
        return buf.getvalue()


def _check_sequences(shape, sequences):
    if len(sequences) != shape.m:
        raise DimensionMismatch(f"need {shape.m} sequences, got {len(sequences)}")
    lengths = {len(s) for s in sequences}
    if len(lengths) > 1:
        raise LengthMismatch(f"sequence lengths differ: {sorted(lengths)}")
    for i, (s, d) in enumerate(zip(sequences, shape.dims)):
        if s.dim != d:
            raise DimensionMismatch(f"sequence {i} lives in R^{s.dim}, block needs R^{d}")
    return lengths.pop() if lengths else 0


def induced_map(P, sequences, codomain_p=2.0):
    """The sequence ``(P(x_j^(1), ..., x_j^(m)))_j`` in ``R^k``."""
    length = _check_sequences(P.shape, sequences)
    if length == 0:
        return FiniteSequence(np.zeros((0, P.shape.codomain_dim)), codomain_p,
                              P.shape.codomain_dim)
    values = P.eval_batch([s.entries for s in sequences])
    return FiniteSequence(values, codomain_p, P.shape.codomain_dim)


def shifted_residual(P, anchor, sequences, codomain_p=2.0):
    """The sequence ``P(a + x_j) - P(a)``; a zero anchor gives :func:`induced_map`."""
    shape = P.shape
    length = _check_sequences(shape, sequences)
    anchor = [np.asarray(a, dtype=np.float64).reshape(-1) for a in anchor]
    if len(anchor) != shape.m or any(a.size != d for a, d in zip(anchor, shape.dims)):
        raise DimensionMismatch("anchor does not match the block dimensions")
    k = shape.codomain_dim
    if length == 0:
        return FiniteSequence(np.zeros((0, k)), codomain_p, k)
    shifted = P.eval_batch([a[None, :] + s.entries for a, s in zip(anchor, sequences)])
    base = P.eval_batch([a[None, :] for a in anchor])[0]
    return FiniteSequence(shifted - base, codomain_p, k)


def _flags_for(s, kind, label):
    return [] if is_exact(s, kind) else [f"{label}: {kind} on l_{s.space_p:g}^{s.dim} estimated"]


def _poly_ratio(P, triple, spec, anchor, sequences):
    residual = shifted_residual(P, anchor, sequences, spec.codomain_q)
    num = seq_norm(residual, triple.output_kind)
    flags = _flags_for(residual, triple.output_kind, "output")
    den = 1.0
    for i, (a, s, kind, n) in enumerate(
        zip(anchor, sequences, triple.input_kinds, P.shape.degrees)
    ):
        den *= (float(pnorm(a, spec.domain_p[i])) + seq_norm(s, kind)) ** n
        flags += _flags_for(s, kind, f"input {i}")
    ratio = num / den if den > 0 else 0.0
    return ratio, flags


def _draw(gen, shape, spec, anchor_mode, max_length):
    length = int(gen.integers(1, max_length + 1))
    anchor, sequences = [], []
    for d, p in zip(shape.dims, spec.domain_p):
        if anchor_mode == "everywhere":
            anchor.append(gen.standard_normal(d) * math.exp(gen.normal()))
        else:
            anchor.append(np.zeros(d))
        entries = gen.standard_normal((length, d)) * math.exp(gen.normal())
        sequences.append(FiniteSequence(entries, p, d))
    return anchor, sequences


def _default_spec(shape, spec):
    return NormSpec.uniform(shape.m) if spec is None else spec


def pi_lower_estimate(P, triple, trials=DEFAULT_TRIALS, seed=0, anchor_mode="origin",
                      spec=None, max_length=MAX_LENGTH, refine=True, threads=1):
    """Lower estimate of the summing constant of ``P``.

    Parameters
    ----------
    P : Multipolynomial
    triple : ClassTriple
    trials : int
        Random instances; trial ``t`` draws from ``stream(seed, t)``.
        Sequence lengths are uniform on ``1..max_length``.
    anchor_mode : {"origin", "everywhere"}
        ``"origin"`` fixes ``a = 0``; ``"everywhere"`` draws random anchors.
    spec : NormSpec, optional
        Norms of the block spaces and of the codomain (default: all l_2).
    refine : bool
        Follow the trials with ``2 * trials`` accept-if-better perturbation
        steps around the best instance.

    Returns
    -------
    SummingReport
        ``ratios`` lists the trial ratios in trial order followed by the
        ratio of every refinement step, so ``c_lower == max(ratios)``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if anchor_mode not in ("origin", "everywhere"):
        raise ValueError(f"anchor_mode must be 'origin' or 'everywhere', got {anchor_mode!r}")
    shape = P.shape
    triple.check_shape(shape)
    spec = _default_spec(shape, spec)

    def run(t):
        anchor, sequences = _draw(_rng.stream(seed, t), shape, spec, anchor_mode, max_length)
        ratio, flags = _poly_ratio(P, triple, spec, anchor, sequences)
        return ratio, flags, anchor, sequences

    results = ordered_map(run, range(trials), threads)
    flags = sorted({f for r in results for f in r[1]})
    best = 0
    for i, r in enumerate(results):
        if r[0] > results[best][0]:
            best = i
    c, _, anchor, sequences = results[best]

    ratios = [r[0] for r in results]
    steps = 0
    if refine and c > 0:
        gen = _rng.stream(seed, trials, 1)
        sigma = 0.1
        for _ in range(2 * trials):
            steps += 1
            new_anchor = [
                a + sigma * (float(pnorm(a, 2)) + 1.0) * gen.standard_normal(a.size)
                if anchor_mode == "everywhere" else a
                for a in anchor
            ]
            new_seqs = []
            for s in sequences:
                scale = float(np.max(np.abs(s.entries))) or 1.0
                noise = sigma * scale * gen.standard_normal(s.entries.shape)
                new_seqs.append(FiniteSequence(s.entries + noise, s.space_p, s.dim))
            ratio, new_flags = _poly_ratio(P, triple, spec, new_anchor, new_seqs)
            ratios.append(ratio)
            if ratio > c:
                c, anchor, sequences = ratio, new_anchor, new_seqs
                flags = sorted(set(flags) | set(new_flags))
                sigma = min(1.0, 2 * sigma)
            else:
                sigma = max(1e-6, 0.5 * sigma)

    return SummingReport(
        ratio=c,
        best_instance=SummingInstance(P, triple, anchor, sequences),
        c_lower=c,
        trials=trials,
        estimate_flags=flags,
        ratios=ratios,
        refinement_steps=steps,
        anchor_mode=anchor_mode,
        max_length=max_length,
    )


# -- structural identities ---------------------------------------------------

def _random_samples(shape, spec, count, seed, anchor_mode="everywhere", max_length=MAX_LENGTH):
    return [_draw(_rng.stream(seed, t), shape, spec, anchor_mode, max_length)
            for t in range(count)]


def _multilinear_residual(T, anchors, seqs):
    """``T(a + x_j) - T(a)`` with one anchor and one entry array per slot."""
    shifted = contract(T.array, [a[None, :] + x for a, x in zip(anchors, seqs)])
    base = contract(T.array, [a[None, :] for a in anchors])[0]
    return shifted - base, shifted, base


def check_ev_equivalence(P, samples=20, seed=0, tol=1e-10, spec=None):
    """Compare the residual of ``P`` with the diagonal residual of ``check(P)``.

    ``samples`` is either a count of random ``(anchor, sequences)`` pairs or
    an explicit list of them.  Errors are relative to the largest value
    entering the sample's residuals.
    """
    shape = P.shape
    spec = _default_spec(shape, spec)
    if isinstance(samples, int):
        samples = _random_samples(shape, spec, samples, seed)
    Pc = check(P)
    report = CheckReport("ev-equivalence")
    for i, (anchor, sequences) in enumerate(samples):
        anchor = [np.asarray(a, dtype=np.float64).reshape(-1) for a in anchor]
        lhs = shifted_residual(P, anchor, sequences).entries
        slots_a = [anchor[b] for b in shape.slot_blocks]
        slots_x = [sequences[b].entries for b in shape.slot_blocks]
        rhs, shifted, base = _multilinear_residual(Pc, slots_a, slots_x)
        scale = max(float(np.max(np.abs(shifted), initial=0.0)),
                    float(np.max(np.abs(base), initial=0.0)), 1e-300)
        err = float(np.max(np.abs(lhs - rhs), initial=0.0)) / scale
        report.checked += 1
        report.worst = max(report.worst, err)
        if err > tol:
            report.violations.append(f"sample {i}: relative error {err:.3e}")
    return report


def _random_slot_samples(shape, count, seed, max_length=MAX_LENGTH):
    out = []
    for t in range(count):
        gen = _rng.stream(seed, t)
        length = int(gen.integers(1, max_length + 1))
        anchors = [gen.standard_normal(d) for d in shape.slot_dims]
        seqs = [gen.standard_normal((length, d)) for d in shape.slot_dims]
        out.append((anchors, seqs))
    return out


def _permuted_slots(shape, perms, items):
    out = []
    for offset, perm in zip(shape.block_offsets, perms):
        out.extend(items[offset + p] for p in perm)
    return out


def check_symmetrization_stability(T, samples=20, seed=0, tol=1e-10,
                                   group_cap=DEFAULT_GROUP_CAP):
    """Residual of ``T_s`` versus the average of permuted residuals of ``T``.

    Each sample holds one anchor and one sequence (an ``(L, d)`` array) per
    slot.  The right-hand side evaluates ``T`` itself at every within-block
    permutation of anchors and sequences and averages, without forming
    ``T_s``.
    """
    shape = T.shape
    order = group_order(shape.degrees)
    if order > group_cap:
        raise GroupTooLarge(f"group has {order} elements, cap is {group_cap}")
    if isinstance(samples, int):
        samples = _random_slot_samples(shape, samples, seed)
    Ts = block_symmetrize(T)
    report = CheckReport("symmetrization-stability")
    for i, (anchors, seqs) in enumerate(samples):
        anchors = [np.asarray(a, dtype=np.float64) for a in anchors]
        seqs = [np.asarray(x, dtype=np.float64) for x in seqs]
        lhs, shifted, base = _multilinear_residual(Ts, anchors, seqs)
        total = np.zeros_like(lhs)
        scale = max(float(np.max(np.abs(shifted), initial=0.0)),
                    float(np.max(np.abs(base), initial=0.0)), 1e-300)
        for perms in all_block_permutations(shape.degrees):
            res, sh, b = _multilinear_residual(
                T, _permuted_slots(shape, perms, anchors), _permuted_slots(shape, perms, seqs)
            )
            total += res
            scale = max(scale, float(np.max(np.abs(sh), initial=0.0)),
                        float(np.max(np.abs(b), initial=0.0)))
        err = float(np.max(np.abs(lhs - total / order), initial=0.0)) / scale
        report.checked += 1
        report.worst = max(report.worst, err)
        if err > tol:
            report.violations.append(f"sample {i}: relative error {err:.3e}")
    return report


@dataclass
class PiChainReport:
    pi_poly: float
    pi_check: float
    constant: float
    left_ok: bool
    per_sample_polarization_ok: bool
    samples: int = 0
    polarization_violations: int = 0
    estimate_flags: list = field(default_factory=list)

    def to_dict(self):
        return {
            "pi_poly": self.pi_poly,
            "pi_check": self.pi_check,
            "constant": self.constant,
            "left_ok": self.left_ok,
            "per_sample_polarization_ok": self.per_sample_polarization_ok,
            "samples": self.samples,
            "polarization_violations": self.polarization_violations,
            "estimate_flags": list(self.estimate_flags),
        }


def _slot_ratio(Pc, triple, spec, anchors, seqs):
    """Multilinear summing ratio with one anchor and sequence per slot."""
    shape = Pc.shape
    res, _, _ = _multilinear_residual(Pc, anchors, [s.entries for s in seqs])
    residual = FiniteSequence(res, spec.codomain_q, shape.codomain_dim)
    num = seq_norm(residual, triple.output_kind)
    den = 1.0
    for s, b in enumerate(shape.slot_blocks):
        den *= float(pnorm(anchors[s], spec.domain_p[b])) + seq_norm(
            seqs[s], triple.input_kinds[b])
    return (num / den if den > 0 else 0.0), num, residual


def _polarized_residual_sum(P, triple, spec, anchors, seqs):
    """``A * sum_eps ||residual of P at the eps-combined anchor and sequence||``."""
    shape = P.shape
    n = shape.n_slots
    signs = sign_patterns(0, 1 << n, n)
    total = []
    for eps in signs:
        anchor, sequences = [], []
        for i, (o, deg) in enumerate(zip(shape.block_offsets, shape.degrees)):
            w = eps[o:o + deg]
            anchor.append(sum(w[k] * anchors[o + k] for k in range(deg)))
            entries = sum(w[k] * seqs[o + k].entries for k in range(deg))
            sequences.append(FiniteSequence(entries, spec.domain_p[i], shape.dims[i]))
        residual = shifted_residual(P, anchor, sequences, spec.codomain_q)
        total.append(seq_norm(residual, triple.output_kind))
    return polarization_constant(shape.degrees) * math.fsum(total)


def pi_chain_report(P, triple, trials=DEFAULT_TRIALS, seed=0, spec=None,
                    max_length=MAX_LENGTH, threads=1):
    """Matched estimates of the summing constants of ``P`` and ``check(P)``.

    Every polynomial sample (anchors drawn everywhere) is lifted to the
    multilinear side by repeating its block anchor and sequence across the
    block's slots; one independent slot-wise sample is added per trial.  The
    lift reproduces the polynomial ratio, so ``pi_poly <= pi_check`` holds by
    construction (``left_ok`` allows ``1 + 1e-9`` for rounding).  For every
    multilinear sample, the residual norm is also checked against the
    polarization bound ``A * sum_eps ||residual of P||``.
    """
    shape = P.shape
    triple.check_shape(shape)
    spec = _default_spec(shape, spec)
    Pc = check(P)

    def run(t):
        anchor, sequences = _draw(_rng.stream(seed, t), shape, spec, "everywhere", max_length)
        ratio, flags = _poly_ratio(P, triple, spec, anchor, sequences)
        lifted = (
            [anchor[b] for b in shape.slot_blocks],
            [sequences[b] for b in shape.slot_blocks],
        )
        gen = _rng.stream(seed, t, 1)
        length = int(gen.integers(1, max_length + 1))
        free = (
            [gen.standard_normal(d) for d in shape.slot_dims],
            [FiniteSequence(gen.standard_normal((length, d)), spec.domain_p[b], d)
             for d, b in zip(shape.slot_dims, shape.slot_blocks)],
        )
        check_ratios, violations = [], 0
        for anchors, seqs in (lifted, free):
            r, num, residual = _slot_ratio(Pc, triple, spec, anchors, seqs)
            check_ratios.append(r)
            flags = flags + _flags_for(residual, triple.output_kind, "output")
            bound = _polarized_residual_sum(P, triple, spec, anchors, seqs)
            if num > bound * (1 + 1e-9) + 1e-300:
                violations += 1
        return ratio, max(check_ratios), violations, flags

    results = ordered_map(run, range(trials), threads)
    pi_poly = max(r[0] for r in results)
    pi_check = max(r[1] for r in results)
    violations = sum(r[2] for r in results)
    return PiChainReport(
        pi_poly=pi_poly,
        pi_check=pi_check,
        constant=chain_constant(shape.degrees),
        left_ok=pi_poly <= pi_check * (1 + 1e-9),
        per_sample_polarization_ok=violations == 0,
        samples=2 * trials,
        polarization_violations=violations,
        estimate_flags=sorted({f for r in results for f in r[3]}),
    )
