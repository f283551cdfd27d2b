"""Randomized verification suites behind ``multipoly verify``.

Each suite returns a list of :class:`~multipoly.seqclass.CheckReport`; a run
passes when every report is ``ok``.  Trial ``t`` draws from
``stream(seed, t)`` so results do not depend on the thread count.
"""

import math

import numpy as np

from . import fixtures
from . import rng as _rng
from ._parallel import ordered_map
from .norms import NormSpec, grid_bracket, norm_chain_report
from .polymap import check, hat
from .seqclass import (
    CheckReport,
    ClassKind,
    FiniteSequence,
    check_class_axioms,
    check_finitely_determined,
    check_holder_product,
    scalar_sequence,
)
from .summing import (
    ClassTriple,
    check_ev_equivalence,
    check_symmetrization_stability,
    pi_chain_report,
    pi_lower_estimate,
)
from .symmetry import block_symmetrize, is_block_symmetric, is_fully_symmetric, polarize
from .tensor_core import BlockShape, MultilinearMap, eval_multilinear

SUITES = ("polarization", "symmetry", "norm-chain", "summing", "seqclass")

# (degrees, dims) pairs small enough for grid bracketing with k = 1, p = 2
BRACKET_CONFIGS = (
    ((2,), (2,)),
    ((3,), (2,)),
    ((1, 1), (2, 2)),
    ((2, 1), (2, 2)),
    ((2, 1), (2, 1)),
    ((2, 2), (2, 1)),
    ((1, 2), (2, 1)),
    ((3, 1), (2, 1)),
)


def random_tensor(gen, max_blocks=2, max_degree=3, max_dim=3, codomain_dim=1):
    """A random tensor with standard normal coefficients."""
    m = int(gen.integers(1, max_blocks + 1))
    degrees = tuple(int(n) for n in gen.integers(1, max_degree + 1, size=m))
    dims = tuple(int(d) for d in gen.integers(1, max_dim + 1, size=m))
    shape = BlockShape(degrees, dims, codomain_dim)
    return MultilinearMap.from_array(shape, gen.standard_normal(shape.array_shape))


def random_args(gen, shape):
    return [[gen.standard_normal(d) for _ in range(n)]
            for n, d in zip(shape.degrees, shape.dims)]


def _record(report, err, tol, label):
    report.checked += 1
    report.worst = max(report.worst, err)
    if not err <= tol:
        report.violations.append(f"{label}: {err:.3e} > {tol:g}")


def _merge(name, parts):
    report = CheckReport(name)
    for part in parts:
        report.checked += part.checked
        report.worst = max(report.worst, part.worst)
        report.violations.extend(part.violations)
    return report


def polarization_suite(trials=100, tol=None, seed=0, threads=1, args_per=10):
    """Polarizing ``hat(T)`` reproduces ``block_symmetrize(T)`` at any base point."""
    tol_eq = 1e-9 if tol is None else tol
    tol_base = 1e-8 if tol is None else tol

    def run(t):
        gen = _rng.stream(seed, t)
        T = random_tensor(gen)
        P, Ts = hat(T), block_symmetrize(T)
        eq, base = CheckReport("polarization"), CheckReport("base-point")
        arg_sets = [random_args(gen, T.shape) for _ in range(args_per)]
        expected = [eval_multilinear(Ts, a) for a in arg_sets]
        scale = max(float(np.max(np.abs(e))) for e in expected) or 1.0
        for r, (a, e) in enumerate(zip(arg_sets, expected)):
            got = polarize(P, None, a)
            _record(eq, float(np.max(np.abs(got - e))) / scale, tol_eq, f"trial {t} args {r}")
            values = np.array([polarize(P, [gen.standard_normal(d) for d in T.shape.dims], a)
                               for _ in range(args_per)])
            spread = float(np.max(np.ptp(values, axis=0))) / scale
            _record(base, spread, tol_base, f"trial {t} args {r}")
        return eq, base

    results = ordered_map(run, range(trials), threads)
    return [
        _merge("polarization-formula", [r[0] for r in results]),
        _merge("base-point-independence", [r[1] for r in results]),
    ]


def symmetry_suite(trials=100, tol=None, seed=0, threads=1, tensor=None):
    """Fixture classification plus projection properties of the symmetrization."""
    reports = []
    for name, expect_full in (("example1_block_symmetric", True),
                              ("example2_block_not_fully_symmetric", False)):
        T = fixtures.load(name).rep
        block = CheckReport(f"{name}: block-symmetric")
        block.checked = 1
        if not is_block_symmetric(T, tol=1e-12):
            block.violations.append("not block-symmetric")
        full = CheckReport(f"{name}: fully-symmetric "
                           + ("expected" if expect_full else "fails as expected"))
        full.checked = 1
        if is_fully_symmetric(T) != expect_full:
            full.violations.append(f"is_fully_symmetric returned {not expect_full}")
        reports += [block, full]

    tol = 1e-12 if tol is None else tol

    def run(t):
        gen = _rng.stream(seed, t)
        T = random_tensor(gen) if t > 0 or tensor is None else tensor
        Ts = block_symmetrize(T)
        scale = T.max_abs() or 1.0
        proj, meth, diag = CheckReport("p"), CheckReport("m"), CheckReport("d")
        _record(proj, float(np.max(np.abs(block_symmetrize(Ts).array - Ts.array))) / scale,
                tol, f"trial {t}")
        if not is_block_symmetric(Ts):
            proj.violations.append(f"trial {t}: output not block-symmetric")
        group = block_symmetrize(T, method="group")
        _record(meth, float(np.max(np.abs(group.array - Ts.array))) / scale, tol, f"trial {t}")
        xs = [gen.standard_normal((8, d)) for d in T.shape.dims]
        a, b = hat(T).eval_batch(xs), hat(Ts).eval_batch(xs)
        _record(diag, float(np.max(np.abs(a - b))) / (float(np.max(np.abs(a))) or 1.0),
                max(tol, 1e-12), f"trial {t}")
        return proj, meth, diag

    results = ordered_map(run, range(trials), threads)
    reports.append(_merge("symmetrize: idempotent projection", [r[0] for r in results]))
    reports.append(_merge("symmetrize: orbit = group average", [r[1] for r in results]))
    reports.append(_merge("symmetrize: diagonal preserved", [r[2] for r in results]))
    return reports


def bracketed_chain(P, slack=0.02, restarts=8, seed=0, max_width=0.01):
    """Grid brackets of ``||P||`` and ``||check(P)||`` compared with the ascent.

    Returns a dict with both brackets, the matched ascent report and the
    pass/fail flags of the chain at multiplicative ``1 + slack``.
    """
    spec = NormSpec.uniform(P.shape.m)
    bp = grid_bracket(P, spec)
    bc = grid_bracket(check(P), spec)
    chain = norm_chain_report(P, spec, restarts=restarts, seed=seed, slack=slack)
    c = chain.constant
    return {
        "poly": bp,
        "check": bc,
        "chain": chain,
        # certified: compare the far end of one bracket with the near end of the other
        "left": bp.upper <= (1 + slack) * bc.lower,
        "right": bc.upper <= (1 + slack) * c * bp.lower,
        "width_ok": bp.width <= max_width and bc.width <= max_width,
        "ascent_inside": (chain.poly_norm <= bp.upper * (1 + 1e-9)
                          and chain.check_norm <= bc.upper * (1 + 1e-9)),
    }


def random_bracket_instance(gen):
    degrees, dims = BRACKET_CONFIGS[int(gen.integers(len(BRACKET_CONFIGS)))]
    shape = BlockShape(degrees, dims, 1)
    return hat(MultilinearMap.from_array(shape, gen.standard_normal(shape.array_shape)))


def norm_chain_suite(trials=100, tol=None, seed=0, threads=1, bracketed=20, restarts=8):
    """Matched monotonicity on every run and the bracketed chain on a subset."""

    def run(t):
        gen = _rng.stream(seed, t)
        mono, chain = CheckReport("m"), CheckReport("c")
        if t < bracketed:
            res = bracketed_chain(random_bracket_instance(gen), seed=t, restarts=restarts)
            chain.checked = 1
            for key in ("left", "right", "width_ok", "ascent_inside"):
                if not res[key]:
                    chain.violations.append(f"trial {t}: {key} failed")
            chain.worst = max(res["poly"].width, res["check"].width)
            report = res["chain"]
        else:
            P = hat(random_tensor(gen, max_degree=2, codomain_dim=int(gen.integers(1, 3))))
            report = norm_chain_report(P, NormSpec.uniform(P.shape.m), restarts=restarts, seed=t)
        mono.checked = 1
        mono.worst = report.poly_norm / report.check_norm if report.check_norm > 0 else 0.0
        if not report.left_ok:
            mono.violations.append(f"trial {t}: {report.poly_norm} > {report.check_norm}")
        return mono, chain

    results = ordered_map(run, range(trials), threads)
    return [
        _merge("norm-chain: matched monotonicity", [r[0] for r in results]),
        _merge("norm-chain: bracketed chain (max bracket width)", [r[1] for r in results]),
    ]


def summing_suite(trials=100, tol=None, seed=0, threads=1, chain_trials=10):
    """Residual identities, the matched summing chain and the Cauchy-Schwarz fixture."""
    tol = 1e-10 if tol is None else tol
    fixture = fixtures.load_json("cauchy_schwarz_summing")
    P = fixtures.load("cauchy_schwarz_summing")
    est = pi_lower_estimate(P, ClassTriple.parse(fixture["classes"]), trials=200, seed=seed)
    cs = CheckReport("cauchy-schwarz: c_lower = 1")
    _record(cs, abs(est.c_lower - fixture["expected_c"]), 1e-6, "c_lower")

    triple = ClassTriple.parse("lp:2,lp:2->lp:1")

    def run(t):
        gen = _rng.stream(seed, t)
        T = random_tensor(gen, max_degree=2)
        ev = check_ev_equivalence(hat(T), samples=1, seed=t, tol=tol)
        sym = check_symmetrization_stability(T, samples=1, seed=t, tol=tol)
        chain = CheckReport("c")
        if T.shape.m == 2 and t < 2 * chain_trials:
            rep = pi_chain_report(hat(T), triple, trials=chain_trials, seed=t)
            chain.checked = rep.samples
            if not rep.left_ok:
                chain.violations.append(f"trial {t}: left side failed")
            if not rep.per_sample_polarization_ok:
                chain.violations.append(
                    f"trial {t}: {rep.polarization_violations} polarization violations")
        return ev, sym, chain

    results = ordered_map(run, range(trials), threads)
    return [
        cs,
        _merge("ev-equivalence", [r[0] for r in results]),
        _merge("symmetrization-stability", [r[1] for r in results]),
        _merge("pi-chain: matched samples", [r[2] for r in results]),
    ]


SCALAR_KINDS = ("lp:1", "lp:2", "lp:3", "wlp:1", "wlp:2", "linf")


def random_scalar_sequence(gen, max_length=12):
    length = int(gen.integers(1, max_length + 1))
    return scalar_sequence(gen.standard_normal(length) * math.exp(gen.normal()))


def seqclass_suite(trials=100, tol=None, seed=0, threads=1):
    """Class axioms, truncation monotonicity and generalized Hoelder."""
    tol = 1e-12 if tol is None else tol
    gen = _rng.stream(seed, 0)
    samples = [random_scalar_sequence(gen) for _ in range(trials)]
    reports = []
    trunc = CheckReport("truncation monotonicity")
    for name in SCALAR_KINDS:
        kind = ClassKind.parse(name)
        reports.append(check_class_axioms(kind, samples))
        for i, s in enumerate(samples):
            trunc.checked += 1
            if not check_finitely_determined(s, kind, tol=tol):
                trunc.violations.append(f"{name} sample {i}")
    reports.append(trunc)

    gen = _rng.stream(seed, 1)
    tuples = []
    for _ in range(trials):
        length = int(gen.integers(1, 13))
        tuples.append([gen.standard_normal(length) for _ in range(3)])
    reports.append(check_holder_product(tuples, (2.0, 3.0, 6.0), 1.0, tol=tol))
    vectors = [FiniteSequence(gen.standard_normal((4, 3)), 2.0, 3) for _ in range(10)]
    reports.append(check_class_axioms(ClassKind.parse("lp:2"), vectors))
    return reports


def run_suite(name, trials=100, tol=None, seed=0, threads=1, tensor=None):
    if name == "all":
        out = []
        for s in SUITES:
            out += run_suite(s, trials, tol, seed, threads, tensor)
        return out
    if name == "polarization":
        return polarization_suite(trials, tol, seed, threads)
    if name == "symmetry":
        return symmetry_suite(trials, tol, seed, threads, tensor)
    if name == "norm-chain":
        return norm_chain_suite(trials, tol, seed, threads)
    if name == "summing":
        return summing_suite(trials, tol, seed, threads)
    if name == "seqclass":
        return seqclass_suite(trials, tol, seed, threads)
    raise ValueError(f"unknown suite {name!r}")


__all__ = ["SUITES", "bracketed_chain", "random_tensor", "run_suite"]
