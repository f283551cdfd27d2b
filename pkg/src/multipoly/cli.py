"""Command-line front end: ``multipoly {gen,verify,norm,summing,report}``.

Global flags (``--seed``, ``--out``, ``--format``, ``--threads``) are accepted
before or after the command name.  Reports are written with sorted keys
through a temporary file and an atomic rename, so two runs with the same
flags produce byte-identical files.

Exit codes: 0 success, 1 a verification failed, 2 configuration error.
"""

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from pathlib import Path

from . import rng as _rng
from .errors import MultipolyError
from .norms import (
    NormSpec,
    multilinear_norm_lower,
    norm_chain_report,
    poly_norm_lower,
)
from .polymap import check
from .polymap import from_dict as poly_from_dict
from .summing import ClassTriple, pi_lower_estimate
from .suites import SUITES, run_suite
from .tensor_core import BlockShape, MultilinearMap
from .tensor_core import to_dict as tensor_to_dict


class ConfigError(Exception):
    pass


def _int_list(text):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _p_list(text):
    return [t.strip() for t in text.split(",") if t.strip()]


def _common_flags():
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, help="64-bit seed (default 0)")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("json", "csv"), help="output format (default json)")
    common.add_argument("--threads", type=int, help="worker threads (default 1)")
    return common


def build_parser():
    common = _common_flags()
    parser = argparse.ArgumentParser(prog="multipoly", parents=[common],
                                     description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="write a random tensor file")
    p.add_argument("--degrees", type=_int_list, required=True)
    p.add_argument("--dims", type=_int_list, required=True)
    p.add_argument("--codomain", type=int, default=1)

    p = sub.add_parser("verify", parents=[common], help="run verification suites")
    p.add_argument("--suite", default="all")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--in", dest="infile", help="extra tensor for the symmetry suite")

    p = sub.add_parser("norm", parents=[common], help="norm lower estimates")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--p", type=_p_list, default=None, help="block exponents, e.g. 2,2")
    p.add_argument("--q", default="2", help="codomain exponent")
    p.add_argument("--restarts", type=int, default=32)
    p.add_argument("--kind", choices=("poly", "multilinear", "chain"), default="poly")

    p = sub.add_parser("summing", parents=[common], help="summing-constant lower estimate")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--classes", default=None, help="e.g. lp:2,lp:2->lp:1")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--anchors", choices=("origin", "everywhere"), default="origin")
    p.add_argument("--max-length", type=int, default=8)
    p.add_argument("--p", type=_p_list, default=None)
    p.add_argument("--q", default="2")
    p.add_argument("--csv", dest="csv_out", help="also write the trial ratios here")

    p = sub.add_parser("report", parents=[common], help="aggregate JSON reports of a run")
    p.add_argument("--dir", required=True)
    return parser


# -- output ------------------------------------------------------------------

def write_atomic(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json_text(data):
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def _csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _kv_rows(data, prefix=""):
    rows = []
    for key in sorted(data):
        value = data[key]
        if isinstance(value, dict):
            rows += _kv_rows(value, f"{prefix}{key}.")
        elif isinstance(value, (list, tuple)):
            rows.append([prefix + key, json.dumps(value, sort_keys=True)])
        else:
            rows.append([prefix + key, repr(value) if isinstance(value, float) else value])
    return rows


def _emit(opts, text):
    if opts["out"]:
        write_atomic(opts["out"], text)
    else:
        sys.stdout.write(text)


def _load_poly(path):
    with open(path) as fh:
        data = json.load(fh)
    return poly_from_dict(data.get("tensor", data)), data


def _spec(shape, p, q):
    p = p or ["2"]
    if len(p) == 1:
        p = p * shape.m
    if len(p) != shape.m:
        raise ConfigError(f"--p lists {len(p)} exponents for {shape.m} blocks")
    return NormSpec(tuple(p), q)


# -- commands ----------------------------------------------------------------

def cmd_gen(args, opts):
    if opts["format"] != "json":
        raise ConfigError("gen writes tensor files; only --format json is supported")
    if any(n < 1 for n in args.degrees):
        raise ConfigError("degrees must be >= 1")
    shape = BlockShape(args.degrees, args.dims, args.codomain)
    gen = _rng.stream(opts["seed"])
    T = MultilinearMap.from_array(shape, gen.uniform(-1.0, 1.0, size=shape.array_shape))
    _emit(opts, _json_text(tensor_to_dict(T)))
    return 0


def cmd_verify(args, opts):
    if args.suite not in SUITES + ("all",):
        raise ConfigError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)}, all")
    if args.trials < 1:
        raise ConfigError("--trials must be >= 1")
    tensor = _load_poly(args.infile)[0].rep if args.infile else None
    reports = run_suite(args.suite, args.trials, args.tol, opts["seed"], opts["threads"], tensor)
    ok = all(r.ok for r in reports)
    if opts["format"] == "csv":
        rows = [[r.name, "pass" if r.ok else "fail", r.checked, repr(float(r.worst))]
                for r in reports]
        _emit(opts, _csv_text(["check", "status", "checked", "worst"], rows))
    else:
        _emit(opts, _json_text({
            "command": "verify",
            "suite": args.suite,
            "seed": opts["seed"],
            "trials": args.trials,
            "ok": ok,
            "checks": [r.to_dict() for r in reports],
        }))
    for r in reports:
        print(f"{'pass' if r.ok else 'FAIL'}  {r.name}  (worst {r.worst:.3e})", file=sys.stderr)
    return 0 if ok else 1


def cmd_norm(args, opts):
    P, _ = _load_poly(args.infile)
    spec = _spec(P.shape, args.p, args.q)
    seed, threads = opts["seed"], opts["threads"]
    if args.kind == "poly":
        data = poly_norm_lower(P, spec, args.restarts, seed, threads=threads).to_dict()
    elif args.kind == "multilinear":
        data = multilinear_norm_lower(check(P), spec, args.restarts, seed,
                                      threads=threads).to_dict()
    else:
        data = norm_chain_report(P, spec, args.restarts, seed, threads=threads).to_dict()
    data.update(command="norm", kind=args.kind, seed=seed, spec=spec.to_dict())
    if opts["format"] == "csv":
        _emit(opts, _csv_text(["key", "value"], _kv_rows(data)))
    else:
        _emit(opts, _json_text(data))
    return 0


def cmd_summing(args, opts):
    P, raw = _load_poly(args.infile)
    classes = args.classes or raw.get("classes")
    if not classes:
        raise ConfigError("--classes is required for plain tensor files")
    triple = ClassTriple.parse(classes)
    spec = _spec(P.shape, args.p, args.q)
    report = pi_lower_estimate(P, triple, trials=args.trials, seed=opts["seed"],
                               anchor_mode=args.anchors, spec=spec,
                               max_length=args.max_length, threads=opts["threads"])
    data = report.to_dict()
    data.update(command="summing", seed=opts["seed"], classes=str(triple))
    if args.csv_out:
        write_atomic(args.csv_out, report.ratios_csv())
    if opts["format"] == "csv":
        _emit(opts, report.ratios_csv())
    else:
        _emit(opts, _json_text(data))
    return 0


REPORT_HEADER = ["file", "command", "key", "value"]


def cmd_report(args, opts):
    directory = Path(args.dir)
    if not directory.is_dir():
        raise ConfigError(f"{directory} is not a directory")
    entries = []
    for path in sorted(directory.glob("*.json")):
        with open(path) as fh:
            data = json.load(fh)
        if isinstance(data, dict):
            entries.append((path.name, data))
    if opts["format"] == "csv":
        rows = []
        for name, data in entries:
            command = data.get("command", "tensor" if "coeffs" in data else "")
            scalars = {k: v for k, v in data.items()
                       if k != "command" and isinstance(v, (int, float, str, bool))}
            rows += [[name, command] + row for row in _kv_rows(scalars)]
        _emit(opts, _csv_text(REPORT_HEADER, rows))
    else:
        _emit(opts, _json_text({"command": "report",
                                "reports": [{"file": n, "data": d} for n, d in entries]}))
    return 0


COMMANDS = {
    "gen": cmd_gen,
    "verify": cmd_verify,
    "norm": cmd_norm,
    "summing": cmd_summing,
    "report": cmd_report,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    opts = {
        "seed": getattr(args, "seed", 0),
        "out": getattr(args, "out", None),
        "format": getattr(args, "format", "json"),
        "threads": getattr(args, "threads", 1),
    }
    try:
        _rng.stream(opts["seed"])
        if opts["threads"] < 1:
            raise ConfigError("--threads must be >= 1")
        return COMMANDS[args.command](args, opts)
    except (ConfigError, MultipolyError, ValueError, KeyError, OSError) as exc:
        print(f"multipoly {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
