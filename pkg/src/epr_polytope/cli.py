"""Command-line entry point.

Exit codes: 0 success / inside / pass, 2 outside / violated,
3 simulation mismatch, 64 input error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .correlation import (
    VectorFormatError,
    bell_restriction,
    conditionalize,
    dumps_vector,
    flatten,
    loads_vector,
    validate,
)
from .polytope import (
    CANONICAL_CH,
    EnumerationBoundError,
    MAX_EVENTS,
    dumps_report,
    evaluate_ch,
    membership,
    model_from_dict,
    world_to_bits,
)
from .quantum import (
    CONVENTIONS,
    DEFAULT_DENOMINATOR_BOUND,
    EprScenario,
    JointLaw,
    QuantumSetup,
    as_angle,
    build_epr_vector,
    loads_scenario,
    oracle_table,
    trace_oracle,
)
from .simulator import compare, sample, simulate, summary_to_dict, write_trace

EXIT_OK = 0
EXIT_OUTSIDE = 2
EXIT_MISMATCH = 3
EXIT_USAGE = 64

OUTDIR_ENV = "EPR_POLYTOPE_OUTDIR"
TRACE_WARN = 10**5
ORACLE_TOL = 1e-12

log = logging.getLogger("epr_polytope")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read(path: str) -> tuple[str, dict]:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    return data.decode("utf-8"), {"path": str(path), "sha256": hashlib.sha256(data).hexdigest()}


def _output_path(args, default_name: str) -> Path:
    if args.output:
        return Path(args.output)
    return Path(os.environ.get(OUTDIR_ENV, ".")) / default_name


def _write(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from exc


def _fractions(text: str, count: int, what: str) -> list[Fraction]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != count:
        raise UsageError(f"{what} needs {count} comma-separated values, got {text!r}")
    try:
        return [Fraction(p) for p in parts]
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad {what} value in {text!r}") from exc


def _meta(inputs: dict, **extra) -> dict:
    return {"tool": f"epr-polytope {__version__}", "inputs": inputs, **extra}


def _load_vector(args, default):
    if args.vector:
        text, info = _read(args.vector)
        return loads_vector(text), {"vector": info}
    return default(), {"vector": "built-in default scenario"}


def _table(rows, headers) -> str:
    rows = [[str(c) for c in r] for r in rows]
    widths = [max(len(h), *(len(r[k]) for r in rows)) if rows else len(h) for k, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in rows]
    return "\n".join(lines)


# subcommands


def cmd_epr_vector(args) -> int:
    if args.scenario:
        text, _ = _read(args.scenario)
        s = loads_scenario(text)
    else:
        s = EprScenario()
    angles = _fractions(args.angles, 4, "--angles") if args.angles else s.angles
    switch = _fractions(args.switch, 4, "--switch") if args.switch else s.switch_distribution
    try:
        s = EprScenario(
            tuple(angles),
            tuple(switch),
            args.convention or s.convention,
            args.denominator_bound or s.denominator_bound,
        )
    except ValueError as exc:
        raise UsageError(f"malformed scenario: {exc}") from exc
    v = build_epr_vector(s)
    text = dumps_vector(v)
    path = _output_path(args, "epr_vector.json")
    _write(path, text)
    if args.format == "json":
        sys.stdout.write(text)
    else:
        print(_table(zip(v.coordinate_labels(), map(str, flatten(v))), ["coordinate", "p"]))
        print(f"\n{len(flatten(v))} coordinates written to {path}")
    return EXIT_OK


def cmd_membership(args) -> int:
    p, inputs = _load_vector(args, build_epr_vector)
    if args.conditional:
        p = conditionalize(p)
    report = validate(p, args.validation)
    if not report.ok:
        raise UsageError("validation failed: " + "; ".join(report.messages()))
    try:
        result = membership(p, max_events=args.max_events)
    except EnumerationBoundError as exc:
        raise UsageError(str(exc)) from exc
    text = dumps_report(result, meta=_meta(inputs))
    path = _output_path(args, "membership.json")
    _write(path, text)
    if args.format == "json":
        sys.stdout.write(text)
    elif result.inside:
        print(f"inside: hidden-variable model with {len(result.model)} worlds")
        print(f"world bits in event order {' '.join(p.space.labels)}")
        print(_table([(world_to_bits(w), str(q)) for w, q in result.model.atoms], ["world", "weight"]))
    else:
        cert = result.certificate
        terms = [(label, c) for label, c in zip(p.coordinate_labels(), cert.coefficients) if c]
        print("outside: separating inequality")
        print(_table(terms, ["coordinate", "coefficient"]))
        print(f"bound {cert.bound}, violation {cert.violation(p)}")
    if args.format != "json":
        print(f"report written to {path}")
    return EXIT_OK if result.inside else EXIT_OUTSIDE


def _default_conditional():
    return conditionalize(build_epr_vector())


def cmd_ch(args) -> int:
    p, inputs = _load_vector(args, _default_conditional)
    if args.conditional:
        p = conditionalize(p)
    elif args.restrict:
        p = bell_restriction(p)
    try:
        results = evaluate_ch(p)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    violated = any(r.violated for r in results)
    if args.format == "json":
        doc = {
            "canonical": str(results[CANONICAL_CH].value),
            "violated": violated,
            "forms": [{"name": r.form.name, "value": str(r.value), "violated": r.violated} for r in results],
            "meta": _meta(inputs),
        }
        text = json.dumps(doc, indent=2) + "\n"
        if args.output:
            _write(Path(args.output), text)
        sys.stdout.write(text)
    else:
        rows = [(r.form.name, str(r.value), "VIOLATED" if r.violated else "ok") for r in results]
        print(_table(rows, ["form", "value", "in [-1, 0]"]))
        print(f"\ncanonical CH value {results[CANONICAL_CH].value}")
    return EXIT_OUTSIDE if violated else EXIT_OK


def cmd_simulate(args) -> int:
    if args.samples < 1:
        raise UsageError("--samples must be at least 1")
    if args.shards < 1:
        raise UsageError("--shards must be at least 1")
    if args.target:
        text, info = _read(args.target)
        target = loads_vector(text)
        inputs = {"target": info}
    else:
        target = build_epr_vector()
        inputs = {"target": "built-in default scenario"}
    if args.model:
        text, info = _read(args.model)
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"malformed model file: {exc}") from exc
        model = model_from_dict(doc, target.space, target.pair_set)
        inputs["model"] = info
    else:
        result = membership(target)
        if not result.inside:
            raise UsageError("target vector has no hidden-variable model; pass --model")
        model = result.model
        inputs["model"] = "extracted from target"
    if model.space.labels != target.space.labels or model.pair_set != target.pair_set:
        raise UsageError("model and target have different event spaces or pair sets")

    summary = simulate(model, args.samples, args.seed, args.shards)
    comparison = compare(summary, target, args.z_threshold)
    doc = summary_to_dict(summary, args.seed, comparison)
    doc["meta"] = _meta(inputs, shards=args.shards)
    text = json.dumps(doc, indent=2) + "\n"
    path = _output_path(args, "simulation.json")
    _write(path, text)
    if args.trace:
        if args.samples > TRACE_WARN:
            log.warning("per-trial trace for %d trials will be large", args.samples)
        trace_path = path.with_suffix(".trace.jsonl")
        with open(trace_path, "w", encoding="utf-8") as fh:
            write_trace(sample(model, args.samples, args.seed), fh)
    if args.format == "json":
        sys.stdout.write(text)
    else:
        rows = [
            (e.coordinate, str(e.target), f"{float(e.empirical):.6f}", f"{e.z:.2f}", "FAIL" if e.flagged else "ok")
            for e in comparison.entries
        ]
        print(_table(rows, ["coordinate", "target", "empirical", "z", "status"]))
        cond = summary.conditionals()
        print("\nconditional frequencies")
        for x, val in cond["singles"].items():
            print(f"  p({x}|setting) = {'n/a' if val is None else f'{float(val):.6f}'}")
        for (x, y), val in cond["pairs"].items():
            print(f"  p({x}&{y}|settings) = {'n/a' if val is None else f'{float(val):.6f}'}")
        print(f"\n{'pass' if comparison.passed else 'FAIL'} at {args.z_threshold} sigma; report written to {path}")
    return EXIT_OK if comparison.passed else EXIT_MISMATCH


def cmd_oracle(args) -> int:
    setup = QuantumSetup.singlet()
    rows = []
    if args.theta:
        for part in args.theta.split(","):
            try:
                theta = as_angle(part)
            except (ValueError, ZeroDivisionError) as exc:
                raise UsageError(f"bad angle {part!r}") from exc
            rows.append(
                {
                    "pair": f"theta={part.strip()}",
                    "theta": theta,
                    "oracle": trace_oracle(setup, 0, theta),
                    "paper": JointLaw("paper").value(theta),
                    "standard": JointLaw("standard").value(theta),
                }
            )
    else:
        angles = _fractions(args.angles, 4, "--angles") if args.angles else EprScenario().angles
        rows = oracle_table(angles, setup)
    ok = all(abs(r["oracle"] - float(r["standard"])) <= ORACLE_TOL for r in rows)
    if args.format == "json":
        doc = {
            "rows": [
                {
                    "pair": r["pair"],
                    "theta": str(r["theta"]),
                    "oracle": r["oracle"],
                    "paper": str(r["paper"]),
                    "standard": str(r["standard"]),
                }
                for r in rows
            ],
            "oracle_matches_standard": ok,
        }
        sys.stdout.write(json.dumps(doc, indent=2) + "\n")
    else:
        table = [
            (r["pair"], str(r["theta"]), f"{r['oracle']:.12f}", str(r["paper"]), str(r["standard"]))
            for r in rows
        ]
        print(_table(table, ["directions", "angle", "tr(W A B)", "1/2 sin^2(t)", "1/2 sin^2(t/2)"]))
    return EXIT_OK if ok else EXIT_MISMATCH


def _count(text: str) -> int:
    """Integer that may be written as 1e6."""
    try:
        value = Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value.denominator != 1:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(value)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "table"), default="table")
    common.add_argument("-o", "--output", help=f"output file (default: ${OUTDIR_ENV} or the working directory)")

    parser = _Parser(prog="epr-polytope", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("epr-vector", parents=[common], help="generate the 8-event EPR correlation vector")
    p.add_argument("--scenario", help="scenario JSON file")
    p.add_argument("--angles", help="directions a,a',b,b' in degrees")
    p.add_argument("--switch", help="switch probabilities q(ab),q(ab'),q(a'b),q(a'b')")
    p.add_argument("--convention", choices=CONVENTIONS)
    p.add_argument("--denominator-bound", type=int, help=f"rounding bound for irrational values (default {DEFAULT_DENOMINATOR_BOUND})")
    p.set_defaults(func=cmd_epr_vector)

    p = sub.add_parser("membership", parents=[common], help="test membership in the correlation polytope")
    p.add_argument("--vector", help="correlation-vector JSON file (default: built-in EPR vector)")
    p.add_argument("--conditional", action="store_true", help="conditionalize on the settings first")
    p.add_argument("--validation", choices=("range", "monotone"), default="range")
    p.add_argument("--max-events", type=int, default=MAX_EVENTS)
    p.set_defaults(func=cmd_membership)

    p = sub.add_parser("ch", parents=[common], help="evaluate the Clauser-Horne forms")
    p.add_argument("--vector", help="4-event Bell vector (default: conditional built-in EPR vector)")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--conditional", action="store_true", help="conditionalize an 8-event vector first")
    group.add_argument("--restrict", action="store_true", help="restrict an 8-event vector to its outcome cross pairs")
    p.set_defaults(func=cmd_ch)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo run of a hidden-variable model")
    p.add_argument("--model", help="membership report holding a model (default: extract from target)")
    p.add_argument("--target", help="target correlation vector (default: built-in EPR vector)")
    p.add_argument("--samples", type=_count, default=10**6, help="trial count, e.g. 1e6")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--shards", type=int, default=1)
    p.add_argument("--z-threshold", type=float, default=4.0)
    p.add_argument("--trace", action="store_true", help="also write a per-trial JSON-lines log")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("oracle", parents=[common], help="singlet trace oracle against the closed forms")
    p.add_argument("--angles", help="directions a,a',b,b' in degrees")
    p.add_argument("--theta", help="comma-separated relative angles in degrees")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help, --version and usage errors
        return exc.code if isinstance(exc.code, int) else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, VectorFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
