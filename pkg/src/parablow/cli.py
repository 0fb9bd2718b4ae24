"""Command line front end.

Exit codes: 0 stable relative to the supplied sections (or polystable),
10 destabilized, 2 bad input, 1 any other failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from decimal import Decimal, localcontext
from fractions import Fraction

from .blowup import build_chain, id_allocator, weight_identities
from .config import load_surface
from .continued_fractions import Weight, dual_expand, format_fraction, hj_expand, parse_fraction
from .errors import ConfigError, InvalidWeight, OutOfRange, ParablowError, UnknownSection
from .futaki import Degeneration, default_threads, destabilize, scan
from .surface import Verdict, central_fiber, classify_stability, par_slope

SCHEMA_VERSION = 1
EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INPUT = 2
EXIT_DESTABILIZED = 10

CSV_COLUMNS = ("tau_minus", "tau_plus", "futaki", "futaki_decimal", "sign")


class InputError(Exception):
    pass


def decimal12(x: Fraction) -> str:
    """Twelve significant digits, for plotting only."""
    with localcontext() as ctx:
        ctx.prec = 12
        d = Decimal(x.numerator) / Decimal(x.denominator)
    return format(d, "g") if d else "0"


def _sign(x) -> str:
    return "+" if x > 0 else "-" if x < 0 else "0"


def _report(command, args, payload, started):
    report = {"schema_version": SCHEMA_VERSION, "command": command}
    if getattr(args, "config", None):
        report["config"] = str(args.config)
    report.update(payload)
    if getattr(args, "timing", False):
        report["elapsed_seconds"] = round(time.perf_counter() - started, 6)
    return report


def _emit_json(report, args, stream):
    text = json.dumps(report, indent=2, sort_keys=False) + "\n"
    out = getattr(args, "out", None)
    if out:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        stream.write(text)


def _surface(args):
    if not args.config:
        raise InputError("--config is required")
    return load_surface(args.config)


def _c_base(args) -> Fraction:
    try:
        c = parse_fraction(args.c_base)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if c <= 0:
        raise InputError("--c-base must be positive")
    return c


def cmd_hj(args, stream):
    try:
        w = Weight.parse(args.weight)
    except InvalidWeight as exc:
        raise InputError(str(exc)) from None
    minus = ",".join(map(str, hj_expand(w)))
    plus = ",".join(map(str, dual_expand(w)))
    stream.write(f"e-: [{minus}], e+: [{plus}]\n")
    return EXIT_OK


def cmd_blowup(args, stream):
    started = time.perf_counter()
    surface = _surface(args)
    alloc = id_allocator()
    fibers = []
    for m in surface.marked:
        chain, trace = build_chain(m.weight, alloc=alloc, fiber_id=m.fiber_id)
        ident = weight_identities(chain)
        fibers.append({
            "fiber": m.fiber_id,
            "weight": str(m.weight),
            "trace": str(trace),
            "nodes": [
                {"label": n.label, "self_int": n.self_int, "w": n.w, "v": n.v, "class": str(n.cls)}
                for n in chain.nodes
            ],
            "left_sum": format_fraction(ident.left_sum),
            "right_sum": format_fraction(ident.right_sum),
            "weights_ok": ident.ok,
        })
    if args.out:
        _emit_json(_report("blowup", args, {"fibers": fibers}, started), args, stream)
        return EXIT_OK
    if not fibers:
        stream.write("no blowups\n")
    for f in fibers:
        stream.write(f"fiber {f['fiber']}  weight {f['weight']}  trace {f['trace']}\n")
        stream.write(f"  {'curve':<6}{'self':>6}{'w':>6}{'v':>6}  class\n")
        for n in f["nodes"]:
            stream.write(f"  {n['label']:<6}{n['self_int']:>6}{n['w']:>6}{n['v']:>6}  {n['class']}\n")
        stream.write(f"  sum left {f['left_sum']}  sum right {f['right_sum']}  "
                     f"{'ok' if f['weights_ok'] else 'MISMATCH'}\n")
    return EXIT_OK


def cmd_slope(args, stream):
    started = time.perf_counter()
    surface = _surface(args)
    ids = [args.section] if args.section else [s.id for s in surface.sections]
    slopes = {sid: par_slope(surface, sid) for sid in ids}
    if args.out:
        payload = {"slopes": {k: format_fraction(v) for k, v in slopes.items()}}
        _emit_json(_report("slope", args, payload, started), args, stream)
        return EXIT_OK
    for sid, mu in slopes.items():
        stream.write(f"{sid}: {format_fraction(mu)}\n")
    return EXIT_OK


def _verdict_payload(verdict: Verdict):
    return {
        "classification": verdict.kind,
        "reason": verdict.reason,
        "slopes": {k: format_fraction(v) for k, v in verdict.slopes.items()},
        "witness": verdict.witness,
        "pair": list(verdict.pair) if verdict.pair else None,
    }


def cmd_verdict(args, stream):
    started = time.perf_counter()
    surface = _surface(args)
    verdict = classify_stability(surface)
    payload = {"verdict": _verdict_payload(verdict)}
    code = EXIT_OK
    if verdict.kind == Verdict.UNSTABLE:
        cert = destabilize(surface, verdict.witness, c_base0=_c_base(args))
        payload["certificate"] = cert.as_dict()
        code = EXIT_DESTABILIZED
    _emit_json(_report("verdict", args, payload, started), args, stream)
    return code


def cmd_destabilize(args, stream):
    started = time.perf_counter()
    surface = _surface(args)
    section = args.section
    if section is None:
        verdict = classify_stability(surface)
        section = verdict.witness or (verdict.pair[0] if verdict.pair else None)
        if section is None:
            raise InputError("no section with non-positive slope; pass --section")
    cert = destabilize(surface, section, c_base0=_c_base(args))
    payload = {"certificate": cert.as_dict()}
    _emit_json(_report("destabilize", args, payload, started), args, stream)
    return EXIT_DESTABILIZED


def scan_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for tm, tp, value in rows:
        writer.writerow((format_fraction(tm), format_fraction(tp), format_fraction(value),
                         decimal12(value), _sign(value)))
    return buf.getvalue()


def _scan_section(surface, args):
    if args.section:
        return args.section
    verdict = classify_stability(surface)
    if verdict.witness:
        return verdict.witness
    if verdict.pair:
        return verdict.pair[0]
    if surface.sections:
        return min(surface.sections, key=lambda s: (par_slope(surface, s.id), s.id)).id
    raise InputError("the config has no sections to degenerate along")


def cmd_scan(args, stream):
    surface = _surface(args)
    section = _scan_section(surface, args)
    if args.grid < 1:
        raise InputError("--grid must be positive")
    try:
        tau_max = parse_fraction(args.tau_max)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    deg = Degeneration(central_fiber(surface, section))
    threads = args.threads or default_threads()
    rows = scan(deg, _c_base(args), args.grid, tau_max, threads=threads)
    text = scan_csv(rows)
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        stream.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="parablow", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_help="write a JSON report to this path"):
        p.add_argument("--config", help="TOML surface description")
        p.add_argument("--out", help=out_help)
        p.add_argument("--timing", action="store_true", help="include elapsed time in reports")

    p = sub.add_parser("hj", help="Hirzebruch-Jung expansion of a weight and of its dual")
    p.add_argument("weight", help="reduced fraction p/q in (0,1)")
    p.set_defaults(func=cmd_hj)

    p = sub.add_parser("blowup", help="exceptional strings over every marked fiber")
    common(p)
    p.set_defaults(func=cmd_blowup)

    p = sub.add_parser("slope", help="parabolic slopes of the supplied sections")
    common(p)
    p.add_argument("--section")
    p.set_defaults(func=cmd_slope)

    for name, func, text in (
        ("verdict", cmd_verdict, "classify stability; certify instability"),
        ("destabilize", cmd_destabilize, "search for a destabilizing Kahler class"),
    ):
        p = sub.add_parser(name, help=text)
        common(p)
        p.add_argument("--section")
        p.add_argument("--c-base", default="1000", help="starting base area, p/q")
        p.set_defaults(func=func)

    p = sub.add_parser("scan", help="Futaki values on a (tau-, tau+) grid as CSV")
    common(p, out_help="write the CSV to this path")
    p.add_argument("--section")
    p.add_argument("--grid", type=int, default=16, help="grid points per axis")
    p.add_argument("--c-base", default="1000", help="base area, p/q")
    p.add_argument("--tau-max", default="1/16", help="upper end of both tau axes, p/q")
    p.add_argument("--threads", type=int, default=None,
                   help="worker processes (default: PARABLOW_THREADS or 1)")
    p.set_defaults(func=cmd_scan)
    return parser


def main(argv=None, stream=None) -> int:
    stream = stream or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, stream)
    except (InputError, ConfigError, InvalidWeight, UnknownSection, OutOfRange) as exc:
        print(f"parablow: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ParablowError as exc:
        print(f"parablow: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
