"""Command-line interface.

Exit codes: 0 success, 1 findings (a property or inequality fails), 2 errors.
"""

import argparse
import csv
import io
import json
import sys
import warnings
from fractions import Fraction

from . import __version__
from .exact import Quad, PrecisionError, parse_angle
from .iteration import gap_bounds_check, index_iterate, mean_index, nullity_iterate
from .jump import (DEFAULT_EPSILON, DEFAULT_RELATION_BOUND, DEFAULT_T_BOUND,
                   NoReturnTimeError, find_jump)
from .morse import (InsufficientDataError, average_chi, betti_table, identity_constant,
                    mean_index_identity, morse_inequality_check, morse_table, resonance_check)
from .normal_forms import decompose, splitting_numbers
from .core import SymplecticMatrix
from .replay import replay
from .scenario import ScenarioError, load_scenario, validate_pinching


class UsageError(ValueError):
    pass


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else x.numerator
    if isinstance(x, Quad):
        return str(x)
    return x


def _emit(rows, columns, fmt, out):
    if fmt == "json":
        json.dump([{c: _jsonable(r[c]) for c in columns} for r in rows], out, indent=2)
        out.write("\n")
    elif fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_jsonable(r[c]) for c in columns])
    else:
        cells = [[str(_jsonable(r[c])) for c in columns] for r in rows]
        widths = [max([len(c)] + [len(row[k]) for row in cells]) for k, c in enumerate(columns)]
        out.write("  ".join(c.rjust(w) for c, w in zip(columns, widths)) + "\n")
        for row in cells:
            out.write("  ".join(v.rjust(w) for v, w in zip(row, widths)) + "\n")


def _m_range(text):
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            lo, hi = int(lo), int(hi)
        else:
            lo = hi = int(text)
    except ValueError:
        raise UsageError(f"--m expects 'a..b' or an integer, got {text!r}") from None
    if lo < 1 or hi < lo:
        raise UsageError(f"--m range {text!r} must satisfy 1 <= a <= b")
    return list(range(lo, hi + 1))


def _records(args, scenario):
    recs = scenario.records
    if getattr(args, "record", None):
        recs = [r for r in recs if r.name == args.record]
        if not recs:
            raise UsageError(f"no record named {args.record!r}")
    return recs


def _parse_matrix(text):
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"--matrix is not valid JSON: {exc.msg}") from None
    def entry(x):
        if isinstance(x, str):
            return Fraction(x)
        if isinstance(x, int):
            return Fraction(x)
        return float(x)
    return SymplecticMatrix([[entry(x) for x in row] for row in raw])


# commands

def cmd_iterate(args, out):
    s = load_scenario(args.scenario)
    recs = _records(args, s)
    ms = _m_range(args.m)
    columns = ["m", "index", "nullity", "mean_index_times_m", "gap_lower_slack", "gap_upper_slack"]
    if len(recs) > 1:
        columns = ["record"] + columns
    rows, bad = [], 0
    for rec in recs:
        mi = mean_index(rec.seed)
        for m in ms:
            gap = gap_bounds_check(rec.seed, m)
            bad += not gap.ok
            times = m * mi
            rows.append({"record": rec.name, "m": m, "index": index_iterate(rec.seed, m),
                         "nullity": nullity_iterate(rec.seed, m),
                         "mean_index_times_m": times if isinstance(times, Fraction) else float(times),
                         "gap_lower_slack": gap.lower_slack, "gap_upper_slack": gap.upper_slack})
    _emit(rows, columns, args.out, out)
    if args.figure:
        from .plotting import plot_iterates
        plot_iterates(recs, ms, args.figure)
    return 1 if bad else 0


def cmd_decompose(args, out):
    d = decompose(_parse_matrix(args.matrix))
    obj = d.to_json()
    if args.out == "json":
        json.dump(obj, out, indent=2)
        out.write("\n")
    else:
        rows = [{"field": k, "value": v if not isinstance(v, list) else
                 " ".join(str(parse_json_angle(a)) for a in v) or "-"} for k, v in obj.items()]
        rows.append({"field": "nullity_at_one", "value": d.nullity_at_one})
        rows.append({"field": "elliptic_height", "value": d.elliptic_height})
        _emit(rows, ["field", "value"], args.out, out)
    return 0


def parse_json_angle(obj):
    from .exact import Angle
    return Angle.from_json(obj)


def cmd_splitting(args, out):
    angle = parse_angle(args.angle)
    if args.matrix:
        ds = [("matrix", decompose(_parse_matrix(args.matrix)))]
    elif args.scenario:
        ds = [(r.name, r.seed.d) for r in _records(args, load_scenario(args.scenario))]
    else:
        raise UsageError("splitting needs --matrix or --scenario")
    rows = []
    for name, d in ds:
        pair = splitting_numbers(d, angle)
        rows.append({"record": name, "angle_over_pi": str(angle), "s_plus": pair.plus,
                     "s_minus": pair.minus})
    _emit(rows, ["record", "angle_over_pi", "s_plus", "s_minus"], args.out, out)
    return 0


def cmd_jump(args, out):
    s = load_scenario(args.scenario)
    try:
        cert, _ = find_jump(s.seeds, args.epsilon, args.t_bound, args.relation_bound,
                            args.modulus, seed=args.seed)
    except NoReturnTimeError as exc:
        json.dump({"error": str(exc), "best_T": exc.best_t, "best_distance": exc.best_distance},
                  out, indent=2)
        out.write("\n")
        return 2
    if args.out == "json":
        obj = cert.to_json()
        obj["records"] = [r.name for r in s.records]
        json.dump(obj, out, indent=2)
        out.write("\n")
    else:
        if args.out == "table":
            out.write(f"T = {cert.T}, vertex = {list(cert.vertex.bits)}\n")
        rows = [{"record": rec.name, "m": m, "check": name, "passed": ok}
                for rec, m, checks in zip(s.records, cert.m_ks, cert.checks) for name, ok in checks.items()]
        _emit(rows, ["record", "m", "check", "passed"], args.out, out)
    return 0 if cert.passed else 1


def cmd_betti(args, out):
    values = betti_table(args.n, args.q_max)
    _emit([{"q": q, "b_q": b} for q, b in enumerate(values)], ["q", "b_q"], args.out, out)
    if args.figure:
        from .plotting import plot_betti
        plot_betti(values, args.figure, n=args.n)
    return 0


def cmd_chi(args, out):
    s = load_scenario(args.scenario)
    rows = []
    for rec in _records(args, s):
        try:
            shortcut = average_chi(rec, "shortcut")
        except InsufficientDataError:
            shortcut = "-"
        rows.append({"record": rec.name, "period": rec.period, "average_chi": average_chi(rec),
                     "shortcut": shortcut})
    _emit(rows, ["record", "period", "average_chi", "shortcut"], args.out, out)
    return 0


def cmd_identity(args, out):
    if args.scenario is None:
        if args.n is None:
            raise UsageError("identity needs --scenario or --n")
        _emit([{"n": args.n, "constant": identity_constant(args.n)}], ["n", "constant"], args.out, out)
        return 0
    s = load_scenario(args.scenario)
    residual = mean_index_identity(s.records, s.n, args.method)
    exact = isinstance(residual, (Fraction, Quad))
    _emit([{"n": s.n, "constant": identity_constant(s.n), "residual": residual,
            "exact": exact}], ["n", "constant", "residual", "exact"], args.out, out)
    holds = residual == 0 if exact else abs(float(residual)) <= 1e-9
    return 0 if holds else 1


def cmd_morse(args, out):
    s = load_scenario(args.scenario)
    table = morse_table(s.records, s.n, args.q_max)
    report = morse_inequality_check(table)
    bad = {v.degree for v in report.violations}
    rows = [{"q": q, "M_q": m, "b_q": b, "ok": q not in bad}
            for q, (m, b) in enumerate(zip(table.morse, table.betti))]
    _emit(rows, ["q", "M_q", "b_q", "ok"], args.out, out)
    if report.violations and args.out != "json":
        sys.stderr.write(f"first violated degree: {report.first_degree}\n")
    if args.figure:
        from .plotting import plot_betti
        plot_betti(table.betti, args.figure, table.morse, s.n)
    return 0 if report.ok else 1


def cmd_replay(args, out):
    s = load_scenario(args.scenario)
    report = replay(s, args.epsilon, args.t_bound, args.relation_bound, args.modulus,
                    seed=args.seed)
    if args.out == "json":
        json.dump(report.to_json(), out, indent=2)
        out.write("\n")
    else:
        out.write(f"n = {s.n}, N = {report.big_n}, candidates: {', '.join(report.candidates) or '-'}\n")
        rows = [f.to_json() for f in report.findings]
        if rows:
            _emit(rows, ["step", "check", "record", "severity", "message"], args.out, out)
    if args.figure and report.table is not None:
        from .plotting import plot_betti
        plot_betti(report.table.betti, args.figure, report.table.morse, s.n)
    if report.errors:
        return 2
    return 1 if report.violations else 0


def cmd_validate(args, out):
    s = load_scenario(args.scenario)
    report = validate_pinching(s, args.m_max)
    rows = [f.to_json() for f in report.findings]
    resonance = None
    if all(r.resolved_length is not None for r in s.records):
        resonance = resonance_check(s.records)
        if not resonance.ok:
            rows.append({"check": "resonance", "record": "*", "waived": False,
                         "message": "mean index / length ratios differ: "
                                    + ", ".join(f"{x:.12g}" for x in resonance.ratios)})
    if args.out == "json":
        json.dump({"findings": rows, "resonance": None if resonance is None else
                   {"ok": resonance.ok, "ratios": resonance.ratios, "common": resonance.common}},
                  out, indent=2)
        out.write("\n")
    elif rows:
        _emit(rows, ["check", "record", "waived", "message"], args.out, out)
    else:
        out.write("clean\n")
    active = report.active or (resonance is not None and not resonance.ok)
    return 1 if active else 0


# parser

def _parser():
    p = argparse.ArgumentParser(prog="geodesic-index",
                                description="Index iteration and Morse accounting for closed geodesics.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def out_flag(sp):
        sp.add_argument("--out", choices=("table", "csv", "json"), default="table")

    def jump_flags(sp):
        sp.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
        sp.add_argument("--t-bound", type=int, default=DEFAULT_T_BOUND)
        sp.add_argument("--relation-bound", type=int, default=DEFAULT_RELATION_BOUND)
        sp.add_argument("--modulus", type=int, default=1, help="require modulus | T")
        sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("iterate", help="i(c^m), nu(c^m) and gap slacks")
    sp.add_argument("--scenario", required=True)
    sp.add_argument("--record")
    sp.add_argument("--m", default="1..20")
    sp.add_argument("--figure")
    out_flag(sp)
    sp.set_defaults(func=cmd_iterate)

    sp = sub.add_parser("decompose", help="basic normal form of a symplectic matrix")
    sp.add_argument("--matrix", required=True, help="JSON rows; strings like '1/2' stay exact")
    out_flag(sp)
    sp.set_defaults(func=cmd_decompose)

    sp = sub.add_parser("splitting", help="splitting numbers at a unit-circle point")
    sp.add_argument("--angle", required=True, help="angle over pi, e.g. 1/2")
    sp.add_argument("--matrix")
    sp.add_argument("--scenario")
    sp.add_argument("--record")
    out_flag(sp)
    sp.set_defaults(func=cmd_splitting)

    sp = sub.add_parser("jump", help="common index jump certificate")
    sp.add_argument("--scenario", required=True)
    sp.add_argument("--out", choices=("table", "csv", "json"), default="json")
    jump_flags(sp)
    sp.set_defaults(func=cmd_jump)

    sp = sub.add_parser("betti", help="loop-space Betti numbers of S^n")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--q-max", type=int, default=40)
    sp.add_argument("--figure")
    out_flag(sp)
    sp.set_defaults(func=cmd_betti)

    sp = sub.add_parser("chi", help="average Euler characteristics")
    sp.add_argument("--scenario", required=True)
    sp.add_argument("--record")
    out_flag(sp)
    sp.set_defaults(func=cmd_chi)

    sp = sub.add_parser("identity", help="mean index identity residual")
    sp.add_argument("--scenario")
    sp.add_argument("--n", type=int)
    sp.add_argument("--method", choices=("period", "shortcut"), default="period")
    out_flag(sp)
    sp.set_defaults(func=cmd_identity)

    sp = sub.add_parser("morse", help="Morse inequalities up to a degree")
    sp.add_argument("--scenario", required=True)
    sp.add_argument("--q-max", type=int, default=20)
    sp.add_argument("--figure")
    out_flag(sp)
    sp.set_defaults(func=cmd_morse)

    sp = sub.add_parser("replay", help="replay the counting argument on a scenario")
    sp.add_argument("--scenario", required=True)
    jump_flags(sp)
    sp.add_argument("--figure")
    out_flag(sp)
    sp.set_defaults(func=cmd_replay)

    sp = sub.add_parser("validate", help="pinching bounds and resonance")
    sp.add_argument("--scenario", required=True)
    sp.add_argument("--m-max", type=int, default=50)
    out_flag(sp)
    sp.set_defaults(func=cmd_validate)
    return p


def run_command(argv, out=None):
    out = out or sys.stdout
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return args.func(args, out)
    except (UsageError, ScenarioError, InsufficientDataError, PrecisionError,
            ValueError, TypeError, OSError, ArithmeticError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


def run_captured(argv):
    """(exit code, stdout text) for tests and scripting."""
    buf = io.StringIO()
    code = run_command(argv, buf)
    return code, buf.getvalue()


def main(argv=None):
    sys.exit(run_command(sys.argv[1:] if argv is None else argv))
