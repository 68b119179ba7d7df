"""Command-line entry point.

Exit codes: 0 success, 1 rejected input (bad flags, bad spec), 2 internal
consistency failure (a density invariant broke or a verification failed).
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from qnewcomb import market, newcomb
from qnewcomb.errors import ConsistencyError, ValidationError
from qnewcomb.gamespec import execute_spec, parse_game_spec
from qnewcomb.output import (
    Usd,
    complex_matrix_json,
    dumps_report,
    emit_landscape_csv,
    write_atomic,
)

EXIT_OK, EXIT_INVALID, EXIT_INTERNAL = 0, 1, 2

TABLE_NOTE = (
    "Note: the protocol returns every run to its initial state, so the payoff depends only on the\n"
    "strategy: $1000 for female, $1000000 for male, whatever the tactic. Narrative accounts that give\n"
    "$0 to female strategy + female tactic, or $100000 to the opposite case, do not follow from the\n"
    "state evolution and are not reproduced here."
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


def _prob(text: str) -> float:
    x = _finite(text)
    if not 0.0 <= x <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {text}")
    return x


def _finite(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(x):
        raise argparse.ArgumentTypeError(f"must be finite, got {text}")
    return x


def _positive(text: str) -> float:
    x = _finite(text)
    if x <= 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return x


def _nonneg(text: str) -> float:
    x = _finite(text)
    if x < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return x


def _int_at_least(lo: int):
    def parse(text: str) -> int:
        try:
            n = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
        if n < lo:
            raise argparse.ArgumentTypeError(f"must be >= {lo}, got {n}")
        return n

    return parse


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--json", action="store_true", help="print machine-readable JSON to stdout")
    p.add_argument("--out", type=Path, help="write machine-readable output to this path")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qnewcomb", description="Quantum Newcomb game simulator")
    parser.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    nc = sub.add_parser("newcomb", help="Hadamard-sandwich protocol runs")
    nsub = nc.add_subparsers(dest="action", required=True)
    p = nsub.add_parser("run", help="run the protocol for one (v, w)")
    p.add_argument("--v", type=_prob, required=True, help="probability of the female intention")
    p.add_argument("--w", type=_prob, required=True, help="probability of the negation tactic")
    p.add_argument("--trace", action="store_true", help="include all four stages in the output")
    _add_output(p)
    p = nsub.add_parser("table", help="the four pure (strategy, tactic) runs")
    _add_output(p)
    p = nsub.add_parser("verify", help="check state restoration over a (v, w) grid")
    p.add_argument("--grid", type=_int_at_least(2), default=51)
    p.add_argument("--tol", type=_nonneg, default=1e-12)
    p.add_argument("--workers", type=_int_at_least(1), default=1)
    _add_output(p)

    mk = sub.add_parser("market", help="market version of the game")
    msub = mk.add_subparsers(dest="action", required=True)
    p = msub.add_parser("scan", help="payoff landscape as CSV")
    p.add_argument("--grid", type=_int_at_least(3), default=401)
    p.add_argument("--radius", type=_positive, default=4.0)
    p.add_argument("--inverse-chart", action="store_true", help="also scan u = 1/z around infinity")
    p.add_argument("--workers", type=_int_at_least(1), default=1)
    p.add_argument("--out", type=Path, required=True)
    p = msub.add_parser("extrema", help="locate payoff maximum and minimum")
    p.add_argument("--grid", type=_int_at_least(3), default=401)
    p.add_argument("--radius", type=_positive, default=4.0)
    p.add_argument("--refine", type=_int_at_least(0), default=12)
    _add_output(p)

    p = sub.add_parser("run", help="execute a JSON game spec")
    p.add_argument("--spec", type=Path, required=True)
    p.add_argument("--trace", action="store_true")
    _add_output(p)
    return parser


def _emit(args, report: dict, summary: str) -> None:
    text = dumps_report(report)
    if args.out is not None:
        write_atomic(args.out, text)
    if args.json:
        sys.stdout.write(text)
    else:
        print(summary)


def _cmd_newcomb_run(args) -> int:
    params = newcomb.ProtocolParams(args.v, args.w)
    trace, payoff = newcomb.run_meyer_protocol(params)
    dev = trace.final.max_deviation(trace.initial)
    expect = newcomb.payoff_formula(args.v)
    report = {"params": {"v": args.v, "w": args.w}}
    if args.trace:
        report["trace"] = [
            {
                "step": e.label,
                "state": complex_matrix_json(e.state.rho),
                "human_reduced": complex_matrix_json(e.human_reduced),
                "diagonal": e.state.diagonal().tolist(),
            }
            for e in trace
        ]
    report["payoff_usd"] = Usd(payoff)
    report["checks"] = {
        "restored": dev <= 1e-12,
        "max_deviation": dev,
        "payoff_formula_usd": Usd(expect),
        "matches_formula": abs(payoff - expect) <= 1e-6,
    }
    lines = [f"v={args.v:g} w={args.w:g}  payoff ${payoff:.6f}  (formula ${expect:.6f})"]
    if args.trace:
        for e in trace:
            h = e.human_reduced
            lines.append(
                f"  {e.label:<22} human [[{h[0, 0].real:+.6f} {h[0, 1].real:+.6f}] [{h[1, 0].real:+.6f} {h[1, 1].real:+.6f}]]"
            )
    lines.append(f"final state restored: {dev <= 1e-12} (max deviation {dev:.3e})")
    _emit(args, report, "\n".join(lines))
    return EXIT_OK


def _cmd_newcomb_table(args) -> int:
    rows = newcomb.pure_case_table()
    lines = [f"{'strategy':<9}{'tactic':<9}{'v':>4}{'w':>4}  payoff"]
    for r in rows:
        lines.append(f"{r['strategy']:<9}{r['tactic']:<9}{r['v']:>4g}{r['w']:>4g}  ${r['payoff_usd']:.6f}")
        r["payoff_usd"] = Usd(r["payoff_usd"])
    lines += ["", TABLE_NOTE]
    _emit(args, {"params": {}, "table": rows, "checks": {"note": TABLE_NOTE}}, "\n".join(lines))
    return EXIT_OK


def _cmd_newcomb_verify(args) -> int:
    rep = newcomb.verify_restoration(args.grid, args.tol, workers=args.workers)
    report = {
        "params": {"grid": args.grid, "tol": args.tol},
        "checks": {
            "passed": rep.passed,
            "max_deviation": rep.max_deviation,
            "worst_point": list(rep.worst_point),
            "max_payoff_spread_usd": Usd(rep.max_payoff_spread),
            "max_formula_error_usd": Usd(rep.max_formula_error),
        },
    }
    status = "PASS" if rep.passed else "FAIL"
    summary = (
        f"{status}: restoration over {args.grid}x{args.grid} grid, max deviation {rep.max_deviation:.3e} "
        f"(tol {args.tol:g}) at v={rep.worst_point[0]:g}, w={rep.worst_point[1]:g}; "
        f"payoff spread across w ${rep.max_payoff_spread:.6f}"
    )
    _emit(args, report, summary)
    return EXIT_OK if rep.passed else EXIT_INTERNAL


def _cmd_market_scan(args) -> int:
    cfg = market.ScanConfig(grid_n=args.grid, radius=args.radius, inverse_chart=args.inverse_chart, workers=args.workers)
    samples = market.scan_landscape(cfg)
    write_atomic(args.out, emit_landscape_csv(samples))
    pays = [s.payoff for s in samples]
    print(f"wrote {len(samples)} samples to {args.out}; payoff range [${min(pays):.6f}, ${max(pays):.6f}]")
    return EXIT_OK


def _point_json(p: market.ProjectivePoint) -> dict:
    c = p.canonical()
    z = c.z
    return {
        "a": [c.a.real, c.a.imag],
        "b": [c.b.real, c.b.imag],
        "infinity": c.is_infinity,
        "z": None if c.is_infinity else [z.real, z.imag],
    }


def _cmd_market_extrema(args) -> int:
    cfg = market.ScanConfig(grid_n=args.grid, radius=args.radius, refine=args.refine)
    ext = market.find_extrema(cfg)
    d_max = ext.argmax.distance(market.ProjectivePoint.from_z(-1))
    d_min = ext.argmin.distance(market.ProjectivePoint.from_z(1))
    report = {
        "params": {"grid": args.grid, "radius": args.radius, "refine": args.refine, "inverse_chart": True},
        "argmax": _point_json(ext.argmax),
        "max_usd": Usd(ext.max),
        "argmin": _point_json(ext.argmin),
        "min_usd": Usd(ext.min),
        "checks": {
            "argmax_angle_to_z_minus_1": d_max,
            "argmin_angle_to_z_plus_1": d_min,
            "argmax_near_z_minus_1": d_max <= 1e-3,
            "argmin_near_z_plus_1": d_min <= 1e-3,
        },
    }
    summary = (
        f"max ${ext.max:.6f} at {ext.argmax} (angle to z=-1: {d_max:.2e})\n"
        f"min ${ext.min:.6f} at {ext.argmin} (angle to z=+1: {d_min:.2e})"
    )
    _emit(args, report, summary)
    return EXIT_OK


def _cmd_run(args) -> int:
    try:
        text = args.spec.read_text(encoding="utf-8")
    except OSError as e:
        raise ValidationError(f"cannot read spec: {e}") from None
    doc = parse_game_spec(text)
    rep = execute_spec(doc)
    report = {"params": doc.model_dump(mode="json")}
    if args.trace:
        report["trace"] = [
            {
                "step": s.label,
                "trace": s.trace,
                "purity": s.purity,
                "diagonal": s.diagonal,
                "min_eigenvalue": s.min_eigenvalue,
            }
            for s in rep.steps
        ]
    report["payoff_usd"] = Usd(rep.payoff_usd)
    report["checks"] = rep.checks
    lines = [f"{len(doc.moves)} moves; expected payoff ${rep.payoff_usd:.6f}"]
    lines += [f"  {s.label:<18} purity {s.purity:.6f} diag {[round(x, 6) for x in s.diagonal]}" for s in rep.steps]
    _emit(args, report, "\n".join(lines))
    return EXIT_OK


_COMMANDS = {
    ("newcomb", "run"): _cmd_newcomb_run,
    ("newcomb", "table"): _cmd_newcomb_table,
    ("newcomb", "verify"): _cmd_newcomb_verify,
    ("market", "scan"): _cmd_market_scan,
    ("market", "extrema"): _cmd_market_extrema,
    ("run", None): _cmd_run,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_INVALID
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    handler = _COMMANDS[(args.command, getattr(args, "action", None))]
    try:
        return handler(args)
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except ConsistencyError as e:
        print(f"internal consistency error: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
