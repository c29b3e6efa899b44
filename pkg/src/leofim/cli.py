"""Command-line interface.

Subcommands::

    leofim analyze SCENARIO.json [--mode M]
    leofim identifiability --target T --mode M --max-sats N --max-slots N --max-antennas N
    leofim sweep --axis {antennas,slot-spacing,frequency,snr} --grid v1,v2,... [--scenario F]
    leofim verify

Every subcommand accepts ``--out PATH`` and ``--format {csv,json}`` (the
format defaults to the extension of ``--out``, else JSON for ``analyze`` and
``verify`` and CSV for the table commands).

Exit status: 0 success, 1 configuration error (named in the message),
2 ``analyze`` on a non-identifiable scenario, 64 usage error.

CSV schemas:

* reports (``analyze``, ``sweep``): ``axis_value, pos_bound_m, vel_bound_mps,
  ori_bound_rad, identifiable``; bounds are empty when not identifiable.
* verdicts (``identifiability``): ``n_satellites, n_slots, n_antennas,
  positive_definite, eigenvalue_ratio, minimal, description``, where
  ``description`` reads e.g. ``2 satellites, multi-antenna, 1 slot: PD``.

Numbers are written with ``repr`` (shortest round-tripping double).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .analysis import (
    SWEEP_AXES,
    TARGETS,
    CrlbReport,
    crlb_report,
    minimal_config_search,
    parameter_sweep,
)
from .geometry import GeometryError
from .oracle import run_verification
from .scenario import ScenarioError, SyncMode, bundled_default_path, load_scenario
from .waveform import ConfigError, PulseError

__all__ = ["main", "run_command", "emit_results", "REPORT_COLUMNS", "VERDICT_COLUMNS", "EXIT_USAGE"]

EXIT_OK, EXIT_CONFIG, EXIT_NOT_IDENTIFIABLE, EXIT_USAGE = 0, 1, 2, 64
REPORT_COLUMNS = ("axis_value", "pos_bound_m", "vel_bound_mps", "ori_bound_rad", "identifiable")
VERDICT_COLUMNS = (
    "n_satellites", "n_slots", "n_antennas", "positive_definite", "eigenvalue_ratio", "minimal", "description",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _num(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    return repr(float(x))


def _report_row(value, rep: CrlbReport) -> dict:
    d = {} if value is None else {"axis_value": value}
    d.update(rep.to_dict())
    return d


def emit_results(reports: Sequence[CrlbReport], fmt: str, path=None, axis_values: Sequence = None, axis: str = None) -> str:
    """Serialize CRLB reports as CSV or JSON; writes to ``path`` if given.

    Args:
        reports: Nonempty sequence of reports.
        fmt: ``"csv"`` or ``"json"``.
        path: Output file, or ``None`` to only return the text.
        axis_values: Sweep value per report (empty column when omitted).
        axis: Sweep axis name recorded in the JSON output.

    Returns:
        The serialized text.
    """
    if not reports:
        raise ConfigError("emit_results needs at least one report")
    values = list(axis_values) if axis_values is not None else [None] * len(reports)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for v, r in zip(values, reports):
            w.writerow([_num(v), _num(r.position_bound), _num(r.velocity_bound), _num(r.orientation_bound),
                        _num(r.identifiable)])
        text = buf.getvalue()
    elif fmt == "json":
        rows = [_report_row(v, r) for v, r in zip(values, reports)]
        body = rows[0] if axis_values is None and len(rows) == 1 else {"axis": axis, "reports": rows}
        text = json.dumps(body, indent=2) + "\n"
    else:
        raise ConfigError(f"unknown output format {fmt!r}; expected csv or json")
    _write(text, path)
    return text


def _write(text: str, path) -> None:
    if path is None:
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise ConfigError(f"--out {path}: cannot write ({exc.strerror})") from None


def _verdict_text(table, fmt: str) -> str:
    minimal = {r.config for r in table.minimal}
    if fmt == "json":
        return json.dumps(
            {
                "target": table.target,
                "mode": table.mode.value,
                "rows": [dict(r.to_dict(), minimal=r.config in minimal, description=r.describe()) for r in table.rows],
                "minimal": [r.to_dict() for r in table.minimal],
            },
            indent=2,
        ) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(VERDICT_COLUMNS)
    for r in table.rows:
        n_b, n_k, n_u = r.config
        w.writerow([n_b, n_k, n_u, _num(r.positive_definite), _num(r.ratio), _num(r.config in minimal), r.describe()])
    return buf.getvalue()


def _format(args, default: str) -> str:
    if args.format:
        return args.format
    if args.out and Path(args.out).suffix.lower() in (".csv", ".json"):
        return Path(args.out).suffix.lower()[1:]
    return default


def _positive_int(text):
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return n


def _grid(text):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must be comma-separated numbers, got {text!r}") from None
    if not vals or not all(math.isfinite(v) for v in vals):
        raise argparse.ArgumentTypeError(f"grid must be comma-separated finite numbers, got {text!r}")
    return vals


def antenna_grid(max_antennas: int) -> list:
    """1 plus every square planar array size up to ``max_antennas`` (and the maximum itself)."""
    vals = {1, max_antennas}
    k = 2
    while k * k <= max_antennas:
        vals.add(k * k)
        k += 1
    return sorted(vals)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", help="write results to this file")
    common.add_argument("--format", choices=("csv", "json"), help="output format")

    p = _Parser(prog="leofim", description="Fisher-information analysis of LEO-satellite 9D localization.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    modes = [m.value for m in SyncMode]

    a = sub.add_parser("analyze", parents=[common], help="CRLB report for one scenario")
    a.add_argument("scenario", help="scenario JSON file ('default' for the bundled scenario)")
    a.add_argument("--mode", choices=modes, help="override the scenario's sync mode")

    i = sub.add_parser("identifiability", parents=[common], help="verdict grid and minimal configurations")
    i.add_argument("--target", choices=TARGETS + ("9D",), default="position")
    i.add_argument("--mode", choices=modes, default=SyncMode.BOTH_OFFSETS.value)
    i.add_argument("--max-sats", type=_positive_int, default=3)
    i.add_argument("--max-slots", type=_positive_int, default=1)
    i.add_argument("--max-antennas", type=_positive_int, default=4)

    s = sub.add_parser("sweep", parents=[common], help="CRLB reports along one parameter axis")
    s.add_argument("--axis", choices=SWEEP_AXES, required=True)
    s.add_argument("--grid", type=_grid, required=True, help="comma-separated values (dB for snr, Hz, s)")
    s.add_argument("--scenario", default="default", help="scenario JSON file (default: bundled)")
    s.add_argument("--mode", choices=modes)

    v = sub.add_parser("verify", parents=[common], help="run the numerical oracle suite")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--draws", type=_positive_int, default=20)
    return p


def _load(path: str):
    return load_scenario(bundled_default_path() if path == "default" else path)


def _cmd_analyze(args, out) -> int:
    scen = _load(args.scenario)
    rep = crlb_report(scen, args.mode)
    out.write(emit_results([rep], _format(args, "json"), args.out))
    if not rep.identifiable:
        print(f"not identifiable: {rep.verdict.reason}", file=sys.stderr)
        return EXIT_NOT_IDENTIFIABLE
    return EXIT_OK


def _cmd_identifiability(args, out) -> int:
    ranges = {
        "n_satellites": range(1, args.max_sats + 1),
        "n_slots": range(1, args.max_slots + 1),
        "n_antennas": antenna_grid(args.max_antennas),
    }
    table = minimal_config_search(ranges, args.mode, args.target.lower())
    fmt = _format(args, "csv")
    text = _verdict_text(table, fmt)
    _write(text, args.out)
    out.write(text)
    return EXIT_OK


def _cmd_sweep(args, out) -> int:
    scen = _load(args.scenario)
    res = parameter_sweep(scen, args.axis, args.grid, args.mode)
    out.write(emit_results(res.reports, _format(args, "csv"), args.out, res.values, args.axis))
    for v, r in zip(res.values, res.reports):
        if not r.identifiable:
            print(f"{args.axis}={v!r}: not identifiable ({r.verdict.reason})", file=sys.stderr)
    return EXIT_OK


def _cmd_verify(args, out) -> int:
    checks = run_verification(seed=args.seed, n_draws=args.draws)
    ok = all(c.passed for c in checks)
    fmt = _format(args, "json")
    if fmt == "json":
        text = json.dumps({"passed": ok, "checks": [c.to_dict() for c in checks]}, indent=2) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("check", "value", "threshold", "passed"))
        for c in checks:
            w.writerow((c.name, _num(c.value), _num(c.threshold), _num(c.passed)))
        text = buf.getvalue()
    _write(text, args.out)
    out.write(text)
    return EXIT_OK if ok else EXIT_CONFIG


def run_command(argv: Optional[Sequence[str]] = None, out=None) -> int:
    """Parse ``argv`` and run one subcommand; returns the exit status."""
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    handler = {
        "analyze": _cmd_analyze,
        "identifiability": _cmd_identifiability,
        "sweep": _cmd_sweep,
        "verify": _cmd_verify,
    }[args.command]
    try:
        return handler(args, out)
    except (ScenarioError, ConfigError, PulseError, GeometryError) as exc:
        print(f"leofim: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        return run_command(argv)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
