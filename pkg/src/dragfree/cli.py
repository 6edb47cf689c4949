"""Command-line interface: spectrum | optimize | verify | sweep-gain.

Exit statuses: 0 ok, 1 usage, 2 validation (bad config), 3 numerical
(singular closed-loop matrix or degenerate sensor coupling), 4 verification
failure. CSV values are printed with 17 significant digits so totals
round-trip exactly.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import math
import sys

from .budget import budget_decomposition, optimize_rho
from .checks import SWEEP_SOURCES, CheckThresholds, run_consistency_checks
from .closed_loop import convergence_defect
from .config import RunConfig, load_config
from .constants import get_units
from .errors import DragfreeError, NumericalError, ValidationError

_COLUMN_NAMES = {"f_p": "src_fp", "f_s": "src_fs", "f_t": "src_ft",
                 "v_se": "src_vse", "f_c": "src_fc"}
_TARGET_SUFFIX = {"proof-mass": "proof_mass", "cage": "cage"}


class UsageError(DragfreeError):
    """Invocation problem that argparse cannot catch itself."""


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dragfree",
        description="Frequency-domain noise budgets for drag-free proof-mass/cage servos.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, metavar="PATH",
                       help="YAML run configuration")
        p.add_argument("--out", metavar="PATH", default=None,
                       help="output file (default: stdout)")
        p.add_argument("--target", choices=["proof-mass", "cage", "both"],
                       help="override the config target")
        p.add_argument("--regime", choices=["high-gain", "finite-gain"],
                       help="override the config regime")
        p.add_argument("--units", choices=["si", "natural"],
                       help="override the config unit system")

    p = sub.add_parser("spectrum", help="per-source velocity-noise table over the grid")
    common(p)

    p = sub.add_parser("optimize", help="optimal impedance matching ratio at one frequency")
    common(p)
    p.add_argument("--omega", type=float, default=None,
                   help="evaluation frequency, rad/s (default: geometric centre of the grid)")

    p = sub.add_parser("verify", help="run the built-in consistency suite")
    common(p)
    p.add_argument("--thresholds", metavar="PATH", default=None,
                   help="JSON overrides of check thresholds (testing hook)")

    p = sub.add_parser("sweep-gain", help="convergence defect vs servo gain magnitude")
    common(p)
    p.add_argument("--gains", default="1e3,1e4,1e5,1e6,1e7,1e8",
                   help="comma-separated |G| ladder (default decades 1e3..1e8)")
    return parser


def _resolve(cfg: RunConfig, args):
    target = args.target or cfg.target
    regime = args.regime or cfg.regime
    units = get_units(args.units or cfg.units)
    return target, regime, units


@contextlib.contextmanager
def _open_out(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def cmd_spectrum(cfg: RunConfig, args) -> int:
    target, regime, units = _resolve(cfg, args)
    table = budget_decomposition(cfg.system, cfg.grid.omegas(), target=target,
                                 regime=regime, units=units)
    with _open_out(args.out) as fh:
        writer = csv.writer(fh)
        if len(table.targets) == 1:
            tgt = table.targets[0]
            writer.writerow(["omega_rad_s"]
                            + [_COLUMN_NAMES[s] for s in table.source_labels] + ["total"])
            for i, omega in enumerate(table.grid):
                writer.writerow([_fmt(omega)]
                                + [_fmt(v) for v in table.columns[tgt][i]]
                                + [_fmt(table.totals[tgt][i])])
        else:
            header = ["omega_rad_s"]
            for tgt in table.targets:
                sfx = _TARGET_SUFFIX[tgt]
                header += [f"{_COLUMN_NAMES[s]}_{sfx}" for s in table.source_labels]
                header += [f"total_{sfx}"]
            writer.writerow(header)
            for i, omega in enumerate(table.grid):
                row = [_fmt(omega)]
                for tgt in table.targets:
                    row += [_fmt(v) for v in table.columns[tgt][i]]
                    row += [_fmt(table.totals[tgt][i])]
                writer.writerow(row)
    return 0


def cmd_optimize(cfg: RunConfig, args) -> int:
    target, _, units = _resolve(cfg, args)
    omega = args.omega
    if omega is None:
        omega = math.sqrt(cfg.grid.omega_min * cfg.grid.omega_max)
    if omega <= 0:
        raise UsageError(f"--omega must be > 0, got {omega!r}")
    targets = ("proof-mass", "cage") if target == "both" else (target,)
    with _open_out(args.out) as fh:
        for tgt in targets:
            analytic = optimize_rho(cfg.system, omega, tgt, "analytic", units)
            numeric = optimize_rho(cfg.system, omega, tgt, "numeric", units)
            rho_diff = abs(numeric.rho_star - analytic.rho_star) / analytic.rho_star
            min_diff = (abs(numeric.minimum - analytic.minimum)
                        / abs(analytic.minimum) if analytic.minimum != 0 else 0.0)
            print(f"target={tgt} omega_rad_s={_fmt(omega)}", file=fh)
            print(f"  analytic: rho_star={_fmt(analytic.rho_star)} "
                  f"minimum={_fmt(analytic.minimum)}", file=fh)
            print(f"  numeric:  rho_star={_fmt(numeric.rho_star)} "
                  f"minimum={_fmt(numeric.minimum)}", file=fh)
            print(f"  relative_difference: rho_star={rho_diff:.3e} "
                  f"minimum={min_diff:.3e}", file=fh)
    return 0


def _load_thresholds(path) -> CheckThresholds:
    if path is None:
        return CheckThresholds()
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as err:
            raise ValidationError(f"thresholds file is not valid JSON: {err}") from None
    fields = {f for f in CheckThresholds.__dataclass_fields__}
    unknown = set(raw) - fields
    if unknown:
        raise ValidationError(f"unknown threshold keys: {sorted(unknown)}; "
                              f"expected a subset of {sorted(fields)}")
    return CheckThresholds(**{k: float(v) for k, v in raw.items()})


def cmd_verify(cfg: RunConfig, args) -> int:
    _, _, units = _resolve(cfg, args)
    thresholds = _load_thresholds(args.thresholds)
    results = run_consistency_checks(cfg.system, cfg.grid.omegas(), units, thresholds)
    with _open_out(args.out) as fh:
        for r in results:
            status = "PASS" if r.passed else "FAIL"
            detail = f" ({r.detail})" if r.detail else ""
            print(f"{status} {r.name}: measured={r.measured:.3e} "
                  f"threshold={r.threshold:.3e}{detail}", file=fh)
        failed = [r for r in results if not r.passed]
        print(f"{len(results) - len(failed)}/{len(results)} checks passed", file=fh)
    if any(r.numerical_error for r in results):
        return 3
    return 4 if failed else 0


def cmd_sweep_gain(cfg: RunConfig, args) -> int:
    _, _, units = _resolve(cfg, args)
    try:
        gains = [float(g) for g in args.gains.split(",") if g.strip()]
    except ValueError as err:
        raise UsageError(f"--gains must be comma-separated numbers: {err}") from None
    if not gains:
        raise UsageError("--gains list is empty")
    if any(g < 0 for g in gains):
        raise UsageError("--gains must be >= 0")
    grid = cfg.grid.omegas()
    with _open_out(args.out) as fh:
        writer = csv.writer(fh)
        writer.writerow(["gain_abs", "max_defect"])
        for g in gains:
            worst = 0.0
            for omega in grid:
                for label in SWEEP_SOURCES:
                    worst = max(worst, convergence_defect(cfg.system, float(omega),
                                                          label, g))
            writer.writerow([_fmt(g), _fmt(worst)])
    return 0


_DISPATCH = {"spectrum": cmd_spectrum, "optimize": cmd_optimize,
             "verify": cmd_verify, "sweep-gain": cmd_sweep_gain}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse already printed its diagnostic; fold every usage exit onto 1.
        return 0 if exc.code == 0 else 1
    try:
        cfg = load_config(args.config)
        return _DISPATCH[args.command](cfg, args)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except NumericalError as err:
        print(f"error: {err}", file=sys.stderr)
        return 3
    except (ValidationError, DragfreeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
