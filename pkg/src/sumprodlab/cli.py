"""Command-line front end: experiment drivers with CSV output and margin summaries.

Exit codes: 0 when every asserted invariant held, 2 when an invariant was
violated (margins below zero, fuzz violations, failed collapse bounds), 1 for
usage, configuration or resource errors.  CSV files are written atomically
(temp file + rename) with LF newlines and 9-significant-digit floats so that
identical configs reproduce byte-identical output.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import tempfile
from fractions import Fraction

from .config import ExperimentConfig, parse_config, parse_levels
from .errors import ConsistencyError, LabError
from .fuzz import run_all_fuzz
from .gridmeasure import GridMeasure
from .ifs import dimension, parse_ifs_spec, pushforward_monotone, render_measure
from .inequalities import (covering_rows_from_main, sharpness_experiment,
                           verify_main_inequality)
from .projection import product_measure, radial_integral, tube_energy
from .regularity import ahlfors_check

MAIN_HEADER = ["family", "N", "c", "s", "eta", "level", "H_sum", "H_prod",
               "H_triple", "H_x", "lhs_bits", "rhs_target", "margin_bits",
               "cover_sum", "cover_prod"]


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".9g")
    return str(value)


def write_csv(path: str, header: list[str], rows: list[list]) -> None:
    """Atomic CSV write: UTF-8, LF, comma-separated, one header row."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _main_rows_to_csv(rows) -> list[list]:
    return [[r.family, r.n_maps, r.contraction, r.dimension_s, r.eta,
             r.delta_level, r.h_sum, r.h_prod, r.growth_bits, r.entropy_x,
             r.lhs_bits, r.rhs_target, r.margin_bits, r.cover_sum,
             r.cover_prod] for r in rows]


def run_main_theorem(cfg: ExperimentConfig) -> int:
    family = parse_ifs_spec(cfg.family)
    rows = verify_main_inequality(family, cfg.eta, cfg.delta_levels,
                                  guard=cfg.guard, budget=cfg.budget_cells)
    cover = covering_rows_from_main(rows)
    write_csv(cfg.output_path, MAIN_HEADER, _main_rows_to_csv(rows))
    s = rows[0].dimension_s
    print(f"family {cfg.family}: dimension {s:.6g}, routed {rows[0].routed_family}")
    bad = False
    for r, c in zip(rows, cover):
        growth_targets = (
            f"growth targets {(1 - cfg.eta) * (min(2 * s, 1) - 2 * cfg.sigma) * r.delta_level:.2f}"
            f"/{2 * (1 - cfg.eta) * (s - cfg.sigma) * r.delta_level:.2f} bits")
        print(f"  level {r.delta_level}: lhs {r.lhs_bits:.2f} vs target "
              f"{r.rhs_target:.2f} (margin {r.margin_bits:+.2f}); growth "
              f"{r.growth_bits:.2f} ({growth_targets}); cover margin "
              f"{c.product_form_margin:+.2f}")
        if r.margin_bits < 0 or c.product_form_margin < 0:
            bad = True
    return 2 if bad else 0


def run_sharpness(cfg: ExperimentConfig) -> int:
    if cfg.family:
        fam = parse_ifs_spec(cfg.family)
        n_list = [fam.n_maps]
        contraction = lambda n: fam.ratio  # noqa: E731
    else:
        n_list = [4, 16, 64]
        contraction = lambda n: Fraction(1, 2 * n)  # noqa: E731
    rows = sharpness_experiment(n_list, cfg.delta_levels, guard=cfg.guard,
                                eta=cfg.eta, contraction_of=contraction,
                                budget=cfg.budget_cells)
    csv_rows = [[r.family, r.n_maps, r.contraction, r.dimension_s, r.eta,
                 r.delta_level, r.h_sum, r.h_prod, math.nan, r.entropy_x,
                 r.lhs_bits, r.rhs_target, r.margin_bits, r.cover_sum,
                 r.cover_prod] for r in rows]
    write_csv(cfg.output_path, MAIN_HEADER, csv_rows)
    bad = False
    for r in rows:
        print(f"  N={r.n_maps} level {r.delta_level}: ratio {r.ratio:.3f} vs "
              f"exponent {r.rhs_target / r.delta_level:.3f} (excess "
              f"{r.excess:+.3f}); sumset cover {r.cover_sum} <= "
              f"{r.ap_cover_bound}: {'ok' if r.collapse_ok else 'VIOLATED'}")
        if not r.collapse_ok:
            bad = True
    return 2 if bad else 0


def run_fuzz(cfg: ExperimentConfig) -> int:
    reports = run_all_fuzz(cfg.seed, cfg.trials)
    write_csv(cfg.output_path,
              ["check", "trials", "violations", "worst_slack"],
              [[r.check, r.trials, r.violations, r.worst_slack] for r in reports])
    bad = False
    for r in reports:
        status = "ok" if r.ok else f"{r.violations} VIOLATIONS ({r.first_counterexample})"
        print(f"  {r.check}: {r.trials} trials, {status}")
        if not r.ok:
            bad = True
    return 2 if bad else 0


def _projection_inputs(cfg: ExperimentConfig, level: int):
    family = parse_ifs_spec(cfg.family)
    base_measure = render_measure(family, level, cfg.budget_cells)
    shifted = pushforward_monotone(base_measure, ("affine", 1.0, 1.0), level)
    mu2 = product_measure(shifted, base_measure)
    return mu2, base_measure


def run_projection_scan(cfg: ExperimentConfig) -> int:
    rows = []
    bad = False
    for level in sorted(cfg.delta_levels):
        mu2, nu = _projection_inputs(cfg, level)
        integral = radial_integral(mu2, nu, cfg.sigma, level)
        # worst base point: largest tube energy, hence smallest collision bits
        worst = 0.0
        for zc in nu.cell_centers().tolist():
            worst = max(worst, tube_energy(mu2, (0.0, zc), level).energy)
        rows.append([level, cfg.sigma, 2.0 ** (cfg.sigma * level), integral,
                     worst, -math.log2(worst)])
        print(f"  level {level}: radial integral {integral:.4f}, tube collision "
              f">= {-math.log2(worst):.2f} bits")
        if not -1e-12 <= integral <= 1.0 + 1e-12:
            bad = True
    write_csv(cfg.output_path,
              ["level", "sigma", "threshold", "integral_value", "tube_energy",
               "collision_bits"], rows)
    return 2 if bad else 0


def run_regularity(cfg: ExperimentConfig) -> int:
    family = parse_ifs_spec(cfg.family)
    s = dimension(family)
    rows = []
    for level in sorted(cfg.delta_levels):
        m = render_measure(family, level, cfg.budget_cells)
        report = ahlfors_check(m, s, include_upper=True)
        rows.append([report.exponent, report.frostman_constant,
                     report.lower_constant, report.upper_regular_constant,
                     report.level])
        print(f"  level {level}: s={s:.4f} frostman {report.frostman_constant:.3f} "
              f"lower {report.lower_constant:.3f} upper "
              f"{report.upper_regular_constant:.3f}")
    write_csv(cfg.output_path,
              ["exponent", "frostman_c", "lower_c", "upper_c", "level"], rows)
    return 0


_RUNNERS = {
    "main-theorem": (run_main_theorem, True),
    "sharpness": (run_sharpness, False),
    "fuzz-inequalities": (run_fuzz, False),
    "projection-scan": (run_projection_scan, True),
    "regularity": (run_regularity, True),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sumprodlab",
        description="Entropy experiments for sums and products of self-similar measures")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in _RUNNERS:
        p = sub.add_parser(name)
        p.add_argument("--family", help="IFS family, e.g. ap:N=2,c=1/4")
        p.add_argument("--eta", type=float)
        p.add_argument("--levels", help="comma-separated dyadic levels")
        p.add_argument("--sigma", type=float)
        p.add_argument("--guard", type=int)
        p.add_argument("--budget-cells", type=int, dest="budget_cells")
        p.add_argument("--seed", type=int)
        p.add_argument("--trials", type=int)
        p.add_argument("--out", help="output CSV path")
        p.add_argument("--config", help="key=value config file")
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            cfg = parse_config(fh.read(), require_family=False)
    else:
        cfg = ExperimentConfig()
    cfg = cfg.with_overrides(
        family=args.family,
        eta=args.eta,
        delta_levels=parse_levels(args.levels) if args.levels else None,
        sigma=args.sigma,
        guard=args.guard,
        budget_cells=args.budget_cells,
        seed=args.seed,
        trials=args.trials,
        output_path=args.out,
    )
    if not cfg.output_path:
        cfg = cfg.with_overrides(output_path=f"{args.subcommand}.csv")
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    runner, needs_family = _RUNNERS[args.subcommand]
    try:
        cfg = resolve_config(args)
        if needs_family and not cfg.family:
            raise LabError("this subcommand requires --family (or family= in the config)")
        code = runner(cfg)
    except ConsistencyError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 2
    except LabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if code == 0:
        print("all asserted invariants hold")
    return code


if __name__ == "__main__":
    sys.exit(main())
