"""Command-line pipeline: simulate, estimate, sweep, reconstruct.

Exit codes: 0 on success, 2 for usage or validation problems, 3 when the
supplied data are too degenerate to estimate from.  The only environment
variable honored is ``CZFID_LOG_LEVEL``.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import io
from .core import cz_choi, process_fidelity
from .estimators import (
    EXPANSIONS,
    FidelityReport,
    bound_gap_decomposition,
    hofmann_bounds,
    monte_carlo_fidelity,
    monte_carlo_fidelity_renormalized,
)
from .exceptions import DegenerateDataError
from .model import model_fidelity, model_hofmann_curves
from .simulate import ExperimentConfig, simulate_counts
from .tomography import MaxLikSettings, bootstrap_fidelity_uncertainty, maxlik_reconstruct


def format_uncertainty(value: float, sigma: float | None) -> str:
    """Render ``value`` with its error in parenthesis notation, e.g. 0.860(1)."""
    if sigma is None or not np.isfinite(sigma) or sigma <= 0:
        return f"{value:.4f}"
    exponent = math.floor(math.log10(sigma))
    digit = round(sigma / 10.0**exponent)
    if digit == 10:
        digit = 1
        exponent += 1
    if exponent >= 0:
        return f"{value:.0f}({digit * 10**exponent})"
    decimals = -exponent
    return f"{value:.{decimals}f}({digit})"


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def cmd_simulate(args: argparse.Namespace) -> int:
    payload, _ = io.read_config(args.config)
    if "seed" not in payload:
        payload["seed"] = int.from_bytes(os.urandom(8), "big") >> 1
    config = io.parse_config(payload, base_dir=Path(args.config).parent)
    table, references = simulate_counts(config)
    paths = io.simulate_to_files(config, table, references, args.out_dir, config_echo=payload)
    print(f"wrote {paths['counts']} ({int(table.total)} coincidences, seed {config.seed})")
    print(f"wrote {paths['references']}")
    print(f"wrote {paths['config']}")
    return 0


def _expansion_list(flag: str) -> list[str]:
    return list(EXPANSIONS) if flag == "all" else [flag]


def cmd_estimate(args: argparse.Namespace) -> int:
    counts, metadata = io.read_counts_csv(args.counts)
    references = io.read_references_csv(args.references) if args.references else None
    if args.renormalize and references is None:
        raise ValueError("--renormalize requires --references")

    expansions = _expansion_list(args.expansion)
    settings = MaxLikSettings(
        stop_threshold=args.stop_threshold, max_iterations=args.max_iterations
    )
    result = maxlik_reconstruct(counts, settings=settings)
    f_chi = process_fidelity(result.chi, cz_choi())
    f_chi_sigma = None
    if args.bootstrap > 0:
        f_chi_sigma = bootstrap_fidelity_uncertainty(
            result.chi, float(counts.sum()), n_runs=args.bootstrap,
            seed=args.seed, settings=settings,
        )

    f_mc = {label: monte_carlo_fidelity(counts, label) for label in expansions}
    f_mc_renorm = None
    if args.renormalize:
        f_mc_renorm = {
            label: monte_carlo_fidelity_renormalized(counts, references, label)
            for label in expansions
        }
    hofmann = None
    hofmann_invalid = None
    try:
        hofmann = hofmann_bounds(counts)
    except DegenerateDataError as exc:
        hofmann_invalid = str(exc)
        print(f"warning: state-fidelity bounds unavailable: {exc}", file=sys.stderr)

    provenance = {
        "counts_file": str(args.counts),
        "counts_sha256": _sha256(Path(args.counts)),
        "references_file": str(args.references) if args.references else None,
        "expansions": expansions,
        "bootstrap_runs": args.bootstrap,
        "bootstrap_seed": args.seed if args.bootstrap > 0 else None,
        "metadata": metadata,
    }
    report = FidelityReport(
        f_chi=f_chi,
        f_chi_sigma=f_chi_sigma,
        f_mc=f_mc,
        f_mc_renormalized=f_mc_renorm,
        hofmann=hofmann,
        gap_term=None if hofmann is None else bound_gap_decomposition(hofmann),
        hofmann_invalid=hofmann_invalid,
        tomography={
            "iterations": result.iterations,
            "residual": result.final_residual,
            "converged": result.converged,
            "log_likelihood": result.log_likelihood,
        },
        provenance=provenance,
    )
    report_path = args.report or Path(args.counts).with_suffix(".report.json")
    io.write_json(report_path, report.as_dict())

    if not result.converged:
        print("warning: reconstruction did not reach the stopping threshold", file=sys.stderr)
    _print_report(report)
    print(f"\nreport written to {report_path}")
    return 0


def _print_report(report: FidelityReport) -> None:
    hof = report.hofmann
    first = report.provenance["expansions"][0]
    if hof is None:
        invalid = f"invalid ({report.hofmann_invalid})"
        rows = [
            ("F_D", invalid),
            ("F_H", invalid),
            ("F_chi", format_uncertainty(report.f_chi, report.f_chi_sigma)),
            (f"F_MC ({first})", format_uncertainty(*report.f_mc[first])),
            ("min(F1,F2)", invalid),
        ]
    else:
        rows = [
            ("F_D", format_uncertainty(hof.f_d, hof.sigma_f_d)),
            ("F_H", format_uncertainty(hof.f_h, hof.sigma_f_h)),
            ("F_chi", format_uncertainty(report.f_chi, report.f_chi_sigma)),
            (f"F_MC ({first})", format_uncertainty(*report.f_mc[first])),
            ("min(F1,F2)", format_uncertainty(hof.min_f12, None)),
        ]
    print("process fidelity estimates")
    for name, value in rows:
        print(f"  {name:<12} {value}")
    print("\nlinear estimators per identity expansion")
    header = f"  {'sigma0':<8} {'F_MC':<12}"
    if report.f_mc_renormalized is not None:
        header += "F_MC (renormalized)"
    print(header)
    for label in report.provenance["expansions"]:
        line = f"  {label.upper()[0]}/{label.upper()[1]:<6} {format_uncertainty(*report.f_mc[label]):<12}"
        if report.f_mc_renormalized is not None:
            line += format_uncertainty(*report.f_mc_renormalized[label])
        print(line)


def cmd_sweep(args: argparse.Namespace) -> int:
    with open(args.spec, encoding="utf-8") as handle:
        spec = json.load(handle)
    grid = spec.get("grid") or {}
    try:
        start, stop, points = float(grid["start"]), float(grid["stop"]), int(grid["points"])
    except KeyError as exc:
        raise ValueError(f"sweep spec grid is missing {exc}") from exc
    if points < 2:
        raise ValueError(f"sweep grid needs at least 2 points, got {points}")
    if not (0.0 <= start <= 1.0 and 0.0 <= stop <= 1.0):
        raise ValueError(f"sweep grid must lie within [0, 1], got [{start}, {stop}]")
    analytic = bool(spec.get("analytic_only", True))
    visibilities = np.linspace(start, stop, points)

    lines = ["V,F_chi,F_H,F_D"]
    if analytic:
        for v in visibilities:
            _, _, f_h, f_d = model_hofmann_curves(float(v))
            lines.append(f"{float(v)!r},{model_fidelity(float(v))!r},{f_h!r},{f_d!r}")
    else:
        overrides = spec.get("config") or {}
        seeds = np.random.SeedSequence(int(spec.get("seed", 0))).spawn(points)
        settings = MaxLikSettings()
        for v, seed_seq in zip(visibilities, seeds):
            config = ExperimentConfig(
                pair_rate=float(overrides.get("pair_rate", 1e4)),
                visibility=float(v),
                seed=int(seed_seq.generate_state(1)[0]),
                noise_admixture=float(overrides.get("noise_admixture", 0.0)),
            )
            table, _ = simulate_counts(config)
            result = maxlik_reconstruct(table.counts, settings=settings)
            f_chi = process_fidelity(result.chi, cz_choi())
            hof = hofmann_bounds(table.counts)
            lines.append(f"{float(v)!r},{f_chi!r},{hof.f_h!r},{hof.f_d!r}")
    io.atomic_write_text(args.out_csv, "\n".join(lines) + "\n")
    print(f"wrote {args.out_csv} ({points} grid points, {'analytic' if analytic else 'simulated'})")
    return 0


def cmd_reconstruct(args: argparse.Namespace) -> int:
    counts, _ = io.read_counts_csv(args.counts)
    settings = MaxLikSettings(
        stop_threshold=args.stop_threshold,
        max_iterations=args.max_iterations,
        trace_target=args.trace_target,
    )
    result = maxlik_reconstruct(counts, settings=settings)
    io.write_choi_csv(args.out, result.chi)
    if not result.converged:
        print("warning: reconstruction did not reach the stopping threshold", file=sys.stderr)
    print(
        f"wrote {args.out} (iterations {result.iterations}, residual {result.final_residual:.3e}, "
        f"F vs CZ {process_fidelity(result.chi, cz_choi()):.6f})"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="czfid",
        description="Simulate two-photon CZ-gate datasets and compare process-fidelity estimators.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="draw a synthetic coincidence dataset from a config")
    sim.add_argument("config", type=Path, help="experiment config JSON")
    sim.add_argument("out_dir", type=Path, help="output directory for counts/references/config")
    sim.set_defaults(func=cmd_simulate)

    est = sub.add_parser("estimate", help="run all fidelity estimators on a counts file")
    est.add_argument("counts", type=Path, help="counts CSV")
    est.add_argument("--references", type=Path, help="reference-counts CSV")
    est.add_argument(
        "--expansion", choices=("hv", "da", "rl", "all"), default="all",
        help="identity-operator expansion(s) for the linear estimator",
    )
    est.add_argument(
        "--renormalize", action="store_true",
        help="also evaluate the linear estimator on drift-renormalized counts",
    )
    est.add_argument(
        "--bootstrap", type=int, default=0, metavar="N",
        help="parametric-bootstrap runs for the tomography fidelity uncertainty",
    )
    est.add_argument("--seed", type=int, default=0, help="bootstrap seed")
    est.add_argument("--report", type=Path, help="report JSON path (default: alongside counts)")
    est.add_argument("--stop-threshold", type=float, default=1e-5)
    est.add_argument("--max-iterations", type=int, default=100_000)
    est.set_defaults(func=cmd_estimate)

    swp = sub.add_parser("sweep", help="tabulate fidelity curves over a visibility grid")
    swp.add_argument("spec", type=Path, help="sweep spec JSON")
    swp.add_argument("out_csv", type=Path, help="output CSV (columns V,F_chi,F_H,F_D)")
    swp.set_defaults(func=cmd_sweep)

    rec = sub.add_parser("reconstruct", help="maximum-likelihood process matrix from counts")
    rec.add_argument("counts", type=Path, help="counts CSV")
    rec.add_argument("--out", type=Path, required=True, help="output Choi CSV")
    rec.add_argument("--stop-threshold", type=float, default=1e-5)
    rec.add_argument("--max-iterations", type=int, default=100_000)
    rec.add_argument("--trace-target", type=float, default=1.0)
    rec.set_defaults(func=cmd_reconstruct)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("CZFID_LOG_LEVEL", "WARNING"))
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DegenerateDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
