"""Command-line surface: witness, collectibility, simulate, werner-sweep, reduce.

Reports are emitted as a human table, CSV or JSON; writing a report to a file
also renders the matching matplotlib figure next to it (disable with
--no-figures).  Exit codes: 0 success, 1 input/validation error, 2 numerical
degeneracy.
"""

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from .errors import (
    BranchDegenerateError,
    CountsSchemaError,
    DegenerateDenominatorError,
    MissingSettingError,
    RadicandNegativeError,
    StateValidationError,
)
from .reports import Report, metadata, render
from .simulate import (
    NOISE_PRESETS,
    NoiseModel,
    bootstrap_sigma,
    ratio_variance,
    read_counts,
    run_campaign,
    twofold_product_records,
    werner_mix,
    witness_from_counts,
    write_counts,
)
from .states import (
    KET_H,
    bell_state,
    load_density_matrix,
    maximally_mixed_state,
    project_qubit_a,
    purity,
    separable_state,
)
from .witness import (
    Y_PURE_THRESHOLD,
    collectibility_profile,
    max_collectibility,
    negativity,
    werner_state,
    werner_witness_closed_form,
    witness_W,
)

DEFAULT_TRIALS = 10**6
DEFAULT_SEED = 7
OUTDIR_ENV = "QCOLLECT_OUTDIR"

WERNER_SEPARABILITY_THRESHOLD = 1.0 / 3.0
WERNER_DETECTABILITY_THRESHOLD = math.sqrt(3.0) / 2.0

STATE_PRESETS = {
    "bell": bell_state,
    "separable": separable_state,
    "mixed": maximally_mixed_state,
}


class _Parser(argparse.ArgumentParser):
    """argparse parser whose usage errors exit 1 (input/validation)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _add_common(parser):
    parser.add_argument(
        "--format", choices=("table", "csv", "json"), default="table",
        help="report format (default: table)",
    )
    parser.add_argument(
        "--output", metavar="PATH",
        help="write the report to PATH instead of stdout",
    )
    parser.add_argument(
        "--outdir", metavar="DIR",
        default=os.environ.get(OUTDIR_ENV, "."),
        help=f"directory for default-named artifacts (default: ${OUTDIR_ENV} or '.')",
    )
    parser.add_argument(
        "--no-figures", action="store_true",
        help="do not render figures next to file output",
    )
    parser.add_argument(
        "--seed", type=int, default=DEFAULT_SEED,
        help=f"RNG seed, recorded in every report (default: {DEFAULT_SEED})",
    )


def _add_state_source(parser):
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument(
        "--state", metavar="NAME",
        help="state preset: bell, separable, mixed or werner:P",
    )
    group.add_argument(
        "--state-file", metavar="PATH",
        help="density-matrix JSON document (key 'rho', 4x4 [re, im] pairs)",
    )


def _resolve_state(args):
    """Return (label, rho) from the single configured state source."""
    if args.state_file:
        rho = load_density_matrix(args.state_file)
        return Path(args.state_file).stem, rho
    name = args.state
    if name in STATE_PRESETS:
        return name, STATE_PRESETS[name]()
    if name.startswith("werner:"):
        try:
            p = float(name.split(":", 1)[1])
        except ValueError:
            raise StateValidationError("state", f"bad Werner parameter in {name!r}") from None
        return name, werner_state(p)
    raise StateValidationError(
        "state", f"unknown preset {name!r}; expected bell, separable, mixed or werner:P"
    )


def _natural_xi(rho):
    """Probability that the locally projected photon is horizontal."""
    _, p_h = project_qubit_a(rho, KET_H)
    return p_h


def _emit(report, args, figure_hook=None):
    text = render(report, args.format)
    if args.output:
        out = Path(args.output)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)
        if figure_hook is not None and not args.no_figures:
            figure_hook(out.with_suffix(""))
    else:
        sys.stdout.write(text)


def _verdict(w):
    return "entangled (W < 0)" if w < 0.0 else "not detected (W >= 0)"


# ----------------------------- commands -----------------------------


def cmd_witness(args):
    label, rho = _resolve_state(args)
    value = witness_W(rho)
    neg = negativity(rho)
    config = {"command": "witness", "state": label, "seed": args.seed}
    report = Report(
        command="witness",
        meta=metadata(args.seed, config),
        scalars={
            "state": label,
            "method": "analytic",
            "w": value.w,
            "eta": value.eta,
            "z_plus": value.z_plus,
            "z_minus": value.z_minus,
            "x_plus": value.x_plus,
            "x_minus": value.x_minus,
            "p_plus": value.gramm.p_plus,
            "p_minus": value.gramm.p_minus,
            "g_plus": value.gramm.g_plus,
            "g_minus": value.gramm.g_minus,
            "g": value.gramm.g,
            "purity": purity(rho),
            "negativity": neg,
            "verdict": _verdict(value.w),
        },
    )

    def figures(stem):
        from .plots import save_witness_figure

        save_witness_figure(
            str(stem) + "_witness.png",
            {
                "W": value.w,
                "eta": value.eta,
                "G+^2": value.gramm.g_plus**2,
                "G-^2": value.gramm.g_minus**2,
                "2G^2": 2.0 * value.gramm.g**2,
            },
        )

    _emit(report, args, figures)
    return 0


def cmd_collectibility(args):
    label, rho = _resolve_state(args)
    grid_points = args.grid_points
    best = max_collectibility(rho, grid_points=grid_points, tol=args.refine_tol)
    thetas = np.linspace(0.0, math.pi, grid_points)
    ys = collectibility_profile(rho, thetas)
    detected = best.y > Y_PURE_THRESHOLD
    config = {
        "command": "collectibility", "state": label, "seed": args.seed,
        "grid_points": grid_points, "refine_tol": args.refine_tol,
    }
    report = Report(
        command="collectibility",
        meta=metadata(args.seed, config),
        scalars={
            "state": label,
            "y_max": best.y,
            "theta_star": best.theta_star,
            "threshold": Y_PURE_THRESHOLD,
            "verdict": (
                "entangled-if-pure (Y_max > 1/16)" if detected
                else "not detected (pure-state criterion)"
            ),
            "grid_points": grid_points,
        },
        tables={
            "profile": {
                "columns": ["theta", "y"],
                "rows": [[float(t), float(y)] for t, y in zip(thetas, ys)],
            }
        },
    )

    def figures(stem):
        from .plots import save_profile_figure

        save_profile_figure(
            str(stem) + "_profile.png", thetas, ys, best.theta_star, best.y
        )

    _emit(report, args, figures)
    return 0


def _resolve_noise(args, rho, state_label):
    """NoiseModel plus the calibration mode implied by the configuration."""
    if args.noise_preset is not None:
        preset = NOISE_PRESETS[args.noise_preset]
        nu = preset.overlap
        xi_default = preset.xi
    else:
        nu = args.nu if args.nu is not None else 1.0
        xi_default = _natural_xi(rho)
    xi = args.xi if args.xi is not None else xi_default
    noise = NoiseModel(overlap=nu, xi=xi, seed=args.seed)
    calibration = args.calibration
    if calibration == "auto":
        calibration = "known" if state_label == "mixed" else "self"
    return noise, calibration


def cmd_simulate(args):
    label, rho = _resolve_state(args)
    noise, calibration = _resolve_noise(args, rho, label)
    if args.twofold_product:
        records = twofold_product_records(rho, noise, args.trials)
        estimate = witness_from_counts(records, noise.xi)
        result = None
        notes = (
            "twofold-product: four-fold counts synthesized from projection "
            "coincidences times one shared interference run; equivalent to the "
            "direct pipeline only when conditioning does not change the "
            "interfering states (maximally mixed input).",
        )
    else:
        result = run_campaign(rho, noise, args.trials, calibration=calibration)
        records = result.records
        estimate = result.estimate
        notes = estimate.notes

    counts_path = args.counts_out
    if counts_path is None:
        counts_path = str(
            Path(args.outdir) / f"counts_{label.replace(':', '')}_{args.seed}.csv"
        )
    Path(counts_path).parent.mkdir(parents=True, exist_ok=True)
    write_counts(counts_path, records)

    config = {
        "command": "simulate", "state": label, "seed": args.seed,
        "nu": noise.overlap, "xi": noise.xi, "trials": args.trials,
        "calibration": calibration, "twofold_product": args.twofold_product,
        "counts_out": counts_path,
    }
    scalars = {
        "state": label,
        "method": "from-counts",
        "trials_per_setting": args.trials,
        "nu": noise.overlap,
        "ccn_over_ccb_true": 1.0 - noise.overlap,
        "xi": noise.xi,
        "calibration": "twofold" if args.twofold_product else calibration,
        "w": estimate.w,
        "sigma_w": estimate.sigma_w,
        "verdict": _verdict(estimate.w),
        "counts_file": counts_path,
    }
    if result is not None:
        scalars["ccn_estimate_counts"] = result.ccn_count
        scalars["ccn_over_ccb_selfcal"] = result.ccn_relative
        scalars["ccn_over_ccb_applied"] = result.relative_applied
    if args.bootstrap:
        scalars["sigma_w_bootstrap"] = bootstrap_sigma(
            records, noise.xi, seed=args.seed
        )
    ratio_rows, ratio_sigmas = _ratio_table(records, estimate)
    report = Report(
        command="simulate",
        meta=metadata(args.seed, config),
        scalars=scalars,
        tables={"ratios": {"columns": ["pair", "ratio", "sigma"], "rows": ratio_rows}},
        notes=notes,
    )

    def figures(stem):
        from .plots import save_ratio_figure

        save_ratio_figure(str(stem) + "_ratios.png", estimate.ratios, ratio_sigmas)

    _emit(report, args, figures)
    return 0


def _ratio_table(records, estimate):
    by_pair = {rec.pair: rec for rec in records}
    rows = []
    sigmas = {}
    for pair, ratio in estimate.ratios.items():
        if ratio is None:
            rows.append([pair, None, None])
            continue
        sigma = math.sqrt(max(ratio_variance(by_pair[pair]), 0.0))
        sigmas[pair] = sigma
        rows.append([pair, float(ratio), sigma])
    return rows, sigmas


def cmd_werner_sweep(args):
    try:
        grid = [float(tok) for tok in args.grid.split(",") if tok.strip() != ""]
    except ValueError:
        raise StateValidationError("grid", f"bad grid {args.grid!r}") from None
    if not grid or any(not 0.0 <= p <= 1.0 for p in grid):
        raise StateValidationError("grid", "grid values must lie in [0, 1]")

    if args.noise_presets:
        nu_bell = NOISE_PRESETS["bell"].overlap
        nu_mixed = NOISE_PRESETS["mixed"].overlap
    else:
        nu_bell = nu_mixed = args.nu if args.nu is not None else 1.0

    bell_noise = NoiseModel(overlap=nu_bell, xi=0.5, seed=args.seed)
    mixed_noise = NoiseModel(overlap=nu_mixed, xi=0.5, seed=args.seed + 1)
    bell_run = run_campaign(bell_state(), bell_noise, args.trials, calibration="self")
    mixed_run = run_campaign(
        maximally_mixed_state(), mixed_noise, args.trials, calibration="known"
    )

    rows = []
    ws, sigmas = [], []
    for p in grid:
        mixed_records = werner_mix(bell_run.records, mixed_run.records, p)
        est = witness_from_counts(mixed_records, 0.5)
        rows.append([float(p), est.w, est.sigma_w, werner_witness_closed_form(p)])
        ws.append(est.w)
        sigmas.append(est.sigma_w)

    config = {
        "command": "werner-sweep", "grid": grid, "seed": args.seed,
        "trials": args.trials, "nu_bell": nu_bell, "nu_mixed": nu_mixed,
    }
    report = Report(
        command="werner-sweep",
        meta=metadata(args.seed, config),
        scalars={
            "trials_per_setting": args.trials,
            "nu_bell": nu_bell,
            "nu_mixed": nu_mixed,
            "xi": 0.5,
            "separability_threshold_p": WERNER_SEPARABILITY_THRESHOLD,
            "detectability_threshold_p": WERNER_DETECTABILITY_THRESHOLD,
        },
        tables={"sweep": {"columns": ["p", "w", "sigma_w", "w_closed_form"], "rows": rows}},
        notes=bell_run.estimate.notes + mixed_run.estimate.notes,
    )

    def figures(stem):
        from .plots import save_werner_figure

        save_werner_figure(
            str(stem) + "_sweep.png", grid, ws, sigmas, w_closed=True
        )

    _emit(report, args, figures)
    return 0


def cmd_reduce(args):
    records = read_counts(args.counts_file)
    estimate = witness_from_counts(records, args.xi)
    scalars = {
        "counts_file": args.counts_file,
        "method": "from-counts",
        "xi": args.xi,
        "w": estimate.w,
        "sigma_w": estimate.sigma_w,
        "verdict": _verdict(estimate.w),
    }
    if args.bootstrap:
        scalars["sigma_w_bootstrap"] = bootstrap_sigma(records, args.xi, seed=args.seed)
    config = {
        "command": "reduce", "counts_file": args.counts_file,
        "xi": args.xi, "seed": args.seed,
    }
    ratio_rows, ratio_sigmas = _ratio_table(records, estimate)
    report = Report(
        command="reduce",
        meta=metadata(args.seed, config),
        scalars=scalars,
        tables={"ratios": {"columns": ["pair", "ratio", "sigma"], "rows": ratio_rows}},
        notes=estimate.notes,
    )

    def figures(stem):
        from .plots import save_ratio_figure

        save_ratio_figure(str(stem) + "_ratios.png", estimate.ratios, ratio_sigmas)

    _emit(report, args, figures)
    return 0


# ----------------------------- parser -----------------------------


def build_parser():
    parser = _Parser(
        prog="qcollect",
        description="Collectibility entanglement witness: analytic evaluation "
        "and a four-photon coincidence Monte Carlo.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_witness = sub.add_parser(
        "witness", help="analytic witness W, Gramm elements, purity, negativity"
    )
    _add_state_source(p_witness)
    _add_common(p_witness)
    p_witness.set_defaults(func=cmd_witness)

    p_coll = sub.add_parser(
        "collectibility", help="collectibility profile Y(theta) and its maximum"
    )
    _add_state_source(p_coll)
    _add_common(p_coll)
    p_coll.add_argument(
        "--grid-points", type=int, default=181,
        help="dense-scan resolution over theta in [0, pi] (default: 181)",
    )
    p_coll.add_argument(
        "--refine-tol", type=float, default=1e-6,
        help="golden-section refinement tolerance on theta (default: 1e-6)",
    )
    p_coll.set_defaults(func=cmd_collectibility)

    p_sim = sub.add_parser(
        "simulate", help="run a simulated coincidence campaign and reduce it"
    )
    _add_state_source(p_sim)
    _add_common(p_sim)
    noise_group = p_sim.add_mutually_exclusive_group()
    noise_group.add_argument(
        "--noise-preset", choices=sorted(NOISE_PRESETS),
        help="measured noise/balance preset for the reference states",
    )
    noise_group.add_argument(
        "--nu", type=float, help="two-photon mode overlap nu in [0, 1] (default: 1.0)"
    )
    p_sim.add_argument(
        "--xi", type=float,
        help="preparation balance xi (default: preset value, or p_H of the state)",
    )
    p_sim.add_argument(
        "--trials", type=float, default=DEFAULT_TRIALS,
        help=f"trials per setting (default: {DEFAULT_TRIALS})",
    )
    p_sim.add_argument(
        "--calibration", choices=("auto", "self", "known", "none"), default="auto",
        help="noise-subtraction mode (auto: 'known' for the mixed preset, "
        "'self' otherwise)",
    )
    p_sim.add_argument(
        "--twofold-product", action="store_true",
        help="synthesize four-fold counts from two-fold rates (comparison mode)",
    )
    p_sim.add_argument(
        "--counts-out", metavar="PATH",
        help="counts dataset path (default: <outdir>/counts_<state>_<seed>.csv)",
    )
    p_sim.add_argument(
        "--bootstrap", action="store_true",
        help="also report the 1000-resample bootstrap sigma",
    )
    p_sim.set_defaults(func=cmd_simulate)

    p_sweep = sub.add_parser(
        "werner-sweep",
        help="interpolate Werner states from one Bell and one mixed campaign",
    )
    _add_common(p_sweep)
    p_sweep.add_argument(
        "--grid", default="0,0.25,0.5,0.75,1.0",
        help="comma-separated Werner parameters (default: 0,0.25,0.5,0.75,1.0)",
    )
    p_sweep.add_argument(
        "--trials", type=float, default=DEFAULT_TRIALS,
        help=f"trials per setting (default: {DEFAULT_TRIALS})",
    )
    sweep_noise = p_sweep.add_mutually_exclusive_group()
    sweep_noise.add_argument(
        "--nu", type=float, help="mode overlap for both campaigns (default: 1.0)"
    )
    sweep_noise.add_argument(
        "--noise-presets", action="store_true",
        help="use the measured bell/mixed noise presets instead of --nu",
    )
    p_sweep.set_defaults(func=cmd_werner_sweep)

    p_reduce = sub.add_parser(
        "reduce", help="reconstruct the witness from an existing counts dataset"
    )
    p_reduce.add_argument("counts_file", help="counts dataset (CSV) to reduce")
    p_reduce.add_argument(
        "--xi", type=float, default=0.5,
        help="preparation balance xi used in the reconstruction (default: 0.5)",
    )
    p_reduce.add_argument(
        "--bootstrap", action="store_true",
        help="also report the 1000-resample bootstrap sigma",
    )
    _add_common(p_reduce)
    p_reduce.set_defaults(func=cmd_reduce)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "trials"):
        trials = int(args.trials)
        if trials <= 0:
            parser.error("--trials must be positive")
        args.trials = trials
    try:
        return args.func(args)
    except (StateValidationError, CountsSchemaError, MissingSettingError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except (DegenerateDenominatorError, RadicandNegativeError, BranchDegenerateError) as exc:
        sys.stderr.write(f"numerical degeneracy: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
