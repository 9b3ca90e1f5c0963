"""
Command-line front end.

Every command resolves its settings as flags > --config JSON file >
defaults and echoes the resolved block to stderr. Primary outputs go to
--out (written atomically) or to stdout.

Exit codes: 0 success, 2 usage or domain error, 3 data error,
4 numerical failure.
"""

import argparse
import json
import logging
import math
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from foukit import __version__
from foukit.config.scenarios import get_scenario, list_scenarios
from foukit.config.schemas import (
    FitReportDocument,
    McStudyConfig,
    ModelDocument,
    WhittleDocument,
)
from foukit.config.settings import echo_resolved, load_config_file, merge_settings, resolve_threads
from foukit.errors import DataError, DomainError, FoukitError, NumericalFailureError
from foukit.estimate.filters import get_filter
from foukit.estimate.pipeline import FitOptions, fit_fou
from foukit.estimate.whittle import WhittleConfig
from foukit.forecast.metrics import MEASURES, all_measures
from foukit.forecast.predictor import empirical_acvf, gaussian_loglik_aic, prediction_run
from foukit.forecast.selection import FIT_TARGETS, TSelectionConfig, select_t
from foukit.io.series import SERIES_FORMATS, path_to_csv, resolve_series, write_atomic
from foukit.model.covariance import acvf_grid
from foukit.model.fou_model import FouModel
from foukit.model.spectral import spectral_density
from foukit.simcore.sampler import SIMULATION_METHODS, SamplePath, SimConfig, simulate
from foukit.simcore.study import ReplicateResult, StudyCell

logger = logging.getLogger("foukit")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4

# Positive half-line; x = 0 is a pole for p = 1 and H > 1/2
DEFAULT_FREQS = "0.1:10:0.1"


def parse_grid(text: str) -> np.ndarray:
    """
    Parse "start:stop:step" (stop included) or a comma-separated list.

    Raises:
        DomainError: If the text is neither form
    """
    text = str(text).strip()
    try:
        if ":" in text:
            start, stop, step = (float(p) for p in text.split(":"))
            if not step > 0 or stop < start:
                raise DomainError(f"grid {text!r} needs step > 0 and stop >= start")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            return start + step * np.arange(count)
        return np.array([float(p) for p in text.split(",") if p.strip()])
    except ValueError as err:
        raise DomainError(f"cannot parse grid {text!r}: {err}") from err


def parse_structure(value: Any) -> Tuple[int, ...]:
    """Multiplicities from "2", "1,1" or a JSON list."""
    if isinstance(value, (list, tuple)):
        parts = list(value)
    else:
        parts = [p for p in str(value).split(",") if p.strip()]
    try:
        structure = tuple(int(p) for p in parts)
    except ValueError as err:
        raise DomainError(f"structure must list positive integers, got {value!r}") from err
    if not structure or any(s < 1 for s in structure):
        raise DomainError(f"structure must list positive integers, got {value!r}")
    return structure


def _read_json_source(source: Any, what: str) -> Any:
    """Inline JSON text, a JSON file path, or an already decoded value."""
    if not isinstance(source, str):
        return source
    text = source
    if not source.lstrip().startswith(("{", "[")):
        path = Path(source)
        if not path.exists():
            raise DataError(f"{what} file not found: {path}")
        text = path.read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as err:
        raise DataError(f"{what} is not valid JSON: {err}") from err


def load_model_source(source: Any) -> FouModel:
    """A model document, or a fit report whose estimates define the model."""
    data = _read_json_source(source, "model")
    if isinstance(data, dict) and "lambda_hat" in data:
        return FitReportDocument.parse_document(data).to_report().to_model()
    return ModelDocument.parse_document(data).to_model()


def load_whittle(source: Any, threads: int) -> WhittleConfig:
    data = _read_json_source(source, "Whittle settings") if source is not None else {}
    return WhittleDocument.parse_document(data).to_config(threads=threads)


def _require(settings: Dict[str, Any], key: str) -> Any:
    value = settings.get(key)
    if value is None:
        raise DomainError(f"--{key.replace('_', '-')} is required (flag or config file)")
    return value


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def _resolve(args: argparse.Namespace, defaults: Dict[str, Any], flags: Dict[str, Any]) -> Dict[str, Any]:
    return merge_settings(defaults, load_config_file(args.config), flags)


def cmd_simulate(args: argparse.Namespace) -> int:
    """Write a simulated sample path as t,x CSV."""
    settings = _resolve(
        args,
        {"model": None, "n": 1000, "T": 100.0, "seed": 0, "method": "exact_gaussian",
         "burn_in": None, "inner_refinement": 4},
        {"model": args.model, "n": args.n, "T": args.T, "seed": args.seed, "method": args.method,
         "burn_in": args.burn_in, "inner_refinement": args.inner_refinement},
    )
    model = load_model_source(_require(settings, "model"))
    cfg = SimConfig(
        seed=int(settings["seed"]),
        method=settings["method"],
        burn_in=settings["burn_in"],
        inner_refinement=int(settings["inner_refinement"]),
    )
    n, horizon = int(settings["n"]), float(settings["T"])
    echo_resolved({"model": model.to_dict(), "n": n, "T": horizon, "sim_config": asdict(cfg)})

    path = simulate(model, n, horizon, cfg)
    _emit(path_to_csv(path), args.out)
    return EXIT_OK


def _fit_options(settings: Dict[str, Any]) -> FitOptions:
    return FitOptions(
        filt=get_filter(settings["filter"]),
        sigma=settings["sigma"],
        hurst=settings["hurst"],
        center=bool(settings["center"]),
        with_covariance=bool(settings.get("with_covariance", False)),
    )


_FIT_DEFAULTS = {
    "series": None, "structure": None, "T": None, "filter": "daubechies2", "whittle": None,
    "sigma": None, "hurst": None, "detrend": False, "format": "auto", "center": True,
    "with_covariance": False, "aic": False, "seed": None,
}


def _fit_flags(args: argparse.Namespace) -> Dict[str, Any]:
    return {
        "series": args.series, "structure": args.structure, "T": args.T, "filter": args.filter,
        "whittle": args.whittle, "sigma": args.sigma, "hurst": args.hurst,
        "detrend": True if args.detrend else None, "format": args.format,
        "center": False if args.no_center else None,
    }


def cmd_fit(args: argparse.Namespace) -> int:
    """Estimate (H, σ, λ) and write the FitReport JSON."""
    flags = _fit_flags(args)
    flags.update(
        with_covariance=True if args.with_covariance else None,
        aic=True if args.aic else None,
    )
    settings = _resolve(args, dict(_FIT_DEFAULTS), flags)
    if args.estimate_sigma:
        settings["sigma"] = None
    threads = resolve_threads(args.threads)

    series = resolve_series(_require(settings, "series"), settings["detrend"], settings["format"])
    structure = parse_structure(_require(settings, "structure"))
    horizon = float(_require(settings, "T"))
    whittle = load_whittle(settings["whittle"], threads)
    options = _fit_options(settings)
    echo_resolved({**settings, "structure": list(structure), "threads": threads})

    path = series.to_path(horizon)
    report = fit_fou(path, structure, whittle, options)
    if settings["aic"]:
        report.loglik, report.aic = gaussian_loglik_aic(
            report.to_model(),
            path,
            hurst_estimated=report.hurst_estimated,
            sigma_estimated=report.sigma_estimated,
            center=options.center,
        )
    logger.info("Fitted %s", report.to_model())
    _emit(report.to_json() + "\n", args.out)
    return EXIT_OK


def _log_replicate_failure(cell: StudyCell, result: ReplicateResult) -> None:
    logger.warning("T=%g n=%d replicate %d failed: %s", cell.horizon, cell.n, result.replicate, result.error)


def cmd_mc_study(args: argparse.Namespace) -> int:
    """Run a Monte Carlo study and write one row per (T, n) cell."""
    if args.list_scenarios:
        for info in list_scenarios():
            sys.stdout.write(f"{info['id']:<24} {info['model']:<32} {info['cells']}\n")
        return EXIT_OK

    if args.scenario:
        base = get_scenario(args.scenario).to_study_config().model_dump(by_alias=True)
    elif args.mc or args.config:
        base = _read_json_source(args.mc or args.config, "Monte Carlo study")
        if not isinstance(base, dict):
            raise DataError("Monte Carlo study document must be a JSON object")
    else:
        raise DomainError("one of --mc, --config or --scenario is required")

    overrides = {
        "m": args.replications,
        "master_seed": args.seed,
        "T_values": None if args.T_values is None else parse_grid(args.T_values).tolist(),
        "n_values": None if args.n_values is None else [int(v) for v in parse_grid(args.n_values)],
        "rate_exponent_alpha": args.alpha,
        "estimate_lambda": False if args.no_lambda else None,
    }
    document = dict(base)
    if "replications" in document and args.replications is not None:
        document.pop("replications")
    document.update({k: v for k, v in overrides.items() if v is not None})
    config = McStudyConfig.parse_document(document)
    threads = resolve_threads(args.threads)
    echo_resolved({**json.loads(config.to_json()), "threads": threads})

    study = config.to_study(threads=threads)
    study.hooks.on_replicate_failure.append(_log_replicate_failure)
    table = study.run(verbose=not args.quiet)
    _emit(table.to_csv(index=False, float_format="%.17g", lineterminator="\n"), args.out)
    return EXIT_OK


def cmd_forecast(args: argparse.Namespace) -> int:
    """One-step predictions of the last m values, their measures and optional T selection."""
    flags = _fit_flags(args)
    flags.update(model=args.model, m=args.m, select_T=args.select_T, criterion=args.criterion,
                 fit_on=args.fit_on)
    defaults = {**_FIT_DEFAULTS, "model": None, "m": 40, "select_T": None, "criterion": "rmse",
                "fit_on": "full"}
    settings = _resolve(args, defaults, flags)
    if args.estimate_sigma:
        settings["sigma"] = None
    threads = resolve_threads(args.threads)

    series = resolve_series(_require(settings, "series"), settings["detrend"], settings["format"])
    values = series.read()
    m = int(settings["m"])
    whittle = load_whittle(settings["whittle"], threads)
    options = _fit_options(settings)
    echo_resolved({**settings, "threads": threads})

    table = None
    if settings["select_T"] is not None:
        structure = parse_structure(_require(settings, "structure"))
        cfg = TSelectionConfig(
            t_grid=tuple(parse_grid(settings["select_T"])),
            criterion=settings["criterion"],
            m_holdout=m,
            fit_on=settings["fit_on"],
            threads=threads,
        )
        horizon, table = select_t(values, structure, cfg, whittle, options)
        model = table.rows[horizon].report.to_model()
        sys.stderr.write(table.format_table() + "\n")
    else:
        horizon = float(_require(settings, "T"))
        if settings["model"] is not None:
            model = load_model_source(settings["model"])
        else:
            structure = parse_structure(_require(settings, "structure"))
            model = fit_fou(SamplePath(values, horizon), structure, whittle, options).to_model()

    path = SamplePath(values, horizon)
    fitter = None
    if args.refit:
        structure = model.multiplicities

        def fitter(past: SamplePath) -> FouModel:
            return fit_fou(past, structure, whittle, options).to_model()

    run = prediction_run(model, path, m, fitter)
    measures = all_measures(run)
    frame = run.to_frame()
    frame.insert(0, "t", path.times[-m:])
    _emit(frame.to_csv(index=False, float_format="%.17g", lineterminator="\n"), args.out)

    summary = {"T": horizon, "m": m, "model": model.to_dict(), "measures": measures}
    summary_text = json.dumps(summary, indent=2) + "\n"
    if args.metrics_out:
        write_atomic(args.metrics_out, summary_text)
    else:
        sys.stderr.write(summary_text)
    if table is not None and args.table_out:
        write_atomic(args.table_out, table.to_frame().to_csv(index=False, float_format="%.17g", lineterminator="\n"))
    return EXIT_OK


def cmd_acvf(args: argparse.Namespace) -> int:
    """Model autocovariances over a lag grid, with an empirical column when a series is given."""
    settings = _resolve(
        args,
        {"model": None, "lags": "0:10:0.1", "series": None, "T": None, "detrend": False},
        {"model": args.model, "lags": args.lags, "series": args.series, "T": args.T,
         "detrend": True if args.detrend else None},
    )
    model = load_model_source(_require(settings, "model"))
    lags = parse_grid(settings["lags"])
    echo_resolved({**settings, "model": model.to_dict()})

    grid = acvf_grid(model, np.unique(np.abs(lags)))
    frame = pd.DataFrame({"lag": grid.lags, "acvf": grid.values})
    if settings["series"] is not None:
        values = resolve_series(settings["series"], settings["detrend"]).read()
        delta = float(_require(settings, "T")) / values.size
        steps = grid.lags / delta
        nearest = np.rint(steps).astype(int)
        usable = (np.abs(steps - nearest) < 1e-9 * np.maximum(1.0, steps)) & (nearest < values.size)
        empirical = empirical_acvf(values, int(nearest[usable].max()) if usable.any() else 0)
        column = np.full(grid.lags.size, np.nan)
        column[usable] = empirical[nearest[usable]]
        frame["empirical"] = column
    _emit(frame.to_csv(index=False, float_format="%.17g", lineterminator="\n"), args.out)
    return EXIT_OK


def cmd_spectrum(args: argparse.Namespace) -> int:
    """Spectral density over a frequency grid."""
    settings = _resolve(
        args,
        {"model": None, "freqs": DEFAULT_FREQS},
        {"model": args.model, "freqs": args.freqs},
    )
    model = load_model_source(_require(settings, "model"))
    freqs = parse_grid(settings["freqs"])
    echo_resolved({**settings, "model": model.to_dict()})

    density = spectral_density(model, freqs)
    frame = pd.DataFrame({"x": freqs, "density": density})
    _emit(frame.to_csv(index=False, float_format="%.17g", lineterminator="\n"), args.out)
    return EXIT_OK


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="Master seed (64-bit unsigned)")
    common.add_argument("--threads", type=int, default=None, help="Worker threads (default: $FOUKIT_THREADS or 1)")
    common.add_argument("--config", type=str, default=None, help="JSON file of settings; flags override it")
    common.add_argument("--out", type=str, default=None, help="Output file (default: stdout)")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Warnings and errors only")
    return common


def _add_fit_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--series", type=str, help="CSV file, or fixture:<name> for a bundled series")
    parser.add_argument("--format", choices=SERIES_FORMATS, default=None, help="Series file layout")
    parser.add_argument("--detrend", action="store_true", help="Remove a linear trend from the series")
    parser.add_argument("--structure", type=str, help='Multiplicities, e.g. "2" or "1,1"')
    parser.add_argument("--T", type=float, default=None, help="Horizon the series is placed on")
    parser.add_argument("--filter", type=str, default=None, help="Filter name or JSON array (default: daubechies2)")
    parser.add_argument("--whittle", type=str, default=None, help="Whittle settings, JSON text or file")
    sigma = parser.add_mutually_exclusive_group()
    sigma.add_argument("--sigma", type=float, default=None, help="Fix σ instead of estimating it")
    sigma.add_argument("--estimate-sigma", action="store_true", help="Estimate σ (default)")
    parser.add_argument("--hurst", type=float, default=None, help="Fix H instead of estimating it")
    parser.add_argument("--no-center", action="store_true", help="Keep the sample mean")


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="foukit",
        description="Simulate, fit and forecast fractional iterated Ornstein-Uhlenbeck processes",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Simulate 5000 points of FOU(0.8^(2)) with H=0.7 on [0, 50]
  foukit simulate --model '{"lambdas":[{"value":0.8,"mult":2}],"sigma":1,"hurst":0.7}' \\
      --n 5000 --T 50 --seed 7 --out path.csv

  # Fit FOU(λ^(2)) to Series A placed on [0, 12]
  foukit fit --series fixture:series_a --structure 2 --T 12 --out fit.json

  # Desk-scale Monte Carlo check
  foukit mc-study --scenario desk_double_root_h07 --threads 4 --out table.csv

  # Choose T for Series A by RMSE of the last 50 one-step predictions
  foukit forecast --series fixture:series_a --structure 2 --select-T 7:25:1 --m 50

  # Autocovariance and spectral density dumps
  foukit acvf --model model.json --lags 0:20:0.1 --out acvf.csv
  foukit spectrum --model model.json --freqs -5:5:0.01 --out spectrum.csv
        """,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    simulate_p = commands.add_parser("simulate", parents=[common], help="Simulate a sample path")
    simulate_p.add_argument("--model", type=str, help="Model JSON text or file")
    simulate_p.add_argument("--n", type=int, default=None, help="Number of observations")
    simulate_p.add_argument("--T", type=float, default=None, help="Horizon")
    simulate_p.add_argument("--method", choices=SIMULATION_METHODS, default=None)
    simulate_p.add_argument("--burn-in", type=float, default=None, help="Operator-path burn-in M (default 10/λ₁)")
    simulate_p.add_argument("--inner-refinement", type=int, default=None, help="Operator-path substeps per Δ")
    simulate_p.set_defaults(handler=cmd_simulate)

    fit_p = commands.add_parser("fit", parents=[common], help="Estimate H, σ and λ from a series")
    _add_fit_arguments(fit_p)
    fit_p.add_argument("--with-covariance", action="store_true", help="Add the sandwich covariance of λ")
    fit_p.add_argument("--aic", action="store_true", help="Add the Gaussian log-likelihood and AIC")
    fit_p.set_defaults(handler=cmd_fit)

    mc_p = commands.add_parser("mc-study", parents=[common], help="Replicated simulate-and-fit study")
    mc_p.add_argument("--mc", type=str, default=None, help="Study document, JSON text or file")
    mc_p.add_argument("--scenario", type=str, default=None, help="Named scenario")
    mc_p.add_argument("--list-scenarios", action="store_true", help="List named scenarios and exit")
    mc_p.add_argument("--replications", type=int, default=None, help="Replicates per cell (m)")
    mc_p.add_argument("--T-values", type=str, default=None, help="Horizon grid")
    mc_p.add_argument("--n-values", type=str, default=None, help="Sample-size grid")
    mc_p.add_argument("--alpha", type=float, default=None, help="Schedule T_n = n^(1-α) instead of T values")
    mc_p.add_argument("--no-lambda", action="store_true", help="Estimate only H and σ")
    mc_p.set_defaults(handler=cmd_mc_study)

    forecast_p = commands.add_parser("forecast", parents=[common], help="One-step predictions and their measures")
    _add_fit_arguments(forecast_p)
    forecast_p.add_argument("--model", type=str, default=None, help="Fitted model or fit report JSON")
    forecast_p.add_argument("--m", type=int, default=None, help="Number of predicted values (default 40)")
    forecast_p.add_argument("--select-T", type=str, default=None, help="Choose T over this grid")
    forecast_p.add_argument("--criterion", choices=MEASURES, default=None, help="Measure ranking T")
    forecast_p.add_argument(
        "--fit-on", choices=FIT_TARGETS, default=None, help="Series used for fitting during selection"
    )
    forecast_p.add_argument("--refit", action="store_true", help="Refit before every prediction")
    forecast_p.add_argument("--metrics-out", type=str, default=None, help="Measures JSON (default: stderr)")
    forecast_p.add_argument("--table-out", type=str, default=None, help="Per-T criterion table CSV")
    forecast_p.set_defaults(handler=cmd_forecast)

    acvf_p = commands.add_parser("acvf", parents=[common], help="Dump model autocovariances")
    acvf_p.add_argument("--model", type=str, help="Model JSON text or file")
    acvf_p.add_argument("--lags", type=str, default=None, help="Lag grid (default 0:10:0.1)")
    acvf_p.add_argument("--series", type=str, default=None, help="Series for the empirical column")
    acvf_p.add_argument("--T", type=float, default=None, help="Horizon of the series")
    acvf_p.add_argument("--detrend", action="store_true", help="Detrend the series")
    acvf_p.set_defaults(handler=cmd_acvf)

    spectrum_p = commands.add_parser("spectrum", parents=[common], help="Dump the spectral density")
    spectrum_p.add_argument("--model", type=str, help="Model JSON text or file")
    spectrum_p.add_argument("--freqs", type=str, default=None, help=f"Frequency grid (default {DEFAULT_FREQS}; the density is even)")
    spectrum_p.set_defaults(handler=cmd_spectrum)
    return parser


def _configure_logging(args: argparse.Namespace) -> None:
    level = logging.INFO
    if getattr(args, "verbose", False):
        level = logging.DEBUG
    elif getattr(args, "quiet", False):
        level = logging.WARNING
    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )


_EXIT_CODES: List[Tuple[type, int]] = [
    (DataError, EXIT_DATA),
    (FileNotFoundError, EXIT_DATA),
    (NumericalFailureError, EXIT_NUMERICAL),
    (DomainError, EXIT_USAGE),
]


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one command.

    Args:
        argv: Arguments without the program name (default: sys.argv[1:])

    Returns:
        Process exit code
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_:
        return int(exit_.code or 0)
    _configure_logging(args)

    handler: Callable[[argparse.Namespace], int] = args.handler
    try:
        return handler(args)
    except (FoukitError, FileNotFoundError) as err:
        for kind, code in _EXIT_CODES:
            if isinstance(err, kind):
                logger.error("%s", err)
                return code
        logger.error("%s", err)
        return 1


if __name__ == "__main__":
    sys.exit(main())
