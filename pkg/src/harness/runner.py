"""
Experiment Runner

Dispatches a validated config to the owning module, records invariant
checks and writes the result bundle.

Usage:
    from src.configs.config_loader import ConfigLoader
    from src.harness.runner import execute

    config = ConfigLoader().load_validated("samples/configs/variance_bm.json")
    status = execute(config)

Exit statuses (config.settings): 0 success, 1 domain/config/IO error,
2 numeric or sampling error, 3 failed ERROR-severity invariant check.
The bundle is written before an invariant failure is raised, so failed
runs can be inspected.
"""

import logging
import math
import time
from pathlib import Path as FilePath
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from config.settings import (
    EXIT_INVARIANT,
    EXIT_NUMERIC,
    EXIT_OK,
    EXIT_VALIDATION,
    EXP_LOG_TOLERANCE,
    TAIL_EXPONENT_TOLERANCE,
)
from src.algebra.lie_algebra import lyndon_to_tensor
from src.algebra.tensor_algebra import WeightScheme, format_word, parse_word, tensor_exp
from src.exceptions import DomainError, InvariantFailure, NumericError, SigConcError
from src.experiments.concentration_lab import (
    bch_lipschitz_probe,
    derived_ou_area,
    estimate_coordinate_moments,
    expected_alpha_range,
    mean_concentration_experiment,
    moment_ladder,
    norm_tail_experiment,
    ou_area_experiment,
    scaling_experiment,
    small_ball_curve,
    tail_experiment,
)
from src.experiments.feature_pipeline import coordinate_samples, levy_area_samples
from src.experiments.statistics import TailCurve, jackknife_mean_se
from src.parser.curve_parser import TailCurveParser
from src.parser.path_parser import PathParser
from src.reporting.formatters import (
    LieCSVFormatter,
    PathCSVFormatter,
    SVGFormatter,
    TableCSVFormatter,
    TailCurveCSVFormatter,
    TensorCSVFormatter,
)
from src.reporting.report_generator import ExperimentOutcome, ReportGenerator
from src.signature.signature_engine import path_log_signature, path_signature
from src.simulation.gaussian_simulator import GaussianModel, ModelKind, SampleGrid, sample_paths
from src.simulation.seeding import SeedSpec
from src.validator.error_collector import CheckCollector

logger = logging.getLogger(__name__)

# Keys that change how a run executes but not what it computes; left out of
# the echoed config so summaries are byte-identical across them.
RUNTIME_KEYS = ("threads", "output_dir")


# ---------------------------------------------------------------------------
# Config accessors
# ---------------------------------------------------------------------------

def _model(config: Dict) -> GaussianModel:
    return GaussianModel.from_config(config["model"])


def _grid(config: Dict) -> SampleGrid:
    return SampleGrid.from_config(config["grid"])


def _seed(config: Dict) -> SeedSpec:
    return SeedSpec(int(config["seed"]))


def _workers(config: Dict) -> Dict:
    return {"workers": int(config.get("threads", 1)), "chunk_size": int(config["chunk_size"])}


def _echo(config: Dict) -> Dict:
    return {key: value for key, value in sorted(config.items()) if key not in RUNTIME_KEYS}


def _outcome(config: Dict, results: Dict, checks: CheckCollector) -> ExperimentOutcome:
    return ExperimentOutcome(config["experiment"], _echo(config), results, checks)


def _statistic_samples(config: Dict, model: GaussianModel, grid: SampleGrid, seed: SeedSpec):
    """
    Samples of the configured statistic.

    Returns:
        (samples, chaos level k, label)
    """
    word = parse_word(config["word"])
    if config.get("statistic", "coordinate") == "levy_area":
        letters = word if len(word) == 2 else (1, 2)
        samples = levy_area_samples(model, grid, int(config["n_samples"]), seed, letters, **_workers(config))
        k, label = 2, f"A^({letters[0]},{letters[1]})"
    else:
        samples = coordinate_samples(model, grid, word, int(config["n_samples"]), seed, **_workers(config))
        k, label = len(word), f"S_{format_word(word)}"
    if config.get("k") is not None:
        k = int(config["k"])
    return samples, k, label


# ---------------------------------------------------------------------------
# Handlers
# ---------------------------------------------------------------------------

def _run_simulate(config: Dict, checks: CheckCollector) -> ExperimentOutcome:
    model, grid, seed = _model(config), _grid(config), _seed(config)
    count = int(config["n_samples"])
    paths = sample_paths(model, grid, count, seed, workers=_workers(config)["workers"])

    outcome = _outcome(config, {"model": model.to_dict(), "grid": grid.to_dict(), "path_count": count}, checks)
    if config.get("output_format", {}).get("stacked", True):
        outcome.tables["paths.csv"] = PathCSVFormatter.format_stacked(paths)
    else:
        width = len(str(count - 1))
        for index, path in enumerate(paths):
            outcome.tables[f"path_{index:0{width}d}.csv"] = PathCSVFormatter.format_single(path)
    return outcome


def _read_paths(config: Dict):
    if not config.get("input"):
        raise DomainError("input is required: the Path CSV to read")
    parser = PathParser()
    paths = parser.parse_file(config["input"])
    ids = parser.path_ids if parser.is_stacked() else None
    return paths, ids


def _run_sig(config: Dict, checks: CheckCollector) -> ExperimentOutcome:
    m = int(config["m"])
    paths, ids = _read_paths(config)
    signatures = [path_signature(p, m) for p in paths]
    checks.add(
        "sig.group_like", "ERROR",
        all(s.is_group_like() for s in signatures),
        "every signature has scalar part 1",
        observed=[s.scalar for s in signatures[:1]],
        expected=1.0,
    )
    results = {"input": config["input"], "path_count": len(paths), "d": paths[0].d, "m": m}
    outcome = _outcome(config, results, checks)
    outcome.tables["signature.csv"] = TensorCSVFormatter.format_report(signatures, ids)
    return outcome


def _run_logsig(config: Dict, checks: CheckCollector) -> ExperimentOutcome:
    m = int(config["m"])
    paths, ids = _read_paths(config)
    elements = [path_log_signature(p, m) for p in paths]

    worst = 0.0
    for p, element in zip(paths, elements):
        signature = path_signature(p, m)
        rebuilt = tensor_exp(lyndon_to_tensor(element))
        worst = max(worst, float(np.max(np.abs(rebuilt.coords - signature.coords))) / max(1.0, signature.norm()))
    checks.add(
        "logsig.exp_round_trip", "ERROR", worst <= 1e3 * EXP_LOG_TOLERANCE,
        "exp of the log-signature reproduces the signature", worst, 1e3 * EXP_LOG_TOLERANCE
    )
    results = {"input": config["input"], "path_count": len(paths), "d": paths[0].d, "m": m}
    outcome = _outcome(config, results, checks)
    outcome.tables["log_signature.csv"] = LieCSVFormatter.format_report(elements, ids)
    return outcome


def _run_variance(config: Dict, checks: CheckCollector) -> ExperimentOutcome:
    model, grid = _model(config), _grid(config)
    report = estimate_coordinate_moments(
        model, config["word"], grid, int(config["n_samples"]), _seed(config), int(config["m"]), **_workers(config)
    )
    if report.reference is not None:
        tolerance = max(3.0 * report.second_moment_se, 0.05 * report.reference)
        checks.add_within(
            "variance.second_moment",
            report.second_moment,
            report.reference - tolerance,
            report.reference + tolerance,
            f"E[S_{format_word(report.word)}^2] within max(3 SE, 5%) of {report.reference_label}",
        )
    else:
        checks.add("variance.reference", "INFO", True, "no closed form for this model and word", None, None)

    outcome = _outcome(config, {"moments": report.to_dict()}, checks)
    row = report.to_dict()
    outcome.tables["variance_moments.csv"] = TableCSVFormatter.format_report([row], list(row))
    return outcome


def _run_levyarea(config: Dict, checks: CheckCollector) -> ExperimentOutcome:
    model, grid, seed = _model(config), _grid(config), _seed(config)
    word = parse_word(config["word"])
    letters = word if len(word) == 2 else (1, 2)
    samples = levy_area_samples(model, grid, int(config["n_samples"]), seed, letters, **_workers(config))
    squares = samples ** 2
    second, second_se = float(squares.mean()), jackknife_mean_se(squares)
    ratio = float(np.mean(squares ** 2)) ** 0.25 / math.sqrt(second)

    reference, label = None, None
    if model.kind is ModelKind.BROWNIAN:
        reference, label = grid.horizon ** 2 / 4.0, "T^2/4"
    elif model.kind is ModelKind.OU:
        reference, label = derived_ou_area(model.theta, grid.horizon, model.start), "Ito isometry"
    if reference is not None:
        checks.add_within(
            "levyarea.second_moment", second, reference - 3.0 * second_se, reference + 3.0 * second_se,
            f"E[A^2] within 3 SE of {label}"
        )
    if model.kind is ModelKind.BROWNIAN:
        checks.add(
            "levyarea.l4_l2", "INFO", True, "L4/L2 ratio of the Brownian Lévy area is 5^(1/4)",
            ratio, 5.0 ** 0.25
        )

    row = {
        "letters": format_word(letters),
        "second_moment": second,
        "second_moment_se": second_se,
        "l4_l2_ratio": ratio,
        "reference": reference,
        "reference_label": label,
        "sample_count": int(samples.shape[0]),
        "model": model.label(),
    }
    outcome = _outcome(config, {"levy_area": row}, checks)
    outcome.tables["levyarea_moments.csv"] = TableCSVFormatter.format_report([row], list(row))
    return outcome


def _run_tail(config: Dict, checks: CheckCollector) -> ExperimentOutcome:
    model, grid = _model(config), _grid(config)
    samples, k, label = _statistic_samples(config, model, grid, _seed(config))
    report = tail_experiment(
        samples,
        k,
        label=label,
        quantile_range=tuple(config["quantile_range"]),
        method=config.get("fit_method", "double_log"),
        thresholds=config.get("thresholds"),
        expected_range=config.get("expected_alpha_range"),
    )
    low, high = report.expected_range
    checks.add_within(
        "tail.alpha", report.fit.alpha_hat, low, high, f"fitted tail exponent of {label} near 2/k = {2.0 / k:g}"
    )
    checks.add_within("tail.r_squared", report.fit.r_squared, 0.95, 1.0, "tail fit is linear in the window")

    outcome = _outcome(config, {"tail": report.to_dict()}, checks)
    outcome.tables["tail_curve.csv"] = TailCurveCSVFormatter.format_report([report.curve])
    if config.get("svg"):
        outcome.svg = emit_plot([report.curve], [k])
    return outcome


def _run_hyper(config: Dict, checks: CheckCollector) -> ExperimentOutcome:
    model, grid, seed = _model(config), _grid(config), _seed(config)
    samples, k, label = _statistic_samples(config, model, grid, seed)
    ratios = moment_ladder(samples, k, [float(p) for p in config["p_values"]], seed)
    for ratio in ratios:
        checks.add(
            f"hyper.p{ratio.p:g}", "ERROR", ratio.passed,
            f"||{label}||_{ratio.p:g} / ||{label}||_2 <= (p-1)^(k/2) (1 + 3 SE_rel)",
            ratio.ratio, ratio.bound,
        )
    rows = [ratio.to_dict() for ratio in ratios]
    outcome = _outcome(config, {"label": label, "k": k, "ratios": rows}, checks)
    outcome.tables["hyper_ratios.csv"] = TableCSVFormatter.format_report(rows, list(rows[0]))
    return outcome


def _run_smallball(config: Dict, checks: CheckCollector) -> ExperimentOutcome:
    model, grid = _model(config), _grid(config)
    samples, k, label = _statistic_samples(config, model, grid, _seed(config))
    table = small_ball_curve(samples, config["epsilon_grid"], k)
    for point in table.points:
        checks.add(
            f"smallball.eps{point.epsilon:g}", "ERROR", point.passed,
            f"P(|{label}| <= eps sigma) <= {table.constant:g} eps^(1/{k})",
            point.probability, point.bound,
        )
    rows = [point.to_dict() for point in table.points]
    outcome = _outcome(config, {"label": label, "small_ball": table.to_dict()}, checks)
    outcome.tables["smallball.csv"] = TableCSVFormatter.format_report(rows, list(rows[0]))
    return outcome


def _run_meanconc(config: Dict, checks: CheckCollector) -> ExperimentOutcome:
    model, grid = _model(config), _grid(config)
    curve = mean_concentration_experiment(
        model,
        grid,
        int(config["m"]),
        WeightScheme.from_config(config["weights"]),
        config["feature"],
        config["n_grid"],
        int(config["reps"]),
        int(config["n_ref"]),
        _seed(config),
        **_workers(config),
    )
    checks.add_within(
        "meanconc.slope", curve.slope_hat, -0.65, -0.35, "deviation of the mean decays like n^(-1/2)"
    )
    rows = [
        {"n": int(n), "deviation": float(dev), "deviation_se": float(se)}
        for n, dev, se in zip(curve.n_values, curve.deviations, curve.deviation_se)
    ]
    outcome = _outcome(config, {"mean_concentration": curve.to_dict()}, checks)
    outcome.tables["meanconc_curve.csv"] = TableCSVFormatter.format_report(rows, ["n", "deviation", "deviation_se"])
    return outcome


def _run_bchprobe(config: Dict, checks: CheckCollector) -> ExperimentOutcome:
    m = int(config["m"])
    report = bch_lipschitz_probe(
        int(config["model"]["d"]),
        m,
        config["radii"],
        int(config["pairs"]),
        _seed(config),
        WeightScheme.from_config(config["weights"]),
    )
    if report.slope is not None:
        checks.add_within(
            "bchprobe.slope", report.slope.slope, -math.inf, report.slope_bound,
            f"Lipschitz constant of Log grows at most like (1+R)^{m - 1}"
        )
    rows = [r.to_dict() for r in report.radii]
    outcome = _outcome(config, {"bch_probe": report.to_dict()}, checks)
    outcome.tables["bchprobe_radii.csv"] = TableCSVFormatter.format_report(rows, list(rows[0]))
    return outcome


def _run_plot(config: Dict, checks: CheckCollector) -> ExperimentOutcome:
    curves: List[TailCurve] = []
    if config.get("input"):
        curves = TailCurveParser().parse_file(config["input"])
    ks = [int(k) for k in config.get("reference_ks") or []]
    svg = emit_plot(curves, ks)

    if len(ks) >= 2:
        t = 4.0
        tails = [math.exp(-(t ** (2.0 / k))) for k in sorted(ks)]
        checks.add(
            "plot.reference_order", "INFO", all(b >= a for a, b in zip(tails, tails[1:])),
            "larger k gives heavier reference tails", tails, "non-decreasing in k"
        )
    outcome = _outcome(
        config, {"curves": [c.label for c in curves], "reference_ks": ks}, checks
    )
    outcome.svg = svg
    return outcome


def _run_scaling(config: Dict, checks: CheckCollector) -> ExperimentOutcome:
    base, seed = _model(config), _seed(config)
    sweep = [float(h) for h in config.get("hurst_values") or []]
    if sweep:
        runs = [(GaussianModel.fbm(h, d=base.d), seed.derive(1000 + i)) for i, h in enumerate(sweep)]
    else:
        runs = [(base, seed)]

    reports, rows = [], []
    for model, spec in runs:
        report = scaling_experiment(
            model, config["word"], config["horizons"], int(config["grid"]["n_steps"]),
            int(config["n_samples"]), spec, **_workers(config),
        )
        hurst = 0.5 if model.kind is ModelKind.BROWNIAN else model.hurst
        expected = report.expected_ratio
        checks.add_within(
            f"scaling.ratio.H{hurst:g}", report.ratio, 0.9 * expected, 1.1 * expected,
            f"moment ratio within 10% of (T_max/T_min)^(2kH) for {model.label()}"
        )
        reports.append({"model": model.to_dict(), "scaling": report.to_dict()})
        for horizon, moment, se in zip(report.horizons, report.moments, report.moment_se):
            rows.append({"hurst": hurst, "horizon": horizon, "moment": moment, "moment_se": se})

    outcome = _outcome(config, {"runs": reports}, checks)
    outcome.tables["scaling_moments.csv"] = TableCSVFormatter.format_report(
        rows, ["hurst", "horizon", "moment", "moment_se"]
    )
    return outcome


def _run_ouarea(config: Dict, checks: CheckCollector) -> ExperimentOutcome:
    model, grid = _model(config), _grid(config)
    report = ou_area_experiment(
        model, grid.n_steps, grid.horizon, int(config["n_samples"]), _seed(config),
        config["refinement_grids"], **_workers(config),
    )
    spread = 3.0 * report.combined_se
    checks.add_within(
        "ouarea.extrapolated", report.empirical, report.extrapolated - spread, report.extrapolated + spread,
        "fixture-grid E[A^2] agrees with the grid-extrapolated reference within 3 SE"
    )
    derived_spread = 3.0 * report.extrapolated_se
    checks.add_within(
        "ouarea.derived", report.extrapolated, report.derived - derived_spread, report.derived + derived_spread,
        "extrapolated E[A^2] agrees with the Ito-isometry closed form within 3 SE"
    )
    published_ok = checks.add_within(
        "ouarea.published", report.empirical, report.published - spread, report.published + spread,
        "published closed form, evaluated at theta; a mismatch is reported, not fatal",
        severity="WARNING",
    )
    if not published_ok.passed:
        logger.warning(
            f"OU area: published closed form {report.published:.6g} differs from the empirical "
            f"{report.empirical:.6g} by more than 3 SE"
        )

    outcome = _outcome(config, {"ou_area": report.to_dict()}, checks)
    rows = [{"n_steps": report.n_steps, "estimate": report.empirical, "se": report.empirical_se, "role": "fixture"}]
    rows += [
        {"n_steps": n, "estimate": e, "se": s, "role": "refinement"}
        for n, (e, s) in sorted(report.refinement.items())
    ]
    rows.append({"n_steps": None, "estimate": report.extrapolated, "se": report.extrapolated_se, "role": "extrapolated"})
    outcome.tables["ouarea_estimates.csv"] = TableCSVFormatter.format_report(rows, ["role", "n_steps", "estimate", "se"])
    return outcome


def _run_normtail(config: Dict, checks: CheckCollector) -> ExperimentOutcome:
    model, grid, m = _model(config), _grid(config), int(config["m"])
    report = norm_tail_experiment(
        model,
        grid,
        m,
        WeightScheme.from_config(config["weights"]),
        int(config["n_samples"]),
        _seed(config),
        config["feature"],
        tuple(config["quantile_range"]),
        config.get("fit_method", "double_log"),
        **_workers(config),
    )
    floor = expected_alpha_range(m, TAIL_EXPONENT_TOLERANCE)[0]
    checks.add_within(
        "normtail.alpha", report.fit.alpha_hat, floor, math.inf,
        f"weighted-norm deviations decay at least like exp(-t^(2/{m}))", severity="WARNING"
    )
    outcome = _outcome(config, {"tail": report.to_dict()}, checks)
    outcome.tables["normtail_curve.csv"] = TailCurveCSVFormatter.format_report([report.curve])
    if config.get("svg"):
        outcome.svg = emit_plot([report.curve], [m])
    return outcome


HANDLERS: Dict[str, Callable[[Dict, CheckCollector], ExperimentOutcome]] = {
    "simulate": _run_simulate,
    "sig": _run_sig,
    "logsig": _run_logsig,
    "tail": _run_tail,
    "variance": _run_variance,
    "meanconc": _run_meanconc,
    "bchprobe": _run_bchprobe,
    "smallball": _run_smallball,
    "hyper": _run_hyper,
    "plot": _run_plot,
    "levyarea": _run_levyarea,
    "scaling": _run_scaling,
    "ouarea": _run_ouarea,
    "normtail": _run_normtail,
}

# Kinds that read or draw from no model.
_MODEL_FREE = ("sig", "logsig", "plot", "bchprobe")


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------

def emit_plot(
    curves: Sequence[TailCurve],
    reference_ks: Sequence[int] = (),
    output_path=None,
    t_max: Optional[float] = None,
) -> str:
    """
    SVG of tail curves with reference curves exp(-t^(2/k)).

    Args:
        curves: Empirical tail curves
        reference_ks: Levels of the reference curves
        output_path: File to write, if given
        t_max: Right end of the t axis

    Raises:
        DomainError: If there are no curves and no reference levels
    """
    svg = SVGFormatter.format_plot(list(curves), list(reference_ks), t_max=t_max)
    if output_path is not None:
        path = FilePath(output_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(svg)
        logger.info(f"Plot written to {path}")
    return svg


def run(config: Dict) -> ExperimentOutcome:
    """
    Run one validated config and collect its checks; writes nothing.

    Raises:
        DomainError: On an unsupported experiment kind or a violated precondition
        NumericError: On a numerical breakdown
    """
    kind = config.get("experiment")
    if kind not in HANDLERS:
        raise DomainError(f"experiment has unsupported value '{kind}'")

    checks = CheckCollector()
    if kind not in _MODEL_FREE:
        model = _model(config)
        checks.add(
            "model.rough_path_lift", "WARNING", model.lift_ok,
            model.warning or "signature lift of the model is guaranteed", model.rho, None
        )

    started = time.perf_counter()
    logger.info(f"Running {kind} (seed {config.get('seed')}, {config.get('threads', 1)} thread(s))")
    outcome = HANDLERS[kind](config, checks)
    logger.info(f"{kind} finished in {time.perf_counter() - started:.1f}s: {checks.status()}")
    return outcome


def execute(config: Dict, report_stream=None) -> int:
    """
    ``run`` followed by writing the bundle to ``config["output_dir"]``.

    Args:
        config: Validated config
        report_stream: Where to print the dashboard (e.g. sys.stderr); nothing is printed when None

    Returns:
        EXIT_OK

    Raises:
        InvariantFailure: After writing, if an ERROR-severity check failed
    """
    outcome = run(config)
    generator = ReportGenerator(outcome)
    generator.save_all(config["output_dir"])
    if report_stream is not None:
        print(generator.generate_dashboard(), file=report_stream)
    failed = outcome.checks.failed("ERROR")
    if failed:
        raise InvariantFailure(failed)
    return EXIT_OK


def exit_status(error: BaseException) -> int:
    """Exit status for an error raised by ``execute``."""
    if isinstance(error, InvariantFailure):
        return EXIT_INVARIANT
    if isinstance(error, NumericError):
        return EXIT_NUMERIC
    if isinstance(error, (SigConcError, OSError)):
        return EXIT_VALIDATION
    raise error
