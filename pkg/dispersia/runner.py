"""
Run Orchestration
=================
Loads and validates run configs, executes experiment descriptors on a
thread pool capped by DISPERSIA_THREADS, and emits results in config order.

A run config is a JSON object:

    {
      "version": "1",
      "seed": 7,
      "output_dir": "out",
      "experiments": [
        {"name": "weyl_saturation",
         "params": {"d": 2, "p": 4, "q": 4, "cutoffs": [8, 16, 32]},
         "expected_slope": "auto",
         "tolerance": 0.1}
      ]
    }

Every experiment name and parameter block is validated before any
computation starts; failures raise ConfigError with a line-anchored message.
"""

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping, Optional

import numpy as np

from config import (
    DEFAULT_SEED,
    DEFAULT_TOLERANCE,
    FIXTURES_DIR,
    RESULT_SCHEMA_VERSION,
    get_logger,
    thread_cap,
)
from decoupling import decoupling_experiment, discrete_restriction_experiment
from duality import duality_experiment
from experiments import (
    ExperimentReport,
    ScalingExperiment,
    cluster_state,
    cube_state,
    dirichlet_packet,
    packet_experiment,
    shell_eigenfunction_experiment,
    torus_cluster_experiment,
    torus_strichartz_experiment,
    universal_bound_experiment,
    weyl_saturation_experiment,
    zonal_sphere_experiment,
)
from exponents import predicted_slope
from hartree import HartreeProblem, HartreeTrajectory, compute_density, self_convergence_order, solve
from lattice_core import enumerate_frequencies
from reporting import (
    canonical_json,
    config_hash,
    write_plotdata,
    write_results,
    write_summary,
    write_state_json,
    write_timings,
    write_trajectory,
)
from spectral_field import FourierState, PropagatorSpec
from validators import DESCRIPTOR_VALIDATORS, EXPERIMENT_VALIDATORS, HARTREE_VALIDATORS, validate_params

logger = get_logger(__name__)


class ConfigError(ValueError):
    """Invalid run or Hartree config; the message is anchored at the offending location."""


# ─── Config Types ────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class ExperimentDescriptor:
    index: int
    name: str
    params: dict  # validated, defaults filled
    raw_params: dict  # as written in the config
    seed: int
    expected_slope: Optional[float] = None
    tolerance: float = DEFAULT_TOLERANCE
    comparison: str = "two_sided"

    @property
    def label(self) -> str:
        return f"experiments[{self.index}].{self.name}"

    def scaling(self, report: ExperimentReport) -> Optional[ScalingExperiment]:
        if self.expected_slope is None:
            return None
        return ScalingExperiment(
            generator=self.name,
            cutoffs=tuple(report.cutoffs),
            expected_slope=self.expected_slope,
            tolerance=self.tolerance,
            comparison=self.comparison,
        )


@dataclass(frozen=True)
class RunConfig:
    version: str
    seed: int
    experiments: tuple[ExperimentDescriptor, ...]
    output_dir: Path
    config_hash: str


# ─── Experiment Registry ─────────────────────────────────────────────────────

def _propagator(params: Mapping) -> PropagatorSpec:
    """Explicit propagator block, else the fractional Schrödinger one with the block's alpha."""
    if params.get("propagator") is not None:
        return PropagatorSpec.from_dict(params["propagator"])
    return PropagatorSpec.fractional(params.get("alpha", 2.0))


def _interval(params: Mapping) -> tuple[float, float]:
    start, end = params["interval"]
    return (start, end)


def _seed(params: Mapping, seed: int) -> int:
    return seed if params.get("seed") is None else params["seed"]


ExperimentRunner = Callable[[Mapping, int], ExperimentReport]

EXPERIMENTS: dict[str, ExperimentRunner] = {
    "packet": lambda prm, seed: packet_experiment(
        prm["d"], prm["alpha"], prm["p"], prm["q"], prm["cutoffs"],
        normalized=prm["normalized"],
        window_factor=prm["window_factor"],
        space_points=prm["space_points"],
        time_samples=prm["time_samples"],
        interval_scaling=prm["interval_scaling"],
        propagator=_propagator(prm),
    ),
    "weyl_saturation": lambda prm, seed: weyl_saturation_experiment(
        prm["d"], _propagator(prm), prm["p"], prm["q"], prm["cutoffs"],
        weight=prm["weight"],
        interval=_interval(prm),
        time_samples=prm["time_samples"],
        space_points=prm["space_points"],
    ),
    "shell_eigenfunction": lambda prm, seed: shell_eigenfunction_experiment(
        prm["d"], prm["q"], prm["cutoffs"],
        window_factor=prm["window_factor"],
        space_points=prm["space_points"],
    ),
    "torus_cluster": lambda prm, seed: torus_cluster_experiment(
        prm["d"], prm["alpha"], prm["j_values"],
        c=prm["c"],
        epsilon=prm["epsilon"],
        samples=prm["samples"],
        propagator=_propagator(prm),
    ),
    "zonal_sphere": lambda prm, seed: zonal_sphere_experiment(
        prm["cutoffs"], prm["p"], prm["q"],
        interval=_interval(prm),
        check_degrees=prm["check_degrees"],
    ),
    "universal_bound": lambda prm, seed: universal_bound_experiment(
        prm["d"], _propagator(prm), prm["p"], prm["q"], prm["cutoffs"],
        states=prm["states"],
        seed=_seed(prm, seed),
        interval=_interval(prm),
        time_samples=prm["time_samples"],
    ),
    "torus_strichartz": lambda prm, seed: torus_strichartz_experiment(
        prm["d"], prm["alpha"], prm["q"], prm["cutoffs"],
        p=prm["p"],
        profile=prm["profile"],
        seed=_seed(prm, seed),
        time_samples=prm["time_samples"],
    ),
    "decoupling": lambda prm, seed: decoupling_experiment(
        prm["d"], prm["alpha"], prm["p"], prm["deltas"],
        density=prm["density"],
        seed=_seed(prm, seed),
        growth_exponent=prm["growth_exponent"],
        nodes_per_side=prm["nodes_per_side"],
        samples_per_unit=prm["samples_per_unit"],
    ),
    "discrete_restriction": lambda prm, seed: discrete_restriction_experiment(
        prm["d"], prm["alpha"], prm["p"], prm["cutoffs"],
        radius=prm["radius"],
        trials=prm["trials"],
        samples=prm["samples"],
        seed=_seed(prm, seed),
    ),
    "duality_probe": lambda prm, seed: duality_experiment(
        prm["p"], prm["q"], prm["beta"],
        inputs=prm["inputs"],
        rows=prm["rows"],
        time_points=prm["time_points"],
        instances=prm["instances"],
        samples=prm["samples"],
        seed=_seed(prm, seed),
        slack=prm["slack"],
    ),
}

# Which list parameter carries the sweep, for the ≥ 3 cutoff check on fitted experiments
SWEEP_KEYS = {"torus_cluster": "j_values", "decoupling": "deltas", "duality_probe": None}

# Upper-bound statements compare one-sidedly unless the config says otherwise
DEFAULT_COMPARISON = {
    "torus_strichartz": "upper",
    "discrete_restriction": "upper",
    "universal_bound": "upper",
    "decoupling": "upper",
}


# ─── Config Loading ──────────────────────────────────────────────────────────

def read_json(path: Path) -> Any:
    """Parse a JSON file; syntax errors become 'path:line:col: message'."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def _resolve_slope(path: Path, label: str, name: str, raw, params: Mapping) -> Optional[float]:
    if raw is None:
        return None
    if raw == "auto":
        try:
            return predicted_slope(name, params)
        except ValueError as exc:
            raise ConfigError(f"{path}: {label}: expected_slope 'auto': {exc}") from None
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ConfigError(f"{path}: {label}: expected_slope must be a number or 'auto', got {raw!r}")
    return float(raw)


def _descriptor(path: Path, index: int, entry, run_seed: int) -> ExperimentDescriptor:
    if not isinstance(entry, dict):
        raise ConfigError(f"{path}: experiments[{index}]: must be an object")
    fields, error = validate_params(entry, DESCRIPTOR_VALIDATORS)
    if error:
        name = entry.get("name", "?")
        raise ConfigError(f"{path}: experiments[{index}].{name}: {error}")
    name = fields["name"]
    label = f"experiments[{index}].{name}"
    params, error = validate_params(fields["params"], EXPERIMENT_VALIDATORS[name])
    if error:
        raise ConfigError(f"{path}: {label}: {error}")
    if "interval" in params and len(params["interval"]) != 2:
        raise ConfigError(f"{path}: {label}: interval must be [start, end]")
    if params.get("propagator") is not None:
        try:
            _propagator(params)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{path}: {label}: propagator: {exc}") from None

    expected = _resolve_slope(path, label, name, fields["expected_slope"], params)
    if expected is not None:
        sweep = SWEEP_KEYS.get(name, "cutoffs")
        if sweep is None or len(params[sweep]) < 3:
            raise ConfigError(f"{path}: {label}: expected_slope needs a sweep of >= 3 values")
        values = [float(v) for v in params[sweep]]
        if name != "decoupling" and any(b <= a for a, b in zip(values, values[1:])):
            raise ConfigError(f"{path}: {label}: {sweep} must be strictly increasing, got {values}")

    tolerance = DEFAULT_TOLERANCE if fields["tolerance"] is None else fields["tolerance"]
    comparison = fields["comparison"] or DEFAULT_COMPARISON.get(name, "two_sided")
    return ExperimentDescriptor(
        index=index,
        name=name,
        params=params,
        raw_params=dict(fields["params"]),
        seed=_seed(params, run_seed),
        expected_slope=expected,
        tolerance=tolerance,
        comparison=comparison,
    )


def load_run_config(path: Path, seed: Optional[int] = None, output_dir: Optional[Path] = None) -> RunConfig:
    """
    Parse and validate a run config.

    seed and output_dir override the values in the file. Nothing is
    computed and nothing is written here.
    """
    path = Path(path)
    data = read_json(path)
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    unknown = sorted(set(data) - {"version", "seed", "experiments", "output_dir"})
    if unknown:
        raise ConfigError(f"{path}: unknown key(s): {', '.join(unknown)}")

    version = data.get("version")
    if str(version) != RESULT_SCHEMA_VERSION:
        raise ConfigError(f"{path}: version must be '{RESULT_SCHEMA_VERSION}', got {version!r}")

    run_seed = data.get("seed", DEFAULT_SEED) if seed is None else seed
    if isinstance(run_seed, bool) or not isinstance(run_seed, int) or not 0 <= run_seed < 2**64:
        raise ConfigError(f"{path}: seed must be an integer in [0, 2^64), got {run_seed!r}")

    entries = data.get("experiments", [])
    if not isinstance(entries, list):
        raise ConfigError(f"{path}: experiments must be a list")
    descriptors = tuple(_descriptor(path, i, entry, run_seed) for i, entry in enumerate(entries))

    if output_dir is None:
        output_dir = Path(data.get("output_dir", "results"))
        if not output_dir.is_absolute():
            output_dir = path.parent / output_dir

    hashed = dict(data, seed=run_seed)
    return RunConfig(
        version=str(version),
        seed=run_seed,
        experiments=descriptors,
        output_dir=Path(output_dir),
        config_hash=config_hash(hashed),
    )


def load_hartree_config(path: Path) -> tuple[HartreeProblem, Optional[Path]]:
    """Hartree problem plus its output_dir (None when the file does not set one)."""
    path = Path(path)
    data = read_json(path)
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    fields, error = validate_params(data, HARTREE_VALIDATORS)
    if error:
        raise ConfigError(f"{path}: {error}")
    block = {k: v for k, v in fields.items() if v is not None and k != "output_dir"}
    try:
        problem = HartreeProblem.from_dict(block)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    output_dir = fields["output_dir"]
    if output_dir is not None and not Path(output_dir).is_absolute():
        output_dir = path.parent / output_dir
    return problem, Path(output_dir) if output_dir is not None else None


# ─── Execution ───────────────────────────────────────────────────────────────

@dataclass
class ExperimentOutcome:
    descriptor: ExperimentDescriptor
    report: Optional[ExperimentReport]
    passed: bool
    seconds: float
    error: Optional[str] = None

    @property
    def failed_identities(self) -> list[str]:
        if self.report is None:
            return []
        return [k for k, ok in self.report.identities.items() if not ok]


@dataclass
class RunOutcome:
    config: RunConfig
    outcomes: list[ExperimentOutcome] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(o.passed for o in self.outcomes)

    @property
    def failures(self) -> list[ExperimentOutcome]:
        return [o for o in self.outcomes if not o.passed]


def execute(descriptor: ExperimentDescriptor) -> ExperimentOutcome:
    """Run one descriptor; runtime ValueError/ArithmeticError become a failed outcome."""
    start = time.perf_counter()
    try:
        report = EXPERIMENTS[descriptor.name](descriptor.params, descriptor.seed)
    except (ValueError, ArithmeticError) as exc:
        logger.error("%s failed: %s", descriptor.label, exc)
        return ExperimentOutcome(descriptor, None, False, time.perf_counter() - start, str(exc))
    scaling = descriptor.scaling(report)
    passed = report.identities_hold and (scaling is None or scaling.passes(report))
    elapsed = time.perf_counter() - start
    slope = f"{report.fit.slope:.4f}" if report.fit else "n/a"
    logger.info("%s: slope=%s passed=%s (%.2fs)", descriptor.label, slope, passed, elapsed)
    return ExperimentOutcome(descriptor, report, passed, elapsed)


def run_experiments(config: RunConfig) -> RunOutcome:
    """Execute every descriptor; outcomes are kept in config order."""
    workers = max(1, min(thread_cap(), len(config.experiments)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        outcomes = list(pool.map(execute, config.experiments))
    return RunOutcome(config, outcomes)


# ─── Result Tables ───────────────────────────────────────────────────────────

def _residual(report: ExperimentReport, N: float, value: float) -> Optional[float]:
    if report.fit is None or N <= 0 or value <= 0:
        return None
    return math.log(value) - (report.fit.slope * math.log(N) + report.fit.intercept)


def result_rows(outcome: RunOutcome) -> list[dict]:
    rows = []
    for o in outcome.outcomes:
        if o.report is None:
            continue
        d = o.descriptor
        params = canonical_json(d.raw_params)
        for i, (N, value) in enumerate(zip(o.report.cutoffs, o.report.values)):
            rows.append({
                "experiment": d.name,
                "index": d.index,
                "parameters": params,
                "N": float(N),
                "value": float(value),
                "predicted_slope": d.expected_slope,
                "fitted_slope": o.report.fit.slope if o.report.fit else None,
                "residual": _residual(o.report, N, value),
                "passed": o.passed,
                "seed": d.seed,
                "config_hash": outcome.config.config_hash,
            })
    return rows


def summary(outcome: RunOutcome) -> dict:
    experiments = []
    for o in outcome.outcomes:
        d, report = o.descriptor, o.report
        fit = report.fit if report else None
        experiments.append({
            "index": d.index,
            "name": d.name,
            "params": d.raw_params,
            "seed": d.seed,
            "passed": o.passed,
            "expected_slope": d.expected_slope,
            "tolerance": d.tolerance,
            "comparison": d.comparison,
            "fitted_slope": fit.slope if fit else None,
            "intercept": fit.intercept if fit else None,
            "max_residual": fit.max_residual if fit else None,
            "identities": report.identities if report else {},
            "failed_identities": o.failed_identities,
            "sampled_supremum": report.sampled_supremum if report else False,
            "details": report.details if report else {},
            "error": o.error,
        })
    return {
        "schema_version": RESULT_SCHEMA_VERSION,
        "seed": outcome.config.seed,
        "config_hash": outcome.config.config_hash,
        "passed": outcome.passed,
        "experiments": experiments,
    }


def _plot_names(outcome: RunOutcome) -> list[str]:
    counts: dict[str, int] = {}
    for o in outcome.outcomes:
        counts[o.descriptor.name] = counts.get(o.descriptor.name, 0) + 1
    return [
        o.descriptor.name if counts[o.descriptor.name] == 1 else f"{o.descriptor.name}_{o.descriptor.index}"
        for o in outcome.outcomes
    ]


def write_outputs(outcome: RunOutcome, output_dir: Optional[Path] = None) -> Path:
    """results.csv, summary.json, plotdata/*.csv and timings.json under output_dir."""
    out = Path(output_dir or outcome.config.output_dir)
    plot_dir = out / "plotdata"
    plot_dir.mkdir(parents=True, exist_ok=True)
    write_results(result_rows(outcome), out / "results.csv")
    write_summary(summary(outcome), out / "summary.json")
    for name, o in zip(_plot_names(outcome), outcome.outcomes):
        if o.report is not None:
            write_plotdata(o.report.log_pairs(), plot_dir / f"{name}.csv", label=name)
    write_timings({f"{o.descriptor.index}:{o.descriptor.name}": o.seconds for o in outcome.outcomes},
                  out / "timings.json")
    logger.info("Wrote results for %d experiment(s) to %s", len(outcome.outcomes), out)
    return out


def run(path: Path, seed: Optional[int] = None, output_dir: Optional[Path] = None) -> RunOutcome:
    """Load, execute and write. ConfigError propagates before anything is written."""
    config = load_run_config(path, seed=seed, output_dir=output_dir)
    outcome = run_experiments(config)
    write_outputs(outcome)
    return outcome


# ─── Hartree Runs ────────────────────────────────────────────────────────────

def hartree_summary(problem: HartreeProblem, trajectory: HartreeTrajectory) -> dict:
    """Conservation report plus the final-density spread and, when asked, the convergence order."""
    final = trajectory.final
    rho = compute_density(final, 4 * final.box + 1)
    result = {
        "steps": trajectory.steps,
        "grid_points": trajectory.grid_points,
        "scheme": problem.solver.scheme,
        "dt": problem.solver.dt,
        "t_end": problem.solver.t_end,
        "conservation": trajectory.conservation().to_dict(),
        "final_density_spread": float(rho.max() - rho.min()),
    }
    if problem.convergence:
        result["convergence_order"] = self_convergence_order(
            problem.state, problem.potential, problem.propagator, problem.solver, problem.reference_factor
        )
    return result


def run_hartree(path: Path, output_dir: Optional[Path] = None) -> dict:
    """
    Solve the Hartree problem in path and write trajectory.csv and
    conservation.json. SolverDivergence propagates with its step index.
    """
    problem, configured = load_hartree_config(path)
    out = Path(output_dir or configured or Path(path).parent / "hartree_results")
    trajectory = solve(problem.state, problem.potential, problem.propagator, problem.solver,
                       keep_snapshots=problem.snapshots)
    result = hartree_summary(problem, trajectory)
    out.mkdir(parents=True, exist_ok=True)
    if problem.snapshots:
        write_snapshots(trajectory, out)
    write_trajectory(trajectory.rows(), out / "trajectory.csv")
    write_summary(result, out / "conservation.json")
    logger.info("Wrote Hartree trajectory (%d outputs) to %s", len(trajectory.times), out)
    return result


def write_snapshots(trajectory: HartreeTrajectory, out: Path) -> None:
    snap_dir = out / "snapshots"
    snap_dir.mkdir(parents=True, exist_ok=True)
    for i, snap in enumerate(trajectory.snapshots):
        write_state_json(
            {"t": snap.time, "weights": snap.weights, "states": [f.to_json_dict() for f in snap.states]},
            snap_dir / f"snapshot_{i:05d}.json",
        )


# ─── Fixtures ────────────────────────────────────────────────────────────────

def canonical_fixtures() -> dict[str, FourierState]:
    """The states the test-suite oracles are written against."""
    return {
        "constant_d1": FourierState.constant(1),
        "mode_d2_3_4": FourierState.mode((3, 4)),
        "dirichlet_d1_N8": dirichlet_packet(1, 8),
        "dirichlet_d2_N4": dirichlet_packet(2, 4),
        "shell_d2_N5": FourierState.from_frequency_set(enumerate_frequencies(2, 5, "shell")),
        "cluster_d2_j5": cluster_state(2, 5),
        "cube_d2_N4_random_phase": cube_state(2, 4, "random_phase", np.random.default_rng(DEFAULT_SEED)),
    }


def emit_fixtures(out_dir: Optional[Path] = None) -> list[Path]:
    out = Path(out_dir or FIXTURES_DIR)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, state in canonical_fixtures().items():
        path = out / f"{name}.json"
        write_state_json(state.to_json_dict(), path)
        written.append(path)
    logger.info("Wrote %d fixtures to %s", len(written), out)
    return written
