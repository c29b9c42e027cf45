"""
Scaling Experiments
===================
Measures how Strichartz-type quantities scale with the frequency cutoff N
and fits the exponent in log-log space.

Experiments (each returns an ExperimentReport):
  - packet             windowed norm of the Dirichlet packet Σ_{|k|≤N} e_k
  - weyl_saturation    density of the full pure-mode system, ν ≡ const
  - shell_eigenfunction  Σ_{|k|=N} e_k near the origin
  - torus_cluster      coherent shell clusters on short time scales
  - zonal_sphere       zonal harmonics on S²
  - universal_bound    random orthonormal systems against #{|k| ≤ N}
  - torus_strichartz   single-function L^q_{t,x}(T^{d+1}) growth

Expected slopes are not computed here: the runner compares fits against
the values supplied by the run config (see exponents.py for closed forms).

Window constants: packet and shell windows are |x| < c/N, |t| < c/N^α with
c = WINDOW_FACTOR; cluster boxes are |x| ≤ ε/j, |t| ≤ ε·j^{1−α}.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np
from scipy.special import eval_legendre, roots_legendre

from config import (
    CLUSTER_EPSILON,
    CLUSTER_SAMPLES,
    DENSITY_FLOOR,
    IDENTITY_REL_TOL,
    SHELL_WIDTH,
    SPHERE_NORMALIZATION_TOL,
    SPHERE_PHI_SAMPLES,
    WINDOW_FACTOR,
    WINDOW_POINTS,
    WINDOW_TIME_SAMPLES,
    get_logger,
)
from lattice_core import (
    admissible_shell_radii,
    count_representations,
    enumerate_frequencies,
    shell_cluster,
)
from norms import (
    MixedNormSpec,
    OrthonormalSystem,
    mixed_modes,
    mixed_norm,
    orthonormality_defect,
    random_unitary,
    spatial_norms,
)
from spectral_field import (
    FourierState,
    PropagatorSpec,
    SpaceTimeGrid,
    density,
    evaluate_points,
    synthesize,
    unit_phase,
)

logger = get_logger(__name__)

VALID_COMPARISONS = ("two_sided", "upper")
VALID_INTERVAL_SCALINGS = ("unit", "rescaled")
VALID_PROFILES = ("ones", "random_phase")


# ─── Fits and Reports ────────────────────────────────────────────────────────

@dataclass(frozen=True)
class ExponentFit:
    """Least-squares line log(value) = slope·log(N) + intercept."""

    slope: float
    intercept: float
    max_residual: float  # in log space
    points: int


def fit_exponent(pairs: Sequence[tuple[float, float]]) -> ExponentFit:
    """
    Ordinary least squares on (log N, log value).

    Args:
        pairs: At least three (N, value) pairs, N > 0, value > 0, with at
            least two distinct N.

    Returns:
        ExponentFit with the slope, intercept and max |residual|.
    """
    if len(pairs) < 3:
        raise ValueError(f"fit_exponent needs >= 3 pairs, got {len(pairs)}")
    cutoffs = np.array([float(n) for n, _ in pairs])
    values = np.array([float(v) for _, v in pairs])
    bad = [(n, v) for n, v in zip(cutoffs, values) if not (v > 0 and math.isfinite(v))]
    if bad:
        raise ValueError(f"fit_exponent needs positive finite values, got {bad}")
    if np.any(cutoffs <= 0):
        raise ValueError(f"fit_exponent needs positive N, got {cutoffs.tolist()}")
    if len(np.unique(cutoffs)) < 2:
        raise ValueError("fit_exponent needs at least two distinct N")

    log_n, log_v = np.log(cutoffs), np.log(values)
    slope, intercept = np.polyfit(log_n, log_v, 1)
    residuals = log_v - (slope * log_n + intercept)
    return ExponentFit(
        slope=float(slope),
        intercept=float(intercept),
        max_residual=float(np.max(np.abs(residuals))),
        points=len(pairs),
    )


@dataclass
class ExperimentReport:
    """
    Outcome of one experiment.

    values[i] is the measured quantity at cutoffs[i]. identities holds the
    exact checks the experiment makes along the way; details carries
    per-cutoff diagnostics for summary.json.
    """

    experiment: str
    cutoffs: list[float]
    values: list[float]
    fit: Optional[ExponentFit] = None
    identities: dict[str, bool] = field(default_factory=dict)
    details: dict[str, Any] = field(default_factory=dict)
    sampled_supremum: bool = False  # values are lower bounds of a supremum

    @property
    def identities_hold(self) -> bool:
        return all(self.identities.values())

    def log_pairs(self) -> list[tuple[float, float]]:
        return [
            (math.log(n), math.log(v))
            for n, v in zip(self.cutoffs, self.values)
            if n > 0 and v > 0
        ]


@dataclass(frozen=True)
class ScalingExperiment:
    """
    A measured family with its expected exponent.

    comparison "two_sided" passes when |slope − expected| ≤ tolerance;
    "upper" passes when slope ≤ expected + tolerance (used for upper-bound
    statements whose measured slope may fall well below the prediction).
    """

    generator: str
    cutoffs: tuple[float, ...]
    expected_slope: Optional[float] = None
    tolerance: float = 0.1
    comparison: str = "two_sided"
    propagator: Optional[PropagatorSpec] = None
    norm_spec: Optional[MixedNormSpec] = None

    def __post_init__(self):
        cutoffs = tuple(float(n) for n in self.cutoffs)
        if len(cutoffs) < 3:
            raise ValueError(f"{self.generator}: need >= 3 cutoffs, got {list(cutoffs)}")
        if any(b <= a for a, b in zip(cutoffs, cutoffs[1:])):
            raise ValueError(f"{self.generator}: cutoffs must be strictly increasing, got {list(cutoffs)}")
        if self.comparison not in VALID_COMPARISONS:
            raise ValueError(f"comparison must be one of {VALID_COMPARISONS}, got '{self.comparison}'")
        if self.tolerance < 0:
            raise ValueError(f"tolerance must be >= 0, got {self.tolerance}")
        object.__setattr__(self, "cutoffs", cutoffs)

    def slope_passes(self, fit: Optional[ExponentFit]) -> bool:
        if self.expected_slope is None:
            return True
        if fit is None:
            return False
        if self.comparison == "upper":
            return fit.slope <= self.expected_slope + self.tolerance
        return abs(fit.slope - self.expected_slope) <= self.tolerance

    def passes(self, report: ExperimentReport) -> bool:
        return report.identities_hold and self.slope_passes(report.fit)


def _check_cutoffs(name: str, cutoffs: Sequence[float], integer: bool = True) -> list:
    cutoffs = list(cutoffs)
    if not cutoffs:
        raise ValueError(f"{name}: cutoffs must be nonempty")
    for n in cutoffs:
        if n <= 0 or (integer and float(n) != int(n)):
            kind = "positive integers" if integer else "positive"
            raise ValueError(f"{name}: cutoffs must be {kind}, got {n}")
    return [int(n) for n in cutoffs] if integer else [float(n) for n in cutoffs]


def fit_or_none(cutoffs: Sequence[float], values: Sequence[float]) -> Optional[ExponentFit]:
    if len(cutoffs) < 3 or any(v <= 0 for v in values):
        return None
    return fit_exponent(list(zip(cutoffs, values)))


# ─── Packet Lower Bound ──────────────────────────────────────────────────────

def dirichlet_packet(d: int, N: int) -> FourierState:
    """f_N = Σ_{|k|≤N} e_k."""
    return FourierState.from_frequency_set(enumerate_frequencies(d, N, "ball"))


def packet_window(
    d: int,
    N: int,
    P: PropagatorSpec,
    window_factor: float = WINDOW_FACTOR,
    space_points: int = WINDOW_POINTS,
    time_samples: int = WINDOW_TIME_SAMPLES,
    interval_scaling: str = "unit",
) -> SpaceTimeGrid:
    """Midpoint grid on |t| < c/N^α, |x| < c/N (time widened by N^{2−α} when rescaled)."""
    if interval_scaling not in VALID_INTERVAL_SCALINGS:
        raise ValueError(f"interval_scaling must be one of {VALID_INTERVAL_SCALINGS}, got '{interval_scaling}'")
    if space_points < 2 or time_samples < 2:
        raise ValueError(
            f"Packet window too coarse: need >= 2 samples per axis, got M={space_points}, T={time_samples}"
        )
    time_half = window_factor / N**P.order
    if interval_scaling == "rescaled" and P.order < 2:
        time_half *= N ** (2 - P.order)
    return SpaceTimeGrid.window(d, window_factor / N, time_half, space_points, time_samples)


def packet_norm(
    d: int,
    P: PropagatorSpec,
    p: float,
    q: float,
    N: int,
    window: Optional[SpaceTimeGrid] = None,
    normalized: bool = True,
) -> float:
    """
    ‖e^{itP}f_N‖_{L^p_t L^q_x} over a window, or over (−½, ½) × T^d when
    window is None (default resolutions).
    """
    f = dirichlet_packet(d, N)
    grid = window if window is not None else SpaceTimeGrid.for_state(f, P, interval=(-0.5, 0.5))
    value = mixed_norm(synthesize(f, grid, P), MixedNormSpec(p, q))
    return value / f.l2_norm() if normalized else value


def packet_experiment(
    d: int,
    alpha: float,
    p: float,
    q: float,
    cutoffs: Sequence[int],
    normalized: bool = True,
    window_factor: float = WINDOW_FACTOR,
    space_points: int = WINDOW_POINTS,
    time_samples: int = WINDOW_TIME_SAMPLES,
    interval_scaling: str = "unit",
    propagator: Optional[PropagatorSpec] = None,
) -> ExperimentReport:
    """
    Windowed norm of the Dirichlet packet at each cutoff, fitted in N.

    The window is the coherence region of the packet, so the norm is
    comparable to N^d·|window|^{1/q + 1/p}; normalized divides by ‖f_N‖₂.
    """
    cutoffs = _check_cutoffs("packet", cutoffs)
    P = propagator or PropagatorSpec.fractional(alpha)
    values = []
    for N in cutoffs:
        grid = packet_window(d, N, P, window_factor, space_points, time_samples, interval_scaling)
        value = packet_norm(d, P, p, q, N, window=grid, normalized=normalized)
        logger.info("packet d=%d N=%d value=%.6g", d, N, value)
        values.append(value)
    return ExperimentReport(
        experiment="packet",
        cutoffs=cutoffs,
        values=values,
        fit=fit_or_none(cutoffs, values),
        details={"normalized": normalized, "window_factor": window_factor, "propagator": P.to_dict()},
    )


# ─── Weyl Saturation ─────────────────────────────────────────────────────────

def weyl_saturation_experiment(
    d: int,
    P: PropagatorSpec,
    p: float,
    q: float,
    cutoffs: Sequence[int],
    weight: float = 1.0,
    interval: tuple[float, float] = (0.0, 1.0),
    time_samples: int = 9,
    space_points: Optional[int] = None,
) -> ExperimentReport:
    """
    All pure modes |k| ≤ N with ν ≡ weight.

    Every mode has modulus 1, so the density equals weight·#{|k| ≤ N} at
    every sample. The identity is checked on a coarse periodic grid where
    every mode is synthesized; the norm uses the constant-modulus shortcut
    and is fitted in N.
    """
    cutoffs = _check_cutoffs("weyl_saturation", cutoffs)
    spec = MixedNormSpec(p, q).halved()
    values, counts, identities = [], [], {}
    for N in cutoffs:
        fs = enumerate_frequencies(d, N, "ball")
        system = OrthonormalSystem.from_modes(fs, weight)
        expected = weight * fs.count
        coarse = SpaceTimeGrid.torus(d, 2 * N + 1, interval, 2)
        synthesized = density(system, coarse, P, synthesize_all=True)
        identities[f"density_equals_count[N={N}]"] = bool(
            np.max(np.abs(synthesized.values - expected)) <= IDENTITY_REL_TOL * expected
        )
        packet = dirichlet_packet(d, N)
        grid = SpaceTimeGrid.for_state(packet, P, interval, space_points, time_samples)
        rho = density(system, grid, P)
        value = mixed_norm(rho, spec)
        logger.info("weyl_saturation d=%d N=%d count=%d norm=%.6g", d, N, fs.count, value)
        values.append(value)
        counts.append(fs.count)
    return ExperimentReport(
        experiment="weyl_saturation",
        cutoffs=cutoffs,
        values=values,
        fit=fit_or_none(cutoffs, values),
        identities=identities,
        details={"counts": counts, "weight": weight},
    )


# ─── Shell Eigenfunctions ────────────────────────────────────────────────────

def shell_eigenfunction_experiment(
    d: int,
    q: float,
    cutoffs: Sequence[int],
    window_factor: float = WINDOW_FACTOR,
    space_points: int = WINDOW_POINTS,
) -> ExperimentReport:
    """
    f = Σ_{|k|=N} e_k, an eigenfunction with ‖f‖₂² = r_d(N²) and f(0) = r_d(N²).

    Reports the L^q norm on |x| < c/N divided by r_d(N²)·N^{−d/q}.
    """
    cutoffs = _check_cutoffs("shell_eigenfunction", cutoffs)
    P = PropagatorSpec.fractional(2.0)
    origin = np.zeros((1, d))
    ratios, reps, identities = [], [], {}
    for N in cutoffs:
        shell = enumerate_frequencies(d, N, "shell")
        if shell.count == 0:
            limit = max(cutoffs)
            raise ValueError(
                f"Empty shell |k|={N} in d={d}; admissible N <= {limit}: "
                f"{admissible_shell_radii(d, limit)}"
            )
        r = count_representations(d, N * N)
        f = FourierState.from_frequency_set(shell)
        identities[f"norm_sq_equals_r[N={N}]"] = f.l2_norm_sq() == r == shell.count
        identities[f"origin_value_equals_r[N={N}]"] = complex(evaluate_points(f, P, [0.0], origin)[0, 0]) == r

        grid = SpaceTimeGrid.window(d, window_factor / N, 1.0, space_points, 1)
        measured = float(spatial_norms(synthesize(f, grid, P), q)[0])
        ratio = measured / (r * N ** (-d / q))
        logger.info("shell d=%d N=%d r=%d ratio=%.6g", d, N, r, ratio)
        ratios.append(ratio)
        reps.append(r)
    return ExperimentReport(
        experiment="shell_eigenfunction",
        cutoffs=cutoffs,
        values=ratios,
        identities=identities,
        details={"r_d": reps, "min_ratio": min(ratios), "max_ratio": max(ratios)},
    )


# ─── Torus Spectral Clusters ─────────────────────────────────────────────────

def cluster_state(d: int, j: float, c: float = SHELL_WIDTH) -> FourierState:
    """(shell count)^{−1/2}·Σ_{|k|∈(j−c, j]} e_k, the cluster kernel centred at 0."""
    shell = shell_cluster(d, j, c)
    if shell.count == 0:
        raise ValueError(f"Empty shell cluster (j - c, j] = ({j - c}, {j}] in d={d}")
    return FourierState.from_frequency_set(shell, 1.0 / math.sqrt(shell.count))


def torus_cluster_experiment(
    d: int,
    alpha: float,
    j_values: Sequence[float],
    c: float = SHELL_WIDTH,
    epsilon: float = CLUSTER_EPSILON,
    samples: int = CLUSTER_SAMPLES,
    propagator: Optional[PropagatorSpec] = None,
) -> ExperimentReport:
    """
    Cluster states evolved on |t| ≤ ε·j^{1−α}, sampled on |x| ≤ ε/j.

    Checks u_j(0,0) = √(shell count), coherence |u_j| ≥ ½·u_j(0,0) on the
    box, and orthonormality of the system. values are u_j(0,0), which grow
    like j^{(d−1)/2}; details record the smallest observed |u_j|/u_j(0,0).
    """
    j_values = _check_cutoffs("torus_cluster", j_values, integer=False)
    P = propagator or PropagatorSpec.fractional(alpha)
    origin = np.zeros((1, d))
    states, peaks, floors, identities = [], [], [], {}
    for j in j_values:
        f = cluster_state(d, j, c)
        n = len(f)
        peak = complex(evaluate_points(f, P, [0.0], origin)[0, 0])
        identities[f"origin_value[j={j:g}]"] = math.isclose(
            peak.real, math.sqrt(n), rel_tol=IDENTITY_REL_TOL
        ) and abs(peak.imag) <= IDENTITY_REL_TOL * math.sqrt(n)

        half_width = epsilon / (j * math.sqrt(d))
        time_half = epsilon * j ** (1 - P.order)
        grid = SpaceTimeGrid.window(d, half_width, time_half, samples, samples)
        floor = float(np.abs(synthesize(f, grid, P).values).min() / peak.real)
        identities[f"coherence[j={j:g}]"] = floor >= 0.5
        logger.info("cluster d=%d j=%g count=%d floor=%.6f", d, j, n, floor)
        states.append(f)
        peaks.append(peak.real)
        floors.append(floor)

    system = OrthonormalSystem(np.ones(len(states)), tuple(states))
    identities["orthonormal"] = orthonormality_defect(system) <= IDENTITY_REL_TOL
    return ExperimentReport(
        experiment="torus_cluster",
        cutoffs=j_values,
        values=peaks,
        fit=fit_or_none(j_values, peaks),
        identities=identities,
        details={"coherence_floor": floors, "smallest_constant": min(floors), "epsilon": epsilon},
    )


# ─── Zonal Harmonics on S² ───────────────────────────────────────────────────

@dataclass(frozen=True)
class SphereZonalState:
    """
    Z_j(θ) = √((2j+1)/4π)·P_j(cos θ) sampled on a Gauss-Legendre grid in
    cos θ (uniform in φ, where Z_j is constant).
    """

    degree: int
    nodes: np.ndarray  # cos θ
    weights: np.ndarray  # Gauss-Legendre weights
    values: np.ndarray
    phi_samples: int = SPHERE_PHI_SAMPLES

    @classmethod
    def build(cls, degree: int, nodes: np.ndarray, weights: np.ndarray) -> "SphereZonalState":
        if degree < 0:
            raise ValueError(f"degree must be >= 0, got {degree}")
        scale = math.sqrt((2 * degree + 1) / (4 * math.pi))
        return cls(degree, nodes, weights, scale * eval_legendre(degree, nodes))

    def integrate(self, values: np.ndarray) -> float:
        """∫_{S²} over the product grid: trapezoid in φ, Gauss-Legendre in cos θ."""
        phi_weights = np.full(self.phi_samples, 2 * math.pi / self.phi_samples)
        return float(np.sum(phi_weights) * np.sum(self.weights * values))

    def l2_norm(self) -> float:
        return math.sqrt(self.integrate(self.values**2))

    def pole_value(self) -> float:
        return math.sqrt((2 * self.degree + 1) / (4 * math.pi))


def sphere_quadrature(max_degree: int) -> tuple[np.ndarray, np.ndarray]:
    """2·max_degree + 2 Gauss-Legendre nodes, exact for degree ≤ 4·max_degree + 3."""
    return roots_legendre(2 * max_degree + 2)


def zonal_sphere_experiment(
    cutoffs: Sequence[int],
    p: float,
    q: float,
    interval: tuple[float, float] = (0.0, 1.0),
    check_degrees: int = 128,
) -> ExperimentReport:
    """
    ‖Σ_{j≤N}|Z_j|²‖_{L^{p/2}_t L^{q/2}(S²)} for each cutoff N.

    |e^{itP}Z_j| = |Z_j| for any spectral propagator, so the time norm is
    the factor |I|^{2/p}. Normalization of Z_j is checked for j ≤ check_degrees.
    """
    cutoffs = _check_cutoffs("zonal_sphere", cutoffs)
    spec = MixedNormSpec(p, q).halved()
    identities = {}

    nodes, weights = sphere_quadrature(check_degrees)
    worst = max(
        abs(SphereZonalState.build(j, nodes, weights).l2_norm() - 1.0) for j in range(check_degrees + 1)
    )
    identities[f"normalized[j<={check_degrees}]"] = worst <= SPHERE_NORMALIZATION_TOL

    top = max(cutoffs)
    nodes, weights = sphere_quadrature(top)
    running = np.zeros_like(nodes)
    sums = {}
    for j in range(top + 1):
        z = SphereZonalState.build(j, nodes, weights)
        running = running + z.values**2
        if j in cutoffs:
            sums[j] = (running.copy(), z)

    length = interval[1] - interval[0]
    time_factor = 1.0 if math.isinf(spec.p) else length ** (1.0 / spec.p)
    values = []
    for N in cutoffs:
        total, z = sums[N]
        if math.isinf(spec.q):
            space = float(total.max())
        else:
            space = z.integrate(total**spec.q) ** (1.0 / spec.q)
        values.append(time_factor * space)
        logger.info("zonal N=%d value=%.6g", N, values[-1])
    return ExperimentReport(
        experiment="zonal_sphere",
        cutoffs=cutoffs,
        values=values,
        fit=fit_or_none(cutoffs, values),
        identities=identities,
        details={"max_normalization_error": worst},
    )


# ─── Universal Bound ─────────────────────────────────────────────────────────

def universal_bound_experiment(
    d: int,
    P: PropagatorSpec,
    p: float,
    q: float,
    cutoffs: Sequence[int],
    states: Optional[int] = None,
    seed: int = 0,
    interval: tuple[float, float] = (0.0, 1.0),
    time_samples: int = 5,
) -> ExperimentReport:
    """
    Random orthonormal systems in span{e_k : |k| ≤ N} with ν_j ∈ [0, 1].

    For each t the evolved system stays orthonormal in the same span, so
    Σν_j|u_j|² ≤ max ν·#{|k| ≤ N} pointwise. Checked at every sample.
    """
    cutoffs = _check_cutoffs("universal_bound", cutoffs)
    rng = np.random.default_rng(seed)
    spec = MixedNormSpec(p, q).halved()
    values, identities, peaks = [], {}, []
    for N in cutoffs:
        fs = enumerate_frequencies(d, N, "ball")
        J = fs.count if states is None else min(states, fs.count)
        unitary = random_unitary(fs.count, rng)[:J]
        nu = rng.uniform(0.0, 1.0, J)
        system = mixed_modes(fs, unitary, nu)
        f_probe = dirichlet_packet(d, N)
        grid = SpaceTimeGrid.for_state(f_probe, P, interval, time_samples=time_samples)
        rho_field = density(system, grid, P)
        rho = rho_field.values
        bound = float(nu.max()) * fs.count
        identities[f"bounded_by_count[N={N}]"] = bool(rho.max() <= bound * (1 + IDENTITY_REL_TOL))
        identities[f"nonnegative[N={N}]"] = bool(rho.min() >= DENSITY_FLOOR)
        value = mixed_norm(rho_field, spec)
        logger.info("universal_bound d=%d N=%d peak/bound=%.4f", d, N, rho.max() / bound)
        values.append(value)
        peaks.append(float(rho.max() / bound))
    return ExperimentReport(
        experiment="universal_bound",
        cutoffs=cutoffs,
        values=values,
        fit=fit_or_none(cutoffs, values),
        identities=identities,
        details={"peak_over_bound": peaks, "seed": seed},
    )


# ─── Single-Function Torus Strichartz ────────────────────────────────────────

def cube_state(d: int, N: int, profile: str, rng: np.random.Generator) -> FourierState:
    if profile not in VALID_PROFILES:
        raise ValueError(f"profile must be one of {VALID_PROFILES}, got '{profile}'")
    fs = enumerate_frequencies(d, N, "cube")
    if profile == "ones":
        return FourierState.from_frequency_set(fs)
    return FourierState.from_frequency_set(fs, unit_phase(rng.random(fs.count)))


def torus_strichartz_experiment(
    d: int,
    alpha: float,
    q: float,
    cutoffs: Sequence[int],
    p: Optional[float] = None,
    profile: str = "ones",
    seed: int = 0,
    time_samples: Optional[int] = None,
) -> ExperimentReport:
    """
    ‖e^{itP}f_N‖_{L^p_t L^q_x([0,1) × T^d)}/‖f_N‖₂ for f_N on the cube [−N, N]^d.

    p defaults to q (the diagonal L^q_{t,x} norm).
    """
    cutoffs = _check_cutoffs("torus_strichartz", cutoffs)
    P = PropagatorSpec.fractional(alpha)
    spec = MixedNormSpec(q if p is None else p, q)
    rng = np.random.default_rng(seed)
    values = []
    for N in cutoffs:
        f = cube_state(d, N, profile, rng)
        grid = SpaceTimeGrid.for_state(f, P, (0.0, 1.0), time_samples=time_samples)
        value = mixed_norm(synthesize(f, grid, P), spec) / f.l2_norm()
        logger.info("torus_strichartz d=%d N=%d value=%.6g", d, N, value)
        values.append(value)
    return ExperimentReport(
        experiment="torus_strichartz",
        cutoffs=cutoffs,
        values=values,
        fit=fit_or_none(cutoffs, values),
        details={"profile": profile, "seed": seed},
    )
