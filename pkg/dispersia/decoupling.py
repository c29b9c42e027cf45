"""
Decoupling and Discrete Restriction
===================================
Numerical estimates for the extension operator of the surface
ξ ↦ (ξ, |ξ|^α) over [−1, 1]^d:

    E_Q g(x, t) = ∫_Q g(ξ) e(x·ξ + t|ξ|^α) dξ,   e(s) = e^{2πis}

Decoupling ratio:
  LHS  ‖E_{[−1,1]^d} g‖_{L^p(B_R)}                  (unweighted ball)
  RHS  (Σ_Δ ‖E_Δ g‖²_{L^p(ω_{B_R})})^{1/2}          (δ^{1/2}-cubes Δ)
  with ω_{B_R}(y) = (1 + |y|/R)^{−10d} on the box [−2R, 2R]^{d+1}.

Frequency integrals use the tensor midpoint rule inside each cube; space-time
integrals use the rectangle rule on one midpoint lattice, and the ball B_R
is the subset of that lattice with |y| ≤ R. The result is an estimate of the
continuum ratio.

Discrete restriction: Monte Carlo average of |Σ_ξ a_ξ e(x·ξ + t|ξ|^α)|^p
over B_R for ξ ∈ (1/N)ℤ^d ∩ [−1, 1]^d. Trial maxima are lower bounds of the
true supremum over coefficients.
"""

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Optional, Sequence

import numpy as np

from config import (
    DECOUPLING_GROWTH_EXPONENT,
    DECOUPLING_MAX_AXIS_POINTS,
    DECOUPLING_MIN_AXIS_POINTS,
    DECOUPLING_NODES_PER_SIDE,
    DECOUPLING_SAMPLES_PER_UNIT,
    DECOUPLING_WEIGHT_BOX,
    DECOUPLING_WEIGHT_POWER,
    RESTRICTION_SAMPLES,
    RESTRICTION_TRIALS,
    get_logger,
)
from experiments import ExperimentReport, fit_or_none
from spectral_field import unit_phase

logger = get_logger(__name__)

VALID_DENSITIES = ("constant", "random_phase", "single_cube")
DECOUPLING_DIMENSIONS = (1, 2)

_CHUNK_ELEMENTS = 1 << 22


def critical_decoupling_p(d: int) -> float:
    """2(d+2)/d, the largest p covered by the decoupling inequality."""
    return 2 * (d + 2) / d


def minimal_radius(delta: float, alpha: float) -> float:
    """δ^{−max(1, α/2)}."""
    return delta ** (-max(1.0, alpha / 2))


def _check_p(d: int, p: float):
    upper = critical_decoupling_p(d)
    if not 2 <= p <= upper:
        raise ValueError(f"p must lie in [2, {upper}] for d={d}, got {p}")


# ─── Decoupling ──────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class DecouplingInstance:
    """
    One decoupling configuration.

    Attributes:
        d: Frequency dimension (1, or 2 at small scale)
        alpha: Surface exponent, |ξ|^α
        delta: Cube side is δ^{1/2} (rounded down so the cubes tile [−1, 1]^d)
        density: "constant" g ≡ 1, "random_phase" (one seeded phase per cube)
            or "single_cube" (g = 1 on one cube, 0 elsewhere)
        radius: Ball radius R (default δ^{−max(1, α/2)})
        seed: Seed for random_phase
    """

    d: int
    alpha: float
    delta: float
    density: str = "constant"
    radius: Optional[float] = None
    seed: int = 0
    nodes_per_side: int = DECOUPLING_NODES_PER_SIDE
    samples_per_unit: float = DECOUPLING_SAMPLES_PER_UNIT
    min_axis_points: int = DECOUPLING_MIN_AXIS_POINTS

    def __post_init__(self):
        if self.d not in DECOUPLING_DIMENSIONS:
            raise ValueError(f"decoupling supports d in {DECOUPLING_DIMENSIONS}, got d={self.d}")
        if not self.alpha > 0 or self.alpha == 1:
            raise ValueError(f"alpha must be positive and != 1, got {self.alpha}")
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.density not in VALID_DENSITIES:
            raise ValueError(f"density must be one of {VALID_DENSITIES}, got '{self.density}'")
        if self.nodes_per_side < 1:
            raise ValueError(f"nodes_per_side must be >= 1, got {self.nodes_per_side}")
        floor = minimal_radius(self.delta, self.alpha)
        if self.radius is None:
            object.__setattr__(self, "radius", floor)
        elif self.radius < floor * (1 - 1e-12):
            raise ValueError(
                f"R={self.radius} is below delta^(-max(1, alpha/2)) = {floor} "
                f"(delta={self.delta}, alpha={self.alpha})"
            )

    @property
    def cubes_per_side(self) -> int:
        return math.ceil(2.0 / math.sqrt(self.delta) - 1e-9)

    @property
    def cube_side(self) -> float:
        return 2.0 / self.cubes_per_side

    @property
    def cube_count(self) -> int:
        return self.cubes_per_side**self.d

    def cube_nodes(self, index: int) -> np.ndarray:
        """Midpoint nodes of the index-th cube interval along one axis."""
        n = self.nodes_per_side
        return -1.0 + self.cube_side * (index + (np.arange(n) + 0.5) / n)

    def cube_amplitudes(self) -> np.ndarray:
        """g on each cube (constant inside a cube), in lexicographic cube order."""
        count = self.cube_count
        if self.density == "constant":
            return np.ones(count, dtype=complex)
        if self.density == "single_cube":
            amps = np.zeros(count, dtype=complex)
            centre = (self.cubes_per_side // 2,) * self.d
            amps[np.ravel_multi_index(centre, (self.cubes_per_side,) * self.d)] = 1.0
            return amps
        rng = np.random.default_rng(self.seed)
        return unit_phase(rng.random(count))

    def sample_axis(self) -> np.ndarray:
        """Midpoint lattice on [−B, B], B = weight_box·R, shared by every axis."""
        half = DECOUPLING_WEIGHT_BOX * self.radius
        count = max(self.min_axis_points, math.ceil(2 * half * self.samples_per_unit))
        if count > DECOUPLING_MAX_AXIS_POINTS:
            raise ValueError(
                f"Decoupling grid needs {count} samples per axis "
                f"(limit {DECOUPLING_MAX_AXIS_POINTS}); lower samples_per_unit or R"
            )
        step = 2 * half / count
        return -half + (np.arange(count) + 0.5) * step


@dataclass
class DecouplingResult:
    ratio: float
    lhs: float
    rhs: float
    block_norms: np.ndarray = field(repr=False)
    radius: float = 0.0
    axis_points: int = 0


def _block_coefficients(instance: DecouplingInstance, cube: tuple[int, ...], amplitude: complex):
    """(ξ-nodes per axis, weighted g on the node grid, |ξ|^α on the node grid)."""
    axes = [instance.cube_nodes(i) for i in cube]
    mesh = np.meshgrid(*axes, indexing="ij")
    radius_sq = sum(m * m for m in mesh)
    weight = (instance.cube_side / instance.nodes_per_side) ** instance.d
    return axes, amplitude * weight * np.ones_like(radius_sq), radius_sq ** (instance.alpha / 2)


def _block_field(coeffs, heights, times, spatial_phase) -> np.ndarray:
    """E_Δ g on times × lattice^d; spatial_phase[i] holds e(ξ_i·x) for axis i."""
    expand = times.reshape((-1,) + (1,) * coeffs.ndim)
    temporal = coeffs[None, ...] * unit_phase(expand * heights[None, ...])
    if coeffs.ndim == 1:
        return temporal @ spatial_phase[0]
    return np.einsum("cij,ia,jb->cab", temporal, spatial_phase[0], spatial_phase[1], optimize=True)


def decoupling_ratio(instance: DecouplingInstance, p: float) -> DecouplingResult:
    """
    LHS/RHS of the decoupling inequality for one instance.

    Blocks are evaluated in lexicographic cube order; the full extension is
    their sum, so LHS and RHS are computed in one sweep over time chunks.
    """
    _check_p(instance.d, p)
    d, R = instance.d, instance.radius
    axis = instance.sample_axis()
    L = len(axis)
    volume = (axis[1] - axis[0]) ** (d + 1)

    cubes = list(product(range(instance.cubes_per_side), repeat=d))
    amplitudes = instance.cube_amplitudes()
    blocks = []
    for cube, amp in zip(cubes, amplitudes):
        if amp == 0:
            continue
        axes, coeffs, heights = _block_coefficients(instance, cube, amp)
        phases = [unit_phase(np.outer(a, axis)) for a in axes]
        blocks.append((coeffs, heights, phases))

    space_sq = sum(np.meshgrid(*([axis**2] * d), indexing="ij"))
    power = DECOUPLING_WEIGHT_POWER * d
    lhs_sum = 0.0
    block_sums = np.zeros(len(blocks))
    step = max(1, _CHUNK_ELEMENTS // L**d)
    for start in range(0, L, step):
        times = axis[start:start + step]
        dist = np.sqrt(times.reshape((-1,) + (1,) * d) ** 2 + space_sq[None, ...])
        in_ball = dist <= R
        omega = (1.0 + dist / R) ** (-power)
        total = np.zeros((len(times),) + (L,) * d, dtype=complex)
        for b, (coeffs, heights, phases) in enumerate(blocks):
            piece = _block_field(coeffs, heights, times, phases)
            block_sums[b] += float(np.sum(omega * np.abs(piece) ** p))
            total += piece
        lhs_sum += float(np.sum(np.abs(total[in_ball]) ** p))

    lhs = (volume * lhs_sum) ** (1.0 / p)
    block_norms = (volume * block_sums) ** (1.0 / p)
    rhs = float(np.sqrt(np.sum(block_norms**2)))
    ratio = lhs / rhs if rhs > 0 else 0.0
    logger.debug(
        "decoupling d=%d alpha=%g delta=%g R=%g L=%d ratio=%.6g", d, instance.alpha, instance.delta, R, L, ratio
    )
    return DecouplingResult(ratio, lhs, rhs, block_norms, R, L)


def decoupling_experiment(
    d: int,
    alpha: float,
    p: float,
    deltas: Sequence[float],
    density: str = "constant",
    seed: int = 0,
    growth_exponent: float = DECOUPLING_GROWTH_EXPONENT,
    nodes_per_side: int = DECOUPLING_NODES_PER_SIDE,
    samples_per_unit: float = DECOUPLING_SAMPLES_PER_UNIT,
) -> ExperimentReport:
    """
    Ratio sweep over δ, reported against δ^{−1}.

    Consecutive scales must satisfy ratio(δ') ≤ ratio(δ)·(δ/δ')^{growth_exponent}
    for δ' < δ (with δ/δ' = 4 this is the 4^{0.1} growth check).
    """
    deltas = sorted((float(x) for x in deltas), reverse=True)
    if not deltas:
        raise ValueError("decoupling: deltas must be nonempty")
    ratios, radii = [], []
    for delta in deltas:
        instance = DecouplingInstance(
            d, alpha, delta, density, seed=seed, nodes_per_side=nodes_per_side, samples_per_unit=samples_per_unit
        )
        result = decoupling_ratio(instance, p)
        logger.info("decoupling d=%d alpha=%g delta=%g ratio=%.6g", d, alpha, delta, result.ratio)
        ratios.append(result.ratio)
        radii.append(result.radius)

    identities = {}
    for (coarse, r_coarse), (fine, r_fine) in zip(zip(deltas, ratios), zip(deltas[1:], ratios[1:])):
        bound = r_coarse * (coarse / fine) ** growth_exponent
        identities[f"subpolynomial[delta={fine:g}]"] = r_fine <= bound
    identities["nondegenerate"] = all(r > 0 for r in ratios)

    scales = [1.0 / delta for delta in deltas]
    return ExperimentReport(
        experiment="decoupling",
        cutoffs=scales,
        values=ratios,
        fit=fit_or_none(scales, ratios),
        identities=identities,
        details={"deltas": deltas, "radii": radii, "density": density, "seed": seed},
    )


# ─── Discrete Restriction ────────────────────────────────────────────────────

def separated_frequencies(d: int, N: int) -> np.ndarray:
    """(1/N)ℤ^d ∩ [−1, 1]^d, lexicographic."""
    axis = np.arange(-N, N + 1) / N
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def sample_ball(rng: np.random.Generator, dimension: int, radius: float, count: int) -> np.ndarray:
    """Uniform points in the Euclidean ball of the given dimension."""
    directions = rng.standard_normal((count, dimension))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = radius * rng.random(count) ** (1.0 / dimension)
    return directions * radii[:, None]


def restriction_ratio(
    frequencies: np.ndarray,
    coeffs: np.ndarray,
    alpha: float,
    p: float,
    points: np.ndarray,
) -> float:
    """
    (mean over points of |Σ a_ξ e(x·ξ + t|ξ|^α)|^p)^{1/p} / ‖a‖₂.

    points are (S, d + 1) rows (x, t).
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    norm = float(np.linalg.norm(coeffs))
    if norm == 0:
        raise ValueError("restriction_ratio needs nonzero coefficients")
    d = frequencies.shape[1]
    heights = np.sum(frequencies**2, axis=1) ** (alpha / 2)
    phase = points[:, :d] @ frequencies.T + np.outer(points[:, d], heights)
    values = np.abs(unit_phase(phase) @ coeffs)
    return float(np.mean(values**p) ** (1.0 / p)) / norm


def discrete_restriction_experiment(
    d: int,
    alpha: float,
    p: float,
    cutoffs: Sequence[int],
    radius: Optional[float] = None,
    trials: int = RESTRICTION_TRIALS,
    samples: int = RESTRICTION_SAMPLES,
    seed: int = 0,
) -> ExperimentReport:
    """
    Max over trials of the averaged L^p(B_R) ratio for unit-ℓ² Gaussian
    coefficients on (1/N)ℤ^d ∩ [−1, 1]^d, R = N^{max(2, α)} unless given.
    """
    _check_p(d, p)
    if trials < 1 or samples < 1:
        raise ValueError(f"trials and samples must be >= 1, got {trials}, {samples}")
    rng = np.random.default_rng(seed)
    maxima, radii = [], []
    for N in cutoffs:
        if N < 1 or int(N) != N:
            raise ValueError(f"discrete_restriction: cutoffs must be positive integers, got {N}")
        N = int(N)
        R = N ** max(2.0, alpha) if radius is None else radius
        if R < N ** max(2.0, alpha) * (1 - 1e-12):
            raise ValueError(f"R={R} is below N^max(2, alpha) = {N ** max(2.0, alpha)} for N={N}")
        frequencies = separated_frequencies(d, N)
        best = 0.0
        for _ in range(trials):
            coeffs = rng.standard_normal(len(frequencies)) + 1j * rng.standard_normal(len(frequencies))
            coeffs /= np.linalg.norm(coeffs)
            points = sample_ball(rng, d + 1, R, samples)
            best = max(best, restriction_ratio(frequencies, coeffs, alpha, p, points))
        logger.info("discrete_restriction d=%d N=%d R=%g max_ratio=%.6g", d, N, R, best)
        maxima.append(best)
        radii.append(R)
    cutoffs = [int(n) for n in cutoffs]
    return ExperimentReport(
        experiment="discrete_restriction",
        cutoffs=cutoffs,
        values=maxima,
        fit=fit_or_none(cutoffs, maxima),
        details={"radii": radii, "trials": trials, "samples": samples, "seed": seed},
        sampled_supremum=True,
    )
