"""
Duality Probe
=============
Sampled two-sided check of the duality between orthonormal-system bounds
and Schatten bounds for a finite operator T: ℂ^n → ℂ^{n_t × n_x}.

With a = p/2, b = q/2 and counting measure on the sample grid:

  C_sys   = sup over ONS (f_j), ν ≥ 0 of ‖Σ_j ν_j |T f_j|²‖_{L^a_t L^b_x} / ‖ν‖_{ℓ^β}
  C_dual  = sup over W with ‖W‖_{L^{2a'}_t L^{2b'}_x} = 1 of ‖W T T* W̄‖_{𝔖^{β'}}

Pairing the density against |W|² gives C_sys ≤ C_dual. Both suprema are
sampled here, so they are lower bounds. Each sampled density also yields
its Hölder extremiser V, and W = √V is added to the W sample (C_dual_upper).
A witness pairs with its own density at equality, so C_sys ≤ C_dual_upper
only checks that pairing numerically. The comparison with the random W
alone is reported as random_ratio = C_sys / C_dual and is not a pass
criterion.

Rows of T are time-major: row = t_index·n_x + x_index.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from config import DUALITY_MAX_INPUTS, DUALITY_SAMPLES, DUALITY_SLACK, get_logger
from experiments import ExperimentReport
from norms import (
    FiniteOperator,
    conjugate_exponent,
    parse_exponent,
    random_unitary,
    schatten_norm,
    sequence_norm,
)

logger = get_logger(__name__)


@dataclass
class DualityReport:
    """Sampled constants of one probe. All constants are lower bounds of the true sup."""

    c_sys: float
    c_dual: float  # random W only
    c_dual_upper: float  # random W plus the Hölder witnesses
    passed: bool
    samples: int
    worst_excess: float  # max over systems of C_sys(i)/D(witness_i) − 1
    reverse_gap: Optional[float] = None  # c_dual / c_sys − 1, reported only
    random_ratio: Optional[float] = None  # c_sys / c_dual, random W only
    system_constants: list[float] = field(default_factory=list, repr=False)


def grid_norm(values: np.ndarray, r: float, s: float) -> float:
    """‖F‖_{L^r_t L^s_x} with counting measure; values has shape (n_t, n_x)."""
    per_time = np.array([sequence_norm(row, s) for row in values])
    return sequence_norm(per_time, r)


def holder_witness(rho: np.ndarray, a: float, b: float) -> np.ndarray:
    """
    V ≥ 0 with ‖V‖_{L^{a'}L^{b'}} = 1 and ⟨ρ, V⟩ = ‖ρ‖_{L^a L^b}, for ρ ≥ 0.

    V = ρ^{b−1}·‖ρ(t)‖_b^{a−b} / ‖ρ‖^{a−1}.
    """
    total = grid_norm(rho, a, b)
    if total == 0:
        return np.zeros_like(rho)
    row_norms = np.array([sequence_norm(row, b) for row in rho])
    live = row_norms > 0
    scale = np.zeros_like(row_norms)
    scale[live] = row_norms[live] ** (a - b) / total ** (a - 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        shape = np.where(rho > 0, rho ** (b - 1), 0.0) if b > 1 else np.ones_like(rho)
    return shape * scale[:, None]


def duality_value(T: np.ndarray, W: np.ndarray, beta_dual: float) -> float:
    """‖diag(W) T T* diag(W̄)‖_{𝔖^{β'}}."""
    weighted = W.reshape(-1)[:, None] * T
    return schatten_norm(FiniteOperator(weighted @ weighted.conj().T), beta_dual)


def system_density(T: np.ndarray, states: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Σ_j ν_j |T f_j|² for the rows f_j of states, summed in ascending j."""
    images = states @ T.T  # (J, rows)
    return np.sum(weights[:, None] * (images.real**2 + images.imag**2), axis=0)


def _random_weight(rng: np.random.Generator, shape: tuple[int, int], signed: bool) -> np.ndarray:
    if signed:
        return rng.choice([-1.0, 1.0], size=shape).astype(complex)
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def duality_probe(
    T: FiniteOperator,
    p: float,
    q: float,
    beta: float,
    samples: int = DUALITY_SAMPLES,
    time_points: int = 1,
    seed: int = 0,
    slack: float = DUALITY_SLACK,
) -> DualityReport:
    """
    Sample both constants and check C_sys ≤ (1 + slack)·C_dual_upper.

    Systems: `samples` random isometries (random row count, ν = |Gaussian|)
    plus each input basis vector alone and the full basis with ν ≡ 1.
    Weights W: `samples` draws alternating random signs and Gaussians.
    """
    p, q = parse_exponent(p, "p"), parse_exponent(q, "q")
    beta = parse_exponent(beta, "beta")
    if math.isinf(p) or math.isinf(q) or p < 2 or q < 2:
        raise ValueError(f"duality_probe needs finite p, q >= 2, got p={p}, q={q}")
    matrix = T.matrix
    rows, n = matrix.shape
    if n > DUALITY_MAX_INPUTS:
        raise ValueError(f"duality_probe supports n <= {DUALITY_MAX_INPUTS} inputs, got {n}")
    if time_points < 1 or rows % time_points:
        raise ValueError(f"{rows} rows do not split into {time_points} time samples")
    grid = (time_points, rows // time_points)
    a, b = p / 2, q / 2
    a_dual, b_dual = conjugate_exponent(a), conjugate_exponent(b)
    beta_dual = conjugate_exponent(beta)

    if not np.any(matrix):
        return DualityReport(0.0, 0.0, 0.0, True, 0, 0.0)

    rng = np.random.default_rng(seed)

    # (a) random W, normalized so that ‖|W|²‖_{L^{a'}L^{b'}} = ‖W‖²_{L^{2a'}L^{2b'}} = 1
    c_dual = 0.0
    for i in range(samples):
        W = _random_weight(rng, grid, signed=i % 2 == 0)
        W = W / math.sqrt(grid_norm(np.abs(W) ** 2, a_dual, b_dual))
        c_dual = max(c_dual, duality_value(matrix, W, beta_dual))

    # (b) systems and their Hölder witnesses
    systems = [(np.eye(n, dtype=complex)[[i]], np.ones(1)) for i in range(n)]
    systems.append((np.eye(n, dtype=complex), np.ones(n)))
    for _ in range(samples):
        J = int(rng.integers(1, n + 1))
        systems.append((random_unitary(n, rng)[:J], np.abs(rng.standard_normal(J))))

    c_sys, c_witness, worst = 0.0, 0.0, -math.inf
    constants = []
    for states, weights in systems:
        rho = system_density(matrix, states, weights).reshape(grid)
        value = grid_norm(rho, a, b) / sequence_norm(weights, beta)
        witness = duality_value(matrix, np.sqrt(holder_witness(rho, a, b)), beta_dual)
        constants.append(value)
        c_sys = max(c_sys, value)
        c_witness = max(c_witness, witness)
        if witness > 0:
            worst = max(worst, value / witness - 1.0)

    c_dual_upper = max(c_dual, c_witness)
    passed = c_sys <= (1 + slack) * c_dual_upper
    if not passed:
        logger.warning("duality probe: C_sys=%.6g exceeds C_dual_upper=%.6g", c_sys, c_dual_upper)
    return DualityReport(
        c_sys=c_sys,
        c_dual=c_dual,
        c_dual_upper=c_dual_upper,
        passed=passed,
        samples=samples,
        worst_excess=worst if math.isfinite(worst) else 0.0,
        reverse_gap=c_dual_upper / c_sys - 1.0 if c_sys > 0 else None,
        random_ratio=c_sys / c_dual if c_dual > 0 else None,
        system_constants=constants,
    )


# ─── Closed-Form Instance ────────────────────────────────────────────────────

def rank_one_constant(n: int, time_points: int, space_points: int) -> FiniteOperator:
    """T = u e_0* with u the unit-norm constant function on the sample grid."""
    size = time_points * space_points
    matrix = np.zeros((size, n), dtype=complex)
    matrix[:, 0] = 1.0 / math.sqrt(size)
    return FiniteOperator(matrix)


def rank_one_constant_value(p: float, q: float, time_points: int, space_points: int) -> float:
    """Both constants of rank_one_constant at β = 1: n_t^{2/p}·n_x^{2/q} / (n_t·n_x)."""
    return time_points ** (2 / p) * space_points ** (2 / q) / (time_points * space_points)


# ─── Experiment ──────────────────────────────────────────────────────────────

def duality_experiment(
    p: float,
    q: float,
    beta: float,
    inputs: int = 8,
    rows: int = 16,
    time_points: int = 4,
    instances: int = 200,
    samples: int = 4,
    seed: int = 0,
    slack: float = DUALITY_SLACK,
) -> ExperimentReport:
    """
    duality_probe on `instances` seeded Gaussian operators of shape rows × inputs.

    values[i] is C_sys/C_dual_upper for instance i. details["max_random_ratio"]
    is the largest C_sys/C_dual against random W only.
    """
    if instances < 1:
        raise ValueError(f"instances must be >= 1, got {instances}")
    rng = np.random.default_rng(seed)
    ratios, excess, gaps, random_ratios, identities = [], [], [], [], {}
    for i in range(instances):
        matrix = rng.standard_normal((rows, inputs)) + 1j * rng.standard_normal((rows, inputs))
        report = duality_probe(
            FiniteOperator(matrix), p, q, beta, samples, time_points, seed=int(rng.integers(2**31)), slack=slack
        )
        identities[f"forward[{i}]"] = report.passed
        ratios.append(report.c_sys / report.c_dual_upper)
        excess.append(report.worst_excess)
        if report.reverse_gap is not None:
            gaps.append(report.reverse_gap)
        if report.random_ratio is not None:
            random_ratios.append(report.random_ratio)
    logger.info("duality %d instances, max C_sys/C_dual_upper=%.9f", instances, max(ratios))
    return ExperimentReport(
        experiment="duality_probe",
        cutoffs=list(range(1, instances + 1)),
        values=ratios,
        identities=identities,
        details={
            "max_ratio": max(ratios),
            "max_worst_excess": max(excess),
            "max_reverse_gap": max(gaps) if gaps else None,
            "max_random_ratio": max(random_ratios) if random_ratios else None,
            "seed": seed,
        },
        sampled_supremum=True,
    )
