"""
Norms Module
============
Mixed space-time Lebesgue norms by quadrature, Gram matrices with an
orthonormality certificate, and Schatten norms of finite operators.

Quadrature:
  - Inner L^q_x per time slice by the rectangle rule on the grid cells
  - Outer L^p_t by the rectangle rule on the time samples
  - p or q = ∞ takes the sample maximum (a lower bound of the true sup)

On periodic grids the rectangle rule integrates trigonometric polynomials
exactly once M exceeds their bandwidth, so q = 2 (Plancherel) and even
integer q are exact at the default resolutions.

Exponents are floats in [1, ∞]; ∞ is math.inf, never a large finite value.
"""

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np
import scipy.linalg
from scipy.stats import unitary_group

from config import ORTHONORMALITY_TOL, get_logger
from lattice_core import FrequencySet
from spectral_field import FourierState, PropagatorSpec, SpaceTimeField, evolve

logger = get_logger(__name__)

_INFINITY_NAMES = ("inf", "infinity", "∞")


def parse_exponent(value, name: str = "exponent") -> float:
    """Accept a number ≥ 1 or an explicit infinity ("inf", math.inf)."""
    if isinstance(value, str):
        if value.strip().lower() in _INFINITY_NAMES:
            return math.inf
        try:
            value = float(value)
        except ValueError:
            raise ValueError(f"{name} must be a number >= 1 or 'inf', got '{value}'") from None
    value = float(value)
    if math.isnan(value) or value < 1:
        raise ValueError(f"{name} must be >= 1, got {value}")
    return value


def format_exponent(value: float):
    return "inf" if math.isinf(value) else value


def conjugate_exponent(value: float) -> float:
    """Hölder conjugate r' with 1/r + 1/r' = 1."""
    if value == 1:
        return math.inf
    if math.isinf(value):
        return 1.0
    return value / (value - 1.0)


def sequence_norm(values, exponent: float) -> float:
    """ℓ^r norm of a finite sequence, r ∈ [1, ∞]."""
    mags = np.abs(np.asarray(values, dtype=complex)).ravel()
    if mags.size == 0:
        return 0.0
    if math.isinf(exponent):
        return float(mags.max())
    peak = mags.max()
    if peak == 0:
        return 0.0
    return float(peak * np.sum((mags / peak) ** exponent) ** (1.0 / exponent))


def _weighted_norm(mags: np.ndarray, exponent: float, weight: float, axis: int) -> np.ndarray:
    if math.isinf(exponent):
        return mags.max(axis=axis)
    return (np.sum(mags**exponent, axis=axis) * weight) ** (1.0 / exponent)


# ─── Mixed Norms ─────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class MixedNormSpec:
    """
    L^p_t L^q_x evaluation.

    Attributes:
        p: Time exponent in [1, ∞]
        q: Space exponent in [1, ∞]
        interval: Expected time interval of the field (None = accept the grid's)
        resolutions: Expected (time count, space points per axis) (None = accept the grid's)
    """

    p: float
    q: float
    interval: Optional[tuple[float, float]] = None
    resolutions: Optional[tuple[int, int]] = None

    def __post_init__(self):
        object.__setattr__(self, "p", parse_exponent(self.p, "p"))
        object.__setattr__(self, "q", parse_exponent(self.q, "q"))

    @classmethod
    def from_dict(cls, data: Mapping) -> "MixedNormSpec":
        interval = data.get("interval")
        resolutions = data.get("resolutions")
        return cls(
            p=data["p"],
            q=data["q"],
            interval=tuple(interval) if interval is not None else None,
            resolutions=tuple(resolutions) if resolutions is not None else None,
        )

    def to_dict(self) -> dict:
        return {
            "p": format_exponent(self.p),
            "q": format_exponent(self.q),
            "interval": list(self.interval) if self.interval else None,
            "resolutions": list(self.resolutions) if self.resolutions else None,
        }

    def halved(self) -> "MixedNormSpec":
        """The L^{p/2}_t L^{q/2}_x spec used for densities."""
        return MixedNormSpec(self.p / 2, self.q / 2, self.interval, self.resolutions)


def spatial_norms(field: SpaceTimeField, q: float) -> np.ndarray:
    """‖u(t_i, ·)‖_{L^q_x} for every time sample."""
    mags = np.abs(field.values).reshape(field.grid.time_count, -1)
    return _weighted_norm(mags, q, field.grid.cell_volume, axis=1)


def mixed_norm(field: SpaceTimeField, spec: MixedNormSpec) -> float:
    """Composite rectangle-rule ‖u‖_{L^p_t L^q_x}."""
    grid = field.grid
    if spec.resolutions is not None and tuple(spec.resolutions) != (grid.time_count, grid.space_points):
        raise ValueError(
            f"Resolution mismatch: spec expects {tuple(spec.resolutions)}, "
            f"field has (T={grid.time_count}, M={grid.space_points})"
        )
    if spec.interval is not None and not np.allclose(spec.interval, grid.interval, rtol=0, atol=1e-12):
        raise ValueError(f"Interval mismatch: spec expects {spec.interval}, field has {grid.interval}")
    per_time = spatial_norms(field, spec.q)
    return float(_weighted_norm(per_time, spec.p, grid.time_step, axis=0))


# ─── Orthonormal Systems ─────────────────────────────────────────────────────

def coefficient_matrix(states: Sequence[FourierState]) -> tuple[np.ndarray, list[tuple[int, ...]]]:
    """
    Dense (J, n) matrix of coefficients over the union of supports.

    Returns:
        (matrix, frequencies) where column c holds the amplitude at frequencies[c].
    """
    frequencies = sorted({k for f in states for k in f.coeffs})
    column = {k: c for c, k in enumerate(frequencies)}
    matrix = np.zeros((len(states), len(frequencies)), dtype=complex)
    for row, f in enumerate(states):
        for k, value in f.coeffs.items():
            matrix[row, column[k]] = value
    return matrix, frequencies


@dataclass(frozen=True)
class OrthonormalSystem:
    """
    Weighted family (ν_j, f_j).

    certified is True only when the Gram matrix was checked against the
    identity (see certify), or when the states are distinct pure modes.
    """

    weights: np.ndarray
    states: tuple[FourierState, ...]
    certified: bool = False

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        states = tuple(self.states)
        if len(weights) != len(states):
            raise ValueError(f"{len(weights)} weights for {len(states)} states")
        dims = {f.dimension for f in states}
        if len(dims) > 1:
            raise ValueError(f"states mix dimensions {sorted(dims)}")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "states", states)

    @classmethod
    def from_modes(cls, fs: FrequencySet, weight: float = 1.0) -> "OrthonormalSystem":
        """One pure mode e_k per point, all with weight ν."""
        states = tuple(FourierState.mode(tuple(k)) for k in fs.points)
        # FrequencySet points are distinct, so G = Id exactly without forming it
        return cls(np.full(len(states), weight, dtype=float), states, certified=True)

    @property
    def size(self) -> int:
        return len(self.states)

    @property
    def dimension(self) -> int:
        return self.states[0].dimension if self.states else 0

    def weight_norm(self, beta: float) -> float:
        """‖ν‖_{ℓ^β}."""
        return sequence_norm(self.weights, parse_exponent(beta, "beta"))

    def evolved(self, t: float, P: PropagatorSpec) -> "OrthonormalSystem":
        return OrthonormalSystem(self.weights, tuple(evolve(f, t, P) for f in self.states), self.certified)

    def certify(self, tol: float = ORTHONORMALITY_TOL) -> "OrthonormalSystem":
        """Return a certified copy, or raise if max|G − Id| > tol."""
        deviation = orthonormality_defect(self)
        if deviation > tol:
            raise ValueError(f"Not orthonormal: max |G - Id| = {deviation:.3e} exceeds tol={tol:.1e}")
        return OrthonormalSystem(self.weights, self.states, certified=True)


def gram(system: OrthonormalSystem) -> np.ndarray:
    """G_ij = ⟨f_i, f_j⟩ = Σ_k a_k^(i) conj(a_k^(j))."""
    matrix, _ = coefficient_matrix(system.states)
    return matrix @ matrix.conj().T


def orthonormality_defect(system: OrthonormalSystem) -> float:
    if system.size == 0:
        return 0.0
    return float(np.max(np.abs(gram(system) - np.eye(system.size))))


def is_orthonormal(system: OrthonormalSystem, tol: float = ORTHONORMALITY_TOL) -> bool:
    return orthonormality_defect(system) <= tol


def mixed_modes(fs: FrequencySet, unitary: np.ndarray, weights=None) -> OrthonormalSystem:
    """
    Rows of a unitary applied to the pure modes of fs.

    unitary may have fewer rows than fs has points (an isometry's adjoint);
    orthonormality of the rows carries over to the states.
    """
    unitary = np.asarray(unitary, dtype=complex)
    if unitary.shape[1] != fs.count:
        raise ValueError(f"unitary has {unitary.shape[1]} columns for {fs.count} modes")
    states = tuple(FourierState.from_arrays(fs.dimension, fs.points, row) for row in unitary)
    if weights is None:
        weights = np.ones(len(states))
    return OrthonormalSystem(weights, states)


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed n×n unitary."""
    if n == 1:
        return np.exp(2j * np.pi * rng.random((1, 1)))
    return unitary_group.rvs(n, random_state=rng)


# ─── Schatten Norms ──────────────────────────────────────────────────────────

@dataclass(frozen=True)
class FiniteOperator:
    """Matrix of a linear map; rows index output samples, columns the input basis."""

    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=complex)
        if matrix.ndim != 2:
            raise ValueError(f"FiniteOperator needs a 2-D matrix, got shape {matrix.shape}")
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def diagonal(cls, values) -> "FiniteOperator":
        return cls(np.diag(np.asarray(values, dtype=complex)))

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def adjoint(self) -> "FiniteOperator":
        return FiniteOperator(self.matrix.conj().T)

    def singular_values(self) -> np.ndarray:
        """Nonnegative, sorted descending."""
        if self.matrix.size == 0:
            return np.zeros(0)
        return scipy.linalg.svdvals(self.matrix)


def schatten_norm(T: FiniteOperator, beta) -> float:
    """‖T‖_{𝔖^β} = (Σ σ_i^β)^{1/β}; β = ∞ is the operator norm."""
    beta = parse_exponent(beta, "beta")
    return sequence_norm(T.singular_values(), beta)
