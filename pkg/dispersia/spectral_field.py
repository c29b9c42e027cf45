"""
Spectral Field Module
=====================
Functions on the torus T^d = [0, 1)^d represented by their Fourier
coefficients, together with frequency projections, dispersive propagators
and space-time synthesis.

Conventions:
  - Basis e_k(x) = e^{2πik·x}, eigenvalue label λ_k = |k|
  - The propagator e^{itP} multiplies a_k by e^{2πi·t·dispersion(|k|)}
  - dispersion(λ) = λ^α (fractional Schrödinger) or √(m² + λ²) (Klein-Gordon);
    the wave propagator is Klein-Gordon with m = 0
  - With α = 2 every integer |k|² gives an integer phase, so the flow is
    exactly 1-periodic in time

Two synthesis paths:
  - Periodic grids (uniform on [0, 1)^d, left endpoints) use a zero-padded
    inverse FFT per time slice
  - Window grids (midpoints of a box around the origin) use a direct
    exponential sum factored over the coordinate axes

Main entry points: evolve(f, t, P), synthesize(f, grid, P), density(system, grid, P)
"""

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Mapping, Optional

import numpy as np
import scipy.fft

from config import (
    MAX_DENSE_POINTS,
    SPACE_OVERSAMPLING,
    TIME_SAMPLES_PER_OSCILLATION,
    get_logger,
    thread_cap,
)
from lattice_core import FrequencySet, check_dimension

logger = get_logger(__name__)

# Complex entries per FFT batch; bounds peak memory of a synthesis call.
_CHUNK_ELEMENTS = 1 << 22

_EINSUM_SPATIAL = {
    1: "tn,in->ti",
    2: "tn,in,jn->tij",
    3: "tn,in,jn,kn->tijk",
}


def unit_phase(x) -> np.ndarray:
    """e^{2πi x}, with x reduced mod 1 first."""
    return np.exp(2j * np.pi * np.mod(x, 1.0))


# ─── Fourier States ──────────────────────────────────────────────────────────

@dataclass(frozen=True)
class FourierState:
    """
    Sparse Fourier coefficients of a trigonometric polynomial on T^d.

    coeffs maps a frequency tuple k to its complex amplitude. Entries are
    kept in lexicographic order of k and exact zeros are dropped on
    construction.
    """

    dimension: int
    coeffs: Mapping[tuple[int, ...], complex] = field(default_factory=dict)

    def __post_init__(self):
        check_dimension(self.dimension)
        cleaned = {}
        for key, value in self.coeffs.items():
            key = tuple(int(c) for c in key)
            if len(key) != self.dimension:
                raise ValueError(
                    f"Frequency {key} has length {len(key)}, expected d={self.dimension}"
                )
            cleaned[key] = cleaned.get(key, 0) + complex(value)
        ordered = {k: cleaned[k] for k in sorted(cleaned) if cleaned[k] != 0}
        object.__setattr__(self, "coeffs", ordered)

    # ── constructors ──

    @classmethod
    def from_arrays(cls, d: int, keys, values) -> "FourierState":
        keys = np.asarray(keys, dtype=np.int64).reshape(-1, d)
        values = np.asarray(values, dtype=complex).reshape(-1)
        if len(keys) != len(values):
            raise ValueError(f"{len(keys)} frequencies but {len(values)} amplitudes")
        return cls(d, {tuple(int(c) for c in k): complex(v) for k, v in zip(keys, values)})

    @classmethod
    def constant(cls, d: int, amplitude: complex = 1.0) -> "FourierState":
        return cls(d, {(0,) * d: amplitude})

    @classmethod
    def mode(cls, k: Iterable[int], amplitude: complex = 1.0) -> "FourierState":
        k = tuple(int(c) for c in k)
        return cls(len(k), {k: amplitude})

    @classmethod
    def from_frequency_set(cls, fs: FrequencySet, amplitudes=1.0) -> "FourierState":
        values = np.broadcast_to(np.asarray(amplitudes, dtype=complex), (fs.count,))
        return cls.from_arrays(fs.dimension, fs.points, values)

    # ── views ──

    def __len__(self) -> int:
        return len(self.coeffs)

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def support(self) -> np.ndarray:
        """(n, d) int64 array of frequencies, lexicographic."""
        if not self.coeffs:
            return np.zeros((0, self.dimension), dtype=np.int64)
        return np.array(list(self.coeffs.keys()), dtype=np.int64).reshape(-1, self.dimension)

    def amplitudes(self) -> np.ndarray:
        return np.array(list(self.coeffs.values()), dtype=complex)

    def norm_sq_of_support(self) -> np.ndarray:
        keys = self.support()
        return np.sum(keys * keys, axis=1)

    def l2_norm_sq(self) -> float:
        values = self.amplitudes()
        return float(np.sum(values.real**2 + values.imag**2))

    def l2_norm(self) -> float:
        return math.sqrt(self.l2_norm_sq())

    def max_frequency(self) -> int:
        """max |k_i| over the support (0 when empty)."""
        keys = self.support()
        return int(np.abs(keys).max()) if len(keys) else 0

    def max_radius(self) -> float:
        """max |k| over the support (0 when empty)."""
        return math.sqrt(int(self.norm_sq_of_support().max())) if self.coeffs else 0.0

    # ── algebra ──

    def scaled(self, c: complex) -> "FourierState":
        return FourierState(self.dimension, {k: c * v for k, v in self.coeffs.items()})

    def __add__(self, other: "FourierState") -> "FourierState":
        if other.dimension != self.dimension:
            raise ValueError(f"Cannot add states of dimension {self.dimension} and {other.dimension}")
        merged = dict(self.coeffs)
        for k, v in other.coeffs.items():
            merged[k] = merged.get(k, 0) + v
        return FourierState(self.dimension, merged)

    def inner(self, other: "FourierState") -> complex:
        """⟨self, other⟩ = Σ_k a_k conj(b_k)."""
        return complex(sum(v * other.coeffs[k].conjugate() for k, v in self.coeffs.items() if k in other.coeffs))

    def with_multiplier(self, symbol: Callable[[np.ndarray], np.ndarray]) -> "FourierState":
        """Multiply a_k by symbol(|k|²); symbol acts on the int64 array of |k|²."""
        if not self.coeffs:
            return self
        factors = np.asarray(symbol(self.norm_sq_of_support()))
        return FourierState.from_arrays(self.dimension, self.support(), self.amplitudes() * factors)

    # ── serialization ──

    def to_json_dict(self) -> dict:
        return {
            "d": self.dimension,
            "entries": [[list(k), v.real, v.imag] for k, v in self.coeffs.items()],
        }

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "FourierState":
        try:
            d = int(data["d"])
            entries = data["entries"]
            coeffs = {tuple(k): complex(float(re), float(im)) for k, re, im in entries}
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"Malformed FourierState JSON: {exc}") from None
        return cls(d, coeffs)

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json(cls, text: str) -> "FourierState":
        return cls.from_json_dict(json.loads(text))


# ─── Bump Profile and Projections ────────────────────────────────────────────

def _transition(r: np.ndarray) -> np.ndarray:
    """g(r) = exp(−1/r) for r > 0, else 0."""
    positive = r > 0
    return np.where(positive, np.exp(-1.0 / np.where(positive, r, 1.0)), 0.0)


@dataclass(frozen=True)
class BumpProfile:
    """Smooth radial cutoff: 1 on |s| ≤ inner, 0 on |s| ≥ outer."""

    inner: float = 1.0
    outer: float = 2.0

    def __post_init__(self):
        if not 0 < self.inner < self.outer:
            raise ValueError(
                f"BumpProfile needs 0 < inner < outer, got inner={self.inner}, outer={self.outer}"
            )

    def __call__(self, s) -> np.ndarray:
        s = np.abs(np.asarray(s, dtype=float))
        span = self.outer - self.inner
        rising = _transition((self.outer - s) / span)
        falling = _transition((s - self.inner) / span)
        return rising / (rising + falling)


DEFAULT_BUMP = BumpProfile()


def project_frequency(f: FourierState, psi: BumpProfile = DEFAULT_BUMP, N: float = 1.0) -> FourierState:
    """Multiply a_k by ψ(|k|/N); the result is supported in |k| < outer·N."""
    if N <= 0:
        raise ValueError(f"cutoff N must be > 0, got {N}")
    return f.with_multiplier(lambda norm_sq: psi(np.sqrt(norm_sq) / N))


def littlewood_paley_symbol(level: int, s, psi: BumpProfile = DEFAULT_BUMP) -> np.ndarray:
    """φ_0 = ψ, φ_ℓ(s) = ψ(s/2^ℓ) − ψ(s/2^{ℓ−1}); the pieces telescope to 1."""
    if level < 0:
        raise ValueError(f"Littlewood-Paley level must be >= 0, got {level}")
    s = np.asarray(s, dtype=float)
    if level == 0:
        return psi(s)
    return psi(s / 2.0**level) - psi(s / 2.0 ** (level - 1))


def littlewood_paley_piece(f: FourierState, level: int, psi: BumpProfile = DEFAULT_BUMP) -> FourierState:
    """Dyadic piece of f at frequencies |k| ≈ 2^level."""
    return f.with_multiplier(lambda norm_sq: littlewood_paley_symbol(level, np.sqrt(norm_sq), psi))


def littlewood_paley_depth(f: FourierState, psi: BumpProfile = DEFAULT_BUMP) -> int:
    """Smallest L with Σ_{ℓ≤L} φ_ℓ ≡ 1 on the support of f."""
    radius = f.max_radius()
    if radius <= psi.inner:
        return 0
    return max(0, math.ceil(math.log2(radius / psi.inner)))


def littlewood_paley_decomposition(f: FourierState, psi: BumpProfile = DEFAULT_BUMP) -> list[FourierState]:
    return [littlewood_paley_piece(f, level, psi) for level in range(littlewood_paley_depth(f, psi) + 1)]


# ─── Propagators ─────────────────────────────────────────────────────────────

class PropagatorKind(str, Enum):
    FRACTIONAL_SCHRODINGER = "fractional_schrodinger"
    KLEIN_GORDON = "klein_gordon"


VALID_PROPAGATORS = tuple(k.value for k in PropagatorKind) + ("wave",)


@dataclass(frozen=True)
class PropagatorSpec:
    """e^{itP} with P = |∇|^α or P = √(m² − Δ)."""

    kind: PropagatorKind
    alpha: float = 2.0
    mass: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", PropagatorKind(self.kind))
        if self.kind is PropagatorKind.FRACTIONAL_SCHRODINGER:
            if not self.alpha > 0 or self.alpha == 1:
                raise ValueError(f"alpha must be positive and != 1, got {self.alpha}")
        elif self.mass < 0:
            raise ValueError(f"Klein-Gordon mass must be >= 0, got {self.mass}")

    @classmethod
    def fractional(cls, alpha: float) -> "PropagatorSpec":
        return cls(PropagatorKind.FRACTIONAL_SCHRODINGER, alpha=alpha)

    @classmethod
    def klein_gordon(cls, mass: float = 1.0) -> "PropagatorSpec":
        return cls(PropagatorKind.KLEIN_GORDON, alpha=1.0, mass=mass)

    @classmethod
    def wave(cls) -> "PropagatorSpec":
        return cls.klein_gordon(0.0)

    @classmethod
    def from_dict(cls, data: Mapping) -> "PropagatorSpec":
        kind = data.get("kind", PropagatorKind.FRACTIONAL_SCHRODINGER.value)
        if kind not in VALID_PROPAGATORS:
            raise ValueError(f"propagator kind must be one of {VALID_PROPAGATORS}, got '{kind}'")
        if kind == "wave":
            return cls.wave()
        if kind == PropagatorKind.KLEIN_GORDON.value:
            return cls.klein_gordon(float(data.get("mass", 1.0)))
        return cls.fractional(float(data.get("alpha", 2.0)))

    def to_dict(self) -> dict:
        if self.kind is PropagatorKind.KLEIN_GORDON:
            return {"kind": self.kind.value, "mass": self.mass}
        return {"kind": self.kind.value, "alpha": self.alpha}

    @property
    def order(self) -> float:
        """Growth order of the dispersion relation (1 for Klein-Gordon)."""
        return self.alpha if self.kind is PropagatorKind.FRACTIONAL_SCHRODINGER else 1.0

    def dispersion(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=float)
        if self.kind is PropagatorKind.FRACTIONAL_SCHRODINGER:
            return lam**self.alpha
        return np.sqrt(self.mass**2 + lam**2)

    def dispersion_from_norm_sq(self, norm_sq) -> np.ndarray:
        """dispersion(√n) evaluated without the square root where possible."""
        norm_sq = np.asarray(norm_sq, dtype=float)
        if self.kind is PropagatorKind.FRACTIONAL_SCHRODINGER:
            return norm_sq ** (self.alpha / 2.0)
        return np.sqrt(self.mass**2 + norm_sq)


def evolve(f: FourierState, t: float, P: PropagatorSpec) -> FourierState:
    """e^{itP} f: a_k ↦ a_k·e^{2πi·t·dispersion(|k|)}."""
    if t == 0:
        return f
    return f.with_multiplier(lambda norm_sq: unit_phase(t * P.dispersion_from_norm_sq(norm_sq)))


# ─── Space-Time Grids ────────────────────────────────────────────────────────

def default_space_points(max_frequency: int) -> int:
    return SPACE_OVERSAMPLING * max_frequency + 1


def default_time_samples(max_dispersion: float, length: float) -> int:
    return TIME_SAMPLES_PER_OSCILLATION * math.ceil(max_dispersion * length) + 1


@dataclass(frozen=True)
class SpaceTimeGrid:
    """
    Uniform samples of I × box.

    Periodic grids cover [0, 1)^d with left endpoints x_i = i/M and times
    t_i = t_start + i·|I|/T. Window grids cover an origin-centred box with
    midpoints in space and time.
    """

    dimension: int
    interval: tuple[float, float]
    time_count: int
    space_points: int
    space_origin: float = 0.0
    space_extent: float = 1.0
    midpoint: bool = False

    def __post_init__(self):
        check_dimension(self.dimension)
        start, end = self.interval
        if not end > start:
            raise ValueError(f"time interval must have t_end > t_start, got {self.interval}")
        if self.time_count < 1 or self.space_points < 1:
            raise ValueError(
                f"grid needs >= 1 sample per axis, got T={self.time_count}, M={self.space_points}"
            )
        if self.space_extent <= 0:
            raise ValueError(f"space_extent must be > 0, got {self.space_extent}")

    @classmethod
    def torus(cls, d: int, space_points: int, interval=(0.0, 1.0), time_samples: int = 1) -> "SpaceTimeGrid":
        return cls(d, tuple(interval), time_samples, space_points)

    @classmethod
    def window(
        cls,
        d: int,
        half_width: float,
        time_half_width: float,
        space_points: int,
        time_samples: int,
    ) -> "SpaceTimeGrid":
        """Midpoint grid on (−τ, τ) × (−w, w)^d."""
        return cls(
            d,
            (-time_half_width, time_half_width),
            time_samples,
            space_points,
            space_origin=-half_width,
            space_extent=2.0 * half_width,
            midpoint=True,
        )

    @classmethod
    def for_state(
        cls,
        f: FourierState,
        P: PropagatorSpec,
        interval=(0.0, 1.0),
        space_points: Optional[int] = None,
        time_samples: Optional[int] = None,
    ) -> "SpaceTimeGrid":
        """Torus grid sized by the default resolution rules for f."""
        if space_points is None:
            space_points = default_space_points(f.max_frequency())
        if time_samples is None:
            max_disp = float(P.dispersion(f.max_radius()))
            time_samples = default_time_samples(max_disp, interval[1] - interval[0])
        return cls.torus(f.dimension, space_points, interval, time_samples)

    @property
    def is_periodic(self) -> bool:
        return self.space_origin == 0.0 and self.space_extent == 1.0 and not self.midpoint

    @property
    def time_step(self) -> float:
        return (self.interval[1] - self.interval[0]) / self.time_count

    @property
    def spacing(self) -> float:
        return self.space_extent / self.space_points

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dimension

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.time_count,) + (self.space_points,) * self.dimension

    @property
    def size(self) -> int:
        return self.time_count * self.space_points**self.dimension

    def times(self) -> np.ndarray:
        offset = 0.5 if self.midpoint else 0.0
        return self.interval[0] + (np.arange(self.time_count) + offset) * self.time_step

    def axis(self) -> np.ndarray:
        offset = 0.5 if self.midpoint else 0.0
        return self.space_origin + (np.arange(self.space_points) + offset) * self.spacing


@dataclass
class SpaceTimeField:
    """Samples u(t_i, x) with values of shape (T, M, ..., M)."""

    grid: SpaceTimeGrid
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != self.grid.shape:
            raise ValueError(f"values shape {self.values.shape} does not match grid {self.grid.shape}")

    def scaled(self, c: complex) -> "SpaceTimeField":
        return SpaceTimeField(self.grid, c * self.values)


# ─── Synthesis ───────────────────────────────────────────────────────────────

def _check_grid(f: FourierState, grid: SpaceTimeGrid):
    if f.dimension != grid.dimension:
        raise ValueError(f"state has d={f.dimension} but grid has d={grid.dimension}")
    if grid.size > MAX_DENSE_POINTS:
        raise ValueError(
            f"grid of {grid.size} samples exceeds MAX_DENSE_POINTS={MAX_DENSE_POINTS}"
        )


def _time_factors(f: FourierState, P: PropagatorSpec, times: np.ndarray) -> np.ndarray:
    """(T, n) array a_k·e^{2πi t dispersion(|k|)}."""
    disp = P.dispersion_from_norm_sq(f.norm_sq_of_support())
    return f.amplitudes()[None, :] * unit_phase(np.outer(times, disp))


def _synthesize_periodic(f: FourierState, grid: SpaceTimeGrid, P: PropagatorSpec) -> np.ndarray:
    M, d = grid.space_points, grid.dimension
    required = 2 * f.max_frequency() + 1
    if M < required:
        raise ValueError(
            f"Aliasing: spatial grid M={M} is too coarse for max |k_i|={f.max_frequency()} "
            f"(need M >= {required})"
        )
    index = tuple(np.mod(f.support(), M).T)
    times = grid.times()
    out = np.empty(grid.shape, dtype=complex)
    step = max(1, _CHUNK_ELEMENTS // M**d)
    axes = tuple(range(1, d + 1))
    for start in range(0, len(times), step):
        block = times[start:start + step]
        spectrum = np.zeros((len(block),) + (M,) * d, dtype=complex)
        # duplicate residues cannot occur because M >= 2 max|k_i| + 1
        spectrum[(slice(None),) + index] = _time_factors(f, P, block)
        out[start:start + len(block)] = scipy.fft.ifftn(
            spectrum, axes=axes, norm="forward", workers=thread_cap()
        )
    return out


def _synthesize_direct(f: FourierState, grid: SpaceTimeGrid, P: PropagatorSpec) -> np.ndarray:
    keys = f.support()
    axis = grid.axis()
    factors = [unit_phase(np.outer(axis, keys[:, i])) for i in range(grid.dimension)]
    times = grid.times()
    out = np.empty(grid.shape, dtype=complex)
    # the first contraction materializes a (chunk, M, n) intermediate
    step = max(1, _CHUNK_ELEMENTS // (grid.space_points * len(keys)))
    for start in range(0, len(times), step):
        block = times[start:start + step]
        out[start:start + len(block)] = np.einsum(
            _EINSUM_SPATIAL[grid.dimension], _time_factors(f, P, block), *factors, optimize=True
        )
    return out


def synthesize(f: FourierState, grid: SpaceTimeGrid, P: PropagatorSpec) -> SpaceTimeField:
    """
    Sample u(t, x) = Σ_k a_k e^{2πi(k·x + t·dispersion(|k|))} on a grid.

    Periodic grids require M ≥ 2·max|k_i| + 1 (otherwise frequencies alias)
    and use the inverse FFT; window grids use the direct sum.
    """
    _check_grid(f, grid)
    if f.is_zero:
        return SpaceTimeField(grid, np.zeros(grid.shape, dtype=complex))
    if grid.is_periodic:
        values = _synthesize_periodic(f, grid, P)
    else:
        values = _synthesize_direct(f, grid, P)
    return SpaceTimeField(grid, values)


def evaluate_points(f: FourierState, P: PropagatorSpec, times, points) -> np.ndarray:
    """
    Direct sum at scattered points.

    Args:
        times: (T,) sample times
        points: (n_points, d) spatial points

    Returns:
        (T, n_points) complex array
    """
    points = np.asarray(points, dtype=float).reshape(-1, f.dimension)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if f.is_zero:
        return np.zeros((len(times), len(points)), dtype=complex)
    spatial = unit_phase(points @ f.support().T.astype(float))
    return _time_factors(f, P, times) @ spatial.T


def density(
    system, grid: SpaceTimeGrid, P: PropagatorSpec, synthesize_all: bool = False
) -> SpaceTimeField:
    """
    ρ(t, x) = Σ_j ν_j |e^{itP} f_j(x)|², summed in ascending j.

    A single-mode state has constant modulus, so it contributes ν_j|a|²
    everywhere without being synthesized. With synthesize_all every state
    goes through synthesize().
    """
    weights = np.asarray(system.weights, dtype=float)
    if len(system.states) == 0:
        raise ValueError("density requires a nonempty system")
    varying = np.zeros(grid.shape, dtype=float)
    constant = 0.0
    for nu, f in zip(weights, system.states):
        if nu == 0 or f.is_zero:
            continue
        if len(f) == 1 and not synthesize_all:
            constant += nu * f.l2_norm_sq()
            continue
        u = synthesize(f, grid, P).values
        varying += nu * (u.real**2 + u.imag**2)
    return SpaceTimeField(grid, varying + constant)
