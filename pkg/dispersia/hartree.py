"""
Hartree Split-Step Solver
=========================
Finite truncation of the coupled system

    i ∂_t u_j = P u_j + (Wρ) u_j,    ρ = Σ_j ν_j |u_j|²,    j = 1..J

on T^d, integrated with a split-step Fourier scheme.

Conventions:
  - Sign: the flow is u(t) = e^{−it(P + Wρ)} u, so with the 2π phase
    convention of spectral_field the free factor per step is
    e^{−2πi·dt·dispersion(|k|)}. With W = 0 the solver reproduces
    evolve(f, −t).
  - Strang: half kinetic, full potential with ρ refreshed once after the
    first half step, half kinetic. Lie: potential then full kinetic.
  - The potential substep multiplies each u_j by a pointwise unit phase,
    so every ‖u_j‖₂ is conserved up to transform round-off.
  - States live on an M^d grid, M ≥ 3·(2K + 1) for states supported in
    [−K, K]^d. Coefficients use the forward-normalized FFT so that
    u(x) = Σ_k a_k e^{2πik·x}.

Main entry point: solve(state0, W, P, config)
"""

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np
import scipy.fft

from config import (
    BLOWUP_GROWTH,
    HARTREE_DEALIAS_FACTOR,
    HARTREE_MAX_BOX,
    HARTREE_MAX_STATES,
    REFERENCE_FACTOR,
    get_logger,
    thread_cap,
)
from norms import FiniteOperator, schatten_norm
from spectral_field import FourierState, PropagatorSpec, SpaceTimeGrid, synthesize, unit_phase

logger = get_logger(__name__)

VALID_POTENTIALS = ("multiplier", "explicit", "zero")
VALID_SCHEMES = ("strang", "lie")
HARTREE_DIMENSIONS = (1, 2)


class SolverDivergence(ArithmeticError):
    """Non-finite values appeared in the solution."""

    def __init__(self, step: int, message: Optional[str] = None):
        self.step = step
        super().__init__(message or f"Non-finite solution values at step {step}")


# ─── Domain Types ────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class HartreeState:
    """Weights ν_j ≥ 0 and states u_j at a common time."""

    weights: np.ndarray
    states: tuple[FourierState, ...]
    time: float = 0.0

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        states = tuple(self.states)
        if len(weights) != len(states):
            raise ValueError(f"{len(weights)} weights for {len(states)} states")
        if not states:
            raise ValueError("HartreeState needs at least one state")
        if len(states) > HARTREE_MAX_STATES:
            raise ValueError(f"at most {HARTREE_MAX_STATES} states are supported, got {len(states)}")
        if np.any(weights < 0):
            raise ValueError(f"weights must be >= 0, got {weights.tolist()}")
        dims = {f.dimension for f in states}
        if len(dims) > 1:
            raise ValueError(f"states mix dimensions {sorted(dims)}")
        if states[0].dimension not in HARTREE_DIMENSIONS:
            raise ValueError(f"Hartree solver supports d in {HARTREE_DIMENSIONS}, got d={states[0].dimension}")
        box = max(f.max_frequency() for f in states)
        if box > HARTREE_MAX_BOX:
            raise ValueError(f"frequency box [-{box}, {box}]^d exceeds [-{HARTREE_MAX_BOX}, {HARTREE_MAX_BOX}]^d")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "states", states)

    @property
    def dimension(self) -> int:
        return self.states[0].dimension

    @property
    def box(self) -> int:
        """K with every support inside [−K, K]^d."""
        return max(f.max_frequency() for f in self.states)

    def masses(self) -> np.ndarray:
        return np.array([f.l2_norm_sq() for f in self.states])

    def trace(self) -> float:
        return float(self.weights @ self.masses())


@dataclass(frozen=True)
class PotentialSpec:
    """
    W acting on densities.

    multiplier: symbol (1 + |k|²)^{(a−d)/2}
    explicit:   convolution with a real-valued w (conjugate-symmetric coefficients)
    zero:       W = 0
    offset adds the constant V₀ to Wρ.
    """

    kind: str = "zero"
    a: float = 0.0
    w: Optional[FourierState] = None
    offset: float = 0.0

    def __post_init__(self):
        if self.kind not in VALID_POTENTIALS:
            raise ValueError(f"potential kind must be one of {VALID_POTENTIALS}, got '{self.kind}'")
        if self.kind == "explicit":
            if self.w is None:
                raise ValueError("explicit potential needs coefficients w")
            for k, value in self.w.coeffs.items():
                mirror = self.w.coeffs.get(tuple(-c for c in k), 0)
                if abs(mirror - value.conjugate()) > 1e-12 * max(1.0, abs(value)):
                    raise ValueError(f"explicit w must be real-valued: w[{k}] and w[-k] are not conjugate")

    @classmethod
    def multiplier(cls, a: float, offset: float = 0.0) -> "PotentialSpec":
        return cls("multiplier", a=a, offset=offset)

    @classmethod
    def zero(cls, offset: float = 0.0) -> "PotentialSpec":
        return cls("zero", offset=offset)

    @classmethod
    def from_dict(cls, data: Mapping) -> "PotentialSpec":
        kind = data.get("kind", "zero")
        w = FourierState.from_json_dict(data["w"]) if kind == "explicit" else None
        return cls(kind, a=float(data.get("a", 0.0)), w=w, offset=float(data.get("offset", 0.0)))

    def symbol(self, grid_freqs: np.ndarray, d: int) -> np.ndarray:
        """Fourier multiplier on an (M,)*d grid of frequencies (last axis = coordinates)."""
        norm_sq = np.sum(grid_freqs**2, axis=-1)
        if self.kind == "zero":
            return np.zeros(norm_sq.shape)
        if self.kind == "multiplier":
            return (1.0 + norm_sq) ** ((self.a - d) / 2.0)
        M = grid_freqs.shape[0]
        if self.w.max_frequency() > (M - 1) // 2:
            raise ValueError(f"explicit w has |k_i| = {self.w.max_frequency()}, too wide for M={M}")
        values = np.zeros(norm_sq.shape, dtype=complex)
        index = tuple(np.mod(self.w.support(), M).T)
        values[index] = self.w.amplitudes()
        return values


@dataclass(frozen=True)
class SolverConfig:
    """dt > 0, t_end = steps·dt, scheme strang|lie, grid points M (None = 3·(2K+1))."""

    dt: float
    t_end: float
    scheme: str = "strang"
    grid_points: Optional[int] = None
    output_every: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.t_end < 0:
            raise ValueError(f"t_end must be >= 0, got {self.t_end}")
        if self.scheme not in VALID_SCHEMES:
            raise ValueError(f"scheme must be one of {VALID_SCHEMES}, got '{self.scheme}'")
        if self.output_every < 1:
            raise ValueError(f"output_every must be >= 1, got {self.output_every}")
        if abs(self.steps * self.dt - self.t_end) > 1e-9 * max(1.0, self.t_end):
            raise ValueError(f"t_end={self.t_end} is not a whole number of steps of dt={self.dt}")

    @property
    def steps(self) -> int:
        return round(self.t_end / self.dt)

    @classmethod
    def from_dict(cls, data: Mapping) -> "SolverConfig":
        return cls(
            dt=float(data["dt"]),
            t_end=float(data["t_end"]),
            scheme=data.get("scheme", "strang"),
            grid_points=data.get("grid_points"),
            output_every=int(data.get("output_every", 1)),
        )

    def refined(self, factor: int) -> "SolverConfig":
        return SolverConfig(self.dt / factor, self.t_end, self.scheme, self.grid_points, self.output_every * factor)

    def grid_size(self, box: int) -> int:
        minimum = HARTREE_DEALIAS_FACTOR * (2 * box + 1)
        M = minimum if self.grid_points is None else int(self.grid_points)
        if M < minimum:
            raise ValueError(
                f"grid_points={M} is below the dealiasing minimum {minimum} for box K={box}"
            )
        return M


# ─── Grid Helpers ────────────────────────────────────────────────────────────

def grid_frequencies(M: int, d: int) -> np.ndarray:
    """(M,)*d + (d,) integer FFT frequencies."""
    axis = np.rint(np.fft.fftfreq(M, 1.0 / M)).astype(np.int64)
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    return np.stack(mesh, axis=-1)


def _to_grid(f: FourierState, M: int) -> np.ndarray:
    coeffs = np.zeros((M,) * f.dimension, dtype=complex)
    if not f.is_zero:
        coeffs[tuple(np.mod(f.support(), M).T)] = f.amplitudes()
    return coeffs


def _from_grid(coeffs: np.ndarray, freqs: np.ndarray) -> FourierState:
    d = coeffs.ndim
    return FourierState.from_arrays(d, freqs.reshape(-1, d), coeffs.reshape(-1))


def _physical(coeffs: np.ndarray) -> np.ndarray:
    axes = tuple(range(1, coeffs.ndim))
    return scipy.fft.ifftn(coeffs, axes=axes, norm="forward", workers=thread_cap())


def _spectral(values: np.ndarray) -> np.ndarray:
    axes = tuple(range(1, values.ndim))
    return scipy.fft.fftn(values, axes=axes, norm="forward", workers=thread_cap())


# ─── Density and Potential ───────────────────────────────────────────────────

def compute_density(state: HartreeState, M: int) -> np.ndarray:
    """ρ(x) = Σ ν_j |u_j(x)|² on the M^d torus grid; needs M ≥ 4K + 1."""
    required = 4 * state.box + 1
    if M < required:
        raise ValueError(f"Aliasing: density grid M={M} needs M >= {required} for box K={state.box}")
    grid = SpaceTimeGrid.torus(state.dimension, M, (0.0, 1.0), 1)
    P = PropagatorSpec.fractional(2.0)  # t = 0, any propagator
    rho = np.zeros((M,) * state.dimension)
    for nu, f in zip(state.weights, state.states):
        u = synthesize(f, grid, P).values[0]
        rho += nu * (u.real**2 + u.imag**2)
    return rho


def apply_potential(rho: np.ndarray, W: PotentialSpec, symbol: Optional[np.ndarray] = None) -> np.ndarray:
    """(Wρ)(x) + V₀ on the grid of rho; symbol may be precomputed with W.symbol."""
    d, M = rho.ndim, rho.shape[0]
    if W.kind == "zero":
        return np.full(rho.shape, W.offset, dtype=float)
    if symbol is None:
        symbol = W.symbol(grid_frequencies(M, d), d)
    spectrum = scipy.fft.fftn(rho, norm="forward", workers=thread_cap())
    spectrum *= symbol
    return scipy.fft.ifftn(spectrum, norm="forward", workers=thread_cap()).real + W.offset


# ─── Stepping ────────────────────────────────────────────────────────────────

@dataclass
class _Stepper:
    weights: np.ndarray
    W: PotentialSpec
    dispersion: np.ndarray  # on the coefficient grid
    symbol: np.ndarray
    dt: float
    scheme: str

    def __post_init__(self):
        self.half_kinetic = unit_phase(-0.5 * self.dt * self.dispersion)
        self.full_kinetic = unit_phase(-self.dt * self.dispersion)

    def density(self, values: np.ndarray) -> np.ndarray:
        return np.tensordot(self.weights, values.real**2 + values.imag**2, axes=1)

    def potential_phase(self, values: np.ndarray) -> np.ndarray:
        V = apply_potential(self.density(values), self.W, self.symbol)
        return values * unit_phase(-self.dt * V)[None, ...]

    def __call__(self, coeffs: np.ndarray) -> np.ndarray:
        if self.scheme == "strang":
            coeffs = coeffs * self.half_kinetic
            coeffs = _spectral(self.potential_phase(_physical(coeffs)))
            return coeffs * self.half_kinetic
        coeffs = _spectral(self.potential_phase(_physical(coeffs)))
        return coeffs * self.full_kinetic


def step(state: HartreeState, W: PotentialSpec, P: PropagatorSpec, dt: float, scheme: str = "strang",
         grid_points: Optional[int] = None) -> HartreeState:
    """One step of size dt; see solve for the multi-step driver."""
    config = SolverConfig(dt, dt, scheme, grid_points)
    return solve(state, W, P, config).final


# ─── Trajectories ────────────────────────────────────────────────────────────

@dataclass
class ConservationReport:
    max_mass_drift: float  # max_j max_t |M_j(t) − M_j(0)| / M_j(0)
    trace_drift: float
    energy_drift: float  # max_t |E(t) − E(0)| / max(|E(0)|, 1e-300)
    blowup_suspected: bool = False

    def to_dict(self) -> dict:
        return {
            "max_mass_drift": self.max_mass_drift,
            "trace_drift": self.trace_drift,
            "energy_drift": self.energy_drift,
            "blowup_suspected": self.blowup_suspected,
        }


@dataclass
class HartreeTrajectory:
    times: list[float]
    masses: np.ndarray  # (outputs, J)
    trace: np.ndarray
    energy: np.ndarray
    final: HartreeState
    grid_points: int
    steps: int
    snapshots: list[HartreeState] = field(default_factory=list, repr=False)
    blowup_suspected: bool = False

    def conservation(self) -> ConservationReport:
        m0 = self.masses[0]
        live = m0 > 0
        mass_drift = np.abs(self.masses[:, live] - m0[live]) / m0[live]
        trace0 = self.trace[0]
        e0 = self.energy[0]
        return ConservationReport(
            max_mass_drift=float(mass_drift.max()) if mass_drift.size else 0.0,
            trace_drift=float(np.max(np.abs(self.trace - trace0)) / trace0) if trace0 > 0 else 0.0,
            energy_drift=float(np.max(np.abs(self.energy - e0)) / max(abs(e0), 1e-300)),
            blowup_suspected=self.blowup_suspected,
        )

    def rows(self) -> list[dict]:
        """One row per (output time, state): t, j, mass, trace, energy."""
        out = []
        for i, t in enumerate(self.times):
            for j, mass in enumerate(self.masses[i]):
                out.append({"t": t, "j": j, "mass": mass, "trace": self.trace[i], "energy": self.energy[i]})
        return out


def _energy(coeffs: np.ndarray, weights: np.ndarray, dispersion: np.ndarray, W: PotentialSpec,
            symbol: np.ndarray) -> float:
    """Σ ν_j Σ_k dispersion(k)|a_k|² + ½⟨Wρ, ρ⟩ (V₀ excluded)."""
    power = coeffs.real**2 + coeffs.imag**2
    kinetic = float(weights @ np.sum(power * dispersion[None, ...], axis=tuple(range(1, coeffs.ndim))))
    if W.kind == "zero":
        return kinetic
    values = _physical(coeffs)
    rho = np.tensordot(weights, values.real**2 + values.imag**2, axes=1)
    potential = apply_potential(rho, W, symbol) - W.offset
    return kinetic + 0.5 * float(np.mean(potential * rho))


def solve(
    state0: HartreeState,
    W: PotentialSpec,
    P: PropagatorSpec,
    config: SolverConfig,
    keep_snapshots: bool = False,
) -> HartreeTrajectory:
    """
    Integrate from state0.time to state0.time + t_end.

    Records masses, trace and energy every output_every steps (and at the
    final step). Raises SolverDivergence on non-finite values.
    """
    d = state0.dimension
    M = config.grid_size(state0.box)
    freqs = grid_frequencies(M, d)
    dispersion = P.dispersion_from_norm_sq(np.sum(freqs**2, axis=-1))
    weights = state0.weights
    symbol = W.symbol(freqs, d)
    stepper = _Stepper(weights, W, dispersion, symbol, config.dt, config.scheme)

    coeffs = np.stack([_to_grid(f, M) for f in state0.states])
    sup0 = float(np.abs(_physical(coeffs)).max())
    blowup = False

    times, masses, traces, energies, snapshots = [], [], [], [], []

    def record(n: int):
        t = state0.time + n * config.dt
        power = np.sum(coeffs.real**2 + coeffs.imag**2, axis=tuple(range(1, d + 1)))
        times.append(t)
        masses.append(power)
        traces.append(float(weights @ power))
        energies.append(_energy(coeffs, weights, dispersion, W, symbol))
        if keep_snapshots:
            snapshots.append(_snapshot(coeffs, freqs, weights, t))

    record(0)
    for n in range(1, config.steps + 1):
        coeffs = stepper(coeffs)
        if not np.all(np.isfinite(coeffs)):
            logger.error("Hartree solve diverged at step %d (t=%.6g)", n, state0.time + n * config.dt)
            raise SolverDivergence(n)
        if not blowup and sup0 > 0 and n % config.output_every == 0:
            growth = float(np.abs(_physical(coeffs)).max()) / sup0
            if growth > BLOWUP_GROWTH:
                logger.warning("Sup-norm grew by %.3g at step %d; suspected blow-up", growth, n)
                blowup = True
        if n % config.output_every == 0 or n == config.steps:
            record(n)

    final = _snapshot(coeffs, freqs, weights, state0.time + config.steps * config.dt)
    trajectory = HartreeTrajectory(
        times=times,
        masses=np.array(masses),
        trace=np.array(traces),
        energy=np.array(energies),
        final=final,
        grid_points=M,
        steps=config.steps,
        snapshots=snapshots,
        blowup_suspected=blowup,
    )
    report = trajectory.conservation()
    logger.info(
        "Hartree %s: %d steps, M=%d, mass drift %.3e, energy drift %.3e",
        config.scheme, config.steps, M, report.max_mass_drift, report.energy_drift,
    )
    return trajectory


def _snapshot(coeffs: np.ndarray, freqs: np.ndarray, weights: np.ndarray, t: float) -> HartreeState:
    states = tuple(_from_grid(c, freqs) for c in coeffs)
    return _UncheckedState(weights, states, t)


class _UncheckedState(HartreeState):
    """Solver output: grid-wide supports may exceed the input box limit."""

    def __post_init__(self):
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        object.__setattr__(self, "states", tuple(self.states))


# ─── Diagnostics ─────────────────────────────────────────────────────────────

def state_distance(a: HartreeState, b: HartreeState) -> float:
    """max_j ‖u_j − v_j‖₂."""
    return max((f + g.scaled(-1)).l2_norm() for f, g in zip(a.states, b.states))


def self_convergence_order(
    state0: HartreeState,
    W: PotentialSpec,
    P: PropagatorSpec,
    config: SolverConfig,
    reference_factor: int = REFERENCE_FACTOR,
) -> float:
    """log₂(e(dt)/e(dt/2)) with errors against a dt/reference_factor run."""
    coarse = solve(state0, W, P, config).final
    fine = solve(state0, W, P, config.refined(2)).final
    reference = solve(state0, W, P, config.refined(reference_factor)).final
    e_coarse = state_distance(coarse, reference)
    e_fine = state_distance(fine, reference)
    if e_fine == 0 or e_coarse == 0:
        raise ValueError("self_convergence_order: errors vanished; the splitting is exact for this instance")
    order = math.log2(e_coarse / e_fine)
    logger.info("self-convergence (%s): e(dt)=%.3e e(dt/2)=%.3e order=%.3f", config.scheme, e_coarse, e_fine, order)
    return order


def sobolev_schatten_norm(state: HartreeState, s: float, beta) -> float:
    """‖D^s γ D^s‖_{𝔖^β} for γ = Σ ν_j u_j u_j*, D = √(1 − Δ)/(2π) on e_k ↦ (1 + |k|²)^{1/2}."""
    lifted = [f.with_multiplier(lambda n: (1.0 + n) ** (s / 2.0)) for f in state.states]
    frequencies = sorted({k for f in lifted for k in f.coeffs})
    column = {k: c for c, k in enumerate(frequencies)}
    rows = np.zeros((len(lifted), len(frequencies)), dtype=complex)
    for r, (nu, f) in enumerate(zip(state.weights, lifted)):
        for k, value in f.coeffs.items():
            rows[r, column[k]] = math.sqrt(nu) * value
    gamma = rows.T @ rows.conj()
    return schatten_norm(FiniteOperator(gamma), beta)


# ─── Config Loading ──────────────────────────────────────────────────────────

@dataclass(frozen=True)
class HartreeProblem:
    state: HartreeState
    potential: PotentialSpec
    propagator: PropagatorSpec
    solver: SolverConfig
    convergence: bool = False
    reference_factor: int = REFERENCE_FACTOR
    snapshots: bool = False

    @classmethod
    def from_dict(cls, data: Mapping) -> "HartreeProblem":
        states = tuple(FourierState.from_json_dict(s) for s in data["states"])
        state = HartreeState(data.get("weights", [1.0] * len(states)), states, float(data.get("t0", 0.0)))
        return cls(
            state=state,
            potential=PotentialSpec.from_dict(data.get("potential", {"kind": "zero"})),
            propagator=PropagatorSpec.from_dict(data.get("propagator", {})),
            solver=SolverConfig.from_dict(data["solver"]),
            convergence=bool(data.get("convergence", False)),
            reference_factor=int(data.get("reference_factor", REFERENCE_FACTOR)),
            snapshots=bool(data.get("snapshots", False)),
        )
