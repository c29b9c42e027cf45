"""
Predicted Exponents
===================
Closed-form scaling exponents and admissibility conditions for the
orthonormal-system Strichartz problem. Run configs use these to fill in
`expected_slope`; measurement code never imports this module.

Pairs and regimes (Schrödinger scaling 1/p = (d/2)(1/2 − 1/q)):
  - subcritical    2 ≤ q < 2(d+1)/(d−1)
  - critical       q = 2(d+1)/(d−1)
  - supercritical  2(d+1)/(d−1) < q < 2d/(d−2)
  - endpoint       q = 2d/(d−2), p = 2 (d ≥ 3)

Sobolev exponents of the density bound ‖Σν_j|e^{itP}f_j|²‖ ≲ N^σ‖ν‖_{ℓ^β}:
  - σ0 = 2/p (α > 1), 2(2−α)/p (0 < α < 1); wave/Klein-Gordon (2/p)(d+1)/(d−1)
  - kink point β* = 2q/(q+2), σ* = σ0 + 2/p − 1/β*
Single-function torus exponents:
  - σ1 (L^q_{t,x}), σ2 = min(σ0/2, σ1) (L^p_t L^q_x, α > 1)

Main entry point: predicted_slope(experiment, parameters)
"""

import math
from dataclasses import dataclass
from typing import Mapping

from lattice_core import enumerate_frequencies

_EPS = 1e-12

VALID_REGIMES = ("subcritical", "critical", "supercritical", "endpoint")
VALID_PAIR_KINDS = ("schrodinger", "wave")


def _inv(x: float) -> float:
    return 0.0 if math.isinf(x) else 1.0 / x


def _check_alpha(alpha: float):
    if not alpha > 0 or alpha == 1:
        raise ValueError(f"alpha must be positive and != 1, got {alpha}")


# ─── Admissible Pairs ────────────────────────────────────────────────────────

def critical_q(d: int) -> float:
    """2(d+1)/(d−1), the subcritical/supercritical threshold (∞ for d = 1)."""
    return math.inf if d == 1 else 2 * (d + 1) / (d - 1)


def endpoint_q(d: int) -> float:
    """2d/(d−2), the Keel-Tao endpoint (∞ for d ≤ 2)."""
    return math.inf if d <= 2 else 2 * d / (d - 2)


def schrodinger_admissible_p(d: int, q: float) -> float:
    """p with 1/p = (d/2)(1/2 − 1/q)."""
    if q < 2 or q > endpoint_q(d) or (math.isinf(q) and d >= 2):
        raise ValueError(f"q must lie in [2, {endpoint_q(d)}] for d={d}, got {q}")
    inv_p = d / 2 * (0.5 - _inv(q))
    return math.inf if inv_p <= _EPS else 1.0 / inv_p


def wave_admissible_p(d: int, q: float) -> float:
    """p with 1/p = ((d−1)/2)(1/2 − 1/q), d ≥ 2."""
    if d < 2:
        raise ValueError(f"wave admissible pairs need d >= 2, got d={d}")
    upper = math.inf if d <= 3 else 2 * (d - 1) / (d - 3)
    if q < 2 or q > upper or (math.isinf(q) and d >= 3):
        raise ValueError(f"q must lie in [2, {upper}] for the wave pair in d={d}, got {q}")
    inv_p = (d - 1) / 2 * (0.5 - _inv(q))
    return math.inf if inv_p <= _EPS else 1.0 / inv_p


def classify_pair(d: int, q: float, kind: str = "schrodinger") -> str:
    """Regime of the sharp admissible pair with spatial exponent q."""
    if kind not in VALID_PAIR_KINDS:
        raise ValueError(f"kind must be one of {VALID_PAIR_KINDS}, got '{kind}'")
    dim = d if kind == "schrodinger" else d - 1
    if dim < 1:
        raise ValueError(f"wave pairs need d >= 2, got d={d}")
    crit, end = critical_q(dim), endpoint_q(dim)
    if math.isclose(q, end) and not math.isinf(end):
        return "endpoint"
    if math.isclose(q, crit) and not math.isinf(crit):
        return "critical"
    return "subcritical" if q < crit else "supercritical"


# ─── Density Exponents ───────────────────────────────────────────────────────

def sigma0(alpha: float, p: float) -> float:
    _check_alpha(alpha)
    return 2 / p if alpha > 1 else 2 * (2 - alpha) / p


def sigma0_wave(d: int, p: float) -> float:
    if d < 2:
        raise ValueError(f"wave exponent needs d >= 2, got d={d}")
    return 2 / p * (d + 1) / (d - 1)


def beta_star(q: float) -> float:
    return 2.0 if math.isinf(q) else 2 * q / (q + 2)


def sigma_star(alpha: float, p: float, q: float) -> float:
    return sigma0(alpha, p) + 2 / p - 1 / beta_star(q)


@dataclass(frozen=True)
class BetaRange:
    """Admissible β for a given (d, q, σ): β ≤ limit (or < limit if not inclusive)."""

    regime: str
    limit: float
    inclusive: bool

    def admits(self, beta: float) -> bool:
        return beta <= self.limit if self.inclusive else beta < self.limit


def beta_range(d: int, q: float, sigma: float, alpha: float = 2.0) -> BetaRange:
    """
    Largest β for which the density bound with exponent σ is known to hold
    for the fractional Schrödinger propagator at the sharp pair (p, q).
    """
    p = schrodinger_admissible_p(d, q)
    s0 = sigma0(alpha, p)
    if not s0 - _EPS <= sigma <= d + _EPS:
        raise ValueError(f"sigma must lie in [{s0}, {d}], got {sigma}")
    regime = classify_pair(d, q)
    b_star = beta_star(q)

    def interpolated(anchor: float) -> float:
        return math.inf if math.isclose(sigma, d) else (d - anchor) / (d - sigma) * b_star

    if regime == "subcritical":
        return BetaRange(regime, interpolated(s0), True)
    if regime == "critical":
        if math.isclose(sigma, d):
            return BetaRange(regime, math.inf, True)
        return BetaRange(regime, interpolated(s0), False)
    s_star = sigma_star(alpha, p, q)
    if sigma < s_star:
        return BetaRange(regime, 1.0 / (2 / p + s0 - sigma), regime == "endpoint")
    return BetaRange(regime, interpolated(s_star), True)


# ─── Single-Function Torus Exponents ─────────────────────────────────────────

def sigma1_torus(d: int, q: float, alpha: float) -> float:
    """Exponent of ‖e^{itP}f‖_{L^q_{t,x}(T^{d+1})} ≲ N^σ1‖f‖₂ for α > 1 (ε dropped)."""
    if not alpha > 1:
        raise ValueError(f"sigma1 is defined for alpha > 1, got {alpha}")
    if alpha >= 2:
        return max(0.0, d / 2 - (d + 2) * _inv(q))
    return max((2 - alpha) * d / 2 * (0.5 - _inv(q)), d / 2 - (d + alpha) * _inv(q))


def sigma2_torus(d: int, q: float, alpha: float, p: float) -> float:
    """Exponent of the mixed L^p_t L^q_x single-function bound."""
    half = sigma0(alpha, p) / 2
    return half if alpha < 1 else min(half, sigma1_torus(d, q, alpha))


# ─── Lower-Bound Constructions ───────────────────────────────────────────────

def packet_slope(d: int, alpha: float, p: float, q: float, normalized: bool = True) -> float:
    """Exponent of the windowed packet norm: d/2 − d/q − α/p (or d − d/q − α/p)."""
    lead = d / 2 if normalized else d
    return lead - d * _inv(q) - alpha * _inv(p)


def weyl_slope(d: int) -> float:
    return float(d)


def cluster_slope(d: int) -> float:
    """Exponent of u_j(0, 0) = √(shell count) ≈ j^{(d−1)/2}."""
    return (d - 1) / 2


def zonal_slope(d: int, q: float) -> float:
    """Exponent of ‖Σ_{j≤N}|Z_j|²‖_{L^{q/2}(S^d)}: d − 2d/q."""
    return d - 2 * d * _inv(q)


def weyl_beta_condition(d: int, sigma: float, beta: float) -> bool:
    """Necessary condition 1/β ≥ 1 − σ/d from the saturated system."""
    return _inv(beta) >= 1 - sigma / d - _EPS


def zonal_beta_condition(d: int, q: float, sigma: float, beta: float) -> bool:
    """Necessary condition 1/β ≥ d − 2d/q − σ from zonal or cluster systems."""
    return _inv(beta) >= d - 2 * d * _inv(q) - sigma - _EPS


def universal_bound(d: int, N: float, p: float, interval_length: float = 1.0) -> float:
    """|I|^{2/p}·#{|k| ≤ N}, valid for every system with ‖ν‖_∞ ≤ 1."""
    return interval_length ** (2 * _inv(p)) * enumerate_frequencies(d, N).count


def multiplier_admissible(d: int, q: float, s: float, a: float) -> bool:
    """Hartree multiplier D^{a−d} is covered when a ≤ d − 2d/q − s."""
    return a <= d - 2 * d * _inv(q) - s + _EPS


# ─── Config Auto-Fill ────────────────────────────────────────────────────────

def _get_exponent(params: Mapping, name: str) -> float:
    value = params[name]
    if isinstance(value, str) and value.lower() in ("inf", "infinity"):
        return math.inf
    return float(value)


def predicted_slope(experiment: str, params: Mapping) -> float:
    """
    Slope predicted for an experiment descriptor.

    Raises ValueError for experiments without a closed-form prediction
    (duality_probe, shell_eigenfunction).
    """
    d = int(params.get("d", 1))
    if experiment == "packet":
        return packet_slope(
            d,
            float(params.get("alpha", 2.0)),
            _get_exponent(params, "p"),
            _get_exponent(params, "q"),
            bool(params.get("normalized", True)),
        )
    if experiment in ("weyl_saturation", "universal_bound"):
        return weyl_slope(d)
    if experiment == "zonal_sphere":
        return zonal_slope(2, _get_exponent(params, "q"))
    if experiment == "torus_strichartz":
        return sigma1_torus(d, _get_exponent(params, "q"), float(params.get("alpha", 2.0)))
    if experiment == "torus_cluster":
        return cluster_slope(d)
    if experiment in ("decoupling", "discrete_restriction"):
        return 0.0
    raise ValueError(f"No closed-form slope for experiment '{experiment}'")


if __name__ == "__main__":
    print(f"{'d':>2} {'q':>6} {'p':>8} {'regime':>14} {'sigma0':>8} {'beta*':>7} {'sigma*':>8}")
    for d in (1, 2, 3):
        for q in (2.5, 4.0, 6.0, 8.0):
            try:
                p = schrodinger_admissible_p(d, q)
            except ValueError:
                continue
            print(
                f"{d:>2} {q:>6.2f} {p:>8.3f} {classify_pair(d, q):>14} "
                f"{sigma0(2.0, p):>8.4f} {beta_star(q):>7.4f} {sigma_star(2.0, p, q):>8.4f}"
            )
