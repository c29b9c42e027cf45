"""
Lattice Core Module
===================
Enumerates frequency lattices k ∈ ℤ^d and counts lattice points.

Provides:
  - Frequency sets of shape ball (|k| ≤ N), cube (k ∈ [−N, N]^d),
    shell (|k| = N) and annulus (|k| ∈ (j − c, j])
  - Sum-of-squares representation numbers r_d(R) by enumeration
  - Averages and maxima of r_d over n ≤ R
  - Shell clusters used by the spectral-cluster experiments

All counts are exact. |k|² is computed in int64, which is exact for
|k_i| ≤ 2^20 in d ≤ 3. Points are always returned in lexicographic order
so that every downstream hash and output is reproducible.

Main entry point: enumerate_frequencies(d, N, shape)
"""

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy.special import gamma

from config import MAX_COORDINATE, SHELL_WIDTH, SUPPORTED_DIMENSIONS, get_logger

logger = get_logger(__name__)

# Ties closer than this to an integer |k|² are treated as exact.
_TIE_TOL = 1e-9


class Shape(str, Enum):
    """Shape predicate of a frequency set."""

    BALL = "ball"
    CUBE = "cube"
    SHELL = "shell"
    ANNULUS = "annulus"


VALID_SHAPES = tuple(s.value for s in Shape)


@dataclass(frozen=True)
class LatticePoint:
    """A frequency index k ∈ ℤ^d."""

    coords: tuple[int, ...]

    def __post_init__(self):
        check_dimension(len(self.coords))
        if any(abs(c) > MAX_COORDINATE for c in self.coords):
            raise ValueError(
                f"Lattice coordinates must satisfy |k_i| <= {MAX_COORDINATE}, got {self.coords}"
            )

    @property
    def dimension(self) -> int:
        return len(self.coords)

    @property
    def norm_sq(self) -> int:
        return sum(c * c for c in self.coords)


@dataclass(frozen=True)
class FrequencySet:
    """
    Lattice points satisfying a shape predicate.

    Attributes:
        dimension: d ∈ {1, 2, 3}
        cutoff: N for ball/cube/shell, j for annulus
        shape: Shape predicate
        points: (n, d) int64 array, lexicographically sorted, no duplicates
        width: annulus width c (None for other shapes)
    """

    dimension: int
    cutoff: float
    shape: Shape
    points: np.ndarray
    width: Optional[float] = None

    @property
    def count(self) -> int:
        return int(self.points.shape[0])

    def __len__(self) -> int:
        return self.count

    def lattice_points(self) -> list[LatticePoint]:
        return [LatticePoint(tuple(int(c) for c in row)) for row in self.points]

    def norm_sq(self) -> np.ndarray:
        """|k|² for every point, exact int64."""
        return np.sum(self.points * self.points, axis=1)


# ─── Validation ──────────────────────────────────────────────────────────────

def check_dimension(d: int) -> int:
    """Reject dimensions outside SUPPORTED_DIMENSIONS."""
    if d not in SUPPORTED_DIMENSIONS:
        raise ValueError(
            f"Unsupported dimension d={d}; expected one of {SUPPORTED_DIMENSIONS}"
        )
    return d


def _parse_shape(shape) -> Shape:
    try:
        return Shape(shape)
    except ValueError:
        raise ValueError(f"shape must be one of {VALID_SHAPES}, got '{shape}'") from None


# ─── Enumeration ─────────────────────────────────────────────────────────────

def cube_points(d: int, half_width: int) -> np.ndarray:
    """All k ∈ [−K, K]^d as an (n, d) int64 array in lexicographic order."""
    check_dimension(d)
    axis = np.arange(-half_width, half_width + 1, dtype=np.int64)
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _square_bound(radius: float) -> tuple[int, bool]:
    """
    Integer bound for |k|² ≤ radius².

    Returns (bound, exact) where exact is False when radius² is not within
    _TIE_TOL of an integer; in that case the float comparison is used.
    """
    sq = radius * radius
    nearest = round(sq)
    if abs(sq - nearest) <= _TIE_TOL:
        return int(nearest), True
    return math.floor(sq), False


def enumerate_frequencies(d: int, N: float, shape="ball", width: float = SHELL_WIDTH) -> FrequencySet:
    """
    Enumerate all lattice points satisfying a shape predicate.

    Args:
        d: Dimension, one of SUPPORTED_DIMENSIONS
        N: Cutoff N ≥ 0 (for annulus, the outer level j)
        shape: "ball", "cube", "shell" or "annulus"
        width: Annulus width c (annulus only)

    Returns:
        FrequencySet with points sorted lexicographically.
    """
    check_dimension(d)
    shape = _parse_shape(shape)
    if N < 0:
        raise ValueError(f"cutoff N must be >= 0, got {N}")

    half_width = math.floor(N + _TIE_TOL)
    candidates = cube_points(d, half_width)

    if shape is Shape.CUBE:
        return FrequencySet(d, N, shape, candidates)

    norm_sq = np.sum(candidates * candidates, axis=1)
    bound, exact = _square_bound(N)

    if shape is Shape.BALL:
        mask = norm_sq <= bound
    elif shape is Shape.SHELL:
        mask = norm_sq == bound if exact else np.zeros(len(norm_sq), dtype=bool)
    else:
        if not N > width > 0:
            raise ValueError(f"annulus requires j > c > 0, got j={N}, c={width}")
        inner, _ = _square_bound(N - width)
        mask = (norm_sq > inner) & (norm_sq <= bound)
        return FrequencySet(d, N, shape, candidates[mask], width=width)

    return FrequencySet(d, N, shape, candidates[mask])


def shell_cluster(d: int, j: float, c: float = SHELL_WIDTH) -> FrequencySet:
    """All k with |k| ∈ (j − c, j]. May be empty for small j in d = 1."""
    if not j > c > 0:
        raise ValueError(f"shell_cluster requires j > c > 0, got j={j}, c={c}")
    return enumerate_frequencies(d, j, Shape.ANNULUS, width=c)


# ─── Representation Numbers ──────────────────────────────────────────────────

def representation_table(d: int, R: int) -> np.ndarray:
    """
    r_d(n) for n = 0..R as an int64 array.

    Built by adding one coordinate at a time: r_d(n) = Σ_a r_1(a) r_{d−1}(n − a),
    which enumerates every k ∈ ℤ^d with |k|² ≤ R exactly once.
    """
    check_dimension(d)
    if R < 0:
        raise ValueError(f"R must be >= 0, got {R}")

    one_dim = np.zeros(R + 1, dtype=np.int64)
    for a in range(math.isqrt(R) + 1):
        one_dim[a * a] += 1 if a == 0 else 2

    table = one_dim.copy()
    for _ in range(d - 1):
        nxt = np.zeros(R + 1, dtype=np.int64)
        for square in np.flatnonzero(one_dim):
            nxt[square:] += one_dim[square] * table[: R + 1 - square]
        table = nxt
    return table


def count_representations(d: int, R: int) -> int:
    """r_d(R) = #{k ∈ ℤ^d : |k|² = R}. Zero is a valid answer."""
    if R < 0:
        raise ValueError(f"R must be >= 0, got {R}")
    return int(representation_table(d, R)[R])


@dataclass(frozen=True)
class RepresentationAverage:
    """Average and maximum of r_d(n) over 1 ≤ n ≤ R."""

    average: Fraction
    maximum: int
    argmax: int  # smallest n attaining the maximum


def average_representation(d: int, R: int) -> RepresentationAverage:
    """(1/R) Σ_{n≤R} r_d(n) and max_{n≤R} r_d(n), both exact."""
    if R < 1:
        raise ValueError(f"R must be >= 1, got {R}")
    table = representation_table(d, R)[1:]
    total = int(table.sum())
    argmax = int(np.argmax(table)) + 1
    return RepresentationAverage(
        average=Fraction(total, R),
        maximum=int(table[argmax - 1]),
        argmax=argmax,
    )


def admissible_shell_radii(d: int, limit: int) -> list[int]:
    """Integers 1 ≤ N ≤ limit with r_d(N²) > 0."""
    table = representation_table(d, limit * limit)
    return [n for n in range(1, limit + 1) if table[n * n] > 0]


def unit_ball_volume(d: int) -> float:
    """Lebesgue measure of the unit ball in ℝ^d (the Weyl constant)."""
    return math.pi ** (d / 2) / gamma(d / 2 + 1)


if __name__ == "__main__":
    print(f"{'d':>2} {'N':>4} {'ball':>8} {'ratio/vol':>10}")
    for d in SUPPORTED_DIMENSIONS:
        for N in (8, 16, 32):
            count = enumerate_frequencies(d, N).count
            print(f"{d:>2} {N:>4} {count:>8} {count / (unit_ball_volume(d) * N**d):>10.4f}")
    print("\nr_2(25) =", count_representations(2, 25))
