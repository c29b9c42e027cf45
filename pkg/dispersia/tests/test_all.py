"""
Tests for the Dispersia laboratory modules.

Covers: lattice_core, spectral_field, norms, exponents, experiments,
decoupling, duality, hartree, validators, reporting, runner, cli.
Run with: cd dispersia && python -m pytest tests/ -v
"""

import itertools
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

# Ensure the dispersia directory is on path
sys.path.insert(0, str(Path(__file__).parent.parent))

import numpy as np
import pytest

from config import CONFIGS_DIR


def brute_force_ball(d: int, N: float) -> int:
    """#{k ∈ ℤ^d : |k|² ≤ N²} by looping over the cube."""
    K = int(math.floor(N))
    return sum(
        1 for k in itertools.product(range(-K, K + 1), repeat=d)
        if sum(c * c for c in k) <= N * N
    )


def brute_force_reps(d: int, R: int) -> int:
    """#{k ∈ ℤ^d : |k|² = R} by looping over the cube."""
    K = math.isqrt(R)
    return sum(
        1 for k in itertools.product(range(-K, K + 1), repeat=d)
        if sum(c * c for c in k) == R
    )


# ═══════════════════════════════════════════════════════════════════════════════
# CONFIGURATION
# ═══════════════════════════════════════════════════════════════════════════════

from config import thread_cap


class TestThreadCap:
    """Test the DISPERSIA_THREADS worker cap."""

    def test_default_is_one(self, monkeypatch):
        """Unset variable should give a single worker."""
        monkeypatch.delenv("DISPERSIA_THREADS", raising=False)
        assert thread_cap() == 1, f"Expected 1 worker by default, got {thread_cap()}"

    def test_reads_integer(self, monkeypatch):
        """A positive integer should be used as-is."""
        monkeypatch.setenv("DISPERSIA_THREADS", "4")
        assert thread_cap() == 4, f"Expected 4 workers, got {thread_cap()}"

    @pytest.mark.parametrize("raw", ["abc", "0", "-3"])
    def test_invalid_falls_back(self, monkeypatch, raw):
        """Invalid values should fall back to one worker."""
        monkeypatch.setenv("DISPERSIA_THREADS", raw)
        assert thread_cap() == 1, f"DISPERSIA_THREADS={raw!r} should give 1, got {thread_cap()}"


# ═══════════════════════════════════════════════════════════════════════════════
# LATTICE CORE
# ═══════════════════════════════════════════════════════════════════════════════

from lattice_core import (
    LatticePoint,
    admissible_shell_radii,
    average_representation,
    count_representations,
    enumerate_frequencies,
    representation_table,
    shell_cluster,
    unit_ball_volume,
)


class TestLatticeCounts:
    """Test frequency enumeration against brute-force loops."""

    def test_ball_d2_n10(self):
        """Gauss circle count for N=10 should be 317."""
        count = enumerate_frequencies(2, 10, "ball").count
        assert count == 317, f"ball(d=2, N=10): expected 317, got {count}"
        assert count == brute_force_ball(2, 10), "ball count should match the brute-force loop"

    def test_ball_d1_n2(self):
        """d=1, N=2 ball is {-2..2}."""
        fs = enumerate_frequencies(1, 2)
        assert fs.count == 5, f"Expected 5 points, got {fs.count}"
        assert fs.points[:, 0].tolist() == [-2, -1, 0, 1, 2], "points should be lexicographic"

    def test_ball_matches_brute_force_d3(self):
        """d=3 balls at non-integer radii should match the brute-force loop."""
        for N in (1.5, 2.0, 3.7):
            count = enumerate_frequencies(3, N).count
            expected = brute_force_ball(3, N)
            assert count == expected, f"ball(d=3, N={N}): expected {expected}, got {count}"

    def test_cube_count(self):
        """Cube [-3, 3]^2 has 49 points."""
        count = enumerate_frequencies(2, 3, "cube").count
        assert count == 49, f"cube(d=2, N=3): expected 49, got {count}"

    def test_shell_d2_n5(self):
        """|k| = 5 in d=2 has r_2(25) = 12 points."""
        fs = enumerate_frequencies(2, 5, "shell")
        assert fs.count == 12, f"shell(d=2, N=5): expected 12, got {fs.count}"
        assert np.all(fs.norm_sq() == 25), "every shell point should have |k|² = 25"

    def test_shell_non_integer_square_is_empty(self):
        """N² = 2.25 is not an integer, so the shell is empty."""
        fs = enumerate_frequencies(2, 1.5, "shell")
        assert fs.count == 0, f"Expected empty shell, got {fs.count} points"

    def test_points_unique_and_sorted(self):
        """Enumerated points should be unique and lexicographically sorted."""
        pts = [tuple(p) for p in enumerate_frequencies(3, 2.5).points]
        assert pts == sorted(set(pts)), "points should be unique and sorted"

    def test_shell_cluster_count(self):
        """(4, 5] annulus in d=2 has 32 points."""
        fs = shell_cluster(2, 5, 1.0)
        assert fs.count == 32, f"cluster(d=2, j=5): expected 32, got {fs.count}"
        brute = sum(brute_force_reps(2, n) for n in range(17, 26))
        assert fs.count == brute, f"cluster count should match brute force {brute}"

    def test_shell_cluster_requires_j_above_c(self):
        """j ≤ c should be rejected."""
        with pytest.raises(ValueError, match="j > c > 0"):
            shell_cluster(1, 0.5, 1.0)

    def test_unsupported_dimension(self):
        """d=4 is outside the supported dimensions."""
        with pytest.raises(ValueError, match="Unsupported dimension"):
            enumerate_frequencies(4, 2)

    def test_unknown_shape(self):
        """Unknown shape names should list the valid ones."""
        with pytest.raises(ValueError, match="shape must be one of"):
            enumerate_frequencies(2, 3, "diamond")

    def test_negative_cutoff(self):
        with pytest.raises(ValueError, match="cutoff N must be >= 0"):
            enumerate_frequencies(2, -1)

    def test_lattice_point(self):
        """LatticePoint exposes |k|² exactly."""
        point = LatticePoint((3, -4))
        assert point.norm_sq == 25, f"Expected 25, got {point.norm_sq}"
        assert point.dimension == 2

    def test_lattice_points_of_set(self):
        """FrequencySet hands back its points as LatticePoints in order."""
        points = enumerate_frequencies(2, 1).lattice_points()
        assert [p.coords for p in points] == [(-1, 0), (0, -1), (0, 0), (0, 1), (1, 0)]
        assert [p.norm_sq for p in points] == [1, 1, 0, 1, 1]



class TestRepresentations:
    """Test r_d(R) and its running averages."""

    def test_r2_25(self):
        assert count_representations(2, 25) == 12, "r_2(25) should be 12"

    def test_r1_4(self):
        assert count_representations(1, 4) == 2, "r_1(4) should be 2"

    def test_r2_3_is_zero(self):
        """3 is not a sum of two squares."""
        assert count_representations(2, 3) == 0, "r_2(3) should be 0"

    def test_matches_brute_force(self):
        """r_d(R) should match brute force for small R."""
        for d in (1, 2, 3):
            for R in range(0, 40):
                got = count_representations(d, R)
                expected = brute_force_reps(d, R)
                assert got == expected, f"r_{d}({R}): expected {expected}, got {got}"

    def test_table_sum_equals_ball_count(self):
        """Σ_{n≤R} r_d(n) (including n=0) should equal the ball count at N=√R."""
        rng = np.random.default_rng(2024)
        for _ in range(50):
            d = int(rng.integers(1, 4))
            R = int(rng.integers(0, 2500 if d == 3 else 10_000))
            total = int(representation_table(d, R).sum())
            ball = enumerate_frequencies(d, math.sqrt(R)).count
            assert total == ball, f"d={d}, R={R}: table sum {total} != ball count {ball}"

    def test_average_representation(self):
        """Average of r_2 over n ≤ 100 is 316/100, maximum 16 first at n=65."""
        avg = average_representation(2, 100)
        assert avg.average == Fraction(316, 100), f"Expected 79/25, got {avg.average}"
        assert avg.maximum == 16, f"Expected max 16, got {avg.maximum}"
        assert avg.argmax == 65, f"Expected argmax 65, got {avg.argmax}"

    def test_admissible_radii(self):
        """Every integer N is admissible since (N, 0) lies on the shell."""
        assert admissible_shell_radii(2, 4) == [1, 2, 3, 4]

    def test_negative_r(self):
        with pytest.raises(ValueError, match="R must be >= 0"):
            count_representations(2, -1)

    def test_unit_ball_volume(self):
        assert abs(unit_ball_volume(2) - math.pi) < 1e-12, "unit disc area should be π"
        assert abs(unit_ball_volume(3) - 4 * math.pi / 3) < 1e-12, "unit ball volume should be 4π/3"


# ═══════════════════════════════════════════════════════════════════════════════
# SPECTRAL FIELD: STATES, PROJECTIONS, PROPAGATORS
# ═══════════════════════════════════════════════════════════════════════════════

from spectral_field import (
    BumpProfile,
    DEFAULT_BUMP,
    FourierState,
    PropagatorSpec,
    SpaceTimeGrid,
    density,
    evaluate_points,
    evolve,
    littlewood_paley_decomposition,
    littlewood_paley_depth,
    project_frequency,
    synthesize,
    unit_phase,
)


def grid_points(grid: SpaceTimeGrid) -> np.ndarray:
    """All spatial sample points of a grid as (M^d, d), axis order 'ij'."""
    axis = grid.axis()
    mesh = np.meshgrid(*([axis] * grid.dimension), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


class TestFourierState:
    """Test construction, algebra and serialization of sparse states."""

    def test_zeros_dropped_and_sorted(self):
        """Exact zeros are dropped and keys come out lexicographic."""
        f = FourierState(2, {(1, 0): 2.0, (0, 0): 0.0, (-1, 3): 1j})
        assert list(f.coeffs) == [(-1, 3), (1, 0)], f"Unexpected keys {list(f.coeffs)}"

    def test_duplicate_keys_summed(self):
        f = FourierState.from_arrays(1, [[1], [1], [2]], [1.0, 2.0, 3.0])
        assert f.coeffs[(1,)] == 3.0, f"Duplicates should sum to 3, got {f.coeffs[(1,)]}"

    def test_wrong_key_length(self):
        with pytest.raises(ValueError, match="expected d=2"):
            FourierState(2, {(1,): 1.0})

    def test_norms(self):
        """Dirichlet packet in d=1, N=8 has ‖f‖₂² = 17."""
        f = FourierState.from_frequency_set(enumerate_frequencies(1, 8))
        assert f.l2_norm_sq() == 17.0, f"Expected 17, got {f.l2_norm_sq()}"
        assert f.max_frequency() == 8
        assert f.max_radius() == 8.0

    def test_add_and_scale(self):
        """f + (−1)·f is the zero state."""
        f = FourierState(1, {(0,): 1.0, (3,): 2 - 1j})
        assert (f + f.scaled(-1)).is_zero, "f − f should be zero"

    def test_inner_product(self):
        """Distinct modes are orthogonal; ⟨f, f⟩ = ‖f‖²."""
        e0, e1 = FourierState.mode((0,)), FourierState.mode((1,))
        assert e0.inner(e1) == 0
        f = FourierState(1, {(0,): 1 + 1j, (2,): 2.0})
        assert abs(f.inner(f) - f.l2_norm_sq()) < 1e-14

    def test_json_round_trip(self):
        """Serialization preserves the exact coefficients."""
        f = FourierState(2, {(0, 1): 0.25 - 1.5j, (-3, 2): 1e-17 + 0j})
        g = FourierState.from_json(f.to_json())
        assert g == f, f"Round trip changed the state: {g} != {f}"

    def test_json_format(self):
        f = FourierState(1, {(2,): 1 - 2j})
        assert f.to_json_dict() == {"d": 1, "entries": [[[2], 1.0, -2.0]]}

    def test_malformed_json(self):
        with pytest.raises(ValueError, match="Malformed FourierState JSON"):
            FourierState.from_json_dict({"entries": []})


class TestProjections:
    """Test the bump profile and Littlewood-Paley pieces."""

    def test_bump_values(self):
        """ψ = 1 on |s| ≤ 1, 0 on |s| ≥ 2, strictly between and decreasing."""
        assert DEFAULT_BUMP(0.5) == 1.0
        assert DEFAULT_BUMP(2.5) == 0.0
        samples = [float(DEFAULT_BUMP(s)) for s in (1.2, 1.5, 1.8)]
        assert all(0 < v < 1 for v in samples), f"Expected values in (0, 1), got {samples}"
        assert samples[0] > samples[1] > samples[2], f"ψ should decrease, got {samples}"

    def test_bump_rejects_bad_support(self):
        with pytest.raises(ValueError, match="0 < inner < outer"):
            BumpProfile(2.0, 1.0)

    def test_project_constant_unchanged(self):
        f = FourierState.constant(2)
        assert project_frequency(f, N=3.0) == f, "ψ(0) = 1 leaves a_0 unchanged"

    def test_project_high_mode_removed(self):
        f = FourierState.mode((3,))
        assert project_frequency(f, N=1.0).is_zero, "|k|/N = 3 lies outside the bump"

    def test_project_intermediate_mode(self):
        f = FourierState.mode((3,))
        g = project_frequency(f, N=2.0)
        assert abs(g.coeffs[(3,)] - DEFAULT_BUMP(1.5)) < 1e-15

    def test_littlewood_paley_telescopes(self):
        """The dyadic pieces should sum back to f."""
        keys = enumerate_frequencies(2, 9).points
        rng = np.random.default_rng(3)
        f = FourierState.from_arrays(2, keys, rng.standard_normal(len(keys)) + 1j)
        pieces = littlewood_paley_decomposition(f)
        assert len(pieces) == littlewood_paley_depth(f) + 1
        total = pieces[0]
        for piece in pieces[1:]:
            total = total + piece
        error = (total + f.scaled(-1)).l2_norm()
        assert error < 1e-12, f"Pieces should telescope to f, error {error:.2e}"


class TestPropagators:
    """Test dispersion relations and free evolution."""

    def test_fractional_rejects_alpha_one(self):
        with pytest.raises(ValueError, match="alpha must be positive and != 1"):
            PropagatorSpec.fractional(1.0)

    def test_klein_gordon_dispersion(self):
        P = PropagatorSpec.klein_gordon(2.0)
        assert float(P.dispersion(0.0)) == 2.0
        assert abs(float(P.dispersion(1.5)) - 2.5) < 1e-15

    def test_from_dict(self):
        """kind defaults to fractional Schrödinger; wave is massless Klein-Gordon."""
        assert PropagatorSpec.from_dict({"alpha": 3}).alpha == 3.0
        wave = PropagatorSpec.from_dict({"kind": "wave"})
        assert wave.mass == 0.0 and wave.order == 1.0
        with pytest.raises(ValueError, match="propagator kind must be one of"):
            PropagatorSpec.from_dict({"kind": "heat"})

    def test_schrodinger_is_one_periodic(self):
        """With α = 2 every phase is an integer at t = 1."""
        f = FourierState.from_frequency_set(enumerate_frequencies(2, 4), 1 + 0.5j)
        assert evolve(f, 1.0, PropagatorSpec.fractional(2.0)) == f, "e^{iP} should be the identity"

    def test_half_period_phase(self):
        """Mode |k| = 1 picks up e^{iπ} = −1 at t = ½."""
        g = evolve(FourierState.mode((1, 0)), 0.5, PropagatorSpec.fractional(2.0))
        assert abs(g.coeffs[(1, 0)] + 1) < 1e-15

    def test_evolution_preserves_norm(self):
        f = FourierState.from_frequency_set(enumerate_frequencies(1, 6), 0.3 - 0.2j)
        g = evolve(f, 0.137, PropagatorSpec.fractional(1.5))
        assert abs(g.l2_norm() - f.l2_norm()) < 1e-13

    @pytest.mark.parametrize("P", [PropagatorSpec.fractional(1.5), PropagatorSpec.klein_gordon(1.0)])
    def test_group_law(self, P):
        """e^{itP} e^{isP} f = e^{i(s+t)P} f."""
        rng = np.random.default_rng(21)
        keys = rng.integers(-4, 5, size=(12, 2))
        values = rng.standard_normal(12) + 1j * rng.standard_normal(12)
        f = FourierState.from_arrays(2, keys, values)
        for s, t in [(0.3, 0.45), (-0.2, 1.7), (2.25, -0.6)]:
            composed = evolve(evolve(f, s, P), t, P)
            error = (composed + evolve(f, s + t, P).scaled(-1)).l2_norm()
            assert error <= 1e-12 * f.l2_norm(), f"s={s}, t={t}: group law off by {error:.2e}"

    def test_unit_phase_reduces_mod_one(self):
        assert unit_phase(3.0) == 1.0
        assert abs(unit_phase(0.25) - 1j) < 1e-15


class TestSynthesis:
    """Test space-time synthesis against the direct exponential sum."""

    @pytest.fixture
    def state(self):
        keys = [(-3, 1), (0, 0), (1, 2), (2, -2), (3, 3)]
        values = [1.0, -0.5j, 0.25 + 0.75j, 2.0, -1.0]
        return FourierState.from_arrays(2, keys, values)

    def test_periodic_matches_direct_sum(self, state):
        """FFT synthesis on the torus should equal the direct sum."""
        P = PropagatorSpec.fractional(2.0)
        grid = SpaceTimeGrid.torus(2, 8, (0.0, 0.5), 3)
        values = synthesize(state, grid, P).values
        expected = evaluate_points(state, P, grid.times(), grid_points(grid)).reshape(grid.shape)
        error = np.abs(values - expected).max()
        assert error < 1e-12, f"Periodic synthesis deviates by {error:.2e}"

    def test_window_matches_direct_sum(self, state):
        P = PropagatorSpec.klein_gordon(1.0)
        grid = SpaceTimeGrid.window(2, 0.1, 0.05, 6, 3)
        assert not grid.is_periodic
        values = synthesize(state, grid, P).values
        expected = evaluate_points(state, P, grid.times(), grid_points(grid)).reshape(grid.shape)
        error = np.abs(values - expected).max()
        assert error < 1e-12, f"Window synthesis deviates by {error:.2e}"

    def test_aliasing_rejected(self, state):
        """M = 6 cannot hold max |k_i| = 3."""
        grid = SpaceTimeGrid.torus(2, 6)
        with pytest.raises(ValueError, match="Aliasing"):
            synthesize(state, grid, PropagatorSpec.fractional(2.0))

    def test_zero_state(self):
        grid = SpaceTimeGrid.torus(1, 4, (0.0, 1.0), 2)
        values = synthesize(FourierState(1), grid, PropagatorSpec.fractional(2.0)).values
        assert values.shape == (2, 4) and not np.any(values)

    def test_density_closed_form(self):
        """ρ = 2|(e_0 + e_1)/√2|² + 3|e_2|² = 5 + 2cos(2π(x + t))."""
        from norms import OrthonormalSystem
        half = 1 / math.sqrt(2)
        system = OrthonormalSystem(
            [2.0, 3.0], (FourierState(1, {(0,): half, (1,): half}), FourierState.mode((2,)))
        )
        grid = SpaceTimeGrid.torus(1, 8, (0.0, 1.0), 4)
        rho = density(system, grid, PropagatorSpec.fractional(2.0)).values
        expected = 5 + 2 * np.cos(2 * np.pi * np.add.outer(grid.times(), grid.axis()))
        error = np.abs(rho - expected).max()
        assert error < 1e-12, f"Density deviates from the closed form by {error:.2e}"

    def test_random_points_match_exponential_sum(self):
        """100 random (t, x) samples of random states against a plain Python sum."""
        import cmath
        rng = np.random.default_rng(17)
        P = PropagatorSpec.fractional(2.0)
        checked = 0
        for _ in range(25):
            d = int(rng.choice([1, 2]))
            n = int(rng.integers(1, 8))
            keys = rng.integers(-3, 4, size=(n, d))
            values = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            f = FourierState.from_arrays(d, keys, values)
            grid = SpaceTimeGrid.torus(d, 8, (0.0, 0.7), 3)
            u = synthesize(f, grid, P).values
            times, axis = grid.times(), grid.axis()
            for _ in range(4):
                ti = int(rng.integers(grid.time_count))
                idx = tuple(int(i) for i in rng.integers(grid.space_points, size=d))
                t, x = times[ti], [axis[i] for i in idx]
                expected = 0j
                for k, a in f.coeffs.items():
                    phase = sum(kj * xj for kj, xj in zip(k, x))
                    phase += t * float(P.dispersion(math.sqrt(sum(kj * kj for kj in k))))
                    expected += a * cmath.exp(2j * math.pi * phase)
                error = abs(u[(ti,) + idx] - expected)
                assert error < 1e-10, f"state {f.coeffs}, t={t}, x={x}: off by {error:.2e}"
                checked += 1
        assert checked == 100

    def test_density_shortcut_matches_synthesis(self):
        """Pure modes: the constant-modulus shortcut agrees with full synthesis."""
        from norms import OrthonormalSystem
        fs = enumerate_frequencies(2, 3)
        system = OrthonormalSystem.from_modes(fs, 0.5)
        P = PropagatorSpec.fractional(2.0)
        grid = SpaceTimeGrid.torus(2, 8, (0.0, 0.5), 3)
        shortcut = density(system, grid, P).values
        synthesized = density(system, grid, P, synthesize_all=True).values
        error = np.abs(shortcut - synthesized).max()
        assert error <= 1e-12, f"Shortcut and synthesis differ by {error:.2e}"
        assert np.abs(synthesized - 0.5 * fs.count).max() <= 1e-12

    def test_interval_must_be_increasing(self):
        with pytest.raises(ValueError, match="t_end > t_start"):
            SpaceTimeGrid.torus(1, 4, (1.0, 1.0))


# ═══════════════════════════════════════════════════════════════════════════════
# NORMS
# ═══════════════════════════════════════════════════════════════════════════════

from norms import (
    FiniteOperator,
    MixedNormSpec,
    OrthonormalSystem,
    conjugate_exponent,
    gram,
    is_orthonormal,
    mixed_modes,
    mixed_norm,
    orthonormality_defect,
    parse_exponent,
    random_unitary,
    schatten_norm,
    sequence_norm,
)
from spectral_field import SpaceTimeField


class TestExponents:
    """Test exponent parsing and Hölder conjugates."""

    def test_parse(self):
        assert parse_exponent("inf") == math.inf
        assert parse_exponent("∞") == math.inf
        assert parse_exponent(4) == 4.0
        with pytest.raises(ValueError, match="must be >= 1"):
            parse_exponent(0.5)
        with pytest.raises(ValueError, match="must be a number"):
            parse_exponent("four")

    def test_conjugates(self):
        assert abs(conjugate_exponent(4) - 4 / 3) < 1e-15
        assert conjugate_exponent(1) == math.inf
        assert conjugate_exponent(math.inf) == 1.0


class TestMixedNorms:
    """Test sequence, mixed and Schatten norms on hand-computable inputs."""

    def test_sequence_norms(self):
        assert abs(sequence_norm([1, 1, 1], 2) - math.sqrt(3)) < 1e-15
        assert abs(sequence_norm([3, 4j], 2) - 5) < 1e-15
        assert sequence_norm([-2, 1], math.inf) == 2.0
        assert sequence_norm([], 3) == 0.0

    def test_constant_modulus_field(self):
        """|u| ≡ 2 on I = (0, 4): ‖u‖_{L²_t L³_x} = 2·4^{1/2} = 4."""
        grid = SpaceTimeGrid.torus(2, 5, (0.0, 4.0), 8)
        field = SpaceTimeField(grid, np.full(grid.shape, 2.0 + 0j))
        value = mixed_norm(field, MixedNormSpec(2, 3))
        assert abs(value - 4.0) < 1e-12, f"Expected 4, got {value}"

    def test_sup_norm(self):
        grid = SpaceTimeGrid.torus(1, 4, (0.0, 1.0), 2)
        values = np.zeros(grid.shape, dtype=complex)
        values[1, 2] = -7.0
        assert mixed_norm(SpaceTimeField(grid, values), MixedNormSpec("inf", "inf")) == 7.0

    def test_l4_of_dirichlet_packet(self):
        """‖f‖⁴_{L⁴(T×T)} counts the 2n² − n solutions of k1+k2=k3+k4, k1²+k2²=k3²+k4²."""
        f = FourierState.from_frequency_set(enumerate_frequencies(1, 3, "cube"))
        P = PropagatorSpec.fractional(2.0)
        grid = SpaceTimeGrid.for_state(f, P)
        value = mixed_norm(synthesize(f, grid, P), MixedNormSpec(4, 4))
        n = 7
        assert abs(value**4 - (2 * n * n - n)) < 1e-8, f"Expected {2 * n * n - n}, got {value**4}"

    def test_resolution_mismatch(self):
        grid = SpaceTimeGrid.torus(1, 4, (0.0, 1.0), 2)
        field = SpaceTimeField(grid, np.ones(grid.shape, dtype=complex))
        with pytest.raises(ValueError, match="Resolution mismatch"):
            mixed_norm(field, MixedNormSpec(2, 2, resolutions=(3, 4)))

    @pytest.fixture
    def packet_field(self):
        f = FourierState.from_frequency_set(enumerate_frequencies(2, 2), 0.3 + 0.1j)
        P = PropagatorSpec.fractional(2.0)
        return synthesize(f, SpaceTimeGrid.for_state(f, P, (0.0, 0.5)), P)

    @pytest.mark.parametrize("p, q", [(4, 3), (2, "inf"), ("inf", 6)])
    def test_absolutely_homogeneous(self, packet_field, p, q):
        """‖c·u‖ = |c|·‖u‖."""
        spec = MixedNormSpec(p, q)
        base = mixed_norm(packet_field, spec)
        scaled = mixed_norm(packet_field.scaled(-2.5j), spec)
        assert abs(scaled - 2.5 * base) <= 1e-12 * scaled, f"Expected {2.5 * base}, got {scaled}"

    def test_monotone_under_pointwise_domination(self, packet_field):
        """|u| ≤ |v| everywhere implies ‖u‖ ≤ ‖v‖."""
        rng = np.random.default_rng(4)
        grid = packet_field.grid
        larger = SpaceTimeField(grid, packet_field.values * (1 + rng.random(grid.shape)))
        for spec in [MixedNormSpec(4, 4), MixedNormSpec(3, "inf"), MixedNormSpec("inf", 2)]:
            small, large = mixed_norm(packet_field, spec), mixed_norm(larger, spec)
            assert small <= large, f"({spec.p}, {spec.q}): {small} > {large}"

    def test_stable_under_resolution_doubling(self):
        """The default grid already resolves ‖f‖_{L⁴_t L⁴_x} of a Dirichlet packet."""
        f = FourierState.from_frequency_set(enumerate_frequencies(1, 5, "cube"))
        P = PropagatorSpec.fractional(2.0)
        coarse = SpaceTimeGrid.for_state(f, P)
        fine = SpaceTimeGrid.torus(1, 2 * coarse.space_points, coarse.interval, 2 * coarse.time_count)
        spec = MixedNormSpec(4, 4)
        a = mixed_norm(synthesize(f, coarse, P), spec)
        b = mixed_norm(synthesize(f, fine, P), spec)
        assert abs(a - b) < 1e-6 * b, f"Norm moved from {a} to {b} when doubling the grid"

    def test_halved(self):
        spec = MixedNormSpec(4, "inf").halved()
        assert spec.p == 2.0 and spec.q == math.inf

    def test_schatten_diagonal(self):
        """diag(3, −4): 𝔖¹ = 7, 𝔖² = 5, 𝔖^∞ = 4."""
        T = FiniteOperator.diagonal([3, -4])
        assert abs(schatten_norm(T, 1) - 7) < 1e-12
        assert abs(schatten_norm(T, 2) - 5) < 1e-12
        assert abs(schatten_norm(T, "inf") - 4) < 1e-12

    def test_frobenius_identity(self):
        """𝔖² equals the Frobenius norm on random rectangular matrices."""
        rng = np.random.default_rng(11)
        for _ in range(100):
            rows, cols = rng.integers(1, 9, size=2)
            matrix = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
            expected = np.linalg.norm(matrix, "fro")
            got = schatten_norm(FiniteOperator(matrix), 2)
            assert abs(got - expected) <= 1e-10 * expected, f"Frobenius mismatch {got} vs {expected}"

    def test_adjoint_has_same_singular_values(self):
        rng = np.random.default_rng(5)
        T = FiniteOperator(rng.standard_normal((3, 5)))
        assert np.allclose(T.singular_values(), T.adjoint().singular_values(), rtol=0, atol=1e-12)

    def test_schatten_nonincreasing_in_beta(self):
        rng = np.random.default_rng(8)
        T = FiniteOperator(rng.standard_normal((6, 4)) + 1j * rng.standard_normal((6, 4)))
        values = [schatten_norm(T, beta) for beta in [1, 1.5, 2, 3, 4, "inf"]]
        for smaller_beta, larger_beta in zip(values, values[1:]):
            assert larger_beta <= smaller_beta * (1 + 1e-12), f"Schatten norms not nonincreasing: {values}"


class TestOrthonormalSystems:
    """Test Gram matrices and orthonormality certificates."""

    def test_pure_modes_certified(self):
        system = OrthonormalSystem.from_modes(enumerate_frequencies(2, 3), 0.5)
        assert system.certified
        assert np.array_equal(gram(system), np.eye(system.size)), "pure modes have G = Id"
        assert system.weight_norm(1) == 0.5 * system.size

    def test_random_unitary_mixture(self):
        fs = enumerate_frequencies(1, 5)
        rng = np.random.default_rng(9)
        system = mixed_modes(fs, random_unitary(fs.count, rng)[:4])
        assert orthonormality_defect(system) < 1e-12, "rows of a unitary are orthonormal"
        assert system.certify().certified

    def test_evolution_keeps_orthonormality(self):
        fs = enumerate_frequencies(2, 2)
        rng = np.random.default_rng(1)
        system = mixed_modes(fs, random_unitary(fs.count, rng))
        evolved = system.evolved(0.3, PropagatorSpec.fractional(1.5))
        assert is_orthonormal(evolved), "free evolution is unitary"

    def test_non_orthonormal_rejected(self):
        f = FourierState.mode((0,))
        system = OrthonormalSystem([1.0, 1.0], (f, f))
        with pytest.raises(ValueError, match="Not orthonormal"):
            system.certify()

    def test_weight_count_mismatch(self):
        with pytest.raises(ValueError, match="weights for"):
            OrthonormalSystem([1.0], (FourierState.mode((0,)), FourierState.mode((1,))))


# ═══════════════════════════════════════════════════════════════════════════════
# PREDICTED EXPONENTS
# ═══════════════════════════════════════════════════════════════════════════════

from exponents import (
    beta_range,
    beta_star,
    classify_pair,
    multiplier_admissible,
    packet_slope,
    predicted_slope,
    schrodinger_admissible_p,
    sigma0,
    sigma0_wave,
    sigma1_torus,
    sigma2_torus,
    universal_bound,
    wave_admissible_p,
    weyl_beta_condition,
    zonal_beta_condition,
)


class TestPredictedExponents:
    """Test closed-form exponents and regime classification."""

    @pytest.mark.parametrize("d,q,regime", [
        (1, 100.0, "subcritical"),
        (2, 4.0, "subcritical"),
        (2, 6.0, "critical"),
        (2, 8.0, "supercritical"),
        (3, 4.0, "critical"),
        (3, 5.0, "supercritical"),
        (3, 6.0, "endpoint"),
    ])
    def test_classify_pair(self, d, q, regime):
        assert classify_pair(d, q) == regime, f"d={d}, q={q}: expected {regime}"

    def test_classify_wave_pair(self):
        """Wave pairs in d=3 behave like Schrödinger pairs in d=2."""
        assert classify_pair(3, 6.0, "wave") == "critical"

    def test_admissible_p(self):
        assert abs(schrodinger_admissible_p(1, 6) - 6) < 1e-12
        assert abs(schrodinger_admissible_p(2, 4) - 4) < 1e-12
        assert schrodinger_admissible_p(2, 2) == math.inf

    def test_wave_admissible_p(self):
        """1/p = ((d−1)/2)(1/2 − 1/q)."""
        assert abs(wave_admissible_p(3, 6) - 3) < 1e-12
        assert abs(wave_admissible_p(2, 6) - 6) < 1e-12
        with pytest.raises(ValueError, match="need d >= 2"):
            wave_admissible_p(1, 4)

    def test_sigma0_wave(self):
        assert abs(sigma0_wave(3, 4) - 1.0) < 1e-15
        with pytest.raises(ValueError, match="needs d >= 2"):
            sigma0_wave(1, 4)

    def test_sigma_values(self):
        assert sigma0(2.0, 4) == 0.5
        assert abs(sigma0(0.5, 4) - 0.75) < 1e-15
        assert abs(beta_star(4) - 4 / 3) < 1e-15
        assert sigma1_torus(1, 6, 2.0) == 0.0
        assert abs(sigma1_torus(2, 8, 2.0) - 0.5) < 1e-15
        assert sigma2_torus(2, 8, 2.0, 4) == 0.25

    def test_beta_range_subcritical(self):
        """At σ = σ0 the subcritical range is β ≤ β* = 2q/(q+2)."""
        rng = beta_range(2, 4.0, 0.5)
        assert rng.regime == "subcritical"
        assert abs(rng.limit - 4 / 3) < 1e-12 and rng.inclusive
        assert rng.admits(4 / 3) and not rng.admits(1.5)

    def test_packet_slope(self):
        assert packet_slope(1, 2.0, 4, 4) == -0.25

    def test_predicted_slope(self):
        assert predicted_slope("weyl_saturation", {"d": 2}) == 2.0
        assert predicted_slope("zonal_sphere", {"q": 4}) == 1.0
        assert predicted_slope("torus_cluster", {"d": 2}) == 0.5
        assert predicted_slope("torus_strichartz", {"d": 1, "q": 6, "alpha": 2.0}) == 0.0
        with pytest.raises(ValueError, match="No closed-form slope"):
            predicted_slope("shell_eigenfunction", {"d": 2, "q": 4})

    def test_universal_bound(self):
        assert universal_bound(2, 10, 4) == 317.0

    def test_necessary_conditions(self):
        assert weyl_beta_condition(2, 2.0, math.inf)
        assert not weyl_beta_condition(2, 0.0, 2.0)
        assert zonal_beta_condition(2, 4.0, 0.0, 1.0)
        assert not zonal_beta_condition(2, 8.0, 0.0, 2.0)
        assert multiplier_admissible(2, 4.0, 0.0, 1.0)
        assert not multiplier_admissible(2, 4.0, 0.0, 1.5)


# ═══════════════════════════════════════════════════════════════════════════════
# SCALING EXPERIMENTS
# ═══════════════════════════════════════════════════════════════════════════════

from experiments import (
    ExperimentReport,
    ScalingExperiment,
    SphereZonalState,
    cluster_state,
    cube_state,
    fit_exponent,
    packet_experiment,
    packet_norm,
    packet_window,
    shell_eigenfunction_experiment,
    sphere_quadrature,
    torus_cluster_experiment,
    torus_strichartz_experiment,
    universal_bound_experiment,
    weyl_saturation_experiment,
    zonal_sphere_experiment,
)


class TestExponentFit:
    """Test the log-log least-squares fit."""

    def test_exact_power_law(self):
        fit = fit_exponent([(2, 4), (4, 16), (8, 64)])
        assert abs(fit.slope - 2) < 1e-12, f"Expected slope 2, got {fit.slope}"
        assert abs(fit.intercept) < 1e-12
        assert fit.max_residual < 1e-12

    def test_needs_three_pairs(self):
        with pytest.raises(ValueError, match=">= 3 pairs"):
            fit_exponent([(1, 1), (2, 2)])

    def test_rejects_nonpositive_values(self):
        with pytest.raises(ValueError, match="positive finite values"):
            fit_exponent([(1, 1), (2, 0), (3, 3)])

    def test_log_pairs_skip_zeros(self):
        report = ExperimentReport("x", [1, 2, 4], [1.0, 0.0, 4.0])
        assert report.log_pairs() == [(0.0, 0.0), (math.log(4), math.log(4))]

    def test_scaling_comparisons(self):
        fit = fit_exponent([(2, 4), (4, 16), (8, 64)])
        two_sided = ScalingExperiment("x", (2, 4, 8), expected_slope=2.5, tolerance=0.1)
        upper = ScalingExperiment("x", (2, 4, 8), expected_slope=2.5, tolerance=0.1, comparison="upper")
        assert not two_sided.slope_passes(fit), "slope 2 is 0.5 away from 2.5"
        assert upper.slope_passes(fit), "slope 2 is below 2.5 + 0.1"

    def test_cutoffs_must_increase(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            ScalingExperiment("x", (4, 2, 8))


class TestLatticeExperiments:
    """Test the torus experiments and their exact identities."""

    def test_weyl_saturation(self):
        """Density of the saturated system equals the lattice count everywhere."""
        report = weyl_saturation_experiment(2, PropagatorSpec.fractional(2.0), 4, 4, [4, 8, 16])
        assert report.identities_hold, f"Identities failed: {report.identities}"
        assert report.details["counts"] == [49, 197, 797]
        assert abs(report.fit.slope - 2) < 0.1, f"Expected slope ~2, got {report.fit.slope}"

    def test_packet_slope(self):
        """Normalized windowed packet norm scales like N^{-1/4} for d=1, α=2, p=q=4."""
        report = packet_experiment(1, 2.0, 4, 4, [8, 16, 32])
        assert abs(report.fit.slope + 0.25) < 0.1, f"Expected slope ~-0.25, got {report.fit.slope}"

    def test_shell_eigenfunction(self):
        report = shell_eigenfunction_experiment(2, 4, [5, 25])
        assert report.identities_hold, f"Identities failed: {report.identities}"
        assert report.details["r_d"] == [12, 12 + 8], "r_2(625) = 20"
        assert all(v > 0 for v in report.values)

    def test_cluster_state(self):
        f = cluster_state(2, 5)
        assert len(f) == 32
        assert abs(f.l2_norm_sq() - 1) < 1e-14

    def test_empty_cluster(self):
        """|k|² ∈ {5, 6} has no solutions in d=1."""
        with pytest.raises(ValueError, match="Empty shell cluster"):
            cluster_state(1, 2.5, 0.4)

    def test_torus_cluster(self):
        report = torus_cluster_experiment(2, 2.0, [5, 10, 20])
        assert report.identities_hold, f"Identities failed: {report.identities}"
        assert abs(report.values[0] - math.sqrt(32)) < 1e-12
        assert report.details["smallest_constant"] >= 0.5

    def test_packet_norm_grows_with_window(self):
        """Nested windows give nondecreasing norms, all below the full-torus norm."""
        P = PropagatorSpec.fractional(2.0)
        values = [
            packet_norm(1, P, 4, 4, 4, window=packet_window(1, 4, P, c, 64, 64), normalized=False)
            for c in (0.5, 1.0, 2.0)
        ]
        full = packet_norm(1, P, 4, 4, 4, normalized=False)
        assert values[0] < values[1] < values[2], f"Window norms not increasing: {values}"
        assert values[2] <= full, f"Window norm {values[2]} exceeds the full norm {full}"

    def test_cluster_stays_coherent_at_j32(self):
        """|u_32(t, 0)| / u_32(0, 0) ≥ 0.9 for t ~ 10⁻⁴/32."""
        P = PropagatorSpec.fractional(2.0)
        f = cluster_state(2, 32, 1.0)
        value = abs(evaluate_points(f, P, [1e-4 / 32], np.zeros((1, 2)))[0, 0])
        ratio = value / math.sqrt(len(f))
        assert ratio >= 0.9, f"Cluster ratio {ratio} below 0.9"
        report = torus_cluster_experiment(2, 2.0, [8, 16, 32])
        assert report.details["coherence_floor"][-1] >= 0.9

    def test_universal_bound(self):
        report = universal_bound_experiment(
            2, PropagatorSpec.fractional(2.0), 4, 4, [2, 3, 4], seed=1, time_samples=3
        )
        assert report.identities_hold, f"Identities failed: {report.identities}"
        assert all(peak <= 1 + 1e-12 for peak in report.details["peak_over_bound"])

    def test_torus_strichartz_l4(self):
        """L⁴ ratio of the cube packet is (2n² − n)^{1/4}/√n exactly."""
        report = torus_strichartz_experiment(1, 2.0, 4, [2, 4, 8])
        for N, value in zip(report.cutoffs, report.values):
            n = 2 * N + 1
            expected = (2 * n * n - n) ** 0.25 / math.sqrt(n)
            assert abs(value - expected) < 1e-9, f"N={N}: expected {expected}, got {value}"

    def test_cube_state_profiles(self):
        rng = np.random.default_rng(0)
        f = cube_state(2, 2, "random_phase", rng)
        assert len(f) == 25 and np.allclose(np.abs(f.amplitudes()), 1.0)
        with pytest.raises(ValueError, match="profile must be one of"):
            cube_state(2, 2, "gaussian", rng)

    def test_cutoffs_validated(self):
        with pytest.raises(ValueError, match="positive integers"):
            packet_experiment(1, 2.0, 4, 4, [8, 0, 32])


class TestSphere:
    """Test zonal harmonics on S²."""

    def test_normalization(self):
        nodes, weights = sphere_quadrature(10)
        z = SphereZonalState.build(10, nodes, weights)
        assert abs(z.l2_norm() - 1) < 1e-10, f"‖Z_10‖ = {z.l2_norm()}"
        assert abs(z.pole_value() - math.sqrt(21 / (4 * math.pi))) < 1e-15

    def test_zonal_experiment(self):
        report = zonal_sphere_experiment([2, 4, 8], 4, 4, check_degrees=16)
        assert report.identities_hold, f"Identities failed: {report.identities}"
        assert report.values == sorted(report.values), "partial sums grow with N"


# ═══════════════════════════════════════════════════════════════════════════════
# DECOUPLING AND DISCRETE RESTRICTION
# ═══════════════════════════════════════════════════════════════════════════════

from decoupling import (
    DecouplingInstance,
    critical_decoupling_p,
    decoupling_experiment,
    decoupling_ratio,
    discrete_restriction_experiment,
    minimal_radius,
    restriction_ratio,
    sample_ball,
    separated_frequencies,
)


class TestDecoupling:
    """Test decoupling instances and ratios on small scales."""

    def test_instance_geometry(self):
        inst = DecouplingInstance(1, 2.0, 0.25)
        assert inst.radius == 4.0
        assert inst.cubes_per_side == 4 and inst.cube_side == 0.5
        assert len(inst.sample_axis()) == 64
        nodes = np.concatenate([inst.cube_nodes(i) for i in range(4)])
        assert nodes.min() > -1 and nodes.max() < 1

    def test_minimal_radius(self):
        assert abs(minimal_radius(0.25, 2.0) - 4) < 1e-12
        assert abs(minimal_radius(0.25, 3.0) - 8) < 1e-12

    def test_radius_below_floor(self):
        with pytest.raises(ValueError, match="below delta"):
            DecouplingInstance(1, 2.0, 0.25, radius=2.0)

    def test_invalid_instances(self):
        with pytest.raises(ValueError, match="decoupling supports d"):
            DecouplingInstance(3, 2.0, 0.25)
        with pytest.raises(ValueError, match="density must be one of"):
            DecouplingInstance(1, 2.0, 0.25, density="spiky")

    def test_p_range(self):
        assert critical_decoupling_p(1) == 6.0 and critical_decoupling_p(2) == 4.0
        with pytest.raises(ValueError, match="p must lie in"):
            decoupling_ratio(DecouplingInstance(1, 2.0, 0.25), 7.0)

    def test_single_cube_amplitudes(self):
        amps = DecouplingInstance(2, 2.0, 0.25, density="single_cube").cube_amplitudes()
        assert np.count_nonzero(amps) == 1

    @pytest.mark.parametrize("p", [2.0, 4.0, 6.0])
    def test_single_cube_ratio_bounded(self, p):
        """One block: the ball is dominated by the weight up to 2^{10d}, so ratio ≤ 2^{10d/p}."""
        result = decoupling_ratio(DecouplingInstance(1, 2.0, 0.25, density="single_cube"), p)
        assert len(result.block_norms) == 1
        assert 0 < result.ratio <= 2 ** (10 / p), f"p={p}: ratio {result.ratio} above 2^(10/p)"

    def test_ratio_structure(self):
        result = decoupling_ratio(DecouplingInstance(1, 2.0, 0.25), 4.0)
        assert len(result.block_norms) == 4
        assert abs(result.rhs - math.sqrt(np.sum(result.block_norms**2))) < 1e-12 * result.rhs
        assert result.ratio > 0

    def test_random_phase_deterministic(self):
        inst = DecouplingInstance(1, 3.0, 0.25, density="random_phase", seed=4)
        assert decoupling_ratio(inst, 6.0).ratio == decoupling_ratio(inst, 6.0).ratio

    def test_experiment(self):
        report = decoupling_experiment(1, 2.0, 4.0, [0.0625, 0.25])
        assert report.cutoffs == [4.0, 16.0], "scales are 1/δ in increasing order"
        assert report.identities["nondegenerate"]
        assert "subpolynomial[delta=0.0625]" in report.identities


class TestDiscreteRestriction:
    """Test the sampled discrete restriction ratio."""

    def test_separated_frequencies(self):
        assert separated_frequencies(1, 2)[:, 0].tolist() == [-1.0, -0.5, 0.0, 0.5, 1.0]
        assert separated_frequencies(2, 1).shape == (9, 2)

    def test_sample_ball(self):
        points = sample_ball(np.random.default_rng(0), 3, 2.5, 500)
        assert np.linalg.norm(points, axis=1).max() <= 2.5

    def test_single_frequency_ratio_is_one(self):
        """|a·e(·)| is constant, so the averaged ratio is exactly 1."""
        points = sample_ball(np.random.default_rng(1), 2, 10.0, 64)
        value = restriction_ratio(np.array([[0.5]]), np.array([2.0]), 2.0, 6.0, points)
        assert abs(value - 1) < 1e-12, f"Expected 1, got {value}"

    def test_l2_ratio_near_one_on_large_ball(self):
        """At p = 2 cross terms average out over a large ball; on a tiny ball they add up."""
        frequencies = separated_frequencies(1, 2)
        coeffs = np.ones(len(frequencies))
        wide = sample_ball(np.random.default_rng(7), 2, 400.0, 20000)
        value = restriction_ratio(frequencies, coeffs, 2.0, 2.0, wide)
        assert abs(value - 1) < 0.05, f"Expected ~1 on a large ball, got {value}"
        narrow = sample_ball(np.random.default_rng(7), 2, 0.01, 200)
        coherent = restriction_ratio(frequencies, coeffs, 2.0, 2.0, narrow)
        assert coherent > 2, f"Expected ~√5 on a tiny ball, got {coherent}"

    def test_experiment_deterministic(self):
        first = discrete_restriction_experiment(1, 2.0, 4.0, [2, 4, 8], trials=2, samples=256, seed=5)
        second = discrete_restriction_experiment(1, 2.0, 4.0, [2, 4, 8], trials=2, samples=256, seed=5)
        assert first.values == second.values
        assert first.sampled_supremum and all(v > 0 for v in first.values)

    def test_radius_below_floor(self):
        with pytest.raises(ValueError, match="below N"):
            discrete_restriction_experiment(1, 2.0, 4.0, [2, 4, 8], radius=1.0)


# ═══════════════════════════════════════════════════════════════════════════════
# DUALITY PROBE
# ═══════════════════════════════════════════════════════════════════════════════

from duality import (
    duality_experiment,
    duality_probe,
    grid_norm,
    holder_witness,
    rank_one_constant,
    rank_one_constant_value,
)


class TestDualityProbe:
    """Test the sampled system/Schatten duality."""

    def test_rank_one_closed_form(self):
        """Both constants of u e_0* equal n_t^{2/p} n_x^{2/q} / (n_t n_x)."""
        T = rank_one_constant(4, 2, 3)
        report = duality_probe(T, 4, 4, 1, samples=20, time_points=2)
        expected = rank_one_constant_value(4, 4, 2, 3)
        assert abs(expected - math.sqrt(6) / 6) < 1e-15
        assert abs(report.c_sys - expected) < 1e-9 * expected, f"C_sys={report.c_sys}, expected {expected}"
        assert abs(report.c_dual_upper - expected) < 1e-9 * expected
        assert report.passed

    def test_random_weight_ratio_reported(self):
        """Random W alone never beats the witnesses, so C_sys/C_dual ≥ C_sys/C_dual_upper."""
        report = duality_probe(rank_one_constant(4, 2, 3), 4, 4, 1, samples=20, time_points=2)
        assert report.c_dual <= report.c_dual_upper
        assert report.random_ratio >= 1 - 1e-9, f"C_dual is a lower bound, got ratio {report.random_ratio}"
        summary = duality_experiment(4, 4, 1, instances=3, samples=8, seed=3)
        assert summary.details["max_random_ratio"] >= summary.details["max_ratio"]

    def test_holder_witness(self):
        """⟨ρ, V⟩ = ‖ρ‖_{L^a L^b} and ‖V‖_{L^{a'} L^{b'}} = 1."""
        rho = np.random.default_rng(2).random((3, 4)) + 0.1
        a, b = 2.0, 3.0
        V = holder_witness(rho, a, b)
        assert abs(np.sum(rho * V) - grid_norm(rho, a, b)) < 1e-12
        assert abs(grid_norm(V, 2.0, 1.5) - 1) < 1e-12

    def test_zero_operator(self):
        report = duality_probe(FiniteOperator(np.zeros((4, 2))), 4, 4, 1)
        assert report.passed and report.c_sys == 0.0

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError, match="finite p, q >= 2"):
            duality_probe(rank_one_constant(2, 1, 2), 1.5, 4, 1)
        with pytest.raises(ValueError, match="n <= 64"):
            duality_probe(FiniteOperator(np.ones((2, 65))), 4, 4, 1)
        with pytest.raises(ValueError, match="do not split"):
            duality_probe(rank_one_constant(2, 1, 3), 4, 4, 1, time_points=2)

    def test_forward_inequality(self):
        report = duality_experiment(4, 4, 1, instances=3, samples=8, seed=3)
        assert report.identities_hold, f"Forward inequality failed: {report.identities}"
        assert report.details["max_ratio"] <= 1 + 1e-6
        assert report.sampled_supremum


# ═══════════════════════════════════════════════════════════════════════════════
# HARTREE SOLVER
# ═══════════════════════════════════════════════════════════════════════════════

from hartree import (
    HartreeState,
    PotentialSpec,
    SolverConfig,
    apply_potential,
    compute_density,
    self_convergence_order,
    sobolev_schatten_norm,
    solve,
    state_distance,
    step,
)
from runner import load_hartree_config


class TestHartreeTypes:
    """Test validation of states, potentials and solver settings."""

    def test_state_validation(self):
        f = FourierState.mode((1,))
        with pytest.raises(ValueError, match="weights must be >= 0"):
            HartreeState([-1.0], (f,))
        with pytest.raises(ValueError, match="supports d in"):
            HartreeState([1.0], (FourierState.mode((0, 0, 1)),))
        with pytest.raises(ValueError, match="exceeds"):
            HartreeState([1.0], (FourierState.mode((65,)),))

    def test_trace(self):
        state = HartreeState([1.0, 0.5], (FourierState.mode((0,), 2.0), FourierState.mode((1,))))
        assert state.trace() == 4.5 and state.box == 1

    def test_solver_config(self):
        config = SolverConfig(0.01, 0.1)
        assert config.steps == 10
        assert config.grid_size(2) == 15
        with pytest.raises(ValueError, match="not a whole number of steps"):
            SolverConfig(0.03, 0.1)
        with pytest.raises(ValueError, match="dealiasing minimum"):
            SolverConfig(0.01, 0.1, grid_points=8).grid_size(2)
        with pytest.raises(ValueError, match="scheme must be one of"):
            SolverConfig(0.01, 0.1, scheme="rk4")

    def test_explicit_potential_must_be_real(self):
        w = FourierState(1, {(1,): 1.0, (-1,): 2.0})
        with pytest.raises(ValueError, match="real-valued"):
            PotentialSpec("explicit", w=w)

    def test_zero_potential_is_offset(self):
        rho = np.random.default_rng(0).random(8)
        assert np.all(apply_potential(rho, PotentialSpec.zero(0.3)) == 0.3)

    def test_multiplier_on_cosine(self):
        """a = 0, d = 1: the symbol at k = ±1 is 2^{−1/2}."""
        x = np.arange(16) / 16
        rho = np.cos(2 * np.pi * x)
        V = apply_potential(rho, PotentialSpec.multiplier(0.0))
        error = np.abs(V - 2**-0.5 * rho).max()
        assert error < 1e-12, f"Wρ deviates from 2^(-1/2) cos(2πx) by {error:.2e}"

    def test_density_of_two_modes(self):
        """u = 1 + e^{2πix} has |u|² = 2 + 2cos(2πx)."""
        state = HartreeState([1.0], (FourierState(1, {(0,): 1.0, (1,): 1.0}),))
        rho = compute_density(state, 8)
        expected = 2 + 2 * np.cos(2 * np.pi * np.arange(8) / 8)
        error = np.abs(rho - expected).max()
        assert error < 1e-12, f"Density deviates from 2 + 2cos(2πx) by {error:.2e}"

    def test_density_aliasing(self):
        state = HartreeState([1.0], (FourierState(1, {(3,): 1.0, (0,): 1.0}),))
        with pytest.raises(ValueError, match="Aliasing"):
            compute_density(state, 12)
        rho = compute_density(state, 13)
        assert abs(rho.mean() - 2) < 1e-12, "mean of ρ equals the mass"

    def test_sobolev_schatten_norm(self):
        """γ = e0e0* + ½ e1e1*: trace 1.5; with s = 1 the lift gives 1 + ½·2 = 2."""
        state = HartreeState([1.0, 0.5], (FourierState.mode((0,)), FourierState.mode((1,))))
        assert abs(sobolev_schatten_norm(state, 0.0, 1) - 1.5) < 1e-12
        assert abs(sobolev_schatten_norm(state, 1.0, 1) - 2.0) < 1e-12
        assert abs(sobolev_schatten_norm(state, 0.0, "inf") - 1.0) < 1e-12


class TestHartreeSolver:
    """Test conservation, exact reductions and convergence order."""

    @pytest.fixture(scope="class")
    def two_mode(self):
        problem, _ = load_hartree_config(CONFIGS_DIR / "hartree_two_mode.json")
        return problem

    def test_conservation(self, two_mode):
        trajectory = solve(two_mode.state, two_mode.potential, two_mode.propagator, two_mode.solver)
        report = trajectory.conservation()
        assert report.max_mass_drift <= 1e-10, f"mass drift {report.max_mass_drift:.2e}"
        assert report.trace_drift <= 1e-10, f"trace drift {report.trace_drift:.2e}"
        assert not report.blowup_suspected
        assert len(trajectory.rows()) == 11 * 2, "11 outputs for 2 states"

    def test_energy_drift_shrinks(self, two_mode):
        coarse = solve(two_mode.state, two_mode.potential, two_mode.propagator, two_mode.solver)
        fine = solve(two_mode.state, two_mode.potential, two_mode.propagator, two_mode.solver.refined(2))
        ratio = coarse.conservation().energy_drift / fine.conservation().energy_drift
        assert ratio >= 3.5, f"Energy drift should shrink ≥ 3.5x under dt halving, got {ratio:.2f}x"

    def test_strang_order(self, two_mode):
        order = self_convergence_order(
            two_mode.state, two_mode.potential, two_mode.propagator, two_mode.solver, two_mode.reference_factor
        )
        assert 1.8 <= order <= 2.2, f"Strang order should be ~2, got {order:.3f}"

    def test_lie_is_first_order(self, two_mode):
        config = SolverConfig(0.004, 0.2, scheme="lie", grid_points=32)
        order = self_convergence_order(two_mode.state, two_mode.potential, two_mode.propagator, config, 16)
        assert 0.8 <= order <= 1.3, f"Lie order should be ~1, got {order:.3f}"

    def test_zero_potential_is_free_flow(self):
        """With W = 0 the solver reproduces evolve(f, −t)."""
        problem, _ = load_hartree_config(CONFIGS_DIR / "hartree_zero.json")
        config = SolverConfig(0.01, 0.1)
        final = solve(problem.state, problem.potential, problem.propagator, config).final
        expected = HartreeState(
            problem.state.weights, tuple(evolve(f, -0.1, problem.propagator) for f in problem.state.states)
        )
        error = state_distance(final, expected)
        assert error < 1e-12, f"Free evolution mismatch {error:.2e}"

    def test_offset_is_a_global_phase(self, two_mode):
        """V₀ multiplies every state by e^{−2πi V₀ t} and leaves ρ unchanged."""
        config = SolverConfig(0.01, 0.1)
        base = solve(two_mode.state, PotentialSpec.multiplier(0.0), two_mode.propagator, config).final
        shifted = solve(two_mode.state, PotentialSpec.multiplier(0.0, offset=0.7), two_mode.propagator, config).final
        phase = complex(unit_phase(-0.7 * 0.1))
        for f, g in zip(base.states, shifted.states):
            error = (g + f.scaled(-phase)).l2_norm()
            assert error < 1e-12, f"Offset should only rotate the phase, off by {error:.2e}"
        M = 4 * max(base.box, shifted.box) + 1
        drift = np.abs(compute_density(base, M) - compute_density(shifted, M)).max()
        assert drift < 1e-12, f"Offset changed the density by {drift:.2e}"

    def test_constant_data_phase(self):
        """u ≡ c evolves as c·e^{−2πi ν c² t} for the a = 0 multiplier in d = 1."""
        c, nu, t = 0.8, 1.0, 1.0
        state = HartreeState([nu], (FourierState.constant(1, c),))
        final = solve(state, PotentialSpec.multiplier(0.0), PropagatorSpec.fractional(2.0),
                      SolverConfig(0.01, t)).final
        expected = c * unit_phase(-nu * c * c * t)
        got = final.states[0].coeffs[(0,)]
        assert abs(got - expected) < 1e-12, f"Expected {expected}, got {got}"

    def test_single_step(self):
        state = HartreeState([1.0], (FourierState(1, {(0,): 0.6, (2,): 0.8j}),))
        nxt = step(state, PotentialSpec.multiplier(0.5), PropagatorSpec.fractional(2.0), 0.01)
        assert abs(nxt.states[0].l2_norm_sq() - 1) < 1e-13
        assert abs(nxt.time - 0.01) < 1e-15


# ═══════════════════════════════════════════════════════════════════════════════
# PARAMETER VALIDATION
# ═══════════════════════════════════════════════════════════════════════════════

from validators import EXPERIMENT_VALIDATORS, ParamValidator, validate_params


class TestParamValidator:
    """Test declarative parameter validation."""

    def test_required_missing(self):
        value, error = ParamValidator(name="d", param_type=int).validate({})
        assert value is None and "missing required parameter 'd'" in error

    def test_default_used(self):
        value, error = ParamValidator(name="seed", param_type=int, default=7).validate({})
        assert value == 7 and error is None

    def test_int_rejects_fraction(self):
        value, error = ParamValidator(name="d", param_type=int).validate({"d": 1.5})
        assert value is None and "must be an integer" in error

    def test_exponent_accepts_inf(self):
        value, error = ParamValidator(name="q", param_type="exponent", min_val=1.0).validate({"q": "inf"})
        assert value == math.inf and error is None

    def test_range(self):
        value, error = ParamValidator(name="d", param_type=int, max_val=3).validate({"d": 4})
        assert "must be <= 3" in error

    def test_valid_values(self):
        validator = ParamValidator(name="profile", param_type=str, valid_values={"ones", "random_phase"})
        value, error = validator.validate({"profile": "gauss"})
        assert "must be one of: 'ones', 'random_phase'" in error

    def test_list_items_checked(self):
        validator = ParamValidator(name="cutoffs", param_type=list, item_type=int, min_val=0, min_items=1)
        assert validator.validate({"cutoffs": []})[1] == "cutoffs needs at least 1 entries, got 0"
        assert "must be >= 0" in validator.validate({"cutoffs": [4, -1]})[1]

    def test_unknown_keys(self):
        params, error = validate_params({"d": 1, "extra": 2}, EXPERIMENT_VALIDATORS["packet"])
        assert params == {} and error == "unknown parameter(s): extra"

    def test_defaults_filled(self):
        params, error = validate_params({"d": 1, "p": 4, "q": 4, "cutoffs": [8]}, EXPERIMENT_VALIDATORS["packet"])
        assert error is None
        assert params["alpha"] == 2.0 and params["normalized"] is True

    def test_registry_matches_runner(self):
        from runner import EXPERIMENTS
        assert set(EXPERIMENT_VALIDATORS) == set(EXPERIMENTS)
        assert len(EXPERIMENTS) == 10


# ═══════════════════════════════════════════════════════════════════════════════
# REPORTING
# ═══════════════════════════════════════════════════════════════════════════════

from reporting import RESULT_COLUMNS, config_hash, fnv1a_64, write_results, write_summary


class TestReporting:
    """Test hashing and result files."""

    def test_fnv_vectors(self):
        """Published FNV-1a 64 test vectors."""
        assert fnv1a_64(b"") == 0xCBF29CE484222325
        assert fnv1a_64(b"a") == 0xAF63DC4C8601EC8C
        assert fnv1a_64(b"foobar") == 0x85944171F73967E8

    def test_hash_ignores_key_order(self):
        assert config_hash({"b": 1, "a": [2, 3]}) == config_hash({"a": [2, 3], "b": 1})
        assert config_hash({"a": 1}) != config_hash({"a": 2})
        assert len(config_hash({})) == 16

    def test_empty_results_has_header(self, tmp_path):
        path = tmp_path / "results.csv"
        write_results([], path)
        assert path.read_text() == ",".join(RESULT_COLUMNS) + "\n"

    def test_summary_is_strict_json(self, tmp_path):
        path = tmp_path / "summary.json"
        write_summary({"value": math.inf, "array": np.arange(2)}, path)
        data = json.loads(path.read_text())
        assert data == {"array": [0, 1], "value": "inf"}


# ═══════════════════════════════════════════════════════════════════════════════
# RUN ORCHESTRATION
# ═══════════════════════════════════════════════════════════════════════════════

from runner import ConfigError, canonical_fixtures, load_run_config, run


def write_config(path: Path, experiments: list, seed: int = 3) -> Path:
    path.write_text(json.dumps({"version": "1", "seed": seed, "experiments": experiments}, indent=2))
    return path


WEYL = {
    "name": "weyl_saturation",
    "params": {"d": 2, "p": 4, "q": 4, "cutoffs": [8, 16, 32]},
    "expected_slope": "auto",
}


class TestRunConfig:
    """Test config loading and validation errors."""

    def test_acceptance_config_loads(self):
        config = load_run_config(CONFIGS_DIR / "acceptance.json")
        assert len(config.experiments) == 13
        assert config.experiments[0].expected_slope == 2.0
        assert config.experiments[4].comparison == "two_sided"
        assert config.experiments[9].comparison == "upper"

    def test_malformed_json_is_line_anchored(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{\n  "version": "1",\n  oops\n}\n')
        with pytest.raises(ConfigError, match=r"bad\.json:3:"):
            load_run_config(path)

    def test_unknown_experiment(self, tmp_path):
        path = write_config(tmp_path / "c.json", [{"name": "bogus", "params": {}}])
        with pytest.raises(ConfigError, match=r"experiments\[0\]\.bogus: name must be one of"):
            load_run_config(path)

    def test_unknown_parameter(self, tmp_path):
        entry = {"name": "packet", "params": {"d": 1, "p": 4, "q": 4, "cutoffs": [8], "colour": "red"}}
        path = write_config(tmp_path / "c.json", [entry])
        with pytest.raises(ConfigError, match=r"experiments\[0\]\.packet: unknown parameter\(s\): colour"):
            load_run_config(path)

    def test_slope_needs_three_cutoffs(self, tmp_path):
        entry = dict(WEYL, params={"d": 2, "p": 4, "q": 4, "cutoffs": [8, 16]})
        path = write_config(tmp_path / "c.json", [entry])
        with pytest.raises(ConfigError, match=">= 3 values"):
            load_run_config(path)

    def test_wrong_version(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"version": "2", "experiments": []}))
        with pytest.raises(ConfigError, match="version must be '1'"):
            load_run_config(path)

    def test_seed_override_changes_hash(self, tmp_path):
        path = write_config(tmp_path / "c.json", [WEYL])
        assert load_run_config(path, seed=1).config_hash != load_run_config(path, seed=2).config_hash
        assert load_run_config(path).config_hash == load_run_config(path, seed=3).config_hash

    def test_output_dir_relative_to_config(self, tmp_path):
        path = write_config(tmp_path / "c.json", [])
        assert load_run_config(path).output_dir == tmp_path / "results"


class TestRun:
    """Test end-to-end runs and their output files."""

    def test_empty_run(self, tmp_path):
        path = write_config(tmp_path / "c.json", [])
        outcome = run(path, output_dir=tmp_path / "out")
        assert outcome.passed
        text = (tmp_path / "out" / "results.csv").read_text()
        assert text == ",".join(RESULT_COLUMNS) + "\n", f"Expected header only, got {text!r}"

    def test_weyl_slope_in_summary(self, tmp_path):
        path = write_config(tmp_path / "c.json", [WEYL])
        outcome = run(path, output_dir=tmp_path / "out")
        summary = json.loads((tmp_path / "out" / "summary.json").read_text())
        slope = summary["experiments"][0]["fitted_slope"]
        assert abs(slope - 2) < 0.1, f"Expected fitted slope ~2, got {slope}"
        assert outcome.passed and summary["passed"]
        assert (tmp_path / "out" / "plotdata" / "weyl_saturation.csv").exists()
        assert (tmp_path / "out" / "timings.json").exists()

    def test_deterministic(self, tmp_path, monkeypatch):
        """Identical config and seed give byte-identical results.csv and summary.json."""
        monkeypatch.setenv("DISPERSIA_THREADS", "2")
        experiments = [
            {"name": "torus_strichartz", "params": {"d": 1, "q": 4, "cutoffs": [2, 4, 8], "profile": "random_phase"}},
            {"name": "discrete_restriction",
             "params": {"d": 1, "p": 4, "cutoffs": [2, 4, 8], "trials": 2, "samples": 128}},
            {"name": "universal_bound", "params": {"d": 1, "p": 4, "q": 4, "cutoffs": [2, 4, 8]}},
        ]
        path = write_config(tmp_path / "c.json", experiments, seed=17)
        run(path, output_dir=tmp_path / "a")
        run(path, output_dir=tmp_path / "b")
        for name in ("results.csv", "summary.json"):
            first = (tmp_path / "a" / name).read_bytes()
            second = (tmp_path / "b" / name).read_bytes()
            assert first == second, f"{name} differs between identical runs"

    def test_runtime_failure_recorded(self, tmp_path):
        """A runtime error fails that experiment without aborting the run."""
        entry = {"name": "torus_cluster", "params": {"d": 1, "j_values": [2.5], "c": 0.4}}
        path = write_config(tmp_path / "c.json", [entry, WEYL])
        outcome = run(path, output_dir=tmp_path / "out")
        assert not outcome.passed
        assert [o.passed for o in outcome.outcomes] == [False, True]
        assert "Empty shell cluster" in outcome.outcomes[0].error

    def test_fixtures(self):
        fixtures = canonical_fixtures()
        assert len(fixtures) == 7
        assert fixtures["shell_d2_N5"].l2_norm_sq() == 12.0
        assert len(fixtures["cluster_d2_j5"]) == 32


# ═══════════════════════════════════════════════════════════════════════════════
# COMMAND LINE
# ═══════════════════════════════════════════════════════════════════════════════

from cli import main


class TestCLI:
    """Test subcommands and exit codes."""

    @pytest.mark.parametrize("argv,expected", [
        (["lattice", "count", "--d", "2", "--N", "10", "--shape", "ball"], "317"),
        (["lattice", "count", "--d", "1", "--N", "2"], "5"),
        (["lattice", "count", "--d", "2", "--R", "25", "--reps"], "12"),
    ])
    def test_lattice_count(self, capsys, argv, expected):
        assert main(argv) == 0
        assert capsys.readouterr().out.strip() == expected

    def test_lattice_bad_dimension(self):
        assert main(["lattice", "count", "--d", "4", "--N", "2"]) == 2

    def test_reps_needs_r(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["lattice", "count", "--d", "2", "--reps"])
        assert excinfo.value.code == 2

    def test_run_malformed_writes_nothing(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{ not json")
        out = tmp_path / "out"
        assert main(["run", str(path), "--output-dir", str(out)]) == 2
        assert not out.exists(), "no output should be written for an invalid config"

    def test_run_empty(self, tmp_path):
        path = write_config(tmp_path / "c.json", [])
        assert main(["run", str(path), "--output-dir", str(tmp_path / "out")]) == 0

    def test_run_failure_exit_code(self, tmp_path, capsys):
        entry = dict(WEYL, expected_slope=3.0, tolerance=0.05)
        path = write_config(tmp_path / "c.json", [entry])
        assert main(["run", str(path), "--output-dir", str(tmp_path / "out")]) == 1
        assert "experiments[0].weyl_saturation" in capsys.readouterr().err

    def test_hartree_zero(self, tmp_path):
        out = tmp_path / "zero"
        assert main(["hartree", "run", str(CONFIGS_DIR / "hartree_zero.json"), "--output-dir", str(out)]) == 0
        assert (out / "trajectory.csv").exists()
        summary = json.loads((out / "conservation.json").read_text())
        assert summary["conservation"]["max_mass_drift"] <= 1e-10

    def test_hartree_constant_snapshots(self, tmp_path):
        out = tmp_path / "constant"
        assert main(["hartree", "run", str(CONFIGS_DIR / "hartree_constant.json"), "--output-dir", str(out)]) == 0
        summary = json.loads((out / "conservation.json").read_text())
        assert summary["final_density_spread"] < 1e-12, "constant data keeps a constant density"
        snapshots = sorted((out / "snapshots").glob("snapshot_*.json"))
        assert len(snapshots) == 11

    def test_hartree_divergence(self, tmp_path, capsys):
        """A NaN offset poisons the first potential substep."""
        path = tmp_path / "nan.json"
        path.write_text(
            '{"states": [{"d": 1, "entries": [[[0], 1.0, 0.0]]}],'
            ' "potential": {"kind": "zero", "offset": NaN},'
            ' "solver": {"dt": 0.1, "t_end": 0.2}}'
        )
        assert main(["hartree", "run", str(path), "--output-dir", str(tmp_path / "out")]) == 1
        assert "solver diverged at step 1" in capsys.readouterr().err

    def test_hartree_missing_solver(self, tmp_path):
        path = tmp_path / "h.json"
        path.write_text('{"states": [{"d": 1, "entries": [[[0], 1.0, 0.0]]}]}')
        assert main(["hartree", "run", str(path)]) == 2

    def test_fixtures_emit(self, tmp_path, capsys):
        assert main(["fixtures", "emit", "--out", str(tmp_path)]) == 0
        written = capsys.readouterr().out.splitlines()
        assert len(written) == 7
        constant = FourierState.from_json((tmp_path / "constant_d1.json").read_text())
        assert constant == FourierState.constant(1)
