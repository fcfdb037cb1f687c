"""Unit tests for observables: tables, correlations, CHSH, closed forms."""

import math

import numpy as np
import pytest

from fockflow.algebra import ModeBasis, Statistics, ZeroNorm, apply_creation, scale, vacuum
from fockflow.analysis import (
    ChshSettings,
    CoincidenceTable,
    DEFAULT_SIGNS,
    DetectorDistribution,
    MeasurementPartition,
    OverlappingPartitions,
    ZeroCoincidenceMass,
    all_two_particle_outcomes,
    chsh_grid_search,
    chsh_value,
    closed_form_table,
    coincidence_table,
    completeness,
    correlation,
    factorization_residual,
    sweep,
)
from fockflow.experiments import PhaseSettings

BASIS = ModeBasis(internals=("down", "up"), externals=("L", "D", "R", "U"))


def table_from_E(e):
    # a 2x2 table whose normalized correlation is exactly e
    p_same = (1 + e) / 8
    p_diff = (1 - e) / 8
    return CoincidenceTable(
        ("D", "L"), ("R", "U"), np.array([[p_same, p_diff], [p_diff, p_same]])
    )


class TestCorrelation:
    def test_reads_back_programmed_value(self):
        for e in (-1.0, -0.25, 0.0, 0.7, 1.0):
            assert correlation(table_from_E(e)) == pytest.approx(e)

    def test_sign_relabeling_symmetry(self):
        # flipping every sign and swapping both parties' bin order leaves E alone
        t = table_from_E(0.6)
        flipped = CoincidenceTable(("L", "D"), ("U", "R"), t.probs[::-1, ::-1])
        assert correlation(t) == pytest.approx(correlation(flipped))

    def test_missing_sign_label(self):
        t = CoincidenceTable(("x", "y"), ("R", "U"), np.full((2, 2), 0.0625))
        with pytest.raises(ValueError, match="sign map"):
            correlation(t)

    def test_zero_mass(self):
        t = CoincidenceTable(("D", "L"), ("R", "U"), np.zeros((2, 2)))
        with pytest.raises(ZeroCoincidenceMass):
            correlation(t)


class TestChsh:
    @staticmethod
    def cosine_runner(a, b):
        return table_from_E(math.cos(a - b))

    def test_equal_settings_give_twice_E(self):
        s = ChshSettings(0.3, 0.3, 1.0, 1.0)
        expected = 2 * abs(math.cos(0.3 - 1.0))
        assert chsh_value(self.cosine_runner, s) == pytest.approx(expected)

    def test_tsirelson_quadruple_for_cosine_correlation(self):
        # for E = cos(a - b) the optimum sits at (0, pi/2, pi/4, -pi/4)
        s = ChshSettings(0.0, math.pi / 2, math.pi / 4, -math.pi / 4)
        assert chsh_value(self.cosine_runner, s) == pytest.approx(2 * math.sqrt(2))

    def test_grid_search_finds_the_optimum(self):
        grid = [k * math.pi / 8 for k in range(16)]
        best, settings = chsh_grid_search(self.cosine_runner, grid)
        assert best == pytest.approx(2 * math.sqrt(2))
        assert chsh_value(self.cosine_runner, settings) == pytest.approx(best)

    def test_empty_grid(self):
        with pytest.raises(ValueError):
            chsh_grid_search(self.cosine_runner, [])


class TestClosedForm:
    def test_fermion_path_path_aligned(self):
        t = closed_form_table("path-path", Statistics.FERMION, PhaseSettings())
        assert np.allclose(t.probs, [[0.25, 0.0], [0.0, 0.25]])

    def test_boson_spin_spin_aligned(self):
        # boson analyzer angle is shifted a quarter turn from the fermion one;
        # phi_r = pi cancels the shift, leaving the chequer at its node
        t = closed_form_table("spin-spin", Statistics.BOSON, PhaseSettings(phi_r=math.pi))
        assert np.allclose(t.probs, [[0.0, 0.25], [0.25, 0.0]])

    def test_statistics_swap_is_quarter_turn(self):
        s = PhaseSettings(phi_d=0.7, phi_u=1.3)
        f = closed_form_table("path-path", Statistics.FERMION, s)
        shifted = PhaseSettings(phi_d=0.7, phi_u=1.3, phi_r=math.pi)
        b = closed_form_table("path-path", Statistics.BOSON, shifted)
        assert np.allclose(f.probs, b.probs)

    def test_row_sums_quarter(self):
        s = PhaseSettings(0.2, 1.1, 2.3, 0.9)
        for kind in ("path-path", "spin-spin", "spin-path", "path-spin"):
            for stats in (Statistics.FERMION, Statistics.BOSON):
                t = closed_form_table(kind, stats, s)
                assert np.allclose(t.probs.sum(axis=1), 0.25)
                assert np.allclose(t.probs.sum(axis=0), 0.25)

    def test_no_closed_form_for_distinguishable(self):
        with pytest.raises(ValueError):
            closed_form_table("path-path", Statistics.DISTINGUISHABLE, PhaseSettings())

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            closed_form_table("spin-charge", Statistics.FERMION, PhaseSettings())

    def test_label_override(self):
        t = closed_form_table(
            "spin-path", Statistics.BOSON, PhaseSettings(), row_labels=("H", "V")
        )
        assert t.row_labels == ("H", "V")


class TestCoincidenceTable:
    def partitions(self):
        part_a = MeasurementPartition(
            "A",
            "external",
            (
                ("D", frozenset({BASIS.mode("down", "D"), BASIS.mode("up", "D")})),
                ("L", frozenset({BASIS.mode("down", "L"), BASIS.mode("up", "L")})),
            ),
        )
        part_b = MeasurementPartition(
            "B",
            "external",
            (
                ("R", frozenset({BASIS.mode("down", "R"), BASIS.mode("up", "R")})),
                ("U", frozenset({BASIS.mode("down", "U"), BASIS.mode("up", "U")})),
            ),
        )
        return part_a, part_b

    def test_same_side_events_are_excluded(self):
        st = vacuum(Statistics.FERMION)
        st = apply_creation(st, BASIS.mode("down", "D"))
        st = apply_creation(st, BASIS.mode("up", "L"))  # both on Alice's side
        part_a, part_b = self.partitions()
        t = coincidence_table(st, part_a, part_b)
        assert t.total() == 0.0

    def test_coincidence_cell_placement(self):
        st = vacuum(Statistics.FERMION)
        st = apply_creation(st, BASIS.mode("down", "D"))
        st = apply_creation(st, BASIS.mode("up", "U"))
        part_a, part_b = self.partitions()
        t = coincidence_table(st, part_a, part_b)
        assert t.cell("D", "U") == pytest.approx(1.0)
        assert t.total() == pytest.approx(1.0)

    def test_overlapping_parties_rejected(self):
        part_a, _ = self.partitions()
        with pytest.raises(OverlappingPartitions):
            coincidence_table(vacuum(Statistics.FERMION), part_a, part_a)

    def test_overlapping_bins_rejected(self):
        m = BASIS.mode("down", "D")
        with pytest.raises(OverlappingPartitions):
            MeasurementPartition("A", "external", (("a", frozenset({m})), ("b", frozenset({m}))))

    def test_zero_norm_state(self):
        part_a, part_b = self.partitions()
        with pytest.raises(ZeroNorm):
            coincidence_table(scale(vacuum(Statistics.FERMION), 0.0), part_a, part_b)


class TestFactorization:
    def test_product_table_has_zero_residual(self):
        t = np.outer([0.3, 0.7], [0.4, 0.6])
        assert factorization_residual(t) == pytest.approx(0.0)

    def test_anticorrelated_table(self):
        assert factorization_residual(np.array([[0.0, 0.5], [0.5, 0.0]])) == pytest.approx(0.25)

    def test_empty_table_rejected(self):
        with pytest.raises(ValueError):
            factorization_residual(np.zeros((2, 2)))


class TestDetectorDistribution:
    def test_mass(self):
        d = DetectorDistribution({1: 0.25, 2: 0.25, 3: 0.5})
        assert d.mass([1, 3]) == pytest.approx(0.75)
        assert d.mass([7]) == 0.0

    def test_must_sum_to_one(self):
        with pytest.raises(ValueError):
            DetectorDistribution({1: 0.5})

    def test_no_negative_probabilities(self):
        with pytest.raises(ValueError):
            DetectorDistribution({1: 1.5, 2: -0.5})


class TestSweepAndEnumeration:
    def test_single_point_sweep_matches_direct_call(self):
        calls = []

        def table_fn(settings):
            calls.append(settings)
            return table_from_E(0.25)

        records = sweep(table_fn, [PhaseSettings(phi_d=1.0)])
        assert len(records) == 1 and calls == [PhaseSettings(phi_d=1.0)]
        assert records[0].correlation == pytest.approx(0.25)

    def test_outcome_enumeration_counts(self):
        assert len(all_two_particle_outcomes(BASIS, Statistics.FERMION)) == 28
        assert len(all_two_particle_outcomes(BASIS, Statistics.BOSON)) == 36
        two_species = ModeBasis(
            internals=("down", "up"), externals=("L", "D", "R", "U"), species=(1, 2)
        )
        assert len(all_two_particle_outcomes(two_species, Statistics.DISTINGUISHABLE)) == 36

    def test_completeness_of_a_simple_state(self):
        st = vacuum(Statistics.FERMION)
        st = apply_creation(st, BASIS.mode("down", "L"))
        st = apply_creation(st, BASIS.mode("down", "R"))
        assert completeness(st, BASIS) == pytest.approx(1.0)
