"""Tests for the sample-size calculators."""

import pytest

from trialeff import (
    DomainError,
    SampleSizeSpec,
    cramer_rao_sample_size,
    generic_two_sample,
    sample_size_table,
    wald_sample_size,
)


class TestGenericTwoSample:
    def test_unit_variance_unit_difference(self):
        # 2 * (1.96 + 0.84)^2 = 15.68 rounds up to 16 per group.
        assert generic_two_sample(sigma=1.0, delta=1.0) == 16

    def test_doubling_sigma_quadruples_before_rounding(self):
        base = generic_two_sample(sigma=1.0, delta=0.01)
        assert generic_two_sample(sigma=2.0, delta=0.01) == pytest.approx(4 * base, rel=1e-4)

    def test_huge_difference_floors_at_one(self):
        assert generic_two_sample(sigma=0.1, delta=50.0) == 1

    def test_zero_difference_rejected(self):
        with pytest.raises(DomainError):
            generic_two_sample(sigma=1.0, delta=0.0)

    def test_nonpositive_sigma_rejected(self):
        with pytest.raises(DomainError):
            generic_two_sample(sigma=0.0, delta=1.0)


class TestWaldSampleSize:
    def test_frozen_reference_point(self):
        # Direct evaluation with z = 1.96 + 0.84: the bracket is
        # 1.96/0.02 - 2 = 96 and d = asinh(0.125), giving 96838 total.
        spec = SampleSizeSpec(ve=0.6, delta=0.1, pi=0.05)
        n = wald_sample_size(spec)
        assert n == 96838
        assert n < 165_957  # materially below the information-bound size

    def test_strictly_decreasing_in_prevalence(self):
        sizes = [
            wald_sample_size(SampleSizeSpec(ve=0.5, delta=0.1, pi=pi))
            for pi in (0.01, 0.05, 0.2, 0.5)
        ]
        assert all(a > b for a, b in zip(sizes, sizes[1:]))

    def test_proportional_to_squared_z_sum(self):
        spec = SampleSizeSpec(ve=0.3, delta=0.2, pi=0.05)
        # alpha=0.05/beta=0.2 gives z-sum 2.8; alpha~0.000063/beta=0.5
        # gives z-sum 4.0 with rounded quantiles, so sizes scale by
        # (4.0/2.8)^2.
        base = wald_sample_size(spec)
        inflated = wald_sample_size(
            SampleSizeSpec(ve=0.3, delta=0.2, pi=0.05, alpha=0.0000633425, beta=0.5)
        )
        assert inflated == pytest.approx(base * (4.0 / 2.8) ** 2, rel=1e-4)

    def test_full_efficacy_rejected(self):
        with pytest.raises(DomainError):
            SampleSizeSpec(ve=1.0, delta=0.1, pi=0.05)


class TestCramerRaoSampleSize:
    @pytest.mark.parametrize(
        "ve,delta,pi,expected",
        [
            (0.0, 0.1, 0.5, 37_632),
            (0.9, 0.4, 0.5, 285),
            (0.6, 0.2, 0.01, 213_593),
        ],
    )
    def test_published_grid_cells(self, ve, delta, pi, expected):
        assert cramer_rao_sample_size(SampleSizeSpec(ve=ve, delta=delta, pi=pi)) == expected

    def test_exact_quantiles_shift_the_answer(self):
        spec = SampleSizeSpec(ve=0.0, delta=0.1, pi=0.5)
        assert cramer_rao_sample_size(spec, rounded_z=False) == 37_675

    def test_inverse_square_scaling_in_delta(self):
        n_fine = cramer_rao_sample_size(SampleSizeSpec(ve=0.3, delta=0.05, pi=0.1))
        n_coarse = cramer_rao_sample_size(SampleSizeSpec(ve=0.3, delta=0.2, pi=0.1))
        assert n_fine == pytest.approx(16 * n_coarse, rel=1e-4)

    def test_near_inverse_scaling_in_prevalence_when_rare(self):
        n1 = cramer_rao_sample_size(SampleSizeSpec(ve=0.3, delta=0.1, pi=0.001))
        n2 = cramer_rao_sample_size(SampleSizeSpec(ve=0.3, delta=0.1, pi=0.0005))
        assert n2 / n1 == pytest.approx(2.0, rel=0.01)

    def test_agrees_with_wald_size_at_high_incidence_low_efficacy(self):
        for ve in (0.0, 0.15, 0.3):
            spec = SampleSizeSpec(ve=ve, delta=0.1, pi=0.5)
            cr = cramer_rao_sample_size(spec)
            wald = wald_sample_size(spec)
            assert abs(cr - wald) / wald < 0.15

    def test_exceeds_wald_size_when_rare_and_effective(self):
        for ve in (0.6, 0.75, 0.9):
            for pi in (0.01, 0.005, 0.001):
                spec = SampleSizeSpec(ve=ve, delta=0.1, pi=pi)
                assert cramer_rao_sample_size(spec) >= wald_sample_size(spec)


class TestSampleSizeTable:
    def test_single_cell_matches_direct_call(self):
        rows = sample_size_table([0.6], [0.2], [0.01])
        assert len(rows) == 1
        assert rows[0].n == cramer_rao_sample_size(SampleSizeSpec(ve=0.6, delta=0.2, pi=0.01))

    def test_default_grid_shape(self):
        rows = sample_size_table()
        assert len(rows) == 112
        assert all(row.n is not None for row in rows)

    def test_bad_cells_recorded_not_raised(self):
        rows = sample_size_table([0.5], [0.1], [0.05, 1.5])
        assert rows[0].n is not None
        assert rows[1].n is None
        assert rows[1].error is not None

    def test_unknown_method_rejected(self):
        with pytest.raises(DomainError):
            sample_size_table(method="bootstrap")

    def test_wald_method_column(self):
        rows = sample_size_table([0.6], [0.1], [0.05], method="wald")
        assert rows[0].n == 96838
