import numpy as np
import pytest
import sympy as sp

from src.analysis import (
    BranchPoint,
    RegionError,
    Z1,
    Z2,
    branch_log,
    branch_pow,
    branch_pow_half,
    closed_form_value,
    correlator_values,
    eval_iterate_numeric,
    eval_product_numeric,
    in_iterate_region,
    in_product_region,
    n_point_product_numeric,
    principal_arg,
    reconstruct_correlator,
    sample_iterate_points,
    sample_product_points,
)
from src.fock_space import U0, VWord

E1 = VWord((("e1", 0),))
EB1 = VWord((("eb1", 0),))
EXPECTED = 1 / np.sqrt(2)


class TestBranches:
    def test_principal_arg_range(self):
        assert principal_arg(1) == 0.0
        assert principal_arg(-1) == pytest.approx(np.pi)
        assert principal_arg(-1j) == pytest.approx(1.5 * np.pi)

    def test_log_branches_differ_by_2pi(self):
        assert branch_log(BranchPoint(1j, 1)) - branch_log(BranchPoint(1j, 0)) == pytest.approx(2j * np.pi)

    def test_half_power_sign(self):
        assert branch_pow_half(BranchPoint(4, 0)) == pytest.approx(2)
        assert branch_pow_half(BranchPoint(4, 1)) == pytest.approx(-2)
        assert branch_pow_half(BranchPoint(-1, 0)) == pytest.approx(1j)

    def test_integral_powers_ignore_branch(self):
        assert branch_pow(BranchPoint(2 + 1j, 3), 2) == pytest.approx((2 + 1j) ** 2)

    def test_zero_rejected(self):
        with pytest.raises(RegionError):
            BranchPoint(0)


class TestRegions:
    def test_product_region(self):
        assert in_product_region(2, 1)
        assert not in_product_region(1, 2)

    def test_iterate_region(self):
        assert in_iterate_region(1.2, 1)
        assert not in_iterate_region(np.exp(-0.1j), np.exp(0.1j))
        assert not in_iterate_region(3, 1)


class TestReconstruction:
    def test_dual_pair(self):
        correlator = reconstruct_correlator(E1, EB1, U0, U0)
        assert correlator.g.as_expr() == 1
        assert (correlator.q1, correlator.q2, correlator.q12) == (1, 0, 1)

    def test_sympy_form(self):
        correlator = reconstruct_correlator(E1, EB1, U0, U0)
        assert sp.Poly(1, Z1, Z2) == correlator.g

    @pytest.mark.parametrize("p", [0, 1])
    def test_value(self, p):
        assert closed_form_value(E1, EB1, U0, U0, 2, 1, p) == pytest.approx(EXPECTED)

    def test_pole_rejected(self):
        with pytest.raises(RegionError):
            closed_form_value(E1, EB1, U0, U0, 1, 1)


class TestNumeric:
    def test_product_sum(self):
        result = eval_product_numeric(E1, EB1, U0, U0, 2, 1)
        assert result.in_region
        assert result.value == pytest.approx(EXPECTED, abs=1e-9)
        assert result.converged

    def test_iterate_sum(self):
        result = eval_iterate_numeric(E1, EB1, U0, U0, 1.25, 1)
        assert result.in_region
        assert not result.branch_mismatch
        assert result.value == pytest.approx(closed_form_value(E1, EB1, U0, U0, 1.25, 1), abs=1e-8)

    def test_strict_region(self):
        with pytest.raises(RegionError):
            eval_product_numeric(E1, EB1, U0, U0, 1, 2, strict=True)

    def test_one_point(self):
        result = n_point_product_numeric([VWord()], U0, U0, [2.0])
        assert result.value == pytest.approx(1)

    def test_three_points_need_ordering(self):
        with pytest.raises(RegionError):
            n_point_product_numeric([E1, EB1, E1], U0, U0, [1, 2, 0.5])


class TestCorrelatorValues:
    def test_product_and_iterate_agree(self):
        record = correlator_values(E1, EB1, U0, U0, 1.25, 1)
        assert record["region_flags"] == {"product": True, "iterate": True}
        assert record["abs_errors"]["product_iterate"] < 1e-7
        assert record["closed_form_value"][0] == pytest.approx(np.sqrt(1.25) / 1.25 / 0.25)

    def test_branch_mismatch(self):
        # z1 sits just below the positive real axis, so its principal root jumps sign
        record = correlator_values(E1, EB1, U0, U0, 0.99 * np.exp(-0.1j), np.exp(0.1j))
        assert record["branch_mismatch"]
        assert not record["region_flags"]["iterate"]

    def test_pole(self):
        with pytest.raises(RegionError):
            correlator_values(E1, EB1, U0, U0, 1, 1)

    def test_strict_outside_both_regions(self):
        with pytest.raises(RegionError):
            correlator_values(E1, EB1, U0, U0, -1, 2, strict=True)


class TestSampling:
    def test_product_points(self):
        for z1, z2 in sample_product_points(np.random.default_rng(7), 20):
            assert in_product_region(z1, z2)
            assert abs(z2) <= 0.5 * abs(z1)

    def test_iterate_points(self):
        for z1, z2 in sample_iterate_points(np.random.default_rng(7), 20):
            assert abs(z2) > abs(z1 - z2)
            assert abs(principal_arg(z1) - principal_arg(z2)) < np.pi / 4
            assert in_iterate_region(z1, z2)


class TestBranchSweep:
    SEED = 20240607

    @pytest.mark.parametrize("p", [0, 1])
    def test_product_sums_match_closed_form(self, p):
        correlator = reconstruct_correlator(E1, EB1, U0, U0)
        for z1, z2 in sample_product_points(np.random.default_rng(self.SEED), 20):
            result = eval_product_numeric(E1, EB1, U0, U0, z1, z2, p, cutoff=80)
            assert abs(result.value - correlator.value(z1, z2, p)) < 1e-8

    @pytest.mark.parametrize("p", [0, 1])
    def test_iterate_sums_match_closed_form(self, p):
        correlator = reconstruct_correlator(E1, EB1, U0, U0)
        for z1, z2 in sample_iterate_points(np.random.default_rng(self.SEED), 20):
            result = eval_iterate_numeric(E1, EB1, U0, U0, z1, z2, p, cutoff=80)
            assert not result.branch_mismatch
            assert abs(result.value - correlator.value(z1, z2, p)) < 1e-8

    def test_product_and_iterate_agree_on_overlap(self):
        overlap = [
            (z1, z2)
            for z1, z2 in sample_iterate_points(np.random.default_rng(self.SEED), 100)
            if abs(z2) < 0.8 * abs(z1)
        ]
        assert overlap
        for z1, z2 in overlap:
            record = correlator_values(E1, EB1, U0, U0, z1, z2)
            assert record["abs_errors"]["product_iterate"] < 1e-7
            assert not record["branch_mismatch"]

    def test_half_power_flips_between_branches(self):
        rng = np.random.default_rng(self.SEED)
        zs = rng.uniform(0.1, 3.0, 100) * np.exp(1j * rng.uniform(0.0, 2 * np.pi, 100))
        for z in zs:
            for p in (0, 1):
                assert branch_pow_half(BranchPoint(complex(z), p + 1)) == pytest.approx(-branch_pow_half(BranchPoint(complex(z), p)))

    def test_three_point_sums_stabilize(self):
        sums = [n_point_product_numeric([E1, EB1, VWord()], U0, U0, [2, 1, 0.5], cutoff=n).value for n in (20, 40, 60)]
        assert abs(sums[2] - sums[1]) < abs(sums[1] - sums[0])
        assert abs(sums[0] - EXPECTED) < 1e-5
        assert abs(sums[2] - EXPECTED) < 1e-9


class TestReconstructionReport:
    def test_record_marks_heuristic_acceptance(self):
        record = correlator_values(E1, EB1, U0, U0, 2, 1)
        assert record["reconstruction"]["acceptance"] == "heuristic"
        assert record["reconstruction"]["terms"] >= record["reconstruction"]["vanishing_tail"]
