from fractions import Fraction

import pytest

from src import identity_checks
from src.algebra_core import HalfInt
from src.config.schemas import CaseStatus
from src.fock_space import U0, VACUUM, VWord, WWord
from src.identity_checks import (
    axiom_suite,
    closed_iterate_mismatch,
    closed_product_mismatch,
    d_comm_bracket,
    d_comm_failure_repro,
    default_pole_order,
    exp_delta_commutator_check,
    mismatch,
    series_mismatch,
    weak_assoc_check,
    wick_check,
)
from src.series import HalfSeries1, Span, make_window, taylor_shift
from src.suites import expected_d_comm_terms

E1 = VWord((("e1", 0),))
EB1 = VWord((("eb1", 0),))
SMALL = make_window(-3, 3)


def clifford_fold(terms, a1="e1", a2="eb1"):
    """Merge :a2(0)a1(0): into :a1(0)a2(0): as a Clifford relation on zero modes would."""
    folded = {word: Fraction(coeff) for word, coeff in terms.items()}
    swapped = folded.pop(f"{a2}(0){a1}(0)", Fraction(0))
    key = f"{a1}(0){a2}(0)"
    folded[key] = folded.get(key, Fraction(0)) - swapped
    return {word: coeff for word, coeff in folded.items() if coeff}


class TestMismatch:
    def test_doubles_exponents(self):
        found = mismatch([1, "1/2"], Fraction(1), Fraction(2))
        assert found.exps == [2, 1]
        assert found.lhs == "1"
        assert found.rhs == "2"


class TestWick:
    def test_dual_pair(self):
        assert wick_check(E1, EB1, U0, SMALL)

    def test_with_derivative_and_excited_module_vector(self):
        assert wick_check(E1, VWord((("eb1", 1),)), WWord((("e1", 1),)), SMALL)

    @pytest.mark.parametrize(
        "a,b,w",
        [
            (E1, EB1, U0),
            (VWord((("e1", 1),)), EB1, WWord((), ("e1",))),
            (VWord((("e1", 0), ("eb1", 0))), EB1, U0),
        ],
    )
    def test_closed_forms(self, a, b, w):
        assert closed_product_mismatch(a, b, w, SMALL) is None
        assert closed_iterate_mismatch(a, b, w, SMALL) is None

    def test_series_mismatch_reports_lowest_difference(self):
        span = Span(HalfInt(-4), HalfInt(4))
        left = HalfSeries1(span, {HalfInt(-1): Fraction(1), HalfInt(2): Fraction(3)})
        right = HalfSeries1(span, {HalfInt(2): Fraction(5)})
        found = series_mismatch(left, right)
        assert found.exps == [-1]
        assert (found.lhs, found.rhs) == ("1", "0")
        assert series_mismatch(left, left) is None


class TestWeakAssociativity:
    def test_pole_order(self):
        assert default_pole_order(E1, U0) == 1
        assert default_pole_order(VWord((("e1", 1), ("eb1", 0))), WWord((("eb1", 1),))) == 4

    def test_vacuum(self):
        report = weak_assoc_check(VACUUM, E1, U0, make_window(-4, 4))
        assert report.status == CaseStatus.PASS
        assert report.compared > 0

    def test_dual_pair(self):
        report = weak_assoc_check(E1, EB1, U0, SMALL)
        assert report.status == CaseStatus.PASS
        assert report.first_mismatch is None
        assert report.P == 1

    def test_larger_pole_order(self):
        assert weak_assoc_check(E1, EB1, WWord((("e1", 1),)), SMALL, P=3).status == CaseStatus.PASS

    def test_pole_order_below_bound_rejected(self):
        with pytest.raises(ValueError):
            weak_assoc_check(E1, EB1, U0, SMALL, P=0)

    def test_product_side_goes_through_taylor_shift(self, monkeypatch):
        orders = []

        def recording_shift(series, x_hi):
            orders.append(x_hi)
            return taylor_shift(series, x_hi)

        monkeypatch.setattr(identity_checks, "taylor_shift", recording_shift)
        assert weak_assoc_check(E1, EB1, U0, SMALL).status == CaseStatus.PASS
        assert orders and min(orders) >= 0


class TestExpDeltaCommutator:
    @pytest.mark.parametrize(
        "label,m,u",
        [
            ("e1", 0, VACUUM),
            ("e1", 0, EB1),
            ("e1", 1, VWord((("eb1", 1),))),
            ("eb1", 0, VWord((("e1", 0), ("eb1", 1)))),
            ("e1", 2, EB1),
            ("eb1", 2, VWord((("e1", 1),))),
            ("e2", 2, VWord((("e1", 0), ("eb2", 0)))),
        ],
    )
    def test_identity_holds(self, label, m, u):
        assert exp_delta_commutator_check(label, m, u, make_window(-4, 4)) is None


class TestAxioms:
    def test_small_sets(self):
        report = axiom_suite([VACUUM, E1, VWord((("e1", 0), ("eb1", 1)))], [U0, WWord((("eb1", 1),))], SMALL)
        assert report.passed
        assert report.failures == []


class TestDerivationBracket:
    def test_terms(self):
        report = d_comm_failure_repro()
        assert report.terms == expected_d_comm_terms()
        assert report.scalar == "0"
        assert report.obstruction == "1/2"
        assert report.obstructed

    def test_unsigned_reordering_flips_two_terms(self):
        report = d_comm_failure_repro()
        assert report.unsigned_terms == {
            "eb1(-1)e1(1)": "1/2",
            "e1(-1)eb1(1)": "1/2",
            "eb1(0)e1(0)": "-1/2",
            "e1(0)eb1(0)": "-1/2",
        }
        flipped = {word for word in report.terms if report.terms[word] != report.unsigned_terms[word]}
        assert flipped == {"eb1(-1)e1(1)", "eb1(0)e1(0)"}
        assert report.unsigned_terms["eb1(0)e1(0)"] != "0"

    def test_other_index(self):
        report = d_comm_failure_repro("e2", "eb2")
        assert report.terms == expected_d_comm_terms("e2", "eb2")

    def test_unpaired_labels_rejected(self):
        with pytest.raises(ValueError):
            d_comm_failure_repro("e1", "eb2")

    def test_clifford_zero_modes_would_merge_the_obstruction(self):
        folded = clifford_fold(d_comm_bracket().to_strings())
        assert folded["e1(0)eb1(0)"] == -1
        assert "eb1(0)e1(0)" not in folded
