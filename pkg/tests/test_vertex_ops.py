from fractions import Fraction

import pytest

from src.algebra_core import HalfInt, half_points
from src.contraction_cache import ContractionCache
from src.fock_space import U0, VACUUM, VElement, VWord, WElement, WWord
from src.series import make_window
from src.vertex_ops import (
    actual_coefficient,
    actual_yw,
    closed_form_iterate,
    closed_form_iterate_coefficient,
    closed_form_product,
    closed_form_product_coefficient,
    composed_iterate_table,
    composed_naive_iterate,
    composed_naive_product,
    composed_product_table,
    d_v,
    exp_delta,
    exp_delta_direct,
    iterate_series,
    naive_coefficient,
    naive_yw,
    product_series,
    total_contraction,
    y_v,
    y_v_coefficient,
)

E1 = VWord((("e1", 0),))
EB1 = VWord((("eb1", 0),))
E1_EB1 = VWord((("e1", 0), ("eb1", 1)))
ZERO_PAIR = WWord((), ("e1", "eb1"))


class TestTotalContraction:
    def test_single_pair(self):
        assert total_contraction(["e1", "eb1"], [0, 1]) == Fraction(1, 8)
        assert total_contraction(["e1", "e1"], [0, 1]) == 0

    def test_equal_modes_vanish(self):
        assert total_contraction(["e1", "eb1", "e2", "eb2"], [2, 2, 2, 2]) == 0

    def test_four_letters(self):
        assert total_contraction(["e1", "eb1", "e2", "eb2"], [0, 1, 0, 1]) == Fraction(1, 64)

    def test_index_subsequence(self):
        labels, ms = ["e1", "e2", "eb1"], [0, 3, 1]
        assert total_contraction(labels, ms, [1, 3]) == Fraction(1, 8)
        with pytest.raises(ValueError):
            total_contraction(labels, ms, [3, 1])

    def test_odd_length_rejected(self):
        with pytest.raises(ValueError):
            total_contraction(["e1", "eb1", "e2"], [0, 1, 2])

    def test_memo_is_path_independent(self):
        words = [
            (["e1", "eb1", "e2", "eb2"], [0, 1, 0, 2]),
            (["e1", "eb1", "eb1", "e1"], [0, 1, 2, 3]),
            (["e1", "eb1"], [2, 0]),
            (["eb1", "e1", "e2", "eb2", "e1", "eb1"], [1, 0, 2, 0, 1, 3]),
        ]
        cache = ContractionCache()
        cache.clear()
        forward = [total_contraction(labels, ms) for labels, ms in words]
        cache.clear()
        backward = [total_contraction(labels, ms) for labels, ms in reversed(words)]
        assert forward == list(reversed(backward))
        assert cache.get_statistics()["entries"] > 0


class TestExpDelta:
    def test_two_letters(self):
        assert exp_delta(E1_EB1) == {
            0: VElement.from_word(E1_EB1),
            -2: VElement.from_word(VACUUM, Fraction(-1, 8)),
        }

    def test_vacuum(self):
        assert exp_delta(VACUUM) == {0: VElement.from_word(VACUUM)}

    @pytest.mark.parametrize(
        "word",
        [
            E1_EB1,
            VWord((("eb1", 1), ("e1", 0))),
            VWord((("e1", 0), ("eb1", 1), ("e2", 2), ("eb2", 0))),
            VWord((("e1", 2), ("eb1", 0), ("eb1", 1), ("e1", 1))),
        ],
    )
    def test_matches_direct_exponential(self, word):
        assert exp_delta(word) == exp_delta_direct(word)


class TestOperators:
    def test_single_generator(self):
        assert naive_coefficient(E1, "-1/2", U0) == WElement.from_word(WWord((), ("e1",)))
        assert actual_coefficient(E1, "1/2", U0) == WElement.from_word(WWord((("e1", 1),)))
        assert actual_coefficient(E1, 0, U0) == WElement()

    def test_vacuum_is_identity(self):
        w = WWord((("eb1", 1),), ("e2",))
        assert actual_coefficient(VACUUM, 0, w) == WElement.from_word(w)
        assert actual_coefficient(VACUUM, 1, w) == WElement()

    def test_exp_delta_correction(self):
        assert naive_coefficient(E1_EB1, -2, U0) == WElement({ZERO_PAIR: Fraction(-1, 2), U0: Fraction(1, 4)})
        assert actual_coefficient(E1_EB1, -2, U0) == WElement({ZERO_PAIR: Fraction(-1, 2), U0: Fraction(1, 8)})

    def test_series_window(self):
        window = make_window(-3, 3)
        series = naive_yw(E1, U0, window)
        assert series.coefficient_at("5/2") == WElement.from_word(WWord((("e1", 3),)))
        assert series.coefficient_at(-3) == WElement()
        assert actual_yw(E1, U0, window) == series


class TestAlgebraOperator:
    def test_contraction(self):
        assert y_v_coefficient(E1, -1, EB1) == VElement.from_word(VACUUM)
        assert y_v_coefficient(E1, 0, EB1) == VElement.from_word(VWord((("e1", 0), ("eb1", 0))))
        assert y_v_coefficient(E1, 1, EB1) == VElement.from_word(VWord((("e1", 1), ("eb1", 0))))

    def test_vacuum_acts_trivially(self):
        series = y_v(VACUUM, E1_EB1, make_window(-4, 4))
        assert series.coeffs == {(HalfInt(0),): VElement.from_word(E1_EB1)}

    def test_d_v(self):
        assert d_v(E1_EB1) == VElement(
            {VWord((("e1", 1), ("eb1", 1))): Fraction(1), VWord((("e1", 0), ("eb1", 2))): Fraction(2)}
        )
        assert d_v(VACUUM) == VElement()

    def test_d_v_is_first_taylor_coefficient(self):
        for word in (E1, E1_EB1, VWord((("e2", 2), ("eb1", 0), ("e1", 1)))):
            assert y_v_coefficient(word, 1, VACUUM) == d_v(word)


class TestProducts:
    @pytest.mark.parametrize("i", [1, 2])
    def test_dual_pair_on_vacuum(self, i):
        window = make_window(-3, 3)
        series = product_series(E1, EB1, U0, U0, (window, window))
        assert series.coefficient_at(HalfInt(-2 * i - 1), HalfInt(2 * i - 1)) == 1
        assert series.coefficient_at("-1/2", "-1/2") == 0

    @pytest.mark.parametrize(
        "a,b,w",
        [
            (E1, EB1, U0),
            (E1, VWord((("eb1", 1),)), WWord((("e1", 1),))),
            (VWord((("e1", 0), ("e2", 0))), EB1, U0),
        ],
    )
    def test_wick_closed_form(self, a, b, w):
        for ex in half_points(HalfInt(-4), HalfInt(4)):
            for ey in half_points(HalfInt(-4), HalfInt(4)):
                assert closed_form_product_coefficient(a, b, w, ex, ey) == composed_naive_product(a, b, w, ex, ey)

    @pytest.mark.parametrize("a,b,w", [(E1, EB1, U0), (E1, VWord((("eb1", 1),)), WWord((("e1", 1),)))])
    def test_taylor_closed_form(self, a, b, w):
        for ex in half_points(HalfInt(-4), HalfInt(4), integral=True):
            for ey in half_points(HalfInt(-4), HalfInt(4)):
                assert closed_form_iterate_coefficient(a, b, w, ex, ey) == composed_naive_iterate(a, b, w, ex, ey)

    def test_iterate_with_vacuum_first(self):
        window = make_window(-1, 1)
        series = iterate_series(VACUUM, E1, U0, WWord((), ("e1",)), (window, window))
        assert series.coefficient_at(0, "-1/2") == 1
        assert series.coefficient_at(1, "-1/2") == 0


class TestClosedFormTables:
    WINDOW = (make_window(-3, 3), make_window(-3, 3))

    def test_product_table_matches_composition(self):
        closed = closed_form_product(E1, EB1, U0, self.WINDOW)
        assert closed == composed_product_table(E1, EB1, U0, self.WINDOW)
        assert closed.coefficient_at("-3/2", "1/2") == closed_form_product_coefficient(E1, EB1, U0, "-3/2", "1/2")

    def test_iterate_table_has_integer_x0_powers(self):
        closed = closed_form_iterate(E1, EB1, U0, self.WINDOW)
        assert closed == composed_iterate_table(E1, EB1, U0, self.WINDOW)
        assert closed.coeffs
        assert all(ex.is_integral for ex, _ in closed.coeffs)
        assert closed.coefficient_at("1/2", "-1/2") == WElement()

    def test_below_weight_floor_is_certified_zero(self):
        closed = closed_form_product(E1, EB1, U0, self.WINDOW)
        assert closed.coefficient_at(-3, -3) == WElement()
