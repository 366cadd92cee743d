from fractions import Fraction

import pytest

from src.algebra_core import HalfInt, binom
from src.series import (
    Expansion,
    HalfSeries1,
    KernelKind,
    KernelSpec,
    Span,
    WindowUnderflowError,
    binom_expand,
    c_mn_g_identity_check,
    expand_kernel,
    kernel_coefficient,
    kernel_derivative_check,
    make_window,
    power_derivative,
    restrict,
    series_add,
    series_mul,
    taylor_shift,
)

W4 = make_window(-4, 4)
SQUARE = (W4, W4)


def h(x) -> HalfInt:
    return HalfInt.of(x)


def poly(coeffs, span=Span()) -> HalfSeries1:
    return HalfSeries1(span, {h(e): Fraction(c) for e, c in coeffs.items()})


class TestWindowedSeries:
    def test_unknown_coefficient_underflows(self):
        s = poly({0: 1}, Span(h(-2), h(2)))
        assert s.coefficient_at(1) == 0
        with pytest.raises(WindowUnderflowError):
            s.coefficient_at(3)

    def test_make_window_rejects_empty(self):
        with pytest.raises(ValueError):
            make_window(2, 1)

    def test_half_powers_multiply(self):
        s = poly({"-1/2": 1})
        assert series_mul(s, s).coefficient_at(-1) == 1

    def test_cauchy_product_shrinks_window(self):
        s = poly({0: 1, 1: 1}, Span(None, h(2)))
        t = poly({0: 1, 1: -1}, Span(None, h(2)))
        product = series_mul(s, t)
        assert product.coefficient_at(0) == 1
        assert product.coefficient_at(1) == 0
        assert product.coefficient_at(2) == -1
        with pytest.raises(WindowUnderflowError):
            product.coefficient_at(3)

    def test_add_intersects_windows(self):
        s = poly({0: 1}, Span(h(-3), h(3)))
        t = poly({0: 2, 1: 5}, Span(h(-1), h(1)))
        total = series_add(s, t)
        assert total.coefficient_at(0) == 3
        assert total.spans == (Span(h(-1), h(1)),)

    def test_restrict(self):
        s = poly({0: 1, 2: 1})
        r = restrict(s, (Span(h(-1), h(1)),))
        assert r.coefficient_at(0) == 1
        with pytest.raises(WindowUnderflowError):
            r.coefficient_at(2)

    def test_json_doubles_exponents(self):
        s = poly({"-1/2": Fraction(1, 2)}, Span(h(-1), h(1)))
        assert s.to_json() == {
            "var_count": 1,
            "window": [[-2, 2]],
            "entries": [{"exps": [-1], "coeff": "1/2"}],
        }


class TestBinomExpand:
    def test_linear(self):
        s = binom_expand(1, SQUARE, Expansion.XY, minus=True)
        assert s.coefficient_at(1, 0) == 1
        assert s.coefficient_at(0, 1) == -1
        assert len(s.coeffs) == 2

    @pytest.mark.parametrize("i", range(4))
    def test_inverse_difference_xy(self, i):
        s = binom_expand(-1, SQUARE, Expansion.XY, minus=True)
        assert s.coefficient_at(-1 - i, i) == 1

    @pytest.mark.parametrize("k", range(4))
    def test_half_power_yx(self, k):
        s = binom_expand("-1/2", SQUARE, Expansion.YX)
        assert s.coefficient_at(k, HalfInt(-1) - k) == binom(Fraction(-1, 2), k)

    def test_half_power_of_difference_with_y_large_is_rejected(self):
        with pytest.raises(ValueError):
            binom_expand("-1/2", SQUARE, Expansion.YX, minus=True)


class TestTaylorShift:
    def test_linear(self):
        s = taylor_shift(poly({1: 1}), 2)
        assert s.coefficient_at(0, 1) == 1
        assert s.coefficient_at(1, 0) == 1
        assert s.coefficient_at(2, -1) == 0

    def test_half_power(self):
        s = taylor_shift(poly({"-1/2": 1}), 3)
        assert s.coefficient_at(1, "-3/2") == Fraction(-1, 2)

    @pytest.mark.parametrize("k", range(5))
    def test_inverse_power(self, k):
        s = taylor_shift(poly({-1: 1}), 4)
        assert s.coefficient_at(k, -1 - k) == (-1) ** k

    def test_underflow_when_window_too_small(self):
        with pytest.raises(WindowUnderflowError):
            taylor_shift(poly({0: 1}, Span(h(-2), h(0))), 3)


class TestKernels:
    def test_f_coefficients(self):
        f = KernelSpec(KernelKind.F)
        assert kernel_coefficient(f, "-3/2", "1/2") == 1
        assert kernel_coefficient(f, "-1/2", "-1/2") == 0
        assert kernel_coefficient(f, "1/2", "-5/2") == 0

    def test_g_half_term(self):
        assert kernel_coefficient(KernelSpec(KernelKind.G_UPPER), "-1/2", "-1/2") == Fraction(1, 2)
        assert kernel_coefficient(KernelSpec(KernelKind.G_LOWER), "-1/2", "-1/2") == Fraction(1, 2)

    def test_g_upper_only_expands_xy(self):
        with pytest.raises(ValueError):
            KernelSpec(KernelKind.G_UPPER, direction=Expansion.YX)
        with pytest.raises(ValueError):
            KernelSpec(KernelKind.F, m=-1)

    def test_power_kernel(self):
        spec = KernelSpec(KernelKind.POWER, m=1, n=0)
        assert kernel_coefficient(spec, -2, 0) == -1
        assert kernel_coefficient(spec, -1, 0) == 0
        assert power_derivative(-1, 1) == (h(-2), Fraction(-1))

    def test_expansion_is_window_independent(self):
        spec = KernelSpec(KernelKind.G_UPPER, 1, 2)
        small = expand_kernel(spec, SQUARE)
        large_window = make_window(-8, 8)
        large = expand_kernel(spec, (large_window, large_window))
        for exps, value in small.coeffs.items():
            assert large.coefficient_at(*exps) == value

    @pytest.mark.parametrize("m,n", [(0, 0), (1, 0), (0, 2), (2, 3), (4, 4)])
    def test_c_mn_g_identity(self, m, n):
        assert c_mn_g_identity_check(m, n, SQUARE)

    @pytest.mark.parametrize("direction", list(Expansion))
    @pytest.mark.parametrize("m,n", [(1, 0), (0, 1), (2, 1)])
    def test_derivatives_commute_with_expansion(self, m, n, direction):
        assert kernel_derivative_check(m, n, SQUARE, direction)
