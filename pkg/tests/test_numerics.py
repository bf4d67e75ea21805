from __future__ import annotations

import cmath
import math
import random
from fractions import Fraction

import mpmath as mp
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pfq import (
    ComplexEP,
    CompensatedAccumulator,
    ParameterError,
    PoleError,
    RangeError,
    compensated_add,
    compensated_sum,
    gamma,
    pochhammer,
)
from pfq.numerics import EPS, rel_diff

from conftest import mp_rel, to_mp

finite = st.floats(-5.0, 5.0, allow_nan=False, allow_infinity=False)
complex_params = st.builds(complex, finite, st.floats(-2.0, 2.0))


# ---------------------------------------------------------------------------
# ComplexEP
# ---------------------------------------------------------------------------


def test_coerce_decimal_string_is_exact_double_double():
    z = ComplexEP.coerce("0.1")
    exact = Fraction(z.re[0]) + Fraction(z.re[1])
    assert abs(exact - Fraction(1, 10)) < Fraction(1, 10**32)


def test_coerce_forms():
    assert complex(ComplexEP.coerce("1.5-2j")) == 1.5 - 2j
    assert complex(ComplexEP.coerce((1.0, 2.0))) == 1 + 2j
    assert complex(ComplexEP.coerce(3)) == 3
    assert complex(ComplexEP.coerce(0.25 + 0.5j)) == 0.25 + 0.5j
    assert ComplexEP.coerce(Fraction(1, 3)).re[1] != 0.0


def test_non_finite_input_rejected():
    with pytest.raises(ParameterError):
        ComplexEP.coerce(float("nan"))
    with pytest.raises(ParameterError):
        ComplexEP.coerce(complex(1.0, math.inf))


def test_values_are_immutable():
    z = ComplexEP(1.0)
    with pytest.raises(AttributeError):
        z.parts = (0.0, 0.0, 0.0, 0.0)


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        ComplexEP(1.0) / ComplexEP()


def test_overflow_reports_range_error():
    big = ComplexEP(1e300)
    with pytest.raises(RangeError):
        big * big


def _random_operand(rng):
    mag = 10.0 ** rng.uniform(-100, 100)
    return ComplexEP.coerce(complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) * mag)


def test_arithmetic_keeps_30_digits():
    # operands span [1e-100, 1e100]; errors are relative to the result magnitude
    rng = random.Random(7)
    worst = 0.0
    with mp.workdps(60):
        for _ in range(400):
            a, b = _random_operand(rng), _random_operand(rng)
            ma, mb = to_mp(a), to_mp(b)
            for got, ref in ((a + b, ma + mb), (a - b, ma - mb), (a * b, ma * mb), (a / b, ma / mb)):
                worst = max(worst, mp_rel(got, ref))
    assert worst < 1e-30


def test_exp_log_accuracy():
    rng = random.Random(3)
    with mp.workdps(60):
        for _ in range(100):
            z = ComplexEP.coerce(complex(rng.uniform(-20, 20), rng.uniform(-3, 3)))
            assert mp_rel(z.exp(), mp.exp(to_mp(z))) < 1e-28
            assert mp_rel(z.log(), mp.log(to_mp(z))) < 1e-29


def test_rel_diff_floor():
    assert rel_diff(ComplexEP(), ComplexEP()) == 0.0
    assert rel_diff(ComplexEP(1.0), ComplexEP(1.5)) == pytest.approx(1 / 3)


def test_nearest_nonpositive_integer():
    assert ComplexEP.coerce(-3).nearest_nonpositive_integer() == -3
    assert ComplexEP(-3.0, 1e-27).nearest_nonpositive_integer() == -3
    assert ComplexEP(-3.0, 1e-20).nearest_nonpositive_integer() is None
    assert ComplexEP.coerce(2).nearest_nonpositive_integer() is None


# ---------------------------------------------------------------------------
# compensated summation
# ---------------------------------------------------------------------------


def test_add_to_empty_accumulator():
    acc = compensated_add(CompensatedAccumulator(), 1)
    assert acc.value == ComplexEP(1.0)
    assert acc.count == 1


def test_compensation_retains_small_addend():
    assert compensated_sum([1e16, 1, -1e16]) == ComplexEP(1.0)


def test_ten_thousand_tenths():
    tenth = ComplexEP.coerce("0.1")
    acc = CompensatedAccumulator()
    for _ in range(10**4):
        acc = compensated_add(acc, tenth)
    got = Fraction(acc.value.re[0]) + Fraction(acc.value.re[1])
    assert abs(got - 10**4 * Fraction(1, 10)) <= Fraction(1, 10**25)


def test_accumulator_error_bound():
    # N terms of magnitude <= M: error <= 4 ulp(M N) at working precision
    rng = random.Random(11)
    terms = [ComplexEP.coerce(complex(rng.uniform(-1, 1), rng.uniform(-1, 1))) for _ in range(2000)]
    got = compensated_sum(terms)
    with mp.workdps(60):
        ref = mp.fsum(to_mp(t) for t in terms)
        assert float(abs(to_mp(got) - ref)) <= 4 * EPS * 2 * 2000


# ---------------------------------------------------------------------------
# Pochhammer
# ---------------------------------------------------------------------------


def test_pochhammer_examples():
    assert pochhammer(2.5, 0) == ComplexEP(1.0)
    assert pochhammer(-3, 5) == ComplexEP()
    assert pochhammer(1, 5) == ComplexEP(120.0)


@pytest.mark.parametrize("n", [-1, 1.5, True])
def test_pochhammer_rejects_bad_order(n):
    with pytest.raises(ParameterError):
        pochhammer(1.0, n)


def test_pochhammer_overflow():
    with pytest.raises(RangeError):
        pochhammer(1.0, 500)


def test_pochhammer_matches_mpmath():
    rng = random.Random(5)
    for _ in range(50):
        a = complex(rng.uniform(-4, 4), rng.uniform(-2, 2))
        n = rng.randrange(0, 120)
        assert mp_rel(pochhammer(a, n), mp.rf(mp.mpc(a), n)) < 1e-27


@given(complex_params, st.integers(0, 150))
def test_pochhammer_recurrence(a, n):
    lhs = pochhammer(a, n + 1)
    rhs = pochhammer(a, n) * (ComplexEP.coerce(a) + n)
    assert rel_diff(lhs, rhs) <= 1e-28


@given(complex_params, st.integers(0, 80), st.integers(0, 80))
def test_pochhammer_split(a, m, n):
    # (a)_{m+n} = (a)_m (a+m)_n
    lhs = pochhammer(a, m + n)
    rhs = pochhammer(a, m) * pochhammer(ComplexEP.coerce(a) + m, n)
    assert rel_diff(lhs, rhs) <= 1e-27


@given(complex_params, st.integers(0, 150))
def test_pochhammer_conjugation(a, n):
    assert pochhammer(a, n).conjugate() == pochhammer(complex(a).conjugate(), n)


# ---------------------------------------------------------------------------
# gamma
# ---------------------------------------------------------------------------


def test_gamma_examples():
    assert gamma(1) == ComplexEP(1.0)
    assert gamma(5) == ComplexEP(24.0)


def test_gamma_half_is_sqrt_pi():
    g = gamma(0.5)
    with mp.workdps(50):
        assert mp_rel(g, mp.sqrt(mp.pi)) < 1e-25
        # independent route: int_0^inf t^(-1/2) e^(-t) dt
        integral = mp.quad(lambda t: t ** mp.mpf(-0.5) * mp.exp(-t), [0, 1, mp.inf])
        assert mp_rel(g, integral) < 1e-25
    assert format(g.decimal_parts()[0], ".20e").startswith("1.77245385090551602730")


@pytest.mark.parametrize("z", [0, -1, -7, complex(-3, 1e-30)])
def test_gamma_poles(z):
    with pytest.raises(PoleError):
        gamma(z)


def test_gamma_out_of_supported_range():
    with pytest.raises(ParameterError):
        gamma(2000)


def test_gamma_matches_mpmath():
    rng = random.Random(13)
    for _ in range(300):
        z = cmath.rect(rng.uniform(0, 50), rng.uniform(-math.pi, math.pi))
        if abs(z.real - round(z.real)) < 0.05 and round(z.real) <= 0 and abs(z.imag) < 0.05:
            continue
        assert mp_rel(gamma(z), mp.gamma(mp.mpc(z))) < 1e-25


@given(st.complex_numbers(max_magnitude=40, allow_nan=False, allow_infinity=False))
def test_gamma_recurrence(z):
    nearest = min(0, round(z.real))
    if abs(z - nearest) < 0.1 or abs(z + 1 - min(0, round(z.real + 1))) < 0.1:
        return
    w = ComplexEP.coerce(z)
    lhs = gamma(w + 1)
    rhs = w * gamma(w)
    assert rel_diff(lhs, rhs) <= 1e-24
