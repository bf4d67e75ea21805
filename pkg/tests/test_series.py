from __future__ import annotations

import random

import mpmath as mp
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pfq import (
    ComplexEP,
    ConvergenceClass,
    ConvergenceError,
    DomainError,
    HyperSpec,
    ParameterError,
    TruncationPolicy,
    classify,
    eval_series,
    eval_series_scaled,
    th3_kummer_rhs,
)
from pfq.numerics import EPS, rel_diff
from pfq.series import hyp

from conftest import mp_rel, to_mp

param = st.builds(
    complex,
    st.floats(-2.0, 3.0),
    st.floats(-1.0, 1.0),
).filter(lambda b: abs(b - min(0, round(b.real))) >= 0.1)
small_arg = st.builds(complex, st.floats(-0.6, 0.6), st.floats(-0.6, 0.6))
entire_arg = st.builds(complex, st.floats(-4.0, 4.0), st.floats(-4.0, 4.0))


def mp_hyper(num, den, x):
    return mp.hyper([to_mp(a) for a in num], [to_mp(b) for b in den], to_mp(x))


# ---------------------------------------------------------------------------
# HyperSpec and classify
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("b", [0, -2, ComplexEP(-2.0, 1e-26)])
def test_denominator_at_nonpositive_integer_rejected(b):
    with pytest.raises(ParameterError):
        HyperSpec([1.0], [b], 0.5)


def test_denominator_near_but_outside_tolerance_accepted():
    HyperSpec([1.0], [ComplexEP(-2.0, 1e-20)], 0.5)


def test_classify_examples():
    assert classify(HyperSpec([1.2], [2.3], 1.0)) is ConvergenceClass.ENTIRE
    assert classify(HyperSpec([-3, 2.5], [1.5], 0.5)) is ConvergenceClass.TERMINATING
    assert classify(HyperSpec([1.1, 2.2, 3.3], [1.5], 0.1)) is ConvergenceClass.DIVERGENT
    assert classify(HyperSpec([1.1, 2.2], [1.5], 0.1)) is ConvergenceClass.UNIT_DISK
    assert classify(HyperSpec([], [], 3.0)) is ConvergenceClass.ENTIRE


# ---------------------------------------------------------------------------
# eval_series
# ---------------------------------------------------------------------------


def test_argument_zero():
    res = eval_series(HyperSpec([1.3, 0.2 + 1j], [2.5], 0))
    assert res.value == ComplexEP(1.0)
    assert res.terms_used == 1
    assert res.terminated_exactly


def test_confluent_reduces_to_exp():
    res = eval_series(HyperSpec([2.5], [2.5], 1))
    assert mp_rel(res.value, mp.e) < 1e-25
    assert str(res.value.decimal_parts()[0]).startswith("2.71828182845904523536")


def test_log_closed_form():
    res = eval_series(HyperSpec([1, 1], [2], 0.5))
    with mp.workdps(50):
        closed = -mp.log(1 - mp.mpf("0.5")) / mp.mpf("0.5")
        # independent summation of the first 200 terms with exact rationals
        terms = mp.fsum(mp.mpf(0.5) ** i / (i + 1) for i in range(200))
        assert mp_rel(res.value, closed) < 1e-24
        assert mp_rel(res.value, terms) < 1e-24
    assert res.abs_error_estimate < 1e-24


def test_matches_mpmath_on_random_specs():
    rng = random.Random(17)
    for _ in range(60):
        p = rng.randrange(0, 4)
        q = rng.randrange(max(0, p - 1), 4)
        num = [complex(rng.uniform(-2, 3), rng.uniform(-1, 1)) for _ in range(p)]
        den = []
        while len(den) < q:
            b = complex(rng.uniform(-2, 3), rng.uniform(-1, 1))
            if abs(b - min(0, round(b.real))) >= 0.1:
                den.append(b)
        radius = 0.9 if p == q + 1 else 3.0
        x = complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) * radius / 1.5
        spec = HyperSpec(num, den, x)
        res = eval_series(spec)
        ref = mp_hyper(num, den, x)
        scale = max(abs(ref), 1e-300)
        assert float(abs(to_mp(res.value) - ref)) <= max(10 * res.abs_error_estimate, 1e-22 * float(scale))


def test_error_estimate_bounds_actual_error():
    spec = HyperSpec([1.2, 0.8], [2.3, 1.7], -40)
    res = eval_series(spec)
    ref = mp_hyper(spec.numerator, spec.denominator, -40)
    assert float(abs(to_mp(res.value) - ref)) <= res.abs_error_estimate


def test_terminating_series_summed_exactly():
    spec = HyperSpec([-3, 2.5], [1.5], 0.7)
    res = eval_series(spec)
    assert res.terminated_exactly
    assert res.terms_used == 4
    assert mp_rel(res.value, mp.hyp2f1(-3, 2.5, 1.5, mp.mpf(0.7))) < 1e-28


def test_terminating_past_max_order():
    # degree 50 polynomial with max_order 10: no early stop, all terms summed
    spec = HyperSpec([-50, 1.5], [2.5], 0.5)
    res = eval_series(spec, TruncationPolicy(max_order=10))
    assert res.terms_used == 51
    ref = mp.hyp2f1(-50, 1.5, 2.5, mp.mpf(0.5))
    assert float(abs(to_mp(res.value) - ref)) <= res.abs_error_estimate


def test_domain_errors():
    with pytest.raises(DomainError):
        eval_series(HyperSpec([1, 2, 3], [1.5], 0.3))
    with pytest.raises(DomainError):
        eval_series(HyperSpec([1, 2], [1.5], 1.0))
    with pytest.raises(DomainError):
        eval_series(HyperSpec([1, 2], [1.5], 0.6 + 0.8j))
    with pytest.raises(ParameterError):
        eval_series(HyperSpec([1], [2]))


def test_nonconvergence_error():
    with pytest.raises(ConvergenceError):
        eval_series(HyperSpec([1.5], [2.5], 30), TruncationPolicy(max_order=20))


def test_divergent_but_terminating_is_evaluated():
    res = eval_series(HyperSpec([-2, 1.5, 2.5], [3.5], 2.0))
    ref = mp.hyper([-2, 1.5, 2.5], [3.5], 2)
    assert mp_rel(res.value, ref) < 1e-29


def test_policy_validation():
    for kw in ({"tol": 0}, {"max_order": 0}, {"quiet_shells": 0}, {"max_shell_order": -1}):
        with pytest.raises(ParameterError):
            TruncationPolicy(**kw)


def test_hyp_shorthand():
    assert hyp([2.5], [2.5], 0) == ComplexEP(1.0)
    assert abs(complex(hyp([1, 1], [2], 0.5, tol=1e-20)) - 1.3862943611198906) < 1e-15


# ---------------------------------------------------------------------------
# eval_series_scaled
# ---------------------------------------------------------------------------


def test_scaled_zero_prefactor_identical():
    spec = HyperSpec([1.1, 0.3j], [2.2], 0.4)
    assert eval_series_scaled(spec, log_prefactor=0).value == eval_series(spec).value


def test_scaled_cancels_exponential():
    res = eval_series_scaled(HyperSpec([2.5], [2.5], 30), log_prefactor=-30)
    assert abs(complex(res.value) - 1.0) < 1e-25


def test_scaled_avoids_intermediate_overflow():
    # e^710 alone overflows binary64; e^710 * e^-5 does not
    res = eval_series_scaled(HyperSpec([], [], -5), log_prefactor=710)
    with mp.workdps(50):
        assert mp_rel(res.value, mp.exp(mp.mpf(705))) < 1e-26


def test_negative_argument_against_kummer_route():
    spec = HyperSpec([1.2, 0.8], [2.3, 1.7], -40)
    direct = eval_series_scaled(spec, log_prefactor=0)
    kummer = th3_kummer_rhs(spec)
    assert rel_diff(direct.value, kummer.value) <= 1e-10
    # oracle: direct summation at order 600
    fixed = eval_series(spec, TruncationPolicy(tol=1e-300, max_order=600, quiet_shells=600))
    assert rel_diff(direct.value, fixed.value) <= 1e-15


# ---------------------------------------------------------------------------
# properties
# ---------------------------------------------------------------------------


@given(st.lists(param, min_size=1, max_size=3), st.lists(param, min_size=1, max_size=3), small_arg, st.randoms())
def test_permutation_symmetry(num, den, x, rnd):
    num, den = num[: len(den) + 1], den
    spec = HyperSpec(num, den, x)
    pn, pd = list(num), list(den)
    rnd.shuffle(pn)
    rnd.shuffle(pd)
    a = eval_series(spec).value
    b = eval_series(HyperSpec(pn, pd, x)).value
    # relative to the magnitude of the summed terms, which bounds rounding
    res = eval_series(spec)
    assert abs(a - b) <= 1e-26 * max(abs(a), 1.0) + 2 * res.abs_error_estimate


@given(st.lists(param, max_size=3), st.lists(param, max_size=3), small_arg)
def test_conjugation(num, den, x):
    num = num[: len(den) + 1]
    spec = HyperSpec(num, den, x)
    a = eval_series(spec).value.conjugate()
    b = eval_series(spec.conjugate()).value
    assert rel_diff(a, b) <= 4 * EPS


@given(st.lists(param, min_size=1, max_size=2), st.lists(param, min_size=1, max_size=2), param, entire_arg)
def test_cancellation(num, den, c, x):
    num = num[: len(den)]
    base = eval_series(HyperSpec(num, den, x))
    padded = eval_series(HyperSpec(num + [c], den + [c], x))
    assert abs(base.value - padded.value) <= 1e-24 * max(abs(base.value), 1.0) + 2 * (
        base.abs_error_estimate + padded.abs_error_estimate
    )


@given(param, param, st.floats(-3.0, 3.0))
def test_contiguity_derivative(a, b, x):
    h = 1e-8
    f = lambda t: eval_series(HyperSpec([a], [b], t)).value  # noqa: E731
    fd = (f(x + h) - f(x - h)) / (2 * h)
    deriv = ComplexEP.coerce(a) / ComplexEP.coerce(b) * eval_series(HyperSpec([a + 1], [b + 1], x)).value
    assert abs(fd - deriv) <= 1e-6 * max(abs(deriv), 1.0)


@given(st.lists(param, min_size=1, max_size=3), st.lists(param, min_size=1, max_size=3), small_arg,
       st.sampled_from([1e-8, 1e-12, 1e-16, 1e-20, 1e-24]))
def test_monotone_refinement(num, den, x, tol):
    num = num[: len(den) + 1]
    spec = HyperSpec(num, den, x)
    coarse = eval_series(spec, TruncationPolicy(tol=tol))
    fine = eval_series(spec, TruncationPolicy(tol=tol / 10))
    assert fine.abs_error_estimate <= coarse.abs_error_estimate
