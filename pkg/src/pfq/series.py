"""Direct power-series evaluation of pFq.

The sum is built with the term ratio

    t[i+1] = t[i] * prod(a_k + i) / prod(b_k + i) * x / (i + 1)

accumulated with a compensated double-double sum.  Summation stops once
``quiet_shells`` consecutive terms fall below ``tol * max(1, |partial sum|)``;
series with a nonpositive-integer numerator are polynomials and are summed
to the last nonzero term with no early stop.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _dd
from ._dd import jit
from .errors import ConvergenceError, DomainError, ParameterError, RangeError
from .numerics import EPS, ComplexEP, Scalar, c_neumaier

NEAR_INTEGER_TOL = 1e-25

# kernel status codes
CONVERGED = 0
EXACT = 1
MAX_ORDER = 2
NONFINITE = 3


@dataclass(frozen=True)
class TruncationPolicy:
    """Stopping rule shared by the direct series and the shell sums.

    ``max_order`` bounds the index of a single power series; the multi-index
    sums in :mod:`pfq.identities` stop at total order ``max_shell_order``.
    """

    tol: float = 1e-25
    max_order: int = 2000
    quiet_shells: int = 3
    max_shell_order: int = 1000

    def __post_init__(self):
        if not (self.tol > 0 and math.isfinite(self.tol)):
            raise ParameterError(f"tol must be positive, got {self.tol}")
        if self.max_order < 1:
            raise ParameterError(f"max_order must be >= 1, got {self.max_order}")
        if self.quiet_shells < 1:
            raise ParameterError(f"quiet_shells must be >= 1, got {self.quiet_shells}")
        if self.max_shell_order < 0:
            raise ParameterError(f"max_shell_order must be >= 0, got {self.max_shell_order}")

    def tighter(self, factor: float = 10.0) -> "TruncationPolicy":
        return TruncationPolicy(self.tol / factor, self.max_order, self.quiet_shells, self.max_shell_order)


DEFAULT_POLICY = TruncationPolicy()


class ConvergenceClass(enum.Enum):
    ENTIRE = "entire"
    UNIT_DISK = "unit_disk"
    TERMINATING = "terminating"
    DIVERGENT = "divergent"


def _as_params(values: Sequence[Scalar]) -> tuple[ComplexEP, ...]:
    return tuple(ComplexEP.coerce(v) for v in values)


@dataclass(frozen=True)
class HyperSpec:
    """Parameters and argument of pFq(numerator; denominator; argument)."""

    numerator: tuple[ComplexEP, ...]
    denominator: tuple[ComplexEP, ...]
    argument: ComplexEP | None = None

    def __post_init__(self):
        object.__setattr__(self, "numerator", _as_params(self.numerator))
        object.__setattr__(self, "denominator", _as_params(self.denominator))
        if self.argument is not None:
            object.__setattr__(self, "argument", ComplexEP.coerce(self.argument))
        for k, b in enumerate(self.denominator, start=1):
            m = b.nearest_nonpositive_integer(NEAR_INTEGER_TOL)
            if m is not None:
                raise ParameterError(
                    f"denominator parameter b_{k} = {complex(b)} is the nonpositive integer {m}"
                )

    @property
    def p(self) -> int:
        return len(self.numerator)

    @property
    def q(self) -> int:
        return len(self.denominator)

    def with_argument(self, x: Scalar) -> "HyperSpec":
        return HyperSpec(self.numerator, self.denominator, ComplexEP.coerce(x))

    def conjugate(self) -> "HyperSpec":
        arg = None if self.argument is None else self.argument.conjugate()
        return HyperSpec(
            tuple(a.conjugate() for a in self.numerator),
            tuple(b.conjugate() for b in self.denominator),
            arg,
        )

    def packed(self) -> tuple[np.ndarray, np.ndarray]:
        """Kernel arrays; numerators within 1e-25 of -m are snapped to -m."""
        return pack_numerators(self.numerator), pack_denominators(self.denominator)

    def terminating_index(self) -> int | None:
        """Largest m with a numerator equal to -m (the polynomial degree), if any."""
        ms = [a.nearest_nonpositive_integer(NEAR_INTEGER_TOL) for a in self.numerator]
        ms = [-m for m in ms if m is not None]
        return min(ms) if ms else None

    def __str__(self):
        def fmt(vs):
            return ",".join(_fmt_scalar(v) for v in vs)

        arg = "" if self.argument is None else f"; {_fmt_scalar(self.argument)}"
        return f"{self.p}F{self.q}({fmt(self.numerator)}; {fmt(self.denominator)}{arg})"


def _fmt_scalar(v: ComplexEP) -> str:
    c = complex(v)
    return f"{c.real:g}" if c.imag == 0 else f"{c.real:g}{c.imag:+g}j"


def snap(value: ComplexEP) -> ComplexEP:
    m = value.nearest_nonpositive_integer(NEAR_INTEGER_TOL)
    return ComplexEP(float(m)) if m is not None else value


def pack_numerators(values: Sequence[ComplexEP]) -> np.ndarray:
    rows = [snap(v).parts for v in values]
    return np.array(rows, dtype=np.float64).reshape(len(rows), 4)


def pack_denominators(values: Sequence[ComplexEP]) -> np.ndarray:
    rows = [v.parts for v in values]
    return np.array(rows, dtype=np.float64).reshape(len(rows), 4)


@dataclass(frozen=True)
class EvalResult:
    value: ComplexEP
    abs_error_estimate: float
    terms_used: int
    truncation_order: int
    terminated_exactly: bool
    extra: dict = field(default_factory=dict, compare=False)


def classify(spec: HyperSpec) -> ConvergenceClass:
    if spec.terminating_index() is not None:
        return ConvergenceClass.TERMINATING
    if spec.p <= spec.q:
        return ConvergenceClass.ENTIRE
    if spec.p == spec.q + 1:
        return ConvergenceClass.UNIT_DISK
    return ConvergenceClass.DIVERGENT


# ---------------------------------------------------------------------------
# kernel
# ---------------------------------------------------------------------------


@jit
def _row(arr, k):
    return arr[k, 0], arr[k, 1], arr[k, 2], arr[k, 3]


@jit
def sum_series(num, den, x, tol, max_order, quiet):
    """Sum pFq(num; den; x) in double-double.

    Returns ``(value, truncation_estimate, sum_of_|t_i|, terms_used, status)``.
    """
    cap = -1
    for k in range(num.shape[0]):
        re = num[k, 0]
        if re <= 0.0 and num[k, 1] == 0.0 and num[k, 2] == 0.0 and num[k, 3] == 0.0 and re == math.floor(re):
            m = int(-re)
            if cap < 0 or m < cap:
                cap = m
    total = (1.0, 0.0, 0.0, 0.0)
    comp = (0.0, 0.0, 0.0, 0.0)
    t = total
    abs_sum = 1.0
    n_terms = 1
    if x[0] == 0.0 and x[2] == 0.0:
        return total, 0.0, abs_sum, n_terms, EXACT
    limit = max_order if cap < 0 else max(max_order, cap + 1)
    run = 0
    run_sum = 0.0
    trunc = 0.0
    status = MAX_ORDER
    for i in range(limit):
        if cap >= 0 and i >= cap:
            status = EXACT
            break
        fi = float(i)
        pnum = x
        for k in range(num.shape[0]):
            pnum = _dd.c_mul(pnum, _dd.c_add_d(_row(num, k), fi))
        pden = (fi + 1.0, 0.0, 0.0, 0.0)
        for k in range(den.shape[0]):
            pden = _dd.c_mul(pden, _dd.c_add_d(_row(den, k), fi))
        t = _dd.c_div(_dd.c_mul(t, pnum), pden)
        mag = _dd.c_absf(t)
        if mag == 0.0:
            status = EXACT
            break
        if not math.isfinite(mag):
            status = NONFINITE
            break
        total, comp = c_neumaier(total, comp, t)
        n_terms += 1
        abs_sum += mag
        if cap < 0:
            if mag < tol * max(1.0, _dd.c_absf(total)):
                run += 1
                run_sum += mag
            else:
                run = 0
                run_sum = 0.0
            if run >= quiet:
                trunc = run_sum + 2.0 * mag
                status = CONVERGED
                break
    value = _dd.c_add(total, comp)
    if not _dd.c_isfinite(value):
        status = NONFINITE
    return value, trunc, abs_sum, n_terms, status


def rounding_estimate(abs_sum: float) -> float:
    return 4.0 * EPS * abs_sum


# ---------------------------------------------------------------------------
# public evaluators
# ---------------------------------------------------------------------------


def check_evaluable(spec: HyperSpec) -> ConvergenceClass:
    if spec.argument is None:
        raise ParameterError("HyperSpec has no argument set")
    cls = classify(spec)
    if cls is ConvergenceClass.DIVERGENT:
        raise DomainError(
            f"{spec.p}F{spec.q} with p > q+1 diverges for x != 0 unless a numerator is a nonpositive integer"
        )
    if cls is ConvergenceClass.UNIT_DISK:
        mag2 = _dd.c_abs2(spec.argument.parts)
        if mag2[0] + mag2[1] >= 1.0:
            raise DomainError(f"{spec.p}F{spec.q} series requires |x| < 1, got |x| = {abs(spec.argument):.17g}")
    return cls


def eval_series(spec: HyperSpec, policy: TruncationPolicy = DEFAULT_POLICY) -> EvalResult:
    """Evaluate pFq at ``spec.argument`` by direct summation."""
    check_evaluable(spec)
    num, den = spec.packed()
    value, trunc, abs_sum, n, status = sum_series(
        num, den, spec.argument.parts, policy.tol, policy.max_order, policy.quiet_shells
    )
    if status == MAX_ORDER:
        raise ConvergenceError(
            f"{spec} did not converge within max_order={policy.max_order} terms at tol={policy.tol:g}"
        )
    if status == NONFINITE:
        raise RangeError(f"{spec} overflowed during summation")
    return EvalResult(
        value=ComplexEP(*value),
        abs_error_estimate=trunc + rounding_estimate(abs_sum),
        terms_used=n,
        truncation_order=n - 1,
        terminated_exactly=status == EXACT,
    )


def scale_by_exp(value: ComplexEP, log_factor: ComplexEP, abs_error: float = 0.0) -> tuple[ComplexEP, float]:
    """Return (exp(log_factor) * value, |exp(log_factor)| * abs_error) without intermediate overflow."""
    log_factor = ComplexEP.coerce(log_factor)
    if not log_factor.is_finite():
        raise RangeError("log prefactor is not finite")
    mant, k = _dd.c_exp_split(log_factor.parts)
    prod = _dd.c_mul(mant, value.parts)
    try:
        parts = tuple(math.ldexp(v, k) for v in prod)
    except OverflowError:
        raise RangeError("scaled result overflows") from None
    out = ComplexEP(*parts)
    if not out.is_finite():
        raise RangeError("scaled result overflows")
    try:
        err = math.ldexp(_dd.c_absf(mant) * abs_error, k)
    except OverflowError:
        err = math.inf
    return out, err + rounding_estimate(abs(out))


def eval_series_scaled(
    spec: HyperSpec, policy: TruncationPolicy = DEFAULT_POLICY, log_prefactor: Scalar = 0
) -> EvalResult:
    """exp(log_prefactor) * pFq, with the product formed in double-double."""
    res = eval_series(spec, policy)
    log_prefactor = ComplexEP.coerce(log_prefactor)
    if log_prefactor.is_zero():
        return res
    value, err = scale_by_exp(res.value, log_prefactor, res.abs_error_estimate)
    return EvalResult(
        value=value,
        abs_error_estimate=err,
        terms_used=res.terms_used,
        truncation_order=res.truncation_order,
        terminated_exactly=res.terminated_exactly,
    )


def hyp(numerator: Sequence[Scalar], denominator: Sequence[Scalar], x: Scalar, **policy) -> ComplexEP:
    """Shorthand: value of pFq(numerator; denominator; x)."""
    pol = TruncationPolicy(**policy) if policy else DEFAULT_POLICY
    return eval_series(HyperSpec(numerator, denominator, x), pol).value
