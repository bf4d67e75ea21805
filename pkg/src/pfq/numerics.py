"""Extended-precision complex scalars, Pochhammer symbols and the gamma function.

:class:`ComplexEP` wraps the 4-float double-double representation used by the
compiled kernels in :mod:`pfq._dd` (about 31 significant digits).  It is the
scalar type of every public entry point; the kernels themselves work on
plain tuples and ``(n, 4)`` float arrays produced by :func:`pack`.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Iterable, Union

import numpy as np

from . import _dd
from ._dd import jit
from .errors import ParameterError, PoleError, RangeError

PRECISION = _dd.PRECISION
EPS = _dd.EPS

Scalar = Union["ComplexEP", numbers.Number, str, Fraction, Decimal, tuple]


def _split_exact(value) -> tuple[float, float]:
    """Round an exact rational/decimal/string to the nearest (hi, lo) pair."""
    if isinstance(value, float):
        return value, 0.0
    if isinstance(value, int):
        hi = float(value)
        return hi, float(value - int(hi)) if math.isfinite(hi) else 0.0
    exact = Fraction(value) if not isinstance(value, str) else Fraction(value.strip())
    hi = float(exact)
    return hi, float(exact - Fraction(hi))


class ComplexEP:
    """Immutable complex number with double-double real and imaginary parts."""

    __slots__ = ("parts",)

    def __init__(self, re_hi: float = 0.0, re_lo: float = 0.0, im_hi: float = 0.0, im_lo: float = 0.0):
        object.__setattr__(self, "parts", (float(re_hi), float(re_lo), float(im_hi), float(im_lo)))

    def __setattr__(self, name, value):
        raise AttributeError("ComplexEP is immutable")

    # -- construction ------------------------------------------------------
    @classmethod
    def from_parts(cls, re, im=0) -> "ComplexEP":
        rh, rl = _split_exact(re)
        ih, il = _split_exact(im)
        return cls(rh, rl, ih, il)

    @classmethod
    def coerce(cls, value: Scalar) -> "ComplexEP":
        """Convert ``value`` without losing digits that are exactly representable.

        Strings, :class:`~fractions.Fraction` and :class:`~decimal.Decimal`
        are rounded once to double-double, so ``coerce("0.1")`` is 1/10 to
        about 1e-33 rather than the binary64 neighbour of 0.1.
        """
        if isinstance(value, ComplexEP):
            return value
        out = cls._coerce(value)
        if not out.is_finite():
            raise ParameterError(f"non-finite value {value!r}")
        return out

    @classmethod
    def _coerce(cls, value) -> "ComplexEP":
        if isinstance(value, tuple):
            if len(value) == 4:
                return cls(*value)
            if len(value) == 2:
                return cls.from_parts(*value)
            raise ParameterError(f"cannot interpret tuple of length {len(value)} as ComplexEP")
        if isinstance(value, bool):
            return cls(float(value))
        if isinstance(value, complex):
            return cls(value.real, 0.0, value.imag, 0.0)
        if isinstance(value, str):
            text = value.strip().replace(" ", "")
            if text.endswith("j") or text.endswith("i"):
                c = complex(text.replace("i", "j"))
                return cls(c.real, 0.0, c.imag, 0.0)
            return cls.from_parts(text)
        if isinstance(value, (int, float, Fraction, Decimal)):
            return cls.from_parts(value)
        if isinstance(value, numbers.Complex):
            c = complex(value)
            return cls(c.real, 0.0, c.imag, 0.0)
        raise ParameterError(f"cannot interpret {value!r} as ComplexEP")

    # -- views -------------------------------------------------------------
    @property
    def re(self) -> tuple[float, float]:
        return self.parts[0], self.parts[1]

    @property
    def im(self) -> tuple[float, float]:
        return self.parts[2], self.parts[3]

    @property
    def real(self) -> float:
        return self.parts[0] + self.parts[1]

    @property
    def imag(self) -> float:
        return self.parts[2] + self.parts[3]

    def __complex__(self) -> complex:
        return complex(self.real, self.imag)

    def __abs__(self) -> float:
        return _dd.c_absf(self.parts)

    def decimal_parts(self) -> tuple[Decimal, Decimal]:
        """Exact decimal expansion of the real and imaginary parts."""
        rh, rl, ih, il = self.parts
        with localcontext() as ctx:
            ctx.prec = 80
            return Decimal(rh) + Decimal(rl), Decimal(ih) + Decimal(il)

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in self.parts)

    def is_zero(self) -> bool:
        return self.parts[0] == 0.0 and self.parts[2] == 0.0

    def is_real(self) -> bool:
        return self.parts[2] == 0.0 and self.parts[3] == 0.0

    def nearest_nonpositive_integer(self, tol: float = 1e-25) -> int | None:
        """The integer -m (m >= 0) within ``tol`` of this value, if any."""
        n = round(self.parts[0])
        if n > 0:
            return None
        off = _dd.dd_add_d(self.re, -float(n))
        if math.hypot(off[0] + off[1], self.imag) <= tol:
            return int(n)
        return None

    # -- arithmetic --------------------------------------------------------
    def _checked(self, parts) -> "ComplexEP":
        out = ComplexEP(*parts)
        if not out.is_finite():
            raise RangeError("result is not representable in double-double")
        return out

    def __add__(self, other):
        return self._checked(_dd.c_add(self.parts, ComplexEP.coerce(other).parts))

    __radd__ = __add__

    def __sub__(self, other):
        return self._checked(_dd.c_sub(self.parts, ComplexEP.coerce(other).parts))

    def __rsub__(self, other):
        return self._checked(_dd.c_sub(ComplexEP.coerce(other).parts, self.parts))

    def __mul__(self, other):
        return self._checked(_dd.c_mul(self.parts, ComplexEP.coerce(other).parts))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = ComplexEP.coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("ComplexEP division by zero")
        return self._checked(_dd.c_div(self.parts, other.parts))

    def __rtruediv__(self, other):
        return ComplexEP.coerce(other) / self

    def __neg__(self):
        return ComplexEP(*_dd.c_neg(self.parts))

    def __pos__(self):
        return self

    def __pow__(self, other):
        if isinstance(other, int) and not isinstance(other, bool):
            return self._int_pow(other)
        other = ComplexEP.coerce(other)
        if self.is_zero():
            if other.real > 0:
                return ComplexEP()
            raise ZeroDivisionError("0 raised to a power with nonpositive real part")
        return self._checked(_dd.c_pow(self.parts, other.parts))

    def _int_pow(self, n: int) -> "ComplexEP":
        base = self if n >= 0 else ComplexEP(1.0) / self
        result = ComplexEP(1.0)
        n = abs(n)
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def conjugate(self) -> "ComplexEP":
        return ComplexEP(*_dd.c_conj(self.parts))

    def exp(self) -> "ComplexEP":
        return self._checked(_dd.c_exp(self.parts))

    def log(self) -> "ComplexEP":
        if self.is_zero():
            raise ParameterError("log of zero")
        return self._checked(_dd.c_log(self.parts))

    def __eq__(self, other):
        try:
            other = ComplexEP.coerce(other)
        except ParameterError:
            return NotImplemented
        return self.parts == other.parts

    def __hash__(self):
        return hash(self.parts)

    def __repr__(self):
        re, im = self.decimal_parts()
        return f"ComplexEP({re:.31g}{'+' if im >= 0 else '-'}{abs(im):.31g}j)"


ZERO = ComplexEP()
ONE = ComplexEP(1.0)


def pack(values: Iterable[Scalar]) -> np.ndarray:
    """Stack scalars into the ``(n, 4)`` float array layout used by kernels."""
    rows = [ComplexEP.coerce(v).parts for v in values]
    if not rows:
        return np.zeros((0, 4))
    return np.array(rows, dtype=np.float64)


def rel_diff(a: ComplexEP, b: ComplexEP, floor: float = 1e-300) -> float:
    """|a - b| / max(|a|, |b|, floor), with the difference formed in double-double."""
    d = abs(ComplexEP(*_dd.c_sub(a.parts, b.parts)))
    return d / max(abs(a), abs(b), floor)


# ---------------------------------------------------------------------------
# compensated summation
# ---------------------------------------------------------------------------


@jit
def c_neumaier(total, comp, term):
    """One Neumaier step on each component: returns (new_total, new_comp)."""
    s = _dd.c_add(total, term)
    if abs(total[0]) >= abs(term[0]):
        er = _dd.dd_add(_dd.dd_sub((total[0], total[1]), (s[0], s[1])), (term[0], term[1]))
    else:
        er = _dd.dd_add(_dd.dd_sub((term[0], term[1]), (s[0], s[1])), (total[0], total[1]))
    if abs(total[2]) >= abs(term[2]):
        ei = _dd.dd_add(_dd.dd_sub((total[2], total[3]), (s[2], s[3])), (term[2], term[3]))
    else:
        ei = _dd.dd_add(_dd.dd_sub((term[2], term[3]), (s[2], s[3])), (total[2], total[3]))
    return s, _dd.c_add(comp, (er[0], er[1], ei[0], ei[1]))


@dataclass(frozen=True)
class CompensatedAccumulator:
    """Running sum kept as ``primary + compensation``."""

    primary: ComplexEP = ZERO
    compensation: ComplexEP = ZERO
    count: int = 0

    @property
    def value(self) -> ComplexEP:
        return ComplexEP(*_dd.c_add(self.primary.parts, self.compensation.parts))


def compensated_add(acc: CompensatedAccumulator, term: Scalar) -> CompensatedAccumulator:
    term = ComplexEP.coerce(term)
    s, c = c_neumaier(acc.primary.parts, acc.compensation.parts, term.parts)
    return CompensatedAccumulator(ComplexEP(*s), ComplexEP(*c), acc.count + 1)


def compensated_sum(terms: Iterable[Scalar]) -> ComplexEP:
    acc = CompensatedAccumulator()
    for t in terms:
        acc = compensated_add(acc, t)
    return acc.value


# ---------------------------------------------------------------------------
# Pochhammer and gamma
# ---------------------------------------------------------------------------


def pochhammer(a: Scalar, n: int) -> ComplexEP:
    """Rising factorial (a)_n = a(a+1)...(a+n-1); (a)_0 = 1."""
    if isinstance(n, bool) or not isinstance(n, numbers.Integral) or n < 0:
        raise ParameterError(f"pochhammer order must be a nonnegative integer, got {n!r}")
    a = ComplexEP.coerce(a)
    out = ComplexEP(*_dd.c_poch(a.parts, int(n)))
    if not out.is_finite():
        raise RangeError(f"pochhammer({complex(a)}, {n}) overflows")
    return out


# Bernoulli numbers B_2 .. B_32 as exact rationals.  The Stirling correction
# uses B_2k / (2k (2k-1)) z^(1-2k); with Re z >= 30 sixteen terms leave a
# remainder below 1e-38.
_BERNOULLI = (
    (1, 6),
    (-1, 30),
    (1, 42),
    (-1, 30),
    (5, 66),
    (-691, 2730),
    (7, 6),
    (-3617, 510),
    (43867, 798),
    (-174611, 330),
    (854513, 138),
    (-236364091, 2730),
    (8553103, 6),
    (-23749461029, 870),
    (8615841276005, 14322),
    (-7709321041217, 510),
)
_STIRLING = np.array(
    [
        _split_exact(Fraction(num, den) / ((2 * k) * (2 * k - 1)))
        for k, (num, den) in enumerate(_BERNOULLI, start=1)
    ],
    dtype=np.float64,
)
_GAMMA_SHIFT = 30.0
# Gamma(n) = (n-1)! is rounded once from the exact integer up to this n
_EXACT_FACTORIAL = 171


@jit
def _gamma_right(z):
    """Gamma(z) for Re z >= 1/2: upward shift, then Stirling's series."""
    n = 0
    if z[0] < _GAMMA_SHIFT:
        n = int(math.ceil(_GAMMA_SHIFT - z[0]))
    prod = (1.0, 0.0, 0.0, 0.0)
    w = z
    for _ in range(n):
        prod = _dd.c_mul(prod, w)
        w = _dd.c_add_d(w, 1.0)
    lw = _dd.c_log(w)
    s = _dd.c_sub(_dd.c_mul(_dd.c_add_d(w, -0.5), lw), w)
    s = _dd.c_add(s, (_dd.HALF_LN_2PI_HI, _dd.HALF_LN_2PI_LO, 0.0, 0.0))
    winv = _dd.c_div((1.0, 0.0, 0.0, 0.0), w)
    winv2 = _dd.c_mul(winv, winv)
    t = winv
    for k in range(_STIRLING.shape[0]):
        s = _dd.c_add(s, _dd.c_mul_dd(t, (_STIRLING[k, 0], _STIRLING[k, 1])))
        t = _dd.c_mul(t, winv2)
    m, e = _dd.c_exp_split(s)
    g = _dd.c_div(m, prod)
    return _dd.c_ldexp(g, e)


@jit
def _gamma(z):
    if z[0] >= 0.5:
        return _gamma_right(z)
    # reflection: Gamma(z) = pi / (sin(pi z) Gamma(1 - z))
    one_minus = _dd.c_add_d(_dd.c_neg(z), 1.0)
    den = _dd.c_mul(_dd.c_sinpi(z), _gamma_right(one_minus))
    return _dd.c_div((_dd.PI_HI, _dd.PI_LO, 0.0, 0.0), den)


def gamma(z: Scalar) -> ComplexEP:
    """Gamma function to about 30 digits for moderate |z|."""
    z = ComplexEP.coerce(z)
    if z.nearest_nonpositive_integer() is not None:
        raise PoleError(f"gamma has a pole at {complex(z)}")
    if abs(z) > 1e3:
        raise ParameterError("gamma is only supported for |z| <= 1000")
    if z.is_real() and z.re[1] == 0.0 and z.real.is_integer() and 0 < z.real <= _EXACT_FACTORIAL:
        return ComplexEP.from_parts(math.factorial(int(z.real) - 1))
    out = ComplexEP(*_gamma(z.parts))
    if not out.is_finite():
        raise RangeError(f"gamma({complex(z)}) is not representable")
    return out
