"""Double-double kernels.

A real extended-precision value is a pair ``(hi, lo)`` of binary64 floats
with ``|lo| <= ulp(hi)/2``; a complex one is the 4-tuple
``(re_hi, re_lo, im_hi, im_lo)``.  Every function here is compiled with
numba so the hot summation loops in :mod:`pfq.series` and
:mod:`pfq.identities` can call them without leaving machine code.

Setting the environment variable ``PFQ_PRECISION=binary64`` before import
degrades the error-free transformations to plain binary64 operations (all
``lo`` words stay zero).  That mode exists for speed comparisons only.
"""

from __future__ import annotations

import math
import os
from fractions import Fraction

import numba as nb

PRECISION = os.environ.get("PFQ_PRECISION", "double-double").strip().lower()
if PRECISION not in ("double-double", "binary64"):
    raise ImportError(f"PFQ_PRECISION must be 'double-double' or 'binary64', got {PRECISION!r}")
EXTENDED = PRECISION == "double-double"

# Cached machine code does not record which primitive set it was built
# against, so only the default mode is cached.
jit = nb.njit(cache=EXTENDED, nogil=True)

EPS = 2.0**-104 if EXTENDED else 2.0**-53
_SPLITTER = 134217729.0  # 2**27 + 1


def _dd_const(text: str) -> tuple[float, float]:
    exact = Fraction(text)
    hi = float(exact)
    return hi, float(exact - Fraction(hi))


PI_HI, PI_LO = _dd_const("3.14159265358979323846264338327950288419716939937510582097494")
PIO2_HI, PIO2_LO = _dd_const("1.57079632679489661923132169163975144209858469968755291048747")
LN2_HI, LN2_LO = _dd_const("0.693147180559945309417232121458176568075500134360255254120680")
HALF_LN_2PI_HI, HALF_LN_2PI_LO = _dd_const(
    "0.918938533204672741780329736405617639861397473637783412817152"
)

if EXTENDED:

    @jit
    def two_sum(a, b):
        s = a + b
        bb = s - a
        return s, (a - (s - bb)) + (b - bb)

    @jit
    def quick_two_sum(a, b):
        s = a + b
        return s, b - (s - a)

    @jit
    def two_prod(a, b):
        p = a * b
        t = _SPLITTER * a
        ah = t - (t - a)
        al = a - ah
        t = _SPLITTER * b
        bh = t - (t - b)
        bl = b - bh
        return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl

else:

    @jit
    def two_sum(a, b):
        return a + b, 0.0

    @jit
    def quick_two_sum(a, b):
        return a + b, 0.0

    @jit
    def two_prod(a, b):
        return a * b, 0.0


# ---------------------------------------------------------------------------
# real double-double
# ---------------------------------------------------------------------------


@jit
def dd_add(a, b):
    s, e = two_sum(a[0], b[0])
    t, f = two_sum(a[1], b[1])
    e += t
    s, e = quick_two_sum(s, e)
    e += f
    return quick_two_sum(s, e)


@jit
def dd_neg(a):
    return -a[0], -a[1]


@jit
def dd_sub(a, b):
    return dd_add(a, (-b[0], -b[1]))


@jit
def dd_add_d(a, b):
    s, e = two_sum(a[0], b)
    e += a[1]
    return quick_two_sum(s, e)


@jit
def dd_mul(a, b):
    p, e = two_prod(a[0], b[0])
    e += a[0] * b[1] + a[1] * b[0]
    return quick_two_sum(p, e)


@jit
def dd_mul_d(a, b):
    p, e = two_prod(a[0], b)
    e += a[1] * b
    return quick_two_sum(p, e)


@jit
def dd_ldexp(a, k):
    return math.ldexp(a[0], k), math.ldexp(a[1], k)


@jit
def dd_div(a, b):
    q1 = a[0] / b[0]
    r = dd_sub(a, dd_mul_d(b, q1))
    q2 = r[0] / b[0]
    r = dd_sub(r, dd_mul_d(b, q2))
    q3 = r[0] / b[0]
    q = quick_two_sum(q1, q2)
    return dd_add_d(q, q3)


@jit
def dd_sqrt(a):
    if a[0] <= 0.0:
        return 0.0, 0.0
    q = math.sqrt(a[0])
    r = dd_sub(a, two_prod(q, q))
    return quick_two_sum(q, r[0] / (2.0 * q))


@jit
def dd_exp(a):
    if a[0] > 709.78:
        return math.inf, 0.0
    if a[0] < -745.2:
        return 0.0, 0.0
    k = round(a[0] / LN2_HI)
    r = dd_sub(a, dd_mul_d((LN2_HI, LN2_LO), float(k)))
    r = dd_ldexp(r, -10)
    # expm1(r) by Taylor; |r| <= 3.4e-4 so ten terms reach 1e-35
    s = r
    p = r
    for i in range(2, 30):
        p = dd_mul(p, r)
        p = dd_div(p, (float(i), 0.0))
        s = dd_add(s, p)
        if abs(p[0]) < 1e-36 * abs(s[0]) + 1e-300:
            break
    for _ in range(10):
        s = dd_add(dd_ldexp(s, 1), dd_mul(s, s))
    s = dd_add_d(s, 1.0)
    return dd_ldexp(s, int(k))


@jit
def dd_log(a):
    # one Newton step on exp(y) = a from the binary64 guess
    y = (math.log(a[0]), 0.0)
    e = dd_exp(dd_neg(y))
    return dd_add_d(dd_add(y, dd_mul(a, e)), -1.0)


@jit
def dd_sincos(a):
    """(sin a, cos a) with reduction by multiples of pi/2."""
    k = round(a[0] / PIO2_HI)
    r = dd_sub(a, dd_mul_d((PIO2_HI, PIO2_LO), float(k)))
    r2 = dd_mul(r, r)
    # Taylor series on |r| <= pi/4
    s = r
    c = (1.0, 0.0)
    ts = r
    tc = (1.0, 0.0)
    for i in range(1, 40):
        ts = dd_div(dd_mul(ts, r2), (float(-(2 * i) * (2 * i + 1)), 0.0))
        tc = dd_div(dd_mul(tc, r2), (float(-(2 * i - 1) * (2 * i)), 0.0))
        s = dd_add(s, ts)
        c = dd_add(c, tc)
        if abs(ts[0]) < 1e-36 and abs(tc[0]) < 1e-36:
            break
    q = int(k) % 4
    if q == 0:
        return s, c
    if q == 1:
        return c, dd_neg(s)
    if q == 2:
        return dd_neg(s), dd_neg(c)
    return dd_neg(c), s


@jit
def dd_atan2(y, x):
    if x[0] == 0.0 and y[0] == 0.0:
        return 0.0, 0.0
    z = (math.atan2(y[0], x[0]), 0.0)
    r = dd_sqrt(dd_add(dd_mul(x, x), dd_mul(y, y)))
    xx = dd_div(x, r)
    yy = dd_div(y, r)
    s, c = dd_sincos(z)
    if abs(xx[0]) > abs(yy[0]):
        return dd_add(z, dd_div(dd_sub(yy, s), c))
    return dd_sub(z, dd_div(dd_sub(xx, c), s))


@jit
def dd_sinhcosh(a):
    if abs(a[0]) < 0.5:
        a2 = dd_mul(a, a)
        sh = a
        t = a
        for i in range(1, 40):
            t = dd_div(dd_mul(t, a2), (float((2 * i) * (2 * i + 1)), 0.0))
            sh = dd_add(sh, t)
            if abs(t[0]) < 1e-36 * abs(sh[0]):
                break
        ch = dd_sqrt(dd_add_d(dd_mul(sh, sh), 1.0))
        return sh, ch
    e = dd_exp(a)
    ei = dd_div((1.0, 0.0), e)
    return dd_ldexp(dd_sub(e, ei), -1), dd_ldexp(dd_add(e, ei), -1)


# ---------------------------------------------------------------------------
# complex double-double
# ---------------------------------------------------------------------------


@jit
def c_re(a):
    return a[0], a[1]


@jit
def c_im(a):
    return a[2], a[3]


@jit
def c_make(re, im):
    return re[0], re[1], im[0], im[1]


@jit
def c_add(a, b):
    r = dd_add((a[0], a[1]), (b[0], b[1]))
    i = dd_add((a[2], a[3]), (b[2], b[3]))
    return r[0], r[1], i[0], i[1]


@jit
def c_sub(a, b):
    r = dd_sub((a[0], a[1]), (b[0], b[1]))
    i = dd_sub((a[2], a[3]), (b[2], b[3]))
    return r[0], r[1], i[0], i[1]


@jit
def c_neg(a):
    return -a[0], -a[1], -a[2], -a[3]


@jit
def c_conj(a):
    return a[0], a[1], -a[2], -a[3]


@jit
def c_add_d(a, x):
    r = dd_add_d((a[0], a[1]), x)
    return r[0], r[1], a[2], a[3]


@jit
def c_mul(a, b):
    ar = (a[0], a[1])
    ai = (a[2], a[3])
    br = (b[0], b[1])
    bi = (b[2], b[3])
    r = dd_sub(dd_mul(ar, br), dd_mul(ai, bi))
    i = dd_add(dd_mul(ar, bi), dd_mul(ai, br))
    return r[0], r[1], i[0], i[1]


@jit
def c_mul_d(a, x):
    r = dd_mul_d((a[0], a[1]), x)
    i = dd_mul_d((a[2], a[3]), x)
    return r[0], r[1], i[0], i[1]


@jit
def c_mul_dd(a, x):
    r = dd_mul((a[0], a[1]), x)
    i = dd_mul((a[2], a[3]), x)
    return r[0], r[1], i[0], i[1]


@jit
def c_ldexp(a, k):
    return math.ldexp(a[0], k), math.ldexp(a[1], k), math.ldexp(a[2], k), math.ldexp(a[3], k)


@jit
def c_abs2(a):
    ar = (a[0], a[1])
    ai = (a[2], a[3])
    return dd_add(dd_mul(ar, ar), dd_mul(ai, ai))


@jit
def c_div(a, b):
    br = (b[0], b[1])
    bi = (b[2], b[3])
    # rescale the divisor by a power of two so |b|^2 cannot overflow
    k = math.frexp(max(abs(b[0]), abs(b[2])))[1]
    br = dd_ldexp(br, -k)
    bi = dd_ldexp(bi, -k)
    den = dd_add(dd_mul(br, br), dd_mul(bi, bi))
    ar = (a[0], a[1])
    ai = (a[2], a[3])
    r = dd_div(dd_add(dd_mul(ar, br), dd_mul(ai, bi)), den)
    i = dd_div(dd_sub(dd_mul(ai, br), dd_mul(ar, bi)), den)
    return math.ldexp(r[0], -k), math.ldexp(r[1], -k), math.ldexp(i[0], -k), math.ldexp(i[1], -k)


@jit
def c_absf(a):
    """Magnitude rounded to binary64; used for stopping decisions only."""
    return math.hypot(a[0] + a[1], a[2] + a[3])


@jit
def c_exp(a):
    m = dd_exp((a[0], a[1]))
    s, c = dd_sincos((a[2], a[3]))
    r = dd_mul(m, c)
    i = dd_mul(m, s)
    return r[0], r[1], i[0], i[1]


@jit
def c_exp_split(a):
    """exp(a) as (mantissa, k) with exp(a) = mantissa * 2**k, overflow-free."""
    k = round(a[0] / LN2_HI)
    r = dd_sub((a[0], a[1]), dd_mul_d((LN2_HI, LN2_LO), float(k)))
    m = c_exp((r[0], r[1], a[2], a[3]))
    return m, int(k)


@jit
def c_log(a):
    ar = (a[0], a[1])
    ai = (a[2], a[3])
    k = math.frexp(max(abs(a[0]), abs(a[2])))[1]
    sr = dd_ldexp(ar, -k)
    si = dd_ldexp(ai, -k)
    m2 = dd_add(dd_mul(sr, sr), dd_mul(si, si))
    lr = dd_add(dd_ldexp(dd_log(m2), -1), dd_mul_d((LN2_HI, LN2_LO), float(k)))
    li = dd_atan2(ai, ar)
    return lr[0], lr[1], li[0], li[1]


@jit
def c_pow(a, b):
    """Principal branch a**b."""
    return c_exp(c_mul(b, c_log(a)))


@jit
def c_sinpi(a):
    """sin(pi*a) with the integer part removed before scaling by pi."""
    n = round(a[0])
    x = dd_add_d((a[0], a[1]), -float(n))
    x = dd_mul(x, (PI_HI, PI_LO))
    y = dd_mul((a[2], a[3]), (PI_HI, PI_LO))
    s, c = dd_sincos(x)
    sh, ch = dd_sinhcosh(y)
    r = dd_mul(s, ch)
    i = dd_mul(c, sh)
    if int(n) % 2 != 0:
        return -r[0], -r[1], -i[0], -i[1]
    return r[0], r[1], i[0], i[1]


@jit
def c_poch(a, n):
    """Rising factorial a(a+1)...(a+n-1) by direct product."""
    p = (1.0, 0.0, 0.0, 0.0)
    for k in range(n):
        p = c_mul(p, c_add_d(a, float(k)))
    return p


@jit
def c_isfinite(a):
    return math.isfinite(a[0]) and math.isfinite(a[1]) and math.isfinite(a[2]) and math.isfinite(a[3])
