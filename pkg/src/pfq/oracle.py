"""Integral representations used to cross-check the series evaluators.

Euler (Beta) integral, lowering the order by one::

    F(a_1..a_p, a; b_1..b_q, b; x)
        = G(b)/(G(a) G(b-a)) * int_0^1 t^(a-1) (1-t)^(b-a-1) F(a_1..a_p; b_1..b_q; x t) dt

valid for Re(b) > Re(a) > 0, and the Laplace integral raising pFp to p+1Fp::

    F(a_0, a; b; x) = 1/G(a_0) * int_0^inf t^(a_0-1) e^(-t) F(a; b; x t) dt

valid for Re(a_0) > 0 and |x| < 1.

Both are evaluated with Gauss rules built here, never by the summation
kernels they are meant to check (the inner function is a lower-order series
at a scaled argument).  Near an endpoint with power s^(c-1) the remaining
factor is expanded in powers of s and integrated term by term, which is
exact for any Re(c) > 0 and any Im(c); Gauss-Legendre panels cover the
rest, where the integrand is analytic.
"""

from __future__ import annotations

import enum
import math
import threading
from dataclasses import dataclass, field

import numpy as np

from . import _dd
from ._dd import jit
from .errors import ConvergenceError, DomainError, ParameterError, RangeError
from .numerics import EPS, ComplexEP, c_neumaier, gamma
from .series import (
    DEFAULT_POLICY,
    MAX_ORDER,
    NONFINITE,
    EvalResult,
    HyperSpec,
    TruncationPolicy,
    pack_denominators,
    pack_numerators,
    sum_series,
)

MIN_ORDER = 1
MAX_RULE_ORDER = 512
NEWTON_MAX_ITER = 200

DEFAULT_LEGENDRE_ORDER = 128
DEFAULT_LAGUERRE_ORDER = 96
# relative agreement demanded between successive quadrature orders
DEFAULT_QUAD_TOL = 1e-12

# endpoint caps: [0, EULER_CAP] on the left; on the right the cap is also
# kept below (1-|x|)/(4|x|) so the Taylor series of F about x converges
# geometrically.  Laplace uses a cap [0, LAPLACE_CAP].
EULER_CAP = 0.25
LAPLACE_CAP = 1.0
CAP_MAX_TERMS = 2000
# inner series in the right cap are derivatives of F and need longer sums near |x| = 1
CAP_SERIES_MAX_ORDER = 100_000

# Laplace panels: [0, 1] cap, [1, V] linear, [V, inf) Laguerre with
# V = LAPLACE_SPLIT / kappa where exp(-kappa t) is the slowest decay of the
# integrand.  Laguerre nodes with v > LAPLACE_TAIL_CUT are dropped: the
# integrand there is below exp(-(LAPLACE_SPLIT + LAPLACE_TAIL_CUT)).
LAPLACE_SPLIT = 20.0
LAPLACE_TAIL_CUT = 40.0


class RuleKind(str, enum.Enum):
    LEGENDRE_01 = "legendre_01"
    LAGUERRE_0INF = "laguerre_0inf"

    @classmethod
    def parse(cls, value) -> "RuleKind":
        if isinstance(value, RuleKind):
            return value
        try:
            return cls(str(value).lower().replace("-", "_"))
        except ValueError:
            raise ParameterError(f"unknown rule kind {value!r}; expected legendre_01 or laguerre_0inf") from None


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Gauss nodes as double-double pairs.

    ``abscissas`` and ``weights`` have shape ``(order, 2)`` (hi, lo).  For
    ``laguerre_0inf`` the stored weights are scaled, ``w_i * exp(t_i)``, so
    the rule integrates ``int_0^inf f(t) dt ~ sum W_i f(t_i)`` without
    underflow; :attr:`nodes` reports the unscaled weights.
    """

    kind: RuleKind
    order: int
    abscissas: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def nodes(self) -> list[tuple[float, float]]:
        out = []
        for (xh, xl), (wh, wl) in zip(self.abscissas, self.weights):
            x = xh + xl
            w = wh + wl
            if self.kind is RuleKind.LAGUERRE_0INF:
                w = math.exp(math.log(w) - x)
            out.append((x, w))
        return out

    def abscissa_values(self) -> np.ndarray:
        return self.abscissas[:, 0] + self.abscissas[:, 1]

    def weight_sum(self) -> float:
        """Sum of the (unscaled) weights, accumulated in double-double."""
        total = (0.0, 0.0)
        for x, w in self.nodes_dd():
            total = _dd.dd_add(total, w)
        return total[0] + total[1]

    def nodes_dd(self):
        """(abscissa, weight) double-double pairs with unscaled weights."""
        for x, w in zip(self.abscissas, self.weights):
            x = (float(x[0]), float(x[1]))
            w = (float(w[0]), float(w[1]))
            if self.kind is RuleKind.LAGUERRE_0INF:
                w = _dd.dd_mul(w, _dd.dd_exp(_dd.dd_neg(x)))
            yield x, w


# ---------------------------------------------------------------------------
# rule construction
# ---------------------------------------------------------------------------


@jit
def _newton_done(step, prev, scale):
    """Converged at full precision, or stalled on the rounding floor."""
    if step <= 16.0 * _dd.EPS * scale:
        return True
    return step <= 1e-20 * scale and step >= 0.5 * prev


@jit
def _legendre(n, x):
    """(P_n(x), P_{n-1}(x)) by the three-term recurrence."""
    p0 = (1.0, 0.0)
    p1 = x
    for k in range(2, n + 1):
        t = _dd.dd_mul_d(_dd.dd_mul(x, p1), 2.0 * k - 1.0)
        t = _dd.dd_sub(t, _dd.dd_mul_d(p0, k - 1.0))
        p0 = p1
        p1 = _dd.dd_div(t, (float(k), 0.0))
    return p1, p0


@jit
def _legendre_rule(n, guesses):
    """Newton-refine roots of P_n on [-1, 1]; map the rule to (0, 1)."""
    t = np.zeros((n, 2))
    w = np.zeros((n, 2))
    for i in range(n):
        x = (guesses[i], 0.0)
        done = 0
        prev = math.inf
        for it in range(NEWTON_MAX_ITER):
            pn, pm = _legendre(n, x)
            # P_n' = n (x P_n - P_{n-1}) / (x^2 - 1)
            num = _dd.dd_mul_d(_dd.dd_sub(_dd.dd_mul(x, pn), pm), float(n))
            den = _dd.dd_add_d(_dd.dd_mul(x, x), -1.0)
            dp = _dd.dd_div(num, den)
            dx = _dd.dd_div(pn, dp)
            x = _dd.dd_sub(x, dx)
            if _newton_done(abs(dx[0]), prev, 1.0):
                done += 1
                if done == 2:
                    break
            prev = abs(dx[0])
        else:
            return t, w, i
        pn, pm = _legendre(n, x)
        num = _dd.dd_mul_d(_dd.dd_sub(_dd.dd_mul(x, pn), pm), float(n))
        den = _dd.dd_add_d(_dd.dd_mul(x, x), -1.0)
        dp = _dd.dd_div(num, den)
        # weight on [-1,1]: 2 / ((1 - x^2) P_n'^2); halved for (0,1)
        one_m = _dd.dd_neg(den)
        wi = _dd.dd_div((1.0, 0.0), _dd.dd_mul(one_m, _dd.dd_mul(dp, dp)))
        ti = _dd.dd_ldexp(_dd.dd_add_d(x, 1.0), -1)
        t[i, 0], t[i, 1] = ti
        w[i, 0], w[i, 1] = wi
    return t, w, -1


@jit
def _laguerre(n, x):
    """(L_n(x), L_{n-1}(x), e) with the true values scaled by 2**-e."""
    l0 = (1.0, 0.0)
    l1 = _dd.dd_sub((1.0, 0.0), x)
    e = 0
    for k in range(2, n + 1):
        a = _dd.dd_mul(_dd.dd_sub((2.0 * k - 1.0, 0.0), x), l1)
        a = _dd.dd_sub(a, _dd.dd_mul_d(l0, k - 1.0))
        l0 = l1
        l1 = _dd.dd_div(a, (float(k), 0.0))
        if abs(l1[0]) > 1e200:
            l0 = _dd.dd_ldexp(l0, -600)
            l1 = _dd.dd_ldexp(l1, -600)
            e += 600
    return l1, l0, e


@jit
def _laguerre_rule(n, guesses):
    """Newton-refine roots of L_n; weights scaled by exp(t)."""
    t = np.zeros((n, 2))
    w = np.zeros((n, 2))
    for i in range(n):
        x = (guesses[i], 0.0)
        done = 0
        prev = math.inf
        for it in range(NEWTON_MAX_ITER):
            ln, lm, e = _laguerre(n, x)
            # L_n / L_n' = x L_n / (n (L_n - L_{n-1})), independent of scaling
            d = _dd.dd_mul_d(_dd.dd_sub(ln, lm), float(n))
            dx = _dd.dd_div(_dd.dd_mul(x, ln), d)
            x = _dd.dd_sub(x, dx)
            if _newton_done(abs(dx[0]), prev, max(1.0, abs(x[0]))):
                done += 1
                if done == 2:
                    break
            prev = abs(dx[0])
        else:
            return t, w, i
        ln, lm, e = _laguerre(n, x)
        d = _dd.dd_mul_d(_dd.dd_sub(ln, lm), float(n))
        # W = w e^x = x e^x / (n (L_n - L_{n-1}))^2, formed in logs
        ad = d if d[0] > 0 else _dd.dd_neg(d)
        lw = _dd.dd_add(_dd.dd_log(x), x)
        lw = _dd.dd_sub(lw, _dd.dd_ldexp(_dd.dd_log(ad), 1))
        lw = _dd.dd_sub(lw, _dd.dd_mul_d((_dd.LN2_HI, _dd.LN2_LO), 2.0 * e))
        wi = _dd.dd_exp(lw)
        t[i, 0], t[i, 1] = x
        w[i, 0], w[i, 1] = wi
    return t, w, -1


def _golub_welsch_guesses(kind: RuleKind, n: int) -> np.ndarray:
    """Binary64 eigenvalues of the Jacobi matrix, sorted ascending."""
    k = np.arange(1, n, dtype=np.float64)
    if kind is RuleKind.LEGENDRE_01:
        diag = np.zeros(n)
        off = k / np.sqrt(4.0 * k * k - 1.0)
    else:
        diag = 2.0 * np.arange(n) + 1.0
        off = k
    jac = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
    return np.sort(np.linalg.eigvalsh(jac))


_RULES: dict[tuple[RuleKind, int], QuadratureRule] = {}
_RULES_LOCK = threading.Lock()


def build_rule(kind, order: int) -> QuadratureRule:
    """Gauss-Legendre on (0,1) or Gauss-Laguerre on (0,inf), cached per (kind, order)."""
    kind = RuleKind.parse(kind)
    if isinstance(order, bool) or not isinstance(order, (int, np.integer)):
        raise ParameterError(f"rule order must be an integer, got {order!r}")
    order = int(order)
    if not MIN_ORDER <= order <= MAX_RULE_ORDER:
        raise ParameterError(f"rule order must be in [{MIN_ORDER}, {MAX_RULE_ORDER}], got {order}")
    key = (kind, order)
    rule = _RULES.get(key)
    if rule is not None:
        return rule
    guesses = _golub_welsch_guesses(kind, order)
    if kind is RuleKind.LEGENDRE_01:
        t, w, bad = _legendre_rule(order, guesses)
    else:
        t, w, bad = _laguerre_rule(order, guesses)
    if bad >= 0:
        raise ConvergenceError(
            f"Newton iteration for node {bad} of {kind.value}({order}) did not converge in {NEWTON_MAX_ITER} steps"
        )
    t.setflags(write=False)
    w.setflags(write=False)
    rule = QuadratureRule(kind, order, t, w)
    with _RULES_LOCK:
        return _RULES.setdefault(key, rule)


# ---------------------------------------------------------------------------
# panels
# ---------------------------------------------------------------------------


@jit
def _affine_panel(s, ws, lo, width):
    """t = lo + width * s with ln t, ln(1 - t) (0 where t >= 1) and W = ws * width."""
    n = s.shape[0]
    t = np.zeros((n, 2))
    lt = np.zeros((n, 2))
    l1t = np.zeros((n, 2))
    W = np.zeros((n, 2))
    for i in range(n):
        ti = _dd.dd_add(lo, _dd.dd_mul(width, (s[i, 0], s[i, 1])))
        wi = _dd.dd_mul(width, (ws[i, 0], ws[i, 1]))
        t[i, 0], t[i, 1] = ti
        lt[i, 0], lt[i, 1] = _dd.dd_log(ti)
        if ti[0] < 1.0:
            l1t[i, 0], l1t[i, 1] = _dd.dd_log(_dd.dd_sub((1.0, 0.0), ti))
        W[i, 0], W[i, 1] = wi
    return t, lt, l1t, W


@jit
def _row(arr, k):
    return arr[k, 0], arr[k, 1], arr[k, 2], arr[k, 3]


@jit
def _cap_sum(num, den, x, mode, beta, nu, delta, reflected, tol, kmax, quiet, series_max):
    """sum_k c_k delta^k / (nu + k) where g(s) = sum_k c_k s^k.

    With the factor delta^nu this is int_0^delta s^(nu-1) g(s) ds.  g is the
    product e(s) f(s): e(s) = (1-s)^beta (mode 0) or exp(-s) (mode 1);
    f(s) = F(num; den; x s), or F(num; den; x (1-s)) when ``reflected``, whose
    Taylor coefficients are (-x)^k (num)_k / ((den)_k k!) F(num+k; den+k; x).

    Returns (sum, error bound, inner terms, status).
    """
    f = np.zeros((kmax + 1, 4))
    e = np.zeros((kmax + 1, 4))
    ferr = np.zeros(kmax + 1)
    z = _dd.c_neg(x) if reflected else x
    r = (1.0, 0.0, 0.0, 0.0)
    total = (0.0, 0.0, 0.0, 0.0)
    comp = total
    dpow = (1.0, 0.0)
    err = 0.0
    abs_sum = 0.0
    terms = 0
    run = 0
    run_sum = 0.0
    nk = num.copy()
    dk = den.copy()
    for k in range(kmax + 1):
        fk_ = k * 1.0
        if k > 0:
            pn = z
            for i in range(num.shape[0]):
                pn = _dd.c_mul(pn, _dd.c_add_d(_row(num, i), fk_ - 1.0))
            pd = (fk_, 0.0, 0.0, 0.0)
            for i in range(den.shape[0]):
                pd = _dd.c_mul(pd, _dd.c_add_d(_row(den, i), fk_ - 1.0))
            r = _dd.c_div(_dd.c_mul(r, pn), pd)
            dpow = _dd.dd_mul(dpow, delta)
        fk = r
        if reflected and _dd.c_absf(r) != 0.0:
            for i in range(num.shape[0]):
                nk[i, 0], nk[i, 1] = _dd.dd_add((num[i, 0], num[i, 1]), (fk_, 0.0))
            for i in range(den.shape[0]):
                dk[i, 0], dk[i, 1] = _dd.dd_add((den[i, 0], den[i, 1]), (fk_, 0.0))
            val, trunc, fabs, nt, st = sum_series(nk, dk, x, tol, series_max, quiet)
            terms += nt
            if st >= MAX_ORDER:
                return _dd.c_add(total, comp), err, terms, st
            fk = _dd.c_mul(r, val)
            ferr[k] = _dd.c_absf(r) * (trunc + 4.0 * _dd.EPS * fabs)
        f[k, 0], f[k, 1], f[k, 2], f[k, 3] = fk
        if k == 0:
            ek = (1.0, 0.0, 0.0, 0.0)
        elif mode == 0:
            ek = _dd.c_div(_dd.c_mul(_row(e, k - 1), _dd.c_sub((fk_ - 1.0, 0.0, 0.0, 0.0), beta)), (fk_, 0.0, 0.0, 0.0))
        else:
            ek = _dd.c_div(_dd.c_neg(_row(e, k - 1)), (fk_, 0.0, 0.0, 0.0))
        e[k, 0], e[k, 1], e[k, 2], e[k, 3] = ek
        ck = (0.0, 0.0, 0.0, 0.0)
        cerr = 0.0
        for j in range(k + 1):
            ck = _dd.c_add(ck, _dd.c_mul(_row(f, j), _row(e, k - j)))
            cerr += ferr[j] * _dd.c_absf(_row(e, k - j))
        scale = _dd.c_mul_dd(_dd.c_div(ck, _dd.c_add_d(nu, fk_)), dpow)
        total, comp = c_neumaier(total, comp, scale)
        mag = _dd.c_absf(scale)
        if not math.isfinite(mag):
            return _dd.c_add(total, comp), err, terms, NONFINITE
        abs_sum += mag
        err += cerr * (dpow[0] / _dd.c_absf(_dd.c_add_d(nu, fk_)))
        if mag < tol * _dd.c_absf(total):
            run += 1
            run_sum += mag
        else:
            run = 0
            run_sum = 0.0
        if run >= quiet:
            err += run_sum + 2.0 * mag + 4.0 * _dd.EPS * abs_sum
            return _dd.c_add(total, comp), err, terms, 0
    return _dd.c_add(total, comp), err, terms, MAX_ORDER


@jit
def _quad_sum(t, lt, l1t, W, alpha, beta, decay, num, den, x, tol, max_order, quiet):
    """sum_i W_i exp(alpha ln t_i + beta ln(1-t_i) - decay t_i) F(num; den; x t_i).

    Returns (sum, inner error bound, inner terms, status).
    """
    total = (0.0, 0.0, 0.0, 0.0)
    comp = total
    err = 0.0
    terms = 0
    for i in range(t.shape[0]):
        ti = (t[i, 0], t[i, 1])
        e = _dd.c_mul_dd(alpha, (lt[i, 0], lt[i, 1]))
        e = _dd.c_add(e, _dd.c_mul_dd(beta, (l1t[i, 0], l1t[i, 1])))
        dt = _dd.dd_mul_d(ti, -decay)
        e = _dd.c_add(e, (dt[0], dt[1], 0.0, 0.0))
        f = _dd.c_mul_dd(_dd.c_exp(e), (W[i, 0], W[i, 1]))
        val, trunc, fabs, nt, st = sum_series(num, den, _dd.c_mul_dd(x, ti), tol, max_order, quiet)
        terms += nt
        if st >= MAX_ORDER:
            return _dd.c_add(total, comp), err, terms, st
        total, comp = c_neumaier(total, comp, _dd.c_mul(f, val))
        err += _dd.c_absf(f) * (trunc + 4.0 * _dd.EPS * fabs)
    return _dd.c_add(total, comp), err, terms, 0



@dataclass
class _Panel:
    t: np.ndarray
    lt: np.ndarray
    l1t: np.ndarray
    W: np.ndarray


def _euler_right_cap(x: ComplexEP, inner_entire: bool) -> float:
    # the derivative series of F about x sum terms of size (1-|x|)^-k, so the
    # cap must shrink with 1 - |x| (not just |1 - x|) to avoid cancellation
    if inner_entire or x.is_zero():
        return EULER_CAP
    cap = min(EULER_CAP, (1.0 - abs(x)) / (4.0 * abs(x)))
    # snap so the cap and the last panel meet exactly at 1 - cap
    return 1.0 - (1.0 - cap)


def _euler_intervals(right_cap: float) -> list[tuple[float, float]]:
    """[EULER_CAP, 1/2], then panels toward 1 whose distance to t = 1 halves each step."""
    out = [(EULER_CAP, 0.5)]
    hi = 1.0 - right_cap
    lo = 1.0 - 2.0 * right_cap
    while lo > 0.5:
        out.append((lo, hi))
        hi, lo = lo, 1.0 - 2.0 * (1.0 - lo)
    out.append((0.5, hi))
    return sorted(out)


def _euler_panels(rule: QuadratureRule, right_cap: float) -> list[_Panel]:
    s, ws = rule.abscissas, rule.weights
    panels = []
    for lo, hi in _euler_intervals(right_cap):
        t, lt, l1t, W = _affine_panel(s, ws, (lo, 0.0), _dd.dd_sub((hi, 0.0), (lo, 0.0)))
        panels.append(_Panel(t, lt, l1t, W))
    return panels


def _laplace_panels(leg: QuadratureRule, lag: QuadratureRule, kappa: float) -> list[_Panel]:
    s, ws = leg.abscissas, leg.weights
    split = LAPLACE_SPLIT / kappa
    t, lt, _, W = _affine_panel(s, ws, (LAPLACE_CAP, 0.0), (split - LAPLACE_CAP, 0.0))
    panels = [_Panel(t, lt, np.zeros_like(t), W)]
    keep = lag.abscissas[:, 0] <= LAPLACE_TAIL_CUT
    v, wv = np.ascontiguousarray(lag.abscissas[keep]), np.ascontiguousarray(lag.weights[keep])
    inv = _dd.dd_div((1.0, 0.0), (kappa, 0.0))
    t, lt, _, W = _affine_panel(v, wv, (split, 0.0), inv)
    panels.append(_Panel(t, lt, np.zeros_like(t), W))
    return panels


def _cap(num, den, x: ComplexEP, mode: int, beta: ComplexEP, nu: ComplexEP, delta: float,
         reflected: bool, policy: TruncationPolicy):
    """delta^nu * _cap_sum(...) as (value, error, inner terms)."""
    val, err, terms, status = _cap_sum(
        num, den, x.parts, mode, beta.parts, nu.parts, (delta, 0.0), reflected,
        policy.tol, CAP_MAX_TERMS, policy.quiet_shells, max(policy.max_order, CAP_SERIES_MAX_ORDER),
    )
    if status == MAX_ORDER:
        raise ConvergenceError("endpoint series did not converge")
    if status != 0 or not _dd.c_isfinite(val):
        raise RangeError("endpoint series overflowed")
    factor = (nu * ComplexEP(delta).log()).exp()
    return factor * ComplexEP(*val), abs(factor) * err, terms


def _integrate(panels, alpha, beta, decay, num, den, x, policy):
    total = ComplexEP()
    err = 0.0
    terms = 0
    nodes = 0
    for pan in panels:
        val, e, nt, status = _quad_sum(
            pan.t, pan.lt, pan.l1t, pan.W, alpha, beta, decay, num, den, x,
            policy.tol, policy.max_order, policy.quiet_shells,
        )
        if status == MAX_ORDER:
            raise ConvergenceError(f"inner series did not converge within {policy.max_order} terms")
        if status != 0 or not _dd.c_isfinite(val):
            raise RangeError("integrand overflowed")
        total = total + ComplexEP(*val)
        err += e
        terms += nt
        nodes += pan.t.shape[0]
    return total, err, terms, nodes


def _with_doubling(compute, order: int, tol: float, max_order: int = MAX_RULE_ORDER):
    """Run ``compute(order)``, checked against half the order; on failure double once.

    Returns (value, inner_err, terms, nodes, order_used, change, doubled).
    """
    coarse = compute(max(MIN_ORDER, order // 2))
    fine = compute(order)
    change = abs(fine[0] - coarse[0])
    scale = max(abs(fine[0]), 1e-300)
    if change <= tol * scale:
        return fine + (order, change, False)
    if 2 * order > max_order:
        raise ConvergenceError(
            f"quadrature check failed at order {order} (relative change {change / scale:.3g}) "
            f"and the order cannot be doubled past {max_order}"
        )
    finer = compute(2 * order)
    change = abs(finer[0] - fine[0])
    scale = max(abs(finer[0]), 1e-300)
    if change > 10.0 * tol * scale:
        raise ConvergenceError(
            f"doubling the quadrature order to {2 * order} changed the result by {change / scale:.3g} (relative)"
        )
    return finer + (2 * order, change, True)


def _result(value: ComplexEP, prefactor: ComplexEP, parts, extra) -> EvalResult:
    total, inner_err, terms, nodes, order, change, doubled = parts
    out = prefactor * total
    mag = abs(prefactor)
    extra = dict(extra, order=order, doubled=doubled, quadrature_change=mag * change, series_terms=terms)
    return EvalResult(
        value=out,
        abs_error_estimate=mag * (change + inner_err) + 8.0 * EPS * abs(out),
        terms_used=nodes,
        truncation_order=order,
        terminated_exactly=False,
        extra=extra,
    )


def euler_integral(
    spec: HyperSpec,
    rule: QuadratureRule | None = None,
    policy: TruncationPolicy = DEFAULT_POLICY,
    tol: float = DEFAULT_QUAD_TOL,
) -> EvalResult:
    """p+1Fp+1 or p+2Fp+1 via the Beta integral over the last parameter pair.

    ``rule`` fixes the Legendre order (default 128); the result is checked
    against half that order and the order is doubled once if they disagree
    by more than ``tol``.
    """
    if spec.argument is None:
        raise ParameterError("HyperSpec has no argument set")
    if spec.q < 1 or spec.p not in (spec.q, spec.q + 1):
        raise ParameterError(f"Euler integral needs p+1Fp+1 or p+2Fp+1, got {spec.p}F{spec.q}")
    a, b = spec.numerator[-1], spec.denominator[-1]
    x = spec.argument
    if not (a.real > 0 and b.real > a.real):
        raise DomainError(
            f"Euler integral requires Re(b) > Re(a) > 0 for the last pair, got a={complex(a)}, b={complex(b)}"
        )
    if spec.p == spec.q + 1 and abs(x) >= 1.0:
        raise DomainError(f"Euler integral of p+2Fp+1 requires |x| < 1, got |x| = {abs(x):.17g}")
    bma = b - a
    num = pack_numerators(spec.numerator[:-1])
    den = pack_denominators(spec.denominator[:-1])
    alpha = (a - 1).parts
    beta = (bma - 1).parts
    right_cap = _euler_right_cap(x, inner_entire=spec.p == spec.q)
    order = DEFAULT_LEGENDRE_ORDER if rule is None else rule.order
    if rule is not None and rule.kind is not RuleKind.LEGENDRE_01:
        raise ParameterError("Euler integral needs a legendre_01 rule")

    left, left_err, left_terms = _cap(num, den, x, 0, bma - 1, a, EULER_CAP, False, policy)
    right, right_err, right_terms = _cap(num, den, x, 0, a - 1, bma, right_cap, True, policy)

    def compute(n):
        panels = _euler_panels(build_rule(RuleKind.LEGENDRE_01, n), right_cap)
        return _integrate(panels, alpha, beta, 0.0, num, den, x.parts, policy)

    total, inner_err, terms, nodes, used, change, doubled = _with_doubling(compute, order, tol)
    parts = (total + left + right, inner_err + left_err + right_err, terms + left_terms + right_terms,
             nodes, used, change, doubled)
    prefactor = gamma(b) / (gamma(a) * gamma(bma))
    return _result(x, prefactor, parts, {"caps": (EULER_CAP, right_cap)})


def laplace_integral(
    spec: HyperSpec,
    rule: QuadratureRule | None = None,
    policy: TruncationPolicy = DEFAULT_POLICY,
    tol: float = DEFAULT_QUAD_TOL,
) -> EvalResult:
    """p+1Fp(a_0, a; b; x) via the Laplace integral over a_0.

    The half line is split into a power-mapped [0, 1], a linear [1, V] and a
    Laguerre tail; ``rule`` sets the Laguerre order (default 96) and the
    Legendre panels use 4/3 of it.
    """
    if spec.argument is None:
        raise ParameterError("HyperSpec has no argument set")
    if spec.p != spec.q + 1:
        raise ParameterError(f"Laplace integral needs p+1Fp, got {spec.p}F{spec.q}")
    a0 = spec.numerator[0]
    x = spec.argument
    if not a0.real > 0:
        raise DomainError(f"Laplace integral requires Re(a_0) > 0, got a_0 = {complex(a0)}")
    if abs(x) >= 1.0:
        raise DomainError(f"Laplace integral requires |x| < 1, got |x| = {abs(x):.17g}")
    if rule is not None and rule.kind is not RuleKind.LAGUERRE_0INF:
        raise ParameterError("Laplace integral needs a laguerre_0inf rule")
    num = pack_numerators(spec.numerator[1:])
    den = pack_denominators(spec.denominator)
    alpha = (a0 - 1).parts
    # slowest decay among exp(-t) and exp(-(1 - x) t)
    kappa = min(1.0, 1.0 - x.real)
    order = DEFAULT_LAGUERRE_ORDER if rule is None else rule.order
    cap, cap_err, cap_terms = _cap(num, den, x, 1, ComplexEP(), a0, LAPLACE_CAP, False, policy)

    def compute(n):
        leg = build_rule(RuleKind.LEGENDRE_01, min(MAX_RULE_ORDER, (4 * n) // 3))
        lag = build_rule(RuleKind.LAGUERRE_0INF, n)
        panels = _laplace_panels(leg, lag, kappa)
        return _integrate(panels, alpha, (0.0, 0.0, 0.0, 0.0), 1.0, num, den, x.parts, policy)

    total, inner_err, terms, nodes, used, change, doubled = _with_doubling(
        compute, order, tol, max_order=(3 * MAX_RULE_ORDER) // 4
    )
    parts = (total + cap, inner_err + cap_err, terms + cap_terms, nodes, used, change, doubled)
    prefactor = 1 / gamma(a0)
    return _result(x, prefactor, parts, {"cap": LAPLACE_CAP, "split": LAPLACE_SPLIT / kappa})
