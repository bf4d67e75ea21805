"""Addition formulas and Kummer/Euler-type transformations as p-fold sums.

All four right-hand sides share one outer structure.  With multi-index
``j = (j_1..j_p)`` and partial sums ``u_0 = 0, u_q = u_{q-1} + j_q`` the
outer coefficient is

    S(u_p) * prod_q (a_q)_{u_{q-1}} (b_q - a_q)_{j_q} / ((b_q)_{u_q} j_q!)

where ``S(n) = z^n / n!`` (addition for pFp, Kummer type; ``z = -x``) or
``S(n) = (a_0)_n z^n / n!`` (addition for p+1Fp, Euler type;
``z = x/(x-1)``).  Each term multiplies an inner hypergeometric function
with parameters shifted by the ``u``.  The product telescopes into

    S(u_p)/u_p! ... = S(u_p) * prod_q A_q[u_{q-1}] B_q[j_q] G_q[u_q]

with ``A_q[n] = (a_q)_n/n!``, ``B_q[n] = (b_q-a_q)_n/n!`` and
``G_q[n] = n!/(b_q)_n``, all polynomially bounded, so no factorial ever
overflows.  Multi-indices are visited shell by shell (fixed ``u_p``).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from . import _dd
from ._dd import jit
from .errors import ConvergenceError, DomainError, ParameterError, PFQError, RangeError
from .numerics import ComplexEP, CompensatedAccumulator, Scalar, c_neumaier, compensated_add, rel_diff
from .series import (
    DEFAULT_POLICY,
    EXACT,
    MAX_ORDER,
    NEAR_INTEGER_TOL,
    EvalResult,
    HyperSpec,
    TruncationPolicy,
    _row,
    eval_series,
    pack_denominators,
    pack_numerators,
    rounding_estimate,
    scale_by_exp,
    snap,
    sum_series,
)

# Looser inner tolerances are never allowed past this, however small the
# outer coefficient.
INNER_TOL_CAP = 1e-3


class Theorem(str, enum.Enum):
    T1 = "T1"  # addition formula, pFp
    T2 = "T2"  # addition formula, p+1Fp
    T3 = "T3"  # Kummer-type transformation, p+1Fp+1
    T4 = "T4"  # Euler-type transformation, p+2Fp+1

    @classmethod
    def parse(cls, value) -> "Theorem":
        if isinstance(value, Theorem):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise ParameterError(f"unknown theorem {value!r}; expected one of t1, t2, t3, t4") from None


# ---------------------------------------------------------------------------
# multi-indices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MultiIndex:
    j: tuple[int, ...]
    u: tuple[int, ...]

    @classmethod
    def from_j(cls, j: Sequence[int]) -> "MultiIndex":
        u = [0]
        for jq in j:
            u.append(u[-1] + int(jq))
        return cls(tuple(int(v) for v in j), tuple(u))

    @property
    def order(self) -> int:
        return self.u[-1]


@jit
def _shell_array(p, order, caps):
    """All j in N^p with sum(j) == order and j_q <= caps[q] (caps < 0: no cap),
    in lexicographic order."""
    # C(order + p - 1, p - 1) bounds the count
    bound = 1
    for k in range(1, p):
        bound = bound * (order + k) // k
    out = np.zeros((bound, p), dtype=np.int64)
    n = 0
    if p == 1:
        if caps[0] < 0 or order <= caps[0]:
            out[0, 0] = order
            n = 1
        return out[:n]
    j = np.zeros(p, dtype=np.int64)
    s = 0
    while True:
        last = order - s
        if last >= 0 and (caps[p - 1] < 0 or last <= caps[p - 1]):
            for k in range(p - 1):
                out[n, k] = j[k]
            out[n, p - 1] = last
            n += 1
        k = p - 2
        while k >= 0:
            j[k] += 1
            s += 1
            if s <= order and (caps[k] < 0 or j[k] <= caps[k]):
                break
            s -= j[k]
            j[k] = 0
            k -= 1
        if k < 0:
            break
    return out[:n]


def _caps_array(p: int, caps: Sequence[int | None] | None) -> np.ndarray:
    if caps is None:
        return np.full(p, -1, dtype=np.int64)
    return np.array([-1 if c is None else int(c) for c in caps], dtype=np.int64)


def enumerate_shells(p: int, order: int, caps: Sequence[int | None] | None = None) -> list[MultiIndex]:
    """Every multi-index of total order ``order``, lexicographic in j.

    Without caps the shell has C(order+p-1, p-1) members.
    """
    if p < 1:
        raise ParameterError(f"p must be >= 1, got {p}")
    if order < 0:
        raise ParameterError(f"order must be >= 0, got {order}")
    arr = _shell_array(p, order, _caps_array(p, caps))
    return [MultiIndex.from_j(row) for row in arr.tolist()]


def iter_multi_indices(p: int, max_order: int) -> Iterator[MultiIndex]:
    for n in range(max_order + 1):
        yield from enumerate_shells(p, n)


# ---------------------------------------------------------------------------
# compiled outer sum
# ---------------------------------------------------------------------------


@jit
def _ratio_tables(a, b, bma, n):
    """A[q,k] = (a_q)_k/k!, B[q,k] = (b_q-a_q)_k/k!, G[q,k] = k!/(b_q)_k for k < n."""
    p = a.shape[0]
    A = np.zeros((p, n, 4))
    B = np.zeros((p, n, 4))
    G = np.zeros((p, n, 4))
    for q in range(p):
        va = (1.0, 0.0, 0.0, 0.0)
        vb = va
        vg = va
        for k in range(n):
            for c in range(4):
                A[q, k, c] = va[c]
                B[q, k, c] = vb[c]
                G[q, k, c] = vg[c]
            fk = float(k)
            kp1 = (fk + 1.0, 0.0, 0.0, 0.0)
            va = _dd.c_div(_dd.c_mul(va, _dd.c_add_d(_row(a, q), fk)), kp1)
            vb = _dd.c_div(_dd.c_mul(vb, _dd.c_add_d(_row(bma, q), fk)), kp1)
            vg = _dd.c_div(_dd.c_mul(vg, kp1), _dd.c_add_d(_row(b, q), fk))
    return A, B, G


@jit
def _shell_factors(z, a0, use_a0, n):
    """S[k] = z^k/k!, times (a0)_k when use_a0."""
    S = np.zeros((n, 4))
    v = (1.0, 0.0, 0.0, 0.0)
    for k in range(n):
        for c in range(4):
            S[k, c] = v[c]
        fk = float(k)
        f = z
        if use_a0:
            f = _dd.c_mul(f, _dd.c_add_d(a0, fk))
        v = _dd.c_div(_dd.c_mul(v, f), (fk + 1.0, 0.0, 0.0, 0.0))
    return S


@jit
def _shell_sum(idx, A, B, G, s_fac, nbase, nshift, dbase, dshift, w, tol_in, err_budget, max_order, quiet):
    """Sum one shell of the outer series.

    ``nshift[k] >= 0`` means inner numerator k is ``nbase[k] + u[nshift[k]]``;
    likewise for denominators.  The inner tolerance for index j is relaxed to
    ``err_budget / |coefficient_j|`` (between ``tol_in`` and INNER_TOL_CAP) so
    negligible terms are not summed to full precision.

    Returns (sum, sum |term|, inner error bound, inner terms, status).
    """
    n, p = idx.shape
    nb = nbase.copy()
    db = dbase.copy()
    u = np.zeros(p + 1, dtype=np.int64)
    total = (0.0, 0.0, 0.0, 0.0)
    comp = total
    abs_sum = 0.0
    err = 0.0
    inner_terms = 0
    status = 0
    for r in range(n):
        for q in range(p):
            u[q + 1] = u[q] + idx[r, q]
        c = s_fac
        for q in range(p):
            c = _dd.c_mul(c, _row(A[q], u[q]))
            c = _dd.c_mul(c, _row(B[q], idx[r, q]))
            c = _dd.c_mul(c, _row(G[q], u[q + 1]))
        cm = _dd.c_absf(c)
        if cm == 0.0:
            continue
        for k in range(nb.shape[0]):
            nb[k, 0] = nbase[k, 0]
            nb[k, 1] = nbase[k, 1]
            if nshift[k] >= 0:
                hi, lo = _dd.dd_add_d((nbase[k, 0], nbase[k, 1]), float(u[nshift[k]]))
                nb[k, 0] = hi
                nb[k, 1] = lo
        for k in range(db.shape[0]):
            db[k, 0] = dbase[k, 0]
            db[k, 1] = dbase[k, 1]
            if dshift[k] >= 0:
                hi, lo = _dd.dd_add_d((dbase[k, 0], dbase[k, 1]), float(u[dshift[k]]))
                db[k, 0] = hi
                db[k, 1] = lo
        tol_j = min(max(tol_in, err_budget / cm), INNER_TOL_CAP)
        f, trunc, fabs, nt, st = sum_series(nb, db, w, tol_j, max_order, quiet)
        inner_terms += nt
        if st >= MAX_ORDER:
            status = st
            break
        term = _dd.c_mul(c, f)
        total, comp = c_neumaier(total, comp, term)
        abs_sum += _dd.c_absf(term)
        err += cm * (trunc + 4.0 * _dd.EPS * fabs)
    return _dd.c_add(total, comp), abs_sum, err, inner_terms, status


@dataclass
class _OuterSetup:
    """Everything the shell loop needs for one right-hand side."""

    a: list[ComplexEP]  # a_1..a_p (outer pairs)
    b: list[ComplexEP]
    z: ComplexEP  # outer power base
    a0: ComplexEP | None
    inner_num: list[ComplexEP]
    num_shift: list[int]
    inner_den: list[ComplexEP]
    den_shift: list[int]
    w: ComplexEP  # inner argument
    log_prefactor: ComplexEP


def _check_disks(setup: _OuterSetup, caps: list[int | None]):
    # sums of p+1Fp type need modulus < 1 unless they terminate
    if setup.a0 is not None and abs(setup.z) >= 1.0 and None in caps:
        raise DomainError(f"outer series argument has modulus {abs(setup.z):.17g}; requires < 1")
    if len(setup.inner_num) != len(setup.inner_den) + 1 or abs(setup.w) < 1.0:
        return
    for v, k in zip(setup.inner_num, setup.num_shift):
        if k < 0 and v.nearest_nonpositive_integer(NEAR_INTEGER_TOL) is not None:
            return
    raise DomainError(f"inner series argument has modulus {abs(setup.w):.17g}; requires < 1")


def _outer_sum(setup: _OuterSetup, policy: TruncationPolicy) -> EvalResult:
    p = len(setup.a)
    bma = [snap(b - a) for a, b in zip(setup.a, setup.b)]
    caps = []
    for d in bma:
        m = d.nearest_nonpositive_integer(NEAR_INTEGER_TOL)
        caps.append(None if m is None else -m)
    _check_disks(setup, caps)
    caps_arr = _caps_array(p, caps)
    finite = all(c is not None for c in caps)
    top = sum(caps) if finite else policy.max_shell_order
    if top > policy.max_shell_order:
        top = policy.max_shell_order
        finite = False
    n = top + 1
    A, B, G = _ratio_tables(pack_numerators(setup.a), pack_denominators(setup.b), pack_numerators(bma), n)
    use_a0 = setup.a0 is not None
    a0 = setup.a0.parts if use_a0 else (0.0, 0.0, 0.0, 0.0)
    S = _shell_factors(setup.z.parts, a0, use_a0, n)
    nbase = pack_numerators(setup.inner_num)
    dbase = pack_denominators(setup.inner_den)
    nshift = np.array(setup.num_shift, dtype=np.int64)
    dshift = np.array(setup.den_shift, dtype=np.int64)
    inner = policy.tighter(10.0)

    acc = CompensatedAccumulator()
    run = 0
    run_sum = 0.0
    inner_err = 0.0
    abs_total = 0.0
    n_indices = 0
    inner_terms = 0
    converged = False
    last = 0
    for order in range(n):
        idx = _shell_array(p, order, caps_arr)
        last = order
        if idx.shape[0] == 0:
            continue
        scale = max(1.0, abs(acc.value))
        val, shell_abs, err, nt, status = _shell_sum(
            idx, A, B, G, tuple(S[order]), nbase, nshift, dbase, dshift, setup.w.parts,
            inner.tol, inner.tol * scale, inner.max_order, inner.quiet_shells,
        )
        inner_terms += nt
        if status == MAX_ORDER:
            raise ConvergenceError(
                f"inner series did not converge within {inner.max_order} terms at shell {order}"
            )
        if status != 0:
            raise RangeError(f"inner series overflowed at shell {order}")
        acc = compensated_add(acc, ComplexEP(*val))
        n_indices += idx.shape[0]
        inner_err += err
        abs_total += shell_abs
        if not finite:
            if shell_abs < policy.tol * max(1.0, abs(acc.value)):
                run += 1
                run_sum += shell_abs
            else:
                run = 0
                run_sum = 0.0
            if run >= policy.quiet_shells:
                converged = True
                break
    if not finite and not converged:
        raise ConvergenceError(
            f"outer multi-sum did not converge by total order {policy.max_shell_order} at tol={policy.tol:g}"
        )
    trunc = 0.0 if finite else run_sum + 2.0 * shell_abs
    value, err = scale_by_exp(acc.value, setup.log_prefactor, trunc + inner_err + rounding_estimate(abs_total))
    return EvalResult(
        value=value,
        abs_error_estimate=err,
        terms_used=n_indices,
        truncation_order=last,
        terminated_exactly=finite,
        extra={"inner_terms": inner_terms, "outer_caps": caps},
    )


# ---------------------------------------------------------------------------
# inputs and domain checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AdditionInput:
    """Parameters of an addition formula: ``base`` evaluated at ``x + y``.

    For the p+1Fp formula the first numerator of ``base`` is a_0.
    """

    base: HyperSpec
    x: ComplexEP
    y: ComplexEP

    def __post_init__(self):
        object.__setattr__(self, "x", ComplexEP.coerce(self.x))
        object.__setattr__(self, "y", ComplexEP.coerce(self.y))
        if self.base.argument is not None:
            object.__setattr__(self, "base", HyperSpec(self.base.numerator, self.base.denominator))

    @property
    def lhs_spec(self) -> HyperSpec:
        return self.base.with_argument(self.x + self.y)


def _abs(z: ComplexEP) -> float:
    return abs(z)


def t2_domain_violations(x: ComplexEP, y: ComplexEP, relaxed: bool = False) -> list[str]:
    """Constraints of the p+1Fp addition formula that (x, y) violates."""
    out = []
    if _abs(x + y) >= 1.0:
        out.append("|x+y| < 1")
    if relaxed:
        if _abs(y) >= _abs(1 - x):
            out.append("|y| < |1-x|")
    elif _abs(y) >= _abs(x):
        out.append("|y| < |x|")
    if x.real >= 0.5:
        out.append("Re(x) < 1/2")
    return out


def t4_domain_violations(x: ComplexEP, relaxed: bool = False) -> list[str]:
    out = []
    if _abs(x) >= 1.0:
        out.append("|x| < 1")
    if not relaxed and x.real >= 0.5:
        out.append("Re(x) < 1/2")
    return out


def _require_pfp(base: HyperSpec, name: str, offset: int = 0):
    p = base.q
    if p < 1 or base.p != p + offset:
        raise ParameterError(
            f"{name} needs {p + offset} numerator and {p} denominator parameters with p >= 1, "
            f"got {base.p} and {base.q}"
        )


# ---------------------------------------------------------------------------
# right-hand sides
# ---------------------------------------------------------------------------


def th1_addition_rhs(inp: AdditionInput, policy: TruncationPolicy = DEFAULT_POLICY) -> EvalResult:
    """Right side of the pFp addition formula; approximates pFp(a; b; x+y)."""
    base = inp.base
    _require_pfp(base, "pFp addition")
    p = base.p
    a, b = list(base.numerator), list(base.denominator)
    setup = _OuterSetup(
        a=a, b=b, z=-inp.x, a0=None,
        inner_num=a, num_shift=list(range(p)),
        inner_den=b, den_shift=list(range(1, p + 1)),
        w=inp.y, log_prefactor=inp.x,
    )
    return _outer_sum(setup, policy)


def th2_addition_rhs(
    inp: AdditionInput, policy: TruncationPolicy = DEFAULT_POLICY, relaxed_domain: bool = False
) -> EvalResult:
    """Right side of the p+1Fp addition formula; approximates p+1Fp(a_0, a; b; x+y)."""
    base = inp.base
    _require_pfp(base, "p+1Fp addition", offset=1)
    bad = t2_domain_violations(inp.x, inp.y, relaxed_domain)
    if bad:
        raise DomainError("p+1Fp addition formula requires " + " and ".join(bad))
    p = base.q
    a0, a, b = base.numerator[0], list(base.numerator[1:]), list(base.denominator)
    one_minus_x = 1 - inp.x
    setup = _OuterSetup(
        a=a, b=b, z=inp.x / (inp.x - 1), a0=a0,
        inner_num=[a0] + a, num_shift=[p] + list(range(p)),
        inner_den=b, den_shift=list(range(1, p + 1)),
        w=inp.y / one_minus_x, log_prefactor=-a0 * one_minus_x.log(),
    )
    return _outer_sum(setup, policy)


def th3_kummer_rhs(spec: HyperSpec, policy: TruncationPolicy = DEFAULT_POLICY) -> EvalResult:
    """Kummer-type right side; approximates p+1Fp+1(spec) at +x from values at -x."""
    if spec.argument is None:
        raise ParameterError("Kummer-type transformation needs an argument")
    if spec.p != spec.q or spec.p < 2:
        raise ParameterError(f"Kummer-type transformation needs p+1Fp+1 with p >= 1, got {spec.p}F{spec.q}")
    p = spec.p - 1
    a, b = list(spec.numerator[:p]), list(spec.denominator[:p])
    a_last, b_last = spec.numerator[p], spec.denominator[p]
    x = spec.argument
    setup = _OuterSetup(
        a=a, b=b, z=-x, a0=None,
        inner_num=a + [b_last - a_last], num_shift=list(range(p)) + [-1],
        inner_den=b + [b_last], den_shift=list(range(1, p + 1)) + [-1],
        w=-x, log_prefactor=x,
    )
    return _outer_sum(setup, policy)


def th4_euler_rhs(
    spec: HyperSpec, policy: TruncationPolicy = DEFAULT_POLICY, relaxed_domain: bool = False
) -> EvalResult:
    """Euler-type right side; approximates p+2Fp+1(spec) from values at x/(x-1)."""
    if spec.argument is None:
        raise ParameterError("Euler-type transformation needs an argument")
    if spec.q < 2 or spec.p != spec.q + 1:
        raise ParameterError(f"Euler-type transformation needs p+2Fp+1 with p >= 1, got {spec.p}F{spec.q}")
    x = spec.argument
    bad = t4_domain_violations(x, relaxed_domain)
    if bad:
        raise DomainError("Euler-type transformation requires " + " and ".join(bad))
    p = spec.q - 1
    a0 = spec.numerator[0]
    a, b = list(spec.numerator[1 : p + 1]), list(spec.denominator[:p])
    a_last, b_last = spec.numerator[p + 1], spec.denominator[p]
    z = x / (x - 1)
    setup = _OuterSetup(
        a=a, b=b, z=z, a0=a0,
        inner_num=[a0] + a + [b_last - a_last], num_shift=[p] + list(range(p)) + [-1],
        inner_den=b + [b_last], den_shift=list(range(1, p + 1)) + [-1],
        w=z, log_prefactor=-a0 * (1 - x).log(),
    )
    return _outer_sum(setup, policy)


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IdentityReport:
    theorem: Theorem
    lhs: EvalResult | None
    rhs: EvalResult | None
    abs_diff: float
    rel_diff: float
    domain_ok: bool
    passed: bool
    parameters: dict
    experimental: bool = False
    diagnostic: str | None = None
    violations: tuple[str, ...] = field(default_factory=tuple)
    # exception class name when an evaluation failed or the domain gate closed
    error: str | None = None


def _params_echo(theorem: Theorem, inputs) -> dict:
    if isinstance(inputs, AdditionInput):
        return {
            "numerator": list(inputs.base.numerator),
            "denominator": list(inputs.base.denominator),
            "x": inputs.x,
            "y": inputs.y,
        }
    return {
        "numerator": list(inputs.numerator),
        "denominator": list(inputs.denominator),
        "x": inputs.argument,
        "y": None,
    }


def domain_violations(theorem, inputs, relaxed_domain: bool = False) -> list[str]:
    """Stated constraints of ``theorem`` that ``inputs`` violates (empty if none)."""
    theorem = Theorem.parse(theorem)
    if theorem is Theorem.T2:
        return t2_domain_violations(inputs.x, inputs.y, relaxed_domain)
    if theorem is Theorem.T4:
        return t4_domain_violations(inputs.argument, relaxed_domain)
    return []


def verify(
    theorem,
    inputs,
    policy: TruncationPolicy = DEFAULT_POLICY,
    verification_tol: float = 1e-10,
    relaxed_domain: bool = False,
) -> IdentityReport:
    """Evaluate both sides of an identity and compare them.

    ``inputs`` is an :class:`AdditionInput` for T1/T2 and a
    :class:`HyperSpec` with argument for T3/T4.  Evaluation failures are
    reported, not raised; only malformed inputs raise.
    """
    theorem = Theorem.parse(theorem)
    if theorem in (Theorem.T1, Theorem.T2):
        if not isinstance(inputs, AdditionInput):
            raise ParameterError(f"{theorem.value} expects an AdditionInput")
    elif not isinstance(inputs, HyperSpec) or inputs.argument is None:
        raise ParameterError(f"{theorem.value} expects a HyperSpec with an argument")
    params = _params_echo(theorem, inputs)
    stated = domain_violations(theorem, inputs, relaxed_domain=False)
    experimental = bool(stated) and relaxed_domain
    gate = domain_violations(theorem, inputs, relaxed_domain) if relaxed_domain else stated
    if gate:
        return IdentityReport(
            theorem, None, None, math.nan, math.nan, False, False, params,
            experimental=experimental,
            diagnostic="domain: requires " + " and ".join(gate),
            violations=tuple(gate),
            error="DomainError",
        )
    lhs = rhs = None
    try:
        if theorem is Theorem.T1:
            lhs = eval_series(inputs.lhs_spec, policy)
            rhs = th1_addition_rhs(inputs, policy)
        elif theorem is Theorem.T2:
            lhs = eval_series(inputs.lhs_spec, policy)
            rhs = th2_addition_rhs(inputs, policy, relaxed_domain)
        elif theorem is Theorem.T3:
            lhs = eval_series(inputs, policy)
            rhs = th3_kummer_rhs(inputs, policy)
        else:
            lhs = eval_series(inputs, policy)
            rhs = th4_euler_rhs(inputs, policy, relaxed_domain)
    except PFQError as exc:
        return IdentityReport(
            theorem, lhs, rhs, math.nan, math.nan, not stated, False, params,
            experimental=experimental,
            diagnostic=f"{type(exc).__name__}: {exc}",
            violations=tuple(stated),
            error=type(exc).__name__,
        )
    abs_diff = abs(lhs.value - rhs.value)
    rd = rel_diff(lhs.value, rhs.value)
    domain_ok = not stated
    return IdentityReport(
        theorem, lhs, rhs, abs_diff, rd, domain_ok, domain_ok and rd <= verification_tol, params,
        experimental=experimental,
        violations=tuple(stated),
    )
