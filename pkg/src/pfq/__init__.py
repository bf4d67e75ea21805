"""Generalized hypergeometric functions in double-double precision.

Direct series evaluation, p-fold addition and transformation formulas,
integral-representation cross-checks, and a seeded sweep CLI.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import ConvergenceError, DomainError, ParameterError, PFQError, PoleError, RangeError
from .identities import (
    AdditionInput,
    IdentityReport,
    MultiIndex,
    Theorem,
    enumerate_shells,
    th1_addition_rhs,
    th2_addition_rhs,
    th3_kummer_rhs,
    th4_euler_rhs,
    verify,
)
from .numerics import (
    PRECISION,
    ComplexEP,
    CompensatedAccumulator,
    compensated_add,
    compensated_sum,
    gamma,
    pochhammer,
    rel_diff,
)
from .oracle import QuadratureRule, RuleKind, build_rule, euler_integral, laplace_integral
from .series import (
    ConvergenceClass,
    EvalResult,
    HyperSpec,
    TruncationPolicy,
    classify,
    eval_series,
    eval_series_scaled,
    hyp,
)

__all__ = [
    "AdditionInput",
    "CompensatedAccumulator",
    "ComplexEP",
    "ConvergenceClass",
    "ConvergenceError",
    "DomainError",
    "EvalResult",
    "HyperSpec",
    "IdentityReport",
    "MultiIndex",
    "PFQError",
    "PRECISION",
    "ParameterError",
    "PoleError",
    "QuadratureRule",
    "RangeError",
    "RuleKind",
    "Theorem",
    "TruncationPolicy",
    "build_rule",
    "classify",
    "compensated_add",
    "compensated_sum",
    "enumerate_shells",
    "euler_integral",
    "eval_series",
    "eval_series_scaled",
    "gamma",
    "hyp",
    "laplace_integral",
    "pochhammer",
    "rel_diff",
    "th1_addition_rhs",
    "th2_addition_rhs",
    "th3_kummer_rhs",
    "th4_euler_rhs",
    "verify",
]
