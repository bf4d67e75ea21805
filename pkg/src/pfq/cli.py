"""Command-line front end: ``pfq eval | check | sweep | rules``.

Exit codes: 0 success or pass, 1 verification failure, 2 input or domain
error, 3 numerical failure (nonconvergence or overflow).

Negative leading values must be attached with ``=``, e.g. ``--num=-3,2.5``.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .errors import ConvergenceError, DomainError, ParameterError, PFQError, RangeError
from .identities import AdditionInput, IdentityReport, Theorem, th3_kummer_rhs, th4_euler_rhs, verify
from .numerics import ComplexEP
from .oracle import RuleKind, build_rule, euler_integral, laplace_integral
from .series import EvalResult, HyperSpec, TruncationPolicy, eval_series
from .sweep import (
    ParameterBox,
    SweepConfig,
    dumps_canonical,
    format_complex,
    format_number,
    render,
    report_dict,
    run_sweep,
    sample_inputs,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_NUMERIC = 3

VIA = ("direct", "euler-integral", "laplace-integral", "kummer", "euler-transform")


class UsageError(ValueError):
    """Bad flag or config-file value; reported with exit code 2."""


# ---------------------------------------------------------------------------
# argument parsing helpers
# ---------------------------------------------------------------------------


def parse_scalar(text: str) -> ComplexEP:
    try:
        return ComplexEP.coerce(text.strip())
    except (ValueError, TypeError, ArithmeticError):
        raise UsageError(f"cannot parse number {text!r}") from None


def parse_param_list(text: str | None) -> list[ComplexEP] | None:
    """``"1.1,0.7+0.2j"`` -> scalars; an empty string is the empty list."""
    if text is None:
        return None
    text = text.strip()
    if not text:
        return []
    return [parse_scalar(tok) for tok in text.split(",")]


def parse_point(text: str | None) -> ComplexEP | None:
    """``re``, ``re,im`` or a complex literal like ``0.3-0.1j``."""
    if text is None:
        return None
    parts = text.split(",")
    if len(parts) == 1:
        return parse_scalar(parts[0])
    if len(parts) == 2:
        re, im = parse_scalar(parts[0]), parse_scalar(parts[1])
        return re + im * ComplexEP(0.0, 0.0, 1.0, 0.0)
    raise UsageError(f"expected re[,im], got {text!r}")


def parse_int_list(text) -> tuple[int, ...]:
    if isinstance(text, int):
        return (text,)
    try:
        return tuple(int(tok) for tok in str(text).split(",") if tok.strip())
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def parse_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"expected a boolean, got {text!r}")


def read_config_file(path: str) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc.strerror}") from None
    out = {}
    for lineno, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


def _policy(args) -> TruncationPolicy:
    kw = {}
    if getattr(args, "series_tol", None) is not None:
        kw["tol"] = args.series_tol
    if getattr(args, "max_order", None) is not None:
        kw["max_order"] = args.max_order
    if getattr(args, "quiet_shells", None) is not None:
        kw["quiet_shells"] = args.quiet_shells
    if getattr(args, "max_shell_order", None) is not None:
        kw["max_shell_order"] = args.max_shell_order
    return TruncationPolicy(**kw)


def _add_policy_flags(p: argparse.ArgumentParser, tol_flag: str):
    p.add_argument(tol_flag, dest="series_tol", type=float, default=None,
                   help="series truncation threshold (default 1e-25)")
    p.add_argument("--max-order", type=int, default=None, help="max terms of one power series (default 2000)")
    p.add_argument("--quiet-shells", type=int, default=None,
                   help="consecutive small terms/shells before stopping (default 3)")
    p.add_argument("--max-shell-order", type=int, default=None,
                   help="max total order of the multi-index sums (default 1000)")


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------


def _value_text(z: ComplexEP) -> str:
    if z.imag == 0.0 and z.im[1] == 0.0:
        return format_number(z.decimal_parts()[0])
    return format_complex(z)


def _eval_dict(res: EvalResult, spec: HyperSpec, via: str) -> dict:
    re, im = res.value.decimal_parts()
    return {
        "function": str(spec),
        "via": via,
        "value": [re, im],
        "abs_error_estimate": res.abs_error_estimate,
        "terms_used": res.terms_used,
        "truncation_order": res.truncation_order,
        "terminated_exactly": res.terminated_exactly,
    }


def _eval_text(res: EvalResult, spec: HyperSpec, via: str) -> str:
    return "\n".join([
        f"function            {spec}",
        f"via                 {via}",
        f"value               {_value_text(res.value)}",
        f"abs_error_estimate  {res.abs_error_estimate:.3e}",
        f"terms_used          {res.terms_used}",
        f"truncation_order    {res.truncation_order}",
        f"terminated_exactly  {str(res.terminated_exactly).lower()}",
    ]) + "\n"


def report_text(rep: IdentityReport) -> str:
    params = rep.parameters
    lines = [f"theorem      {rep.theorem.value}{'  (experimental domain)' if rep.experimental else ''}"]
    lines.append("numerator    " + ", ".join(_value_text(ComplexEP.coerce(v)) for v in params["numerator"]))
    lines.append("denominator  " + ", ".join(_value_text(ComplexEP.coerce(v)) for v in params["denominator"]))
    lines.append(f"x            {_value_text(ComplexEP.coerce(params['x']))}")
    if params["y"] is not None:
        lines.append(f"y            {_value_text(ComplexEP.coerce(params['y']))}")
    if rep.lhs is not None:
        lines.append(f"lhs          {_value_text(rep.lhs.value)}   ({rep.lhs.terms_used} terms)")
    if rep.rhs is not None:
        lines.append(f"rhs          {_value_text(rep.rhs.value)}   ({rep.rhs.terms_used} indices)")
    lines.append(f"abs_diff     {rep.abs_diff:.3e}")
    lines.append(f"rel_diff     {rep.rel_diff:.3e}")
    lines.append(f"domain_ok    {str(rep.domain_ok).lower()}")
    if rep.diagnostic:
        lines.append(f"diagnostic   {rep.diagnostic}")
    lines.append(f"result       {'PASS' if rep.passed else 'FAIL'}")
    return "\n".join(lines) + "\n"


def _check_csv(rep: IdentityReport) -> str:
    d = report_dict(rep)
    keys = sorted(k for k, v in d.items() if not isinstance(v, (list, dict)) or k in ("x", "y", "lhs", "rhs"))
    row = []
    for k in keys:
        v = d[k]
        if isinstance(v, list):
            row.append(format_complex(complex(float(v[0]), float(v[1]))) if v else "")
        elif isinstance(v, float):
            row.append(format_number(v) or "nan")
        elif isinstance(v, bool):
            row.append(str(v).lower())
        else:
            row.append("" if v is None else str(v))
    return ",".join(keys) + "\n" + ",".join(row) + "\n"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_eval(args) -> int:
    num = parse_param_list(args.num) or []
    den = parse_param_list(args.den) or []
    x = parse_point(args.x)
    spec = HyperSpec(num, den, x)
    policy = _policy(args)
    if args.via == "direct":
        res = eval_series(spec, policy)
    elif args.via == "euler-integral":
        res = euler_integral(spec, policy=policy)
    elif args.via == "laplace-integral":
        res = laplace_integral(spec, policy=policy)
    elif args.via == "kummer":
        res = th3_kummer_rhs(spec, policy)
    else:
        res = th4_euler_rhs(spec, policy, relaxed_domain=args.relaxed_domain)
    if args.format == "json":
        sys.stdout.write(dumps_canonical(_eval_dict(res, spec, args.via)))
    elif args.format == "csv":
        d = _eval_dict(res, spec, args.via)
        sys.stdout.write("function,via,value,abs_error_estimate,terms_used,truncation_order,terminated_exactly\n")
        sys.stdout.write(
            f"\"{d['function']}\",{args.via},{format_complex(res.value)},{format_number(res.abs_error_estimate)},"
            f"{res.terms_used},{res.truncation_order},{str(res.terminated_exactly).lower()}\n"
        )
    else:
        sys.stdout.write(_eval_text(res, spec, args.via))
    return EXIT_OK


def default_parameters(theorem: Theorem, p: int) -> tuple[list[str], list[str]]:
    """A fixed generic parameter set used when --num/--den are omitted."""
    # decimal strings so the parameters are the exact decimals shown
    a = [f"{0.5 + 0.3 * k:.10g}" for k in range(1, p + 1)]
    b = [f"{1.5 + 0.4 * k:.10g}" for k in range(1, p + 1)]
    if theorem is Theorem.T1:
        return a, b
    if theorem is Theorem.T2:
        return ["0.9"] + a, b
    if theorem is Theorem.T3:
        return a + ["0.8"], b + ["1.7"]
    return ["0.9"] + a + ["0.7"], b + ["1.8"]


def _shape(theorem: Theorem, p: int) -> tuple[int, int]:
    return {
        Theorem.T1: (p, p),
        Theorem.T2: (p + 1, p),
        Theorem.T3: (p + 1, p + 1),
        Theorem.T4: (p + 2, p + 1),
    }[theorem]


def _infer_p(theorem: Theorem, n_den: int) -> int:
    return n_den if theorem in (Theorem.T1, Theorem.T2) else n_den - 1


def build_check_inputs(args):
    theorem = Theorem.parse(args.theorem)
    num = parse_param_list(args.num)
    den = parse_param_list(args.den)
    x = parse_point(args.x)
    y = parse_point(args.y)
    if args.seed is not None:
        p = args.p or (_infer_p(theorem, len(den)) if den is not None else 1)
        _, drawn = sample_inputs(SweepConfig(theorem, (p,), seed=args.seed), args.draw)
        if isinstance(drawn, AdditionInput):
            num = num if num is not None else list(drawn.base.numerator)
            den = den if den is not None else list(drawn.base.denominator)
            x = x if x is not None else drawn.x
            y = y if y is not None else drawn.y
        else:
            num = num if num is not None else list(drawn.numerator)
            den = den if den is not None else list(drawn.denominator)
            x = x if x is not None else drawn.argument
    if den is not None:
        p = _infer_p(theorem, len(den))
        if args.p is not None and args.p != p:
            raise UsageError(f"--p {args.p} does not match {len(den)} denominator parameters for {theorem.value}")
    else:
        p = args.p or 1
    if num is None or den is None:
        dn, dd = default_parameters(theorem, p)
        num = num if num is not None else dn
        den = den if den is not None else dd
    want = _shape(theorem, p)
    if (len(num), len(den)) != want:
        raise UsageError(
            f"{theorem.value} with p={p} needs {want[0]} numerator and {want[1]} denominator parameters, "
            f"got {len(num)} and {len(den)}"
        )
    if x is None:
        raise UsageError("--x is required")
    if theorem in (Theorem.T1, Theorem.T2):
        if y is None:
            raise UsageError(f"{theorem.value} needs --y")
        return theorem, AdditionInput(HyperSpec(num, den), x, y)
    if y is not None:
        raise UsageError(f"{theorem.value} takes no --y")
    return theorem, HyperSpec(num, den, x)


def cmd_check(args) -> int:
    theorem, inputs = build_check_inputs(args)
    rep = verify(theorem, inputs, _policy(args), args.tol, args.relaxed_domain)
    if args.format == "json":
        sys.stdout.write(dumps_canonical(report_dict(rep)))
    elif args.format == "csv":
        sys.stdout.write(_check_csv(rep))
    else:
        sys.stdout.write(report_text(rep))
    if rep.passed:
        return EXIT_OK
    if rep.error in ("DomainError", "ParameterError", "PoleError"):
        print(f"error: {rep.diagnostic}", file=sys.stderr)
        return EXIT_INPUT
    if rep.error in ("ConvergenceError", "RangeError"):
        print(f"error: {rep.diagnostic}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_FAIL


# sweep flags that may also come from a config file: key -> (attribute, converter)
SWEEP_KEYS = {
    "theorem": ("theorem", str),
    "p": ("p", parse_int_list),
    "draws": ("draws", int),
    "seed": ("seed", int),
    "tol": ("tol", float),
    "relaxed-domain": ("relaxed_domain", parse_bool),
    "terminating": ("terminating", parse_bool),
    "format": ("format", str),
    "threads": ("threads", int),
    "re-min": ("re_min", float),
    "re-max": ("re_max", float),
    "im-min": ("im_min", float),
    "im-max": ("im_max", float),
    "x-radius": ("x_radius", float),
    "output": ("output", str),
    "series-tol": ("series_tol", float),
    "max-order": ("max_order", int),
    "quiet-shells": ("quiet_shells", int),
    "max-shell-order": ("max_shell_order", int),
}

SWEEP_DEFAULTS = {
    "p": (1,),
    "draws": 1,
    "seed": 0,
    "tol": 1e-10,
    "relaxed_domain": False,
    "terminating": False,
    "format": "text",
    "threads": 1,
    "re_min": -2.0,
    "re_max": 3.0,
    "im_min": -1.0,
    "im_max": 1.0,
}


def resolve_sweep_args(args) -> argparse.Namespace:
    """Merge explicit flags over config-file values over defaults."""
    merged = dict(SWEEP_DEFAULTS)
    if args.config:
        for key, value in read_config_file(args.config).items():
            if key not in SWEEP_KEYS:
                raise UsageError(f"unknown config key {key!r}; valid keys: {', '.join(sorted(SWEEP_KEYS))}")
            attr, conv = SWEEP_KEYS[key]
            try:
                merged[attr] = conv(value)
            except ValueError:
                raise UsageError(f"bad value for {key}: {value!r}") from None
    for attr, _ in SWEEP_KEYS.values():
        v = getattr(args, attr, None)
        if v is not None:
            merged[attr] = v
    if "theorem" not in merged:
        raise UsageError("--theorem is required (flag or config key)")
    if isinstance(merged["p"], str):
        merged["p"] = parse_int_list(merged["p"])
    return argparse.Namespace(**merged)


def sweep_config(ns) -> SweepConfig:
    return SweepConfig(
        theorem=Theorem.parse(ns.theorem),
        p=tuple(ns.p),
        draws=ns.draws,
        seed=ns.seed,
        parameter_box=ParameterBox(ns.re_min, ns.re_max, ns.im_min, ns.im_max),
        tol=ns.tol,
        relaxed_domain=ns.relaxed_domain,
        output_format=ns.format,
        threads=ns.threads,
        x_radius=getattr(ns, "x_radius", None),
        terminating=ns.terminating,
    )


def cmd_sweep(args) -> int:
    ns = resolve_sweep_args(args)
    config = sweep_config(ns)
    result = run_sweep(config, _policy(ns))
    text = render(result)
    if getattr(ns, "output", None):
        Path(ns.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if result.all_passed else EXIT_FAIL


def cmd_rules(args) -> int:
    rule = build_rule(args.kind, args.order)
    rows = []
    for x, w in rule.nodes_dd():
        rows.append((ComplexEP(x[0], x[1]).decimal_parts()[0], ComplexEP(w[0], w[1]).decimal_parts()[0]))
    if args.format == "json":
        sys.stdout.write(dumps_canonical({
            "kind": rule.kind.value,
            "order": rule.order,
            "nodes": [[x, w] for x, w in rows],
        }))
    elif args.format == "csv":
        lines = ["index,abscissa,weight"]
        lines += [f"{i},{format_number(x)},{format_number(w)}" for i, (x, w) in enumerate(rows)]
        sys.stdout.write("\n".join(lines) + "\n")
    else:
        lines = [f"{rule.kind.value}  order {rule.order}", f"{'i':>4}  {'abscissa':<27}  weight"]
        lines += [f"{i:>4}  {format_number(x):<27}  {format_number(w)}" for i, (x, w) in enumerate(rows)]
        sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pfq",
        description="Generalized hypergeometric functions: evaluation, identity checks, sweeps.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    fmt = dict(choices=("text", "json", "csv"), default="text", help="output format")

    p = sub.add_parser("eval", help="evaluate pFq(num; den; x)")
    p.add_argument("--num", default="", help="numerator parameters, comma separated (complex as 1+2j)")
    p.add_argument("--den", default="", help="denominator parameters, comma separated")
    p.add_argument("--x", required=True, help="argument as re[,im]")
    p.add_argument("--via", choices=VIA, default="direct", help="evaluation route")
    p.add_argument("--relaxed-domain", action="store_true", help="skip the Re(x) < 1/2 gate for euler-transform")
    p.add_argument("--format", **fmt)
    _add_policy_flags(p, "--tol")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("check", help="verify one identity (T1..T4) at one point")
    p.add_argument("--theorem", required=True, type=str.upper, choices=[t.value for t in Theorem])
    p.add_argument("--p", type=int, default=None, help="order p (inferred from --den when given)")
    p.add_argument("--num", default=None, help="numerator parameters (T2/T4: a_0 first)")
    p.add_argument("--den", default=None, help="denominator parameters")
    p.add_argument("--x", default=None, help="x as re[,im]")
    p.add_argument("--y", default=None, help="y as re[,im] (T1, T2)")
    p.add_argument("--tol", type=float, default=1e-10, help="verification tolerance on rel_diff")
    p.add_argument("--relaxed-domain", action="store_true", help="use the relaxed (experimental) domain gate")
    p.add_argument("--seed", type=int, default=None, help="take unspecified inputs from this sweep seed")
    p.add_argument("--draw", type=int, default=0, help="draw index used with --seed")
    p.add_argument("--format", **fmt)
    _add_policy_flags(p, "--series-tol")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("sweep", help="seeded random verification sweep")
    p.add_argument("--config", default=None, help="flat key = value file; flags override it")
    p.add_argument("--theorem", type=str.upper, choices=[t.value for t in Theorem], default=None)
    p.add_argument("--p", type=parse_int_list, default=None, help="p, or a list cycled over draws (e.g. 1,2,3)")
    p.add_argument("--draws", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--tol", type=float, default=None, help="verification tolerance (default 1e-10)")
    p.add_argument("--relaxed-domain", action="store_true", default=None)
    p.add_argument("--terminating", action="store_true", default=None,
                   help="draw each b_q - a_q from {-1, -2, -3}")
    p.add_argument("--re-min", type=float, default=None)
    p.add_argument("--re-max", type=float, default=None)
    p.add_argument("--im-min", type=float, default=None)
    p.add_argument("--im-max", type=float, default=None)
    p.add_argument("--x-radius", type=float, default=None, help="sampling radius for x (and y for T1)")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--format", choices=("text", "json", "csv"), default=None)
    p.add_argument("--output", default=None, help="write the report here instead of stdout")
    _add_policy_flags(p, "--series-tol")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("rules", help="print quadrature nodes and weights")
    p.add_argument("--kind", choices=[k.value for k in RuleKind], default=RuleKind.LEGENDRE_01.value)
    p.add_argument("--order", type=int, default=20)
    p.add_argument("--format", **fmt)
    p.set_defaults(func=cmd_rules)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ParameterError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ConvergenceError, RangeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except PFQError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
