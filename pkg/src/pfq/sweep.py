"""Seeded parameter sweeps over the identities and their report formats.

Draws come from SplitMix64 used in counter mode: the value for
``(seed, draw, slot)`` is the standard SplitMix64 output function applied to
``seed + GOLDEN * (draw * 2**20 + slot + 1)`` (mod 2**64), i.e. the
``draw * 2**20 + slot + 1``-th output of a SplitMix64 generator seeded with
``seed``.  Every draw therefore depends only on (seed, draw index), which
makes reports independent of worker-thread count and easy to reproduce in
other languages.  Uniform doubles use the top 53 bits.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from decimal import Decimal, localcontext
from typing import Any, Sequence

from .errors import ParameterError
from .identities import AdditionInput, IdentityReport, Theorem, verify
from .numerics import ComplexEP
from .series import HyperSpec, TruncationPolicy

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
SLOTS_PER_DRAW = 1 << 20

# denominators closer than this to a nonpositive integer are redrawn
POLE_MARGIN = 0.1
PARAM_GRID = 2.0**40

DEFAULT_RADIUS = {Theorem.T1: 1.5, Theorem.T2: 0.45, Theorem.T3: 2.0, Theorem.T4: 0.45}
# the relaxed T2 gate |y| < |1 - x| still needs |x + y| < 1; keep a margin
T2_SUM_RADIUS = 0.9


def splitmix64_mix(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & MASK64
    return z ^ (z >> 31)


def splitmix64_at(seed: int, index: int) -> int:
    """The ``index``-th output (1-based) of SplitMix64 seeded with ``seed``."""
    return splitmix64_mix((seed + GOLDEN * index) & MASK64)


class DrawStream:
    """Uniform variates for one draw; slots are consumed in order."""

    def __init__(self, seed: int, draw: int):
        self.seed = seed
        self.base = draw * SLOTS_PER_DRAW
        self.slot = 0

    def next_u64(self) -> int:
        if self.slot >= SLOTS_PER_DRAW:
            raise RuntimeError("draw exhausted its random slots")
        self.slot += 1
        return splitmix64_at(self.seed, self.base + self.slot)

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        u = (self.next_u64() >> 11) * 2.0**-53
        return lo + (hi - lo) * u

    def disk(self, radius: float) -> complex:
        """Uniform point in the open disk |z| < radius."""
        r = radius * math.sqrt(self.uniform())
        theta = self.uniform(-math.pi, math.pi)
        return complex(r * math.cos(theta), r * math.sin(theta))


@dataclass(frozen=True)
class ParameterBox:
    re_min: float = -2.0
    re_max: float = 3.0
    im_min: float = -1.0
    im_max: float = 1.0

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min <= self.im_max):
            raise ParameterError(f"empty parameter box {self}")


@dataclass(frozen=True)
class SweepConfig:
    theorem: Theorem
    p: tuple[int, ...] = (1,)
    draws: int = 1
    seed: int = 0
    parameter_box: ParameterBox = field(default_factory=ParameterBox)
    tol: float = 1e-10
    relaxed_domain: bool = False
    output_format: str = "text"
    threads: int = 1
    x_radius: float | None = None
    terminating: bool = False

    def __post_init__(self):
        object.__setattr__(self, "theorem", Theorem.parse(self.theorem))
        ps = (self.p,) if isinstance(self.p, int) else tuple(self.p)
        object.__setattr__(self, "p", ps)
        if not ps or any(int(v) < 1 for v in ps):
            raise ParameterError(f"p must be a nonempty list of positive integers, got {self.p!r}")
        if self.draws < 1:
            raise ParameterError(f"draws must be >= 1, got {self.draws}")
        if not 0 <= self.seed <= MASK64:
            raise ParameterError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if not self.tol > 0:
            raise ParameterError(f"tol must be positive, got {self.tol}")
        if self.output_format not in ("json", "csv", "text"):
            raise ParameterError(f"unknown output format {self.output_format!r}")
        if self.threads < 1:
            raise ParameterError(f"threads must be >= 1, got {self.threads}")
        if self.x_radius is not None and not self.x_radius > 0:
            raise ParameterError(f"x radius must be positive, got {self.x_radius}")

    @property
    def radius(self) -> float:
        return self.x_radius if self.x_radius is not None else DEFAULT_RADIUS[self.theorem]

    def p_for(self, draw: int) -> int:
        return self.p[draw % len(self.p)]

    def describe(self) -> dict:
        return {
            "theorem": self.theorem.value,
            "p": list(self.p),
            "draws": self.draws,
            "seed": self.seed,
            "parameter_box": asdict(self.parameter_box),
            "tol": self.tol,
            "relaxed_domain": self.relaxed_domain,
            "x_radius": self.radius,
            "terminating": self.terminating,
        }


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


def _near_pole(b: complex) -> bool:
    m = min(0, round(b.real))
    return abs(b - m) < POLE_MARGIN


def _grid(v: float) -> float:
    # 40 fractional bits: shifting by a small integer stays exact in binary64
    return round(v * PARAM_GRID) / PARAM_GRID


def _param(stream: DrawStream, box: ParameterBox) -> complex:
    re = _grid(stream.uniform(box.re_min, box.re_max))
    im = _grid(stream.uniform(box.im_min, box.im_max))
    return complex(re, im)


def _denominator(stream: DrawStream, box: ParameterBox) -> complex:
    while True:
        b = _param(stream, box)
        if not _near_pole(b):
            return b


def _pairs(stream: DrawStream, box: ParameterBox, n: int, terminating: bool):
    """n (a, b) pairs; with ``terminating`` each b - a is drawn from {-1, -2, -3}."""
    a, b = [], []
    for _ in range(n):
        if terminating:
            while True:
                aq = _param(stream, box)
                m = 1 + int(stream.uniform(0.0, 3.0))
                bq = aq - m
                if not _near_pole(bq):
                    break
        else:
            aq = _param(stream, box)
            bq = _denominator(stream, box)
        a.append(aq)
        b.append(bq)
    return a, b


def sample_inputs(config: SweepConfig, draw: int):
    """The verification inputs of draw ``draw``: (p, inputs)."""
    stream = DrawStream(config.seed, draw)
    p = config.p_for(draw)
    box = config.parameter_box
    th = config.theorem
    a, b = _pairs(stream, box, p, config.terminating)
    if th is Theorem.T1:
        x = stream.disk(config.radius)
        y = stream.disk(config.radius)
        return p, AdditionInput(HyperSpec(a, b), x, y)
    if th is Theorem.T2:
        a0 = _param(stream, box)
        x = stream.disk(config.radius)
        reach = T2_SUM_RADIUS - abs(x)
        if not config.relaxed_domain:
            reach = min(abs(x), reach)
        y = stream.disk(reach)
        return p, AdditionInput(HyperSpec([a0] + a, b), x, y)
    a_last = _param(stream, box)
    b_last = _denominator(stream, box)
    x = stream.disk(config.radius)
    if th is Theorem.T3:
        return p, HyperSpec(a + [a_last], b + [b_last], x)
    a0 = _param(stream, box)
    return p, HyperSpec([a0] + a + [a_last], b + [b_last], x)


def sample_oracle_spec(kind: str, seed: int, draw: int, box: ParameterBox | None = None) -> HyperSpec:
    """A random spec satisfying the preconditions of an integral representation.

    ``kind`` is ``"euler"`` (p+1Fp+1 with |x| <= 2 or p+2Fp+1 with |x| <= 0.9,
    Re(b) > Re(a) > 0 for the last pair) or ``"laplace"`` (p+1Fp with
    Re(a_0) > 0 and |x| <= 0.9); p is 1 or 2.  Parameters come from ``box``
    by rejection, so exponents arbitrarily close to 0 occur.
    """
    box = box or ParameterBox()
    stream = DrawStream(seed, draw)
    p = 1 + int(stream.uniform(0.0, 2.0))
    if kind == "euler":
        while True:
            a = _param(stream, box)
            b = _denominator(stream, box)
            if a.real > 0 and b.real > a.real:
                break
        num = [_param(stream, box) for _ in range(p)] + [a]
        n_den = p - 1 + int(stream.uniform(0.0, 2.0))
        den = [_denominator(stream, box) for _ in range(n_den)] + [b]
        x = stream.disk(2.0 if len(num) == len(den) else 0.9)
        return HyperSpec(num, den, x)
    if kind == "laplace":
        while True:
            a0 = _param(stream, box)
            if a0.real > 0:
                break
        num = [a0] + [_param(stream, box) for _ in range(p)]
        den = [_denominator(stream, box) for _ in range(p)]
        return HyperSpec(num, den, stream.disk(0.9))
    raise ParameterError(f"unknown integral kind {kind!r}; expected euler or laplace")


# ---------------------------------------------------------------------------
# records
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DrawRecord:
    draw_index: int
    p: int
    report: IdentityReport
    millis: float

    @property
    def passed(self) -> bool:
        return self.report.passed


@dataclass(frozen=True)
class SweepResult:
    config: SweepConfig
    records: list[DrawRecord]

    @property
    def n_passed(self) -> int:
        return sum(r.passed for r in self.records)

    @property
    def all_passed(self) -> bool:
        return self.n_passed == len(self.records)

    @property
    def max_rel_diff(self) -> float:
        vals = [r.report.rel_diff for r in self.records if not math.isnan(r.report.rel_diff)]
        return max(vals) if vals else math.nan

    @property
    def error_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for r in self.records:
            if r.report.error:
                out[r.report.error] = out.get(r.report.error, 0) + 1
        return out


def run_draw(config: SweepConfig, draw: int, policy: TruncationPolicy | None = None) -> DrawRecord:
    p, inputs = sample_inputs(config, draw)
    policy = policy or TruncationPolicy()
    start = time.perf_counter()
    report = verify(config.theorem, inputs, policy, config.tol, config.relaxed_domain)
    return DrawRecord(draw, p, report, 1e3 * (time.perf_counter() - start))


def run_sweep(config: SweepConfig, policy: TruncationPolicy | None = None) -> SweepResult:
    """Run every draw; records come back ordered by draw index whatever the thread count."""
    indices = range(config.draws)
    if config.threads == 1:
        records = [run_draw(config, k, policy) for k in indices]
    else:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            records = list(pool.map(lambda k: run_draw(config, k, policy), indices))
    records.sort(key=lambda r: r.draw_index)
    return SweepResult(config, records)


# ---------------------------------------------------------------------------
# canonical JSON
# ---------------------------------------------------------------------------

SIG_DIGITS = 20


def format_number(value) -> str | None:
    """20 significant digits, scientific, lowercase e; None for NaN/inf."""
    if isinstance(value, float):
        if not math.isfinite(value):
            return None
        value = Decimal(value)
    if not value.is_finite():
        return None
    if value.is_zero():
        # Decimal's "e" format keeps a zero's exponent; pin it to e+0
        return "0." + "0" * (SIG_DIGITS - 1) + "e+0"
    with localcontext() as ctx:
        ctx.prec = 80
        return format(value, f".{SIG_DIGITS - 1}e")


def _complex_json(z) -> list:
    if z is None:
        return None
    re, im = ComplexEP.coerce(z).decimal_parts()
    return [re, im]


def dumps_canonical(obj: Any, indent: int = 2) -> str:
    """Deterministic JSON: sorted keys, numbers via :func:`format_number`.

    Output parsed with ``json.loads(text, parse_float=Decimal)`` and passed
    back through this function reproduces the same text.
    """
    out: list[str] = []

    def emit(v, level):
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if v is None:
            out.append("null")
        elif isinstance(v, bool):
            out.append("true" if v else "false")
        elif isinstance(v, int):
            out.append(str(v))
        elif isinstance(v, (float, Decimal)):
            s = format_number(v)
            out.append("null" if s is None else s)
        elif isinstance(v, str):
            out.append(json.dumps(v, ensure_ascii=True))
        elif isinstance(v, dict):
            if not v:
                out.append("{}")
                return
            out.append("{\n")
            for i, key in enumerate(sorted(v)):
                out.append(pad + json.dumps(str(key), ensure_ascii=True) + ": ")
                emit(v[key], level + 1)
                out.append(",\n" if i < len(v) - 1 else "\n")
            out.append(end + "}")
        elif isinstance(v, (list, tuple)):
            if not v:
                out.append("[]")
                return
            if all(not isinstance(x, (dict, list, tuple)) for x in v):
                out.append("[")
                for i, x in enumerate(v):
                    emit(x, level + 1)
                    if i < len(v) - 1:
                        out.append(", ")
                out.append("]")
                return
            out.append("[\n")
            for i, x in enumerate(v):
                out.append(pad)
                emit(x, level + 1)
                out.append(",\n" if i < len(v) - 1 else "\n")
            out.append(end + "]")
        else:
            raise TypeError(f"cannot serialize {type(v).__name__}")

    emit(obj, 0)
    out.append("\n")
    return "".join(out)


def loads_canonical(text: str):
    return json.loads(text, parse_float=Decimal)


def report_dict(report: IdentityReport) -> dict:
    """JSON-ready view of an identity report (no timings)."""
    params = report.parameters
    return {
        "theorem": report.theorem.value,
        "numerator": [_complex_json(v) for v in params["numerator"]],
        "denominator": [_complex_json(v) for v in params["denominator"]],
        "x": _complex_json(params["x"]),
        "y": _complex_json(params["y"]),
        "lhs": _complex_json(report.lhs.value) if report.lhs else None,
        "rhs": _complex_json(report.rhs.value) if report.rhs else None,
        "lhs_error_estimate": report.lhs.abs_error_estimate if report.lhs else None,
        "rhs_error_estimate": report.rhs.abs_error_estimate if report.rhs else None,
        "terms_lhs": report.lhs.terms_used if report.lhs else None,
        "terms_rhs": report.rhs.terms_used if report.rhs else None,
        "abs_diff": report.abs_diff,
        "rel_diff": report.rel_diff,
        "domain_ok": report.domain_ok,
        "passed": report.passed,
        "experimental": report.experimental,
        "diagnostic": report.diagnostic,
        "violations": list(report.violations),
    }


def sweep_dict(result: SweepResult) -> dict:
    records = []
    for rec in result.records:
        d = report_dict(rec.report)
        d["draw_index"] = rec.draw_index
        d["p"] = rec.p
        records.append(d)
    n = len(result.records)
    return {
        "config": result.config.describe(),
        "records": records,
        "summary": {
            "draws": n,
            "passed": result.n_passed,
            "pass_rate": result.n_passed / n,
            "max_rel_diff": result.max_rel_diff,
            "experimental": sum(r.report.experimental for r in result.records),
            "errors": result.error_counts,
        },
    }


def render_json(result: SweepResult) -> str:
    return dumps_canonical(sweep_dict(result))


# ---------------------------------------------------------------------------
# CSV and text
# ---------------------------------------------------------------------------

CSV_COLUMNS = (
    "theorem", "draw_index", "p", "parameters", "x", "y", "lhs", "rhs",
    "abs_diff", "rel_diff", "domain_ok", "passed", "terms_lhs", "terms_rhs", "millis",
)


def format_complex(z) -> str:
    if z is None:
        return ""
    re, im = ComplexEP.coerce(z).decimal_parts()
    im_s = format_number(im)
    sign = "" if im_s.startswith("-") else "+"
    return f"{format_number(re)}{sign}{im_s}j"


def _params_text(theorem: Theorem, numerator: Sequence, denominator: Sequence) -> str:
    # a_0 is the extra leading numerator of the T2/T4 forms
    first = 0 if theorem in (Theorem.T2, Theorem.T4) else 1
    parts = [f"a{k}={format_complex(v)}" for k, v in enumerate(numerator, start=first)]
    parts += [f"b{k}={format_complex(v)}" for k, v in enumerate(denominator, start=1)]
    return ";".join(parts)


def render_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in result.records:
        rep = rec.report
        params = rep.parameters
        writer.writerow([
            rep.theorem.value,
            rec.draw_index,
            rec.p,
            _params_text(rep.theorem, params["numerator"], params["denominator"]),
            format_complex(params["x"]),
            format_complex(params["y"]),
            format_complex(rep.lhs.value) if rep.lhs else "",
            format_complex(rep.rhs.value) if rep.rhs else "",
            format_number(rep.abs_diff) or "nan",
            format_number(rep.rel_diff) or "nan",
            str(rep.domain_ok).lower(),
            str(rep.passed).lower(),
            rep.lhs.terms_used if rep.lhs else "",
            rep.rhs.terms_used if rep.rhs else "",
            f"{rec.millis:.3f}",
        ])
    return buf.getvalue()


def render_text(result: SweepResult) -> str:
    lines = []
    cfg = result.config
    lines.append(
        f"sweep {cfg.theorem.value}  p={','.join(map(str, cfg.p))}  draws={cfg.draws}  seed={cfg.seed}"
        f"  tol={cfg.tol:g}{'  relaxed-domain' if cfg.relaxed_domain else ''}"
    )
    for rec in result.records:
        rep = rec.report
        status = "pass" if rep.passed else "FAIL"
        flag = " [experimental]" if rep.experimental else ""
        note = f"  {rep.diagnostic}" if rep.diagnostic else ""
        lines.append(f"  #{rec.draw_index:<5d} p={rec.p}  rel_diff={rep.rel_diff:.3e}  {status}{flag}{note}")
    n = len(result.records)
    lines.append(
        f"passed {result.n_passed}/{n} ({100.0 * result.n_passed / n:.1f}%)  max rel_diff {result.max_rel_diff:.3e}"
    )
    return "\n".join(lines) + "\n"


RENDERERS = {"json": render_json, "csv": render_csv, "text": render_text}


def render(result: SweepResult, fmt: str | None = None) -> str:
    return RENDERERS[fmt or result.config.output_format](result)
