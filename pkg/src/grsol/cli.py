"""Command-line front end.

Job files are flat sectioned key-value text (``[chart]``, optional
``[fluid]``, ``[soliton]``, ``[commands]``) whose values are expression
strings in the kernel grammar.  Reports come in two formats: ``text`` for
humans (with a timing footer) and ``json`` for machines (sorted keys, no
timings, byte-identical across runs for the same job and command).

Commands: report, check-soliton, solve-constants, classify-era, poisson,
audit <identity>, verify-paper.  ``verify-paper`` runs the full built-in
golden suite against the supplied chart; it is designed around the
bundled ``desitter4.job`` fixture and exits 0 iff every check passes.

Exit codes: 0 success, 1 verification failure, 2 input error.
"""

from __future__ import annotations

import argparse
import importlib.resources
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import audit as audit_mod
from . import oracle
from .fluid import (
    FluidState,
    alphas,
    classify_era,
    state_for_alphas,
)
from .geometry import (
    Convention,
    CovectorField,
    MetricChart,
    ScalarField,
    VectorField,
    christoffel,
    coordinate_vector,
    divergence,
    lower_vector,
    metric_determinant,
    raise_covector,
    ricci,
    ricci_scalar,
    riemann,
    riemann_lowered,
)
from .solitons import (
    Classification,
    SolitonKind,
    SolitonSpec,
    dichotomy_report,
    eta_ricci_residual,
    gradient_einstein_residual,
    gradient_eta_ricci_residual,
    m_quasi_residual,
    poisson_check,
    solve_eta_constants,
)
from .symcore import (
    ParseError,
    Rational,
    is_zero,
    parse_expr,
    simplify,
    to_text,
)

__all__ = ["JobError", "JobFile", "Report", "parse_job", "run", "run_all",
           "main", "COMMANDS"]

COMMANDS = ("report", "check-soliton", "solve-constants", "classify-era",
            "poisson", "audit", "verify-paper")

_CONVENTIONS = {"standard": Convention.STANDARD,
                "reversed": Convention.REVERSED,
                "paper": Convention.REVERSED}


class JobError(Exception):
    """Job-file syntax or semantic error, with a line number when known."""

    def __init__(self, message, line=None):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


@dataclass(frozen=True)
class JobFile:
    chart: MetricChart
    fluid: FluidState = None
    fluid_B: CovectorField = None
    soliton: SolitonSpec = None
    psi: ScalarField = None
    commands: tuple = ()
    label: str = "job"


@dataclass
class Report:
    """Structured command output.  ``timings`` is display-only metadata:
    it appears in the text rendering but never in the machine (JSON)
    serialization, which must be byte-identical across runs."""

    command: str
    job: str
    convention: str
    ok: bool
    sections: dict
    errors: list = field(default_factory=list)
    timings: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "job": self.job,
            "convention": self.convention,
            "ok": self.ok,
            "sections": self.sections,
            "errors": list(self.errors),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Report":
        return cls(command=d["command"], job=d["job"],
                   convention=d["convention"], ok=d["ok"],
                   sections=d["sections"], errors=list(d["errors"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Report":
        return cls.from_dict(json.loads(text))

    def render_text(self) -> str:
        lines = [f"== {self.command} :: {self.job} "
                 f"(convention: {self.convention}) =="]
        lines += _render_section(self.sections, indent=0)
        for err in self.errors:
            lines.append(f"ERROR: {err}")
        lines.append(f"result: {'ok' if self.ok else 'FAILED'}")
        for name, dt in self.timings.items():
            lines.append(f"[timing] {name}: {dt:.3f}s")
        return "\n".join(lines) + "\n"


def _render_section(node, indent):
    pad = "  " * indent
    lines = []
    if isinstance(node, dict):
        for key in node:
            val = node[key]
            if isinstance(val, (dict, list)):
                lines.append(f"{pad}{key}:")
                lines += _render_section(val, indent + 1)
            else:
                lines.append(f"{pad}{key} = {val}")
    elif isinstance(node, list):
        for val in node:
            if isinstance(val, dict) and not any(
                    isinstance(v, (dict, list)) for v in val.values()):
                if set(val) == {"name", "status", "detail"}:
                    tag = "PASS" if val["status"] == "pass" else "FAIL"
                    lines.append(f"{pad}[{tag}] {val['name']}: {val['detail']}")
                else:
                    lines.append(pad + " | ".join(f"{k}={v}"
                                                  for k, v in val.items()))
            elif isinstance(val, (dict, list)):
                lines += _render_section(val, indent)
            else:
                lines.append(f"{pad}- {val}")
    else:
        lines.append(f"{pad}{node}")
    return lines


# ---------------------------------------------------------------------------
# Job parsing

_CHART_KEYS = {"coords", "convention", "label", "base_point"}
_FLUID_KEYS = {"p", "sigma", "kappa2", "f", "f_R", "B"}
_SOLITON_KEYS = {"kind", "potential", "psi", "beta2", "beta1", "beta", "m",
                 "eta"}
_COMMAND_KEYS = {"run"}

_KIND_TOKENS = {
    "eta-ricci": SolitonKind.ETA_RICCI,
    "gradient-eta-ricci": SolitonKind.GRADIENT_ETA_RICCI,
    "gradient-einstein": SolitonKind.GRADIENT_EINSTEIN,
    "m-quasi-einstein": SolitonKind.M_QUASI_EINSTEIN,
    "m-quasi": SolitonKind.M_QUASI_EINSTEIN,
}


def _parse_sections(text: str) -> dict:
    sections = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip().lower()
            if name not in ("chart", "fluid", "soliton", "commands"):
                raise JobError(f"unknown section [{name}]", lineno)
            if name in sections:
                raise JobError(f"duplicate section [{name}]", lineno)
            current = {}
            sections[name] = current
            continue
        if current is None:
            raise JobError("key outside of any section", lineno)
        if "=" not in line:
            raise JobError("expected key = value", lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise JobError("expected key = value", lineno)
        if key in current:
            raise JobError(f"duplicate key {key!r}", lineno)
        current[key] = (value, lineno)
    if not sections:
        raise JobError("empty job file")
    return sections


def _expr(value, lineno, coords=None):
    try:
        e = parse_expr(value)
    except ParseError as err:
        raise JobError(f"bad expression {value!r}: {err}", lineno) from None
    if coords is not None:
        from .symcore import free_coords

        extra = free_coords(e) - set(coords)
        bad = [c for c in extra if c.startswith("w") and c[1:].isdigit()]
        if bad:
            raise JobError(f"undeclared coordinate {bad[0]!r}", lineno)
    return e


def _expr_list(value, lineno, n, coords=None):
    parts = value.split()
    if len(parts) != n:
        raise JobError(f"expected {n} whitespace-separated components",
                       lineno)
    return [_expr(p, lineno, coords) for p in parts]


def _check_keys(found: dict, allowed: set, section: str):
    for key, (_, lineno) in found.items():
        if key not in allowed:
            raise JobError(f"unknown key {key!r} in [{section}]", lineno)


def parse_job(source) -> JobFile:
    """Parse a job file from a path or from raw text."""
    if isinstance(source, Path) or (isinstance(source, str)
                                    and "\n" not in source
                                    and source.endswith(".job")):
        path = _resolve_job_path(str(source))
        text = path.read_text(encoding="utf-8")
    else:
        text = source
    sections = _parse_sections(text)

    if "chart" not in sections:
        raise JobError("missing [chart] section")
    chart_sec = sections["chart"]
    if "coords" not in chart_sec:
        raise JobError("missing coords in [chart]")
    coords_val, coords_line = chart_sec["coords"]
    coords = tuple(coords_val.split())
    if not 2 <= len(coords) <= 4:
        raise JobError("coords must list 2 to 4 names", coords_line)
    n = len(coords)

    matrix = [[Rational(0)] * n for _ in range(n)]
    given = {}
    # metric entries live in the chart section as gIJ keys (1-based)
    entries = {k: v for k, v in chart_sec.items()
               if k.startswith("g") and k[1:].isdigit() and len(k) == 3}
    unknown = {k for k in chart_sec
               if k not in _CHART_KEYS and k not in entries}
    if unknown:
        key = sorted(unknown)[0]
        raise JobError(f"unknown key {key!r} in [chart]",
                       chart_sec[key][1])
    for key, (value, lineno) in entries.items():
        i, j = int(key[1]) - 1, int(key[2]) - 1
        if not (0 <= i < n and 0 <= j < n):
            raise JobError(f"metric index out of range in {key!r}", lineno)
        given[(i, j)] = (_expr(value, lineno, coords), lineno)
    for (i, j), (e, lineno) in given.items():
        if (j, i) in given and given[(j, i)][0] != e and i != j:
            raise JobError(
                f"non-symmetric metric: g{i + 1}{j + 1} != g{j + 1}{i + 1}",
                lineno)
        matrix[i][j] = e
        matrix[j][i] = e

    convention = Convention.STANDARD
    if "convention" in chart_sec:
        value, lineno = chart_sec["convention"]
        token = value.strip().lower()
        if token not in _CONVENTIONS:
            raise JobError(
                f"bad convention {value!r} (standard | paper | reversed)",
                lineno)
        convention = _CONVENTIONS[token]
    label = chart_sec.get("label", (None, 0))[0]
    base_point = None
    if "base_point" in chart_sec:
        value, lineno = chart_sec["base_point"]
        parts = value.split()
        if len(parts) != n:
            raise JobError(f"base_point needs {n} values", lineno)
        try:
            base_point = dict(zip(coords, (float(p) for p in parts)))
        except ValueError:
            raise JobError("base_point values must be numeric", lineno) \
                from None
    try:
        chart = MetricChart(coords, matrix, convention, label, base_point)
    except ValueError as err:
        raise JobError(str(err)) from None

    fluid = None
    fluid_B = None
    if "fluid" in sections:
        sec = sections["fluid"]
        _check_keys(sec, _FLUID_KEYS, "fluid")
        def fval(key, default=None):
            if key not in sec:
                if default is None:
                    raise JobError(f"missing {key!r} in [fluid]")
                return parse_expr(default)
            value, lineno = sec[key]
            return _expr(value, lineno, coords)
        fluid = FluidState(p=fval("p"), sigma=fval("sigma"),
                           kappa_sq=fval("kappa2", "kappa2"),
                           f_value=fval("f", "f0"),
                           fR_value=fval("f_R", "f_R"))
        if "B" in sec:
            value, lineno = sec["B"]
            fluid_B = CovectorField(chart, _expr_list(value, lineno, n, coords))

    soliton = None
    psi = None
    if "soliton" in sections:
        sec = sections["soliton"]
        _check_keys(sec, _SOLITON_KEYS, "soliton")
        if "kind" not in sec:
            raise JobError("missing kind in [soliton]")
        value, lineno = sec["kind"]
        token = value.strip().lower()
        if token not in _KIND_TOKENS:
            raise JobError(f"unknown soliton kind {value!r}", lineno)
        kind = _KIND_TOKENS[token]
        potential_vector = None
        potential = None
        if "potential" in sec:
            value, lineno = sec["potential"]
            if kind is SolitonKind.ETA_RICCI:
                potential_vector = VectorField(
                    chart, _expr_list(value, lineno, n, coords))
            else:
                potential = ScalarField(chart, _expr(value, lineno, coords))
        eta = None
        if "eta" in sec:
            value, lineno = sec["eta"]
            eta = CovectorField(chart, _expr_list(value, lineno, n, coords))
        elif fluid_B is not None:
            eta = fluid_B

        def const(key):
            if key not in sec:
                return None
            value, lineno = sec[key]
            return _expr(value, lineno, coords)

        m = None
        if "m" in sec:
            value, lineno = sec["m"]
            if value.strip().lower() in ("inf", "infinity"):
                m = math.inf
            else:
                try:
                    m = int(value.strip())
                except ValueError:
                    raise JobError("m must be an integer or inf", lineno) \
                        from None
        try:
            soliton = SolitonSpec(kind=kind, potential_vector=potential_vector,
                                  potential=potential, beta2=const("beta2"),
                                  beta1=const("beta1"), beta=const("beta"),
                                  m=m, eta=eta)
        except ValueError as err:
            raise JobError(str(err)) from None
        if "psi" in sec:
            value, lineno = sec["psi"]
            psi = ScalarField(chart, _expr(value, lineno, coords))
        elif potential is not None:
            psi = potential

    commands = ()
    if "commands" in sections:
        sec = sections["commands"]
        _check_keys(sec, _COMMAND_KEYS, "commands")
        if "run" in sec:
            value, lineno = sec["run"]
            commands = tuple(t.strip() for t in value.replace(",", " ").split())
            for c in commands:
                base = c.split(":", 1)[0]
                if base not in COMMANDS:
                    raise JobError(f"unknown command {c!r}", lineno)

    return JobFile(chart=chart, fluid=fluid, fluid_B=fluid_B,
                   soliton=soliton, psi=psi, commands=commands,
                   label=label or "job")


def _resolve_job_path(name: str) -> Path:
    p = Path(name)
    if p.exists():
        return p
    bundled = importlib.resources.files("grsol") / "jobs" / Path(name).name
    if bundled.is_file():
        return Path(str(bundled))
    raise JobError(f"job file not found: {name}")


# ---------------------------------------------------------------------------
# Commands

def _table(tensor, symbol_name) -> dict:
    out = {}
    for idx, e in sorted(tensor.nonzero_components().items()):
        key = symbol_name + "[" + ",".join(str(i + 1) for i in idx) + "]"
        out[key] = to_text(e)
    return out


def _require(cond, message):
    if not cond:
        raise JobError(message)


def _velocity(job) -> CovectorField:
    _require(job.fluid_B is not None,
             "this command needs a fluid B covector in [fluid]")
    return job.fluid_B


def _cmd_report(job, **kw):
    chart = job.chart
    t0 = time.perf_counter()
    sections = {
        "chart": {
            "coords": " ".join(chart.coords),
            "convention": chart.convention.value,
            "determinant": to_text(metric_determinant(chart)),
        },
        "christoffel": _table(christoffel(chart), "Gamma"),
        "riemann_lowered": _table(riemann_lowered(chart), "K"),
        "ricci": _table(ricci(chart), "S"),
        "ricci_scalar": to_text(ricci_scalar(chart).expr),
    }
    if chart.base_point is not None:
        sections["chart"]["signature"] = " ".join(
            "+" if s > 0 else "-" for s in chart.signature())
    timings = {"curvature": time.perf_counter() - t0}
    return Report("report", job.label, chart.convention.value, True,
                  sections, timings=timings)


def _soliton_residual_report(job, seed, tol):
    spec = job.soliton
    chart = job.chart
    kind = spec.kind
    if kind is SolitonKind.ETA_RICCI:
        _require(spec.potential_vector is not None,
                 "eta-ricci needs a vector potential")
        _require(spec.beta2 is not None and spec.beta1 is not None,
                 "eta-ricci needs beta2 and beta1")
        return eta_ricci_residual(chart, spec.potential_vector, spec.beta2,
                                  spec.beta1, spec.eta)
    _require(spec.potential is not None,
             f"{kind.value} needs a scalar potential")
    if kind is SolitonKind.GRADIENT_ETA_RICCI:
        _require(spec.beta2 is not None and spec.beta1 is not None,
                 "gradient-eta-ricci needs beta2 and beta1")
        _require(spec.eta is not None,
                 "gradient-eta-ricci needs an eta covector (or a fluid B)")
        return gradient_eta_ricci_residual(chart, spec.potential, spec.beta2,
                                           spec.beta1, spec.eta)
    if kind is SolitonKind.GRADIENT_EINSTEIN:
        _require(spec.beta2 is not None, "gradient-einstein needs beta2")
        return gradient_einstein_residual(chart, spec.potential, spec.beta2)
    _require(spec.m is not None and spec.beta is not None,
             "m-quasi-einstein needs m and beta")
    return m_quasi_residual(chart, spec.potential, spec.m, spec.beta)


def _cmd_check_soliton(job, seed=0xF0F0, tol=1e-9, **kw):
    _require(job.soliton is not None, "this command needs a [soliton] section")
    t0 = time.perf_counter()
    rep = _soliton_residual_report(job, seed, tol)
    satisfied = rep.residual.is_zero_tensor(seed=seed, tol=tol)
    sections = {
        "kind": rep.kind.value,
        "satisfied": satisfied,
        "classification": rep.classification.value,
        "residual_nonzero": _table(rep.residual, "residual"),
    }
    if rep.trivial is not None:
        sections["trivial"] = rep.trivial
    if rep.branch_notes:
        sections["notes"] = rep.branch_notes
    if job.fluid is not None:
        sections["era"] = [e.value for e in
                           classify_era(job.fluid.p, job.fluid.sigma)]
    timings = {"residual": time.perf_counter() - t0}
    return Report("check-soliton", job.label, job.chart.convention.value,
                  satisfied, sections, timings=timings)


def _cmd_solve_constants(job, **kw):
    _require(job.fluid is not None, "this command needs a [fluid] section")
    B = _velocity(job)
    rho = raise_covector(job.chart, B)
    div = divergence(job.chart, rho).expr
    out = solve_eta_constants(job.fluid, div)
    a1, a2 = alphas(job.fluid)
    sections = {
        "alpha1": to_text(a1),
        "alpha2": to_text(a2),
        "div_rho": to_text(div),
        "beta2": to_text(out.beta2),
        "beta1": to_text(out.beta1),
        "divergence_free": out.divergence_free,
    }
    if out.beta2_divergence_free_form is not None:
        sections["beta2_divergence_free_form"] = \
            to_text(out.beta2_divergence_free_form)
    return Report("solve-constants", job.label, job.chart.convention.value,
                  True, sections)


def _cmd_classify_era(job, **kw):
    _require(job.fluid is not None, "this command needs a [fluid] section")
    labels = classify_era(job.fluid.p, job.fluid.sigma)
    sections = {
        "p": to_text(job.fluid.p),
        "sigma": to_text(job.fluid.sigma),
        "era": [e.value for e in labels],
    }
    return Report("classify-era", job.label, job.chart.convention.value,
                  True, sections)


def _cmd_poisson(job, **kw):
    _require(job.fluid is not None, "this command needs a [fluid] section")
    _require(job.psi is not None,
             "this command needs a psi (or scalar potential) in [soliton]")
    _require(job.soliton is not None and job.soliton.beta1 is not None,
             "this command needs beta1 in [soliton]")
    out = poisson_check(job.chart, job.psi, job.fluid, job.soliton.beta1)
    sections = {
        "lhs_box_psi": to_text(out.lhs),
        "rhs": to_text(out.rhs),
        "match": out.match,
    }
    return Report("poisson", job.label, job.chart.convention.value,
                  out.match, sections)


def _audit_rows(identity_audit) -> dict:
    sec = {
        "identity": identity_audit.identity,
        "convention": identity_audit.convention.value,
        "verdict": identity_audit.verdict.value,
        "rows": [
            {"label": r.label, "lhs": to_text(r.lhs), "rhs": to_text(r.rhs),
             "difference": to_text(r.difference)}
            for r in identity_audit.rows
        ],
    }
    if identity_audit.notes:
        sec["notes"] = identity_audit.notes
    return sec


def _cmd_audit(job, identity=None, **kw):
    _require(identity in audit_mod.AUDIT_NAMES,
             "unknown audit identity; valid names: "
             + ", ".join(audit_mod.AUDIT_NAMES))
    _require(job.fluid is not None, "audits need a [fluid] section")
    chart = job.chart
    B = _velocity(job)
    spec = job.soliton
    if identity.startswith("mquasi"):
        _require(spec is not None
                 and spec.kind is SolitonKind.M_QUASI_EINSTEIN
                 and spec.potential is not None and spec.m is not None
                 and spec.beta is not None,
                 "m-quasi audits need an m-quasi [soliton] section")
        if identity == "mquasi-commutator":
            out = audit_mod.audit_mquasi_commutator(
                chart, spec.potential, spec.m, spec.beta)
            sections = _audit_rows(out)
            ok = out.verdict is audit_mod.AuditVerdict.MATCH
        else:
            pair = audit_mod.audit_mquasi_contraction(
                chart, spec.potential, spec.m, spec.beta,
                raise_covector(chart, B), job.fluid, B)
            chosen = pair.frame if identity.endswith("frame") else pair.printed
            sections = _audit_rows(chosen)
            ok = chosen.verdict is audit_mod.AuditVerdict.MATCH
            if identity.endswith("printed"):
                ok = True  # recorded, not asserted
    elif identity == "gradient-eta-contraction":
        _require(spec is not None
                 and spec.kind is SolitonKind.GRADIENT_ETA_RICCI
                 and spec.potential is not None
                 and spec.beta2 is not None and spec.beta1 is not None,
                 "this audit needs a gradient-eta-ricci [soliton] section")
        out = audit_mod.audit_gradient_eta_contraction(
            chart, spec.potential, spec.beta2, spec.beta1, job.fluid, B)
        sections = _audit_rows(out)
        ok = out.verdict is audit_mod.AuditVerdict.MATCH
    else:
        _require(spec is not None
                 and spec.kind is SolitonKind.GRADIENT_EINSTEIN
                 and spec.potential is not None and spec.beta2 is not None,
                 "this audit needs a gradient-einstein [soliton] section")
        out = audit_mod.audit_gradient_einstein_contraction(
            chart, spec.potential, spec.beta2, job.fluid, B)
        sections = _audit_rows(out)
        ok = out.verdict is audit_mod.AuditVerdict.MATCH
    return Report("audit", job.label, chart.convention.value, ok, sections)


# ---------------------------------------------------------------------------
# verify-paper: the built-in golden suite

_GOLDEN_CHRISTOFFEL = {
    "Gamma[4,1,1]": "exp(2*w4)", "Gamma[4,2,2]": "exp(2*w4)",
    "Gamma[4,3,3]": "exp(2*w4)",
    "Gamma[1,1,4]": "1", "Gamma[1,4,1]": "1",
    "Gamma[2,2,4]": "1", "Gamma[2,4,2]": "1",
    "Gamma[3,3,4]": "1", "Gamma[3,4,3]": "1",
}

_GOLDEN_RICCI = {
    "S[1,1]": "-3*exp(2*w4)", "S[2,2]": "-3*exp(2*w4)",
    "S[3,3]": "-3*exp(2*w4)", "S[4,4]": "3",
}

_GOLDEN_RIEMANN_SEEDS = {
    (0, 3, 3, 0): "exp(2*w4)", (1, 3, 3, 1): "exp(2*w4)",
    (2, 3, 3, 2): "exp(2*w4)",
    (0, 1, 1, 0): "-exp(4*w4)", (0, 2, 2, 0): "-exp(4*w4)",
    (1, 2, 2, 1): "-exp(4*w4)",
}


def _golden_riemann_table() -> dict:
    out = {}
    for (a, b, c, d), text in _GOLDEN_RIEMANN_SEEDS.items():
        v = parse_expr(text)
        images = {(a, b, c, d): v, (b, a, c, d): -v, (a, b, d, c): -v,
                  (b, a, d, c): v, (c, d, a, b): v, (d, c, a, b): -v,
                  (c, d, b, a): -v, (d, c, b, a): v}
        for idx, e in images.items():
            key = "K[" + ",".join(str(i + 1) for i in idx) + "]"
            out[key] = to_text(simplify(e))
    return out


def _check_table(actual: dict, expected: dict):
    missing = sorted(set(expected) - set(actual))
    extra = sorted(set(actual) - set(expected))
    wrong = sorted(k for k in set(actual) & set(expected)
                   if parse_expr(actual[k]) != parse_expr(expected[k]))
    ok = not (missing or extra or wrong)
    detail = []
    if missing:
        detail.append("missing " + ", ".join(missing))
    if extra:
        detail.append("unexpected " + ", ".join(extra))
    if wrong:
        detail.append("wrong value at " + ", ".join(wrong))
    return ok, "; ".join(detail) or "all components match"


def _verify_checks(job, seed=0xF0F0, tol=1e-9):
    """The golden suite: yields (name, ok, detail) tuples."""
    from .symcore import Coord

    chart_rev = job.chart.with_convention(Convention.REVERSED)
    chart_std = job.chart.with_convention(Convention.STANDARD)
    w4 = Coord("w4")
    checks = []

    gam = _table(christoffel(chart_rev), "Gamma")
    checks.append(("christoffel-table", *_check_table(gam, _GOLDEN_CHRISTOFFEL)))
    low = _table(riemann_lowered(chart_rev), "K")
    checks.append(("riemann-table", *_check_table(low, _golden_riemann_table())))
    ric = _table(ricci(chart_rev), "S")
    checks.append(("ricci-table", *_check_table(ric, _GOLDEN_RICCI)))

    scal_rev = ricci_scalar(chart_rev).expr
    scal_std = ricci_scalar(chart_std).expr
    checks.append((
        "ricci-scalar", scal_rev == Rational(-12) and scal_std == Rational(12),
        f"reversed: {to_text(scal_rev)} | standard: {to_text(scal_std)}"))

    rho = coordinate_vector(chart_rev, 3)
    eta = lower_vector(chart_rev, rho)
    sol = eta_ricci_residual(chart_rev, rho, 2, -1, eta)
    checks.append((
        "soliton-golden",
        sol.satisfied and sol.classification is Classification.EXPANDING,
        f"residual zero: {sol.satisfied}, {sol.classification.value}"))

    div = divergence(chart_rev, rho).expr
    trace = simplify(-div - 4 * Rational(2) + Rational(-1))
    checks.append(("trace-identity", trace == Rational(-12),
                   f"-div - 4*beta2 + beta1 = {to_text(trace)}"))

    dark = state_for_alphas(0, -3)
    consts = solve_eta_constants(dark, div)
    checks.append((
        "solve-constants",
        consts.beta2 == Rational(2) and consts.beta1 == Rational(-1),
        f"beta2 = {to_text(consts.beta2)}, beta1 = {to_text(consts.beta1)}"))

    p_check = poisson_check(chart_rev, -w4, dark, -1)
    checks.append(("poisson", p_check.match,
                   f"box(psi) = {to_text(p_check.lhs)}, "
                   f"rhs = {to_text(p_check.rhs)}"))

    B_rev = CovectorField(chart_rev, [0, 0, 0, -1])
    B_std = CovectorField(chart_std, [0, 0, 0, -1])
    ok_inst = True
    details = []
    for beta2 in (Rational(2), Rational(0), Rational(7, 2)):
        r = gradient_eta_ricci_residual(chart_rev, (beta2 - 3) * w4, beta2,
                                        beta2 - 3, B_rev)
        ok_inst &= r.satisfied
        r = gradient_eta_ricci_residual(chart_std, (beta2 + 3) * w4, beta2,
                                        beta2 + 3, B_std)
        ok_inst &= r.satisfied
    details.append("gradient-eta both conventions")
    r = gradient_einstein_residual(chart_rev, 0, -3)
    ok_inst &= r.satisfied and r.trivial
    r = gradient_einstein_residual(chart_std, 0, 3)
    ok_inst &= r.satisfied and r.trivial
    details.append("trivial gradient-einstein")
    for m in (1, 2, 5):
        ok_inst &= m_quasi_residual(chart_std, -m * w4, m, m + 3).satisfied
        ok_inst &= m_quasi_residual(chart_rev, -m * w4, m, m - 3).satisfied
    details.append("m-quasi m in {1,2,5}")
    checks.append(("exact-instances", bool(ok_inst), "; ".join(details)))

    std_state = state_for_alphas(0, 3)
    aud = audit_mod.audit_mquasi_commutator(chart_std, -2 * w4, 2, 5)
    checks.append(("audit-mquasi-commutator",
                   aud.verdict is audit_mod.AuditVerdict.MATCH,
                   aud.verdict.value))
    pair = audit_mod.audit_mquasi_contraction(
        chart_std, -2 * w4, 2, 5, coordinate_vector(chart_std, 3), std_state,
        B_std)
    checks.append(("audit-mquasi-contraction-frame",
                   pair.frame.verdict is audit_mod.AuditVerdict.MATCH,
                   pair.frame.verdict.value))
    row = pair.printed.rows[0] if pair.printed.rows else None
    printed_detail = (f"printed equation {pair.printed.verdict.value}"
                      + (f" (lhs {to_text(row.lhs)}, rhs {to_text(row.rhs)})"
                         if row else ""))
    checks.append(("audit-mquasi-contraction-printed", True, printed_detail))
    aud = audit_mod.audit_gradient_eta_contraction(
        chart_std, 5 * w4, 2, 5, std_state, B_std)
    checks.append(("audit-gradient-eta-contraction",
                   aud.verdict is audit_mod.AuditVerdict.MATCH,
                   aud.verdict.value))
    aud = audit_mod.audit_gradient_einstein_contraction(
        chart_std, 1, 3, std_state, B_std)
    checks.append(("audit-gradient-einstein-contraction",
                   aud.verdict is audit_mod.AuditVerdict.MATCH,
                   aud.verdict.value))

    from .charts import minkowski as _mink
    from .solitons import DichotomyBranch

    mk = _mink()
    B_mk = CovectorField(mk, [0, 0, 0, -1])
    dich_ok = True
    rep = dichotomy_report(chart_rev, state_for_alphas(0, -3), B_rev,
                           SolitonKind.GRADIENT_ETA_RICCI, psi=1, beta1=0)
    dich_ok &= rep.branch is DichotomyBranch.STATE_EQUATION
    rep = dichotomy_report(chart_rev, state_for_alphas(2, -3), B_rev,
                           SolitonKind.GRADIENT_ETA_RICCI, psi=1, beta1=-2)
    dich_ok &= rep.branch is DichotomyBranch.STATE_EQUATION
    rep = dichotomy_report(mk, state_for_alphas(1, 0), B_mk,
                           SolitonKind.GRADIENT_ETA_RICCI, psi=1, beta1=0)
    dich_ok &= (rep.branch is DichotomyBranch.VANISHING_DIVERGENCE
                and rep.vorticity_free)
    for kind in (SolitonKind.GRADIENT_EINSTEIN, SolitonKind.M_QUASI_EINSTEIN):
        rep = dichotomy_report(chart_rev, state_for_alphas(0, -3), B_rev,
                               kind, psi=1)
        dich_ok &= rep.branch is DichotomyBranch.STATE_EQUATION
        rep = dichotomy_report(mk, state_for_alphas(1, 0), B_mk, kind, psi=1)
        dich_ok &= (rep.branch is DichotomyBranch.VANISHING_DIVERGENCE
                    and rep.vorticity_free)
        rep = dichotomy_report(mk, state_for_alphas(0, 0), B_mk, kind, psi=1)
        dich_ok &= rep.branch is DichotomyBranch.BOTH
    checks.append(("dichotomy-branches", bool(dich_ok),
                   "9 scenario fixtures across the three gradient kinds"))

    nc = oracle.from_chart(chart_rev, seed=seed)
    pts = oracle.random_points(nc, 4)
    err_gamma = oracle.compare_symbolic_numeric(
        christoffel(chart_rev), lambda pt: oracle.fd_christoffel(nc, pt), pts)
    err_ricci = oracle.compare_symbolic_numeric(
        ricci(chart_rev), lambda pt: oracle.fd_ricci(nc, pt), pts)
    checks.append(("numeric-crosscheck",
                   err_gamma <= 1e-6 and err_ricci <= 1e-4,
                   f"christoffel err {err_gamma:.2e}, ricci err {err_ricci:.2e}"))
    return checks


def _cmd_verify_paper(job, seed=0xF0F0, tol=1e-9, **kw):
    t0 = time.perf_counter()
    checks = _verify_checks(job, seed=seed, tol=tol)
    ok = all(c[1] for c in checks)
    sections = {
        "checks": [
            {"name": name, "status": "pass" if good else "FAIL",
             "detail": detail}
            for name, good, detail in checks
        ],
        "summary": f"{sum(1 for c in checks if c[1])}/{len(checks)} checks passed",
    }
    timings = {"suite": time.perf_counter() - t0}
    return Report("verify-paper", job.label, job.chart.convention.value, ok,
                  sections, timings=timings)


_COMMAND_FNS = {
    "report": _cmd_report,
    "check-soliton": _cmd_check_soliton,
    "solve-constants": _cmd_solve_constants,
    "classify-era": _cmd_classify_era,
    "poisson": _cmd_poisson,
    "audit": _cmd_audit,
    "verify-paper": _cmd_verify_paper,
}


def run(job: JobFile, command: str, identity: str = None,
        convention: str = None, seed: int = 0xF0F0, tol: float = 1e-9) -> Report:
    """Execute one command against a parsed job and return its report."""
    base = command.split(":", 1)
    name = base[0]
    if name == "audit" and identity is None and len(base) == 2:
        identity = base[1]
    if name not in _COMMAND_FNS:
        raise JobError(f"unknown command {command!r}")
    if convention:
        token = convention.strip().lower()
        if token not in _CONVENTIONS:
            raise JobError(f"bad convention {convention!r}")
        job = JobFile(chart=job.chart.with_convention(_CONVENTIONS[token]),
                      fluid=job.fluid,
                      fluid_B=_rebind(job.fluid_B, job.chart, token),
                      soliton=_rebind_spec(job.soliton, job.chart, token),
                      psi=_rebind_scalar(job.psi, job.chart, token),
                      commands=job.commands, label=job.label)
    return _COMMAND_FNS[name](job, identity=identity, seed=seed, tol=tol)


def _rebind(cov, old_chart, token):
    if cov is None:
        return None
    new_chart = old_chart.with_convention(_CONVENTIONS[token])
    return CovectorField(new_chart, cov.comps)


def _rebind_scalar(s, old_chart, token):
    if s is None:
        return None
    new_chart = old_chart.with_convention(_CONVENTIONS[token])
    return ScalarField(new_chart, s.expr)


def _rebind_spec(spec, old_chart, token):
    if spec is None:
        return None
    new_chart = old_chart.with_convention(_CONVENTIONS[token])
    return SolitonSpec(
        kind=spec.kind,
        potential_vector=None if spec.potential_vector is None else
        VectorField(new_chart, spec.potential_vector.comps),
        potential=None if spec.potential is None else
        ScalarField(new_chart, spec.potential.expr),
        beta2=spec.beta2, beta1=spec.beta1, beta=spec.beta, m=spec.m,
        eta=None if spec.eta is None else
        CovectorField(new_chart, spec.eta.comps),
    )


def run_all(job: JobFile, **kw) -> list:
    """Run every command named in the job's [commands] section."""
    return [run(job, c, **kw) for c in job.commands]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="grsol",
        description="Symbolic curvature tables, soliton checks, and identity "
                    "audits for coordinate-defined metrics.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("jobfile", help="job file path or bundled fixture name "
                                       "(desitter4.job, minkowski.job, polar2.job)")
        p.add_argument("--convention", choices=["standard", "paper", "reversed"],
                       help="override the chart's sign convention")
        p.add_argument("--format", choices=["text", "json"], default="text")
        p.add_argument("--seed", type=int, default=0xF0F0)
        p.add_argument("--tol", type=float, default=1e-9)

    for name in COMMANDS:
        if name == "audit":
            p = sub.add_parser(name, help="evaluate a named identity audit")
            p.add_argument("identity", choices=list(audit_mod.AUDIT_NAMES))
            add_common(p)
        else:
            p = sub.add_parser(name)
            add_common(p)

    args = parser.parse_args(argv)
    try:
        job = parse_job(Path(args.jobfile) if Path(args.jobfile).exists()
                        else args.jobfile)
        report = run(job, args.command,
                     identity=getattr(args, "identity", None),
                     convention=args.convention, seed=args.seed, tol=args.tol)
    except (JobError, ParseError) as err:
        print(f"grsol: error: {err}", file=sys.stderr)
        return 2
    if args.format == "json":
        sys.stdout.write(report.to_json())
    else:
        sys.stdout.write(report.render_text())
    return 0 if report.ok else 1


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
