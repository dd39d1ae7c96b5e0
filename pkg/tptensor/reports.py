from __future__ import annotations

import json
import math
from typing import Any, Literal, Optional, Sequence

from jinja2 import Environment, PackageLoader, StrictUndefined
from pydantic import BaseModel, Field, model_validator

from tptensor.analytic2d import ClassificationReport
from tptensor.simulator import ChainTrace, ComparisonReport
from tptensor.solvers import IterationResult, RootSet
from tptensor.tensor_core import SimplexPoint, ValidationReport


class RunConfig(BaseModel):
    """One CLI invocation, validated before any numerics run."""

    subcommand: str
    file: Optional[str] = None
    m: Optional[int] = Field(default=None, ge=3)
    a: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    tol: float = Field(default=1e-10, gt=0.0)
    max_iter: int = Field(default=10000, ge=1)
    grid: int = Field(default=100001, ge=1001)
    steps: Optional[int] = Field(default=None, ge=1)
    seed: Optional[int] = Field(default=None, ge=0, lt=2**64)
    burn_in: Optional[int] = Field(default=None, ge=0)
    damping: float = Field(default=0.0, ge=0.0, lt=1.0)
    x0: Optional[list[float]] = None
    output: Literal["text", "json"] = "text"

    @model_validator(mode="after")
    def _one_source(self) -> RunConfig:
        has_file = self.file is not None
        has_params = self.m is not None or self.a is not None
        if has_file and has_params:
            raise ValueError("give either --file or --m/--a, not both")
        if has_params and (self.m is None or self.a is None):
            raise ValueError("--m and --a go together")
        if self.burn_in is not None and self.steps is not None and self.burn_in >= self.steps:
            raise ValueError(f"burn_in {self.burn_in} must be below steps {self.steps}")
        return self

    @property
    def source(self) -> str:
        if self.file is not None:
            return "file"
        if self.m is not None:
            return "sym2"
        return "none"


class PointOut(BaseModel):
    x: float
    y: float
    residual: float


class ClassificationOut(BaseModel):
    m: int
    a: float
    b: float
    c: float
    case_label: str
    critical_points: list[float]
    stationary_set: list[PointOut]
    irreducible: bool
    reducibility_witness: Optional[list[int]]
    contraction_bound: float
    theorem_set: list[list[float]]
    stated_reducible: bool
    closed_form_offset: float
    discrepancy_flags: list[str]
    notes: list[str]


class DeviationOut(BaseModel):
    left: str
    right: str
    max_abs: float


class ComparisonOut(BaseModel):
    steps: int
    seed: int
    burn_in: int
    analytic: list[PointOut]
    fixed_point: PointOut
    fixed_point_iterations: int
    fixed_point_converged: bool
    lifted_marginal: Optional[list[float]]
    lifted_ergodic: Optional[bool]
    empirical: list[float]
    deviations: list[DeviationOut]
    classification: ClassificationOut


class SweepRowOut(BaseModel):
    m: int
    a: float
    case_label: str
    stationary_x: list[float]
    irreducible: bool
    flags: int


class GeneralOut(BaseModel):
    order: int
    dim: int
    symmetric: bool
    irreducible: bool
    reducibility_witness: Optional[list[int]]
    iterate: list[float]
    residual: float
    iterations: int
    converged: bool
    notice: str


def point_out(p: SimplexPoint) -> PointOut:
    return PointOut(x=p.coords[0], y=p.coords[1], residual=p.residual)


def classification_out(report: ClassificationReport) -> ClassificationOut:
    return ClassificationOut(
        m=report.m,
        a=report.a,
        b=report.b,
        c=report.c,
        case_label=report.case_label,
        critical_points=list(report.critical_points),
        stationary_set=[point_out(p) for p in sorted(report.stationary_set, key=lambda p: p.coords[0])],
        irreducible=report.irreducible,
        reducibility_witness=list(report.reducibility_witness) if report.reducibility_witness else None,
        contraction_bound=report.contraction_bound,
        theorem_set=[list(v) for v in sorted(report.theorem_set)],
        stated_reducible=report.stated_reducible,
        closed_form_offset=report.closed_form_offset,
        discrepancy_flags=list(report.discrepancy_flags),
        notes=list(report.notes),
    )


def comparison_out(cmp: ComparisonReport, report: ClassificationReport) -> ComparisonOut:
    lifted = cmp.lifted
    return ComparisonOut(
        steps=cmp.steps,
        seed=cmp.seed,
        burn_in=cmp.burn_in,
        analytic=[point_out(p) for p in cmp.analytic],
        fixed_point=point_out(cmp.fixed_point.iterate),
        fixed_point_iterations=cmp.fixed_point.iterations,
        fixed_point_converged=cmp.fixed_point.converged,
        lifted_marginal=[float(v) for v in lifted.marginal] if lifted is not None else None,
        lifted_ergodic=lifted.ergodic if lifted is not None else None,
        empirical=[float(v) for v in cmp.empirical],
        deviations=[DeviationOut(left=lhs, right=rhs, max_abs=v) for lhs, rhs, v in cmp.deviations],
        classification=classification_out(report),
    )


def sweep_row(report: ClassificationReport) -> SweepRowOut:
    return SweepRowOut(
        m=report.m,
        a=report.a,
        case_label=report.case_label,
        stationary_x=[p.coords[0] for p in report.stationary_set],
        irreducible=report.irreducible,
        flags=len(report.discrepancy_flags),
    )


def fmt_float(v: float) -> str:
    if math.isnan(v):
        return "NaN"
    if math.isinf(v):
        return "Infinity" if v > 0 else "-Infinity"
    return format(v, ".17g")


def _encode(value: Any) -> str:
    if isinstance(value, BaseModel):
        value = value.model_dump()
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return fmt_float(value)
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, dict):
        return "{" + ",".join(f"{json.dumps(str(k))}:{_encode(v)}" for k, v in value.items()) + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ",".join(_encode(v) for v in value) + "]"
    raise TypeError(f"cannot encode {type(value).__name__}")


def to_json(value: Any) -> str:
    """Single-line JSON; dict keys stay in schema order and floats carry 17 significant digits."""
    return _encode(value) + "\n"


def _vec(values: Sequence[float]) -> str:
    return "(" + ", ".join(fmt_float(float(v)) for v in values) + ")"


_env = Environment(
    loader=PackageLoader("tptensor", "templates"),
    undefined=StrictUndefined,
    keep_trailing_newline=True,
    trim_blocks=True,
    lstrip_blocks=True,
)
_env.filters["num"] = lambda v: fmt_float(float(v))
_env.filters["vec"] = _vec


def render(template: str, **context: Any) -> str:
    return _env.get_template(template).render(**context)


def render_classification(report: ClassificationReport) -> str:
    return render("classify.txt.j2", r=classification_out(report))


def render_comparison(out: ComparisonOut) -> str:
    return render("report.txt.j2", r=out, classification=render("classify.txt.j2", r=out.classification))


def render_sweep(rows: Sequence[SweepRowOut]) -> str:
    return render("sweep.txt.j2", rows=rows)


def render_validation(path: str, report: ValidationReport) -> str:
    return render("validate.txt.j2", path=path, ok=report.ok, messages=report.messages())


def render_roots(m: int, a: float, roots: RootSet) -> str:
    return render("roots.txt.j2", m=m, a=a, roots=roots)


def render_solve(result: IterationResult, notice: str | None = None) -> str:
    return render("solve.txt.j2", r=result, notice=notice)


def render_simulation(trace: ChainTrace, burn_in: int, empirical: Sequence[Any]) -> str:
    return render(
        "simulate.txt.j2",
        t=trace,
        burn_in=burn_in,
        empirical=empirical,
        counted=trace.steps - burn_in,
    )


def general_out(tensor_order: int, dim: int, symmetric: bool, witness: tuple[int, ...] | None,
                result: IterationResult, notice: str) -> GeneralOut:
    return GeneralOut(
        order=tensor_order,
        dim=dim,
        symmetric=symmetric,
        irreducible=witness is None,
        reducibility_witness=list(witness) if witness else None,
        iterate=list(result.iterate.coords),
        residual=result.iterate.residual,
        iterations=result.iterations,
        converged=result.converged,
        notice=notice,
    )


def render_general(out: GeneralOut) -> str:
    return render("general.txt.j2", r=out)
