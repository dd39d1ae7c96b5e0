"""Command-line entry point.

Usage:
    tptensor validate FILE
    tptensor classify (--file F | --m M --a A) [--json]
    tptensor roots --m M --a A [--grid N] [--tol T]
    tptensor solve (--file F | --m M --a A) [--x0 v1,v2,...] [--tol T] [--max-iter K] [--damping D]
    tptensor simulate --m M --a A --steps S --seed R [--burn-in B]
    tptensor report --m M --a A [--steps S --seed R] [--json]
    tptensor sweep --m-min M --m-max M --a-step S [--json]
    tptensor journal [--limit N]
    tptensor export-trace --m M --a A --steps S --seed R [--out FILE] [--window w1,w2,...]
    tptensor materialize --m M --a A [--out FILE]

Exit codes: 0 success, 1 constraint violations found by validate,
2 usage, parse or domain errors.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Optional

import click
from pydantic import ValidationError

from tptensor import __version__
from tptensor.analytic2d import classify as classify_family
from tptensor.config import settings
from tptensor.errors import TensorError
from tptensor.formats import format_sym2, format_tpt1, format_trace, parse_decimal, parse_int, read_source
from tptensor.journal import Journal, NullJournal, open_journal
from tptensor.reports import (
    RunConfig,
    classification_out,
    comparison_out,
    general_out,
    render_classification,
    render_comparison,
    render_general,
    render_roots,
    render_simulation,
    render_solve,
    render_sweep,
    render_validation,
    sweep_row,
    to_json,
)
from tptensor.simulator import compare_report, empirical_distribution, sample_chain
from tptensor.solvers import fixed_point_iterate, root_scan, stationarity_gap
from tptensor.storage import default_trace_name, ensure_dirs, journal_path, traces_dir
from tptensor.sweep import classify_sweep, sweep_grid
from tptensor.tensor_core import (
    SymmetricFamily2,
    TensorLike,
    TransitionTensor,
    is_reducible,
    is_symmetric,
    make_symmetric2,
    materialize,
    symmetric_family,
    validate as validate_tensor,
)

GENERAL_NOTICE = "general tensor: the fixed point below need not be the only stationary vector"


@dataclass
class RunInfo:
    subcommand: str
    source: str = "none"
    m: Optional[int] = None
    a: Optional[float] = None
    case_label: Optional[str] = None


def _one_line(e: Exception) -> str:
    if isinstance(e, ValidationError):
        err = e.errors()[0]
        loc = ".".join(str(p) for p in err.get("loc", ())) or "input"
        return f"{loc}: {err['msg']} (got {err.get('input')!r})"
    return " ".join(str(e).split())


def _journal(ctx: click.Context) -> Journal | NullJournal:
    return ctx.obj["journal"]


def _recorded(fn: Callable[..., int | None]) -> Callable[..., None]:
    """Run a subcommand, map package errors to exit 2 and record the run."""

    @functools.wraps(fn)
    def wrapper(*args: Any, **kwargs: Any) -> None:
        ctx = click.get_current_context()
        journal = _journal(ctx)
        run = RunInfo(subcommand=ctx.info_name or "?")
        journal.log("info", "cli.start", run.subcommand)
        try:
            code = fn(run, *args, **kwargs) or 0
        except click.UsageError as e:
            journal.log("error", "cli.usage", f"{run.subcommand}: {_one_line(e)}")
            journal.record_run(run.subcommand, run.source, 2, m=run.m, a=run.a)
            raise
        except (TensorError, ValidationError, OSError) as e:
            msg = _one_line(e)
            click.echo(f"error: {msg}", err=True)
            journal.log("error", "cli.error", f"{run.subcommand}: {msg}")
            code = 2
        journal.record_run(run.subcommand, run.source, code, m=run.m, a=run.a, case_label=run.case_label)
        ctx.exit(code)

    return wrapper


def _floats(raw: str | None) -> list[float] | None:
    if raw is None:
        return None
    return [parse_decimal(tok.strip()) for tok in raw.split(",")]


def _ints(raw: str | None) -> list[int] | None:
    if raw is None:
        return None
    return [parse_int(tok.strip()) for tok in raw.split(",")]


def _load(cfg: RunConfig, run: RunInfo) -> TensorLike:
    run.source = cfg.source
    if cfg.file is not None:
        return read_source(cfg.file)
    if cfg.m is None or cfg.a is None:
        raise click.UsageError("give --file or both --m and --a")
    run.m, run.a = cfg.m, cfg.a
    return make_symmetric2(cfg.m, cfg.a)


def _family(cfg: RunConfig, run: RunInfo) -> SymmetricFamily2:
    run.source = "sym2"
    run.m, run.a = cfg.m, cfg.a
    return make_symmetric2(cfg.m, cfg.a)  # type: ignore[arg-type]


m_option = click.option("--m", "m", type=int, help="Tensor order (>= 3).")
a_option = click.option("--a", "a", type=str, help="Family parameter a in [0, 1], plain decimal.")
json_option = click.option("--json", "as_json", is_flag=True, help="Emit one JSON object instead of text.")


def _a(raw: str | None) -> float | None:
    return None if raw is None else parse_decimal(raw)


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, prog_name="tptensor")
@click.option("--workers", type=int, default=None, help="Thread-pool size for sweeps (default TPT_MAX_WORKERS).")
@click.pass_context
def main(ctx: click.Context, workers: int | None) -> None:
    """Stationary vectors of transition probability tensors."""
    ctx.ensure_object(dict)
    ctx.obj["workers"] = max(1, workers) if workers else settings.MAX_WORKERS
    ctx.obj["journal"] = open_journal(settings.JOURNAL, journal_path())


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@_recorded
def validate(run: RunInfo, file: str) -> int:
    """Check stochasticity and entry range of a TPT1 or SYM2 file."""
    run.source = "file"
    src = read_source(file)
    tensor = materialize(src) if not isinstance(src, TransitionTensor) else src
    report = validate_tensor(tensor)
    click.echo(render_validation(file, report), nl=False)
    if not report.ok:
        _journal(click.get_current_context()).log(
            "warn", "validate.violations", f"{file}: {len(report.messages())}"
        )
        return 1
    return 0


@main.command()
@click.option("--file", "file", type=click.Path(exists=True, dir_okay=False))
@m_option
@a_option
@json_option
@_recorded
def classify(run: RunInfo, file: str | None, m: int | None, a: str | None, as_json: bool) -> int:
    """Enumerate the stationary vectors of a symmetric order-m 2-state family."""
    cfg = RunConfig(subcommand="classify", file=file, m=m, a=_a(a), output="json" if as_json else "text")
    src = _load(cfg, run)
    family = symmetric_family(src)
    if family is None:
        assert isinstance(src, TransitionTensor)
        result = fixed_point_iterate(src, tol=settings.TOL, max_iter=settings.MAX_ITER)
        out = general_out(src.order, src.dim, is_symmetric(src), is_reducible(src), result, GENERAL_NOTICE)
        click.echo(to_json(out) if as_json else render_general(out), nl=False)
        return 0
    report = classify_family(family)
    run.m, run.a, run.case_label = family.order, family.a, report.case_label
    _journal(click.get_current_context()).log(
        "info", "classify.done", f"m={family.order} a={family.a!r} case={report.case_label}"
    )
    click.echo(to_json(classification_out(report)) if as_json else render_classification(report), nl=False)
    return 0


@main.command()
@m_option
@a_option
@click.option("--grid", type=int, default=None, help="Grid points on [0, 1] (>= 1001).")
@click.option("--tol", type=str, default="1e-12", show_default=True, help="|h| threshold for tangential roots.")
@_recorded
def roots(run: RunInfo, m: int | None, a: str | None, grid: int | None, tol: str) -> int:
    """Root-scan h(x) = g1(x) - x on [0, 1]."""
    cfg = RunConfig(
        subcommand="roots", m=m, a=_a(a), grid=grid or settings.GRID_POINTS, tol=parse_decimal(tol)
    )
    if cfg.m is None:
        raise click.UsageError("roots needs --m and --a")
    family = _family(cfg, run)
    found = root_scan(stationarity_gap(family), grid_points=cfg.grid, tol=cfg.tol)
    click.echo(render_roots(family.order, family.a, found), nl=False)
    return 0


@main.command()
@click.option("--file", "file", type=click.Path(exists=True, dir_okay=False))
@m_option
@a_option
@click.option("--x0", type=str, default=None, help="Start vector v1,v2,... on the simplex.")
@click.option("--tol", type=str, default=None, help="Residual tolerance (default TPT_TOL).")
@click.option("--max-iter", type=int, default=None, help="Iteration cap (default TPT_MAX_ITER).")
@click.option("--damping", type=str, default="0", show_default=True, help="Damping in [0, 1).")
@_recorded
def solve(
    run: RunInfo,
    file: str | None,
    m: int | None,
    a: str | None,
    x0: str | None,
    tol: str | None,
    max_iter: int | None,
    damping: str,
) -> int:
    """Fixed-point iteration x <- P x^(m-1)."""
    cfg = RunConfig(
        subcommand="solve",
        file=file,
        m=m,
        a=_a(a),
        x0=_floats(x0),
        tol=parse_decimal(tol) if tol is not None else settings.TOL,
        max_iter=max_iter if max_iter is not None else settings.MAX_ITER,
        damping=parse_decimal(damping),
    )
    src = _load(cfg, run)
    notice = GENERAL_NOTICE if symmetric_family(src) is None else None
    result = fixed_point_iterate(src, x0=cfg.x0, tol=cfg.tol, max_iter=cfg.max_iter, damping=cfg.damping)
    if not result.converged:
        _journal(click.get_current_context()).log(
            "warn", "solve.nonconverged", f"{result.iterations} steps, residual {result.iterate.residual!r}"
        )
    click.echo(render_solve(result, notice), nl=False)
    return 0


@main.command()
@m_option
@a_option
@click.option("--steps", type=int, required=True)
@click.option("--seed", type=int, required=True)
@click.option("--burn-in", "burn_in", type=int, default=None, help="Default: 10% of steps.")
@click.option("--window", type=str, default=None, help="Initial window w1,...,w(m-1), oldest first.")
@_recorded
def simulate(
    run: RunInfo, m: int | None, a: str | None, steps: int, seed: int, burn_in: int | None, window: str | None
) -> int:
    """Sample the chain and print empirical state frequencies."""
    cfg = RunConfig(subcommand="simulate", m=m, a=_a(a), steps=steps, seed=seed, burn_in=burn_in)
    if cfg.m is None:
        raise click.UsageError("simulate needs --m and --a")
    family = _family(cfg, run)
    start = _ints(window) or [1] * (family.order - 1)
    trace = sample_chain(family, start, steps, seed)
    used = steps // 10 if burn_in is None else burn_in
    empirical = empirical_distribution(trace, used)
    click.echo(render_simulation(trace, used, empirical), nl=False)
    return 0


@main.command()
@m_option
@a_option
@click.option("--steps", type=int, default=100000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@json_option
@_recorded
def report(run: RunInfo, m: int | None, a: str | None, steps: int, seed: int, as_json: bool) -> int:
    """Classification plus fixed-point, lifted-chain and sampled comparison."""
    cfg = RunConfig(subcommand="report", m=m, a=_a(a), steps=steps, seed=seed)
    if cfg.m is None:
        raise click.UsageError("report needs --m and --a")
    family = _family(cfg, run)
    classification = classify_family(family)
    run.case_label = classification.case_label
    cmp = compare_report(family, steps, seed, tol=settings.TOL, max_iter=settings.MAX_ITER)
    out = comparison_out(cmp, classification)
    click.echo(to_json(out) if as_json else render_comparison(out), nl=False)
    return 0


@main.command()
@click.option("--m-min", "m_min", type=int, required=True)
@click.option("--m-max", "m_max", type=int, required=True)
@click.option("--a-step", "a_step", type=str, required=True, help="Grid step for a, e.g. 0.05.")
@json_option
@_recorded
def sweep(run: RunInfo, m_min: int, m_max: int, a_step: str, as_json: bool) -> int:
    """Classify every (m, a) on a grid."""
    ctx = click.get_current_context()
    pairs = sweep_grid(m_min, m_max, parse_decimal(a_step))
    rows = [sweep_row(r) for r in classify_sweep(pairs, workers=ctx.obj["workers"])]
    _journal(ctx).log("info", "sweep.done", f"{len(rows)} families, {sum(r.flags > 0 for r in rows)} flagged")
    click.echo(to_json(rows) if as_json else render_sweep(rows), nl=False)
    return 0


@main.command()
@click.option("--limit", type=int, default=20, show_default=True)
@_recorded
def journal(run: RunInfo, limit: int) -> int:
    """Show recent journal events and run statistics."""
    path = journal_path()
    if not path.exists():
        click.echo(f"no journal at {path} (set TPT_JOURNAL=1 to record runs)")
        return 0
    j = Journal(path=path)
    stats = j.stats()
    click.echo(f"runs {stats['runs']}, failures {stats['failures']}")
    for name, count in stats["by_subcommand"].items():
        click.echo(f"  {name:<14} {count}")
    for label, count in stats["by_case"].items():
        click.echo(f"  case {label:<15} {count}")
    for row in j.recent_logs(limit):
        click.echo(f"{row['ts']} {row['level']:<5} {row['event']:<20} {row['detail'] or ''}")
    return 0


@main.command("export-trace")
@m_option
@a_option
@click.option("--steps", type=int, required=True)
@click.option("--seed", type=int, required=True)
@click.option("--out", "out", type=click.Path(dir_okay=False), default=None)
@click.option("--window", type=str, default=None, help="Initial window w1,...,w(m-1), oldest first.")
@_recorded
def export_trace(
    run: RunInfo, m: int | None, a: str | None, steps: int, seed: int, out: str | None, window: str | None
) -> int:
    """Write a sampled trace, one state per line."""
    cfg = RunConfig(subcommand="export-trace", m=m, a=_a(a), steps=steps, seed=seed)
    if cfg.m is None:
        raise click.UsageError("export-trace needs --m and --a")
    family = _family(cfg, run)
    start = _ints(window) or [1] * (family.order - 1)
    trace = sample_chain(family, start, steps, seed)
    if out is None:
        ensure_dirs()
        target = traces_dir() / default_trace_name(family.order, family.a, seed)
    else:
        target = Path(out)
    target.write_text(format_trace(trace.states.tolist(), seed, family.order, family.a), encoding="utf-8")
    click.echo(str(target))
    return 0


@main.command("materialize")
@m_option
@a_option
@click.option("--out", "out", type=click.Path(dir_okay=False), default=None)
@_recorded
def materialize_cmd(run: RunInfo, m: int | None, a: str | None, out: str | None) -> int:
    """Print (or write) the family as a dense TPT1 tensor."""
    cfg = RunConfig(subcommand="materialize", m=m, a=_a(a))
    if cfg.m is None:
        raise click.UsageError("materialize needs --m and --a")
    family = _family(cfg, run)
    text = format_tpt1(materialize(family), comment=format_sym2(family).strip())
    if out is None:
        click.echo(text, nl=False)
    else:
        Path(out).write_text(text, encoding="utf-8")
        click.echo(out)
    return 0

