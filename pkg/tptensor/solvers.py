from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.optimize import minimize_scalar
from scipy.sparse.csgraph import breadth_first_order, connected_components

from tptensor.analytic2d import g1_direct
from tptensor.errors import EvaluationError, InputError
from tptensor.tensor_core import (
    SimplexPoint,
    SymmetricFamily2,
    TensorLike,
    as_dense,
    check_simplex,
    contract,
    simplex_point,
)

MERGE_TOL = 1e-8
BISECT_WIDTH = 1e-14
LIFTED_MAX_STATES = 2**20
RATE_WINDOW = 10

RealFunction = Callable[..., object]


@dataclass(frozen=True)
class RootSet:
    roots: tuple[float, ...]
    bracketing_intervals: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class IterationResult:
    iterate: SimplexPoint
    iterations: int
    residual_history: tuple[float, ...]
    converged: bool
    rate_estimate: float


@dataclass(frozen=True)
class LiftedStationary:
    distribution: np.ndarray
    marginal: np.ndarray
    iterations: int
    ergodic: bool | None
    averaged: bool


def stationarity_gap(family: SymmetricFamily2) -> Callable[[object], object]:
    """h(x) = g1(x) - x built on the term-by-term evaluator; accepts arrays."""

    def gap(x: object) -> object:
        return g1_direct(family, x) - x

    return gap


def _scalar(h: RealFunction, x: float) -> float:
    v = float(h(x))  # type: ignore[arg-type]
    if not math.isfinite(v):
        raise EvaluationError(x, v)
    return v


def _grid_values(h: RealFunction, grid: np.ndarray) -> np.ndarray:
    try:
        values = np.asarray(h(grid), dtype=float)
        if values.shape != grid.shape:
            raise TypeError("not vectorized")
    except (TypeError, ValueError):
        values = np.array([float(h(float(x))) for x in grid])  # type: ignore[arg-type]
    bad = np.nonzero(~np.isfinite(values))[0]
    if bad.size:
        i = int(bad[0])
        raise EvaluationError(float(grid[i]), float(values[i]))
    return values


def _bisect(h: RealFunction, lo: float, hi: float, f_lo: float) -> float:
    for _ in range(200):
        if hi - lo <= BISECT_WIDTH:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = _scalar(h, mid)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0.0) == (f_lo > 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _min_abs(h: RealFunction, lo: float, hi: float) -> float:
    res = minimize_scalar(
        lambda t: abs(_scalar(h, t)),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": BISECT_WIDTH, "maxiter": 500},
    )
    return float(res.x)


def root_scan(h: RealFunction, grid_points: int = 100001, tol: float = 1e-12) -> RootSet:
    """All roots of a continuous h on [0, 1] by grid scan and refinement.

    Sign changes between grid neighbours are bisected. The endpoints are
    roots only when |h| <= tol there. Interior grid points with |h| <= tol
    but no neighbouring sign change are refined by minimizing |h|.
    """
    if grid_points < 1001:
        raise InputError(f"grid_points must be >= 1001, got {grid_points}")
    grid = np.linspace(0.0, 1.0, grid_points)
    values = _grid_values(h, grid)

    found: list[tuple[float, float, tuple[float, float]]] = []
    for i in (0, grid_points - 1):
        if abs(values[i]) <= tol:
            found.append((float(grid[i]), abs(float(values[i])), (float(grid[i]), float(grid[i]))))

    signs = np.sign(values)
    change = signs[:-1] * signs[1:] < 0
    for i in np.nonzero(change)[0]:
        lo, hi = float(grid[i]), float(grid[i + 1])
        root = _bisect(h, lo, hi, float(values[i]))
        found.append((root, abs(_scalar(h, root)), (lo, hi)))

    near = np.abs(values) <= tol
    near[0] = near[-1] = False
    touched = np.zeros(grid_points, dtype=bool)
    touched[:-1] |= change
    touched[1:] |= change
    for i in np.nonzero(near & ~touched)[0]:
        lo, hi = float(grid[i - 1]), float(grid[i + 1])
        x = _min_abs(h, lo, hi)
        fx = abs(_scalar(h, x))
        if abs(values[i]) < fx:
            x, fx = float(grid[i]), abs(float(values[i]))
        if fx <= tol:
            found.append((x, fx, (lo, hi)))

    found.sort(key=lambda r: r[0])
    merged: list[tuple[float, float, tuple[float, float]]] = []
    for item in found:
        if merged and item[0] - merged[-1][0] <= MERGE_TOL:
            if item[1] < merged[-1][1]:
                merged[-1] = item
            continue
        merged.append(item)
    return RootSet(
        roots=tuple(r[0] for r in merged),
        bracketing_intervals=tuple(r[2] for r in merged),
    )


def _rate(history: Sequence[float]) -> float:
    tail = list(history[-(RATE_WINDOW + 1):])
    ratios = [b / a for a, b in zip(tail, tail[1:]) if a > 0.0]
    if not ratios:
        return 0.0
    if any(r == 0.0 for r in ratios):
        return 0.0
    return math.exp(math.fsum(math.log(r) for r in ratios) / len(ratios))


def _renormalize(v: np.ndarray) -> np.ndarray:
    v = np.where(v < 0.0, 0.0, v)
    return v / v.sum()


def fixed_point_iterate(
    tensor: TensorLike,
    x0: Sequence[float] | None = None,
    tol: float = 1e-10,
    max_iter: int = 10000,
    damping: float = 0.0,
) -> IterationResult:
    """Iterate x <- (1 - damping) P x^(m-1) + damping x.

    Each step records the residual of the new iterate, so a converged
    result always satisfies residual <= tol.
    """
    n = tensor.dim
    if not (0.0 <= damping < 1.0):
        raise InputError(f"damping must lie in [0, 1), got {damping!r}")
    if max_iter < 1:
        raise InputError(f"max_iter must be >= 1, got {max_iter}")
    if not tol > 0.0:
        raise InputError(f"tol must be positive, got {tol!r}")
    x = check_simplex(np.full(n, 1.0 / n) if x0 is None else x0, n)
    fx = contract(tensor, x)

    history: list[float] = []
    converged = False
    for _ in range(max_iter):
        x = _renormalize((1.0 - damping) * fx + damping * x)
        fx = contract(tensor, x)
        r = float(np.max(np.abs(fx - x)))
        history.append(r)
        if r <= tol:
            converged = True
            break
    return IterationResult(
        iterate=simplex_point(tensor, x),
        iterations=len(history),
        residual_history=tuple(history),
        converged=converged,
        rate_estimate=_rate(history),
    )


def lifted_chain_matrix(tensor: TensorLike) -> sp.csr_matrix:
    """Row-stochastic matrix of the first-order chain on windows.

    Window (i2, ..., im) moves to (i1, i2, ..., i_{m-1}) with probability
    p_{i1 i2 ... im}. Windows are numbered in C order of their indices.
    """
    n, m = tensor.dim, tensor.order
    size = n ** (m - 1)
    if size > LIFTED_MAX_STATES:
        raise InputError(f"lifted chain would have {size} states (cap {LIFTED_MAX_STATES})")
    dense = as_dense(tensor)
    probs = dense.entries.reshape(n, size)
    windows = np.arange(size)
    rows = np.tile(windows, n)
    cols = np.concatenate([i1 * n ** (m - 2) + windows // n for i1 in range(n)])
    data = probs.ravel()
    keep = data != 0.0
    return sp.csr_matrix((data[keep], (rows[keep], cols[keep])), shape=(size, size))


def chain_period(matrix: sp.csr_matrix) -> int | None:
    """Period of a strongly connected chain, None when it has several classes."""
    count, _ = connected_components(matrix, directed=True, connection="strong")
    if count != 1:
        return None
    order, pred = breadth_first_order(matrix, 0, directed=True, return_predecessors=True)
    level = np.zeros(matrix.shape[0], dtype=np.int64)
    for v in order[1:]:
        level[v] = level[pred[v]] + 1
    coo = matrix.tocoo()
    diffs = np.abs(level[coo.row] + 1 - level[coo.col])
    return int(np.gcd.reduce(diffs)) or 1


def matrix_stationary(
    matrix: sp.csr_matrix,
    dim: int,
    tol: float = 1e-12,
    max_iter: int = 10**6,
    start: np.ndarray | None = None,
) -> LiftedStationary:
    """Power iteration pi <- pi M from the uniform (or given) start.

    Ergodicity is True only for a single aperiodic class; otherwise it is
    None and the result is whatever the start distribution reaches. When
    the step norm stops shrinking over 100 steps the last iterates are
    averaged over the detected period.
    """
    size = matrix.shape[0]
    pi = np.full(size, 1.0 / size) if start is None else np.asarray(start, dtype=float)
    period = chain_period(matrix)
    ergodic: bool | None = True if period == 1 else None
    transposed = matrix.T.tocsr()

    steps: list[float] = []
    keep = max(8, period or 0)
    recent: list[np.ndarray] = [pi]
    averaged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        nxt = transposed @ pi
        step = float(np.max(np.abs(nxt - pi)))
        pi = nxt
        recent = (recent + [pi])[-keep:]
        if step <= tol:
            break
        steps.append(step)
        if len(steps) > 100 and steps[-1] >= steps[-101] * (1.0 - 1e-9):
            span = max(2, period or 2)
            pi = np.mean(np.stack(recent[-span:]), axis=0)
            averaged = True
            break
    pi = pi / pi.sum()
    marginal = pi.reshape(dim, size // dim).sum(axis=1)
    return LiftedStationary(distribution=pi, marginal=marginal, iterations=iterations, ergodic=ergodic, averaged=averaged)
