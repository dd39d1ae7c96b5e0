"""Seeded sampling of the higher-order chain behind a transition tensor.

Traces are reproducible bit for bit: uniforms come from numpy's PCG64
bit generator seeded with the given integer and are drawn as one block
of ``steps`` doubles before the walk starts. Step t picks the smallest
state whose cumulative probability exceeds the t-th uniform.
"""
from __future__ import annotations

import bisect
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from tptensor.analytic2d import enumerate_stationary
from tptensor.errors import InputError
from tptensor.solvers import (
    LIFTED_MAX_STATES,
    IterationResult,
    LiftedStationary,
    fixed_point_iterate,
    lifted_chain_matrix,
    matrix_stationary,
)
from tptensor.tensor_core import SimplexPoint, SymmetricFamily2, TensorLike, as_dense

BURN_IN_FRACTION = 10


@dataclass(frozen=True)
class ChainTrace:
    """States are 1-based; the first m-1 of them are the initial window."""

    states: np.ndarray
    seed: int
    initial_window: tuple[int, ...]
    steps: int
    order: int

    @property
    def sampled(self) -> np.ndarray:
        return self.states[self.order - 1:]


def _check_window(tensor: TensorLike, window: Sequence[int]) -> tuple[int, ...]:
    m, n = tensor.order, tensor.dim
    win = tuple(int(s) for s in window)
    if len(win) != m - 1:
        raise InputError(f"initial window needs {m - 1} states, got {len(win)}")
    if any(s < 1 or s > n for s in win):
        raise InputError(f"initial window {win} has states outside 1..{n}")
    return win


def _walk_family(family: SymmetricFamily2, window: tuple[int, ...], uniforms: np.ndarray) -> list[int]:
    # P(next = 1) is a when the window holds an even number of 2s, b otherwise
    a, b = family.a, family.b
    recent = deque(window, maxlen=len(window))
    twos = sum(1 for s in window if s == 2)
    out = []
    for u in uniforms.tolist():
        nxt = 1 if u < (a if twos % 2 == 0 else b) else 2
        if recent[0] == 2:
            twos -= 1
        recent.append(nxt)
        if nxt == 2:
            twos += 1
        out.append(nxt)
    return out


def _walk_dense(tensor: TensorLike, window: tuple[int, ...], uniforms: np.ndarray) -> list[int]:
    dense = as_dense(tensor)
    n, m = dense.dim, dense.order
    size = n ** (m - 1)
    if size > LIFTED_MAX_STATES:
        raise InputError(f"sampling needs {size} window states (cap {LIFTED_MAX_STATES})")
    cumulative = np.cumsum(dense.entries.reshape(n, size), axis=0).T.tolist()
    shift = n ** (m - 2)
    # window index is the C-order position of (i2, ..., im) = newest state first
    w = 0
    for s in reversed(window):
        w = w * n + (s - 1)
    out = []
    for u in uniforms.tolist():
        i1 = min(bisect.bisect_right(cumulative[w], u), n - 1)
        out.append(i1 + 1)
        w = i1 * shift + w // n
    return out


def sample_chain(tensor: TensorLike, initial_window: Sequence[int], steps: int, seed: int) -> ChainTrace:
    """Run the chain for ``steps`` transitions from ``initial_window`` (oldest first)."""
    window = _check_window(tensor, initial_window)
    if steps < 1:
        raise InputError(f"steps must be >= 1, got {steps}")
    rng = np.random.Generator(np.random.PCG64(seed))
    uniforms = rng.random(steps)
    if isinstance(tensor, SymmetricFamily2):
        walked = _walk_family(tensor, window, uniforms)
    else:
        walked = _walk_dense(tensor, window, uniforms)
    states = np.asarray(list(window) + walked, dtype=np.int32)
    return ChainTrace(states=states, seed=seed, initial_window=window, steps=steps, order=tensor.order)


def empirical_distribution(trace: ChainTrace, burn_in: int | None = None, dim: int = 2) -> tuple[Fraction, ...]:
    """State frequencies over the sampled states after ``burn_in`` (default 10% of steps)."""
    if burn_in is None:
        burn_in = trace.steps // BURN_IN_FRACTION
    if burn_in < 0 or burn_in >= trace.steps:
        raise InputError(f"burn_in must lie in [0, {trace.steps}), got {burn_in}")
    kept = trace.sampled[burn_in:]
    counts = np.bincount(kept - 1, minlength=dim)
    total = int(kept.size)
    return tuple(Fraction(int(c), total) for c in counts)


@dataclass(frozen=True)
class ComparisonReport:
    family: SymmetricFamily2
    steps: int
    seed: int
    burn_in: int
    analytic: tuple[SimplexPoint, ...]
    fixed_point: IterationResult
    lifted: LiftedStationary | None
    empirical: tuple[Fraction, ...]
    deviations: tuple[tuple[str, str, float], ...]


def _gap(u: Sequence[float], v: Sequence[float]) -> float:
    return max(abs(float(p) - float(q)) for p, q in zip(u, v))


def compare_report(
    family: SymmetricFamily2,
    steps: int,
    seed: int,
    x0: Sequence[float] = (0.9, 0.1),
    initial_window: Sequence[int] | None = None,
    burn_in: int | None = None,
    tol: float = 1e-10,
    max_iter: int = 10000,
) -> ComparisonReport:
    """Put the four stationary notions side by side.

    Nothing here asserts they agree. Deviations against the analytic set
    use the nearest stationary vector.
    """
    m = family.order
    window = tuple(initial_window) if initial_window is not None else (1,) * (m - 1)
    analytic = enumerate_stationary(family)
    fixed = fixed_point_iterate(family, x0=x0, tol=tol, max_iter=max_iter)
    lifted = None
    if 2 ** (m - 1) <= LIFTED_MAX_STATES:
        lifted = matrix_stationary(lifted_chain_matrix(family), dim=2)
    trace = sample_chain(family, window, steps, seed)
    used_burn_in = steps // BURN_IN_FRACTION if burn_in is None else burn_in
    empirical = empirical_distribution(trace, used_burn_in)

    named: list[tuple[str, tuple[float, ...]]] = [("fixed_point", fixed.iterate.coords)]
    if lifted is not None:
        named.append(("lifted", tuple(float(v) for v in lifted.marginal)))
    named.append(("empirical", tuple(float(v) for v in empirical)))

    deviations: list[tuple[str, str, float]] = []
    for name, vec in named:
        deviations.append(("analytic", name, min(_gap(p.coords, vec) for p in analytic)))
    for i, (left, u) in enumerate(named):
        for right, v in named[i + 1:]:
            deviations.append((left, right, _gap(u, v)))

    return ComparisonReport(
        family=family,
        steps=steps,
        seed=seed,
        burn_in=used_burn_in,
        analytic=analytic,
        fixed_point=fixed,
        lifted=lifted,
        empirical=empirical,
        deviations=tuple(deviations),
    )
