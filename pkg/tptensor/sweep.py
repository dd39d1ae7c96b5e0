from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Callable, Sequence, TypeVar

from tptensor.analytic2d import ClassificationReport, classify
from tptensor.errors import InputError
from tptensor.tensor_core import make_symmetric2

T = TypeVar("T")

Pair = tuple[int, float]


def sweep_grid(m_lo: int, m_hi: int, a_step: float) -> list[Pair]:
    """(m, a) pairs with a = k / N so that 0.05-style steps hit 0 and 1 exactly."""
    if m_lo < 3 or m_hi < m_lo:
        raise InputError(f"need 3 <= m_min <= m_max, got {m_lo}..{m_hi}")
    step = Fraction(str(a_step)) if isinstance(a_step, float) else Fraction(a_step)
    if step <= 0 or step > 1:
        raise InputError(f"a_step must lie in (0, 1], got {a_step!r}")
    if (1 / step).denominator != 1:
        raise InputError(f"a_step {a_step!r} does not divide [0, 1] evenly")
    count = int(1 / step)
    return [(m, k / count) for m in range(m_lo, m_hi + 1) for k in range(count + 1)]


def sweep(pairs: Sequence[Pair], task: Callable[[int, float], T], workers: int = 1) -> list[T]:
    """Run ``task(m, a)`` per pair; results come back ordered by (m, a) for any pool size."""
    ordered = sorted(set(pairs))
    with ThreadPoolExecutor(max_workers=max(1, int(workers or 1))) as executor:
        futures = [executor.submit(task, m, a) for m, a in ordered]
        return [f.result() for f in futures]


def _classify_pair(m: int, a: float) -> ClassificationReport:
    return classify(make_symmetric2(m, a))


def classify_sweep(pairs: Sequence[Pair], workers: int = 1) -> list[ClassificationReport]:
    return sweep(pairs, _classify_pair, workers)
