from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence, Union

import numpy as np
from scipy.stats import binom

from tptensor.errors import InputError, StructuralError

STOCHASTIC_TOL = 1e-12
SYMMETRY_TOL = 1e-15
ZERO_TOL = 1e-15
SIMPLEX_TOL = 1e-9
MATERIALIZE_MAX_ORDER = 30
# C(m-1, k) stays below the float range up to here
EXACT_WEIGHT_MAX_ORDER = 1000


@dataclass(frozen=True, eq=False)
class TransitionTensor:
    """Dense m-order n-dim tensor, stochastic along the first index.

    ``entries`` has shape ``(n,) * m``; axis k holds index i_{k+1} (0-based
    here, 1-based in every report). C order keeps the last index fastest,
    which is also the TPT1 file order.
    """

    order: int
    dim: int
    entries: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.order < 3:
            raise InputError(f"order must be >= 3, got {self.order}")
        if self.dim < 2:
            raise InputError(f"dim must be >= 2, got {self.dim}")
        arr = np.asarray(self.entries, dtype=float)
        expected = self.dim**self.order
        if arr.size != expected:
            raise StructuralError(
                f"order {self.order} dim {self.dim} needs {expected} entries, got {arr.size}"
            )
        arr = arr.reshape((self.dim,) * self.order).copy()
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @classmethod
    def from_flat(cls, order: int, dim: int, values: Sequence[float]) -> TransitionTensor:
        return cls(order=order, dim=dim, entries=np.asarray(values, dtype=float))

    def flat(self) -> list[float]:
        return [float(v) for v in self.entries.ravel(order="C")]

    def entry(self, index: Sequence[int]) -> float:
        """Entry at a 1-based index tuple."""
        if len(index) != self.order or any(i < 1 or i > self.dim for i in index):
            raise InputError(f"index {tuple(index)} out of range for order {self.order} dim {self.dim}")
        return float(self.entries[tuple(i - 1 for i in index)])


@dataclass(frozen=True)
class SymmetricFamily2:
    """Symmetric member of T_{m,2}, kept implicit as (m, a).

    Stochasticity at i2=...=im=1 forces b = 1 - a, so ``a`` is the only
    free parameter. An entry equals a when its index tuple holds an even
    number of 2s and b otherwise.
    """

    order: int
    a: float

    def __post_init__(self) -> None:
        if isinstance(self.order, bool) or int(self.order) != self.order or self.order < 3:
            raise InputError(f"order must be an integer >= 3, got {self.order!r}")
        if not (0.0 <= self.a <= 1.0):
            raise InputError(f"a must lie in [0, 1], got {self.a!r}")

    @property
    def dim(self) -> int:
        return 2

    @property
    def b(self) -> float:
        return 1.0 - self.a

    @property
    def c(self) -> float:
        return self.a - self.b

    @property
    def contraction_bound(self) -> float:
        return abs(self.c) * (self.order - 1)

    def entry(self, index: Sequence[int]) -> float:
        if len(index) != self.order or any(i not in (1, 2) for i in index):
            raise InputError(f"index {tuple(index)} out of range for order {self.order} dim 2")
        twos = sum(1 for i in index if i == 2)
        return self.a if twos % 2 == 0 else self.b


TensorLike = Union[TransitionTensor, SymmetricFamily2]


@dataclass(frozen=True)
class SimplexPoint:
    coords: tuple[float, ...]
    residual: float

    @property
    def x(self) -> float:
        return self.coords[0]


@dataclass(frozen=True)
class ColumnViolation:
    tail: tuple[int, ...]
    total: float


@dataclass(frozen=True)
class EntryViolation:
    index: tuple[int, ...]
    value: float


@dataclass
class ValidationReport:
    columns: list[ColumnViolation] = field(default_factory=list)
    entries: list[EntryViolation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.columns and not self.entries

    def messages(self) -> list[str]:
        out = [f"column {v.tail}: first-index sum {v.total!r} != 1" for v in self.columns]
        out += [f"entry {v.index}: value {v.value!r} outside [0, 1]" for v in self.entries]
        return out


def make_symmetric2(m: int, a: float) -> SymmetricFamily2:
    return SymmetricFamily2(order=m, a=float(a))


def special_p1(m: int) -> SymmetricFamily2:
    return make_symmetric2(m, 1.0)


def special_p2(m: int) -> SymmetricFamily2:
    return make_symmetric2(m, 0.0)


def _twos_parity(m: int) -> np.ndarray:
    # parity of the number of 2s for every index tuple, shape (2,)*m
    base = np.array([0, 1], dtype=np.int8)
    parity = base
    for _ in range(m - 1):
        parity = np.bitwise_xor.outer(parity, base)
    return parity


def materialize(family: SymmetricFamily2) -> TransitionTensor:
    m = family.order
    if m > MATERIALIZE_MAX_ORDER:
        raise InputError(f"refusing to materialize 2^{m} entries (order cap {MATERIALIZE_MAX_ORDER})")
    parity = _twos_parity(m)
    entries = np.where(parity == 0, family.a, family.b)
    return TransitionTensor(order=m, dim=2, entries=entries)


def as_dense(tensor: TensorLike) -> TransitionTensor:
    if isinstance(tensor, SymmetricFamily2):
        return materialize(tensor)
    return tensor


def validate(tensor: TransitionTensor) -> ValidationReport:
    arr = np.asarray(tensor.entries)
    if arr.size != tensor.dim**tensor.order or arr.shape != (tensor.dim,) * tensor.order:
        raise StructuralError(
            f"declared order {tensor.order} dim {tensor.dim} does not match entries of shape {arr.shape}"
        )
    report = ValidationReport()
    sums = arr.sum(axis=0)
    for tail in np.ndindex(sums.shape):
        total = float(sums[tail])
        if not abs(total - 1.0) <= STOCHASTIC_TOL:
            report.columns.append(ColumnViolation(tail=tuple(i + 1 for i in tail), total=total))
    bad = ~((arr >= 0.0) & (arr <= 1.0))
    for index in zip(*np.nonzero(bad)):
        report.entries.append(
            EntryViolation(index=tuple(int(i) + 1 for i in index), value=float(arr[tuple(index)]))
        )
    return report


def is_symmetric(tensor: TensorLike) -> bool:
    if isinstance(tensor, SymmetricFamily2):
        return True
    arr = tensor.entries
    shape = arr.shape
    idx = np.indices(shape).reshape(tensor.order, -1)
    canonical = np.ravel_multi_index(tuple(np.sort(idx, axis=0)), shape)
    flat = arr.ravel()
    return bool(np.all(np.abs(flat - flat[canonical]) <= SYMMETRY_TOL))


def symmetric_family(tensor: TensorLike) -> SymmetricFamily2 | None:
    """The (m, a) family a dense tensor spells out entry by entry, if any."""
    if isinstance(tensor, SymmetricFamily2):
        return tensor
    if tensor.dim != 2 or tensor.order > MATERIALIZE_MAX_ORDER or not is_symmetric(tensor):
        return None
    a = float(tensor.entries[(0,) * tensor.order])
    if not (0.0 <= a <= 1.0):
        return None
    family = make_symmetric2(tensor.order, a)
    expected = np.where(_twos_parity(tensor.order) == 0, family.a, family.b)
    if np.all(np.abs(tensor.entries - expected) <= STOCHASTIC_TOL):
        return family
    return None


def _proper_subsets(n: int) -> Iterable[tuple[int, ...]]:
    subsets = [s for k in range(1, n) for s in itertools.combinations(range(n), k)]
    return sorted(subsets)


def is_reducible(tensor: TensorLike) -> tuple[int, ...] | None:
    """Return the first witness subset I (1-based) of reducibility, or None.

    I witnesses reducibility when every entry with i1 in I and all of
    i2..im outside I is zero. Subsets are tried as sorted tuples in
    lexicographic order.
    """
    if isinstance(tensor, SymmetricFamily2):
        # each block is the single entry (i, j, ..., j) with j the other state
        m = tensor.order
        if tensor.entry((1,) + (2,) * (m - 1)) <= ZERO_TOL:
            return (1,)
        if tensor.entry((2,) + (1,) * (m - 1)) <= ZERO_TOL:
            return (2,)
        return None
    arr = tensor.entries
    n = arr.shape[0]
    m = arr.ndim
    for subset in _proper_subsets(n):
        outside = [j for j in range(n) if j not in subset]
        block = arr[np.ix_(list(subset), *([outside] * (m - 1)))]
        if float(np.max(np.abs(block))) <= ZERO_TOL:
            return tuple(i + 1 for i in subset)
    return None


def check_simplex(v: Sequence[float], n: int, tol: float = SIMPLEX_TOL) -> np.ndarray:
    vec = np.asarray(v, dtype=float)
    if vec.shape != (n,):
        raise InputError(f"vector of length {vec.size} given, dimension is {n}")
    if not np.all(np.isfinite(vec)):
        raise InputError(f"vector {vec.tolist()} has non-finite components")
    if np.any(vec < -tol) or abs(float(vec.sum()) - 1.0) > tol:
        raise InputError(f"vector {vec.tolist()} is not on the probability simplex")
    return vec


def binomial_terms(m: int, x: np.ndarray | float, y: np.ndarray | float) -> Iterator[np.ndarray]:
    """Yield C(m-1, k) x^(m-1-k) y^k for k = 0..m-1, elementwise.

    Past EXACT_WEIGHT_MAX_ORDER the binomial no longer fits a double, so
    each term is the binomial log-pmf at p = y / (x + y), scaled back by
    (x + y)^(m-1).
    """
    xs = np.asarray(x, dtype=float)
    ys = np.asarray(y, dtype=float)
    if m <= EXACT_WEIGHT_MAX_ORDER:
        for k in range(m):
            yield float(math.comb(m - 1, k)) * np.power(xs, m - 1 - k) * np.power(ys, k)
        return
    xs = np.maximum(xs, 0.0)
    ys = np.maximum(ys, 0.0)
    total = xs + ys
    p = np.divide(ys, total, out=np.zeros_like(total), where=total > 0.0)
    scale = (m - 1) * np.log(np.where(total > 0.0, total, 1.0))
    for k in range(m):
        yield np.where(total > 0.0, np.exp(binom.logpmf(k, m - 1, p) + scale), 0.0)


def _family_contract(family: SymmetricFamily2, x: float, y: float) -> np.ndarray:
    m = family.order
    a, b = family.a, family.b
    first = []
    second = []
    for k, weight in enumerate(binomial_terms(m, x, y)):
        term = float(weight)
        # i1=1 adds no 2; i1=2 adds one
        first.append((a if k % 2 == 0 else b) * term)
        second.append((b if k % 2 == 0 else a) * term)
    return np.array([math.fsum(first), math.fsum(second)])


def contract(tensor: TensorLike, v: Sequence[float]) -> np.ndarray:
    """Apply x -> P x^{m-1}: contract every index but the first with v."""
    vec = check_simplex(v, tensor.dim)
    if isinstance(tensor, SymmetricFamily2):
        return _family_contract(tensor, float(vec[0]), float(vec[1]))
    out = tensor.entries
    for _ in range(tensor.order - 1):
        out = out @ vec
    return np.asarray(out, dtype=float)


def residual(tensor: TensorLike, v: Sequence[float]) -> float:
    vec = check_simplex(v, tensor.dim)
    return float(np.max(np.abs(contract(tensor, vec) - vec)))


def simplex_point(tensor: TensorLike, coords: Sequence[float]) -> SimplexPoint:
    vec = np.asarray(coords, dtype=float)
    vec = np.where((vec < 0.0) & (vec >= -ZERO_TOL), 0.0, vec)
    return SimplexPoint(coords=tuple(float(c) for c in vec), residual=residual(tensor, vec))
