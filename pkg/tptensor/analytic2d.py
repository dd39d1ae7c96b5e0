"""Closed-form machinery for symmetric order-m dimension-2 tensors.

With x on the simplex, u = 2x - 1 and c = a - b, the first contraction
component reduces to

    g1(x) = 1/2 + (c/2) u^(m-1)

so h(x) = g1(x) - x = (u/2)(c u^(m-2) - 1). Every stationary vector is a
root of h; the root u = 0 always exists, the others need |c| = 1.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Union

import numpy as np

from tptensor.errors import InputError
from tptensor.tensor_core import SimplexPoint, SymmetricFamily2, binomial_terms, is_reducible, simplex_point

BINOMIAL_MAX = 64
EXPANSION_MAX_ORDER = 40
MERGE_TOL = 1e-8
RESIDUAL_TOL = 1e-10
CASE_TOL = 1e-12
SET_TOL = 1e-9

ArrayOrFloat = Union[float, np.ndarray]

EQUAL_AB = "EqualAB"
A_GREATER_LT1 = "AGreater_lt1"
A_GREATER_EQ1 = "AGreater_eq1"
A_GREATER_GT1 = "AGreater_gt1"
B_GREATER_EVEN = "BGreater_even"
B_GREATER_LT1 = "BGreater_lt1"
B_GREATER_EQ1 = "BGreater_eq1"
B_GREATER_GT1 = "BGreater_gt1"

CASE_LABELS = (
    EQUAL_AB,
    A_GREATER_LT1,
    A_GREATER_EQ1,
    A_GREATER_GT1,
    B_GREATER_EVEN,
    B_GREATER_LT1,
    B_GREATER_EQ1,
    B_GREATER_GT1,
)


@lru_cache(maxsize=None)
def _pascal_row(n: int) -> tuple[int, ...]:
    if n == 0:
        return (1,)
    prev = _pascal_row(n - 1)
    return (1,) + tuple(prev[k - 1] + prev[k] for k in range(1, n)) + (1,)


def binomial(n: int, k: int) -> int:
    if n < 0 or n > BINOMIAL_MAX:
        raise InputError(f"binomial: n={n} outside [0, {BINOMIAL_MAX}]")
    if k < 0 or k > n:
        raise InputError(f"binomial: k={k} outside [0, {n}]")
    return _pascal_row(n)[k]


def check_lemma3(n: int) -> bool:
    """Even- and odd-index binomial sums of row n both equal 2^(n-1)."""
    row = [binomial(n, k) for k in range(n + 1)]
    even = sum(row[0::2])
    odd = sum(row[1::2])
    return even == odd == 2 ** (n - 1)


def check_binomial_ratio(m: int) -> bool:
    """(m-1)/(m-t) C(m-2, t-1) == C(m-1, t-1) for t = 1..m-1."""
    return all(
        Fraction(m - 1, m - t) * binomial(m - 2, t - 1) == binomial(m - 1, t - 1) for t in range(1, m)
    )


def _unit(x: ArrayOrFloat, name: str = "x") -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    if not np.all((arr >= 0.0) & (arr <= 1.0)):
        raise InputError(f"{name} must lie in [0, 1], got {x!r}")
    return arr, arr.ndim == 0


def _out(arr: np.ndarray, scalar: bool) -> ArrayOrFloat:
    return float(arr) if scalar else arr


def _ipow(base: ArrayOrFloat, e: int) -> ArrayOrFloat:
    # square-and-multiply; underflow to 0 for large e is fine
    result = np.ones_like(base) if isinstance(base, np.ndarray) else 1.0
    while e > 0:
        if e & 1:
            result = result * base
        base = base * base
        e >>= 1
    return result


def _parity_sum(m: int, even_coef: float, odd_coef: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    # Neumaier-compensated sum over k of C(m-1,k) q_k x^(m-1-k) y^k
    total = np.zeros_like(x)
    comp = np.zeros_like(x)
    for k, weight in enumerate(binomial_terms(m, x, y)):
        q = even_coef if k % 2 == 0 else odd_coef
        term = q * weight
        t = total + term
        comp += np.where(np.abs(total) >= np.abs(term), (total - t) + term, (term - t) + total)
        total = t
    return total + comp


def g1_direct(family: SymmetricFamily2, x: ArrayOrFloat) -> ArrayOrFloat:
    """f1(x, 1-x) summed term by term; the reference evaluator."""
    arr, scalar = _unit(x)
    res = _parity_sum(family.order, family.a, family.b, arr, 1.0 - arr)
    return _out(res, scalar)


def g2_direct(family: SymmetricFamily2, y: ArrayOrFloat) -> ArrayOrFloat:
    """f2(1-y, y) summed term by term."""
    arr, scalar = _unit(y, "y")
    res = _parity_sum(family.order, family.b, family.a, 1.0 - arr, arr)
    return _out(res, scalar)


def g1_closed(family: SymmetricFamily2, x: ArrayOrFloat) -> ArrayOrFloat:
    arr, scalar = _unit(x)
    res = 0.5 + (family.c / 2.0) * _ipow(2.0 * arr - 1.0, family.order - 1)
    return _out(np.asarray(res), scalar)


def g1_closed_literal(family: SymmetricFamily2, x: ArrayOrFloat) -> ArrayOrFloat:
    """The reduced form with the printed constant: b for even m, a for odd m."""
    arr, scalar = _unit(x)
    const = family.b if family.order % 2 == 0 else family.a
    res = const + (family.c / 2.0) * _ipow(2.0 * arr - 1.0, family.order - 1)
    return _out(np.asarray(res), scalar)


def closed_form_offset(family: SymmetricFamily2) -> float:
    const = family.b if family.order % 2 == 0 else family.a
    return const - 0.5


def g2_closed(family: SymmetricFamily2, y: ArrayOrFloat) -> ArrayOrFloat:
    arr, scalar = _unit(y, "y")
    res = 0.5 - (family.c / 2.0) * _ipow(1.0 - 2.0 * arr, family.order - 1)
    return _out(np.asarray(res), scalar)


def g1_prime(family: SymmetricFamily2, x: ArrayOrFloat) -> ArrayOrFloat:
    arr, scalar = _unit(x)
    m = family.order
    res = family.c * (m - 1) * _ipow(2.0 * arr - 1.0, m - 2)
    return _out(np.asarray(res), scalar)


def h(family: SymmetricFamily2, x: ArrayOrFloat) -> ArrayOrFloat:
    return g1_closed(family, x) - x


def h_prime(family: SymmetricFamily2, x: ArrayOrFloat) -> ArrayOrFloat:
    return g1_prime(family, x) - 1.0


@dataclass(frozen=True)
class ReducedPolynomial:
    """g1 in the monomial basis, highest degree first.

    ``a_part[t-1]`` and ``b_part[t-1]`` are the exact integer multipliers of
    a and b in the coefficient of x^(m-t).
    """

    order: int
    a: float
    b: float
    a_part: tuple[int, ...]
    b_part: tuple[int, ...]

    @property
    def coefficients(self) -> tuple[float, ...]:
        return tuple(self.a * p + self.b * q for p, q in zip(self.a_part, self.b_part))

    @property
    def degree(self) -> int:
        for i, (p, q) in enumerate(zip(self.a_part, self.b_part)):
            if self.a * p + self.b * q != 0:
                return len(self.a_part) - 1 - i
        return 0

    def evaluate(self, x: float) -> float:
        # exact rational Horner; a, b and x are binary fractions
        fa, fb, fx = Fraction(self.a), Fraction(self.b), Fraction(x)
        acc = Fraction(0)
        for p, q in zip(self.a_part, self.b_part):
            acc = acc * fx + p * fa + q * fb
        return float(acc)


def _expand_parts(m: int) -> tuple[list[int], list[int]]:
    # ascending-degree integer polynomials E (even k -> a) and O (odd k -> b)
    even = [0] * m
    odd = [0] * m
    for k in range(m):
        target = even if k % 2 == 0 else odd
        outer = binomial(m - 1, k)
        for j in range(k + 1):
            sign = -1 if j % 2 else 1
            target[m - 1 - k + j] += sign * outer * binomial(k, j)
    return even, odd


def g1_coefficients(family: SymmetricFamily2) -> ReducedPolynomial:
    m = family.order
    if m > EXPANSION_MAX_ORDER:
        raise InputError(f"exact expansion is capped at order {EXPANSION_MAX_ORDER}, got {m}")
    even, odd = _expand_parts(m)
    return ReducedPolynomial(
        order=m,
        a=family.a,
        b=family.b,
        a_part=tuple(reversed(even)),
        b_part=tuple(reversed(odd)),
    )


def closed_form_coefficients(family: SymmetricFamily2) -> ReducedPolynomial:
    """Coefficients from the closed per-degree formula.

    alpha_(m-t) = (-1)^(t-1) 2^(m-t-1) (a-b) (m-1)/(m-t) C(m-2, t-1), with
    constant term b for even m and a for odd m.
    """
    m = family.order
    if m > EXPANSION_MAX_ORDER:
        raise InputError(f"exact expansion is capped at order {EXPANSION_MAX_ORDER}, got {m}")
    a_part: list[int] = []
    for t in range(1, m):
        k = Fraction(m - 1, m - t) * binomial(m - 2, t - 1) * 2 ** (m - t - 1)
        if k.denominator != 1:
            raise ArithmeticError(f"non-integral coefficient {k} at t={t}")
        a_part.append(int(k) if t % 2 == 1 else -int(k))
    b_part = [-p for p in a_part]
    if m % 2 == 0:
        a_part.append(0)
        b_part.append(1)
    else:
        a_part.append(1)
        b_part.append(0)
    return ReducedPolynomial(order=m, a=family.a, b=family.b, a_part=tuple(a_part), b_part=tuple(b_part))


def critical_points(family: SymmetricFamily2) -> tuple[float, ...]:
    """Zeros of h' = c(m-1)(2x-1)^(m-2) - 1 inside [0, 1]."""
    m = family.order
    k = family.c * (m - 1)
    if abs(k) < 1.0 - CASE_TOL:
        return ()
    root = min(1.0, abs(k) ** (-1.0 / (m - 2)))
    if (m - 2) % 2 == 1:
        u = root if k > 0 else -root
        return (0.5 * (1.0 + u),)
    if k < 0:
        return ()
    return (0.5 * (1.0 - root), 0.5 * (1.0 + root))


def _merge(xs: list[float], tol: float = MERGE_TOL) -> list[float]:
    out: list[float] = []
    for x in sorted(xs):
        if out and x - out[-1] <= tol:
            continue
        out.append(x)
    return out


def stationary_x(family: SymmetricFamily2) -> tuple[float, ...]:
    """x-coordinates of all roots of h on [0, 1], ascending."""
    m = family.order
    c = family.c
    us = [0.0]
    # c u^(m-2) = 1 has |u| = |c|^(-1/(m-2)) >= 1, so only |c| = 1 lands in [-1, 1]
    if abs(c) >= 1.0 - CASE_TOL:
        mag = min(abs(c) ** (-1.0 / (m - 2)), 1.0)
        if (m - 2) % 2 == 1:
            us.append(mag if c > 0 else -mag)
        elif c > 0:
            us.extend((-mag, mag))
    return tuple(_merge([0.5 * (1.0 + u) for u in us]))


def enumerate_stationary(family: SymmetricFamily2) -> tuple[SimplexPoint, ...]:
    points = []
    for x in stationary_x(family):
        p = simplex_point(family, (x, 1.0 - x))
        if p.residual > RESIDUAL_TOL:
            raise ArithmeticError(f"root x={x!r} of order {family.order} a={family.a!r} has residual {p.residual!r}")
        points.append(p)
    return tuple(points)


def case_label(family: SymmetricFamily2) -> str:
    m = family.order
    c = family.c
    if abs(c) <= CASE_TOL:
        return EQUAL_AB
    k = abs(c) * (m - 1)
    if abs(k - 1.0) <= CASE_TOL:
        sub = "eq1"
    elif k < 1.0:
        sub = "lt1"
    else:
        sub = "gt1"
    if c > 0:
        return f"AGreater_{sub}"
    if m % 2 == 0:
        return B_GREATER_EVEN
    return f"BGreater_{sub}"


def theorem_set(family: SymmetricFamily2) -> tuple[tuple[float, float], ...]:
    """The stationary set as the closed classification states it: (0,1) and (1/2,1/2) for a=1,
    (1/2,1/2) and (1,0) for a=0, the centre alone otherwise.
    """
    if family.a == 1.0:
        return ((0.0, 1.0), (0.5, 0.5))
    if family.a == 0.0:
        return ((0.5, 0.5), (1.0, 0.0))
    return ((0.5, 0.5),)


def _fmt(v: tuple[float, ...]) -> str:
    return "(" + ", ".join(f"{c:g}" for c in v) + ")"


def _contains(points: tuple[tuple[float, ...], ...], v: tuple[float, ...]) -> bool:
    return any(max(abs(p - q) for p, q in zip(point, v)) <= SET_TOL for point in points)


@dataclass(frozen=True)
class ClassificationReport:
    m: int
    a: float
    b: float
    c: float
    case_label: str
    critical_points: tuple[float, ...]
    stationary_set: tuple[SimplexPoint, ...]
    irreducible: bool
    reducibility_witness: tuple[int, ...] | None
    contraction_bound: float
    theorem_set: tuple[tuple[float, float], ...]
    stated_reducible: bool
    closed_form_offset: float
    discrepancy_flags: tuple[str, ...] = field(default_factory=tuple)
    notes: tuple[str, ...] = field(default_factory=tuple)

    @property
    def stationary_coords(self) -> tuple[tuple[float, ...], ...]:
        return tuple(p.coords for p in self.stationary_set)


def classify(family: SymmetricFamily2) -> ClassificationReport:
    stationary = enumerate_stationary(family)
    coords = tuple(p.coords for p in stationary)
    stated = theorem_set(family)
    witness = is_reducible(family)
    stated_reducible = family.a in (0.0, 1.0)

    flags: list[str] = []
    for v in coords:
        if not _contains(stated, v):
            flags.append(f"stationary vector {_fmt(v)} is missing from the stated set")
    for v in stated:
        if not _contains(coords, v):
            flags.append(f"stated vector {_fmt(v)} is not stationary")
    if stated_reducible and witness is None:
        flags.append(f"stated reducible, but no reducibility witness exists at order {family.order}")

    notes: list[str] = []
    offset = closed_form_offset(family)
    if offset != 0.0:
        notes.append(f"printed closed-form constant is off by {offset:+.17g}; g1(1/2) = 1/2 fixes it at 1/2")
    if witness is not None:
        notes.append(f"reducible with witness I = {{{', '.join(str(i) for i in witness)}}}")

    return ClassificationReport(
        m=family.order,
        a=family.a,
        b=family.b,
        c=family.c,
        case_label=case_label(family),
        critical_points=critical_points(family),
        stationary_set=stationary,
        irreducible=witness is None,
        reducibility_witness=witness,
        contraction_bound=family.contraction_bound,
        theorem_set=stated,
        stated_reducible=stated_reducible,
        closed_form_offset=offset,
        discrepancy_flags=tuple(flags),
        notes=tuple(notes),
    )
