"""Homogeneous polynomials over a finite field.

A :class:`Form` stores its nonzero coefficients keyed by exponent tuples.
Zero sets are enumerated over normalised projective representatives (first
nonzero coordinate equal to 1).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from .gf import FieldSpec, field_from_header, parse_header

MAX_VARIABLES = 6

Exponent = tuple[int, ...]
Point = tuple[int, ...]


class FormError(ValueError):
    pass


@dataclass(frozen=True)
class Form:
    field: FieldSpec
    n: int
    d: int
    terms: tuple[tuple[Exponent, int], ...]

    @classmethod
    def from_dict(cls, F: FieldSpec, n: int, d: int, coeffs: Mapping[Exponent, int]) -> "Form":
        if not 1 <= n <= MAX_VARIABLES:
            raise FormError(f"unsupported number of variables {n}")
        terms = []
        for e, c in coeffs.items():
            e = tuple(int(x) for x in e)
            if len(e) != n or any(x < 0 for x in e):
                raise FormError(f"bad exponent tuple {e} for n={n}")
            if sum(e) != d:
                raise FormError(f"monomial {e} is not of degree {d}")
            if not 0 <= c < F.q:
                raise FormError(f"coefficient {c} is not an element of {F}")
            if c:
                terms.append((e, int(c)))
        terms.sort(reverse=True)
        return cls(F, n, d, tuple(terms))

    @classmethod
    def zero(cls, F: FieldSpec, n: int, d: int) -> "Form":
        return cls(F, n, d, ())

    def as_dict(self) -> dict[Exponent, int]:
        return dict(self.terms)

    def coefficient(self, e: Exponent) -> int:
        return self.as_dict().get(tuple(e), 0)

    def is_zero(self) -> bool:
        return not self.terms

    def __call__(self, point: Sequence[int]) -> int:
        return evaluate(self, point)


def evaluate(f: Form, point: Sequence[int]) -> int:
    if len(point) != f.n:
        raise FormError(f"point of dimension {len(point)} for a form in {f.n} variables")
    F = f.field
    acc = 0
    for e, c in f.terms:
        term = c
        for x, k in zip(point, e):
            if k:
                term = F.mul(term, F.pow(x, k))
                if not term:
                    break
        acc = F.add(acc, term)
    return acc


def partial_derivative(f: Form, i: int) -> Form:
    """Formal derivative with respect to variable ``i`` (1-based)."""
    if not 1 <= i <= f.n:
        raise FormError(f"variable index {i} out of range 1..{f.n}")
    if f.d == 0:
        return Form.zero(f.field, f.n, 0)
    F = f.field
    out: dict[Exponent, int] = {}
    for e, c in f.terms:
        k = e[i - 1]
        scale = F.from_int(k)
        if scale == 0:
            continue
        e2 = e[: i - 1] + (k - 1,) + e[i:]
        out[e2] = F.mul(c, scale)
    return Form.from_dict(F, f.n, f.d - 1, out)


def gradient(f: Form) -> tuple[Form, ...]:
    return tuple(partial_derivative(f, i) for i in range(1, f.n + 1))


# -- projective points ---------------------------------------------------------


def normalize(point: Sequence[int], F: FieldSpec) -> Point:
    """Scale a nonzero vector so that its first nonzero coordinate is 1."""
    for x in point:
        if x:
            s = F.inv(x)
            return tuple(F.mul(s, y) for y in point)
    raise FormError("the zero vector is not a projective point")


def projective_points(n: int, F: FieldSpec) -> list[Point]:
    return list(_projective_points(n, F))


@lru_cache(maxsize=64)
def _projective_points(n: int, F: FieldSpec) -> tuple[Point, ...]:
    pts = []
    for lead in reversed(range(n)):
        for tail in itertools.product(range(F.q), repeat=n - lead - 1):
            pts.append((0,) * lead + (1,) + tail)
    return tuple(pts)


@lru_cache(maxsize=64)
def _point_array(n: int, F: FieldSpec) -> np.ndarray:
    arr = np.array(_projective_points(n, F), dtype=np.int64).reshape(-1, n)
    arr.setflags(write=False)
    return arr


def _power_table(F: FieldSpec, dmax: int) -> np.ndarray:
    tab = np.zeros((F.q, dmax + 1), dtype=np.int64)
    for x in range(F.q):
        for k in range(dmax + 1):
            tab[x, k] = F.pow(x, k)
    return tab


def evaluate_many(f: Form, points: np.ndarray) -> np.ndarray:
    """Vectorised evaluation at the rows of ``points``."""
    F = f.field
    t = F.tables
    add, mul = t.add, t.mul
    powt = _cached_powers(F, max(f.d, 1))
    acc = np.zeros(len(points), dtype=np.int64)
    for e, c in f.terms:
        term = np.full(len(points), c, dtype=np.int64)
        for j, k in enumerate(e):
            if k:
                term = mul[term, powt[points[:, j], k]]
        acc = add[acc, term]
    return acc


@lru_cache(maxsize=64)
def _cached_powers(F: FieldSpec, dmax: int) -> np.ndarray:
    return _power_table(F, dmax)


@dataclass(frozen=True)
class ZeroCensus:
    total: int
    singular: int
    nonsingular: int
    witnesses: tuple[Point, ...] | None = field(default=None)


def _zero_and_singular_masks(f: Form, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    zero = evaluate_many(f, pts) == 0
    singular = zero.copy()
    for g in gradient(f):
        if not singular.any():
            break
        idx = np.nonzero(singular)[0]
        vals = evaluate_many(g, pts[idx])
        singular[idx[vals != 0]] = False
    return zero, singular


def count_projective_zeros(f: Form, collect_witnesses: bool = False) -> ZeroCensus:
    pts = _point_array(f.n, f.field)
    zero, singular = _zero_and_singular_masks(f, pts)
    total = int(zero.sum())
    sing = int(singular.sum())
    witnesses = None
    if collect_witnesses:
        witnesses = tuple(tuple(int(x) for x in row) for row in pts[zero])
    return ZeroCensus(total, sing, total - sing, witnesses)


def is_zero(f: Form, point: Sequence[int]) -> bool:
    return evaluate(f, point) == 0


def is_nonsingular_zero(f: Form, point: Sequence[int]) -> bool:
    if len(point) != f.n:
        raise FormError(f"point of dimension {len(point)} for a form in {f.n} variables")
    if evaluate(f, point) != 0:
        return False
    # stop at the first nonvanishing partial
    return any(evaluate(partial_derivative(f, i), point) for i in range(1, f.n + 1))


def find_nonsingular_zero(f: Form) -> Point | None:
    """First non-singular zero in projective_points order, or None."""
    pts = _point_array(f.n, f.field)
    zero, singular = _zero_and_singular_masks(f, pts)
    hits = np.nonzero(zero & ~singular)[0]
    if len(hits) == 0:
        return None
    return tuple(int(x) for x in pts[hits[0]])


# -- substitution ---------------------------------------------------------------


def _poly_mul(F: FieldSpec, a: dict, b: dict) -> dict:
    out: dict = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            out[e] = F.add(out.get(e, 0), F.mul(ca, cb))
    return {e: c for e, c in out.items() if c}


def restrict(f: Form, basis: Sequence[Sequence[int]]) -> Form:
    """The form ``y -> f(sum_i y_i * basis[i])`` in ``len(basis)`` variables."""
    m = len(basis)
    if not 1 <= m <= f.n:
        raise FormError(f"need between 1 and {f.n} basis vectors")
    for b in basis:
        if len(b) != f.n:
            raise FormError(f"basis vector {tuple(b)} has wrong dimension")
    F = f.field
    unit = tuple(tuple(int(i == j) for j in range(m)) for i in range(m))
    # x_j as a linear form in y
    linear = []
    for j in range(f.n):
        linear.append({unit[i]: basis[i][j] for i in range(m) if basis[i][j]})
    power_cache: dict[tuple[int, int], dict] = {}

    def lin_pow(j: int, k: int) -> dict:
        key = (j, k)
        if key not in power_cache:
            if k == 0:
                power_cache[key] = {(0,) * m: 1}
            else:
                power_cache[key] = _poly_mul(F, lin_pow(j, k - 1), linear[j])
        return power_cache[key]

    out: dict[Exponent, int] = {}
    for e, c in f.terms:
        prod = {(0,) * m: c}
        for j, k in enumerate(e):
            if k:
                prod = _poly_mul(F, prod, lin_pow(j, k))
                if not prod:
                    break
        for ee, cc in prod.items():
            out[ee] = F.add(out.get(ee, 0), cc)
    return Form.from_dict(F, m, f.d, {e: c for e, c in out.items() if c})


def embed(f: Form, n: int) -> Form:
    """View f as a form in n >= f.n variables (extra variables unused)."""
    pad = (0,) * (n - f.n)
    return Form.from_dict(f.field, n, f.d, {e + pad: c for e, c in f.terms})


# -- predicates -------------------------------------------------------------------


@dataclass(frozen=True)
class Lemma5Verdict:
    passed: bool
    c12: int
    c21: int
    line_in_zero_set: bool


def lemma5_shape_check(f: Form, z1: Sequence[int], z2: Sequence[int]) -> Lemma5Verdict:
    """Check the binary restriction through two zeros of a form without
    non-singular zeros: it must be ``c12 x1^3 x2^2 + c21 x1^2 x2^3`` with
    ``c12 * c21 = 0``."""
    if f.d != 5:
        raise FormError("the line-restriction shape applies to quintic forms")
    for z in (z1, z2):
        if evaluate(f, z) != 0:
            raise FormError(f"{tuple(z)} is not a zero of the form")
    if normalize(z1, f.field) == normalize(z2, f.field):
        raise FormError("the two zeros must be distinct projective points")
    g = restrict(f, [z1, z2])
    coeffs = g.as_dict()
    c12 = coeffs.pop((3, 2), 0)
    c21 = coeffs.pop((2, 3), 0)
    ok = not coeffs and f.field.mul(c12, c21) == 0
    return Lemma5Verdict(ok, c12, c21, g.is_zero())


def chevalley_warning_bound(q: int, n: int, d: int) -> int:
    return (q ** (n - d) - 1) // (q - 1)


def chevalley_warning_check(f: Form) -> bool:
    if f.n <= f.d:
        raise FormError("the zero-count bound needs more variables than the degree")
    census = count_projective_zeros(f)
    return census.total >= chevalley_warning_bound(f.field.q, f.n, f.d)


# -- text format --------------------------------------------------------------------


def format_form(f: Form) -> str:
    lines = [f"{f.field.header()} n={f.n} d={f.d}"]
    for e, c in f.terms:
        lines.append(" ".join(str(x) for x in e) + f" : {c}")
    return "\n".join(lines) + "\n"


def parse_terms(lines: Iterable[str], n: int, d: int) -> dict[Exponent, int]:
    out: dict[Exponent, int] = {}
    for raw in lines:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        lhs, sep, rhs = line.partition(":")
        if not sep:
            raise FormError(f"malformed monomial line {raw!r}")
        e = tuple(int(x) for x in lhs.split())
        if len(e) != n:
            raise FormError(f"monomial {e} has {len(e)} exponents, expected {n}")
        if sum(e) != d:
            raise FormError(f"monomial {e} is not of degree {d}")
        if e in out:
            raise FormError(f"duplicate monomial {e}")
        out[e] = int(rhs)
    return out


def parse_form(text: str) -> Form:
    lines = text.splitlines()
    if not lines:
        raise FormError("empty form file")
    h = parse_header(lines[0])
    F = field_from_header(lines[0])
    n, d = int(h["n"]), int(h["d"])
    coeffs = parse_terms(lines[1:], n, d)
    return Form.from_dict(F, n, d, coeffs)
