"""Hensel lifting of non-singular zeros from F_p to Z/p^k."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .forms import Form, FormError, parse_terms
from .gf import build_field, is_prime, parse_header


class LiftError(ValueError):
    pass


@dataclass(frozen=True)
class IntegerForm:
    n: int
    d: int
    terms: tuple[tuple[tuple[int, ...], int], ...]

    @classmethod
    def from_dict(cls, n: int, d: int, coeffs: Mapping[tuple[int, ...], int]) -> "IntegerForm":
        terms = []
        for e, c in coeffs.items():
            e = tuple(int(x) for x in e)
            if len(e) != n or any(x < 0 for x in e):
                raise FormError(f"bad exponent tuple {e} for n={n}")
            if sum(e) != d:
                raise FormError(f"monomial {e} is not of degree {d}")
            if c:
                terms.append((e, int(c)))
        terms.sort(reverse=True)
        return cls(n, d, tuple(terms))

    def __call__(self, x: Sequence[int]) -> int:
        if len(x) != self.n:
            raise FormError(f"point of dimension {len(x)} for a form in {self.n} variables")
        total = 0
        for e, c in self.terms:
            t = c
            for xi, k in zip(x, e):
                if k:
                    t *= xi**k
            total += t
        return total

    def partial(self, j: int) -> "IntegerForm":
        """Derivative with respect to variable j (0-based)."""
        out: dict[tuple[int, ...], int] = {}
        for e, c in self.terms:
            if e[j]:
                e2 = e[:j] + (e[j] - 1,) + e[j + 1 :]
                out[e2] = out.get(e2, 0) + c * e[j]
        return IntegerForm.from_dict(self.n, self.d - 1, out)


@dataclass(frozen=True)
class LiftedPoint:
    p: int
    k: int
    coords: tuple[int, ...]
    coordinate: int = 0  # 0-based index of the coordinate that was moved
    # p-adic valuation of F(x) (capped at the working precision) after each step
    defects: tuple[int, ...] = field(default=())

    def __post_init__(self):
        mod = self.p**self.k
        if any(not 0 <= x < mod for x in self.coords):
            raise LiftError("coordinates must lie in [0, p^k)")
        if all(x % self.p == 0 for x in self.coords):
            raise LiftError("a lifted point must be nonzero mod p")


def valuation(n: int, p: int, cap: int) -> int:
    v = 0
    while v < cap and n % p == 0:
        n //= p
        v += 1
    return v


def reduce_mod_p(F: IntegerForm, p: int) -> Form:
    if not is_prime(p):
        raise LiftError(f"{p} is not prime")
    Fp = build_field(p)
    return Form.from_dict(Fp, F.n, F.d, {e: c % p for e, c in F.terms})


def hensel_lift(F: IntegerForm, p: int, x0: Sequence[int], k: int) -> LiftedPoint:
    """Lift a non-singular zero ``x0`` of F mod p to a zero mod p^k.

    Newton's method runs on the single coordinate j with the smallest index
    whose partial derivative is a unit at x0; the precision doubles each step.
    """
    if not is_prime(p):
        raise LiftError(f"{p} is not prime")
    if k < 1:
        raise LiftError("target precision must be at least 1")
    if len(x0) != F.n:
        raise LiftError(f"point of dimension {len(x0)} for a form in {F.n} variables")
    x = [int(v) % p for v in x0]
    if F(x) % p:
        raise LiftError(f"{tuple(x)} is not a zero mod {p}")
    partials = [F.partial(j) for j in range(F.n)]
    units = [j for j in range(F.n) if partials[j](x) % p]
    if not units:
        raise LiftError(f"{tuple(x)} is a singular zero mod {p}")
    j = units[0]
    dj = partials[j]
    defects = []
    prec = 1
    while prec < k:
        prec = min(2 * prec, k)
        mod = p**prec
        fx = F(x)
        x[j] = (x[j] - fx * pow(dj(x), -1, mod)) % mod
        v = valuation(F(x), p, prec)
        if v < prec:
            raise LiftError(f"Newton step failed: p^{prec} does not divide F(x)")
        defects.append(v)
    mod = p**k
    coords = tuple(v % mod for v in x)
    if F(coords) % mod:
        raise LiftError("final point is not a zero mod p^k")
    return LiftedPoint(p, k, coords, j, tuple(defects))


def format_integer_form(F: IntegerForm) -> str:
    lines = [f"n={F.n} d={F.d}"]
    for e, c in F.terms:
        lines.append(" ".join(str(x) for x in e) + f" : {c}")
    return "\n".join(lines) + "\n"


def parse_integer_form(text: str) -> IntegerForm:
    """Form file whose coefficients are arbitrary integers. Field keys in the
    header, if any, are ignored."""
    lines = text.splitlines()
    if not lines:
        raise FormError("empty form file")
    h = parse_header(lines[0])
    try:
        n, d = int(h["n"]), int(h["d"])
    except KeyError as exc:
        raise FormError("form header needs n= and d=") from exc
    return IntegerForm.from_dict(n, d, parse_terms(lines[1:], n, d))
