"""Finite fields GF(p^k) backed by exp/log tables.

Elements are plain ints in ``[0, q)``: the base-p digits of an element are the
coefficients of its polynomial representative, lowest degree first. For k = 1
this is the usual residue mod p.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

DEFAULT_MAX_ORDER = 4096


class FieldError(ValueError):
    """Raised for invalid field parameters."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    i = 3
    while i * i <= n:
        if n % i == 0:
            return False
        i += 2
    return True


def prime_power(q: int) -> tuple[int, int]:
    """Split ``q = p**k``; raise FieldError if q is not a prime power."""
    if q < 2:
        raise FieldError(f"{q} is not a prime power")
    for p in range(2, q + 1):
        if q % p == 0:
            k = 0
            r = q
            while r % p == 0:
                r //= p
                k += 1
            if r != 1 or not is_prime(p):
                raise FieldError(f"{q} is not a prime power")
            return p, k
    raise FieldError(f"{q} is not a prime power")  # pragma: no cover


# -- polynomials over F_p as coefficient tuples, low degree first -------------


def _trim(c: list[int]) -> list[int]:
    while c and c[-1] == 0:
        c.pop()
    return c


def _poly_mod(a: list[int], m: tuple[int, ...], p: int) -> list[int]:
    a = _trim(list(a))
    dm = len(m) - 1
    inv_lead = pow(m[-1], p - 2, p)
    while len(a) - 1 >= dm:
        factor = a[-1] * inv_lead % p
        shift = len(a) - 1 - dm
        for i, mi in enumerate(m):
            a[shift + i] = (a[shift + i] - factor * mi) % p
        _trim(a)
    return a


def _poly_mulmod(a: list[int], b: list[int], m: tuple[int, ...], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return _poly_mod(out, m, p)


def _digits(e: int, p: int, k: int) -> list[int]:
    out = []
    for _ in range(k):
        out.append(e % p)
        e //= p
    return out


def _encode(c: list[int], p: int) -> int:
    e = 0
    for d in reversed(c):
        e = e * p + d
    return e


def is_irreducible(modulus: tuple[int, ...], p: int) -> bool:
    """Trial division by every monic polynomial of degree 1..deg/2."""
    k = len(modulus) - 1
    if k < 1:
        return False
    if k == 1:
        return True
    for deg in range(1, k // 2 + 1):
        for low in itertools.product(range(p), repeat=deg):
            divisor = tuple(low) + (1,)
            if not _poly_mod(list(modulus), divisor, p):
                return False
    return True


def smallest_irreducible(p: int, k: int) -> tuple[int, ...]:
    """Lexicographically smallest monic irreducible of degree k (low degree first)."""
    if k == 1:
        return (0, 1)
    for low in itertools.product(range(p), repeat=k):
        cand = tuple(low) + (1,)
        if is_irreducible(cand, p):
            return cand
    raise FieldError(f"no irreducible polynomial of degree {k} over F_{p}")  # pragma: no cover


def irreducible_polynomials(p: int, k: int) -> list[tuple[int, ...]]:
    """All monic irreducible polynomials of degree k, in lexicographic order."""
    if k == 1:
        return [(a, 1) for a in range(p)]
    return [
        tuple(low) + (1,)
        for low in itertools.product(range(p), repeat=k)
        if is_irreducible(tuple(low) + (1,), p)
    ]


@dataclass(frozen=True)
class FieldSpec:
    p: int
    k: int
    modulus: tuple[int, ...]
    generator: int
    exp_table: tuple[int, ...] = field(repr=False, compare=False)
    log_table: tuple[int, ...] = field(repr=False, compare=False)

    @property
    def q(self) -> int:
        return self.p**self.k

    def header(self) -> str:
        mod = ",".join(str(c) for c in self.modulus)
        return f"q={self.q} p={self.p} k={self.k} modulus={mod}"

    def __str__(self) -> str:
        return f"GF({self.q})"

    # -- arithmetic ---------------------------------------------------------

    def add(self, a: int, b: int) -> int:
        if self.k == 1:
            return (a + b) % self.p
        if self.p == 2:
            return a ^ b
        return int(self.tables.add[a, b])

    def neg(self, a: int) -> int:
        if self.k == 1:
            return (-a) % self.p
        if self.p == 2:
            return a
        return int(self.tables.neg[a])

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self.exp_table[(self.log_table[a] + self.log_table[b]) % (self.q - 1)]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError(f"inverse of 0 in {self}")
        return self.exp_table[(self.q - 1 - self.log_table[a]) % (self.q - 1)]

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, n: int) -> int:
        if n < 0:
            raise ValueError("negative exponent")
        if n == 0:
            return 1
        if a == 0:
            return 0
        return self.exp_table[self.log_table[a] * n % (self.q - 1)]

    def from_int(self, n: int) -> int:
        """Image of the integer n in the prime subfield."""
        return n % self.p

    def elements(self) -> range:
        return range(self.q)

    def nonzero_elements(self) -> range:
        return range(1, self.q)

    @cached_property
    def tables(self) -> "FieldTables":
        return FieldTables.build(self)


@dataclass(frozen=True)
class FieldTables:
    """Dense numpy lookup tables used by vectorised and compiled code paths."""

    add: np.ndarray
    mul: np.ndarray
    neg: np.ndarray
    inv: np.ndarray  # inv[0] = 0 as a placeholder

    @classmethod
    def build(cls, F: FieldSpec) -> "FieldTables":
        q, p, k = F.q, F.p, F.k
        digits = np.array([_digits(e, p, k) for e in range(q)], dtype=np.int64).reshape(q, k)
        weights = p ** np.arange(k, dtype=np.int64)
        add = ((digits[:, None, :] + digits[None, :, :]) % p) @ weights
        neg = ((-digits) % p) @ weights
        exp = np.array(F.exp_table, dtype=np.int64)
        log = np.array(F.log_table, dtype=np.int64)
        mul = np.zeros((q, q), dtype=np.int64)
        mul[1:, 1:] = exp[(log[1:, None] + log[None, 1:]) % (q - 1)]
        inv = np.zeros(q, dtype=np.int64)
        inv[1:] = exp[(q - 1 - log[1:]) % (q - 1)]
        dt = np.int16 if q <= 2**15 else np.int32
        arrays = [a.astype(dt) for a in (add, mul, neg, inv)]
        for a in arrays:
            a.setflags(write=False)
        return cls(*arrays)


def build_field(
    p: int,
    k: int = 1,
    modulus: tuple[int, ...] | None = None,
    max_order: int = DEFAULT_MAX_ORDER,
) -> FieldSpec:
    if not is_prime(p):
        raise FieldError(f"characteristic {p} is not prime")
    if k < 1:
        raise FieldError("extension degree must be >= 1")
    q = p**k
    if q > max_order:
        raise FieldError(f"field order {q} exceeds bound {max_order}")
    if modulus is None:
        modulus = smallest_irreducible(p, k)
    else:
        modulus = tuple(int(c) % p for c in modulus)
        if len(modulus) != k + 1 or modulus[-1] != 1:
            raise FieldError(f"modulus {modulus} is not monic of degree {k}")
        if not is_irreducible(modulus, p):
            raise FieldError(f"modulus {modulus} is reducible over F_{p}")

    if k == 1:

        def mulenc(a: int, b: int) -> int:
            return a * b % p

    else:

        def mulenc(a: int, b: int) -> int:
            prod = _poly_mulmod(_trim(_digits(a, p, k)), _trim(_digits(b, p, k)), modulus, p)
            return _encode(prod, p)

    generator = exp = None
    for g in range(1, q):
        powers = [1]
        x = g
        while x != 1:
            powers.append(x)
            x = mulenc(x, g)
        if len(powers) == q - 1:
            generator, exp = g, powers
            break
    if generator is None:  # pragma: no cover - a finite field always has one
        raise FieldError("no primitive element found")
    log = [-1] * q
    for i, e in enumerate(exp):
        log[e] = i
    return FieldSpec(p, k, tuple(modulus), generator, tuple(exp), tuple(log))


def field_of_order(q: int, modulus: tuple[int, ...] | None = None, max_order: int = DEFAULT_MAX_ORDER) -> FieldSpec:
    p, k = prime_power(q)
    return build_field(p, k, modulus, max_order)


def parse_header(text: str) -> dict[str, str]:
    """Parse ``key=value`` tokens of a header line."""
    out = {}
    for tok in text.split():
        if "=" in tok:
            key, _, val = tok.partition("=")
            out[key] = val
    return out


def field_from_header(line: str) -> FieldSpec:
    h = parse_header(line)
    try:
        p, k = int(h["p"]), int(h["k"])
        modulus = tuple(int(c) for c in h["modulus"].split(","))
    except KeyError as exc:
        raise FieldError(f"incomplete field header: {line!r}") from exc
    F = build_field(p, k, modulus if k > 1 else None)
    if "q" in h and int(h["q"]) != F.q:
        raise FieldError(f"inconsistent field header: {line!r}")
    return F


def elements(F: FieldSpec) -> range:
    return F.elements()


def nonzero_elements(F: FieldSpec) -> range:
    return F.nonzero_elements()


def check_axioms(F: FieldSpec) -> dict[str, tuple[int, int]]:
    """Exhaustive field-law check: law -> (cases checked, violations).

    The multiplication table is compared against schoolbook polynomial
    multiplication modulo the defining polynomial, so the log tables are not
    trusted on their own.
    """
    t = F.tables
    add, mul, neg, inv = (a.astype(np.int64) for a in (t.add, t.mul, t.neg, t.inv))
    q, p, k = F.q, F.p, F.k
    e = np.arange(q)
    out: dict[str, tuple[int, int]] = {}

    def law(name: str, ok: np.ndarray) -> None:
        out[name] = (int(ok.size), int(ok.size - np.count_nonzero(ok)))

    a, b, c = e[:, None, None], e[None, :, None], e[None, None, :]
    law("add associative", add[add[a, b], c] == add[a, add[b, c]])
    law("mul associative", mul[mul[a, b], c] == mul[a, mul[b, c]])
    law("distributive", mul[a, add[b, c]] == add[mul[a, b], mul[a, c]])
    law("add commutative", add == add.T)
    law("mul commutative", mul == mul.T)
    law("additive identity", add[0] == e)
    law("multiplicative identity", mul[1] == e)
    law("additive inverse", add[e, neg] == 0)
    law("multiplicative inverse", mul[e[1:], inv[1:]] == 1)
    frob = np.array([F.pow(x, q) for x in range(q)])
    law("frobenius a^q = a", frob == e)
    direct = np.array(
        [[_encode(_poly_mulmod(_trim(_digits(x, p, k)), _trim(_digits(y, p, k)), F.modulus, p), p) for y in range(q)] for x in range(q)]
    )
    law("mul matches polynomial product", direct == mul)
    return out
