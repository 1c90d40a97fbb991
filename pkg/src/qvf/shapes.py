"""Coefficient templates for the ternary and quaternary quintic families.

Every monomial in the families is of one of four kinds (indices 1-based):

* ``a(i,j)``   x_i^3 x_j^2
* ``b(i,j,k)`` x_i x_j x_k^3            (i < j)
* ``c(i,j,k)`` x_i x_j^2 x_k^2          (j < k)
* ``d(i,j,k,l)`` x_i x_j x_k x_l^2      (i < j < k)

For each unordered pair only one of ``a(i,j)``, ``a(j,i)`` may be nonzero; a
:class:`Tournament` records which. Slots are kept in canonical order: a-slots
by unordered pair then direction, followed by the b, c and d slots in
lexicographic index order.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np

from .forms import Form
from .gf import FieldSpec


class ShapeError(ValueError):
    pass


class TripleShape(str, Enum):
    TRANSITIVE = "transitive"
    CYCLIC = "cyclic"


# -- slots ----------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class Slot:
    kind: str
    index: tuple[int, ...]

    @property
    def name(self) -> str:
        return f"{self.kind}({','.join(map(str, self.index))})"

    def __str__(self) -> str:
        return self.name

    def exponent(self, m: int) -> tuple[int, ...]:
        e = [0] * m
        idx = [i - 1 for i in self.index]
        if self.kind == "a":
            e[idx[0]], e[idx[1]] = 3, 2
        elif self.kind == "b":
            e[idx[0]], e[idx[1]], e[idx[2]] = 1, 1, 3
        elif self.kind == "c":
            e[idx[0]], e[idx[1]], e[idx[2]] = 1, 2, 2
        elif self.kind == "d":
            e[idx[0]], e[idx[1]], e[idx[2]], e[idx[3]] = 1, 1, 1, 2
        else:  # pragma: no cover
            raise ShapeError(f"unknown slot kind {self.kind}")
        return tuple(e)

    @property
    def variables(self) -> frozenset[int]:
        return frozenset(self.index)

    def relabel(self, perm: Mapping[int, int]) -> "Slot":
        """Slot of the same monomial after renaming variable i to perm[i]."""
        idx = [perm[i] for i in self.index]
        if self.kind == "a":
            return Slot("a", tuple(idx))
        if self.kind == "b":
            return Slot("b", tuple(sorted(idx[:2])) + (idx[2],))
        if self.kind == "c":
            return Slot("c", (idx[0],) + tuple(sorted(idx[1:])))
        return Slot("d", tuple(sorted(idx[:3])) + (idx[3],))


_SLOT_RE = re.compile(r"([abcd])\(([\d,]+)\)")


def parse_slot(text: str) -> Slot:
    m = _SLOT_RE.fullmatch(text.strip())
    if not m:
        raise ShapeError(f"malformed slot name {text!r}")
    return Slot(m.group(1), tuple(int(x) for x in m.group(2).split(",")))


def _pair_key(s: Slot) -> tuple:
    return (tuple(sorted(s.index)), s.index)


def canonical_slots(m: int) -> list[Slot]:
    """All slots of the family in m variables (both a-directions included)."""
    v = range(1, m + 1)
    a = [Slot("a", (i, j)) for i in v for j in v if i != j]
    a.sort(key=_pair_key)
    b = [Slot("b", (i, j, k)) for i, j in itertools.combinations(v, 2) for k in v if k not in (i, j)]
    c = [Slot("c", (i, j, k)) for i in v for j, k in itertools.combinations(v, 2) if i not in (j, k)]
    d = [Slot("d", (i, j, k, l)) for i, j, k in itertools.combinations(v, 3) for l in v if l not in (i, j, k)]
    return a + sorted(b) + sorted(c) + sorted(d)


# -- tournaments ----------------------------------------------------------------------


@dataclass(frozen=True)
class Tournament:
    m: int
    arcs: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        pairs = {frozenset(a) for a in self.arcs}
        if len(pairs) != len(self.arcs) or len(pairs) != self.m * (self.m - 1) // 2:
            raise ShapeError("a tournament needs exactly one direction per pair")
        for i, j in self.arcs:
            if not (1 <= i <= self.m and 1 <= j <= self.m and i != j):
                raise ShapeError(f"bad arc {(i, j)}")

    @classmethod
    def from_arcs(cls, m: int, arcs: Iterable[tuple[int, int]]) -> "Tournament":
        return cls(m, frozenset(tuple(a) for a in arcs))

    def beats(self, i: int, j: int) -> bool:
        return (i, j) in self.arcs

    def out_degree(self, v: int, within: Iterable[int] | None = None) -> int:
        within = set(range(1, self.m + 1) if within is None else within)
        return sum(1 for (i, j) in self.arcs if i == v and j in within)

    def score_sequence(self) -> tuple[int, ...]:
        return tuple(sorted((self.out_degree(v) for v in range(1, self.m + 1)), reverse=True))

    def classify(self) -> str:
        if self.m == 3:
            return TripleShape.TRANSITIVE.value if self.score_sequence() == (2, 1, 0) else TripleShape.CYCLIC.value
        if self.m == 4:
            return _SCORE_TO_G[self.score_sequence()]
        raise ShapeError("only 3- and 4-vertex tournaments are classified")

    def restrict(self, triple: Sequence[int]) -> "Tournament":
        """Sub-tournament on ``triple``, relabelled 1..len(triple) in the given order."""
        pos = {v: i + 1 for i, v in enumerate(triple)}
        arcs = [(pos[i], pos[j]) for i, j in self.arcs if i in pos and j in pos]
        return Tournament.from_arcs(len(triple), arcs)


TRANSITIVE_ARCS = frozenset({(1, 2), (1, 3), (2, 3)})
CYCLIC_ARCS = frozenset({(1, 2), (2, 3), (3, 1)})

_H_ARCS = [(2, 3), (2, 4), (3, 4)]
G_ARCS = {
    1: [(1, 2), (1, 3), (1, 4)] + _H_ARCS,
    2: [(1, 2), (3, 1), (1, 4)] + _H_ARCS,
    3: [(1, 2), (1, 3), (4, 1)] + _H_ARCS,
    4: [(2, 1), (1, 3), (4, 1)] + _H_ARCS,
}
_SCORE_TO_G = {(3, 2, 1, 0): "g1", (2, 2, 2, 0): "g2", (2, 2, 1, 1): "g3", (3, 1, 1, 1): "g4"}


def triple_tournament(shape: TripleShape | str) -> Tournament:
    shape = TripleShape(shape)
    return Tournament(3, TRANSITIVE_ARCS if shape is TripleShape.TRANSITIVE else CYCLIC_ARCS)


def g_tournament(index: int) -> Tournament:
    if index not in G_ARCS:
        raise ShapeError(f"no quaternary shape g{index}")
    return Tournament.from_arcs(4, G_ARCS[index])


@dataclass(frozen=True)
class TripleClass:
    shape: TripleShape
    # relabel[c] = original vertex playing canonical variable c (c = 1, 2, 3)
    relabel: tuple[int, int, int]


def classify_triple(t: Tournament, triple: Sequence[int]) -> TripleClass:
    """Shape of the sub-tournament on ``triple`` and the vertex order that
    carries it onto the canonical transitive (1>2, 1>3, 2>3) or cyclic
    (1>2, 2>3, 3>1) pattern."""
    vs = sorted(triple)
    if len(set(vs)) != 3:
        raise ShapeError("need three distinct vertices")
    scores = {v: t.out_degree(v, vs) for v in vs}
    if sorted(scores.values()) == [0, 1, 2]:
        order = tuple(sorted(vs, key=lambda v: -scores[v]))
        return TripleClass(TripleShape.TRANSITIVE, order)
    first = vs[0]
    second = next(v for v in vs if t.beats(first, v))
    third = next(v for v in vs if v not in (first, second))
    return TripleClass(TripleShape.CYCLIC, (first, second, third))


# -- templates ---------------------------------------------------------------------------


class Status(str, Enum):
    PINNED = "pinned"
    FREE = "free"
    ZERO = "zero"


@dataclass(frozen=True)
class ShapeTemplate:
    """Per-slot status for a family of forms over a fixed field."""

    m: int
    shape: str  # t1 | t2 | g1..g4 | custom
    tournament: Tournament
    slots: tuple[Slot, ...]
    status: tuple[Status, ...]
    pins: tuple[int, ...]  # value for pinned slots, 0 otherwise

    def __post_init__(self) -> None:
        for s, st, v in zip(self.slots, self.status, self.pins):
            if s.kind == "a":
                if not self.tournament.beats(*s.index) and st is not Status.ZERO:
                    raise ShapeError(f"{s} is against the tournament direction")
                if st is Status.PINNED and v == 0:
                    raise ShapeError(f"pinned a-slot {s} must be nonzero")

    @property
    def active(self) -> list[tuple[Slot, Status, int]]:
        return [(s, st, v) for s, st, v in zip(self.slots, self.status, self.pins) if st is not Status.ZERO]

    @property
    def free_slots(self) -> list[Slot]:
        return [s for s, st in zip(self.slots, self.status) if st is Status.FREE]

    @property
    def pinned(self) -> dict[Slot, int]:
        return {s: v for s, st, v in zip(self.slots, self.status, self.pins) if st is Status.PINNED}

    def status_of(self, slot: Slot) -> Status:
        return self.status[self.slots.index(slot)]

    def domain(self, slot: Slot, F: FieldSpec) -> range:
        return range(1, F.q) if slot.kind == "a" else range(F.q)

    def size(self, F: FieldSpec) -> int:
        n = 1
        for s in self.free_slots:
            n *= len(self.domain(s, F))
        return n

    def descriptor(self) -> str:
        pins = ",".join(f"{s.name}:{v}" for s, v in self.pinned.items())
        free = ",".join(s.name for s in self.free_slots)
        return f"shape={self.shape} pins={pins} free={free}"

    def with_pins(self, pins: Mapping[Slot, int]) -> "ShapeTemplate":
        status = list(self.status)
        values = list(self.pins)
        for s, v in pins.items():
            i = self.slots.index(s)
            if status[i] is Status.ZERO:
                raise ShapeError(f"cannot pin {s}: it is fixed to zero")
            status[i], values[i] = Status.PINNED, v
        return ShapeTemplate(self.m, self.shape, self.tournament, self.slots, tuple(status), tuple(values))


def build_template(
    m: int,
    tournament: Tournament,
    shape: str,
    pins: Mapping[Slot, int] | None = None,
    zero: Iterable[Slot] = (),
) -> ShapeTemplate:
    pins = dict(pins or {})
    zero = set(zero)
    slots = tuple(canonical_slots(m))
    if m == 3:
        slots = tuple(s for s in slots if s.kind != "d")
    status, values = [], []
    for s in slots:
        if s.kind == "a" and not tournament.beats(*s.index):
            if s in pins:
                raise ShapeError(f"pin on anti-direction slot {s}")
            status.append(Status.ZERO)
            values.append(0)
        elif s in pins:
            status.append(Status.PINNED)
            values.append(int(pins.pop(s)))
        elif s in zero:
            status.append(Status.ZERO)
            values.append(0)
        else:
            status.append(Status.FREE)
            values.append(0)
    if pins:
        raise ShapeError(f"unknown slots {sorted(map(str, pins))}")
    return ShapeTemplate(m, shape, tournament, slots, tuple(status), tuple(values))


def ternary_template(
    shape: TripleShape | str,
    pins: Mapping[Slot, int] | None = None,
    F: FieldSpec | None = None,
) -> ShapeTemplate:
    shape = TripleShape(shape)
    pins = dict(pins or {})
    for s, v in pins.items():
        if s.kind != "a":
            raise ShapeError(f"ternary templates pin only a-slots, got {s}")
        if v == 0 or (F is not None and not 0 < v < F.q):
            raise ShapeError(f"pinned value for {s} must be a nonzero field element")
    name = "t1" if shape is TripleShape.TRANSITIVE else "t2"
    return build_template(3, triple_tournament(shape), name, pins)


def g_pins(index: int) -> dict[Slot, int]:
    first = Slot("a", (2, 1)) if index == 4 else Slot("a", (1, 2))
    return {first: 1, Slot("a", (2, 3)): 1, Slot("a", (3, 4)): 1}


def g_template(index: int, F: FieldSpec | None = None) -> ShapeTemplate:
    t = g_tournament(index)
    return build_template(4, t, f"g{index}", g_pins(index))


def parse_descriptor(text: str) -> ShapeTemplate:
    fields = dict(tok.partition("=")[::2] for tok in text.split())
    shape = fields.get("shape")
    if shape is None:
        raise ShapeError(f"malformed template descriptor {text!r}")
    pins = {}
    for tok in filter(None, _split_slots(fields.get("pins", ""))):
        name, _, val = tok.rpartition(":")
        pins[parse_slot(name)] = int(val)
    free = [parse_slot(tok) for tok in _split_slots(fields.get("free", "")) if tok]
    listed = list(pins) + free
    m = max((max(s.index) for s in listed), default=3)
    if shape in ("g1", "g2", "g3", "g4"):
        m = 4
    elif shape in ("t1", "t2"):
        m = 3
    arcs = {s.index for s in listed if s.kind == "a"}
    if shape == "t1":
        arcs = TRANSITIVE_ARCS
    elif shape == "t2":
        arcs = CYCLIC_ARCS
    elif shape.startswith("g"):
        arcs = set(G_ARCS[int(shape[1:])])
    tour = Tournament.from_arcs(m, arcs)
    keep = set(listed)
    zero = [s for s in canonical_slots(m) if s.kind != "a" and s not in keep]
    tmpl = build_template(m, tour, shape, pins, zero)
    if tmpl.descriptor() != " ".join(text.split()):
        raise ShapeError(f"descriptor does not round-trip: {text!r}")
    return tmpl


def _split_slots(text: str) -> list[str]:
    """Split on commas that are not inside parentheses."""
    out, depth, cur = [], 0, ""
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            out.append(cur)
            cur = ""
        else:
            cur += ch
    if cur:
        out.append(cur)
    return out


# -- instantiation -------------------------------------------------------------------------


def instantiate(template: ShapeTemplate, assignment: Sequence[int], F: FieldSpec) -> Form:
    free = template.free_slots
    if len(assignment) != len(free):
        raise ShapeError(f"expected {len(free)} values, got {len(assignment)}")
    coeffs = {}
    for s, v in template.pinned.items():
        coeffs[s.exponent(template.m)] = v
    for s, v in zip(free, assignment):
        if not 0 <= v < F.q:
            raise ShapeError(f"{v} is not an element of {F}")
        if s.kind == "a" and v == 0:
            raise ShapeError(f"a-slot {s} must be nonzero")
        coeffs[s.exponent(template.m)] = v
    return Form.from_dict(F, template.m, 5, coeffs)


def slot_values(template: ShapeTemplate, form: Form) -> dict[Slot, int]:
    """Read back the coefficient of every active slot of ``form``."""
    coeffs = form.as_dict()
    return {s: coeffs.get(s.exponent(template.m), 0) for s, _, _ in template.active}


def iter_assignments(template: ShapeTemplate, F: FieldSpec):
    return itertools.product(*(template.domain(s, F) for s in template.free_slots))


# -- scaling ---------------------------------------------------------------------------------


def apply_scaling(f: Form, c: int, lambdas: Sequence[int]) -> Form:
    """The form ``x -> c * f(lambda_1 x_1, ..., lambda_n x_n)``."""
    F = f.field
    if len(lambdas) != f.n:
        raise ShapeError("need one scalar per variable")
    if c == 0 or any(x == 0 for x in lambdas):
        raise ShapeError("scaling factors must be nonzero")
    out = {}
    for e, coef in f.terms:
        v = F.mul(coef, c)
        for lam, k in zip(lambdas, e):
            v = F.mul(v, F.pow(lam, k))
        out[e] = v
    return Form.from_dict(F, f.n, f.d, out)


def slot_weights(slots: Sequence[Slot], m: int) -> np.ndarray:
    """Exponent of (c, lambda_1..lambda_m) in each slot's scaling factor."""
    return np.array([(1,) + s.exponent(m) for s in slots], dtype=np.int64)


@dataclass(frozen=True)
class OrbitPartition:
    """Orbits of nonzero coefficient tuples under diagonal rescaling.

    ``representatives`` holds the lexicographically smallest tuple of each
    orbit, ascending. ``to_rep[t]`` is ``(rep, g)`` with g = (c, lambda_1..m)
    a group element mapping t to rep.
    """

    representatives: tuple[tuple[int, ...], ...]
    to_rep: dict[tuple[int, ...], tuple[tuple[int, ...], tuple[int, ...]]]

    def __len__(self) -> int:
        return len(self.representatives)


def group_elements(F: FieldSpec, m: int) -> np.ndarray:
    """All (c, lambda_1..lambda_m) as discrete-log exponent rows."""
    n = F.q - 1
    grids = np.meshgrid(*([np.arange(n)] * (m + 1)), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)


def scaling_orbits(F: FieldSpec, slots: Sequence[Slot], m: int) -> OrbitPartition:
    """Brute-force orbit partition of (F^x)^len(slots) under the scaling group."""
    n = F.q - 1
    W = slot_weights(slots, m)
    r = len(slots)
    exp = np.array(F.exp_table, dtype=np.int64)
    log = F.log_table
    G = group_elements(F, m)
    images = (G @ W.T) % n  # exponent shift of each slot under each element
    # the orbit of exponent vector e is e + image subgroup
    codes = images @ (n ** np.arange(r)[::-1])
    uniq, first = np.unique(codes, return_index=True)
    H = images[first]  # subgroup elements
    Hg = G[first]  # one preimage for each
    to_rep: dict = {}
    reps = []
    for t in itertools.product(range(1, F.q), repeat=r):
        if t in to_rep:
            continue
        e = np.array([log[x] for x in t], dtype=np.int64)
        orbit_exps = (e[None, :] + H) % n
        orbit = exp[orbit_exps]
        # lexicographically smallest tuple in field encoding
        order = np.lexsort(orbit.T[::-1])
        rep = tuple(int(x) for x in orbit[order[0]])
        reps.append(rep)
        # element k maps t to orbit[k]; compose with inverse of rep's element
        k0 = order[0]
        for k in range(len(orbit)):
            u = tuple(int(x) for x in orbit[k])
            # u -> t is -Hg[k], t -> rep is Hg[k0]
            g = tuple(int(x) for x in (Hg[k0] - Hg[k]) % n)
            to_rep[u] = (rep, tuple(int(F.exp_table[x]) for x in g))
    reps.sort()
    return OrbitPartition(tuple(reps), to_rep)


def scale_tuple(F: FieldSpec, values: Sequence[int], slots: Sequence[Slot], m: int, g: Sequence[int]) -> tuple[int, ...]:
    """Apply group element g = (c, lambdas) (field values) to slot coefficients."""
    out = []
    c, lams = g[0], g[1:]
    for v, s in zip(values, slots):
        w = F.mul(v, c)
        for lam, k in zip(lams, s.exponent(m)):
            w = F.mul(w, F.pow(lam, k))
        out.append(w)
    return tuple(out)
