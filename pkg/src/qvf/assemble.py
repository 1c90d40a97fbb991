"""Quaternary stage: glue ternary survivors into quaternary candidates.

For a quaternary shape every monomial except the four ``d`` monomials
``x1 x2 x3 x4 x_l`` involves at most three variables, so it belongs to the
restriction onto some coordinate triple. A quaternary form without a
non-singular zero restricts to a ternary survivor on each of the four
triples. Candidates are the quadruples of survivor rows that agree on the
a-coefficient of each pair shared by two triples (the only monomials in two
variables); each candidate is then completed by all q^4 choices of the
d-coefficients.
"""

from __future__ import annotations

import hashlib
import itertools
import logging
import time
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from . import kernel
from .claims import quaternary_expectation
from .forms import Form, ZeroCensus, format_form
from .gf import FieldSpec
from .report import VerificationReport
from .search import (
    SearchError,
    SurvivorDB,
    _layout,
    enumerate_survivors,
    expand_orbit_survivors,
    lemma8_templates,
    run_template,
)
from .shapes import (
    ShapeTemplate,
    Slot,
    TripleClass,
    TripleShape,
    classify_triple,
    g_pins,
    g_template,
    g_tournament,
    instantiate,
    ternary_template,
)

log = logging.getLogger(__name__)

TRIPLES = ((1, 2, 3), (1, 2, 4), (1, 3, 4), (2, 3, 4))


@dataclass
class TripleArray:
    triple: tuple[int, int, int]
    cls: TripleClass
    template: ShapeTemplate  # canonical labelling
    db: SurvivorDB
    slots: list[Slot]  # g-level slots of the rows, canonical order of the template's active slots
    rows: np.ndarray  # coefficient rows over ``slots``

    @property
    def pair_slots(self) -> dict[frozenset[int], Slot]:
        return {frozenset(s.index): s for s in self.slots if s.kind == "a"}

    def __len__(self) -> int:
        return len(self.rows)

    def row_form(self, r: int, F: FieldSpec) -> Form:
        """Row r as a form in the triple's own variables (in triple order)."""
        pos = {v: i + 1 for i, v in enumerate(self.triple)}
        coeffs = {}
        for s, v in zip(self.slots, self.rows[r]):
            if v:
                coeffs[s.relabel(pos).exponent(3)] = int(v)
        return Form.from_dict(F, 3, 5, coeffs)


def triple_template(g_index: int, triple: Sequence[int]) -> tuple[TripleClass, ShapeTemplate]:
    """Ternary template induced on ``triple`` by the pinned g-shape."""
    cls = classify_triple(g_tournament(g_index), triple)
    to_canon = {v: c + 1 for c, v in enumerate(cls.relabel)}
    pins = {}
    for s, v in g_pins(g_index).items():
        if set(s.index) <= set(triple):
            pins[s.relabel(to_canon)] = v
    return cls, ternary_template(cls.shape, pins)


def _array_from_db(triple, cls: TripleClass, db: SurvivorDB) -> TripleArray:
    from_canon = {c + 1: v for c, v in enumerate(cls.relabel)}
    active = [s for s, _, _ in db.template.active]
    slots = [s.relabel(from_canon) for s in active]
    from .search import coefficient_rows

    rows = coefficient_rows(db.field, db.template, [r.assignment for r in db.records])
    return TripleArray(tuple(triple), cls, db.template, db, slots, rows)


def lemma8_databases(F: FieldSpec, shards: int = 1, checkpoint=None, jobs: int = 1) -> dict[str, SurvivorDB]:
    return {t.shape: run_template(F, t, "orbit", shards, checkpoint, jobs) for t in lemma8_templates()}


def build_arrays(
    F: FieldSpec,
    g_index: int,
    orbit_dbs: dict[str, SurvivorDB] | None = None,
    method: str = "expand",
    cache: dict | None = None,
) -> list[TripleArray]:
    """The four survivor arrays of a g-shape, ordered as TRIPLES."""
    if method == "expand" and orbit_dbs is None:
        orbit_dbs = lemma8_databases(F)
    cache = {} if cache is None else cache
    arrays = []
    for triple in TRIPLES:
        cls, tmpl = triple_template(g_index, triple)
        key = (F.header(), tmpl.descriptor(), method)
        if key not in cache:
            if method == "expand":
                src = orbit_dbs["t1" if cls.shape is TripleShape.TRANSITIVE else "t2"]
                if not src.complete:
                    raise SearchError("underlying survivor database is incomplete")
                cache[key] = expand_orbit_survivors(src, tmpl)
            elif method == "direct":
                cache[key] = enumerate_survivors(F, tmpl)
            else:
                raise SearchError(f"unknown array method {method!r}")
        arrays.append(_array_from_db(triple, cls, cache[key]))
    return arrays


@dataclass(frozen=True)
class AssembledCandidate:
    rows: tuple[int, int, int, int]
    coeffs: dict[Slot, int]


def join_candidates(arrays: Sequence[TripleArray]) -> Iterator[AssembledCandidate]:
    """Quadruples of rows agreeing on every shared pair coefficient, in
    lexicographic order of row indices."""
    if any(len(a) == 0 for a in arrays):
        return
    # pairs shared with earlier arrays, and hash indices keyed on them
    shared: list[list[frozenset[int]]] = []
    indices: list[dict[tuple, list[int]]] = []
    for k, arr in enumerate(arrays):
        earlier = set().union(*(arrays[j].pair_slots.keys() for j in range(k))) if k else set()
        pairs = sorted((p for p in arr.pair_slots if p in earlier), key=sorted)
        shared.append(pairs)
        cols = [arr.slots.index(arr.pair_slots[p]) for p in pairs]
        idx: dict[tuple, list[int]] = {}
        for r, row in enumerate(arr.rows):
            idx.setdefault(tuple(int(row[c]) for c in cols), []).append(r)
        indices.append(idx)

    def rec(k: int, chosen: list[int], known: dict[frozenset[int], int]):
        if k == len(arrays):
            coeffs: dict[Slot, int] = {}
            for arr, r in zip(arrays, chosen):
                for s, v in zip(arr.slots, arr.rows[r]):
                    coeffs[s] = int(v)
            yield AssembledCandidate(tuple(chosen), coeffs)
            return
        arr = arrays[k]
        key = tuple(known[p] for p in shared[k])
        for r in indices[k].get(key, ()):
            new = dict(known)
            for p, s in arr.pair_slots.items():
                new[p] = int(arr.rows[r][arr.slots.index(s)])
            yield from rec(k + 1, chosen + [r], new)

    yield from rec(0, [], {})


def candidate_template(g_index: int, cand: AssembledCandidate) -> ShapeTemplate:
    """The g-template with all a, b, c slots pinned to the candidate's values."""
    base = g_template(g_index)
    pins = {s: v for s, v in cand.coeffs.items() if s.kind != "a" or s not in base.pinned}
    zero = [s for s, v in pins.items() if v == 0]
    from .shapes import build_template

    pins = {s: v for s, v in pins.items() if v != 0}
    pins.update(base.pinned)
    return build_template(4, base.tournament, f"g{g_index}", pins, zero)


class DSweep:
    """Search all q^4 d-completions of candidates of one g-shape."""

    def __init__(self, F: FieldSpec, g_index: int):
        self.F = F
        self.g_index = g_index
        self.template = g_template(g_index)
        self.active = [s for s, _, _ in self.template.active]
        self.layout = _layout(F, 4, tuple(self.active))
        self.col = {s: i for i, s in enumerate(self.active)}
        t = F.tables
        self.add, self.mul = t.add.astype(np.int64), t.mul.astype(np.int64)
        d_slots = [s for s in self.active if s.kind == "d"]
        self.d_slots = d_slots
        lay = self.layout
        loop_cols = [self.col[s] for s in d_slots[:-1]]
        res_col = self.col[d_slots[-1]]
        self.Mloop = np.ascontiguousarray(lay.M[:, loop_cols])
        self.Dloop = np.ascontiguousarray(lay.D[:, loop_cols, :])
        self.dom = np.tile(np.arange(F.q, dtype=np.int64), (len(loop_cols), 1))
        self.domsize = np.full(len(loop_cols), F.q, dtype=np.int64)
        self.Mres = np.ascontiguousarray(lay.M[:, res_col])
        self.neg_inv = np.array([F.neg(F.inv(int(x))) if x else 0 for x in self.Mres], dtype=np.int64)
        self.Dres = np.ascontiguousarray(lay.D[:, res_col, :])
        self.res_allowed = np.ones(F.q, dtype=np.bool_)

    def coefficient_vector(self, coeffs: dict[Slot, int], d_values: Sequence[int] = (0, 0, 0, 0)) -> np.ndarray:
        vec = np.zeros(len(self.active), dtype=np.int64)
        for s, v in coeffs.items():
            if s in self.col:
                vec[self.col[s]] = v
            elif v:
                raise SearchError(f"candidate uses slot {s} outside the g-template")
        for s, v in zip(self.d_slots, d_values):
            vec[self.col[s]] = v
        return vec

    def survivors(self, cand: AssembledCandidate) -> list[tuple[int, int, int, int]]:
        """Reference sweep; tuples are in slot order."""
        base = self.coefficient_vector(cand.coeffs)
        bval, bgrad = kernel.accumulate(base, self.layout.M, self.layout.D, self.add, self.mul)
        rows = kernel.scan_unit(
            bval, bgrad, self.Mloop, self.Dloop, self.dom, self.domsize,
            self.Mres, self.neg_inv, self.Dres, self.res_allowed, self.add, self.mul,
        )
        return [tuple(int(x) for x in r) for r in rows]

    def form(self, cand: AssembledCandidate, d_values: Sequence[int]) -> Form:
        """``d_values`` are given in slot order, see :meth:`d_by_variable`."""
        vec = self.coefficient_vector(cand.coeffs, d_values)
        return Form.from_dict(self.F, 4, 5, {s.exponent(4): int(v) for s, v in zip(self.active, vec) if v})

    def d_by_variable(self) -> list[Slot]:
        """d-slots ordered by their squared variable x1 .. x4."""
        return sorted(self.d_slots, key=lambda s: s.index[3])


def audit_counterexample(F: FieldSpec, f: Form) -> tuple[ZeroCensus, bool]:
    """Census over every affine point of F^n, written independently of the
    projective enumeration. Returns (census, True iff no non-singular zero)."""
    grads = []
    for i in range(f.n):
        terms = []
        for e, c in f.terms:
            k = e[i]
            if k % F.p:
                terms.append((e[:i] + (k - 1,) + e[i + 1 :], F.mul(c, k % F.p)))
        grads.append(terms)

    def ev(terms, x):
        acc = 0
        for e, c in terms:
            t = c
            for xi, k in zip(x, e):
                for _ in range(k):
                    t = F.mul(t, xi)
            acc = F.add(acc, t)
        return acc

    zeros = sing = 0
    for x in itertools.product(range(F.q), repeat=f.n):
        if not any(x):
            continue
        if ev(f.terms, x):
            continue
        zeros += 1
        if all(ev(g, x) == 0 for g in grads):
            sing += 1
    # each projective point has q - 1 affine representatives
    total, singular = zeros // (F.q - 1), sing // (F.q - 1)
    census = ZeroCensus(total, singular, total - singular)
    return census, census.nonsingular == 0


class JoinEngine:
    """Compiled join plus d-sweep over the four arrays of one g-shape.

    Per row the engine precomputes, at every point with all coordinates
    nonzero, the part of ``tau = -C / (x1 x2 x3 x4)`` and of the singular
    d4-value contributed by the row's slots, where ``C`` is the candidate
    without its d-terms. Each a-slot shared by two arrays is charged to the
    first one only.
    """

    def __init__(self, F: FieldSpec, g_index: int, arrays: Sequence[TripleArray]):
        if len(arrays) != 4:
            raise SearchError("a quaternary join needs four arrays")
        self.F = F
        self.g_index = g_index
        self.arrays = list(arrays)
        self.sweep = sweep = DSweep(F, g_index)
        q = F.q
        t = F.tables
        add, mul, neg = t.add.astype(np.int64), t.mul.astype(np.int64), t.neg.astype(np.int64)
        inv = t.inv.astype(np.int64)
        self.add, self.mul, self.neg = add, mul, neg
        lay = sweep.layout
        pts = lay.points
        interior = np.all(pts != 0, axis=1)
        Pi = int(interior.sum())
        if not interior[:Pi].all():
            raise SearchError("layout must list interior points first")
        ipts = pts[:Pi]
        prod = np.ones(Pi, dtype=np.int64)
        for j in range(4):
            prod = mul[prod, ipts[:, j]]
        inv_p = inv[prod]
        inv_x4 = inv[ipts[:, 3]]

        owned_by: dict[Slot, int] = {}
        for k, arr in enumerate(self.arrays):
            for s in arr.slots:
                owned_by.setdefault(s, k)
        missing = {s for s in sweep.active if s.kind != "d"} - set(owned_by)
        extra = set(owned_by) - set(sweep.active)
        if missing or extra:
            raise SearchError(f"arrays do not tile the g-template (missing {missing}, extra {extra})")

        sizes = [len(a) for a in self.arrays]
        self.off = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
        width = max(len(a.slots) for a in self.arrays)
        rows_all = np.zeros((int(self.off[-1]), width), dtype=np.int64)
        colmap = np.full((4, width), -1, dtype=np.int64)
        T = np.zeros((int(self.off[-1]), Pi), dtype=np.int64)
        E = np.zeros_like(T)
        for k, arr in enumerate(self.arrays):
            lo, hi = self.off[k], self.off[k + 1]
            rows_all[lo:hi, : len(arr.slots)] = arr.rows
            C = np.zeros((hi - lo, Pi), dtype=np.int64)
            G4 = np.zeros_like(C)
            for j, s in enumerate(arr.slots):
                if owned_by[s] != k:
                    continue
                col = sweep.col[s]
                colmap[k, j] = col
                v = arr.rows[:, j][:, None]
                C = add[C, mul[v, lay.M[None, :Pi, col]]]
                G4 = add[G4, mul[v, lay.D[None, :Pi, col, 3]]]
            T[lo:hi] = mul[neg[C], inv_p[None, :]]
            E[lo:hi] = mul[add[mul[C, inv_x4[None, :]], neg[G4]], inv_p[None, :]]
        self.rows_all, self.colmap, self.T, self.E = rows_all, colmap, T, E

        # hash keys on shared pair coefficients
        keypart = np.zeros((int(self.off[-1]), 4), dtype=np.int64)
        n_codes = 1
        checks = []
        key_of: list[np.ndarray] = [np.zeros(sizes[0], dtype=np.int64)]
        for k in range(1, 4):
            arr = self.arrays[k]
            pairs = []
            for p in sorted(arr.pair_slots, key=sorted):
                for j in range(k):
                    if p in self.arrays[j].pair_slots:
                        pairs.append((p, j))
                        break
            own = np.zeros(sizes[k], dtype=np.int64)
            for i, (p, j) in enumerate(pairs):
                sk = arr.pair_slots[p]
                sj = self.arrays[j].pair_slots[p]
                if sk != sj:
                    raise SearchError(f"arrays disagree on the direction of pair {sorted(p)}")
                ck, cj = arr.slots.index(sk), self.arrays[j].slots.index(sj)
                keypart[self.off[j] : self.off[j + 1], k] += self.arrays[j].rows[:, cj] * q**i
                own += arr.rows[:, ck] * q**i
                checks.append((k, ck, j, cj))
            key_of.append(own)
            n_codes = max(n_codes, q ** len(pairs))
        grp_start = np.zeros((4, n_codes + 1), dtype=np.int64)
        grp_rows = [np.zeros(0, dtype=np.int64)]
        base = 0
        for k in range(1, 4):
            order = np.argsort(key_of[k], kind="stable")
            counts = np.bincount(key_of[k], minlength=n_codes)
            grp_start[k, 1:] = np.cumsum(counts)
            grp_start[k] += base
            grp_rows.append(order.astype(np.int64))
            base += sizes[k]
        self.keypart = keypart
        self.grp_start = grp_start
        self.grp_rows = np.concatenate(grp_rows)
        self.pair_checks = np.array(checks, dtype=np.int64).reshape(-1, 4)

        self.Y3 = np.ascontiguousarray(ipts[:, 2])
        self.Y4 = np.ascontiguousarray(ipts[:, 3])
        self.prime = F.k == 1
        if self.prime:
            expect = [(1, t, u, w) for t in range(1, q) for u in range(1, q) for w in range(1, q)]
            if not np.array_equal(ipts, np.array(expect).reshape(-1, 4)):
                raise SearchError("unexpected interior point order")
        cuts = np.nonzero(np.diff(ipts[:, 1]))[0] + 1
        self.slice_start = np.concatenate([[0], cuts, [Pi]]).astype(np.int64)

        by_var = sweep.d_by_variable()
        loop = [sweep.col[by_var[3]], sweep.col[by_var[2]], sweep.col[by_var[1]]]
        res = sweep.col[by_var[0]]
        self.Mloop = np.ascontiguousarray(lay.M[:, loop])
        self.Dloop = np.ascontiguousarray(lay.D[:, loop, :])
        self.Mres = np.ascontiguousarray(lay.M[:, res])
        self.neg_inv = np.array([F.neg(F.inv(int(x))) if x else 0 for x in self.Mres], dtype=np.int64)
        self.Dres = np.ascontiguousarray(lay.D[:, res, :])

    def run(self, shard: tuple[int, int] = (0, 1), limit: int = -1, max_candidates: int = -1):
        """(survivor rows, join size, swept count, fallback count).

        Survivor rows are ``(r123, r124, r134, r234, d1, d2, d3, d4)`` with
        ``d_l`` the coefficient of ``x1 x2 x3 x4 x_l``. With ``limit >= 0`` the
        run stops once that many survivors are found and the join size is a
        lower bound; ``max_candidates >= 0`` likewise stops at that join
        position.
        """
        index, count = shard
        if any(len(a) == 0 for a in self.arrays):
            return np.zeros((0, 8), dtype=np.int64), 0, 0, 0
        lay = self.sweep.layout
        out, cand, swept, fb = kernel.join_sweep(
            self.off, self.T, self.E, self.keypart, self.grp_start, self.grp_rows, self.pair_checks,
            self.rows_all, self.colmap, len(self.sweep.active),
            self.Y3, self.Y4, self.slice_start,
            lay.M, lay.D, self.Mloop, self.Dloop, self.Mres, self.neg_inv, self.Dres,
            self.neg, self.add, self.mul, self.prime, index, count, limit, max_candidates,
        )
        return out, int(cand), int(swept), int(fb)

    def candidate(self, rows: Sequence[int]) -> AssembledCandidate:
        coeffs: dict[Slot, int] = {}
        for arr, r in zip(self.arrays, rows):
            for s, v in zip(arr.slots, arr.rows[r]):
                coeffs[s] = int(v)
        return AssembledCandidate(tuple(int(r) for r in rows), coeffs)

    def form(self, row: Sequence[int]) -> Form:
        """Quaternary form of a survivor row from :meth:`run`."""
        cand = self.candidate(row[:4])
        by_var = self.sweep.d_by_variable()
        coeffs = dict(cand.coeffs)
        for s, v in zip(by_var, row[4:]):
            coeffs[s] = int(v)
        return Form.from_dict(self.F, 4, 5, {s.exponent(4): v for s, v in coeffs.items() if v})


def verify_quaternary(
    F: FieldSpec,
    g_index: int,
    shard: tuple[int, int] = (0, 1),
    orbit_dbs: dict[str, SurvivorDB] | None = None,
    arrays: Sequence[TripleArray] | None = None,
    max_reported: int = 50,
    stop_after: int | None = None,
) -> VerificationReport:
    """Stage-2 search for one g-shape.

    ``stop_after`` turns the exhaustive search into an existence search that
    ends after that many survivors (used where survivors are expected).
    """
    start = time.perf_counter()
    index, count = shard
    if count < 1 or not 0 <= index < count:
        raise SearchError(f"invalid shard {index}/{count}")
    if arrays is None:
        arrays = build_arrays(F, g_index, orbit_dbs)
    engine = JoinEngine(F, g_index, arrays)
    limit = -1 if stop_after is None else int(stop_after)
    rows, n_cand, swept, fallbacks = engine.run((index, count), limit)
    survivors = []
    audited_ok = True
    for row in rows[:max_reported]:
        f = engine.form(row)
        census, confirmed = audit_counterexample(F, f)
        audited_ok &= confirmed
        survivors.append(
            {"rows": [int(x) for x in row[:4]], "d": [int(x) for x in row[4:]], "zeros": census.total, "form": format_form(f)}
        )
    n_survivors = len(rows)
    exhaustive = stop_after is None or n_survivors < stop_after
    exp = quaternary_expectation(F.q, f"g{g_index}")
    checks = {"reported survivors confirmed by affine scan": audited_ok}
    if exp.kind == "no_survivors":
        checks["no survivors"] = n_survivors == 0
        checks["search exhaustive"] = exhaustive
    elif exp.kind == "some_survivor":
        checks["at least one survivor"] = n_survivors > 0
    observed = {
        "q": F.q,
        "g_shape": f"g{g_index}",
        "array_sizes": [len(a) for a in arrays],
        "candidate_count": n_cand,
        "candidates_swept": swept,
        "exhaustive": exhaustive,
        "dterm_space": F.q**4,
        "survivor_count": n_survivors,
        "survivors": survivors,
        "exact_fallbacks": fallbacks,
    }
    return VerificationReport.from_checks(
        claim=f"quaternary/q={F.q}/g{g_index}",
        expectation=exp.text,
        observed=observed,
        checks=checks,
        provenance={
            "field": F.header(),
            "shard": f"{index}/{count}",
            "elapsed_s": round(time.perf_counter() - start, 3),
        },
        unknown=exp.kind == "unknown",
    )


def merge_quaternary_reports(reports: Sequence[VerificationReport]) -> VerificationReport:
    """Combine the per-shard reports of one run into a single report."""
    if not reports:
        raise SearchError("nothing to merge")
    first = reports[0]
    shards = sorted(int(r.provenance["shard"].split("/")[0]) for r in reports)
    total = {r.provenance["shard"].split("/")[1] for r in reports}
    claims = {r.claim for r in reports}
    fields = {r.provenance["field"] for r in reports}
    if len(total) != 1 or len(claims) != 1 or len(fields) != 1:
        raise SearchError("reports belong to different runs")
    n = int(total.pop())
    if len(set(shards)) != len(shards):
        raise SearchError("overlapping shards")
    obs = [r.observed for r in reports]
    survivors = sorted((s for o in obs for s in o["survivors"]), key=lambda s: (s["rows"], s["d"]))
    n_survivors = sum(o["survivor_count"] for o in obs)
    exhaustive = all(o["exhaustive"] for o in obs)
    exp = quaternary_expectation(int(first.observed["q"]), first.observed["g_shape"])
    checks = {
        "reported survivors confirmed by affine scan": all(
            r.checks["reported survivors confirmed by affine scan"] for r in reports
        ),
        "all shards present": shards == list(range(n)),
    }
    if exp.kind == "no_survivors":
        checks["no survivors"] = n_survivors == 0
        checks["search exhaustive"] = exhaustive
    elif exp.kind == "some_survivor":
        checks["at least one survivor"] = n_survivors > 0
    observed = dict(first.observed)
    observed.update(
        candidate_count=max(o["candidate_count"] for o in obs),
        candidates_swept=sum(o["candidates_swept"] for o in obs),
        exhaustive=exhaustive,
        survivor_count=n_survivors,
        survivors=survivors,
        exact_fallbacks=sum(o["exact_fallbacks"] for o in obs),
    )
    return VerificationReport.from_checks(
        claim=first.claim,
        expectation=first.expectation,
        observed=observed,
        checks=checks,
        provenance={
            "field": first.provenance["field"],
            "shards": n,
            "elapsed_s": round(sum(r.provenance["elapsed_s"] for r in reports), 3),
        },
        unknown=exp.kind == "unknown",
    )


def quaternary_shard_path(root, F: FieldSpec, g_index: int, shards: int, index: int, stop_after: int | None):
    from pathlib import Path

    text = "\n".join([F.header(), f"g{g_index}", str(shards), str(stop_after)])
    key = hashlib.sha256(text.encode()).hexdigest()[:16]
    return Path(root) / f"q{F.q}-g{g_index}-quaternary-{key}" / f"shard-{index:05d}-of-{shards:05d}.json"


def run_quaternary(
    F: FieldSpec,
    g_index: int,
    shards: int = 1,
    only: Sequence[int] | None = None,
    checkpoint=None,
    orbit_dbs: dict[str, SurvivorDB] | None = None,
    stop_after: int | None = None,
) -> list[VerificationReport]:
    """Run (some of) the shards of one g-shape, reusing finished shard
    reports found under ``checkpoint``."""
    ids = range(shards) if only is None else only
    arrays = None
    out = []
    for i in ids:
        path = quaternary_shard_path(checkpoint, F, g_index, shards, i, stop_after) if checkpoint else None
        if path is not None and path.exists():
            try:
                out.append(VerificationReport.from_json(path.read_text()))
                continue
            except (ValueError, KeyError):
                log.warning("ignoring unreadable checkpoint %s", path)
        if arrays is None:
            if orbit_dbs is None:
                orbit_dbs = lemma8_databases(F, checkpoint=checkpoint)
            arrays = build_arrays(F, g_index, orbit_dbs)
        rep = verify_quaternary(F, g_index, (i, shards), arrays=arrays, stop_after=stop_after)
        if path is not None:
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(".tmp")
            tmp.write_text(rep.to_json())
            tmp.replace(path)
        log.info("q=%d g%d shard %d/%d: %d survivors", F.q, g_index, i, shards, rep.observed["survivor_count"])
        out.append(rep)
    return out
