"""Exhaustive survivor search over a coefficient template.

A survivor is an instantiation with no non-singular zero. Survivors are
stored with their complete list of projective zeros.
"""

from __future__ import annotations

import itertools
import logging
import time
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from . import kernel
from .claims import lemma8_expectation
from .forms import Form, count_projective_zeros, lemma5_shape_check, restrict
from .gf import FieldSpec, field_from_header
from .report import VerificationReport
from .shapes import (
    ShapeTemplate,
    Slot,
    Status,
    TripleShape,
    group_elements,
    instantiate,
    parse_descriptor,
    scaling_orbits,
    slot_weights,
    ternary_template,
)

log = logging.getLogger(__name__)

DB_MAGIC = "# qvf-survivors v1"
COMPLETE = "# complete"


class SearchError(ValueError):
    pass


# -- point / monomial layout ----------------------------------------------------------


def search_points(F: FieldSpec, m: int) -> np.ndarray:
    """Normalised projective points, those with all coordinates nonzero first.

    Used only where existence of a non-singular zero matters; witness lists
    are always reported in lexicographic order.
    """
    pts = []
    for lead in reversed(range(m)):
        for tail in itertools.product(range(F.q), repeat=m - lead - 1):
            pts.append((0,) * lead + (1,) + tail)
    arr = np.array(pts, dtype=np.int64).reshape(-1, m)
    interior = np.all(arr != 0, axis=1)
    return np.concatenate([arr[interior], arr[~interior]])


@dataclass
class Layout:
    """Monomial and derivative values of every active slot at every point."""

    field: FieldSpec
    m: int
    slots: list[Slot]
    points: np.ndarray
    M: np.ndarray
    D: np.ndarray

    @classmethod
    def build(cls, F: FieldSpec, m: int, slots: Sequence[Slot], points: np.ndarray | None = None) -> "Layout":
        if points is None:
            points = search_points(F, m)
        powt = np.zeros((F.q, 6), dtype=np.int64)
        for x in range(F.q):
            for k in range(6):
                powt[x, k] = F.pow(x, k)
        mul = F.tables.mul.astype(np.int64)
        P, S = len(points), len(slots)
        M = np.zeros((P, S), dtype=np.int64)
        D = np.zeros((P, S, m), dtype=np.int64)
        for s, slot in enumerate(slots):
            e = slot.exponent(m)
            val = np.ones(P, dtype=np.int64)
            for j, k in enumerate(e):
                if k:
                    val = mul[val, powt[points[:, j], k]]
            M[:, s] = val
            for i in range(m):
                if e[i] % F.p == 0:
                    continue
                der = np.full(P, F.from_int(e[i]), dtype=np.int64)
                for j, k in enumerate(e):
                    kk = k - 1 if j == i else k
                    if kk:
                        der = mul[der, powt[points[:, j], kk]]
                D[:, s, i] = der
        return cls(F, m, list(slots), points, M, D)

    def census(self, coef_rows: np.ndarray, cap: int = 64) -> list[tuple[int, int, tuple[tuple[int, ...], ...]]]:
        """(total, nonsingular, sorted zero points) for each coefficient row."""
        t = self.field.tables
        add, mul = t.add.astype(np.int64), t.mul.astype(np.int64)
        coef_rows = np.ascontiguousarray(coef_rows, dtype=np.int64).reshape(-1, len(self.slots))
        total, nonsing, zidx = kernel.census_rows(coef_rows, self.M, self.D, add, mul, cap)
        out = []
        for r in range(len(coef_rows)):
            if total[r] > cap:
                f = Form.from_dict(
                    self.field, self.m, 5,
                    {s.exponent(self.m): int(c) for s, c in zip(self.slots, coef_rows[r]) if c},
                )
                c = count_projective_zeros(f, collect_witnesses=True)
                out.append((c.total, c.nonsingular, c.witnesses))
                continue
            pts = sorted(tuple(int(x) for x in self.points[i]) for i in zidx[r, : total[r]])
            out.append((int(total[r]), int(nonsing[r]), tuple(pts)))
        return out


@lru_cache(maxsize=32)
def _layout(F: FieldSpec, m: int, slots: tuple[Slot, ...]) -> Layout:
    return Layout.build(F, m, slots)


# -- records and databases --------------------------------------------------------------


@dataclass(frozen=True, order=True)
class SurvivorRecord:
    assignment: tuple[int, ...]
    zero_total: int
    zero_points: tuple[tuple[int, ...], ...]

    def line(self) -> str:
        a = ",".join(map(str, self.assignment))
        pts = ";".join("(" + ",".join(map(str, p)) + ")" for p in self.zero_points)
        return f"assignment={a} zeros={self.zero_total} points={pts}"

    @classmethod
    def parse(cls, line: str) -> "SurvivorRecord":
        fields = dict(tok.partition("=")[::2] for tok in line.split())
        try:
            a = tuple(int(x) for x in fields["assignment"].split(",") if x != "")
            z = int(fields["zeros"])
            raw = fields.get("points", "")
        except (KeyError, ValueError) as exc:
            raise SearchError(f"malformed survivor record {line!r}") from exc
        pts = tuple(tuple(int(x) for x in p.strip("()").split(",")) for p in raw.split(";") if p)
        if len(pts) != z:
            raise SearchError(f"record lists {len(pts)} points but zeros={z}")
        return cls(a, z, pts)


@dataclass
class SurvivorDB:
    field: FieldSpec
    template: ShapeTemplate
    normalization: str  # orbit | pinned
    records: list[SurvivorRecord]
    shard_ids: frozenset[int] = frozenset({0})
    shard_total: int = 1

    @property
    def complete(self) -> bool:
        return len(self.shard_ids) == self.shard_total

    def __len__(self) -> int:
        return len(self.records)

    def forms(self) -> Iterable[Form]:
        for r in self.records:
            yield instantiate(self.template, r.assignment, self.field)

    def zero_histogram(self) -> dict[int, int]:
        return dict(sorted(Counter(r.zero_total for r in self.records).items()))

    def dumps(self) -> str:
        recs = sorted(set(self.records))
        if self.complete:
            shards = "shards=1/1"
        else:
            ids = ",".join(map(str, sorted(self.shard_ids)))
            shards = f"shards={len(self.shard_ids)}/{self.shard_total}\nshard_ids={ids}"
        lines = [
            DB_MAGIC,
            self.field.header(),
            self.template.descriptor(),
            f"normalization={self.normalization}",
            shards,
        ]
        lines += [r.line() for r in recs]
        if self.complete:
            lines.append(COMPLETE)
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "SurvivorDB":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0] != DB_MAGIC:
            raise SearchError("not a survivor database")
        try:
            F = field_from_header(lines[1])
            template = parse_descriptor(lines[2])
            norm = lines[3].partition("=")[2]
            done, _, total = lines[4].partition("=")[2].partition("/")
            done, total = int(done), int(total)
        except (IndexError, ValueError) as exc:
            raise SearchError(f"malformed survivor database header: {exc}") from exc
        body = lines[5:]
        ids = frozenset(range(total)) if done == total else frozenset()
        if body and body[0].startswith("shard_ids="):
            ids = frozenset(int(x) for x in body[0].partition("=")[2].split(",") if x)
            body = body[1:]
        complete = bool(body) and body[-1] == COMPLETE
        if complete:
            body = body[:-1]
        if complete != (len(ids) == total):
            raise SearchError("completeness sentinel disagrees with shard header")
        if norm not in ("orbit", "pinned"):
            raise SearchError(f"unknown normalization {norm!r}")
        records = [SurvivorRecord.parse(ln) for ln in body]
        if records != sorted(set(records)):
            raise SearchError("survivor records are not sorted and unique")
        return cls(F, template, norm, records, ids, total)

    def save(self, path) -> None:
        from pathlib import Path

        path = Path(path)
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_text(self.dumps())
        tmp.replace(path)

    @classmethod
    def load(cls, path) -> "SurvivorDB":
        from pathlib import Path

        return cls.loads(Path(path).read_text())


def merge(dbs: Sequence[SurvivorDB]) -> SurvivorDB:
    """Sorted union of shard fragments of one run."""
    if not dbs:
        raise SearchError("nothing to merge")
    first = dbs[0]
    ids: set[int] = set()
    records: set[SurvivorRecord] = set()
    for db in dbs:
        if db.field.header() != first.field.header():
            raise SearchError(f"field mismatch: {db.field.header()} vs {first.field.header()}")
        if db.template.descriptor() != first.template.descriptor():
            raise SearchError("template mismatch")
        if db.normalization != first.normalization:
            raise SearchError("normalization mismatch")
        if db.shard_total != first.shard_total:
            raise SearchError("shard layouts differ")
        if ids & db.shard_ids:
            raise SearchError(f"shards {sorted(ids & db.shard_ids)} present twice")
        ids |= db.shard_ids
        records.update(db.records)
    return SurvivorDB(first.field, first.template, first.normalization, sorted(records), frozenset(ids), first.shard_total)


# -- enumeration ---------------------------------------------------------------------------


@lru_cache(maxsize=64)
def orbit_partition(F: FieldSpec, template_descriptor: str):
    template = parse_descriptor(template_descriptor)
    a_slots = [s for s, _, _ in template.active if s.kind == "a"]
    return scaling_orbits(F, a_slots, template.m)


@dataclass
class _Plan:
    template: ShapeTemplate
    layout: Layout
    prefix_slots: list[Slot]
    prefix_rows: list[tuple[int, ...]]
    inner: list[Slot]
    fixed_inner: list[Slot]
    loop: list[Slot]
    resolve: Slot | None

    def units(self, F: FieldSpec) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
        doms = [self.template.domain(s, F) for s in self.fixed_inner]
        return [(pre, fix) for pre in self.prefix_rows for fix in itertools.product(*doms)]


def _plan(F: FieldSpec, template: ShapeTemplate, normalization: str) -> _Plan:
    active = [s for s, _, _ in template.active]
    layout = _layout(F, template.m, tuple(active))
    free = template.free_slots
    if normalization == "orbit":
        a_active = [s for s in active if s.kind == "a"]
        a_free = [s for s in free if s.kind == "a"]
        if a_free != a_active:
            raise SearchError("orbit normalization needs every a-slot free")
        part = orbit_partition(F, template.descriptor())
        prefix_slots, prefix_rows = a_free, list(part.representatives)
        inner = [s for s in free if s.kind != "a"]
    elif normalization == "pinned":
        prefix_slots, prefix_rows, inner = [], [()], list(free)
    else:
        raise SearchError(f"unknown normalization {normalization!r}")
    k = len(inner)
    n_fix = max(0, k - 4)
    fixed_inner = inner[:n_fix]
    loop = inner[n_fix : k - 1] if k else []
    resolve = inner[-1] if k else None
    return _Plan(template, layout, prefix_slots, prefix_rows, inner, fixed_inner, loop, resolve)


def _check_shard(shard: tuple[int, int]) -> None:
    index, count = shard
    if count < 1 or not 0 <= index < count:
        raise SearchError(f"invalid shard {index}/{count}")


def shard_units(n_units: int, shard: tuple[int, int]) -> range:
    index, count = shard
    return range(index, n_units, count)


def enumerate_survivors(
    F: FieldSpec,
    template: ShapeTemplate,
    shard: tuple[int, int] = (0, 1),
    normalization: str = "pinned",
) -> SurvivorDB:
    _check_shard(shard)
    plan = _plan(F, template, normalization)
    lay = plan.layout
    t = F.tables
    add, mul = t.add.astype(np.int64), t.mul.astype(np.int64)
    col = {s: i for i, s in enumerate(lay.slots)}
    pinned = template.pinned
    units = plan.units(F)
    free_order = template.free_slots
    assign_slots = plan.prefix_slots + plan.inner
    reorder = [assign_slots.index(s) for s in free_order]

    raw: list[tuple[int, ...]] = []
    if plan.resolve is None:
        for u in shard_units(len(units), shard):
            pre, _ = units[u]
            raw.append(tuple(pre))
    else:
        loop_cols = [col[s] for s in plan.loop]
        res_col = col[plan.resolve]
        Mloop = np.ascontiguousarray(lay.M[:, loop_cols])
        Dloop = np.ascontiguousarray(lay.D[:, loop_cols, :])
        dom = np.zeros((len(plan.loop), F.q), dtype=np.int64)
        domsize = np.zeros(len(plan.loop), dtype=np.int64)
        for i, s in enumerate(plan.loop):
            d = list(template.domain(s, F))
            dom[i, : len(d)] = d
            domsize[i] = len(d)
        Mres = np.ascontiguousarray(lay.M[:, res_col])
        neg_inv = np.array([F.neg(F.inv(int(x))) if x else 0 for x in Mres], dtype=np.int64)
        Dres = np.ascontiguousarray(lay.D[:, res_col, :])
        res_allowed = np.zeros(F.q, dtype=np.bool_)
        res_allowed[list(template.domain(plan.resolve, F))] = True
        base = np.zeros(len(lay.slots), dtype=np.int64)
        for s, v in pinned.items():
            base[col[s]] = v
        fixed_cols = [col[s] for s in plan.prefix_slots + plan.fixed_inner]
        for u in shard_units(len(units), shard):
            pre, fix = units[u]
            coefs = base.copy()
            coefs[fixed_cols] = list(pre) + list(fix)
            bval, bgrad = kernel.accumulate(coefs, lay.M, lay.D, add, mul)
            rows = kernel.scan_unit(bval, bgrad, Mloop, Dloop, dom, domsize, Mres, neg_inv, Dres, res_allowed, add, mul)
            for row in rows:
                raw.append(tuple(pre) + tuple(fix) + tuple(int(x) for x in row))

    assignments = [tuple(a[i] for i in reorder) for a in raw]
    records = census_records(F, template, assignments)
    for r in records:
        if r[1] != 0:
            raise SearchError(f"kernel reported {r[0].assignment} but it has a non-singular zero")
    index, count = shard
    return SurvivorDB(F, template, normalization, sorted(r[0] for r in records), frozenset({index}), count)


def coefficient_rows(F: FieldSpec, template: ShapeTemplate, assignments: Sequence[Sequence[int]]) -> np.ndarray:
    active = [s for s, _, _ in template.active]
    col = {s: i for i, s in enumerate(active)}
    rows = np.zeros((len(assignments), len(active)), dtype=np.int64)
    for s, v in template.pinned.items():
        rows[:, col[s]] = v
    free_cols = [col[s] for s in template.free_slots]
    if len(assignments):
        rows[:, free_cols] = np.asarray(assignments, dtype=np.int64)
    return rows


def census_records(F: FieldSpec, template: ShapeTemplate, assignments: Sequence[Sequence[int]]):
    """(SurvivorRecord, nonsingular count) per assignment."""
    if not assignments:
        return []
    active = tuple(s for s, _, _ in template.active)
    lay = _layout(F, template.m, active)
    rows = coefficient_rows(F, template, assignments)
    out = []
    for a, (total, nonsing, pts) in zip(assignments, lay.census(rows)):
        out.append((SurvivorRecord(tuple(int(x) for x in a), total, pts), nonsing))
    return out


# -- stage-1 verification ------------------------------------------------------------------


def lemma8_templates() -> list[ShapeTemplate]:
    return [ternary_template(TripleShape.TRANSITIVE), ternary_template(TripleShape.CYCLIC)]


def run_template(
    F: FieldSpec,
    template: ShapeTemplate,
    normalization: str,
    shards: int = 1,
    checkpoint=None,
    jobs: int = 1,
    only: Sequence[int] | None = None,
) -> SurvivorDB:
    """Run (a subset of) the shards of one enumeration, resuming from and
    writing per-shard checkpoint files when a directory is given."""
    from .parallel import run_shards

    ids = list(range(shards)) if only is None else list(only)
    frags = run_shards(F, template, normalization, shards, ids, checkpoint, jobs)
    return merge(frags)


def verify_lemma8(
    F: FieldSpec,
    shards: int = 1,
    checkpoint=None,
    jobs: int = 1,
    shapes: Sequence[str] = ("t1", "t2"),
) -> tuple[VerificationReport, dict[str, SurvivorDB]]:
    if F.q < 5:
        raise SearchError("the ternary claims are stated for q >= 5")
    start = time.perf_counter()
    dbs = {}
    for tmpl in lemma8_templates():
        if tmpl.shape in shapes:
            dbs[tmpl.shape] = run_template(F, tmpl, "orbit", shards, checkpoint, jobs)
    elapsed = time.perf_counter() - start
    return lemma8_report(F, dbs, shards, elapsed), dbs


def lemma8_report(
    F: FieldSpec, dbs: dict[str, SurvivorDB], shards: int, elapsed: float, fragment: bool = False
) -> VerificationReport:
    """Checks for complete runs; a ``fragment`` (some shards only) is held to
    the per-survivor claims only."""
    exp = lemma8_expectation(F.q)
    hist: Counter = Counter()
    counts = {}
    for name, db in dbs.items():
        hist.update(r.zero_total for r in db.records)
        counts[name] = len(db)
    total = sum(counts.values())
    checks = {}
    if exp.kind == "no_survivors":
        checks["no survivors"] = total == 0
    elif exp.kind == "zeros_eq_3":
        checks["every survivor has exactly 3 zeros"] = set(hist) <= {3}
    elif exp.kind == "zeros_le_4":
        checks["every survivor has at most 4 zeros"] = all(z <= 4 for z in hist)
    if not fragment:
        if exp.bound_attained is not None:
            checks[f"bound {exp.bound_attained} attained"] = hist.get(exp.bound_attained, 0) > 0
        checks["all shards complete"] = all(db.complete for db in dbs.values())
    observed = {
        "survivors": counts,
        "zero_histogram": dict(sorted(hist.items())),
        "orbit_representatives": {
            name: len(orbit_partition(F, db.template.descriptor())) for name, db in dbs.items()
        },
    }
    return VerificationReport.from_checks(
        claim=f"lemma8/q={F.q}" + ("/fragment" if fragment else ""),
        expectation=exp.text,
        observed=observed,
        checks=checks,
        provenance={"field": F.header(), "shards": shards, "elapsed_s": round(elapsed, 3)},
    )


# -- audits ------------------------------------------------------------------------------------


def survivor_lemma5_audit(db: SurvivorDB) -> bool:
    """Every pair of listed zeros of every survivor obeys the line-restriction
    shape, and no line through two zeros lies in the zero set unless the
    restriction vanishes identically."""
    F = db.field
    for rec in db.records:
        f = instantiate(db.template, rec.assignment, F)
        census = count_projective_zeros(f, collect_witnesses=True)
        if census.nonsingular or tuple(census.witnesses) != rec.zero_points:
            return False
        for z1, z2 in itertools.combinations(rec.zero_points, 2):
            verdict = lemma5_shape_check(f, z1, z2)
            if not verdict.passed:
                return False
            if not verdict.line_in_zero_set:
                line = restrict(f, [z1, z2])
                line_zeros = count_projective_zeros(line).total
                if line_zeros == F.q + 1:
                    return False
    return True


def expand_orbit_survivors(db: SurvivorDB, target: ShapeTemplate) -> SurvivorDB:
    """Pinned-template survivors obtained by rescaling orbit representatives."""
    if not db.complete:
        raise SearchError("source database is incomplete")
    if db.normalization != "orbit":
        raise SearchError("source database must be orbit-normalized")
    src = db.template
    if src.tournament != target.tournament or src.m != target.m:
        raise SearchError("target template has a different tournament")
    F = db.field
    m = src.m
    active = [s for s, _, _ in src.active]
    tgt_active = [s for s, _, _ in target.active]
    if set(tgt_active) - set(active):
        raise SearchError("target has slots the source does not enumerate")
    if not db.records:
        return SurvivorDB(F, target, "pinned", [], frozenset({0}), 1)
    n = F.q - 1
    exp = np.array(F.exp_table, dtype=np.int64)
    mul = F.tables.mul.astype(np.int64)
    W = slot_weights(active, m)
    G = group_elements(F, m)
    factors = exp[(G @ W.T) % n]  # field multiplier per (group element, slot)
    rows = coefficient_rows(F, src, [r.assignment for r in db.records])
    col = {s: i for i, s in enumerate(active)}
    pinned = target.pinned
    zero_cols = [col[s] for s in active if s not in tgt_active or target.status_of(s) is Status.ZERO]
    free_cols = [col[s] for s in target.free_slots]
    found: set[tuple[int, ...]] = set()
    for row in rows:
        scaled = mul[row[None, :], factors]
        ok = np.ones(len(G), dtype=bool)
        for s, v in pinned.items():
            ok &= scaled[:, col[s]] == v
        for c in zero_cols:
            ok &= scaled[:, c] == 0
        for fc in free_cols:
            if target.free_slots[free_cols.index(fc)].kind == "a":
                ok &= scaled[:, fc] != 0
        for a in np.unique(scaled[ok][:, free_cols], axis=0):
            found.add(tuple(int(x) for x in a))
    assignments = sorted(found)
    records = census_records(F, target, assignments)
    for rec, nonsing in records:
        if nonsing:
            raise SearchError(f"rescaled survivor {rec.assignment} has a non-singular zero")
    return SurvivorDB(F, target, "pinned", sorted(r for r, _ in records), frozenset({0}), 1)
