from __future__ import annotations

import itertools
import random

import numpy as np
import pytest

from qvf.claims import SHARP_EXAMPLE
from qvf.forms import Form, count_projective_zeros, find_nonsingular_zero, projective_points
from qvf.gf import build_field, field_of_order, irreducible_polynomials
from qvf.search import (
    SearchError,
    SurvivorDB,
    SurvivorRecord,
    enumerate_survivors,
    expand_orbit_survivors,
    lemma8_report,
    merge,
    run_template,
    search_points,
    survivor_lemma5_audit,
)
from qvf.shapes import Slot, build_template, instantiate, slot_values, ternary_template, triple_tournament

from conftest import lemma8_run


def a(i, j):
    return Slot("a", (i, j))


A_TRANS = {a(1, 2): 1, a(1, 3): 1, a(2, 3): 1}
B_SLOTS = [Slot("b", (1, 2, 3)), Slot("b", (1, 3, 2)), Slot("b", (2, 3, 1))]
C_SLOTS = [Slot("c", (1, 2, 3)), Slot("c", (2, 1, 3)), Slot("c", (3, 1, 2))]


def affine_has_nonsingular_zero(F, f):
    """Independent check over every affine point, with integer arithmetic for prime q."""
    p = F.q
    terms = list(f.terms)
    for x in itertools.product(range(p), repeat=f.n):
        if not any(x):
            continue
        val = 0
        grad = [0] * f.n
        for e, c in terms:
            mono = c
            for xi, k in zip(x, e):
                mono *= xi**k
            val += mono
            for i in range(f.n):
                if e[i]:
                    t = c * e[i]
                    for j, (xj, k) in enumerate(zip(x, e)):
                        t *= xj ** (k - 1 if j == i else k)
                    grad[i] += t
        if val % p == 0 and any(g % p for g in grad):
            return True
    return False


def test_search_points_interior_first():
    F = build_field(7)
    pts = search_points(F, 3)
    assert len(pts) == 57
    assert sorted(map(tuple, pts)) == projective_points(3, F)
    n_in = 36
    assert np.all(pts[:n_in] != 0) and not np.any(np.all(pts[n_in:] != 0, axis=1))


def test_completeness_against_naive_scan_q5():
    # a-slots pinned to 1, only the three b-slots free: 5^3 = 125 candidates
    F = build_field(5)
    tmpl = build_template(3, triple_tournament("transitive"), "custom", A_TRANS, zero=C_SLOTS)
    assert tmpl.size(F) == 125
    db = enumerate_survivors(F, tmpl)
    naive = set()
    for values in itertools.product(range(5), repeat=3):
        f = instantiate(tmpl, values, F)
        if not affine_has_nonsingular_zero(F, f):
            naive.add(values)
    assert {r.assignment for r in db.records} == naive
    assert naive  # the oracle is not vacuous


def test_kernel_matches_plain_search_q7():
    # random pinned sub-families of size q^3; every candidate checked by the plain search
    F = build_field(7)
    rng = random.Random(5)
    tour = triple_tournament("transitive")
    for _ in range(3):
        pins = {s: rng.randrange(1, 7) for s in A_TRANS}
        pins.update({s: rng.randrange(1, 7) for s in C_SLOTS})
        tmpl = build_template(3, tour, "custom", pins)
        db = enumerate_survivors(F, tmpl)
        plain = []
        for values in itertools.product(range(7), repeat=3):
            f = instantiate(tmpl, values, F)
            if find_nonsingular_zero(f) is None:
                c = count_projective_zeros(f, collect_witnesses=True)
                plain.append(SurvivorRecord(values, c.total, tuple(c.witnesses)))
        assert db.records == sorted(plain)


def test_sharp_example_is_a_survivor():
    F = build_field(7)
    f = Form.from_dict(F, 3, 5, SHARP_EXAMPLE)
    tmpl = ternary_template("transitive")
    vals = slot_values(tmpl, f)
    pins = {s: v for s, v in vals.items() if v}
    full = build_template(3, tmpl.tournament, "custom", pins, zero=[s for s, v in vals.items() if not v and s.kind != "a"])
    db = enumerate_survivors(F, full)
    assert len(db) == 1 and db.records[0].zero_total == 4
    # the same assignment appears in the pinned template with its b, c slots free
    part = build_template(3, tmpl.tournament, "custom", {s: vals[s] for s in A_TRANS})
    db = enumerate_survivors(F, part)
    want = tuple(vals[s] for s in part.free_slots)
    rec = next(r for r in db.records if r.assignment == want)
    assert rec.zero_total == 4


def test_q25_transitive_has_no_survivors():
    db = lemma8_run(25)[1]["t1"]
    assert len(db) == 0 and db.complete


def test_shard_merge_is_byte_identical_q7(tmp_path):
    F = build_field(7)
    tmpl = ternary_template("transitive")
    one = run_template(F, tmpl, "orbit", 1, checkpoint=tmp_path / "one")
    frags = [enumerate_survivors(F, tmpl, (i, 8), "orbit") for i in range(8)]
    eight = merge(list(reversed(frags)))
    assert eight.dumps() == one.dumps()
    assert one.dumps().endswith("# complete\n")


def test_partial_merge_and_errors():
    F = build_field(5)
    tmpl = build_template(3, triple_tournament("transitive"), "custom", A_TRANS, zero=C_SLOTS)
    frags = [enumerate_survivors(F, tmpl, (i, 4)) for i in range(4)]
    part = merge(frags[:2])
    assert not part.complete
    text = part.dumps()
    assert "shards=2/4" in text and "shard_ids=0,1" in text and "# complete" not in text
    assert SurvivorDB.loads(text).dumps() == text
    with pytest.raises(SearchError):
        merge([frags[0], frags[0]])
    other = enumerate_survivors(build_field(7), tmpl, (0, 4))
    with pytest.raises(SearchError):
        merge([frags[0], other])
    with pytest.raises(SearchError):
        enumerate_survivors(F, tmpl, (4, 4))
    assert merge(frags).dumps() == enumerate_survivors(F, tmpl).dumps()


def test_db_rejects_corruption():
    F = build_field(5)
    tmpl = build_template(3, triple_tournament("transitive"), "custom", A_TRANS, zero=C_SLOTS)
    text = enumerate_survivors(F, tmpl).dumps()
    lines = text.splitlines()
    with pytest.raises(SearchError):
        SurvivorDB.loads("\n".join(lines[:5] + lines[6:5:-1] + lines[5:6] + lines[7:]))
    with pytest.raises(SearchError):
        SurvivorDB.loads(text.replace("# complete\n", ""))
    with pytest.raises(SearchError):
        SurvivorDB.loads(text.replace("# qvf-survivors v1", "# other"))


@pytest.mark.parametrize("q", [7, 11])
def test_orbit_expansion_matches_direct_enumeration(q):
    F = field_of_order(q)
    dbs = lemma8_run(q)[1]
    for shape, name in (("transitive", "t1"), ("cyclic", "t2")):
        base = ternary_template(shape)
        pins = {s: 1 for s, _, _ in base.active if s.kind == "a"}
        target = ternary_template(shape, pins)
        expanded = expand_orbit_survivors(dbs[name], target)
        assert expanded.dumps() == enumerate_survivors(F, target).dumps()


def test_expand_edge_cases():
    F = build_field(11)
    target = ternary_template("transitive", A_TRANS)
    empty = SurvivorDB(F, ternary_template("transitive"), "orbit", [], frozenset({0}), 1)
    assert len(expand_orbit_survivors(empty, target)) == 0
    with pytest.raises(SearchError):
        expand_orbit_survivors(SurvivorDB(F, ternary_template("transitive"), "orbit", [], frozenset({0}), 2), target)


def test_lemma5_audit_q11():
    dbs = lemma8_run(11)[1]
    assert len(dbs["t1"]) > 0
    assert all(survivor_lemma5_audit(db) for db in dbs.values())


def test_lemma5_audit_negative_control():
    F = build_field(11)
    tmpl = ternary_template("transitive", A_TRANS)
    # a record claiming that x1^3x2^2 + x1^3x3^2 + x2^3x3^2 has no zeros at all
    f = instantiate(tmpl, [0] * 6, F)
    assert find_nonsingular_zero(f) is not None
    fake = SurvivorDB(F, tmpl, "pinned", [SurvivorRecord((0,) * 6, 0, ())], frozenset({0}), 1)
    assert not survivor_lemma5_audit(fake)
    assert survivor_lemma5_audit(SurvivorDB(F, tmpl, "pinned", [], frozenset({0}), 1))


def test_survivor_soundness_q11_q13():
    for q in (11, 13):
        F = field_of_order(q)
        for db in lemma8_run(q)[1].values():
            for rec, f in zip(db.records, db.forms()):
                c = count_projective_zeros(f, collect_witnesses=True)
                assert c.nonsingular == 0 and c.total == rec.zero_total
                assert tuple(c.witnesses) == rec.zero_points


def test_modulus_independence_q16():
    mods = irreducible_polynomials(2, 4)[:2]
    counts = []
    for mod in mods:
        F = build_field(2, 4, mod)
        dbs = {t: run_template(F, ternary_template(s), "orbit", 1) for t, s in (("t1", "transitive"), ("t2", "cyclic"))}
        counts.append({k: (len(v), v.zero_histogram()) for k, v in dbs.items()})
        assert lemma8_report(F, dbs, 1, 0.0).passed
    assert counts[0] == counts[1]
