from __future__ import annotations

import itertools
import random

import pytest

from qvf.claims import SHARP_EXAMPLE
from qvf.forms import Form, count_projective_zeros, restrict
from qvf.gf import build_field, field_of_order
from qvf.shapes import (
    CYCLIC_ARCS,
    G_ARCS,
    ShapeError,
    Slot,
    Status,
    TripleShape,
    Tournament,
    apply_scaling,
    build_template,
    canonical_slots,
    classify_triple,
    g_template,
    g_tournament,
    instantiate,
    iter_assignments,
    parse_descriptor,
    scaling_orbits,
    slot_values,
    ternary_template,
    triple_tournament,
)


def a(i, j):
    return Slot("a", (i, j))


def all_tournaments(m):
    pairs = list(itertools.combinations(range(1, m + 1), 2))
    for dirs in itertools.product((0, 1), repeat=len(pairs)):
        yield Tournament.from_arcs(m, [(i, j) if d else (j, i) for (i, j), d in zip(pairs, dirs)])


def test_classify_examples():
    t = Tournament.from_arcs(3, [(1, 2), (1, 3), (2, 3)])
    c = classify_triple(t, (1, 2, 3))
    assert c.shape is TripleShape.TRANSITIVE and c.relabel == (1, 2, 3)
    assert classify_triple(Tournament.from_arcs(3, CYCLIC_ARCS), (1, 2, 3)).shape is TripleShape.CYCLIC
    assert t.classify() == "transitive"


def test_classify_relabel_carries_to_canonical_pattern():
    canon = {TripleShape.TRANSITIVE: triple_tournament("transitive"), TripleShape.CYCLIC: triple_tournament("cyclic")}
    for t in all_tournaments(4):
        for triple in itertools.combinations(range(1, 5), 3):
            c = classify_triple(t, triple)
            assert t.restrict(c.relabel) == canon[c.shape]
            # invariant under listing the triple in another order
            for perm in itertools.permutations(triple):
                assert classify_triple(t, perm).shape is c.shape


def test_four_vertex_tournaments_fall_into_four_classes():
    # 64 labelled tournaments: 24 transitive (g1), 8 + 8 with a 3-cycle plus source or sink, 24 with a 4-cycle
    counts = {}
    for t in all_tournaments(4):
        counts[t.classify()] = counts.get(t.classify(), 0) + 1
    assert sorted(counts) == ["g1", "g2", "g3", "g4"]
    assert sum(counts.values()) == 64
    for i in range(1, 5):
        assert g_tournament(i).classify() == f"g{i}"


def test_tournament_rejects_bad_arcs():
    with pytest.raises(ShapeError):
        Tournament.from_arcs(3, [(1, 2), (2, 1), (2, 3)])
    with pytest.raises(ShapeError):
        Tournament.from_arcs(3, [(1, 2), (1, 3)])
    with pytest.raises(ShapeError):
        g_tournament(5)


def test_g_template_pins_and_counts():
    for i in range(1, 5):
        t = g_template(i)
        act = t.active
        kinds = [s.kind for s, _, _ in act]
        assert kinds.count("a") == 6 and kinds.count("b") == 12 and kinds.count("c") == 12 and kinds.count("d") == 4
        pinned = t.pinned
        first = a(2, 1) if i == 4 else a(1, 2)
        assert pinned == {first: 1, a(2, 3): 1, a(3, 4): 1}
        assert len(t.free_slots) == 3 + 12 + 12 + 4
        for s in t.slots:
            if s.kind == "a" and not t.tournament.beats(*s.index):
                assert t.status_of(s) is Status.ZERO


def test_g_template_triples():
    g1, g2, g4 = g_tournament(1), g_tournament(2), g_tournament(4)
    c = classify_triple(g1, (1, 2, 3))
    assert c.shape is TripleShape.TRANSITIVE and c.relabel == (1, 2, 3)
    assert g_template(1).status_of(a(1, 3)) is Status.FREE
    assert classify_triple(g2, (1, 2, 3)).shape is TripleShape.CYCLIC
    assert g4.restrict((2, 3, 4)) == g1.restrict((2, 3, 4))


def test_ternary_template_counts():
    F = build_field(7)
    q = F.q
    t = ternary_template("transitive", {a(1, 2): 1, a(1, 3): 1, a(2, 3): 1}, F)
    assert t.size(F) == q**6
    assert ternary_template("transitive").size(F) == (q - 1) ** 3 * q**6
    assert ternary_template("cyclic", {a(1, 2): 1}).size(F) == (q - 1) ** 2 * q**6
    assert len(canonical_slots(3)) == 6 + 3 + 3
    assert len([s for s, _, _ in t.active]) == 9


def test_ternary_template_errors():
    with pytest.raises(ShapeError):
        ternary_template("transitive", {a(2, 1): 1})
    with pytest.raises(ShapeError):
        ternary_template("transitive", {a(1, 2): 0})
    with pytest.raises(ShapeError):
        ternary_template("transitive", {Slot("b", (1, 2, 3)): 1})


def test_instantiate_examples():
    F = build_field(7)
    t = ternary_template("transitive", {a(1, 2): 1, a(1, 3): 1, a(2, 3): 1})
    f = instantiate(t, [0] * 6, F)
    assert f.as_dict() == {(3, 2, 0): 1, (3, 0, 2): 1, (0, 3, 2): 1}
    with pytest.raises(ShapeError):
        instantiate(t, [0] * 5, F)
    with pytest.raises(ShapeError):
        instantiate(t, [7] + [0] * 5, F)


def test_sharp_example_lies_in_transitive_family():
    F = build_field(7)
    t = ternary_template("transitive")
    f = Form.from_dict(F, 3, 5, SHARP_EXAMPLE)
    vals = slot_values(t, f)
    assert [vals[s] for s in (a(1, 2), a(1, 3), a(2, 3))] == [2, 2, 4]
    g = instantiate(t, [vals[s] for s in t.free_slots], F)
    assert g == f


def test_g_instantiation_restricts_to_ternary_instantiation():
    F = build_field(5)
    rng = random.Random(3)
    for i in range(1, 5):
        tmpl = g_template(i)
        tour = tmpl.tournament
        for _ in range(5):
            values = [rng.randrange(1, 5) if s.kind == "a" else rng.randrange(5) for s in tmpl.free_slots]
            f = instantiate(tmpl, values, F)
            coeffs = {s: v for s, v in slot_values(tmpl, f).items()}
            for triple in itertools.combinations(range(1, 5), 3):
                cls = classify_triple(tour, triple)
                perm = {v: c + 1 for c, v in enumerate(cls.relabel)}
                basis = [tuple(int(k == v) for k in range(1, 5)) for v in cls.relabel]
                sub = restrict(f, basis)
                tt = build_template(3, triple_tournament(cls.shape), "custom")
                expect = {}
                for s, v in coeffs.items():
                    if s.variables <= set(triple) and v:
                        s3 = s.relabel(perm)
                        assert tt.status_of(s3) is not Status.ZERO
                        expect[s3.exponent(3)] = v
                assert sub.as_dict() == expect


def test_descriptor_round_trip():
    for i in range(1, 5):
        t = g_template(i)
        assert parse_descriptor(t.descriptor()) == t
    t = ternary_template("cyclic", {a(1, 2): 3})
    assert parse_descriptor(t.descriptor()) == t
    with pytest.raises(ShapeError):
        parse_descriptor("pins=a(1,2):1")


def test_orbits_q2_single():
    F = build_field(2)
    slots = [a(1, 2), a(1, 3), a(2, 3)]
    part = scaling_orbits(F, slots, 3)
    assert part.representatives == ((1, 1, 1),)


def brute_orbits(F, slots, m):
    """Orbits by applying every group element to every tuple directly."""
    units = list(range(1, F.q))
    seen, orbits = set(), []
    for t in itertools.product(units, repeat=len(slots)):
        if t in seen:
            continue
        orb = set()
        for g in itertools.product(units, repeat=m + 1):
            c, lams = g[0], g[1:]
            u = []
            for v, s in zip(t, slots):
                w = F.mul(v, c)
                for lam, k in zip(lams, s.exponent(m)):
                    w = F.mul(w, F.pow(lam, k))
                u.append(w)
            orb.add(tuple(u))
        seen |= orb
        orbits.append(orb)
    return orbits


@pytest.mark.parametrize("q", [5, 7, 8, 9])
def test_orbit_partition_matches_brute_force(q):
    F = field_of_order(q)
    for shape in ("transitive", "cyclic"):
        slots = [s for s, _, _ in ternary_template(shape).active if s.kind == "a"]
        part = scaling_orbits(F, slots, 3)
        orbits = brute_orbits(F, slots, 3)
        assert sorted(min(o) for o in orbits) == list(part.representatives)
        # partition: each tuple maps to the representative of its own orbit
        for o in orbits:
            for t in o:
                rep, g = part.to_rep[t]
                assert rep == min(o)
                f = Form.from_dict(F, 3, 5, {s.exponent(3): v for s, v in zip(slots, t)})
                h = apply_scaling(f, g[0], g[1:])
                assert tuple(h.as_dict()[s.exponent(3)] for s in slots) == rep


@pytest.mark.parametrize("q", [11, 13, 16])
def test_orbit_partition_covers_every_tuple(q):
    F = field_of_order(q)
    slots = [s for s, _, _ in ternary_template("transitive").active if s.kind == "a"]
    part = scaling_orbits(F, slots, 3)
    assert len(part.to_rep) == (q - 1) ** 3
    assert set(rep for rep, _ in part.to_rep.values()) == set(part.representatives)


def test_scaling_preserves_census_and_composes():
    rng = random.Random(11)
    for q in (7, 8, 11):
        F = field_of_order(q)
        t = ternary_template("cyclic")
        values = [rng.randrange(1, q) if s.kind == "a" else rng.randrange(q) for s in t.free_slots]
        f = instantiate(t, values, F)
        g1 = [rng.randrange(1, q) for _ in range(4)]
        g2 = [rng.randrange(1, q) for _ in range(4)]
        h = apply_scaling(f, g1[0], g1[1:])
        assert count_projective_zeros(h) == count_projective_zeros(f)
        both = apply_scaling(h, g2[0], g2[1:])
        prod = [F.mul(x, y) for x, y in zip(g1, g2)]
        assert both == apply_scaling(f, prod[0], prod[1:])
        assert apply_scaling(f, 1, [1, 1, 1]) == f
    with pytest.raises(ShapeError):
        apply_scaling(f, 0, [1, 1, 1])


def test_iter_assignments_size():
    F = build_field(2)
    t = ternary_template("transitive", {a(1, 2): 1, a(1, 3): 1, a(2, 3): 1})
    assert sum(1 for _ in iter_assignments(t, F)) == 2**6


def test_g_arcs_contain_h():
    for arcs in G_ARCS.values():
        assert {(2, 3), (2, 4), (3, 4)} <= set(arcs)
