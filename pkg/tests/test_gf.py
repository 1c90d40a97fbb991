from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qvf.gf import (
    FieldError,
    build_field,
    check_axioms,
    elements,
    field_from_header,
    field_of_order,
    irreducible_polynomials,
    is_irreducible,
    nonzero_elements,
    prime_power,
    smallest_irreducible,
)

REQUIRED = [5, 7, 8, 9, 11, 13, 16, 25, 27, 32]


def brute_order(F, a):
    x, n = a, 1
    while x != 1:
        x = F.mul(x, a)
        n += 1
    return n


def test_generator_of_f7_is_smallest_primitive_root():
    # oracle: multiplicative order of 2, 3, ... mod 7 by repeated multiplication
    order = {g: next(n for n in range(1, 7) if pow(g, n, 7) == 1) for g in range(1, 7)}
    smallest = min(g for g, n in order.items() if n == 6)
    F = build_field(7)
    assert smallest == 3
    assert F.generator == 3


def test_f2_tables_are_trivial():
    F = build_field(2)
    assert F.q == 2 and F.generator == 1
    assert F.mul(1, 1) == 1 and F.add(1, 1) == 0


def test_f16_class_of_x_has_order_15():
    F = build_field(2, 4, (1, 1, 0, 0, 1))
    assert brute_order(F, 2) == 15


def test_default_modulus_is_smallest_irreducible():
    # low degree first: (1,0,0,1,1) = x^4 + x^3 + 1 precedes (1,1,0,0,1) = x^4 + x + 1
    assert smallest_irreducible(2, 4) == (1, 0, 0, 1, 1)
    assert field_of_order(16).modulus == (1, 0, 0, 1, 1)
    for p, k in [(3, 2), (5, 2), (3, 3), (2, 5)]:
        assert smallest_irreducible(p, k) == irreducible_polynomials(p, k)[0]


def test_irreducible_counts():
    # number of monic irreducibles of degree k: (1/k) sum_{d | k} mu(d) p^(k/d)
    assert len(irreducible_polynomials(2, 4)) == 3
    assert len(irreducible_polynomials(5, 2)) == 10
    assert len(irreducible_polynomials(3, 3)) == 8
    assert len(irreducible_polynomials(2, 5)) == 6


def test_small_examples():
    F7 = build_field(7)
    assert F7.add(3, 5) == 1
    assert F7.mul(3, 5) == 1
    assert F7.inv(3) == 5
    F16 = field_of_order(16)
    assert all(F16.add(a, a) == 0 for a in F16.elements())
    F25 = field_of_order(25)
    # digits low degree first: x + 2 -> 2 + 1*5 = 7, 2x + 4 -> 4 + 2*5 = 14, 3x + 1 -> 1 + 3*5 = 16
    assert F25.add(7, 14) == 16
    F27 = field_of_order(27)
    assert all(F27.mul(a, F27.inv(a)) == 1 for a in F27.nonzero_elements())


def test_element_listings():
    assert tuple(elements(build_field(5))) == (0, 1, 2, 3, 4)
    assert list(elements(field_of_order(16))) == list(range(16))
    assert len(nonzero_elements(field_of_order(32))) == 31


def test_inverse_of_zero_raises():
    with pytest.raises(ZeroDivisionError):
        build_field(7).inv(0)


@pytest.mark.parametrize(
    "args",
    [
        dict(p=6),
        dict(p=2, k=2, modulus=(1, 0, 1)),  # x^2 + 1 = (x + 1)^2 over F_2
        dict(p=2, k=13),  # 8192 > default bound
        dict(p=3, k=2, modulus=(1, 1)),  # wrong degree
    ],
)
def test_build_field_errors(args):
    with pytest.raises(FieldError):
        build_field(**args)


def test_prime_power():
    assert prime_power(32) == (2, 5)
    assert prime_power(27) == (3, 3)
    with pytest.raises(FieldError):
        prime_power(12)
    with pytest.raises(FieldError):
        prime_power(1)


def test_is_irreducible():
    assert is_irreducible((1, 1, 1), 2)
    assert not is_irreducible((1, 0, 1), 2)


@pytest.mark.parametrize("q", REQUIRED)
def test_field_axioms_exhaustive(q):
    F = field_of_order(q)
    results = check_axioms(F)
    assert results["add associative"][0] == q**3
    assert all(v == 0 for _, v in results.values()), results


@pytest.mark.parametrize("q", REQUIRED)
def test_frobenius_and_characteristic(q):
    F = field_of_order(q)
    for a in F.elements():
        assert F.pow(a, q) == a
        if a:
            assert F.pow(a, q - 1) == 1
        acc = 0
        for _ in range(F.p):
            acc = F.add(acc, a)
        assert acc == 0


def test_header_round_trip():
    for q in REQUIRED:
        F = field_of_order(q)
        G = field_from_header(F.header())
        assert G == F and G.exp_table == F.exp_table
    assert field_of_order(16).header() == "q=16 p=2 k=4 modulus=1,0,0,1,1"


def test_alternative_moduli_are_fields():
    for modulus in irreducible_polynomials(2, 4):
        F = build_field(2, 4, modulus)
        assert all(v == 0 for _, v in check_axioms(F).values())


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(REQUIRED), st.data())
def test_pow_matches_repeated_multiplication(q, data):
    F = field_of_order(q)
    a = data.draw(st.integers(0, q - 1))
    n = data.draw(st.integers(0, 40))
    acc = 1
    for _ in range(n):
        acc = F.mul(acc, a)
    assert F.pow(a, n) == acc


@settings(max_examples=200, deadline=None)
@given(st.sampled_from([9, 25, 27]), st.data())
def test_addition_is_digitwise(q, data):
    F = field_of_order(q)
    a = data.draw(st.integers(0, q - 1))
    b = data.draw(st.integers(0, q - 1))
    da = [(a // F.p**i) % F.p for i in range(F.k)]
    db = [(b // F.p**i) % F.p for i in range(F.k)]
    expect = sum(((x + y) % F.p) * F.p**i for i, (x, y) in enumerate(zip(da, db)))
    assert F.add(a, b) == expect
    assert F.sub(F.add(a, b), b) == a
