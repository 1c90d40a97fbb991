"""Expected outcomes of each verification run, keyed by stage and q.

Kept as data so that exploratory runs (q = 8, 9 for the quaternary stage)
reuse the same machinery and report findings without a verdict.
"""

from __future__ import annotations

from dataclasses import dataclass

CLAIMS_VERSION = 1


@dataclass(frozen=True)
class Expectation:
    kind: str  # no_survivors | zeros_eq_3 | zeros_le_4 | some_survivor | unknown
    text: str
    bound_attained: int | None = None


# (stage, q_min, q_max, shapes or None for all, expectation)
CLAIMS: list[tuple[str, int, int, tuple[str, ...] | None, Expectation]] = [
    ("lemma8", 17, 10**9, None, Expectation("no_survivors", "every ternary form has a non-singular zero")),
    ("lemma8", 11, 16, None, Expectation("zeros_eq_3", "a non-singular zero or exactly 3 projective zeros")),
    ("lemma8", 7, 7, None, Expectation("zeros_le_4", "a non-singular zero or at most 4 projective zeros; 4 attained", 4)),
    ("lemma8", 2, 10, None, Expectation("zeros_le_4", "a non-singular zero or at most 4 projective zeros")),
    ("quaternary", 10, 10**9, None, Expectation("no_survivors", "every quaternary form has a non-singular zero")),
    ("quaternary", 5, 5, ("g1",), Expectation("some_survivor", "counterexamples without a non-singular zero exist")),
    ("quaternary", 2, 9, None, Expectation("unknown", "exploration: no claim")),
]


def _lookup(stage: str, q: int, shape: str | None = None) -> Expectation:
    for st, lo, hi, shapes, exp in CLAIMS:
        if st == stage and lo <= q <= hi and (shapes is None or shape in shapes):
            return exp
    return Expectation("unknown", "exploration: no claim")


def lemma8_expectation(q: int) -> Expectation:
    return _lookup("lemma8", q)


def quaternary_expectation(q: int, shape: str) -> Expectation:
    return _lookup("quaternary", q, shape)


# A form over F_7 whose only zeros are the coordinate points and (1, 6, 2),
# all singular: the at-most-4 bound for q = 7 is attained.
SHARP_EXAMPLE_Q = 7
SHARP_EXAMPLE: dict[tuple[int, int, int], int] = {
    (3, 2, 0): 2,
    (3, 0, 2): 2,
    (0, 3, 2): 4,
    (3, 1, 1): 5,
    (1, 3, 1): 6,
    (1, 1, 3): 2,
    (2, 2, 1): 1,
    (2, 1, 2): 1,
    (1, 2, 2): 1,
}
SHARP_EXAMPLE_ZEROS = ((0, 0, 1), (0, 1, 0), (1, 0, 0), (1, 6, 2))
