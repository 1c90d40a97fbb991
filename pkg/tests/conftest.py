from __future__ import annotations

import functools
import os
from pathlib import Path

import pytest

from qvf.gf import field_of_order
from qvf.parallel import CHECKPOINT_ENV
from qvf.search import verify_lemma8

ROOT = Path(__file__).resolve().parents[1]

# Long searches checkpoint per shard here, so an interrupted or repeated test
# run resumes instead of starting over.
CHECKPOINT_DIR = Path(os.environ.get(CHECKPOINT_ENV) or ROOT / ".qvf-checkpoints")

# shard counts used throughout the suite; changing them invalidates checkpoints
TERNARY_SHARDS = 8
QUATERNARY_SHARDS = 20


@functools.lru_cache(maxsize=None)
def lemma8_run(q: int):
    """(report, {shape: SurvivorDB}) for the full ternary search over F_q."""
    F = field_of_order(q)
    return verify_lemma8(F, shards=TERNARY_SHARDS, checkpoint=CHECKPOINT_DIR)


@pytest.fixture(scope="session")
def checkpoint_dir() -> Path:
    CHECKPOINT_DIR.mkdir(parents=True, exist_ok=True)
    return CHECKPOINT_DIR


# -- acceptance summary -----------------------------------------------------------------
# Tests marked ``acceptance(n, title)`` are grouped by criterion; a criterion
# passes when every test carrying its number passed.

_criteria: dict[int, str] = {}
_outcomes: dict[int, list[str]] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("acceptance")
        if mark is not None:
            n, title = mark.args
            _criteria[n] = title
            item.user_properties.append(("criterion", n))


def pytest_runtest_logreport(report):
    crit = dict(report.user_properties).get("criterion")
    if crit is None:
        return
    if report.when == "call" or report.outcome != "passed":
        _outcomes.setdefault(crit, []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        seen = _outcomes.get(n, [])
        if not seen:
            status = "NOT RUN"
        elif all(o == "passed" for o in seen):
            status = "PASS"
        else:
            status = "FAIL"
        terminalreporter.write_line(f"criterion {n}: {status}  {_criteria[n]}  ({len(seen)} checks)")
