"""Shard execution with per-shard checkpoint files."""

from __future__ import annotations

import hashlib
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Sequence

from .gf import FieldSpec
from .shapes import ShapeTemplate, parse_descriptor

log = logging.getLogger(__name__)

CHECKPOINT_ENV = "QVF_CHECKPOINT_DIR"


def default_checkpoint_dir() -> Path | None:
    val = os.environ.get(CHECKPOINT_ENV)
    return Path(val) if val else None


def run_key(F: FieldSpec, template: ShapeTemplate, normalization: str, shards: int) -> str:
    text = "\n".join([F.header(), template.descriptor(), normalization, str(shards)])
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def shard_path(root: Path, F: FieldSpec, template: ShapeTemplate, normalization: str, shards: int, index: int) -> Path:
    key = run_key(F, template, normalization, shards)
    return Path(root) / f"q{F.q}-{template.shape}-{normalization}-{key}" / f"shard-{index:05d}-of-{shards:05d}.db"


def _work(args):
    from .search import enumerate_survivors

    header, descriptor, normalization, index, shards, modulus = args
    from .gf import build_field, parse_header

    h = parse_header(header)
    F = build_field(int(h["p"]), int(h["k"]), modulus if int(h["k"]) > 1 else None)
    template = parse_descriptor(descriptor)
    return enumerate_survivors(F, template, (index, shards), normalization)


def run_shards(
    F: FieldSpec,
    template: ShapeTemplate,
    normalization: str,
    shards: int,
    ids: Sequence[int],
    checkpoint: Path | str | None = None,
    jobs: int = 1,
):
    from .search import SearchError, SurvivorDB, enumerate_survivors

    results = {}
    todo = []
    for i in ids:
        if checkpoint is not None:
            path = shard_path(Path(checkpoint), F, template, normalization, shards, i)
            if path.exists():
                try:
                    db = SurvivorDB.load(path)
                    if db.shard_ids == frozenset({i}) and db.shard_total == shards:
                        results[i] = db
                        continue
                except SearchError:
                    log.warning("ignoring unreadable checkpoint %s", path)
        todo.append(i)

    def store(i, db):
        results[i] = db
        if checkpoint is not None:
            path = shard_path(Path(checkpoint), F, template, normalization, shards, i)
            path.parent.mkdir(parents=True, exist_ok=True)
            db.save(path)
        log.info("q=%d %s shard %d/%d: %d survivors", F.q, template.shape, i, shards, len(db))

    if jobs > 1 and len(todo) > 1:
        args = [(F.header(), template.descriptor(), normalization, i, shards, F.modulus) for i in todo]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for i, db in zip(todo, pool.map(_work, args)):
                store(i, db)
    else:
        for i in todo:
            store(i, enumerate_survivors(F, template, (i, shards), normalization))
    return [results[i] for i in sorted(results)]
