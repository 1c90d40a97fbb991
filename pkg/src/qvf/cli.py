"""Command-line entry point.

Exit codes: 0 when every claimed expectation of the invoked report passes
(runs without a claim also exit 0), 1 when a check fails, 2 for usage and
input errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .assemble import merge_quaternary_reports, run_quaternary
from .claims import SHARP_EXAMPLE, SHARP_EXAMPLE_Q, SHARP_EXAMPLE_ZEROS
from .forms import Form, FormError, count_projective_zeros, format_form, parse_form
from .gf import FieldError, check_axioms, field_of_order
from .lift import LiftError, hensel_lift, parse_integer_form
from .parallel import default_checkpoint_dir
from .report import VerificationReport
from .search import SearchError, SurvivorDB, lemma8_report, lemma8_templates, merge, run_template, verify_lemma8

log = logging.getLogger("qvf")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunManifest:
    command: str
    parameters: dict[str, Any]
    field: str | None
    shards: str | None
    checkpoint: str | None
    started: float
    finished: float | None = None
    outputs: dict[str, str] = field(default_factory=dict)  # file name -> sha256

    def record(self, path: Path) -> None:
        self.outputs[path.name] = sha256_file(path)

    def verify(self, root: Path) -> bool:
        return all(sha256_file(root / name) == digest for name, digest in self.outputs.items())

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        return cls(**json.loads(text))


def sha256_file(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def parse_shard(text: str) -> tuple[int, int]:
    try:
        i, n = (int(x) for x in text.split("/"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"shard must look like i/N, got {text!r}") from exc
    if n < 1 or not 0 <= i < n:
        raise argparse.ArgumentTypeError(f"invalid shard {text}")
    return i, n


def _field(q: int):
    try:
        return field_of_order(q)
    except FieldError as exc:
        raise UsageError(str(exc)) from exc


def _checkpoint(args) -> Path | None:
    return Path(args.resume) if args.resume else default_checkpoint_dir()


def _write(out: Path, name: str, text: str, manifest: RunManifest) -> None:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text)
    manifest.record(path)


def _finish(report: VerificationReport, manifest: RunManifest, out: Path | None) -> int:
    print(report.summary())
    if out is not None:
        _write(out, "report.json", report.to_json() + "\n", manifest)
        manifest.finished = time.time()
        (out / "manifest.json").write_text(manifest.to_json() + "\n")
    return EXIT_FAIL if report.verdict == "fail" else EXIT_OK


# -- commands ---------------------------------------------------------------------


def cmd_field_check(args) -> int:
    status = EXIT_OK
    for q in args.q:
        F = _field(q)
        t0 = time.perf_counter()
        results = check_axioms(F)
        bad = sum(v for _, v in results.values())
        print(f"{F.header()} generator={F.generator}: {'pass' if not bad else 'FAIL'} ({time.perf_counter() - t0:.2f}s)")
        for law, (n, v) in results.items():
            print(f"  {law}: {n} cases, {v} violations")
        if bad:
            status = EXIT_FAIL
    return status


def cmd_verify_ternary(args) -> int:
    F = _field(args.q)
    if F.q < 5:
        raise UsageError("the ternary claims are stated for q >= 5")
    shapes = [args.shape] if args.shape else ["t1", "t2"]
    checkpoint = _checkpoint(args)
    out = Path(args.out) if args.out else None
    manifest = RunManifest(
        "verify-ternary", vars_of(args), F.header(),
        f"{args.shard[0]}/{args.shard[1]}" if args.shard else f"all/{args.shards}",
        str(checkpoint) if checkpoint else None, time.time(),
    )
    t0 = time.perf_counter()
    if args.shard:
        i, n = args.shard
        dbs = {
            t.shape: run_template(F, t, "orbit", n, checkpoint, 1, only=[i])
            for t in lemma8_templates()
            if t.shape in shapes
        }
        report = lemma8_report(F, dbs, n, time.perf_counter() - t0, fragment=True)
        suffix = f"-shard-{i:05d}-of-{n:05d}"
    else:
        report, dbs = verify_lemma8(F, args.shards, checkpoint, args.jobs, shapes)
        suffix = ""
    if out is not None:
        for name, db in dbs.items():
            _write(out, f"q{F.q}-{name}{suffix}.db", db.dumps(), manifest)
    return _finish(report, manifest, out)


def cmd_verify_quaternary(args) -> int:
    F = _field(args.q)
    if not 5 <= F.q <= 16:
        raise UsageError("the quaternary stage is run for 5 <= q <= 16")
    g = int(args.shape[1:])
    stop_after = args.stop_after
    if stop_after is not None and stop_after <= 0:
        stop_after = None
    elif stop_after is None:
        from .claims import quaternary_expectation

        # where survivors are expected or possible, stop at the first one
        if quaternary_expectation(F.q, args.shape).kind != "no_survivors":
            stop_after = 1
    checkpoint = _checkpoint(args)
    out = Path(args.out) if args.out else None
    if args.shard:
        i, n = args.shard
        ids = [i]
    else:
        n = args.shards
        ids = list(range(n))
    manifest = RunManifest(
        "verify-quaternary", vars_of(args), F.header(),
        f"{args.shard[0]}/{n}" if args.shard else f"all/{n}",
        str(checkpoint) if checkpoint else None, time.time(),
    )
    reports = run_quaternary(F, g, n, ids, checkpoint, stop_after=stop_after)
    report = reports[0] if args.shard else merge_quaternary_reports(reports)
    return _finish(report, manifest, out)


def sharp_example_form(overrides: Sequence[str] = ()) -> Form:
    coeffs = dict(SHARP_EXAMPLE)
    for item in overrides:
        lhs, sep, rhs = item.partition("=")
        try:
            e = tuple(int(x) for x in lhs.split(","))
            coeffs[e] = int(rhs)
        except ValueError as exc:
            raise UsageError(f"bad override {item!r}, expected e1,e2,e3=c") from exc
        if not sep or len(e) != 3:
            raise UsageError(f"bad override {item!r}, expected e1,e2,e3=c")
    try:
        return Form.from_dict(field_of_order(SHARP_EXAMPLE_Q), 3, 5, coeffs)
    except FormError as exc:
        raise UsageError(str(exc)) from exc


def cmd_check_paper_example(args) -> int:
    f = sharp_example_form(args.set or ())
    census = count_projective_zeros(f, collect_witnesses=True)
    print(format_form(f), end="")
    print(f"zeros={census.total} singular={census.singular} nonsingular={census.nonsingular}")
    for w in census.witnesses:
        print("  " + " ".join(str(x) for x in w))
    ok = (census.total, census.singular, census.nonsingular) == (4, 4, 0) and set(census.witnesses) == set(
        SHARP_EXAMPLE_ZEROS
    )
    print("pass" if ok else "FAIL: expected exactly 4 zeros, all singular, at " + str(SHARP_EXAMPLE_ZEROS))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_count_zeros(args) -> int:
    f = _read_form(args.form)
    census = count_projective_zeros(f, collect_witnesses=args.witnesses)
    print(f"{f.field.header()} n={f.n} d={f.d}")
    print(f"zeros={census.total} singular={census.singular} nonsingular={census.nonsingular}")
    if census.witnesses:
        for w in census.witnesses:
            print("  " + " ".join(str(x) for x in w))
    return EXIT_OK


def cmd_lift(args) -> int:
    try:
        F = parse_integer_form(Path(args.form).read_text())
        x0 = tuple(int(v) for v in args.point.split(","))
        res = hensel_lift(F, args.p, x0, args.prec)
    except (OSError, FormError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    mod = res.p**res.k
    print("x = (" + ", ".join(str(v) for v in res.coords) + ")")
    print(f"Newton coordinate x{res.coordinate + 1}; defect valuations per step: {list(res.defects)}")
    ok = F(res.coords) % mod == 0 and all((a - b) % res.p == 0 for a, b in zip(res.coords, x0))
    print(f"{res.p}^{res.k} | F(x): {'yes' if F(res.coords) % mod == 0 else 'NO'}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_merge(args) -> int:
    paths = [Path(p) for p in args.files]
    try:
        if all(p.suffix == ".json" for p in paths):
            report = merge_quaternary_reports([VerificationReport.from_json(p.read_text()) for p in paths])
            Path(args.out).write_text(report.to_json() + "\n")
            print(report.summary())
            return EXIT_FAIL if report.verdict == "fail" else EXIT_OK
        merged = merge([SurvivorDB.load(p) for p in paths])
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(str(exc)) from exc
    merged.save(Path(args.out))
    state = "complete" if merged.complete else f"partial ({len(merged.shard_ids)}/{merged.shard_total} shards)"
    print(f"{args.out}: {len(merged)} survivors, {state}")
    return EXIT_OK


def _read_form(path: str) -> Form:
    try:
        return parse_form(Path(path).read_text())
    except (OSError, FormError, FieldError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def vars_of(args) -> dict[str, Any]:
    return {k: v for k, v in vars(args).items() if k != "func"}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qvf", description="Non-singular zeros of quintic forms over finite fields.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("field-check", help="exhaustive field-axiom checks")
    p.add_argument("--q", type=int, nargs="+", required=True)
    p.set_defaults(func=cmd_field_check)

    def run_flags(p):
        p.add_argument("--q", type=int, required=True)
        p.add_argument("--shard", type=parse_shard, help="run only shard i of N, e.g. 3/8")
        p.add_argument("--shards", type=int, default=1, help="shard count when running every shard")
        p.add_argument("--out", help="output directory for databases, report.json and manifest.json")
        p.add_argument("--resume", help="checkpoint directory (default: $QVF_CHECKPOINT_DIR)")
        return p

    p = run_flags(sub.add_parser("verify-ternary", help="survivors of the ternary shapes"))
    p.add_argument("--shape", choices=["t1", "t2"])
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_verify_ternary)

    p = run_flags(sub.add_parser("verify-quaternary", help="join and d-sweep for one g-shape"))
    p.add_argument("--shape", choices=["g1", "g2", "g3", "g4"], required=True)
    p.add_argument(
        "--stop-after", type=int,
        help="stop after this many survivors (0: exhaustive; default 1 unless no survivors are claimed)",
    )
    p.set_defaults(func=cmd_verify_quaternary)

    p = sub.add_parser("check-paper-example", help="census of the sharp example over F_7")
    p.add_argument("--set", action="append", metavar="E1,E2,E3=C", help="override one coefficient")
    p.set_defaults(func=cmd_check_paper_example)

    p = sub.add_parser("count-zeros", help="zero census of a form file")
    p.add_argument("--form", required=True)
    p.add_argument("--witnesses", action="store_true")
    p.set_defaults(func=cmd_count_zeros)

    p = sub.add_parser("lift", help="Hensel-lift a non-singular zero mod p")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--form", required=True, help="integer form file")
    p.add_argument("--point", required=True, help="comma separated coordinates mod p")
    p.add_argument("--prec", type=int, required=True)
    p.set_defaults(func=cmd_lift)

    p = sub.add_parser("merge", help="merge shard databases (or quaternary shard reports)")
    p.add_argument("--out", required=True)
    p.add_argument("files", nargs="+")
    p.set_defaults(func=cmd_merge)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (UsageError, SearchError, LiftError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
