"""Command-line entry point: ``bitext-align {align,eval,stats,compare,validate}``.

Exit codes: 0 success, 1 pipeline error, 2 I/O or usage error,
3 validation or shape error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .baseline import estimate_ratio, gale_church_align
from .beads import Ladder, LadderSyntaxError, parse_ladder, render_ladder, validate_ladder
from .config import AppConfig, resolve_config
from .corpus import corpus_stats, load_document
from .errors import BitextError, InputError
from .evaluate import EvalReport, compare_report, evaluate, fmt3, micro_average, prf, strict_compare
from .fsutil import write_atomic
from .llm_align import align_document, load_template

log = logging.getLogger("bitext_align")

EXIT_OK, EXIT_ERROR, EXIT_IO, EXIT_INVALID = 0, 1, 2, 3


@dataclass(frozen=True)
class PairJob:
    pair_id: str
    src: Path
    tgt: Path
    out: Path
    gold: Optional[Path] = None


def _read_ladder(path, pair_id: str = "") -> Ladder:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise InputError(f"cannot read ladder {path}: {e}") from e
    try:
        return parse_ladder(text, pair_id=pair_id or Path(path).stem)
    except LadderSyntaxError as e:
        raise InputError(f"{path}: {e}") from e


def _config_from_args(args) -> AppConfig:
    flags = {
        "llm": {
            "backend": getattr(args, "backend", None),
            "endpoint_url": getattr(args, "endpoint", None),
            "model_name": getattr(args, "model", None),
            "api_key_env": getattr(args, "api_key_env", None),
            "temperature": getattr(args, "temperature", None),
            "max_retries": getattr(args, "max_retries", None),
            "timeout": getattr(args, "timeout", None),
            "replay_dir": getattr(args, "replay_dir", None),
            "record": getattr(args, "record", None),
            "mock_dir": getattr(args, "mock_dir", None),
        },
        "baseline": {
            "c": getattr(args, "c", None),
            "s2": getattr(args, "s2", None),
            "estimate_ratio": getattr(args, "estimate_ratio", None),
        },
        "eval": {"include_null": getattr(args, "include_null", None)},
        "io": {"allow_blank": getattr(args, "allow_blank", None)},
        "run": {
            "max_concurrency": getattr(args, "max_concurrency", None),
            "policy": getattr(args, "policy", None),
            "chunk_size_src": getattr(args, "chunk_size", None),
            "tgt_margin": getattr(args, "tgt_margin", None),
            "template": getattr(args, "template", None),
        },
    }
    return resolve_config(args.config, flags)


def _align_pair(job: PairJob, method: str, cfg: AppConfig, template, concurrency: int):
    src = load_document(job.src, allow_blank=cfg.allow_blank, language="src")
    tgt = load_document(job.tgt, allow_blank=cfg.allow_blank, language="tgt")
    if method == "gale-church":
        params = cfg.baseline.with_ratio(estimate_ratio(src, tgt)) if cfg.estimate_ratio else cfg.baseline
        ladder = gale_church_align(src, tgt, params, pair_id=job.pair_id)
        report = validate_ladder(ladder, len(src), len(tgt))
    else:
        ladder, report = align_document(src, tgt, template, cfg.llm, cfg.run.policy,
                                        cfg.run.chunking, pair_id=job.pair_id,
                                        max_concurrency=concurrency)
    write_atomic(job.out, render_ladder(ladder))
    return ladder, report


def _align_summary(report) -> str:
    # the written ladder is always gold-valid; the counts describe what the model sent back
    line = f"monotonicity_violations={report.monotonicity_violations}"
    if report.repairs:
        line += (f"; applied {len(report.repairs)} repair(s) to the model response"
                 f" (out_of_range={len(report.out_of_range)}"
                 f" duplicate_coverage={len(report.duplicate_coverage)})")
    return line


def _load_manifest(path: Path) -> list[PairJob]:
    try:
        entries = json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise InputError(f"cannot read manifest {path}: {e.strerror or e}") from e
    except ValueError as e:
        raise InputError(f"manifest {path} is not valid JSON: {e}") from e
    if not isinstance(entries, list):
        raise InputError(f"manifest {path} must be a JSON list")
    base = path.parent
    jobs = []
    for k, e in enumerate(entries):
        try:
            jobs.append(PairJob(
                pair_id=e["pair_id"], src=base / e["src"], tgt=base / e["tgt"], out=base / e["out"],
                gold=base / e["gold"] if e.get("gold") else None,
            ))
        except (KeyError, TypeError) as err:
            raise InputError(f"manifest {path}: entry {k} needs pair_id, src, tgt, out") from err
    return jobs


def cmd_align(args) -> int:
    cfg = _config_from_args(args)
    template = load_template(cfg.run.template) if args.method == "llm" else None
    if args.batch:
        jobs = _load_manifest(Path(args.batch))
    else:
        if not (args.src and args.tgt and args.out):
            raise InputError("align needs SRC TGT -o OUT, or --batch MANIFEST")
        pair_id = args.pair_id or Path(args.src).stem
        jobs = [PairJob(pair_id, Path(args.src), Path(args.tgt), Path(args.out))]

    # pairs run concurrently in batch mode; chunks of one pair then run serially
    per_pair = 1 if len(jobs) > 1 else cfg.run.max_concurrency
    workers = max(1, min(cfg.run.max_concurrency, len(jobs)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_align_pair, j, args.method, cfg, template, per_pair) for j in jobs]
        results = [f.result() for f in futures]

    counts = []
    for job, (ladder, report) in zip(jobs, results):
        print(f"{job.pair_id}: {len(ladder)} beads -> {job.out}; {_align_summary(report)}")
        if job.gold is not None:
            c = strict_compare(ladder, _read_ladder(job.gold, job.pair_id), cfg.include_null)
            counts.append(c)
            print(f"{job.pair_id}: {prf(c).fmt()}")
    if counts:
        print(f"overall (micro): {micro_average(counts).fmt()}")
    return EXIT_OK


def _doc_len(args, which: str) -> Optional[int]:
    n = getattr(args, f"{which}_len")
    path = getattr(args, which)
    if n is None and path is not None:
        n = len(load_document(path, allow_blank=args.allow_blank or False))
    return n


def cmd_eval(args) -> int:
    cfg = _config_from_args(args)
    pair_id = args.pair_id or Path(args.gold).stem
    gold = _read_ladder(args.gold, pair_id)
    hyp = _read_ladder(args.hyp, pair_id)
    counts = strict_compare(hyp, gold, cfg.include_null, _doc_len(args, "src"), _doc_len(args, "tgt"))
    metrics = prf(counts)
    if args.json:
        report = EvalReport(args.method_name, {pair_id: (counts, metrics)}, micro_average([counts]))
        print(json.dumps(report.to_dict(), indent=2))
    else:
        print(metrics.fmt())
    return EXIT_OK


def cmd_stats(args) -> int:
    cfg = _config_from_args(args)
    src = load_document(args.src, allow_blank=cfg.allow_blank)
    tgt = load_document(args.tgt, allow_blank=cfg.allow_blank)
    gold = _read_ladder(args.gold) if args.gold else None
    stats = corpus_stats(src, tgt, gold)
    if args.json:
        print(json.dumps(stats.to_dict(), indent=2))
        return EXIT_OK
    rows = [
        ("#SRC-SENT", str(stats.src_sentences)),
        ("#SRC-TKN", str(stats.src_tokens)),
        ("#TGT-SENT", str(stats.tgt_sentences)),
        ("#TGT-TKN", str(stats.tgt_tokens)),
        ("SENT%", f"{stats.sent_ratio_pct:.2f}"),
    ]
    if stats.one_to_one_pct is not None:
        rows.append(("1-1", f"{stats.one_to_one_pct:.2f}"))
    for label, value in rows:
        print(f"{label:<10} {value}")
    print(f"(tokens: {stats.tokenizer} split)")
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = _config_from_args(args)
    hyp_dirs = {}
    for spec in args.hyp:
        name, sep, d = spec.partition("=")
        if not sep or not name or not d:
            raise InputError(f"expected NAME=DIR, got {spec!r}")
        hyp_dirs[name] = d
    table, report = compare_report(args.gold_dir, hyp_dirs, cfg.include_null)
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        print(table, end="")
    return EXIT_OK


def cmd_validate(args) -> int:
    ladder = _read_ladder(args.ladder)
    report = validate_ladder(ladder, args.src_len, args.tgt_len)
    if args.json:
        print(json.dumps(report.to_dict(), indent=2))
    else:
        print(report.summary())
        for pos, side, i in report.out_of_range:
            print(f"  out of range: bead {pos} {side} index {i}")
        for side, i, positions in report.duplicate_coverage:
            print(f"  duplicate coverage: {side} index {i} in beads {list(positions)}")
    return EXIT_OK if report.is_gold_valid else EXIT_INVALID


def _true_or_none(p, *names, help):
    p.add_argument(*names, action="store_const", const=True, default=None, help=help)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bitext-align", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file")
        _true_or_none(p, "--allow-blank", help="skip blank lines instead of failing")

    p = sub.add_parser("align", help="align one document pair or a batch")
    common(p)
    p.add_argument("src", nargs="?")
    p.add_argument("tgt", nargs="?")
    p.add_argument("-o", "--out")
    p.add_argument("--method", choices=["llm", "gale-church"], default="llm")
    p.add_argument("--pair-id")
    p.add_argument("--batch", help="manifest: JSON list of {pair_id, src, tgt, out, gold?}")
    p.add_argument("--backend", choices=["http_chat", "replay", "mock"])
    p.add_argument("--endpoint")
    p.add_argument("--model")
    p.add_argument("--api-key-env")
    p.add_argument("--temperature", type=float)
    p.add_argument("--max-retries", type=int)
    p.add_argument("--timeout", type=float)
    p.add_argument("--replay-dir")
    _true_or_none(p, "--record", help="write http_chat responses into --replay-dir")
    p.add_argument("--mock-dir")
    p.add_argument("--policy", choices=["strict", "repair"])
    p.add_argument("--chunk-size", type=int, help="source sentences per prompt (0 = whole document)")
    p.add_argument("--tgt-margin", type=int)
    p.add_argument("--template", help="prompt template JSON file")
    p.add_argument("--max-concurrency", type=int)
    p.add_argument("--c", type=float, help="target/source character ratio")
    p.add_argument("--s2", type=float, help="length variance per source character")
    _true_or_none(p, "--estimate-ratio", help="set c from the pair's character totals")
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("eval", help="strict P/R/F1 of one hypothesis ladder")
    common(p)
    p.add_argument("gold")
    p.add_argument("hyp")
    p.add_argument("--src", help="source document (for shape checking)")
    p.add_argument("--tgt", help="target document (for shape checking)")
    p.add_argument("--src-len", type=int)
    p.add_argument("--tgt-len", type=int)
    p.add_argument("--pair-id")
    p.add_argument("--method-name", default="hyp")
    _true_or_none(p, "--include-null", help="count beads with an empty side")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("stats", help="sentence/token counts and ratios")
    common(p)
    p.add_argument("src")
    p.add_argument("tgt")
    p.add_argument("--gold")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("compare", help="comparison table across methods")
    common(p)
    p.add_argument("gold_dir")
    p.add_argument("hyp", nargs="+", metavar="NAME=DIR")
    _true_or_none(p, "--include-null", help="count beads with an empty side")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("validate", help="check a ladder against document lengths")
    p.add_argument("ladder")
    p.add_argument("src_len", type=int)
    p.add_argument("tgt_len", type=int)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_validate, config=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except BitextError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
