"""Strict precision / recall / F1 over beads, with micro-averaged totals.

A hypothesis bead only counts as correct when both of its index sets equal
those of a reference bead. Partial overlap earns nothing.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence

from .beads import Ladder, parse_ladder, validate_ladder
from .corpus import round_half_up
from .errors import BitextError, InputError, ValidationFailure

LADDER_SUFFIX = ".ladder"


class ShapeMismatch(ValidationFailure):
    pass


class EmptyInput(BitextError):
    pass


class MissingPair(BitextError):
    def __init__(self, pair_id: str, method: str):
        super().__init__(f"method {method!r} has no ladder for pair {pair_id!r}")
        self.pair_id = pair_id
        self.method = method


@dataclass(frozen=True)
class StrictCounts:
    tp: int
    hyp: int
    ref: int

    def __post_init__(self):
        if not 0 <= self.tp <= min(self.hyp, self.ref):
            raise ValueError(f"inconsistent counts {self}")

    def __add__(self, other: "StrictCounts") -> "StrictCounts":
        return StrictCounts(self.tp + other.tp, self.hyp + other.hyp, self.ref + other.ref)


@dataclass(frozen=True)
class Metrics:
    precision: float
    recall: float
    f1: float

    def fmt(self) -> str:
        return f"P {fmt3(self.precision)} R {fmt3(self.recall)} F1 {fmt3(self.f1)}"


@dataclass(frozen=True)
class EvalReport:
    method_name: str
    per_doc: Mapping[str, tuple[StrictCounts, Metrics]]
    overall: Metrics

    def to_dict(self) -> dict:
        return {
            "method": self.method_name,
            "per_doc": {
                pid: {"tp": c.tp, "hyp": c.hyp, "ref": c.ref,
                      "p": m.precision, "r": m.recall, "f1": m.f1}
                for pid, (c, m) in sorted(self.per_doc.items())
            },
            "overall": {"p": self.overall.precision, "r": self.overall.recall,
                        "f1": self.overall.f1},
        }


def fmt3(x: float) -> str:
    return f"{round_half_up(x, 3):.3f}"


def strict_compare(hyp: Ladder, ref: Ladder, include_null: bool = False,
                   src_len: Optional[int] = None, tgt_len: Optional[int] = None) -> StrictCounts:
    """Count exact bead matches.

    When ``src_len``/``tgt_len`` are given, both ladders must stay inside
    those bounds, otherwise :class:`ShapeMismatch` is raised.
    """
    if src_len is not None and tgt_len is not None:
        for name, ladder in (("hypothesis", hyp), ("reference", ref)):
            report = validate_ladder(ladder, src_len, tgt_len)
            if report.out_of_range:
                pos, side, idx = report.out_of_range[0]
                raise ShapeMismatch(
                    f"{name} ladder references {side} index {idx} but the pair has "
                    f"{src_len} source / {tgt_len} target sentences")

    def keep(beads):
        return {b for b in beads if include_null or not b.is_null}

    h, r = keep(hyp.beads), keep(ref.beads)
    return StrictCounts(len(h & r), len(h), len(r))


def prf(counts: StrictCounts) -> Metrics:
    p = counts.tp / counts.hyp if counts.hyp else 0.0
    r = counts.tp / counts.ref if counts.ref else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return Metrics(p, r, f)


def micro_average(per_doc: Sequence[StrictCounts]) -> Metrics:
    if not per_doc:
        raise EmptyInput("micro_average needs at least one document")
    total = StrictCounts(0, 0, 0)
    for c in per_doc:
        total = total + c
    return prf(total)


def evaluate(method: str, gold: Mapping[str, Ladder], hyp: Mapping[str, Ladder],
             include_null: bool = False) -> EvalReport:
    per_doc = {}
    for pair_id in sorted(gold):
        if pair_id not in hyp:
            raise MissingPair(pair_id, method)
        counts = strict_compare(hyp[pair_id], gold[pair_id], include_null)
        per_doc[pair_id] = (counts, prf(counts))
    return EvalReport(method, per_doc, micro_average([c for c, _ in per_doc.values()]))


def load_ladder_dir(path) -> dict[str, Ladder]:
    path = Path(path)
    if not path.is_dir():
        raise InputError(f"not a directory: {path}")
    out = {}
    for f in sorted(path.glob(f"*{LADDER_SUFFIX}")):
        try:
            text = f.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as e:
            raise InputError(f"cannot read {f}: {e}") from e
        out[f.stem] = parse_ladder(text, pair_id=f.stem)
    if not out:
        raise InputError(f"no *{LADDER_SUFFIX} files in {path}")
    return out


def _table(reports: Sequence[EvalReport]) -> str:
    methods = [r.method_name for r in reports]
    rows = []
    pair_ids = sorted(reports[0].per_doc)
    for pid in pair_ids + ["Overall"]:
        for label, attr in (("P", "precision"), ("R", "recall"), ("F1", "f1")):
            vals = []
            for r in reports:
                m = r.overall if pid == "Overall" else r.per_doc[pid][1]
                vals.append(fmt3(getattr(m, attr)))
            best = max(vals, key=float)
            cells = [f"**{v}**" if v == best else v for v in vals]
            rows.append([pid if label == "P" else "", label] + cells)
    header = ["Dataset", "Metric"] + methods
    widths = [max(len(str(row[k])) for row in rows + [header]) for k in range(len(header))]

    def line(row):
        return "  ".join(str(c).ljust(w) for c, w in zip(row, widths)).rstrip()

    out = [line(header), line(["-" * w for w in widths])]
    for k, row in enumerate(rows):
        if row[0] == "Overall":
            out.append(line(["-" * w for w in widths]))
        out.append(line(row))
    return "\n".join(out) + "\n"


def compare_report(gold_dir, hyp_dirs: Mapping[str, object],
                   include_null: bool = False) -> tuple[str, dict]:
    """Evaluate several methods against one gold set.

    ``hyp_dirs`` maps a method name to a directory of ``<pair_id>.ladder``
    files. Returns the text table (row maxima in ``**bold**``) and a JSON-able
    dict with raw counts and full-precision metrics.
    """
    gold = load_ladder_dir(gold_dir)
    reports = []
    for method, d in hyp_dirs.items():
        hyp = load_ladder_dir(d)
        reports.append(evaluate(method, gold, hyp, include_null))
    if not reports:
        raise EmptyInput("no hypothesis sets given")
    return _table(reports), {"methods": [r.to_dict() for r in reports]}
