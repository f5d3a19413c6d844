"""Turning raw model text into a validated ladder.

Expected response shape::

    {"alignments": [{"src": [0], "tgt": [0]}, {"src": [1], "tgt": [1, 2]}]}

Only indices are read from the response. Any text the model echoes back is ignored.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from ..beads import Bead, Ladder, ValidationReport, count_monotonicity_violations
from ..errors import BitextError, ValidationFailure

REPAIR_MODES = ("strict", "repair")

_FENCE_RE = re.compile(r"```[A-Za-z0-9_+-]*[ \t]*\n?(.*?)```", re.DOTALL)
_TRAILING_COMMA_RE = re.compile(r",\s*([}\]])")
_decoder = json.JSONDecoder()


class JsonNotFound(BitextError):
    pass


class SchemaInvalid(BitextError):
    def __init__(self, detail: str):
        super().__init__(f"response does not match the mapping schema: {detail}")
        self.detail = detail


class IndexOutOfRange(ValidationFailure):
    pass


class DuplicateCoverage(ValidationFailure):
    pass


class EmptyRecord(ValidationFailure):
    pass


class EmptyResult(BitextError):
    pass


@dataclass(frozen=True)
class MappingRecord:
    src: tuple[int, ...]
    tgt: tuple[int, ...]


@dataclass(frozen=True)
class MappingResponse:
    alignments: tuple[MappingRecord, ...]

    @classmethod
    def from_ladder(cls, ladder: Ladder) -> "MappingResponse":
        return cls(tuple(MappingRecord(b.src, b.tgt) for b in ladder.beads))


@dataclass(frozen=True)
class RepairPolicy:
    mode: str = "repair"

    def __post_init__(self):
        if self.mode not in REPAIR_MODES:
            raise ValueError(f"unknown repair mode {self.mode!r}")


def _json_values(text: str):
    """Yield every top-level JSON object/array found in ``text``, left to right."""
    pos = 0
    while True:
        starts = [i for i in (text.find("{", pos), text.find("[", pos)) if i != -1]
        if not starts:
            return
        start = min(starts)
        try:
            value, end = _decoder.raw_decode(text, start)
        except json.JSONDecodeError as e:
            if e.pos >= len(text.rstrip()):
                # ran off the end: a truncated value, anything later is nested inside it
                return
            pos = start + 1
            continue
        yield value
        pos = end


def _locate(raw: str):
    candidates = [m.group(1) for m in _FENCE_RE.finditer(raw)] + [raw]
    found = []
    for cand in candidates:
        for text in (cand, _TRAILING_COMMA_RE.sub(r"\1", cand)):
            for value in _json_values(text):
                if isinstance(value, dict) and "alignments" in value:
                    return value
                found.append(value)
    if found:
        return found[0]
    raise JsonNotFound("no complete JSON object or array in the response")


def _index_list(rec: dict, key: str, pos: int) -> tuple[int, ...]:
    if key not in rec:
        raise SchemaInvalid(f"alignments[{pos}] has no {key!r}")
    value = rec[key]
    if not isinstance(value, list):
        raise SchemaInvalid(f"alignments[{pos}].{key} must be a list of integers, got {type(value).__name__}")
    for x in value:
        if isinstance(x, bool) or not isinstance(x, int):
            raise SchemaInvalid(f"alignments[{pos}].{key} contains non-integer {x!r}")
    return tuple(value)


def extract_json(raw: str) -> MappingResponse:
    value = _locate(raw)
    if isinstance(value, list):
        records = value
    elif isinstance(value, dict):
        if "alignments" not in value:
            raise SchemaInvalid("top-level object has no 'alignments' key")
        records = value["alignments"]
        if not isinstance(records, list):
            raise SchemaInvalid("'alignments' must be a list")
    else:
        raise SchemaInvalid(f"unexpected top-level {type(value).__name__}")
    out = []
    for pos, rec in enumerate(records):
        if not isinstance(rec, dict):
            raise SchemaInvalid(f"alignments[{pos}] is not an object")
        out.append(MappingRecord(_index_list(rec, "src", pos), _index_list(rec, "tgt", pos)))
    return MappingResponse(tuple(out))


@dataclass(frozen=True)
class _Rec:
    position: int
    label: str
    src: tuple[int, ...]
    tgt: tuple[int, ...]
    src_window: range
    tgt_window: range
    chunk: Optional[int] = None


def resolve_records(records: Iterable[_Rec], policy: RepairPolicy,
                    pair_id: str = "") -> tuple[Ladder, ValidationReport]:
    """Apply the strict or repair rules to records in order (earlier records win)."""
    strict = policy.mode == "strict"
    owner: dict[tuple[str, int], int] = {}
    out_of_range, duplicates, repairs = [], [], []
    beads = []

    for rec in records:
        try:
            bead = _resolve_one(rec, strict, owner, out_of_range, duplicates, repairs)
        except ValidationFailure as e:
            e.chunk_id = rec.chunk
            raise
        if bead is not None:
            beads.append(bead)

    if not beads:
        raise EmptyResult("no valid alignment survived")
    ladder = Ladder(pair_id, tuple(beads))
    report = ValidationReport(
        out_of_range=tuple(out_of_range),
        duplicate_coverage=tuple(duplicates),
        monotonicity_violations=count_monotonicity_violations(ladder.beads),
        repairs=tuple(repairs),
    )
    return ladder, report


def _resolve_one(rec: _Rec, strict: bool, owner: dict, out_of_range: list,
                 duplicates: list, repairs: list) -> Optional[Bead]:
    sides = {"src": sorted(set(rec.src)), "tgt": sorted(set(rec.tgt))}
    windows = {"src": rec.src_window, "tgt": rec.tgt_window}
    if not sides["src"] and not sides["tgt"]:
        if strict:
            raise EmptyRecord(f"{rec.label}: both sides empty")
        repairs.append(f"{rec.label}: both sides empty, dropped")
        return None
    originally = {s: bool(v) for s, v in sides.items()}

    for side in ("src", "tgt"):
        kept = []
        for i in sides[side]:
            if i not in windows[side]:
                if strict:
                    raise IndexOutOfRange(f"{rec.label}: {side} index {i} outside "
                                          f"[{windows[side].start}, {windows[side].stop})")
                out_of_range.append((rec.position, side, i))
                repairs.append(f"{rec.label}: dropped out-of-range {side} index {i}")
            elif (side, i) in owner:
                first = owner[(side, i)]
                if strict:
                    raise DuplicateCoverage(f"{rec.label}: {side} index {i} already "
                                            f"covered by record {first}")
                duplicates.append((side, i, (first, rec.position)))
                repairs.append(f"{rec.label}: stripped {side} index {i} "
                               f"(already covered by record {first})")
            else:
                kept.append(i)
        sides[side] = kept

    emptied = [s for s in ("src", "tgt") if originally[s] and not sides[s]]
    if emptied:
        repairs.append(f"{rec.label}: dropped, {'/'.join(emptied)} side emptied by repair")
        return None
    for side in ("src", "tgt"):
        for i in sides[side]:
            owner[(side, i)] = rec.position
    return Bead(tuple(sides["src"]), tuple(sides["tgt"]))


def mappings_to_beads(resp: MappingResponse, src_len: int, tgt_len: int,
                      policy: RepairPolicy = RepairPolicy(), *, pair_id: str = "",
                      src_window: Optional[Sequence[int]] = None,
                      tgt_window: Optional[Sequence[int]] = None) -> tuple[Ladder, ValidationReport]:
    """Convert response records into a canonical ladder.

    The returned report describes what was wrong with the *response*
    (``out_of_range``, ``duplicate_coverage``, one ``repairs`` line per fix).
    The ladder itself is always gold-valid. ``src_window``/``tgt_window``
    narrow the admissible indices, e.g. to one chunk.
    """
    if src_len < 1 or tgt_len < 1:
        raise ValueError("src_len and tgt_len must be >= 1")
    sw = src_window if src_window is not None else range(src_len)
    tw = tgt_window if tgt_window is not None else range(tgt_len)
    recs = (_Rec(k, f"record {k}", r.src, r.tgt, sw, tw) for k, r in enumerate(resp.alignments))
    return resolve_records(recs, policy, pair_id)
