"""Beads, ladders and the ``src:tgt`` ladder file format.

A ladder file holds one bead per line::

    # comment
    0:0
    1:1,2
    :7        <- target sentence 7 is unaligned
    4:        <- source sentence 4 is unaligned

Indices are zero-based line numbers into the one-sentence-per-line documents.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import BitextError, ValidationFailure

log = logging.getLogger(__name__)

_SIDE_RE = re.compile(r"^\s*(\d+(\s*,\s*\d+)*)?\s*$")


class LadderSyntaxError(BitextError):
    def __init__(self, line_no: int, line: str):
        super().__init__(f"line {line_no}: malformed ladder line {line!r}")
        self.line_no = line_no


class BothSidesEmpty(LadderSyntaxError):
    def __init__(self, line_no: int, line: str = ":"):
        BitextError.__init__(self, f"line {line_no}: bead has no source and no target indices")
        self.line_no = line_no


class LadderInvalid(ValidationFailure):
    def __init__(self, report: "ValidationReport"):
        super().__init__(f"ladder is not gold-valid: {report.summary()}")
        self.report = report


@dataclass(frozen=True, order=False)
class Bead:
    """One alignment unit; either side may be empty but not both."""

    src: tuple[int, ...]
    tgt: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "src", tuple(self.src))
        object.__setattr__(self, "tgt", tuple(self.tgt))
        if not self.src and not self.tgt:
            raise ValueError("bead must have at least one index")
        for side in (self.src, self.tgt):
            if any(isinstance(i, bool) or not isinstance(i, int) or i < 0 for i in side):
                raise ValueError(f"bead indices must be non-negative ints: {side!r}")
            if any(a >= b for a, b in zip(side, side[1:])):
                raise ValueError(f"bead side must be strictly ascending: {side!r}")

    @classmethod
    def of(cls, src: Iterable[int], tgt: Iterable[int]) -> "Bead":
        """Build a bead from unsorted, possibly repeated indices."""
        return cls(tuple(sorted(set(src))), tuple(sorted(set(tgt))))

    @property
    def kind(self) -> str:
        return f"{len(self.src)}-{len(self.tgt)}"

    @property
    def is_null(self) -> bool:
        return not self.src or not self.tgt

    def sort_key(self) -> tuple:
        primary = self.src[0] if self.src else self.tgt[0]
        return (primary, 0 if self.src else 1, self.src, self.tgt)

    def render(self) -> str:
        return ",".join(map(str, self.src)) + ":" + ",".join(map(str, self.tgt))

    def __repr__(self) -> str:
        return f"Bead({self.render()})"


@dataclass(frozen=True)
class Ladder:
    """Beads for one document pair, always held in canonical order."""

    pair_id: str
    beads: tuple[Bead, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "beads", tuple(sorted(self.beads, key=Bead.sort_key)))

    def __len__(self) -> int:
        return len(self.beads)

    def __iter__(self):
        return iter(self.beads)


@dataclass(frozen=True)
class ValidationReport:
    """Problems found in a ladder (or in a model response, see ``llm_align``).

    ``repairs`` is only filled by the LLM response repair step; it lists one
    human-readable entry per change made to the response.
    """

    out_of_range: tuple[tuple[int, str, int], ...] = ()
    duplicate_coverage: tuple[tuple[str, int, tuple[int, ...]], ...] = ()
    monotonicity_violations: int = 0
    repairs: tuple[str, ...] = field(default=())

    @property
    def is_gold_valid(self) -> bool:
        return not self.out_of_range and not self.duplicate_coverage

    def summary(self) -> str:
        parts = [
            f"gold_valid={'yes' if self.is_gold_valid else 'no'}",
            f"out_of_range={len(self.out_of_range)}",
            f"duplicate_coverage={len(self.duplicate_coverage)}",
            f"monotonicity_violations={self.monotonicity_violations}",
        ]
        if self.repairs:
            parts.append(f"repairs={len(self.repairs)}")
        return " ".join(parts)

    def to_dict(self) -> dict:
        return {
            "is_gold_valid": self.is_gold_valid,
            "out_of_range": [list(x) for x in self.out_of_range],
            "duplicate_coverage": [[s, i, list(p)] for s, i, p in self.duplicate_coverage],
            "monotonicity_violations": self.monotonicity_violations,
            "repairs": list(self.repairs),
        }


def _parse_side(text: str, line_no: int, line: str) -> tuple[list[int], bool]:
    if not _SIDE_RE.match(text):
        raise LadderSyntaxError(line_no, line)
    if not text.strip():
        return [], False
    raw = [int(tok) for tok in text.split(",")]
    clean = sorted(set(raw))
    return clean, clean != raw


def parse_ladder(text: str, pair_id: str = "") -> Ladder:
    beads = []
    for line_no, line in enumerate(text.split("\n"), start=1):
        line = line.rstrip("\r")
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.count(":") != 1:
            raise LadderSyntaxError(line_no, line)
        left, right = stripped.split(":")
        src, src_fixed = _parse_side(left, line_no, line)
        tgt, tgt_fixed = _parse_side(right, line_no, line)
        if not src and not tgt:
            raise BothSidesEmpty(line_no, line)
        if src_fixed or tgt_fixed:
            log.warning("line %d: indices sorted/deduplicated in %r", line_no, line)
        beads.append(Bead(tuple(src), tuple(tgt)))
    return Ladder(pair_id, tuple(beads))


def render_ladder(ladder: Ladder) -> str:
    return "".join(b.render() + "\n" for b in ladder.beads)


def validate_ladder(ladder: Ladder, src_len: int, tgt_len: int) -> ValidationReport:
    if src_len < 1 or tgt_len < 1:
        raise ValueError("src_len and tgt_len must be >= 1")
    out_of_range = []
    seen: dict[tuple[str, int], list[int]] = {}
    for pos, bead in enumerate(ladder.beads):
        for side, indices, limit in (("src", bead.src, src_len), ("tgt", bead.tgt, tgt_len)):
            for i in indices:
                if i >= limit:
                    out_of_range.append((pos, side, i))
                seen.setdefault((side, i), []).append(pos)
    duplicates = tuple(
        (side, i, tuple(positions))
        for (side, i), positions in sorted(seen.items())
        if len(positions) > 1
    )
    return ValidationReport(
        out_of_range=tuple(out_of_range),
        duplicate_coverage=duplicates,
        monotonicity_violations=count_monotonicity_violations(ladder.beads),
    )


def count_monotonicity_violations(beads: Sequence[Bead]) -> int:
    """Adjacent 2-sided beads (canonical order) whose target spans step backwards.

    Null beads are skipped: their canonical position is keyed on the other side.
    """
    spans = [b.tgt for b in sorted(beads, key=Bead.sort_key) if not b.is_null]
    return sum(1 for prev, cur in zip(spans, spans[1:]) if cur[0] < prev[-1])


def one_to_one_pct(ladder: Ladder) -> float:
    if not ladder.beads:
        return 0.0
    n = sum(1 for b in ladder.beads if len(b.src) == 1 and len(b.tgt) == 1)
    return 100.0 * n / len(ladder.beads)
