"""Loading and summarising one-sentence-per-line documents."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Optional

from .beads import Ladder, LadderInvalid, one_to_one_pct, validate_ladder
from .errors import InputError, ValidationFailure

log = logging.getLogger(__name__)

TOKENIZER = "unicode-whitespace"


class NotUtf8(InputError):
    pass


class BlankLine(ValidationFailure):
    def __init__(self, line_no: int, path: str = ""):
        where = f"{path}:" if path else "line "
        super().__init__(f"{where}{line_no}: blank line (use allow_blank to skip blank lines)")
        self.line_no = line_no


class EmptyDocument(ValidationFailure):
    pass


@dataclass(frozen=True)
class Sentence:
    index: int
    text: str

    def __post_init__(self):
        if self.index < 0:
            raise ValueError("sentence index must be non-negative")
        if not self.text or self.text != self.text.strip():
            raise ValueError(f"sentence {self.index}: text must be non-empty and trimmed")
        if "\n" in self.text or "\r" in self.text:
            raise ValueError(f"sentence {self.index}: text contains a line break")


@dataclass(frozen=True)
class Document:
    doc_id: str
    language: str
    sentences: tuple[Sentence, ...]

    def __post_init__(self):
        object.__setattr__(self, "sentences", tuple(self.sentences))
        if not self.sentences:
            raise EmptyDocument(f"document {self.doc_id!r} has no sentences")
        for expected, s in enumerate(self.sentences):
            if s.index != expected:
                raise ValueError(f"document {self.doc_id!r}: index {s.index} at position {expected}")

    @classmethod
    def from_texts(cls, texts, doc_id: str = "", language: str = "") -> "Document":
        return cls(doc_id, language, tuple(Sentence(i, t) for i, t in enumerate(texts)))

    def __len__(self) -> int:
        return len(self.sentences)

    @property
    def texts(self) -> list[str]:
        return [s.text for s in self.sentences]


@dataclass(frozen=True)
class CorpusStats:
    src_sentences: int
    tgt_sentences: int
    src_tokens: int
    tgt_tokens: int
    sent_ratio_pct: float
    one_to_one_pct: Optional[float] = None
    tokenizer: str = TOKENIZER

    def to_dict(self) -> dict:
        d = {
            "src_sentences": self.src_sentences,
            "tgt_sentences": self.tgt_sentences,
            "src_tokens": self.src_tokens,
            "tgt_tokens": self.tgt_tokens,
            "sent_ratio_pct": self.sent_ratio_pct,
            "tokenizer": self.tokenizer,
        }
        if self.one_to_one_pct is not None:
            d["one_to_one_pct"] = self.one_to_one_pct
        return d


def round_half_up(x: float, places: int) -> float:
    q = Decimal(1).scaleb(-places)
    return float(Decimal(repr(x)).quantize(q, rounding=ROUND_HALF_UP))


def parse_document(text: str, doc_id: str = "", language: str = "",
                   allow_blank: bool = False) -> Document:
    if text.startswith("\ufeff"):
        text = text[1:]
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    sentences = []
    for line_no, line in enumerate(lines, start=1):
        line = line.removesuffix("\r")
        if "\r" in line:
            raise InputError(f"{doc_id}:{line_no}: stray carriage return inside line")
        stripped = line.strip()
        if not stripped:
            if not allow_blank:
                raise BlankLine(line_no, doc_id)
            log.warning("%s:%d: skipping blank line", doc_id, line_no)
            continue
        sentences.append(Sentence(len(sentences), stripped))
    if not sentences:
        raise EmptyDocument(f"document {doc_id!r} has no sentences")
    return Document(doc_id, language, tuple(sentences))


def load_document(path, allow_blank: bool = False, language: str = "") -> Document:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror or e}") from e
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise NotUtf8(f"{path}: not valid UTF-8 at byte {e.start}") from e
    return parse_document(text, doc_id=str(path), language=language, allow_blank=allow_blank)


def render_indexed(doc: Document) -> list[str]:
    return [f"{s.index}\t{s.text}" for s in doc.sentences]


def count_tokens(doc: Document) -> int:
    return sum(len(s.text.split()) for s in doc.sentences)


def corpus_stats(src: Document, tgt: Document, gold: Optional[Ladder] = None) -> CorpusStats:
    pct = None
    if gold is not None:
        report = validate_ladder(gold, len(src), len(tgt))
        if not report.is_gold_valid:
            raise LadderInvalid(report)
        pct = one_to_one_pct(gold)
    return CorpusStats(
        src_sentences=len(src),
        tgt_sentences=len(tgt),
        src_tokens=count_tokens(src),
        tgt_tokens=count_tokens(tgt),
        sent_ratio_pct=round_half_up(100.0 * len(src) / len(tgt), 2),
        one_to_one_pct=pct,
    )
