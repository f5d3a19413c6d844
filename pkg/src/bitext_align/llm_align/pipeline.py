"""Index, ask the model for a translation mapping, and build the ladder, chunk by chunk."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

from ..beads import Ladder, ValidationReport
from ..corpus import Document, render_indexed
from ..errors import BitextError
from .backends import LlmConfig, request_alignment
from .prompt import PromptTemplate, build_prompt, estimate_tokens, load_template
from .response import MappingResponse, RepairPolicy, _Rec, extract_json, resolve_records

log = logging.getLogger(__name__)


class PromptTooLong(BitextError):
    pass


@dataclass(frozen=True)
class ChunkPlan:
    chunk_size_src: int
    tgt_margin: int
    chunks: tuple[tuple[range, range], ...]


@dataclass(frozen=True)
class Chunking:
    """``chunk_size_src == 0`` means the whole document goes into one prompt."""

    chunk_size_src: int = 0
    tgt_margin: int = 5

    def __post_init__(self):
        if self.chunk_size_src < 0 or self.tgt_margin < 0:
            raise ValueError("chunk_size_src and tgt_margin must be >= 0")


def plan_chunks(src_len: int, tgt_len: int, chunk_size_src: int = 0, tgt_margin: int = 0) -> ChunkPlan:
    if chunk_size_src <= 0 or chunk_size_src >= src_len:
        return ChunkPlan(chunk_size_src, tgt_margin, ((range(src_len), range(tgt_len)),))
    chunks = []
    for lo in range(0, src_len, chunk_size_src):
        hi = min(lo + chunk_size_src, src_len)
        t_lo = max(0, lo * tgt_len // src_len - tgt_margin)
        t_hi = min(tgt_len, -(-hi * tgt_len // src_len) + tgt_margin)
        chunks.append((range(lo, hi), range(t_lo, t_hi)))
    return ChunkPlan(chunk_size_src, tgt_margin, tuple(chunks))


def _tag_chunk(exc: BaseException, chunk_id: int) -> None:
    exc.chunk_id = chunk_id
    if exc.args and isinstance(exc.args[0], str):
        exc.args = (f"chunk {chunk_id}: {exc.args[0]}",) + exc.args[1:]


def align_document(src: Document, tgt: Document, template: Optional[PromptTemplate] = None,
                   config: Optional[LlmConfig] = None, policy: RepairPolicy = RepairPolicy(),
                   chunking: Chunking = Chunking(), *, pair_id: str = "",
                   max_concurrency: int = 4) -> tuple[Ladder, ValidationReport]:
    template = template or load_template()
    config = config or LlmConfig()
    plan = plan_chunks(len(src), len(tgt), chunking.chunk_size_src, chunking.tgt_margin)
    src_lines, tgt_lines = render_indexed(src), render_indexed(tgt)

    def run(chunk_id: int) -> MappingResponse:
        s_range, t_range = plan.chunks[chunk_id]
        # global indices: the model answers in document coordinates
        prompt = build_prompt(src_lines[s_range.start:s_range.stop],
                              tgt_lines[t_range.start:t_range.stop], template)
        budget = config.max_prompt_tokens_estimate
        if budget and estimate_tokens(prompt) > budget:
            raise PromptTooLong(f"prompt needs ~{estimate_tokens(prompt)} tokens, budget is "
                                f"{budget}; use a smaller chunk size")
        chunk_key = chunk_id if len(plan.chunks) > 1 else None
        raw = request_alignment(prompt, config, system_text=template.system_text,
                                pair_id=pair_id, chunk_id=chunk_key)
        return extract_json(raw)

    def guarded(chunk_id: int) -> MappingResponse:
        try:
            return run(chunk_id)
        except BitextError as e:
            _tag_chunk(e, chunk_id)
            raise

    workers = max(1, min(max_concurrency, len(plan.chunks)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        responses = list(pool.map(guarded, range(len(plan.chunks))))

    records = []
    multi = len(plan.chunks) > 1
    for chunk_id, (resp, (s_range, t_range)) in enumerate(zip(responses, plan.chunks)):
        for k, r in enumerate(resp.alignments):
            label = f"chunk {chunk_id} record {k}" if multi else f"record {k}"
            records.append(_Rec(len(records), label, r.src, r.tgt, s_range, t_range, chunk_id))
    ladder, report = resolve_records(records, policy, pair_id)
    for line in report.repairs:
        log.info("%s: %s", pair_id or "pair", line)
    return ladder, report
