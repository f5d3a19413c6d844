"""Generative alignment: indexed lines -> model translation mapping -> ladder."""

from .backends import (
    LlmConfig,
    MissingApiKey,
    MockMiss,
    ReplayMiss,
    TransportError,
    TransportExhausted,
    prompt_hash,
    request_alignment,
)
from .pipeline import Chunking, ChunkPlan, PromptTooLong, align_document, plan_chunks
from .prompt import PlaceholderMissing, PromptTemplate, build_prompt, load_template
from .response import (
    DuplicateCoverage,
    EmptyRecord,
    EmptyResult,
    IndexOutOfRange,
    JsonNotFound,
    MappingRecord,
    MappingResponse,
    RepairPolicy,
    SchemaInvalid,
    extract_json,
    mappings_to_beads,
)
