"""Layered configuration: defaults < JSON config file < environment < command-line flags.

Environment variables are named ``BITEXT_ALIGN_<SECTION>__<KEY>``, e.g.
``BITEXT_ALIGN_LLM__MODEL_NAME=gpt-x``. Values are parsed as JSON when
possible (numbers, booleans), otherwise taken as plain strings.
"""

from __future__ import annotations

import copy
import dataclasses
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional

from .baseline import DEFAULT_PRIORS, GaleChurchParams
from .errors import InputError
from .llm_align import Chunking, LlmConfig, RepairPolicy

ENV_PREFIX = "BITEXT_ALIGN_"

_LLM_KEYS = [f.name for f in dataclasses.fields(LlmConfig) if f.name != "mock_responses"]

DEFAULTS: dict[str, dict[str, Any]] = {
    "llm": {f.name: f.default for f in dataclasses.fields(LlmConfig) if f.name in _LLM_KEYS},
    "baseline": {"c": 1.0, "s2": 6.8, "priors": dict(DEFAULT_PRIORS), "estimate_ratio": False},
    "eval": {"include_null": False},
    "io": {"allow_blank": False},
    "run": {"max_concurrency": 4, "policy": "repair", "chunk_size_src": 0, "tgt_margin": 5,
            "template": None},
}


@dataclass(frozen=True)
class RunSettings:
    max_concurrency: int = 4
    policy: RepairPolicy = field(default_factory=RepairPolicy)
    chunking: Chunking = field(default_factory=Chunking)
    template: Optional[str] = None


@dataclass(frozen=True)
class AppConfig:
    llm: LlmConfig
    baseline: GaleChurchParams
    estimate_ratio: bool
    include_null: bool
    allow_blank: bool
    run: RunSettings


def _merge(base: dict, override: Mapping, where: str) -> None:
    for section, values in override.items():
        if section not in base:
            raise InputError(f"{where}: unknown config section {section!r}")
        if not isinstance(values, Mapping):
            raise InputError(f"{where}: section {section!r} must be an object")
        for key, value in values.items():
            if key not in base[section]:
                raise InputError(f"{where}: unknown key {section}.{key}")
            if key == "priors":
                if not isinstance(value, Mapping):
                    raise InputError(f"{where}: baseline.priors must be an object")
                base[section][key].update(value)
            else:
                base[section][key] = value


def _env_layer(environ: Mapping[str, str]) -> dict:
    layer: dict[str, dict] = {}
    for name, raw in environ.items():
        if not name.startswith(ENV_PREFIX) or "__" not in name:
            continue
        section, key = name[len(ENV_PREFIX):].lower().split("__", 1)
        try:
            value = json.loads(raw)
        except ValueError:
            value = raw
        layer.setdefault(section, {})[key] = value
    return layer


def resolve_config(config_path: Optional[str | Path] = None,
                   flags: Optional[Mapping[str, Mapping[str, Any]]] = None,
                   environ: Optional[Mapping[str, str]] = None) -> AppConfig:
    """Merge all layers and build typed settings; raises :class:`InputError` on bad values."""
    raw = copy.deepcopy(DEFAULTS)
    if config_path is not None:
        try:
            data = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except OSError as e:
            raise InputError(f"cannot read config {config_path}: {e.strerror or e}") from e
        except ValueError as e:
            raise InputError(f"config {config_path} is not valid JSON: {e}") from e
        if not isinstance(data, dict):
            raise InputError(f"config {config_path} must hold a JSON object")
        _merge(raw, data, str(config_path))
    _merge(raw, _env_layer(os.environ if environ is None else environ), "environment")
    if flags:
        cleaned = {s: {k: v for k, v in vals.items() if v is not None} for s, vals in flags.items()}
        _merge(raw, cleaned, "command line")

    b, r = raw["baseline"], raw["run"]
    try:
        return AppConfig(
            llm=LlmConfig(**raw["llm"]),
            baseline=GaleChurchParams(c=float(b["c"]), s2=float(b["s2"]), priors=dict(b["priors"])),
            estimate_ratio=bool(b["estimate_ratio"]),
            include_null=bool(raw["eval"]["include_null"]),
            allow_blank=bool(raw["io"]["allow_blank"]),
            run=RunSettings(
                max_concurrency=int(r["max_concurrency"]),
                policy=RepairPolicy(r["policy"]),
                chunking=Chunking(int(r["chunk_size_src"]), int(r["tgt_margin"])),
                template=r["template"],
            ),
        )
    except (TypeError, ValueError) as e:
        raise InputError(f"invalid configuration: {e}") from e
