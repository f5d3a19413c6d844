"""Translation-mapping prompt: indexed source and target lines plus a JSON schema."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

from ..errors import BitextError

PLACEHOLDERS = ("{SRC_BLOCK}", "{TGT_BLOCK}", "{SCHEMA}")
_PLACEHOLDER_RE = re.compile("|".join(re.escape(p) for p in PLACEHOLDERS))
DEFAULT_TEMPLATE = "translation_mapping_v1"


class PlaceholderMissing(BitextError):
    pass


@dataclass(frozen=True)
class PromptTemplate:
    system_text: str
    user_text: str
    schema_text: str
    version: str = "custom"

    def check(self) -> None:
        for p in PLACEHOLDERS:
            n = self.user_text.count(p)
            if n != 1:
                raise PlaceholderMissing(
                    f"template {self.version!r}: placeholder {p} occurs {n} times, expected once")


def load_template(path: Optional[str | Path] = None) -> PromptTemplate:
    """Load a template JSON file, or the packaged default when ``path`` is None."""
    if path is None:
        raw = (resources.files(__package__) / "templates" / f"{DEFAULT_TEMPLATE}.json").read_text("utf-8")
    else:
        raw = Path(path).read_text(encoding="utf-8")
    d = json.loads(raw)
    return PromptTemplate(d["system_text"], d["user_text"], d["schema_text"],
                          d.get("version", "custom"))


def build_prompt(src_lines: Sequence[str], tgt_lines: Sequence[str],
                 template: PromptTemplate) -> str:
    if not src_lines or not tgt_lines:
        raise ValueError("both sides need at least one line")
    template.check()
    values = {
        "{SRC_BLOCK}": "\n".join(src_lines),
        "{TGT_BLOCK}": "\n".join(tgt_lines),
        "{SCHEMA}": template.schema_text,
    }
    # single pass, so placeholder-like text inside sentences is left alone
    return _PLACEHOLDER_RE.sub(lambda m: values[m.group(0)], template.user_text)


def estimate_tokens(text: str) -> int:
    """Crude upper-side token estimate (3 characters per token)."""
    return len(text) // 3 + 1
