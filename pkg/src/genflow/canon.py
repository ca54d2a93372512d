"""Canonical JSON forms and content digests.

All engine artifacts serialize through these helpers so that identical
inputs produce byte-identical files. Key order is the order the document
was constructed in (each type defines its own canonical field order);
digests are sha256 over the compact form, rendered lowercase hex.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any


def compact_dumps(doc: Any) -> str:
    """Single-line JSON, the digest input form."""
    return json.dumps(doc, separators=(",", ":"), ensure_ascii=False)


def canonical_dumps(doc: Any) -> str:
    """Indented JSON with a trailing newline, the on-disk form."""
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def content_digest(doc: Any) -> str:
    """sha256 of the compact form, lowercase hex."""
    return hashlib.sha256(compact_dumps(doc).encode("utf-8")).hexdigest()


def short_digest(doc: Any, length: int = 12) -> str:
    return content_digest(doc)[:length]
