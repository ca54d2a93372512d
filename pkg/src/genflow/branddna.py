"""Brand identity extraction: site ingestion, CSS constraint parsing, schema validation.

The palette and typography constraints come from deterministic parsers over
the site's CSS; the extractor backend only contributes tonal voice and
forbidden tropes. That split is what makes the constraint set testable —
the parsed colors either literally appear in the input CSS or they don't.

Parsing rules:
  * color literals recognized: #RGB, #RRGGBB, rgb(r, g, b) with integer
    channels (out-of-range channels clamp to [0, 255]); 3-digit shorthand
    expands by digit doubling; everything normalizes to uppercase #RRGGBB
  * palette order: occurrence count descending, ties broken by first
    appearance; scan order is stylesheets in document order, then style
    attributes in document order
  * typography: first-listed family of every font-family declaration,
    quotes stripped, declaration order kept, deduplicated; the generic
    families serif/sans-serif/monospace are dropped unless nothing else
    was found
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from html.parser import HTMLParser
from pathlib import Path
from typing import Any, Callable, Mapping, Protocol
from urllib.parse import urljoin, urlparse

from .canon import canonical_dumps, content_digest
from .errors import EmptyPalette, NetworkError, NotHtml, SizeExceeded
from .repair import repair_loop

HEX_RULE = re.compile(r"^#[0-9A-F]{6}$")

_COLOR_TOKEN = re.compile(
    r"#(?P<hex>[0-9a-fA-F]{6}|[0-9a-fA-F]{3})(?![0-9a-fA-F])"
    r"|rgb\(\s*(?P<r>-?\d+)\s*,\s*(?P<g>-?\d+)\s*,\s*(?P<b>-?\d+)\s*\)",
)
_FONT_DECL = re.compile(r"font-family\s*:\s*([^;}{]+)", re.IGNORECASE)
_CSS_COMMENT = re.compile(r"/\*.*?\*/", re.DOTALL)
_GENERIC_FAMILIES = frozenset({"serif", "sans-serif", "monospace"})

_BINARY_MAGIC = (b"\x89PNG", b"\xff\xd8\xff", b"GIF8", b"%PDF")


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RawSite:
    """A fetched document plus every CSS payload it pulls in (inline and linked)."""

    url: str
    html: str
    stylesheets: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.html:
            raise ValueError("RawSite.html must be non-empty")


@dataclass(frozen=True)
class SchemaViolation:
    field_path: str
    rule: str
    found: str = ""

    def to_dict(self) -> dict[str, str]:
        return {"field_path": self.field_path, "rule": self.rule, "found": self.found}


@dataclass(frozen=True)
class BrandDNA:
    """The typed constraint document anchoring all generation."""

    palette: tuple[str, ...]
    typography: tuple[str, ...]
    tonal_voice: tuple[str, ...]
    forbidden_tropes: tuple[str, ...]
    source_url: str

    def to_dict(self) -> dict[str, Any]:
        """Canonical field order: palette, typography, tonal_voice, forbidden_tropes, source_url."""
        return {
            "palette": list(self.palette),
            "typography": list(self.typography),
            "tonal_voice": list(self.tonal_voice),
            "forbidden_tropes": list(self.forbidden_tropes),
            "source_url": self.source_url,
        }

    def digest(self) -> str:
        return content_digest(self.to_dict())

    def dumps(self) -> str:
        return canonical_dumps(self.to_dict())


@dataclass(frozen=True)
class FetchPolicy:
    timeout_s: float = 10.0
    max_bytes: int = 2_000_000
    max_linked_sheets: int = 8
    fixture_root: str = "fixtures"


class ExtractorBackend(Protocol):
    """Produces the identity fields the parsers cannot: tonal voice and tropes."""

    def extract_identity(
        self, site: RawSite, feedback: list[SchemaViolation] | None
    ) -> Mapping[str, Any]: ...


# ---------------------------------------------------------------------------
# Document scanning
# ---------------------------------------------------------------------------


@dataclass
class _DocumentScan:
    linked_sheets: list[str] = field(default_factory=list)
    inline_blocks_and_links: list[tuple[str, str]] = field(default_factory=list)
    style_attrs: list[str] = field(default_factory=list)


class _HtmlScanner(HTMLParser):
    """Collects stylesheet links, <style> blocks, and style attributes in document order."""

    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.scan = _DocumentScan()
        self._in_style = False
        self._style_chunks: list[str] = []

    def handle_starttag(self, tag: str, attrs: list[tuple[str, str | None]]) -> None:
        attr_map = {k.lower(): (v or "") for k, v in attrs}
        if tag == "link":
            rel = attr_map.get("rel", "").lower()
            href = attr_map.get("href", "")
            if "stylesheet" in rel.split() and href:
                self.scan.inline_blocks_and_links.append(("link", href))
        elif tag == "style":
            self._in_style = True
            self._style_chunks = []
        style_attr = attr_map.get("style")
        if style_attr:
            self.scan.style_attrs.append(style_attr)

    def handle_endtag(self, tag: str) -> None:
        if tag == "style" and self._in_style:
            self._in_style = False
            self.scan.inline_blocks_and_links.append(("inline", "".join(self._style_chunks)))

    def handle_data(self, data: str) -> None:
        if self._in_style:
            self._style_chunks.append(data)


def scan_document(html: str) -> _DocumentScan:
    scanner = _HtmlScanner()
    scanner.feed(html)
    scanner.close()
    return scanner.scan


# ---------------------------------------------------------------------------
# fetch_site
# ---------------------------------------------------------------------------


def _sniff_html(payload: bytes) -> str:
    if payload.startswith(_BINARY_MAGIC):
        raise NotHtml("payload is a binary image/document, not HTML")
    try:
        text = payload.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise NotHtml("payload is not UTF-8 text") from exc
    if "<" not in text:
        raise NotHtml("payload contains no markup")
    return text


def _read_fixture_file(root: Path, rel: str, max_bytes: int) -> bytes:
    target = (root / rel).resolve()
    if root.resolve() not in target.parents and target != root.resolve():
        raise NetworkError(f"fixture path escapes the fixture root: {rel}")
    if not target.is_file():
        raise NetworkError(f"fixture file not found: {rel}")
    payload = target.read_bytes()
    if len(payload) > max_bytes:
        raise SizeExceeded(f"fixture file exceeds {max_bytes} bytes: {rel}")
    return payload


def _fetch_fixture(url: str, policy: FetchPolicy) -> RawSite:
    rel = url[len("fixture:") :].lstrip("/")
    root = Path(policy.fixture_root)
    html = _sniff_html(_read_fixture_file(root, rel, policy.max_bytes))
    scan = scan_document(html)
    base_dir = str(Path(rel).parent)

    sheets: list[str] = []
    linked = 0
    for kind, value in scan.inline_blocks_and_links:
        if kind == "inline":
            sheets.append(value)
            continue
        if linked >= policy.max_linked_sheets:
            continue
        sheet_rel = value if base_dir in ("", ".") else f"{base_dir}/{value}"
        try:
            sheets.append(_read_fixture_file(root, sheet_rel, policy.max_bytes).decode("utf-8"))
            linked += 1
        except (NetworkError, UnicodeDecodeError):
            continue
    return RawSite(url=url, html=html, stylesheets=tuple(sheets))


def _http_get(url: str, policy: FetchPolicy) -> tuple[bytes, str, str]:
    """GET with manual redirects: up to 5 hops, at most one cross-origin hop."""
    import httpx

    current = url
    cross_origin_hops = 0
    for _ in range(6):
        origin = urlparse(current).netloc
        try:
            response = httpx.get(current, timeout=policy.timeout_s, follow_redirects=False)
        except httpx.HTTPError as exc:
            raise NetworkError(f"fetch failed for {current}: {exc}") from exc
        if response.status_code in (301, 302, 303, 307, 308):
            location = response.headers.get("location")
            if not location:
                raise NetworkError(f"redirect without location from {current}")
            nxt = urljoin(current, location)
            if urlparse(nxt).netloc != origin:
                cross_origin_hops += 1
                if cross_origin_hops > 1:
                    raise NetworkError("more than one cross-origin redirect")
            current = nxt
            continue
        if response.status_code >= 400:
            raise NetworkError(f"GET {current} returned {response.status_code}")
        if len(response.content) > policy.max_bytes:
            raise SizeExceeded(f"payload exceeds {policy.max_bytes} bytes: {current}")
        return response.content, response.headers.get("content-type", ""), current
    raise NetworkError("redirect chain longer than 5 hops")


def _fetch_live(url: str, policy: FetchPolicy) -> RawSite:
    payload, content_type, final_url = _http_get(url, policy)
    if content_type and "html" not in content_type and "text" not in content_type:
        raise NotHtml(f"content-type {content_type!r} is not HTML")
    html = _sniff_html(payload)
    scan = scan_document(html)

    sheets: list[str] = []
    linked = 0
    for kind, value in scan.inline_blocks_and_links:
        if kind == "inline":
            sheets.append(value)
            continue
        if linked >= policy.max_linked_sheets:
            continue
        try:
            sheet_bytes, _, _ = _http_get(urljoin(final_url, value), policy)
            sheets.append(sheet_bytes.decode("utf-8", errors="replace"))
            linked += 1
        except (NetworkError, SizeExceeded):
            continue
    return RawSite(url=url, html=html, stylesheets=tuple(sheets))


def fetch_site(url: str, policy: FetchPolicy | None = None) -> RawSite:
    """Fetch a document and its stylesheets from a live URL or a fixture: path."""
    policy = policy or FetchPolicy()
    scheme = urlparse(url).scheme
    if scheme == "fixture":
        return _fetch_fixture(url, policy)
    if scheme in ("http", "https"):
        return _fetch_live(url, policy)
    raise NetworkError(f"unsupported or malformed url: {url!r}")


# ---------------------------------------------------------------------------
# Deterministic constraint parsers
# ---------------------------------------------------------------------------


def _css_payloads(site: RawSite) -> list[str]:
    return [_CSS_COMMENT.sub(" ", s) for s in site.stylesheets] + list(
        scan_document(site.html).style_attrs
    )


def _clamp_channel(value: int) -> int:
    return max(0, min(255, value))


def _normalize_color(match: re.Match[str]) -> str:
    raw_hex = match.group("hex")
    if raw_hex is not None:
        if len(raw_hex) == 3:
            raw_hex = "".join(ch * 2 for ch in raw_hex)
        return "#" + raw_hex.upper()
    channels = (_clamp_channel(int(match.group(g))) for g in ("r", "g", "b"))
    return "#" + "".join(f"{c:02X}" for c in channels)


def extract_palette(site: RawSite) -> list[str]:
    """Frequency-ranked, deduplicated palette of every color literal in the site's CSS."""
    counts: dict[str, int] = {}
    first_seen: dict[str, int] = {}
    position = 0
    for payload in _css_payloads(site):
        for match in _COLOR_TOKEN.finditer(payload):
            color = _normalize_color(match)
            counts[color] = counts.get(color, 0) + 1
            first_seen.setdefault(color, position)
            position += 1
    if not counts:
        raise EmptyPalette(f"no color literals found in {site.url}")
    return sorted(counts, key=lambda c: (-counts[c], first_seen[c]))


def extract_typography(site: RawSite) -> list[str]:
    """First-listed family per font-family declaration, declaration order, deduplicated."""
    families: list[str] = []
    generics: list[str] = []
    for payload in _css_payloads(site):
        for declaration in _FONT_DECL.finditer(payload):
            first = declaration.group(1).split(",")[0].strip().strip("'\"").strip()
            if not first:
                continue
            if first.lower() in _GENERIC_FAMILIES:
                if first not in generics:
                    generics.append(first)
            elif first not in families:
                families.append(first)
    return families if families else generics


# ---------------------------------------------------------------------------
# Schema validation
# ---------------------------------------------------------------------------


def _check_string_list(
    value: Any,
    path: str,
    violations: list[SchemaViolation],
    *,
    require_entries: bool = False,
) -> list[str] | None:
    if not isinstance(value, (list, tuple)) or isinstance(value, (str, bytes)):
        violations.append(SchemaViolation(path, "type", found=type(value).__name__))
        return None
    entries = list(value)
    if any(not isinstance(item, str) for item in entries):
        violations.append(SchemaViolation(path, "type", found="non-string entry"))
        return None
    if require_entries and any(not item for item in entries):
        violations.append(SchemaViolation(path, "non-empty", found="empty string entry"))
    return entries


def validate_schema(candidate: Any) -> BrandDNA | list[SchemaViolation]:
    """BrandDNA if every invariant holds, else each violated rule exactly once."""
    if not isinstance(candidate, Mapping):
        return [SchemaViolation("$", "type", found=type(candidate).__name__)]

    violations: list[SchemaViolation] = []
    values: dict[str, Any] = {}

    for name in ("palette", "typography", "tonal_voice", "forbidden_tropes", "source_url"):
        if name not in candidate:
            violations.append(SchemaViolation(name, "required"))
        else:
            values[name] = candidate[name]

    if "palette" in values:
        palette = _check_string_list(values["palette"], "palette", violations)
        if palette is not None:
            if not palette:
                violations.append(SchemaViolation("palette", "non-empty"))
            bad = [c for c in palette if not HEX_RULE.match(c)]
            if bad:
                violations.append(SchemaViolation("palette", "hex-format", found=bad[0]))
            if len(set(palette)) != len(palette):
                violations.append(SchemaViolation("palette", "no-duplicates"))

    if "typography" in values:
        typography = _check_string_list(
            values["typography"], "typography", violations, require_entries=True
        )
        if typography is not None and not typography:
            violations.append(SchemaViolation("typography", "non-empty"))

    for name in ("tonal_voice", "forbidden_tropes"):
        if name in values:
            _check_string_list(values[name], name, violations)

    if "source_url" in values and not isinstance(values["source_url"], str):
        violations.append(SchemaViolation("source_url", "type", found=type(values["source_url"]).__name__))

    # one entry per (field_path, rule)
    seen: set[tuple[str, str]] = set()
    unique = [v for v in violations if (key := (v.field_path, v.rule)) not in seen and not seen.add(key)]
    if unique:
        return unique

    return BrandDNA(
        palette=tuple(values["palette"]),
        typography=tuple(values["typography"]),
        tonal_voice=tuple(values["tonal_voice"]),
        forbidden_tropes=tuple(values["forbidden_tropes"]),
        source_url=values["source_url"],
    )


# ---------------------------------------------------------------------------
# build_brand_dna
# ---------------------------------------------------------------------------


def build_brand_dna(
    site: RawSite,
    extractor: ExtractorBackend,
    repair_budget: int = 1,
    *,
    on_event: Callable[..., None] | None = None,
    charge: Callable[[str], None] | None = None,
) -> BrandDNA:
    """Assemble a validated BrandDNA, repairing extractor output within budget.

    Palette/typography always come from the deterministic parsers and
    override whatever the extractor returned for those fields.
    """
    if repair_budget < 0:
        raise ValueError("repair_budget must be >= 0")
    palette = extract_palette(site)
    typography = extract_typography(site)

    def produce(attempt: int, feedback: list[SchemaViolation] | None) -> dict[str, Any]:
        if charge is not None:
            charge("extractor")
        raw = extractor.extract_identity(site, feedback)
        candidate: dict[str, Any] = dict(raw) if isinstance(raw, Mapping) else {"_raw": raw}
        candidate["palette"] = palette
        candidate["typography"] = typography
        candidate["source_url"] = site.url
        candidate.setdefault("tonal_voice", None)
        candidate.setdefault("forbidden_tropes", None)
        return candidate

    result = repair_loop(produce, validate_schema, repair_budget, on_event=on_event, role="director_llm")
    assert isinstance(result, BrandDNA)
    return result
