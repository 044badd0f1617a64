"""Corpus records, HTML title/text extraction, ingest filters and JSONL storage."""
from __future__ import annotations

import codecs
import enum
import hashlib
import html
import json
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from html.parser import HTMLParser
from pathlib import Path
from typing import Callable, Iterable, Sequence
from urllib.parse import urlsplit

from .text import Lexicon, bundled_lexicon


class IngestError(Exception):
    pass


class MalformedHtml(IngestError):
    pass


class ParseError(IngestError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


class Status(str, enum.Enum):
    FOUND = "found"
    NOT_FOUND = "not_found"
    UNKNOWN = "unknown"


def _check_uri(uri: str) -> None:
    parts = urlsplit(uri)
    if not parts.scheme or not parts.netloc:
        raise ValueError(f"not an absolute URI: {uri!r}")


@dataclass(frozen=True)
class TitleRecord:
    uri: str
    title: str
    status: Status = Status.UNKNOWN
    extra: dict = field(default_factory=dict, compare=True, hash=False)

    def __post_init__(self):
        _check_uri(self.uri)
        object.__setattr__(self, "title", self.title.strip())
        object.__setattr__(self, "status", Status(self.status))

    @property
    def empty_title(self) -> bool:
        return not self.title

    def with_status(self, status: Status) -> "TitleRecord":
        return TitleRecord(self.uri, self.title, Status(status), dict(self.extra))


@dataclass(frozen=True)
class PageSnapshot:
    uri: str
    html: str
    fetched_at: datetime = field(default_factory=lambda: datetime.now(timezone.utc))


# ---------------------------------------------------------------- decoding

_META_CHARSET = re.compile(rb"""<meta[^>]+charset\s*=\s*["']?\s*([A-Za-z0-9_\-:.]+)""", re.I)
MAX_REPLACEMENT_FRACTION = 0.10


def declared_charset(raw: bytes) -> str | None:
    m = _META_CHARSET.search(raw[:4096])
    if not m:
        return None
    name = m.group(1).decode("ascii", "replace")
    try:
        return codecs.lookup(name).name
    except LookupError:
        return None


def decode_html(raw: bytes, charset: str | None = None) -> str:
    """Decode page bytes as UTF-8 unless a charset is given or declared.

    Undecodable bytes become U+FFFD; more than 10% replacement characters
    means the page cannot be scanned and raises :class:`MalformedHtml`.
    """
    encoding = charset or declared_charset(raw) or "utf-8"
    try:
        text = raw.decode(encoding, errors="replace")
    except LookupError:
        text = raw.decode("utf-8", errors="replace")
    if text and text.count("�") > MAX_REPLACEMENT_FRACTION * len(text):
        raise MalformedHtml(f"undecodable document ({encoding})")
    return text


def _require_text(snapshot: PageSnapshot) -> str:
    if not isinstance(snapshot.html, str):
        raise MalformedHtml(f"{snapshot.uri}: snapshot html is not decoded text")
    return snapshot.html


# ---------------------------------------------------------------- extraction

_TITLE_OPEN = re.compile(r"<title(?:\s[^>]*)?>", re.I)
_TITLE_CLOSE = re.compile(r"</title\s*>", re.I)
_TAG = re.compile(r"<[^>]*>?")
_WS = re.compile(r"\s+")


def normalize_text(text: str) -> str:
    return _WS.sub(" ", html.unescape(text)).strip()


def extract_title(snapshot: PageSnapshot) -> str:
    """Text of the first TITLE element, markup stripped and whitespace collapsed.

    An unclosed TITLE runs up to the next ``<``; a page with no TITLE yields "".
    """
    doc = _require_text(snapshot)
    m = _TITLE_OPEN.search(doc)
    if not m:
        return ""
    start = m.end()
    close = _TITLE_CLOSE.search(doc, start)
    if close:
        inner = _TAG.sub(" ", doc[start:close.start()])
    else:
        nxt = doc.find("<", start)
        inner = doc[start:] if nxt < 0 else doc[start:nxt]
    return normalize_text(inner)


_BLOCK_TAGS = frozenset("""
address article aside blockquote body br dd div dl dt fieldset figcaption figure
footer form h1 h2 h3 h4 h5 h6 head header hr html li main nav ol option p pre
section select table tbody td tfoot th thead title tr ul
""".split())


class _VisibleText(HTMLParser):
    _SKIP = {"script", "style"}

    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.chunks: list[str] = []
        self._skip_depth = 0

    def handle_starttag(self, tag, attrs):
        if tag in self._SKIP:
            self._skip_depth += 1
        elif tag in _BLOCK_TAGS:
            self.chunks.append(" ")

    def handle_endtag(self, tag):
        if tag in self._SKIP and self._skip_depth:
            self._skip_depth -= 1
        elif tag in _BLOCK_TAGS:
            self.chunks.append(" ")

    def handle_data(self, data):
        if not self._skip_depth:
            self.chunks.append(data)


def visible_text(snapshot: PageSnapshot) -> str:
    parser = _VisibleText()
    parser.feed(_require_text(snapshot))
    parser.close()
    # inline tags join their neighbours; block tags break words
    return "".join(parser.chunks)


def content_word_count(snapshot: PageSnapshot) -> int:
    return len(visible_text(snapshot).split())


# ---------------------------------------------------------------- filtering

class RejectReason(str, enum.Enum):
    TOO_FEW_WORDS = "TooFewWords"
    NON_ENGLISH = "NonEnglish"
    MALFORMED_HTML = "MalformedHtml"


@dataclass(frozen=True)
class FilterConfig:
    min_content_words: int = 50
    require_english: bool = True
    english_stopword_hit_threshold: float = 0.02

    def __post_init__(self):
        if self.min_content_words < 0:
            raise ValueError("min_content_words must be >= 0")
        if not 0.0 <= self.english_stopword_hit_threshold <= 1.0:
            raise ValueError("english_stopword_hit_threshold must lie in [0, 1]")


_ENGLISH: Lexicon | None = None


def english_stopwords() -> Lexicon:
    global _ENGLISH
    if _ENGLISH is None:
        _ENGLISH = bundled_lexicon("english-428")
    return _ENGLISH


def stopword_hit_fraction(words: Sequence[str], lexicon: Lexicon | None = None) -> float:
    if not words:
        return 0.0
    lexicon = lexicon or english_stopwords()
    return sum(1 for w in words if w.casefold() in lexicon.terms) / len(words)


EnglishDetector = Callable[[Sequence[str], FilterConfig], bool]


def stopword_english_detector(words: Sequence[str], config: FilterConfig) -> bool:
    return stopword_hit_fraction(words) >= config.english_stopword_hit_threshold


def apply_filters(
    records: Iterable[tuple[TitleRecord, PageSnapshot]],
    config: FilterConfig = FilterConfig(),
    is_english: EnglishDetector = stopword_english_detector,
) -> tuple[list[TitleRecord], list[tuple[TitleRecord, RejectReason]]]:
    """Split records into kept and rejected; each rejection carries a reason."""
    kept, rejected = [], []
    for record, snapshot in records:
        try:
            words = visible_text(snapshot).split()
        except MalformedHtml:
            rejected.append((record, RejectReason.MALFORMED_HTML))
            continue
        if len(words) < config.min_content_words:
            rejected.append((record, RejectReason.TOO_FEW_WORDS))
        elif config.require_english and not is_english(words, config):
            rejected.append((record, RejectReason.NON_ENGLISH))
        else:
            kept.append(record)
    return kept, rejected


# ---------------------------------------------------------------- storage

_FIELDS = ("uri", "title", "status")


def record_to_json(record: TitleRecord) -> str:
    obj = {"uri": record.uri, "title": record.title, "status": record.status.value}
    obj.update({k: v for k, v in record.extra.items() if k not in _FIELDS})
    return json.dumps(obj, ensure_ascii=False)


def record_from_json(line: str, lineno: int | None = None) -> TitleRecord:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", lineno) from None
    if not isinstance(obj, dict):
        raise ParseError("expected a JSON object", lineno)
    for name in _FIELDS:
        if name not in obj:
            raise ParseError(f"missing field {name!r}", lineno)
        if not isinstance(obj[name], str):
            raise ParseError(f"field {name!r} must be a string", lineno)
    try:
        return TitleRecord(obj["uri"], obj["title"], Status(obj["status"]),
                           {k: v for k, v in obj.items() if k not in _FIELDS})
    except ValueError as exc:
        raise ParseError(str(exc), lineno) from None


def load_corpus(path: str | Path) -> list[TitleRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if line.strip():
                records.append(record_from_json(line, lineno))
    return records


def save_corpus(records: Iterable[TitleRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            fh.write(record_to_json(record) + "\n")


def uri_digest(uri: str) -> str:
    return hashlib.sha256(uri.encode("utf-8")).hexdigest()


class SnapshotStore:
    """Directory of raw page files named by URI digest, plus ``index.json``."""

    INDEX = "index.json"

    def __init__(self, root: str | Path):
        self.root = Path(root)
        index_path = self.root / self.INDEX
        self.index: dict[str, str] = {}
        if index_path.exists():
            with open(index_path, encoding="utf-8") as fh:
                self.index = json.load(fh)

    def put(self, uri: str, raw: bytes) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        digest = uri_digest(uri)
        path = self.root / digest
        path.write_bytes(raw)
        self.index[digest] = uri
        with open(self.root / self.INDEX, "w", encoding="utf-8") as fh:
            json.dump(self.index, fh, indent=1, sort_keys=True)
        return path

    def uris(self) -> list[str]:
        return sorted(self.index.values())

    def get(self, uri: str) -> PageSnapshot:
        path = self.root / uri_digest(uri)
        fetched = datetime.fromtimestamp(path.stat().st_mtime, timezone.utc)
        return PageSnapshot(uri, decode_html(path.read_bytes()), fetched)

    def __iter__(self):
        for uri in self.uris():
            yield uri


def fetch_snapshot(uri: str, timeout: float = 20.0) -> PageSnapshot:
    """Download one page (no crawling, robots handling or retries)."""
    import requests

    resp = requests.get(uri, timeout=timeout)
    resp.raise_for_status()
    header_charset = resp.encoding if "charset" in resp.headers.get("content-type", "").lower() else None
    return PageSnapshot(uri, decode_html(resp.content, header_charset))


def records_from_snapshots(snapshots: Iterable[PageSnapshot]) -> list[tuple[TitleRecord, PageSnapshot]]:
    """Pair each snapshot with a record holding its extracted title.

    Snapshots that cannot be scanned get an empty title; the filter step
    then rejects them as malformed.
    """
    pairs = []
    for snap in snapshots:
        try:
            title = extract_title(snap)
        except MalformedHtml:
            title = ""
        pairs.append((TitleRecord(snap.uri, title), snap))
    return pairs
