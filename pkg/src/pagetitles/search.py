"""Title queries against pluggable search providers, with caching and judgment.

Two providers ship: :class:`FixtureProvider` serves canned JSON responses
from disk, :class:`HttpJsonProvider` talks to any JSON search API described
by a small config file. Responses go through :class:`SearchClient`, which
rate-limits per provider and caches by (provider, rendered query, k).
"""
from __future__ import annotations

import enum
import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Protocol, Sequence
from urllib.parse import quote_plus, urlsplit, urlunsplit

from .corpus import Status, TitleRecord
from .text import tokenize


class SearchError(Exception):
    pass


class EmptyTitle(SearchError, ValueError):
    pass


class InvalidUri(SearchError, ValueError):
    pass


class ProviderError(SearchError):
    pass


class RateLimited(ProviderError):
    def __init__(self, message: str, retry_after: float | None = None):
        super().__init__(message)
        self.retry_after = retry_after


class QuotaExceeded(ProviderError):
    pass


# ---------------------------------------------------------------- queries

class QueryMode(str, enum.Enum):
    OR = "or"
    AND = "and"
    QUOTED = "quoted"


def render_query(mode: QueryMode, terms: Sequence[str]) -> str:
    mode = QueryMode(mode)
    if mode is QueryMode.OR:
        return " ".join(terms)
    if mode is QueryMode.AND:
        return " ".join("+" + t for t in terms)
    return '"' + " ".join(terms) + '"'


@dataclass(frozen=True)
class QuerySpec:
    mode: QueryMode
    terms: tuple[str, ...]

    @property
    def rendered(self) -> str:
        return render_query(self.mode, self.terms)


def build_query(title: str, mode: QueryMode | str) -> QuerySpec:
    words = tokenize(title).words
    if not words:
        raise EmptyTitle("title has no words to query")
    return QuerySpec(QueryMode(mode), words)


# ---------------------------------------------------------------- URIs

_DEFAULT_PORTS = {"http": 80, "https": 443, "ftp": 21}


def normalize_uri(uri: str) -> str:
    """Lowercase scheme and host, drop default port and fragment; a bare ``/`` path becomes empty."""
    try:
        parts = urlsplit(uri.strip())
        port = parts.port
    except ValueError as exc:
        raise InvalidUri(f"{uri!r}: {exc}") from None
    if not parts.scheme or not parts.hostname:
        raise InvalidUri(f"not an absolute URI: {uri!r}")
    scheme = parts.scheme.lower()
    host = parts.hostname.lower()
    if ":" in host:
        host = f"[{host}]"
    netloc = host
    if parts.username is not None:
        auth = parts.username + (f":{parts.password}" if parts.password is not None else "")
        netloc = f"{auth}@{host}"
    if port is not None and _DEFAULT_PORTS.get(scheme) != port:
        netloc += f":{port}"
    path = parts.path
    if path == "/":
        path = ""
    return urlunsplit((scheme, netloc, path, parts.query, ""))


# ---------------------------------------------------------------- responses

@dataclass(frozen=True)
class SearchResponse:
    query: QuerySpec
    total_results: int
    top_results: tuple[str, ...]
    provider: str
    retrieved_at: str = field(default="", compare=False)

    def to_json(self) -> dict:
        return {"query": self.query.rendered, "mode": self.query.mode.value,
                "terms": list(self.query.terms), "total_results": self.total_results,
                "results": list(self.top_results), "provider": self.provider,
                "retrieved_at": self.retrieved_at}

    @classmethod
    def from_json(cls, obj: Mapping) -> "SearchResponse":
        q = QuerySpec(QueryMode(obj["mode"]), tuple(obj["terms"]))
        return cls(q, int(obj["total_results"]), tuple(obj["results"]), obj["provider"],
                   obj.get("retrieved_at", ""))


def dedupe_results(uris: Iterable[str], k: int) -> tuple[str, ...]:
    """Normalize, drop duplicates and unparseable entries, keep the first ``k``."""
    out: list[str] = []
    for uri in uris:
        try:
            norm = normalize_uri(uri)
        except InvalidUri:
            continue
        if norm not in out:
            out.append(norm)
        if len(out) == k:
            break
    return tuple(out)


@dataclass(frozen=True)
class RawResults:
    total_results: int
    results: list[str]


class SearchProvider(Protocol):
    name: str

    def search(self, rendered_query: str, k: int) -> RawResults: ...


class FixtureProvider:
    """Canned responses: a directory of JSON files, each ``{query, total_results, results}``."""

    def __init__(self, root: str | Path, name: str = "fixture"):
        self.name = name
        self.root = Path(root)
        self.calls = 0
        self._responses: dict[str, RawResults] = {}
        paths = [self.root] if self.root.is_file() else sorted(self.root.glob("*.json"))
        for path in paths:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
            for obj in data if isinstance(data, list) else [data]:
                self._responses[obj["query"]] = RawResults(int(obj["total_results"]), list(obj["results"]))

    def search(self, rendered_query: str, k: int) -> RawResults:
        self.calls += 1
        try:
            return self._responses[rendered_query]
        except KeyError:
            raise ProviderError(f"no fixture for query {rendered_query!r}") from None


def select_path(obj: Any, path: str) -> Any:
    """Follow a dotted selector such as ``web.results[].url`` through JSON.

    ``[]`` maps the remainder of the path over a list.
    """
    if not path:
        return obj
    head, _, rest = path.partition(".")
    if head.endswith("[]"):
        items = obj[head[:-2]] if head[:-2] else obj
        return [select_path(item, rest) for item in items]
    if isinstance(obj, list):
        return select_path(obj[int(head)], rest)
    return select_path(obj[head], rest)


@dataclass(frozen=True)
class HttpProviderConfig:
    name: str
    endpoint: str
    method: str = "GET"
    query_param: str = "q"
    count_param: str | None = "count"
    results_path: str = "results[].url"
    total_path: str | None = "total"
    api_key_env: str | None = None
    api_key_header: str = "Authorization"
    api_key_prefix: str = "Bearer "
    requests_per_second: float = 1.0
    timeout: float = 20.0


class HttpJsonProvider:
    """Generic JSON search API client.

    The endpoint may contain ``{query}`` and ``{k}`` placeholders; otherwise
    the query and count travel as parameters.
    """

    def __init__(self, config: HttpProviderConfig, session=None):
        import requests

        self.config = config
        self.name = config.name
        self.session = session or requests.Session()

    def search(self, rendered_query: str, k: int) -> RawResults:
        import requests

        cfg = self.config
        headers = {}
        if cfg.api_key_env:
            key = os.environ.get(cfg.api_key_env)
            if not key:
                raise ProviderError(f"environment variable {cfg.api_key_env} is not set")
            headers[cfg.api_key_header] = cfg.api_key_prefix + key
        params = {}
        if "{query}" in cfg.endpoint:
            url = cfg.endpoint.format(query=quote_plus(rendered_query), k=k)
        else:
            url = cfg.endpoint
            params[cfg.query_param] = rendered_query
            if cfg.count_param:
                params[cfg.count_param] = k
        try:
            if cfg.method.upper() == "GET":
                resp = self.session.get(url, params=params, headers=headers, timeout=cfg.timeout)
            else:
                resp = self.session.request(cfg.method.upper(), url, json=params, headers=headers,
                                            timeout=cfg.timeout)
        except requests.RequestException as exc:
            raise ProviderError(f"{self.name}: transport error: {exc}") from exc
        if resp.status_code == 429:
            retry = resp.headers.get("Retry-After")
            raise RateLimited(f"{self.name}: rate limited", float(retry) if retry and retry.isdigit() else None)
        if resp.status_code in (402, 403) and "quota" in resp.text.lower():
            raise QuotaExceeded(f"{self.name}: quota exceeded")
        if resp.status_code >= 400:
            raise ProviderError(f"{self.name}: HTTP {resp.status_code}")
        try:
            payload = resp.json()
            results = [str(u) for u in select_path(payload, cfg.results_path)]
            total = int(select_path(payload, cfg.total_path)) if cfg.total_path else len(results)
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise ProviderError(f"{self.name}: unexpected response shape: {exc}") from exc
        return RawResults(total, results)


def load_provider(config_path: str | Path) -> SearchProvider:
    """Build a provider from a JSON config.

    ``{"type": "fixture", "path": "responses/"}`` or
    ``{"type": "http", "name": ..., "endpoint": ..., ...}``; relative paths
    resolve against the config file's directory.
    """
    config_path = Path(config_path)
    with open(config_path, encoding="utf-8") as fh:
        cfg = json.load(fh)
    kind = cfg.pop("type", "http")
    if kind == "fixture":
        root = Path(cfg["path"])
        if not root.is_absolute():
            root = config_path.parent / root
        return FixtureProvider(root, cfg.get("name", "fixture"))
    if kind == "http":
        return HttpJsonProvider(HttpProviderConfig(**cfg))
    raise ValueError(f"unknown provider type {kind!r}")


# ---------------------------------------------------------------- client

class TokenBucket:
    """Blocking token bucket: ``rate`` tokens per second, burst ``capacity``."""

    def __init__(self, rate: float = 1.0, capacity: float = 1.0,
                 clock: Callable[[], float] = time.monotonic, sleep: Callable[[float], None] = time.sleep):
        if rate <= 0:
            raise ValueError("rate must be positive")
        self.rate = rate
        self.capacity = capacity
        self.tokens = capacity
        self.clock = clock
        self.sleep = sleep
        self.updated = clock()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        with self._lock:
            now = self.clock()
            self.tokens = min(self.capacity, self.tokens + (now - self.updated) * self.rate)
            self.updated = now
            if self.tokens < 1:
                wait = (1 - self.tokens) / self.rate
                self.sleep(wait)
                self.tokens = 1.0
                self.updated = self.clock()
            self.tokens -= 1


class ResponseCache:
    """On-disk cache, one JSON file per (provider, rendered query, k)."""

    def __init__(self, root: str | Path | None = None):
        self.root = Path(root) if root else None
        self._memory: dict[str, dict] = {}
        self._lock = threading.Lock()

    @staticmethod
    def key(provider: str, rendered: str, k: int) -> str:
        return hashlib.sha256(json.dumps([provider, rendered, k]).encode("utf-8")).hexdigest()

    def get(self, key: str) -> dict | None:
        if key in self._memory:
            return self._memory[key]
        if self.root:
            path = self.root / f"{key}.json"
            if path.exists():
                with open(path, encoding="utf-8") as fh:
                    obj = json.load(fh)
                self._memory[key] = obj
                return obj
        return None

    def put(self, key: str, obj: dict) -> None:
        with self._lock:
            self._memory[key] = obj
            if self.root:
                self.root.mkdir(parents=True, exist_ok=True)
                tmp = self.root / f".{key}.{os.getpid()}.tmp"
                with open(tmp, "w", encoding="utf-8") as fh:
                    json.dump(obj, fh, sort_keys=True)
                os.replace(tmp, self.root / f"{key}.json")


class SearchClient:
    def __init__(self, provider: SearchProvider, cache: ResponseCache | None = None,
                 limiter: TokenBucket | None = None, now: Callable[[], datetime] | None = None):
        self.provider = provider
        self.cache = cache if cache is not None else ResponseCache()
        rate = getattr(getattr(provider, "config", None), "requests_per_second", 1.0)
        self.limiter = limiter or TokenBucket(rate)
        self.now = now or (lambda: datetime.now(timezone.utc))
        self.provider_calls = 0

    def execute(self, q: QuerySpec, k: int = 10) -> SearchResponse:
        if k < 1:
            raise ValueError("k must be >= 1")
        key = ResponseCache.key(self.provider.name, q.rendered, k)
        cached = self.cache.get(key)
        if cached is not None:
            return SearchResponse(q, cached["total_results"], tuple(cached["results"]),
                                  self.provider.name, cached.get("retrieved_at", ""))
        if not isinstance(self.provider, FixtureProvider):
            self.limiter.acquire()
        self.provider_calls += 1
        raw = self.provider.search(q.rendered, k)
        resp = SearchResponse(q, max(0, int(raw.total_results)), dedupe_results(raw.results, k),
                              self.provider.name, self.now().isoformat())
        self.cache.put(key, {"total_results": resp.total_results, "results": list(resp.top_results),
                             "retrieved_at": resp.retrieved_at})
        return resp


def execute(q: QuerySpec, provider: SearchProvider | SearchClient, k: int = 10) -> SearchResponse:
    client = provider if isinstance(provider, SearchClient) else SearchClient(provider)
    return client.execute(q, k)


# ---------------------------------------------------------------- judgment

@dataclass(frozen=True)
class Judgment:
    target_uri: str
    status: Status
    rank: int | None = None

    def __post_init__(self):
        if (self.status is Status.FOUND) != (self.rank is not None):
            raise ValueError("rank is present exactly when the target was found")


def judge(resp: SearchResponse, target_uri: str, k: int | None = None) -> Judgment:
    k = len(resp.top_results) if k is None else k
    target = normalize_uri(target_uri)
    for rank, uri in enumerate(resp.top_results[:k], 1):
        try:
            if normalize_uri(uri) == target:
                return Judgment(target_uri, Status.FOUND, rank)
        except InvalidUri:
            continue
    return Judgment(target_uri, Status.NOT_FOUND)


class _Undefined:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNDEFINED"

    def __str__(self) -> str:
        return "undefined"

    def __bool__(self) -> bool:
        return False


UNDEFINED = _Undefined()


def guarded_ratio(numerator: int | None, denominator: int | None):
    if numerator is None or denominator is None or denominator == 0:
        return UNDEFINED
    return numerator / denominator


@dataclass
class RecordOutcome:
    record: TitleRecord
    responses: dict[QueryMode, SearchResponse] = field(default_factory=dict)
    judgments: dict[QueryMode, Judgment] = field(default_factory=dict)
    errors: dict[QueryMode, str] = field(default_factory=dict)

    def count(self, mode: QueryMode) -> int | None:
        resp = self.responses.get(mode)
        return resp.total_results if resp else None

    @property
    def or_over_quoted(self):
        return guarded_ratio(self.count(QueryMode.OR), self.count(QueryMode.QUOTED))

    @property
    def and_over_quoted(self):
        return guarded_ratio(self.count(QueryMode.AND), self.count(QueryMode.QUOTED))


@dataclass
class ExperimentResult:
    outcomes: list[RecordOutcome]
    failures: list[tuple[str, QueryMode, str]]

    @property
    def attempted(self) -> int:
        return sum(len(o.responses) + len(o.errors) for o in self.outcomes)

    @property
    def all_failed(self) -> bool:
        return self.attempted > 0 and len(self.failures) == self.attempted


def run_experiment(corpus: Sequence[TitleRecord], provider: SearchProvider | SearchClient,
                   modes: Sequence[QueryMode | str], k: int = 10) -> ExperimentResult:
    """Query every title in every mode; provider errors are collected, not raised."""
    client = provider if isinstance(provider, SearchClient) else SearchClient(provider)
    modes = [QueryMode(m) for m in modes]
    outcomes, failures = [], []
    for record in corpus:
        outcome = RecordOutcome(record)
        for mode in modes:
            try:
                resp = client.execute(build_query(record.title, mode), k)
            except (ProviderError, EmptyTitle) as exc:
                outcome.errors[mode] = f"{type(exc).__name__}: {exc}"
                failures.append((record.uri, mode, outcome.errors[mode]))
                continue
            outcome.responses[mode] = resp
            outcome.judgments[mode] = judge(resp, record.uri, k)
        outcomes.append(outcome)
    return ExperimentResult(outcomes, failures)


def experiment_status(outcome: RecordOutcome, judge_mode: QueryMode = QueryMode.OR) -> Status:
    """Ground truth from the as-is (OR) title query, the rediscovery query itself."""
    j = outcome.judgments.get(QueryMode(judge_mode))
    return j.status if j else Status.UNKNOWN
