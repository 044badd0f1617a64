"""Title tokenization and lexical measurements.

A word is any maximal run of non-whitespace characters. Matching against
lexicons and stop titles is case-insensitive (``str.casefold``).
"""
from __future__ import annotations

import math
import string
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable


class LexiconError(ValueError):
    """A lexicon or stop-title file could not be loaded."""


@dataclass(frozen=True)
class TokenizedTitle:
    raw: str
    words: tuple[str, ...]
    folded: tuple[str, ...] = field(repr=False)

    @property
    def word_count(self) -> int:
        return len(self.words)

    @property
    def char_count(self) -> int:
        return len(self.raw)


def tokenize(title: str) -> TokenizedTitle:
    raw = title.strip()
    words = tuple(raw.split())
    return TokenizedTitle(raw=raw, words=words, folded=tuple(w.casefold() for w in words))


def longest_word(t: TokenizedTitle) -> int:
    return max((len(w) for w in t.words), default=0)


@dataclass(frozen=True)
class Lexicon:
    name: str
    terms: frozenset[str]

    @property
    def size(self) -> int:
        return len(self.terms)

    def __contains__(self, word: str) -> bool:
        return word.casefold() in self.terms

    @classmethod
    def from_terms(cls, name: str, terms: Iterable[str]) -> "Lexicon":
        folded = []
        for term in terms:
            term = term.strip().casefold()
            if not term or any(ch.isspace() for ch in term):
                raise LexiconError(f"{name}: invalid term {term!r}")
            folded.append(term)
        if len(set(folded)) != len(folded):
            dupes = sorted(w for w, n in Counter(folded).items() if n > 1)
            raise LexiconError(f"{name}: duplicate terms {dupes}")
        return cls(name, frozenset(folded))


@dataclass(frozen=True)
class StopTitleSet:
    name: str
    phrases: frozenset[tuple[str, ...]]

    @property
    def max_len(self) -> int:
        return max((len(p) for p in self.phrases), default=0)

    @classmethod
    def from_phrases(cls, name: str, phrases: Iterable[str]) -> "StopTitleSet":
        out = set()
        for phrase in phrases:
            words = tuple(w.casefold() for w in phrase.split())
            if not words:
                raise LexiconError(f"{name}: empty stop title")
            out.add(words)
        return cls(name, frozenset(out))


def _read_entries(path: Path) -> list[tuple[int, str]]:
    entries = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if line and not line.startswith("#"):
                entries.append((lineno, line))
    return entries


def load_lexicon(path: str | Path, name: str | None = None) -> Lexicon:
    """Read a one-term-per-line lexicon file; ``#`` starts a comment line.

    Duplicate terms are rejected with an error naming the offending line.
    """
    path = Path(path)
    name = name or path.stem
    seen: dict[str, int] = {}
    for lineno, term in _read_entries(path):
        term = term.casefold()
        if any(ch.isspace() for ch in term):
            raise LexiconError(f"{path}:{lineno}: term contains whitespace: {term!r}")
        if term in seen:
            raise LexiconError(f"{path}:{lineno}: duplicate term {term!r} (first on line {seen[term]})")
        seen[term] = lineno
    return Lexicon(name, frozenset(seen))


def load_stop_titles(path: str | Path, name: str | None = None) -> StopTitleSet:
    path = Path(path)
    name = name or path.stem
    seen: dict[tuple[str, ...], int] = {}
    for lineno, phrase in _read_entries(path):
        words = tuple(w.casefold() for w in phrase.split())
        if words in seen:
            raise LexiconError(f"{path}:{lineno}: duplicate stop title {phrase!r} (first on line {seen[words]})")
        seen[words] = lineno
    return StopTitleSet(name, frozenset(seen))


BUNDLED_LEXICONS = (
    "english-36", "english-428", "english-659", "english-979",
    "articles", "prepositions", "adverbs", "adjectives", "nouns",
)


def bundled_lexicon(name: str) -> Lexicon:
    if name not in BUNDLED_LEXICONS:
        raise KeyError(f"no bundled lexicon named {name!r}")
    ref = resources.files("pagetitles") / "data" / "lexicons" / f"{name}.txt"
    with resources.as_file(ref) as path:
        return load_lexicon(path, name)


def bundled_stop_titles() -> StopTitleSet:
    ref = resources.files("pagetitles") / "data" / "stop_titles.txt"
    with resources.as_file(ref) as path:
        return load_stop_titles(path, "stop_titles")


def lexicon_ratio(t: TokenizedTitle, lex: Lexicon) -> float:
    if not t.words:
        return 0.0
    hits = sum(1 for w in t.folded if w in lex.terms)
    return hits / t.word_count


@dataclass(frozen=True)
class StopTitleCoverage:
    word_ratio: float
    char_ratio: float
    matched_spans: tuple[tuple[int, int, tuple[str, ...]], ...]


def stop_title_coverage(t: TokenizedTitle, s: StopTitleSet) -> StopTitleCoverage:
    """Greedy left-to-right longest-phrase cover of the title's words.

    Spans are half-open word ranges ``(start, end, phrase)``. The character
    numerator counts each matched span's words plus the single spaces between
    them; the denominator is the whole trimmed title, spaces included.
    """
    n = t.word_count
    if n == 0 or not s.phrases:
        return StopTitleCoverage(0.0, 0.0, ())
    spans = []
    i = 0
    longest = s.max_len
    while i < n:
        for length in range(min(longest, n - i), 0, -1):
            candidate = t.folded[i:i + length]
            if candidate in s.phrases:
                spans.append((i, i + length, candidate))
                i += length
                break
        else:
            i += 1
    covered_words = sum(end - start for start, end, _ in spans)
    covered_chars = sum(
        sum(len(w) for w in t.words[start:end]) + (end - start - 1)
        for start, end, _ in spans
    )
    return StopTitleCoverage(covered_words / n, covered_chars / t.char_count, tuple(spans))


def coverage_percent(ratio: float) -> int:
    """Whole-percent display of a coverage ratio, truncated (2/3 shows as 66%)."""
    # the small epsilon keeps exact ratios such as 0.29 from flooring to 28
    return int(math.floor(ratio * 100 + 1e-9))


def is_exact_stop_title(t: TokenizedTitle, s: StopTitleSet) -> bool:
    return bool(t.folded) and t.folded in s.phrases


def duplicate_word_counts(t: TokenizedTitle) -> dict[str, int]:
    """Words occurring at least twice, case-folded, edge punctuation stripped.

    Tokens that are pure punctuation (``---``) are not words and are skipped.
    Result is ordered by descending count, then alphabetically.
    """
    counts = Counter()
    for w in t.folded:
        w = w.strip(string.punctuation)
        if w:
            counts[w] += 1
    dupes = [(w, c) for w, c in counts.items() if c >= 2]
    dupes.sort(key=lambda wc: (-wc[1], wc[0]))
    return dict(dupes)
