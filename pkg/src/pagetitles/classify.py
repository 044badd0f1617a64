"""Per-title feature vectors, single-feature threshold rules, sweeps and buckets."""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .corpus import Status, TitleRecord
from .stats import ConfusionMatrix
from .text import (Lexicon, StopTitleSet, is_exact_stop_title, lexicon_ratio, longest_word,
                   stop_title_coverage, tokenize)


class ClassifyError(ValueError):
    pass


class UnknownFeature(ClassifyError, KeyError):
    pass


class UnknownLexicon(ClassifyError, KeyError):
    pass


class UnlabeledRecord(ClassifyError):
    pass


STOP_TITLE_WORD = "stop_title_word"
STOP_TITLE_CHAR = "stop_title_char"
COUNT_FEATURES = ("word_count", "char_count", "longest_word", "exact_stop_title")


@dataclass(frozen=True)
class FeatureVector:
    word_count: int
    char_count: int
    longest_word: int
    ratios: Mapping[str, float]
    exact_stop_title: bool

    def __getitem__(self, feature_id: str) -> float:
        if feature_id in self.ratios:
            return self.ratios[feature_id]
        if feature_id in COUNT_FEATURES:
            return getattr(self, feature_id)
        raise UnknownFeature(feature_id)

    def feature_ids(self) -> list[str]:
        return list(COUNT_FEATURES) + list(self.ratios)

    def as_dict(self) -> dict:
        out = {"word_count": self.word_count, "char_count": self.char_count,
               "longest_word": self.longest_word, "exact_stop_title": self.exact_stop_title}
        out.update(self.ratios)
        return out

    @classmethod
    def from_dict(cls, obj: Mapping) -> "FeatureVector":
        ratios = {k: float(v) for k, v in obj.items() if k not in COUNT_FEATURES}
        return cls(int(obj["word_count"]), int(obj["char_count"]), int(obj["longest_word"]),
                   ratios, bool(obj["exact_stop_title"]))


def featurize(record: TitleRecord, lexicons: Sequence[Lexicon], stop_titles: StopTitleSet) -> FeatureVector:
    t = tokenize(record.title)
    ratios = {}
    for lex in lexicons:
        if lex is None:
            raise UnknownLexicon("configured lexicon is missing")
        if lex.name in ratios or lex.name in (STOP_TITLE_WORD, STOP_TITLE_CHAR) or lex.name in COUNT_FEATURES:
            raise ClassifyError(f"duplicate feature id {lex.name!r}")
        ratios[lex.name] = lexicon_ratio(t, lex)
    cov = stop_title_coverage(t, stop_titles)
    ratios[STOP_TITLE_WORD] = cov.word_ratio
    ratios[STOP_TITLE_CHAR] = cov.char_ratio
    return FeatureVector(t.word_count, t.char_count, longest_word(t), ratios,
                         is_exact_stop_title(t, stop_titles))


def resolve_lexicons(names: Iterable[str], available: Mapping[str, Lexicon]) -> list[Lexicon]:
    out = []
    for name in names:
        if name not in available:
            raise UnknownLexicon(name)
        out.append(available[name])
    return out


class Comparator(str, enum.Enum):
    GREATER_THAN = "gt"
    LESS_THAN = "lt"


def _opposite(label: Status) -> Status:
    return Status.NOT_FOUND if label is Status.FOUND else Status.FOUND


@dataclass(frozen=True)
class ThresholdRule:
    feature_id: str
    comparator: Comparator
    threshold: float
    label_when_true: Status = Status.NOT_FOUND

    def __post_init__(self):
        object.__setattr__(self, "comparator", Comparator(self.comparator))
        object.__setattr__(self, "label_when_true", Status(self.label_when_true))
        if self.label_when_true is Status.UNKNOWN:
            raise ClassifyError("a rule must assign found or not_found")
        if self.threshold != self.threshold or self.threshold in (float("inf"), float("-inf")):
            raise ClassifyError("threshold must be finite")

    def with_threshold(self, threshold: float) -> "ThresholdRule":
        return ThresholdRule(self.feature_id, self.comparator, threshold, self.label_when_true)

    def __str__(self) -> str:
        return (f"feature={self.feature_id} op={self.comparator.value} "
                f"threshold={self.threshold:g} label={self.label_when_true.value}")

    @classmethod
    def parse(cls, text: str) -> "ThresholdRule":
        """Parse ``feature=stop_title_word op=gt threshold=0.7 label=not_found``."""
        fields = {}
        for part in text.split():
            key, sep, value = part.partition("=")
            if not sep or not value:
                raise ClassifyError(f"bad rule token {part!r}")
            fields[key] = value
        missing = {"feature", "op", "threshold"} - fields.keys()
        if missing:
            raise ClassifyError(f"rule missing {sorted(missing)}")
        unknown = fields.keys() - {"feature", "op", "threshold", "label"}
        if unknown:
            raise ClassifyError(f"unknown rule keys {sorted(unknown)}")
        try:
            return cls(fields["feature"], Comparator(fields["op"]), float(fields["threshold"]),
                       Status(fields.get("label", "not_found")))
        except ValueError as exc:
            raise ClassifyError(str(exc)) from None


@dataclass(frozen=True)
class Prediction:
    uri: str
    predicted: Status


def threshold_predict(rule: ThresholdRule, fv: FeatureVector) -> Status:
    value = fv[rule.feature_id]
    if rule.comparator is Comparator.GREATER_THAN:
        holds = value > rule.threshold
    else:
        holds = value < rule.threshold
    return rule.label_when_true if holds else _opposite(rule.label_when_true)


def baseline_predict(records: Iterable[TitleRecord]) -> list[Prediction]:
    return [Prediction(r.uri, Status.FOUND) for r in records]


def predict_all(rule: ThresholdRule, records: Sequence[TitleRecord],
                features: Sequence[FeatureVector]) -> list[Prediction]:
    if len(records) != len(features):
        raise ClassifyError("records and features differ in length")
    return [Prediction(r.uri, threshold_predict(rule, fv)) for r, fv in zip(records, features)]


def confusion(predicted: Iterable[Status], actual: Iterable[Status]) -> ConfusionMatrix:
    tp = fp = fn = tn = 0
    for p, a in zip(predicted, actual, strict=True):
        if a is Status.UNKNOWN:
            raise UnlabeledRecord("record has no ground-truth status")
        if p is Status.FOUND:
            if a is Status.FOUND:
                tp += 1
            else:
                fp += 1
        elif a is Status.FOUND:
            fn += 1
        else:
            tn += 1
    return ConfusionMatrix(tp, fp, fn, tn)


def _require_labels(records: Sequence[TitleRecord]) -> None:
    for r in records:
        if r.status is Status.UNKNOWN:
            raise UnlabeledRecord(f"{r.uri} has no ground-truth status")


def evaluate_rule(rule: ThresholdRule, corpus: Sequence[TitleRecord],
                  features: Sequence[FeatureVector]) -> ConfusionMatrix:
    _require_labels(corpus)
    preds = predict_all(rule, corpus, features)
    return confusion((p.predicted for p in preds), (r.status for r in corpus))


def evaluate_baseline(corpus: Sequence[TitleRecord]) -> ConfusionMatrix:
    _require_labels(corpus)
    return confusion((p.predicted for p in baseline_predict(corpus)), (r.status for r in corpus))


def sweep(rule_template: ThresholdRule, thresholds: Sequence[float], corpus: Sequence[TitleRecord],
          features: Sequence[FeatureVector]) -> list[tuple[float, ConfusionMatrix]]:
    if any(b < a for a, b in zip(thresholds, thresholds[1:])):
        raise ClassifyError("thresholds must be ascending")
    return [(t, evaluate_rule(rule_template.with_threshold(t), corpus, features)) for t in thresholds]


_RANGE = re.compile(r"^\s*([-+\d.eE]+)\s*:\s*([-+\d.eE]+)\s*:\s*([-+\d.eE]+)\s*$")


def parse_thresholds(text: str) -> list[float]:
    """Either a comma list ``0.1,0.2`` or an inclusive range ``start:stop:step``.

    Range values are rounded to 10 decimals so ``0.05:1.0:0.05`` lands exactly
    on the printed thresholds.
    """
    m = _RANGE.match(text)
    if m:
        start, stop, step = (Fraction(g) for g in m.groups())
        if step <= 0:
            raise ClassifyError("range step must be positive")
        n = int((stop - start) / step)
        return [round(float(start + k * step), 10) for k in range(n + 1)]
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ClassifyError(f"bad threshold list {text!r}") from exc


@dataclass(frozen=True)
class BucketSpec:
    """Word-count bucket upper edges: buckets are [1..b1], (b1..b2], ..."""

    boundaries: tuple[int, ...]

    def __post_init__(self):
        b = tuple(self.boundaries)
        object.__setattr__(self, "boundaries", b)
        if not b:
            raise ClassifyError("bucket boundaries must be non-empty")
        if any(y <= x for x, y in zip(b, b[1:])):
            raise ClassifyError("bucket boundaries must be strictly ascending")

    def labels(self) -> list[tuple[int, int]]:
        lows = [1] + [e + 1 for e in self.boundaries[:-1]]
        return list(zip(lows, self.boundaries))

    def index(self, word_count: int) -> int | None:
        for k, (lo, hi) in enumerate(self.labels()):
            if lo <= word_count <= hi:
                return k
        return None


@dataclass(frozen=True)
class BucketRate:
    low: int
    high: int
    found: int
    not_found: int

    @property
    def total(self) -> int:
        return self.found + self.not_found

    @property
    def fraction_found(self) -> Fraction | None:
        return Fraction(self.found, self.total) if self.total else None

    @property
    def label(self) -> str:
        return str(self.low) if self.low == self.high else f"{self.low}-{self.high}"


def bucket_success_rates(corpus: Sequence[TitleRecord], spec: BucketSpec,
                         word_counts: Sequence[int] | None = None) -> list[BucketRate]:
    """Found/not-found tallies per word-count bucket.

    Titles outside every bucket (including empty titles when the first bucket
    starts at 1) are not counted; give a final edge at least the longest title
    to cover the whole corpus.
    """
    _require_labels(corpus)
    if word_counts is None:
        word_counts = [tokenize(r.title).word_count for r in corpus]
    tallies = [[0, 0] for _ in spec.boundaries]
    for record, wc in zip(corpus, word_counts, strict=True):
        k = spec.index(wc)
        if k is not None:
            tallies[k][0 if record.status is Status.FOUND else 1] += 1
    return [BucketRate(lo, hi, f, n) for (lo, hi), (f, n) in zip(spec.labels(), tallies)]
