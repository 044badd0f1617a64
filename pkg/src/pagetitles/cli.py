"""``pagetitles`` command line: ingest, featurize, classify, evaluate, sweep, report, query.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 unlabeled data,
5 every provider query failed.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import random
import sys
from collections import Counter
from contextlib import contextmanager
from datetime import datetime, timezone
from pathlib import Path

from . import classify, corpus, report, search, stats, text

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_DATA, EXIT_PROVIDER = 0, 2, 3, 4, 5
DEFAULT_SEED = 20100101


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _config_error(msg: str) -> CliError:
    return CliError(msg, EXIT_CONFIG)


# ---------------------------------------------------------------- config

def _parse_lexicon_flag(value: str) -> tuple[str, Path]:
    name, sep, path = value.partition("=")
    if not sep or not name or not path:
        raise argparse.ArgumentTypeError(f"expected NAME=PATH, got {value!r}")
    return name, Path(path)


def _global_flags(with_defaults: bool = True) -> argparse.ArgumentParser:
    # Subcommands re-declare the flags with suppressed defaults so a flag given
    # before the subcommand is not reset by the subparser.
    p = argparse.ArgumentParser(add_help=False, argument_default=None if with_defaults else argparse.SUPPRESS)
    g = p.add_argument_group("global options")
    g.add_argument("--corpus", type=Path, help="corpus JSONL (input; output for ingest)")
    g.add_argument("--lexicon", action="append", type=_parse_lexicon_flag,
                   metavar="NAME=PATH", help="lexicon file, repeatable (default: bundled lexicons)")
    g.add_argument("--stop-titles", type=Path, help="stop-title file (default: bundled)")
    g.add_argument("--out", type=Path, help="output directory (default: out)")
    g.add_argument("--seed", type=int, help=f"seed for --sample (default: {DEFAULT_SEED})")
    g.add_argument("--sample", type=int, help="work on a seeded random sample of N records")
    g.add_argument("--provider", type=Path, help="search provider config (JSON)")
    g.add_argument("-v", "--verbose", action="store_true")
    return p


def _require_file(path: Path | None, what: str) -> Path:
    if path is None:
        raise _config_error(f"{what} is required")
    if not path.is_file():
        raise _config_error(f"{what} not found: {path}")
    return path


def _lexicons(args) -> list[text.Lexicon]:
    if not args.lexicon:
        return [text.bundled_lexicon(n) for n in text.BUNDLED_LEXICONS]
    out = []
    for name, path in args.lexicon:
        _require_file(path, f"lexicon {name}")
        try:
            out.append(text.load_lexicon(path, name))
        except text.LexiconError as exc:
            raise _config_error(str(exc)) from None
    return out


def _stop_titles(args) -> text.StopTitleSet:
    if args.stop_titles is None:
        return text.bundled_stop_titles()
    _require_file(args.stop_titles, "stop-title file")
    try:
        return text.load_stop_titles(args.stop_titles)
    except text.LexiconError as exc:
        raise _config_error(str(exc)) from None


def _load_corpus(args) -> list[corpus.TitleRecord]:
    path = _require_file(args.corpus, "--corpus")
    try:
        records = corpus.load_corpus(path)
    except corpus.ParseError as exc:
        raise CliError(f"{path}: {exc}", EXIT_IO) from None
    except OSError as exc:
        raise CliError(str(exc), EXIT_IO) from None
    if args.sample is not None and args.sample < len(records):
        rng = random.Random(args.seed)
        keep = sorted(rng.sample(range(len(records)), args.sample))
        records = [records[i] for i in keep]
    return records


def _require_labels(records) -> None:
    unlabeled = sum(1 for r in records if r.status is corpus.Status.UNKNOWN)
    if unlabeled:
        raise CliError(f"{unlabeled} record(s) have unknown status; label the corpus first", EXIT_DATA)


@contextmanager
def _locked(out: Path):
    try:
        out.mkdir(parents=True, exist_ok=True)
        fd = os.open(out / ".lock", os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise CliError(f"{out} is locked by another run (remove {out / '.lock'} if stale)", EXIT_IO) from None
    except OSError as exc:
        raise CliError(str(exc), EXIT_IO) from None
    try:
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        yield out
    finally:
        (out / ".lock").unlink(missing_ok=True)


def _write(path: Path, body: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(body)


def _write_metadata(out: Path, command: str, **extra) -> None:
    meta = {"command": command, "finished_at": datetime.now(timezone.utc).isoformat(), **extra}
    _write(out / f"{command}.metadata.json", json.dumps(meta, indent=1, sort_keys=True) + "\n")


def _features(args, records) -> list[classify.FeatureVector]:
    """Reuse ``<out>/features.jsonl`` when it covers the corpus, else compute."""
    cached = args.out / "features.jsonl"
    if getattr(args, "features", None):
        cached = _require_file(args.features, "--features")
    if cached.is_file():
        by_uri = {}
        with open(cached, encoding="utf-8") as fh:
            for line in fh:
                obj = json.loads(line)
                uri = obj.pop("uri")
                by_uri[uri] = classify.FeatureVector.from_dict(obj)
        if all(r.uri in by_uri for r in records):
            return [by_uri[r.uri] for r in records]
    lexicons, stop = _lexicons(args), _stop_titles(args)
    return [classify.featurize(r, lexicons, stop) for r in records]


def _rule(value: str) -> classify.ThresholdRule:
    try:
        return classify.ThresholdRule.parse(value)
    except classify.ClassifyError as exc:
        raise _config_error(f"bad --rule: {exc}") from None


def _check_feature(rule: classify.ThresholdRule, features) -> None:
    if features and rule.feature_id not in features[0].feature_ids():
        raise _config_error(f"unknown feature {rule.feature_id!r}; "
                            f"available: {', '.join(features[0].feature_ids())}")


# ---------------------------------------------------------------- commands

def cmd_ingest(args) -> int:
    if args.corpus is None:
        raise _config_error("--corpus (output path) is required")
    if args.snapshots is not None and not args.snapshots.is_dir():
        raise _config_error(f"snapshot directory not found: {args.snapshots}")
    if args.uris is not None:
        _require_file(args.uris, "--uris")
    if args.labels is not None:
        _require_file(args.labels, "--labels")
    config = corpus.FilterConfig(args.min_words, not args.allow_non_english, args.english_threshold)

    snapshots, failures = [], []
    if args.snapshots is not None:
        store = corpus.SnapshotStore(args.snapshots)
        for uri in store.uris():
            try:
                snapshots.append(store.get(uri))
            except corpus.MalformedHtml as exc:
                failures.append((uri, f"MalformedHtml: {exc}"))
            except OSError as exc:
                failures.append((uri, f"IoError: {exc}"))
    if args.uris is not None:
        with open(args.uris, encoding="utf-8") as fh:
            uris = [u.strip() for u in fh if u.strip() and not u.startswith("#")]
        for uri in uris:
            try:
                snapshots.append(corpus.fetch_snapshot(uri))
            except Exception as exc:  # per-record failures are reported, never fatal
                failures.append((uri, f"FetchError: {exc}"))

    kept, rejected = corpus.apply_filters(corpus.records_from_snapshots(snapshots), config)
    if args.labels is not None:
        labels = {}
        with open(args.labels, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    obj = json.loads(line)
                    labels[obj["uri"]] = corpus.Status(obj["status"])
        kept = [r.with_status(labels.get(r.uri, r.status)) for r in kept]

    try:
        if args.corpus.parent != Path(""):
            args.corpus.parent.mkdir(parents=True, exist_ok=True)
        corpus.save_corpus(kept, args.corpus)
        with _locked(args.out) as out:
            _write(out / "rejected.jsonl", "".join(
                json.dumps({"uri": r.uri, "reason": reason.value}) + "\n" for r, reason in rejected))
            _write_metadata(out, "ingest", kept=len(kept), rejected=len(rejected), failures=len(failures))
    except OSError as exc:
        raise CliError(str(exc), EXIT_IO) from None

    reasons = Counter(reason.value for _, reason in rejected)
    print(f"kept {len(kept)}")
    print(f"rejected {len(rejected)}" + "".join(f" {k}={v}" for k, v in sorted(reasons.items())))
    flagged = sum(1 for r in kept if r.empty_title)
    if flagged:
        print(f"empty-title records kept (flagged) {flagged}")
    for uri, msg in failures:
        print(f"failed {uri}: {msg}", file=sys.stderr)
    return EXIT_OK


def cmd_featurize(args) -> int:
    records = _load_corpus(args)
    lexicons, stop = _lexicons(args), _stop_titles(args)
    lines = []
    for r in records:
        fv = classify.featurize(r, lexicons, stop)
        lines.append(json.dumps({"uri": r.uri, **fv.as_dict()}) + "\n")
    with _locked(args.out) as out:
        _write(out / "features.jsonl", "".join(lines))
        _write_metadata(out, "featurize", records=len(records), lexicons=[x.name for x in lexicons])
    print(f"featurized {len(records)} records -> {args.out / 'features.jsonl'}")
    return EXIT_OK


def cmd_classify(args) -> int:
    records = _load_corpus(args)
    features = _features(args, records)
    if args.rule:
        rule = _rule(args.rule)
        _check_feature(rule, features)
        preds = classify.predict_all(rule, records, features)
    else:
        preds = classify.baseline_predict(records)
    with _locked(args.out) as out:
        _write(out / "predictions.jsonl", "".join(
            json.dumps({"uri": p.uri, "predicted": p.predicted.value}) + "\n" for p in preds))
        _write_metadata(out, "classify", rule=args.rule or "baseline")
    counts = Counter(p.predicted.value for p in preds)
    print(" ".join(f"{k}={v}" for k, v in sorted(counts.items())))
    return EXIT_OK


def cmd_evaluate(args) -> int:
    rule = _rule(args.rule)
    records = _load_corpus(args)
    _require_labels(records)
    if not records:
        raise CliError("corpus is empty", EXIT_DATA)
    features = _features(args, records)
    _check_feature(rule, features)
    matrix = classify.evaluate_rule(rule, records, features)
    baseline = classify.evaluate_baseline(records)
    body = report.render_confusion(matrix, str(rule)).body
    s = stats.matrix_stats(matrix)
    body += f"percent_match={s.percent_match}%\n"
    try:
        p = stats.compare_to_baseline(matrix, baseline)
        body += f"fisher_vs_baseline p={p:.6g}\n"
    except stats.DegenerateTable:
        body += "fisher_vs_baseline p=undefined\n"
    with _locked(args.out) as out:
        _write(out / "evaluate.txt", body)
        _write_metadata(out, "evaluate", rule=str(rule))
    sys.stdout.write(body)
    return EXIT_OK


def cmd_sweep(args) -> int:
    records = _load_corpus(args)
    _require_labels(records)
    try:
        thresholds = classify.parse_thresholds(args.thresholds)
        template = classify.ThresholdRule(args.feature, args.op, 0.0, args.label)
    except (classify.ClassifyError, ValueError) as exc:
        raise _config_error(str(exc)) from None
    features = _features(args, records)
    _check_feature(template, features)
    try:
        rows = classify.sweep(template, thresholds, records, features)
    except classify.ClassifyError as exc:
        raise _config_error(str(exc)) from None
    body = report.render_sweep_csv(rows).body
    with _locked(args.out) as out:
        _write(out / "sweep.csv", body)
        if args.tables:
            _write(out / "sweep_tables.txt", "\n".join(
                report.render_confusion(m, str(template.with_threshold(t))).body for t, m in rows))
        _write_metadata(out, "sweep", feature=args.feature, thresholds=thresholds)
    sys.stdout.write(body)
    return EXIT_OK


def _parse_buckets(value: str) -> classify.BucketSpec:
    try:
        return classify.BucketSpec(tuple(int(v) for v in value.split(",")))
    except (ValueError, classify.ClassifyError) as exc:
        raise _config_error(f"bad --buckets: {exc}") from None


def cmd_report(args) -> int:
    records = _load_corpus(args)
    _require_labels(records)
    if not records:
        raise CliError("corpus is empty", EXIT_DATA)
    tokenized = [text.tokenize(r.title) for r in records]
    words = [t.word_count for t in tokenized]
    chars = [t.char_count for t in tokenized]
    found = [r.status is corpus.Status.FOUND for r in records]

    block = report.render_stats_block({
        "words": stats.descriptive(words),
        "chars": stats.descriptive(chars),
        "words[found]": stats.descriptive([w for w, f in zip(words, found) if f] or [0]),
        "words[not_found]": stats.descriptive([w for w, f in zip(words, found) if not f] or [0]),
    }, f"corpus n={len(records)} found={sum(found)} not_found={len(found) - sum(found)}")

    buckets = _parse_buckets(args.buckets)
    longest = max(words)
    if buckets.boundaries[-1] < longest:
        buckets = classify.BucketSpec(buckets.boundaries + (longest,))
    rates = classify.bucket_success_rates(records, buckets, words)
    per_count = classify.bucket_success_rates(
        records, classify.BucketSpec(tuple(range(1, longest + 1))), words) if longest else []

    dupes = Counter()
    for t in tokenized:
        dupes.update(text.duplicate_word_counts(t))
    top = "".join(f"{c} {w}\n" for w, c in sorted(dupes.items(), key=lambda wc: (-wc[1], wc[0]))[:args.top])

    with _locked(args.out) as out:
        _write(out / "stats.txt", block.body)
        _write(out / "words_hist.csv", report.render_histogram_csv(stats.histogram(words), "words").body)
        _write(out / "chars_hist.csv", report.render_histogram_csv(stats.histogram(chars), "chars").body)
        _write(out / "buckets.txt", report.render_bucket_table(rates, "success rate by title length",
                                                              stats.truncate_percent).body
               + "\n" + report.render_bucket_table([r for r in per_count if r.total], "per word count").body)
        _write(out / "buckets.csv", report.render_bucket_csv(rates))
        _write(out / "duplicate_words.txt", top)
        experiment = args.experiment or (out / "experiment.jsonl")
        if experiment.is_file():
            _write(out / "scatter.csv", _scatter_from_experiment(experiment))
        _write_metadata(out, "report", records=len(records))
    sys.stdout.write(block.body)
    sys.stdout.write(report.render_bucket_table(rates, percent=stats.truncate_percent).body)
    return EXIT_OK


SCATTER_HEADER = ("uri", "or_count", "and_count", "quoted_count", "or_over_quoted", "and_over_quoted", "status")


def _cell(value) -> str:
    if value is None:
        return ""
    if value is search.UNDEFINED:
        return "undefined"
    return report.fmt_float(value) if isinstance(value, float) else str(value)


def _scatter_rows(outcomes, statuses) -> str:
    rows = []
    for o, status in zip(outcomes, statuses):
        rows.append((o.record.uri, _cell(o.count(search.QueryMode.OR)), _cell(o.count(search.QueryMode.AND)),
                     _cell(o.count(search.QueryMode.QUOTED)), _cell(o.or_over_quoted),
                     _cell(o.and_over_quoted), status.value))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCATTER_HEADER)
    w.writerows(rows)
    return buf.getvalue()


def _scatter_from_experiment(path: Path) -> str:
    by_uri: dict[str, search.RecordOutcome] = {}
    statuses: dict[str, corpus.Status] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            obj = json.loads(line)
            uri = obj["uri"]
            outcome = by_uri.setdefault(uri, search.RecordOutcome(corpus.TitleRecord(uri, obj.get("title", ""))))
            if "response" in obj:
                mode = search.QueryMode(obj["mode"])
                outcome.responses[mode] = search.SearchResponse.from_json(obj["response"])
            if obj.get("mode") == search.QueryMode.OR.value and "judgment" in obj:
                statuses[uri] = corpus.Status(obj["judgment"]["status"])
    uris = list(by_uri)
    return _scatter_rows([by_uri[u] for u in uris], [statuses.get(u, corpus.Status.UNKNOWN) for u in uris])


def cmd_query(args) -> int:
    records = _load_corpus(args)
    provider_path = _require_file(args.provider, "--provider")
    try:
        provider = search.load_provider(provider_path)
        modes = [search.QueryMode(m) for m in args.modes.split(",") if m]
    except (ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        raise _config_error(f"bad provider config or modes: {exc}") from None
    except OSError as exc:
        raise CliError(str(exc), EXIT_IO) from None

    with _locked(args.out) as out:
        cache = search.ResponseCache(out / "cache")
        client = search.SearchClient(provider, cache)
        result = search.run_experiment(records, client, modes, args.k)
        judge_mode = search.QueryMode(args.judge_mode)

        lines, labeled, statuses = [], [], []
        for o in result.outcomes:
            for mode in modes:
                obj = {"uri": o.record.uri, "title": o.record.title, "mode": mode.value}
                if mode in o.responses:
                    resp = o.responses[mode].to_json()
                    resp.pop("retrieved_at")
                    obj["response"] = resp
                    j = o.judgments[mode]
                    obj["judgment"] = {"status": j.status.value, "rank": j.rank}
                else:
                    obj["error"] = o.errors[mode]
                lines.append(json.dumps(obj, ensure_ascii=False, sort_keys=True) + "\n")
            status = search.experiment_status(o, judge_mode)
            statuses.append(status)
            labeled.append(o.record.with_status(status) if status is not corpus.Status.UNKNOWN else o.record)

        _write(out / "experiment.jsonl", "".join(lines))
        _write(out / "scatter.csv", _scatter_rows(result.outcomes, statuses))
        corpus.save_corpus(labeled, out / "corpus.labeled.jsonl")
        _write_metadata(out, "query", provider=provider.name, provider_calls=client.provider_calls,
                        failures=len(result.failures), retrieved_at=sorted({
                            r.retrieved_at for o in result.outcomes for r in o.responses.values()}))

    print(f"queried {len(records)} titles in modes {','.join(m.value for m in modes)}; "
          f"provider calls {client.provider_calls}; failures {len(result.failures)}")
    for uri, mode, msg in result.failures:
        print(f"warning: {uri} [{mode.value}] {msg}", file=sys.stderr)
    if result.all_failed:
        return EXIT_PROVIDER
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pagetitles", parents=[_global_flags()],
                                     description="Judge web page titles as rediscovery queries.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, parents=[_global_flags(with_defaults=False)], help=help_)
        p.set_defaults(func=func)
        return p

    p = add("ingest", cmd_ingest, "extract titles from page snapshots and filter the corpus")
    p.add_argument("--snapshots", type=Path, help="snapshot store directory")
    p.add_argument("--uris", type=Path, help="file of URIs to fetch, one per line")
    p.add_argument("--labels", type=Path, help="JSONL of {uri, status} ground-truth labels")
    p.add_argument("--min-words", type=int, default=50)
    p.add_argument("--english-threshold", type=float, default=0.02)
    p.add_argument("--allow-non-english", action="store_true")

    add("featurize", cmd_featurize, "compute per-title feature vectors")

    p = add("classify", cmd_classify, "predict found/not-found with one threshold rule")
    p.add_argument("--rule", help="e.g. 'feature=stop_title_word op=gt threshold=0.7 label=not_found' "
                                  "(default: all-found baseline)")
    p.add_argument("--features", type=Path)

    p = add("evaluate", cmd_evaluate, "confusion table and Fisher test against the baseline")
    p.add_argument("--rule", required=True)
    p.add_argument("--features", type=Path)

    p = add("sweep", cmd_sweep, "evaluate one rule across a threshold ladder")
    p.add_argument("--feature", default=classify.STOP_TITLE_WORD)
    p.add_argument("--op", choices=["gt", "lt"], default="gt")
    p.add_argument("--label", choices=["found", "not_found"], default="not_found")
    p.add_argument("--thresholds", default="0.05:1.0:0.05", help="'a,b,c' or 'start:stop:step'")
    p.add_argument("--tables", action="store_true", help="also write per-threshold confusion tables")
    p.add_argument("--features", type=Path)

    p = add("report", cmd_report, "descriptive stats, histograms, bucket rates, duplicate words")
    p.add_argument("--buckets", default="10,20,50", help="bucket upper edges")
    p.add_argument("--top", type=int, default=20, help="duplicate words to list")
    p.add_argument("--experiment", type=Path, help="experiment JSONL from 'query'")

    p = add("query", cmd_query, "run title queries against a search provider")
    p.add_argument("--modes", default="or,and,quoted")
    p.add_argument("--judge-mode", default="or", choices=[m.value for m in search.QueryMode])
    p.add_argument("-k", type=int, default=10)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    args.lexicon = args.lexicon or []
    args.out = args.out or Path("out")
    args.seed = DEFAULT_SEED if args.seed is None else args.seed
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (classify.UnlabeledRecord,) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
