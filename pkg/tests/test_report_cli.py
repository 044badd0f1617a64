import csv
import io
import json
import math
import re

import pytest
from hypothesis import given, strategies as st

from pagetitles.classify import BucketRate
from pagetitles.cli import main
from pagetitles.corpus import Status, TitleRecord, save_corpus
from pagetitles.report import (Layout, parse_confusion, render_bucket_table, render_confusion,
                               render_histogram_csv, render_sweep_csv)
from pagetitles.stats import ConfusionMatrix, truncate_percent

from reference_data import FISHER_P, MATRICES, labeled_word_counts

ARTIFACTS = ("features.jsonl", "predictions.jsonl", "evaluate.txt", "stats.txt", "words_hist.csv",
             "chars_hist.csv", "buckets.txt", "buckets.csv", "duplicate_words.txt", "rejected.jsonl")


def test_render_confusion_layout():
    table = render_confusion(ConfusionMatrix(4753, 3, 2036, 365), "stop title word > 0.7")
    assert table.layout is Layout.CONFUSION_TABLE
    lines = table.body.splitlines()
    assert lines[0] == "stop title word > 0.7"
    assert lines[1].split() == ["Actual", "Total", "Percent"]
    assert lines[3].split() == ["Predicted", "found", "4753", "3", "2039", "28"]
    assert lines[4].split() == ["not", "found", "2036", "365", "Match", "Match"]
    assert lines[5].split() == ["5118", "72%"]


@given(st.tuples(*[st.integers(0, 10**6)] * 4).filter(lambda t: sum(t) > 0))
def test_confusion_round_trip(counts):
    m = ConfusionMatrix(*counts)
    assert parse_confusion(render_confusion(m).body) == m


def test_parse_confusion_rejects_other_text():
    with pytest.raises(ValueError):
        parse_confusion("nothing here\n")


def test_sweep_and_histogram_csv():
    body = render_sweep_csv([(0.05, ConfusionMatrix(1, 2, 3, 4))]).body
    rows = list(csv.reader(io.StringIO(body)))
    assert rows[0] == ["threshold", "tp", "fp", "fn", "tn", "match", "mismatch", "percent_match"]
    assert rows[1] == ["0.05", "1", "2", "3", "4", "5", "5", "50.0"]
    hist = render_histogram_csv([(1, 3), (2, 0)], "words").body
    assert hist == "words,count\n1,3\n2,0\n"


def test_bucket_table_display_rules():
    rates = [BucketRate(1, 10, 4033, 1607), BucketRate(11, 20, 666, 358), BucketRate(51, 60, 0, 0)]
    rounded = render_bucket_table(rates).body
    truncated = render_bucket_table(rates, percent=truncate_percent).body
    assert "72%" in rounded.splitlines()[1] and "71%" in truncated.splitlines()[1]
    assert truncated.splitlines()[2].split() == ["11-20", "666", "358", "65%"]
    assert truncated.splitlines()[3].split()[-1] == "-"


# ---------------------------------------------------------------- CLI helpers

def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def snapshot_outputs(out_dir):
    return {p.name: p.read_bytes() for p in sorted(out_dir.iterdir())
            if p.is_file() and not p.name.endswith(".metadata.json")}


def write_matrix_corpus(path, found_pred_found, found_pred_nf, nf_pred_found, nf_pred_nf):
    """Corpus plus a one-word lexicon: titles containing "very" score 0.5, others 0.

    With rule ``very lt 0.13`` the "very" titles are predicted found.
    """
    records = []
    for n, title, status in [(found_pred_found, "very good {}", Status.FOUND),
                             (found_pred_nf, "plain {}", Status.FOUND),
                             (nf_pred_found, "very odd {}", Status.NOT_FOUND),
                             (nf_pred_nf, "dull {}", Status.NOT_FOUND)]:
        records += [TitleRecord(f"http://h{len(records) + k}.example/", title.format(k), status)
                    for k in range(n)]
    save_corpus(records, path)
    lex = path.parent / "very.txt"
    lex.write_text("very\n")
    return lex


# The published matrices list actual found first, so their cells realise a
# corpus with 4756 found / 2401 not found as (pf_af, pnf_af, pf_anf, pnf_anf).
@pytest.mark.parametrize("name,pct", [("adverbs_lt_0.13", 66), ("stopword_superset_lt_0.35", 60)])
def test_cli_evaluate_reproduces_published_p(tmp_path, capsys, name, pct):
    a, b, c, d = MATRICES[name][0]
    corpus = tmp_path / "corpus.jsonl"
    lex = write_matrix_corpus(corpus, a, b, c, d)
    code, out, _ = run(capsys, "--corpus", corpus, "--lexicon", f"very={lex}", "--out", tmp_path / "o",
                       "evaluate", "--rule", "feature=very op=lt threshold=0.13 label=not_found")
    assert code == 0
    assert f"percent_match={pct}%" in out
    p = float(re.search(r"fisher_vs_baseline p=(\S+)", out).group(1))
    expected = FISHER_P[name]
    if expected > 0.01:
        assert abs(p - expected) <= 0.0005
    else:
        assert abs(math.log(p / expected)) <= math.log(1.1)
    body = (tmp_path / "o" / "evaluate.txt").read_text()
    assert parse_confusion(body) == ConfusionMatrix(a, c, b, d)


def test_cli_evaluate_baseline_rule_p_one(fixtures, tmp_path, capsys):
    code, out, _ = run(capsys, "--corpus", fixtures / "corpus200.jsonl", "--out", tmp_path,
                       "evaluate", "--rule", "feature=stop_title_word op=gt threshold=1.0")
    assert code == 0 and "fisher_vs_baseline p=1\n" in out


def test_cli_exit_codes(fixtures, tmp_path, capsys):
    good = fixtures / "corpus200.jsonl"
    rule = "feature=stop_title_word op=gt threshold=0.7"
    assert run(capsys, "--corpus", tmp_path / "missing.jsonl", "--out", tmp_path, "featurize")[0] == 2
    assert run(capsys, "--corpus", good, "--out", tmp_path, "evaluate", "--rule", "feature=x op=ge")[0] == 2
    assert run(capsys, "--corpus", good, "--out", tmp_path, "evaluate",
               "--rule", "feature=nope op=gt threshold=1")[0] == 2
    assert run(capsys, "--corpus", good, "--lexicon", "x=" + str(tmp_path / "nolex.txt"), "--out", tmp_path,
               "featurize")[0] == 2
    assert run(capsys, "nosuchcommand")[0] == 2
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"uri": "http://a.example/", "title": "x", "status": "found"}\n{broken\n')
    code, _, err = run(capsys, "--corpus", bad, "--out", tmp_path, "featurize")
    assert code == 3 and ("line 2" in err or ":2" in err)
    unlabeled = tmp_path / "unlabeled.jsonl"
    save_corpus([TitleRecord("http://a.example/", "home")], unlabeled)
    assert run(capsys, "--corpus", unlabeled, "--out", tmp_path, "evaluate", "--rule", rule)[0] == 4
    assert run(capsys, "--corpus", unlabeled, "--out", tmp_path, "featurize")[0] == 0


def test_cli_lock_file(fixtures, tmp_path, capsys):
    out = tmp_path / "o"
    out.mkdir()
    (out / ".lock").write_text("999")
    code, _, err = run(capsys, "--corpus", fixtures / "corpus200.jsonl", "--out", out, "featurize")
    assert code == 3 and "locked" in err
    (out / ".lock").unlink()
    assert run(capsys, "--corpus", fixtures / "corpus200.jsonl", "--out", out, "featurize")[0] == 0
    assert not (out / ".lock").exists()


def test_cli_global_flags_after_subcommand(fixtures, tmp_path, capsys):
    code, _, _ = run(capsys, "featurize", "--corpus", fixtures / "corpus200.jsonl", "--out", tmp_path)
    assert code == 0 and (tmp_path / "features.jsonl").is_file()


def test_cli_ingest_two_pages(tmp_path, capsys):
    from pagetitles.corpus import SnapshotStore

    store = SnapshotStore(tmp_path / "snaps")
    store.put("http://short.example/", b"<title>Short</title><p>too few words</p>")
    body = " ".join(["the river runs past the old mill"] * 10)
    store.put("http://long.example/", f"<title>Long</title><p>{body}</p>".encode())
    code, out, _ = run(capsys, "--corpus", tmp_path / "c.jsonl", "--out", tmp_path / "o", "ingest",
                       "--snapshots", tmp_path / "snaps")
    assert code == 0
    assert "kept 1" in out and "rejected 1 TooFewWords=1" in out
    rejected = (tmp_path / "o" / "rejected.jsonl").read_text().splitlines()
    assert json.loads(rejected[0]) == {"uri": "http://short.example/", "reason": "TooFewWords"}


def test_cli_ingest_empty_input(tmp_path, capsys):
    from pagetitles.corpus import SnapshotStore

    (tmp_path / "snaps").mkdir()
    assert SnapshotStore(tmp_path / "snaps").uris() == []
    code, out, _ = run(capsys, "--corpus", tmp_path / "c.jsonl", "--out", tmp_path / "o", "ingest",
                       "--snapshots", tmp_path / "snaps")
    assert code == 0 and "kept 0" in out
    assert (tmp_path / "c.jsonl").read_text() == ""
    code, _, _ = run(capsys, "--corpus", tmp_path / "c.jsonl", "--out", tmp_path / "o", "ingest",
                     "--snapshots", tmp_path / "absent")
    assert code == 2


def test_cli_ingest_fixture_crawl_matches_shipped_corpus(fixtures, tmp_path, capsys):
    code, out, _ = run(capsys, "--corpus", tmp_path / "c.jsonl", "--out", tmp_path / "o", "ingest",
                       "--snapshots", fixtures / "crawl200", "--labels", fixtures / "crawl200_labels.jsonl")
    assert code == 0
    assert "kept 200" in out and "rejected 5 NonEnglish=2 TooFewWords=3" in out
    assert (tmp_path / "c.jsonl").read_bytes() == (fixtures / "corpus200.jsonl").read_bytes()


def test_cli_sweep_rows_and_baseline(fixtures, tmp_path, capsys):
    corpus = fixtures / "corpus200.jsonl"
    code, out, _ = run(capsys, "--corpus", corpus, "--out", tmp_path, "sweep", "--tables")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO((tmp_path / "sweep.csv").read_text())))
    assert len(rows) == 20 and rows[-1]["threshold"] == "1.0"
    nf = [int(r["fn"]) + int(r["tn"]) for r in rows]
    assert all(b <= a for a, b in zip(nf, nf[1:]))
    run(capsys, "--corpus", corpus, "--out", tmp_path / "b", "evaluate",
        "--rule", "feature=stop_title_word op=gt threshold=1.0")
    base = parse_confusion((tmp_path / "b" / "evaluate.txt").read_text())
    last = rows[-1]
    assert (int(last["tp"]), int(last["fp"]), int(last["fn"]), int(last["tn"])) == (base.tp, base.fp, 0, 0)
    assert (tmp_path / "sweep_tables.txt").read_text().count("Predicted") == 20


def test_cli_report_table12_corpus(tmp_path, capsys):
    records = [TitleRecord(f"http://h{i}.example/", " ".join(["w"] * wc), Status.FOUND if f else Status.NOT_FOUND)
               for i, (wc, f) in enumerate(labeled_word_counts())]
    save_corpus(records, tmp_path / "c.jsonl")
    code, out, _ = run(capsys, "--corpus", tmp_path / "c.jsonl", "--out", tmp_path / "o", "report")
    assert code == 0
    table = (tmp_path / "o" / "buckets.txt").read_text()
    coarse = {line.split()[0]: line.split()[-1] for line in table.splitlines()[2:6]}
    assert coarse["1-10"] == "71%" and coarse["11-20"] == "65%"
    per_count = {line.split()[0]: line.split()[-1] for line in table.split("per word count")[1].splitlines()[2:]}
    assert per_count["1"] == "61%" and per_count["3"] == "73%"
    hist = list(csv.reader(io.StringIO((tmp_path / "o" / "words_hist.csv").read_text())))[1:]
    assert sum(int(c) for _, c in hist) == len(records)


def test_cli_report_single_record(tmp_path, capsys):
    save_corpus([TitleRecord("http://a.example/", "one two three", Status.FOUND)], tmp_path / "c.jsonl")
    code, out, _ = run(capsys, "--corpus", tmp_path / "c.jsonl", "--out", tmp_path / "o", "report")
    assert code == 0
    assert "words: n=1 mean=3.0000 std_dev=0.0000" in (tmp_path / "o" / "stats.txt").read_text()


def test_cli_query_fixture_and_rerun(fixtures, tmp_path, capsys):
    args = ("--corpus", fixtures / "experiment3.jsonl", "--provider", fixtures / "fixture_provider.json",
            "--out", tmp_path, "query")
    code, out, _ = run(capsys, *args)
    assert code == 0 and "provider calls 9" in out
    first = snapshot_outputs(tmp_path)
    labeled = [json.loads(l)["status"] for l in (tmp_path / "corpus.labeled.jsonl").read_text().splitlines()]
    assert labeled == ["found", "not_found", "found"]
    lines = [json.loads(l) for l in (tmp_path / "experiment.jsonl").read_text().splitlines()]
    assert len(lines) == 9
    assert [l["judgment"]["rank"] for l in lines if l["mode"] == "or"] == [2, None, 3]
    scatter = (tmp_path / "scatter.csv").read_text().splitlines()
    assert scatter[0] == "uri,or_count,and_count,quoted_count,or_over_quoted,and_over_quoted,status"
    assert scatter[2].endswith(",9120000000,9120000000,0,undefined,undefined,not_found")
    code, out, _ = run(capsys, *args)
    assert code == 0 and "provider calls 0" in out
    assert snapshot_outputs(tmp_path) == first


def test_cli_query_offline_http_provider(tmp_path, capsys):
    cfg = tmp_path / "http.json"
    cfg.write_text(json.dumps({"type": "http", "name": "offline", "endpoint": "http://127.0.0.1:9/search",
                               "requests_per_second": 1000, "timeout": 2}))
    save_corpus([TitleRecord("http://a.example/", "Tenet Group Home Page")], tmp_path / "c.jsonl")
    code, _, err = run(capsys, "--corpus", tmp_path / "c.jsonl", "--provider", cfg, "--out", tmp_path / "o",
                       "query", "--modes", "or")
    assert code == 5
    assert "ProviderError" in err
    assert (tmp_path / "o" / "experiment.jsonl").is_file()


def test_cli_seeded_sample_is_reproducible(fixtures, tmp_path, capsys):
    for d in ("a", "b"):
        run(capsys, "--corpus", fixtures / "corpus200.jsonl", "--sample", 25, "--seed", 3, "--out", tmp_path / d,
            "featurize")
    a = (tmp_path / "a" / "features.jsonl").read_bytes()
    assert a == (tmp_path / "b" / "features.jsonl").read_bytes() and a.count(b"\n") == 25


def test_cli_pipeline_byte_identical(fixtures, tmp_path, capsys):
    for d in ("run1", "run2"):
        out = tmp_path / d
        corpus = out / "corpus.jsonl"
        assert run(capsys, "--corpus", corpus, "--out", out, "ingest", "--snapshots", fixtures / "crawl200",
                   "--labels", fixtures / "crawl200_labels.jsonl")[0] == 0
        for cmd in (["featurize"], ["classify", "--rule", "feature=stop_title_word op=gt threshold=0.7"],
                    ["evaluate", "--rule", "feature=stop_title_word op=gt threshold=0.7"], ["report"]):
            assert run(capsys, "--corpus", corpus, "--out", out, *cmd)[0] == 0
    one, two = snapshot_outputs(tmp_path / "run1"), snapshot_outputs(tmp_path / "run2")
    assert set(ARTIFACTS) <= set(one)
    assert one == two
