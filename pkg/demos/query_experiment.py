"""
Rediscovering pages by their titles
===================================

Each title is queried as is, with every word required, and as a quoted
phrase. A page counts as found when its URI is in the top ten results. This
demo uses the canned responses shipped with the tests, so it runs offline.
"""

from pathlib import Path

from pagetitles.corpus import load_corpus
from pagetitles.search import FixtureProvider, QueryMode, experiment_status, run_experiment

fixtures = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
corpus = load_corpus(fixtures / "experiment3.jsonl")
provider = FixtureProvider(fixtures / "search")

result = run_experiment(corpus, provider, list(QueryMode))

for outcome in result.outcomes:
    ranks = {m.value: j.rank for m, j in outcome.judgments.items()}
    print(outcome.record.title)
    print("   ranks", ranks, "->", experiment_status(outcome).value)
    # a zero phrase count makes the ratio undefined rather than infinite
    print("   or/quoted", outcome.or_over_quoted, " and/quoted", outcome.and_over_quoted)

print("provider calls:", provider.calls, " failures:", len(result.failures))
