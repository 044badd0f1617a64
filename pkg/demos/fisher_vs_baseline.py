"""
Is a threshold rule better than guessing "found"?
=================================================

A rule's match/mismatch split is compared with the all-found baseline's split
using a two-sided Fisher exact test.
"""

from fractions import Fraction

from pagetitles.stats import ConfusionMatrix, compare_to_baseline, fisher_exact_rational, matrix_stats

# the baseline predicts every title found: 4756 right, 2401 wrong
baseline = ConfusionMatrix(tp=4756, fp=2401, fn=0, tn=0)

# an adverb-ratio rule that barely moves the split
adverbs = ConfusionMatrix(4746, 10, 2388, 13)
# a stop-word ratio rule that does worse than the baseline
stopwords = ConfusionMatrix(3574, 1182, 1674, 727)

for name, m in [("adverb ratio < 0.13", adverbs), ("stop-word ratio < 0.35", stopwords)]:
    s = matrix_stats(m)
    p = compare_to_baseline(m, baseline)
    print(f"{name:24s} match {s.match} ({s.percent_match}%)  p = {p:.4g}")

# The fast path works in log space. On a small table it agrees with exact
# rational enumeration.
table = [[12, 5], [3, 14]]
exact = fisher_exact_rational(table)
print("exact p for", table, "=", exact, "~", float(exact))
assert isinstance(exact, Fraction)
