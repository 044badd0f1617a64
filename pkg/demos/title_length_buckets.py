"""
Do longer titles find their page less often?
============================================

Found/not-found tallies per title length are grouped into ranges. The labeled
corpus here is synthesized from per-word-count tallies.
"""

import numpy as np

from pagetitles.classify import BucketSpec, bucket_success_rates
from pagetitles.corpus import Status, TitleRecord
from pagetitles.report import render_bucket_table
from pagetitles.stats import descriptive, truncate_percent

# word count -> (found, not found), short titles only plus a long tail
tallies = {1: (197, 127), 2: (363, 166), 3: (665, 249), 4: (596, 210), 5: (546, 199),
           8: (357, 129), 12: (130, 65), 18: (27, 27), 25: (3, 6), 40: (1, 1), 70: (0, 1)}

corpus = []
for wc, (found, not_found) in tallies.items():
    for status, n in ((Status.FOUND, found), (Status.NOT_FOUND, not_found)):
        corpus += [TitleRecord(f"http://t{len(corpus) + k}.example/", " ".join(["w"] * wc), status)
                   for k in range(n)]

rates = bucket_success_rates(corpus, BucketSpec((10, 20, 50, 100)))
print(render_bucket_table(rates, "found by title length", truncate_percent))

words = np.array([len(r.title.split()) for r in corpus])
s = descriptive(words)
print(f"n={s.n} mean={s.mean:.2f} std={s.std_dev:.2f} median={np.median(words):.0f}")
