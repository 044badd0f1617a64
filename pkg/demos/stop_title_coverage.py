"""
How much of a title is boilerplate?
===================================

Stop titles are phrases such as "home page" that say nothing about the page.
Coverage is the share of a title's words, or characters, that stop titles
account for.
"""

from pagetitles.text import bundled_stop_titles, coverage_percent, stop_title_coverage, tokenize

stop = bundled_stop_titles()

titles = [
    "my home page",
    "linuxguru home page",
    "Welcome to my home page",
    "Tenet Group Home Page",
    "Duluth kayak outfitters",
]

print(f"{'title':28s} {'words':>6s} {'chars':>6s}  spans")
for title in titles:
    t = tokenize(title)
    cov = stop_title_coverage(t, stop)
    spans = [" ".join(t.words[a:b]) for a, b, _ in cov.matched_spans]
    print(f"{title:28s} {coverage_percent(cov.word_ratio):5d}% {coverage_percent(cov.char_ratio):5d}%  {spans}")

# The char share counts the space inside a matched phrase but not the spaces
# around it, so "my home page" is 9 of 12 characters.
