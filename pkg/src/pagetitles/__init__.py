"""Judge whether a web page's title is a viable query for rediscovering the page."""
from .corpus import (FilterConfig, MalformedHtml, PageSnapshot, ParseError, Status, TitleRecord,
                     apply_filters, content_word_count, extract_title, load_corpus, save_corpus)
from .text import (Lexicon, StopTitleSet, TokenizedTitle, bundled_lexicon, bundled_stop_titles,
                   duplicate_word_counts, is_exact_stop_title, lexicon_ratio, load_lexicon,
                   load_stop_titles, longest_word, stop_title_coverage, tokenize)
from .stats import (ConfusionMatrix, compare_to_baseline, descriptive, fisher_exact_two_sided,
                    histogram, matrix_stats)
from .classify import (BucketSpec, FeatureVector, ThresholdRule, baseline_predict, bucket_success_rates,
                       evaluate_rule, featurize, sweep, threshold_predict)
from .search import (FixtureProvider, QueryMode, SearchClient, build_query, judge, normalize_uri,
                     run_experiment)

__version__ = "0.1.0"
