"""
Lexical frequency tables and collocation significance
=====================================================

Word frequencies in natural language are Zipf-distributed: a few terms are
everywhere, and almost everything else appears once. Raw counts therefore
mean little on their own — what matters is where a count sits inside the
whole distribution. This demo plants one recurring collocation inside a
Zipf-shaped background corpus and shows how its percentile rank exposes it.
"""

import numpy as np

from qda.lexical import (
    build_frequency_table,
    percentile_rank,
    significance_flag,
    top_items,
)

rng = np.random.default_rng(42)

# A 1,000-word vocabulary sampled with Zipf weights builds the background.
vocab = np.array([f"word{i:03d}" for i in range(1000)])
weights = 1.0 / np.arange(1, 1001) ** 1.05
weights /= weights.sum()
background = [list(rng.choice(vocab, 8, p=weights)) for _ in range(1200)]

# Plant the phrase "school board" exactly 23 times as its own sentences, so
# its bigram count is known by construction.
sentences = background + [["school", "board"]] * 23

# Count bigrams. The background tokens are synthetic, so the stopword filter
# is switched off; with real text the default policy drops stopwords first,
# which is what lets "board of education" surface as ("board", "education").
table = build_frequency_table(sentences, arity=2, stopword_policy="keep")
print(f"distinct bigram types: {len(table)}")
print(f"planted bigram count:  {table.items[('school', 'board')]}")

print("\nmost frequent bigrams")
for gram, count in top_items(table, 5):
    print(f"  {' '.join(gram):>20}  {count}")

# A count of 23 looks modest next to the table head, but the percentile rank
# tells the real story: almost every bigram type occurs once or twice.
pct = percentile_rank(table, 23)
print(f"\npercentile rank of count 23: {pct:.2f}")
print(f"significant at the 99th percentile? {significance_flag(pct, threshold=99.0)}")

# The same machinery answers the negative question too: a count of 2 clears
# almost nothing.
print(f"percentile rank of count 2:  {percentile_rank(table, 2):.2f}")
