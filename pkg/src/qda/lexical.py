"""Lexical analysis: tokenization, lemmatization, n-gram tables, percentiles.

The lexical arm of the triangulation workflow. Counts are exact and fully
auditable: a plain regex tokenizer, a two-column lemma lexicon anyone can
read, sliding-window n-grams that never cross sentence boundaries, and
percentile ranks over distinct n-gram types (frequency in isolation means
little under a Zipfian distribution; a percentile says how exceptional a
count is).
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

_DATA_DIR = Path(__file__).parent / "data"

# Word = letters/digits, with internal hyphens or apostrophes preserved
# ("co-operative", "don't"). Underscore is excluded from \w via [^\W_].
_WORD = re.compile(r"[^\W_]+(?:[-'’][^\W_]+)*", re.UNICODE)


def tokenize(text: str, lowercase: bool = True, strip_punct: bool = True) -> list[str]:
    """Split text into tokens.

    With strip_punct (default) tokens are word runs and punctuation is
    discarded; otherwise the text is split on whitespace only and punctuation
    stays attached. Deterministic either way.
    """
    if lowercase:
        text = text.lower()
    if strip_punct:
        return _WORD.findall(text)
    return text.split()


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    p = Path(path) if path is not None else _DATA_DIR / "stopwords.txt"
    words = []
    for line in p.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.append(line.lower())
    return frozenset(words)


class LemmaLexicon:
    """Two-column (surface form, lemma) lookup table.

    Chains are resolved at load time and every lemma value is self-mapped, so
    lemmatization is idempotent by construction: a value returned by the
    lexicon is always a fixed point of ``lemmatize``.
    """

    def __init__(self, mapping: dict[str, str]):
        resolved: dict[str, str] = {}
        for surface, lemma in mapping.items():
            seen = {surface}
            while lemma in mapping and mapping[lemma] != lemma:
                if mapping[lemma] in seen:
                    raise ValueError(f"lemma cycle involving {lemma!r}")
                seen.add(lemma)
                lemma = mapping[lemma]
            resolved[surface.lower()] = lemma.lower()
        for lemma in list(resolved.values()):
            resolved.setdefault(lemma, lemma)
        self._map = resolved

    @classmethod
    def from_file(cls, path: str | Path | None = None) -> "LemmaLexicon":
        p = Path(path) if path is not None else _DATA_DIR / "lemmas.txt"
        if not p.exists():
            raise FileNotFoundError(f"lemma lexicon not found: {p}")
        mapping: dict[str, str] = {}
        for line in p.read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"bad lexicon line (want two columns): {line!r}")
            mapping[parts[0].lower()] = parts[1].lower()
        return cls(mapping)

    def get(self, token: str) -> str | None:
        return self._map.get(token)

    def __len__(self) -> int:
        return len(self._map)


_VOWELS = set("aeiou")


def _undouble(stem: str) -> str:
    # "runn" -> "run", but keep "pass", "fall".
    if len(stem) >= 3 and stem[-1] == stem[-2] and stem[-1] not in _VOWELS and stem[-1] not in "sl":
        return stem[:-1]
    return stem


def _strip_suffix_once(tok: str) -> str:
    """Apply at most one fallback suffix rule. Returns tok unchanged if none fit."""
    if len(tok) >= 5 and tok.endswith("ies"):
        return tok[:-3] + "y"
    if len(tok) >= 5 and tok.endswith("es") and tok[-4:-2] in ("ss", "sh", "ch"):
        return tok[:-2]
    if len(tok) >= 4 and tok.endswith("es") and tok[-3] in "xz":
        return tok[:-2]
    if len(tok) >= 4 and tok.endswith("s") and not tok.endswith(("ss", "us", "is")):
        return tok[:-1]
    if len(tok) >= 6 and tok.endswith("ing"):
        return _undouble(tok[:-3])
    if len(tok) >= 5 and tok.endswith("eed"):
        return tok[:-1]
    if len(tok) >= 5 and tok.endswith("ed"):
        return _undouble(tok[:-2])
    return tok


def _suffix_fixpoint(tok: str) -> str:
    # Each rule strictly shortens the token, so this terminates.
    while True:
        nxt = _strip_suffix_once(tok)
        if nxt == tok:
            return tok
        tok = nxt


def lemmatize(tokens: Sequence[str], lexicon: LemmaLexicon) -> list[str]:
    """Map tokens to lowercase lemmas.

    Lexicon lookup wins; otherwise suffix rules are applied to a fixed point
    and the result is looked up once more. Unknown tokens pass through
    unchanged (lowercased). Idempotent: lemmatize(lemmatize(x)) == lemmatize(x).
    """
    out = []
    for tok in tokens:
        tok = tok.lower()
        hit = lexicon.get(tok)
        if hit is not None:
            out.append(hit)
            continue
        stripped = _suffix_fixpoint(tok)
        out.append(lexicon.get(stripped) or stripped)
    return out


def build_lemma_table(tokens: Sequence[str], lexicon: LemmaLexicon) -> dict[str, int]:
    """Aggregate counts per lemma over a token stream."""
    counts: dict[str, int] = {}
    for lemma in lemmatize(tokens, lexicon):
        counts[lemma] = counts.get(lemma, 0) + 1
    return counts


@dataclass
class FrequencyTable:
    """Counts of n-gram types (token tuples of fixed arity)."""

    arity: int
    items: dict[tuple[str, ...], int] = field(default_factory=dict)
    total_tokens: int = 0

    def normalized(self, key: tuple[str, ...]) -> float:
        return self.items[key] / self.total_tokens if self.total_tokens else 0.0

    def __len__(self) -> int:
        return len(self.items)


def build_frequency_table(
    sentences: Iterable,
    arity: int,
    stopwords: frozenset[str] | None = None,
    stopword_policy: str = "drop",
) -> FrequencyTable:
    """Sliding-window n-gram counts over per-sentence token lists.

    ``sentences`` may be Sentence objects (their .text is tokenized) or
    pre-tokenized lists of strings. n-grams never cross sentence boundaries.
    With the default policy the stopword list is applied before n-gram
    extraction, so bigrams like ("board", "education") surface even when the
    running text reads "board of education".
    """
    if arity not in (1, 2, 3):
        raise ValueError(f"arity must be 1, 2, or 3, got {arity}")
    if stopword_policy not in ("drop", "keep"):
        raise ValueError(f"stopword_policy must be 'drop' or 'keep', got {stopword_policy!r}")
    drop = stopword_policy == "drop"
    if drop and stopwords is None:
        stopwords = load_stopwords()
    table = FrequencyTable(arity=arity)
    items = table.items
    n_sentences = 0
    for sent in sentences:
        n_sentences += 1
        tokens = sent if isinstance(sent, list) else tokenize(sent.text)
        if drop:
            tokens = [t for t in tokens if t not in stopwords]
        table.total_tokens += len(tokens)
        for i in range(len(tokens) - arity + 1):
            key = tuple(tokens[i : i + arity])
            items[key] = items.get(key, 0) + 1
    if n_sentences == 0:
        raise ValueError("empty corpus")
    return table


def percentile_rank(table: FrequencyTable, count: int) -> float:
    """Percentile of a count among the table's distinct n-gram types.

    100 * |{types with count < query}| / |types|. Strict less-than, the
    standard percentile-rank convention.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if not table.items:
        raise ValueError("empty frequency table")
    below = sum(1 for c in table.items.values() if c < count)
    return 100.0 * below / len(table.items)


def significance_flag(percentile: float, threshold: float = 95.0) -> bool:
    """True when a percentile clears the significance threshold (inclusive)."""
    if not 0.0 <= percentile <= 100.0:
        raise ValueError(f"percentile out of range: {percentile}")
    return percentile >= threshold


def search_terms(
    table: FrequencyTable, query: str
) -> list[tuple[tuple[str, ...], int, float]]:
    """All n-grams containing the query token, with counts and percentiles.

    Sorted by count descending, ties broken lexicographically.
    """
    hits = [(key, c) for key, c in table.items.items() if query in key]
    hits.sort(key=lambda kc: (-kc[1], kc[0]))
    return [(key, c, percentile_rank(table, c)) for key, c in hits]


def top_items(table: FrequencyTable, k: int) -> list[tuple[tuple[str, ...], int]]:
    """The k most frequent n-grams (ties lexicographic); fewer if table is small."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    ranked = sorted(table.items.items(), key=lambda kc: (-kc[1], kc[0]))
    return ranked[:k]


def export_table_csv(table: FrequencyTable, path: str | Path) -> None:
    """Write the full table as CSV: ngram, count, normalized, percentile."""
    ranked = sorted(table.items.items(), key=lambda kc: (-kc[1], kc[0]))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["ngram", "count", "normalized", "percentile"])
        for key, count in ranked:
            w.writerow(
                [" ".join(key), count, repr(table.normalized(key)), repr(percentile_rank(table, count))]
            )
