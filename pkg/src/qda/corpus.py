"""Corpus loading, sentence segmentation, and corpus statistics.

Raw documents come in as plain-text files (one document per file) or as
JSONL records with ``id`` and ``text`` fields. Documents are segmented into
sentences with a rule-based splitter (terminal punctuation plus an
abbreviation guard list shipped as a data file), short sentences are dropped,
and the survivors receive dense corpus-wide ids. Everything here is
deterministic: re-running segmentation on the same corpus yields byte-identical
sentence lists.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .lexical import tokenize

_DATA_DIR = Path(__file__).parent / "data"


class IngestError(ValueError):
    """Raised when raw input cannot be turned into a valid corpus."""


@dataclass(frozen=True)
class Document:
    doc_id: str
    source_path: str
    text: str


@dataclass(frozen=True)
class Sentence:
    sent_id: int
    doc_id: str
    text: str
    token_count: int


@dataclass(frozen=True)
class CorpusStats:
    total_sentences: int
    avg_length: float
    min_length: int
    max_length: int
    under_5: int
    over_25: int

    def to_dict(self) -> dict:
        return {
            "total_sentences": self.total_sentences,
            "avg_length": self.avg_length,
            "min_length": self.min_length,
            "max_length": self.max_length,
            "under_5": self.under_5,
            "over_25": self.over_25,
        }


@dataclass(frozen=True)
class Corpus:
    documents: tuple[Document, ...]

    def __len__(self) -> int:
        return len(self.documents)


def load_abbreviations(path: str | Path | None = None) -> frozenset[str]:
    """Load the abbreviation guard list (lowercase tokens, no trailing dot)."""
    p = Path(path) if path is not None else _DATA_DIR / "abbreviations.txt"
    entries = []
    for line in p.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            entries.append(line.lower())
    return frozenset(entries)


def ingest_corpus(paths: Sequence[str | Path], format: str = "plain-text") -> Corpus:
    """Load raw files into a Corpus.

    Plain text yields one Document per file (doc_id = file stem); JSONL yields
    one Document per record, keyed by the record's ``id``. Documents are
    ordered by path, then record index, so ingestion is stable.
    """
    if format not in ("plain-text", "jsonl"):
        raise IngestError(f"unknown corpus format: {format!r}")
    docs: list[Document] = []
    seen: set[str] = set()
    for path in sorted(Path(p) for p in paths):
        try:
            raw = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            raise IngestError(f"unreadable file {path}: {exc}") from exc
        if format == "plain-text":
            _append_doc(docs, seen, Document(path.stem, str(path), raw))
        else:
            for lineno, line in enumerate(raw.splitlines(), start=1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise IngestError(
                        f"malformed JSONL record at {path}:{lineno}: {exc}"
                    ) from exc
                if not isinstance(record, dict) or "id" not in record or "text" not in record:
                    raise IngestError(
                        f"JSONL record at {path}:{lineno} must have 'id' and 'text' fields"
                    )
                _append_doc(docs, seen, Document(str(record["id"]), str(path), str(record["text"])))
    return Corpus(tuple(docs))


def _append_doc(docs: list[Document], seen: set[str], doc: Document) -> None:
    if doc.doc_id in seen:
        raise IngestError(f"duplicate doc_id {doc.doc_id!r}")
    if not doc.text.strip():
        raise IngestError(f"document {doc.doc_id!r} is empty")
    seen.add(doc.doc_id)
    docs.append(doc)


# Terminal punctuation run, optionally followed by closing quotes/brackets,
# then the whitespace gap a sentence boundary must span.
_BOUNDARY = re.compile(r"([.!?]+)([\"'”’)\]]*)(\s+|$)")
_WS = re.compile(r"\s+")


def _split_spans(text: str, abbreviations: frozenset[str]) -> list[str]:
    """Split raw text into candidate sentence strings (whitespace-normalized)."""
    sentences: list[str] = []
    start = 0
    for m in _BOUNDARY.finditer(text):
        if m.group(1).startswith("."):
            # Look at the word immediately before the period.
            prev = text[start : m.start(1)].rstrip()
            word = prev.rsplit(None, 1)[-1] if prev else ""
            word = word.strip("(\"'“‘[").lower().rstrip(".")
            # For dotted runs like "e.g" judge the last component.
            word = word.rsplit(".", 1)[-1]
            if word in abbreviations:
                continue
            if len(word) == 1 and word.isalpha():
                # Single-letter initial ("J. Smith") or "e.g." / "i.e.".
                continue
            nxt = text[m.end() :].lstrip()
            if nxt[:1].isdigit() and word.isdigit():
                # Decimal-ish "3. 5" artifacts from OCR; keep together.
                continue
        piece = _WS.sub(" ", text[start : m.end(2)]).strip()
        if piece:
            sentences.append(piece)
        start = m.end()
    tail = _WS.sub(" ", text[start:]).strip()
    if tail:
        sentences.append(tail)
    return sentences


def segment_sentences(
    doc: Document,
    min_tokens: int = 5,
    start_id: int = 0,
    abbreviations: frozenset[str] | None = None,
) -> list[Sentence]:
    """Segment one document; sentences shorter than min_tokens are dropped.

    Surviving sentences get dense ids starting at ``start_id`` so a caller
    iterating documents in ingestion order produces corpus-wide dense ids.
    """
    if abbreviations is None:
        abbreviations = load_abbreviations()
    out: list[Sentence] = []
    next_id = start_id
    for piece in _split_spans(doc.text, abbreviations):
        n = len(tokenize(piece))
        if n < min_tokens:
            continue
        out.append(Sentence(next_id, doc.doc_id, piece, n))
        next_id += 1
    return out


def segment_corpus(
    corpus: Corpus,
    min_tokens: int = 5,
    abbreviations: frozenset[str] | None = None,
) -> list[Sentence]:
    """Segment every document, assigning corpus-wide dense sent_ids."""
    if abbreviations is None:
        abbreviations = load_abbreviations()
    sentences: list[Sentence] = []
    for doc in corpus.documents:
        sentences.extend(
            segment_sentences(doc, min_tokens, start_id=len(sentences), abbreviations=abbreviations)
        )
    return sentences


def corpus_stats(sentences: Sequence[Sentence]) -> CorpusStats:
    """Sentence length distribution: totals, mean, extrema, tail counts."""
    if not sentences:
        raise ValueError("empty corpus")
    lengths = [s.token_count for s in sentences]
    return CorpusStats(
        total_sentences=len(lengths),
        avg_length=sum(lengths) / len(lengths),
        min_length=min(lengths),
        max_length=max(lengths),
        under_5=sum(1 for n in lengths if n < 5),
        over_25=sum(1 for n in lengths if n > 25),
    )


def write_sentences_jsonl(sentences: Iterable[Sentence], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in sentences:
            fh.write(
                json.dumps(
                    {"sent_id": s.sent_id, "doc_id": s.doc_id, "text": s.text, "token_count": s.token_count},
                    ensure_ascii=False,
                )
                + "\n"
            )


def read_sentences_jsonl(path: str | Path) -> list[Sentence]:
    sentences = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                sentences.append(
                    Sentence(int(rec["sent_id"]), rec["doc_id"], rec["text"], int(rec["token_count"]))
                )
    return sentences
