"""Text preprocessing and n-gram bag-of-words features with a capped vocabulary.

Tokens are lowercased, accent-stripped and split on runs of non-alphanumeric
characters; digits are kept so phone numbers and contract ids survive as
tokens. No stemming or lemmatization.
"""

from __future__ import annotations

import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import DataFormatError

_TOKEN_RE = re.compile(r"[a-z0-9]+")

TokenSeq = list[str]


def strip_accents(text: str) -> str:
    """Drop combining marks after canonical decomposition (ã -> a, ç -> c)."""
    decomposed = unicodedata.normalize("NFKD", text)
    return "".join(ch for ch in decomposed if not unicodedata.combining(ch))


def preprocess(text: str, stopwords: frozenset[str] | set[str] = frozenset()) -> TokenSeq:
    """Lowercase, strip accents, split on non-alphanumeric runs, drop stopwords.

    Total function: empty or all-punctuation input yields an empty list.
    Idempotent: feeding the joined output back in returns the same tokens.
    """
    tokens = _TOKEN_RE.findall(strip_accents(text).lower())
    if stopwords:
        tokens = [t for t in tokens if t not in stopwords]
    return tokens


def extract_ngrams(tokens: Sequence[str], n_max: int) -> list[str]:
    """All contiguous word n-grams of length 1..n_max joined with "_".

    Ordered shorter-first, each length left-to-right:
    [a,b,c] with n_max=3 -> [a, b, c, a_b, b_c, a_b_c].
    """
    if not 1 <= n_max <= 3:
        raise ValueError(f"n_max must be in 1..3, got {n_max}")
    grams: list[str] = []
    for n in range(1, n_max + 1):
        for i in range(len(tokens) - n + 1):
            grams.append("_".join(tokens[i : i + n]))
    return grams


@dataclass(frozen=True)
class Vocabulary:
    """Bijection from n-gram strings to dense column indices."""

    entries: dict[str, int]
    max_size: int
    ngram_max: int

    def __post_init__(self):
        indices = sorted(self.entries.values())
        if indices != list(range(len(self.entries))):
            raise ValueError("vocabulary indices must be dense in [0, len)")
        if len(self.entries) > self.max_size:
            raise ValueError("vocabulary exceeds max_size")

    def __len__(self) -> int:
        return len(self.entries)

    def save(self, path: str | Path) -> None:
        """One "ngram<TAB>index" line per entry, in index order."""
        by_index = sorted(self.entries.items(), key=lambda kv: kv[1])
        with open(path, "w", encoding="utf-8") as fh:
            for gram, idx in by_index:
                fh.write(f"{gram}\t{idx}\n")

    @classmethod
    def load(cls, path: str | Path, max_size: int | None = None, ngram_max: int = 3) -> "Vocabulary":
        entries: dict[str, int] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise DataFormatError("expected 'ngram<TAB>index'", line=lineno)
                try:
                    entries[parts[0]] = int(parts[1])
                except ValueError:
                    raise DataFormatError(f"bad index {parts[1]!r}", line=lineno) from None
        return cls(entries=entries, max_size=max_size if max_size is not None else len(entries), ngram_max=ngram_max)


def build_vocabulary(corpus: Iterable[Sequence[str]], n_max: int, max_size: int) -> Vocabulary:
    """Top max_size n-grams ranked by document frequency.

    Ties break lexicographically ascending; indices are assigned in
    (frequency desc, lexicographic asc) order, so the result does not depend
    on corpus ordering.
    """
    doc_freq: Counter[str] = Counter()
    n_docs = 0
    for tokens in corpus:
        n_docs += 1
        doc_freq.update(set(extract_ngrams(tokens, n_max)))
    if n_docs == 0:
        raise ValueError("corpus is empty")
    ranked = sorted(doc_freq.items(), key=lambda kv: (-kv[1], kv[0]))
    entries = {gram: idx for idx, (gram, _) in enumerate(ranked[:max_size])}
    return Vocabulary(entries=entries, max_size=max_size, ngram_max=n_max)


@dataclass(frozen=True)
class SparseVector:
    """Sorted (index, count) pairs over a fixed dimension."""

    dimension: int
    pairs: tuple[tuple[int, int], ...] = field(default_factory=tuple)

    def __post_init__(self):
        last = -1
        for idx, count in self.pairs:
            if idx <= last:
                raise ValueError("indices must be strictly increasing")
            if idx >= self.dimension:
                raise ValueError(f"index {idx} out of range for dimension {self.dimension}")
            if count < 1:
                raise ValueError("counts must be >= 1")
            last = idx

    def to_dense(self):
        import numpy as np

        dense = np.zeros(self.dimension, dtype=np.float64)
        for idx, count in self.pairs:
            dense[idx] = count
        return dense


def vectorize(tokens: Sequence[str], vocab: Vocabulary, n_max: int | None = None) -> SparseVector:
    """Counts of in-vocabulary n-grams; out-of-vocabulary grams are dropped."""
    n = vocab.ngram_max if n_max is None else n_max
    counts: Counter[int] = Counter()
    for gram in extract_ngrams(tokens, n):
        idx = vocab.entries.get(gram)
        if idx is not None:
            counts[idx] += 1
    return SparseVector(dimension=len(vocab), pairs=tuple(sorted(counts.items())))


def load_stopwords(path: str | Path) -> frozenset[str]:
    """One token per line, UTF-8; blank lines and '#' comments ignored.

    Entries are normalized with the same accent-strip + lowercase rule as
    tokens, so the file may carry accented Portuguese forms.
    """
    words = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            word = line.strip()
            if word and not word.startswith("#"):
                words.add(strip_accents(word).lower())
    return frozenset(words)
