"""Pick a functionality phrase from a pile of developer annotations.

Pipeline: ``preprocess`` keeps the first sentence of each annotation,
``textrank`` ranks content words over a co-occurrence graph, ``keyphrases``
glues adjacent keywords back into phrases, and ``rank_sentences`` scores
each sentence by MinHash-estimated Jaccard similarity to the phrase words.
"""

from __future__ import annotations

import hashlib
import math
import re
import unicodedata
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Iterable, Sequence

import numpy as np

from .swum import lexicon

MERSENNE61 = (1 << 61) - 1
NON_CONTENT_TAGS = {"IN", "DT", "CC", "RB", "PRP", "CD"}

_SENTENCE_END = re.compile(r"(?<=[.!?。！？])\s*")
_MARKUP = re.compile(r"<[^>]*>|`+|\*+|#+|@\w+|\[[^\]]*\]\([^)]*\)")
_TOKEN = re.compile(r"[a-z0-9]+")


class EmptyCorpus(ValueError):
    pass


@dataclass(frozen=True)
class SummarizeConfig:
    window: int = 4
    damping: float = 0.85
    eps: float = 1e-6
    max_iter: int = 200
    top_n: int = 10  # upper bound on keywords kept
    top_fraction: float = 1 / 3  # share of graph vertices kept, as in TextRank
    num_hashes: int = 256
    seed: int = 0


@dataclass(frozen=True)
class Corpus:
    sentences: tuple[str, ...]
    signature: str | None = None


@lru_cache(maxsize=1)
def stopwords() -> frozenset[str]:
    text = (resources.files("bytedoc") / "data" / "stopwords.txt").read_text()
    return frozenset(line.strip() for line in text.splitlines() if line.strip() and not line.startswith("#"))


# ---------------------------------------------------------------------------
# preprocessing


def _clean(text: str) -> str:
    text = _MARKUP.sub(" ", text)
    text = "".join(" " if unicodedata.category(c)[0] == "C" else c for c in text)
    return " ".join(text.split())


def _mostly_ascii(sentence: str) -> bool:
    letters = [c for c in sentence if c.isalpha()]
    if not letters:
        return False
    return sum(c.isascii() for c in letters) / len(letters) > 0.5


def first_sentence(text: str) -> str:
    cleaned = _clean(text)
    parts = [p for p in _SENTENCE_END.split(cleaned) if p.strip()]
    return parts[0].strip() if parts else ""


def preprocess(raw_annotations: Iterable[str], signature: str | None = None) -> Corpus:
    seen: dict[str, None] = {}
    for raw in raw_annotations:
        s = first_sentence(raw)
        if s and _mostly_ascii(s) and s not in seen:
            seen[s] = None
    if not seen:
        raise EmptyCorpus("no usable sentences after preprocessing")
    return Corpus(tuple(seen), signature)


def tokenize(sentence: str) -> list[str]:
    return _TOKEN.findall(sentence.lower())


def is_content_word(word: str) -> bool:
    if word in stopwords() or word.isdigit():
        return False
    return lexicon().get(word) not in NON_CONTENT_TAGS


def content_words(sentence: str) -> list[str]:
    return [w for w in tokenize(sentence) if is_content_word(w)]


# ---------------------------------------------------------------------------
# TextRank


@dataclass
class KeywordGraph:
    vertices: list[str]
    weights: dict[tuple[str, str], float] = field(default_factory=dict)

    def neighbors(self, v: str) -> dict[str, float]:
        return self._adj.get(v, {})

    def __post_init__(self):
        self._adj: dict[str, dict[str, float]] = {}
        for (a, b), w in self.weights.items():
            self._adj.setdefault(a, {})[b] = w
            self._adj.setdefault(b, {})[a] = w


def build_graph(corpus: Corpus, window: int = 4) -> KeywordGraph:
    """Undirected graph; edge weight = number of co-occurrences within ``window``."""
    vertices: dict[str, None] = {}
    weights: dict[tuple[str, str], float] = {}
    for sentence in corpus.sentences:
        words = content_words(sentence)
        for w in words:
            vertices.setdefault(w)
        for i, a in enumerate(words):
            for b in words[i + 1 : i + window]:
                if a != b:
                    key = (a, b) if a < b else (b, a)
                    weights[key] = weights.get(key, 0.0) + 1.0
    return KeywordGraph(list(vertices), weights)


@dataclass(frozen=True)
class RankResult:
    scores: dict[str, float]
    iterations: int
    converged: bool


def pagerank(graph: KeywordGraph, damping: float = 0.85, eps: float = 1e-6, max_iter: int = 200) -> RankResult:
    scores = {v: 1.0 for v in graph.vertices}
    out_weight = {v: sum(graph.neighbors(v).values()) for v in graph.vertices}
    for it in range(1, max_iter + 1):
        new = {}
        for v in graph.vertices:
            inflow = sum(w / out_weight[u] * scores[u] for u, w in graph.neighbors(v).items())
            new[v] = (1 - damping) + damping * inflow
        delta = max((abs(new[v] - scores[v]) for v in scores), default=0.0)
        scores = new
        if delta < eps:
            return RankResult(scores, it, True)
    return RankResult(scores, max_iter, False)


def textrank(
    corpus: Corpus,
    window: int = 4,
    damping: float = 0.85,
    eps: float = 1e-6,
    max_iter: int = 200,
) -> list[tuple[str, float]]:
    """Content words by TextRank score, highest first, ties alphabetical."""
    result = pagerank(build_graph(corpus, window), damping, eps, max_iter)
    return sorted(result.scores.items(), key=lambda kv: (-kv[1], kv[0]))


def keyphrases(keywords: Iterable[str], corpus: Corpus) -> list[str]:
    """Maximal runs of adjacent keywords in the corpus sentences."""
    keys = set(keywords)
    phrases: dict[str, None] = {}
    if not keys:
        return []
    for sentence in corpus.sentences:
        run: list[str] = []
        for tok in tokenize(sentence) + [""]:
            if tok in keys:
                run.append(tok)
            elif run:
                phrases.setdefault(" ".join(run))
                run = []
    return list(phrases)


# ---------------------------------------------------------------------------
# MinHash


def _word_hash(word: str) -> int:
    return int.from_bytes(hashlib.blake2b(word.encode(), digest_size=8).digest(), "big") % MERSENNE61


class MinHasher:
    """``num_hashes`` universal hash functions ``(a*x + b) mod (2**61 - 1)``."""

    def __init__(self, num_hashes: int = 256, seed: int = 0):
        rng = np.random.default_rng(seed)
        self.a = [int(x) for x in rng.integers(1, MERSENNE61, size=num_hashes, dtype=np.int64)]
        self.b = [int(x) for x in rng.integers(0, MERSENNE61, size=num_hashes, dtype=np.int64)]

    @property
    def num_hashes(self) -> int:
        return len(self.a)

    def signature(self, items: Iterable[str]) -> list[int]:
        xs = [_word_hash(w) for w in set(items)]
        if not xs:
            return [MERSENNE61] * self.num_hashes
        return [min((a * x + b) % MERSENNE61 for x in xs) for a, b in zip(self.a, self.b)]

    def jaccard(self, s1: Iterable[str], s2: Iterable[str]) -> float:
        sig1, sig2 = self.signature(s1), self.signature(s2)
        return sum(x == y for x, y in zip(sig1, sig2)) / self.num_hashes


def exact_jaccard(s1: Iterable[str], s2: Iterable[str]) -> float:
    a, b = set(s1), set(s2)
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


def rank_sentences(
    corpus: Corpus, phrases: Sequence[str], num_hashes: int = 256, seed: int = 0
) -> list[tuple[str, float]]:
    if not phrases:
        raise ValueError("rank_sentences needs at least one phrase")
    phrase_words = {w for p in phrases for w in tokenize(p)}
    hasher = MinHasher(num_hashes, seed)
    scored = [(s, hasher.jaccard(content_words(s), phrase_words)) for s in corpus.sentences]
    return sorted(scored, key=lambda x: -x[1])


@dataclass(frozen=True)
class Summary:
    sentence: str
    keywords: tuple[tuple[str, float], ...]
    phrases: tuple[str, ...]
    ranking: tuple[tuple[str, float], ...]


def keyword_count(num_vertices: int, config: SummarizeConfig = SummarizeConfig()) -> int:
    return min(config.top_n, max(1, math.ceil(num_vertices * config.top_fraction)))


def summarize(corpus: Corpus, config: SummarizeConfig = SummarizeConfig()) -> Summary:
    ranked = textrank(corpus, config.window, config.damping, config.eps, config.max_iter)
    top = ranked[: keyword_count(len(ranked), config)]
    phrases = keyphrases([w for w, _ in top], corpus)
    ranking = rank_sentences(corpus, phrases, config.num_hashes, config.seed)
    return Summary(ranking[0][0], tuple(top), tuple(phrases), tuple(ranking))


def standard_error_bound(num_hashes: int, k: float = 3.0) -> float:
    return k / math.sqrt(num_hashes)
