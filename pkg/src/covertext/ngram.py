"""Deterministic n-gram toy language model used for reproducible coding tests.

Backoff rule: a query context is shortened to the longest suffix that was
observed in training; additive smoothing at that level spreads mass over the
whole vocabulary, so every distribution has full support and top-K sets are
well defined at every step.
"""

from __future__ import annotations

from .distributions import DistributionProvider, NextTokenDistribution, make_distribution
from .errors import ProviderError
from .vocab import Context, TokenId, Vocabulary

MAX_ORDER = 5
DEFAULT_SMOOTHING = 0.01


class NgramProvider(DistributionProvider):
    def __init__(self, vocabulary: Vocabulary, order: int, smoothing: float, counts, totals):
        self._vocab = vocabulary
        self.order = order
        self.smoothing = smoothing
        # counts[k][(ctx ids len k)][next id] and totals[k][(ctx ids)] for k = 0..order-1
        self._counts = counts
        self._totals = totals
        self._cache: dict[tuple, NextTokenDistribution] = {}

    @property
    def vocabulary(self) -> Vocabulary:
        return self._vocab

    def context_key(self, ctx: Context):
        return tuple(ctx[max(0, len(ctx) - (self.order - 1)):])

    def next_distribution(self, ctx: Context) -> NextTokenDistribution:
        key = self.context_key(ctx)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        self._vocab.validate_context(key)  # only the suffix conditions the model
        dist = self._build(key)
        self._cache[key] = dist
        return dist

    def _build(self, suffix: tuple[TokenId, ...]) -> NextTokenDistribution:
        # Longest observed suffix wins; the empty context (unigram level) is
        # always observed on a non-empty corpus.
        for start in range(len(suffix) + 1):
            ctx = suffix[start:]
            total = self._totals[len(ctx)].get(ctx)
            if total:
                successor = self._counts[len(ctx)][ctx]
                break
        else:  # pragma: no cover - unigram level always has counts
            raise ProviderError("no n-gram counts at any order")

        alpha = self.smoothing
        size = self._vocab.size
        denom = total + alpha * size
        if alpha > 0.0:
            probs = {t: (successor.get(t, 0) + alpha) / denom for t in range(size)}
        else:
            probs = {t: c / total for t, c in successor.items()}
        return make_distribution(probs)

    def sequence_log2_prob(self, tokens) -> float:
        """Sum of per-token log2 probabilities, conditioning left to right."""
        import math

        lp = 0.0
        for i, tok in enumerate(tokens):
            dist = self.next_distribution(tuple(tokens[:i]))
            p = dict(dist.entries).get(tok)
            if p is None:
                return float("-inf")
            lp += math.log2(p)
        return lp


def train_ngram(corpus, order: int = 3, smoothing: float = DEFAULT_SMOOTHING,
                vocabulary: Vocabulary | None = None) -> NgramProvider:
    """Count additive-smoothed n-grams of orders 1..order over token sequences.

    Each sentence is terminated with the EOS token before counting, so EOS is
    a predictable, selectable vocabulary member.
    """
    sentences = [list(s) for s in corpus]
    if not sentences:
        raise ProviderError("corpus must be non-empty")
    if not 1 <= order <= MAX_ORDER:
        raise ProviderError(f"order must be in 1..{MAX_ORDER}")

    if vocabulary is None:
        vocabulary = Vocabulary.from_surfaces(w for s in sentences for w in s)
    eos = vocabulary.eos

    counts = [dict() for _ in range(order)]
    totals = [dict() for _ in range(order)]
    for sentence in sentences:
        ids = [vocabulary.id_of(w) for w in sentence] + [eos]
        for i, tok in enumerate(ids):
            for k in range(min(order - 1, i) + 1):
                ctx = tuple(ids[i - k:i])
                succ = counts[k].setdefault(ctx, {})
                succ[tok] = succ.get(tok, 0) + 1
                totals[k][ctx] = totals[k].get(ctx, 0) + 1
    return NgramProvider(vocabulary, order, smoothing, counts, totals)


def load_corpus(path) -> list[list[str]]:
    """Read a plain-text corpus: UTF-8, one sentence per line, whitespace tokens."""
    sentences = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            words = line.split()
            if words:
                sentences.append(words)
    return sentences


def perplexity(provider: NgramProvider, sentences) -> float:
    """Per-token perplexity (EOS included) of held-out whitespace sentences."""
    total_lp = 0.0
    total_tokens = 0
    vocab = provider.vocabulary
    for sentence in sentences:
        ids = [vocab.id_of(w) for w in sentence] + [vocab.eos]
        total_lp += provider.sequence_log2_prob(ids)
        total_tokens += len(ids)
    return 2.0 ** (-total_lp / total_tokens)
