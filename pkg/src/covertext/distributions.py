"""Next-token distribution type and the provider contract every coder consumes."""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

from .errors import DistributionError
from .vocab import Context, TokenId, Vocabulary

SUM_TOLERANCE = 1e-9


@dataclass(frozen=True)
class NextTokenDistribution:
    """Conditional distribution over the next token, rank-sorted.

    Entries are (token id, probability) pairs sorted by probability
    descending, ties broken by ascending token id. Only strictly positive
    probabilities appear. The sort order with its deterministic tie-break is
    what fixes top-K set membership identically on both ends of the channel.
    """

    entries: tuple[tuple[TokenId, float], ...]
    temperature: float = 1.0

    def validate(self) -> "NextTokenDistribution":
        if not self.entries:
            raise DistributionError("distribution has no entries")
        total = math.fsum(p for _, p in self.entries)
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise DistributionError(f"probabilities sum to {total!r}, not 1")
        seen = set()
        prev = None
        for token, p in self.entries:
            if not p > 0.0:
                raise DistributionError(f"non-positive probability {p!r} for token {token}")
            if token in seen:
                raise DistributionError(f"duplicate token {token}")
            seen.add(token)
            if prev is not None:
                pp, pt = prev
                if p > pp or (p == pp and token < pt):
                    raise DistributionError("entries not sorted by (probability desc, id asc)")
            prev = (p, token)
        return self

    def __len__(self) -> int:
        return len(self.entries)


def make_distribution(probs_by_token) -> NextTokenDistribution:
    """Sort a {token: probability} mapping into canonical rank order.

    Zero-probability tokens are dropped; no renormalization is applied.
    """
    entries = sorted(
        ((t, p) for t, p in probs_by_token.items() if p > 0.0),
        key=lambda e: (-e[1], e[0]),
    )
    return NextTokenDistribution(entries=tuple(entries))


class DistributionProvider(ABC):
    """Deterministic source of next-token conditional distributions.

    Providers are read-only after construction and safe for concurrent
    queries. Two calls with the same context must return identical
    distributions, bit for bit.
    """

    @property
    @abstractmethod
    def vocabulary(self) -> Vocabulary: ...

    @property
    def vocab_size(self) -> int | None:
        """Vocabulary size, or None when unknown (id-only remote providers)."""
        return self.vocabulary.size

    @abstractmethod
    def next_distribution(self, ctx: Context) -> NextTokenDistribution: ...

    def context_key(self, ctx: Context):
        """Hashable key identifying contexts this provider cannot distinguish.

        Coders key their per-step caches on this; the default is the full
        context.
        """
        return tuple(ctx)

    def close(self) -> None:
        """Release any underlying connection; no-op for in-process providers."""
