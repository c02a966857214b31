"""Canonical Huffman codes with deterministic tie-breaking.

Tree identity between encoder and decoder is the correctness linchpin of
Huffman-based steganography, so construction must be a pure function of the
(rank-ordered) probabilities: heap ties break on insertion order, and code
assignment is canonical over (depth, rank).
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass


def code_lengths(weights) -> list[int]:
    """Huffman code length per symbol, symbols given in rank order."""
    n = len(weights)
    if n == 0:
        raise ValueError("cannot build a code for zero symbols")
    if n == 1:
        return [0]
    heap = [(w, i, (i,)) for i, w in enumerate(weights)]
    heapq.heapify(heap)
    counter = n
    depths = [0] * n
    while len(heap) > 1:
        w1, _, leaves1 = heapq.heappop(heap)
        w2, _, leaves2 = heapq.heappop(heap)
        merged = leaves1 + leaves2
        for leaf in merged:
            depths[leaf] += 1
        heapq.heappush(heap, (w1 + w2, counter, merged))
        counter += 1
    return depths


@dataclass(frozen=True)
class CanonicalCode:
    """Canonical coding table over rank-ordered symbols.

    codes[i] = (codeword value, length) for rank i; the decode map inverts
    (value, length) pairs. Walking message bits MSB-first through the decode
    map is unambiguous because the code is prefix-free.
    """

    depths: tuple[int, ...]
    codes: tuple[tuple[int, int], ...]
    by_code: dict

    @classmethod
    def from_weights(cls, weights) -> "CanonicalCode":
        depths = code_lengths(weights)
        order = sorted(range(len(depths)), key=lambda i: (depths[i], i))
        codes = [None] * len(depths)
        code = 0
        prev_len = depths[order[0]]
        for i in order:
            code <<= depths[i] - prev_len
            codes[i] = (code, depths[i])
            code += 1
            prev_len = depths[i]
        by_code = {c: i for i, c in enumerate(codes)}
        return cls(depths=tuple(depths), codes=tuple(codes), by_code=by_code)

    def walk(self, next_bit) -> tuple[int, list[int]]:
        """Consume bits from `next_bit()` until a codeword completes.

        Returns (rank of decoded symbol, the consumed bits).
        """
        acc = 0
        length = 0
        consumed = []
        max_len = max(self.depths)
        while True:
            bit = next_bit()
            consumed.append(bit)
            acc = (acc << 1) | bit
            length += 1
            rank = self.by_code.get((acc, length))
            if rank is not None:
                return rank, consumed
            if length > max_len:  # pragma: no cover - impossible for a full code
                raise ValueError("bit walk exceeded the deepest codeword")

    def bits_of(self, rank: int) -> list[int]:
        code, length = self.codes[rank]
        return [(code >> shift) & 1 for shift in range(length - 1, -1, -1)]

    def implied_probability(self, rank: int) -> float:
        return 2.0 ** -self.depths[rank]

    def kl_against(self, probs) -> float:
        """Sum of q*log2(q/p) with q the implied dyadic code distribution."""
        return math.fsum(
            (2.0 ** -d) * (-d - math.log2(p)) for d, p in zip(self.depths, probs)
        )
