"""Baseline steganographic coders: block bins, Huffman paths, patient Huffman.

All three run over the same distribution-provider contract as the arithmetic
coder and emit compatible step traces, so one metrics harness serves every
method.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .bits import Ciphertext, frame, unframe
from .coder import StepTrace
from .distributions import DistributionProvider, NextTokenDistribution
from .errors import CoderError, InputError, PatienceExhausted, SupportMismatch
from .huffman import CanonicalCode
from .vocab import Context, TokenId

PATIENCE_GUARD = 10000


@dataclass(frozen=True)
class BinLMConfig:
    """Fixed-length block coding: vocabulary split into 2^b bins."""

    b: int
    rule: str = "id-mod"

    def __post_init__(self):
        if not 1 <= self.b <= 5:
            raise InputError("block size b must be in 1..5")
        if self.rule != "id-mod":
            raise InputError(f"unknown bin assignment rule {self.rule!r}")


@dataclass(frozen=True)
class HuffmanConfig:
    """Variable-length coding over a per-step Huffman tree of the top 2^h tokens."""

    h: int

    def __post_init__(self):
        if not 1 <= self.h <= 11:
            raise InputError("tree depth exponent h must be in 1..11")


@dataclass(frozen=True)
class PatienceConfig:
    """Huffman coding gated by a per-step divergence test with threshold epsilon.

    The seed drives the pure-LM sampling on failing steps; it changes the
    cover text but never decodability, since the decoder classifies steps
    from context alone.
    """

    epsilon: float
    seed: int = 0
    h: int = 5

    def __post_init__(self):
        if not self.epsilon > 0.0:
            raise InputError("epsilon must be > 0")


# --- Bin-LM -----------------------------------------------------------------


class _BinTables:
    """Per-context bin representatives: most likely token in each id-mod bin."""

    def __init__(self, provider: DistributionProvider, cfg: BinLMConfig,
                 cache: dict | None = None):
        self.provider = provider
        self.n_bins = 1 << cfg.b
        size = provider.vocab_size
        if size is not None and self.n_bins > size:
            raise InputError(f"2^{cfg.b} bins exceed vocabulary size {size}")
        self._cache: dict = {} if cache is None else cache

    def lookup(self, ctx: Context):
        key = self.provider.context_key(ctx)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        dist = self.provider.next_distribution(ctx)
        n = self.n_bins
        best: list[TokenId | None] = [None] * n
        probs = [0.0] * n
        found = 0
        for tok, p in dist.entries:
            b = tok & (n - 1)
            if best[b] is None:
                best[b] = tok
                probs[b] = p
                found += 1
                if found == n:
                    break
        if found < n:
            missing = [b for b in range(n) if best[b] is None]
            raise SupportMismatch(f"bins {missing} have no support under the provider")
        # Implied coding distribution puts 2^-b on each representative.
        q = 1.0 / n
        kl = math.fsum(q * math.log2(q / p) for p in probs)
        z = math.fsum(probs)
        entry = (best, kl, z)
        self._cache[key] = entry
        return entry


def binlm_encode_raw(bits, provider, cfg: BinLMConfig, ctx: Context = (), *,
                     table_cache: dict | None = None):
    """Encode `bits` zero-padded to a multiple of b; one token per block."""
    tables = _BinTables(provider, cfg, table_cache)
    b = cfg.b
    padded = list(bits) + [0] * (-len(bits) % b)
    full_ctx: list[TokenId] = list(ctx)
    n_ctx = len(full_ctx)
    traces: list[StepTrace] = []
    t = 0
    for i in range(0, len(padded), b):
        t += 1
        block = 0
        for bit in padded[i:i + b]:
            block = (block << 1) | bit
        best, kl, z = tables.lookup(full_ctx)
        token = best[block]
        full_ctx.append(token)
        traces.append(
            StepTrace(
                t=t, token=token, k=1 << b, z=z, kl=kl,
                bits_fixed=min((i + b), len(bits)),
                low_before=0, high_before=0, low_after=0, high_after=0,
            )
        )
    return full_ctx[n_ctx:], traces


def binlm_decode_raw(cover, provider, cfg: BinLMConfig, ctx: Context = (), *,
                     table_cache: dict | None = None):
    """Read each token's bin back as a b-bit block; verifies the token is the
    bin representative the encoder would have chosen."""
    tables = _BinTables(provider, cfg, table_cache)
    b = cfg.b
    mask = (1 << b) - 1
    bits: list[int] = []
    traces: list[StepTrace] = []
    full_ctx: list[TokenId] = list(ctx)
    for t, token in enumerate(cover, start=1):
        best, kl, z = tables.lookup(full_ctx)
        block = token & mask
        if best[block] != token:
            raise SupportMismatch(
                f"cover token {token} is not the bin representative at step {t}"
            )
        bits.extend((block >> shift) & 1 for shift in range(b - 1, -1, -1))
        full_ctx.append(token)
        traces.append(
            StepTrace(
                t=t, token=token, k=1 << b, z=z, kl=kl, bits_fixed=len(bits),
                low_before=0, high_before=0, low_after=0, high_after=0,
            )
        )
    return bits, traces


def binlm_encode(ciphertext: Ciphertext, provider, cfg: BinLMConfig, ctx: Context = (), *,
                 table_cache: dict | None = None):
    return binlm_encode_raw(frame(ciphertext), provider, cfg, ctx, table_cache=table_cache)


def binlm_decode(cover, provider, cfg: BinLMConfig, ctx: Context = (), *,
                 table_cache: dict | None = None) -> Ciphertext:
    bits, _ = binlm_decode_raw(cover, provider, cfg, ctx, table_cache=table_cache)
    return unframe(bits)


# --- Huffman (per-step tree over top 2^h tokens) ----------------------------


class _HuffmanTables:
    """Per-context canonical code over the renormalized top-2^h head."""

    def __init__(self, provider: DistributionProvider, h: int,
                 cache: dict | None = None):
        self.provider = provider
        self.m = 1 << h
        size = provider.vocab_size
        if size is not None and self.m > size:
            raise InputError(f"2^{h} leaves exceed vocabulary size {size}")
        self._cache: dict = {} if cache is None else cache

    def lookup(self, ctx: Context):
        key = self.provider.context_key(ctx)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        dist = self.provider.next_distribution(ctx)
        head = dist.entries[: self.m]
        if len(head) < 2:
            raise CoderError("need at least two candidate tokens to build a code")
        z = math.fsum(p for _, p in head)
        renorm = [p / z for _, p in head]
        code = CanonicalCode.from_weights(renorm)
        rank_of = {tok: i for i, (tok, _) in enumerate(head)}
        # KL of the implied dyadic code distribution against the full LM
        # distribution (imperceptibility direction) and against the
        # renormalized head (the patience test direction).
        kl_full = math.fsum(
            (2.0 ** -d) * (-d - math.log2(p))
            for d, (_, p) in zip(code.depths, head)
        )
        kl_head = code.kl_against(renorm)
        entry = _HuffmanStep(head, rank_of, code, z, kl_full, kl_head, dist)
        self._cache[key] = entry
        return entry


@dataclass
class _HuffmanStep:
    head: tuple
    rank_of: dict
    code: CanonicalCode
    z: float
    kl_full: float
    kl_head: float
    dist: NextTokenDistribution


def huffman_encode_raw(bits, provider, cfg: HuffmanConfig, ctx: Context = (), *,
                       table_cache: dict | None = None):
    """Each step consumes the bits along one root-to-leaf path; the final
    path is zero-padded if the message ends mid-walk."""
    tables = _HuffmanTables(provider, cfg.h, table_cache)
    target = len(bits)
    pos = 0
    consumed = 0
    full_ctx: list[TokenId] = list(ctx)
    n_ctx = len(full_ctx)
    traces: list[StepTrace] = []
    t = 0

    def next_bit():
        nonlocal pos
        bit = bits[pos] if pos < target else 0
        pos += 1
        return bit

    while consumed < target:
        t += 1
        step = tables.lookup(full_ctx)
        rank, path = step.code.walk(next_bit)
        consumed += len(path)
        token = step.head[rank][0]
        full_ctx.append(token)
        traces.append(
            StepTrace(
                t=t, token=token, k=len(step.head), z=step.z, kl=step.kl_full,
                bits_fixed=min(consumed, target),
                low_before=0, high_before=0, low_after=0, high_after=0,
            )
        )
    return full_ctx[n_ctx:], traces


def huffman_decode_raw(cover, provider, cfg: HuffmanConfig, ctx: Context = (), *,
                       table_cache: dict | None = None):
    tables = _HuffmanTables(provider, cfg.h, table_cache)
    bits: list[int] = []
    traces: list[StepTrace] = []
    full_ctx: list[TokenId] = list(ctx)
    for t, token in enumerate(cover, start=1):
        step = tables.lookup(full_ctx)
        rank = step.rank_of.get(token)
        if rank is None:
            raise SupportMismatch(f"cover token {token} outside the coding head at step {t}")
        bits.extend(step.code.bits_of(rank))
        full_ctx.append(token)
        traces.append(
            StepTrace(
                t=t, token=token, k=len(step.head), z=step.z, kl=step.kl_full,
                bits_fixed=len(bits),
                low_before=0, high_before=0, low_after=0, high_after=0,
            )
        )
    return bits, traces


def huffman_encode(ciphertext: Ciphertext, provider, cfg: HuffmanConfig, ctx: Context = (), *,
                   table_cache: dict | None = None):
    return huffman_encode_raw(frame(ciphertext), provider, cfg, ctx, table_cache=table_cache)


def huffman_decode(cover, provider, cfg: HuffmanConfig, ctx: Context = (), *,
                   table_cache: dict | None = None) -> Ciphertext:
    bits, _ = huffman_decode_raw(cover, provider, cfg, ctx, table_cache=table_cache)
    return unframe(bits)


# --- Patient Huffman ---------------------------------------------------------


def _sample_from(dist: NextTokenDistribution, rng: random.Random) -> TokenId:
    x = rng.random()
    acc = 0.0
    for tok, p in dist.entries:
        acc += p
        if x < acc:
            return tok
    return dist.entries[-1][0]


def patient_encode_raw(bits, provider, cfg: PatienceConfig, ctx: Context = (), *,
                       table_cache: dict | None = None):
    """Huffman-code only on steps whose code diverges from the (renormalized)
    head by at most epsilon; otherwise emit a pure LM sample carrying no bits.

    Step classification depends only on the context, so the decoder
    reproduces it without shared randomness.
    """
    tables = _HuffmanTables(provider, cfg.h, table_cache)
    rng = random.Random(cfg.seed)
    target = len(bits)
    pos = 0
    consumed = 0
    full_ctx: list[TokenId] = list(ctx)
    n_ctx = len(full_ctx)
    traces: list[StepTrace] = []
    t = 0
    stalled = 0

    def next_bit():
        nonlocal pos
        bit = bits[pos] if pos < target else 0
        pos += 1
        return bit

    while consumed < target:
        t += 1
        step = tables.lookup(full_ctx)
        if step.kl_head <= cfg.epsilon:
            stalled = 0
            rank, path = step.code.walk(next_bit)
            consumed += len(path)
            token = step.head[rank][0]
            k = len(step.head)
            z = step.z
            kl = step.kl_full
            test_kl = step.kl_head
        else:
            stalled += 1
            if stalled >= PATIENCE_GUARD:
                raise PatienceExhausted(
                    f"{PATIENCE_GUARD} consecutive steps exceeded epsilon={cfg.epsilon}; "
                    "no bits can be placed under this provider"
                )
            token = _sample_from(step.dist, rng)
            k = 0
            z = 1.0
            kl = 0.0
            test_kl = step.kl_head
        full_ctx.append(token)
        traces.append(
            StepTrace(
                t=t, token=token, k=k, z=z, kl=kl,
                bits_fixed=min(consumed, target),
                low_before=0, high_before=0, low_after=0, high_after=0,
                test_kl=test_kl,
            )
        )
    return full_ctx[n_ctx:], traces


def patient_decode_raw(cover, provider, cfg: PatienceConfig, ctx: Context = (), *,
                       table_cache: dict | None = None):
    tables = _HuffmanTables(provider, cfg.h, table_cache)
    bits: list[int] = []
    traces: list[StepTrace] = []
    full_ctx: list[TokenId] = list(ctx)
    for t, token in enumerate(cover, start=1):
        step = tables.lookup(full_ctx)
        if step.kl_head <= cfg.epsilon:
            rank = step.rank_of.get(token)
            if rank is None:
                raise SupportMismatch(
                    f"cover token {token} outside the coding head at step {t}"
                )
            bits.extend(step.code.bits_of(rank))
            k = len(step.head)
            z = step.z
            kl = step.kl_full
        else:
            k = 0
            z = 1.0
            kl = 0.0
        full_ctx.append(token)
        traces.append(
            StepTrace(
                t=t, token=token, k=k, z=z, kl=kl, bits_fixed=len(bits),
                low_before=0, high_before=0, low_after=0, high_after=0,
                test_kl=step.kl_head,
            )
        )
    return bits, traces


def patient_huffman_encode(ciphertext: Ciphertext, provider, cfg: PatienceConfig,
                           ctx: Context = (), *, table_cache: dict | None = None):
    return patient_encode_raw(frame(ciphertext), provider, cfg, ctx, table_cache=table_cache)


def patient_huffman_decode(cover, provider, cfg: PatienceConfig, ctx: Context = (), *,
                           table_cache: dict | None = None) -> Ciphertext:
    bits, _ = patient_decode_raw(cover, provider, cfg, ctx, table_cache=table_cache)
    return unframe(bits)
