"""Fixed-precision arithmetic steganographic coder.

Encoding steers an integer interval with the message: at each step the
current interval is tiled by integer-width sub-intervals proportional to the
truncated next-token distribution, and the sub-interval containing the
message value names the next cover token. Decoding replays the identical
subdivision using the received tokens and collects the bits that fall out of
interval renormalization; those are the message.

Sub-intervals are laid out in rank order (probability descending). When the
message runs out of bits the encoder keeps steering, treating the stream as
continuing with "1000..." - the midpoint of the message's dyadic interval -
which pins down the remaining free choices deterministically and keeps the
steering value away from the renormalization fixed point that an all-zeros
continuation can park on (see encode_raw).
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

from .bits import Ciphertext, frame, unframe
from .distributions import DistributionProvider
from .errors import CoderError, InputError, IntervalExhaustion, SupportMismatch
from .truncation import SelfAdjusting, TruncationDecision, TruncationPolicy, truncate
from .vocab import Context, TokenId

DEFAULT_PRECISION = 26
MIN_PRECISION = 16
MAX_PRECISION = 30


@dataclass(frozen=True)
class CoderInterval:
    """Half-open integer interval [low, high) at a fixed bit width."""

    low: int
    high: int
    precision_bits: int = DEFAULT_PRECISION

    def __post_init__(self):
        if not MIN_PRECISION <= self.precision_bits <= MAX_PRECISION:
            raise InputError(
                f"precision_bits must be in {MIN_PRECISION}..{MAX_PRECISION}"
            )
        if not 0 <= self.low < self.high <= (1 << self.precision_bits):
            raise InputError(f"invalid interval [{self.low}, {self.high})")

    @property
    def width(self) -> int:
        return self.high - self.low

    @classmethod
    def full(cls, precision_bits: int = DEFAULT_PRECISION) -> "CoderInterval":
        return cls(0, 1 << precision_bits, precision_bits)


@dataclass(frozen=True)
class QuantizedDistribution:
    """Integer sub-interval widths tiling the current interval exactly.

    Widths follow the distribution's rank order; every entry gets at least
    one unit.
    """

    entries: tuple[tuple[TokenId, int], ...]
    total: int


def quantize_widths(probs, width: int) -> list[int]:
    """Largest-remainder apportionment of `width` units across `probs`.

    Every entry receives at least one unit; when the floor forces a bump, the
    unit is taken from the currently widest entry so the distortion lands
    where it is relatively smallest.
    """
    n = len(probs)
    if width < n:
        raise IntervalExhaustion(
            f"interval width {width} cannot hold {n} tokens; "
            "precision_bits too small for this K"
        )
    widths = []
    remainders = []
    assigned = 0
    for i, p in enumerate(probs):
        exact = p * width
        base = int(exact)
        widths.append(base)
        remainders.append((base - exact, i))  # ascending sort puts largest remainder first
        assigned += base
    leftover = width - assigned
    if leftover > 0:
        remainders.sort()
        for _, i in remainders[:leftover]:
            widths[i] += 1
    elif leftover < 0:
        order = sorted(range(n), key=lambda i: (-widths[i], i))
        for i in order[:-leftover]:
            widths[i] -= 1
    for i in range(n):
        if widths[i] == 0:
            donor = max(range(n), key=lambda j: (widths[j], -j))
            widths[donor] -= 1
            widths[i] = 1
    return widths


def quantize(decision_or_entries, interval: CoderInterval) -> QuantizedDistribution:
    """Quantize a truncated-and-renormalized distribution over an interval."""
    entries = (
        decision_or_entries.q_entries
        if isinstance(decision_or_entries, TruncationDecision)
        else tuple(decision_or_entries)
    )
    widths = quantize_widths([p for _, p in entries], interval.width)
    return QuantizedDistribution(
        entries=tuple((tok, w) for (tok, _), w in zip(entries, widths)),
        total=interval.width,
    )


def rescale(interval: CoderInterval):
    """Shift out settled leading bits and expand the interval.

    Returns (interval', events) where events is a sequence of ("emit", bit)
    and ("underflow",) records, in order. Each event corresponds to one
    doubling of the interval; the caller advances its message cursor (encoder)
    or recovered-bit buffer (decoder) in lockstep. An "emit" resolves any
    pending underflows as inverted copies of the emitted bit.
    """
    low, high, p = interval.low, interval.high, interval.precision_bits
    full = 1 << p
    half = full >> 1
    quarter = full >> 2
    events = []
    while True:
        if high <= half:
            events.append(("emit", 0))
            low, high = low << 1, high << 1
        elif low >= half:
            events.append(("emit", 1))
            low, high = (low - half) << 1, (high - half) << 1
        elif low >= quarter and high <= half + quarter:
            events.append(("underflow",))
            low, high = (low - quarter) << 1, (high - quarter) << 1
        else:
            break
    return CoderInterval(low, high, p), tuple(events)


@dataclass(slots=True)
class StepTrace:
    """Per-token record of one coding step."""

    t: int
    token: TokenId
    k: int
    z: float
    kl: float
    bits_fixed: int
    low_before: int
    high_before: int
    low_after: int
    high_after: int
    quant_kl: float | None = None
    min_width: int | None = None
    budget: float | None = None
    budget_violated: bool = False
    test_kl: float | None = None
    steer: int | None = None


class _StepSource:
    """Caches truncation decisions per provider context key.

    Decisions for time-varying budgets cannot be shared across steps, so the
    cache key grows a step component only for the inverse-square schedule.
    """

    def __init__(self, provider: DistributionProvider, policy: TruncationPolicy,
                 cache: dict | None = None):
        self.provider = provider
        self.policy = policy
        self._time_varying = (
            isinstance(policy, SelfAdjusting) and policy.schedule != "constant"
        )
        self._cache: dict = {} if cache is None else cache

    def decision(self, ctx, t: int):
        """Returns (TruncationDecision, probabilities list in rank order)."""
        key = self.provider.context_key(ctx)
        if self._time_varying:
            key = (key, t)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        decision = truncate(self.provider.next_distribution(ctx), self.policy, t)
        entry = (decision, [q for _, q in decision.q_entries])
        self._cache[key] = entry
        return entry


def _quantization_kl(widths, total: int, probs) -> float:
    scale = 1.0 / total
    acc = 0.0
    for w, q in zip(widths, probs):
        wq = w * scale
        acc += wq * math.log2(wq / q)
    return max(0.0, acc)


def encode_raw(
    bits,
    provider: DistributionProvider,
    policy: TruncationPolicy,
    ctx: Context,
    *,
    precision_bits: int = DEFAULT_PRECISION,
    detailed_traces: bool = True,
    max_steps: int | None = None,
    decision_cache: dict | None = None,
):
    """Encode a raw bit sequence; generation stops once the renormalization
    has emitted (fixed) at least len(bits) bits.

    Returns (cover tokens, step traces). The caller owns framing; the
    pipeline-facing encode() prepends a length header so the decoder is
    self-delimiting.
    """
    start = CoderInterval.full(precision_bits)  # validates the precision range
    target = len(bits)
    if target < 1:
        raise InputError("cannot encode an empty bit sequence")
    if max_steps is None:
        max_steps = 1000 + 100 * target

    p = precision_bits
    full = start.high
    half = full >> 1
    quarter = full >> 2

    # Window over the message stream: the next `p` bits after those already
    # pulled. Past the end of the message the stream continues "1000...",
    # steering at the midpoint of the message's dyadic interval. Zero padding
    # would park the steering value exactly on a renormalization midpoint
    # whenever the message tail is 1 followed by zeros, and the interval then
    # straddles forever without emitting; the midpoint continuation stays a
    # positive distance from every straddle point, so emission always resumes.
    def pull(i: int) -> int:
        if i < target:
            return bits[i]
        return 1 if i == target else 0

    pos = 0
    value = 0
    for _ in range(p):
        value = (value << 1) | pull(pos)
        pos += 1

    low, high = 0, full
    pending = 0
    emitted = 0
    source = _StepSource(provider, policy, decision_cache)
    full_ctx: list[TokenId] = list(ctx)
    n_ctx = len(full_ctx)
    traces: list[StepTrace] = []
    t = 0

    while emitted < target:
        t += 1
        if t > max_steps:
            raise CoderError(
                f"no termination after {max_steps} steps "
                f"({emitted}/{target} bits fixed); provider/policy emit too little"
            )
        decision, probs = source.decision(full_ctx, t)
        entries = decision.q_entries
        width = high - low
        widths = quantize_widths(probs, width)

        cum = [low]
        acc = low
        for w in widths:
            acc += w
            cum.append(acc)
        j = bisect_right(cum, value) - 1
        token = entries[j][0]
        low_before, high_before = low, high
        value_at_selection = value
        low, high = cum[j], cum[j + 1]

        full_ctx.append(token)

        # Renormalize, advancing the message window one pulled bit per doubling.
        while True:
            if high <= half:
                pass
            elif low >= half:
                low -= half
                high -= half
                value -= half
            elif low >= quarter and high <= half + quarter:
                pending += 1
                low -= quarter
                high -= quarter
                value -= quarter
                low <<= 1
                high <<= 1
                value = (value << 1) | pull(pos)
                pos += 1
                continue
            else:
                break
            emitted += 1 + pending
            pending = 0
            low <<= 1
            high <<= 1
            value = (value << 1) | pull(pos)
            pos += 1

        trace = StepTrace(
            t=t,
            token=token,
            k=decision.k,
            z=decision.z,
            kl=decision.kl,
            bits_fixed=min(emitted, target),
            low_before=low_before,
            high_before=high_before,
            low_after=cum[j],
            high_after=cum[j + 1],
            budget=decision.budget,
            budget_violated=decision.budget_violated,
        )
        if detailed_traces:
            trace.quant_kl = _quantization_kl(widths, width, probs)
            trace.min_width = min(widths)
            trace.steer = value_at_selection
        traces.append(trace)

    return full_ctx[n_ctx:], traces


def decode_raw(
    cover,
    provider: DistributionProvider,
    policy: TruncationPolicy,
    ctx: Context,
    *,
    precision_bits: int = DEFAULT_PRECISION,
    detailed_traces: bool = False,
    decision_cache: dict | None = None,
):
    """Replay the encoder's interval sequence over a received cover.

    Returns (recovered bits, step traces). The recovered bits are everything
    the replayed renormalization emits; framing decides how many are message.
    """
    start = CoderInterval.full(precision_bits)  # validates the precision range
    full = start.high
    half = full >> 1
    quarter = full >> 2

    low, high = 0, full
    pending = 0
    out: list[int] = []
    source = _StepSource(provider, policy, decision_cache)
    full_ctx: list[TokenId] = list(ctx)
    traces: list[StepTrace] = []

    for t, token in enumerate(cover, start=1):
        decision, probs = source.decision(full_ctx, t)
        entries = decision.q_entries
        width = high - low
        widths = quantize_widths(probs, width)

        j = None
        acc = low
        cum = [low]
        for (tok, _), w in zip(entries, widths):
            if tok == token:
                j = len(cum) - 1
            acc += w
            cum.append(acc)
        if j is None:
            raise SupportMismatch(
                f"cover token {token} outside truncated support at step {t}"
            )
        low_before, high_before = low, high
        low, high = cum[j], cum[j + 1]
        full_ctx.append(token)

        while True:
            if high <= half:
                bit = 0
            elif low >= half:
                bit = 1
                low -= half
                high -= half
            elif low >= quarter and high <= half + quarter:
                pending += 1
                low = (low - quarter) << 1
                high = (high - quarter) << 1
                continue
            else:
                break
            out.append(bit)
            out.extend([bit ^ 1] * pending)
            pending = 0
            low <<= 1
            high <<= 1

        trace = StepTrace(
            t=t,
            token=token,
            k=decision.k,
            z=decision.z,
            kl=decision.kl,
            bits_fixed=len(out),
            low_before=low_before,
            high_before=high_before,
            low_after=cum[j],
            high_after=cum[j + 1],
            budget=decision.budget,
            budget_violated=decision.budget_violated,
        )
        if detailed_traces:
            trace.quant_kl = _quantization_kl(widths, width, probs)
            trace.min_width = min(widths)
        traces.append(trace)

    return out, traces


def encode(
    ciphertext: Ciphertext,
    provider: DistributionProvider,
    policy: TruncationPolicy,
    ctx: Context = (),
    *,
    precision_bits: int = DEFAULT_PRECISION,
    detailed_traces: bool = True,
    max_steps: int | None = None,
    decision_cache: dict | None = None,
):
    """Encode a ciphertext into a self-delimiting cover token sequence."""
    return encode_raw(
        frame(ciphertext),
        provider,
        policy,
        ctx,
        precision_bits=precision_bits,
        detailed_traces=detailed_traces,
        max_steps=max_steps,
        decision_cache=decision_cache,
    )


def decode(
    cover,
    provider: DistributionProvider,
    policy: TruncationPolicy,
    ctx: Context = (),
    *,
    precision_bits: int = DEFAULT_PRECISION,
    return_traces: bool = False,
    decision_cache: dict | None = None,
):
    """Recover the ciphertext from a cover produced by encode() under the
    same provider, policy, context, and precision."""
    recovered, traces = decode_raw(
        cover, provider, policy, ctx, precision_bits=precision_bits,
        decision_cache=decision_cache,
    )
    ciphertext = unframe(recovered)
    if return_traces:
        return ciphertext, traces
    return ciphertext
