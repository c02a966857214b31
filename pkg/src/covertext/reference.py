"""Exact-rational reference coder: infinite-precision interval arithmetic.

This is the independent check for the fixed-precision engine. Intervals are
Fractions, sub-intervals are split exactly proportionally to the truncated
probabilities (no integer quantization), and the stop rule is literal: stop
once every fraction prefixed by the message falls inside the current
interval. Selections agree with the production coder except where integer
quantization moves a boundary, which is the discrepancy the equivalence
tests measure.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .distributions import DistributionProvider
from .errors import CoderError, SupportMismatch
from .truncation import TruncationPolicy, truncate
from .vocab import Context, TokenId

ONE = Fraction(1)
HALF = Fraction(1, 2)


@dataclass
class ReferenceStep:
    t: int
    token: TokenId
    low: Fraction
    high: Fraction


def _split(entries, low: Fraction, high: Fraction):
    """Exact sub-interval boundaries of [low, high) in rank order."""
    width = high - low
    bounds = [low]
    acc = Fraction(0)
    for _, q in entries:
        acc += Fraction(q)
        bounds.append(low + acc * width)
    bounds[-1] = high  # guard the float-sum residue; mass is renormalized to 1
    return bounds


def reference_encode(
    bits,
    provider: DistributionProvider,
    policy: TruncationPolicy,
    ctx: Context = (),
    *,
    max_steps: int = 10000,
):
    """Encode with exact rationals; returns (cover, steps).

    Stops once the interval lies inside the message's dyadic interval, i.e.
    every fraction prefixed by the message bits is certified. The steering
    value sits at the dyadic interval's midpoint: an exact coder tracking the
    left edge (the zero-extension) would converge to it from below and never
    certify the last bit, so the message is treated as having an implicit
    continuation, which is also how a message shorter than the cover's
    capacity is read off a real channel.
    """
    n = len(bits)
    msg_low = Fraction(int("".join(map(str, bits)), 2) if n else 0, 1 << n)
    msg_high = msg_low + Fraction(1, 1 << n)
    steer = msg_low + Fraction(1, 1 << (n + 1))

    low, high = Fraction(0), ONE
    cover: list[TokenId] = []
    steps: list[ReferenceStep] = []
    context = tuple(ctx)
    t = 0
    while not (msg_low <= low and high <= msg_high):
        t += 1
        if t > max_steps:
            raise CoderError(f"reference encoder made no progress after {max_steps} steps")
        decision = truncate(provider.next_distribution(context + tuple(cover)), policy, t)
        bounds = _split(decision.q_entries, low, high)
        j = _locate(bounds, steer)
        token = decision.q_entries[j][0]
        low, high = bounds[j], bounds[j + 1]
        cover.append(token)
        steps.append(ReferenceStep(t=t, token=token, low=low, high=high))
    return cover, steps


def _locate(bounds, x: Fraction) -> int:
    lo, hi = 0, len(bounds) - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if bounds[mid] <= x:
            lo = mid
        else:
            hi = mid
    return lo


def reference_decode(
    cover,
    provider: DistributionProvider,
    policy: TruncationPolicy,
    ctx: Context = (),
):
    """Replay a cover exactly; returns (common prefix bits, final interval).

    The recovered bits are the shared binary prefix of the final interval's
    endpoints, which is what the encoder arranged to carry the message.
    """
    low, high = Fraction(0), ONE
    context = tuple(ctx)
    seen: list[TokenId] = []
    for t, token in enumerate(cover, start=1):
        decision = truncate(provider.next_distribution(context + tuple(seen)), policy, t)
        bounds = _split(decision.q_entries, low, high)
        j = None
        for i, (tok, _) in enumerate(decision.q_entries):
            if tok == token:
                j = i
                break
        if j is None:
            raise SupportMismatch(f"cover token {token} outside truncated support at step {t}")
        low, high = bounds[j], bounds[j + 1]
        seen.append(token)
    return common_prefix_bits(low, high), (low, high)


def common_prefix_bits(low: Fraction, high: Fraction) -> list[int]:
    """Shared leading binary-fraction bits of low and (high - ulp).

    Computed by repeated doubling while the half-open interval stays within
    one half of [0, 1).
    """
    bits = []
    lo, hi = low, high
    while True:
        if hi <= HALF:
            bits.append(0)
            lo, hi = lo * 2, hi * 2
        elif lo >= HALF:
            bits.append(1)
            lo, hi = (lo - HALF) * 2, (hi - HALF) * 2
        else:
            return bits


def verify_step_selection(q_entries, low: int, high: int, steer: int, chosen: TokenId):
    """Exact-rational check of one fixed-precision selection.

    Splits the integer interval [low, high) proportionally to q_entries with
    exact arithmetic and locates the steering window value. The true steering
    point lies in [steer, steer+1); if an exact boundary cuts that unit the
    outcome depends on invisible continuation bits and the check is waived.

    Returns "match", "mismatch", or "ambiguous".
    """
    lo = Fraction(low)
    width = Fraction(high - low)
    acc = Fraction(0)
    bounds = [lo]
    for _, q in q_entries:
        acc += Fraction(q)
        bounds.append(lo + acc * width)
    bounds[-1] = Fraction(high)
    j_lo = _locate(bounds, Fraction(steer))
    j_hi = _locate(bounds, Fraction(steer) + 1 - Fraction(1, 1 << 60))
    if j_lo != j_hi:
        return "ambiguous"
    return "match" if q_entries[j_lo][0] == chosen else "mismatch"


def reference_select_tokens(
    bits,
    provider: DistributionProvider,
    policy: TruncationPolicy,
    ctx: Context,
    n_steps: int,
):
    """First n_steps token selections for a message, without a stop rule.

    Used for equivalence checks against the fixed-precision coder when the
    message is longer than the steps being compared; steers by the same
    midpoint extension the production coder uses.
    """
    n = len(bits)
    steer = Fraction(int("".join(map(str, bits)), 2) if n else 0, 1 << n)
    steer += Fraction(1, 1 << (n + 1))
    low, high = Fraction(0), ONE
    cover: list[TokenId] = []
    context = tuple(ctx)
    for t in range(1, n_steps + 1):
        decision = truncate(provider.next_distribution(context + tuple(cover)), policy, t)
        bounds = _split(decision.q_entries, low, high)
        j = _locate(bounds, steer)
        cover.append(decision.q_entries[j][0])
        low, high = bounds[j], bounds[j + 1]
    return cover
