"""Truncation policies: static top-K and the self-adjusting minimal-K rule.

Restricting a distribution to its top-K tokens and renormalizing costs exactly
-log2(Z_K) bits of divergence from the original, where Z_K is the retained
mass. The self-adjusting rule picks, per step, the smallest K whose retained
mass meets a budget threshold 2^(-delta_t); with the inverse-square budget
schedule the whole-sequence total variation stays bounded regardless of
message length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from .distributions import NextTokenDistribution
from .errors import InputError
from .vocab import TokenId

DEFAULT_K_MAX = 4096

CONSTANT = "constant"
INVERSE_SQUARE = "inverse_square"
_SCHEDULES = (CONSTANT, INVERSE_SQUARE)


@dataclass(frozen=True)
class StaticK:
    """Truncate to a fixed top-K every step. K=1 would carry zero information
    per step and never terminate, hence the K >= 2 floor."""

    k: int

    def __post_init__(self):
        if self.k < 2:
            raise InputError("static K must be >= 2")


@dataclass(frozen=True)
class SelfAdjusting:
    """Pick the minimal K meeting a per-step divergence budget.

    delta0 is the budget at step 1; the schedule either holds it constant or
    decays it as delta0/t^2. k_max bounds the search; a step that cannot meet
    its budget within k_max uses k_max and is flagged on the decision.
    """

    delta0: float
    schedule: str = CONSTANT
    k_max: int = DEFAULT_K_MAX

    def __post_init__(self):
        if not 0.0 < self.delta0 <= 1.0:
            raise InputError("delta0 must be in (0, 1]")
        if self.schedule not in _SCHEDULES:
            raise InputError(f"unknown schedule {self.schedule!r}")
        if self.k_max < 1:
            raise InputError("k_max must be >= 1")

    def budget_at(self, t: int) -> float:
        if self.schedule == CONSTANT:
            return self.delta0
        return self.delta0 / (t * t)


TruncationPolicy = Union[StaticK, SelfAdjusting]


@dataclass(frozen=True)
class TruncationDecision:
    """Outcome of truncating one step's distribution.

    q_entries holds the renormalized retained distribution in the source sort
    order; kl is the truncation divergence -log2(Z_K) in bits.
    """

    k: int
    tokens: tuple[TokenId, ...]
    z: float
    q_entries: tuple[tuple[TokenId, float], ...]
    kl: float
    budget: float | None = None
    budget_violated: bool = False


def select_min_k(dist: NextTokenDistribution, delta: float) -> int:
    """Smallest K whose cumulative top-K mass reaches 2^(-delta).

    The full support always qualifies (total mass 1 >= 2^(-delta)), so the
    scan cannot fall off the end.
    """
    if delta <= 0.0:
        raise InputError("delta must be > 0")
    threshold = 2.0 ** (-delta)
    cum = 0.0
    for i, (_, p) in enumerate(dist.entries):
        cum += p
        if cum >= threshold:
            return i + 1
    return len(dist.entries)


def truncate(dist: NextTokenDistribution, policy: TruncationPolicy, t: int = 1) -> TruncationDecision:
    """Apply a policy to one step's distribution, renormalizing the survivors."""
    budget = None
    violated = False
    if isinstance(policy, StaticK):
        k = min(policy.k, len(dist.entries))
    else:
        budget = policy.budget_at(t)
        k = select_min_k(dist, budget)
        if k > policy.k_max:
            k = policy.k_max
            violated = True

    head = dist.entries[:k]
    z = math.fsum(p for _, p in head)
    q = tuple((tok, p / z) for tok, p in head)
    kl = max(0.0, -math.log2(z))
    return TruncationDecision(
        k=k,
        tokens=tuple(tok for tok, _ in head),
        z=z,
        q_entries=q,
        kl=kl,
        budget=budget,
        budget_violated=violated,
    )


def truncation_kl_direct(decision: TruncationDecision, dist: NextTokenDistribution) -> float:
    """D_KL(Q || P) in bits computed term by term, as an independent check of
    the -log2(Z_K) closed form."""
    p = dict(dist.entries)
    return math.fsum(q * math.log2(q / p[tok]) for tok, q in decision.q_entries)


def total_bound(delta0: float, schedule: str, horizon: int | None = None) -> float:
    """A-priori Pinsker bound on total variation for a budget schedule.

    Inverse-square budgets give the length-agnostic closed form
    sqrt(pi^2 * ln2 / 12 * delta0); a constant budget is only bounded over a
    finite horizon T, giving sqrt(ln2 / 2 * T * delta0). Values above 1 are
    vacuous (total variation never exceeds 1) but still reported.
    """
    if delta0 < 0.0:
        raise InputError("delta0 must be >= 0")
    if schedule == INVERSE_SQUARE:
        return math.sqrt(math.pi ** 2 * math.log(2) / 12.0 * delta0)
    if schedule == CONSTANT:
        if horizon is None:
            raise InputError("constant schedule needs a finite horizon for a total bound")
        return math.sqrt(math.log(2) / 2.0 * horizon * delta0)
    raise InputError(f"unknown schedule {schedule!r}")


def policy_from_spec(spec: dict) -> TruncationPolicy:
    """Parse the config-file form of a truncation policy."""
    kind = spec.get("policy")
    if kind == "static":
        return StaticK(k=int(spec["k"]))
    if kind == "saac":
        return SelfAdjusting(
            delta0=float(spec["delta0"]),
            schedule=spec.get("schedule", CONSTANT),
            k_max=int(spec.get("k_max", DEFAULT_K_MAX)),
        )
    raise InputError(f"unknown truncation policy spec: {spec!r}")
