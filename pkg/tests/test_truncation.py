import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from covertext.distributions import make_distribution
from covertext.errors import InputError
from covertext.truncation import (
    SelfAdjusting,
    StaticK,
    policy_from_spec,
    select_min_k,
    total_bound,
    truncate,
    truncation_kl_direct,
)


def dist_of(*probs):
    return make_distribution({i: p for i, p in enumerate(probs)})


class TestTruncate:
    def test_static_k_on_uniform_four(self):
        decision = truncate(dist_of(0.25, 0.25, 0.25, 0.25), StaticK(2))
        assert decision.k == 2
        assert decision.z == pytest.approx(0.5)
        assert decision.kl == pytest.approx(1.0)  # -log2(0.5)

    def test_static_k_covering_support_is_lossless(self):
        decision = truncate(dist_of(0.7, 0.2, 0.1), StaticK(10))
        assert decision.k == 3
        assert decision.z == pytest.approx(1.0)
        assert decision.kl == 0.0

    def test_self_adjusting_example(self):
        # threshold 2^-0.1 ~ 0.93303; cumulative masses 0.5, 0.8, 0.9, 1.0
        decision = truncate(dist_of(0.5, 0.3, 0.1, 0.1), SelfAdjusting(0.1))
        assert decision.budget == pytest.approx(0.1)
        assert decision.k == 4
        assert decision.z == pytest.approx(1.0)
        assert decision.kl == 0.0

    def test_q_renormalized_and_ordered(self):
        decision = truncate(dist_of(0.5, 0.3, 0.1, 0.1), StaticK(2))
        assert decision.tokens == (0, 1)
        assert [q for _, q in decision.q_entries] == pytest.approx([0.625, 0.375])
        assert math.fsum(q for _, q in decision.q_entries) == pytest.approx(1.0)

    def test_k_max_cap_flags_violation(self):
        policy = SelfAdjusting(0.001, k_max=2)
        decision = truncate(dist_of(0.3, 0.3, 0.2, 0.2), policy)
        assert decision.k == 2
        assert decision.budget_violated
        assert decision.kl > decision.budget


class TestSelectMinK:
    def test_tight_top1(self):
        assert select_min_k(dist_of(0.95, 0.05), 0.1) == 1  # 0.95 >= 0.93303

    def test_loose_budget_takes_top1(self):
        d = dist_of(0.4, 0.3, 0.2, 0.1)
        assert select_min_k(d, 10.0) == 1  # threshold ~0.000977

    def test_uniform_1024_closed_form(self):
        d = dist_of(*([1.0 / 1024] * 1024))
        assert select_min_k(d, 0.01) == 1017  # ceil(0.993092 * 1024)

    def test_rejects_nonpositive_delta(self):
        with pytest.raises(InputError):
            select_min_k(dist_of(1.0), 0.0)


class TestTotalBound:
    def test_inverse_square_closed_form(self):
        assert total_bound(0.01, "inverse_square") == pytest.approx(0.07551, abs=1e-4)

    def test_zero_budget(self):
        assert total_bound(0.0, "inverse_square") == 0.0
        assert total_bound(0.0, "constant", horizon=10) == 0.0

    def test_constant_with_horizon(self):
        # sqrt(ln2/2 * 100 * 0.05) ~ 1.3164, vacuous but reported
        assert total_bound(0.05, "constant", horizon=100) == pytest.approx(1.3164, abs=1e-4)

    def test_constant_without_horizon_is_an_error(self):
        with pytest.raises(InputError):
            total_bound(0.05, "constant")


@st.composite
def distributions(draw):
    n = draw(st.integers(2, 50))
    weights = draw(st.lists(st.integers(1, 10_000), min_size=n, max_size=n))
    total = sum(weights)
    return make_distribution({i: w / total for i, w in enumerate(weights)})


@given(distributions(), st.floats(1e-4, 1.0))
def test_kl_identity_matches_direct_computation(dist, delta):
    decision = truncate(dist, SelfAdjusting(delta))
    assert decision.kl == pytest.approx(truncation_kl_direct(decision, dist), abs=1e-9)


@given(distributions(), st.floats(1e-4, 1.0))
def test_budget_satisfaction_and_minimality(dist, delta):
    k = select_min_k(dist, delta)
    threshold = 2.0 ** -delta
    cumulative = 0.0
    for i, (_, p) in enumerate(dist.entries[:k]):
        cumulative += p
    assert cumulative >= threshold
    if k > 1:
        assert cumulative - dist.entries[k - 1][1] < threshold
    decision = truncate(dist, SelfAdjusting(delta))
    assert decision.kl <= delta + 1e-12


@given(distributions(), st.floats(1e-4, 0.5), st.floats(1e-4, 0.5))
def test_select_min_k_monotone_in_delta(dist, d1, d2):
    lo, hi = sorted([d1, d2])
    # larger budget -> weaker threshold -> no larger K
    assert select_min_k(dist, hi) <= select_min_k(dist, lo)


@given(distributions(), st.integers(2, 30), st.integers(2, 30))
def test_static_kl_inflation(dist, k1, k2):
    small, large = sorted([k1, k2])
    kl_small = truncate(dist, StaticK(small)).kl
    kl_large = truncate(dist, StaticK(large)).kl
    assert kl_small >= kl_large - 1e-12


def test_policy_specs_parse():
    assert policy_from_spec({"policy": "static", "k": 300}) == StaticK(300)
    policy = policy_from_spec({"policy": "saac", "delta0": 0.01, "schedule": "constant"})
    assert policy == SelfAdjusting(0.01, "constant")
    with pytest.raises(InputError):
        policy_from_spec({"policy": "nope"})


def test_policy_invariants():
    with pytest.raises(InputError):
        StaticK(1)  # K=1 carries no information and never terminates
    with pytest.raises(InputError):
        SelfAdjusting(0.0)
    with pytest.raises(InputError):
        SelfAdjusting(1.5)
    with pytest.raises(InputError):
        SelfAdjusting(0.1, schedule="linear")


def test_inverse_square_budgets():
    policy = SelfAdjusting(0.08, schedule="inverse_square")
    assert policy.budget_at(1) == pytest.approx(0.08)
    assert policy.budget_at(4) == pytest.approx(0.005)
