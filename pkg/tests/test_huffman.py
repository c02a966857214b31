import math

import pytest

from covertext.huffman import CanonicalCode, code_lengths


def test_textbook_depths():
    assert code_lengths([0.5, 0.25, 0.125, 0.125]) == [1, 2, 3, 3]


def test_two_symbols():
    assert code_lengths([0.6, 0.4]) == [1, 1]


def test_single_symbol_degenerate():
    assert code_lengths([1.0]) == [0]


def test_canonical_codes_dyadic():
    code = CanonicalCode.from_weights([0.5, 0.25, 0.125, 0.125])
    assert code.codes == ((0b0, 1), (0b10, 2), (0b110, 3), (0b111, 3))
    assert code.bits_of(1) == [1, 0]


def test_bit_zero_reaches_most_likely_leaf():
    code = CanonicalCode.from_weights([0.6, 0.4])
    bits = iter([0])
    rank, consumed = code.walk(lambda: next(bits))
    assert rank == 0 and consumed == [0]


def test_walk_follows_path_to_depth2_leaf():
    code = CanonicalCode.from_weights([0.5, 0.25, 0.125, 0.125])
    bits = iter([1, 0])
    rank, consumed = code.walk(lambda: next(bits))
    assert rank == 1
    assert consumed == [1, 0]


def test_implied_distribution_sums_to_one():
    for weights in ([0.4, 0.3, 0.2, 0.1], [0.2] * 5, [0.9, 0.05, 0.03, 0.02]):
        code = CanonicalCode.from_weights(weights)
        total = sum(2.0 ** -d for d in code.depths)
        assert total == pytest.approx(1.0)


def test_kl_against_is_nonnegative_and_finite():
    weights = [0.4, 0.3, 0.2, 0.1]
    code = CanonicalCode.from_weights(weights)
    kl = code.kl_against(weights)
    assert math.isfinite(kl)
    assert kl >= 0.0


def test_deterministic_ties():
    # equal weights force merge ties; insertion order must resolve them
    # identically every time
    first = CanonicalCode.from_weights([0.25] * 4)
    second = CanonicalCode.from_weights([0.25] * 4)
    assert first.codes == second.codes
    assert first.depths == (2, 2, 2, 2)
