from fractions import Fraction

import pytest

from covertext.bits import (
    Ciphertext,
    bits_from_bytes,
    bytes_from_bits,
    frame,
    unframe,
)
from covertext.errors import FramingError, InputError


def test_binary_fraction_value():
    # B([1,0,1]) = 2^-1 + 2^-3 = 0.625
    assert Ciphertext(bits=(1, 0, 1)).value() == Fraction(5, 8)


def test_value_in_unit_interval():
    assert Ciphertext(bits=(1,) * 20).value() < 1
    assert Ciphertext(bits=(0,) * 20).value() == 0


def test_empty_and_invalid_bits_rejected():
    with pytest.raises(InputError):
        Ciphertext(bits=())
    with pytest.raises(InputError):
        Ciphertext(bits=(0, 2))


def test_byte_packing_is_msb_first():
    assert bits_from_bytes(b"\xa0") == [1, 0, 1, 0, 0, 0, 0, 0]
    assert bytes_from_bits([1, 0, 1]) == b"\xa0"  # zero-padded tail
    ct = Ciphertext.from_bytes(b"\x0f\xf0")
    assert ct.to_bytes() == b"\x0f\xf0"


def test_from_bytes_with_bit_length():
    ct = Ciphertext.from_bytes(b"\xff", bit_length=3)
    assert ct.bits == (1, 1, 1)
    with pytest.raises(InputError):
        Ciphertext.from_bytes(b"\xff", bit_length=9)


def test_frame_roundtrip():
    ct = Ciphertext(bits=(1, 0, 1, 1))
    framed = frame(ct)
    assert len(framed) == 32 + 4
    assert framed[:32] == [0] * 29 + [1, 0, 0]  # 4 big-endian
    assert unframe(framed) == ct
    # trailing garbage beyond the header-declared length is discarded
    assert unframe(framed + [1, 1, 1]) == ct


def test_unframe_errors():
    with pytest.raises(FramingError):
        unframe([0] * 10)
    with pytest.raises(FramingError):
        unframe([0] * 32)  # claims empty message
    ct = Ciphertext(bits=(1,) * 8)
    with pytest.raises(FramingError):
        unframe(frame(ct)[:-1])  # one payload bit missing
