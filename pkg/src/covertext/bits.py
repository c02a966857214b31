"""Ciphertext bit sequences, MSB-first byte packing, and length framing."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import FramingError, InputError

HEADER_BITS = 32


@dataclass(frozen=True)
class Ciphertext:
    """An ordered bit sequence, most significant bit first.

    Read as the binary fraction B(m) = sum m_i * 2^-i, which is the single
    number the arithmetic coder steers its interval around.
    """

    bits: tuple[int, ...]

    def __post_init__(self):
        if len(self.bits) < 1:
            raise InputError("ciphertext must contain at least one bit")
        if any(b not in (0, 1) for b in self.bits):
            raise InputError("ciphertext bits must be 0 or 1")

    def __len__(self) -> int:
        return len(self.bits)

    def value(self) -> Fraction:
        """Exact value of the binary fraction B(m) in [0, 1)."""
        return Fraction(int("".join(map(str, self.bits)), 2), 1 << len(self.bits))

    @classmethod
    def from_bytes(cls, data: bytes, bit_length: int | None = None) -> "Ciphertext":
        bits = bits_from_bytes(data)
        if bit_length is not None:
            if bit_length > len(bits):
                raise InputError("bit_length exceeds available bits")
            bits = bits[:bit_length]
        return cls(bits=tuple(bits))

    def to_bytes(self) -> bytes:
        """Pack big-endian, zero-padding the final partial byte."""
        return bytes_from_bits(self.bits)


def bits_from_bytes(data: bytes) -> list[int]:
    out = []
    for byte in data:
        for shift in range(7, -1, -1):
            out.append((byte >> shift) & 1)
    return out


def bytes_from_bits(bits) -> bytes:
    out = bytearray()
    acc = 0
    n = 0
    for b in bits:
        acc = (acc << 1) | b
        n += 1
        if n == 8:
            out.append(acc)
            acc = n = 0
    if n:
        out.append(acc << (8 - n))
    return bytes(out)


def int_to_bits(value: int, width: int) -> list[int]:
    if value < 0 or value >= (1 << width):
        raise InputError(f"value {value} does not fit in {width} bits")
    return [(value >> shift) & 1 for shift in range(width - 1, -1, -1)]


def bits_to_int(bits) -> int:
    acc = 0
    for b in bits:
        acc = (acc << 1) | b
    return acc


def frame(ciphertext: Ciphertext) -> list[int]:
    """Prepend the 32-bit big-endian payload length; the decoder uses it to
    know where the message ends inside the recovered bit stream."""
    return int_to_bits(len(ciphertext), HEADER_BITS) + list(ciphertext.bits)


def unframe(bits) -> Ciphertext:
    if len(bits) < HEADER_BITS:
        raise FramingError(f"recovered only {len(bits)} bits, header needs {HEADER_BITS}")
    length = bits_to_int(bits[:HEADER_BITS])
    if length < 1:
        raise FramingError("length header claims an empty message")
    if len(bits) < HEADER_BITS + length:
        raise FramingError(
            f"length header claims {length} payload bits but only "
            f"{len(bits) - HEADER_BITS} were recovered"
        )
    return Ciphertext(bits=tuple(bits[HEADER_BITS:HEADER_BITS + length]))
