"""Canonical byte encoding shared by every hashed or persisted structure.

All integers are big-endian and fixed width. Variable-length byte strings
and lists carry a 4-byte length prefix. Variant types are tagged with a
single byte. Two nodes must produce bit-identical encodings for the same
value, so nothing here may depend on platform, locale, or dict order.
"""

from __future__ import annotations

import struct


class DecodeError(ValueError):
    """Raised when bytes do not decode under the canonical layout."""


def enc_u8(value: int) -> bytes:
    if not 0 <= value <= 0xFF:
        raise ValueError(f"u8 out of range: {value}")
    return value.to_bytes(1, "big")


def enc_u32(value: int) -> bytes:
    if not 0 <= value <= 0xFFFFFFFF:
        raise ValueError(f"u32 out of range: {value}")
    return value.to_bytes(4, "big")


def enc_u64(value: int) -> bytes:
    if not 0 <= value <= 0xFFFFFFFFFFFFFFFF:
        raise ValueError(f"u64 out of range: {value}")
    return value.to_bytes(8, "big")


def enc_i32(value: int) -> bytes:
    try:
        return struct.pack(">i", value)
    except struct.error as exc:
        raise ValueError(f"i32 out of range: {value}") from exc


def enc_i64(value: int) -> bytes:
    try:
        return struct.pack(">q", value)
    except struct.error as exc:
        raise ValueError(f"i64 out of range: {value}") from exc


def enc_bool(value: bool) -> bytes:
    return b"\x01" if value else b"\x00"


def enc_bytes(value: bytes) -> bytes:
    return enc_u32(len(value)) + value


def enc_str(value: str) -> bytes:
    return enc_bytes(value.encode("utf-8"))


class Reader:
    """Sequential decoder over one canonical byte string."""

    __slots__ = ("_buf", "_pos")

    def __init__(self, buf: bytes):
        self._buf = buf
        self._pos = 0

    def take(self, n: int) -> bytes:
        if n < 0 or self._pos + n > len(self._buf):
            raise DecodeError(f"short read: wanted {n} bytes at offset {self._pos}")
        out = self._buf[self._pos : self._pos + n]
        self._pos += n
        return out

    def u8(self) -> int:
        return self.take(1)[0]

    def u32(self) -> int:
        return int.from_bytes(self.take(4), "big")

    def u64(self) -> int:
        return int.from_bytes(self.take(8), "big")

    def i32(self) -> int:
        return struct.unpack(">i", self.take(4))[0]

    def i64(self) -> int:
        return struct.unpack(">q", self.take(8))[0]

    def boolean(self) -> bool:
        b = self.u8()
        if b not in (0, 1):
            raise DecodeError(f"bad bool byte: {b}")
        return b == 1

    def blob(self) -> bytes:
        return self.take(self.u32())

    def string(self) -> str:
        raw = self.blob()
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DecodeError("invalid utf-8 in string field") from exc

    @property
    def offset(self) -> int:
        return self._pos

    def remaining(self) -> int:
        return len(self._buf) - self._pos

    def expect_end(self) -> None:
        if self.remaining() != 0:
            raise DecodeError(f"{self.remaining()} trailing bytes after decode")
