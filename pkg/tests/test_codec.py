from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from agrichain.codec import (
    DecodeError,
    Reader,
    enc_bool,
    enc_bytes,
    enc_i32,
    enc_i64,
    enc_str,
    enc_u8,
    enc_u32,
    enc_u64,
)


@given(st.integers(min_value=0, max_value=0xFF))
def test_u8_round_trip(value):
    assert Reader(enc_u8(value)).u8() == value


@given(st.integers(min_value=0, max_value=0xFFFFFFFF))
def test_u32_round_trip(value):
    assert Reader(enc_u32(value)).u32() == value


@given(st.integers(min_value=0, max_value=0xFFFFFFFFFFFFFFFF))
def test_u64_round_trip(value):
    assert Reader(enc_u64(value)).u64() == value


@given(st.integers(min_value=-(2**31), max_value=2**31 - 1))
def test_i32_round_trip(value):
    assert Reader(enc_i32(value)).i32() == value


@given(st.integers(min_value=-(2**63), max_value=2**63 - 1))
def test_i64_round_trip(value):
    assert Reader(enc_i64(value)).i64() == value


@given(st.binary(max_size=300))
def test_bytes_round_trip(value):
    r = Reader(enc_bytes(value))
    assert r.blob() == value
    r.expect_end()


@given(st.text(max_size=120))
def test_str_round_trip(value):
    assert Reader(enc_str(value)).string() == value


@given(st.booleans())
def test_bool_round_trip(value):
    assert Reader(enc_bool(value)).boolean() is value


def test_big_endian_layout():
    assert enc_u32(1) == b"\x00\x00\x00\x01"
    assert enc_u64(0x0102030405060708) == bytes([1, 2, 3, 4, 5, 6, 7, 8])
    assert enc_i32(-1) == b"\xff\xff\xff\xff"


def test_out_of_range_rejected():
    with pytest.raises(ValueError):
        enc_u8(256)
    with pytest.raises(ValueError):
        enc_u32(-1)
    with pytest.raises(ValueError):
        enc_u64(2**64)
    with pytest.raises(ValueError):
        enc_i32(2**31)


def test_short_read_raises():
    r = Reader(b"\x00\x01")
    with pytest.raises(DecodeError):
        r.u32()


def test_trailing_bytes_detected():
    r = Reader(enc_u8(7) + b"extra")
    r.u8()
    with pytest.raises(DecodeError):
        r.expect_end()


def test_bad_bool_byte():
    with pytest.raises(DecodeError):
        Reader(b"\x02").boolean()


def test_invalid_utf8_rejected():
    with pytest.raises(DecodeError):
        Reader(enc_bytes(b"\xff\xfe")).string()


@given(st.lists(st.tuples(st.integers(0, 2**32 - 1), st.binary(max_size=40)), max_size=12))
def test_sequence_round_trip(items):
    buf = enc_u32(len(items))
    for n, b in items:
        buf += enc_u32(n) + enc_bytes(b)
    r = Reader(buf)
    decoded = [(r.u32(), r.blob()) for _ in range(r.u32())]
    r.expect_end()
    assert decoded == items
