"""Append-only block persistence.

File layout: magic "AGRI", format version u32, then records of
(u32 length, canonical block bytes). Appends are flushed and fsynced
before being acknowledged. On open, a truncated trailing record — the
footprint of a crash mid-append — is detected and ignored, so the log
always reopens to the longest intact prefix.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Optional

from .codec import DecodeError
from .ledger import Block, decode_block, encode_block

MAGIC = b"AGRI"
FORMAT_VERSION = 1
_HEADER_LEN = 8


class StorageError(Exception):
    pass


class NotChild(StorageError):
    """Appended block does not extend the log's tip."""


class CorruptLog(StorageError):
    """Header or an interior record is unreadable."""


class BlockLog:
    """Durable ordered block store backing one node."""

    def __init__(self, path: Path):
        self.path = Path(path)
        self._blocks: list[Block] = []
        self._fh = None
        self._open()

    def _open(self) -> None:
        exists = self.path.exists()
        if not exists:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "wb") as fh:
                fh.write(MAGIC + FORMAT_VERSION.to_bytes(4, "big"))
                fh.flush()
                os.fsync(fh.fileno())
        raw = self.path.read_bytes()
        if len(raw) < _HEADER_LEN or raw[:4] != MAGIC:
            raise CorruptLog(f"{self.path} is not a block log")
        version = int.from_bytes(raw[4:8], "big")
        if version != FORMAT_VERSION:
            raise CorruptLog(f"unsupported log format version {version}")

        offset = _HEADER_LEN
        valid_end = offset
        while True:
            if offset + 4 > len(raw):
                break  # crash left a partial length prefix; ignore
            length = int.from_bytes(raw[offset : offset + 4], "big")
            if offset + 4 + length > len(raw):
                break  # partial record payload; ignore
            try:
                block = decode_block(raw[offset + 4 : offset + 4 + length])
            except DecodeError:
                # A torn tail that still parses as a full-length frame but
                # not as a block is treated the same as a short write.
                break
            self._blocks.append(block)
            offset += 4 + length
            valid_end = offset

        self._fh = open(self.path, "r+b")
        self._fh.seek(valid_end)
        self._fh.truncate()

    @property
    def blocks(self) -> list[Block]:
        return list(self._blocks)

    def __len__(self) -> int:
        return len(self._blocks)

    def tip(self) -> Optional[Block]:
        return self._blocks[-1] if self._blocks else None

    def append_block(self, block: Block) -> None:
        tip = self.tip()
        if tip is None:
            if block.header.prev_hash != b"\x00" * 32:
                raise NotChild("first record must be a genesis block")
        elif block.header.prev_hash != tip.hash:
            raise NotChild(
                f"block parent {block.header.prev_hash.hex()[:12]} is not tip {tip.hash.hex()[:12]}"
            )
        payload = encode_block(block)
        try:
            self._fh.write(len(payload).to_bytes(4, "big") + payload)
            self._fh.flush()
            os.fsync(self._fh.fileno())
        except OSError as exc:
            raise StorageError(f"append failed: {exc}") from exc
        self._blocks.append(block)

    def rewind_to(self, height: int) -> None:
        """Drop blocks above `height` (fork switch); truncates the file."""
        if height < 0 or height > len(self._blocks):
            raise ValueError(f"bad rewind height {height}")
        if height == len(self._blocks):
            return
        offset = _HEADER_LEN
        for block in self._blocks[:height]:
            offset += 4 + len(encode_block(block))
        self._fh.seek(offset)
        self._fh.truncate()
        self._fh.flush()
        os.fsync(self._fh.fileno())
        self._blocks = self._blocks[:height]

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def __enter__(self) -> "BlockLog":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
