"""Hash-linked blocks: canonical encoding, merkle commitments, proof of work.

Header layout (89 bytes, all big-endian):

    version    u32
    prev_hash  32 bytes
    merkle_root 32 bytes
    timestamp  u64
    difficulty u8   (required leading zero bits of the block hash)
    nonce      u64
    tx_count   u32

The merkle tree domain-separates leaves (0x00 prefix) from internal nodes
(0x01 prefix) and duplicates the trailing node of odd levels. An empty
transaction list commits to SHA-256 of the empty byte string.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Optional, Sequence

from .codec import DecodeError, Reader, enc_bytes, enc_u8, enc_u32, enc_u64
from .transactions import Transaction, decode_transaction

DIGEST_LEN = 32
ZERO_DIGEST = b"\x00" * DIGEST_LEN
EMPTY_MERKLE_ROOT = hashlib.sha256(b"").digest()
HEADER_LEN = 89

LEAF_PREFIX = b"\x00"
NODE_PREFIX = b"\x01"


class LedgerError(Exception):
    pass


class NonceExhausted(LedgerError):
    """The entire 64-bit nonce space failed the difficulty target."""


class EmptyChain(LedgerError):
    pass


class TxNotInBlock(LedgerError):
    pass


def sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def leading_zero_bits(digest: bytes) -> int:
    value = int.from_bytes(digest, "big")
    return 256 - value.bit_length()


@dataclass(frozen=True)
class BlockHeader:
    version: int
    prev_hash: bytes
    merkle_root: bytes
    timestamp: int
    difficulty: int
    nonce: int
    tx_count: int

    def to_bytes(self) -> bytes:
        if len(self.prev_hash) != DIGEST_LEN or len(self.merkle_root) != DIGEST_LEN:
            raise ValueError("prev_hash and merkle_root must be 32 bytes")
        return b"".join(
            (
                enc_u32(self.version),
                self.prev_hash,
                self.merkle_root,
                enc_u64(self.timestamp),
                enc_u8(self.difficulty),
                enc_u64(self.nonce),
                enc_u32(self.tx_count),
            )
        )

    @classmethod
    def decode(cls, r: Reader) -> "BlockHeader":
        return cls(
            version=r.u32(),
            prev_hash=r.take(DIGEST_LEN),
            merkle_root=r.take(DIGEST_LEN),
            timestamp=r.u64(),
            difficulty=r.u8(),
            nonce=r.u64(),
            tx_count=r.u32(),
        )


def block_hash(header: BlockHeader) -> bytes:
    return sha256(header.to_bytes())


@dataclass(frozen=True)
class Block:
    header: BlockHeader
    transactions: tuple[Transaction, ...]

    @cached_property
    def hash(self) -> bytes:
        return block_hash(self.header)

    def to_bytes(self) -> bytes:
        parts = [self.header.to_bytes()]
        parts.extend(enc_bytes(tx.to_bytes()) for tx in self.transactions)
        return b"".join(parts)


def encode_block(block: Block) -> bytes:
    return block.to_bytes()


def decode_block(raw: bytes) -> Block:
    r = Reader(raw)
    header = BlockHeader.decode(r)
    txs = []
    for _ in range(header.tx_count):
        tx_raw = r.blob()
        tr = Reader(tx_raw)
        tx = decode_transaction(tr)
        tr.expect_end()
        txs.append(tx)
    r.expect_end()
    return Block(header=header, transactions=tuple(txs))


def _leaf_hash(tx_id: bytes) -> bytes:
    return sha256(LEAF_PREFIX + tx_id)


def _node_hash(left: bytes, right: bytes) -> bytes:
    return sha256(NODE_PREFIX + left + right)


def _merkle_levels(tx_ids: Sequence[bytes]) -> list[list[bytes]]:
    level = [_leaf_hash(t) for t in tx_ids]
    levels = [level]
    while len(level) > 1:
        if len(level) % 2 == 1:
            level = level + [level[-1]]
            levels[-1] = level
        level = [_node_hash(level[i], level[i + 1]) for i in range(0, len(level), 2)]
        levels.append(level)
    return levels


def merkle_root(tx_ids: Sequence[bytes]) -> bytes:
    if not tx_ids:
        return EMPTY_MERKLE_ROOT
    return _merkle_levels(tx_ids)[-1][0]


@dataclass(frozen=True)
class MerkleProof:
    leaf: bytes  # the transaction id, pre leaf-hash
    path: tuple[tuple[bytes, str], ...]  # (sibling digest, side of the sibling)
    root: bytes

    def to_json(self) -> dict:
        return {
            "leaf": self.leaf.hex(),
            "path": [{"sibling": sib.hex(), "side": side} for sib, side in self.path],
            "root": self.root.hex(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "MerkleProof":
        return cls(
            leaf=bytes.fromhex(obj["leaf"]),
            path=tuple((bytes.fromhex(p["sibling"]), p["side"]) for p in obj["path"]),
            root=bytes.fromhex(obj["root"]),
        )


def merkle_proof(block: Block, tx_id: bytes) -> MerkleProof:
    tx_ids = [tx.tx_id for tx in block.transactions]
    try:
        index = tx_ids.index(tx_id)
    except ValueError:
        raise TxNotInBlock(tx_id.hex()) from None
    levels = _merkle_levels(tx_ids)
    path = []
    for level in levels[:-1]:
        sibling_index = index ^ 1
        side = "left" if sibling_index < index else "right"
        path.append((level[sibling_index], side))
        index //= 2
    return MerkleProof(leaf=tx_id, path=tuple(path), root=levels[-1][0])


def verify_proof(proof: MerkleProof) -> bool:
    if len(proof.leaf) != DIGEST_LEN or len(proof.root) != DIGEST_LEN:
        return False
    current = _leaf_hash(proof.leaf)
    for sibling, side in proof.path:
        if len(sibling) != DIGEST_LEN:
            return False
        if side == "left":
            current = _node_hash(sibling, current)
        elif side == "right":
            current = _node_hash(current, sibling)
        else:
            return False
    return current == proof.root


def pow_target_met(digest: bytes, difficulty: int) -> bool:
    if difficulty == 0:
        return True
    return int.from_bytes(digest, "big") >> (256 - difficulty) == 0


def mine_block(
    prev: bytes,
    txs: Sequence[Transaction],
    difficulty: int,
    timestamp: int,
    version: int = 1,
) -> Block:
    """Search nonces from zero until the header hash meets the target.

    Deterministic given its inputs: the block returned always carries the
    first satisfying nonce.
    """
    if not 0 <= difficulty <= 255:
        raise ValueError(f"difficulty out of range: {difficulty}")
    txs = tuple(txs)
    root = merkle_root([tx.tx_id for tx in txs])
    prefix = (
        enc_u32(version) + prev + root + enc_u64(timestamp) + enc_u8(difficulty)
    )
    suffix = enc_u32(len(txs))
    base = hashlib.sha256(prefix)
    shift = 256 - difficulty
    nonce = 0
    while nonce <= 0xFFFFFFFFFFFFFFFF:
        h = base.copy()
        h.update(nonce.to_bytes(8, "big") + suffix)
        digest = h.digest()
        if difficulty == 0 or int.from_bytes(digest, "big") >> shift == 0:
            header = BlockHeader(
                version=version,
                prev_hash=prev,
                merkle_root=root,
                timestamp=timestamp,
                difficulty=difficulty,
                nonce=nonce,
                tx_count=len(txs),
            )
            return Block(header=header, transactions=txs)
        nonce += 1
    raise NonceExhausted(f"no nonce satisfies difficulty {difficulty}")


def _block_consistent(block: Block) -> bool:
    header = block.header
    if header.tx_count != len(block.transactions):
        return False
    if header.merkle_root != merkle_root([tx.tx_id for tx in block.transactions]):
        return False
    return True


def validate_chain(blocks: Sequence[Block], genesis_digest: bytes) -> Optional[int]:
    """Return None if the chain is intact, else the smallest failing index.

    Checks: genesis digest equality, parent links, proof-of-work targets,
    difficulty uniformity (fixed per network, carried by the genesis
    header), merkle root and tx_count consistency, and timestamp
    monotonicity. Signature validity against the registered key set is a
    state-machine concern checked during replay, not here.
    """
    if not blocks:
        raise EmptyChain("cannot validate an empty chain")
    if blocks[0].hash != genesis_digest or not _block_consistent(blocks[0]):
        return 0
    difficulty = blocks[0].header.difficulty
    for i in range(1, len(blocks)):
        block = blocks[i]
        parent = blocks[i - 1]
        if block.header.prev_hash != parent.hash:
            return i
        if block.header.difficulty != difficulty:
            return i
        if not pow_target_met(block.hash, block.header.difficulty):
            return i
        if block.header.timestamp < parent.header.timestamp:
            return i
        if not _block_consistent(block):
            return i
    return None


def iter_tx_locations(blocks: Sequence[Block]) -> Iterator[tuple[int, int, Transaction]]:
    """Yield (height, index_in_block, tx) over a chain in application order."""
    for height, block in enumerate(blocks):
        for index, tx in enumerate(block.transactions):
            yield height, index, tx


def genesis_block(difficulty: int, timestamp: int = 0, version: int = 1) -> Block:
    """The fixed bootstrap block: no transactions, nonce zero, PoW exempt."""
    header = BlockHeader(
        version=version,
        prev_hash=ZERO_DIGEST,
        merkle_root=EMPTY_MERKLE_ROOT,
        timestamp=timestamp,
        difficulty=difficulty,
        nonce=0,
        tx_count=0,
    )
    return Block(header=header, transactions=())
