"""Multi-node operation: mempool, gossip, fork choice, and a round simulator.

The reference network semantics are synchronous rounds: messages sent in
round r arrive in round r + latency unless dropped or cut by a partition,
and each round one node wins the mining lottery with probability
proportional to its hash power. Every random draw (drops, lottery) is a
SHA-256 of the scenario seed and the draw's coordinates, so a simulation
is a pure function of its config — no RNG stream ordering to disturb.
"""

from __future__ import annotations

import hashlib
import io
import json
from dataclasses import dataclass, replace
from enum import IntEnum
from pathlib import Path
from typing import Optional, Sequence

from .chainstate import (
    ReplayError,
    RuleViolation,
    WorldState,
    apply_block,
    apply_transaction,
    empty_state,
    replay,
    state_digest,
    validate_transaction,
)
from .codec import DecodeError, Reader, enc_bytes, enc_u32, enc_u64
from .config import ChainConfig, DEFAULT_CONFIG
from .ledger import (
    Block,
    decode_block,
    encode_block,
    mine_block,
    pow_target_met,
)
from .transactions import Transaction, transaction_from_bytes

MAX_INVENTORY_BLOCKS = 500


class NetworkError(Exception):
    pass


class NoCandidates(NetworkError):
    pass


class MessageKind(IntEnum):
    TX_ANNOUNCE = 0
    BLOCK_ANNOUNCE = 1
    INVENTORY_REQUEST = 2
    INVENTORY_RESPONSE = 3


@dataclass(frozen=True)
class Message:
    kind: MessageKind
    payload: bytes


def tx_announce(tx: Transaction) -> Message:
    return Message(MessageKind.TX_ANNOUNCE, tx.to_bytes())


def block_announce(block: Block) -> Message:
    return Message(MessageKind.BLOCK_ANNOUNCE, encode_block(block))


def inventory_request(want: bytes, have: bytes) -> Message:
    return Message(MessageKind.INVENTORY_REQUEST, want + have)


def inventory_response(blocks: Sequence[Block]) -> Message:
    out = enc_u32(len(blocks))
    for block in blocks:
        out += enc_bytes(encode_block(block))
    return Message(MessageKind.INVENTORY_RESPONSE, out)


def fork_choice(candidates: Sequence[tuple[int, bytes]]) -> tuple[int, bytes]:
    """Greatest height wins; ties break to the lexicographically smaller digest."""
    if not candidates:
        raise NoCandidates("fork choice over empty candidate set")
    return min(candidates, key=lambda c: (-c[0], c[1]))


Outgoing = list[tuple[int, Message]]


class Node:
    """One protocol participant: block DAG, canonical chain, state, mempool."""

    def __init__(self, node_id: int, cfg: ChainConfig = DEFAULT_CONFIG, peers: Sequence[int] = ()):
        self.node_id = node_id
        self.cfg = cfg
        self.peers: list[int] = list(peers)
        genesis = cfg.genesis()
        self.blocks: dict[bytes, Block] = {genesis.hash: genesis}
        self.heights: dict[bytes, int] = {genesis.hash: 0}
        self.chain: list[Block] = [genesis]
        self.state: WorldState = apply_block(empty_state(), genesis, cfg)
        self.mempool: dict[bytes, Transaction] = {}
        self.pending: dict[bytes, Block] = {}  # digest -> block awaiting ancestors
        self.invalid: set[bytes] = set()
        self.malformed_dropped = 0
        self.miner_of: dict[bytes, int] = {}

    # -- local intake ---------------------------------------------------

    @property
    def tip(self) -> Block:
        return self.chain[-1]

    @property
    def height(self) -> int:
        return len(self.chain) - 1

    def state_digest(self) -> bytes:
        return state_digest(self.state)

    def submit_tx(self, tx: Transaction) -> tuple[bool, Optional[str], Outgoing]:
        """Local submission: admit to mempool and announce when new and valid."""
        if tx.tx_id in self.mempool or tx.tx_id in self.state.applied_txs:
            return False, "Duplicate", []
        try:
            validate_transaction(self.state, tx, self.cfg)
        except RuleViolation as exc:
            return False, exc.code, []
        self.mempool[tx.tx_id] = tx
        return True, None, [(peer, tx_announce(tx)) for peer in self.peers]

    def mine(self, timestamp: int) -> tuple[Block, Outgoing]:
        """Assemble mempool transactions in FIFO order and mine on the tip.

        Transactions that no longer validate against the rolling state are
        excluded from the block and dropped (first-wins conflict rule).
        """
        timestamp = max(timestamp, self.tip.header.timestamp)
        provisional = replace(self.state, time=timestamp)
        included: list[Transaction] = []
        for tx_id in list(self.mempool):
            tx = self.mempool[tx_id]
            try:
                validate_transaction(provisional, tx, self.cfg)
            except RuleViolation:
                del self.mempool[tx_id]
                continue
            provisional = apply_transaction(provisional, tx, self.cfg)
            included.append(tx)
            if len(included) >= 1000:
                break
        block = mine_block(
            prev=self.tip.hash,
            txs=included,
            difficulty=self.cfg.difficulty,
            timestamp=timestamp,
        )
        self.miner_of[block.hash] = self.node_id
        self._ingest_block(block)
        return block, [(peer, block_announce(block)) for peer in self.peers]

    def heartbeat(self) -> Outgoing:
        """Periodic tip re-announcement; lets healed partitions reconverge."""
        return [(peer, block_announce(self.tip)) for peer in self.peers]

    # -- message handling -------------------------------------------------

    def handle_message(self, sender: int, msg: Message) -> Outgoing:
        try:
            if msg.kind is MessageKind.TX_ANNOUNCE:
                return self._on_tx_announce(sender, msg)
            if msg.kind is MessageKind.BLOCK_ANNOUNCE:
                return self._on_block_announce(sender, msg)
            if msg.kind is MessageKind.INVENTORY_REQUEST:
                return self._on_inventory_request(sender, msg)
            if msg.kind is MessageKind.INVENTORY_RESPONSE:
                return self._on_inventory_response(sender, msg)
        except (DecodeError, ValueError):
            self.malformed_dropped += 1
            return []
        self.malformed_dropped += 1
        return []

    def _on_tx_announce(self, sender: int, msg: Message) -> Outgoing:
        tx = transaction_from_bytes(msg.payload)
        if tx.tx_id in self.mempool or tx.tx_id in self.state.applied_txs:
            return []
        try:
            validate_transaction(self.state, tx, self.cfg)
        except RuleViolation:
            return []
        self.mempool[tx.tx_id] = tx
        return [(peer, tx_announce(tx)) for peer in self.peers if peer != sender]

    def _on_block_announce(self, sender: int, msg: Message) -> Outgoing:
        block = decode_block(msg.payload)
        return self._consider_block(block, sender)

    def _on_inventory_request(self, sender: int, msg: Message) -> Outgoing:
        r = Reader(msg.payload)
        want, have = r.take(32), r.take(32)
        r.expect_end()
        if want not in self.blocks:
            return []
        batch: list[Block] = []
        cursor = want
        while cursor in self.blocks and len(batch) < MAX_INVENTORY_BLOCKS:
            block = self.blocks[cursor]
            batch.append(block)
            if cursor == have or self.heights.get(cursor) == 0:
                break
            cursor = block.header.prev_hash
        batch.reverse()  # oldest first so the receiver can connect as it reads
        return [(sender, inventory_response(batch))]

    def _on_inventory_response(self, sender: int, msg: Message) -> Outgoing:
        r = Reader(msg.payload)
        count = r.u32()
        if count > MAX_INVENTORY_BLOCKS:
            raise DecodeError("oversized inventory response")
        out: Outgoing = []
        for _ in range(count):
            block = decode_block(r.blob())
            out.extend(self._consider_block(block, sender))
        r.expect_end()
        return out

    # -- block ingestion ---------------------------------------------------

    def _structurally_valid(self, block: Block) -> bool:
        from .ledger import merkle_root

        header = block.header
        if header.difficulty != self.cfg.difficulty:
            return False
        if not pow_target_met(block.hash, header.difficulty):
            return False
        if header.tx_count != len(block.transactions):
            return False
        if header.merkle_root != merkle_root([tx.tx_id for tx in block.transactions]):
            return False
        return True

    def _consider_block(self, block: Block, sender: int) -> Outgoing:
        digest = block.hash
        if digest in self.blocks or digest in self.invalid:
            return []
        if not self._structurally_valid(block):
            self.invalid.add(digest)
            self.malformed_dropped += 1
            return []
        if block.header.prev_hash not in self.blocks:
            self.pending[digest] = block
            return [(sender, inventory_request(block.header.prev_hash, self.tip.hash))]

        self._connect(block)
        self._connect_pending()
        return self._adopt_best()

    def _connect(self, block: Block) -> None:
        parent_height = self.heights[block.header.prev_hash]
        if block.header.timestamp < self.blocks[block.header.prev_hash].header.timestamp:
            self.invalid.add(block.hash)
            return
        self.blocks[block.hash] = block
        self.heights[block.hash] = parent_height + 1

    def _connect_pending(self) -> None:
        progress = True
        while progress:
            progress = False
            for digest, block in list(self.pending.items()):
                if block.header.prev_hash in self.blocks:
                    del self.pending[digest]
                    self._connect(block)
                    progress = True

    def _ingest_block(self, block: Block) -> None:
        """Fast path for a self-mined block extending the current tip."""
        self.blocks[block.hash] = block
        self.heights[block.hash] = self.height + 1
        self.chain.append(block)
        self.state = apply_block(self.state, block, self.cfg)
        self._filter_mempool()

    def _adopt_best(self) -> Outgoing:
        candidates = [
            (h, d)
            for d, h in self.heights.items()
            if d not in self.invalid
        ]
        _, best = fork_choice(candidates)
        if best == self.tip.hash:
            return []

        new_chain = self._path_to(best)
        if new_chain is None:
            return []
        if len(new_chain) == len(self.chain) + 1 and new_chain[-2].hash == self.tip.hash:
            try:
                self.state = apply_block(self.state, new_chain[-1], self.cfg)
            except ReplayError:
                self.invalid.add(best)
                return self._adopt_best()
            self.chain = new_chain
        else:
            try:
                new_state = replay(new_chain, self.cfg)
            except ReplayError:
                self.invalid.add(best)
                return self._adopt_best()
            self.chain = new_chain
            self.state = new_state
        self._filter_mempool()
        return [(peer, block_announce(self.tip)) for peer in self.peers]

    def _path_to(self, digest: bytes) -> Optional[list[Block]]:
        path = []
        cursor = digest
        while True:
            block = self.blocks.get(cursor)
            if block is None:
                return None
            path.append(block)
            if self.heights[cursor] == 0:
                break
            cursor = block.header.prev_hash
        path.reverse()
        return path

    def _filter_mempool(self) -> None:
        kept: dict[bytes, Transaction] = {}
        for tx_id, tx in self.mempool.items():
            if tx_id in self.state.applied_txs:
                continue
            try:
                validate_transaction(self.state, tx, self.cfg)
            except RuleViolation:
                continue
            kept[tx_id] = tx
        self.mempool = kept


# -- deterministic simulator -------------------------------------------------


@dataclass(frozen=True)
class PartitionSpec:
    start: int  # first round the cut is active
    end: int  # first round it is healed
    groups: tuple[tuple[int, ...], ...]

    def group_of(self, node: int) -> Optional[int]:
        for index, group in enumerate(self.groups):
            if node in group:
                return index
        return None


@dataclass(frozen=True)
class SimConfig:
    node_count: int
    hash_power: tuple[int, ...]
    rounds: int
    seed: int
    latency_rounds: int = 1
    drop_rate: int = 0  # per-message probability, micro-units
    partitions: tuple[PartitionSpec, ...] = ()
    difficulty: int = 8  # kept low so simulations stay desk-scale

    def __post_init__(self):
        if self.node_count < 1:
            raise ValueError("node_count must be positive")
        if len(self.hash_power) != self.node_count:
            raise ValueError("hash_power must list one weight per node")
        if any(w <= 0 for w in self.hash_power):
            raise ValueError("hash power weights must be positive")
        if not 0 <= self.drop_rate <= 1_000_000:
            raise ValueError("drop_rate is micro-units in [0, 1000000]")
        if self.latency_rounds < 1:
            raise ValueError("latency_rounds must be at least 1")

    def to_json(self) -> dict:
        return {
            "node_count": self.node_count,
            "hash_power": list(self.hash_power),
            "rounds": self.rounds,
            "seed": self.seed,
            "latency_rounds": self.latency_rounds,
            "drop_rate": self.drop_rate,
            "partitions": [
                {"start": p.start, "end": p.end, "groups": [list(g) for g in p.groups]}
                for p in self.partitions
            ],
            "difficulty": self.difficulty,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SimConfig":
        return cls(
            node_count=int(obj["node_count"]),
            hash_power=tuple(int(w) for w in obj["hash_power"]),
            rounds=int(obj["rounds"]),
            seed=int(obj["seed"]),
            latency_rounds=int(obj.get("latency_rounds", 1)),
            drop_rate=int(obj.get("drop_rate", 0)),
            partitions=tuple(
                PartitionSpec(
                    start=int(p["start"]),
                    end=int(p["end"]),
                    groups=tuple(tuple(int(n) for n in g) for g in p["groups"]),
                )
                for p in obj.get("partitions", ())
            ),
            difficulty=int(obj.get("difficulty", 8)),
        )

    @classmethod
    def load(cls, path: Path) -> "SimConfig":
        return cls.from_json(json.loads(Path(path).read_text()))


@dataclass
class MetricsRow:
    round: int
    node: int
    height: int
    mempool_size: int
    tip_digest: str


@dataclass
class SimResult:
    config: SimConfig
    nodes: list[Node]
    metrics: list[MetricsRow]
    miner_of: dict[bytes, int]

    def tip_digests(self) -> list[bytes]:
        return [node.tip.hash for node in self.nodes]

    def state_digests(self) -> list[bytes]:
        return [node.state_digest() for node in self.nodes]

    def metrics_csv(self) -> str:
        out = io.StringIO()
        out.write("round,node,height,mempool_size,tip_digest\n")
        for row in self.metrics:
            out.write(
                f"{row.round},{row.node},{row.height},{row.mempool_size},{row.tip_digest}\n"
            )
        return out.getvalue()


def _draw(seed: int, label: bytes, *coords: int) -> int:
    payload = enc_u64(seed) + label + b"".join(enc_u64(c) for c in coords)
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "big")


def _partition_blocks(config: SimConfig, rnd: int, src: int, dst: int) -> bool:
    for spec in config.partitions:
        if spec.start <= rnd < spec.end:
            if spec.group_of(src) != spec.group_of(dst):
                return True
    return False


def run_simulation(
    config: SimConfig,
    chain_cfg: Optional[ChainConfig] = None,
    tx_events: Sequence[tuple[int, int, Transaction]] = (),
) -> SimResult:
    """Synchronous-round simulation; a pure function of config and injections.

    ``tx_events`` are (round, node, transaction) local submissions, letting
    scenarios drive the supply-chain state machine through the network.
    ``config.rounds`` mining rounds are followed by delivery-only settle
    rounds (4x latency) so results describe the quiesced network.
    """
    cfg = chain_cfg or ChainConfig(difficulty=config.difficulty)
    if cfg.difficulty != config.difficulty:
        raise ValueError("chain config difficulty must match simulation difficulty")

    nodes = [Node(i, cfg) for i in range(config.node_count)]
    for node in nodes:
        node.peers = [p for p in range(config.node_count) if p != node.node_id]

    inboxes: dict[int, list[tuple[int, int, Message]]] = {}  # round -> (src, dst, msg)
    injections: dict[int, list[tuple[int, Transaction]]] = {}
    for rnd, node_id, tx in tx_events:
        injections.setdefault(rnd, []).append((node_id, tx))

    metrics: list[MetricsRow] = []
    total_power = sum(config.hash_power)
    send_seq = 0

    def post(rnd: int, src: int, outgoing: Outgoing) -> None:
        nonlocal send_seq
        for dst, msg in outgoing:
            send_seq += 1
            if _partition_blocks(config, rnd, src, dst):
                continue
            if config.drop_rate > 0:
                if _draw(config.seed, b"drop", rnd, src, dst, send_seq) % 1_000_000 < config.drop_rate:
                    continue
            inboxes.setdefault(rnd + config.latency_rounds, []).append((src, dst, msg))

    # After the mining rounds, delivery-only rounds let in-flight blocks land
    # so the measured end state is the quiesced network, not a photo of
    # messages still on the wire.
    settle_rounds = max(4 * config.latency_rounds, 4)

    for rnd in range(config.rounds + settle_rounds):
        mining_round = rnd < config.rounds

        # 1. deliver this round's inbox, nodes in id order
        for src, dst, msg in inboxes.pop(rnd, []):
            post(rnd, dst, nodes[dst].handle_message(src, msg))

        # 2. local transaction submissions
        if mining_round:
            for node_id, tx in injections.get(rnd, []):
                _, _, outgoing = nodes[node_id].submit_tx(tx)
                post(rnd, node_id, outgoing)

        # 3. mining lottery, one winner per round, weight-proportional
        if mining_round:
            pick = _draw(config.seed, b"lottery", rnd) % total_power
            winner = 0
            acc = 0
            for i, weight in enumerate(config.hash_power):
                acc += weight
                if pick < acc:
                    winner = i
                    break
            _, outgoing = nodes[winner].mine(timestamp=rnd + 1)
            post(rnd, winner, outgoing)

        # 4. steady-state tip gossip
        for node in nodes:
            post(rnd, node.node_id, node.heartbeat())

        for node in nodes:
            metrics.append(
                MetricsRow(
                    round=rnd,
                    node=node.node_id,
                    height=node.height,
                    mempool_size=len(node.mempool),
                    tip_digest=node.tip.hash.hex(),
                )
            )

    miner_of: dict[bytes, int] = {}
    for node in nodes:
        miner_of.update(node.miner_of)
    return SimResult(config=config, nodes=nodes, metrics=metrics, miner_of=miner_of)
