"""Node runtime: one writer owns the log and tip state; readers get snapshots.

Transaction submissions are validated against the current snapshot for the
fast 202/400 answer, then queued to the writer, which re-validates, mines,
appends to the block log, and atomically swaps in the next snapshot.
Submission never blocks on mining.
"""

from __future__ import annotations

import queue
import threading
import time as _time
from dataclasses import dataclass, replace
from typing import Optional

from .chainstate import (
    RuleViolation,
    WorldState,
    apply_block,
    apply_transaction,
    replay,
    state_digest,
    validate_transaction,
)
from .config import NodeConfig
from .ledger import Block, mine_block
from .storage import BlockLog
from .transactions import Transaction


class BacklogFull(Exception):
    """Submission queue at capacity; callers should retry later (HTTP 429)."""


@dataclass(frozen=True)
class Snapshot:
    chain: tuple[Block, ...]
    state: WorldState

    @property
    def tip(self) -> Block:
        return self.chain[-1]

    @property
    def height(self) -> int:
        return len(self.chain)

    def digest(self) -> bytes:
        return state_digest(self.state)


class NodeRuntime:
    def __init__(self, config: NodeConfig):
        self.config = config
        self.cfg = config.chain
        data_dir = config.resolved_data_dir()
        data_dir.mkdir(parents=True, exist_ok=True)
        self.log = BlockLog(data_dir / "blocks.agri")
        if len(self.log) == 0:
            self.log.append_block(self.cfg.genesis())
        chain = tuple(self.log.blocks)
        # State is always rebuilt by full replay: one source of truth.
        state = replay(chain, self.cfg)
        self._snapshot = Snapshot(chain=chain, state=state)
        self.mempool: dict[bytes, Transaction] = {}
        self._queue: queue.Queue[Transaction] = queue.Queue(maxsize=config.submit_queue_size)
        self._stop = threading.Event()
        self._writer: Optional[threading.Thread] = None
        self._wall_clock = lambda: int(_time.time())

    # -- read side --------------------------------------------------------

    @property
    def snapshot(self) -> Snapshot:
        return self._snapshot

    # -- write side -------------------------------------------------------

    def submit(self, tx: Transaction) -> bytes:
        """Validate against the current snapshot and queue for inclusion."""
        snap = self._snapshot
        now = max(snap.tip.header.timestamp, self._wall_clock())
        validate_transaction(replace(snap.state, time=now), tx, self.cfg)
        try:
            self._queue.put_nowait(tx)
        except queue.Full:
            raise BacklogFull("submission queue full") from None
        return tx.tx_id

    def start(self) -> None:
        if self._writer is not None:
            return
        self._stop.clear()
        self._writer = threading.Thread(target=self._writer_loop, name="agrichain-writer", daemon=True)
        self._writer.start()

    def stop(self) -> None:
        self._stop.set()
        if self._writer is not None:
            self._writer.join(timeout=10)
            self._writer = None
        self.log.close()

    def _writer_loop(self) -> None:
        while not self._stop.is_set():
            drained = self._drain(timeout=0.05)
            if drained and self.config.mine:
                self.mine_pending()

    def _drain(self, timeout: float) -> bool:
        got_any = False
        try:
            tx = self._queue.get(timeout=timeout)
        except queue.Empty:
            return bool(self.mempool)
        while True:
            if tx.tx_id not in self.mempool and tx.tx_id not in self._snapshot.state.applied_txs:
                self.mempool[tx.tx_id] = tx
                got_any = True
            try:
                tx = self._queue.get_nowait()
            except queue.Empty:
                break
        return got_any or bool(self.mempool)

    def mine_pending(self) -> Optional[Block]:
        """Assemble valid mempool transactions in FIFO order and seal a block."""
        if not self.mempool:
            return None
        snap = self._snapshot
        timestamp = max(snap.tip.header.timestamp, self._wall_clock())
        provisional = replace(snap.state, time=timestamp)
        included: list[Transaction] = []
        for tx_id in list(self.mempool):
            if len(included) >= self.config.max_block_txs:
                break
            tx = self.mempool[tx_id]
            try:
                validate_transaction(provisional, tx, self.cfg)
            except RuleViolation:
                # first-wins conflict rule: losers leave the pool
                del self.mempool[tx_id]
                continue
            provisional = apply_transaction(provisional, tx, self.cfg)
            included.append(tx)
        if not included:
            return None
        block = mine_block(
            prev=snap.tip.hash,
            txs=included,
            difficulty=self.cfg.difficulty,
            timestamp=timestamp,
        )
        self.log.append_block(block)
        state = apply_block(snap.state, block, self.cfg)
        self._snapshot = Snapshot(chain=snap.chain + (block,), state=state)
        for tx in included:
            self.mempool.pop(tx.tx_id, None)
        return block

    def wait_for_tx(self, tx_id: bytes, timeout: float = 10.0) -> bool:
        """Poll until a submitted transaction lands in a block (test helper)."""
        deadline = _time.monotonic() + timeout
        while _time.monotonic() < deadline:
            if tx_id in self._snapshot.state.applied_txs:
                return True
            _time.sleep(0.01)
        return False
