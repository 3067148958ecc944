"""Network-wide parameters every node must agree on, plus node-local settings.

The chain parameters feed consensus: changing any of them changes the
genesis digest or the state digests, so they are fixed per network and
loaded from one JSON config file.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .ledger import Block, genesis_block

DEFAULT_DIFFICULTY = 12
DEFAULT_PENALTY_RATE_MICRO = 250_000  # 25% of gross on a cold-chain breach
DEFAULT_ALPHA_MICRO = 200_000  # reputation EWMA weight on the newest outcome
DEFAULT_SHELF_LIFE_SECONDS = 30 * 24 * 3600

DATA_DIR_ENV = "AGRI_DATA_DIR"


@dataclass(frozen=True)
class ChainConfig:
    difficulty: int = DEFAULT_DIFFICULTY
    penalty_rate_micro: int = DEFAULT_PENALTY_RATE_MICRO
    alpha_micro: int = DEFAULT_ALPHA_MICRO
    shelf_life: dict[str, int] = field(default_factory=dict)  # product type -> seconds
    default_shelf_life: int = DEFAULT_SHELF_LIFE_SECONDS
    genesis_timestamp: int = 0

    def __post_init__(self):
        if not 0 <= self.difficulty <= 255:
            raise ValueError(f"difficulty out of range: {self.difficulty}")
        if not 0 <= self.penalty_rate_micro <= 1_000_000:
            raise ValueError("penalty_rate_micro must be within [0, 1000000]")
        if not 0 <= self.alpha_micro <= 1_000_000:
            raise ValueError("alpha_micro must be within [0, 1000000]")

    def genesis(self) -> Block:
        return genesis_block(self.difficulty, self.genesis_timestamp)

    def shelf_life_for(self, product_type: str) -> int:
        return self.shelf_life.get(product_type, self.default_shelf_life)

    def to_json(self) -> dict:
        return {
            "difficulty": self.difficulty,
            "penalty_rate_micro": self.penalty_rate_micro,
            "alpha_micro": self.alpha_micro,
            "shelf_life": dict(self.shelf_life),
            "default_shelf_life": self.default_shelf_life,
            "genesis_timestamp": self.genesis_timestamp,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ChainConfig":
        return cls(
            difficulty=int(obj.get("difficulty", DEFAULT_DIFFICULTY)),
            penalty_rate_micro=int(obj.get("penalty_rate_micro", DEFAULT_PENALTY_RATE_MICRO)),
            alpha_micro=int(obj.get("alpha_micro", DEFAULT_ALPHA_MICRO)),
            shelf_life={str(k): int(v) for k, v in obj.get("shelf_life", {}).items()},
            default_shelf_life=int(obj.get("default_shelf_life", DEFAULT_SHELF_LIFE_SECONDS)),
            genesis_timestamp=int(obj.get("genesis_timestamp", 0)),
        )


DEFAULT_CONFIG = ChainConfig()


@dataclass(frozen=True)
class NodeConfig:
    """One node's runtime settings; the chain section must match its peers."""

    chain: ChainConfig = DEFAULT_CONFIG
    data_dir: Path = Path("./agrichain-data")
    api_host: str = "127.0.0.1"
    api_port: int = 8545
    mine: bool = True
    max_block_txs: int = 100
    submit_queue_size: int = 1024

    def resolved_data_dir(self) -> Path:
        override = os.environ.get(DATA_DIR_ENV)
        return Path(override) if override else self.data_dir

    @classmethod
    def load(cls, path: Path) -> "NodeConfig":
        obj = json.loads(Path(path).read_text())
        return cls(
            chain=ChainConfig.from_json(obj.get("chain", {})),
            data_dir=Path(obj.get("data_dir", "./agrichain-data")),
            api_host=str(obj.get("api_host", "127.0.0.1")),
            api_port=int(obj.get("api_port", 8545)),
            mine=bool(obj.get("mine", True)),
            max_block_txs=int(obj.get("max_block_txs", 100)),
            submit_queue_size=int(obj.get("submit_queue_size", 1024)),
        )

    def save(self, path: Path) -> None:
        obj = {
            "chain": self.chain.to_json(),
            "data_dir": str(self.data_dir),
            "api_host": self.api_host,
            "api_port": self.api_port,
            "mine": self.mine,
            "max_block_txs": self.max_block_txs,
            "submit_queue_size": self.submit_queue_size,
        }
        Path(path).write_text(json.dumps(obj, indent=2) + "\n")
