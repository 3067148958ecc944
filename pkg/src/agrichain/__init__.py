"""Proof-of-work ledger and deterministic supply-chain state machine."""

__version__ = "0.1.0"

from .config import ChainConfig, NodeConfig
from .keys import Keypair
from .ledger import Block, BlockHeader, mine_block, merkle_root, validate_chain
from .transactions import Role, Transaction, TxKind, sign_transaction

__all__ = [
    "ChainConfig",
    "NodeConfig",
    "Keypair",
    "Block",
    "BlockHeader",
    "mine_block",
    "merkle_root",
    "validate_chain",
    "Role",
    "Transaction",
    "TxKind",
    "sign_transaction",
    "__version__",
]
