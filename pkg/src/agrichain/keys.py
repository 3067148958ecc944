"""Ed25519 identities. An actor id is the SHA-256 of the raw public key."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives import serialization
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)


def actor_id_for(public_key: bytes) -> bytes:
    return hashlib.sha256(public_key).digest()


def verify_signature(public_key: bytes, signature: bytes, message: bytes) -> bool:
    try:
        Ed25519PublicKey.from_public_bytes(public_key).verify(signature, message)
        return True
    except (InvalidSignature, ValueError):
        return False


@dataclass(frozen=True)
class Keypair:
    """A signing identity; private key bytes stay inside this process."""

    private_bytes: bytes
    public_bytes: bytes

    @classmethod
    def generate(cls) -> "Keypair":
        key = Ed25519PrivateKey.generate()
        return cls._from_private(key)

    @classmethod
    def from_seed(cls, seed: bytes) -> "Keypair":
        """Deterministic keypair from a 32-byte seed (test and demo use)."""
        if len(seed) != 32:
            seed = hashlib.sha256(seed).digest()
        return cls._from_private(Ed25519PrivateKey.from_private_bytes(seed))

    @classmethod
    def _from_private(cls, key: Ed25519PrivateKey) -> "Keypair":
        priv = key.private_bytes(
            encoding=serialization.Encoding.Raw,
            format=serialization.PrivateFormat.Raw,
            encryption_algorithm=serialization.NoEncryption(),
        )
        pub = key.public_key().public_bytes(
            encoding=serialization.Encoding.Raw,
            format=serialization.PublicFormat.Raw,
        )
        return cls(private_bytes=priv, public_bytes=pub)

    @property
    def actor_id(self) -> bytes:
        return actor_id_for(self.public_bytes)

    def sign(self, message: bytes) -> bytes:
        key = Ed25519PrivateKey.from_private_bytes(self.private_bytes)
        return key.sign(message)

    def save(self, path: Path, role: str, display_name: str = "") -> None:
        payload = {
            "role": role,
            "display_name": display_name,
            "actor_id": self.actor_id.hex(),
            "public_key": self.public_bytes.hex(),
            "private_key": self.private_bytes.hex(),
        }
        path.write_text(json.dumps(payload, indent=2) + "\n")

    @classmethod
    def load(cls, path: Path) -> tuple["Keypair", dict]:
        payload = json.loads(path.read_text())
        pair = cls(
            private_bytes=bytes.fromhex(payload["private_key"]),
            public_bytes=bytes.fromhex(payload["public_key"]),
        )
        return pair, payload
