from __future__ import annotations

import pytest

from agrichain.config import ChainConfig
from agrichain.keys import Keypair
from agrichain.scenario import ScenarioBuilder, build_demo

# Unit tests run at a low difficulty so mining stays in the microsecond range;
# acceptance tests pin their own difficulties.
FAST_CFG = ChainConfig(difficulty=8)


@pytest.fixture(scope="session")
def demo():
    """A populated chain: 3 full farm-to-retail cycles at low difficulty."""
    builder, cast, outcomes = build_demo(cycles=3, cfg=FAST_CFG, seed=11)
    return builder, cast, outcomes


@pytest.fixture()
def fresh_builder():
    return ScenarioBuilder(cfg=FAST_CFG, seed=5)


@pytest.fixture(scope="session")
def keypairs():
    return [Keypair.from_seed(f"fixture-{i}".encode()) for i in range(8)]
