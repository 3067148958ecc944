"""Deterministic demo scenarios: farm-to-retail cycles mined into real blocks.

Everything is seeded, so two runs of the same scenario produce the same
chain byte for byte. Used by the test suite, the CLI seeding command, and
the console demo.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Optional

from .chainstate import (
    WorldState,
    apply_block,
    apply_transaction,
    empty_state,
    validate_transaction,
)
from .config import ChainConfig, DEFAULT_CONFIG
from .ingest import FeedConfig, MetricProfile, simulate_sensor_feed
from .keys import Keypair
from .ledger import Block, mine_block
from .transactions import (
    CloseAuction,
    ConfirmDelivery,
    CreateLot,
    LotOutput,
    Metric,
    OpenAuction,
    PlaceBid,
    ProcessLot,
    QualityCheck,
    RaiseDispute,
    RecordSensorBatch,
    RecordTelemetry,
    RegisterActor,
    ResolveDispute,
    Role,
    SensorReading,
    StartShipment,
    Transaction,
    TxBody,
    Waypoint,
    sign_transaction,
)

CROPS = ("tomato", "wheat", "rice", "mango", "coffee")
VARIETIES = ("heirloom-12", "dwarf-9", "basmati-x", "alphonso", "arabica-s795")
WEATHER = ("dry spell, mild", "monsoon onset", "clear and warm", "late frost risk")
PROCESSED = {"tomato": "tomato-paste", "wheat": "flour", "rice": "parboiled-rice",
             "mango": "mango-pulp", "coffee": "roasted-beans"}


@dataclass
class ScenarioBuilder:
    """Accumulates signed transactions and seals them into mined blocks."""

    cfg: ChainConfig = DEFAULT_CONFIG
    seed: int = 0
    base_time: int = 1_000_000_000
    block_interval: int = 600

    chain: list[Block] = field(default_factory=list)
    state: WorldState = field(default_factory=empty_state)
    keys: dict[bytes, Keypair] = field(default_factory=dict)
    pending: list[Transaction] = field(default_factory=list)

    def __post_init__(self):
        self.rng = random.Random(self.seed)
        self.time = self.base_time
        genesis = self.cfg.genesis()
        self.chain = [genesis]
        self.state = apply_block(empty_state(), genesis, self.cfg)
        self._working = replace(self.state, time=self.time)

    # -- block plumbing --------------------------------------------------

    def submit(self, body: TxBody, signer: Keypair) -> Transaction:
        tx = sign_transaction(body, signer)
        validate_transaction(self._working, tx, self.cfg)
        self._working = apply_transaction(self._working, tx, self.cfg)
        self.pending.append(tx)
        return tx

    def seal_block(self) -> Block:
        """Mine the pending transactions at the current logical time."""
        block = mine_block(
            prev=self.chain[-1].hash,
            txs=self.pending,
            difficulty=self.cfg.difficulty,
            timestamp=self.time,
        )
        self.chain.append(block)
        self.state = apply_block(self.state, block, self.cfg)
        self.pending = []
        self.time += self.block_interval
        self._working = replace(self.state, time=self.time)
        return block

    def tx_count(self) -> int:
        return sum(len(b.transactions) for b in self.chain)

    # -- actors ------------------------------------------------------------

    def register(self, role: Role, name: str) -> Keypair:
        pair = Keypair.from_seed(f"{self.seed}:{role.wire_name}:{name}".encode())
        self.submit(
            RegisterActor(role=role, display_name=name, public_key=pair.public_bytes),
            pair,
        )
        self.keys[pair.actor_id] = pair
        return pair

    def register_cast(self) -> dict[str, Keypair]:
        cast = {
            "farmer": self.register(Role.FARMER, "Sunrise Farm"),
            "processor": self.register(Role.PROCESSOR, "Valley Foods"),
            "distributor": self.register(Role.DISTRIBUTOR, "Regional Distribution"),
            "retailer": self.register(Role.RETAILER, "Corner Market"),
            "consumer": self.register(Role.CONSUMER, "A. Shopper"),
            "negotiator": self.register(Role.NEGOTIATOR, "Dispute Desk"),
        }
        self.seal_block()
        return cast

    # -- flow helpers --------------------------------------------------------

    def create_lot(self, farmer: Keypair, quantity: Optional[int] = None) -> bytes:
        crop = self.rng.choice(CROPS)
        tx = self.submit(
            CreateLot(
                crop_type=crop,
                seed_variety=self.rng.choice(VARIETIES),
                sown_weather_summary=self.rng.choice(WEATHER),
                quantity=quantity or self.rng.randrange(50_000, 500_000),
                harvest_time=self.time,
            ),
            farmer,
        )
        return tx.tx_id

    def record_sensor_batch(self, owner: Keypair, lot_id: bytes, samples: int = 4) -> None:
        feed = FeedConfig(
            seed=self.rng.getrandbits(32),
            subject=lot_id,
            device_id=f"field-{self.rng.randrange(100)}",
            metrics={
                Metric.TEMPERATURE: MetricProfile(base=2200, amplitude=300, period=86_400, jitter=25),
                Metric.HUMIDITY: MetricProfile(base=5500, amplitude=800, period=86_400, jitter=40),
            },
            sample_interval=60,
            duration=samples * 60,
            start_time=self.time,
        )
        self.submit(
            RecordSensorBatch(lot_id=lot_id, readings=tuple(simulate_sensor_feed(feed))),
            owner,
        )

    def auction_lot(
        self,
        seller: Keypair,
        lot_id: bytes,
        bidders: list[Keypair],
        reserve: int = 10_000,
    ) -> tuple[bytes, Keypair, int]:
        """Open, bid on, and close an auction. Returns (auction id, winner, price)."""
        open_tx = self.submit(
            OpenAuction(
                lot_id=lot_id,
                reserve_price=reserve,
                open_time=self.time,
                close_time=self.time + 2 * self.block_interval,
            ),
            seller,
        )
        auction_id = open_tx.tx_id
        self.seal_block()  # bids land in the next block, inside the window

        price = reserve
        winner = bidders[0]
        for i, bidder in enumerate(bidders):
            price = price + (0 if i == 0 else self.rng.randrange(500, 3_000))
            self.submit(PlaceBid(auction_id=auction_id, amount=price), bidder)
            winner = bidder
        self.seal_block()  # time moves past close_time

        self.submit(CloseAuction(auction_id=auction_id), seller)
        return auction_id, winner, price

    def ship_lot(
        self,
        shipper: Keypair,
        lot_id: bytes,
        recipient: Keypair,
        price: int,
        cold_chain_max: int = 800,
        breach: bool = False,
        telemetry_samples: int = 5,
    ) -> bytes:
        ship_tx = self.submit(
            StartShipment(
                lot_id=lot_id,
                recipient=recipient.actor_id,
                vehicle_id=f"TRUCK-{self.rng.randrange(10, 99)}",
                cold_chain_max=cold_chain_max,
                contract_price=price,
            ),
            shipper,
        )
        shipment_id = ship_tx.tx_id
        feed = FeedConfig(
            seed=self.rng.getrandbits(32),
            subject=shipment_id,
            device_id=f"reefer-{self.rng.randrange(100)}",
            metrics={Metric.TEMPERATURE: MetricProfile(base=400, amplitude=150, period=7_200, jitter=20)},
            sample_interval=120,
            duration=telemetry_samples * 120,
            start_time=self.time,
            breach_at=self.time + 240 if breach else None,
            breach_spike=cold_chain_max,  # base + amplitude + max always exceeds max
        )
        readings = tuple(simulate_sensor_feed(feed))
        waypoints = tuple(
            Waypoint(
                lat=12_970_000 + self.rng.randrange(-5_000, 5_000),
                lon=77_590_000 + self.rng.randrange(-5_000, 5_000),
                time=r.time,
            )
            for r in readings[:3]
        )
        self.submit(
            RecordTelemetry(shipment_id=shipment_id, waypoints=waypoints, readings=readings),
            shipper,
        )
        self.seal_block()
        self.submit(ConfirmDelivery(shipment_id=shipment_id), recipient)
        return shipment_id

    def process_lot(
        self, processor: Keypair, lot_id: bytes, outputs: int = 1
    ) -> list[bytes]:
        from .chainstate import derive_child_lot_id

        lot = self._working.lots[lot_id]
        product = PROCESSED.get(lot.crop_type, f"{lot.crop_type}-pack")
        share = lot.quantity // (outputs + 1)
        tx = self.submit(
            ProcessLot(
                parent_lots=(lot_id,),
                outputs=tuple(
                    LotOutput(product_type=product, quantity=max(share, 1))
                    for _ in range(outputs)
                ),
                processing_temp=7_500 + self.rng.randrange(-500, 500),
                method=self.rng.choice(("cold-press", "steam-blanch", "roast", "mill")),
            ),
            processor,
        )
        return [derive_child_lot_id(tx.tx_id, i) for i in range(outputs)]

    def run_cycle(
        self,
        cast: dict[str, Keypair],
        breach: bool = False,
        dispute: bool = False,
        quantity: Optional[int] = None,
    ) -> dict:
        """One full farm-to-retail pass; returns the ids it produced."""
        farmer, processor = cast["farmer"], cast["processor"]
        distributor, retailer = cast["distributor"], cast["retailer"]

        lot_id = self.create_lot(farmer, quantity=quantity)
        self.record_sensor_batch(farmer, lot_id)
        _, _, price = self.auction_lot(farmer, lot_id, [processor])
        raw_shipment = self.ship_lot(farmer, lot_id, processor, price, breach=breach)
        self.seal_block()

        child_id = self.process_lot(processor, lot_id)[0]
        _, buyer, child_price = self.auction_lot(
            processor, child_id, [distributor], reserve=20_000
        )
        child_shipment = self.ship_lot(processor, child_id, buyer, child_price)
        self.submit(
            QualityCheck(lot_id=child_id, passed=not breach, notes="routine inspection"),
            retailer if buyer is distributor else distributor,
        )

        dispute_id = None
        if dispute:
            raise_tx = self.submit(
                RaiseDispute(
                    subject=raw_shipment,
                    respondent=farmer.actor_id,
                    claim="cold chain exceeded contract maximum",
                ),
                processor,
            )
            dispute_id = raise_tx.tx_id
            self.seal_block()
            self.submit(
                ResolveDispute(dispute_id=dispute_id, ruled_against=farmer.actor_id),
                cast["negotiator"],
            )
        self.seal_block()

        return {
            "lot_id": lot_id,
            "child_lot_id": child_id,
            "raw_shipment": raw_shipment,
            "child_shipment": child_shipment,
            "dispute_id": dispute_id,
        }


def build_demo(
    cycles: int = 3,
    cfg: ChainConfig = DEFAULT_CONFIG,
    seed: int = 7,
    base_time: int = 1_000_000_000,
    min_transactions: int = 0,
) -> tuple[ScenarioBuilder, dict[str, Keypair], list[dict]]:
    """A populated chain with `cycles` full flows (plus top-up sensor blocks
    until `min_transactions` is reached)."""
    builder = ScenarioBuilder(cfg=cfg, seed=seed, base_time=base_time)
    cast = builder.register_cast()
    outcomes = []
    for i in range(cycles):
        outcomes.append(
            builder.run_cycle(cast, breach=(i % 3 == 1), dispute=(i % 4 == 2))
        )
    while builder.tx_count() < min_transactions:
        for _ in range(3):
            lot_id = builder.create_lot(cast["farmer"])
            builder.record_sensor_batch(cast["farmer"], lot_id, samples=6)
        builder.seal_block()
    return builder, cast, outcomes
