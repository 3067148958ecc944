"""Deterministic world state materialized by applying transactions in block order.

State values are immutable snapshots: ``apply_transaction`` returns a new
``WorldState`` and never touches its input, so replaying the same block log
always produces the same state digest on every node. All consensus-visible
quantities are fixed-point integers; floats never enter this module.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from enum import IntEnum
from typing import Optional, Sequence

from . import contracts
from .codec import enc_bool, enc_i32, enc_str, enc_u8, enc_u32, enc_u64
from .config import ChainConfig, DEFAULT_CONFIG
from .contracts import (
    Auction,
    AuctionStatus,
    RuleViolation,
    Settlement,
    Shipment,
    ShipmentStatus,
)
from .keys import actor_id_for
from .ledger import Block, validate_chain
from .reputation import INITIAL_SCORE, outcome_of, update_score
from .transactions import (
    Metric,
    Role,
    SensorReading,
    Transaction,
    TxKind,
)


class BadSignature(RuleViolation):
    pass


class UnknownSigner(RuleViolation):
    pass


class RoleForbidden(RuleViolation):
    pass


class DuplicateActor(RuleViolation):
    pass


class DuplicateTransaction(RuleViolation):
    pass


class UnknownLot(RuleViolation):
    pass


class UnknownAuction(RuleViolation):
    pass


class UnknownShipment(RuleViolation):
    pass


class UnknownDispute(RuleViolation):
    pass


class UnknownActor(RuleViolation):
    pass


class UnknownSubject(RuleViolation):
    pass


class NotOwner(RuleViolation):
    pass


class NotSeller(RuleViolation):
    pass


class NotShipper(RuleViolation):
    pass


class NotRecipient(RuleViolation):
    pass


class WrongRecipient(RuleViolation):
    pass


class BadLotStatus(RuleViolation):
    pass


class BadShipmentStatus(RuleViolation):
    pass


class BadAuctionWindow(RuleViolation):
    pass


class QuantityInvalid(RuleViolation):
    pass


class OutputsExceedParents(RuleViolation):
    pass


class SubjectMismatch(RuleViolation):
    pass


class TimeNotMonotonic(RuleViolation):
    pass


class MalformedBody(RuleViolation):
    pass


class AlreadyResolved(RuleViolation):
    pass


class BadRulingParty(RuleViolation):
    pass


class ReplayError(Exception):
    pass


class InvalidChain(ReplayError):
    def __init__(self, index: int):
        super().__init__(f"chain invalid at block {index}")
        self.index = index


class InvalidTransaction(ReplayError):
    def __init__(self, height: int, index: int, reason: str):
        super().__init__(f"block {height} tx {index}: {reason}")
        self.height = height
        self.index = index
        self.reason = reason


class LotStatus(IntEnum):
    REGISTERED = 0
    IN_AUCTION = 1
    SOLD = 2
    IN_TRANSIT = 3
    DELIVERED = 4
    PROCESSED = 5
    RETIRED = 6

    @property
    def wire_name(self) -> str:
        return self.name.lower()


class DisputeStatus(IntEnum):
    OPEN = 0
    RESOLVED = 1

    @property
    def wire_name(self) -> str:
        return self.name.lower()


@dataclass(frozen=True)
class Actor:
    actor_id: bytes
    role: Role
    display_name: str
    public_key: bytes


@dataclass(frozen=True)
class Lot:
    lot_id: bytes
    owner: bytes
    origin_farm: bytes
    crop_type: str
    seed_variety: str
    sown_weather_summary: str
    quantity: int  # grams, fixed at creation
    harvest_time: int
    parent_lots: tuple[bytes, ...] = ()
    processing_temp: Optional[int] = None  # centi-degrees C, processed lots only
    expiry_time: Optional[int] = None  # processed lots only
    status: LotStatus = LotStatus.REGISTERED

    @property
    def is_processed(self) -> bool:
        return len(self.parent_lots) > 0


@dataclass(frozen=True)
class QualityRecord:
    checker: bytes
    passed: bool
    notes: str
    time: int


@dataclass(frozen=True)
class Dispute:
    dispute_id: bytes
    subject: bytes  # lot or shipment id
    raiser: bytes
    respondent: bytes
    claim: str
    status: DisputeStatus = DisputeStatus.OPEN
    ruled_against: Optional[bytes] = None


@dataclass(frozen=True)
class WorldState:
    """One materialized snapshot. Treat every container as read-only."""

    actors: dict[bytes, Actor] = field(default_factory=dict)
    lots: dict[bytes, Lot] = field(default_factory=dict)
    auctions: dict[bytes, Auction] = field(default_factory=dict)
    shipments: dict[bytes, Shipment] = field(default_factory=dict)
    disputes: dict[bytes, Dispute] = field(default_factory=dict)
    reputations: dict[bytes, int] = field(default_factory=dict)
    readings: dict[bytes, tuple[SensorReading, ...]] = field(default_factory=dict)
    quality_checks: dict[bytes, tuple[QualityRecord, ...]] = field(default_factory=dict)
    applied_txs: frozenset[bytes] = frozenset()
    height: int = 0
    time: int = 0


def empty_state() -> WorldState:
    return WorldState()


# Which roles may even submit each transaction kind; kind-specific rules
# (ownership, auction eligibility) narrow further during validation.
AUTHORIZATION: dict[TxKind, frozenset[Role]] = {
    TxKind.REGISTER_ACTOR: frozenset(Role),
    TxKind.RECORD_SENSOR_BATCH: frozenset({Role.FARMER, Role.PROCESSOR, Role.DISTRIBUTOR, Role.RETAILER}),
    TxKind.CREATE_LOT: frozenset({Role.FARMER}),
    TxKind.OPEN_AUCTION: frozenset({Role.FARMER, Role.PROCESSOR}),
    TxKind.PLACE_BID: frozenset({Role.PROCESSOR, Role.DISTRIBUTOR, Role.RETAILER}),
    TxKind.CLOSE_AUCTION: frozenset({Role.FARMER, Role.PROCESSOR}),
    TxKind.START_SHIPMENT: frozenset({Role.FARMER, Role.PROCESSOR, Role.DISTRIBUTOR}),
    TxKind.RECORD_TELEMETRY: frozenset({Role.FARMER, Role.PROCESSOR, Role.DISTRIBUTOR}),
    TxKind.CONFIRM_DELIVERY: frozenset({Role.PROCESSOR, Role.DISTRIBUTOR, Role.RETAILER}),
    TxKind.PROCESS_LOT: frozenset({Role.PROCESSOR}),
    TxKind.QUALITY_CHECK: frozenset({Role.DISTRIBUTOR, Role.RETAILER}),
    TxKind.RAISE_DISPUTE: frozenset(
        {Role.FARMER, Role.PROCESSOR, Role.DISTRIBUTOR, Role.RETAILER, Role.CONSUMER}
    ),
    TxKind.RESOLVE_DISPUTE: frozenset({Role.NEGOTIATOR}),
}

# Raw lots go to processors; processed lots go downstream.
RAW_LOT_BIDDERS = frozenset({Role.PROCESSOR})
PROCESSED_LOT_BIDDERS = frozenset({Role.DISTRIBUTOR, Role.RETAILER})


def derive_child_lot_id(tx_id: bytes, output_index: int) -> bytes:
    return hashlib.sha256(tx_id + enc_u32(output_index)).digest()


def validate_transaction(state: WorldState, tx: Transaction, cfg: ChainConfig = DEFAULT_CONFIG) -> None:
    """Raise a RuleViolation unless `tx` may be applied to `state`.

    Auction timing uses ``state.time`` — the timestamp of the block the
    transaction would be included in.
    """
    if tx.tx_id in state.applied_txs:
        raise DuplicateTransaction(tx.tx_id.hex())

    if tx.kind is TxKind.REGISTER_ACTOR:
        if actor_id_for(tx.body.public_key) != tx.signer:
            raise BadSignature("signer is not the hash of the registering key")
        if not tx.verify_signature(tx.body.public_key):
            raise BadSignature("self-signature does not verify")
        if tx.signer in state.actors:
            raise DuplicateActor(tx.signer.hex())
        return

    actor = state.actors.get(tx.signer)
    if actor is None:
        raise UnknownSigner(tx.signer.hex())
    if not tx.verify_signature(actor.public_key):
        raise BadSignature(tx.tx_id.hex())
    if actor.role not in AUTHORIZATION[tx.kind]:
        raise RoleForbidden(f"{actor.role.wire_name} may not submit {tx.kind.wire_name}")

    _validate_rules(state, tx, actor, cfg)


def _validate_rules(state: WorldState, tx: Transaction, actor: Actor, cfg: ChainConfig) -> None:
    body = tx.body
    kind = tx.kind

    if kind is TxKind.RECORD_SENSOR_BATCH:
        lot = state.lots.get(body.lot_id)
        if lot is None:
            raise UnknownLot(body.lot_id.hex())
        if lot.owner != tx.signer:
            raise NotOwner("only the lot owner records its sensors")
        for reading in body.readings:
            if reading.subject != body.lot_id:
                raise SubjectMismatch("reading subject differs from batch lot")

    elif kind is TxKind.CREATE_LOT:
        if body.quantity <= 0:
            raise QuantityInvalid(f"quantity {body.quantity}")

    elif kind is TxKind.OPEN_AUCTION:
        lot = state.lots.get(body.lot_id)
        if lot is None:
            raise UnknownLot(body.lot_id.hex())
        if lot.owner != tx.signer:
            raise NotOwner("only the lot owner may auction it")
        if lot.status is not LotStatus.REGISTERED:
            raise BadLotStatus(f"lot is {lot.status.wire_name}")
        if body.close_time <= body.open_time:
            raise BadAuctionWindow("close_time must exceed open_time")
        seller_role = Role.PROCESSOR if lot.is_processed else Role.FARMER
        if actor.role is not seller_role:
            raise RoleForbidden(
                f"{actor.role.wire_name} may not auction a "
                f"{'processed' if lot.is_processed else 'raw'} lot"
            )

    elif kind is TxKind.PLACE_BID:
        auction = state.auctions.get(body.auction_id)
        if auction is None:
            raise UnknownAuction(body.auction_id.hex())
        lot = state.lots[auction.lot_id]
        eligible = PROCESSED_LOT_BIDDERS if lot.is_processed else RAW_LOT_BIDDERS
        if actor.role not in eligible:
            raise RoleForbidden(
                f"{actor.role.wire_name} may not bid on a "
                f"{'processed' if lot.is_processed else 'raw'} lot"
            )
        contracts.place_bid(auction, tx.signer, body.amount, now=state.time)

    elif kind is TxKind.CLOSE_AUCTION:
        auction = state.auctions.get(body.auction_id)
        if auction is None:
            raise UnknownAuction(body.auction_id.hex())
        if auction.seller != tx.signer:
            raise NotSeller("only the seller closes its auction")
        contracts.close_auction(auction, now=state.time)

    elif kind is TxKind.START_SHIPMENT:
        lot = state.lots.get(body.lot_id)
        if lot is None:
            raise UnknownLot(body.lot_id.hex())
        if lot.status is not LotStatus.SOLD:
            raise BadLotStatus(f"lot is {lot.status.wire_name}, not sold")
        if body.recipient not in state.actors:
            raise UnknownActor(body.recipient.hex())
        if body.recipient != lot.owner:
            raise WrongRecipient("shipments deliver to the lot owner")

    elif kind is TxKind.RECORD_TELEMETRY:
        shipment = state.shipments.get(body.shipment_id)
        if shipment is None:
            raise UnknownShipment(body.shipment_id.hex())
        if shipment.shipper != tx.signer:
            raise NotShipper("only the shipper records telemetry")
        if shipment.delivered_time is not None:
            raise BadShipmentStatus("shipment already delivered")
        for reading in body.readings:
            if reading.subject != body.shipment_id:
                raise SubjectMismatch("reading subject differs from shipment")
            if reading.metric is not Metric.TEMPERATURE:
                raise contracts.WrongMetric("shipment telemetry carries temperature only")
        _check_monotonic(
            [w.time for w in shipment.waypoints],
            [w.time for w in body.waypoints],
            "waypoint",
        )
        _check_monotonic(
            [r.time for r in shipment.temperature_log],
            [r.time for r in body.readings],
            "temperature",
        )

    elif kind is TxKind.CONFIRM_DELIVERY:
        shipment = state.shipments.get(body.shipment_id)
        if shipment is None:
            raise UnknownShipment(body.shipment_id.hex())
        if shipment.recipient != tx.signer:
            raise NotRecipient("only the recipient confirms delivery")
        if shipment.delivered_time is not None:
            raise BadShipmentStatus("shipment already delivered")

    elif kind is TxKind.PROCESS_LOT:
        if not body.parent_lots:
            raise MalformedBody("processing requires at least one parent lot")
        if len(set(body.parent_lots)) != len(body.parent_lots):
            raise MalformedBody("duplicate parent lot")
        if not body.outputs:
            raise MalformedBody("processing requires at least one output")
        parent_total = 0
        for parent_id in body.parent_lots:
            parent = state.lots.get(parent_id)
            if parent is None:
                raise UnknownLot(parent_id.hex())
            if parent.owner != tx.signer:
                raise NotOwner("processor must own every parent lot")
            if parent.status is not LotStatus.DELIVERED:
                raise BadLotStatus(f"parent lot is {parent.status.wire_name}")
            parent_total += parent.quantity
        output_total = 0
        for output in body.outputs:
            if output.quantity <= 0:
                raise QuantityInvalid(f"output quantity {output.quantity}")
            output_total += output.quantity
        if output_total > parent_total:
            raise OutputsExceedParents(f"{output_total} > {parent_total}")

    elif kind is TxKind.QUALITY_CHECK:
        if body.lot_id not in state.lots:
            raise UnknownLot(body.lot_id.hex())

    elif kind is TxKind.RAISE_DISPUTE:
        if body.respondent not in state.actors:
            raise UnknownActor(body.respondent.hex())
        if body.subject not in state.lots and body.subject not in state.shipments:
            raise UnknownSubject(body.subject.hex())

    elif kind is TxKind.RESOLVE_DISPUTE:
        dispute = state.disputes.get(body.dispute_id)
        if dispute is None:
            raise UnknownDispute(body.dispute_id.hex())
        if dispute.status is not DisputeStatus.OPEN:
            raise AlreadyResolved(body.dispute_id.hex())
        if body.ruled_against not in (dispute.raiser, dispute.respondent):
            raise BadRulingParty("ruling must name the raiser or the respondent")


def _check_monotonic(existing: list[int], incoming: list[int], what: str) -> None:
    last = existing[-1] if existing else None
    for t in incoming:
        if last is not None and t < last:
            raise TimeNotMonotonic(f"{what} times must be non-decreasing")
        last = t


def apply_transaction(state: WorldState, tx: Transaction, cfg: ChainConfig = DEFAULT_CONFIG) -> WorldState:
    """Successor state for a transaction that already passed validation."""
    events = outcome_of(tx, state)
    new = _transition(state, tx, cfg)

    reputations = new.reputations
    if events:
        reputations = dict(reputations)
        for event in events:
            current = reputations.get(event.subject, INITIAL_SCORE)
            reputations[event.subject] = update_score(current, event, cfg.alpha_micro)

    return replace(
        new,
        reputations=reputations,
        applied_txs=new.applied_txs | {tx.tx_id},
    )


def _transition(state: WorldState, tx: Transaction, cfg: ChainConfig) -> WorldState:
    body = tx.body
    kind = tx.kind
    now = state.time

    if kind is TxKind.REGISTER_ACTOR:
        actor = Actor(
            actor_id=tx.signer,
            role=body.role,
            display_name=body.display_name,
            public_key=body.public_key,
        )
        return replace(
            state,
            actors={**state.actors, tx.signer: actor},
            reputations={**state.reputations, tx.signer: INITIAL_SCORE},
        )

    if kind is TxKind.RECORD_SENSOR_BATCH:
        existing = state.readings.get(body.lot_id, ())
        return replace(
            state,
            readings={**state.readings, body.lot_id: existing + tuple(body.readings)},
        )

    if kind is TxKind.CREATE_LOT:
        lot = Lot(
            lot_id=tx.tx_id,
            owner=tx.signer,
            origin_farm=tx.signer,
            crop_type=body.crop_type,
            seed_variety=body.seed_variety,
            sown_weather_summary=body.sown_weather_summary,
            quantity=body.quantity,
            harvest_time=body.harvest_time,
        )
        return replace(state, lots={**state.lots, lot.lot_id: lot})

    if kind is TxKind.OPEN_AUCTION:
        auction = Auction(
            auction_id=tx.tx_id,
            lot_id=body.lot_id,
            seller=tx.signer,
            reserve_price=body.reserve_price,
            open_time=body.open_time,
            close_time=body.close_time,
        )
        lot = replace(state.lots[body.lot_id], status=LotStatus.IN_AUCTION)
        return replace(
            state,
            auctions={**state.auctions, auction.auction_id: auction},
            lots={**state.lots, lot.lot_id: lot},
        )

    if kind is TxKind.PLACE_BID:
        auction = contracts.place_bid(
            state.auctions[body.auction_id], tx.signer, body.amount, now=now
        )
        return replace(state, auctions={**state.auctions, auction.auction_id: auction})

    if kind is TxKind.CLOSE_AUCTION:
        auction = contracts.close_auction(state.auctions[body.auction_id], now=now)
        lot = state.lots[auction.lot_id]
        if auction.winner is not None:
            lot = replace(lot, owner=auction.winner[0], status=LotStatus.SOLD)
        else:
            lot = replace(lot, status=LotStatus.REGISTERED)
        return replace(
            state,
            auctions={**state.auctions, auction.auction_id: auction},
            lots={**state.lots, lot.lot_id: lot},
        )

    if kind is TxKind.START_SHIPMENT:
        shipment = Shipment(
            shipment_id=tx.tx_id,
            lot_id=body.lot_id,
            shipper=tx.signer,
            recipient=body.recipient,
            vehicle_id=body.vehicle_id,
            cold_chain_max=body.cold_chain_max,
            contract_price=body.contract_price,
        )
        lot = replace(state.lots[body.lot_id], status=LotStatus.IN_TRANSIT)
        return replace(
            state,
            shipments={**state.shipments, shipment.shipment_id: shipment},
            lots={**state.lots, lot.lot_id: lot},
        )

    if kind is TxKind.RECORD_TELEMETRY:
        shipment = state.shipments[body.shipment_id]
        log = shipment.temperature_log + tuple(body.readings)
        breached, _ = contracts.cold_chain_check(log, shipment.cold_chain_max)
        shipment = replace(
            shipment,
            waypoints=shipment.waypoints + tuple(body.waypoints),
            temperature_log=log,
            status=ShipmentStatus.BREACHED if breached else shipment.status,
        )
        existing = state.readings.get(body.shipment_id, ())
        return replace(
            state,
            shipments={**state.shipments, shipment.shipment_id: shipment},
            readings={**state.readings, body.shipment_id: existing + tuple(body.readings)},
        )

    if kind is TxKind.CONFIRM_DELIVERY:
        shipment = state.shipments[body.shipment_id]
        final_status = (
            ShipmentStatus.BREACHED
            if shipment.status is ShipmentStatus.BREACHED
            else ShipmentStatus.DELIVERED
        )
        shipment = replace(shipment, status=final_status, delivered_time=now)
        shipment = replace(
            shipment, settlement=contracts.settle_delivery(shipment, cfg.penalty_rate_micro)
        )
        lot = replace(
            state.lots[shipment.lot_id], owner=shipment.recipient, status=LotStatus.DELIVERED
        )
        return replace(
            state,
            shipments={**state.shipments, shipment.shipment_id: shipment},
            lots={**state.lots, lot.lot_id: lot},
        )

    if kind is TxKind.PROCESS_LOT:
        lots = dict(state.lots)
        for parent_id in body.parent_lots:
            lots[parent_id] = replace(lots[parent_id], status=LotStatus.PROCESSED)
        origin = state.lots[body.parent_lots[0]].origin_farm
        for index, output in enumerate(body.outputs):
            child = Lot(
                lot_id=derive_child_lot_id(tx.tx_id, index),
                owner=tx.signer,
                origin_farm=origin,
                crop_type=output.product_type,
                seed_variety="",
                sown_weather_summary="",
                quantity=output.quantity,
                harvest_time=now,
                parent_lots=tuple(body.parent_lots),
                processing_temp=body.processing_temp,
                expiry_time=now + cfg.shelf_life_for(output.product_type),
            )
            lots[child.lot_id] = child
        return replace(state, lots=lots)

    if kind is TxKind.QUALITY_CHECK:
        record = QualityRecord(checker=tx.signer, passed=body.passed, notes=body.notes, time=now)
        existing = state.quality_checks.get(body.lot_id, ())
        return replace(
            state,
            quality_checks={**state.quality_checks, body.lot_id: existing + (record,)},
        )

    if kind is TxKind.RAISE_DISPUTE:
        dispute = Dispute(
            dispute_id=tx.tx_id,
            subject=body.subject,
            raiser=tx.signer,
            respondent=body.respondent,
            claim=body.claim,
        )
        return replace(state, disputes={**state.disputes, dispute.dispute_id: dispute})

    if kind is TxKind.RESOLVE_DISPUTE:
        dispute = replace(
            state.disputes[body.dispute_id],
            status=DisputeStatus.RESOLVED,
            ruled_against=body.ruled_against,
        )
        return replace(state, disputes={**state.disputes, dispute.dispute_id: dispute})

    raise AssertionError(f"unhandled kind {kind}")


def apply_block(state: WorldState, block: Block, cfg: ChainConfig = DEFAULT_CONFIG) -> WorldState:
    """Apply one block: set block time, fold transactions, bump height."""
    state = replace(state, time=block.header.timestamp)
    for index, tx in enumerate(block.transactions):
        try:
            validate_transaction(state, tx, cfg)
        except RuleViolation as exc:
            raise InvalidTransaction(state.height, index, exc.code) from exc
        state = apply_transaction(state, tx, cfg)
    return replace(state, height=state.height + 1)


def replay(blocks: Sequence[Block], cfg: ChainConfig = DEFAULT_CONFIG) -> WorldState:
    """Fold every transaction of a validated chain into a fresh state."""
    bad = validate_chain(blocks, cfg.genesis().hash)
    if bad is not None:
        raise InvalidChain(bad)
    state = empty_state()
    for block in blocks:
        state = apply_block(state, block, cfg)
    return state


def _enc_reading(reading: SensorReading) -> bytes:
    return reading.to_bytes()


def _enc_optional(present: bool, payload: bytes) -> bytes:
    return (b"\x01" + payload) if present else b"\x00"


def state_digest(state: WorldState) -> bytes:
    """SHA-256 of the canonical state encoding (maps in ascending key order)."""
    h = hashlib.sha256()
    h.update(enc_u64(state.height))
    h.update(enc_u64(state.time))

    h.update(enc_u32(len(state.actors)))
    for actor_id in sorted(state.actors):
        actor = state.actors[actor_id]
        h.update(actor_id)
        h.update(enc_u8(actor.role))
        h.update(enc_str(actor.display_name))
        h.update(enc_u32(len(actor.public_key)))
        h.update(actor.public_key)

    h.update(enc_u32(len(state.lots)))
    for lot_id in sorted(state.lots):
        lot = state.lots[lot_id]
        h.update(lot_id)
        h.update(lot.owner)
        h.update(lot.origin_farm)
        h.update(enc_str(lot.crop_type))
        h.update(enc_str(lot.seed_variety))
        h.update(enc_str(lot.sown_weather_summary))
        h.update(enc_u64(lot.quantity))
        h.update(enc_u64(lot.harvest_time))
        h.update(enc_u32(len(lot.parent_lots)))
        for parent in lot.parent_lots:
            h.update(parent)
        h.update(_enc_optional(lot.processing_temp is not None, enc_i32(lot.processing_temp or 0)))
        h.update(_enc_optional(lot.expiry_time is not None, enc_u64(lot.expiry_time or 0)))
        h.update(enc_u8(lot.status))

    h.update(enc_u32(len(state.auctions)))
    for auction_id in sorted(state.auctions):
        auction = state.auctions[auction_id]
        h.update(auction_id)
        h.update(auction.lot_id)
        h.update(auction.seller)
        h.update(enc_u64(auction.reserve_price))
        h.update(enc_u64(auction.open_time))
        h.update(enc_u64(auction.close_time))
        h.update(enc_u32(len(auction.bids)))
        for bid in auction.bids:
            h.update(bid.bidder)
            h.update(enc_u64(bid.amount))
            h.update(enc_u64(bid.time))
        h.update(enc_u8(auction.status))
        if auction.winner is None:
            h.update(b"\x00")
        else:
            h.update(b"\x01" + auction.winner[0] + enc_u64(auction.winner[1]))

    h.update(enc_u32(len(state.shipments)))
    for shipment_id in sorted(state.shipments):
        s = state.shipments[shipment_id]
        h.update(shipment_id)
        h.update(s.lot_id)
        h.update(s.shipper)
        h.update(s.recipient)
        h.update(enc_str(s.vehicle_id))
        h.update(enc_i32(s.cold_chain_max))
        h.update(enc_u64(s.contract_price))
        h.update(enc_u32(len(s.waypoints)))
        for w in s.waypoints:
            h.update(w.to_bytes())
        h.update(enc_u32(len(s.temperature_log)))
        for reading in s.temperature_log:
            h.update(_enc_reading(reading))
        h.update(enc_u8(s.status))
        h.update(_enc_optional(s.delivered_time is not None, enc_u64(s.delivered_time or 0)))
        if s.settlement is None:
            h.update(b"\x00")
        else:
            h.update(
                b"\x01"
                + s.settlement.payer
                + s.settlement.payee
                + enc_u64(s.settlement.gross)
                + enc_u64(s.settlement.penalty)
                + enc_u64(s.settlement.net)
            )

    h.update(enc_u32(len(state.disputes)))
    for dispute_id in sorted(state.disputes):
        d = state.disputes[dispute_id]
        h.update(dispute_id)
        h.update(d.subject)
        h.update(d.raiser)
        h.update(d.respondent)
        h.update(enc_str(d.claim))
        h.update(enc_u8(d.status))
        h.update(_enc_optional(d.ruled_against is not None, d.ruled_against or b""))

    h.update(enc_u32(len(state.reputations)))
    for actor_id in sorted(state.reputations):
        h.update(actor_id)
        h.update(enc_u32(state.reputations[actor_id]))

    h.update(enc_u32(len(state.readings)))
    for subject in sorted(state.readings):
        h.update(subject)
        entries = state.readings[subject]
        h.update(enc_u32(len(entries)))
        for reading in entries:
            h.update(_enc_reading(reading))

    h.update(enc_u32(len(state.quality_checks)))
    for lot_id in sorted(state.quality_checks):
        h.update(lot_id)
        records = state.quality_checks[lot_id]
        h.update(enc_u32(len(records)))
        for record in records:
            h.update(record.checker)
            h.update(enc_bool(record.passed))
            h.update(enc_str(record.notes))
            h.update(enc_u64(record.time))

    h.update(enc_u32(len(state.applied_txs)))
    for tx_id in sorted(state.applied_txs):
        h.update(tx_id)

    return h.digest()
