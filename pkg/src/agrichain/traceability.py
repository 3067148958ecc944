"""Consumer tracing: walk a lot's provenance DAG and emit a verifiable report.

The report gathers farm origin, custody timeline, vehicles, processing,
per-custody temperature summaries, and expiry, and anchors every cited
transaction with a merkle proof so a reader holding only block headers can
check it (`verify_trace`).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Optional, Sequence

from .chainstate import LotStatus, UnknownLot, WorldState, derive_child_lot_id
from .ledger import Block, BlockHeader, MerkleProof, merkle_proof, verify_proof
from .transactions import Metric, Transaction, TxKind


class HeightOutOfRange(Exception):
    pass


class AcquiredVia(IntEnum):
    HARVEST = 0
    AUCTION_AWARD = 1
    DELIVERY = 2
    PROCESSING = 3

    @property
    def wire_name(self) -> str:
        return self.name.lower()


@dataclass(frozen=True)
class CustodyEntry:
    lot_id: bytes
    holder: bytes
    holder_name: str
    from_time: int
    to_time: int
    acquired_via: AcquiredVia


@dataclass(frozen=True)
class FarmOrigin:
    farmer: bytes
    farmer_name: str
    crop_type: str
    seed_variety: str
    sown_weather_summary: str
    harvest_time: int


@dataclass(frozen=True)
class ProcessingEntry:
    processor: bytes
    processor_name: str
    processing_temp: int  # centi-degrees C
    time: int
    expiry_time: int
    method: str


@dataclass(frozen=True)
class StorageSummary:
    lot_id: bytes
    holder: bytes
    from_time: int
    to_time: int
    min_temp: Optional[int]
    max_temp: Optional[int]
    mean_temp: Optional[int]
    reading_count: int


@dataclass(frozen=True)
class Anchor:
    tx_id: bytes
    block_height: int
    proof: MerkleProof


@dataclass(frozen=True)
class TraceReport:
    lot_id: bytes
    origins: tuple[FarmOrigin, ...]
    custody: tuple[CustodyEntry, ...]
    processing: tuple[ProcessingEntry, ...]
    storage_conditions: tuple[StorageSummary, ...]
    vehicles: tuple[str, ...]
    expiry_time: Optional[int]
    anchors: tuple[Anchor, ...]
    as_of: int

    def to_json(self) -> dict:
        return {
            "lot_id": self.lot_id.hex(),
            "origins": [
                {
                    "farmer": o.farmer.hex(),
                    "farmer_name": o.farmer_name,
                    "crop_type": o.crop_type,
                    "seed_variety": o.seed_variety,
                    "sown_weather_summary": o.sown_weather_summary,
                    "harvest_time": o.harvest_time,
                }
                for o in self.origins
            ],
            "custody": [
                {
                    "lot_id": c.lot_id.hex(),
                    "holder": c.holder.hex(),
                    "holder_name": c.holder_name,
                    "from_time": c.from_time,
                    "to_time": c.to_time,
                    "acquired_via": c.acquired_via.wire_name,
                }
                for c in self.custody
            ],
            "processing": [
                {
                    "processor": p.processor.hex(),
                    "processor_name": p.processor_name,
                    "processing_temp": p.processing_temp,
                    "processing_temp_unit": "centi_celsius",
                    "time": p.time,
                    "expiry_time": p.expiry_time,
                    "method": p.method,
                }
                for p in self.processing
            ],
            "storage_conditions": [
                {
                    "lot_id": s.lot_id.hex(),
                    "holder": s.holder.hex(),
                    "from_time": s.from_time,
                    "to_time": s.to_time,
                    "min_temp": s.min_temp,
                    "max_temp": s.max_temp,
                    "mean_temp": s.mean_temp,
                    "temp_unit": "centi_celsius",
                    "reading_count": s.reading_count,
                }
                for s in self.storage_conditions
            ],
            "vehicles": list(self.vehicles),
            "expiry_time": self.expiry_time,
            "anchors": [
                {
                    "tx_id": a.tx_id.hex(),
                    "block_height": a.block_height,
                    "proof": a.proof.to_json(),
                }
                for a in self.anchors
            ],
            "as_of": self.as_of,
        }

    @classmethod
    def anchors_from_json(cls, obj: dict) -> list["Anchor"]:
        return [
            Anchor(
                tx_id=bytes.fromhex(a["tx_id"]),
                block_height=int(a["block_height"]),
                proof=MerkleProof.from_json(a["proof"]),
            )
            for a in obj["anchors"]
        ]


STEP4_GROUPS = ("origins", "vehicles", "processing", "storage_conditions", "expiry_time")


def missing_step4_groups(report_json: dict) -> list[str]:
    """Names of the consumer-facing field groups absent from a report."""
    missing = []
    if not report_json.get("origins"):
        missing.append("origins")
    if not report_json.get("vehicles"):
        missing.append("vehicles")
    if not any(p.get("processing_temp") is not None for p in report_json.get("processing", [])):
        missing.append("processing")
    if not any(
        s.get("min_temp") is not None and s.get("max_temp") is not None
        for s in report_json.get("storage_conditions", [])
    ):
        missing.append("storage_conditions")
    if report_json.get("expiry_time") is None:
        missing.append("expiry_time")
    return missing


def lineage_of(state: WorldState, lot_id: bytes) -> set[bytes]:
    """The lot and every ancestor reachable through parent links."""
    seen: set[bytes] = set()
    frontier = [lot_id]
    while frontier:
        current = frontier.pop()
        if current in seen:
            continue
        seen.add(current)
        frontier.extend(state.lots[current].parent_lots)
    return seen


def _touched_lots(state: WorldState, tx: Transaction) -> list[bytes]:
    kind = tx.kind
    body = tx.body
    if kind is TxKind.CREATE_LOT:
        return [tx.tx_id]
    if kind in (TxKind.RECORD_SENSOR_BATCH, TxKind.OPEN_AUCTION, TxKind.QUALITY_CHECK):
        return [body.lot_id]
    if kind in (TxKind.PLACE_BID, TxKind.CLOSE_AUCTION):
        auction = state.auctions.get(body.auction_id)
        return [auction.lot_id] if auction else []
    if kind is TxKind.START_SHIPMENT:
        return [body.lot_id]
    if kind in (TxKind.RECORD_TELEMETRY, TxKind.CONFIRM_DELIVERY):
        shipment = state.shipments.get(body.shipment_id)
        return [shipment.lot_id] if shipment else []
    if kind is TxKind.PROCESS_LOT:
        children = [derive_child_lot_id(tx.tx_id, i) for i in range(len(body.outputs))]
        return list(body.parent_lots) + children
    if kind is TxKind.RAISE_DISPUTE or kind is TxKind.RESOLVE_DISPUTE:
        if kind is TxKind.RESOLVE_DISPUTE:
            dispute = state.disputes.get(body.dispute_id)
            subject = dispute.subject if dispute else None
        else:
            subject = body.subject
        if subject is None:
            return []
        if subject in state.lots:
            return [subject]
        shipment = state.shipments.get(subject)
        return [shipment.lot_id] if shipment else []
    return []


def _display_name(state: WorldState, actor_id: bytes) -> str:
    actor = state.actors.get(actor_id)
    return actor.display_name if actor else ""


def trace(
    state: WorldState, chain: Sequence[Block], lot_id: bytes
) -> TraceReport:
    if lot_id not in state.lots:
        raise UnknownLot(lot_id.hex())

    lineage = lineage_of(state, lot_id)
    as_of = chain[-1].header.timestamp if chain else state.time

    # One pass over the chain: cited transactions, custody events, vehicles,
    # processing entries, and the time each lot got consumed by processing.
    cited: list[tuple[Transaction, int, int]] = []  # (tx, height, block time)
    custody_events: dict[bytes, list[tuple[int, bytes, AcquiredVia]]] = {l: [] for l in lineage}
    consumed_at: dict[bytes, int] = {}
    vehicles: list[str] = []
    processing: list[ProcessingEntry] = []

    for height, block in enumerate(chain):
        block_time = block.header.timestamp
        for tx in block.transactions:
            touched = [l for l in _touched_lots(state, tx) if l in lineage]
            if not touched:
                continue
            cited.append((tx, height, block_time))
            kind = tx.kind
            if kind is TxKind.CREATE_LOT:
                custody_events[tx.tx_id].append((block_time, tx.signer, AcquiredVia.HARVEST))
            elif kind is TxKind.CLOSE_AUCTION:
                auction = state.auctions[tx.body.auction_id]
                if auction.winner is not None and auction.lot_id in lineage:
                    custody_events[auction.lot_id].append(
                        (block_time, auction.winner[0], AcquiredVia.AUCTION_AWARD)
                    )
            elif kind is TxKind.CONFIRM_DELIVERY:
                shipment = state.shipments[tx.body.shipment_id]
                if shipment.lot_id in lineage:
                    custody_events[shipment.lot_id].append(
                        (block_time, shipment.recipient, AcquiredVia.DELIVERY)
                    )
            elif kind is TxKind.START_SHIPMENT:
                if tx.body.lot_id in lineage and tx.body.vehicle_id not in vehicles:
                    vehicles.append(tx.body.vehicle_id)
            elif kind is TxKind.PROCESS_LOT:
                for parent_id in tx.body.parent_lots:
                    if parent_id in lineage:
                        consumed_at[parent_id] = block_time
                child_in_lineage = None
                for i in range(len(tx.body.outputs)):
                    child_id = derive_child_lot_id(tx.tx_id, i)
                    if child_id in lineage:
                        child_in_lineage = state.lots[child_id]
                        custody_events[child_id].append(
                            (block_time, tx.signer, AcquiredVia.PROCESSING)
                        )
                if child_in_lineage is not None:
                    processing.append(
                        ProcessingEntry(
                            processor=tx.signer,
                            processor_name=_display_name(state, tx.signer),
                            processing_temp=tx.body.processing_temp,
                            time=block_time,
                            expiry_time=child_in_lineage.expiry_time or 0,
                            method=tx.body.method,
                        )
                    )

    # Custody: branch by branch, lots ordered by harvest time then id.
    branch_order = sorted(lineage, key=lambda l: (state.lots[l].harvest_time, l))
    custody: list[CustodyEntry] = []
    for branch_lot in branch_order:
        events = custody_events[branch_lot]
        end_of_branch = consumed_at.get(branch_lot, as_of)
        for i, (at, holder, via) in enumerate(events):
            to_time = events[i + 1][0] if i + 1 < len(events) else end_of_branch
            custody.append(
                CustodyEntry(
                    lot_id=branch_lot,
                    holder=holder,
                    holder_name=_display_name(state, holder),
                    from_time=at,
                    to_time=to_time,
                    acquired_via=via,
                )
            )

    origins = tuple(
        FarmOrigin(
            farmer=state.lots[l].origin_farm,
            farmer_name=_display_name(state, state.lots[l].origin_farm),
            crop_type=state.lots[l].crop_type,
            seed_variety=state.lots[l].seed_variety,
            sown_weather_summary=state.lots[l].sown_weather_summary,
            harvest_time=state.lots[l].harvest_time,
        )
        for l in branch_order
        if not state.lots[l].parent_lots
    )

    storage = tuple(_storage_summaries(state, custody))

    # Anchor every cited transaction against its enclosing block.
    anchors = tuple(
        Anchor(tx_id=tx.tx_id, block_height=height, proof=merkle_proof(chain[height], tx.tx_id))
        for tx, height, _ in cited
    )

    return TraceReport(
        lot_id=lot_id,
        origins=origins,
        custody=tuple(custody),
        processing=tuple(processing),
        storage_conditions=storage,
        vehicles=tuple(vehicles),
        expiry_time=state.lots[lot_id].expiry_time,
        anchors=anchors,
        as_of=as_of,
    )


def _temperatures_for_lot(state: WorldState, lot_id: bytes) -> list[tuple[int, int]]:
    """(time, value) of every temperature reading tied to a lot or its shipments."""
    samples = [
        (r.time, r.value)
        for r in state.readings.get(lot_id, ())
        if r.metric is Metric.TEMPERATURE
    ]
    for shipment in state.shipments.values():
        if shipment.lot_id == lot_id:
            samples.extend((r.time, r.value) for r in shipment.temperature_log)
    samples.sort()
    return samples


def _storage_summaries(state: WorldState, custody: list[CustodyEntry]) -> list[StorageSummary]:
    by_lot: dict[bytes, list[tuple[int, int]]] = {}
    summaries = []
    last_for_lot = {entry.lot_id: entry for entry in custody}
    for entry in custody:
        if entry.lot_id not in by_lot:
            by_lot[entry.lot_id] = _temperatures_for_lot(state, entry.lot_id)
        include_end = last_for_lot[entry.lot_id] is entry
        values = [
            v
            for t, v in by_lot[entry.lot_id]
            if entry.from_time <= t and (t <= entry.to_time if include_end else t < entry.to_time)
        ]
        if values:
            total = sum(values)
            mean = (total + len(values) // 2) // len(values) if total >= 0 else -(
                (-total + len(values) // 2) // len(values)
            )
            summaries.append(
                StorageSummary(
                    lot_id=entry.lot_id,
                    holder=entry.holder,
                    from_time=entry.from_time,
                    to_time=entry.to_time,
                    min_temp=min(values),
                    max_temp=max(values),
                    mean_temp=mean,
                    reading_count=len(values),
                )
            )
        else:
            summaries.append(
                StorageSummary(
                    lot_id=entry.lot_id,
                    holder=entry.holder,
                    from_time=entry.from_time,
                    to_time=entry.to_time,
                    min_temp=None,
                    max_temp=None,
                    mean_temp=None,
                    reading_count=0,
                )
            )
    return summaries


def verify_trace(anchors: Sequence[Anchor], chain_headers: Sequence[BlockHeader]) -> bool:
    """True iff every anchor's proof verifies against the header at its height.

    Pure: needs only the anchors and the header list, no state.
    """
    for anchor in anchors:
        if not 0 <= anchor.block_height < len(chain_headers):
            raise HeightOutOfRange(f"height {anchor.block_height} of {len(chain_headers)}")
        if anchor.proof.leaf != anchor.tx_id:
            return False
        if anchor.proof.root != chain_headers[anchor.block_height].merkle_root:
            return False
        if not verify_proof(anchor.proof):
            return False
    return True


def verify_trace_report(report: TraceReport, chain_headers: Sequence[BlockHeader]) -> bool:
    return verify_trace(report.anchors, chain_headers)
