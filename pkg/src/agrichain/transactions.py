"""Typed supply-chain transactions: canonical bytes, signing, and JSON wire form.

A transaction id is the SHA-256 of the signed preimage (kind tag, body
bytes, signer id). The Ed25519 signature covers the tx id and therefore
everything except itself, which keeps ids stable under signature bytes.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from enum import IntEnum
from functools import cached_property
from typing import Any, Union

from .codec import (
    DecodeError,
    Reader,
    enc_bool,
    enc_bytes,
    enc_i32,
    enc_i64,
    enc_str,
    enc_u8,
    enc_u32,
    enc_u64,
)
from .keys import Keypair, verify_signature

DIGEST_LEN = 32


class Role(IntEnum):
    FARMER = 0
    PROCESSOR = 1
    DISTRIBUTOR = 2
    RETAILER = 3
    CONSUMER = 4
    NEGOTIATOR = 5

    @property
    def wire_name(self) -> str:
        return self.name.lower()

    @classmethod
    def from_wire(cls, name: str) -> "Role":
        try:
            return cls[name.upper()]
        except KeyError:
            raise DecodeError(f"unknown role: {name!r}") from None


class Metric(IntEnum):
    HUMIDITY = 0
    CO2 = 1
    TEMPERATURE = 2

    @property
    def wire_name(self) -> str:
        return self.name.lower()

    @property
    def unit(self) -> str:
        return {
            Metric.HUMIDITY: "centi_percent_rh",
            Metric.CO2: "ppm",
            Metric.TEMPERATURE: "centi_celsius",
        }[self]

    @classmethod
    def from_wire(cls, name: str) -> "Metric":
        try:
            return cls[name.upper()]
        except KeyError:
            raise DecodeError(f"unknown metric: {name!r}") from None


class TxKind(IntEnum):
    REGISTER_ACTOR = 0
    RECORD_SENSOR_BATCH = 1
    CREATE_LOT = 2
    OPEN_AUCTION = 3
    PLACE_BID = 4
    CLOSE_AUCTION = 5
    START_SHIPMENT = 6
    RECORD_TELEMETRY = 7
    CONFIRM_DELIVERY = 8
    PROCESS_LOT = 9
    QUALITY_CHECK = 10
    RAISE_DISPUTE = 11
    RESOLVE_DISPUTE = 12

    @property
    def wire_name(self) -> str:
        return self.name.lower()

    @classmethod
    def from_wire(cls, name: str) -> "TxKind":
        try:
            return cls[name.upper()]
        except KeyError:
            raise DecodeError(f"unknown transaction kind: {name!r}") from None


def _digest_field(value: bytes, name: str) -> bytes:
    if len(value) != DIGEST_LEN:
        raise ValueError(f"{name} must be {DIGEST_LEN} bytes, got {len(value)}")
    return value


def _dec_enum(cls, tag: int):
    try:
        return cls(tag)
    except ValueError:
        raise DecodeError(f"bad {cls.__name__} tag: {tag}") from None


@dataclass(frozen=True)
class SensorReading:
    subject: bytes
    metric: Metric
    value: int  # fixed point: centi-%RH, ppm, or centi-degrees C
    time: int
    device_id: str

    def to_bytes(self) -> bytes:
        return b"".join(
            (
                _digest_field(self.subject, "subject"),
                enc_u8(self.metric),
                enc_i64(self.value),
                enc_u64(self.time),
                enc_str(self.device_id),
            )
        )

    @classmethod
    def decode(cls, r: Reader) -> "SensorReading":
        return cls(
            subject=r.take(DIGEST_LEN),
            metric=_dec_enum(Metric, r.u8()),
            value=r.i64(),
            time=r.u64(),
            device_id=r.string(),
        )

    def to_json(self) -> dict:
        return {
            "subject": self.subject.hex(),
            "metric": self.metric.wire_name,
            "value": self.value,
            "unit": self.metric.unit,
            "time": self.time,
            "device_id": self.device_id,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SensorReading":
        return cls(
            subject=bytes.fromhex(obj["subject"]),
            metric=Metric.from_wire(obj["metric"]),
            value=int(obj["value"]),
            time=int(obj["time"]),
            device_id=str(obj["device_id"]),
        )


@dataclass(frozen=True)
class Waypoint:
    lat: int  # micro-degrees
    lon: int  # micro-degrees
    time: int

    def to_bytes(self) -> bytes:
        return enc_i32(self.lat) + enc_i32(self.lon) + enc_u64(self.time)

    @classmethod
    def decode(cls, r: Reader) -> "Waypoint":
        return cls(lat=r.i32(), lon=r.i32(), time=r.u64())

    def to_json(self) -> dict:
        return {"lat": self.lat, "lon": self.lon, "time": self.time}

    @classmethod
    def from_json(cls, obj: dict) -> "Waypoint":
        return cls(lat=int(obj["lat"]), lon=int(obj["lon"]), time=int(obj["time"]))


@dataclass(frozen=True)
class LotOutput:
    product_type: str
    quantity: int  # grams

    def to_bytes(self) -> bytes:
        return enc_str(self.product_type) + enc_u64(self.quantity)

    @classmethod
    def decode(cls, r: Reader) -> "LotOutput":
        return cls(product_type=r.string(), quantity=r.u64())

    def to_json(self) -> dict:
        return {"product_type": self.product_type, "quantity": self.quantity}

    @classmethod
    def from_json(cls, obj: dict) -> "LotOutput":
        return cls(product_type=str(obj["product_type"]), quantity=int(obj["quantity"]))


def _enc_seq(items: tuple) -> bytes:
    return enc_u32(len(items)) + b"".join(item.to_bytes() for item in items)


def _dec_seq(r: Reader, item_cls) -> tuple:
    return tuple(item_cls.decode(r) for _ in range(r.u32()))


@dataclass(frozen=True)
class RegisterActor:
    role: Role
    display_name: str
    public_key: bytes

    def to_bytes(self) -> bytes:
        return enc_u8(self.role) + enc_str(self.display_name) + enc_bytes(self.public_key)

    @classmethod
    def decode(cls, r: Reader) -> "RegisterActor":
        return cls(role=_dec_enum(Role, r.u8()), display_name=r.string(), public_key=r.blob())

    def to_json(self) -> dict:
        return {
            "role": self.role.wire_name,
            "display_name": self.display_name,
            "public_key": self.public_key.hex(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "RegisterActor":
        return cls(
            role=Role.from_wire(obj["role"]),
            display_name=str(obj["display_name"]),
            public_key=bytes.fromhex(obj["public_key"]),
        )


@dataclass(frozen=True)
class RecordSensorBatch:
    lot_id: bytes
    readings: tuple[SensorReading, ...]

    def to_bytes(self) -> bytes:
        return _digest_field(self.lot_id, "lot_id") + _enc_seq(self.readings)

    @classmethod
    def decode(cls, r: Reader) -> "RecordSensorBatch":
        return cls(lot_id=r.take(DIGEST_LEN), readings=_dec_seq(r, SensorReading))

    def to_json(self) -> dict:
        return {
            "lot_id": self.lot_id.hex(),
            "readings": [rd.to_json() for rd in self.readings],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "RecordSensorBatch":
        return cls(
            lot_id=bytes.fromhex(obj["lot_id"]),
            readings=tuple(SensorReading.from_json(rd) for rd in obj["readings"]),
        )


@dataclass(frozen=True)
class CreateLot:
    crop_type: str
    seed_variety: str
    sown_weather_summary: str
    quantity: int  # grams
    harvest_time: int

    def to_bytes(self) -> bytes:
        return b"".join(
            (
                enc_str(self.crop_type),
                enc_str(self.seed_variety),
                enc_str(self.sown_weather_summary),
                enc_u64(self.quantity),
                enc_u64(self.harvest_time),
            )
        )

    @classmethod
    def decode(cls, r: Reader) -> "CreateLot":
        return cls(
            crop_type=r.string(),
            seed_variety=r.string(),
            sown_weather_summary=r.string(),
            quantity=r.u64(),
            harvest_time=r.u64(),
        )

    def to_json(self) -> dict:
        return {
            "crop_type": self.crop_type,
            "seed_variety": self.seed_variety,
            "sown_weather_summary": self.sown_weather_summary,
            "quantity": self.quantity,
            "quantity_unit": "grams",
            "harvest_time": self.harvest_time,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CreateLot":
        return cls(
            crop_type=str(obj["crop_type"]),
            seed_variety=str(obj["seed_variety"]),
            sown_weather_summary=str(obj["sown_weather_summary"]),
            quantity=int(obj["quantity"]),
            harvest_time=int(obj["harvest_time"]),
        )


@dataclass(frozen=True)
class OpenAuction:
    lot_id: bytes
    reserve_price: int  # minor currency units
    open_time: int
    close_time: int

    def to_bytes(self) -> bytes:
        return b"".join(
            (
                _digest_field(self.lot_id, "lot_id"),
                enc_u64(self.reserve_price),
                enc_u64(self.open_time),
                enc_u64(self.close_time),
            )
        )

    @classmethod
    def decode(cls, r: Reader) -> "OpenAuction":
        return cls(
            lot_id=r.take(DIGEST_LEN),
            reserve_price=r.u64(),
            open_time=r.u64(),
            close_time=r.u64(),
        )

    def to_json(self) -> dict:
        return {
            "lot_id": self.lot_id.hex(),
            "reserve_price": self.reserve_price,
            "open_time": self.open_time,
            "close_time": self.close_time,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "OpenAuction":
        return cls(
            lot_id=bytes.fromhex(obj["lot_id"]),
            reserve_price=int(obj["reserve_price"]),
            open_time=int(obj["open_time"]),
            close_time=int(obj["close_time"]),
        )


@dataclass(frozen=True)
class PlaceBid:
    auction_id: bytes
    amount: int  # minor currency units

    def to_bytes(self) -> bytes:
        return _digest_field(self.auction_id, "auction_id") + enc_u64(self.amount)

    @classmethod
    def decode(cls, r: Reader) -> "PlaceBid":
        return cls(auction_id=r.take(DIGEST_LEN), amount=r.u64())

    def to_json(self) -> dict:
        return {"auction_id": self.auction_id.hex(), "amount": self.amount}

    @classmethod
    def from_json(cls, obj: dict) -> "PlaceBid":
        return cls(auction_id=bytes.fromhex(obj["auction_id"]), amount=int(obj["amount"]))


@dataclass(frozen=True)
class CloseAuction:
    auction_id: bytes

    def to_bytes(self) -> bytes:
        return _digest_field(self.auction_id, "auction_id")

    @classmethod
    def decode(cls, r: Reader) -> "CloseAuction":
        return cls(auction_id=r.take(DIGEST_LEN))

    def to_json(self) -> dict:
        return {"auction_id": self.auction_id.hex()}

    @classmethod
    def from_json(cls, obj: dict) -> "CloseAuction":
        return cls(auction_id=bytes.fromhex(obj["auction_id"]))


@dataclass(frozen=True)
class StartShipment:
    lot_id: bytes
    recipient: bytes
    vehicle_id: str
    cold_chain_max: int  # centi-degrees C
    contract_price: int  # minor currency units

    def to_bytes(self) -> bytes:
        return b"".join(
            (
                _digest_field(self.lot_id, "lot_id"),
                _digest_field(self.recipient, "recipient"),
                enc_str(self.vehicle_id),
                enc_i32(self.cold_chain_max),
                enc_u64(self.contract_price),
            )
        )

    @classmethod
    def decode(cls, r: Reader) -> "StartShipment":
        return cls(
            lot_id=r.take(DIGEST_LEN),
            recipient=r.take(DIGEST_LEN),
            vehicle_id=r.string(),
            cold_chain_max=r.i32(),
            contract_price=r.u64(),
        )

    def to_json(self) -> dict:
        return {
            "lot_id": self.lot_id.hex(),
            "recipient": self.recipient.hex(),
            "vehicle_id": self.vehicle_id,
            "cold_chain_max": self.cold_chain_max,
            "cold_chain_max_unit": "centi_celsius",
            "contract_price": self.contract_price,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "StartShipment":
        return cls(
            lot_id=bytes.fromhex(obj["lot_id"]),
            recipient=bytes.fromhex(obj["recipient"]),
            vehicle_id=str(obj["vehicle_id"]),
            cold_chain_max=int(obj["cold_chain_max"]),
            contract_price=int(obj["contract_price"]),
        )


@dataclass(frozen=True)
class RecordTelemetry:
    shipment_id: bytes
    waypoints: tuple[Waypoint, ...]
    readings: tuple[SensorReading, ...]

    def to_bytes(self) -> bytes:
        return (
            _digest_field(self.shipment_id, "shipment_id")
            + _enc_seq(self.waypoints)
            + _enc_seq(self.readings)
        )

    @classmethod
    def decode(cls, r: Reader) -> "RecordTelemetry":
        return cls(
            shipment_id=r.take(DIGEST_LEN),
            waypoints=_dec_seq(r, Waypoint),
            readings=_dec_seq(r, SensorReading),
        )

    def to_json(self) -> dict:
        return {
            "shipment_id": self.shipment_id.hex(),
            "waypoints": [w.to_json() for w in self.waypoints],
            "readings": [rd.to_json() for rd in self.readings],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "RecordTelemetry":
        return cls(
            shipment_id=bytes.fromhex(obj["shipment_id"]),
            waypoints=tuple(Waypoint.from_json(w) for w in obj["waypoints"]),
            readings=tuple(SensorReading.from_json(rd) for rd in obj["readings"]),
        )


@dataclass(frozen=True)
class ConfirmDelivery:
    shipment_id: bytes

    def to_bytes(self) -> bytes:
        return _digest_field(self.shipment_id, "shipment_id")

    @classmethod
    def decode(cls, r: Reader) -> "ConfirmDelivery":
        return cls(shipment_id=r.take(DIGEST_LEN))

    def to_json(self) -> dict:
        return {"shipment_id": self.shipment_id.hex()}

    @classmethod
    def from_json(cls, obj: dict) -> "ConfirmDelivery":
        return cls(shipment_id=bytes.fromhex(obj["shipment_id"]))


@dataclass(frozen=True)
class ProcessLot:
    parent_lots: tuple[bytes, ...]
    outputs: tuple[LotOutput, ...]
    processing_temp: int  # centi-degrees C
    method: str

    def to_bytes(self) -> bytes:
        parents = enc_u32(len(self.parent_lots)) + b"".join(
            _digest_field(p, "parent_lot") for p in self.parent_lots
        )
        return parents + _enc_seq(self.outputs) + enc_i32(self.processing_temp) + enc_str(self.method)

    @classmethod
    def decode(cls, r: Reader) -> "ProcessLot":
        parents = tuple(r.take(DIGEST_LEN) for _ in range(r.u32()))
        return cls(
            parent_lots=parents,
            outputs=_dec_seq(r, LotOutput),
            processing_temp=r.i32(),
            method=r.string(),
        )

    def to_json(self) -> dict:
        return {
            "parent_lots": [p.hex() for p in self.parent_lots],
            "outputs": [o.to_json() for o in self.outputs],
            "processing_temp": self.processing_temp,
            "processing_temp_unit": "centi_celsius",
            "method": self.method,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ProcessLot":
        return cls(
            parent_lots=tuple(bytes.fromhex(p) for p in obj["parent_lots"]),
            outputs=tuple(LotOutput.from_json(o) for o in obj["outputs"]),
            processing_temp=int(obj["processing_temp"]),
            method=str(obj["method"]),
        )


@dataclass(frozen=True)
class QualityCheck:
    lot_id: bytes
    passed: bool
    notes: str

    def to_bytes(self) -> bytes:
        return _digest_field(self.lot_id, "lot_id") + enc_bool(self.passed) + enc_str(self.notes)

    @classmethod
    def decode(cls, r: Reader) -> "QualityCheck":
        return cls(lot_id=r.take(DIGEST_LEN), passed=r.boolean(), notes=r.string())

    def to_json(self) -> dict:
        return {"lot_id": self.lot_id.hex(), "passed": self.passed, "notes": self.notes}

    @classmethod
    def from_json(cls, obj: dict) -> "QualityCheck":
        return cls(lot_id=bytes.fromhex(obj["lot_id"]), passed=bool(obj["passed"]), notes=str(obj["notes"]))


@dataclass(frozen=True)
class RaiseDispute:
    subject: bytes  # lot or shipment id
    respondent: bytes
    claim: str

    def to_bytes(self) -> bytes:
        return (
            _digest_field(self.subject, "subject")
            + _digest_field(self.respondent, "respondent")
            + enc_str(self.claim)
        )

    @classmethod
    def decode(cls, r: Reader) -> "RaiseDispute":
        return cls(subject=r.take(DIGEST_LEN), respondent=r.take(DIGEST_LEN), claim=r.string())

    def to_json(self) -> dict:
        return {
            "subject": self.subject.hex(),
            "respondent": self.respondent.hex(),
            "claim": self.claim,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "RaiseDispute":
        return cls(
            subject=bytes.fromhex(obj["subject"]),
            respondent=bytes.fromhex(obj["respondent"]),
            claim=str(obj["claim"]),
        )


@dataclass(frozen=True)
class ResolveDispute:
    dispute_id: bytes
    ruled_against: bytes

    def to_bytes(self) -> bytes:
        return _digest_field(self.dispute_id, "dispute_id") + _digest_field(self.ruled_against, "ruled_against")

    @classmethod
    def decode(cls, r: Reader) -> "ResolveDispute":
        return cls(dispute_id=r.take(DIGEST_LEN), ruled_against=r.take(DIGEST_LEN))

    def to_json(self) -> dict:
        return {"dispute_id": self.dispute_id.hex(), "ruled_against": self.ruled_against.hex()}

    @classmethod
    def from_json(cls, obj: dict) -> "ResolveDispute":
        return cls(
            dispute_id=bytes.fromhex(obj["dispute_id"]),
            ruled_against=bytes.fromhex(obj["ruled_against"]),
        )


TxBody = Union[
    RegisterActor,
    RecordSensorBatch,
    CreateLot,
    OpenAuction,
    PlaceBid,
    CloseAuction,
    StartShipment,
    RecordTelemetry,
    ConfirmDelivery,
    ProcessLot,
    QualityCheck,
    RaiseDispute,
    ResolveDispute,
]

BODY_CLASSES: dict[TxKind, type] = {
    TxKind.REGISTER_ACTOR: RegisterActor,
    TxKind.RECORD_SENSOR_BATCH: RecordSensorBatch,
    TxKind.CREATE_LOT: CreateLot,
    TxKind.OPEN_AUCTION: OpenAuction,
    TxKind.PLACE_BID: PlaceBid,
    TxKind.CLOSE_AUCTION: CloseAuction,
    TxKind.START_SHIPMENT: StartShipment,
    TxKind.RECORD_TELEMETRY: RecordTelemetry,
    TxKind.CONFIRM_DELIVERY: ConfirmDelivery,
    TxKind.PROCESS_LOT: ProcessLot,
    TxKind.QUALITY_CHECK: QualityCheck,
    TxKind.RAISE_DISPUTE: RaiseDispute,
    TxKind.RESOLVE_DISPUTE: ResolveDispute,
}

KIND_FOR_BODY: dict[type, TxKind] = {cls: kind for kind, cls in BODY_CLASSES.items()}


@dataclass(frozen=True)
class Transaction:
    kind: TxKind
    body: Any
    signer: bytes
    signature: bytes

    @cached_property
    def signed_preimage(self) -> bytes:
        return enc_u8(self.kind) + self.body.to_bytes() + _digest_field(self.signer, "signer")

    @cached_property
    def tx_id(self) -> bytes:
        return hashlib.sha256(self.signed_preimage).digest()

    def to_bytes(self) -> bytes:
        return self.signed_preimage + enc_bytes(self.signature)

    def verify_signature(self, public_key: bytes) -> bool:
        return verify_signature(public_key, self.signature, self.tx_id)

    def to_json(self) -> dict:
        return {
            "kind": self.kind.wire_name,
            "body": self.body.to_json(),
            "signer": self.signer.hex(),
            "signature": self.signature.hex(),
            "tx_id": self.tx_id.hex(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Transaction":
        kind = TxKind.from_wire(obj["kind"])
        body = BODY_CLASSES[kind].from_json(obj["body"])
        tx = cls(
            kind=kind,
            body=body,
            signer=bytes.fromhex(obj["signer"]),
            signature=bytes.fromhex(obj["signature"]),
        )
        claimed = obj.get("tx_id")
        if claimed is not None and bytes.fromhex(claimed) != tx.tx_id:
            raise DecodeError("tx_id does not match canonical body bytes")
        return tx


def sign_transaction(body: TxBody, keypair: Keypair) -> Transaction:
    """Build and sign a transaction; the signer is the keypair's actor id."""
    kind = KIND_FOR_BODY[type(body)]
    unsigned = Transaction(kind=kind, body=body, signer=keypair.actor_id, signature=b"")
    return Transaction(
        kind=kind,
        body=body,
        signer=keypair.actor_id,
        signature=keypair.sign(unsigned.tx_id),
    )


def encode_transaction(tx: Transaction) -> bytes:
    return tx.to_bytes()


def decode_transaction(r: Reader) -> Transaction:
    kind_byte = r.u8()
    try:
        kind = TxKind(kind_byte)
    except ValueError:
        raise DecodeError(f"unknown transaction kind tag: {kind_byte}") from None
    body = BODY_CLASSES[kind].decode(r)
    signer = r.take(DIGEST_LEN)
    signature = r.blob()
    return Transaction(kind=kind, body=body, signer=signer, signature=signature)


def transaction_from_bytes(raw: bytes) -> Transaction:
    r = Reader(raw)
    tx = decode_transaction(r)
    r.expect_end()
    return tx
