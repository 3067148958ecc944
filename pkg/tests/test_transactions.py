from __future__ import annotations

import hashlib

import pytest

from agrichain.codec import DecodeError, Reader
from agrichain.keys import Keypair
from agrichain.transactions import (
    BODY_CLASSES,
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
    TxKind,
    Waypoint,
    sign_transaction,
    transaction_from_bytes,
)


def _d(i: int) -> bytes:
    return hashlib.sha256(f"id-{i}".encode()).digest()


KEY = Keypair.from_seed(b"tx-test-key")

SAMPLE_BODIES = [
    RegisterActor(role=Role.FARMER, display_name="Field One", public_key=KEY.public_bytes),
    RecordSensorBatch(
        lot_id=_d(1),
        readings=(
            SensorReading(subject=_d(1), metric=Metric.HUMIDITY, value=5512, time=10, device_id="h-1"),
            SensorReading(subject=_d(1), metric=Metric.TEMPERATURE, value=-250, time=20, device_id="t-1"),
        ),
    ),
    CreateLot(
        crop_type="tomato",
        seed_variety="heirloom-12",
        sown_weather_summary="dry spell, mild",
        quantity=120_000,
        harvest_time=1_700_000_000,
    ),
    OpenAuction(lot_id=_d(2), reserve_price=10_000, open_time=100, close_time=900),
    PlaceBid(auction_id=_d(3), amount=12_500),
    CloseAuction(auction_id=_d(3)),
    StartShipment(
        lot_id=_d(2), recipient=_d(4), vehicle_id="TRUCK-7", cold_chain_max=800, contract_price=12_500
    ),
    RecordTelemetry(
        shipment_id=_d(5),
        waypoints=(Waypoint(lat=12_970_000, lon=77_590_000, time=50),),
        readings=(
            SensorReading(subject=_d(5), metric=Metric.TEMPERATURE, value=420, time=50, device_id="r-1"),
        ),
    ),
    ConfirmDelivery(shipment_id=_d(5)),
    ProcessLot(
        parent_lots=(_d(2),),
        outputs=(LotOutput(product_type="tomato-paste", quantity=60_000),),
        processing_temp=7_500,
        method="steam-blanch",
    ),
    QualityCheck(lot_id=_d(6), passed=True, notes="routine inspection"),
    RaiseDispute(subject=_d(5), respondent=_d(7), claim="cold chain exceeded"),
    ResolveDispute(dispute_id=_d(8), ruled_against=_d(7)),
]


@pytest.mark.parametrize("body", SAMPLE_BODIES, ids=lambda b: type(b).__name__)
def test_bytes_round_trip(body):
    tx = sign_transaction(body, KEY)
    decoded = transaction_from_bytes(tx.to_bytes())
    assert decoded == tx
    assert decoded.tx_id == tx.tx_id


@pytest.mark.parametrize("body", SAMPLE_BODIES, ids=lambda b: type(b).__name__)
def test_json_round_trip(body):
    tx = sign_transaction(body, KEY)
    assert Transaction.from_json(tx.to_json()) == tx


def test_every_kind_has_a_sample():
    assert {type(b) for b in SAMPLE_BODIES} == set(BODY_CLASSES.values())


def test_tx_id_is_hash_of_preimage():
    tx = sign_transaction(SAMPLE_BODIES[2], KEY)
    assert tx.tx_id == hashlib.sha256(tx.signed_preimage).digest()


def test_signature_covers_tx_id():
    tx = sign_transaction(SAMPLE_BODIES[4], KEY)
    assert tx.verify_signature(KEY.public_bytes)
    other = Keypair.from_seed(b"other")
    assert not tx.verify_signature(other.public_bytes)


def test_signature_bytes_do_not_change_tx_id():
    body = SAMPLE_BODIES[4]
    tx = sign_transaction(body, KEY)
    tampered = Transaction(kind=tx.kind, body=tx.body, signer=tx.signer, signature=b"\x00" * 64)
    assert tampered.tx_id == tx.tx_id
    assert not tampered.verify_signature(KEY.public_bytes)


def test_json_tx_id_mismatch_rejected():
    tx = sign_transaction(SAMPLE_BODIES[3], KEY)
    payload = tx.to_json()
    payload["tx_id"] = "00" * 32
    with pytest.raises(DecodeError):
        Transaction.from_json(payload)


def test_unknown_kind_tag_rejected():
    with pytest.raises(DecodeError):
        transaction_from_bytes(b"\xfe" + b"\x00" * 40)


def test_unknown_wire_kind_rejected():
    tx = sign_transaction(SAMPLE_BODIES[0], KEY)
    payload = tx.to_json()
    payload["kind"] = "mint_money"
    with pytest.raises(DecodeError):
        Transaction.from_json(payload)


def test_trailing_bytes_rejected():
    tx = sign_transaction(SAMPLE_BODIES[5], KEY)
    with pytest.raises(DecodeError):
        transaction_from_bytes(tx.to_bytes() + b"\x00")


def test_reading_units():
    assert Metric.TEMPERATURE.unit == "centi_celsius"
    assert Metric.HUMIDITY.unit == "centi_percent_rh"
    assert Metric.CO2.unit == "ppm"


def test_reading_decode_rejects_bad_metric():
    reading = SensorReading(subject=_d(1), metric=Metric.CO2, value=412, time=5, device_id="c")
    raw = bytearray(reading.to_bytes())
    raw[32] = 9  # metric tag out of range
    with pytest.raises(ValueError):
        SensorReading.decode(Reader(bytes(raw)))
