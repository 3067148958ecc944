from __future__ import annotations

import time

import pytest
from fastapi.testclient import TestClient

from agrichain.api import create_app
from agrichain.config import NodeConfig
from agrichain.node import NodeRuntime
from agrichain.scenario import build_demo
from agrichain.storage import BlockLog
from agrichain.traceability import missing_step4_groups
from agrichain.transactions import (
    OpenAuction,
    PlaceBid,
    RaiseDispute,
    Transaction,
    sign_transaction,
)

from conftest import FAST_CFG


@pytest.fixture(scope="module")
def live(tmp_path_factory):
    """A started node runtime over a seeded chain with one open auction."""
    now = int(time.time())
    builder, cast, outcomes = build_demo(
        cycles=1, cfg=FAST_CFG, seed=13, base_time=now - 400 * 600
    )
    lot_id = builder.create_lot(cast["farmer"])
    builder.record_sensor_batch(cast["farmer"], lot_id)
    open_tx = builder.submit(
        OpenAuction(
            lot_id=lot_id,
            reserve_price=10_000,
            open_time=builder.time,
            close_time=now + 6 * 3600,
        ),
        cast["farmer"],
    )
    builder.seal_block()

    data_dir = tmp_path_factory.mktemp("api-node")
    with BlockLog(data_dir / "blocks.agri") as log:
        for block in builder.chain:
            log.append_block(block)

    runtime = NodeRuntime(NodeConfig(chain=FAST_CFG, data_dir=data_dir, mine=True))
    runtime.start()
    client = TestClient(create_app(runtime))
    yield {
        "client": client,
        "runtime": runtime,
        "builder": builder,
        "cast": cast,
        "outcomes": outcomes,
        "auction_id": open_tx.tx_id,
    }
    runtime.stop()


class TestReads:
    def test_chain_head(self, live):
        response = live["client"].get("/v1/chain/head")
        assert response.status_code == 200
        body = response.json()
        assert body["height"] >= len(live["builder"].chain)
        assert len(body["state_digest"]) == 64
        assert body["tip"]["merkle_root"]

    def test_block_by_digest_and_walkback(self, live):
        client = live["client"]
        tip = client.get("/v1/chain/head").json()["tip"]
        block = client.get(f"/v1/blocks/{tip['hash']}").json()
        assert block["header"]["hash"] == tip["hash"]
        parent = client.get(f"/v1/blocks/{block['header']['prev_hash']}")
        assert parent.status_code == 200

    def test_block_unknown_and_malformed(self, live):
        assert live["client"].get("/v1/blocks/" + "0" * 64).status_code == 404
        assert live["client"].get("/v1/blocks/zzz").status_code == 400

    def test_lot_and_unknown_lot(self, live):
        lot_id = live["outcomes"][0]["lot_id"].hex()
        body = live["client"].get(f"/v1/lots/{lot_id}").json()
        assert body["lot_id"] == lot_id
        assert body["status"] == "processed"
        missing = live["client"].get("/v1/lots/" + "1" * 64)
        assert missing.status_code == 404
        assert missing.json()["error"] == "UnknownLot"

    def test_trace_has_all_groups(self, live):
        child = live["outcomes"][0]["child_lot_id"].hex()
        response = live["client"].get(f"/v1/lots/{child}/trace")
        assert response.status_code == 200
        report = response.json()
        assert missing_step4_groups(report) == []
        assert report["anchors"]

    def test_open_auctions_listed(self, live):
        body = live["client"].get("/v1/auctions", params={"status": "open"}).json()
        ids = [a["auction_id"] for a in body["auctions"]]
        assert live["auction_id"].hex() in ids
        assert "server_time" in body

    def test_auction_detail(self, live):
        auction_id = live["auction_id"].hex()
        body = live["client"].get(f"/v1/auctions/{auction_id}").json()
        assert body["status"] == "open"
        assert body["lot"]["crop_type"]

    def test_shipment(self, live):
        shipment_id = live["outcomes"][0]["raw_shipment"].hex()
        body = live["client"].get(f"/v1/shipments/{shipment_id}").json()
        assert body["shipment_id"] == shipment_id
        assert body["settlement"]["net"] == body["settlement"]["gross"] - body["settlement"]["penalty"]
        assert body["temperature_log"]

    def test_actor_reputation_rendering(self, live):
        actor_id = live["cast"]["farmer"].actor_id.hex()
        body = live["client"].get(f"/v1/actors/{actor_id}").json()
        assert body["role"] == "farmer"
        integral, _, frac = body["reputation"].partition(".")
        assert integral in ("0", "1") and len(frac) == 6

    def test_disputes_endpoint(self, live):
        body = live["client"].get("/v1/disputes").json()
        assert "disputes" in body


class TestSubmission:
    def test_bid_round_trip(self, live):
        client, runtime = live["client"], live["runtime"]
        processor = live["cast"]["processor"]
        tx = sign_transaction(
            PlaceBid(auction_id=live["auction_id"], amount=15_000), processor
        )
        response = client.post("/v1/transactions", json=tx.to_json())
        assert response.status_code == 202
        assert response.json()["tx_id"] == tx.tx_id.hex()
        assert runtime.wait_for_tx(tx.tx_id), "bid was not mined"
        auction = client.get(f"/v1/auctions/{live['auction_id'].hex()}").json()
        assert auction["best_bid"] == {"bidder": processor.actor_id.hex(), "amount": 15_000}

    def test_low_bid_rejected_with_code(self, live):
        client = live["client"]
        retailer = live["cast"]["retailer"]  # wrong role for a raw lot as well
        processor = live["cast"]["processor"]
        tx = sign_transaction(PlaceBid(auction_id=live["auction_id"], amount=1), processor)
        response = client.post("/v1/transactions", json=tx.to_json())
        assert response.status_code == 400
        assert response.json()["error"] == "BidTooLow"
        role_tx = sign_transaction(
            PlaceBid(auction_id=live["auction_id"], amount=50_000), retailer
        )
        assert client.post("/v1/transactions", json=role_tx.to_json()).json()["error"] == "RoleForbidden"

    def test_bad_signature_rejected(self, live):
        processor = live["cast"]["processor"]
        tx = sign_transaction(PlaceBid(auction_id=live["auction_id"], amount=99_000), processor)
        payload = tx.to_json()
        payload["signature"] = "00" * 64
        response = live["client"].post("/v1/transactions", json=payload)
        assert response.status_code == 400
        assert response.json()["error"] == "BadSignature"

    def test_malformed_payload_rejected(self, live):
        response = live["client"].post("/v1/transactions", json={"kind": "place_bid"})
        assert response.status_code == 400
        assert response.json()["error"] == "MalformedTransaction"

    def test_dispute_round_trip(self, live):
        client, runtime = live["client"], live["runtime"]
        consumer = live["cast"]["consumer"]
        tx = sign_transaction(
            RaiseDispute(
                subject=live["outcomes"][0]["child_lot_id"],
                respondent=live["cast"]["processor"].actor_id,
                claim="label mismatch",
            ),
            consumer,
        )
        assert client.post("/v1/transactions", json=tx.to_json()).status_code == 202
        assert runtime.wait_for_tx(tx.tx_id)
        open_disputes = client.get("/v1/disputes", params={"status": "open"}).json()["disputes"]
        assert any(d["dispute_id"] == tx.tx_id.hex() for d in open_disputes)

    def test_acknowledged_tx_appears_in_trace_anchor(self, live):
        """A 202-acknowledged transaction that lands in a block becomes a
        verifiable anchor in later trace reports."""
        client, runtime = live["client"], live["runtime"]
        farmer = live["cast"]["farmer"]
        from agrichain.transactions import CreateLot

        tx = sign_transaction(
            CreateLot(crop_type="okra", seed_variety="v", sown_weather_summary="humid",
                      quantity=1_000, harvest_time=int(time.time())),
            farmer,
        )
        assert client.post("/v1/transactions", json=tx.to_json()).status_code == 202
        assert runtime.wait_for_tx(tx.tx_id)
        report = client.get(f"/v1/lots/{tx.tx_id.hex()}/trace").json()
        assert any(a["tx_id"] == tx.tx_id.hex() for a in report["anchors"])
