"""HTTP surface consumed by the console and CLI.

Reads are pure functions of the current snapshot; writes are authenticated
by the transaction signatures themselves, so there is no session layer.
"""

from __future__ import annotations

import time as _time

from fastapi import Body, FastAPI
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .chainstate import Dispute, Lot, RuleViolation, WorldState
from .codec import DecodeError
from .contracts import Auction, Shipment, best_bid
from .ledger import Block, BlockHeader
from .node import BacklogFull, NodeRuntime, Snapshot
from .reputation import INITIAL_SCORE, render_score
from .traceability import trace
from .transactions import Transaction


def _error(status: int, code: str, detail: str = "") -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": code, "detail": detail})


def _hex_digest(value: str) -> bytes:
    raw = bytes.fromhex(value)
    if len(raw) != 32:
        raise ValueError("digest must be 32 bytes")
    return raw


def header_json(header: BlockHeader, digest: bytes) -> dict:
    return {
        "hash": digest.hex(),
        "version": header.version,
        "prev_hash": header.prev_hash.hex(),
        "merkle_root": header.merkle_root.hex(),
        "timestamp": header.timestamp,
        "difficulty": header.difficulty,
        "nonce": header.nonce,
        "tx_count": header.tx_count,
    }


def block_json(block: Block, height: int) -> dict:
    return {
        "height": height,
        "header": header_json(block.header, block.hash),
        "transactions": [tx.to_json() for tx in block.transactions],
    }


def lot_json(state: WorldState, lot: Lot) -> dict:
    return {
        "lot_id": lot.lot_id.hex(),
        "owner": lot.owner.hex(),
        "origin_farm": lot.origin_farm.hex(),
        "crop_type": lot.crop_type,
        "seed_variety": lot.seed_variety,
        "sown_weather_summary": lot.sown_weather_summary,
        "quantity": lot.quantity,
        "quantity_unit": "grams",
        "harvest_time": lot.harvest_time,
        "parent_lots": [p.hex() for p in lot.parent_lots],
        "processing_temp": lot.processing_temp,
        "expiry_time": lot.expiry_time,
        "status": lot.status.wire_name,
        "reading_count": len(state.readings.get(lot.lot_id, ())),
        "quality_checks": [
            {
                "checker": q.checker.hex(),
                "passed": q.passed,
                "notes": q.notes,
                "time": q.time,
            }
            for q in state.quality_checks.get(lot.lot_id, ())
        ],
    }


def auction_json(state: WorldState, auction: Auction) -> dict:
    lot = state.lots.get(auction.lot_id)
    best = best_bid(auction)
    return {
        "auction_id": auction.auction_id.hex(),
        "lot_id": auction.lot_id.hex(),
        "seller": auction.seller.hex(),
        "seller_name": state.actors[auction.seller].display_name
        if auction.seller in state.actors
        else "",
        "reserve_price": auction.reserve_price,
        "open_time": auction.open_time,
        "close_time": auction.close_time,
        "status": auction.status.wire_name,
        "bids": [
            {"bidder": b.bidder.hex(), "amount": b.amount, "time": b.time}
            for b in auction.bids
        ],
        "best_bid": {"bidder": best.bidder.hex(), "amount": best.amount} if best else None,
        "winner": {"actor_id": auction.winner[0].hex(), "price": auction.winner[1]}
        if auction.winner
        else None,
        "lot": {
            "crop_type": lot.crop_type if lot else "",
            "quantity": lot.quantity if lot else 0,
            "processed": bool(lot.parent_lots) if lot else False,
        },
    }


def shipment_json(shipment: Shipment) -> dict:
    return {
        "shipment_id": shipment.shipment_id.hex(),
        "lot_id": shipment.lot_id.hex(),
        "shipper": shipment.shipper.hex(),
        "recipient": shipment.recipient.hex(),
        "vehicle_id": shipment.vehicle_id,
        "cold_chain_max": shipment.cold_chain_max,
        "cold_chain_max_unit": "centi_celsius",
        "contract_price": shipment.contract_price,
        "status": shipment.status.wire_name,
        "delivered_time": shipment.delivered_time,
        "waypoints": [w.to_json() for w in shipment.waypoints],
        "temperature_log": [r.to_json() for r in shipment.temperature_log],
        "settlement": {
            "payer": shipment.settlement.payer.hex(),
            "payee": shipment.settlement.payee.hex(),
            "gross": shipment.settlement.gross,
            "penalty": shipment.settlement.penalty,
            "net": shipment.settlement.net,
        }
        if shipment.settlement
        else None,
    }


def dispute_json(dispute: Dispute) -> dict:
    return {
        "dispute_id": dispute.dispute_id.hex(),
        "subject": dispute.subject.hex(),
        "raiser": dispute.raiser.hex(),
        "respondent": dispute.respondent.hex(),
        "claim": dispute.claim,
        "status": dispute.status.wire_name,
        "ruled_against": dispute.ruled_against.hex() if dispute.ruled_against else None,
    }


def create_app(runtime: NodeRuntime) -> FastAPI:
    app = FastAPI(title="agrichain node", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def snap() -> Snapshot:
        return runtime.snapshot

    @app.post("/v1/transactions", status_code=202)
    def submit_transaction(payload: dict = Body(...)):
        try:
            tx = Transaction.from_json(payload)
        except (DecodeError, KeyError, TypeError, ValueError) as exc:
            return _error(400, "MalformedTransaction", str(exc))
        try:
            tx_id = runtime.submit(tx)
        except RuleViolation as exc:
            return _error(400, exc.code, str(exc))
        except BacklogFull:
            return _error(429, "BacklogFull", "submission queue full")
        return {"tx_id": tx_id.hex(), "status": "accepted"}

    @app.get("/v1/chain/head")
    def chain_head():
        s = snap()
        return {
            "height": s.height,
            "tip": header_json(s.tip.header, s.tip.hash),
            "state_digest": s.digest().hex(),
            "server_time": int(_time.time()),
        }

    @app.get("/v1/blocks/{digest}")
    def get_block(digest: str):
        try:
            raw = _hex_digest(digest)
        except ValueError:
            return _error(400, "MalformedDigest", digest)
        s = snap()
        for height, block in enumerate(s.chain):
            if block.hash == raw:
                return block_json(block, height)
        return _error(404, "UnknownBlock", digest)

    @app.get("/v1/lots/{lot_id}")
    def get_lot(lot_id: str):
        try:
            raw = _hex_digest(lot_id)
        except ValueError:
            return _error(400, "MalformedDigest", lot_id)
        s = snap()
        lot = s.state.lots.get(raw)
        if lot is None:
            return _error(404, "UnknownLot", lot_id)
        return lot_json(s.state, lot)

    @app.get("/v1/lots/{lot_id}/trace")
    def get_trace(lot_id: str):
        try:
            raw = _hex_digest(lot_id)
        except ValueError:
            return _error(400, "MalformedDigest", lot_id)
        s = snap()
        if raw not in s.state.lots:
            return _error(404, "UnknownLot", lot_id)
        return trace(s.state, s.chain, raw).to_json()

    @app.get("/v1/auctions")
    def list_auctions(status: str = ""):
        s = snap()
        auctions = sorted(s.state.auctions.values(), key=lambda a: (a.open_time, a.auction_id))
        if status:
            auctions = [a for a in auctions if a.status.wire_name == status]
        return {
            "auctions": [auction_json(s.state, a) for a in auctions],
            "server_time": int(_time.time()),
        }

    @app.get("/v1/auctions/{auction_id}")
    def get_auction(auction_id: str):
        try:
            raw = _hex_digest(auction_id)
        except ValueError:
            return _error(400, "MalformedDigest", auction_id)
        s = snap()
        auction = s.state.auctions.get(raw)
        if auction is None:
            return _error(404, "UnknownAuction", auction_id)
        return auction_json(s.state, auction)

    @app.get("/v1/shipments/{shipment_id}")
    def get_shipment(shipment_id: str):
        try:
            raw = _hex_digest(shipment_id)
        except ValueError:
            return _error(400, "MalformedDigest", shipment_id)
        s = snap()
        shipment = s.state.shipments.get(raw)
        if shipment is None:
            return _error(404, "UnknownShipment", shipment_id)
        return shipment_json(shipment)

    @app.get("/v1/actors/{actor_id}")
    def get_actor(actor_id: str):
        try:
            raw = _hex_digest(actor_id)
        except ValueError:
            return _error(400, "MalformedDigest", actor_id)
        s = snap()
        actor = s.state.actors.get(raw)
        if actor is None:
            return _error(404, "UnknownActor", actor_id)
        return {
            "actor_id": actor.actor_id.hex(),
            "role": actor.role.wire_name,
            "display_name": actor.display_name,
            "public_key": actor.public_key.hex(),
            "reputation": render_score(s.state.reputations.get(raw, INITIAL_SCORE)),
        }

    @app.get("/v1/disputes")
    def list_disputes(status: str = ""):
        s = snap()
        disputes = sorted(s.state.disputes.values(), key=lambda d: d.dispute_id)
        if status:
            disputes = [d for d in disputes if d.status.wire_name == status]
        return {"disputes": [dispute_json(d) for d in disputes]}

    return app
