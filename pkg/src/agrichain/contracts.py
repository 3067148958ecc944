"""Trading and delivery rules evaluated identically by every node.

Auctions are open ascending-bid: each accepted bid must strictly exceed
the current best (and meet the reserve), so validity is checkable at
inclusion time with no reveal phase. Bid time is the block timestamp of
inclusion and the bidding window is half-open [open_time, close_time).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import IntEnum
from typing import Optional, Sequence

from .transactions import Metric, SensorReading, Waypoint


class RuleViolation(Exception):
    """A deterministic validation failure; `code` is the wire-visible name."""

    @property
    def code(self) -> str:
        return type(self).__name__


class AuctionClosed(RuleViolation):
    pass


class BidTooLow(RuleViolation):
    pass


class SelfBid(RuleViolation):
    pass


class NotYetClosable(RuleViolation):
    pass


class WrongMetric(RuleViolation):
    pass


class NotFinal(RuleViolation):
    pass


class AuctionStatus(IntEnum):
    OPEN = 0
    CLOSED = 1
    FAILED = 2

    @property
    def wire_name(self) -> str:
        return self.name.lower()


class ShipmentStatus(IntEnum):
    IN_TRANSIT = 0
    DELIVERED = 1
    BREACHED = 2

    @property
    def wire_name(self) -> str:
        return self.name.lower()


@dataclass(frozen=True)
class Bid:
    bidder: bytes
    amount: int  # minor currency units
    time: int  # block timestamp of inclusion


@dataclass(frozen=True)
class Auction:
    auction_id: bytes
    lot_id: bytes
    seller: bytes
    reserve_price: int
    open_time: int
    close_time: int
    bids: tuple[Bid, ...] = ()
    status: AuctionStatus = AuctionStatus.OPEN
    winner: Optional[tuple[bytes, int]] = None  # (actor_id, price)


@dataclass(frozen=True)
class Settlement:
    payer: bytes
    payee: bytes
    gross: int
    penalty: int
    net: int


@dataclass(frozen=True)
class Shipment:
    shipment_id: bytes
    lot_id: bytes
    shipper: bytes
    recipient: bytes
    vehicle_id: str
    cold_chain_max: int  # centi-degrees C
    contract_price: int
    waypoints: tuple[Waypoint, ...] = ()
    temperature_log: tuple[SensorReading, ...] = ()
    status: ShipmentStatus = ShipmentStatus.IN_TRANSIT
    delivered_time: Optional[int] = None
    settlement: Optional[Settlement] = None


def best_bid(auction: Auction) -> Optional[Bid]:
    if not auction.bids:
        return None
    # Accepted bids are strictly increasing, but apply the full tie-break
    # rule anyway: max amount, then earliest time, then smaller bidder id.
    return min(auction.bids, key=lambda b: (-b.amount, b.time, b.bidder))


def place_bid(auction: Auction, bidder: bytes, amount: int, now: int) -> Auction:
    if auction.status is not AuctionStatus.OPEN or not auction.open_time <= now < auction.close_time:
        raise AuctionClosed(f"auction {auction.auction_id.hex()[:12]} not open at {now}")
    if bidder == auction.seller:
        raise SelfBid("seller may not bid on its own auction")
    current = best_bid(auction)
    floor = current.amount if current is not None else auction.reserve_price - 1
    if amount <= floor or amount < auction.reserve_price:
        raise BidTooLow(f"bid {amount} does not beat {floor}")
    return replace(auction, bids=auction.bids + (Bid(bidder=bidder, amount=amount, time=now),))


def close_auction(auction: Auction, now: int) -> Auction:
    if auction.status is not AuctionStatus.OPEN:
        raise AuctionClosed("auction already settled")
    if now < auction.close_time:
        raise NotYetClosable(f"close_time {auction.close_time} not reached at {now}")
    winning = best_bid(auction)
    if winning is None:
        return replace(auction, status=AuctionStatus.FAILED)
    return replace(
        auction,
        status=AuctionStatus.CLOSED,
        winner=(winning.bidder, winning.amount),
    )


def cold_chain_check(
    log: Sequence[SensorReading], cold_chain_max: int
) -> tuple[bool, Optional[int]]:
    """Breached iff any temperature reading strictly exceeds the maximum."""
    first_breach: Optional[int] = None
    for reading in log:
        if reading.metric is not Metric.TEMPERATURE:
            raise WrongMetric(f"cold chain log contains {reading.metric.wire_name}")
        if reading.value > cold_chain_max and (first_breach is None or reading.time < first_breach):
            first_breach = reading.time
    return first_breach is not None, first_breach


def settle_delivery(shipment: Shipment, penalty_rate_micro: int = 250_000) -> Settlement:
    """Recipient pays shipper; a breach forfeits a flat share of the gross."""
    if shipment.status is ShipmentStatus.IN_TRANSIT:
        raise NotFinal("shipment still in transit")
    gross = shipment.contract_price
    penalty = (gross * penalty_rate_micro) // 1_000_000 if shipment.status is ShipmentStatus.BREACHED else 0
    return Settlement(
        payer=shipment.recipient,
        payee=shipment.shipper,
        gross=gross,
        penalty=penalty,
        net=gross - penalty,
    )
