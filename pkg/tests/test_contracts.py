from __future__ import annotations

import hashlib
import itertools
import random

import pytest

from agrichain.contracts import (
    Auction,
    AuctionClosed,
    AuctionStatus,
    Bid,
    BidTooLow,
    NotFinal,
    NotYetClosable,
    SelfBid,
    Settlement,
    Shipment,
    ShipmentStatus,
    WrongMetric,
    best_bid,
    close_auction,
    cold_chain_check,
    place_bid,
    settle_delivery,
)
from agrichain.transactions import Metric, SensorReading


def _d(i: int) -> bytes:
    return hashlib.sha256(f"actor-{i}".encode()).digest()


def _auction(reserve=100, open_time=0, close_time=1000) -> Auction:
    return Auction(
        auction_id=_d(0),
        lot_id=_d(1),
        seller=_d(2),
        reserve_price=reserve,
        open_time=open_time,
        close_time=close_time,
    )


def _temp(value: int, time: int) -> SensorReading:
    return SensorReading(subject=_d(3), metric=Metric.TEMPERATURE, value=value, time=time, device_id="t")


class TestPlaceBid:
    def test_first_bid_at_reserve_accepted(self):
        a = place_bid(_auction(), _d(10), 100, now=5)
        assert a.bids[-1].amount == 100

    def test_equal_to_best_rejected(self):
        a = place_bid(_auction(), _d(10), 100, now=5)
        with pytest.raises(BidTooLow):
            place_bid(a, _d(11), 100, now=6)

    def test_below_reserve_rejected(self):
        with pytest.raises(BidTooLow):
            place_bid(_auction(reserve=100), _d(10), 99, now=5)

    def test_bid_at_close_time_rejected(self):
        with pytest.raises(AuctionClosed):
            place_bid(_auction(close_time=1000), _d(10), 100, now=1000)

    def test_bid_before_open_rejected(self):
        with pytest.raises(AuctionClosed):
            place_bid(_auction(open_time=50), _d(10), 100, now=49)

    def test_seller_cannot_bid(self):
        with pytest.raises(SelfBid):
            place_bid(_auction(), _d(2), 150, now=5)

    def test_monotone_bids_property(self):
        rng = random.Random(99)
        for _ in range(50):
            auction = _auction(reserve=10)
            now = 1
            for _ in range(rng.randrange(1, 12)):
                amount = rng.randrange(1, 500)
                try:
                    auction = place_bid(auction, _d(rng.randrange(3, 30)), amount, now=now)
                except (BidTooLow, SelfBid):
                    pass
                now += 1
            amounts = [b.amount for b in auction.bids]
            assert amounts == sorted(amounts) and len(set(amounts)) == len(amounts)


def oracle_winner(bids: list[Bid]):
    """Brute-force argmax with the tie-break: amount desc, time asc, bidder asc."""
    if not bids:
        return None
    best = bids[0]
    for bid in bids[1:]:
        if (
            bid.amount > best.amount
            or (bid.amount == best.amount and bid.time < best.time)
            or (bid.amount == best.amount and bid.time == best.time and bid.bidder < best.bidder)
        ):
            best = bid
    return best


class TestCloseAuction:
    def test_highest_amount_wins(self):
        a = _auction()
        a = place_bid(a, _d(10), 100, now=1)
        a = place_bid(a, _d(11), 150, now=2)
        closed = close_auction(a, now=1000)
        assert closed.status is AuctionStatus.CLOSED
        assert closed.winner == (_d(11), 150)

    def test_no_bids_is_failed(self):
        closed = close_auction(_auction(), now=1000)
        assert closed.status is AuctionStatus.FAILED
        assert closed.winner is None

    def test_before_close_time_rejected(self):
        with pytest.raises(NotYetClosable):
            close_auction(_auction(close_time=1000), now=999)

    def test_double_close_rejected(self):
        closed = close_auction(_auction(), now=1000)
        with pytest.raises(AuctionClosed):
            close_auction(closed, now=1001)

    def test_exhaustive_bid_orderings_match_oracle(self):
        """All arrival orders of subsets from the 4-amount multiset: the
        contract winner must equal the brute-force oracle over accepted bids."""
        amounts = [100, 150, 150, 200]
        bidders = [_d(20 + i) for i in range(4)]
        cases = 0
        for k in range(0, 5):
            for order in itertools.permutations(range(4), k):
                auction = _auction(reserve=100)
                now = 1
                for idx in order:
                    try:
                        auction = place_bid(auction, bidders[idx], amounts[idx], now=now)
                    except BidTooLow:
                        pass
                    now += 1
                closed = close_auction(auction, now=1000)
                expected = oracle_winner(list(auction.bids))
                if expected is None:
                    assert closed.status is AuctionStatus.FAILED
                else:
                    assert closed.status is AuctionStatus.CLOSED
                    assert closed.winner == (expected.bidder, expected.amount)
                cases += 1
        assert cases == 1 + 4 + 12 + 24 + 24

    def test_tie_break_earliest_then_smaller_id(self):
        # Construct equal-amount bids directly (place_bid forbids them) to
        # exercise the full deterministic tie-break.
        low, high = sorted([_d(31), _d(32)])
        bids = (Bid(high, 500, 4), Bid(low, 500, 4), Bid(low, 400, 1))
        auction = Auction(
            auction_id=_d(0), lot_id=_d(1), seller=_d(2), reserve_price=100,
            open_time=0, close_time=10, bids=bids,
        )
        closed = close_auction(auction, now=10)
        assert closed.winner == (low, 500)
        assert oracle_winner(list(bids)).bidder == low

    def test_scale_invariance(self):
        rng = random.Random(5)
        for _ in range(20):
            auction = _auction(reserve=1)
            now = 1
            for _ in range(rng.randrange(1, 5)):
                try:
                    auction = place_bid(auction, _d(rng.randrange(10, 20)), rng.randrange(1, 50), now=now)
                except BidTooLow:
                    pass
                now += 1
            if not auction.bids:
                continue
            scaled = Auction(
                auction_id=auction.auction_id, lot_id=auction.lot_id, seller=auction.seller,
                reserve_price=auction.reserve_price * 7, open_time=0, close_time=1000,
                bids=tuple(Bid(b.bidder, b.amount * 7, b.time) for b in auction.bids),
            )
            assert close_auction(auction, 1000).winner[0] == close_auction(scaled, 1000).winner[0]


class TestColdChain:
    def test_empty_log_not_breached(self):
        assert cold_chain_check([], 400) == (False, None)

    def test_boundary_is_not_a_breach(self):
        breached, first = cold_chain_check([_temp(399, 1), _temp(400, 2)], 400)
        assert not breached and first is None

    def test_breach_reports_first_time(self):
        breached, first = cold_chain_check([_temp(380, 1), _temp(401, 2), _temp(395, 3)], 400)
        assert breached and first == 2

    def test_earliest_breach_wins(self):
        breached, first = cold_chain_check([_temp(405, 7), _temp(500, 3)], 400)
        assert breached and first == 3

    def test_wrong_metric_rejected(self):
        bad = SensorReading(subject=_d(3), metric=Metric.HUMIDITY, value=10, time=1, device_id="h")
        with pytest.raises(WrongMetric):
            cold_chain_check([bad], 400)


def _shipment(status: ShipmentStatus, price: int) -> Shipment:
    return Shipment(
        shipment_id=_d(40), lot_id=_d(41), shipper=_d(42), recipient=_d(43),
        vehicle_id="TRUCK-1", cold_chain_max=400, contract_price=price, status=status,
    )


class TestSettlement:
    def test_clean_delivery_full_payment(self):
        s = settle_delivery(_shipment(ShipmentStatus.DELIVERED, 10_000))
        assert s == Settlement(payer=_d(43), payee=_d(42), gross=10_000, penalty=0, net=10_000)

    def test_breach_forfeits_quarter(self):
        s = settle_delivery(_shipment(ShipmentStatus.BREACHED, 10_000))
        assert (s.gross, s.penalty, s.net) == (10_000, 2_500, 7_500)

    def test_floor_on_tiny_amounts(self):
        s = settle_delivery(_shipment(ShipmentStatus.BREACHED, 3))
        assert (s.penalty, s.net) == (0, 3)

    def test_in_transit_not_final(self):
        with pytest.raises(NotFinal):
            settle_delivery(_shipment(ShipmentStatus.IN_TRANSIT, 10))

    def test_settlement_idempotent(self):
        shipment = _shipment(ShipmentStatus.BREACHED, 9_999)
        assert settle_delivery(shipment) == settle_delivery(shipment)

    def test_custom_rate(self):
        s = settle_delivery(_shipment(ShipmentStatus.BREACHED, 1_000), penalty_rate_micro=100_000)
        assert (s.penalty, s.net) == (100, 900)
