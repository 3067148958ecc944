"""Actor scoring from trade outcomes.

Scores are integers in [0, 1_000_000] (micro-units of [0.0, 1.0]) updated
by an exponentially weighted moving average in exact integer arithmetic,
so every node computes bit-identical values. New actors start at 500_000.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

SCORE_SCALE = 1_000_000
INITIAL_SCORE = 500_000
DEFAULT_ALPHA_MICRO = 200_000


class OutcomeKind(IntEnum):
    DELIVERED_CLEAN = 0
    COLD_CHAIN_BREACH = 1
    QUALITY_PASS = 2
    QUALITY_FAIL = 3
    DISPUTE_LOST = 4
    DISPUTE_WON = 5

    @property
    def wire_name(self) -> str:
        return self.name.lower()


# Outcome value in micro-units: favourable outcomes pull toward 1.0,
# unfavourable toward 0.0.
OUTCOME_WEIGHTS: dict[OutcomeKind, int] = {
    OutcomeKind.DELIVERED_CLEAN: SCORE_SCALE,
    OutcomeKind.QUALITY_PASS: SCORE_SCALE,
    OutcomeKind.DISPUTE_WON: SCORE_SCALE,
    OutcomeKind.COLD_CHAIN_BREACH: 0,
    OutcomeKind.QUALITY_FAIL: 0,
    OutcomeKind.DISPUTE_LOST: 0,
}


@dataclass(frozen=True)
class OutcomeEvent:
    subject: bytes  # actor id
    kind: OutcomeKind

    @property
    def weight(self) -> int:
        return OUTCOME_WEIGHTS[self.kind]


def update_score(current: int, event: OutcomeEvent, alpha_micro: int = DEFAULT_ALPHA_MICRO) -> int:
    """score' = round_half_up(((1 - a) * score + a * weight)), all in micro-units."""
    if not 0 <= alpha_micro <= SCORE_SCALE:
        raise ValueError(f"alpha_micro out of range: {alpha_micro}")
    if not 0 <= current <= SCORE_SCALE:
        raise ValueError(f"score out of range: {current}")
    numerator = (SCORE_SCALE - alpha_micro) * current + alpha_micro * event.weight
    return (numerator + SCORE_SCALE // 2) // SCORE_SCALE


def render_score(micro: int) -> str:
    """Decimal string with six fractional digits, e.g. 500000 -> '0.500000'."""
    return f"{micro // SCORE_SCALE}.{micro % SCORE_SCALE:06d}"


def outcome_of(tx, state_before) -> list[OutcomeEvent]:
    """Scoring events produced by applying `tx` against `state_before`.

    Delivery confirmation scores the shipper (clean or breached), a quality
    check scores the lot's owner at check time, and a dispute ruling scores
    both parties. Every other kind scores nobody.
    """
    from .contracts import ShipmentStatus
    from .transactions import TxKind

    if tx.kind is TxKind.CONFIRM_DELIVERY:
        shipment = state_before.shipments[tx.body.shipment_id]
        breached = shipment.status is ShipmentStatus.BREACHED
        kind = OutcomeKind.COLD_CHAIN_BREACH if breached else OutcomeKind.DELIVERED_CLEAN
        return [OutcomeEvent(subject=shipment.shipper, kind=kind)]

    if tx.kind is TxKind.QUALITY_CHECK:
        lot = state_before.lots[tx.body.lot_id]
        kind = OutcomeKind.QUALITY_PASS if tx.body.passed else OutcomeKind.QUALITY_FAIL
        return [OutcomeEvent(subject=lot.owner, kind=kind)]

    if tx.kind is TxKind.RESOLVE_DISPUTE:
        dispute = state_before.disputes[tx.body.dispute_id]
        loser = tx.body.ruled_against
        winner = dispute.respondent if loser == dispute.raiser else dispute.raiser
        return [
            OutcomeEvent(subject=loser, kind=OutcomeKind.DISPUTE_LOST),
            OutcomeEvent(subject=winner, kind=OutcomeKind.DISPUTE_WON),
        ]

    return []
