"""Deterministic simulated sensor feeds and reading-to-transaction batching.

Real devices are modeled by pure generators so every scenario replays
bit-identically in CI. The waveform is computed entirely in fixed point:
a quarter-wave sine table (q15 scale, built once with software decimal
arithmetic) plus hash-derived jitter, so no platform's libm can skew a
golden value.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Optional, Sequence

from .codec import enc_u8, enc_u64
from .keys import Keypair
from .transactions import (
    Metric,
    RecordSensorBatch,
    RecordTelemetry,
    SensorReading,
    Transaction,
    Waypoint,
    sign_transaction,
)

QUARTER = 1024  # quarter-wave entries; full wave spans 4 * QUARTER positions
FULL_WAVE = 4 * QUARTER
Q15_ONE = 32768


@lru_cache(maxsize=1)
def _quarter_table() -> tuple[int, ...]:
    """q15 sine samples at pi/2 * i/QUARTER, i = 0..QUARTER inclusive.

    Computed with Decimal Taylor series: exact software arithmetic, so the
    table is identical on every platform without shipping a data file.
    """
    from decimal import Decimal, getcontext

    getcontext().prec = 50
    pi = Decimal("3.14159265358979323846264338327950288419716939937510")
    threshold = Decimal(10) ** -40
    table = []
    for i in range(QUARTER + 1):
        x = pi * i / (2 * QUARTER)
        term = x
        total = Decimal(0)
        k = 0
        while abs(term) > threshold:
            total += term
            k += 1
            term = -term * x * x / ((2 * k) * (2 * k + 1))
        table.append(int(total * Q15_ONE + Decimal("0.5")))
    return tuple(table)


def sin_q15(position: int) -> int:
    """Sine at position/FULL_WAVE of a turn, scaled to [-Q15_ONE, Q15_ONE]."""
    k = position % FULL_WAVE
    q = _quarter_table()
    if k <= QUARTER:
        return q[k]
    if k <= 2 * QUARTER:
        return q[2 * QUARTER - k]
    if k <= 3 * QUARTER:
        return -q[k - 2 * QUARTER]
    return -q[FULL_WAVE - k]


def _jitter(seed: int, metric: Metric, t: int, jitter: int) -> int:
    if jitter <= 0:
        return 0
    raw = hashlib.sha256(enc_u64(seed) + enc_u8(metric) + enc_u64(t)).digest()
    span = 2 * jitter + 1
    return int.from_bytes(raw[:8], "big") % span - jitter


@dataclass(frozen=True)
class MetricProfile:
    base: int  # fixed-point units of the metric
    amplitude: int = 0
    period: int = 3600  # seconds per full wave
    jitter: int = 0  # max absolute deviation, fixed-point units


@dataclass(frozen=True)
class FeedConfig:
    seed: int
    subject: bytes  # lot or shipment id
    device_id: str
    metrics: dict[Metric, MetricProfile] = field(default_factory=dict)
    sample_interval: int = 60
    duration: int = 3600
    start_time: int = 0
    breach_at: Optional[int] = None  # absolute time of a forced temperature spike
    breach_spike: int = 1000  # added above base+amplitude at the forced sample

    def __post_init__(self):
        if self.sample_interval <= 0:
            raise ValueError("sample_interval must be positive")
        if self.duration < self.sample_interval:
            raise ValueError("duration must cover at least one interval")

    def to_json(self) -> dict:
        obj = {
            "seed": self.seed,
            "subject": self.subject.hex(),
            "device_id": self.device_id,
            "sample_interval": self.sample_interval,
            "duration": self.duration,
            "start_time": self.start_time,
            "metrics": {
                m.wire_name: {
                    "base": p.base,
                    "amplitude": p.amplitude,
                    "period": p.period,
                    "jitter": p.jitter,
                }
                for m, p in self.metrics.items()
            },
        }
        if self.breach_at is not None:
            obj["breach_at"] = self.breach_at
            obj["breach_spike"] = self.breach_spike
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "FeedConfig":
        metrics = {}
        for name, p in obj.get("metrics", {}).items():
            metrics[Metric.from_wire(name)] = MetricProfile(
                base=int(p["base"]),
                amplitude=int(p.get("amplitude", 0)),
                period=int(p.get("period", 3600)),
                jitter=int(p.get("jitter", 0)),
            )
        return cls(
            seed=int(obj["seed"]),
            subject=bytes.fromhex(obj["subject"]),
            device_id=str(obj.get("device_id", "sim-0")),
            metrics=metrics,
            sample_interval=int(obj.get("sample_interval", 60)),
            duration=int(obj.get("duration", 3600)),
            start_time=int(obj.get("start_time", 0)),
            breach_at=int(obj["breach_at"]) if "breach_at" in obj else None,
            breach_spike=int(obj.get("breach_spike", 1000)),
        )

    @classmethod
    def load(cls, path: Path) -> "FeedConfig":
        return cls.from_json(json.loads(Path(path).read_text()))


def simulate_sensor_feed(config: FeedConfig) -> list[SensorReading]:
    """Pure function of the config: base + amplitude*sin(2*pi*t/period) + jitter.

    Samples run at t = 0, interval, 2*interval, ... while t < duration, and
    are emitted in (time, metric tag) order. With ``breach_at`` set, the
    first temperature sample at or after that time is pinned to
    base + amplitude + breach_spike, which exceeds any threshold strictly
    below that sum.
    """
    readings: list[SensorReading] = []
    breach_pending = config.breach_at is not None
    for t in range(0, config.duration, config.sample_interval):
        stamp = config.start_time + t
        for metric in sorted(config.metrics):
            profile = config.metrics[metric]
            position = (t % profile.period) * FULL_WAVE // profile.period
            value = (
                profile.base
                + profile.amplitude * sin_q15(position) // Q15_ONE
                + _jitter(config.seed, metric, t, profile.jitter)
            )
            if breach_pending and metric is Metric.TEMPERATURE and stamp >= config.breach_at:
                value = profile.base + profile.amplitude + config.breach_spike
                breach_pending = False
            readings.append(
                SensorReading(
                    subject=config.subject,
                    metric=metric,
                    value=value,
                    time=stamp,
                    device_id=config.device_id,
                )
            )
    return readings


def batch_readings(
    readings: Sequence[SensorReading], max_batch: int, signer: Keypair
) -> list[Transaction]:
    """Partition lot readings, in order, into signed sensor-batch transactions."""
    if max_batch < 1:
        raise ValueError("max_batch must be at least 1")
    txs = []
    for start in range(0, len(readings), max_batch):
        chunk = tuple(readings[start : start + max_batch])
        txs.append(
            sign_transaction(
                RecordSensorBatch(lot_id=chunk[0].subject, readings=chunk), signer
            )
        )
    return txs


def batch_telemetry(
    shipment_id: bytes,
    readings: Sequence[SensorReading],
    waypoints: Sequence[Waypoint],
    max_batch: int,
    signer: Keypair,
) -> list[Transaction]:
    """Partition shipment telemetry into signed transactions.

    Waypoints ride along with the batch whose time window covers them; any
    remainder joins the final batch.
    """
    if max_batch < 1:
        raise ValueError("max_batch must be at least 1")
    txs = []
    waypoints = sorted(waypoints, key=lambda w: w.time)
    wp_index = 0
    for start in range(0, len(readings), max_batch):
        chunk = tuple(readings[start : start + max_batch])
        last = start + max_batch >= len(readings)
        if last:
            batch_wps = tuple(waypoints[wp_index:])
            wp_index = len(waypoints)
        else:
            cutoff = chunk[-1].time
            end = wp_index
            while end < len(waypoints) and waypoints[end].time <= cutoff:
                end += 1
            batch_wps = tuple(waypoints[wp_index:end])
            wp_index = end
        txs.append(
            sign_transaction(
                RecordTelemetry(shipment_id=shipment_id, waypoints=batch_wps, readings=chunk),
                signer,
            )
        )
    return txs
