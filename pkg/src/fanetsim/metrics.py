"""Metric extraction and cross-seed aggregation.

Every metric is a pure function of the persisted trace: recomputing from
the file reproduces the ledger exactly. Three headline metrics mirror the
evaluation: control overhead (transmission counts, with and without the
periodic beacons, zoom-outs split out), network lifetime (time of the
first battery death, or the run length if none), and search success rate
(discovery control messages per second of successful discovery time).
Discovery failures are reported separately and never enter the rate.
"""

from __future__ import annotations

import json
import math
import statistics
from dataclasses import dataclass, field
from pathlib import Path

from .messages import CONTROL_TYPES, HELLO

DISCOVERY_TYPES = ("rlrq", "rlrp", "rreq", "rrep")

METRIC_NAMES = (
    "control_total",
    "control_discovery",
    "control_hello",
    "control_zoom_out",
    "control_bytes_total",
    "network_lifetime",
    "search_success_rate",
    "discovery_failures",
    "data_delivered",
)


@dataclass
class MetricLedger:
    t_end: float
    control_counts: dict = field(default_factory=dict)
    control_bytes: dict = field(default_factory=dict)
    zoom_out_count: int = 0
    first_death: float | None = None
    discoveries_started: int = 0
    discoveries_succeeded: int = 0
    discoveries_failed: int = 0
    success_messages: int = 0
    success_duration: float = 0.0
    data_delivered: int = 0
    data_tx: int = 0
    buffer_drops: int = 0
    msg_size_totals: dict = field(default_factory=dict)

    @property
    def control_total(self) -> int:
        return sum(self.control_counts.values())

    @property
    def control_discovery(self) -> int:
        return sum(self.control_counts.get(t, 0) for t in DISCOVERY_TYPES)

    @property
    def hello_count(self) -> int:
        return self.control_counts.get(HELLO, 0)

    @property
    def network_lifetime(self) -> float:
        return self.first_death if self.first_death is not None else self.t_end

    @property
    def search_success_rate(self) -> float | None:
        if self.discoveries_succeeded == 0 or self.success_duration <= 0:
            return None
        return self.success_messages / self.success_duration

    def metric_value(self, name: str):
        return {
            "control_total": self.control_total,
            "control_discovery": self.control_discovery,
            "control_hello": self.hello_count,
            "control_zoom_out": self.zoom_out_count,
            "control_bytes_total": sum(self.control_bytes.values()),
            "network_lifetime": self.network_lifetime,
            "search_success_rate": self.search_success_rate,
            "discovery_failures": self.discoveries_failed,
            "data_delivered": self.data_delivered,
        }[name]

    def to_dict(self) -> dict:
        sizes = {
            m: (self.msg_size_totals[m] / self.control_counts[m])
            for m in self.control_counts
            if self.control_counts.get(m)
        }
        return {
            "t_end": self.t_end,
            "control": {**self.control_counts, "total": self.control_total},
            "control_bytes": dict(self.control_bytes),
            "avg_message_bytes": sizes,
            "zoom_out_count": self.zoom_out_count,
            "first_death": self.first_death,
            "network_lifetime": self.network_lifetime,
            "discoveries": {
                "started": self.discoveries_started,
                "succeeded": self.discoveries_succeeded,
                "failed": self.discoveries_failed,
                "success_messages": self.success_messages,
                "success_duration": self.success_duration,
                "search_success_rate": self.search_success_rate,
            },
            "data_delivered": self.data_delivered,
            "data_tx": self.data_tx,
            "buffer_drops": self.buffer_drops,
        }


def compute_ledger(records: list[dict], t_end: float | None = None) -> MetricLedger:
    if t_end is None:
        t_end = max((r["t"] for r in records if r["k"] == "fe"), default=0.0)
    ledger = MetricLedger(t_end=t_end)
    per_key_txs: dict[str, list] = {}
    disc_start: dict[str, float] = {}
    for rec in records:
        kind = rec["k"]
        if kind == "tx":
            m = rec["m"]
            if m in CONTROL_TYPES:
                ledger.control_counts[m] = ledger.control_counts.get(m, 0) + 1
                ledger.control_bytes[m] = ledger.control_bytes.get(m, 0) + rec["b"]
                ledger.msg_size_totals[m] = ledger.msg_size_totals.get(m, 0) + rec["b"]
                if rec.get("zo"):
                    ledger.zoom_out_count += 1
                if m in DISCOVERY_TYPES and "key" in rec:
                    per_key_txs.setdefault(rec["key"], []).append(rec["t"])
            elif m == "data":
                ledger.data_tx += 1
        elif kind == "death":
            if ledger.first_death is None or rec["t"] < ledger.first_death:
                ledger.first_death = rec["t"]
        elif kind == "ds":
            ledger.discoveries_started += 1
            disc_start[rec["key"]] = rec["t"]
        elif kind == "de":
            if rec["ok"]:
                ledger.discoveries_succeeded += 1
                start = disc_start.get(rec["key"])
                if start is not None:
                    ledger.success_duration += rec["t"] - start
            else:
                ledger.discoveries_failed += 1
        elif kind == "del":
            ledger.data_delivered += 1
        elif kind == "bdrop":
            ledger.buffer_drops += 1
    # messages attributable to a successful discovery: transmissions of its
    # key within the search window (start to reply); the wave remnants that
    # land after the route is known are overhead, not search effort
    for rec in records:
        if rec["k"] == "de" and rec["ok"]:
            start = disc_start.get(rec["key"])
            if start is None:
                continue
            ledger.success_messages += sum(
                1 for t in per_key_txs.get(rec["key"], ()) if start <= t <= rec["t"]
            )
    return ledger


def control_overhead(records: list[dict]) -> int:
    return compute_ledger(records).control_total


def network_lifetime(records: list[dict], t_end: float | None = None) -> float:
    return compute_ledger(records, t_end=t_end).network_lifetime


def search_success_rate(records: list[dict]) -> float | None:
    return compute_ledger(records).search_success_rate


# ----------------------------------------------------------------------
# cross-seed aggregation

def t_critical(dof: int, confidence: float = 0.95) -> float:
    from scipy.stats import t

    return float(t.ppf(0.5 + confidence / 2.0, dof))


@dataclass
class Summary:
    n: int
    mean: float | None
    minimum: float | None
    maximum: float | None
    ci_lo: float | None
    ci_hi: float | None


def summarize(values: list[float], confidence: float = 0.95) -> Summary:
    vals = [v for v in values if v is not None]
    if not vals:
        return Summary(0, None, None, None, None, None)
    mean = statistics.fmean(vals)
    if len(vals) < 2:
        return Summary(1, mean, min(vals), max(vals), None, None)
    sd = statistics.stdev(vals)
    half = t_critical(len(vals) - 1, confidence) * sd / math.sqrt(len(vals))
    return Summary(len(vals), mean, min(vals), max(vals), mean - half, mean + half)


@dataclass
class RunResult:
    protocol: str
    axis_value: float
    seed: int
    ledger: MetricLedger


def aggregate(results: list[RunResult]) -> list[dict]:
    """Per (metric, protocol, axis value) summary rows, deterministic order."""
    protocols = sorted({r.protocol for r in results})
    values_by_proto = {
        p: sorted({r.axis_value for r in results if r.protocol == p}) for p in protocols
    }
    axis_sets = {tuple(v) for v in values_by_proto.values()}
    if len(axis_sets) > 1:
        raise ValueError(f"sweep axes differ across protocols: {values_by_proto}")
    rows = []
    for metric in METRIC_NAMES:
        for protocol in protocols:
            for value in values_by_proto[protocol]:
                samples = [
                    r.ledger.metric_value(metric)
                    for r in results
                    if r.protocol == protocol and r.axis_value == value
                ]
                s = summarize(samples)
                rows.append(
                    {
                        "metric": metric,
                        "protocol": protocol,
                        "axis_value": value,
                        "n": s.n,
                        "mean": s.mean,
                        "min": s.minimum,
                        "max": s.maximum,
                        "ci95_lo": s.ci_lo,
                        "ci95_hi": s.ci_hi,
                    }
                )
    return rows


def write_ledger(ledger: MetricLedger, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(ledger.to_dict(), indent=2, sort_keys=True) + "\n")
