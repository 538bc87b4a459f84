"""Trace-level invariant verification and independent flood oracles.

These functions re-derive protocol behavior from raw trace records (and,
for the oracles, from nothing but the scenario geometry), so they catch
bugs in the simulation machinery rather than trusting it. Each checker
returns a list of violation descriptions; empty means the invariant held.

Checkers that need receive or timer records require a full-level trace.
"""

from __future__ import annotations

import heapq
import math

from .config import ScenarioConfig


def _tx_by_uid(records):
    return {r["i"]: r for r in records if r["k"] == "tx"}


def check_energy_gate(records, threshold: float) -> list[str]:
    """No transmission may originate from a node below the energy gate."""
    bad = []
    for r in records:
        if r["k"] == "tx" and r["e"] < threshold:
            bad.append(f"tx by node {r['n']} at t={r['t']} with residual {r['e']:.4f}")
    return bad


def check_zone_soundness(records) -> list[str]:
    """Every contention timer holder must appear in the front-relative
    list of the request that triggered it."""
    tx = _tx_by_uid(records)
    bad = []
    for r in records:
        if r["k"] != "ts":
            continue
        parent = tx.get(r["i"])
        if parent is None:
            bad.append(f"ts at t={r['t']} references unknown tx {r['i']}")
        elif r["n"] not in parent.get("fr", []):
            bad.append(
                f"node {r['n']} contended for tx {r['i']} without being a front relative"
            )
    return bad


def check_suppression(records) -> list[str]:
    """Among contenders that heard the same request, nobody may fire after
    cleanly receiving a peer's rebroadcast of the same discovery."""
    fires = {}  # (node, key) -> fire time
    for r in records:
        if r["k"] == "tf":
            fires[(r["n"], r["key"])] = r["t"]
    rebroadcast_uid = {}  # uid -> (node, key)
    for r in records:
        if r["k"] == "tx" and r["m"] == "rlrq" and "key" in r:
            rebroadcast_uid[r["i"]] = (r["n"], r["key"])
    bad = []
    for r in records:
        if r["k"] != "rx" or r["m"] != "rlrq" or r["o"] != "ok":
            continue
        sender_info = rebroadcast_uid.get(r["i"])
        if sender_info is None:
            continue
        _, key = sender_info
        fire_t = fires.get((r["n"], key))
        if fire_t is not None and fire_t > r["t"] + 1e-12:
            bad.append(
                f"node {r['n']} fired for {key} at {fire_t} after hearing a "
                f"rebroadcast at {r['t']}"
            )
    return bad


def check_metric_ranges(records, alpha: float, beta: float) -> list[str]:
    bad = []
    hi = alpha * 2.0 + beta * 1.0
    for r in records:
        if r["k"] != "ts":
            continue
        if not 0.0 <= r["gd"] <= 2.0 + 1e-12:
            bad.append(f"gd out of range: {r['gd']} at t={r['t']}")
        if not 0.0 <= r["vrl"] <= 1.0 + 1e-12:
            bad.append(f"vrl out of range: {r['vrl']} at t={r['t']}")
        if not 0.0 <= r["metric"] <= hi + 1e-12:
            bad.append(f"composite out of range: {r['metric']} at t={r['t']}")
    return bad


def check_contention_order(records, cfg: ScenarioConfig, dest_pos) -> list[str]:
    """Recompute every contender's metric from the raw positions in the
    trace and confirm (a) the recorded values, (b) that the first firing
    contender per request held the minimal metric up to jitter."""
    bad = []
    by_parent: dict[int, list[dict]] = {}
    for r in records:
        if r["k"] == "ts":
            by_parent.setdefault(r["i"], []).append(r)
    fires = {(r["n"], r["key"]): r["t"] for r in records if r["k"] == "tf"}
    jitter_tol = (cfg.node_count + 1) * cfg.contention_jitter_unit / max(cfg.contention_slot, 1e-12)
    for parent_uid, contenders in by_parent.items():
        for c in contenders:
            dp = math.hypot(c["px"] - dest_pos[0], c["py"] - dest_pos[1])
            dn = math.hypot(c["x"] - dest_pos[0], c["y"] - dest_pos[1])
            gd = abs(1.0 - (dp - dn) / cfg.max_range)
            vrl = (
                abs(c["pspd"] - c["spd"]) / cfg.speed_max if cfg.speed_max > 0 else 0.0
            )
            metric = cfg.alpha * gd + cfg.beta * vrl
            if abs(metric - c["metric"]) > 1e-9:
                bad.append(
                    f"recorded metric {c['metric']} != recomputed {metric} "
                    f"for node {c['n']} (tx {parent_uid})"
                )
            delay = cfg.contention_slot * metric + cfg.contention_jitter_unit * (c["n"] + 1)
            if abs((c["fire"] - c["t"]) - delay) > 1e-9:
                bad.append(f"delay mismatch for node {c['n']} (tx {parent_uid})")
        fired = [c for c in contenders if (c["n"], c["key"]) in fires]
        if not fired:
            continue
        winner = min(fired, key=lambda c: fires[(c["n"], c["key"])])
        best = min(contenders, key=lambda c: (c["metric"], c["n"]))
        if winner["metric"] > best["metric"] + jitter_tol:
            bad.append(
                f"winner {winner['n']} (metric {winner['metric']}) beat "
                f"{best['n']} (metric {best['metric']}) for tx {parent_uid}"
            )
    return bad


def _airtime_s(cfg: ScenarioConfig, msg_type: str, wire_bytes: int) -> float:
    rate = cfg.data_rate_bps if msg_type == "data" else cfg.basic_rate_bps
    return cfg.phy_preamble_us * 1e-6 + wire_bytes * 8 / rate


def _airtime_bits(cfg: ScenarioConfig, msg_type: str, wire_bytes: int) -> float:
    return _airtime_s(cfg, msg_type, wire_bytes) * cfg.basic_rate_bps


def check_causality(records, cfg: ScenarioConfig) -> list[str]:
    """No reception may complete before its transmission finished."""
    tx = _tx_by_uid(records)
    bad = []
    for r in records:
        if r["k"] != "rx":
            continue
        parent = tx.get(r["i"])
        if parent is None:
            bad.append(f"rx references unknown tx {r['i']}")
            continue
        duration = _airtime_s(cfg, parent["m"], parent["b"])
        if r["t"] < parent["t"] + duration - 1e-9:
            bad.append(f"rx of tx {r['i']} at {r['t']} precedes tx end")
    return bad


def check_conservation(records, cfg: ScenarioConfig, tol: float = 1e-6) -> list[str]:
    """Replaying every debit in the trace must reproduce each node's final
    residual. Needs a full trace (receive records carry the rx debits)."""
    init = {r["n"]: r["e"] for r in records if r["k"] == "init"}
    final = {r["n"]: r["e"] for r in records if r["k"] == "fe"}
    t_end = max((r["t"] for r in records if r["k"] == "fe"), default=0.0)
    bad = []
    for nid, e0 in init.items():
        e = e0
        t_last = 0.0
        dead = False
        for r in records:
            if r.get("n") != nid or r["k"] not in ("tx", "rx", "death"):
                continue
            if dead:
                break
            idle = cfg.idle_drain_watts * (r["t"] - t_last)
            e = max(0.0, e - idle)
            t_last = r["t"]
            if r["k"] == "tx":
                e = max(0.0, e - _airtime_bits(cfg, r["m"], r["b"]) * cfg.tx_cost_per_bit)
            elif r["k"] == "rx":
                e = max(0.0, e - _airtime_bits(cfg, r["m"], r["b"]) * cfg.rx_cost_per_bit)
            elif r["k"] == "death":
                e = 0.0
                dead = True
        if not dead:
            e = max(0.0, e - cfg.idle_drain_watts * (t_end - t_last))
        if abs(e - final.get(nid, -1.0)) > tol:
            bad.append(f"node {nid}: replayed {e:.9f} != recorded {final.get(nid)}")
    return bad


# ----------------------------------------------------------------------
# independent flood oracles (static topologies)

def _dist(a, b) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def aodv_flood_expectation(positions, energies, range_m: float, source: int = 0) -> int:
    """Expected RREQ transmissions for one AODV discovery on a static
    topology: every alive node reachable from the source transmits exactly
    once (the destination included)."""
    alive = {i for i, e in enumerate(energies) if e > 0}
    return len(_reachable(source, positions, alive, range_m))


def _reachable(start, positions, eligible, range_m):
    seen = {start}
    frontier = [start]
    while frontier:
        cur = frontier.pop()
        for j in eligible:
            if j not in seen and _dist(positions[cur], positions[j]) <= range_m:
                seen.add(j)
                frontier.append(j)
    return seen & eligible


def rlpr_flood_expectation(
    positions,
    energies,
    source: int,
    dest: int,
    cfg: ScenarioConfig,
) -> int:
    """Replay the zone-restricted contention cascade for one discovery on
    a static topology, from geometry alone; returns total request
    transmissions (the source's original plus every winner rebroadcast).

    Assumes no collisions, which holds when contender timer gaps exceed
    the channel's sub-millisecond jitter; acceptance scenarios are chosen
    accordingly.
    """
    n = len(positions)
    dest_pos = positions[dest]
    range_m = cfg.max_range
    gate = cfg.energy_threshold

    def in_range(i):
        return [
            j
            for j in range(n)
            if j != i and _dist(positions[i], positions[j]) <= range_m
        ]

    def angle_at(i, j) -> float:
        ux, uy = dest_pos[0] - positions[i][0], dest_pos[1] - positions[i][1]
        vx, vy = positions[j][0] - positions[i][0], positions[j][1] - positions[i][1]
        nu, nv = math.hypot(ux, uy), math.hypot(vx, vy)
        if nu == 0 or nv == 0:
            return 180.0
        cosang = max(-1.0, min(1.0, (ux * vx + uy * vy) / (nu * nv)))
        return math.degrees(math.acos(cosang))

    def front_relatives(i):
        return {
            j
            for j in in_range(i)
            if energies[j] >= gate and angle_at(i, j) <= cfg.zone_half_angle_deg
        }

    seen = {source}
    transmissions = 0
    pending: dict[int, float] = {}
    heap: list = []
    counter = 0

    def broadcast(node, t):
        nonlocal transmissions, counter
        transmissions += 1
        fr = front_relatives(node)
        for r in in_range(node):
            if r in pending:
                del pending[r]  # overheard a duplicate: timer cancelled
            if r in seen:
                continue
            seen.add(r)
            if r == dest:
                continue  # replies instead of rebroadcasting
            if r not in fr or energies[r] < gate:
                continue
            dp = _dist(positions[node], dest_pos)
            dn = _dist(positions[r], dest_pos)
            gd = abs(1.0 - (dp - dn) / range_m)
            metric = cfg.alpha * gd  # static topology: relative speed is 0
            fire = t + cfg.contention_slot * metric + cfg.contention_jitter_unit * (r + 1)
            pending[r] = fire
            counter += 1
            heapq.heappush(heap, (fire, counter, r))

    broadcast(source, 0.0)
    while heap:
        fire, _, node = heapq.heappop(heap)
        if pending.get(node) != fire:
            continue
        del pending[node]
        broadcast(node, fire)
    return transmissions
