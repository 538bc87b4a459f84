"""RARP-lite baseline: predictive route selection, simplified.

Requests flood like AODV, but each relay appends itself to the carried
path and folds in the expected connection time of the link it was
received over (how long the two nodes stay within range if velocities
persist). The destination buffers every arriving offer for a short
window, then replies once along the path with the best utility:
normalized worst-link connection time minus a hop-count penalty.

The original protocol's directional-antenna data plane and terrain risk
model are out of scope; route stability plus the single reply per
discovery are what this baseline contributes to comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .messages import RREP, RREQ, RarpRrep, RarpRreq
from .protocol_base import BaseProtocol, RouteEntry, SeenCache


def expected_connection_time(
    pos_a, vel_a, pos_b, vel_b, range_m: float
) -> float:
    """Seconds until two nodes drift beyond ``range_m`` with constant
    velocities; inf if they never separate. Root of |d + v t| = range."""
    dx = pos_b[0] - pos_a[0]
    dy = pos_b[1] - pos_a[1]
    vx = vel_b[0] - vel_a[0]
    vy = vel_b[1] - vel_a[1]
    v2 = vx * vx + vy * vy
    d2 = dx * dx + dy * dy
    if v2 <= 1e-12:
        return math.inf if d2 <= range_m * range_m else 0.0
    b = dx * vx + dy * vy
    c = d2 - range_m * range_m
    disc = b * b - v2 * c
    if disc < 0:
        disc = 0.0
    return max(0.0, (-b + math.sqrt(disc)) / v2)


@dataclass
class RouteOffer:
    min_link_time: float
    path: list[int]

    @property
    def hops(self) -> int:
        return len(self.path) - 1


def offer_utility(offer: RouteOffer, ect_cap: float, w_ect: float, w_hop: float, hop_cap: float) -> float:
    stability = min(offer.min_link_time, ect_cap) / ect_cap
    return w_ect * stability - w_hop * offer.hops / hop_cap


class RarpLiteProtocol(BaseProtocol):
    name = "rarp_lite"

    def __init__(self, api):
        super().__init__(api)
        self.table: dict[int, RouteEntry] = {}
        self.seen = SeenCache()
        self.offer_buffer: dict[tuple, list[RouteOffer]] = {}
        self.closed_windows = SeenCache()

    # ------------------------------------------------------------------

    def route_next_hop(self, dest: int, now: float) -> int | None:
        entry = self.table.get(dest)
        return entry.next_hop if entry is not None else None

    def begin_discovery(self, dest: int, broadcast_id: int, now: float) -> None:
        pos = self.api.pos()
        vel = self.api.velocity()
        msg = RarpRreq(
            source_id=self.nid,
            dest_id=dest,
            broadcast_id=broadcast_id,
            hop_count=0,
            prev_x=pos[0],
            prev_y=pos[1],
            prev_vx=vel[0],
            prev_vy=vel[1],
            min_link_time=math.inf,
            path=[self.nid],
        )
        self.seen.add(msg.discovery_key)
        self.api.send_broadcast(msg)

    def on_control(self, frame, rssi: float, now: float) -> None:
        msg = frame.msg
        if msg.msg_type == RREQ:
            self._on_rreq(frame, now)
        elif msg.msg_type == RREP:
            self._on_rrep(frame, now)

    def _link_time_from_prev(self, msg: RarpRreq) -> float:
        return expected_connection_time(
            (msg.prev_x, msg.prev_y),
            (msg.prev_vx, msg.prev_vy),
            self.api.pos(),
            self.api.velocity(),
            self.cfg.max_range,
        )

    def _on_rreq(self, frame, now: float) -> None:
        msg: RarpRreq = frame.msg
        key = msg.discovery_key
        if msg.dest_id == self.nid:
            self._collect_offer(msg, now)
            # fall through: the destination also floods once, like any
            # other first-time receiver
        if key in self.seen:
            self.api.trace({"t": now, "k": "drop", "n": self.nid, "m": RREQ, "w": "duplicate"})
            return
        self.seen.add(key)
        pos = self.api.pos()
        vel = self.api.velocity()
        self.api.send_broadcast(
            RarpRreq(
                source_id=msg.source_id,
                dest_id=msg.dest_id,
                broadcast_id=msg.broadcast_id,
                hop_count=msg.hop_count + 1,
                prev_x=pos[0],
                prev_y=pos[1],
                prev_vx=vel[0],
                prev_vy=vel[1],
                min_link_time=min(msg.min_link_time, self._link_time_from_prev(msg)),
                path=msg.path + [self.nid],
            )
        )

    def _collect_offer(self, msg: RarpRreq, now: float) -> None:
        key = msg.discovery_key
        if key in self.closed_windows:
            self.api.trace({"t": now, "k": "drop", "n": self.nid, "m": RREQ, "w": "window_closed"})
            return
        offer = RouteOffer(
            min_link_time=min(msg.min_link_time, self._link_time_from_prev(msg)),
            path=msg.path + [self.nid],
        )
        offers = self.offer_buffer.setdefault(key, [])
        offers.append(offer)
        if len(offers) == 1:
            self.api.set_timer(("rarpwin",) + key, now + self.cfg.rarp_reply_window, key)

    def _reply_window_closed(self, key: tuple, now: float) -> None:
        offers = self.offer_buffer.pop(key, [])
        self.closed_windows.add(key)
        if not offers:
            return
        cfg = self.cfg
        best = max(
            offers,
            key=lambda o: (
                offer_utility(o, cfg.rarp_ect_cap, cfg.rarp_weight_ect, cfg.rarp_weight_hop, cfg.rarp_hop_cap),
                -o.hops,
                o.path,
            ),
        )
        hop_index = len(best.path) - 2
        reply = RarpRrep(
            source_id=key[0],
            dest_id=key[1],
            broadcast_id=key[2],
            hop_index=hop_index,
            path=best.path,
        )
        self.api.send_unicast(reply, best.path[hop_index])

    def _on_rrep(self, frame, now: float) -> None:
        msg: RarpRrep = frame.msg
        idx = msg.hop_index
        if idx < 0 or idx >= len(msg.path) or msg.path[idx] != self.nid:
            self.anomalies += 1
            self.api.trace({"t": now, "k": "drop", "n": self.nid, "m": RREP, "w": "path_mismatch"})
            return
        self.table[msg.dest_id] = RouteEntry(next_hop=frame.sender)
        if idx == 0:
            if msg.source_id == self.nid:
                self.discovery_succeeded(msg.dest_id, now)
            return
        self.api.send_unicast(
            RarpRrep(
                source_id=msg.source_id,
                dest_id=msg.dest_id,
                broadcast_id=msg.broadcast_id,
                hop_index=idx - 1,
                path=msg.path,
            ),
            msg.path[idx - 1],
        )

    def on_timer(self, key, payload, now: float) -> None:
        if isinstance(key, tuple) and key[0] == "rarpwin":
            self._reply_window_closed(key[1:], now)
        else:
            super().on_timer(key, payload, now)

    # ------------------------------------------------------------------

    def invalidate_next_hop(self, next_hop: int, now: float) -> None:
        for dest in [d for d, e in self.table.items() if e.next_hop == next_hop]:
            del self.table[dest]

    def invalidate_route(self, dest: int, now: float) -> None:
        self.table.pop(dest, None)
