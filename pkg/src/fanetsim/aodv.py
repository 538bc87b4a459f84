"""Simplified AODV baseline.

Route requests flood: every first-time receiver rebroadcasts exactly once
(the destination included), duplicates are dropped, and the destination
unicasts a reply to the first arrival, which travels the reverse routes
the flood installed. Routes carry a lifetime refreshed on use and
invalidate on link failure. Hop count is the only route metric, per the
protocol's textbook behavior; intermediate nodes never answer from cache
so a discovery always reaches the destination.
"""

from __future__ import annotations

from .messages import RREP, RREQ, AodvRrep, AodvRreq
from .protocol_base import BaseProtocol, RouteEntry, SeenCache


class AodvProtocol(BaseProtocol):
    name = "aodv"

    def __init__(self, api):
        super().__init__(api)
        self.table: dict[int, RouteEntry] = {}
        self.seen = SeenCache()
        self.seq = 0

    # ------------------------------------------------------------------

    def on_neighbor_lost(self, nid: int, now: float) -> None:
        # hello-loss link monitoring: routes through a silent neighbor are
        # assumed broken
        self.invalidate_next_hop(nid, now)

    def route_next_hop(self, dest: int, now: float) -> int | None:
        entry = self.table.get(dest)
        if entry is None:
            return None
        if entry.expires <= now:
            del self.table[dest]
            return None
        entry.expires = now + self.cfg.aodv_route_timeout  # refresh on use
        return entry.next_hop

    def begin_discovery(self, dest: int, broadcast_id: int, now: float) -> None:
        self.seq += 1
        msg = AodvRreq(
            source_id=self.nid,
            dest_id=dest,
            broadcast_id=broadcast_id,
            hop_count=0,
            source_seq=self.seq,
        )
        self.seen.add(msg.discovery_key)
        self.api.send_broadcast(msg)

    def on_control(self, frame, rssi: float, now: float) -> None:
        msg = frame.msg
        if msg.msg_type == RREQ:
            self._on_rreq(frame, now)
        elif msg.msg_type == RREP:
            self._on_rrep(frame, now)

    def _on_rreq(self, frame, now: float) -> None:
        msg: AodvRreq = frame.msg
        key = msg.discovery_key
        if key in self.seen:
            self.api.trace({"t": now, "k": "drop", "n": self.nid, "m": RREQ, "w": "duplicate"})
            return
        self.seen.add(key)
        # reverse route toward the request source
        self.table[msg.source_id] = RouteEntry(
            next_hop=frame.sender,
            hops=msg.hop_count + 1,
            seq=msg.source_seq,
            expires=now + self.cfg.aodv_route_timeout,
        )
        if msg.dest_id == self.nid:
            self.seq += 1
            reply = AodvRrep(
                source_id=msg.source_id,
                dest_id=msg.dest_id,
                broadcast_id=msg.broadcast_id,
                hop_count=0,
                dest_seq=self.seq,
            )
            self.api.send_unicast(reply, frame.sender)
        self.api.send_broadcast(
            AodvRreq(
                source_id=msg.source_id,
                dest_id=msg.dest_id,
                broadcast_id=msg.broadcast_id,
                hop_count=msg.hop_count + 1,
                source_seq=msg.source_seq,
            )
        )

    def _on_rrep(self, frame, now: float) -> None:
        msg: AodvRrep = frame.msg
        # forward route toward the destination
        self.table[msg.dest_id] = RouteEntry(
            next_hop=frame.sender,
            hops=msg.hop_count + 1,
            seq=msg.dest_seq,
            expires=now + self.cfg.aodv_route_timeout,
        )
        if msg.source_id == self.nid:
            self.discovery_succeeded(msg.dest_id, now)
            return
        back = self.table.get(msg.source_id)
        if back is None or back.expires <= now:
            self.anomalies += 1
            self.api.trace({"t": now, "k": "drop", "n": self.nid, "m": RREP, "w": "no_reverse_entry"})
            return
        self.api.send_unicast(
            AodvRrep(
                source_id=msg.source_id,
                dest_id=msg.dest_id,
                broadcast_id=msg.broadcast_id,
                hop_count=msg.hop_count + 1,
                dest_seq=msg.dest_seq,
            ),
            back.next_hop,
        )

    # ------------------------------------------------------------------

    def invalidate_next_hop(self, next_hop: int, now: float) -> None:
        for dest in [d for d, e in self.table.items() if e.next_hop == next_hop]:
            del self.table[dest]

    def invalidate_route(self, dest: int, now: float) -> None:
        self.table.pop(dest, None)

    def _failure_backoff(self, st) -> float:
        # immediate re-flood for the standard retry budget, then back off
        if st.failures <= self.cfg.aodv_rreq_retries:
            return 0.0
        return super()._failure_backoff(st)
