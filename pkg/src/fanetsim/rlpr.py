"""RLPR: reliable link-adaptive position-based routing.

Relay eligibility is positional: each node tracks which 1-hop neighbors
sit inside its forwarding zone (within the configured half-angle of the
destination direction) with energy at or above the participation
threshold; those are its front relatives, and only they may rebroadcast
its route requests. Receivers of a request rank themselves with a
composite of geographic progress and relative speed, delay their
rebroadcast proportionally, and cancel when they overhear a peer handle
the same request first. Replies unicast back along the reverse entries
the winning requests left behind. Link-layer changes (lost front
relatives, failed data unicasts) trigger an out-of-cycle zoom-out beacon.
"""

from __future__ import annotations

from dataclasses import dataclass

from .forwarding import (
    composite_metric,
    contention_delay,
    geographic_distance_metric,
    in_forwarding_zone,
    relative_speed_metric,
)
from .geometry import DegenerateGeometryError, distance, forwarding_angle
from .messages import RLRP, RLRQ, HelloMessage, RlrpMessage, RlrqMessage
from .protocol_base import BaseProtocol, RouteEntry, SeenCache
from .trace import key_str


@dataclass
class ContentionTimer:
    fire_time: float
    discovery_key: tuple
    cached_rlrq: RlrqMessage


class RlprProtocol(BaseProtocol):
    name = "rlpr"
    energy_gated = True

    def __init__(self, api):
        super().__init__(api)
        self.front_relatives: set[int] = set()
        self.reverse: dict[tuple, int] = {}  # discovery key -> predecessor
        self.forward: dict[int, RouteEntry] = {}  # dest -> next hop entry
        self.seen = SeenCache()
        self.pending_contention: dict[tuple, ContentionTimer] = {}
        self.last_zoom_out = -float("inf")

    # ------------------------------------------------------------------
    # beaconing and table maintenance

    def on_hello(self, msg: HelloMessage, rssi: float, now: float) -> None:
        self.upsert_neighbor(msg, now)
        self._update_front_relative(msg, now)

    def _update_front_relative(self, msg: HelloMessage, now: float) -> None:
        try:
            angle = forwarding_angle(self.api.pos(), (msg.x, msg.y), self.api.dest_pos)
        except DegenerateGeometryError:
            self.front_relatives.discard(msg.sender_id)
            return
        eligible = in_forwarding_zone(
            angle,
            msg.residual_energy,
            self.cfg.energy_threshold,
            self.cfg.zone_half_angle_deg,
        )
        if eligible:
            self.front_relatives.add(msg.sender_id)
        else:
            self.front_relatives.discard(msg.sender_id)

    def on_neighbor_lost(self, nid: int, now: float) -> None:
        was_front = nid in self.front_relatives
        self.front_relatives.discard(nid)
        self.invalidate_next_hop(nid, now)
        if was_front and self._forwarding_active():
            self.trigger_zoom_out(now)

    def _usable_next_hop(self, nid: int, now: float) -> bool:
        """A forward entry is only as good as its link: the next hop must
        still be beaconing and above the participation threshold."""
        rec = self.neighbors.get(nid)
        return (
            rec is not None
            and now - rec.last_heard <= self.cfg.staleness_horizon
            and rec.energy >= self.cfg.energy_threshold
        )

    def _forwarding_active(self) -> bool:
        """Zoom-outs repair links used for data; idle nodes whose
        neighborhood merely churns stay quiet."""
        return (
            bool(self.forward)
            or any(self.buffers.values())
            or any(st.pending for st in self.discovery.values())
        )

    def trigger_zoom_out(self, now: float) -> None:
        """Out-of-cycle beacon on a detected link-layer change. Rate
        limited so neighbor churn cannot flood the channel; the periodic
        schedule is untouched."""
        if now - self.last_zoom_out < self.cfg.zoom_out_min_gap:
            return
        if not self.above_energy_gate():
            return
        self.last_zoom_out = now
        self.api.send_broadcast(self.make_hello(now, zoom_out=True))

    # ------------------------------------------------------------------
    # route discovery

    def route_next_hop(self, dest: int, now: float) -> int | None:
        """Data-plane next hop: a destination inside communication range is
        reached directly; otherwise use the discovered forward entry."""
        if dest == self.api.dest_id and distance(self.api.pos(), self.api.dest_pos) <= self.cfg.max_range:
            return dest
        return self._table_next_hop(dest, now)

    def _table_next_hop(self, dest: int, now: float) -> int | None:
        entry = self.forward.get(dest)
        if entry is None:
            return None
        if not self._usable_next_hop(entry.next_hop, now):
            del self.forward[dest]
            return None
        return entry.next_hop

    def begin_discovery(self, dest: int, broadcast_id: int, now: float) -> None:
        pos = self.api.pos()
        msg = RlrqMessage(
            source_id=self.nid,
            dest_id=dest,
            broadcast_id=broadcast_id,
            prev_hop_id=self.nid,
            prev_hop_x=pos[0],
            prev_hop_y=pos[1],
            prev_hop_speed=self.api.speed(),
            hop_count=0,
            front_relatives=sorted(self.front_relatives),
        )
        self.seen.add(msg.discovery_key)
        self.api.send_broadcast(msg)

    def on_control(self, frame, rssi: float, now: float) -> None:
        msg = frame.msg
        if msg.msg_type == RLRQ:
            self._on_rlrq(frame, rssi, now)
        elif msg.msg_type == RLRP:
            self._on_rlrp(frame, now)

    def _drop(self, now: float, msg_type: str, why: str) -> None:
        self.api.trace({"t": now, "k": "drop", "n": self.nid, "m": msg_type, "w": why})

    def _on_rlrq(self, frame, rssi: float, now: float) -> None:
        msg: RlrqMessage = frame.msg
        key = msg.discovery_key
        if key in self.seen:
            pending = self.pending_contention.pop(key, None)
            if pending is not None:
                self.api.cancel_timer(("cont",) + key)
                self.api.trace({"t": now, "k": "tc", "n": self.nid, "key": key_str(key)})
            self._drop(now, RLRQ, "duplicate")
            return
        self.seen.add(key)

        has_route = (
            msg.dest_id == self.nid or self._table_next_hop(msg.dest_id, now) is not None
        )
        if has_route and self.may_transmit():
            self.reverse[key] = frame.sender
            reply = RlrpMessage(
                source_id=msg.source_id,
                dest_id=msg.dest_id,
                broadcast_id=msg.broadcast_id,
                next_hop_id=frame.sender,
            )
            self.api.send_unicast(reply, frame.sender)
            return

        if self.nid not in msg.front_relatives:
            self._drop(now, RLRQ, "not_front_relative")
            return
        if not self.above_energy_gate():
            self._drop(now, RLRQ, "energy_gate")
            return
        if rssi < self.cfg.signal_threshold_dbm:
            self._drop(now, RLRQ, "weak_signal")
            return

        pos = self.api.pos()
        prev_pos = (msg.prev_hop_x, msg.prev_hop_y)
        dp = distance(prev_pos, self.api.dest_pos)
        dn = distance(pos, self.api.dest_pos)
        gd = geographic_distance_metric(dp, dn, self.cfg.max_range)
        if self.cfg.speed_max > 0:
            vrl = relative_speed_metric(msg.prev_hop_speed, self.api.speed(), self.cfg.speed_max)
        else:
            vrl = 0.0
        metric = composite_metric(gd, vrl, self.cfg.alpha, self.cfg.beta)
        delay = contention_delay(
            metric, self.nid, self.cfg.contention_slot, self.cfg.contention_jitter_unit
        )
        fire = now + delay
        self.reverse[key] = frame.sender
        self.pending_contention[key] = ContentionTimer(fire, key, msg)
        self.api.set_timer(("cont",) + key, fire, key)
        if self.api.trace_full:
            self.api.trace(
                {
                    "t": now,
                    "k": "ts",
                    "n": self.nid,
                    "key": key_str(key),
                    "i": frame.uid,
                    "fire": fire,
                    "metric": metric,
                    "gd": gd,
                    "vrl": vrl,
                    "x": pos[0],
                    "y": pos[1],
                    "spd": self.api.speed(),
                    "px": prev_pos[0],
                    "py": prev_pos[1],
                    "pspd": msg.prev_hop_speed,
                }
            )

    def _contention_fired(self, key: tuple, now: float) -> None:
        timer = self.pending_contention.pop(key, None)
        if timer is None:
            return
        if not self.may_transmit():
            self._drop(now, RLRQ, "energy_gate")
            return
        self.api.trace({"t": now, "k": "tf", "n": self.nid, "key": key_str(key)})
        msg = timer.cached_rlrq
        pos = self.api.pos()
        rebroadcast = RlrqMessage(
            source_id=msg.source_id,
            dest_id=msg.dest_id,
            broadcast_id=msg.broadcast_id,
            prev_hop_id=self.nid,
            prev_hop_x=pos[0],
            prev_hop_y=pos[1],
            prev_hop_speed=self.api.speed(),
            hop_count=msg.hop_count + 1,
            front_relatives=sorted(self.front_relatives),
        )
        self.api.send_broadcast(rebroadcast)

    def _on_rlrp(self, frame, now: float) -> None:
        msg: RlrpMessage = frame.msg
        key = msg.discovery_key
        if msg.source_id == self.nid:
            self.forward[msg.dest_id] = RouteEntry(next_hop=frame.sender)
            self.discovery_succeeded(msg.dest_id, now)
            return
        prev = self.reverse.get(key)
        if prev is None:
            self.anomalies += 1
            self._drop(now, RLRP, "no_reverse_entry")
            return
        if not self.may_transmit():
            self._drop(now, RLRP, "energy_gate")
            return
        self.forward[msg.dest_id] = RouteEntry(next_hop=frame.sender)
        onward = RlrpMessage(
            source_id=msg.source_id,
            dest_id=msg.dest_id,
            broadcast_id=msg.broadcast_id,
            next_hop_id=prev,
        )
        self.api.send_unicast(onward, prev)

    # ------------------------------------------------------------------
    # failures

    def invalidate_next_hop(self, next_hop: int, now: float) -> None:
        for dest in [d for d, e in self.forward.items() if e.next_hop == next_hop]:
            del self.forward[dest]

    def invalidate_route(self, dest: int, now: float) -> None:
        self.forward.pop(dest, None)

    def on_unicast_failure(self, frame, reason: str, now: float) -> None:
        if frame.msg.msg_type == "data":
            self.trigger_zoom_out(now)
        super().on_unicast_failure(frame, reason, now)

    def on_flow_failure(self, pkt, now: float) -> None:
        self.invalidate_route(pkt.dest_id, now)
        if self.route_next_hop(pkt.dest_id, now) is not None:
            return  # destination directly reachable: nothing to discover
        self.maybe_start_discovery(pkt.dest_id, now)

    def on_timer(self, key, payload, now: float) -> None:
        if isinstance(key, tuple) and key[0] == "cont":
            self._contention_fired(key[1:], now)
        else:
            super().on_timer(key, payload, now)
