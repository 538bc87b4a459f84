"""Shared protocol machinery: neighbor tables, data buffering, discovery
retry policy, and the data forwarding plane.

Subclasses supply route lookup and the discovery mechanism; everything
here is identical across protocols so metric comparisons isolate routing
behavior. Discovery attempts back off exponentially after failures and
reset on success; data packets wait in a bounded drop-tail buffer while a
route is searched.
"""

from __future__ import annotations

from collections import OrderedDict, deque
from dataclasses import dataclass, field

from .geometry import distance
from .messages import DATA, HELLO, DataPacket, HelloMessage
from .trace import key_str


@dataclass
class NeighborRecord:
    nid: int
    pos: tuple
    speed: float
    energy: float
    last_heard: float


@dataclass
class DiscoveryState:
    pending: bool = False
    key: tuple | None = None
    started: float = 0.0
    failures: int = 0
    next_allowed: float = 0.0


class BaseProtocol:
    name = "base"
    # protocols with a participation threshold stop transmitting (beacons,
    # discovery, relaying) once residual energy falls below it; the
    # textbook baselines have no such gate and transmit until depletion
    energy_gated = False

    def __init__(self, api):
        self.api = api
        self.cfg = api.cfg
        self.nid = api.node_id
        self.neighbors: dict[int, NeighborRecord] = {}
        self.buffers: dict[int, deque] = {}
        self.discovery: dict[int, DiscoveryState] = {}
        self.broadcast_counter = 0
        self.data_seq = 0
        self.anomalies = 0

    # ------------------------------------------------------------------
    # subclass surface

    def route_next_hop(self, dest: int, now: float) -> int | None:
        raise NotImplementedError

    def begin_discovery(self, dest: int, broadcast_id: int, now: float) -> None:
        raise NotImplementedError

    def invalidate_next_hop(self, next_hop: int, now: float) -> None:
        raise NotImplementedError

    def invalidate_route(self, dest: int, now: float) -> None:
        raise NotImplementedError

    # ------------------------------------------------------------------
    # beaconing

    def above_energy_gate(self) -> bool:
        return self.api.residual_energy() >= self.cfg.energy_threshold

    def may_transmit(self) -> bool:
        return not self.energy_gated or self.above_energy_gate()

    def make_hello(self, now: float, zoom_out: bool = False) -> HelloMessage:
        pos = self.api.pos()
        return HelloMessage(
            sender_id=self.nid,
            x=pos[0],
            y=pos[1],
            speed=self.api.speed(),
            residual_energy=self.api.residual_energy(),
            distance_to_dest=distance(pos, self.api.dest_pos),
            timestamp=now,
            zoom_out=zoom_out,
        )

    def on_hello_tick(self, now: float) -> None:
        self.prune_neighbors(now)
        if self.may_transmit():
            self.api.send_broadcast(self.make_hello(now))

    def prune_neighbors(self, now: float) -> list[int]:
        horizon = self.cfg.staleness_horizon
        stale = [nid for nid, rec in self.neighbors.items() if now - rec.last_heard > horizon]
        for nid in stale:
            del self.neighbors[nid]
            self.on_neighbor_lost(nid, now)
        return stale

    def on_neighbor_lost(self, nid: int, now: float) -> None:
        pass

    def upsert_neighbor(self, msg: HelloMessage, now: float) -> NeighborRecord:
        rec = NeighborRecord(
            nid=msg.sender_id,
            pos=(msg.x, msg.y),
            speed=msg.speed,
            energy=msg.residual_energy,
            last_heard=now,
        )
        self.neighbors[msg.sender_id] = rec
        return rec

    def on_hello(self, msg: HelloMessage, rssi: float, now: float) -> None:
        self.upsert_neighbor(msg, now)

    # ------------------------------------------------------------------
    # traffic plane

    def on_traffic(self, dest: int, now: float) -> None:
        pkt = DataPacket(self.nid, dest, self.data_seq, self.cfg.packet_size_bytes)
        self.data_seq += 1
        self.send_or_queue(pkt, now)

    def send_or_queue(self, pkt: DataPacket, now: float) -> None:
        nxt = self.route_next_hop(pkt.dest_id, now)
        if nxt is not None:
            self.api.send_unicast(pkt, nxt)
            return
        buf = self.buffers.setdefault(pkt.dest_id, deque())
        if len(buf) >= self.cfg.queue_limit:
            self.api.trace({"t": now, "k": "bdrop", "n": self.nid})
        else:
            buf.append(pkt)
        self.maybe_start_discovery(pkt.dest_id, now)

    def maybe_start_discovery(self, dest: int, now: float) -> None:
        st = self.discovery.setdefault(dest, DiscoveryState())
        if st.pending or now < st.next_allowed:
            return
        if not self.may_transmit():
            self.api.trace(
                {"t": now, "k": "drop", "n": self.nid, "m": "discovery", "w": "energy_gate"}
            )
            return
        self.broadcast_counter += 1
        st.pending = True
        st.key = (self.nid, dest, self.broadcast_counter)
        st.started = now
        self.api.trace({"t": now, "k": "ds", "n": self.nid, "key": key_str(st.key)})
        self.api.set_timer(("disc", dest), now + self.cfg.discovery_timeout, st.key)
        self.begin_discovery(dest, self.broadcast_counter, now)

    def discovery_succeeded(self, dest: int, now: float) -> None:
        st = self.discovery.get(dest)
        if st is None or not st.pending:
            return
        st.pending = False
        st.failures = 0
        st.next_allowed = now
        self.api.cancel_timer(("disc", dest))
        self.api.trace({"t": now, "k": "de", "n": self.nid, "key": key_str(st.key), "ok": 1})
        self.flush_buffer(dest, now)

    def _discovery_timed_out(self, dest: int, key: tuple, now: float) -> None:
        st = self.discovery.get(dest)
        if st is None or not st.pending or st.key != key:
            return
        st.pending = False
        st.failures += 1
        st.next_allowed = now + self._failure_backoff(st)
        self.api.trace({"t": now, "k": "de", "n": self.nid, "key": key_str(key), "ok": 0})

    def _failure_backoff(self, st: DiscoveryState) -> float:
        return min(
            self.cfg.retry_backoff_base * 2 ** (st.failures - 1),
            self.cfg.retry_backoff_max,
        )

    def flush_buffer(self, dest: int, now: float) -> None:
        buf = self.buffers.get(dest)
        if not buf:
            return
        while buf:
            nxt = self.route_next_hop(dest, now)
            if nxt is None:
                break
            self.api.send_unicast(buf.popleft(), nxt)

    def handle_data(self, pkt: DataPacket, now: float) -> None:
        if pkt.dest_id == self.nid:
            self.api.data_delivered(pkt, now)
            return
        if not self.may_transmit():
            # below the participation threshold this node no longer
            # relays; report the flow broken so the source routes around it
            self.api.trace(
                {"t": now, "k": "drop", "n": self.nid, "m": DATA, "w": "energy_gate"}
            )
            self.api.notify_flow_failure(pkt, now)
            return
        nxt = self.route_next_hop(pkt.dest_id, now)
        if nxt is None:
            self.anomalies += 1
            self.api.trace({"t": now, "k": "drop", "n": self.nid, "m": DATA, "w": "no_route"})
            self.api.notify_flow_failure(pkt, now)
            return
        self.api.send_unicast(pkt, nxt)

    # ------------------------------------------------------------------
    # failure handling

    def on_unicast_failure(self, frame, reason: str, now: float) -> None:
        msg = frame.msg
        if msg.msg_type != DATA:
            return  # lost replies surface as discovery timeouts
        self.invalidate_next_hop(frame.link_dst, now)
        self.data_plane_failed(msg, now)

    def data_plane_failed(self, pkt: DataPacket, now: float) -> None:
        if pkt.source_id == self.nid:
            self.on_flow_failure(pkt, now)
        else:
            self.api.notify_flow_failure(pkt, now)

    def on_flow_failure(self, pkt: DataPacket, now: float) -> None:
        self.invalidate_route(pkt.dest_id, now)
        self.maybe_start_discovery(pkt.dest_id, now)

    # ------------------------------------------------------------------
    # dispatch

    def on_receive(self, frame, rssi: float, now: float) -> None:
        msg = frame.msg
        if msg.msg_type == HELLO:
            self.on_hello(msg, rssi, now)
        elif msg.msg_type == DATA:
            self.handle_data(msg, now)
        else:
            self.on_control(frame, rssi, now)

    def on_control(self, frame, rssi: float, now: float) -> None:
        raise NotImplementedError

    def on_timer(self, key, payload, now: float) -> None:
        if isinstance(key, tuple) and key[0] == "disc":
            self._discovery_timed_out(key[1], payload, now)


class SeenCache:
    """Bounded LRU duplicate cache for discovery keys."""

    def __init__(self, cap: int = 512):
        self.cap = cap
        self._seen: OrderedDict = OrderedDict()

    def __contains__(self, key) -> bool:
        return key in self._seen

    def add(self, key) -> None:
        self._seen[key] = None
        self._seen.move_to_end(key)
        if len(self._seen) > self.cap:
            self._seen.popitem(last=False)


@dataclass
class RouteEntry:
    next_hop: int
    hops: int = 0
    seq: int = 0
    expires: float = float("inf")
    extra: dict = field(default_factory=dict)
