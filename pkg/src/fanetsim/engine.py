"""Deterministic discrete-event kernel with a collision broadcast channel.

One Simulation instance is one run: a global clock, a (time, seq)-ordered
event heap, the node set, and the shared medium. The channel model is a
simplified CSMA: before each send a node backs off a uniform random number
of slots, defers while it can hear an ongoing transmission, then transmits
without acknowledgement. A frame reaches a receiver iff the receiver is
within the reception threshold at transmission start and no other audible
frame overlapped it in time at that receiver; overlapping frames are lost
at the shared receivers only. Unicast frames that fail to reach their link
destination raise a failure signal at the sender (the stand-in for a
missing link-layer ACK).

Radios are promiscuous: every audible frame costs receive energy whether
or not it is addressed to the node. Transmissions are gated on the sender
holding at least the participation energy threshold.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field

from . import energy as energy_mod
from . import rng as rng_mod
from .config import ScenarioConfig
from .energy import EnergyBudget
from .geometry import Pos, distance
from .mobility import MobilityState, advance_waypoint
from .radio import SPEED_OF_LIGHT, RadioModel
from .trace import TraceRecorder, key_str

# an overheard unicast costs only its decoded header before the radio
# aborts (early-abort power save)
OVERHEARD_HEADER_BYTES = 11

# event kinds, processed in (time, seq) order
_MOBILITY = 0
_HELLO = 1
_TRAFFIC = 2
_TX_ATTEMPT = 3
_TX_END = 4
_TIMER = 5
_DEATH = 6


class FatalSimError(RuntimeError):
    """Engine self-check failure (e.g. an event scheduled in the past)."""


@dataclass
class Frame:
    msg: object
    sender: int
    link_dst: int | None  # None = broadcast
    uid: int

    @property
    def bits(self) -> int:
        return 8 * self.msg.wire_size()

    def rate_bps(self, cfg: ScenarioConfig) -> float:
        # data payloads ride the high rate; control and broadcasts use the
        # robust basic rate
        return cfg.data_rate_bps if self.msg.msg_type == "data" else cfg.basic_rate_bps

    def airtime_s(self, cfg: ScenarioConfig) -> float:
        return cfg.phy_preamble_us * 1e-6 + self.bits / self.rate_bps(cfg)

    def airtime_bits(self, cfg: ScenarioConfig) -> float:
        """Airtime-equivalent bits at the basic rate; the unit the energy
        model charges for, so a long slow beacon costs what it occupies."""
        return self.airtime_s(cfg) * cfg.basic_rate_bps

    def header_airtime_bits(self, cfg: ScenarioConfig) -> float:
        header_bits = 8 * min(self.msg.wire_size(), OVERHEARD_HEADER_BYTES)
        s = cfg.phy_preamble_us * 1e-6 + header_bits / self.rate_bps(cfg)
        return s * cfg.basic_rate_bps


@dataclass
class _Transmission:
    uid: int
    sender: int
    start: float
    end: float
    frame: Frame
    receivers: list  # [(node_id, rssi_dbm, distance_m)] snapshot at start
    receiver_ids: set = field(default_factory=set)


class NodeApi:
    """The engine surface a protocol instance talks to.

    All callbacks receive an explicit ``now``; sends and timers are based
    on the time of the callback currently executing.
    """

    def __init__(self, sim: "Simulation", node: "_Node"):
        self._sim = sim
        self._node = node
        self._ctx_now = 0.0

    @property
    def node_id(self) -> int:
        return self._node.nid

    @property
    def cfg(self) -> ScenarioConfig:
        return self._sim.cfg

    @property
    def dest_id(self) -> int:
        return self._sim.cfg.dest_id

    @property
    def dest_pos(self) -> Pos:
        return self._sim.dest_pos

    @property
    def trace_full(self) -> bool:
        return self._sim.trace.full

    def pos(self) -> Pos:
        return self._node.mob.pos

    def speed(self) -> float:
        m = self._node.mob
        return 0.0 if m.pause_remaining > 0 else m.speed

    def velocity(self) -> tuple[float, float]:
        m = self._node.mob
        if m.pause_remaining > 0 or m.speed <= 0:
            return (0.0, 0.0)
        dx = m.waypoint[0] - m.pos[0]
        dy = m.waypoint[1] - m.pos[1]
        norm = math.hypot(dx, dy)
        if norm == 0:
            return (0.0, 0.0)
        return (m.speed * dx / norm, m.speed * dy / norm)

    def residual_energy(self) -> float:
        self._sim._settle_idle(self._node, self._ctx_now)
        return self._node.energy.residual

    def send_broadcast(self, msg) -> None:
        self._sim._queue_send(self._node, msg, None, self._ctx_now)

    def send_unicast(self, msg, link_dst: int) -> None:
        self._sim._queue_send(self._node, msg, link_dst, self._ctx_now)

    def set_timer(self, key, fire_time: float, payload=None) -> None:
        self._sim._set_timer(self._node, key, fire_time, payload)

    def cancel_timer(self, key) -> bool:
        return self._node.timers.pop(key, None) is not None

    def trace(self, rec: dict) -> None:
        self._sim.trace.emit(rec)

    def data_delivered(self, packet, now: float) -> None:
        self._sim.trace.emit(
            {"t": now, "k": "del", "n": self._node.nid, "src": packet.source_id, "seq": packet.seq}
        )

    def notify_flow_failure(self, packet, now: float) -> None:
        """End-to-end failure feedback to the flow source (abstraction of
        upper-layer loss signalling; see design notes)."""
        src = self._sim.nodes.get(packet.source_id)
        if src is not None and src.alive and src.nid != self._node.nid:
            self._sim._call_protocol(src, "on_flow_failure", packet, now)


class _Node:
    __slots__ = (
        "nid",
        "mob",
        "energy",
        "alive",
        "protocol",
        "api",
        "mob_rng",
        "mac_rng",
        "radio_busy_until",
        "timers",
        "timer_gen",
        "death_gen",
        "last_idle_settle",
        "mobile",
    )

    def __init__(self, nid: int, mob: MobilityState, budget: EnergyBudget, mobile: bool):
        self.nid = nid
        self.mob = mob
        self.energy = budget
        self.alive = True
        self.protocol = None
        self.api = None
        self.mob_rng = None
        self.mac_rng = None
        self.radio_busy_until = 0.0
        self.timers = {}
        self.timer_gen = 0
        self.death_gen = 0
        self.last_idle_settle = 0.0
        self.mobile = mobile


class Simulation:
    def __init__(self, cfg: ScenarioConfig, trace: TraceRecorder | None = None):
        self.cfg = cfg.validate()
        self.radio = RadioModel.calibrated(
            cfg.max_range, cfg.rssi_threshold_dbm, cfg.carrier_freq_hz
        )
        self.trace = trace if trace is not None else TraceRecorder(cfg.trace_level)
        self.now = 0.0
        self.dest_pos: Pos = (cfg.dest_x, cfg.dest_y)
        self.nodes: dict[int, _Node] = {}
        self._heap: list = []
        self._seq = itertools.count()
        self._uid = itertools.count(1)
        self._on_air: list[_Transmission] = []
        self._tx_history: list[_Transmission] = []
        self._t_end = cfg.sim_duration
        self._finished = False

    # ------------------------------------------------------------------
    # construction

    def add_node(
        self,
        nid: int,
        pos: Pos,
        energy_j: float,
        static: bool = False,
        protocol_factory=None,
    ) -> None:
        cfg = self.cfg
        mob_rng = rng_mod.stream(cfg.seed, "mob", nid)
        speed_range = (0.0, 0.0) if static else (cfg.speed_min, cfg.speed_max)
        mob = MobilityState.initial(
            mob_rng,
            area=(cfg.area_width, cfg.area_height),
            speed_range=speed_range,
            pause_time=cfg.pause_time,
            pos=pos,
        )
        budget = EnergyBudget(
            residual=energy_j,
            tx_cost_per_bit=cfg.tx_cost_per_bit,
            rx_cost_per_bit=cfg.rx_cost_per_bit,
            idle_drain_watts=cfg.idle_drain_watts,
        )
        node = _Node(nid, mob, budget, mobile=not static)
        node.mob_rng = mob_rng
        node.mac_rng = rng_mod.stream(cfg.seed, "mac", nid)
        node.api = NodeApi(self, node)
        if protocol_factory is not None:
            node.protocol = protocol_factory(node.api)
        self.nodes[nid] = node
        self.trace.emit(
            {"t": 0.0, "k": "init", "n": nid, "x": pos[0], "y": pos[1], "e": energy_j}
        )
        self._project_idle_death(node)

    def schedule_initial_events(self) -> None:
        cfg = self.cfg
        self._schedule(cfg.mobility_tick, _MOBILITY, None)
        for node in self.nodes.values():
            phase = rng_mod.stream(cfg.seed, "phase", node.nid).uniform(0.0, cfg.hello_interval)
            self._schedule(phase, _HELLO, node.nid)
        interval = 1.0 / cfg.cbr_rate_pps
        for i, src in enumerate(cfg.source_ids):
            # stagger flows so multiple sources do not tick in lockstep
            start = cfg.traffic_start + i * interval / max(1, cfg.source_count)
            self._schedule(start, _TRAFFIC, src)

    # ------------------------------------------------------------------
    # event plumbing

    def _schedule(self, t: float, kind: int, payload) -> None:
        if t < self.now - 1e-12:
            raise FatalSimError(
                f"event kind {kind} scheduled at {t} before current time {self.now}"
            )
        heapq.heappush(self._heap, (t, next(self._seq), kind, payload))

    def run(self) -> None:
        if self._finished:
            raise FatalSimError("simulation already ran")
        heap = self._heap
        t_end = self._t_end
        while heap and heap[0][0] <= t_end:
            t, _, kind, payload = heapq.heappop(heap)
            self.now = t
            if kind == _TX_END:
                self._handle_tx_end(payload)
            elif kind == _TX_ATTEMPT:
                self._handle_tx_attempt(payload)
            elif kind == _TIMER:
                self._handle_timer(payload)
            elif kind == _HELLO:
                self._handle_hello(payload)
            elif kind == _TRAFFIC:
                self._handle_traffic(payload)
            elif kind == _MOBILITY:
                self._handle_mobility()
            elif kind == _DEATH:
                self._handle_death_check(payload)
            else:  # pragma: no cover
                raise FatalSimError(f"unknown event kind {kind}")
        self.now = t_end
        for node in sorted(self.nodes.values(), key=lambda n: n.nid):
            if node.alive:
                self._settle_idle(node, t_end)
            self.trace.emit({"t": t_end, "k": "fe", "n": node.nid, "e": node.energy.residual})
        self._finished = True

    def _call_protocol(self, node: _Node, method: str, *args) -> None:
        if node.protocol is None:
            return
        node.api._ctx_now = args[-1]  # every callback ends with `now`
        getattr(node.protocol, method)(*args)

    # ------------------------------------------------------------------
    # periodic events

    def _handle_mobility(self) -> None:
        dt = self.cfg.mobility_tick
        for node in self.nodes.values():
            if node.alive and node.mobile:
                advance_waypoint(node.mob, node.mob_rng, dt)
        next_t = self.now + dt
        if next_t <= self._t_end:
            self._schedule(next_t, _MOBILITY, None)

    def _handle_hello(self, nid: int) -> None:
        node = self.nodes[nid]
        if not node.alive:
            return
        self._call_protocol(node, "on_hello_tick", self.now)
        self._schedule(self.now + self.cfg.hello_interval, _HELLO, nid)

    def _handle_traffic(self, nid: int) -> None:
        node = self.nodes[nid]
        if not node.alive:
            return
        self._call_protocol(node, "on_traffic", self.cfg.dest_id, self.now)
        self._schedule(self.now + 1.0 / self.cfg.cbr_rate_pps, _TRAFFIC, nid)

    # ------------------------------------------------------------------
    # timers

    def _set_timer(self, node: _Node, key, fire_time: float, payload) -> None:
        if fire_time < self.now - 1e-12:
            raise FatalSimError(f"timer {key!r} set in the past ({fire_time} < {self.now})")
        node.timer_gen += 1
        node.timers[key] = (node.timer_gen, payload)
        self._schedule(fire_time, _TIMER, (node.nid, key, node.timer_gen))

    def _handle_timer(self, payload) -> None:
        nid, key, gen = payload
        node = self.nodes[nid]
        entry = node.timers.get(key)
        if entry is None or entry[0] != gen or not node.alive:
            return  # cancelled, superseded, or node died
        del node.timers[key]
        self._call_protocol(node, "on_timer", key, entry[1], self.now)

    # ------------------------------------------------------------------
    # energy bookkeeping

    def _settle_idle(self, node: _Node, now: float) -> None:
        dt = now - node.last_idle_settle
        if dt <= 0.0 or not node.alive:
            node.last_idle_settle = max(node.last_idle_settle, now)
            return
        node.last_idle_settle = now
        if node.energy.debit(energy_mod.IDLE, dt=dt):
            self._mark_death(node, now)

    def _project_idle_death(self, node: _Node) -> None:
        """Keep one pending zero-crossing check per node so idle-only
        deaths land at their exact crossing time."""
        if not node.alive:
            return
        horizon = node.energy.seconds_until_idle_death()
        t = node.last_idle_settle + horizon
        if t > self._t_end:
            return
        node.death_gen += 1
        self._schedule(max(t, self.now), _DEATH, (node.nid, node.death_gen))

    def _handle_death_check(self, payload) -> None:
        nid, gen = payload
        node = self.nodes[nid]
        if not node.alive or node.death_gen != gen:
            return
        self._settle_idle(node, self.now)
        if node.alive and node.energy.residual <= 0.0:
            self._mark_death(node, self.now)

    def _mark_death(self, node: _Node, now: float) -> None:
        if not node.alive:
            return
        node.alive = False
        node.energy.residual = 0.0
        node.energy.dead = True
        node.timers.clear()
        self.trace.emit({"t": now, "k": "death", "n": node.nid})

    def kill_node(self, nid: int) -> None:
        """Test hook: drop a node dead immediately."""
        node = self.nodes[nid]
        self._settle_idle(node, self.now)
        node.energy.consumed[energy_mod.IDLE] += node.energy.residual
        self._mark_death(node, self.now)

    # ------------------------------------------------------------------
    # channel

    def _queue_send(self, node: _Node, msg, link_dst: int | None, now: float) -> None:
        frame = Frame(msg=msg, sender=node.nid, link_dst=link_dst, uid=next(self._uid))
        self._schedule(now + self._backoff(node), _TX_ATTEMPT, frame)

    def _backoff(self, node: _Node) -> float:
        return node.mac_rng.randrange(self.cfg.cw_min) * self.cfg.slot_time_s

    def _audible_until(self, node: _Node) -> float:
        """Latest end time of anything this node can currently hear
        (including its own radio), or 0 if the medium looks idle.

        A frame starting at this exact instant is not sensed yet (carrier
        detection is not instantaneous), which is how two same-slot picks
        end up colliding."""
        busy = node.radio_busy_until if node.radio_busy_until > self.now else 0.0
        for tx in self._on_air:
            if tx.end <= self.now or tx.start >= self.now:
                continue
            if tx.sender == node.nid or node.nid in tx.receiver_ids:
                busy = max(busy, tx.end)
        return busy

    def _handle_tx_attempt(self, frame: Frame) -> None:
        node = self.nodes[frame.sender]
        if not node.alive:
            return
        self._settle_idle(node, self.now)
        if node.energy.residual < frame.airtime_bits(self.cfg) * node.energy.tx_cost_per_bit:
            # cannot afford the transmission; protocol-level energy gates
            # (where the protocol has one) trip well before this
            self.trace.emit(
                {"t": self.now, "k": "drop", "n": node.nid, "m": frame.msg.msg_type, "w": "depleted"}
            )
            return
        busy_until = self._audible_until(node)
        if busy_until > self.now:
            self._schedule(busy_until + self._backoff(node), _TX_ATTEMPT, frame)
            return
        self._begin_tx(node, frame)

    def _begin_tx(self, node: _Node, frame: Frame) -> None:
        cfg = self.cfg
        start = self.now
        duration = frame.airtime_s(cfg)
        end = start + duration
        sender_pos = node.mob.pos
        receivers = []
        receiver_ids = set()
        for other in self.nodes.values():
            if other.nid == node.nid or not other.alive:
                continue
            d = distance(sender_pos, other.mob.pos)
            if d <= 0.0:
                d = 1e-3
            rssi = self.radio.rssi_dbm(d)
            if rssi >= self.radio.rssi_threshold_dbm:
                receivers.append((other.nid, rssi, d))
                receiver_ids.add(other.nid)
        residual_before = node.energy.residual
        if node.energy.debit(energy_mod.TX, bits=frame.airtime_bits(cfg)):
            self._mark_death(node, start)
        else:
            self._project_idle_death(node)
        rec = {
            "t": start,
            "k": "tx",
            "n": node.nid,
            "i": frame.uid,
            "m": frame.msg.msg_type,
            "b": frame.msg.wire_size(),
            "e": residual_before,
        }
        if frame.link_dst is not None:
            rec["d"] = frame.link_dst
        key = getattr(frame.msg, "discovery_key", None)
        if key is not None:
            rec["key"] = key_str(key)
        if getattr(frame.msg, "zoom_out", False):
            rec["zo"] = 1
        if self.trace.full:
            rec["x"] = sender_pos[0]
            rec["y"] = sender_pos[1]
            fr = getattr(frame.msg, "front_relatives", None)
            if fr is not None:
                rec["fr"] = list(fr)
        self.trace.emit(rec)
        node.radio_busy_until = end
        tx = _Transmission(
            uid=frame.uid,
            sender=node.nid,
            start=start,
            end=end,
            frame=frame,
            receivers=receivers,
            receiver_ids=receiver_ids,
        )
        self._on_air.append(tx)
        self._tx_history.append(tx)
        self._schedule(end, _TX_END, tx)

    def _collided(self, tx: _Transmission, rid: int) -> bool:
        for other in self._tx_history:
            if other.uid == tx.uid:
                continue
            if other.start < tx.end and other.end > tx.start:
                if rid in other.receiver_ids or other.sender == rid:
                    return True
        return False

    def _handle_tx_end(self, tx: _Transmission) -> None:
        self._on_air.remove(tx)
        delivered_to_target = False
        target_seen = False
        frame_bytes = tx.frame.msg.wire_size()
        for rid, rssi, dist_m in tx.receivers:
            receiver = self.nodes[rid]
            if not receiver.alive:
                continue
            if rid == tx.frame.link_dst:
                target_seen = True
            self._settle_idle(receiver, self.now)
            collided = self._collided(tx, rid)
            # promiscuous radios pay for frames addressed to them and for
            # broadcasts; an overheard unicast is aborted after its header
            if tx.frame.link_dst is None or tx.frame.link_dst == rid:
                rx_bits = tx.frame.airtime_bits(self.cfg)
                rx_bytes = frame_bytes
            else:
                rx_bits = tx.frame.header_airtime_bits(self.cfg)
                rx_bytes = min(frame_bytes, OVERHEARD_HEADER_BYTES)
            if receiver.energy.debit(energy_mod.RX, bits=rx_bits):
                self._mark_death(receiver, self.now)
            else:
                self._project_idle_death(receiver)
            if self.trace.full:
                self.trace.emit(
                    {
                        "t": self.now,
                        "k": "rx",
                        "n": rid,
                        "i": tx.uid,
                        "s": tx.sender,
                        "m": tx.frame.msg.msg_type,
                        "b": rx_bytes,
                        "o": "col" if collided else "ok",
                    }
                )
            if collided or not receiver.alive:
                continue
            if tx.frame.link_dst is None or tx.frame.link_dst == rid:
                if rid == tx.frame.link_dst:
                    delivered_to_target = True
                t_deliver = self.now + dist_m / SPEED_OF_LIGHT
                self._call_protocol(receiver, "on_receive", tx.frame, rssi, t_deliver)
        if tx.frame.link_dst is not None and not delivered_to_target:
            sender = self.nodes[tx.sender]
            target = self.nodes.get(tx.frame.link_dst)
            if target is not None and not target.alive:
                reason = "dead"
            elif target_seen:
                reason = "collision"
            else:
                reason = "range"
            if self.trace.full:
                self.trace.emit(
                    {
                        "t": self.now,
                        "k": "uf",
                        "n": tx.sender,
                        "m": tx.frame.msg.msg_type,
                        "w": reason,
                    }
                )
            if sender.alive:
                self._call_protocol(sender, "on_unicast_failure", tx.frame, reason, self.now)
        self._prune_history()

    def _prune_history(self) -> None:
        if self._on_air:
            floor = min(t.start for t in self._on_air)
        else:
            floor = self.now
        self._tx_history = [t for t in self._tx_history if t.end > floor]
