"""Control and data message types with bit-exact wire layouts.

Every message serializes to fixed-width little-endian fields in the order
the fields are declared below. Node ids are u16, sequence/broadcast ids
u32, lengths u16, and all physical quantities are f64. Sizes on the wire
feed the energy model and the per-type byte counters, so ``wire_size()``
must agree with ``pack()`` exactly (tested).

Wire layout summary (offsets after the 1-byte type tag):

  HELLO      sender u16 | x f64 | y f64 | speed f64 | energy f64
             | dist_to_dest f64 | timestamp f64                     = 51 B
  RLRQ       source u16 | dest u16 | bcast u32 | prev_hop u16
             | prev_x f64 | prev_y f64 | prev_speed f64 | hops u16
             | n_front u16 | n * u16                                = 39+2n B
  RLRP       source u16 | dest u16 | bcast u32 | next_hop u16       = 11 B
  RREQ       flags u8 | reserved u16 | hops u16 | bcast u32
             | dest u16 | dest_seq u32 | source u16 | src_seq u32   = 24 B
  RREP       flags u8 | reserved u16 | prefix u8 | hops u16
             | dest u16 | dest_seq u32 | source u16 | lifetime u32  = 20 B
  RARP_RREQ  source u16 | dest u16 | bcast u32 | hops u16
             | prev_x f64 | prev_y f64 | prev_vx f64 | prev_vy f64
             | min_link_time f64 | n_path u16 | n * u16             = 53+2n B
  RARP_RREP  source u16 | dest u16 | bcast u32 | hop_index u16
             | n_path u16 | n * u16                                 = 13+2n B
  DATA       source u16 | dest u16 | seq u32 | payload u16 zeros*n  = 11+n B
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

HELLO = "hello"
RLRQ = "rlrq"
RLRP = "rlrp"
RREQ = "rreq"
RREP = "rrep"
DATA = "data"

CONTROL_TYPES = (HELLO, RLRQ, RLRP, RREQ, RREP)

_TAGS = {HELLO: 1, RLRQ: 2, RLRP: 3, RREQ: 4, RREP: 5, DATA: 6, "rarp_rreq": 7, "rarp_rrep": 8}


def _pack_ids(ids) -> bytes:
    return struct.pack("<H", len(ids)) + b"".join(struct.pack("<H", i) for i in ids)


def _unpack_ids(buf: bytes, off: int):
    (n,) = struct.unpack_from("<H", buf, off)
    off += 2
    ids = list(struct.unpack_from(f"<{n}H", buf, off))
    return ids, off + 2 * n


@dataclass
class HelloMessage:
    sender_id: int
    x: float
    y: float
    speed: float
    residual_energy: float
    distance_to_dest: float
    timestamp: float
    zoom_out: bool = False  # bookkeeping only, not a wire field

    msg_type = HELLO

    def wire_size(self) -> int:
        return 1 + 2 + 6 * 8

    def pack(self) -> bytes:
        return struct.pack(
            "<BH6d",
            _TAGS[HELLO],
            self.sender_id,
            self.x,
            self.y,
            self.speed,
            self.residual_energy,
            self.distance_to_dest,
            self.timestamp,
        )

    @classmethod
    def unpack(cls, buf: bytes) -> "HelloMessage":
        tag, sender, x, y, speed, energy, dist, ts = struct.unpack("<BH6d", buf)
        assert tag == _TAGS[HELLO]
        return cls(sender, x, y, speed, energy, dist, ts)


@dataclass
class RlrqMessage:
    source_id: int
    dest_id: int
    broadcast_id: int
    prev_hop_id: int
    prev_hop_x: float
    prev_hop_y: float
    prev_hop_speed: float
    hop_count: int
    front_relatives: list[int] = field(default_factory=list)

    msg_type = RLRQ

    @property
    def discovery_key(self):
        return (self.source_id, self.dest_id, self.broadcast_id)

    def wire_size(self) -> int:
        return 1 + 2 + 2 + 4 + 2 + 3 * 8 + 2 + 2 + 2 * len(self.front_relatives)

    def pack(self) -> bytes:
        head = struct.pack(
            "<BHHIH3dH",
            _TAGS[RLRQ],
            self.source_id,
            self.dest_id,
            self.broadcast_id,
            self.prev_hop_id,
            self.prev_hop_x,
            self.prev_hop_y,
            self.prev_hop_speed,
            self.hop_count,
        )
        return head + _pack_ids(self.front_relatives)

    @classmethod
    def unpack(cls, buf: bytes) -> "RlrqMessage":
        tag, src, dst, bid, prev, px, py, pspd, hops = struct.unpack_from("<BHHIH3dH", buf)
        assert tag == _TAGS[RLRQ]
        fr, _ = _unpack_ids(buf, struct.calcsize("<BHHIH3dH"))
        return cls(src, dst, bid, prev, px, py, pspd, hops, fr)


@dataclass
class RlrpMessage:
    source_id: int
    dest_id: int
    broadcast_id: int
    next_hop_id: int

    msg_type = RLRP

    @property
    def discovery_key(self):
        return (self.source_id, self.dest_id, self.broadcast_id)

    def wire_size(self) -> int:
        return 1 + 2 + 2 + 4 + 2

    def pack(self) -> bytes:
        return struct.pack(
            "<BHHIH",
            _TAGS[RLRP],
            self.source_id,
            self.dest_id,
            self.broadcast_id,
            self.next_hop_id,
        )

    @classmethod
    def unpack(cls, buf: bytes) -> "RlrpMessage":
        tag, src, dst, bid, nxt = struct.unpack("<BHHIH", buf)
        assert tag == _TAGS[RLRP]
        return cls(src, dst, bid, nxt)


@dataclass
class AodvRreq:
    source_id: int
    dest_id: int
    broadcast_id: int
    hop_count: int
    source_seq: int

    msg_type = RREQ

    @property
    def discovery_key(self):
        return (self.source_id, self.dest_id, self.broadcast_id)

    def wire_size(self) -> int:
        return 1 + 2 + 2 + 4 + 2 + 4 + 2 + 4 + 3  # padded to the RFC's 24

    def pack(self) -> bytes:
        return struct.pack(
            "<BHHIHIHI3x",
            _TAGS[RREQ],
            self.source_id,
            self.dest_id,
            self.broadcast_id,
            self.hop_count,
            self.source_seq,
            0,
            0,
        )

    @classmethod
    def unpack(cls, buf: bytes) -> "AodvRreq":
        tag, src, dst, bid, hops, seq, _r1, _r2 = struct.unpack("<BHHIHIHI3x", buf)
        assert tag == _TAGS[RREQ]
        return cls(src, dst, bid, hops, seq)


@dataclass
class AodvRrep:
    source_id: int
    dest_id: int
    broadcast_id: int
    hop_count: int
    dest_seq: int

    msg_type = RREP

    @property
    def discovery_key(self):
        return (self.source_id, self.dest_id, self.broadcast_id)

    def wire_size(self) -> int:
        return 1 + 2 + 2 + 4 + 2 + 4 + 5  # padded to the RFC's 20

    def pack(self) -> bytes:
        return struct.pack(
            "<BHHIHI5x",
            _TAGS[RREP],
            self.source_id,
            self.dest_id,
            self.broadcast_id,
            self.hop_count,
            self.dest_seq,
        )

    @classmethod
    def unpack(cls, buf: bytes) -> "AodvRrep":
        tag, src, dst, bid, hops, seq = struct.unpack("<BHHIHI5x", buf)
        assert tag == _TAGS[RREP]
        return cls(src, dst, bid, hops, seq)


@dataclass
class RarpRreq:
    """RARP-lite route request: floods like RREQ but records the path and
    the minimum expected link connection time seen so far."""

    source_id: int
    dest_id: int
    broadcast_id: int
    hop_count: int
    prev_x: float
    prev_y: float
    prev_vx: float
    prev_vy: float
    min_link_time: float
    path: list[int] = field(default_factory=list)

    msg_type = RREQ  # counted alongside AODV requests

    @property
    def discovery_key(self):
        return (self.source_id, self.dest_id, self.broadcast_id)

    def wire_size(self) -> int:
        return 1 + 2 + 2 + 4 + 2 + 5 * 8 + 2 + 2 * len(self.path)

    def pack(self) -> bytes:
        head = struct.pack(
            "<BHHIH5d",
            _TAGS["rarp_rreq"],
            self.source_id,
            self.dest_id,
            self.broadcast_id,
            self.hop_count,
            self.prev_x,
            self.prev_y,
            self.prev_vx,
            self.prev_vy,
            self.min_link_time,
        )
        return head + _pack_ids(self.path)

    @classmethod
    def unpack(cls, buf: bytes) -> "RarpRreq":
        fmt = "<BHHIH5d"
        tag, src, dst, bid, hops, px, py, vx, vy, mlt = struct.unpack_from(fmt, buf)
        assert tag == _TAGS["rarp_rreq"]
        path, _ = _unpack_ids(buf, struct.calcsize(fmt))
        return cls(src, dst, bid, hops, px, py, vx, vy, mlt, path)


@dataclass
class RarpRrep:
    """RARP-lite reply: unicast back along ``path``; ``hop_index`` points at
    the node currently holding the reply."""

    source_id: int
    dest_id: int
    broadcast_id: int
    hop_index: int
    path: list[int] = field(default_factory=list)

    msg_type = RREP

    @property
    def discovery_key(self):
        return (self.source_id, self.dest_id, self.broadcast_id)

    def wire_size(self) -> int:
        return 1 + 2 + 2 + 4 + 2 + 2 + 2 * len(self.path)

    def pack(self) -> bytes:
        head = struct.pack(
            "<BHHIH",
            _TAGS["rarp_rrep"],
            self.source_id,
            self.dest_id,
            self.broadcast_id,
            self.hop_index,
        )
        return head + _pack_ids(self.path)

    @classmethod
    def unpack(cls, buf: bytes) -> "RarpRrep":
        fmt = "<BHHIH"
        tag, src, dst, bid, idx = struct.unpack_from(fmt, buf)
        assert tag == _TAGS["rarp_rrep"]
        path, _ = _unpack_ids(buf, struct.calcsize(fmt))
        return cls(src, dst, bid, idx, path)


@dataclass
class DataPacket:
    source_id: int
    dest_id: int
    seq: int
    payload_bytes: int = 512

    msg_type = DATA

    def wire_size(self) -> int:
        return 1 + 2 + 2 + 4 + 2 + self.payload_bytes

    def pack(self) -> bytes:
        head = struct.pack(
            "<BHHIH",
            _TAGS[DATA],
            self.source_id,
            self.dest_id,
            self.seq,
            self.payload_bytes,
        )
        return head + bytes(self.payload_bytes)

    @classmethod
    def unpack(cls, buf: bytes) -> "DataPacket":
        tag, src, dst, seq, n = struct.unpack_from("<BHHIH", buf)
        assert tag == _TAGS[DATA]
        return cls(src, dst, seq, n)
