"""Structured event traces.

A trace is a list of flat dict records, persisted as newline-delimited
JSON. Records appear in emission order; every metric is recomputable from
the persisted file alone. Field names are kept short because sweep traces
hold hundreds of thousands of records.

Record kinds and fields (v = only at trace_level "full"):

  init   t, k, n, x, y, e           node created with position and energy
  tx     t, k, n, i, m, b, e        transmission: uid, msg type, bytes,
         [, d] [, key] [, zo]       residual energy at send time, link
         (v: x, y)                  destination, discovery key, zoom-out flag
  rx   v t, k, n, i, s, m, b, o     frame reached a radio: parent tx uid,
                                    sender, outcome "ok" or "col"
  drop v t, k, n, m, w [, i]        protocol-level discard with reason
  ts   v t, k, n, key, i, fire,     contention timer scheduled, with the
         metric, gd, vrl, x, y,     inputs that produced the metric
         spd, px, py, pspd
  tf   v t, k, n, key               contention timer fired
  tc   v t, k, n, key               contention timer cancelled
  uf   v t, k, n, m, w              unicast delivery failure at sender
  ds     t, k, n, key               discovery started at source
  de     t, k, n, key, ok, msgs     discovery ended (ok=1 success)
  del    t, k, n, src, seq          data packet delivered at destination
  bdrop  t, k, n                    data buffer overflow (drop-tail)
  death  t, k, n                    battery exhausted (first zero crossing)
  fe     t, k, n, e                 final residual energy at run end
"""

from __future__ import annotations

import json
from pathlib import Path

LIGHT_KINDS = {"init", "tx", "ds", "de", "del", "bdrop", "death", "fe"}


def key_str(key: tuple) -> str:
    return "-".join(str(x) for x in key)


class TraceRecorder:
    """Collects records in memory; ``dump`` writes deterministic NDJSON."""

    def __init__(self, level: str = "full"):
        if level not in ("full", "light"):
            raise ValueError(f"bad trace level {level!r}")
        self.level = level
        self.records: list[dict] = []

    @property
    def full(self) -> bool:
        return self.level == "full"

    def emit(self, rec: dict) -> None:
        if self.level == "light" and rec["k"] not in LIGHT_KINDS:
            return
        self.records.append(rec)

    def dump(self, path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as fh:
            for rec in self.records:
                fh.write(json.dumps(rec, separators=(",", ":")))
                fh.write("\n")


def read_trace(path) -> list[dict]:
    records = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records
