"""Scenario configuration.

Configs are flat ``key = value`` text files (``#`` starts a comment). A
file may pull in another with ``include = path`` (relative to the including
file); included keys are applied first so the including file overrides.
Unknown keys are rejected by name. All defaults follow the standard
scenario: 1000x1000 m area, 250 m range, -64 dBm reception threshold,
10 J energy threshold, 1 s beacon interval, 10-25 km/h random waypoint,
CBR/512-byte traffic.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

PROTOCOLS = ("rlpr", "aodv", "rarp_lite")
SWEEP_AXES = ("node_count", "source_count", "pause_time")

KMH = 1 / 3.6  # km/h in m/s


class ConfigError(ValueError):
    pass


@dataclass
class ScenarioConfig:
    # run control
    protocol: str = "rlpr"
    seed: int = 1
    sim_duration: float = 900.0
    trace_level: str = "full"

    # topology and mobility
    node_count: int = 30
    source_count: int = 1
    area_width: float = 1000.0
    area_height: float = 1000.0
    altitude: float = 100.0
    speed_min: float = 10 * KMH
    speed_max: float = 25 * KMH
    pause_time: float = 0.0
    mobility_tick: float = 0.1
    dest_x: float = 900.0
    dest_y: float = 500.0
    # scripted layouts: one entry per node, overrides random placement
    node_positions: list = field(default_factory=list)
    node_energies: list = field(default_factory=list)

    # radio and energy
    max_range: float = 250.0
    rssi_threshold_dbm: float = -64.0
    carrier_freq_hz: float = 2.4e9
    energy_init_min: float = 10.0
    energy_init_max: float = 100.0
    energy_threshold: float = 10.0
    tx_cost_per_bit: float = 80e-6
    rx_cost_per_bit: float = 20e-6
    idle_drain_watts: float = 1e-4
    dest_energy: float = 1e6

    # simplified CSMA channel; control/broadcast frames go at the basic
    # rate with a PLCP preamble, data payloads at the higher data rate
    basic_rate_bps: float = 1e6
    data_rate_bps: float = 11e6
    phy_preamble_us: float = 192.0
    slot_time_us: float = 20.0
    cw_min: int = 15

    # RLPR parameters
    hello_interval: float = 1.0
    staleness_factor: float = 2.5
    zone_half_angle_deg: float = 90.0
    alpha: float = 0.5
    beta: float = 0.5
    contention_slot: float = 0.01
    contention_jitter_unit: float = 2e-7
    signal_threshold_dbm: float = -64.0
    zoom_out_min_gap: float = 2.5

    # AODV parameters
    aodv_route_timeout: float = 3.0
    aodv_rreq_retries: int = 2

    # RARP-lite parameters
    rarp_reply_window: float = 0.05
    rarp_ect_cap: float = 100.0
    rarp_weight_ect: float = 1.0
    rarp_weight_hop: float = 1.0
    rarp_hop_cap: float = 10.0

    # traffic
    cbr_rate_pps: float = 1.0
    packet_size_bytes: int = 512
    traffic_start: float = 1.0
    queue_limit: int = 10
    discovery_timeout: float = 1.0
    retry_backoff_base: float = 1.0
    retry_backoff_max: float = 8.0

    @property
    def dest_id(self) -> int:
        return self.node_count - 1

    @property
    def source_ids(self) -> list[int]:
        return list(range(self.source_count))

    @property
    def slot_time_s(self) -> float:
        return self.slot_time_us * 1e-6

    @property
    def staleness_horizon(self) -> float:
        return self.staleness_factor * self.hello_interval

    def validate(self) -> "ScenarioConfig":
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"unknown protocol {self.protocol!r}, expected one of {PROTOCOLS}")
        if self.node_count < 2:
            raise ConfigError("node_count must be at least 2 (a source and the destination)")
        if self.source_count < 1:
            raise ConfigError("source_count must be at least 1")
        if self.source_count >= self.node_count:
            raise ConfigError(
                f"source_count ({self.source_count}) must be smaller than "
                f"node_count ({self.node_count}); one node is the destination"
            )
        if self.area_width <= 0 or self.area_height <= 0:
            raise ConfigError("area dimensions must be positive")
        if self.speed_min < 0 or self.speed_max < self.speed_min:
            raise ConfigError("need 0 <= speed_min <= speed_max")
        if self.speed_max > 0 and self.speed_min <= 0:
            raise ConfigError("moving scenarios need speed_min > 0 (use 0/0 for static)")
        if self.pause_time < 0:
            raise ConfigError("pause_time must be non-negative")
        if self.sim_duration <= 0:
            raise ConfigError("sim_duration must be positive")
        if self.max_range <= 0:
            raise ConfigError("max_range must be positive")
        if self.cw_min < 1:
            raise ConfigError("cw_min must be at least 1")
        if not 0 <= self.zone_half_angle_deg <= 180:
            raise ConfigError("zone_half_angle_deg must lie in [0, 180]")
        if self.alpha < 0 or self.beta < 0:
            raise ConfigError("metric weights must be non-negative")
        if self.queue_limit < 1:
            raise ConfigError("queue_limit must be at least 1")
        if self.cbr_rate_pps <= 0:
            raise ConfigError("cbr_rate_pps must be positive")
        if self.trace_level not in ("full", "light"):
            raise ConfigError("trace_level must be 'full' or 'light'")
        if self.node_positions and len(self.node_positions) != self.node_count:
            raise ConfigError(
                f"node_positions lists {len(self.node_positions)} entries "
                f"for node_count {self.node_count}"
            )
        if self.node_energies and len(self.node_energies) != self.node_count:
            raise ConfigError(
                f"node_energies lists {len(self.node_energies)} entries "
                f"for node_count {self.node_count}"
            )
        return self


@dataclass
class SweepSpec:
    recipe_name: str
    sweep_axis: str
    sweep_values: list
    protocols: list[str]
    seed_count: int = 30
    seed_base: int = 1

    def validate(self) -> "SweepSpec":
        if self.sweep_axis not in SWEEP_AXES:
            raise ConfigError(f"sweep_axis {self.sweep_axis!r} not in {SWEEP_AXES}")
        if not self.sweep_values:
            raise ConfigError("sweep_values is empty")
        for p in self.protocols:
            if p not in PROTOCOLS:
                raise ConfigError(f"unknown protocol {p!r} in protocols")
        if self.seed_count < 1:
            raise ConfigError("seed_count must be at least 1")
        return self


_SWEEP_KEYS = {"recipe_name", "sweep_axis", "sweep_values", "protocols", "seed_count", "seed_base"}

_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(ScenarioConfig)}


def _parse_positions(text: str) -> list:
    pairs = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        xy = chunk.split(",")
        if len(xy) != 2:
            raise ConfigError(f"bad position entry {chunk!r}, expected 'x,y'")
        pairs.append((float(xy[0]), float(xy[1])))
    return pairs


def _coerce(key: str, raw: str):
    if key == "node_positions":
        return _parse_positions(raw)
    if key == "node_energies":
        return [float(x) for x in raw.split(",") if x.strip()]
    typ = _FIELD_TYPES[key]
    if typ in ("int", int):
        return int(raw)
    if typ in ("float", float):
        return float(raw)
    return raw


def read_flat_file(path: Path) -> dict:
    """Parse a flat key=value file, following includes depth-first."""
    path = Path(path)
    raw: dict = {}
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key == "include":
            included = read_flat_file(path.parent / value)
            included.update(raw)  # keys seen so far win over the include
            raw = included
        else:
            raw[key] = value
    return raw


def from_mapping(raw: dict) -> tuple[ScenarioConfig, SweepSpec | None]:
    cfg_kwargs = {}
    sweep_kwargs = {}
    for key, value in raw.items():
        if key in _SWEEP_KEYS:
            sweep_kwargs[key] = value
        elif key in _FIELD_TYPES:
            cfg_kwargs[key] = _coerce(key, value) if isinstance(value, str) else value
        else:
            raise ConfigError(f"unknown config key {key!r}")
    cfg = ScenarioConfig(**cfg_kwargs).validate()
    sweep = None
    if sweep_kwargs:
        missing = {"sweep_axis", "sweep_values"} - set(sweep_kwargs)
        if missing:
            raise ConfigError(f"sweep definition missing keys: {sorted(missing)}")
        values_raw = sweep_kwargs["sweep_values"]
        if isinstance(values_raw, str):
            caster = int if sweep_kwargs["sweep_axis"] != "pause_time" else float
            values = [caster(v) for v in values_raw.split(",") if v.strip()]
        else:
            values = list(values_raw)
        protocols_raw = sweep_kwargs.get("protocols", ",".join(PROTOCOLS))
        protocols = (
            [p.strip() for p in protocols_raw.split(",") if p.strip()]
            if isinstance(protocols_raw, str)
            else list(protocols_raw)
        )
        sweep = SweepSpec(
            recipe_name=sweep_kwargs.get("recipe_name", "sweep"),
            sweep_axis=sweep_kwargs["sweep_axis"],
            sweep_values=values,
            protocols=protocols,
            seed_count=int(sweep_kwargs.get("seed_count", 30)),
            seed_base=int(sweep_kwargs.get("seed_base", 1)),
        ).validate()
    return cfg, sweep


def load(path) -> tuple[ScenarioConfig, SweepSpec | None]:
    """Load and validate a scenario or recipe file."""
    return from_mapping(read_flat_file(Path(path)))
