import pytest

from fanetsim.config import ScenarioConfig
from fanetsim.engine import Simulation


class ScriptedSender:
    """Minimal protocol stub: transmits a planned list of frames and
    records everything it receives."""

    def __init__(self, api, plan=()):
        self.api = api
        self.received = []
        self.failures = []
        for i, (t, msg, dst) in enumerate(plan):
            api.set_timer(("send", i), t, (msg, dst))

    def on_timer(self, key, payload, now):
        msg, dst = payload
        if dst is None:
            self.api.send_broadcast(msg)
        else:
            self.api.send_unicast(msg, dst)

    def on_receive(self, frame, rssi, now):
        self.received.append((now, frame.msg, rssi))

    def on_unicast_failure(self, frame, reason, now):
        self.failures.append((now, frame.msg, reason))

    def on_hello_tick(self, now):
        pass

    def on_traffic(self, dest, now):
        pass

    def on_flow_failure(self, pkt, now):
        pass


def make_sim(positions, energies=None, plans=None, **cfg_kw):
    """Static engine harness: nodes at fixed positions, no periodic events
    unless the caller schedules them."""
    defaults = dict(
        node_count=len(positions),
        source_count=1,
        speed_min=0.0,
        speed_max=0.0,
        sim_duration=10.0,
        trace_level="full",
    )
    defaults.update(cfg_kw)
    cfg = ScenarioConfig(**defaults)
    sim = Simulation(cfg)
    for nid, pos in enumerate(positions):
        energy = energies[nid] if energies else 1000.0
        plan = (plans or {}).get(nid, ())
        sim.add_node(
            nid,
            pos=pos,
            energy_j=energy,
            static=True,
            protocol_factory=lambda api, p=plan: ScriptedSender(api, p),
        )
    return sim


@pytest.fixture()
def scripted():
    return make_sim
