"""Per-node energy accounting.

Residual energy only decreases. Transmit/receive debits are proportional
to frame bits; idle drain is a constant power integrated over time. The
residual is clamped at zero and the first crossing is reported exactly
once so the caller can emit a single node-death event.
"""

from __future__ import annotations

from dataclasses import dataclass, field

TX = "tx"
RX = "rx"
IDLE = "idle"


@dataclass
class EnergyBudget:
    residual: float
    tx_cost_per_bit: float
    rx_cost_per_bit: float
    idle_drain_watts: float
    dead: bool = False
    consumed: dict = field(default_factory=lambda: {TX: 0.0, RX: 0.0, IDLE: 0.0})

    def debit(self, kind: str, bits: int = 0, dt: float = 0.0) -> bool:
        """Apply one debit; returns True on the first crossing of zero."""
        if bits < 0 or dt < 0:
            raise ValueError("bits and dt must be non-negative")
        if self.dead:
            return False
        if kind == TX:
            amount = bits * self.tx_cost_per_bit
        elif kind == RX:
            amount = bits * self.rx_cost_per_bit
        elif kind == IDLE:
            amount = dt * self.idle_drain_watts
        else:
            raise ValueError(f"unknown debit kind {kind!r}")
        drawn = min(amount, self.residual)
        self.consumed[kind] += drawn
        self.residual -= drawn
        if self.residual <= 0.0:
            self.residual = 0.0
            self.dead = True
            return True
        return False

    def seconds_until_idle_death(self) -> float:
        """Time until idle drain alone would exhaust the budget."""
        if self.dead:
            return 0.0
        if self.idle_drain_watts <= 0.0:
            return float("inf")
        return self.residual / self.idle_drain_watts


def debit_energy(budget: EnergyBudget, kind: str, bits: int = 0, dt: float = 0.0) -> EnergyBudget:
    """Functional wrapper around :meth:`EnergyBudget.debit` (same clamping
    and single-death semantics); returns the mutated budget for chaining."""
    budget.debit(kind, bits=bits, dt=dt)
    return budget
