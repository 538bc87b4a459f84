import pytest

from fanetsim.energy import IDLE, RX, TX, EnergyBudget, debit_energy


def make(residual=50.0, tx=50e-6, rx=20e-6, idle=1e-3):
    return EnergyBudget(residual, tx, rx, idle)


def test_tx_debit_arithmetic():
    b = make(residual=50.0, tx=50e-6)
    debit_energy(b, TX, bits=4096)
    assert b.residual == pytest.approx(50.0 - 4096 * 50e-6, abs=1e-12)
    assert b.residual == pytest.approx(49.7952)


def test_clamp_at_zero_single_death():
    b = make(residual=0.01, tx=50e-6)
    died = b.debit(TX, bits=4096)  # would cost 0.2048
    assert died
    assert b.residual == 0.0
    # further debits keep it at zero without a second death signal
    assert b.debit(RX, bits=10_000) is False
    assert b.debit(IDLE, dt=100.0) is False
    assert b.residual == 0.0


def test_participation_gate_is_inclusive_at_threshold():
    # a node holding exactly the threshold still participates
    b = make(residual=10.0)
    assert b.residual >= 10.0


def test_idle_integration():
    b = make(residual=5.0, idle=0.5)
    b.debit(IDLE, dt=4.0)
    assert b.residual == pytest.approx(3.0)


def test_idle_death_projection():
    b = make(residual=2.0, idle=0.25)
    assert b.seconds_until_idle_death() == pytest.approx(8.0)
    b.debit(RX, bits=25_000)  # 0.5 J
    assert b.seconds_until_idle_death() == pytest.approx(6.0)


def test_no_idle_death_without_drain():
    b = make(idle=0.0)
    assert b.seconds_until_idle_death() == float("inf")


def test_negative_amounts_rejected():
    b = make()
    with pytest.raises(ValueError):
        b.debit(TX, bits=-1)
    with pytest.raises(ValueError):
        b.debit("warp", bits=1)


def test_conservation_ledger_matches_residual():
    b = make(residual=30.0)
    b.debit(TX, bits=4096)
    b.debit(RX, bits=4096)
    b.debit(IDLE, dt=120.0)
    b.debit(TX, bits=408)
    drawn = sum(b.consumed.values())
    assert 30.0 - drawn == pytest.approx(b.residual, abs=1e-12)


def test_conservation_holds_through_death():
    b = make(residual=0.3, tx=50e-6)
    b.debit(TX, bits=4096)  # 0.2048
    b.debit(TX, bits=4096)  # clamps at 0
    assert b.residual == 0.0
    assert sum(b.consumed.values()) == pytest.approx(0.3, abs=1e-12)
