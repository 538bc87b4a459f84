"""Free-space propagation model.

Received power follows the Friis equation in dB form:

    rssi(d) = tx_power_dbm - 20*log10(4*pi*d*f / c)

The transmit power is not a free parameter: it is calibrated so that the
received power at the maximum transmission range equals the reception
threshold exactly. With the default 250 m / -64 dBm scenario this pins
tx_power at ~24.01 dBm and makes "within range" and "above threshold"
the same predicate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

SPEED_OF_LIGHT = 299792458.0


def free_space_path_loss_db(d_m: float, freq_hz: float) -> float:
    if d_m <= 0.0:
        raise ValueError(f"distance must be positive, got {d_m}")
    return 20.0 * math.log10(4.0 * math.pi * d_m * freq_hz / SPEED_OF_LIGHT)


@dataclass(frozen=True)
class RadioModel:
    tx_power_dbm: float
    carrier_freq_hz: float
    max_range_m: float
    rssi_threshold_dbm: float

    @classmethod
    def calibrated(
        cls, max_range_m: float, rssi_threshold_dbm: float, carrier_freq_hz: float
    ) -> "RadioModel":
        """Build a model whose rssi(max_range) equals the threshold."""
        tx = rssi_threshold_dbm + free_space_path_loss_db(max_range_m, carrier_freq_hz)
        return cls(
            tx_power_dbm=tx,
            carrier_freq_hz=carrier_freq_hz,
            max_range_m=max_range_m,
            rssi_threshold_dbm=rssi_threshold_dbm,
        )

    def rssi_dbm(self, d_m: float) -> float:
        return self.tx_power_dbm - free_space_path_loss_db(d_m, self.carrier_freq_hz)
