"""Relay-selection math: zone membership, link metrics, contention delay.

The composite metric ranks relay candidates; lower is better. A candidate
delays its rebroadcast proportionally to its metric, so the best candidate
fires first and its transmission cancels the others.
"""

from __future__ import annotations


def in_forwarding_zone(
    angle_deg: float, energy_j: float, energy_threshold_j: float, zone_half_angle_deg: float
) -> bool:
    """A neighbor is an eligible relay iff it sits within the angular zone
    toward the destination and has energy at or above the threshold (both
    bounds inclusive)."""
    if not 0.0 <= angle_deg <= 180.0:
        raise ValueError(f"angle out of range: {angle_deg}")
    return energy_j >= energy_threshold_j and angle_deg <= zone_half_angle_deg


def geographic_distance_metric(dp: float, dn: float, r: float) -> float:
    """GD = |1 - (dp - dn)/r|.

    dp: previous-hop distance to destination, dn: candidate distance to
    destination, r: maximum transmission range. 0 means the candidate
    advanced a full radio range toward the destination; 1 means no
    progress; values up to 2 mean regress.
    """
    if r <= 0:
        raise ValueError("transmission range must be positive")
    if dp < 0 or dn < 0:
        raise ValueError("distances must be non-negative")
    return abs(1.0 - (dp - dn) / r)


def relative_speed_metric(v_prev: float, v_recv: float, v_max: float) -> float:
    """V_RL = |v_prev - v_recv| / v_max, in [0, 1] for speeds within range."""
    if v_max <= 0:
        raise ValueError("maximum speed must be positive")
    return abs(v_prev - v_recv) / v_max


def composite_metric(gd: float, vrl: float, alpha: float = 0.5, beta: float = 0.5) -> float:
    return alpha * gd + beta * vrl


def contention_delay(
    metric: float, node_id: int, slot_s: float, jitter_unit_s: float
) -> float:
    """Map a composite metric to a rebroadcast delay.

    Linear in the metric plus a deterministic per-node jitter so two nodes
    never fire at exactly the same instant; equal metrics resolve in node-id
    order. The jitter unit must be small against slot_s * typical metric
    gaps for the metric ordering to dominate.
    """
    if metric < 0:
        raise ValueError("metric must be non-negative")
    return slot_s * metric + jitter_unit_s * (node_id + 1)
