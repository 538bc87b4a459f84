"""Planar geometry helpers.

All positions are (x, y) tuples in meters. Altitude is a scenario constant
(the swarm flies at a fixed height), so every distance here is horizontal.
"""

from __future__ import annotations

import math

Pos = tuple[float, float]


class DegenerateGeometryError(ValueError):
    """Raised when an angle is requested for coincident points."""


def distance(a: Pos, b: Pos) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def forwarding_angle(prev_hop: Pos, candidate: Pos, dest: Pos) -> float:
    """Angle in degrees at ``prev_hop`` between the destination direction
    and the candidate direction, in [0, 180].

    This is the zone test used by the routing layer: a candidate straight
    toward the destination scores 0, one straight behind scores 180.
    """
    ux, uy = dest[0] - prev_hop[0], dest[1] - prev_hop[1]
    vx, vy = candidate[0] - prev_hop[0], candidate[1] - prev_hop[1]
    nu = math.hypot(ux, uy)
    nv = math.hypot(vx, vy)
    if nu == 0.0 or nv == 0.0:
        raise DegenerateGeometryError(
            "forwarding angle undefined for coincident points"
        )
    cosang = (ux * vx + uy * vy) / (nu * nv)
    cosang = max(-1.0, min(1.0, cosang))
    return math.degrees(math.acos(cosang))
