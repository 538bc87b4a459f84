"""Seeded random streams.

Every random draw in a run comes from a named stream derived from the run
seed, so adding draws to one subsystem never perturbs another and the same
(seed, stream) pair always yields the same sequence. Streams are seeded
through ``random.Random(str)``, which hashes the string with SHA-512 and is
therefore stable across processes and platforms (unlike ``hash()``).
"""

from __future__ import annotations

import random


def stream(seed: int, *labels) -> random.Random:
    """Return an independent RNG for the given (seed, labels) stream."""
    key = f"{seed}/" + "/".join(str(x) for x in labels)
    return random.Random(key)
