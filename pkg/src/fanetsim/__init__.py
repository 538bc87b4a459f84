"""Packet-level discrete-event simulator for FANET routing protocols.

Implements RLPR (reliable link-adaptive position-based routing) together
with AODV and a simplified RARP baseline on a shared physical layer, plus
metric extraction and sweep tooling for protocol comparisons.
"""

__version__ = "0.1.0"
