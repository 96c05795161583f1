"""First-order radio energy model and a per-node ledger.

Two power-control modes are supported. ``"adaptive"`` sets the amplifier
for the actual link length (the classic ``d**2`` model). ``"fixed"`` keeps
the amplifier at a nominal range for every packet, as mote-class radios
with a fixed output power do, so energy scales with bits alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import InvalidParameterError, check_nonnegative

E_ELEC = 50e-9  # J/bit, transceiver electronics
EPS_AMP = 100e-12  # J/bit/m^2, free-space amplifier
NOMINAL_RANGE = 100.0  # m, amplifier setting under fixed power


def tx_energy(bits, distance, e_elec=E_ELEC, eps_amp=EPS_AMP):
    """Energy in joules to send ``bits`` over ``distance`` meters."""
    bits = check_nonnegative(bits, "bits")
    distance = check_nonnegative(distance, "distance")
    return e_elec * bits + eps_amp * bits * distance * distance


def rx_energy(bits, e_elec=E_ELEC):
    bits = check_nonnegative(bits, "bits")
    return e_elec * bits


@dataclass(frozen=True)
class RadioModel:
    power_control: str = "fixed"
    nominal_range: float = NOMINAL_RANGE
    e_elec: float = E_ELEC
    eps_amp: float = EPS_AMP

    def __post_init__(self):
        if self.power_control not in ("fixed", "adaptive"):
            raise InvalidParameterError(
                f"power_control must be 'fixed' or 'adaptive', got {self.power_control!r}"
            )
        check_nonnegative(self.nominal_range, "nominal_range")

    def amp_distance(self, distance):
        """Distance the amplifier is set for when sending over ``distance``."""
        return distance if self.power_control == "adaptive" else self.nominal_range

    def link_energy(self, bits, distance):
        """(tx, rx) joules for one packet over a link of length ``distance``."""
        return (
            tx_energy(bits, self.amp_distance(distance), self.e_elec, self.eps_amp),
            rx_energy(bits, self.e_elec),
        )


class EnergyLedger:
    """Accumulates transmit and receive energy per node.

    Parameters
    ----------
    node_count : int
        Number of nodes; ids are ``0..node_count-1``.
    levels : int
        Number of hierarchy levels, for the per-level bit counters.
    """

    def __init__(self, node_count, levels=1, e_elec=E_ELEC, eps_amp=EPS_AMP):
        node_count = int(node_count)
        if node_count < 0:
            raise InvalidParameterError("node_count must be non-negative")
        self.e_elec = e_elec
        self.eps_amp = eps_amp
        self.tx = np.zeros(node_count)
        self.rx = np.zeros(node_count)
        self.bits_by_level = np.zeros(levels + 1, dtype=np.int64)

    def _check(self, node):
        if not 0 <= int(node) < len(self.tx):
            raise InvalidParameterError(f"unknown node id {node}")

    def charge(self, sender, receiver, bits, distance, level=0):
        """Debit the sender's transmit and the receiver's receive energy.

        ``distance`` is the distance the amplifier is driven for.
        """
        self._check(sender)
        self._check(receiver)
        self.tx[sender] += tx_energy(bits, distance, self.e_elec, self.eps_amp)
        self.rx[receiver] += rx_energy(bits, self.e_elec)
        self.bits_by_level[level] += int(bits)
        return self

    @property
    def total_tx(self):
        return float(self.tx.sum())

    @property
    def total_rx(self):
        return float(self.rx.sum())

    @property
    def total(self):
        return self.total_tx + self.total_rx

    @property
    def total_bits(self):
        return int(self.bits_by_level.sum())
