"""Shared machinery for the circuit generators.

CircuitBuilder assembles CliffordCircuits gate by gate with as-soon-as-
possible scheduling: each operation lands on the earliest time step at
which all of its qubits are free. Gates sharing a qubit therefore
serialize, disjoint gates parallelize, and the resulting depth is the
longest dependency chain. Generators express circuits as call sequences
and never handle time steps directly.
"""

from __future__ import annotations

from ..pauli import (
    CNOT,
    DATA,
    FLAG,
    IDLE,
    MEAS_X,
    MEAS_Z,
    PREP_X,
    PREP_Z,
    RESET,
    SYNDROME,
    CliffordCircuit,
    Location,
    Segment,
)


class UnsupportedWeight(ValueError):
    """The requested stabilizer weight is outside the construction's range."""


class BoundViolated(ValueError):
    """The (w, m) pair exceeds the construction's capacity bound."""


class NotPowerOfTwo(ValueError):
    """Parallel preparation needs w/2 to be a power of two."""


class NoKnownSequence(LookupError):
    """No measurement sequence is on record for this (n, distance)."""


class UnknownMethod(ValueError):
    """The preparation method name is not recognised."""


class InconsistentTable(ValueError):
    """A generated circuit admits no consistent correction table."""


class CircuitBuilder:
    def __init__(self):
        self._roles: list = []
        self._segments: list = []  # list of (condition, [Location])
        self._condition: tuple = ()
        self._locs: list = []
        self._next_free: list = []
        self._out_counter = 0

    # -- qubit allocation

    def qubit(self, role: str) -> int:
        q = len(self._roles)
        self._roles.append(role)
        self._next_free.append(0)
        return q

    def qubits(self, role: str, count: int) -> list:
        return [self.qubit(role) for _ in range(count)]

    # -- scheduling

    def _schedule(self, *qs: int) -> int:
        t = max(self._next_free[q] for q in qs)
        for q in qs:
            self._next_free[q] = t + 1
        return t

    def at_frontier(self, *qs: int):
        """Delay the given qubits until everything issued so far is done."""
        t = max(self._next_free)
        for q in qs:
            self._next_free[q] = t

    # -- locations

    def prep_z(self, q: int):
        self._locs.append(Location(PREP_Z, (q,), self._schedule(q)))

    def prep_x(self, q: int):
        self._locs.append(Location(PREP_X, (q,), self._schedule(q)))

    def reset(self, q: int):
        self._locs.append(Location(RESET, (q,), self._schedule(q)))

    def cnot(self, control: int, target: int):
        self._locs.append(Location(CNOT, (control, target), self._schedule(control, target)))

    def meas_z(self, q: int) -> int:
        out = self._out_counter
        self._out_counter += 1
        self._locs.append(Location(MEAS_Z, (q,), self._schedule(q), out_id=out))
        return out

    def meas_x(self, q: int) -> int:
        out = self._out_counter
        self._out_counter += 1
        self._locs.append(Location(MEAS_X, (q,), self._schedule(q), out_id=out))
        return out

    # -- segments

    def new_segment(self, condition):
        """Close the current segment and open one gated on prior outcomes.

        condition is a tuple of (out_id, wanted bit) pairs. The new segment
        starts after every operation issued so far, on all qubits.
        """
        self._flush()
        self._condition = tuple(condition)
        t = max(self._next_free, default=0)
        self._next_free = [t] * len(self._next_free)

    def _flush(self):
        if self._locs or self._segments:
            self._segments.append((self._condition, self._locs))
        self._locs = []

    def build(self) -> CliffordCircuit:
        self._flush()
        segs = tuple(Segment(cond, tuple(locs)) for cond, locs in self._segments)
        return CliffordCircuit(len(self._roles), segs, tuple(self._roles))


__all__ = [
    "CircuitBuilder",
    "UnsupportedWeight",
    "BoundViolated",
    "NotPowerOfTwo",
    "NoKnownSequence",
    "UnknownMethod",
    "InconsistentTable",
    "CNOT",
    "DATA",
    "FLAG",
    "IDLE",
    "MEAS_X",
    "MEAS_Z",
    "PREP_X",
    "PREP_Z",
    "RESET",
    "SYNDROME",
]
