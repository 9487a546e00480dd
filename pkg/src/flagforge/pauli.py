"""GF(2) symplectic Pauli algebra and Clifford circuit fault propagation.

Operators carry no sign or phase: every check in this package concerns error
supports and outcome bit flips, never phases. Circuits are lists of timed
locations grouped into segments; a segment may be conditioned on earlier
measurement outcomes, which is how adaptive constructions branch.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

# Location kinds.
PREP_Z = "prep_z"
PREP_X = "prep_x"
CNOT = "cnot"
MEAS_Z = "meas_z"
MEAS_X = "meas_x"
RESET = "reset"
IDLE = "idle"

KINDS = (PREP_Z, PREP_X, CNOT, MEAS_Z, MEAS_X, RESET, IDLE)
_PREP_KINDS = (PREP_Z, PREP_X, RESET)
_MEAS_KINDS = (MEAS_Z, MEAS_X)

# Qubit roles.
DATA = "data"
SYNDROME = "syndrome"
FLAG = "flag"


class ContainsMeasurement(Exception):
    """Circuit passed to a unitary-only operation has non-unitary locations."""


class InvalidSite(Exception):
    """A fault references a location that does not exist."""


class UnresolvableBranch(Exception):
    """A branch predicate needs an outcome that was never measured."""


class PauliOperator:
    """An n-qubit Pauli up to phase, as a pair of GF(2) vectors.

    x_bits[i] set means an X component on qubit i, z_bits[i] a Z component;
    both set is Y. Product is componentwise XOR, so every operator squares
    to the identity.
    """

    __slots__ = ("n", "x_bits", "z_bits")

    def __init__(self, n: int, x_bits=None, z_bits=None):
        self.n = n
        self.x_bits = self._coerce(n, x_bits)
        self.z_bits = self._coerce(n, z_bits)

    @staticmethod
    def _coerce(n: int, bits) -> np.ndarray:
        if bits is None:
            arr = np.zeros(n, dtype=np.uint8)
        else:
            arr = np.asarray(bits, dtype=np.uint8).copy()
            if arr.shape != (n,):
                raise ValueError(f"expected {n} bits, got shape {arr.shape}")
            arr &= 1
        arr.flags.writeable = False
        return arr

    @classmethod
    def identity(cls, n: int) -> "PauliOperator":
        return cls(n)

    @classmethod
    def single(cls, n: int, qubit: int, kind: str) -> "PauliOperator":
        """Weight-one operator: kind in {"X", "Y", "Z"}."""
        x = np.zeros(n, dtype=np.uint8)
        z = np.zeros(n, dtype=np.uint8)
        if kind in ("X", "Y"):
            x[qubit] = 1
        if kind in ("Z", "Y"):
            z[qubit] = 1
        return cls(n, x, z)

    @classmethod
    def from_support(cls, n: int, xs: Iterable[int] = (), zs: Iterable[int] = ()) -> "PauliOperator":
        x = np.zeros(n, dtype=np.uint8)
        z = np.zeros(n, dtype=np.uint8)
        for q in xs:
            x[q] ^= 1
        for q in zs:
            z[q] ^= 1
        return cls(n, x, z)

    @classmethod
    def from_label(cls, label: str) -> "PauliOperator":
        """Parse strings like "IXYZ" (qubit 0 leftmost)."""
        n = len(label)
        x = np.zeros(n, dtype=np.uint8)
        z = np.zeros(n, dtype=np.uint8)
        for i, ch in enumerate(label.upper()):
            if ch in "XY":
                x[i] = 1
            if ch in "ZY":
                z[i] = 1
            if ch not in "IXYZ":
                raise ValueError(f"bad Pauli letter {ch!r}")
        return cls(n, x, z)

    def label(self) -> str:
        return "".join("IXZY"[xb + 2 * zb] for xb, zb in zip(self.x_bits, self.z_bits))

    def __mul__(self, other: "PauliOperator") -> "PauliOperator":
        if self.n != other.n:
            raise ValueError("size mismatch")
        return PauliOperator(self.n, self.x_bits ^ other.x_bits, self.z_bits ^ other.z_bits)

    def weight(self) -> int:
        return int(np.count_nonzero(self.x_bits | self.z_bits))

    def x_weight(self) -> int:
        return int(np.count_nonzero(self.x_bits))

    def z_weight(self) -> int:
        return int(np.count_nonzero(self.z_bits))

    def support(self) -> tuple:
        return tuple(np.nonzero(self.x_bits | self.z_bits)[0].tolist())

    def is_identity(self) -> bool:
        return not (self.x_bits.any() or self.z_bits.any())

    def commutes_with(self, other: "PauliOperator") -> bool:
        sym = (int(self.x_bits @ other.z_bits) + int(self.z_bits @ other.x_bits)) % 2
        return sym == 0

    def restricted(self, qubits: Sequence[int], n: Optional[int] = None) -> "PauliOperator":
        """Components on `qubits`, re-indexed into an n-qubit operator."""
        m = n if n is not None else len(qubits)
        x = np.zeros(m, dtype=np.uint8)
        z = np.zeros(m, dtype=np.uint8)
        for j, q in enumerate(qubits):
            x[j] = self.x_bits[q]
            z[j] = self.z_bits[q]
        return PauliOperator(m, x, z)

    def embedded(self, n: int, qubits: Sequence[int]) -> "PauliOperator":
        """Place this operator's qubit j components on qubits[j] of n wires."""
        x = np.zeros(n, dtype=np.uint8)
        z = np.zeros(n, dtype=np.uint8)
        for j, q in enumerate(qubits):
            x[q] ^= self.x_bits[j]
            z[q] ^= self.z_bits[j]
        return PauliOperator(n, x, z)

    def key(self) -> bytes:
        return self.x_bits.tobytes() + self.z_bits.tobytes()

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PauliOperator)
            and self.n == other.n
            and np.array_equal(self.x_bits, other.x_bits)
            and np.array_equal(self.z_bits, other.z_bits)
        )

    def __hash__(self) -> int:
        return hash((self.n, self.key()))

    def __repr__(self) -> str:
        return f"PauliOperator({self.label()})"


@dataclass(frozen=True)
class Location:
    """One timed operation. CNOT qubits are (control, target)."""

    kind: str
    qubits: tuple
    time_step: int
    out_id: Optional[int] = None  # set on measurement locations only

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if self.kind == CNOT:
            if len(self.qubits) != 2 or self.qubits[0] == self.qubits[1]:
                raise ValueError("cnot needs two distinct qubits")
        elif len(self.qubits) != 1:
            raise ValueError(f"{self.kind} takes exactly one qubit")
        if (self.out_id is not None) != (self.kind in _MEAS_KINDS):
            raise ValueError("out_id is set exactly on measurement locations")

    def is_measurement(self) -> bool:
        return self.kind in _MEAS_KINDS

    def is_preparation(self) -> bool:
        return self.kind in _PREP_KINDS


# A branch condition is a tuple of (out_id, required_bit) pairs, all of which
# must hold; the empty tuple is unconditional.
Condition = tuple


@dataclass(frozen=True)
class Segment:
    condition: Condition
    locations: tuple

    def __post_init__(self):
        object.__setattr__(self, "locations", tuple(self.locations))
        object.__setattr__(self, "condition", tuple((int(o), int(v) & 1) for o, v in self.condition))


class CliffordCircuit:
    """Ordered segments of locations plus a role per qubit.

    Invariants checked at construction: a qubit is measured only after it is
    prepared, no qubit appears twice within one time step, out_ids are unique
    and conditions only reference out_ids from strictly earlier segments.
    """

    def __init__(self, n_qubits: int, segments: Sequence[Segment], roles: Sequence[str]):
        self.n_qubits = int(n_qubits)
        self.segments = tuple(
            seg if isinstance(seg, Segment) else Segment(tuple(seg[0]), tuple(seg[1]))
            for seg in segments
        )
        self.roles = tuple(roles)
        if len(self.roles) != self.n_qubits:
            raise ValueError("one role per qubit required")
        for r in self.roles:
            if r not in (DATA, SYNDROME, FLAG):
                raise ValueError(f"bad role {r!r}")
        self._validate()

    def _validate(self):
        seen_out = set()
        prepared = set()
        by_step: dict = {}
        for si, seg in enumerate(self.segments):
            for o, _ in seg.condition:
                if o not in seen_out:
                    raise ValueError(f"segment {si} conditioned on not-yet-measured out {o}")
            for loc in seg.locations:
                for q in loc.qubits:
                    if not 0 <= q < self.n_qubits:
                        raise ValueError(f"qubit {q} out of range")
                    by_step.setdefault((si, loc.time_step), set())
                    if q in by_step[(si, loc.time_step)]:
                        raise ValueError(f"qubit {q} used twice in step {loc.time_step}")
                    by_step[(si, loc.time_step)].add(q)
                if loc.is_preparation():
                    prepared.add(loc.qubits[0])
                if loc.is_measurement():
                    if loc.qubits[0] not in prepared:
                        raise ValueError(f"qubit {loc.qubits[0]} measured before preparation")
                    if loc.out_id in seen_out:
                        raise ValueError(f"duplicate out_id {loc.out_id}")
                    seen_out.add(loc.out_id)

    def locations(self) -> Iterator[tuple]:
        """Yield (segment_index, location_index, Location)."""
        for si, seg in enumerate(self.segments):
            for li, loc in enumerate(seg.locations):
                yield si, li, loc

    def location_at(self, site: tuple) -> Location:
        si, li = site
        try:
            return self.segments[si].locations[li]
        except IndexError:
            raise InvalidSite(f"no location at {site}")

    def measurement_locations(self) -> list:
        return [loc for _, _, loc in self.locations() if loc.is_measurement()]

    def cnot_count(self) -> int:
        return sum(1 for _, _, loc in self.locations() if loc.kind == CNOT)

    def depth(self) -> int:
        """Number of distinct time steps that contain a non-idle location."""
        steps = set()
        for _, _, loc in self.locations():
            if loc.kind != IDLE:
                steps.add(loc.time_step)
        return len(steps)

    def qubits_with_role(self, role: str) -> list:
        return [q for q in range(self.n_qubits) if self.roles[q] == role]

    def is_adaptive(self) -> bool:
        return any(seg.condition for seg in self.segments)

    # -- serialization ----------------------------------------------------

    def to_json_dict(self) -> dict:
        segs = []
        for seg in self.segments:
            locs = []
            for loc in seg.locations:
                d = {"kind": loc.kind, "qubits": list(loc.qubits), "t": loc.time_step}
                if loc.out_id is not None:
                    d["out"] = loc.out_id
                locs.append(d)
            cond = [{"out": o, "value": v} for o, v in seg.condition] or None
            segs.append({"condition": cond, "locations": locs})
        return {"n_qubits": self.n_qubits, "roles": list(self.roles), "segments": segs}

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=1)

    @classmethod
    def from_json_dict(cls, d: dict) -> "CliffordCircuit":
        segments = []
        for seg in d["segments"]:
            cond = tuple((c["out"], c["value"]) for c in (seg.get("condition") or []))
            locs = [
                Location(l["kind"], tuple(l["qubits"]), l["t"], l.get("out"))
                for l in seg["locations"]
            ]
            segments.append(Segment(cond, tuple(locs)))
        return cls(d["n_qubits"], segments, tuple(d["roles"]))

    @classmethod
    def from_json(cls, text: str) -> "CliffordCircuit":
        return cls.from_json_dict(json.loads(text))


MEAS_FLIP = "meas_flip"
PREP_FLIP = "prep_flip"


@dataclass(frozen=True)
class FaultEvent:
    """A discrete fault at one circuit site.

    error is a PauliOperator on the location's qubits (1 or 2 of them), or
    one of the markers MEAS_FLIP / PREP_FLIP.
    """

    site: tuple  # (segment index, location index)
    error: object

    def __post_init__(self):
        object.__setattr__(self, "site", (int(self.site[0]), int(self.site[1])))
        if isinstance(self.error, PauliOperator):
            if self.error.is_identity():
                raise ValueError("fault error must be non-identity")
        elif self.error not in (MEAS_FLIP, PREP_FLIP):
            raise ValueError(f"bad fault error {self.error!r}")


@dataclass
class PropagationResult:
    flag_bits: tuple
    meas_bits: tuple
    residual: PauliOperator
    outcomes: dict = field(default_factory=dict)  # out_id -> bit

    def flag_string(self) -> str:
        return "".join(str(b) for b in self.flag_bits)


def propagate(circuit: CliffordCircuit, faults: Iterable[FaultEvent] = ()) -> PropagationResult:
    """Run the circuit with the given faults, tracking the Pauli frame.

    Fault-free measurement outcomes are 0 by convention; returned bits are
    flips relative to that. X propagates control to target, Z target to
    control. The residual is the frame left on qubits that are not measured
    last, with measured qubits zeroed.
    """
    by_site: dict = {}
    for f in faults:
        circuit.location_at(f.site)  # raises InvalidSite
        by_site.setdefault(f.site, []).append(f)

    n = circuit.n_qubits
    x = np.zeros(n, dtype=np.uint8)
    z = np.zeros(n, dtype=np.uint8)
    outcomes: dict = {}
    flag_bits: list = []
    meas_bits: list = []

    for si, seg in enumerate(circuit.segments):
        taken = True
        for out_id, want in seg.condition:
            if out_id not in outcomes:
                raise UnresolvableBranch(f"segment {si} needs unmeasured out {out_id}")
            if outcomes[out_id] != want:
                taken = False
        if not taken:
            continue
        for li, loc in enumerate(seg.locations):
            site_faults = by_site.get((si, li), [])
            if loc.kind in (PREP_Z, PREP_X, RESET):
                q = loc.qubits[0]
                x[q] = 0
                z[q] = 0
                for f in site_faults:
                    if f.error == PREP_FLIP:
                        # flipped |0> is X off target; flipped |+> is Z off
                        if loc.kind == PREP_X:
                            z[q] ^= 1
                        else:
                            x[q] ^= 1
                    elif isinstance(f.error, PauliOperator):
                        x[q] ^= f.error.x_bits[0]
                        z[q] ^= f.error.z_bits[0]
                    else:
                        raise ValueError("meas flip on a preparation")
            elif loc.kind == CNOT:
                c, t = loc.qubits
                x[t] ^= x[c]
                z[c] ^= z[t]
                for f in site_faults:
                    if not isinstance(f.error, PauliOperator):
                        raise ValueError("flip marker on a cnot")
                    x[c] ^= f.error.x_bits[0]
                    z[c] ^= f.error.z_bits[0]
                    x[t] ^= f.error.x_bits[1]
                    z[t] ^= f.error.z_bits[1]
            elif loc.kind in _MEAS_KINDS:
                q = loc.qubits[0]
                bit = int(x[q]) if loc.kind == MEAS_Z else int(z[q])
                for f in site_faults:
                    if f.error == MEAS_FLIP:
                        bit ^= 1
                    else:
                        raise ValueError("only outcome flips attach to measurements")
                outcomes[loc.out_id] = bit
                if circuit.roles[q] == FLAG:
                    flag_bits.append(bit)
                else:
                    meas_bits.append(bit)
                x[q] = 0
                z[q] = 0
            elif loc.kind == IDLE:
                for f in site_faults:
                    if not isinstance(f.error, PauliOperator):
                        raise ValueError("flip marker on idle")
                    q = loc.qubits[0]
                    x[q] ^= f.error.x_bits[0]
                    z[q] ^= f.error.z_bits[0]

    residual = PauliOperator(n, x, z)
    return PropagationResult(tuple(flag_bits), tuple(meas_bits), residual, outcomes)


def conjugate_through(circuit: CliffordCircuit, p: PauliOperator) -> PauliOperator:
    """Image of p under the circuit's unitary action (CNOTs only)."""
    if p.n != circuit.n_qubits:
        raise ValueError("size mismatch")
    x = p.x_bits.copy()
    z = p.z_bits.copy()
    for _, _, loc in circuit.locations():
        if loc.kind == CNOT:
            c, t = loc.qubits
            x[t] ^= x[c]
            z[c] ^= z[t]
        elif loc.kind == IDLE:
            continue
        else:
            raise ContainsMeasurement(f"{loc.kind} is not unitary")
    return PauliOperator(circuit.n_qubits, x, z)


# -- fault enumeration ----------------------------------------------------

_CNOT_PAULIS_FULL = tuple(
    PauliOperator.from_label(a + b)
    for a in "IXYZ"
    for b in "IXYZ"
    if a + b != "II"
)
_CNOT_PAULIS_X = tuple(PauliOperator.from_label(s) for s in ("XI", "IX", "XX"))
_CNOT_PAULIS_Z = tuple(PauliOperator.from_label(s) for s in ("ZI", "IZ", "ZZ"))


def location_fault_options(loc: Location, filter: Optional[str] = None) -> tuple:
    """Allowed error values at a location under the discrete noise model.

    filter None gives the full model; "x_only" keeps bit-flip style faults
    (X-component Paulis, |0> preparation flips, Z-basis outcome flips) and
    "z_only" the mirror. Idle locations never carry verification faults.
    """
    if loc.kind == CNOT:
        if filter == "x_only":
            return _CNOT_PAULIS_X
        if filter == "z_only":
            return _CNOT_PAULIS_Z
        return _CNOT_PAULIS_FULL
    if loc.kind in (PREP_Z, RESET):
        return (PREP_FLIP,) if filter != "z_only" else ()
    if loc.kind == PREP_X:
        return (PREP_FLIP,) if filter != "x_only" else ()
    if loc.kind == MEAS_Z:
        return (MEAS_FLIP,) if filter != "z_only" else ()
    if loc.kind == MEAS_X:
        return (MEAS_FLIP,) if filter != "x_only" else ()
    return ()


def single_fault_events(circuit: CliffordCircuit, filter: Optional[str] = None) -> list:
    """All possible single FaultEvents under the model."""
    events = []
    for si, li, loc in circuit.locations():
        for err in location_fault_options(loc, filter):
            events.append(FaultEvent((si, li), err))
    return events


def enumerate_fault_sets(
    circuit: CliffordCircuit, k: int, filter: Optional[str] = None
) -> Iterator[tuple]:
    """Yield every fault set of size 1..k (distinct locations per set)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    singles = single_fault_events(circuit, filter)
    by_site: dict = {}
    for ev in singles:
        by_site.setdefault(ev.site, []).append(ev)
    sites = sorted(by_site)
    for j in range(1, k + 1):
        for chosen_sites in itertools.combinations(sites, j):
            for combo in itertools.product(*(by_site[s] for s in chosen_sites)):
                yield combo


def count_fault_sets(circuit: CliffordCircuit, k: int, filter: Optional[str] = None) -> int:
    """Closed-form count of the sets enumerate_fault_sets yields."""
    mults = []
    for _, _, loc in circuit.locations():
        m = len(location_fault_options(loc, filter))
        if m:
            mults.append(m)
    # sum over j of the elementary symmetric polynomial e_j of the
    # per-location multiplicities
    e = [1] + [0] * k
    for m in mults:
        for j in range(k, 0, -1):
            e[j] += m * e[j - 1]
    return sum(e[1:])
