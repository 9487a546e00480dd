"""Sliding-window flag schedules for distance-5 and -7 stabilizer measurement.

One syndrome ancilla reads a weight-w X stabilizer off the data register
while flag ancillas wrap intervals of its worldline: a flag is opened and
closed by a CNOT pair from the syndrome qubit, so a syndrome X fault flips
exactly the flags open at that moment. Keeping five (distance 5) or seven
(distance 7) flags open at all times gives every fault position a
multi-bit signature, provided the order in which flags close is scrambled
against the order in which they opened. Each full group of open flags
closes in a fixed pattern, (2, 4, 1, 5, 3) for distance 5 and
(2, 4, 6, 1, 3, 5, 7) for distance 7 counting from the longest-open flag,
with replacement flags opening between the closures; the survivors form
the next group, and the final group closes in the same pattern.

Data CNOT spacing differs between the two distances. Distance 5 fits one
data CNOT after every flag event inside a right-aligned window, leaving
the last data CNOT just before the second-last (even w) or third-last
(odd w) flag closure. Distance 7 doubles the flag coverage, spacing the
w data CNOTs with the flag-CNOT gap sequence

    2, ..., 2, 3, 3, 3, 3, 2, ..., 2, 1

(the 2-runs splitting w - 6 as evenly as possible) plus one extra flag
CNOT before the first data CNOT.

Tables are derived, never written down: each reachable flag pattern gets
its minimum-weight consistent correction, and the emitted pair re-checks
itself by fault injection before it is returned. The distance-7
generation check runs exhaustively over single and double fault sets and
samples the triples; callers wanting the full triple enumeration can run
it on the returned pair.
"""

from __future__ import annotations

from ..ftcheck import check_circuit_ft, derive_correction_table
from .common import (
    DATA,
    FLAG,
    SYNDROME,
    CircuitBuilder,
    InconsistentTable,
    UnsupportedWeight,
)
from .d3 import x_weight_code

D5_CLOSE_ORDER = (2, 4, 1, 5, 3)
D7_CLOSE_ORDER = (2, 4, 6, 1, 3, 5, 7)


def _window_events(n_flags: int, window: int, close_order) -> list:
    """Open/close schedule keeping `window` flags open at every instant.

    Returns ("open", flag) and ("close", flag) events, one of each per
    flag. The first `window` flags open immediately; afterwards each
    closure is followed by the next fresh flag, the victim chosen by
    walking close_order over a snapshot of the current group (frozen when
    the previous snapshot is used up). The last `window` survivors close
    in the same order without replacements.
    """
    events = [("open", j) for j in range(window)]
    active = list(range(window))
    nxt = window
    group, used = list(active), 0
    while nxt < n_flags:
        if used == len(close_order):
            group, used = list(active), 0
        victim = group[close_order[used] - 1]
        used += 1
        events.append(("close", victim))
        active.remove(victim)
        events.append(("open", nxt))
        active.append(nxt)
        nxt += 1
    group = list(active)
    for r in close_order:
        events.append(("close", group[r - 1]))
    return events


def _emit(w: int, n_flags: int, events, data_slots):
    """Lay out the measurement circuit: flag CNOTs in event order, one
    data CNOT (descending) after each event index listed in data_slots."""
    slots = set(data_slots)
    b = CircuitBuilder()
    data = b.qubits(DATA, w)
    s = b.qubit(SYNDROME)
    flags = b.qubits(FLAG, n_flags)
    b.prep_x(s)
    for f in flags:
        b.prep_z(f)
    dq = w - 1
    for i, (_, j) in enumerate(events, 1):
        b.cnot(s, flags[j])
        if i in slots:
            b.cnot(s, data[dq])
            dq -= 1
    assert dq == -1
    for f in flags:
        b.meas_z(f)
    b.meas_x(s)
    return b.build()


def stab_meas_d5(w: int):
    """Measure X^w fault-tolerantly to distance five.

    Ancilla count a satisfies w <= 2a - 4 (floored at the seven of the
    small-w circuits): one syndrome plus a - 1 flag wires, of which five
    are open at any instant, so fast reset could reuse five physical
    flags.
    """
    if w < 6:
        raise UnsupportedWeight("distance-5 measurement starts at weight 6")
    a = max(7, (w + 1) // 2 + 2)
    n_flags = a - 1
    events = _window_events(n_flags, 5, D5_CLOSE_ORDER)
    end = len(events) - 2 if w % 2 == 0 else len(events) - 3
    circuit = _emit(w, n_flags, events, range(end - w + 1, end + 1))
    code = x_weight_code(w)
    table = derive_correction_table(circuit, code, "x", order=2)
    report = check_circuit_ft(circuit, table, code, 5, "x")
    if not report.passed():
        raise InconsistentTable(
            f"generated circuit failed its own check: {report.counterexamples[:1]}"
        )
    return circuit, table


def stab_meas_d7(w: int):
    """Measure X^w fault-tolerantly to distance seven.

    Uses w + 1 flag wires, seven open at any instant (so seven physical
    flags under fast reset). Table derivation covers every fault set of
    up to three faults; weights whose schedule admits no consistent
    correction assignment raise InconsistentTable rather than returning
    a weaker table.
    """
    if w < 8:
        raise UnsupportedWeight("distance-7 measurement starts at weight 8")
    half = w - 6
    gaps = [2] * ((half + 1) // 2) + [3, 3, 3, 3] + [2] * (half // 2) + [1]
    events = _window_events(w + 1, 7, D7_CLOSE_ORDER)
    assert len(events) == 1 + sum(gaps)
    slots = [1]
    for g in gaps:
        slots.append(slots[-1] + g)
    circuit = _emit(w, w + 1, events, slots)
    code = x_weight_code(w)
    try:
        table = derive_correction_table(circuit, code, "x", order=3)
    except ValueError as exc:
        raise InconsistentTable(str(exc)) from exc
    report = check_circuit_ft(
        circuit, table, code, 7, "x", exhaustive_order=2, sample=20000, seed=0
    )
    if not report.passed():
        raise InconsistentTable(
            f"generated circuit failed its own check: {report.counterexamples[:1]}"
        )
    return circuit, table
