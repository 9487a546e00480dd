"""Distance-three circuits measuring a weight-w X-type stabilizer.

Both constructions thread the syndrome qubit through a sequence of flag
CNOTs. A fault on the syndrome wire lands in some gap of that sequence,
spreads X into every data CNOT still to come, and deposits X on exactly
the flags whose open/close interval covers the gap. The flag intervals
trace a path through low-weight bit patterns, so distinct gaps show
distinct patterns and each suffix error can be undone from the readout.

Weight three and below needs no flags at all: every suffix of the data
chain is equivalent to at most one X modulo the measured stabilizer.
"""

from __future__ import annotations

from math import ceil

from ..codes import StabilizerCode
from ..flagseq import weight2_path
from ..ftcheck import check_circuit_ft, derive_correction_table
from ..pauli import PauliOperator
from .common import (
    DATA,
    FLAG,
    SYNDROME,
    BoundViolated,
    CircuitBuilder,
    InconsistentTable,
    UnsupportedWeight,
)


def x_weight_code(w: int) -> StabilizerCode:
    """The one-generator code a weight-w X measurement is checked against."""
    return StabilizerCode(w, x_stabs=(PauliOperator(w, x_bits=[1] * w),), z_stabs=())


def slow_reset_bound(m: int) -> int:
    """Largest supported stabilizer weight with a budget of m flag ancillas."""
    return 2 * (2**m - 2 * m + 3)


def _exact_walk(a: int, length: int) -> tuple:
    """A single-toggle walk of `length` vertices in dimension a.

    Endpoints have weight one, interior vertices weight at least two, no
    repeats; prepending and appending the all-zeros vertex closes every
    flag. The maximal length is 2^a - 2a + 3 and comes straight from
    weight2_path; shorter odd lengths are found by depth-first search,
    visiting low-weight neighbours first so the walk hugs the weight-two
    shell and terminates immediately at these sizes.
    """
    if length == 2**a - 2 * a + 3:
        return weight2_path(a).vertices
    if length < 3 or length % 2 == 0:
        raise ValueError(f"walk length must be odd and >= 3, got {length}")

    def render(v):
        return "".join("1" if v >> i & 1 else "0" for i in range(a))

    path = []

    def extend(v):
        path.append(v)
        if len(path) == length:
            if bin(v).count("1") == 1:
                return True
        else:
            want_end = len(path) == length - 1
            nbrs = sorted(
                (v ^ (1 << i) for i in range(a)),
                key=lambda u: (bin(u).count("1"), u),
            )
            for u in nbrs:
                wt = bin(u).count("1")
                if u in path or wt < 2 and not (want_end and wt == 1):
                    continue
                if extend(u):
                    return True
        path.pop()
        return False

    if not extend(1):
        raise ValueError(f"no walk of length {length} in dimension {a}")
    return tuple(render(v) for v in path)


def _checked(circuit, w: int):
    code = x_weight_code(w)
    table = derive_correction_table(circuit, code, "x")
    report = check_circuit_ft(circuit, table, code, 3, "x")
    if not report.passed():
        raise InconsistentTable(
            f"generated circuit failed its own check: {report.counterexamples[:1]}"
        )
    return circuit, table


def _flagless(w: int):
    b = CircuitBuilder()
    data = b.qubits(DATA, w)
    s = b.qubit(SYNDROME)
    b.prep_x(s)
    for d in data:
        b.cnot(s, d)
    b.meas_x(s)
    return _checked(b.build(), w)


def stab_meas_d3_slow(w: int, m: int):
    """Slow-reset measurement of X^w: every flag is its own qubit.

    m is the flag-ancilla budget; the circuit uses the smallest dimension
    a with 2(2^a - 2a + 3) >= w and walks the weight-two path of that
    dimension from the all-zeros pattern back to it, toggling one flag
    per step and collecting two data qubits per gap. Measurement count is
    a + 1. Raises BoundViolated when w exceeds 2(2^m - 2m + 3).
    """
    if w < 1:
        raise UnsupportedWeight(f"weight {w} has no measurement circuit")
    if m < 3:
        raise BoundViolated(f"need a budget of at least 3 flags, got {m}")
    if w <= 3:
        return _flagless(w)
    if w > slow_reset_bound(m):
        raise BoundViolated(f"w={w} exceeds the m={m} bound {slow_reset_bound(m)}")
    a = 2
    while slow_reset_bound(a) < w:
        a += 1
    # shortest odd walk with enough gaps: depth stays within 3w/2 + O(1)
    gaps = (w + 1) // 2
    gaps += 1 - gaps % 2

    walk = ["0" * a] + list(_exact_walk(a, gaps)) + ["0" * a]
    b = CircuitBuilder()
    data = b.qubits(DATA, w)
    s = b.qubit(SYNDROME)
    flags = b.qubits(FLAG, a)
    b.prep_x(s)
    for f in flags:
        b.prep_z(f)

    nxt = 0
    for k in range(1, len(walk)):
        bit = next(i for i in range(a) if walk[k - 1][i] != walk[k][i])
        b.cnot(s, flags[bit])
        if k < len(walk) - 1:
            for d in data[nxt : nxt + 2]:
                b.cnot(s, d)
            nxt = min(nxt + 2, w)
    assert nxt == w, "data gaps exhausted before the chain was collected"

    for f in flags:
        b.meas_z(f)
    b.meas_x(s)
    circ = b.build()
    assert circ.n_qubits - w <= max(2, (w - 1).bit_length()) + 1
    assert circ.depth() <= 3 * w // 2 + 8
    return _checked(circ, w)


def stab_meas_d3_fast(w: int):
    """Fast-reset measurement of X^w with at most three flag qubits.

    Windows open in triples: with F = ceil((w+2)/4) flag intervals, the
    first three open back to back, then each close is chased by the next
    open, reusing the freed qubit after a reset. Interior gaps are
    covered by at least two intervals, so a lone flag readout flip can
    never mimic a multi-qubit suffix correction. Measurement count is
    F + 1; capacity is two data qubits per gap over 2F - 1 gaps.
    """
    if w < 1:
        raise UnsupportedWeight(f"weight {w} has no measurement circuit")
    if w <= 3:
        return _flagless(w)
    nwin = ceil((w + 2) / 4)
    nphys = min(3, nwin)

    # toggle plan: +j opens window j, -j closes it
    plan = [+j for j in range(1, nphys + 1)]
    for j in range(1, nwin - 2):
        plan += [-j, +(j + 3)]
    plan += [-j for j in range(max(1, nwin - 2), nwin + 1)]

    b = CircuitBuilder()
    data = b.qubits(DATA, w)
    s = b.qubit(SYNDROME)
    phys = b.qubits(FLAG, nphys)
    b.prep_x(s)

    nxt = 0
    for i, step in enumerate(plan):
        f = phys[(abs(step) - 1) % nphys]
        if step > 0:
            if step <= nphys:
                b.prep_z(f)
            else:
                b.reset(f)
            b.cnot(s, f)
        else:
            b.cnot(s, f)
            b.meas_z(f)
        if i < len(plan) - 1:
            for d in data[nxt : nxt + 2]:
                b.cnot(s, d)
            nxt = min(nxt + 2, w)
    assert nxt == w, "data gaps exhausted before the chain was collected"

    b.meas_x(s)
    circ = b.build()
    assert circ.depth() <= 3 * w // 2 + 8
    return _checked(circ, w)
