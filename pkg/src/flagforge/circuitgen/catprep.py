"""Cat state preparation circuits, fault-tolerant to distance three or,
with postselection, distance five.

All four constructions start from the same non-fault-tolerant core: a
fan-out of CNOTs from a |+> qubit onto |0> targets in descending order, so
that a single fault on the control wire leaves an X error on a prefix of
the qubits.  Parity checks with even-size supports then localize the prefix
boundary.  Supports are read off a Hamming walk: each walk step toggles one
check bit, and the qubit where consecutive prefix classes separate joins
that check's support.  Prefixes are bucketed three per walk vertex and the
middle one is applied as the correction, leaving a remainder of weight at
most one for the other two.  Patterns of weight one never carry a
correction of weight above one, which is what makes single flag flips and
check-CNOT hook faults harmless.

Every emission verifies itself with the fault checker before returning.
Checks run on the x sector: a Z fault can only reach the data through check
CNOTs, and even-size supports guarantee the leaked operator is a product of
neighbouring-pair Z stabilizers of the cat state, so the z sector never
sees a residual above weight one.
"""

from __future__ import annotations

import numpy as np

from flagforge import ftcheck
from flagforge.circuitgen.common import (
    BoundViolated,
    CircuitBuilder,
    InconsistentTable,
    NotPowerOfTwo,
    UnknownMethod,
    DATA,
    FLAG,
)
from flagforge.circuitgen.d3 import x_weight_code
from flagforge.flagseq import gray_code, weight2_path
from flagforge.pauli import PauliOperator
from flagforge.tables import Action, CorrectionTable

__all__ = [
    "cat_prep",
    "flag_ec_bound",
    "adaptive_bound",
    "error_detect_bound",
]


def flag_ec_bound(m: int) -> int:
    """Largest cat size m parity checks can error-correct."""
    return 3 * (2**m - 2 * m + 2)


def adaptive_bound(m: int) -> int:
    """Largest cat size for m measurements when checks are branch-selected."""
    return 3 * (2**m - 2 * m + 3)


def error_detect_bound(m: int) -> int:
    """Largest cat size m measurements can error-detect to distance five."""
    return 3 * 2 ** (m - 1)


def _prefix(w: int, j: int) -> PauliOperator:
    """X on qubits 1..j of the data register."""
    bits = np.zeros(w, dtype=np.uint8)
    bits[:j] = 1
    return PauliOperator(w, bits, np.zeros(w, dtype=np.uint8))


def _fanout(b: CircuitBuilder, data: list) -> None:
    b.prep_x(data[0])
    for q in range(len(data) - 1, 0, -1):
        b.cnot(data[0], data[q])


def _verified(circuit, table, w: int, distance: int, allow_reject: bool = False):
    rep = ftcheck.check_circuit_ft(
        circuit,
        table,
        x_weight_code(w),
        distance,
        "x",
        allow_reject=allow_reject,
    )
    if not rep.passed():
        raise InconsistentTable(
            f"emitted circuit failed its own distance-{distance} check: "
            f"{rep.counterexamples[0]}"
        )
    return circuit, table


def _prefix_classes(lo: int, hi: int, first: int = 1):
    """Bucket prefix sizes lo..hi three per class, `first` sizes leading.

    The first class sits either at a walk endpoint of weight one (no
    correction) or at the all-zeros pattern, whose correction may not
    exceed weight one; it therefore holds at most two sizes.  The caller
    appends a final singleton when the walk endpoint needs one.
    """
    mids = list(range(lo + first, hi + 1))
    return [list(range(lo, lo + first))] + [
        mids[i : i + 3] for i in range(0, len(mids), 3)
    ]


def _supports(walk, boundaries, m: int, w: int, open_at: int = 1):
    """Check supports from walk toggles; bits live from one toggle (or the
    walk start, support opening at qubit open_at) to the next (or qubit w)."""
    supports = [[] for _ in range(m)]
    for i in range(m):
        if walk[0][i] == "1":
            supports[i].append(open_at)
    for step, q in enumerate(boundaries, start=1):
        diff = [i for i in range(m) if walk[step - 1][i] != walk[step][i]]
        assert len(diff) == 1
        supports[diff[0]].append(q)
    for i in range(m):
        if walk[len(boundaries)][i] == "1":
            supports[i].append(w)
        assert len(supports[i]) % 2 == 0
    return supports


def _emit_checks(b: CircuitBuilder, data, ancs, supports) -> None:
    """Parity CNOTs in fan-out order, so each lands as soon as its data
    qubit is final; prefixes of later faults never reach a read qubit."""
    w = len(data)
    for f in ancs:
        b.prep_z(f)
    for q in list(range(w, 1, -1)) + [1]:
        for i, sup in enumerate(supports):
            if q in sup:
                b.cnot(data[q - 1], ancs[i])
    for f in ancs:
        b.meas_z(f)


def _flag_ec(w: int, m: int):
    if m < 2 or w > flag_ec_bound(m):
        raise BoundViolated(
            f"{m} checks error-correct cat sizes up to {flag_ec_bound(max(m, 2))}"
        )
    path = weight2_path(m).vertices
    classes = _prefix_classes(1, w - 2) if w >= 3 else [[1]]
    if w >= 3:
        classes.append([w - 1])
    walk = path[: len(classes)]
    boundaries = [cls[0] for cls in classes[1:]]

    b = CircuitBuilder()
    data = b.qubits(DATA, w)
    ancs = b.qubits(FLAG, m)
    _fanout(b, data)
    _emit_checks(b, data, ancs, _supports(walk, boundaries, m, w))
    circuit = b.build()

    entries = {}
    for v, cls in zip(walk, classes):
        if v.count("1") >= 2:
            entries[v] = Action.correct(_prefix(w, cls[len(cls) // 2]))
        else:
            assert len(cls) == 1 and cls[0] in (1, w - 1)
    table = CorrectionTable(m, entries, Action.identity())
    if w == flag_ec_bound(m) and m >= 3:
        # fan-out plus the busiest check chain, with one step of slack for
        # the leading preparation and trailing measurement layers
        assert circuit.depth() <= (w - 1) + 2 ** (m - 2) + 2
    return _verified(circuit, table, w, 3)


def _adaptive(w: int, m: int):
    if m < 2 or w > adaptive_bound(m):
        raise BoundViolated(
            f"adaptive checks with {m} measurements reach cat sizes up to "
            f"{adaptive_bound(max(m, 2))}"
        )
    if m == 2 and w > 6:
        # The branch taken when the wrap stays silent localizes faults with
        # a single one-bit walk, which tops out at w = 6, below the formula
        # bound of 9.
        raise BoundViolated("one branch check localizes cat sizes up to 6")
    k = 3 * 2 ** (m - 1) - 2

    b = CircuitBuilder()
    data = b.qubits(DATA, w)
    red = b.qubit(FLAG)
    ancs = b.qubits(FLAG, m - 1)
    b.prep_x(data[0])
    b.prep_z(red)
    wrap_hi = min(k + 1, w)
    for q in range(w, wrap_hi, -1):
        b.cnot(data[0], data[q - 1])
    b.cnot(data[0], red)
    for q in range(wrap_hi, 1, -1):
        b.cnot(data[0], data[q - 1])
    b.cnot(data[0], red)
    rid = b.meas_z(red)

    entries = {}

    def key(red_bit, hot, cold):
        parts = [str(red_bit), "0" * (m - 1), "0" * (m - 1)]
        parts[1 if red_bit else 2] = hot if red_bit else cold
        return "".join(parts)

    # Wrapped branch: the fault is under the red flag, so the prefix ends at
    # k+1 or below.  Gray-code checks split sizes 3g..3g+2 per code word;
    # sizes 1 and 2 share the all-zeros word with its weight-one correction.
    gray = gray_code(m - 1).vertices
    in_top = min(k + 1, w - 1)
    in_classes = _prefix_classes(1, in_top, first=2 if in_top >= 2 else 1)
    assert len(in_classes) <= len(gray)
    in_walk = gray[: len(in_classes)]
    in_bounds = [cls[0] for cls in in_classes[1:]]
    b.new_segment(((rid, 1),))
    _emit_checks(b, data, ancs, _supports(in_walk, in_bounds, m - 1, min(k + 2, w)))
    entries[key(1, "0" * (m - 1), None)] = Action.correct(_prefix(w, 1))
    for v, cls in zip(in_walk[1:], in_classes[1:]):
        entries[key(1, v, None)] = Action.correct(_prefix(w, cls[len(cls) // 2]))

    # Silent branch: the fault predates the wrap (prefix size k+1 or above)
    # or postdates it (plain X on the control).  A weight-two-interior walk
    # splits the high prefixes; its first vertex only anchors the supports,
    # since size-k prefixes always raise the red flag.
    b.new_segment(((rid, 0),))
    if w - 1 > k:
        out_classes = _prefix_classes(k, w - 1)
        out_path = (
            weight2_path(m - 1).vertices if m >= 3 else ("1", "0")
        )
        assert len(out_classes) <= len(out_path)
        out_walk = out_path[: len(out_classes)]
        out_bounds = [cls[0] for cls in out_classes[1:]]
        _emit_checks(
            b, data, ancs, _supports(out_walk, out_bounds, m - 1, w, open_at=k)
        )
        for v, cls in zip(out_walk[1:], out_classes[1:]):
            if v.count("1") >= 2:
                entries[key(0, None, v)] = Action.correct(
                    _prefix(w, cls[len(cls) // 2])
                )
            else:
                assert cls == [w - 1]
    else:
        _emit_checks(b, data, ancs, [[] for _ in range(m - 1)])

    circuit = b.build()
    table = CorrectionTable(1 + 2 * (m - 1), entries, Action.identity())
    return _verified(circuit, table, w, 3)


def _error_detect(w: int, m: int):
    if m < 2 or w > error_detect_bound(m):
        raise BoundViolated(
            f"{m} measurements error-detect cat sizes up to "
            f"{error_detect_bound(max(m, 2))}"
        )
    cycle = gray_code(m - 1).vertices
    boundaries = [q for q in range(2, w) if q % 3 == 2]
    walk = [cycle[j % len(cycle)] for j in range(len(boundaries) + 1)]

    b = CircuitBuilder()
    data = b.qubits(DATA, w)
    red = b.qubit(FLAG)
    ancs = b.qubits(FLAG, m - 1)
    b.prep_x(data[0])
    b.prep_z(red)
    b.cnot(data[0], red)
    for q in range(w, 1, -1):
        b.cnot(data[0], data[q - 1])
    b.cnot(data[0], red)
    rid = b.meas_z(red)
    assert rid == 0
    _emit_checks(b, data, ancs, _supports(walk, boundaries, m - 1, w))
    circuit = b.build()

    table = CorrectionTable(m, {"0" * m: Action.identity()}, Action.reject())
    return _verified(circuit, table, w, 5, allow_reject=True)


def _parallel(w: int):
    half = w // 2
    if w < 2 or half & (half - 1) or w % 2:
        raise NotPowerOfTwo(f"tree preparation needs w = 2^j * 2, got {w}")

    b = CircuitBuilder()
    data = b.qubits(DATA, w)
    ancs = b.qubits(FLAG, half)
    b.prep_x(data[0])
    s = half
    while s >= 1:
        for i in range(1, w + 1 - s, 2 * s):
            b.cnot(data[i - 1], data[i + s - 1])
        s //= 2
    checks = [(i, half + 2 * i - 1) for i in range(1, half // 2 + 1)]
    checks += [(i, 2 * i) for i in range(half // 2 + 1, half + 1)]
    for f in ancs:
        b.prep_z(f)
    b.at_frontier(*ancs)
    for (qa, qb), f in zip(checks, ancs):
        b.cnot(data[qa - 1], f)
        b.cnot(data[qb - 1], f)
    for f in ancs:
        b.meas_z(f)
    circuit = b.build()

    table = ftcheck.derive_correction_table(circuit, x_weight_code(w), "x")
    assert circuit.depth() == int(np.log2(w)) + 4
    return _verified(circuit, table, w, 3)


def cat_prep(w: int, method: str, m: int = None):
    """Emit a w-qubit cat state preparation circuit and its outcome table.

    method selects the construction: "flag_ec" (m parity checks, corrects
    any single fault), "adaptive" (checks chosen by a mid-circuit flag
    measurement, reaching slightly larger w per measurement), "error_detect"
    (postselecting variant, fault-tolerant to distance five), or "parallel"
    (logarithmic-depth tree, one check per qubit pair).  m defaults to the
    smallest measurement count whose bound covers w.
    """
    if w < 2:
        raise BoundViolated(f"no cat state on {w} qubit(s)")
    bounds = {
        "flag_ec": flag_ec_bound,
        "adaptive": adaptive_bound,
        "error_detect": error_detect_bound,
    }
    if method == "parallel":
        return _parallel(w)
    if method not in bounds:
        raise UnknownMethod(f"no cat preparation method named {method!r}")
    if m is None:
        m = 2
        while bounds[method](m) < w or (method == "adaptive" and m == 2 and w > 6):
            m += 1
    builders = {
        "flag_ec": _flag_ec,
        "adaptive": _adaptive,
        "error_detect": _error_detect,
    }
    return builders[method](w, m)
