"""Distance-5 and distance-7 stabilizer measurement generators."""

import pytest

from flagforge import ftcheck as ft
from flagforge.circuitgen import (
    InconsistentTable,
    UnsupportedWeight,
    stab_meas_d5,
    stab_meas_d7,
    x_weight_code,
)
from flagforge.circuitgen.d57 import (
    D5_CLOSE_ORDER,
    D7_CLOSE_ORDER,
    _window_events,
)
from flagforge.pauli import CNOT, DATA, FLAG, SYNDROME


def n_flags(circ):
    return sum(1 for r in circ.roles if r == FLAG)


def syndrome_cnot_targets(circ):
    s = circ.roles.index(SYNDROME)
    out = []
    for seg in circ.segments:
        for loc in seg.locations:
            if loc.kind == CNOT and loc.qubits[0] == s:
                out.append(loc.qubits[1])
    return out


def flag_runs(circ):
    """Lengths of the flag-CNOT runs delimited by data CNOTs."""
    runs, cur = [], 0
    for t in syndrome_cnot_targets(circ):
        if circ.roles[t] == FLAG:
            cur += 1
        else:
            runs.append(cur)
            cur = 0
    runs.append(cur)
    return runs


def max_open_flags(circ):
    opened = set()
    now = best = 0
    for t in syndrome_cnot_targets(circ):
        if circ.roles[t] != FLAG:
            continue
        if t in opened:
            now -= 1
        else:
            opened.add(t)
            now += 1
            best = max(best, now)
    return best


class TestWindowEvents:
    @pytest.mark.parametrize("nf", [5, 6, 9, 14])
    def test_each_flag_opens_then_closes_once(self, nf):
        events = _window_events(nf, 5, D5_CLOSE_ORDER)
        assert len(events) == 2 * nf
        for j in range(nf):
            assert [k for k, f in events if f == j] == ["open", "close"]

    @pytest.mark.parametrize("nf,window", [(9, 5), (13, 7)])
    def test_window_held_until_the_tail(self, nf, window):
        order = D5_CLOSE_ORDER if window == 5 else D7_CLOSE_ORDER
        now = 0
        history = []
        for kind, _ in _window_events(nf, window, order):
            now += 1 if kind == "open" else -1
            history.append(now)
        assert max(history) == window
        # between the opening ramp and the closing tail the count
        # oscillates between window and window - 1
        mid = history[window : -(window - 1)]
        assert set(mid) == {window - 1, window}

    def test_first_victim_is_the_second_oldest(self):
        events = _window_events(6, 5, D5_CLOSE_ORDER)
        assert events[5] == ("close", 1)
        assert events[6] == ("open", 5)


class TestD5:
    @pytest.mark.parametrize("w", [6, 7, 8])
    def test_small_weights_use_seven_ancillas(self, w):
        circ, _ = stab_meas_d5(w)
        assert n_flags(circ) + 1 == 7

    @pytest.mark.parametrize("w,a", [(10, 7), (12, 8), (17, 11), (22, 13)])
    def test_ancilla_count_meets_the_bound(self, w, a):
        circ, _ = stab_meas_d5(w)
        assert n_flags(circ) + 1 == a
        assert w <= 2 * a - 4

    @pytest.mark.parametrize("w", [6, 7, 8, 10, 13])
    def test_distance_five_exhaustive(self, w):
        circ, table = stab_meas_d5(w)
        rep = ft.check_circuit_ft(circ, table, x_weight_code(w), 5, "x")
        assert rep.passed()
        assert rep.fault_sets_examined > 1000

    def test_five_flags_open_at_any_instant(self):
        circ, _ = stab_meas_d5(16)
        assert max_open_flags(circ) == 5

    def test_data_window_is_right_aligned(self):
        # even w leaves two flag closures after the last data CNOT, odd
        # w three
        even, _ = stab_meas_d5(8)
        assert flag_runs(even)[-1] == 2
        odd, _ = stab_meas_d5(9)
        assert flag_runs(odd)[-1] == 3

    def test_weight_floor(self):
        with pytest.raises(UnsupportedWeight):
            stab_meas_d5(5)

    def test_measurement_count(self):
        circ, _ = stab_meas_d5(12)
        assert len(list(circ.measurement_locations())) == n_flags(circ) + 1


class TestD7:
    def test_w17_shape(self, d7_w17):
        circ, table = d7_w17
        assert n_flags(circ) == 18
        assert max_open_flags(circ) == 7
        assert table.key_width == 18
        assert len(table.entries) > 5000

    def test_w17_gap_structure(self, d7_w17):
        circ, _ = d7_w17
        # one leading flag CNOT, then the doubled spacing with the four
        # tripled gaps centered, then a single gap before the last data
        # CNOT, which ends the circuit
        assert flag_runs(circ) == [1] + [2] * 6 + [3] * 4 + [2] * 5 + [1, 0]

    def test_w17_single_and_double_faults_exhaustive(self, d7_w17):
        circ, table = d7_w17
        rep = ft.check_circuit_ft(
            circ, table, x_weight_code(17), 7, "x", exhaustive_order=2
        )
        assert rep.passed()
        assert rep.fault_sets_examined > 10000

    def test_weight_floor(self):
        with pytest.raises(UnsupportedWeight):
            stab_meas_d7(7)

    def test_w8_admits_no_consistent_table(self):
        # the written schedule only becomes distance-7 consistent at
        # larger weights; the generator must refuse rather than return
        # a table it cannot verify
        with pytest.raises(InconsistentTable):
            stab_meas_d7(8)
