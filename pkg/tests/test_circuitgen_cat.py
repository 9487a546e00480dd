"""Cat state preparation generators."""

import pytest

from flagforge import ftcheck as ft
from flagforge.circuitgen import (
    BoundViolated,
    NotPowerOfTwo,
    UnknownMethod,
    adaptive_bound,
    cat_prep,
    error_detect_bound,
    flag_ec_bound,
    x_weight_code,
)
from flagforge.codes import StabilizerCode
from flagforge.pauli import FLAG, PauliOperator
from flagforge.tables import Action, CorrectionTable


def xop(n, qubits):
    bits = [0] * n
    for q in qubits:
        bits[q] = 1
    return PauliOperator(n, x_bits=bits)


def xprefix(n, j):
    return xop(n, range(j))


def zop(n, qubits):
    bits = [0] * n
    for q in qubits:
        bits[q] = 1
    return PauliOperator(n, z_bits=bits)


def cat_code(w):
    # both stabilizer sectors, for full-sector fault sweeps
    return StabilizerCode(
        w,
        x_stabs=(xop(w, range(w)),),
        z_stabs=tuple(zop(w, [i, i + 1]) for i in range(w - 1)),
    )


class TestFlagEc:
    def test_w12_m3_corrections_frozen(self):
        # triples of fan-out prefixes share a pattern; the middle one is the
        # correction, and the weight-one patterns correct nothing
        _, table = cat_prep(12, "flag_ec", 3)
        assert table.entries == {
            "110": Action.correct(xprefix(12, 3)),
            "111": Action.correct(xprefix(12, 6)),
            "011": Action.correct(xprefix(12, 9)),
        }
        assert table.lookup("100").is_identity()
        assert table.lookup("001").is_identity()
        assert table.lookup("010").is_identity()

    @pytest.mark.parametrize("m,w", [(3, 12), (4, 30), (2, 6), (3, 9), (4, 20)])
    def test_distance_three_exhaustive(self, m, w):
        circ, table = cat_prep(w, "flag_ec", m)
        assert ft.check_circuit_ft(circ, table, x_weight_code(w), 3, "x").passed()

    def test_all_sectors_single_fault(self):
        # Z faults leak through check CNOTs only as neighbour-pair products
        circ, table = cat_prep(12, "flag_ec", 3)
        assert ft.check_circuit_ft(circ, table, cat_code(12), 3, "full").passed()

    def test_bound_examples(self):
        assert flag_ec_bound(3) == 12
        assert flag_ec_bound(4) == 30
        with pytest.raises(BoundViolated):
            cat_prep(13, "flag_ec", 3)
        with pytest.raises(BoundViolated):
            cat_prep(4, "flag_ec", 1)

    def test_default_m_is_minimal(self):
        _, table = cat_prep(12, "flag_ec")
        assert table.key_width == 3
        _, table = cat_prep(13, "flag_ec")
        assert table.key_width == 4

    @pytest.mark.parametrize("w", [2, 3])
    def test_tiny_cats(self, w):
        circ, table = cat_prep(w, "flag_ec", 2)
        assert ft.check_circuit_ft(circ, table, x_weight_code(w), 3, "x").passed()

    def test_w2_has_no_corrections(self):
        _, table = cat_prep(2, "flag_ec", 2)
        assert not table.entries

    def test_checker_catches_a_broken_table(self):
        circ, table = cat_prep(12, "flag_ec", 3)
        bad = dict(table.entries)
        bad["111"] = Action.identity()
        rep = ft.check_circuit_ft(
            circ,
            CorrectionTable(3, bad, Action.identity()),
            x_weight_code(12),
            3,
            "x",
        )
        assert not rep.passed() and rep.counterexamples


class TestAdaptive:
    def test_w15_m3_entries_frozen(self):
        # key bits: wrap flag, then the checks of the wrapped branch, then
        # the checks of the silent branch
        _, table = cat_prep(15, "adaptive", 3)
        assert table.entries == {
            "10000": Action.correct(xprefix(15, 1)),
            "11000": Action.correct(xprefix(15, 4)),
            "11100": Action.correct(xprefix(15, 7)),
            "10100": Action.correct(xprefix(15, 10)),
            "00011": Action.correct(xprefix(15, 12)),
        }

    @pytest.mark.parametrize("m,w", [(3, 15), (3, 13), (2, 6), (4, 27)])
    def test_distance_three_exhaustive(self, m, w):
        circ, table = cat_prep(w, "adaptive", m)
        assert ft.check_circuit_ft(circ, table, x_weight_code(w), 3, "x").passed()

    def test_branches_condition_on_the_wrap_flag(self):
        circ, _ = cat_prep(15, "adaptive", 3)
        conds = [seg.condition for seg in circuit_segments(circ)]
        assert conds == [(), ((0, 1),), ((0, 0),)]

    def test_two_measurements_stop_at_six(self):
        # the silent branch's single check cannot split sizes beyond w = 6,
        # short of the formula bound of 9
        cat_prep(6, "adaptive", 2)
        for w in (7, 9):
            with pytest.raises(BoundViolated):
                cat_prep(w, "adaptive", 2)

    def test_bound_examples(self):
        assert adaptive_bound(3) == 15
        with pytest.raises(BoundViolated):
            cat_prep(16, "adaptive", 3)

    def test_default_m_skips_the_capped_dimension(self):
        _, table = cat_prep(7, "adaptive")
        assert table.key_width == 5


class TestErrorDetect:
    def test_w12_m3_distance_five_exhaustive(self):
        circ, table = cat_prep(12, "error_detect", 3)
        rep = ft.check_circuit_ft(
            circ, table, x_weight_code(12), 5, "x", allow_reject=True
        )
        assert rep.passed()

    def test_table_rejects_every_nonzero_pattern(self):
        _, table = cat_prep(12, "error_detect", 3)
        assert table.entries == {"000": Action.identity()}
        assert table.default.is_reject()
        assert table.lookup("010").is_reject()

    def test_bound_examples(self):
        assert error_detect_bound(3) == 12
        with pytest.raises(BoundViolated):
            cat_prep(13, "error_detect", 3)

    @pytest.mark.parametrize("m,w", [(2, 6), (3, 10), (4, 24)])
    def test_other_sizes(self, m, w):
        circ, table = cat_prep(w, "error_detect", m)
        rep = ft.check_circuit_ft(
            circ, table, x_weight_code(w), 5, "x", allow_reject=True
        )
        assert rep.passed()


class TestParallel:
    def test_w8_check_pairs(self):
        # a fault on qubit 5's wire between doubling rounds leaves X on 5,6
        # and trips exactly the checks reading qubits 5 and 6; the stored
        # correction must cancel that error to weight <= 1
        _, table = cat_prep(8, "parallel")
        act = table.lookup("1010")
        assert act.is_correct()
        residual = act.pauli * xop(8, [4, 5])
        assert min(residual.weight(), (residual * xop(8, range(8))).weight()) <= 1

    @pytest.mark.parametrize("w", [2, 4, 8, 16])
    def test_distance_three_exhaustive(self, w):
        circ, table = cat_prep(w, "parallel")
        assert ft.check_circuit_ft(circ, table, x_weight_code(w), 3, "x").passed()

    @pytest.mark.parametrize("w", [6, 7, 12])
    def test_rejects_non_power_of_two(self, w):
        with pytest.raises(NotPowerOfTwo):
            cat_prep(w, "parallel")

    def test_logarithmic_depth(self):
        for w, want in [(8, 7), (16, 8)]:
            circ, _ = cat_prep(w, "parallel")
            assert circ.depth() == want


def circuit_segments(circ):
    return circ.segments


class TestDispatch:
    def test_unknown_method(self):
        with pytest.raises(UnknownMethod):
            cat_prep(8, "majority_vote")

    def test_degenerate_size(self):
        with pytest.raises(BoundViolated):
            cat_prep(1, "flag_ec", 2)

    def test_tables_serialize_round_trip(self):
        _, table = cat_prep(15, "adaptive", 3)
        again = CorrectionTable.from_json(table.to_json())
        assert again.to_json() == table.to_json()
