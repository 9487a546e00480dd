"""Fault-injection checker oracles: hand-analyzed circuits and sequences with
known verdicts, replay cross-checks, and derivation round trips."""

import pytest
from hypothesis import given, settings, strategies as st

from flagforge import ftcheck as ft
from flagforge.codes import MeasurementSequence, StabilizerCode, make_code, reduce_weight
from flagforge.pauli import (
    CNOT,
    DATA,
    FLAG,
    MEAS_X,
    MEAS_Z,
    PREP_X,
    PREP_Z,
    SYNDROME,
    CliffordCircuit,
    Location,
    PauliOperator,
    Segment,
    propagate,
    single_fault_events,
)
from flagforge.tables import Action, CorrectionTable


def xop(n, sup):
    return PauliOperator.from_support(n, xs=sup)


def zop(n, sup):
    return PauliOperator.from_support(n, zs=sup)


def weight_meas_code(w):
    """Zero-logical code whose only generator is the measured X stabilizer."""
    return StabilizerCode(w, x_stabs=(xop(w, range(w)),), z_stabs=())


def parity_circuit(w, flag_plan):
    """X^w measurement: syndrome controls a CNOT onto each data qubit in
    order, with flag open/close CNOTs spliced in per flag_plan, a list of
    (position, flag_index) pairs where position p means before data CNOT p.
    """
    n_flags = max(f for _, f in flag_plan) + 1 if flag_plan else 0
    s = w
    flags = [w + 1 + i for i in range(n_flags)]
    locs = [Location(PREP_X, (s,), 0)]
    locs += [Location(PREP_Z, (f,), 0) for f in flags]
    events = sorted(
        [(p, 0, f) for p, f in flag_plan] + [(p, 1, None) for p in range(w)]
    )
    t = 1
    next_data = 0
    for _, is_data, f in events:
        if is_data:
            locs.append(Location(CNOT, (s, next_data), t))
            next_data += 1
        else:
            locs.append(Location(CNOT, (s, flags[f]), t))
        t += 1
    locs.append(Location(MEAS_X, (s,), t, out_id=0))
    for i, f in enumerate(flags):
        locs.append(Location(MEAS_Z, (f,), t, out_id=i + 1))
    roles = [DATA] * w + [SYNDROME] + [FLAG] * n_flags
    return CliffordCircuit(w + 1 + n_flags, [Segment((), locs)], roles)


# two-flag weight-4 layout: open f0, d1, d2, open f1, d3, d4, close f0, close f1
TWO_FLAG_W4 = [(0, 0), (2, 1), (4, 0), (4, 1)]
# one flag wrapped around the middle two data interactions
ONE_FLAG_W4 = [(1, 0), (3, 0)]


class TestCircuitChecker:
    def test_two_flag_w4_table_and_verdicts(self):
        circ = parity_circuit(4, TWO_FLAG_W4)
        code = weight_meas_code(4)
        table = ft.derive_correction_table(circ, code, "x")
        assert {k: a.to_string() for k, a in table.entries.items()} == {
            "10": "correct:XIII",
            "11": "correct:IIIX",
        }
        assert ft.check_circuit_ft(circ, table, code, 3, "x").passed()
        assert ft.check_circuit_ft(circ, table, code, 3, "full").passed()

    def test_one_flag_w4_is_not_correctable(self):
        circ = parity_circuit(4, ONE_FLAG_W4)
        code = weight_meas_code(4)
        with pytest.raises(ValueError):
            ft.derive_correction_table(circ, code, "x")
        table = ft.derive_correction_table(circ, code, "x", on_inconsistent="best")
        report = ft.check_circuit_ft(circ, table, code, 3, "x")
        assert not report.passed()

    @pytest.mark.parametrize("w", [5, 6, 8])
    def test_one_flag_family_fails(self, w):
        plan = [(1, 0), (w - 1, 0)]
        circ = parity_circuit(w, plan)
        code = weight_meas_code(w)
        table = ft.derive_correction_table(circ, code, "x", on_inconsistent="best")
        assert not ft.check_circuit_ft(circ, table, code, 3, "x").passed()

    def test_counterexamples_replay(self):
        circ = parity_circuit(4, ONE_FLAG_W4)
        code = weight_meas_code(4)
        table = ft.derive_correction_table(circ, code, "x", on_inconsistent="best")
        report = ft.check_circuit_ft(circ, table, code, 3, "x")
        assert report.counterexamples
        for cex in report.counterexamples:
            pattern, resid = ft.replay_fault_set(circ, cex.fault_set)
            assert pattern == cex.flag_pattern
            act = table.lookup(pattern)
            if act.is_correct():
                resid = resid * act.pauli
            reduced, certified = reduce_weight(resid, code, return_certificate=True)
            assert certified
            assert reduced.weight() == cex.residual_weight

    def test_missing_entry_raised_without_default(self):
        circ = parity_circuit(4, TWO_FLAG_W4)
        code = weight_meas_code(4)
        full = ft.derive_correction_table(circ, code, "x")
        gapped = CorrectionTable(
            full.key_width,
            {"11": full.entries["11"]},
            None,
        )
        with pytest.raises(ft.MissingEntry):
            ft.check_circuit_ft(circ, gapped, code, 3, "x")

    def test_fault_free_run_must_be_untouched(self):
        circ = parity_circuit(4, TWO_FLAG_W4)
        code = weight_meas_code(4)
        table = CorrectionTable(2, {"00": Action.correct(xop(4, [0]))})
        report = ft.check_circuit_ft(circ, table, code, 3, "x")
        assert not report.passed()
        assert any("fault-free" in c.note for c in report.counterexamples)

    def test_mutated_circuit_fails_under_good_table(self):
        circ = parity_circuit(4, TWO_FLAG_W4)
        code = weight_meas_code(4)
        table = ft.derive_correction_table(circ, code, "x")
        # delay the second flag's opening past its first data interaction
        mutated = parity_circuit(4, [(0, 0), (3, 1), (4, 0), (4, 1)])
        assert not ft.check_circuit_ft(mutated, table, code, 3, "x").passed()

    def test_report_json_round_trip_fields(self):
        circ = parity_circuit(4, ONE_FLAG_W4)
        code = weight_meas_code(4)
        table = ft.derive_correction_table(circ, code, "x", on_inconsistent="best")
        report = ft.check_circuit_ft(circ, table, code, 3, "x")
        d = report.to_json_dict()
        assert d["verdict"] == "fail"
        assert d["distance_claimed"] == 3
        assert d["counterexamples"][0]["fault_set"][0]["site"]

    def test_effect_composition_is_linear(self):
        circ = parity_circuit(6, [(0, 0), (2, 1), (4, 0), (4, 1)])
        events = single_fault_events(circ, "x_only")
        singles = {}
        data = circ.qubits_with_role(DATA)
        for ev in events:
            res = propagate(circ, [ev])
            singles[ev] = (res.flag_string(), res.residual.restricted(data))
        import random

        rng = random.Random(7)
        for _ in range(50):
            a, b = rng.sample(events, 2)
            if a.site == b.site:
                continue
            res = propagate(circ, [a, b])
            fa, ra = singles[a]
            fb, rb = singles[b]
            want_flags = "".join(str(int(x) ^ int(y)) for x, y in zip(fa, fb))
            assert res.flag_string() == want_flags
            assert res.residual.restricted(data) == ra * rb


REP3 = StabilizerCode(
    3,
    x_stabs=(),
    z_stabs=(zop(3, [0, 1]), zop(3, [1, 2])),
    logical_x=(xop(3, [0, 1, 2]),),
    logical_z=(zop(3, [0]),),
    name="rep3",
)


def overlap_flag_circuit():
    """Both two-qubit faults (X0X1 and X1X2) light both flags; the only
    correction within weight one of each is their shared qubit, X1, which
    is not itself any single fault's residual.
    """
    locs = [
        Location(PREP_Z, (3,), 0),
        Location(PREP_Z, (4,), 0),
        Location(CNOT, (0, 1), 1),
        Location(CNOT, (2, 1), 2),
        Location(CNOT, (0, 3), 3),
        Location(CNOT, (2, 3), 4),
        Location(CNOT, (1, 4), 5),
        Location(MEAS_Z, (3,), 6, out_id=0),
        Location(MEAS_Z, (4,), 6, out_id=1),
    ]
    roles = [DATA] * 3 + [FLAG, FLAG]
    return CliffordCircuit(5, [Segment((), locs)], roles)


class TestDerivedCorrections:
    def test_midpoint_correction_between_residuals(self):
        circ = overlap_flag_circuit()
        table = ft.derive_correction_table(circ, REP3, "x")
        assert table.entries["11"] == Action.correct(xop(3, [1]))
        assert ft.check_circuit_ft(circ, table, REP3, 3, "x").passed()

    def test_inconsistent_pattern_still_raises(self):
        # fanning X0 out to X0X1X2 leaves no weight-one-compatible fix for
        # a pattern whose members are {X0X1X2, X1} with bound one each
        locs = [
            Location(PREP_Z, (3,), 0),
            Location(CNOT, (0, 1), 1),
            Location(CNOT, (0, 2), 2),
            Location(CNOT, (0, 3), 3),
            Location(CNOT, (1, 3), 4),
            Location(MEAS_Z, (3,), 5, out_id=0),
        ]
        circ = CliffordCircuit(4, [Segment((), locs)], [DATA] * 3 + [FLAG])
        code = StabilizerCode(3, x_stabs=(), z_stabs=(zop(3, [0, 1]),))
        with pytest.raises(ValueError):
            ft.derive_correction_table(circ, code, "x")
        table = ft.derive_correction_table(circ, code, "x", on_inconsistent="best")
        assert not ft.check_circuit_ft(circ, table, code, 3, "x").passed()


class TestSequenceChecker:
    def test_two_check_repetition_readout_fails(self):
        seq = MeasurementSequence(REP3, ((zop(3, [0, 1]),), (zop(3, [0, 2]),)))
        with pytest.raises(ValueError):
            ft.derive_sequence_table(REP3, seq, 3, "error_correction")
        table = ft.derive_sequence_table(
            REP3, seq, 3, "error_correction", on_inconsistent="best"
        )
        report = ft.check_sequence_ft(REP3, seq, table, 3, "error_correction")
        assert not report.passed()
        notes = {c.note for c in report.counterexamples}
        assert any("aliases" in n for n in notes) or "" in notes

    def test_three_check_repetition_readout_passes(self):
        seq = MeasurementSequence(
            REP3, ((zop(3, [0, 1]),), (zop(3, [0, 2]),), (zop(3, [1, 2]),))
        )
        table = ft.derive_sequence_table(REP3, seq, 3, "error_correction")
        report = ft.check_sequence_ft(REP3, seq, table, 3, "error_correction")
        assert report.passed(), [c.to_json_dict() for c in report.counterexamples]

    def test_three_check_decoder_corrects_single_inputs(self):
        seq = MeasurementSequence(
            REP3, ((zop(3, [0, 1]),), (zop(3, [0, 2]),), (zop(3, [1, 2]),))
        )
        table = ft.derive_sequence_table(REP3, seq, 3, "error_correction")
        # syndromes of X0, X1, X2 under checks Z01, Z02, Z12
        for q, bits in [(0, (1, 1, 0)), (1, (1, 0, 1)), (2, (0, 1, 1))]:
            act = ft.decode_sequence_outcomes(
                REP3, seq, table, bits, "error_correction"
            )
            assert act.is_correct() and act.pauli == xop(3, [q])

    def test_cat3_prep_single_round_passes(self):
        cat3 = make_code("cat(3)")
        seq = MeasurementSequence(cat3, ((zop(3, [0, 1]),), (zop(3, [0, 2]),)))
        table = ft.derive_sequence_table(cat3, seq, 3, "state_preparation")
        report = ft.check_sequence_ft(cat3, seq, table, 3, "state_preparation")
        assert report.passed(), [c.to_json_dict() for c in report.counterexamples]

    def test_underdetermined_prep_reports_input_leakage(self):
        cat4 = make_code("cat(4)")
        seq = MeasurementSequence(cat4, ((zop(4, [0, 1]),),))
        table = ft.derive_sequence_table(
            cat4, seq, 3, "state_preparation", on_inconsistent="best"
        )
        report = ft.check_sequence_ft(cat4, seq, table, 3, "state_preparation")
        assert not report.passed()
        assert any("undetectable input" in c.note for c in report.counterexamples)

    def test_cat4_single_pass_chain_prep_fails(self):
        # a flip of the middle check aliases the weight-two pattern X2X3,
        # so one pass over the chain cannot prepare the state tolerantly
        cat4 = make_code("cat(4)")
        seq = MeasurementSequence(
            cat4, ((zop(4, [0, 1]),), (zop(4, [1, 2]),), (zop(4, [2, 3]),))
        )
        table = ft.derive_sequence_table(
            cat4, seq, 3, "state_preparation", on_inconsistent="best"
        )
        report = ft.check_sequence_ft(cat4, seq, table, 3, "state_preparation")
        assert not report.passed()
        kinds = {c.fault_set[0].kind for c in report.counterexamples if c.fault_set}
        assert "flip" in kinds or "deposit" in kinds

    def test_cat4_chain_with_two_recheck_rounds_passes(self):
        cat4 = make_code("cat(4)")
        checks = [[0, 1], [1, 2], [2, 3], [1, 2], [0, 1]]
        seq = MeasurementSequence(cat4, tuple((zop(4, c),) for c in checks))
        table = ft.derive_sequence_table(cat4, seq, 3, "state_preparation")
        report = ft.check_sequence_ft(cat4, seq, table, 3, "state_preparation")
        assert report.passed(), [c.to_json_dict() for c in report.counterexamples]

    def test_prep_mode_needs_state_for_logical_codes(self):
        seq = MeasurementSequence(REP3, ((zop(3, [0, 1]),), (zop(3, [1, 2]),)))
        with pytest.raises(ft.ModeMismatch):
            ft.derive_sequence_table(REP3, seq, 3, "state_preparation", state=None)

    def test_search_finds_repetition_readout(self):
        found = ft.search_ft_sequence(
            REP3,
            3,
            {
                "allowed_stabilizers": [zop(3, [0, 1]), zop(3, [0, 2]), zop(3, [1, 2])],
                "max_steps": 4,
                "trials": 200,
            },
            seed=11,
        )
        assert not isinstance(found, ft.NotFound)
        seq, table = found
        assert ft.check_sequence_ft(REP3, seq, table, 3, "error_correction").passed()

    def test_search_reports_not_found(self):
        found = ft.search_ft_sequence(
            REP3,
            3,
            {"n_measurements": 1, "max_steps": 1, "trials": 20},
            seed=0,
        )
        assert isinstance(found, ft.NotFound)
        assert found.trials == 20

    def test_search_is_deterministic(self):
        cons = {
            "allowed_stabilizers": [zop(3, [0, 1]), zop(3, [0, 2]), zop(3, [1, 2])],
            "max_steps": 4,
            "trials": 200,
        }
        a = ft.search_ft_sequence(REP3, 3, cons, seed=3)
        b = ft.search_ft_sequence(REP3, 3, cons, seed=3)
        assert not isinstance(a, ft.NotFound)
        assert a[0].to_json_dict() == b[0].to_json_dict()


class TestSectorReducer:
    def test_parity_group_matches_enumeration(self):
        # chain of adjacent pairs spans the even subspace on 6 qubits
        gens = [0b000011, 0b000110, 0b001100, 0b011000, 0b110000]
        red = ft._SectorReducer(gens, 6)
        assert red._strategy == "parity"
        span = [0]
        for g in gens:
            span += [s ^ g for s in span]
        for v in range(64):
            want = min((v ^ s).bit_count() for s in set(span))
            assert red.weight(v) == want
        assert red.min_rep(1) == 0b100000

    @given(st.lists(st.integers(min_value=1, max_value=255), max_size=5), st.integers(0, 255))
    @settings(max_examples=200, deadline=None)
    def test_enum_strategy_is_exact(self, gens, v):
        red = ft._SectorReducer(gens, 8)
        span = {0}
        for g in gens:
            span |= {s ^ g for s in span}
        assert red.weight(v) == min((v ^ s).bit_count() for s in span)
        rep = red.min_rep(v)
        assert rep ^ v in span
        assert rep.bit_count() == red.weight(v)

    def test_min_rep_prefers_trailing_support(self):
        red = ft._SectorReducer([0b1111], 4)
        assert red.min_rep(0b0111) == 0b1000
