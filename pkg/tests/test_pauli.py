"""Pauli algebra and fault propagation basics."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from flagforge.pauli import (
    CNOT,
    DATA,
    FLAG,
    MEAS_FLIP,
    MEAS_Z,
    MEAS_X,
    PREP_FLIP,
    PREP_Z,
    PREP_X,
    SYNDROME,
    CliffordCircuit,
    ContainsMeasurement,
    FaultEvent,
    InvalidSite,
    Location,
    PauliOperator,
    Segment,
    conjugate_through,
    count_fault_sets,
    enumerate_fault_sets,
    propagate,
    single_fault_events,
)


def pauli(label):
    return PauliOperator.from_label(label)


class TestPauliOperator:
    def test_product_is_xor(self):
        assert pauli("XZ") * pauli("ZZ") == pauli("YI")

    def test_self_inverse(self):
        p = pauli("XYZI")
        assert (p * p).is_identity()

    def test_weights(self):
        p = pauli("XYZI")
        assert p.weight() == 3
        assert p.x_weight() == 2
        assert p.z_weight() == 2

    def test_commutation(self):
        assert not pauli("X").commutes_with(pauli("Z"))
        assert pauli("XX").commutes_with(pauli("ZZ"))

    @given(st.integers(1, 8), st.data())
    def test_weight_subadditive(self, n, data):
        bits = st.lists(st.integers(0, 1), min_size=n, max_size=n)
        p = PauliOperator(n, data.draw(bits), data.draw(bits))
        q = PauliOperator(n, data.draw(bits), data.draw(bits))
        assert (p * q).weight() <= p.weight() + q.weight()

    def test_label_roundtrip(self):
        assert pauli("IXZY").label() == "IXZY"


def single_cnot():
    segs = [Segment((), (Location(CNOT, (0, 1), 0),))]
    return CliffordCircuit(2, segs, (DATA, DATA))


class TestConjugation:
    def test_x_spreads_to_target(self):
        assert conjugate_through(single_cnot(), pauli("XI")) == pauli("XX")

    def test_z_spreads_to_control(self):
        assert conjugate_through(single_cnot(), pauli("IZ")) == pauli("ZZ")

    def test_identity_fixed(self):
        assert conjugate_through(single_cnot(), pauli("II")) == pauli("II")

    def test_linearity(self):
        c = single_cnot()
        p, q = pauli("XZ"), pauli("ZX")
        assert conjugate_through(c, p * q) == conjugate_through(c, p) * conjugate_through(c, q)

    def test_rejects_measurement(self):
        segs = [
            Segment((), (Location(PREP_Z, (0,), 0), Location(MEAS_Z, (0,), 1, 0))),
        ]
        circ = CliffordCircuit(1, segs, (DATA,))
        with pytest.raises(ContainsMeasurement):
            conjugate_through(circ, pauli("I"))


def small_flag_circuit():
    """|+> syndrome 0 controls data 1,2 with a flag 3 in between."""
    locs = [
        Location(PREP_X, (0,), 0),
        Location(PREP_Z, (3,), 0),
        Location(CNOT, (0, 1), 1),
        Location(CNOT, (0, 3), 2),
        Location(CNOT, (0, 2), 3),
        Location(MEAS_Z, (3,), 4, 0),
        Location(MEAS_X, (0,), 4, 1),
    ]
    roles = (SYNDROME, DATA, DATA, FLAG)
    return CliffordCircuit(4, [Segment((), locs)], roles)


class TestPropagate:
    def test_fault_free(self):
        res = propagate(small_flag_circuit())
        assert res.flag_bits == (0,)
        assert res.meas_bits == (0,)
        assert res.residual.is_identity()

    def test_control_fault_spreads_and_flags(self):
        # X after the first data CNOT flips the flag and the later data qubit;
        # the syndrome wire itself is cleared by its own measurement
        circ = small_flag_circuit()
        fault = FaultEvent((0, 2), pauli("XI"))
        res = propagate(circ, [fault])
        assert res.flag_bits == (1,)
        assert res.residual == PauliOperator.from_support(4, xs=[2])

    def test_meas_flip(self):
        circ = small_flag_circuit()
        res = propagate(circ, [FaultEvent((0, 5), MEAS_FLIP)])
        assert res.flag_bits == (1,)
        assert res.residual.is_identity()

    def test_prep_flip_on_plus_flips_x_meas(self):
        circ = small_flag_circuit()
        res = propagate(circ, [FaultEvent((0, 0), PREP_FLIP)])
        assert res.meas_bits == (1,)

    def test_invalid_site(self):
        with pytest.raises(InvalidSite):
            propagate(small_flag_circuit(), [FaultEvent((5, 0), MEAS_FLIP)])

    def test_linearity_of_disjoint_faults(self):
        circ = small_flag_circuit()
        f1 = FaultEvent((0, 2), pauli("XI"))
        f2 = FaultEvent((0, 4), pauli("IX"))
        r1 = propagate(circ, [f1])
        r2 = propagate(circ, [f2])
        r12 = propagate(circ, [f1, f2])
        assert r12.residual == r1.residual * r2.residual
        assert r12.flag_bits == tuple(a ^ b for a, b in zip(r1.flag_bits, r2.flag_bits))


class TestEnumeration:
    def test_single_cnot_has_15_faults(self):
        sets = list(enumerate_fault_sets(single_cnot(), 1))
        assert len(sets) == 15

    def test_prep_has_one_fault(self):
        segs = [Segment((), (Location(PREP_Z, (0,), 0),))]
        circ = CliffordCircuit(1, segs, (DATA,))
        assert len(list(enumerate_fault_sets(circ, 1))) == 1

    def test_pair_count_formula(self):
        circ = small_flag_circuit()
        L = len(single_fault_events(circ))
        n_sets = sum(1 for _ in enumerate_fault_sets(circ, 2))
        expected = count_fault_sets(circ, 2)
        assert n_sets == expected
        # distinct-location pairs plus singles, with per-location multiplicity
        assert n_sets >= L

    def test_x_only_filter(self):
        evs = single_fault_events(single_cnot(), filter="x_only")
        assert len(evs) == 3
        labels = {e.error.label() for e in evs}
        assert labels == {"XI", "IX", "XX"}


class TestCircuitJson:
    def test_roundtrip(self):
        circ = small_flag_circuit()
        again = CliffordCircuit.from_json(circ.to_json())
        assert again.to_json_dict() == circ.to_json_dict()

    def test_validation_catches_double_use(self):
        locs = [
            Location(PREP_Z, (0,), 0),
            Location(PREP_Z, (1,), 0),
            Location(CNOT, (0, 1), 1),
            Location(CNOT, (1, 0), 1),
        ]
        with pytest.raises(ValueError):
            CliffordCircuit(2, [Segment((), locs)], (DATA, DATA))
