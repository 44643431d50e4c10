import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from betheprep.builder import BuildOptions, build_algorithm1, build_amplified
from betheprep.circuit import (KINDS, Circuit, CircuitError, Gate, QubitLayout, controlled_x,
                               count_by_tag, count_gates, depth, from_text, gate_matrix, to_text,
                               unitary_of)


def test_layout_registers():
    lay = QubitLayout(4, 2)
    assert list(lay.system) == [0, 1, 2, 3]
    assert list(lay.perm_label) == [4, 5, 6, 7]
    assert list(lay.faucet) == [8, 9]
    assert list(lay.work_qubits) == [10]
    assert lay.total == lay.core_total == 4 + 4 + 2 + 1
    assert lay.label_qubit(1, 0) == 6
    with pytest.raises(CircuitError):
        lay.label_qubit(2, 0)


def test_layout_with_aa_ancilla():
    lay = QubitLayout(4, 2, work=1, aa_ancilla=6)
    assert lay.total == lay.core_total + 6
    assert list(lay.aa_qubits) == list(range(11, 17))


@pytest.mark.parametrize("bad", [
    dict(kind="CX", targets=(0,)),
    dict(kind="X", targets=(0,), controls=((1, True),)),
    dict(kind="RY", targets=(0,)),
    dict(kind="X", targets=(0,), angle=0.1),
    dict(kind="CX", targets=(0,), controls=((0, True),)),
    dict(kind="MCX", targets=(0,), controls=((1, True), (2, True))),
    dict(kind="FOO", targets=(0,)),
])
def test_gate_validation(bad):
    with pytest.raises(CircuitError):
        Gate(**bad)


def test_controlled_x_normalizes():
    assert controlled_x(0, []).kind == "X"
    assert controlled_x(0, [(1, True)]).kind == "CX"
    assert controlled_x(0, [(1, True), (2, False)]).kind == "TOFFOLI"
    assert controlled_x(0, [(1, True), (2, False), (3, True)]).kind == "MCX"


def test_circuit_rejects_out_of_range_qubit():
    with pytest.raises(CircuitError):
        Circuit(QubitLayout(2, 1), [Gate("X", (9,))])


def test_counts_and_depth():
    lay = QubitLayout(2, 1)
    c = Circuit(lay, [Gate("H", (0,)), Gate("H", (1,)), Gate("CX", (1,), ((0, True),)),
                      Gate("RZ", (1,), (), 0.3), Gate("X", (4,))])
    counts = count_gates(c)
    assert set(counts) == set(KINDS)
    assert counts["H"] == 2 and counts["CX"] == 1 and counts["CCP"] == 0
    assert depth(c) == 3
    assert count_by_tag(c) == {"": 5}


def test_text_roundtrip_exact(ref_state):
    c = build_amplified(ref_state, 1, BuildOptions(reflection="tree"))
    text = to_text(c)
    back = from_text(text)
    assert back == c
    assert back.metadata == c.metadata
    assert to_text(back) == text


def test_text_errors():
    with pytest.raises(CircuitError):
        from_text("nonsense")
    with pytest.raises(CircuitError):
        from_text("# betheprep circuit v1\nlayout L=2 M=1 work=1 aa_ancilla=0\nCX 0 | 1\n")


def test_gate_matrix_conventions():
    # RZ = diag(e^{-i t/2}, e^{i t/2}), RY = [[c, -s], [s, c]], little-endian qubits
    t = 0.7
    np.testing.assert_allclose(gate_matrix(Gate("RZ", (0,), (), t), 1),
                               np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)]))
    c, s = math.cos(t / 2), math.sin(t / 2)
    np.testing.assert_allclose(gate_matrix(Gate("RY", (0,), (), t), 1), [[c, -s], [s, c]])
    cx = gate_matrix(Gate("CX", (1,), ((0, True),)), 2)
    assert cx[3, 1] == 1 and cx[1, 3] == 1 and cx[0, 0] == 1 and cx[2, 2] == 1
    neg = gate_matrix(Gate("CX", (1,), ((0, False),)), 2)
    assert neg[2, 0] == 1 and neg[1, 1] == 1


def _random_gate(draw, n):
    kind = draw(st.sampled_from(["X", "H", "RY", "RZ", "CX", "CP", "CCP", "TOFFOLI", "CSWAP", "MCX"]))
    need = {"X": 1, "H": 1, "RY": 1, "RZ": 1, "CX": 2, "CP": 2, "CCP": 3, "TOFFOLI": 3,
            "CSWAP": 3, "MCX": 4}[kind]
    qs = draw(st.permutations(range(n)))[:need]
    pol = draw(st.lists(st.booleans(), min_size=need, max_size=need))
    angle = draw(st.floats(-6, 6)) if kind in ("RY", "RZ", "CP", "CCP") else None
    n_t = 2 if kind == "CSWAP" else 1
    ctrls = tuple(zip(qs[n_t:], pol[n_t:]))
    return Gate(kind, tuple(qs[:n_t]), ctrls, angle)


@st.composite
def five_qubit_circuits(draw):
    gates = [_random_gate(draw, 5) for _ in range(draw(st.integers(1, 12)))]
    return Circuit(QubitLayout(2, 1, work=1), gates)  # 5 qubits


@settings(max_examples=40, deadline=None)
@given(five_qubit_circuits())
def test_inverse_is_adjoint(c):
    U = unitary_of(c)
    np.testing.assert_allclose(unitary_of(c.inverse()), U.conj().T, atol=1e-12)
    np.testing.assert_allclose(U.conj().T @ U, np.eye(len(U)), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(five_qubit_circuits())
def test_text_roundtrip_property(c):
    assert from_text(to_text(c)) == c


def test_unitary_size_guard(ref_state):
    with pytest.raises(CircuitError):
        unitary_of(build_algorithm1(ref_state), max_qubits=8)
