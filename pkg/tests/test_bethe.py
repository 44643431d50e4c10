import itertools
import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from betheprep.bethe import (BetheError, BetheSolution, DegenerateSolutionError, ModelParams,
                             SingularPairError, allowed_quantum_numbers, ap_coefficient,
                             apply_hamiltonian, bethe_residual, check_quantum_numbers,
                             dense_hamiltonian, dense_sector_hamiltonian, eigen_residual,
                             energy_of, enumerate_quantum_numbers, exact_state,
                             scan_quantum_numbers, scattering_phase, sector_basis,
                             sector_positions, solve_bethe, theta_matrix)

from conftest import DELTA, REF_K, kmod, solutions

momentum = st.floats(-math.pi, math.pi, allow_nan=False)
anisotropy = st.floats(-0.95, 0.95, allow_nan=False).filter(lambda d: abs(d) > 1e-3)


# --- scattering phase ------------------------------------------------------------

@settings(max_examples=200, deadline=None)
@given(momentum, momentum, anisotropy)
def test_theta_antisymmetric(a, b, delta):
    try:
        t = scattering_phase(a, b, delta)
    except SingularPairError:
        return
    assert scattering_phase(b, a, delta) == pytest.approx(-t, abs=1e-12) or abs(abs(t) - math.pi) < 1e-9


@settings(max_examples=100, deadline=None)
@given(momentum, momentum, anisotropy)
def test_theta_periodic_in_each_momentum(a, b, delta):
    try:
        t = scattering_phase(a, b, delta)
    except SingularPairError:
        return
    shifted = scattering_phase(a + 2 * math.pi, b, delta)
    gap = abs(shifted - t) % (2 * math.pi)
    assert min(gap, 2 * math.pi - gap) < 1e-9


def test_theta_matches_arctan_form():
    a, b, d = 0.7, -1.3, -0.5
    num = d * math.sin((a - b) / 2)
    den = d * math.cos((a - b) / 2) - math.cos((a + b) / 2)
    assert scattering_phase(a, b, d) == pytest.approx(2 * math.atan(num / den))


def test_theta_zero_cases():
    assert scattering_phase(0.4, 0.4, -0.5) == 0.0
    assert scattering_phase(0.4, 1.9, 0.0) == 0.0


def test_theta_matrix_shape_and_diagonal():
    th = theta_matrix([0.1, 0.9, 2.0], -0.5)
    assert th.shape == (3, 3)
    assert np.all(np.diag(th) == 0)
    np.testing.assert_allclose(th, -th.T)


def test_unknown_branch():
    with pytest.raises(ValueError):
        scattering_phase(0.1, 0.2, 0.5, branch="nope")


# --- quantum numbers ---------------------------------------------------------------

def test_parity_rules():
    check_quantum_numbers(4, 2, ["-3/2", "1/2"])
    check_quantum_numbers(6, 3, [-1, 0, 1])
    with pytest.raises(BetheError):
        check_quantum_numbers(4, 2, [0, 1])
    with pytest.raises(BetheError):
        check_quantum_numbers(6, 3, ["1/2", "3/2", "5/2"])
    with pytest.raises(BetheError):
        check_quantum_numbers(6, 3, [0, 0, 1])
    with pytest.raises(BetheError):
        check_quantum_numbers(6, 3, [0, 1])


def test_allowed_range_is_half_open():
    assert allowed_quantum_numbers(4, 2) == [Fraction(v, 2) for v in (-3, -1, 1, 3)]
    assert allowed_quantum_numbers(6, 3) == [-2, -1, 0, 1, 2, 3]
    assert len(enumerate_quantum_numbers(6, 3)) == math.comb(6, 3)


# --- solver ---------------------------------------------------------------------------

def test_reference_momenta(ref_state):
    assert ref_state.converged
    np.testing.assert_allclose(kmod(ref_state.momenta), kmod(REF_K), atol=1e-7)


def test_free_fermion_limit():
    sol = solve_bethe(ModelParams(8, 3, 1.0, 0.0), [-1, 0, 2])
    np.testing.assert_allclose(sol.momenta, 2 * math.pi * np.array([-1, 0, 2]) / 8, atol=1e-14)
    assert sol.iterations == 0


def test_residual_reported_and_small(ref_state):
    assert ref_state.residual <= 1e-12
    assert bethe_residual(ref_state.params, ref_state.quantum_numbers, ref_state.momenta) <= 1e-12


def test_nonconvergence_is_flagged():
    sol = solve_bethe(ModelParams(8, 3, 1.0, DELTA), [-1, 0, 1], max_iter=2)
    assert not sol.converged
    assert sol.residual > 1e-12


def test_scan_statuses():
    statuses = {st for _, _, st in scan_quantum_numbers(ModelParams(4, 2, 1.0, DELTA))}
    assert "ok" in statuses and "duplicate" in statuses


def test_bad_damping():
    with pytest.raises(BetheError):
        solve_bethe(ModelParams(4, 2, 1.0, DELTA), ["-1/2", "1/2"], damping=0)


def test_solution_json_roundtrip(ref_state):
    doc = json.loads(json.dumps(ref_state.to_json()))
    back = BetheSolution.from_json(doc)
    np.testing.assert_array_equal(back.momenta, ref_state.momenta)
    np.testing.assert_array_equal(back.theta, ref_state.theta)
    assert back.quantum_numbers == ref_state.quantum_numbers and back.converged


def test_model_params_validation():
    with pytest.raises(BetheError):
        ModelParams(4, 5)
    with pytest.raises(BetheError):
        ModelParams(4, 2, j_xy=0.0)


# --- A_P and the exact state --------------------------------------------------------------

def test_ap_two_body(ref_state):
    k = ref_state.momenta
    a21 = ap_coefficient((2, 1), k, DELTA)
    assert a21 == pytest.approx(-np.exp(-1j * scattering_phase(k[0], k[1], DELTA)))
    assert ap_coefficient((1, 2), k, DELTA) == 1


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 3), max_size=12),
       st.lists(st.floats(-3.0, 3.0), min_size=5, max_size=5, unique=True))
def test_ap_path_independent(swaps, ks):
    # any adjacent-transposition word reaching the same permutation gives the same A_P
    seq = [1, 2, 3, 4, 5]
    for l in swaps:
        seq[l], seq[l + 1] = seq[l + 1], seq[l]
    try:
        default = ap_coefficient(tuple(seq), ks, -0.4)
        custom = ap_coefficient(tuple(seq), ks, -0.4, path=swaps)
    except SingularPairError:
        return
    assert custom == pytest.approx(default, abs=1e-10)
    assert abs(abs(default) - 1) < 1e-12


def test_sector_basis_ordering():
    b = sector_basis(4, 2)
    assert list(b) == [3, 5, 6, 9, 10, 12]
    assert sector_positions(4, 2).tolist() == [[0, 1], [0, 2], [1, 2], [0, 3], [1, 3], [2, 3]]


def test_hamiltonian_matrix_free_matches_kron():
    p = ModelParams(6, 3, 0.8, -0.3)
    rng = np.random.default_rng(3)
    v = rng.normal(size=math.comb(6, 3)) + 1j * rng.normal(size=math.comb(6, 3))
    np.testing.assert_allclose(apply_hamiltonian(p, v), dense_sector_hamiltonian(p) @ v, atol=1e-12)
    H = dense_hamiltonian(p)
    np.testing.assert_allclose(H, H.conj().T)


def test_exact_states_are_eigenstates():
    for L, M in [(4, 2), (6, 2), (6, 3)]:
        for sol in solutions(L, M):
            ex = exact_state(sol)
            assert np.linalg.norm(ex.amplitudes) == pytest.approx(1)
            E, res = eigen_residual(sol.params, ex.amplitudes)
            assert res < 1e-10
            # the eigenvalue is in the dense spectrum
            w = np.linalg.eigvalsh(dense_sector_hamiltonian(sol.params))
            assert np.min(np.abs(w - E)) < 1e-10


def test_success_probability_m1_is_one():
    sol = solve_bethe(ModelParams(5, 1, 1.0, DELTA), [2])
    assert exact_state(sol).success_probability == pytest.approx(1)


def test_energy_requires_unit_norm():
    p = ModelParams(4, 2)
    with pytest.raises(BetheError):
        energy_of(p, np.ones(6))


def test_enumeration_counts_pinned():
    # regression constants from the first verified run
    assert [len(solutions(L, M)) for L, M in [(4, 2), (6, 2), (8, 2), (6, 3)]] == [5, 12, 25, 12]


def test_solutions_distinct():
    sols = solutions(6, 3)
    for a, b in itertools.combinations(sols, 2):
        assert not a.same_as(b)
