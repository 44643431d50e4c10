import itertools
import math

import numpy as np
import pytest

from betheprep.bethe import ModelParams, exact_state, scattering_phase, sector_basis, solve_bethe
from betheprep.builder import (BuildOptions, aa_ancilla_count, aswap, build_algorithm1,
                               build_amplified, build_dicke, build_faucet, build_perm_label,
                               layout_for)
from betheprep.circuit import Circuit, QubitLayout, count_gates, unitary_of
from betheprep.pipeline import representative_solution
from betheprep.simulator import StateVector, project_success, run

from conftest import DELTA


def label_index(layout, perm):
    """Basis index of the one-hot label for a 1-based permutation."""
    return sum(1 << layout.label_qubit(j, v - 1) for j, v in enumerate(perm))


def label_state(solution, with_ap):
    # the label fragment touches only the label register; L = M keeps the layout small
    M = solution.params.M
    c = build_perm_label(solution, with_ap, layout=QubitLayout(M, M))
    return c.layout, run(c).amplitudes


@pytest.mark.parametrize("L,M", [(2, 1), (4, 2), (8, 3), (5, 0), (4, 4), (6, 3), (7, 2)])
def test_dicke_exact(L, M):
    amps = run(build_dicke(L, M)).amplitudes
    b = sector_basis(L, M)
    np.testing.assert_allclose(amps[b], 1 / math.sqrt(math.comb(L, M)), atol=1e-12)
    assert np.linalg.norm(np.delete(amps, b)) < 1e-12


def test_dicke_two_qubit_example():
    amps = run(build_dicke(2, 1)).amplitudes
    assert amps[1] == pytest.approx(1 / math.sqrt(2)) and amps[2] == pytest.approx(1 / math.sqrt(2))


def test_aswap_matrix():
    # matrix in the ordered basis |a b> = |00>, |01>, |10>, |11>
    th, ph = 0.83, 0.4
    c = Circuit(QubitLayout(1, 1), aswap(th, 1, 0, ph))  # a = qubit 1 (high bit), b = qubit 0
    U = unitary_of(c)[:4, :4]
    i01, i10 = 0b01, 0b10
    assert U[0, 0] == pytest.approx(1) and U[3, 3] == pytest.approx(1)
    np.testing.assert_allclose(U[[i01, i10]][:, [i01, i10]],
                               [[math.cos(th), np.exp(1j * ph) * math.sin(th)],
                                [np.exp(-1j * ph) * math.sin(th), -math.cos(th)]], atol=1e-12)


@pytest.mark.parametrize("M", [1, 2, 3, 4])
def test_label_uniform_superposition(M):
    sol = representative_solution(max(2 * M, 2), M)
    lay, amps = label_state(sol, with_ap=False)
    perms = list(itertools.permutations(range(1, M + 1)))
    idx = [label_index(lay, p) for p in perms]
    np.testing.assert_allclose(amps[idx], 1 / math.sqrt(math.factorial(M)), atol=1e-12)
    assert np.count_nonzero(np.abs(amps) > 1e-12) == math.factorial(M)


def test_label_m3_partial_swap_weights():
    # after the first partial swap the two branches carry 1/sqrt(2) each; after the second, 1/sqrt(3) splits
    sol = representative_solution(6, 3)
    lay = QubitLayout(6, 3)
    from betheprep.builder import label_gates
    gates = label_gates(lay, None)
    n_first = 1 + 1 + 7 + 1  # seed, X, ASWAP(7 gates), one CSWAP
    amps = run(Circuit(lay, gates[:n_first])).amplitudes
    nz = np.abs(amps[np.abs(amps) > 1e-12])
    np.testing.assert_allclose(sorted(nz), [1 / math.sqrt(2)] * 2, atol=1e-12)
    np.testing.assert_allclose(np.sort(np.abs(run(Circuit(lay, gates)).amplitudes))[-6:],
                               1 / math.sqrt(6), atol=1e-12)
    assert sol.converged


@pytest.mark.parametrize("L,M,qs", [(4, 2, ["-3/2", "1/2"]), (6, 3, [-1, 0, 2]), (8, 4, ["-3/2", "-1/2", "1/2", "5/2"])])
def test_label_ap_phases_match_oracle(L, M, qs):
    sol = solve_bethe(ModelParams(L, M, 1.0, DELTA), qs)
    assert sol.converged
    lay, amps = label_state(sol, with_ap=True)
    ap = exact_state(sol).ap_phases
    norm = math.sqrt(math.factorial(M))
    for perm, a in ap.items():
        assert abs(amps[label_index(lay, perm)] * norm - a) < 1e-10


def test_label_ap_m2_fixture(ref_state):
    lay, amps = label_state(ref_state, with_ap=True)
    k1, k2 = ref_state.momenta
    a21 = -np.exp(-1j * scattering_phase(k1, k2, DELTA))
    assert amps[label_index(lay, (1, 2))] == pytest.approx(1 / math.sqrt(2))
    assert amps[label_index(lay, (2, 1))] == pytest.approx(a21 / math.sqrt(2))


def test_label_m1_is_single_x():
    sol = representative_solution(3, 1)
    c = build_perm_label(sol, with_ap=True)
    assert [g.kind for g in c.gates] == ["X"]


@pytest.mark.parametrize("M", [2, 3, 4])
def test_label_uncompute_exact(M):
    sol = representative_solution(2 * M, M)
    c = build_perm_label(sol, with_ap=False, layout=QubitLayout(M, M))
    amps = run(c + c.inverse()).amplitudes
    assert abs(amps[0] - 1) < 1e-12


def faucet_walk(positions, perm, momenta):
    return np.exp(1j * sum(momenta[perm[j] - 1] * x for j, x in enumerate(positions)))


@pytest.mark.parametrize("L,M,edge", [(4, 2, False), (4, 2, True), (5, 3, False), (5, 3, True), (3, 1, False)])
def test_faucet_matches_classical_walk(L, M, edge):
    sol = representative_solution(L, M) if (L, M) != (4, 2) else solve_bethe(
        ModelParams(4, 2, 1.0, DELTA), ["-3/2", "1/2"])
    c = build_faucet(sol, BuildOptions(edge_skip=edge))
    k = sol.momenta
    for s in sector_basis(L, M):
        pos = [x for x in range(L) if (s >> x) & 1]
        for perm in itertools.permutations(range(1, M + 1)):
            i = int(s) + label_index(c.layout, perm)
            out = run(c, StateVector.basis(c.layout.total, i)).amplitudes
            # faucets and work end in |0>, so the basis state comes back unchanged up to phase
            assert abs(out[i] - faucet_walk(pos, perm, k)) < 1e-12


def test_faucet_m1_example():
    sol = solve_bethe(ModelParams(3, 1, 1.0, DELTA), [1])
    c = build_faucet(sol)
    i = (1 << 2) + label_index(c.layout, (1,))
    out = run(c, StateVector.basis(c.layout.total, i)).amplitudes
    assert out[i] == pytest.approx(np.exp(2j * sol.momenta[0]))


def test_edge_skip_drops_gates():
    sol = representative_solution(8, 3)
    full = count_gates(build_faucet(sol))
    skip = count_gates(build_faucet(sol, BuildOptions(edge_skip=True)))
    assert skip["CP"] < full["CP"] and skip["TOFFOLI"] < full["TOFFOLI"]


def test_algorithm1_m1_succeeds_always():
    sol = solve_bethe(ModelParams(5, 1, 1.0, DELTA), [1])
    c = build_algorithm1(sol)
    out = project_success(run(c), c.layout, exact_state(sol))
    assert out.success_probability == pytest.approx(1, abs=1e-12)
    assert out.fidelity == pytest.approx(1, abs=1e-12)


def test_algorithm1_reference(ref_state):
    c = build_algorithm1(ref_state)
    ex = exact_state(ref_state)
    out = project_success(run(c), c.layout, ex)
    assert out.fidelity >= 1 - 1e-8
    assert out.success_probability == pytest.approx(ex.success_probability, abs=1e-12)
    assert out.success_probability == pytest.approx(7 / 12, abs=1e-10)  # pinned regression value


def test_algorithm1_ordering_tags(ref_state):
    tags = build_algorithm1(ref_state).metadata
    order = [t for i, t in enumerate(tags) if i == 0 or tags[i - 1] != t]
    assert order[0] == "dicke" and order[-1] == "unlabel"
    assert "faucet" in order and "label_ap" in order


@pytest.mark.parametrize("reflection", ["mcx", "tree"])
@pytest.mark.parametrize("rounds", [1, 2])
def test_amplification_rounds(ref_state, reflection, rounds):
    ex = exact_state(ref_state)
    c = build_amplified(ref_state, rounds, BuildOptions(reflection=reflection))
    out = project_success(run(c), c.layout, ex)
    expect = math.sin((2 * rounds + 1) * math.asin(math.sqrt(ex.success_probability))) ** 2
    assert out.success_probability == pytest.approx(expect, abs=1e-10)
    assert out.fidelity >= 1 - 1e-8


def test_amplified_layouts():
    assert layout_for(8, 3, BuildOptions(amplification_rounds=1, reflection="tree")).aa_ancilla == aa_ancilla_count(8, 3) == 8 + 6
    assert layout_for(8, 3, BuildOptions(amplification_rounds=1)).aa_ancilla == 0
    with pytest.raises(ValueError):
        build_amplified(representative_solution(4, 2), 0)


def test_build_options_validation():
    with pytest.raises(ValueError):
        BuildOptions(amplification_rounds=-1)
    with pytest.raises(ValueError):
        BuildOptions(reflection="magic")


def test_nonconverged_solution_rejected():
    sol = solve_bethe(ModelParams(8, 3, 1.0, DELTA), [-1, 0, 1], max_iter=1)
    with pytest.raises(ValueError):
        build_algorithm1(sol)
