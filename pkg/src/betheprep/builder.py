"""Circuit construction for Bethe-state preparation and its amplitude-amplified wrapper.

Register conventions (see :class:`~betheprep.circuit.QubitLayout`):

* label subregister ``j`` (0-based) holds the value ``P(j+1)`` one-hot, value ``v``
  (1-based) on its qubit ``v - 1``;
* faucet ``j`` accumulates ``exp(i k_{P(j+1)})`` at every site before the
  ``(j+1)``-th down spin, so it pairs with label subregister ``j``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .bethe import BetheError, BetheSolution, scattering_phase
from .circuit import Circuit, CircuitError, Gate, QubitLayout, controlled_x


@dataclass(frozen=True)
class BuildOptions:
    amplification_rounds: int = 0
    edge_skip: bool = False
    work_budget: int = 1
    lower_mcx: bool = True
    reflection: str = "mcx"

    def __post_init__(self):
        if self.amplification_rounds < 0:
            raise ValueError("amplification_rounds must be >= 0")
        if self.work_budget < 1:
            raise ValueError("work_budget must be >= 1")
        if self.reflection not in ("mcx", "tree"):
            raise ValueError(f"unknown reflection implementation {self.reflection!r}")


def aa_ancilla_count(L: int, M: int) -> int:
    """Extra qubits for the Toffoli-tree reflections; faucet and work qubits are reused."""
    return L + M * M - M


def layout_for(L: int, M: int, options: BuildOptions = BuildOptions()) -> QubitLayout:
    aa = 0
    if options.amplification_rounds and options.reflection == "tree":
        aa = aa_ancilla_count(L, M)
    return QubitLayout(L, M, work=options.work_budget, aa_ancilla=aa)


# --- small composite gates ------------------------------------------------------

def _cry(theta: float, control: int, target: int, tag: str) -> list[Gate]:
    return [
        Gate("RY", (target,), (), theta / 2, tag),
        Gate("CX", (target,), ((control, True),), tag=tag),
        Gate("RY", (target,), (), -theta / 2, tag),
        Gate("CX", (target,), ((control, True),), tag=tag),
    ]


def _ccry(theta: float, c1: int, c2: int, target: int, tag: str) -> list[Gate]:
    # uniformly controlled rotation, Gray-code order; no Toffolis
    out = []
    for sign, c in zip((1, -1, 1, -1), (c1, c2, c1, c2)):
        out.append(Gate("RY", (target,), (), sign * theta / 4, tag))
        out.append(Gate("CX", (target,), ((c, True),), tag=tag))
    return out


def aswap(theta: float, a: int, b: int, phi: float = 0.0, tag: str = "") -> list[Gate]:
    """Exchange gate A(theta, phi) on (a, b) from CX / RY / RZ.

    In the basis |a b>: |01> -> cos(theta)|01> + e^{-i phi} sin(theta)|10>,
    |10> -> e^{i phi} sin(theta)|01> - cos(theta)|10>, |00> and |11> fixed.
    """
    r_y, r_z = theta + math.pi / 2, phi + math.pi
    return [
        Gate("CX", (a,), ((b, True),), tag=tag),
        Gate("RZ", (b,), (), -r_z, tag),
        Gate("RY", (b,), (), -r_y, tag),
        Gate("CX", (b,), ((a, True),), tag=tag),
        Gate("RY", (b,), (), r_y, tag),
        Gate("RZ", (b,), (), r_z, tag),
        Gate("CX", (a,), ((b, True),), tag=tag),
    ]


def z_gate(q: int, tag: str = "") -> list[Gate]:
    return [Gate("H", (q,), tag=tag), Gate("X", (q,), tag=tag), Gate("H", (q,), tag=tag)]


def lowered_x(target: int, controls: Sequence[tuple[int, bool]], work: Sequence[int],
              tag: str = "") -> list[Gate]:
    """Multi-controlled X as a compute-act-uncompute Toffoli chain through ``work``."""
    controls = list(controls)
    if len(controls) <= 2:
        return [controlled_x(target, controls, tag)]
    need = len(controls) - 2
    if len(work) < need:
        raise CircuitError(f"{len(controls)}-control X needs {need} work qubits, have {len(work)}")
    compute = [Gate("TOFFOLI", (work[0],), (controls[0], controls[1]), tag=tag)]
    for i, c in enumerate(controls[2:-1]):
        compute.append(Gate("TOFFOLI", (work[i + 1],), ((work[i], True), c), tag=tag))
    act = Gate("TOFFOLI", (target,), ((work[need - 1], True), controls[-1]), tag=tag)
    return compute + [act] + compute[::-1]


# --- step 1: Dicke state ------------------------------------------------------

def _scs(n: int, k: int, tag: str) -> list[Gate]:
    """Split-and-cyclic-shift block on qubits 0..n-1 (qubit n-1 is the shifted one)."""
    out = []
    last = n - 1
    for m in range(1, k + 1):
        angle = 2 * math.acos(math.sqrt(m / n))
        split = n - m - 1
        out.append(Gate("CX", (last,), ((split, True),), tag=tag))
        if m == 1:
            out += _cry(angle, last, split, tag)
        else:
            out += _ccry(angle, last, n - m, split, tag)
        out.append(Gate("CX", (last,), ((split, True),), tag=tag))
    return out


def dicke_gates(L: int, M: int, tag: str = "dicke") -> list[Gate]:
    if not 0 <= M <= L:
        raise CircuitError(f"Dicke state needs 0 <= M <= L, got L={L}, M={M}")
    if M == 0:
        return []
    gates = [Gate("X", (q,), tag=tag) for q in range(L - M, L)]
    n, k = L, M
    while n > 1:
        if n == k:
            gates += _scs(n, k - 1, tag)
            k -= 1
        else:
            gates += _scs(n, k, tag)
        n -= 1
    return gates


def build_dicke(L: int, M: int, layout: QubitLayout | None = None) -> Circuit:
    """|0...0> -> equal positive superposition of all weight-M strings on the system qubits."""
    layout = layout or QubitLayout(L, M)
    return Circuit(layout, dicke_gates(L, M))


# --- step 2: permutation label --------------------------------------------------

def _momenta(solution: BetheSolution) -> tuple[list[float], float]:
    if not solution.converged:
        raise BetheError("circuit construction needs a converged Bethe solution")
    return [float(k) for k in solution.momenta], solution.params.delta


def label_gates(layout: QubitLayout, momenta: Sequence[float] | None, delta: float = 0.0,
                tag: str = "label") -> list[Gate]:
    """Inductive partial-swap construction of the one-hot permutation superposition.

    With ``momenta`` given, a CP of angle Theta(k_v, k_m) + pi follows each partial
    swap for every value m the moved value v may have passed, which attaches A_P
    to each label branch.
    """
    M = layout.M
    lab = layout.label_qubit
    if M == 0:
        return []
    gates = [Gate("X", (lab(0, 0),), tag=tag)]
    for k in range(M - 1):
        new = k + 1  # value index being inserted
        gates.append(Gate("X", (lab(new, new),), tag=tag))
        for r in range(k, -1, -1):
            theta = math.acos(1 / math.sqrt(r + 2))
            gates += aswap(theta, lab(r, new), lab(r + 1, new), tag=tag)
            for l in range(new):
                gates.append(Gate("CSWAP", (lab(r, l), lab(r + 1, l)), ((lab(r, new), True),), tag=tag))
            if momenta is not None:
                for m in range(new):
                    angle = scattering_phase(momenta[new], momenta[m], delta) + math.pi
                    gates.append(Gate("CP", (lab(r, new),), ((lab(r + 1, m), True),), angle, tag + "_ap"))
    return gates


def build_perm_label(solution: BetheSolution, with_ap: bool, layout: QubitLayout | None = None) -> Circuit:
    p = solution.params
    layout = layout or QubitLayout(p.L, p.M)
    if with_ap:
        momenta, delta = _momenta(solution)
        return Circuit(layout, label_gates(layout, momenta, delta))
    return Circuit(layout, label_gates(layout, None))


# --- step 3: faucet -------------------------------------------------------------

def faucet_gates(layout: QubitLayout, momenta: Sequence[float], edge_skip: bool = False,
                 lower_mcx: bool = True, tag: str = "faucet") -> list[Gate]:
    L, M = layout.L, layout.M
    f = layout.faucet_qubit
    work = list(layout.work_qubits)
    gates = [Gate("X", (f(j),), tag=tag) for j in range(M)]
    for x in range(L):
        # turn the next open faucet off when site x holds a down spin; descending j
        for j in range(M - 1, -1, -1):
            if edge_skip and not (M - L + x <= j <= x):
                continue
            controls = [(x, True)]
            if j > 0:
                controls.append((f(j - 1), False))
            if j < M - 1:
                controls.append((f(j + 1), True))
            if lower_mcx:
                gates += lowered_x(f(j), controls, work, tag)
            else:
                gates.append(controlled_x(f(j), controls, tag))
        for j in range(M):
            if edge_skip and j < M - L + x + 1:
                continue
            for v in range(M):
                gates.append(Gate("CP", (layout.label_qubit(j, v),), ((f(j), True),), momenta[v], tag))
    return gates


def build_faucet(solution: BetheSolution, options: BuildOptions = BuildOptions(),
                 layout: QubitLayout | None = None) -> Circuit:
    p = solution.params
    layout = layout or layout_for(p.L, p.M, options)
    momenta, _ = _momenta(solution)
    return Circuit(layout, faucet_gates(layout, momenta, options.edge_skip, options.lower_mcx))


# --- full algorithm ----------------------------------------------------------------

def algorithm1_gates(solution: BetheSolution, layout: QubitLayout, options: BuildOptions) -> list[Gate]:
    momenta, delta = _momenta(solution)
    L, M = layout.L, layout.M
    return (
        dicke_gates(L, M)
        + label_gates(layout, momenta, delta)
        + faucet_gates(layout, momenta, options.edge_skip, options.lower_mcx)
        + [g.inverse() for g in reversed(label_gates(layout, None, tag="unlabel"))]
    )


def build_algorithm1(solution: BetheSolution, options: BuildOptions = BuildOptions(),
                     layout: QubitLayout | None = None) -> Circuit:
    """Dicke prep, labelled A_P, faucet phases, label uncompute; no measurement."""
    p = solution.params
    layout = layout or layout_for(p.L, p.M, options)
    return Circuit(layout, algorithm1_gates(solution, layout, options))


# --- amplitude amplification ------------------------------------------------------

def _reflect_zero_mcx(qubits: Sequence[int], work: int, tag: str) -> list[Gate]:
    """Phase -1 on the all-zero pattern of ``qubits`` via phase kickback on ``work``."""
    prep = [Gate("X", (work,), tag=tag), Gate("H", (work,), tag=tag)]
    flip = controlled_x(work, [(q, False) for q in qubits], tag)
    return prep + [flip] + prep[::-1]


def _reflect_zero_tree(qubits: Sequence[int], pool: Sequence[int], tag: str) -> list[Gate]:
    """Same reflection via a balanced Toffoli tree of AND-of-zeros into ``pool`` ancillas."""
    nodes = [(q, False) for q in qubits]
    free = list(pool)
    compute = []
    while len(nodes) > 1:
        nxt = []
        for i in range(0, len(nodes) - 1, 2):
            if not free:
                raise CircuitError("reflection tree ran out of ancillas")
            anc = free.pop(0)
            compute.append(Gate("TOFFOLI", (anc,), (nodes[i], nodes[i + 1]), tag=tag))
            nxt.append((anc, True))
        if len(nodes) % 2:
            nxt.append(nodes[-1])
        nodes = nxt
    root, positive = nodes[0]
    if positive:
        flip = z_gate(root, tag)
    else:
        flip = [Gate("X", (root,), tag=tag)] + z_gate(root, tag) + [Gate("X", (root,), tag=tag)]
    return compute + flip + compute[::-1]


def reflection_gates(layout: QubitLayout, include_system: bool, method: str, tag: str) -> list[Gate]:
    """S_B (label only) or S_0 (label and system): sign flip of the all-zero pattern."""
    qubits = list(layout.perm_label)
    if include_system:
        qubits = list(layout.system) + qubits
    if not qubits:
        return []
    if method == "mcx":
        return _reflect_zero_mcx(qubits, layout.work_qubits[0], tag)
    pool = list(layout.aa_qubits) + list(layout.faucet) + list(layout.work_qubits)
    return _reflect_zero_tree(qubits, pool, tag)


def build_amplified(solution: BetheSolution, rounds: int, options: BuildOptions = BuildOptions()) -> Circuit:
    """B followed by ``rounds`` applications of B S_0 B^-1 S_B (global -1 dropped)."""
    if rounds < 1:
        raise ValueError("build_amplified needs rounds >= 1")
    p = solution.params
    opts = BuildOptions(rounds, options.edge_skip, options.work_budget, options.lower_mcx, options.reflection)
    layout = layout_for(p.L, p.M, opts)
    B = algorithm1_gates(solution, layout, opts)
    B_inv = [g.inverse() for g in reversed(B)]
    S_B = reflection_gates(layout, False, opts.reflection, "s_b")
    S_0 = reflection_gates(layout, True, opts.reflection, "s_0")
    gates = list(B)
    for _ in range(rounds):
        gates += S_B + B_inv + S_0 + B
    return Circuit(layout, gates)


def build_circuit(solution: BetheSolution, options: BuildOptions = BuildOptions()) -> Circuit:
    if options.amplification_rounds:
        return build_amplified(solution, options.amplification_rounds, options)
    return build_algorithm1(solution, options)
