"""State-vector execution of :class:`~betheprep.circuit.Circuit` objects.

The default backend tracks only the nonzero support as index/amplitude arrays.
The dense backend applies gates in place on a ``[2] * n`` tensor view; qubit
``q`` lives on axis ``n - 1 - q`` so that it is bit ``q`` of the flat index.
Either way the result is a dense :class:`StateVector`.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .circuit import Circuit, Gate, QubitLayout

DEFAULT_QUBIT_CAP = 26
NORM_TOL = 1e-10


class SimulationError(ValueError):
    pass


class QubitCapError(SimulationError):
    """The circuit needs more qubits than the configured cap allows."""


class StateVector:
    """Owned complex amplitude array over ``n_qubits`` qubits (little-endian)."""

    def __init__(self, n_qubits: int, amplitudes: np.ndarray | None = None):
        self.n_qubits = int(n_qubits)
        if amplitudes is None:
            amplitudes = np.zeros(1 << self.n_qubits, dtype=np.complex128)
            amplitudes[0] = 1.0
        amplitudes = np.asarray(amplitudes, dtype=np.complex128)
        if amplitudes.shape != (1 << self.n_qubits,):
            raise SimulationError(f"expected {1 << self.n_qubits} amplitudes, got {amplitudes.shape}")
        self.amplitudes = amplitudes

    @classmethod
    def basis(cls, n_qubits: int, index: int) -> StateVector:
        amps = np.zeros(1 << n_qubits, dtype=np.complex128)
        amps[index] = 1.0
        return cls(n_qubits, amps)

    def copy(self) -> StateVector:
        return StateVector(self.n_qubits, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def overlap(self, other: StateVector) -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def fidelity(self, other: StateVector) -> float:
        return abs(self.overlap(other)) ** 2

    def probabilities(self, qubits: Sequence[int]) -> np.ndarray:
        """Marginal distribution over ``qubits``; entry ``i`` has bit ``b`` = outcome of qubits[b]."""
        n = self.n_qubits
        p = np.abs(self.amplitudes.reshape([2] * n)) ** 2
        axes = [n - 1 - q for q in qubits]
        others = tuple(a for a in range(n) if a not in axes)
        marg = p.sum(axis=others) if others else p
        # remaining axes are in ascending axis order; reorder so qubits[-1] is the leading axis
        kept = sorted(axes)
        marg = np.transpose(marg, [kept.index(a) for a in reversed(axes)])
        return marg.reshape(-1)


def _axis(n: int, q: int) -> int:
    return n - 1 - q


def _view(flat: np.ndarray, n: int, qubits: Sequence[int]) -> tuple[np.ndarray, dict[int, int]]:
    """Reshape ``flat`` so each qubit in ``qubits`` has its own axis and the rest are merged.

    Merging the untouched qubits keeps the view low-rank, which is much faster to
    iterate than the full ``[2] * n`` tensor.
    """
    shape: list[int] = []
    where: dict[int, int] = {}
    hi = n
    for q in sorted(qubits, reverse=True):
        if hi - 1 - q:
            shape.append(1 << (hi - 1 - q))
        where[q] = len(shape)
        shape.append(2)
        hi = q
    if hi:
        shape.append(1 << hi)
    return flat.reshape(shape), where


def apply_gate(psi: np.ndarray, gate: Gate, n: int) -> None:
    """Apply one gate in place to the amplitude array ``psi`` (flat or ``[2] * n``)."""
    view, where = _view(psi.reshape(-1), n, gate.qubits)
    idx: list = [slice(None)] * view.ndim
    for q, pos in gate.controls:
        idx[where[q]] = int(pos)
    kind = gate.kind
    if kind == "CSWAP":
        a, b = gate.targets
        i01, i10 = list(idx), list(idx)
        i01[where[a]], i01[where[b]] = 0, 1
        i10[where[a]], i10[where[b]] = 1, 0
        v01, v10 = view[tuple(i01)], view[tuple(i10)]
        tmp = v01.copy()
        v01[...] = v10
        v10[...] = tmp
        return
    t = where[gate.targets[0]]
    i0, i1 = list(idx), list(idx)
    i0[t], i1[t] = 0, 1
    lo, hi = view[tuple(i0)], view[tuple(i1)]
    if kind in ("X", "CX", "TOFFOLI", "MCX"):
        tmp = lo.copy()
        lo[...] = hi
        hi[...] = tmp
    elif kind in ("CP", "CCP"):
        hi *= np.exp(1j * gate.angle)
    elif kind == "RZ":
        lo *= np.exp(-0.5j * gate.angle)
        hi *= np.exp(0.5j * gate.angle)
    elif kind in ("RY", "H"):
        if kind == "RY":
            c, s = math.cos(gate.angle / 2), math.sin(gate.angle / 2)
            u00, u01, u10, u11 = c, -s, s, c
        else:
            r = 1 / math.sqrt(2)
            u00, u01, u10, u11 = r, r, r, -r
        a0 = lo.copy()
        lo *= u00
        lo += u01 * hi
        hi *= u11
        a0 *= u10
        hi += a0
    else:  # pragma: no cover - Gate validates kinds
        raise SimulationError(f"unsupported gate {kind}")


class _SparseState:
    """Nonzero support of a state as parallel (index, amplitude) arrays.

    Algorithm-1 circuits keep the state on a tiny fraction of the full space
    (one-hot labels, unary faucets), so tracking only the support is far cheaper
    than sweeping all 2^n amplitudes per gate.
    """

    PRUNE = 1e-15

    def __init__(self, idx: np.ndarray, amp: np.ndarray):
        self.idx = idx.astype(np.int64)
        self.amp = amp.astype(np.complex128)

    @classmethod
    def from_dense(cls, amplitudes: np.ndarray) -> _SparseState:
        nz = np.flatnonzero(amplitudes)
        return cls(nz, amplitudes[nz])

    def to_dense(self, n: int) -> np.ndarray:
        out = np.zeros(1 << n, dtype=np.complex128)
        out[self.idx] = self.amp
        return out

    def _selected(self, gate: Gate) -> np.ndarray:
        pos = neg = 0
        for q, p in gate.controls:
            if p:
                pos |= 1 << q
            else:
                neg |= 1 << q
        return ((self.idx & pos) == pos) & ((self.idx & neg) == 0)

    def apply(self, gate: Gate) -> None:
        kind = gate.kind
        sel = self._selected(gate)
        if kind == "CSWAP":
            a, b = gate.targets
            mask = (1 << a) | (1 << b)
            differ = (((self.idx >> a) ^ (self.idx >> b)) & 1).astype(bool)
            flip = sel & differ
            self.idx[flip] ^= mask
            return
        tbit = 1 << gate.targets[0]
        if kind in ("X", "CX", "TOFFOLI", "MCX"):
            self.idx[sel] ^= tbit
            return
        one = (self.idx & tbit) != 0
        if kind in ("CP", "CCP"):
            self.amp[sel & one] *= np.exp(1j * gate.angle)
            return
        if kind == "RZ":
            self.amp[sel & one] *= np.exp(0.5j * gate.angle)
            self.amp[sel & ~one] *= np.exp(-0.5j * gate.angle)
            return
        if kind == "RY":
            c, s = math.cos(gate.angle / 2), math.sin(gate.angle / 2)
            u = ((c, -s), (s, c))
        else:
            r = 1 / math.sqrt(2)
            u = ((r, r), (r, -r))
        idx_s, amp_s = self.idx[sel], self.amp[sel]
        bit = ((idx_s & tbit) != 0).astype(np.int64)
        base = idx_s & ~tbit
        col = np.array(u)  # col[row, b]
        new_idx = np.concatenate([self.idx[~sel], base, base | tbit])
        new_amp = np.concatenate([self.amp[~sel], col[0, bit] * amp_s, col[1, bit] * amp_s])
        uniq, inv = np.unique(new_idx, return_inverse=True)
        acc = np.zeros(len(uniq), dtype=np.complex128)
        np.add.at(acc, inv, new_amp)
        keep = np.abs(acc) > self.PRUNE
        self.idx, self.amp = uniq[keep], acc[keep]


def run(circuit: Circuit, initial: StateVector | None = None, cap: int = DEFAULT_QUBIT_CAP,
        check_norm: bool = False, method: str = "sparse") -> StateVector:
    """Apply every gate of ``circuit`` to a copy of ``initial`` (default ``|0...0>``).

    ``method="sparse"`` tracks only nonzero amplitudes; ``"dense"`` sweeps the full
    array per gate. Both are exact and return a dense :class:`StateVector`.
    """
    if method not in ("sparse", "dense"):
        raise SimulationError(f"unknown method {method!r}")
    n = circuit.layout.total
    if n > cap:
        raise QubitCapError(
            f"circuit needs {n} qubits (L={circuit.layout.L}, M={circuit.layout.M}); "
            f"cap is {cap}, raise it explicitly to simulate")
    state = StateVector(n) if initial is None else initial.copy()
    if state.n_qubits != n:
        raise SimulationError(f"initial state has {state.n_qubits} qubits, circuit needs {n}")
    sparse = _SparseState.from_dense(state.amplitudes) if method == "sparse" else None
    for k, g in enumerate(circuit.gates):
        if max(g.qubits) >= n:
            raise SimulationError(f"gate {k} ({g.kind}) touches qubit {max(g.qubits)} >= {n}")
        if sparse is not None:
            sparse.apply(g)
            norm = np.linalg.norm(sparse.amp) if check_norm else 1.0
        else:
            apply_gate(state.amplitudes, g, n)
            norm = np.linalg.norm(state.amplitudes) if check_norm else 1.0
        if abs(norm - 1) > NORM_TOL:
            raise SimulationError(f"norm drifted after gate {k} ({g.kind})")
    if sparse is not None:
        state.amplitudes = sparse.to_dense(n)
    if abs(state.norm() - 1) > NORM_TOL:
        raise SimulationError(f"final norm {state.norm()} deviates from 1")
    return state


@dataclass
class SimulationOutcome:
    success_probability: float
    junk_norm: float
    post_state: np.ndarray | None = field(default=None, repr=False)
    fidelity: float | None = None
    energy: float | None = None
    residual: float | None = None

    @property
    def failed(self) -> bool:
        return self.post_state is None

    def to_json(self, **extra) -> dict:
        doc = {
            "success_probability": self.success_probability,
            "fidelity": self.fidelity,
            "junk_norm": self.junk_norm,
            "energy": self.energy,
        }
        if self.residual is not None:
            doc["residual"] = self.residual
        doc.update(extra)
        return doc


def project_success(state: StateVector, layout: QubitLayout, exact=None) -> SimulationOutcome:
    """Project onto every ancilla (label, faucet, work, amplification) reading 0.

    ``exact`` is an ``ExactBetheState``; when given, the fidelity of the renormalized
    system state against it is reported.
    """
    if state.n_qubits != layout.total:
        raise SimulationError("state and layout disagree on the qubit count")
    L = layout.L
    good = state.amplitudes.reshape(-1, 1 << L)[0]
    p = float(np.vdot(good, good).real)
    junk = 1.0 - p
    if p < 1e-14:
        return SimulationOutcome(p, junk)
    post = good / math.sqrt(p)
    fid = None
    if exact is not None:
        fid = float(abs(np.vdot(exact.full_vector(), post)) ** 2)
    return SimulationOutcome(p, junk, post, fid)


def _bits(outcome: int, width: int) -> str:
    return "".join(str((outcome >> b) & 1) for b in range(width))


def sample_measurement(state: StateVector, qubits: Sequence[int], seed: int) -> str:
    """Measure ``qubits`` once and collapse ``state`` in place.

    Character ``i`` of the returned string is the outcome of ``qubits[i]``.
    """
    rng = np.random.default_rng(seed)
    probs = state.probabilities(qubits)
    outcome = int(rng.choice(len(probs), p=probs / probs.sum()))
    n = state.n_qubits
    idx = np.arange(1 << n)
    keep = np.ones(1 << n, dtype=bool)
    for b, q in enumerate(qubits):
        keep &= ((idx >> q) & 1) == ((outcome >> b) & 1)
    state.amplitudes[~keep] = 0.0
    state.amplitudes /= np.linalg.norm(state.amplitudes)
    return _bits(outcome, len(qubits))


def sample_counts(state: StateVector, qubits: Sequence[int], shots: int, seed: int) -> Counter:
    """Shot histogram over ``qubits`` without disturbing ``state``."""
    rng = np.random.default_rng(seed)
    probs = state.probabilities(qubits)
    draws = rng.multinomial(shots, probs / probs.sum())
    return Counter({_bits(i, len(qubits)): int(c) for i, c in enumerate(draws) if c})
