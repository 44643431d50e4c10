"""Coordinate Bethe ansatz for the periodic spin-1/2 XXZ chain (real momenta only).

    H = sum_i J_xy (Sx_i Sx_{i+1} + Sy_i Sy_{i+1}) + J_z Sz_i Sz_{i+1}

A down spin is a ``1`` bit; site ``x`` is bit ``x`` of a basis index. Sector vectors
are indexed by the ascending list of weight-M integers (see :func:`sector_basis`).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi
SINGULAR_EPS = 1e-14
COLLISION_EPS = 1e-10
MAX_ORACLE_M = 10


class BetheError(ValueError):
    pass


class SingularPairError(BetheError):
    """Numerator and denominator of the scattering phase both vanish."""


class DegenerateSolutionError(BetheError):
    """Two momenta coincide, so the Bethe wavefunction vanishes identically."""


class VanishingStateError(BetheError):
    """The permutation sum cancels to (numerically) zero on every configuration."""


@dataclass(frozen=True)
class ModelParams:
    L: int
    M: int
    j_xy: float = 1.0
    j_z: float = 0.0

    def __post_init__(self):
        if int(self.L) != self.L or self.L < 1:
            raise BetheError(f"L must be a positive integer, got {self.L}")
        if int(self.M) != self.M or not 0 <= self.M <= self.L:
            raise BetheError(f"need 0 <= M <= L, got M={self.M}, L={self.L}")
        if self.j_xy == 0:
            raise BetheError("j_xy must be nonzero")
        if not (math.isfinite(self.j_xy) and math.isfinite(self.j_z)):
            raise BetheError("couplings must be finite")

    @property
    def delta(self) -> float:
        return self.j_z / self.j_xy

    @property
    def sector_dim(self) -> int:
        return math.comb(self.L, self.M)


def _wrap_pi(x):
    """Reduce into [-pi, pi)."""
    return (x + math.pi) % TWO_PI - math.pi


def scattering_phase(k_i: float, k_j: float, delta: float, branch: str = "principal") -> float:
    """Two-body phase shift Theta(k_i, k_j) for real momenta.

    ``branch="atan2"`` returns ``2*atan2(N, D)`` in (-2pi, 2pi]; ``"principal"`` reduces
    that into [-pi, pi), which is 2pi-periodic in each momentum and equals the
    single-argument ``2*arctan(N/D)`` wherever D != 0.
    """
    if branch not in ("principal", "atan2"):
        raise ValueError(f"unknown branch {branch!r}")
    if not (math.isfinite(k_i) and math.isfinite(k_j) and math.isfinite(delta)):
        raise BetheError("scattering_phase needs finite inputs")
    if k_i == k_j or delta == 0.0:
        return 0.0
    num = delta * math.sin((k_i - k_j) / 2)
    den = delta * math.cos((k_i - k_j) / 2) - math.cos((k_i + k_j) / 2)
    if abs(num) < SINGULAR_EPS and abs(den) < SINGULAR_EPS:
        raise SingularPairError(f"singular pair k_i={k_i!r}, k_j={k_j!r}, delta={delta!r}")
    if num == 0.0:
        return 0.0
    theta = 2.0 * math.atan2(num, den)
    return _wrap_pi(theta) if branch == "principal" else theta


def theta_matrix(momenta: Sequence[float], delta: float, branch: str = "principal") -> np.ndarray:
    """Antisymmetric matrix of scattering_phase over all momentum pairs (zero diagonal)."""
    k = np.asarray(momenta, dtype=float)
    m = len(k)
    out = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            t = scattering_phase(k[i], k[j], delta, branch)
            out[i, j] = t
            out[j, i] = -t
    return out


def _theta_rows(k: np.ndarray, delta: float) -> np.ndarray:
    """Row sums of the principal-branch theta matrix; vectorized solver kernel."""
    if delta == 0.0 or len(k) < 2:
        return np.zeros(len(k))
    diff = (k[:, None] - k[None, :]) / 2
    tot = (k[:, None] + k[None, :]) / 2
    num = delta * np.sin(diff)
    den = delta * np.cos(diff) - np.cos(tot)
    off = ~np.eye(len(k), dtype=bool)
    if np.any(off & (np.abs(num) < SINGULAR_EPS) & (np.abs(den) < SINGULAR_EPS)):
        raise SingularPairError(f"singular momentum pair in {k!r}")
    th = _wrap_pi(2.0 * np.arctan2(num, den))
    th[(num == 0.0) | ~off] = 0.0
    return th.sum(axis=1)


# --- quantum numbers ---------------------------------------------------------

def parse_quantum_number(q) -> Fraction:
    f = Fraction(q) if not isinstance(q, float) else Fraction(q).limit_denominator(2)
    if (2 * f).denominator != 1:
        raise BetheError(f"quantum number {q!r} is not a multiple of 1/2")
    return f


def check_quantum_numbers(L: int, M: int, quantum_numbers: Iterable) -> tuple[Fraction, ...]:
    """Validate length, parity (integers for odd M, half-integers for even M) and distinctness."""
    qs = tuple(parse_quantum_number(q) for q in quantum_numbers)
    if len(qs) != M:
        raise BetheError(f"expected {M} quantum numbers, got {len(qs)}")
    want_half = M % 2 == 0
    for q in qs:
        if (q.denominator == 2) != want_half:
            kind = "half-integers" if want_half else "integers"
            raise BetheError(f"M={M} requires {kind}; got {q}")
    if len(set(qs)) != len(qs):
        raise BetheError(f"quantum numbers must be distinct: {[str(q) for q in qs]}")
    return qs


def allowed_quantum_numbers(L: int, M: int) -> list[Fraction]:
    """Parity-correct values in (-L/2, L/2]."""
    offset = Fraction(1, 2) if M % 2 == 0 else Fraction(0)
    lo, hi = Fraction(-L, 2), Fraction(L, 2)
    out = []
    n = math.floor(lo) - 1
    while n <= hi + 1:
        v = n + offset
        if lo < v <= hi:
            out.append(v)
        n += 1
    return out


def enumerate_quantum_numbers(L: int, M: int) -> list[tuple[Fraction, ...]]:
    return list(itertools.combinations(allowed_quantum_numbers(L, M), M))


def format_quantum_number(q: Fraction) -> str:
    return f"{int(2 * q)}/2"


# --- solver ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BetheSolution:
    params: ModelParams
    quantum_numbers: tuple[Fraction, ...]
    momenta: np.ndarray
    theta: np.ndarray
    converged: bool
    residual: float
    iterations: int = 0

    @property
    def momenta_mod_2pi(self) -> np.ndarray:
        k = np.mod(self.momenta, TWO_PI)
        k[k > TWO_PI - 1e-12] = 0.0
        return k

    def same_as(self, other: BetheSolution, tol: float = 1e-7) -> bool:
        """True when both carry the same momenta modulo 2pi, in any order."""
        a = np.sort(self.momenta_mod_2pi)
        b = np.sort(other.momenta_mod_2pi)
        if a.shape != b.shape:
            return False
        gap = np.abs(a - b)
        return bool(np.all(np.minimum(gap, TWO_PI - gap) < tol))

    def to_json(self) -> dict:
        p = self.params
        return {
            "L": p.L,
            "M": p.M,
            "j_xy": p.j_xy,
            "j_z": p.j_z,
            "quantum_numbers": [format_quantum_number(q) for q in self.quantum_numbers],
            "momenta": [float(format(x, ".17g")) for x in self.momenta],
            "theta": [[float(format(x, ".17g")) for x in row] for row in self.theta],
            "residual": float(self.residual),
            "converged": bool(self.converged),
        }

    @classmethod
    def from_json(cls, doc: dict) -> BetheSolution:
        params = ModelParams(int(doc["L"]), int(doc["M"]), float(doc["j_xy"]), float(doc["j_z"]))
        qs = tuple(Fraction(q) for q in doc["quantum_numbers"])
        m = params.M
        theta = np.array(doc["theta"], dtype=float).reshape(m, m)
        return cls(params, qs, np.array(doc["momenta"], dtype=float), theta,
                   bool(doc["converged"]), float(doc["residual"]))


def bethe_residual(params: ModelParams, quantum_numbers, momenta, branch: str = "principal") -> float:
    k = np.asarray(momenta, dtype=float)
    I = np.array([float(q) for q in quantum_numbers])
    th = theta_matrix(k, params.delta, branch)
    if len(k) == 0:
        return 0.0
    return float(np.max(np.abs(params.L * k - TWO_PI * I - th.sum(axis=1))))


def _check_collisions(k: np.ndarray) -> None:
    km = np.mod(k, TWO_PI)
    for i in range(len(km)):
        for j in range(i + 1, len(km)):
            gap = abs(km[i] - km[j])
            if min(gap, TWO_PI - gap) < COLLISION_EPS:
                raise DegenerateSolutionError(
                    f"momenta {k[i]!r} and {k[j]!r} coincide modulo 2pi")


def solve_bethe(
    params: ModelParams,
    quantum_numbers: Iterable,
    damping: float = 0.5,
    tol: float = 1e-12,
    max_iter: int = 10_000,
) -> BetheSolution:
    """Damped fixed-point iteration of L k_i = 2 pi I_i + sum_j Theta(k_i, k_j).

    Starts from the free-fermion momenta 2 pi I_i / L. A run that does not reach
    ``tol`` comes back with ``converged=False`` and its last iterate.
    """
    if not 0 < damping <= 1:
        raise BetheError("damping must lie in (0, 1]")
    qs = check_quantum_numbers(params.L, params.M, quantum_numbers)
    L, delta = params.L, params.delta
    I = np.array([float(q) for q in qs])
    k = TWO_PI * I / L
    residual = math.inf
    it = 0
    for it in range(max_iter + 1):
        rows = _theta_rows(k, delta)
        residual = float(np.max(np.abs(L * k - TWO_PI * I - rows))) if len(k) else 0.0
        if residual <= tol or it == max_iter:
            break
        k = (1 - damping) * k + damping * (TWO_PI * I + rows) / L
    converged = residual <= tol
    if converged:
        _check_collisions(k)
    return BetheSolution(params, qs, k, theta_matrix(k, delta), converged, residual, it)


def scan_quantum_numbers(params: ModelParams, **solver_kw):
    """Yield ``(quantum_numbers, solution_or_None, status)`` for every allowed I-set.

    ``status`` is ``ok`` for a new distinct solution, otherwise one of
    ``nonconverged``, ``degenerate``, ``singular``, ``duplicate`` or ``vanishing``.
    """
    kept: list[BetheSolution] = []
    for qs in enumerate_quantum_numbers(params.L, params.M):
        try:
            sol = solve_bethe(params, qs, **solver_kw)
        except DegenerateSolutionError:
            yield qs, None, "degenerate"
            continue
        except SingularPairError:
            yield qs, None, "singular"
            continue
        if not sol.converged:
            yield qs, sol, "nonconverged"
            continue
        if any(sol.same_as(prev) for prev in kept):
            yield qs, sol, "duplicate"
            continue
        if params.M <= MAX_ORACLE_M:
            try:
                exact_state(sol)
            except VanishingStateError:
                yield qs, sol, "vanishing"
                continue
        kept.append(sol)
        yield qs, sol, "ok"


def enumerate_solutions(params: ModelParams, **solver_kw) -> list[BetheSolution]:
    """Distinct converged, non-degenerate, non-vanishing solutions over every allowed I-set.

    Results keep the enumeration order; duplicates (same momenta modulo 2pi) keep
    the first quantum-number set that reached them.
    """
    return [sol for _, sol, status in scan_quantum_numbers(params, **solver_kw) if status == "ok"]


# --- exact wavefunction --------------------------------------------------------

def sector_basis(L: int, M: int) -> np.ndarray:
    """Weight-M integers below 2^L in ascending order."""
    states = [sum(1 << x for x in xs) for xs in itertools.combinations(range(L), M)]
    return np.array(sorted(states), dtype=np.int64)


def sector_positions(L: int, M: int) -> np.ndarray:
    """(dim, M) array of ascending down-spin sites for each sector basis state."""
    basis = sector_basis(L, M)
    if M == 0:
        return np.zeros((len(basis), 0), dtype=np.int64)
    return np.array([[x for x in range(L) if (s >> x) & 1] for s in basis], dtype=np.int64)


def bubble_path(perm: Sequence[int]) -> list[int]:
    """Adjacent-transposition positions leading from the identity to ``perm``."""
    seq = list(perm)
    swaps = []
    for end in range(len(seq) - 1, 0, -1):
        for l in range(end):
            if seq[l] > seq[l + 1]:
                seq[l], seq[l + 1] = seq[l + 1], seq[l]
                swaps.append(l)
    return swaps[::-1]


def ap_coefficient(perm: Sequence[int], momenta: Sequence[float], delta: float,
                   path: Sequence[int] | None = None) -> complex:
    """A_P for a 1-based permutation, chained over adjacent transpositions from A_I = 1.

    Each step that places value a just before value b multiplies by
    -(1 + e^{i(k_a+k_b)} - 2 delta e^{i k_a}) / (1 + e^{i(k_a+k_b)} - 2 delta e^{i k_b})
    = -exp(+i Theta(k_a, k_b)).
    """
    m = len(perm)
    if sorted(perm) != list(range(1, m + 1)):
        raise BetheError(f"{perm!r} is not a permutation of 1..{m}")
    if path is None:
        path = bubble_path(perm)
    seq = list(range(1, m + 1))
    coeff = 1.0 + 0.0j
    for l in path:
        seq[l], seq[l + 1] = seq[l + 1], seq[l]
        a, b = seq[l], seq[l + 1]
        coeff *= -np.exp(1j * scattering_phase(momenta[a - 1], momenta[b - 1], delta))
    if tuple(seq) != tuple(perm):
        raise BetheError("transposition path does not reach the requested permutation")
    return complex(coeff)


@dataclass(frozen=True, eq=False)
class ExactBetheState:
    solution: BetheSolution
    ap_phases: dict = field(repr=False)
    amplitudes: np.ndarray = field(repr=False)
    norm_raw: float = 0.0

    @property
    def success_probability(self) -> float:
        """|alpha|^2 implied by the permutation-sum norm: ||psi_raw||^2 / (M!^2 C(L,M))."""
        p = self.solution.params
        return self.norm_raw ** 2 / (math.factorial(p.M) ** 2 * p.sector_dim)

    def full_vector(self) -> np.ndarray:
        """Amplitudes embedded into the 2^L system space."""
        p = self.solution.params
        out = np.zeros(1 << p.L, dtype=complex)
        out[sector_basis(p.L, p.M)] = self.amplitudes
        return out


def exact_state(solution: BetheSolution) -> ExactBetheState:
    """Normalized Bethe wavefunction sum_P A_P exp(i sum_j k_{Pj} x_j) on the sector."""
    if not solution.converged:
        raise BetheError("exact_state needs a converged solution")
    p = solution.params
    if p.M > MAX_ORACLE_M:
        raise BetheError(f"oracle limited to M <= {MAX_ORACLE_M} (M! terms)")
    k = np.asarray(solution.momenta, dtype=float)
    pos = sector_positions(p.L, p.M)
    raw = np.zeros(len(pos), dtype=complex)
    phases = {}
    for perm in itertools.permutations(range(1, p.M + 1)):
        a = ap_coefficient(perm, k, p.delta)
        phases[perm] = a
        kp = k[np.array(perm, dtype=int) - 1] if p.M else np.zeros(0)
        raw += a * np.exp(1j * (pos @ kp))
    norm = float(np.linalg.norm(raw))
    if norm < 1e-8 * math.sqrt(len(raw)):
        raise VanishingStateError("Bethe wavefunction vanishes for this solution")
    return ExactBetheState(solution, phases, raw / norm, norm)


# --- Hamiltonian oracles ---------------------------------------------------------

def _bonds(L: int):
    if L < 2:
        raise BetheError("the chain Hamiltonian needs L >= 2")
    return [(i, (i + 1) % L) for i in range(L)]


def apply_hamiltonian(params: ModelParams, state: np.ndarray) -> np.ndarray:
    """H @ state on the M-down-spin sector, matrix-free via bit operations."""
    L, M = params.L, params.M
    basis = sector_basis(L, M)
    psi = np.asarray(state)
    if psi.shape != (len(basis),):
        raise BetheError(f"state has shape {psi.shape}, sector dimension is {len(basis)}")
    out = np.zeros(len(basis), dtype=np.result_type(psi, float))
    for i, j in _bonds(L):
        bi = (basis >> i) & 1
        bj = (basis >> j) & 1
        aligned = bi == bj
        out += np.where(aligned, params.j_z / 4, -params.j_z / 4) * psi
        hop = ~aligned
        src = np.nonzero(hop)[0]
        dst = np.searchsorted(basis, basis[src] ^ ((1 << i) | (1 << j)))
        np.add.at(out, dst, (params.j_xy / 2) * psi[src])
    return out


def energy_of(params: ModelParams, state: np.ndarray) -> float:
    """Rayleigh quotient <state|H|state> of a unit-norm sector vector."""
    psi = np.asarray(state)
    norm = np.linalg.norm(psi)
    if abs(norm - 1) > 1e-8:
        raise BetheError(f"state norm {norm} is not 1")
    e = np.vdot(psi, apply_hamiltonian(params, psi))
    if abs(e.imag) > 1e-10:
        raise BetheError(f"energy has imaginary part {e.imag}")
    return float(e.real)


def eigen_residual(params: ModelParams, state: np.ndarray) -> tuple[float, float]:
    """(E, ||H psi - E psi||) for a unit-norm sector vector."""
    E = energy_of(params, state)
    return E, float(np.linalg.norm(apply_hamiltonian(params, state) - E * np.asarray(state)))


_SX = np.array([[0, 1], [1, 0]], dtype=complex) / 2
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex) / 2
_SZ = np.array([[1, 0], [0, -1]], dtype=complex) / 2


def _site_op(op: np.ndarray, site: int, L: int) -> np.ndarray:
    # kron order puts site L-1 first so that site x is bit x of the index
    mats = [op if s == site else np.eye(2) for s in reversed(range(L))]
    return reduce(np.kron, mats)


def dense_hamiltonian(params: ModelParams) -> np.ndarray:
    """Full 2^L matrix from Kronecker products of spin matrices; brute-force oracle."""
    L = params.L
    if L > 12:
        raise BetheError("dense Hamiltonian limited to L <= 12")
    dim = 1 << L
    H = np.zeros((dim, dim), dtype=complex)
    # bit 0 of the index carries spin-up as 0, spin-down as 1, so S^z is +1/2 on bit 0
    for i, j in _bonds(L):
        for op, c in ((_SX, params.j_xy), (_SY, params.j_xy), (_SZ, params.j_z)):
            H += c * _site_op(op, i, L) @ _site_op(op, j, L)
    return H


def dense_sector_hamiltonian(params: ModelParams) -> np.ndarray:
    idx = sector_basis(params.L, params.M)
    return dense_hamiltonian(params)[np.ix_(idx, idx)]
