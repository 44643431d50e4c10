"""Gate, qubit and T-count accounting for the preparation circuits.

Counts come either from a built :class:`~betheprep.circuit.Circuit` ("measured")
or from closed forms in ``L`` and ``M`` ("formula"). T estimates use the usual
worst-case synthesis cost ``4 log2(1/eps) + 11`` per arbitrary rotation and two
T gates per Toffoli.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .circuit import Circuit, count_gates, depth

REPETITION_POLICIES = ("worst_case_factorial", "amplified_sqrt", "measured")
MAX_FACTORIAL_M = 20
ANGLE_TOL = 1e-12

# one row per (L, M); see README for meaning
CSV_COLUMNS = (
    "L", "M", "provenance", "qubits", "depth",
    "rotations", "toffolis", "cp_like", "ap_cp", "faucet_cp",
    "t_single_run", "repetitions", "t_total",
)
COMPARE_COLUMNS = ("direct_phasing", "compressed_label_faucet", "algorithm1")


def t_per_rotation(epsilon: float) -> float:
    return 4 * math.log2(1 / epsilon) + 11


@dataclass(frozen=True)
class ResourceModel:
    """T-cost model.

    ``repetitions`` is one of :data:`REPETITION_POLICIES`; the ``measured`` policy
    needs ``success_probability``. By default every rotation is charged as an
    arbitrary angle, which keeps the estimate independent of the particular
    eigenstate; with ``clifford_angles`` on, rotations at exact Clifford angles
    (multiples of pi/2 for RY/RZ, of pi for CP) cost nothing.
    """
    epsilon: float = 1e-10
    t_per_toffoli: int = 2
    repetitions: str = "worst_case_factorial"
    success_probability: float | None = None
    clifford_angles: bool = False

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.repetitions not in REPETITION_POLICIES:
            raise ValueError(f"unknown repetition policy {self.repetitions!r}")
        if self.repetitions == "measured":
            p = self.success_probability
            if p is None or not 0 < p <= 1:
                raise ValueError("measured policy needs a success probability in (0, 1]")

    @property
    def t_per_rotation(self) -> float:
        return t_per_rotation(self.epsilon)

    def repetition_count(self, M: int) -> int:
        if self.repetitions == "worst_case_factorial":
            return math.factorial(M)
        if self.repetitions == "amplified_sqrt":
            return math.isqrt(math.factorial(M) - 1) + 1
        return math.ceil(1 / self.success_probability - 1e-12)


def _is_multiple(angle: float, unit: float) -> bool:
    r = angle / unit
    return abs(r - round(r)) < ANGLE_TOL


def gate_cost(gate, model: ResourceModel) -> tuple[int, int]:
    """(arbitrary rotations, Toffolis) charged for one gate."""
    kind = gate.kind
    if kind in ("RY", "RZ"):
        if model.clifford_angles and _is_multiple(gate.angle, math.pi / 2):
            return 0, 0
        return 1, 0
    if kind == "CP":
        if model.clifford_angles and _is_multiple(gate.angle, math.pi):
            return 0, 0
        return 1, 0
    if kind == "CCP":
        # phase-gadget lowering: two CP-equivalent rotations, no Toffolis
        return 2, 0
    if kind in ("TOFFOLI", "CSWAP"):
        return 0, 1
    if kind == "MCX":
        return 0, 2 * len(gate.controls) - 3
    return 0, 0


@dataclass
class ResourceReport:
    L: int
    M: int
    counts: dict
    depth: int | None
    qubits: int
    rotations: int
    toffolis: int
    t_single_run: float
    repetitions: int
    t_total: float
    provenance: str
    extra: dict = field(default_factory=dict)

    @property
    def cp_like(self) -> int:
        return self.counts.get("CP", 0) + self.counts.get("CCP", 0)

    def to_json(self) -> dict:
        doc = {
            "L": self.L, "M": self.M, "provenance": self.provenance,
            "qubits": self.qubits, "depth": self.depth, "counts": dict(self.counts),
            "rotations": self.rotations, "toffolis": self.toffolis,
            "t_single_run": self.t_single_run, "repetitions": self.repetitions,
            "t_total": self.t_total,
        }
        doc.update(self.extra)
        return doc

    def csv_row(self) -> dict:
        f = formula_counts(self.L, self.M)
        return {
            "L": self.L, "M": self.M, "provenance": self.provenance,
            "qubits": self.qubits, "depth": "" if self.depth is None else self.depth,
            "rotations": self.rotations, "toffolis": self.toffolis,
            "cp_like": self.cp_like, "ap_cp": f["ap_cp"], "faucet_cp": f["faucet_ccp"],
            "t_single_run": f"{self.t_single_run:.6g}", "repetitions": self.repetitions,
            "t_total": f"{self.t_total:.6g}",
        }


def estimate(circuit: Circuit, model: ResourceModel = ResourceModel()) -> ResourceReport:
    """Measured counts and T estimates for ``circuit``."""
    rot = tof = 0
    for g in circuit.gates:
        r, t = gate_cost(g, model)
        rot += r
        tof += t
    t_single = rot * model.t_per_rotation + tof * model.t_per_toffoli
    lay = circuit.layout
    reps = model.repetition_count(lay.M)
    return ResourceReport(
        L=lay.L, M=lay.M, counts=count_gates(circuit), depth=depth(circuit),
        qubits=lay.total, rotations=rot, toffolis=tof, t_single_run=t_single,
        repetitions=reps, t_total=t_single * reps, provenance="measured",
    )


def formula_counts(L: int, M: int) -> dict:
    """Closed-form controlled-phase and qubit counts of the unamplified circuit."""
    if M < 1 or L < M:
        raise ValueError(f"need 1 <= M <= L, got L={L}, M={M}")
    ap = M * (M - 1) * (2 * M - 1) // 6  # M^3/3 - M^2/2 + M/6
    faucet = M * M * L
    return {
        "ap_cp": ap,
        "faucet_ccp": faucet,
        "total_cp_like": ap + faucet,
        "qubits_core": L + M * M + M + 1,
    }


def alternative_costs(L: int, M: int) -> dict:
    """Controlled-phase counts of the two alternative constructions versus ours.

    Exact integers; ``M`` is capped at 20 to keep the factorial tame.
    """
    if M > MAX_FACTORIAL_M:
        raise OverflowError(f"M={M} exceeds the factorial guard ({MAX_FACTORIAL_M})")
    if M < 1 or L < M:
        raise ValueError(f"need 1 <= M <= L, got L={L}, M={M}")
    fact = math.factorial(M)
    return {
        "direct_phasing": fact * math.comb(L, M),
        "compressed_label_faucet": fact * L * M,
        "algorithm1": formula_counts(L, M)["total_cp_like"],
    }
