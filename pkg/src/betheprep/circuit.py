"""Gate-list circuit representation with counting, depth and a dense-unitary oracle.

Qubit ``q`` is bit ``q`` of a basis-state index (little-endian). Controls carry a
polarity: a positive control fires on ``|1>``, a negative control on ``|0>``.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

KINDS = ("X", "H", "RY", "RZ", "CX", "CP", "CCP", "TOFFOLI", "CSWAP", "MCX")
ROTATION_KINDS = frozenset({"RY", "RZ", "CP", "CCP"})
SELF_INVERSE_KINDS = frozenset({"X", "H", "CX", "TOFFOLI", "CSWAP", "MCX"})

# kind -> (number of targets, allowed control counts)
_ARITY = {
    "X": (1, (0,)),
    "H": (1, (0,)),
    "RY": (1, (0,)),
    "RZ": (1, (0,)),
    "CX": (1, (1,)),
    "CP": (1, (1,)),
    "CCP": (1, (2,)),
    "TOFFOLI": (1, (2,)),
    "CSWAP": (2, (1,)),
}

UNITARY_QUBIT_LIMIT = 12


class CircuitError(ValueError):
    """Raised for malformed gates, layouts or circuit text."""


@dataclass(frozen=True)
class Gate:
    kind: str
    targets: tuple[int, ...]
    controls: tuple[tuple[int, bool], ...] = ()
    angle: float | None = None
    tag: str = field(default="", compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        n_t = len(self.targets)
        n_c = len(self.controls)
        if self.kind == "MCX":
            if n_t != 1 or n_c < 3:
                raise CircuitError("MCX needs one target and at least 3 controls")
        else:
            want_t, want_c = _ARITY[self.kind]
            if n_t != want_t or n_c not in want_c:
                raise CircuitError(
                    f"{self.kind} expects {want_t} target(s) and {want_c} control(s), "
                    f"got {n_t} and {n_c}"
                )
        qubits = list(self.targets) + [q for q, _ in self.controls]
        if len(set(qubits)) != len(qubits):
            raise CircuitError(f"{self.kind}: targets and controls must be distinct qubits")
        if any(q < 0 for q in qubits):
            raise CircuitError(f"{self.kind}: negative qubit index")
        if self.kind in ROTATION_KINDS:
            if self.angle is None or not math.isfinite(self.angle):
                raise CircuitError(f"{self.kind} needs a finite angle")
        elif self.angle is not None:
            raise CircuitError(f"{self.kind} takes no angle")

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.targets + tuple(q for q, _ in self.controls)

    def inverse(self) -> Gate:
        if self.kind in SELF_INVERSE_KINDS:
            return self
        return replace(self, angle=-self.angle)


def controlled_x(target: int, controls: Sequence[tuple[int, bool]], tag: str = "") -> Gate:
    """X with any number of controls, normalized to X/CX/TOFFOLI/MCX."""
    kind = {0: "X", 1: "CX", 2: "TOFFOLI"}.get(len(controls), "MCX")
    return Gate(kind, (target,), tuple(controls), tag=tag)


@dataclass(frozen=True)
class QubitLayout:
    """Named registers laid out contiguously: system, perm_label, faucet, work, aa_ancilla."""

    L: int
    M: int
    work: int = 1
    aa_ancilla: int = 0

    def __post_init__(self):
        if self.L < 1 or not 0 <= self.M <= self.L:
            raise CircuitError(f"invalid sizes L={self.L}, M={self.M}")
        if self.work < 1 or self.aa_ancilla < 0:
            raise CircuitError("work must be >= 1 and aa_ancilla >= 0")

    @property
    def system(self) -> range:
        return range(0, self.L)

    @property
    def perm_label(self) -> range:
        return range(self.L, self.L + self.M * self.M)

    @property
    def faucet(self) -> range:
        start = self.L + self.M * self.M
        return range(start, start + self.M)

    @property
    def work_qubits(self) -> range:
        start = self.L + self.M * self.M + self.M
        return range(start, start + self.work)

    @property
    def aa_qubits(self) -> range:
        start = self.L + self.M * self.M + self.M + self.work
        return range(start, start + self.aa_ancilla)

    @property
    def total(self) -> int:
        return self.L + self.M * self.M + self.M + self.work + self.aa_ancilla

    @property
    def core_total(self) -> int:
        """System plus the M^2 + M + 1 ancillas of the bare algorithm."""
        return self.L + self.M * self.M + self.M + 1

    def label_qubit(self, sub: int, value: int) -> int:
        """Qubit of one-hot label subregister ``sub`` holding value index ``value`` (both 0-based)."""
        if not (0 <= sub < self.M and 0 <= value < self.M):
            raise CircuitError(f"label index ({sub}, {value}) out of range for M={self.M}")
        return self.L + sub * self.M + value

    def faucet_qubit(self, j: int) -> int:
        return self.faucet[j]

    def ancillas(self) -> list[int]:
        return list(range(self.L, self.total))

    def header(self) -> str:
        return f"layout L={self.L} M={self.M} work={self.work} aa_ancilla={self.aa_ancilla}"


@dataclass(frozen=True)
class Circuit:
    layout: QubitLayout
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        n = self.layout.total
        for g in self.gates:
            if max(g.qubits) >= n:
                raise CircuitError(f"{g.kind} on qubit {max(g.qubits)} outside layout of {n} qubits")

    def __len__(self) -> int:
        return len(self.gates)

    def __add__(self, other: Circuit) -> Circuit:
        if other.layout != self.layout:
            raise CircuitError("cannot concatenate circuits over different layouts")
        return Circuit(self.layout, self.gates + other.gates)

    def inverse(self) -> Circuit:
        return Circuit(self.layout, tuple(g.inverse() for g in reversed(self.gates)))

    def retag(self, tag: str) -> Circuit:
        return Circuit(self.layout, tuple(replace(g, tag=tag) for g in self.gates))

    def with_layout(self, layout: QubitLayout) -> Circuit:
        """Same gates over a larger layout sharing the register prefix."""
        if (layout.L, layout.M) != (self.layout.L, self.layout.M) or layout.work < self.layout.work:
            raise CircuitError("layout change must keep L, M and not shrink the work register")
        if layout.work != self.layout.work and self.layout.aa_ancilla:
            raise CircuitError("cannot grow work when aa_ancilla qubits are in use")
        return Circuit(layout, self.gates)

    @property
    def metadata(self) -> list[str]:
        """Build-step tag of every gate, in order."""
        return [g.tag for g in self.gates]


def count_gates(circuit: Circuit) -> dict[str, int]:
    """Exact tally per gate kind; every kind is present, zero if unused."""
    tally = Counter(g.kind for g in circuit.gates)
    return {kind: tally.get(kind, 0) for kind in KINDS}


def count_by_tag(circuit: Circuit, kinds: Iterable[str] | None = None) -> dict[str, int]:
    keep = set(kinds) if kinds is not None else None
    tally: Counter = Counter()
    for g in circuit.gates:
        if keep is None or g.kind in keep:
            tally[g.tag] += 1
    return dict(tally)


def depth(circuit: Circuit) -> int:
    """As-soon-as-possible layer count; each gate occupies one layer on all its qubits."""
    level: dict[int, int] = {}
    layers = 0
    for g in circuit.gates:
        layer = max((level.get(q, 0) for q in g.qubits), default=0) + 1
        for q in g.qubits:
            level[q] = layer
        layers = max(layers, layer)
    return layers


def _controls_ok(index: int, controls) -> bool:
    return all(((index >> q) & 1) == int(pos) for q, pos in controls)


def gate_matrix(gate: Gate, n_qubits: int) -> np.ndarray:
    """Full 2^n x 2^n matrix of one gate, built column by column from its basis action."""
    dim = 1 << n_qubits
    U = np.zeros((dim, dim), dtype=complex)
    kind, theta = gate.kind, gate.angle
    for col in range(dim):
        if not _controls_ok(col, gate.controls):
            U[col, col] = 1.0
            continue
        if kind == "CSWAP":
            a, b = gate.targets
            ba, bb = (col >> a) & 1, (col >> b) & 1
            row = col
            if ba != bb:
                row = col ^ (1 << a) ^ (1 << b)
            U[row, col] = 1.0
            continue
        t = gate.targets[0]
        bit = (col >> t) & 1
        flipped = col ^ (1 << t)
        if kind in ("X", "CX", "TOFFOLI", "MCX"):
            U[flipped, col] = 1.0
        elif kind in ("CP", "CCP"):
            U[col, col] = np.exp(1j * theta) if bit else 1.0
        elif kind == "RZ":
            U[col, col] = np.exp(1j * theta / 2) if bit else np.exp(-1j * theta / 2)
        elif kind == "RY":
            c, s = math.cos(theta / 2), math.sin(theta / 2)
            # columns of [[c, -s], [s, c]]
            U[col, col] = c
            U[flipped, col] = s if bit == 0 else -s
        elif kind == "H":
            r = 1 / math.sqrt(2)
            U[col, col] = r if bit == 0 else -r
            U[flipped, col] = r
    return U


def unitary_of(circuit: Circuit, max_qubits: int = UNITARY_QUBIT_LIMIT) -> np.ndarray:
    """Dense unitary of the whole circuit; a test oracle for small layouts only."""
    n = circuit.layout.total
    if n > max_qubits:
        raise CircuitError(f"unitary_of limited to {max_qubits} qubits, layout has {n}")
    U = np.eye(1 << n, dtype=complex)
    for g in circuit.gates:
        U = gate_matrix(g, n) @ U
    return U


# --- text format -----------------------------------------------------------

TEXT_MAGIC = "# betheprep circuit v1"


def _fmt_angle(x: float) -> str:
    return format(x, ".17g")


def gate_to_line(g: Gate) -> str:
    parts = [g.kind]
    if g.angle is not None:
        parts.append(_fmt_angle(g.angle))
    parts.append(" ".join(str(t) for t in g.targets))
    line = " ".join(parts) + " |"
    if g.controls:
        line += " " + " ".join(f"{q}{'+' if pos else '-'}" for q, pos in g.controls)
    if g.tag:
        line += f" @{g.tag}"
    return line


def line_to_gate(line: str) -> Gate:
    tag = ""
    if "@" in line:
        line, tag = line.rsplit("@", 1)
        tag = tag.strip()
    if "|" not in line:
        raise CircuitError(f"gate line missing '|': {line!r}")
    left, right = line.split("|", 1)
    tokens = left.split()
    if not tokens:
        raise CircuitError("empty gate line")
    kind = tokens[0]
    rest = tokens[1:]
    angle = None
    if kind in ROTATION_KINDS:
        if not rest:
            raise CircuitError(f"{kind} line missing angle")
        angle = float(rest[0])
        rest = rest[1:]
    targets = tuple(int(t) for t in rest)
    controls = []
    for tok in right.split():
        if tok[-1] not in "+-":
            raise CircuitError(f"control {tok!r} lacks polarity")
        controls.append((int(tok[:-1]), tok[-1] == "+"))
    return Gate(kind, targets, tuple(controls), angle, tag)


def to_text(circuit: Circuit) -> str:
    lines = [TEXT_MAGIC, circuit.layout.header()]
    lines.extend(gate_to_line(g) for g in circuit.gates)
    return "\n".join(lines) + "\n"


def from_text(text: str) -> Circuit:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != TEXT_MAGIC:
        raise CircuitError("missing circuit text header")
    head = lines[1].split()
    if head[0] != "layout":
        raise CircuitError("second line must describe the layout")
    fields = dict(tok.split("=") for tok in head[1:])
    layout = QubitLayout(int(fields["L"]), int(fields["M"]), int(fields["work"]), int(fields["aa_ancilla"]))
    gates = [line_to_gate(ln) for ln in lines[2:] if not ln.startswith("#")]
    return Circuit(layout, gates)
