"""Parameterized circuits over a fixed gate set: RX, RY, RZ, H, X, CNOT.

Rotations use the half-angle convention, RX(t) = exp(-i t X / 2) and likewise
for RY/RZ. A rotation gate either carries a fixed angle or references a
parameter slot that is bound at application time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .qmath import DensityState, _embed_matrix

ROTATION_KINDS = ("RX", "RY", "RZ")
FIXED_KINDS = ("H", "X", "CNOT")
GATE_ARITY = {"RX": 1, "RY": 1, "RZ": 1, "H": 1, "X": 1, "CNOT": 2}

_H = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)
_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
# basis |control target>, control is the first (high-order) qubit
_CNOT = np.array([[1, 0, 0, 0],
                  [0, 1, 0, 0],
                  [0, 0, 0, 1],
                  [0, 0, 1, 0]], dtype=complex)


@dataclass(frozen=True)
class GateSpec:
    """One gate: kind, target qubits, and a fixed angle or a parameter slot."""

    kind: str
    targets: tuple[int, ...]
    angle: float | None = None
    param_slot: int | None = None

    def __post_init__(self):
        if self.kind not in GATE_ARITY:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        targets = tuple(int(t) for t in self.targets)
        object.__setattr__(self, "targets", targets)
        if len(targets) != GATE_ARITY[self.kind]:
            raise ValueError(f"{self.kind} takes {GATE_ARITY[self.kind]} targets, "
                             f"got {targets}")
        if len(set(targets)) != len(targets):
            raise ValueError(f"repeated target in {targets}")
        if self.kind in ROTATION_KINDS:
            if (self.angle is None) == (self.param_slot is None):
                raise ValueError(
                    f"{self.kind} needs exactly one of angle / param_slot")
            if self.angle is not None:
                object.__setattr__(self, "angle", float(self.angle))
            if self.param_slot is not None and int(self.param_slot) < 0:
                raise ValueError("param_slot must be nonnegative")
        elif self.angle is not None or self.param_slot is not None:
            raise ValueError(f"{self.kind} takes no angle or parameter")


def rx(target: int, angle: float | None = None, slot: int | None = None) -> GateSpec:
    return GateSpec("RX", (target,), angle, slot)


def ry(target: int, angle: float | None = None, slot: int | None = None) -> GateSpec:
    return GateSpec("RY", (target,), angle, slot)


def rz(target: int, angle: float | None = None, slot: int | None = None) -> GateSpec:
    return GateSpec("RZ", (target,), angle, slot)


def h(target: int) -> GateSpec:
    return GateSpec("H", (target,))


def x(target: int) -> GateSpec:
    return GateSpec("X", (target,))


def cnot(control: int, target: int) -> GateSpec:
    return GateSpec("CNOT", (control, target))


@dataclass(frozen=True)
class Circuit:
    """Ordered gate list on a register of num_qubits, with num_params slots."""

    num_qubits: int
    gates: tuple[GateSpec, ...]
    num_params: int = 0

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if any(t >= self.num_qubits for t in g.targets):
                raise ValueError(f"gate {g} targets outside {self.num_qubits} qubits")
            if g.param_slot is not None and g.param_slot >= self.num_params:
                raise ValueError(f"gate {g} references slot >= {self.num_params}")

    @property
    def touched_qubits(self) -> frozenset[int]:
        return frozenset(t for g in self.gates for t in g.targets)


def gate_matrix(gate: GateSpec, angle: float | None = None) -> np.ndarray:
    """Dense matrix of one gate; ``angle`` binds a slot-parameterized rotation."""
    if gate.kind in ROTATION_KINDS:
        if gate.angle is not None:
            theta = gate.angle
        elif angle is not None:
            theta = float(angle)
        else:
            raise ValueError(f"gate {gate} has an unbound parameter")
        c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
        if gate.kind == "RX":
            return np.array([[c, -1j * s], [-1j * s, c]])
        if gate.kind == "RY":
            return np.array([[c, -s], [s, c]], dtype=complex)
        return np.array([[np.exp(-0.5j * theta), 0.0],
                         [0.0, np.exp(0.5j * theta)]])
    if gate.kind == "H":
        return _H.copy()
    if gate.kind == "X":
        return _X.copy()
    return _CNOT.copy()


def _resolve_angle(gate: GateSpec, params) -> float | None:
    if gate.param_slot is None:
        return None
    return float(params[gate.param_slot])


def apply_circuit(circuit: Circuit, params: Sequence[float],
                  rho: DensityState) -> DensityState:
    """Conjugate a state by the circuit unitary with parameters bound."""
    if rho.num_qubits != circuit.num_qubits:
        raise ValueError("state and circuit register sizes differ")
    params = np.asarray(params, dtype=float)
    if params.shape != (circuit.num_params,):
        raise ValueError(f"expected {circuit.num_params} parameters, "
                         f"got shape {params.shape}")
    mat = rho.matrix
    for g in circuit.gates:
        u = _embed_matrix(gate_matrix(g, _resolve_angle(g, params)),
                          g.targets, circuit.num_qubits)
        mat = u @ mat @ u.conj().T
    return DensityState(mat, validate=False)


def circuit_unitary(circuit: Circuit, params: Sequence[float] = ()) -> np.ndarray:
    """Full register unitary of the circuit (gates applied left to right)."""
    params = np.asarray(params, dtype=float)
    if params.shape != (circuit.num_params,):
        raise ValueError(f"expected {circuit.num_params} parameters")
    u = np.eye(2**circuit.num_qubits, dtype=complex)
    for g in circuit.gates:
        ge = _embed_matrix(gate_matrix(g, _resolve_angle(g, params)),
                           g.targets, circuit.num_qubits)
        u = ge @ u
    return u


# --- serialization ---------------------------------------------------------
#
# A circuit is a nested key/value document: num_qubits, num_params and an
# ordered gate list. Fixed angles are written with full float precision
# (repr round-trip, at most 17 significant digits) so loading is bit-exact.

def circuit_to_dict(circuit: Circuit) -> dict:
    gates = []
    for g in circuit.gates:
        entry: dict = {"kind": g.kind, "targets": list(g.targets)}
        if g.angle is not None:
            entry["angle"] = g.angle
        if g.param_slot is not None:
            entry["param_slot"] = g.param_slot
        gates.append(entry)
    return {"num_qubits": circuit.num_qubits,
            "num_params": circuit.num_params,
            "gates": gates}


def circuit_from_dict(doc: dict) -> Circuit:
    gates = tuple(GateSpec(kind=e["kind"], targets=tuple(e["targets"]),
                           angle=e.get("angle"), param_slot=e.get("param_slot"))
                  for e in doc["gates"])
    return Circuit(num_qubits=int(doc["num_qubits"]), gates=gates,
                   num_params=int(doc.get("num_params", 0)))


def dumps_circuit(circuit: Circuit) -> str:
    return json.dumps(circuit_to_dict(circuit), indent=1)


def loads_circuit(text: str) -> Circuit:
    return circuit_from_dict(json.loads(text))
