"""Quantum channels in Kraus form, with amplitude damping as the noise model."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .qmath import DensityState, _as_square, _embed_matrix, _qubits_for_dim

COMPLETENESS_ATOL = 1e-10


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    """Completely positive trace-preserving map given by Kraus operators."""

    kraus: tuple[np.ndarray, ...]
    input_qubits: int = field(init=False)

    def __post_init__(self):
        ops = tuple(_as_square(k).copy() for k in self.kraus)
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        dim = ops[0].shape[0]
        if any(k.shape[0] != dim for k in ops):
            raise ValueError("Kraus operators have mismatched dimensions")
        n = _qubits_for_dim(dim)
        total = sum(k.conj().T @ k for k in ops)
        dev = float(np.max(np.abs(total - np.eye(dim))))
        if dev > COMPLETENESS_ATOL:
            raise ValueError(f"Kraus completeness violated (deviation {dev:.3e})")
        for k in ops:
            k.setflags(write=False)
        object.__setattr__(self, "kraus", ops)
        object.__setattr__(self, "input_qubits", n)

    def __repr__(self):
        return f"QuantumChannel(input_qubits={self.input_qubits}, kraus={len(self.kraus)})"


def amplitude_damping(gamma: float) -> QuantumChannel:
    """Single-qubit amplitude damping: |1> decays to |0> with probability gamma."""
    gamma = float(gamma)
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma {gamma} outside [0, 1]")
    e0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - gamma)]], dtype=complex)
    e1 = np.array([[0.0, np.sqrt(gamma)], [0.0, 0.0]], dtype=complex)
    return QuantumChannel((e0, e1))


def apply_channel(channel: QuantumChannel, rho: DensityState,
                  targets: Sequence[int] | Iterable[int]) -> DensityState:
    """Apply a channel to the given register qubits, identity on the rest."""
    targets = [int(t) for t in targets]
    if len(targets) != channel.input_qubits:
        raise ValueError(
            f"channel acts on {channel.input_qubits} qubits, got targets {targets}")
    out = np.zeros_like(rho.matrix)
    for k in channel.kraus:
        ke = _embed_matrix(k, targets, rho.num_qubits)
        out += ke @ rho.matrix @ ke.conj().T
    return DensityState(out, validate=False)


def choi_state(channel: QuantumChannel) -> DensityState:
    """Choi state of a single-qubit channel: feed half of |Phi+> through it.

    Qubit 0 is the untouched reference half, qubit 1 carries the channel
    output, so for amplitude damping the decayed weight sits on |10><10|.
    """
    if channel.input_qubits != 1:
        raise ValueError("choi_state is defined here for single-qubit channels")
    v = np.array([1.0, 0.0, 0.0, 1.0], dtype=complex) / np.sqrt(2.0)
    pair = DensityState(np.outer(v, v.conj()), validate=False)
    return apply_channel(channel, pair, targets=(1,))
