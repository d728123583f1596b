"""Exact coefficient calculus for Bell-diagonal states of entangled pairs.

A k-pair Bell-diagonal state is a probability vector over 4**k joint Bell
labels in the fixed order (Phi+, Psi+, Phi-, Psi-), pair 0 being the most
significant base-4 digit. This mirrors how the corresponding density matrix
is built by Kronecker products, so kron(a, b) is the coefficient vector of
the two-pair product state.

The three operations below are the exact images of the corresponding
circuit-level operations, which lets a handful of distillation protocols be
evaluated without touching a density matrix:

* a local RX(+pi/2) on one half and RX(-pi/2) on the other permutes the
  Bell labels of that pair as (p0, p1, p2, p3) -> (p0, p1, p3, p2);
* a bilateral CNOT (both halves of a control pair onto both halves of a
  target pair) permutes the 16 joint labels of the two pairs;
* measuring both halves of a pair in the computational basis and keeping
  the coinciding outcomes retains the Phi+ and Phi- components.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .qmath import DensityState

COEFF_ATOL = 1e-12
PRUNE_EPS = 1e-14

BELL_LABELS = ("phi_plus", "psi_plus", "phi_minus", "psi_minus")

_SQ2 = np.sqrt(2.0)
BELL_VECTORS = (
    np.array([1, 0, 0, 1], dtype=complex) / _SQ2,   # phi_plus
    np.array([0, 1, 1, 0], dtype=complex) / _SQ2,   # psi_plus
    np.array([1, 0, 0, -1], dtype=complex) / _SQ2,  # phi_minus
    np.array([0, 1, -1, 0], dtype=complex) / _SQ2,  # psi_minus
)
_BELL_PROJECTORS = tuple(np.outer(v, v.conj()) for v in BELL_VECTORS)

# joint-label permutation of a bilateral CNOT acting on (control pair,
# target pair): output position q reads input position _BCNOT_SOURCE[q]
_BCNOT_SOURCE = (0, 1, 10, 11, 5, 4, 15, 14, 8, 9, 2, 3, 13, 12, 7, 6)

# local RX(+pi/2) x RX(-pi/2) swaps Phi- and Psi-
_RX_SOURCE = (0, 1, 3, 2)


@dataclass(frozen=True, eq=False)
class BellDiagonal:
    """Probability vector over the 4**k joint Bell labels of k pairs."""

    coeffs: np.ndarray
    num_pairs: int = field(init=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float).reshape(-1).copy()
        k = 0
        while 4**k < c.size:
            k += 1
        if 4**k != c.size:
            raise ValueError(f"length {c.size} is not a power of four")
        if float(c.min(initial=0.0)) < -COEFF_ATOL:
            raise ValueError(f"negative coefficient {c.min():.3e}")
        if abs(float(c.sum()) - 1.0) > COEFF_ATOL:
            raise ValueError(f"coefficients sum to {c.sum()!r}, not 1")
        np.clip(c, 0.0, None, out=c)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "num_pairs", k)

    def __repr__(self):
        return f"BellDiagonal(num_pairs={self.num_pairs})"


def _digit_view(state: BellDiagonal) -> np.ndarray:
    return state.coeffs.reshape((4,) * state.num_pairs)


def _check_pair(state: BellDiagonal, pair: int):
    if not 0 <= pair < state.num_pairs:
        raise IndexError(f"pair {pair} out of range for {state.num_pairs} pairs")


def rx_pair_map(state: BellDiagonal, pair: int) -> BellDiagonal:
    """Coefficient image of RX(+pi/2) on one half of a pair, RX(-pi/2) on the other."""
    _check_pair(state, pair)
    arr = np.take(_digit_view(state), _RX_SOURCE, axis=pair)
    return BellDiagonal(arr.reshape(-1))


def bilateral_cnot(state: BellDiagonal, control_pair: int,
                   target_pair: int) -> BellDiagonal:
    """Coefficient image of CNOTs from both halves of one pair onto another."""
    _check_pair(state, control_pair)
    _check_pair(state, target_pair)
    if control_pair == target_pair:
        raise ValueError("control and target pair must differ")
    k = state.num_pairs
    arr = np.moveaxis(_digit_view(state), (control_pair, target_pair), (0, 1))
    flat = arr.reshape(16, -1)
    out = flat[list(_BCNOT_SOURCE), :]
    out = np.moveaxis(out.reshape((4, 4) + arr.shape[2:]),
                      (0, 1), (control_pair, target_pair))
    return BellDiagonal(out.reshape(-1))


def coincidence_measure(state: BellDiagonal,
                        pair: int) -> tuple[BellDiagonal | None, float]:
    """Measure both halves of a pair, keep coinciding outcomes, drop the pair.

    Coinciding computational outcomes retain the Phi+ and Phi- components of
    the measured pair. Returns the renormalized state on the remaining pairs
    and the retained probability mass; the state is None when that mass falls
    below the pruning threshold.
    """
    _check_pair(state, pair)
    arr = _digit_view(state)
    retained = np.take(arr, 0, axis=pair) + np.take(arr, 2, axis=pair)
    p_succ = float(retained.sum())
    if p_succ < PRUNE_EPS:
        return None, 0.0
    return BellDiagonal(retained.reshape(-1) / p_succ), p_succ


def to_density(state: BellDiagonal) -> DensityState:
    """Dense density matrix with pair i on register qubits (2i, 2i+1)."""
    k = state.num_pairs
    dim = 4**k
    out = np.zeros((dim, dim), dtype=complex)
    for idx, c in enumerate(state.coeffs):
        if c == 0.0:
            continue
        # base-4 digits of the joint label, pair 0 most significant
        digits = [(idx // 4 ** (k - 1 - i)) % 4 for i in range(k)]
        proj = _BELL_PROJECTORS[digits[0]]
        for d in digits[1:]:
            proj = np.kron(proj, _BELL_PROJECTORS[d])
        out += c * proj
    return DensityState(out, validate=False)


def bell_matrix_elements(rho: DensityState) -> np.ndarray:
    """Matrix elements <B_i|rho|B_j> of a state in the joint Bell basis.

    The register must hold pairs laid out as (2i, 2i+1), matching
    ``to_density``. For a single pair the diagonal gives the four Bell
    coefficients in the standard order.
    """
    if rho.num_qubits % 2 != 0:
        raise ValueError("need an even number of qubits")
    k = rho.num_qubits // 2
    basis = np.stack(BELL_VECTORS, axis=1)
    change = basis
    for _ in range(k - 1):
        change = np.kron(change, basis)
    return change.conj().T @ rho.matrix @ change


def dejmps_exact(a: Sequence[float], b: Sequence[float]) -> tuple[float, float]:
    """Output fidelity and success probability of one DEJMPS round, exactly.

    ``a`` and ``b`` are the 4-tuples of the two input pairs. The round is the
    RX pair maps on both pairs, a bilateral CNOT from pair 0 onto pair 1, and
    a coincidence measurement of pair 1; the returned fidelity is the Phi+
    coefficient of the surviving pair.
    """
    joint = BellDiagonal(np.kron(np.asarray(a, dtype=float),
                                 np.asarray(b, dtype=float)))
    joint = rx_pair_map(joint, 0)
    joint = rx_pair_map(joint, 1)
    joint = bilateral_cnot(joint, 0, 1)
    remaining, p_succ = coincidence_measure(joint, 1)
    if remaining is None:
        raise ValueError("coincidence measurement retained no probability mass")
    return float(remaining.coeffs[0]), p_succ


def dejmps_output_tuple(a: Sequence[float], b: Sequence[float]) -> tuple[np.ndarray, float]:
    """Full Bell tuple of the surviving pair after one DEJMPS round."""
    joint = BellDiagonal(np.kron(np.asarray(a, dtype=float),
                                 np.asarray(b, dtype=float)))
    joint = rx_pair_map(joint, 0)
    joint = rx_pair_map(joint, 1)
    joint = bilateral_cnot(joint, 0, 1)
    remaining, p_succ = coincidence_measure(joint, 1)
    if remaining is None:
        raise ValueError("coincidence measurement retained no probability mass")
    return remaining.coeffs.copy(), p_succ
