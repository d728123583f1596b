"""Dense linear-algebra primitives for small qubit registers.

Conventions used throughout the package: qubit 0 is the leftmost ket label
and the most significant bit of a matrix index, so |01> sits at index 1 in
dimension 4. States are immutable after construction and operations never
mutate their inputs.
"""

from __future__ import annotations

from dataclasses import InitVar, dataclass, field
from typing import Iterable, Sequence

import numpy as np

HERMITIAN_ATOL = 1e-10
TRACE_ATOL = 1e-10
PSD_ATOL = 1e-9
UNITARY_ATOL = 1e-10
NORM_ATOL = 1e-12


def _as_square(m) -> np.ndarray:
    mat = np.asarray(m, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {mat.shape}")
    return mat


def _qubits_for_dim(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim <= 0 or 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


def matrices_close(a, b, atol: float) -> bool:
    """Entrywise equality of two complex matrices with an explicit absolute tolerance."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        return False
    if a.size == 0:
        return True
    return float(np.max(np.abs(a - b))) <= atol


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized state vector on an ordered qubit register."""

    amplitudes: np.ndarray
    num_qubits: int = field(init=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1).copy()
        n = _qubits_for_dim(amps.size)
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > NORM_ATOL:
            raise ValueError(f"state vector norm {norm!r} is not 1")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "num_qubits", n)

    def to_density(self) -> "DensityState":
        return DensityState(np.outer(self.amplitudes, self.amplitudes.conj()),
                            validate=False)

    def __repr__(self):
        return f"PureState(num_qubits={self.num_qubits})"


@dataclass(frozen=True, eq=False)
class DensityState:
    """Hermitian, positive-semidefinite, unit-trace matrix on a qubit register.

    ``validate=False`` skips the invariant checks; it is meant for internal
    constructions that preserve them by design (tensor products, unitary
    conjugation, renormalized measurement branches).
    """

    matrix: np.ndarray
    validate: InitVar[bool] = True
    num_qubits: int = field(init=False)

    def __post_init__(self, validate):
        mat = _as_square(self.matrix).copy()
        n = _qubits_for_dim(mat.shape[0])
        if validate:
            herm = float(np.max(np.abs(mat - mat.conj().T)))
            if herm > HERMITIAN_ATOL:
                raise ValueError(f"matrix is not Hermitian (deviation {herm:.3e})")
            tr = complex(np.trace(mat))
            if abs(tr - 1.0) > TRACE_ATOL:
                raise ValueError(f"trace {tr!r} is not 1")
            evmin = float(np.linalg.eigvalsh(mat).min())
            if evmin < -PSD_ATOL:
                raise ValueError(f"matrix has negative eigenvalue {evmin:.3e}")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "num_qubits", n)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __repr__(self):
        return f"DensityState(num_qubits={self.num_qubits})"


def basis_ket(bits: Sequence[int] | str) -> PureState:
    """Computational-basis state for a bit pattern such as "01" or (0, 1)."""
    pattern = [int(b) for b in bits]
    if any(b not in (0, 1) for b in pattern):
        raise ValueError(f"bit pattern {bits!r} is not binary")
    idx = 0
    for b in pattern:
        idx = (idx << 1) | b
    vec = np.zeros(2 ** len(pattern), dtype=complex)
    vec[idx] = 1.0
    return PureState(vec)


def tensor(a: DensityState, b: DensityState) -> DensityState:
    """Kronecker product of two states; a's qubits become the high-order block."""
    return DensityState(np.kron(a.matrix, b.matrix), validate=False)


def partial_trace(rho: DensityState, keep: Iterable[int]) -> DensityState:
    """Trace out every qubit not listed in ``keep``.

    The kept qubits retain their relative register order. ``keep`` may be
    empty, in which case the result is the trivial state on zero qubits.
    """
    n = rho.num_qubits
    kept = sorted(set(int(q) for q in keep))
    if any(q < 0 or q >= n for q in kept):
        raise IndexError(f"keep set {kept} out of range for {n} qubits")
    drop = [q for q in range(n) if q not in kept]
    if not drop:
        return rho
    mat = rho.matrix
    cur = n
    t = mat.reshape((2,) * (2 * n))
    for q in sorted(drop, reverse=True):
        t = np.trace(t, axis1=q, axis2=q + cur)
        cur -= 1
    d = 2**cur
    return DensityState(t.reshape(d, d), validate=False)


def _permute_matrix_qubits(mat: np.ndarray, perm: Sequence[int]) -> np.ndarray:
    """Apply a qubit relabeling to any square matrix; perm[i] is qubit i's new position."""
    n = _qubits_for_dim(mat.shape[0])
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(n)):
        raise ValueError(f"{perm} is not a permutation of 0..{n - 1}")
    inv = [0] * n
    for i, p in enumerate(perm):
        inv[p] = i
    t = mat.reshape((2,) * (2 * n))
    axes = inv + [n + i for i in inv]
    return np.ascontiguousarray(t.transpose(axes).reshape(mat.shape))


def permute_qubits(rho: DensityState, perm: Sequence[int]) -> DensityState:
    """Relabel register qubits; ``perm[i]`` is the new position of qubit i."""
    return DensityState(_permute_matrix_qubits(rho.matrix, perm), validate=False)


def _embed_matrix(op: np.ndarray, targets: Sequence[int], num_qubits: int) -> np.ndarray:
    """Embed a k-qubit operator on ordered targets into a num_qubits register."""
    op = _as_square(op)
    k = _qubits_for_dim(op.shape[0])
    targets = [int(t) for t in targets]
    if len(targets) != k or len(set(targets)) != k:
        raise ValueError(f"need {k} distinct targets, got {targets}")
    if any(t < 0 or t >= num_qubits for t in targets):
        raise IndexError(f"targets {targets} out of range for {num_qubits} qubits")
    full = np.kron(op, np.eye(2 ** (num_qubits - k), dtype=complex))
    # full currently acts on the qubit sequence targets + (the rest, ascending)
    order = targets + [q for q in range(num_qubits) if q not in targets]
    return _permute_matrix_qubits(full, order)


def embed_operator(u: np.ndarray, targets: Sequence[int], num_qubits: int,
                   atol: float = UNITARY_ATOL) -> np.ndarray:
    """Embed a unitary acting on ``targets`` (identity elsewhere); checks unitarity."""
    u = _as_square(u)
    dev = float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))
    if dev > atol:
        raise ValueError(f"operator is not unitary (deviation {dev:.3e})")
    return _embed_matrix(u, targets, num_qubits)


def _clamped_spectrum(w: np.ndarray, atol: float) -> np.ndarray:
    wmin = float(w.min())
    if wmin < -atol:
        raise ValueError(f"matrix has negative eigenvalue {wmin:.3e}")
    return np.maximum(w, 0.0)


def _psd_sqrt(mat: np.ndarray, atol: float) -> np.ndarray:
    w, v = np.linalg.eigh(mat)
    w = _clamped_spectrum(w, atol)
    return (v * np.sqrt(w)) @ v.conj().T


def hermitian_sqrt(m, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    """Principal square root of a Hermitian PSD matrix via eigendecomposition.

    Eigenvalues in [-1e-9, 0) are clamped to zero; anything more negative
    raises, since the input is then not meaningfully PSD.
    """
    mat = _as_square(m)
    herm = float(np.max(np.abs(mat - mat.conj().T)))
    if herm > atol:
        raise ValueError(f"matrix is not Hermitian (deviation {herm:.3e})")
    return _psd_sqrt(mat, PSD_ATOL)


def _is_pure(mat: np.ndarray) -> bool:
    return abs(float(np.trace(mat @ mat).real) - 1.0) <= 1e-12


def state_fidelity(rho: DensityState, sigma: DensityState) -> float:
    """Uhlmann fidelity F(rho, sigma) = (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.

    When either state is pure this reduces exactly to Tr(rho sigma), which is
    evaluated directly: the matrix-square-root route loses ~1e-8 of accuracy
    near zero eigenvalues, while the product trace keeps full precision. The
    general case uses eigendecomposition with the small-negative-eigenvalue
    clamp. The result is clipped to [0, 1] to absorb float noise.
    """
    if rho.num_qubits != sigma.num_qubits:
        raise ValueError("states live on different registers")
    if _is_pure(rho.matrix) or _is_pure(sigma.matrix):
        f = float(np.trace(rho.matrix @ sigma.matrix).real)
    else:
        sr = _psd_sqrt(rho.matrix, PSD_ATOL)
        m = sr @ sigma.matrix @ sr
        w = np.linalg.eigvalsh((m + m.conj().T) / 2)
        w = _clamped_spectrum(w, PSD_ATOL)
        f = float(np.sum(np.sqrt(w)) ** 2)
    return min(max(f, 0.0), 1.0)
