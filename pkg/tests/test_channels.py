"""Amplitude-damping channel and Choi-state checks."""

import numpy as np
import pytest

from locc_lab.channels import (QuantumChannel, amplitude_damping,
                               apply_channel, choi_state)
from locc_lab.qmath import DensityState, basis_ket, tensor


def test_kraus_completeness_enforced():
    bad = (np.array([[1.0, 0.0], [0.0, 0.5]], dtype=complex),)
    with pytest.raises(ValueError):
        QuantumChannel(bad)


def test_damping_extremes():
    rho1 = basis_ket((1,)).to_density()
    assert np.allclose(apply_channel(amplitude_damping(0.0), rho1, (0,)).matrix,
                       rho1.matrix)
    decayed = apply_channel(amplitude_damping(1.0), rho1, (0,))
    assert np.allclose(decayed.matrix, np.diag([1.0, 0.0]))


def test_damping_populations_and_coherence():
    gamma = 0.37
    plus = DensityState(np.full((2, 2), 0.5, dtype=complex))
    out = apply_channel(amplitude_damping(gamma), plus, (0,))
    # |1> population shrinks by (1-gamma), coherence by sqrt(1-gamma)
    assert out.matrix[1, 1] == pytest.approx(0.5 * (1 - gamma), abs=1e-14)
    assert out.matrix[0, 0] == pytest.approx(0.5 * (1 + gamma), abs=1e-14)
    assert out.matrix[0, 1] == pytest.approx(0.5 * np.sqrt(1 - gamma), abs=1e-14)


def test_damping_composes():
    g1, g2 = 0.3, 0.45
    combined = 1 - (1 - g1) * (1 - g2)
    rng = np.random.default_rng(5)
    a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    m = a @ a.conj().T
    rho = DensityState(m / np.trace(m).real)
    twice = apply_channel(amplitude_damping(g2),
                          apply_channel(amplitude_damping(g1), rho, (0,)), (0,))
    once = apply_channel(amplitude_damping(combined), rho, (0,))
    assert np.allclose(twice.matrix, once.matrix, atol=1e-14)


def test_apply_channel_on_selected_qubit():
    rho = tensor(basis_ket((1,)).to_density(), basis_ket((1,)).to_density())
    out = apply_channel(amplitude_damping(1.0), rho, (1,))
    assert np.allclose(out.matrix, basis_ket((1, 0)).to_density().matrix)


def test_choi_state_diagonal():
    choi = choi_state(amplitude_damping(0.3))
    assert np.allclose(np.diag(choi.matrix).real, (0.5, 0.0, 0.15, 0.35),
                       atol=1e-14)
    # off-diagonal ebit coherence is damped by sqrt(1-gamma)
    assert choi.matrix[0, 3] == pytest.approx(0.5 * np.sqrt(0.7), abs=1e-14)


def test_choi_state_extremes():
    ident = choi_state(amplitude_damping(0.0))
    phi = np.zeros(4)
    phi[[0, 3]] = 1 / np.sqrt(2)
    assert np.allclose(ident.matrix, np.outer(phi, phi), atol=1e-14)
    dead = choi_state(amplitude_damping(1.0))
    assert np.allclose(dead.matrix, np.diag([0.5, 0.0, 0.5, 0.0]), atol=1e-14)


def test_gamma_range_validated():
    with pytest.raises(ValueError):
        amplitude_damping(-0.1)
    with pytest.raises(ValueError):
        amplitude_damping(1.1)
