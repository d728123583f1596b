"""Shipped states and protocols against their closed-form oracles.

Every oracle is checked by running the dense simulation engine on the
corresponding protocol, so the closed forms and the simulator verify each
other. The four-copy recurrence baseline is additionally cross-checked
against an independent route through the Bell-diagonal update algebra.
"""

import numpy as np
import pytest

from locc_lab.bell import bell_matrix_elements, dejmps_exact, dejmps_output_tuple
from locc_lab.channels import amplitude_damping, apply_channel, choi_state
from locc_lab.engine import execute, success_statistics
from locc_lab.protocols import (bell_state, channel_output, channel_sim_ansatz,
                                default_training_states, dejmps,
                                dejmps_s_state_oracle, discrimination_success,
                                distill_stats, distillation_ansatz,
                                generalized_dejmps_4copy_oracle, isotropic,
                                isotropic_bell_tuple, learned_isotropic_4copy,
                                learned_isotropic_4copy_oracle, learned_s_state,
                                learned_s_state_oracle, qsd_ansatz, qsd_oracle,
                                qsd_pair, qsd_protocol, s_state, stack_copies,
                                stack_pairs, standard_teleportation)
from locc_lab.qmath import DensityState, PureState, partial_trace, tensor


# --- states -------------------------------------------------------------------

def test_s_state_matrix():
    mat = s_state(0.5).matrix
    expected = np.array([[0.75, 0, 0, 0.25],
                         [0, 0, 0, 0],
                         [0, 0, 0, 0],
                         [0.25, 0, 0, 0.25]], dtype=complex)
    assert np.allclose(mat, expected, atol=1e-15)


def test_s_state_endpoints():
    zero = np.zeros((4, 4), dtype=complex)
    zero[0, 0] = 1.0
    assert np.allclose(s_state(0.0).matrix, zero, atol=1e-15)
    assert np.allclose(s_state(1.0).matrix, bell_state("phi_plus").matrix,
                       atol=1e-15)


@pytest.mark.parametrize("bad", [-0.1, 1.1])
def test_s_state_range(bad):
    with pytest.raises(ValueError):
        s_state(bad)


def test_isotropic_endpoints():
    assert np.allclose(isotropic(0.0).matrix, np.eye(4) / 4.0, atol=1e-15)
    assert np.allclose(isotropic(1.0).matrix, bell_state("phi_plus").matrix,
                       atol=1e-15)


@pytest.mark.parametrize("p", [0.0, 0.3, 0.7, 1.0])
def test_isotropic_bell_tuple_matches_matrix(p):
    coeffs = np.diag(bell_matrix_elements(isotropic(p))).real
    assert np.allclose(coeffs, isotropic_bell_tuple(p), atol=1e-14)
    assert abs(coeffs.sum() - 1.0) < 1e-14


def test_stack_pairs_wire_order():
    # distinguishable marginals: pair 0 maximally mixed, pair 1 pure |00>
    mixed = DensityState(np.eye(4, dtype=complex) / 4.0)
    zeros = np.zeros((4, 4), dtype=complex)
    zeros[0, 0] = 1.0
    pure = DensityState(zeros)
    stacked = stack_pairs([mixed, pure])
    # A-first order: pair 0 on qubits (0, 2), pair 1 on qubits (1, 3)
    pair0 = partial_trace(stacked, keep=(0, 2))
    pair1 = partial_trace(stacked, keep=(1, 3))
    assert np.allclose(pair0.matrix, mixed.matrix, atol=1e-14)
    assert np.allclose(pair1.matrix, pure.matrix, atol=1e-14)


def test_stack_copies_matches_stack_pairs():
    pair = s_state(0.4)
    assert np.allclose(stack_copies(pair, 3).matrix,
                       stack_pairs([pair] * 3).matrix, atol=1e-15)


def test_stack_pairs_rejects_empty():
    with pytest.raises(ValueError):
        stack_pairs([])


# --- two-copy distillation ------------------------------------------------------

GRID = [0.05, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0]


@pytest.mark.parametrize("p", GRID)
def test_learned_s_state_matches_oracle(p):
    stats = distill_stats(learned_s_state(p), stack_copies(s_state(p), 2))
    fid, p_succ = learned_s_state_oracle(p)
    assert abs(stats.p_succ - p_succ) < 1e-12
    assert abs(stats.fidelity - fid) < 1e-12


@pytest.mark.parametrize("p", GRID)
def test_dejmps_s_state_matches_oracle(p):
    stats = distill_stats(dejmps(), stack_copies(s_state(p), 2))
    fid, p_succ = dejmps_s_state_oracle(p)
    assert abs(stats.p_succ - p_succ) < 1e-12
    assert abs(stats.fidelity - fid) < 1e-12


def test_learned_s_state_zero_noise_never_succeeds():
    # at p = 0 the success branch has no mass and the fidelity is undefined
    stats = distill_stats(learned_s_state(0.0), stack_copies(s_state(0.0), 2))
    assert stats.p_succ < 1e-14
    assert stats.fidelity is None


def test_learned_s_state_success_branch_rank_two():
    # the kept pair stays in the span of |Phi+> and |Phi->
    stats = distill_stats(learned_s_state(0.5), stack_copies(s_state(0.5), 2))
    coeffs = np.diag(bell_matrix_elements(stats.state)).real
    fid, _ = learned_s_state_oracle(0.5)
    assert abs(coeffs[0] - fid) < 1e-12
    assert abs(coeffs[2] - (1.0 - fid)) < 1e-12
    assert abs(coeffs[1]) < 1e-10 and abs(coeffs[3]) < 1e-10


def test_dejmps_isotropic_frozen():
    stats = distill_stats(dejmps(), stack_copies(isotropic(0.7), 2))
    assert abs(stats.p_succ - 0.745) < 1e-12
    assert abs(stats.fidelity - 0.813758389261745) < 1e-12


def test_learned_s_state_theta():
    named = learned_s_state(0.5)
    assert abs(named.metadata["theta"] - (np.arccos(0.5) + np.pi)) < 1e-15


# --- four-copy distillation ------------------------------------------------------

@pytest.mark.parametrize("p", [0.05, 0.3, 0.5, 0.7, 0.9, 1.0])
def test_learned_isotropic_4copy_matches_oracle(p):
    stats = distill_stats(learned_isotropic_4copy(),
                          stack_copies(isotropic(p), 4))
    fid, p_succ = learned_isotropic_4copy_oracle(p)
    assert abs(stats.p_succ - p_succ) < 1e-12
    assert abs(stats.fidelity - fid) < 1e-12


def test_learned_isotropic_4copy_output_isotropic():
    # the merged success state is again isotropic: the three non-Phi+ Bell
    # coefficients coincide
    stats = distill_stats(learned_isotropic_4copy(),
                          stack_copies(isotropic(0.7), 4))
    coeffs = np.diag(bell_matrix_elements(stats.state)).real
    fid, _ = learned_isotropic_4copy_oracle(0.7)
    assert abs(coeffs[0] - fid) < 1e-12
    rest = coeffs[1:]
    assert np.ptp(rest) < 1e-10
    assert abs(rest.sum() - (1.0 - fid)) < 1e-12


@pytest.mark.parametrize("p", [0.3, 0.5, 0.7, 0.9])
def test_generalized_dejmps_dual_route(p):
    # closed form against two nested recurrence rounds in the Bell algebra
    start = isotropic_bell_tuple(p)
    mid, q1 = dejmps_output_tuple(start, start)
    fid, q2 = dejmps_exact(mid, mid)
    fid_oracle, p_oracle = generalized_dejmps_4copy_oracle(p)
    assert abs(fid - fid_oracle) < 1e-12
    assert abs(q1 * q1 * q2 - p_oracle) < 1e-12


def test_learned_4copy_beats_generalized_dejmps_when_entangled():
    # the fidelity difference factors as -(1-p)^2 (3p-1)(p+1) over positive
    # denominators, so the optimized protocol wins exactly on the entangled
    # region p > 1/3 of isotropic states and ties at the separability
    # threshold p = 1/3 and at the noiseless endpoint p = 1
    grid = np.linspace(0.05, 0.95, 19)
    for p in grid:
        fid_learned, _ = learned_isotropic_4copy_oracle(p)
        fid_gen, _ = generalized_dejmps_4copy_oracle(p)
        if p > 1.0 / 3.0:
            assert fid_learned > fid_gen + 1e-12
        else:
            assert fid_learned < fid_gen - 1e-12
    for p in (1.0 / 3.0, 1.0):
        assert abs(learned_isotropic_4copy_oracle(p)[0]
                   - generalized_dejmps_4copy_oracle(p)[0]) < 1e-12


# --- state discrimination ---------------------------------------------------------

def test_qsd_pair_damped_hypothesis():
    _, phi1 = qsd_pair(0.5)
    expected = np.array([[0.625, 0, 0, -0.25],
                         [0, 0.125, 0, 0],
                         [0, 0, 0.125, 0],
                         [-0.25, 0, 0, 0.125]], dtype=complex)
    assert np.allclose(phi1.matrix, expected, atol=1e-15)


@pytest.mark.parametrize("gamma", [0.0, 0.25, 0.5, 0.75, 1.0])
def test_qsd_protocol_matches_oracle(gamma):
    named = qsd_protocol(gamma)
    success = discrimination_success(named, *qsd_pair(gamma))
    assert abs(success - qsd_oracle(gamma)) < 1e-12


def test_qsd_noiseless_is_perfect():
    assert abs(qsd_oracle(0.0) - 1.0) < 1e-15
    named = qsd_protocol(0.0)
    assert abs(named.metadata["theta"] - np.pi / 2.0) < 1e-15
    assert abs(discrimination_success(named, *qsd_pair(0.0)) - 1.0) < 1e-12


@pytest.mark.parametrize("gamma", [0.2, 0.5, 0.8])
def test_qsd_noiseless_angles_suboptimal_under_noise(gamma):
    # running the noiseless angles on noisy hypotheses loses against retuning
    naive = discrimination_success(qsd_protocol(0.0), *qsd_pair(gamma))
    tuned = discrimination_success(qsd_protocol(gamma), *qsd_pair(gamma))
    assert naive < tuned - 1e-6
    assert tuned <= qsd_oracle(gamma) + 1e-12


# --- teleportation and channel simulation ------------------------------------------

def _haar_states(n, seed):
    rng = np.random.default_rng(seed)
    states = []
    for _ in range(n):
        vec = rng.normal(size=2) + 1j * rng.normal(size=2)
        states.append(PureState(vec / np.linalg.norm(vec)).to_density())
    return states


def test_teleportation_identity():
    resource = choi_state(amplitude_damping(0.0))
    named = standard_teleportation()
    for psi in (*default_training_states(), *_haar_states(3, seed=7)):
        out = channel_output(named, resource, psi)
        assert np.allclose(out.matrix, psi.matrix, atol=1e-12)


def test_teleportation_is_deterministic():
    # all four outcome branches carry probability 1/4 for any message
    named = standard_teleportation()
    resource = choi_state(amplitude_damping(0.3))
    for psi in _haar_states(2, seed=11):
        ensemble = named.run(tensor(psi, resource))
        probs = sorted(b.probability for b in ensemble.branches)
        assert len(probs) == 4
        assert np.allclose(probs, 0.25, atol=1e-12)


TELEPORT_PARAMS = np.zeros(18)
TELEPORT_PARAMS[4] = np.pi          # sender RZ(pi) ...
TELEPORT_PARAMS[5] = np.pi / 2.0    # ... then RY(pi/2): a Hadamard
TELEPORT_PARAMS[9:12] = (0.0, np.pi, np.pi)   # outcome (0,1): X
TELEPORT_PARAMS[12] = np.pi                   # outcome (1,0): Z
TELEPORT_PARAMS[16] = np.pi                   # outcome (1,1): RY(pi) = XZ


@pytest.mark.parametrize("gamma", [0.0, 0.3])
def test_channel_sim_ansatz_embeds_teleportation(gamma):
    # one parameter point of the trainable family reproduces teleportation
    # branch by branch, over noiseless and noisy resources alike
    protocol = channel_sim_ansatz()
    reference = standard_teleportation()
    resource = choi_state(amplitude_damping(gamma))
    for psi in default_training_states():
        rho_in = tensor(psi, resource)
        got = execute(protocol, TELEPORT_PARAMS, rho_in)
        want = reference.run(rho_in)
        by_history = {b.history: b for b in want.branches}
        assert len(got.branches) == len(want.branches)
        for branch in got.branches:
            ref = by_history[branch.history]
            assert abs(branch.probability - ref.probability) < 1e-12
            assert np.allclose(branch.state.matrix, ref.state.matrix,
                               atol=1e-12)


def test_default_training_states_span_the_map():
    # vectorized states must be linearly independent to pin down a channel
    stack = np.stack([s.matrix.reshape(-1) for s in default_training_states()])
    assert np.linalg.matrix_rank(stack, tol=1e-12) == 4


# --- trainable skeletons -------------------------------------------------------------

def test_distillation_ansatz_structure():
    protocol = distillation_ansatz(copies=2, depth=2)
    # two parties, (depth + 1) rotation layers, two angles per qubit per layer
    assert protocol.num_params == 2 * 3 * 2 * 2
    table = protocol.success
    assert table[(0, 0)] is True
    assert sum(bool(v) for v in table.values()) == 1
    assert protocol.rounds[0].measured_qubits == (1, 3)


def test_distillation_ansatz_needs_two_copies():
    with pytest.raises(ValueError):
        distillation_ansatz(copies=1)


def test_qsd_ansatz_recovers_fixed_protocol():
    # the angle assignment RY(pi/2) / RY(+-theta) matches qsd_protocol
    gamma = 0.4
    theta = qsd_protocol(gamma).metadata["theta"]
    params = np.array([0.0, np.pi / 2.0, 0.0,
                       0.0, theta, 0.0,
                       0.0, -theta, 0.0])
    protocol = qsd_ansatz()
    phi0, phi1 = qsd_pair(gamma)
    succ = 0.0
    for rho, declare in ((phi0, 0), (phi1, 1)):
        ensemble = execute(protocol, params, rho)
        succ += 0.5 * sum(b.probability for b in ensemble.branches
                          if b.history[-1] == declare)
    assert abs(succ - qsd_oracle(gamma)) < 1e-12
