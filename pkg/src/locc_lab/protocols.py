"""Reference states, shipped protocols, and their closed-form oracles.

The protocols cover three tasks on two parties: entanglement distillation
(two-copy recurrence on partially entangled rank-2 states, DEJMPS, and a
four-copy scheme for isotropic states), minimum-error discrimination of a
Bell state from its amplitude-damped counterpart, and simulation of an
amplitude-damping channel by teleportation over its Choi state.

Register layout for n-copy distillation: all of one party's copy qubits
first (A0..A_{n-1}), then the other's (B0..B_{n-1}). ``stack_pairs`` adapts
a product of pairs, built as (A0 B0 A1 B1 ...), to that wire order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .bell import BELL_LABELS, BELL_VECTORS
from .channels import amplitude_damping, apply_channel, choi_state
from .circuit import Circuit, cnot, h, rx, ry, rz, x
from .engine import (LoccProtocol, LoccRound, OutcomeEnsemble, PartyLayout,
                     SuccessStats, average_state, classifier_table, execute,
                     success_statistics)
from .qmath import DensityState, permute_qubits, tensor
from .trainer import (ChannelSim, OptimizerConfig, TrainingTrace, layered_ansatz_gates,
                      train)


# --- states ----------------------------------------------------------------

def bell_state(which: str = "phi_plus") -> DensityState:
    """Density matrix of one of the four Bell states."""
    try:
        vec = BELL_VECTORS[BELL_LABELS.index(which)]
    except ValueError:
        raise ValueError(f"unknown Bell state {which!r}; pick from {BELL_LABELS}")
    return DensityState(np.outer(vec, vec.conj()), validate=False)


def s_state(p: float) -> DensityState:
    """Rank-2 mixture p |Phi+><Phi+| + (1-p) |00><00| of a pair."""
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p {p} outside [0, 1]")
    mat = np.array([[1.0 - p / 2.0, 0.0, 0.0, p / 2.0],
                    [0.0, 0.0, 0.0, 0.0],
                    [0.0, 0.0, 0.0, 0.0],
                    [p / 2.0, 0.0, 0.0, p / 2.0]], dtype=complex)
    return DensityState(mat, validate=False)


def isotropic(p: float) -> DensityState:
    """Isotropic pair p |Phi+><Phi+| + (1-p) I/4."""
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p {p} outside [0, 1]")
    phi = bell_state("phi_plus").matrix
    return DensityState(p * phi + (1.0 - p) * np.eye(4) / 4.0, validate=False)


def isotropic_bell_tuple(p: float) -> np.ndarray:
    """Bell coefficients ((1+3p)/4, (1-p)/4, (1-p)/4, (1-p)/4) of isotropic(p)."""
    p = float(p)
    return np.array([(1.0 + 3.0 * p) / 4.0] + [(1.0 - p) / 4.0] * 3)


def stack_pairs(pairs: Sequence[DensityState]) -> DensityState:
    """Stack two-qubit pairs into the A-first wire order A0..An-1 B0..Bn-1."""
    if not pairs:
        raise ValueError("no pairs given")
    state = pairs[0]
    for pair in pairs[1:]:
        state = tensor(state, pair)
    n = len(pairs)
    # construction order is A0 B0 A1 B1 ...; send A_i -> i and B_i -> n + i
    perm = [0] * (2 * n)
    for i in range(n):
        perm[2 * i] = i
        perm[2 * i + 1] = n + i
    return permute_qubits(state, perm)


def stack_copies(pair: DensityState, copies: int) -> DensityState:
    """n identical copies of a pair in the A-first wire order."""
    return stack_pairs([pair] * int(copies))


# --- protocol container -----------------------------------------------------

@dataclass(frozen=True, eq=False)
class NamedProtocol:
    """A protocol together with bound parameter values and builder inputs."""

    name: str
    protocol: LoccProtocol
    params: np.ndarray = field(default_factory=lambda: np.zeros(0))
    metadata: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        params = np.asarray(self.params, dtype=float).reshape(-1).copy()
        if params.shape != (self.protocol.num_params,):
            raise ValueError(f"{self.name}: {params.size} parameter values for "
                             f"{self.protocol.num_params} slots")
        params.setflags(write=False)
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "metadata", dict(self.metadata))

    def run(self, rho_in: DensityState) -> OutcomeEnsemble:
        return execute(self.protocol, self.params, rho_in)


def distill_stats(named: NamedProtocol, rho_in: DensityState,
                  target: DensityState | None = None) -> SuccessStats:
    """Run a distillation protocol and score its merged success branch."""
    if target is None:
        target = bell_state("phi_plus")
    ensemble = named.run(rho_in)
    return success_statistics(ensemble, named.protocol.success, target)


# --- two-copy distillation ---------------------------------------------------

def _two_party_layout(copies: int) -> PartyLayout:
    n = int(copies)
    return PartyLayout((("alice", tuple(range(n))),
                        ("bob", tuple(range(n, 2 * n)))))


def dejmps() -> NamedProtocol:
    """Two-copy recurrence protocol for Bell-diagonal states.

    Both parties rotate each of their qubits with RX(+pi/2) (one side) and
    RX(-pi/2) (the other), apply a CNOT from their first copy onto their
    second, and measure the second copy. Coinciding outcomes keep the pair.
    """
    alice = Circuit(4, (rx(0, np.pi / 2), rx(1, np.pi / 2), cnot(0, 1)))
    bob = Circuit(4, (rx(2, -np.pi / 2), rx(3, -np.pi / 2), cnot(2, 3)))
    rnd = LoccRound(("alice", "bob"), {(): {"alice": alice, "bob": bob}},
                    measured_qubits=(1, 3))
    success = classifier_table(2, lambda hist: hist[0] == hist[1])
    protocol = LoccProtocol(_two_party_layout(2), (rnd,), success)
    return NamedProtocol("dejmps", protocol)


def learned_s_state(p: float) -> NamedProtocol:
    """Optimized two-copy distiller for s_state(p) with angle arccos(1-p)+pi.

    One party applies CNOT from its second copy onto its first; the other
    applies that CNOT and then the reverse one. Both rotate the second copy
    by RY(theta) and measure it, keeping only the all-zero outcome.
    """
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p {p} outside [0, 1]")
    theta = float(np.arccos(1.0 - p) + np.pi)
    alice = Circuit(4, (cnot(1, 0), ry(1, theta)))
    bob = Circuit(4, (cnot(3, 2), cnot(2, 3), ry(3, theta)))
    rnd = LoccRound(("alice", "bob"), {(): {"alice": alice, "bob": bob}},
                    measured_qubits=(1, 3))
    success = classifier_table(2, lambda hist: hist == (0, 0))
    protocol = LoccProtocol(_two_party_layout(2), (rnd,), success)
    return NamedProtocol("learned-s-state", protocol, metadata={"p": p, "theta": theta})


def learned_s_state_oracle(p: float) -> tuple[float, float]:
    """Closed-form (fidelity, success probability) of learned_s_state(p)."""
    p = float(p)
    fid = (1.0 + np.sqrt(2.0 * p - p * p)) / 2.0
    p_succ = p * p - p**3 / 2.0
    return float(fid), float(p_succ)


def dejmps_s_state_oracle(p: float) -> tuple[float, float]:
    """Closed-form (fidelity, success probability) of dejmps() on s_state(p) pairs."""
    p = float(p)
    fid = (1.0 + p) ** 2 / (2.0 + 2.0 * p * p)
    p_succ = (1.0 + p * p) / 2.0
    return float(fid), float(p_succ)


# --- four-copy distillation of isotropic states ------------------------------

def learned_isotropic_4copy() -> NamedProtocol:
    """Optimized four-copy distiller for isotropic states.

    Each party applies a CNOT ring over its four copy qubits (0->1->2->3->0),
    rotates qubits 1..3 with RX(+-pi/2), and measures them. Success keeps the
    branches where the two parties' three outcome bits coincide pairwise.
    """
    a = tuple(range(4))
    b = tuple(range(4, 8))
    alice = Circuit(8, (cnot(a[0], a[1]), cnot(a[1], a[2]), cnot(a[2], a[3]),
                        cnot(a[3], a[0]),
                        rx(a[1], np.pi / 2), rx(a[2], np.pi / 2), rx(a[3], np.pi / 2)))
    bob = Circuit(8, (cnot(b[0], b[1]), cnot(b[1], b[2]), cnot(b[2], b[3]),
                      cnot(b[3], b[0]),
                      rx(b[1], -np.pi / 2), rx(b[2], -np.pi / 2), rx(b[3], -np.pi / 2)))
    rnd = LoccRound(("alice", "bob"), {(): {"alice": alice, "bob": bob}},
                    measured_qubits=(1, 2, 3, 5, 6, 7))
    success = classifier_table(6, lambda hist: hist[:3] == hist[3:])
    protocol = LoccProtocol(_two_party_layout(4), (rnd,), success)
    return NamedProtocol("learned-isotropic-4copy", protocol)


def learned_isotropic_4copy_oracle(p: float) -> tuple[float, float]:
    """Closed-form (fidelity, success probability) of the four-copy distiller."""
    p = float(p)
    fid = (1.0 - 2.0 * p + 9.0 * p * p) / (4.0 - 8.0 * p + 12.0 * p * p)
    p_succ = (1.0 + 4.0 * p**3 + 3.0 * p**4) / 8.0
    return float(fid), float(p_succ)


def generalized_dejmps_4copy_oracle(p: float) -> tuple[float, float]:
    """Closed form for two nested two-copy recurrence rounds on isotropic(p).

    This is the four-copy baseline the optimized scheme is compared against;
    it is evaluated analytically rather than simulated because the nested
    protocol acts on sixteen qubits.
    """
    p = float(p)
    fid = (1.0 + 10.0 * p**2 + 8.0 * p**3 + 13.0 * p**4) / \
        (4.0 + 8.0 * p**2 + 20.0 * p**4)
    p_succ = (1.0 + 2.0 * p**2 + 5.0 * p**4) / 8.0
    return float(fid), float(p_succ)


# --- discrimination of a Bell state from its damped counterpart ---------------

def qsd_pair(gamma: float) -> tuple[DensityState, DensityState]:
    """The two equiprobable hypotheses: |Phi+> and the damped |Phi->.

    Both qubits of |Phi-> pass through amplitude damping of strength gamma.
    """
    phi0 = bell_state("phi_plus")
    phi1 = bell_state("phi_minus")
    ch = amplitude_damping(gamma)
    phi1 = apply_channel(ch, phi1, (0,))
    phi1 = apply_channel(ch, phi1, (1,))
    return phi0, phi1


def _qsd_angle(gamma: float) -> float:
    # measurement tilt of the responding party; pi/2 in the noiseless limit
    if gamma == 0.0:
        return np.pi / 2.0
    return float(np.pi - np.arctan((2.0 - gamma) / gamma))


def qsd_protocol(gamma: float) -> NamedProtocol:
    """Two-round discrimination protocol tuned to noise strength gamma.

    The first party rotates by RY(pi/2) and measures, then the second party
    rotates by RY(+-theta) conditioned on the communicated bit and measures.
    Its outcome is the declared hypothesis (0 for the undamped state).
    """
    gamma = float(gamma)
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma {gamma} outside [0, 1]")
    theta = _qsd_angle(gamma)
    layout = PartyLayout((("alice", (0,)), ("bob", (1,))))
    round1 = LoccRound(("alice",), {(): {"alice": Circuit(2, (ry(0, np.pi / 2),))}},
                       measured_qubits=(0,))
    round2 = LoccRound(("bob",),
                       {(0,): {"bob": Circuit(2, (ry(1, theta),))},
                        (1,): {"bob": Circuit(2, (ry(1, -theta),))}},
                       measured_qubits=(1,))
    success = classifier_table(2, lambda hist: True)
    protocol = LoccProtocol(layout, (round1, round2), success)
    return NamedProtocol("qsd", protocol, metadata={"gamma": gamma, "theta": theta})


def qsd_oracle(gamma: float) -> float:
    """Closed-form optimal-within-family success probability at noise gamma."""
    gamma = float(gamma)
    return 0.5 + np.sqrt(2.0 - 2.0 * gamma + gamma * gamma) / (2.0 * np.sqrt(2.0))


def discrimination_probabilities(named: NamedProtocol,
                                 rho: DensityState) -> tuple[float, float]:
    """Probabilities that the final measured bit is 0 resp. 1 on input rho."""
    ensemble = named.run(rho)
    p1 = sum(b.probability for b in ensemble.branches if b.history[-1] == 1)
    p0 = sum(b.probability for b in ensemble.branches if b.history[-1] == 0)
    return float(p0), float(p1)


def discrimination_success(named: NamedProtocol, phi0: DensityState,
                           phi1: DensityState) -> float:
    """Average success probability for equiprobable hypotheses (phi0, phi1)."""
    p0_given_0, _ = discrimination_probabilities(named, phi0)
    _, p1_given_1 = discrimination_probabilities(named, phi1)
    return 0.5 * p0_given_0 + 0.5 * p1_given_1


# --- teleportation and channel simulation ------------------------------------

def standard_teleportation() -> NamedProtocol:
    """Deterministic one-qubit teleportation over a shared pair.

    The register is (message, sender half, receiver qubit). The sender
    Bell-measures via CNOT + H, and the receiver applies the Pauli
    correction X^b Z^a for outcome (a, b); Z is realized as RZ(pi), which
    equals Z up to an unobservable global phase.
    """
    layout = PartyLayout((("alice", (0, 1)), ("bob", (2,))))
    round1 = LoccRound(("alice",),
                       {(): {"alice": Circuit(3, (cnot(0, 1), h(0)))}},
                       measured_qubits=(0, 1))
    corrections = {
        (0, 0): Circuit(3, ()),
        (0, 1): Circuit(3, (x(2),)),
        (1, 0): Circuit(3, (rz(2, np.pi),)),
        (1, 1): Circuit(3, (x(2), rz(2, np.pi))),
    }
    round2 = LoccRound(("bob",),
                       {hist: {"bob": circ} for hist, circ in corrections.items()},
                       measured_qubits=())
    success = classifier_table(2, lambda hist: True)
    protocol = LoccProtocol(layout, (round1, round2), success)
    return NamedProtocol("teleportation", protocol)


def channel_output(named: NamedProtocol, resource: DensityState,
                   psi: DensityState) -> DensityState:
    """Receiver's branch-averaged output for message psi over the resource."""
    ensemble = named.run(tensor(psi, resource))
    return average_state(ensemble)


def _plus_state() -> DensityState:
    return DensityState(np.full((2, 2), 0.5, dtype=complex), validate=False)


def _plus_i_state() -> DensityState:
    return DensityState(np.array([[0.5, -0.5j], [0.5j, 0.5]]), validate=False)


def default_training_states() -> tuple[DensityState, ...]:
    """Four linearly independent single-qubit states spanning the map."""
    zero = DensityState(np.diag([1.0, 0.0]).astype(complex), validate=False)
    one = DensityState(np.diag([0.0, 1.0]).astype(complex), validate=False)
    return (zero, one, _plus_state(), _plus_i_state())


def channel_sim_ansatz() -> LoccProtocol:
    """Teleportation-shaped trainable protocol for channel simulation.

    The sender applies a six-parameter two-qubit entangler to (message,
    resource half) and measures both; the receiver applies an outcome-
    conditioned RZ-RY-RZ rotation, three parameters per branch, for
    6 + 4 * 3 = 18 parameters in total.
    """
    layout = PartyLayout((("alice", (0, 1)), ("bob", (2,))))
    alice = Circuit(3, (ry(0, slot=0), rz(0, slot=1), ry(1, slot=2),
                        rz(1, slot=3), cnot(0, 1), rz(0, slot=4),
                        ry(0, slot=5)), num_params=18)
    round1 = LoccRound(("alice",), {(): {"alice": alice}}, measured_qubits=(0, 1))
    selector = {}
    for a in (0, 1):
        for b in (0, 1):
            s = 6 + 3 * (2 * a + b)
            selector[(a, b)] = {"bob": Circuit(3, (rz(2, slot=s),
                                                   ry(2, slot=s + 1),
                                                   rz(2, slot=s + 2)),
                                               num_params=18)}
    round2 = LoccRound(("bob",), selector, measured_qubits=())
    success = classifier_table(2, lambda hist: True)
    return LoccProtocol(layout, (round1, round2), success, num_params=18)


def channel_sim_trained(gamma: float, config: OptimizerConfig | None = None
                        ) -> tuple[NamedProtocol, TrainingTrace]:
    """Train the channel-simulation ansatz against amplitude damping.

    The shared resource is the Choi state of the target channel; the loss is
    the negated summed fidelity over the default training states. Returns
    the protocol with the best parameters found and the training trace.
    """
    gamma = float(gamma)
    if config is None:
        config = OptimizerConfig()
    protocol = channel_sim_ansatz()
    channel = amplitude_damping(gamma)
    spec = ChannelSim(channel, default_training_states())
    resource = choi_state(channel)
    trace = train(spec, protocol, resource, config)
    named = NamedProtocol("channel-sim-trained", protocol, trace.best_params,
                          metadata={"gamma": gamma})
    return named, trace


# --- trainable ansatz variants of the fixed protocols -------------------------

def distillation_ansatz(copies: int = 2, depth: int = 2) -> LoccProtocol:
    """Trainable n-copy distillation skeleton with a layered party ansatz.

    Both parties run independent hardware-efficient circuits, every copy
    qubit except the first is measured, and success keeps the all-zero
    outcome branch. Pinning success to a single branch leaves the circuits
    free to steer the best normalized state into it; a coincidence rule
    would average branches the optimizer cannot decouple and caps the
    reachable fidelity below the single-branch optimum.
    """
    n = int(copies)
    if n < 2:
        raise ValueError("need at least two copies")
    alice_gates, next_slot = layered_ansatz_gates(range(n), depth, 0)
    bob_gates, total = layered_ansatz_gates(range(n, 2 * n), depth, next_slot)
    alice = Circuit(2 * n, tuple(alice_gates), num_params=total)
    bob = Circuit(2 * n, tuple(bob_gates), num_params=total)
    measured = tuple(range(1, n)) + tuple(range(n + 1, 2 * n))
    rnd = LoccRound(("alice", "bob"), {(): {"alice": alice, "bob": bob}},
                    measured_qubits=measured)
    half = n - 1
    success = classifier_table(2 * half,
                               lambda hist: not any(hist))
    return LoccProtocol(_two_party_layout(n), (rnd,), success, num_params=total)


def qsd_ansatz() -> LoccProtocol:
    """Trainable two-round discrimination skeleton.

    The first party applies a general RZ-RY-RZ rotation and measures; the
    second applies an outcome-conditioned RZ-RY-RZ rotation and measures,
    for nine parameters. The noiseless optimum is RY(pi/2) and RY(+-pi/2).
    """
    layout = PartyLayout((("alice", (0,)), ("bob", (1,))))
    alice = Circuit(2, (rz(0, slot=0), ry(0, slot=1), rz(0, slot=2)),
                    num_params=9)
    round1 = LoccRound(("alice",), {(): {"alice": alice}}, measured_qubits=(0,))
    selector = {
        (0,): {"bob": Circuit(2, (rz(1, slot=3), ry(1, slot=4), rz(1, slot=5)),
                              num_params=9)},
        (1,): {"bob": Circuit(2, (rz(1, slot=6), ry(1, slot=7), rz(1, slot=8)),
                              num_params=9)},
    }
    round2 = LoccRound(("bob",), selector, measured_qubits=(1,))
    success = classifier_table(2, lambda hist: True)
    return LoccProtocol(layout, (round1, round2), success, num_params=9)
