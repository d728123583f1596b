"""Variational training of protocol parameters.

Three loss families are supported: distillation infidelity, binary state
discrimination error, and channel-simulation fidelity against a target
channel. Gradients use the exact parameter-shift rule for the half-angle
rotation gates; the optimizer is plain gradient descent or Adam with a
staged learning-rate decay, restarted from several seeded initializations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .channels import QuantumChannel, apply_channel
from .circuit import Circuit, GateSpec
from .engine import (History, LoccProtocol, LoccRound, average_state, execute,
                     success_statistics)
from .qmath import (PSD_ATOL, DensityState, _clamped_spectrum, _psd_sqrt,
                    state_fidelity, tensor)

NO_SUCCESS_LOSS = 1.0


class TrainingError(RuntimeError):
    """Training produced no usable parameters (every restart diverged)."""


@dataclass(frozen=True, eq=False)
class DistillInfidelity:
    """Loss 1 - F(merged success state, target); 1 when nothing succeeds."""

    target: DensityState
    classifier: Mapping[History, bool] | Callable[[History], bool]


@dataclass(frozen=True, eq=False)
class Discrimination:
    """Error probability sum for two equiprobable hypotheses.

    The declared hypothesis is the last measured bit: 0 declares ``phi0``,
    1 declares ``phi1``. The loss is P(declare 1 | phi0) + P(declare 0 | phi1),
    so the average success probability is 1 - loss / 2.
    """

    phi0: DensityState
    phi1: DensityState

    def __post_init__(self):
        if self.phi0.num_qubits != self.phi1.num_qubits:
            raise ValueError("hypothesis states live on different registers")


@dataclass(frozen=True, eq=False)
class ChannelSim:
    """Negated summed fidelity between a target channel and the protocol map.

    The protocol is run on (message state) tensor (resource state); its
    branch-averaged output must approximate the channel applied to the
    message. Training states must be linearly independent as matrices so
    that matching them pins down the simulated map.
    """

    channel: QuantumChannel
    training_set: tuple[DensityState, ...]

    def __post_init__(self):
        states = tuple(self.training_set)
        if not states:
            raise ValueError("training set is empty")
        vecs = np.stack([s.matrix.reshape(-1) for s in states])
        gram = vecs @ vecs.conj().T
        rank = int(np.linalg.matrix_rank(gram))
        if rank != len(states):
            raise ValueError(
                f"training set is linearly dependent (rank {rank} of {len(states)})")
        object.__setattr__(self, "training_set", states)


LossSpec = DistillInfidelity | Discrimination | ChannelSim


@dataclass(frozen=True)
class LossValue:
    value: float
    no_success_branch: bool = False


def evaluate_loss(spec: LossSpec, protocol: LoccProtocol,
                  params: Sequence[float],
                  input_state: DensityState | None = None) -> LossValue:
    """Loss with an explicit flag for the empty-success-branch case."""
    if isinstance(spec, DistillInfidelity):
        if input_state is None:
            raise ValueError("distillation loss needs an input state")
        ensemble = execute(protocol, params, input_state)
        stats = success_statistics(ensemble, spec.classifier, spec.target)
        if stats.fidelity is None:
            return LossValue(NO_SUCCESS_LOSS, no_success_branch=True)
        return LossValue(1.0 - stats.fidelity)
    if isinstance(spec, Discrimination):
        ens0 = execute(protocol, params, spec.phi0)
        ens1 = execute(protocol, params, spec.phi1)
        p_wrong0 = sum(b.probability for b in ens0.branches if b.history[-1] == 1)
        p_wrong1 = sum(b.probability for b in ens1.branches if b.history[-1] == 0)
        return LossValue(float(p_wrong0 + p_wrong1))
    if isinstance(spec, ChannelSim):
        if input_state is None:
            raise ValueError("channel-simulation loss needs the resource state")
        total = 0.0
        for psi in spec.training_set:
            target = apply_channel(spec.channel, psi,
                                   tuple(range(psi.num_qubits)))
            ensemble = execute(protocol, params, tensor(psi, input_state))
            total -= state_fidelity(target, average_state(ensemble))
        return LossValue(float(total))
    raise TypeError(f"unknown loss spec {type(spec).__name__}")


def loss_eval(spec: LossSpec, protocol: LoccProtocol, params: Sequence[float],
              input_state: DensityState | None = None) -> float:
    return evaluate_loss(spec, protocol, params, input_state).value


def _expand_parameter_occurrences(protocol: LoccProtocol):
    """Give every parameterized gate occurrence its own slot.

    The parameter-shift rule is exact per gate; a slot referenced by several
    gates needs one shift per occurrence, summed. Returns the rewritten
    protocol and the list mapping occurrence slot -> original slot.
    """
    occ_to_slot: list[int] = []
    for rnd in protocol.rounds:
        for hist in sorted(rnd.circuit_selector):
            for party in rnd.acting_parties:
                for g in rnd.circuit_selector[hist][party].gates:
                    if g.param_slot is not None:
                        occ_to_slot.append(g.param_slot)
    total = len(occ_to_slot)
    counter = iter(range(total))
    rounds = []
    for rnd in protocol.rounds:
        selector: dict[History, dict[str, Circuit]] = {}
        for hist in sorted(rnd.circuit_selector):
            per_party = {}
            for party in rnd.acting_parties:
                circ = rnd.circuit_selector[hist][party]
                gates = []
                for g in circ.gates:
                    if g.param_slot is None:
                        gates.append(g)
                    else:
                        gates.append(GateSpec(g.kind, g.targets,
                                              param_slot=next(counter)))
                per_party[party] = Circuit(circ.num_qubits, tuple(gates), total)
            selector[hist] = per_party
        rounds.append(LoccRound(rnd.acting_parties, selector,
                                rnd.measured_qubits))
    expanded = LoccProtocol(protocol.layout, tuple(rounds), protocol.success,
                            num_params=total)
    return expanded, occ_to_slot


def _success_readout(spec: DistillInfidelity, protocol: LoccProtocol,
                     params: np.ndarray,
                     input_state: DensityState) -> tuple[np.ndarray, float]:
    """Unnormalized success-branch mixture W = sum_s p_s rho_s and its mass.

    Both are linear in the evolved state, unlike the loss itself, so the
    parameter-shift rule applies to them exactly.
    """
    ensemble = execute(protocol, params, input_state)
    classifier = spec.classifier
    if not callable(classifier):
        table = dict(classifier)
        classifier = table.__getitem__
    w = None
    mass = 0.0
    for b in ensemble.branches:
        if not classifier(b.history):
            continue
        mass += b.probability
        term = b.probability * b.state.matrix
        w = term if w is None else w + term
    if w is None:
        w = np.zeros((spec.target.dim, spec.target.dim), dtype=complex)
    return w, mass


def _channel_readouts(spec: ChannelSim, protocol: LoccProtocol,
                      params: np.ndarray,
                      resource: DensityState) -> list[np.ndarray]:
    """Branch-averaged output matrix per training state (linear in the state)."""
    outs = []
    for psi in spec.training_set:
        ensemble = execute(protocol, params, tensor(psi, resource))
        outs.append(average_state(ensemble).matrix)
    return outs


def _fidelity_gradient(fixed: DensityState, sigma: np.ndarray) -> np.ndarray:
    """Matrix G with dF(fixed, sigma) = Tr(G dsigma) for Hermitian dsigma.

    For F = (Tr sqrt(sqrt(r) s sqrt(r)))^2 with r fixed, the derivative is
    G = Tr(sqrt(M)) * sqrt(r) M^{-1/2} sqrt(r) with M = sqrt(r) s sqrt(r),
    the inverse square root taken on the support of M. A pure r collapses
    this to G = r, the linear-readout case.
    """
    sr = _psd_sqrt(fixed.matrix, PSD_ATOL)
    m = sr @ sigma @ sr
    w, vecs = np.linalg.eigh((m + m.conj().T) / 2.0)
    w = _clamped_spectrum(w, PSD_ATOL)
    support = w > 1e-12
    trace_root = float(np.sum(np.sqrt(w[support])))
    inv_root = (vecs[:, support] / np.sqrt(w[support])) @ vecs[:, support].conj().T
    g = trace_root * (sr @ inv_root @ sr)
    return (g + g.conj().T) / 2.0


def gradient_parameter_shift(spec: LossSpec, protocol: LoccProtocol,
                             params: Sequence[float],
                             input_state: DensityState | None = None) -> np.ndarray:
    """Exact gradient of the loss, built from +-pi/2 shifted evaluations.

    Every parameterized gate is a half-angle rotation, so any quantity
    linear in the evolved state obeys the parameter-shift rule exactly:
    shifting one gate occurrence by +-pi/2 gives that occurrence's
    derivative as half the difference, and occurrence contributions sum
    into their shared slot. The discrimination loss is itself linear.
    The distillation loss normalizes by the success mass and the
    channel-simulation loss takes matrix square roots, so for those the
    shifts are applied to the linear readouts (branch mixtures and masses)
    and combined by the quotient/chain rule; applying the raw shift formula
    to the loss value would not be its derivative.
    """
    params = np.asarray(params, dtype=float)
    if params.shape != (protocol.num_params,):
        raise ValueError(f"expected {protocol.num_params} parameters")
    grad = np.zeros(protocol.num_params)
    if protocol.num_params == 0:
        return grad
    expanded, occ_to_slot = _expand_parameter_occurrences(protocol)
    base = params[occ_to_slot] if occ_to_slot else np.zeros(0)

    def shifted(occ):
        up = base.copy()
        up[occ] += np.pi / 2.0
        down = base.copy()
        down[occ] -= np.pi / 2.0
        return up, down

    if isinstance(spec, Discrimination):
        for occ, orig in enumerate(occ_to_slot):
            up, down = shifted(occ)
            delta = (loss_eval(spec, expanded, up, input_state)
                     - loss_eval(spec, expanded, down, input_state))
            grad[orig] += delta / 2.0
        return grad

    if isinstance(spec, DistillInfidelity):
        if input_state is None:
            raise ValueError("distillation loss needs an input state")
        w0, d0 = _success_readout(spec, protocol, params, input_state)
        if d0 < 1e-14:
            return grad  # flagged flat region: loss is constant 1
        sigma0 = w0 / d0
        g_mat = _fidelity_gradient(spec.target, sigma0)
        for occ, orig in enumerate(occ_to_slot):
            up, down = shifted(occ)
            w_up, d_up = _success_readout(spec, expanded, up, input_state)
            w_dn, d_dn = _success_readout(spec, expanded, down, input_state)
            dw = (w_up - w_dn) / 2.0
            dd = (d_up - d_dn) / 2.0
            dsigma = (dw * d0 - w0 * dd) / (d0 * d0)
            grad[orig] += -float(np.trace(g_mat @ dsigma).real)
        return grad

    if isinstance(spec, ChannelSim):
        if input_state is None:
            raise ValueError("channel-simulation loss needs the resource state")
        sigmas = _channel_readouts(spec, protocol, params, input_state)
        g_mats = []
        for psi, sigma in zip(spec.training_set, sigmas):
            target = apply_channel(spec.channel, psi,
                                   tuple(range(psi.num_qubits)))
            g_mats.append(_fidelity_gradient(target, sigma))
        for occ, orig in enumerate(occ_to_slot):
            up, down = shifted(occ)
            outs_up = _channel_readouts(spec, expanded, up, input_state)
            outs_dn = _channel_readouts(spec, expanded, down, input_state)
            total = 0.0
            for g_mat, s_up, s_dn in zip(g_mats, outs_up, outs_dn):
                total -= float(np.trace(g_mat @ (s_up - s_dn)).real) / 2.0
            grad[orig] += total
        return grad

    raise TypeError(f"unknown loss spec {type(spec).__name__}")


@dataclass(frozen=True)
class OptimizerConfig:
    """Gradient-descent settings; defaults follow the shipped experiments.

    The learning rate is divided by 10 at the two ``decay_points`` fractions
    of ``max_iters``, which lets Adam settle to the optimum tightly enough
    for the endpoint checks. Convergence (|loss change| < tol for
    ``patience`` consecutive iterations) is only honored in the final stage.
    """

    learning_rate: float = 0.1
    max_iters: int = 300
    convergence_tol: float = 1e-9
    patience: int = 20
    seed: int = 0
    restarts: int = 8
    method: str = "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    decay_points: tuple[float, float] = (0.5, 0.75)

    def __post_init__(self):
        if self.method not in ("adam", "gd"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.restarts < 1 or self.max_iters < 1:
            raise ValueError("restarts and max_iters must be positive")


@dataclass(frozen=True, eq=False)
class TrainingTrace:
    """Per-iteration losses plus the best parameters seen anywhere."""

    rows: tuple[tuple[int, int, float], ...]
    best_params: np.ndarray
    best_loss: float
    best_restart: int
    diverged_restarts: tuple[int, ...] = ()

    def restart_losses(self, restart: int) -> list[float]:
        return [loss for r, _, loss in self.rows if r == restart]


def train(spec: LossSpec, protocol: LoccProtocol,
          input_state: DensityState | None, config: OptimizerConfig,
          init_params: Sequence[float] | None = None) -> TrainingTrace:
    """Minimize the loss over protocol parameters with seeded restarts.

    Restart r draws its initial point uniformly from [0, 2*pi) using the
    seed pair (config.seed, r), so runs are reproducible; ``init_params``
    optionally replaces the initial point of restart 0. The returned
    parameters are the best evaluated anywhere, which makes the final loss
    monotone in the iteration budget. A restart whose loss turns non-finite
    is abandoned and recorded.
    """
    num = protocol.num_params
    rows: list[tuple[int, int, float]] = []
    best_loss = np.inf
    best_params: np.ndarray | None = None
    best_restart = -1
    diverged: list[int] = []
    t1 = int(config.decay_points[0] * config.max_iters)
    t2 = int(config.decay_points[1] * config.max_iters)
    for r in range(config.restarts):
        rng = np.random.default_rng((config.seed, r))
        theta = rng.uniform(0.0, 2.0 * np.pi, num)
        if r == 0 and init_params is not None:
            theta = np.asarray(init_params, dtype=float).copy()
            if theta.shape != (num,):
                raise ValueError(f"init_params must have shape ({num},)")
        m = np.zeros(num)
        v = np.zeros(num)
        prev = None
        streak = 0
        for t in range(config.max_iters):
            loss = loss_eval(spec, protocol, theta, input_state)
            rows.append((r, t, loss))
            if not np.isfinite(loss):
                diverged.append(r)
                break
            if loss < best_loss:
                best_loss = loss
                best_params = theta.copy()
                best_restart = r
            stage = 0 if t < t1 else (1 if t < t2 else 2)
            if stage == 2 and prev is not None and \
                    abs(loss - prev) < config.convergence_tol:
                streak += 1
                if streak >= config.patience:
                    break
            else:
                streak = 0
            prev = loss
            if t == config.max_iters - 1:
                break
            grad = gradient_parameter_shift(spec, protocol, theta, input_state)
            lr = config.learning_rate * (0.1 ** stage)
            if config.method == "adam":
                m = config.beta1 * m + (1.0 - config.beta1) * grad
                v = config.beta2 * v + (1.0 - config.beta2) * grad * grad
                mhat = m / (1.0 - config.beta1 ** (t + 1))
                vhat = v / (1.0 - config.beta2 ** (t + 1))
                theta = theta - lr * mhat / (np.sqrt(vhat) + config.epsilon)
            else:
                theta = theta - lr * grad
    if best_params is None:
        raise TrainingError("every restart diverged before producing a loss")
    return TrainingTrace(tuple(rows), best_params, float(best_loss),
                         best_restart, tuple(diverged))


def layered_ansatz_gates(qubits: Sequence[int], depth: int,
                         start_slot: int) -> tuple[list[GateSpec], int]:
    """Hardware-efficient party ansatz as a gate list with global slots.

    Each of ``depth`` layers applies RY and RZ to every qubit of the party
    and then a CNOT chain down the party's qubits; a final rotation layer
    closes the circuit so the entangled output can still be rotated before
    measurement. Returns the gates and the next free slot index.
    """
    qubits = [int(q) for q in qubits]
    slot = start_slot
    gates: list[GateSpec] = []
    for layer in range(int(depth) + 1):
        for q in qubits:
            gates.append(GateSpec("RY", (q,), param_slot=slot))
            gates.append(GateSpec("RZ", (q,), param_slot=slot + 1))
            slot += 2
        if layer < depth:
            for a, b in zip(qubits, qubits[1:]):
                gates.append(GateSpec("CNOT", (a, b)))
    return gates, slot


def export_trace_csv(trace: TrainingTrace, path) -> None:
    """Write the training trace as CSV rows (restart, iteration, loss)."""
    lines = ["restart,iteration,loss"]
    for r, t, loss in trace.rows:
        lines.append(f"{r},{t},{repr(float(loss))}")
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
