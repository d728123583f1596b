"""Execution engine for LOCC protocols on dense density matrices.

A protocol is a sequence of rounds over a fixed party layout. In each round
every acting party applies a local circuit chosen by the classical outcome
history so far, then a fixed set of qubits is measured in the computational
basis. Measured qubits leave the register, execution branches on the
outcome, and a terminal classifier labels every complete history as success
or failure.

Histories are tuples of bits ordered by round and, within a round, by
ascending register index of the measured qubits.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Mapping, Sequence

import numpy as np

from .circuit import (Circuit, circuit_from_dict, circuit_to_dict, gate_matrix,
                      _resolve_angle)
from .qmath import DensityState, _embed_matrix, state_fidelity

PRUNE_EPS = 1e-14
PRUNED_MASS_LIMIT = 1e-12
PROB_SUM_ATOL = 1e-10

History = tuple[int, ...]


class ProtocolError(ValueError):
    """A protocol definition is malformed or incomplete."""


@dataclass(frozen=True)
class PartyLayout:
    """Named parties owning disjoint qubit sets that cover the register."""

    parties: tuple[tuple[str, tuple[int, ...]], ...]

    def __post_init__(self):
        parties = tuple((str(name), tuple(int(q) for q in qubits))
                        for name, qubits in self.parties)
        object.__setattr__(self, "parties", parties)
        names = [name for name, _ in parties]
        if len(set(names)) != len(names):
            raise ProtocolError(f"duplicate party labels in {names}")
        all_qubits = [q for _, qs in parties for q in qs]
        if len(set(all_qubits)) != len(all_qubits):
            raise ProtocolError("parties share a qubit")
        if sorted(all_qubits) != list(range(len(all_qubits))):
            raise ProtocolError(f"party qubits {sorted(all_qubits)} do not "
                                f"cover a contiguous register")

    @property
    def num_qubits(self) -> int:
        return sum(len(qs) for _, qs in self.parties)

    def qubits_of(self, label: str) -> tuple[int, ...]:
        for name, qs in self.parties:
            if name == label:
                return qs
        raise KeyError(f"no party {label!r}")


@dataclass(frozen=True, eq=False)
class LoccRound:
    """One communication round: conditioned local circuits, then measurement.

    ``circuit_selector`` maps each classical history reachable at the start
    of the round to the acting parties' circuits for that branch. Circuits
    are written on the full register but may only touch their party's qubits.
    """

    acting_parties: tuple[str, ...]
    circuit_selector: Mapping[History, Mapping[str, Circuit]]
    measured_qubits: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "acting_parties",
                           tuple(str(p) for p in self.acting_parties))
        object.__setattr__(self, "measured_qubits",
                           tuple(sorted(int(q) for q in self.measured_qubits)))
        selector = {tuple(int(b) for b in hist): dict(per_party)
                    for hist, per_party in self.circuit_selector.items()}
        object.__setattr__(self, "circuit_selector", selector)


@dataclass(frozen=True, eq=False)
class LoccProtocol:
    """Rounds plus a terminal success classifier over complete histories."""

    layout: PartyLayout
    rounds: tuple[LoccRound, ...]
    success: Mapping[History, bool]
    num_params: int = 0

    def __post_init__(self):
        object.__setattr__(self, "rounds", tuple(self.rounds))
        object.__setattr__(self, "success",
                           {tuple(int(b) for b in hist): bool(v)
                            for hist, v in self.success.items()})
        n = self.layout.num_qubits
        measured_so_far: set[int] = set()
        bits_so_far = 0
        for r, rnd in enumerate(self.rounds):
            acting_qubits: set[int] = set()
            for party in rnd.acting_parties:
                acting_qubits.update(self.layout.qubits_of(party))
            expected = set(product((0, 1), repeat=bits_so_far))
            got = set(rnd.circuit_selector.keys())
            if got != expected:
                raise ProtocolError(
                    f"round {r} selector covers {len(got)} histories, "
                    f"needs all {len(expected)} of length {bits_so_far}")
            for hist, per_party in rnd.circuit_selector.items():
                if set(per_party.keys()) != set(rnd.acting_parties):
                    raise ProtocolError(
                        f"round {r} history {hist}: circuits for "
                        f"{sorted(per_party)} but acting parties are "
                        f"{sorted(rnd.acting_parties)}")
                for party, circ in per_party.items():
                    if circ.num_qubits != n:
                        raise ProtocolError(
                            f"round {r} {party} circuit is on "
                            f"{circ.num_qubits} qubits, register has {n}")
                    if circ.num_params != self.num_params:
                        raise ProtocolError(
                            f"round {r} {party} circuit declares "
                            f"{circ.num_params} parameters, protocol has "
                            f"{self.num_params}")
                    allowed = set(self.layout.qubits_of(party)) - measured_so_far
                    illegal = circ.touched_qubits - allowed
                    if illegal:
                        raise ProtocolError(
                            f"round {r} {party} circuit touches qubits "
                            f"{sorted(illegal)} outside its live party set")
            for q in rnd.measured_qubits:
                if q not in acting_qubits:
                    raise ProtocolError(
                        f"round {r} measures qubit {q} owned by a party "
                        f"that is not acting")
                if q in measured_so_far:
                    raise ProtocolError(f"qubit {q} measured twice")
            measured_so_far.update(rnd.measured_qubits)
            bits_so_far += len(rnd.measured_qubits)
        expected = set(product((0, 1), repeat=bits_so_far))
        if set(self.success.keys()) != expected:
            raise ProtocolError(
                f"classifier covers {len(self.success)} histories, needs all "
                f"{len(expected)} terminal histories of length {bits_so_far}")

    @property
    def num_measured(self) -> int:
        return sum(len(r.measured_qubits) for r in self.rounds)


def classifier_table(num_bits: int,
                     predicate: Callable[[History], bool]) -> dict[History, bool]:
    """Materialize a success predicate as an explicit history table."""
    return {hist: bool(predicate(hist))
            for hist in product((0, 1), repeat=num_bits)}


@dataclass(frozen=True, eq=False)
class OutcomeBranch:
    history: History
    probability: float
    state: DensityState


@dataclass(frozen=True, eq=False)
class OutcomeEnsemble:
    """Terminal branches of a protocol run; probabilities sum to one."""

    branches: tuple[OutcomeBranch, ...]

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(self.branches))
        total = 0.0
        for b in self.branches:
            if b.probability < 0.0:
                raise ValueError(f"negative branch probability {b.probability}")
            total += b.probability
        if abs(total - 1.0) > PROB_SUM_ATOL:
            raise ValueError(f"branch probabilities sum to {total!r}")

    def probability_of(self, history: History) -> float:
        for b in self.branches:
            if b.history == tuple(history):
                return b.probability
        return 0.0

    def branch(self, history: History) -> OutcomeBranch:
        for b in self.branches:
            if b.history == tuple(history):
                return b
        raise KeyError(f"no branch with history {history}")


def _measure_positions(mat: np.ndarray, num_qubits: int,
                       positions: Sequence[int]):
    """Yield (bits, probability, normalized submatrix) over measurement outcomes.

    ``positions`` index qubits of the *current* matrix. The submatrix for an
    outcome is the state on the remaining qubits: projecting onto |m> on the
    measured qubits and tracing them out selects exactly the block of rows
    and columns whose measured bits equal m.
    """
    keep = [q for q in range(num_qubits) if q not in positions]
    km, kk = len(positions), len(keep)
    t = mat.reshape((2,) * (2 * num_qubits))
    perm = (list(positions) + keep
            + [num_qubits + q for q in positions]
            + [num_qubits + q for q in keep])
    blocks = t.transpose(perm).reshape(2**km, 2**kk, 2**km, 2**kk)
    pruned = 0.0
    for idx in range(2**km):
        sub = blocks[idx, :, idx, :]
        prob = float(np.real(np.trace(sub)))
        if prob < PRUNE_EPS:
            pruned += max(prob, 0.0)
            continue
        bits = tuple((idx >> (km - 1 - j)) & 1 for j in range(km))
        yield bits, prob, np.ascontiguousarray(sub) / prob
    if pruned > PRUNED_MASS_LIMIT:
        raise RuntimeError(f"pruned probability mass {pruned:.3e} exceeds "
                           f"{PRUNED_MASS_LIMIT}")


def measure_computational(rho: DensityState,
                          qubits: Sequence[int]) -> OutcomeEnsemble:
    """Projective computational-basis measurement of the given qubits.

    Branch states live on the unmeasured qubits; outcomes below the pruning
    threshold 1e-14 are dropped.
    """
    qs = sorted(set(int(q) for q in qubits))
    if not qs:
        raise ValueError("no qubits to measure")
    if any(q < 0 or q >= rho.num_qubits for q in qs):
        raise IndexError(f"qubits {qs} out of range")
    branches = [OutcomeBranch(bits, prob, DensityState(sub, validate=False))
                for bits, prob, sub in
                _measure_positions(rho.matrix, rho.num_qubits, qs)]
    return OutcomeEnsemble(tuple(branches))


def _apply_circuit_live(circuit: Circuit, params: np.ndarray,
                        mat: np.ndarray, live: list[int]) -> np.ndarray:
    """Apply a full-register circuit to a matrix indexed by the live qubits."""
    n_live = len(live)
    for g in circuit.gates:
        pos = [live.index(t) for t in g.targets]
        u = _embed_matrix(gate_matrix(g, _resolve_angle(g, params)), pos, n_live)
        mat = u @ mat @ u.conj().T
    return mat


def execute(protocol: LoccProtocol, params: Sequence[float],
            rho_in: DensityState) -> OutcomeEnsemble:
    """Run a protocol on an input state and return the terminal ensemble.

    Branch states are reported on the unmeasured qubits in register order.
    Raises ProtocolError if a reachable history has no circuit entry.
    """
    params = np.asarray(params, dtype=float)
    if params.shape != (protocol.num_params,):
        raise ValueError(f"expected {protocol.num_params} parameters, "
                         f"got shape {params.shape}")
    n = protocol.layout.num_qubits
    if rho_in.num_qubits != n:
        raise ValueError(f"input state has {rho_in.num_qubits} qubits, "
                         f"layout has {n}")
    branches: list[tuple[History, float, np.ndarray]] = [((), 1.0, rho_in.matrix)]
    live = list(range(n))
    for rnd in protocol.rounds:
        next_branches: list[tuple[History, float, np.ndarray]] = []
        positions = [live.index(q) for q in rnd.measured_qubits]
        for hist, prob, mat in branches:
            try:
                per_party = rnd.circuit_selector[hist]
            except KeyError:
                raise ProtocolError(f"no circuits for reachable history {hist}")
            for party in rnd.acting_parties:
                mat = _apply_circuit_live(per_party[party], params, mat, live)
            if positions:
                for bits, bp, sub in _measure_positions(mat, len(live), positions):
                    next_branches.append((hist + bits, prob * bp, sub))
            else:
                next_branches.append((hist, prob, mat))
        branches = next_branches
        live = [q for q in live if q not in rnd.measured_qubits]
    out = tuple(OutcomeBranch(hist, prob, DensityState(mat, validate=False))
                for hist, prob, mat in branches)
    return OutcomeEnsemble(out)


def average_state(ensemble: OutcomeEnsemble) -> DensityState:
    """Probability-weighted mixture of every branch state."""
    acc = None
    for b in ensemble.branches:
        term = b.probability * b.state.matrix
        acc = term if acc is None else acc + term
    return DensityState(acc, validate=False)


@dataclass(frozen=True, eq=False)
class SuccessStats:
    """Success probability and fidelity of the merged success-branch state.

    ``fidelity`` and ``state`` are None when no branch is classified as a
    success (p_succ below 1e-14); callers must treat that explicitly.
    """

    p_succ: float
    fidelity: float | None
    state: DensityState | None


def success_statistics(ensemble: OutcomeEnsemble,
                       classifier: Mapping[History, bool] | Callable[[History], bool],
                       target: DensityState) -> SuccessStats:
    """Merge success branches into one state and score it against a target.

    The merged state is the probability-weighted mixture of the success
    branches, renormalized by the total success probability.
    """
    if callable(classifier):
        is_success = classifier
    else:
        def is_success(hist, _table=classifier):
            try:
                return _table[hist]
            except KeyError:
                raise ProtocolError(f"classifier undefined for history {hist}")
    kept = [b for b in ensemble.branches if is_success(b.history)]
    p_succ = float(sum(b.probability for b in kept))
    if p_succ < PRUNE_EPS:
        return SuccessStats(0.0, None, None)
    merged = sum(b.probability * b.state.matrix for b in kept) / p_succ
    state = DensityState(merged, validate=False)
    return SuccessStats(p_succ, state_fidelity(state, target), state)


# --- serialization ---------------------------------------------------------
#
# Protocols serialize to a nested key/value document: layout, per-round
# acting parties / selector entries / measured qubits, and the classifier as
# an explicit history table. See docs/serialization.md for the schema.

def protocol_to_dict(protocol: LoccProtocol) -> dict:
    rounds = []
    for rnd in protocol.rounds:
        entries = []
        for hist in sorted(rnd.circuit_selector):
            per_party = rnd.circuit_selector[hist]
            for party in rnd.acting_parties:
                entries.append({"history": list(hist), "party": party,
                                "circuit": circuit_to_dict(per_party[party])})
        rounds.append({"acting_parties": list(rnd.acting_parties),
                       "measured_qubits": list(rnd.measured_qubits),
                       "circuits": entries})
    success = [{"history": list(hist), "success": protocol.success[hist]}
               for hist in sorted(protocol.success)]
    return {"layout": [[name, list(qs)] for name, qs in protocol.layout.parties],
            "num_params": protocol.num_params,
            "rounds": rounds,
            "success": success}


def protocol_from_dict(doc: dict) -> LoccProtocol:
    layout = PartyLayout(tuple((name, tuple(qs)) for name, qs in doc["layout"]))
    rounds = []
    for rdoc in doc["rounds"]:
        selector: dict[History, dict[str, Circuit]] = {}
        for entry in rdoc["circuits"]:
            hist = tuple(int(b) for b in entry["history"])
            selector.setdefault(hist, {})[entry["party"]] = \
                circuit_from_dict(entry["circuit"])
        rounds.append(LoccRound(acting_parties=tuple(rdoc["acting_parties"]),
                                circuit_selector=selector,
                                measured_qubits=tuple(rdoc["measured_qubits"])))
    success = {tuple(int(b) for b in e["history"]): bool(e["success"])
               for e in doc["success"]}
    return LoccProtocol(layout=layout, rounds=tuple(rounds), success=success,
                        num_params=int(doc.get("num_params", 0)))


def dumps_protocol(protocol: LoccProtocol) -> str:
    return json.dumps(protocol_to_dict(protocol), indent=1)


def loads_protocol(text: str) -> LoccProtocol:
    return protocol_from_dict(json.loads(text))
