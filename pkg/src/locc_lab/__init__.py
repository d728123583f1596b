"""Dense-matrix simulation and variational training of small LOCC protocols.

The package models two parties who share a few qubits, act with local
circuits conditioned on broadcast measurement records, and keep or discard
branches with a terminal classifier. On top of the simulator sit a fast
Bell-diagonal algebra for recurrence-style distillation, closed-form
reference curves, parameter-shift training, and a CSV/SVG experiment
harness (`locc-lab` on the command line).

Qubit 0 is the leftmost ket label and the most significant bit of a matrix
index throughout.
"""

from .bell import (BELL_LABELS, BellDiagonal, bell_matrix_elements,
                   bilateral_cnot, coincidence_measure, dejmps_exact,
                   dejmps_output_tuple, rx_pair_map, to_density)
from .channels import (QuantumChannel, amplitude_damping, apply_channel,
                       choi_state)
from .circuit import (Circuit, GateSpec, apply_circuit, circuit_from_dict,
                      circuit_to_dict, circuit_unitary, cnot, dumps_circuit,
                      gate_matrix, h, loads_circuit, rx, ry, rz, x)
from .engine import (LoccProtocol, LoccRound, OutcomeBranch, OutcomeEnsemble,
                     PartyLayout, ProtocolError, SuccessStats, average_state,
                     classifier_table, execute, loads_protocol,
                     measure_computational, protocol_from_dict,
                     protocol_to_dict, dumps_protocol, success_statistics)
from .protocols import (NamedProtocol, bell_state, channel_output,
                        channel_sim_ansatz, channel_sim_trained,
                        default_training_states, dejmps,
                        dejmps_s_state_oracle, discrimination_probabilities,
                        discrimination_success, distill_stats,
                        distillation_ansatz, generalized_dejmps_4copy_oracle,
                        isotropic, isotropic_bell_tuple,
                        learned_isotropic_4copy,
                        learned_isotropic_4copy_oracle, learned_s_state,
                        learned_s_state_oracle, qsd_ansatz, qsd_oracle,
                        qsd_pair, qsd_protocol, s_state, stack_copies,
                        stack_pairs, standard_teleportation)
from .qmath import (DensityState, PureState, basis_ket, embed_operator,
                    hermitian_sqrt, partial_trace, permute_qubits,
                    state_fidelity, tensor)
from .trainer import (ChannelSim, Discrimination, DistillInfidelity,
                      LossValue, OptimizerConfig, TrainingError,
                      TrainingTrace, evaluate_loss, export_trace_csv,
                      gradient_parameter_shift, layered_ansatz_gates, train)

__version__ = "0.1.0"

__all__ = [
    "BELL_LABELS", "BellDiagonal", "bell_matrix_elements", "bilateral_cnot",
    "coincidence_measure", "dejmps_exact", "dejmps_output_tuple",
    "rx_pair_map", "to_density",
    "QuantumChannel", "amplitude_damping", "apply_channel", "choi_state",
    "Circuit", "GateSpec", "apply_circuit", "circuit_from_dict",
    "circuit_to_dict", "circuit_unitary", "cnot", "dumps_circuit",
    "gate_matrix", "h", "loads_circuit", "rx", "ry", "rz", "x",
    "LoccProtocol", "LoccRound", "OutcomeBranch", "OutcomeEnsemble",
    "PartyLayout", "ProtocolError", "SuccessStats", "average_state",
    "classifier_table", "execute", "loads_protocol", "measure_computational",
    "protocol_from_dict", "protocol_to_dict", "dumps_protocol",
    "success_statistics",
    "NamedProtocol", "bell_state", "channel_output", "channel_sim_ansatz",
    "channel_sim_trained", "default_training_states", "dejmps",
    "dejmps_s_state_oracle", "discrimination_probabilities",
    "discrimination_success", "distill_stats", "distillation_ansatz",
    "generalized_dejmps_4copy_oracle", "isotropic", "isotropic_bell_tuple",
    "learned_isotropic_4copy", "learned_isotropic_4copy_oracle",
    "learned_s_state", "learned_s_state_oracle", "qsd_ansatz", "qsd_oracle",
    "qsd_pair", "qsd_protocol", "s_state", "stack_copies", "stack_pairs",
    "standard_teleportation",
    "DensityState", "PureState", "basis_ket", "embed_operator",
    "hermitian_sqrt", "partial_trace", "permute_qubits", "state_fidelity",
    "tensor",
    "ChannelSim", "Discrimination", "DistillInfidelity", "LossValue",
    "OptimizerConfig", "TrainingError", "TrainingTrace", "evaluate_loss",
    "export_trace_csv", "gradient_parameter_shift", "layered_ansatz_gates",
    "train",
    "__version__",
]
