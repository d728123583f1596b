"""
Distributed discrimination of a Bell state from its damped counterpart
======================================================================

Two parties each hold one qubit of an unknown state that is either |Phi+>
or an amplitude-damped |Phi->, with equal prior. They may only measure
locally and talk classically: the first party measures in a rotated
basis, tells the second party its bit, and the second party's tilted
measurement declares the answer.
"""

import numpy as np

from locc_lab import (discrimination_success, qsd_oracle, qsd_pair,
                      qsd_protocol)

# Without noise the two hypotheses stay orthogonal, and the two-round
# protocol distinguishes them perfectly.
named = qsd_protocol(0.0)
print(f"noiseless success probability: "
      f"{discrimination_success(named, *qsd_pair(0.0)):.9f}")
print(f"responding party's tilt at gamma=0: {named.metadata['theta']:.6f} rad")

# Under damping the hypotheses overlap. Retuning the tilt to the noise
# level keeps the protocol optimal within its family; keeping the
# noiseless angles costs real success probability.
print(f"\n{'gamma':>6} {'retuned':>10} {'noiseless angles':>17} {'closed form':>12}")
for gamma in (0.0, 0.2, 0.4, 0.6, 0.8, 1.0):
    phi0, phi1 = qsd_pair(gamma)
    tuned = discrimination_success(qsd_protocol(gamma), phi0, phi1)
    naive = discrimination_success(qsd_protocol(0.0), phi0, phi1)
    print(f"{gamma:>6.2f} {tuned:>10.6f} {naive:>17.6f} {qsd_oracle(gamma):>12.6f}")

# The retuned column equals the closed form to machine precision, and it
# dominates the noiseless-angle column at every noise level.
worst = max(abs(discrimination_success(qsd_protocol(g), *qsd_pair(g))
                - qsd_oracle(g)) for g in np.linspace(0, 1, 21))
print(f"\nworst deviation from the closed form: {worst:.2e}")
