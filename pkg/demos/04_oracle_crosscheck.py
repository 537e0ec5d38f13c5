"""Cross-check the covariance pipeline against brute-force Fock simulation.

The oracle never touches the series or the quadrature: it writes the
state out in a number basis, exponentiates the Jaynes-Cummings
Hamiltonian and traces out the fields.  ``oracle_check`` runs the whole
comparison and is also available as ``cvtransfer oracle-check``.
"""

import numpy as np

from cvtransfer import Cutoffs, build_table, make_tmsv, negativity, transfer_curve
from cvtransfer.experiments import oracle_check, report_text
from cvtransfer.fock_oracle import jc_evolve_trace, tmsv_fock

zeta = 0.86
table = build_table(make_tmsv(zeta), Cutoffs(25, 25, 100), method="series")
state = tmsv_fock(zeta)
print(f"single points at zeta = {zeta} (oracle truncation N = {state.truncation})")
for tau in (0.5, 1.3, 2.7, 4.0):
    ours = transfer_curve(table, [tau]).negativity[0]
    ref = negativity(jc_evolve_trace(state, tau))
    print(f"  tau={tau:3.1f}  pipeline {ours:.10f}  oracle {ref:.10f}  diff {abs(ours - ref):.1e}")

print("\nfull oracle check (tolerance 1e-6):")
for line in report_text(oracle_check()):
    print(" ", line)
