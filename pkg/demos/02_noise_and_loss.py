"""How thermal noise and a lossy bath erode what the qubits receive.

The first part mixes squeezed thermal light on a balanced beam splitter
and raises the thermal occupation; the second lets the squeezed vacuum
decay into a bath with mean occupation 0.1.  Both are computed from the
covariance matrix, which is all the pipeline needs.
"""

import numpy as np

from cvtransfer import Cutoffs, build_table, to_standard_form, transfer_curve
from cvtransfer.gaussian_core import (
    ResourceParams,
    dissipate,
    make_squeezed_thermal_bs,
    make_tmsv,
    nu_minus,
    separability_time,
    thermal_threshold,
)

zeta = 0.86
print(f"thermal noise at zeta = {zeta}; entanglement survives up to nbar = {thermal_threshold(zeta):.4f}")
for nbar in (0.0, 0.5, 1.0, 1.5, 2.0, 2.25, 2.4):
    cm = make_squeezed_thermal_bs(ResourceParams(s1=zeta, s2=-zeta, transmittivity=0.5, nbar1=nbar, nbar2=nbar))
    sf, _ = to_standard_form(cm)
    best = transfer_curve(build_table(sf, Cutoffs.auto(sf), method="series")).max
    print(f"  nbar={nbar:4.2f}  nu-={nu_minus(sf):.4f}  max negativity={best:.4f}")

bath = 0.1
print(f"\nloss into a bath with N = {bath}; the resource separates at Gt = {separability_time(zeta, bath):.4f}")
for gt in np.round(np.linspace(0.0, 1.8, 7), 2):
    sf, _ = to_standard_form(dissipate(make_tmsv(zeta).covariance(), bath, gt))
    best = transfer_curve(build_table(sf, Cutoffs.auto(sf), method="series")).max
    print(f"  Gt={gt:4.2f}  nu-={nu_minus(sf):.4f}  max negativity={best:.4f}")
