"""
The closed-form Neumann spectrum
================================

For the field on the central hole the limit Neumann spectrum contains
three beta-dependent values R(2 - 2 cos(2 k pi / 3 - 2 beta / sqrt 30))
plus a beta-independent set built from dilations of R(3) and R(5).  We
compare with the level-5 graph after fitting one scale factor at beta = 0.
"""

import numpy as np

from sgmagnetic.ladder import SIGMA_LABEL, crosscheck_neumann

rep = crosscheck_neumann(5, np.linspace(0, 2, 5), cutoff=300.0)
print(f"fitted scale {rep.scale:.5f}")
for beta in sorted(rep.spectra):
    rows = rep.cosine_rows(beta)
    print(f"beta={beta:4.2f} " + "  ".join(f"k={r.label}: {r.formula:8.3f} vs {r.graph:8.3f}" for r in rows))

sigma = [r for r in rep.at(0.0) if r.label == SIGMA_LABEL]
print("\nSigma' values at beta = 0:")
for r in sigma:
    print(f"  {r.formula:9.3f}  nearest graph value {r.graph:9.3f}")
