"""
Spectral decimation
===================

Every Dirichlet eigenvalue of the level-m graph comes from a short record:
the level m0 where it is born, its birth value 2, 5 or 6, and a word of
branch choices for the inverse of x -> x (5 - x).
"""

import numpy as np

from sgmagnetic.decimation import (
    DecimationRecord,
    R_function,
    decimation_multiset,
    dirichlet_spectrum_decimation,
    eigenvalue_from_record,
)
from sgmagnetic.forms import graph_laplacian_matrix

# %%
# The level-3 spectrum from records against a dense eigensolve.

m = 3
dense = np.linalg.eigvalsh(graph_laplacian_matrix(m, "dirichlet"))
dec = decimation_multiset(m)
print(f"level {m}: {len(dense)} eigenvalues, max difference {np.max(np.abs(dense - dec)):.1e}")

# %%
# The records, their multiplicities and limit eigenvalues.

for e in dirichlet_spectrum_decimation(m)[:8]:
    r = e.record
    print(f"m0={r.m0} s={r.s} word={r.word or '.':4s} mult={e.multiplicity:2d} "
          f"lambda_{m}={r.value_at(m):.6f}  limit={e.eigenvalue:10.4f}")

# %%
# The limit of a record uses R(t) = lim 5^n Phi_-^n(t).  Following the
# '-' branch for more levels only refines the same limit.

rec = DecimationRecord(1, 2)
for k in (1, 3, 5, 7):
    print(f"level {k}: {rec.renormalized_at(k):.8f}")
print(f"limit:   {eigenvalue_from_record(rec):.8f}   (R(2) = {R_function(2.0):.8f})")
