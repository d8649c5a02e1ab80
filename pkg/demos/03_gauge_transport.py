"""
Eigenfunctions that do not see the field
========================================

A 5-series eigenfunction lives on a chain of cells.  When no flux hole
lies inside those cells, the field is a gradient there and a phase
e^{-iA} turns the Laplacian eigenfunction into a magnetic one.
"""

import numpy as np

from sgmagnetic.decimation import DecimationRecord, five_series_chain_basis, gauge_transport
from sgmagnetic.forms import FieldSpec, FormError, VertexFunction, graph_laplacian_matrix
from sgmagnetic.magnetic import magnetic_matrix, magnetic_residual

rec = DecimationRecord(2, 5, "-")
spec = FieldSpec.single("", 1.3)
M = magnetic_matrix(rec.level, spec)
lam = rec.value_at(rec.level)

for (p, q), chain, f in five_series_chain_basis(2, rec):
    g = gauge_transport(f, spec)
    print(f"chain {chain} from p{p} to p{q}: magnetic residual {magnetic_residual(M, g, lam):.1e}")

# %%
# The ground state covers the whole gasket and so encloses the central
# hole; no gauge exists on its support.

w, V = np.linalg.eigh(graph_laplacian_matrix(2, "dirichlet"))
f = VertexFunction(2, np.concatenate([[0, 0, 0], V[:, 0]]))
try:
    gauge_transport(f, spec)
except FormError as exc:
    print("ground state:", exc)
