"""Magnetic Laplacians on Sierpinski gasket graphs.

Modules: ``topology`` (graphs, cells, holes, chains), ``forms`` (1-forms,
trace and refinement, harmonic forms), ``magnetic`` (magnetic matrices and
beta sweeps), ``decimation`` (spectral decimation and the field-independent
eigenvalues), ``ladder`` (closed-form Neumann spectrum) and ``fileio``/``cli``.
"""

from .decimation import (
    DecimationRecord,
    R_function,
    SeriesLabel,
    dirichlet_spectrum_decimation,
    eigenvalue_from_record,
    five_series_chain_basis,
    gauge_transport,
    phi_branch,
    predicted_fixed_count,
)
from .fileio import parse_field_spec
from .forms import (
    BETA_PERIOD,
    EdgeForm,
    FieldSpec,
    VertexFunction,
    assemble_field,
    b_form,
    derivative,
    flux,
    h_norm,
    harmonic_extension,
    hodge_split,
    refine,
    trace,
)
from .ladder import crosscheck_neumann, neumann_spectrum_formula, sigma_sets
from .magnetic import (
    beta_dependence_report,
    beta_sweep,
    counting_function,
    hermitian_eigendecomposition,
    magnetic_energy,
    magnetic_matrix,
    weyl_ratio,
)
from .topology import gasket, simple_chains

__version__ = "0.1.0"
