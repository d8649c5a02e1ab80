"""Magnetic graph Laplacians, their spectra and beta sweeps."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .forms import (
    EdgeForm,
    FieldSpec,
    FormError,
    VertexFunction,
    _apply_boundary,
    _same_level,
    assemble_field,
    refine_to,
    b_form,
)
from .topology import gasket, normalize_word

HERMITIAN_TOL = 1e-12
WEYL_EXPONENT = math.log(3) / math.log(5)


class SpectrumError(ValueError):
    pass


def renormalize(eigenvalues, m: int):
    """(3/2) 5**m lambda_m."""
    return 1.5 * 5.0 ** m * np.asarray(eigenvalues)


def magnetic_energy(f: VertexFunction, a: EdgeForm) -> float:
    """sum over undirected edges |f(x) - f(y) exp(i a(e_xy))|**2.

    This is half the ordered-pair sum, so a = 0 gives exactly E_m(f, f).
    """
    return float(np.real(magnetic_form(f, f, a)))


def magnetic_form(f: VertexFunction, g: VertexFunction, a: EdgeForm) -> complex:
    """Sesquilinear magnetic energy E_m^a(f, g) (undirected edge sum)."""
    _same_level(f, a)
    _same_level(g, a)
    E = gasket(a.level).edges
    phase = np.exp(1j * a.values)
    df = f.values[E[:, 0]] - f.values[E[:, 1]] * phase
    dg = g.values[E[:, 0]] - g.values[E[:, 1]] * phase
    return complex(np.sum(df * np.conj(dg)))


@dataclass(frozen=True)
class MagneticMatrix:
    """Dense Hermitian matrix of -M_m^a on V_m \\ V_0 or V_m."""

    level: int
    boundary: str
    matrix: np.ndarray = field(repr=False)
    form: EdgeForm = field(repr=False)

    @property
    def offset(self) -> int:
        """Vertex index of the first row (3 for dirichlet, 0 for neumann)."""
        return 3 if self.boundary == "dirichlet" else 0

    def apply(self, f: VertexFunction) -> np.ndarray:
        """(-M f) on the rows of the matrix, for f vanishing on V_0 if dirichlet."""
        return self.matrix @ f.values[self.offset:]


def _full_matrix(a: EdgeForm) -> np.ndarray:
    g = gasket(a.level)
    n = g.n_vertices
    M = np.zeros((n, n), dtype=complex)
    x, y = g.edges[:, 0], g.edges[:, 1]
    phase = np.exp(1j * a.values)
    M[x, y] = -phase
    M[y, x] = -np.conj(phase)
    M[np.diag_indices(n)] = g.degrees()
    return M


def matrix_from_form(a: EdgeForm, boundary: str = "dirichlet") -> MagneticMatrix:
    M = _apply_boundary(_full_matrix(a), boundary)
    if np.max(np.abs(M - M.conj().T), initial=0.0) > HERMITIAN_TOL:
        raise SpectrumError("assembled magnetic matrix is not Hermitian")
    return MagneticMatrix(a.level, boundary, M, a)


def magnetic_matrix(m: int, spec: FieldSpec | None = None, boundary: str = "dirichlet") -> MagneticMatrix:
    spec = spec or FieldSpec()
    return matrix_from_form(assemble_field(spec, m), boundary)


def _check_hermitian(M, tol=HERMITIAN_TOL):
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise SpectrumError("expected a square matrix")
    if np.max(np.abs(M - M.conj().T), initial=0.0) > tol:
        raise SpectrumError("matrix is not Hermitian")
    return M


def hermitian_eigendecomposition(M) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and orthonormal eigenvectors (columns)."""
    if isinstance(M, MagneticMatrix):
        M = M.matrix
    M = _check_hermitian(M)
    return np.linalg.eigh(M)


def eigenvalues(M) -> np.ndarray:
    if isinstance(M, MagneticMatrix):
        M = M.matrix
    return np.linalg.eigvalsh(_check_hermitian(M))


def jacobi_eigh(M, tol=1e-14, max_sweeps=100) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi rotations for a small complex Hermitian matrix.

    Slow (pure Python loops); kept as an independent check on LAPACK.
    """
    A = np.array(_check_hermitian(M), dtype=complex)
    n = len(A)
    V = np.eye(n, dtype=complex)
    scale = max(np.linalg.norm(A), 1.0)
    for _ in range(max_sweeps):
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-300:
                    continue
                # unitary diagonal phase makes the pivot real, then a real rotation
                phi = apq / abs(apq)
                app, aqq = A[p, p].real, A[q, q].real
                theta = 0.5 * math.atan2(2 * abs(apq), aqq - app)
                c, s = math.cos(theta), math.sin(theta)
                G = np.eye(n, dtype=complex)
                G[p, p] = c
                G[q, q] = c
                G[p, q] = s * phi
                G[q, p] = -s * np.conj(phi)
                A = G.conj().T @ A @ G
                V = V @ G
    w = np.diag(A).real
    order = np.argsort(w)
    return w[order], V[:, order]


# ---------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class SpectrumRow:
    beta: float
    level: int
    boundary: str
    raw: np.ndarray
    renormalized: np.ndarray


@dataclass
class SpectrumTable:
    rows: list

    def betas(self):
        return [r.beta for r in self.rows]

    def column(self, i: int) -> np.ndarray:
        return self.rows[i].renormalized

    def points(self):
        """(beta, renormalized eigenvalue) pairs in row order."""
        return [(r.beta, float(v)) for r in self.rows for v in r.renormalized]


def _unit_field(field_or_hole, m: int) -> EdgeForm:
    if isinstance(field_or_hole, FieldSpec):
        return assemble_field(field_or_hole, m)
    return refine_to(b_form(normalize_word(field_or_hole)), m)


def beta_sweep(m: int, hole="", betas=(0.0,), boundary="dirichlet", cutoff=math.inf, jobs=1) -> SpectrumTable:
    """Spectra of M_m^{beta a} for each beta, keeping renormalized values <= cutoff.

    ``hole`` is a hole address (a = b on that hole) or a FieldSpec (a = its field).
    Rows come back in grid order whatever ``jobs`` is.
    """
    betas = [float(b) for b in betas]
    if not betas:
        raise SpectrumError("beta grid is empty")
    unit = _unit_field(hole, m)

    def one(beta):
        lam = eigenvalues(matrix_from_form(beta * unit, boundary))
        ren = renormalize(lam, m)
        keep = ren <= cutoff
        return SpectrumRow(beta, m, boundary, lam[keep], ren[keep])

    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(one, betas))
    else:
        rows = [one(b) for b in betas]
    return SpectrumTable(rows)


def counting_function(eigs, x) -> int:
    """#{lambda <= x} for an ascending eigenvalue array."""
    return int(np.searchsorted(np.asarray(eigs), x, side="right"))


def weyl_ratio(eigs, x) -> float:
    return counting_function(eigs, x) * float(x) ** (-WEYL_EXPONENT)


def weyl_bounds(eigs, lo, hi) -> tuple[float, float]:
    """Exact inf and sup of the Weyl ratio over x in [lo, hi].

    The ratio decreases between eigenvalues, so the sup is attained at an
    eigenvalue (or lo) and the inf is a left limit at one (or the value at hi).
    """
    lam = np.sort(np.asarray(eigs, dtype=float))
    d = WEYL_EXPONENT
    inside = lam[(lam > lo) & (lam <= hi)]
    sup = [counting_function(lam, lo) * lo ** -d]
    sup += [counting_function(lam, x) * x ** -d for x in inside]
    inf = [counting_function(lam, hi) * hi ** -d]
    inf += [np.searchsorted(lam, x, side="left") * x ** -d for x in inside]
    return float(min(inf)), float(max(sup))


def remove_values(spectrum, values, tol):
    """Spectrum with one copy of each of ``values`` (nearest within tol) taken out."""
    rest = list(np.sort(np.asarray(spectrum)))
    for v in np.sort(np.asarray(values)):
        if not rest:
            break
        i = int(np.argmin(np.abs(np.array(rest) - v)))
        if abs(rest[i] - v) <= tol:
            rest.pop(i)
    return np.array(rest)


def cluster_values(values, tol):
    """Group ascending values into (representative, multiplicity) clusters."""
    out = []
    for v in np.sort(np.asarray(values)):
        if out and v - out[-1][2] <= tol:
            rep, mult, _ = out[-1]
            out[-1] = (rep, mult + 1, v)
        else:
            out.append((v, 1, v))
    return [(rep, mult) for rep, mult, _ in out]


def _count_near(sorted_vals, v, tol):
    lo = np.searchsorted(sorted_vals, v - tol, side="left")
    hi = np.searchsorted(sorted_vals, v + tol, side="right")
    return int(hi - lo)


@dataclass(frozen=True)
class BetaDependence:
    fixed: np.ndarray
    moving: np.ndarray
    laplacian: np.ndarray

    @property
    def fixed_is_laplacian_subset(self) -> bool:
        return multiset_contains(self.laplacian, self.fixed, tol=1e-6)


def multiset_contains(big, small, tol):
    """Whether every value of ``small`` (with multiplicity) occurs in ``big``."""
    big = list(np.sort(np.asarray(big)))
    for v in np.sort(np.asarray(small)):
        i = int(np.searchsorted(big, v - tol))
        if i >= len(big) or abs(big[i] - v) > tol:
            return False
        big.pop(i)
    return True


def split_fixed_moving(spectra, tol):
    """Split the first spectrum into values present (with multiplicity) at every beta.

    ``spectra`` is a list of ascending arrays on a common scale.  A cluster of
    the first spectrum keeps the smallest multiplicity it has across all of them.
    """
    spectra = [np.sort(np.asarray(s)) for s in spectra]
    fixed, moving = [], []
    for v, mult in cluster_values(spectra[0], tol):
        keep = min(mult, *[_count_near(s, v, tol) for s in spectra[1:]]) if len(spectra) > 1 else mult
        fixed += [v] * keep
        moving += [v] * (mult - keep)
    return np.array(fixed), np.array(moving)


def beta_dependence_report(m, hole="", betas=None, tol=1e-6, boundary="dirichlet") -> BetaDependence:
    """Partition the level-m spectrum (renormalized) into beta-fixed and beta-moving values.

    Values are taken from the first grid point; a value is fixed as often as
    it reappears at every other grid point within ``tol``.
    """
    betas = list(betas) if betas is not None else list(np.linspace(0, 2, 21))
    if len(betas) < 2:
        raise SpectrumError("need at least two beta values")
    table = beta_sweep(m, hole, betas, boundary)
    fixed, moving = split_fixed_moving([r.renormalized for r in table.rows], tol)
    lap = renormalize(np.linalg.eigvalsh(_apply_boundary_real(m, boundary)), m)
    return BetaDependence(fixed, moving, lap)


def _apply_boundary_real(m, boundary):
    from .forms import graph_laplacian_matrix

    return graph_laplacian_matrix(m, boundary)


def magnetic_residual(M: MagneticMatrix, f: VertexFunction, lam: float) -> float:
    """max |(-M f)(x) - lam f(x)| over the matrix rows, relative to max |f|."""
    if f.level != M.level:
        raise FormError("level mismatch")
    vals = f.values[M.offset:]
    r = M.matrix @ vals - lam * vals
    return float(np.max(np.abs(r)) / max(np.max(np.abs(f.values)), 1e-300))
