"""Vertex functions, graph energies and discrete 1-forms on the gasket graphs.

A 1-form at level m is stored as one real value per canonical oriented edge
(see :mod:`sgmagnetic.topology`); the value on the reversed edge is the
negative.  ``H_m`` is the subspace of forms with zero circulation around
every m-cell, and carries the inner product

    <a, a'> = (5/3)**m * sum_e a(e) a'(e).
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.linalg as spla

from .topology import (
    TopologyError,
    format_word,
    gasket,
    hole_boundary_loop,
    holes,
    normalize_word,
    word_index,
)

SQRT30 = math.sqrt(30.0)
# flux of b_form(w) around its own hole; beta -> beta + BETA_PERIOD adds 2 pi
FLUX_UNIT = 6.0 / SQRT30
BETA_PERIOD = 2 * math.pi / FLUX_UNIT
CIRCULATION_TOL = 1e-12
POTENTIAL_TOL = 1e-10
# edge type j of a cell runs from corner j-1 to corner j+1
_TAIL = np.array([2, 0, 1])
_HEAD = np.array([1, 2, 0])


class FormError(ValueError):
    pass


def _frozen(arr, dtype=None):
    arr = np.array(arr, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class VertexFunction:
    """A complex (or real) function on V_m, indexed like ``gasket(m).vertices``."""

    level: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values)
        if not np.iscomplexobj(vals):
            vals = vals.astype(float)
        if vals.shape != (gasket(self.level).n_vertices,):
            raise FormError(f"expected {gasket(self.level).n_vertices} values, got {vals.shape}")
        object.__setattr__(self, "values", _frozen(vals))

    @classmethod
    def from_callable(cls, level, fn):
        return cls(level, np.array([fn(v) for v in gasket(level).vertices]))

    @classmethod
    def constant(cls, level, c=1.0):
        return cls(level, np.full(gasket(level).n_vertices, c))

    def __add__(self, other):
        _same_level(self, other)
        return VertexFunction(self.level, self.values + other.values)

    def __sub__(self, other):
        _same_level(self, other)
        return VertexFunction(self.level, self.values - other.values)

    def __mul__(self, c):
        if isinstance(c, VertexFunction):
            _same_level(self, c)
            return VertexFunction(self.level, self.values * c.values)
        return VertexFunction(self.level, self.values * c)

    __rmul__ = __mul__

    def restrict(self, level):
        """Values on V_level for level <= self.level (vertex order is nested)."""
        return VertexFunction(level, self.values[: gasket(level).n_vertices])


@dataclass(frozen=True)
class EdgeForm:
    """A real antisymmetric function on the directed edges of level m."""

    level: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (gasket(self.level).n_edges,):
            raise FormError(f"expected {gasket(self.level).n_edges} edge values, got {vals.shape}")
        object.__setattr__(self, "values", _frozen(vals))

    @classmethod
    def zero(cls, level):
        return cls(level, np.zeros(gasket(level).n_edges))

    def __call__(self, x: int, y: int) -> float:
        """Value on the directed edge from vertex index x to vertex index y."""
        e, sign = gasket(self.level).edge_lookup()[(x, y)]
        return sign * self.values[e]

    def __add__(self, other):
        _same_level(self, other)
        return EdgeForm(self.level, self.values + other.values)

    def __sub__(self, other):
        _same_level(self, other)
        return EdgeForm(self.level, self.values - other.values)

    def __neg__(self):
        return EdgeForm(self.level, -self.values)

    def __mul__(self, c):
        return EdgeForm(self.level, self.values * float(c))

    __rmul__ = __mul__

    def circulations(self) -> np.ndarray:
        """Circulation around each m-cell (clockwise in the reference picture)."""
        return self.values.reshape(-1, 3).sum(axis=1)

    def in_H(self, tol=CIRCULATION_TOL) -> bool:
        return bool(np.all(np.abs(self.circulations()) <= tol))


def _same_level(a, b):
    if a.level != b.level:
        raise FormError(f"level mismatch: {a.level} vs {b.level}")


def _require_H(a: EdgeForm, tol=CIRCULATION_TOL):
    worst = np.max(np.abs(a.circulations()))
    if worst > tol:
        raise FormError(f"not in H_{a.level}: cell circulation {worst:.3g}")


# ---------------------------------------------------------------------------
# energies and Laplacians


def graph_energy(f: VertexFunction, g: VertexFunction) -> complex:
    """E_m(f, g) = sum over edges (f(x)-f(y)) * conj(g(x)-g(y))."""
    _same_level(f, g)
    E = gasket(f.level).edges
    df = f.values[E[:, 0]] - f.values[E[:, 1]]
    dg = g.values[E[:, 0]] - g.values[E[:, 1]]
    val = np.sum(df * np.conj(dg))
    return val if np.iscomplexobj(val) else float(val)


def renormalized_energy(f: VertexFunction) -> float:
    return (5 / 3) ** f.level * float(np.real(graph_energy(f, f)))


def graph_laplacian_matrix(m: int, boundary: str = "dirichlet") -> np.ndarray:
    """Dense matrix of -Delta_m on V_m \\ V_0 (dirichlet) or V_m (neumann)."""
    g = gasket(m)
    n = g.n_vertices
    L = np.zeros((n, n))
    x, y = g.edges[:, 0], g.edges[:, 1]
    np.add.at(L, (x, y), -1.0)
    np.add.at(L, (y, x), -1.0)
    L[np.diag_indices(n)] = g.degrees()
    return _apply_boundary(L, boundary)


def _apply_boundary(M, boundary):
    if boundary == "dirichlet":
        return M[3:, 3:]
    if boundary == "neumann":
        return M
    raise FormError(f"unknown boundary condition {boundary!r}")


def _midpoint_values(P, side, opposite):
    """Values at the three midpoints of each cell from its corner values P.

    The midpoint opposite corner k gets side*(P[k+1] + P[k+2]) + opposite*P[k].
    """
    out = np.empty_like(P)
    for k in range(3):
        out[:, k] = side * (P[:, (k + 1) % 3] + P[:, (k + 2) % 3]) + opposite * P[:, k]
    return out


def _child_corner_values(P, M):
    """Corner values of the children from parent corners P and midpoints M.

    Returns an array (cells, child j, corner i).
    """
    out = np.empty(P.shape[:1] + (3, 3), dtype=np.result_type(P, M))
    for j in range(3):
        for i in range(3):
            out[:, j, i] = P[:, j] if i == j else M[:, 3 - i - j]
    return out


def extend_by_rule(f: VertexFunction, side, opposite) -> VertexFunction:
    """Extend f from V_m to V_{m+1} with a linear per-cell midpoint rule."""
    g = gasket(f.level)
    nxt = gasket(f.level + 1)
    vals = np.zeros(nxt.n_vertices, dtype=f.values.dtype)
    vals[: g.n_vertices] = f.values
    mids = _midpoint_values(f.values[g.cells], side, opposite)
    vals[nxt.parent_midpoints] = mids
    return VertexFunction(f.level + 1, vals)


def harmonic_extension(f: VertexFunction) -> VertexFunction:
    """The (m+1)-level values of the m-harmonic function agreeing with f."""
    return extend_by_rule(f, 2 / 5, 1 / 5)


# ---------------------------------------------------------------------------
# 1-forms


def derivative(f: VertexFunction) -> EdgeForm:
    """Edge increments (df)(e_xy) = f(y) - f(x) of a real vertex function."""
    vals = f.values
    if np.iscomplexobj(vals):
        if np.any(np.abs(vals.imag) > 0):
            raise FormError("derivative needs a real vertex function")
        vals = vals.real
    E = gasket(f.level).edges
    return EdgeForm(f.level, vals[E[:, 1]] - vals[E[:, 0]])


def h_inner(a: EdgeForm, b: EdgeForm) -> float:
    _same_level(a, b)
    return (5 / 3) ** a.level * float(np.dot(a.values, b.values))


def h_norm(a: EdgeForm) -> float:
    _require_H(a)
    return math.sqrt(h_inner(a, a))


def _cell_potentials(a: EdgeForm) -> np.ndarray:
    """Per-cell corner potentials (cells, 3), zero at each cell's corner 0."""
    v = a.values.reshape(-1, 3)
    P = np.zeros_like(v)
    P[:, 2] = v[:, 1]
    P[:, 1] = v[:, 1] + v[:, 0]
    return P


def _increments(C):
    """Edge values from child corner potentials C (cells, child, corner)."""
    return (C[..., _HEAD] - C[..., _TAIL]).reshape(-1)


def refine(a: EdgeForm) -> EdgeForm:
    """Embed a in H_{m+1}: harmonically extend each cell's potential one level."""
    _require_H(a)
    P = _cell_potentials(a)
    C = _child_corner_values(P, _midpoint_values(P, 2 / 5, 1 / 5))
    return EdgeForm(a.level + 1, _increments(C))


def refine_to(a: EdgeForm, m: int) -> EdgeForm:
    if m < a.level:
        raise FormError(f"cannot refine level {a.level} down to {m}")
    while a.level < m:
        a = refine(a)
    return a


def _refine_kernel() -> np.ndarray:
    """9x3 matrix taking one cell's corner potentials to its 9 child increments."""
    P = np.eye(3)
    C = _child_corner_values(P, _midpoint_values(P, 2 / 5, 1 / 5))
    return (C[..., _HEAD] - C[..., _TAIL]).reshape(3, 9).T


_K = _refine_kernel()
_K_PINV = np.linalg.pinv(_K)


def trace(a: EdgeForm) -> EdgeForm:
    """Orthogonal projection of a in H_{m+1} onto refine(H_m), expressed at level m.

    The projection splits over m-cells; on each cell it is the least-squares
    fit of the nine child edge values by a refined harmonic potential.
    """
    _require_H(a)
    if a.level < 1:
        raise FormError("trace needs a form of level >= 1")
    local = a.values.reshape(-1, 9)
    P = local @ _K_PINV.T
    return EdgeForm(a.level - 1, (P[:, _HEAD] - P[:, _TAIL]).reshape(-1))


def trace_formula(a: EdgeForm) -> EdgeForm:
    """Trace via (1/3) (3/5)**m <a, refine(d h_{j,w})> on each cell w and type j.

    h_j is the harmonic function with h_j(p_j) = 0, h_j(p_{j-1}) = -1 and
    h_j(p_{j+1}) = 1, localized to the cell.
    """
    _require_H(a)
    m = a.level - 1
    local = a.values.reshape(-1, 9)
    H = np.zeros((3, 3))
    for j in range(3):
        H[j, (j - 1) % 3] = -1.0
        H[j, (j + 1) % 3] = 1.0
    R = _K @ H.T  # columns: refined d h_j restricted to one cell
    vals = (3 / 5) ** m * (5 / 3) ** (m + 1) * (local @ R) / 3.0
    return EdgeForm(m, vals.reshape(-1))


def b_form(hole="") -> EdgeForm:
    """The unit harmonic loop form around the central hole of F_h(SG).

    Lives at level |h| + 1.  Inside each child of F_h the edge facing the
    hole carries 2/sqrt(30) and the two outer edges -1/sqrt(30), all oriented
    clockwise around the child, hence counterclockwise around the hole.
    """
    hole = normalize_word(hole)
    m = len(hole) + 1
    vals = np.zeros(gasket(m).n_edges)
    base = 3 * word_index(hole)
    for j in range(3):
        c = base + j
        vals[3 * c: 3 * c + 3] = -1.0 / SQRT30
        vals[3 * c + j] = 2.0 / SQRT30
    return EdgeForm(m, vals)


def flux(a: EdgeForm, hole) -> float:
    """Counterclockwise circulation of a around the boundary of a hole."""
    loop = hole_boundary_loop(hole, a.level)
    lut = gasket(a.level).edge_lookup()
    total = 0.0
    for x, y in zip(loop, loop[1:] + loop[:1]):
        e, s = lut[(x, y)]
        total += s * a.values[e]
    return total


def hodge_split(a: EdgeForm) -> tuple[EdgeForm, EdgeForm]:
    """Split a in H_m into an exact part and a part orthogonal to all exact forms."""
    _require_H(a)
    g = gasket(a.level)
    D = g.incidence()
    L = (D.T @ D).tocsc()
    rhs = D.T @ a.values
    f = np.zeros(g.n_vertices)
    if g.n_vertices > 1:
        f[1:] = spla.spsolve(L[1:, 1:], rhs[1:])
    exact = EdgeForm(a.level, D @ f)
    return exact, a - exact


def hodge_dimensions(m: int) -> tuple[int, int, int]:
    """(dim H_m, dim exact, dim harmonic) by numerical rank."""
    g = gasket(m)
    ne, nc = g.n_edges, g.n_cells
    Cmat = np.zeros((nc, ne))
    Cmat[np.repeat(np.arange(nc), 3), np.arange(ne)] = 1.0
    dim_H = ne - np.linalg.matrix_rank(Cmat)
    dim_exact = np.linalg.matrix_rank(g.incidence().toarray())
    return int(dim_H), int(dim_exact), int(dim_H - dim_exact)


def random_form(m: int, rng=None) -> EdgeForm:
    """A random element of H_m: random exact part plus random multiples of every b_w."""
    rng = np.random.default_rng(rng)
    f = VertexFunction(m, rng.standard_normal(gasket(m).n_vertices))
    a = derivative(f)
    for w in holes(m):
        a = a + rng.standard_normal() * refine_to(b_form(w), m)
    return a


@dataclass(frozen=True)
class CellFunction:
    """A function on V_m ∩ F_w(SG): vertex indices of level m and their values."""

    level: int
    word: str
    vertices: np.ndarray
    values: np.ndarray

    def as_dict(self):
        return dict(zip(self.vertices.tolist(), self.values.tolist()))

    def to_vertex_function(self, fill=0.0) -> VertexFunction:
        vals = np.full(gasket(self.level).n_vertices, fill, dtype=self.values.dtype)
        vals[self.vertices] = self.values
        return VertexFunction(self.level, vals)


def _bfs_potential(n_edges_iter, root, values, tol):
    """Accumulate a potential along a graph given as (x, y, a_xy) triples."""
    adj = {}
    for x, y, v in n_edges_iter:
        adj.setdefault(x, []).append((y, v))
        adj.setdefault(y, []).append((x, -v))
    pot = {root: 0.0}
    todo = deque([root])
    while todo:
        x = todo.popleft()
        for y, v in adj.get(x, ()):
            want = pot[x] + v
            if y not in pot:
                pot[y] = want
                todo.append(y)
            elif abs(pot[y] - want) > tol:
                return None
    return pot


def local_potential(a: EdgeForm, word) -> CellFunction:
    """Potential A on the vertices of F_w(SG) with dA = a there, A(F_w(p_0)) = 0."""
    word = normalize_word(word)
    g = gasket(a.level)
    r = g.cell_range(word)
    edges = range(3 * r.start, 3 * r.stop)
    root = int(g.cells[r.start, 0])
    triples = ((int(g.edges[e, 0]), int(g.edges[e, 1]), a.values[e]) for e in edges)
    scale = max(1.0, float(np.max(np.abs(a.values[3 * r.start: 3 * r.stop]), initial=0.0)))
    pot = _bfs_potential(triples, root, a.values, POTENTIAL_TOL * scale)
    if pot is None:
        raise FormError(f"not exact on cell {format_word(word)}")
    verts = np.array(sorted(pot))
    return CellFunction(a.level, word, verts, np.array([pot[v] for v in verts]))


def magnetic_normal_derivative(f: VertexFunction, a: EdgeForm, p: int) -> complex:
    """(5/3)**m * sum_{x ~ p} (f(p) - exp(i (A(x) - A(p))) f(x)) at a point p of V_0."""
    _same_level(f, a)
    p = int(p)
    if p not in (0, 1, 2):
        raise FormError("normal derivatives are taken at points of V_0")
    m = f.level
    word = str(p) * m
    A = local_potential(a, word).as_dict()
    g = gasket(m)
    c = g.cell_range(word).start
    nbrs = [int(v) for v in g.cells[c] if v != p]
    total = 0j
    for x in nbrs:
        total += f.values[p] - np.exp(1j * (A[x] - A[p])) * f.values[x]
    return (5 / 3) ** m * total


def normal_derivative(f: VertexFunction, p: int) -> complex:
    return magnetic_normal_derivative(f, EdgeForm.zero(f.level), p)


# ---------------------------------------------------------------------------
# magnetic fields


@dataclass(frozen=True)
class FieldSpec:
    """Finitely many holes w with real coefficients beta_w: a = sum beta_w b o F_w."""

    terms: tuple = field(default_factory=tuple)

    def __post_init__(self):
        norm = []
        seen = set()
        for w, beta in self.terms:
            w = normalize_word(w)
            if w in seen:
                raise FormError(f"duplicate hole {format_word(w)}")
            seen.add(w)
            norm.append((w, float(beta)))
        object.__setattr__(self, "terms", tuple(norm))

    @classmethod
    def single(cls, hole="", beta=1.0):
        return cls(((hole, beta),))

    @property
    def scale(self) -> int:
        """Smallest level at which every hole of the field is resolved."""
        return max((len(w) + 1 for w, _ in self.terms), default=0)

    @property
    def holes(self):
        return [w for w, _ in self.terms]

    def scaled(self, c):
        return FieldSpec(tuple((w, c * beta) for w, beta in self.terms))

    def __len__(self):
        return len(self.terms)

    def __str__(self):
        return ",".join(f"{format_word(w)}:{beta!r}" for w, beta in self.terms)


def assemble_field(spec: FieldSpec, m: int) -> EdgeForm:
    """sum beta_w refine^(m-|w|-1)(b_form(w)) as a form of level m."""
    if m < spec.scale:
        raise FormError(f"level {m} is below the field scale {spec.scale}")
    total = EdgeForm.zero(m)
    for w, beta in spec.terms:
        total = total + beta * refine_to(b_form(w), m)
    return total


def has_trivial_flux(beta, tol=1e-9) -> bool:
    """Whether the flux beta * FLUX_UNIT is an integer multiple of 2 pi."""
    phase = beta * FLUX_UNIT / (2 * math.pi)
    return abs(phase - round(phase)) <= tol


__all__ = [
    "CIRCULATION_TOL",
    "CellFunction",
    "EdgeForm",
    "BETA_PERIOD",
    "FLUX_UNIT",
    "FieldSpec",
    "FormError",
    "SQRT30",
    "TopologyError",
    "VertexFunction",
    "assemble_field",
    "b_form",
    "derivative",
    "extend_by_rule",
    "flux",
    "graph_energy",
    "has_trivial_flux",
    "graph_laplacian_matrix",
    "h_inner",
    "h_norm",
    "harmonic_extension",
    "hodge_dimensions",
    "hodge_split",
    "local_potential",
    "magnetic_normal_derivative",
    "normal_derivative",
    "random_form",
    "refine",
    "refine_to",
    "renormalized_energy",
    "trace",
    "trace_formula",
]
