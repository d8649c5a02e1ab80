"""Spectral decimation for the Dirichlet Laplacians and the fixed part of magnetic spectra.

Every Dirichlet eigenvalue of Delta_m is obtained from a birth value
s in {2, 5, 6} at some level m0 <= m by the branches

    lambda_k = Phi_+(lambda_{k-1})  or  Phi_-(lambda_{k-1}),
    Phi_pm(t) = (5 pm sqrt(25 - 4 t)) / 2,

and the limiting eigenvalue of the Laplacian is (3/2) 5**m1 R(lambda_m1)
where m1 is the last level at which the '+' branch was taken and
R(t) = lim 5**n Phi_-^n(t).
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np
import scipy.linalg

from .forms import (
    FieldSpec,
    FormError,
    VertexFunction,
    assemble_field,
    extend_by_rule,
    flux,
    graph_laplacian_matrix,
)
from .topology import (
    CORNERS,
    TopologyError,
    cell_corners,
    chain_junctions,
    check_level,
    gasket,
    simple_chains,
)
from .topology import holes as all_holes

R_TOL = 1e-13
R_MAX_ITER = 200
RESIDUAL_TOL = 1e-9
PAIRS = ((0, 1), (0, 2), (1, 2))


class DecimationError(ValueError):
    pass


def phi_branch(t, sign):
    """Phi_+ or Phi_- of t; both roots x of x (5 - x) = t."""
    if sign not in ("+", "-"):
        raise DecimationError(f"branch must be '+' or '-', got {sign!r}")
    disc = 25.0 - 4.0 * t
    if disc < 0:
        raise DecimationError(f"complex branch: {t} > 25/4")
    root = math.sqrt(disc)
    if sign == "+":
        return (5.0 + root) / 2.0
    # cancellation-free form of (5 - root) / 2
    return 2.0 * t / (5.0 + root)


def R_function(t, tol=R_TOL, max_iter=R_MAX_ITER) -> float:
    """lim 5**n Phi_-^n(t), iterated until two scaled values agree to tol (relative)."""
    x = float(t)
    prev = x
    scale = 1.0
    for _ in range(max_iter):
        x = phi_branch(x, "-")
        scale *= 5.0
        cur = scale * x
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return cur
        prev = cur
    return prev


class SeriesLabel(Enum):
    TWO = 2
    FIVE = 5
    SIX = 6

    def __str__(self):
        return f"{self.value}-series"

    def multiplicity(self, m0: int) -> int:
        """Dimension of the eigenspace of a value born at level m0."""
        if self is SeriesLabel.TWO:
            return 1 if m0 == 1 else 0
        if self is SeriesLabel.FIVE:
            return (3 ** (m0 - 1) + 3) // 2 if m0 >= 1 else 0
        return (3 ** m0 - 3) // 2 if m0 >= 2 else 0

    def first_level(self) -> int:
        return 2 if self is SeriesLabel.SIX else 1


@dataclass(frozen=True)
class DecimationRecord:
    """Birth level m0, birth value s and the branch word followed after birth."""

    m0: int
    s: int
    word: str = ""

    def __post_init__(self):
        if self.s not in (2, 5, 6):
            raise DecimationError(f"birth value must be 2, 5 or 6, got {self.s}")
        series = SeriesLabel(self.s)
        if series is SeriesLabel.TWO and self.m0 != 1:
            raise DecimationError("2-series values are born at level 1")
        if self.m0 < series.first_level():
            raise DecimationError(f"{series} needs m0 >= {series.first_level()}")
        if set(self.word) - {"+", "-"}:
            raise DecimationError(f"branch word must be over '+-', got {self.word!r}")
        self.values  # validates the branches

    @property
    def series(self) -> SeriesLabel:
        return SeriesLabel(self.s)

    @property
    def values(self) -> tuple[float, ...]:
        """lambda_{m0}, ..., lambda_{m0 + len(word)}."""
        vals = [float(self.s)]
        for sign in self.word:
            nxt = phi_branch(vals[-1], sign)
            if nxt in (2.0, 5.0, 6.0):
                raise DecimationError(f"branch reaches forbidden value {nxt} after birth")
            vals.append(nxt)
        return tuple(vals)

    @property
    def level(self) -> int:
        return self.m0 + len(self.word)

    @property
    def fixation(self) -> int:
        """m1: the last level reached by a '+' branch (m0 if none)."""
        k = self.word.rfind("+")
        return self.m0 + k + 1 if k >= 0 else self.m0

    def value_at(self, m: int) -> float:
        """lambda_m, continuing with '-' past the recorded word."""
        if m < self.m0:
            raise DecimationError(f"level {m} is before birth at {self.m0}")
        vals = self.values
        if m - self.m0 < len(vals):
            return vals[m - self.m0]
        x = vals[-1]
        for _ in range(m - self.level):
            x = phi_branch(x, "-")
        return x

    def renormalized_at(self, m: int) -> float:
        return 1.5 * 5.0 ** m * self.value_at(m)

    def extend(self, sign: str) -> "DecimationRecord":
        return DecimationRecord(self.m0, self.s, self.word + sign)


def eigenvalue_from_record(rec: DecimationRecord) -> float:
    """(3/2) 5**m1 R(lambda_m1)."""
    m1 = rec.fixation
    return 1.5 * 5.0 ** m1 * R_function(rec.value_at(m1))


@dataclass(frozen=True)
class DecimationEntry:
    eigenvalue: float
    multiplicity: int
    series: SeriesLabel
    record: DecimationRecord

    @property
    def level_value(self) -> float:
        """Renormalized eigenvalue of the graph at the record's level."""
        return self.record.renormalized_at(self.record.level)


def _birth_records(m0: int):
    out = []
    for s in (2, 5, 6):
        series = SeriesLabel(s)
        if series.multiplicity(m0) > 0:
            out.append(DecimationRecord(m0, s))
    return out


def _grow(rec: DecimationRecord, target: int, cutoff: float):
    """All extensions of rec to the target level with limit eigenvalue <= cutoff."""
    stack = [rec]
    while stack:
        r = stack.pop()
        if 1.5 * 5.0 ** r.level * R_function(r.values[-1]) > cutoff:
            continue  # every continuation only increases the limit
        if r.level == target:
            yield r
            continue
        for sign in "-+":
            try:
                stack.append(r.extend(sign))
            except DecimationError:
                pass


def dirichlet_spectrum_decimation(max_m: int, cutoff=math.inf) -> list[DecimationEntry]:
    """The Dirichlet spectrum of Delta_max_m as decimation records, sorted by limit value.

    Records are carried to level max_m so that ``entry.level_value`` and
    ``entry.record.value_at(max_m)`` give the graph eigenvalue.
    """
    check_level(max_m)
    if max_m < 1:
        raise DecimationError("max_m must be at least 1")
    entries = []
    for m0 in range(1, max_m + 1):
        for birth in _birth_records(m0):
            mult = birth.series.multiplicity(m0)
            for rec in _grow(birth, max_m, cutoff):
                entries.append(DecimationEntry(eigenvalue_from_record(rec), mult, rec.series, rec))
    entries.sort(key=lambda e: (e.eigenvalue, e.series.value, e.record.m0, e.record.word))
    return entries


def decimation_multiset(max_m: int) -> np.ndarray:
    """Raw level-max_m eigenvalues lambda_m (ascending, with multiplicity)."""
    vals = []
    for e in dirichlet_spectrum_decimation(max_m):
        vals += [e.record.value_at(max_m)] * e.multiplicity
    return np.sort(np.array(vals))


# ---------------------------------------------------------------------------
# eigenfunctions


def _extension_weights(lam):
    """Midpoint weights for extending a lambda_{k}-eigenfunction with lambda_{k+1} = lam."""
    d = (2.0 - lam) * (5.0 - lam)
    return (4.0 - lam) / d, 2.0 / d


def extend_eigenfunction(f: VertexFunction, rec: DecimationRecord, m: int) -> VertexFunction:
    """Carry an eigenfunction at level rec.m0 up to level m along rec's branches."""
    for k in range(f.level + 1, m + 1):
        side, opposite = _extension_weights(rec.value_at(k))
        f = extend_by_rule(f, side, opposite)
    return f


def _corner_index(word: str, point) -> int:
    return cell_corners(word).index(point)


def chain_function(chain, p: int, q: int) -> VertexFunction:
    """The 5-eigenfunction of level len(chain[0]) + 1 carried by a chain from p to q.

    Per cell the midpoint opposite the entry corner is 1, the one opposite the
    exit corner is -1, the third midpoint and all cell corners are 0.
    """
    k = len(chain[0])
    g = gasket(k + 1)
    vals = np.zeros(g.n_vertices)
    pts = chain_junctions(chain, CORNERS[p], CORNERS[q])
    corners = cell_corners
    for w, a, b in zip(chain, pts, pts[1:]):
        c = corners(w)
        e, x = c.index(a), c.index(b)
        t = 3 - e - x
        # the midpoint opposite corner j is the midpoint of the two other corners
        vals[g.index[_mid_of(c, e)]] = 1.0
        vals[g.index[_mid_of(c, x)]] = -1.0
        assert vals[g.index[_mid_of(c, t)]] == 0.0
    return VertexFunction(k + 1, vals)


def _mid_of(c, j):
    from .topology import _mid

    return _mid(c[(j + 1) % 3], c[(j + 2) % 3])


def five_series_chain_basis(m0: int, record: DecimationRecord | None = None, pairs=PAIRS):
    """One eigenfunction per canonical simple chain of (m0-1)-cells.

    With a record the functions are extended to ``record.level``.
    Returns a list of (pair, chain, VertexFunction).
    """
    if m0 < 2:
        raise DecimationError("chain bases start at m0 = 2")
    record = record or DecimationRecord(m0, 5)
    if record.m0 != m0 or record.s != 5:
        raise DecimationError("record does not describe a 5-series value born at m0")
    out = []
    for p, q in pairs:
        for chain in simple_chains(m0 - 1, p, q):
            f = chain_function(chain, p, q)
            out.append(((p, q), chain, extend_eigenfunction(f, record, record.level)))
    return out


def _cells_at(m: int, vertex_index: int):
    """Indices of the m-cells having the vertex as a corner."""
    cells = gasket(m).cells
    return [int(c) for c in np.nonzero((cells == vertex_index).any(axis=1))[0]]


def six_series_function(m0: int, z: int) -> VertexFunction:
    """The 6-eigenfunction of level m0 attached to the interior vertex z of V_{m0-1}.

    Value 1 at z, -1/2 at the four midpoints adjacent to z, and 1/2 at the
    two midpoints opposite z; it vanishes outside the two cells meeting at z.
    """
    g_prev = gasket(m0 - 1)
    if not 3 <= z < g_prev.n_vertices:
        raise DecimationError(f"{z} is not an interior vertex of V_{m0 - 1}")
    g = gasket(m0)
    vals = np.zeros(g.n_vertices)
    vals[z] = 1.0
    zpt = g_prev.vertices[z]
    for c in _cells_at(m0 - 1, z):
        corners = tuple(g_prev.vertices[i] for i in g_prev.cells[c])
        j = corners.index(zpt)
        vals[g.index[_mid_of(corners, j)]] = 0.5
        vals[g.index[_mid_of(corners, (j + 1) % 3)]] = -0.5
        vals[g.index[_mid_of(corners, (j + 2) % 3)]] = -0.5
    return VertexFunction(m0, vals)


def six_series_constrained(m0: int, z: int) -> VertexFunction:
    """Same function from a null-space solve restricted to the two cells at z."""
    g_prev = gasket(m0 - 1)
    g = gasket(m0)
    support = set()
    for c in _cells_at(m0 - 1, z):
        word_cells = range(3 * c, 3 * c + 3)
        for child in word_cells:
            support.update(int(v) for v in g.cells[child])
    support -= {int(v) for c in _cells_at(m0 - 1, z) for v in g_prev.cells[c] if v != z}
    support -= {0, 1, 2}
    cols = sorted(support)
    L = graph_laplacian_matrix(m0, "neumann")[:, cols]
    A = L - 6.0 * np.eye(g.n_vertices)[:, cols]
    A = A[3:]  # eigen equation at every non-boundary vertex
    ns = scipy.linalg.null_space(A, rcond=1e-10)
    if ns.shape[1] != 1:
        raise DecimationError(f"expected a one-dimensional block, got {ns.shape[1]}")
    vals = np.zeros(g.n_vertices)
    vals[cols] = ns[:, 0] / ns[cols.index(z), 0]
    return VertexFunction(m0, vals)


def six_series_basis(m0: int, record: DecimationRecord | None = None):
    """One eigenfunction per interior vertex of V_{m0-1}; list of (z, VertexFunction)."""
    if m0 < 2:
        raise DecimationError("6-series values are born at m0 >= 2")
    record = record or DecimationRecord(m0, 6)
    if record.m0 != m0 or record.s != 6:
        raise DecimationError("record does not describe a 6-series value born at m0")
    n = gasket(m0 - 1).n_vertices
    return [(z, extend_eigenfunction(six_series_function(m0, z), record, record.level)) for z in range(3, n)]


def laplacian_residual(f: VertexFunction, lam: float) -> float:
    """max |Delta_m f - lam f| on interior vertices relative to max |f|; f must vanish on V_0."""
    L = graph_laplacian_matrix(f.level, "dirichlet")
    v = f.values[3:]
    r = L @ v - lam * v
    bnd = np.max(np.abs(f.values[:3]))
    return float(max(np.max(np.abs(r)), bnd) / max(np.max(np.abs(f.values)), 1e-300))


# ---------------------------------------------------------------------------
# gauge transport


def _wrap(x):
    return (x + math.pi) % (2 * math.pi) - math.pi


def gauge_transport(f: VertexFunction, spec: FieldSpec, tol=1e-9) -> VertexFunction:
    """e^{-iA} f where a = dA mod 2 pi on every edge touching the support of f.

    If f is an eigenfunction of Delta_m, the result is an eigenfunction of the
    magnetic operator of a = assemble_field(spec, m) with the same eigenvalue.
    """
    if len(spec) == 0:
        return f
    m = f.level
    a = assemble_field(spec, m).values
    g = gasket(m)
    mag = np.abs(f.values)
    support = mag > tol * max(float(mag.max()), 1e-300)
    E = g.edges
    use = support[E[:, 0]] | support[E[:, 1]]
    adj = {}
    for e in np.nonzero(use)[0]:
        x, y = int(E[e, 0]), int(E[e, 1])
        adj.setdefault(x, []).append((y, a[e]))
        adj.setdefault(y, []).append((x, -a[e]))
    A = {}
    for root in adj:
        if root in A:
            continue
        A[root] = 0.0
        queue = deque([root])
        while queue:
            x = queue.popleft()
            for y, axy in adj[x]:
                want = A[x] + axy
                if y not in A:
                    A[y] = want
                    queue.append(y)
                elif abs(_wrap(A[y] - want)) > 1e-9:
                    raise FormError("no Coulomb gauge on support")
    phase = np.ones(g.n_vertices, dtype=complex)
    for x, v in A.items():
        phase[x] = np.exp(-1j * v)
    return VertexFunction(m, phase * f.values)


# ---------------------------------------------------------------------------
# fixed eigenvalues


def _blocked(cell_word: str, holes) -> bool:
    return any(h.startswith(cell_word) for h in holes)


@lru_cache(maxsize=None)
def _fixed_dimension(m0: int, s: int, holes: tuple) -> int:
    """Basis functions of a value born at (m0, s) whose support encloses no flux hole."""
    if not holes:
        return SeriesLabel(s).multiplicity(m0)
    if all(len(h) + 1 < m0 for h in holes):
        # every hole sits between (m0-1)-cells, inside no support cell
        return SeriesLabel(s).multiplicity(m0)
    if s == 2 or m0 == 1:
        return 0
    if s == 5:
        return sum(
            1
            for p, q in PAIRS
            for chain in simple_chains(m0 - 1, p, q)
            if not any(_blocked(w, holes) for w in chain)
        )
    g_prev = gasket(m0 - 1)
    count = 0
    for z in range(3, g_prev.n_vertices):
        words = [_cell_word(c, m0 - 1) for c in _cells_at(m0 - 1, z)]
        if not any(_blocked(w, holes) for w in words):
            count += 1
    return count


def _cell_word(c: int, level: int) -> str:
    from .topology import index_word

    return index_word(c, level)


def _trivial(phi, tol=1e-9):
    turns = phi / (2 * math.pi)
    return abs(turns - round(turns)) <= tol


def predicted_fixed_count(m: int, spec: FieldSpec) -> int:
    """Level-m eigenvalues (with multiplicity) carried by eigenfunctions avoiding the flux holes.

    Holes whose flux (of the assembled level-m field) is a multiple of 2 pi do
    not obstruct; a term beta b_w also puts flux through holes around F_w.  The count uses
    the chain and pair bases; an eigenvalue counts as fixed as many times as
    its basis has members whose support cells all miss the obstructing holes.
    """
    if m < spec.scale:
        raise FormError(f"level {m} is below the field scale {spec.scale}")
    a = assemble_field(spec, m)
    holes = tuple(sorted(h for h in all_holes(m) if not _trivial(flux(a, h))))
    total = 0
    for e in dirichlet_spectrum_decimation(m):
        total += _fixed_dimension(e.record.m0, e.record.s, holes)
    return total
