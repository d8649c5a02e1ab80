"""Combinatorics of the Sierpinski gasket graph approximations.

Points are stored with exact dyadic coordinates in the reference triangle
``p0 = (0, 0)``, ``p1 = (1, 0)``, ``p2 = (0, 1)``.  Only the combinatorics
matter, so a right triangle is as good as an equilateral one and keeps every
coordinate of ``V_m`` on the grid ``2**-m``.

Cells are addressed by words over ``{0, 1, 2}``; the empty word is the whole
gasket and serializes as ``"."``.  At level ``m`` the cell with word ``w`` has
index ``int(w, 3)``, so the children of cell ``c`` are ``3c, 3c+1, 3c+2``.
Edge ``3c + j`` is the edge of cell ``c`` opposite its corner ``j``, oriented
from corner ``j-1`` to corner ``j+1`` (indices mod 3).
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple

import numpy as np

MAX_LEVEL = 8


class TopologyError(ValueError):
    pass


class Vertex(NamedTuple):
    x: Fraction
    y: Fraction

    @property
    def level(self) -> int:
        """Level of first appearance, i.e. the smallest m with self in V_m."""
        d = max(self.x.denominator, self.y.denominator)
        return d.bit_length() - 1

    def __repr__(self):
        return f"Vertex({self.x}, {self.y})"


_HALF = Fraction(1, 2)
CORNERS = (
    Vertex(Fraction(0), Fraction(0)),
    Vertex(Fraction(1), Fraction(0)),
    Vertex(Fraction(0), Fraction(1)),
)


def _mid(a: Vertex, b: Vertex) -> Vertex:
    return Vertex((a.x + b.x) * _HALF, (a.y + b.y) * _HALF)


def normalize_word(word) -> str:
    """Accept ``"."``, ``""`` or a string/sequence over {0,1,2}."""
    if word is None:
        return ""
    if not isinstance(word, str):
        word = "".join(str(int(c)) for c in word)
    if word == ".":
        return ""
    bad = set(word) - set("012")
    if bad:
        raise TopologyError(f"invalid cell word {word!r}")
    return word


def format_word(word) -> str:
    word = normalize_word(word)
    return word if word else "."


def contract(word, point: Vertex) -> Vertex:
    """Apply F_w = F_{w1} o ... o F_{wm} to a point."""
    for letter in reversed(normalize_word(word)):
        p = CORNERS[int(letter)]
        point = Vertex((point.x + p.x) * _HALF, (point.y + p.y) * _HALF)
    return point


def cell_corners(word) -> tuple[Vertex, Vertex, Vertex]:
    return _cell_corners(normalize_word(word))


@lru_cache(maxsize=65536)
def _cell_corners(word: str):
    return tuple(contract(word, p) for p in CORNERS)


def word_index(word) -> int:
    word = normalize_word(word)
    return int(word, 3) if word else 0


def index_word(index: int, level: int) -> str:
    digits = []
    for _ in range(level):
        index, r = divmod(index, 3)
        digits.append(str(r))
    return "".join(reversed(digits))


def check_level(m: int) -> int:
    m = int(m)
    if m < 0:
        raise TopologyError("level must be non-negative")
    if m > MAX_LEVEL:
        raise TopologyError(f"level {m} exceeds the configured cap {MAX_LEVEL}")
    return m


class GasketGraph:
    """The level-m graph approximation with cell bookkeeping.

    Vertex ordering is nested: the first ``|V_{m-1}|`` vertices of level m
    are exactly the vertices of level m-1 in the same order.  In particular
    ``V_0`` always occupies indices 0, 1, 2.
    """

    def __init__(self, level, vertices, cells, parent_midpoints=None):
        self.level = level
        self.vertices = tuple(vertices)
        self.index = {v: i for i, v in enumerate(self.vertices)}
        self.cells = cells
        self.cells.setflags(write=False)
        # midpoint opposite corner k of each level-(m-1) cell
        self.parent_midpoints = parent_midpoints
        nc = len(cells)
        j = np.arange(3)
        tail = cells[:, (j - 1) % 3].reshape(-1)
        head = cells[:, (j + 1) % 3].reshape(-1)
        self.edges = np.stack([tail, head], axis=1)
        self.edges.setflags(write=False)
        self.edge_cell = np.repeat(np.arange(nc), 3)
        self.edge_type = np.tile(j, nc)
        self._lookup = None

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    @property
    def interior(self) -> np.ndarray:
        return np.arange(3, self.n_vertices)

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.reshape(-1), minlength=self.n_vertices)

    def edge_lookup(self) -> dict:
        """Map an ordered vertex pair (x, y) to (edge index, sign)."""
        if self._lookup is None:
            lut = {}
            for e, (x, y) in enumerate(self.edges.tolist()):
                lut[(x, y)] = (e, 1.0)
                lut[(y, x)] = (e, -1.0)
            self._lookup = lut
        return self._lookup

    def incidence(self):
        """Sparse edges x vertices matrix D with (D f)[e] = f(head) - f(tail)."""
        import scipy.sparse as sp

        ne = self.n_edges
        rows = np.repeat(np.arange(ne), 2)
        cols = self.edges[:, ::-1].reshape(-1)
        vals = np.tile([1.0, -1.0], ne)
        return sp.csr_matrix((vals, (rows, cols)), shape=(ne, self.n_vertices))

    def cell_range(self, word) -> range:
        """Indices of the level-m cells contained in F_w(SG)."""
        word = normalize_word(word)
        k = len(word)
        if k > self.level:
            raise TopologyError(f"cell {format_word(word)} is finer than level {self.level}")
        span = 3 ** (self.level - k)
        start = word_index(word) * span
        return range(start, start + span)

    def cell_vertices(self, word) -> np.ndarray:
        """Sorted indices of V_m ∩ F_w(SG)."""
        r = self.cell_range(word)
        return np.unique(self.cells[r.start:r.stop])

    def __repr__(self):
        return f"GasketGraph(level={self.level}, |V|={self.n_vertices}, |E|={self.n_edges})"


@lru_cache(maxsize=None)
def gasket(m: int) -> GasketGraph:
    """Return the (cached, immutable) level-m graph."""
    m = check_level(m)
    if m == 0:
        return GasketGraph(0, CORNERS, np.array([[0, 1, 2]]))
    prev = gasket(m - 1)
    vertices = list(prev.vertices)
    index = dict(prev.index)
    pcells = prev.cells
    mids = np.empty_like(pcells)
    for c, corners in enumerate(pcells.tolist()):
        for k in range(3):
            v = _mid(vertices[corners[(k + 1) % 3]], vertices[corners[(k + 2) % 3]])
            i = index.get(v)
            if i is None:
                i = index[v] = len(vertices)
                vertices.append(v)
            mids[c, k] = i
    cells = np.empty((3 * len(pcells), 3), dtype=int)
    for j in range(3):
        for i in range(3):
            if i == j:
                cells[j::3, i] = pcells[:, j]
            else:
                cells[j::3, i] = mids[:, 3 - i - j]
    return GasketGraph(m, vertices, cells, mids)


def vertex_set(m: int) -> tuple[Vertex, ...]:
    return gasket(m).vertices


def vertex_count(m: int) -> int:
    return (3 ** (m + 1) + 3) // 2


def edge_list(m: int) -> list[tuple[Vertex, Vertex, str, int]]:
    """Edges of level m as ``(x, y, cell word, corner type j)``.

    ``x = F_w(p_{j-1})`` and ``y = F_w(p_{j+1})``.
    """
    g = gasket(m)
    V = g.vertices
    return [
        (V[x], V[y], index_word(int(c), m), int(j))
        for (x, y), c, j in zip(g.edges.tolist(), g.edge_cell, g.edge_type)
    ]


def hole_count(m: int) -> int:
    """Number of holes visible at level m."""
    return (3 ** m - 1) // 2


def holes(m: int) -> list[str]:
    """All hole addresses visible at level m (words of length < m)."""
    out = []
    for k in range(m):
        out.extend(index_word(i, k) for i in range(3 ** k))
    return out


def hole_boundary_loop(hole, m: int) -> list[int]:
    """Counterclockwise cycle of level-m vertex indices around a hole.

    The hole of ``F_h(SG)`` is bounded by the inner triangle whose corners
    are the midpoints of the cell's sides.  The cycle starts at the midpoint
    of the side joining corners 0 and 1 and is not closed (the last vertex
    is adjacent to the first).
    """
    hole = normalize_word(hole)
    if m < len(hole) + 1:
        raise TopologyError(f"hole not resolved at this level: {format_word(hole)} needs m >= {len(hole) + 1}")
    g = gasket(m)
    c0, c1, c2 = cell_corners(hole)
    # p0 -> p1 -> p2 is counterclockwise and F_w preserves orientation
    tri = [_mid(c0, c1), _mid(c1, c2), _mid(c2, c0)]
    n = 2 ** (m - len(hole) - 1)
    loop = []
    for a, b in zip(tri, tri[1:] + tri[:1]):
        for t in range(n):
            s = Fraction(t, n)
            v = Vertex(a.x + s * (b.x - a.x), a.y + s * (b.y - a.y))
            loop.append(g.index[v])
    return loop


# ---------------------------------------------------------------------------
# cell chains


def _corner_of(word: str, point: Vertex) -> int:
    corners = cell_corners(word)
    for j, c in enumerate(corners):
        if c == point:
            return j
    raise TopologyError(f"{point} is not a corner of cell {format_word(word)}")


def _straight(k: int, p: int, q: int) -> tuple[str, ...]:
    """The 2**k cells along the side from corner p to corner q."""
    if k == 0:
        return ("",)
    return tuple(str(p) + w for w in _straight(k - 1, p, q)) + tuple(
        str(q) + w for w in _straight(k - 1, p, q)
    )


@lru_cache(maxsize=None)
def chain_family(k: int, p: int, q: int) -> tuple[tuple[str, ...], ...]:
    """A canonical family of k-cell chains from corner p to corner q.

    The family is defined top-down: a chain either crosses directly from
    F_p to F_q, varying inside one of the two cells while running straight
    in the other, or detours through F_r running straight in F_p and F_q.
    It has (3**k + 1) / 2 members.
    """
    if k == 0:
        return (("",),)
    r = 3 - p - q
    P, Q, R = str(p), str(q), str(r)

    def lift(letter, chain):
        return tuple(letter + w for w in chain)

    inner = chain_family(k - 1, p, q)
    sp = lift(P, _straight(k - 1, p, q))
    sq = lift(Q, _straight(k - 1, p, q))
    out = [lift(P, g) + sq for g in inner]
    out += [sp + lift(Q, g) for g in inner if g != _straight(k - 1, p, q)]
    sp_r = lift(P, _straight(k - 1, p, r))
    sq_r = lift(Q, _straight(k - 1, r, q))
    out += [sp_r + lift(R, g) + sq_r for g in inner]
    return tuple(out)


def chain_junctions(chain, start: Vertex, end: Vertex) -> list[Vertex]:
    """Points x_0 = start, x_1, ..., x_K = end where consecutive cells meet."""
    pts = [start]
    for a, b in zip(chain, chain[1:]):
        common = set(cell_corners(a)) & set(cell_corners(b))
        if len(common) != 1:
            raise TopologyError(f"cells {a} and {b} do not meet in one point")
        pts.append(common.pop())
    pts.append(end)
    return pts


def refine_chain(chain, start: Vertex, end: Vertex) -> tuple[str, ...]:
    """Map a chain of k-cells to the simple chain of (k+1)-cells.

    Inside each cell the two children forming the shortest path from the
    entry point to the exit point are kept.
    """
    pts = chain_junctions(chain, start, end)
    out = []
    for w, a, b in zip(chain, pts, pts[1:]):
        out.append(w + str(_corner_of(w, a)))
        out.append(w + str(_corner_of(w, b)))
    return tuple(out)


def _v0_index(p) -> int:
    if isinstance(p, Vertex):
        if p not in CORNERS:
            raise TopologyError(f"{p} is not a point of V_0")
        return CORNERS.index(p)
    p = int(p)
    if p not in (0, 1, 2):
        raise TopologyError(f"{p} is not a point of V_0")
    return p


def simple_chains(m: int, p, q) -> list[tuple[str, ...]]:
    """Simple m-cell chains from p to q (both in V_0) spanning the 5-series.

    Built by refining the (m-1)-chains of :func:`chain_family`, giving
    (3**(m-1) + 1) / 2 chains.
    """
    p, q = _v0_index(p), _v0_index(q)
    if p == q:
        raise TopologyError("chain endpoints must be distinct")
    if m < 1:
        raise TopologyError("simple chains need m >= 1")
    start, end = CORNERS[p], CORNERS[q]
    return [refine_chain(c, start, end) for c in chain_family(m - 1, p, q)]


def is_simple_chain(chain, start: Vertex, end: Vertex) -> bool:
    corners = [set(cell_corners(w)) for w in chain]
    if start not in corners[0] or end not in corners[-1]:
        return False
    if len(set(chain)) != len(chain):
        return False
    for i in range(len(chain)):
        for j in range(i + 1, len(chain)):
            meet = corners[i] & corners[j]
            if j == i + 1:
                if len(meet) != 1:
                    return False
            elif meet:
                return False
    try:
        pts = chain_junctions(chain, start, end)
    except TopologyError:
        return False
    return len(set(pts[1:-1])) == len(pts) - 2
