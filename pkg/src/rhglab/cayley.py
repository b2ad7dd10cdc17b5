"""Finite balls of Cayley graphs and exact graph-metric primitives.

The ball is built breadth-first; vertices are indexed level by level and
sorted inside each level by the canonical element order, so vertex index
order *is* the shortlex order.  Distances computed inside the ball are upper
bounds on true Cayley distances near the boundary shell; consumers work over
a trust radius ``radius - margin`` and the truncation-soundness guarantee is
exact for pairs u, v with ``dist0(u) + dist0(v) <= radius``.
"""

from __future__ import annotations

import threading
from collections import OrderedDict, deque
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import dijkstra

from .groups import Element, Group

#: hard cap under which dense all-pairs tables may be materialized
ALLPAIRS_CAP = 4000

DEFAULT_VERTEX_BUDGET = 500_000


class BallBudgetError(RuntimeError):
    """Ball construction exceeded the configured vertex budget."""


class BallInputError(ValueError):
    """Vertex or set argument outside the ball."""


class CayleyBall:
    """Radius-R ball of a Cayley graph with cached BFS machinery.

    Immutable after construction; the distance-row cache is the only mutable
    state and is guarded for concurrent readers by the GIL plus idempotent
    writes (recomputing a row yields identical data).
    """

    def __init__(self, group: Group, radius: int, vertices: list[Element],
                 dist0: np.ndarray, rows: np.ndarray, cols: np.ndarray,
                 labels: np.ndarray, truncated: np.ndarray):
        self.group = group
        self.radius = radius
        self.vertices = vertices
        self.dist0 = dist0
        self.truncated = truncated
        self._index = {v.form: i for i, v in enumerate(vertices)}
        self._rows = rows
        self._cols = cols
        self._edge_labels = labels
        n = len(vertices)
        self._csr = sp.csr_matrix(
            (np.ones(len(rows), dtype=np.float64), (rows, cols)), shape=(n, n)
        )
        order = np.argsort(rows, kind="stable")
        self._nbr_sorted = cols[order]
        self._nbr_ptr = np.searchsorted(rows[order], np.arange(n + 1))
        self._nbr_lab = labels[order]
        self._dist_cache: OrderedDict[int, np.ndarray] = OrderedDict()
        self._dist_cache_cap = max(16, 4_000_000 // max(n, 1))
        self._lock = threading.Lock()
        self._pairs: Optional[np.ndarray] = None

    # -- basics --------------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self._rows) // 2

    def index_of(self, g: Element) -> int:
        try:
            return self._index[g.form]
        except KeyError:
            raise BallInputError(
                f"element {self.group.render(g)} outside radius-{self.radius} ball"
            ) from None

    def contains(self, g: Element) -> bool:
        return g.form in self._index

    def _check(self, *vs: int) -> None:
        for v in vs:
            if not 0 <= v < self.n:
                raise BallInputError(f"vertex index {v} outside ball")

    def neighbors(self, v: int) -> np.ndarray:
        return self._nbr_sorted[self._nbr_ptr[v]:self._nbr_ptr[v + 1]]

    def neighbor_labels(self, v: int) -> np.ndarray:
        return self._nbr_lab[self._nbr_ptr[v]:self._nbr_ptr[v + 1]]

    def are_adjacent(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        return bool(np.any(nb == v))

    def csr(self) -> sp.csr_matrix:
        return self._csr

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Directed edge triples (u, v, letter-code), both orientations."""
        return self._rows, self._cols, self._edge_labels

    def trusted_indices(self, margin: int) -> np.ndarray:
        return np.nonzero(self.dist0 <= self.radius - margin)[0]

    # -- distances -----------------------------------------------------------

    def dist_from(self, v: int) -> np.ndarray:
        """Single-source BFS distance row (int32), cached with LRU eviction."""
        self._check(v)
        with self._lock:
            row = self._dist_cache.get(v)
            if row is not None:
                self._dist_cache.move_to_end(v)
                return row
        d = dijkstra(self._csr, indices=v, unweighted=True)
        row = np.where(np.isinf(d), -1, d).astype(np.int32)
        with self._lock:
            self._dist_cache[v] = row
            if len(self._dist_cache) > self._dist_cache_cap:
                self._dist_cache.popitem(last=False)
        return row

    def dist_multi(self, sources: Sequence[int]) -> np.ndarray:
        """Distance to the nearest of several sources (multi-source BFS)."""
        src = np.asarray(sources, dtype=np.int64)
        if src.size == 0:
            raise BallInputError("empty source set")
        self._check(int(src.min()), int(src.max()))
        d = dijkstra(self._csr, indices=src, unweighted=True, min_only=True)
        return np.where(np.isinf(d), -1, d).astype(np.int32)

    def dist_rows(self, sources: Sequence[int]) -> np.ndarray:
        """Stacked BFS rows for many sources (not cached; int16)."""
        src = np.asarray(sources, dtype=np.int64)
        d = dijkstra(self._csr, indices=src, unweighted=True)
        return np.where(np.isinf(d), -1, d).astype(np.int16)

    def graph_distance(self, u: int, v: int) -> int:
        self._check(u, v)
        return int(self.dist_from(u)[v])

    def pairs_matrix(self) -> np.ndarray:
        """Dense all-pairs distance table; refused above ALLPAIRS_CAP vertices."""
        if self.n > ALLPAIRS_CAP:
            raise BallBudgetError(
                f"all-pairs table for {self.n} vertices exceeds cap {ALLPAIRS_CAP}"
            )
        with self._lock:
            pairs = self._pairs
        if pairs is None:
            blocks = []
            for start in range(0, self.n, 512):
                idx = np.arange(start, min(start + 512, self.n))
                blocks.append(self.dist_rows(idx))
            pairs = np.vstack(blocks)
            with self._lock:
                self._pairs = pairs
        return pairs

    def local_distances(self, source: int, maxdepth: int) -> dict[int, int]:
        """Pure-Python truncated BFS; cheap when maxdepth is small."""
        self._check(source)
        dist = {source: 0}
        frontier = [source]
        for d in range(1, maxdepth + 1):
            nxt = []
            for u in frontier:
                for w in self.neighbors(u):
                    w = int(w)
                    if w not in dist:
                        dist[w] = d
                        nxt.append(w)
            if not nxt:
                break
            frontier = nxt
        return dist

    # -- geodesic machinery ----------------------------------------------------

    def on_geodesic(self, x: int, w: int, y: int) -> bool:
        self._check(x, w, y)
        dx = self.dist_from(x)
        return int(dx[w]) + self.graph_distance(w, y) == int(dx[y])

    def lex_geodesic(self, x: int, y: int) -> list[int]:
        """Geodesic choosing the least next vertex among distance-decreasing
        neighbors; vertex index order is the shortlex element order, so this
        is deterministic and replayable."""
        self._check(x, y)
        dy = self.dist_from(y)
        path = [x]
        cur = x
        while cur != y:
            nb = self.neighbors(cur)
            cand = nb[dy[nb] == dy[cur] - 1]
            cur = int(cand.min())
            path.append(cur)
        return path

    def neighborhood(self, S: Sequence[int], r: int) -> np.ndarray:
        """Indices at graph distance <= r from S, inside the ball."""
        if r < 0:
            raise BallInputError("negative neighborhood radius")
        S = np.asarray(S, dtype=np.int64)
        if S.size == 0:
            return S
        if r == 0:
            return np.unique(S)
        d = self.dist_multi(S)
        return np.nonzero((d >= 0) & (d <= r))[0]

    # -- dumps ----------------------------------------------------------------

    def vertex_rows(self) -> Iterator[tuple[int, str, int]]:
        for i, v in enumerate(self.vertices):
            yield i, self.group.render(v), int(self.dist0[i])

    def edge_rows(self) -> Iterator[tuple[int, int, str]]:
        for u, v, lab in zip(self._rows, self._cols, self._edge_labels):
            if u < v:
                yield int(u), int(v), self.group.letter_names[int(lab)]

    def __repr__(self):
        return f"CayleyBall(radius={self.radius}, n={self.n})"


def build_ball(group: Group, radius: int,
               max_vertices: int = DEFAULT_VERTEX_BUDGET) -> CayleyBall:
    """BFS-complete ball of the Cayley graph with deterministic indexing."""
    if radius < 0:
        raise BallInputError("radius must be nonnegative")
    spec = group.spec
    letters = [(code, el.form) for code, el in enumerate(group.generators)]

    from .groups import _lex_word, _mul  # normal-form kernel

    identity = group.identity.form
    index: dict = {identity: 0}
    vertices = [identity]
    dist0 = [0]
    level = [identity]
    for r in range(1, radius + 1):
        staged: set = set()
        for f in level:
            for _, lf in letters:
                h = _mul(spec, f, lf)
                if h not in index and h not in staged:
                    staged.add(h)
        if len(vertices) + len(staged) > max_vertices:
            raise BallBudgetError(
                f"ball of radius {r} needs more than the "
                f"vertex budget of {max_vertices} vertices"
            )
        level = sorted(staged, key=lambda f: _lex_word(spec, f))
        for f in level:
            index[f] = len(vertices)
            vertices.append(f)
            dist0.append(r)

    n = len(vertices)
    rows, cols, labs = [], [], []
    truncated = np.zeros(n, dtype=bool)
    for i, f in enumerate(vertices):
        for code, lf in letters:
            h = _mul(spec, f, lf)
            j = index.get(h)
            if j is None:
                truncated[i] = True
            else:
                rows.append(i)
                cols.append(j)
                labs.append(code)
    elements = [Element(group, f) for f in vertices]
    return CayleyBall(
        group, radius, elements,
        np.asarray(dist0, dtype=np.int32),
        np.asarray(rows, dtype=np.int64),
        np.asarray(cols, dtype=np.int64),
        np.asarray(labs, dtype=np.int32),
        truncated,
    )


def graph_distance(ball: CayleyBall, u: int, v: int) -> int:
    return ball.graph_distance(u, v)


def on_geodesic(ball: CayleyBall, x: int, w: int, y: int) -> bool:
    return ball.on_geodesic(x, w, y)


def lex_geodesic(ball: CayleyBall, x: int, y: int) -> list[int]:
    return ball.lex_geodesic(x, y)


def neighborhood(ball: CayleyBall, S: Sequence[int], r: int) -> np.ndarray:
    return ball.neighborhood(S, r)


def subgroup_orbit(ball: CayleyBall, generators: Iterable[Element],
                   base: Optional[int] = None) -> np.ndarray:
    """Orbit of a vertex under a subgroup, explored inside the ball.

    Elements of the orbit reachable only through vertices outside the ball are
    missed; this is the standard desk-scale truncation and is harmless for the
    undistorted subgroups in the scenario library.
    """
    group = ball.group
    start = ball.vertices[base] if base is not None else group.identity
    start_idx = ball.index_of(start)
    gen_forms = [g.form for g in generators]
    from .groups import _mul

    seen = {start_idx}
    queue = deque([start.form])
    while queue:
        f = queue.popleft()
        for gf in gen_forms:
            h = _mul(group.spec, f, gf)
            j = ball._index.get(h)
            if j is not None and j not in seen:
                seen.add(j)
                queue.append(h)
    return np.asarray(sorted(seen), dtype=np.int64)


def translate_set(ball: CayleyBall, h: Element, S: Sequence[int]) -> np.ndarray:
    """Indices of ``h . S`` that land inside the ball."""
    from .groups import _mul

    out = []
    for i in S:
        f = _mul(ball.group.spec, h.form, ball.vertices[int(i)].form)
        j = ball._index.get(f)
        if j is not None:
            out.append(j)
    return np.asarray(sorted(out), dtype=np.int64)
