"""Distortion certificates for paths, geodesic hulls and constrained search.

A path of combinatorial length L is alpha-distorted when every subinterval
[i, j] satisfies j - i <= alpha(d(gamma_i, gamma_j)).  The check is exhaustive
over the O(L^2) subintervals with a deterministic first witness.

The full distorted-path hull is not enumerable; ``alpha_hull_approx`` uses the
two-geodesic concatenation through each candidate vertex and is a certified
under-approximation: every included vertex carries an explicit witness path
that re-verifies as alpha-distorted, and the result always contains the exact
geodesic hull.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .cayley import ALLPAIRS_CAP, BallInputError, CayleyBall
from .floyd import DistortionFunction


class PathError(ValueError):
    """Input is not a path in the ball."""


@dataclass(frozen=True)
class PathRecord:
    """Vertex sequence with consecutive vertices adjacent in the ball."""

    vertices: tuple[int, ...]

    def __post_init__(self):
        if not self.vertices:
            raise PathError("a path needs at least one vertex")

    @property
    def length(self) -> int:
        return len(self.vertices) - 1

    @property
    def endpoints(self) -> tuple[int, int]:
        return self.vertices[0], self.vertices[-1]


def path_in_ball(ball: CayleyBall, vertices: Sequence[int]) -> PathRecord:
    rec = PathRecord(tuple(int(v) for v in vertices))
    for u, v in zip(rec.vertices, rec.vertices[1:]):
        if not ball.are_adjacent(u, v):
            raise PathError(f"consecutive vertices {u}, {v} are not adjacent")
    return rec


@dataclass(frozen=True)
class DistortionCertificate:
    passed: bool
    witness: Optional[tuple[int, int]] = None       # (j-, j+) indices
    witness_diam: Optional[int] = None              # j+ - j-
    witness_endpoint_dist: Optional[int] = None     # d(gamma(j-), gamma(j+))

    def __bool__(self) -> bool:
        return self.passed


def _pairwise_dists(ball: CayleyBall, verts: tuple[int, ...]) -> np.ndarray:
    """Distance table among path vertices, via the dense table when the ball
    is small and truncated BFS otherwise (d(v_i, v_j) <= j - i <= L)."""
    L = len(verts) - 1
    if ball.n <= ALLPAIRS_CAP:
        M = ball.pairs_matrix()
        idx = np.asarray(verts)
        return M[np.ix_(idx, idx)].astype(np.int64)
    out = np.zeros((len(verts), len(verts)), dtype=np.int64)
    for i, v in enumerate(verts):
        local = ball.local_distances(v, L)
        for j, w in enumerate(verts):
            out[i, j] = local.get(w, L + 1)  # farther than any subinterval needs
    return out


def is_alpha_distorted(ball: CayleyBall, path: PathRecord,
                       alpha: DistortionFunction,
                       dmatrix: Optional[np.ndarray] = None,
                       ) -> DistortionCertificate:
    """Exhaustive subinterval check with lexicographically least witness."""
    verts = path.vertices
    L = len(verts) - 1
    if L == 0:
        return DistortionCertificate(True)
    for u, v in zip(verts, verts[1:]):
        if not ball.are_adjacent(u, v):
            raise PathError(f"not a path: {u}, {v} not adjacent")
    if dmatrix is not None:
        idx = np.asarray(verts)
        D = dmatrix[np.ix_(idx, idx)].astype(np.int64)
    else:
        D = _pairwise_dists(ball, verts)
    allowed = alpha.allowed_lengths(int(D.max()))
    for i in range(L):
        for j in range(i + 1, L + 1):
            if j - i > allowed[D[i, j]]:
                return DistortionCertificate(
                    False, (i, j), j - i, int(D[i, j])
                )
    return DistortionCertificate(True)


# ---------------------------------------------------------------------------
# Hulls


def id_hull(ball: CayleyBall, F: Sequence[int]) -> np.ndarray:
    """Exact geodesic hull: vertices on some geodesic between members of F."""
    F = np.unique(np.asarray(F, dtype=np.int64))
    if F.size == 0:
        return F
    rows = {int(x): ball.dist_from(int(x)).astype(np.int64) for x in F}
    hull = np.zeros(ball.n, dtype=bool)
    members = [int(x) for x in F]
    for ai, x in enumerate(members):
        dx = rows[x]
        for y in members[ai:]:
            dy = rows[y]
            hull |= dx + dy == dx[y]
    return np.nonzero(hull)[0]


@dataclass
class ApproxHull:
    """Two-geodesic under-approximation of the distorted-path hull.

    ``witnesses[w] = (x, y)`` records the endpoints of the certified witness
    path ``lex_geodesic(x, w) + lex_geodesic(w, y)`` for each included vertex.
    """

    indices: np.ndarray
    witnesses: dict[int, tuple[int, int]] = field(default_factory=dict)
    tag: str = "sound-subset"

    def witness_path(self, ball: CayleyBall, w: int) -> PathRecord:
        x, y = self.witnesses[w]
        first = ball.lex_geodesic(x, w)
        second = ball.lex_geodesic(w, y)
        return PathRecord(tuple(first + second[1:]))


def alpha_hull_approx(ball: CayleyBall, F: Sequence[int],
                      alpha: DistortionFunction,
                      candidates: Optional[Sequence[int]] = None) -> ApproxHull:
    """Vertices w whose two-geodesic path x -> w -> y (x, y in F) certifies.

    A geodesic concatenation fails alpha-distortion only on subintervals that
    straddle the middle vertex, so only cross pairs are tested.  The result
    contains ``id_hull(F)`` (there the concatenation is itself a geodesic).
    """
    F = np.unique(np.asarray(F, dtype=np.int64))
    if F.size == 0:
        return ApproxHull(F)
    M = ball.pairs_matrix()
    base = id_hull(ball, F)
    cand = np.arange(ball.n) if candidates is None else np.unique(
        np.asarray(candidates, dtype=np.int64))
    witnesses: dict[int, tuple[int, int]] = {}
    in_base = np.zeros(ball.n, dtype=bool)
    in_base[base] = True
    pairs = [(int(x), int(y)) for i, x in enumerate(F) for y in F[i:]]
    maxd = int(M.max())
    allowed = alpha.allowed_lengths(maxd)
    hull_mask = in_base.copy()
    for w in cand:
        w = int(w)
        if hull_mask[w]:
            if w not in witnesses:
                # on a geodesic between some pair; record the first such pair
                for x, y in pairs:
                    if M[x, w] + M[w, y] == M[x, y]:
                        witnesses[w] = (x, y)
                        break
            continue
        for x, y in pairs:
            seg1 = ball.lex_geodesic(x, w)
            seg2 = ball.lex_geodesic(w, y)
            L1 = len(seg1) - 1
            a = np.asarray(seg1)
            b = np.asarray(seg2)
            D = M[np.ix_(a, b)].astype(np.int64)
            # interval [i, L1 + j] has combinatorial length (L1 - i) + j
            lens = (L1 - np.arange(L1 + 1))[:, None] + np.arange(len(seg2))[None, :]
            if not np.any(lens > allowed[D]):
                hull_mask[w] = True
                witnesses[w] = (x, y)
                break
    idx = np.nonzero(hull_mask)[0]
    return ApproxHull(idx, witnesses)


def constrained_alpha_path(ball: CayleyBall, x: int, y: int,
                           allowed: Sequence[int],
                           alpha: DistortionFunction) -> Optional[PathRecord]:
    """Certified shortest path inside the induced subgraph on ``allowed``.

    Returns None when no path exists in the subgraph or the shortest one does
    not certify; absence is *not* a proof that no alpha-distorted path exists.
    """
    allowed_set = set(int(v) for v in allowed)
    if x not in allowed_set or y not in allowed_set:
        raise BallInputError("endpoints must lie in the allowed set")
    # BFS from y inside the subgraph
    dist = {y: 0}
    frontier = [y]
    while frontier and x not in dist:
        nxt = []
        for u in frontier:
            for w in ball.neighbors(u):
                w = int(w)
                if w in allowed_set and w not in dist:
                    dist[w] = dist[u] + 1
                    nxt.append(w)
        frontier = nxt
    if x not in dist:
        return None
    path = [x]
    cur = x
    while cur != y:
        step = None
        for w in sorted(int(v) for v in ball.neighbors(cur)):
            if w in allowed_set and dist.get(w, -1) == dist[cur] - 1:
                step = w
                break
        cur = step
        path.append(cur)
    rec = PathRecord(tuple(path))
    cert = is_alpha_distorted(ball, rec, alpha)
    return rec if cert.passed else None
