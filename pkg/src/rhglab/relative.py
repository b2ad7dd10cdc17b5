"""Horosphere systems over peripheral cosets and the coned-off relative graph.

Horospheres are realized as the peripheral cosets meeting the ball (optionally
thickened by a radius r), with deterministic coset ids given by the unique
shortest coset representative.  The relative graph adds a length-1 clique on
each horosphere; pairs that are already joined by a Cayley edge keep that edge
and no cone duplicate is added (both have length 1, and lifts prefer plain
edges anyway).
"""

from __future__ import annotations

import heapq
import threading
from collections import OrderedDict
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import dijkstra

from .cayley import ALLPAIRS_CAP, BallBudgetError, BallInputError, CayleyBall
from .floyd import ContractError, DistortionFunction
from .groups import GroupError, PeripheralSpec
from .paths import PathRecord, is_alpha_distorted


@dataclass
class Horosphere:
    coset_id: str
    leaf_index: int
    rep_index: int                 # ball index of the shortest representative
    core: np.ndarray               # coset members before thickening
    members: np.ndarray            # after thickening


class HorosphereSystem:
    """All peripheral cosets meeting the ball, thickened by ``r``."""

    def __init__(self, ball: CayleyBall, entries: list[Horosphere], thickening: int):
        self.ball = ball
        self.entries = entries
        self.thickening = thickening
        self.by_id = {h.coset_id: i for i, h in enumerate(entries)}
        membership: list[list[int]] = [[] for _ in range(ball.n)]
        for i, h in enumerate(entries):
            for v in h.members:
                membership[int(v)].append(i)
        self.vertex_membership = membership
        self._ns_masks: dict[tuple[int, int], np.ndarray] = {}

    @property
    def is_empty(self) -> bool:
        return not self.entries

    def max_per_vertex(self) -> int:
        if not self.entries:
            return 0
        return max(len(m) for m in self.vertex_membership)

    def mask_within(self, entry_idx: int, s: int) -> np.ndarray:
        """Boolean mask of N_s(S_p) for the given entry, cached."""
        key = (entry_idx, s)
        m = self._ns_masks.get(key)
        if m is None:
            members = self.entries[entry_idx].members
            if s == 0:
                idx = members
            else:
                idx = self.ball.neighborhood(members, s)
            m = np.zeros(self.ball.n, dtype=bool)
            m[idx] = True
            self._ns_masks[key] = m
        return m

    def entries_with_trusted_rep(self, max_rep_norm: Optional[int]) -> list[int]:
        if max_rep_norm is None:
            return list(range(len(self.entries)))
        d0 = self.ball.dist0
        return [
            i for i, h in enumerate(self.entries)
            if int(d0[h.rep_index]) <= max_rep_norm
        ]


def build_horospheres(ball: CayleyBall, peripheral: PeripheralSpec,
                      thickening: int = 0) -> HorosphereSystem:
    """One entry per peripheral coset meeting the ball, deterministically ordered."""
    group = ball.group
    peripheral.validate(group)
    for li in peripheral.leaf_indices:
        from .groups import FreeProductSpec

        if not isinstance(group.spec, FreeProductSpec):
            raise GroupError(
                "peripheral structure needs a free-product group "
                f"(leaf {li} is the whole group)"
            )
    if thickening < 0:
        raise BallInputError("thickening must be nonnegative")
    buckets: dict[tuple[int, int], list[int]] = {}
    for v in range(ball.n):
        el = ball.vertices[v]
        for li in peripheral.leaf_indices:
            rep = group.strip_trailing_factor(el, li)
            rep_idx = ball.index_of(rep)  # rep is a prefix of v, so in the ball
            buckets.setdefault((li, rep_idx), []).append(v)
    keys = sorted(buckets, key=lambda k: (k[0], k[1]))  # index order is shortlex
    entries = []
    for li, rep_idx in keys:
        core = np.asarray(sorted(buckets[(li, rep_idx)]), dtype=np.int64)
        members = ball.neighborhood(core, thickening) if thickening else core
        cid = f"{li}:{group.render(ball.vertices[rep_idx])}"
        entries.append(Horosphere(cid, li, rep_idx, core, members))
    return HorosphereSystem(ball, entries, thickening)


# ---------------------------------------------------------------------------
# Horosphere geometry report


@dataclass
class HorosphereStats:
    n_cosets: int
    max_per_vertex: int
    max_intersection_diam: int
    max_projection_diam: int
    rep_norm_cap: Optional[int]


def horosphere_stats(system: HorosphereSystem,
                     rep_norm_cap: Optional[int] = None) -> HorosphereStats:
    """Pairwise intersection and projection maxima over coset pairs.

    Tie sets are read off batched BFS rows from the members of the considered
    cosets; the optional cap on representative length keeps boundary-shell
    coset fragments out of large-ball runs.
    """
    ball = system.ball
    idxs = system.entries_with_trusted_rep(rep_norm_cap)
    if len(idxs) == 0:
        return HorosphereStats(0, system.max_per_vertex(), 0, 0, rep_norm_cap)
    entries = [system.entries[i] for i in idxs]
    if len(idxs) == 1:
        return HorosphereStats(1, system.max_per_vertex(), 0, 0, rep_norm_cap)

    sources = np.unique(np.concatenate([h.members for h in entries]))
    src_pos = {int(v): i for i, v in enumerate(sources)}
    rows = _chunked_rows(ball, sources)

    # nearest-distance array per coset, for tie detection
    dmins = [ball.dist_multi(h.members) for h in entries]
    member_sets = [set(int(v) for v in h.members) for h in entries]

    max_inter = 0
    max_proj = 0
    for pi, hp in enumerate(entries):
        Ep = hp.members
        sub = rows[:, Ep].astype(np.int64)          # sources x |S_p|
        dp = dmins[pi][sources].astype(np.int64)
        ties = sub == dp[:, None]                   # tie mask per source row
        for qi, hq in enumerate(entries):
            if qi == pi:
                continue
            inter = member_sets[pi] & member_sets[qi]
            if len(inter) > 1 and qi > pi:
                d = _diam_from_rows(rows, src_pos, sorted(inter))
                max_inter = max(max_inter, d)
            qrows = [src_pos[int(b)] for b in hq.members]
            union_mask = ties[qrows].any(axis=0)
            members = Ep[union_mask]
            if members.size > 1:
                d = _diam_from_rows(rows, src_pos, [int(v) for v in members])
                max_proj = max(max_proj, d)
    return HorosphereStats(
        len(entries), system.max_per_vertex(), max_inter, max_proj, rep_norm_cap
    )


def _chunked_rows(ball: CayleyBall, sources: np.ndarray) -> np.ndarray:
    blocks = []
    for start in range(0, sources.size, 512):
        blocks.append(ball.dist_rows(sources[start:start + 512]))
    return np.vstack(blocks)


def _diam_from_rows(rows: np.ndarray, src_pos: dict[int, int],
                    members: Sequence[int]) -> int:
    pos = [src_pos[int(v)] for v in members]
    cols = np.asarray(members, dtype=np.int64)
    return int(rows[pos][:, cols].max())


def horosphere_axioms_report(stats_now: HorosphereStats,
                             stats_prev: HorosphereStats) -> dict:
    """Combine two radii worth of stats and flag stabilization."""
    return {
        "n_cosets": {"run": stats_now.n_cosets, "baseline": stats_prev.n_cosets},
        "max_horospheres_per_vertex": {
            "run": stats_now.max_per_vertex,
            "baseline": stats_prev.max_per_vertex,
            "stable": stats_now.max_per_vertex == stats_prev.max_per_vertex,
        },
        "max_intersection_diameter": {
            "run": stats_now.max_intersection_diam,
            "baseline": stats_prev.max_intersection_diam,
            "stable": stats_now.max_intersection_diam
            == stats_prev.max_intersection_diam,
        },
        "max_projection_diameter": {
            "run": stats_now.max_projection_diam,
            "baseline": stats_prev.max_projection_diam,
            "stable": stats_now.max_projection_diam
            == stats_prev.max_projection_diam,
        },
    }


# ---------------------------------------------------------------------------
# Relative graph


class RelativeGraph:
    """The ball plus a clique on each horosphere; all edges have length 1."""

    def __init__(self, ball: CayleyBall, system: HorosphereSystem):
        self.ball = ball
        self.system = system
        gr, gc, _ = ball.edge_arrays()
        cone_pairs: dict[tuple[int, int], int] = {}
        for ei, h in enumerate(system.entries):
            mem = h.members
            mset = set(int(v) for v in mem)
            for a_i, u in enumerate(mem):
                u = int(u)
                gamma_nbrs = set(int(w) for w in ball.neighbors(u)) & mset
                for v in mem[a_i + 1:]:
                    v = int(v)
                    if v in gamma_nbrs:
                        continue  # keep the Cayley edge, no cone duplicate
                    cone_pairs.setdefault((u, v), ei)
        cu = np.asarray([p[0] for p in cone_pairs], dtype=np.int64)
        cv = np.asarray([p[1] for p in cone_pairs], dtype=np.int64)
        self._cone_entry = dict(cone_pairs)
        rows = np.concatenate([gr, cu, cv])
        cols = np.concatenate([gc, cv, cu])
        self._is_cone = np.concatenate([
            np.zeros(len(gr), dtype=bool), np.ones(2 * len(cu), dtype=bool)
        ])
        n = ball.n
        self._csr = sp.csr_matrix(
            (np.ones(len(rows), dtype=np.float64), (rows, cols)), shape=(n, n)
        )
        # per-vertex neighbors sorted with plain edges first, then by index
        order = np.lexsort((cols, self._is_cone, rows))
        self._nbr = cols[order]
        self._nbr_cone = self._is_cone[order]
        srt_rows = rows[order]
        self._ptr = np.searchsorted(srt_rows, np.arange(n + 1))
        self._dist_cache: OrderedDict[int, np.ndarray] = OrderedDict()
        self._dist_cap = max(16, 4_000_000 // max(n, 1))
        self._lock = threading.Lock()
        self._pairs: Optional[np.ndarray] = None
        self.n_cone_edges = len(cu)

    @property
    def n(self) -> int:
        return self.ball.n

    def neighbors(self, v: int) -> tuple[np.ndarray, np.ndarray]:
        """(neighbor indices, is-cone flags), plain edges first."""
        sl = slice(self._ptr[v], self._ptr[v + 1])
        return self._nbr[sl], self._nbr_cone[sl]

    def rel_dist_from(self, v: int) -> np.ndarray:
        row = self._dist_cache.get(v)
        if row is not None:
            self._dist_cache.move_to_end(v)
            return row
        d = dijkstra(self._csr, indices=v, unweighted=True)
        row = np.where(np.isinf(d), -1, d).astype(np.int32)
        self._dist_cache[v] = row
        if len(self._dist_cache) > self._dist_cap:
            self._dist_cache.popitem(last=False)
        return row

    def rel_dist_multi(self, sources: Sequence[int]) -> np.ndarray:
        src = np.asarray(sources, dtype=np.int64)
        d = dijkstra(self._csr, indices=src, unweighted=True, min_only=True)
        return np.where(np.isinf(d), -1, d).astype(np.int32)

    def rel_distance(self, u: int, v: int) -> int:
        return int(self.rel_dist_from(u)[v])

    def rel_pairs_matrix(self) -> np.ndarray:
        if self.n > ALLPAIRS_CAP:
            raise BallBudgetError(
                f"all-pairs table for {self.n} vertices exceeds cap {ALLPAIRS_CAP}"
            )
        if self._pairs is None:
            blocks = []
            for start in range(0, self.n, 512):
                idx = np.arange(start, min(start + 512, self.n))
                d = dijkstra(self._csr, indices=idx, unweighted=True)
                blocks.append(np.where(np.isinf(d), -1, d).astype(np.int16))
            self._pairs = np.vstack(blocks)
        return self._pairs

    def rel_geodesic(self, x: int, y: int) -> list[int]:
        """Deterministic relative geodesic: at each step take the least
        distance-decreasing neighbor, plain edges preferred over cone edges."""
        dy = self.rel_dist_from(y)
        path = [x]
        cur = x
        while cur != y:
            nbrs, cone = self.neighbors(cur)
            want = dy[nbrs] == dy[cur] - 1
            plain = nbrs[want & ~cone]
            if plain.size:
                cur = int(plain.min())
            else:
                cur = int(nbrs[want].min())
            path.append(cur)
        return path

    def rel_hull(self, F: Sequence[int]) -> np.ndarray:
        """Exact union of relative geodesics between members of F."""
        F = np.unique(np.asarray(F, dtype=np.int64))
        if F.size == 0:
            return F
        rows = {int(x): self.rel_dist_from(int(x)).astype(np.int64) for x in F}
        hull = np.zeros(self.n, dtype=bool)
        members = [int(x) for x in F]
        for ai, x in enumerate(members):
            dx = rows[x]
            for y in members[ai:]:
                dy = rows[y]
                hull |= dx + dy == dx[y]
        return np.nonzero(hull)[0]

    def is_cone_pair(self, u: int, v: int) -> Optional[int]:
        """Entry index when {u, v} is a cone edge, else None."""
        key = (u, v) if u < v else (v, u)
        return self._cone_entry.get(key)

    def common_horosphere(self, u: int, v: int) -> Optional[int]:
        mu = self.system.vertex_membership[u]
        mv = set(self.system.vertex_membership[v])
        for ei in mu:
            if ei in mv:
                return ei
        return None

    def edge_rows(self):
        """Edge-list rows (u, v, horospherical flag, coset id) for dumps."""
        gr, gc, _ = self.ball.edge_arrays()
        for u, v in zip(gr, gc):
            if u < v:
                yield int(u), int(v), False, ""
        for (u, v), ei in sorted(self._cone_entry.items()):
            yield u, v, True, self.system.entries[ei].coset_id

    def __repr__(self):
        return (f"RelativeGraph(n={self.n}, cone_edges={self.n_cone_edges}, "
                f"cosets={len(self.system.entries)})")


def build_relative_graph(ball: CayleyBall,
                         system: HorosphereSystem) -> RelativeGraph:
    return RelativeGraph(ball, system)


def rel_hull(relgraph: RelativeGraph, F: Sequence[int]) -> np.ndarray:
    return relgraph.rel_hull(F)


# ---------------------------------------------------------------------------
# Lifts


@dataclass
class Lift:
    delta: PathRecord                    # relative geodesic in the coned graph
    gamma: PathRecord                    # its lift in the plain graph
    pieces: list[tuple[int, int]]        # per delta-edge: index range in gamma


def lift(relgraph: RelativeGraph, delta: PathRecord) -> Lift:
    """Replace each horospherical edge by the lex geodesic with the same ends.

    The input must be a relative geodesic (length equals the coned distance
    between its endpoints); anything else is a contract error.
    """
    ball = relgraph.ball
    x, y = delta.endpoints
    if delta.length != relgraph.rel_distance(x, y):
        raise ContractError("lift input is not a relative geodesic")
    verts: list[int] = [delta.vertices[0]]
    pieces: list[tuple[int, int]] = []
    for u, v in zip(delta.vertices, delta.vertices[1:]):
        start = len(verts) - 1
        if ball.are_adjacent(u, v):
            verts.append(v)
        elif relgraph.common_horosphere(u, v) is not None:
            seg = ball.lex_geodesic(u, v)
            verts.extend(seg[1:])
        else:
            raise ContractError(
                f"({u}, {v}) is neither a Cayley edge nor a horospherical pair"
            )
        pieces.append((start, len(verts) - 1))
    return Lift(delta, PathRecord(tuple(verts)), pieces)


@dataclass
class LiftCertification:
    n_pairs: int
    n_violations: int
    violations: list[dict]
    max_length_by_distance: dict[int, int]
    envelope_coefficient: Optional[Fraction]
    alpha_label: str

    @property
    def ok(self) -> bool:
        return self.n_violations == 0


def certify_lifts(relgraph: RelativeGraph, pairs: Sequence[tuple[int, int]],
                  alpha: DistortionFunction, r: int = 0) -> LiftCertification:
    """Lift one lex-minimal relative geodesic per pair and certify distortion.

    Also reports the empirical profile d -> max lift subinterval and the
    minimal coefficient c with profile(d) <= c (d+2r+2)(2d+2r+1).
    """
    ball = relgraph.ball
    dmat = ball.pairs_matrix() if ball.n <= ALLPAIRS_CAP else None
    violations: list[dict] = []
    profile: dict[int, int] = {}
    envelope: Optional[Fraction] = None
    for x, y in pairs:
        delta = PathRecord(tuple(relgraph.rel_geodesic(int(x), int(y))))
        lf = lift(relgraph, delta)
        cert = is_alpha_distorted(ball, lf.gamma, alpha, dmatrix=dmat)
        if not cert.passed:
            violations.append({
                "pair": (int(x), int(y)),
                "witness": cert.witness,
                "interval_length": cert.witness_diam,
                "endpoint_distance": cert.witness_endpoint_dist,
            })
        n = ball.graph_distance(*lf.gamma.endpoints)
        L = lf.gamma.length
        if L > profile.get(n, -1):
            profile[n] = L
        denom = (n + 2 * r + 2) * (2 * n + 2 * r + 1)
        coeff = Fraction(L, denom)
        if envelope is None or coeff > envelope:
            envelope = coeff
    return LiftCertification(
        len(pairs), len(violations), violations,
        dict(sorted(profile.items())), envelope, alpha.label(),
    )


# ---------------------------------------------------------------------------
# Horospherical depth (finite-scale surrogate)


def depth(system: HorosphereSystem, path: PathRecord, i: int, s: int) -> int:
    """Largest r with [i-r, i+r] inside the domain and the window mapped into
    a single thickened horosphere N_s(S_p).

    The distorted-path hull of a parabolic point is replaced by the
    s-neighborhood of its horosphere; ``s`` is reported by callers alongside.
    Returns 0 when not even the single vertex lies in any N_s(S_p).
    """
    verts = path.vertices
    L = len(verts) - 1
    if not 0 <= i <= L:
        raise BallInputError(f"path index {i} out of range 0..{L}")
    ball = system.ball
    v0 = verts[i]
    near = ball.neighborhood([v0], s) if s else np.asarray([v0])
    candidates: set[int] = set()
    for w in near:
        candidates.update(system.vertex_membership[int(w)])
    if not candidates:
        return 0
    up = min(i, L - i)
    best = 0
    for r in range(0, up + 1):
        window = verts[i - r:i + r + 1]
        alive = {
            ei for ei in candidates
            if all(system.mask_within(ei, s)[w] for w in window)
        }
        if not alive:
            break
        candidates = alive
        best = r
    return best


# ---------------------------------------------------------------------------
# Thinness of relative triangles


@dataclass
class ThinnessResult:
    constant: int
    witness: Optional[tuple[int, int, int]]
    n_triples: int


def thinness_constant(relgraph: RelativeGraph,
                      triples: Sequence[tuple[int, int, int]]) -> ThinnessResult:
    """Max one-sided defect of lex-geodesic relative triangles over the sample."""
    M = relgraph.rel_pairs_matrix()
    best = 0
    witness = None
    geo_cache: dict[tuple[int, int], np.ndarray] = {}

    def side(a: int, b: int) -> np.ndarray:
        key = (a, b) if a <= b else (b, a)
        got = geo_cache.get(key)
        if got is None:
            got = np.asarray(relgraph.rel_geodesic(key[0], key[1]), dtype=np.int64)
            geo_cache[key] = got
        return got

    count = 0
    for x, y, z in triples:
        count += 1
        s1, s2, s3 = side(x, y), side(y, z), side(x, z)
        for a, b, c in ((s1, s2, s3), (s2, s1, s3), (s3, s1, s2)):
            others = np.concatenate([b, c])
            defect = int(M[np.ix_(a, others)].min(axis=1).max())
            if defect > best:
                best = defect
                witness = (int(x), int(y), int(z))
    return ThinnessResult(best, witness, count)


# ---------------------------------------------------------------------------
# Simple loops through an edge of the cone-vertex graph


@dataclass
class SimpleLoopReport:
    edge: tuple
    max_len: int
    loops_by_length: dict[int, int]
    max_lift_by_length: dict[int, int]
    bound_coefficient: int
    violations: list[dict]

    @property
    def ok(self) -> bool:
        return not self.violations


def simple_loop_lift_report(relgraph: RelativeGraph, edge: tuple,
                            max_len: int, C: int,
                            enum_budget: int = 500_000) -> SimpleLoopReport:
    """Enumerate simple loops through ``edge`` in the cone-vertex graph and
    check each lift against the quadratic length bound C n (n - 1).

    The cone-vertex graph replaces each horosphere clique by a cone vertex
    with half-length edges; lengths are doubled internally to stay integral.
    ``edge`` is (u, v) for a plain edge or (u, "coset id") for a cone edge.
    """
    ball = relgraph.ball
    system = relgraph.system
    n = ball.n

    def cone_node(ei: int) -> int:
        return n + ei

    def nbrs(node: int):
        # yields (neighbor, doubled length)
        if node < n:
            for w in ball.neighbors(node):
                yield int(w), 2
            for ei in system.vertex_membership[node]:
                yield cone_node(ei), 1
        else:
            for w in system.entries[node - n].members:
                yield int(w), 1

    u, v = edge
    if isinstance(v, str):
        ei = system.by_id.get(v)
        if ei is None:
            raise BallInputError(f"unknown coset id {v!r}")
        a, b, w_e = int(u), cone_node(ei), 1
    else:
        a, b, w_e = int(u), int(v), 2
        if not ball.are_adjacent(a, b):
            raise BallInputError(f"({u}, {v}) is not a plain edge")

    cap = 2 * max_len
    # lower bounds on the doubled distance back to `a`, for pruning
    dist_a = _half_dijkstra(nbrs, a, n + len(system.entries))

    loops: list[list[int]] = []
    budget = [enum_budget]

    def dfs(cur: int, used: set[int], w: int, trail: list[int]):
        budget[0] -= 1
        if budget[0] < 0:
            raise BallBudgetError(
                f"simple-loop enumeration exceeded budget {enum_budget}"
            )
        for nxt, wl in nbrs(cur):
            if nxt == a:
                # closing move; len >= 3 forbids re-traversing the seed edge
                if w + wl <= cap and len(trail) >= 3:
                    loops.append(trail + [nxt])
                continue
            if nxt in used:
                continue
            if w + wl + dist_a[nxt] > cap:
                continue
            used.add(nxt)
            dfs(nxt, used, w + wl, trail + [nxt])
            used.discard(nxt)

    dfs(b, {b}, w_e, [a, b])

    loops_by_length: dict[int, int] = {}
    max_lift: dict[int, int] = {}
    violations: list[dict] = []
    seen: set[tuple] = set()
    for trail in loops:
        canon = _canonical_loop(trail)
        if canon in seen:
            continue
        seen.add(canon)
        weight = sum(
            _edge_len(x, y, n) for x, y in zip(trail, trail[1:])
        )
        n_rel = weight // 2
        if weight % 2 or n_rel > max_len:
            continue
        lift_len = _lift_loop_length(relgraph, trail, n)
        loops_by_length[n_rel] = loops_by_length.get(n_rel, 0) + 1
        if lift_len > max_lift.get(n_rel, -1):
            max_lift[n_rel] = lift_len
        if lift_len > C * n_rel * (n_rel - 1):
            violations.append(
                {"loop": trail, "length": n_rel, "lift_length": lift_len}
            )
    return SimpleLoopReport(
        edge, max_len, dict(sorted(loops_by_length.items())),
        dict(sorted(max_lift.items())), C, violations,
    )


def _edge_len(x: int, y: int, n: int) -> int:
    return 2 if (x < n and y < n) else 1


def _half_dijkstra(nbrs, src: int, n_nodes: int) -> list[int]:
    INF = 1 << 60
    dist = [INF] * n_nodes
    dist[src] = 0
    heap = [(0, src)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for w, wl in nbrs(u):
            nd = d + wl
            if nd < dist[w]:
                dist[w] = nd
                heapq.heappush(heap, (nd, w))
    return dist


def _canonical_loop(trail: list[int]) -> tuple:
    cyc = trail[:-1]
    best = None
    for seq in (cyc, cyc[::-1]):
        k = seq.index(min(seq))
        rot = tuple(seq[k:] + seq[:k])
        if best is None or rot < best:
            best = rot
    return best


def _lift_loop_length(relgraph: RelativeGraph, trail: list[int], n: int) -> int:
    """Length of the lift: plain edges kept, cone transits replaced by
    lex geodesics between the flanking ball vertices."""
    ball = relgraph.ball
    total = 0
    i = 0
    while i < len(trail) - 1:
        x = trail[i]
        y = trail[i + 1]
        if y < n:
            total += 1
            i += 1
        else:
            z = trail[i + 2]  # cone nodes always sit between ball vertices
            total += len(ball.lex_geodesic(x, z)) - 1
            i += 2
    return total
