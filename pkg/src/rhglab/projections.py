"""Nearest-point tie sets and their diameters in the graph metric.

Projections always return the whole tie set; nothing in the lab ever breaks
projection ties.  Batched BFS rows keep this affordable on mid-size balls.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .cayley import BallInputError, CayleyBall

_CHUNK = 256


def nearest_point_set(ball: CayleyBall, E: Sequence[int], a: int) -> np.ndarray:
    """Tie set {v in E : d(a, v) = d(a, E)}, sorted."""
    E = np.unique(np.asarray(E, dtype=np.int64))
    if E.size == 0:
        raise BallInputError("projection onto an empty set")
    row = ball.dist_from(a)
    dE = row[E]
    return E[dE == dE.min()]


def tie_sets(ball: CayleyBall, E: Sequence[int],
             B: Sequence[int]) -> list[np.ndarray]:
    """Pr_E b for every b in B, computed from chunked BFS rows."""
    E = np.unique(np.asarray(E, dtype=np.int64))
    if E.size == 0:
        raise BallInputError("projection onto an empty set")
    B = np.asarray(B, dtype=np.int64)
    out: list[np.ndarray] = []
    for start in range(0, B.size, _CHUNK):
        chunk = B[start:start + _CHUNK]
        rows = ball.dist_rows(chunk)[:, E].astype(np.int64)
        mins = rows.min(axis=1)
        for r in range(chunk.size):
            out.append(E[rows[r] == mins[r]])
    return out


def projection_union(ball: CayleyBall, E: Sequence[int],
                     B: Sequence[int]) -> np.ndarray:
    """Union of the tie sets of all points of B, sorted."""
    parts = tie_sets(ball, E, B)
    if not parts:
        return np.asarray([], dtype=np.int64)
    return np.unique(np.concatenate(parts))


def graph_set_diameter(ball: CayleyBall, S: Sequence[int]) -> int:
    """Exact diameter of a vertex set in the graph metric (0 for <= 1 point)."""
    S = np.unique(np.asarray(S, dtype=np.int64))
    if S.size <= 1:
        return 0
    best = 0
    for start in range(0, S.size, _CHUNK):
        chunk = S[start:start + _CHUNK]
        rows = ball.dist_rows(chunk)[:, S]
        best = max(best, int(rows.max()))
    return best


def projection_diameter_raw(ball: CayleyBall, E: Sequence[int],
                            B: Sequence[int]) -> int:
    return graph_set_diameter(ball, projection_union(ball, E, B))
