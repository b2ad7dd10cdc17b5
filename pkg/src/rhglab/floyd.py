"""Scaling functions, distortion functions, Floyd metrics and Karlsson functions.

The Floyd metric based at a vertex ``a`` is realized as the weighted
shortest-path metric where edge {x, y} weighs ``f(min(d(a,x), d(a,y)))``;
this is the maximal metric bounded by ``f`` of the edge's distance from the
basepoint.  The ``min`` reading of the edge-distance rule is a recorded
design decision (the two readings differ by one scaling step).

All metric arithmetic is exact: weights are scaled to integers by a common
denominator and summed as integers, with results surfaced as ``Fraction``.
The scipy path is used only while every partial sum provably fits into the
exact integer range of float64; otherwise a pure-Python integer Dijkstra
takes over.
"""

from __future__ import annotations

import heapq
import math
import threading
from collections import OrderedDict
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence, Union

import numpy as np
from scipy.sparse.csgraph import dijkstra as _sp_dijkstra

from .cayley import BallInputError, CayleyBall

Rational = Union[int, Fraction]

_FLOAT_EXACT = 2 ** 53


class ContractError(ValueError):
    """An operation was called outside its contract (e.g. inappropriate pair)."""


# ---------------------------------------------------------------------------
# Scaling functions


@dataclass(frozen=True)
class ScalingFunction:
    """Summable rescaling of edge lengths with bounded decay ratio.

    ``exponential(mu)``:  f_n = mu^n with 0 < mu < 1, decay rate mu.
    ``polynomial(e)``:    f_n = (n+1)^-e with integer e >= 2, decay rate 2^-e
                          (the ratio ((n+2)/(n+1))^-e is minimal at n = 0).

    Polynomial exponents are restricted to integers so that every value is an
    exact rational; the coned-off pipeline additionally needs
    ``sum n^2 f_n < oo``, i.e. exponent > 3, checked via ``n2_summable``.
    """

    kind: str
    mu: Optional[Fraction] = None
    exponent: Optional[int] = None

    def __post_init__(self):
        if self.kind == "exponential":
            if not (self.mu is not None and 0 < self.mu < 1):
                raise ContractError("exponential scaling needs 0 < mu < 1")
        elif self.kind == "polynomial":
            if not (isinstance(self.exponent, int) and self.exponent >= 2):
                raise ContractError(
                    "polynomial scaling needs an integer exponent >= 2 "
                    "(> 3 for the coned-off pipeline)"
                )
        else:
            raise ContractError(f"unknown scaling kind {self.kind!r}")

    @classmethod
    def exponential(cls, mu: Rational) -> "ScalingFunction":
        return cls("exponential", mu=Fraction(mu))

    @classmethod
    def polynomial(cls, exponent: int) -> "ScalingFunction":
        return cls("polynomial", exponent=exponent)

    def value(self, n: int) -> Fraction:
        if self.kind == "exponential":
            return self.mu ** n
        return Fraction(1, (n + 1) ** self.exponent)

    @property
    def decay_rate(self) -> Fraction:
        if self.kind == "exponential":
            return self.mu
        return Fraction(1, 2 ** self.exponent)

    @property
    def n2_summable(self) -> bool:
        return self.kind == "exponential" or self.exponent > 3

    def scaled_values(self, maxn: int) -> tuple[list[int], int]:
        """Integer table (f_0*D, ..., f_maxn*D) with its common denominator D."""
        if self.kind == "exponential":
            p, q = self.mu.numerator, self.mu.denominator
            D = q ** maxn
            vals = [p ** n * q ** (maxn - n) for n in range(maxn + 1)]
            return vals, D
        D = math.lcm(*range(1, maxn + 2)) ** self.exponent
        vals = [D // (n + 1) ** self.exponent for n in range(maxn + 1)]
        return vals, D

    def label(self) -> str:
        if self.kind == "exponential":
            return f"mu^n (mu={self.mu})"
        return f"(n+1)^-{self.exponent}"


# ---------------------------------------------------------------------------
# Distortion functions


@dataclass(frozen=True)
class DistortionFunction:
    """Nondecreasing alpha with alpha(n) >= n, checked symbolically per variant."""

    kind: str
    params: tuple[Fraction, ...] = ()

    def __post_init__(self):
        k, p = self.kind, self.params
        if k == "identity":
            if p:
                raise ContractError("identity takes no parameters")
        elif k == "affine":
            C, D = p
            if C < 1 or D < 0:
                raise ContractError("affine distortion needs C >= 1, D >= 0")
        elif k == "quadratic":
            a, b, c = p
            if a <= 0:
                raise ContractError("quadratic distortion needs a > 0")
            if c < 0 or a + b + c < 1:
                raise ContractError("quadratic needs alpha(0) >= 0 and alpha(1) >= 1")
            if a + b < 0:
                raise ContractError("quadratic not nondecreasing on the naturals")
            # alpha(n) - n = a n^2 + (b-1) n + c must be >= 0 on the naturals
            vertex = (1 - b) / (2 * a)
            for n in {0, 1, max(0, math.floor(vertex)), max(0, math.ceil(vertex))}:
                if a * n * n + (b - 1) * n + c < 0:
                    raise ContractError(f"quadratic drops below n at n={n}")
        elif k == "exponential":
            (lam,) = p
            if lam <= 1:
                raise ContractError("exponential distortion needs base > 1")
            # lam^n >= n for all n: the ratio lam^(n+1)/(n+1) : lam^n/n is
            # nondecreasing once lam >= (n+1)/n, i.e. n >= 1/(lam-1)
            nstar = math.ceil(1 / (lam - 1)) + 1
            for n in range(0, nstar + 1):
                if lam ** n < n:
                    raise ContractError(
                        f"exponential base {lam} drops below n at n={n}"
                    )
        else:
            raise ContractError(f"unknown distortion kind {k!r}")

    @classmethod
    def identity(cls) -> "DistortionFunction":
        return cls("identity")

    @classmethod
    def affine(cls, C: Rational, D: Rational) -> "DistortionFunction":
        return cls("affine", (Fraction(C), Fraction(D)))

    @classmethod
    def quadratic(cls, a: Rational, b: Rational, c: Rational) -> "DistortionFunction":
        return cls("quadratic", (Fraction(a), Fraction(b), Fraction(c)))

    @classmethod
    def exponential(cls, base: Rational) -> "DistortionFunction":
        return cls("exponential", (Fraction(base),))

    def value(self, n: int) -> Fraction:
        if self.kind == "identity":
            return Fraction(n)
        if self.kind == "affine":
            C, D = self.params
            return C * n + D
        if self.kind == "quadratic":
            a, b, c = self.params
            return a * n * n + b * n + c
        (lam,) = self.params
        return lam ** n

    @property
    def is_polynomial(self) -> bool:
        return self.kind != "exponential"

    @property
    def degree(self) -> int:
        return {"identity": 1, "affine": 1, "quadratic": 2}.get(self.kind, -1)

    def odd_coeffs(self) -> tuple[Fraction, Fraction, Fraction]:
        """(c0, c1, c2) with alpha(2s+1) = c2 s^2 + c1 s + c0, polynomial kinds."""
        if self.kind == "identity":
            return Fraction(1), Fraction(2), Fraction(0)
        if self.kind == "affine":
            C, D = self.params
            return C + D, 2 * C, Fraction(0)
        if self.kind == "quadratic":
            a, b, c = self.params
            return a + b + c, 4 * a + 2 * b, 4 * a
        raise ContractError("odd_coeffs is for polynomial distortion kinds")

    def allowed_lengths(self, maxd: int, cap: int = 10 ** 15) -> np.ndarray:
        """Table floor(alpha(d)) for d = 0..maxd, clipped to ``cap``."""
        out = np.empty(maxd + 1, dtype=np.int64)
        for d in range(maxd + 1):
            v = self.value(d)
            out[d] = min(cap, v.numerator // v.denominator)
        return out

    def label(self) -> str:
        if self.kind == "identity":
            return "id"
        if self.kind == "affine":
            C, D = self.params
            return f"{C}n+{D}"
        if self.kind == "quadratic":
            a, b, c = self.params
            return f"{a}n^2+{b}n+{c}"
        return f"{self.params[0]}^n"


def lift_distortion_bound(r: int, C: int) -> DistortionFunction:
    """Quadratic distortion bound for lifts of coned-graph geodesics.

    With horosphere-quasiconvexity constant ``r`` and projection constant
    ``C`` the lift of a relative geodesic with endpoint distance n has length
    at most C (n + 2r + 2)(2n + 2r + 1).  Clamped below by n: for C = 0 the
    bound degenerates and the identity distortion is returned.
    """
    if r < 0 or C < 0:
        raise ContractError("constants must be nonnegative")
    if C == 0:
        return DistortionFunction.identity()
    return DistortionFunction.quadratic(
        2 * C, C * (6 * r + 5), C * (2 * r + 2) * (2 * r + 1)
    )


# ---------------------------------------------------------------------------
# Appropriateness and Karlsson functions


@dataclass(frozen=True)
class Appropriateness:
    appropriate: bool
    certificate: str

    def __bool__(self) -> bool:
        return self.appropriate


def is_appropriate(f: ScalingFunction, alpha: DistortionFunction) -> Appropriateness:
    """Decide convergence of sum alpha(2n+1) f_n, symbolically per variant."""
    if alpha.is_polynomial:
        if f.kind == "exponential":
            return Appropriateness(
                True,
                f"ratio test: polynomial alpha against geometric decay "
                f"(term ratio -> {f.mu} < 1)",
            )
        gap = f.exponent - alpha.degree
        return Appropriateness(
            gap > 1,
            f"comparison with sum n^({alpha.degree}-{f.exponent}): "
            f"converges iff exponent gap {gap} > 1",
        )
    (lam,) = alpha.params
    if f.kind == "exponential":
        ratio = lam * lam * f.mu
        return Appropriateness(
            ratio < 1, f"ratio test: term ratio lambda^2 mu = {ratio}, need < 1"
        )
    return Appropriateness(
        False, "exponential distortion dominates polynomial decay: terms diverge"
    )


def lambda0(f: ScalingFunction) -> Union[Fraction, float]:
    """Supremum of bases lambda with (f, lambda^n) appropriate: mu^(-1/2).

    The supremum is not attained: at lambda = mu^(-1/2) the term ratio equals
    one and the series diverges.  Returns an exact Fraction when mu is the
    square of a rational, a float otherwise.
    """
    if f.kind != "exponential":
        raise BallInputError("lambda0 is defined for exponential scaling only")
    p, q = f.mu.numerator, f.mu.denominator
    sp_, sq = math.isqrt(p), math.isqrt(q)
    if sp_ * sp_ == p and sq * sq == q:
        return Fraction(sq, sp_)
    return math.sqrt(q / p)


def _tail_geometric(x: Fraction, r: int) -> Fraction:
    return x ** r / (1 - x)


def _tail_s1(x: Fraction, r: int) -> Fraction:
    # sum_{s>=r} s x^s
    return x ** r * (r - (r - 1) * x) / (1 - x) ** 2


def _tail_s2(x: Fraction, r: int) -> Fraction:
    # sum_{s>=r} s^2 x^s
    num = r * r - (2 * r * r - 2 * r - 1) * x + (r - 1) ** 2 * x ** 2
    return x ** r * num / (1 - x) ** 3


def karlsson_tail(f: ScalingFunction, alpha: DistortionFunction, r: int) -> Fraction:
    """Exact tail sum_{s>=r} alpha(2s+1) f_s for exponential scaling."""
    if f.kind != "exponential":
        raise ContractError("exact tails are available for exponential scaling")
    mu = f.mu
    if alpha.is_polynomial:
        c0, c1, c2 = alpha.odd_coeffs()
        total = c0 * _tail_geometric(mu, r)
        if c1:
            total += c1 * _tail_s1(mu, r)
        if c2:
            total += c2 * _tail_s2(mu, r)
        return total
    (lam,) = alpha.params
    x = lam * lam * mu
    if x >= 1:
        raise ContractError("inappropriate pair has no finite tail")
    return lam * x ** r / (1 - x)


def _poly_tail_bound(f: ScalingFunction, alpha: DistortionFunction,
                     r: int) -> Fraction:
    """Certified upper bound on the tail for polynomial scaling.

    Each monomial s^j (s+1)^-e is bounded by (s+1)^(j-e) and the sum by the
    first term plus an integral comparison.  A genuinely geometric bound does
    not exist here (polynomial tails beat any fixed-ratio geometric series),
    so the certificate is the integral comparison instead.
    """
    e = f.exponent
    c0, c1, c2 = alpha.odd_coeffs()
    bound = Fraction(0)
    for j, cj in ((0, c0), (1, c1), (2, c2)):
        if cj <= 0:
            continue
        k = e - j  # decay exponent, > 1 whenever the pair is appropriate
        first = Fraction(1, (r + 1) ** k)
        integral = Fraction(1, (k - 1) * (r + 1) ** (k - 1))
        bound += cj * (first + integral)
    return bound


def karlsson(f: ScalingFunction, alpha: DistortionFunction,
             eps: Rational) -> int:
    """Least r with sum_{s>=r} alpha(2s+1) f_s <= eps/2.

    Exponential scaling uses exact closed-form tails; polynomial scaling sums
    numerically until the certified tail bound drops below eps/4 and then
    decides with the bounded remainder.
    """
    return _karlsson_cached(f, alpha, Fraction(eps))


@lru_cache(maxsize=65536)
def _karlsson_cached(f: ScalingFunction, alpha: DistortionFunction,
                     eps: Fraction) -> int:
    ok = is_appropriate(f, alpha)
    if not ok:
        raise ContractError(f"pair is not appropriate: {ok.certificate}")
    if eps <= 0:
        raise ContractError("eps must be positive")
    target = eps / 2
    if f.kind == "exponential":
        r = 0
        while karlsson_tail(f, alpha, r) > target:
            r += 1
            if r > 100_000:  # pragma: no cover - appropriate pairs converge fast
                raise ContractError("tail does not reach target")
        return r
    # polynomial scaling: certified numeric summation
    R = 1
    while _poly_tail_bound(f, alpha, R) > eps / 4:
        R += 1
    prefix = [Fraction(0)]
    for s in range(R):
        prefix.append(prefix[-1] + alpha.value(2 * s + 1) * f.value(s))
    bound = _poly_tail_bound(f, alpha, R)
    for r in range(R + 1):
        if prefix[R] - prefix[r] + bound <= target:
            return r
    raise ContractError("unreachable: tail bound below target at r = R")


def karlsson_table(f: ScalingFunction, alpha: DistortionFunction,
                   eps_list: Sequence[Rational]) -> list[tuple[Fraction, int]]:
    return [(Fraction(e), karlsson(f, alpha, e)) for e in eps_list]


# ---------------------------------------------------------------------------
# Floyd metric on a ball


class FloydMetric:
    """Exact Floyd distances on a ball, one weighted graph per basepoint.

    Distances are computed on integer-scaled weights; ``scale`` is the common
    denominator.  Per-basepoint weight arrays and per-(basepoint, source)
    distance rows are cached with LRU eviction.  Tables are written once and
    then only read, so sharing across worker threads is safe.
    """

    def __init__(self, ball: CayleyBall, scaling: ScalingFunction,
                 row_cache: int = 512):
        self.ball = ball
        self.scaling = scaling
        maxlevel = 2 * ball.radius + 1
        vals, D = scaling.scaled_values(maxlevel)
        self.scale = D
        self._fD = np.asarray(vals, dtype=object)
        self._fD_int = np.asarray(vals, dtype=np.float64)
        # every path sum is below n * max weight; float64 stays exact under 2^53
        self._float_ok = ball.n * max(vals) < _FLOAT_EXACT
        self._rows, self._cols, _ = ball.edge_arrays()
        self._weight_cache: OrderedDict[int, np.ndarray] = OrderedDict()
        self._row_cache: OrderedDict[tuple[int, int], np.ndarray] = OrderedDict()
        self._row_cache_cap = row_cache
        self._lock = threading.Lock()

    # -- weights -------------------------------------------------------------

    def edge_levels(self, base: int) -> np.ndarray:
        da = self.ball.dist_from(base)
        return np.minimum(da[self._rows], da[self._cols])

    def _weights(self, base: int) -> np.ndarray:
        with self._lock:
            w = self._weight_cache.get(base)
            if w is not None:
                self._weight_cache.move_to_end(base)
                return w
        lev = self.edge_levels(base)
        w = self._fD_int[lev]
        with self._lock:
            self._weight_cache[base] = w
            if len(self._weight_cache) > 8:
                self._weight_cache.popitem(last=False)
        return w

    def edge_weight(self, base: int, u: int, v: int) -> Fraction:
        if not self.ball.are_adjacent(u, v):
            raise BallInputError(f"({u}, {v}) is not an edge")
        da = self.ball.dist_from(base)
        return Fraction(
            int(self._fD[min(int(da[u]), int(da[v]))]), self.scale
        )

    # -- scaled-integer rows ---------------------------------------------------

    def row_scaled(self, base: int, src: int) -> np.ndarray:
        """Scaled distances from ``src`` under the base-``base`` weights."""
        key = (base, src)
        with self._lock:
            row = self._row_cache.get(key)
            if row is not None:
                self._row_cache.move_to_end(key)
                return row
        row = self._dijkstra(base, [src])[0]
        with self._lock:
            self._row_cache[key] = row
            if len(self._row_cache) > self._row_cache_cap:
                self._row_cache.popitem(last=False)
        return row

    def rows_scaled(self, base: int, sources: Sequence[int]) -> np.ndarray:
        return self._dijkstra(base, list(sources))

    def min_row_scaled(self, base: int, sources: Sequence[int]) -> np.ndarray:
        """Scaled distance to the nearest of ``sources`` (multi-source)."""
        return self._dijkstra(base, list(sources), min_only=True)

    def _dijkstra(self, base: int, sources: list[int],
                  min_only: bool = False) -> np.ndarray:
        if self._float_ok:
            import scipy.sparse as sp

            n = self.ball.n
            m = sp.csr_matrix(
                (self._weights(base), (self._rows, self._cols)), shape=(n, n)
            )
            d = _sp_dijkstra(m, indices=sources, min_only=min_only)
            out = np.where(np.isinf(d), -1, d)
            return out.astype(np.int64)
        return self._py_dijkstra(base, sources, min_only)

    def _py_dijkstra(self, base: int, sources: list[int],
                     min_only: bool) -> np.ndarray:
        da = self.ball.dist_from(base)
        fD = [int(x) for x in self._fD]
        ball = self.ball

        def one(srcs: list[int]) -> np.ndarray:
            dist = {s: 0 for s in srcs}
            heap = [(0, s) for s in srcs]
            heapq.heapify(heap)
            done = set()
            while heap:
                d, u = heapq.heappop(heap)
                if u in done:
                    continue
                done.add(u)
                du = int(da[u])
                for w in ball.neighbors(u):
                    w = int(w)
                    nd = d + fD[min(du, int(da[w]))]
                    if w not in dist or nd < dist[w]:
                        dist[w] = nd
                        heapq.heappush(heap, (nd, w))
            out = np.full(ball.n, -1, dtype=object)
            for k, v in dist.items():
                out[k] = v
            return out

        if min_only:
            return one(sources)
        return np.stack([one([s]) for s in sources])

    # -- Fraction API ----------------------------------------------------------

    def distance(self, base: int, x: int, y: int) -> Fraction:
        return Fraction(int(self.row_scaled(base, x)[y]), self.scale)

    def distance_to_set(self, base: int, x: int, S: Sequence[int]) -> Fraction:
        row = self.row_scaled(base, x)
        return Fraction(int(min(int(row[s]) for s in S)), self.scale)

    def set_diameter_scaled(self, base: int, F: Sequence[int]) -> int:
        F = list(F)
        if not F:
            raise BallInputError("empty set has no diameter")
        best = 0
        for i, x in enumerate(F[:-1]):
            row = self.row_scaled(base, x)
            m = max(int(row[y]) for y in F[i + 1:])
            best = max(best, m)
        return best

    def set_diameter(self, base: int, F: Sequence[int]) -> Fraction:
        return Fraction(self.set_diameter_scaled(base, F), self.scale)

    def path_length(self, base: int, path: Sequence[int]) -> Fraction:
        da = self.ball.dist_from(base)
        total = 0
        for u, v in zip(path, path[1:]):
            total += int(self._fD[min(int(da[u]), int(da[v]))])
        return Fraction(total, self.scale)

    def to_fraction(self, scaled: int) -> Fraction:
        return Fraction(int(scaled), self.scale)

    def frac_grid(self, eps_list: Sequence[Rational]) -> list[Fraction]:
        return [Fraction(e) for e in eps_list]


def floyd_distance(ball: CayleyBall, base: int, x: int, y: int,
                   f: ScalingFunction) -> Fraction:
    """One-shot Floyd distance; builds a throwaway metric table."""
    return FloydMetric(ball, f).distance(base, x, y)


def floyd_diameter(ball: CayleyBall, base: int, F: Sequence[int],
                   f: ScalingFunction) -> Fraction:
    F = list(F)
    if not F:
        raise BallInputError("floyd_diameter of an empty set")
    if len(F) == 1:
        return Fraction(0)
    return FloydMetric(ball, f).set_diameter(base, F)


# ---------------------------------------------------------------------------
# Karlsson verification on sampled paths


@dataclass
class KarlssonCheck:
    n_samples: int
    violations: list[tuple[int, tuple[int, ...], int, int]]
    slack_min: Optional[int]
    slack_max: Optional[int]

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_karlsson(ball: CayleyBall, metric: FloydMetric,
                    alpha: DistortionFunction,
                    samples: Sequence[tuple[int, Sequence[int]]]) -> KarlssonCheck:
    """Check d(v, Im gamma) <= K(Floyd length of gamma at v) on given samples.

    Each sample is (basepoint, path).  Paths must certify as alpha-distorted;
    a failing path is an input error naming the witness subinterval.
    """
    from .paths import PathRecord, is_alpha_distorted

    f = metric.scaling
    violations = []
    slacks = []
    for base, path in samples:
        rec = path if isinstance(path, PathRecord) else PathRecord(tuple(path))
        cert = is_alpha_distorted(ball, rec, alpha)
        if not cert.passed:
            raise BallInputError(
                f"sample path is not alpha-distorted; witness subinterval "
                f"{cert.witness}"
            )
        da = ball.dist_from(base)
        dist_to_path = min(int(da[v]) for v in rec.vertices)
        length = metric.path_length(base, rec.vertices)
        if length == 0:
            # single-vertex path: K(0+) is unbounded, nothing to check
            slacks.append(0)
            continue
        k = karlsson(f, alpha, length)
        if dist_to_path > k:
            violations.append((base, tuple(rec.vertices), dist_to_path, k))
        else:
            slacks.append(k - dist_to_path)
    return KarlssonCheck(
        len(samples), violations,
        min(slacks) if slacks else None,
        max(slacks) if slacks else None,
    )
