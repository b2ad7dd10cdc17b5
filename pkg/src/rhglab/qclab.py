"""Quasiconvexity test battery, Dirichlet machinery and growth diagnostics.

Verdicts are three-valued.  A finite ball can never prove quasiconvexity, so
``certified-positive`` means the measured constant is identical at the run
radius and the baseline radius (a documented heuristic), while
``growth-negative`` is a genuine certificate: a witness vertex chain with
strictly increasing distance to the subject, verified by exact arithmetic.
Everything else is ``inconclusive``.

Shortcut metrics at infinite scale are approximated by the Floyd metric on
the finite ball; every quantity that the theory states for the shortcut
metric is computed with the ball metric and labeled a finite-scale surrogate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .cayley import BallInputError, CayleyBall
from .floyd import DistortionFunction, FloydMetric, ScalingFunction, karlsson
from .paths import ApproxHull, alpha_hull_approx, constrained_alpha_path, id_hull
from .projections import (
    graph_set_diameter,
    nearest_point_set,
    projection_union,
)
from .relative import HorosphereSystem, RelativeGraph


# ---------------------------------------------------------------------------
# Frontier proxies and convergence functions


@dataclass(frozen=True)
class FrontierProxy:
    """Finite-scale stand-in for the ideal boundary of an unbounded set:
    the set's trace on an outer shell of the ball."""

    inner: int
    outer: int

    def __post_init__(self):
        if not self.inner < self.outer:
            raise BallInputError("frontier proxy needs inner < outer")

    @classmethod
    def default(cls, radius: int) -> "FrontierProxy":
        return cls(radius - 2, radius)

    def of(self, ball: CayleyBall, E: Sequence[int]) -> np.ndarray:
        E = np.asarray(E, dtype=np.int64)
        d0 = ball.dist0[E]
        return E[(d0 >= self.inner) & (d0 <= self.outer)]


def project(ball: CayleyBall, E: Sequence[int], a: int) -> np.ndarray:
    """Full nearest-point tie set of ``a`` in ``E`` (no tie-breaking)."""
    return nearest_point_set(ball, E, a)


def projection_diameter(ball: CayleyBall, E: Sequence[int],
                        B: Sequence[int]) -> int:
    return graph_set_diameter(ball, projection_union(ball, E, B))


def _leq_eps(scaled: int, eps: Fraction, scale: int) -> bool:
    # scaled/scale <= eps, exactly
    return scaled * eps.denominator <= eps.numerator * scale


def convergence_function(ball: CayleyBall, metric: FloydMetric,
                         E: Sequence[int], a: int, eps: Fraction,
                         proxy: FrontierProxy) -> Optional[int]:
    """Least r such that members of E beyond N_r(a) sit Floyd-eps-close to
    the frontier proxy of E.  None marks an inconclusive query (E does not
    reach the shell, i.e. it is finite at this scale)."""
    E = np.asarray(E, dtype=np.int64)
    front = proxy.of(ball, E)
    if front.size == 0:
        return None
    row = metric.min_row_scaled(a, list(front))
    da = ball.dist_from(a)
    eps = Fraction(eps)
    worst = 0
    for v in E:
        v = int(v)
        if not _leq_eps(int(row[v]), eps, metric.scale):
            worst = max(worst, int(da[v]))
    return worst


def convergence_sup(ball: CayleyBall, metric: FloydMetric, E: Sequence[int],
                    eps: Fraction, proxy: FrontierProxy,
                    basepoints: Optional[Sequence[int]] = None) -> Optional[int]:
    """sup over basepoints in E of the convergence function (the uniform
    convergence constant of a weakly homogeneous set, finite-scale form)."""
    pts = list(E) if basepoints is None else list(basepoints)
    best = 0
    for a in pts:
        c = convergence_function(ball, metric, E, int(a), eps, proxy)
        if c is None:
            return None
        best = max(best, c)
    return best


@dataclass
class ProjectionBoundReport:
    diameter: int
    rho: Optional[Fraction]
    c_e: Optional[int]
    karlsson_value: Optional[int]
    bound: Optional[int]
    holds: Optional[bool]
    note: str = ""


def projection_diameter_report(ball: CayleyBall, metric: FloydMetric,
                               E: Sequence[int], B: Sequence[int],
                               proxy: FrontierProxy) -> ProjectionBoundReport:
    """Exact projection diameter plus the separation-based bound
    2 max{C_E(rho/4), K(rho/4)} with rho the Floyd separation of the frontier
    proxy of E from B, maximized over basepoints in E."""
    E = np.asarray(E, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    diam = projection_diameter(ball, E, B)
    front = proxy.of(ball, E)
    if front.size == 0:
        return ProjectionBoundReport(
            diam, None, None, None, None, None,
            note="inconclusive: E does not reach the frontier shell",
        )
    rho = Fraction(0)
    for v in E:
        row = metric.min_row_scaled(int(v), list(front))
        sep = min(int(row[int(b)]) for b in B)
        rho = max(rho, Fraction(sep, metric.scale))
    if rho == 0:
        return ProjectionBoundReport(
            diam, rho, None, None, None, None,
            note="inconclusive: zero Floyd separation at this scale",
        )
    quarter = rho / 4
    ce = convergence_sup(ball, metric, E, quarter, proxy)
    kv = karlsson(metric.scaling, DistortionFunction.identity(), quarter)
    bound = 2 * max(ce if ce is not None else 0, kv)
    return ProjectionBoundReport(diam, rho, ce, kv, bound, diam <= bound)


# ---------------------------------------------------------------------------
# Visible hulls


@dataclass
class VisibleData:
    """Floyd diameters of a fixed set F seen from evaluated basepoints."""

    basepoints: np.ndarray
    diam_scaled: np.ndarray
    scale: int
    subsampled: bool

    def hull(self, eps: Fraction) -> np.ndarray:
        eps = Fraction(eps)
        keep = self.diam_scaled * eps.denominator >= eps.numerator * self.scale
        return self.basepoints[keep]


def visible_diameters(ball: CayleyBall, metric: FloydMetric, F: Sequence[int],
                      basepoints: Sequence[int],
                      subsampled: bool = False) -> VisibleData:
    F = [int(x) for x in np.unique(np.asarray(F, dtype=np.int64))]
    bps = np.asarray(sorted(int(b) for b in set(basepoints)), dtype=np.int64)
    diams = np.zeros(bps.size, dtype=np.int64)
    if len(F) > 1:
        for i, a in enumerate(bps):
            diams[i] = metric.set_diameter_scaled(int(a), F)
    return VisibleData(bps, diams, metric.scale, subsampled)


def visible_hull(ball: CayleyBall, metric: FloydMetric, F: Sequence[int],
                 eps: Fraction, basepoints: Sequence[int]) -> np.ndarray:
    """Basepoints from which F has Floyd diameter >= eps (eps-hull members)."""
    return visible_diameters(ball, metric, F, basepoints).hull(eps)


# ---------------------------------------------------------------------------
# Stages and notion measurements


@dataclass
class Stage:
    """One radius worth of scenario artifacts handed to the testers."""

    label: str
    ball: CayleyBall
    relgraph: RelativeGraph
    metric: FloydMetric
    F: np.ndarray
    trusted: np.ndarray
    margin: int
    eps_grid: list[Fraction]
    alpha: DistortionFunction
    weak_q: int = 1
    basepoints: Optional[np.ndarray] = None     # visible-notion basepoints
    subsampled: bool = False
    _visible: Optional[VisibleData] = None
    _id_hull: Optional[np.ndarray] = None

    def trusted_mask(self) -> np.ndarray:
        m = np.zeros(self.ball.n, dtype=bool)
        m[self.trusted] = True
        return m

    def visible_data(self) -> VisibleData:
        if self._visible is None:
            bps = self.basepoints if self.basepoints is not None else self.trusted
            self._visible = visible_diameters(
                self.ball, self.metric, self.F, bps, self.subsampled
            )
        return self._visible

    def id_hull_set(self) -> np.ndarray:
        if self._id_hull is None:
            self._id_hull = id_hull(self.ball, self.F)
        return self._id_hull


def _defect(ball: CayleyBall, members: np.ndarray, F: np.ndarray) -> int:
    """Max distance from ``members`` to F (0 for empty members)."""
    if members.size == 0:
        return 0
    dF = ball.dist_multi(F)
    return int(dF[members].max())


def measure_relative(stage: Stage) -> dict:
    hull = stage.relgraph.rel_hull(stage.F)
    mask = stage.trusted_mask()
    members = hull[mask[hull]]
    return {"constant": _defect(stage.ball, members, stage.F),
            "hull_trusted_size": int(members.size), "_members": members}


def measure_visible(stage: Stage) -> dict:
    data = stage.visible_data()
    mask = stage.trusted_mask()
    table = {}
    members_by_eps = {}
    for eps in stage.eps_grid:
        members = data.hull(eps)
        members = members[mask[members]]
        table[str(eps)] = _defect(stage.ball, members, stage.F)
        members_by_eps[str(eps)] = members
    return {"table": table, "basepoints_evaluated": int(data.basepoints.size),
            "subsampled": data.subsampled, "_members_by_eps": members_by_eps}


def measure_alpha(stage: Stage) -> dict:
    hull = alpha_hull_approx(stage.ball, stage.F, stage.alpha)
    mask = stage.trusted_mask()
    members = hull.indices[mask[hull.indices]]
    return {"constant": _defect(stage.ball, members, stage.F),
            "hull_trusted_size": int(members.size),
            "_members": members, "_hull": hull}


def measure_weak_alpha(stage: Stage) -> dict:
    q = stage.weak_q
    allowed = stage.ball.neighborhood(stage.F, q)
    failing = []
    F = [int(x) for x in stage.F]
    for i, x in enumerate(F):
        for y in F[i + 1:]:
            if constrained_alpha_path(stage.ball, x, y, allowed, stage.alpha) is None:
                failing.append((x, y))
    return {"q": q, "n_pairs": len(F) * (len(F) - 1) // 2,
            "failing_pairs": failing, "constant": len(failing)}


@dataclass
class QCReport:
    notion: str
    params: dict
    constants_run: dict
    constants_baseline: dict
    verdict: str
    witness_chain: Optional[list[int]]
    caveats: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "notion": self.notion,
            "params": self.params,
            "constants": {"run": self.constants_run,
                          "baseline": self.constants_baseline},
            "verdict": self.verdict,
            "witness_chain": self.witness_chain,
            "caveats": self.caveats,
        }


def _strip_private(d: dict) -> dict:
    return {k: v for k, v in d.items() if not k.startswith("_")}


def _witness_chain(ball: CayleyBall, members: np.ndarray, F: np.ndarray,
                   upto: int) -> Optional[list[int]]:
    """Vertex per distance value 1..upto inside ``members``, least index each;
    the strictly increasing distance-to-F chain of a growth certificate."""
    if upto < 1 or members.size == 0:
        return None
    dF = ball.dist_multi(F)
    chain = []
    for k in range(1, upto + 1):
        at_k = members[dF[members] == k]
        if at_k.size == 0:
            return None
        chain.append(int(at_k.min()))
    return chain


def test_quasiconvexity(notion: str, run: Stage, baseline: Stage,
                        params: Optional[dict] = None) -> QCReport:
    """Run one notion at the run and baseline radii and fold into a verdict."""
    params = dict(params or {})
    caveats = []
    if notion in ("relative", "alpha", "visible", "dynamical", "weak-alpha"):
        for st in (run, baseline):
            mask = st.trusted_mask()
            if not mask[st.F].all():
                raise BallInputError(
                    f"subject set leaves the trusted region at {st.label}"
                )
    if notion == "relative":
        m_run, m_base = measure_relative(run), measure_relative(baseline)
        c_run, c_base = m_run["constant"], m_base["constant"]
        members = m_run["_members"]
    elif notion == "alpha":
        m_run, m_base = measure_alpha(run), measure_alpha(baseline)
        c_run, c_base = m_run["constant"], m_base["constant"]
        members = m_run["_members"]
        caveats.append(
            "distorted-path hull is the certified two-geodesic "
            "under-approximation (sound subset)"
        )
        params.setdefault("alpha", run.alpha.label())
    elif notion in ("visible", "dynamical"):
        m_run, m_base = measure_visible(run), measure_visible(baseline)
        c_run = max(m_run["table"].values()) if m_run["table"] else 0
        c_base = max(m_base["table"].values()) if m_base["table"] else 0
        members = _visible_growth_members(m_run, m_base)
        params.setdefault("eps_grid", [str(e) for e in run.eps_grid])
        if m_run["subsampled"]:
            caveats.append("basepoints subsampled deterministically (large ball)")
        if notion == "dynamical":
            caveats.append(
                "dynamical quasiconvexity evaluated through its visible-hull "
                "characterization for cofinite orbits; reports coincide by "
                "construction"
            )
    elif notion == "weak-alpha":
        m_run, m_base = measure_weak_alpha(run), measure_weak_alpha(baseline)
        c_run, c_base = m_run["constant"], m_base["constant"]
        members = np.asarray([], dtype=np.int64)
        params.setdefault("q", run.weak_q)
        params.setdefault("alpha", run.alpha.label())
    else:
        raise BallInputError(f"unknown notion {notion!r}")

    if notion in ("visible", "dynamical"):
        equal = m_run["table"] == m_base["table"]
    else:
        equal = c_run == c_base
    if notion == "weak-alpha":
        verdict = "certified-positive" if (c_run == 0 and c_base == 0) \
            else "inconclusive"
        chain = None
    elif equal:
        verdict = "certified-positive"
        chain = None
    else:
        chain = _witness_chain(run.ball, members, run.F, c_run)
        verdict = "growth-negative" if (c_run > c_base and chain) else "inconclusive"
    return QCReport(
        notion, params, _strip_private(m_run), _strip_private(m_base),
        verdict, chain, caveats,
    )


def _visible_growth_members(m_run: dict, m_base: dict) -> np.ndarray:
    """Members of the run-stage eps-hull at the smallest eps whose constant grew."""
    grown = [
        e for e in m_run["table"]
        if m_run["table"][e] > m_base["table"].get(e, 0)
    ]
    if not grown:
        # fall back to the largest table entry
        if not m_run["table"]:
            return np.asarray([], dtype=np.int64)
        e = max(m_run["table"], key=lambda k: m_run["table"][k])
        return m_run["_members_by_eps"][e]
    e = max(grown, key=lambda k: Fraction(k))
    return m_run["_members_by_eps"][e]


def theorem_triangle_violations(reports: dict[str, QCReport]) -> list[str]:
    """A scenario must not mix certified-positive and growth-negative among
    the equivalent notions; such a mix is a build-failing inconsistency."""
    core = [r for n, r in reports.items()
            if n in ("relative", "visible", "alpha", "dynamical")]
    pos = [r.notion for r in core if r.verdict == "certified-positive"]
    neg = [r.notion for r in core if r.verdict == "growth-negative"]
    if pos and neg:
        return [f"equivalent notions disagree: positive {pos} vs negative {neg}"]
    return []


# ---------------------------------------------------------------------------
# Inclusion checks (acceptance invariants)


@dataclass
class InclusionCheck:
    name: str
    n_checked: int
    violations: list[dict]

    @property
    def ok(self) -> bool:
        return not self.violations


def visible_in_hull_check(stage: Stage) -> InclusionCheck:
    """Every evaluated eps-hull member lies within K(eps) of the geodesic hull."""
    data = stage.visible_data()
    hull = stage.id_hull_set()
    d_hull = stage.ball.dist_multi(hull)
    mask = stage.trusted_mask()
    violations = []
    checked = 0
    for eps in stage.eps_grid:
        k = karlsson(stage.metric.scaling, DistortionFunction.identity(), eps)
        members = data.hull(eps)
        members = members[mask[members]]
        checked += int(members.size)
        bad = members[d_hull[members] > k]
        for v in bad[:10]:
            violations.append({"eps": str(eps), "vertex": int(v),
                               "distance": int(d_hull[v]), "karlsson": k})
    return InclusionCheck("visible-hull within Karlsson neighborhood of "
                          "geodesic hull", checked, violations)


def hull_locality_check(stage: Stage, hull: ApproxHull, eps: Fraction,
                        basepoints: Sequence[int]) -> InclusionCheck:
    """Distorted-hull locality: each hull vertex is Floyd-eps-close to F or
    graph-close to the basepoint, with the closeness radius
    s = K_alpha(eps) + alpha(2 K_alpha(eps)) / 2."""
    eps = Fraction(eps)
    k = karlsson(stage.metric.scaling, stage.alpha, eps)
    s = Fraction(k) + stage.alpha.value(2 * k) / 2
    violations = []
    checked = 0
    F = [int(x) for x in stage.F]
    for a in basepoints:
        a = int(a)
        row = stage.metric.min_row_scaled(a, F)
        da = stage.ball.dist_from(a)
        for w in hull.indices:
            w = int(w)
            checked += 1
            close_floyd = _leq_eps(int(row[w]), eps, stage.metric.scale)
            close_graph = Fraction(int(da[w])) <= s
            if not (close_floyd or close_graph):
                violations.append({
                    "basepoint": a, "vertex": w,
                    "floyd_to_F": str(Fraction(int(row[w]), stage.metric.scale)),
                    "graph_to_base": int(da[w]), "eps": str(eps), "s": str(s),
                })
    return InclusionCheck("distorted-hull locality", checked, violations)


# ---------------------------------------------------------------------------
# Dirichlet machinery


@dataclass
class DirichletSet:
    center: int
    orbit: np.ndarray
    members: np.ndarray          # within the membership domain
    domain: np.ndarray

    def to_json(self) -> dict:
        return {"center": int(self.center), "orbit_size": int(self.orbit.size),
                "size": int(self.members.size)}


def dirichlet(ball: CayleyBall, orbit: Sequence[int], v: int,
              domain: Optional[Sequence[int]] = None) -> DirichletSet:
    """Vertices whose distance to the orbit is attained at ``v`` (exact integer
    equality), over the trusted domain."""
    orbit = np.unique(np.asarray(orbit, dtype=np.int64))
    if v not in set(int(x) for x in orbit):
        raise BallInputError("center must belong to the orbit")
    dom = np.asarray(domain, dtype=np.int64) if domain is not None \
        else np.arange(ball.n)
    dO = ball.dist_multi(orbit)
    dv = ball.dist_from(int(v))
    members = dom[dO[dom] == dv[dom]]
    return DirichletSet(int(v), orbit, members, dom)


@dataclass
class StarConvexResult:
    ok: bool
    witness: Optional[tuple[int, int]] = None   # (member, geodesic vertex)
    n_checked: int = 0


def check_star_convex(ball: CayleyBall, D: DirichletSet) -> StarConvexResult:
    """Exhaustive: every vertex of every geodesic [w, center] stays inside."""
    member_mask = np.zeros(ball.n, dtype=bool)
    member_mask[D.members] = True
    domain_mask = np.zeros(ball.n, dtype=bool)
    domain_mask[D.domain] = True
    dv = ball.dist_from(D.center).astype(np.int64)
    checked = 0
    for w in D.members:
        w = int(w)
        dw = ball.dist_from(w).astype(np.int64)
        on_geo = np.nonzero(dw + dv == dv[w])[0]
        checked += int(on_geo.size)
        for t in on_geo:
            t = int(t)
            if domain_mask[t] and not member_mask[t]:
                return StarConvexResult(False, (w, t), checked)
    return StarConvexResult(True, None, checked)


@dataclass
class CoveringReport:
    covered: bool
    n_translates: int
    uncovered: list[int]
    multiplicity_min: int
    multiplicity_max: int

    def to_json(self) -> dict:
        return {"covered": self.covered, "n_translates": self.n_translates,
                "uncovered": [int(u) for u in self.uncovered[:10]],
                "multiplicity_min": self.multiplicity_min,
                "multiplicity_max": self.multiplicity_max}


def check_fundamental(ball: CayleyBall, D: DirichletSet,
                      translates: Sequence, inner: Sequence[int]) -> CoveringReport:
    """Translate coverage of the inner ball by h . F_v over given subgroup
    elements, with multiplicity statistics.  Exact integer machinery."""
    from .cayley import translate_set

    inner = np.asarray(inner, dtype=np.int64)
    counts = np.zeros(ball.n, dtype=np.int32)
    for h in translates:
        moved = translate_set(ball, h, D.members)
        counts[moved] += 1
    uncovered = [int(v) for v in inner if counts[v] == 0]
    mult = counts[inner]
    return CoveringReport(
        not uncovered, len(list(translates)), uncovered,
        int(mult.min()) if mult.size else 0,
        int(mult.max()) if mult.size else 0,
    )


def dirichlet_projection_bound(ball: CayleyBall, D: DirichletSet,
                               system: HorosphereSystem,
                               relevant_ids: Optional[Sequence[str]] = None,
                               ) -> dict:
    """Projection diameter of the Dirichlet set onto each relevant horosphere."""
    out = {}
    ids = relevant_ids if relevant_ids is not None else [
        h.coset_id for h in system.entries
    ]
    for cid in ids:
        h = system.entries[system.by_id[cid]]
        out[cid] = projection_diameter(ball, h.members, D.members)
    return {"per_coset": out, "max": max(out.values()) if out else 0}


# ---------------------------------------------------------------------------
# Parabolic intersection growth diagnostics


@dataclass
class ParabolicReport:
    q: int
    classifications: dict[str, str]
    counts: dict[str, dict]
    flagged: list[str]

    def to_json(self) -> dict:
        return {"q": self.q, "classifications": self.classifications,
                "counts": self.counts, "flagged": self.flagged}


def parabolic_intersection_report(
        run_ball: CayleyBall, run_system: HorosphereSystem, run_orbit: np.ndarray,
        base_ball: CayleyBall, base_system: HorosphereSystem,
        base_orbit: np.ndarray, q: int = 0,
        ratio_threshold: Fraction = Fraction(1, 2)) -> ParabolicReport:
    """Classify |S_p and N_q(orbit)| growth per coset across the two radii.

    bounded count          -> "finite" intersection;
    count tracking |S_p|   -> "finite-index";
    anything in between    -> "intermediate-growth" (flags the scenario as
                              violating the cocompactness side condition).
    """
    run_near = set(int(v) for v in run_ball.neighborhood(run_orbit, q))
    base_near = set(int(v) for v in base_ball.neighborhood(base_orbit, q))
    base_by_id = {h.coset_id: h for h in base_system.entries}
    classifications: dict[str, str] = {}
    counts: dict[str, dict] = {}
    flagged = []
    for h in run_system.entries:
        hb = base_by_id.get(h.coset_id)
        if hb is None:
            continue  # coset not yet visible at the baseline radius
        c_run = sum(1 for v in h.members if int(v) in run_near)
        c_base = sum(1 for v in hb.members if int(v) in base_near)
        size_run, size_base = int(h.members.size), int(hb.members.size)
        if c_run == c_base:
            cls = "finite"
        elif (Fraction(c_run, size_run) >= ratio_threshold
              and Fraction(c_base, max(size_base, 1)) >= ratio_threshold):
            cls = "finite-index"
        else:
            cls = "intermediate-growth"
            flagged.append(h.coset_id)
        classifications[h.coset_id] = cls
        counts[h.coset_id] = {"run": c_run, "baseline": c_base,
                              "size_run": size_run, "size_baseline": size_base}
    return ParabolicReport(q, classifications, counts, sorted(flagged))


# ---------------------------------------------------------------------------
# Projection quasi-isometry check


@dataclass
class QisoReport:
    constant: int
    n_edges: int
    stable: Optional[bool] = None

    def to_json(self) -> dict:
        return {"constant": self.constant, "n_edges": self.n_edges,
                "stable": self.stable}


def projection_qiso_check(ball: CayleyBall, E: Sequence[int],
                          edges: Sequence[tuple[int, int]]) -> QisoReport:
    """Max diameter of the edge-projection tie sets over sampled edges."""
    best = 0
    for u, v in edges:
        union = projection_union(ball, E, [int(u), int(v)])
        best = max(best, graph_set_diameter(ball, union))
    return QisoReport(best, len(list(edges)))


def sample_edges(ball: CayleyBall, k: int, seed: int) -> list[tuple[int, int]]:
    """Deterministic edge sample (all edges when there are fewer than k)."""
    import random

    rows, cols, _ = ball.edge_arrays()
    pairs = sorted({(int(u), int(v)) for u, v in zip(rows, cols) if u < v})
    if len(pairs) <= k:
        return pairs
    rng = random.Random(seed)
    return sorted(rng.sample(pairs, k))
