"""Scenario configs: schema, parsing, and the built-in library.

A scenario is a single JSON document; no environment variable affects
results.  Identical (scenario, seed) pairs must reproduce byte-identical
report bodies, so every default below is deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional

from .floyd import DistortionFunction, ScalingFunction
from .groups import (
    FreeAbelianSpec,
    FreeProductSpec,
    FreeSpec,
    Group,
    GroupSpec,
    PeripheralSpec,
)


class SchemaError(ValueError):
    """Scenario document violates the schema."""


GROUP_PRESETS = {
    "f2": {"free": ["a", "b"]},
    "f2-prod": {"free_product": [{"free": ["a"]}, {"free": ["b"]}]},
    "z2": {"free_abelian": ["x", "y"]},
    "z2-star-z": {"free_product": [{"free_abelian": ["x", "y"]}, {"free": ["c"]}]},
}


def group_spec_from_json(doc: Any) -> GroupSpec:
    if isinstance(doc, str):
        if doc not in GROUP_PRESETS:
            raise SchemaError(
                f"unknown group preset {doc!r}; presets: {sorted(GROUP_PRESETS)}"
            )
        doc = GROUP_PRESETS[doc]
    if not isinstance(doc, dict) or len(doc) != 1:
        raise SchemaError(f"group spec must be a one-key object, got {doc!r}")
    kind, payload = next(iter(doc.items()))
    if kind == "free":
        return FreeSpec(tuple(payload))
    if kind == "free_abelian":
        return FreeAbelianSpec(tuple(payload))
    if kind == "free_product":
        if len(payload) != 2:
            raise SchemaError("free_product takes exactly two factor specs")
        return FreeProductSpec(
            group_spec_from_json(payload[0]), group_spec_from_json(payload[1])
        )
    raise SchemaError(f"unknown group spec kind {kind!r}")


def _fraction(x: Any, what: str) -> Fraction:
    try:
        return Fraction(x)
    except (ValueError, TypeError, ZeroDivisionError):
        raise SchemaError(f"{what} must be a rational like '1/2', got {x!r}")


def scaling_from_json(doc: Any) -> ScalingFunction:
    if not isinstance(doc, dict) or "kind" not in doc:
        raise SchemaError("scaling must be an object with a 'kind'")
    if doc["kind"] == "exponential":
        return ScalingFunction.exponential(_fraction(doc.get("mu", "1/2"), "mu"))
    if doc["kind"] == "polynomial":
        return ScalingFunction.polynomial(int(doc.get("exponent", 4)))
    raise SchemaError(f"unknown scaling kind {doc['kind']!r}")


def distortion_from_json(doc: Any) -> Optional[DistortionFunction]:
    """None signals derive-from-lift-bound."""
    if doc == "derive-from-lift-bound":
        return None
    if not isinstance(doc, dict) or "kind" not in doc:
        raise SchemaError(
            "distortion must be 'derive-from-lift-bound' or an object with 'kind'"
        )
    kind = doc["kind"]
    if kind == "identity":
        return DistortionFunction.identity()
    if kind == "affine":
        return DistortionFunction.affine(
            _fraction(doc["C"], "C"), _fraction(doc["D"], "D"))
    if kind == "quadratic":
        return DistortionFunction.quadratic(
            _fraction(doc["a"], "a"), _fraction(doc["b"], "b"),
            _fraction(doc["c"], "c"))
    if kind == "exponential":
        return DistortionFunction.exponential(_fraction(doc["base"], "base"))
    raise SchemaError(f"unknown distortion kind {kind!r}")


@dataclass
class FamilySubject:
    pattern: str                       # e.g. "a^n b^n"
    n_min: int = 0
    n_max: Optional[int] = None        # None: as large as the trusted region allows

    def words(self, group: Group, trust_radius: int) -> list[str]:
        out = []
        n = self.n_min
        while True:
            if self.n_max is not None and n > self.n_max:
                break
            word = _instantiate_pattern(self.pattern, n)
            el = group.word_to_element(word)
            if el.norm > trust_radius:
                if self.n_max is not None:
                    raise SchemaError(
                        f"family word for n={n} leaves the trusted region"
                    )
                break
            out.append(word)
            n += 1
        return out


def _instantiate_pattern(pattern: str, n: int) -> str:
    toks = []
    for tok in pattern.split():
        if tok.endswith("^n"):
            toks.append(f"{tok[:-2]}^{n}")
        elif tok.endswith("^-n"):
            toks.append(f"{tok[:-3]}^{-n}")
        else:
            toks.append(tok)
    return " ".join(toks)


@dataclass
class SubjectSpec:
    kind: str                          # "subgroup" | "family"
    words: list[str] = field(default_factory=list)
    family: Optional[FamilySubject] = None


def subject_from_json(doc: Any) -> SubjectSpec:
    if not isinstance(doc, dict) or len(doc) != 1:
        raise SchemaError("subject must be {'subgroup': [...]} or {'family': {...}}")
    kind, payload = next(iter(doc.items()))
    if kind == "subgroup":
        if not payload or not all(isinstance(w, str) for w in payload):
            raise SchemaError("subgroup subject needs a nonempty word list")
        return SubjectSpec("subgroup", words=list(payload))
    if kind == "family":
        fam = FamilySubject(
            payload["pattern"], int(payload.get("n_min", 0)),
            payload.get("n_max"),
        )
        return SubjectSpec("family", family=fam)
    raise SchemaError(f"unknown subject kind {kind!r}")


VALID_NOTIONS = ("relative", "visible", "alpha", "weak-alpha", "dynamical")

DEFAULT_CHECKS = {
    "horospheres": True,
    "lifts": "all-trusted-pairs",      # or {"sample": N} or False
    "thinness": False,                 # or {"baseline_exhaustive": True, "sample": N}
    "dirichlet": False,
    "parabolic": True,
    "qiso_edges": 0,
    "hull_locality_eps": None,         # rational string; on when alpha notion runs
    "rep_norm_cap": None,              # cap coset representatives in pair stats
    "constants_entry_cap": 50,         # cosets sampled when measuring lift constants
    "constants_edge_cap": 200,
    "basepoint_cap": 2000,
    "visible_in_hull": True,
    "loops": False,                    # or {"edge": [...], "max_len": n}
}


@dataclass
class Scenario:
    name: str
    group_json: Any
    peripheral: PeripheralSpec
    subject: SubjectSpec
    radius: int
    margin: int
    scaling: ScalingFunction
    distortion: Optional[DistortionFunction]   # None: derive from lift bound
    eps_grid: Optional[list[Fraction]]
    notions: list[str]
    weak_alpha_q: int
    thickening: int
    max_vertices: int
    time_cap_s: float
    seed: int
    expectation: Optional[str]
    checks: dict
    raw: dict

    def group(self) -> Group:
        return Group(group_spec_from_json(self.group_json))

    def default_eps_grid(self) -> list[Fraction]:
        if self.eps_grid is not None:
            return list(self.eps_grid)
        f1 = self.scaling.value(1)
        return [Fraction(f1) * Fraction(1, 2) ** k for k in range(-2, 7)]


def scenario_from_json(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise SchemaError("scenario must be a JSON object")
    missing = {"name", "group", "subject", "radius"} - set(doc)
    if missing:
        raise SchemaError(f"scenario is missing keys: {sorted(missing)}")
    radius = doc["radius"]
    if not isinstance(radius, int) or radius < 2:
        raise SchemaError("radius must be an integer >= 2")
    margin = doc.get("margin", 2)
    if not isinstance(margin, int) or margin < 0 or margin >= radius:
        raise SchemaError("margin must be an integer with 0 <= margin < radius")
    notions = doc.get("notions", [])
    for n in notions:
        if n not in VALID_NOTIONS:
            raise SchemaError(f"unknown notion {n!r}; valid: {VALID_NOTIONS}")
    budgets = doc.get("budgets", {})
    max_vertices = int(budgets.get("max_vertices", 200_000))
    time_cap = float(budgets.get("time_cap_s", 900))
    if max_vertices <= 0 or time_cap <= 0:
        raise SchemaError("budgets must be positive")
    expectation = doc.get("expectation")
    if expectation not in (None, "positive", "negative"):
        raise SchemaError("expectation must be 'positive', 'negative' or absent")
    eps_grid = doc.get("epsilon_grid")
    if eps_grid is not None:
        eps_grid = [_fraction(e, "epsilon_grid entry") for e in eps_grid]
    checks = dict(DEFAULT_CHECKS)
    checks.update(doc.get("checks", {}))
    scaling = scaling_from_json(doc.get("scaling", {"kind": "exponential"}))
    sc = Scenario(
        name=str(doc["name"]),
        group_json=doc["group"],
        peripheral=PeripheralSpec(tuple(doc.get("peripheral", []))),
        subject=subject_from_json(doc["subject"]),
        radius=radius,
        margin=margin,
        scaling=scaling,
        distortion=distortion_from_json(
            doc.get("distortion", "derive-from-lift-bound")),
        eps_grid=eps_grid,
        notions=list(notions),
        weak_alpha_q=int(doc.get("weak_alpha_q", 1)),
        thickening=int(doc.get("thickening", 0)),
        max_vertices=max_vertices,
        time_cap_s=time_cap,
        seed=int(doc.get("seed", 0)),
        expectation=expectation,
        checks=checks,
        raw=doc,
    )
    # fail fast on group/peripheral problems
    group = sc.group()
    sc.peripheral.validate(group)
    if sc.subject.kind == "subgroup":
        for w in sc.subject.words:
            group.word_to_element(w)
    if sc.thickening < 0:
        raise SchemaError("thickening must be nonnegative")
    return sc


def load_scenario(path_or_name: str) -> Scenario:
    if path_or_name in BUILTIN_SCENARIOS:
        return scenario_from_json(BUILTIN_SCENARIOS[path_or_name])
    try:
        with open(path_or_name, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise SchemaError(f"cannot read scenario {path_or_name!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"scenario is not valid JSON: {exc}") from exc
    return scenario_from_json(doc)


# ---------------------------------------------------------------------------
# Built-in library


BUILTIN_SCENARIOS: dict[str, dict] = {
    "f2-plain": {
        "name": "f2-plain",
        "group": {"free": ["a", "b"]},
        "peripheral": [],
        "subject": {"subgroup": ["b"]},
        "radius": 6,
        "margin": 2,
        "scaling": {"kind": "exponential", "mu": "1/2"},
        "distortion": {"kind": "identity"},
        "notions": ["relative", "visible", "alpha", "weak-alpha", "dynamical"],
        "seed": 11,
        "expectation": "positive",
        "checks": {"lifts": False, "parabolic": False,
                   "hull_locality_eps": "1/2", "qiso_edges": 200},
    },
    "f2-rel-a--subgroup-b": {
        "name": "f2-rel-a--subgroup-b",
        "group": {"free_product": [{"free": ["a"]}, {"free": ["b"]}]},
        "peripheral": [0],
        "subject": {"subgroup": ["b"]},
        "radius": 6,
        "margin": 2,
        "scaling": {"kind": "exponential", "mu": "1/2"},
        "distortion": "derive-from-lift-bound",
        "notions": ["relative", "visible", "alpha", "weak-alpha", "dynamical"],
        "seed": 7,
        "expectation": "positive",
        "checks": {"lifts": "all-trusted-pairs",
                   "thinness": {"baseline_exhaustive": True, "sample": 20000},
                   "hull_locality_eps": "1/2", "qiso_edges": 200},
    },
    "f2-plain--anbn-family": {
        "name": "f2-plain--anbn-family",
        "group": {"free": ["a", "b"]},
        "peripheral": [],
        "subject": {"family": {"pattern": "a^n b^n", "n_min": 0}},
        "radius": 10,
        "margin": 2,
        "scaling": {"kind": "exponential", "mu": "1/2"},
        "distortion": {"kind": "identity"},
        "notions": ["relative", "visible"],
        "seed": 23,
        "expectation": "negative",
        "checks": {"lifts": False, "parabolic": False, "basepoint_cap": 256,
                   "visible_in_hull": True},
    },
    "z2-star-z--peripheral-z2": {
        "name": "z2-star-z--peripheral-z2",
        "group": {"free_product": [{"free_abelian": ["x", "y"]}, {"free": ["c"]}]},
        "peripheral": [0],
        "subject": {"subgroup": ["x", "y"]},
        "radius": 6,
        "margin": 2,
        "scaling": {"kind": "exponential", "mu": "1/2"},
        "distortion": "derive-from-lift-bound",
        "notions": ["relative", "visible"],
        "seed": 13,
        "expectation": "positive",
        "checks": {"lifts": {"sample": 600}, "rep_norm_cap": "radius-3",
                   "constants_entry_cap": 12, "constants_edge_cap": 80,
                   "basepoint_cap": 192},
    },
    "z2-star-z--subgroup-a": {
        "name": "z2-star-z--subgroup-a",
        "group": {"free_product": [{"free_abelian": ["x", "y"]}, {"free": ["c"]}]},
        "peripheral": [0],
        "subject": {"subgroup": ["x"]},
        "radius": 6,
        "margin": 2,
        "scaling": {"kind": "exponential", "mu": "1/2"},
        "distortion": "derive-from-lift-bound",
        "notions": ["relative"],
        "seed": 17,
        "expectation": "positive",
        "checks": {"horospheres": False, "lifts": False,
                   "rep_norm_cap": "radius-3",
                   "constants_entry_cap": 12, "constants_edge_cap": 80},
    },
    "dirichlet-f2-b": {
        "name": "dirichlet-f2-b",
        "group": {"free": ["a", "b"]},
        "peripheral": [],
        "subject": {"subgroup": ["b"]},
        "radius": 6,
        "margin": 2,
        "scaling": {"kind": "exponential", "mu": "1/2"},
        "distortion": {"kind": "identity"},
        "notions": ["relative"],
        "seed": 5,
        "expectation": "positive",
        "checks": {"lifts": False, "parabolic": False, "dirichlet": True},
    },
}
