"""Exact arithmetic for a closed family of groups: free, free-abelian, free products.

Every element carries a canonical normal form, so equality is syntactic and the
word problem is solved by construction.  A single total order on elements
(shortlex induced by the declared generator order, inverses sorting right after
their generator) drives every deterministic tie-break downstream.

Normal forms, by variant:

* free:          reduced word, stored as a tuple of nonzero signed ints
                 (``+k`` = k-th generator of the leaf, ``-k`` its inverse);
* free-abelian:  exponent vector, a tuple of ints of length ``rank``;
* free-product:  alternating tuple of ``(side, subform)`` syllables, sides in
                 {0, 1}, no trivial syllable, adjacent syllables on distinct
                 sides.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Union


class GroupError(ValueError):
    """Malformed group spec, normal form, or input word."""


# ---------------------------------------------------------------------------
# Group specifications

_LABEL_RE = re.compile(r"^[A-Za-z][A-Za-z0-9_]*$")


@dataclass(frozen=True)
class FreeSpec:
    labels: tuple[str, ...]


@dataclass(frozen=True)
class FreeAbelianSpec:
    labels: tuple[str, ...]


@dataclass(frozen=True)
class FreeProductSpec:
    left: "GroupSpec"
    right: "GroupSpec"


GroupSpec = Union[FreeSpec, FreeAbelianSpec, FreeProductSpec]


def free(*labels: str) -> FreeSpec:
    return FreeSpec(tuple(labels))


def free_abelian(*labels: str) -> FreeAbelianSpec:
    return FreeAbelianSpec(tuple(labels))


def free_product(left: GroupSpec, right: GroupSpec) -> FreeProductSpec:
    return FreeProductSpec(left, right)


def iter_leaves(spec: GroupSpec) -> Iterator[tuple[tuple[int, ...], GroupSpec]]:
    """Pre-order traversal of the leaves, yielding (path-of-sides, leaf)."""
    if isinstance(spec, FreeProductSpec):
        for path, leaf in iter_leaves(spec.left):
            yield (0,) + path, leaf
        for path, leaf in iter_leaves(spec.right):
            yield (1,) + path, leaf
    else:
        yield (), spec


def spec_labels(spec: GroupSpec) -> tuple[str, ...]:
    out: list[str] = []
    for _, leaf in iter_leaves(spec):
        out.extend(leaf.labels)
    return tuple(out)


def validate_spec(spec: GroupSpec) -> None:
    seen: set[str] = set()
    for _, leaf in iter_leaves(spec):
        if not isinstance(leaf, (FreeSpec, FreeAbelianSpec)):
            raise GroupError(f"not a group spec leaf: {leaf!r}")
        if len(leaf.labels) < 1:
            raise GroupError("leaf rank must be >= 1")
        for lab in leaf.labels:
            if not _LABEL_RE.match(lab):
                raise GroupError(f"bad generator label {lab!r}")
            if lab == "e":
                raise GroupError("label 'e' is reserved for the identity")
            if lab in seen:
                raise GroupError(f"duplicate generator label {lab!r}")
            seen.add(lab)


# ---------------------------------------------------------------------------
# Normal-form kernel (functions over (spec, form) pairs)


def _id_form(spec: GroupSpec):
    if isinstance(spec, FreeAbelianSpec):
        return (0,) * len(spec.labels)
    return ()


def _is_id(spec: GroupSpec, form) -> bool:
    return form == _id_form(spec)


def _side_spec(spec: FreeProductSpec, side: int) -> GroupSpec:
    return spec.left if side == 0 else spec.right


def _mul(spec: GroupSpec, a, b):
    if isinstance(spec, FreeSpec):
        out = list(a)
        for x in b:
            if out and out[-1] == -x:
                out.pop()
            else:
                out.append(x)
        return tuple(out)
    if isinstance(spec, FreeAbelianSpec):
        return tuple(p + q for p, q in zip(a, b))
    # free product: fuse syllables at the seam while they collapse
    out = list(a)
    for side, sub in b:
        if out and out[-1][0] == side:
            sub_spec = _side_spec(spec, side)
            merged = _mul(sub_spec, out[-1][1], sub)
            out.pop()
            if not _is_id(sub_spec, merged):
                out.append((side, merged))
        else:
            out.append((side, sub))
    return tuple(out)


def _inv(spec: GroupSpec, a):
    if isinstance(spec, FreeSpec):
        return tuple(-x for x in reversed(a))
    if isinstance(spec, FreeAbelianSpec):
        return tuple(-x for x in a)
    return tuple((side, _inv(_side_spec(spec, side), sub)) for side, sub in reversed(a))


def _norm(spec: GroupSpec, a) -> int:
    """Word length of the element over the induced generating set."""
    if isinstance(spec, FreeSpec):
        return len(a)
    if isinstance(spec, FreeAbelianSpec):
        return sum(abs(x) for x in a)
    return sum(_norm(_side_spec(spec, side), sub) for side, sub in a)


def _leaf_width(spec: GroupSpec) -> int:
    return len(spec_labels(spec))


def _lex_word(spec: GroupSpec, a, offset: int = 0) -> tuple[int, ...]:
    """Lexicographically least minimal-length spelling, as global letter codes.

    Letter codes: generator with global index i -> 2i, its inverse -> 2i+1,
    so the order is a < a^-1 < b < b^-1 < ...  The map element -> lex word is
    injective, which makes (norm, lex_word) a total order.
    """
    if isinstance(spec, FreeSpec):
        return tuple(
            2 * (offset + abs(x) - 1) + (0 if x > 0 else 1) for x in a
        )
    if isinstance(spec, FreeAbelianSpec):
        out: list[int] = []
        for i, x in enumerate(a):
            code = 2 * (offset + i) + (0 if x > 0 else 1)
            out.extend([code] * abs(x))
        return tuple(out)
    out = []
    left_width = _leaf_width(spec.left)
    for side, sub in a:
        sub_spec = _side_spec(spec, side)
        sub_off = offset if side == 0 else offset + left_width
        out.extend(_lex_word(sub_spec, sub, sub_off))
    return tuple(out)


def _validate_form(spec: GroupSpec, a) -> None:
    if isinstance(spec, FreeSpec):
        if not isinstance(a, tuple):
            raise GroupError("free form must be a tuple")
        r = len(spec.labels)
        for x in a:
            if not isinstance(x, int) or x == 0 or abs(x) > r:
                raise GroupError(f"bad letter {x!r} in free form")
        for x, y in zip(a, a[1:]):
            if x == -y:
                raise GroupError("free form is not reduced")
        return
    if isinstance(spec, FreeAbelianSpec):
        if not isinstance(a, tuple) or len(a) != len(spec.labels):
            raise GroupError("abelian form must be a tuple of length rank")
        if not all(isinstance(x, int) for x in a):
            raise GroupError("abelian form entries must be ints")
        return
    if not isinstance(a, tuple):
        raise GroupError("product form must be a tuple of syllables")
    prev_side = None
    for syl in a:
        if not (isinstance(syl, tuple) and len(syl) == 2 and syl[0] in (0, 1)):
            raise GroupError(f"bad syllable {syl!r}")
        side, sub = syl
        if side == prev_side:
            raise GroupError("adjacent syllables from the same factor")
        sub_spec = _side_spec(spec, side)
        if _is_id(sub_spec, sub):
            raise GroupError("trivial syllable in product form")
        _validate_form(sub_spec, sub)
        prev_side = side


def _embed_letter(spec: GroupSpec, path: tuple[int, ...], local: int):
    """Form of a single generator letter; ``local`` is +-(k+1) for the k-th label."""
    if not path:
        if isinstance(spec, FreeSpec):
            return (local,)
        vec = [0] * len(spec.labels)
        vec[abs(local) - 1] = 1 if local > 0 else -1
        return tuple(vec)
    side = path[0]
    sub = _embed_letter(_side_spec(spec, side), path[1:], local)
    return ((side, sub),)


def _pow(spec: GroupSpec, a, n: int):
    if n == 0:
        return _id_form(spec)
    if n < 0:
        return _pow(spec, _inv(spec, a), -n)
    half = _pow(spec, a, n // 2)
    out = _mul(spec, half, half)
    if n % 2:
        out = _mul(spec, out, a)
    return out


def _strip_trailing(spec: GroupSpec, a, path: tuple[int, ...]):
    """Split ``a = w . p`` with ``p`` the maximal trailing part in the leaf at
    ``path``; returns ``(w_form, stripped_anything)``."""
    if not path:
        return _id_form(spec), not _is_id(spec, a)
    if not a:
        return a, False
    side, sub = a[-1]
    if side != path[0]:
        return a, False
    sub_spec = _side_spec(spec, side)
    rep_sub, stripped = _strip_trailing(sub_spec, sub, path[1:])
    if not stripped:
        return a, False
    if _is_id(sub_spec, rep_sub):
        return a[:-1], True
    return a[:-1] + ((side, rep_sub),), True


# ---------------------------------------------------------------------------
# Public element / group API


class Element:
    """Group element in canonical normal form.  Immutable and hashable."""

    __slots__ = ("group", "form", "_hash")

    def __init__(self, group: "Group", form):
        self.group = group
        self.form = form
        self._hash = hash(form)

    def __eq__(self, other):
        return (
            isinstance(other, Element)
            and self.group.spec == other.group.spec
            and self.form == other.form
        )

    def __hash__(self):
        return self._hash

    def __mul__(self, other: "Element") -> "Element":
        return self.group.multiply(self, other)

    def __invert__(self) -> "Element":
        return self.group.invert(self)

    def __pow__(self, n: int) -> "Element":
        return Element(self.group, _pow(self.group.spec, self.form, n))

    @property
    def norm(self) -> int:
        return _norm(self.group.spec, self.form)

    @property
    def is_identity(self) -> bool:
        return _is_id(self.group.spec, self.form)

    def sort_key(self) -> tuple:
        w = _lex_word(self.group.spec, self.form)
        return (len(w), w)

    def __repr__(self):
        return f"Element({self.group.render(self)!r})"

    def __lt__(self, other: "Element") -> bool:
        return self.sort_key() < other.sort_key()


class Group:
    """A concrete group over a validated GroupSpec, with letter tables."""

    def __init__(self, spec: GroupSpec):
        validate_spec(spec)
        self.spec = spec
        self.labels = spec_labels(spec)
        self._label_index = {lab: i for i, lab in enumerate(self.labels)}
        # letters in code order: a, a^-1, b, b^-1, ...
        self._letters: list[Element] = []
        self.letter_names: list[str] = []
        for path, leaf in iter_leaves(spec):
            for k, lab in enumerate(leaf.labels):
                for sign, name in ((1, lab), (-1, lab + "^-1")):
                    form = _embed_letter(spec, path, sign * (k + 1))
                    self._letters.append(Element(self, form))
                    self.letter_names.append(name)
        self.identity = Element(self, _id_form(spec))
        self.leaf_paths = [path for path, _ in iter_leaves(spec)]

    # -- arithmetic ---------------------------------------------------------

    def multiply(self, g: Element, h: Element) -> Element:
        return Element(self, _mul(self.spec, g.form, h.form))

    def invert(self, g: Element) -> Element:
        return Element(self, _inv(self.spec, g.form))

    def element(self, form) -> Element:
        """Wrap a raw normal form after structural validation."""
        _validate_form(self.spec, form)
        return Element(self, form)

    @property
    def generators(self) -> list[Element]:
        """The symmetric generating set, in letter-code order."""
        return list(self._letters)

    def generator(self, label: str, sign: int = 1) -> Element:
        try:
            i = self._label_index[label]
        except KeyError:
            raise GroupError(
                f"unknown generator {label!r}; known: {', '.join(self.labels)}"
            ) from None
        return self._letters[2 * i + (0 if sign > 0 else 1)]

    # -- words --------------------------------------------------------------

    def word_to_element(self, word: Union[str, list[str]]) -> Element:
        """Evaluate a whitespace-separated word; ``x^-1`` and ``x^k`` allowed."""
        tokens = word.split() if isinstance(word, str) else list(word)
        acc = _id_form(self.spec)
        for tok in tokens:
            lab, exp = _parse_token(tok)
            if lab == "1":
                continue
            if lab not in self._label_index:
                raise GroupError(
                    f"unknown generator {lab!r}; known: {', '.join(self.labels)}"
                )
            base = self._letters[2 * self._label_index[lab]].form
            acc = _mul(self.spec, acc, _pow(self.spec, base, exp))
        return Element(self, acc)

    def render(self, g: Element) -> str:
        """Canonical word with collapsed runs; identity renders as ``1``."""
        codes = _lex_word(self.spec, g.form)
        if not codes:
            return "1"
        out = []
        i = 0
        while i < len(codes):
            j = i
            while j < len(codes) and codes[j] == codes[i]:
                j += 1
            lab = self.labels[codes[i] // 2]
            sign = -1 if codes[i] % 2 else 1
            exp = sign * (j - i)
            out.append(lab if exp == 1 else f"{lab}^{exp}")
            i = j
        return " ".join(out)

    # -- coset plumbing for peripheral structures ----------------------------

    def leaf_of_index(self, leaf_index: int) -> GroupSpec:
        paths = self.leaf_paths
        if not 0 <= leaf_index < len(paths):
            raise GroupError(f"leaf index {leaf_index} out of range")
        return dict(iter_leaves(self.spec))[paths[leaf_index]]

    def strip_trailing_factor(self, g: Element, leaf_index: int) -> Element:
        """Left-coset representative of ``g`` modulo the given leaf factor.

        This is the unique shortest element of ``g . P``: the maximal trailing
        chunk of ``g`` lying in the factor is removed.
        """
        path = self.leaf_paths[leaf_index]
        rep, _ = _strip_trailing(self.spec, g.form, path)
        return Element(self, rep)

    def __repr__(self):
        return f"Group({self.spec!r})"


def _parse_token(tok: str) -> tuple[str, int]:
    if "^" in tok:
        lab, _, exp = tok.partition("^")
        try:
            return lab, int(exp)
        except ValueError:
            raise GroupError(f"bad exponent in token {tok!r}") from None
    return tok, 1


# ---------------------------------------------------------------------------
# Peripheral and subgroup specifications


@dataclass(frozen=True)
class PeripheralSpec:
    """Free-product leaf factors whose cosets carry horospheres (may be empty)."""

    leaf_indices: tuple[int, ...] = ()

    def validate(self, group: Group) -> None:
        n = len(group.leaf_paths)
        seen = set()
        for i in self.leaf_indices:
            if not 0 <= i < n:
                raise GroupError(f"peripheral leaf index {i} out of range (0..{n-1})")
            if i in seen:
                raise GroupError(f"peripheral leaf index {i} repeated")
            seen.add(i)

    @property
    def is_empty(self) -> bool:
        return not self.leaf_indices


class SubgroupSpec:
    """Finitely generated subgroup, stored with a symmetrized generator list."""

    def __init__(self, generators: list[Element]):
        if not generators:
            raise GroupError("subgroup needs at least one generator")
        group = generators[0].group
        sym: dict[tuple, Element] = {}
        for g in generators:
            if g.is_identity:
                raise GroupError("subgroup generators must be nontrivial")
            sym[g.form] = g
            gi = group.invert(g)
            sym[gi.form] = gi
        self.group = group
        self.generators = sorted(sym.values(), key=Element.sort_key)

    @classmethod
    def from_words(cls, group: Group, words: list[str]) -> "SubgroupSpec":
        return cls([group.word_to_element(w) for w in words])

    def __repr__(self):
        gens = ", ".join(g.group.render(g) for g in self.generators)
        return f"SubgroupSpec({gens})"
