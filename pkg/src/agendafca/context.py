"""Binary formal contexts, Galois derivations and concept lattices.

Extents and intents are handled internally as integer bitsets over the
object and feature index orders fixed at construction.  Every public value
is immutable, so contexts and lattices can be shared between threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Literal, Sequence

Side = Literal["object", "feature"]


class ContextError(ValueError):
    """Raised for unknown identifiers or incompatible contexts."""


def _iter_bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True)
class FormalContext:
    """A triple (objects, features, incidence).

    ``rows[i]`` is the feature bitset of object ``i`` and ``cols[k]`` the
    object bitset of feature ``k``; the two are transposes of each other.
    """

    objects: tuple[str, ...]
    features: tuple[str, ...]
    rows: tuple[int, ...]
    cols: tuple[int, ...] = field(default=(), compare=False, repr=False)
    _obj_index: dict = field(default=None, init=False, compare=False, repr=False)
    _feat_index: dict = field(default=None, init=False, compare=False, repr=False)

    def __post_init__(self):
        objects = tuple(self.objects)
        features = tuple(self.features)
        object.__setattr__(self, "objects", objects)
        object.__setattr__(self, "features", features)
        if len(set(objects)) != len(objects):
            raise ContextError("object identifiers must be unique")
        if len(set(features)) != len(features):
            raise ContextError("feature identifiers must be unique")
        if len(self.rows) != len(objects):
            raise ContextError("one feature bitset per object is required")
        full = (1 << len(features)) - 1
        rows = tuple(int(r) for r in self.rows)
        if any(r & ~full for r in rows):
            raise ContextError("row bitset refers to a feature index out of range")
        cols = [0] * len(features)
        for i, r in enumerate(rows):
            for k in _iter_bits(r):
                cols[k] |= 1 << i
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", tuple(cols))
        object.__setattr__(self, "_obj_index", {o: i for i, o in enumerate(objects)})
        object.__setattr__(self, "_feat_index", {f: k for k, f in enumerate(features)})

    @classmethod
    def from_pairs(
        cls,
        objects: Sequence[str],
        features: Sequence[str],
        pairs: Iterable[tuple[str, str]],
    ) -> "FormalContext":
        """Build a context from (object, feature) incidence pairs."""
        oi = {o: i for i, o in enumerate(objects)}
        fi = {f: k for k, f in enumerate(features)}
        rows = [0] * len(objects)
        for o, f in pairs:
            try:
                rows[oi[o]] |= 1 << fi[f]
            except KeyError as exc:
                raise ContextError(f"unknown identifier in incidence: {exc.args[0]!r}") from None
        return cls(tuple(objects), tuple(features), tuple(rows))

    # -- bitset helpers -------------------------------------------------

    @property
    def all_objects(self) -> int:
        return (1 << len(self.objects)) - 1

    @property
    def all_features(self) -> int:
        return (1 << len(self.features)) - 1

    def object_mask(self, objs: Iterable[str]) -> int:
        mask = 0
        for o in objs:
            try:
                mask |= 1 << self._obj_index[o]
            except KeyError:
                raise ContextError(f"unknown object {o!r}") from None
        return mask

    def feature_mask(self, feats: Iterable[str]) -> int:
        mask = 0
        for f in feats:
            try:
                mask |= 1 << self._feat_index[f]
            except KeyError:
                raise ContextError(f"unknown feature {f!r}") from None
        return mask

    def objects_of(self, mask: int) -> frozenset[str]:
        return frozenset(self.objects[i] for i in _iter_bits(mask))

    def features_of(self, mask: int) -> frozenset[str]:
        return frozenset(self.features[k] for k in _iter_bits(mask))

    def intent_mask(self, objmask: int) -> int:
        """Features shared by every object in ``objmask``."""
        result = self.all_features
        for i in _iter_bits(objmask):
            result &= self.rows[i]
            if not result:
                break
        return result

    def extent_mask(self, featmask: int) -> int:
        """Objects having every feature in ``featmask``."""
        result = self.all_objects
        for k in _iter_bits(featmask):
            result &= self.cols[k]
            if not result:
                break
        return result

    def has(self, obj: str, feat: str) -> bool:
        return bool(self.rows[self._obj_index[obj]] >> self._feat_index[feat] & 1)

    def pairs(self) -> list[tuple[str, str]]:
        return [
            (o, self.features[k])
            for i, o in enumerate(self.objects)
            for k in _iter_bits(self.rows[i])
        ]

    def restrict_objects(self, objs: Iterable[str]) -> "FormalContext":
        """Sub-context on the given objects, keeping the base object order."""
        wanted = self.object_mask(objs)
        keep = [i for i in range(len(self.objects)) if wanted >> i & 1]
        return FormalContext(
            tuple(self.objects[i] for i in keep),
            self.features,
            tuple(self.rows[i] for i in keep),
        )

    def to_json(self) -> dict:
        incidence = sorted(
            [i, k] for i in range(len(self.objects)) for k in _iter_bits(self.rows[i])
        )
        return {"objects": list(self.objects), "features": list(self.features), "incidence": incidence}

    @classmethod
    def from_json(cls, data: dict) -> "FormalContext":
        objects = list(data["objects"])
        features = list(data["features"])
        rows = [0] * len(objects)
        for i, k in data.get("incidence", []):
            if not (0 <= i < len(objects) and 0 <= k < len(features)):
                raise ContextError(f"incidence pair out of range: {[i, k]}")
            rows[i] |= 1 << k
        return cls(tuple(objects), tuple(features), tuple(rows))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True)


@dataclass(frozen=True)
class Concept:
    extent: frozenset[str]
    intent: frozenset[str]


@dataclass(frozen=True)
class ConceptLattice:
    """All concepts of a context, in lectic order of their intents.

    ``edges`` holds covering pairs ``(lower, upper)`` by extent inclusion.
    """

    context: FormalContext
    concepts: tuple[Concept, ...]
    extents: tuple[int, ...]
    intents: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    top: int
    bottom: int

    def __len__(self) -> int:
        return len(self.concepts)

    def index_of_extent(self, objs: Iterable[str]) -> int:
        mask = self.context.object_mask(objs)
        try:
            return self.extents.index(mask)
        except ValueError:
            raise ContextError("not the extent of a concept") from None

    def meet(self, i: int, j: int) -> int:
        return self.extents.index(self.extents[i] & self.extents[j])

    def join(self, i: int, j: int) -> int:
        ctx = self.context
        closed = ctx.extent_mask(ctx.intent_mask(self.extents[i] | self.extents[j]))
        return self.extents.index(closed)

    def leq(self, i: int, j: int) -> bool:
        return self.extents[i] & ~self.extents[j] == 0

    def to_json(self) -> dict:
        ctx = self.context
        return {
            "concepts": [
                {
                    "extent": [ctx.objects[i] for i in _iter_bits(e)],
                    "intent": [ctx.features[k] for k in _iter_bits(t)],
                }
                for e, t in zip(self.extents, self.intents)
            ],
            "edges": [list(e) for e in self.edges],
            "top": self.top,
            "bottom": self.bottom,
        }


# -- derivations --------------------------------------------------------


def _mask(ctx: FormalContext, side: Side, s: Iterable[str]) -> int:
    if side == "object":
        return ctx.object_mask(s)
    if side == "feature":
        return ctx.feature_mask(s)
    raise ContextError(f"side must be 'object' or 'feature', got {side!r}")


def derive(ctx: FormalContext, side: Side, s: Iterable[str]) -> frozenset[str]:
    """Galois derivation of an object set (side='object') or feature set."""
    mask = _mask(ctx, side, s)
    if side == "object":
        return ctx.features_of(ctx.intent_mask(mask))
    return ctx.objects_of(ctx.extent_mask(mask))


def closure(ctx: FormalContext, side: Side, s: Iterable[str]) -> frozenset[str]:
    mask = _mask(ctx, side, s)
    if side == "object":
        return ctx.objects_of(ctx.extent_mask(ctx.intent_mask(mask)))
    return ctx.features_of(ctx.intent_mask(ctx.extent_mask(mask)))


def is_galois_stable(ctx: FormalContext, g: Iterable[str]) -> bool:
    mask = ctx.object_mask(g)
    return ctx.extent_mask(ctx.intent_mask(mask)) == mask


def _covering_edges(extents: Sequence[int]) -> list[tuple[int, int]]:
    n = len(extents)
    below: list[list[int]] = [[] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i != j and extents[i] & ~extents[j] == 0:
                below[j].append(i)
    edges = []
    for j in range(n):
        strict = below[j]
        for i in strict:
            if not any(
                k != i and extents[i] & ~extents[k] == 0 for k in strict
            ):
                edges.append((i, j))
    return sorted(edges)


def next_closure_intents(ctx: FormalContext) -> Iterator[int]:
    """Yield every closed intent bitset in lectic order (Ganter's NextClosure)."""
    n = len(ctx.features)

    def close(mask: int) -> int:
        return ctx.intent_mask(ctx.extent_mask(mask))

    current = close(0)
    yield current
    full = ctx.all_features
    while current != full:
        for i in range(n - 1, -1, -1):
            bit = 1 << i
            if current & bit:
                continue
            prefix = current & (bit - 1)
            candidate = close(prefix | bit)
            # lectic step is valid iff no new feature appears before i
            if (candidate & ~current) & (bit - 1) == 0:
                current = candidate
                break
        else:  # pragma: no cover - full set is always reachable
            return
        yield current


def enumerate_concepts(ctx: FormalContext) -> ConceptLattice:
    intents = list(next_closure_intents(ctx))
    extents = [ctx.extent_mask(t) for t in intents]
    concepts = tuple(
        Concept(ctx.objects_of(e), ctx.features_of(t)) for e, t in zip(extents, intents)
    )
    top = extents.index(ctx.all_objects)
    bottom = intents.index(ctx.all_features)
    return ConceptLattice(
        context=ctx,
        concepts=concepts,
        extents=tuple(extents),
        intents=tuple(intents),
        edges=tuple(_covering_edges(extents)),
        top=top,
        bottom=bottom,
    )


# -- induced contexts and the information ordering -----------------------


def induced_context(ctx: FormalContext, y: Iterable[str]) -> FormalContext:
    """Restrict the feature set to ``y`` (kept in base order)."""
    ymask = ctx.feature_mask(y)
    keep = [k for k in range(len(ctx.features)) if ymask >> k & 1]
    rows = []
    for r in ctx.rows:
        nr = 0
        for new, old in enumerate(keep):
            if r >> old & 1:
                nr |= 1 << new
        rows.append(nr)
    return FormalContext(ctx.objects, tuple(ctx.features[k] for k in keep), tuple(rows))


def _check_compatible(p1: FormalContext, p2: FormalContext) -> None:
    if p1.objects != p2.objects:
        raise ContextError("contexts have different object sets")
    for f in set(p1.features) & set(p2.features):
        if p1.cols[p1._feat_index[f]] != p2.cols[p2._feat_index[f]]:
            raise ContextError(f"contexts disagree on incidence of feature {f!r}")


def info_leq(p1: FormalContext, p2: FormalContext) -> bool:
    _check_compatible(p1, p2)
    return set(p1.features) <= set(p2.features)


def info_combine(
    p1: FormalContext, p2: FormalContext, op: Literal["meet", "join"]
) -> FormalContext:
    _check_compatible(p1, p2)
    if op == "meet":
        shared = set(p2.features)
        feats = [f for f in p1.features if f in shared]
        return induced_context(p1, feats)
    if op == "join":
        extra = [f for f in p2.features if f not in p1._feat_index]
        feats = list(p1.features) + extra
        cols = [p1.cols[k] for k in range(len(p1.features))]
        cols += [p2.cols[p2._feat_index[f]] for f in extra]
        rows = [0] * len(p1.objects)
        for k, c in enumerate(cols):
            for i in _iter_bits(c):
                rows[i] |= 1 << k
        return FormalContext(p1.objects, tuple(feats), tuple(rows))
    raise ContextError(f"op must be 'meet' or 'join', got {op!r}")


def concept_leq(c1: Concept, c2: Concept) -> bool:
    return c1.extent <= c2.extent
