"""Stability-based categorization under a non-crisp agenda.

A mass over feature subsets induces a probability over the induced
contexts of a base context.  The stability index of an object set is the
probability that it is Galois-stable in the drawn context.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .context import ContextError, FormalContext, _covering_edges, enumerate_concepts, induced_context
from .evidential import TOL, MassError, MassFunction

BRUTEFORCE_MAX_OBJECTS = 16


@dataclass(frozen=True)
class ContextDistribution:
    base: FormalContext
    weights: Mapping[frozenset, float] = field(compare=False)

    def __post_init__(self):
        feats = frozenset(self.base.features)
        weights = {}
        for y, w in dict(self.weights).items():
            y = frozenset(y)
            if not y <= feats:
                raise ContextError(f"focal agenda uses unknown features {sorted(y - feats)[:5]}")
            if w < 0:
                raise ValueError(f"negative weight {w}")
            if w:
                weights[y] = weights.get(y, 0.0) + float(w)
        if not weights:
            raise ValueError("a context distribution needs at least one weighted agenda")
        total = math.fsum(weights.values())
        if abs(total - 1) > TOL:
            raise ValueError(f"weights sum to {total}, expected 1")
        object.__setattr__(self, "weights", weights)

    def items(self) -> list[tuple[frozenset, float]]:
        pos = {f: i for i, f in enumerate(self.base.features)}
        return sorted(self.weights.items(), key=lambda kv: (len(kv[0]), sorted(pos[x] for x in kv[0])))

    def contexts(self) -> list[tuple[FormalContext, float]]:
        return [(induced_context(self.base, y), w) for y, w in self.items()]


def induced_context_mass(base: FormalContext, m: MassFunction) -> ContextDistribution:
    if m.frame != frozenset(base.features):
        raise MassError("mass universe differs from the context features")
    if m.conflict:
        raise MassError("mass carries weight on the empty set")
    return ContextDistribution(base, dict(m.focal))


def _object_mask(dist: ContextDistribution, g: Iterable[str]) -> int:
    return dist.base.object_mask(g)


def _stability_of_mask(dist: ContextDistribution, masks: list[tuple[int, float]], gmask: int) -> float:
    ctx = dist.base
    shared = ctx.intent_mask(gmask)
    # g is stable in the Y-context iff the objects having all of int(g) & Y are exactly g
    return math.fsum(w for ymask, w in masks if ctx.extent_mask(shared & ymask) == gmask)


def _focal_masks(dist: ContextDistribution) -> list[tuple[int, float]]:
    return [(dist.base.feature_mask(y), w) for y, w in dist.items()]


def stability_index(dist: ContextDistribution, g: Iterable[str]) -> float:
    return _stability_of_mask(dist, _focal_masks(dist), _object_mask(dist, g))


def stability_index_bruteforce(dist: ContextDistribution, g: Iterable[str]) -> float:
    """Reference implementation on plain sets, one focal context at a time."""
    base = dist.base
    if len(base.objects) > BRUTEFORCE_MAX_OBJECTS:
        raise ValueError(f"brute force limited to {BRUTEFORCE_MAX_OBJECTS} objects")
    g = set(g)
    unknown = g - set(base.objects)
    if unknown:
        raise ContextError(f"unknown objects {sorted(unknown)[:5]}")
    incidence = set(base.pairs())
    total = 0.0
    for y, w in dist.weights.items():
        common = {f for f in y if all((a, f) in incidence for a in g)}
        closed = {a for a in base.objects if all((a, f) in incidence for f in common)}
        if closed == g:
            total += w
    return total


@dataclass(frozen=True)
class BetaClass:
    extent: frozenset[str]
    intent: frozenset[str]
    index: float


@dataclass(frozen=True)
class BetaCategorization:
    beta: float
    base: FormalContext
    classes: tuple[BetaClass, ...]
    edges: tuple[tuple[int, int], ...]  # covering pairs (smaller, larger)

    def extents(self) -> list[frozenset[str]]:
        return [c.extent for c in self.classes]

    def to_json(self) -> dict:
        objs, feats = self.base.objects, self.base.features
        return {
            "beta": self.beta,
            "classes": [
                {
                    "extent": [a for a in objs if a in c.extent],
                    "intent": [f for f in feats if f in c.intent],
                    "index": c.index,
                }
                for c in self.classes
            ],
            "edges": [list(e) for e in self.edges],
        }


def _mask_key(mask: int) -> tuple:
    bits = [i for i in range(mask.bit_length()) if mask >> i & 1]
    return (len(bits), bits)


def beta_categorization(dist: ContextDistribution, beta: float) -> BetaCategorization:
    """Closed object sets with stability index at least ``beta``.

    Only extents of the focal induced contexts can have positive index,
    and each of them is already closed in the base context.  With
    ``beta <= 0`` every set qualifies, so the classes are all base extents.
    """
    if not 0 <= beta <= 1:
        raise ValueError(f"beta must lie in [0, 1], got {beta}")
    base = dist.base
    masks = _focal_masks(dist)
    if beta <= 0:
        candidates = set(enumerate_concepts(base).extents)
    else:
        candidates = set()
        for y, _ in dist.items():
            candidates.update(enumerate_concepts(induced_context(base, y)).extents)
    chosen = {}
    for gmask in sorted(candidates):
        if _stability_of_mask(dist, masks, gmask) < beta - TOL:
            continue
        closed = base.extent_mask(base.intent_mask(gmask))
        if closed not in chosen:
            chosen[closed] = _stability_of_mask(dist, masks, closed)
    order = sorted(chosen, key=_mask_key)
    classes = tuple(
        BetaClass(base.objects_of(e), base.features_of(base.intent_mask(e)), chosen[e]) for e in order
    )
    return BetaCategorization(beta, base, classes, tuple(_covering_edges(order)))


def most_likely_categorization(dist: ContextDistribution) -> FormalContext:
    pos = {f: i for i, f in enumerate(dist.base.features)}
    best = min(
        dist.weights.items(),
        key=lambda kv: (-round(kv[1], 12), -len(kv[0]), sorted(pos[f] for f in kv[0])),
    )
    return induced_context(dist.base, best[0])
