"""Dempster-Shafer mass functions over feature subsets (non-crisp agendas).

A ``MassFunction`` carries its universe explicitly so that the vacuous
focal set and the complement are always well defined.  Focal sets are
frozensets; serialization sorts them by the universe order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Literal, Mapping, Sequence

from .agendas import SubstitutionModel, substitute

TOL = 1e-9

OrderKind = Literal["pl", "q", "upset"]
SubstRule = Literal["disjunctive", "conjunctive-normalized", "conjunctive-unnormalized"]


class MassError(ValueError):
    pass


@dataclass(frozen=True)
class MassFunction:
    """Finitely supported map from subsets of ``universe`` to weights.

    Weights given for the same set are summed and exact zeros dropped.
    Construction does not enforce normalization: use ``validate_mass``.
    """

    universe: tuple[str, ...]
    focal: Mapping[frozenset, float] = field(compare=False)

    def __post_init__(self):
        universe = tuple(self.universe)
        if len(set(universe)) != len(universe):
            raise MassError("universe elements must be unique")
        uset = frozenset(universe)
        merged: dict[frozenset, float] = {}
        for s, w in dict(self.focal).items():
            s = frozenset(s)
            if not s <= uset:
                raise MassError(f"focal set has elements outside the universe: {sorted(s - uset)[:5]}")
            merged[s] = merged.get(s, 0.0) + float(w)
        object.__setattr__(self, "universe", universe)
        object.__setattr__(self, "focal", {s: w for s, w in merged.items() if w != 0})

    @classmethod
    def from_pairs(cls, universe: Sequence[str], pairs: Iterable[tuple[Iterable[str], float]]) -> "MassFunction":
        focal: dict[frozenset, float] = {}
        for s, w in pairs:
            s = frozenset(s)
            focal[s] = focal.get(s, 0.0) + w
        return cls(tuple(universe), focal)

    @classmethod
    def vacuous(cls, universe: Sequence[str]) -> "MassFunction":
        return cls(tuple(universe), {frozenset(universe): 1.0})

    @classmethod
    def crisp(cls, universe: Sequence[str], y: Iterable[str]) -> "MassFunction":
        return cls(tuple(universe), {frozenset(y): 1.0})

    @property
    def frame(self) -> frozenset[str]:
        return frozenset(self.universe)

    @property
    def conflict(self) -> float:
        """Mass carried by the empty set (unnormalized conjunctive results)."""
        return self.focal.get(frozenset(), 0.0)

    def __getitem__(self, s: Iterable[str]) -> float:
        return self.focal.get(frozenset(s), 0.0)

    def __len__(self) -> int:
        return len(self.focal)

    def items(self) -> list[tuple[frozenset, float]]:
        """Focal sets with weights in canonical order."""
        return sorted(self.focal.items(), key=lambda kv: self.sort_key(kv[0]))

    def sort_key(self, s: frozenset) -> tuple:
        pos = {u: i for i, u in enumerate(self.universe)}
        return (len(s), sorted(pos[x] for x in s))

    def __eq__(self, other):
        if not isinstance(other, MassFunction):
            return NotImplemented
        return self.frame == other.frame and self.focal == other.focal

    def isclose(self, other: "MassFunction", tol: float = TOL) -> bool:
        if self.frame != other.frame:
            return False
        keys = set(self.focal) | set(other.focal)
        return all(abs(self[k] - other[k]) <= tol for k in keys)

    def to_json(self) -> dict:
        pos = {u: i for i, u in enumerate(self.universe)}
        return {
            "universe": list(self.universe),
            "focal": [{"set": sorted(s, key=pos.__getitem__), "w": w} for s, w in self.items()],
        }

    def __repr__(self) -> str:
        body = ", ".join(f"{sorted(s)}: {w:.6g}" for s, w in self.items())
        return f"MassFunction({{{body}}})"


def _require_same_frame(m1: MassFunction, m2: MassFunction) -> None:
    if m1.frame != m2.frame:
        raise MassError("mass functions are defined on different universes")


def validate_mass(m: MassFunction, tol: float = TOL) -> list[str]:
    problems = []
    for s, w in m.items():
        if w < 0:
            problems.append(f"negative weight {w} on {sorted(s)}")
        elif w > 1 + tol:
            problems.append(f"weight {w} on {sorted(s)} exceeds 1")
    total = math.fsum(m.focal.values())
    if abs(total - 1) > tol:
        problems.append(f"weights sum to {total}, expected 1")
    return problems


def belief_of(m: MassFunction, y: Iterable[str]) -> float:
    y = frozenset(y)
    return math.fsum(w for s, w in m.focal.items() if s <= y)


def plausibility_of(m: MassFunction, y: Iterable[str]) -> float:
    y = frozenset(y)
    return math.fsum(w for s, w in m.focal.items() if s & y)


def quality_of(m: MassFunction, y: Iterable[str]) -> float:
    y = frozenset(y)
    return math.fsum(w for s, w in m.focal.items() if s >= y)


def mass_from_belief(bel: Mapping[frozenset, float], universe: Sequence[str], tol: float = TOL) -> MassFunction:
    """Möbius inversion of a belief function given on every subset of ``universe``.

    Subsets missing from ``bel`` raise; the transform runs over bitmasks in
    O(n 2^n), so universes are limited to 16 elements.
    """
    universe = tuple(universe)
    n = len(universe)
    if n > 16:
        raise MassError("mass_from_belief supports universes of at most 16 elements")
    size = 1 << n
    values = [0.0] * size
    for mask in range(size):
        s = frozenset(universe[i] for i in range(n) if mask >> i & 1)
        try:
            values[mask] = float(bel[s])
        except KeyError:
            raise MassError(f"belief missing for subset {sorted(s)}") from None
    if abs(values[size - 1] - 1) > tol:
        raise MassError("not a belief function: bel(universe) != 1")
    for mask in range(size):
        for i in range(n):
            if mask >> i & 1 and values[mask ^ (1 << i)] > values[mask] + tol:
                raise MassError("not a belief function: not monotone")
    masses = values[:]
    for i in range(n):
        bit = 1 << i
        for mask in range(size):
            if mask & bit:
                masses[mask] -= masses[mask ^ bit]
    focal = {}
    for mask, w in enumerate(masses):
        if w < -tol:
            raise MassError("not a belief function: negative Möbius mass")
        if abs(w) > tol:
            focal[frozenset(universe[i] for i in range(n) if mask >> i & 1)] = w
    return MassFunction(universe, focal)


@dataclass(frozen=True)
class MassKind:
    simple: bool
    consonant: bool
    crisp: bool


def classify_mass(m: MassFunction) -> MassKind:
    sets = [s for s, _ in m.items()]
    non_frame = [s for s in sets if s != m.frame]
    consonant = all(a <= b or b <= a for a, b in itertools.combinations(sets, 2))
    return MassKind(simple=len(non_frame) <= 1, consonant=consonant, crisp=len(sets) == 1)


def irrelevance_mass(universe: Sequence[str], y: Iterable[str], alpha: float) -> MassFunction:
    """Agent with trust ``alpha`` deems ``y`` irrelevant: m(X \\ y) = alpha, m(X) = 1 - alpha."""
    if not 0 <= alpha <= 1:
        raise MassError(f"alpha must lie in [0, 1], got {alpha}")
    frame = frozenset(universe)
    y = frozenset(y)
    if not y <= frame:
        raise MassError("irrelevant set is not inside the universe")
    return MassFunction.from_pairs(tuple(universe), [(frame - y, alpha), (frame, 1 - alpha)])


# -- combination rules ---------------------------------------------------


def _combine(
    m1: MassFunction,
    m2: MassFunction,
    target: Callable[[frozenset, frozenset], frozenset],
) -> dict[frozenset, float]:
    acc: dict[frozenset, list[float]] = {}
    for s1, w1 in m1.items():
        for s2, w2 in m2.items():
            acc.setdefault(target(s1, s2), []).append(w1 * w2)
    return {s: math.fsum(ws) for s, ws in acc.items()}


def _normalize(universe: tuple[str, ...], raw: dict[frozenset, float]) -> MassFunction:
    empty = frozenset()
    conflict = raw.pop(empty, 0.0)
    denom = 1.0 - conflict
    if denom <= TOL:
        raise MassError("total conflict: the combination is undefined")
    # divide by the non-conflicting total directly to avoid 1 - k rounding
    denom = math.fsum(raw.values())
    return MassFunction(universe, {s: w / denom for s, w in raw.items()})


def combine_dempster(m1: MassFunction, m2: MassFunction) -> MassFunction:
    _require_same_frame(m1, m2)
    return _normalize(m1.universe, _combine(m1, m2, frozenset.intersection))


def combine_conjunctive_unnormalized(m1: MassFunction, m2: MassFunction) -> MassFunction:
    _require_same_frame(m1, m2)
    return MassFunction(m1.universe, _combine(m1, m2, frozenset.intersection))


def combine_disjunctive(m1: MassFunction, m2: MassFunction) -> MassFunction:
    _require_same_frame(m1, m2)
    return MassFunction(m1.universe, _combine(m1, m2, frozenset.union))


def combine_substitution(
    m1: MassFunction,
    m2: MassFunction,
    model: SubstitutionModel,
    rule: SubstRule,
    agents: tuple[str, str] = ("j1", "j2"),
) -> MassFunction:
    """Combine after each agent substitutes issues in the other's focal sets.

    For focal sets Z1 of ``agents[0]`` and Z2 of ``agents[1]``, the weight
    goes to Y1 | Y2 (disjunctive) or Y1 & Y2 (conjunctive), where Y1 is
    agents[1]'s substituted version of Z1 and Y2 agents[0]'s version of Z2.
    """
    _require_same_frame(m1, m2)
    j1, j2 = agents
    sub1 = {s: substitute(model, j2, s) for s in m1.focal}
    sub2 = {s: substitute(model, j1, s) for s in m2.focal}
    if rule == "disjunctive":
        op = frozenset.union
    elif rule in ("conjunctive-normalized", "conjunctive-unnormalized"):
        op = frozenset.intersection
    else:
        raise MassError(f"unknown substitution rule {rule!r}")
    raw = _combine(m1, m2, lambda z1, z2: op(sub1[z1], sub2[z2]))
    if rule == "conjunctive-normalized":
        return _normalize(m1.universe, raw)
    return MassFunction(m1.universe, raw)


def combine_many(masses: Sequence[MassFunction], rule: Callable[[MassFunction, MassFunction], MassFunction]) -> MassFunction:
    if not masses:
        raise MassError("nothing to combine")
    result = masses[0]
    for m in masses[1:]:
        result = rule(result, m)
    return result


# -- orderings -----------------------------------------------------------


@dataclass(frozen=True)
class OrderResult:
    holds: bool
    witness: frozenset | None = None  # a set Y (pl, q) or a family of sets V (upset)
    gap: float = 0.0  # lhs - rhs at the witness

    def __bool__(self) -> bool:
        return self.holds


def _atoms(sets: Iterable[frozenset], frame: frozenset) -> list[frozenset]:
    """Cells of the partition of ``frame`` by membership in each of ``sets``."""
    sets = list(sets)
    cells: dict[tuple[bool, ...], set] = {}
    for x in frame:
        cells.setdefault(tuple(x in s for s in sets), set()).add(x)
    return sorted((frozenset(c) for c in cells.values()), key=lambda c: sorted(c))


MAX_ATOMS = 20
MAX_UPSET_POSET = 24


def _signature_subsets(m1: MassFunction, m2: MassFunction) -> Iterator[frozenset]:
    """Subsets Y representing every distinct (pl, q) behaviour.

    Both pl(Y) and q(Y) depend only on which cells of the focal-set
    partition Y meets, so unions of whole cells cover all cases.
    """
    cells = _atoms(set(m1.focal) | set(m2.focal), m1.frame)
    if len(cells) > MAX_ATOMS:
        raise MassError(f"too many focal-set cells ({len(cells)}) for exact ordering check")
    for r in range(len(cells) + 1):
        for combo in itertools.combinations(cells, r):
            yield frozenset().union(*combo)


def _upsets(poset: Sequence[frozenset]) -> Iterator[frozenset]:
    """Every up-closed subfamily of ``poset`` under inclusion."""
    n = len(poset)
    if n > MAX_UPSET_POSET:
        raise MassError(f"too many focal sets ({n}) for exact up-set enumeration")
    order = sorted(range(n), key=lambda i: -len(poset[i]))
    above = [
        [j for j in range(n) if j != i and poset[i] < poset[j]]
        for i in range(n)
    ]

    def rec(pos: int, chosen: frozenset) -> Iterator[frozenset]:
        if pos == n:
            yield chosen
            return
        i = order[pos]
        yield from rec(pos + 1, chosen)
        # larger sets are decided first, so the supersets are already settled
        if all(j in chosen for j in above[i]):
            yield from rec(pos + 1, chosen | {i})

    for idx in rec(0, frozenset()):
        yield frozenset(poset[i] for i in idx)


def mass_order(m1: MassFunction, m2: MassFunction, kind: OrderKind, tol: float = TOL) -> OrderResult:
    """Decide m1 <= m2 in the pl-, q- or up-set order, with a witness on failure.

    ``pl`` and ``q`` range over unions of cells of the focal-set partition,
    which realise every value either function takes.  ``upset`` ranges
    over up-closed families of the union of both masses' focal sets: sets
    outside that poset contribute zero to both sums, and every up-closed
    family of the poset is the trace of an up-set of the full powerset.
    The empty set, if focal, is the bottom of the poset.  The witness is
    the one with the largest violation; ties go to the first in
    enumeration order.
    """
    _require_same_frame(m1, m2)
    worst: OrderResult = OrderResult(True)
    if kind in ("pl", "q"):
        fn = plausibility_of if kind == "pl" else quality_of
        for y in _signature_subsets(m1, m2):
            gap = fn(m1, y) - fn(m2, y)
            if gap > tol and gap > worst.gap:
                worst = OrderResult(False, y, gap)
        return worst
    if kind == "upset":
        poset = sorted(set(m1.focal) | set(m2.focal), key=m1.sort_key)
        for fam in _upsets(poset):
            gap = math.fsum(m1[s] for s in fam) - math.fsum(m2[s] for s in fam)
            if gap > tol and gap > worst.gap:
                worst = OrderResult(False, fam, gap)
        return worst
    raise MassError(f"unknown ordering {kind!r}")


# -- configuration files -------------------------------------------------


def load_mass(data: Mapping, features: Sequence[str] | None = None, intervals: int | None = None) -> MassFunction:
    """Read ``{universe, focal: [{set, w}], account_level}``.

    Account-level files name accounts; every account expands to its block
    ``account#1 .. account#s``.  If ``features`` is given it becomes the
    universe (and must contain the file's universe after expansion).
    """
    account_level = bool(data.get("account_level", False))

    def expand(items: Iterable[str]) -> list[str]:
        items = list(items)
        if not account_level:
            return items
        if intervals is None:
            raise MassError("account-level mass needs the number of intervals")
        return [f"{a}#{k}" for a in items for k in range(1, intervals + 1)]

    universe = expand(data["universe"])
    if features is not None:
        missing = set(universe) - set(features)
        if missing:
            raise MassError(f"mass universe not in context features: {sorted(missing)[:5]}")
        if set(features) != set(universe):
            raise MassError("mass universe differs from the context features")
        universe = list(features)
    pairs = [(expand(entry["set"]), float(entry["w"])) for entry in data["focal"]]
    return MassFunction.from_pairs(universe, pairs)


def account_blocks(universe: Iterable[str]) -> dict[str, frozenset[str]]:
    blocks: dict[str, set[str]] = {}
    for f in universe:
        account, sep, k = f.rpartition("#")
        if not sep or not k.isdigit():
            raise MassError(f"feature {f!r} is not of the form account#k")
        blocks.setdefault(account, set()).add(f)
    return {a: frozenset(s) for a, s in blocks.items()}


def block_accounts(m: MassFunction, s: frozenset) -> list[str] | None:
    """Accounts whose blocks exactly make up ``s``, or None if a block is split."""
    blocks = account_blocks(m.universe)
    order = list(dict.fromkeys(f.rpartition("#")[0] for f in m.universe))
    touched = [a for a in order if blocks[a] & s]
    if any(not blocks[a] <= s for a in touched):
        return None
    return touched


def mass_to_account_json(m: MassFunction) -> dict | None:
    """Account-level form of ``m`` when every focal set is a union of blocks."""
    order = list(dict.fromkeys(f.rpartition("#")[0] for f in m.universe))
    focal = []
    for s, w in m.items():
        accts = block_accounts(m, s)
        if accts is None:
            return None
        focal.append({"set": accts, "w": w})
    return {"universe": order, "focal": focal, "account_level": True}
