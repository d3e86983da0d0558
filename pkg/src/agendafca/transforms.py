"""Probability transforms of masses, importance tables and weighted clustering."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Literal, Mapping, Sequence

from .evidential import TOL, MassError, MassFunction, account_blocks, block_accounts, plausibility_of
from .ledger import ManyValuedContext

Level = Literal["feature", "account"]
Method = Literal["pignistic", "plausibility"]


@dataclass(frozen=True)
class ImportanceTable:
    level: Level
    weights: Mapping[str, float] = field(compare=False)

    def __post_init__(self):
        if self.level not in ("feature", "account"):
            raise ValueError(f"unknown level {self.level!r}")
        weights = {k: float(v) for k, v in dict(self.weights).items()}
        if any(v < -TOL for v in weights.values()):
            raise ValueError("importance weights must be nonnegative")
        object.__setattr__(self, "weights", weights)

    def __getitem__(self, key: str) -> float:
        return self.weights[key]

    def __eq__(self, other):
        if not isinstance(other, ImportanceTable):
            return NotImplemented
        return self.level == other.level and self.weights == other.weights

    def total(self) -> float:
        return math.fsum(self.weights.values())

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["id", "weight"])
        for k, v in self.weights.items():
            writer.writerow([k, repr(v)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, level: Level) -> "ImportanceTable":
        reader = csv.reader(io.StringIO(text))
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["id", "weight"]:
            raise ValueError("importance CSV must start with header 'id,weight'")
        weights = {}
        for row in reader:
            if not row:
                continue
            if len(row) != 2:
                raise ValueError(f"bad importance row {row!r}")
            weights[row[0]] = float(row[1])
        return cls(level, weights)


def _require_normalized(m: MassFunction) -> None:
    if m.conflict:
        raise MassError("transform undefined for a mass with weight on the empty set")


def pignistic(m: MassFunction) -> ImportanceTable:
    _require_normalized(m)
    bet = {s: 0.0 for s in m.universe}
    for y, w in m.items():
        share = w / len(y)
        for s in y:
            bet[s] += share
    return ImportanceTable("feature", bet)


def plausibility_transform(m: MassFunction) -> ImportanceTable:
    _require_normalized(m)
    pl = {s: plausibility_of(m, {s}) for s in m.universe}
    total = math.fsum(pl.values())
    return ImportanceTable("feature", {s: v / total for s, v in pl.items()})


def account_importance(m: MassFunction, method: Method) -> ImportanceTable:
    """Importance per account for a mass whose focal sets are unions of blocks.

    Pignistic weights are summed over each block.  The plausibility
    variant takes pl of the whole block and normalizes over accounts.
    """
    _require_normalized(m)
    for y in m.focal:
        if block_accounts(m, y) is None:
            raise MassError(f"focal set splits an account block: {sorted(y)[:5]}")
    blocks = account_blocks(m.universe)
    accounts = list(dict.fromkeys(f.rpartition("#")[0] for f in m.universe))
    if method == "pignistic":
        bet = pignistic(m).weights
        return ImportanceTable("account", {a: math.fsum(bet[f] for f in blocks[a]) for a in accounts})
    if method == "plausibility":
        pl = {a: plausibility_of(m, blocks[a]) for a in accounts}
        total = math.fsum(pl.values())
        return ImportanceTable("account", {a: v / total for a, v in pl.items()})
    raise ValueError(f"unknown method {method!r}")


def weighted_dissimilarity(mvc: ManyValuedContext, w: ImportanceTable, a: str, b: str) -> float:
    missing = [x for x in mvc.accounts if x not in w.weights]
    if missing:
        raise ValueError(f"importance table lacks accounts {missing[:5]}")
    va, vb = mvc.vector(a), mvc.vector(b)
    return math.fsum(w[x] * abs(p - q) for x, p, q in zip(mvc.accounts, va, vb))


@dataclass(frozen=True)
class FlatClustering:
    threshold: float
    clusters: tuple[tuple[str, ...], ...]

    def to_json(self) -> dict:
        return {"threshold": self.threshold, "clusters": [list(c) for c in self.clusters]}

    def label_of(self, process: str) -> int:
        for i, c in enumerate(self.clusters):
            if process in c:
                return i
        raise KeyError(process)


def dissimilarity_matrix(mvc: ManyValuedContext, w: ImportanceTable) -> list[list[float]]:
    n = len(mvc.processes)
    d = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            d[i][j] = d[j][i] = weighted_dissimilarity(mvc, w, mvc.processes[i], mvc.processes[j])
    return d


def agglomerative_cluster(
    mvc: ManyValuedContext,
    w: ImportanceTable,
    threshold: float,
    processes: Sequence[str] | None = None,
) -> FlatClustering:
    """Average-linkage agglomeration, merging while the closest pair is within ``threshold``.

    Pairs at equal linkage (to 1e-12) merge in lexicographic order of
    their member positions, so results do not depend on float noise.
    """
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    if processes is not None:
        mvc = mvc.restrict(processes)
    d = dissimilarity_matrix(mvc, w)
    clusters: list[tuple[int, ...]] = [(i,) for i in range(len(mvc.processes))]

    def linkage(c1: tuple[int, ...], c2: tuple[int, ...]) -> float:
        return math.fsum(d[i][j] for i in c1 for j in c2) / (len(c1) * len(c2))

    while len(clusters) > 1:
        best = None
        for x in range(len(clusters)):
            for y in range(x + 1, len(clusters)):
                dist = linkage(clusters[x], clusters[y])
                if best is None or dist < best[0] - 1e-12:
                    best = (dist, x, y)
        dist, x, y = best
        if dist > threshold + 1e-12:
            break
        merged = tuple(sorted(clusters[x] + clusters[y]))
        clusters = [c for k, c in enumerate(clusters) if k not in (x, y)] + [merged]
        clusters.sort()
    names = mvc.processes
    return FlatClustering(threshold, tuple(tuple(names[i] for i in c) for c in sorted(clusters)))
