"""Crisp interrogative agendas, coalition operators and deliberation rules.

An agenda is a plain set of features.  Agendas are ordered by reverse
inclusion, so the agenda-lattice meet is set union and its join is set
intersection; every operator below is written directly on feature sets.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Literal, Mapping

from .context import FormalContext, induced_context
from .ledger import ScalingSpec, feature_name, scaled_features

Agenda = frozenset  # frozenset[str] of features

CoalitionMode = Literal[
    "common", "distributed", "box", "irrelevant-common", "irrelevant-distributed"
]
InducedMode = Literal["f1", "f2", "g1", "g2"]
CrispRule = Literal["common", "distributed", "subst-union", "subst-intersection"]


class AgendaError(ValueError):
    pass


@dataclass(frozen=True)
class RelevanceModel:
    """Which features each agent finds relevant (R) or explicitly irrelevant (U)."""

    features: frozenset[str]
    relevant: Mapping[str, frozenset[str]]
    irrelevant: Mapping[str, frozenset[str]] = field(default_factory=dict)

    def __post_init__(self):
        feats = frozenset(self.features)
        rel = {j: frozenset(v) for j, v in self.relevant.items()}
        irr = {j: frozenset(v) for j, v in self.irrelevant.items()}
        for j in irr:
            rel.setdefault(j, frozenset())
        for j in rel:
            irr.setdefault(j, frozenset())
            unknown = (rel[j] | irr[j]) - feats
            if unknown:
                raise AgendaError(f"agent {j!r} refers to unknown features {sorted(unknown)[:5]}")
            clash = rel[j] & irr[j]
            if clash:
                raise AgendaError(f"agent {j!r} marks features both relevant and irrelevant: {sorted(clash)[:5]}")
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "relevant", rel)
        object.__setattr__(self, "irrelevant", irr)

    @property
    def agents(self) -> frozenset[str]:
        return frozenset(self.relevant)

    def _coalition(self, coalition: Iterable[str]) -> frozenset[str]:
        c = frozenset(coalition)
        unknown = c - self.agents
        if unknown:
            raise AgendaError(f"unknown agents {sorted(unknown)}")
        return c


@dataclass(frozen=True)
class SubstitutionModel:
    """Triples (n, j, m): agent j would substitute issue m with issue n."""

    triples: frozenset[tuple[str, str, str]]

    def __post_init__(self):
        object.__setattr__(self, "triples", frozenset(tuple(t) for t in self.triples))

    @property
    def agents(self) -> frozenset[str]:
        return frozenset(j for _, j, _ in self.triples)

    def validate(self, features: Iterable[str], agents: Iterable[str]) -> list[str]:
        feats, ags = set(features), set(agents)
        problems = []
        for n, j, m in sorted(self.triples):
            if j not in ags:
                problems.append(f"unknown agent {j!r} in ({n}, {j}, {m})")
            for x in (n, m):
                if x not in feats:
                    problems.append(f"unknown feature {x!r} in ({n}, {j}, {m})")
        return problems


def _intersect_all(sets: Iterable[frozenset[str]], universe: frozenset[str]) -> frozenset[str]:
    result = universe
    for s in sets:
        result = result & s
    return result


def _union_all(sets: Iterable[frozenset[str]]) -> frozenset[str]:
    result: frozenset[str] = frozenset()
    for s in sets:
        result = result | s
    return result


def expand_agenda(
    accounts: Iterable[str], spec: ScalingSpec, known_accounts: Iterable[str] | None = None
) -> Agenda:
    """Account-level interest expands to every scaled feature of the account."""
    accounts = list(accounts)
    if known_accounts is not None:
        unknown = set(accounts) - set(known_accounts)
        if unknown:
            raise AgendaError(f"unknown accounts {sorted(unknown)}")
    return frozenset(scaled_features(accounts, spec))


def coalition_agenda(model: RelevanceModel, coalition: Iterable[str], mode: CoalitionMode) -> Agenda:
    """Agendas of a coalition.

    Intersections over an empty coalition give every feature and unions
    give none, for both the relevance and the irrelevance relation.
    """
    c = model._coalition(coalition)
    members = sorted(c)
    if mode == "common":
        return _intersect_all((model.relevant[j] for j in members), model.features)
    if mode == "distributed":
        return _union_all(model.relevant[j] for j in members)
    if mode == "box":
        outside = sorted(model.agents - c)
        return model.features - _intersect_all((model.relevant[j] for j in outside), model.features)
    if mode == "irrelevant-common":
        return _intersect_all((model.irrelevant[j] for j in members), model.features)
    if mode == "irrelevant-distributed":
        return _union_all(model.irrelevant[j] for j in members)
    raise AgendaError(f"unknown coalition mode {mode!r}")


def induced_features(model: RelevanceModel, coalition: Iterable[str], mode: InducedMode) -> Agenda:
    coalition = list(coalition)
    if mode == "f1":
        return coalition_agenda(model, coalition, "common")
    if mode == "f2":
        return coalition_agenda(model, coalition, "distributed")
    if mode == "g1":
        return model.features - coalition_agenda(model, coalition, "irrelevant-distributed")
    if mode == "g2":
        return model.features - coalition_agenda(model, coalition, "irrelevant-common")
    raise AgendaError(f"unknown induced mode {mode!r}")


def induced_by_agenda(
    base: FormalContext, model: RelevanceModel, coalition: Iterable[str], mode: InducedMode
) -> FormalContext:
    """The categorization context f1/f2/g1/g2 of a coalition."""
    if model.features != frozenset(base.features):
        raise AgendaError("relevance model and base context have different feature sets")
    return induced_context(base, induced_features(model, coalition, mode))


def substitute(model: SubstitutionModel, j: str, z: Iterable[str]) -> Agenda:
    """Issues that agent ``j`` would replace by something inside ``z``.

    This is j's substituted version of the agenda ``z``:
    ``{m | exists n in z with (n, j, m) in S}``.
    """
    z = frozenset(z)
    return frozenset(m for n, agent, m in model.triples if agent == j and n in z)


def crisp_deliberate(
    a1: Iterable[str],
    a2: Iterable[str],
    rule: CrispRule,
    substitution: SubstitutionModel | None = None,
    agents: tuple[str, str] = ("j1", "j2"),
) -> Agenda:
    """Aggregate the agendas ``a1`` of ``agents[0]`` and ``a2`` of ``agents[1]``."""
    a1, a2 = frozenset(a1), frozenset(a2)
    if rule == "common":
        return a1 & a2
    if rule == "distributed":
        return a1 | a2
    if rule not in ("subst-union", "subst-intersection"):
        raise AgendaError(f"unknown crisp rule {rule!r}")
    if substitution is None:
        raise AgendaError(f"rule {rule!r} needs a substitution model")
    j1, j2 = agents
    y1 = substitute(substitution, j1, a2)
    y2 = substitute(substitution, j2, a1)
    return y1 | y2 if rule == "subst-union" else y1 & y2


def check_coherence(model: SubstitutionModel, rel: RelevanceModel) -> list[tuple[str, str]]:
    """Pairs (j, m) with m relevant to j but no self-substitution (m, j, m)."""
    return [
        (j, m)
        for j in sorted(rel.agents)
        for m in sorted(rel.relevant[j])
        if (m, j, m) not in model.triples
    ]


# -- configuration files -------------------------------------------------


def expand_substitution(entries: Iterable[Mapping], spec: ScalingSpec | None) -> SubstitutionModel:
    """Account-level triples expand pointwise over the interval index k."""
    triples = set()
    for e in entries:
        n, j, m = e["n"], e["j"], e["m"]
        if spec is None:
            triples.add((n, j, m))
        else:
            for k in range(1, spec.intervals + 1):
                triples.add((feature_name(n, k), j, feature_name(m, k)))
    return SubstitutionModel(frozenset(triples))


@dataclass(frozen=True)
class AgendaConfig:
    relevance: RelevanceModel
    substitution: SubstitutionModel | None


def load_agenda_config(data: Mapping, features: Iterable[str], spec: ScalingSpec) -> AgendaConfig:
    """Read ``{agents: {j: {relevant, irrelevant}}, substitution, account_level}``."""
    features = frozenset(features)
    account_level = bool(data.get("account_level", False))
    accounts = {f.rpartition("#")[0] for f in features} if account_level else None

    def expand(items):
        items = list(items or [])
        if account_level:
            return expand_agenda(items, spec, accounts)
        return frozenset(items)

    relevant, irrelevant = {}, {}
    for j, entry in data.get("agents", {}).items():
        relevant[j] = expand(entry.get("relevant"))
        irrelevant[j] = expand(entry.get("irrelevant"))
    rel = RelevanceModel(features, relevant, irrelevant)
    subst = None
    if "substitution" in data:
        subst = expand_substitution(data["substitution"], spec if account_level else None)
        problems = subst.validate(features, rel.agents)
        if problems:
            raise AgendaError("; ".join(problems[:5]))
    return AgendaConfig(rel, subst)
