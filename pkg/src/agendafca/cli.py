"""Command-line pipelines: ingest -> scale -> agendas -> lattices, stability, transforms.

Every subcommand reads and writes plain files (JSON, CSV, DOT), so each
step can be scripted and rerun.  Exit status is 0 on success, 1 when an
input fails validation and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .agendas import AgendaError, crisp_deliberate, check_coherence, induced_features, load_agenda_config
from .context import ConceptLattice, ContextError, FormalContext, enumerate_concepts, induced_context
from .evidential import (
    MassError,
    MassFunction,
    combine_conjunctive_unnormalized,
    combine_dempster,
    combine_disjunctive,
    combine_many,
    combine_substitution,
    load_mass,
    mass_to_account_json,
    validate_mass,
)
from .ledger import (
    ExtractionError,
    JournalParseError,
    ManyValuedContext,
    ScalingSpec,
    extract_processes,
    interval_scale,
    parse_journal,
    split_feature,
    validate_network,
)
from .stability import BetaCategorization, beta_categorization, induced_context_mass, most_likely_categorization
from .transforms import ImportanceTable, account_importance, agglomerative_cluster, pignistic, plausibility_transform

CRISP_RULES = ("common", "distributed", "subst-union", "subst-intersection")
MASS_RULES = {
    "dempster": combine_dempster,
    "disjunctive": combine_disjunctive,
    "conjunctive-unnorm": combine_conjunctive_unnormalized,
}
SUBST_RULES = {
    "subst-disjunctive": "disjunctive",
    "subst-conjunctive": "conjunctive-normalized",
    "subst-conjunctive-unnorm": "conjunctive-unnormalized",
}


class UsageError(Exception):
    pass


# -- DOT export ----------------------------------------------------------


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")


def export_lattice_dot(lat: ConceptLattice | BetaCategorization, name: str = "lattice") -> str:
    """Hasse diagram as a DOT digraph, one node per concept or class.

    Nodes are labelled with their extents (and stability index for
    classes); edges point from each element to the ones covering it.
    """
    if isinstance(lat, BetaCategorization):
        objs = lat.base.objects
        labels = []
        for c in lat.classes:
            ext = ",".join(a for a in objs if a in c.extent)
            labels.append(f"{{{ext}}}\nrho={c.index:.4g}")
        edges = lat.edges
    else:
        objs = lat.context.objects
        labels = [",".join(a for a in objs if a in c.extent) for c in lat.concepts]
        labels = [f"{{{t}}}" for t in labels]
        edges = lat.edges
    lines = [f'digraph "{_dot_escape(name)}" {{', "  rankdir=BT;", "  node [shape=box];"]
    for i, label in enumerate(labels):
        lines.append(f'  n{i} [label="{_dot_escape(label)}"];')
    for lo, hi in sorted(edges):
        lines.append(f"  n{lo} -> n{hi};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- file helpers --------------------------------------------------------


def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON ({exc})") from None


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _dump_json(data) -> str:
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"


def parse_objects(spec: str) -> list[str]:
    """Comma list of ids; ``a1..a6`` expands to a1, a2, ..., a6."""
    out: list[str] = []
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..", 1)
            m1 = re.fullmatch(r"(.*?)(\d+)", lo)
            m2 = re.fullmatch(r"(.*?)(\d+)", hi)
            if not m1 or not m2 or m1.group(1) != m2.group(1) or int(m1.group(2)) > int(m2.group(2)):
                raise UsageError(f"bad object range {part!r}")
            out.extend(f"{m1.group(1)}{k}" for k in range(int(m1.group(2)), int(m2.group(2)) + 1))
        else:
            out.append(part)
    return list(dict.fromkeys(out))


def _spec(args) -> ScalingSpec:
    return ScalingSpec(args.intervals if args.intervals is not None else 5)


def _infer_spec(ctx: FormalContext, args) -> ScalingSpec:
    if args.intervals is not None:
        return ScalingSpec(args.intervals)
    try:
        return ScalingSpec(max(split_feature(f)[1] for f in ctx.features))
    except ValueError:
        return ScalingSpec(5)


def _load_network(path: str) -> ManyValuedContext:
    if path.endswith(".csv"):
        return extract_processes(parse_journal(Path(path).read_bytes()))
    data = _read_json(path)
    if "processes" not in data:
        raise ValueError(f"{path}: not a many-valued context")
    return ManyValuedContext.from_json(data)


def _load_context(path: str, args) -> FormalContext:
    """Binary context from a context JSON, a network JSON or a journal CSV."""
    if path.endswith(".csv"):
        ctx = interval_scale(_load_network(path), _spec(args))
    else:
        data = _read_json(path)
        if "incidence" in data:
            ctx = FormalContext.from_json(data)
        elif "processes" in data:
            ctx = interval_scale(ManyValuedContext.from_json(data), _spec(args))
        else:
            raise ValueError(f"{path}: neither a formal context nor a network")
    if getattr(args, "objects", None):
        ctx = ctx.restrict_objects(parse_objects(args.objects))
    return ctx


def _load_masses(paths: Sequence[str], ctx: FormalContext | None, args) -> tuple[list[MassFunction], bool]:
    spec = _infer_spec(ctx, args) if ctx is not None else _spec(args)
    features = list(ctx.features) if ctx is not None else None
    masses, account_level = [], True
    for p in paths:
        data = _read_json(p)
        account_level &= bool(data.get("account_level", False))
        masses.append(load_mass(data, features, spec.intervals))
    return masses, account_level


def _mass_json(m: MassFunction, account_level: bool) -> dict:
    if account_level:
        data = mass_to_account_json(m)
        if data is not None:
            if m.conflict:
                data["conflict"] = m.conflict
            return data
    data = m.to_json()
    if m.conflict:
        data["conflict"] = m.conflict
    return data


# -- subcommands ---------------------------------------------------------


def cmd_ingest(args) -> int:
    mvc = extract_processes(parse_journal(Path(args.journal).read_bytes()))
    _emit(_dump_json(mvc.to_json()), args.out)
    return 0


def cmd_scale(args) -> int:
    ctx = _load_context(args.context, args)
    _emit(_dump_json(ctx.to_json()), args.out)
    return 0


def cmd_lattice(args) -> int:
    ctx = _load_context(args.context, args)
    if args.agenda:
        if not args.agent:
            raise UsageError("--agenda needs at least one --agent")
        config = load_agenda_config(_read_json(args.agenda), ctx.features, _infer_spec(ctx, args))
        ctx = induced_context(ctx, induced_features(config.relevance, args.agent, args.mode))
    elif args.agent:
        raise UsageError("--agent needs --agenda")
    lat = enumerate_concepts(ctx)
    if args.dot:
        _emit(export_lattice_dot(lat), args.dot)
    if args.out or not args.dot:
        _emit(_dump_json(lat.to_json()), args.out)
    return 0


def cmd_deliberate(args) -> int:
    rule = args.rule
    if rule in CRISP_RULES:
        if not (args.context and args.agenda):
            raise UsageError(f"rule {rule} needs --context and --agenda")
        ctx = _load_context(args.context, args)
        config = load_agenda_config(_read_json(args.agenda), ctx.features, _infer_spec(ctx, args))
        agents = args.agent or sorted(config.relevance.agents)
        if rule in ("common", "distributed"):
            mode = "f1" if rule == "common" else "f2"
            agenda = induced_features(config.relevance, agents, mode)
        else:
            if len(agents) != 2:
                raise UsageError(f"rule {rule} needs exactly two agents")
            a1, a2 = (config.relevance.relevant[j] for j in agents)
            agenda = crisp_deliberate(a1, a2, rule, config.substitution, tuple(agents))
        feats = [f for f in ctx.features if f in agenda]
        _emit(_dump_json({"rule": rule, "agents": list(agents), "features": feats}), args.out)
        return 0
    if not args.masses:
        raise UsageError(f"rule {rule} needs --masses")
    ctx = _load_context(args.context, args) if args.context else None
    masses, account_level = _load_masses(args.masses, ctx, args)
    if rule in MASS_RULES:
        result = combine_many(masses, MASS_RULES[rule])
    else:
        if len(masses) != 2:
            raise UsageError(f"rule {rule} combines exactly two masses")
        if not args.agenda:
            raise UsageError(f"rule {rule} needs --agenda with a substitution relation")
        features = masses[0].universe
        spec = _infer_spec(ctx, args) if ctx is not None else _spec(args)
        config = load_agenda_config(_read_json(args.agenda), features, spec)
        if config.substitution is None:
            raise ValueError(f"{args.agenda}: no substitution relation")
        agents = tuple(args.agent) if args.agent else ("j1", "j2")
        if len(agents) != 2:
            raise UsageError(f"rule {rule} needs exactly two agents")
        result = combine_substitution(masses[0], masses[1], config.substitution, SUBST_RULES[rule], agents)
    _emit(_dump_json(_mass_json(result, account_level)), args.out)
    return 0


def cmd_stability(args) -> int:
    ctx = _load_context(args.context, args)
    (m,), _ = _load_masses([args.mass], ctx, args)
    dist = induced_context_mass(ctx, m)
    if args.most_likely:
        lat = enumerate_concepts(most_likely_categorization(dist))
        if args.dot:
            _emit(export_lattice_dot(lat), args.dot)
        if args.out or not args.dot:
            _emit(_dump_json(lat.to_json()), args.out)
        return 0
    cat = beta_categorization(dist, args.beta)
    if args.dot:
        _emit(export_lattice_dot(cat, name=f"beta={args.beta}"), args.dot)
    if args.out or not args.dot:
        _emit(_dump_json(cat.to_json()), args.out)
    return 0


def cmd_transform(args) -> int:
    ctx = _load_context(args.context, args) if args.context else None
    (m,), _ = _load_masses([args.mass], ctx, args)
    if args.level == "account":
        table = account_importance(m, args.method)
    else:
        table = pignistic(m) if args.method == "pignistic" else plausibility_transform(m)
    _emit(table.to_csv(), args.out)
    return 0


def cmd_cluster(args) -> int:
    mvc = _load_network(args.context)
    weights = ImportanceTable.from_csv(Path(args.weights).read_text(encoding="utf-8"), "account")
    objects = parse_objects(args.objects) if args.objects else None
    result = agglomerative_cluster(mvc, weights, args.threshold, objects)
    _emit(_dump_json(result.to_json()), args.out)
    return 0


def cmd_check(args) -> int:
    problems: list[str] = []
    ctx = None
    if args.context:
        if args.context.endswith(".csv") or "processes" in _read_json(args.context):
            problems += [f"network: {p}" for p in validate_network(_load_network(args.context))]
        ctx = _load_context(args.context, args)
    if args.masses:
        masses, _ = _load_masses(args.masses, ctx, args)
        for path, m in zip(args.masses, masses):
            problems += [f"{path}: {p}" for p in validate_mass(m)]
    if args.agenda:
        if ctx is None:
            raise UsageError("--agenda needs --context")
        config = load_agenda_config(_read_json(args.agenda), ctx.features, _infer_spec(ctx, args))
        if config.substitution is not None:
            problems += [
                f"{args.agenda}: agent {j} has relevant {m} without self-substitution"
                for j, m in check_coherence(config.substitution, config.relevance)
            ]
    for p in problems:
        print(p, file=sys.stderr)
    return 1 if problems else 0


# -- argument parsing ----------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="agendafca", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, context_required=False):
        p.add_argument("--context", required=context_required, help="context JSON, network JSON or journal CSV")
        p.add_argument("--intervals", type=int, help="number of scaling intervals (default 5)")
        p.add_argument("--objects", help="object filter, e.g. a1..a6 or a1,a3")
        p.add_argument("--out", help="output path (default stdout)")

    p = sub.add_parser("ingest", help="journal CSV to network JSON")
    p.add_argument("--journal", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("scale", help="interval-scale a network into a binary context")
    common(p, True)
    p.set_defaults(func=cmd_scale)

    p = sub.add_parser("lattice", help="concept lattice of a context or agenda")
    common(p, True)
    p.add_argument("--agenda", help="agenda configuration JSON")
    p.add_argument("--agent", action="append", help="agent of the coalition (repeatable)")
    p.add_argument("--mode", choices=("f1", "f2", "g1", "g2"), default="f2")
    p.add_argument("--dot", help="write a DOT rendering here")
    p.set_defaults(func=cmd_lattice)

    p = sub.add_parser("deliberate", help="aggregate crisp agendas or masses")
    common(p)
    p.add_argument("--rule", required=True, choices=CRISP_RULES + tuple(MASS_RULES) + tuple(SUBST_RULES))
    p.add_argument("--agenda")
    p.add_argument("--agent", action="append")
    p.add_argument("--masses", nargs="+")
    p.set_defaults(func=cmd_deliberate)

    p = sub.add_parser("stability", help="beta-categorization or most likely categorization")
    common(p, True)
    p.add_argument("--mass", "--masses", dest="mass", required=True)
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--most-likely", action="store_true")
    p.add_argument("--dot")
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("transform", help="importance table from a mass")
    common(p)
    p.add_argument("--mass", "--masses", dest="mass", required=True)
    p.add_argument("--method", choices=("pignistic", "plausibility"), default="pignistic")
    p.add_argument("--level", choices=("feature", "account"), default="account")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("cluster", help="importance-weighted clustering of processes")
    common(p, True)
    p.add_argument("--weights", required=True, help="account-level importance CSV")
    p.add_argument("--threshold", type=float, required=True)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("check", help="validate network, masses and agenda files")
    common(p)
    p.add_argument("--masses", nargs="+")
    p.add_argument("--agenda")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"agendafca: error: {exc}", file=sys.stderr)
        return 2
    if getattr(args, "beta", None) is not None and not 0 <= args.beta <= 1:
        print("agendafca: error: --beta must lie in [0, 1]", file=sys.stderr)
        return 2
    if getattr(args, "intervals", None) is not None and args.intervals < 1:
        print("agendafca: error: --intervals must be at least 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"agendafca: error: {exc}", file=sys.stderr)
        return 2
    except (
        OSError,
        ValueError,
        KeyError,
        JournalParseError,
        ExtractionError,
        ContextError,
        AgendaError,
        MassError,
    ) as exc:
        print(f"agendafca: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
