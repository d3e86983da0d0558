import itertools
from functools import lru_cache
from pathlib import Path

import pytest
from hypothesis import strategies as st

from agendafca import FormalContext, MassFunction, ScalingSpec, SubstitutionModel, interval_scale
from agendafca.data import load_table2

ACCOUNTS = ["tax", "revenue", "cost of sales", "personal expenses", "inventory", "other expenses"]
S = 5
PIPELINES = Path(__file__).resolve().parent.parent / "pipelines"
INPUTS = PIPELINES / "inputs"


def acc(*idx):
    """Account names by 1-based index x1..x6."""
    return [ACCOUNTS[i - 1] for i in idx]


def block(*idx, s=S):
    return frozenset(f"{a}#{k}" for a in acc(*idx) for k in range(1, s + 1))


def features(s=S):
    return [f"{a}#{k}" for a in ACCOUNTS for k in range(1, s + 1)]


def account_mass(pairs, s=S):
    """Mass over scaled features from (account indices, weight) pairs; () means X."""
    return MassFunction.from_pairs(
        features(s), [(block(*idx, s=s) if idx else block(1, 2, 3, 4, 5, 6, s=s), w) for idx, w in pairs]
    )


def example_masses(s=S):
    X = ()
    m1 = account_mass([((1,), 0.6), (X, 0.4)], s)
    m2 = account_mass([((1,), 0.5), ((1, 2), 0.3), (X, 0.2)], s)
    m3 = account_mass([((1, 2, 6), 0.9), (X, 0.1)], s)
    m = account_mass([((1,), 0.8), ((1, 2), 0.12), ((1, 2, 6), 0.072), (X, 0.008)], s)
    mp = account_mass([((1, 2, 6), 0.432), (X, 0.568)], s)
    ms = account_mass([((1, 6), 0.6), ((1, 2, 6), 0.4)], s)
    msp = account_mass([((1,), 0.5), ((1, 6), 0.5)], s)
    return {"m1": m1, "m2": m2, "m3": m3, "m": m, "m'": mp, "m_s": ms, "m_s'": msp}


# reference importance rows, accounts in ACCOUNTS order
PIGNISTIC = {
    "m1": (0.67, 0.067, 0.067, 0.067, 0.067, 0.067),
    "m2": (0.683, 0.183, 0.033, 0.033, 0.033, 0.033),
    "m3": (0.317, 0.317, 0.017, 0.017, 0.017, 0.317),
    "m": (0.885, 0.085, 0.001, 0.001, 0.001, 0.025),
    "m'": (0.239, 0.239, 0.095, 0.095, 0.095, 0.239),
    "m_s": (0.433, 0.133, 0, 0, 0, 0.433),
    "m_s'": (0.75, 0, 0, 0, 0, 0.25),
}
PLAUSIBILITY = {
    "m1": (0.333, 0.133, 0.133, 0.133, 0.133, 0.133),
    "m2": (0.435, 0.217, 0.087, 0.087, 0.087, 0.087),
    "m3": (0.303, 0.303, 0.030, 0.030, 0.030, 0.303),
    "m": (0.767, 0.153, 0.006, 0.006, 0.006, 0.061),
    "m'": (0.213, 0.213, 0.121, 0.121, 0.121, 0.213),
    "m_s": (0.417, 0.167, 0, 0, 0, 0.417),
    "m_s'": (0.667, 0, 0, 0, 0, 0.333),
}



@pytest.fixture(scope="session")
def table2():
    return load_table2()


@pytest.fixture(scope="session")
def ctx12(table2):
    return interval_scale(table2, ScalingSpec(S))


@pytest.fixture(scope="session")
def ctx6(ctx12):
    return ctx12.restrict_objects([f"a{i}" for i in range(1, 7)])


@pytest.fixture(scope="session")
def masses():
    return example_masses()


# -- acceptance reporting ------------------------------------------------
# Tests marked ``criterion(n, title)`` feed a pass/fail summary printed at
# the end of the run.  Property suites are tagged here so the randomized
# criterion reflects their real outcomes.

PROPERTY_SUITES = (
    "test_context.py::test_galois_laws",
    "test_context.py::test_next_closure_matches_oracle",
    "test_context.py::test_upward_stability",
    "test_context.py::test_stable_agendas_form_upset",
    "test_agendas.py::test_coalition_maps_order_laws",
    "test_agendas.py::test_order_laws_with_g_maps_exchanged",
    "test_stability.py::test_index_bounds_and_oracle",
    "test_stability.py::test_beta_monotone",
    "test_stability.py::test_rho_monotone_under_upset_order_and_corollaries",
    "test_stability.py::test_substitution_corollary",
    "test_evidential.py::test_intersection_and_union_bounds",
    "test_evidential.py::test_substitution_intersection_below_union",
    "test_evidential.py::test_upset_order_implies_pl_and_q",
    "test_evidential.py::test_set_function_identities_and_moebius",
    "test_evidential.py::test_combination_algebra",
    "test_transforms.py::test_transforms_are_distributions",
    "test_transforms.py::test_pseudometric_and_scipy_agreement",
)
PROPERTY_TITLE = "Property suites (randomized, fixed seeds, >= 1000 trials)"

_results: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion this test checks")


def pytest_collection_modifyitems(items):
    for item in items:
        if any(item.nodeid.endswith(s) for s in PROPERTY_SUITES):
            item.add_marker(pytest.mark.criterion(11, PROPERTY_TITLE))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call" or rep.failed:
        for mark in item.iter_markers("criterion"):
            n, title = mark.args
            entry = _results.setdefault(n, [title, []])
            entry[1].append(rep.passed)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_results):
        title, outcomes = _results[n]
        status = "PASS" if all(outcomes) else "FAIL"
        terminalreporter.write_line(f"criterion {n:>2}: {status}  {title}")


# -- shared hypothesis strategies ----------------------------------------
# Strategies are built once and decode fixed-shape draws, which keeps the
# per-example overhead low enough for 1000-trial suites.


def all_subsets(items):
    items = list(items)
    for r in range(len(items) + 1):
        yield from (frozenset(c) for c in itertools.combinations(items, r))


@lru_cache(maxsize=None)
def contexts(max_objects=8, max_features=8):
    def build(draw):
        n, k, rows = draw
        return FormalContext(
            tuple(f"o{i}" for i in range(n)),
            tuple(f"f{j}" for j in range(k)),
            tuple(r & ((1 << k) - 1) for r in rows[:n]),
        )

    rows = st.lists(st.integers(0, (1 << max_features) - 1), min_size=max_objects, max_size=max_objects)
    return st.tuples(st.integers(1, max_objects), st.integers(1, max_features), rows).map(build)


@lru_cache(maxsize=None)
def masses_on(universe, max_focal=4, allow_empty=False):
    """Random mass on ``universe`` with weights that are multiples of 1/20."""
    universe = tuple(universe)
    subsets = [s for s in all_subsets(universe) if allow_empty or s]
    k = min(max_focal, len(subsets))

    def build(draw):
        idx, cuts = draw
        cuts = sorted(cuts[: len(idx) - 1])
        parts = [b - a for a, b in zip([0] + cuts, cuts + [20])]
        return MassFunction.from_pairs(universe, [(subsets[i], p / 20) for i, p in zip(idx, parts) if p])

    idx = st.lists(st.integers(0, len(subsets) - 1), min_size=1, max_size=k, unique=True)
    cuts = st.lists(st.integers(1, 19), min_size=k - 1, max_size=k - 1)
    return st.tuples(idx, cuts).map(build)


def subset_of(items):
    """Strategy for subsets of ``items``, drawn as a bitmask."""
    items = tuple(items)
    return st.integers(0, (1 << len(items)) - 1).map(
        lambda mask: frozenset(x for i, x in enumerate(items) if mask >> i & 1)
    )


@lru_cache(maxsize=None)
def substitution_models(universe, agents=("j1", "j2"), identity=False):
    """Random substitution relations; ``identity`` adds every (x, j, x)."""
    universe = tuple(universe)
    slots = [(n, j) for n in universe for j in agents]

    def build(masks):
        triples = {(x, j, x) for x in universe for j in agents} if identity else set()
        for (n, j), mask in zip(slots, masks):
            triples.update((n, j, m) for i, m in enumerate(universe) if mask >> i & 1)
        return SubstitutionModel(frozenset(triples))

    size = len(slots)
    return st.lists(st.integers(0, (1 << len(universe)) - 1), min_size=size, max_size=size).map(build)
