"""Explainable categorization of business processes with interrogative agendas."""

__version__ = "0.1.0"

from .agendas import (
    AgendaConfig,
    AgendaError,
    RelevanceModel,
    SubstitutionModel,
    check_coherence,
    coalition_agenda,
    crisp_deliberate,
    expand_agenda,
    induced_by_agenda,
    induced_features,
    load_agenda_config,
    substitute,
)
from .context import (
    Concept,
    ConceptLattice,
    ContextError,
    FormalContext,
    closure,
    concept_leq,
    derive,
    enumerate_concepts,
    induced_context,
    info_combine,
    info_leq,
    is_galois_stable,
)
from .evidential import (
    MassError,
    MassFunction,
    belief_of,
    classify_mass,
    combine_conjunctive_unnormalized,
    combine_dempster,
    combine_disjunctive,
    combine_substitution,
    irrelevance_mass,
    load_mass,
    mass_from_belief,
    mass_order,
    plausibility_of,
    quality_of,
    validate_mass,
)
from .ledger import (
    ExtractionError,
    JournalLine,
    JournalParseError,
    ManyValuedContext,
    ScalingSpec,
    extract_processes,
    interval_scale,
    parse_journal,
    validate_network,
)
from .stability import (
    BetaCategorization,
    ContextDistribution,
    beta_categorization,
    induced_context_mass,
    most_likely_categorization,
    stability_index,
    stability_index_bruteforce,
)
from .transforms import (
    FlatClustering,
    ImportanceTable,
    account_importance,
    agglomerative_cluster,
    dissimilarity_matrix,
    pignistic,
    plausibility_transform,
    weighted_dissimilarity,
)
from .data import load_table1, load_table2
