"""Concept-level specification checking for vision classifiers.

The toolkit parses strength-predicate specifications, extracts concept
directions from caption embeddings, aligns a classifier's embedding space
to a language-image space with a fitted affine map, and proves or refutes
specifications over box regions with a slack-maximizing linear program.
"""

from .embeddings import (
    ColumnStats,
    EmbeddingSet,
    Manifest,
    column_stats,
    cosine_similarity,
    load_manifest,
)
from .directions import (
    CaptionTemplateSet,
    ConceptDirection,
    TextEmbedder,
    concept_direction,
    default_templates,
    expand_captions,
    zero_shot_classify,
)
from .lang import (
    And,
    ClassLabel,
    Clause,
    Gt,
    HasCon,
    Implies,
    Literal,
    Not,
    Or,
    Predict,
    SpecExpr,
    TaskVocabulary,
    desugar,
    evaluate,
    parse_spec,
    print_spec,
    to_lp_queries,
)
from .oracle import FiniteScope, brute_force_satisfaction, grid_violation_oracle, reduction_check
from .regions import BoxRegion, RegionPartition, region_a1, region_a2, region_a3, region_gamma
from .repmap import (
    AffineMap,
    MapQuality,
    RepMap,
    RepMode,
    apply_map,
    check_faithfulness,
    fit_affine_map,
    map_metrics,
    rep_value,
)
from .simplex import LinearProgram, LpResult, solve_lp_max
from .validate import (
    StrengthPredicate,
    ValidationReport,
    elicit_predicates,
    filter_significant,
    relevant_concepts,
    satisfaction_probability,
)
from .verifier import (
    LinearHead,
    VerificationContext,
    VerificationOutcome,
    encode_clip_query,
    encode_vision_query,
    verify_spec,
)

__version__ = "0.1.0"
