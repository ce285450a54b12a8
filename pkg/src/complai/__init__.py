"""complai: audit black-box supervised models through nearest
counterfactuals — explainability, robustness, performance, drift and
fairness scores rolled into a single trust factor."""

from .drift import DriftReport, drift_score, oot_drift
from .errors import ComplaiError
from .fairness import (
    FavorableOutcome,
    FlipTestReport,
    adapt_favorable,
    disparate_impact,
    fairness_audit,
    flip_test,
    intersectional_fairness,
    synth_cf_augment,
)
from .heom import DistanceConfig, heom, heom_feature, percentage_config
from .models import (
    HttpModel,
    Model,
    Prediction,
    SubprocessModel,
    resolve_model,
    train_builtin,
)
from .nice import (
    CounterfactualResult,
    NiceConfig,
    RegionSettings,
    SearchContext,
    TargetRegion,
    generate_batch,
    generate_counterfactual,
    nearest_unlike_neighbor,
    target_region,
)
from .scores import (
    AttributionVector,
    ExplainabilityConfig,
    MetricWeights,
    ScoreCard,
    explainability_histogram,
    explainability_score,
    feature_importance,
    performance_score,
    robustness_scores,
    trust_factor,
)
from .tabular import (
    Dataset,
    FeatureSpec,
    NormStats,
    Predicate,
    Schema,
    SliceQuery,
    TargetSpec,
    compute_norm_stats,
    load_csv,
    load_schema,
    save_csv,
    slice_filter,
)

__version__ = "0.1.0"
