"""Answer ranking, calibration, and selective-prediction evaluation.

The package consumes per-candidate QA confidence and three-class NLI scores
(entail / neutral / contradict), trains logistic calibration models over any
subset of those signals, selects answers (including least-contradicted
selection), and evaluates selective QA, unanswerable-question rejection, and
signal/correctness correlations.
"""

from .analytics import (
    correlation_report,
    mc_accuracy,
    normalize_answer,
    spearman_rho,
    token_f1,
)
from .calibration import (
    CalibrationModel,
    FeatureSet,
    FeatureVector,
    TrainConfig,
    extract_features,
    predict,
    train_calibration,
)
from .hypothesis_post import postprocess_hypothesis, token_overlap, tokenize_simple
from .ranking import RankingPolicy, explain_selection, question_confidence, select_answer
from .records import (
    DatasetManifest,
    GoldAnswer,
    LoadResult,
    NliScores,
    QuestionRecord,
    ScoredCandidate,
    load_records,
    parse_records,
    split_holdout,
    validate_record,
)
from .rejection import RejectionRule, apply_rule, rejection_metrics, threshold_sweep
from .reportall import report_all
from .selective import compare_policies, coverage_curve
from .synth import SynthSpec, generate_synthetic

__version__ = "0.1.0"
