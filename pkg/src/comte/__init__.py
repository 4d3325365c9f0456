"""Counterfactual explanations for black-box multivariate time-series classifiers.

Given a test sample, a class of interest, and a black-box probability function,
the search finds a minimal set of whole-series substitutions from a nearby
correctly classified training sample (the distractor) that pushes the class
probability over a target. Evaluation harnesses score explanations for
faithfulness, comprehensibility, robustness, and generalizability.
"""

from .classifiers import (
    FEATURE_NAMES,
    ClassifierHandle,
    FeatureVector,
    LogisticClassifier,
    LogisticModel,
    SetCoverClassifier,
    SetCoverForest,
    extract_features,
    feature_names_for,
    hitting_set_bruteforce,
    logistic_predict,
    logistic_train_l1,
    setcover_predict,
)
from .core import (
    ClassProbabilities,
    Explanation,
    MetricSchema,
    MultivariateSample,
    SubstitutionMask,
    combine,
    relaxed_loss,
    relaxed_loss_terms,
    strict_loss,
)
from .data import (
    Dataset,
    NormalizationParams,
    apply_normalization,
    fit_normalization,
    invert_normalization,
    load_dataset,
    normalize_dataset,
    save_dataset,
)
from .distractors import ClassIndex, build_index, nearest_distractors
from .errors import (
    ComteError,
    DatasetFormatError,
    DegenerateNeighborsError,
    DistractorBelowTargetError,
    ExternalClassifierError,
    NoDistractorError,
    SchemaMismatchError,
    UniverseTooLargeError,
)
from .metrics import (
    FaithfulnessReport,
    RandomMaskExplainer,
    RobustnessReport,
    comprehensibility,
    faithfulness,
    generalizability,
    lipschitz_robustness,
)
from .search import (
    SearchConfig,
    SearchOutcome,
    explain,
    greedy_search,
    hill_climb,
    prune_mask,
    random_neighbor,
)
from .synthetic import ClassRecipe, GeneratorSpec, Signal, generate, generate_files
from .wire import ExternalClassifier, external_classifier

__version__ = "0.1.0"
