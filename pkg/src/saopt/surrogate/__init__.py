"""Random forest fitness surrogates and the policy that keeps them honest."""

from .forest import (
    ForestHyperparams,
    RandomForestModel,
    TrainingSet,
    Tree,
    fit_forest,
    fit_tree,
    normalized_mae,
    predict_forest,
    predict_tree,
    r2_score,
)
from .io import dump_forest, load_forest, read_forest, save_forest
from .policy import (
    divergence_check,
    elite_deviation,
    evaluate_population,
    fit_surrogates,
    retrain,
    warm_start,
)

__all__ = [
    "ForestHyperparams",
    "RandomForestModel",
    "TrainingSet",
    "Tree",
    "fit_forest",
    "fit_tree",
    "predict_forest",
    "predict_tree",
    "r2_score",
    "normalized_mae",
    "dump_forest",
    "load_forest",
    "save_forest",
    "read_forest",
    "divergence_check",
    "elite_deviation",
    "evaluate_population",
    "fit_surrogates",
    "retrain",
    "warm_start",
]
