"""Model families implemented on numpy (and numba for tree growth)."""

from onlineage.models.base import CLASSIFICATION, REGRESSION, Dataset, predict, predict_score
from onlineage.models.forest import RandomForest, fit_random_forest
from onlineage.models.linear import LinearModel, fit_linear_regression
from onlineage.models.logistic import LogisticModel, fit_logistic_regression
from onlineage.models.mlp import MLPRegressor, fit_mlp_regressor
from onlineage.models.naive_bayes import GaussianNB, fit_gaussian_nb
from onlineage.models.preprocessing import (
    ScalerParams,
    SplitIndices,
    apply_standardizer,
    fit_standardizer,
    kfold_indices,
    train_test_split,
)
from onlineage.models.selection import (
    CLASSIFICATION_MODELS,
    FAMILIES,
    REGRESSION_MODELS,
    CVResult,
    TrainedModel,
    fit_family,
    kfold_grid_search,
)
from onlineage.models.tree import DecisionTree, fit_decision_tree

__all__ = [
    "CLASSIFICATION", "REGRESSION", "Dataset", "predict", "predict_score",
    "RandomForest", "fit_random_forest", "LinearModel", "fit_linear_regression",
    "LogisticModel", "fit_logistic_regression", "MLPRegressor", "fit_mlp_regressor",
    "GaussianNB", "fit_gaussian_nb", "ScalerParams", "SplitIndices",
    "apply_standardizer", "fit_standardizer", "kfold_indices", "train_test_split",
    "CLASSIFICATION_MODELS", "FAMILIES", "REGRESSION_MODELS", "CVResult",
    "TrainedModel", "fit_family", "kfold_grid_search", "DecisionTree", "fit_decision_tree",
]
