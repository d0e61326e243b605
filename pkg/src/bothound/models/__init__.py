"""From-scratch weak classifiers, the bagging ensemble, and grid-search CV."""

from .bagging import (
    BASE_KINDS,
    BaggingEnsemble,
    DEFAULT_MEMBERS,
    DEFAULT_THRESHOLD,
    bootstrap_indices,
    fit_bagging,
    fit_base,
)
from .bayes import GaussianNB
from .forest import RandomForest
from .io import load_model, model_from_dict, model_to_dict, save_model
from .linear import LogisticRegression, sigmoid
from .neighbors import KNearestNeighbors
from .search import (
    DEFAULT_GRID,
    DEFAULT_GRIDS,
    CVResult,
    GridSearchResult,
    cross_validate,
    derive_seed,
    grid_search_cv,
    iter_grid,
    stratified_folds,
)
from .tree import DecisionTree, gini

__all__ = [
    "BASE_KINDS",
    "BaggingEnsemble",
    "CVResult",
    "DEFAULT_GRID",
    "DEFAULT_GRIDS",
    "DEFAULT_MEMBERS",
    "DEFAULT_THRESHOLD",
    "DecisionTree",
    "GaussianNB",
    "GridSearchResult",
    "KNearestNeighbors",
    "LogisticRegression",
    "RandomForest",
    "bootstrap_indices",
    "cross_validate",
    "derive_seed",
    "fit_bagging",
    "fit_base",
    "gini",
    "grid_search_cv",
    "iter_grid",
    "load_model",
    "model_from_dict",
    "model_to_dict",
    "save_model",
    "sigmoid",
    "stratified_folds",
]
