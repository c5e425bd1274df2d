"""Classifiers, regressors and evaluation written on top of numpy."""
from .base import (CLASSIFIERS, DEFAULTS, KINDS, REGRESSORS, ModelConfig, Standardizer,
                   standardize_fit_apply)
from .forest import DecisionTree, RandomForest
from .harness import (CVResult, TrainedModel, build_estimator, cross_validate, load_model,
                      mmse_strata, save_model, stratified_folds, train_model)
from .knn import KNNClassifier
from .linear import SGDRegressor
from .metrics import (ClassScores, EvalReport, class_scores, classification_report, confusion,
                      regression_report, rmse)
from .mlp import MLP, mlp_loss_and_grad
from .svm import SVC, SVR, kkt_violation_svc, kkt_violation_svr, smo_solve

__all__ = [
    "CLASSIFIERS", "DEFAULTS", "KINDS", "REGRESSORS", "ModelConfig", "Standardizer",
    "standardize_fit_apply", "DecisionTree", "RandomForest", "CVResult", "TrainedModel",
    "build_estimator", "cross_validate", "load_model", "mmse_strata", "save_model",
    "stratified_folds", "train_model", "KNNClassifier", "SGDRegressor", "ClassScores",
    "EvalReport", "class_scores", "classification_report", "confusion", "regression_report",
    "rmse", "MLP", "mlp_loss_and_grad", "SVC", "SVR", "kkt_violation_svc", "kkt_violation_svr",
    "smo_solve",
]
