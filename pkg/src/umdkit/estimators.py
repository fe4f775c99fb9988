"""scikit-learn compatible wrappers around the UMD solvers.

Both estimators fit a linear model by running a UMD policy on the mean
training loss, optionally constrained to a Euclidean ball around the origin.
The step size is ``gamma_scale * K / L`` with ``L`` the smoothness constant
of the loss.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, RegressorMixin
from sklearn.utils.multiclass import check_classification_targets, type_of_target, unique_labels
from sklearn.utils.validation import check_is_fitted, validate_data

from .errors import ArgumentError, LabelError
from .mirror import euclidean_ball, euclidean_free
from .problems import Dataset, make_least_squares, make_logistic
from .solvers import DualPolicy, run_umd


def _regularizer(n, radius):
    if radius is None:
        return euclidean_free(n)
    if not radius > 0:
        raise ArgumentError("radius must be positive or None")
    return euclidean_ball(np.zeros(n), radius)


class _UMDLinearBase(BaseEstimator):
    def __init__(self, radius=None, policy="5-GoLD", gamma_scale=1.0, max_iter=200,
                 fit_intercept=True):
        self.radius = radius
        self.policy = policy
        self.gamma_scale = gamma_scale
        self.max_iter = max_iter
        self.fit_intercept = fit_intercept

    def _solve(self, problem, n):
        if not self.gamma_scale > 0:
            raise ArgumentError("gamma_scale must be positive")
        if int(self.max_iter) < 1:
            raise ArgumentError("max_iter must be >= 1")
        h = _regularizer(n, self.radius)
        policy = DualPolicy.parse(self.policy)
        L = problem.L if problem.L and problem.L > 0 else 1.0
        gamma = self.gamma_scale * h.K / L
        trace = run_umd(problem, h, policy, gamma, int(self.max_iter))
        self.n_iter_ = len(trace)
        self.objective_curve_ = np.append(trace.values, problem.value(trace.final.x))
        return trace.final.x

    def _linear(self, X):
        check_is_fitted(self, "coef_")
        X = validate_data(self, X, reset=False)
        return X @ self.coef_ + self.intercept_


class UMDRegressor(RegressorMixin, _UMDLinearBase):
    """Least squares, optionally with ``||coef||_2 <= radius``.

    With ``fit_intercept`` the data are centered first, so the intercept is
    left unconstrained.
    """

    def fit(self, X, y):
        X, y = validate_data(self, X, y, y_numeric=True)
        x_mean = X.mean(axis=0) if self.fit_intercept else np.zeros(X.shape[1])
        y_mean = y.mean() if self.fit_intercept else 0.0
        problem = make_least_squares(Dataset(X - x_mean, y - y_mean))
        self.coef_ = self._solve(problem, X.shape[1])
        self.intercept_ = float(y_mean - x_mean @ self.coef_)
        return self

    def predict(self, X):
        return self._linear(X)


class UMDLogisticClassifier(ClassifierMixin, _UMDLinearBase):
    """Binary logistic regression.

    The intercept, when requested, is an extra constant feature and so is
    subject to the same ball constraint as the weights.
    """

    def fit(self, X, y):
        X, y = validate_data(self, X, y)
        check_classification_targets(y)
        y_type = type_of_target(y, input_name="y")
        if y_type != "binary":
            raise LabelError(
                f"Only binary classification is supported. The type of the target is {y_type}."
            )
        self.classes_ = unique_labels(y)
        if self.classes_.shape[0] != 2:
            raise LabelError("Only binary classification is supported; y has 1 class")
        signs = np.where(y == self.classes_[1], 1.0, -1.0)
        A = np.hstack([X, np.ones((X.shape[0], 1))]) if self.fit_intercept else X
        w = self._solve(make_logistic(Dataset(A, signs)), A.shape[1])
        if self.fit_intercept:
            self.coef_, self.intercept_ = w[:-1], float(w[-1])
        else:
            self.coef_, self.intercept_ = w, 0.0
        return self

    def __sklearn_tags__(self):
        tags = super().__sklearn_tags__()
        tags.classifier_tags.multi_class = False
        return tags

    def decision_function(self, X):
        return self._linear(X)

    def predict_proba(self, X):
        d = self.decision_function(X)
        p1 = np.exp(-np.logaddexp(0.0, -d))
        return np.column_stack([1.0 - p1, p1])

    def predict(self, X):
        d = self.decision_function(X)
        return self.classes_[(d > 0).astype(int)]
