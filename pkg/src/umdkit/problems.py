"""First-order problem oracles and synthetic instances."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import NormTag, as_vector
from .errors import ArgumentError, DimensionError, LabelError
from .geometry import ProductSet, Simplex
from .vi import MonotoneOperator


@dataclass(frozen=True)
class Problem:
    """Objective ``f`` with a first-order oracle.

    ``grad`` returns the gradient where ``f`` is differentiable and a fixed,
    documented subgradient elsewhere.  ``L`` (smoothness) and ``M``
    (subgradient bound) are optional and measured in ``norm_tag``.
    """

    n: int
    value: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    L: float | None = None
    M: float | None = None
    norm_tag: NormTag = NormTag.L2
    name: str = "problem"
    info: dict = field(default_factory=dict, compare=False, repr=False)


@dataclass(frozen=True)
class Dataset:
    """Design matrix ``X`` (samples x features) with targets ``y``."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        if X.ndim != 2:
            raise DimensionError(f"design matrix must be 2-d, got shape {X.shape}")
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise DimensionError(
                f"targets have shape {y.shape}, expected ({X.shape[0]},)"
            )
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise DimensionError("dataset contains non-finite entries")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n_samples(self):
        return self.X.shape[0]

    @property
    def n_features(self):
        return self.X.shape[1]


def power_iteration(A, tol=1e-8, seed=0, max_iter=100_000) -> float:
    """Largest eigenvalue of ``A.T @ A`` by power iteration on the Gram operator."""
    A = np.asarray(A, dtype=np.float64)
    n = A.shape[1]
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    lam = 0.0
    min_iter = 10 * n
    for it in range(max_iter):
        w = A.T @ (A @ v)
        lam_new = float(v @ w)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        if it >= min_iter and abs(lam_new - lam) <= tol * abs(lam_new):
            return lam_new
        lam = lam_new
    return lam


def make_least_squares(data: Dataset) -> Problem:
    """``f(b) = mean((y - X b)^2)`` with ``L = 2/n * lambda_max(X^T X)``."""
    if not isinstance(data, Dataset):
        data = Dataset(*data)
    A, y = data.X, data.y
    m = A.shape[0]

    def value(b):
        r = A @ b - y
        return float(r @ r / m)

    def grad(b):
        return (2.0 / m) * (A.T @ (A @ b - y))

    L = 2.0 / m * power_iteration(A)
    return Problem(A.shape[1], value, grad, L=L, name="least-squares")


def _log1pexp(z):
    # log(1 + exp(z)) without overflow
    return np.logaddexp(0.0, z)


def make_logistic(data: Dataset) -> Problem:
    """Mean logistic loss for labels in {-1, +1}; ``L = lambda_max(X^T X) / (4n)``."""
    if not isinstance(data, Dataset):
        data = Dataset(*data)
    A, y = data.X, data.y
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise LabelError("logistic regression targets must be -1 or +1")
    m = A.shape[0]

    def value(b):
        return float(np.mean(_log1pexp(-y * (A @ b))))

    def grad(b):
        margins = y * (A @ b)
        # sigmoid(-margin), computed stably
        s = np.exp(-_log1pexp(margins))
        return -(A.T @ (y * s)) / m

    L = power_iteration(A) / (4.0 * m)
    return Problem(A.shape[1], value, grad, L=L, name="logistic")


def make_quadratic(Q, center, offset=0.0) -> Problem:
    """``f(x) = 0.5 (x - c)^T Q (x - c) + offset`` for symmetric PSD ``Q``."""
    Q = np.asarray(Q, dtype=np.float64)
    c = as_vector(center, Q.shape[0], "center")
    if Q.shape != (c.shape[0], c.shape[0]):
        raise DimensionError("Q must be square and match the center")
    Q = 0.5 * (Q + Q.T)
    L = float(np.linalg.eigvalsh(Q)[-1])

    def value(x):
        d = x - c
        return float(0.5 * d @ Q @ d + offset)

    def grad(x):
        return Q @ (x - c)

    return Problem(c.shape[0], value, grad, L=max(L, 0.0), name="quadratic",
                   info={"Q": Q, "center": c})


def make_l1_distance(center) -> Problem:
    """``f(x) = ||x - c||_1``; subgradient ``sign(x - c)`` with 0 at exact ties.

    ``M`` is ``sqrt(n)``, the L2 bound of any such subgradient.
    """
    c = as_vector(center, name="center")
    n = c.shape[0]

    def value(x):
        return float(np.abs(x - c).sum())

    def grad(x):
        return np.sign(x - c)

    return Problem(n, value, grad, M=float(np.sqrt(n)), name="l1-distance",
                   info={"center": c})


def make_zero(n) -> Problem:
    return Problem(n, lambda x: 0.0, lambda x: np.zeros(n), L=0.0, M=0.0, name="zero")


def make_synthetic_regression(n_samples, n_features, seed=0, noise=0.1) -> Dataset:
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n_samples, n_features))
    beta = rng.standard_normal(n_features)
    y = X @ beta + noise * rng.standard_normal(n_samples)
    return Dataset(X, y)


def make_synthetic_classification(n_samples, n_features, seed=0) -> Dataset:
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n_samples, n_features))
    beta = rng.standard_normal(n_features)
    p = 1.0 / (1.0 + np.exp(-X @ beta))
    y = np.where(rng.uniform(size=n_samples) < p, 1.0, -1.0)
    return Dataset(X, y)


def random_quadratic(n, seed=0, radius=1.0, condition=10.0, center_norm=3.0) -> Problem:
    """Random PSD quadratic whose unconstrained minimizer has norm ``center_norm * radius``."""
    rng = np.random.default_rng(seed)
    U, _ = np.linalg.qr(rng.standard_normal((n, n)))
    eig = np.geomspace(1.0, condition, n)
    Q = (U * eig) @ U.T
    c = rng.standard_normal(n)
    c *= center_norm * radius / np.linalg.norm(c)
    return make_quadratic(Q, c)


def estimate_f_star(problem: Problem, set_, budget: int) -> float:
    """Best value seen along ``budget`` projected-gradient steps with step ``1/L``.

    Starts from the set's center/barycenter; the returned value can only
    decrease as ``budget`` grows.
    """
    if problem.L is None:
        raise ArgumentError("estimate_f_star needs a smoothness constant")
    x = set_.anchor()
    best = problem.value(x)
    if problem.L == 0.0:
        return best
    step = 1.0 / problem.L
    for _ in range(int(budget)):
        x = set_.project(x - step * problem.grad(x))
        best = min(best, problem.value(x))
    return best


def check_gradient(problem: Problem, x, h_fd=1e-6) -> float:
    """Max central-difference error of ``problem.grad`` at ``x``.

    Errors are relative to ``max(1, ||grad||_inf)``.
    """
    if not h_fd > 0:
        raise ArgumentError("finite-difference step must be positive")
    x = as_vector(x, problem.n, "x")
    g = problem.grad(x)
    fd = np.empty_like(x)
    for i in range(x.shape[0]):
        e = np.zeros_like(x)
        e[i] = h_fd
        fd[i] = (problem.value(x + e) - problem.value(x - e)) / (2.0 * h_fd)
    scale = max(1.0, float(np.max(np.abs(g))))
    return float(np.max(np.abs(fd - g)) / scale)


def make_bilinear_saddle(payoff):
    """Monotone operator ``(u, v) -> (A v, -A^T u)`` on ``Simplex(m) x Simplex(n)``.

    ``u`` minimizes and ``v`` maximizes ``u^T A v``.  The Lipschitz constant
    w.r.t. the product of L1 norms is ``max |A_ij|``.
    """
    A = np.asarray(payoff, dtype=np.float64)
    if A.ndim != 2 or A.size == 0:
        raise DimensionError("payoff must be a nonempty 2-d matrix")
    m, n = A.shape

    def phi(w):
        w = np.asarray(w, dtype=np.float64)
        if w.shape != (m + n,):
            raise DimensionError(f"expected a vector of length {m + n}")
        u, v = w[:m], w[m:]
        return np.concatenate([A @ v, -A.T @ u])

    return MonotoneOperator(
        m + n,
        phi,
        L=float(np.max(np.abs(A))),
        set=ProductSet([Simplex(m), Simplex(n)]),
        name="bilinear-saddle",
        info={"payoff": A},
    )
