"""Regularizers, their conjugates, and mirror maps.

A regularizer ``h`` on a set ``X`` is exposed through closed-form oracles:
``value`` (``+inf`` outside ``dom h``), ``conjugate`` (``h*``),
``grad_conjugate`` (``grad h*``, the primal point attached to a dual
vector) and ``md_subgradient`` (``grad F(x)`` when ``h = F + I_X`` for a
mirror map ``F``).
"""

from __future__ import annotations

import numpy as np
from scipy.special import softmax

from .core import NormTag, as_vector, generalized_bregman, norm
from .errors import ArgumentError, DomainError, UnsupportedError
from .geometry import ConstraintSet, EuclideanBall, FullSpace, ProductSet, Simplex

# Feasibility slack used when deciding whether a point is in dom h.
DOMAIN_TOL = 1e-9


class MirrorMap:
    """Differentiable part ``F`` of a regularizer ``h = F + I_X``."""

    name = "mirror-map"

    def value(self, x):
        raise NotImplementedError

    def grad(self, x):
        raise NotImplementedError

    def grad_conjugate(self, theta):
        raise NotImplementedError

    def in_interior(self, x) -> bool:
        return True

    def divergence(self, x, y) -> float:
        """Classical Bregman divergence ``D_F(x, y)`` for ``y`` interior."""
        return float(self.value(x) - self.value(y) - self.grad(y) @ (np.asarray(x) - y))


class EuclideanMap(MirrorMap):
    """``F = 0.5 * ||x||_2^2`` on all of R^n."""

    name = "euclidean"

    def value(self, x):
        x = np.asarray(x, dtype=np.float64)
        return 0.5 * float(x @ x)

    def grad(self, x):
        return np.array(x, dtype=np.float64)

    def grad_conjugate(self, theta):
        return np.array(theta, dtype=np.float64)


class EntropyMap(MirrorMap):
    """``F = sum x_i log x_i`` on the nonnegative orthant (``0 log 0 = 0``)."""

    name = "entropy"

    def value(self, x):
        x = np.asarray(x, dtype=np.float64)
        if np.any(x < 0):
            return np.inf
        pos = x > 0
        return float(np.sum(x[pos] * np.log(x[pos])))

    def grad(self, x):
        x = np.asarray(x, dtype=np.float64)
        if not np.all(x > 0):
            raise DomainError("entropy gradient requires strictly positive coordinates")
        return 1.0 + np.log(x)

    def grad_conjugate(self, theta):
        return np.exp(np.asarray(theta, dtype=np.float64) - 1.0)

    def in_interior(self, x):
        return bool(np.all(np.asarray(x) > 0))


def bregman_project(F: MirrorMap, set_: ConstraintSet, x0):
    """``argmin over x in X of D_F(x, x0)`` for the closed-form pairs supported.

    Euclidean maps reduce to Euclidean projection on any set.  The entropy map
    projects onto the simplex by normalization.

    Raises
    ------
    DomainError
        If ``x0`` is not in the interior of ``dom F``.
    UnsupportedError
        For (map, set) pairs without a closed form.
    """
    x0 = as_vector(x0, set_.dim, "x0")
    if not F.in_interior(x0):
        raise DomainError("x0 must lie in the interior of dom F")
    if isinstance(F, EuclideanMap):
        return set_.project(x0)
    if isinstance(F, EntropyMap) and isinstance(set_, Simplex):
        return x0 / x0.sum()
    raise UnsupportedError(f"no closed-form Bregman projection for {F.name} onto {set_!r}")


class Regularizer:
    """Base class for X-regularizers."""

    set: ConstraintSet
    K: float
    norm_tag: NormTag
    mirror_map: MirrorMap | None = None
    kind = "regularizer"

    @property
    def dim(self) -> int:
        return self.set.dim

    def value(self, x) -> float:
        raise NotImplementedError

    def conjugate(self, zeta) -> float:
        raise NotImplementedError

    def grad_conjugate(self, zeta) -> np.ndarray:
        raise NotImplementedError

    def md_subgradient(self, x) -> np.ndarray:
        if self.mirror_map is None:
            raise UnsupportedError(f"{self.kind} has no mirror-map side")
        x = as_vector(x, self.dim, "x")
        if not self.set.contains(x, DOMAIN_TOL * (1.0 + np.abs(x).max())):
            raise DomainError("x lies outside the constraint set")
        return self.mirror_map.grad(x)

    def md_dual(self, zeta, x=None) -> np.ndarray:
        """``grad F(grad h*(zeta))``, the mirror-descent dual attached to ``zeta``.

        ``x`` may pass the already computed ``grad h*(zeta)``.  Subclasses
        override this when the composition has a more accurate closed form.
        """
        return self.md_subgradient(self.grad_conjugate(zeta) if x is None else x)

    def primal_norm(self, v) -> float:
        return norm(self.norm_tag, v)

    def dual_norm(self, v) -> float:
        return norm(self.norm_tag.dual, v)

    def bregman(self, x_to, x_from, subgrad) -> float:
        return generalized_bregman(self, x_to, x_from, subgrad)


class Euclidean(Regularizer):
    """``h = 0.5 * ||x||_2^2 + I_X``; ``grad h*`` is Euclidean projection onto ``X``."""

    kind = "euclidean"

    def __init__(self, set_: ConstraintSet):
        self.set = set_
        self.K = 1.0
        self.norm_tag = NormTag.L2
        self.mirror_map = EuclideanMap()

    def _feasible(self, x):
        return self.set.contains(x, DOMAIN_TOL * (1.0 + float(np.abs(x).max(initial=0.0))))

    def value(self, x):
        x = np.asarray(x, dtype=np.float64)
        if not self._feasible(x):
            return np.inf
        return 0.5 * float(x @ x)

    def conjugate(self, zeta):
        zeta = np.asarray(zeta, dtype=np.float64)
        p = self.set.project(zeta)
        return float(zeta @ p - 0.5 * p @ p)

    def grad_conjugate(self, zeta):
        return self.set.project(zeta)

    def __repr__(self):
        return f"Euclidean({self.set!r})"


def euclidean_free(n) -> Euclidean:
    return Euclidean(FullSpace(n))


def euclidean_ball(center, radius) -> Euclidean:
    return Euclidean(EuclideanBall(center, radius))


class EntropySimplex(Regularizer):
    """Negative entropy on the probability simplex; 1-strongly convex w.r.t. L1."""

    kind = "entropy"

    def __init__(self, n):
        self.set = Simplex(n)
        self.K = 1.0
        self.norm_tag = NormTag.L1
        self.mirror_map = EntropyMap()

    def value(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.dim,) or np.any(x < -DOMAIN_TOL) or abs(x.sum() - 1.0) > DOMAIN_TOL:
            return np.inf
        pos = x > 0
        return float(np.sum(x[pos] * np.log(x[pos])))

    def conjugate(self, zeta):
        # log-sum-exp with a max shift; scipy's version carries heavy per-call overhead
        z = np.asarray(zeta, dtype=np.float64)
        m = z.max()
        return float(m + np.log(np.exp(z - m).sum()))

    def grad_conjugate(self, zeta):
        # scipy's softmax shifts by the max, so huge duals do not overflow
        return softmax(np.asarray(zeta, dtype=np.float64))

    def md_subgradient(self, x):
        x = as_vector(x, self.dim, "x")
        if not np.all(x > 0):
            raise DomainError("entropy subgradient undefined on the simplex boundary")
        if abs(x.sum() - 1.0) > DOMAIN_TOL:
            raise DomainError("x is not on the simplex")
        return 1.0 + np.log(x)

    def md_dual(self, zeta, x=None):
        # 1 + log softmax(zeta) in the log domain: stays exact when softmax underflows
        zeta = np.asarray(zeta, dtype=np.float64)
        return 1.0 + zeta - self.conjugate(zeta)

    def __repr__(self):
        return f"EntropySimplex({self.dim})"


class ElasticNet(Regularizer):
    """``h = ||x||_1 + ||x||_2^2`` on R^n; 2-strongly convex w.r.t. L2, no mirror map."""

    kind = "elastic-net"

    def __init__(self, n):
        self.set = FullSpace(n)
        self.K = 2.0
        self.norm_tag = NormTag.L2
        self.mirror_map = None

    def value(self, x):
        x = np.asarray(x, dtype=np.float64)
        return float(np.abs(x).sum() + x @ x)

    def conjugate(self, zeta):
        s = np.maximum(np.abs(np.asarray(zeta, dtype=np.float64)) - 1.0, 0.0)
        return float(s @ s / 4.0)

    def grad_conjugate(self, zeta):
        zeta = np.asarray(zeta, dtype=np.float64)
        return np.sign(zeta) * np.maximum(np.abs(zeta) - 1.0, 0.0) / 2.0

    def __repr__(self):
        return f"ElasticNet({self.dim})"


class ProductRegularizer(Regularizer):
    """Separable sum of regularizers on a product set.

    The reference norm is ``sqrt(sum_i ||x_i||_i^2)``, for which the sum is
    strongly convex with the smallest component constant.
    """

    kind = "product"

    def __init__(self, parts):
        self.parts = tuple(parts)
        self.set = ProductSet([p.set for p in self.parts])
        self.K = min(p.K for p in self.parts)
        self.norm_tag = None
        if all(p.mirror_map is not None for p in self.parts):
            self.mirror_map = _ProductMap(self)

    def value(self, x):
        return float(sum(p.value(c) for p, c in zip(self.parts, self.set.split(x))))

    def conjugate(self, zeta):
        return float(sum(p.conjugate(c) for p, c in zip(self.parts, self.set.split(zeta))))

    def grad_conjugate(self, zeta):
        zeta = np.asarray(zeta, dtype=np.float64)
        return np.concatenate(
            [p.grad_conjugate(c) for p, c in zip(self.parts, self.set.split(zeta))]
        )

    def md_subgradient(self, x):
        x = as_vector(x, self.dim, "x")
        return np.concatenate(
            [p.md_subgradient(c) for p, c in zip(self.parts, self.set.split(x))]
        )

    def md_dual(self, zeta, x=None):
        zs = self.set.split(np.asarray(zeta, dtype=np.float64))
        xs = [None] * len(zs) if x is None else self.set.split(x)
        return np.concatenate([p.md_dual(z, xx) for p, z, xx in zip(self.parts, zs, xs)])

    def primal_norm(self, v):
        return float(np.sqrt(sum(p.primal_norm(c) ** 2 for p, c in zip(self.parts, self.set.split(v)))))

    def dual_norm(self, v):
        return float(np.sqrt(sum(p.dual_norm(c) ** 2 for p, c in zip(self.parts, self.set.split(v)))))

    def __repr__(self):
        return f"ProductRegularizer({list(self.parts)!r})"


class _ProductMap(MirrorMap):
    name = "product"

    def __init__(self, reg):
        self._reg = reg

    def value(self, x):
        parts = zip(self._reg.parts, self._reg.set.split(x))
        return float(sum(p.mirror_map.value(c) for p, c in parts))

    def grad(self, x):
        parts = zip(self._reg.parts, self._reg.set.split(x))
        return np.concatenate([p.mirror_map.grad(c) for p, c in parts])

    def grad_conjugate(self, theta):
        parts = zip(self._reg.parts, self._reg.set.split(theta))
        return np.concatenate([p.mirror_map.grad_conjugate(c) for p, c in parts])

    def in_interior(self, x):
        parts = zip(self._reg.parts, self._reg.set.split(x))
        return all(p.mirror_map.in_interior(c) for p, c in parts)


def grad_conjugate(h: Regularizer, zeta):
    return h.grad_conjugate(as_vector(zeta, h.dim, "zeta"))


def md_subgradient(h: Regularizer, x):
    return h.md_subgradient(x)


def make_regularizer(kind: str, set_: ConstraintSet | None = None, n: int | None = None) -> Regularizer:
    """Build a regularizer by kind name; used by the configuration loader."""
    key = kind.strip().lower().replace("_", "-")
    if key in ("euclidean", "euclidean-ball", "euclidean-free"):
        if set_ is None:
            if n is None:
                raise ArgumentError("euclidean regularizer needs a set or a dimension")
            set_ = FullSpace(n)
        return Euclidean(set_)
    if key in ("entropy", "entropy-simplex"):
        dim = set_.dim if set_ is not None else n
        if set_ is not None and not isinstance(set_, Simplex):
            raise ArgumentError("entropy regularizer requires a simplex constraint set")
        return EntropySimplex(dim)
    if key in ("elastic-net", "elasticnet"):
        dim = set_.dim if set_ is not None else n
        if set_ is not None and not isinstance(set_, FullSpace):
            raise ArgumentError("elastic-net regularizer lives on the full space")
        return ElasticNet(dim)
    raise ArgumentError(f"unknown regularizer kind {kind!r}")
