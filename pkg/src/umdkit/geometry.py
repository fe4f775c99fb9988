"""Closed convex constraint sets.

Every set exposes the same three oracles: Euclidean projection, an exact
linear-minimization (support) oracle and a distance-based membership test.
Sets are immutable once built.
"""

from __future__ import annotations

import itertools

import numpy as np

from .core import as_vector
from .errors import ArgumentError, DimensionError, UnboundedError


class ConstraintSet:
    """Base class.  Subclasses implement ``project`` and ``support_min``."""

    dim: int
    compact = True

    def project(self, y):
        raise NotImplementedError

    def support_min(self, g):
        raise NotImplementedError

    def contains(self, x, tol=0.0) -> bool:
        if tol < 0:
            raise ArgumentError("tol must be nonnegative")
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.dim,) or not np.all(np.isfinite(x)):
            return False
        return bool(np.linalg.norm(x - self.project(x)) <= tol)

    def support_max(self, g):
        value, witness = self.support_min(-np.asarray(g, dtype=np.float64))
        return -value, witness

    def vertices(self):
        """Extreme points for polytopes; ``None`` when they are not finite in number."""
        return None

    def anchor(self) -> np.ndarray:
        """A canonical feasible point (center or barycenter)."""
        raise NotImplementedError

    def sample(self, rng, size):
        """``size`` feasible points as rows of an array."""
        raise NotImplementedError

    def _check(self, v, name="vector"):
        return as_vector(v, self.dim, name)


class FullSpace(ConstraintSet):
    compact = False

    def __init__(self, n):
        if int(n) < 1:
            raise ArgumentError("dimension must be >= 1")
        self.dim = int(n)

    def project(self, y):
        return self._check(y).copy()

    def support_min(self, g):
        g = self._check(g, "g")
        if np.any(g != 0.0):
            raise UnboundedError("linear function is unbounded below on the full space")
        return 0.0, np.zeros(self.dim)

    def anchor(self):
        return np.zeros(self.dim)

    def sample(self, rng, size, scale=1.0):
        return scale * rng.standard_normal((size, self.dim))

    def __repr__(self):
        return f"FullSpace({self.dim})"


class EuclideanBall(ConstraintSet):
    def __init__(self, center, radius):
        self.center = as_vector(center, name="center")
        self.radius = float(radius)
        if not self.radius > 0:
            raise ArgumentError("radius must be positive")
        self.dim = self.center.shape[0]

    @classmethod
    def centered(cls, n, radius=1.0):
        return cls(np.zeros(n), radius)

    def project(self, y):
        y = self._check(y)
        d = y - self.center
        dist = np.linalg.norm(d)
        if dist <= self.radius:
            return y.copy()
        return self.center + d * (self.radius / dist)

    def contains(self, x, tol=0.0) -> bool:
        if tol < 0:
            raise ArgumentError("tol must be nonnegative")
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.dim,) or not np.all(np.isfinite(x)):
            return False
        # distance to the projection is max(||x - c|| - r, 0)
        return bool(np.linalg.norm(x - self.center) - self.radius <= tol)

    def support_min(self, g):
        g = self._check(g, "g")
        gn = np.linalg.norm(g)
        if gn == 0.0:
            return 0.0, self.center.copy()
        witness = self.center - self.radius * g / gn
        return float(g @ self.center - self.radius * gn), witness

    def anchor(self):
        return self.center.copy()

    def sample(self, rng, size):
        d = rng.standard_normal((size, self.dim))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        r = self.radius * rng.uniform(size=(size, 1)) ** (1.0 / self.dim)
        return self.center + r * d

    def __repr__(self):
        return f"EuclideanBall(center={self.center.tolist()}, radius={self.radius})"


def project_simplex(y, total=1.0):
    """Euclidean projection onto ``{x >= 0, sum x = total}`` by sort-and-threshold."""
    y = np.asarray(y, dtype=np.float64)
    u = np.sort(y)[::-1]
    css = np.cumsum(u) - total
    idx = np.arange(1, y.shape[0] + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    tau = css[rho] / (rho + 1.0)
    return np.maximum(y - tau, 0.0)


class Simplex(ConstraintSet):
    """Probability simplex in R^n."""

    def __init__(self, n):
        if int(n) < 1:
            raise ArgumentError("simplex dimension must be >= 1")
        self.dim = int(n)

    def project(self, y):
        return project_simplex(self._check(y))

    def support_min(self, g):
        g = self._check(g, "g")
        i = int(np.argmin(g))
        witness = np.zeros(self.dim)
        witness[i] = 1.0
        return float(g[i]), witness

    def vertices(self):
        return np.eye(self.dim)

    def anchor(self):
        return np.full(self.dim, 1.0 / self.dim)

    def sample(self, rng, size):
        return rng.dirichlet(np.ones(self.dim), size=size)

    def __repr__(self):
        return f"Simplex({self.dim})"


class Box(ConstraintSet):
    def __init__(self, lower, upper):
        self.lower = as_vector(lower, name="lower")
        self.upper = as_vector(upper, self.lower.shape[0], name="upper")
        if np.any(self.lower > self.upper):
            raise ArgumentError("box requires lower <= upper componentwise")
        self.dim = self.lower.shape[0]

    def project(self, y):
        return np.clip(self._check(y), self.lower, self.upper)

    def support_min(self, g):
        g = self._check(g, "g")
        witness = np.where(g < 0, self.upper, self.lower)
        return float(g @ witness), witness

    def vertices(self):
        if self.dim > 16:
            return None
        return np.array(
            [np.where(bits, self.upper, self.lower)
             for bits in itertools.product([False, True], repeat=self.dim)]
        )

    def anchor(self):
        return 0.5 * (self.lower + self.upper)

    def sample(self, rng, size):
        return rng.uniform(self.lower, self.upper, size=(size, self.dim))

    def __repr__(self):
        return f"Box(lower={self.lower.tolist()}, upper={self.upper.tolist()})"


class Segment(ConstraintSet):
    """Closed segment ``[a, b]``; ``Segment([0, 0], [1, 0])`` is ``[0,1] x {0}``."""

    def __init__(self, a, b):
        self.a = as_vector(a, name="a")
        self.b = as_vector(b, self.a.shape[0], name="b")
        self.dim = self.a.shape[0]
        self._d = self.b - self.a
        self._dd = float(self._d @ self._d)

    def project(self, y):
        y = self._check(y)
        if self._dd == 0.0:
            return self.a.copy()
        lam = np.clip((y - self.a) @ self._d / self._dd, 0.0, 1.0)
        return self.a + lam * self._d

    def support_min(self, g):
        g = self._check(g, "g")
        va, vb = float(g @ self.a), float(g @ self.b)
        if vb < va:
            return vb, self.b.copy()
        return va, self.a.copy()

    def vertices(self):
        return np.vstack([self.a, self.b])

    def anchor(self):
        return 0.5 * (self.a + self.b)

    def sample(self, rng, size):
        lam = rng.uniform(size=(size, 1))
        return self.a + lam * self._d

    def __repr__(self):
        return f"Segment({self.a.tolist()}, {self.b.tolist()})"


Segment2D = Segment


class ProductSet(ConstraintSet):
    """Cartesian product of sets acting on concatenated coordinates."""

    def __init__(self, parts):
        self.parts = tuple(parts)
        if not self.parts:
            raise ArgumentError("product of zero sets")
        self.dims = [p.dim for p in self.parts]
        self.offsets = np.cumsum([0] + self.dims)
        self.dim = int(self.offsets[-1])
        self.compact = all(p.compact for p in self.parts)

    def split(self, v):
        v = np.asarray(v, dtype=np.float64)
        if v.shape[-1] != self.dim:
            raise DimensionError(f"expected length {self.dim}, got {v.shape[-1]}")
        return [v[..., lo:hi] for lo, hi in zip(self.offsets[:-1], self.offsets[1:])]

    def project(self, y):
        y = self._check(y)
        return np.concatenate([p.project(c) for p, c in zip(self.parts, self.split(y))])

    def support_min(self, g):
        g = self._check(g, "g")
        value, witness = 0.0, []
        for p, c in zip(self.parts, self.split(g)):
            v, w = p.support_min(c)
            value += v
            witness.append(w)
        return value, np.concatenate(witness)

    def vertices(self):
        verts = [p.vertices() for p in self.parts]
        if any(v is None for v in verts):
            return None
        return np.array([np.concatenate(c) for c in itertools.product(*verts)])

    def anchor(self):
        return np.concatenate([p.anchor() for p in self.parts])

    def sample(self, rng, size):
        return np.hstack([p.sample(rng, size) for p in self.parts])

    def __repr__(self):
        return f"ProductSet({list(self.parts)!r})"


def support_min(set_, g):
    """``(min over X of <g, x>, minimizer)``."""
    return set_.support_min(g)


def euclidean_project(set_, y):
    return set_.project(y)


def contains(set_, x, tol=0.0):
    return set_.contains(x, tol)
