"""Vector helpers, norms and the subgradient-anchored Bregman divergence."""

from __future__ import annotations

import enum

import numpy as np

from .errors import DimensionError, DomainError


class NormTag(enum.Enum):
    L1 = "l1"
    L2 = "l2"
    LINF = "linf"

    @property
    def dual(self) -> "NormTag":
        return _DUAL[self]

    @classmethod
    def parse(cls, name) -> "NormTag":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("_", "")
        aliases = {"l1": cls.L1, "l2": cls.L2, "linf": cls.LINF, "inf": cls.LINF}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown norm {name!r}") from None


_DUAL = {NormTag.L1: NormTag.LINF, NormTag.L2: NormTag.L2, NormTag.LINF: NormTag.L1}


def as_vector(v, n=None, name="vector") -> np.ndarray:
    """Convert ``v`` to a finite 1-d float64 array, optionally checking its length."""
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise DimensionError(f"{name} has length {arr.shape[0]}, expected {n}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} has non-finite entries")
    return arr


def norm(tag, v) -> float:
    tag = NormTag.parse(tag)
    v = np.asarray(v, dtype=np.float64)
    if tag is NormTag.L2:
        # rescale so tiny or huge entries neither underflow nor overflow when squared
        m = float(np.max(np.abs(v))) if v.size else 0.0
        return m * float(np.linalg.norm(v / m)) if m > 0 and np.isfinite(m) else m
    if tag is NormTag.L1:
        return float(np.sum(np.abs(v)))
    return float(np.max(np.abs(v))) if v.size else 0.0


def dual_norm(tag, v) -> float:
    """Norm dual to ``tag`` evaluated at ``v`` (L1 <-> LInf, L2 self-dual)."""
    return norm(NormTag.parse(tag).dual, v)


def generalized_bregman(h, x_to, x_from, subgrad) -> float:
    """Bregman divergence of ``h`` from ``x_from`` to ``x_to`` anchored at ``subgrad``.

    Returns ``h(x_to) - h(x_from) - <subgrad, x_to - x_from>``.  The caller is
    responsible for ``subgrad`` being a subgradient of ``h`` at ``x_from``;
    nothing here checks it.

    Raises
    ------
    DomainError
        If either point lies outside ``dom h``.
    """
    x_to = np.asarray(x_to, dtype=np.float64)
    x_from = np.asarray(x_from, dtype=np.float64)
    h_to = h.value(x_to)
    h_from = h.value(x_from)
    if not np.isfinite(h_to):
        raise DomainError("x_to lies outside dom h")
    if not np.isfinite(h_from):
        raise DomainError("x_from lies outside dom h")
    return float(h_to - h_from - np.dot(subgrad, x_to - x_from))


def conjugate_bregman(h, theta_to, theta_from, x_anchor=None) -> float:
    """Bregman divergence of ``h*`` from ``theta_from`` to ``theta_to``.

    ``h*`` is differentiable for every regularizer here, so the anchor defaults
    to ``grad h*(theta_from)``.
    """
    theta_to = np.asarray(theta_to, dtype=np.float64)
    theta_from = np.asarray(theta_from, dtype=np.float64)
    if x_anchor is None:
        x_anchor = h.grad_conjugate(theta_from)
    return float(
        h.conjugate(theta_to)
        - h.conjugate(theta_from)
        - np.dot(x_anchor, theta_to - theta_from)
    )


def fenchel_residual(h, x, theta) -> float:
    """``|<theta, x> - h(x) - h*(theta)|``; zero iff ``theta`` is a subgradient of h at x."""
    hx = h.value(x)
    if not np.isfinite(hx):
        return float("inf")
    return float(abs(np.dot(theta, x) - hx - h.conjugate(theta)))
