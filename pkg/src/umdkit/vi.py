"""Unified mirror prox for monotone variational inequalities."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ArgumentError, CertificationError, DimensionError
from .solvers import Trace, certify_umd_step, initial_state, umd_step


@dataclass(frozen=True)
class MonotoneOperator:
    """Operator ``phi: X -> R^n`` with an optional Lipschitz constant ``L``."""

    n: int
    phi: Callable[[np.ndarray], np.ndarray]
    L: float | None = None
    set: object = None
    name: str = "operator"
    info: dict = field(default_factory=dict, compare=False, repr=False)

    def __call__(self, x):
        return self.phi(x)


def monotonicity_defect(op: MonotoneOperator, points) -> float:
    """Most negative ``<phi(x') - phi(x), x' - x>`` over consecutive pairs of ``points``."""
    pts = np.asarray(points, dtype=np.float64)
    worst = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        worst = min(worst, float((op(b) - op(a)) @ (b - a)))
    return worst


def _variational_residual(set_, g, x) -> float:
    # max over X of <g, x - x'>; <= 0 iff <g, x' - x> >= 0 for all x' in X
    if not np.any(g):
        return 0.0
    value, _ = set_.support_min(g)
    return float(g @ x - value)


def run_ump(op: MonotoneOperator, h, gamma, T, theta_1=None, zeta_policy="MD",
            theta_policy="DA", certify=False, tol=1e-7):
    """Unified mirror prox iterates and the average of the extrapolation points.

    Each step picks ``zeta_t`` (``MD``: ``grad F(x_t)``; ``DA``: ``theta_t``),
    extrapolates ``y_t = grad h*(zeta_t - gamma phi(x_t))`` and then performs a
    UMD step ``(x_{t+1}, theta_{t+1})`` from ``theta_t - gamma phi(y_t)`` with
    ``theta_policy`` choosing the next dual iterate.

    ``zeta_policy="MD", theta_policy="MD"`` with ``theta_1 = grad F(x_1)`` is
    mirror prox; ``zeta_policy="MD", theta_policy="DA"`` is dual extrapolation.

    Returns
    -------
    trace : Trace
        ``extra`` carries ``y``, ``zeta`` and ``res_var`` per step.
    y_bar : ndarray
        Plain average of ``y_1..y_T``.
    """
    if T < 1:
        raise ArgumentError("T must be >= 1")
    if not gamma > 0:
        raise ArgumentError("gamma must be positive")
    if op.n != h.dim:
        raise DimensionError("operator and regularizer dimensions differ")
    zeta_policy = zeta_policy.upper()
    if zeta_policy not in ("MD", "DA"):
        raise ArgumentError(f"unknown zeta policy {zeta_policy!r}")
    trace = Trace()
    state = initial_state(h, theta_1)
    y_sum = np.zeros(h.dim)
    for _ in range(T):
        t = state.t
        zeta = h.md_dual(state.theta, state.x) if zeta_policy == "MD" else state.theta
        y = h.grad_conjugate(zeta - gamma * op(state.x))
        xi = -gamma * op(y)
        nxt = umd_step(h, state, xi, theta_policy)
        res_var = _variational_residual(h.set, zeta - state.theta, state.x)
        res_I = res_II = math.nan
        if certify:
            ok, res_I, res_II = certify_umd_step(h, state, xi, nxt, tol)
            g = zeta - state.theta
            scale = 1.0 + np.linalg.norm(g) * (1.0 + np.linalg.norm(state.x))
            if not ok or res_var > tol * scale:
                raise CertificationError(
                    f"UMP step {t} failed certification (res_var={res_var:.3g})",
                    t=t, residual_I=res_I, residual_II=res_II,
                )
        trace.append(t, state.x, state.theta, xi, math.nan, nxt.branch, res_I, res_II,
                     y=y, zeta=zeta, res_var=res_var)
        y_sum += y
        state = nxt
    trace.final = state
    y_bar = y_sum / T
    trace.final_extra["y_bar"] = y_bar
    return trace, y_bar


def vi_gap(op: MonotoneOperator, y_bar, probe_points=None, set_=None) -> float:
    """``max over probes x of <phi(x), y_bar - x>``.

    Defaults to the vertices of the operator's set, which makes the value the
    exact maximum over the set for bilinear saddle operators on polytopes.
    """
    y_bar = np.asarray(y_bar, dtype=np.float64)
    if probe_points is None:
        set_ = set_ if set_ is not None else op.set
        probe_points = None if set_ is None else set_.vertices()
        if probe_points is None:
            raise ArgumentError("no probe points given and the set has no vertex list")
    probes = np.atleast_2d(np.asarray(probe_points, dtype=np.float64))
    return float(max(op(x) @ (y_bar - x) for x in probes))
