"""Unified mirror descent engine.

A UMD trajectory is a sequence of primal/dual pairs ``(x_t, theta_t)`` with
``x_t = grad h*(theta_t)`` and, for every ``x`` in ``X``,
``<theta_{t+1} - theta_t - xi_t, x - x_{t+1}> >= 0``.  The engine stores the
dual iterate and always recomputes the primal one from it, so the first
condition holds by construction; policies only differ in how the next dual
iterate is picked among the admissible ones:

* ``DA``   keeps ``theta_t + xi_t`` (dual averaging),
* ``MD``   resets to ``grad F(x_{t+1})`` (mirror descent),
* ``GoLD`` compares both every ``k`` steps, optionally after a ``tau``-step
  rollout, and keeps the one giving the lower objective.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .core import as_vector, conjugate_bregman
from .errors import (
    ArgumentError,
    CertificationError,
    DomainError,
    UnboundedError,
    UnsupportedError,
)

BRANCH_DA_STEP = "DA-step"
BRANCH_MD_STEP = "MD-step"
BRANCH_MD_CHOSEN = "MD-chosen"
BRANCH_DA_CHOSEN = "DA-chosen"
BRANCH_NONE = "none"


@dataclass(frozen=True)
class DualPolicy:
    kind: str
    k: int = 1
    tau: int = 1

    def __post_init__(self):
        if self.kind not in ("DA", "MD", "GoLD"):
            raise ArgumentError(f"unknown policy kind {self.kind!r}")
        if self.k < 1:
            raise ArgumentError("GoLD period k must be >= 1")
        if self.tau < 1:
            raise ArgumentError("GoLD lookahead tau must be >= 1")
        if self.tau > 1 and not self.tau < self.k:
            raise ArgumentError("lookahead GoLD requires 1 <= tau < k")

    @classmethod
    def da(cls):
        return cls("DA")

    @classmethod
    def md(cls):
        return cls("MD")

    @classmethod
    def gold(cls, k=1, tau=1):
        return cls("GoLD", int(k), int(tau))

    @property
    def needs_mirror_map(self):
        return self.kind != "DA"

    @property
    def name(self):
        if self.kind != "GoLD":
            return self.kind
        if self.tau == 1:
            return f"{self.k}-GoLD"
        return f"{self.k}-{self.tau}-GoLD"

    def is_comparison_step(self, t: int) -> bool:
        """Whether the dual iterate of index ``t`` is chosen by comparison."""
        return self.kind == "GoLD" and t >= 2 and (t - 2) % self.k == 0

    @classmethod
    def parse(cls, text) -> "DualPolicy":
        """Parse ``"DA"``, ``"MD"``, ``"5-GoLD"``, ``"20-7-GoLD"`` or ``"GoLD(20, 7)"``."""
        if isinstance(text, cls):
            return text
        s = str(text).strip()
        if s.upper() in ("DA", "MD"):
            return cls(s.upper())
        m = re.fullmatch(r"(\d+)(?:-(\d+))?-gold", s, flags=re.IGNORECASE)
        if not m:
            m = re.fullmatch(r"gold\(\s*(\d+)\s*(?:,\s*(\d+)\s*)?\)", s, flags=re.IGNORECASE)
        if not m:
            raise ArgumentError(f"cannot parse policy {text!r}")
        return cls.gold(int(m.group(1)), int(m.group(2) or 1))

    def __str__(self):
        return self.name


class StepSchedule:
    """Step sizes ``gamma_t`` for ``t >= 1``.

    A list schedule shorter than the horizon keeps using its last value.
    """

    def __init__(self, gammas, kind="list"):
        g = np.atleast_1d(np.asarray(gammas, dtype=np.float64))
        if g.size == 0 or not np.all(g > 0) or not np.all(np.isfinite(g)):
            raise ArgumentError("step sizes must be positive and finite")
        self._g = g
        self.kind = kind

    @classmethod
    def constant(cls, gamma):
        return cls([gamma], kind="constant")

    @classmethod
    def from_list(cls, gammas):
        return cls(gammas, kind="list")

    @classmethod
    def lipschitz_optimal(cls, omega, M, K, T):
        """Constant ``(omega / M) * sqrt(K / T)``, tuned for ``T`` nonsmooth steps."""
        if omega <= 0 or M <= 0 or K <= 0 or T < 1:
            raise ArgumentError("omega, M, K must be positive and T >= 1")
        return cls([omega / M * math.sqrt(K / T)], kind="constant")

    def __call__(self, t: int) -> float:
        if t < 1:
            raise ArgumentError("step index starts at 1")
        return float(self._g[min(t, self._g.size) - 1])

    def gammas(self, T: int) -> np.ndarray:
        return np.array([self(t) for t in range(1, T + 1)])

    def __repr__(self):
        if self.kind == "constant":
            return f"StepSchedule.constant({self._g[0]!r})"
        return f"StepSchedule.from_list({self._g.tolist()!r})"


def as_schedule(gamma) -> StepSchedule:
    if isinstance(gamma, StepSchedule):
        return gamma
    if np.ndim(gamma) == 0:
        return StepSchedule.constant(float(gamma))
    return StepSchedule.from_list(gamma)


@dataclass(frozen=True)
class UmdState:
    t: int
    x: np.ndarray
    theta: np.ndarray
    branch: str = BRANCH_NONE


@dataclass
class Trace:
    """Per-step records of a solve.

    Row ``t`` holds the iterate ``(x_t, theta_t)``, the objective ``f(x_t)``,
    the increment ``xi_t`` applied at that step, the branch that selected
    ``theta_{t+1}`` and the certification residuals of the transition
    ``t -> t+1``.  ``final`` is the state after the last step.
    """

    t: list = field(default_factory=list)
    x: list = field(default_factory=list)
    theta: list = field(default_factory=list)
    xi: list = field(default_factory=list)
    f: list = field(default_factory=list)
    branch: list = field(default_factory=list)
    res_I: list = field(default_factory=list)
    res_II: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    final: UmdState | None = None
    final_extra: dict = field(default_factory=dict)

    def append(self, t, x, theta, xi, f, branch, res_I=math.nan, res_II=math.nan, **extra):
        if self.t and t <= self.t[-1]:
            raise ValueError("trace indices must increase")
        self.t.append(t)
        self.x.append(x)
        self.theta.append(theta)
        self.xi.append(xi)
        self.f.append(f)
        self.branch.append(branch)
        self.res_I.append(res_I)
        self.res_II.append(res_II)
        for key, val in extra.items():
            self.extra.setdefault(key, []).append(val)

    def __len__(self):
        return len(self.t)

    @property
    def X(self):
        return np.array(self.x)

    @property
    def thetas(self):
        return np.array(self.theta)

    @property
    def xis(self):
        return np.array(self.xi)

    @property
    def values(self):
        return np.array(self.f, dtype=np.float64)

    def column(self, name):
        return np.array(self.extra[name])

    def states(self):
        """All states ``1..T+1`` (the last one is ``final``)."""
        out = [UmdState(t, x, th) for t, x, th in zip(self.t, self.x, self.theta)]
        if self.final is not None:
            out.append(self.final)
        return out


def _policy(policy) -> DualPolicy:
    return DualPolicy.parse(policy) if not isinstance(policy, DualPolicy) else policy


def gold_branch_choice(problem, h, x, theta_da, gammas, grad_x=None):
    """Pick between the MD and DA dual candidates at primal point ``x``.

    Both candidates are rolled out for ``len(gammas)`` steps, each step
    ``x <- grad h*(theta - sum gamma * grad f(x))`` along its own primal path,
    and the candidate whose final primal point has the lower objective wins.
    Ties go to MD.  ``x`` must equal ``grad h*(theta_da)``; the MD candidate is
    ``h.md_dual(theta_da, x)``.  If it is undefined the DA candidate is
    returned.

    Returns
    -------
    (theta, branch)
    """
    if h.mirror_map is None:
        raise UnsupportedError(f"GoLD needs a mirror map; {h.kind} has none")
    try:
        theta_md = h.md_dual(theta_da, x)
    except DomainError:
        return theta_da, BRANCH_DA_CHOSEN
    g0 = problem.grad(x) if grad_x is None else grad_x

    def rollout(theta):
        acc = np.array(theta, dtype=np.float64)
        xs = x
        for s, gamma in enumerate(gammas):
            g = g0 if s == 0 else problem.grad(xs)
            acc = acc - gamma * g
            xs = h.grad_conjugate(acc)
        return problem.value(xs)

    f_md = rollout(theta_md)
    f_da = rollout(theta_da)
    if f_md <= f_da:
        return theta_md, BRANCH_MD_CHOSEN
    return theta_da, BRANCH_DA_CHOSEN


def umd_step(h, state: UmdState, xi, policy="DA", *, problem=None, schedule=None,
             grad_next=None) -> UmdState:
    """One transition ``(x_t, theta_t) -> (x_{t+1}, theta_{t+1})``.

    ``x_{t+1} = grad h*(theta_t + xi)`` for every policy.  GoLD comparison steps
    need ``problem`` and ``schedule`` to evaluate the rollouts.
    """
    policy = _policy(policy)
    z = state.theta + xi
    x_next = h.grad_conjugate(z)
    t_next = state.t + 1
    if policy.kind == "DA":
        return UmdState(t_next, x_next, z, BRANCH_DA_STEP)
    if policy.kind == "MD":
        return UmdState(t_next, x_next, h.md_dual(z, x_next), BRANCH_MD_STEP)
    if h.mirror_map is None:
        raise UnsupportedError(f"GoLD needs a mirror map; {h.kind} has none")
    if not policy.is_comparison_step(t_next):
        return UmdState(t_next, x_next, z, BRANCH_DA_STEP)
    if problem is None or schedule is None:
        raise ArgumentError("GoLD comparison steps need the problem and step schedule")
    gammas = [schedule(t_next + s) for s in range(policy.tau)]
    theta, branch = gold_branch_choice(problem, h, x_next, z, gammas, grad_x=grad_next)
    return UmdState(t_next, x_next, theta, branch)


def certify_umd_step(h, prev: UmdState, xi, nxt: UmdState, tol=1e-7):
    """Check both UMD conditions on one transition.

    ``residual_I = ||x' - grad h*(theta')||_2`` and
    ``residual_II = <g, x'> - min_X <g, x>`` with ``g = theta' - theta - xi``.
    Condition (II) holds iff ``residual_II <= 0``.  The acceptance threshold
    scales with the magnitudes involved so that huge dual iterates are not
    rejected for rounding alone.

    Returns
    -------
    (ok, residual_I, residual_II)

    Raises
    ------
    UnboundedError
        On the full space when ``g != 0``: only ``g = 0`` is admissible there.
    """
    x_next = np.asarray(nxt.x, dtype=np.float64)
    res_I = float(np.linalg.norm(x_next - h.grad_conjugate(nxt.theta)))
    g = nxt.theta - (prev.theta + xi)
    if not np.any(g):
        res_II = 0.0
        witness = x_next
    else:
        value, witness = h.set.support_min(g)
        res_II = float(g @ x_next - value)
    scale_I = 1.0 + np.linalg.norm(x_next)
    scale_II = 1.0 + np.linalg.norm(g) * (np.linalg.norm(x_next) + np.linalg.norm(witness))
    ok = res_I <= tol * scale_I and res_II <= tol * scale_II
    return bool(ok), res_I, res_II


def initial_state(h, theta_1=None) -> UmdState:
    theta = np.zeros(h.dim) if theta_1 is None else as_vector(theta_1, h.dim, "theta_1")
    return UmdState(1, h.grad_conjugate(theta), theta, BRANCH_NONE)


def run_umd(problem, h, policy="DA", schedule=1.0, T=100, theta_1=None, certify=False,
            tol=1e-7) -> Trace:
    """Run ``T`` UMD steps with increments ``xi_t = -gamma_t f'(x_t)``.

    Raises
    ------
    CertificationError
        When ``certify`` is set and a step fails ``certify_umd_step``.
    """
    if T < 1:
        raise ArgumentError("T must be >= 1")
    policy = _policy(policy)
    schedule = as_schedule(schedule)
    if policy.needs_mirror_map and h.mirror_map is None:
        raise UnsupportedError(f"{policy.name} needs a mirror map; {h.kind} has none")
    trace = Trace()
    state = initial_state(h, theta_1)
    grad = problem.grad(state.x)
    for _ in range(T):
        t = state.t
        xi = -schedule(t) * grad
        fx = problem.value(state.x)
        x_probe = h.grad_conjugate(state.theta + xi)
        grad_next = problem.grad(x_probe)
        nxt = umd_step(h, state, xi, policy, problem=problem, schedule=schedule,
                       grad_next=grad_next)
        res_I = res_II = math.nan
        if certify:
            try:
                ok, res_I, res_II = certify_umd_step(h, state, xi, nxt, tol)
            except UnboundedError as exc:
                raise CertificationError(f"step {t}: {exc}", t=t) from exc
            if not ok:
                raise CertificationError(
                    f"step {t} violates the UMD conditions "
                    f"(residual_I={res_I:.3g}, residual_II={res_II:.3g})",
                    t=t, residual_I=res_I, residual_II=res_II,
                )
        trace.append(t, state.x, state.theta, xi, fx, nxt.branch, res_I, res_II)
        state, grad = nxt, grad_next
    trace.final = state
    return trace


def averaged_iterate(trace: Trace, schedule) -> np.ndarray:
    """Step-size weighted average of the primal iterates stored in ``trace``."""
    if len(trace) == 0:
        raise ArgumentError("empty trace")
    schedule = as_schedule(schedule)
    w = np.array([schedule(t) for t in trace.t])
    return (w[:, None] * trace.X).sum(axis=0) / w.sum()


def run_quasi_monotone(problem, h, schedule, T, theta_1=None, policy="DA") -> Trace:
    """UMD driven by subgradients at the running convex combination ``y_t``.

    ``y_{t+1} = (1 - nu_t) y_t + nu_t x_{t+1}`` with
    ``nu_t = gamma_{t+1} / sum_{s <= t+1} gamma_s``; the guarantee is on
    the last ``y``.  Trace rows carry ``y`` in ``extra["y"]``.
    """
    if T < 1:
        raise ArgumentError("T must be >= 1")
    policy = _policy(policy)
    if policy.kind == "GoLD":
        raise ArgumentError("quasi-monotone wrapping supports DA or MD policies")
    schedule = as_schedule(schedule)
    trace = Trace()
    state = initial_state(h, theta_1)
    y = state.x.copy()
    gsum = schedule(1)
    for _ in range(T):
        t = state.t
        xi = -schedule(t) * problem.grad(y)
        nxt = umd_step(h, state, xi, policy)
        trace.append(t, state.x, state.theta, xi, problem.value(state.x), nxt.branch,
                     y=y, f_y=problem.value(y))
        gamma_next = schedule(t + 1)
        gsum += gamma_next
        nu = gamma_next / gsum
        y = (1.0 - nu) * y + nu * nxt.x
        state = nxt
    trace.final = state
    trace.final_extra["y"] = y
    return trace


def aumd_coefficients(K, L, T):
    """Step sizes and mixing weights of accelerated UMD.

    ``gamma_1 = K/L``, ``gamma_{t+1} = K/(2L) (1 + sqrt(1 + (2 L gamma_t / K)^2))``,
    ``nu_t = K / (L gamma_t)``.
    """
    if not (K > 0 and L > 0):
        raise ArgumentError("K and L must be positive")
    if T < 1:
        raise ArgumentError("T must be >= 1")
    gammas = np.empty(T)
    gammas[0] = K / L
    for t in range(1, T):
        r = 2.0 * L * gammas[t - 1] / K
        gammas[t] = K / (2.0 * L) * (1.0 + math.sqrt(1.0 + r * r))
    nus = K / (L * gammas)
    return gammas, nus


def run_aumd(problem, h, L=None, T=100, theta_1=None, K=None) -> Trace:
    """Accelerated UMD with the DA dual choice.

    Trace rows store ``y_t`` and ``z_t`` in ``extra``; ``final_extra["z"]``
    is ``z_{T+1}``, the point carrying the ``1/T^2`` guarantee.
    """
    L = problem.L if L is None else L
    K = h.K if K is None else K
    if L is None:
        raise ArgumentError("accelerated UMD needs a smoothness constant")
    gammas, nus = aumd_coefficients(K, L, T)
    trace = Trace()
    state = initial_state(h, theta_1)
    z = state.x.copy()
    for i in range(T):
        t = state.t
        nu = nus[i]
        y = (1.0 - nu) * z + nu * state.x
        xi = -gammas[i] * problem.grad(y)
        nxt = umd_step(h, state, xi, "DA")
        trace.append(t, state.x, state.theta, xi, problem.value(state.x), nxt.branch,
                     y=y, z=z, f_z=problem.value(z))
        z = y + nu * (nxt.x - state.x)
        state = nxt
    trace.final = state
    trace.final_extra["z"] = z
    return trace


def three_point_gaps(h, prev: UmdState, xi, nxt: UmdState, x, h_x=None):
    """Slack of both three-point inequalities at comparator ``x`` (nonnegative when they hold).

    Returns ``(rhs - lhs)`` for
    ``<xi, x - x'> <= D(x, x_t; theta) - D(x, x'; theta') - D(x', x_t; theta)`` and
    ``<xi, x - x_t> <= D(x, x_t; theta) - D(x, x'; theta') + D_{h*}(theta + xi, theta)``.

    ``x`` may be a single point or a batch of rows; ``h_x`` optionally supplies
    the precomputed values ``h(x)`` so repeated checks against fixed
    comparators skip re-evaluating ``h``.  Batches return two arrays.
    """
    X = np.asarray(x, dtype=np.float64)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if h_x is None:
        h_x = np.array([h.value(r) for r in X])
    h_x = np.atleast_1d(np.asarray(h_x, dtype=np.float64))
    if not np.all(np.isfinite(h_x)):
        raise DomainError("comparator lies outside dom h")
    h_prev, h_next = h.value(prev.x), h.value(nxt.x)
    if not (np.isfinite(h_prev) and np.isfinite(h_next)):
        raise DomainError("iterate lies outside dom h")
    d_prev = h_x - h_prev - (X - prev.x) @ prev.theta
    d_next = h_x - h_next - (X - nxt.x) @ nxt.theta
    d_step = h_next - h_prev - (nxt.x - prev.x) @ prev.theta
    gap_3p = d_prev - d_next - d_step - (X - nxt.x) @ xi
    d_conj = conjugate_bregman(h, prev.theta + xi, prev.theta, prev.x)
    gap_regret = d_prev - d_next + d_conj - (X - prev.x) @ xi
    if single:
        return float(gap_3p[0]), float(gap_regret[0])
    return gap_3p, gap_regret
