"""Online linear optimization with UMD decision makers."""

from __future__ import annotations

import numpy as np

from .core import NormTag, as_vector, generalized_bregman, norm
from .errors import ArgumentError, BoundViolation, UnboundedError
from .geometry import EuclideanBall
from .mirror import Euclidean
from .solvers import DualPolicy, Trace, initial_state, umd_step


class Adversary:
    """Nature's side of the game.

    ``payoff(t, xs, zetas)`` sees the decisions ``x_1..x_t`` and its own
    past actions and returns ``zeta_t``.  ``M`` bounds the dual norm of every
    action.
    """

    M: float = 0.0
    kind = "adversary"

    def __init__(self, n):
        self.n = int(n)

    def payoff(self, t, xs, zetas):
        raise NotImplementedError

    def reset(self):
        pass


class ZeroAdversary(Adversary):
    kind = "zero"

    def payoff(self, t, xs, zetas):
        return np.zeros(self.n)


class FixedAdversary(Adversary):
    kind = "fixed"

    def __init__(self, c, norm_tag=NormTag.LINF):
        self.c = as_vector(c, name="c")
        super().__init__(self.c.shape[0])
        self.M = norm(norm_tag, self.c)

    def payoff(self, t, xs, zetas):
        return self.c.copy()


class AlternatingAdversary(FixedAdversary):
    """Plays ``+c`` on odd rounds and ``-c`` on even rounds."""

    kind = "alternating"

    def payoff(self, t, xs, zetas):
        return self.c.copy() if t % 2 == 1 else -self.c


class SeededRandomAdversary(Adversary):
    """I.i.d. uniform actions rescaled into the dual-norm ball of radius ``M``."""

    kind = "seeded-random"

    def __init__(self, n, M=1.0, seed=0, norm_tag=NormTag.LINF):
        super().__init__(n)
        self.M = float(M)
        self.seed = seed
        self.norm_tag = NormTag.parse(norm_tag)
        self.reset()

    def reset(self):
        self._rng = np.random.default_rng(self.seed)

    def payoff(self, t, xs, zetas):
        u = self._rng.uniform(-1.0, 1.0, self.n)
        return self.M * u / max(1.0, norm(self.norm_tag, u))


def make_adversary(kind, n, **params) -> Adversary:
    key = kind.strip().lower().replace("_", "-")
    if key == "zero":
        return ZeroAdversary(n)
    if key == "fixed":
        return FixedAdversary(params["c"])
    if key == "alternating":
        return AlternatingAdversary(params["c"])
    if key in ("seeded-random", "random"):
        return SeededRandomAdversary(n, params.get("M", 1.0), params.get("seed", 0),
                                     params.get("norm", NormTag.LINF))
    raise ArgumentError(f"unknown adversary kind {kind!r}")


def max_divergence(h, x_1, theta_1) -> float:
    """``max over X of D_h(x, x_1; theta_1)``.

    ``D_h(., x_1; theta_1)`` is convex, so on polytopes the maximum is
    attained at a vertex.  For the Euclidean regularizer on a ball,
    ``D_h(x, x_1; theta_1)`` is ``0.5 ||x - theta_1||^2`` up to a constant, so
    the maximizer is the point of the ball farthest from ``theta_1``.
    """
    set_ = h.set
    if not set_.compact:
        raise UnboundedError("divergence is unbounded on a non-compact set")
    verts = set_.vertices()
    if verts is not None:
        return max(generalized_bregman(h, v, x_1, theta_1) for v in verts)
    if isinstance(h, Euclidean) and isinstance(set_, EuclideanBall):
        d = np.asarray(theta_1, dtype=np.float64) - set_.center
        dn = np.linalg.norm(d)
        u = d / dn if dn > 0 else np.eye(set_.dim)[0]
        far = set_.center - set_.radius * u
        return generalized_bregman(h, far, x_1, theta_1)
    raise ArgumentError(f"no exact divergence maximizer for {h!r}")


def compute_regret(trace: Trace, set_) -> float:
    """``max_x sum <zeta_t, x> - sum <zeta_t, x_t>`` with an exact comparator."""
    if not set_.compact:
        raise UnboundedError("regret is undefined against a non-compact action set")
    if len(trace) == 0:
        return 0.0
    zetas = trace.column("zeta")
    X = trace.X
    best, _ = set_.support_max(zetas.sum(axis=0))
    return float(best - np.einsum("ij,ij->", zetas, X))


def run_regret_game(h, adversary: Adversary, eta, T, theta_1=None, policy="DA"):
    """Play ``T`` rounds; the decision maker steps with ``xi_t = eta * zeta_t``.

    Returns
    -------
    trace : Trace
        Row ``t`` holds ``x_t`` and, in ``extra["zeta"]``, Nature's reply.
    regret : float
    """
    if not h.set.compact:
        raise ArgumentError("online linear optimization needs a compact action set")
    if not eta > 0:
        raise ArgumentError("eta must be positive")
    if T < 1:
        raise ArgumentError("T must be >= 1")
    policy = DualPolicy.parse(policy)
    if policy.kind == "GoLD":
        raise ArgumentError("GoLD needs an objective; use DA or MD in the regret game")
    adversary.reset()
    trace = Trace()
    state = initial_state(h, theta_1)
    xs, zetas = [], []
    for _ in range(T):
        t = state.t
        xs.append(state.x)
        zeta = as_vector(adversary.payoff(t, list(xs), list(zetas)), h.dim, "zeta")
        bound = h.dual_norm(zeta)
        if bound > adversary.M * (1.0 + 1e-12) + 1e-12:
            raise BoundViolation(
                f"round {t}: ||zeta||_* = {bound:.6g} exceeds M = {adversary.M:.6g}"
            )
        zetas.append(zeta)
        xi = eta * zeta
        nxt = umd_step(h, state, xi, policy)
        trace.append(t, state.x, state.theta, xi, float(zeta @ state.x), nxt.branch,
                     zeta=zeta)
        state = nxt
    trace.final = state
    return trace, compute_regret(trace, h.set)


def regret_bound(omega, eta, M, T, K) -> float:
    """``omega / eta + eta M^2 T / (2K)``."""
    return omega / eta + eta * M * M * T / (2.0 * K)


def tuned_eta(omega, M, T, K) -> float:
    """Minimizer of ``regret_bound`` in ``eta``: ``sqrt(2 K omega / (M^2 T))``."""
    return float(np.sqrt(2.0 * K * omega / (M * M * T)))
