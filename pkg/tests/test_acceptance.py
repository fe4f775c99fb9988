"""Acceptance criteria, one test per criterion.

Each test prints a single ``[PASS]`` / ``[FAIL]`` line; run with ``-s`` to see
them.  Thresholds are the stated tolerances, not tuned to the results.
"""

import contextlib
import math
import time

import numpy as np
import pytest

from oracles import (
    dual_extrapolation_euclidean,
    kkt_ball_quadratic,
    l1_ball_argmin,
    mirror_prox_euclidean,
)
from umdkit import (
    Box,
    Dataset,
    ElasticNet,
    EntropySimplex,
    Euclidean,
    EuclideanBall,
    FullSpace,
    MonotoneOperator,
    ProductRegularizer,
    Segment,
    Simplex,
    StepSchedule,
    aumd_coefficients,
    averaged_iterate,
    certify_umd_step,
    estimate_f_star,
    make_bilinear_saddle,
    make_least_squares,
    run_aumd,
    run_quasi_monotone,
    run_ump,
    run_umd,
    umd_step,
    vi_gap,
)
from umdkit.online import SeededRandomAdversary, max_divergence, regret_bound, run_regret_game, tuned_eta
from umdkit.problems import make_l1_distance, random_quadratic
from umdkit.solvers import UmdState, initial_state, three_point_gaps


@contextlib.contextmanager
def criterion(label, budget=None):
    """Print one verdict line; failures inside the block still propagate."""
    start = time.perf_counter()
    notes = []
    try:
        yield notes
    except BaseException as exc:
        print(f"\n[FAIL] {label}: {type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}")
        raise
    elapsed = time.perf_counter() - start
    if budget is not None and elapsed >= budget:
        print(f"\n[FAIL] {label}: runtime {elapsed:.2f}s exceeds {budget}s")
        pytest.fail(f"{label} took {elapsed:.2f}s (budget {budget}s)")
    extra = "; ".join(notes)
    print(f"\n[PASS] {label} ({elapsed:.2f}s){': ' + extra if extra else ''}")


def _check(cond, message):
    if not cond:
        raise AssertionError(message)


# --------------------------------------------------------------------------- 1

def _three_point_cases(n=3):
    ball = EuclideanBall(np.zeros(n), 1.0)
    gold = ["1-GoLD", "5-GoLD", "20-7-GoLD"]
    with_map = ["DA", "MD"] + gold
    return [
        (Euclidean(FullSpace(n)), with_map),
        (Euclidean(ball), with_map),
        (Euclidean(Simplex(n)), with_map),
        (Euclidean(Box(-np.ones(n), np.ones(n))), with_map),
        (Euclidean(Segment(np.zeros(n), np.r_[1.0, np.zeros(n - 1)])), with_map),
        (EntropySimplex(n), with_map),
        (ProductRegularizer([EntropySimplex(2), Euclidean(EuclideanBall(np.zeros(1), 1.0))]), with_map),
        (ElasticNet(n), ["DA"]),
    ]


def test_c1_three_point_inequalities():
    n, runs, T, n_comp, slack = 3, 50, 50, 20, 1e-7
    with criterion("C1 three-point inequalities (all regularizer/set/policy combos)", budget=30) as notes:
        rng = np.random.default_rng(2024)
        prob = random_quadratic(n, seed=11)
        schedule = StepSchedule.constant(0.5)
        worst, combos, checked = math.inf, 0, 0
        for h, policies in _three_point_cases(n):
            if isinstance(h.set, FullSpace):
                comps = rng.uniform(-2, 2, size=(n_comp, n))
            else:
                comps = h.set.sample(rng, n_comp)
            hx = np.array([h.value(c) for c in comps])
            for pol in policies:
                combos += 1
                for _ in range(runs):
                    state = initial_state(h, rng.uniform(-2, 2, n))
                    for _ in range(T):
                        xi = rng.uniform(-1, 1, n)
                        nxt = umd_step(h, state, xi, pol, problem=prob, schedule=schedule)
                        g1, g2 = three_point_gaps(h, state, xi, nxt, comps, hx)
                        worst = min(worst, g1.min(), g2.min())
                        checked += 2 * n_comp
                        state = nxt
                _check(worst >= -slack, f"{h!r}/{pol}: slack {worst:.3g} < -{slack}")
        notes.append(f"{combos} combos, {checked} inequalities, worst slack {worst:.2e}")


# --------------------------------------------------------------------------- 2

def _admissible(h, zeta, x_next, theta_next, tol=1e-7):
    prev = UmdState(1, h.grad_conjugate(zeta), np.asarray(zeta, float))
    nxt = UmdState(2, np.asarray(x_next, float), np.asarray(theta_next, float))
    return certify_umd_step(h, prev, np.zeros_like(prev.theta), nxt, tol)


def test_c2_certification():
    with criterion("C2 certification of every step; corrupted duals rejected") as notes:
        # lookahead needs tau < k, so tau = 7 only pairs with k = 20
        pairs = [(k, tau) for k in (1, 5, 20) for tau in (1, 7) if tau == 1 or tau < k]
        policies = ["DA", "MD"] + [f"{k}-{tau}-GoLD" for k, tau in pairs]
        steps = 0
        for seed in range(3):
            prob = random_quadratic(5, seed=seed)
            for h in (Euclidean(EuclideanBall(np.zeros(5), 1.0)), EntropySimplex(5),
                      Euclidean(Box(-np.ones(5), np.ones(5)))):
                for pol in policies:
                    for gamma in (0.1, 3.0, 1e3):
                        run_umd(prob, h, pol, gamma, 60, certify=True)
                        steps += 60
        notes.append(f"{steps} certified steps")

        # corrupted dual: shift a valid MD dual outward along the normal
        h = Euclidean(EuclideanBall(np.zeros(5), 1.0))
        prob = random_quadratic(5, seed=0)
        state = initial_state(h)
        xi = -3.0 * prob.grad(state.x)
        good = umd_step(h, state, xi, "MD")
        ok, _, _ = certify_umd_step(h, state, xi, good)
        _check(ok, "clean MD step should certify")
        bad = UmdState(good.t, good.x, good.theta + 0.5 * np.ones(5))
        ok, r1, r2 = certify_umd_step(h, state, xi, bad)
        _check(not ok, f"corrupted dual accepted (res_I={r1:.3g}, res_II={r2:.3g})")

        # ball: from theta + xi = (2.5, 0) the admissible duals at x' = (1, 0)
        # are exactly the segment [(1, 0), (2.5, 0)]
        ball = Euclidean(EuclideanBall(np.zeros(2), 1.0))
        zeta = np.array([2.5, 0.0])
        for s in np.linspace(-1.0, 4.0, 51):
            for off in (0.0, 0.3, -0.3):
                ok, _, _ = _admissible(ball, zeta, [1.0, 0.0], [s, off])
                expected = off == 0.0 and 1.0 - 1e-12 <= s <= 2.5 + 1e-12
                _check(ok == expected, f"ball: theta'=({s:.2f},{off}) admissible={ok}")
        _check(np.allclose(umd_step(ball, initial_state(ball, zeta), np.zeros(2), "MD").theta, [1, 0]),
               "MD picks the (1, 0) endpoint")
        _check(np.allclose(umd_step(ball, initial_state(ball, zeta), np.zeros(2), "DA").theta, zeta),
               "DA picks the (2.5, 0) endpoint")

        # segment [0,1] x {0}: from (-1, 0.5) the admissible duals at x' = (0, 0)
        # form the strip -1 <= theta'_1 <= 0 with theta'_2 free
        seg = Euclidean(Segment([0.0, 0.0], [1.0, 0.0]))
        zeta = np.array([-1.0, 0.5])
        for a in np.linspace(-2.0, 1.0, 31):
            for b in np.linspace(-2.0, 2.0, 9):
                ok, _, _ = _admissible(seg, zeta, [0.0, 0.0], [a, b])
                expected = -1.0 - 1e-12 <= a <= 1e-12
                _check(ok == expected, f"segment: theta'=({a:.2f},{b:.2f}) admissible={ok}")
        ok, _, _ = _admissible(seg, zeta, [0.0, 0.0], zeta + [0.0, 1.0])
        _check(ok, "a shift along the segment's normal stays admissible")
        ok, _, r2 = _admissible(seg, zeta, [0.0, 0.0], zeta + [-1.0, 0.0])
        _check(not ok and r2 > 0, "a shift out of the strip must fail condition (II)")
        notes.append("ball segment and segment strip regions reproduced")


# ------------------------------------------------------------------------ 3, 6

def _nonsmooth_instance():
    n = 10
    c = np.random.default_rng(7).normal(size=n) * 1.5
    prob = make_l1_distance(c)
    h = Euclidean(EuclideanBall(np.zeros(n), 1.0))
    f_star = float(np.abs(l1_ball_argmin(c, 1.0) - c).sum())
    x1 = h.grad_conjugate(np.zeros(n))
    omega = math.sqrt(2.0 * max_divergence(h, x1, np.zeros(n)))
    return prob, h, f_star, omega


def test_c3_nonsmooth_rate():
    with criterion("C3 nonsmooth rate of the averaged iterate", budget=5) as notes:
        prob, h, f_star, omega = _nonsmooth_instance()
        for T in (100, 1000):
            sched = StepSchedule.lipschitz_optimal(omega, prob.M, h.K, T)
            tr = run_umd(prob, h, "DA", sched, T)
            err = prob.value(averaged_iterate(tr, sched)) - f_star
            bound = omega * prob.M / math.sqrt(h.K * T)
            _check(err <= bound + 1e-6, f"T={T}: {err:.4g} > {bound:.4g}")
            notes.append(f"T={T} err {err:.3e} <= {bound:.3e}")


def test_c6_quasi_monotone_last_iterate():
    with criterion("C6 quasi-monotone last-iterate rate") as notes:
        prob, h, f_star, omega = _nonsmooth_instance()
        for T in (100, 1000):
            gamma = omega / (prob.M * math.sqrt(T))
            tr = run_quasi_monotone(prob, h, gamma, T)
            err = prob.value(tr.final_extra["y"]) - f_star
            bound = omega * prob.M / math.sqrt(T)
            _check(err <= bound + 1e-6, f"T={T}: {err:.4g} > {bound:.4g}")
            notes.append(f"T={T} err {err:.3e} <= {bound:.3e}")


# ------------------------------------------------------------------------ 4, 5

def _smooth_instance():
    n = 20
    prob = random_quadratic(n, seed=3, radius=1.0, center_norm=3.0)
    h = Euclidean(EuclideanBall(np.zeros(n), 1.0))
    x_star = kkt_ball_quadratic(prob.info["Q"], prob.info["center"], 1.0)
    assert abs(np.linalg.norm(x_star) - 1.0) < 1e-9
    return prob, h, x_star, prob.value(x_star)


def test_c4_smooth_rate_and_descent():
    with criterion("C4 smooth rate and per-step descent", budget=5) as notes:
        prob, h, x_star, f_star = _smooth_instance()
        gamma, T = h.K / prob.L, 500
        for pol in ("DA", "MD", "1-GoLD", "5-GoLD"):
            tr = run_umd(prob, h, pol, gamma, T)
            D = h.bregman(x_star, tr.X[0], tr.theta[0])
            err = prob.value(tr.final.x) - f_star
            _check(err <= D / (gamma * T) + 1e-6, f"{pol}: {err:.3g} > {D / (gamma * T):.3g}")
            xs = np.vstack([tr.X, tr.final.x])
            f = np.array([prob.value(x) for x in xs])
            step = np.linalg.norm(np.diff(xs, axis=0), axis=1)
            worst = np.max(np.diff(f) + prob.L / 2 * step**2)
            _check(worst <= 1e-7, f"{pol}: descent violated by {worst:.3g}")
            notes.append(f"{pol} err {err:.1e}")


def test_c5_accelerated_rate():
    with criterion("C5 accelerated rate and coefficient identities") as notes:
        prob, h, x_star, f_star = _smooth_instance()
        for T in (50, 200):
            tr = run_aumd(prob, h, T=T)
            D = h.bregman(x_star, tr.X[0], tr.theta[0])
            err = prob.value(tr.final_extra["z"]) - f_star
            bound = 4 * prob.L * D / (h.K * T**2)
            _check(err <= bound + 1e-6, f"T={T}: {err:.3g} > {bound:.3g}")
            g, nu = aumd_coefficients(h.K, prob.L, T)
            csum = np.cumsum(g)
            _check(np.allclose(g / nu, csum, rtol=1e-9, atol=0), "gamma_t / nu_t != sum gamma_s")
            _check(csum[-1] >= h.K * T**2 / (4 * prob.L) * (1 - 1e-9), "sum gamma_t below K T^2 / 4L")
            notes.append(f"T={T} err {err:.2e} <= {bound:.2e}")


# --------------------------------------------------------------------------- 7

def test_c7_ump_matching_pennies():
    with criterion("C7 UMP on matching pennies", budget=5) as notes:
        A = np.array([[1.0, -1.0], [-1.0, 1.0]])
        op = make_bilinear_saddle(A)
        h = ProductRegularizer([EntropySimplex(2), EntropySimplex(2)])
        _check(op.L == np.abs(A).max(), "L must be max |A_ij|")
        gamma, T = h.K / op.L, 1000
        tr, y_bar = run_ump(op, h, gamma, T)
        omega = max_divergence(h, tr.X[0], tr.theta[0])
        gap = vi_gap(op, y_bar)
        _check(gap <= omega / (gamma * T) + 1e-6, f"gap {gap:.3g} > {omega / (gamma * T):.3g}")
        dist = np.abs(y_bar - 0.5).max()
        _check(dist <= 3e-2, f"y_bar {y_bar} is {dist:.3g} from uniform")
        notes.append(f"gap {gap:.2e}, bound {omega / (gamma * T):.2e}, dist {dist:.1e}")


# --------------------------------------------------------------------------- 8

def test_c8_regret_bound():
    with criterion("C8 regret bound, entropy on Simplex(10)") as notes:
        h = EntropySimplex(10)
        theta_1 = np.zeros(10)
        omega = max_divergence(h, h.grad_conjugate(theta_1), theta_1)
        for T in (100, 1000):
            adv = SeededRandomAdversary(10, M=1.0, seed=5)
            eta = tuned_eta(omega, adv.M, T, h.K)
            _, regret = run_regret_game(h, adv, eta, T, theta_1)
            bound = regret_bound(omega, eta, adv.M, T, h.K)
            _check(regret <= bound + 1e-6, f"T={T}: R={regret:.4g} > {bound:.4g}")
            notes.append(f"T={T} R {regret:.2f} <= {bound:.2f}")


# --------------------------------------------------------------------------- 9

def _regime_instance():
    rng = np.random.default_rng(0)
    m, n = 200, 20
    X = rng.standard_normal((m, n)) * np.geomspace(1, 30, n)
    y = X @ rng.standard_normal(n) + 0.1 * rng.standard_normal(m)
    prob = make_least_squares(Dataset(X, y))
    b_ls = np.linalg.lstsq(X, y, rcond=None)[0]
    h = Euclidean(EuclideanBall(np.zeros(n), 0.5 * np.linalg.norm(b_ls)))
    return prob, h


def test_c9_step_size_regimes():
    with criterion("C9 step-size regimes on a ball-constrained least squares", budget=60) as notes:
        prob, h = _regime_instance()
        f_star = estimate_f_star(prob, h.set, 20000)
        T = 200
        grid = [0.1, 0.3, 1.0, 1.9, 3.0, 10.0, 100.0, 1e4, 1e10, 1e20, 1e40]
        gaps = {}
        for gl in grid:
            for pol in ("MD", "DA", "1-GoLD", "5-GoLD"):
                with np.errstate(over="raise", invalid="raise"):
                    tr = run_umd(prob, h, pol, gl / prob.L, T)
                gaps[gl, pol] = np.append(tr.values, prob.value(tr.final.x)) - f_star
        final = {k: v[-1] for k, v in gaps.items()}
        init = gaps[grid[0], "MD"][0]

        a = [g for g in grid if final[g, "MD"] < 1e-10 and final[g, "DA"] > 1e-6]
        _check(a, "no step size with linear MD convergence while DA lags")
        b = [g for g in grid if g > min(a) and final[g, "MD"] > init
             and final[g, "1-GoLD"] < 1e-10 and final[g, "5-GoLD"] < 1e-10]
        _check(b, "no larger step size where MD stalls but both GoLD variants converge")
        da = np.array([final[g, "DA"] for g in grid])
        _check(np.all(np.isfinite(da)), "DA produced a non-finite gap")
        _check(np.all(da <= init), "DA ended above its initial gap")
        notes.append(f"(a) gamma*L in {a}; (b) gamma*L in {b}; DA final gaps in "
                     f"[{da.min():.1e}, {da.max():.1e}] through gamma*L = 1e40")


# -------------------------------------------------------------------------- 10

def test_c10_special_cases():
    with criterion("C10 MD = DA on the full space; mirror prox and dual extrapolation") as notes:
        prob = random_quadratic(8, seed=9)
        h = Euclidean(FullSpace(8))
        a = run_umd(prob, h, "MD", 0.3, 200, theta_1=np.linspace(-1, 1, 8))
        b = run_umd(prob, h, "DA", 0.3, 200, theta_1=np.linspace(-1, 1, 8))
        _check(np.abs(a.X - b.X).max() <= 1e-10, "primal traces differ")
        _check(np.abs(a.thetas - b.thetas).max() <= 1e-10, "dual traces differ")

        rng = np.random.default_rng(21)
        ball = EuclideanBall(np.zeros(4), 1.0)
        hb = Euclidean(ball)
        S = rng.normal(size=(4, 4))
        Mq = S - S.T + 0.1 * np.eye(4)
        q = rng.normal(size=4)
        op = MonotoneOperator(4, lambda x: Mq @ x + q, set=ball)
        x1 = np.array([0.1, -0.2, 0.3, 0.0])
        gamma, T = 0.2, 200
        for theta_policy, oracle in (("MD", mirror_prox_euclidean), ("DA", dual_extrapolation_euclidean)):
            tr, _ = run_ump(op, hb, gamma, T, theta_1=x1, zeta_policy="MD", theta_policy=theta_policy)
            xs, ys = oracle(op, ball.project, x1, gamma, T)
            dx = np.abs(tr.X - xs[:-1]).max()
            dy = np.abs(tr.column("y") - ys).max()
            _check(max(dx, dy) <= 1e-10, f"{oracle.__name__}: deviation {max(dx, dy):.3g}")
            notes.append(f"{oracle.__name__} max dev {max(dx, dy):.1e}")
