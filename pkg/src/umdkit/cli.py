"""Command-line harness: YAML configs, CSV ingestion and step-size sweeps.

Config grammar (YAML)::

    problem:
      kind: least-squares        # least-squares | logistic | quadratic | l1-distance | zero
      synthetic: {n_samples: 100, n_features: 20, seed: 0, noise: 0.5}
      # or, for user data:
      # data: {path: train.csv, format: last-column-target, feature_scale: 1.0}
      # data: {path: X.csv, labels: y.csv, format: separate-labels}
      # delimiter: "," by default, or whitespace for blank-separated files
    set: {kind: euclidean-ball, radius: 1.0}   # full-space | euclidean-ball | simplex | box | segment
    regularizer: {kind: euclidean}             # euclidean | entropy | elastic-net
    policies: [MD, DA, 5-GoLD]
    gammas: [0.1, 1.0, 1.0e+40]
    gamma_units: K/L                           # absolute | K/L
    T: 200
    theta_1: zero                              # zero | list of numbers
    certify: false
    f_star_budget: 20000                       # or f_star: <number>
    out: runs/

``vi`` and ``regret`` runs read their own top-level sections; see the
README for examples.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .core import as_vector, fenchel_residual
from .errors import (
    ArgumentError,
    ConfigError,
    DimensionError,
    ParseError,
    RaggedRowError,
    UMDError,
)
from .geometry import Box, EuclideanBall, FullSpace, Segment, Simplex
from .mirror import (
    ElasticNet,
    EntropySimplex,
    ProductRegularizer,
    euclidean_ball,
    euclidean_free,
    make_regularizer,
)
from .online import make_adversary, max_divergence, regret_bound, run_regret_game, tuned_eta
from .problems import (
    Dataset,
    estimate_f_star,
    make_bilinear_saddle,
    make_l1_distance,
    make_least_squares,
    make_logistic,
    make_quadratic,
    make_synthetic_classification,
    make_synthetic_regression,
    make_zero,
    random_quadratic,
)
from .solvers import DualPolicy, certify_umd_step, run_umd, three_point_gaps
from .vi import run_ump, vi_gap

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2
EXIT_IO = 3

TRACE_HEADER = ["t", "f", "gap", "theta_norm", "branch", "res_I", "res_II"]


# --------------------------------------------------------------------------- data


def _split_lines(fh, delimiter):
    if delimiter == "whitespace":
        return (line.split() for line in fh)
    return csv.reader(fh, delimiter=delimiter)


def _read_rows(path, delimiter=","):
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(_split_lines(fh, delimiter), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            rows.append((lineno, row))
    if not rows:
        raise ParseError(f"{path}: no data rows")
    width = len(rows[0][1])
    out = np.empty((len(rows), width))
    for i, (lineno, row) in enumerate(rows):
        if len(row) != width:
            raise RaggedRowError(
                f"{path}: line {lineno} has {len(row)} fields, expected {width}"
            )
        for j, cell in enumerate(row):
            try:
                out[i, j] = float(cell)
            except ValueError:
                raise ParseError(
                    f"{path}: line {lineno}, column {j + 1}: not a number: {cell!r}"
                ) from None
            if not math.isfinite(out[i, j]):
                raise ParseError(f"{path}: line {lineno}, column {j + 1}: non-finite value")
    return out


def ingest_csv(path, format="last-column-target", feature_scale=1.0, labels=None,
               delimiter=",") -> Dataset:
    """Load a headerless numeric CSV into a :class:`Dataset`.

    ``last-column-target`` takes the final column as the target;
    ``separate-labels`` reads targets from the one-column file ``labels``.
    ``feature_scale`` multiplies every feature, never the target.
    ``delimiter`` is a single character or ``"whitespace"`` (runs of blanks).
    """
    if delimiter != "whitespace" and len(str(delimiter)) != 1:
        raise ArgumentError("delimiter must be one character or 'whitespace'")
    fmt = str(format).strip().lower()
    if fmt == "last-column-target":
        table = _read_rows(path, delimiter)
        if table.shape[1] < 2:
            raise DimensionError(f"{path}: need at least one feature and a target column")
        X, y = table[:, :-1], table[:, -1]
    elif fmt == "separate-labels":
        if labels is None:
            raise ArgumentError("separate-labels format needs a labels path")
        X = _read_rows(path, delimiter)
        lab = _read_rows(labels, delimiter)
        if lab.shape[1] != 1:
            raise DimensionError(f"{labels}: expected one label per line")
        if lab.shape[0] != X.shape[0]:
            raise DimensionError(
                f"{path} has {X.shape[0]} rows but {labels} has {lab.shape[0]}"
            )
        y = lab[:, 0]
    else:
        raise ArgumentError(f"unknown CSV format {format!r}")
    return Dataset(X * float(feature_scale), y)


# ------------------------------------------------------------------------ config


def _section(cfg, key, required=True):
    val = cfg.get(key)
    if val is None:
        if required:
            raise ConfigError(f"missing config section {key!r}")
        return {}
    if not isinstance(val, dict):
        raise ConfigError(f"config section {key!r} must be a mapping")
    return val


def build_problem(spec, seed=None, base=Path(".")):
    kind = str(spec.get("kind", "")).strip().lower()
    if not kind:
        raise ConfigError("problem.kind is required")
    if kind in ("least-squares", "logistic"):
        if "data" in spec:
            d = spec["data"]
            labels = d.get("labels")
            data = ingest_csv(base / d["path"], d.get("format", "last-column-target"),
                              d.get("feature_scale", 1.0),
                              None if labels is None else base / labels,
                              d.get("delimiter", ","))
        else:
            syn = dict(spec.get("synthetic", {}))
            if seed is not None:
                syn["seed"] = seed
            shape = (int(syn.get("n_samples", 100)), int(syn.get("n_features", 20)))
            if kind == "logistic":
                data = make_synthetic_classification(*shape, seed=syn.get("seed", 0))
            else:
                data = make_synthetic_regression(*shape, seed=syn.get("seed", 0),
                                                 noise=syn.get("noise", 0.1))
        return make_least_squares(data) if kind == "least-squares" else make_logistic(data)
    if kind == "quadratic":
        if "Q" in spec:
            return make_quadratic(spec["Q"], spec["center"], spec.get("offset", 0.0))
        return random_quadratic(int(spec["n"]), seed=spec.get("seed", 0) if seed is None else seed,
                                radius=spec.get("radius", 1.0),
                                condition=spec.get("condition", 10.0))
    if kind == "l1-distance":
        return make_l1_distance(spec["center"])
    if kind == "zero":
        return make_zero(int(spec["n"]))
    raise ConfigError(f"unknown problem kind {spec.get('kind')!r}")


def build_set(spec, n):
    kind = str(spec.get("kind", "full-space")).strip().lower()
    if kind == "full-space":
        return FullSpace(n)
    if kind == "euclidean-ball":
        center = spec.get("center", 0.0)
        center = np.full(n, float(center)) if np.ndim(center) == 0 else center
        return EuclideanBall(center, float(spec.get("radius", 1.0)))
    if kind == "simplex":
        return Simplex(n)
    if kind == "box":
        lo, hi = spec["lower"], spec["upper"]
        lo = np.full(n, float(lo)) if np.ndim(lo) == 0 else lo
        hi = np.full(n, float(hi)) if np.ndim(hi) == 0 else hi
        return Box(lo, hi)
    if kind in ("segment", "segment2d"):
        return Segment(spec["a"], spec["b"])
    raise ConfigError(f"unknown set kind {spec.get('kind')!r}")


def build_regularizer(spec, set_):
    kind = spec.get("kind")
    if not kind:
        raise ConfigError("regularizer.kind is required")
    try:
        return make_regularizer(str(kind), set_)
    except ArgumentError as exc:
        raise ConfigError(str(exc)) from None


@dataclass
class ExperimentConfig:
    problem: dict
    set: dict
    regularizer: dict
    policies: list
    gammas: list
    gamma_units: str = "absolute"
    T: int = 200
    theta_1: object = "zero"
    certify: bool = False
    f_star_budget: int = 20000
    f_star: float | None = None
    out: str = "runs"
    base_dir: Path = field(default=Path("."), repr=False)

    @classmethod
    def from_dict(cls, cfg, base_dir=Path(".")):
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a mapping at top level")
        policies = cfg.get("policies") or []
        gammas = cfg.get("gammas") or []
        if not policies:
            raise ConfigError("config needs a non-empty 'policies' list")
        if not gammas:
            raise ConfigError("config needs a non-empty 'gammas' list")
        try:
            for p in policies:
                DualPolicy.parse(p)
            gammas = [float(g) for g in gammas]
        except (ArgumentError, TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        if not all(g > 0 and math.isfinite(g) for g in gammas):
            raise ConfigError("step sizes must be positive and finite")
        units = str(cfg.get("gamma_units", "absolute"))
        if units not in ("absolute", "K/L"):
            raise ConfigError(f"gamma_units must be 'absolute' or 'K/L', got {units!r}")
        T = int(cfg.get("T", 200))
        if T < 1:
            raise ConfigError("T must be >= 1")
        return cls(
            problem=_section(cfg, "problem"),
            set=_section(cfg, "set", required=False),
            regularizer=_section(cfg, "regularizer"),
            policies=[str(p) for p in policies],
            gammas=gammas,
            gamma_units=units,
            T=T,
            theta_1=cfg.get("theta_1", "zero"),
            certify=bool(cfg.get("certify", False)),
            f_star_budget=int(cfg.get("f_star_budget", 20000)),
            f_star=None if cfg.get("f_star") is None else float(cfg["f_star"]),
            out=str(cfg.get("out", "runs")),
            base_dir=Path(base_dir),
        )


def load_config(path) -> dict:
    """Read a YAML config; ``OSError`` propagates so callers can map it to exit 3."""
    with open(path) as fh:
        text = fh.read()
    try:
        cfg = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return cfg


# -------------------------------------------------------------------- experiment


@dataclass
class CellResult:
    policy: str
    gamma: float
    status: str
    final_f: float = math.nan
    final_gap: float = math.nan
    trace_file: str = ""
    message: str = ""


@dataclass
class Experiment:
    problem: object
    h: object
    f_star: float
    theta_1: np.ndarray | None


def _fmt(v) -> str:
    # repr round-trips floats exactly, so the gap column can be re-derived
    return repr(float(v))


def prepare(config: ExperimentConfig, seed=None) -> Experiment:
    """Resolve kinds, build the problem and regularizer, and estimate ``f*``."""
    try:
        problem = build_problem(config.problem, seed, config.base_dir)
        set_ = build_set(config.set, problem.n)
        h = build_regularizer(config.regularizer, set_)
        if config.theta_1 in (None, "zero"):
            theta_1 = None
        else:
            theta_1 = as_vector(config.theta_1, problem.n, "theta_1")
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"bad config value: {exc}") from None
    except (ArgumentError, DimensionError) as exc:
        raise ConfigError(str(exc)) from None
    if config.f_star is not None:
        f_star = config.f_star
    elif problem.L is None:
        raise ConfigError(f"{problem.name} has no smoothness constant; give f_star explicitly")
    else:
        f_star = estimate_f_star(problem, set_, config.f_star_budget)
    return Experiment(problem, h, f_star, theta_1)


def resolve_gamma(config: ExperimentConfig, exp: Experiment, gamma) -> float:
    if config.gamma_units == "K/L":
        L = exp.problem.L
        if not L:
            raise ConfigError("gamma_units K/L needs a positive smoothness constant")
        return gamma * exp.h.K / L
    return gamma


def write_trace(path, trace, problem, f_star):
    """One row per state ``t = 1..T+1``; the last row has no outgoing step."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for i, t in enumerate(trace.t):
            f = trace.f[i]
            w.writerow([t, _fmt(f), _fmt(f - f_star), _fmt(np.linalg.norm(trace.theta[i])),
                        trace.branch[i], _fmt(trace.res_I[i]), _fmt(trace.res_II[i])])
        fin = trace.final
        f = problem.value(fin.x)
        w.writerow([fin.t, _fmt(f), _fmt(f - f_star), _fmt(np.linalg.norm(fin.theta)),
                    "none", "nan", "nan"])
    return f


def run_cell(config, exp, policy, gamma, out_dir, index) -> CellResult:
    name = DualPolicy.parse(policy).name
    fname = f"trace_{name}_g{index:02d}.csv"
    try:
        step = resolve_gamma(config, exp, gamma)
        with np.errstate(over="raise", invalid="raise"):
            trace = run_umd(exp.problem, exp.h, policy, step, config.T, exp.theta_1,
                            certify=config.certify)
    except (UMDError, FloatingPointError) as exc:
        return CellResult(name, gamma, "failed", message=f"{type(exc).__name__}: {exc}")
    final_f = write_trace(out_dir / fname, trace, exp.problem, exp.f_star)
    return CellResult(name, gamma, "ok", final_f, final_f - exp.f_star, fname)


def write_summary(path, f_star, results):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["policy", "gamma", "status", "final_f", "final_gap", "f_star",
                    "trace_file", "message"])
        for r in results:
            w.writerow([r.policy, _fmt(r.gamma), r.status, _fmt(r.final_f), _fmt(r.final_gap),
                        _fmt(f_star), r.trace_file, r.message])


def run_experiment(config: ExperimentConfig, out_dir=None, seed=None, cells=None):
    """Run every ``(policy, gamma)`` cell and write traces plus ``summary.csv``.

    Cells fail independently; the return status is ``EXIT_SOLVER`` if any did.

    Returns
    -------
    (status, results)
    """
    out = Path(out_dir if out_dir is not None else config.out)
    out.mkdir(parents=True, exist_ok=True)
    exp = prepare(config, seed)
    if cells is None:
        cells = [(p, g, i) for p in config.policies for i, g in enumerate(config.gammas)]
    results = [run_cell(config, exp, p, g, out, i) for p, g, i in cells]
    write_summary(out / "summary.csv", exp.f_star, results)
    failed = [r for r in results if r.status != "ok"]
    for r in failed:
        print(f"cell {r.policy} gamma={r.gamma:g} failed: {r.message}", file=sys.stderr)
    return (EXIT_SOLVER if failed else EXIT_OK), results


# ------------------------------------------------------------------- vi / regret


def run_vi(cfg, out_dir, certify=False):
    spec = _section(cfg, "vi")
    try:
        op = make_bilinear_saddle(spec["payoff"])
        m, n = np.asarray(spec["payoff"]).shape
    except KeyError:
        raise ConfigError("vi.payoff is required") from None
    h = ProductRegularizer([EntropySimplex(m), EntropySimplex(n)])
    gamma = float(spec.get("gamma", h.K / op.L if op.L else 1.0))
    T = int(spec.get("T", 1000))
    trace, y_bar = run_ump(op, h, gamma, T, zeta_policy=spec.get("zeta_policy", "MD"),
                           theta_policy=spec.get("theta_policy", "DA"), certify=certify)
    gap = vi_gap(op, y_bar)
    x_1 = trace.x[0]
    omega = max_divergence(h, x_1, trace.theta[0])
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "vi_summary.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["T", "gamma", "gap", "bound"] + [f"y_bar_{i}" for i in range(m + n)])
        w.writerow([T, _fmt(gamma), _fmt(gap), _fmt(omega / (gamma * T))]
                   + [_fmt(v) for v in y_bar])
    return EXIT_OK


def run_regret(cfg, out_dir, seed=None):
    spec = _section(cfg, "regret")
    n = int(spec.get("n", 10))
    adv_spec = dict(spec.get("adversary", {"kind": "seeded-random"}))
    kind = adv_spec.pop("kind", "seeded-random")
    if seed is not None:
        adv_spec["seed"] = seed
    try:
        adversary = make_adversary(kind, n, **adv_spec)
    except (ArgumentError, KeyError) as exc:
        raise ConfigError(str(exc)) from None
    h = EntropySimplex(n)
    T = int(spec.get("T", 1000))
    theta_1 = np.zeros(n)
    omega = max_divergence(h, h.grad_conjugate(theta_1), theta_1)
    eta = spec.get("eta", "tuned")
    eta = tuned_eta(omega, adversary.M, T, h.K) if eta == "tuned" else float(eta)
    trace, regret = run_regret_game(h, adversary, eta, T, theta_1, spec.get("policy", "DA"))
    bound = regret_bound(omega, eta, adversary.M, T, h.K)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "regret_trace.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "payoff"])
        for t, f in zip(trace.t, trace.f):
            w.writerow([t, _fmt(f)])
    with open(out / "regret_summary.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["T", "eta", "regret", "bound"])
        w.writerow([T, _fmt(eta), _fmt(regret), _fmt(bound)])
    return EXIT_OK


# ---------------------------------------------------------------------- selftest


def selftest(seed=0):
    """Quick invariant checks; returns ``[(name, ok, detail)]``."""

    rng = np.random.default_rng(seed)
    results = []
    quad = random_quadratic(5, seed=seed)
    cases = [
        ("euclidean-ball", euclidean_ball(np.zeros(5), 1.0), quad),
        ("entropy-simplex", EntropySimplex(5), quad),
    ]
    worst_cert, worst_3p = 0.0, math.inf
    ok_cert = True
    for _, h, prob in cases:
        for pol in ("DA", "MD", "1-GoLD", "5-GoLD", "20-7-GoLD"):
            tr = run_umd(prob, h, pol, 0.5, 40)
            states = tr.states()
            for i in range(len(tr)):
                ok, r1, r2 = certify_umd_step(h, states[i], tr.xi[i], states[i + 1])
                ok_cert &= ok
                worst_cert = max(worst_cert, r1, r2)
                for x in h.set.sample(rng, 3):
                    worst_3p = min(worst_3p, *three_point_gaps(h, states[i], tr.xi[i],
                                                               states[i + 1], x))
    results.append(("UMD conditions on every step", ok_cert, f"max residual {worst_cert:.2e}"))
    results.append(("three-point inequalities", worst_3p >= -1e-7, f"min slack {worst_3p:.2e}"))

    free = euclidean_free(5)
    a = run_umd(quad, free, "MD", 0.1, 50).X
    b = run_umd(quad, free, "DA", 0.1, 50).X
    diff = float(np.max(np.abs(a - b)))
    results.append(("MD equals DA on the full space", diff <= 1e-10, f"max diff {diff:.2e}"))

    worst_f = 0.0
    for h in (euclidean_ball(np.zeros(5), 1.0), EntropySimplex(5), ElasticNet(5)):
        for _ in range(20):
            theta = rng.normal(size=5) * 3
            worst_f = max(worst_f, abs(fenchel_residual(h, h.grad_conjugate(theta), theta)))
    results.append(("Fenchel residual at grad h*", worst_f <= 1e-8, f"max {worst_f:.2e}"))

    ball = EuclideanBall(np.zeros(5), 1.0)
    worst_p = -math.inf
    for y in rng.normal(size=(20, 5)) * 3:
        p = ball.project(y)
        worst_p = max(worst_p, float(np.max((ball.sample(rng, 20) - p) @ (y - p))))
    results.append(("projection optimality", worst_p <= 1e-9, f"max {worst_p:.2e}"))
    return results


# --------------------------------------------------------------------------- main


def _parser():
    ap = argparse.ArgumentParser(prog="umdkit", description="Unified mirror descent experiments")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in [("solve", "run one (policy, gamma) cell"),
                        ("sweep", "run every cell of a config"),
                        ("vi", "run unified mirror prox on a bilinear saddle"),
                        ("regret", "play the online regret game")]:
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True, help="YAML experiment file")
        p.add_argument("--out", help="output directory (overrides the config)")
        p.add_argument("--certify", action="store_true", help="check the UMD conditions")
        p.add_argument("--seed", type=int, help="override synthetic and adversary seeds")
        if name == "solve":
            p.add_argument("--policy", help="policy to run (default: first in config)")
            p.add_argument("--gamma", type=float, help="step size (default: first in config)")
    p = sub.add_parser("selftest", help="run the built-in invariant checks")
    p.add_argument("--seed", type=int, default=0)
    return ap


def _dispatch(args):
    if args.command == "selftest":
        res = selftest(args.seed)
        for name, ok, detail in res:
            print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
        return EXIT_OK if all(ok for _, ok, _ in res) else EXIT_SOLVER
    cfg = load_config(args.config)
    base = Path(args.config).resolve().parent
    out = args.out or cfg.get("out", "runs")
    if args.command == "vi":
        return run_vi(cfg, out, args.certify)
    if args.command == "regret":
        return run_regret(cfg, out, args.seed)
    config = ExperimentConfig.from_dict(cfg, base)
    if args.certify:
        config.certify = True
    cells = None
    if args.command == "solve":
        policy = args.policy or config.policies[0]
        try:
            DualPolicy.parse(policy)
        except ArgumentError as exc:
            raise ConfigError(str(exc)) from None
        gamma = args.gamma if args.gamma is not None else config.gammas[0]
        cells = [(policy, gamma, 0)]
    status, results = run_experiment(config, out, args.seed, cells)
    for r in results:
        print(f"{r.policy:>10}  gamma={r.gamma:<10g} {r.status:<6} gap={r.final_gap:.3e}")
    return status


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _dispatch(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ParseError, DimensionError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except UMDError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
