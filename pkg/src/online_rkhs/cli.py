"""Command-line entry point: ``online-rkhs run --config experiment.json``.

The configuration is a JSON object::

    {
      "schema_version": 1,
      "experiment": "theorem1",
      "problem": {"kind": "cons", "p": 2, "n": 2000, "s": 1.0, "sigma": 0.3},
      "schedule": "auto",
      "N": 10000, "trials": 500, "base_seed": 0,
      "checkpoints": "geometric",
      "output_dir": "out/theorem1"
    }

Each run writes ``records.csv`` and ``summary.json`` to the output
directory. Exit codes: 0 all checks pass, 1 a check failed, 2 invalid
configuration, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .engine import Schedule, finite_horizon_mu, geometric_checkpoints, theorem1_schedule
from .errors import ConfigError, OnlineRKHSError
from .harness import (
    NoiseModel,
    finite_horizon_bound,
    fit_rate,
    make_bridge_problem,
    make_cons_problem,
    monte_carlo_error,
    noise_variance,
    refined_bound_s1,
    theorem1_bound,
    theorem1_constant,
)
from .hilbert import SpectralVector, smoothness_norm_sq
from .oracle import cons_oracle_curve, expected_trajectory, theorem2_rate, theorem2_t

SCHEMA_VERSION = 1
EXPERIMENTS = ("theorem1", "theorem2-table", "finite-horizon", "divergence", "oracle-crosscheck")

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3

_TOP_KEYS = {
    "schema_version", "experiment", "problem", "schedule", "sbar", "N", "trials",
    "base_seed", "checkpoints", "output_dir", "fit_window", "pairs", "divergence",
    "tolerance",
}
_PROBLEM_KEYS = {
    "cons": {"kind", "p", "n", "s", "sigma", "noise", "target"},
    "bridge": {"kind", "n_quad", "s", "sigma", "d", "T", "sampling", "noise", "target"},
}
_SCHEDULE_KEYS = {"t", "A", "mode", "averaging"}
_DIVERGENCE_KEYS = {"n", "t", "A", "growth_from", "growth_factor", "control"}


@dataclass
class ExperimentConfig:
    experiment: str
    problem: dict
    schedule: dict
    N: int
    trials: int = 500
    base_seed: int = 0
    sbar: float = 0.0
    checkpoints: list = field(default_factory=list)
    output_dir: str = "out"
    fit_window: list | None = None
    pairs: list = field(default_factory=list)
    divergence: dict = field(default_factory=dict)
    tolerance: float = 4.0
    Lambda: float = 1.0


# Parsing and validation ======================================================
def _line_of(raw, key, occurrence):
    needle = json.dumps(key)
    pos = -1
    for _ in range(occurrence):
        pos = raw.find(needle, pos + 1)
        if pos < 0:
            return None
    return raw.count("\n", 0, pos) + 1


def _loads_strict(raw):
    seen_counts = {}

    def hook(pairs):
        out = {}
        for k, v in pairs:
            seen_counts[k] = seen_counts.get(k, 0) + 1
            if k in out:
                line = _line_of(raw, k, seen_counts[k])
                where = f" (line {line})" if line else ""
                raise ConfigError(f"duplicate key {k!r}{where}")
            out[k] = v
        return out

    try:
        return json.loads(raw, object_pairs_hook=hook)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}")


def _unknown(d, allowed, where):
    extra = sorted(set(d) - allowed)
    if extra:
        raise ConfigError(f"unknown key {where}{extra[0]!r}")


def _num(d, key, where, lo=None, hi=None, lo_open=False, integer=False, default=None):
    if key not in d:
        if default is None:
            raise ConfigError(f"missing key {where}{key!r}")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{where}{key!r} must be a finite number, got {v!r}")
    if integer and int(v) != v:
        raise ConfigError(f"{where}{key!r} must be an integer, got {v!r}")
    if lo is not None and (v < lo or (lo_open and v == lo)):
        op = ">" if lo_open else ">="
        raise ConfigError(f"{where}{key!r}={v} violates {key} {op} {lo}")
    if hi is not None and v > hi:
        raise ConfigError(f"{where}{key!r}={v} violates {key} <= {hi}")
    return int(v) if integer else float(v)


def _problem_lambda(problem):
    if problem["kind"] == "cons":
        return 1.0
    T = problem.get("T")
    tmax = 1.0 if T is None else float(np.linalg.eigvalsh(np.asarray(T, dtype=float))[-1])
    return 0.25 * tmax


def _validate_problem(p):
    if not isinstance(p, dict):
        raise ConfigError("'problem' must be an object")
    kind = p.get("kind")
    if kind not in _PROBLEM_KEYS:
        raise ConfigError(f"problem 'kind' must be one of {sorted(_PROBLEM_KEYS)}, got {kind!r}")
    _unknown(p, _PROBLEM_KEYS[kind], "problem.")
    out = {"kind": kind}
    w = "problem."
    out["s"] = _num(p, "s", w, lo=0.0, lo_open=True)
    out["sigma"] = _num(p, "sigma", w, lo=0.0, default=0.0)
    noise = p.get("noise", "gaussian")
    if noise not in ("gaussian", "uniform", "none"):
        raise ConfigError(f"problem.'noise' must be gaussian, uniform or none, got {noise!r}")
    out["noise"] = noise
    target = p.get("target", "boundary")
    if target not in ("boundary", "zero"):
        raise ConfigError(f"problem.'target' must be boundary or zero, got {target!r}")
    out["target"] = target
    if kind == "cons":
        out["p"] = _num(p, "p", w, lo=1.0, lo_open=True)
        out["n"] = _num(p, "n", w, lo=1, integer=True)
    else:
        out["n_quad"] = _num(p, "n_quad", w, lo=100, integer=True)
        out["d"] = _num(p, "d", w, lo=1, integer=True, default=1)
        T = p.get("T", "identity")
        if T == "identity":
            T = None
        else:
            arr = np.asarray(T, dtype=float)
            if arr.shape != (out["d"], out["d"]):
                raise ConfigError(f"problem.'T' must be a {out['d']}x{out['d']} matrix")
            if not np.allclose(arr, arr.T) or np.linalg.eigvalsh(arr)[0] <= 0:
                raise ConfigError("problem.'T' must be symmetric positive definite")
            T = arr.tolist()
        out["T"] = T
        sampling = p.get("sampling", "nodes")
        if sampling not in ("nodes", "uniform"):
            raise ConfigError(f"problem.'sampling' must be nodes or uniform, got {sampling!r}")
        out["sampling"] = sampling
    return out


def _resolve_schedule(raw, cfg_kind, problem, N, Lambda):
    s = problem["s"]
    if raw == "auto":
        if cfg_kind == "theorem1":
            sch = theorem1_schedule(s, Lambda)
            return {"t": sch.t, "A": sch.A, "mode": "regularized", "averaging": False}
        if cfg_kind == "finite-horizon":
            return {"t": None, "A": 1.0 / (2.0 * Lambda), "mode": "finite_horizon",
                    "regularized": True, "averaging": False}
        if cfg_kind == "oracle-crosscheck":
            t = (1.0 + min(s, 1.0)) / (2.0 + min(s, 1.0))
            return {"t": t, "A": 1.0 / (2.0 * Lambda), "mode": "regularized", "averaging": False}
        return {"t": None, "A": 0.5, "mode": "regularized", "averaging": False}
    if not isinstance(raw, dict):
        raise ConfigError("'schedule' must be \"auto\" or an object")
    _unknown(raw, _SCHEDULE_KEYS | {"regularized"}, "schedule.")
    mode = raw.get("mode", "regularized")
    if mode not in ("regularized", "unregularized", "finite_horizon"):
        raise ConfigError(f"schedule.'mode' invalid: {mode!r}")
    A = _num(raw, "A", "schedule.", lo=0.0, lo_open=True, hi=1.0 / (2.0 * Lambda))
    averaging = bool(raw.get("averaging", False))
    if mode == "finite_horizon":
        return {"t": None, "A": A, "mode": mode, "regularized": bool(raw.get("regularized", True)),
                "averaging": averaging}
    t = _num(raw, "t", "schedule.", lo=0.5, lo_open=True)
    if t >= 1.0:
        raise ConfigError(f"schedule.'t'={t} violates t < 1")
    return {"t": t, "A": A, "mode": mode, "averaging": averaging}


def _schedule_from(d, horizon=None):
    if d["mode"] == "finite_horizon":
        return Schedule(A=d["A"], regularized=d.get("regularized", True), horizon=horizon,
                        averaging=d["averaging"])
    return Schedule(t=d["t"], A=d["A"], regularized=d["mode"] == "regularized",
                    averaging=d["averaging"])


def validate_config(raw):
    """Parse JSON text into a fully resolved :class:`ExperimentConfig`."""
    data = _loads_strict(raw)
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    _unknown(data, _TOP_KEYS, "")
    if data.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"'schema_version' must be {SCHEMA_VERSION}")
    kind = data.get("experiment")
    if kind not in EXPERIMENTS:
        raise ConfigError(f"'experiment' must be one of {EXPERIMENTS}, got {kind!r}")
    problem = _validate_problem(data.get("problem"))
    s = problem["s"]
    if kind in ("theorem1", "finite-horizon") and s > 1.0:
        raise ConfigError(f"problem.'s'={s} violates 0 < s <= 1 required by {kind}")
    if kind in ("theorem2-table", "divergence", "oracle-crosscheck") and problem["kind"] != "cons":
        raise ConfigError(f"{kind} requires problem.kind = 'cons'")
    N = _num(data, "N", "", lo=1, integer=True)
    Lambda = _problem_lambda(problem)
    sched = _resolve_schedule(data.get("schedule", "auto"), kind, problem, N, Lambda)
    if kind == "finite-horizon" and sched["mode"] != "finite_horizon":
        raise ConfigError("finite-horizon experiment needs schedule.mode = 'finite_horizon'")
    if kind != "finite-horizon" and sched["mode"] == "finite_horizon":
        raise ConfigError(f"schedule.mode 'finite_horizon' is only valid for finite-horizon")
    if kind == "finite-horizon":
        sched["mu"] = finite_horizon_mu(N, 1.0 / (2.0 * sched["A"]))
    sbar = _num(data, "sbar", "", lo=-1.0, hi=0.0, default=0.0) if "sbar" in data else 0.0
    trials = _num(data, "trials", "", lo=2, integer=True, default=500) if "trials" in data else 500
    seed = _num(data, "base_seed", "", lo=0, integer=True, default=0) if "base_seed" in data else 0
    tol = _num(data, "tolerance", "", lo=0.0, lo_open=True, default=4.0) if "tolerance" in data \
        else 4.0

    cps = data.get("checkpoints", "geometric")
    if cps == "geometric":
        cps = geometric_checkpoints(N)
    elif cps == "log":
        cps = sorted(set(int(x) for x in np.geomspace(1, N, 40)) | {0, N})
    elif isinstance(cps, list) and all(isinstance(c, int) and not isinstance(c, bool) for c in cps):
        if any(c < 0 or c > N for c in cps):
            raise ConfigError(f"'checkpoints' must lie in [0, N={N}]")
        cps = sorted(set(cps))
    else:
        raise ConfigError("'checkpoints' must be \"geometric\", \"log\" or a list of integers")
    if kind == "finite-horizon":
        cps = [N]

    fit_window = data.get("fit_window")
    if fit_window is not None:
        if (not isinstance(fit_window, list) or len(fit_window) != 2
                or not all(isinstance(x, (int, float)) for x in fit_window)
                or not 0 <= fit_window[0] < fit_window[1]):
            raise ConfigError("'fit_window' must be [m_lo, m_hi] with 0 <= m_lo < m_hi")

    pairs = []
    if kind == "theorem2-table":
        raw_pairs = data.get("pairs", [[1, 0], [1, -1], [0.5, 0]])
        for pr in raw_pairs:
            if not (isinstance(pr, list) and len(pr) == 2):
                raise ConfigError("'pairs' entries must be [s, sbar]")
            try:
                theorem2_t(float(pr[0]), float(pr[1]))
            except OnlineRKHSError as exc:
                raise ConfigError(f"'pairs' entry {pr}: {exc}")
            pairs.append([float(pr[0]), float(pr[1])])
        if sched["t"] is not None:
            raise ConfigError("theorem2-table derives t per pair; use schedule \"auto\" "
                              "or omit it")
    elif "pairs" in data:
        raise ConfigError(f"'pairs' is only valid for theorem2-table")

    div = {}
    if kind == "divergence":
        d = data.get("divergence", {})
        if not isinstance(d, dict):
            raise ConfigError("'divergence' must be an object")
        _unknown(d, _DIVERGENCE_KEYS, "divergence.")
        div = {
            "n": _num(d, "n", "divergence.", lo=1, integer=True, default=10_000),
            "growth_from": _num(d, "growth_from", "divergence.", lo=0, integer=True, default=100),
            "growth_factor": _num(d, "growth_factor", "divergence.", lo=1.0, default=10.0),
        }
        if div["growth_from"] >= N:
            raise ConfigError("divergence.'growth_from' must be below N")
        if sched["t"] is None:
            sched["t"] = 2.0 / 3.0
    elif "divergence" in data:
        raise ConfigError("'divergence' is only valid for the divergence experiment")

    return ExperimentConfig(
        experiment=kind, problem=problem, schedule=sched, N=N, trials=trials,
        base_seed=seed, sbar=sbar, checkpoints=cps,
        output_dir=str(data.get("output_dir", "out")), fit_window=fit_window,
        pairs=pairs, divergence=div, tolerance=tol, Lambda=Lambda,
    )


# Experiments =================================================================
def _build_problem(p):

    noise = None
    if p["noise"] == "uniform":
        noise = NoiseModel("uniform", p["sigma"])
    elif p["noise"] == "none":
        noise = NoiseModel()
    if p["kind"] == "cons":
        problem = make_cons_problem(p["p"], p["n"], p["s"], sigma=p["sigma"], noise=noise)
    else:
        problem = make_bridge_problem(p["n_quad"], p["s"], sigma=p["sigma"], d=p["d"],
                                      T=p["T"], sampling=p["sampling"], noise=noise)
    if p.get("target") == "zero":
        problem = replace(problem, target=SpectralVector.zeros(problem.eig.dim))
    return problem


def _norms(problem, s):
    eig, u = problem.eig, problem.target
    return {
        "u_sq": smoothness_norm_sq(eig, u, 0),
        "u_s_sq": smoothness_norm_sq(eig, u, s),
        "u_1_sq": smoothness_norm_sq(eig, u, 1),
    }


def _fit(records, window):
    try:
        f = fit_rate(records, window)
        return {"slope": f.slope, "intercept": f.intercept, "window": list(window),
                "residual": f.residual}
    except OnlineRKHSError as exc:
        return {"slope": None, "error": str(exc), "window": list(window)}


def _exp_theorem1(cfg, problem):
    sched = _schedule_from(cfg.schedule)
    s = cfg.problem["s"]
    norms = _norms(problem, s)
    sigma2 = noise_variance(problem)
    C2 = theorem1_constant(problem, None, s)
    res = monte_carlo_error(problem, sched, cfg.N, cfg.trials, cfg.base_seed, cfg.checkpoints,
                            cfg.sbar)
    rows, dominated = [], True
    refined_ok = None
    use_refined = (s == 1.0 and abs(sched.t - 2.0 / 3.0) < 1e-15
                   and abs(sched.A - 1.0 / (2.0 * problem.Lambda)) < 1e-15 and cfg.sbar == 0)
    if use_refined:
        refined_ok = True
    for m, mean, se in res.records:
        bound = theorem1_bound(C2, s, m) if m >= 1 else None
        if bound is not None and cfg.sbar == 0:
            dominated &= mean - cfg.tolerance * se <= bound
            if use_refined:
                rb = refined_bound_s1(norms["u_sq"], norms["u_sq"], norms["u_1_sq"],
                                      problem.Lambda, sigma2, m)
                refined_ok &= mean - cfg.tolerance * se <= rb
        rows.append({"m": m, "mean": mean, "stderr": se, "bound": bound})
    window = cfg.fit_window or [max(1, cfg.N // 100), cfg.N]
    checks = {"theorem1_dominance": bool(dominated)}
    if refined_ok is not None:
        checks["refined_s1_dominance"] = bool(refined_ok)
    summary = {"Lambda": problem.Lambda, "sigma_H2": sigma2, "C2": C2, "s": s,
               "norms": norms, "fit": _fit([(r["m"], r["mean"]) for r in rows], window),
               "flagged_trials": res.flagged}
    return rows, summary, checks, res.flagged


def _exp_finite_horizon(cfg, problem):
    sched = _schedule_from(cfg.schedule, horizon=cfg.N)
    norms = _norms(problem, 1.0)
    sigma2 = noise_variance(problem)
    mu = sched.A * (cfg.N + 1.0) ** (-2.0 / 3.0)
    res = monte_carlo_error(problem, sched, cfg.N, cfg.trials, cfg.base_seed, [cfg.N], cfg.sbar)
    m, mean, se = res.records[0]
    bound = finite_horizon_bound(norms["u_sq"], norms["u_sq"], norms["u_1_sq"],
                                 problem.Lambda, sigma2, mu, cfg.N)
    rows = [{"m": m, "mean": mean, "stderr": se, "bound": bound}]
    checks = {"finite_horizon_dominance": bool(mean - cfg.tolerance * se <= bound)}
    summary = {"Lambda": problem.Lambda, "sigma_H2": sigma2, "mu": mu, "norms": norms,
               "flagged_trials": res.flagged}
    return rows, summary, checks, res.flagged


def _exp_oracle(cfg, problem):
    sched = _schedule_from(cfg.schedule)
    res = monte_carlo_error(problem, sched, cfg.N, cfg.trials, cfg.base_seed, cfg.checkpoints,
                            cfg.sbar)
    oracle = dict(cons_oracle_curve(problem.cons_spec(), sched, cfg.checkpoints, cfg.sbar))
    rows, worst = [], 0.0
    for m, mean, se in res.records:
        # rounding slack for deterministic checkpoints such as m = 0
        diff = max(0.0, abs(mean - oracle[m]) - 1e-12 * max(1.0, abs(oracle[m])))
        z = diff / se if se > 0 else (0.0 if diff == 0.0 else math.inf)
        worst = max(worst, z)
        rows.append({"m": m, "mean": mean, "stderr": se, "bound": None, "oracle": oracle[m]})
    checks = {"oracle_agreement": bool(worst <= cfg.tolerance)}
    summary = {"Lambda": problem.Lambda, "sigma_H2": noise_variance(problem),
               "max_abs_z": worst, "flagged_trials": res.flagged}
    return rows, summary, checks, res.flagged


def _exp_theorem2(cfg, problem_cfg):
    rows, fits, checks = [], {}, {}
    A = cfg.schedule["A"]
    for s, sbar in cfg.pairs:
        p = dict(problem_cfg, s=s)
        problem = _build_problem(p)
        t = theorem2_t(s, sbar)
        curve = cons_oracle_curve(problem.cons_spec(), Schedule(t=t, A=A), cfg.checkpoints, sbar)
        label = f"s={s:g},sbar={sbar:g}"
        for m, v in curve:
            rows.append({"series": label, "m": m, "mean": v, "stderr": 0.0, "bound": None})
        window = cfg.fit_window or [100, cfg.N]
        fit = _fit(curve, window)
        target = -theorem2_rate(s, sbar) + 0.1
        fit.update({"t": t, "required_max_slope": target})
        fits[label] = fit
        checks[f"slope[{label}]"] = fit["slope"] is not None and fit["slope"] <= target
    return rows, {"fits": fits}, checks, []


def _exp_divergence(cfg, problem_cfg):
    d = cfg.divergence
    n = d["n"]
    i = np.arange(1, n + 1, dtype=np.float64)
    lam = 6.0 / np.pi ** 2 * i ** -2.0
    sched = Schedule(t=cfg.schedule["t"], A=cfg.schedule["A"])
    cps = sorted(set(cfg.checkpoints) | {d["growth_from"], cfg.N})
    witness = expected_trajectory(lam, i ** -2.0, None, sched, cfg.N, cps)
    u_ctrl = 1.0 / i
    control = expected_trajectory(lam, lam * u_ctrl, None, sched, cfg.N, cps, target=u_ctrl)
    rows = [{"series": "witness", "m": m, "mean": v, "stderr": None, "bound": None}
            for m, v in witness]
    rows += [{"series": "control_error", "m": m, "mean": v, "stderr": None, "bound": None}
             for m, v in control]
    start = d["growth_from"]
    wv = [v for m, v in witness if m >= start]
    cv = [v for m, v in control if m >= start]
    w = dict(witness)
    growth = w[cfg.N] / w[start]
    checks = {
        "witness_nondecreasing": bool(all(b >= a for a, b in zip(wv, wv[1:]))),
        "witness_growth": bool(growth >= d["growth_factor"]),
        "control_decreasing": bool(all(b < a for a, b in zip(cv, cv[1:]))),
    }
    summary = {"growth_ratio": growth, "n": n,
               "note": "truncated sums drop nonnegative terms, so witness norms are lower bounds"}
    return rows, summary, checks, []


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_records(path, rows):
    cols = ["m", "mean", "stderr", "bound"]
    if rows and "series" in rows[0]:
        cols = ["series"] + cols
    if rows and "oracle" in rows[0]:
        cols = cols + ["oracle"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([r[c] if c == "series" else _fmt(r.get(c)) for c in cols])


def run_experiment(cfg):
    """Run ``cfg``, write the report files, and return an exit code."""
    os.makedirs(cfg.output_dir, exist_ok=True)
    if cfg.experiment == "theorem2-table":
        rows, summary, checks, flagged = _exp_theorem2(cfg, cfg.problem)
    elif cfg.experiment == "divergence":
        rows, summary, checks, flagged = _exp_divergence(cfg, cfg.problem)
    else:
        problem = _build_problem(cfg.problem)
        runner = {"theorem1": _exp_theorem1, "finite-horizon": _exp_finite_horizon,
                  "oracle-crosscheck": _exp_oracle}[cfg.experiment]
        rows, summary, checks, flagged = runner(cfg, problem)
    stats = [r[k] for r in rows for k in ("mean", "stderr") if r.get(k) is not None]
    finite = all(math.isfinite(x) for x in stats) and not flagged
    write_records(os.path.join(cfg.output_dir, "records.csv"), rows)
    summary = {"schema_version": SCHEMA_VERSION, "config": asdict(cfg), **summary,
               "checks": checks, "passed": bool(all(checks.values())), "finite": finite}
    with open(os.path.join(cfg.output_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")
    if not finite:
        print("nonfinite statistic encountered; see summary.json", file=sys.stderr)
        return EXIT_RUNTIME
    for name, ok in checks.items():
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    return EXIT_OK if all(checks.values()) else EXIT_CHECK


def build_parser():
    parser = argparse.ArgumentParser(prog="online-rkhs", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run an experiment from a JSON configuration")
    run_p.add_argument("--config", required=True, help="path to the JSON configuration")
    run_p.add_argument("--out", help="output directory (overrides output_dir)")
    run_p.add_argument("--trials", type=int, help="number of Monte-Carlo trials")
    run_p.add_argument("--seed", type=int, help="base seed")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        with open(args.config) as fh:
            raw = fh.read()
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = validate_config(raw)
        if args.trials is not None:
            if args.trials < 2:
                raise ConfigError("--trials must be >= 2")
            cfg.trials = args.trials
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("--seed must be >= 0")
            cfg.base_seed = args.seed
        if args.out is not None:
            cfg.output_dir = args.out
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return run_experiment(cfg)
    except (OSError, OnlineRKHSError, ArithmeticError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main_exit():
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    main_exit()
