"""Command-line harness: seeded experiment runs, verification suites, benchmarks.

Configuration precedence is flags > config file (flat key=value lines) >
defaults, with the GLB_OMD_SEED environment variable as a seed fallback.
Outputs are one run CSV per policy plus a summary.csv whose metadata rows
echo the effective configuration.
"""

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace

import numpy as np

from . import __version__
from .env import RUN_CSV_HEADER, BanditEnv, load_arm_file, run_trial
from .errors import GlbError
from .glm import make_family
from .policies import POLICY_NAMES, make_policy
from .verify import SUITE_NAMES, run_suites

__all__ = ["main", "HarnessConfig", "run_command", "verify_command", "bench_command"]


@dataclass(frozen=True)
class HarnessConfig:
    family: str = "logistic"
    dispersion: float = 1.0
    d: int = 2
    S: float = 1.0
    T: int = 1000
    K: int = 20
    delta: float = 0.01
    trials: int = 10
    policy: tuple = ("glb-omd",)
    lambda_mode: str = "practical"
    radius_scale: float = 1.0
    seed: int = 0
    jobs: int = 1
    arm_file: str | None = None
    out: str = "results"

    def metadata_items(self):
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(v)
            out.append((f.name, "" if v is None else str(v)))
        return out


_INT_KEYS = {"d", "T", "K", "trials", "seed", "jobs"}
_FLOAT_KEYS = {"dispersion", "S", "delta", "radius_scale"}


def parse_config_file(path):
    """Flat key=value text; '#' starts a comment, hyphens map to underscores."""
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise GlbError(f"{path}:{lineno}: expected key=value, got {text!r}")
            key, val = (s.strip() for s in text.split("=", 1))
            key = key.replace("-", "_")
            if key in _INT_KEYS:
                values[key] = int(val)
            elif key in _FLOAT_KEYS:
                values[key] = float(val)
            elif key == "policy":
                values[key] = tuple(p.strip() for p in val.split(",") if p.strip())
            else:
                values[key] = val
    return values


def _effective_config(args):
    """Merge defaults < config file < flags; returns (config, explicitly-set keys)."""
    cfg = HarnessConfig()
    explicit = set()
    if getattr(args, "config", None):
        file_vals = parse_config_file(args.config)
        unknown = set(file_vals) - {f.name for f in fields(HarnessConfig)}
        if unknown:
            raise GlbError(f"unknown config keys: {sorted(unknown)}")
        cfg = replace(cfg, **file_vals)
        explicit |= set(file_vals)
    overrides = {}
    for f in fields(HarnessConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            overrides[f.name] = tuple(v) if f.name == "policy" else v
    cfg = replace(cfg, **overrides)
    explicit |= set(overrides)
    if "seed" not in explicit and os.environ.get("GLB_OMD_SEED"):
        cfg = replace(cfg, seed=int(os.environ["GLB_OMD_SEED"]))
        explicit.add("seed")
    return cfg, explicit


def parse_summary_metadata(path):
    """Reconstruct the effective configuration from summary.csv metadata rows."""
    values = {}
    with open(path) as fh:
        for line in fh:
            if not line.startswith("# "):
                continue
            text = line[2:].strip()
            if "=" not in text:
                continue
            key, val = text.split("=", 1)
            key = key.replace("-", "_")
            if key not in {f.name for f in fields(HarnessConfig)}:
                continue
            if key in _INT_KEYS:
                values[key] = int(val)
            elif key in _FLOAT_KEYS:
                values[key] = float(val)
            elif key == "policy":
                values[key] = tuple(p for p in val.split(",") if p)
            elif key == "arm_file":
                values[key] = val or None
            else:
                values[key] = val
    return HarnessConfig(**values)


def _build_env(cfg, trial_seed):
    family = make_family(cfg.family, dispersion=cfg.dispersion if cfg.family == "gaussian" else None)
    if cfg.arm_file:
        contexts, means = load_arm_file(cfg.arm_file)
        return family, BanditEnv(
            family, contexts.shape[1], cfg.S, arm_mode="from_file",
            seed=trial_seed, contexts=contexts, arm_means=means,
        )
    return family, BanditEnv(family, cfg.d, cfg.S, K=cfg.K, seed=trial_seed)


def _run_one_trial(cfg, policy_name, trial):
    """Worker for one (policy, trial) cell; returns plain picklable data."""
    trial_seed = [cfg.seed, trial]
    family, env = _build_env(cfg, trial_seed)
    policy = make_policy(
        policy_name, family, env.d, cfg.S, delta=cfg.delta,
        lambda_mode=cfg.lambda_mode, radius_scale=cfg.radius_scale,
    )
    record = run_trial(policy, env, cfg.T)
    return {
        "rows": record.csv_rows(trial=trial),
        "final_regret": record.total_regret,
        "mean_round_time_ns": float(np.mean(record.round_time_ns)),
        "kappa_analytic": record.kappa_analytic,
        "kappa_empirical": record.kappa_empirical,
        "kappa_star": record.kappa_star,
        "fit_warnings": record.fit_warnings,
    }


def _trial_cell(task):
    cfg, policy_name, trial = task
    try:
        return (policy_name, trial, _run_one_trial(cfg, policy_name, trial), None)
    except (GlbError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return (policy_name, trial, None, f"{type(exc).__name__}: {exc}")


def _usage_error(parser, message):
    print(f"error: {message}", file=sys.stderr)
    parser.print_usage(sys.stderr)
    return 2


def _write_summary(path, cfg, policy_rows, extra_meta=()):
    lines = [f"# version={__version__}"]
    for key, val in cfg.metadata_items():
        lines.append(f"# {key}={val}")
    for key, val in extra_meta:
        lines.append(f"# {key}={val}")
    lines.append(
        "policy,trials_ok,trials_failed,final_regret_mean,final_regret_std,"
        "mean_round_time_ns,kappa_analytic,kappa_empirical,kappa_star_mean,fit_warnings"
    )
    lines.extend(policy_rows)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def run_command(args, parser):
    try:
        cfg, _ = _effective_config(args)
    except (GlbError, ValueError) as exc:
        return _usage_error(parser, str(exc))
    if cfg.trials < 1:
        return _usage_error(parser, f"--trials must be >= 1, got {cfg.trials}")
    if cfg.T < 1:
        return _usage_error(parser, f"--T must be >= 1, got {cfg.T}")
    for name in cfg.policy:
        if name not in POLICY_NAMES:
            return _usage_error(parser, f"unknown policy {name!r}")
    if cfg.arm_file:
        try:
            load_arm_file(cfg.arm_file)
        except (GlbError, OSError) as exc:
            return _usage_error(parser, f"arm file: {exc}")

    os.makedirs(cfg.out, exist_ok=True)
    tasks = [(cfg, name, trial) for name in cfg.policy for trial in range(cfg.trials)]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            raw = list(pool.map(_trial_cell, tasks))
    else:
        raw = [_trial_cell(task) for task in tasks]

    by_policy = {name: {} for name in cfg.policy}
    for policy_name, trial, payload, err in raw:
        by_policy[policy_name][trial] = (payload, err)

    summary_rows = []
    total_ok = 0
    for name in cfg.policy:
        cells = [by_policy[name][trial] for trial in range(cfg.trials)]
        ok = [payload for payload, err in cells if err is None]
        failed = [(trial, err) for trial, (payload, err) in enumerate(cells) if err]
        total_ok += len(ok)

        csv_path = os.path.join(cfg.out, f"{name}.csv")
        with open(csv_path, "w") as fh:
            fh.write(RUN_CSV_HEADER + "\n")
            for payload, err in cells:
                if err is None:
                    fh.write("\n".join(payload["rows"]) + "\n")

        if ok:
            finals = np.array([p["final_regret"] for p in ok])
            row = (
                f"{name},{len(ok)},{len(failed)},"
                f"{float(finals.mean())!r},{float(finals.std())!r},"
                f"{float(np.mean([p['mean_round_time_ns'] for p in ok]))!r},"
                f"{float(ok[0]['kappa_analytic'])!r},{float(ok[0]['kappa_empirical'])!r},"
                f"{float(np.mean([p['kappa_star'] for p in ok]))!r},"
                f"{sum(p['fit_warnings'] for p in ok)}"
            )
        else:
            row = f"{name},0,{len(failed)},nan,nan,nan,nan,nan,nan,0"
        summary_rows.append(row)
        for trial, err in failed:
            summary_rows.append(f"# failed policy={name} trial={trial}: {err}")

    _write_summary(os.path.join(cfg.out, "summary.csv"), cfg, summary_rows)
    for row in summary_rows:
        print(row)
    return 0 if total_ok > 0 else 1


def verify_command(args, parser):
    names = SUITE_NAMES if args.suite is None else (args.suite,)
    try:
        results = run_suites(
            names, cases=args.cases, trials=args.trials, T=args.T, seed=args.seed
        )
    except (GlbError, ValueError) as exc:
        return _usage_error(parser, str(exc))
    all_ok = True
    for res in results:
        tag = "PASS" if res.passed else "FAIL"
        print(f"[{tag}] {res.name}: {res.detail}")
        if not res.passed:
            all_ok = False
            if res.failing_case:
                print(f"       failing case: {res.failing_case}")
    return 0 if all_ok else 1


def bench_window_ratio(round_time_ns, T):
    """Late-window mean over early-window mean of per-round times."""
    early = np.asarray(round_time_ns[100:1100], dtype=float)
    late = np.asarray(round_time_ns[T - 1000:T], dtype=float)
    return float(late.mean() / early.mean())


def bench_command(args, parser):
    try:
        cfg, explicit = _effective_config(args)
    except (GlbError, ValueError) as exc:
        return _usage_error(parser, str(exc))
    # bench-specific defaults: time both policies over a long enough horizon
    if "policy" not in explicit:
        cfg = replace(cfg, policy=("glb-omd", "glm-ucb"))
    if "T" not in explicit:
        cfg = replace(cfg, T=5000)
    if cfg.T < 2100:
        return _usage_error(parser, "bench needs --T >= 2100 for the window statistic")
    os.makedirs(cfg.out, exist_ok=True)

    lines = []
    for name in cfg.policy:
        if name not in POLICY_NAMES:
            return _usage_error(parser, f"unknown policy {name!r}")
        family, env = _build_env(cfg, [cfg.seed, 0])
        policy = make_policy(
            name, family, env.d, cfg.S, delta=cfg.delta,
            lambda_mode=cfg.lambda_mode, radius_scale=cfg.radius_scale,
        )
        record = run_trial(policy, env, cfg.T)
        csv_path = os.path.join(cfg.out, f"bench_{name}.csv")
        with open(csv_path, "w") as fh:
            fh.write(RUN_CSV_HEADER + "\n")
            fh.write("\n".join(record.csv_rows(trial=0)) + "\n")
        ratio = bench_window_ratio(record.round_time_ns, cfg.T)
        line = (
            f"{name},{cfg.T},{float(np.mean(record.round_time_ns[100:1100]))!r},"
            f"{float(np.mean(record.round_time_ns[cfg.T - 1000:cfg.T]))!r},{ratio!r}"
        )
        lines.append(line)
        print(f"{name}: window ratio {ratio:.3f} (late mean / early mean)")

    with open(os.path.join(cfg.out, "bench_summary.csv"), "w") as fh:
        fh.write("policy,T,early_window_mean_ns,late_window_mean_ns,window_ratio\n")
        fh.write("\n".join(lines) + "\n")
    return 0


def _add_shared_flags(sub):
    sub.add_argument("--family", choices=("logistic", "poisson", "gaussian"))
    sub.add_argument("--dispersion", type=float)
    sub.add_argument("--d", type=int)
    sub.add_argument("--S", type=float)
    sub.add_argument("--T", type=int)
    sub.add_argument("--K", type=int)
    sub.add_argument("--delta", type=float)
    sub.add_argument("--trials", type=int)
    sub.add_argument("--policy", action="append", choices=POLICY_NAMES)
    sub.add_argument("--lambda-mode", dest="lambda_mode", choices=("theory", "practical"))
    sub.add_argument("--radius-scale", dest="radius_scale", type=float)
    sub.add_argument("--seed", type=int)
    sub.add_argument("--jobs", type=int)
    sub.add_argument("--arm-file", dest="arm_file")
    sub.add_argument("--out")
    sub.add_argument("--config")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="glbandit",
        description="Generalized linear bandit simulation harness",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    run_p = subs.add_parser("run", help="run an experiment matrix and write CSVs")
    _add_shared_flags(run_p)

    verify_p = subs.add_parser("verify", help="run oracle verification suites")
    verify_p.add_argument("--suite", choices=SUITE_NAMES)
    verify_p.add_argument("--cases", type=int)
    verify_p.add_argument("--trials", type=int)
    verify_p.add_argument("--T", type=int)
    verify_p.add_argument("--seed", type=int)

    bench_p = subs.add_parser("bench", help="per-round timing comparison")
    _add_shared_flags(bench_p)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 2
    if args.command == "run":
        return run_command(args, parser)
    if args.command == "verify":
        return verify_command(args, parser)
    if args.command == "bench":
        return bench_command(args, parser)
    parser.print_usage(sys.stderr)
    return 2


if __name__ == "__main__":
    sys.exit(main())
