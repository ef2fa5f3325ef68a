"""Synthetic bandit environments, arm-file loading, trials, and regret logs.

An environment hides a parameter vector on the radius-S sphere (or a table
of per-arm Bernoulli means loaded from file), emits per-round action sets
with unit-bounded norms, and samples rewards from the configured family.
Trials are embarrassingly parallel: each owns its environment, policy, and
random stream.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ArmFileError, ConfigError, ContractViolation
from .glm import family_bounds, validate_family

__all__ = [
    "BanditEnv",
    "RunRecord",
    "run_trial",
    "load_arm_file",
    "save_arm_file",
    "kappa_star_empirical",
    "RUN_CSV_HEADER",
    "ARM_MODES",
]

ARM_MODES = ("fixed_set", "resampled_per_round", "from_file")
RUN_CSV_HEADER = "trial,t,arm,reward,inst_regret,cum_regret,beta,round_time_ns"


def _unit_rows(rng, K, d):
    X = rng.normal(size=(K, d))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    return X


class BanditEnv:
    """Interaction protocol: present an action set, sample a reward, keep score.

    The hidden parameter is sampled uniformly on the radius-S sphere unless
    given explicitly.  When constructed from an arm file that carries
    per-arm means, rewards are Bernoulli draws from those means and regret
    is measured against the largest listed mean (no hidden parameter).
    """

    def __init__(self, family, d, S, K=20, arm_mode="resampled_per_round",
                 seed=0, theta_star=None, contexts=None, arm_means=None):
        if arm_mode not in ARM_MODES:
            raise ConfigError(f"arm_mode must be one of {ARM_MODES}, got {arm_mode!r}")
        if not S > 0:
            raise ConfigError(f"S must be positive, got {S}")
        validate_family(family, float(S))
        self.family = family
        self.d = int(d)
        self.S = float(S)
        self.arm_mode = arm_mode
        self.rng = np.random.default_rng(seed)
        self._theta_star_pinned = theta_star is not None

        if arm_mode == "from_file":
            if contexts is None:
                raise ConfigError("from_file mode requires contexts")
            contexts = np.asarray(contexts, dtype=float)
            if contexts.shape[1] != self.d:
                raise ConfigError(
                    f"contexts have d={contexts.shape[1]}, expected {self.d}"
                )
            self.contexts = contexts
            self.K = contexts.shape[0]
            self.arm_means = None if arm_means is None else np.asarray(arm_means, float)
            if self.arm_means is not None and family.name != "logistic":
                raise ConfigError("per-arm Bernoulli means require the logistic family")
        else:
            if K < 2:
                raise ConfigError(f"K must be >= 2, got {K}")
            self.K = int(K)
            self.contexts = None
            self.arm_means = None

        if self.arm_means is None:
            if theta_star is not None:
                theta_star = np.asarray(theta_star, dtype=float)
                if theta_star.shape != (self.d,):
                    raise ConfigError("theta_star has the wrong dimension")
                self.theta_star = theta_star
            else:
                self.theta_star = self._sample_theta_star()
        else:
            self.theta_star = None

        if arm_mode == "fixed_set":
            self._fixed_arms = _unit_rows(self.rng, self.K, self.d)

    def _sample_theta_star(self):
        v = self.rng.normal(size=self.d)
        return v / np.linalg.norm(v) * self.S

    def reseed(self, seed):
        """Re-seed the stream; synthetic hidden parameters are re-drawn too."""
        self.rng = np.random.default_rng(seed)
        if self.arm_means is None and not self._theta_star_pinned:
            self.theta_star = self._sample_theta_star()
        if self.arm_mode == "fixed_set":
            self._fixed_arms = _unit_rows(self.rng, self.K, self.d)
        return self

    @property
    def table_mode(self):
        return self.arm_means is not None

    def gen_action_set(self, t):
        """Action set for round t, every row with norm <= 1."""
        if self.arm_mode == "fixed_set":
            return self._fixed_arms
        if self.arm_mode == "resampled_per_round":
            return _unit_rows(self.rng, self.K, self.d)
        return self.contexts

    def mean_reward(self, x, arm_index=None):
        if self.table_mode:
            if arm_index is None:
                raise ContractViolation("arm_index required with tabulated means")
            return float(self.arm_means[arm_index])
        return float(self.family.mu(float(np.asarray(x) @ self.theta_star)))

    def step(self, x, rng=None, arm_index=None):
        """Sample the reward of the chosen action."""
        rng = self.rng if rng is None else rng
        if self.table_mode:
            if arm_index is None:
                raise ContractViolation("arm_index required with tabulated means")
            return 1.0 if rng.random() < self.arm_means[arm_index] else 0.0
        return self.family.sample_reward(float(np.asarray(x) @ self.theta_star), rng)

    def optimal_action(self, action_set):
        """Index and mean reward of the best arm; ties go to the lowest index.

        The mean function is strictly increasing, so maximizing the margin
        x.theta_star is equivalent to maximizing the mean.
        """
        A = np.atleast_2d(np.asarray(action_set, dtype=float))
        if A.shape[0] == 0:
            raise ContractViolation("empty action set")
        if self.table_mode:
            idx = int(np.argmax(self.arm_means))
            return idx, float(self.arm_means[idx])
        margins = A @ self.theta_star
        idx = int(np.argmax(margins))
        return idx, float(self.family.mu(float(margins[idx])))


@dataclass
class RunRecord:
    """Per-round log of one trial plus summary statistics."""

    t: np.ndarray
    arm: np.ndarray
    reward: np.ndarray
    inst_regret: np.ndarray
    cum_regret: np.ndarray
    beta: np.ndarray
    round_time_ns: np.ndarray
    optimal_margin: np.ndarray  # x_star . theta_star per round (nan in table mode)
    total_regret: float
    kappa_analytic: float
    kappa_empirical: float
    kappa_star: float
    wall_time_s: float
    fit_warnings: int = 0
    seed: int | None = None

    def __len__(self):
        return len(self.t)

    def csv_rows(self, trial=0):
        """Rows in the run CSV schema (repr formatting keeps replays byte-stable)."""
        rows = []
        for i in range(len(self.t)):
            rows.append(
                f"{trial},{self.t[i]},{self.arm[i]},{float(self.reward[i])!r},"
                f"{float(self.inst_regret[i])!r},{float(self.cum_regret[i])!r},"
                f"{float(self.beta[i])!r},{self.round_time_ns[i]}"
            )
        return rows


def kappa_star_empirical(record, env):
    """Inverse time-average of the mean-function slope at the optimal arms.

    1 / ((1/T) * sum_t mu'(x_{t,*} . theta_star)); nan when the run used
    tabulated means (no hidden parameter to differentiate at).
    """
    if len(record) == 0:
        raise ConfigError("empty run record")
    z_star = record.optimal_margin
    if np.isnan(z_star).any():
        return float("nan")
    slopes = env.family.mu_prime(z_star)
    return float(1.0 / np.mean(slopes))


def run_trial(policy, env, T, seed=None):
    """Run T rounds of present -> select -> sample -> observe, with regret log.

    Only the select+observe pair is timed (monotonic clock); environment
    sampling and bookkeeping stay outside the timer.  Deterministic given
    the policy configuration, environment configuration, and seed.
    """
    if T < 1:
        raise ConfigError(f"T must be >= 1, got {T}")
    if seed is not None:
        env.reseed(seed)

    n = int(T)
    arm = np.zeros(n, dtype=int)
    reward = np.zeros(n)
    inst = np.zeros(n)
    cum = np.zeros(n)
    beta = np.zeros(n)
    times = np.zeros(n, dtype=np.int64)
    z_star = np.zeros(n)

    max_arm_norm = 0.0
    running = 0.0
    wall_start = time.perf_counter()
    for i in range(n):
        A = env.gen_action_set(i + 1)
        t0 = time.perf_counter_ns()
        idx, _ = policy.select(A)
        t1 = time.perf_counter_ns()
        beta_used = policy.current_radius()
        x = A[idx]
        r = env.step(x, arm_index=idx)
        t2 = time.perf_counter_ns()
        policy.observe(x, r)
        t3 = time.perf_counter_ns()

        opt_idx, opt_mean = env.optimal_action(A)
        gap = opt_mean - env.mean_reward(x, arm_index=idx)
        running += gap

        arm[i] = idx
        reward[i] = r
        inst[i] = gap
        cum[i] = running
        beta[i] = beta_used
        times[i] = (t1 - t0) + (t3 - t2)
        max_arm_norm = max(max_arm_norm, float(np.linalg.norm(A, axis=1).max()))
        if env.table_mode:
            z_star[i] = float("nan")
        else:
            z_star[i] = float(A[opt_idx] @ env.theta_star)
    wall = time.perf_counter() - wall_start

    bounds = family_bounds(env.family, env.S)
    reach = env.S * max_arm_norm
    kappa_emp = family_bounds(env.family, reach).kappa if reach > 0 else float("nan")
    record = RunRecord(
        t=np.arange(1, n + 1),
        arm=arm,
        reward=reward,
        inst_regret=inst,
        cum_regret=cum,
        beta=beta,
        round_time_ns=times,
        optimal_margin=z_star,
        total_regret=float(running),
        kappa_analytic=bounds.kappa,
        kappa_empirical=kappa_emp,
        kappa_star=float("nan"),
        wall_time_s=wall,
        fit_warnings=getattr(policy, "fit_warnings", 0),
        seed=seed,
    )
    record.kappa_star = kappa_star_empirical(record, env)
    return record


def save_arm_file(path, contexts, means=None, comment=None):
    """Write contexts (and optional per-arm means) in the arm-file format."""
    contexts = np.atleast_2d(np.asarray(contexts, dtype=float))
    K, d = contexts.shape
    lines = []
    if comment:
        for c in str(comment).splitlines():
            lines.append(f"# {c}")
    lines.append(f"d={d} K={K} has_means={0 if means is None else 1}")
    for i in range(K):
        row = " ".join(repr(float(v)) for v in contexts[i])
        if means is not None:
            row += f" {float(means[i])!r}"
        lines.append(row)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def load_arm_file(path):
    """Parse an arm file into (contexts, means-or-None).

    Header line "d=<int> K=<int> has_means=<0|1>" followed by K rows of d
    coordinates (plus one mean in [0,1] when has_means=1).  Lines starting
    with '#' are comments.  Rows are jointly rescaled by the largest row
    norm when that norm exceeds 1, which preserves the arm-set geometry.
    """
    with open(path) as fh:
        raw = fh.readlines()

    header = None
    header_line = 0
    data = []
    for lineno, line in enumerate(raw, start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        if header is None:
            header = text
            header_line = lineno
        else:
            data.append((lineno, text))

    if header is None:
        raise ArmFileError("missing header line")
    try:
        fields = dict(kv.split("=", 1) for kv in header.split())
        d = int(fields["d"])
        K = int(fields["K"])
        has_means = int(fields["has_means"])
    except (KeyError, ValueError):
        raise ArmFileError(
            'header must be "d=<int> K=<int> has_means=<0|1>"', line=header_line
        ) from None
    if has_means not in (0, 1):
        raise ArmFileError(f"has_means must be 0 or 1, got {has_means}", line=header_line)
    if len(data) != K:
        raise ArmFileError(f"expected K={K} data rows, found {len(data)}")

    width = d + has_means
    contexts = np.zeros((K, d))
    means = np.zeros(K) if has_means else None
    for i, (lineno, text) in enumerate(data):
        parts = text.split()
        if len(parts) != width:
            raise ArmFileError(
                f"expected {width} values, found {len(parts)}", line=lineno
            )
        try:
            values = [float(p) for p in parts]
        except ValueError:
            raise ArmFileError("non-numeric value", line=lineno) from None
        if not all(math.isfinite(v) for v in values):
            raise ArmFileError("non-finite value", line=lineno)
        contexts[i] = values[:d]
        if has_means:
            if not 0.0 <= values[d] <= 1.0:
                raise ArmFileError(f"mean {values[d]!r} outside [0, 1]", line=lineno)
            means[i] = values[d]

    max_norm = float(np.linalg.norm(contexts, axis=1).max()) if K else 0.0
    if max_norm > 1.0:
        contexts /= max_norm
    return contexts, means
