"""Self-contained verification suites backed by independent oracles.

Each suite re-checks a core computation against a slower method that shares
no code with the fast path: random-point search for the ball projection,
projected gradient descent for the one-pass update, dense re-inversion for
the tracked inverse, grid search for the MLE, and a Monte Carlo coverage
run for the confidence sets.  The command-line ``verify`` subcommand and
the test suite both call these.
"""

from dataclasses import dataclass

import numpy as np

from .estimators import (
    MleState,
    OmdParams,
    confidence_set,
    configure_params,
    contains,
    mle_fit,
    new_omd_state,
    omd_update,
)
from .env import BanditEnv
from .glm import make_family
from .linalg import InverseTracker, ball_project_hnorm, l2_project
from .policies import GlbOmdPolicy

__all__ = [
    "VerifyResult",
    "projected_gradient_oracle",
    "grid_search_mle_oracle",
    "suite_projection",
    "suite_omd_equivalence",
    "suite_sherman_morrison",
    "suite_mle_grid",
    "suite_coverage",
    "run_suites",
    "SUITE_NAMES",
]


@dataclass
class VerifyResult:
    name: str
    passed: bool
    detail: str
    failing_case: str | None = None


def _random_spd(rng, d, lam_floor=0.5):
    A = rng.normal(size=(d, d))
    return lam_floor * np.eye(d) + A @ A.T


def suite_projection(cases=1000, feasible_points=10000, seed=12345):
    """Random-search optimality check of the matrix-norm ball projection.

    For each random (zeta, H, S) with d <= 4 the returned point must beat
    ``feasible_points`` random feasible candidates on the H-norm objective,
    land on the sphere (within 1e-9) whenever zeta is exterior, and be a
    fixed point of the projection.
    """
    rng = np.random.default_rng(seed)
    worst_norm_err = 0.0
    for case in range(cases):
        d = int(rng.integers(1, 5))
        H = _random_spd(rng, d)
        S = float(rng.uniform(0.2, 2.0))
        zeta = rng.normal(size=d) * rng.uniform(0.1, 3.0)
        theta = ball_project_hnorm(zeta, H, S)

        exterior = np.linalg.norm(zeta) > S
        if exterior:
            err = abs(float(np.linalg.norm(theta)) - S)
            worst_norm_err = max(worst_norm_err, err)
            if err > 1e-9:
                return VerifyResult(
                    "projection", False, f"boundary norm off by {err:.2e}",
                    failing_case=f"case={case} zeta={zeta!r} H={H!r} S={S}",
                )
        again = ball_project_hnorm(theta, H, S)
        if np.max(np.abs(again - theta)) > 1e-10:
            return VerifyResult(
                "projection", False, "projection is not idempotent",
                failing_case=f"case={case} zeta={zeta!r} H={H!r} S={S}",
            )

        # uniform candidates in the ball: scaled directions with radius^(1/d) law
        U = rng.normal(size=(feasible_points, d))
        U /= np.linalg.norm(U, axis=1, keepdims=True)
        radii = S * rng.random(feasible_points) ** (1.0 / d)
        P = U * radii[:, None]
        diff = P - zeta
        objs = np.einsum("ij,jk,ik->i", diff, H, diff)
        own = float((theta - zeta) @ H @ (theta - zeta))
        if own > objs.min() + 1e-9:
            return VerifyResult(
                "projection", False,
                f"random feasible point beats projection by {own - objs.min():.2e}",
                failing_case=f"case={case} zeta={zeta!r} H={H!r} S={S}",
            )
    return VerifyResult(
        "projection", True,
        f"{cases} cases, worst boundary-norm error {worst_norm_err:.2e}",
    )


def projected_gradient_oracle(theta_t, H, x, r, eta, S, family,
                              tol=1e-10, max_iter=500_000):
    """Minimize the surrogate-plus-prox objective by projected gradient descent.

    Independent of the closed-form path: fixed step 1/L with Euclidean ball
    projection, run until the projected-gradient residual is below ``tol``.
    """
    g = family.dispersion
    z = float(x @ theta_t)
    grad0 = ((family.mu(z) - r) / g) * x
    M = (family.mu_prime(z) / g) * np.outer(x, x) + H / eta
    step = 1.0 / float(np.linalg.eigvalsh(M).max())
    th = theta_t.copy()
    for _ in range(max_iter):
        grad = grad0 + M @ (th - theta_t)
        nxt = l2_project(th - step * grad, S)
        if float(np.linalg.norm(nxt - th)) / step <= tol:
            return nxt
        th = nxt
    return th


def suite_omd_equivalence(instances=50, d=2, S=2.0, seed=777, tol=1e-6):
    """One-pass update vs direct minimization of its defining objective."""
    rng = np.random.default_rng(seed)
    family = make_family("logistic")
    worst = 0.0
    for case in range(instances):
        H = _random_spd(rng, d, lam_floor=float(rng.uniform(0.5, 3.0)))
        theta_t = rng.normal(size=d)
        theta_t = theta_t / np.linalg.norm(theta_t) * rng.uniform(0.0, S)
        x = rng.normal(size=d)
        x = x / np.linalg.norm(x) * rng.uniform(0.1, 1.0)
        r = float(rng.integers(0, 2))
        eta = float(rng.uniform(0.5, 4.0))

        params = OmdParams(S=S, eta=eta, lam=1.0, delta=1.0, lambda_mode="practical")
        state = new_omd_state(family, d, params)
        state.theta = theta_t.copy()
        state.tracker = InverseTracker(H)
        omd_update(state, x, r)

        ref = projected_gradient_oracle(theta_t, H, x, r, eta, S, family)
        err = float(np.max(np.abs(state.theta - ref)))
        worst = max(worst, err)
        if err > tol:
            return VerifyResult(
                "omd-equivalence", False, f"coordinate gap {err:.2e} exceeds {tol:g}",
                failing_case=(
                    f"case={case} theta_t={theta_t!r} H={H!r} x={x!r} r={r} eta={eta}"
                ),
            )
    return VerifyResult(
        "omd-equivalence", True, f"{instances} instances, worst gap {worst:.2e}"
    )


def suite_sherman_morrison(updates=10000, d=5, seed=99, tol=1e-6):
    """Tracked inverse vs a fresh dense inversion after many rank-one updates."""
    rng = np.random.default_rng(seed)
    tracker = InverseTracker.regularized_identity(d, 1.0)
    for _ in range(updates):
        v = rng.normal(size=d)
        v = v / np.linalg.norm(v) * rng.uniform(0.0, 1.0)
        c = float(rng.uniform(0.01, 1.0))
        tracker.rank1_update(v, c)
    fresh = np.linalg.inv(tracker.matrix)
    err = float(np.max(np.abs(tracker.inverse - fresh)))
    residual = float(np.max(np.abs(tracker.matrix @ tracker.inverse - np.eye(d))))
    ok = err <= tol and residual <= tol
    return VerifyResult(
        "sherman-morrison", ok,
        f"{updates} updates, max inverse error {err:.2e}, residual {residual:.2e}",
        failing_case=None if ok else f"seed={seed} d={d} updates={updates}",
    )


def grid_search_mle_oracle(X, r, lam, family, S, resolution=1e-3):
    """Two-dimensional grid search over the ball, then local refinement."""
    assert X.shape[1] == 2

    def objective_many(G):
        out = np.zeros(len(G))
        chunk = 200_000
        for lo in range(0, len(G), chunk):
            B = G[lo:lo + chunk]
            z = B @ X.T
            out[lo:lo + chunk] = (
                np.sum(family.cumulant(z), axis=1) - z @ r
            ) / family.dispersion + lam * np.sum(B * B, axis=1)
        return out

    def best_on(axis_vals, center):
        gx, gy = np.meshgrid(axis_vals + center[0], axis_vals + center[1])
        G = np.column_stack([gx.ravel(), gy.ravel()])
        G = G[np.linalg.norm(G, axis=1) <= S]
        vals = objective_many(G)
        return G[np.argmin(vals)]

    best = best_on(np.arange(-S, S + resolution, resolution), np.zeros(2))
    for res in (1e-4, 1e-5, 1e-6):
        span = np.arange(-30 * res, 30 * res + res / 2, res)
        best = best_on(span, best)
    return best


def suite_mle_grid(instances=2, points=10, seed=4242, tol=2e-3):
    """Constrained-MLE solver vs an independent grid search (d = 2)."""
    rng = np.random.default_rng(seed)
    family = make_family("logistic")
    S = 1.0
    worst = 0.0
    for case in range(instances):
        X = rng.normal(size=(points, 2))
        X /= np.maximum(np.linalg.norm(X, axis=1, keepdims=True), 1.0)
        theta_true = rng.normal(size=2)
        theta_true /= np.linalg.norm(theta_true)
        probs = family.mu(X @ theta_true)
        r = (rng.random(points) < probs).astype(float)

        state = MleState(dim=2, lam=1.0)
        for i in range(points):
            state.append(X[i], r[i])
        fit = mle_fit(state, family, S, warm_start=False)
        ref = grid_search_mle_oracle(X, r, 1.0, family, S)
        err = float(np.max(np.abs(fit - ref)))
        worst = max(worst, err)
        if err > tol:
            return VerifyResult(
                "mle-grid", False, f"coordinate gap {err:.2e} exceeds {tol:g}",
                failing_case=f"case={case} X={X!r} r={r!r}",
            )
    return VerifyResult("mle-grid", True, f"{instances} instances, worst gap {worst:.2e}")


def coverage_fraction(trials=100, T=500, d=2, S=1.0, delta=0.1, family_name="logistic",
                      K=10, seed=2024):
    """Fraction of seeded trials whose confidence set holds the hidden parameter
    at every round, under the guarantee-mode parameter settings."""
    family = make_family(family_name)
    params = configure_params(family, d, S, delta, mode="theory")
    covered = 0
    for trial in range(trials):
        env = BanditEnv(family, d, S, K=K, seed=[seed, trial])
        policy = GlbOmdPolicy(family, d, params=params)
        ok = True
        for t in range(1, T + 1):
            if not contains(confidence_set(policy.state), env.theta_star):
                ok = False
                break
            A = env.gen_action_set(t)
            idx, _ = policy.select(A)
            x = A[idx]
            r = env.step(x)
            policy.observe(x, r)
        if ok:
            covered += 1
    return covered / trials


def suite_coverage(trials=30, T=200, d=2, S=1.0, delta=0.1, seed=2024):
    """Monte Carlo check that coverage clears its nominal level."""
    frac = coverage_fraction(trials=trials, T=T, d=d, S=S, delta=delta, seed=seed)
    ok = frac >= 1.0 - delta
    return VerifyResult(
        "coverage", ok,
        f"{trials} trials, horizon {T}: all-round coverage {frac:.3f} vs nominal {1 - delta:.2f}",
        failing_case=None if ok else f"trials={trials} T={T} delta={delta} seed={seed}",
    )


SUITE_NAMES = ("projection", "omd", "sherman-morrison", "mle", "coverage")


def run_suites(names=SUITE_NAMES, cases=None, trials=None, T=None, seed=None):
    """Run the named suites with optional size overrides; returns the results."""
    results = []
    for name in names:
        if name == "projection":
            kw = {}
            if cases is not None:
                kw["cases"] = cases
            if seed is not None:
                kw["seed"] = seed
            results.append(suite_projection(**kw))
        elif name == "omd":
            kw = {}
            if cases is not None:
                kw["instances"] = cases
            if seed is not None:
                kw["seed"] = seed
            results.append(suite_omd_equivalence(**kw))
        elif name == "sherman-morrison":
            kw = {}
            if cases is not None:
                kw["updates"] = cases
            if seed is not None:
                kw["seed"] = seed
            results.append(suite_sherman_morrison(**kw))
        elif name == "mle":
            kw = {}
            if cases is not None:
                kw["instances"] = cases
            if seed is not None:
                kw["seed"] = seed
            results.append(suite_mle_grid(**kw))
        elif name == "coverage":
            kw = {}
            if trials is not None:
                kw["trials"] = trials
            if T is not None:
                kw["T"] = T
            if seed is not None:
                kw["seed"] = seed
            results.append(suite_coverage(**kw))
        else:
            raise ValueError(f"unknown suite {name!r}")
    return results
