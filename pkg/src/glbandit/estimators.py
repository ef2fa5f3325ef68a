"""Online mirror-descent estimator, its confidence ellipsoid, and the MLE baseline.

The one-pass estimator keeps (theta_t, H_t, H_t^{-1}) and processes each
observation once: a gradient step preconditioned by the curvature-augmented
matrix, a ball projection in that matrix norm, then a rank-one curvature
update evaluated at the new iterate.  Total cost per observation is O(d^3),
independent of the round count.
"""

import math
from dataclasses import dataclass, field

import numpy as np


from .errors import ConfigError, ContractViolation
from .glm import family_bounds, validate_family
from .linalg import (
    InverseTracker,
    ball_project_hnorm,
    l2_project,
    sherman_morrison,
    weighted_norm,
)

__all__ = [
    "OmdParams",
    "OmdState",
    "ConfidenceSet",
    "MleState",
    "configure_params",
    "beta_radius",
    "new_omd_state",
    "omd_update",
    "confidence_set",
    "contains",
    "mle_fit",
]

LAMBDA_MODES = ("theory", "practical")


@dataclass(frozen=True)
class OmdParams:
    """Step size and regularization for the one-pass estimator."""

    S: float
    eta: float
    lam: float
    delta: float
    lambda_mode: str


def configure_params(family, d, S, delta, mode="theory"):
    """Derive (eta, lambda) from the family constants.

    eta = 1 + R*S always.  In theory mode
    lambda = 2 * max(7*d*eta*R^2, max(3*eta*R*S, 1) * C_mu / g), the setting
    under which the confidence radius below carries its coverage guarantee;
    in practical mode lambda = d, the convention used for simulation runs.
    """
    if d < 1:
        raise ConfigError(f"d must be >= 1, got {d}")
    if not S > 0:
        raise ConfigError(f"S must be positive, got {S}")
    if not 0.0 < delta <= 1.0:
        raise ConfigError(f"delta must lie in (0, 1], got {delta}")
    if mode not in LAMBDA_MODES:
        raise ConfigError(f"lambda_mode must be one of {LAMBDA_MODES}, got {mode!r}")
    validate_family(family, float(S))
    R = family.self_concordance_R
    eta = 1.0 + R * float(S)
    if mode == "theory":
        C_mu = family_bounds(family, float(S)).C_mu
        lam = 2.0 * max(7.0 * d * eta * R * R, max(3.0 * eta * R * S, 1.0) * C_mu / family.dispersion)
    else:
        lam = float(d)
    return OmdParams(S=float(S), eta=eta, lam=lam, delta=float(delta), lambda_mode=mode)


def beta_radius(params, family, d, t):
    """Confidence-ellipsoid radius after t processed observations.

    sqrt(4*lam*S^2 + 2*eta*ln(1/delta) + 6*d*eta^2*ln(2 + 2*C_mu*t/(lam*g))),
    non-decreasing in t and increasing in 1/delta.
    """
    if t < 0:
        raise ConfigError(f"t must be >= 0, got {t}")
    C_mu = family_bounds(family, params.S).C_mu
    g = family.dispersion
    return math.sqrt(
        4.0 * params.lam * params.S**2
        + 2.0 * params.eta * math.log(1.0 / params.delta)
        + 6.0 * d * params.eta**2 * math.log(2.0 + 2.0 * C_mu * t / (params.lam * g))
    )


@dataclass
class OmdState:
    """Mutable learner state: current iterate, curvature matrix, round counter."""

    theta: np.ndarray
    tracker: InverseTracker
    t: int
    params: OmdParams
    family: object

    @property
    def d(self):
        return self.theta.shape[0]

    @property
    def H(self):
        return self.tracker.matrix

    @property
    def H_inv(self):
        return self.tracker.inverse


def new_omd_state(family, d, params):
    """Fresh state: theta = 0, H = lam * I, round counter 1."""
    return OmdState(
        theta=np.zeros(d),
        tracker=InverseTracker.regularized_identity(d, params.lam),
        t=1,
        params=params,
        family=family,
    )


def omd_update(state, x, r):
    """Process one observation (x, r) in place and return the state.

    Equivalent to minimizing the second-order surrogate of the observation
    loss plus the (1/2eta)||theta - theta_t||_{H_t}^2 proximal term over the
    S-ball:
      1. Htil = H_t + eta * w_t * x x^T with w_t = mu'(x.theta_t)/g,
      2. zeta = theta_t - eta * Htil^{-1} (mu(x.theta_t) - r) x / g,
      3. theta_{t+1} = projection of zeta onto the S-ball in the Htil-norm,
      4. H_{t+1} = H_t + mu'(x.theta_{t+1})/g * x x^T.
    """
    x = np.asarray(x, dtype=float)
    nx = float(np.linalg.norm(x))
    if nx > 1.0 + 1e-9:
        raise ContractViolation(f"action norm {nx:g} exceeds 1")
    if not (np.isfinite(x).all() and math.isfinite(r)):
        raise ContractViolation("non-finite observation")

    family, params = state.family, state.params
    g = family.dispersion
    z = float(x @ state.theta)
    grad = ((family.mu(z) - r) / g) * x
    w = family.mu_prime(z) / g

    c_tilde = params.eta * w
    if nx > 0.0 and c_tilde > 0.0:
        H_tilde = state.tracker.matrix + c_tilde * np.outer(x, x)
        H_tilde_inv = sherman_morrison(state.tracker.inverse, x, c_tilde)
    else:
        H_tilde = state.tracker.matrix
        H_tilde_inv = state.tracker.inverse

    zeta = state.theta - params.eta * (H_tilde_inv @ grad)
    theta_next = ball_project_hnorm(zeta, H_tilde, params.S)

    w_next = family.mu_prime(float(x @ theta_next)) / g
    if nx > 0.0 and w_next > 0.0:
        state.tracker.rank1_update(x, w_next)
    state.theta = theta_next
    state.t += 1
    return state


@dataclass(frozen=True)
class ConfidenceSet:
    """Ellipsoid {theta : ||theta - center||_H <= beta}."""

    center: np.ndarray
    H: np.ndarray
    beta: float


def confidence_set(state):
    """Snapshot of the current ellipsoid (copies are safe to share)."""
    return ConfidenceSet(
        center=state.theta.copy(),
        H=state.tracker.matrix.copy(),
        beta=beta_radius(state.params, state.family, state.d, state.t),
    )


def contains(cset, theta):
    """Membership test in the H-norm."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != cset.center.shape:
        raise ContractViolation(
            f"dimension mismatch: {theta.shape} vs {cset.center.shape}"
        )
    return weighted_norm(theta - cset.center, cset.H) <= cset.beta


@dataclass
class MleState:
    """History buffer and warm-started fit for the full-likelihood baseline."""

    dim: int
    lam: float
    actions: list = field(default_factory=list)
    rewards: list = field(default_factory=list)
    theta_hat: np.ndarray = None
    last_fit_converged: bool = True

    def __post_init__(self):
        if self.theta_hat is None:
            self.theta_hat = np.zeros(self.dim)

    def append(self, x, r):
        self.actions.append(np.asarray(x, dtype=float))
        self.rewards.append(float(r))

    def __len__(self):
        return len(self.rewards)


def mle_fit(state, family, S, warm_start=True, tol=1e-8, max_iter=100):
    """Minimize the ridge-regularized negative log-likelihood over the S-ball.

    Damped projected Newton: each step minimizes the local quadratic model
    over the ball (a projection in the Hessian norm), with backtracking on
    the true objective.  Stops when the projected-gradient residual drops
    below ``tol``; on non-convergence the best iterate is kept and
    ``state.last_fit_converged`` is set False.  Deterministic given history.
    """
    if len(state) == 0:
        state.theta_hat = np.zeros(state.dim)
        state.last_fit_converged = True
        return state.theta_hat

    X = np.asarray(state.actions)
    r = np.asarray(state.rewards)
    g = family.dispersion
    lam = state.lam
    theta = state.theta_hat.copy() if warm_start else np.zeros(state.dim)

    def objective(th):
        z = X @ th
        return float((np.sum(family.cumulant(z)) - r @ z) / g + lam * (th @ th))

    def grad_hess(th):
        z = X @ th
        resid = (family.mu(z) - r) / g
        grad = X.T @ resid + 2.0 * lam * th
        w = family.mu_prime(z) / g
        hess = X.T @ (w[:, None] * X) + 2.0 * lam * np.eye(state.dim)
        return grad, hess

    converged = False
    f_cur = objective(theta)
    for _ in range(max_iter):
        grad, hess = grad_hess(theta)
        pg = theta - l2_project(theta - grad, S)
        if float(np.linalg.norm(pg)) <= tol:
            converged = True
            break
        newton_dir = np.linalg.solve(hess, grad)
        step = 1.0
        improved = False
        # near the optimum the objective plateaus at float precision while the
        # gradient still shrinks, so acceptance is tolerant of that plateau
        f_slack = 1e-12 * (1.0 + abs(f_cur))
        for _ in range(40):
            # damped step: quadratic-model minimizer over the ball
            cand = ball_project_hnorm(theta - step * newton_dir, hess, S)
            f_cand = objective(cand)
            if f_cand < f_cur + f_slack and not np.array_equal(cand, theta):
                theta, f_cur = cand, f_cand
                improved = True
                break
            step *= 0.5
        if not improved:
            break

    state.theta_hat = theta
    state.last_fit_converged = converged
    return theta
