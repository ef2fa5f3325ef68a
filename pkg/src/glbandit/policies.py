"""Arm-selection policies behind a uniform select/observe interface.

All stochasticity lives in the environment; given the same observation
stream, a policy always selects the same arm sequence.  Ties break toward
the lowest index.
"""

import math

import numpy as np

from .errors import ConfigError, ContractViolation
from .estimators import (
    MleState,
    beta_radius,
    configure_params,
    mle_fit,
    new_omd_state,
    omd_update,
)
from .glm import family_bounds
from .linalg import InverseTracker

__all__ = ["Policy", "GlbOmdPolicy", "GlmUcbPolicy", "make_policy", "POLICY_NAMES"]

POLICY_NAMES = ("glb-omd", "glm-ucb", "greedy")


def _checked_action_matrix(action_set):
    A = np.atleast_2d(np.asarray(action_set, dtype=float))
    if A.size == 0:
        raise ContractViolation("empty action set")
    norms = np.linalg.norm(A, axis=1)
    if norms.max() > 1.0 + 1e-9:
        raise ContractViolation(f"action norm {norms.max():g} exceeds 1")
    return A


class Policy:
    """Interface: select(action_set) -> (index, score); observe(x, r)."""

    name = "policy"

    def select(self, action_set):
        raise NotImplementedError

    def observe(self, x, r):
        raise NotImplementedError

    def current_radius(self):
        """Bonus multiplier logged per round (0 for pure exploitation)."""
        raise NotImplementedError


class GlbOmdPolicy(Policy):
    """Optimistic selection over the ellipsoid of the one-pass estimator.

    Scores each arm by x.theta_t + beta_t * ||x||_{H_t^{-1}}; the inner
    maximization over the ellipsoid has this closed form because the mean
    function is strictly increasing.  With ``greedy=True`` the bonus is
    dropped and the policy exploits the current estimate only.
    """

    def __init__(self, family, d, params=None, S=None, delta=0.01,
                 lambda_mode="practical", greedy=False):
        if params is None:
            if S is None:
                raise ConfigError("either params or S must be given")
            params = configure_params(family, d, S, delta, lambda_mode)
        self.name = "greedy" if greedy else "glb-omd"
        self.greedy = greedy
        self.params = params
        self.family = family
        self.state = new_omd_state(family, d, params)

    def current_radius(self):
        if self.greedy:
            return 0.0
        return beta_radius(self.params, self.family, self.state.d, self.state.t)

    def select(self, action_set):
        A = _checked_action_matrix(action_set)
        payoff = A @ self.state.theta
        beta = self.current_radius()
        if beta > 0.0:
            quad = np.einsum("ij,jk,ik->i", A, self.state.H_inv, A)
            scores = payoff + beta * np.sqrt(np.maximum(quad, 0.0))
        else:
            scores = payoff
        idx = int(np.argmax(scores))
        return idx, float(scores[idx])

    def observe(self, x, r):
        omd_update(self.state, x, r)


class GlmUcbPolicy(Policy):
    """Full-likelihood baseline: ridge-regularized MLE plus a slope-scaled bonus.

    Scores each arm by mu(x.theta_hat) +
    radius_scale * kappa * sqrt(d * ln(1 + t)) * ||x||_{V_t^{-1}}, where
    V_t = lam*I + sum x_s x_s^T and kappa = 1/min mu' over [-S, S].  Refits
    warm-started from the previous solution after every observation, with a
    cold full refit every ``refit_every`` rounds; per-round cost grows with
    the history length.
    """

    name = "glm-ucb"

    def __init__(self, family, d, S, lam=None, radius_scale=1.0, refit_every=50):
        if not S > 0:
            raise ConfigError(f"S must be positive, got {S}")
        self.family = family
        self.d = int(d)
        self.S = float(S)
        lam = float(d) if lam is None else float(lam)
        if not lam > 0:
            raise ConfigError(f"lam must be positive, got {lam}")
        self.mle = MleState(dim=self.d, lam=lam)
        self.V = InverseTracker.regularized_identity(self.d, lam)
        self.kappa = family_bounds(family, self.S).kappa
        self.radius_scale = float(radius_scale)
        self.refit_every = int(refit_every)
        self.fit_warnings = 0

    def current_radius(self):
        t = len(self.mle) + 1
        return self.radius_scale * self.kappa * math.sqrt(self.d * math.log1p(t))

    def glm_ucb_score(self, x, t):
        """Optimistic score of a single arm at round t."""
        x = np.asarray(x, dtype=float)
        bonus = self.radius_scale * self.kappa * math.sqrt(self.d * math.log1p(t))
        return float(self.family.mu(float(x @ self.mle.theta_hat))
                     + bonus * math.sqrt(max(x @ self.V.inverse @ x, 0.0)))

    def select(self, action_set):
        A = _checked_action_matrix(action_set)
        t = len(self.mle) + 1
        payoff = self.family.mu(A @ self.mle.theta_hat)
        bonus = self.radius_scale * self.kappa * math.sqrt(self.d * math.log1p(t))
        quad = np.einsum("ij,jk,ik->i", A, self.V.inverse, A)
        scores = payoff + bonus * np.sqrt(np.maximum(quad, 0.0))
        idx = int(np.argmax(scores))
        return idx, float(scores[idx])

    def observe(self, x, r):
        self.mle.append(x, r)
        self.V.rank1_update(np.asarray(x, dtype=float), 1.0)
        cold = len(self.mle) % self.refit_every == 0
        mle_fit(self.mle, self.family, self.S, warm_start=not cold)
        if not self.mle.last_fit_converged:
            self.fit_warnings += 1


def make_policy(name, family, d, S, delta=0.01, lambda_mode="practical",
                radius_scale=1.0):
    """Construct a policy by its configuration name."""
    if name == "glb-omd":
        return GlbOmdPolicy(family, d, S=S, delta=delta, lambda_mode=lambda_mode)
    if name == "greedy":
        return GlbOmdPolicy(family, d, S=S, delta=delta, lambda_mode=lambda_mode,
                            greedy=True)
    if name == "glm-ucb":
        return GlmUcbPolicy(family, d, S, radius_scale=radius_scale)
    raise ConfigError(f"unknown policy {name!r}; expected one of {POLICY_NAMES}")
