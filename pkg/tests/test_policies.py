"""Policy tests: scoring, tie-breaking, observation handling, determinism."""

import math

import numpy as np
import pytest

from glbandit.errors import ConfigError, ContractViolation
from glbandit.estimators import configure_params
from glbandit.glm import make_family
from glbandit.linalg import InverseTracker
from glbandit.policies import GlbOmdPolicy, GlmUcbPolicy, make_policy

LOGISTIC = make_family("logistic")
GAUSSIAN = make_family("gaussian")


def omd_policy(family=LOGISTIC, d=2, S=1.0, **kw):
    return GlbOmdPolicy(family, d, S=S, delta=0.1, lambda_mode="practical", **kw)


class TestGlbOmdSelect:
    def test_bonus_breaks_payoff_tie(self):
        policy = omd_policy()
        policy.current_radius = lambda: 1.0
        idx, score = policy.select([(1.0, 0.0), (0.5, 0.0)])
        assert idx == 0

    def test_pure_exploitation_when_greedy(self):
        policy = omd_policy(greedy=True)
        policy.state.theta = np.array([1.0, 0.0])
        idx, score = policy.select([(1.0, 0.0), (0.0, 1.0)])
        assert idx == 0
        assert score == pytest.approx(1.0)
        assert policy.current_radius() == 0.0

    def test_hand_computed_scores(self):
        policy = omd_policy()
        policy.state.theta = np.array([1.0, 0.0])
        policy.state.tracker = InverseTracker(np.linalg.inv(np.diag([0.04, 1.0])))
        policy.current_radius = lambda: 2.0
        # scores: 1 + 2*0.2 = 1.4 vs 0 + 2*1 = 2.0
        idx, score = policy.select([(1.0, 0.0), (0.0, 1.0)])
        assert idx == 1
        assert score == pytest.approx(2.0, rel=1e-9)

    def test_ties_break_to_lowest_index(self):
        policy = omd_policy(greedy=True)
        policy.state.theta = np.array([0.0, 0.0])
        idx, _ = policy.select([(0.0, 1.0), (1.0, 0.0), (0.7, 0.7)])
        assert idx == 0

    def test_contract_violations(self):
        policy = omd_policy()
        with pytest.raises(ContractViolation):
            policy.select([])
        with pytest.raises(ContractViolation):
            policy.select([(1.3, 0.4)])

    def test_scale_invariant_argmax(self):
        rng = np.random.default_rng(41)
        policy = omd_policy()
        policy.state.theta = np.array([0.4, -0.2])
        A = rng.normal(size=(15, 2))
        A /= np.maximum(np.linalg.norm(A, axis=1, keepdims=True), 1.0)
        beta = policy.current_radius()
        quad = np.einsum("ij,jk,ik->i", A, policy.state.H_inv, A)
        scores = A @ policy.state.theta + beta * np.sqrt(quad)
        for c in (0.1, 1.0, 7.3, 1000.0):
            assert np.argmax(c * scores) == np.argmax(scores)

    def test_selected_score_matches_ellipsoid_maximum(self):
        # closed-form arm score vs a dense sample of the confidence ellipsoid
        rng = np.random.default_rng(42)
        for _ in range(100):
            A = rng.normal(size=(2, 2))
            H = rng.uniform(0.5, 2.0) * np.eye(2) + A @ A.T
            center = rng.normal(size=2) * 0.3
            beta = float(rng.uniform(0.1, 2.0))
            x = rng.normal(size=2)
            x /= np.linalg.norm(x) * rng.uniform(1.0, 3.0)

            H_inv = np.linalg.inv(H)
            closed = float(x @ center) + beta * math.sqrt(float(x @ H_inv @ x))

            # dense boundary sample: theta = center + beta * H^{-1/2} u(phi)
            evals, Q = np.linalg.eigh(H)
            H_inv_sqrt = Q @ np.diag(evals**-0.5) @ Q.T
            phi = np.linspace(0, 2 * np.pi, 200_001)
            U = np.column_stack([np.cos(phi), np.sin(phi)])
            thetas = center + beta * U @ H_inv_sqrt.T
            sampled = float(np.max(thetas @ x))
            assert sampled <= closed + 1e-9
            assert closed - sampled <= 1e-6


class TestGlbOmdObserve:
    def test_zero_gradient_observation(self):
        policy = omd_policy()
        policy.state.theta = np.array([0.3, 0.1])
        x = np.array([0.8, 0.1])
        H_before = policy.state.H.copy()
        policy.observe(x, LOGISTIC.mu(float(x @ policy.state.theta)))
        np.testing.assert_allclose(policy.state.theta, [0.3, 0.1], atol=1e-12)
        assert np.max(np.abs(policy.state.H - H_before)) > 0

    def test_replayed_history_reconstructs_matrix(self):
        rng = np.random.default_rng(43)
        policy = omd_policy()
        log = []
        for _ in range(100):
            x = rng.normal(size=2)
            x /= max(np.linalg.norm(x), 1.0)
            r = float(rng.integers(0, 2))
            policy.observe(x, r)
            log.append((x, policy.state.theta.copy()))
        H = policy.params.lam * np.eye(2)
        for x, theta_next in log:
            H += LOGISTIC.mu_prime(float(x @ theta_next)) * np.outer(x, x)
        np.testing.assert_allclose(policy.state.H, H, atol=1e-8)


class TestGlmUcb:
    def test_first_observation_triggers_fit(self):
        policy = GlmUcbPolicy(LOGISTIC, 2, S=1.0)
        policy.observe(np.array([1.0, 0.0]), 1.0)
        assert len(policy.mle) == 1
        assert np.linalg.norm(policy.mle.theta_hat) > 0  # moved off the origin

    def test_score_zero_arm(self):
        policy = GlmUcbPolicy(LOGISTIC, 2, S=1.0)
        assert policy.glm_ucb_score(np.zeros(2), t=5) == pytest.approx(0.5)

    def test_zero_radius_scale_is_greedy(self):
        policy = GlmUcbPolicy(LOGISTIC, 2, S=1.0, radius_scale=0.0)
        policy.mle.theta_hat = np.array([1.0, 0.0])
        x = np.array([0.6, 0.0])
        assert policy.glm_ucb_score(x, t=10) == pytest.approx(LOGISTIC.mu(0.6))

    def test_hand_computed_gaussian_score(self):
        # kappa=1, d=2, ln(1+t)=1, V=I, theta_hat=0: score = sqrt(2)
        policy = GlmUcbPolicy(GAUSSIAN, 2, S=1.0, lam=1.0)
        policy.V = InverseTracker(np.eye(2))
        got = policy.glm_ucb_score(np.array([1.0, 0.0]), t=math.e - 1.0)
        assert got == pytest.approx(1.4142135623730951, rel=1e-12)

    def test_design_matrix_floor(self):
        rng = np.random.default_rng(44)
        policy = GlmUcbPolicy(LOGISTIC, 2, S=1.0, lam=2.0)
        for _ in range(60):
            x = rng.normal(size=2)
            x /= max(np.linalg.norm(x), 1.0)
            policy.observe(x, float(rng.integers(0, 2)))
        assert np.linalg.eigvalsh(policy.V.matrix).min() >= 2.0 - 1e-9

    def test_fit_stays_stationary_under_warm_schedule(self):
        rng = np.random.default_rng(45)
        policy = GlmUcbPolicy(LOGISTIC, 2, S=1.0, refit_every=10)
        for _ in range(35):
            x = rng.normal(size=2)
            x /= max(np.linalg.norm(x), 1.0)
            policy.observe(x, float(rng.integers(0, 2)))
        X = np.asarray(policy.mle.actions)
        r = np.asarray(policy.mle.rewards)
        th = policy.mle.theta_hat
        grad = X.T @ (LOGISTIC.mu(X @ th) - r) + 2 * policy.mle.lam * th
        from glbandit.linalg import l2_project

        pg = th - l2_project(th - grad, 1.0)
        assert np.linalg.norm(pg) <= 1e-8


class TestFactoryAndDeterminism:
    def test_make_policy_names(self):
        assert make_policy("glb-omd", LOGISTIC, 2, 1.0).name == "glb-omd"
        assert make_policy("greedy", LOGISTIC, 2, 1.0).name == "greedy"
        assert make_policy("glm-ucb", LOGISTIC, 2, 1.0).name == "glm-ucb"
        with pytest.raises(ConfigError):
            make_policy("gloc", LOGISTIC, 2, 1.0)

    @pytest.mark.parametrize("name", ["glb-omd", "glm-ucb", "greedy"])
    def test_identical_streams_identical_choices(self, name):
        def run(seed):
            rng = np.random.default_rng(seed)
            policy = make_policy(name, LOGISTIC, 2, 1.0)
            picks = []
            for _ in range(40):
                A = rng.normal(size=(5, 2))
                A /= np.maximum(np.linalg.norm(A, axis=1, keepdims=True), 1.0)
                idx, _ = policy.select(A)
                picks.append(idx)
                policy.observe(A[idx], float(rng.integers(0, 2)))
            return picks

        assert run(7) == run(7)

    def test_theory_mode_params_flow_through(self):
        policy = GlbOmdPolicy(LOGISTIC, 2, S=1.0, delta=0.5, lambda_mode="theory")
        assert policy.params.lam == pytest.approx(56.0)
        assert policy.params.eta == 2.0
        expected = configure_params(LOGISTIC, 2, 1.0, 0.5, "theory")
        assert policy.params == expected
