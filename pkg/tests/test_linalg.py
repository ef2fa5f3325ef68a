"""Matrix-utility tests: weighted norms, tracked inverses, ball projection."""

import numpy as np
import pytest

from glbandit.errors import ContractViolation, NumericError
from glbandit.linalg import (
    InverseTracker,
    ball_project_hnorm,
    l2_project,
    sherman_morrison,
    weighted_norm,
)


def random_spd(rng, d, floor=0.5):
    A = rng.normal(size=(d, d))
    return floor * np.eye(d) + A @ A.T


class TestWeightedNorm:
    def test_identity(self):
        assert weighted_norm(np.array([3.0, 4.0]), np.eye(2)) == 5.0

    def test_zero_vector(self):
        assert weighted_norm(np.zeros(3), np.eye(3)) == 0.0

    def test_diagonal(self):
        # (1,1) under diag(4,9): sqrt(4 + 9) = sqrt(13)
        got = weighted_norm(np.array([1.0, 1.0]), np.diag([4.0, 9.0]))
        assert got == pytest.approx(3.605551275463989, rel=1e-14)

    def test_asymmetric_rejected(self):
        M = np.array([[1.0, 0.5], [0.0, 1.0]])
        with pytest.raises(ContractViolation):
            weighted_norm(np.ones(2), M)

    def test_negative_rounding_clamped(self):
        # PSD matrix with a null direction: exact zero may round negative
        M = np.outer([1.0, -1.0], [1.0, -1.0])
        assert weighted_norm(np.array([1.0, 1.0]), M) == 0.0

    def test_cauchy_schwarz(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            d = int(rng.integers(1, 6))
            M = random_spd(rng, d)
            v, w = rng.normal(size=d), rng.normal(size=d)
            lhs = weighted_norm(v, M) ** 2 + weighted_norm(w, M) ** 2
            assert lhs >= 2 * abs(v @ M @ w) - 1e-9


class TestShermanMorrison:
    def test_identity_rank1(self):
        inv = sherman_morrison(np.eye(2), np.array([1.0, 0.0]), 1.0)
        np.testing.assert_allclose(inv, np.diag([0.5, 1.0]), atol=1e-15)

    def test_zero_vector_noop(self):
        inv = sherman_morrison(np.eye(3), np.zeros(3), 1.0)
        np.testing.assert_allclose(inv, np.eye(3), atol=0)

    def test_matches_dense_inverse(self):
        rng = np.random.default_rng(12)
        for _ in range(50):
            d = int(rng.integers(1, 7))
            A = random_spd(rng, d)
            v = rng.normal(size=d)
            c = float(rng.uniform(0.01, 2.0))
            got = sherman_morrison(np.linalg.inv(A), v, c)
            np.testing.assert_allclose(got, np.linalg.inv(A + c * np.outer(v, v)),
                                       atol=1e-9)


class TestInverseTracker:
    def test_contract_errors(self):
        tr = InverseTracker.regularized_identity(3, 1.0)
        with pytest.raises(ContractViolation):
            tr.rank1_update(np.ones(3), 0.0)
        with pytest.raises(ContractViolation):
            tr.rank1_update(np.ones(3), -1.0)
        with pytest.raises(ContractViolation):
            tr.rank1_update(np.array([1.0, np.nan, 0.0]), 1.0)
        with pytest.raises(ContractViolation):
            InverseTracker.regularized_identity(3, 0.0)

    def test_tracks_inverse(self):
        rng = np.random.default_rng(13)
        tr = InverseTracker.regularized_identity(5, 2.0)
        for _ in range(1500):
            v = rng.normal(size=5)
            v /= max(np.linalg.norm(v), 1.0)
            tr.rank1_update(v, float(rng.uniform(0.01, 1.0)))
        assert np.max(np.abs(tr.matrix @ tr.inverse - np.eye(5))) <= 1e-6
        np.testing.assert_allclose(tr.inverse, np.linalg.inv(tr.matrix), atol=1e-6)
        assert tr.update_count == 1500

    def test_symmetry_maintained(self):
        rng = np.random.default_rng(14)
        tr = InverseTracker.regularized_identity(4, 1.0)
        for _ in range(300):
            tr.rank1_update(rng.normal(size=4), float(rng.uniform(0.1, 1.0)))
        assert np.max(np.abs(tr.matrix - tr.matrix.T)) <= 1e-10
        assert np.max(np.abs(tr.inverse - tr.inverse.T)) <= 1e-10

    def test_refresh_bounds_drift(self):
        # long chain with the periodic re-factorization left at its default
        rng = np.random.default_rng(15)
        tr = InverseTracker.regularized_identity(3, 1.0)
        for _ in range(2000):
            tr.rank1_update(rng.normal(size=3) * 0.5, 0.5)
        assert np.max(np.abs(tr.inverse - np.linalg.inv(tr.matrix))) <= 1e-8

    def test_copy_is_independent(self):
        tr = InverseTracker.regularized_identity(2, 1.0)
        cp = tr.copy()
        tr.rank1_update(np.array([1.0, 0.0]), 1.0)
        np.testing.assert_allclose(cp.matrix, np.eye(2))
        assert cp.update_count == 0


class TestL2Project:
    def test_interior(self):
        v = np.array([0.1, -0.2])
        np.testing.assert_array_equal(l2_project(v, 1.0), v)

    def test_exterior(self):
        got = l2_project(np.array([3.0, 4.0]), 1.0)
        np.testing.assert_allclose(got, [0.6, 0.8], rtol=1e-15)


def polar_grid_oracle(zeta, H, S, samples=2_000_001):
    """Independent 2-d reference: scan the constraint circle at high resolution."""
    phi = np.linspace(0.0, 2 * np.pi, samples)
    P = np.column_stack([S * np.cos(phi), S * np.sin(phi)])
    diff = P - zeta
    vals = np.einsum("ij,jk,ik->i", diff, H, diff)
    return P[np.argmin(vals)]


class TestBallProjectHnorm:
    def test_interior_returned_exactly(self):
        z = np.array([0.3, 0.1])
        for H in (np.eye(2), np.diag([4.0, 1.0])):
            np.testing.assert_array_equal(ball_project_hnorm(z, H, 1.0), z)

    def test_euclidean_case(self):
        got = ball_project_hnorm(np.array([2.0, 0.0]), np.eye(2), 1.0)
        np.testing.assert_allclose(got, [1.0, 0.0], atol=1e-9)

    def test_anisotropic_against_grid_oracle(self):
        zeta = np.array([2.0, 2.0])
        H = np.diag([4.0, 1.0])
        got = ball_project_hnorm(zeta, H, 1.0)
        assert np.linalg.norm(got) == pytest.approx(1.0, abs=1e-9)
        ref = polar_grid_oracle(zeta, H, 1.0)
        np.testing.assert_allclose(got, ref, atol=1e-6)
        # independently computed minimizer (extended-precision root of the
        # stationarity condition on the constraint circle)
        np.testing.assert_allclose(
            got, [0.9333448098382142, 0.3589811498506122], atol=1e-9
        )

    def test_idempotent(self):
        rng = np.random.default_rng(16)
        for _ in range(100):
            d = int(rng.integers(1, 5))
            H = random_spd(rng, d)
            zeta = rng.normal(size=d) * 2.0
            S = float(rng.uniform(0.3, 1.5))
            once = ball_project_hnorm(zeta, H, S)
            twice = ball_project_hnorm(once, H, S)
            np.testing.assert_allclose(twice, once, atol=1e-10)

    def test_beats_random_feasible_points(self):
        rng = np.random.default_rng(17)
        for _ in range(100):
            d = int(rng.integers(1, 5))
            H = random_spd(rng, d)
            zeta = rng.normal(size=d) * rng.uniform(0.5, 3.0)
            S = float(rng.uniform(0.3, 1.5))
            theta = ball_project_hnorm(zeta, H, S)
            U = rng.normal(size=(10_000, d))
            U /= np.linalg.norm(U, axis=1, keepdims=True)
            P = U * (S * rng.random(10_000) ** (1.0 / d))[:, None]
            diff = P - zeta
            objs = np.einsum("ij,jk,ik->i", diff, H, diff)
            own = (theta - zeta) @ H @ (theta - zeta)
            assert own <= objs.min() + 1e-9

    def test_kkt_stationarity(self):
        rng = np.random.default_rng(18)
        for _ in range(100):
            d = int(rng.integers(1, 5))
            H = random_spd(rng, d)
            zeta = rng.normal(size=d) * 3.0
            S = 1.0
            if np.linalg.norm(zeta) <= S:
                continue
            theta = ball_project_hnorm(zeta, H, S)
            resid = H @ (theta - zeta)
            nu = -float(theta @ resid) / float(theta @ theta)
            assert nu >= -1e-8
            kkt = np.linalg.norm(resid + nu * theta)
            assert kkt <= 1e-8 * (1.0 + np.linalg.norm(H @ zeta))

    def test_not_positive_definite_rejected(self):
        with pytest.raises(NumericError):
            ball_project_hnorm(np.array([2.0, 0.0]), np.diag([1.0, 0.0]), 1.0)
        with pytest.raises(NumericError):
            ball_project_hnorm(np.array([2.0, 0.0]), np.diag([1.0, -1.0]), 1.0)
