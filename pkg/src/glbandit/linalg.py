"""Small dense SPD utilities: rank-one inverse maintenance and ball projection.

Matrices are plain float ndarrays kept symmetric by re-symmetrizing after
every update; positive definiteness comes from the construction-time
regularizer plus PSD rank-one additions.
"""

import numpy as np

from .errors import ContractViolation, NumericError

__all__ = [
    "symmetrize",
    "weighted_norm",
    "sherman_morrison",
    "InverseTracker",
    "ball_project_hnorm",
    "l2_project",
]

# fresh factorization cadence for tracked inverses; bounds float drift
DEFAULT_REFRESH_EVERY = 512


def symmetrize(M):
    return 0.5 * (M + M.T)


def weighted_norm(v, M):
    """sqrt(v^T M v) for symmetric PSD M; tiny negative rounding is clamped."""
    M = np.asarray(M, dtype=float)
    if np.max(np.abs(M - M.T)) > 1e-8:
        raise ContractViolation("matrix must be symmetric")
    v = np.asarray(v, dtype=float)
    return float(np.sqrt(max(v @ M @ v, 0.0)))


def sherman_morrison(inv, v, c):
    """Inverse of (A + c * v v^T) given inv = A^{-1}, in O(d^2)."""
    w = inv @ v
    denom = 1.0 / c + v @ w
    return symmetrize(inv - np.outer(w, w) / denom)


def l2_project(v, S):
    """Euclidean projection of v onto the ball of radius S."""
    n = float(np.linalg.norm(v))
    if n <= S:
        return np.array(v, dtype=float)
    return np.asarray(v, dtype=float) * (S / n)


class InverseTracker:
    """An SPD matrix together with its inverse, maintained under rank-one updates.

    The inverse follows each update in O(d^2); every ``refresh_every``
    updates it is recomputed from a fresh dense inversion so that float
    drift stays bounded over long runs.
    """

    def __init__(self, matrix, refresh_every=DEFAULT_REFRESH_EVERY):
        matrix = symmetrize(np.array(matrix, dtype=float))
        self.matrix = matrix
        self.inverse = symmetrize(np.linalg.inv(matrix))
        self.update_count = 0
        self.refresh_every = int(refresh_every)

    @classmethod
    def regularized_identity(cls, d, lam, refresh_every=DEFAULT_REFRESH_EVERY):
        """Start from lam * I with its trivially known inverse."""
        if not lam > 0:
            raise ContractViolation(f"regularizer must be positive, got {lam}")
        tracker = cls.__new__(cls)
        tracker.matrix = lam * np.eye(d)
        tracker.inverse = np.eye(d) / lam
        tracker.update_count = 0
        tracker.refresh_every = int(refresh_every)
        return tracker

    @property
    def dim(self):
        return self.matrix.shape[0]

    def rank1_update(self, v, c):
        """Add c * v v^T (c > 0) to the matrix and track the inverse."""
        if not c > 0:
            raise ContractViolation(f"rank-one coefficient must be positive, got {c}")
        v = np.asarray(v, dtype=float)
        if not np.isfinite(v).all():
            raise ContractViolation("non-finite entry in update vector")
        self.matrix = symmetrize(self.matrix + c * np.outer(v, v))
        self.update_count += 1
        if self.update_count % self.refresh_every == 0:
            self.inverse = symmetrize(np.linalg.inv(self.matrix))
        else:
            self.inverse = sherman_morrison(self.inverse, v, c)
        return self

    def refresh(self):
        """Force a fresh dense inversion."""
        self.inverse = symmetrize(np.linalg.inv(self.matrix))
        return self

    def copy(self):
        out = InverseTracker.__new__(InverseTracker)
        out.matrix = self.matrix.copy()
        out.inverse = self.inverse.copy()
        out.update_count = self.update_count
        out.refresh_every = self.refresh_every
        return out


def ball_project_hnorm(zeta, H, S, norm_tol=1e-10, max_iter=300):
    """Minimize ||theta - zeta||_H^2 over the Euclidean ball of radius S.

    Interior points are returned unchanged.  Otherwise the minimizer has the
    form theta(nu) = (H + nu I)^{-1} H zeta for the unique nu >= 0 at which
    ||theta(nu)||_2 = S; since the norm is strictly decreasing in nu, nu is
    found by growing an upper bracket geometrically and bisecting.  Uses one
    eigendecomposition of H, so the cost is O(d^3).
    """
    zeta = np.asarray(zeta, dtype=float)
    S = float(S)
    if float(np.linalg.norm(zeta)) <= S:
        return zeta.copy()

    evals, Q = np.linalg.eigh(symmetrize(np.asarray(H, dtype=float)))
    if evals[0] <= 0:
        raise NumericError(f"matrix not positive definite (min eigenvalue {evals[0]:g})")

    # coordinates of H zeta in the eigenbasis; ||theta(nu)||^2 = sum (b/(evals+nu))^2
    b = evals * (Q.T @ zeta)

    def norm_at(nu):
        return float(np.linalg.norm(b / (evals + nu)))

    lo = 0.0
    hi = max(1.0, float(evals[-1]))
    grow = 0
    while norm_at(hi) >= S:
        hi *= 2.0
        grow += 1
        if grow > 200:
            raise NumericError("failed to bracket the projection multiplier")

    nu = 0.5 * (lo + hi)
    for _ in range(max_iter):
        nu = 0.5 * (lo + hi)
        n = norm_at(nu)
        if n > S:
            lo = nu
        else:
            hi = nu
        if abs(n - S) <= norm_tol and (hi - lo) <= 1e-12 * (1.0 + nu):
            break

    return Q @ (b / (evals + nu))
