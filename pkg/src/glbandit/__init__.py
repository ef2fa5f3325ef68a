"""Generalized linear bandits with a one-pass mirror-descent estimator."""

__version__ = "0.1.0"

from .env import BanditEnv, RunRecord, load_arm_file, run_trial, save_arm_file
from .errors import (
    ArmFileError,
    ConfigError,
    ContractViolation,
    DomainError,
    GlbError,
    NumericError,
)
from .estimators import (
    ConfidenceSet,
    MleState,
    OmdParams,
    OmdState,
    beta_radius,
    configure_params,
    confidence_set,
    contains,
    mle_fit,
    new_omd_state,
    omd_update,
)
from .glm import (
    FamilyBounds,
    GaussianFamily,
    GlmFamily,
    LogisticFamily,
    PoissonFamily,
    family_bounds,
    make_family,
    nll_loss,
    validate_family,
)
from .linalg import (
    InverseTracker,
    ball_project_hnorm,
    l2_project,
    sherman_morrison,
    symmetrize,
    weighted_norm,
)
from .policies import GlbOmdPolicy, GlmUcbPolicy, Policy, make_policy

__all__ = [
    "__version__",
    "BanditEnv", "RunRecord", "load_arm_file", "run_trial", "save_arm_file",
    "ArmFileError", "ConfigError", "ContractViolation", "DomainError",
    "GlbError", "NumericError",
    "ConfidenceSet", "MleState", "OmdParams", "OmdState", "beta_radius",
    "configure_params", "confidence_set", "contains", "mle_fit",
    "new_omd_state", "omd_update",
    "FamilyBounds", "GaussianFamily", "GlmFamily", "LogisticFamily",
    "PoissonFamily", "family_bounds", "make_family", "nll_loss",
    "validate_family",
    "InverseTracker", "ball_project_hnorm", "l2_project", "sherman_morrison",
    "symmetrize", "weighted_norm",
    "GlbOmdPolicy", "GlmUcbPolicy", "Policy", "make_policy",
]
