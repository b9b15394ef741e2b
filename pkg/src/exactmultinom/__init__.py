"""Exact p-values and confidence intervals for functions of multinomial parameters."""
from .bootstrap import BootstrapConfig, bootstrap_ci
from .core import (
    ConfigError,
    Dataset,
    DegenerateSampleError,
    Direction,
    DomainError,
    ExactMultinomError,
    InferenceConfig,
    InferenceResult,
    MultinomialSample,
    ProbabilityVector,
    PsiSpec,
    ShapeError,
    theta_hat,
)
from .engine import (
    CandidatePool,
    PValueFunction,
    confidence_interval,
    infer,
    log_pmf,
    p_value,
    sample_simplex,
    tail_prob,
)
from .itp import BracketError, itp_bracket, itp_root
from .psi import (
    REGISTRY,
    UnknownPsiError,
    bhattacharyya,
    causal_lower_bound,
    causal_upper_bound,
    cell_probability,
    euclidean_to_ref,
    registry_lookup,
)
from .samplespace import (
    JointOutcome,
    SpaceTooLargeError,
    SubSampleSpace,
    enumerate_counts,
    enumerate_joint,
    log_multinomial_coef,
    select_subspace,
)

__version__ = "0.1.0"
