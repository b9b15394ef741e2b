import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from exactmultinom import (
    ConfigError,
    Dataset,
    DegenerateSampleError,
    DomainError,
    InferenceConfig,
    MultinomialSample,
    ProbabilityVector,
    PsiSpec,
    ShapeError,
    theta_hat,
)


@pytest.mark.parametrize("counts, expected", [
    ([[5, 0]], [1.0, 0.0]),
    ([[2, 2]], [0.5, 0.5]),
    ([[1, 1, 2], [0, 4]], [0.25, 0.25, 0.5, 0.0, 1.0]),
])
def test_theta_hat(counts, expected):
    theta = theta_hat(Dataset.from_counts(counts))
    assert_allclose(theta.probs, expected)
    assert theta.dims == tuple(len(c) for c in counts)
    for block in theta.blocks():
        assert block.sum() == pytest.approx(1.0, abs=1e-12)


def test_theta_hat_degenerate_sample():
    with pytest.raises(DegenerateSampleError):
        theta_hat(Dataset.from_counts([[3, 1], [0, 0]]))


def test_sample_invariants():
    s = MultinomialSample((3, 0, 2))
    assert (s.n, s.d) == (5, 3)
    with pytest.raises(ShapeError):
        MultinomialSample((1,))
    with pytest.raises(ShapeError):
        MultinomialSample((1, -1))
    with pytest.raises(ShapeError):
        MultinomialSample((1.5, 2))


def test_dataset_shape():
    data = Dataset.from_counts([[1, 2, 3], [4, 0]])
    assert data.k == 2
    assert data.n == 10
    assert data.shape == ((6, 3), (4, 2))
    assert data.counts.tolist() == [1, 2, 3, 4, 0]
    with pytest.raises(ShapeError):
        Dataset(())
    with pytest.raises(DegenerateSampleError):
        Dataset.from_counts([[0, 0]])


def test_probability_vector_validation():
    ProbabilityVector([0.2, 0.8, 1.0, 0.0], (2, 2))
    with pytest.raises(DomainError):
        ProbabilityVector([0.2, 0.7], (2,))
    with pytest.raises(DomainError):
        ProbabilityVector([1.2, -0.2], (2,))
    with pytest.raises(ShapeError):
        ProbabilityVector([0.5, 0.5], (3,))


def test_psispec_limits_and_batch_fallback():
    spec = PsiSpec(lambda t: t[0] - t[1], (-1, 1), "diff")
    assert spec([0.7, 0.3]) == pytest.approx(0.4)
    assert_allclose(spec.many(np.array([[0.7, 0.3], [0.1, 0.9]])), [0.4, -0.8])
    with pytest.raises(ConfigError):
        PsiSpec(lambda t: 0.0, (1, 1))


def test_config_defaults():
    cfg = InferenceConfig()
    assert cfg.alpha == 0.05
    assert cfg.B == 2500
    assert cfg.threshold == pytest.approx(0.026)
    assert InferenceConfig(early_stop_threshold=math.inf).threshold == math.inf
    with pytest.raises(ConfigError):
        InferenceConfig(alpha=1.0)
    with pytest.raises(ConfigError):
        InferenceConfig(maxit=0)
    with pytest.raises(ConfigError):
        InferenceConfig(seed=-1)
