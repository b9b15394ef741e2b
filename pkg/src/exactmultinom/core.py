"""Domain types shared across the package.

Samples, probability vectors, parameter functions (``PsiSpec``), inference
configuration and results. All types are immutable value objects.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

SUM_TOL = 1e-12


class ExactMultinomError(ValueError):
    """Base class for input and configuration errors raised by the package."""


class DegenerateSampleError(ExactMultinomError):
    pass


class ShapeError(ExactMultinomError):
    pass


class DomainError(ExactMultinomError):
    pass


class ConfigError(ExactMultinomError):
    pass


class Direction(str, enum.Enum):
    """Direction of the one-sided null hypothesis.

    ``LOWER`` tests H0: psi <= psi0 and produces lower confidence limits,
    ``UPPER`` tests H0: psi >= psi0 and produces upper confidence limits.
    """

    LOWER = "lower"
    UPPER = "upper"


@dataclass(frozen=True)
class MultinomialSample:
    """Observed cell counts for one multinomial sample."""

    counts: tuple

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if any(c != c0 for c, c0 in zip(counts, self.counts)):
            raise ShapeError(f"counts must be integers, got {self.counts!r}")
        if len(counts) < 2:
            raise ShapeError(f"a sample needs at least 2 categories, got {len(counts)}")
        if any(c < 0 for c in counts):
            raise ShapeError(f"counts must be non-negative, got {counts}")
        object.__setattr__(self, "counts", counts)

    @property
    def n(self) -> int:
        return sum(self.counts)

    @property
    def d(self) -> int:
        return len(self.counts)


@dataclass(frozen=True)
class Dataset:
    """An ordered collection of k independent multinomial samples."""

    samples: tuple

    def __post_init__(self):
        samples = tuple(
            s if isinstance(s, MultinomialSample) else MultinomialSample(tuple(s))
            for s in self.samples
        )
        if not samples:
            raise ShapeError("a dataset needs at least one sample")
        if sum(s.n for s in samples) <= 0:
            raise DegenerateSampleError("total sample size must be positive")
        object.__setattr__(self, "samples", samples)

    @classmethod
    def from_counts(cls, counts: Sequence[Sequence[int]]) -> "Dataset":
        return cls(tuple(MultinomialSample(tuple(c)) for c in counts))

    @property
    def k(self) -> int:
        return len(self.samples)

    @property
    def n(self) -> int:
        return sum(s.n for s in self.samples)

    @property
    def dims(self) -> tuple:
        return tuple(s.d for s in self.samples)

    @property
    def shape(self) -> tuple:
        """Tuple of ``(n_j, d_j)`` pairs, the only thing the sample space depends on."""
        return tuple((s.n, s.d) for s in self.samples)

    @property
    def counts(self) -> np.ndarray:
        """Concatenated count vector."""
        return np.concatenate([np.asarray(s.counts, dtype=np.int64) for s in self.samples])


@dataclass(frozen=True, eq=False)
class ProbabilityVector:
    """Concatenated probability blocks, one block per sample.

    Parameters
    ----------
    probs : array_like
        Flat vector theta_1, ..., theta_k.
    dims : tuple of int
        Block lengths d_1, ..., d_k.
    """

    probs: np.ndarray
    dims: tuple

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float).ravel()
        dims = tuple(int(d) for d in self.dims)
        if probs.size != sum(dims):
            raise ShapeError(f"expected {sum(dims)} probabilities for blocks {dims}, got {probs.size}")
        if np.any(probs < 0) or np.any(probs > 1) or not np.all(np.isfinite(probs)):
            raise DomainError("probabilities must lie in [0, 1]")
        for j, block in enumerate(np.split(probs, np.cumsum(dims)[:-1])):
            if abs(block.sum() - 1.0) > SUM_TOL * max(1, len(block)):
                raise DomainError(f"block {j} sums to {block.sum()!r}, not 1")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "dims", dims)

    def blocks(self) -> list:
        return np.split(self.probs, np.cumsum(self.dims)[:-1])

    def __array__(self, dtype=None, copy=None):
        return self.probs if dtype is None else self.probs.astype(dtype)

    def __len__(self):
        return self.probs.size

    def __eq__(self, other):
        if not isinstance(other, ProbabilityVector):
            return NotImplemented
        return self.dims == other.dims and np.array_equal(self.probs, other.probs)

    def tolist(self) -> list:
        return self.probs.tolist()


def theta_hat(data: Dataset) -> ProbabilityVector:
    """Sample proportions, block j equal to ``counts_j / n_j``."""
    blocks = []
    for j, s in enumerate(data.samples):
        if s.n == 0:
            raise DegenerateSampleError(f"sample {j} has no trials")
        blocks.append(np.asarray(s.counts, dtype=float) / s.n)
    return ProbabilityVector(np.concatenate(blocks), data.dims)


@dataclass(frozen=True, eq=False)
class PsiSpec:
    """A real-valued function of the concatenated probability vector.

    Parameters
    ----------
    evaluate : callable
        Maps a flat probability vector to a float. Must be pure and total on
        the closed product simplex (zero cells included).
    psi_limits : (float, float)
        Range of the function, used as the search bracket for confidence limits.
    name : str
    evaluate_many : callable, optional
        Vectorised variant taking an ``(m, D)`` array and returning ``(m,)``.
        Falls back to a row loop over ``evaluate``.
    """

    evaluate: Callable[[np.ndarray], float]
    psi_limits: tuple
    name: str = "psi"
    evaluate_many: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        lo, hi = (float(v) for v in self.psi_limits)
        if math.isnan(lo) or math.isnan(hi) or not lo < hi:
            raise ConfigError(f"psi_limits must satisfy lower < upper, got {self.psi_limits!r}")
        object.__setattr__(self, "psi_limits", (lo, hi))

    def __call__(self, theta) -> float:
        return float(self.evaluate(np.asarray(theta, dtype=float)))

    def many(self, thetas: np.ndarray) -> np.ndarray:
        thetas = np.asarray(thetas, dtype=float)
        if self.evaluate_many is not None:
            return np.asarray(self.evaluate_many(thetas), dtype=float).reshape(len(thetas))
        return np.fromiter((self.evaluate(row) for row in thetas), dtype=float, count=len(thetas))

    def with_limits(self, psi_limits) -> "PsiSpec":
        return PsiSpec(self.evaluate, tuple(psi_limits), self.name, self.evaluate_many)


@dataclass(frozen=True)
class InferenceConfig:
    """Settings for p-value and confidence interval computation.

    ``early_stop_threshold=None`` means the default ``alpha/2 + 0.001``; pass
    ``math.inf`` to disable early termination.
    """

    alpha: float = 0.05
    psi0: Optional[float] = None
    direction: Direction = Direction.LOWER
    maxit: int = 50
    chunksize: int = 50
    early_stop_threshold: Optional[float] = None
    seed: int = 0
    conf_int: bool = True
    workers: int = 1

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if int(self.maxit) < 1 or int(self.chunksize) < 1:
            raise ConfigError("maxit and chunksize must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if int(self.workers) < 1:
            raise ConfigError("workers must be positive")
        object.__setattr__(self, "direction", Direction(self.direction))

    @property
    def B(self) -> int:
        return int(self.maxit) * int(self.chunksize)

    @property
    def threshold(self) -> float:
        if self.early_stop_threshold is None:
            return self.alpha / 2 + 0.001
        return float(self.early_stop_threshold)


@dataclass(frozen=True)
class PValueDiagnostics:
    trace: tuple
    argmax_theta: Optional[ProbabilityVector]
    iterations_used: int
    accepted: int
    early_stopped: bool

    @property
    def null_hit(self) -> bool:
        """False when no sampled candidate fell in the null region."""
        return self.accepted > 0


@dataclass(frozen=True)
class InferenceResult:
    """Output of :func:`exactmultinom.infer`.

    ``trace``, ``argmax_theta`` and ``iterations_used`` describe the p-value
    computation and are empty when no ``psi0`` was given.
    """

    estimate: float
    conf_int: Optional[tuple] = None
    p_value: Optional[float] = None
    trace: tuple = ()
    argmax_theta: Optional[ProbabilityVector] = None
    iterations_used: int = 0
    null_hit: bool = True
    early_stopped: bool = False
