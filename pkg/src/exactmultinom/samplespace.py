"""Enumeration of multinomial sample spaces.

Per-sample spaces are enumerated recursively and cached by ``(n, d)``. The
joint space over k samples is the Cartesian product of the per-sample spaces
in row-major order, stored as flat arrays rather than as a list of objects.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .core import Direction, ExactMultinomError, PsiSpec, ShapeError

TIE_TOL = 1e-9
DEFAULT_CAP = 50_000_000
_PSI_BLOCK = 1 << 16


class SpaceTooLargeError(ExactMultinomError):
    pass


def enumerate_counts(n: int, d: int) -> tuple:
    """All non-negative integer vectors of length `d` summing to `n`.

    Order follows the recursion: first cell ascending, the rest recursively.

    >>> enumerate_counts(2, 2)
    ((0, 2), (1, 1), (2, 0))
    """
    if d < 2:
        raise ShapeError(f"number of categories must be at least 2, got {d}")
    if n < 0:
        raise ShapeError(f"number of trials must be non-negative, got {n}")
    return _enumerate_counts(int(n), int(d))


@lru_cache(maxsize=None)
def _enumerate_counts(n, d):
    if d == 2:
        return tuple((i, n - i) for i in range(n + 1))
    return tuple((i,) + s for i in range(n + 1) for s in _enumerate_counts(n - i, d - 1))


def log_multinomial_coef(counts) -> float:
    """``log(n! / prod(t_i!))`` via log-gamma."""
    counts = np.asarray(counts, dtype=float)
    return float(gammaln(counts.sum() + 1) - gammaln(counts + 1).sum())


@dataclass(frozen=True, eq=False)
class SampleSpace:
    """Sample space of a single Multinomial(n, d) as arrays."""

    n: int
    d: int
    counts: np.ndarray  # (s, d) int
    log_coef: np.ndarray  # (s,)

    def __len__(self):
        return len(self.counts)


_space_lock = threading.Lock()
_space_cache: dict = {}


def sample_space(n: int, d: int) -> SampleSpace:
    key = (int(n), int(d))
    space = _space_cache.get(key)
    if space is not None:
        return space
    counts = np.array(enumerate_counts(n, d), dtype=np.int64).reshape(-1, d)
    log_coef = gammaln(n + 1) - gammaln(counts + 1).sum(axis=1)
    counts.setflags(write=False)
    log_coef.setflags(write=False)
    space = SampleSpace(key[0], key[1], counts, log_coef)
    with _space_lock:
        return _space_cache.setdefault(key, space)


def clear_cache():
    """Drop cached per-sample and joint spaces (used by benchmarks)."""
    with _space_lock:
        _space_cache.clear()
    _enumerate_counts.cache_clear()
    _joint_cached.cache_clear()


def space_size(n: int, d: int) -> int:
    return math.comb(n + d - 1, d - 1)


@dataclass(frozen=True)
class JointOutcome:
    """One joint outcome t = (t_1, ..., t_k)."""

    counts: tuple
    log_coef: float
    psi_hat: float


class JointSpace:
    """Joint sample space of k independent multinomials.

    Outcome ``i`` corresponds to the per-sample indices
    ``np.unravel_index(i, self.sizes)``.
    """

    def __init__(self, shape, psi: PsiSpec):
        self.shape = tuple((int(n), int(d)) for n, d in shape)
        self.psi = psi
        self.spaces = tuple(sample_space(n, d) for n, d in self.shape)
        self.sizes = tuple(len(s) for s in self.spaces)
        self.dims = tuple(d for _, d in self.shape)
        self.size = math.prod(self.sizes)
        log_coef = np.zeros(self.sizes)
        for j, space in enumerate(self.spaces):
            view = [1] * len(self.sizes)
            view[j] = -1
            log_coef = log_coef + space.log_coef.reshape(view)
        self.log_coef = log_coef.ravel()
        self.psi_hat = self._psi_hat()
        self.log_coef.setflags(write=False)
        self.psi_hat.setflags(write=False)

    def _psi_hat(self):
        out = np.empty(self.size)
        props = [s.counts / s.n for s in self.spaces]
        for start in range(0, self.size, _PSI_BLOCK):
            stop = min(start + _PSI_BLOCK, self.size)
            idx = np.unravel_index(np.arange(start, stop), self.sizes)
            thetas = np.concatenate([p[i] for p, i in zip(props, idx)], axis=1)
            out[start:stop] = self.psi.many(thetas)
        if not np.all(np.isfinite(out)):
            raise ExactMultinomError(f"psi {self.psi.name!r} returned non-finite values on the sample space")
        return out

    def __len__(self):
        return self.size

    def counts(self, i: int) -> tuple:
        idx = np.unravel_index(i, self.sizes)
        return tuple(int(c) for s, j in zip(self.spaces, idx) for c in s.counts[j])

    def index_of(self, counts) -> int:
        """Flat index of a concatenated count vector."""
        counts = np.asarray(counts, dtype=np.int64).ravel()
        parts = np.split(counts, np.cumsum(self.dims)[:-1])
        idx = []
        for space, part in zip(self.spaces, parts):
            hits = np.flatnonzero((space.counts == part).all(axis=1))
            if hits.size != 1 or part.sum() != space.n:
                raise ShapeError(f"counts {part.tolist()} are not in the sample space of Multinomial({space.n}, {space.d})")
            idx.append(int(hits[0]))
        return int(np.ravel_multi_index(idx, self.sizes))

    def outcome(self, i: int) -> JointOutcome:
        return JointOutcome(self.counts(i), float(self.log_coef[i]), float(self.psi_hat[i]))

    def __iter__(self):
        for i in range(self.size):
            yield self.outcome(i)


def joint_size(shape) -> int:
    return math.prod(space_size(n, d) for n, d in shape)


def enumerate_joint(shape, psi: PsiSpec, cap: int = DEFAULT_CAP) -> JointSpace:
    """Enumerate the joint sample space with log coefficients and ``psi_hat``.

    Parameters
    ----------
    shape : sequence of (n_j, d_j)
    psi : PsiSpec
    cap : int
        Maximum allowed number of joint outcomes.

    Raises
    ------
    SpaceTooLargeError
        If the projected cardinality exceeds `cap`.
    """
    shape = tuple((int(n), int(d)) for n, d in shape)
    if not shape:
        raise ShapeError("shape must contain at least one sample")
    for n, d in shape:
        if n < 1:
            raise ShapeError(f"every sample needs n_j >= 1, got {n}")
        if d < 2:
            raise ShapeError(f"every sample needs d_j >= 2, got {d}")
    size = joint_size(shape)
    if size > cap:
        raise SpaceTooLargeError(f"joint sample space has {size} outcomes, above the cap of {cap}")
    return _joint_cached(shape, psi)


@lru_cache(maxsize=16)
def _joint_cached(shape, psi):
    return JointSpace(shape, psi)


class SubSampleSpace:
    """Outcomes at least as extreme as the observed one.

    ``direction='geq'`` keeps ``psi_hat >= threshold_psi - TIE_TOL``,
    ``'leq'`` keeps ``psi_hat <= threshold_psi + TIE_TOL``.
    """

    def __init__(self, space: JointSpace, mask: np.ndarray, direction: str, threshold_psi: float):
        self.space = space
        self.mask = mask
        self.direction = direction
        self.threshold_psi = threshold_psi
        self.indices = np.flatnonzero(mask)

    def __len__(self):
        return self.indices.size

    @property
    def outcomes(self) -> list:
        return [self.space.outcome(i) for i in self.indices]

    def __contains__(self, counts) -> bool:
        return bool(self.mask[self.space.index_of(counts)])


def _subspace_direction(direction) -> str:
    if isinstance(direction, Direction) or direction in ("lower", "upper"):
        return "geq" if Direction(direction) is Direction.LOWER else "leq"
    if direction not in ("geq", "leq"):
        raise ValueError(f"direction must be 'geq' or 'leq', got {direction!r}")
    return direction


def select_subspace(space: JointSpace, observed_psi: float, direction) -> SubSampleSpace:
    """Select the sub-sample space relative to `observed_psi`.

    `direction` is ``'geq'``/``'leq'``, or a :class:`Direction` (lower maps to
    ``geq``, upper to ``leq``).
    """
    direction = _subspace_direction(direction)
    if direction == "geq":
        mask = space.psi_hat >= observed_psi - TIE_TOL
    else:
        mask = space.psi_hat <= observed_psi + TIE_TOL
    if not mask.any():
        raise RuntimeError(f"empty sub-sample space for observed psi {observed_psi!r}; the observed outcome must qualify")
    return SubSampleSpace(space, mask, direction, float(observed_psi))
