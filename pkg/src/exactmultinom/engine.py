"""Monte Carlo supremum p-values and confidence intervals by test inversion.

The p-value for H0: psi(theta) <= psi0 is

    sup over {theta : psi(theta) <= psi0} of P_theta(psi_hat(T') >= psi_hat(T)),

approximated by a maximum over B uniform draws from the product simplex.
Draws are grouped into ``maxit`` chunks of ``chunksize``; each chunk has its
own counter-based seed so a pool is reproducible however it is consumed.
"""
from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.special import xlogy

from .core import (
    ConfigError,
    Direction,
    DomainError,
    InferenceConfig,
    InferenceResult,
    PValueDiagnostics,
    ProbabilityVector,
    PsiSpec,
    ShapeError,
    theta_hat,
)
from .itp import itp_bracket
from .samplespace import DEFAULT_CAP, JointOutcome, SubSampleSpace, enumerate_joint, select_subspace

LIMIT_TOL = 1e-12
_STREAMS = {Direction.LOWER: 1, Direction.UPPER: 2}


def sample_simplex(d: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """`count` uniform draws from the (d-1)-simplex as a ``(count, d)`` array.

    Normalised standard exponentials, i.e. Dirichlet(1, ..., 1).
    """
    if d < 2:
        raise ShapeError(f"simplex dimension must be at least 2, got {d}")
    e = rng.standard_exponential((int(count), int(d)))
    return e / e.sum(axis=1, keepdims=True)


def log_pmf(t: JointOutcome, theta) -> float:
    """Joint log-probability of outcome `t`, with ``0 * log 0 = 0``."""
    counts = np.asarray(t.counts, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if counts.shape != theta.shape:
        raise ShapeError(f"outcome has {counts.size} cells but theta has {theta.size}")
    with np.errstate(divide="ignore"):
        return float(t.log_coef + xlogy(counts, theta).sum())


class TailEvaluator:
    """Sums the joint pmf over a sub-sample space for many theta at once."""

    def __init__(self, subspace: SubSampleSpace):
        self.subspace = subspace
        space = subspace.space
        self.spaces = space.spaces
        self.dims = space.dims
        self.splits = np.cumsum(self.dims)[:-1]
        self.weights = subspace.mask.reshape(space.sizes).astype(float)

    def _block_pmf(self, j, theta_j):
        space = self.spaces[j]
        if np.all(theta_j > 0):
            logp = np.log(theta_j) @ space.counts.T
        else:
            with np.errstate(divide="ignore"):
                logp = xlogy(space.counts[None, :, :], theta_j[:, None, :]).sum(axis=-1)
        return np.exp(logp + space.log_coef)

    def __call__(self, thetas) -> np.ndarray:
        """Tail probabilities for an ``(m, D)`` array of parameter vectors."""
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        if thetas.shape[1] != sum(self.dims):
            raise ShapeError(f"expected parameter vectors of length {sum(self.dims)}, got {thetas.shape[1]}")
        blocks = np.split(thetas, self.splits, axis=1)
        pmfs = [self._block_pmf(j, b) for j, b in enumerate(blocks)]
        acc = self.weights @ pmfs[-1].T
        for pmf in reversed(pmfs[:-1]):
            acc = np.einsum("...ac,ca->...c", acc, pmf)
        return np.clip(acc, 0.0, 1.0)


def tail_prob(subspace: SubSampleSpace, theta) -> float:
    """Probability of the sub-sample space under `theta`."""
    return float(TailEvaluator(subspace)(np.asarray(theta, dtype=float))[0])


class CandidatePool:
    """A frozen, lazily generated set of ``maxit * chunksize`` simplex draws.

    Chunk ``c`` is drawn from a generator seeded with ``(seed, stream, c)``.
    """

    def __init__(self, dims, seed: int, maxit: int, chunksize: int, stream: int = 0):
        self.dims = tuple(int(d) for d in dims)
        self.seed = int(seed)
        self.maxit = int(maxit)
        self.chunksize = int(chunksize)
        self.stream = int(stream)
        self._chunks = {}
        self._lock = threading.Lock()

    @property
    def B(self) -> int:
        return self.maxit * self.chunksize

    def chunk(self, c: int) -> np.ndarray:
        thetas = self._chunks.get(c)
        if thetas is None:
            if not 0 <= c < self.maxit:
                raise IndexError(f"chunk {c} out of range for maxit={self.maxit}")
            rng = np.random.default_rng([self.seed, self.stream, c])
            thetas = np.concatenate([sample_simplex(d, self.chunksize, rng) for d in self.dims], axis=1)
            thetas.setflags(write=False)
            with self._lock:
                thetas = self._chunks.setdefault(c, thetas)
        return thetas

    @property
    def thetas(self) -> np.ndarray:
        return np.concatenate([self.chunk(c) for c in range(self.maxit)])


class PValueFunction:
    """p-value as a function of the null value, over a frozen candidate pool.

    Per-chunk psi values and tail probabilities are cached, so repeated
    evaluation (as in a root search) only redoes the running maximum.
    """

    def __init__(self, subspace: SubSampleSpace, pool: CandidatePool, psi: PsiSpec,
                 direction=Direction.LOWER, threshold: float = np.inf):
        self.subspace = subspace
        self.pool = pool
        self.psi = psi
        self.direction = Direction(direction)
        self.threshold = float(threshold)
        self.B = pool.B
        self._tails = TailEvaluator(subspace)
        self._psi_cache = {}
        self._tail_cache = {}
        self._lock = threading.Lock()

    def _chunk_psi(self, c):
        vals = self._psi_cache.get(c)
        if vals is None:
            vals = self.psi.many(self.pool.chunk(c))
            with self._lock:
                vals = self._psi_cache.setdefault(c, vals)
        return vals

    def _chunk_tails(self, c):
        vals = self._tail_cache.get(c)
        if vals is None:
            vals = self._tails(self.pool.chunk(c))
            with self._lock:
                vals = self._tail_cache.setdefault(c, vals)
        return vals

    def __call__(self, psi0: float):
        """Return ``(p, PValueDiagnostics)`` at null value `psi0`."""
        p = 1.0 / self.B
        best = None
        trace = []
        accepted = 0
        early = False
        size = self.pool.chunksize
        for c in range(self.pool.maxit):
            vals = self._chunk_psi(c)
            ok = vals <= psi0 if self.direction is Direction.LOWER else vals >= psi0
            n_ok = int(ok.sum())
            if n_ok:
                accepted += n_ok
                tails = np.where(ok, self._chunk_tails(c), -np.inf)
                i = int(np.argmax(tails))
                if tails[i] > p:
                    p = float(tails[i])
                    best = (c, i)
            trace.append(((c + 1) * size, p))
            if p > self.threshold:
                early = c + 1 < self.pool.maxit
                break
        argmax = None
        if best is not None:
            argmax = ProbabilityVector(_renormalise(self.pool.chunk(best[0])[best[1]], self.pool.dims), self.pool.dims)
        diag = PValueDiagnostics(tuple(trace), argmax, trace[-1][0], accepted, early)
        return p, diag


def _renormalise(theta, dims):
    blocks = np.split(np.asarray(theta, dtype=float), np.cumsum(dims)[:-1])
    return np.concatenate([b / b.sum() for b in blocks])


def _estimate(data, psi: PsiSpec) -> float:
    est = psi(theta_hat(data).probs)
    lo, hi = psi.psi_limits
    if not lo - LIMIT_TOL <= est <= hi + LIMIT_TOL:
        raise ConfigError(f"estimate {est} lies outside psi_limits {psi.psi_limits}")
    return min(max(est, lo), hi)


def make_pvalue_function(data, psi: PsiSpec, direction, config: InferenceConfig,
                         pool: CandidatePool = None, cap: int = DEFAULT_CAP, threshold=None) -> PValueFunction:
    """Build the p-value function for `data` in the given `direction`.

    The pool defaults to the direction's stream of ``config.seed``.
    """
    direction = Direction(direction)
    space = enumerate_joint(data.shape, psi, cap)
    subspace = select_subspace(space, _estimate(data, psi), direction)
    if pool is None:
        pool = CandidatePool(data.dims, config.seed, config.maxit, config.chunksize, _STREAMS[direction])
    elif pool.dims != data.dims:
        raise ShapeError(f"pool dims {pool.dims} do not match data dims {data.dims}")
    return PValueFunction(subspace, pool, psi, direction, config.threshold if threshold is None else threshold)


def _check_psi0(psi: PsiSpec, psi0: float):
    lo, hi = psi.psi_limits
    if not lo <= psi0 <= hi:
        raise DomainError(f"psi0={psi0} lies outside psi_limits {psi.psi_limits}")


def p_value(data, psi: PsiSpec, psi0: float, direction=None, config: InferenceConfig = None,
            pool: CandidatePool = None, cap: int = DEFAULT_CAP):
    """Monte Carlo supremum p-value for a one-sided null.

    Parameters
    ----------
    data : Dataset
    psi : PsiSpec
    psi0 : float
        Null value, inside ``psi.psi_limits``.
    direction : Direction or str, optional
        ``'lower'`` tests H0: psi <= psi0, ``'upper'`` tests H0: psi >= psi0.
        Defaults to ``config.direction``.
    config : InferenceConfig, optional
    pool : CandidatePool, optional
        Candidate draws to reuse; by default derived from ``config.seed``.

    Returns
    -------
    p : float
        In ``[1/B, 1]``. Early termination stops after the first chunk where
        the running maximum exceeds ``config.threshold``.
    diagnostics : PValueDiagnostics
    """
    config = config or InferenceConfig()
    direction = config.direction if direction is None else Direction(direction)
    _check_psi0(psi, psi0)
    return make_pvalue_function(data, psi, direction, config, pool, cap)(psi0)


def confidence_limit(pfun: PValueFunction, estimate: float, psi_limits, alpha: float, eps: float) -> float:
    """One-sided limit at level ``alpha/2`` by inverting `pfun`.

    For the lower direction this is the largest psi0 in ``[psi_min, estimate]``
    with ``p(psi0) <= alpha/2``; for the upper direction the smallest psi0 in
    ``[estimate, psi_max]``. Clamped to the range when the search interval
    has no sign change.
    """
    lo, hi = psi_limits
    target = alpha / 2

    def g(x):
        return pfun(x)[0] - target

    if pfun.direction is Direction.LOWER:
        if estimate <= lo:
            return lo
        ga = g(lo)
        if ga > 0:
            return lo
        gb = g(estimate)
        if gb <= 0:
            return estimate
        # g is nondecreasing; the left end always satisfies p <= alpha/2
        return itp_bracket(g, lo, estimate, eps / 2, fa=ga, fb=gb).a
    if estimate >= hi:
        return hi
    gb = g(hi)
    if gb > 0:
        return hi
    ga = g(estimate)
    if ga <= 0:
        return estimate
    return itp_bracket(g, estimate, hi, eps / 2, fa=ga, fb=gb).b


def _ci_eps(psi: PsiSpec) -> float:
    lo, hi = psi.psi_limits
    return (hi - lo) * 1e-4


def confidence_interval(data, psi: PsiSpec, config: InferenceConfig = None, eps: float = None,
                        cap: int = DEFAULT_CAP) -> tuple:
    """Central ``100(1 - alpha)%`` interval from two one-sided limits at ``alpha/2``."""
    config = config or InferenceConfig()
    lo, hi = psi.psi_limits
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise ConfigError("confidence intervals need finite psi_limits; transform psi to a bounded range first")
    eps = _ci_eps(psi) if eps is None else eps
    est = _estimate(data, psi)
    lower = confidence_limit(make_pvalue_function(data, psi, Direction.LOWER, config, cap=cap), est, (lo, hi), config.alpha, eps)
    upper = confidence_limit(make_pvalue_function(data, psi, Direction.UPPER, config, cap=cap), est, (lo, hi), config.alpha, eps)
    return lower, upper


def infer(data, psi: PsiSpec, config: InferenceConfig = None, cap: int = DEFAULT_CAP) -> InferenceResult:
    """Estimate, central confidence interval and/or p-value.

    With ``config.psi0`` unset only the interval is computed; with
    ``config.conf_int`` false only the p-value. The p-value shares its
    candidate pool with the confidence limit of the same direction.
    """
    config = config or InferenceConfig()
    est = _estimate(data, psi)
    lo, hi = psi.psi_limits
    if config.psi0 is not None:
        _check_psi0(psi, config.psi0)
    if config.conf_int and not (np.isfinite(lo) and np.isfinite(hi)):
        raise ConfigError("confidence intervals need finite psi_limits; transform psi to a bounded range first")

    pfuns = {}
    needed = set()
    if config.conf_int:
        needed |= {Direction.LOWER, Direction.UPPER}
    if config.psi0 is not None:
        needed.add(config.direction)
    for direction in sorted(needed, key=_STREAMS.get):
        pfuns[direction] = make_pvalue_function(data, psi, direction, config, cap=cap)

    tasks = {}
    if config.conf_int:
        eps = _ci_eps(psi)
        for direction in (Direction.LOWER, Direction.UPPER):
            tasks[direction] = (confidence_limit, pfuns[direction], est, (lo, hi), config.alpha, eps)
    if config.psi0 is not None:
        tasks["p"] = (pfuns[config.direction], config.psi0)

    if config.workers > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as ex:
            futures = {key: ex.submit(*task) for key, task in tasks.items()}
            out = {key: fut.result() for key, fut in futures.items()}
    else:
        out = {key: task[0](*task[1:]) for key, task in tasks.items()}

    conf_int = (out[Direction.LOWER], out[Direction.UPPER]) if config.conf_int else None
    if "p" not in out:
        return InferenceResult(estimate=est, conf_int=conf_int)
    p, diag = out["p"]
    return InferenceResult(
        estimate=est,
        conf_int=conf_int,
        p_value=p,
        trace=diag.trace,
        argmax_theta=diag.argmax_theta,
        iterations_used=diag.iterations_used,
        null_hit=diag.null_hit,
        early_stopped=diag.early_stopped,
    )
