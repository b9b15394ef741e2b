"""Coverage simulations, p-value stability traces and timing benchmarks.

Scenarios are JSON documents. A scenario draws data either from explicit
probability blocks or from a discrete structural model for a binary
instrument Z, treatment X and outcome Y with a finite latent confounder U.
"""
from __future__ import annotations

import json
import math
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .bootstrap import BootstrapConfig, bootstrap_ci
from .core import ConfigError, Dataset, Direction, InferenceConfig, PsiSpec
from .engine import confidence_interval, p_value
from .psi import registry_lookup
from .samplespace import DEFAULT_CAP, SpaceTooLargeError, clear_cache, enumerate_joint, joint_size

COVER_TOL = 1e-12

# Response functions of a binary variable to a binary parent:
# never, follows parent, opposes parent, always.
RESPONSE = np.array([[0, 0], [0, 1], [1, 0], [1, 1]])


@dataclass(frozen=True)
class DiscreteSEM:
    """Instrumental-variable structural model with a finite confounder.

    ``z = g_Z(e_z)``, ``x = g_X(u, z, e_x)``, ``y = g_Y(u, x, e_y)``. Given
    ``U = u`` the noise terms pick a response function for X (``qx[u]``) and
    for Y (``qy[u]``) independently; U is shared, which creates confounding.

    Attributes
    ----------
    pu : (m,) probabilities of the latent states.
    qx, qy : (m, 4) response-type probabilities, types ordered
        (never, follows parent, opposes parent, always).
    pz : probability that Z = 1.
    """

    pu: tuple
    qx: tuple
    qy: tuple
    pz: float = 0.5

    def __post_init__(self):
        pu = np.asarray(self.pu, dtype=float)
        qx = np.asarray(self.qx, dtype=float).reshape(len(pu), 4)
        qy = np.asarray(self.qy, dtype=float).reshape(len(pu), 4)
        for name, arr in (("pu", pu), ("qx", qx), ("qy", qy)):
            if np.any(arr < 0) or not np.allclose(arr.sum(axis=-1), 1.0, atol=1e-9):
                raise ConfigError(f"SEM {name} must hold probability vectors")
        if not 0 <= self.pz <= 1:
            raise ConfigError(f"SEM pz must lie in [0, 1], got {self.pz}")
        object.__setattr__(self, "pu", tuple(pu.tolist()))
        object.__setattr__(self, "qx", tuple(map(tuple, qx.tolist())))
        object.__setattr__(self, "qy", tuple(map(tuple, qy.tolist())))

    @classmethod
    def random(cls, rng: np.random.Generator, m: int = 3) -> "DiscreteSEM":
        return cls(
            tuple(rng.dirichlet(np.ones(m))),
            tuple(map(tuple, rng.dirichlet(np.full(4, 0.5), size=m))),
            tuple(map(tuple, rng.dirichlet(np.full(4, 0.5), size=m))),
            float(rng.uniform()),
        )

    def response_joint(self) -> np.ndarray:
        """(4, 4) joint distribution of X and Y response types."""
        pu, qx, qy = (np.asarray(a) for a in (self.pu, self.qx, self.qy))
        return np.einsum("u,ua,ub->ab", pu, qx, qy)

    def observed(self) -> np.ndarray:
        """``P(X=x, Y=y | Z=z)`` as two blocks (00, 10, 01, 11), z=0 then z=1."""
        q = self.response_joint()
        out = np.zeros((2, 2, 2))  # z, y, x
        for rx in range(4):
            for ry in range(4):
                for z in (0, 1):
                    x = RESPONSE[rx, z]
                    y = RESPONSE[ry, x]
                    out[z, y, x] += q[rx, ry]
        return out.reshape(8)

    def beta(self) -> float:
        """``P(Y(1)=1) - P(Y(0)=1)`` computed from the latent model."""
        qy_marg = self.response_joint().sum(axis=0)
        return float(qy_marg @ (RESPONSE[:, 1] - RESPONSE[:, 0]))


@dataclass
class Scenario:
    """A coverage experiment.

    ``generator`` is ``{"type": "theta", "theta": [[...], ...]}`` or
    ``{"type": "sem", "pu": ..., "qx": ..., "qy": ..., "pz": ...}``.
    ``thresholds`` maps a method to ``{"min": c}`` and/or ``{"max": c}``
    bounds on its empirical coverage.
    """

    name: str
    psi: dict
    generator: dict
    n: list
    replicates: int = 200
    methods: list = field(default_factory=lambda: ["exact", "bootstrap"])
    alpha: float = 0.05
    seed: int = 1
    exact: dict = field(default_factory=lambda: {"maxit": 50, "chunksize": 50})
    bootstrap: dict = field(default_factory=lambda: {"replicates": 500})
    thresholds: dict = field(default_factory=dict)
    true_value: Optional[float] = None
    description: str = ""

    @classmethod
    def from_dict(cls, doc: dict) -> "Scenario":
        known = set(cls.__dataclass_fields__)
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown scenario fields: {sorted(unknown)}")
        try:
            return cls(**doc)
        except TypeError as exc:
            raise ConfigError(f"bad scenario: {exc}") from None

    def to_dict(self) -> dict:
        return asdict(self)

    def sem(self) -> Optional[DiscreteSEM]:
        if self.generator.get("type") != "sem":
            return None
        g = self.generator
        return DiscreteSEM(g["pu"], g["qx"], g["qy"], g.get("pz", 0.5))

    def true_theta(self) -> list:
        """Probability blocks of the data-generating distribution."""
        kind = self.generator.get("type")
        if kind == "theta":
            blocks = [np.asarray(b, dtype=float) for b in self.generator["theta"]]
        elif kind == "sem":
            p = self.sem().observed()
            blocks = [p[:4], p[4:]]
        else:
            raise ConfigError(f"generator type must be 'theta' or 'sem', got {kind!r}")
        if len(blocks) != len(self.n):
            raise ConfigError(f"generator has {len(blocks)} samples but n lists {len(self.n)}")
        for b in blocks:
            if np.any(b < 0) or abs(b.sum() - 1) > 1e-9:
                raise ConfigError("generator blocks must be probability vectors")
        return blocks

    def build_psi(self) -> PsiSpec:
        dims = tuple(len(b) for b in self.true_theta())
        name = self.psi["name"]
        if name.startswith("causal") and dims != (4, 4):
            raise ConfigError(f"causal bounds need a generator with two 4-cell samples, got dims {dims}")
        spec = registry_lookup(name, dims=dims, **self.psi.get("params", {}))
        limits = self.psi.get("limits")
        return spec.with_limits(limits) if limits is not None else spec


def load_scenario(source) -> Scenario:
    """Load a scenario from a path, or by name from the bundled scenarios."""
    path = Path(source)
    if path.suffix == ".json" and path.exists():
        doc = json.loads(path.read_text())
    else:
        name = str(source)
        name = name if name.endswith(".json") else name + ".json"
        ref = resources.files("exactmultinom") / "scenarios" / name
        if not ref.is_file():
            raise ConfigError(f"no scenario file {source!r}; bundled: {', '.join(bundled_scenarios())}")
        doc = json.loads(ref.read_text())
    return Scenario.from_dict(doc)


def bundled_scenarios() -> list:
    root = resources.files("exactmultinom") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def replicate_seed(seed: int, r: int) -> int:
    state = np.random.SeedSequence([int(seed), int(r)]).generate_state(2, dtype=np.uint32)
    return int(state[0]) << 32 | int(state[1])


def draw_dataset(blocks, n, rng: np.random.Generator) -> Dataset:
    return Dataset.from_counts([rng.multinomial(int(nj), b / b.sum()) for nj, b in zip(n, blocks)])


@dataclass(frozen=True)
class CoverageRow:
    scenario: str
    method: str
    replicates: int
    seed: int
    true_value: float
    coverage: float
    mean_width: float
    mean_runtime_s: float
    threshold: str
    passed: Optional[bool]


COVERAGE_COLUMNS = list(CoverageRow.__dataclass_fields__)


def _one_replicate(scenario: Scenario, psi: PsiSpec, blocks, truth: float, r: int) -> dict:
    seed = replicate_seed(scenario.seed, r)
    data = draw_dataset(blocks, scenario.n, np.random.default_rng(seed))
    out = {}
    for method in scenario.methods:
        t0 = time.perf_counter()
        if method == "exact":
            cfg = InferenceConfig(alpha=scenario.alpha, seed=seed, **scenario.exact)
            lo, hi = confidence_interval(data, psi, cfg)
        elif method == "bootstrap":
            cfg = BootstrapConfig(alpha=scenario.alpha, seed=seed, **scenario.bootstrap)
            lo, hi = bootstrap_ci(data, psi, cfg)
        else:
            raise ConfigError(f"unknown method {method!r}; use 'exact' or 'bootstrap'")
        elapsed = time.perf_counter() - t0
        covered = lo - COVER_TOL <= truth <= hi + COVER_TOL
        out[method] = (covered, hi - lo, elapsed)
    return out


def _threshold_check(spec: dict, coverage: float):
    if not spec:
        return "", None
    parts, ok = [], True
    if "min" in spec:
        parts.append(f">={spec['min']}")
        ok &= coverage >= spec["min"]
    if "max" in spec:
        parts.append(f"<={spec['max']}")
        ok &= coverage <= spec["max"]
    return " ".join(parts), bool(ok)


def run_coverage(scenario: Scenario, workers: int = 1, replicates: int = None) -> list:
    """Empirical coverage of each method's interval for the true psi value.

    Returns one :class:`CoverageRow` per method, in scenario order.
    """
    psi = scenario.build_psi()
    blocks = scenario.true_theta()
    truth = psi(np.concatenate(blocks))
    if scenario.true_value is not None and abs(truth - scenario.true_value) > 5e-3:
        raise ConfigError(f"scenario records true value {scenario.true_value} but the generator gives {truth:.6f}")
    reps = int(scenario.replicates if replicates is None else replicates)
    # build the joint space once, before any worker needs it
    if "exact" in scenario.methods:
        enumerate_joint([(int(n), len(b)) for n, b in zip(scenario.n, blocks)], psi)

    def run(r):
        return _one_replicate(scenario, psi, blocks, truth, r)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(run, range(reps)))
    else:
        results = [run(r) for r in range(reps)]

    rows = []
    for method in scenario.methods:
        covered = [res[method][0] for res in results]
        coverage = sum(covered) / reps
        label, passed = _threshold_check(scenario.thresholds.get(method, {}), coverage)
        rows.append(CoverageRow(
            scenario=scenario.name,
            method=method,
            replicates=reps,
            seed=scenario.seed,
            true_value=truth,
            coverage=coverage,
            mean_width=float(np.mean([res[method][1] for res in results])),
            mean_runtime_s=float(np.mean([res[method][2] for res in results])),
            threshold=label,
            passed=passed,
        ))
    return rows


STABILITY_COLUMNS = ["psi0", "iteration", "p_value"]


def stability_traces(data, psi: PsiSpec, psi0_list, config: InferenceConfig = None) -> list:
    """Running p-value after every chunk for each null value.

    Early termination is disabled so each series covers the full ``B``.
    """
    config = config or InferenceConfig()
    rows = []
    for psi0 in psi0_list:
        _, diag = p_value(data, psi, float(psi0), config.direction,
                          InferenceConfig(alpha=config.alpha, maxit=config.maxit, chunksize=config.chunksize,
                                          early_stop_threshold=math.inf, seed=config.seed))
        rows.extend((float(psi0), it, p) for it, p in diag.trace)
    return rows


BENCH_COLUMNS = ["k", "d", "n", "cardinality", "B", "runs", "enumeration_s", "pvalue_s", "status"]


def _bench_data(k, d, n):
    base = [n // d + (1 if i < n % d else 0) for i in range(d)]
    return Dataset.from_counts([base[j:] + base[:j] for j in range(k)])


def bench(grid, B: int = 2500, runs: int = 3, chunksize: int = 50, seed: int = 0, cap: int = DEFAULT_CAP) -> list:
    """Median wall-clock of enumeration and of one full p-value per shape.

    Each grid entry is ``(k, d, n)`` with n trials per sample. The parameter
    function is the Bhattacharyya coefficient (``k >= 2``) or the first cell
    probability (``k = 1``). Shapes over `cap` are reported as skipped.
    """
    rows = []
    maxit = max(1, math.ceil(B / chunksize))
    for k, d, n in grid:
        k, d, n = int(k), int(d), int(n)
        size = joint_size([(n, d)] * k)
        row = dict(k=k, d=d, n=n, cardinality=size, B=maxit * chunksize, runs=runs,
                   enumeration_s="", pvalue_s="", status="ok")
        if size > cap:
            row["status"] = "skipped"
            rows.append(row)
            continue
        psi = registry_lookup("bhattacharyya", k=k, d=d) if k >= 2 else registry_lookup("cell")
        data = _bench_data(k, d, n)
        cfg = InferenceConfig(maxit=maxit, chunksize=chunksize, early_stop_threshold=math.inf, seed=seed)
        enum_t, p_t = [], []
        for _ in range(runs):
            clear_cache()
            t0 = time.perf_counter()
            try:
                enumerate_joint(data.shape, psi, cap)
            except SpaceTooLargeError:
                row["status"] = "skipped"
                break
            t1 = time.perf_counter()
            p_value(data, psi, psi(np.full(k * d, 1.0 / d)), Direction.LOWER, cfg, cap=cap)
            t2 = time.perf_counter()
            enum_t.append(t1 - t0)
            p_t.append(t2 - t1)
        if enum_t:
            row["enumeration_s"] = statistics.median(enum_t)
            row["pvalue_s"] = statistics.median(p_t)
        rows.append(row)
    return rows
