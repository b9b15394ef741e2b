"""Built-in parameter functions and a name registry.

Every function takes the concatenated probability vector. Each constructor
returns a :class:`~exactmultinom.core.PsiSpec` carrying both a scalar and a
vectorised evaluator.
"""
from __future__ import annotations

import numpy as np

from .core import PsiSpec, ShapeError


def _check_width(theta: np.ndarray, width: int, name: str):
    if theta.shape[-1] != width:
        raise ShapeError(f"{name} expects a probability vector of length {width}, got {theta.shape[-1]}")


def bhattacharyya(k: int, d: int) -> PsiSpec:
    """Generalised Bhattacharyya coefficient of k distributions on d cells.

    ``sum_i (prod_j theta_ji) ** (1/k)``, which is 1 iff all blocks agree.
    Zero cells contribute 0.
    """
    k, d = int(k), int(d)
    if k < 2 or d < 2:
        raise ShapeError(f"bhattacharyya needs k >= 2 and d >= 2, got k={k}, d={d}")

    def many(thetas):
        thetas = np.asarray(thetas, dtype=float)
        _check_width(thetas, k * d, "bhattacharyya")
        blocks = thetas.reshape(*thetas.shape[:-1], k, d)
        return (np.prod(blocks, axis=-2) ** (1.0 / k)).sum(axis=-1)

    return PsiSpec(lambda theta: float(many(theta)), (0.0, 1.0), "bhattacharyya", many)


def euclidean_to_ref(theta0) -> PsiSpec:
    """Euclidean distance between a single probability vector and `theta0`."""
    theta0 = np.array(theta0, dtype=float).ravel()
    if theta0.size < 2 or np.any(theta0 < 0) or abs(theta0.sum() - 1) > 1e-9:
        raise ShapeError(f"theta0 must be a probability vector, got {theta0.tolist()}")
    theta0.setflags(write=False)

    def many(thetas):
        thetas = np.asarray(thetas, dtype=float)
        _check_width(thetas, theta0.size, "euclidean_ref")
        return np.sqrt(((thetas - theta0) ** 2).sum(axis=-1))

    return PsiSpec(lambda theta: float(many(theta)), (0.0, float(np.sqrt(2.0))), "euclidean_ref", many)


def cell_probability(index: int = 0, width: int = None) -> PsiSpec:
    """A single entry of the probability vector, e.g. theta_1 of a binomial."""
    index = int(index)

    def many(thetas):
        thetas = np.asarray(thetas, dtype=float)
        if width is not None:
            _check_width(thetas, width, "cell")
        if not -thetas.shape[-1] <= index < thetas.shape[-1]:
            raise ShapeError(f"cell index {index} out of range for length {thetas.shape[-1]}")
        return thetas[..., index]

    return PsiSpec(lambda theta: float(many(theta)), (0.0, 1.0), "cell", many)


def constant(value: float, psi_limits=(0.0, 1.0)) -> PsiSpec:
    value = float(value)
    return PsiSpec(
        lambda theta: value,
        psi_limits,
        "constant",
        lambda thetas: np.full(np.asarray(thetas).shape[:-1], value),
    )


# Cell layout for the instrumental-variable bounds, per level of Z:
# (x=0,y=0), (x=1,y=0), (x=0,y=1), (x=1,y=1); z=0 block first.
def _cells(thetas):
    thetas = np.asarray(thetas, dtype=float)
    _check_width(thetas, 8, "causal bound")
    p = np.moveaxis(thetas, -1, 0)
    # p[x y z] naming: pXYZ
    return dict(
        p000=p[0], p100=p[1], p010=p[2], p110=p[3],
        p001=p[4], p101=p[5], p011=p[6], p111=p[7],
    )


def _lower_terms(thetas):
    c = _cells(thetas)
    return np.stack([
        -1 + c["p001"] + c["p111"],
        -1 + c["p001"] + c["p110"],
        -1 + c["p000"] + c["p110"],
        -1 + c["p000"] + c["p111"],
        -2 + 2 * c["p000"] + c["p011"] + c["p110"] + c["p111"],
        -2 + c["p000"] + c["p001"] + c["p100"] + 2 * c["p111"],
        -2 + 2 * c["p001"] + c["p010"] + c["p110"] + c["p111"],
        -2 + c["p000"] + c["p001"] + c["p101"] + 2 * c["p110"],
    ])


def _upper_terms(thetas):
    c = _cells(thetas)
    return np.stack([
        1 - c["p101"] - c["p010"],
        1 - c["p101"] - c["p011"],
        1 - c["p100"] - c["p010"],
        1 - c["p100"] - c["p011"],
        2 - 2 * c["p101"] - c["p010"] - c["p011"] - c["p110"],
        2 - c["p001"] - c["p100"] - c["p101"] - 2 * c["p010"],
        2 - 2 * c["p100"] - c["p010"] - c["p011"] - c["p111"],
        2 - c["p000"] - c["p100"] - c["p101"] - 2 * c["p011"],
    ])


def causal_lower_bound() -> PsiSpec:
    """Tight lower bound on the risk difference under a binary instrument.

    Input is two 4-cell blocks of ``P(X=x, Y=y | Z=z)`` ordered
    (00, 10, 01, 11) in ``xy``, for z=0 then z=1.
    """
    def many(thetas):
        return _lower_terms(thetas).max(axis=0)

    return PsiSpec(lambda theta: float(many(theta)), (-1.0, 1.0), "causal_lower", many)


def causal_upper_bound() -> PsiSpec:
    """Tight upper bound on the risk difference; same layout as the lower bound."""
    def many(thetas):
        return _upper_terms(thetas).min(axis=0)

    return PsiSpec(lambda theta: float(many(theta)), (-1.0, 1.0), "causal_upper", many)


def _build_bhattacharyya(k=None, d=None, dims=None):
    if k is None or d is None:
        if not dims:
            raise ShapeError("bhattacharyya needs k and d, or the sample dims")
        if len(set(dims)) != 1:
            raise ShapeError(f"bhattacharyya needs equal block lengths, got {tuple(dims)}")
        k, d = len(dims), dims[0]
    return bhattacharyya(k, d)


def _build_euclidean(theta0=None, dims=None):
    if theta0 is None:
        raise ShapeError("euclidean_ref requires theta0")
    if dims is not None and (len(dims) != 1 or dims[0] != len(theta0)):
        raise ShapeError(f"euclidean_ref needs one sample with {len(theta0)} cells, got dims {tuple(dims)}")
    return euclidean_to_ref(theta0)


def _build_causal(builder):
    def build(dims=None):
        if dims is not None and tuple(dims) != (4, 4):
            raise ShapeError(f"causal bounds need two samples of 4 cells, got dims {tuple(dims)}")
        return builder()
    return build


def _build_cell(index=0, dims=None):
    return cell_probability(index, None if dims is None else sum(dims))


REGISTRY = {
    "bhattacharyya": _build_bhattacharyya,
    "euclidean_ref": _build_euclidean,
    "causal_lower": _build_causal(causal_lower_bound),
    "causal_upper": _build_causal(causal_upper_bound),
    "cell": _build_cell,
}


class UnknownPsiError(KeyError):
    def __str__(self):
        return self.args[0]


def registry_lookup(name: str, **params) -> PsiSpec:
    """Construct a registered parameter function by name.

    Parameters
    ----------
    name : str
        One of ``REGISTRY``.
    **params
        Constructor arguments, e.g. ``k``, ``d``, ``theta0``, ``index``, or
        ``dims`` (block lengths of the data, used to fill in and check shapes).
    """
    try:
        builder = REGISTRY[name]
    except KeyError:
        raise UnknownPsiError(f"unknown psi {name!r}; registered: {', '.join(sorted(REGISTRY))}") from None
    try:
        return builder(**params)
    except TypeError as exc:
        raise ShapeError(f"bad parameters for psi {name!r}: {exc}") from None
