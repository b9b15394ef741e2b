"""Interpolate-truncate-project (ITP) bracketed root finding."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .core import ExactMultinomError


class BracketError(ExactMultinomError):
    pass


@dataclass(frozen=True)
class ITPResult:
    """Final bracket ``[a, b]`` around the root with the function values there."""

    a: float
    b: float
    fa: float
    fb: float
    iterations: int
    max_iterations: int

    @property
    def root(self) -> float:
        return 0.5 * (self.a + self.b)


def itp_bracket(f, a, b, eps=1e-8, kappa1=None, kappa2=2.0, n0=1, fa=None, fb=None) -> ITPResult:
    """Shrink ``[a, b]`` around a sign change of `f` until ``b - a <= 2 * eps``.

    Parameters
    ----------
    f : callable
        Function with ``f(a) * f(b) <= 0``. Only the sign of `f` has to be
        consistent; step functions are fine.
    a, b : float
        Bracket with ``a < b``.
    eps : float
        Half-width tolerance of the final bracket.
    kappa1, kappa2, n0 : float
        ITP hyperparameters. ``kappa1`` defaults to ``0.2 / (b - a)``.
    fa, fb : float, optional
        Known values of `f` at the endpoints, to save evaluations.

    Returns
    -------
    ITPResult
        At most ``ceil(log2((b - a) / (2 eps))) + n0`` evaluations inside the
        bracket are made.
    """
    a, b = float(a), float(b)
    if not a < b:
        raise BracketError(f"need a < b, got a={a}, b={b}")
    if eps <= 0:
        raise BracketError(f"eps must be positive, got {eps}")
    if kappa1 is None:
        kappa1 = 0.2 / (b - a)
    ya = float(f(a)) if fa is None else float(fa)
    yb = float(f(b)) if fb is None else float(fb)
    n_half = max(0, math.ceil(math.log2((b - a) / (2 * eps))))
    n_max = n_half + n0
    if ya == 0:
        return ITPResult(a, a, ya, ya, 0, n_max)
    if yb == 0:
        return ITPResult(b, b, yb, yb, 0, n_max)
    if ya * yb > 0:
        raise BracketError(f"no sign change on [{a}, {b}]: f(a)={ya}, f(b)={yb}")

    # work with an increasing orientation: g(a) < 0 < g(b)
    sign = 1.0 if ya < 0 else -1.0
    ga, gb = sign * ya, sign * yb
    j = 0
    # after n_max probes the width is 2 * eps up to round-off; stop there
    while b - a > 2 * eps and j < n_max:
        x_half = 0.5 * (a + b)
        r = eps * 2.0 ** (n_max - j) - 0.5 * (b - a)
        delta = kappa1 * (b - a) ** kappa2
        x_f = (gb * a - ga * b) / (gb - ga)
        sigma = math.copysign(1.0, x_half - x_f)
        x_t = x_f + sigma * delta if delta <= abs(x_half - x_f) else x_half
        x_itp = x_t if abs(x_t - x_half) <= r else x_half - sigma * r
        # guard against round-off pushing the probe onto an endpoint
        if not a < x_itp < b:
            x_itp = x_half
        g = sign * float(f(x_itp))
        j += 1
        if g > 0:
            b, gb = x_itp, g
        elif g < 0:
            a, ga = x_itp, g
        else:
            a = b = x_itp
            ga = gb = 0.0
    return ITPResult(a, b, sign * ga, sign * gb, j, n_max)


def itp_root(f, a, b, eps=1e-8, kappa1=None, kappa2=2.0, n0=1) -> float:
    """Root of `f` in ``[a, b]`` to within `eps`.

    >>> round(itp_root(lambda x: x * x - 2, 1, 2), 8)
    1.41421356
    """
    return itp_bracket(f, a, b, eps, kappa1, kappa2, n0).root
