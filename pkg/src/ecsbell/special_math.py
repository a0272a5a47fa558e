"""Numerical primitives: error function, Gauss-Legendre quadrature,
multistart Nelder-Mead maximization and bracketed bisection."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import NoSignChange, NonConvergence

__all__ = [
    "erf",
    "QuadratureRule",
    "gauss_legendre",
    "integrate",
    "OptimizerReport",
    "maximize",
    "bisect",
    "bisect_bracket",
]

_erf_array = np.frompyfunc(math.erf, 1, 1)


def erf(x):
    """Error function for scalars or arrays (absolute accuracy ~1e-16)."""
    if np.ndim(x) == 0:
        return math.erf(float(x))
    return _erf_array(np.asarray(x, dtype=float)).astype(float)


# ---------------------------------------------------------------------------
# quadrature


@lru_cache(maxsize=16)
def _legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


@dataclass(frozen=True)
class QuadratureRule:
    """Fixed nodes and positive weights for integration over ``interval``."""

    nodes: np.ndarray
    weights: np.ndarray
    interval: tuple[float, float]

    def __post_init__(self):
        if len(self.nodes) < 2 or len(self.nodes) != len(self.weights):
            raise ValueError("a rule needs at least two nodes and matching weights")
        if np.any(self.weights <= 0):
            raise ValueError("quadrature weights must be positive")

    def __call__(self, f: Callable[[np.ndarray], np.ndarray]):
        return np.dot(self.weights, f(self.nodes))


def gauss_legendre(lo: float, hi: float, order: int = 40, panels: int = 1) -> QuadratureRule:
    """Composite Gauss-Legendre rule with ``panels`` equal panels on [lo, hi]."""
    if not hi > lo:
        raise ValueError("need lo < hi")
    x, w = _legendre(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return QuadratureRule(nodes, weights, (float(lo), float(hi)))


def _panel(f, a, b, x, w):
    half = 0.5 * (b - a)
    return half * np.dot(w, f(0.5 * (a + b) + half * x))


def integrate(f, lo: float, hi: float, tol: float = 1e-10, order: int = 40,
              max_panels: int = 4096):
    """Adaptive composite Gauss-Legendre integration of a vectorized ``f``.

    Each panel is compared against the sum over its two halves; panels are
    split until the difference drops below their share of ``tol``.
    Works for real or complex integrands.
    """
    if not hi > lo:
        raise ValueError("need lo < hi")
    x, w = _legendre(order)
    width = hi - lo
    total = 0.0
    stack = [(lo, hi, _panel(f, lo, hi, x, w))]
    accepted = 0
    while stack:
        a, b, coarse = stack.pop()
        m = 0.5 * (a + b)
        left = _panel(f, a, m, x, w)
        right = _panel(f, m, b, x, w)
        if abs(left + right - coarse) <= tol * (b - a) / width:
            total = total + left + right
            accepted += 1
            continue
        if accepted + len(stack) + 2 > max_panels:
            raise NonConvergence(
                f"integrate: {max_panels} panels exhausted before tol={tol:g}")
        stack.append((m, b, right))
        stack.append((a, m, left))
    return total


# ---------------------------------------------------------------------------
# optimization


@dataclass
class OptimizerReport:
    best_point: np.ndarray
    best_value: float
    starts_used: int
    converged: bool
    evaluations: int = 0


def _start_points(bounds: np.ndarray, n_starts: int, seed: int) -> np.ndarray:
    dim = len(bounds)
    k = 1
    while (k + 1) ** dim <= n_starts:
        k += 1
    lo, hi = bounds[:, 0], bounds[:, 1]
    centers = (np.arange(k) + 0.5) / k
    grid = np.stack(np.meshgrid(*([centers] * dim), indexing="ij"), axis=-1).reshape(-1, dim)
    grid = lo + grid * (hi - lo)
    rng = np.random.default_rng(seed)
    extra = rng.uniform(lo, hi, size=(n_starts - len(grid), dim))
    return np.vstack([grid, extra])


def maximize(f: Callable[[np.ndarray], float], bounds: Sequence[tuple[float, float]],
             n_starts: int = 100, seed: int = 0, xatol: float = 1e-7,
             fatol: float = 1e-10, maxiter: int | None = None,
             extra_starts: Sequence[Sequence[float]] = ()) -> OptimizerReport:
    """Maximize ``f`` over a box with bounded Nelder-Mead from many starts.

    Starts are the cell centers of a ``k**dim`` stratified grid (largest
    ``k`` with ``k**dim <= n_starts``) topped up with seeded uniform draws.
    The returned value is never below the best start value.
    """
    bounds = np.asarray(bounds, dtype=float)
    if bounds.ndim != 2 or bounds.shape[1] != 2 or len(bounds) < 1:
        raise ValueError("bounds must be a sequence of (lo, hi) pairs")
    if n_starts < 1:
        raise ValueError("n_starts must be >= 1")
    starts = _start_points(bounds, n_starts, seed)
    if len(extra_starts):
        starts = np.vstack([starts, np.asarray(extra_starts, dtype=float)])

    neg = lambda p: -float(f(p))
    best_x, best_val, best_ok = None, -np.inf, False
    n_eval = 0
    options = {"xatol": xatol, "fatol": fatol}
    if maxiter is not None:
        options["maxiter"] = maxiter
    for x0 in starts:
        v0 = float(f(x0))
        n_eval += 1
        if v0 > best_val:
            best_x, best_val, best_ok = x0.copy(), v0, False
        res = minimize(neg, x0, method="Nelder-Mead", bounds=bounds, options=options)
        n_eval += res.nfev
        if -res.fun > best_val:
            best_x, best_val, best_ok = np.clip(res.x, bounds[:, 0], bounds[:, 1]), -res.fun, bool(res.success)
    return OptimizerReport(best_x, float(best_val), len(starts), best_ok, n_eval)


# ---------------------------------------------------------------------------
# root bracketing


def bisect_bracket(f: Callable[[float], float], lo: float, hi: float,
                   tol: float = 1e-3, flo: float | None = None,
                   fhi: float | None = None) -> tuple[float, float]:
    """Shrink a sign-change bracket of ``f`` to width <= ``tol``."""
    flo = f(lo) if flo is None else flo
    fhi = f(hi) if fhi is None else fhi
    if flo == 0:
        return lo, lo
    if fhi == 0:
        return hi, hi
    if np.sign(flo) == np.sign(fhi):
        raise NoSignChange(f"f({lo:g})={flo:g} and f({hi:g})={fhi:g} share a sign")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0:
            return mid, mid
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi = mid
    return lo, hi


def bisect(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-3) -> float:
    """Midpoint of a bracket of width <= ``tol`` around a sign change of ``f``."""
    a, b = bisect_bracket(f, lo, hi, tol)
    return 0.5 * (a + b)
