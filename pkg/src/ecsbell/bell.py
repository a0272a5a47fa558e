"""Bell-CHSH function, its optimization over the four local angles, violation
thresholds in alpha and the gain relation for full amplification."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .correlators import (
    closed_form_function,
    linear_table_correlation,
    outcome_tables,
    table_correlation,
)
from .errors import InvalidAmplitudes, MultipleCrossings, NoSignChange
from .oracle import oracle_correlation
from .scenario import Method, Rotation, ScenarioConfig
from .special_math import OptimizerReport, _start_points, bisect_bracket, maximize

TSIRELSON = 2.0 * math.sqrt(2.0)
BOUNDS = [(-math.pi, math.pi)] * 4
# effective rotations act as rotations of the branch pair only for small
# angles; extra starts cover this corner of the box
SMALL_ANGLE = 0.5
SMALL_STARTS = 16

# (A1, B1), (A1, B2), (A2, B1), (A2, B2) in the order (A1, A2, B1, B2)
_PAIRS_A = np.array([0, 0, 1, 1])
_PAIRS_B = np.array([2, 3, 2, 3])
_PATTERN = np.array([1.0, 1.0, 1.0, -1.0])


def _wrap(t: float) -> float:
    return float((t + math.pi) % (2.0 * math.pi) - math.pi)


@dataclass(frozen=True)
class AngleSet:
    theta_a1: float
    theta_a2: float
    theta_b1: float
    theta_b2: float

    def __post_init__(self):
        if not all(math.isfinite(t) for t in self.as_array()):
            raise ValueError("angles must be finite")

    @classmethod
    def from_array(cls, arr) -> "AngleSet":
        return cls(*(float(t) for t in arr))

    def as_array(self) -> np.ndarray:
        return np.array([self.theta_a1, self.theta_a2, self.theta_b1, self.theta_b2])

    def canonical(self) -> "AngleSet":
        """Angles wrapped into [-pi, pi).

        Only meaningful for ideal rotations, whose 2x2 action is 2 pi periodic.
        """
        return AngleSet(*(_wrap(t) for t in self.as_array()))


@dataclass(frozen=True)
class BellResult:
    value: float            # optimized |B|
    signed_value: float
    angles: AngleSet
    scenario: ScenarioConfig
    method: Method
    optimizer: OptimizerReport


@dataclass(frozen=True)
class ThresholdResult:
    alpha_star: float
    scenario: ScenarioConfig     # template; its alpha is alpha_star
    bracket: tuple[float, float]
    tolerance: float
    method: Method = Method.CLOSED

    def as_dict(self) -> dict:
        d = self.scenario.as_dict()
        d.pop("alpha")
        return {
            "alpha_star": self.alpha_star,
            "g": d.pop("g"),
            "eta": d.pop("eta"),
            "rotation": d.pop("rotation"),
            "tolerance": self.tolerance,
            "bracket": list(self.bracket),
            "amplifier": d.pop("amplifier"),
            "ordering": d.pop("ordering"),
            "method": self.method.value,
        }


def bell_function(cfg: ScenarioConfig, method: Method | str = Method.CLOSED
                  ) -> Callable[[np.ndarray], float]:
    """Return B(theta) for theta = (A1, A2, B1, B2) as a fast closure."""
    method = Method(method)
    if method is Method.CLOSED:
        f = closed_form_function(cfg)

        def bell(t):
            a1, a2, b1, b2 = t
            return (f(math.cos(2.0 * (a1 - b1))) + f(math.cos(2.0 * (a1 - b2)))
                    + f(math.cos(2.0 * (a2 - b1))) - f(math.cos(2.0 * (a2 - b2))))
        return bell

    if method is Method.QUADRATURE:
        def bell(t):
            T = outcome_tables(t, cfg)
            c = table_correlation(T[_PAIRS_A], T[_PAIRS_B])
            return float(np.dot(_PATTERN, c))
        return bell

    if method is Method.LINEARIZED:
        eps = cfg.epsilon

        def bell(t):
            T0, T1 = outcome_tables(t, cfg, linear=True)
            c = linear_table_correlation(T0[_PAIRS_A], T1[_PAIRS_A],
                                         T0[_PAIRS_B], T1[_PAIRS_B], eps)
            return float(np.dot(_PATTERN, c))
        return bell

    def bell(t):
        c = [oracle_correlation(t[i], t[j], cfg) for i, j in zip(_PAIRS_A, _PAIRS_B)]
        return float(np.dot(_PATTERN, c))
    return bell


def bell_value(angles: AngleSet, cfg: ScenarioConfig,
               method: Method | str = Method.CLOSED) -> float:
    """C(A1,B1) + C(A1,B2) + C(A2,B1) - C(A2,B2)."""
    return float(bell_function(cfg, method)(angles.as_array()))


def optimize_bell(cfg: ScenarioConfig, method: Method | str = Method.CLOSED,
                  n_starts: int = 100, seed: int = 0) -> BellResult:
    """Maximize |B| over [-pi, pi]^4.

    |B| rather than B: the first-order correlators are not odd in
    nu = cos 2(thA - thB), so the largest positive and negative excursions
    differ, and the local-realistic bound is on |B|.
    """
    method = Method(method)
    bell = bell_function(cfg, method)
    extra = ()
    if cfg.rotation is Rotation.EFFECTIVE:
        extra = _start_points(np.array([(-SMALL_ANGLE, SMALL_ANGLE)] * 4), SMALL_STARTS, seed)
    report = maximize(lambda t: abs(bell(t)), BOUNDS, n_starts=n_starts, seed=seed,
                      extra_starts=extra)
    angles = AngleSet.from_array(report.best_point)
    if cfg.rotation is Rotation.IDEAL:
        angles = angles.canonical()
    signed = float(bell(report.best_point))
    return BellResult(float(report.best_value), signed, angles, cfg, method, report)


def violation_threshold(cfg: ScenarioConfig, bracket: tuple[float, float] = (0.05, 1.5),
                        method: Method | str = Method.CLOSED, tol: float = 1e-3,
                        n_starts: int = 100, seed: int = 0,
                        prescan: int = 8) -> ThresholdResult:
    """Smallest alpha where the optimized |B| crosses 2, by bisection.

    An evenly spaced pre-scan of ``prescan`` points checks that the bracket
    holds exactly one crossing; several crossings raise MultipleCrossings.
    """
    method = Method(method)
    lo, hi = bracket
    if not 0 < lo < hi:
        raise ValueError("bracket must satisfy 0 < lo < hi")

    def excess(a: float) -> float:
        return optimize_bell(cfg.with_alpha(a), method, n_starts, seed).value - 2.0

    grid = np.linspace(lo, hi, max(prescan, 2))
    vals = [excess(a) for a in grid]
    signs = np.sign(vals)
    flips = [i for i in range(len(grid) - 1) if signs[i] != signs[i + 1]]
    if not flips:
        raise NoSignChange(
            f"optimized B - 2 keeps sign {signs[0]:+g} on [{lo:g}, {hi:g}]")
    if len(flips) > 1:
        raise MultipleCrossings(
            f"optimized B - 2 changes sign {len(flips)} times on [{lo:g}, {hi:g}]")
    i = flips[0]
    a, b = bisect_bracket(excess, float(grid[i]), float(grid[i + 1]), tol, vals[i], vals[i + 1])
    star = 0.5 * (a + b)
    return ThresholdResult(star, cfg.with_alpha(star), (a, b), tol, method)


def required_gain(alpha_bar: float, alpha_a: float) -> float:
    """Gain 1 + ln(alpha_bar / alpha_a) lifting alpha_a to alpha_bar under full amplification."""
    if not 0 < alpha_a <= alpha_bar:
        raise InvalidAmplitudes(f"need 0 < alpha_a <= alpha_bar, got {alpha_a}, {alpha_bar}")
    return 1.0 + math.log(alpha_bar / alpha_a)
