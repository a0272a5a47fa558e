"""Joint homodyne amplitudes, dichotomized outcome probabilities and
correlation functions for every supported pipeline.

Quadrature evaluation works with per-angle tables

    T[k, a, b] = int_{Omega_k} K_a(x) conj(K_b(x)) dx,

where K_a is the branch kernel of mode j for the input branch a = +-alpha.
Since the joint amplitude is C = sum_a K_a(xA) K_a(xB), the unnormalized
quadrant probability factorizes as P_kl = Re sum_ab T_A[k,a,b] T_B[l,a,b],
so a Bell evaluation needs four tables rather than four double integrals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import UnsupportedClosedForm, UnsupportedMethod
from .kernels import PI_M14, AmplifierKind, effective_coefficients, ideal_rotation
from .scenario import Method, Ordering, Rotation, ScenarioConfig
from .special_math import _legendre, erf

SQRT2 = math.sqrt(2.0)
SQRTPI = math.sqrt(math.pi)
SIGNS = np.array([[1.0, -1.0], [-1.0, 1.0]])

TAIL = 6.0          # quadrature cut beyond the outermost Gaussian center
GL_ORDER = 40
PANEL_PHASE = 72.0  # max oscillation phase omega*h across one panel


@dataclass(frozen=True)
class OutcomeProbabilities:
    """Normalized 2x2 table; index 0 is outcome +1 (x >= 0), 1 is -1."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.shape != (2, 2):
            raise ValueError("outcome table must be 2x2")
        object.__setattr__(self, "p", p)

    @property
    def correlation(self) -> float:
        return float(np.sum(SIGNS * self.p))

    def __getitem__(self, kl):
        return self.p[kl]


@dataclass(frozen=True)
class CorrelationValue:
    value: float
    method: Method

    def __float__(self):
        return self.value


# ---------------------------------------------------------------------------
# closed forms (ideal rotations, amplifier after rotation)


def nu_of(theta_a, theta_b):
    return np.cos(2.0 * (np.asarray(theta_a) - np.asarray(theta_b)))


def full_amp_correlation(alpha_t: float, nu):
    """Erf^2(sqrt2 a) nu / (1 + nu exp(-4 a^2)) for the amplitude a = alpha e^{g-1}."""
    e = erf(SQRT2 * alpha_t)
    return e * e * nu / (1.0 + nu * math.exp(-4.0 * alpha_t * alpha_t))


def first_order_correlation(alpha: float, g: float, nu):
    """Closed-form correlator for the first-order amplifier after ideal rotations.

    Written with q = exp(-4 alpha^2) = 1/mu so nothing overflows at large alpha.
    This is the exact first-order Taylor expansion in (g-1) of the quadrature
    correlator; it is not bounded by 1 once g-1 is sizeable.
    """
    q = math.exp(-4.0 * alpha * alpha)
    e = erf(SQRT2 * alpha)
    eps = g - 1.0
    one = 1.0 + nu * q
    lin = 4.0 * SQRT2 * alpha * eps * one * math.sqrt(q)
    sat = SQRTPI * e * (1.0 + (1.0 + 8.0 * eps * alpha * alpha) * nu * q)
    return nu * e / (SQRTPI * one * one) * (lin + sat)


def inefficient_correlation(alpha: float, g: float, eta: float, nu):
    """Closed-form correlator with detector amplitude transmission ``eta``.

    kappa = eta alpha.  The bracket placement is the one reproducing the
    first-order expansion of the exact lossy pipeline: a factor (g-1) on the
    linear term, Erf(sqrt2 kappa) multiplying the whole saturating bracket, and
    8 alpha^2 as the gain coefficient.  Reduces to ``first_order_correlation``
    at eta = 1.
    """
    kappa = eta * alpha
    q = math.exp(-4.0 * alpha * alpha)
    e = erf(SQRT2 * kappa)
    eps = g - 1.0
    one = 1.0 + nu * q
    lin = 4.0 * SQRT2 * kappa * eps * math.exp(-2.0 * kappa * kappa) * one
    sat = SQRTPI * e * (1.0 + (1.0 + 8.0 * eps * alpha * alpha) * nu * q)
    return nu * e / (SQRTPI * one * one) * (lin + sat)


def inefficient_correlation_printed(alpha: float, g: float, eta: float, nu):
    """Literal transcription of the published lossy formula, kept for comparison.

    It misses the (g-1) factor on the linear term, so it does not reduce to the
    g = 1 result; never used by the Bell engine.
    """
    kappa = eta * alpha
    q = math.exp(-4.0 * alpha * alpha)
    e = erf(SQRT2 * kappa)
    c = 1.0 + 2.0 * (g - 1.0) * (4.0 * alpha * alpha + kappa * kappa)
    one = 1.0 + nu * q
    pre = nu * math.exp(-2.0 * kappa * kappa) * e / (SQRTPI * one * one)
    return pre * (4.0 * SQRT2 * kappa * one
                  + SQRTPI * math.exp(2.0 * kappa * kappa) * (1.0 + c * nu * q * e))


def closed_form_function(cfg: ScenarioConfig):
    """Return ``f(nu)`` evaluating the closed-form correlator of ``cfg``.

    Raises UnsupportedClosedForm for effective rotations and for the
    amplifier-before-rotation ordering.
    """
    if cfg.rotation is not Rotation.IDEAL:
        raise UnsupportedClosedForm("no closed form for effective rotations")
    kind = cfg.kind
    if cfg.ordering is Ordering.BEFORE and kind is not AmplifierKind.NONE:
        raise UnsupportedClosedForm("no closed form for amplification before rotation")
    alpha, g, eta = cfg.alpha, cfg.gain, cfg.eta
    if kind is AmplifierKind.FULL:
        alpha, g = alpha * math.exp(g - 1.0), 1.0
    elif kind is AmplifierKind.NONE:
        g = 1.0
    if eta == 1.0 and g == 1.0:
        e2 = erf(SQRT2 * alpha) ** 2
        q = math.exp(-4.0 * alpha * alpha)
        return lambda nu: e2 * nu / (1.0 + nu * q)
    if eta == 1.0:
        return lambda nu: first_order_correlation(alpha, g, nu)
    return lambda nu: inefficient_correlation(alpha, g, eta, nu)


# ---------------------------------------------------------------------------
# quadrature rules and detector weights


def _kernel_centre(cfg: ScenarioConfig) -> float:
    """Largest real part of any Gaussian centre appearing in the kernels."""
    a = cfg.alpha
    if cfg.kind is AmplifierKind.FULL and not (cfg.rotation is Rotation.IDEAL
                                                and cfg.ordering is Ordering.BEFORE):
        a *= math.exp(cfg.gain - 1.0)
    return a


def _panel_count(cfg: ScenarioConfig, thetas) -> tuple[float, int]:
    length = _kernel_centre(cfg) + TAIL
    width = 2.0
    if cfg.rotation is Rotation.EFFECTIVE:
        # oscillation frequency of the cross terms between chi_+ and chi_-
        scale = math.exp(cfg.gain - 1.0) if cfg.kind is AmplifierKind.FULL else 1.0
        omega = 4.0 * float(np.max(np.abs(thetas))) / cfg.alpha * scale
        if omega > 0:
            width = min(width, PANEL_PHASE / omega)
    return length, max(1, math.ceil(length / width))


@lru_cache(maxsize=64)
def _half_line_rule(length: float, panels: int, scale: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    x, w = _legendre(GL_ORDER)
    edges = np.linspace(0.0, length, panels + 1)
    if scale > 0.0:
        # graded breakpoints resolve a step of width ~scale at the origin
        extra = scale * 2.0 ** np.arange(-1, 4)
        edges = np.union1d(edges, extra[extra < edges[1]])
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


@lru_cache(maxsize=64)
def _detector_weights(length: float, panels: int, eta: float):
    """Nodes on [-L, L] and the weights for outcomes +1 and -1.

    With eta = 1 the weights are the quadrature weights restricted to each
    half line.  For eta < 1 the signal passes a beam splitter of amplitude
    transmission eta before an ideal detector; integrating out the vacuum
    port turns the sign step into Phi_+-(x) = (1 +- erf(sqrt2 eta x / r))/2,
    r^2 = 1 - eta^2, applied over the whole line.
    """
    r = math.sqrt(1.0 - eta * eta)
    h, w = _half_line_rule(length, panels, r / (SQRT2 * eta) if eta < 1.0 else 0.0)
    x = np.concatenate([h, -h])
    ww = np.concatenate([w, w])
    if eta == 1.0:
        plus = np.concatenate([w, np.zeros_like(w)])
    else:
        plus = ww * 0.5 * (1.0 + erf(SQRT2 * eta * x / r))
    W = np.stack([plus, ww - plus])
    W.setflags(write=False)
    x.setflags(write=False)
    return x, W


def detector_grid(cfg: ScenarioConfig, thetas=(0.0,)):
    length, panels = _panel_count(cfg, np.asarray(thetas, dtype=float))
    return _detector_weights(length, panels, float(cfg.eta))


# ---------------------------------------------------------------------------
# branch kernels on a grid, vectorized over angles


def _amp_before_coefficients(alpha: float, kind: AmplifierKind, eps: float):
    """2x2 matrix A with G|s alpha> projected on span{|alpha>, |-alpha>}.

    Column s holds the branch coefficients of the projection of the amplified
    input branch s.  Returns ``(A0, A1)`` so that A = A0 + eps A1 to first
    order; for the full amplifier A1 is None and A0 is exact.
    """
    s = math.exp(-2.0 * alpha * alpha)
    gram = np.array([[1.0, s], [s, 1.0]])
    if kind is AmplifierKind.FULL:
        G = math.exp(eps)
        rhs_same = math.exp(alpha * alpha * (G - 1.0))
        rhs_flip = math.exp(-alpha * alpha * (G + 1.0))
        rhs = np.array([[rhs_same, rhs_flip], [rhs_flip, rhs_same]])
        return np.linalg.solve(gram, rhs), None
    a1 = alpha * alpha * (1.0 + s * s) / (1.0 - s * s)
    b1 = -2.0 * alpha * alpha * s / (1.0 - s * s)
    return np.eye(2), np.array([[a1, b1], [b1, a1]])


def _ideal_kernels(x, thetas, cfg: ScenarioConfig, linear: bool):
    """Branch kernels (n_theta, 2, n_x) for ideal rotations."""
    alpha = cfg.alpha
    kind = cfg.kind
    eps = cfg.epsilon
    th = np.asarray(thetas, dtype=float)
    c, s = np.cos(th), np.sin(th)
    rot = np.stack([np.stack([c, s], -1), np.stack([s, -c], -1)], -2)   # (n, 2, 2)

    if cfg.ordering is Ordering.BEFORE and kind is not AmplifierKind.NONE:
        gauss = PI_M14 * np.stack([np.exp(-(x - alpha) ** 2), np.exp(-(x + alpha) ** 2)])
        A0, A1 = _amp_before_coefficients(alpha, kind, eps)
        if linear and A1 is None:
            A0, A1 = _amp_before_coefficients(alpha, AmplifierKind.FIRST_ORDER, eps)
        M0 = rot @ A0
        K0 = np.einsum("nis,ix->nsx", M0, gauss)
        if A1 is None:
            return K0
        K1 = np.einsum("nis,ix->nsx", rot @ A1, gauss)
        return (K0, K1) if linear else K0 + eps * K1

    centre = alpha
    if kind is AmplifierKind.FULL and not linear:
        centre = alpha * math.exp(eps)
    base = PI_M14 * np.stack([np.exp(-(x - centre) ** 2), np.exp(-(x + centre) ** 2)])
    K0 = np.einsum("nis,ix->nsx", rot, base)
    if kind is AmplifierKind.NONE or (kind is AmplifierKind.FULL and not linear):
        return (K0, np.zeros_like(K0)) if linear else K0
    poly = np.stack([2.0 * alpha * x - alpha * alpha, -2.0 * alpha * x - alpha * alpha])
    K1 = np.einsum("nis,ix->nsx", rot, base * poly)
    return (K0, K1) if linear else K0 + eps * K1


def _effective_kernels(x, thetas, cfg: ScenarioConfig, linear: bool):
    """Branch kernels (n_theta, 2, n_x) for effective rotations."""
    if cfg.ordering is Ordering.BEFORE and cfg.kind is not AmplifierKind.NONE:
        raise UnsupportedMethod(
            "amplification before effective rotations is only available via the oracle")
    kind = cfg.kind
    eps = cfg.epsilon
    scale = math.exp(eps) if (kind is AmplifierKind.FULL and not linear) else 1.0
    # A component z = a + ib with a = +-A has the kernel
    # exp(-(x - a)^2) exp(2ibx) exp(-iab): two real Gaussians shared by all
    # angles and a single complex exponential per angle.
    A = cfg.alpha * scale
    gp, gm = np.exp(-(x - A) ** 2), np.exp(-(x + A) ** 2)
    beta = thetas * scale / cfg.alpha
    p = np.exp(2j * beta[:, None] * x[None, :])
    pc = p.conj()
    # basis functions of the components (chi+, -chi+, -chi-, chi-), shape (n, 4, nx)
    basis = np.stack([gp * p, gm * pc, gm * p, gp * pc], axis=1)
    tw = thetas * scale * scale
    const = PI_M14 * np.exp(1j * np.stack([-tw, -tw, tw, tw], axis=-1))
    coefs, amps = zip(*(effective_coefficients(thetas, cfg.alpha, b) for b in (1, -1)))
    C = np.stack(coefs, axis=1) * const[:, None, :]          # (n, 2, 4)
    K0 = C @ basis
    if kind is AmplifierKind.NONE or (kind is AmplifierKind.FULL and not linear):
        return (K0, np.zeros_like(K0)) if linear else K0
    # first-order term: <x|n|z> carries the factor 2 z x - z^2
    z = np.stack(amps, axis=1) * scale
    K1 = x * ((2.0 * C * z) @ basis) - (C * z * z) @ basis
    return (K0, K1) if linear else K0 + eps * K1


def branch_kernels(x, thetas, cfg: ScenarioConfig, linear: bool = False):
    """Branch kernels K[t, a, i] = <x_i| U(theta_t) |a> with a = +alpha, -alpha.

    ``linear=True`` returns the pair (K0, K1) with K = K0 + (g-1) K1.
    """
    x = np.asarray(x, dtype=float)
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    if cfg.rotation is Rotation.IDEAL:
        return _ideal_kernels(x, thetas, cfg, linear)
    return _effective_kernels(x, thetas, cfg, linear)


# ---------------------------------------------------------------------------
# tables and correlations


def outcome_tables(thetas, cfg: ScenarioConfig, linear: bool = False):
    """Tables T[t, k, a, b] (or the pair (T0, T1) when ``linear``)."""
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    x, W = detector_grid(cfg, thetas)
    if linear:
        K0, K1 = branch_kernels(x, thetas, cfg, linear=True)
        T0 = _weighted_gram(W, K0, K0)
        cross = _weighted_gram(W, K1, K0)
        return T0, cross + np.conj(np.swapaxes(cross, -1, -2))
    K = branch_kernels(x, thetas, cfg)
    return _weighted_gram(W, K, K)


def _weighted_gram(W, K, L):
    """T[t, k, a, b] = sum_x W[k, x] K[t, a, x] conj(L[t, b, x])."""
    KW = K[:, None, :, :] * W[None, :, None, :]
    return KW @ np.conj(np.swapaxes(L, -1, -2))[:, None]


def table_probabilities(TA, TB) -> np.ndarray:
    """Unnormalized quadrant table P[k, l] from two per-angle tables."""
    return np.einsum("...kab,...lab->...kl", TA, TB).real


def table_correlation(TA, TB):
    P = table_probabilities(TA, TB)
    return np.sum(SIGNS * P, axis=(-2, -1)) / np.sum(P, axis=(-2, -1))


def linear_table_correlation(TA0, TA1, TB0, TB1, eps: float):
    """First-order expansion in eps of the normalized correlation."""
    P0 = table_probabilities(TA0, TB0)
    P1 = table_probabilities(TA1, TB0) + table_probabilities(TA0, TB1)
    N0 = np.sum(SIGNS * P0, axis=(-2, -1))
    N1 = np.sum(SIGNS * P1, axis=(-2, -1))
    K0 = np.sum(P0, axis=(-2, -1))
    K1 = np.sum(P1, axis=(-2, -1))
    return N0 / K0 + eps * (N1 * K0 - N0 * K1) / (K0 * K0)


def joint_amplitude(xA: float, xB: float, theta_a: float, theta_b: float,
                    cfg: ScenarioConfig) -> complex:
    """sum_gamma K_gamma(xA, theta_a) K_gamma(xB, theta_b)."""
    ka = branch_kernels(np.array([xA]), [theta_a], cfg)[0, :, 0]
    kb = branch_kernels(np.array([xB]), [theta_b], cfg)[0, :, 0]
    return complex(np.sum(ka * kb))


def outcome_probabilities(theta_a: float, theta_b: float, cfg: ScenarioConfig,
                          method: Method | str = Method.QUADRATURE) -> OutcomeProbabilities:
    """Normalized joint table of the dichotomized homodyne outcomes."""
    method = Method(method)
    if method is Method.ORACLE:
        from .oracle import oracle_probabilities
        return OutcomeProbabilities(oracle_probabilities(theta_a, theta_b, cfg))
    if method is not Method.QUADRATURE:
        raise UnsupportedMethod(f"outcome table needs quadrature or oracle, got {method.value}")
    T = outcome_tables([theta_a, theta_b], cfg)
    P = table_probabilities(T[0], T[1])
    return OutcomeProbabilities(P / P.sum())


def correlation(theta_a: float, theta_b: float, cfg: ScenarioConfig,
                method: Method | str = Method.CLOSED) -> CorrelationValue:
    """Correlation sum_k P_kk - sum_{k!=l} P_kl for one pair of angles."""
    method = Method(method)
    if method is Method.CLOSED:
        f = closed_form_function(cfg)
        return CorrelationValue(float(f(math.cos(2.0 * (theta_a - theta_b)))), method)
    if method is Method.ORACLE:
        from .oracle import oracle_correlation
        return CorrelationValue(float(oracle_correlation(theta_a, theta_b, cfg)), method)
    if method is Method.LINEARIZED:
        T0, T1 = outcome_tables([theta_a, theta_b], cfg, linear=True)
        v = linear_table_correlation(T0[0], T1[0], T0[1], T1[1], cfg.epsilon)
        return CorrelationValue(float(v), method)
    T = outcome_tables([theta_a, theta_b], cfg)
    return CorrelationValue(float(table_correlation(T[0], T[1])), method)


def amp_before_rotation_state_check(alpha: float, g: float, theta_a: float,
                                    theta_b: float) -> float:
    """|C(g) - C(1)| with the first-order amplifier placed before ideal rotations.

    Both correlations come from the Fock-space oracle.
    """
    from .oracle import oracle_correlation
    amp = ScenarioConfig.make(alpha, g, "first-order", "ideal", "before")
    ref = ScenarioConfig.make(alpha, 1.0, "first-order", "ideal", "before")
    return abs(oracle_correlation(theta_a, theta_b, amp)
               - oracle_correlation(theta_a, theta_b, ref))
