"""Independent brute-force check of the correlators in a truncated number basis.

States are built mode by mode as Fock vectors, the two-mode homodyne
quadrant probabilities come from matrices

    Q+_{mn} = int_0^inf psi_m(x) psi_n(x) dx,   Q-_{mn} = (-1)^{m+n} Q+_{mn},

with psi_n the number-state wavefunctions for x = (a + a^dag)/2, and detector
loss is applied to these measurement operators in the Heisenberg picture.
Nothing here reuses the closed-form kernels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm
from scipy.sparse import diags
from scipy.sparse.linalg import expm_multiply

from .errors import TruncationTooSmall, ZeroNorm
from .kernels import AmplifierKind, AmplifierModel, ideal_rotation
from .scenario import Ordering, Rotation, ScenarioConfig
from .special_math import _legendre

SIGNS = np.array([[1.0, -1.0], [-1.0, 1.0]])


@dataclass(frozen=True)
class FockVector:
    """Single-mode state in the number basis (x = (a + a^dag)/2 convention)."""

    coeffs: np.ndarray

    @property
    def cutoff(self) -> int:
        return len(self.coeffs)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def tail_mass(self, k: int = 8) -> float:
        return float(np.sum(np.abs(self.coeffs[-k:]) ** 2))

    def overlap(self, other: "FockVector") -> complex:
        return complex(np.vdot(self.coeffs, other.coeffs))


@dataclass(frozen=True)
class TwoModeState:
    """Coefficients c[m, n] of sum c_mn |m>_A |n>_B."""

    coeffs: np.ndarray
    normalized: bool = True

    @property
    def cutoff(self) -> int:
        return self.coeffs.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))


def minimum_cutoff(beta: float) -> int:
    b = abs(beta)
    return math.ceil(b * b + 10.0 * b + 20.0)


def default_cutoff(cfg: ScenarioConfig, thetas=()) -> int:
    """ceil(b^2 + 10 b + 24) with b the largest amplitude met in the pipeline."""
    b = cfg.alpha
    if cfg.rotation is Rotation.EFFECTIVE and len(thetas):
        tmax = max(abs(t) for t in thetas)
        b = math.hypot(cfg.alpha, tmax / cfg.alpha)
    if cfg.kind is AmplifierKind.FULL:
        b *= math.exp(cfg.gain - 1.0)
    return math.ceil(b * b + 10.0 * b + 24.0)


def _log_factorial(n: int) -> np.ndarray:
    return np.array([math.lgamma(k + 1.0) for k in range(n)])


def coherent_fock(beta: complex, cutoff: int) -> FockVector:
    """e^{-|b|^2/2} b^n / sqrt(n!) built in log space."""
    if cutoff < minimum_cutoff(abs(beta)):
        raise TruncationTooSmall(
            f"cutoff {cutoff} < {minimum_cutoff(abs(beta))} needed for |beta|={abs(beta):.4g}")
    n = np.arange(cutoff)
    if beta == 0:
        c = (n == 0).astype(complex)
        return FockVector(c)
    r, phi = abs(beta), np.angle(beta)
    mag = np.exp(-0.5 * r * r + n * math.log(r) - 0.5 * _log_factorial(cutoff))
    return FockVector(mag * np.exp(1j * phi * n))


def amplifier_matrix(model: AmplifierModel, cutoff: int) -> np.ndarray:
    """Diagonal of the amplifier in the number basis."""
    n = np.arange(cutoff, dtype=float)
    kind = model.effective_kind
    if kind is AmplifierKind.FULL:
        return np.exp((model.gain - 1.0) * n)
    if kind is AmplifierKind.FIRST_ORDER:
        return 1.0 + (model.gain - 1.0) * n
    return np.ones(cutoff)


# ---------------------------------------------------------------------------
# effective rotation  V = K D(i theta/alpha) K,  K = exp(-i pi n^2 / 2)


def kerr_phase(cutoff: int) -> np.ndarray:
    """exp(-i pi n^2 / 2) = (-i)^(n^2 mod 4), exact in floating point."""
    n = np.arange(cutoff)
    return np.array([1, -1j, -1, 1j])[(n * n) % 4]


def _displacement_generator(beta: complex, dim: int):
    """Sparse beta a^dag - conj(beta) a."""
    s = np.sqrt(np.arange(1, dim))
    return diags([beta * s, -np.conj(beta) * s], [-1, 1], format="csc")


def _padding(beta: complex) -> int:
    b = abs(beta)
    return math.ceil(b * b + 10.0 * b + 40.0)


def apply_effective_rotation(vec: np.ndarray, theta: float, alpha: float) -> np.ndarray:
    """V(theta) applied to a Fock vector, displacement in a padded space."""
    n = len(vec)
    beta = 1j * theta / alpha
    dim = n + _padding(beta)
    v = np.zeros(dim, dtype=complex)
    v[:n] = vec
    k = kerr_phase(dim)
    v = k * expm_multiply(_displacement_generator(beta, dim), k * v)
    return v[:n]


def effective_rotation_matrix(theta: float, alpha: float, cutoff: int) -> np.ndarray:
    """Dense truncated V(theta) (columns exact up to the padding error)."""
    beta = 1j * theta / alpha
    dim = cutoff + _padding(beta)
    k = kerr_phase(dim)
    D = expm(_displacement_generator(beta, dim).toarray())
    return (k[:, None] * D * k[None, :])[:cutoff, :cutoff]


# ---------------------------------------------------------------------------
# homodyne measurement operators


def hermite_table(n_max: int, x) -> np.ndarray:
    """psi_n(x) for n < n_max by upward recurrence, shape (n_max, len(x))."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    psi = np.empty((n_max, len(x)))
    psi[0] = (2.0 / math.pi) ** 0.25 * np.exp(-x * x)
    if n_max > 1:
        psi[1] = 2.0 * x * psi[0]
    for n in range(2, n_max):
        psi[n] = (2.0 * x * psi[n - 1] - math.sqrt(n - 1.0) * psi[n - 2]) / math.sqrt(n)
    return psi


def homodyne_wavefunction(n: int, x):
    """<x|n> = (2/pi)^(1/4) (2^n n!)^(-1/2) H_n(sqrt2 x) e^{-x^2}."""
    if n < 0:
        raise ValueError("n must be >= 0")
    out = hermite_table(n + 1, x)[n]
    return float(out[0]) if np.ndim(x) == 0 else out


@lru_cache(maxsize=32)
def quadrant_matrix(cutoff: int) -> np.ndarray:
    """Q+_{mn} = int_0^inf psi_m psi_n dx."""
    length = math.sqrt(cutoff) + 8.0
    panels = math.ceil(length / 0.5)
    xg, wg = _legendre(40)
    edges = np.linspace(0.0, length, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    w = (half[:, None] * wg[None, :]).ravel()
    psi = hermite_table(cutoff, x)
    Q = (psi * w) @ psi.T
    Q.setflags(write=False)
    return Q


def loss_kraus(eta: float, cutoff: int) -> list[np.ndarray]:
    """E_j[n-j, n] = sqrt(C(n, j)) eta^(n-j) r^j for a beam splitter a -> eta a + r b."""
    r = math.sqrt(max(0.0, 1.0 - eta * eta))
    n = np.arange(cutoff)
    lf = _log_factorial(cutoff)
    ops = []
    for j in range(cutoff if r > 0 else 1):
        m = n[j:]
        logc = 0.5 * (lf[m] - lf[j] - lf[m - j])
        val = np.exp(logc + (m - j) * math.log(eta) + (j * math.log(r) if j else 0.0))
        E = np.zeros((cutoff, cutoff))
        E[m - j, m] = val
        ops.append(E)
    return ops


@lru_cache(maxsize=32)
def measurement_operators(cutoff: int, eta: float) -> tuple[np.ndarray, np.ndarray]:
    """(Q+, Q-) after detector loss, sum_j E_j^T Q E_j."""
    Qp = quadrant_matrix(cutoff)
    parity = (-1.0) ** np.arange(cutoff)
    Qm = Qp * np.outer(parity, parity)
    if eta < 1.0:
        Qp = sum(E.T @ Qp @ E for E in loss_kraus(eta, cutoff))
        Qm = sum(E.T @ Qm @ E for E in loss_kraus(eta, cutoff))
    return Qp, Qm


# ---------------------------------------------------------------------------
# state construction


def _branch_basis(alpha: float, cutoff: int) -> np.ndarray:
    return np.stack([coherent_fock(alpha, cutoff).coeffs,
                     coherent_fock(-alpha, cutoff).coeffs], axis=1)


def _project_on_span(B: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Coefficients of the orthogonal projection of v on the columns of B."""
    return np.linalg.solve(B.conj().T @ B, B.conj().T @ v)


def _mode_vectors(cfg: ScenarioConfig, theta: float, cutoff: int) -> list[np.ndarray]:
    """Final single-mode vectors for the input branches +alpha and -alpha."""
    alpha = cfg.alpha
    G = amplifier_matrix(cfg.amplifier, cutoff)
    B = _branch_basis(alpha, cutoff)
    out = []
    for s in range(2):
        v = B[:, s]
        if cfg.rotation is Rotation.IDEAL:
            R = ideal_rotation(theta)
            if cfg.ordering is Ordering.BEFORE:
                coef = _project_on_span(B, G * v)
                v = B @ (R @ coef)
            else:
                v = G * (B @ R[:, s])
        else:
            if cfg.ordering is Ordering.BEFORE:
                v = apply_effective_rotation(G * v, theta, alpha)
            else:
                v = G * apply_effective_rotation(v, theta, alpha)
        out.append(v)
    return out


def build_state(cfg: ScenarioConfig, theta_a: float, theta_b: float,
                cutoff: int | None = None, normalize: bool = True) -> TwoModeState:
    """(U_A x U_B)|alpha, alpha> + |-alpha, -alpha> in the number basis."""
    if cutoff is None:
        cutoff = default_cutoff(cfg, (theta_a, theta_b))
    va = _mode_vectors(cfg, theta_a, cutoff)
    vb = _mode_vectors(cfg, theta_b, cutoff)
    c = np.outer(va[0], vb[0]) + np.outer(va[1], vb[1])
    norm = np.linalg.norm(c)
    if not norm > 0:
        raise ZeroNorm("post-selected state has zero norm")
    if normalize:
        c = c / norm
    return TwoModeState(c, normalize)


def ecs_plus(alpha: float, cutoff: int) -> np.ndarray:
    """Unnormalized |alpha, alpha> + |-alpha, -alpha>."""
    B = _branch_basis(alpha, cutoff)
    return np.outer(B[:, 0], B[:, 0]) + np.outer(B[:, 1], B[:, 1])


def ecs_minus_prime(alpha: float, cutoff: int) -> np.ndarray:
    """Unnormalized |alpha, -alpha> - |-alpha, alpha>."""
    B = _branch_basis(alpha, cutoff)
    return np.outer(B[:, 0], B[:, 1]) - np.outer(B[:, 1], B[:, 0])


def lossy_density(state: TwoModeState, eta: float) -> np.ndarray:
    """Two-mode density operator rho[a, b, a', b'] after loss on both modes."""
    N = state.cutoff
    ops = loss_kraus(eta, N)
    rho = np.zeros((N, N, N, N), dtype=complex)
    for Ej in ops:
        left = Ej @ state.coeffs
        for Ek in ops:
            d = left @ Ek.T
            rho += np.einsum("ab,cd->abcd", d, d.conj())
    return rho


def state_probabilities(state: TwoModeState, eta: float = 1.0) -> np.ndarray:
    """Unnormalized quadrant table P[k, l] for a pure two-mode state."""
    Qp, Qm = measurement_operators(state.cutoff, float(eta))
    c = state.coeffs
    P = np.empty((2, 2))
    for k, QA in enumerate((Qp, Qm)):
        for l, QB in enumerate((Qp, Qm)):
            P[k, l] = np.real(np.trace(QA @ c @ QB.T @ c.conj().T))
    return P


def oracle_probabilities(theta_a: float, theta_b: float, cfg: ScenarioConfig,
                         cutoff: int | None = None) -> np.ndarray:
    state = build_state(cfg, theta_a, theta_b, cutoff)
    P = state_probabilities(state, cfg.eta)
    return P / P.sum()


def oracle_correlation(theta_a: float, theta_b: float, cfg: ScenarioConfig,
                       cutoff: int | None = None) -> float:
    P = oracle_probabilities(theta_a, theta_b, cfg, cutoff)
    return float(np.sum(SIGNS * P))
