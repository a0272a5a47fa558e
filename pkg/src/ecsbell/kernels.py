"""Closed-form amplitude kernels for rotated and amplified coherent branches.

Quadrature convention: x = (a + a^dag)/2, so a coherent state of real
amplitude a has wavefunction (2/pi)^(1/4) exp(-(x - a)^2).  The branch
kernels below carry a pi^(-1/4) prefactor instead; every downstream
probability is normalized per measurement setting, so the constant drops out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InvalidGain, ZeroAmplitude

PI_M14 = math.pi ** -0.25


class AmplifierKind(str, Enum):
    NONE = "none"
    FULL = "full"
    FIRST_ORDER = "first-order"


@dataclass(frozen=True)
class AmplifierModel:
    """Noiseless amplifier exp[(g-1) n] (FULL) or its expansion 1 + (g-1) n."""

    kind: AmplifierKind = AmplifierKind.NONE
    gain: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", AmplifierKind(self.kind))
        if not math.isfinite(self.gain) or self.gain < 1.0:
            raise InvalidGain(f"gain must be >= 1, got {self.gain}")

    @property
    def is_identity(self) -> bool:
        return self.kind is AmplifierKind.NONE or self.gain == 1.0

    @property
    def effective_kind(self) -> AmplifierKind:
        return AmplifierKind.NONE if self.is_identity else self.kind

    @property
    def epsilon(self) -> float:
        """g - 1, or 0 when the amplifier is switched off."""
        return 0.0 if self.is_identity else self.gain - 1.0


@dataclass(frozen=True)
class CoherentComponent:
    coefficient: complex
    amplitude: complex


def ideal_rotation(theta: float) -> np.ndarray:
    """Branch-coefficient map on (|a>, |-a>): [[cos, sin], [sin, -cos]]."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, s], [s, -c]])


def full_amp_amplitude(alpha: float, g: float) -> float:
    if g < 1:
        raise InvalidGain(f"gain must be >= 1, got {g}")
    return alpha * math.exp(g - 1.0)


def xi_kernel(y, branch: int, alpha: float, g: float):
    """exp(-(y -+ a)^2) [1 + (g-1)(+-2 a y - a^2)] for branch = +-1."""
    a = branch * alpha
    return np.exp(-(y - a) ** 2) * (1.0 + (g - 1.0) * (2.0 * a * y - alpha * alpha))


def gamma_branch(x, theta: float, alpha: float, g: float, branch: int):
    """<x| G R(theta) |branch*alpha> up to the pi^(-1/4) convention."""
    return PI_M14 * (xi_kernel(x, -branch, alpha, g) * np.sin(theta)
                     + branch * xi_kernel(x, branch, alpha, g) * np.cos(theta))


# ---------------------------------------------------------------------------
# effective rotations V(theta) = K D(i theta/alpha) K,  K = exp(-i pi n^2 / 2)


def effective_coefficients(theta, alpha: float, branch: int):
    """Coefficients and amplitudes of V(theta)|branch*alpha> as arrays.

    Returns ``(coef, amp)`` with a trailing axis of length 4 ordered as
    (chi_+, -chi_+, -chi_-, chi_-), chi_+- = alpha +- i theta/alpha.
    ``theta`` may be an array; the result broadcasts over it.
    """
    if alpha == 0:
        raise ZeroAmplitude("effective rotation needs alpha != 0")
    theta = np.asarray(theta, dtype=float)[..., None]
    chi_p = alpha + 1j * theta / alpha
    chi_m = alpha - 1j * theta / alpha
    ep, em = np.exp(1j * theta), np.exp(-1j * theta)
    if branch == 1:
        coef = np.concatenate([-0.5j * ep, 0.5 * ep, 0.5 * em, 0.5j * em], axis=-1)
    else:
        coef = np.concatenate([0.5 * ep, 0.5j * ep, -0.5j * em, 0.5 * em], axis=-1)
    amp = np.concatenate([chi_p, -chi_p, -chi_m, chi_m], axis=-1)
    return coef, amp


def effective_rotation_components(theta: float, alpha: float, branch: int) -> list[CoherentComponent]:
    """V(theta)|branch*alpha> as four displaced coherent components."""
    coef, amp = effective_coefficients(theta, alpha, branch)
    return [CoherentComponent(complex(c), complex(a)) for c, a in zip(coef, amp)]


def xi_complex_kernel(x, chi, g: float, branch: int):
    """exp(-(x -+ chi)^2) [1 + (g-1)(+-2 chi x - chi^2)], complex chi."""
    c = branch * chi
    return np.exp(-(x - c) ** 2) * (1.0 + (g - 1.0) * (2.0 * c * x - chi * chi))


def coherent_kernel(x, z, g: float = 1.0):
    """<x|(1 + (g-1) n)|z> for complex z, up to (2/pi)^(1/4).

    Unlike ``xi_complex_kernel`` this keeps the phase exp((z^2 - |z|^2)/2)
    of the coherent-state wavefunction, merged into one exponent so that
    large imaginary parts never overflow.
    """
    expo = -(x - z) ** 2 + 0.5 * (z * z - np.abs(z) ** 2)
    out = np.exp(expo)
    if g != 1.0:
        out = out * (1.0 + (g - 1.0) * (2.0 * z * x - z * z))
    return out


def pi_branch(x, theta, alpha: float, g: float, branch: int, *, full: bool = False):
    """<x| G V(theta) |branch*alpha> up to the pi^(-1/4) convention.

    ``full=True`` applies exp[(g-1) n] instead of its first-order expansion;
    the common factor exp((|z~|^2 - |z|^2)/2) is dropped since all four
    components share |z|.
    """
    coef, amp = effective_coefficients(theta, alpha, branch)
    x = np.asarray(x)[..., None]
    if full:
        k = coherent_kernel(x, amp * math.exp(g - 1.0))
    else:
        k = coherent_kernel(x, amp, g)
    return PI_M14 * np.sum(coef * k, axis=-1)
