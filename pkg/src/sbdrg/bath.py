"""Bosonic bath: spectral density, thermal occupation, memory kernel and a
discretized-mode representation.

All frequencies are measured in units of the cutoff ``omega_c`` by convention,
but every function takes ``omega_c`` explicitly so other unit choices work.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UnsupportedConfigurationError

__all__ = [
    "CutoffShape",
    "SpectralParams",
    "DiscreteBath",
    "spectral_density",
    "bath_occupation",
    "memory_kernel",
    "discretize_bath",
]


class CutoffShape(str, enum.Enum):
    EXPONENTIAL = "exp"
    SHARP = "sharp"


@dataclass(frozen=True)
class SpectralParams:
    """Bath definition.

    Parameters
    ----------
    alpha : float
        Dimensionless system-bath coupling, ``alpha >= 0``.
    s : float
        Spectral exponent. Only ``s = 1`` (Ohmic) is supported by the flow
        and kernel routines; other values are stored but rejected there.
    omega_c : float
        Cutoff frequency.
    cutoff_shape : CutoffShape
        ``EXPONENTIAL`` (smooth ``exp(-w/wc)``) or ``SHARP`` (step at ``wc``).
    temperature : float
        Bath temperature in energy units (``k_B = hbar = 1``).
    """

    alpha: float
    s: float = 1.0
    omega_c: float = 1.0
    cutoff_shape: CutoffShape = CutoffShape.EXPONENTIAL
    temperature: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "cutoff_shape", CutoffShape(self.cutoff_shape))
        if not (math.isfinite(self.alpha) and self.alpha >= 0):
            raise DomainError(f"alpha must be finite and >= 0, got {self.alpha}")
        if not (math.isfinite(self.omega_c) and self.omega_c > 0):
            raise DomainError(f"omega_c must be > 0, got {self.omega_c}")
        if not (math.isfinite(self.temperature) and self.temperature >= 0):
            raise DomainError(f"temperature must be >= 0, got {self.temperature}")
        if not (math.isfinite(self.s) and self.s > 0):
            raise DomainError(f"s must be > 0, got {self.s}")

    @property
    def is_ohmic(self) -> bool:
        return self.s == 1.0

    def require_ohmic(self, what: str) -> None:
        if not self.is_ohmic:
            raise UnsupportedConfigurationError(f"{what} supports only the Ohmic bath (s=1), got s={self.s}")


@dataclass(frozen=True)
class DiscreteBath:
    """Finite set of bath modes with ``J(w) ~ pi * sum_k g_k^2 delta(w - w_k)``."""

    omega: np.ndarray
    g: np.ndarray
    omega_max: float

    def __post_init__(self):
        omega = np.asarray(self.omega, dtype=float)
        g = np.asarray(self.g, dtype=float)
        if omega.ndim != 1 or omega.shape != g.shape or omega.size == 0:
            raise DomainError("omega and g must be equal-length non-empty 1-d arrays")
        if np.any(omega <= 0) or np.any(np.diff(omega) <= 0):
            raise DomainError("mode frequencies must be positive and strictly increasing")
        if not np.all(np.isfinite(g)):
            raise DomainError("couplings must be finite")
        omega.flags.writeable = False
        g.flags.writeable = False
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "g", g)

    @property
    def count(self) -> int:
        return self.omega.size

    @property
    def spacing(self) -> float | None:
        """Uniform grid spacing, or ``None`` if the grid is not uniform."""
        if self.count < 2:
            return None
        d = np.diff(self.omega)
        if np.allclose(d, d[0], rtol=1e-9, atol=0):
            return float(d[0])
        return None


def spectral_density(omega, p: SpectralParams):
    """Bath spectral function ``J(omega)``.

    Exponential cutoff: ``2 pi alpha wc^(1-s) w^s exp(-w/wc)``.
    Sharp cutoff: ``2 pi alpha wc^(1-s) w^s`` for ``w < wc``, else 0.

    Accepts scalars or arrays; scalars in, float out.
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0) or np.any(np.isnan(w)):
        raise DomainError("spectral_density requires omega >= 0")
    prefactor = 2.0 * math.pi * p.alpha * p.omega_c ** (1.0 - p.s)
    if p.cutoff_shape is CutoffShape.EXPONENTIAL:
        out = prefactor * w**p.s * np.exp(-w / p.omega_c)
    else:
        out = np.where(w < p.omega_c, prefactor * w**p.s, 0.0)
    if np.ndim(out) == 0:
        return float(out)
    return out


def bath_occupation(omega, temperature):
    """Bose-Einstein occupation ``1 / (exp(w/T) - 1)``; exactly 0 at ``T = 0``."""
    w = np.asarray(omega, dtype=float)
    if np.any(~(w > 0)):
        raise DomainError("bath_occupation requires omega > 0")
    if temperature < 0:
        raise DomainError("temperature must be >= 0")
    if temperature == 0:
        out = np.zeros_like(w)
    else:
        with np.errstate(over="ignore"):
            out = 1.0 / np.expm1(w / temperature)
    if np.ndim(out) == 0:
        return float(out)
    return out


def memory_kernel(tau, p: SpectralParams):
    """Bath correlation ``mu(tau) = (1/pi) int J(w) exp(-i w tau) dw``.

    For the Ohmic exponential-cutoff bath the transform is elementary,
    ``mu(tau) = 2 alpha wc^2 / (1 + i wc tau)^2``, valid for either sign of
    ``tau`` (``mu(-tau) = conj(mu(tau))``).
    """
    p.require_ohmic("memory_kernel")
    if p.cutoff_shape is not CutoffShape.EXPONENTIAL:
        raise UnsupportedConfigurationError("memory_kernel requires the exponential cutoff")
    tau = np.asarray(tau, dtype=float)
    out = 2.0 * p.alpha * p.omega_c**2 / (1.0 + 1j * p.omega_c * tau) ** 2
    if np.ndim(out) == 0:
        return complex(out)
    return out


def discretize_bath(p: SpectralParams, n_modes: int, omega_max: float) -> DiscreteBath:
    """Midpoint linear grid ``w_k = (k - 1/2) dw`` with ``g_k = sqrt(J(w_k) dw / pi)``."""
    if int(n_modes) != n_modes or n_modes < 1:
        raise DomainError(f"n_modes must be a positive integer, got {n_modes}")
    if not omega_max > 0:
        raise DomainError(f"omega_max must be > 0, got {omega_max}")
    n_modes = int(n_modes)
    dw = omega_max / n_modes
    omega = (np.arange(1, n_modes + 1) - 0.5) * dw
    g = np.sqrt(spectral_density(omega, p) * dw / math.pi)
    return DiscreteBath(omega=omega, g=g, omega_max=float(omega_max))
