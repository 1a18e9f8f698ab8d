"""Brute-force check of the spontaneous-emission amplitude with a finite bath.

In the one-excitation sector the rotating-wave Hamiltonian is an arrow matrix
in the basis ``{|e,0>, |g,1_k>}``::

    i dc_e/dt = D0 c_e + sum_k kappa_k c_k
    i dc_k/dt = w_k c_k + kappa_k c_e

Eliminating ``c_k`` gives the amplitude equation with kernel
``sum_k kappa_k^2 exp(-i w_k tau)``; matching the coefficient 1/2 in front of
``mu = sum_k g_k^2 exp(-i w_k tau)`` fixes ``kappa_k = g_k / sqrt(2)``.
The energy origin is placed on the ground state so ``c_e`` and ``u`` share
phase conventions. Evolution is exact: the Hermitian matrix is diagonalized
once and every output time is a pure phase rotation, so the norm is preserved
to roundoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh

from .bath import DiscreteBath
from .errors import DomainError, NumericalError, StabilityError, UnsupportedConfigurationError
from .se_exact import AmplitudeSeries

__all__ = [
    "SingleExcitationState",
    "evolve_discrete_bath",
    "recurrence_time",
    "oracle_couplings",
]

NORM_TOLERANCE = 1e-10


@dataclass(frozen=True)
class SingleExcitationState:
    c_e: complex
    c_k: np.ndarray

    @property
    def norm(self) -> float:
        return abs(self.c_e) ** 2 + float(np.sum(np.abs(self.c_k) ** 2))


def oracle_couplings(bath: DiscreteBath) -> np.ndarray:
    return bath.g / math.sqrt(2.0)


def _hamiltonian(bath: DiscreteBath, delta0: float) -> np.ndarray:
    n = bath.count
    h = np.zeros((n + 1, n + 1))
    h[0, 0] = delta0
    kappa = oracle_couplings(bath)
    h[0, 1:] = kappa
    h[1:, 0] = kappa
    h[np.arange(1, n + 1), np.arange(1, n + 1)] = bath.omega
    return h


class _Propagator:
    def __init__(self, bath: DiscreteBath, delta0: float):
        self.energies, self.vectors = eigh(_hamiltonian(bath, delta0))
        # initial state |e,0> expressed in the eigenbasis
        self.weights = self.vectors[0, :].astype(complex)

    def state(self, t: float) -> SingleExcitationState:
        c = self.vectors @ (np.exp(-1j * self.energies * t) * self.weights)
        return SingleExcitationState(c_e=complex(c[0]), c_k=c[1:])

    def excited_amplitude(self, t: np.ndarray, chunk: int = 1024) -> np.ndarray:
        p = np.abs(self.weights) ** 2
        out = np.empty(t.size, dtype=complex)
        for s in range(0, t.size, chunk):
            out[s:s + chunk] = np.exp(-1j * np.outer(t[s:s + chunk], self.energies)) @ p
        return out


def evolve_discrete_bath(bath: DiscreteBath, delta0: float, dt: float, t_max: float,
                         norm_checks: int = 16) -> AmplitudeSeries:
    """Excited-state amplitude ``c_e(t)`` on ``t_n = n dt`` with ``c_e(0) = 1``.

    ``dt`` must resolve the fastest mode (``dt <= 0.1 / omega_max``). The
    maximal norm deviation over ``norm_checks`` evenly spaced times is
    stored in ``norm_drift``.
    """
    fastest = max(float(bath.omega[-1]), abs(delta0), bath.omega_max)
    if not dt > 0:
        raise DomainError("dt must be positive")
    if dt > 0.1 / fastest * (1 + 1e-12):
        raise StabilityError(f"dt={dt} does not resolve the fastest mode (need dt <= {0.1 / fastest:.4g})")
    n = int(round(t_max / dt))
    t = np.arange(n + 1) * dt
    prop = _Propagator(bath, delta0)
    ce = prop.excited_amplitude(t)
    checks = np.linspace(0.0, t[-1], max(2, norm_checks))
    drift = max(abs(prop.state(tc).norm - 1.0) for tc in checks)
    if drift > NORM_TOLERANCE:
        raise NumericalError(f"oracle norm drift {drift:.3e} exceeds {NORM_TOLERANCE:g}")
    return AmplitudeSeries(dt=dt, u=ce, params=None, delta0=delta0, source="oracle", norm_drift=drift)


def recurrence_time(bath: DiscreteBath) -> float:
    """``2 pi / dw``: after this the finite bath revives the excitation."""
    if bath.count < 2:
        raise DomainError("recurrence time needs at least two modes")
    dw = bath.spacing
    if dw is None:
        raise UnsupportedConfigurationError("recurrence time is defined only for a uniform grid")
    return 2.0 * math.pi / dw
