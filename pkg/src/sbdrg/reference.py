"""Long-time reference values from the non-interacting blip approximation.

These are the standard literature closed forms, used only as a comparison
target::

    Delta_N = T_K [cos(pi a) Gamma(1 - 2a)]^(1 / (2 (1 - a)))
    gamma_N = 2 Delta_N sin(pi a / (2 (1 - a)))
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import gamma as gamma_fn

from .errors import DomainError
from .flow import kondo_scale

__all__ = ["NibaValues", "ComparisonRecord", "niba_parameters", "drg_vs_niba_report"]


@dataclass(frozen=True)
class NibaValues:
    delta_niba: float
    gamma_niba: float
    q_niba: float


def _renormalization_base(alpha: float) -> float:
    """``cos(pi a) Gamma(1 - 2a)``, with its limit pi/2 at a = 1/2."""
    eps = 0.5 - alpha
    if eps == 0:
        return math.pi / 2
    # cos(pi a) = sin(pi eps) keeps full precision near the Toulouse point
    return math.sin(math.pi * eps) * gamma_fn(2.0 * eps)


def niba_parameters(alpha: float, delta0: float, omega_c: float = 1.0) -> NibaValues:
    if not 0 < alpha <= 0.5:
        raise DomainError(f"NIBA reference needs 0 < alpha <= 1/2, got {alpha}")
    if not 0 < delta0 < omega_c:
        raise DomainError("NIBA reference assumes 0 < delta0 << omega_c")
    tk = kondo_scale(alpha, delta0, omega_c)
    delta = tk * _renormalization_base(alpha) ** (1.0 / (2.0 * (1.0 - alpha)))
    gamma = 2.0 * delta * math.sin(math.pi * alpha / (2.0 * (1.0 - alpha)))
    return NibaValues(delta, gamma, delta / gamma)


@dataclass(frozen=True)
class ComparisonRecord:
    """Relative differences ``(drg - niba) / niba``; ``tau = 1/gamma``."""

    delta_drg: float
    gamma_drg: float
    tau_drg: float
    q_drg: float
    niba: NibaValues
    rel_delta: float
    rel_tau: float
    rel_q: float
    tau_infinite: bool


def drg_vs_niba_report(delta_inf: float, gamma_inf: float, niba: NibaValues) -> ComparisonRecord:
    if not (math.isfinite(delta_inf) and math.isfinite(gamma_inf)):
        raise DomainError("DRG terminal values must be finite")
    tau_n = 1.0 / niba.gamma_niba
    if gamma_inf > 0:
        tau, q, infinite = 1.0 / gamma_inf, delta_inf / gamma_inf, False
    else:
        tau, q, infinite = math.inf, math.inf, True
    return ComparisonRecord(
        delta_drg=delta_inf,
        gamma_drg=gamma_inf,
        tau_drg=tau,
        q_drg=q,
        niba=niba,
        rel_delta=(delta_inf - niba.delta_niba) / niba.delta_niba,
        rel_tau=(tau - tau_n) / tau_n,
        rel_q=(q - niba.q_niba) / niba.q_niba,
        tau_infinite=infinite,
    )
