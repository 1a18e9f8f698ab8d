"""Exact spontaneous-emission dynamics from the survival-amplitude equation

    du/dt + i Delta0 u + 1/2 int_0^t mu(t - t') u(t') dt' = 0,   u(0) = 1,

plus extraction of the exact time-local rates ``-du/dt / u = gamma + i Delta``
and the Born-Markov baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .bath import CutoffShape, SpectralParams, memory_kernel, spectral_density
from .errors import DomainError, NumericalError, UnsupportedConfigurationError
from .flow import RateSchedule

__all__ = [
    "AmplitudeSeries",
    "RatePair",
    "RateSeries",
    "solve_volterra",
    "extract_rates",
    "long_time_rates",
    "born_markov_rates",
]


@dataclass(frozen=True)
class AmplitudeSeries:
    """Complex amplitude ``u(t_n)`` on the uniform grid ``t_n = n dt``."""

    dt: float
    u: np.ndarray
    params: SpectralParams | None = None
    delta0: float | None = None
    source: str = "volterra"
    norm_drift: float | None = None
    du: np.ndarray | None = None  # du/dt on the same grid, when the solver knows it

    def __post_init__(self):
        for name in ("u", "du"):
            v = getattr(self, name)
            if v is None:
                continue
            v = np.asarray(v, dtype=complex)
            v.flags.writeable = False
            object.__setattr__(self, name, v)
        if self.du is not None and self.du.shape != self.u.shape:
            raise DomainError("du must match u in shape")

    @property
    def t(self) -> np.ndarray:
        return np.arange(self.u.size) * self.dt

    @property
    def t_max(self) -> float:
        return (self.u.size - 1) * self.dt

    def population(self) -> np.ndarray:
        """``<sz> = 2 |u|^2 - 1`` in the rotated (excited = +1) basis."""
        return 2.0 * np.abs(self.u) ** 2 - 1.0

    def resample(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.interp(t, self.t, self.u.real) + 1j * np.interp(t, self.t, self.u.imag)


@dataclass(frozen=True)
class RatePair:
    delta: float
    gamma: float


@dataclass(frozen=True)
class RateSeries:
    """Instantaneous ``Delta(t)``, ``gamma(t)``; ``gamma`` may dip below zero."""

    t: np.ndarray
    delta: np.ndarray
    gamma: np.ndarray
    truncated: bool = False

    def as_schedule(self) -> RateSchedule:
        return RateSchedule(
            t=self.t, delta=self.delta, gamma=self.gamma,
            head=(float(self.delta[0]), float(self.gamma[0])), tail=None, log_time=False,
        )


def _check_kernel(p: SpectralParams) -> None:
    if not p.is_ohmic or p.cutoff_shape is not CutoffShape.EXPONENTIAL:
        raise UnsupportedConfigurationError(
            "exact spontaneous-emission solver needs the Ohmic exponential-cutoff kernel"
        )


def solve_volterra(p: SpectralParams, delta0: float, dt: float = 0.01, t_max: float = 200.0) -> AmplitudeSeries:
    """Second-order product-trapezoidal solution on a uniform grid.

    Both the outer time integral and the memory convolution use the
    trapezoidal rule; the step is implicit in ``u_{n+1}`` only through a
    scalar, so each step costs one dot product over the history.
    """
    _check_kernel(p)
    if not 0 < dt <= 0.01 / p.omega_c * (1 + 1e-12):
        raise DomainError(f"dt must lie in (0, 0.01/omega_c], got {dt}")
    if not t_max > 0:
        raise DomainError("t_max must be positive")
    n = int(round(t_max / dt))
    mu = memory_kernel(np.arange(n + 1) * dt, p)
    mu_rev = np.ascontiguousarray(mu[::-1])  # mu_rev[n - m] == mu[m]
    u = np.empty(n + 1, dtype=complex)
    du = np.empty(n + 1, dtype=complex)
    u[0] = 1.0
    du[0] = -1j * delta0
    mem = 0.0 + 0.0j  # memory integral at the current step
    denom = 1.0 + 0.5 * dt * (1j * delta0 + 0.25 * dt * mu[0])
    for m in range(n):
        k = m + 1
        # trapezoid for int_0^{t_k} mu(t_k - t') u(t') dt', minus the unknown u_k term
        known = dt * (0.5 * mu[k] * u[0] + np.dot(mu_rev[n - k + 1:n], u[1:k]))
        rhs = u[m] - 0.5 * dt * (1j * delta0 * u[m] + 0.5 * (mem + known))
        u[k] = rhs / denom
        mem = known + 0.5 * dt * mu[0] * u[k]
        du[k] = -1j * delta0 * u[k] - 0.5 * mem
    return AmplitudeSeries(dt=dt, u=u, params=p, delta0=delta0, source="volterra", du=du)


def extract_rates(series: AmplitudeSeries, floor: float = 1e-12) -> RateSeries:
    """``gamma(t) = -Re(u'/u)`` and ``Delta(t) = -Im(u'/u)``.

    ``u'`` comes from the amplitude equation itself when the series carries
    it, otherwise from second-order centered differences.

    Samples from the first point where ``|u| <= floor`` onward are dropped and
    the result is flagged as truncated.
    """
    u = series.u
    small = np.nonzero(np.abs(u) <= floor)[0]
    truncated = small.size > 0
    stop = int(small[0]) if truncated else u.size
    if stop < 3:
        raise NumericalError("amplitude underflows before three samples are available")
    if series.du is not None:
        du = series.du[:stop]
    else:
        du = np.gradient(u[:stop], series.dt, edge_order=2)
    r = -du / u[:stop]
    return RateSeries(t=series.t[:stop], delta=r.imag.copy(), gamma=r.real.copy(), truncated=truncated)


def long_time_rates(rates: RateSeries, fraction: float = 0.2) -> RatePair:
    """Mean of the last ``fraction`` of the extracted rates."""
    n = rates.t.size
    start = min(n - 1, int(math.floor((1.0 - fraction) * n)))
    return RatePair(float(np.mean(rates.delta[start:])), float(np.mean(rates.gamma[start:])))


def born_markov_rates(p: SpectralParams, delta0: float) -> RatePair:
    """Markov limit of the memory term, ``K(D0) = int_0^inf mu(tau) e^{i D0 tau} dtau``.

    ``gamma_BM = Re K / 2`` and ``Delta_BM = D0 + Im K / 2`` where
    ``Re K = J(D0)`` and ``Im K = -(1/pi) PV int J(w) / (w - D0) dw``; the
    principal value is taken with a Cauchy-weighted quadrature.
    """
    _check_kernel(p)
    if not delta0 > 0:
        raise DomainError("delta0 must be positive")
    if p.alpha == 0:
        return RatePair(delta0, 0.0)

    def j(w):
        return spectral_density(w, p)

    upper = max(4.0 * delta0, 60.0 * p.omega_c)
    pv, err1, info1 = quad(j, 0.0, upper, weight="cauchy", wvar=delta0, limit=500,
                           epsabs=0.0, epsrel=1e-12, full_output=True)[:3]
    tail, err2 = quad(lambda w: j(w) / (w - delta0), upper, np.inf, limit=200, epsabs=0.0, epsrel=1e-10)[:2]
    total = pv + tail
    if not math.isfinite(total) or abs(err1) + abs(err2) > 1e-8 * max(1.0, abs(total)):
        raise NumericalError(f"principal-value quadrature did not converge (err {err1:.2e}, {err2:.2e})")
    re_k = j(delta0)
    im_k = -total / math.pi
    return RatePair(delta=delta0 + 0.5 * im_k, gamma=0.5 * re_k)
