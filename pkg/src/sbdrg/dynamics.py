"""Time-local equations of motion driven by a :class:`~sbdrg.flow.RateSchedule`.

Spin-boson (Bloch) form, with ``Delta(t)`` and ``gamma(t)`` from the flow::

    d<sx>/dt = -gamma (<sx> - 1)
    d<sy>/dt =  Delta <sz> - gamma <sy>
    d<sz>/dt = -Delta <sy>

Spontaneous-emission (Lindblad) form, in the rotated basis where
``<sz> = +1`` is the excited state::

    d<s+->/dt = (+-i Delta - gamma) <s+->
    d<sz>/dt  = -2 gamma (<sz> + 1)
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import curve_fit

from .errors import DomainError, FitError, NumericalError
from .flow import RateSchedule

__all__ = [
    "BlochState",
    "BlochTrajectory",
    "Component",
    "DampedCosineFit",
    "evolve_bloch",
    "evolve_se_lindblad",
    "fit_damped_cosine",
    "quality_factor",
    "DEFAULT_RTOL",
]

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-13


@dataclass(frozen=True)
class BlochState:
    sx: float = 0.0
    sy: float = 0.0
    sz: float = 1.0

    def __post_init__(self):
        for v in (self.sx, self.sy, self.sz):
            if not (math.isfinite(v) and -1.0 <= v <= 1.0):
                raise DomainError(f"Bloch components must lie in [-1, 1], got {self}")

    def as_array(self) -> np.ndarray:
        return np.array([self.sx, self.sy, self.sz])


EXCITED = BlochState(0.0, 0.0, 1.0)


class Component(str, enum.Enum):
    SX = "sx"
    SY = "sy"
    SZ = "sz"


@dataclass(frozen=True)
class BlochTrajectory:
    t: np.ndarray
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray
    schedule: RateSchedule = field(repr=False)
    rtol: float = DEFAULT_RTOL
    atol: float = DEFAULT_ATOL

    def __post_init__(self):
        if self.t[0] != 0 or np.any(np.diff(self.t) <= 0):
            raise DomainError("trajectory times must increase strictly from 0")

    def component(self, which) -> np.ndarray:
        return getattr(self, Component(which).value)

    def rates(self) -> tuple[np.ndarray, np.ndarray]:
        """Schedule values ``(Delta(t), gamma(t))`` on the output grid."""
        return self.schedule.sample(self.t)


def _output_grid(t_max: float, dt_out: float) -> np.ndarray:
    if not (t_max > 0 and dt_out > 0):
        raise DomainError("t_max and dt_out must be positive")
    n = int(math.floor(t_max / dt_out + 1e-9))
    t = np.arange(n + 1) * dt_out
    if t[-1] < t_max * (1 - 1e-12):
        t = np.append(t, t_max)
    return t


def _solve(fun, y0, t_eval, rtol, atol):
    sol = solve_ivp(fun, (0.0, t_eval[-1]), y0, method="DOP853", t_eval=t_eval, rtol=rtol, atol=atol)
    if not sol.success:
        raise NumericalError(f"time integration failed: {sol.message}")
    return sol.y


def evolve_bloch(
    schedule: RateSchedule,
    init: BlochState = EXCITED,
    t_max: float = 3000.0,
    dt_out: float = 1.0,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> BlochTrajectory:
    """Integrate the spin-boson Bloch equations with time-dependent rates.

    Uses DOP853 (explicit 8th order, adaptive) and resamples at ``dt_out``.
    """
    schedule.check_covers(t_max)
    t_eval = _output_grid(t_max, dt_out)

    def rhs(t, y):
        d, g = schedule(t)
        sx, sy, sz = y
        return (-g * (sx - 1.0), d * sz - g * sy, -d * sy)

    y = _solve(rhs, init.as_array(), t_eval, rtol, atol)
    return BlochTrajectory(t_eval, y[0], y[1], y[2], schedule, rtol, atol)


def evolve_se_lindblad(
    schedule: RateSchedule,
    init: BlochState = EXCITED,
    t_max: float = 200.0,
    dt_out: float = 0.5,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> BlochTrajectory:
    """Integrate the rotating-wave Lindblad equations with time-dependent rates.

    ``<s+>`` is carried as two real components; ``<sx> = 2 Re<s+>`` and
    ``<sy> = 2 Im<s+>``.
    """
    schedule.check_covers(t_max)
    t_eval = _output_grid(t_max, dt_out)

    def rhs(t, y):
        d, g = schedule(t)
        re, im, sz = y
        # d(s+)/dt = (i d - g) s+
        return (-g * re - d * im, d * re - g * im, -2.0 * g * (sz + 1.0))

    y0 = (init.sx / 2.0, init.sy / 2.0, init.sz)
    y = _solve(rhs, y0, t_eval, rtol, atol)
    return BlochTrajectory(t_eval, 2.0 * y[0], 2.0 * y[1], y[2], schedule, rtol, atol)


def quality_factor(delta: float, gamma: float) -> float:
    """Oscillation quality ``Delta / gamma``."""
    if not gamma > 0:
        raise DomainError(f"quality factor needs gamma > 0, got {gamma}")
    return delta / gamma


@dataclass(frozen=True)
class DampedCosineFit:
    amplitude: float
    delta: float
    gamma: float
    phase: float
    residual_norm: float
    overdamped: bool = False
    window: tuple[float, float] = (0.0, 0.0)

    @property
    def quality(self) -> float:
        return quality_factor(self.delta, self.gamma) if self.gamma > 0 else math.inf


def _damped_cosine(t, a, d, g, phi):
    return a * np.exp(-0.5 * g * t) * np.cos(d * t + phi)


def _exponential(t, a, g):
    return a * np.exp(-0.5 * g * t)


def fit_damped_cosine(
    traj: BlochTrajectory,
    component=Component.SZ,
    window: tuple[float, float] | None = None,
) -> DampedCosineFit:
    """Least-squares fit of ``A exp(-gamma t / 2) cos(Delta t + phi)``.

    The default window is the last 60% of the simulated span. If the signal
    never changes sign inside the window a pure exponential is fitted and the
    result is flagged overdamped.
    """
    y_all = traj.component(component)
    t_all = traj.t
    if window is None:
        window = (t_all[0] + 0.4 * (t_all[-1] - t_all[0]), t_all[-1])
    lo, hi = window
    mask = (t_all >= lo) & (t_all <= hi)
    t, y = t_all[mask], y_all[mask]
    if t.size < 8:
        raise FitError(f"fit window {window} holds only {t.size} samples")
    t0 = t[0]
    tt = t - t0

    sign = np.signbit(y)
    crossings = np.nonzero(sign[1:] != sign[:-1])[0]
    scale = float(np.max(np.abs(y)))
    if scale == 0.0:
        raise FitError("signal identically zero in the fit window")

    if crossings.size == 0:
        g0 = _log_slope_guess(tt, np.abs(y))
        try:
            popt, _ = curve_fit(_exponential, tt, y, p0=(y[0], g0), maxfev=20000)
        except (RuntimeError, ValueError) as exc:
            raise FitError(f"exponential fit failed: {exc}") from exc
        a, g = popt
        resid = float(np.linalg.norm(y - _exponential(tt, *popt)))
        return DampedCosineFit(
            amplitude=float(a) * math.exp(0.5 * g * t0),
            delta=0.0,
            gamma=abs(float(g)),
            phase=0.0,
            residual_norm=resid,
            overdamped=True,
            window=(float(lo), float(hi)),
        )

    if crossings.size < 6:
        raise FitError(
            f"fit window holds {crossings.size} sign changes (< 3 periods); widen it"
        )
    # interpolated zero crossings give the half period
    tz = tt[crossings] - y[crossings] * (tt[crossings + 1] - tt[crossings]) / (y[crossings + 1] - y[crossings])
    d0 = math.pi / float(np.mean(np.diff(tz)))
    peaks = [np.max(np.abs(y[a:b + 1])) for a, b in zip(crossings[:-1], crossings[1:])]
    peak_t = [tt[a + int(np.argmax(np.abs(y[a:b + 1])))] for a, b in zip(crossings[:-1], crossings[1:])]
    g0 = _log_slope_guess(np.array(peak_t), np.array(peaks))
    a0 = float(peaks[0]) * math.exp(0.5 * g0 * peak_t[0])
    phi0 = math.pi / 2 - d0 * tz[0]
    if y[crossings[0]] < 0:  # rising through zero: sine-like with negative sign
        phi0 += math.pi

    try:
        popt, _ = curve_fit(
            _damped_cosine, tt, y, p0=(a0, d0, g0, phi0),
            maxfev=50000, xtol=1e-14, ftol=1e-14, gtol=1e-14,
        )
    except (RuntimeError, ValueError) as exc:
        raise FitError(f"damped-cosine fit failed from guess Delta={d0:.4g}, gamma={g0:.4g}: {exc}") from exc
    a, d, g, phi = (float(x) for x in popt)
    resid = float(np.linalg.norm(y - _damped_cosine(tt, *popt)))
    if not np.isfinite(resid) or resid > 0.5 * float(np.linalg.norm(y)):
        raise FitError(f"fit did not converge: residual {resid:.3g} vs signal norm {np.linalg.norm(y):.3g}")
    if a < 0:
        a, phi = -a, phi + math.pi
    if d < 0:
        d, phi = -d, -phi
    # shift back to absolute time
    a *= math.exp(0.5 * g * t0)
    phi = math.remainder(phi - d * t0, 2 * math.pi)
    return DampedCosineFit(a, d, abs(g), phi, resid, False, (float(lo), float(hi)))


def _log_slope_guess(t, env) -> float:
    ok = env > 0
    if np.count_nonzero(ok) < 2:
        return 0.0
    slope = np.polyfit(t[ok], np.log(env[ok]), 1)[0]
    return max(-2.0 * float(slope), 0.0)
