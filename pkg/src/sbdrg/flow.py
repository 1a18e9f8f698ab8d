"""Flow of the two-level-system frequency and decay rate under bath-mode removal.

The running cutoff ``Lambda`` is lowered from ``lambda_start``; each removed
band ``|dLambda|`` updates the parameters as ``P <- P + rhs_P * |dLambda|``.
Real time enters only through the map ``t = eta / Lambda``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .bath import CutoffShape, SpectralParams, spectral_density
from .errors import (
    DomainError,
    FixedPointNotFoundError,
    FlowConvergenceError,
    ScheduleError,
    SingularFlowError,
    UnsupportedConfigurationError,
)

__all__ = [
    "FlowModel",
    "FlowState",
    "FlowConfig",
    "FlowTrajectory",
    "RateSchedule",
    "flow_rhs_sb",
    "flow_rhs_se",
    "integrate_flow",
    "kondo_scale",
    "power_law_delta",
    "fixed_point_scale",
    "to_time_schedule",
    "DEFAULT_SEED_RATIO",
]

# gamma = 0 is a fixed point of the multiplicative gamma flow, so a seed is needed.
DEFAULT_SEED_RATIO = 1e-6


class FlowModel(str, enum.Enum):
    SPIN_BOSON = "sb"
    SPONTANEOUS_EMISSION = "se"


@dataclass(frozen=True)
class FlowState:
    Lambda: float
    delta: float
    gamma: float

    def __post_init__(self):
        if not all(math.isfinite(x) for x in (self.Lambda, self.delta, self.gamma)):
            raise DomainError("flow state must be finite")
        if self.Lambda <= 0 or self.delta <= 0 or self.gamma < 0:
            raise DomainError(f"invalid flow state {self}")


def _thermal_factor(lam: float, temperature: float) -> float:
    # 2 n_b + 1 = coth(w / 2T)
    if temperature == 0:
        return 1.0
    x = lam / (2.0 * temperature)
    if x > 350:
        return 1.0
    return 1.0 / math.tanh(x)


def _sb_increments(lam, delta, gamma, j, thermal):
    a = delta * delta - lam * lam
    den = a * a + gamma * gamma * lam * lam
    if den == 0.0:
        raise SingularFlowError(
            f"singular flow at Lambda={lam:.6g}: Delta == Lambda with gamma == 0; "
            "use a smaller step or a nonzero gamma_seed"
        )
    jt = j * thermal
    return delta / (2.0 * math.pi) * jt * a / den, delta * delta / math.pi * jt * gamma / den


def _se_increments(lam, delta, gamma, j):
    x = delta - lam
    den = x * x + gamma * gamma
    if den == 0.0:
        raise SingularFlowError(
            f"singular flow at Lambda={lam:.6g}: Delta == Lambda with gamma == 0; "
            "use a smaller step or a nonzero gamma_seed"
        )
    c = j / (4.0 * math.pi * den)
    return c * x, c * gamma


def flow_rhs_sb(state: FlowState, p: SpectralParams) -> tuple[float, float]:
    """Per-removed-band increments ``(dDelta, dgamma)`` of the spin-boson flow.

    With ``D = (Delta^2 - Lambda^2)^2 + gamma^2 Lambda^2``::

        dDelta = Delta/(2 pi) J(Lambda) (2 n_b + 1) (Delta^2 - Lambda^2) / D
        dgamma = Delta^2/pi  J(Lambda) (2 n_b + 1) gamma / D

    Lowering the cutoff by ``|dLambda|`` adds ``increment * |dLambda|``.
    """
    p.require_ohmic("flow_rhs_sb")
    j = spectral_density(state.Lambda, p)
    return _sb_increments(state.Lambda, state.delta, state.gamma, j, _thermal_factor(state.Lambda, p.temperature))


def flow_rhs_se(state: FlowState, p: SpectralParams) -> tuple[float, float]:
    """Per-removed-band increments of the spontaneous-emission (rotating-wave) flow.

    ``dDelta = J/(4 pi) (Delta - Lambda) / ((Delta - Lambda)^2 + gamma^2)`` and
    ``dgamma = J/(4 pi) gamma / ((Delta - Lambda)^2 + gamma^2)``.
    """
    p.require_ohmic("flow_rhs_se")
    j = spectral_density(state.Lambda, p)
    return _se_increments(state.Lambda, state.delta, state.gamma, j)


def kondo_scale(alpha: float, delta0: float, omega_c: float = 1.0) -> float:
    """``T_K = Delta0 (Delta0 / omega_c)^(alpha / (1 - alpha))``."""
    if not 0 <= alpha < 1:
        raise DomainError(f"kondo_scale requires 0 <= alpha < 1, got {alpha}")
    return delta0 * (delta0 / omega_c) ** (alpha / (1.0 - alpha))


def power_law_delta(lam, alpha: float, delta0: float, omega_c: float = 1.0):
    """Scaling-limit solution ``Delta0 (Lambda/omega_c)^alpha`` of the gamma-free flow."""
    return delta0 * (np.asarray(lam, dtype=float) / omega_c) ** alpha


@dataclass(frozen=True)
class FlowConfig:
    """Everything :func:`integrate_flow` needs.

    ``None`` for ``gamma_seed``, ``lambda_start`` or ``lambda_min`` selects the
    default; the resolved value is stored back on the instance.

    The default ``lambda_min`` is ``min(delta0, T_K) / 100`` for the spin-boson
    model (so the flow passes its fixed point even near ``alpha = 1/2``) and
    ``delta0 / 100`` for the spontaneous-emission model.
    """

    params: SpectralParams
    delta0: float
    gamma_seed: float | None = None
    lambda_start: float | None = None
    lambda_min: float | None = None
    eta: float = 1.0
    model: FlowModel = FlowModel.SPIN_BOSON
    max_rel_change: float = 1e-3
    max_rel_lambda_step: float = 1e-3
    rtol: float = 1e-10

    def __post_init__(self):
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        set_("model", FlowModel(self.model))
        p = self.params
        if not (math.isfinite(self.delta0) and self.delta0 > 0):
            raise DomainError(f"delta0 must be > 0, got {self.delta0}")
        if self.gamma_seed is None:
            # without coupling there is nothing to seed
            set_("gamma_seed", DEFAULT_SEED_RATIO * self.delta0 if p.alpha > 0 else 0.0)
        if self.lambda_start is None:
            set_("lambda_start", 10.0 * p.omega_c)
        if self.lambda_min is None:
            scale = self.delta0
            if self.model is FlowModel.SPIN_BOSON and p.alpha < 1:
                scale = min(scale, kondo_scale(p.alpha, self.delta0, p.omega_c))
            set_("lambda_min", scale / 100.0)
        if not (math.isfinite(self.gamma_seed) and self.gamma_seed >= 0):
            raise DomainError(f"gamma_seed must be >= 0, got {self.gamma_seed}")
        if not (self.lambda_start > self.lambda_min > 0):
            raise DomainError("need lambda_start > lambda_min > 0")
        if not 0 < self.eta <= 1:
            raise DomainError(f"eta must lie in (0, 1], got {self.eta}")
        for name in ("max_rel_change", "max_rel_lambda_step", "rtol"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise DomainError(f"{name} must lie in (0, 1), got {v}")

    def halved(self) -> "FlowConfig":
        """Same flow with both step-control bounds halved."""
        return FlowConfig(
            params=self.params, delta0=self.delta0, gamma_seed=self.gamma_seed,
            lambda_start=self.lambda_start, lambda_min=self.lambda_min, eta=self.eta,
            model=self.model, max_rel_change=self.max_rel_change / 2,
            max_rel_lambda_step=self.max_rel_lambda_step / 2, rtol=self.rtol / 2,
        )


@dataclass(frozen=True)
class FlowTrajectory:
    """Samples of the flow, ``Lambda`` strictly decreasing from ``lambda_start``."""

    Lambda: np.ndarray
    delta: np.ndarray
    gamma: np.ndarray
    config: FlowConfig = field(repr=False)

    def __post_init__(self):
        for name in ("Lambda", "delta", "gamma"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if np.any(np.diff(self.Lambda) >= 0):
            raise DomainError("trajectory Lambda must be strictly decreasing")

    @property
    def delta_inf(self) -> float:
        return float(self.delta[-1])

    @property
    def gamma_inf(self) -> float:
        return float(self.gamma[-1])

    @property
    def states(self) -> list[FlowState]:
        return [FlowState(*row) for row in zip(self.Lambda, self.delta, self.gamma)]

    def interpolate(self, lam):
        """``(Delta, gamma)`` at ``lam``: linear in ``ln Lambda`` (``ln gamma`` when positive).

        Outside the sampled range the end values are held.
        """
        x = -np.log(np.asarray(lam, dtype=float))
        xs = -np.log(self.Lambda)
        d = np.interp(x, xs, self.delta)
        if np.all(self.gamma > 0):
            g = np.exp(np.interp(x, xs, np.log(self.gamma)))
        else:
            g = np.interp(x, xs, self.gamma)
        if np.ndim(d) == 0:
            return float(d), float(g)
        return d, g


# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
_E = tuple(b5 - b4 for b5, b4 in zip(_B5, _B4))


def _make_segment_rhs(cfg: FlowConfig, inside_sharp: bool):
    """Scalar RHS in ``v = -ln Lambda``: ``dP/dv = Lambda * increment``."""
    p = cfg.params
    pref = 2.0 * math.pi * p.alpha * p.omega_c ** (1.0 - p.s)
    wc = p.omega_c
    temp = p.temperature
    sharp = p.cutoff_shape is CutoffShape.SHARP
    se = cfg.model is FlowModel.SPONTANEOUS_EMISSION

    def rhs(v, d, g):
        lam = math.exp(-v)
        if sharp:
            j = pref * lam if inside_sharp else 0.0
        else:
            j = pref * lam * math.exp(-lam / wc)
        if se:
            dd, dg = _se_increments(lam, d, g, j)
        else:
            dd, dg = _sb_increments(lam, d, g, j, _thermal_factor(lam, temp))
        return lam * dd, lam * dg

    return rhs


def _integrate_segment(rhs, v0, v1, d, g, cfg: FlowConfig, out):
    """Adaptive DP54 from ``v0`` to ``v1``; appends accepted ``(v, d, g)`` to ``out``."""
    hmax = cfg.max_rel_lambda_step
    rel = cfg.max_rel_change
    rtol = cfg.rtol
    v = v0
    h = hmax
    k1 = rhs(v, d, g)
    while v < v1:
        if v1 - v <= h * (1 + 1e-12):
            h = v1 - v
            last = True
        else:
            last = False
        ks = [k1]
        for i in range(1, 7):
            a = _A[i]
            dd = d + h * sum(a[j] * ks[j][0] for j in range(i))
            gg = g + h * sum(a[j] * ks[j][1] for j in range(i))
            ks.append(rhs(v + _C[i] * h, dd, gg))
        d5 = d + h * sum(_B5[j] * ks[j][0] for j in range(7))
        g5 = g + h * sum(_B5[j] * ks[j][1] for j in range(7))
        ed = h * sum(_E[j] * ks[j][0] for j in range(7))
        eg = h * sum(_E[j] * ks[j][1] for j in range(7))

        change = abs(d5 - d) / d
        if g > 0:
            change = max(change, abs(g5 - g) / g)
        err = abs(ed) / (rtol * max(abs(d), abs(d5)))
        if g > 0:
            err = max(err, abs(eg) / (rtol * max(g, abs(g5))))

        if change <= rel and err <= 1.0 and d5 > 0 and g5 >= 0 and math.isfinite(d5 + g5):
            v = v1 if last else v + h
            d, g = d5, g5
            out.append((v, d, g))
            k1 = ks[6]  # first-same-as-last
            grow = 5.0 if err == 0 else min(5.0, 0.9 * err ** -0.2)
            if change > 0:
                grow = min(grow, 0.9 * rel / change)
            h = min(hmax, h * max(grow, 0.2))
        else:
            shrink = 0.2 if not math.isfinite(err) else max(0.1, min(0.9, 0.9 * err ** -0.25))
            if change > rel and math.isfinite(change):
                shrink = min(shrink, 0.9 * rel / change)
            h *= max(shrink, 0.05)
            if h < 1e-15 * max(1.0, abs(v)):
                raise FlowConvergenceError(f"step size underflow at Lambda={math.exp(-v):.6g}")
    return d, g


def integrate_flow(cfg: FlowConfig) -> FlowTrajectory:
    """Lower the cutoff from ``cfg.lambda_start`` to ``cfg.lambda_min``.

    Uses an embedded Dormand-Prince 5(4) stepper in ``ln Lambda``. Steps are
    bounded by ``max_rel_lambda_step`` in ``|dLambda|/Lambda`` and by
    ``max_rel_change`` in the relative change of Delta and gamma, so the
    narrow resonance at ``Lambda ~ Delta`` is resolved. Every accepted step is
    recorded.
    """
    p = cfg.params
    p.require_ohmic("integrate_flow")
    v_start = -math.log(cfg.lambda_start)
    v_end = -math.log(cfg.lambda_min)
    d, g = float(cfg.delta0), float(cfg.gamma_seed)
    samples = [(v_start, d, g)]

    segments = []
    if p.cutoff_shape is CutoffShape.SHARP and cfg.lambda_min < p.omega_c < cfg.lambda_start:
        v_b = -math.log(p.omega_c)
        segments = [(v_start, v_b, False), (v_b, v_end, True)]
    else:
        inside = p.cutoff_shape is CutoffShape.EXPONENTIAL or cfg.lambda_start <= p.omega_c
        segments = [(v_start, v_end, inside)]

    for v0, v1, inside in segments:
        if p.alpha == 0 or (p.cutoff_shape is CutoffShape.SHARP and not inside):
            samples.append((v1, d, g))  # J == 0: nothing flows
            continue
        d, g = _integrate_segment(_make_segment_rhs(cfg, inside), v0, v1, d, g, cfg, samples)

    arr = np.array(samples)
    lam = np.exp(-arr[:, 0])
    lam[0] = cfg.lambda_start
    lam[-1] = cfg.lambda_min
    return FlowTrajectory(Lambda=lam, delta=arr[:, 1], gamma=arr[:, 2], config=cfg)


def fixed_point_scale(traj: FlowTrajectory, xtol: float = 1e-12) -> float:
    """Cutoff ``Lambda*`` of the first crossing ``Delta(Lambda*) = Lambda*``.

    The crossing is bracketed on the samples and refined by bisection on the
    interpolated trajectory.
    """
    f = traj.delta - traj.Lambda
    s0 = np.sign(f[0])
    hits = np.nonzero(np.sign(f) != s0)[0]
    if s0 == 0:
        return float(traj.Lambda[0])
    if hits.size == 0:
        raise FixedPointNotFoundError(
            f"Delta - Lambda keeps one sign on [{traj.Lambda[-1]:.4g}, {traj.Lambda[0]:.4g}]"
        )
    i = int(hits[0])
    if f[i] == 0:
        return float(traj.Lambda[i])
    hi, lo = math.log(traj.Lambda[i - 1]), math.log(traj.Lambda[i])
    for _ in range(200):
        mid = 0.5 * (hi + lo)
        lam = math.exp(mid)
        fm = traj.interpolate(lam)[0] - lam
        if np.sign(fm) == s0:
            hi = mid
        else:
            lo = mid
        if hi - lo < xtol:
            break
    return math.exp(0.5 * (hi + lo))


@dataclass(frozen=True)
class RateSchedule:
    """Time-dependent ``(Delta(t), gamma(t))`` samples.

    ``head`` is held for ``t < t[0]``; ``tail`` (if given) is held for
    ``t > t[-1]``, otherwise evaluating past the last sample is a gap.
    With ``log_time`` the samples are interpolated linearly in ``ln t`` (and
    in ``ln gamma`` when all rates are positive); otherwise linearly in ``t``.
    """

    t: np.ndarray
    delta: np.ndarray
    gamma: np.ndarray
    head: tuple[float, float]
    tail: tuple[float, float] | None = None
    log_time: bool = False

    def __post_init__(self):
        for name in ("t", "delta", "gamma"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if self.t.ndim != 1 or self.t.size == 0 or not (self.t.shape == self.delta.shape == self.gamma.shape):
            raise DomainError("schedule arrays must be equal-length 1-d")
        if np.any(np.diff(self.t) <= 0):
            raise DomainError("schedule times must be strictly increasing")
        if not (np.all(np.isfinite(self.delta)) and np.all(np.isfinite(self.gamma))):
            raise DomainError("schedule values must be finite")
        if self.log_time and self.t[0] <= 0:
            raise DomainError("log-time schedule needs t[0] > 0")
        object.__setattr__(self, "_x", np.log(self.t) if self.log_time else self.t)
        object.__setattr__(self, "_loggamma", self.log_time and bool(np.all(self.gamma > 0)))
        object.__setattr__(self, "_lg", np.log(self.gamma) if self._loggamma else None)

    @property
    def t_end(self) -> float:
        return math.inf if self.tail is not None else float(self.t[-1])

    def check_covers(self, t_max: float) -> None:
        if t_max > self.t_end * (1 + 1e-12):
            raise ScheduleError(f"schedule ends at t={self.t_end:.6g} < t_max={t_max:.6g}")

    def __call__(self, t: float) -> tuple[float, float]:
        if t < self.t[0]:
            return self.head
        if t > self.t[-1]:
            if self.tail is None:
                raise ScheduleError(f"schedule gap: t={t:.6g} beyond last sample {self.t[-1]:.6g}")
            return self.tail
        x = math.log(t) if self.log_time else t
        d = float(np.interp(x, self._x, self.delta))
        if self._loggamma:
            g = math.exp(float(np.interp(x, self._x, self._lg)))
        else:
            g = float(np.interp(x, self._x, self.gamma))
        return d, g

    def sample(self, t) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized evaluation on an array of times."""
        t = np.asarray(t, dtype=float)
        if self.tail is None and np.any(t > self.t[-1] * (1 + 1e-12)):
            raise ScheduleError("schedule gap inside requested times")
        with np.errstate(divide="ignore"):
            x = np.log(np.maximum(t, 1e-300)) if self.log_time else t
        d = np.interp(x, self._x, self.delta)
        if self._loggamma:
            g = np.exp(np.interp(x, self._x, self._lg))
        else:
            g = np.interp(x, self._x, self.gamma)
        before = t < self.t[0]
        d[before], g[before] = self.head
        if self.tail is not None:
            after = t > self.t[-1]
            d[after], g[after] = self.tail
        return d, g


def to_time_schedule(traj: FlowTrajectory, eta: float | None = None) -> RateSchedule:
    """Map the flow onto real time with ``t = eta / Lambda``.

    The bare values ``(delta0, gamma_seed)`` apply before ``eta/lambda_start``
    and the terminal values are frozen after ``eta/lambda_min``.
    """
    cfg = traj.config
    eta = cfg.eta if eta is None else eta
    if not 0 < eta <= 1:
        raise DomainError(f"eta must lie in (0, 1], got {eta}")
    if np.any(traj.gamma < 0):
        raise DomainError("flow produced negative gamma")
    t = eta / traj.Lambda
    return RateSchedule(
        t=t,
        delta=traj.delta,
        gamma=traj.gamma,
        head=(float(cfg.delta0), float(cfg.gamma_seed)),
        tail=(traj.delta_inf, traj.gamma_inf),
        log_time=True,
    )
