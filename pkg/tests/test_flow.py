import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sbdrg import (
    DEFAULT_SEED_RATIO, DomainError, FixedPointNotFoundError, FlowConfig, FlowModel, FlowState,
    RateSchedule, ScheduleError, SingularFlowError, SpectralParams, fixed_point_scale, flow_rhs_sb,
    flow_rhs_se, integrate_flow, kondo_scale, power_law_delta, spectral_density, to_time_schedule,
)


def test_sb_rhs_closed_form():
    p = SpectralParams(alpha=0.2)
    lam, d, g = 0.05, 0.01, 0.002
    j = spectral_density(lam, p)
    den = (d**2 - lam**2) ** 2 + g**2 * lam**2
    dd, dg = flow_rhs_sb(FlowState(lam, d, g), p)
    assert dd == pytest.approx(d / (2 * math.pi) * j * (d**2 - lam**2) / den, rel=1e-14)
    assert dg == pytest.approx(d**2 / math.pi * j * g / den, rel=1e-14)


def test_sb_rhs_thermal_factor():
    p0, pt = SpectralParams(alpha=0.1), SpectralParams(alpha=0.1, temperature=0.03)
    s = FlowState(0.05, 0.01, 0.001)
    ratio = flow_rhs_sb(s, pt)[0] / flow_rhs_sb(s, p0)[0]
    assert ratio == pytest.approx(1 / math.tanh(0.05 / 0.06), rel=1e-12)


def test_se_rhs_closed_form():
    p = SpectralParams(alpha=0.05)
    lam, d, g = 0.3, 0.1, 0.01
    j = spectral_density(lam, p)
    dd, dg = flow_rhs_se(FlowState(lam, d, g), p)
    den = (d - lam) ** 2 + g**2
    assert dd == pytest.approx(j / (4 * math.pi) * (d - lam) / den)
    assert dg == pytest.approx(j / (4 * math.pi) * g / den)


def test_rhs_singular_at_resonance_without_damping():
    with pytest.raises(SingularFlowError):
        flow_rhs_sb(FlowState(0.01, 0.01, 0.0), SpectralParams(alpha=0.1))


def test_gamma_zero_is_fixed_point():
    assert flow_rhs_sb(FlowState(0.5, 0.01, 0.0), SpectralParams(alpha=0.3))[1] == 0.0


def test_kondo_scale_formula():
    assert kondo_scale(0.2, 0.01) == pytest.approx(0.01 * 0.01 ** 0.25)
    assert kondo_scale(0.0, 0.01) == pytest.approx(0.01)


def test_config_defaults():
    cfg = FlowConfig(SpectralParams(alpha=0.3), 0.01)
    assert cfg.gamma_seed == DEFAULT_SEED_RATIO * 0.01
    assert cfg.lambda_start == 10.0
    assert cfg.lambda_min == pytest.approx(kondo_scale(0.3, 0.01) / 100)
    se = FlowConfig(SpectralParams(alpha=0.3), 0.1, model=FlowModel.SPONTANEOUS_EMISSION)
    assert se.lambda_min == pytest.approx(1e-3)
    assert FlowConfig(SpectralParams(alpha=0.0), 0.01).gamma_seed == 0.0


@pytest.mark.parametrize("kwargs", [
    dict(delta0=0.0), dict(delta0=0.01, eta=1.5), dict(delta0=0.01, eta=0.0),
    dict(delta0=0.01, gamma_seed=-1.0), dict(delta0=0.01, lambda_min=20.0),
])
def test_config_validation(kwargs):
    with pytest.raises(DomainError):
        FlowConfig(SpectralParams(alpha=0.1), **kwargs)


def test_zero_coupling_is_constant():
    tr = integrate_flow(FlowConfig(SpectralParams(alpha=0.0), 0.01, gamma_seed=1e-5))
    assert np.all(tr.delta == 0.01) and np.all(tr.gamma == 1e-5)


def test_trajectory_endpoints_and_monotone_cutoff():
    cfg = FlowConfig(SpectralParams(alpha=0.1), 0.01)
    tr = integrate_flow(cfg)
    assert tr.Lambda[0] == cfg.lambda_start and tr.Lambda[-1] == cfg.lambda_min
    assert np.all(np.diff(tr.Lambda) < 0)
    assert np.all(tr.gamma > 0)
    assert 0 < tr.delta_inf < 0.01


def test_sharp_cutoff_frozen_above_cutoff():
    tr = integrate_flow(FlowConfig(SpectralParams(alpha=0.2, cutoff_shape="sharp"), 0.01, gamma_seed=0.0))
    above = tr.Lambda >= 1.0
    assert np.all(tr.delta[above] == 0.01)
    assert np.all(tr.gamma == 0.0)


def test_gamma_free_sharp_flow_approaches_sqrt_ratio():
    # d ln(D/L)/d ln L = a/(1 - r^2) - 1 drives r = D/L towards sqrt(1 - a)
    a = 0.2
    tr = integrate_flow(FlowConfig(SpectralParams(alpha=a, cutoff_shape="sharp"), 0.01, gamma_seed=0.0,
                                   lambda_min=1e-9))
    assert tr.delta[-1] / tr.Lambda[-1] == pytest.approx(math.sqrt(1 - a), rel=1e-3)
    with pytest.raises(FixedPointNotFoundError):
        fixed_point_scale(tr)


def test_fixed_point_scale_with_seed_is_bracketed():
    tr = integrate_flow(FlowConfig(SpectralParams(alpha=0.2), 0.01))
    lam = fixed_point_scale(tr)
    d, _ = tr.interpolate(lam)
    assert d == pytest.approx(lam, rel=1e-8)


def test_tolerance_halving_is_stable():
    cfg = FlowConfig(SpectralParams(alpha=0.2), 0.01)
    a, b = integrate_flow(cfg), integrate_flow(cfg.halved())
    assert a.delta_inf == pytest.approx(b.delta_inf, rel=1e-5)
    assert a.gamma_inf == pytest.approx(b.gamma_inf, rel=1e-5)


def test_time_schedule_map():
    tr = integrate_flow(FlowConfig(SpectralParams(alpha=0.1), 0.01, eta=0.5))
    sch = to_time_schedule(tr)
    assert sch(0.01) == (0.01, tr.config.gamma_seed)
    assert sch(1e9) == (tr.delta_inf, tr.gamma_inf)
    lam = tr.Lambda[len(tr.Lambda) // 2]
    assert sch(0.5 / lam)[0] == pytest.approx(tr.delta[len(tr.Lambda) // 2], rel=1e-12)
    d, g = sch.sample(np.array([0.01, 0.5 / lam, 1e9]))
    assert d[0] == 0.01 and d[-1] == tr.delta_inf


def test_schedule_gap_and_validation():
    sch = RateSchedule(t=[1.0, 2.0], delta=[1.0, 1.0], gamma=[0.1, 0.1], head=(1.0, 0.1))
    with pytest.raises(ScheduleError):
        sch(3.0)
    with pytest.raises(ScheduleError):
        sch.check_covers(5.0)
    with pytest.raises(DomainError):
        RateSchedule(t=[2.0, 1.0], delta=[1, 1], gamma=[0, 0], head=(1, 0))


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=1e-4, max_value=0.99), st.floats(min_value=1e-4, max_value=0.5),
       st.floats(min_value=0.0, max_value=0.5))
def test_sharp_gamma_free_rhs_reduces_to_power_law_generator(lam, delta, alpha):
    # J = 2 pi a L below the cutoff, so dD = a D L / (D^2 - L^2)
    if abs(delta - lam) < 1e-3:
        return
    p = SpectralParams(alpha=alpha, cutoff_shape="sharp")
    dd, dg = flow_rhs_sb(FlowState(lam, delta, 0.0), p)
    assert dd == pytest.approx(alpha * delta * lam / (delta**2 - lam**2), rel=1e-12, abs=1e-300)
    assert dg == 0.0
