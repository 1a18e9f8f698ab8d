import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sbdrg import (
    BlochState, DomainError, FitError, FlowConfig, RateSchedule, ScheduleError, SpectralParams,
    evolve_bloch, evolve_se_lindblad, fit_damped_cosine, integrate_flow, quality_factor,
    to_time_schedule,
)


def constant(delta, gamma):
    return RateSchedule(t=[1.0], delta=[delta], gamma=[gamma], head=(delta, gamma), tail=(delta, gamma))


def test_bloch_undamped_rotation():
    tr = evolve_bloch(constant(0.3, 0.0), t_max=50.0, dt_out=0.1)
    assert np.allclose(tr.sz, np.cos(0.3 * tr.t), atol=1e-9)
    assert np.allclose(tr.sy, np.sin(0.3 * tr.t), atol=1e-9)
    assert np.allclose(tr.sx, 0.0, atol=1e-12)


def test_bloch_damped_closed_form():
    # constant rates: sz, sy obey a damped oscillator with characteristic roots -g/2 +- i w
    d, g = 0.5, 0.2
    tr = evolve_bloch(constant(d, g), t_max=40.0, dt_out=0.05)
    w = math.sqrt(d**2 - g**2 / 4)
    sz = np.exp(-g * tr.t / 2) * (np.cos(w * tr.t) + g / (2 * w) * np.sin(w * tr.t))
    assert np.allclose(tr.sz, sz, atol=1e-9)
    assert np.allclose(tr.sx, 1 - np.exp(-g * tr.t), atol=1e-9)


@settings(max_examples=15, deadline=None)
@given(st.floats(min_value=0.01, max_value=1.0), st.floats(min_value=0.0, max_value=0.5))
def test_bloch_invariants_constant_rates(d, g):
    tr = evolve_bloch(constant(d, g), t_max=20.0, dt_out=0.1)
    r2 = tr.sy**2 + tr.sz**2
    assert np.all(np.diff(r2) <= 1e-9)
    assert np.all(np.diff(tr.sx) >= -1e-12)


def test_short_time_taylor():
    tr = evolve_bloch(constant(0.01, 1e-8), t_max=10.0, dt_out=0.01)
    assert np.allclose(tr.sz, 1 - 0.01**2 * tr.t**2 / 2, atol=1e-6)


def test_schedule_gap_rejected():
    sch = RateSchedule(t=[1.0, 2.0], delta=[1.0, 1.0], gamma=[0.1, 0.1], head=(1.0, 0.1))
    with pytest.raises(ScheduleError):
        evolve_bloch(sch, t_max=5.0)


def test_se_lindblad_closed_form():
    d, g = 0.1, 0.01
    tr = evolve_se_lindblad(constant(d, g), BlochState(1.0, 0.0, 0.0), t_max=100.0, dt_out=0.5)
    assert np.allclose(tr.sx, np.exp(-g * tr.t) * np.cos(d * tr.t), atol=1e-9)
    assert np.allclose(tr.sy, np.exp(-g * tr.t) * np.sin(d * tr.t), atol=1e-9)
    ex = evolve_se_lindblad(constant(d, g), t_max=100.0, dt_out=0.5)
    assert np.allclose(ex.sz, -1 + 2 * np.exp(-2 * g * ex.t), atol=1e-9)


def test_bloch_state_validation():
    with pytest.raises(DomainError):
        BlochState(0.0, 0.0, 1.5)


def test_quality_factor():
    assert quality_factor(2.0, 0.5) == 4.0
    with pytest.raises(DomainError):
        quality_factor(1.0, 0.0)


def test_fit_recovers_constant_rates():
    d, g = 0.5, 0.02
    tr = evolve_bloch(constant(d, g), t_max=200.0, dt_out=0.1)
    fit = fit_damped_cosine(tr)
    w = math.sqrt(d**2 - g**2 / 4)
    assert fit.delta == pytest.approx(w, rel=1e-6)
    assert fit.gamma == pytest.approx(g, rel=1e-5)
    assert not fit.overdamped
    assert fit.quality == pytest.approx(w / g, rel=1e-5)


def test_fit_flags_overdamped():
    tr = evolve_bloch(constant(0.1, 1.0), t_max=60.0, dt_out=0.1)
    fit = fit_damped_cosine(tr)
    assert fit.overdamped and fit.delta == 0.0


def test_fit_needs_enough_periods():
    tr = evolve_bloch(constant(0.05, 0.001), t_max=150.0, dt_out=0.1)
    with pytest.raises(FitError):
        fit_damped_cosine(tr)


def test_drg_quench_fit_is_consistent_with_terminal_rates():
    tr = integrate_flow(FlowConfig(SpectralParams(alpha=0.1), 0.01))
    q = evolve_bloch(to_time_schedule(tr), t_max=10000.0, dt_out=2.0)
    fit = fit_damped_cosine(q)
    # frozen tail with Q > 2: the late-window frequency is the terminal one
    assert tr.delta_inf / tr.gamma_inf > 2
    assert fit.delta == pytest.approx(tr.delta_inf, rel=0.02)
    assert fit.gamma == pytest.approx(tr.gamma_inf, rel=0.05)


def test_fit_synthetic_generator():
    sch = constant(1.0, 0.0)
    tr = evolve_bloch(sch, t_max=200.0, dt_out=0.05)
    tr = type(tr)(tr.t, tr.sx, tr.sy, np.exp(-0.05 * tr.t) * np.cos(0.6 * tr.t), sch)
    fit = fit_damped_cosine(tr)
    assert fit.gamma / 2 == pytest.approx(0.05, abs=1e-6)
    assert fit.delta == pytest.approx(0.6, abs=1e-6)


def test_toulouse_quality_factor_value():
    from sbdrg import kondo_scale
    d = kondo_scale(0.5, 0.01) * math.pi / 2
    assert quality_factor(d, 2 * d) == 0.5


def test_se_lindblad_reproduces_exact_amplitude():
    from sbdrg import extract_rates, solve_volterra
    series = solve_volterra(SpectralParams(alpha=0.05), 0.1, dt=0.01, t_max=100.0)
    rates = extract_rates(series)
    tr = evolve_se_lindblad(rates.as_schedule(), t_max=100.0, dt_out=0.5)
    assert np.max(np.abs(tr.sz - (2 * np.abs(series.resample(tr.t)) ** 2 - 1))) < 1e-6


def test_drg_fit_frequency_against_niba_reference():
    from sbdrg import niba_parameters
    tr = integrate_flow(FlowConfig(SpectralParams(alpha=0.1), 0.01, eta=1.0))
    q = evolve_bloch(to_time_schedule(tr), t_max=10000.0, dt_out=2.0)
    fit = fit_damped_cosine(q)
    assert fit.delta == pytest.approx(niba_parameters(0.1, 0.01).delta_niba, rel=0.25)
