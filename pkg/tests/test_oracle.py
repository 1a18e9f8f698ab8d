import math

import numpy as np
import pytest

from sbdrg import (
    DiscreteBath, DomainError, SpectralParams, StabilityError, discretize_bath, evolve_discrete_bath,
    oracle_couplings, recurrence_time, solve_volterra,
)
from sbdrg.oracle import _Propagator

P = SpectralParams(alpha=0.05)


def test_single_mode_rabi():
    # resonant single mode: |c_e|^2 = cos^2(kappa t)
    bath = DiscreteBath(omega=[0.3], g=[0.02], omega_max=1.0)
    s = evolve_discrete_bath(bath, 0.3, dt=0.01, t_max=400.0)
    kappa = oracle_couplings(bath)[0]
    assert np.allclose(np.abs(s.u) ** 2, np.cos(kappa * s.t) ** 2, atol=1e-12)


def test_norm_conserved_and_reported():
    bath = discretize_bath(P, 300, 10.0)
    s = evolve_discrete_bath(bath, 0.1, dt=0.01, t_max=100.0)
    assert s.norm_drift < 1e-10
    st = _Propagator(bath, 0.1).state(73.0)
    assert st.norm == pytest.approx(1.0, abs=1e-12)


def test_step_must_resolve_fastest_mode():
    with pytest.raises(StabilityError):
        evolve_discrete_bath(discretize_bath(P, 100, 10.0), 0.1, dt=0.05, t_max=10.0)


def test_recurrence_time():
    assert recurrence_time(discretize_bath(P, 2000, 10.0)) == pytest.approx(2 * math.pi * 200)
    with pytest.raises(DomainError):
        recurrence_time(discretize_bath(P, 1, 10.0))


def test_oracle_converges_to_volterra_as_bath_refines():
    t_max = 150.0
    exact = solve_volterra(P, 0.1, dt=0.01, t_max=t_max)
    errs = []
    for n in (250, 500, 1000):
        bath = discretize_bath(P, n, 10.0)
        window = min(t_max, 0.9 * recurrence_time(bath))
        orc = evolve_discrete_bath(bath, 0.1, dt=0.01, t_max=window)
        errs.append(np.max(np.abs(orc.u - exact.u[: orc.u.size])))
    assert all(a >= b for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 2e-3
