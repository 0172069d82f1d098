import dataclasses

import pytest

from seadiag import Excitation, JointParams, NoiseSpec, Scenario, Thresholds

# Parameter set of the bundled scenarios.
DEFAULT_PARAMS = dict(
    k1=100.0, k2=0.02, g1=105.05, gr=105.0, k_eq=80.0,
    k_sea=100.0, k_gear=400.0, j_gear=0.02, b_gear=2.0, j_load=0.05,
    k_t=0.2, k_e=0.0035, r_motor=2.0, l_motor=0.001)

DEFAULT_NOISE = dict(theta_m=0.05, omega_m=5.0, i_m=0.02, v_m=0.05,
                     theta_l=0.01, tau_sea=0.5)


@pytest.fixture
def params():
    return JointParams(**DEFAULT_PARAMS)


@pytest.fixture
def quiet_noise():
    return NoiseSpec(std_per_channel={}, bandwidth=50.0)


def make_scenario(amplitude=20.0, frequency=1.0, duration=10.0, seed=0,
                  faults=(), noise=None, label="test", **overrides):
    """Scenario mirroring the bundled defaults, tweakable per test."""
    param_values = dict(DEFAULT_PARAMS)
    param_values.update({k: overrides.pop(k) for k in list(overrides)
                         if k in param_values})
    fields = dict(
        params=JointParams(**param_values),
        excitation=Excitation(kind="open_loop_voltage", amplitude=amplitude,
                              frequency=frequency),
        noise=noise if noise is not None
        else NoiseSpec(std_per_channel=dict(DEFAULT_NOISE), bandwidth=50.0),
        faults=tuple(faults),
        thresholds=Thresholds(torsional=12.0, dynamics=6.0, electrical=0.3),
        duration=duration, seed=seed, label=label)
    fields.update(overrides)
    return Scenario(**fields)


def with_seed(scenario, seed):
    return dataclasses.replace(scenario, seed=seed)
