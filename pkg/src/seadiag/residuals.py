"""The three analytical-redundancy constraint residuals.

Each residual is the absolute mismatch of one model constraint evaluated on
telemetry; it sits near zero while the sensors and the nominal model agree.

  torsional   |k_eq*(theta_l - theta_m/gr) - tau_sea|          (Nm)
  dynamics    |tau_sea + forward(i_m) - back(theta_l)|         (Nm)
  electrical  |v_m - i_m*r_motor - k_e*omega_m|                (V)

The dynamics constraint realizes the joint transfer function as two discrete
filters (Tustin at the telemetry rate): the forward path
k_t*gr*k_sea / (J s^2 + B s + k_sea) driven by motor current, and the
back-impedance k_sea*(J s^2 + B s) / (J s^2 + B s + k_sea) driven by load
motion. With the torque sensor reporting load-ahead-positive torque, the
combination that vanishes for a perfectly matched model is
tau_sea + forward - back; that orientation is pinned down by the
matched-model nullity tests rather than by convention.
"""

from dataclasses import dataclass

import numpy as np

from .dsp import LowPass2, _Df2tState, poles_inside_unit_circle, tustin
from .errors import ConfigurationError

CONSTRAINTS = ("torsional", "dynamics", "electrical")


class DiscreteTF(_Df2tState):
    """Streaming discrete transfer function, order <= 2, DF2-transposed."""

    def __init__(self, b_coeffs, a_coeffs, fs):
        b = tuple(float(c) for c in b_coeffs)
        a = tuple(float(c) for c in a_coeffs)
        if not 2 <= len(b) == len(a) <= 3:
            raise ConfigurationError("DiscreteTF supports order 1 and 2 only")
        if a[0] != 1.0:
            raise ConfigurationError(f"a_coeffs[0] must be 1, got {a[0]}")
        if not poles_inside_unit_circle(a):
            raise ConfigurationError(
                f"unstable discrete poles for a_coeffs={a}")
        super().__init__(b, a)
        self.fs = float(fs)


def make_dynamics_filters(params, fs):
    """Forward-path and back-impedance filters at sample rate fs."""
    if fs <= 0.0:
        raise ConfigurationError(f"sample rate must be positive, got {fs}")
    j, b, k = params.j_gear, params.b_gear, params.k_sea
    den = (j, b, k)
    fwd_b, fwd_a = tustin((0.0, 0.0, params.k_t * params.gr * k), den, fs)
    back_b, back_a = tustin((k * j, k * b, 0.0), den, fs)
    return (DiscreteTF(fwd_b, fwd_a, fs), DiscreteTF(back_b, back_a, fs))


def torsional_residual(frame, params):
    """Spring-constraint mismatch (Nm) for one telemetry frame."""
    return abs(params.k_eq * (frame.theta_l - frame.theta_m / params.gr)
               - frame.tau_sea)


def electrical_residual(frame, params):
    """Motor voltage-balance mismatch (V) for one telemetry frame."""
    return abs(frame.v_m - frame.i_m * params.r_motor
               - params.k_e * frame.omega_m)


def dynamics_residual(frame, forward, back):
    """Joint-dynamics mismatch (Nm) for one frame; filters carry streaming
    state, so frames must arrive in order at the filters' sample rate."""
    if forward.fs != back.fs:
        raise ConfigurationError(
            f"filter sample rates differ: {forward.fs} vs {back.fs}")
    return abs(dynamics_residual_signed(frame, forward, back))


def dynamics_residual_signed(frame, forward, back):
    """Pre-rectification dynamics mismatch; linear in (tau_sea, i_m, theta_l)."""
    return frame.tau_sea + forward.step(frame.i_m) - back.step(frame.theta_l)


@dataclass
class ResidualFrame:
    """Raw and low-pass-filtered residuals at one timestep."""

    t: float
    raw: dict        # constraint name -> |residual|
    filtered: dict   # constraint name -> smoothed |residual|


@dataclass
class ResidualLog:
    """Column-oriented residuals for a whole run."""

    t: np.ndarray
    raw: dict
    filtered: dict

    def __len__(self):
        return len(self.t)

    def __eq__(self, other):
        if not isinstance(other, ResidualLog):
            return NotImplemented
        return (np.array_equal(self.t, other.t)
                and all(np.array_equal(self.raw[c], other.raw[c])
                        and np.array_equal(self.filtered[c], other.filtered[c])
                        for c in CONSTRAINTS))

    def frame(self, k):
        return ResidualFrame(
            t=float(self.t[k]),
            raw={c: float(self.raw[c][k]) for c in CONSTRAINTS},
            filtered={c: float(self.filtered[c][k]) for c in CONSTRAINTS})

    def frames(self):
        for k in range(len(self)):
            yield self.frame(k)


def compute_residuals(telemetry, params, fs, cutoff_hz):
    """All three residuals over a TelemetryLog, raw and filtered.

    Rectification happens per sample before the second-order low-pass, and
    every filter starts from zero state.
    """
    forward, back = make_dynamics_filters(params, fs)
    raw = {
        "torsional": np.abs(params.k_eq * (telemetry.theta_l
                                           - telemetry.theta_m / params.gr)
                            - telemetry.tau_sea),
        "dynamics": np.abs(telemetry.tau_sea + forward.process(telemetry.i_m)
                           - back.process(telemetry.theta_l)),
        "electrical": np.abs(telemetry.v_m - telemetry.i_m * params.r_motor
                             - params.k_e * telemetry.omega_m),
    }
    filtered = {c: LowPass2(cutoff_hz, fs).process(raw[c]) for c in CONSTRAINTS}
    return ResidualLog(t=telemetry.t.copy(), raw=raw, filtered=filtered)
