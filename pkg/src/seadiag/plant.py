"""Ground-truth physics of the series-elastic joint.

State convention: theta_g is the gearbox output angle (deg); the motor shaft
is rigidly geared to it, theta_m = g1 * theta_g. All compliance between the
gearbox output and the load is the lumped nonlinear spring
tau = k1*d + k2*d^2 with d = theta_l - theta_g, reported by the torque sensor
with the load-ahead-positive sign. The same torque acts with opposite signs
on the two inertias (it pulls gearbox and load together), which is what makes
the joint a stable oscillator.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _backend, _kernels_py
from .errors import ConfigurationError, IntegrationFailure

EXCITATION_KINDS = ("open_loop_voltage", "open_loop_current")


@dataclass
class JointParams:
    """Physical constants of the joint: true plant values (k1, k2, g1) plus
    the nominal model values the residual generators use.

    Angles in degrees, torques in Nm, time in seconds; J, B, K_e therefore
    carry per-degree units. k_sea and k_gear may be omitted; they are then
    derived from k_eq with the default 4:1 gear-train/spring stiffness split.
    A rigid gear train is expressed as k_gear = inf (then k_sea == k_eq).
    """

    k1: float            # true linear spring coefficient (Nm/deg)
    k2: float            # true quadratic spring coefficient (Nm/deg^2)
    g1: float            # true gear ratio
    gr: float            # nominal gear ratio
    k_eq: float          # nominal equivalent stiffness (Nm/deg)
    j_gear: float        # output-side inertia (Nm s^2/deg)
    b_gear: float        # effective viscous damping (Nm s/deg)
    j_load: float        # load inertia (Nm s^2/deg)
    k_t: float           # motor torque constant (Nm/A, motor shaft)
    k_e: float           # motor velocity constant (V s/deg, motor side)
    r_motor: float       # winding resistance (ohm)
    l_motor: float       # winding inductance (H)
    k_sea: float | None = None   # nominal spring stiffness (Nm/deg)
    k_gear: float | None = None  # nominal gear-train stiffness (Nm/deg)

    def __post_init__(self):
        if self.k_sea is None and self.k_gear is None:
            self.k_sea = 1.25 * self.k_eq
            self.k_gear = 4.0 * self.k_sea
        elif self.k_sea is None:
            self.k_sea = _series_complement(self.k_eq, self.k_gear, "k_sea")
        elif self.k_gear is None:
            self.k_gear = _series_complement(self.k_eq, self.k_sea, "k_gear")
        self.validate()

    def validate(self):
        positive = ("k1", "g1", "gr", "k_eq", "k_sea", "k_gear",
                    "j_gear", "j_load", "k_t", "r_motor")
        for name in positive:
            if not getattr(self, name) > 0.0:
                raise ConfigurationError(
                    f"{name} must be strictly positive, got {getattr(self, name)}")
        nonnegative = ("k2", "b_gear", "k_e", "l_motor")
        for name in nonnegative:
            if not getattr(self, name) >= 0.0:
                raise ConfigurationError(
                    f"{name} must be >= 0, got {getattr(self, name)}")
        inv_series = 1.0 / self.k_sea + 1.0 / self.k_gear
        if abs(inv_series - 1.0 / self.k_eq) > 1e-9 / self.k_eq:
            raise ConfigurationError(
                "k_eq is not the series combination of k_sea and k_gear: "
                f"1/{self.k_eq} != 1/{self.k_sea} + 1/{self.k_gear}")

    def pack(self):
        """Parameter vector in kernel layout (see _kernels_py.PP_FIELDS)."""
        return np.array([getattr(self, name) for name in _kernels_py.PP_FIELDS])


def _series_complement(k_eq, k_other, name):
    inv = 1.0 / k_eq - 1.0 / k_other
    if inv < 0.0:
        raise ConfigurationError(
            f"cannot derive {name}: k_eq {k_eq} exceeds the supplied stiffness {k_other}")
    return math.inf if inv == 0.0 else 1.0 / inv


@dataclass
class PlantState:
    """True (noise-free) state of the joint at time t."""

    t: float = 0.0
    theta_g: float = 0.0   # gearbox output angle (deg), not directly measured
    omega_g: float = 0.0   # gearbox output velocity (deg/s)
    theta_l: float = 0.0   # load angle (deg)
    omega_l: float = 0.0   # load velocity (deg/s)
    i_m: float = 0.0       # motor current (A)
    v_m: float = 0.0       # applied motor voltage (V)

    def is_finite(self):
        return all(math.isfinite(v) for v in
                   (self.t, self.theta_g, self.omega_g, self.theta_l,
                    self.omega_l, self.i_m, self.v_m))


@dataclass
class Excitation:
    """Open-loop sinusoidal drive: offset + amplitude*sin(2*pi*frequency*t),
    applied as motor voltage (V) or prescribed motor current (A)."""

    kind: str = "open_loop_voltage"
    amplitude: float = 0.0
    frequency: float = 0.0   # Hz
    offset: float = 0.0

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.kind not in EXCITATION_KINDS:
            raise ConfigurationError(
                f"excitation kind must be one of {EXCITATION_KINDS}, got {self.kind!r}")
        if self.amplitude < 0.0:
            raise ConfigurationError(f"amplitude must be >= 0, got {self.amplitude}")
        if self.frequency < 0.0:
            raise ConfigurationError(f"frequency must be >= 0, got {self.frequency}")


def drive_mode(params, excitation):
    """Kernel drive mode for this parameter/excitation combination."""
    if excitation.kind == "open_loop_current":
        return _kernels_py.MODE_CURRENT
    if params.l_motor == 0.0:
        return _kernels_py.MODE_VOLTAGE_L0
    return _kernels_py.MODE_VOLTAGE


def true_spring_torque(params, theta_l, theta_m):
    """Spring torque the deflection sensor reports, from load and motor angles.

    Positive when the load leads the reflected motor angle; the torque that
    accelerates the load is the negative of this value.
    """
    delta = theta_l - theta_m / params.g1
    return params.k1 * delta + params.k2 * delta * delta


@dataclass
class PlantDerivatives:
    """Time derivatives of the integrated plant state."""

    theta_g: float
    omega_g: float
    theta_l: float
    omega_l: float
    i_m: float


def plant_derivatives(params, state, v_applied):
    """Vector field of the joint with the winding treated as an RL circuit.

    Requires l_motor > 0 (with a zero inductance the current is algebraic,
    not a state; step() handles that case).
    """
    if params.l_motor <= 0.0:
        raise ConfigurationError(
            "plant_derivatives needs l_motor > 0; zero inductance makes the "
            "motor current algebraic")
    if not state.is_finite():
        raise IntegrationFailure(f"non-finite state at t={state.t}")
    delta = state.theta_l - state.theta_g
    tau = params.k1 * delta + params.k2 * delta * delta
    omega_m = params.g1 * state.omega_g
    return PlantDerivatives(
        theta_g=state.omega_g,
        omega_g=(params.k_t * params.g1 * state.i_m
                 - params.b_gear * state.omega_g + tau) / params.j_gear,
        theta_l=state.omega_l,
        omega_l=-tau / params.j_load,
        i_m=(v_applied - state.i_m * params.r_motor - params.k_e * omega_m)
            / params.l_motor,
    )


def step(params, state, excitation, dt):
    """Advance the plant one RK4 step of size dt; deterministic.

    Composing step() reproduces the batch simulate() trajectory bit for bit.
    """
    if dt <= 0.0:
        raise ConfigurationError(f"dt must be positive, got {dt}")
    if not state.is_finite():
        raise IntegrationFailure(f"non-finite state at t={state.t}")
    pp = tuple(params.pack())
    mode = drive_mode(params, excitation)
    tg, wg, tl, wl, im = _kernels_py.rk4_step(
        pp, mode, state.theta_g, state.omega_g, state.theta_l, state.omega_l,
        state.i_m, state.t, dt, excitation.amplitude, excitation.frequency,
        excitation.offset)
    t = state.t + dt
    if not all(map(math.isfinite, (tg, wg, tl, wl, im))):
        raise IntegrationFailure(f"integration diverged at t={t}")
    i, v = _kernels_py.drive_outputs(pp, mode, wg, im, t, excitation.amplitude,
                                     excitation.frequency, excitation.offset)
    return PlantState(t=t, theta_g=tg, omega_g=wg, theta_l=tl, omega_l=wl,
                      i_m=i, v_m=v)


def simulate(params, excitation, dt, n_steps, decim=1, initial=None):
    """Integrate n_steps of size dt, recording every decim-th state.

    Returns an (n_steps//decim + 1, 7) array with columns
    [t, theta_g, omega_g, theta_l, omega_l, i_m, v_m], row 0 at t = 0.
    Runs on the active backend kernel.
    """
    if dt <= 0.0:
        raise ConfigurationError(f"dt must be positive, got {dt}")
    if n_steps < 0 or decim < 1 or n_steps % decim != 0:
        raise ConfigurationError(
            f"n_steps ({n_steps}) must be a nonnegative multiple of decim ({decim})")
    if initial is None:
        initial = PlantState()
    if not initial.is_finite():
        raise IntegrationFailure(f"non-finite state at t={initial.t}")
    x0 = np.array([initial.theta_g, initial.omega_g, initial.theta_l,
                   initial.omega_l, initial.i_m])
    out = np.empty((n_steps // decim + 1, 7))
    status = _backend.kernels().simulate_sea(
        params.pack(), x0, drive_mode(params, excitation),
        excitation.amplitude, excitation.frequency, excitation.offset,
        dt, n_steps, decim, out)
    if status != -1:
        raise IntegrationFailure(
            f"integration diverged at t={status * dt} (step {status})")
    return out


# Column indices of the simulate() output.
COL_T, COL_THETA_G, COL_OMEGA_G, COL_THETA_L, COL_OMEGA_L, COL_I_M, COL_V_M = range(7)
