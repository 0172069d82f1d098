"""Sensor model: true plant state -> noisy telemetry, plus fault injection."""

import math
from dataclasses import dataclass, field

import numpy as np

from . import plant
from .dsp import BandLimitedNoise
from .errors import ConfigurationError, ScenarioError

CHANNELS = ("theta_m", "omega_m", "i_m", "v_m", "theta_l", "tau_sea")
FAULT_KINDS = ("none", "bias", "stuck")


@dataclass
class TelemetryFrame:
    """One timestamped set of sensor readings."""

    t: float
    theta_m: float   # motor angle (deg)
    omega_m: float   # motor angular velocity (deg/s), a measured channel
    i_m: float       # motor current (A)
    v_m: float       # motor voltage (V)
    theta_l: float   # load angle (deg)
    tau_sea: float   # spring torque (Nm), load-ahead positive


@dataclass
class NoiseSpec:
    """Band-limited white measurement noise, one std per channel.

    seed defaults to the scenario seed; set it only to pin the noise stream
    independently of the rest of the run.
    """

    std_per_channel: dict = field(default_factory=dict)
    bandwidth: float = 50.0   # Hz
    seed: int | None = None

    def __post_init__(self):
        self.validate()

    def validate(self):
        for channel, std in self.std_per_channel.items():
            if channel not in CHANNELS:
                raise ConfigurationError(f"unknown noise channel {channel!r}")
            if not std >= 0.0:
                raise ConfigurationError(
                    f"noise std for {channel} must be >= 0, got {std}")
        if not self.bandwidth > 0.0:
            raise ConfigurationError(
                f"noise bandwidth must be positive, got {self.bandwidth}")
        if self.seed is not None and not (isinstance(self.seed, int)
                                          and self.seed >= 0):
            raise ConfigurationError(
                f"noise seed must be a nonnegative integer, got {self.seed}")

    def std(self, channel):
        return float(self.std_per_channel.get(channel, 0.0))


@dataclass
class FaultSpec:
    """A single-channel sensor fault switching on at t >= onset."""

    channel: str
    kind: str = "none"
    onset: float = 0.0          # s
    bias_magnitude: float = 0.0  # channel units, used when kind == "bias"

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.channel not in CHANNELS:
            raise ConfigurationError(f"unknown fault channel {self.channel!r}")
        if self.kind not in FAULT_KINDS:
            raise ConfigurationError(
                f"fault kind must be one of {FAULT_KINDS}, got {self.kind!r}")
        if not self.onset >= 0.0:
            raise ConfigurationError(f"fault onset must be >= 0, got {self.onset}")
        if self.kind == "bias" and not math.isfinite(self.bias_magnitude):
            raise ConfigurationError("bias fault requires a finite bias_magnitude")


class SensorSuite:
    """Streaming measurement pipeline with one independent noise process per
    channel. Channel RNGs are spawned from a single seed, so a fixed seed
    reproduces the exact noise sequences and zero-std channels stay exact.
    """

    def __init__(self, params, noise, fs, seed=0):
        effective = seed if noise.seed is None else noise.seed
        children = np.random.SeedSequence(effective).spawn(len(CHANNELS))
        self.params = params
        self._noise = {
            channel: BandLimitedNoise(noise.std(channel), noise.bandwidth, fs,
                                      np.random.Generator(np.random.PCG64(child)))
            for channel, child in zip(CHANNELS, children)
        }

    def measure(self, state):
        """Project the true state onto the sensor channels and add noise."""
        p = self.params
        theta_m = p.g1 * state.theta_g
        delta = state.theta_l - theta_m / p.g1
        tau = p.k1 * delta + p.k2 * delta * delta
        n = self._noise
        return TelemetryFrame(
            t=state.t,
            theta_m=theta_m + n["theta_m"].sample(),
            omega_m=p.g1 * state.omega_g + n["omega_m"].sample(),
            i_m=state.i_m + n["i_m"].sample(),
            v_m=state.v_m + n["v_m"].sample(),
            theta_l=state.theta_l + n["theta_l"].sample(),
            tau_sea=tau + n["tau_sea"].sample(),
        )

    def measure_batch(self, true_states):
        """Vectorized equivalent of measure() over a plant.simulate() array;
        produces bit-identical values to the streaming path."""
        p = self.params
        t = true_states[:, plant.COL_T].copy()
        theta_m = p.g1 * true_states[:, plant.COL_THETA_G]
        delta = true_states[:, plant.COL_THETA_L] - theta_m / p.g1
        tau = p.k1 * delta + p.k2 * delta * delta
        n = len(t)
        values = {
            "theta_m": theta_m,
            "omega_m": p.g1 * true_states[:, plant.COL_OMEGA_G],
            "i_m": true_states[:, plant.COL_I_M].copy(),
            "v_m": true_states[:, plant.COL_V_M].copy(),
            "theta_l": true_states[:, plant.COL_THETA_L].copy(),
            "tau_sea": tau,
        }
        for channel in CHANNELS:
            values[channel] = values[channel] + self._noise[channel].batch(n)
        return TelemetryLog(t=t, **values)


@dataclass
class TelemetryLog:
    """Column-oriented telemetry for a whole run."""

    t: np.ndarray
    theta_m: np.ndarray
    omega_m: np.ndarray
    i_m: np.ndarray
    v_m: np.ndarray
    theta_l: np.ndarray
    tau_sea: np.ndarray

    def __len__(self):
        return len(self.t)

    def __eq__(self, other):
        if not isinstance(other, TelemetryLog):
            return NotImplemented
        return all(np.array_equal(getattr(self, f), getattr(other, f))
                   for f in ("t",) + CHANNELS)

    def frame(self, k):
        return TelemetryFrame(
            t=float(self.t[k]),
            **{ch: float(getattr(self, ch)[k]) for ch in CHANNELS})

    def frames(self):
        for k in range(len(self)):
            yield self.frame(k)

    def copy(self):
        return TelemetryLog(t=self.t.copy(),
                            **{ch: getattr(self, ch).copy() for ch in CHANNELS})


def inject_fault(frame, fault, last_pre_onset=None):
    """Apply one fault to one frame; frames must be fed in time order.

    last_pre_onset is the channel value most recently observed strictly
    before the onset (needed for stuck faults). Returns a new frame; exactly
    one channel differs, and only for t >= onset.
    """
    if fault.kind == "none" or frame.t < fault.onset:
        return frame
    if fault.kind == "bias":
        value = getattr(frame, fault.channel) + fault.bias_magnitude
    else:
        if last_pre_onset is None:
            raise ScenarioError(
                f"stuck fault on {fault.channel} at onset {fault.onset}: "
                "no frame observed before the onset")
        value = last_pre_onset
    return _replace_channel(frame, fault.channel, value)


def _replace_channel(frame, channel, value):
    kwargs = {ch: getattr(frame, ch) for ch in CHANNELS}
    kwargs[channel] = value
    return TelemetryFrame(t=frame.t, **kwargs)


class FaultInjector:
    """Streaming wrapper around inject_fault that tracks the pre-onset value."""

    def __init__(self, fault):
        self.fault = fault
        self._memory = None

    def update(self, frame):
        if frame.t < self.fault.onset:
            self._memory = getattr(frame, self.fault.channel)
            return frame
        return inject_fault(frame, self.fault, self._memory)


def apply_faults(log, faults):
    """Batch fault injection over a TelemetryLog; returns a new log.

    Pre-onset samples are untouched, so they stay bit-identical to the
    nominal run with the same seed.
    """
    out = log.copy()
    for fault in faults:
        if fault.kind == "none":
            continue
        mask = out.t >= fault.onset
        if not mask.any():
            continue
        column = getattr(out, fault.channel)
        if fault.kind == "bias":
            column[mask] = column[mask] + fault.bias_magnitude
        else:
            first = int(np.argmax(mask))
            if first == 0:
                raise ScenarioError(
                    f"stuck fault on {fault.channel} at onset {fault.onset}: "
                    "no frame observed before the onset")
            column[mask] = column[first - 1]
    return out
