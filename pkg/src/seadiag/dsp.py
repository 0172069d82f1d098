"""Streaming DSP primitives: Tustin discretization, residual smoothing filter,
band-limited measurement noise."""

import math

import numpy as np

from . import _backend
from .errors import ConfigurationError

TWO_PI = 2.0 * math.pi


def tustin(num, den, fs):
    """Discretize num(s)/den(s) with the bilinear transform (no prewarping).

    num and den are (s^2, s, 1) coefficient triples; first-order systems pass
    a zero s^2 coefficient in both. Returns (b, a) tuples with a[0] == 1.
    """
    if fs <= 0.0:
        raise ConfigurationError(f"sample rate must be positive, got {fs}")
    b2, b1, b0 = (float(c) for c in num)
    a2, a1, a0 = (float(c) for c in den)
    c = 2.0 * fs
    if a2 == 0.0:
        if b2 != 0.0:
            raise ConfigurationError("improper transfer function (num order > den order)")
        if a1 == 0.0:
            raise ConfigurationError("static transfer function has no discrete realization")
        norm = a1 * c + a0
        b = ((b1 * c + b0) / norm, (b0 - b1 * c) / norm)
        a = (1.0, (a0 - a1 * c) / norm)
    else:
        norm = a2 * c * c + a1 * c + a0
        b = ((b2 * c * c + b1 * c + b0) / norm,
             (2.0 * b0 - 2.0 * b2 * c * c) / norm,
             (b2 * c * c - b1 * c + b0) / norm)
        a = (1.0,
             (2.0 * a0 - 2.0 * a2 * c * c) / norm,
             (a2 * c * c - a1 * c + a0) / norm)
    return b, a


def poles_inside_unit_circle(a):
    """True when every pole of 1/(a0 + a1 z^-1 [+ a2 z^-2]) satisfies |z| < 1."""
    if len(a) == 2:
        return abs(a[1]) < 1.0
    roots = np.roots(a)
    return bool(np.all(np.abs(roots) < 1.0))


class _Df2tState:
    """Shared direct-form-II-transposed streaming core (order <= 2)."""

    def __init__(self, b, a):
        self.b_coeffs = tuple(b)
        self.a_coeffs = tuple(a)
        pad = 3 - len(b)
        self._b0, self._b1, self._b2 = tuple(b) + (0.0,) * pad
        _, self._a1, self._a2 = tuple(a) + (0.0,) * pad
        self.state = np.zeros(2)

    def reset(self):
        self.state[:] = 0.0

    def step(self, x):
        """Push one sample through the filter."""
        s1 = float(self.state[0])
        s2 = float(self.state[1])
        x = float(x)
        y = self._b0 * x + s1
        self.state[0] = self._b1 * x - self._a1 * y + s2
        self.state[1] = self._b2 * x - self._a2 * y
        return y

    def process(self, xs):
        """Filter a whole array via the active backend kernel; the internal
        state carries across calls exactly as with repeated step()."""
        xs = np.ascontiguousarray(xs, dtype=np.float64)
        ys = np.empty_like(xs)
        _backend.kernels().iir2_run(self._b0, self._b1, self._b2,
                                    self._a1, self._a2, self.state, xs, ys)
        return ys

    @property
    def dc_gain(self):
        return sum(self.b_coeffs) / sum(self.a_coeffs)


class LowPass2(_Df2tState):
    """Second-order Butterworth low-pass (Q = 1/sqrt(2)), Tustin-discretized.

    Unit DC gain, no passband peaking; used to smooth the rectified constraint
    residuals before thresholding.
    """

    def __init__(self, cutoff, fs):
        if not cutoff > 0.0:
            raise ConfigurationError(f"cutoff must be positive, got {cutoff}")
        if not cutoff < 0.5 * fs:
            raise ConfigurationError(
                f"cutoff {cutoff} Hz must be below the Nyquist rate {0.5 * fs} Hz")
        w0 = TWO_PI * cutoff
        b, a = tustin((0.0, 0.0, w0 * w0), (1.0, math.sqrt(2.0) * w0, w0 * w0), fs)
        super().__init__(b, a)
        self.cutoff = float(cutoff)
        self.fs = float(fs)
        if not poles_inside_unit_circle(self.a_coeffs):
            raise ConfigurationError("low-pass discretization is unstable")
        if abs(self.dc_gain - 1.0) > 1e-9:
            raise ConfigurationError("low-pass DC gain deviates from unity")


def lowpass_step(filt, x):
    """One streaming sample through a LowPass2 instance."""
    return filt.step(x)


class BandLimitedNoise:
    """Gaussian white noise shaped by a first-order low-pass at `bandwidth`,
    rescaled so the stationary output standard deviation equals `std`.

    One instance per channel; owns its RNG and filter state, so streams are
    reproducible from the seed and independent across channels. A zero std
    produces exact zeros without consuming the RNG.
    """

    def __init__(self, std, bandwidth, fs, rng):
        if std < 0.0:
            raise ConfigurationError(f"noise std must be >= 0, got {std}")
        if not 0.0 < bandwidth < 0.5 * fs:
            raise ConfigurationError(
                f"noise bandwidth {bandwidth} Hz must lie in (0, {0.5 * fs}) Hz")
        wb = TWO_PI * bandwidth
        b, a = tustin((0.0, 0.0, wb), (0.0, 1.0, wb), fs)
        self._filter = _Df2tState(b, a)
        self.std = float(std)
        self.bandwidth = float(bandwidth)
        self.fs = float(fs)
        self._rng = rng
        # Stationary output power of the unscaled filter driven by unit white
        # noise: sum of squared impulse response, closed form for order 1.
        b0, b1 = b
        a1 = a[1]
        power = b0 * b0 + (b1 - a1 * b0) ** 2 / (1.0 - a1 * a1)
        self._gain = self.std / math.sqrt(power)

    def sample(self):
        """One noise sample."""
        if self.std == 0.0:
            return 0.0
        return self._filter.step(self._rng.standard_normal()) * self._gain

    def batch(self, n):
        """n consecutive noise samples; identical to n sample() calls."""
        if self.std == 0.0:
            return np.zeros(n)
        white = self._rng.standard_normal(n)
        return self._filter.process(white) * self._gain


def band_limited_noise(rng, std, bandwidth, fs):
    """Convenience constructor for a BandLimitedNoise stream."""
    return BandLimitedNoise(std, bandwidth, fs, rng)
