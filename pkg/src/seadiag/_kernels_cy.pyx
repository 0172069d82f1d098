# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled kernels for the hot loops (plant integration, IIR filtering).

Statement-by-statement twin of ``_kernels_py``; arithmetic ordering is kept
identical so results match the pure-Python backend bit for bit (the build
disables FMA contraction). Edit one, edit both.
"""

from libc.math cimport sin, cos, isfinite

NAME = "compiled"

cdef double TWO_PI = 2.0 * 3.141592653589793

MODE_VOLTAGE = 0
MODE_VOLTAGE_L0 = 1
MODE_CURRENT = 2

PP_FIELDS = ("k1", "k2", "g1", "k_t", "k_e", "r_motor", "l_motor",
             "j_gear", "b_gear", "j_load")


cdef struct Deriv:
    double tg
    double wg
    double tl
    double wl
    double im


cdef inline Deriv _deriv(double k1, double k2, double g1, double kt, double ke,
                         double rm, double lm, double jg, double bg, double jl,
                         int mode, double tg, double wg, double tl, double wl,
                         double im, double t, double amp, double freq,
                         double offset) noexcept nogil:
    cdef double i, v, delta, tau
    cdef Deriv d
    if mode == 2:
        i = offset + amp * sin(TWO_PI * freq * t)
        v = 0.0
    else:
        v = offset + amp * sin(TWO_PI * freq * t)
        if mode == 0:
            i = im
        else:
            i = (v - ke * (g1 * wg)) / rm
    delta = tl - tg
    tau = k1 * delta + k2 * delta * delta
    d.tg = wg
    d.wg = (kt * g1 * i - bg * wg + tau) / jg
    d.tl = wl
    d.wl = -tau / jl
    if mode == 0:
        d.im = (v - i * rm - ke * (g1 * wg)) / lm
    else:
        d.im = 0.0
    return d


cdef inline void _drive_outputs(double k1, double k2, double g1, double kt,
                                double ke, double rm, double lm, double jg,
                                double bg, double jl, int mode, double wg,
                                double im, double t, double amp, double freq,
                                double offset, double *i_out,
                                double *v_out) noexcept nogil:
    cdef double i, v, didt
    if mode == 2:
        i = offset + amp * sin(TWO_PI * freq * t)
        didt = amp * (TWO_PI * freq) * cos(TWO_PI * freq * t)
        v = i * rm + lm * didt + ke * (g1 * wg)
    else:
        v = offset + amp * sin(TWO_PI * freq * t)
        if mode == 0:
            i = im
        else:
            i = (v - ke * (g1 * wg)) / rm
    i_out[0] = i
    v_out[0] = v


def rk4_step(pp, int mode, double tg, double wg, double tl, double wl,
             double im, double t, double dt, double amp, double freq,
             double offset):
    """One classical RK4 step from time t; returns the new state tuple."""
    cdef double k1, k2, g1, kt, ke, rm, lm, jg, bg, jl
    k1, k2, g1, kt, ke, rm, lm, jg, bg, jl = pp
    cdef double h = 0.5 * dt
    cdef Deriv d1, d2, d3, d4
    d1 = _deriv(k1, k2, g1, kt, ke, rm, lm, jg, bg, jl, mode,
                tg, wg, tl, wl, im, t, amp, freq, offset)
    d2 = _deriv(k1, k2, g1, kt, ke, rm, lm, jg, bg, jl, mode,
                tg + h * d1.tg, wg + h * d1.wg, tl + h * d1.tl,
                wl + h * d1.wl, im + h * d1.im, t + h, amp, freq, offset)
    d3 = _deriv(k1, k2, g1, kt, ke, rm, lm, jg, bg, jl, mode,
                tg + h * d2.tg, wg + h * d2.wg, tl + h * d2.tl,
                wl + h * d2.wl, im + h * d2.im, t + h, amp, freq, offset)
    d4 = _deriv(k1, k2, g1, kt, ke, rm, lm, jg, bg, jl, mode,
                tg + dt * d3.tg, wg + dt * d3.wg, tl + dt * d3.tl,
                wl + dt * d3.wl, im + dt * d3.im, t + dt, amp, freq, offset)
    cdef double sixth = dt / 6.0
    tg = tg + sixth * (d1.tg + 2.0 * (d2.tg + d3.tg) + d4.tg)
    wg = wg + sixth * (d1.wg + 2.0 * (d2.wg + d3.wg) + d4.wg)
    tl = tl + sixth * (d1.tl + 2.0 * (d2.tl + d3.tl) + d4.tl)
    wl = wl + sixth * (d1.wl + 2.0 * (d2.wl + d3.wl) + d4.wl)
    im = im + sixth * (d1.im + 2.0 * (d2.im + d3.im) + d4.im)
    return tg, wg, tl, wl, im


def drive_outputs(pp, int mode, double wg, double im, double t, double amp,
                  double freq, double offset):
    """Motor current and terminal voltage at time t for the current state."""
    cdef double k1, k2, g1, kt, ke, rm, lm, jg, bg, jl
    k1, k2, g1, kt, ke, rm, lm, jg, bg, jl = pp
    cdef double i = 0.0, v = 0.0
    _drive_outputs(k1, k2, g1, kt, ke, rm, lm, jg, bg, jl, mode,
                   wg, im, t, amp, freq, offset, &i, &v)
    return i, v


def simulate_sea(double[::1] pp, double[::1] x0, int mode, double amp,
                 double freq, double offset, double dt, Py_ssize_t n_steps,
                 Py_ssize_t decim, double[:, ::1] out):
    """Fixed-step RK4 over n_steps; every decim-th state is written to out.

    Same contract as the pure-Python twin. Returns -1 on success, else the
    index of the first non-finite step.
    """
    cdef double k1 = pp[0], k2 = pp[1], g1 = pp[2], kt = pp[3], ke = pp[4]
    cdef double rm = pp[5], lm = pp[6], jg = pp[7], bg = pp[8], jl = pp[9]
    cdef double tg = x0[0], wg = x0[1], tl = x0[2], wl = x0[3], im = x0[4]
    cdef double t = 0.0
    cdef double h, sixth
    cdef double i = 0.0, v = 0.0
    cdef Deriv d1, d2, d3, d4
    cdef Py_ssize_t k, frame
    cdef Py_ssize_t status = -1

    _drive_outputs(k1, k2, g1, kt, ke, rm, lm, jg, bg, jl, mode,
                   wg, im, t, amp, freq, offset, &i, &v)
    out[0, 0] = t
    out[0, 1] = tg
    out[0, 2] = wg
    out[0, 3] = tl
    out[0, 4] = wl
    out[0, 5] = i
    out[0, 6] = v
    frame = 1
    h = 0.5 * dt
    sixth = dt / 6.0
    with nogil:
        for k in range(1, n_steps + 1):
            d1 = _deriv(k1, k2, g1, kt, ke, rm, lm, jg, bg, jl, mode,
                        tg, wg, tl, wl, im, t, amp, freq, offset)
            d2 = _deriv(k1, k2, g1, kt, ke, rm, lm, jg, bg, jl, mode,
                        tg + h * d1.tg, wg + h * d1.wg, tl + h * d1.tl,
                        wl + h * d1.wl, im + h * d1.im, t + h,
                        amp, freq, offset)
            d3 = _deriv(k1, k2, g1, kt, ke, rm, lm, jg, bg, jl, mode,
                        tg + h * d2.tg, wg + h * d2.wg, tl + h * d2.tl,
                        wl + h * d2.wl, im + h * d2.im, t + h,
                        amp, freq, offset)
            d4 = _deriv(k1, k2, g1, kt, ke, rm, lm, jg, bg, jl, mode,
                        tg + dt * d3.tg, wg + dt * d3.wg, tl + dt * d3.tl,
                        wl + dt * d3.wl, im + dt * d3.im, t + dt,
                        amp, freq, offset)
            tg = tg + sixth * (d1.tg + 2.0 * (d2.tg + d3.tg) + d4.tg)
            wg = wg + sixth * (d1.wg + 2.0 * (d2.wg + d3.wg) + d4.wg)
            tl = tl + sixth * (d1.tl + 2.0 * (d2.tl + d3.tl) + d4.tl)
            wl = wl + sixth * (d1.wl + 2.0 * (d2.wl + d3.wl) + d4.wl)
            im = im + sixth * (d1.im + 2.0 * (d2.im + d3.im) + d4.im)
            t = t + dt
            if not (isfinite(tg) and isfinite(wg) and isfinite(tl)
                    and isfinite(wl) and isfinite(im)):
                status = k
                break
            if k % decim == 0:
                _drive_outputs(k1, k2, g1, kt, ke, rm, lm, jg, bg, jl, mode,
                               wg, im, t, amp, freq, offset, &i, &v)
                out[frame, 0] = t
                out[frame, 1] = tg
                out[frame, 2] = wg
                out[frame, 3] = tl
                out[frame, 4] = wl
                out[frame, 5] = i
                out[frame, 6] = v
                frame += 1
    return status


def iir2_run(double b0, double b1, double b2, double a1, double a2,
             double[::1] state, double[::1] x, double[::1] y):
    """Direct-form-II-transposed IIR (order <= 2) over an array, streaming."""
    cdef double s1 = state[0]
    cdef double s2 = state[1]
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t k
    cdef double xk, yk
    with nogil:
        for k in range(n):
            xk = x[k]
            yk = b0 * xk + s1
            s1 = b1 * xk - a1 * yk + s2
            s2 = b2 * xk - a2 * yk
            y[k] = yk
    state[0] = s1
    state[1] = s2
