"""Pure-Python kernels for the hot loops (plant integration, IIR filtering).

``_kernels_cy.pyx`` is the compiled twin. The two are kept in sync statement
by statement so that, for identical inputs, they produce bit-identical
float64 results (the C build disables FMA contraction for this reason).
Edit one, edit both.
"""

import math

NAME = "python"

TWO_PI = 2.0 * math.pi

# Drive modes for simulate_sea / rk4_step.
MODE_VOLTAGE = 0      # sinusoidal voltage, motor current integrated (L > 0)
MODE_VOLTAGE_L0 = 1   # sinusoidal voltage, algebraic current (L == 0)
MODE_CURRENT = 2      # sinusoidal current prescribed, voltage derived

# Parameter pack layout shared with the compiled kernel.
PP_FIELDS = ("k1", "k2", "g1", "k_t", "k_e", "r_motor", "l_motor",
             "j_gear", "b_gear", "j_load")


def _deriv(k1, k2, g1, kt, ke, rm, lm, jg, bg, jl,
           mode, tg, wg, tl, wl, im, t, amp, freq, offset):
    """Time derivative of (theta_g, omega_g, theta_l, omega_l, i_m)."""
    if mode == MODE_CURRENT:
        i = offset + amp * math.sin(TWO_PI * freq * t)
        v = 0.0
    else:
        v = offset + amp * math.sin(TWO_PI * freq * t)
        if mode == MODE_VOLTAGE:
            i = im
        else:
            i = (v - ke * (g1 * wg)) / rm
    delta = tl - tg
    tau = k1 * delta + k2 * delta * delta
    dwg = (kt * g1 * i - bg * wg + tau) / jg
    dwl = -tau / jl
    if mode == MODE_VOLTAGE:
        dim = (v - i * rm - ke * (g1 * wg)) / lm
    else:
        dim = 0.0
    return wg, dwg, wl, dwl, dim


def rk4_step(pp, mode, tg, wg, tl, wl, im, t, dt, amp, freq, offset):
    """One classical RK4 step from time t; returns the new state tuple."""
    k1, k2, g1, kt, ke, rm, lm, jg, bg, jl = pp
    h = 0.5 * dt
    a1, b1, c1, d1, e1 = _deriv(k1, k2, g1, kt, ke, rm, lm, jg, bg, jl, mode,
                                tg, wg, tl, wl, im, t, amp, freq, offset)
    a2, b2, c2, d2, e2 = _deriv(k1, k2, g1, kt, ke, rm, lm, jg, bg, jl, mode,
                                tg + h * a1, wg + h * b1, tl + h * c1,
                                wl + h * d1, im + h * e1, t + h,
                                amp, freq, offset)
    a3, b3, c3, d3, e3 = _deriv(k1, k2, g1, kt, ke, rm, lm, jg, bg, jl, mode,
                                tg + h * a2, wg + h * b2, tl + h * c2,
                                wl + h * d2, im + h * e2, t + h,
                                amp, freq, offset)
    a4, b4, c4, d4, e4 = _deriv(k1, k2, g1, kt, ke, rm, lm, jg, bg, jl, mode,
                                tg + dt * a3, wg + dt * b3, tl + dt * c3,
                                wl + dt * d3, im + dt * e3, t + dt,
                                amp, freq, offset)
    sixth = dt / 6.0
    tg = tg + sixth * (a1 + 2.0 * (a2 + a3) + a4)
    wg = wg + sixth * (b1 + 2.0 * (b2 + b3) + b4)
    tl = tl + sixth * (c1 + 2.0 * (c2 + c3) + c4)
    wl = wl + sixth * (d1 + 2.0 * (d2 + d3) + d4)
    im = im + sixth * (e1 + 2.0 * (e2 + e3) + e4)
    return tg, wg, tl, wl, im


def drive_outputs(pp, mode, wg, im, t, amp, freq, offset):
    """Motor current and terminal voltage at time t for the current state."""
    k1, k2, g1, kt, ke, rm, lm, jg, bg, jl = pp
    if mode == MODE_CURRENT:
        i = offset + amp * math.sin(TWO_PI * freq * t)
        didt = amp * (TWO_PI * freq) * math.cos(TWO_PI * freq * t)
        v = i * rm + lm * didt + ke * (g1 * wg)
    else:
        v = offset + amp * math.sin(TWO_PI * freq * t)
        if mode == MODE_VOLTAGE:
            i = im
        else:
            i = (v - ke * (g1 * wg)) / rm
    return i, v


def simulate_sea(pp, x0, mode, amp, freq, offset, dt, n_steps, decim, out):
    """Fixed-step RK4 over n_steps; every decim-th state is written to out.

    out is a float64 array of shape (n_steps // decim + 1, 7) with rows
    [t, theta_g, omega_g, theta_l, omega_l, i_m, v_m]. Time is accumulated
    (t += dt) so that the loop composes exactly like repeated rk4_step calls.
    Returns -1 on success, else the index of the first non-finite step.
    """
    pp = tuple(float(p) for p in pp)
    tg, wg, tl, wl, im = (float(x) for x in x0)
    t = 0.0
    i, v = drive_outputs(pp, mode, wg, im, t, amp, freq, offset)
    out[0, 0] = t
    out[0, 1] = tg
    out[0, 2] = wg
    out[0, 3] = tl
    out[0, 4] = wl
    out[0, 5] = i
    out[0, 6] = v
    frame = 1
    for k in range(1, n_steps + 1):
        tg, wg, tl, wl, im = rk4_step(pp, mode, tg, wg, tl, wl, im,
                                      t, dt, amp, freq, offset)
        t = t + dt
        if not (math.isfinite(tg) and math.isfinite(wg) and math.isfinite(tl)
                and math.isfinite(wl) and math.isfinite(im)):
            return k
        if k % decim == 0:
            i, v = drive_outputs(pp, mode, wg, im, t, amp, freq, offset)
            out[frame, 0] = t
            out[frame, 1] = tg
            out[frame, 2] = wg
            out[frame, 3] = tl
            out[frame, 4] = wl
            out[frame, 5] = i
            out[frame, 6] = v
            frame += 1
    return -1


def iir2_run(b0, b1, b2, a1, a2, state, x, y):
    """Direct-form-II-transposed IIR (order <= 2) over an array, streaming.

    state is a length-2 float64 array carrying (s1, s2) across calls; x and y
    are equal-length float64 arrays (y is written in place).
    """
    s1 = float(state[0])
    s2 = float(state[1])
    n = len(x)
    for k in range(n):
        xk = float(x[k])
        yk = b0 * xk + s1
        s1 = b1 * xk - a1 * yk + s2
        s2 = b2 * xk - a2 * yk
        y[k] = yk
    state[0] = s1
    state[1] = s2
