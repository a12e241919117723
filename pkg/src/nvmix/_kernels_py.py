"""Pure-Python implementation of the numerical kernels.

Mirrors ``_kernels.pyx`` function by function. It is used when the compiled
extension is not available, or when ``NVMIX_PURE_PYTHON=1`` is set.
"""

import math

import numpy as np

SERIES_LIMIT = 10.0
_RESCALE_ABOVE = 1e250
_RESCALE_BY = 1e-250

# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71 / 57600,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)

# status codes shared with the compiled kernel
OK = 0
STEP_UNDERFLOW = 1
MAX_STEPS = 2
NOT_POSITIVE = 3


def _series_start(n_max, ax):
    m = max(n_max, int(ax)) + 1
    m = m + 30 + int(math.sqrt(60.0 * m))
    return m + (m & 1)


def bessel_jn(x, n_max):
    """Return J_0(x) ... J_n_max(x) as a float64 array."""
    x = float(x)
    n_max = int(n_max)
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    out = np.zeros(n_max + 1)
    ax = abs(x)
    if ax == 0.0:
        out[0] = 1.0
        return out
    if ax <= SERIES_LIMIT:
        half = 0.5 * ax
        q = -half * half
        # leading term (x/2)^n / n!, built up incrementally
        lead = 1.0
        for n in range(n_max + 1):
            if n > 0:
                lead *= half / n
            if lead == 0.0:
                break
            term = lead
            total = term
            k = 1
            while True:
                term *= q / (k * (k + n))
                total += term
                if abs(term) <= 1e-17 * abs(total) and k > 2:
                    break
                k += 1
            out[n] = total
    else:
        # Miller backward recurrence, normalised by J_0 + 2 sum J_2k = 1
        m = _series_start(n_max, ax)
        two_over_x = 2.0 / ax
        j_next = 0.0
        j_cur = 1.0
        norm = 0.0
        for k in range(m, 0, -1):
            j_prev = k * two_over_x * j_cur - j_next
            j_next = j_cur
            j_cur = j_prev
            if abs(j_cur) > _RESCALE_ABOVE:
                j_cur *= _RESCALE_BY
                j_next *= _RESCALE_BY
                norm *= _RESCALE_BY
                out *= _RESCALE_BY
            if (k - 1) & 1 == 0 and k - 1 > 0:
                norm += j_cur
            if k - 1 <= n_max:
                out[k - 1] = j_cur
        norm = 2.0 * norm + j_cur
        out /= norm
    if x < 0.0:
        out[1::2] *= -1.0
    return out


def polarization(omega_1, omega_d, gamma1, gamma2):
    s = omega_1 * omega_1 / (gamma1 * gamma2)
    r = omega_d / gamma2
    return s / (1.0 + r * r + s)


def dominant_sideband(omega0, omega_l1, omega_l, omega_t1, omega_t, gamma1, gamma2, l_max):
    """Best single sideband of a decomposition.

    Returns ``(P, ratio, l_star)``. Sideband orders are visited as
    0, 1, -1, 2, -2, ... and only a strictly larger P replaces the current
    best, so ties resolve to the smallest ``|l|`` with positive ``l`` first.
    """
    l_max = int(l_max)
    x = omega_l1 / omega_l if omega_l != 0.0 else 0.0
    jn = bessel_jn(x, l_max)
    base = omega0 - omega_t
    best = -1.0
    second = -1.0
    l_star = 0
    for idx in range(2 * l_max + 1):
        if idx == 0:
            l = 0
        elif idx & 1:
            l = (idx + 1) // 2
        else:
            l = -(idx // 2)
        j = jn[abs(l)]
        if l < 0 and (l & 1):
            j = -j
        om1 = 2.0 * omega_t1 * j
        omd = base - l * omega_l
        p = polarization(om1, omd, gamma1, gamma2)
        if p > best:
            second = best
            best = p
            l_star = l
        elif p > second:
            second = p
    if second < 0.0:
        ratio = math.inf  # a single candidate
    elif best <= 0.0:
        ratio = 1.0
    elif second <= 0.0:
        ratio = math.inf
    else:
        ratio = best / second
    return best, ratio, l_star


def dominant_sideband_grid(omega0, omega_l1, omega_l, omega_t1, omega_t, gamma1, gamma2, l_max):
    omega0 = np.ascontiguousarray(omega0, dtype=np.float64)
    omega_l1 = np.ascontiguousarray(omega_l1, dtype=np.float64)
    omega_l = np.ascontiguousarray(omega_l, dtype=np.float64)
    omega_t1 = np.ascontiguousarray(omega_t1, dtype=np.float64)
    omega_t = np.ascontiguousarray(omega_t, dtype=np.float64)
    n = omega0.shape[0]
    p_out = np.empty(n)
    ratio_out = np.empty(n)
    l_out = np.empty(n, dtype=np.int64)
    for i in range(n):
        p_out[i], ratio_out[i], l_out[i] = dominant_sideband(
            omega0[i], omega_l1[i], omega_l[i], omega_t1[i], omega_t[i], gamma1, gamma2, l_max
        )
    return p_out, ratio_out, l_out


def _two_level_rhs(t, y, par):
    (omega0, omega_l1, omega_l, omega_t1, omega_t, linear, g_down, g_up, g_coh) = par
    r11, r22, re12, im12 = y[0], y[1], y[2], y[3]
    eps = omega0 - omega_l1 * math.cos(omega_l * t)
    if linear:
        hr = 2.0 * omega_t1 * math.cos(omega_t * t)
        hi = 0.0
    else:
        hr = omega_t1 * math.cos(omega_t * t)
        hi = omega_t1 * math.sin(omega_t * t)
    # 2 Im(h * conj(rho12))
    drive = 2.0 * (hi * re12 - hr * im12)
    d11 = drive + g_down * r22 - g_up * r11
    d22 = -drive - g_down * r22 + g_up * r11
    # d rho12 = i eps rho12 - i h (rho22 - rho11) - g_coh rho12
    dpop = r22 - r11
    d12r = -eps * im12 + hi * dpop - g_coh * re12
    d12i = eps * re12 - hr * dpop - g_coh * im12
    return (d11, d22, d12r, d12i, r11 - r22)


def two_level_window(state, t0, window, params, rates, atol, h0, max_steps):
    """Integrate the driven two-level Lindblad equation over ``[t0, t0 + window]``.

    ``state`` is ``(rho11, rho22, Re rho12, Im rho12)``; ``params`` is
    ``(Omega0, Omega_L1, Omega_L, Omega_T1, Omega_T, linear)`` and ``rates``
    is ``(down, up, coherence_decay)``. Uses adaptive Dormand-Prince 5(4)
    with absolute local error ``atol`` per step. Positivity is checked after
    every accepted step with a slack of ``10 * atol``.

    Returns ``(state, mean_polarization, h_next, n_steps, status)``.
    """
    par = tuple(params) + tuple(rates)
    y = [float(state[0]), float(state[1]), float(state[2]), float(state[3]), 0.0]
    t = float(t0)
    t_end = t + float(window)
    h = min(float(h0), float(window))
    h_next = h
    n_steps = 0
    status = OK
    tiny = 16.0 * math.ulp(t_end)
    slack = 10.0 * atol
    k1 = _two_level_rhs(t, y, par)
    while t_end - t > tiny:
        if n_steps >= max_steps:
            status = MAX_STEPS
            break
        last = False
        if t + h >= t_end:
            h = t_end - t
            last = True
        if h <= tiny:
            status = STEP_UNDERFLOW
            break
        yy = [y[i] + h * _A21 * k1[i] for i in range(5)]
        k2 = _two_level_rhs(t + _C2 * h, yy, par)
        yy = [y[i] + h * (_A31 * k1[i] + _A32 * k2[i]) for i in range(5)]
        k3 = _two_level_rhs(t + _C3 * h, yy, par)
        yy = [y[i] + h * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i]) for i in range(5)]
        k4 = _two_level_rhs(t + _C4 * h, yy, par)
        yy = [
            y[i] + h * (_A51 * k1[i] + _A52 * k2[i] + _A53 * k3[i] + _A54 * k4[i])
            for i in range(5)
        ]
        k5 = _two_level_rhs(t + _C5 * h, yy, par)
        yy = [
            y[i]
            + h * (_A61 * k1[i] + _A62 * k2[i] + _A63 * k3[i] + _A64 * k4[i] + _A65 * k5[i])
            for i in range(5)
        ]
        k6 = _two_level_rhs(t + h, yy, par)
        y_new = [
            y[i] + h * (_B1 * k1[i] + _B3 * k3[i] + _B4 * k4[i] + _B5 * k5[i] + _B6 * k6[i])
            for i in range(5)
        ]
        k7 = _two_level_rhs(t + h, y_new, par)
        err = 0.0
        for i in range(4):
            e = h * (
                _E1 * k1[i] + _E3 * k3[i] + _E4 * k4[i] + _E5 * k5[i] + _E6 * k6[i] + _E7 * k7[i]
            )
            err = max(err, abs(e) / atol)
        if err <= 1.0:
            t = t_end if last else t + h
            y = y_new
            k1 = k7
            n_steps += 1
            r11, r22 = y[0], y[1]
            coh2 = y[2] * y[2] + y[3] * y[3]
            if r11 < -slack or r22 < -slack or coh2 > r11 * r22 + slack:
                status = NOT_POSITIVE
                break
            fac = 5.0 if err == 0.0 else min(5.0, 0.9 * err ** -0.2)
            if not last:
                h *= fac
                h_next = h
        else:
            h *= max(0.2, 0.9 * err ** -0.2)
            h_next = h
    mean = y[4] / float(window) if status == OK else math.nan
    return (y[0], y[1], y[2], y[3]), mean, h_next, n_steps, status
