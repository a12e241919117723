# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled numerical kernels.

Same algorithms and the same public functions as ``_kernels_py``; the loops
run without the GIL so sweep rows can be evaluated from worker threads.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, fabs, sqrt, pow, INFINITY, NAN, nextafter
from libc.stdlib cimport malloc, free

cnp.import_array()

cdef double SERIES_LIMIT = 10.0
cdef double RESCALE_ABOVE = 1e250
cdef double RESCALE_BY = 1e-250

OK = 0
STEP_UNDERFLOW = 1
MAX_STEPS = 2
NOT_POSITIVE = 3

cdef double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9
cdef double A21 = 1.0 / 5
cdef double A31 = 3.0 / 40, A32 = 9.0 / 40
cdef double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9
cdef double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561, A54 = -212.0 / 729
cdef double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176
cdef double A65 = -5103.0 / 18656
cdef double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784
cdef double B6 = 11.0 / 84
cdef double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920, E5 = -17253.0 / 339200
cdef double E6 = 22.0 / 525, E7 = -1.0 / 40


cdef inline int _series_start(int n_max, double ax) nogil:
    cdef int m = (n_max if n_max > <int>ax else <int>ax) + 1
    m = m + 30 + <int>sqrt(60.0 * m)
    return m + (m & 1)


cdef void _bessel_fill(double x, int n_max, double* out) nogil:
    cdef double ax = fabs(x)
    cdef double half, q, lead, term, total
    cdef double two_over_x, j_next, j_cur, j_prev, norm
    cdef int n, k, m, i
    for i in range(n_max + 1):
        out[i] = 0.0
    if ax == 0.0:
        out[0] = 1.0
        return
    if ax <= SERIES_LIMIT:
        half = 0.5 * ax
        q = -half * half
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
                term *= q / (<double>k * (k + n))
                total += term
                if fabs(term) <= 1e-17 * fabs(total) and k > 2:
                    break
                k += 1
            out[n] = total
    else:
        m = _series_start(n_max, ax)
        two_over_x = 2.0 / ax
        j_next = 0.0
        j_cur = 1.0
        norm = 0.0
        k = m
        while k > 0:
            j_prev = k * two_over_x * j_cur - j_next
            j_next = j_cur
            j_cur = j_prev
            if fabs(j_cur) > RESCALE_ABOVE:
                j_cur *= RESCALE_BY
                j_next *= RESCALE_BY
                norm *= RESCALE_BY
                for i in range(n_max + 1):
                    out[i] *= RESCALE_BY
            if ((k - 1) & 1) == 0 and k - 1 > 0:
                norm += j_cur
            if k - 1 <= n_max:
                out[k - 1] = j_cur
            k -= 1
        norm = 2.0 * norm + j_cur
        for i in range(n_max + 1):
            out[i] /= norm
    if x < 0.0:
        i = 1
        while i <= n_max:
            out[i] = -out[i]
            i += 2


def bessel_jn(double x, int n_max):
    """Return J_0(x) ... J_n_max(x) as a float64 array."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(n_max + 1)
    _bessel_fill(x, n_max, &out[0])
    return out


cdef inline double _polarization(double om1, double omd, double g1, double g2) nogil:
    cdef double s = om1 * om1 / (g1 * g2)
    cdef double r = omd / g2
    return s / (1.0 + r * r + s)


def polarization(double omega_1, double omega_d, double gamma1, double gamma2):
    return _polarization(omega_1, omega_d, gamma1, gamma2)


cdef void _dominant(double omega0, double omega_l1, double omega_l, double omega_t1,
                    double omega_t, double g1, double g2, int l_max, double* jn,
                    double* p_best, double* ratio, long* l_best) nogil:
    cdef double x = omega_l1 / omega_l if omega_l != 0.0 else 0.0
    cdef double base = omega0 - omega_t
    cdef double best = -1.0, second = -1.0, j, p
    cdef int idx, l, al
    cdef long l_star = 0
    _bessel_fill(x, l_max, jn)
    for idx in range(2 * l_max + 1):
        if idx == 0:
            l = 0
        elif idx & 1:
            l = (idx + 1) // 2
        else:
            l = -(idx // 2)
        al = l if l >= 0 else -l
        j = jn[al]
        if l < 0 and (al & 1):
            j = -j
        p = _polarization(2.0 * omega_t1 * j, base - l * omega_l, g1, g2)
        if p > best:
            second = best
            best = p
            l_star = l
        elif p > second:
            second = p
    p_best[0] = best
    l_best[0] = l_star
    if second < 0.0:
        ratio[0] = INFINITY
    elif best <= 0.0:
        ratio[0] = 1.0
    elif second <= 0.0:
        ratio[0] = INFINITY
    else:
        ratio[0] = best / second


def dominant_sideband(double omega0, double omega_l1, double omega_l, double omega_t1,
                      double omega_t, double gamma1, double gamma2, int l_max):
    """Best single sideband of a decomposition; returns ``(P, ratio, l_star)``."""
    cdef double p, ratio
    cdef long l_star
    cdef double* jn = <double*> malloc((l_max + 1) * sizeof(double))
    if jn == NULL:
        raise MemoryError()
    try:
        _dominant(omega0, omega_l1, omega_l, omega_t1, omega_t, gamma1, gamma2, l_max,
                  jn, &p, &ratio, &l_star)
    finally:
        free(jn)
    return p, ratio, l_star


def dominant_sideband_grid(omega0, omega_l1, omega_l, omega_t1, omega_t,
                           double gamma1, double gamma2, int l_max):
    cdef double[::1] o0 = np.ascontiguousarray(omega0, dtype=np.float64)
    cdef double[::1] ol1 = np.ascontiguousarray(omega_l1, dtype=np.float64)
    cdef double[::1] ol = np.ascontiguousarray(omega_l, dtype=np.float64)
    cdef double[::1] ot1 = np.ascontiguousarray(omega_t1, dtype=np.float64)
    cdef double[::1] ot = np.ascontiguousarray(omega_t, dtype=np.float64)
    cdef Py_ssize_t n = o0.shape[0], i
    p_arr = np.empty(n)
    r_arr = np.empty(n)
    l_arr = np.empty(n, dtype=np.int64)
    cdef double[::1] p_out = p_arr
    cdef double[::1] r_out = r_arr
    cdef cnp.int64_t[::1] l_out = l_arr
    cdef long l_star
    cdef double* jn = <double*> malloc((l_max + 1) * sizeof(double))
    if jn == NULL:
        raise MemoryError()
    try:
        with nogil:
            for i in range(n):
                _dominant(o0[i], ol1[i], ol[i], ot1[i], ot[i], gamma1, gamma2, l_max,
                          jn, &p_out[i], &r_out[i], &l_star)
                l_out[i] = l_star
    finally:
        free(jn)
    return p_arr, r_arr, l_arr


cdef struct TwoLevel:
    double omega0, omega_l1, omega_l, omega_t1, omega_t
    int linear
    double g_down, g_up, g_coh


cdef inline void _rhs(double t, double* y, TwoLevel* p, double* dy) nogil:
    cdef double eps = p.omega0 - p.omega_l1 * cos(p.omega_l * t)
    cdef double hr, hi, drive, dpop
    if p.linear:
        hr = 2.0 * p.omega_t1 * cos(p.omega_t * t)
        hi = 0.0
    else:
        hr = p.omega_t1 * cos(p.omega_t * t)
        hi = p.omega_t1 * sin(p.omega_t * t)
    drive = 2.0 * (hi * y[2] - hr * y[3])
    dy[0] = drive + p.g_down * y[1] - p.g_up * y[0]
    dy[1] = -drive - p.g_down * y[1] + p.g_up * y[0]
    dpop = y[1] - y[0]
    dy[2] = -eps * y[3] + hi * dpop - p.g_coh * y[2]
    dy[3] = eps * y[2] - hr * dpop - p.g_coh * y[3]
    dy[4] = y[0] - y[1]


cdef int _window(double* y, double t0, double window, TwoLevel* p, double atol,
                 double* h_io, long max_steps, long* steps_out) nogil:
    cdef double k1[5]
    cdef double k2[5]
    cdef double k3[5]
    cdef double k4[5]
    cdef double k5[5]
    cdef double k6[5]
    cdef double k7[5]
    cdef double yy[5]
    cdef double yn[5]
    cdef double t = t0, t_end = t0 + window
    cdef double h = h_io[0] if h_io[0] < window else window
    cdef double h_next = h
    cdef double tiny = 16.0 * (nextafter(t_end, INFINITY) - t_end)
    cdef double slack = 10.0 * atol
    cdef double err, e, fac, coh2
    cdef long n_steps = 0
    cdef int status = 0, last, i
    _rhs(t, y, p, k1)
    while t_end - t > tiny:
        if n_steps >= max_steps:
            status = 2
            break
        last = 0
        if t + h >= t_end:
            h = t_end - t
            last = 1
        if h <= tiny:
            status = 1
            break
        for i in range(5):
            yy[i] = y[i] + h * A21 * k1[i]
        _rhs(t + C2 * h, yy, p, k2)
        for i in range(5):
            yy[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i])
        _rhs(t + C3 * h, yy, p, k3)
        for i in range(5):
            yy[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
        _rhs(t + C4 * h, yy, p, k4)
        for i in range(5):
            yy[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
        _rhs(t + C5 * h, yy, p, k5)
        for i in range(5):
            yy[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i]
                                + A65 * k5[i])
        _rhs(t + h, yy, p, k6)
        for i in range(5):
            yn[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i]
                                + B6 * k6[i])
        _rhs(t + h, yn, p, k7)
        err = 0.0
        for i in range(4):
            e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                     + E7 * k7[i])
            e = fabs(e) / atol
            if e > err:
                err = e
        if err <= 1.0:
            t = t_end if last else t + h
            for i in range(5):
                y[i] = yn[i]
                k1[i] = k7[i]
            n_steps += 1
            coh2 = y[2] * y[2] + y[3] * y[3]
            if y[0] < -slack or y[1] < -slack or coh2 > y[0] * y[1] + slack:
                status = 3
                break
            if err == 0.0:
                fac = 5.0
            else:
                fac = 0.9 * pow(err, -0.2)
                if fac > 5.0:
                    fac = 5.0
            if not last:
                h *= fac
                h_next = h
        else:
            fac = 0.9 * pow(err, -0.2)
            if fac < 0.2:
                fac = 0.2
            h *= fac
            h_next = h
    h_io[0] = h_next
    steps_out[0] = n_steps
    return status


def two_level_window(state, double t0, double window, params, rates, double atol,
                     double h0, long max_steps):
    """Integrate the driven two-level Lindblad equation over ``[t0, t0 + window]``.

    Returns ``(state, mean_polarization, h_next, n_steps, status)``.
    """
    cdef TwoLevel p
    p.omega0, p.omega_l1, p.omega_l, p.omega_t1, p.omega_t = (
        params[0], params[1], params[2], params[3], params[4])
    p.linear = 1 if params[5] else 0
    p.g_down, p.g_up, p.g_coh = rates[0], rates[1], rates[2]
    cdef double y[5]
    y[0], y[1], y[2], y[3] = state[0], state[1], state[2], state[3]
    y[4] = 0.0
    cdef double h = h0
    cdef long n_steps = 0
    cdef int status
    with nogil:
        status = _window(y, t0, window, &p, atol, &h, max_steps, &n_steps)
    mean = y[4] / window if status == 0 else NAN
    return (y[0], y[1], y[2], y[3]), mean, h, n_steps, status
