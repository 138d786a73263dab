# cython: boundscheck=False, wraparound=False, language_level=3
"""Compiled kernels for the hot orbit loops.

Mirrors sawmap._kernels_py operation-for-operation; the build disables
FP contraction so results are bit-identical to the Python twin.
"""

from libc.math cimport INFINITY

BACKEND = "compiled"

OK = 0
BELOW = 1
ABOVE = 2
TIMEOUT = 3

cdef double _TINY = 1e-300

cdef int _OK = 0
cdef int _BELOW = 1
cdef int _ABOVE = 2
cdef int _TIMEOUT = 3


cdef inline Py_ssize_t _locate(const double[::1] bp, double x) noexcept nogil:
    cdef Py_ssize_t lo, hi, mid
    if x >= bp[0]:
        return 0
    lo = 0
    hi = bp.shape[0] - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if bp[mid] <= x:
            hi = mid
        else:
            lo = mid
    return hi


cdef inline double _eval(const double[::1] bp, const double[::1] slope,
                         const double[::1] anchor, const double[::1] nodeval,
                         double x) noexcept nogil:
    cdef Py_ssize_t m = _locate(bp, x)
    if bp[m] == x:
        return nodeval[m]
    return slope[m - 1] * (x - anchor[m - 1])


cdef inline int _step(const double[::1] bp, const double[::1] slope,
                      const double[::1] anchor, const double[::1] nodeval,
                      double floor, double x, double* xn) noexcept nogil:
    if x == 0.0:
        xn[0] = 0.0
        return _OK
    if x < _TINY:
        xn[0] = 0.0
        return _OK
    if x < floor:
        xn[0] = x
        return _BELOW
    if x > bp[0]:
        xn[0] = x
        return _ABOVE
    xn[0] = _eval(bp, slope, anchor, nodeval, x)
    return _OK


cdef inline double _union_dist(const double[::1] los, const double[::1] his,
                               double x) noexcept nogil:
    cdef double d = INFINITY
    cdef double g
    cdef Py_ssize_t i
    for i in range(los.shape[0]):
        if x < los[i]:
            g = los[i] - x
        elif x > his[i]:
            g = x - his[i]
        else:
            return 0.0
        if g < d:
            d = g
    return d


def locate_index(const double[::1] bp, double x):
    """Index of the first breakpoint <= x (ties belong to the piece above)."""
    return _locate(bp, x)


def map_eval(const double[::1] bp, const double[::1] slope,
             const double[::1] anchor, const double[::1] nodeval, double x):
    """Evaluate the map at an in-domain point (floor <= x <= r0)."""
    return _eval(bp, slope, anchor, nodeval, x)


def orbit_fill(const double[::1] bp, const double[::1] slope,
               const double[::1] anchor, const double[::1] nodeval,
               double floor, double[::1] out, Py_ssize_t i0, Py_ssize_t n):
    cdef Py_ssize_t i = i0
    cdef double x = out[i]
    cdef double xn
    cdef int code
    with nogil:
        while i < n:
            code = _step(bp, slope, anchor, nodeval, floor, x, &xn)
            if code != _OK:
                break
            i += 1
            out[i] = xn
            x = xn
        else:
            code = _OK
    if i == n:
        code = _OK
    return code, i


def escape_time(const double[::1] bp, const double[::1] slope,
                const double[::1] anchor, const double[::1] nodeval,
                double floor, double x0, double threshold, long cap, long n0):
    cdef double x = x0
    cdef double xn
    cdef long n = n0
    cdef int code
    with nogil:
        while True:
            if x < threshold:
                code = _OK
                break
            if n >= cap:
                code = _TIMEOUT
                break
            code = _step(bp, slope, anchor, nodeval, floor, x, &xn)
            if code != _OK:
                break
            x = xn
            n += 1
    return code, n, x


def converge_time(const double[::1] bp, const double[::1] slope,
                  const double[::1] anchor, const double[::1] nodeval,
                  double floor, double x0, double target, double tol,
                  long cap, long n0):
    cdef double x = x0
    cdef double xn, d
    cdef long n = n0
    cdef int code
    with nogil:
        while True:
            d = x - target
            if -tol <= d <= tol:
                code = _OK
                break
            if n >= cap:
                code = _TIMEOUT
                break
            code = _step(bp, slope, anchor, nodeval, floor, x, &xn)
            if code != _OK:
                break
            x = xn
            n += 1
    return code, n, x


def entry_time(const double[::1] bp, const double[::1] slope,
               const double[::1] anchor, const double[::1] nodeval,
               double floor, double x0, const double[::1] los,
               const double[::1] his, long cap, long n0):
    cdef double x = x0
    cdef double xn
    cdef long n = n0
    cdef int code
    with nogil:
        while True:
            if _union_dist(los, his, x) == 0.0:
                code = _OK
                break
            if n >= cap:
                code = _TIMEOUT
                break
            code = _step(bp, slope, anchor, nodeval, floor, x, &xn)
            if code != _OK:
                break
            x = xn
            n += 1
    return code, n, x


def absorb_time(const double[::1] bp, const double[::1] slope,
                const double[::1] anchor, const double[::1] nodeval,
                double floor, double x0, const double[::1] los,
                const double[::1] his, double dist, long cap, long n0):
    cdef double x = x0
    cdef double xn
    cdef long n = n0
    cdef int code
    with nogil:
        while True:
            if _union_dist(los, his, x) <= dist:
                code = _OK
                break
            if n >= cap:
                code = _TIMEOUT
                break
            code = _step(bp, slope, anchor, nodeval, floor, x, &xn)
            if code != _OK:
                break
            x = xn
            n += 1
    return code, n, x


def stay_max_dist(const double[::1] bp, const double[::1] slope,
                  const double[::1] anchor, const double[::1] nodeval,
                  double floor, double x0, const double[::1] los,
                  const double[::1] his, long nsteps, long n0, double dmax0):
    cdef double x = x0
    cdef double xn, d
    cdef double dmax = dmax0
    cdef long n = n0
    cdef int code = _OK
    with nogil:
        while n < nsteps:
            code = _step(bp, slope, anchor, nodeval, floor, x, &xn)
            if code != _OK:
                break
            x = xn
            n += 1
            d = _union_dist(los, his, x)
            if d > dmax:
                dmax = d
        else:
            code = _OK
    if n == nsteps:
        code = _OK
    return code, n, x, dmax


def coverage(const double[::1] bp, const double[::1] slope,
             const double[::1] anchor, const double[::1] nodeval,
             double floor, double x0, long n, double lo, double hi,
             unsigned char[::1] visited, long n0):
    cdef Py_ssize_t bins = visited.shape[0]
    cdef double width = hi - lo
    cdef double x = x0
    cdef double xn
    cdef long i = n0
    cdef Py_ssize_t b
    cdef int code = _OK
    with nogil:
        if i == 0:
            b = <Py_ssize_t>((x - lo) / width * bins)
            if b >= bins:
                b = bins - 1
            if b < 0:
                b = 0
            visited[b] = 1
        while i < n:
            code = _step(bp, slope, anchor, nodeval, floor, x, &xn)
            if code != _OK:
                break
            x = xn
            i += 1
            b = <Py_ssize_t>((x - lo) / width * bins)
            if b >= bins:
                b = bins - 1
            if b < 0:
                b = 0
            visited[b] = 1
    if i == n:
        code = _OK
    return code, i, x


def first_hit_2d(double sigma, double lam, double x0, long cap):
    cdef double c = (sigma - lam) / (1.0 - lam)
    cdef double sl = sigma - lam
    cdef double x = x0
    cdef double s = 1.0
    cdef double xn, arg, sn
    cdef long n = 0
    cdef int hit = 0
    with nogil:
        while n < cap:
            xn = lam * x + sl * s
            arg = s + xn - x
            if arg <= -1.0:
                sn = -1.0
            elif arg >= 1.0:
                sn = 1.0
            else:
                sn = arg
            x = xn
            s = sn
            n += 1
            if s == -1.0 and x <= -c + 1e-12:
                hit = 1
                break
    if hit:
        return OK, -x, n
    return TIMEOUT, 0.0, n
