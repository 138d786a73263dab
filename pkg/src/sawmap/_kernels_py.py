"""Pure-Python twin of the compiled kernels.

Selected at import time by :mod:`sawmap.kernels` when the extension is
unavailable (or forced via SAWMAP_PURE_PYTHON=1).  Every function here
performs the same floating-point operations in the same order as the
Cython version, so the two backends produce bit-identical results; the
parity tests assert exactly that.

Piece-table convention (built by :mod:`sawmap.core`): ``bp`` holds the
breakpoints in descending order ``r0, q1, r1, q2, ..., qK, rK``; piece
``t`` spans ``[bp[t+1], bp[t]]`` and evaluates as
``slope[t] * (x - anchor[t])``; ``nodeval[i]`` is the exact map value at
breakpoint ``i`` (the tooth height at r-nodes, 0 at q-nodes).  A point
equal to a breakpoint belongs to the piece whose lower endpoint it is.
"""

BACKEND = "python"

OK = 0
BELOW = 1
ABOVE = 2
TIMEOUT = 3

_TINY = 1e-300


def _locate(bp, x):
    # First index m with bp[m] <= x.  Caller guarantees bp[0] >= x and
    # x at or above the floor, so bp[-1] (= rK) is always <= x.
    if x >= bp[0]:
        return 0
    lo = 0
    hi = len(bp) - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if bp[mid] <= x:
            hi = mid
        else:
            lo = mid
    return hi


def _eval(bp, slope, anchor, nodeval, x):
    m = _locate(bp, x)
    if bp[m] == x:
        return nodeval[m]
    return slope[m - 1] * (x - anchor[m - 1])


def _step(bp, slope, anchor, nodeval, floor, x):
    # One map application with domain handling.  Returns (code, value).
    if x == 0.0:
        return OK, 0.0
    if x < _TINY:
        # Piece resolution is meaningless below subnormal scale.
        return OK, 0.0
    if x < floor:
        return BELOW, x
    if x > bp[0]:
        return ABOVE, x
    return OK, _eval(bp, slope, anchor, nodeval, x)


def locate_index(bp, x):
    """Index of the first breakpoint <= x (ties belong to the piece above)."""
    return _locate(list(bp), x)


def map_eval(bp, slope, anchor, nodeval, x):
    """Evaluate the map at an in-domain point (floor <= x <= r0)."""
    return _eval(list(bp), list(slope), list(anchor), list(nodeval), x)


def orbit_fill(bp, slope, anchor, nodeval, floor, out, i0, n):
    """Fill out[i0+1 .. n] with successive images of out[i0].

    Returns (status, i) where i is the index of the last valid entry.
    status BELOW means out[i] needs a deeper table before continuing.
    """
    bp = list(bp)
    slope = list(slope)
    anchor = list(anchor)
    nodeval = list(nodeval)
    i = i0
    x = out[i]
    while i < n:
        code, xn = _step(bp, slope, anchor, nodeval, floor, x)
        if code != OK:
            return code, i
        i += 1
        out[i] = xn
        x = xn
    return OK, i


def escape_time(bp, slope, anchor, nodeval, floor, x0, threshold, cap, n0):
    """First n >= n0 with the n-th iterate below ``threshold``."""
    bp = list(bp)
    slope = list(slope)
    anchor = list(anchor)
    nodeval = list(nodeval)
    x = x0
    n = n0
    while True:
        if x < threshold:
            return OK, n, x
        if n >= cap:
            return TIMEOUT, n, x
        code, xn = _step(bp, slope, anchor, nodeval, floor, x)
        if code != OK:
            return code, n, x
        x = xn
        n += 1


def converge_time(bp, slope, anchor, nodeval, floor, x0, target, tol, cap, n0):
    """First n >= n0 with |iterate - target| <= tol."""
    bp = list(bp)
    slope = list(slope)
    anchor = list(anchor)
    nodeval = list(nodeval)
    x = x0
    n = n0
    while True:
        d = x - target
        if -tol <= d <= tol:
            return OK, n, x
        if n >= cap:
            return TIMEOUT, n, x
        code, xn = _step(bp, slope, anchor, nodeval, floor, x)
        if code != OK:
            return code, n, x
        x = xn
        n += 1


def _union_dist(los, his, x):
    d = float("inf")
    for i in range(len(los)):
        if x < los[i]:
            g = los[i] - x
        elif x > his[i]:
            g = x - his[i]
        else:
            return 0.0
        if g < d:
            d = g
    return d


def entry_time(bp, slope, anchor, nodeval, floor, x0, los, his, cap, n0):
    """First n >= n0 with the iterate inside any closed [lo_i, hi_i]."""
    bp = list(bp)
    slope = list(slope)
    anchor = list(anchor)
    nodeval = list(nodeval)
    los = list(los)
    his = list(his)
    x = x0
    n = n0
    while True:
        if _union_dist(los, his, x) == 0.0:
            return OK, n, x
        if n >= cap:
            return TIMEOUT, n, x
        code, xn = _step(bp, slope, anchor, nodeval, floor, x)
        if code != OK:
            return code, n, x
        x = xn
        n += 1


def absorb_time(bp, slope, anchor, nodeval, floor, x0, los, his, dist, cap, n0):
    """First n >= n0 with distance to the interval union <= dist."""
    bp = list(bp)
    slope = list(slope)
    anchor = list(anchor)
    nodeval = list(nodeval)
    los = list(los)
    his = list(his)
    x = x0
    n = n0
    while True:
        if _union_dist(los, his, x) <= dist:
            return OK, n, x
        if n >= cap:
            return TIMEOUT, n, x
        code, xn = _step(bp, slope, anchor, nodeval, floor, x)
        if code != OK:
            return code, n, x
        x = xn
        n += 1


def stay_max_dist(bp, slope, anchor, nodeval, floor, x0, los, his, nsteps, n0, dmax0):
    """Max distance to the interval union over the next nsteps iterates."""
    bp = list(bp)
    slope = list(slope)
    anchor = list(anchor)
    nodeval = list(nodeval)
    los = list(los)
    his = list(his)
    x = x0
    n = n0
    dmax = dmax0
    while n < nsteps:
        code, xn = _step(bp, slope, anchor, nodeval, floor, x)
        if code != OK:
            return code, n, x, dmax
        x = xn
        n += 1
        d = _union_dist(los, his, x)
        if d > dmax:
            dmax = d
    return OK, n, x, dmax


def coverage(bp, slope, anchor, nodeval, floor, x0, n, lo, hi, visited, n0):
    """Mark visited bins of the orbit histogram over [lo, hi].

    ``visited`` is a uint8 buffer of bin flags; the caller counts them.
    """
    bp = list(bp)
    slope = list(slope)
    anchor = list(anchor)
    nodeval = list(nodeval)
    bins = len(visited)
    width = hi - lo
    x = x0
    i = n0
    if i == 0:
        b = int((x - lo) / width * bins)
        if b >= bins:
            b = bins - 1
        if b < 0:
            b = 0
        visited[b] = 1
    while i < n:
        code, xn = _step(bp, slope, anchor, nodeval, floor, x)
        if code != OK:
            return code, i, x
        x = xn
        i += 1
        b = int((x - lo) / width * bins)
        if b >= bins:
            b = bins - 1
        if b < 0:
            b = 0
        visited[b] = 1
    return OK, i, x


def first_hit_2d(sigma, lam, x0, cap):
    """Iterate the planar saturation system from (x0, 1) until it lands
    on the closed left half-line (s = -1, x <= -offset + 1e-12).

    Returns (status, -x_hit, steps).
    """
    c = (sigma - lam) / (1.0 - lam)
    sl = sigma - lam
    x = x0
    s = 1.0
    n = 0
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
            return OK, -x, n
    return TIMEOUT, 0.0, n
