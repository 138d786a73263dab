"""Planar saturation system and its scalar first-hit reduction.

The system iterates

    x' = lam*x + (sigma - lam)*s,      s' = clamp(s + x' - x)

on the strip Q = {(x, s): -1 <= s <= 1}, for parameters sigma > 1,
-1 < lam < 0.  Trajectories leaving the right half-line l+ (s = 1,
x > offset) land on the closed left half-line l- (s = -1, x <= -offset)
after finitely many steps, where offset = (sigma-lam)/(1-lam) marks the
endpoints of the equilibrium segment.  Recording -x at the landing
point defines a scalar function f whose shift by the offset is a saw
map in the sense of sawmap.core; this module provides both the direct
simulation and the closed-form breakpoint sequences of that map, plus a
consistency check that the two routes agree.

The closed forms are evaluated in shifted coordinates, where algebraic
simplification removes the subtraction of the offset entirely:

    r_k = 2 / ((1-lam) * S_k)
    q_k = 2 / ((1-lam) * (S_k - sigma^k/(sigma-lam)))
    p_k = -lam * (r_k + 2*(sigma-1)/(1-lam))
    alpha_k = (1-lam) * S_{k+1} - 1
    beta_k  = -lam * ((1-lam) * S_k - 1)

with S_k = 1 + sigma + ... + sigma^(k-1) accumulated by compensated
summation and sigma^k by iterative multiplication, so deep teeth keep
near-full precision instead of cancelling against the offset.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import NamedTuple

from . import kernels
from .core import DEFAULT_TOL, SawMap
from .errors import DivergenceError, DomainError, ParameterError, TruncationError

FIRST_HIT_CAP = 10**6


@dataclass(frozen=True)
class TwoDParams:
    sigma: float
    lam: float

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and math.isfinite(self.lam)):
            raise ParameterError("parameters must be finite")
        if not (self.sigma > 1.0 and -1.0 < self.lam < 0.0):
            raise ParameterError(
                f"(sigma, lambda)=({self.sigma}, {self.lam}) outside sigma>1, -1<lambda<0"
            )

    @property
    def offset(self):
        """x-coordinate scale of the equilibrium segment endpoints."""
        return (self.sigma - self.lam) / (1.0 - self.lam)


class TwoDState(NamedTuple):
    x: float
    s: float


class FirstHit(NamedTuple):
    fx: float
    steps: int


class KssResult(NamedTuple):
    k: int
    equality: bool


def saturation(x):
    """Unit clamp: exact -1/+1 outside the band, identity inside."""
    if x <= -1.0:
        return -1.0
    if x >= 1.0:
        return 1.0
    return x


def step(params: TwoDParams, state: TwoDState) -> TwoDState:
    """One iteration of the planar system; maps the strip into itself."""
    x, s = state
    if not (math.isfinite(x) and math.isfinite(s)):
        raise DomainError(f"state {state!r} is not finite")
    if not -1.0 <= s <= 1.0:
        raise DomainError(f"state {state!r} outside the strip |s| <= 1")
    sl = params.sigma - params.lam
    xn = params.lam * x + sl * s
    sn = saturation(s + xn - x)
    return TwoDState(xn, sn)


def stop_apply(s0, xs):
    """Run the clamp-memory recursion s_{n+1} = clamp(s_n + x_{n+1} - x_n).

    Returns the full state track [s_0, ..., s_N] for the input track
    ``xs``.  Feeding back the x-track generated by :func:`step` returns
    that trajectory's s-track bitwise (same operations, same order).
    """
    if not -1.0 <= s0 <= 1.0:
        raise DomainError(f"initial state s0={s0!r} outside [-1, 1]")
    xs = list(xs)
    out = [s0]
    s = s0
    for i in range(len(xs) - 1):
        s = saturation(s + xs[i + 1] - xs[i])
        out.append(s)
    return out


def first_hit(params: TwoDParams, x, cap=FIRST_HIT_CAP) -> FirstHit:
    """First landing of the trajectory from (x, 1) on the closed left
    half-line; returns (-x_landing, step count).

    The landing test uses exact s == -1 (the clamp assigns the literal
    constant) plus 1e-12 slack on the x-coordinate for the closed
    endpoint.  A trajectory exceeding ``cap`` steps signals parameters
    outside the admissible region or a bug, never a valid orbit.
    """
    if not x > params.offset:
        raise DomainError(f"x={x!r} not on the half-line x > {params.offset!r}")
    status, fx, steps = kernels.first_hit_2d(params.sigma, params.lam, x, cap)
    if status != kernels.OK:
        raise DivergenceError(f"no landing within {cap} steps from x={x!r}")
    return FirstHit(fx, steps)


class ClosedFormSequences:
    """Breakpoint sequences of the reduced saw map, evaluated lazily.

    Realizes the accessor contract of sawmap.core (q, r, p, depth,
    ensure_depth) in shifted coordinates.  The index shift k_shift
    aligns the sequences so the shifted tooth 1 is the first with its
    height at or above its peak abscissa; when the shift is trivial the
    top piece [q_1, r_0] is fixed by the canonical rule
    r_0 = q_1 + 2*p_1/|lam| (so p_0 = 2*p_1 exactly, the graph above
    q_1 having slope |lam|).
    """

    kind = "closed-form"
    extendable = True

    def __init__(self, params: TwoDParams, *, tol=DEFAULT_TOL, initial_depth=8):
        self.params = params
        self.tol = tol
        # S[k] = 1 + sigma + ... + sigma^(k-1), pow[k] = sigma^k; index 0 unused.
        self._S = [0.0, 1.0]
        self._pow = [1.0, params.sigma]
        self._comp = 0.0  # Kahan compensation for the running sum
        kss, equality = self._find_k_shift()
        self.k_shift = kss
        self.k_shift_equality = equality
        self._depth = 0
        self.ensure_depth(max(initial_depth, 2))

    # -- exact shifted closed forms at unshifted index khat ------------------

    def _grow(self, khat):
        while len(self._S) <= khat + 1:
            k = len(self._S) - 1
            # S_{k+1} = S_k + sigma^k, compensated.
            y = self._pow[k] - self._comp
            t = self._S[k] + y
            self._comp = (t - self._S[k]) - y
            self._S.append(t)
            nxt = self._pow[k] * self.params.sigma
            if not math.isfinite(nxt) or not math.isfinite(t):
                raise TruncationError(f"sequence index {k + 1} overflows double range")
            self._pow.append(nxt)

    def r_sh(self, khat):
        self._grow(khat)
        return 2.0 / ((1.0 - self.params.lam) * self._S[khat])

    def q_sh(self, khat):
        self._grow(khat)
        d = self._S[khat] - self._pow[khat] / (self.params.sigma - self.params.lam)
        return 2.0 / ((1.0 - self.params.lam) * d)

    def p_sh(self, khat):
        return -self.params.lam * (
            self.r_sh(khat) + 2.0 * (self.params.sigma - 1.0) / (1.0 - self.params.lam)
        )

    def alpha_formula(self, k):
        """Closed-form rising slope of shifted tooth k (k >= 1)."""
        khat = k + self.k_shift - 1
        self._grow(khat + 1)
        return (1.0 - self.params.lam) * self._S[khat + 1] - 1.0

    def beta_formula(self, k):
        """Closed-form falling slope of shifted tooth k (k >= 1)."""
        khat = k + self.k_shift - 1
        self._grow(khat)
        return -self.params.lam * ((1.0 - self.params.lam) * self._S[khat] - 1.0)

    # -- unshifted (planar) coordinates ---------------------------------------

    def qhat(self, khat):
        return self.q_sh(khat) + self.params.offset

    def rhat(self, khat):
        return self.r_sh(khat) + self.params.offset

    def phat(self, khat):
        return self.p_sh(khat) + self.params.offset

    def _find_k_shift(self, cap=10**5):
        for khat in range(1, cap + 1):
            r = self.r_sh(khat)
            m = self.p_sh(khat) - r
            if abs(m) <= self.tol * max(1.0, r):
                return khat, True
            if m > 0.0:
                return khat, False
        raise TruncationError(f"no tooth with height above peak up to index {cap}")

    # -- sawmap.core accessor contract ----------------------------------------

    @property
    def depth(self):
        return self._depth

    def ensure_depth(self, k):
        if k > self._depth:
            self._grow(k + self.k_shift)
            self._depth = k

    def q(self, k):
        if k < 1:
            raise ValueError("q index must be >= 1")
        self.ensure_depth(k)
        return self.q_sh(k + self.k_shift - 1)

    def r(self, k):
        if k < 0:
            raise ValueError("r index must be >= 0")
        if k == 0:
            if self.k_shift > 1:
                return self.r_sh(self.k_shift - 1)
            return self.q(1) + 2.0 * self.p_sh(self.k_shift) / (-self.params.lam)
        self.ensure_depth(k)
        return self.r_sh(k + self.k_shift - 1)

    def p(self, k):
        if k < 0:
            raise ValueError("p index must be >= 0")
        if k == 0:
            if self.k_shift > 1:
                return self.p_sh(self.k_shift - 1)
            return 2.0 * self.p_sh(self.k_shift)
        self.ensure_depth(k)
        return self.p_sh(k + self.k_shift - 1)

    @property
    def shift(self):
        return self.params.offset


def k_double_star(params: TwoDParams, cap=10**4, tol=DEFAULT_TOL) -> KssResult:
    """First tooth index whose height reaches its peak abscissa.

    Guaranteed finite: the tooth heights approach a positive limit while
    the peak abscissas shrink to the accumulation point.  The equality
    case (within 1e-12 relative) is accepted and flagged.
    """
    seqs = ClosedFormSequences(params, tol=tol, initial_depth=2)
    if seqs.k_shift > cap:
        raise TruncationError(f"index search exceeded cap {cap}")
    return KssResult(seqs.k_shift, seqs.k_shift_equality)


def saw_map(params: TwoDParams, *, tol=DEFAULT_TOL, check=True, validate_depth=None) -> SawMap:
    """The reduced saw map of the planar system at these parameters."""
    return SawMap(
        ClosedFormSequences(params, tol=tol), tol=tol, check=check, validate_depth=validate_depth
    )


def analytic_T(params: TwoDParams, x, *, saw: SawMap | None = None):
    """Closed-form evaluation of the reduced map at x >= 0.

    Pass ``saw`` (from :func:`saw_map`) to reuse the sequence cache in
    loops; otherwise a fresh map is built per call.
    """
    if saw is None:
        saw = saw_map(params)
    return saw.eval(x)


@dataclass
class ConsistencyResult:
    max_rel_dev: float
    rows: list
    x_min: float
    x_max: float

    def __float__(self):
        return self.max_rel_dev


def _sample_floor(saw: SawMap, slope_cap):
    """Deepest query point whose tooth keeps the first-hit comparison
    numerically meaningful: pieces steeper than slope_cap amplify the
    planar state's last-bit uncertainty past the comparison tolerance.
    """
    seqs = saw.seqs
    k = 1
    while seqs.alpha_formula(k + 1) <= slope_cap:
        k += 1
    return seqs.q(k + 1)


def consistency_check(
    params: TwoDParams,
    n_samples,
    *,
    rng=None,
    x_min=None,
    slope_cap=1e5,
    cap=FIRST_HIT_CAP,
    saw: SawMap | None = None,
) -> ConsistencyResult:
    """Compare the closed-form map against the simulated first-hit map.

    Samples log-uniform points of (0, r0], snapped so the planar start
    offset + x is representable, and returns the maximum deviation
    |analytic - simulated| / max(1, |simulated|) together with the
    per-sample rows (x, T_analytic, T_simulated, rel_dev).  The two
    routes compute the same quantity, so deviations sit at rounding
    scale and anything near the 1e-9 contract signals a defect.
    """
    if rng is None:
        rng = random.Random(0)
    if saw is None:
        saw = saw_map(params)
    c = params.offset
    r0 = saw.r0
    if x_min is None:
        x_min = _sample_floor(saw, slope_cap)
    x_min = min(x_min, 0.5 * r0)
    log_lo = math.log(x_min)
    log_hi = math.log(r0)
    rows = []
    max_dev = 0.0
    for _ in range(n_samples):
        x_raw = math.exp(log_lo + rng.random() * (log_hi - log_lo))
        t = c + x_raw
        x = t - c
        if not 0.0 < x <= r0:
            x = min(max(x, x_min), r0)
            t = c + x
        a = saw.eval(x)
        status, fx, _steps = kernels.first_hit_2d(params.sigma, params.lam, t, cap)
        if status != kernels.OK:
            raise DivergenceError(f"first-hit cap exceeded at x={x!r}")
        sim = fx - c
        dev = abs(a - sim) / max(1.0, abs(sim))
        rows.append((x, a, sim, dev))
        if dev > max_dev:
            max_dev = dev
    return ConsistencyResult(max_rel_dev=max_dev, rows=rows, x_min=x_min, x_max=r0)


def write_consistency_csv(result: ConsistencyResult, path):
    with open(path, "w") as fh:
        fh.write("x,T_analytic,T_simulated,rel_dev\n")
        for x, a, s, d in result.rows:
            fh.write(f"{x!r},{a!r},{s!r},{d!r}\n")
