"""Per-tooth classification and attractor structure.

Each tooth segment J_k = [e_k, p_k] restricts the map to a two-slope
tent with rising slope alpha and falling slope -beta, and its long-run
behaviour is decided by those two numbers alone:

  type I    beta <= 1: every orbit in J_k \\ {e_k} converges to the
            stable falling-branch fixed point ehat_k;
  type II   beta > 1 and 1/alpha + 1/beta >= 1: J_k is invariant and
            the trapping core G_k carries an attractor made of 2^N
            closed bands cyclically permuted by the map;
  type III  beta > 1 and 1/alpha + 1/beta < 1: J_k is not invariant;
            almost every orbit eventually escapes below e_k, leaving a
            repelling Cantor set behind.

The band count exponent N comes from squaring the tent repeatedly:
slopes renormalize as (xi, nu) -> (nu^2, xi*nu), and N+1 is the first
level whose reciprocal slope sum drops to 1 or below.  The bands'
left-to-right arrangement follows a fixed permutation of their orbit
order, built by the doubling recursion in :func:`sigma_permutation`.

Band endpoints are produced by the renormalization recursion and then
cross-checked against an independent route (the forward orbit of the
tooth height p_k, plus direct image and spatial-order tests); any
disagreement raises InternalConsistencyError rather than returning a
plausible-looking structure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .core import Interval
from .errors import InternalConsistencyError, ParameterError, TypeMismatchError

EPS_BOUNDARY = 1e-12


@dataclass(frozen=True)
class IntervalType:
    tag: str  # "I" | "II" | "III"
    boundary: str = "none"  # "none" | "beta_eq_1" | "sum_eq_1"

    def __str__(self):
        return self.tag if self.boundary == "none" else f"{self.tag}({self.boundary})"


def classify_interval(alpha, beta, eps=EPS_BOUNDARY) -> IntervalType:
    """Type of a tooth with slopes (alpha, -beta); alpha must exceed 1.

    Equality cases (beta = 1, slope sum = 1) are decided by the defining
    inequalities but flagged when within ``eps``, since the dynamics on
    those measure-zero boundaries is of a different kind.
    """
    if not (math.isfinite(alpha) and math.isfinite(beta)):
        raise ValueError(f"non-finite slopes ({alpha!r}, {beta!r})")
    if not alpha > 1.0:
        raise ValueError(f"rising slope must exceed 1, got {alpha!r}")
    if not beta > 0.0:
        raise ValueError(f"falling slope magnitude must be positive, got {beta!r}")
    if abs(beta - 1.0) <= eps:
        return IntervalType("I", "beta_eq_1")
    if beta < 1.0:
        return IntervalType("I")
    s = 1.0 / alpha + 1.0 / beta
    if abs(s - 1.0) <= eps:
        return IntervalType("II", "sum_eq_1")
    if s > 1.0:
        return IntervalType("II")
    return IntervalType("III")


@dataclass
class RenormTrace:
    xi: list
    nu: list
    sums: list
    j: int

    @property
    def N(self):
        return self.j - 1


def renorm_index(alpha, beta, max_iter=200) -> RenormTrace:
    """Square-and-renormalize the tent slopes until expansion wins.

    Levels follow xi_{i+1} = nu_i^2, nu_{i+1} = xi_i * nu_i from
    (xi_0, nu_0) = (alpha, beta); the reciprocal sum 1/xi_i + 1/nu_i
    decreases to zero, and j is the first level where it is <= 1.
    Requires a strict type-II pair (boundary pairs have no finite band
    structure to renormalize).
    """
    t = classify_interval(alpha, beta)
    if t.tag != "II" or t.boundary != "none":
        raise TypeMismatchError(f"renormalization needs a strict type-II pair, got {t}")
    xi = [float(alpha)]
    nu = [float(beta)]
    sums = [1.0 / alpha + 1.0 / beta]
    for i in range(max_iter):
        if sums[-1] <= 1.0:
            return RenormTrace(xi=xi, nu=nu, sums=sums, j=i)
        xi.append(nu[i] * nu[i])
        nu.append(xi[i] * nu[i])
        sums.append(1.0 / xi[-1] + 1.0 / nu[-1])
    raise InternalConsistencyError(
        f"renormalization did not terminate in {max_iter} levels for ({alpha}, {beta})"
    )


def sigma_permutation(N):
    """Left-to-right arrangement of the 2^N attractor bands.

    Entry m is the orbit index of the m-th band from the left.  Built by
    the doubling recursion: the second half of the new permutation is
    2*old - 1, and the first half mirrors the second half plus one.
    """
    if not 0 <= N <= 20:
        raise ValueError(f"N={N} outside the guard range 0..20")
    sig = [1]
    for _ in range(N):
        n = len(sig)
        new = [0] * (2 * n)
        for i in range(1, n + 1):
            new[n + i - 1] = 2 * sig[i - 1] - 1
        for i in range(1, n + 1):
            new[i - 1] = new[2 * n - i] + 1
        sig = new
    return tuple(sig)


class LevelInfo(NamedTuple):
    xi: float
    nu: float
    fix: float  # rising-branch fixed point of this level's map
    peak: float  # abscissa where this level's map attains p
    falling_fix: float  # falling-branch fixed point (next level's fix)


@dataclass
class AttractorStructure:
    N: int
    A: list  # 2^N open bands as Interval, in orbit order (band 1 touches p_k)
    sigma: tuple  # spatial arrangement, sigma_permutation(N)
    skeleton: list  # N unstable periodic orbits, periods 1, 2, ..., 2^(N-1)
    levels: list  # LevelInfo per renormalization level (diagnostics)
    k: int


def _require_type2(saw, k):
    if not 1 <= k <= saw.k_star:
        raise ValueError(f"tooth index {k} outside 1..k_star={saw.k_star}")
    t = classify_interval(saw.alpha(k), saw.beta(k))
    if t.tag != "II" or t.boundary != "none":
        raise TypeMismatchError(f"tooth {k} is type {t}, need strict II")


def _renorm_levels(saw, k):
    trace = renorm_index(saw.alpha(k), saw.beta(k))
    p = saw.p(k)
    fix = saw.e(k)
    levels = []
    for i in range(trace.j):
        xi = trace.xi[i]
        nu = trace.nu[i]
        peak = fix + (p - fix) / xi
        ffix = (p + nu * peak) / (1.0 + nu)
        levels.append(LevelInfo(xi, nu, fix, peak, ffix))
        fix = ffix
    return trace, levels


def attractor_intervals(saw, k, *, tol=1e-9) -> AttractorStructure:
    """Band structure of a strict type-II tooth.

    Construction: at the deepest renormalization level the single band
    is (M(p), p) for the current iterated map M; one level up, each band
    list interleaves with its image under the current map's falling
    branch, keeping the band whose closure contains p first.  The result
    is cross-checked against the forward orbit of p_k (every band
    endpoint must lie on it), against direct images (the map carries
    each band onto the next), and against :func:`sigma_permutation`;
    disagreement is an error, never a silent return.
    """
    _require_type2(saw, k)
    trace, levels = _renorm_levels(saw, k)
    N = trace.N
    if N > 20:
        raise ValueError(f"band count 2^{N} exceeds the guard range")
    p = saw.p(k)

    top = levels[N]
    base_lo = p - top.nu * (p - top.peak)
    bands = [(base_lo, p)]
    for i in range(N - 1, -1, -1):
        lv = levels[i]
        merged = []
        for lo, hi in bands:
            img = (p - lv.nu * (hi - lv.peak), p - lv.nu * (lo - lv.peak))
            merged.append((lo, hi))
            merged.append(img)
        bands = merged
    A = [Interval(lo, hi) for lo, hi in bands]

    _crosscheck_bands(saw, k, A, N, tol)
    skeleton = _skeleton_from_levels(saw, levels, N)
    return AttractorStructure(
        N=N, A=A, sigma=sigma_permutation(N), skeleton=skeleton, levels=levels, k=k
    )


def _crosscheck_bands(saw, k, A, N, tol):
    p = saw.p(k)
    count = 1 << N

    def close(a, b):
        return abs(a - b) <= tol * max(1.0, abs(a), abs(b))

    # Endpoints coincide with the forward orbit {T^m(p): m = 0..2^(N+1)-1}.
    orbit = [p]
    for _ in range(2 * count - 1):
        orbit.append(saw.eval(orbit[-1]))
    endpoints = sorted([v for iv in A for v in iv])
    against = sorted(orbit)
    if len(endpoints) != len(against) or not all(
        close(a, b) for a, b in zip(endpoints, against)
    ):
        raise InternalConsistencyError(
            f"band endpoints do not match the critical orbit of p_{k}"
        )

    # The map carries each band onto the next (image hull comparison;
    # the band holding the tooth peak folds, so its image endpoints
    # come from the fold as well as the band ends).
    rk = saw.r(k)
    for i, iv in enumerate(A):
        nxt = A[(i + 1) % count]
        ta, tb = saw.eval(iv.lo), saw.eval(iv.hi)
        hi_img = max(ta, tb, p if iv.lo < rk < iv.hi else ta)
        lo_img = min(ta, tb)
        if not (close(lo_img, nxt.lo) and close(hi_img, nxt.hi)):
            raise InternalConsistencyError(
                f"image of band {i + 1} misses band {(i + 1) % count + 1} "
                f"({lo_img}, {hi_img}) vs {nxt}"
            )

    # Spatial arrangement matches the doubling permutation.
    spatial = tuple(
        idx + 1 for idx, _ in sorted(enumerate(A), key=lambda item: item[1].lo)
    )
    if spatial != sigma_permutation(N):
        raise InternalConsistencyError(
            f"spatial order {spatial} differs from sigma_permutation({N})"
        )


def _skeleton_from_levels(saw, levels, N, residual_tol=1e-10):
    orbits = []
    for i in range(1, N + 1):
        seed = levels[i - 1].falling_fix
        period = 1 << (i - 1)
        pts = [seed]
        for _ in range(period - 1):
            pts.append(saw.eval(pts[-1]))
        back = saw.eval(pts[-1])
        if abs(back - seed) > residual_tol * max(1.0, abs(seed)):
            raise InternalConsistencyError(
                f"skeleton orbit {i} fails its period-{period} residual"
            )
        orbits.append(sorted(pts))
    return orbits


def skeleton_orbits(saw, k):
    """Unstable periodic orbits interleaving the bands of a type-II
    tooth: orbit i has period 2^(i-1), its points being the
    falling-branch fixed points of the level-(i-1) renormalized map.
    Points are returned in increasing order within each orbit."""
    _require_type2(saw, k)
    _trace, levels = _renorm_levels(saw, k)
    return _skeleton_from_levels(saw, levels, len(levels) - 1)


class DomainD(NamedTuple):
    inside: bool
    witness: int | None
    margin: float
    capped: bool = False


def domain_D_membership(sigma, lam, i_cap=10**4) -> DomainD:
    """Membership in the stable-fixed-point parameter domain.

    Inside iff some i >= 1 satisfies
    (sigma^i - 1)/(sigma - 1) <= -1/lambda < sigma^i.  The reported
    margin is the distance of -1/lambda to the nearest decision
    threshold among the scanned i, so callers can exclude cells too
    close to the boundary for float classification to be meaningful.
    """
    if not (sigma > 1.0 and -1.0 < lam < 0.0):
        raise ParameterError(f"(sigma, lambda)=({sigma}, {lam}) outside the region")
    target = -1.0 / lam
    margin = math.inf
    power = 1.0
    geo = 0.0  # (sigma^i - 1)/(sigma - 1) accumulated as 1 + sigma + ...
    for i in range(1, i_cap + 1):
        geo += power
        power *= sigma
        margin = min(margin, abs(target - geo), abs(target - power))
        if geo <= target:
            if target < power:
                return DomainD(True, i, margin)
        else:
            return DomainD(False, None, margin)
    return DomainD(False, None, margin, capped=True)
