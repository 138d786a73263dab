"""Saw-shaped piecewise-linear interval maps.

A saw map T on J = [0, r0] is assembled from interleaved breakpoints
r0 > q1 > r1 > q2 > ... > 0 and tooth heights p0 > p1 > ... > 0:
T vanishes at 0 and at every q_k, rises linearly to p_k at r_k, and is
linear on every segment between neighbouring breakpoints, so the teeth
accumulate at the origin.  This module validates such maps, evaluates
them, and derives the structural skeleton used everywhere else: the
per-tooth fixed points e_k (rising branch) and ehat_k (falling branch),
the absorbing index k_star, the invariant segment Jstar = [0, p_{k_star}]
with the per-tooth segments J_k = [e_k, p_k] and their trapping cores
G_k = [T(p_k), p_k], and the crossing abscissas f_k, g_k where T returns
to the level e_k.

Tabulated maps carry a finite depth K and are never extrapolated:
queries below q_K raise TruncationError, because inventing teeth near
the accumulation point would fabricate dynamics.  Closed-form sequence
providers (see sawmap.system2d) extend themselves on demand instead.

Maps are immutable after construction apart from idempotent lazy
caches, so instances are safe to share across threads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import kernels
from .errors import (
    DomainError,
    InvalidMapError,
    KStarUndeterminedError,
    MalformedInputError,
    TruncationError,
)

DEFAULT_TOL = 1e-12

#: Below this magnitude a query collapses to the fixed point 0; piece
#: resolution is numerically meaningless at subnormal scale.
FLOAT_FLOOR = 1e-300

#: Hard cap on closed-form table depth when chasing a tiny query point.
MAX_AUTO_DEPTH = 10**6


class Interval(NamedTuple):
    lo: float
    hi: float

    @property
    def width(self):
        return self.hi - self.lo

    def __contains__(self, x):
        return self.lo <= x <= self.hi


class PieceIndex(NamedTuple):
    """Locates the linear segment holding a point: tooth index k plus
    branch ('rising' for [q_{k+1}, r_k], 'falling' for [r_k, q_k])."""

    k: int
    branch: str


class Violation(NamedTuple):
    name: str
    index: int
    detail: str

    def __str__(self):
        return f"{self.name}[k={self.index}]: {self.detail}"


@dataclass
class ValidationReport:
    ok: bool
    violations: list = field(default_factory=list)
    flags: list = field(default_factory=list)
    k_star: int | None = None


class TabulatedSequences:
    """Finite breakpoint/height tables r[0..K], q[1..K], p[0..K]."""

    kind = "tabulated"
    extendable = False

    def __init__(self, q, r, p):
        q = np.asarray(q, dtype=float)
        r = np.asarray(r, dtype=float)
        p = np.asarray(p, dtype=float)
        if q.ndim != 1 or r.ndim != 1 or p.ndim != 1 or q.size == 0:
            raise MalformedInputError("q, r, p must be non-empty 1-d arrays")
        if r.size != q.size + 1 or p.size != r.size:
            raise MalformedInputError(
                f"need len(r) == len(q)+1 == len(p); got {r.size}, {q.size}, {p.size}"
            )
        if q.size < 2:
            raise MalformedInputError("depth must be at least 2 (len(q) >= 2)")
        for name, arr in (("q", q), ("r", r), ("p", p)):
            if not np.all(np.isfinite(arr)):
                raise MalformedInputError(f"non-finite value in {name}")
        self._q = q
        self._r = r
        self._p = p

    @property
    def depth(self):
        return self._q.size

    def ensure_depth(self, k):
        if k > self.depth:
            raise TruncationError(
                f"tabulated map has depth K={self.depth}; index {k} requires deeper data"
            )

    def q(self, k):
        if not 1 <= k <= self.depth:
            raise TruncationError(f"q_{k} outside tabulated range 1..{self.depth}")
        return float(self._q[k - 1])

    def r(self, k):
        if not 0 <= k <= self.depth:
            raise TruncationError(f"r_{k} outside tabulated range 0..{self.depth}")
        return float(self._r[k])

    def p(self, k):
        if not 0 <= k <= self.depth:
            raise TruncationError(f"p_{k} outside tabulated range 0..{self.depth}")
        return float(self._p[k])

    @classmethod
    def from_json(cls, source):
        """Load from a JSON document {"r": [...], "q": [...], "p": [...]}."""
        if isinstance(source, dict):
            doc = source
        elif hasattr(source, "read"):
            doc = json.load(source)
        else:
            with open(source) as fh:
                doc = json.load(fh)
        try:
            return cls(doc["q"], doc["r"], doc["p"])
        except KeyError as exc:
            raise MalformedInputError(f"missing key {exc} in map document") from exc
        except TypeError as exc:
            raise MalformedInputError(f"bad map document: {exc}") from exc


class SawMap:
    """A validated saw map with its derived structure."""

    def __init__(self, seqs, *, tol=DEFAULT_TOL, check=True, validate_depth=None):
        self.seqs = seqs
        self.tol = tol
        self._k_star = None
        self._k_star_flags = None
        self._table = None
        self._table_depth = 0
        self.report = None
        if check:
            report = validate(seqs, depth=validate_depth, tol=tol)
            if not report.ok:
                raise InvalidMapError(report)
            self.report = report
            self._k_star = report.k_star

    # -- raw sequence access -------------------------------------------------

    @property
    def kind(self):
        return self.seqs.kind

    @property
    def depth(self):
        return self.seqs.depth

    @property
    def r0(self):
        return self.seqs.r(0)

    def q(self, k):
        return self.seqs.q(k)

    def r(self, k):
        return self.seqs.r(k)

    def p(self, k):
        return self.seqs.p(k)

    # -- slopes and fixed points ----------------------------------------------

    def alpha(self, k):
        """Rising slope on [q_{k+1}, r_k]; alpha(0) is the slope on [q_1, r0]."""
        if k < 0:
            raise ValueError("alpha index must be >= 0")
        self.seqs.ensure_depth(k + 1)
        return self.seqs.p(k) / (self.seqs.r(k) - self.seqs.q(k + 1))

    def beta(self, k):
        """Falling slope magnitude on [r_k, q_k], k >= 1."""
        if k < 1:
            raise ValueError("beta index must be >= 1")
        self.seqs.ensure_depth(k)
        return self.seqs.p(k) / (self.seqs.q(k) - self.seqs.r(k))

    def e(self, k):
        """Fixed point on the rising branch of tooth k."""
        a = self.alpha(k if k >= 1 else 0)
        if k < 1:
            raise ValueError("e index must be >= 1 (use e0() for the top piece)")
        return a * self.seqs.q(k + 1) / (a - 1.0)

    def e0(self):
        """Fixed point of the [q_1, r0] piece if it lies inside, else None."""
        a = self.alpha(0)
        if a <= 1.0:
            return None
        e = a * self.seqs.q(1) / (a - 1.0)
        return e if e < self.seqs.r(0) else None

    def ehat(self, k):
        """Fixed point on the falling branch of tooth k."""
        if k < 1:
            raise ValueError("ehat index must be >= 1")
        b = self.beta(k)
        return (self.seqs.p(k) + b * self.seqs.r(k)) / (1.0 + b)

    def fixed_points(self, k):
        """Return (e_k, ehat_k), verifying the fixed-point residuals.

        The residual bound is 1e-12 relative, widened by the local
        expansion rate: a fixed point of a slope-s branch cannot be
        represented with residual below ~(s-1)*ulp, so steep teeth get
        the representation-limited bound instead.
        """
        e = self.e(k)
        eh = self.ehat(k)
        a = self.alpha(k)
        b = self.beta(k)
        re = abs(self._rising_val(k, e) - e)
        rh = abs(self._falling_val(k, eh) - eh)
        tol_e = max(self.tol * max(1.0, abs(e)), 4.0 * (a - 1.0) * math.ulp(max(e, 1e-30)))
        tol_h = max(self.tol * max(1.0, abs(eh)), 4.0 * (b + 1.0) * math.ulp(max(eh, 1e-30)))
        if re > tol_e or rh > tol_h:
            raise InvalidMapError(
                ValidationReport(
                    False,
                    [Violation("fixed_point_residual", k, f"residuals {re:.3e}, {rh:.3e}")],
                )
            )
        return e, eh

    def _rising_val(self, k, x):
        return self.alpha(k) * (x - self.seqs.q(k + 1))

    def _falling_val(self, k, x):
        return self.beta(k) * (self.seqs.q(k) - x)

    # -- absorbing index -------------------------------------------------------

    @property
    def k_star(self):
        if self._k_star is None:
            self._k_star = self.compute_k_star()
        return self._k_star

    def compute_k_star(self, max_depth=None):
        """Least index splitting teeth with p_k below the neighbouring
        fixed point e_{k-1} (k <= k_star) from those above (k > k_star)."""
        k, flags = _find_k_star(self, max_depth=max_depth, tol=self.tol)
        self._k_star = k
        self._k_star_flags = flags
        return k

    # -- evaluation --------------------------------------------------------------

    def piece_table(self):
        """Arrays describing the current linear pieces (see kernels)."""
        K = self.seqs.depth
        if self._table is None or self._table_depth != K:
            self._table = _build_table(self.seqs)
            self._table_depth = K
        return self._table

    def ensure_floor(self, x):
        """Extend a closed-form table until x is at or above its floor."""
        if not self.seqs.extendable:
            if x < self.seqs.q(self.seqs.depth):
                raise TruncationError(
                    f"x={x!r} below tabulated floor q_{self.seqs.depth}="
                    f"{self.seqs.q(self.seqs.depth)!r}; a deeper table is required"
                )
            return
        while self.seqs.q(self.seqs.depth) > x:
            if self.seqs.depth >= MAX_AUTO_DEPTH:
                raise TruncationError(
                    f"x={x!r} needs more than {MAX_AUTO_DEPTH} teeth to resolve"
                )
            self.seqs.ensure_depth(min(2 * self.seqs.depth, MAX_AUTO_DEPTH))

    def eval(self, x):
        """Evaluate T(x) for x in [0, r0].

        Exact at breakpoints (0 at the q-nodes, p_k at the r-nodes) and
        affine in between.  Below-floor queries on tabulated maps raise
        TruncationError; closed-form maps grow their table instead.
        """
        if not math.isfinite(x):
            raise DomainError(f"x={x!r} is not finite")
        if x == 0.0:
            return 0.0
        r0 = self.seqs.r(0)
        if x < 0.0 or x > r0:
            raise DomainError(f"x={x!r} outside [0, {r0!r}]")
        if x < FLOAT_FLOOR:
            return 0.0
        self.ensure_floor(x)
        t = self.piece_table()
        return kernels.map_eval(t.bp, t.slope, t.anchor, t.nodeval, x)

    __call__ = eval

    def locate_piece(self, x):
        """PieceIndex of the segment containing x (0 < x <= r0).

        A point equal to a breakpoint belongs to the piece whose lower
        endpoint it is (so x = q_k reports the rising piece k-1); the
        two candidate pieces agree in value there.
        """
        if not math.isfinite(x) or x <= 0.0:
            raise DomainError(f"x={x!r} outside (0, r0]")
        r0 = self.seqs.r(0)
        if x > r0:
            raise DomainError(f"x={x!r} outside (0, {r0!r}]")
        if x < FLOAT_FLOOR:
            raise DomainError(f"x={x!r} below resolvable scale")
        self.ensure_floor(x)
        t = self.piece_table()
        m = kernels.locate_index(t.bp, x)
        piece = 0 if m == 0 else m - 1
        return PieceIndex(k=(piece + 1) // 2, branch="rising" if piece % 2 == 0 else "falling")

    def piece_slope(self, piece: PieceIndex):
        if piece.branch == "rising":
            return self.alpha(piece.k)
        return -self.beta(piece.k)

    # -- derived intervals ---------------------------------------------------------

    def intervals(self):
        """Invariant segment family: Jstar plus J_k and G_k for k <= k_star."""
        ks = self.k_star
        jstar = Interval(0.0, self.seqs.p(ks))
        J = {}
        G = {}
        for k in range(1, ks + 1):
            pk = self.seqs.p(k)
            J[k] = Interval(self.e(k), pk)
            G[k] = Interval(self.eval(pk), pk)
        return IntervalFamily(jstar=jstar, J=J, G=G)

    def crossings(self, k):
        """(f_k, g_k): the first two abscissas right of e_k where T
        returns to the level e_k (falling branch, then next rising one)."""
        if not 1 <= k <= self.k_star:
            raise ValueError(f"crossings defined for 1 <= k <= k_star={self.k_star}")
        e = self.e(k)
        b = self.beta(k)
        f = self.seqs.r(k) + (self.seqs.p(k) - e) / b
        g = self.seqs.q(k) + e / self.alpha(k - 1)
        tol = max(
            self.tol * max(1.0, e),
            8.0 * (self.alpha(k) + b) * math.ulp(max(e, 1e-30)),
        )
        if abs(self._falling_val(k, f) - e) > tol or abs(
            self.alpha(k - 1) * (g - self.seqs.q(k)) - e
        ) > tol:
            raise InvalidMapError(
                ValidationReport(False, [Violation("crossing_residual", k, "T(f)/T(g) != e_k")])
            )
        return f, g

    def _value_or_none(self, x):
        # Evaluate without raising on a tabulated floor; validation helper.
        try:
            return self.eval(x)
        except TruncationError:
            return None


@dataclass
class IntervalFamily:
    jstar: Interval
    J: dict
    G: dict


@dataclass
class PieceTable:
    bp: np.ndarray
    slope: np.ndarray
    anchor: np.ndarray
    nodeval: np.ndarray
    floor: float


def _build_table(seqs):
    K = seqs.depth
    bp = np.empty(2 * K + 1)
    slope = np.empty(2 * K)
    anchor = np.empty(2 * K)
    nodeval = np.empty(2 * K + 1)
    bp[0] = seqs.r(0)
    nodeval[0] = seqs.p(0)
    for k in range(1, K + 1):
        bp[2 * k - 1] = seqs.q(k)
        bp[2 * k] = seqs.r(k)
        nodeval[2 * k - 1] = 0.0
        nodeval[2 * k] = seqs.p(k)
    for t in range(2 * K):
        if t % 2 == 0:
            k = t // 2
            anchor[t] = seqs.q(k + 1)
            slope[t] = seqs.p(k) / (seqs.r(k) - seqs.q(k + 1))
        else:
            k = (t + 1) // 2
            anchor[t] = seqs.q(k)
            slope[t] = -(seqs.p(k) / (seqs.q(k) - seqs.r(k)))
    return PieceTable(bp=bp, slope=slope, anchor=anchor, nodeval=nodeval, floor=float(bp[2 * K - 1]))


def _find_k_star(saw, *, max_depth=None, tol=DEFAULT_TOL, tail_window=12):
    """Run the defining comparison p_k vs e_{k-1} and return (k_star, flags).

    Tabulated maps are scanned to their full depth; the split must be
    clean (below up to k_star, above after).  Closed-form maps are
    scanned until the 'above' margin has persisted for tail_window
    indices with a non-decreasing relative margin, which the geometric
    decay of the sequences guarantees eventually.
    """
    seqs = saw.seqs
    flags = []
    if not seqs.extendable:
        kmax = seqs.depth if max_depth is None else min(max_depth, seqs.depth)
        below = []
        above = []
        for k in range(2, kmax + 1):
            pk = seqs.p(k)
            ek1 = saw.e(k - 1)
            if abs(pk - ek1) <= tol * max(1.0, ek1):
                flags.append(f"kstar_boundary:{k}")
            if pk < ek1:
                below.append(k)
            else:
                above.append(k)
        k_star = max(below) if below else 1
        if below and (below != list(range(2, k_star + 1))):
            raise KStarUndeterminedError(
                f"p_k vs e_(k-1) comparison is not a clean split: below={below}"
            )
        return k_star, flags

    cap = 10**5 if max_depth is None else max_depth
    last_below = 1
    streak = 0
    prev_margin = -math.inf
    k = 2
    while k <= cap:
        pk = seqs.p(k)
        ek1 = saw.e(k - 1)
        if abs(pk - ek1) <= tol * max(1.0, ek1):
            flags.append(f"kstar_boundary:{k}")
        if pk < ek1:
            last_below = k
            streak = 0
            prev_margin = -math.inf
        else:
            rel = (pk - ek1) / pk
            if rel >= prev_margin - 1e-9:
                streak += 1
            else:
                streak = 1
            prev_margin = rel
            if streak >= tail_window:
                return last_below, flags
        k += 1
    raise KStarUndeterminedError(f"no stable absorbing index up to depth {cap}")


def validate(seqs, depth=None, tol=DEFAULT_TOL):
    """Check every structural invariant up to the given depth.

    Malformed data (wrong shapes, non-finite entries) raises
    MalformedInputError; a well-formed table gets a report listing each
    violated invariant with the offending index.  Informational flags
    (boundary coincidences, an interior fixed point on the top piece)
    never make the report fail.
    """
    if depth is None:
        depth = seqs.depth if not seqs.extendable else 12
    if depth < 2:
        raise MalformedInputError("validation depth must be >= 2")
    seqs.ensure_depth(depth)
    K = depth

    report = ValidationReport(ok=True)

    def bad(name, idx, detail):
        report.violations.append(Violation(name, idx, detail))

    # Interleaved ordering chain down to r_K > 0.
    chain = [("r", 0, seqs.r(0))]
    for k in range(1, K + 1):
        chain.append(("q", k, seqs.q(k)))
        chain.append(("r", k, seqs.r(k)))
    for (n1, i1, v1), (n2, i2, v2) in zip(chain, chain[1:]):
        if not v1 > v2:
            bad("ordering", i2, f"{n1}_{i1}={v1!r} must exceed {n2}_{i2}={v2!r}")
    if not chain[-1][2] > 0.0:
        bad("ordering", K, f"r_{K}={chain[-1][2]!r} must be positive")

    for k in range(K):
        if not seqs.p(k) > seqs.p(k + 1):
            bad("p_decreasing", k + 1, f"p_{k}={seqs.p(k)!r} <= p_{k + 1}={seqs.p(k + 1)!r}")
    if not seqs.p(K) > 0.0:
        bad("p_decreasing", K, f"p_{K}={seqs.p(K)!r} must be positive")

    if not seqs.p(0) < seqs.r(0):
        bad("p0_lt_r0", 0, f"p_0={seqs.p(0)!r} must be below r_0={seqs.r(0)!r}")
    for k in range(1, K + 1):
        pk, rk = seqs.p(k), seqs.r(k)
        if abs(pk - rk) <= tol * max(1.0, rk):
            report.flags.append(f"p_eq_r:{k}")
        if not pk > rk:
            bad("p_gt_r", k, f"p_{k}={pk!r} must exceed r_{k}={rk!r}")

    if report.violations:
        # Derived quantities (slopes, fixed points, k_star) are meaningless
        # on a mis-ordered table; report the primitive violations only.
        report.ok = False
        return report

    saw = SawMap(seqs, tol=tol, check=False)

    alphas = {}
    betas = {}
    for k in range(0, K):
        try:
            alphas[k] = saw.alpha(k)
        except ZeroDivisionError:
            bad("alpha_gt_1", k, "degenerate rising piece (zero width)")
    for k in range(1, K + 1):
        try:
            betas[k] = saw.beta(k)
        except ZeroDivisionError:
            bad("beta_increasing", k, "degenerate falling piece (zero width)")
    if report.violations:
        report.ok = False
        return report

    for k in range(1, K):
        if not alphas[k] > 1.0:
            bad("alpha_gt_1", k, f"alpha_{k}={alphas[k]!r} must exceed 1")
    for k in range(1, K - 1):
        if not alphas[k + 1] > alphas[k]:
            bad("alpha_increasing", k + 1, f"alpha_{k + 1}={alphas[k + 1]!r} <= alpha_{k}={alphas[k]!r}")
    for k in range(1, K):
        if not betas[k + 1] > betas[k]:
            bad("beta_increasing", k + 1, f"beta_{k + 1}={betas[k + 1]!r} <= beta_{k}={betas[k]!r}")

    if seqs.extendable:
        # Geometric decay of the breakpoints toward the accumulation point.
        for k in range(1, K):
            if not seqs.r(k + 1) < 0.95 * seqs.r(k):
                bad("geometric_decay", k + 1, f"r_{k + 1}/r_{k} not decaying")
                break

    if report.violations:
        report.ok = False
        return report

    # Fixed points and residuals on each complete tooth.
    for k in range(1, K):
        e = saw.e(k)
        if not seqs.q(k + 1) < e < seqs.r(k):
            bad("fixed_point_location", k, f"e_{k}={e!r} outside (q_{k + 1}, r_{k})")
        elif abs(saw._rising_val(k, e) - e) > tol * max(1.0, e):
            bad("fixed_point_residual", k, f"|T(e_{k}) - e_{k}| above tolerance")
    for k in range(1, K + 1):
        eh = saw.ehat(k)
        if not seqs.r(k) < eh < seqs.q(k):
            bad("fixed_point_location", k, f"ehat_{k}={eh!r} outside (r_{k}, q_{k})")
        elif abs(saw._falling_val(k, eh) - eh) > tol * max(1.0, eh):
            bad("fixed_point_residual", k, f"|T(ehat_{k}) - ehat_{k}| above tolerance")

    e0 = saw.e0()
    if e0 is not None:
        report.flags.append("e0_exists")

    try:
        k_star, ks_flags = _find_k_star(saw, max_depth=None if seqs.extendable else K, tol=tol)
        report.flags.extend(ks_flags)
        report.k_star = k_star
    except KStarUndeterminedError as exc:
        bad("kstar_split", 0, str(exc))
        report.ok = False
        return report

    if not seqs.extendable and k_star > K - 1:
        bad("depth_insufficient", k_star, f"k_star={k_star} needs depth > {K}")
        report.ok = False
        return report

    # Technical slope condition on the teeth left of the absorbing one.
    for k in range(1, k_star):
        lhs = seqs.q(k) + saw.e(k) / alphas[k - 1]
        if not lhs > seqs.p(k):
            bad("condition2", k, f"q_{k} + e_{k}/alpha_{k - 1} = {lhs!r} <= p_{k}={seqs.p(k)!r}")

    # Invariance of Jstar: the piecewise-linear max over [0, p_{k_star}]
    # is attained at an r-node or at the right endpoint.
    p_star = seqs.p(k_star)
    t_right = saw._value_or_none(p_star)
    if t_right is not None and t_right > p_star * (1.0 + 1e-12):
        bad("jstar_invariance", k_star, f"T(p_{k_star})={t_right!r} exceeds p_{k_star}={p_star!r}")

    report.ok = not report.violations
    return report
