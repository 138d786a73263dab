"""Command-line surface.

Subcommands:

  analyze   single-parameter analysis of the reduced saw map
  sweep     parameter-plane classification grid (CSV + PGM/PPM figures)
  orbit     planar trajectory dump with half-line landing annotations
  map       evaluate or analyze a user-supplied tabulated map (JSON)

Exit codes: 0 success, 1 usage error, 2 validation failure,
3 internal-consistency error.  SAWMAP_THREADS is the fallback for
--threads.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import netpbm, sweep as sweep_mod
from .classify import (
    attractor_intervals,
    classify_interval,
    domain_D_membership,
    renorm_index,
)
from .core import SawMap, TabulatedSequences, validate
from .errors import (
    DomainError,
    InternalConsistencyError,
    InvalidMapError,
    MalformedInputError,
    ParameterError,
    SawMapError,
)
from .system2d import (
    TwoDParams,
    consistency_check,
    saw_map,
    step,
    write_consistency_csv,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_INTERNAL = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _threads(args):
    if args.threads is not None:
        return args.threads
    env = os.environ.get("SAWMAP_THREADS")
    return int(env) if env else 1


def _emit(lines, out):
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if out:
        with open(out, "w") as fh:
            fh.write(text)


def cmd_analyze(args):
    params = TwoDParams(args.sigma, args.lam)
    saw = saw_map(params, tol=args.tolerance)
    seqs = saw.seqs
    depth = args.depth
    lines = [
        f"sigma={params.sigma!r} lambda={params.lam!r}",
        f"offset={params.offset!r}",
        f"k_double_star={seqs.k_shift}"
        + (" (equality)" if seqs.k_shift_equality else ""),
        f"k_star={saw.k_star}",
        f"r0={saw.r0!r} p0={saw.p(0)!r}"
        + (" (canonical top piece)" if seqs.k_shift == 1 else ""),
        "k q_k r_k p_k alpha_k beta_k type",
    ]
    for k in range(1, depth + 1):
        t = classify_interval(saw.alpha(k), saw.beta(k))
        lines.append(
            f"{k} {saw.q(k)!r} {saw.r(k)!r} {saw.p(k)!r} "
            f"{saw.alpha(k)!r} {saw.beta(k)!r} {t}"
        )
    fam = saw.intervals()
    lines.append(f"Jstar=[0, {fam.jstar.hi!r}]")
    t1 = classify_interval(saw.alpha(1), saw.beta(1))
    lines.append(f"type_J1={t1}")
    if t1.tag == "II" and t1.boundary == "none":
        att = attractor_intervals(saw, 1)
        lines.append(f"J1_attractor_bands={att.N and 2**att.N or 1}")
        lines.append(f"J1_band_exponent N={att.N}")
        for i, iv in enumerate(att.A, 1):
            lines.append(f"A_{i}=({iv.lo!r}, {iv.hi!r})")
    dd = domain_D_membership(params.sigma, params.lam)
    lines.append(
        f"in_domain_D={int(dd.inside)}"
        + (f" witness_i={dd.witness}" if dd.inside else "")
    )
    res = consistency_check(params, args.consistency_samples, saw=saw)
    lines.append(f"consistency_max_rel_dev={res.max_rel_dev!r}")
    if args.consistency_out:
        write_consistency_csv(res, args.consistency_out)
        lines.append(f"consistency_report={args.consistency_out}")
    _emit(lines, args.out)
    return EXIT_OK


def cmd_sweep(args):
    sspec = sweep_mod.parse_range(args.sigma_range)
    lspec = sweep_mod.parse_range(args.lambda_range)
    if sspec.n > 4000 or lspec.n > 4000:
        raise ParameterError("resolution capped at 4000 per axis")
    if sspec.lo < 1.0 or lspec.lo < -1.0 or lspec.hi > 0.0:
        raise ParameterError("ranges must lie within sigma >= 1, -1 <= lambda <= 0")
    result = sweep_mod.run_sweep(sspec, lspec, threads=_threads(args))
    shape = (lspec.n, sspec.n)
    csv_path = f"{args.out}.csv"
    sweep_mod.write_csv(result, csv_path)
    written = [csv_path]
    cells = list(result.cells())
    if args.kind == "kstar":
        img = sweep_mod.render_kstar(cells, shape)
        path = f"{args.out}.pgm"
        netpbm.write_pgm(path, img)
        written.append(path)
    else:
        for panel in ("a", "b"):
            img = sweep_mod.render_j1type(cells, shape, panel)
            path = f"{args.out}_{panel}.ppm"
            netpbm.write_ppm(path, img)
            written.append(path)
    for path in written:
        print(path)
    return EXIT_OK


def cmd_orbit(args):
    params = TwoDParams(args.sigma, args.lam)
    from .system2d import TwoDState

    state = TwoDState(args.x0, args.s0)
    if not -1.0 <= state.s <= 1.0:
        raise DomainError(f"s0={state.s!r} outside the strip |s| <= 1")
    c = params.offset
    rows = []
    for n in range(args.steps + 1):
        hit = ""
        if state.s == -1.0 and state.x <= -c + 1e-12:
            hit = "l-"
        elif state.s == 1.0 and state.x >= c - 1e-12:
            hit = "l+"
        rows.append(f"{n},{state.x!r},{state.s!r},{hit}")
        if n < args.steps:
            state = step(params, state)
    with open(args.out, "w") as fh:
        fh.write("n,x,s,hit\n")
        fh.write("\n".join(rows) + "\n")
    print(args.out)
    return EXIT_OK


def cmd_map(args):
    seqs = TabulatedSequences.from_json(args.config)
    report = validate(seqs, tol=args.tolerance)
    if not report.ok:
        print("validation: FAILED")
        for v in report.violations:
            print(f"  {v}")
        return EXIT_VALIDATION
    saw = SawMap(seqs, tol=args.tolerance)
    if args.x is not None:
        print(repr(saw.eval(args.x)))
        return EXIT_OK
    lines = ["validation: ok", f"k_star={saw.k_star}"]
    if report.flags:
        lines.append("flags=" + "|".join(report.flags))
    fam = saw.intervals()
    lines.append(f"Jstar=[0, {fam.jstar.hi!r}]")
    ks = saw.k_star
    ssum = 1.0 / saw.alpha(ks) + 1.0 / saw.beta(ks)
    lines.append(f"jstar_slope_sum={ssum!r}")
    if ssum < 1.0:
        lines.append("jstar_regime=expanding (whole-segment chaotic)")
    else:
        lines.append("jstar_regime=absorbing (invariant Cantor set + absorbing tooth)")
    for k in range(1, ks + 1):
        t = classify_interval(saw.alpha(k), saw.beta(k))
        lines.append(
            f"J_{k}=[{fam.J[k].lo!r}, {fam.J[k].hi!r}] type={t} "
            f"G_{k}=[{fam.G[k].lo!r}, {fam.G[k].hi!r}]"
        )
        if t.tag == "II" and t.boundary == "none":
            lines.append(f"  N_J{k}={renorm_index(saw.alpha(k), saw.beta(k)).N}")
    _emit(lines, args.out)
    return EXIT_OK


def build_parser():
    p = _Parser(prog="sawmap", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    def add_common(sp):
        sp.add_argument("--tolerance", type=float, default=1e-12)
        sp.add_argument("--threads", type=int, default=None)
        sp.add_argument("--out", default=None)

    a = sub.add_parser("analyze", help="single-parameter analysis")
    a.add_argument("--sigma", type=float, required=True)
    a.add_argument("--lambda", dest="lam", type=float, required=True)
    a.add_argument("--depth", type=int, default=6)
    a.add_argument("--consistency-samples", type=int, default=100)
    a.add_argument("--consistency-out", default=None)
    add_common(a)
    a.set_defaults(fn=cmd_analyze)

    s = sub.add_parser("sweep", help="parameter-plane sweep")
    s.add_argument("--kind", choices=("kstar", "j1type"), required=True)
    s.add_argument("--sigma-range", required=True, help="lo:hi:n")
    s.add_argument("--lambda-range", required=True, help="lo:hi:n")
    s.add_argument("--tolerance", type=float, default=1e-12)
    s.add_argument("--threads", type=int, default=None)
    s.add_argument("--out", required=True, help="output path prefix")
    s.set_defaults(fn=cmd_sweep)

    o = sub.add_parser("orbit", help="planar orbit dump")
    o.add_argument("--sigma", type=float, required=True)
    o.add_argument("--lambda", dest="lam", type=float, required=True)
    o.add_argument("--x0", type=float, required=True)
    o.add_argument("--s0", type=float, required=True)
    o.add_argument("--steps", type=int, required=True)
    o.add_argument("--tolerance", type=float, default=1e-12)
    o.add_argument("--threads", type=int, default=None)
    o.add_argument("--out", required=True)
    o.set_defaults(fn=cmd_orbit)

    m = sub.add_parser("map", help="tabulated map from JSON config")
    m.add_argument("--config", required=True)
    m.add_argument("--x", type=float, default=None)
    add_common(m)
    m.set_defaults(fn=cmd_map)

    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ParameterError, DomainError) as exc:
        print(f"sawmap: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (MalformedInputError, InvalidMapError) as exc:
        print(f"sawmap: validation failure: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except InternalConsistencyError as exc:
        print(f"sawmap: internal consistency error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except SawMapError as exc:
        print(f"sawmap: error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    raise SystemExit(main())
