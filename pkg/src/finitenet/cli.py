"""Command-line entry point: ``finitenet {coverage,sweep,simulate,critical,partition-check}``.

Exit codes: 0 success, 1 I/O failure, 2 usage error, 3 numerical-accuracy
warning escalated by ``--strict``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from dataclasses import dataclass

import numpy as np

from . import geometry, metrics, partition, simulator
from .design import UnsatisfiableQuery, critical_nodes, critical_range
from .metrics import ConnectivityCurve, NetworkModel
from .quadrature import QuadratureWarning

COLUMNS = ("metric", "N", "k", "r0", "value", "stderr", "source")
METRICS = ("p_iso", "min_degree", "kcon", "mean_degree", "poisson_iso", "hd_approx")

EXIT_IO = 1
EXIT_USAGE = 2
EXIT_ACCURACY = 3


class UsageError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("list must not be empty")
    return values


def _metric_list(text: str) -> list[str]:
    values = [v.strip() for v in text.replace("+", ",").split(",") if v.strip()]
    bad = [v for v in values if v not in METRICS]
    if bad or not values:
        raise argparse.ArgumentTypeError(f"metrics must be drawn from {', '.join(METRICS)}")
    return values


def _unit(text: str) -> float:
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"coordinate {v} outside [0, 1]")
    return v


def _nonneg(text: str) -> float:
    v = float(text)
    if not v >= 0.0:
        raise argparse.ArgumentTypeError(f"expected a non-negative number, got {text}")
    return v


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.9g}"
    return str(v)


@dataclass(frozen=True)
class SweepRequest:
    metrics: tuple[str, ...]
    n_values: tuple[int, ...]
    k_values: tuple[int, ...]
    r_start: float
    r_stop: float
    r_step: float
    runs: int
    seed: int
    fmt: str = "csv"
    out: str | None = None

    def __post_init__(self):
        if not self.r_step > 0:
            raise UsageError("--r-step must be positive")
        if not (0.0 <= self.r_start <= self.r_stop <= math.sqrt(2.0) + 1e-12):
            raise UsageError("r0 grid must satisfy 0 <= start <= stop <= sqrt(2)")
        if not self.n_values:
            raise UsageError("at least one N is required")
        if any(n < 1 for n in self.n_values):
            raise UsageError("N must be positive")
        if self.runs < 0:
            raise UsageError("--runs must be non-negative")

    def grid(self) -> list[float]:
        count = int(math.floor((self.r_stop - self.r_start) / self.r_step + 1e-9)) + 1
        return [round(self.r_start + i * self.r_step, 12) for i in range(count)]


def run_sweep(req: SweepRequest) -> list[ConnectivityCurve]:
    """Analytic (and, when ``runs > 0``, simulated) curves for a sweep."""
    grid = req.grid()
    curves: list[ConnectivityCurve] = []
    want = set(req.metrics)
    for n in req.n_values:
        ks = [k for k in req.k_values if 1 <= k <= n - 1]
        if "p_iso" in want:
            curves.append(ConnectivityCurve("p_iso", n, "analytic", None, [
                (r, metrics.p_isolation(NetworkModel(n, r))) for r in grid]))
            want_poisson = True
        else:
            want_poisson = "poisson_iso" in want
        if want_poisson:
            curves.append(ConnectivityCurve("poisson_iso", n, "analytic", None, [
                (r, metrics.poisson_isolation(n, r)) for r in grid]))
        if "min_degree" in want:
            for k in ks:
                curves.append(ConnectivityCurve("min_degree", n, "analytic", k, [
                    (r, metrics.min_degree_dist(NetworkModel(n, r), k)) for r in grid]))
        if "mean_degree" in want:
            curves.append(ConnectivityCurve("mean_degree", n, "analytic", None, [
                (r, metrics.mean_degree(NetworkModel(n, r))) for r in grid]))
        if "hd_approx" in want:
            curves.append(ConnectivityCurve("hd_approx", n, "analytic", None, [
                (r, metrics.hd_approx_connectivity(NetworkModel(n, r))[0]) for r in grid]))

        sim_iso = "p_iso" in want
        sim_md = ks if "min_degree" in want else []
        sim_kc = ks if "kcon" in want else []
        if req.runs > 0 and (sim_iso or sim_md or sim_kc) and n >= 1:
            results = simulator.simulate_sweep(n, grid, req.runs, req.seed,
                                               min_degree_ks=sim_md, kcon_ks=sim_kc,
                                               isolation=sim_iso)
            if sim_iso:
                curves.append(ConnectivityCurve(
                    "p_iso", n, "simulated", None,
                    [(r.r0, r.p_iso_hat) for r in results],
                    [r.p_iso_stderr for r in results]))
            for k in sim_md:
                curves.append(ConnectivityCurve(
                    "min_degree", n, "simulated", k,
                    [(r.r0, r.min_degree_freq[k]) for r in results],
                    [r.min_degree_stderr[k] for r in results]))
            for k in sim_kc:
                curves.append(ConnectivityCurve(
                    "kcon", n, "simulated", k,
                    [(r.r0, r.p_kcon_hat[k]) for r in results],
                    [r.p_kcon_stderr[k] for r in results]))
    return curves


def curve_rows(curves: list[ConnectivityCurve]) -> list[dict]:
    """Flatten curves into rows sorted by (metric, N, k, r0, source)."""
    rows = []
    for c in curves:
        errs = c.ci_halfwidth or [None] * len(c.samples)
        for (r, v), e in zip(c.samples, errs):
            rows.append({"metric": c.metric, "N": c.n_nodes, "k": c.k, "r0": float(r),
                         "value": float(v), "stderr": None if e is None else float(e),
                         "source": c.source})
    rows.sort(key=lambda d: (d["metric"], d["N"], -1 if d["k"] is None else d["k"],
                             d["r0"], d["source"]))
    return rows


def render(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        clean = [{key: (float(f"{v:.9g}") if isinstance(v, float) else v)
                  for key, v in row.items()} for row in rows]
        return json.dumps(clean, indent=1) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in COLUMNS])
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# --- subcommands ------------------------------------------------------------

def cmd_coverage(args) -> int:
    u = (args.x, args.y)
    F = geometry.coverage_cdf(u, args.r)
    eff = geometry.classify(u, args.r)
    if args.format == "json":
        print(json.dumps({"x": args.x, "y": args.y, "r0": args.r, "F": float(f"{F:.9g}"),
                          "sides": sorted(eff.active_sides),
                          "vertices": sorted(eff.active_vertices),
                          "B": [float(f"{b:.9g}") for b in eff.segments],
                          "C": [float(f"{c:.9g}") for c in eff.corners]}))
    else:
        print(f"F = {F:.7f}")
        sides = ", ".join(str(s) for s in sorted(eff.active_sides)) or "none"
        verts = ", ".join(str(v) for v in sorted(eff.active_vertices)) or "none"
        print(f"sides: {sides}")
        print(f"vertices: {verts}")
        for s in sorted(eff.active_sides):
            print(f"  B{s} = {eff.segments[s - 1]:.9g}")
        for v in sorted(eff.active_vertices):
            print(f"  C{v} = {eff.corners[v - 1]:.9g}")
    return 0


def cmd_sweep(args) -> int:
    req = SweepRequest(tuple(args.metric), tuple(args.n), tuple(args.k), args.r_start,
                       args.r_stop, args.r_step, args.runs, args.seed, args.format, args.out)
    curves = run_sweep(req)
    _emit(render(curve_rows(curves), req.fmt), req.out)
    return 0


def cmd_simulate(args) -> int:
    ks = [k for k in args.k if 1 <= k <= args.n - 1]
    res = simulator.simulate_sweep(args.n, [args.r], args.runs, args.seed, args.side,
                                   min_degree_ks=ks, kcon_ks=ks if args.kcon else ())[0]
    rows = [{"metric": "p_iso", "N": args.n, "k": None, "r0": args.r, "value": res.p_iso_hat,
             "stderr": res.p_iso_stderr, "source": "simulated"}]
    for k in ks:
        rows.append({"metric": "min_degree", "N": args.n, "k": k, "r0": args.r,
                     "value": res.min_degree_freq[k], "stderr": res.min_degree_stderr[k],
                     "source": "simulated"})
        if args.kcon:
            rows.append({"metric": "kcon", "N": args.n, "k": k, "r0": args.r,
                         "value": res.p_kcon_hat[k], "stderr": res.p_kcon_stderr[k],
                         "source": "simulated"})
    rows.sort(key=lambda d: (d["metric"], d["N"], -1 if d["k"] is None else d["k"]))
    _emit(render(rows, args.format), args.out)
    return 0


def cmd_critical(args) -> int:
    if (args.n is None) == (args.r is None):
        raise UsageError("give exactly one of --n and --r")
    if args.n is not None:
        if args.n <= args.k:
            raise UsageError(f"need N >= k + 1 (got N={args.n}, k={args.k})")
        n = args.n
        r = critical_range(n, args.k, args.target, args.tolerance)
        print(f"r0_critical = {r:.9g}")
    else:
        r = args.r
        n = critical_nodes(r, args.k, args.target)
        print(f"N_critical = {n}")
    achieved = metrics.min_degree_dist(NetworkModel(n, r), args.k)
    print(f"f_D(k={args.k}) at N={n}, r0={r:.9g}: {achieved:.9g} (target {args.target})")
    if args.verify_runs:
        res = simulator.estimate_kcon(
            simulator.SimulationConfig(n, r, args.verify_runs, args.seed), [args.k])
        print(f"simulated P_{args.k}-con: {res.p_kcon_hat[args.k]:.9g} "
              f"+/- {res.p_kcon_stderr[args.k]:.3g} (S={args.verify_runs})")
    return 0


def cmd_partition_check(args) -> int:
    rc = partition.range_case(args.r)
    specs = partition.subregions(args.r)
    total = 0.0
    print(f"r0 = {args.r:.9g}  case {rc.case_id}  [{rc.lo:.6g}, {rc.hi:.6g}]")
    for s in specs:
        area = partition.subregion_area(s)
        total += s.multiplicity * area
        print(f"  R{s.type_id}  n={s.multiplicity}  area={area:.12g}  F = {s.label()}")
    print(f"sum n_i * area = {total:.15g}")
    return 0 if abs(total - 1.0) <= 1e-9 else EXIT_ACCURACY


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="finitenet", description=__doc__.splitlines()[0])
    p.add_argument("--strict", action="store_true",
                   help="exit with status 3 if any integral misses its tolerance")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("coverage", help="clipped-disk area F(u; r0) at one point")
    c.add_argument("--x", type=_unit, required=True)
    c.add_argument("--y", type=_unit, required=True)
    c.add_argument("--r", type=_nonneg, required=True)
    c.add_argument("--format", choices=("text", "json"), default="text")
    c.set_defaults(func=cmd_coverage)

    s = sub.add_parser("sweep", help="metric curves over an r0 grid")
    s.add_argument("--metric", type=_metric_list, default=["p_iso"],
                   help=f"comma- or plus-separated subset of {', '.join(METRICS)}")
    s.add_argument("--n", type=_int_list, required=True, help="comma-separated node counts")
    s.add_argument("--k", type=_int_list, default=[1])
    s.add_argument("--r-start", type=_nonneg, default=0.0)
    s.add_argument("--r-stop", type=_nonneg, default=0.6)
    s.add_argument("--r-step", type=float, default=0.01)
    s.add_argument("--runs", type=int, default=0, help="Monte-Carlo runs (0: analytic only)")
    s.add_argument("--seed", type=_seed, default=0)
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.add_argument("--out")
    s.set_defaults(func=cmd_sweep)

    m = sub.add_parser("simulate", help="Monte-Carlo estimates at one (N, r0)")
    m.add_argument("--n", type=int, required=True)
    m.add_argument("--r", type=_nonneg, required=True)
    m.add_argument("--k", type=_int_list, default=[1])
    m.add_argument("--kcon", action="store_true", help="also measure k-connectivity")
    m.add_argument("--runs", type=int, default=simulator.DEFAULT_RUNS)
    m.add_argument("--seed", type=_seed, default=0)
    m.add_argument("--side", type=float, default=1.0)
    m.add_argument("--format", choices=("csv", "json"), default="csv")
    m.add_argument("--out")
    m.set_defaults(func=cmd_simulate)

    k = sub.add_parser("critical", help="critical range (fix --n) or node count (fix --r)")
    k.add_argument("--n", type=int)
    k.add_argument("--r", type=_nonneg)
    k.add_argument("--k", type=int, default=1)
    k.add_argument("--target", type=float, required=True)
    k.add_argument("--tolerance", type=float, default=1e-5)
    k.add_argument("--verify-runs", type=int, default=0,
                   help="also simulate P_k-con at the solution with this many runs")
    k.add_argument("--seed", type=_seed, default=0)
    k.set_defaults(func=cmd_critical)

    q = sub.add_parser("partition-check", help="list subregions and check they tile the square")
    q.add_argument("--r", type=_nonneg, required=True)
    q.set_defaults(func=cmd_partition_check)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", QuadratureWarning)
        try:
            status = args.func(args)
        except (UsageError, UnsatisfiableQuery, ValueError) as exc:
            print(f"finitenet {args.command}: error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        except OSError as exc:
            print(f"finitenet {args.command}: I/O error: {exc}", file=sys.stderr)
            return EXIT_IO
    accuracy = [w for w in caught if issubclass(w.category, QuadratureWarning)]
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    if accuracy and args.strict:
        return EXIT_ACCURACY
    return status


if __name__ == "__main__":
    sys.exit(main())
