"""ising-anneal command line.

Single-point commands (sa, sw, decay, open-decay, capture, qa, winding)
write JSON-lines records directly; `run` executes a TOML grid config
through the resumable runner; `reproduce` runs a registered figure
recipe (CSV tables + rendered PNGs + pass/fail summary); `analyze`
post-processes record files.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import experiments
from .lattice import Boundary, StripeKind, load_snapshot
from .records import read_records, write_csv, write_records
from .rng import RngStream
from .runner import ExperimentConfig, run as run_grid


def _add_common(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=None, help="JSON-lines output (default stdout)")


def _emit(records, out):
    if out is None:
        from .records import dumps_record

        for rec in records:
            sys.stdout.write(dumps_record(rec) + "\n")
    else:
        write_records(records, out)
        print(f"wrote {len(records)} records to {out}", file=sys.stderr)


def _sweeps(args) -> int:
    if args.t_sa is not None:
        return args.t_sa
    if args.v is not None:
        return max(1, int(round(1.0 / args.v)))
    raise SystemExit("need --t-sa or --v")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ising-anneal", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sa", help="simulated annealing to T = 0 (64-replica blocks)")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--boundary", choices=["periodic", "open"], default="periodic")
    p.add_argument("--T-init", type=float, default=4.0)
    p.add_argument("--t-sa", type=int, default=None, help="total MC sweeps")
    p.add_argument("--v", type=float, default=None, help="velocity 1/t_sa")
    p.add_argument("--reps", type=int, default=1, help="64-replica blocks")
    p.add_argument("--probe-every", action="store_true", help="probe at every 1/64 of the ramp")
    _add_common(p)

    p = sub.add_parser("sw", help="Swendsen-Wang equilibrium sampling")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--boundary", choices=["periodic", "open"], default="periodic")
    p.add_argument("--reps", type=int, default=1000, help="samples (one per sweep)")
    p.add_argument("--therm", type=int, default=64)
    _add_common(p)

    p = sub.add_parser("decay", help="fixed-T decay of an imposed winding stripe")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--kind", choices=["horizontal10", "diagonal11"], default="horizontal10")
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--fraction", type=str, default="1/4")
    p.add_argument("--cap", type=int, default=None, help="sweep cap (default 1000 L^3)")
    _add_common(p)

    p = sub.add_parser("open-decay", help="zero-T diagonal-wall decay, open boundaries")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--cap", type=int, default=None)
    _add_common(p)

    p = sub.add_parser("capture", help="snapshot stripes right after their winding vanishes")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--T-init", type=float, default=4.0)
    p.add_argument("--T-star", type=float, default=1.5)
    p.add_argument("--t-sa", type=int, default=None)
    p.add_argument("--v", type=float, default=None)
    p.add_argument("--reps", type=int, default=1, help="64-replica blocks")
    p.add_argument("--snap-dir", type=Path, default=Path("snapshots"))
    _add_common(p)

    p = sub.add_parser("winding", help="winding number of snapshot files")
    p.add_argument("files", nargs="+", type=Path)
    p.add_argument("--out", type=Path, default=None)

    p = sub.add_parser("qa", help="exact quantum annealing (symmetric sector)")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--t-max", type=float, default=None)
    p.add_argument("--v", type=float, default=None)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--probes", type=str, default="default",
                   help='comma-separated s values, or "default" (k/64 plus s_c and 1)')
    p.add_argument("--observables", type=str, default="m2,e,ez,F,a0,deltas",
                   help="recorded fields (informational; all are computed)")
    p.add_argument("--sample-n", type=int, default=0, help="configurations sampled at s = 1")
    p.add_argument("--basis-cache", type=Path, default=None)
    _add_common(p)

    p = sub.add_parser("run", help="execute a TOML grid config (resumable)")
    p.add_argument("--config", type=Path, required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--force", action="store_true")
    p.add_argument("--out-dir", type=Path, default=Path("runs"))

    p = sub.add_parser("reproduce", help="run a registered figure recipe")
    p.add_argument("figure", help="figure id (e.g. fig3) or 'list'")
    p.add_argument("--out-dir", type=Path, default=Path("figures"))
    p.add_argument("--stats", type=float, default=1.0, help="statistics multiplier")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--no-plot", action="store_true")

    p = sub.add_parser("analyze", help="post-process JSON-lines records")
    ana = p.add_subparsers(dest="analysis", required=True)

    pc = ana.add_parser("collapse", help="data-collapse quality and exponent scan")
    pc.add_argument("records", type=Path)
    pc.add_argument("--value", default="m2", help="record field (m2, ez_excess, md2, mk2, p10, p11, p_wound)")
    pc.add_argument("--alpha-scan", type=str, default="1.5:3.6:0.05", metavar="LO:HI:STEP")
    pc.add_argument("--b", type=float, default=0.0)
    pc.add_argument("--window", type=str, default=None, metavar="LO:HI")
    pc.add_argument("--out", type=Path, default=Path("collapse"))

    pf = ana.add_parser("fit", help="power-law or log-corrected decay-time fit")
    pf.add_argument("model", choices=["power", "logcorr"])
    pf.add_argument("records", type=Path)
    pf.add_argument("--Lmin", type=float, default=0)
    pf.add_argument("--typical", action="store_true", help="fit exp<ln tau> instead of <tau>")
    pf.add_argument("--out", type=Path, default=None)

    pr = ana.add_parser("running", help="running exponents from (L, 2L) pairs")
    pr.add_argument("records", type=Path)
    pr.add_argument("--out", type=Path, default=None)

    ps = ana.add_parser("scatter", help="(m2, mk2) pairs plus reference curves")
    ps.add_argument("records", type=Path)
    ps.add_argument("--out", type=Path, default=Path("scatter"))
    return ap


def _cmd_single(args) -> None:
    rng = RngStream(args.seed)
    cmd = args.command
    if cmd == "sa":
        recs = experiments.sa_point(
            args.L, _sweeps(args), args.T_init, args.reps, rng,
            boundary=Boundary(args.boundary),
            probe="every64" if args.probe_every else "end",
            winding=args.boundary == "periodic",
        )
    elif cmd == "sw":
        recs = experiments.sw_point(args.L, args.T, args.reps, rng,
                                    therm=args.therm, boundary=Boundary(args.boundary))
    elif cmd == "decay":
        recs = experiments.decay_point(StripeKind(args.kind), args.L, args.T, args.reps, rng,
                                       fraction=Fraction(args.fraction), cap=args.cap)
    elif cmd == "open-decay":
        recs = experiments.open_decay_point(args.L, args.reps, rng, cap=args.cap)
    elif cmd == "capture":
        recs = experiments.capture_point(args.L, _sweeps(args), args.T_init, args.T_star,
                                         args.reps, rng, out_dir=args.snap_dir)
    elif cmd == "qa":
        t_max = args.t_max if args.t_max is not None else (1.0 / args.v if args.v else None)
        if t_max is None:
            raise SystemExit("need --t-max or --v")
        probes = None if args.probes == "default" else [float(x) for x in args.probes.split(",")]
        recs = experiments.qa_point(args.L, t_max, rng, probes=probes, tol=args.tol,
                                    cache_dir=args.basis_cache, sample_n=args.sample_n)
    else:
        raise AssertionError(cmd)
    _emit(recs, args.out)


def _cmd_winding(args) -> None:
    from .topology import winding_summary

    records = []
    for path in args.files:
        lat = load_snapshot(path)
        s = winding_summary(lat)
        records.append({
            "file": str(path), "L": lat.L,
            "wx": s["wx"], "wy": s["wy"], "loops": s["loops"], "w2_mean": s["w2"],
        })
    _emit(records, args.out)


def _records_to_series(records, value):
    from .recipes import aggregate_sa, sector_probability
    from .constants import EZ_GROUND_PERIODIC
    from .scaling import ScalingSeries

    if value in ("p10", "p11", "p_wound"):
        if value == "p_wound":
            import math

            from .recipes import _group_records

            pts = []
            for (L, v), recs in sorted(_group_records(records, ("L", "v")).items()):
                n = len(recs)
                k = sum(1 for r in recs if r["wx"] > 0 or r["wy"] > 0)
                p = k / n
                pts.append((L, v, p, math.sqrt(max(p * (1 - p), 1.0 / n) / n)))
            return ScalingSeries.from_points(pts)
        return sector_probability(records, {"p10": "1,0", "p11": "1,1"}[value])
    if value == "ez_excess":
        series = aggregate_sa(records, "ez")
        return ScalingSeries(series.L, series.x, series.y - EZ_GROUND_PERIODIC, series.yerr)
    return aggregate_sa(records, value)


def _cmd_analyze(args) -> None:
    records = read_records(args.records)
    if args.analysis == "collapse":
        from .scaling import alpha_scan, collapse

        lo, hi, step = (float(x) for x in args.alpha_scan.split(":"))
        window = tuple(float(x) for x in args.window.split(":")) if args.window else None
        series = _records_to_series(records, args.value)
        scan = alpha_scan(series, np.arange(lo, hi + step / 2, step), b=args.b, window=window,
                          window_follows_alpha=(lo + hi) / 2 if window else None)
        best = collapse(series, scan["alpha"], b=args.b,
                        window=None if window is None else window)
        out_csv = args.out.with_suffix(".csv")
        write_csv(
            list(zip(scan["alphas"], scan["quality"])), out_csv, ["alpha", "quality"])
        summary = {"alpha": scan["alpha"], "alpha_err": scan["alpha_err"], "Q": best.quality}
        args.out.with_suffix(".json").write_text(json.dumps(summary, indent=1))
        print(json.dumps(summary))
    elif args.analysis == "fit":
        from .scaling import log_corrected_fit, power_fit
        import math

        by_L = {}
        for rec in records:
            by_L.setdefault(rec["L"], []).append(rec["tau"])
        Ls = sorted(by_L)
        if args.typical:
            taus = [float(np.exp(np.mean(np.log(by_L[L])))) for L in Ls]
            errs = [taus[i] * float(np.std(np.log(by_L[L]), ddof=1) / math.sqrt(len(by_L[L])))
                    for i, L in enumerate(Ls)]
        else:
            taus = [float(np.mean(by_L[L])) for L in Ls]
            errs = [float(np.std(by_L[L], ddof=1) / math.sqrt(len(by_L[L]))) for L in Ls]
        fit = (power_fit if args.model == "power" else log_corrected_fit)(Ls, taus, errs, **(
            {"l_min": args.Lmin} if args.model == "power" else {}))
        print(json.dumps(fit))
        if args.out:
            args.out.write_text(json.dumps(fit, indent=1))
    elif args.analysis == "running":
        from .scaling import running_exponent

        by_L = {}
        for rec in records:
            by_L.setdefault(rec["L"], []).append(rec["tau"])
        Ls = sorted(by_L)
        taus = [float(np.mean(by_L[L])) for L in Ls]
        errs = [float(np.std(by_L[L], ddof=1) / np.sqrt(len(by_L[L]))) for L in Ls]
        out = running_exponent(Ls, taus, errs)
        result = [{"L": float(L), "alpha": float(a), "alpha_err": float(e)}
                  for L, a, e in zip(out["L"], out["alpha"], out["alpha_err"])]
        print(json.dumps(result))
        if args.out:
            args.out.write_text(json.dumps(result, indent=1))
    elif args.analysis == "scatter":
        from .observables import circle_domain_relation, square_domain_relation, stripe_relation

        pairs = [(r["L"], r.get("v"), r["m2"], r["mk2"]) for r in records if r.get("mk2") is not None]
        if not pairs:
            raise SystemExit("no records with m2 and mk2 fields")
        L = pairs[0][0]
        write_csv(pairs, args.out.with_name(args.out.name + "_points.csv"), ["L", "v", "m2", "mk2"])
        grid = np.linspace(0.0, 1.0, 201)
        write_csv(
            list(zip(grid, stripe_relation(grid, L), square_domain_relation(grid, L),
                     circle_domain_relation(grid, L))),
            args.out.with_name(args.out.name + "_curves.csv"),
            ["m2", "mk2_stripe", "mk2_square", "mk2_circle"],
        )
        print(f"wrote scatter tables for L={L} ({len(pairs)} points)")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command in ("sa", "sw", "decay", "open-decay", "capture", "qa"):
        _cmd_single(args)
    elif args.command == "winding":
        _cmd_winding(args)
    elif args.command == "run":
        config = ExperimentConfig.load(args.config)
        manifest = run_grid(config, args.out_dir, workers=args.workers, force=args.force)
        statuses = [p["status"] for p in manifest.data["points"].values()]
        print(json.dumps({"points": len(statuses),
                          "done": statuses.count("done"),
                          "failed": statuses.count("failed"),
                          "output": manifest.data.get("output")}))
        if statuses.count("failed"):
            return 1
    elif args.command == "reproduce":
        from .recipes import REGISTRY, reproduce

        if args.figure == "list":
            for name in sorted(REGISTRY):
                print(name)
            return 0
        kwargs = {"stats": args.stats, "workers": args.workers, "plot": not args.no_plot}
        if args.seed is not None:
            kwargs["seed"] = args.seed
        try:
            summary = reproduce(args.figure, args.out_dir, **kwargs)
        except KeyError as exc:
            print(exc.args[0], file=sys.stderr)
            return 2
        (args.out_dir / f"{args.figure}_summary.json").write_text(json.dumps(summary, indent=1, default=str))
        checks = summary.get("checks", {})
        for name, ok in checks.items():
            print(f"[{'PASS' if ok else 'FAIL'}] {args.figure}:{name}")
        print(json.dumps({k: v for k, v in summary.items() if k != "checks"}, default=str))
        if not all(checks.values()):
            return 1
    elif args.command == "analyze":
        _cmd_analyze(args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
