"""Command-line interface.

Exit codes: 0 success, 2 verification failure, 3 rank deficiency without the
opt-in flag, 4 configuration error.  ESTC_THREADS and ESTC_OUTDIR override
the corresponding defaults.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from .coupling import load_field_config
from .engine import (
    EngineTolerances,
    RankDeficiencyError,
    load_solution,
    residual_report,
)
from .lattice import index_of, iter_points, point_of
from .pipeline import (
    ConfigError,
    DigestError,
    RESIDUAL_TOLERANCE,
    RunConfig,
    build_model,
    observe_stage,
    pipeline,
    resume,
    round_sig,
    scan_q4,
    verification_stage,
    write_report,
    _encode,
)
from .scheduler import build_cycle1, stage_of_u, verify_separation
from .engine import run_model

EXIT_OK = 0
EXIT_VERIFICATION = 2
EXIT_RANK = 3
EXIT_CONFIG = 4


def _parse_point(text: str):
    parts = [int(v) for v in text.replace(" ", "").split(",")]
    if len(parts) != 4:
        raise ValueError("expected four comma-separated integers")
    return tuple(parts)


def _parse_a0(text: str):
    vals = [float(v) for v in text.replace(" ", "").split(",")]
    if len(vals) != 8:
        raise ValueError("expected eight comma-separated reals (re,im per component)")
    return vals


def _out_stream(path: str | None):
    return open(path, "w", newline="", encoding="utf-8") if path else sys.stdout


def cmd_index(args) -> int:
    if args.point is not None:
        print(index_of(_parse_point(args.point)))
    elif args.index is not None:
        print(",".join(str(c) for c in point_of(args.index)))
    elif args.dump is not None:
        stream = _out_stream(args.out)
        writer = csv.writer(stream)
        writer.writerow(["i", "n1", "n2", "n3", "n4"])
        for i, pt in enumerate(iter_points(args.dump)):
            writer.writerow([i, *pt])
        if stream is not sys.stdout:
            stream.close()
    else:
        print("nothing to do: pass --point, --index or --dump", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


def cmd_schedule(args) -> int:
    if args.dump_lattices:
        stream = _out_stream(args.out)
        writer = csv.writer(stream)
        writer.writerow(["u", "k", "stage", "phase", "c1", "c2", "c3", "c4",
                         "p1", "p2", "p3", "p4"])
        for lat in build_cycle1():
            st, ph = stage_of_u(lat.u)
            writer.writerow([lat.u, lat.k, st, ph, *lat.center, *lat.periods])
        if stream is not sys.stdout:
            stream.close()
        return EXIT_OK
    if args.model is not None:
        model = build_model(args.model)
        stream = _out_stream(args.out)
        writer = csv.writer(stream)
        writer.writerow(["k", "i", "n1", "n2", "n3", "n4"])
        for k, pt in model.equations():
            writer.writerow([k, index_of(pt), *pt])
        if stream is not sys.stdout:
            stream.close()
        return EXIT_OK
    if args.verify:
        report = verify_separation()
        print(f"pairs checked: {report.pairs_checked}")
        print(f"violations: {len(report.violations)}")
        for u, v, d in report.violations[:20]:
            print(f"  u={u} u'={v} difference={d}")
        return EXIT_OK if report.ok else EXIT_VERIFICATION
    print("nothing to do: pass --dump-lattices, --model or --verify", file=sys.stderr)
    return EXIT_CONFIG


def cmd_solve(args) -> int:
    run = RunConfig(
        field=load_field_config(args.config),
        model=args.model,
        out_dir=Path(args.outdir),
        tolerances=EngineTolerances(),
        threads=args.threads,
        seed=args.seed,
        allow_rank_deficient=args.allow_rank_deficient,
        compact=args.compact,
        grid=args.grid,
        a0=_parse_a0(args.a0) if args.a0 else None,
    )
    manifest = pipeline(run)
    if args.out:
        sol = Path(run.out_dir) / "solution.estc"
        Path(args.out).write_bytes(sol.read_bytes())
    clusters = dict(manifest.cluster_stats)
    sizes = clusters.pop("cluster_sizes", [])
    clusters["largest_clusters"] = sizes[:5]
    print(json.dumps(_encode({"ok": manifest.ok,
                              "out_dir": manifest.out_dir,
                              "verification": manifest.verification,
                              "clusters": clusters}), sort_keys=True, indent=1))
    return EXIT_OK if manifest.ok else EXIT_VERIFICATION


def cmd_verify(args) -> int:
    if args.solution:
        if args.manifest:
            data = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
            from .engine import file_digest
            if file_digest(args.solution) != data["digests"]["solution.estc"]:
                raise DigestError(f"digest mismatch for {args.solution}")
        table = load_solution(args.solution)
        model = build_model(table.model_name)
        rep = residual_report(table.config, table, model)
        ok = rep.max_on_model <= RESIDUAL_TOLERANCE
        print(json.dumps(_encode({"residuals": rep.to_dict(), "ok": ok}),
                         sort_keys=True, indent=1))
        return EXIT_OK if ok else EXIT_VERIFICATION
    if not args.config:
        print("pass --solution FILE or --config FILE --model P", file=sys.stderr)
        return EXIT_CONFIG
    cfg = load_field_config(args.config)
    model = build_model(args.model)
    table, records = run_model(cfg, model, allow_rank_deficient=args.allow_rank_deficient)
    payload = verification_stage(cfg, table, records, model, EngineTolerances(),
                                 allow_rank_deficient=args.allow_rank_deficient)
    print(json.dumps(_encode(payload), sort_keys=True, indent=1))
    return EXIT_OK if payload["ok"] else EXIT_VERIFICATION


def cmd_observe(args) -> int:
    if args.manifest:
        manifest = resume(args.manifest, "observe",
                          a0=_parse_a0(args.a0) if args.a0 else None,
                          grid=args.grid)
        report_path = Path(manifest.out_dir) / "observables.json"
        text = report_path.read_text(encoding="utf-8")
        print(text, end="")
        return EXIT_OK
    if not args.solution:
        print("pass --solution FILE or --manifest FILE", file=sys.stderr)
        return EXIT_CONFIG
    table = load_solution(args.solution)
    report = observe_stage(table, table.config,
                           a0=_parse_a0(args.a0) if args.a0 else None,
                           grid=args.grid, seed=args.seed, threads=args.threads)
    text = json.dumps(_encode(report), sort_keys=True, indent=1)
    if args.json:
        write_report(Path(args.json), report)
    print(text)
    return EXIT_OK


def cmd_scan(args) -> int:
    lo, hi, step = (float(v) for v in args.q4.split(":"))
    if step <= 0:
        raise ConfigError("q4 step must be positive")
    values = []
    v = lo
    while v <= hi + 1e-12:
        values.append(round(v, 12))
        v += step
    rows = scan_q4(load_field_config(args.config), args.model, values,
                   allow_rank_deficient=args.allow_rank_deficient)
    stream = _out_stream(args.out)
    writer = csv.writer(stream)
    writer.writerow(["q4", "R_min"])
    for q4, rmin in rows:
        writer.writerow([f"{q4:.12g}", f"{round_sig(rmin):.12g}"])
    if stream is not sys.stdout:
        stream.close()
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="estcrystal",
        description="Exact fundamental solutions of finite space-time crystal models",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="sequential numbering of lattice points")
    p.add_argument("--point", help="n1,n2,n3,n4 -> global index")
    p.add_argument("--index", type=int, help="global index -> point")
    p.add_argument("--dump", type=int, help="CSV of the first N points")
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("schedule", help="fractal lattice family and models")
    p.add_argument("--dump-lattices", action="store_true")
    p.add_argument("--model", help="model selector (0..3 or 'full')")
    p.add_argument("--verify", action="store_true", help="separation audit")
    p.add_argument("--out")
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("solve", help="full run: solve, verify, observe, manifest")
    p.add_argument("--config", required=True, help="field configuration JSON")
    p.add_argument("--model", default="1")
    p.add_argument("--out", help="extra copy of the solution file")
    p.add_argument("--outdir", default=os.environ.get("ESTC_OUTDIR", "estc-run"))
    p.add_argument("--compact", action="store_true",
                   help="drop projector vectors after verification")
    p.add_argument("--allow-rank-deficient", action="store_true")
    p.add_argument("--threads", type=int, default=int(os.environ.get("ESTC_THREADS", "1")))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", type=int, help="quadrature cross-check grid")
    p.add_argument("--a0", help="re,im x4 amplitude (default: minimizer)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="verification report")
    p.add_argument("--solution", help="residual check of a stored solution")
    p.add_argument("--manifest", help="check the solution digest first")
    p.add_argument("--config", help="re-solve and verify projector algebra")
    p.add_argument("--model", default="1")
    p.add_argument("--allow-rank-deficient", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("observe", help="accuracy report for a stored solution")
    p.add_argument("--solution", help="solution file")
    p.add_argument("--manifest", help="resume the observe stage of a prior run")
    p.add_argument("--a0", help="re,im x4 amplitude (default: minimizer)")
    p.add_argument("--grid", type=int, help="quadrature cross-check grid (0 = auto)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=int(os.environ.get("ESTC_THREADS", "1")))
    p.add_argument("--json", help="also write the report to a file")
    p.set_defaults(func=cmd_observe)

    p = sub.add_parser("scan", help="R_min over a frequency sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--model", default="0")
    p.add_argument("--q4", required=True, help="from:to:step")
    p.add_argument("--allow-rank-deficient", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_scan)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except RankDeficiencyError as exc:
        print(f"rank deficiency: {exc}", file=sys.stderr)
        return EXIT_RANK
    except DigestError as exc:
        print(f"digest error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
