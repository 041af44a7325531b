"""Command-line entry point: denoise, decompose, krnorm, experiment, selftest.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""
import argparse
import json
import math
import sys
import time
from pathlib import Path
from typing import List, Optional

from database import record_run
from logger import get_logger
from logic.errors import KrtvError
from logic.experiments import EXPERIMENTS, run_experiment
from logic.grid import GridFunction
from logic.image_io import read_pgm, read_points_csv, read_signal, write_pgm, write_signal
from logic.krnorm_oracle import kr_norm_exact, kr_norm_grid
from logic.selftest import all_passed, run_selftest
from logic.variational import cartoon_texture, krtv_denoise, l1tv_denoise, match_tv_parameter
from schemas import RegParams, RunReport, SolverConfig

logger = get_logger()


def _finite_or_none(value: Optional[float]) -> Optional[float]:
    return value if value is not None and math.isfinite(value) else None


def _read_grid(path: str, h: float) -> GridFunction:
    if path.lower().endswith((".pgm", ".pnm")):
        return read_pgm(path, h)
    return read_signal(path)


def _write_grid(path: str, u: GridFunction, scaling: str = "clip") -> str:
    if u.ndim == 2:
        return str(write_pgm(path, u, scaling))
    return str(write_signal(path, u))


def _solver_config(args) -> SolverConfig:
    overrides = {
        "max_iters": args.max_iters,
        "gap_tol": args.gap_tol,
        "alpha": args.alpha,
        "check_every": args.check_every,
    }
    return SolverConfig(**{k: v for k, v in overrides.items() if v is not None})


def _regparams(args) -> RegParams:
    return RegParams(lambda1=args.lambda1, lambda2=args.lambda2)


def cmd_denoise(args) -> RunReport:
    u0 = _read_grid(args.input, args.h)
    cfg = _solver_config(args)
    if args.model == "krtv":
        lam = _regparams(args)
        res = krtv_denoise(u0, lam, cfg, solver=args.solver)
        params = lam.as_dict()
    else:
        method = "lp" if args.solver == "lp" else "direct"
        res = l1tv_denoise(u0, args.lambda1, cfg, method=method)
        params = {"lambda1": args.lambda1}
    out = _write_grid(args.output, res.u)
    report = res.report
    if not args.json:
        print(f"✅ {args.model} denoised {args.input} -> {out} "
              f"(iterations {report.iterations}, relative gap {report.relative_gap:.2e})")
    return RunReport(
        command="denoise",
        params={"model": args.model, "solver": args.solver, **params},
        iterations=report.iterations,
        final_gap=_finite_or_none(report.relative_gap),
        objective=_finite_or_none(report.objective),
        mass_in=report.mass_in,
        mass_out=report.mass_out,
        outputs=[out],
    )


def cmd_decompose(args) -> RunReport:
    u0 = _read_grid(args.input, args.h)
    cfg = _solver_config(args)
    match = None
    if args.model == "krtv":
        params = _regparams(args)
    else:
        params = args.lam if args.model == "gtv" else args.lambda1
        if params is None or not math.isfinite(params):
            raise ValueError(f"--{'lam' if args.model == 'gtv' else 'lambda1'} is required for {args.model}")
    if args.match_tv is not None:
        match = match_tv_parameter(
            u0, args.model, args.match_tv, tuple(args.bracket), cfg,
            fixed_lambda1=args.lambda1 if args.model == "krtv" else None,
            solver=args.solver,
        )
        if args.model == "krtv":
            params = RegParams(lambda1=args.lambda1, lambda2=match.parameter)
        else:
            params = match.parameter
    dec = cartoon_texture(u0, args.model, params, cfg, solver=args.solver)
    outputs = [_write_grid(args.cartoon_out, dec.cartoon), _write_grid(args.texture_out, dec.texture, scaling="minmax")]
    solve = dec.report.solve
    if not args.json:
        print(f"✅ {args.model} decomposition: TV(cartoon) {dec.report.tv_cartoon:.6g}, "
              f"|texture|_1 {dec.report.texture_l1:.6g}")
        if match is not None:
            print(f"{'✅' if match.matched else '⚠️ '} TV matched at parameter {match.parameter:.6g} "
                  f"after {len(match.trace)} solves")
    run_params = {"model": args.model, **dec.report.params}
    if match is not None:
        run_params.update({"match_tv": args.match_tv, "matched": match.matched})
    return RunReport(
        command="decompose",
        params=run_params,
        iterations=solve.iterations,
        final_gap=_finite_or_none(solve.relative_gap),
        objective=_finite_or_none(solve.objective),
        mass_in=solve.mass_in,
        mass_out=solve.mass_out,
        outputs=outputs,
    )


def cmd_krnorm(args) -> RunReport:
    lam = _regparams(args)
    if args.points:
        res = kr_norm_exact(read_points_csv(args.points), lam)
        cert = res.certificate
        payload = {"value": res.value, "dual": cert.dual, "gap": cert.gap, "certified": cert.certified}
        if not args.json:
            print(f"{res.value:.10g}")
            print(f"{'✅' if cert.certified else '❌'} certificate: primal {cert.primal:.10g}, "
                  f"dual {cert.dual:.10g}, gap {cert.gap:.3e}")
        return RunReport(command="krnorm", params={"source": args.points, **lam.as_dict(), **payload},
                         objective=_finite_or_none(res.value))
    res = kr_norm_grid(_read_grid(args.input, args.h), lam, _solver_config(args))
    iterations = res.report.iterations if res.report else 0
    gap = res.report.relative_gap if res.report else 0.0
    if not args.json:
        print(f"{res.value:.10g}")
        print(f"ℹ️  grid solve: {iterations} iterations, relative gap {gap:.3e}")
    return RunReport(command="krnorm", params={"source": args.input, **lam.as_dict(), "value": _finite_or_none(res.value)},
                     iterations=iterations, final_gap=gap, objective=_finite_or_none(res.value))


def cmd_experiment(args) -> RunReport:
    result = run_experiment(args.name, args.outdir, _solver_config(args), size=args.size)
    if not args.json:
        print(f"✅ experiment {args.name}: {len(result.outputs)} files in {args.outdir}")
    return RunReport(command="experiment", params={"name": args.name, "size": args.size},
                     outputs=[str(p) for p in result.outputs])


def cmd_selftest(args) -> RunReport:
    results = run_selftest()
    if not args.json:
        for r in results:
            print(f"{'✅' if r.passed else '❌'} {r.name}: {r.detail} ({r.duration_ms:.0f} ms)")
    report = RunReport(command="selftest", params={r.name: r.passed for r in results})
    if not all_passed(results):
        failed = [r.name for r in results if not r.passed]
        raise KrtvError(f"selftest failed: {', '.join(failed)}")
    return report


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="krtv", description="KR-TV denoising and cartoon-texture decomposition")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, grid=True):
        p.add_argument("--json", action="store_true", help="Print the run report as JSON")
        p.add_argument("--max-iters", type=int, default=None, help="Primal-dual iteration limit")
        p.add_argument("--gap-tol", type=float, default=None, help="Relative duality gap tolerance")
        p.add_argument("--alpha", type=float, default=None, help="Inertial parameter in [0, 1/3)")
        p.add_argument("--check-every", type=int, default=None, help="Gap evaluation cadence")
        if grid:
            p.add_argument("--h", type=float, default=1.0, help="Grid spacing for image input")

    def weights(p, required_lambda1=False):
        p.add_argument("--lambda1", type=float, default=math.inf, required=required_lambda1, help="Weight lambda1 (inf allowed)")
        p.add_argument("--lambda2", type=float, default=math.inf, help="Weight lambda2 (inf allowed)")

    p = sub.add_parser("denoise", help="Denoise a PGM image or .dat signal")
    common(p)
    weights(p)
    p.add_argument("--model", choices=["krtv", "l1tv"], default="krtv")
    p.add_argument("--solver", choices=["pd", "lp"], default="pd", help="lp is exact and 1D only")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.set_defaults(handler=cmd_denoise)

    p = sub.add_parser("decompose", help="Cartoon-texture decomposition")
    common(p)
    weights(p)
    p.add_argument("--model", choices=["krtv", "l1tv", "gtv"], default="krtv")
    p.add_argument("--lam", type=float, default=None, help="G-TV weight")
    p.add_argument("--solver", choices=["pd", "lp"], default="pd")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--cartoon-out", required=True)
    p.add_argument("--texture-out", required=True)
    p.add_argument("--match-tv", type=float, default=None, metavar="TARGET",
                   help="Tune the model weight until TV(cartoon) matches TARGET")
    p.add_argument("--bracket", type=float, nargs=2, default=[0.01, 100.0], metavar=("LO", "HI"))
    p.set_defaults(handler=cmd_decompose)

    p = sub.add_parser("krnorm", help="KR norm of a point measure (exact) or a grid function")
    common(p)
    weights(p, required_lambda1=True)
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--points", help="CSV with rows x[,y],weight")
    source.add_argument("--in", dest="input", help="Grid function (.pgm or .dat)")
    p.set_defaults(handler=cmd_krnorm)

    p = sub.add_parser("experiment", help="Parameter sweeps on synthetic phantoms")
    common(p, grid=False)
    p.add_argument("name", choices=sorted(EXPERIMENTS))
    p.add_argument("--outdir", required=True)
    p.add_argument("--size", type=int, default=None, help="Samples per signal or pixels per image side")
    p.set_defaults(handler=cmd_experiment)

    p = sub.add_parser("selftest", help="Run the invariant suite")
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=cmd_selftest)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # --help exits 0, usage errors exit 2
        return int(e.code or 0)
    start = time.perf_counter()
    try:
        report = args.handler(args)
    except (KrtvError, ValueError, OSError) as e:
        elapsed = (time.perf_counter() - start) * 1000
        print(f"❌ {e}", file=sys.stderr)
        if args.json:
            print(json.dumps({"ok": False, "error": str(e), "type": type(e).__name__}), file=sys.stderr)
        try:
            record_run(RunReport(command=args.command, params={}, wall_time_ms=elapsed), ok=False, error=str(e))
        except Exception as db_error:
            logger.log_app_event("run_record_failed", {"error": str(db_error)})
        return 1
    report = report.model_copy(update={"wall_time_ms": (time.perf_counter() - start) * 1000})
    record_run(report)
    if args.json:
        print(json.dumps({"ok": True, **report.model_dump()}, default=str))
    return 0


if __name__ == "__main__":
    sys.exit(main())
