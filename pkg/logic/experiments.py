"""Parameter sweeps on synthetic phantoms.

The 1D sweeps (plateau, ramp, hat) run on the exact LP solver and write one
two-column .dat file per parameter; the 2D runs write PGM images. Each run
also writes a deterministic summary.json.
"""
import json
from pathlib import Path
from typing import Callable, Dict, List, NamedTuple, Optional

import numpy as np

from logger import get_logger
from logic.core import tv_value
from logic.errors import BracketError
from logic.grid import GridFunction
from logic.image_io import write_pgm, write_signal
from logic.phantoms import (
    SIGNAL_SAMPLES,
    cartoon_sinusoid,
    correlation,
    count_jumps,
    count_plateau_levels,
    disk_on_gradient,
    hat_signal,
    plateau_signal,
    ramp_signal,
    support_length,
)
from logic.variational import cartoon_texture, krtv_denoise, l1tv_denoise, match_tv_parameter
from schemas import RegParams, SolverConfig

logger = get_logger()

PLATEAU_L1 = (10.0, 2.0)
PLATEAU_KR_LAMBDA1 = 100.0
PLATEAU_KR_L2 = (30.0, 20.0, 10.0, 5.0, 3.0)

RAMP_L1 = (2.0, 1.8, 1.6, 1.4, 1.2, 1.0)
RAMP_KR_LAMBDA1 = 100.0
RAMP_KR_L2 = tuple(float(v) for v in np.geomspace(0.5, 8.0, 41))

HAT_L1 = (300.0, 10.0, 5.0, 4.0, 3.0, 2.0)
HAT_KR_LAMBDA1 = 300.0
HAT_KR_L2 = (1e5, 1e4, 1e3, 100.0, 10.0, 1.0)

DENOISE_KR = RegParams(lambda1=1.0, lambda2=0.5)
DENOISE_L1 = 1.0

CARTOON_L1 = 0.5
CARTOON_KR_LAMBDA1 = 1.0
CARTOON_KR_BRACKET = (0.01, 100.0)
CARTOON_GTV_BRACKET = (0.01, 100.0)

JUMP_FRACTION = 0.05


class ExperimentResult(NamedTuple):
    name: str
    summary: dict
    outputs: List[Path]


def _tag(value: float) -> str:
    return f"{value:g}".replace("+", "")


def _signal_stats(u: GridFunction, u0: GridFunction) -> dict:
    spread = float(u0.values.max() - u0.values.min())
    return {
        "levels": count_plateau_levels(u.values),
        "jumps": count_jumps(u.values, JUMP_FRACTION * spread),
        "support": support_length(u),
        "mass": u.integral(),
        "tv": tv_value(u),
    }


def _sweep_1d(name: str, u0: GridFunction, outdir: Path, l1_ladder, kr_lambda1: float, kr_ladder) -> dict:
    outputs = [write_signal(outdir / f"{name}_input.dat", u0)]
    l1_runs, kr_runs = [], []
    for lambda1 in l1_ladder:
        res = l1tv_denoise(u0, lambda1, method="lp")
        path = write_signal(outdir / f"{name}_l1tv_l1_{_tag(lambda1)}.dat", res.u)
        outputs.append(path)
        l1_runs.append({"lambda1": lambda1, "file": path.name, **_signal_stats(res.u, u0)})
    for lambda2 in kr_ladder:
        res = krtv_denoise(u0, RegParams(lambda1=kr_lambda1, lambda2=lambda2), solver="lp")
        path = write_signal(outdir / f"{name}_krtv_l2_{_tag(lambda2)}.dat", res.u)
        outputs.append(path)
        kr_runs.append({"lambda1": kr_lambda1, "lambda2": lambda2, "file": path.name, **_signal_stats(res.u, u0)})
    return {"input": _signal_stats(u0, u0), "l1tv": l1_runs, "krtv": kr_runs, "outputs": outputs}


def plateau_experiment(outdir: Path, cfg: Optional[SolverConfig] = None, size: int = SIGNAL_SAMPLES) -> dict:
    u0 = plateau_signal(size)
    result = _sweep_1d("plateau", u0, outdir, PLATEAU_L1, PLATEAU_KR_LAMBDA1, PLATEAU_KR_L2)
    supports = [run["support"] for run in result["krtv"]]
    result["supports_increasing"] = bool(all(a < b for a, b in zip(supports, supports[1:])))
    result["max_mass_difference"] = max(abs(run["mass"] - u0.integral()) for run in result["krtv"])
    return result


def ramp_experiment(outdir: Path, cfg: Optional[SolverConfig] = None, size: int = SIGNAL_SAMPLES) -> dict:
    u0 = ramp_signal(size)
    result = _sweep_1d("ramp", u0, outdir, RAMP_L1, RAMP_KR_LAMBDA1, RAMP_KR_L2)
    result["pure_jump_lambda2"] = [run["lambda2"] for run in result["krtv"] if run["levels"] == 2 and run["jumps"] == 1]
    return result


def hat_experiment(outdir: Path, cfg: Optional[SolverConfig] = None, size: int = SIGNAL_SAMPLES) -> dict:
    u0 = hat_signal(size)
    result = _sweep_1d("hat", u0, outdir, HAT_L1, HAT_KR_LAMBDA1, HAT_KR_L2)
    result["max_jumps"] = max(run["jumps"] for run in result["krtv"])
    return result


def denoise2d_experiment(outdir: Path, cfg: Optional[SolverConfig] = None, size: int = 64) -> dict:
    phantom = disk_on_gradient(size)
    clean, noisy = phantom.clean, phantom.noisy
    kr = krtv_denoise(noisy, DENOISE_KR, cfg)
    l1 = l1tv_denoise(noisy, DENOISE_L1, cfg)
    outputs = [
        write_pgm(outdir / "denoise2d_clean.pgm", clean),
        write_pgm(outdir / "denoise2d_noisy.pgm", noisy),
        write_pgm(outdir / "denoise2d_krtv.pgm", kr.u),
        write_pgm(outdir / "denoise2d_l1tv.pgm", l1.u),
    ]

    def l1_error(u: GridFunction) -> float:
        return float(np.abs(u.values - clean.values).sum())

    return {
        "l1_error": {"noisy": l1_error(noisy), "krtv": l1_error(kr.u), "l1tv": l1_error(l1.u)},
        "params": {"krtv": DENOISE_KR.as_dict(), "l1tv": {"lambda1": DENOISE_L1}},
        "relative_gap": {"krtv": kr.report.relative_gap, "l1tv": l1.report.relative_gap},
        "mass": {"input": noisy.integral(), "krtv": kr.u.integral(), "l1tv": l1.u.integral()},
        "outputs": outputs,
    }


def _matched(u0: GridFunction, model: str, target: float, bracket, cfg, fixed_lambda1=None) -> dict:
    try:
        match = match_tv_parameter(u0, model, target, bracket, cfg, fixed_lambda1=fixed_lambda1)
        return {"parameter": match.parameter, "matched": match.matched, "trace": match.trace}
    except BracketError as e:
        logger.log_app_event("tv_match_bracket_failed", {"model": model, "target": target, "samples": e.samples})
        value, _ = min(e.samples, key=lambda s: abs(s[1] - target))
        return {"parameter": value, "matched": False, "trace": e.samples}


def cartoon2d_experiment(outdir: Path, cfg: Optional[SolverConfig] = None, size: int = 64) -> dict:
    composite = cartoon_sinusoid(size)
    u0 = composite.image
    outputs = [write_pgm(outdir / "cartoon2d_input.pgm", u0)]

    l1 = cartoon_texture(u0, "l1tv", CARTOON_L1, cfg)
    target = l1.report.tv_cartoon
    kr_match = _matched(u0, "krtv", target, CARTOON_KR_BRACKET, cfg, fixed_lambda1=CARTOON_KR_LAMBDA1)
    gtv_match = _matched(u0, "gtv", target, CARTOON_GTV_BRACKET, cfg)
    decompositions = {
        "l1tv": l1,
        "krtv": cartoon_texture(u0, "krtv", RegParams(lambda1=CARTOON_KR_LAMBDA1, lambda2=kr_match["parameter"]), cfg),
        "gtv": cartoon_texture(u0, "gtv", gtv_match["parameter"], cfg),
    }

    models = {}
    for model, dec in decompositions.items():
        outputs.append(write_pgm(outdir / f"cartoon2d_{model}_cartoon.pgm", dec.cartoon))
        outputs.append(write_pgm(outdir / f"cartoon2d_{model}_texture.pgm", dec.texture, scaling="minmax"))
        models[model] = {
            "params": dec.report.params,
            "tv_cartoon": dec.report.tv_cartoon,
            "texture_l1": dec.report.texture_l1,
            "texture_vs_oscillation": correlation(dec.texture, composite.oscillation),
            "texture_vs_cartoon": correlation(dec.texture, composite.cartoon),
        }
    return {"target_tv": target, "models": models, "match": {"krtv": kr_match, "gtv": gtv_match}, "outputs": outputs}


EXPERIMENTS: Dict[str, Callable[..., dict]] = {
    "plateau": plateau_experiment,
    "ramp": ramp_experiment,
    "hat": hat_experiment,
    "denoise2d": denoise2d_experiment,
    "cartoon2d": cartoon2d_experiment,
}


def run_experiment(name: str, outdir, cfg: Optional[SolverConfig] = None, size: Optional[int] = None) -> ExperimentResult:
    if name not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {name!r}, expected one of {sorted(EXPERIMENTS)}")
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    kwargs = {"size": size} if size is not None else {}
    summary = EXPERIMENTS[name](outdir, cfg, **kwargs)
    outputs = summary.pop("outputs")
    summary_path = outdir / "summary.json"
    summary_path.write_text(json.dumps({"experiment": name, **summary}, indent=2, sort_keys=True, default=str) + "\n")
    outputs.append(summary_path)
    logger.log_app_event("experiment_finished", {"experiment": name, "outdir": str(outdir), "files": len(outputs)})
    return ExperimentResult(name, summary, outputs)
