"""Command-line front end: ``rmtnoise {estimate,patches,simulate,compare,tw-table}``.

Every report embeds its effective configuration. Passing a report (or any
JSON file with a ``config`` object) back through ``--config`` re-runs it;
flags given on the command line override values from the file.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .errors import InvalidArgumentError, ParseError, RMTNoiseError
from .estimator import DEFAULT_ALPHA, MODES, EstimatorConfig, NoiseEstimate, estimate_noise
from .fileio import (
    add_patch_noise,
    csv_report,
    dumps_report,
    extract_patches,
    read_matrix_csv,
    read_pgm,
    write_matrix_csv,
)
from .rmt_core import tw1_quantile
from .simulation import SimConfig, comparison_experiment, coverage_experiment
from .spectrum import spectrum_of

DEFAULT_SIGMAS = [1.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0]
DEFAULT_PERCENTILES = [0.01, 0.05, 0.1, 0.3, 0.5, 0.7, 0.9, 0.95, 0.975, 0.99]

COMMON = {"seed": 0, "alpha1": DEFAULT_ALPHA, "alpha2": DEFAULT_ALPHA, "mode": "paper-literal"}
DEFAULTS = {
    "estimate": {**COMMON, "input": None, "eigensolver": "lapack", "allow_fallback": False},
    "patches": {
        **COMMON,
        "image": None,
        "patch_side": 16,
        "count": 1000,
        "noise_sigma": 10.0,
        "eigensolver": "lapack",
        "allow_fallback": False,
    },
    "simulate": {
        **COMMON,
        "n_dim": 64,
        "n_samples": 256,
        "sigma": 1.0,
        "trials": 1000,
        "spikes": [],
        "alphas": [0.9, 0.95, 0.97, 0.99],
    },
    "compare": {**COMMON, "n_dim": 256, "n_samples": 512, "trials": 1000, "spikes": [], "sigmas": DEFAULT_SIGMAS},
    "tw-table": {"p": DEFAULT_PERCENTILES},
}
# Options that never change results; kept out of the embedded configuration.
NOT_ECHOED = {"command", "out", "format", "config", "workers", "matrix_out"}


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rmtnoise", description="Noise variance estimation from covariance spectra.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    output = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    output.add_argument("--out", help="report path (default: stdout)")
    output.add_argument("--format", choices=["json", "csv"])
    output.add_argument("--config", type=Path, help="JSON config or earlier report to re-run")

    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--seed", type=_seed)
    common.add_argument("--alpha1", type=float, help="detection level for T1 (default 0.97)")
    common.add_argument("--alpha2", type=float, help="level for T2 (default 0.97)")
    common.add_argument("--mode", choices=MODES, help="normalization of the corrected bound")

    def add(name, help_text, parents):
        return sub.add_parser(name, help=help_text, parents=parents, argument_default=argparse.SUPPRESS)

    est = add("estimate", "estimate noise variance from a CSV sample matrix", [output, common])
    est.add_argument("input", nargs="?", help="CSV, one observation per row")
    est.add_argument("--eigensolver", choices=["lapack", "jacobi"])
    est.add_argument("--allow-fallback", action="store_true", dest="allow_fallback")

    pat = add("patches", "extract noisy patches from a PGM image and estimate", [output, common])
    pat.add_argument("image", nargs="?", help="8-bit PGM (P2 or P5)")
    pat.add_argument("--patch-side", type=int, dest="patch_side")
    pat.add_argument("--count", type=int)
    pat.add_argument("--noise-sigma", type=float, dest="noise_sigma")
    pat.add_argument("--matrix-out", dest="matrix_out", required=True, help="where to write the patch matrix CSV")
    pat.add_argument("--eigensolver", choices=["lapack", "jacobi"])
    pat.add_argument("--allow-fallback", action="store_true", dest="allow_fallback")

    for name, help_text in (("simulate", "T1 coverage experiment"), ("compare", "estimator comparison across noise levels")):
        p = add(name, help_text, [output, common])
        p.add_argument("--n-dim", type=int, dest="n_dim")
        p.add_argument("--n-samples", type=int, dest="n_samples")
        p.add_argument("--trials", type=int)
        p.add_argument("--spike", type=float, action="append", dest="spikes", help="planted spike strength in units of sigma^2")
        p.add_argument("--workers", type=int, help="parallel processes (does not change results)")
    sim = sub.choices["simulate"]
    sim.add_argument("--sigma", type=float)
    sim.add_argument("--alphas", type=_float_list, help="comma-separated T1 levels")
    cmp_ = sub.choices["compare"]
    cmp_.add_argument("--sigmas", type=_float_list, help="comma-separated true noise std-devs")

    tw = add("tw-table", "print Tracy-Widom beta=1 quantiles", [output])
    tw.add_argument("--p", type=_float_list, help="comma-separated probabilities")
    return parser


def _load_config(path: Path, command: str) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, ValueError) as exc:
        raise ParseError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ParseError(f"config {path} must hold a JSON object")
    if "command" in data and data["command"] != command:
        raise InvalidArgumentError(f"config {path} is for {data['command']!r}, not {command!r}")
    cfg = data.get("config", data)
    unknown = set(cfg) - set(DEFAULTS[command]) - {"command"}
    if unknown:
        raise InvalidArgumentError(f"unknown config keys for {command}: {sorted(unknown)}")
    return {k: v for k, v in cfg.items() if k != "command"}


def effective_config(args: argparse.Namespace) -> dict:
    given = vars(args)
    command = given["command"]
    cfg = dict(DEFAULTS[command])
    if "config" in given:
        cfg.update(_load_config(given["config"], command))
    cfg.update({k: v for k, v in given.items() if k not in NOT_ECHOED})
    return cfg


def _header(command: str, cfg: dict) -> dict:
    return {"artifact": {"name": "rmtnoise", "version": __version__}, "command": command, "config": cfg}


def estimate_fields(est: NoiseEstimate) -> dict:
    th = est.thresholds
    shape = th.shape
    return {
        "n_dim": est.n_dim,
        "n_samples": est.n_samples,
        "gamma": shape.gamma,
        "mu": shape.mu,
        "xi": shape.xi,
        "xi_corrected": shape.xi_corrected,
        "alpha1": th.alpha1,
        "alpha2": th.alpha2,
        "t1": th.t1,
        "t2": th.t2,
        "mode": est.mode,
        "split_index_m": est.split_index_m,
        "spike_eigenvalue": est.spike_eigenvalue,
        "sigma_sq_initial": est.sigma_sq_initial,
        "sigma_sq_bound": est.sigma_sq_bound,
        "sigma_sq_final": est.sigma_sq_final,
        "sigma_initial": est.sigma_initial,
        "sigma_final": est.sigma_final,
        "bound_active": est.bound_active,
        "no_split_found": est.diagnostics.no_split_found,
        "rank_truncated": est.diagnostics.rank_truncated,
        "degenerate_floor": est.diagnostics.degenerate_floor,
    }


def _run_estimate(data, cfg: dict) -> dict:
    spec = spectrum_of(data, method=cfg["eigensolver"])
    est = estimate_noise(
        spec,
        cfg["alpha1"],
        cfg["alpha2"],
        EstimatorConfig(mode=cfg["mode"], allow_fallback=bool(cfg["allow_fallback"])),
    )
    fields = estimate_fields(est)
    fields["input_n_dim"] = spec.n_dim
    return fields


def _flat_rows(fields: dict) -> tuple[list[str], list[list]]:
    cols = list(fields)
    return cols, [[fields[c] for c in cols]]


def cmd_estimate(cfg: dict):
    if not cfg.get("input"):
        raise InvalidArgumentError("estimate needs an input CSV path")
    fields = _run_estimate(read_matrix_csv(cfg["input"]), cfg)
    return {"result": fields}, _flat_rows(fields)


def cmd_patches(cfg: dict, matrix_out: str):
    if not cfg.get("image"):
        raise InvalidArgumentError("patches needs an input PGM path")
    image = read_pgm(cfg["image"])
    patches = extract_patches(image, cfg["patch_side"], cfg["count"], cfg["seed"])
    noisy = add_patch_noise(patches, cfg["noise_sigma"], cfg["seed"])
    write_matrix_csv(matrix_out, noisy)
    fields = _run_estimate(read_matrix_csv(matrix_out), cfg)
    fields["injected_sigma"] = float(cfg["noise_sigma"])
    fields["abs_error"] = abs(fields["sigma_final"] - fields["injected_sigma"])
    return {"result": fields}, _flat_rows(fields)


def _sim_config(cfg: dict, sigma: float = 1.0) -> SimConfig:
    return SimConfig(
        n_dim=cfg["n_dim"],
        n_samples=cfg["n_samples"],
        sigma=sigma,
        trials=cfg["trials"],
        seed=cfg["seed"],
        spikes=tuple(cfg["spikes"] or ()),
        alpha1=cfg["alpha1"],
        alpha2=cfg["alpha2"],
        normalization_mode=cfg["mode"],
    )


def cmd_simulate(cfg: dict, workers: int):
    result = coverage_experiment(_sim_config(cfg, cfg["sigma"]), cfg["alphas"], workers=workers)
    cols = ["alpha", "t1", "trials", "successes", "rate", "stderr"]
    rows = [[getattr(r, c) for c in cols] for r in result.rows]
    body = {"result": {"target_split": result.target_split, "rows": [dict(zip(cols, r)) for r in rows]}}
    return body, (cols, rows)


def cmd_compare(cfg: dict, workers: int):
    result = comparison_experiment(cfg["sigmas"], _sim_config(cfg), workers=workers)
    estimators = list(result.mad)
    cols = ["sigma_true"] + estimators
    rows = [[r.sigma_true] + [r.means[k] for k in estimators] for r in result.rows]
    rows.append(["MAD"] + [result.mad[k] for k in estimators])
    rows.append(["MSE"] + [result.mse[k] for k in estimators])
    body = {
        "result": {
            "primary": result.primary,
            "rows": [
                {"sigma_true": r.sigma_true, "means": r.means, "bound_active_rate": r.bound_active_rate}
                for r in result.rows
            ],
            "mad": result.mad,
            "mse": result.mse,
        }
    }
    return body, (cols, rows)


def cmd_twtable(cfg: dict):
    ps = cfg["p"]
    rows = [[p, tw1_quantile(p)] for p in ps]
    return {"result": [{"p": p, "z": z} for p, z in rows]}, (["p", "z"], rows)


def _emit(text: str, out) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    given = vars(args)
    command = given["command"]
    cfg = effective_config(args)
    workers = int(given.get("workers", 1))

    if command == "estimate":
        body, table = cmd_estimate(cfg)
    elif command == "patches":
        body, table = cmd_patches(cfg, given["matrix_out"])
    elif command == "simulate":
        body, table = cmd_simulate(cfg, workers)
    elif command == "compare":
        body, table = cmd_compare(cfg, workers)
    else:
        body, table = cmd_twtable(cfg)

    header = _header(command, cfg)
    if given.get("format", "json") == "csv":
        text = csv_report(header, *table)
    else:
        text = dumps_report({**header, **body})
    _emit(text, given.get("out"))
    return 0


def main(argv=None) -> None:
    try:
        code = run(argv)
    except RMTNoiseError as exc:
        sys.stderr.write(dumps_report({"error": exc.code, "exit_code": exc.exit_code, "message": str(exc)}))
        code = exc.exit_code
    sys.exit(code)


if __name__ == "__main__":
    main()
