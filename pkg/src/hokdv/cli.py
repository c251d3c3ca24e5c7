"""Command-line front end: ``hokdv {coeffs,dispersion,simulate,scan,velocity}``.

Exit status: 0 on success, 1 on errors (message on stderr), 2 when an
energy-drift alarm was raised.  Options may also come from a flat JSON file
(``--config``); flags given on the command line win.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .coeffs import (
    ModelParameters,
    check_model,
    compute_abcd,
    compute_equation_coefficients,
    compute_higher_abcd,
    equation_coefficients,
    evaluate_P,
    hamiltonian_rho,
    threshold_H,
)
from .dispersion import dispersion_report, f_coefficient_short
from .errors import ParabolaCaseError, ParameterError
from .spectral import PeriodicGrid, WaveField, random_band_limited, sobolev_norm
from .solver import (
    SolverConfig,
    SplitConfig,
    local_existence_estimate,
    solve,
    solve_split,
    velocity_ansatz,
)

SUBCOMMANDS = ("coeffs", "dispersion", "simulate", "scan", "velocity")
EXIT_OK, EXIT_ERROR, EXIT_ALARM = 0, 1, 2

# option name -> (type, default); the JSON config file accepts exactly these keys
OPTIONS = {
    "theta": (float, 1.0),
    "lambda": (float, 0.0),
    "mu": (float, 0.0),
    "lambda1": (float, 0.0),
    "mu1": (float, 0.0),
    "rho": (float, 0.0),
    "hamiltonian_rho": (bool, False),
    "gamma": (float, None),
    "n": (int, 256),
    "length": (float, 64.0),
    "dt": (float, 1e-3),
    "t_end": (float, 10.0),
    "record_every": (int, 100),
    "tolerance": (float, 1e-8),
    "no_dealias": (bool, False),
    "initial": (str, "gaussian"),
    "amplitude": (float, 0.1),
    "width": (float, 4.0),
    "center": (float, None),
    "mode": (int, 1),
    "snapshots": (bool, False),
    "split_epsilon": (float, None),
    "cutoff": (str, "smooth"),
    "s": (float, 1.5),
    "k_max": (float, 2.0),
    "n_k": (int, 201),
    "lambda_min": (float, -10.0),
    "lambda_max": (float, 10.0),
    "mu_min": (float, -8.0),
    "mu_max": (float, 0.2),
    "resolution": (int, 200),
    "snapshot": (str, None),
    "terms": (str, "full"),
    "output_dir": (str, None),
    "seed": (int, 0),
}
_CHOICES = {
    "initial": ("gaussian", "sech2", "cosine", "random"),
    "cutoff": ("smooth", "sharp"),
    "terms": ("full", "first_order"),
}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    params: ModelParameters
    options: dict = field(default_factory=dict)
    output_dir: Path | None = None
    seed: int = 0

    def echo(self):
        """Plain-dict copy of every setting, for the provenance block."""
        out = {"subcommand": self.subcommand}
        out.update(self.options)
        out["rho"] = float(self.params.rho)
        out["output_dir"] = None if self.output_dir is None else str(self.output_dir)
        out["seed"] = self.seed
        return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _flag(name):
    return "--" + name.replace("_", "-")


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--config", help="flat JSON file of option values")
    for name, (typ, _) in OPTIONS.items():
        if typ is bool:
            common.add_argument(_flag(name), dest=name, action="store_true", default=None)
        else:
            common.add_argument(_flag(name), dest=name, type=typ, default=None,
                                choices=_CHOICES.get(name))
    parser = _Parser(prog="hokdv", description="Fifth-order KdV-BBM water-wave model toolkit.")
    parser.add_argument("--version", action="version", version=f"hokdv {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def _load_config_file(path):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed JSON in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError(f"config file {path} must hold a JSON object")
    out = {}
    for key, value in data.items():
        if key == "subcommand":
            continue
        if key not in OPTIONS:
            raise UsageError(f"unknown config key {key!r}")
        typ = OPTIONS[key][0]
        if value is not None:
            if typ is bool and not isinstance(value, bool):
                raise UsageError(f"config key {key!r} must be true or false")
            if typ is int and (isinstance(value, bool) or not isinstance(value, int)):
                raise UsageError(f"config key {key!r} must be an integer")
            if typ is float and (isinstance(value, bool) or not isinstance(value, (int, float))):
                raise UsageError(f"config key {key!r} must be a number")
            if typ is str and not isinstance(value, str):
                raise UsageError(f"config key {key!r} must be a string")
            if key in _CHOICES and value not in _CHOICES[key]:
                raise UsageError(f"config key {key!r} must be one of {_CHOICES[key]}")
            value = float(value) if typ is float else value
        out[key] = value
    if "subcommand" in data and not isinstance(data["subcommand"], str):
        raise UsageError("config key 'subcommand' must be a string")
    return out, data.get("subcommand")


def parse_config(argv) -> RunConfig:
    args = build_parser().parse_args(list(argv))
    options = {name: default for name, (_, default) in OPTIONS.items()}
    if args.config is not None:
        file_opts, file_sub = _load_config_file(args.config)
        if file_sub is not None and file_sub != args.subcommand:
            raise UsageError(f"config file is for {file_sub!r}, not {args.subcommand!r}")
        options.update(file_opts)
    for name in OPTIONS:
        value = getattr(args, name)
        if value is not None:
            options[name] = value

    try:
        base = ModelParameters(options["theta"], options["lambda"], options["mu"],
                               options["lambda1"], options["mu1"], options["rho"])
    except ParameterError as exc:
        raise UsageError(str(exc)) from exc
    params = ModelParameters.with_hamiltonian_rho(
        base.theta, base.lam, base.mu, base.lam1, base.mu1) if options["hamiltonian_rho"] else base

    if options["lambda_min"] >= options["lambda_max"] or options["mu_min"] >= options["mu_max"]:
        raise UsageError("scan ranges must be non-empty (min < max)")
    if options["resolution"] < 2 or options["n_k"] < 2:
        raise UsageError("resolution and n_k must be at least 2")
    if options["snapshot"] is not None and not Path(options["snapshot"]).is_file():
        raise UsageError(f"snapshot file {options['snapshot']} does not exist")

    out = options.pop("output_dir") or os.environ.get("HOKDV_OUTPUT_DIR")
    seed = options.pop("seed")
    return RunConfig(subcommand=args.subcommand, params=params, options=options,
                     output_dir=Path(out) if out else None, seed=seed)


# ---------------------------------------------------------------------------
# output


def _fmt(x):
    return "%.17g" % x


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x + 0.0 if math.isfinite(x) else None
    if obj is None or isinstance(obj, str):
        return obj
    return float(obj)


def _write_csv(path, header, rows):
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")
    return path


def emit_outputs(results: dict, out) -> list:
    """Write the tables in ``results`` plus ``summary.json`` into ``out``.

    ``results`` maps file names to ``(header, rows)`` tables, except the
    key ``"summary"`` which is a JSON-serializable dict.
    """
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name in sorted(results):
        if name == "summary":
            continue
        header, rows = results[name]
        written.append(_write_csv(out / name, header, rows))
    if "summary" in results:
        written.append(_write_json(out / "summary.json", results["summary"]))
    return written


def _summary(cfg, results):
    return {"provenance": {"config": cfg.echo(), "version": __version__, "seed": cfg.seed},
            "results": results}


# ---------------------------------------------------------------------------
# subcommands


def _coefficients(cfg):
    ec = compute_equation_coefficients(cfg.params)
    if cfg.options["gamma"] is not None:
        ec = ec.replace(gamma=cfg.options["gamma"])
    return ec


def _run_coeffs(cfg):
    p = cfg.params
    diag = check_model(p)
    try:
        threshold = threshold_H(p.theta, p.lam, p.mu, p.mu1)
    except ParabolaCaseError:
        threshold = None
    report = {
        "parameters": dataclasses.asdict(p),
        "abcd": dataclasses.asdict(compute_abcd(p)),
        "higher_abcd": dataclasses.asdict(compute_higher_abcd(p)),
        **_coefficients(cfg).as_dict(),
        "hamiltonian_rho": hamiltonian_rho(p),
        "P": evaluate_P(p.theta, p.lam, p.mu),
        "lambda1_threshold": threshold,
        "diagnostics": dataclasses.asdict(diag),
    }
    print(json.dumps(_jsonable(report), indent=2, sort_keys=True))
    if cfg.output_dir is not None:
        emit_outputs({"summary": _summary(cfg, report)}, cfg.output_dir)
    return EXIT_OK


def _run_dispersion(cfg):
    ec = _coefficients(cfg)
    rep = dispersion_report(ec, cfg.options["k_max"], cfg.options["n_k"])
    info = {
        "taylor_model": rep.taylor_model,
        "taylor_euler": rep.taylor_euler,
        "F": rep.f_coefficient,
        "F_short": float(f_coefficient_short(ec)),
        "max_abs_error": rep.max_abs_error,
    }
    print(json.dumps(_jsonable(info), indent=2, sort_keys=True))
    emit_outputs({
        "dispersion.csv": (("k", "c_model", "c_euler", "abs_error"), list(rep.rows())),
        "summary": _summary(cfg, info),
    }, _out_dir(cfg))
    return EXIT_OK


def _initial_field(cfg, grid):
    o = cfg.options
    amp, width = o["amplitude"], o["width"]
    center = grid.length / 2 if o["center"] is None else o["center"]
    kind = o["initial"]
    if kind == "gaussian":
        return WaveField.from_function(grid, lambda x: amp * np.exp(-((x - center) / width) ** 2))
    if kind == "sech2":
        return WaveField.from_function(grid, lambda x: amp / np.cosh((x - center) / width) ** 2)
    if kind == "cosine":
        k0 = o["mode"] * grid.dk
        return WaveField.from_function(grid, lambda x: amp * np.cos(k0 * x))
    rng = np.random.default_rng(cfg.seed)
    f = random_band_limited(grid, rng, band=max(1, grid.n // 16))
    scale = np.max(np.abs(f.values))
    return WaveField(grid, amp * f.values / scale)


def _run_simulate(cfg):
    o = cfg.options
    ec = _coefficients(cfg)
    grid = PeriodicGrid(o["n"], o["length"])
    scfg = SolverConfig(grid=grid, dt=o["dt"], t_end=o["t_end"], ec=ec,
                        dealias=not o["no_dealias"], record_every=o["record_every"],
                        tolerance=o["tolerance"])
    eta0 = _initial_field(cfg, grid)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        traj = solve(scfg, eta0)
    drift = traj.relative_drift("E")
    X = [math.nan] * len(traj.times)
    info = {
        "n_records": len(traj.times),
        "relative_drift_E": drift,
        "relative_drift_Theta": traj.relative_drift("Theta"),
        "mean_drift": float(np.max(np.abs(traj.column("mean") - traj.column("mean")[0]))),
        "hamiltonian": ec.is_hamiltonian,
    }
    est = local_existence_estimate(eta0, o["s"])
    info["existence_time"] = {"T_bar": est.T_bar, "r": est.r, "C_s": est.C_s, "s": est.s,
                              "max_norm": max(sobolev_norm(s, o["s"]) for s in traj.snapshots)}
    if o["split_epsilon"] is not None:
        sc = SplitConfig(o["split_epsilon"], o["cutoff"], o["s"])
        tv, tw = solve_split(scfg, eta0, sc)
        X = list(tw.column("X"))
        info["split_max_l2_difference"] = max(
            math.sqrt(grid.dx) * float(np.linalg.norm(v.values + w.values - d.values))
            for v, w, d in zip(tv.snapshots, tw.snapshots, traj.snapshots))

    alarm = drift > o["tolerance"]
    info["alarm"] = alarm
    rows = [(r.t, r.E, r.Theta, r.mean, r.energy_rate_residual, x)
            for r, x in zip(traj.invariants, X)]
    results = {
        "invariants.csv": (("t", "E", "Theta", "mean", "energy_rate_residual", "X"), rows),
        "summary": _summary(cfg, info),
    }
    if o["snapshots"]:
        for t, snap in zip(traj.times, traj.snapshots):
            results[f"snapshot_{t:.6f}.csv"] = (("x", "eta"), list(zip(grid.x, snap.values)))
    emit_outputs(results, _out_dir(cfg))
    if alarm:
        print(f"hokdv: alarm: relative drift of E is {drift:.3e} "
              f"(tolerance {o['tolerance']:.3e})", file=sys.stderr)
        return EXIT_ALARM
    return EXIT_OK


def scan_delta1(cfg):
    """delta1 on the (lambda, mu) grid; returns (lam, mu, delta1) flattened row-major."""
    o, p = cfg.options, cfg.params
    lam = np.linspace(o["lambda_min"], o["lambda_max"], o["resolution"])
    mu = np.linspace(o["mu_min"], o["mu_max"], o["resolution"])
    L, M = np.meshgrid(lam, mu, indexing="ij")
    grid_p = ModelParameters(p.theta, L, M, p.lam1, p.mu1, p.rho)
    if o["hamiltonian_rho"]:
        grid_p = grid_p.replace(rho=hamiltonian_rho(grid_p))
    d1 = equation_coefficients(grid_p.theta_sq, L, M, p.lam1, p.mu1, grid_p.rho)[2]
    d1 = np.broadcast_to(np.asarray(d1, dtype=float), L.shape)
    return L.ravel(), M.ravel(), d1.ravel()


def _run_scan(cfg):
    lam, mu, d1 = scan_delta1(cfg)
    sign = np.sign(d1)
    rows = list(zip(lam, mu, d1, sign))
    info = {"points": int(lam.size), "positive": int(np.sum(sign > 0)),
            "negative": int(np.sum(sign < 0))}
    emit_outputs({"scan.csv": (("lambda", "mu", "delta1", "sign"), rows),
                  "summary": _summary(cfg, info)}, _out_dir(cfg))
    return EXIT_OK


def read_snapshot(path):
    """(grid, field) from an ``x,eta`` CSV sampled at x_j = j L / n."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != 2 or data.shape[0] < 4:
        raise ValueError(f"{path}: expected at least 4 rows of x,eta")
    x, eta = data[:, 0], data[:, 1]
    dx = x[1] - x[0]
    if x[0] != 0.0 or not np.allclose(np.diff(x), dx, rtol=1e-9, atol=0.0):
        raise ValueError(f"{path}: x must be uniform and start at 0")
    grid = PeriodicGrid(len(x), len(x) * dx)
    return grid, WaveField(grid, eta)


def _run_velocity(cfg):
    o = cfg.options
    if o["snapshot"] is None:
        raise UsageError("velocity needs --snapshot FILE (columns x,eta)")
    grid, eta = read_snapshot(o["snapshot"])
    ec = _coefficients(cfg)
    w = velocity_ansatz(eta, ec, cfg.params, terms=o["terms"])
    info = {"n": grid.n, "length": grid.length, "max_abs_w": float(np.max(np.abs(w.values)))}
    emit_outputs({"velocity.csv": (("x", "w"), list(zip(grid.x, w.values))),
                  "summary": _summary(cfg, info)}, _out_dir(cfg))
    return EXIT_OK


def _out_dir(cfg):
    return cfg.output_dir if cfg.output_dir is not None else Path(".")


_DISPATCH = {
    "coeffs": _run_coeffs,
    "dispersion": _run_dispersion,
    "simulate": _run_simulate,
    "scan": _run_scan,
    "velocity": _run_velocity,
}


def run_subcommand(cfg: RunConfig) -> int:
    return _DISPATCH[cfg.subcommand](cfg)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        return run_subcommand(parse_config(argv))
    except UsageError as exc:
        print(f"hokdv: usage error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ArithmeticError, ValueError, RuntimeError, OSError) as exc:
        print(f"hokdv: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
