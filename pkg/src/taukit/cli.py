"""Batch entry point: verification suites and tau/coordinate tables.

Jobs are described by a TOML or JSON config file:

    kind = "pi-tau"            # bps-tau | conifold | periods | fg | pi-tau | verify
    [params]
    a0 = [0.0, 0.0]
    q0 = [0.0, 0.0]
    p0 = [1.0, 0.0]
    epsilon = [0.5, 0.0]
    a_span = 1.0
    samples = 201

Complex scalars are [re, im] pairs (bare numbers are accepted as reals).
Outputs: a CSV table per job plus a JSON report with per-check residuals.
Exit codes: 0 pass, 1 check failure, 2 config error, 3 numerical abort.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import bps, elliptic, oscillator, painleve1, verify
from .errors import ConfigError, MovablePoleEncountered, TaukitError
from .forms import PotentialChoice, polyline

EXIT_PASS = 0
EXIT_CHECK_FAILURE = 1
EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_ABORT = 3

JOB_KINDS = ("bps-tau", "conifold", "periods", "fg", "pi-tau", "verify")


def _load_config(path: Path) -> dict:
    text = path.read_text()
    if path.suffix.lower() == ".json":
        return json.loads(text)
    try:
        import tomllib  # Python >= 3.11
    except ModuleNotFoundError:
        import tomli as tomllib
    try:
        return tomllib.loads(text)
    except Exception as exc:
        # a JSON config without the .json suffix is accepted equivalently
        try:
            return json.loads(text)
        except Exception:
            raise ConfigError(f"config is neither TOML nor JSON: {exc}") from exc


def _complex(value, name: str) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise ConfigError(f"{name} must be a number or an [re, im] pair")


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def _write_csv(path: Path, header: list[str], rows: list[list[float]]) -> None:
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _complex_columns(name: str) -> list[str]:
    return [f"{name}_re", f"{name}_im"]


def _require(params: dict, *names):
    for name in names:
        if name not in params:
            raise ConfigError(f"missing parameter {name!r}")


def _pmap(func, items, jobs: int):
    if jobs <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, items))


# --------------------------------------------------------------------------
# job implementations
# --------------------------------------------------------------------------


def _structure_from(params: dict) -> bps.UncoupledBpsStructure:
    spec = params.get("structure", "fixture:bps_d1_minimal")
    if isinstance(spec, str):
        if spec.startswith("fixture:"):
            return bps.load_fixture(spec.split(":", 1)[1])
        path = Path(spec)
        if not path.exists():
            raise ConfigError(f"structure file {spec!r} does not exist")
        return bps.UncoupledBpsStructure.from_json(path.read_text())
    if isinstance(spec, dict):
        return bps.UncoupledBpsStructure.from_dict(spec)
    raise ConfigError("structure must be 'fixture:<name>', a file path, or an inline table")


def run_bps_tau(params: dict, out: Path, report: dict) -> int:
    _require(params, "epsilon", "path")
    structure = _structure_from(params)
    epsilon = _complex(params["epsilon"], "epsilon")
    raw_path = params["path"]
    if len(raw_path) < 2:
        raise ConfigError("path needs at least two z-points")
    vertices = [
        tuple(_complex(coord, "path entry") for coord in vertex) for vertex in raw_path
    ]
    choice_cfg = params.get("choice", {})
    choice = PotentialChoice(
        choice_cfg.get("theta0", "hamiltonian"),
        choice_cfg.get("theta1", "polarized"),
        choice_cfg.get("thetaI", "standard"),
    )
    chart = bps.bps_chart_id(structure)
    header = []
    for i in range(structure.rank):
        header += _complex_columns(f"z{i + 1}")
    header += _complex_columns("logtau") + ["residual_closedness"]
    rows = []
    total = 0.0 + 0.0j
    worst = 0.0
    for start, end in zip(vertices, vertices[1:]):
        rep = bps.log_tau(structure, polyline(chart, [start, end]), epsilon, choice)
        if not rows:
            row = []
            for z in start:
                row += [z.real, z.imag]
            rows.append(row + [0.0, 0.0, rep.closedness_samples[0]])
        total += rep.log_tau
        worst = max(worst, max(rep.closedness_samples))
        row = []
        for z in end:
            row += [z.real, z.imag]
        rows.append(row + [total.real, total.imag, rep.closedness_samples[-1]])
    _write_csv(out / "bps_tau.csv", header, rows)
    report["log_tau"] = [total.real, total.imag]
    report["max_closedness_residual"] = worst
    return EXIT_PASS


def run_conifold(params: dict, out: Path, report: dict) -> int:
    _require(params, "epsilon", "z_start", "z_end")
    n_levels = int(params.get("n", 5))
    pairing = int(params.get("pairing_c", 1))
    epsilon = _complex(params["epsilon"], "epsilon")
    z_start = tuple(_complex(v, "z_start") for v in params["z_start"])
    z_end = tuple(_complex(v, "z_end") for v in params["z_end"])
    header = ["n_levels"] + _complex_columns("logtau") + ["residual_stability"]
    rows = []
    values = {}
    for n in (n_levels, n_levels + 5):
        structure = bps.conifold_truncation(n, pairing)
        chart = bps.bps_chart_id(structure)
        rep = bps.log_tau(structure, polyline(chart, [z_start, z_end]), epsilon)
        values[n] = rep.log_tau
    stability = abs(values[n_levels] - values[n_levels + 5])
    for n in sorted(values):
        rows.append([float(n), values[n].real, values[n].imag, stability])
    _write_csv(out / "conifold.csv", header, rows)
    report["stability_residual"] = stability
    return EXIT_PASS


def _periods_row(entry):
    a, b, fiber_raw = entry
    curve = elliptic.CurvePoint(a, b)
    basis = elliptic.default_cycle_basis(curve)
    z = elliptic.periods(curve, basis)
    det = np.linalg.det(elliptic.period_jacobian(curve, basis))
    residual = abs(det + 2j * np.pi)
    row = [a.real, a.imag, b.real, b.imag, z[0].real, z[0].imag, z[1].real, z[1].imag]
    if fiber_raw is not None:
        q, p, r = fiber_raw
        th = elliptic.theta_coords(curve, elliptic.FiberPoint(q, p, r), basis).values
        row += [th[0].real, th[0].imag, th[1].real, th[1].imag]
    return row + [residual]


def run_periods(params: dict, out: Path, report: dict, jobs: int) -> int:
    _require(params, "points")
    fiber_raw = None
    if "q" in params:
        _require(params, "p")
        fiber_raw = (
            _complex(params["q"], "q"),
            _complex(params["p"], "p"),
            _complex(params.get("r", 0.0), "r"),
        )
    entries = []
    for item in params["points"]:
        if len(item) == 4:
            entries.append((complex(item[0], item[1]), complex(item[2], item[3]), fiber_raw))
        elif len(item) == 2:
            entries.append((_complex(item[0], "a"), _complex(item[1], "b"), fiber_raw))
        else:
            raise ConfigError("each periods point must be [a_re, a_im, b_re, b_im]")
    rows = _pmap(_periods_row, entries, jobs)
    header = (
        _complex_columns("a") + _complex_columns("b")
        + _complex_columns("z1") + _complex_columns("z2")
    )
    if fiber_raw is not None:
        header += _complex_columns("theta1") + _complex_columns("theta2")
    header += ["residual_det"]
    _write_csv(out / "periods.csv", header, rows)
    report["max_det_residual"] = max(row[-1] for row in rows)
    return EXIT_PASS


def run_fg(params: dict, out: Path, report: dict) -> int:
    _require(params, "a", "b", "q", "p", "epsilons")
    a = _complex(params["a"], "a")
    b = _complex(params["b"], "b")
    q = _complex(params["q"], "q")
    p = _complex(params["p"], "p")
    r = _complex(params.get("r", 0.0), "r")
    rtol = float(params.get("rtol", 1e-10))
    header = _complex_columns("epsilon") + _complex_columns("x1") + _complex_columns("x2")
    rows = []
    prev = None
    for eps_raw in params["epsilons"]:
        eps = _complex(eps_raw, "epsilon")
        pot = oscillator.OscillatorPotential(a, b, q, p, r, eps)
        x1, x2 = oscillator.fg_coordinates(pot, rtol=rtol, prev=prev)
        prev = (x1, x2)
        rows.append([eps.real, eps.imag, x1.real, x1.imag, x2.real, x2.imag])
    _write_csv(out / "fg.csv", header, rows)
    report["points"] = len(rows)
    return EXIT_PASS


def run_pi_tau(params: dict, out: Path, report: dict) -> int:
    _require(params, "a0", "q0", "p0", "epsilon")
    a0 = _complex(params["a0"], "a0")
    q0 = _complex(params["q0"], "q0")
    p0 = _complex(params["p0"], "p0")
    epsilon = _complex(params["epsilon"], "epsilon")
    span = float(params.get("a_span", 1.0))
    samples = int(params.get("samples", 201))
    if samples < 7:
        raise ConfigError("samples must be at least 7")
    grid = a0 + np.linspace(0.0, span, samples)
    pole_location = None
    try:
        traj = painleve1.hamiltonian_leaf_flow((a0, q0, p0), epsilon, grid)
    except MovablePoleEncountered as exc:
        pole_location = exc.location
        # truncate the grid safely before the reported pole and retry
        keep = grid[np.abs(grid - a0) < 0.8 * abs(complex(pole_location) - a0)]
        if len(keep) < 7:
            raise
        traj = painleve1.hamiltonian_leaf_flow((a0, q0, p0), epsilon, keep)
    sigma = painleve1.sigma_form_residuals(traj)
    pad = np.full(2, np.nan)
    sigma_col = np.concatenate([pad, np.abs(sigma), pad]) if sigma.size else np.full(len(traj.a), np.nan)
    header = (
        _complex_columns("a") + _complex_columns("q") + _complex_columns("p")
        + _complex_columns("H") + _complex_columns("logtau")
        + ["residual_constraint", "residual_sigma"]
    )
    rows = []
    hamiltonian = 2.0 * traj.b  # sigma = H = 2b under the time dictionary
    drift = np.abs(traj.b_ode - traj.b)
    for i in range(len(traj.a)):
        rows.append(
            [
                traj.a[i].real, traj.a[i].imag,
                traj.q[i].real, traj.q[i].imag,
                traj.p[i].real, traj.p[i].imag,
                hamiltonian[i].real, hamiltonian[i].imag,
                traj.log_tau[i].real, traj.log_tau[i].imag,
                drift[i],
                sigma_col[i],
            ]
        )
    _write_csv(out / "pi_tau.csv", header, rows)
    report["samples"] = len(rows)
    report["constraint_drift"] = float(np.max(drift))
    if sigma.size:
        report["sigma_form_residual"] = float(np.max(np.abs(sigma)))
    if pole_location is not None:
        report["movable_pole_near"] = [
            complex(pole_location).real,
            complex(pole_location).imag,
        ]
    return EXIT_PASS


def run_verify(params: dict, out: Path, report: dict, seed: int, tol_scale: float) -> int:
    wanted = params.get("checks", "all")
    check_ids = None if wanted in ("all", ["all"]) else list(wanted)
    results = verify.run_checks(check_ids, seed=seed, tol_scale=tol_scale)
    report["checks"] = [r.to_dict() for r in results]
    rows = []
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.check_id}: "
              f"max residual {r.max_residual:.3e} (threshold {r.threshold:g})")
        rows.append([r.check_id, _fmt(r.max_residual), _fmt(r.threshold), str(r.passed)])
    with (out / "verify.csv").open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["check_id", "max_residual", "threshold", "passed"])
        writer.writerows(rows)
    return EXIT_PASS if all(r.passed for r in results) else EXIT_CHECK_FAILURE


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------


def run_job(config: dict, out: Path, seed: int, tol_scale: float, jobs: int) -> int:
    kind = config.get("kind")
    if kind not in JOB_KINDS:
        raise ConfigError(f"kind must be one of {JOB_KINDS}, got {kind!r}")
    params = config.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("params must be a table")
    out.mkdir(parents=True, exist_ok=True)
    report: dict = {"kind": kind, "seed": seed, "tol_scale": tol_scale}
    if kind == "verify":
        status = run_verify(params, out, report, seed, tol_scale)
    elif kind == "bps-tau":
        status = run_bps_tau(params, out, report)
    elif kind == "conifold":
        status = run_conifold(params, out, report)
    elif kind == "periods":
        status = run_periods(params, out, report, jobs)
    elif kind == "fg":
        status = run_fg(params, out, report)
    else:
        status = run_pi_tau(params, out, report)
    report["status"] = "pass" if status == EXIT_PASS else "fail"
    (out / "report.json").write_text(json.dumps(report, indent=1, sort_keys=True) + "\n")
    return status


def emit_manifest() -> str:
    """JSON description of every verification check (id, module, threshold)."""
    return json.dumps({"checks": verify.manifest()}, indent=1, sort_keys=True)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="taukit", description="tau-function verification suites and tables"
    )
    parser.add_argument("--config", type=Path, help="job config (TOML or JSON)")
    parser.add_argument("--out", type=Path, default=Path("taukit-out"))
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--tol-scale", type=float, default=1.0)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument(
        "--manifest", action="store_true", help="print the check manifest and exit"
    )
    args = parser.parse_args(argv)

    if args.manifest:
        print(emit_manifest())
        return EXIT_PASS
    if args.config is None:
        parser.print_usage(sys.stderr)
        _write_error(args.out, "ConfigError", "no config given")
        return EXIT_CONFIG_ERROR
    try:
        config = _load_config(args.config)
        return run_job(config, args.out, args.seed, args.tol_scale, args.jobs)
    except (ConfigError, FileNotFoundError, KeyError, TypeError, ValueError) as exc:
        _write_error(args.out, "ConfigError", str(exc))
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except TaukitError as exc:
        _write_error(args.out, type(exc).__name__, str(exc))
        print(f"numerical abort: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL_ABORT


def _write_error(out: Path, kind: str, message: str) -> None:
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(
            json.dumps({"error": {"kind": kind, "message": message}}, sort_keys=True) + "\n"
        )
    except OSError:
        pass


if __name__ == "__main__":
    sys.exit(main())
