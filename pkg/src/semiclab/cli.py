"""Batch command-line front end.

Each subcommand runs one experiment, writes a CSV or JSON data artifact
plus a JSON manifest (``<out>.manifest.json``), and exits 0 on success,
1 on a computation failure, 2 on an invalid configuration. Identical
configurations produce byte-identical data artifacts; wall-clock numbers
live only in the manifest's ``timing`` section.
"""

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import __version__, channels, gutzwiller, modelio, report, trajectory, wkb
from .errors import ParseError, SemiclabError, ValidationError

__all__ = ["RunConfig", "RunManifest", "run", "main", "format_csv"]

_NUM = "{:.12g}"


class _ConfigError(Exception):
    """Invalid command configuration; maps to exit code 2."""


def _fmt_cell(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return _NUM.format(float(v))
    return str(v)


def format_csv(columns: List[str], rows: List[list]) -> str:
    """Render rows with the fixed 12-significant-digit numeric format."""
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def format_json(columns: List[str], rows: List[list]) -> str:
    payload = {"columns": columns,
               "rows": [[_fmt_cell(v) for v in row] for row in rows]}
    return json.dumps(payload, indent=2) + "\n"


@dataclass
class RunConfig:
    """One fully resolved batch invocation."""

    command: str
    parameters: dict
    output_path: Path
    format: str = "csv"  # csv | json

    def __post_init__(self):
        if self.format not in ("csv", "json"):
            raise _ConfigError(f"unknown format {self.format!r} (expected csv or json)")


@dataclass
class RunManifest:
    """Provenance record written next to every data artifact."""

    command: str
    config: dict
    version: str
    format: str
    artifact: str
    tolerances: dict
    rows: List[dict] = field(default_factory=list)
    timing: dict = field(default_factory=dict)

    def to_json(self) -> str:
        payload = {
            "command": self.command,
            "config": self.config,
            "version": self.version,
            "format": self.format,
            "artifact": self.artifact,
            "tolerances": self.tolerances,
            "rows": self.rows,
            # wall-clock data is isolated here; everything above is
            # deterministic for identical configs
            "timing": self.timing,
        }
        return json.dumps(payload, indent=2) + "\n"


def _positive(value: float, name: str) -> float:
    if not value > 0:
        raise _ConfigError(f"{name} must be > 0 (got {value:g})")
    return value


# --------------------------------------------------------------------------
# command runners: return (columns, rows, row_status, tolerances)
# --------------------------------------------------------------------------


def _run_table1(p):
    gs = p["g"] or sorted(report.TABLE1)
    for g in gs:
        _positive(g, "coupling g")
    _positive(p["sampling"], "sampling")
    sweep = trajectory.table1_sweep(
        gs,
        correction_order=p["order"],
        sampling=p["sampling"],
        energy_tolerance=p["tol"],
    )
    if sweep.failures:
        raise SemiclabError(
            "table1 sweep had failures: "
            + "; ".join(f"g={g:g}: {m}" for g, m in sweep.failures)
        )
    rows = [[r.g, r.tau, r.t_c, r.ratio] for r in sweep.reports]
    status = [{"id": f"g={r.g:g}", "status": "ok"} for r in sweep.reports]
    return ["g", "tau", "t_c", "ratio"], rows, status, {
        "energy_tolerance": p["tol"], "correction_order": p["order"]}


def _run_fig1(p):
    g = _positive(p["g"], "coupling g")
    t_max = _positive(p["tmax"], "tmax")
    sampling = _positive(p["sampling"], "sampling")
    system = trajectory.cubic_system(g, correction_order=p["order"])
    # monitor mode: the qualitative long trace may pass near a pole of the
    # flow where energy cannot be tracked in double precision
    traj = trajectory.run_trajectory(
        system, t_max=t_max, sampling=sampling, energy_tolerance=p["tol"],
        drift_policy="monitor")
    rows = [[r.t, r.x.real, r.x.imag, r.p.real, r.p.imag] for r in traj]
    cap = p["tol"] * max(1.0, abs(system.energy))
    exceeded = next((r.t for r in traj
                     if abs(system.hamiltonian(r.x, r.p) - system.energy) > cap),
                    None)
    note = ("ok ({} records; energy tracked within tolerance)".format(len(rows))
            if exceeded is None else
            "ok ({} records; drift tolerance first exceeded at t={:.6g}; "
            "records beyond are qualitative)".format(len(rows), exceeded))
    return ["t", "re_x", "im_x", "re_p", "im_p"], rows, [
        {"id": "trajectory", "status": note}
    ], {"energy_tolerance": p["tol"], "correction_order": p["order"]}


def _run_wkb(p):
    n_max = p["n_max"]
    if n_max < 0:
        raise _ConfigError("n-max must be >= 0")
    rows = []
    status = []
    V = wkb.harmonic_potential()
    half = wkb.bohr_sommerfeld_levels(
        V, wkb.QuantizationSpec(0.25, 0.25, n_range=(0, n_max)), x_range=(-14.0, 14.0))
    ints = wkb.bohr_sommerfeld_levels(
        V, wkb.QuantizationSpec(0.0, 0.0, n_range=(1, n_max + 1)), x_range=(-14.0, 14.0))
    for n in range(n_max + 1):
        exact = n + 0.5
        rows.append(["harmonic_half_phase", float(n), half[n], exact,
                     abs(half[n] - exact)])
    for n in range(1, n_max + 2):
        rows.append(["harmonic_integer_phase", float(n), ints[n - 1], float(n),
                     abs(ints[n - 1] - n)])
    status.append({"id": "harmonic levels", "status": "ok"})
    for g in p["barrier_g"]:
        _positive(g, "barrier g")
        val = wkb.barrier_exponent(g)
        exact = 2.0 / (15.0 * g * g)
        rows.append(["barrier_exponent", g, val, exact, abs(val - exact)])
    status.append({"id": "barrier exponents", "status": "ok"})
    return ["check", "parameter", "measured", "expected", "abs_error"], rows, status, {
        "quadrature_rel_tol": 1e-11}


def _run_operators(p):
    from .operators import (GridFunction, RadialGrid, SphericalGrid,
                            apply_radial_momentum, hermiticity_residual,
                            hydrogen_radial_levels, kinetic_discrepancy)

    n = p["grid"]
    if n < 32:
        raise _ConfigError("grid must be >= 32")
    rows = []
    grid = SphericalGrid.offset(n, n, r_max=10.0)
    for name, fn in zip(("gaussian_bump", "r2_exp_decay"), report._probe_functions()):
        f = GridFunction.sample(fn, grid)
        d = kinetic_discrepancy(f)
        rows.append(["kinetic_discrepancy_max_rel_err", name, d.max_rel_error,
                     0.0, d.max_rel_error])
    for ri, expected in ((1.0, 0.25), (2.0, 0.0625)):
        # spurious multiplier at theta = pi/2 equals 1/(4 r^2) for hbar=m=1
        val = -0.5 * (math.cos(math.pi / 2.0) ** 2 - 2.0) / (
            4.0 * ri**2 * math.sin(math.pi / 2.0) ** 2)
        rows.append(["multiplier_probe_theta_pi_2", ri, val, expected,
                     abs(val - expected)])
    for nn in (200, 400):
        rg = RadialGrid.offset(nn, 12.0)
        f = GridFunction.sample(lambda r: (1.0 + 0.2j) * math.exp(-((r - 5.0) ** 2)), rg)
        g2 = GridFunction.sample(lambda r: math.exp(-0.8 * (r - 6.0) ** 2), rg)
        res_d = hermiticity_residual(lambda u: apply_radial_momentum(u), f, g2)
        res_e = hermiticity_residual(
            lambda u: apply_radial_momentum(u, form="expanded"), f, g2)
        res_n = hermiticity_residual(
            lambda u: apply_radial_momentum(u, form="naive"), f, g2)
        rows.append(["hermiticity_dressed", float(nn), res_d, 0.0, res_d])
        rows.append(["hermiticity_expanded", float(nn), res_e, 0.0, res_e])
        rows.append(["hermiticity_naive", float(nn), res_n, 0.0, res_n])
    levels = hydrogen_radial_levels(3)
    for i, E in enumerate(levels, start=1):
        exact = -0.5 / i**2
        rows.append(["hydrogen_level", float(i), float(E), exact, abs(E - exact)])
    return ["check", "parameter", "measured", "expected", "abs_error"], rows, [
        {"id": "operator checks", "status": "ok"}
    ], {"stencil_order": 4}


def _run_channels(p):
    if p["config"] is not None:
        model = modelio.load_model(p["config"])
        if not isinstance(model, channels.ChannelSystem):
            raise _ConfigError(
                f"{p['config']}: channels command needs a channel model, "
                f"got {type(model).__name__}")
    else:
        model = channels.landau_zener_system()
    energies = p["energies"] or list(report.EMERGENCE_ENERGIES)
    for E in energies:
        _positive(E, "energy")
    rows_out = channels.emergence_of_time_sweep(model, energies)
    bad = [r for r in rows_out if r.error]
    if bad:
        raise SemiclabError("; ".join(f"E={r.energy:g}: {r.error}" for r in bad))
    rows = [[r.energy, r.p_stationary, r.p_timedependent, r.discrepancy]
            for r in rows_out]
    status = [{"id": f"E={r.energy:g}", "status": "ok"} for r in rows_out]
    return ["energy", "p_stationary", "p_timedependent", "discrepancy"], rows, status, {
        "solver_rtol": 1e-11}


def _run_poles(p):
    if p["k_max"] < 0 or p["s_max"] < 0:
        raise _ConfigError("k-max and s-max must be >= 0")
    orbit = gutzwiller.linear_orbit(slope=p["slope"], offset=p["offset"], w=p["w"])
    rows = []
    for k in range(p["k_max"] + 1):
        for s in range(p["s_max"] + 1):
            idx = gutzwiller.PoleIndex(k, s)
            guess = gutzwiller.closed_form_pole(
                "linear", idx, slope=p["slope"], offset=p["offset"], w=p["w"])
            pole = gutzwiller.find_pole(orbit, idx, guess + (0.2 + 0.1j))
            res = abs(gutzwiller.pole_condition_residual(orbit, pole, idx))
            rows.append([k, s, pole.real, pole.imag, res])
    return ["k", "s", "re_E", "im_E", "residual"], rows, [
        {"id": f"(k,s)=({r[0]},{r[1]})", "status": "ok"} for r in rows
    ], {"pole_tolerance": 1e-10}


def _run_report(p):
    results = report.run_all()
    doc = report.render_report(results)
    status = [
        {"id": f"criterion {r.cid}", "status": "pass" if r.passed else "FAIL"}
        for r in results
    ]
    tolerances = {"report": "per-criterion tolerances pinned in semiclab.report"}
    return doc, status, tolerances, all(r.passed for r in results)


_RUNNERS = {
    "table1": _run_table1,
    "fig1": _run_fig1,
    "wkb": _run_wkb,
    "operators": _run_operators,
    "channels": _run_channels,
    "poles": _run_poles,
}

_DEFAULT_OUT = {
    "table1": "table1.csv",
    "fig1": "fig1.csv",
    "wkb": "wkb.csv",
    "operators": "operators.csv",
    "channels": "channels.csv",
    "poles": "poles.csv",
    "report": "report.txt",
}


def run(config: RunConfig) -> int:
    """Execute one command; write the data artifact and its manifest."""
    started = datetime.now(timezone.utc).isoformat()
    t0 = time.perf_counter()
    out = Path(config.output_path)

    if config.command == "report":
        doc, status, tolerances, passed = _run_report(config.parameters)
        out.write_text(doc, encoding="utf-8")
        sys.stdout.write(doc)
        manifest = RunManifest(
            command="report",
            config=_public_params(config),
            version=__version__,
            format="txt",
            artifact=str(out),
            tolerances=tolerances,
            rows=status,
            timing={"started_utc": started,
                    "duration_s": time.perf_counter() - t0},
        )
        Path(str(out) + ".manifest.json").write_text(manifest.to_json(), encoding="utf-8")
        return 0 if passed else 1

    columns, rows, status, tolerances = _RUNNERS[config.command](config.parameters)
    text = (format_csv(columns, rows) if config.format == "csv"
            else format_json(columns, rows))
    out.write_text(text, encoding="utf-8")
    manifest = RunManifest(
        command=config.command,
        config=_public_params(config),
        version=__version__,
        format=config.format,
        artifact=str(out),
        tolerances=tolerances,
        rows=status,
        timing={"started_utc": started, "duration_s": time.perf_counter() - t0},
    )
    Path(str(out) + ".manifest.json").write_text(manifest.to_json(), encoding="utf-8")
    return 0


def _public_params(config: RunConfig) -> dict:
    clean = {}
    for k, v in sorted(config.parameters.items()):
        if isinstance(v, Path):
            v = str(v)
        clean[k] = v
    return {"command": config.command, "parameters": clean,
            "output": str(config.output_path), "format": config.format}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semiclab",
        description="Batch experiments: tunneling trajectories, WKB, operator "
                    "checks, coupled channels, periodic-orbit poles.",
    )
    parser.add_argument("--version", action="version", version=f"semiclab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", type=Path, default=None,
                        help="output artifact path (default: <command>.csv)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--tol", type=float, default=None,
                        help="main tolerance of the command (see docs)")

    sp = sub.add_parser("table1", help="escape time vs lifetime sweep")
    common(sp)
    sp.add_argument("--g", type=float, action="append", default=None,
                    help="coupling (repeatable; default: the four reference values)")
    sp.add_argument("--order", type=int, choices=(0, 2), default=2,
                    help="real-part correction order of the resonance energy")
    sp.add_argument("--sampling", type=float, default=0.1)

    sp = sub.add_parser("fig1", help="complex trajectory trace")
    common(sp)
    sp.add_argument("--g", type=float, default=2.0 / math.sqrt(125.0))
    sp.add_argument("--tmax", type=float, default=200.0)
    sp.add_argument("--sampling", type=float, default=0.05)
    sp.add_argument("--order", type=int, choices=(0, 2), default=2)

    sp = sub.add_parser("wkb", help="quantization-phase demo and barrier exponent")
    common(sp)
    sp.add_argument("--n-max", type=int, default=4)
    sp.add_argument("--barrier-g", type=float, action="append",
                    default=None, help="couplings for the barrier-exponent identity")

    sp = sub.add_parser("operators", help="operator-identity and Hermiticity checks")
    common(sp)
    sp.add_argument("--grid", type=int, default=200, help="grid points per axis")

    sp = sub.add_parser("channels", help="stationary vs time-dependent sweep")
    common(sp)
    sp.add_argument("--config", type=Path, default=None,
                    help="channel model file (default: bundled avoided crossing)")
    sp.add_argument("--energies", type=float, nargs="+", default=None)

    sp = sub.add_parser("poles", help="periodic-orbit pole grid")
    common(sp)
    sp.add_argument("--k-max", type=int, default=2)
    sp.add_argument("--s-max", type=int, default=2)
    sp.add_argument("--slope", type=float, default=1.0)
    sp.add_argument("--offset", type=float, default=0.0)
    sp.add_argument("--w", type=float, default=2.0)

    sp = sub.add_parser("report", help="run the full verification suite")
    common(sp)
    return parser


def _config_from_args(args) -> RunConfig:
    params = {k: v for k, v in vars(args).items()
              if k not in ("command", "out", "format")}
    defaults = {
        "table1": {"tol": 1e-8, "barrier_g": None},
        "fig1": {"tol": 1e-8},
        "wkb": {"barrier_g": [0.05, 0.1, 0.2]},
        "operators": {},
        "channels": {},
        "poles": {},
        "report": {},
    }
    for key, val in defaults.get(args.command, {}).items():
        if params.get(key) is None:
            params[key] = val
    if args.command in ("table1", "fig1") and params["tol"] is not None:
        _check_tol(params["tol"])
    out = args.out if args.out is not None else Path(_DEFAULT_OUT[args.command])
    return RunConfig(command=args.command, parameters=params,
                     output_path=out, format=args.format)


def _check_tol(tol):
    if not tol > 0:
        raise _ConfigError(f"--tol must be > 0 (got {tol:g})")


def main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 2
    try:
        config = _config_from_args(args)
        return run(config)
    except (_ConfigError, ParseError, ValidationError) as exc:
        print(f"semiclab: configuration error: {exc}", file=sys.stderr)
        return 2
    except SemiclabError as exc:
        print(f"semiclab: computation failed: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        print(f"semiclab: internal error: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
