"""Command-line front end: config ingestion, subcommand dispatch and export.

Exit status: 0 ok, 1 a verification report failed, 2 usage error,
3 malformed or invalid config, 4 missing input file, 5 numerical failure.

Config files are JSON with the sections below; every key is optional and
unknown keys are rejected. Flags override file values. Each run writes
``manifest.json`` holding the subcommand and the fully resolved config;
``lorentzwire <cmd> --config manifest.json`` reproduces the outputs.

    {
      "params":     {"I0": 1, "L": 1, "pz": 1, "T1": 7, "k": 0, "mu0": 6.283...},
      "field":      {"kind": "harmonic", "profile": "bessel", "cosine": false,
                     "value": 1.0, "waveform_csv": null, "max_harmonics": null},
      "tolerances": {"integration": 1e-11, "map": 1e-13, "quadrature": 1e-12, "verify": 1e-9},
      "output":     {"dir": "out", "format": "csv"},
      "run":        {"n": 1, "nmax": 4, "hmax": null, "points": 40, ...}
    }
"""
from __future__ import annotations

import argparse
import copy
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, integrator, melnikov, orbitfinder, periodmap, potential, verify
from .field import FieldModel
from .io import write_csv, write_json
from .model import PhysParams, RadialState, equilibrium, reconstruct_full_motion

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_MISSING = 4
EXIT_NUMERIC = 5

TOL_RANGE = (1e-13, 1e-3)
COMMANDS = ("equilibrium", "period-map", "potential", "melnikov", "find-orbits", "simulate", "verify")

DEFAULTS = {
    "params": {"I0": 1.0, "L": 1.0, "pz": 1.0, "T1": 7.0, "k": 0.0, "mu0": 2.0 * math.pi},
    "field": {"kind": "harmonic", "profile": "bessel", "cosine": False, "value": 1.0,
              "waveform_csv": None, "max_harmonics": None},
    "tolerances": {"integration": 1e-11, "map": 1e-13, "quadrature": 1e-12, "verify": 1e-9},
    "output": {"dir": "out", "format": "csv"},
    "run": {
        "n": 1, "nmax": 4, "hmax": None, "points": 40, "s_min": None,
        "k_orbits": 1e-3, "annulus": None,
        "t": [0.0], "r": [0.5, 1.0, 2.0, 4.0, 8.0],
        "H": 2.0, "r0": None, "pr0": 0.0, "t_end": None, "samples": 1001, "reconstruct": False,
    },
}
_META = ("command", "version", "outputs")


class ConfigError(ValueError):
    pass


class MissingFile(FileNotFoundError):
    pass


_NUMERIC_ERRORS = (integrator.IntegrationError, periodmap.QuadratureError, periodmap.MonotonicityError,
                   orbitfinder.NewtonError, potential.ConvergenceError, melnikov.NoResonance,
                   ArithmeticError, np.linalg.LinAlgError, RuntimeError)


# --- config --------------------------------------------------------------------

def _merge(base, over, where):
    for key, val in over.items():
        if key not in base:
            raise ConfigError(f"unknown config key {where}{key!r}")
        if isinstance(base[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(f"config section {where}{key!r} must be an object")
            _merge(base[key], val, f"{where}{key}.")
        else:
            base[key] = val


def load_config(path) -> dict:
    """Defaults overlaid with the JSON file at ``path`` (manifest keys are ignored)."""
    cfg = copy.deepcopy(DEFAULTS)
    if path is None:
        return cfg
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    raw = {k: v for k, v in raw.items() if k not in _META}
    _merge(cfg, raw, "")
    return cfg


def _number(v, name):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{name} must be a finite number, got {v!r}")
    return float(v)


def _integer(v, name, lo=1):
    if isinstance(v, bool) or not isinstance(v, int) or v < lo:
        raise ConfigError(f"{name} must be an integer >= {lo}, got {v!r}")
    return v


def apply_flags(cfg: dict, args) -> dict:
    for flag in ("n", "nmax", "hmax", "points"):
        v = getattr(args, flag, None)
        if v is not None:
            cfg["run"][flag] = v
    if getattr(args, "k", None) is not None:
        cfg["params"]["k"] = args.k
        cfg["run"]["k_orbits"] = args.k
    if getattr(args, "tol", None) is not None:
        cfg["tolerances"]["integration"] = args.tol
    if getattr(args, "out", None) is not None:
        cfg["output"]["dir"] = args.out
    return cfg


def validate(cfg: dict, base_dir: Path) -> None:
    """Type and range checks; resolves relative profile paths against ``base_dir``."""
    for key, v in cfg["params"].items():
        _number(v, f"params.{key}")
    try:
        PhysParams(**{k: float(v) for k, v in cfg["params"].items()})
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    for key, v in cfg["tolerances"].items():
        v = _number(v, f"tolerances.{key}")
        if not TOL_RANGE[0] <= v <= TOL_RANGE[1]:
            raise ConfigError(f"tolerances.{key} = {v!r} outside [{TOL_RANGE[0]:g}, {TOL_RANGE[1]:g}]")
    if cfg["tolerances"]["integration"] > integrator.TOL_MAX:
        raise ConfigError(f"tolerances.integration must be <= {integrator.TOL_MAX:g}")
    if cfg["tolerances"]["map"] > integrator.TOL_MAX:
        raise ConfigError(f"tolerances.map must be <= {integrator.TOL_MAX:g}")
    f = cfg["field"]
    if f["kind"] not in ("constant", "harmonic", "tabulated"):
        raise ConfigError(f"field.kind must be constant, harmonic or tabulated, got {f['kind']!r}")
    if f["profile"] not in ("bessel", "constant"):
        raise ConfigError(f"field.profile must be bessel or constant, got {f['profile']!r}")
    _number(f["value"], "field.value")
    if f["max_harmonics"] is not None:
        _integer(f["max_harmonics"], "field.max_harmonics")
    if f["kind"] == "tabulated":
        if not isinstance(f["waveform_csv"], str):
            raise ConfigError("field.waveform_csv is required for a tabulated field")
        p = Path(f["waveform_csv"])
        p = p if p.is_absolute() else base_dir / p
        if not p.is_file():
            raise MissingFile(f"waveform file not found: {p}")
        f["waveform_csv"] = str(p.resolve())
    if cfg["output"]["format"] not in ("csv", "json"):
        raise ConfigError(f"output.format must be csv or json, got {cfg['output']['format']!r}")
    if not isinstance(cfg["output"]["dir"], str):
        raise ConfigError("output.dir must be a string")
    run = cfg["run"]
    for key in ("n", "nmax", "points", "samples"):
        _integer(run[key], f"run.{key}", 2 if key in ("points", "samples") else 1)
    for key in ("hmax", "s_min", "r0", "t_end"):
        if run[key] is not None:
            _number(run[key], f"run.{key}")
    for key in ("H", "pr0", "k_orbits"):
        _number(run[key], f"run.{key}")
    for key in ("t", "r"):
        if not isinstance(run[key], list) or not run[key]:
            raise ConfigError(f"run.{key} must be a non-empty list")
        for v in run[key]:
            _number(v, f"run.{key}[]")
    if any(v <= 0.0 for v in run["r"]):
        raise ConfigError("run.r entries must be > 0")
    if run["annulus"] is not None:
        a = run["annulus"]
        if not (isinstance(a, list) and len(a) == 2):
            raise ConfigError("run.annulus must be [H_lo, H_hi]")
        for v in a:
            _number(v, "run.annulus[]")
    if not isinstance(run["reconstruct"], bool):
        raise ConfigError("run.reconstruct must be true or false")


def build_params(cfg: dict, *, k: float | None = None) -> PhysParams:
    vals = {key: float(v) for key, v in cfg["params"].items()}
    if k is not None:
        vals["k"] = float(k)
    return PhysParams(**vals)


def build_waveform(cfg: dict, params: PhysParams):
    f = cfg["field"]
    if f["kind"] == "tabulated":
        try:
            return potential.load_waveform_csv(f["waveform_csv"], params.T1)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    if f["kind"] == "constant":
        return potential.Waveform(params.T1, np.zeros(1), np.zeros(1))
    return potential.Waveform.sine(params.T1)


def build_field(cfg: dict, params: PhysParams) -> FieldModel:
    f = cfg["field"]
    if f["kind"] == "constant":
        return FieldModel.constant(params.omega1)
    if f["kind"] == "tabulated":
        return FieldModel.from_waveform(build_waveform(cfg, params), max_harmonics=f["max_harmonics"])
    try:
        return FieldModel.harmonic(params.omega1, f["profile"], cosine=bool(f["cosine"]), value=float(f["value"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


# --- subcommands ---------------------------------------------------------------

def _table(out: Path, fmt_sel: str, stem: str, header, rows) -> str:
    if fmt_sel == "json":
        name = f"{stem}.json"
        write_json(out / name, [dict(zip(header, row)) for row in rows])
    else:
        name = f"{stem}.csv"
        write_csv(out / name, header, rows)
    return name


def cmd_equilibrium(cfg, out):
    params = build_params(cfg)
    eq = equilibrium(params)
    rec = {"r_bar": eq.r_bar, "H0": eq.H0, "T0_lin": eq.T0_lin, "T0_lemma3": eq.T0_lemma3,
           "residual": eq.residual}
    for key, v in rec.items():
        print(f"{key} = {v:.17g}")
    write_json(out / "equilibrium.json", rec)
    return ["equilibrium.json"], EXIT_OK


def cmd_period_map(cfg, out):
    params = build_params(cfg, k=0.0)
    eq = equilibrium(params)
    run = cfg["run"]
    hmax = eq.H0 + 5.0 if run["hmax"] is None else float(run["hmax"])
    table = periodmap.build_table(params, hmax, run["points"], s_min=run["s_min"],
                                  rtol=cfg["tolerances"]["quadrature"])
    if cfg["output"]["format"] == "csv":
        table.to_csv(out / "period_map.csv")
        name = "period_map.csv"
    else:
        name = _table(out, "json", "period_map", ["H", "T", "r_a", "r_b"], table.entries.tolist())
    print(f"{len(table)} entries, T from {table.T[0]:.17g} to {table.T[-1]:.17g}")
    return [name], EXIT_OK


def cmd_potential(cfg, out):
    params = build_params(cfg)
    wf = build_waveform(cfg, params)
    fld = FieldModel.from_waveform(wf) if np.any(wf.sin_coeffs) or np.any(wf.cos_coeffs) else None
    rows = []
    for t in cfg["run"]["t"]:
        for r in cfg["run"]["r"]:
            s = potential.delayed_potential(float(t), float(r), wf)
            a, ar = (0.0, 0.0) if fld is None else (float(v) for v in fld.potential(float(t), float(r)))
            rows.append((s.t, s.r, s.value, s.dvalue_dr, a, ar))
    name = _table(out, cfg["output"]["format"], "potential",
                  ["t", "r", "a", "da_dr", "a_closed", "da_dr_closed"], rows)
    print(f"{len(rows)} potential samples")
    return [name], EXIT_OK


def cmd_melnikov(cfg, out):
    params = build_params(cfg)
    n = cfg["run"]["n"]
    res = melnikov.melnikov_fourier(n, params, build_field(cfg, params), tol=cfg["tolerances"]["integration"])
    name = f"melnikov_n{n}.json"
    write_json(out / name, res.as_dict())
    print(f"n = {n}: H_n = {res.H_n:.17g}, amplitude = {res.amplitude:.17g}, {len(res.zeros)} zeros")
    return [name], EXIT_OK


def cmd_find_orbits(cfg, out):
    run = cfg["run"]
    params = build_params(cfg, k=run["k_orbits"])
    if params.k == 0.0:
        raise ConfigError("find-orbits needs k > 0 (set --k)")
    cat = orbitfinder.scan_orbits(run["nmax"], params, build_field(cfg, params),
                                  annulus=None if run["annulus"] is None else tuple(run["annulus"]),
                                  tol=cfg["tolerances"]["map"])
    cat.to_json(out / "orbits.json")
    names = ["orbits.json"]
    if cfg["output"]["format"] == "csv":
        cat.to_csv(out / "orbits.csv")
        names.append("orbits.csv")
    for n, cnt in cat.counts().items():
        print(f"n = {n}: {cnt} orbits, {cat.melnikov_zero_counts.get(n, 0)} Melnikov zeros")
    return names, EXIT_OK


def cmd_simulate(cfg, out):
    run = cfg["run"]
    params = build_params(cfg)
    field = build_field(cfg, params)
    if run["r0"] is None:
        tp = periodmap.turning_points(float(run["H"]), params.replace(k=0.0))
        y0 = RadialState(tp.r_b, 0.0)
    else:
        y0 = RadialState(float(run["r0"]), float(run["pr0"]))
    t_end = 10.0 * params.T1 if run["t_end"] is None else float(run["t_end"])
    orb = integrator.integrate(y0, 0.0, t_end, params, field, tol=cfg["tolerances"]["integration"],
                               n_out=run["samples"])
    full = reconstruct_full_motion(orb.times, orb.r, orb.pr, params, field)
    fmt_sel = cfg["output"]["format"]
    names = [_table(out, fmt_sel, "trajectory", ["t", "r", "pr", "H"],
                    np.column_stack([orb.times, orb.r, orb.pr, full.energy]).tolist())]
    if run["reconstruct"]:
        cols = np.column_stack([full.t, full.r, full.theta, full.z, full.r_dot, full.theta_dot, full.z_dot])
        names.append(_table(out, fmt_sel, "trajectory_3d",
                            ["t", "r", "theta", "z", "r_dot", "theta_dot", "z_dot"], cols.tolist()))
    print(f"{orb.times.size} samples to t = {t_end:.17g}")
    return names, EXIT_OK


def cmd_verify(cfg, out):
    reps = verify.verify_appendix(cfg["tolerances"]["verify"])
    verify.write_reports(out / "verify.json", reps)
    verify.write_reports(out / "verify_audit.json", verify.audit_intermediate_claims(cfg["tolerances"]["verify"]))
    failed = [r for r in reps if not r.passed]
    for r in reps:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.claim}")
    print(f"{len(reps) - len(failed)}/{len(reps)} reports pass")
    return ["verify.json", "verify_audit.json"], EXIT_VERIFY if failed else EXIT_OK


HANDLERS = {
    "equilibrium": cmd_equilibrium, "period-map": cmd_period_map, "potential": cmd_potential,
    "melnikov": cmd_melnikov, "find-orbits": cmd_find_orbits, "simulate": cmd_simulate,
    "verify": cmd_verify,
}


# --- entry point ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config or manifest")
    common.add_argument("--out", help="output directory")
    common.add_argument("--tol", type=float, help="integration tolerance")
    ap = argparse.ArgumentParser(prog="lorentzwire", description="Charge near a wire with modulated current.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", metavar="command", required=True)
    sub.add_parser("equilibrium", parents=[common], help="print r_bar, H0, T0_lin, T0_lemma3")
    p = sub.add_parser("period-map", parents=[common], help="tabulate the energy-period map")
    p.add_argument("--hmax", type=float)
    p.add_argument("--points", type=int)
    sub.add_parser("potential", parents=[common], help="retarded potential on a (t, r) grid")
    p = sub.add_parser("melnikov", parents=[common], help="Melnikov function of resonance n")
    p.add_argument("--n", type=int)
    p = sub.add_parser("find-orbits", parents=[common], help="catalogue of nT1-periodic orbits")
    p.add_argument("--nmax", type=int)
    p.add_argument("--k", type=float)
    p = sub.add_parser("simulate", parents=[common], help="integrate one trajectory")
    p.add_argument("--k", type=float)
    sub.add_parser("verify", parents=[common], help="run the sign and identity checks")
    return ap


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = apply_flags(load_config(args.config), args)
        base = Path(args.config).resolve().parent if args.config else Path.cwd()
        validate(cfg, base)
        out = Path(cfg["output"]["dir"])
        out.mkdir(parents=True, exist_ok=True)
        names, status = HANDLERS[args.command](cfg, out)
        write_json(out / "manifest.json", {"command": args.command, "version": __version__,
                                           "outputs": names, **cfg})
        return status
    except MissingFile as exc:
        print(f"lorentzwire: error: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except ConfigError as exc:
        print(f"lorentzwire: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _NUMERIC_ERRORS as exc:
        print(f"lorentzwire: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"lorentzwire: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"lorentzwire: error: {exc}", file=sys.stderr)
        return EXIT_MISSING


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
