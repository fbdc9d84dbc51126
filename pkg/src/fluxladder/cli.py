"""Batch front-end: ``fluxladder <experiment> [--config FILE] [--out DIR] [--set KEY=VALUE]``.

Each experiment writes one or more CSV tables plus ``manifest.json``, which
records the fully resolved configuration.  Feeding a manifest back through
``--config`` reproduces the run byte for byte.

Exit codes: 0 success, 1 unwritable output, 2 configuration error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .bands import BlochParams, band_energies, critical_flux, lower_band_minima, sigma_z_expect
from .couplings import (
    FluxPattern,
    drive_schedule,
    effective_couplings,
    interleg_surface,
    synthesize_flux,
    uniform_couplings,
)
from .dynamics import chiral_experiment, prepare_superposition, rwa_fidelity, short_time_law
from .errors import FluxLadderError
from .groundstate import (
    chiral_current_scan,
    current_map,
    ground_states,
    kramers_combination,
    uniform_t0,
)
from .lattice import LadderSpec, basis_state, build_basis, build_effective_hamiltonian

EXIT_OK, EXIT_IO, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


class ConfigError(Exception):
    """A configuration field is missing, malformed or out of range."""


# defaults per experiment; every key here is part of the schema
DEFAULTS = {
    "bands": {"t0": 1.0, "phi": "0.1pi", "n_k": 201},
    "gs-scan": {"N": 50, "boundary": "periodic", "alpha": 1.0, "n_exc": 1, "phi_points": 50},
    "current-map": {"N": 50, "boundary": "periodic", "alpha": 1.0, "phi": "0.1pi"},
    "dynamics": {"N": 10, "boundary": "open", "t0": 1.0, "phi": "0.5pi", "kind": "1S", "times": [0.0, 1.0], "rung": 5},
    "short-time": {"N": 10, "boundary": "open", "t0": 1.0, "phi": "0.5pi", "kind": "1S", "dt_grid": [0.02, 0.04, 0.06, 0.08, 0.1], "rung": 5},
    "rwa-check": {"N": 2, "alpha": 1.0, "phi": "0.5pi", "u_over_g": [10.0, 20.0, 40.0], "spread": 4.25, "T": 2.0, "samples": 21},
    "prepare": {"N": 10, "kinds": ["1S", "1AS"], "T": 50.0, "rung": 5, "detuning": 1.0, "alpha_points": 41, "alpha_max": 6.0},
}

_ANGLE = re.compile(r"^\s*([-+]?\d*\.?\d*(?:[eE][-+]?\d+)?)\s*\*?\s*pi\s*$")


def _angle(value, key):
    if isinstance(value, str):
        m = _ANGLE.match(value)
        if not m:
            raise ConfigError(f"{key}: cannot read angle {value!r} (use a number or e.g. '0.5pi')")
        coeff = m.group(1)
        return (float(coeff) if coeff not in ("", "+", "-") else float(coeff + "1")) * math.pi
    return _number(value, key)


def _number(value, key):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{key}: expected a finite number, got {value!r}")
    return float(value)


def _positive(value, key):
    v = _number(value, key)
    if v <= 0:
        raise ConfigError(f"{key}: must be > 0, got {value!r}")
    return v


def _integer(value, key, low):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{key}: expected an integer, got {value!r}")
    if value < low:
        raise ConfigError(f"{key}: must be >= {low}, got {value}")
    return value


def _numbers(value, key):
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{key}: expected a nonempty list of numbers")
    return [_number(v, f"{key}[{i}]") for i, v in enumerate(value)]


def _choice(value, key, options):
    if value not in options:
        raise ConfigError(f"{key}: must be one of {list(options)}, got {value!r}")
    return value


def _ladder(cfg, min_n=1):
    n = _integer(cfg["N"], "N", min_n)
    boundary = _choice(cfg.get("boundary", "open"), "boundary", ("open", "periodic"))
    if boundary == "periodic" and n < 3:
        raise ConfigError("N: a periodic ladder needs N >= 3")
    return LadderSpec.uniform(n, boundary=boundary)


def resolve(experiment, raw):
    """Merge ``raw`` over the defaults and reject unknown keys."""
    if experiment not in DEFAULTS:
        raise ConfigError(f"experiment: unknown kind {experiment!r}")
    if not isinstance(raw, dict):
        raise ConfigError("config: expected a JSON object")
    unknown = sorted(set(raw) - set(DEFAULTS[experiment]))
    if unknown:
        raise ConfigError(f"{unknown[0]}: not a field of the {experiment} experiment")
    cfg = dict(DEFAULTS[experiment])
    cfg.update(raw)
    return cfg


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])


def _map(fn, items, threads):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def run_bands(cfg, out, threads):
    p = BlochParams(_positive(cfg["t0"], "t0"), _angle(cfg["phi"], "phi"))
    n_k = _integer(cfg["n_k"], "n_k", 2)
    ks = np.linspace(-np.pi, np.pi, n_k)
    lo, up = band_energies(p, ks)
    sz = sigma_z_expect(p, ks)
    _write_csv(out / "bands.csv", ["k", "E_lower", "E_upper", "sz"], zip(ks, lo, up, sz))
    minima = lower_band_minima(p) if 0 < abs(p.phi) <= np.pi else []
    _write_csv(out / "minima.csv", ["k"], [[k] for k in minima])
    return ["bands.csv", "minima.csv"]


def run_gs_scan(cfg, out, threads):
    spec = _ladder(cfg)
    alpha = _number(cfg["alpha"], "alpha")
    n_exc = _choice(cfg["n_exc"], "n_exc", (1, 2))
    points = _integer(cfg["phi_points"], "phi_points", 1)
    grid = np.pi * np.arange(1, points + 1) / points
    chunks = [grid[i::max(threads, 1)] for i in range(max(threads, 1))]
    parts = _map(lambda g: chiral_current_scan(spec, alpha, g, n_exc) if g.size else [], chunks, threads)
    scan = sorted((p for part in parts for p in part), key=lambda p: p.phi)
    rows = [(p.phi, p.chiral, p.analytic, p.energy, p.degeneracy) for p in scan]
    _write_csv(out / "gs_scan.csv", ["phi", "J_C_numeric", "J_C_analytic", "energy", "degeneracy"], rows)
    return ["gs_scan.csv"]


def run_current_map(cfg, out, threads):
    spec = _ladder(cfg)
    phi = _angle(cfg["phi"], "phi")
    t0 = uniform_t0(spec, _number(cfg["alpha"], "alpha"))
    c = uniform_couplings(spec.n_rungs, t0, phi, spec.boundary)
    basis = build_basis(spec, 1)
    _, states = ground_states(build_effective_hamiltonian(c, basis))
    if states.shape[1] == 2 and spec.boundary == "periodic":
        psi, _ = kramers_combination(spec.n_rungs, t0, phi, states)
    else:
        psi = states[:, 0]
    cmap = current_map(psi, c, basis)
    _write_csv(out / "bonds.csv", ["kind", "leg", "j", "current"], cmap.bonds)
    _write_csv(out / "sites.csv", ["leg", "j", "density"], cmap.sites)
    return ["bonds.csv", "sites.csv"]


def run_dynamics(cfg, out, threads):
    spec = _ladder(cfg, min_n=3)
    kind = _choice(cfg["kind"], "kind", ("1S", "1AS", "1E", "2S", "2AS", "2E"))
    rung = _integer(cfg["rung"], "rung", 1)
    if rung + (1 if kind in ("2S", "2AS") else 0) > spec.n_rungs:
        raise ConfigError(f"rung: {rung} does not fit on a ladder with N={spec.n_rungs}")
    snaps = chiral_experiment(kind, spec, _angle(cfg["phi"], "phi"), _numbers(cfg["times"], "times"),
                              _positive(cfg["t0"], "t0"), rung)
    rows = [(s.t, leg, j + 1, s.density[li, j]) for s in snaps for li, leg in enumerate("AB") for j in range(spec.n_rungs)]
    _write_csv(out / "densities.csv", ["t", "leg", "j", "density"], rows)
    _write_csv(out / "delta_n.csv", ["t", "delta_n_A", "delta_n_B"], [(s.t, s.delta_a, s.delta_b) for s in snaps])
    return ["densities.csv", "delta_n.csv"]


def run_short_time(cfg, out, threads):
    spec = _ladder(cfg, min_n=3)
    kind = _choice(cfg["kind"], "kind", ("1S", "1AS"))
    grid = _numbers(cfg["dt_grid"], "dt_grid")
    if any(g <= 0 for g in grid):
        raise ConfigError("dt_grid: entries must be > 0")
    rung = _integer(cfg["rung"], "rung", 1)
    if rung > spec.n_rungs:
        raise ConfigError(f"rung: {rung} does not fit on a ladder with N={spec.n_rungs}")
    phi = _angle(cfg["phi"], "phi")
    fit = short_time_law(kind, spec, phi, grid, _positive(cfg["t0"], "t0"), rung)
    rows = [(dt, y, fit.coefficient * dt**3) for dt, y in zip(grid, fit.delta_a)]
    _write_csv(out / "short_time.csv", ["dt", "delta_n_A", "fit"], rows)
    _write_csv(out / "short_time_fit.csv", ["coefficient", "sin_phi", "residual"],
               [(fit.coefficient, math.sin(phi), fit.residual)])
    return ["short_time.csv", "short_time_fit.csv"]


def run_rwa_check(cfg, out, threads):
    spec = _ladder(dict(cfg, boundary="open"))
    alpha = _number(cfg["alpha"], "alpha")
    ratios = [_positive(r, "u_over_g") for r in _numbers(cfg["u_over_g"], "u_over_g")]
    spread = _number(cfg["spread"], "spread")
    if spread < 1:
        raise ConfigError("spread: must be >= 1")
    phases, _ = synthesize_flux(FluxPattern("uniform", _angle(cfg["phi"], "phi")), spec, alpha)
    t0 = uniform_t0(spec, alpha)
    T = _positive(cfg["T"], "T") / t0
    samples = _integer(cfg["samples"], "samples", 2)
    psi0 = basis_state(build_basis(spec, 1), ("A", 1))

    def one(r):
        sched = drive_schedule(spec, phases, alpha, u=r, spread=spread)
        return rwa_fidelity(spec, sched, effective_couplings(spec, sched), psi0, T, samples)

    traces = _map(one, ratios, threads)
    rows = [(r, t, f) for r, tr in zip(ratios, traces) for t, f in zip(tr.times, tr.fidelity)]
    _write_csv(out / "rwa_fidelity.csv", ["u_over_g", "t", "fidelity"], rows)
    _write_csv(out / "rwa_min.csv", ["u_over_g", "min_fidelity"], [(r, tr.minimum) for r, tr in zip(ratios, traces)])
    return ["rwa_fidelity.csv", "rwa_min.csv"]


def run_prepare(cfg, out, threads):
    spec = _ladder(dict(cfg, boundary="open"), min_n=1)
    kinds = cfg["kinds"]
    if not isinstance(kinds, list) or not kinds:
        raise ConfigError("kinds: expected a nonempty list")
    for k in kinds:
        _choice(k, "kinds", ("1S", "1AS", "2S", "2AS"))
    rung = _integer(cfg["rung"], "rung", 1)
    if rung + (1 if any(k[0] == "2" for k in kinds) else 0) > spec.n_rungs:
        raise ConfigError(f"rung: {rung} does not fit on a ladder with N={spec.n_rungs}")
    T = _positive(cfg["T"], "T")
    detuning = _positive(cfg["detuning"], "detuning")
    fids = _map(lambda k: prepare_superposition(k, spec, T, rung=rung, detuning=detuning)[1], kinds, threads)
    _write_csv(out / "prepare.csv", ["kind", "T", "fidelity"], [(k, T, f) for k, f in zip(kinds, fids)])
    n_alpha = _integer(cfg["alpha_points"], "alpha_points", 1)
    grid = np.linspace(0.0, _positive(cfg["alpha_max"], "alpha_max"), n_alpha)
    surface = interleg_surface(grid, grid)
    rows = [(a, b, surface[i, j]) for i, a in enumerate(grid) for j, b in enumerate(grid)]
    _write_csv(out / "interleg_surface.csv", ["alpha_A", "alpha_B", "t_over_g"], rows)
    return ["prepare.csv", "interleg_surface.csv"]


RUNNERS = {
    "bands": run_bands,
    "gs-scan": run_gs_scan,
    "current-map": run_current_map,
    "dynamics": run_dynamics,
    "short-time": run_short_time,
    "rwa-check": run_rwa_check,
    "prepare": run_prepare,
}


def _parse_override(text):
    if "=" not in text:
        raise ConfigError(f"--set expects KEY=VALUE, got {text!r}")
    key, value = text.split("=", 1)
    try:
        return key.strip(), json.loads(value)
    except json.JSONDecodeError:
        return key.strip(), value


def load_config(experiment, path, overrides):
    raw = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: invalid JSON in {path}: {exc.msg}") from None
        if isinstance(raw, dict) and "experiment" in raw and "config" in raw:
            if raw["experiment"] != experiment:
                raise ConfigError(f"experiment: manifest is for {raw['experiment']!r}, not {experiment!r}")
            raw = raw["config"]
    for text in overrides:
        key, value = _parse_override(text)
        raw[key] = value
    return resolve(experiment, raw)


def run(experiment, config, out_dir, threads=1):
    """Execute one experiment and write its tables and manifest; returns the file list."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = RUNNERS[experiment](config, out, threads)
    manifest = {"experiment": experiment, "config": config, "outputs": sorted(files),
                "critical_flux": critical_flux()}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return files


def build_parser():
    parser = argparse.ArgumentParser(prog="fluxladder", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in RUNNERS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", help="JSON config or manifest file")
        p.add_argument("--out", default=f"out/{name}", help="output directory")
        p.add_argument("--threads", type=int, default=1, help="worker threads for independent points")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                       help="override one config field (value parsed as JSON when possible)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.threads < 1:
            raise ConfigError("threads: must be >= 1")
        cfg = load_config(args.experiment, args.config, args.overrides)
        files = run(args.experiment, cfg, args.out, args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FluxLadderError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numeric error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    for f in files:
        print(Path(args.out) / f)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
