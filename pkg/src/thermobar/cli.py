"""Batch command-line front end: ``thermobar <command> --config FILE``.

Exit codes: 0 success, 1 a check failed, 2 usage or configuration error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import datetime as _dt
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .discretization import build_discretization, unpack
from .equilibria import check_equivalence, discrete_kernel, project
from .errors import (ConfigError, EigenFailureError, EnergyUnderflowError, KernelMismatchError,
                     NonNegativeAbscissaError, ParseError, SeedlessRandomError, SingularStepError,
                     ThermobarError, TooFewCellsError, UnknownKeyError, WindowTooShortError)
from .evolution import fit_decay, simulate
from .generator import DEFAULT_VISCOSITY, assemble_generator, verify_structure
from .initial import (ConstantTheta, GaussianDisplacement, InitialDataSpec, KernelVector,
                      RandomSeeded, Zero, make_initial_state)
from .model import ModelConfig, validate_config
from .spectral import (compute_spectrum, deflate, resolvent_sweep, slowest_mode,
                       spectral_abscissa)

COMMANDS = ("verify", "simulate", "spectrum", "resolvent", "equilibrium", "decay")
DEFAULT_CELLS = 64
DECAY_GAP_TOL = 0.10

SECTION_KEYS = {
    "model": {"L1", "L2", "L3", "a", "b", "m", "k", "tau", "law"},
    "grid": {"n1", "n2", "n3"},
    "run": {"preset", "seed", "amplitude", "well_prepared", "c", "center", "width", "scale",
            "dt", "t_max", "snapshot_stride", "window_fraction", "viscosity",
            "lmin", "lmax", "num", "spacing", "threads"},
}
ALL_KEYS = set().union(*SECTION_KEYS.values())
_FLAT = "__flat__"

RUN_DEFAULTS = {
    "preset": "gaussian", "seed": None, "amplitude": 1.0, "well_prepared": False,
    "c": 1.0, "center": None, "width": None, "scale": 1.0,
    "dt": 0.05, "t_max": 200.0, "snapshot_stride": 0, "window_fraction": 0.5,
    "viscosity": DEFAULT_VISCOSITY, "lmin": 0.1, "lmax": 200.0, "num": 400,
    "spacing": "log", "threads": 1,
}
_INT_KEYS = {"seed", "snapshot_stride", "num", "threads", "n1", "n2", "n3"}
_STR_KEYS = {"preset", "spacing", "law"}
_BOOL_KEYS = {"well_prepared"}


@dataclass
class RunConfig:
    model: ModelConfig
    cells: tuple[int, int, int]
    options: dict
    notes: list[str] = field(default_factory=list)


def _convert(key, text, lineno):
    text = text.strip()
    if key in _STR_KEYS:
        return text.strip("\"'")
    if key in _BOOL_KEYS:
        low = text.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ParseError(f"{key}: expected a boolean, got {text!r}", line=lineno)
    if key in _INT_KEYS:
        try:
            return int(text)
        except ValueError:
            raise ParseError(f"{key}: expected an integer, got {text!r}", line=lineno) from None
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"{key}: expected a number, got {text!r}", line=lineno) from None


def _line_of(lines, key, section):
    current = _FLAT
    for i, raw in enumerate(lines, 1):
        s = raw.strip()
        if s.startswith("[") and s.endswith("]"):
            current = s[1:-1].strip()
        elif current == section and s.split("=", 1)[0].split(":", 1)[0].strip() == key:
            return i
    return None


def parse_config_text(text: str, source: str = "<config>") -> RunConfig:
    """Parse a ``key = value`` config, optionally split into [model], [grid], [run]."""
    lines = text.splitlines()
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"),
                                       default_section="__defaults_unused__")
    parser.optionxform = str
    try:
        parser.read_string(f"[{_FLAT}]\n" + text, source=source)
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise ParseError(f"cannot parse {line} in {source}", line=lineno - 1,
                         column=1) from None
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as exc:
        raise ParseError(str(exc).split(":", 1)[-1].strip(), line=(exc.lineno or 1) - 1) from None
    except configparser.Error as exc:
        raise ParseError(str(exc)) from None

    values = {}
    for section in parser.sections():
        if section != _FLAT and section not in SECTION_KEYS:
            raise UnknownKeyError(f"unknown section [{section}]")
        allowed = ALL_KEYS if section == _FLAT else SECTION_KEYS[section]
        for key, raw in parser.items(section):
            lineno = _line_of(lines, key, section)
            if key not in allowed:
                where = "" if section == _FLAT else f" in section [{section}]"
                raise UnknownKeyError(f"unknown key {key!r}{where}" + (f" (line {lineno})" if lineno else ""))
            if key in values:
                raise ParseError(f"key {key!r} given twice", line=lineno)
            values[key] = _convert(key, raw, lineno)

    model_raw = {k: v for k, v in values.items() if k in SECTION_KEYS["model"]}
    cfg = validate_config(model_raw)

    notes = []
    if not any(k in values for k in SECTION_KEYS["grid"]):
        notes.append(f"no grid given; using n1 = n2 = n3 = {DEFAULT_CELLS}")
    cells = tuple(values.get(k, DEFAULT_CELLS) for k in ("n1", "n2", "n3"))
    for key, n in zip(("n1", "n2", "n3"), cells):
        if n < 2:
            raise TooFewCellsError(f"{key} must be >= 2, got {n}")

    options = dict(RUN_DEFAULTS)
    options.update({k: v for k, v in values.items() if k in SECTION_KEYS["run"]})
    return RunConfig(model=cfg, cells=cells, options=options, notes=notes)


def parse_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
    return parse_config_text(text, source=str(path))


def _validate_options(opts):
    for key in ("dt", "t_max", "window_fraction", "lmax"):
        if not opts[key] > 0:
            raise ConfigError(f"{key} must be > 0, got {opts[key]}")
    if opts["window_fraction"] > 1:
        raise ConfigError("window_fraction must be <= 1")
    if opts["num"] < 2:
        raise ConfigError(f"num must be >= 2, got {opts['num']}")
    if opts["threads"] < 1:
        raise ConfigError(f"threads must be >= 1, got {opts['threads']}")
    if opts["viscosity"] < 0:
        raise ConfigError("viscosity must be >= 0")
    if opts["spacing"] not in ("log", "linear"):
        raise ConfigError(f"spacing must be log or linear, got {opts['spacing']!r}")


def initial_spec(opts) -> InitialDataSpec:
    name = str(opts["preset"]).lower()
    presets = {
        "zero": lambda: Zero(),
        "constant_theta": lambda: ConstantTheta(opts["c"]),
        "gaussian": lambda: GaussianDisplacement(opts["center"], opts["width"], opts["amplitude"]),
        "random": lambda: RandomSeeded(opts["seed"], opts["amplitude"]),
        "kernel": lambda: KernelVector(opts["scale"]),
    }
    if name not in presets:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(presets)}")
    return InitialDataSpec(presets[name](), bool(opts["well_prepared"]))


# ---------------------------------------------------------------- output

def _fmt(x) -> str:
    return format(float(x), ".17g")


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if not isinstance(v, str) else v for v in row])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if np.isfinite(f) else str(f)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def write_json(path: Path, data) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(_jsonable(data), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _check(name, passed, residual, tolerance=None, skipped=False):
    return {"name": name, "status": "skipped" if skipped else ("pass" if passed else "fail"),
            "residual": residual, "tolerance": tolerance}


class Session:
    def __init__(self, command, run: RunConfig, out: Path):
        self.command, self.run, self.out = command, run, out
        self.outputs, self.checks = [], []
        self.started = _dt.datetime.now(_dt.timezone.utc).isoformat()
        out.mkdir(parents=True, exist_ok=True)

    def path(self, name) -> Path:
        self.outputs.append(name)
        return self.out / name

    def manifest(self):
        data = {
            "tool": "thermobar", "version": __version__, "command": self.command,
            "config": {**self.run.model.as_dict(),
                       **dict(zip(("n1", "n2", "n3"), self.run.cells)), **self.run.options},
            "notes": self.run.notes,
            "started": self.started,
            "finished": _dt.datetime.now(_dt.timezone.utc).isoformat(),
            "outputs": sorted(set(self.outputs)) + ["manifest.json"],
            "checks": self.checks,
        }
        write_json(self.out / "manifest.json", data)

    @property
    def failed(self) -> bool:
        return any(c["status"] == "fail" for c in self.checks)


# ---------------------------------------------------------------- commands

def _system(run: RunConfig):
    disc = build_discretization(run.model, *run.cells)
    return assemble_generator(run.model, disc, viscosity=run.options["viscosity"])


def cmd_verify(sess: Session, sys_):
    report = verify_structure(sys_)
    sess.checks.extend(c.as_dict() for c in report.checks)
    Z = discrete_kernel(sys_)
    az = float(np.linalg.norm(sys_.A @ Z))
    tol = 1e-12 * np.linalg.norm(sys_.A, 2) * np.linalg.norm(Z)
    sess.checks.append(_check("kernel_annihilated", az <= tol, az, tol))
    atmz = float(np.linalg.norm(sys_.A.T @ sys_.M @ Z))
    tol2 = 1e-12 * np.linalg.norm(sys_.A.T @ sys_.M, 2) * np.linalg.norm(Z)
    sess.checks.append(_check("cokernel_annihilated", atmz <= tol2, atmz, tol2))
    cfg, disc = sys_.cfg, sys_.disc
    for label, spec in (("constant_theta", InitialDataSpec(ConstantTheta(1.0))),
                        ("gaussian", InitialDataSpec(GaussianDisplacement())),
                        ("random", InitialDataSpec(RandomSeeded(0))),
                        ("kernel", InitialDataSpec(KernelVector(1.0)))):
        rep = check_equivalence(make_initial_state(cfg, disc, spec, sys_), sys_)
        sess.checks.append(_check(f"equivalence_{label}", rep.passed, rep.residual, rep.tolerance))
    write_json(sess.path("verify.json"), {"checks": sess.checks})


def _trajectory(sess: Session, sys_, U0):
    opts = sess.run.options
    traj = simulate(U0, sys_, opts["dt"], opts["t_max"], snapshot_stride=opts["snapshot_stride"])
    write_csv(sess.path("trajectory.csv"), ["t", "E_total", "E_deviation", "dissipation_midpoint"],
              zip(traj.times, traj.energy_total, traj.energy_deviation, traj.dissipation))
    res = float(traj.ledger_residual.max())
    sess.checks.append(_check("energy_ledger", res <= 1e-11, res, 1e-11))
    E = traj.energy_total
    growth = float(max(0.0, np.max(np.diff(E) / np.maximum(E[:-1], 1e-300)))) if E.size > 1 else 0.0
    sess.checks.append(_check("energy_monotone", traj.monotone, growth, 1e-13))
    if traj.snapshots is not None:
        disc = sys_.disc
        for t, U in zip(traj.snapshot_times, traj.snapshots):
            f = unpack(U, disc)
            rows = _snapshot_rows(disc, f)
            idx = int(round(t / opts["dt"]))
            write_csv(sess.path(f"snapshot_{idx:08d}.csv"), ["x", "field", "value"], rows)
    return traj


def _snapshot_rows(disc, f):
    g1, g2, g3 = disc.grids
    rows = []
    for name, grid_pts, vals in (
            ("v1", g1.nodes, f.v1_left), ("u1", g2.nodes, f.u1), ("v1", g3.nodes, f.v1_right),
            ("v2", g1.nodes, f.v2_left), ("u2", g2.nodes, f.u2), ("v2", g3.nodes, f.v2_right),
            ("theta", g2.cells, f.theta)) + ((("q", g2.nodes, f.q),) if f.q is not None else ()):
        rows.extend((x, name, v) for x, v in zip(grid_pts, vals))
    return rows


def cmd_simulate(sess: Session, sys_):
    U0 = make_initial_state(sys_.cfg, sys_.disc, initial_spec(sess.run.options), sys_)
    _trajectory(sess, sys_, U0)


def cmd_spectrum(sess: Session, sys_):
    rep = compute_spectrum(sys_)
    ev = rep.eigenvalues[np.lexsort((rep.eigenvalues.imag, rep.eigenvalues.real))]
    write_csv(sess.path("spectrum.csv"), ["re", "im"], zip(ev.real, ev.imag))
    sess.checks.append(_check("zero_simple", rep.zero_is_simple, float(rep.zero_multiplicity), 1))
    sess.checks.append(_check("kernel_eigenvector", rep.kernel_angle <= 1e-8, rep.kernel_angle, 1e-8))
    worst = 0.0
    if rep.strip_violations.size:
        re = rep.strip_violations.real
        worst = float(max(np.max(re, initial=0.0),
                          np.max((rep.strip_lower or 0.0) - re, initial=0.0)))
    sess.checks.append(_check("strip", rep.in_strip, worst, 1e-10 * rep.scale))
    defl = deflate(sys_)
    absc = spectral_abscissa(defl)
    sess.checks.append(_check("abscissa_negative", absc < 0, absc, 0.0))
    write_json(sess.path("spectrum.json"), {**rep.summary(), "spectral_abscissa": absc,
                                            "slowest_mode": slowest_mode(defl),
                                            "zero_simple": rep.zero_is_simple, "in_strip": rep.in_strip})


def cmd_resolvent(sess: Session, sys_):
    o = sess.run.options
    defl = deflate(sys_)
    sw = resolvent_sweep(defl, o["lmin"], o["lmax"], o["num"], o["spacing"], threads=o["threads"])
    write_csv(sess.path("resolvent.csv"), ["l", "norm"], zip(sw.l_values, sw.norms))
    sess.checks.append(_check("sup_at_finite_l", sw.sup_at_finite_l, sw.l_at_sup, float(sw.l_values[-1])))
    sess.checks.append(_check("top_decade_plateau", sw.plateau_variation <= 0.05, sw.plateau_variation, 0.05))
    write_json(sess.path("resolvent.json"), {**sw.summary(), "peaks": [list(p) for p in sw.peaks],
                                             "spectral_abscissa": spectral_abscissa(defl)})


def cmd_equilibrium(sess: Session, sys_):
    U0 = make_initial_state(sys_.cfg, sys_.disc, initial_spec(sess.run.options), sys_)
    dec = project(U0, sys_)
    rep = check_equivalence(U0, sys_)
    sess.checks.append(_check("equivalence_identity", rep.passed, rep.residual, rep.tolerance))
    M = sys_.M
    pyth = abs(U0 @ M @ U0 - dec.W0 @ M @ dec.W0 - dec.V0 @ M @ dec.V0)
    ptol = 1e-12 * max(U0 @ M @ U0, 1e-300)
    sess.checks.append(_check("pythagoras", pyth <= ptol, float(pyth), float(ptol)))
    data = {"gamma": dec.coeff, **rep.as_dict()}
    write_json(sess.path("equilibrium.json"), data)
    print(json.dumps(_jsonable(data), indent=2, sort_keys=True))


def cmd_decay(sess: Session, sys_):
    o = sess.run.options
    U0 = make_initial_state(sys_.cfg, sys_.disc, initial_spec(o), sys_)
    traj = _trajectory(sess, sys_, U0)
    defl = deflate(sys_)
    absc = spectral_abscissa(defl)
    mode = slowest_mode(defl)
    period = np.pi / abs(mode.imag) if abs(mode.imag) > 0 else None
    rep = fit_decay(traj, o["window_fraction"], reference_rate=2 * abs(absc), period=period)
    sess.checks.append(_check("decay_rate_gap", rep.relative_gap <= DECAY_GAP_TOL, rep.relative_gap,
                              DECAY_GAP_TOL))
    write_json(sess.path("decay.json"), {**rep.as_dict(), "spectral_abscissa": absc,
                                         "slowest_mode": mode, "energy_period": period})


HANDLERS = {"verify": cmd_verify, "simulate": cmd_simulate, "spectrum": cmd_spectrum,
            "resolvent": cmd_resolvent, "equilibrium": cmd_equilibrium, "decay": cmd_decay}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="thermobar", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"thermobar {__version__}")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="key = value config file")
    p.add_argument("--out", default="thermobar_out", help="output directory (THERMOBAR_OUT overrides)")
    p.add_argument("--dt", type=float)
    p.add_argument("--tmax", type=float)
    p.add_argument("--lmin", type=float)
    p.add_argument("--lmax", type=float)
    p.add_argument("--num", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--dump-operators", action="store_true", help="write A.csv and M.csv")
    return p


_NUMERICAL = (EigenFailureError, SingularStepError, KernelMismatchError, NonNegativeAbscissaError,
              EnergyUnderflowError, np.linalg.LinAlgError)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        run = parse_config(args.config)
        for flag, key in (("dt", "dt"), ("tmax", "t_max"), ("lmin", "lmin"), ("lmax", "lmax"),
                          ("num", "num"), ("threads", "threads")):
            if getattr(args, flag) is not None:
                run.options[key] = getattr(args, flag)
        _validate_options(run.options)
        spec = initial_spec(run.options) if args.command in ("simulate", "equilibrium", "decay") else None
        if isinstance(spec and spec.preset, RandomSeeded) and spec.preset.seed is None:
            raise SeedlessRandomError("preset = random needs a seed")
    except (ThermobarError, WindowTooShortError) as exc:
        print(f"thermobar: error: {exc}", file=sys.stderr)
        return 2

    out = Path(os.environ.get("THERMOBAR_OUT") or args.out)
    sess = Session(args.command, run, out)
    try:
        sys_ = _system(run)
        if args.dump_operators:
            write_csv(sess.path("A.csv"), [f"c{j}" for j in range(sys_.N)], sys_.A)
            write_csv(sess.path("M.csv"), [f"c{j}" for j in range(sys_.N)], sys_.M)
        HANDLERS[args.command](sess, sys_)
    except _NUMERICAL as exc:
        sess.checks.append(_check("numerical_failure", False, float("nan")))
        sess.manifest()
        print(f"thermobar: numerical failure: {exc}", file=sys.stderr)
        return 3
    except (ThermobarError, ValueError) as exc:
        sess.manifest()
        print(f"thermobar: error: {exc}", file=sys.stderr)
        return 2
    sess.manifest()
    for c in sess.checks:
        print(f"{c['status']:>7}  {c['name']}  residual={_fmt(c['residual'])}", file=sys.stderr)
    return 1 if sess.failed else 0


if __name__ == "__main__":
    sys.exit(main())
