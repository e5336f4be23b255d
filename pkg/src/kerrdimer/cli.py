"""Command-line front end for sweeps, phase diagrams, and comparisons.

Six subcommands map onto the library layers:

    semiclassical-sweep   mean-field roots along one parameter axis
    phase-diagram         stable-state counts over a 2-D grid
    master-sweep          density-matrix steady states along one axis
    trajectories          quantum-jump ensemble at a fixed working point
    analytic-sweep        series correlators along one axis
    compare               master vs series observables side by side

All rates are in units of the single-cavity loss rate, which is fixed
at gamma = 1; there is no flag for it.  Swept parameters use the range
syntax min:max:steps (inclusive, steps >= 1); every other physics flag
takes a scalar.  Ranges that start with a minus sign need the = form,
e.g. --dw=-4:-2:21.  Options may also come from a JSON file via
--config; explicit flags win over file entries, file entries win over
defaults.

Artifacts are CSV: one '#' manifest line carrying the version and the
full resolved configuration, a header row, then data rows with floats
at 17 significant digits.  Rows are flushed as they are produced, so an
interrupted sweep leaves a usable prefix.  Reruns with the same
configuration and seed are byte-identical.  --out names the primary
file; commands with secondary artifacts (phase-diagram root records,
trajectory samples and histograms) derive sibling names from its stem.
When KERRDIMER_OUTDIR is set it provides the default output directory.

Exit codes: 0 success, 1 usage or invalid configuration, 2 numerical
failure, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import VALIDITY_THRESHOLD, correlators, validity_metric
from .fockspace import FockBasis
from .master import steady_state_direct
from .model import SystemParams, make_params
from .semiclassical import (Stability, find_all_steady_states,
                            symmetric_branch)
from .trajectory import TrajectoryConfig, jump_histograms, run_trajectory

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3

ENV_OUTDIR = "KERRDIMER_OUTDIR"

COMMANDS = ("semiclassical-sweep", "phase-diagram", "master-sweep",
            "trajectories", "analytic-sweep", "compare")

# Option registry: which keys each subcommand accepts (flags and config
# file alike).  "out" is handled separately because of ENV_OUTDIR.
_PHYSICS = ("j", "u", "f", "dw")
COMMAND_OPTIONS = {
    "semiclassical-sweep": _PHYSICS,
    "phase-diagram": _PHYSICS,
    "master-sweep": _PHYSICS + ("n_max", "tol"),
    "trajectories": _PHYSICS + ("n_max", "dt", "t_final", "sample_interval",
                                "n_traj", "seed", "binning", "weighting",
                                "workers"),
    "analytic-sweep": _PHYSICS + ("index_cap",),
    "compare": _PHYSICS + ("n_max", "tol", "index_cap",
                           "with_semiclassical"),
}

# Exactly this many range-valued physics flags per subcommand.
_AXIS_COUNT = {
    "semiclassical-sweep": 1,
    "phase-diagram": 2,
    "master-sweep": 1,
    "trajectories": 0,
    "analytic-sweep": 1,
    "compare": 1,
}

DEFAULTS = {
    "j": 0.1,
    "u": 0.6,
    "f": 2.6,
    "dw": -3.0,
    "n_max": 15,
    "dt": 2e-3,
    "tol": 1e-8,
    "index_cap": None,
    "n_traj": 200,
    "seed": 7041776,
    "t_final": 2000.0,
    "sample_interval": 1.0,
    "binning": 0.25,
    "weighting": "jump",
    "workers": None,
    "with_semiclassical": False,
}

_HELP = {
    "j": "tunnel coupling J",
    "u": "Kerr nonlinearity U",
    "f": "drive amplitude F (real)",
    "dw": "drive-cavity detuning",
    "n_max": "Fock cutoff per cavity",
    "dt": "integrator time step",
    "tol": "steady-state residual tolerance",
    "index_cap": "series index cap (omit for automatic choice)",
    "n_traj": "number of trajectories",
    "seed": "master seed for the trajectory ensemble",
    "t_final": "trajectory length",
    "sample_interval": "occupation sampling interval",
    "binning": "histogram bin width",
    "weighting": "histogram weighting",
    "workers": "worker threads (default: all available cores)",
    "with_semiclassical": "add a mean-field occupation column",
}


class UsageError(Exception):
    """Bad command line or configuration; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    # argparse exits the process on errors; surface them as exceptions
    # so parse_config stays callable from tests and other programs.
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


@dataclass(frozen=True)
class SweepAxis:
    """Inclusive linear range min:max:steps for one physics parameter."""

    name: str
    lo: float
    hi: float
    steps: int

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError("range endpoints must be finite")

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.steps)

    def __str__(self) -> str:
        return f"{self.lo!r}:{self.hi!r}:{self.steps}"


# CLI flag -> SystemParams field.
_PARAM_FIELD = {"j": "j", "u": "u", "f": "f", "dw": "delta_omega"}


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run: command, physics, numerics, output path.

    Physics entries are floats, except swept ones which hold a
    SweepAxis.  Re-emitting with to_argv() and parsing again yields an
    equal RunConfig.
    """

    command: str
    j: float | SweepAxis
    u: float | SweepAxis
    f: float | SweepAxis
    dw: float | SweepAxis
    out: Path
    n_max: int = 15
    dt: float = 2e-3
    tol: float = 1e-8
    index_cap: int | None = None
    n_traj: int = 200
    seed: int = 7041776
    t_final: float = 2000.0
    sample_interval: float = 1.0
    binning: float = 0.25
    weighting: str = "jump"
    workers: int | None = None
    with_semiclassical: bool = False

    @property
    def axes(self) -> tuple[SweepAxis, ...]:
        return tuple(v for v in (self.j, self.u, self.f, self.dw)
                     if isinstance(v, SweepAxis))

    def base_params(self) -> SystemParams:
        # Swept fields hold their range start as a placeholder.
        vals = {}
        for key in _PHYSICS:
            v = getattr(self, key)
            vals[_PARAM_FIELD[key]] = v.lo if isinstance(v, SweepAxis) else v
        return make_params(**vals)

    def params_at(self, **axis_values: float) -> SystemParams:
        return dataclasses.replace(
            self.base_params(),
            **{_PARAM_FIELD[k]: v for k, v in axis_values.items()})

    def to_argv(self) -> list[str]:
        argv = [self.command]
        for key in COMMAND_OPTIONS[self.command]:
            value = getattr(self, key)
            flag = "--" + key.replace("_", "-")
            if key == "with_semiclassical":
                if value:
                    argv.append(flag)
            elif key == "index_cap":
                if value is not None:
                    argv += [flag, str(value)]
            elif key == "workers":
                if value is not None:
                    argv += [flag, str(value)]
            elif isinstance(value, SweepAxis):
                # = form survives ranges that start with a minus sign.
                argv.append(f"{flag}={value}")
            elif isinstance(value, bool):
                raise AssertionError(key)
            elif isinstance(value, int):
                argv += [flag, str(value)]
            elif isinstance(value, str):
                argv += [flag, value]
            elif key in _PHYSICS:
                argv.append(f"{flag}={float(value)!r}")
            else:
                argv += [flag, repr(float(value))]
        argv += ["--out", str(self.out)]
        return argv


def _axis_or_scalar(key: str, text) -> float | SweepAxis:
    """Parse a physics flag value: scalar float or min:max:steps."""
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        return float(text)
    text = str(text)
    if ":" not in text:
        try:
            return float(text)
        except ValueError:
            raise UsageError(f"invalid value for --{key}: {text!r}") from None
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(
            f"invalid range for --{key}: {text!r} (want min:max:steps)")
    try:
        lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
        return SweepAxis(key, lo, hi, steps)
    except ValueError as exc:
        raise UsageError(f"invalid range for --{key}: {exc}") from None


def _convert(key: str, value):
    """Coerce one non-physics option to its RunConfig type."""
    try:
        if key == "index_cap" or key == "workers":
            if value is None or value == "" or value == "auto":
                return None
            return int(value)
        if key in ("n_max", "n_traj", "seed", "steps"):
            return int(value)
        if key in ("dt", "tol", "t_final", "sample_interval", "binning"):
            v = float(value)
            if not math.isfinite(v):
                raise ValueError("must be finite")
            return v
        if key == "weighting":
            if value not in ("jump", "dwell"):
                raise ValueError("must be 'jump' or 'dwell'")
            return value
        if key == "with_semiclassical":
            if isinstance(value, bool):
                return value
            raise ValueError("must be a boolean")
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid value for --{key.replace('_', '-')}: "
                         f"{value!r} ({exc})") from None
    raise AssertionError(key)


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="kerrdimer",
        description="Driven-dissipative Kerr-dimer toolkit (gamma = 1).")
    parser.add_argument("--version", action="version",
                        version=f"kerrdimer {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser,
                                metavar="command")
    for command in COMMANDS:
        n_axes = _AXIS_COUNT[command]
        p = sub.add_parser(
            command,
            help=f"{command.replace('-', ' ')} "
                 f"({n_axes} swept ax{'es' if n_axes != 1 else 'is'})")
        for key in COMMAND_OPTIONS[command]:
            flag = "--" + key.replace("_", "-")
            default = DEFAULTS[key]
            shown = "auto" if default is None else default
            if key in _PHYSICS:
                ranged = " or min:max:steps" if n_axes else ""
                p.add_argument(flag, default=None, metavar="X",
                               help=f"{_HELP[key]}{ranged} "
                                    f"(default: {shown})")
            elif key == "with_semiclassical":
                p.add_argument(flag, action="store_true", default=None,
                               help=_HELP[key])
            else:
                p.add_argument(flag, default=None, metavar="X",
                               help=f"{_HELP[key]} (default: {shown})")
        p.add_argument("--config", default=None, metavar="FILE",
                       help="JSON file with the same keys as the flags")
        p.add_argument("--out", default=None, metavar="FILE",
                       help=f"output CSV (default: ${ENV_OUTDIR}/"
                            f"{command}.csv when the variable is set)")
    return parser


def _load_config_file(path: str, command: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed config file {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise UsageError(f"config file {path} must hold a JSON object")
    allowed = set(COMMAND_OPTIONS[command]) | {"out"}
    entries = {}
    for key, value in raw.items():
        norm = str(key).replace("-", "_")
        if norm not in allowed:
            raise UsageError(
                f"unknown config key {key!r} for {command} "
                f"(allowed: {', '.join(sorted(allowed))})")
        entries[norm] = value
    return entries


def _resolve_out(command: str, out) -> Path:
    outdir = os.environ.get(ENV_OUTDIR)
    if out is None:
        if not outdir:
            raise UsageError(
                f"missing output path: pass --out or set ${ENV_OUTDIR}")
        return Path(outdir) / f"{command}.csv"
    path = Path(str(out))
    if outdir and not path.is_absolute():
        return Path(outdir) / path
    return path


def parse_config(argv) -> RunConfig:
    """Parse a full command line (flags plus optional JSON config).

    Raises UsageError on anything malformed: unknown flags or config
    keys, bad values, a wrong number of swept axes for the subcommand,
    or a missing output path.
    """
    parser = _build_parser()
    if not argv:
        raise UsageError(f"missing command\n{parser.format_usage()}")
    ns = parser.parse_args(list(argv))
    if ns.command is None:
        raise UsageError(f"missing command\n{parser.format_usage()}")
    command = ns.command
    keys = COMMAND_OPTIONS[command]

    merged = {key: DEFAULTS[key] for key in keys}
    merged["out"] = None
    if ns.config is not None:
        merged.update(_load_config_file(ns.config, command))
    for key in keys + ("out",):
        flag_value = getattr(ns, key)
        if flag_value is not None:
            merged[key] = flag_value

    values: dict = {"command": command}
    for key in keys:
        if key in _PHYSICS:
            values[key] = _axis_or_scalar(key, merged[key])
        else:
            values[key] = _convert(key, merged[key])
    for key in set(DEFAULTS) - set(keys):
        values[key] = DEFAULTS[key]
    values["out"] = _resolve_out(command, merged["out"])

    axes = [v for v in (values["j"], values["u"], values["f"], values["dw"])
            if isinstance(v, SweepAxis)]
    want = _AXIS_COUNT[command]
    if len(axes) != want:
        got = ", ".join(f"--{a.name}" for a in axes) or "none"
        raise UsageError(
            f"{command} needs exactly {want} swept ax"
            f"{'es' if want != 1 else 'is'}, got {got}")
    if command == "phase-diagram":
        for a in axes:
            if a.steps < 2:
                raise UsageError(
                    f"phase-diagram axis --{a.name} needs steps >= 2")
    return RunConfig(**values)


# ---------------------------------------------------------------------------
# CSV output


def _fmt(value) -> str:
    if isinstance(value, bool) or isinstance(value, np.bool_):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.16e}"
    return str(value)


def _manifest(config: RunConfig) -> str:
    parts = [f"kerrdimer {__version__}", f"command={config.command}",
             "gamma=1"]
    for key in COMMAND_OPTIONS[config.command]:
        if key == "workers":
            continue  # result-invariant; keeps reruns byte-identical
        value = getattr(config, key)
        if isinstance(value, SweepAxis):
            parts.append(f"{key}={value}")
        elif value is None:
            parts.append(f"{key}=auto")
        elif isinstance(value, bool):
            parts.append(f"{key}={str(value).lower()}")
        elif isinstance(value, float):
            parts.append(f"{key}={value!r}")
        else:
            parts.append(f"{key}={value}")
    return "# " + " ".join(parts)


class _Writer:
    """CSV file with a manifest comment, a header, and per-row flushes."""

    def __init__(self, path: Path, config: RunConfig, columns):
        if path.parent != Path(""):
            path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = open(path, "w", encoding="utf-8", newline="\n")
        self._fh.write(_manifest(config) + "\n")
        self._fh.write(",".join(columns) + "\n")
        self._fh.flush()

    def row(self, values):
        self._fh.write(",".join(_fmt(v) for v in values) + "\n")
        self._fh.flush()

    def close(self):
        self._fh.close()


def _warn(message: str):
    print(f"kerrdimer: warning: {message}", file=sys.stderr)


def _sibling(out: Path, suffix: str) -> Path:
    return out.with_name(out.stem + suffix + out.suffix)


# ---------------------------------------------------------------------------
# Subcommand runners

_ROOT_COLUMNS = ["n1", "n2", "theta1", "theta2", "symmetry", "stability",
                 "eig1_re", "eig1_im", "eig2_re", "eig2_im",
                 "eig3_re", "eig3_im", "eig4_re", "eig4_im"]


def _root_row(sol):
    s = sol.state
    row = [sol.n1, sol.n2, float(np.angle(s.alpha1)),
           float(np.angle(s.alpha2)), sol.symmetry.value,
           sol.stability.value]
    for lam in sol.eigenvalues:
        row += [float(lam.real), float(lam.imag)]
    return row


def _run_semiclassical_sweep(config: RunConfig) -> int:
    axis = config.axes[0]
    writer = _Writer(config.out, config, [axis.name] + _ROOT_COLUMNS)
    try:
        for v in axis.values:
            p = config.params_at(**{axis.name: v})
            try:
                sols = find_all_steady_states(p)
            except (RuntimeError, np.linalg.LinAlgError) as exc:
                _warn(f"{axis.name} = {v:g}: root search failed ({exc})")
                continue
            for sol in sols:
                writer.row([v] + _root_row(sol))
    finally:
        writer.close()
    return EXIT_OK


def _run_phase_diagram(config: RunConfig) -> int:
    ax1, ax2 = config.axes
    writer = _Writer(config.out, config,
                     [ax1.name, ax2.name, "n_stable", "n_breaking",
                      "n_total"])
    roots = _Writer(_sibling(config.out, "_roots"), config,
                    [ax1.name, ax2.name] + _ROOT_COLUMNS)
    try:
        for v1 in ax1.values:
            for v2 in ax2.values:
                p = config.params_at(**{ax1.name: v1, ax2.name: v2})
                try:
                    if p.j == 0.0:
                        # Decoupled column: count the symmetric branch
                        # only, as in the library's phase diagram.
                        branch = symmetric_branch(p)
                        counts = [sum(s is Stability.STABLE
                                      for _, s in branch), 0, len(branch)]
                    else:
                        sols = find_all_steady_states(p)
                        stable = [s for s in sols
                                  if s.stability is Stability.STABLE]
                        counts = [len(stable),
                                  sum(s.symmetry.value == "breaking"
                                      for s in stable), len(sols)]
                        for sol in sols:
                            roots.row([v1, v2] + _root_row(sol))
                except (RuntimeError, np.linalg.LinAlgError) as exc:
                    _warn(f"({ax1.name}, {ax2.name}) = ({v1:g}, {v2:g}): "
                          f"{exc}")
                    counts = [-1, -1, -1]
                writer.row([v1, v2] + counts)
    finally:
        writer.close()
        roots.close()
    return EXIT_OK


def _run_master_sweep(config: RunConfig) -> int:
    axis = config.axes[0]
    basis = FockBasis(config.n_max)
    writer = _Writer(config.out, config,
                     [axis.name, "n1", "n2", "g2_1", "g2_2", "residual",
                      "converged", "cutoff_warning"])
    guess = None
    try:
        for v in axis.values:
            p = config.params_at(**{axis.name: v})
            res = steady_state_direct(p, basis, tol=config.tol,
                                      rho_guess=guess)
            guess = res.rho_ss
            if res.cutoff_warning:
                _warn(f"{axis.name} = {v:g}: edge population above "
                      f"tolerance, raise --n-max")
            writer.row([v, res.n1, res.n2, res.g2_1, res.g2_2,
                        res.residual, res.converged, res.cutoff_warning])
    finally:
        writer.close()
    return EXIT_OK


def _run_analytic_sweep(config: RunConfig) -> int:
    axis = config.axes[0]
    writer = _Writer(config.out, config,
                     [axis.name, "n", "g2", "converged", "last_increment",
                      "validity"])
    warned = False
    try:
        for v in axis.values:
            p = config.params_at(**{axis.name: v})
            metric = validity_metric(p)
            if metric > VALIDITY_THRESHOLD and not warned:
                _warn(f"validity metric J/U = {metric:g} exceeds "
                      f"{VALIDITY_THRESHOLD:g}; the weak-tunneling series "
                      f"is outside its trust region")
                warned = True
            try:
                res = correlators(p, index_cap=config.index_cap)
            except ValueError as exc:
                _warn(f"{axis.name} = {v:g}: {exc}")
                writer.row([v, math.nan, math.nan, False, math.nan, metric])
                continue
            writer.row([v, res.n, res.g2_norm, res.converged,
                        res.last_increment, metric])
    finally:
        writer.close()
    return EXIT_OK


def _rel_diff(a: float, ref: float) -> float:
    return abs(a - ref) / abs(ref) if ref != 0.0 else math.nan


def _run_compare(config: RunConfig) -> int:
    axis = config.axes[0]
    basis = FockBasis(config.n_max)
    columns = [axis.name, "n_master", "n_analytic", "n_rel_diff",
               "g2_master", "g2_analytic", "g2_rel_diff"]
    if config.with_semiclassical:
        columns.append("n_semiclassical")
    writer = _Writer(config.out, config, columns)
    guess = None
    warned = False
    try:
        for v in axis.values:
            p = config.params_at(**{axis.name: v})
            metric = validity_metric(p)
            if metric > VALIDITY_THRESHOLD and not warned:
                _warn(f"validity metric J/U = {metric:g} exceeds "
                      f"{VALIDITY_THRESHOLD:g}; analytic column is outside "
                      f"its trust region")
                warned = True
            res = steady_state_direct(p, basis, tol=config.tol,
                                      rho_guess=guess)
            guess = res.rho_ss
            n_m = 0.5 * (res.n1 + res.n2)
            g2_m = 0.5 * (res.g2_1 + res.g2_2)
            try:
                ana = correlators(p, index_cap=config.index_cap)
                n_a, g2_a = ana.n, ana.g2_norm
            except ValueError as exc:
                _warn(f"{axis.name} = {v:g}: {exc}")
                n_a = g2_a = math.nan
            row = [v, n_m, n_a, _rel_diff(n_a, n_m),
                   g2_m, g2_a, _rel_diff(g2_a, g2_m)]
            if config.with_semiclassical:
                stable = [n for n, s in symmetric_branch(p)
                          if s is Stability.STABLE]
                row.append(stable[0] if len(stable) == 1 else math.nan)
            writer.row(row)
    finally:
        writer.close()
    return EXIT_OK


def _run_trajectories(config: RunConfig) -> int:
    params = config.base_params()
    basis = FockBasis(config.n_max)
    traj_config = TrajectoryConfig(
        n_traj=config.n_traj, t_final=config.t_final, dt=config.dt,
        seed=config.seed, sample_interval=config.sample_interval)
    # Per-trajectory seeds derive from the master seed alone, so the
    # artifacts do not depend on the worker count.
    child_seeds = np.random.SeedSequence(config.seed).generate_state(
        config.n_traj, np.uint64)
    workers = config.workers or os.cpu_count() or 1

    events = _Writer(config.out, config,
                     ["traj", "time", "channel", "n1_post", "n2_post",
                      "dn_post"])
    samples = _Writer(_sibling(config.out, "_samples"), config,
                      ["traj", "time", "n1", "n2"])
    records = []
    try:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = pool.map(
                lambda s: run_trajectory(params, basis, traj_config,
                                         seed=int(s)),
                child_seeds)
            for idx, rec in enumerate(runs):
                records.append(rec)
                if rec.norm_violation:
                    _warn(f"trajectory {idx}: norm drift detected, "
                          f"reduce --dt")
                for t, ch, a, b in zip(rec.times, rec.channels,
                                       rec.n1_post, rec.n2_post):
                    events.row([idx, float(t), int(ch), float(a), float(b),
                                float(a - b)])
                for t, a, b in rec.samples:
                    samples.row([idx, float(t), float(a), float(b)])
    finally:
        events.close()
        samples.close()

    hist_n1, hist_dn = jump_histograms(records, binning=config.binning,
                                       weighting=config.weighting)
    for hist, suffix in ((hist_n1, "_hist_n1"), (hist_dn, "_hist_dn")):
        w = _Writer(_sibling(config.out, suffix), config,
                    ["center", "lo", "hi", "weight"])
        try:
            edges = hist.edges
            for i, c in enumerate(hist.centers):
                w.row([float(c), float(edges[i]), float(edges[i + 1]),
                       float(hist.counts[i])])
        finally:
            w.close()
    return EXIT_OK


_RUNNERS = {
    "semiclassical-sweep": _run_semiclassical_sweep,
    "phase-diagram": _run_phase_diagram,
    "master-sweep": _run_master_sweep,
    "trajectories": _run_trajectories,
    "analytic-sweep": _run_analytic_sweep,
    "compare": _run_compare,
}


def run(config: RunConfig) -> int:
    """Execute a resolved configuration; returns the process exit code."""
    try:
        return _RUNNERS[config.command](config)
    except OSError as exc:
        _warn(f"I/O failure: {exc}")
        return EXIT_IO
    except UsageError as exc:
        print(f"kerrdimer: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"kerrdimer: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RuntimeError, ArithmeticError, np.linalg.LinAlgError) as exc:
        _warn(f"numerical failure: {exc}")
        return EXIT_NUMERICAL


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        config = parse_config(argv)
    except UsageError as exc:
        print(f"kerrdimer: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    return run(config)


if __name__ == "__main__":
    raise SystemExit(main())
