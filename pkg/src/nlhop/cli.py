"""Command-line interface.

Subcommands ``solve``, ``sweep``, ``evolve``, ``green`` and ``bound``.
Settings come from built-in defaults, then an optional JSON file given by
``--config``, then command-line flags (highest precedence).

Exit codes: 0 success, 1 invalid configuration, 2 non-convergence,
3 I/O failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import re
import sys
import tempfile
from dataclasses import asdict, dataclass, field, fields
from typing import List, Optional

import numpy as np

from .convergence import k_sweep, solve
from .dynamics import evolve
from .errors import ConfigError, InvalidRegime, NoConvergence, NonFinite, OddPeriod
from .green import fixed_point_residual, green_periodic
from .lattice import ModelParams, Regime, WaveField
from .nehari import SolverOptions, power_lower_bound

log = logging.getLogger("nlhop")

EXIT_OK, EXIT_CONFIG, EXIT_NOCONV, EXIT_IO = 0, 1, 2, 3


@dataclass
class EvolveSettings:
    dt: float = 1e-3
    t_end: float = 10.0
    sample_every: int = 10


@dataclass
class OutputSettings:
    dir: str = "."
    format: str = "csv"
    plot: bool = False


@dataclass
class RunConfig:
    model: ModelParams = field(default_factory=ModelParams)
    k: int = 16
    ks: List[int] = field(default_factory=lambda: [16, 32, 64, 128])
    solver: SolverOptions = field(default_factory=SolverOptions)
    evolve: EvolveSettings = field(default_factory=EvolveSettings)
    output: OutputSettings = field(default_factory=OutputSettings)


_MODEL_KEYS = ("alpha", "beta", "sigma", "omega", "regime")
_SOLVER_KEYS = tuple(f.name for f in fields(SolverOptions))


def _regime_field(exc: InvalidRegime) -> str:
    msg = str(exc)
    m = re.search(r"requires (\w+)", msg) or re.match(r"(\w+)", msg)
    name = m.group(1) if m else "regime"
    return f"model.{name if name in _MODEL_KEYS else 'regime'}"


def build_config(file_data: Optional[dict], flags: dict) -> RunConfig:
    """Merge defaults, JSON file contents and flag overrides, then validate."""
    data = {"model": {}, "solver": {}, "evolve": {}, "output": {}}
    for key, value in (file_data or {}).items():
        if key in ("model", "solver", "evolve", "output"):
            if not isinstance(value, dict):
                raise ConfigError(key, "must be an object")
            data[key].update(value)
        elif key in ("k", "ks"):
            data[key] = value
        else:
            raise ConfigError(key, "unknown configuration key")
    for key, value in flags.items():
        if value is None:
            continue
        if key in _MODEL_KEYS:
            data["model"][key] = value
        elif key in _SOLVER_KEYS:
            data["solver"][key] = value
        elif key in ("dt", "t_end", "sample_every"):
            data["evolve"][key] = value
        elif key in ("out", "format", "plot"):
            data["output"]["dir" if key == "out" else key] = value
        elif key in ("k", "ks"):
            data[key] = value

    for section, allowed in (("model", _MODEL_KEYS), ("solver", _SOLVER_KEYS),
                             ("evolve", ("dt", "t_end", "sample_every")),
                             ("output", ("dir", "format", "plot"))):
        for key in data[section]:
            if key not in allowed:
                raise ConfigError(f"{section}.{key}", "unknown key")
    try:
        model = ModelParams(**data["model"])
    except InvalidRegime as exc:
        raise ConfigError(_regime_field(exc), str(exc)) from None
    except (TypeError, ValueError) as exc:
        raise ConfigError("model", str(exc)) from None
    try:
        solver = SolverOptions(**data["solver"])
    except (TypeError, ValueError) as exc:
        raise ConfigError("solver", str(exc)) from None
    ev = EvolveSettings(**data["evolve"])
    if not ev.dt > 0:
        raise ConfigError("evolve.dt", f"must be positive, got {ev.dt}")
    if not ev.t_end > 0:
        raise ConfigError("evolve.t_end", f"must be positive, got {ev.t_end}")
    if int(ev.sample_every) < 1:
        raise ConfigError("evolve.sample_every", f"must be >= 1, got {ev.sample_every}")
    out = OutputSettings(**data["output"])
    if out.format not in ("csv", "json"):
        raise ConfigError("output.format", f"must be 'csv' or 'json', got {out.format!r}")
    cfg = RunConfig(model=model, solver=solver, evolve=ev, output=out)
    if "k" in data:
        cfg.k = data["k"]
    if "ks" in data:
        cfg.ks = data["ks"]
    if not isinstance(cfg.k, int) or cfg.k < 3:
        raise ConfigError("k", f"period must be an integer >= 3, got {cfg.k!r}")
    if not cfg.ks or any(not isinstance(k, int) or k < 3 for k in cfg.ks):
        raise ConfigError("ks", f"periods must be integers >= 3, got {cfg.ks!r}")
    if not model.focusing:
        if cfg.k % 2:
            raise ConfigError("k", "defocusing problems need an even period (staggering)")
        if any(k % 2 for k in cfg.ks):
            raise ConfigError("ks", "defocusing problems need even periods (staggering)")
    return cfg


def fmt(x) -> str:
    """Text form of a table cell; floats use 17 significant digits."""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _table_text(header, rows, fmt_name):
    if fmt_name == "json":
        cols = {h: [] for h in header}
        for row in rows:
            for h, v in zip(header, row):
                cols[h].append(v)
        return json.dumps(cols, indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_table(cfg: RunConfig, name: str, header, rows) -> str:
    ext = "json" if cfg.output.format == "json" else "csv"
    path = os.path.join(cfg.output.dir, f"{name}.{ext}")
    _atomic_write(path, _table_text(header, list(rows), cfg.output.format))
    return path


def write_summary(cfg: RunConfig, name: str, summary: dict) -> str:
    if cfg.output.format == "json":
        path = os.path.join(cfg.output.dir, f"{name}.json")
        _atomic_write(path, json.dumps(summary, indent=1, sort_keys=True) + "\n")
    else:
        path = os.path.join(cfg.output.dir, f"{name}.csv")
        header = list(summary)
        _atomic_write(path, _table_text(header, [[summary[h] for h in header]], "csv"))
    return path


def _plot_script(cfg: RunConfig, name: str, data_path: str, xcol: int, ycols, title: str,
                 logscale_y: bool = False) -> Optional[str]:
    if not cfg.output.plot:
        return None
    data_file = os.path.basename(data_path)
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"set title '{title}'",
        "set grid",
    ]
    if logscale_y:
        lines.append("set logscale y")
    plots = ", ".join(f"'{data_file}' using {xcol}:{c} with linespoints" for c in ycols)
    lines.append(f"plot {plots}")
    path = os.path.join(cfg.output.dir, f"{name}.gp")
    _atomic_write(path, "\n".join(lines) + "\n")
    return path


def read_field_csv(path: str) -> np.ndarray:
    """Values of a ``l,u_l`` ground-state CSV, in file order."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["l", "u_l"]:
        raise ConfigError("input", f"{path} must start with header 'l,u_l'")
    return np.array([float(r[1]) for r in rows[1:]])


def _params_dict(p: ModelParams) -> dict:
    d = asdict(p)
    d["regime"] = p.regime.value
    return d


def _bound_params(p: ModelParams) -> ModelParams:
    from .convergence import defocusing_reduce
    return p if p.focusing else defocusing_reduce(p)


def cmd_solve(cfg: RunConfig, args) -> int:
    p = cfg.model
    status = EXIT_OK
    try:
        gs = solve(p, cfg.k, cfg.solver)
    except NoConvergence as exc:
        log.error("%s", exc)
        if exc.best is None:
            return EXIT_NOCONV
        gs, status = exc.best, EXIT_NOCONV
    u = gs.field
    path = write_table(cfg, "ground_state", ["l", "u_l"], zip(u.indices.tolist(), u.values.tolist()))
    pmin = power_lower_bound(_bound_params(p))
    summary = {
        "k": cfg.k,
        **{f"model_{k}": v for k, v in _params_dict(p).items()},
        "m_k": gs.objective,
        "power": gs.power,
        "el_resid": gs.el_resid,
        "nehari_resid": gs.nehari_resid,
        "P_min": pmin,
        "power_margin": gs.power - pmin,
        "iterations": gs.iterations,
        "restarts": gs.restarts,
        "converged": status == EXIT_OK,
    }
    if p.focusing:
        summary["fixed_point_resid"] = fixed_point_residual(u, p)
    write_summary(cfg, "summary", summary)
    _plot_script(cfg, "ground_state", path, 1, [2], f"ground state, k={cfg.k}")
    for key in ("m_k", "power", "P_min", "power_margin", "el_resid"):
        print(f"{key} = {fmt(summary[key])}")
    return status


def cmd_sweep(cfg: RunConfig, args) -> int:
    report = k_sweep(cfg.model, cfg.ks, cfg.solver, workers=getattr(args, "workers", 1) or 1)
    rows = [(r.k, r.m_k, r.power, r.el_resid, r.distance_to_ref) for r in report.records]
    path = write_table(cfg, "sweep", ["k", "m_k", "power", "el_resid", "distance_to_ref"], rows)
    _plot_script(cfg, "sweep", path, 1, [5], "aligned distance to reference", logscale_y=True)
    for r in report.records:
        print(f"k={r.k} m_k={fmt(r.m_k)} distance_to_ref={fmt(r.distance_to_ref)}"
              + ("" if r.ok else f" FAILED: {r.error}"))
    print(f"objective gaps decreasing: {report.gaps_decreasing()}")
    print(f"distances decreasing: {report.distances_decreasing()}")
    return EXIT_OK if report.all_ok else EXIT_NOCONV


def cmd_evolve(cfg: RunConfig, args) -> int:
    p = cfg.model
    if getattr(args, "input", None):
        values = read_field_csv(args.input)
        psi0 = WaveField(values.astype(complex))
    else:
        try:
            gs = solve(p, cfg.k, cfg.solver)
        except NoConvergence as exc:
            log.error("%s", exc)
            return EXIT_NOCONV
        psi0 = WaveField.from_real(gs.field)
    ev = cfg.evolve
    try:
        trace = evolve(psi0, p, dt=ev.dt, t_end=ev.t_end, sample_every=int(ev.sample_every))
    except ValueError as exc:
        raise ConfigError("evolve.dt", str(exc)) from None
    except NonFinite as exc:
        log.error("%s", exc)
        return EXIT_NOCONV
    path = write_table(cfg, "evolve", ["t", "power", "energy", "modulus_dev"], trace.rows())
    _plot_script(cfg, "evolve", path, 1, [4], "modulus deviation", logscale_y=False)
    print(f"power drift = {fmt(trace.power_drift())}")
    print(f"energy drift = {fmt(trace.energy_drift())}")
    print(f"max modulus deviation = {fmt(float(np.max(trace.modulus_dev)))}")
    return EXIT_OK


def cmd_green(cfg: RunConfig, args) -> int:
    omega = cfg.model.omega
    if not omega < 0:
        raise ConfigError("model.omega", f"green requires omega < 0, got omega={omega}")
    g = green_periodic(cfg.k, omega)
    idx = list(range(-(cfg.k // 2), cfg.k - cfg.k // 2))
    rows = [(n, m, g.entries[i, j]) for i, n in enumerate(idx) for j, m in enumerate(idx)]
    path = write_table(cfg, "green", ["n", "m", "value"], rows)
    if cfg.output.plot:
        _atomic_write(os.path.join(cfg.output.dir, "green.gp"),
                      "set datafile separator ','\nset key autotitle columnhead\n"
                      f"set title 'Green function, k={cfg.k}, omega={fmt(omega)}'\n"
                      f"plot '{os.path.basename(path)}' using 1:($2==0 ? $3 : 1/0) with linespoints\n")
    print(f"wrote {len(rows)} entries to {path}")
    return EXIT_OK


def cmd_bound(cfg: RunConfig, args) -> int:
    p = _bound_params(cfg.model)
    pmin = power_lower_bound(p)
    residual = p.beta * pmin**p.sigma + 2.0 * p.alpha * pmin - abs(p.omega)
    path = write_table(cfg, "bound", ["sigma", "alpha", "beta", "omega", "P_min", "residual"],
                       [(p.sigma, p.alpha, p.beta, p.omega, pmin, residual)])
    _plot_script(cfg, "bound", path, 5, [6], "power lower bound")
    print(f"P_min = {fmt(pmin)}")
    print(f"residual = {fmt(residual)}")
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "evolve": cmd_evolve,
    "green": cmd_green,
    "bound": cmd_bound,
}


def _global_flags(parser, suppress):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=default, help="JSON configuration file")
    parser.add_argument("--out", default=default, help="output directory")
    parser.add_argument("--format", choices=("csv", "json"), default=default)
    parser.add_argument("--seed", type=int, default=default)
    parser.add_argument("--plot", action="store_const", const=True, default=default,
                        help="also write a gnuplot script next to the data")
    parser.add_argument("-v", "--verbose", action="store_const", const=True, default=default)


def _ks(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nlhop", description=__doc__.splitlines()[0])
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    g = common.add_argument_group("model")
    g.add_argument("--alpha", type=float)
    g.add_argument("--beta", type=float)
    g.add_argument("--sigma", type=float)
    g.add_argument("--omega", type=float)
    g.add_argument("--regime", choices=[r.value for r in Regime])
    g.add_argument("--k", type=int, help="ring period")
    s = common.add_argument_group("solver")
    s.add_argument("--tol", type=float)
    s.add_argument("--max-iter", dest="max_iter", type=int)
    s.add_argument("--restarts", type=int)
    s.add_argument("--step0", type=float)
    s.add_argument("--armijo-c", dest="armijo_c", type=float)

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common], help="periodic ground state")
    sp = sub.add_parser("sweep", parents=[common], help="k-sweep convergence report")
    sp.add_argument("--ks", type=_ks, help="comma-separated periods")
    sp.add_argument("--workers", type=int, default=1)
    ep = sub.add_parser("evolve", parents=[common], help="time evolution of a ground state")
    ep.add_argument("--dt", type=float)
    ep.add_argument("--t-end", dest="t_end", type=float)
    ep.add_argument("--sample-every", dest="sample_every", type=int)
    ep.add_argument("--input", help="ground-state CSV (l,u_l) to evolve instead of solving")
    sub.add_parser("green", parents=[common], help="periodic Green function entries")
    sub.add_parser("bound", parents=[common], help="power lower bound")
    return parser


def _load_config_file(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON in {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config", "top level must be a JSON object")
    return data


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    flags = {k: v for k, v in vars(args).items()
             if k not in ("command", "config", "verbose", "input", "workers")}
    try:
        file_data = _load_config_file(args.config) if args.config else None
        cfg = build_config(file_data, flags)
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, OddPeriod) as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
