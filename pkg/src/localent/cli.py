"""Command-line driver: figure CSVs, point queries and the validation sweep.

Every command accepts ``--config FILE`` with ``key = value`` lines (``#``
starts a comment); flags given on the command line override the file.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import gaussian_reference as gref
from .errors import LocalEntError, ParameterError
from .extraction import simulate_extraction
from .grid import _check_budget, region_sweep
from .local_measures import (
    local_density_report,
    mixed_concurrence_density,
    negativity_coeffs,
    negativity_density,
)
from .qubit_reduction import Region, project_two_qubit
from .state_model import derivative_block, ground_state, make_system, thermal_state
from .two_qubit import measures
from .validation import parse_sizes

UNITS = "# lengths in (m w)^-1/2, densities in m*w, T in units of w"
FLOAT = "%.10e"


@dataclass
class RunConfig:
    command: str
    m: float = 1.0
    omega: float = 1.0
    alpha: float = 0.0
    temp: float = 0.0
    center: tuple = (0.0, 0.0)
    a: float = 0.05
    b: float | None = None
    sizes: list = field(default_factory=list)
    alphas: list = field(default_factory=list)
    tmin: float = 0.01
    tmax: float = 2.0
    dt: float = 0.01
    mode: str = "ground"
    grid_n: int = 256
    quad_order: int = 16
    jobs: int = 1
    out: str | None = None
    seed: int = 2024


def _pair(text):
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 'x,y', got {text!r}")
    return tuple(float(p) for p in parts)


def _float_list(text):
    return [float(p) for p in text.split(",") if p.strip()]


def _sizes(text):
    try:
        return list(parse_sizes(text))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def read_config(path):
    """Parse a ``key = value`` file into a dict of strings."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep or not key.strip():
                raise ParameterError(f"{path}:{lineno}: expected 'key = value'")
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _system_args(p, alpha=0.0):
    p.add_argument("--m", type=float, default=1.0, help="oscillator mass")
    p.add_argument("--omega", type=float, default=1.0, help="bare frequency")
    p.add_argument("--alpha", type=float, default=alpha, help="dimensionless coupling")


def _state_args(p):
    _system_args(p)
    p.add_argument("--mode", choices=("ground", "thermal"), default="ground")
    p.add_argument("--temp", type=float, default=0.0, help="temperature (thermal mode)")
    p.add_argument("--center", type=_pair, default=(0.0, 0.0), help="region centre 'qA,qB'")


class _Parser(argparse.ArgumentParser):
    # one-line diagnostics instead of the usage dump
    def error(self, message):
        raise ParameterError(f"{self.prog}: {message}")


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--config", help="key = value file; flags take precedence")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--jobs", type=int, default=1, help="concurrent sweep points")
    common.add_argument("--seed", type=int, default=2024, help="seed for randomized checks")

    parser = _Parser(prog="localent", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fig1", parents=[common], help="entropy against region size (CSV)")
    _system_args(p, alpha=10.0)
    p.add_argument("--sizes", type=_sizes, default=_sizes("0.05:8:log24"), help="full widths 2a")
    p.add_argument("--center", type=_pair, default=(0.0, 0.0))
    p.add_argument("--grid-n", type=int, default=256)

    p = sub.add_parser("fig2", parents=[common], help="local and global entanglement against T (CSV)")
    _system_args(p)
    p.add_argument("--alphas", type=_float_list, default=[0.5, 2.0])
    p.add_argument("--tmin", type=float, default=0.01)
    p.add_argument("--tmax", type=float, default=2.0)
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--center", type=_pair, default=(0.0, 0.0))

    p = sub.add_parser("density", parents=[common], help="c, n and their coefficients at a point")
    _state_args(p)

    p = sub.add_parser("reduce", parents=[common], help="two-qubit state of a region and its measures")
    _state_args(p)
    p.add_argument("--a", type=float, default=0.05, help="half-width for Alice")
    p.add_argument("--b", type=float, default=None, help="half-width for Bob (default: a)")
    p.add_argument("--quad-order", type=int, default=16)

    p = sub.add_parser("extract", parents=[common], help="swap the local entanglement onto ancillas")
    _system_args(p, alpha=10.0)
    p.add_argument("--center", type=_pair, default=(0.0, 0.0))
    p.add_argument("--a", type=float, default=0.05)
    p.add_argument("--b", type=float, default=None)
    p.add_argument("--grid-n", type=int, default=96)

    sub.add_parser("sweep-validate", parents=[common], help="run every acceptance check")
    return parser


def parse_config(argv=None) -> RunConfig:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            file_values = read_config(args.config)
        except OSError as exc:
            raise ParameterError(f"cannot read config: {exc}") from exc
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = sorted(set(file_values) - known - {"command"})
        if unknown:
            raise ParameterError(f"unknown config keys: {', '.join(unknown)}")
        file_values.pop("command", None)
        # string defaults go through each option's type converter
        sub.set_defaults(**file_values)
        args = parser.parse_args(argv)
    values = {k: v for k, v in vars(args).items() if k in RunConfig.__dataclass_fields__}
    cfg = RunConfig(**values)
    if cfg.jobs < 1:
        raise ParameterError(f"--jobs must be >= 1, got {cfg.jobs}")
    return cfg


def _state(cfg):
    sys_ = make_system(cfg.m, cfg.omega, cfg.alpha)
    if cfg.mode == "thermal" and cfg.temp > 0:
        return thermal_state(sys_, cfg.temp)
    return ground_state(sys_)


def _fmt(x):
    return "nan" if x is None else FLOAT % x


def _write_csv(cfg, header, rows):
    buf = io.StringIO()
    buf.write(UNITS + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    _emit(cfg, buf.getvalue())


def _emit(cfg, text):
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _ordered_map(cfg, fn, points):
    if cfg.jobs == 1:
        return [fn(p) for p in points]
    with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
        return list(pool.map(fn, points))


def cmd_fig1(cfg):
    _check_budget(cfg.grid_n)
    sys_ = make_system(cfg.m, cfg.omega, cfg.alpha)
    state = ground_state(sys_)

    def row(two_a):
        r = region_sweep(state, [two_a], center=cfg.center, n=cfg.grid_n)[0]
        return (r.two_a, r.S_full_bits, r.S_twolevel_bits, r.c_estimate)

    rows = _ordered_map(cfg, row, cfg.sizes)
    _write_csv(cfg, ["two_a", "S_full_bits", "S_twolevel_bits", "c_estimate"], rows)


def temperature_grid(tmin, tmax, dt):
    if not (0 < tmin <= tmax and dt > 0):
        raise ParameterError(f"need 0 < tmin <= tmax and dt > 0 (got {tmin}, {tmax}, {dt})")
    n = int(np.floor((tmax - tmin) / dt + 1e-9)) + 1
    return [round(tmin + k * dt, 12) for k in range(n)]


def cmd_fig2(cfg):
    points = [(alpha, T) for alpha in cfg.alphas for T in temperature_grid(cfg.tmin, cfg.tmax, cfg.dt)]

    def row(point):
        alpha, T = point
        sys_ = make_system(cfg.m, cfg.omega, alpha)
        st = thermal_state(sys_, T)
        n = negativity_density(negativity_coeffs(derivative_block(st, cfg.center))).n
        c = mixed_concurrence_density(st, cfg.center)
        ng = gref.global_negativity(gref.covariance_from_system(sys_, T))
        return (T, alpha, n, c, ng)

    rows = _ordered_map(cfg, row, points)
    _write_csv(cfg, ["T", "alpha", "n_local", "c_local", "N_global"], rows)


def _kv(items):
    return "".join(f"{k} = {_fmt(v) if not isinstance(v, str) else v}\n" for k, v in items)


def cmd_density(cfg):
    st = _state(cfg)
    coeffs = negativity_coeffs(derivative_block(st, cfg.center))
    rep = local_density_report(st, cfg.center)
    _emit(cfg, _kv([
        ("c", rep.c), ("n", rep.n), ("D1", coeffs.D1), ("D2", coeffs.D2), ("C1", coeffs.C1),
        ("optimal_a_over_b", rep.optimal_ratio),
    ]))


def _region(cfg):
    return Region(cfg.center, (cfg.a, cfg.a if cfg.b is None else cfg.b))


def cmd_reduce(cfg):
    region = _region(cfg)
    tq, p = project_two_qubit(_state(cfg), region, cfg.quad_order)
    rep = measures(tq)
    lines = [f"# two-qubit state, basis |A0B0>, |A0B1>, |A1B0>, |A1B1>; provenance: {tq.provenance}\n"]
    for r in tq.matrix:
        lines.append(" ".join("%.10e%+.10ej" % (z.real, z.imag) for z in r) + "\n")
    ab = region.a * region.b
    lines.append(_kv([
        ("p_region", p), ("concurrence", rep.concurrence), ("concurrence_over_ab", rep.concurrence / ab),
        ("tangle", rep.tangle), ("eof_bits", rep.eof), ("negativity", rep.negativity),
        ("negativity_over_ab", rep.negativity / ab), ("entropy_A_bits", rep.entropy_A),
        ("entropy_B_bits", rep.entropy_B),
    ]))
    _emit(cfg, "".join(lines))


def cmd_extract(cfg):
    _check_budget(cfg.grid_n)
    C, rep = simulate_extraction(ground_state(make_system(cfg.m, cfg.omega, cfg.alpha)), _region(cfg), cfg.grid_n)
    _emit(cfg, _kv([
        ("ancilla_concurrence", C), ("region_concurrence", rep.reference_concurrence),
        ("relative_deviation", rep.relative_deviation), ("leakage", rep.leakage),
        ("lambda3_over_lambda2", rep.lambda_ratio),
    ]))


def cmd_sweep_validate(cfg):
    from . import validation

    buf = io.StringIO()
    failed = 0
    for fn in validation.ALL_CHECKS:
        res = fn(seed=cfg.seed) if fn is validation.check_two_qubit_oracles else fn()
        failed += not res.passed
        buf.write(res.line() + "\n")
        if res.informational:
            buf.write(f"     info: {res.informational}\n")
    buf.write(f"{len(validation.ALL_CHECKS) - failed}/{len(validation.ALL_CHECKS)} checks passed\n")
    _emit(cfg, buf.getvalue())
    return 3 if failed else 0


COMMANDS = {
    "fig1": cmd_fig1,
    "fig2": cmd_fig2,
    "density": cmd_density,
    "reduce": cmd_reduce,
    "extract": cmd_extract,
    "sweep-validate": cmd_sweep_validate,
}


def run(cfg: RunConfig) -> int:
    return COMMANDS[cfg.command](cfg) or 0


def main(argv=None) -> int:
    try:
        return run(parse_config(argv))
    except LocalEntError as exc:
        print(f"localent: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (np.linalg.LinAlgError, FloatingPointError, ArithmeticError) as exc:
        print(f"localent: numerical error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"localent: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"localent: error: {exc}", file=sys.stderr)
        return 2
