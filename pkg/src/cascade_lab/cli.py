"""Command-line front end.

Five subcommands: invariants, solve-ep, solve-hs, transform, verify-cascade.
Options can come from a flat key=value config file (--config); flags
override file values.  Exit codes: 0 success, 1 a verification check
failed, 2 config/parse/IO errors.

Output formats are byte-deterministic: JSON reports have sorted keys and
floats printed with 17 significant digits; CSV grids are row-major in the
first coordinate with a header row, '.' decimal separator, ',' field
separator, and '\\n' line ends.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import contact, laplace
from .exprlang import ExprError, parse
from .fields import GridSpec, Point, SingularDomainError, fd_jet1, grid_verify
from .laplace import SolutionSpec
from .quadrature import QuadratureError


class ConfigError(Exception):
    pass


class ReportIOError(Exception):
    def __init__(self, path, cause):
        super().__init__(f"cannot write {path!r}: {cause}")
        self.path = path
        self.cause = cause


# --------------------------------------------------------------------------
# Deterministic rendering.


def format_float(v: float) -> str:
    return format(v, ".17g")


def render_json(v, level: int = 0) -> str:
    pad = "  " * level
    if isinstance(v, dict):
        if not v:
            return "{}"
        items = [
            f'{pad}  "{k}": {render_json(v[k], level + 1)}' for k in sorted(v)
        ]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(render_json(item, level) for item in v) + "]"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format_float(v)
    if v is None:
        return "null"
    return json.dumps(v)


def emit_report(data: dict, path: Optional[str]) -> None:
    """Write a JSON report (sorted keys, 17 significant digits) to a file,
    or to stdout when no path is given."""
    text = render_json(data) + "\n"
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ReportIOError(path, exc) from exc


def write_csv(path: str, header: list[str], rows) -> None:
    try:
        with open(path, "w", newline="") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(format_float(float(v)) for v in row) + "\n")
    except OSError as exc:
        raise ReportIOError(path, exc) from exc


# --------------------------------------------------------------------------
# Configuration.


@dataclass
class RunConfig:
    command: str
    kappa: float = 0.0
    s_text: str = "0"
    r_text: str = "1"
    mode: str = laplace.BASE_POINT
    x0: float = 0.0
    quad_tol: float = 1e-10
    t_min: float = 0.5
    t_max: float = 1.5
    x_min: float = 0.5
    x_max: float = 1.5
    n_t: int = 11
    n_x: int = 11
    h: float = 1e-3
    tol: float = 1e-8
    fd: bool = False
    jet: Optional[tuple] = None
    x_lo: float = 0.1
    x_hi: float = 10.0
    root_tol: float = 1e-12
    max_iter: int = 200
    bracket_growth: float = 1.6
    output: Optional[str] = None
    report: Optional[str] = None
    plot: bool = False


_GRID_KEYS = ("t_min", "t_max", "x_min", "x_max")
_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _read_config_file(path: str) -> dict[str, str]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
    values: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, _, value = stripped.partition("=")
        values[key.strip()] = value.strip()
    return values


def _cast(raw: str, kind, key: str):
    if kind is bool:
        low = raw.lower()
        if low in _TRUE:
            return True
        if low in _FALSE:
            return False
        raise ConfigError(f"option {key!r}: expected a boolean, got {raw!r}")
    try:
        return kind(raw)
    except ValueError as exc:
        raise ConfigError(f"option {key!r}: {exc}") from exc


class _Options:
    """Flag values merged over config-file values merged over defaults."""

    def __init__(self, args, file_values):
        self.args = args
        self.file_values = file_values

    def get(self, key: str, kind, default=None, required: bool = False):
        value = getattr(self.args, key, None)
        if value is None and key in self.file_values:
            value = _cast(self.file_values[key], kind, key)
        if value is None:
            value = default
        if value is None and required:
            raise ConfigError(f"missing required option '{key}'")
        return value


def _parse_jet_text(text: str) -> tuple:
    parts = text.split(",")
    if len(parts) != 5:
        raise ConfigError(
            f"--jet needs five comma-separated reals t,x,u,u_t,u_x, got {text!r}"
        )
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"--jet: {exc}") from exc


def _check_expr(text: str, label: str) -> str:
    try:
        parse(text)
    except ExprError as exc:
        raise ConfigError(f"{label}: {exc}") from exc
    return text


def _resolve(args) -> RunConfig:
    file_values = _read_config_file(args.config) if getattr(args, "config", None) else {}
    opt = _Options(args, file_values)
    cfg = RunConfig(command=args.command)

    cfg.kappa = opt.get("kappa", float, required=True)
    if cfg.kappa == 0:
        raise ConfigError("kappa must be nonzero")

    if cfg.command in ("invariants", "solve-ep", "solve-hs", "verify-cascade"):
        for key in _GRID_KEYS:
            setattr(cfg, key, opt.get(key, float, getattr(cfg, key)))
        cfg.n_t = opt.get("nt", int, cfg.n_t)
        cfg.n_x = opt.get("nx", int, cfg.n_x)
        if cfg.n_t < 2 or cfg.n_x < 2:
            raise ConfigError("grid counts must be at least 2")
        if not (cfg.t_min < cfg.t_max and cfg.x_min < cfg.x_max):
            raise ConfigError("grid rectangle must have positive extent")
        cfg.h = opt.get("h", float, cfg.h)
        if cfg.h <= 0:
            raise ConfigError("h must be positive")
        if cfg.command != "solve-hs" and cfg.t_min + cfg.x_min <= 0:
            raise ConfigError(
                "grid rectangle must satisfy t + x > 0 everywhere "
                f"(corner sum is {cfg.t_min + cfg.x_min!r})"
            )

    if cfg.command in ("solve-ep", "solve-hs", "verify-cascade"):
        cfg.s_text = _check_expr(opt.get("S", str, "0"), "S")
        cfg.r_text = _check_expr(opt.get("R", str, "1"), "R")
        cfg.mode = opt.get("mode", str, laplace.BASE_POINT)
        if cfg.mode not in (laplace.NATURAL, laplace.BASE_POINT):
            raise ConfigError(
                f"mode must be 'natural' or 'base-point', got {cfg.mode!r}"
            )
        cfg.x0 = opt.get("x0", float, 0.0)
        cfg.quad_tol = opt.get("quad_tol", float, 1e-10)
        if cfg.quad_tol <= 0:
            raise ConfigError("quad-tol must be positive")

    default_tol = {
        "invariants": 1e-9,
        "solve-ep": 1e-8,
        "solve-hs": 1e-6,
        "verify-cascade": 1e-8,
    }
    if cfg.command in default_tol:
        cfg.tol = opt.get("tol", float, default_tol[cfg.command])
        if cfg.tol <= 0:
            raise ConfigError("tol must be positive")

    if cfg.command == "invariants":
        cfg.fd = opt.get("fd", bool, False)

    if cfg.command == "solve-hs":
        cfg.x_lo = opt.get("x_lo", float, cfg.x_lo)
        cfg.x_hi = opt.get("x_hi", float, cfg.x_hi)
        cfg.root_tol = opt.get("root_tol", float, cfg.root_tol)
        cfg.max_iter = opt.get("max_iter", int, cfg.max_iter)
        cfg.bracket_growth = opt.get("bracket_growth", float, cfg.bracket_growth)

    if cfg.command == "transform":
        jet_text = opt.get("jet", str, required=True)
        cfg.jet = _parse_jet_text(jet_text)

    cfg.output = opt.get("output", str)
    cfg.report = opt.get("report", str)
    cfg.plot = opt.get("plot", bool, False)
    if cfg.command in ("solve-ep", "solve-hs") and not cfg.output:
        raise ConfigError(f"{cfg.command} requires --output for the CSV grid")
    if cfg.plot and not (cfg.output or cfg.report):
        raise ConfigError("--plot requires --output or --report")
    return cfg


def _grid(cfg: RunConfig) -> GridSpec:
    return GridSpec(cfg.t_min, cfg.t_max, cfg.x_min, cfg.x_max, cfg.n_t, cfg.n_x)


def _solution_spec(cfg: RunConfig) -> SolutionSpec:
    try:
        return SolutionSpec.from_strings(
            cfg.kappa,
            cfg.s_text,
            cfg.r_text,
            mode=cfg.mode,
            x0=cfg.x0,
            quad_tol=cfg.quad_tol,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _plot_target(cfg: RunConfig) -> Path:
    return Path(cfg.output or cfg.report).with_suffix(".png")


# --------------------------------------------------------------------------
# Command implementations.


def _cmd_invariants(cfg: RunConfig) -> int:
    coeffs = laplace.ep_coeffs(cfg.kappa)
    if cfg.fd:
        coeffs = laplace.without_exact_partials(coeffs)
    grid = _grid(cfg)
    samples = []
    max_dev = 0.0
    for p in grid.points():
        si = laplace.semi_invariants(coeffs, p)
        inv = laplace.ovsiannikov_invariants(coeffs, p)
        samples.append([p.t, p.x, si.h, si.k, inv.p, inv.q])
        max_dev = max(max_dev, abs(inv.p + inv.q - 2.0))
    passed = max_dev <= cfg.tol
    payload = {
        "command": "invariants",
        "equation": "ep",
        "kappa": cfg.kappa,
        "grid": grid.as_list(),
        "path": "fd" if cfg.fd else "exact",
        "P": samples[0][4],
        "Q": samples[0][5],
        "max_pq_deviation": max_dev,
        "samples": samples,
        "tol": cfg.tol,
        "pass": passed,
    }
    emit_report(payload, cfg.output)
    if cfg.plot:
        from . import plots

        h_grid = [
            [row[2] for row in samples[i * grid.n_x : (i + 1) * grid.n_x]]
            for i in range(grid.n_t)
        ]
        plots.save_heatmap(
            grid.t_values(),
            grid.x_values(),
            h_grid,
            _plot_target(cfg),
            title=f"semi-invariant H, kappa={cfg.kappa}",
            cbar_label="H",
        )
    return 0 if passed else 1


def _solve_grid_rows(field, grid: GridSpec):
    rows = []
    for t in grid.t_values():
        for x in grid.x_values():
            rows.append((t, x, field(t, x)))
    return rows


def _emit_solution(cfg: RunConfig, field, header, report) -> None:
    grid = _grid(cfg)
    rows = _solve_grid_rows(field, grid)
    write_csv(cfg.output, header, rows)
    report_path = cfg.report or str(Path(cfg.output).with_suffix(".verify.json"))
    emit_report(report.to_json_dict(), report_path)
    if cfg.plot:
        from . import plots

        values = [
            [rows[i * grid.n_x + j][2] for j in range(grid.n_x)]
            for i in range(grid.n_t)
        ]
        plots.save_heatmap(
            grid.t_values(),
            grid.x_values(),
            values,
            _plot_target(cfg),
            title=f"{header[2]} on the grid, kappa={cfg.kappa}",
            xlabel=header[1],
            ylabel=header[0],
            cbar_label=header[2],
        )


def _cmd_solve_ep(cfg: RunConfig) -> int:
    spec = _solution_spec(cfg)
    u = laplace.general_solution_u(spec)
    report = grid_verify(u, "ep", cfg.kappa, _grid(cfg), cfg.h, cfg.tol)
    _emit_solution(cfg, u, ["t", "x", "u"], report)
    return 0 if report.passed else 1


def _cmd_solve_hs(cfg: RunConfig) -> int:
    spec = _solution_spec(cfg)
    try:
        ps = contact.PushforwardSolution(
            spec,
            cfg.x_lo,
            cfg.x_hi,
            bracket_growth=cfg.bracket_growth,
            root_tol=cfg.root_tol,
            max_iter=cfg.max_iter,
        )
    except contact.DegenerateSolutionError as exc:
        raise ConfigError(str(exc)) from exc
    field = contact.pushforward_field(ps)
    report = grid_verify(field, "hs", cfg.kappa, _grid(cfg), cfg.h, cfg.tol)
    _emit_solution(cfg, field, ["t_tilde", "x_tilde", "u_tilde"], report)
    return 0 if report.passed else 1


def _cmd_transform(cfg: RunConfig) -> int:
    from .fields import Jet1

    jet = Jet1(*cfg.jet)
    image = contact.psi_forward(jet, cfg.kappa)
    back = contact.psi_inverse(image, cfg.kappa)
    round_trip = max(
        abs(back.t - jet.t),
        abs(back.x - jet.x),
        abs(back.u - jet.u),
        abs(back.u_t - jet.u_t),
        abs(back.u_x - jet.u_x),
    )
    payload = {
        "command": "transform",
        "kappa": cfg.kappa,
        "jet": [jet.t, jet.x, jet.u, jet.u_t, jet.u_x],
        "image": [image.t, image.x, image.u, image.u_t, image.u_x],
        "round_trip_max_abs_error": round_trip,
    }
    emit_report(payload, cfg.output)
    return 0


def _cmd_verify_cascade(cfg: RunConfig) -> int:
    spec = _solution_spec(cfg)
    u = laplace.general_solution_u(spec)
    v = laplace.general_solution_v(spec)
    w = laplace.cascade_w_field(spec)
    grid = _grid(cfg)
    b1 = b2 = b3b4 = anti = 0.0
    dt = 1e-5
    for p in grid.points():
        u_jet = fd_jet1(u, p, cfg.h)
        b1 = max(b1, abs(laplace.u_to_v(u_jet, cfg.kappa) - v(p.t, p.x)))
        b2 = max(b2, abs(laplace.v_to_u(v, cfg.kappa, p) - u(p.t, p.x)))
        b3b4 = max(b3b4, abs(laplace.w_ode_residual(w, cfg.kappa, p)))
        a1_hi, _ = laplace.antiderivative_pair(spec, Point(p.t + dt, p.x))
        a1_lo, _ = laplace.antiderivative_pair(spec, Point(p.t - dt, p.x))
        _, a2 = laplace.antiderivative_pair(spec, p)
        anti = max(anti, abs((a1_hi - a1_lo) / (2 * dt) - a2 / cfg.kappa))
    passed = max(b1, b2, b3b4, anti) <= cfg.tol
    payload = {
        "command": "verify-cascade",
        "kappa": cfg.kappa,
        "grid": grid.as_list(),
        "mode": cfg.mode,
        "b1_max_abs": b1,
        "b2_max_abs": b2,
        "b3b4_max_abs": b3b4,
        "antiderivative_max_abs": anti,
        "tol": cfg.tol,
        "pass": passed,
    }
    emit_report(payload, cfg.output)
    if cfg.plot:
        from . import plots

        plots.save_residual_bars(
            ["first substitution", "back substitution", "intermediate ODE", "antiderivative pair"],
            [b1, b2, b3b4, anti],
            _plot_target(cfg),
            title=f"cascade chain residuals, kappa={cfg.kappa}",
        )
    return 0 if passed else 1


_COMMANDS = {
    "invariants": _cmd_invariants,
    "solve-ep": _cmd_solve_ep,
    "solve-hs": _cmd_solve_hs,
    "transform": _cmd_transform,
    "verify-cascade": _cmd_verify_cascade,
}


def run_command(cfg: RunConfig) -> int:
    """Dispatch a resolved configuration; returns the process exit code."""
    return _COMMANDS[cfg.command](cfg)


# --------------------------------------------------------------------------
# Argument parsing.


def _add_common(p, *, grid=True, solution=False):
    p.add_argument("--kappa", type=float, help="family parameter (nonzero)")
    p.add_argument("--config", help="flat key=value config file; flags override")
    p.add_argument("--output", "-o", help="output path")
    if grid:
        p.add_argument("--t-min", dest="t_min", type=float)
        p.add_argument("--t-max", dest="t_max", type=float)
        p.add_argument("--x-min", dest="x_min", type=float)
        p.add_argument("--x-max", dest="x_max", type=float)
        p.add_argument("--nt", type=int, help="grid count in the first coordinate")
        p.add_argument("--nx", type=int, help="grid count in the second coordinate")
        p.add_argument("--h", type=float, help="finite-difference step (default 1e-3)")
        p.add_argument("--tol", type=float, help="pass/fail tolerance")
        p.add_argument(
            "--plot",
            action="store_const",
            const=True,
            help="also render a PNG figure next to the output",
        )
    if solution:
        p.add_argument("--S", help="S(t) expression (default '0')")
        p.add_argument("--R", help="R(x) expression (default '1')")
        p.add_argument("--mode", choices=[laplace.NATURAL, laplace.BASE_POINT])
        p.add_argument("--x0", type=float, help="shared base point (base-point mode)")
        p.add_argument("--quad-tol", dest="quad_tol", type=float)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cascade-lab",
        description=(
            "Invariants, cascade integration, and contact-transform solution "
            "synthesis for the Euler-Poisson / generalized Hunter-Saxton pair."
        ),
    )
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser(
        "invariants", help="sample H, K, P, Q on a grid and check P+Q=2"
    )
    _add_common(p)
    p.add_argument(
        "--fd",
        action="store_const",
        const=True,
        help="use the finite-difference fallback instead of exact partials",
    )

    p = sub.add_parser(
        "solve-ep", help="emit a CSV grid of the linear-side general solution"
    )
    _add_common(p, solution=True)
    p.add_argument("--report", help="verification JSON path (default: <output>.verify.json)")

    p = sub.add_parser(
        "solve-hs",
        help="emit a CSV grid of the explicit nonlinear-side solution "
        "(grid flags are the tilded rectangle)",
    )
    _add_common(p, solution=True)
    p.add_argument("--report", help="verification JSON path (default: <output>.verify.json)")
    p.add_argument("--x-lo", dest="x_lo", type=float, help="working x-interval lower end")
    p.add_argument("--x-hi", dest="x_hi", type=float, help="working x-interval upper end")
    p.add_argument("--root-tol", dest="root_tol", type=float)
    p.add_argument("--max-iter", dest="max_iter", type=int)
    p.add_argument("--bracket-growth", dest="bracket_growth", type=float)

    p = sub.add_parser(
        "transform", help="map a source jet through the contact transformation"
    )
    _add_common(p, grid=False)
    p.add_argument("--jet", help="five comma-separated reals t,x,u,u_t,u_x")

    p = sub.add_parser(
        "verify-cascade", help="check the substitution chain residuals on a grid"
    )
    _add_common(p, solution=True)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 2
    try:
        cfg = _resolve(args)
        return run_command(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ReportIOError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ExprError, QuadratureError, ValueError) as exc:
        # Domain violations (singular rectangle, unattainable x~, ...) are
        # configuration-class failures, not verification failures.
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
