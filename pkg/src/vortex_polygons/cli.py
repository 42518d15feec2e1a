"""Command-line front end.

Every subcommand writes JSON (default) or CSV to standard output or to
``--output``. Options can also come from a JSON file given with
``--config``; flags on the command line take precedence over the file.

Exit status: 0 on success, 2 for invalid input, 3 when a computation
cannot be carried out (for instance when co-rotation hypotheses are unmet).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .core import VortexError, VortexSystem
from .corotating import (
    corotating_absolute,
    corotating_json,
    corotating_nested,
    corotating_single,
)
from .dynamics import EquilibriumReport, classify, integrate
from .nested import (
    Alignment,
    NestedPolygonConfig,
    absolute_equilibrium,
    classify_regime,
    scan_regimes,
    solve_nested,
    write_scan_csv,
)
from .polygon import PolygonRing, circulant_spectrum, vorticity_solution_space

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_COMPUTE = 3

COMMANDS = (
    "verify",
    "solve-nested",
    "classify-regime",
    "scan",
    "corotate",
    "simulate",
    "spectrum",
    "rigidity",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def _parse_point(text: str) -> complex:
    try:
        x, y = (float(v) for v in str(text).split(","))
    except ValueError:
        raise UsageError(f"expected a point as 'x,y', got {text!r}") from None
    return complex(x, y)


def _parse_ratios(text: str) -> tuple[float, float, int]:
    try:
        start, stop, count = str(text).split(":")
        return float(start), float(stop), int(count)
    except ValueError:
        raise UsageError(f"expected --ratios start:stop:count, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vortex-polygons", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="JSON file whose keys mirror the flags")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--format", choices=("json", "csv"))
        p.add_argument("--output", help="output file (default: standard output)")
        p.add_argument("--config", dest="sub_config", help=argparse.SUPPRESS)

    p = sub.add_parser("verify", help="classify a vortex system read from JSON")
    p.add_argument("--input")
    p.add_argument("--tol", type=float)
    common(p)

    p = sub.add_parser("solve-nested", help="all two-ring relative equilibria")
    p.add_argument("--n", type=int)
    p.add_argument("--gamma1", type=float)
    p.add_argument("--gamma2", type=float)
    p.add_argument("--s1")
    p.add_argument("--tol", type=float)
    common(p)

    p = sub.add_parser("classify-regime", help="predicted equilibrium counts for a ratio")
    p.add_argument("--n", type=int)
    p.add_argument("--gamma1", type=float)
    p.add_argument("--gamma2", type=float)
    p.add_argument("--at", type=float, help="gamma2/gamma1 directly")
    common(p)

    p = sub.add_parser("scan", help="predicted and numeric counts over a ratio grid")
    p.add_argument("--n", type=int)
    p.add_argument("--ratios", help="start:stop:count (use --ratios=... for negative starts)")
    p.add_argument("--geometric", action="store_const", const=True)
    p.add_argument("--at", type=float, action="append")
    p.add_argument("--workers", type=int)
    common(p)

    p = sub.add_parser("corotate", help="co-rotating points of a polygonal equilibrium")
    p.add_argument("--n", type=int)
    p.add_argument("--gamma1", type=float)
    p.add_argument("--gamma2", type=float)
    p.add_argument("--s1")
    p.add_argument("--alignment", choices=("aligned", "staggered"))
    p.add_argument("--root", type=int, help="index of the ring ratio among the solutions")
    p.add_argument("--absolute", action="store_const", const=True)
    common(p)

    p = sub.add_parser("simulate", help="integrate a vortex system read from JSON")
    p.add_argument("--input")
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--rel-tol", dest="rel_tol", type=float)
    p.add_argument("--samples", type=int)
    common(p)

    p = sub.add_parser("spectrum", help="eigenvalues of the ring circulant matrices")
    p.add_argument("--n", type=int)
    p.add_argument("--kind", choices=("C", "C0"))
    common(p)

    p = sub.add_parser("rigidity", help="admissible vorticity vectors of a single ring")
    p.add_argument("--n", type=int)
    p.add_argument("--case", choices=("rotating", "translating", "ROTATING", "TRANSLATING"))
    common(p)

    return parser


DEFAULTS: dict[str, Any] = {
    "format": "json",
    "tol": 1e-9,
    "s1": "1,0",
    "rel_tol": 1e-10,
    "kind": "C",
    "case": "rotating",
    "geometric": False,
    "absolute": False,
    "root": 0,
}


def _subparser(parser: argparse.ArgumentParser, command: str) -> argparse.ArgumentParser:
    for action in parser._subparsers._group_actions:  # type: ignore[union-attr]
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[command]
    raise UsageError(f"unknown command {command!r}")


def _dests(sub: argparse.ArgumentParser) -> set[str]:
    return {a.dest for a in sub._actions if a.dest not in ("help", "sub_config")}


def resolve_args(argv: Sequence[str] | None) -> argparse.Namespace:
    """Parse flags, merge a JSON config file underneath them and apply defaults."""
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    # a bare '--config file' may stand in for the subcommand
    if argv and argv[0] == "--config" and len(argv) >= 2 and (len(argv) == 2 or argv[2] not in COMMANDS):
        cfg = _load_config(argv[1])
        command = cfg.get("command")
        if command not in COMMANDS:
            raise UsageError("config file must name a valid 'command'")
        argv = [command, "--config", argv[1]] + argv[2:]
    ns = parser.parse_args(argv)
    if ns.command is None:
        raise UsageError(f"a command is required: {', '.join(COMMANDS)}")
    config_path = ns.sub_config or ns.config
    sub = _subparser(parser, ns.command)
    allowed = _dests(sub)
    if config_path:
        cfg = _load_config(config_path)
        if cfg.get("command", ns.command) != ns.command:
            raise UsageError("config 'command' does not match the command line")
        for key, value in cfg.items():
            if key == "command":
                continue
            dest = key.replace("-", "_")
            if dest not in allowed:
                raise UsageError(f"unknown key {key!r} in config for {ns.command}")
            if getattr(ns, dest, None) is None:
                if dest == "s1" and isinstance(value, list):
                    value = ",".join(str(v) for v in value)
                if dest == "at" and not isinstance(value, list):
                    value = [value]
                setattr(ns, dest, value)
    for key, value in DEFAULTS.items():
        if key in allowed and getattr(ns, key, None) is None:
            setattr(ns, key, value)
    return ns


def _load_config(path: str) -> dict[str, Any]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    return data


def _require(ns: argparse.Namespace, *names: str) -> None:
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(ns, n, None) is None]
    if missing:
        raise UsageError(f"missing required option(s): {', '.join(missing)}")


def _check_n(n: int, minimum: int = 2) -> None:
    if n < minimum:
        raise UsageError(f"--n must be >= {minimum}")


def _read_system(path: str) -> VortexSystem:
    try:
        text = Path(path).read_text(encoding="utf-8")
        return VortexSystem.from_json(text)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"invalid vortex system in {path}: {exc}") from None


def _csv_text(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _json_text(obj: Any) -> str:
    return json.dumps(obj, indent=2) + "\n"


REPORT_COLUMNS = ("kind", "omega", "residual", "center_x", "center_y", "translation_x", "translation_y")


def _report_row(r: EquilibriumReport) -> list[Any]:
    c = r.center.to_list() if r.center else ["", ""]
    v = r.translation_velocity.to_list() if r.translation_velocity else ["", ""]
    return [r.kind.value, r.omega, r.residual, *c, *v]


# --------------------------------------------------------------------------
# commands


def cmd_verify(ns: argparse.Namespace) -> str:
    _require(ns, "input")
    if not ns.tol > 0:
        raise UsageError("--tol must be positive")
    system = _read_system(ns.input)
    report = classify(system, ns.tol)
    if ns.format == "csv":
        return _csv_text(REPORT_COLUMNS, [_report_row(report)])
    return _json_text(report.to_dict())


def cmd_solve_nested(ns: argparse.Namespace) -> str:
    _require(ns, "n", "gamma1", "gamma2")
    _check_n(ns.n)
    if ns.gamma1 == 0 or ns.gamma2 == 0:
        raise UsageError("--gamma1 and --gamma2 must be nonzero")
    s1 = _parse_point(ns.s1)
    if s1 == 0:
        raise UsageError("--s1 must be nonzero")
    sols = solve_nested(ns.n, ns.gamma1, ns.gamma2, s1, tol=ns.tol)
    if ns.format == "csv":
        rows = [[s.alignment.value, s.x, *_report_row(s.report)] for s in sols]
        return _csv_text(("alignment", "x", *REPORT_COLUMNS), rows)
    return _json_text(
        {
            "n": ns.n,
            "gamma1": ns.gamma1,
            "gamma2": ns.gamma2,
            "solutions": [
                {
                    "alignment": s.alignment.value,
                    "x": s.x,
                    "report": s.report.to_dict(),
                    "system": s.system.to_dict(),
                }
                for s in sols
            ],
        }
    )


def _ratio_from(ns: argparse.Namespace) -> float:
    if ns.at is not None:
        r = ns.at[0] if isinstance(ns.at, list) else ns.at
    else:
        _require(ns, "gamma1", "gamma2")
        if ns.gamma1 == 0:
            raise UsageError("--gamma1 must be nonzero")
        r = ns.gamma2 / ns.gamma1
    if r == 0:
        raise UsageError("the vorticity ratio must be nonzero")
    return float(r)


def _classification_dict(c) -> dict[str, Any]:
    return {
        "n": c.n,
        "gamma_ratio": c.gamma_ratio,
        "regime": c.regime.value,
        "aligned_count": c.aligned_count,
        "staggered_count": c.staggered_count,
        "aligned_count_range": None if c.aligned_count_range is None else list(c.aligned_count_range),
        "staggered_count_range": None if c.staggered_count_range is None else list(c.staggered_count_range),
        "mu_n": c.mu_n,
        "lambda_n": c.lambda_n,
    }


def cmd_classify_regime(ns: argparse.Namespace) -> str:
    _require(ns, "n")
    _check_n(ns.n)
    c = classify_regime(ns.n, _ratio_from(ns))
    d = _classification_dict(c)
    if ns.format == "csv":
        fmt = lambda lo_hi: f"{lo_hi[0]}" if lo_hi[0] == lo_hi[1] else f"{lo_hi[0]}-{lo_hi[1]}"
        return _csv_text(
            ("n", "gamma_ratio", "regime_label", "aligned_predicted", "staggered_predicted", "mu_n", "lambda_n"),
            [[c.n, c.gamma_ratio, c.regime.value, fmt(c.aligned_bounds), fmt(c.staggered_bounds), c.mu_n, c.lambda_n]],
        )
    return _json_text(d)


def cmd_scan(ns: argparse.Namespace) -> str:
    _require(ns, "n")
    _check_n(ns.n)
    grid: list[float] = []
    if ns.ratios is not None:
        start, stop, count = _parse_ratios(ns.ratios)
        if count < 1:
            raise UsageError("ratio count must be positive")
        if ns.geometric:
            if start == 0 or stop == 0 or (start > 0) != (stop > 0):
                raise UsageError("a geometric grid needs nonzero endpoints of one sign")
            grid += [float(v) for v in np.geomspace(start, stop, count)]
        else:
            grid += [float(v) for v in np.linspace(start, stop, count)]
    if ns.at:
        grid += [float(v) for v in ns.at]
    if not grid:
        raise UsageError("give --ratios and/or --at")
    if any(r == 0 for r in grid):
        raise UsageError("ratios must be nonzero")
    rows = scan_regimes(ns.n, grid, max_workers=ns.workers)
    if ns.format == "csv":
        buf = io.StringIO()
        write_scan_csv(rows, buf)
        return buf.getvalue()
    return _json_text(
        [
            {
                **_classification_dict(r.classification),
                "aligned_numeric": r.aligned_numeric,
                "staggered_numeric": r.staggered_numeric,
                "consistent": r.consistent,
            }
            for r in rows
        ]
    )


def cmd_corotate(ns: argparse.Namespace) -> str:
    _require(ns, "n")
    _check_n(ns.n)
    s1 = _parse_point(ns.s1)
    if s1 == 0:
        raise UsageError("--s1 must be nonzero")
    gamma1 = 1.0 if ns.gamma1 is None else ns.gamma1
    if gamma1 == 0:
        raise UsageError("--gamma1 must be nonzero")
    if ns.absolute:
        eq = absolute_equilibrium(ns.n, gamma1, s1)
        generator = eq.system
        points = [corotating_absolute(ns.n, gamma1, s1)]
    elif ns.gamma2 is None:
        generator = PolygonRing(ns.n, s1, gamma1).to_system()
        points = corotating_single(ns.n, s1, gamma1)
    else:
        if ns.gamma2 == 0:
            raise UsageError("--gamma2 must be nonzero")
        _require(ns, "alignment")
        alignment = Alignment(ns.alignment.upper())
        sols = [s for s in solve_nested(ns.n, gamma1, ns.gamma2, s1) if s.alignment is alignment]
        if not 0 <= ns.root < len(sols):
            raise UsageError(f"--root must be in [0, {len(sols)}) for this alignment")
        config: NestedPolygonConfig = sols[ns.root].config
        generator = config.to_system()
        points = corotating_nested(config)
    if ns.format == "csv":
        rows = [[p.ray.value, p.K, p.radius, p.position.x, p.position.y, p.residual] for p in points]
        return _csv_text(("ray", "K", "radius", "x", "y", "residual"), rows)
    return corotating_json(generator, points, indent=2) + "\n"


def cmd_simulate(ns: argparse.Namespace) -> str:
    _require(ns, "input", "t_end")
    if not ns.t_end > 0:
        raise UsageError("--t-end must be positive")
    if not 1e-14 <= ns.rel_tol <= 1e-3:
        raise UsageError("--rel-tol must lie in [1e-14, 1e-3]")
    if ns.samples is not None and ns.samples < 2:
        raise UsageError("--samples must be at least 2")
    system = _read_system(ns.input)
    traj = integrate(system, ns.t_end, ns.rel_tol, n_samples=ns.samples)
    if ns.format == "csv":
        return traj.to_csv()
    return _json_text(
        {
            "n_states": len(traj.states),
            "t_end": float(traj.times[-1]),
            "max_hamiltonian_drift": traj.max_hamiltonian_drift,
            "max_distance_drift": traj.max_distance_drift,
            "max_displacement": traj.max_displacement(),
            "final": traj.final.to_dict(),
        }
    )


def cmd_spectrum(ns: argparse.Namespace) -> str:
    _require(ns, "n")
    _check_n(ns.n)
    spec = circulant_spectrum(ns.n, ns.kind)
    if ns.format == "csv":
        rows = [[k, float(spec.eigenvalues[k]), float(spec.closed_form[k])] for k in range(ns.n)]
        return _csv_text(("k", "eigenvalue", "closed_form"), rows)
    return _json_text(spec.to_dict())


def cmd_rigidity(ns: argparse.Namespace) -> str:
    _require(ns, "n")
    _check_n(ns.n)
    space = vorticity_solution_space(ns.n, ns.case.upper())
    if ns.format == "csv":
        rows = [[i, *map(float, row)] for i, row in enumerate(space.basis)]
        return _csv_text(("basis_index", *[f"g_{k}" for k in range(ns.n)]), rows)
    return _json_text(space.to_dict())


HANDLERS = {
    "verify": cmd_verify,
    "solve-nested": cmd_solve_nested,
    "classify-regime": cmd_classify_regime,
    "scan": cmd_scan,
    "corotate": cmd_corotate,
    "simulate": cmd_simulate,
    "spectrum": cmd_spectrum,
    "rigidity": cmd_rigidity,
}


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        ns = resolve_args(argv)
        text = HANDLERS[ns.command](ns)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (VortexError, ArithmeticError, RuntimeError) as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    if ns.output:
        Path(ns.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
