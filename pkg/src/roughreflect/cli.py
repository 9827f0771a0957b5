"""Scenario-driven command line: solvers, verifiers, and experiment sweeps.

Commands read a JSON scenario, run the requested computation, and write
delimited traces next to a JSON report.  Exit codes triage honestly:
0 success, 1 input error (reported with the offending field path),
2 solver non-convergence (the report is still written).

Output layout for ``--out OUT``: the trace CSV goes to OUT and the JSON
report to OUT with its extension swapped to ``.json``; with
``--format json`` only the report is written, to OUT itself.  Path
traces put ``time`` first; sweep tables put ``run`` first.  Figures,
when requested, land at OUT with a ``.png`` extension.

Scenario seeds feed per-role child seeds through a seed sequence, so one
scenario seed reproduces every generated path independently of the
order in which they are built.
"""

from __future__ import annotations

import argparse
import dataclasses
import io
import json
import math
import os
import sys
import time
from typing import Any, Callable, Optional

import numpy as np

from .fields import VectorField, constant_field, tanh_field
from .generators import RNG_ALGORITHM, GeneratorSpec, generate, standard_fields
from .paths import (
    GridPath,
    TimeGrid,
    merge_grids,
    p_variation,
    p_variation_open,
    path_from_csv,
    read_csv,
    sup_distance,
    write_csv,
)
from .plotting import plot_paths, plot_values
from .rough import (
    Level2RoughPath,
    RdeSolveConfig,
    left_point_lift,
    rough_from_csv,
    rough_seminorm,
    rough_to_csv,
    solve_reflected_rde,
)
from .skorokhod import lipschitz_ratio, solve_skorokhod, verify_skorokhod
from .young import (
    NonConvergenceError,
    SolveReport,
    YoungSolveConfig,
    solve_reflected_young,
    stability_ratio,
)

__all__ = ["main", "ScenarioError"]

# child-seed roles; sweeps derive per-run seeds under _ROLE_SWEEP
_ROLE_DRIFT = 0
_ROLE_DRIVER = 1
_ROLE_BARRIER = 2
_ROLE_SWEEP = 3

_MISSING = object()


class ScenarioError(ValueError):
    """Scenario input problem; the message starts with the field path."""


# ---------------------------------------------------------------------------
# schema helpers


def _entry(obj: dict, key: str, path: str, default: Any = _MISSING) -> Any:
    if key in obj:
        return obj[key]
    if default is _MISSING:
        raise ScenarioError(f"{path}.{key}: missing required field")
    return default


def _number(
    obj: dict,
    key: str,
    path: str,
    default: Any = _MISSING,
    minimum: Optional[float] = None,
) -> Any:
    value = _entry(obj, key, path, default)
    if value is None or value is default and key not in obj:
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{path}.{key}: expected a number")
    if minimum is not None and value < minimum:
        raise ScenarioError(f"{path}.{key}: must be at least {minimum}")
    return float(value)


def _integer(
    obj: dict,
    key: str,
    path: str,
    default: Any = _MISSING,
    minimum: Optional[int] = None,
) -> Any:
    value = _entry(obj, key, path, default)
    if value is None or value is default and key not in obj:
        return value
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(f"{path}.{key}: expected an integer")
    if minimum is not None and value < minimum:
        raise ScenarioError(f"{path}.{key}: must be at least {minimum}")
    return int(value)


def _string(
    obj: dict,
    key: str,
    path: str,
    default: Any = _MISSING,
    choices: Optional[tuple[str, ...]] = None,
) -> Any:
    value = _entry(obj, key, path, default)
    if value is default and key not in obj:
        return value
    if not isinstance(value, str):
        raise ScenarioError(f"{path}.{key}: expected a string")
    if choices is not None and value not in choices:
        raise ScenarioError(f"{path}.{key}: expected one of {', '.join(choices)}")
    return value


def _boolean(obj: dict, key: str, path: str, default: Any = _MISSING) -> Any:
    value = _entry(obj, key, path, default)
    if value is default and key not in obj:
        return value
    if not isinstance(value, bool):
        raise ScenarioError(f"{path}.{key}: expected true or false")
    return value


def _object(obj: dict, key: str, path: str, default: Any = _MISSING) -> Any:
    value = _entry(obj, key, path, default)
    if value is default and key not in obj:
        return value
    if not isinstance(value, dict):
        raise ScenarioError(f"{path}.{key}: expected a JSON object")
    return value


def _vector(obj: dict, key: str, path: str) -> np.ndarray:
    value = _entry(obj, key, path)
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise ScenarioError(f"{path}.{key}: expected a list of numbers") from None
    if arr.ndim == 0:
        arr = arr[None]
    if arr.ndim != 1 or arr.size == 0:
        raise ScenarioError(f"{path}.{key}: expected a non-empty list of numbers")
    return arr


def _matrix(obj: dict, key: str, path: str) -> np.ndarray:
    value = _entry(obj, key, path)
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise ScenarioError(f"{path}.{key}: expected a matrix") from None
    if arr.ndim != 2 or arr.size == 0:
        raise ScenarioError(f"{path}.{key}: expected a non-empty matrix")
    return arr


def _load_scenario(filename: Optional[str]) -> dict:
    if filename is None:
        raise ScenarioError("scenario: --scenario is required for this command")
    try:
        with open(filename, "r", encoding="utf-8") as handle:
            data = json.load(handle)
    except OSError as exc:
        raise ScenarioError(f"scenario: cannot read {filename} ({exc})") from None
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario: invalid JSON in {filename} ({exc})") from None
    if not isinstance(data, dict):
        raise ScenarioError("scenario: expected a JSON object at the top level")
    return data


# ---------------------------------------------------------------------------
# scenario ingredients


def _derive_seed(seed: int, *role: int) -> int:
    return int(np.random.SeedSequence([seed, *role]).generate_state(1, np.uint64)[0])


def _scenario_seed(scenario: dict, args: argparse.Namespace) -> int:
    if getattr(args, "seed", None) is not None:
        return int(args.seed)
    return _integer(scenario, "seed", "scenario", default=0, minimum=0)


def _grid_from_spec(scenario: dict, path: str, args: argparse.Namespace) -> TimeGrid:
    obj = _object(scenario, "grid", path)
    prefix = f"{path}.grid"
    override = getattr(args, "grid_n", None)
    csv_name = _string(obj, "csv", prefix, default=None)
    if csv_name is not None:
        if override is not None:
            raise ScenarioError(f"{prefix}.csv: --grid-n cannot override a csv grid")
        grid, _, _ = read_csv(csv_name)
        return grid
    t_end = _number(obj, "t_end", prefix)
    t_start = _number(obj, "t_start", prefix, default=0.0)
    nodes = _integer(obj, "n", prefix, minimum=2)
    if override is not None:
        if override < 2:
            raise ScenarioError("--grid-n: must be at least 2")
        nodes = int(override)
    if not t_end > t_start:
        raise ScenarioError(f"{prefix}.t_end: must exceed t_start")
    return TimeGrid.uniform(t_start, t_end, nodes)


def _path_from_spec(
    obj: dict,
    path: str,
    grid: Optional[TimeGrid],
    dimension: int,
    seed: int,
    role: int,
) -> GridPath:
    kind = _string(obj, "kind", path)
    if kind == "csv":
        filename = _string(obj, "path", path)
        try:
            return path_from_csv(filename)
        except (OSError, ValueError) as exc:
            raise ScenarioError(f"{path}.path: {exc}") from None
    if grid is None:
        raise ScenarioError(f"{path}.kind: generated paths need a scenario grid")
    if kind == "constant":
        value = np.atleast_1d(np.asarray(_entry(obj, "value", path), dtype=float))
        if value.ndim != 1:
            raise ScenarioError(f"{path}.value: expected a scalar or a vector")
        if value.size == 1 and dimension > 1:
            value = np.repeat(value, dimension)
        return GridPath(grid, np.tile(value, (len(grid), 1)))
    parameters = {
        k: v for k, v in obj.items() if k not in ("kind", "dimension", "seed")
    }
    dim = _integer(obj, "dimension", path, default=dimension, minimum=1)
    own_seed = _integer(obj, "seed", path, default=None, minimum=0)
    child = own_seed if own_seed is not None else _derive_seed(seed, role)
    try:
        spec = GeneratorSpec(
            kind=kind, grid=grid, dimension=dim, seed=child, parameters=parameters
        )
        return generate(spec)
    except ValueError as exc:
        raise ScenarioError(f"{path}: {exc}") from None


def _field_from_spec(scenario: dict, path: str) -> VectorField:
    obj = _object(scenario, "field", path)
    prefix = f"{path}.field"
    kind = _string(obj, "kind", prefix, choices=("constant", "tanh", "catalog"))
    try:
        if kind == "constant":
            return constant_field(_matrix(obj, "matrix", prefix))
        if kind == "tanh":
            weights = _matrix(obj, "weights", prefix)
            mixing = obj.get("mixing")
            mixing = (
                _matrix(obj, "mixing", prefix) if mixing is not None
                else np.eye(weights.shape[0])
            )
            offset = None
            if obj.get("offset") is not None:
                offset = _vector(obj, "offset", prefix)
            return tanh_field(weights, mixing, offset=offset)
        name = _string(obj, "name", prefix)
        n = _integer(obj, "n", prefix, default=2, minimum=1)
        d = _integer(obj, "d", prefix, default=2, minimum=1)
        catalog = standard_fields(n, d)
        if name not in catalog:
            raise ScenarioError(
                f"{prefix}.name: expected one of {', '.join(sorted(catalog))}"
            )
        return catalog[name]
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(f"{prefix}: {exc}") from None


def _young_config(scenario: dict, path: str = "scenario") -> YoungSolveConfig:
    kwargs: dict[str, Any] = {
        "p": _number(scenario, "p", path),
        "q": _number(scenario, "q", path),
    }
    for key in ("delta", "tol"):
        value = _number(scenario, key, path, default=None)
        if value is not None:
            kwargs[key] = value
    for key in ("max_iter", "max_window"):
        value = _integer(scenario, key, path, default=None, minimum=1)
        if value is not None:
            kwargs[key] = value
    allow_shrink = _boolean(scenario, "allow_shrink", path, default=None)
    if allow_shrink is not None:
        kwargs["allow_shrink"] = allow_shrink
    init = _string(scenario, "init", path, default=None)
    if init is not None:
        kwargs["init"] = init
    try:
        return YoungSolveConfig(**kwargs)
    except ValueError as exc:
        raise ScenarioError(f"{path}: {exc}") from None


def _rde_config(scenario: dict, path: str = "scenario") -> RdeSolveConfig:
    kwargs: dict[str, Any] = {"p": _number(scenario, "p", path)}
    for key in ("q", "delta", "tol", "theta"):
        value = _number(scenario, key, path, default=None)
        if value is not None:
            kwargs[key] = value
    for key in ("max_iter", "max_window"):
        value = _integer(scenario, key, path, default=None, minimum=1)
        if value is not None:
            kwargs[key] = value
    allow_shrink = _boolean(scenario, "allow_shrink", path, default=None)
    if allow_shrink is not None:
        kwargs["allow_shrink"] = allow_shrink
    init = _string(scenario, "init", path, default=None)
    if init is not None:
        kwargs["init"] = init
    try:
        return RdeSolveConfig(**kwargs)
    except ValueError as exc:
        raise ScenarioError(f"{path}: {exc}") from None


def _rough_from_spec(
    scenario: dict,
    path: str,
    grid: Optional[TimeGrid],
    dimension: int,
    seed: int,
    p: float,
) -> Level2RoughPath:
    obj = _object(scenario, "driver", path)
    prefix = f"{path}.driver"
    kind = _string(
        obj, "kind", prefix, choices=("brownian", "compound_poisson", "csv", "fv_lift")
    )
    if kind == "csv":
        filename = _string(obj, "path", prefix)
        try:
            return rough_from_csv(filename, p=p)
        except (OSError, ValueError) as exc:
            raise ScenarioError(f"{prefix}.path: {exc}") from None
    if kind == "fv_lift":
        base = _object(obj, "base", prefix)
        base_path = _path_from_spec(
            base, f"{prefix}.base", grid, dimension, seed, _ROLE_DRIVER
        )
        return left_point_lift(base_path, p=p)
    base_path = _path_from_spec(obj, prefix, grid, dimension, seed, _ROLE_DRIVER)
    return left_point_lift(base_path, p=p)


# ---------------------------------------------------------------------------
# artifacts


def _out_paths(out: Optional[str], fmt: str) -> tuple[Optional[str], str]:
    """Map --out to (trace csv path or None, report json path)."""
    if out is None:
        raise ScenarioError("out: --out is required for this command")
    base, ext = os.path.splitext(out)
    if fmt == "json":
        return None, out if ext == ".json" else base + ".json"
    csv_path = base + ".csv" if ext == ".json" else out
    return csv_path, base + ".json"


def _plot_path(out: str) -> str:
    return os.path.splitext(out)[0] + ".png"


def _atomic_text(filename: str, text: str) -> None:
    tmp = filename + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)
    os.replace(tmp, filename)


def _clean(value: Any) -> Any:
    """JSON-safe copy: numpy scalars unwrapped, non-finite numbers to null."""
    if isinstance(value, dict):
        return {key: _clean(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(item) for item in value]
    if isinstance(value, np.ndarray):
        return _clean(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        out = float(value)
        return out if math.isfinite(out) else None
    return value


def _write_report(filename: str, report: dict) -> None:
    _atomic_text(filename, json.dumps(_clean(report), indent=2, sort_keys=True) + "\n")


def _write_trace(filename: str, grid: TimeGrid, columns: dict[str, np.ndarray]) -> None:
    buffer = io.StringIO()
    write_csv(buffer, grid, columns)
    _atomic_text(filename, buffer.getvalue())


def _write_table(filename: str, header: list[str], rows: list[list[Any]]) -> None:
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for cell in row:
            if cell is None:
                cells.append("")
            elif isinstance(cell, (int, np.integer)):
                cells.append(str(int(cell)))
            else:
                cells.append(repr(float(cell)))
        lines.append(",".join(cells))
    _atomic_text(filename, "\n".join(lines) + "\n")


def _solution_columns(prefixes: tuple[str, str], first, second) -> dict[str, np.ndarray]:
    columns: dict[str, np.ndarray] = {}
    for prefix, values in zip(prefixes, (first, second)):
        for j in range(values.shape[1]):
            columns[f"{prefix}{j + 1}"] = values[:, j]
    return columns


def _window_dict(window) -> dict:
    ratios = list(window.ratios)
    return {
        "start": window.start,
        "end": window.end,
        "iterations": window.iterations,
        "shrink_count": window.shrink_count,
        "theta": window.theta,
        "final_distance": window.final_distance,
        "ratios": ratios,
        "max_ratio": max(ratios) if ratios else None,
    }


def _failure_dict(failure) -> dict:
    return {
        "reason": failure.reason,
        "window_start": failure.window_start,
        "window_end": failure.window_end,
        "iterations": failure.iterations,
        "last_distance": failure.last_distance,
        "ratios": list(failure.ratios),
    }


def _solve_report_dict(report: SolveReport) -> dict:
    ratios = [r for window in report.windows for r in window.ratios]
    out = {
        "converged": report.converged,
        "equation_residual": report.equation_residual,
        "barrier_violation": report.barrier_violation,
        "minimality_residual": report.minimality_residual,
        "non_unique_risk": report.non_unique_risk,
        "window_count": len(report.windows),
        "max_contraction_ratio": max(ratios) if ratios else None,
        "windows": [_window_dict(w) for w in report.windows],
    }
    if report.failure is not None:
        out["failure"] = _failure_dict(report.failure)
    return out


def _finish_report(report: dict, filename: str, started: float) -> None:
    report["rng_algorithm"] = RNG_ALGORITHM
    report["wall_clock_seconds"] = time.perf_counter() - started
    _write_report(filename, report)


# ---------------------------------------------------------------------------
# commands


def _cmd_pvar(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    scenario = _load_scenario(args.scenario)
    p = _number(scenario, "p", "scenario", minimum=1.0)
    spec_obj = _object(scenario, "path", "scenario")
    grid = None
    if "grid" in scenario:
        grid = _grid_from_spec(scenario, "scenario", args)
    seed = _scenario_seed(scenario, args)
    dimension = _integer(scenario, "dimension", "scenario", default=1, minimum=1)
    path = _path_from_spec(spec_obj, "scenario.path", grid, dimension, seed, _ROLE_DRIVER)
    interval = None
    if "interval" in scenario:
        pair = _vector(scenario, "interval", "scenario")
        if pair.size != 2:
            raise ScenarioError("scenario.interval: expected [s, t]")
        interval = (float(pair[0]), float(pair[1]))
    open_end = _boolean(scenario, "open", "scenario", default=False)
    try:
        if open_end:
            value = p_variation_open(path, p, interval)
        else:
            value = p_variation(path, p, interval)
    except ValueError as exc:
        raise ScenarioError(f"scenario.interval: {exc}") from None
    _, report_path = _out_paths(args.out, "json")
    span = interval if interval is not None else (path.grid.start, path.grid.end)
    report = {
        "command": "pvar",
        "p": p,
        "open": bool(open_end),
        "interval": list(span),
        "nodes": len(path.grid),
        "dimension": path.dimension,
        "value": value,
        "seed": seed,
    }
    _finish_report(report, report_path, started)
    print(f"wrote {report_path}")
    return 0


def _solve_or_report(solve: Callable[[], Any]) -> tuple[Any, SolveReport]:
    try:
        solution = solve()
        return solution, solution.report
    except NonConvergenceError as exc:
        return None, exc.report


def _cmd_skorokhod(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    if args.input is not None:
        if args.barrier is None:
            raise ScenarioError("barrier: --barrier is required with --input")
        try:
            y = path_from_csv(args.input)
            barrier = path_from_csv(args.barrier)
        except (OSError, ValueError) as exc:
            raise ScenarioError(f"input: {exc}") from None
        seed = 0
    else:
        scenario = _load_scenario(args.scenario)
        seed = _scenario_seed(scenario, args)
        grid = _grid_from_spec(scenario, "scenario", args)
        dimension = _integer(scenario, "dimension", "scenario", default=1, minimum=1)
        y = _path_from_spec(
            _object(scenario, "y", "scenario"), "scenario.y", grid, dimension,
            seed, _ROLE_DRIVER,
        )
        barrier = _path_from_spec(
            _object(scenario, "barrier", "scenario"), "scenario.barrier", grid,
            dimension, seed, _ROLE_BARRIER,
        )
    if y.grid != barrier.grid:
        union = merge_grids(y.grid, barrier.grid)
        y = y.resample(union)
        barrier = barrier.resample(union)
    solution = solve_skorokhod(y, barrier)
    verification = verify_skorokhod(solution, y, barrier)
    csv_path, report_path = _out_paths(args.out, args.format)
    if csv_path is not None:
        _write_trace(
            csv_path, y.grid, _solution_columns(("z", "k"), solution.z.values, solution.k.values)
        )
    report = {
        "command": "skorokhod",
        "nodes": len(y.grid),
        "dimension": y.dimension,
        "seed": seed,
        "verification": verification.as_dict(),
        "passed": verification.passed,
    }
    _finish_report(report, report_path, started)
    if args.plot and csv_path is not None:
        plot_paths(
            _plot_path(csv_path),
            {"z": solution.z, "k": solution.k},
            title="reflection",
            barrier=barrier,
        )
    print(f"wrote {csv_path or report_path}")
    return 0


def _young_data(
    scenario: dict, args: argparse.Namespace
) -> tuple[VectorField, np.ndarray, GridPath, GridPath, GridPath, YoungSolveConfig, int]:
    cfg = _young_config(scenario)
    field = _field_from_spec(scenario, "scenario")
    y0 = _vector(scenario, "y0", "scenario")
    if y0.size != field.n:
        raise ScenarioError(
            f"scenario.y0: field expects {field.n} components, got {y0.size}"
        )
    grid = _grid_from_spec(scenario, "scenario", args)
    seed = _scenario_seed(scenario, args)
    drift = _path_from_spec(
        _object(scenario, "driver_a", "scenario"), "scenario.driver_a", grid,
        field.d, seed, _ROLE_DRIFT,
    )
    forcing = _path_from_spec(
        _object(scenario, "driver_x", "scenario"), "scenario.driver_x", grid,
        field.n, seed, _ROLE_DRIVER,
    )
    barrier = _path_from_spec(
        _object(scenario, "barrier", "scenario"), "scenario.barrier", grid,
        field.n, seed, _ROLE_BARRIER,
    )
    return field, y0, drift, forcing, barrier, cfg, seed


def _cmd_young_solve(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    scenario = _load_scenario(args.scenario)
    field, y0, drift, forcing, barrier, cfg, seed = _young_data(scenario, args)
    solution, solve_report = _solve_or_report(
        lambda: solve_reflected_young(field, y0, drift, forcing, barrier, cfg)
    )
    csv_path, report_path = _out_paths(args.out, args.format)
    report = {
        "command": "young-solve",
        "p": cfg.p,
        "q": cfg.q,
        "delta": cfg.delta,
        "nodes": len(forcing.grid),
        "seed": seed,
        "solve": _solve_report_dict(solve_report),
    }
    _finish_report(report, report_path, started)
    if solution is None:
        print("young-solve: failed to converge; see report", file=sys.stderr)
        return 2
    if csv_path is not None:
        _write_trace(
            csv_path,
            solution.y.grid,
            _solution_columns(("y", "k"), solution.y.values, solution.k.values),
        )
        if args.plot:
            plot_paths(
                _plot_path(csv_path),
                {"y": solution.y, "k": solution.k},
                title="reflected Young solution",
                barrier=barrier,
            )
    print(f"wrote {csv_path or report_path}")
    return 0


def _cmd_rde_solve(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    scenario = _load_scenario(args.scenario)
    cfg = _rde_config(scenario)
    field = _field_from_spec(scenario, "scenario")
    y0 = _vector(scenario, "y0", "scenario")
    if y0.size != field.n:
        raise ScenarioError(
            f"scenario.y0: field expects {field.n} components, got {y0.size}"
        )
    grid = None
    if "grid" in scenario:
        grid = _grid_from_spec(scenario, "scenario", args)
    seed = _scenario_seed(scenario, args)
    rough = _rough_from_spec(scenario, "scenario", grid, field.d, seed, cfg.p)
    barrier = _path_from_spec(
        _object(scenario, "barrier", "scenario"), "scenario.barrier",
        rough.path.grid, field.n, seed, _ROLE_BARRIER,
    )
    if barrier.grid != rough.path.grid:
        barrier = barrier.resample(rough.path.grid)
    solution, solve_report = _solve_or_report(
        lambda: solve_reflected_rde(field, y0, rough, barrier, cfg)
    )
    csv_path, report_path = _out_paths(args.out, args.format)
    report = {
        "command": "rde-solve",
        "p": cfg.p,
        "q": cfg.q,
        "theta": cfg.theta,
        "delta": cfg.delta,
        "nodes": len(rough.path.grid),
        "seed": seed,
        "driver_seminorm": rough_seminorm(rough),
        "solve": _solve_report_dict(solve_report),
    }
    _finish_report(report, report_path, started)
    if solution is None:
        print("rde-solve: failed to converge; see report", file=sys.stderr)
        return 2
    if csv_path is not None:
        _write_trace(
            csv_path,
            solution.y.grid,
            _solution_columns(("y", "k"), solution.y.values, solution.k.values),
        )
        if args.plot:
            plot_paths(
                _plot_path(csv_path),
                {"y": solution.y, "k": solution.k},
                title="reflected rough solution",
                barrier=barrier,
            )
    print(f"wrote {csv_path or report_path}")
    return 0


def _cmd_lift(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    p = 2.5
    seed = 0
    if args.input is not None:
        try:
            base = path_from_csv(args.input)
        except (OSError, ValueError) as exc:
            raise ScenarioError(f"input: {exc}") from None
    else:
        scenario = _load_scenario(args.scenario)
        p = _number(scenario, "p", "scenario", default=2.5)
        seed = _scenario_seed(scenario, args)
        grid = None
        if "grid" in scenario:
            grid = _grid_from_spec(scenario, "scenario", args)
        dimension = _integer(scenario, "dimension", "scenario", default=1, minimum=1)
        base = _path_from_spec(
            _object(scenario, "path", "scenario"), "scenario.path", grid,
            dimension, seed, _ROLE_DRIVER,
        )
    try:
        rough = left_point_lift(base, p=p)
    except ValueError as exc:
        raise ScenarioError(f"scenario.p: {exc}") from None
    csv_path, report_path = _out_paths(args.out, args.format)
    if csv_path is not None:
        buffer = io.StringIO()
        rough_to_csv(rough, buffer)
        _atomic_text(csv_path, buffer.getvalue())
    report = {
        "command": "lift",
        "p": p,
        "nodes": len(base.grid),
        "dimension": base.dimension,
        "seed": seed,
        "seminorm": rough_seminorm(rough),
    }
    _finish_report(report, report_path, started)
    print(f"wrote {csv_path or report_path}")
    return 0


def _perturbation(scenario: dict) -> tuple[float, int]:
    obj = _object(scenario, "perturbation", "scenario")
    scale = _number(obj, "scale", "scenario.perturbation", minimum=0.0)
    count = _integer(obj, "count", "scenario.perturbation", minimum=1)
    return scale, count


def _bump(grid: TimeGrid, dimension: int, scale: float, seed: int) -> GridPath:
    spec = GeneratorSpec(
        kind="brownian", grid=grid, dimension=dimension, seed=seed,
        parameters={"volatility": scale},
    )
    return generate(spec)


def _cmd_stability(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    scenario = _load_scenario(args.scenario)
    mode = _string(scenario, "mode", "scenario", default="young",
                   choices=("young", "skorokhod"))
    scale, count = _perturbation(scenario)
    seed = _scenario_seed(scenario, args)
    ratios: list[Optional[float]] = []
    failures: list[dict] = []
    if mode == "skorokhod":
        p = _number(scenario, "p", "scenario", minimum=1.0)
        grid = _grid_from_spec(scenario, "scenario", args)
        dimension = _integer(scenario, "dimension", "scenario", default=1, minimum=1)
        y = _path_from_spec(
            _object(scenario, "y", "scenario"), "scenario.y", grid, dimension,
            seed, _ROLE_DRIVER,
        )
        barrier = _path_from_spec(
            _object(scenario, "barrier", "scenario"), "scenario.barrier", grid,
            dimension, seed, _ROLE_BARRIER,
        )
        for run in range(count):
            y_alt = y + _bump(grid, dimension, scale,
                              _derive_seed(seed, _ROLE_SWEEP, run, _ROLE_DRIVER))
            l_alt = barrier + _bump(grid, dimension, scale,
                                    _derive_seed(seed, _ROLE_SWEEP, run, _ROLE_BARRIER))
            ratios.append(lipschitz_ratio(y, barrier, y_alt, l_alt, p))
    else:
        field, y0, drift, forcing, barrier, cfg, seed = _young_data(scenario, args)
        grid = forcing.grid
        base = (y0, drift, forcing, barrier)
        for run in range(count):
            drift_alt = drift + _bump(
                drift.grid, drift.dimension, scale,
                _derive_seed(seed, _ROLE_SWEEP, run, _ROLE_DRIFT),
            )
            forcing_alt = forcing + _bump(
                grid, forcing.dimension, scale,
                _derive_seed(seed, _ROLE_SWEEP, run, _ROLE_DRIVER),
            )
            barrier_alt = barrier + _bump(
                grid, barrier.dimension, scale,
                _derive_seed(seed, _ROLE_SWEEP, run, _ROLE_BARRIER),
            )
            alt = (y0, drift_alt, forcing_alt, barrier_alt)
            try:
                ratios.append(stability_ratio(field, base, alt, cfg))
            except NonConvergenceError as exc:
                ratios.append(None)
                failures.append({"run": run, **_failure_dict(exc.report.failure)})
    csv_path, report_path = _out_paths(args.out, args.format)
    finite = [r for r in ratios if r is not None]
    if csv_path is not None:
        _write_table(
            csv_path,
            ["run", "converged", "ratio"],
            [[run, int(r is not None), r] for run, r in enumerate(ratios)],
        )
        if args.plot:
            plot_values(
                _plot_path(csv_path), np.asarray(finite, dtype=float),
                title=f"{mode} stability ratios", ylabel="ratio",
            )
    report = {
        "command": "stability",
        "mode": mode,
        "runs": count,
        "perturbation_scale": scale,
        "seed": seed,
        "max_ratio": max(finite) if finite else None,
        "non_converged": len(failures),
        "failures": failures,
    }
    _finish_report(report, report_path, started)
    print(f"wrote {csv_path or report_path}")
    return 0


def _cmd_uniqueness(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    scenario = _load_scenario(args.scenario)
    solver = _string(scenario, "solver", "scenario", default="rde",
                     choices=("rde", "young"))
    runs = _integer(scenario, "seeds", "scenario", default=1, minimum=1)
    tolerance = _number(scenario, "tolerance", "scenario", default=1e-6, minimum=0.0)
    field = _field_from_spec(scenario, "scenario")
    y0 = _vector(scenario, "y0", "scenario")
    if y0.size != field.n:
        raise ScenarioError(
            f"scenario.y0: field expects {field.n} components, got {y0.size}"
        )
    grid = _grid_from_spec(scenario, "scenario", args)
    seed = _scenario_seed(scenario, args)
    if solver == "rde":
        cfg: Any = _rde_config(scenario)
    else:
        cfg = _young_config(scenario)
    deviations: list[Optional[float]] = []
    failures: list[dict] = []
    for run in range(runs):
        run_seed = _derive_seed(seed, _ROLE_SWEEP, run)
        barrier = _path_from_spec(
            _object(scenario, "barrier", "scenario"), "scenario.barrier", grid,
            field.n, run_seed, _ROLE_BARRIER,
        )
        if solver == "rde":
            rough = _rough_from_spec(scenario, "scenario", grid, field.d, run_seed, cfg.p)
            if barrier.grid != rough.path.grid:
                barrier = barrier.resample(rough.path.grid)
            solve = lambda c: solve_reflected_rde(field, y0, rough, barrier, c)
        else:
            drift = _path_from_spec(
                _object(scenario, "driver_a", "scenario"), "scenario.driver_a",
                grid, field.d, run_seed, _ROLE_DRIFT,
            )
            forcing = _path_from_spec(
                _object(scenario, "driver_x", "scenario"), "scenario.driver_x",
                grid, field.n, run_seed, _ROLE_DRIVER,
            )
            solve = lambda c: solve_reflected_young(field, y0, drift, forcing, barrier, c)
        try:
            first = solve(dataclasses.replace(cfg, init="constant"))
            second = solve(dataclasses.replace(cfg, init="unreflected"))
        except NonConvergenceError as exc:
            deviations.append(None)
            entry = {"run": run, "run_seed": run_seed}
            if exc.report.failure is not None:
                entry.update(_failure_dict(exc.report.failure))
            failures.append(entry)
            continue
        deviation = max(
            sup_distance(first.y, second.y), sup_distance(first.k, second.k)
        )
        deviations.append(deviation)
    csv_path, report_path = _out_paths(args.out, args.format)
    finite = [d for d in deviations if d is not None]
    if csv_path is not None:
        _write_table(
            csv_path,
            ["run", "converged", "deviation"],
            [[run, int(d is not None), d] for run, d in enumerate(deviations)],
        )
        if args.plot:
            plot_values(
                _plot_path(csv_path), np.asarray(finite, dtype=float),
                title=f"{solver} two-initialization deviations",
                ylabel="sup deviation", threshold=tolerance,
            )
    max_deviation = max(finite) if finite else None
    report = {
        "command": "uniqueness-check",
        "solver": solver,
        "runs": runs,
        "converged_runs": len(finite),
        "non_converged": runs - len(finite),
        "non_converged_fraction": (runs - len(finite)) / runs,
        "tolerance": tolerance,
        "max_deviation": max_deviation,
        "within_tolerance": bool(
            max_deviation is not None and max_deviation <= tolerance
        ) if finite else None,
        "seed": seed,
        "failures": failures,
    }
    _finish_report(report, report_path, started)
    print(f"wrote {csv_path or report_path}")
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_common(parser: argparse.ArgumentParser, plot_default: bool) -> None:
    parser.add_argument("--scenario", help="scenario JSON file")
    parser.add_argument("--out", help="output artifact path")
    parser.add_argument("--seed", type=int, help="override the scenario seed")
    parser.add_argument("--grid-n", type=int, dest="grid_n",
                        help="override the scenario grid resolution")
    parser.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="primary artifact format (default csv)")
    if plot_default:
        parser.add_argument("--no-plot", dest="plot", action="store_false",
                            help="skip the figure next to the table")
        parser.set_defaults(plot=True)
    else:
        parser.add_argument("--plot", action="store_true",
                            help="render a figure next to the trace")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="roughreflect",
        description="reflected Young/rough differential equations on grid paths",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    cmd = sub.add_parser("pvar", help="p-variation of a path")
    _add_common(cmd, plot_default=False)
    cmd.set_defaults(handler=_cmd_pvar)

    cmd = sub.add_parser("skorokhod", help="reflection map and verifier")
    _add_common(cmd, plot_default=False)
    cmd.add_argument("--input", help="path CSV for the unreflected input")
    cmd.add_argument("--barrier", help="path CSV for the barrier")
    cmd.set_defaults(handler=_cmd_skorokhod)

    cmd = sub.add_parser("young-solve", help="reflected Young equation")
    _add_common(cmd, plot_default=False)
    cmd.set_defaults(handler=_cmd_young_solve)

    cmd = sub.add_parser("rde-solve", help="reflected rough equation")
    _add_common(cmd, plot_default=False)
    cmd.set_defaults(handler=_cmd_rde_solve)

    cmd = sub.add_parser("lift", help="canonical level-2 lift of a path")
    _add_common(cmd, plot_default=False)
    cmd.add_argument("--input", help="path CSV to lift")
    cmd.set_defaults(handler=_cmd_lift)

    cmd = sub.add_parser("stability", help="perturbation sweep of ratio estimates")
    _add_common(cmd, plot_default=True)
    cmd.set_defaults(handler=_cmd_stability)

    cmd = sub.add_parser("uniqueness-check", help="two-initialization agreement sweep")
    _add_common(cmd, plot_default=True)
    cmd.set_defaults(handler=_cmd_uniqueness)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
