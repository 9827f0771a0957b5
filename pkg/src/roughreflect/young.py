"""Left-point Young integration and the reflected Young differential equation.

The equation solved here is Y = y + int f(Y) dA + X + K against a lower
barrier L, where A is a drift driver of finite q-variation, X is an
additive forcing path, and K is the minimal reflector keeping Y above L.
The solver partitions time into windows on which the data is small in
variation, runs a fixed-point iteration of the reflected integral map on
each window, and crosses window boundaries with the explicit jump
formula; on a grid the composite is the exact discrete solution up to
the fixed-point tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .fields import VectorField
from .paths import (
    GridPath,
    IncrementalVariation,
    TimeGrid,
    merge_grids,
    p_variation,
    p_variation_open,
    variation_distance,
)
from .skorokhod import SkorokhodSolution, verify_skorokhod

__all__ = [
    "YoungSolveConfig",
    "WindowRecord",
    "SolveFailure",
    "SolveReport",
    "NonConvergenceError",
    "YoungSolution",
    "young_integral",
    "young_estimate_residual",
    "young_jump_step",
    "solve_reflected_young",
    "stability_ratio",
]

# Picard iteration declares non-contraction only after this many successive
# distance ratios at or above one; a single flat step is tolerated because
# reflection kinks can stall the distance for one iteration without
# preventing convergence.
_BAD_RATIO_LIMIT = 2


@dataclass(frozen=True)
class YoungSolveConfig:
    """Exponents and iteration controls for the reflected Young solver.

    ``p`` scores the forcing, barrier, and solution; ``q`` scores the
    drift and must satisfy 1 <= q < 2, q <= p, and 1/p + 1/q > 1.
    ``delta`` is the window smallness threshold, found adaptively rather
    than derived from the non-explicit constants of the local contraction
    argument; ``max_window`` caps window length in nodes so the quadratic
    variation programs stay bounded.  ``init`` selects the fixed-point
    starting guess: the constant path at the window's entry value, or the
    converged unreflected solution.
    """

    p: float
    q: float
    delta: float = 0.25
    tol: float = 1e-12
    max_iter: int = 50
    max_window: int = 64
    allow_shrink: bool = True
    init: str = "constant"

    def __post_init__(self) -> None:
        if not (1.0 <= self.q < 2.0):
            raise ValueError("drift exponent q must lie in [1, 2)")
        if self.q > self.p:
            raise ValueError("exponents must satisfy q <= p")
        if 1.0 / self.p + 1.0 / self.q <= 1.0:
            raise ValueError("exponents must satisfy 1/p + 1/q > 1")
        if self.delta <= 0 or self.tol <= 0:
            raise ValueError("delta and tol must be positive")
        if self.max_iter < 1 or self.max_window < 1:
            raise ValueError("max_iter and max_window must be at least 1")
        if self.init not in ("constant", "unreflected"):
            raise ValueError("init must be 'constant' or 'unreflected'")


@dataclass(frozen=True)
class WindowRecord:
    """Per-window iteration trace; start == end marks a degenerate window."""

    start: float
    end: float
    iterations: int
    ratios: tuple[float, ...]
    final_distance: float
    shrink_count: int
    theta: float = 1.0


@dataclass(frozen=True)
class SolveFailure:
    """Structured non-convergence: which window failed, and how."""

    reason: str
    window_start: float
    window_end: float
    iterations: int
    last_distance: float
    ratios: tuple[float, ...]


@dataclass(frozen=True)
class SolveReport:
    """Outcome of a reflected solve: residuals and the window trace.

    Residuals are recomputed from the returned solution after pasting, so
    they measure the delivered output rather than internal iterates.
    """

    converged: bool
    windows: tuple[WindowRecord, ...]
    equation_residual: float
    barrier_violation: float
    minimality_residual: float
    non_unique_risk: bool = False
    failure: Optional[SolveFailure] = None


class NonConvergenceError(RuntimeError):
    """Raised when a window's fixed-point iteration fails; carries the report."""

    def __init__(self, message: str, report: SolveReport) -> None:
        super().__init__(message)
        self.report = report


class YoungSolution(NamedTuple):
    y: GridPath
    k: GridPath
    report: SolveReport


# ---------------------------------------------------------------------------
# integration


def _operator_values(values: np.ndarray, d: int) -> np.ndarray:
    """Coerce integrand values to (nodes, n, d) against a d-dimensional driver."""
    if values.ndim == 2:
        if values.shape[1] == d:
            values = values[:, None, :]
        elif d == 1:
            values = values[:, :, None]
        else:
            raise ValueError(
                f"integrand of width {values.shape[1]} cannot act on a "
                f"{d}-dimensional driver"
            )
    if values.ndim != 3 or values.shape[2] != d:
        raise ValueError(f"integrand values {values.shape} do not act on R^{d}")
    return values


def young_integral(integrand: GridPath, driver: GridPath) -> GridPath:
    """Left-point Riemann-Stieltjes prefix sums t_j -> sum_{i<j} Y_i X_{i,i+1}.

    The integrand may be vector-valued (contracted against the driver) or
    operator-valued with values in R^(n x d).  The jump of the result at a
    node equals the integrand's left limit applied to the driver's jump,
    which is what makes left-point sums the right choice for paths that
    jump.
    """
    if integrand.grid != driver.grid:
        raise ValueError("integrand and driver live on different grids")
    vals = _operator_values(integrand.values, driver.dimension)
    dx = np.diff(driver.values, axis=0)
    terms = (vals[:-1] * dx[:, None, :]).sum(axis=2)
    out = np.zeros((len(driver.grid), terms.shape[1]), dtype=terms.dtype)
    np.cumsum(terms, axis=0, out=out[1:])
    return GridPath(driver.grid, out)


def young_estimate_residual(
    integrand: GridPath, driver: GridPath, p: float, q: float, s: float, t: float
) -> float:
    """Empirical constant |int_s^t Y dX - Y_s X_{s,t}| / (|Y|_q,[s,t) |X|_p,[s,t]).

    The supremum of this ratio over inputs is the constant in the Young
    sewing bound; ensembles record empirical maxima.  Returns 0 for 0/0
    and infinity when only the denominator vanishes.
    """
    prefix = young_integral(integrand, driver)
    y_s = _operator_values(integrand.values, driver.dimension)[
        integrand.grid.floor_index(s)
    ]
    corrected = prefix.value_at(t) - prefix.value_at(s) - y_s @ driver.increment(s, t)
    numerator = float(np.sqrt(np.sum(corrected * corrected)))
    denominator = p_variation_open(integrand, q, (s, t)) * p_variation(
        driver, p, (s, t)
    )
    if denominator == 0.0:
        return 0.0 if numerator == 0.0 else float("inf")
    return numerator / denominator


# ---------------------------------------------------------------------------
# solver


def young_jump_step(
    field: VectorField,
    y_prev: np.ndarray,
    da: np.ndarray,
    dx: np.ndarray,
    barrier_next: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """One explicit node step: jump formula dK = [L - Y_prev - f(Y_prev)dA - dX]+.

    Used to cross window boundaries and degenerate windows; the reflector
    increment is the unique choice keeping the discrete equation and
    minimality exact across the step.
    """
    free = y_prev + field.f(y_prev) @ da + dx
    dk = np.maximum(barrier_next - free, 0.0)
    return free + dk, dk


def _row_norms(diffs: np.ndarray) -> np.ndarray:
    flat = diffs.reshape(diffs.shape[0], -1)
    return np.sqrt(np.einsum("ij,ij->i", flat, flat))


def _window_end(
    drift: np.ndarray,
    forcing: np.ndarray,
    barrier: np.ndarray,
    start: int,
    cfg: YoungSolveConfig,
) -> int:
    """Last node j >= start with |A|_q + |X|_p + |L|_p <= delta on [t_start, t_j]."""
    m = drift.shape[0]
    drift_var = IncrementalVariation(cfg.q)
    forcing_var = IncrementalVariation(cfg.p)
    barrier_var = IncrementalVariation(cfg.p)
    j = start
    while j + 1 < m and j - start < cfg.max_window:
        c = j + 1
        total = (
            drift_var.append(_row_norms(drift[start:c] - drift[c]))
            + forcing_var.append(_row_norms(forcing[start:c] - forcing[c]))
            + barrier_var.append(_row_norms(barrier[start:c] - barrier[c]))
        )
        if total > cfg.delta:
            break
        j = c
    return j


def _apply_map(
    field: VectorField,
    y_start: np.ndarray,
    candidate: np.ndarray,
    da: np.ndarray,
    dx: np.ndarray,
    barrier: np.ndarray | None,
) -> tuple[np.ndarray, np.ndarray]:
    """One application of the reflected integral map on a window."""
    fw = field.f(candidate[:-1])
    incr = np.einsum("tij,tj->ti", fw, da) + dx
    free = np.empty_like(candidate)
    free[0] = y_start
    free[1:] = y_start + np.cumsum(incr, axis=0)
    if barrier is None:
        return free, np.zeros_like(free)
    k_local = np.maximum(np.maximum.accumulate(barrier - free, axis=0), 0.0)
    return free + k_local, k_local


def _iterate_window(
    field: VectorField,
    y_start: np.ndarray,
    da: np.ndarray,
    dx: np.ndarray,
    barrier: np.ndarray,
    times: np.ndarray,
    cfg: YoungSolveConfig,
) -> dict:
    """Fixed-point iteration on one window; returns a result dict."""
    window_grid = TimeGrid(times)
    candidate = np.tile(y_start, (barrier.shape[0], 1))

    stages = ["main"] if cfg.init == "constant" else ["prep", "main"]
    iterations = 0
    ratios: list[float] = []
    distance = float("inf")
    for stage in stages:
        wall = barrier if stage == "main" else None
        previous = None
        bad = 0
        converged = False
        for _ in range(cfg.max_iter):
            iterations += 1
            image, k_local = _apply_map(field, y_start, candidate, da, dx, wall)
            step = image - candidate
            distance = float(
                np.sqrt(np.dot(step[0], step[0]))
            ) + p_variation(GridPath(window_grid, step), cfg.p)
            if previous is not None and previous > 0.0:
                ratio = distance / previous
                if stage == "main":
                    ratios.append(ratio)
                bad = bad + 1 if ratio >= 1.0 else 0
                if bad >= _BAD_RATIO_LIMIT:
                    return {
                        "ok": False,
                        "reason": "non-contraction",
                        "iterations": iterations,
                        "distance": distance,
                        "ratios": tuple(ratios),
                    }
            candidate = image
            if distance <= cfg.tol:
                converged = True
                break
            previous = distance
        if not converged:
            return {
                "ok": False,
                "reason": "max-iterations",
                "iterations": iterations,
                "distance": distance,
                "ratios": tuple(ratios),
            }

    # one final application so the output is an exact reflected image
    solution, k_local = _apply_map(field, y_start, candidate, da, dx, barrier)
    return {
        "ok": True,
        "solution": solution,
        "k_local": k_local,
        "iterations": iterations,
        "distance": distance,
        "ratios": tuple(ratios),
    }


def _common_grid(*paths: GridPath) -> tuple[GridPath, ...]:
    grid = paths[0].grid
    for path in paths[1:]:
        if path.grid != grid:
            grid = merge_grids(grid, path.grid)
    return tuple(p.resample(grid) if p.grid != grid else p for p in paths)


def solve_reflected_young(
    field: VectorField,
    y: np.ndarray,
    drift: GridPath,
    forcing: GridPath,
    barrier: GridPath,
    cfg: YoungSolveConfig,
) -> YoungSolution:
    """Solve Y = y + int f(Y) dA + X + K reflected at the lower barrier L.

    Inputs on different grids are merged to the union grid first.  The
    start must be admissible: y + X_0 >= L_0 componentwise.  Raises
    :class:`NonConvergenceError` when a window fails to converge and
    shrinking is disabled or exhausted; the exception carries the report.
    """
    drift, forcing, barrier = _common_grid(drift, forcing, barrier)
    n = field.n
    if forcing.dimension != n or barrier.dimension != n:
        raise ValueError(f"forcing and barrier must be {n}-dimensional")
    if drift.dimension != field.d:
        raise ValueError(f"drift must be {field.d}-dimensional")
    y = np.asarray(y, dtype=float).reshape(n)
    start = y + forcing.values[0]
    if np.any(start < barrier.values[0]):
        raise ValueError("initial value lies below the barrier")

    grid = barrier.grid
    times = grid.times
    m = len(grid)
    da = np.diff(drift.values, axis=0)
    dx = np.diff(forcing.values, axis=0)
    lv = barrier.values
    solution = np.empty((m, n))
    reflector = np.zeros((m, n))
    solution[0] = start

    windows: list[WindowRecord] = []
    i = 0
    while i < m - 1:
        j = _window_end(drift.values, forcing.values, lv, i, cfg)
        shrinks = 0
        while j > i:
            result = _iterate_window(
                field,
                solution[i],
                da[i:j],
                dx[i:j],
                lv[i : j + 1],
                times[i : j + 1],
                cfg,
            )
            if result["ok"]:
                solution[i : j + 1] = result["solution"]
                reflector[i : j + 1] = reflector[i] + result["k_local"]
                windows.append(
                    WindowRecord(
                        start=float(times[i]),
                        end=float(times[j]),
                        iterations=result["iterations"],
                        ratios=result["ratios"],
                        final_distance=result["distance"],
                        shrink_count=shrinks,
                    )
                )
                break
            if not cfg.allow_shrink:
                failure = SolveFailure(
                    reason=result["reason"],
                    window_start=float(times[i]),
                    window_end=float(times[j]),
                    iterations=result["iterations"],
                    last_distance=result["distance"],
                    ratios=result["ratios"],
                )
                report = SolveReport(
                    converged=False,
                    windows=tuple(windows),
                    equation_residual=float("inf"),
                    barrier_violation=float("inf"),
                    minimality_residual=float("inf"),
                    failure=failure,
                )
                raise NonConvergenceError(
                    f"window [{times[i]}, {times[j]}] failed: {result['reason']}",
                    report,
                )
            shrinks += 1
            j = i + (j - i) // 2
        else:
            # degenerate window: a single node, nothing to iterate
            windows.append(
                WindowRecord(
                    start=float(times[i]),
                    end=float(times[i]),
                    iterations=0,
                    ratios=(),
                    final_distance=0.0,
                    shrink_count=shrinks,
                )
            )
        if j < m - 1:
            # cross the window boundary with the explicit jump formula
            stepped, dk = young_jump_step(field, solution[j], da[j], dx[j], lv[j + 1])
            solution[j + 1] = stepped
            reflector[j + 1] = reflector[j] + dk
        i = j + 1

    y_path = GridPath(grid, solution)
    k_path = GridPath(grid, reflector)
    integral = young_integral(GridPath(grid, field.f(solution)), drift)
    free = GridPath(grid, y + integral.values + forcing.values)
    checked = verify_skorokhod(SkorokhodSolution(z=y_path, k=k_path), free, barrier)
    report = SolveReport(
        converged=True,
        windows=tuple(windows),
        equation_residual=float(checked.additive_residual),
        barrier_violation=float(checked.barrier_violation),
        minimality_residual=float(checked.minimality_residual),
    )
    return YoungSolution(y=y_path, k=k_path, report=report)


def stability_ratio(
    field: VectorField,
    data: tuple[np.ndarray, GridPath, GridPath, GridPath],
    data_alt: tuple[np.ndarray, GridPath, GridPath, GridPath],
    cfg: YoungSolveConfig,
) -> float:
    """Solution-to-data distance ratio for two admissible data tuples.

    Each tuple is (y, drift, forcing, barrier).  Solutions are measured
    by initial gap plus variation seminorm, so a pure shift of the start
    with an inactive barrier and a constant-free field scores exactly 1.
    Returns (|Y_0-Y~_0| + |Y-Y~|_p + |K_0-K~_0| + |K-K~|_p) / (|y-y~| +
    |A-A~|_q + |X-X~|_p + |L_0-L~_0| + |L-L~|_p), with 0/0 taken as 0;
    ensemble maxima estimate the data-to-solution stability constant.
    Solver failures propagate.
    """
    y, drift, forcing, barrier = data
    y_alt, drift_alt, forcing_alt, barrier_alt = data_alt
    first = solve_reflected_young(field, y, drift, forcing, barrier, cfg)
    second = solve_reflected_young(field, y_alt, drift_alt, forcing_alt, barrier_alt, cfg)
    solution_gap = (first.y.values[0] - second.y.values[0]).astype(float)
    reflector_gap = (first.k.values[0] - second.k.values[0]).astype(float)
    numerator = (
        float(np.sqrt(np.dot(solution_gap, solution_gap)))
        + variation_distance(first.y, second.y, cfg.p)
        + float(np.sqrt(np.dot(reflector_gap, reflector_gap)))
        + variation_distance(first.k, second.k, cfg.p)
    )
    y0_gap = np.asarray(y, dtype=float) - np.asarray(y_alt, dtype=float)
    l0_gap = (barrier.values[0] - barrier_alt.values[0]).astype(float)
    denominator = (
        float(np.sqrt(np.dot(y0_gap.ravel(), y0_gap.ravel())))
        + variation_distance(drift, drift_alt, cfg.q)
        + variation_distance(forcing, forcing_alt, cfg.p)
        + float(np.sqrt(np.dot(l0_gap, l0_gap)))
        + variation_distance(barrier, barrier_alt, cfg.p)
    )
    if denominator == 0.0:
        return 0.0
    return float(numerator / denominator)
