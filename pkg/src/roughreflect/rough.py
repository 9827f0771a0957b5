"""Level-2 rough paths, controlled paths, and the reflected rough solver.

A level-2 rough path pairs a driver X with second-order data standing in
for the iterated integrals int X^a dX^b.  The data is stored as prefix
matrices from the origin; every two-parameter block is reconstructed in
O(d^2) through the additivity relation, which therefore holds exactly by
construction.  The solver mirrors the reflected Young solver: small
windows in the rough seminorm, a damped fixed-point iteration of the
reflected compensated-integral map measured in a controlled-path metric,
and explicit jump steps across window boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import IO, NamedTuple, Optional, Union

import numpy as np

from .fields import VectorField
from .paths import (
    GridPath,
    IncrementalVariation,
    TimeGrid,
    p_variation,
    read_csv,
    variation_from_cells,
    write_csv,
)
from .skorokhod import SkorokhodSolution, verify_skorokhod
from .young import (
    NonConvergenceError,
    SolveFailure,
    SolveReport,
    WindowRecord,
    _operator_values,
)

__all__ = [
    "Level2RoughPath",
    "ControlledPath",
    "RdeSolveConfig",
    "RdeSolution",
    "chen_lookup",
    "left_point_lift",
    "perturb_area",
    "two_param_p_variation",
    "rough_seminorm",
    "remainder",
    "controlled_norm",
    "compose_controlled",
    "rough_integral",
    "rough_jump_step",
    "solve_reflected_rde",
    "rough_to_csv",
    "rough_from_csv",
]

_MIN_THETA = 1.0 / 16.0


# ---------------------------------------------------------------------------
# level-2 paths


@dataclass(frozen=True, eq=False)
class Level2RoughPath:
    """Driver path with second-order prefix data 'XX_{0,t_j}' per node.

    ``prefix[j][a, b]`` plays the role of int_0^{t_j} X^a dX^b relative to
    the declared order of integration; the block over [s, t] is recovered
    as prefix difference minus X_{0,s} (x) X_{s,t}, so the two-parameter
    additivity relation is an identity of the representation rather than a
    property to maintain.
    """

    path: GridPath
    prefix: np.ndarray
    p: float = 2.5

    def __post_init__(self) -> None:
        d = self.path.dimension
        pre = np.asarray(self.prefix, dtype=float)
        if pre.shape != (len(self.path.grid), d, d):
            raise ValueError(
                f"prefix shape {pre.shape} does not match {len(self.path.grid)} "
                f"nodes of a {d}-dimensional path"
            )
        if np.any(pre[0] != 0.0):
            raise ValueError("second-order prefix must vanish at the origin")
        if not 2.0 <= self.p < 3.0:
            raise ValueError("rough exponent p must lie in [2, 3)")
        object.__setattr__(self, "prefix", pre)

    @property
    def dimension(self) -> int:
        return self.path.dimension


def _blocks_from(rough: Level2RoughPath, i: int, targets: slice) -> np.ndarray:
    """Blocks over [t_i, t_j] for every j in targets, each (d, d)."""
    x = rough.path.values
    base = x[i] - x[0]
    incr = x[targets] - x[i]
    return (
        rough.prefix[targets]
        - rough.prefix[i]
        - base[:, None] * incr[:, None, :]
    )


def _consecutive_blocks(rough: Level2RoughPath) -> np.ndarray:
    """Blocks over every consecutive node pair, shape (nodes-1, d, d)."""
    x = rough.path.values
    base = x[:-1] - x[0]
    incr = np.diff(x, axis=0)
    return (
        rough.prefix[1:]
        - rough.prefix[:-1]
        - base[:, :, None] * incr[:, None, :]
    )


def chen_lookup(rough: Level2RoughPath, s: float, t: float) -> np.ndarray:
    """Second-order block over [s, t], reconstructed from the prefixes."""
    if t < s:
        raise ValueError("block lookup requires s <= t")
    i = rough.path.grid.floor_index(s)
    j = rough.path.grid.floor_index(t)
    x = rough.path.values
    return (
        rough.prefix[j]
        - rough.prefix[i]
        - np.outer(x[i] - x[0], x[j] - x[i])
    )


def left_point_lift(path: GridPath, p: float = 2.5) -> Level2RoughPath:
    """Lift by left-point second-order sums: prefixes sum_{i<j} X_{0,i} (x) dX_i.

    The blocks over consecutive nodes vanish, so compensated integrals
    against this lift reduce to plain left-point sums; this is the lift a
    forward (non-anticipating) integration theory assigns to the path.
    """
    x = path.values
    centered = x - x[0]
    terms = centered[:-1, :, None] * np.diff(x, axis=0)[:, None, :]
    prefix = np.zeros((x.shape[0], path.dimension, path.dimension))
    np.cumsum(terms, axis=0, out=prefix[1:])
    return Level2RoughPath(path=path, prefix=prefix, p=p)


def perturb_area(rough: Level2RoughPath, t: float, matrix: np.ndarray) -> Level2RoughPath:
    """Inject a second-order jump at a grid node: blocks spanning t gain matrix.

    Adds the matrix to every prefix from the node at time t on, which by
    the block reconstruction perturbs exactly the cells straddling that
    node.  Used to build lifts whose second level moves independently of
    the first.
    """
    grid = rough.path.grid
    k = grid.floor_index(t)
    if grid.times[k] != t:
        raise ValueError(f"time {t} is not a grid node")
    if k == 0:
        raise ValueError("the origin cannot carry a second-order jump")
    add = np.asarray(matrix, dtype=float)
    d = rough.dimension
    if add.shape != (d, d):
        raise ValueError(f"perturbation must be ({d}, {d})")
    prefix = rough.prefix.copy()
    prefix[k:] += add
    return Level2RoughPath(path=rough.path, prefix=prefix, p=rough.p)


def _interval_indices(grid: TimeGrid, interval: tuple[float, float] | None) -> np.ndarray:
    s, t = interval if interval is not None else (grid.start, grid.end)
    if not (grid.start <= s < t <= grid.end):
        raise ValueError(f"interval [{s}, {t}] not inside the grid span")
    inner = np.nonzero((grid.times > s) & (grid.times < t))[0]
    return np.concatenate(([grid.floor_index(s)], inner, [grid.floor_index(t)]))


def two_param_p_variation(
    rough: Level2RoughPath, r: float, interval: tuple[float, float] | None = None
) -> float:
    """r-variation of the second-order blocks: (sup sum |XX_{u,v}|^r)^(1/r)."""
    if r < 1:
        raise ValueError("variation exponent must be at least 1")
    idx = _interval_indices(rough.path.grid, interval)
    k = idx.size
    norms = np.zeros((k, k))
    for a in range(k - 1):
        blocks = _blocks_from(rough, idx[a], idx[a + 1 :])
        norms[a, a + 1 :] = np.sqrt(
            np.einsum("ijk,ijk->i", blocks, blocks)
        )
    return variation_from_cells(norms, r)


def rough_seminorm(
    rough: Level2RoughPath,
    interval: tuple[float, float] | None = None,
    p: float | None = None,
) -> float:
    """|X|_p + |XX|_{p/2} over the interval, at the path's own p by default."""
    p = rough.p if p is None else p
    return p_variation(rough.path, p, interval) + two_param_p_variation(
        rough, p / 2.0, interval
    )


# ---------------------------------------------------------------------------
# controlled paths


@dataclass(frozen=True, eq=False)
class ControlledPath:
    """Path controlled by a reference driver, with its first-order derivative.

    The derivative carries one extra trailing axis of the driver dimension:
    a vector path (nodes, n) has derivative (nodes, n, d), an operator path
    (nodes, n, d) has derivative (nodes, n, d, d).  The remainder
    Y_{s,t} - Y'_s X_{s,t} is the part of the increment the derivative
    fails to explain; its p/2-variation is what makes the pair controlled.
    """

    reference: GridPath
    path: GridPath
    derivative: GridPath

    def __post_init__(self) -> None:
        if self.reference.grid != self.path.grid or self.path.grid != self.derivative.grid:
            raise ValueError("controlled path pieces live on different grids")
        d = self.reference.dimension
        if self.derivative.values.shape != self.path.values.shape + (d,):
            raise ValueError(
                f"derivative shape {self.derivative.values.shape} does not extend "
                f"path shape {self.path.values.shape} by the driver dimension {d}"
            )


def remainder(ctrl: ControlledPath, s: float, t: float) -> np.ndarray:
    """Unexplained increment Y_{s,t} - Y'_s X_{s,t}."""
    xinc = ctrl.reference.increment(s, t)
    linear = ctrl.derivative.value_at(s) @ xinc
    return ctrl.path.increment(s, t) - linear


def _remainder_cells(
    path_values: np.ndarray, derivative_values: np.ndarray, x_values: np.ndarray
) -> np.ndarray:
    """Frobenius norms of the remainder over every node cell, (k, k)."""
    k = path_values.shape[0]
    norms = np.zeros((k, k))
    flat = path_values.reshape(k, -1)
    dflat = derivative_values.reshape(k, -1, x_values.shape[1])
    for i in range(k - 1):
        linear = dflat[i] @ (x_values[i + 1 :] - x_values[i]).T
        cells = flat[i + 1 :] - flat[i] - linear.T
        norms[i, i + 1 :] = np.sqrt(np.einsum("ij,ij->i", cells, cells))
    return norms


def controlled_norm(ctrl: ControlledPath, p: float) -> float:
    """|Y_0| + |Y'_0| + |Y'|_p + |R|_{p/2}, the controlled-path norm."""
    y0 = ctrl.path.values[0].ravel()
    d0 = ctrl.derivative.values[0].ravel()
    cells = _remainder_cells(
        ctrl.path.values, ctrl.derivative.values, ctrl.reference.values
    )
    return (
        float(np.sqrt(np.dot(y0, y0)))
        + float(np.sqrt(np.dot(d0, d0)))
        + p_variation(ctrl.derivative, p)
        + variation_from_cells(cells, p / 2.0)
    )


def compose_controlled(field: VectorField, ctrl: ControlledPath) -> ControlledPath:
    """Push a controlled path through a field: (Y, Y') -> (f(Y), Df(Y) Y').

    Requires a field with declared bounds up to the third derivative,
    which is what keeps the composed remainder controlled.
    """
    if field.smooth_order() < 3:
        raise ValueError("composition requires a declared third-derivative bound")
    y = ctrl.path.values
    if y.ndim != 2 or y.shape[1] != field.n:
        raise ValueError(f"controlled path must be {field.n}-dimensional")
    values = field.f(y)
    derivative = np.einsum("tijm,tmk->tijk", field.df(y), ctrl.derivative.values)
    grid = ctrl.path.grid
    return ControlledPath(
        reference=ctrl.reference,
        path=GridPath(grid, values),
        derivative=GridPath(grid, derivative),
    )


def rough_integral(ctrl: ControlledPath, rough: Level2RoughPath) -> ControlledPath:
    """Compensated left-point integral sum_{i<j} (Y_i dX_i + Y'_i XX_{i,i+1}).

    The integrand must be controlled by the rough path's driver.  Returns
    the prefix integral as a controlled path whose derivative is the
    integrand itself; its jump at a node is Y_{t-} dX_t + Y'_{t-} dXX_t,
    exactly.
    """
    if ctrl.reference.grid != rough.path.grid or not np.array_equal(
        ctrl.reference.values, rough.path.values
    ):
        raise ValueError("integrand is not controlled by this rough path's driver")
    d = rough.dimension
    vals = _operator_values(ctrl.path.values, d)
    m, n = vals.shape[:2]
    try:
        deriv = ctrl.derivative.values.reshape(m, n, d, d)
    except ValueError:
        raise ValueError(
            f"derivative shape {ctrl.derivative.values.shape} does not match "
            f"an (n x d)-valued integrand against a {d}-dimensional driver"
        ) from None
    dx = np.diff(rough.path.values, axis=0)
    blocks = _consecutive_blocks(rough)
    terms = np.einsum("tij,tj->ti", vals[:-1], dx) + np.einsum(
        "tijk,tkj->ti", deriv[:-1], blocks
    )
    out = np.zeros((m, n))
    np.cumsum(terms, axis=0, out=out[1:])
    grid = rough.path.grid
    return ControlledPath(
        reference=rough.path,
        path=GridPath(grid, out),
        derivative=GridPath(grid, vals),
    )


# ---------------------------------------------------------------------------
# reflected solver


@dataclass(frozen=True)
class RdeSolveConfig:
    """Exponents and iteration controls for the reflected rough solver.

    ``p`` in [2, 3) scores the driver; the auxiliary ``q`` in (p, 3),
    default (p+3)/2, is the exponent of the controlled metric in which
    iterates are compared.  ``theta`` damps the fixed-point update and is
    halved whenever the iteration oscillates, down to a floor before the
    window is declared non-contracting.
    """

    p: float
    q: Optional[float] = None
    delta: float = 0.25
    tol: float = 1e-12
    max_iter: int = 50
    theta: float = 1.0
    max_window: int = 64
    allow_shrink: bool = True
    init: str = "constant"

    def __post_init__(self) -> None:
        if not 2.0 <= self.p < 3.0:
            raise ValueError("rough exponent p must lie in [2, 3)")
        if self.q is None:
            object.__setattr__(self, "q", (self.p + 3.0) / 2.0)
        if not self.p < self.q < 3.0:
            raise ValueError("metric exponent q must lie in (p, 3)")
        if self.delta <= 0 or self.tol <= 0:
            raise ValueError("delta and tol must be positive")
        if self.max_iter < 1 or self.max_window < 1:
            raise ValueError("max_iter and max_window must be at least 1")
        if not 0.0 < self.theta <= 1.0:
            raise ValueError("damping factor theta must lie in (0, 1]")
        if self.init not in ("constant", "unreflected"):
            raise ValueError("init must be 'constant' or 'unreflected'")


class RdeSolution(NamedTuple):
    y: GridPath
    derivative: GridPath
    k: GridPath
    report: SolveReport


def rough_jump_step(
    field: VectorField,
    y_prev: np.ndarray,
    dx: np.ndarray,
    dxx: np.ndarray,
    barrier_next: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """One explicit node step of the reflected rough equation.

    dK = [L - Y_prev - f(Y_prev) dX - Df(Y_prev) f(Y_prev) dXX]+ is the
    only reflector increment consistent with minimality across a node
    where both levels of the driver jump.
    """
    fy = field.f(y_prev)
    tensor = np.einsum("ijm,mk->ijk", field.df(y_prev), fy)
    free = y_prev + fy @ dx + np.einsum("ijk,kj->i", tensor, dxx)
    dk = np.maximum(barrier_next - free, 0.0)
    return free + dk, dk


def _row_norms(diffs: np.ndarray) -> np.ndarray:
    flat = diffs.reshape(diffs.shape[0], -1)
    return np.sqrt(np.einsum("ij,ij->i", flat, flat))


def _window_end(
    rough: Level2RoughPath, barrier: np.ndarray, start: int, cfg: RdeSolveConfig
) -> int:
    """Last node j >= start with rough seminorm + |L|_p <= delta on [t_start, t_j]."""
    x = rough.path.values
    m = x.shape[0]
    path_var = IncrementalVariation(cfg.p)
    block_var = IncrementalVariation(cfg.p / 2.0)
    barrier_var = IncrementalVariation(cfg.p)
    j = start
    while j + 1 < m and j - start < cfg.max_window:
        c = j + 1
        base = x[start:c] - x[0]
        incr = x[c] - x[start:c]
        cells = (
            rough.prefix[c]
            - rough.prefix[start:c]
            - base[:, :, None] * incr[:, None, :]
        )
        total = (
            path_var.append(_row_norms(x[start:c] - x[c]))
            + block_var.append(np.sqrt(np.einsum("ijk,ijk->i", cells, cells)))
            + barrier_var.append(_row_norms(barrier[start:c] - barrier[c]))
        )
        if total > cfg.delta:
            break
        j = c
    return j


def _controlled_distance(
    old: np.ndarray,
    new: np.ndarray,
    f_old: np.ndarray,
    f_new: np.ndarray,
    x_window: np.ndarray,
    grid: TimeGrid,
    cfg: RdeSolveConfig,
) -> float:
    """Metric |f(Y)-f(Y~)|_q + |R - R~|_{q/2} between successive iterates."""
    df = f_new - f_old
    deriv_part = p_variation(GridPath(grid, df), cfg.q)
    dw = new - old
    k = dw.shape[0]
    norms = np.zeros((k, k))
    dflat = df.reshape(k, -1, x_window.shape[1])
    for i in range(k - 1):
        linear = dflat[i] @ (x_window[i + 1 :] - x_window[i]).T
        cells = dw[i + 1 :] - dw[i] - linear.T
        norms[i, i + 1 :] = np.sqrt(np.einsum("ij,ij->i", cells, cells))
    return deriv_part + variation_from_cells(norms, cfg.q / 2.0)


def _apply_map(
    field: VectorField,
    y_start: np.ndarray,
    candidate: np.ndarray,
    f_candidate: np.ndarray,
    dx: np.ndarray,
    blocks: np.ndarray,
    barrier: np.ndarray | None,
) -> tuple[np.ndarray, np.ndarray]:
    """One application of the reflected compensated-integral map on a window."""
    tensor = np.einsum("tijm,tmk->tijk", field.df(candidate[:-1]), f_candidate[:-1])
    incr = np.einsum("tij,tj->ti", f_candidate[:-1], dx) + np.einsum(
        "tijk,tkj->ti", tensor, blocks
    )
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
    dx: np.ndarray,
    blocks: np.ndarray,
    x_window: np.ndarray,
    barrier: np.ndarray,
    times: np.ndarray,
    cfg: RdeSolveConfig,
) -> dict:
    """Damped fixed-point iteration on one window; returns a result dict."""
    window_grid = TimeGrid(times)
    candidate = np.tile(y_start, (barrier.shape[0], 1))
    f_candidate = field.f(candidate)
    theta = cfg.theta

    stages = ["main"] if cfg.init == "constant" else ["prep", "main"]
    iterations = 0
    ratios: list[float] = []
    distance = float("inf")
    for stage in stages:
        wall = barrier if stage == "main" else None
        previous = None
        converged = False
        for _ in range(cfg.max_iter):
            iterations += 1
            image, _ = _apply_map(
                field, y_start, candidate, f_candidate, dx, blocks, wall
            )
            damped = candidate + theta * (image - candidate)
            f_damped = field.f(damped)
            distance = _controlled_distance(
                candidate, damped, f_candidate, f_damped, x_window, window_grid, cfg
            )
            if previous is not None and previous > 0.0:
                ratio = distance / previous
                if stage == "main":
                    ratios.append(ratio)
                if ratio >= 1.0:
                    # oscillation: damp harder before giving up on the window
                    theta *= 0.5
                    if theta < _MIN_THETA:
                        return {
                            "ok": False,
                            "reason": "non-contraction",
                            "iterations": iterations,
                            "distance": distance,
                            "ratios": tuple(ratios),
                        }
            candidate, f_candidate = damped, f_damped
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

    # one final undamped application so the output is an exact reflected image
    solution, k_local = _apply_map(
        field, y_start, candidate, f_candidate, dx, blocks, barrier
    )
    return {
        "ok": True,
        "solution": solution,
        "k_local": k_local,
        "iterations": iterations,
        "distance": distance,
        "ratios": tuple(ratios),
        "theta": theta,
    }


def solve_reflected_rde(
    field: VectorField,
    y: np.ndarray,
    rough: Level2RoughPath,
    barrier: GridPath,
    cfg: RdeSolveConfig,
) -> RdeSolution:
    """Solve Y = y + int f(Y) dX + K reflected at the lower barrier L.

    The integral is the compensated left-point sum against the given
    level-2 driver, with the Gubinelli derivative pinned to f(Y).  The
    start must satisfy y >= L_0 componentwise.  Raises
    :class:`NonConvergenceError` when a window fails to converge and
    shrinking is disabled or exhausted; for a multidimensional state the
    report flags a uniqueness risk unless the field is lower triangular.
    """
    if field.smooth_order() < 3:
        raise ValueError("the rough solver requires a declared third-derivative bound")
    if barrier.grid != rough.path.grid:
        raise ValueError("driver and barrier live on different grids")
    n = field.n
    if barrier.dimension != n:
        raise ValueError(f"barrier must be {n}-dimensional")
    if rough.dimension != field.d:
        raise ValueError(f"driver must be {field.d}-dimensional")
    y = np.asarray(y, dtype=float).reshape(n)
    if np.any(y < barrier.values[0]):
        raise ValueError("initial value lies below the barrier")

    grid = barrier.grid
    times = grid.times
    m = len(grid)
    xv = rough.path.values
    dx = np.diff(xv, axis=0)
    blocks = _consecutive_blocks(rough)
    lv = barrier.values
    solution = np.empty((m, n))
    reflector = np.zeros((m, n))
    solution[0] = y

    windows: list[WindowRecord] = []
    i = 0
    while i < m - 1:
        j = _window_end(rough, lv, i, cfg)
        shrinks = 0
        while j > i:
            result = _iterate_window(
                field,
                solution[i],
                dx[i:j],
                blocks[i:j],
                xv[i : j + 1],
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
                        theta=result["theta"],
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
                    non_unique_risk=n > 1 and not field.lower_triangular,
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
                    theta=cfg.theta,
                )
            )
        if j < m - 1:
            # cross the window boundary with the explicit jump formula
            stepped, dk = rough_jump_step(
                field, solution[j], dx[j], blocks[j], lv[j + 1]
            )
            solution[j + 1] = stepped
            reflector[j + 1] = reflector[j] + dk
        i = j + 1

    y_path = GridPath(grid, solution)
    k_path = GridPath(grid, reflector)
    derivative_path = GridPath(grid, field.f(solution))
    ctrl = ControlledPath(
        reference=rough.path, path=y_path, derivative=derivative_path
    )
    integral = rough_integral(compose_controlled(field, ctrl), rough)
    free = GridPath(grid, y + integral.path.values)
    checked = verify_skorokhod(SkorokhodSolution(z=y_path, k=k_path), free, barrier)
    report = SolveReport(
        converged=True,
        windows=tuple(windows),
        equation_residual=float(checked.additive_residual),
        barrier_violation=float(checked.barrier_violation),
        minimality_residual=float(checked.minimality_residual),
        non_unique_risk=n > 1 and not field.lower_triangular,
    )
    return RdeSolution(y=y_path, derivative=derivative_path, k=k_path, report=report)


# ---------------------------------------------------------------------------
# delimited I/O


def rough_to_csv(rough: Level2RoughPath, file: Union[str, IO[str]]) -> None:
    """Write path columns x1..xd followed by prefix columns xx11..xxdd (row-major)."""
    d = rough.dimension
    cols = {f"x{a + 1}": rough.path.values[:, a] for a in range(d)}
    for a in range(d):
        for b in range(d):
            cols[f"xx{a + 1}{b + 1}"] = rough.prefix[:, a, b]
    write_csv(file, rough.path.grid, cols)


def rough_from_csv(file: Union[str, IO[str]], p: float = 2.5) -> Level2RoughPath:
    """Read a lift written by :func:`rough_to_csv`."""
    grid, names, matrix = read_csv(file)
    d = sum(1 for name in names if name.startswith("x") and not name.startswith("xx"))
    expected = [f"x{a + 1}" for a in range(d)] + [
        f"xx{a + 1}{b + 1}" for a in range(d) for b in range(d)
    ]
    if names != expected:
        raise ValueError("columns do not match a serialized level-2 rough path")
    path = GridPath(grid, matrix[:, :d])
    prefix = matrix[:, d:].reshape(len(grid), d, d)
    return Level2RoughPath(path=path, prefix=prefix, p=p)
