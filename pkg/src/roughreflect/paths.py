"""Cadlag paths on finite time grids and their p-variation calculus.

Paths are piecewise constant between grid nodes (staircase semantics), so
jumps happen only at nodes and every quantity computed here is exact for
the stored data rather than a discretization of something finer.  The
variation norms accept any exponent p >= 1 and are evaluated by dynamic
programming over the nodes, which realizes the supremum over partitions
exactly for staircase paths.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from itertools import combinations
from typing import IO, Iterable, Sequence, Union

import numpy as np

__all__ = [
    "TimeGrid",
    "GridPath",
    "TimeChange",
    "IncrementalVariation",
    "merge_grids",
    "p_variation",
    "p_variation_open",
    "variation_power_sum",
    "variation_from_cells",
    "variation_distance",
    "sup_distance",
    "j1_distance",
    "write_csv",
    "read_csv",
    "path_to_csv",
    "path_from_csv",
]


# ---------------------------------------------------------------------------
# grids


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Strictly increasing finite set of times; the first node is the origin."""

    times: np.ndarray

    def __post_init__(self) -> None:
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise ValueError("a grid needs at least two nodes")
        if not np.all(np.diff(t) > 0.0):
            raise ValueError("grid times must be strictly increasing")
        object.__setattr__(self, "times", t)

    @classmethod
    def uniform(cls, start: float, end: float, nodes: int) -> "TimeGrid":
        """Evenly spaced grid with the given number of nodes."""
        return cls(np.linspace(float(start), float(end), int(nodes)))

    def __len__(self) -> int:
        return int(self.times.size)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, TimeGrid) and np.array_equal(self.times, other.times)

    def __hash__(self) -> int:
        return hash(self.times.tobytes())

    @property
    def start(self) -> float:
        return float(self.times[0])

    @property
    def end(self) -> float:
        return float(self.times[-1])

    def floor_index(self, t: float) -> int:
        """Index of the last node <= t."""
        if t < self.times[0]:
            raise ValueError(f"time {t} precedes the grid origin {self.times[0]}")
        return int(np.searchsorted(self.times, t, side="right")) - 1

    def strict_floor_index(self, t: float) -> int:
        """Index of the last node < t, or -1 if there is none."""
        return int(np.searchsorted(self.times, t, side="left")) - 1


def merge_grids(a: TimeGrid, b: TimeGrid) -> TimeGrid:
    """Union of the nodes of two grids."""
    return TimeGrid(np.union1d(a.times, b.times))


# ---------------------------------------------------------------------------
# paths


@dataclass(frozen=True, eq=False)
class GridPath:
    """Staircase path: ``values[j]`` is the state on [t_j, t_{j+1}).

    The left limit at the origin equals the initial value, so the path has
    no jump at time zero by convention.  Values are stored as an array with
    the node axis first; one-dimensional input is widened to a single
    column, and operator-valued paths may carry extra trailing axes.
    Object-dtype arrays (e.g. ``fractions.Fraction`` entries) are kept as
    given so exact arithmetic flows through untouched.
    """

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values)
        if v.dtype != object:
            v = v.astype(float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim < 2 or v.shape[0] != len(self.grid):
            raise ValueError(
                f"values shape {v.shape} does not match grid of {len(self.grid)} nodes"
            )
        object.__setattr__(self, "values", v)

    @property
    def dimension(self) -> int:
        if self.values.ndim != 2:
            raise ValueError("operator-valued path; inspect values.shape instead")
        return int(self.values.shape[1])

    def value_at(self, t: float) -> np.ndarray:
        """State at time t (right-continuous evaluation)."""
        return self.values[self.grid.floor_index(t)].copy()

    def left_limit(self, t: float) -> np.ndarray:
        """State just before time t; at or before the origin, the initial value."""
        i = self.grid.strict_floor_index(t)
        return self.values[max(i, 0)].copy()

    def increment(self, s: float, t: float) -> np.ndarray:
        """Difference of states, value_at(t) - value_at(s)."""
        if t < s:
            raise ValueError("increment requires s <= t")
        return self.value_at(t) - self.value_at(s)

    def jump(self, t: float) -> np.ndarray:
        """Jump at time t; zero away from grid nodes and at the origin."""
        if t < self.grid.start or t > self.grid.end:
            raise ValueError(f"time {t} outside the grid span")
        return self.value_at(t) - self.left_limit(t)

    def resample(self, grid: TimeGrid) -> "GridPath":
        """Staircase sample onto another grid (exact on refinements)."""
        if grid.start < self.grid.start:
            raise ValueError("target grid starts before the path origin")
        idx = np.searchsorted(self.grid.times, grid.times, side="right") - 1
        return GridPath(grid, self.values[idx])

    def _check_same_grid(self, other: "GridPath") -> None:
        if self.grid != other.grid:
            raise ValueError("paths live on different grids; resample first")

    def __add__(self, other: "GridPath") -> "GridPath":
        self._check_same_grid(other)
        return GridPath(self.grid, self.values + other.values)

    def __sub__(self, other: "GridPath") -> "GridPath":
        self._check_same_grid(other)
        return GridPath(self.grid, self.values - other.values)

    def __mul__(self, scalar: float) -> "GridPath":
        return GridPath(self.grid, self.values * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "GridPath":
        return GridPath(self.grid, -self.values)


# ---------------------------------------------------------------------------
# variation norms

# Increment sizes use the Euclidean norm on vectors; callers that score
# matrix-valued cells flatten them first, which yields the Frobenius norm.


def _row_norms(diffs: np.ndarray) -> np.ndarray:
    flat = diffs.reshape(diffs.shape[0], -1)
    return np.sqrt(np.einsum("ij,ij->i", flat, flat))


def _power_sum_float(vals: np.ndarray, p: float) -> float:
    best = np.zeros(vals.shape[0])
    for j in range(1, vals.shape[0]):
        w = _row_norms(vals[:j] - vals[j]) ** p
        best[j] = np.max(best[:j] + w)
    return float(best[-1])


def _power_sum_exact(vals: np.ndarray, p: float):
    # Exact arithmetic supports |x|^p only for integer p in one dimension
    # or even integer p in general (squared norms stay rational).
    ip = int(p)
    if ip != p:
        raise ValueError("exact-arithmetic variation needs an integer exponent")
    if vals.ndim != 2:
        raise ValueError("exact-arithmetic variation supports vector paths only")
    d = vals.shape[1]
    if d > 1 and ip % 2 != 0:
        raise ValueError(
            "exact-arithmetic variation in several dimensions needs an even exponent"
        )
    rows = [tuple(row) for row in vals]
    best = [0] * len(rows)
    for j in range(1, len(rows)):
        for i in range(j):
            if d == 1:
                w = abs(rows[i][0] - rows[j][0]) ** ip
            else:
                w = sum((a - b) ** 2 for a, b in zip(rows[i], rows[j])) ** (ip // 2)
            cand = best[i] + w
            if cand > best[j]:
                best[j] = cand
    return best[-1]


def _interval_values(path: GridPath, s: float, t: float) -> np.ndarray:
    """Staircase states at s, at every node strictly inside (s, t), and at t.

    For a staircase path the supremum over all partitions of [s, t] is
    attained on partitions through these points, so the dynamic program
    over them is exact.
    """
    grid = path.grid
    if not (grid.start <= s < t <= grid.end):
        raise ValueError(f"interval [{s}, {t}] not inside the grid span")
    inside = (grid.times > s) & (grid.times < t)
    pieces = [path.value_at(s)[None], path.values[inside], path.value_at(t)[None]]
    return np.concatenate(pieces, axis=0)


def variation_power_sum(
    path: GridPath, p: float, interval: tuple[float, float] | None = None
):
    """Supremum over partitions of the p-th power increment sum.

    This is the p-variation before taking the 1/p root.  Exact inputs
    (object dtype) give an exact result when the exponent allows it.
    """
    if p < 1:
        raise ValueError("variation exponent must be at least 1")
    s, t = interval if interval is not None else (path.grid.start, path.grid.end)
    vals = _interval_values(path, s, t)
    if vals.dtype == object:
        return _power_sum_exact(vals, p)
    return _power_sum_float(vals, p)


def p_variation(
    path: GridPath, p: float, interval: tuple[float, float] | None = None
) -> float:
    """p-variation norm of the path over [s, t] (the whole span by default)."""
    return float(variation_power_sum(path, p, interval)) ** (1.0 / p)


def p_variation_open(
    path: GridPath, p: float, interval: tuple[float, float] | None = None
) -> float:
    """p-variation over [s, t): the supremum of the closed norms over [s, u], u < t.

    For staircase paths this equals the closed norm up to the last node
    strictly before t, and vanishes when no such node exceeds s.
    """
    s, t = interval if interval is not None else (path.grid.start, path.grid.end)
    if not (path.grid.start <= s < t):
        raise ValueError("open interval needs start <= s < t")
    u = path.grid.strict_floor_index(t)
    if u < 0 or path.grid.times[u] <= s:
        return 0.0
    return p_variation(path, p, (s, float(path.grid.times[u])))


def variation_from_cells(norms: np.ndarray, r: float) -> float:
    """r-variation of a two-parameter cell function from its cell norms.

    ``norms[i, j]`` scores the cell spanning nodes i < j; entries on or
    below the diagonal are ignored.  Returns (sup over partitions of the
    r-th power cell sum)^(1/r), the norm used for second-order blocks.
    """
    k = norms.shape[0]
    best = np.zeros(k)
    for j in range(1, k):
        best[j] = np.max(best[:j] + norms[:j, j] ** r)
    return float(best[-1]) ** (1.0 / r)


class IncrementalVariation:
    """Running r-variation over a growing window of nodes.

    Feeds the window search in the solvers: each ``append`` extends the
    window by one node at O(window) cost and returns the updated norm.
    ``weights[i]`` must score the cell between retained node i and the
    incoming node (for a path, the increment norm between those nodes).
    """

    def __init__(self, r: float) -> None:
        if r <= 0:
            raise ValueError("variation order must be positive")
        self.r = float(r)
        self._best = [0.0]

    def __len__(self) -> int:
        return len(self._best)

    def append(self, weights: Sequence[float]) -> float:
        w = np.asarray(weights, dtype=float)
        if w.shape != (len(self._best),):
            raise ValueError(
                f"expected {len(self._best)} cell weights, got {w.shape}"
            )
        best = np.array(self._best)
        value = float(np.max(best + w ** self.r))
        self._best.append(value)
        return value ** (1.0 / self.r)


# ---------------------------------------------------------------------------
# distances


def _align(a: GridPath, b: GridPath) -> tuple[GridPath, GridPath]:
    if a.grid.start != b.grid.start or a.grid.end != b.grid.end:
        raise ValueError("paths cover different time spans")
    if a.grid == b.grid:
        return a, b
    grid = merge_grids(a.grid, b.grid)
    return a.resample(grid), b.resample(grid)


def variation_distance(a: GridPath, b: GridPath, p: float) -> float:
    """p-variation norm of the difference, after aligning grids."""
    a, b = _align(a, b)
    return p_variation(a - b, p)


def sup_distance(a: GridPath, b: GridPath) -> float:
    """Uniform distance max_t |a_t - b_t|, after aligning grids."""
    a, b = _align(a, b)
    return float(np.max(_row_norms(a.values - b.values), initial=0.0))


# ---------------------------------------------------------------------------
# time changes and the jump-tolerant distance


@dataclass(frozen=True, eq=False)
class TimeChange:
    """Strictly increasing piecewise-linear reparametrization of a time span.

    Maps ``domain[0]`` to ``image[0]`` and ``domain[-1]`` to ``image[-1]``,
    interpolating linearly between the stored knots.
    """

    domain: np.ndarray
    image: np.ndarray

    def __post_init__(self) -> None:
        d = np.asarray(self.domain, dtype=float)
        m = np.asarray(self.image, dtype=float)
        if d.shape != m.shape or d.ndim != 1 or d.size < 2:
            raise ValueError("domain and image must be matching 1-d knot arrays")
        if not (np.all(np.diff(d) > 0) and np.all(np.diff(m) > 0)):
            raise ValueError("time-change knots must be strictly increasing")
        object.__setattr__(self, "domain", d)
        object.__setattr__(self, "image", m)

    @classmethod
    def identity(cls, grid: TimeGrid) -> "TimeChange":
        ends = np.array([grid.start, grid.end])
        return cls(ends, ends)

    def __call__(self, t: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        out = np.interp(t, self.domain, self.image)
        return float(out) if np.isscalar(t) else out

    def inverse(self) -> "TimeChange":
        return TimeChange(self.image, self.domain)

    def distortion(self) -> float:
        """Uniform distance to the identity; attained at a knot."""
        return float(np.max(np.abs(self.image - self.domain)))

    def apply(self, path: GridPath) -> GridPath:
        """The reparametrized path t -> path(lambda(t)).

        A staircase path composed with a strictly increasing time change is
        again a staircase path, jumping where lambda crosses the original
        nodes; values are untouched.
        """
        new_times = self.inverse()(path.grid.times)
        return GridPath(TimeGrid(new_times), path.values)


def _time_change_family(
    domain_grid: TimeGrid, image_grid: TimeGrid, max_knots: int | None
) -> Iterable[TimeChange]:
    """Candidate alignments: every order-preserving matching of interior nodes.

    Knot count rises from zero (the identity), so the family is exhaustive
    over node alignments when ``max_knots`` is None; callers with large
    grids should pass a budget.
    """
    lo, hi = domain_grid.start, domain_grid.end
    interior_d = domain_grid.times[1:-1]
    interior_i = image_grid.times[1:-1]
    limit = min(interior_d.size, interior_i.size)
    if max_knots is not None:
        limit = min(limit, max_knots)
    yield TimeChange(np.array([lo, hi]), np.array([lo, hi]))
    for k in range(1, limit + 1):
        for dom in combinations(interior_d, k):
            for img in combinations(interior_i, k):
                yield TimeChange(
                    np.concatenate(([lo], dom, [hi])),
                    np.concatenate(([lo], img, [hi])),
                )


def j1_distance(
    pair_a: tuple[GridPath, GridPath],
    pair_b: tuple[GridPath, GridPath],
    p: float,
    max_knots: int | None = None,
) -> float:
    """Jump-tolerant distance between (path, reflector) pairs.

    Minimizes, over piecewise-linear time changes through node alignments,
    the larger of the time distortion and the summed p-variation distances
    of the reparametrized pair to the reference pair.  The identity is
    always a candidate, so the result never exceeds the unaligned distance.
    """
    ya, ka = pair_a
    yb, kb = pair_b
    if ya.grid != ka.grid or yb.grid != kb.grid:
        raise ValueError("each (path, reflector) pair must share one grid")
    if (ya.grid.start, ya.grid.end) != (yb.grid.start, yb.grid.end):
        raise ValueError("pairs cover different time spans")
    best = np.inf
    for change in _time_change_family(yb.grid, ya.grid, max_knots):
        moved = max(
            variation_distance(change.apply(ya), yb, p)
            + variation_distance(change.apply(ka), kb, p),
            change.distortion(),
        )
        best = min(best, moved)
    return best


# ---------------------------------------------------------------------------
# delimited I/O

# Floats are written with repr(), which round-trips exactly through float(),
# so a written file re-ingests to a bit-identical path.


def write_csv(file: Union[str, IO[str]], grid: TimeGrid, columns: dict[str, np.ndarray]) -> None:
    """Write a time column plus named value columns as UTF-8 CSV."""
    arrays = {name: np.asarray(col, dtype=float) for name, col in columns.items()}
    for name, col in arrays.items():
        if col.shape != (len(grid),):
            raise ValueError(f"column {name!r} does not match the grid length")
    own = isinstance(file, str)
    handle = open(file, "w", encoding="utf-8", newline="") if own else file
    try:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["time", *arrays])
        for i, t in enumerate(grid.times):
            writer.writerow([repr(float(t))] + [repr(float(c[i])) for c in arrays.values()])
    finally:
        if own:
            handle.close()


def read_csv(file: Union[str, IO[str]]) -> tuple[TimeGrid, list[str], np.ndarray]:
    """Read a CSV written by :func:`write_csv`; returns (grid, names, matrix)."""
    own = isinstance(file, str)
    handle = open(file, "r", encoding="utf-8", newline="") if own else file
    try:
        rows = list(csv.reader(handle))
    finally:
        if own:
            handle.close()
    if not rows or rows[0][:1] != ["time"]:
        raise ValueError("expected a header row starting with 'time'")
    names = rows[0][1:]
    data = np.array([[float(cell) for cell in row] for row in rows[1:]], dtype=float)
    if data.ndim != 2 or data.shape[1] != len(names) + 1:
        raise ValueError("ragged or empty CSV body")
    return TimeGrid(data[:, 0]), names, data[:, 1:]


def path_to_csv(path: GridPath, file: Union[str, IO[str]]) -> None:
    """Write a vector path with columns x1..xd."""
    cols = {f"x{i + 1}": path.values[:, i] for i in range(path.dimension)}
    write_csv(file, path.grid, cols)


def path_from_csv(file: Union[str, IO[str]]) -> GridPath:
    """Read a path written by :func:`path_to_csv`."""
    grid, _, matrix = read_csv(file)
    return GridPath(grid, matrix)
