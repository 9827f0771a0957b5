"""Shared random-path builders and hypothesis strategies."""

from __future__ import annotations

import numpy as np
from hypothesis import strategies as st

from roughreflect import GridPath, TimeGrid


def random_grid(rng: np.random.Generator, nodes: int, span: float = 1.0) -> TimeGrid:
    gaps = rng.uniform(0.1, 1.0, size=nodes - 1)
    times = np.concatenate(([0.0], np.cumsum(gaps)))
    return TimeGrid(times * (span / times[-1]))


def random_path(
    rng: np.random.Generator,
    nodes: int,
    dimension: int = 1,
    scale: float = 1.0,
    grid: TimeGrid | None = None,
) -> GridPath:
    if grid is None:
        grid = random_grid(rng, nodes)
    values = np.cumsum(rng.normal(scale=scale, size=(len(grid), dimension)), axis=0)
    return GridPath(grid, values - values[0])


_coordinate = st.floats(
    min_value=-8.0, max_value=8.0, allow_nan=False, allow_infinity=False
)


@st.composite
def grid_paths(draw, max_nodes: int = 8, max_dim: int = 3) -> GridPath:
    nodes = draw(st.integers(min_value=2, max_value=max_nodes))
    dim = draw(st.integers(min_value=1, max_value=max_dim))
    gaps = draw(
        st.lists(
            st.floats(min_value=0.05, max_value=1.0, allow_nan=False),
            min_size=nodes - 1,
            max_size=nodes - 1,
        )
    )
    values = draw(
        st.lists(
            st.lists(_coordinate, min_size=dim, max_size=dim),
            min_size=nodes,
            max_size=nodes,
        )
    )
    times = np.concatenate(([0.0], np.cumsum(gaps)))
    return GridPath(TimeGrid(times), np.asarray(values))


@st.composite
def integer_paths(draw, max_nodes: int = 10) -> list[int]:
    """1-d integer node values for exact-arithmetic checks."""
    return draw(
        st.lists(
            st.integers(min_value=-9, max_value=9), min_size=2, max_size=max_nodes
        )
    )
