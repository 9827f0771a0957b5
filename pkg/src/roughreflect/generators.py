"""Driver and barrier generators, and a small catalog of admissible fields.

Stochastic kinds draw from a counter-based generator (Philox 4x64) keyed
by the spec's seed, so identical specs reproduce identical paths bit for
bit on any platform with the same generator.  Jumps land exactly on grid
nodes: the staircase path model has nowhere else to put them, so
compound-Poisson arrival times are rounded to the nearest node.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .fields import VectorField, constant_field, tanh_field
from .paths import GridPath, TimeGrid

__all__ = ["RNG_ALGORITHM", "GeneratorSpec", "generate", "standard_fields"]

RNG_ALGORITHM = "philox4x64"

_KINDS = ("brownian", "compound_poisson", "smooth_sine", "polynomial", "staircase")


@dataclass(frozen=True)
class GeneratorSpec:
    """Recipe for one generated path: kind, grid, dimension, seed, parameters.

    Deterministic kinds ignore the seed.  Parameters by kind:
    brownian: volatility (default 1).  compound_poisson: rate, jump_min,
    jump_max (component sizes drawn uniformly).  smooth_sine: amplitude,
    frequency, phase (scalars or per-component lists).  polynomial:
    coefficients, one vector per power of t.  staircase: times and sizes
    of the jumps.
    """

    kind: str
    grid: TimeGrid
    dimension: int = 1
    seed: int = 0
    parameters: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}")
        if self.dimension < 1:
            raise ValueError("dimension must be positive")


def _rng(spec: GeneratorSpec) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(spec.seed)))


def _per_component(value: Any, d: int, default: float) -> np.ndarray:
    if value is None:
        value = default
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = np.full(d, float(arr))
    if arr.shape != (d,):
        raise ValueError(f"parameter needs a scalar or {d} components, got {arr.shape}")
    return arr


def _brownian(spec: GeneratorSpec) -> np.ndarray:
    vol = _per_component(spec.parameters.get("volatility"), spec.dimension, 1.0)
    if np.any(vol < 0):
        raise ValueError("volatility must be non-negative")
    dt = np.diff(spec.grid.times)
    steps = _rng(spec).standard_normal((dt.size, spec.dimension))
    steps *= np.sqrt(dt)[:, None] * vol
    values = np.zeros((len(spec.grid), spec.dimension))
    np.cumsum(steps, axis=0, out=values[1:])
    return values


def _compound_poisson(spec: GeneratorSpec) -> np.ndarray:
    params = spec.parameters
    rate = float(params.get("rate", 1.0))
    if rate < 0:
        raise ValueError("jump rate must be non-negative")
    low = _per_component(params.get("jump_min"), spec.dimension, -1.0)
    high = _per_component(params.get("jump_max"), spec.dimension, 1.0)
    if np.any(high < low):
        raise ValueError("jump_max must dominate jump_min")
    rng = _rng(spec)
    times = spec.grid.times
    values = np.zeros((len(spec.grid), spec.dimension))
    if rate == 0:
        return values
    t = float(times[0])
    while True:
        t += rng.exponential(1.0 / rate)
        if t > times[-1]:
            break
        node = int(np.argmin(np.abs(times - t)))
        # jumps live at nodes; an arrival rounded to the origin is dropped
        size = rng.uniform(low, high)
        if node > 0:
            values[node:] += size
    return values


def _smooth_sine(spec: GeneratorSpec) -> np.ndarray:
    d = spec.dimension
    amplitude = _per_component(spec.parameters.get("amplitude"), d, 1.0)
    frequency = _per_component(spec.parameters.get("frequency"), d, 1.0)
    phase = _per_component(spec.parameters.get("phase"), d, 0.0)
    t = spec.grid.times[:, None]
    return amplitude * np.sin(2.0 * np.pi * frequency * t + phase)


def _polynomial(spec: GeneratorSpec) -> np.ndarray:
    coeffs = np.asarray(spec.parameters.get("coefficients", [0.0]), dtype=float)
    if coeffs.ndim == 1:
        coeffs = coeffs[:, None]
    if coeffs.shape[1] == 1 and spec.dimension > 1:
        coeffs = np.repeat(coeffs, spec.dimension, axis=1)
    if coeffs.shape[1] != spec.dimension:
        raise ValueError(
            f"coefficients are {coeffs.shape[1]}-dimensional, spec wants {spec.dimension}"
        )
    powers = spec.grid.times[:, None] ** np.arange(coeffs.shape[0])
    return powers @ coeffs


def _staircase(spec: GeneratorSpec) -> np.ndarray:
    params = spec.parameters
    times = np.asarray(params.get("times", []), dtype=float)
    sizes = np.asarray(params.get("sizes", []), dtype=float)
    if sizes.ndim == 1:
        sizes = sizes[:, None]
    if sizes.shape[1] == 1 and spec.dimension > 1:
        sizes = np.repeat(sizes, spec.dimension, axis=1)
    if times.ndim != 1 or sizes.shape != (times.size, spec.dimension):
        raise ValueError("staircase needs matching jump times and sizes")
    values = np.zeros((len(spec.grid), spec.dimension))
    grid_times = spec.grid.times
    for t, size in zip(times, sizes):
        node = spec.grid.floor_index(t)
        if grid_times[node] != t:
            raise ValueError(f"staircase jump time {t} is not a grid node")
        if node == 0:
            raise ValueError("staircase jumps cannot sit at the origin")
        values[node:] += size
    return values


_BUILDERS = {
    "brownian": _brownian,
    "compound_poisson": _compound_poisson,
    "smooth_sine": _smooth_sine,
    "polynomial": _polynomial,
    "staircase": _staircase,
}


def generate(spec: GeneratorSpec) -> GridPath:
    """Produce the path described by the spec; identical specs give identical paths."""
    return GridPath(spec.grid, _BUILDERS[spec.kind](spec))


def standard_fields(n: int = 2, d: int = 2) -> dict[str, VectorField]:
    """Catalog of admissible fields with analytic derivatives and declared bounds.

    ``constant`` has vanishing derivatives; ``tanh`` saturates each state
    component independently (slope at the origin equals the weight
    matrix); ``triangular`` mixes only earlier state components, the
    structural class with multidimensional uniqueness.
    """
    rows = np.arange(n)[:, None]
    cols = np.arange(d)[None, :]
    weights = 0.5 / (1.0 + rows + cols)
    mixing = 0.4 / (1.0 + np.abs(np.arange(n)[:, None] - np.arange(n)[None, :]))
    return {
        "constant": constant_field(weights),
        "tanh": tanh_field(weights, np.eye(n)),
        "triangular": tanh_field(weights, np.tril(mixing)),
    }
