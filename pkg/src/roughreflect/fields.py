"""Bounded smooth vector fields with analytically coded derivatives.

A field maps a state in R^n to a linear map R^d -> R^n, stored as an
(n, d) matrix.  Solvers consume the evaluation and its derivatives in
batched form (leading axes are broadcast), together with declared
supremum bounds that drive window sizing and the a-priori estimates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

__all__ = [
    "VectorField",
    "check_derivatives",
    "constant_field",
    "tanh_field",
]


@dataclass(frozen=True)
class VectorField:
    """Field f: R^n -> R^(n x d) with derivatives and supremum bounds.

    ``f(y)`` maps a batch of states shaped (..., n) to (..., n, d);
    ``df`` adds a trailing state axis, ``df[..., i, j, k]`` being the
    derivative of f_ij in state direction k, and ``d2f`` adds one more.
    ``lower_triangular`` declares that component i of the state feeds only
    on components 1..i, the structural condition under which uniqueness
    extends beyond dimension one.  Bounds are declared (not estimated) and
    must dominate the corresponding supremum norms; ``d3f_bound`` is
    optional but required by the rough-path solver.
    """

    n: int
    d: int
    f: Callable[[np.ndarray], np.ndarray]
    df: Callable[[np.ndarray], np.ndarray]
    f_bound: float
    df_bound: float
    d2f_bound: float
    d2f: Optional[Callable[[np.ndarray], np.ndarray]] = None
    d3f_bound: Optional[float] = None
    lower_triangular: bool = False
    name: str = ""

    def __post_init__(self) -> None:
        if self.n < 1 or self.d < 1:
            raise ValueError("field dimensions must be positive")
        for label, bound in (
            ("f_bound", self.f_bound),
            ("df_bound", self.df_bound),
            ("d2f_bound", self.d2f_bound),
        ):
            if not np.isfinite(bound) or bound < 0:
                raise ValueError(f"{label} must be finite and non-negative")
        if self.d3f_bound is not None and (
            not np.isfinite(self.d3f_bound) or self.d3f_bound < 0
        ):
            raise ValueError("d3f_bound must be finite and non-negative")

    def smooth_order(self) -> int:
        """Highest derivative order with a declared bound (2 or 3)."""
        return 3 if self.d3f_bound is not None else 2


def check_derivatives(
    field: VectorField, probes: np.ndarray, h: float = 1e-6
) -> float:
    """Largest gap between coded derivatives and central finite differences.

    Checks df against differences of f, and d2f (when coded) against
    differences of df, over the given batch of probe states.  The return
    value is O(h) for correctly coded fields with bounded third derivative.
    """
    probes = np.atleast_2d(np.asarray(probes, dtype=float))
    if probes.shape[-1] != field.n:
        raise ValueError(f"probes must have {field.n} state components")
    worst = 0.0
    eye = np.eye(field.n)
    for k in range(field.n):
        step = h * eye[k]
        diff = (field.f(probes + step) - field.f(probes - step)) / (2 * h)
        worst = max(worst, float(np.max(np.abs(diff - field.df(probes)[..., k]))))
        if field.d2f is not None:
            ddiff = (field.df(probes + step) - field.df(probes - step)) / (2 * h)
            worst = max(
                worst, float(np.max(np.abs(ddiff - field.d2f(probes)[..., k])))
            )
    return worst


def constant_field(matrix: np.ndarray) -> VectorField:
    """State-independent field f(y) = W; all derivatives vanish."""
    w = np.atleast_2d(np.asarray(matrix, dtype=float))
    n, d = w.shape

    def f(y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return np.broadcast_to(w, y.shape[:-1] + (n, d)).copy()

    def df(y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return np.zeros(y.shape[:-1] + (n, d, n))

    def d2f(y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return np.zeros(y.shape[:-1] + (n, d, n, n))

    return VectorField(
        n=n,
        d=d,
        f=f,
        df=df,
        d2f=d2f,
        f_bound=float(np.linalg.norm(w)),
        df_bound=0.0,
        d2f_bound=0.0,
        d3f_bound=0.0,
        lower_triangular=True,
        name="constant",
    )


def tanh_field(
    weights: np.ndarray, mixing: np.ndarray, offset: np.ndarray | None = None
) -> VectorField:
    """Saturated field f(y)_ij = W_ij (c_i + tanh((V y)_i)).

    W is (n, d), V is (n, n), and the optional offset c is (n,) (zero by
    default).  Bounded with bounded derivatives of every order; when V is
    lower triangular, component i of f depends only on state components
    1..i and the field is flagged accordingly.
    """
    w = np.atleast_2d(np.asarray(weights, dtype=float))
    v = np.atleast_2d(np.asarray(mixing, dtype=float))
    n, d = w.shape
    if v.shape != (n, n):
        raise ValueError(f"mixing matrix must be ({n}, {n}), got {v.shape}")
    c = np.zeros(n) if offset is None else np.asarray(offset, dtype=float).reshape(n)

    def f(y: np.ndarray) -> np.ndarray:
        u = c + np.tanh(np.asarray(y, dtype=float) @ v.T)
        return u[..., :, None] * w

    def df(y: np.ndarray) -> np.ndarray:
        u = np.tanh(np.asarray(y, dtype=float) @ v.T)
        sech2 = 1.0 - u * u
        return sech2[..., :, None, None] * w[:, :, None] * v[:, None, :]

    def d2f(y: np.ndarray) -> np.ndarray:
        u = np.tanh(np.asarray(y, dtype=float) @ v.T)
        g2 = -2.0 * (1.0 - u * u) * u
        vv = v[:, None, :, None] * v[:, None, None, :]
        return g2[..., :, None, None, None] * w[:, :, None, None] * vv

    wn = float(np.linalg.norm(w))
    vn = float(np.linalg.norm(v))
    # sup |tanh''| = 4/(3*sqrt(3)), sup |tanh'''| = 2
    return VectorField(
        n=n,
        d=d,
        f=f,
        df=df,
        d2f=d2f,
        f_bound=wn * (1.0 + float(np.max(np.abs(c)))),
        df_bound=wn * vn,
        d2f_bound=4.0 / (3.0 * np.sqrt(3.0)) * wn * vn * vn,
        d3f_bound=2.0 * wn * vn ** 3,
        lower_triangular=bool(np.array_equal(v, np.tril(v))),
        name="tanh",
    )
