"""Level-2 lifts, compensated integration, and the reflected rough solver."""

import dataclasses
import io

import numpy as np
import pytest

import oracles
from conftest import random_path
from roughreflect import (
    ControlledPath,
    GridPath,
    Level2RoughPath,
    NonConvergenceError,
    RdeSolveConfig,
    TimeGrid,
    YoungSolveConfig,
    chen_lookup,
    compose_controlled,
    constant_field,
    controlled_norm,
    left_point_lift,
    perturb_area,
    remainder,
    rough_from_csv,
    rough_integral,
    rough_jump_step,
    rough_seminorm,
    rough_to_csv,
    solve_reflected_rde,
    solve_reflected_young,
    solve_skorokhod,
    sup_distance,
    tanh_field,
    two_param_p_variation,
)


def _path(times, values):
    return GridPath(TimeGrid(np.asarray(times, dtype=float)), np.asarray(values))


def _random_lift(rng, nodes, d, area_scale=0.0):
    """Left-point lift of a random path, optionally with extra area jumps."""
    x = random_path(rng, nodes, d, scale=0.3)
    rough = left_point_lift(x)
    if area_scale > 0.0:
        for k in rng.choice(np.arange(1, nodes), size=min(2, nodes - 1), replace=False):
            rough = perturb_area(
                rough, x.grid.times[k], rng.normal(scale=area_scale, size=(d, d))
            )
    return rough


# ---------------------------------------------------------------------------
# lifts and Chen blocks


def test_left_lift_of_two_unit_steps():
    rough = left_point_lift(_path([0.0, 1.0, 2.0], [0.0, 1.0, 2.0]))
    assert np.array_equal(rough.prefix.ravel(), [0.0, 0.0, 1.0])
    assert chen_lookup(rough, 0.0, 2.0)[0, 0] == 1.0
    assert chen_lookup(rough, 0.0, 1.0)[0, 0] == 0.0
    assert chen_lookup(rough, 1.0, 2.0)[0, 0] == 0.0
    assert chen_lookup(rough, 1.0, 1.0)[0, 0] == 0.0


def test_constant_path_lifts_to_zero():
    grid = TimeGrid.uniform(0.0, 1.0, 7)
    rough = left_point_lift(GridPath(grid, np.full((7, 2), 3.0)))
    assert np.array_equal(rough.prefix, np.zeros((7, 2, 2)))


def test_left_lift_blocks_match_double_sum_oracle():
    rng = np.random.default_rng(5)
    for _ in range(10):
        nodes = int(rng.integers(3, 12))
        d = int(rng.integers(1, 4))
        x = random_path(rng, nodes, d)
        rough = left_point_lift(x)
        times = x.grid.times
        for i in range(nodes):
            for j in range(i, nodes):
                expected = oracles.left_lift_block(x.values, i, j)
                assert np.allclose(
                    chen_lookup(rough, times[i], times[j]), expected, atol=1e-12
                )


def test_chen_identity_holds_for_arbitrary_prefixes():
    # additivity is an identity of the representation, not only of lifts
    rng = np.random.default_rng(11)
    for _ in range(10):
        nodes = int(rng.integers(3, 9))
        d = int(rng.integers(1, 4))
        x = random_path(rng, nodes, d)
        prefix = rng.normal(size=(nodes, d, d))
        prefix[0] = 0.0
        rough = Level2RoughPath(path=x, prefix=prefix)
        times = x.grid.times
        for i in range(nodes):
            for j in range(i, nodes):
                for k in range(j, nodes):
                    lhs = chen_lookup(rough, times[i], times[k])
                    rhs = (
                        chen_lookup(rough, times[i], times[j])
                        + chen_lookup(rough, times[j], times[k])
                        + np.outer(
                            x.values[j] - x.values[i], x.values[k] - x.values[j]
                        )
                    )
                    assert np.allclose(lhs, rhs, atol=1e-12)


def test_left_lift_symmetric_part_is_increment_square_minus_bracket():
    rng = np.random.default_rng(23)
    x = random_path(rng, 9, 3)
    rough = left_point_lift(x)
    times = x.grid.times
    dx = np.diff(x.values, axis=0)
    for i in range(9):
        for j in range(i + 1, 9):
            block = chen_lookup(rough, times[i], times[j])
            inc = x.values[j] - x.values[i]
            bracket = sum(np.outer(dx[u], dx[u]) for u in range(i, j))
            assert np.allclose(
                block + block.T, np.outer(inc, inc) - bracket, atol=1e-12
            )


def test_perturb_area_moves_only_straddling_blocks():
    # integer path values keep the block differences exact
    rng = np.random.default_rng(31)
    grid = TimeGrid.uniform(0.0, 1.0, 6)
    x = GridPath(grid, rng.integers(-4, 5, size=(6, 2)).astype(float))
    rough = left_point_lift(x)
    add = np.array([[0.0, 1.0], [-1.0, 0.0]])
    t = x.grid.times[3]
    bumped = perturb_area(rough, t, add)
    times = x.grid.times
    for i in range(6):
        for j in range(i, 6):
            gap = chen_lookup(bumped, times[i], times[j]) - chen_lookup(
                rough, times[i], times[j]
            )
            expected = add if times[i] < t <= times[j] else np.zeros((2, 2))
            assert np.array_equal(gap, expected)


def test_perturb_area_rejects_origin_and_off_grid_times():
    rough = left_point_lift(_path([0.0, 1.0, 2.0], [0.0, 1.0, 2.0]))
    with pytest.raises(ValueError):
        perturb_area(rough, 0.0, np.zeros((1, 1)))
    with pytest.raises(ValueError):
        perturb_area(rough, 0.5, np.zeros((1, 1)))


def test_prefix_validation():
    x = _path([0.0, 1.0], [0.0, 1.0])
    with pytest.raises(ValueError):
        Level2RoughPath(path=x, prefix=np.ones((2, 1, 1)))
    with pytest.raises(ValueError):
        Level2RoughPath(path=x, prefix=np.zeros((3, 1, 1)))
    with pytest.raises(ValueError):
        Level2RoughPath(path=x, prefix=np.zeros((2, 1, 1)), p=3.0)


# ---------------------------------------------------------------------------
# two-parameter variation


def test_zero_blocks_have_zero_variation():
    grid = TimeGrid.uniform(0.0, 1.0, 5)
    rough = left_point_lift(GridPath(grid, np.zeros((5, 1))))
    assert two_param_p_variation(rough, 1.25) == 0.0


def test_single_interior_node_enumerates_both_partitions():
    x = _path([0.0, 1.0, 2.0], [0.0, 1.0, 3.0])
    rough = perturb_area(left_point_lift(x), 1.0, np.array([[0.5]]))
    r = 1.25
    whole = abs(chen_lookup(rough, 0.0, 2.0)[0, 0])
    split = (
        abs(chen_lookup(rough, 0.0, 1.0)[0, 0]) ** r
        + abs(chen_lookup(rough, 1.0, 2.0)[0, 0]) ** r
    ) ** (1.0 / r)
    assert two_param_p_variation(rough, r) == pytest.approx(
        max(whole, split), rel=1e-12
    )


def test_block_variation_matches_enumeration():
    rng = np.random.default_rng(41)
    for _ in range(8):
        nodes = int(rng.integers(3, 9))
        rough = _random_lift(rng, nodes, 2, area_scale=0.2)
        times = rough.path.grid.times
        for r in (1.0, 1.25, 2.0):
            expected = oracles.enumerate_block_variation(
                lambda i, j: chen_lookup(rough, times[i], times[j]), nodes, r
            )
            assert two_param_p_variation(rough, r) == pytest.approx(
                expected, rel=1e-10, abs=1e-12
            )


def test_seminorm_combines_both_levels():
    rng = np.random.default_rng(47)
    rough = _random_lift(rng, 8, 2, area_scale=0.1)
    total = rough_seminorm(rough)
    assert np.isfinite(total)
    assert total >= two_param_p_variation(rough, rough.p / 2.0)


# ---------------------------------------------------------------------------
# controlled paths and the compensated integral


def _identity_controlled(rough):
    x = rough.path
    d = x.dimension
    deriv = np.tile(np.eye(d), (len(x.grid), 1, 1))
    return ControlledPath(reference=x, path=x, derivative=GridPath(x.grid, deriv))


def test_integral_of_driver_against_two_unit_steps():
    rough = left_point_lift(_path([0.0, 1.0, 2.0], [0.0, 1.0, 2.0]))
    out = rough_integral(_identity_controlled(rough), rough)
    assert np.array_equal(out.path.values.ravel(), [0.0, 0.0, 1.0])
    assert np.array_equal(out.derivative.values.ravel(), [0.0, 1.0, 2.0])


def test_integral_matches_compensated_oracle():
    rng = np.random.default_rng(53)
    for _ in range(10):
        nodes = int(rng.integers(3, 10))
        d = int(rng.integers(1, 3))
        n = int(rng.integers(1, 3))
        rough = _random_lift(rng, nodes, d, area_scale=0.3)
        y_ops = rng.normal(size=(nodes, n, d))
        yprime = rng.normal(size=(nodes, n, d, d))
        ctrl = ControlledPath(
            reference=rough.path,
            path=GridPath(rough.path.grid, y_ops),
            derivative=GridPath(rough.path.grid, yprime),
        )
        out = rough_integral(ctrl, rough)
        times = rough.path.grid.times
        blocks = np.stack(
            [chen_lookup(rough, times[j], times[j + 1]) for j in range(nodes - 1)]
        )
        expected = oracles.compensated_integral(
            y_ops, yprime, rough.path.values, blocks
        )
        assert np.allclose(out.path.values, expected, atol=1e-12)


def test_integral_increments_are_additive():
    rng = np.random.default_rng(59)
    rough = _random_lift(rng, 12, 2, area_scale=0.2)
    out = rough_integral(_identity_controlled(rough), rough)
    times = rough.path.grid.times
    whole = out.path.increment(times[0], times[-1])
    parts = out.path.increment(times[0], times[4]) + out.path.increment(
        times[4], times[-1]
    )
    assert np.allclose(whole, parts, atol=1e-12)


def test_integral_jump_identity():
    # the integral jumps by Y_{t-} dX_t + Y'_{t-} dXX_t at every node
    rng = np.random.default_rng(61)
    rough = _random_lift(rng, 8, 2, area_scale=0.4)
    y_ops = rng.normal(size=(8, 3, 2))
    yprime = rng.normal(size=(8, 3, 2, 2))
    ctrl = ControlledPath(
        reference=rough.path,
        path=GridPath(rough.path.grid, y_ops),
        derivative=GridPath(rough.path.grid, yprime),
    )
    out = rough_integral(ctrl, rough)
    times = rough.path.grid.times
    for j in range(1, 8):
        dx = rough.path.values[j] - rough.path.values[j - 1]
        dxx = chen_lookup(rough, times[j - 1], times[j])
        expected = y_ops[j - 1] @ dx + np.einsum("ijk,kj->i", yprime[j - 1], dxx)
        assert np.allclose(
            np.asarray(out.path.jump(times[j]), float), expected, atol=1e-12
        )


def test_integral_rejects_foreign_driver():
    rng = np.random.default_rng(67)
    rough = _random_lift(rng, 6, 2)
    other = _random_lift(rng, 6, 2)
    with pytest.raises(ValueError):
        rough_integral(_identity_controlled(other), rough)


def test_remainder_of_identity_vanishes():
    rng = np.random.default_rng(71)
    rough = _random_lift(rng, 7, 2)
    ctrl = _identity_controlled(rough)
    times = rough.path.grid.times
    for i in range(6):
        assert np.allclose(remainder(ctrl, times[i], times[i + 1]), 0.0, atol=1e-15)


def test_remainder_with_zero_derivative_is_the_increment():
    rng = np.random.default_rng(73)
    x = random_path(rng, 6, 1)
    rough = left_point_lift(x)
    y = random_path(rng, 6, 2, grid=x.grid)
    ctrl = ControlledPath(
        reference=x,
        path=y,
        derivative=GridPath(x.grid, np.zeros((6, 2, 1))),
    )
    times = x.grid.times
    gap = remainder(ctrl, times[1], times[4])
    assert np.array_equal(gap, y.values[4] - y.values[1])


def test_controlled_norm_of_identity_pair():
    grid = TimeGrid.uniform(0.0, 1.0, 5)
    x = GridPath(grid, grid.times)
    ctrl = _identity_controlled(left_point_lift(x))
    # path starts at 0, derivative is constant 1, remainder vanishes
    assert controlled_norm(ctrl, 2.5) == 1.0


def test_compose_with_constant_field_freezes_path():
    rng = np.random.default_rng(79)
    rough = _random_lift(rng, 6, 2)
    w = np.array([[1.0, -2.0], [0.5, 0.0]])
    ctrl = ControlledPath(
        reference=rough.path,
        path=GridPath(rough.path.grid, rng.normal(size=(6, 2))),
        derivative=GridPath(rough.path.grid, rng.normal(size=(6, 2, 2))),
    )
    out = compose_controlled(constant_field(w), ctrl)
    assert np.array_equal(out.path.values, np.tile(w, (6, 1, 1)))
    assert np.array_equal(out.derivative.values, np.zeros((6, 2, 2, 2)))


def test_compose_requires_third_derivative_bound():
    rng = np.random.default_rng(83)
    rough = _random_lift(rng, 4, 1)
    ctrl = ControlledPath(
        reference=rough.path,
        path=GridPath(rough.path.grid, np.zeros((4, 1))),
        derivative=GridPath(rough.path.grid, np.zeros((4, 1, 1))),
    )

    class Stub:
        n = 1
        d = 1
        lower_triangular = True

        def smooth_order(self):
            return 2

    with pytest.raises(ValueError):
        compose_controlled(Stub(), ctrl)


def test_controlled_pieces_must_share_grid():
    x = _path([0.0, 1.0], [0.0, 1.0])
    y = _path([0.0, 2.0], [0.0, 1.0])
    with pytest.raises(ValueError):
        ControlledPath(reference=x, path=y, derivative=y)


# ---------------------------------------------------------------------------
# the reflected solver


def _brownian_lift(rng, nodes=80, d=1, scale=0.2, area_scale=0.0):
    x = random_path(rng, nodes, d, scale=scale)
    rough = left_point_lift(x)
    if area_scale > 0.0:
        k = int(rng.integers(1, nodes))
        rough = perturb_area(
            rough, x.grid.times[k], rng.normal(scale=area_scale, size=(d, d))
        )
    return rough


def test_zero_field_reduces_to_reflection_of_start():
    grid = TimeGrid.uniform(0.0, 1.0, 9)
    rough = left_point_lift(GridPath(grid, np.linspace(0.0, 1.0, 9)))
    barrier = GridPath(grid, np.minimum(grid.times, 0.6))
    field = constant_field(np.zeros((1, 1)))
    sol = solve_reflected_rde(
        field, np.zeros(1), rough, barrier, RdeSolveConfig(p=2.5)
    )
    # with f = 0 the state is y plus the reflector of a constant path
    expected = np.maximum.accumulate(barrier.values, axis=0)
    assert np.allclose(sol.y.values, expected, atol=1e-14)
    assert np.allclose(sol.k.values, expected, atol=1e-14)
    assert sol.report.converged


def test_solver_matches_forward_recursion():
    rng = np.random.default_rng(97)
    field = tanh_field(
        np.array([[0.4, -0.2], [0.1, 0.3]]),
        np.eye(2) * 0.5,
        offset=np.array([0.3, -0.2]),
    )
    cfg = RdeSolveConfig(p=2.5)
    for _ in range(8):
        rough = _brownian_lift(rng, nodes=60, d=2, scale=0.15, area_scale=0.05)
        grid = rough.path.grid
        barrier = GridPath(
            grid, -0.4 + 0.05 * np.sin(7.0 * grid.times)[:, None] * np.ones((1, 2))
        )
        sol = solve_reflected_rde(field, np.zeros(2), rough, barrier, cfg)
        blocks = np.stack(
            [
                chen_lookup(rough, grid.times[j], grid.times[j + 1])
                for j in range(len(grid) - 1)
            ]
        )
        expected_y, expected_k = oracles.forward_rough(
            field.f, field.df, np.zeros(2), rough.path.values, blocks, barrier.values
        )
        assert np.max(np.abs(sol.y.values - expected_y)) < 1e-11
        assert np.max(np.abs(sol.k.values - expected_k)) < 1e-11
        assert sol.report.converged
        assert sol.report.equation_residual < 1e-11
        assert sol.report.barrier_violation == 0.0
        assert sol.report.minimality_residual < 1e-11


def test_fv_lift_agrees_with_young_solver():
    rng = np.random.default_rng(101)
    field = tanh_field(np.array([[0.5]]), np.array([[1.0]]), offset=np.array([0.5]))
    grid = TimeGrid.uniform(0.0, 1.0, 40)
    a = random_path(rng, 40, 1, scale=0.05, grid=grid)
    barrier = GridPath(grid, np.full((40, 1), -0.3))
    zero = GridPath(grid, np.zeros((40, 1)))
    young = solve_reflected_young(
        field, np.zeros(1), a, zero, barrier, YoungSolveConfig(p=2.0, q=1.0)
    )
    rough = solve_reflected_rde(
        field, np.zeros(1), left_point_lift(a, p=2.0), barrier, RdeSolveConfig(p=2.0)
    )
    assert sup_distance(young.y, rough.y) <= 1e-8
    assert sup_distance(young.k, rough.k) <= 1e-8


def test_two_initializations_agree():
    rng = np.random.default_rng(103)
    field = tanh_field(np.array([[0.3]]), np.array([[1.0]]), offset=np.array([0.4]))
    rough = _brownian_lift(rng, nodes=120, d=1, scale=0.25)
    grid = rough.path.grid
    barrier = GridPath(grid, np.full((len(grid), 1), -0.2))
    base = RdeSolveConfig(p=2.5)
    first = solve_reflected_rde(field, np.zeros(1), rough, barrier, base)
    second = solve_reflected_rde(
        field, np.zeros(1), rough, barrier,
        dataclasses.replace(base, init="unreflected"),
    )
    assert sup_distance(first.y, second.y) <= 1e-6
    assert sup_distance(first.k, second.k) <= 1e-6


def test_engineered_area_jump_charges_exact_reflector():
    # dyadic data keeps every quantity exactly representable: the jump
    # formula gives dK = -(0.25 * -1 + 0.5 * 0.25 * 0.25) = 0.21875
    grid = TimeGrid(np.array([0.0, 0.25, 0.5, 0.75, 1.0]))
    x = GridPath(grid, np.array([0.0, 0.0, -1.0, -1.0, -1.0]))
    rough = perturb_area(left_point_lift(x), 0.5, np.array([[0.25]]))
    field = tanh_field(np.array([[0.5]]), np.array([[1.0]]), offset=np.array([0.5]))
    barrier = GridPath(grid, np.zeros((5, 1)))
    sol = solve_reflected_rde(
        field, np.zeros(1), rough, barrier, RdeSolveConfig(p=2.5, delta=0.2)
    )
    assert sol.k.jump(0.5) == 0.21875
    assert np.array_equal(sol.y.values, np.zeros((5, 1)))
    blocks = np.stack(
        [chen_lookup(rough, grid.times[j], grid.times[j + 1]) for j in range(4)]
    )
    expected_y, expected_k = oracles.forward_rough(
        field.f, field.df, np.zeros(1), x.values, blocks, barrier.values
    )
    assert np.array_equal(sol.y.values, expected_y)
    assert np.array_equal(sol.k.values, expected_k)


def test_jump_step_formula_direct():
    field = tanh_field(np.array([[0.5]]), np.array([[1.0]]), offset=np.array([0.5]))
    y_next, dk = rough_jump_step(
        field,
        np.zeros(1),
        np.array([-1.0]),
        np.array([[0.25]]),
        np.array([0.0]),
    )
    assert dk[0] == 0.21875
    assert y_next[0] == 0.0


def test_uniqueness_risk_flag():
    rng = np.random.default_rng(113)
    rough = _brownian_lift(rng, nodes=30, d=2, scale=0.1)
    grid = rough.path.grid
    barrier = GridPath(grid, np.full((len(grid), 2), -1.0))
    dense = tanh_field(np.full((2, 2), 0.2), np.full((2, 2), 0.3))
    lower = tanh_field(np.full((2, 2), 0.2), np.tril(np.full((2, 2), 0.3)))
    cfg = RdeSolveConfig(p=2.5)
    assert solve_reflected_rde(
        dense, np.zeros(2), rough, barrier, cfg
    ).report.non_unique_risk
    assert not solve_reflected_rde(
        lower, np.zeros(2), rough, barrier, cfg
    ).report.non_unique_risk
    scalar = tanh_field(np.array([[0.3]]), np.array([[1.0]]))
    rough1 = _brownian_lift(rng, nodes=30, d=1, scale=0.1)
    barrier1 = GridPath(rough1.path.grid, np.full((30, 1), -1.0))
    assert not solve_reflected_rde(
        scalar, np.zeros(1), rough1, barrier1, cfg
    ).report.non_unique_risk


def test_windows_record_contraction_and_respect_budget():
    rng = np.random.default_rng(127)
    field = tanh_field(np.array([[0.3]]), np.array([[1.0]]), offset=np.array([0.5]))
    rough = _brownian_lift(rng, nodes=100, d=1, scale=0.3)
    grid = rough.path.grid
    barrier = GridPath(grid, np.full((len(grid), 1), -0.3))
    cfg = RdeSolveConfig(p=2.5)
    sol = solve_reflected_rde(field, np.zeros(1), rough, barrier, cfg)
    assert sol.report.windows
    from roughreflect import p_variation

    multi = 0
    for window in sol.report.windows:
        for ratio in window.ratios:
            assert ratio < 1.0
        i = grid.floor_index(window.start)
        j = grid.floor_index(window.end)
        if j - i >= 2:
            multi += 1
            span = (grid.times[i], grid.times[j])
            total = rough_seminorm(rough, span, cfg.p) + p_variation(
                barrier, cfg.p, span
            )
            assert total <= cfg.delta + 1e-12
    assert multi > 0


def test_failure_surfaces_when_shrinking_disabled():
    rng = np.random.default_rng(131)
    field = tanh_field(np.full((1, 1), 2.0), np.full((1, 1), 2.0), offset=np.array([1.0]))
    rough = _brownian_lift(rng, nodes=60, d=1, scale=1.5)
    grid = rough.path.grid
    barrier = GridPath(grid, np.full((len(grid), 1), -0.5))
    cfg = RdeSolveConfig(p=2.5, delta=50.0, max_iter=2, allow_shrink=False)
    with pytest.raises(NonConvergenceError) as err:
        solve_reflected_rde(field, np.zeros(1), rough, barrier, cfg)
    assert err.value.report.failure is not None
    recovered = solve_reflected_rde(
        field, np.zeros(1), rough, barrier,
        dataclasses.replace(cfg, allow_shrink=True, max_iter=80, delta=0.25),
    )
    assert recovered.report.converged


def test_inadmissible_start_rejected():
    grid = TimeGrid.uniform(0.0, 1.0, 4)
    rough = left_point_lift(GridPath(grid, np.zeros((4, 1))))
    barrier = GridPath(grid, np.ones((4, 1)))
    with pytest.raises(ValueError):
        solve_reflected_rde(
            constant_field(np.zeros((1, 1))),
            np.zeros(1),
            rough,
            barrier,
            RdeSolveConfig(p=2.5),
        )


def test_config_validation():
    with pytest.raises(ValueError):
        RdeSolveConfig(p=3.0)
    with pytest.raises(ValueError):
        RdeSolveConfig(p=1.9)
    with pytest.raises(ValueError):
        RdeSolveConfig(p=2.5, q=2.4)
    with pytest.raises(ValueError):
        RdeSolveConfig(p=2.5, q=3.1)
    with pytest.raises(ValueError):
        RdeSolveConfig(p=2.5, init="warm")


# ---------------------------------------------------------------------------
# serialization


def test_csv_round_trip_is_bit_identical():
    rng = np.random.default_rng(137)
    rough = _random_lift(rng, 9, 2, area_scale=0.3)
    buffer = io.StringIO()
    rough_to_csv(rough, buffer)
    buffer.seek(0)
    back = rough_from_csv(buffer, p=rough.p)
    assert np.array_equal(back.path.values, rough.path.values)
    assert np.array_equal(back.prefix, rough.prefix)
    assert np.array_equal(back.path.grid.times, rough.path.grid.times)


def test_csv_rejects_foreign_columns():
    with pytest.raises(ValueError):
        rough_from_csv(io.StringIO("time,a,b\n0.0,1.0,2.0\n"))
