import math

import numpy as np
import pytest

from wedgebm.drift import (CoefficientField, DriftSpec, TimeGrid, _cell_frame,
                           euler_reflected, euler_stopped, girsanov_log_weight,
                           girsanov_weight, linear_field, reflected_with_drift,
                           stopped_with_drift)
from wedgebm.geometry import PolarPoint, WedgeSpec
from wedgebm.rng import RngStream

W09 = WedgeSpec(0.0, 0.9)
START = PolarPoint(1.5, 0.3)
QUARTER = WedgeSpec(0.0, math.pi / 2)


def test_girsanov_log_weight_by_hand():
    drift = DriftSpec((0.3, -0.2))
    got = girsanov_log_weight(drift, (1.4, 1.7), 0.5, start=(1.0, 2.0))
    want = 0.3 * 0.4 + (-0.2) * (-0.3) - 0.5 * (0.09 + 0.04) * 0.5
    assert got == pytest.approx(want, rel=1e-15)
    assert girsanov_weight(drift, (1.4, 1.7), 0.5, start=(1.0, 2.0)) == \
        pytest.approx(math.exp(want), rel=1e-15)


def test_zero_drift_weight_is_one():
    drift = DriftSpec((0.0, 0.0))
    assert drift.is_zero
    assert girsanov_weight(drift, (5.0, -3.0), 2.0) == 1.0


def test_drifted_mass_is_one():
    # f = 1: the reweighted estimate must average to 1 for both samplers
    drift = DriftSpec((0.3, -0.2))
    for sampler in (
        lambda rng: stopped_with_drift(START, drift, 1.0, W09, rng),
        lambda rng: reflected_with_drift(START, drift, 1.0, W09, rng),
    ):
        ws = []
        root = RngStream(90)
        for i in range(3000):
            ws.append(sampler(root.derive(i)).weight)
        mean = np.mean(ws)
        se = np.std(ws, ddof=1) / math.sqrt(len(ws))
        assert abs(mean - 1.0) <= 3.5 * se


def test_drifted_free_motion_recovers_gaussian_mean():
    # a wide wedge with a short horizon never touches the boundary, so the
    # weighted estimate must reproduce the drifted free endpoint mean
    wide = WedgeSpec(0.0, 6.2)
    start = PolarPoint(2.0, 3.1)
    drift = DriftSpec((0.4, -0.3))
    T = 0.05
    root = RngStream(91)
    vx, vy = [], []
    for i in range(3000):
        s = stopped_with_drift(start, drift, T, wide, root.derive(i))
        assert not s.hit_boundary
        x, y = s.cartesian_endpoint()
        vx.append(x * s.weight)
        vy.append(y * s.weight)
    x0, y0 = start.cartesian()
    for vals, want in ((vx, x0 + 0.4 * T), (vy, y0 - 0.3 * T)):
        mean = np.mean(vals)
        se = np.std(vals, ddof=1) / math.sqrt(len(vals))
        assert abs(mean - want) <= 3.5 * se


def brute_quarter_stopped(x0, b, T, dt, n, seed):
    """Crude absorbed Euler walk in the quarter plane (numpy, clipped hits)."""
    gen = np.random.default_rng(seed)
    steps = int(round(T / dt))
    pos = np.tile(np.asarray(x0, float), (n, 1))
    alive = np.ones(n, bool)
    sd = math.sqrt(dt)
    bvec = np.asarray(b, float)
    for _ in range(steps):
        z = gen.standard_normal((n, 2))
        prop = pos + bvec * dt + sd * z
        prop[~alive] = pos[~alive]
        crossed = alive & ((prop[:, 0] < 0) | (prop[:, 1] < 0))
        prop[crossed] = np.maximum(prop[crossed], 0.0)
        pos = prop
        alive &= ~crossed
    return pos


def brute_quarter_reflected(x0, b, T, dt, n, seed):
    gen = np.random.default_rng(seed)
    steps = int(round(T / dt))
    pos = np.tile(np.asarray(x0, float), (n, 1))
    sd = math.sqrt(dt)
    bvec = np.asarray(b, float)
    for _ in range(steps):
        pos = pos + bvec * dt + sd * gen.standard_normal((n, 2))
        pos = np.abs(pos)
    return pos


def test_drifted_stopped_against_brute_force():
    start = PolarPoint(1.0, 0.6)
    drift = DriftSpec((0.3, -0.2))
    root = RngStream(92)
    vals = []
    for i in range(4000):
        s = stopped_with_drift(start, drift, 1.0, QUARTER, root.derive(i))
        vals.append(s.cartesian_endpoint()[0] * s.weight)
    mean = np.mean(vals)
    se = np.std(vals, ddof=1) / math.sqrt(len(vals))
    brute = brute_quarter_stopped(start.cartesian(), (0.3, -0.2), 1.0,
                                  1.0 / 4000, 20000, 17)
    bvals = brute[:, 0]
    bse = bvals.std(ddof=1) / math.sqrt(len(bvals))
    # the crude walk overshoots the boundary by O(sqrt(dt)); allow for it
    assert abs(mean - bvals.mean()) <= 3.5 * (se + bse) + 0.03


def test_drifted_reflected_against_brute_force():
    start = PolarPoint(1.0, 0.6)
    drift = DriftSpec((0.3, -0.2))
    root = RngStream(93)
    vals = []
    for i in range(4000):
        s = reflected_with_drift(start, drift, 1.0, QUARTER, root.derive(i))
        vals.append(s.endpoint.r ** 2 * s.weight)
    mean = np.mean(vals)
    se = np.std(vals, ddof=1) / math.sqrt(len(vals))
    brute = brute_quarter_reflected(start.cartesian(), (0.3, -0.2), 1.0,
                                    1.0 / 4000, 20000, 18)
    bvals = (brute ** 2).sum(axis=1)
    bse = bvals.std(ddof=1) / math.sqrt(len(bvals))
    assert abs(mean - bvals.mean()) <= 3.5 * (se + bse) + 0.08


# ---------------------------------------------------------------------------
# weak Euler scheme with frozen coefficients
# ---------------------------------------------------------------------------

def test_time_grid_validation():
    with pytest.raises(ValueError):
        TimeGrid(times=(0.0,))
    with pytest.raises(ValueError):
        TimeGrid(times=(0.1, 0.5))
    with pytest.raises(ValueError):
        TimeGrid(times=(0.0, 0.5, 0.5))
    g = TimeGrid.uniform(1.0, 4)
    assert g.horizon == 1.0
    assert len(g.times) == 5


def test_linear_field_values():
    field = linear_field((0.1, 0.2), (0.7, 0.5), ((1.0, 0.0), (0.0, 1.0)))
    bx, by = field.drift((1.7, 0.0), 0.0)
    assert bx == pytest.approx(-0.1 * 1.0)
    assert by == pytest.approx(-0.2 * (-0.5))
    assert field.diffusion((0.0, 0.0), 0.0) == ((1.0, 0.0), (0.0, 1.0))


def test_cell_frame_identity():
    fwd, bwd, cell = _cell_frame(((1.0, 0.0), (0.0, 1.0)), W09)
    assert cell.opening == pytest.approx(0.9, abs=1e-15)
    assert fwd == ((1.0, 0.0), (0.0, 1.0))
    assert bwd == ((1.0, 0.0), (0.0, 1.0))


def test_cell_frame_maps_rays_to_cell_edges():
    sigma = ((1.2, 0.4), (0.0, 0.8))
    fwd, bwd, cell = _cell_frame(sigma, W09)
    for ang, want in ((0.0, 0.0), (0.9, cell.opening)):
        vx = math.cos(ang)
        vy = math.sin(ang)
        u = fwd[0][0] * vx + fwd[0][1] * vy
        v = fwd[1][0] * vx + fwd[1][1] * vy
        assert math.atan2(v, u) % (2 * math.pi) == pytest.approx(
            want, abs=1e-12)
    # bwd really inverts fwd
    x = fwd[0][0] * 0.3 + fwd[0][1] * 0.1
    y = fwd[1][0] * 0.3 + fwd[1][1] * 0.1
    assert (bwd[0][0] * x + bwd[0][1] * y,
            bwd[1][0] * x + bwd[1][1] * y) == pytest.approx((0.3, 0.1))


def test_cell_frame_rejects_singular_sigma():
    with pytest.raises(ValueError):
        _cell_frame(((1.0, 2.0), (0.5, 1.0)), W09)


def test_euler_driftless_is_exact_any_step_count():
    # with b = 0 and sigma = I every cell runs the exact sampler on the
    # remaining wedge, so even a 3-cell grid reproduces the closed forms
    field = linear_field((0.0, 0.0), (0.0, 0.0), ((1.0, 0.0), (0.0, 1.0)))
    grid = TimeGrid.uniform(1.0, 3)
    root = RngStream(94)
    stopped_diffs = []
    for i in range(3000):
        s = euler_stopped(field, START, grid, W09, root.derive(i))
        assert s.weight == 1.0
        stopped_diffs.append(s.endpoint.r ** 2 - 2.0 * s.elapsed)
    mean = np.mean(stopped_diffs)
    se = np.std(stopped_diffs, ddof=1) / math.sqrt(len(stopped_diffs))
    assert abs(mean - START.r ** 2) <= 3.5 * se

    refl = []
    root = RngStream(95)
    for i in range(3000):
        s = euler_reflected(field, START, grid, W09, root.derive(i))
        assert s.elapsed == 1.0
        refl.append(s.endpoint.r ** 2)
    mean = np.mean(refl)
    se = np.std(refl, ddof=1) / math.sqrt(len(refl))
    assert abs(mean - (START.r ** 2 + 2.0)) <= 3.5 * se


def test_euler_scaled_diffusion_reflected():
    # sigma = c I is a deterministic time change: E[|X_T|^2] = r0^2 + 2 c^2 T
    c = 0.7
    field = linear_field((0.0, 0.0), (0.0, 0.0), ((c, 0.0), (0.0, c)))
    grid = TimeGrid.uniform(1.0, 4)
    root = RngStream(96)
    vals = []
    for i in range(3000):
        s = euler_reflected(field, START, grid, W09, root.derive(i))
        vals.append(s.endpoint.r ** 2)
    mean = np.mean(vals)
    se = np.std(vals, ddof=1) / math.sqrt(len(vals))
    assert abs(mean - (START.r ** 2 + 2.0 * c * c)) <= 3.5 * se


def test_euler_general_sigma_preserves_martingale_mean():
    # X = x0 + sigma W stopped at the boundary is a vector martingale, so
    # E[X_{tau ^ T}] = x0 for any constant sigma; exercises the cell frames
    sigma = ((1.2, 0.4), (0.0, 0.8))
    field = linear_field((0.0, 0.0), (0.0, 0.0), sigma)
    grid = TimeGrid.uniform(1.0, 3)
    root = RngStream(97)
    xs, ys = [], []
    for i in range(4000):
        s = euler_stopped(field, START, grid, W09, root.derive(i))
        x, y = s.cartesian_endpoint()
        xs.append(x)
        ys.append(y)
    x0, y0 = START.cartesian()
    for vals, want in ((xs, x0), (ys, y0)):
        mean = np.mean(vals)
        se = np.std(vals, ddof=1) / math.sqrt(len(vals))
        assert abs(mean - want) <= 3.5 * se


def test_euler_ou_against_brute_force():
    mu = (0.1, 0.2)
    kappa = (0.7, 0.5)
    field = linear_field(mu, kappa, ((1.0, 0.0), (0.0, 1.0)))
    grid = TimeGrid.uniform(1.0, 50)
    start = PolarPoint(1.0, 0.6)
    root = RngStream(98)
    vals = []
    for i in range(3000):
        s = euler_stopped(field, start, grid, QUARTER, root.derive(i))
        vals.append((s.endpoint.r ** 2) * s.weight)
    mean = np.mean(vals)
    se = np.std(vals, ddof=1) / math.sqrt(len(vals))

    gen = np.random.default_rng(55)
    n, dt = 20000, 1.0 / 4000
    pos = np.tile(np.asarray(start.cartesian()), (n, 1))
    alive = np.ones(n, bool)
    mu_v = np.asarray(mu)
    ka_v = np.asarray(kappa)
    for _ in range(4000):
        step = -mu_v * (pos - ka_v) * dt + math.sqrt(dt) * \
            gen.standard_normal((n, 2))
        prop = np.where(alive[:, None], pos + step, pos)
        crossed = alive & ((prop[:, 0] < 0) | (prop[:, 1] < 0))
        prop[crossed] = np.maximum(prop[crossed], 0.0)
        pos = prop
        alive &= ~crossed
    bvals = (pos ** 2).sum(axis=1)
    bse = bvals.std(ddof=1) / math.sqrt(n)
    assert abs(mean - bvals.mean()) <= 3.5 * (se + bse) + 0.05
