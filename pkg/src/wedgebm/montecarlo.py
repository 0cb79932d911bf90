"""Monte Carlo harness: configuration, estimation, fold diagnostics.

Every path owns the sub-stream derived from its index, so estimates are
byte-reproducible for a fixed (config, seed) no matter how many worker
threads execute the paths; the reduction always runs in index order.
"""

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum

from .drift import (CoefficientField, DriftSpec, TimeGrid, euler_reflected,
                    euler_stopped, linear_field, reflected_with_drift,
                    stopped_with_drift)
from .geometry import PolarPoint, WedgeSpec, decorrelate
from .rng import RngStream
from .samplers import (DEFAULT_EPSILON, DEFAULT_FOLD_CAP, FoldCapExceeded,
                       algorithm_reflected, algorithm_stopped)

IDENTITY = ((1.0, 0.0), (0.0, 1.0))


class Mode(Enum):
    STOPPED = "stopped"
    REFLECTED = "reflected"
    EULER_STOPPED = "euler_stopped"
    EULER_REFLECTED = "euler_reflected"
    DENSITY_EVAL = "density_eval"


class TestFunction(Enum):
    __test__ = False  # keep pytest from trying to collect this
    RADIUS_SQ = "radius_sq"
    SIN_SQ_THETA = "sin_sq_theta"
    COORD_1 = "coord_1"
    INDICATOR_SURVIVAL = "indicator_survival"
    CONSTANT_1 = "constant_1"
    ELAPSED_TIME = "elapsed_time"


def apply_test_function(func, sample, endpoint_xy):
    x, y = endpoint_xy
    if func is TestFunction.RADIUS_SQ:
        return x * x + y * y
    if func is TestFunction.SIN_SQ_THETA:
        r2 = x * x + y * y
        return 0.0 if r2 == 0.0 else y * y / r2
    if func is TestFunction.COORD_1:
        return x
    if func is TestFunction.INDICATOR_SURVIVAL:
        return 0.0 if sample.hit_boundary else 1.0
    if func is TestFunction.CONSTANT_1:
        return 1.0
    if func is TestFunction.ELAPSED_TIME:
        return sample.elapsed
    raise ValueError(f"unknown test function {func}")


class FaultFractionExceeded(RuntimeError):
    """More than the tolerated fraction of paths faulted; carries counts."""

    def __init__(self, message, n_faults, n_samples):
        super().__init__(message)
        self.n_faults = n_faults
        self.n_samples = n_samples


@dataclass(frozen=True)
class EstimatorConfig:
    mode: Mode
    func: TestFunction
    horizon: float
    n_samples: int
    seed: int
    wedge: WedgeSpec = None
    start: PolarPoint = None
    setup: object = None  # CorrelatedSetup; decorrelated on resolve()
    drift: tuple = (0.0, 0.0)
    epsilon: float = DEFAULT_EPSILON
    fold_cap: int = DEFAULT_FOLD_CAP
    steps: int = 0
    mu: tuple = (0.0, 0.0)
    kappa: tuple = (0.0, 0.0)
    sigma: tuple = IDENTITY
    coeffs: CoefficientField = None
    workers: int = 1

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be at least 1")
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if self.setup is None and (self.wedge is None or self.start is None):
            raise ValueError("either a correlated setup or wedge+start is required")
        if self.mode in (Mode.EULER_STOPPED, Mode.EULER_REFLECTED):
            if self.steps < 1:
                raise ValueError("Euler modes need steps >= 1")
            if not math.isfinite(self.horizon):
                raise ValueError("Euler modes need a finite horizon")

    def resolve(self):
        """Returns (wedge, start, drift, problem) where problem is the
        DecorrelatedProblem carrying the frame maps (None if the input was
        already in standard coordinates)."""
        if self.setup is None:
            return self.wedge, self.start, self.drift, None
        prob = decorrelate(self.setup)
        return prob.wedge, prob.start, prob.drift, prob


@dataclass(frozen=True)
class McReport:
    estimate: float
    half_width_95: float
    n_samples: int
    n_faults: int
    mean_folds: float
    mean_weight: float
    ess: float
    wall_time_seconds: float
    seed: int


def _frame_coeffs(coeffs, problem):
    """Push a user-frame coefficient field through the decorrelation map F:
    for Z = F Y the drift becomes F b(F^{-1} z) and the diffusion F sigma."""
    fwd = problem.forward_map

    def b(z, t):
        return problem.apply(coeffs.drift(problem.inverse(z), t))

    def s(z, t):
        (a, bb), (c, d) = coeffs.diffusion(problem.inverse(z), t)
        return ((fwd[0][0] * a + fwd[0][1] * c, fwd[0][0] * bb + fwd[0][1] * d),
                (fwd[1][0] * a + fwd[1][1] * c, fwd[1][0] * bb + fwd[1][1] * d))

    return CoefficientField(drift=b, diffusion=s)


def _run_one(config, resolved, index):
    """One path: returns (weighted value, folds, weight, faulted, approx)."""
    wedge, start, drift_vec, problem = resolved
    rng = RngStream(config.seed).derive(index)
    drift = DriftSpec(tuple(drift_vec))
    try:
        if config.mode is Mode.STOPPED:
            if drift.is_zero:
                sample = algorithm_stopped(start, config.horizon, wedge, rng,
                                           iteration_cap=config.fold_cap)
            else:
                sample = stopped_with_drift(start, drift, config.horizon, wedge, rng,
                                            iteration_cap=config.fold_cap)
        elif config.mode is Mode.REFLECTED:
            if drift.is_zero:
                sample = algorithm_reflected(start, config.horizon, wedge, rng,
                                             epsilon=config.epsilon,
                                             fold_cap=config.fold_cap)
            else:
                sample = reflected_with_drift(start, drift, config.horizon, wedge, rng,
                                              epsilon=config.epsilon,
                                              fold_cap=config.fold_cap)
        elif config.mode in (Mode.EULER_STOPPED, Mode.EULER_REFLECTED):
            coeffs = config.coeffs
            if coeffs is None:
                coeffs = linear_field(config.mu, config.kappa, config.sigma)
            if problem is not None:
                coeffs = _frame_coeffs(coeffs, problem)
            grid = TimeGrid.uniform(config.horizon, config.steps)
            if config.mode is Mode.EULER_STOPPED:
                sample = euler_stopped(coeffs, start, grid, wedge, rng)
            else:
                sample = euler_reflected(coeffs, start, grid, wedge, rng,
                                         epsilon=config.epsilon,
                                         fold_cap=config.fold_cap)
        else:
            raise ValueError(f"{config.mode} is not a path-sampling mode")
    except FoldCapExceeded as fault:
        return 0.0, fault.partial.folds, 1.0, True, False
    xy = sample.cartesian_endpoint()
    if problem is not None:
        xy = problem.inverse(xy)
    value = apply_test_function(config.func, sample, xy)
    return (value * sample.weight, sample.folds, sample.weight, False,
            sample.approx_used)


def estimate(config):
    """Run the configured Monte Carlo estimate and return an McReport.

    Faulted paths (recursion cap) are excluded from the estimate and
    counted; more than 10% of them aborts the run.
    """
    if config.mode is Mode.DENSITY_EVAL:
        raise ValueError("DENSITY_EVAL is not a sampling mode; "
                         "evaluate the density directly")
    t0 = time.perf_counter()
    resolved = config.resolve()
    n = config.n_samples
    rows = _run_paths(config, resolved, range(n))
    n_faults = sum(1 for row in rows if row[3])
    if n_faults > 0.1 * n:
        raise FaultFractionExceeded(
            f"{n_faults} of {n} paths exceeded the recursion cap "
            f"(> 10%); raise fold_cap or epsilon", n_faults, n)
    good = [row for row in rows if not row[3]]
    vals = [row[0] for row in good]
    m = len(vals)
    mean = math.fsum(vals) / m
    if m > 1:
        var = math.fsum((v - mean) ** 2 for v in vals) / (m - 1)
        half = 1.96 * math.sqrt(var / m)
    else:
        half = math.inf
    weights = [row[2] for row in good]
    wsum = math.fsum(weights)
    wsq = math.fsum(w * w for w in weights)
    return McReport(
        estimate=mean,
        half_width_95=half,
        n_samples=n,
        n_faults=n_faults,
        mean_folds=math.fsum(row[1] for row in good) / m,
        mean_weight=wsum / m,
        ess=(wsum * wsum / wsq) if wsq > 0 else 0.0,
        wall_time_seconds=time.perf_counter() - t0,
        seed=config.seed)


def _run_paths(config, resolved, indices):
    indices = list(indices)
    if config.workers <= 1:
        return [_run_one(config, resolved, i) for i in indices]
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        return list(pool.map(lambda i: _run_one(config, resolved, i), indices,
                             chunksize=64))


# ---------------------------------------------------------------------------
# folding diagnostics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FoldingStats:
    counts: dict
    overflow: int
    mean: float
    quantiles: dict = field(default_factory=dict)
    n_samples: int = 0


def folding_stats(config):
    """Histogram of the reflected fold count, with capped paths reported in
    an explicit overflow bucket (they enter the mean at the cap value)."""
    if config.mode is not Mode.REFLECTED:
        raise ValueError("folding stats are defined for the REFLECTED mode")
    wedge, start, _drift, _map = config.resolve()
    counts = {}
    overflow = 0
    folds_all = []
    for i in range(config.n_samples):
        rng = RngStream(config.seed).derive(i)
        try:
            sample = algorithm_reflected(start, config.horizon, wedge, rng,
                                         epsilon=config.epsilon,
                                         fold_cap=config.fold_cap)
            folds = sample.folds
            counts[folds] = counts.get(folds, 0) + 1
        except FoldCapExceeded:
            folds = config.fold_cap
            overflow += 1
        folds_all.append(folds)
    folds_all.sort()
    n = len(folds_all)
    quant = {q: folds_all[min(n - 1, int(q * n))] for q in (0.5, 0.9, 0.99)}
    return FoldingStats(counts=counts, overflow=overflow,
                        mean=math.fsum(folds_all) / n, quantiles=quant,
                        n_samples=n)


def eps_sweep(config, eps_values):
    """Mean fold count as a function of epsilon, using the same sub-streams
    for every epsilon so the comparison is coupled."""
    out = []
    for eps in eps_values:
        stats = folding_stats(replace(config, epsilon=float(eps)))
        out.append((float(eps), stats.mean))
    return out


def double_barrier_constants(m):
    """Mean and variance of the folding clock of an opening pi/m:
    (pi^2 / 4m^2, (2/3)(pi/2m)^4)."""
    if m < 1:
        raise ValueError(f"m must be a positive integer, got {m}")
    half = math.pi / (2.0 * m)
    return half * half, (2.0 / 3.0) * half ** 4
