"""Modified Bessel functions of the first kind, by direct power series.

Everything is computed in log space so that the large arguments produced by
the densities (order r*r0/t, which blows up as t -> 0) never overflow. The
series for I_nu(x) is

    I_nu(x) = sum_{k>=0} (x/2)^(nu+2k) / (k! Gamma(k+nu+1)),

summed with log-Gamma term evaluation and a certified stopping rule: once the
term ratio falls below 1/2, the remaining tail is at most one trailing term,
so stopping when the term is below rel_tol times the partial sum keeps the
relative truncation error below rel_tol.
"""

import math
from dataclasses import dataclass

LOG_HALF = math.log(0.5)


@dataclass(frozen=True)
class SeriesTolerance:
    rel_tol: float = 1e-12
    max_terms: int = 10000

    def __post_init__(self):
        if not 0.0 < self.rel_tol < 1.0:
            raise ValueError(f"rel_tol must be in (0, 1), got {self.rel_tol}")
        if self.max_terms < 1:
            raise ValueError("max_terms must be at least 1")


DEFAULT_TOL = SeriesTolerance()


class SeriesCapExceeded(RuntimeError):
    """The term cap was hit before the series converged."""


def _logaddexp(a, b):
    if b > a:
        a, b = b, a
    if b == -math.inf:
        return a
    return a + math.log1p(math.exp(b - a))


def log_bessel_i(nu, x, tol=DEFAULT_TOL):
    """log I_nu(x); returns -inf where I_nu vanishes (x = 0, nu > 0)."""
    if nu < 0 or x < 0 or not (math.isfinite(nu) and math.isfinite(x)):
        raise ValueError(f"need finite nu >= 0 and x >= 0, got nu={nu} x={x}")
    if x == 0.0:
        return 0.0 if nu == 0.0 else -math.inf
    log_half_x = math.log(0.5 * x)
    log_term = nu * log_half_x - math.lgamma(nu + 1.0)
    log_sum = log_term
    q = 0.25 * x * x  # (x/2)^2; term ratio at step k is q / (k (k + nu))
    for k in range(1, tol.max_terms + 1):
        log_term += 2.0 * log_half_x - math.log(k) - math.log(k + nu)
        log_sum = _logaddexp(log_sum, log_term)
        next_ratio = q / ((k + 1.0) * (k + 1.0 + nu))
        if next_ratio <= 0.5 and log_term - log_sum < math.log(tol.rel_tol):
            return log_sum
    raise SeriesCapExceeded(
        f"I_nu series did not converge within {tol.max_terms} terms "
        f"(nu={nu}, x={x})")


def bessel_i(nu, x, tol=DEFAULT_TOL):
    """I_nu(x). Saturates to inf when the value exceeds float range
    (roughly x > 709 at small orders); use log_bessel_i there instead."""
    lv = log_bessel_i(nu, x, tol)
    try:
        return math.exp(lv)
    except OverflowError:
        return math.inf


def series_tail_cutoff(nu_step, x, tol=DEFAULT_TOL, lead_order=0.0):
    """Smallest N so that sum_{n>=N} I_{n*nu_step}(x) is provably below
    rel_tol times I_{lead_order}(x)/2, the magnitude of the leading term of
    the series being truncated. A sine series starts at order nu_step, so it
    must pass lead_order=nu_step: at small x the orders decay so fast that a
    tail certified only against I_0 is far from small relative to the sum.

    Uses the term bound I_nu(x) <= (x/2)^nu e^{x^2/(4(nu+1))} / Gamma(nu+1)
    (from Gamma(k+nu+1) >= Gamma(nu+1)(nu+1)^k) together with a geometric
    ratio check between consecutive orders, so the returned N certifies the
    truncation rather than eyeballing term decay.
    """
    if nu_step <= 0 or x < 0:
        raise ValueError(f"need nu_step > 0 and x >= 0, got {nu_step}, {x}")
    if x == 0.0:
        return 1
    log_target = (math.log(tol.rel_tol) + log_bessel_i(lead_order, x, tol)
                  + LOG_HALF)
    log_half_x = math.log(0.5 * x)

    def log_order_bound(nu):
        return nu * log_half_x - math.lgamma(nu + 1.0) + x * x / (4.0 * (nu + 1.0))

    n = 1
    while True:
        here = log_order_bound(n * nu_step)
        ratio = log_order_bound((n + 1) * nu_step) - here
        # tail <= bound(n) / (1 - ratio) <= 2 bound(n) once ratio <= 1/2
        if ratio <= LOG_HALF and here + math.log(2.0) <= log_target:
            return n
        n += 1
        if n > 10 ** 6:
            raise SeriesCapExceeded(
                f"no certified cutoff below 1e6 terms (nu_step={nu_step}, x={x})")
