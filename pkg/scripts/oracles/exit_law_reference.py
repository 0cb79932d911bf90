"""Analytic cross-checks for the wedge exit law (side, radius, time).

Facts verified here, all independent of the package code:

1. Half-plane (opening pi, start at height 1): the exit abscissa is standard
   Cauchy, the exit time is the Levy law with density t^{-3/2} e^{-1/2t} / sqrt(2 pi),
   and P(tau <= 1) = 2 (1 - Phi(1)).

2. The joint exit density on side +/- of a pi/m wedge,

       q(r, t) = (r0 / 2 pi t^2) sum_k sin(g_k) exp(-c_k / 2t),
       g_k(PLUS)  = alpha_plus + 2 pi k / m - theta0,
       g_k(MINUS) = -alpha_minus - 2 pi k / m + theta0,
       c_k(r)     = r^2 + r0^2 - 2 r r0 cos(g_k),

   integrates over t to the radius marginal (r0/pi) sum_k sin(g_k)/c_k(r)
   (since int t^-2 exp(-c/2t) dt = 2/c), and over (r, t) to the side mass
   (theta0 - alpha_minus)/opening.

3. The closed-form inverse-CDF for the exit radius,

       MINUS: r = r0 (cos(s) - sin(s)/tan((pi - s)(u - 1)))^{alpha/pi},
       PLUS:  r = r0 (-cos(s) - sin(s)/tan(s (u - 1)))^{alpha/pi},
       s = pi theta0 / alpha  (theta0 relative to the lower ray),

   pushes Uniform(0,1) to that radius marginal: for a grid of u,
   int_0^{r(u)} marginal(rho) drho = u * side mass. Also: the base inside
   the power stays strictly positive for u in (0,1).
"""

import math

import numpy as np
from scipy import integrate
from scipy.stats import norm


def gammas(side, m, alpha_minus, alpha_plus, theta0):
    if side == "PLUS":
        return [alpha_plus + 2 * math.pi * k / m - theta0 for k in range(m)]
    return [-alpha_minus - 2 * math.pi * k / m + theta0 for k in range(m)]


def joint(side, m, alpha_minus, alpha_plus, r0, theta0, r, t):
    tot = 0.0
    for g in gammas(side, m, alpha_minus, alpha_plus, theta0):
        c = r * r + r0 * r0 - 2 * r * r0 * math.cos(g)
        tot += math.sin(g) * math.exp(-c / (2 * t))
    return r0 / (2 * math.pi * t * t) * tot


def radius_marginal(side, m, alpha_minus, alpha_plus, r0, theta0, r):
    tot = 0.0
    for g in gammas(side, m, alpha_minus, alpha_plus, theta0):
        c = r * r + r0 * r0 - 2 * r * r0 * math.cos(g)
        tot += math.sin(g) / c
    return r0 / math.pi * tot


def inverse_cdf_radius(side, alpha, theta0, r0, u):
    s = math.pi * theta0 / alpha
    if side == "MINUS":
        base = math.cos(s) - math.sin(s) / math.tan((math.pi - s) * (u - 1))
    else:
        base = -math.cos(s) - math.sin(s) / math.tan(s * (u - 1))
    return base, r0 * base ** (alpha / math.pi)


def main():
    print("# 1. half-plane analytics")
    # exit abscissa Cauchy: radius law on side MINUS for start (1, pi/2) in <0, pi>
    # MINUS exits land on the positive x-axis at distance r; by symmetry the
    # abscissa of the full exit point is standard Cauchy, so r | MINUS is
    # half-Cauchy with density 2/(pi (1+r^2)).
    marg = lambda r: radius_marginal("MINUS", 1, 0.0, math.pi, 1.0, math.pi / 2, r)
    pts = [0.3, 1.0, 2.5]
    for r in pts:
        print(f"  marginal({r}) = {marg(r):.15g}   half-Cauchy/2 = {1/(math.pi*(1+r*r)):.15g}")
    print(f"  P(tau<=1) = 2(1-Phi(1)) = {2*(1-norm.cdf(1.0)):.15g}")
    levy = lambda t: t ** -1.5 * math.exp(-1 / (2 * t)) / math.sqrt(2 * math.pi)
    # t-marginal = integral over r of both sides' joint
    for t in (0.05, 0.3, 1.0, 4.0):
        val = sum(
            integrate.quad(lambda r: joint(s, 1, 0.0, math.pi, 1.0, math.pi / 2, r, t),
                           0, np.inf, limit=200)[0]
            for s in ("MINUS", "PLUS"))
        print(f"  t-marginal({t}) = {val:.12g}   levy = {levy(t):.12g}   diff = {val-levy(t):.2e}")

    print()
    print("# 2. side masses by quadrature of the joint density")
    for m, theta0, r0 in [(2, 0.7, 1.3), (3, 0.5, 2.0)]:
        alpha = math.pi / m
        for side in ("MINUS", "PLUS"):
            mass = integrate.quad(
                lambda r: radius_marginal(side, m, 0.0, alpha, r0, theta0, r),
                0, np.inf, limit=400)[0]
            target = theta0 / alpha if side == "PLUS" else 1 - theta0 / alpha
            print(f"  m={m} side={side}: mass={mass:.12g} target={target:.12g} diff={mass-target:.2e}")

    print()
    print("# 3. inverse-CDF radius vs integrated marginal (pi/m wedges)")
    rng = np.random.default_rng(11)
    worst = 0.0
    min_base = np.inf
    for m, theta0, r0 in [(2, 0.7, 1.3), (3, 0.5, 2.0), (1, 2.2, 0.8)]:
        alpha = math.pi / m
        for side in ("MINUS", "PLUS"):
            mass = theta0 / alpha if side == "PLUS" else 1 - theta0 / alpha
            for u in np.linspace(0.02, 0.98, 25):
                base, r_u = inverse_cdf_radius(side, alpha, theta0, r0, float(u))
                min_base = min(min_base, base)
                cdf = integrate.quad(
                    lambda rho: radius_marginal(side, m, 0.0, alpha, r0, theta0, rho),
                    0, r_u, limit=400)[0]
                worst = max(worst, abs(cdf / mass - u))
    for _ in range(2000):
        alpha = rng.uniform(0.2, 2 * math.pi - 0.2)
        theta0 = rng.uniform(1e-3, alpha - 1e-3)
        u = rng.uniform(1e-6, 1 - 1e-6)
        side = "MINUS" if rng.random() < 0.5 else "PLUS"
        base, _ = inverse_cdf_radius(side, alpha, theta0, 1.0, u)
        min_base = min(min_base, base)
    print(f"  worst |CDF(r(u))/mass - u| over pi/m grid: {worst:.3g}")
    print(f"  smallest base value seen (must be > 0): {min_base:.6g}")

    print()
    print("# 4. E[tau] closed form for wedge <0, alpha>, alpha < pi/2")
    # u(r, theta) = r^2 (cos 2theta + tan(alpha) sin 2theta - 1) / 2 solves
    # (1/2) Lap u = -1 with u = 0 on both rays.
    for alpha, r0, theta0 in [(0.9, 1.5, 0.3), (0.58, 3.0, 0.4)]:
        v = (math.cos(2 * theta0) + math.tan(alpha) * math.sin(2 * theta0) - 1) / 2
        print(f"  alpha={alpha} r0={r0} theta0={theta0}: E[tau] = {r0*r0*v:.15g}")


if __name__ == "__main__":
    main()
