"""Monte Carlo verification of the correlation-removing change of variables.

A correlated driving motion with marginal scales (sigma1, sigma2) and
correlation rho has covariance factor

    sigma = [[sigma1 sqrt(1-rho^2), sigma1 rho],
             [0,                    sigma2]],      sigma sigma^T = Sigma.

Applying sigma^{-1} turns the motion into a standard planar Brownian motion and
maps the boundary line y = a x to a line of slope

    a' = a sigma1 sqrt(1-rho^2) / (sigma2 - a sigma1 rho),

while the x-axis stays fixed. The four region shapes (intersection/union of
the half-plane {y >= 0} with a slope-a half-plane) map to wedges <0, alpha'>:

    intersection: alpha' = atan(a')            if a' > 0
                  alpha' = pi + atan(a')       if a' < 0
    union:        the same plus pi.

When sigma2 - a sigma1 rho = 0 the image of the second ray is vertical and
alpha' = pi/2 (intersection) or 3pi/2 (union).

This script checks, for each case and for sign flips of the denominator, that
membership in the original region is exactly equivalent to the image angle
lying in [0, alpha'], and that sigma^{-1} whitens the covariance.
"""

import math

import numpy as np


def sigma_matrix(s1, s2, rho):
    return np.array([[s1 * math.sqrt(1 - rho * rho), s1 * rho], [0.0, s2]])


def region_member(case, a, x, y):
    if case == "AND_POS":
        return y >= 0 and y <= a * x
    if case == "AND_NEG":
        return y >= 0 and y >= a * x
    if case == "OR_POS":
        return y >= 0 or y >= a * x
    if case == "OR_NEG":
        return y >= 0 or y <= a * x
    raise ValueError(case)


def mapped_opening(case, s1, s2, rho, a):
    den = s2 - a * s1 * rho
    if den == 0.0:
        base = math.pi / 2
    else:
        ap = a * s1 * math.sqrt(1 - rho * rho) / den
        base = math.atan(ap) if ap > 0 else math.pi + math.atan(ap)
    return base + (math.pi if case.startswith("OR") else 0.0)


def main():
    rng = np.random.default_rng(3)

    print("# sigma sigma^T recovers the covariance")
    for _ in range(3):
        s1, s2 = rng.uniform(0.3, 2.5, 2)
        rho = rng.uniform(-0.95, 0.95)
        sig = sigma_matrix(s1, s2, rho)
        cov = sig @ sig.T
        target = np.array([[s1 * s1, rho * s1 * s2], [rho * s1 * s2, s2 * s2]])
        print(f"  s1={s1:.3f} s2={s2:.3f} rho={rho:.3f}: max|err| = {np.abs(cov-target).max():.2e}")

    print()
    print("# membership preserved: region <-> image angle in [0, alpha']")
    configs = [
        ("AND_POS", 1.0, 1.0, 0.0, 1.0),
        ("AND_POS", 2.0, 1.0, 0.3, 0.7),
        ("AND_POS", 1.0, 0.5, 0.8, 2.0),   # denominator < 0, flips to the pi+atan form
        ("AND_NEG", 1.0, 1.3, -0.4, -0.8),
        ("AND_NEG", 1.5, 0.4, -0.9, -1.2), # denominator sign check
        ("OR_POS", 1.0, 1.0, 0.2, 1.5),
        ("OR_POS", 0.7, 2.0, -0.6, 0.9),
        ("OR_NEG", 1.0, 1.0, 0.0, -1.0),
        ("OR_NEG", 2.0, 0.9, 0.5, -0.5),
        ("AND_POS", 1.0, 1.0, 0.5, 2.0),   # degenerate: s2 - a s1 rho = 0
    ]
    for case, s1, s2, rho, a in configs:
        sig = sigma_matrix(s1, s2, rho)
        inv = np.linalg.inv(sig)
        alpha_p = mapped_opening(case, s1, s2, rho, a)
        bad = 0
        for _ in range(20000):
            x, y = rng.uniform(-3, 3, 2)
            if abs(y) < 1e-3 or abs(y - a * x) < 1e-3:
                continue  # stay away from the boundary; membership there is a tie
            inside = region_member(case, a, x, y)
            u, v = inv @ (x, y)
            ang = math.atan2(v, u) % (2 * math.pi)
            mapped_inside = ang <= alpha_p
            if inside != mapped_inside:
                bad += 1
        den = s2 - a * s1 * rho
        print(f"  {case} s1={s1} s2={s2} rho={rho} a={a}: alpha'={alpha_p:.12g} "
              f"(den={den:+.3g}) mismatches={bad}")


if __name__ == "__main__":
    main()
