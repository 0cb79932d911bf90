"""Reference facts for the one-dimensional half-line kernels.

The transition density of Brownian motion on [0, inf) started at x0 > 0 is,
by the reflection principle,

    killed (absorbed at 0):    p_t(x0, w) = phi_t(w - x0) - phi_t(w + x0)
    reflected at 0:            p_t(x0, w) = phi_t(w - x0) + phi_t(w + x0)

for w > 0, with phi_t the centered Gaussian kernel. Both factor through the
free kernel as  phi_t(w - x0) * (1 -+ e^{-2 x0 w / t}), since

    phi_t(w + x0) / phi_t(w - x0) = exp(((w-x0)^2 - (w+x0)^2) / 2t)
                                  = exp(-2 x0 w / t).

This script verifies numerically:
  * the killed kernel integrates to the survival probability 2 Phi(x0/sqrt t) - 1,
  * the reflected kernel integrates to 1,
  * the quarter-plane four-image sums equal the product of two 1D kernels,
and prints frozen spot values for the tests.
"""

import math

import numpy as np
from scipy import integrate
from scipy.stats import norm


def phi(t, u):
    return math.exp(-u * u / (2 * t)) / math.sqrt(2 * math.pi * t)


def one_dim(kind, x0, w, t):
    if w <= 0:
        return 0.0
    base = phi(t, w - x0)
    corr = math.exp(-2 * x0 * w / t)
    return base * (1 - corr) if kind == "killed" else base * (1 + corr)


def quarter_plane_images(kind, x, y, t):
    """Four-image sum for the quarter plane: reflections in both axes."""
    sgn = (lambda k: (-1) ** k) if kind == "killed" else (lambda k: 1)
    r0 = math.hypot(*y)
    th0 = math.atan2(y[1], y[0])
    # image angles of the start, orders 0..3 for opening pi/2
    alpha = math.pi / 2
    angles = []
    for k in range(4):
        if k % 2 == 0:
            angles.append(th0 + k * alpha)
        else:
            angles.append((k + 1) * alpha - th0)
    total = 0.0
    for k, ang in enumerate(angles):
        dx = x[0] - r0 * math.cos(ang)
        dy = x[1] - r0 * math.sin(ang)
        total += sgn(k) * math.exp(-(dx * dx + dy * dy) / (2 * t)) / (2 * math.pi * t)
    return total


def main():
    print("# survival identity: integral of killed kernel vs 2*Phi(x0/sqrt(t)) - 1")
    for x0, t in [(1.0, 1.0), (0.4, 2.0), (3.0, 1.5)]:
        mass, _ = integrate.quad(lambda w: one_dim("killed", x0, w, t), 0, np.inf)
        target = 2 * norm.cdf(x0 / math.sqrt(t)) - 1
        print(f"x0={x0} t={t}: integral={mass:.15g} closed={target:.15g} diff={mass-target:.2e}")

    print()
    print("# reflected kernel mass (should be 1)")
    for x0, t in [(1.0, 1.0), (0.2, 3.0)]:
        mass, _ = integrate.quad(lambda w: one_dim("reflected", x0, w, t), 0, np.inf)
        print(f"x0={x0} t={t}: integral={mass:.15g}")

    print()
    print("# quarter plane: image sum vs product of 1D kernels")
    rng = np.random.default_rng(7)
    worst = {"killed": 0.0, "reflected": 0.0}
    for _ in range(200):
        y = rng.uniform(0.1, 2.0, size=2)
        x = rng.uniform(0.05, 2.5, size=2)
        t = rng.uniform(0.2, 3.0)
        for kind in ("killed", "reflected"):
            a = quarter_plane_images(kind, x, y, t)
            b = one_dim(kind, y[0], x[0], t) * one_dim(kind, y[1], x[1], t)
            rel = abs(a - b) / max(abs(b), 1e-300)
            worst[kind] = max(worst[kind], rel)
    print(f"worst relative difference over 200 triples: {worst}")

    print()
    print("# frozen spot values")
    for kind, x0, w, t in [("killed", 1.0, 0.7, 0.9), ("reflected", 1.0, 0.7, 0.9),
                           ("killed", 0.5, 1.2, 2.0), ("reflected", 0.5, 1.2, 2.0)]:
        print(f"one_dim({kind}, x0={x0}, w={w}, t={t}) = {one_dim(kind, x0, w, t):.17g}")


if __name__ == "__main__":
    main()
