"""High-precision targets for the benchmark wedge configurations.

Route A (closed forms):
  * E[tau] for a wedge <0, alpha> with alpha < pi/2:
    u(r, theta) = r^2 (cos 2theta + tan(alpha) sin 2theta - 1)/2 solves the
    Poisson problem (1/2) Lap u = -1, u = 0 on the rays, so E[tau] = u(x0).
  * E[|W_{tau and T}|^2] = r0^2 + 2 E[tau and T]  (|W|^2 - 2t is a martingale).
  * E[W . e1] is conserved: r0 cos(theta0).
  * E[|X_T|^2] = r0^2 + 2T for the normally reflected process (the regulator
    acts orthogonally to the position on each ray).

Route B (Bessel-series kernels, quadrature, scipy.special.ive):
  * E[(tau - T)^+] = int u(y) p_killed(T, x0, y) dy  (strong Markov), giving
    E[tau and T] = E[tau] - E[(tau - T)^+].
  * sin^2(theta) functionals for the 0.58-opening wedge, stopped and reflected:
    E[sin^2 theta(X_T)] directly; for the stopped process
    E[sin^2 theta_{tau and T}] = sin^2(alpha) P(exit on the upper ray by T)
                                 + int sin^2(theta) p_killed dy,
    with P(upper-ray exit by T) = theta0/alpha - int (theta/alpha) p_killed dy
    (the harmonic angle functional stopped at tau and T).
"""

import math

import numpy as np
from scipy import integrate
from scipy.special import ive

N_TERMS = 60


def series_kernel(kind, alpha, r0, theta0, r, theta, t):
    """Transition density w.r.t. dr dtheta of the wedge kernels."""
    z = r * r0 / t
    base = math.exp(-((r - r0) ** 2) / (2 * t))  # e^{-(r^2+r0^2)/2t} e^{z} factor
    if kind == "reflected":
        tot = 0.5 * ive(0, z)
        for n in range(1, N_TERMS):
            nu = n * math.pi / alpha
            tot += ive(nu, z) * math.cos(nu * theta) * math.cos(nu * theta0)
    else:
        tot = 0.0
        for n in range(1, N_TERMS):
            nu = n * math.pi / alpha
            tot += ive(nu, z) * math.sin(nu * theta) * math.sin(nu * theta0)
    return (2 * r / (t * alpha)) * base * tot


def wedge_integral(f, kind, alpha, r0, theta0, t, rmax):
    return integrate.dblquad(
        lambda r, theta: f(r, theta) * series_kernel(kind, alpha, r0, theta0, r, theta, t),
        0, alpha, 0, rmax, epsabs=1e-10, epsrel=1e-10)[0]


def mean_exit_time(alpha, r0, theta0):
    return r0 * r0 * (math.cos(2 * theta0) + math.tan(alpha) * math.sin(2 * theta0) - 1) / 2


def main():
    # --- opening 0.9, start (1.5, 0.3), T = 1 -------------------------------
    alpha, r0, theta0, T = 0.9, 1.5, 0.3, 1.0
    rmax = r0 + 8 * math.sqrt(T)
    e_tau = mean_exit_time(alpha, r0, theta0)
    overshoot = wedge_integral(lambda r, th: mean_exit_time(alpha, r, th),
                               "killed", alpha, r0, theta0, T, rmax)
    e_tau_T = e_tau - overshoot
    print("# opening 0.9, start (1.5, 0.3), T=1")
    print(f"E[tau]            = {e_tau:.10g}")
    print(f"E[(tau-1)^+]      = {overshoot:.10g}")
    print(f"E[tau and 1]      = {e_tau_T:.10g}")
    print(f"E[|W_tau|^2]      = {r0*r0 + 2*e_tau:.10g}")
    print(f"E[|W_{{tau and 1}}|^2] = {r0*r0 + 2*e_tau_T:.10g}")
    print(f"E[W . e1]         = {r0*math.cos(theta0):.10g}")
    print(f"E[|X_1|^2]        = {r0*r0 + 2*T:.10g}  (closed form)")
    refl_check = wedge_integral(lambda r, th: r * r, "reflected", alpha, r0, theta0, T, rmax)
    mass_check = wedge_integral(lambda r, th: 1.0, "reflected", alpha, r0, theta0, T, rmax)
    print(f"quadrature check  = {refl_check:.10g} (mass {mass_check:.12g})")

    # --- opening 0.58, start (3, 0.4), T = 1 --------------------------------
    alpha, r0, theta0 = 0.58, 3.0, 0.4
    rmax = r0 + 8 * math.sqrt(T)
    print()
    print("# opening 0.58, start (3, 0.4), T=1, f = sin^2 theta")
    refl = wedge_integral(lambda r, th: math.sin(th) ** 2, "reflected", alpha, r0, theta0, T, rmax)
    print(f"E[sin^2 theta(X_1)]  = {refl:.10g}")
    surv_angle = wedge_integral(lambda r, th: th / alpha, "killed", alpha, r0, theta0, T, rmax)
    p_upper_by_T = theta0 / alpha - surv_angle
    interior = wedge_integral(lambda r, th: math.sin(th) ** 2, "killed", alpha, r0, theta0, T, rmax)
    stopped = math.sin(alpha) ** 2 * p_upper_by_T + interior
    surv = wedge_integral(lambda r, th: 1.0, "killed", alpha, r0, theta0, T, rmax)
    print(f"P(upper exit by 1)   = {p_upper_by_T:.10g}   (P(tau>1) = {surv:.10g})")
    print(f"E[sin^2 theta stopped] = {stopped:.10g}")
    print(f"E[tau] (alpha=0.58)  = {mean_exit_time(alpha, r0, theta0):.10g}")


if __name__ == "__main__":
    main()
