"""Reference values for the modified Bessel function I_nu(x).

Computed with mpmath at 50 digits, printed at 17 significant digits so they can
be frozen into the unit tests. Also checks the truncation-depth example (order
step 3, argument 1.0) by brute force: smallest N such that the tail of the
theta-series, bounded term by term, drops below 1e-12 of the leading term.
"""

import mpmath as mp

mp.mp.dps = 50

CASES = [
    (0, 0.0),
    (0, 1.0),
    (0, 2.0),
    (1, 1.0),
    (1, 5.0),
    (2, 3.0),
    (5, 0.5),
    (0.5, 1.3),
    (1.0 / 3.0, 2.5),
    (10, 20.0),
    (3.5, 8.0),
    (0, 50.0),
    (2, 100.0),
]


def main():
    print("# I_nu(x) reference values (mpmath, 50 dps)")
    for nu, x in CASES:
        val = mp.besseli(mp.mpf(nu), mp.mpf(x))
        print(f"I({nu}, {x}) = {mp.nstr(val, 17)}")

    print()
    print("# log I_nu(x) for large x (log-space regime)")
    for nu, x in [(0, 800.0), (2, 1000.0), (7.5, 2000.0)]:
        val = mp.log(mp.besseli(mp.mpf(nu), mp.mpf(x)))
        print(f"log I({nu}, {x}) = {mp.nstr(val, 17)}")

    # Truncation depth for sums of I_{n*step}(x): find the smallest N with
    # sum_{n>=N} I_{n*step}(x) <= rtol * I_0(x) / 2   (leading term is I_0/2).
    print()
    print("# exact tail cutoffs: smallest N with sum_{n>=N} I_{n*step}(x) <= rtol*I_0(x)/2")
    for step, x, rtol in [(3.0, 1.0, 1e-12), (2.0, 1.0, 1e-12), (1.0, 5.0, 1e-12),
                          (0.5, 2.0, 1e-12), (6.0, 10.0, 1e-12)]:
        lead = mp.besseli(0, x) / 2
        n = 1
        while True:
            tail = mp.fsum(mp.besseli(n1 * step, x) for n1 in range(n, n + 200))
            if tail <= rtol * lead:
                break
            n += 1
        print(f"step={step} x={x} rtol={rtol}: N = {n}")


if __name__ == "__main__":
    main()
