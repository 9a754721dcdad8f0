"""Regenerates the hard-coded numeric tables in crates/core/src.

  python3 scripts/gen_tables.py quadrature  > crates/core/src/quadrature.rs
  python3 scripts/gen_tables.py sobol       > crates/core/src/qmc/direction_numbers.rs
  python3 scripts/gen_tables.py activation  (prints sup-norm constants)

Requires mpmath; the Sobol table additionally needs scipy (new-joe-kuo-6.21201).
"""
import sys

import mpmath as mp

mp.mp.dps = 40


def gauss_legendre(n):
    import numpy as np

    nodes = []
    for x0 in np.polynomial.legendre.leggauss(n)[0]:
        x = mp.mpf(float(x0))
        for _ in range(8):
            x -= mp.legendre(n, x) / mp.diff(lambda t: mp.legendre(n, t), x)
        dp = mp.diff(lambda t: mp.legendre(n, t), x)
        nodes.append((x, 2 / ((1 - x * x) * dp * dp)))
    return nodes


def emit_rule(name, n):
    rule = gauss_legendre(n)
    print(f"pub const {name}: [(f64, f64); {n}] = [")
    for x, w in rule:
        print(f"    ({mp.nstr(x, 20, min_fixed=0, max_fixed=0)}, {mp.nstr(w, 20, min_fixed=0, max_fixed=0)}),")
    print("];")


def quadrature():
    print("//! Gauss-Legendre rules on [-1, 1] as (node, weight) pairs.")
    print("//!")
    print("//! Generated by `scripts/gen_tables.py quadrature`; do not edit by hand.")
    print("#![allow(clippy::excessive_precision)]")
    print()
    print("/// 10-node rule, used for the bivariate normal correlation integral.")
    emit_rule("GAUSS_LEGENDRE_10", 10)
    print()
    print("/// 31-node rule, used panel-wise for Owen's T.")
    emit_rule("GAUSS_LEGENDRE_31", 31)


def sobol(dims=64):
    import numpy as np
    import scipy.stats

    path = scipy.stats.__path__[0] + "/_sobol_direction_numbers.npz"
    data = np.load(path)
    poly, vinit = data["poly"], data["vinit"]
    print("//! Joe-Kuo (new-joe-kuo-6.21201) primitive polynomials and initial direction")
    print("//! numbers for the first dimensions of the Sobol sequence.")
    print("//!")
    print("//! Generated by `scripts/gen_tables.py sobol`; do not edit by hand.")
    print()
    print(f"pub const MAX_DIMS: usize = {dims};")
    print()
    print("/// `(polynomial, initial m values)`; the polynomial includes its leading and")
    print("/// trailing unit coefficients, so its degree is `bit_length - 1`.")
    print(f"pub const SOBOL_TABLE: [(u32, &[u32]); {dims}] = [")
    for d in range(dims):
        p = int(poly[d])
        deg = max(p.bit_length() - 1, 0)
        ms = [int(v) for v in vinit[d][: max(deg, 1)]]
        print(f"    ({p}, &{ms}),")
    print("];")


def activation():
    def argmax(f, lo=-10, hi=10, n=20001):
        xs = [lo + (hi - lo) * i / (n - 1) for i in range(n)]
        best = max(xs, key=lambda x: abs(f(mp.mpf(x))))
        step = mp.mpf(hi - lo) / (n - 1)
        a, b = best - step, best + step
        for _ in range(200):
            m1, m2 = a + (b - a) / 3, b - (b - a) / 3
            if abs(f(m1)) < abs(f(m2)):
                a = m1
            else:
                b = m2
        x = (a + b) / 2
        return x, abs(f(x))

    gelu1 = lambda x: mp.ncdf(x) + x * mp.npdf(x)
    gelu2 = lambda x: mp.npdf(x) * (2 - x * x)
    probit1 = lambda x: 2 * mp.npdf(x)
    probit2 = lambda x: -2 * x * mp.npdf(x)
    for name, f in [("gelu'", gelu1), ("gelu''", gelu2), ("probit'", probit1), ("probit''", probit2)]:
        x, v = argmax(f)
        print(f"{name:10s} sup at x = {mp.nstr(x, 17)}: {mp.nstr(v, 20)}")


if __name__ == "__main__":
    {"quadrature": quadrature, "sobol": sobol, "activation": activation}[sys.argv[1]]()
