#!/usr/bin/env python3
"""Tabulate the truncation-band moments: closed form next to adaptive quadrature.

    python scripts/band_coefficients.py 1 5 1.5 3
"""
import math
import sys

from scipy import integrate

from sparse_phase_init.spectral import TruncationBand, population_coefficients


def quadrature(l, u):
    phi = lambda t: math.exp(-t * t / 2) / math.sqrt(2 * math.pi)  # noqa: E731
    mom = [2 * integrate.quad(lambda t, p=p: t**p * phi(t), l, u, epsabs=1e-14)[0] for p in range(4)]
    return mom[1], mom[3] - mom[1], mom[0], mom[2] - mom[0]


if __name__ == "__main__":
    nums = [float(a) for a in sys.argv[1:]] or [1.0, 5.0]
    print(f"{'l':>5} {'u':>5} {'gamma0':>12} {'beta0':>12} {'gamma_chk':>12} {'beta_chk':>12}  max|diff|")
    for l, u in zip(nums[::2], nums[1::2]):
        c = population_coefficients(TruncationBand(l, u))
        closed = (c.gamma0, c.beta0, c.gamma_check, c.beta_check)
        diff = max(abs(a - b) for a, b in zip(closed, quadrature(l, u)))
        print(f"{l:5g} {u:5g} " + " ".join(f"{v:12.8f}" for v in closed) + f"  {diff:.1e}")
