"""Iwasawa invariants of an explicit element of Z_3[Z/27]: mu, vanishing order and its Weierstrass form.

Over Z/3^n the coefficient of t^k (sigma = 1 + t) is only determined modulo
3^(n - floor(log_3 k)).  In Z_3[Z/9] the t^2 coefficient 9 of the element below
would be indistinguishable from 0, so the group is taken one level higher.

Run: python demos/iwasawa_invariants.py
"""
import numpy as np

from ffiwasawa.iwasawa import (GroupRingElt, mu_invariant, sharp_involution, to_power_series,
                               vanishing_order, weierstrass_check, weierstrass_prepare)

p, moduli = 3, (27,)
sigma = GroupRingElt.delta(p, moduli, (1,))
one = GroupRingElt.one(p, moduli)

# f = 3 * (sigma - 1)^2 * (sigma + 2): mu = 1, a double zero at the trivial character
g = (sigma - one) * (sigma - one) * (sigma + 2 * one)
f = 3 * g
print("coefficients:", [int(c) for c in f.coeffs.flat])
print("mu =", mu_invariant(f), " vanishing order =", vanishing_order(f))
print("mu of f^sharp =", mu_invariant(sharp_involution(f)))

# preparation needs mu = 0, so it is applied to g = f / 3
series = to_power_series(g, 8)
unit, poly = weierstrass_prepare(series, 0)
print("distinguished polynomial:", [int(c) for c in np.asarray(poly.coeffs).flat])
print("u * P reproduces g:", weierstrass_check(series, unit, poly, 0))
