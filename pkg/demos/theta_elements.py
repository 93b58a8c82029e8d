"""Theta elements for the Legendre curve over F_5(t) on divisors supported at t and t+3.

Run: python demos/theta_elements.py
"""
import itertools

from ffiwasawa.funfield import CurveData, parse_place
from ffiwasawa.plfun import ThetaSystem
from ffiwasawa.rayclass import normalize_divisor

curve = CurveData.from_int_lists(5, [[0], [-1, -1], [0], [0, 1], [0]], {"inf": {"m": 4}})
T = [parse_place(5, "t"), parse_place(5, "t+3")]
system = ThetaSystem(curve, T, p=5, n=1)

grid = [normalize_divisor({v: k for v, k in zip(T, ks) if k}) for ks in itertools.product(range(3), repeat=2)]
for D in grid[:4]:
    label = " + ".join(f"{e}*({v.label()})" for v, e in D) or "0"
    theta = system.theta(D)
    print(f"theta_D for D = {label}: group {theta.moduli}")

for report in (system.check_recursions(grid), system.check_thetacomp(grid),
               system.check_tilde_interpolation(grid[-1])):
    print(f"{report.name:>20}: {'pass' if report.passed else 'FAIL'}")
