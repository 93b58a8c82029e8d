"""Build the p-adic L-function of a semistable curve over F_3(t) along a Z_3-tower.

The curve has split multiplicative reduction at t, the place that generates the
tower, so the element acquires an exceptional zero.  The script builds levels
1 and 2, checks that they are compatible and runs the structural checks.

Run: python demos/cyclotomic_tower.py
"""
from pathlib import Path

from ffiwasawa.cli import load_config, make_context
from ffiwasawa.iwasawa import mu_invariant, vanishing_order
from ffiwasawa.plfun import check_daleth_divisibility, check_functional_equation, mtt_report

cfg = load_config(Path(__file__).resolve().parent.parent / "fixtures" / "fx3_cyclotomic.ini")
ctx = make_context(cfg)

for place, data in sorted(ctx.bad.items(), key=lambda kv: kv[0].label()):
    print(f"{place.label():>8}: {data.reduction}, m_v = {data.m}")

for n in (1, 2):
    hat = ctx.build_hat_L(n, check_lower=n > 1)
    coeffs = [str(int(c)) for c in hat.value.coeffs.flat]
    print(f"level {n}: {len(coeffs)} coefficients, aleph = {hat.aleph}, first three {coeffs[:3]}")

top = ctx.build_hat_L(2).value
print("mu =", mu_invariant(top), " order of vanishing =", vanishing_order(top))

fe = check_functional_equation(ctx, (1, 2))
print("functional equation sign:", fe.details["epsilon"])
print("daleth divides hat L:", check_daleth_divisibility(ctx, 2).passed)

mtt = mtt_report(ctx, 2)
print(f"exceptional zeros s_L = {mtt.details['s_L']}, c_L = {mtt.details['c_L']}, leading term ok: {mtt.passed}")
