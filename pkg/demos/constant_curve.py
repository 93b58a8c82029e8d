"""A constant curve over F_5(t): its L-value, the BSD quotient and the p-adic value on K.

Run: python demos/constant_curve.py
"""
from pathlib import Path

from ffiwasawa.cli import load_config, make_context
from ffiwasawa.lfun import LFunctionEngine
from ffiwasawa.plfun import bsd_check, check_l_equals_k
from ffiwasawa.rayclass import characters_of, get_level_group

cfg = load_config(Path(__file__).resolve().parent.parent / "fixtures" / "fx1_constant.ini")
ctx = make_context(cfg)

# E: y^2 = x^3 + x + 1 has 9 points over F_5, so every place of degree 1 has trace -3.
engine = LFunctionEngine(cfg.curve, cfg.q, cfg.p)
trivial = characters_of(get_level_group(cfg.q, {}, cfg.p, 1))[0]
series = engine.euler_series_unramified(trivial, 6)
print("Euler product, first coefficients:", [int(c[0]) for c in series])

lp = engine.l_polynomial(trivial)
value = lp.value_at_one(cfg.precision).reconstruct_rational()
print("L(E/K, 1) =", value)

bsd = bsd_check(ctx)
print("BSD prediction", bsd.details["predicted"], "->", "agrees" if bsd.passed else "disagrees")

hat = ctx.build_hat_L(0).value
print("hat L on the trivial tower: 1/81 mod 5^N ->", int(hat.coefficient(())) * 81 % 5 ** hat.precision == 1)
print("v_5(script L) matches |Sha[5^inf]|:", check_l_equals_k(ctx).passed)
