from fractions import Fraction

import numpy as np
import pytest

from ffiwasawa.cli import load_config, make_context
from ffiwasawa.funfield import place
from ffiwasawa.iwasawa import characters, eval_character, pushforward, sharp_involution
from ffiwasawa.plfun import (
    TowerContext,
    bsd_check,
    c_L,
    check_daleth_divisibility,
    check_functional_equation,
    check_l_equals_k,
    check_specialization,
    valuation_report,
    vz_suite,
)
from ffiwasawa.rayclass import TowerSpec
from ffiwasawa.padic import CycloElt

from conftest import fixture_path


def _is_inverse_of(coeff, denom: int, p: int, prec: int) -> bool:
    return (int(coeff) * denom - 1) % p ** prec == 0


def test_trivial_tower_interpolates_l_value(ctx_fx1):
    hat = ctx_fx1.build_hat_L(0)
    assert hat.value.moduli == () and hat.aleph == 0
    # q^c L(A, 1) = 5^-1 * 5/81
    assert _is_inverse_of(hat.value.coefficient(()), 81, 5, hat.value.precision)
    val = ctx_fx1.interpolation_value((), 1)
    assert val.equals(CycloElt.from_fraction(Fraction(1, 81), 5, 1, val.precision))


def test_trivial_tower_script_equals_hat(ctx_fx1):
    hat = ctx_fx1.build_hat_L(0).value
    script = ctx_fx1.build_script_L(0).value
    assert script.equals(hat)
    assert script.valuation_min() == 0


def test_bsd_and_l_equals_k(ctx_fx1):
    r = bsd_check(ctx_fx1)
    assert r.passed and r.details["predicted"] == Fraction(5, 81)
    lk = check_l_equals_k(ctx_fx1)
    assert lk.passed and lk.details["v_p"] == 0 == lk.details["expected"]


def test_l_equals_k_needs_trivial_tower(ctx_fx3_cyc):
    with pytest.raises(ValueError):
        check_l_equals_k(ctx_fx3_cyc)


def test_trivial_tower_valuations(ctx_fx1):
    r = valuation_report(ctx_fx1, 0)
    assert r.passed
    assert [v.value for v in r.details["valuations"].values()] == [0]


def test_constant_curve_sign_is_plus(ctx_fx1, ctx_fx1_tower):
    assert check_functional_equation(ctx_fx1, (0,)).details["epsilon"] == 1
    r = check_functional_equation(ctx_fx1_tower, (1,))
    assert r.passed and r.details["epsilon"] == 1


def test_hat_l_interpolates_every_character(ctx_fx3_cyc):
    n = 1
    hat = ctx_fx3_cyc.build_hat_L(n).value
    for e in characters(ctx_fx3_cyc.moduli(n)):
        assert eval_character(hat, e).equals(ctx_fx3_cyc.interpolation_value(e, n))


def test_build_is_independent_of_euler_bound(cfg_fx3_cyc):
    cfg = load_config(fixture_path("fx3_cyclotomic.ini"))
    base = make_context(cfg).build_hat_L(1).value
    # every polynomial here has degree <= 3; bound 7 forces the full Euler product
    long = TowerContext(cfg.curve, cfg.tower, cfg.bsd, cfg.precision, euler_bound=7)
    assert long.build_hat_L(1).value.equals(base)


def test_fe_completion_agrees_with_full_product(ctx_fx3_cyc):
    eng = ctx_fx3_cyc.engine
    for e in characters(ctx_fx3_cyc.moduli(1)):
        w = ctx_fx3_cyc.ray_character(e, 1)
        a, b = eng.l_polynomial(w, mode="fe"), eng.l_polynomial(w, mode="full")
        assert a.degree == b.degree
        assert all(a.coefficient(k).equals(b.coefficient(k)) for k in range(a.degree + 1))


def test_levels_are_compatible(ctx_fx3_cyc):
    top = ctx_fx3_cyc.build_hat_L(2, check_lower=True)
    low = ctx_fx3_cyc.build_hat_L(1)
    proj = pushforward(top.value, np.eye(1, dtype=np.int64), ctx_fx3_cyc.moduli(1))
    assert proj.equals(low.value)
    assert top.aleph == low.aleph


def test_functional_equation_single_sign(ctx_fx3_cyc):
    r = check_functional_equation(ctx_fx3_cyc, (1,))
    assert r.passed and r.details["epsilon"] in (1, -1)


def test_sharp_is_involution_on_built_element(ctx_fx3_cyc):
    L = ctx_fx3_cyc.build_hat_L(1).value
    assert sharp_involution(sharp_involution(L)).equals(L)


def test_specialization_to_itself(cfg_fx3_cyc, ctx_fx3_cyc):
    r = check_specialization(ctx_fx3_cyc, ctx_fx3_cyc, np.eye(1, dtype=np.int64), 1)
    assert r.details["spechat"] is True


def test_daleth_level_one(ctx_fx3_cyc):
    r = check_daleth_divisibility(ctx_fx3_cyc, 1)
    assert r.passed and r.details["division_exact"]


def test_c_l_rank_zero_fraction(ctx_fx3_cyc):
    # S = {t} split multiplicative, so c_L = |Sha| / |A(K)|^2 times m_v for the other bad places
    assert c_L(ctx_fx3_cyc) == Fraction(1, 25) * 5


def test_vz_suite_small():
    t, t3 = place(5, [0, 1]), place(5, [3, 1])
    shapes = [((), {t: 1}, {t3: 1}), ({t: 1}, {t: 1}, {t3: 1})]
    r = vz_suite(5, 5, 1, shapes, trials=10)
    assert r.passed
    assert r.details["trials"]["vz"] == 20


def test_trivial_tower_has_no_degree_characters():
    T = TowerSpec.trivial(5, 5)
    assert T.d == 0
