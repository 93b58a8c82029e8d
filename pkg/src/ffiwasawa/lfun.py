"""Twisted Hasse-Weil L-polynomials, classical ray class L-polynomials,
Gauss sums and functional-equation checks over F_q(t).

Power sums.  For a character omega of G(D, n) the logarithmic derivative of
the Euler product gives, for each k,

    S_k(omega) = sum over x in P^1(F_{q^k}) outside Supp(D_omega) of
                 a_x^(k) * omega([N(t - x)])

with a_x^(k) = q^k + 1 - #(fibre over x)(F_{q^k}).  Points are processed one
Frobenius orbit at a time; orbit data is grouped by ray class once and reused
for every character.  Newton's identities k c_k = sum_i S_i c_{k-i} then give
the coefficients exactly in Z[zeta].
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .funfield import (BigField, CurveData, Embedding, Place, PlaceData, PolyRing,
                       character_sum_cubic, classify_reduction, evaluate_poly_big,
                       get_big_field, get_field, infinity, necklace_count)
from .padic import CycloElt, galois_act, phi_pm, reduce_full
from .rayclass import RayCharacter, RayLevelGroup, conductor_of, divisor_degree


class DegreeMismatch(ArithmeticError):
    """Computed coefficients contradict the predicted degree."""


class FEViolation(ArithmeticError):
    def __init__(self, index: int, msg: str = ""):
        super().__init__(f"functional equation fails at coefficient {index} {msg}")
        self.index = index


class ConductorMismatch(ArithmeticError):
    pass


# --------------------------------------------------------- Z[zeta] vectors

def _zero(p: int, n: int) -> list[int]:
    return [0] * phi_pm(p, n)


def _cyc_mul(a: Sequence[int], b: Sequence[int], p: int, n: int) -> list[int]:
    P = p ** n
    full = [0] * P
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    full[(i + j) % P] += x * y
    return reduce_full(full, p, n)


def _cyc_add(a, b):
    return [x + y for x, y in zip(a, b)]


def _cyc_scale(c: int, a):
    return [c * x for x in a]


def _galois(a: int, vec, p: int, n: int):
    return list(galois_act(a, CycloElt(vec, p, n, None, _canonical=True)).coeffs)


# ----------------------------------------------------------- L-polynomials

@dataclass
class LPolynomial:
    """Numerator coefficients of L(u), u = q^-s, with an optional denominator."""

    p: int
    n: int
    q: int
    coeffs: list  # list of integer vectors (canonical power basis of zeta_{p^n})
    denominator: list | None = None
    mode: str = "full"
    epsilon: CycloElt | None = None
    predicted_degree: int | None = None

    @property
    def degree(self) -> int:
        d = len(self.coeffs) - 1
        while d > 0 and not any(self.coeffs[d]):
            d -= 1
        return d

    def coefficient(self, k: int) -> CycloElt:
        vec = self.coeffs[k] if k < len(self.coeffs) else _zero(self.p, self.n)
        return CycloElt(vec, self.p, self.n, None, _canonical=True)

    def _eval_vectors(self, vecs, u_num: int, u_den: int) -> CycloElt:
        # sum c_k (u_num/u_den)^k as an exact element with p-power denominator
        total = CycloElt.from_int(0, self.p, self.n)
        for k, vec in enumerate(vecs):
            if any(vec):
                term = CycloElt(vec, self.p, self.n, None, _canonical=True)
                total = total + term * CycloElt.from_fraction(Fraction(u_num, u_den) ** k, self.p, self.n)
        return total

    def value_at_one(self, precision: int | None = None) -> CycloElt:
        """L at s = 1, i.e. u = 1/q."""
        num = self._eval_vectors(self.coeffs, 1, self.q)
        if self.denominator is None:
            return num
        den = self._eval_vectors(self.denominator, 1, self.q)
        if precision is not None:
            den = den.with_abs_precision(precision + 2 * den.shift + 10)
        return num * den.inverse()

    def as_cyclo(self) -> list[CycloElt]:
        return [self.coefficient(k) for k in range(len(self.coeffs))]


# ------------------------------------------------------------- point data

@dataclass
class OrbitData:
    k: int
    sizes: np.ndarray      # orbit sizes (= degree of the place)
    charpolys: np.ndarray  # (count, k+1) F_q codes of N(t - x)
    traces: np.ndarray     # a_x^(k) per orbit representative
    trace_inf: int         # a_infinity^(k)


def _charpolys(B: BigField, E: Embedding, reps: np.ndarray, q: int, k: int) -> np.ndarray:
    Q1 = B.Q - 1
    conj = []
    cur = reps.copy()
    for _ in range(k):
        conj.append(cur)
        cur = np.where(cur < 0, -1, (cur * q) % Q1)
    coeffs = [np.zeros_like(reps)]  # log of 1 = 0; coefficient list low to high
    for x in conj:
        negx = B.neg(x)
        new = [B.mul(negx, coeffs[0])]
        for j in range(1, len(coeffs)):
            new.append(B.add(coeffs[j - 1], B.mul(negx, coeffs[j])))
        new.append(coeffs[-1])
        coeffs = new
    small = np.stack([E.small(c) for c in coeffs], axis=1)
    if np.any(small < 0):
        raise ArithmeticError("norm polynomial not defined over F_q")
    return small


def weil_power_sums(lam: int, qv: int, kmax: int) -> list[int]:
    """s_j = alpha^j + beta^j for x^2 - lam x + qv, j = 0..kmax."""
    s = [2, lam]
    for _ in range(2, kmax + 1):
        s.append(lam * s[-1] - qv * s[-2])
    return s[: kmax + 1]


class LFunctionEngine:
    """Caches point data and class groupings for one curve (or for K alone)."""

    def __init__(self, curve: CurveData | None, q: int, p: int, precision: int = 30,
                 max_field: int = 20000):
        self.curve = curve
        self.q, self.p = q, p
        self.F = get_field(q)
        self.R = PolyRing(self.F)
        self.precision = precision
        self.max_field = max_field
        self._orbits: dict[int, OrbitData] = {}
        self._grouped: dict = {}
        self._lpolys: dict = {}
        if curve is not None and curve.is_constant:
            self.constant_trace = curve.fibre_trace(infinity(q))
        else:
            self.constant_trace = None

    # ------------------------------------------------------------ orbits
    def orbit_data(self, k: int) -> OrbitData:
        if k in self._orbits:
            return self._orbits[k]
        p, r = self.F.p, self.F.r
        B = get_big_field(p, r * k)
        E = Embedding(self.F, B)
        reps, sizes = B.frobenius_orbits(self.q)
        polys = _charpolys(B, E, reps, self.q, k)
        if self.curve is None:
            traces = np.ones(len(reps), dtype=np.int64)
            t_inf = 1
        elif self.constant_trace is not None:
            s = weil_power_sums(self.constant_trace, self.q, k)[k]
            traces = np.full(len(reps), s, dtype=np.int64)
            t_inf = s
        else:
            A = [evaluate_poly_big(B, E, P, reps) for P in self.curve.short]
            traces = -character_sum_cubic(B, A[0], A[1], A[2])
            t_inf = self.curve.fibre_trace(infinity(self.q), k)
        od = OrbitData(k, sizes, polys, traces, int(t_inf))
        self._orbits[k] = od
        return od

    def grouped(self, G: RayLevelGroup, k: int) -> np.ndarray:
        """A_k[g]: sum of deg * a_x over orbits outside Supp(D) with class g."""
        key = (id(G), G.D, G.n, k)
        if key in self._grouped:
            return self._grouped[key]
        od = self.orbit_data(k)
        cls = G.batch_classes(od.charpolys, np.full(len(od.sizes), k))
        ok = cls[:, 0] >= 0
        idx = G.flat_index(cls[ok])
        A = np.zeros(G.order, dtype=np.int64)
        np.add.at(A, idx, (od.sizes * od.traces)[ok])
        inf_cls = G.reduce([k] + [0] * (G.rank - 1))
        A[int(G.flat_index(np.array(inf_cls)))] += od.trace_inf
        self._grouped[key] = A
        return A

    # ------------------------------------------------------- place data
    def place_data(self, v: Place) -> PlaceData:
        return classify_reduction(self.curve, v, self.precision)

    def bad_place_data(self) -> list[PlaceData]:
        if self.curve is None:
            return []
        return [self.place_data(v) for v in self.curve.bad_places()]

    def _place_trace(self, v: Place, j: int) -> int:
        """a_v^(j) over the degree-j extension of the residue field at v."""
        if self.curve is None:
            return 1
        if self.constant_trace is not None:
            return weil_power_sums(self.constant_trace, self.q, v.degree * j)[v.degree * j]
        pd = self.place_data(v)
        if pd.is_good:
            return weil_power_sums(pd.lam, v.qv, j)[j]
        return pd.lam ** j

    # ---------------------------------------------------- degree formula
    def predicted_degree(self, omega: RayCharacter) -> int | None:
        """Degree of L(A, omega, u); None when it is a rational function."""
        cond = conductor_of(omega)
        dD = divisor_degree(cond)
        if self.curve is None:
            return None if dD == 0 else dD - 2
        if self.constant_trace is not None:
            return None if dD == 0 else 2 * (dD - 2)
        supp = {v for v, _ in cond}
        total = 0
        for pd in self.bad_place_data():
            if pd.place not in supp:
                total += pd.conductor_exponent * pd.place.degree
        return total + 2 * dD - 4

    # ------------------------------------------------------ power sums
    def power_sum(self, omega: RayCharacter, k: int) -> list[int]:
        G = omega.group
        p, n = G.p, G.n
        P = p ** n
        A = self.grouped(G, k)
        exps = _class_exponents(G, omega.exps)
        full = np.zeros(P, dtype=object)
        nz = np.nonzero(A)[0]
        acc = np.zeros(P, dtype=np.int64)
        np.add.at(acc, exps[nz], A[nz])
        full = [int(x) for x in acc]
        cond = {v for v, _ in conductor_of(omega)}
        for v, _ in G.D:
            if v in cond or k % v.degree:
                continue
            j = k // v.degree
            e = (j * omega.exponent(G.class_of_place(v))) % P
            full[e] += v.degree * self._place_trace(v, j)
        return reduce_full(full, p, n)

    def euler_coefficients(self, omega: RayCharacter, B: int) -> list[list[int]]:
        """Coefficients c_0..c_B of the Euler product via Newton's identities."""
        p, n = omega.p, omega.n
        S = [None] + [self.power_sum(omega, k) for k in range(1, B + 1)]
        c = [[1] + [0] * (phi_pm(p, n) - 1)]
        for k in range(1, B + 1):
            acc = _zero(p, n)
            for i in range(1, k + 1):
                acc = _cyc_add(acc, _cyc_mul(S[i], c[k - i], p, n))
            if any(x % k for x in acc):
                raise ArithmeticError("Newton identity not integral")
            c.append([x // k for x in acc])
        return c

    # -------------------------------------------------------- L-polynomial
    def affordable(self, k: int) -> bool:
        return self.q ** k <= self.max_field

    def l_polynomial(self, omega: RayCharacter, B: int | None = None, mode: str = "auto") -> LPolynomial:
        key = (omega.group.D, omega.group.n, omega.exps, B, mode)
        if key in self._lpolys:
            return self._lpolys[key]
        lp = self._l_polynomial(omega, B, mode)
        self._lpolys[key] = lp
        return lp

    def _l_polynomial(self, omega, B, mode) -> LPolynomial:
        p, n, q = omega.p, omega.n, self.q
        R = self.predicted_degree(omega)
        if R is None:
            return self._rational_case(omega)
        if R < 0:
            raise DegreeMismatch(f"predicted degree {R} is negative")
        if mode == "auto":
            if B is not None:
                mode = "full" if B >= R + 2 else "fe"
            else:
                mode = "full" if self.affordable(R + 2) else "fe"
        if mode == "full":
            Bf = max(B or 0, R + 2)
            c = self.euler_coefficients(omega, Bf)
            for k in range(R + 1, Bf + 1):
                if any(c[k]):
                    raise DegreeMismatch(f"coefficient {k} beyond predicted degree {R} is nonzero")
            if not any(c[R]):
                raise DegreeMismatch(f"leading coefficient of predicted degree {R} vanishes")
            lp = LPolynomial(p, n, q, c[: R + 1], mode="full", predicted_degree=R)
            return lp
        # functional-equation completion
        Bfe = max(B or 0, (R + 2) // 2 + 1)
        Bfe = min(Bfe, R)
        while True:
            c = self.euler_coefficients(omega, Bfe)
            try:
                coeffs, eps = _complete_by_fe(c, R, q, p, n)
                break
            except _Ambiguous:
                if Bfe >= R:
                    raise DegreeMismatch("functional equation sign undetermined")
                Bfe += 1
        return LPolynomial(p, n, q, coeffs, mode="fe", epsilon=eps, predicted_degree=R)

    def _rational_case(self, omega: RayCharacter) -> LPolynomial:
        """D_omega = 0: constant curve or K itself; returns numerator/denominator."""
        p, n, q = omega.p, omega.n, self.q
        G = omega.group
        zeta = CycloElt.zeta_power(omega.exponent(G.class_of_place(infinity(q))), p, n)
        zc = list(zeta.coeffs)
        z2 = list((zeta * zeta).coeffs)
        one = [1] + [0] * (len(zc) - 1)
        if self.curve is None:
            # (1 - zeta u)(1 - q zeta u)
            den = [one, _cyc_scale(-(1 + q), zc), _cyc_scale(q, z2)]
            return LPolynomial(p, n, q, [one], denominator=den, mode="closed")
        if self.constant_trace is None:
            raise DegreeMismatch("non-constant curve has polynomial L-function")
        a = self.constant_trace
        # (1 - a zeta u + q zeta^2 u^2)(1 - a q zeta u + q^3 zeta^2 u^2)
        f1 = [one, _cyc_scale(-a, zc), _cyc_scale(q, z2)]
        f2 = [one, _cyc_scale(-a * q, zc), _cyc_scale(q ** 3, z2)]
        den = [_zero(p, n) for _ in range(5)]
        for i, x in enumerate(f1):
            for j, y in enumerate(f2):
                den[i + j] = _cyc_add(den[i + j], _cyc_mul(x, y, p, n))
        return LPolynomial(p, n, q, [one], denominator=den, mode="closed")

    def l_value_at_one(self, omega: RayCharacter) -> CycloElt:
        lp = self.l_polynomial(omega)
        return lp.value_at_one(self.precision)

    # ------------------------------------------------------- Gauss sums
    def gauss_sum(self, omega: RayCharacter, scale: int = 1) -> "GaussSum":
        return gauss_sum(omega, scale)

    # ----------------------------------------------- classical L-functions
    def euler_series_unramified(self, omega: RayCharacter, B: int) -> list[list[int]]:
        """Euler product to u^B for an unramified omega, via place counts by degree."""
        p, n, q = omega.p, omega.n, self.q
        G = omega.group
        zexp = omega.exponent(G.class_of_place(infinity(q)))
        S = [None]
        for k in range(1, B + 1):
            count = sum(d * necklace_count(q, d) for d in range(1, k + 1) if k % d == 0) + 1
            s = 1 if self.curve is None else weil_power_sums(self.constant_trace, q, k)[k]
            full = [0] * p ** n
            full[(k * zexp) % p ** n] = s * count
            S.append(reduce_full(full, p, n))
        c = [[1] + [0] * (phi_pm(p, n) - 1)]
        for k in range(1, B + 1):
            acc = _zero(p, n)
            for i in range(1, k + 1):
                acc = _cyc_add(acc, _cyc_mul(S[i], c[k - i], p, n))
            c.append([x // k for x in acc])
        return c


class _Ambiguous(Exception):
    pass


def _class_exponents(G: RayLevelGroup, exps) -> np.ndarray:
    els = _all_elements_cached(G)
    return (els @ np.asarray(exps, dtype=np.int64)) % G.exponent


_ELS: dict = {}


def _all_elements_cached(G: RayLevelGroup) -> np.ndarray:
    key = (G.q, G.D, G.p, G.n)
    if key not in _ELS:
        _ELS[key] = G.all_elements().astype(np.int64)
    return _ELS[key]


def _complete_by_fe(c, R: int, q: int, p: int, n: int):
    """Fill c_{R-k} = eps q^(R-2k) conj(c_k) from known c_0..c_B."""
    B = len(c) - 1
    conj = lambda v: _galois(-1, v, p, n)
    overlap = [j for j in range(max(R - B, 0), min(B, R) + 1)]
    P = p ** n
    candidates = []
    for sign in (1, -1):
        for i in range(P):
            full = [0] * P
            full[i] = sign
            candidates.append(reduce_full(full, p, n))
    usable = [j for j in overlap if any(c[R - j])]
    if not usable:
        raise _Ambiguous()
    found = None
    for eps in candidates:
        ok = True
        for j in overlap:
            lhs = _cyc_scale(q ** R, c[j])
            rhs = _cyc_scale(q ** (2 * j), _cyc_mul(eps, conj(c[R - j]), p, n))
            if lhs != rhs:
                ok = False
                break
        if ok:
            found = eps
            break
    if found is None:
        found = _solve_epsilon(c, R, q, p, n, usable[0], overlap)
    coeffs = [None] * (R + 1)
    for k in range(0, R + 1):
        if k <= B:
            coeffs[k] = list(c[k])
        else:
            kk = R - k
            e = R - 2 * kk
            val = _cyc_mul(found, conj(c[kk]), p, n)
            if e >= 0:
                coeffs[k] = _cyc_scale(q ** e, val)
            else:
                if any(x % q ** (-e) for x in val):
                    raise DegreeMismatch("completed coefficient not integral")
                coeffs[k] = [x // q ** (-e) for x in val]
    return coeffs, CycloElt(found, p, n, None, _canonical=True)


def _solve_epsilon(c, R, q, p, n, j, overlap):
    """Exact division in Q(zeta) when the sign is not a root of unity."""
    import sympy

    X = sympy.symbols("X")
    cyc = sum(X ** (i * p ** (n - 1)) for i in range(p))
    conj = lambda v: _galois(-1, v, p, n)
    num = sum(sympy.Integer(a) * X ** i for i, a in enumerate(c[j])) * sympy.Rational(q) ** (R - 2 * j)
    den = sum(sympy.Integer(a) * X ** i for i, a in enumerate(conj(c[R - j])))
    eps = sympy.rem(sympy.expand(num * sympy.invert(den, cyc, X)), cyc, X)
    poly = sympy.Poly(eps, X)
    vec = [poly.coeff_monomial(X ** i) for i in range(phi_pm(p, n))]
    if any(not x.is_integer for x in vec):
        raise DegreeMismatch("functional equation sign is not integral")
    vec = [int(x) for x in vec]
    for jj in overlap:
        lhs = _cyc_scale(q ** R, c[jj])
        rhs = _cyc_scale(q ** (2 * jj), _cyc_mul(vec, conj(c[R - jj]), p, n))
        if lhs != rhs:
            raise DegreeMismatch("known coefficients violate the functional equation")
    return vec


# --------------------------------------------------------------- Gauss sums

@dataclass
class GaussSum:
    value: CycloElt
    conductor: tuple
    local_factors: dict


def gauss_sum(omega: RayCharacter, scale: int = 1) -> GaussSum:
    """tau_omega = prod_v tau_{omega,v} for the additive character psi(Tr Res(x dt)).

    ``scale`` replaces the additive character by x -> psi(scale * x) with
    scale in F_q^*; the product is independent of this choice.
    """
    G = omega.group
    p, n = G.p, G.n
    P = p ** n
    F = G.F
    R = G.R
    cond = conductor_of(omega)
    factors = {}
    # infinity: b_inf = scale * pi_inf^(-2)
    e_inf = (2 * omega.exponent(G.class_of_place(infinity(G.q)))) % P
    total = CycloElt.zeta_power(e_inf, p, n)
    factors["inf"] = total
    psi_step = P // p
    for v, k in cond:
        m = k * v.degree
        full = [0] * P
        q = G.q
        for code in range(q ** m):
            x = R.trim([(code // q ** i) % q for i in range(m)])
            if not x or not R.mod(x, v.poly):
                continue
            # omega(b_v^-1 x) with b_v = scale * P^k
            y = R.scale(int(F.inv(scale)), x)
            e = omega.exponent(G.local_element_class(v, -k, y))
            lead = x[m - 1] if len(x) >= m else 0
            tr = int(F.trace_tab[int(F.mul(scale, int(F.mul(int(F.inv(scale)), lead))))]) if lead else 0
            full[(e + tr * psi_step) % P] += 1
        tau_v = CycloElt.from_full(full, p, n)
        factors[v.label()] = tau_v
        total = total * tau_v
    return GaussSum(total, cond, factors)


# ---------------------------------------- classical functional equation

@dataclass
class FEReport:
    passed: bool
    degree: int
    tau: CycloElt
    first_mismatch: int | None
    details: str = ""


def classical_l_polynomial(engine: LFunctionEngine, omega: RayCharacter, B: int | None = None) -> LPolynomial:
    if engine.curve is not None:
        raise ValueError("classical L-functions use an engine without a curve")
    return engine.l_polynomial(omega, B, mode="full")


def check_classical_fe(omega: RayCharacter, B: int | None = None,
                       engine: LFunctionEngine | None = None) -> FEReport:
    """L_K(omega^-1, u) = tau_omega q^-1 u^R L_K(omega, 1/(qu)) as polynomials."""
    G = omega.group
    eng = engine or LFunctionEngine(None, G.q, G.p)
    cond = conductor_of(omega)
    if not cond:
        raise ValueError("the classical check needs a ramified character")
    R = divisor_degree(cond) - 2
    L1 = eng.l_polynomial(omega, B, mode="full")
    L2 = eng.l_polynomial(omega.inverse(), B, mode="full")
    if L1.degree != R or L2.degree != R:
        return FEReport(False, L1.degree, gauss_sum(omega).value, 0, "degree differs from deg D - 2")
    tau = gauss_sum(omega).value
    p, n, q = G.p, G.n, G.q
    tv = list(tau.coeffs)
    for j in range(R + 1):
        lhs = _cyc_scale(q ** (1 + R - j), L2.coeffs[j])
        rhs = _cyc_mul(tv, L1.coeffs[R - j], p, n)
        if lhs != rhs:
            return FEReport(False, R, tau, j)
    return FEReport(True, R, tau, None)


# ------------------------------------------------------ base-change products

def base_change_product(engine: LFunctionEngine, characters: Sequence[RayCharacter]) -> LPolynomial:
    """prod over the given characters of L(A, omega chi, u), with a degree check."""
    if not characters:
        raise ValueError("empty character family")
    p, n, q = characters[0].p, characters[0].n, engine.q
    prod = [[1] + [0] * (phi_pm(p, n) - 1)]
    expected = 0
    for chi in characters:
        lp = engine.l_polynomial(chi)
        if lp.denominator is not None:
            raise ConductorMismatch("rational factor in a base-change product")
        expected += lp.predicted_degree
        new = [_zero(p, n) for _ in range(len(prod) + len(lp.coeffs) - 1)]
        for i, a in enumerate(prod):
            for j, b in enumerate(lp.coeffs):
                new[i + j] = _cyc_add(new[i + j], _cyc_mul(a, b, p, n))
        prod = new
    out = LPolynomial(p, n, q, prod, mode="product", predicted_degree=expected)
    if out.degree != expected:
        raise ConductorMismatch(f"product degree {out.degree} != {expected}")
    return out


# --------------------------------------------------------- convenience API

def l_polynomial(curve: CurveData, omega: RayCharacter, B: int | None = None) -> LPolynomial:
    return LFunctionEngine(curve, curve.q, omega.p).l_polynomial(omega, B)


def l_value_at_one(curve: CurveData, omega: RayCharacter, precision: int = 30) -> CycloElt:
    return LFunctionEngine(curve, curve.q, omega.p, precision).l_value_at_one(omega)
