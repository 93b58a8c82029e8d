"""Places of F_q(t), finite-field and polynomial arithmetic, elliptic curve
reduction data, vectorised point counting, Tate periods and CRT."""

from __future__ import annotations

import itertools
import random
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
import sympy

from .padic import PadicNum, hensel_unit_root


class BadReduction(ValueError):
    pass


class NotImplementedMinimalization(ValueError):
    pass


class SupersingularInTower(ValueError):
    pass


class PrecisionTooLow(ValueError):
    pass


# ------------------------------------------------------------ small fields

def _prime_power(q: int) -> tuple[int, int]:
    fac = sympy.factorint(q)
    if len(fac) != 1:
        raise ValueError(f"{q} is not a prime power")
    (p, r), = fac.items()
    return int(p), int(r)


def _fp_poly_mulmod(a, b, mod, p):
    """Multiply two F_p polynomials (lists, low to high) modulo a monic mod."""
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    D = len(mod) - 1
    for i in range(len(out) - 1, D - 1, -1):
        c = out[i]
        if c:
            for j in range(D + 1):
                out[i - D + j] = (out[i - D + j] - c * mod[j]) % p
    return (out + [0] * D)[:D]


def _fp_is_irreducible(f: list[int], p: int) -> bool:
    P = sympy.Poly(list(reversed(f)), sympy.Symbol("X"), modulus=p)
    return P.is_irreducible


def _fp_primitive_poly(p: int, D: int) -> list[int]:
    """Deterministic primitive monic polynomial of degree D over F_p (low to high)."""
    Q = p ** D
    primes = list(sympy.factorint(Q - 1))
    for tail in itertools.product(range(p), repeat=D):
        f = list(tail) + [1]
        if f[0] == 0 or not _fp_is_irreducible(f, p):
            continue
        ok = True
        for ell in primes:
            # X^((Q-1)/ell) != 1
            e = (Q - 1) // ell
            res, base = [1] + [0] * (D - 1), [0, 1] + [0] * (D - 2) if D > 1 else [0]
            if D == 1:
                base = [(-f[0]) % p]
            while e:
                if e & 1:
                    res = _fp_poly_mulmod(res, base, f, p)
                base = _fp_poly_mulmod(base, base, f, p)
                e >>= 1
            if res == [1] + [0] * (D - 1):
                ok = False
                break
        if ok:
            return f
    raise RuntimeError("no primitive polynomial found")


class FiniteField:
    """F_q with elements coded 0..q-1 (base-p digits of a polynomial basis)."""

    def __init__(self, q: int):
        p, r = _prime_power(q)
        self.p, self.r, self.q = p, r, q
        if r == 1:
            a = np.arange(q)
            self.add_tab = (a[:, None] + a[None, :]) % q
            self.mul_tab = (a[:, None] * a[None, :]) % q
            self.modulus = None
        else:
            self.modulus = _fp_primitive_poly(p, r)
            digits = np.array([[(c // p ** i) % p for i in range(r)] for c in range(q)])
            weights = p ** np.arange(r)
            s = (digits[:, None, :] + digits[None, :, :]) % p
            self.add_tab = (s * weights).sum(-1)
            mul = np.zeros((q, q), dtype=np.int64)
            for a_ in range(q):
                for b_ in range(q):
                    prod = _fp_poly_mulmod(list(digits[a_]), list(digits[b_]), self.modulus, p)
                    mul[a_, b_] = sum(c * p ** i for i, c in enumerate(prod))
            self.mul_tab = mul
        self.add_tab = self.add_tab.astype(np.int64)
        self.mul_tab = self.mul_tab.astype(np.int64)
        self.neg_tab = np.array([int(np.nonzero(self.add_tab[a_] == 0)[0][0]) for a_ in range(q)])
        self.inv_tab = np.zeros(q, dtype=np.int64)
        for a_ in range(1, q):
            self.inv_tab[a_] = int(np.nonzero(self.mul_tab[a_] == 1)[0][0])
        self.sub_tab = self.add_tab[:, self.neg_tab]
        # digit 0 of an element is its "constant" coordinate; trace to F_p below
        self.trace_tab = np.array([self._trace(a_) for a_ in range(q)])

    def _trace(self, a: int) -> int:
        """Absolute trace F_q -> F_p."""
        total, x = 0, a
        for _ in range(self.r):
            total = self.add(total, x)
            x = self.power(x, self.p)
        return total  # lies in F_p, coded as 0..p-1

    def add(self, a, b):
        return self.add_tab[a, b]

    def sub(self, a, b):
        return self.sub_tab[a, b]

    def mul(self, a, b):
        return self.mul_tab[a, b]

    def neg(self, a):
        return self.neg_tab[a]

    def inv(self, a):
        if np.any(np.asarray(a) == 0):
            raise ZeroDivisionError("inverse of 0 in F_q")
        return self.inv_tab[a]

    def from_int(self, n: int) -> int:
        return int(n) % self.p

    def power(self, a: int, e: int) -> int:
        out = 1
        a = int(a)
        if e < 0:
            a, e = int(self.inv_tab[a]), -e
        while e:
            if e & 1:
                out = int(self.mul_tab[out, a])
            a = int(self.mul_tab[a, a])
            e >>= 1
        return out

    def is_square(self, a: int) -> bool:
        return a == 0 or self.power(a, (self.q - 1) // 2) == 1

    def elements(self) -> range:
        return range(self.q)

    def __repr__(self):
        return f"F_{self.q}"


@lru_cache(maxsize=None)
def get_field(q: int) -> FiniteField:
    return FiniteField(q)


# -------------------------------------------------------- F_q[t] polynomials

Poly = tuple  # coefficients low -> high, no trailing zeros


class PolyRing:
    """Polynomial arithmetic over a small finite field."""

    def __init__(self, F: FiniteField):
        self.F = F

    @staticmethod
    def trim(a: Sequence[int]) -> Poly:
        a = list(int(x) for x in a)
        while a and a[-1] == 0:
            a.pop()
        return tuple(a)

    def from_ints(self, coeffs: Iterable[int]) -> Poly:
        """Integer coefficients (low to high), reduced into the prime field."""
        return self.trim([self.F.from_int(c) if self.F.r == 1 else int(c) for c in coeffs])

    @staticmethod
    def deg(a: Poly) -> int:
        return len(a) - 1

    def add(self, a: Poly, b: Poly) -> Poly:
        n = max(len(a), len(b))
        a = list(a) + [0] * (n - len(a))
        b = list(b) + [0] * (n - len(b))
        return self.trim([self.F.add(x, y) for x, y in zip(a, b)])

    def neg(self, a: Poly) -> Poly:
        return tuple(int(self.F.neg(x)) for x in a)

    def sub(self, a: Poly, b: Poly) -> Poly:
        return self.add(a, self.neg(b))

    def scale(self, c: int, a: Poly) -> Poly:
        return self.trim([self.F.mul(c, x) for x in a])

    def mul(self, a: Poly, b: Poly) -> Poly:
        if not a or not b:
            return ()
        out = [0] * (len(a) + len(b) - 1)
        F = self.F
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        out[i + j] = int(F.add(out[i + j], F.mul(x, y)))
        return self.trim(out)

    def pow(self, a: Poly, e: int) -> Poly:
        out: Poly = (1,)
        while e:
            if e & 1:
                out = self.mul(out, a)
            a = self.mul(a, a)
            e >>= 1
        return out

    def divmod(self, a: Poly, b: Poly) -> tuple[Poly, Poly]:
        if not b:
            raise ZeroDivisionError("polynomial division by zero")
        F = self.F
        a = list(a)
        db = len(b) - 1
        inv_lead = int(F.inv(b[-1]))
        quot = [0] * max(len(a) - db, 0)
        for i in range(len(a) - 1, db - 1, -1):
            c = a[i]
            if c:
                c = int(F.mul(c, inv_lead))
                quot[i - db] = c
                for j in range(db + 1):
                    a[i - db + j] = int(F.sub(a[i - db + j], F.mul(c, b[j])))
        return self.trim(quot), self.trim(a[:db] if db > 0 else [])

    def mod(self, a: Poly, b: Poly) -> Poly:
        return self.divmod(a, b)[1]

    def monic(self, a: Poly) -> Poly:
        if not a:
            return a
        return self.scale(int(self.F.inv(a[-1])), a)

    def gcd(self, a: Poly, b: Poly) -> Poly:
        while b:
            a, b = b, self.mod(a, b)
        return self.monic(a)

    def xgcd(self, a: Poly, b: Poly) -> tuple[Poly, Poly, Poly]:
        """(g, s, t) with s*a + t*b = g monic."""
        r0, r1 = a, b
        s0, s1 = (1,), ()
        t0, t1 = (), (1,)
        while r1:
            qt, r = self.divmod(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, self.sub(s0, self.mul(qt, s1))
            t0, t1 = t1, self.sub(t0, self.mul(qt, t1))
        c = int(self.F.inv(r0[-1]))
        return self.scale(c, r0), self.scale(c, s0), self.scale(c, t0)

    def inverse_mod(self, a: Poly, m: Poly) -> Poly:
        g, s, _ = self.xgcd(self.mod(a, m), m)
        if g != (1,):
            raise ZeroDivisionError("not invertible modulo m")
        return self.mod(s, m)

    def powmod(self, a: Poly, e: int, m: Poly) -> Poly:
        out: Poly = (1,)
        a = self.mod(a, m)
        while e:
            if e & 1:
                out = self.mod(self.mul(out, a), m)
            a = self.mod(self.mul(a, a), m)
            e >>= 1
        return self.mod(out, m)

    def eval(self, a: Poly, x: int) -> int:
        acc = 0
        for c in reversed(a):
            acc = int(self.F.add(self.F.mul(acc, x), c))
        return acc

    def derivative(self, a: Poly) -> Poly:
        return self.trim([self.F.mul(self.F.from_int(i), c) for i, c in enumerate(a)][1:])

    def is_irreducible(self, f: Poly) -> bool:
        """Rabin's test."""
        n = self.deg(f)
        if n <= 0:
            return False
        if n == 1:
            return True
        q = self.F.q
        x = (0, 1)
        for ell in sympy.primefactors(n):
            h = self.sub(self.powmod(x, q ** (n // ell), f), x)
            if self.gcd(f, h) != (1,):
                return False
        return self.mod(self.sub(self.powmod(x, q ** n, f), x), f) == ()

    def ord_at(self, a: Poly, P: Poly) -> int:
        if not a:
            raise ValueError("order of the zero polynomial")
        k = 0
        while True:
            qt, r = self.divmod(a, P)
            if r:
                return k
            a, k = qt, k + 1

    def factor_monic_irreducibles(self, f: Poly) -> list[tuple[Poly, int]]:
        """Monic irreducible factors with multiplicities."""
        f = self.monic(f)
        out: dict[Poly, int] = {}
        rng = random.Random(12345)
        q = self.F.q
        x = (0, 1)

        def split(g: Poly, d: int) -> list[Poly]:
            if self.deg(g) == d:
                return [g]
            while True:
                a = self.trim([rng.randrange(q) for _ in range(self.deg(g))])
                if self.deg(a) < 1:
                    continue
                h = self.sub(self.powmod(a, (q ** d - 1) // 2, g), (1,))
                c = self.gcd(g, h)
                if 0 < self.deg(c) < self.deg(g):
                    return split(c, d) + split(self.divmod(g, c)[0], d)

        rest = f
        while self.deg(rest) > 0:
            sq = self.gcd(rest, self.derivative(rest))
            squarefree = self.divmod(rest, sq)[0] if self.deg(sq) > 0 else rest
            if self.deg(squarefree) == 0:
                # rest is a p-th power; not expected for the discriminants we meet
                raise ValueError("inseparable polynomial")
            g, d = squarefree, 1
            found: list[Poly] = []
            while self.deg(g) > 0:
                h = self.sub(self.powmod(x, q ** d, g), x)
                c = self.gcd(g, h)
                if self.deg(c) > 0:
                    found.extend(split(c, d))
                    g = self.divmod(g, c)[0]
                d += 1
            for P in found:
                e = self.ord_at(rest, P)
                out[P] = out.get(P, 0) + e
                rest = self.divmod(rest, self.pow(P, e))[0]
            rest = self.monic(rest)
        return sorted(out.items(), key=lambda kv: (len(kv[0]), kv[0]))


# ------------------------------------------------------------------- places

@dataclass(frozen=True, order=True)
class Place:
    """A place of F_q(t): a monic irreducible polynomial, or infinity (poly=None)."""

    q: int
    poly: tuple | None

    @property
    def is_infinite(self) -> bool:
        return self.poly is None

    @property
    def degree(self) -> int:
        return 1 if self.poly is None else len(self.poly) - 1

    @property
    def qv(self) -> int:
        return self.q ** self.degree

    def label(self) -> str:
        if self.poly is None:
            return "inf"
        terms = []
        for i in range(len(self.poly) - 1, -1, -1):
            c = self.poly[i]
            if c == 0:
                continue
            mon = "" if i == 0 else ("t" if i == 1 else f"t^{i}")
            coef = "" if (c == 1 and i > 0) else str(c)
            terms.append(coef + ("*" if coef and mon else "") + mon)
        return "+".join(terms)

    def __str__(self):
        return self.label()


def infinity(q: int) -> Place:
    return Place(q, None)


def place(q: int, coeffs: Sequence[int]) -> Place:
    """Finite place from a monic irreducible coefficient list (low to high)."""
    R = PolyRing(get_field(q))
    f = R.trim(coeffs)
    if not f or f[-1] != 1:
        raise ValueError("place polynomial must be monic")
    if not R.is_irreducible(f):
        raise ValueError(f"{f} is not irreducible over F_{q}")
    return Place(q, f)


def parse_place(q: int, text: str) -> Place:
    """Parse 'inf', a coefficient list '2,1,1' (low to high) or a label such as 't^2+t+2'."""
    text = text.strip().replace(" ", "")
    if text in ("inf", "oo", "infinity"):
        return infinity(q)
    if "t" not in text:
        return place(q, [int(x) for x in text.split(",")])
    coeffs: dict[int, int] = {}
    for term in re.findall(r"[+-]?[^+-]+", text):
        sign = -1 if term.startswith("-") else 1
        term = term.lstrip("+-")
        if "t" in term:
            c, _, power = term.partition("t")
            c = c.rstrip("*")
            k = int(power[1:]) if power.startswith("^") else 1
            val = int(c) if c else 1
        else:
            k, val = 0, int(term)
        coeffs[k] = coeffs.get(k, 0) + sign * val
    top = max(coeffs)
    return place(q, [coeffs.get(i, 0) % q for i in range(top + 1)])


def enumerate_places(q: int, max_degree: int, strict: bool = False) -> list[Place]:
    """All finite places of degree <= max_degree, then infinity."""
    if max_degree < 1:
        if strict:
            raise ValueError("max_degree must be at least 1")
        return []
    R = PolyRing(get_field(q))
    out = []
    for d in range(1, max_degree + 1):
        for tail in itertools.product(range(q), repeat=d):
            f = tuple(reversed(tail)) + (1,)
            if R.is_irreducible(f):
                out.append(Place(q, f))
    out.append(infinity(q))
    return out


def necklace_count(q: int, d: int) -> int:
    """Number of monic irreducible polynomials of degree d over F_q."""
    return sum(sympy.mobius(d // e) * q ** e for e in sympy.divisors(d)) // d


def crt_approximate(q: int, congruences: Sequence[tuple[Place, int, Sequence[int]]]) -> Poly:
    """Minimal-degree f with f = target_v mod v^e for each (v, e, target)."""
    R = PolyRing(get_field(q))
    f: Poly = ()
    M: Poly = (1,)
    if not congruences:
        return (1,)
    for v, e, target in congruences:
        if v.is_infinite:
            raise ValueError("CRT over finite places only")
        Mv = R.pow(v.poly, e)
        t = R.mod(R.trim(target), Mv)
        # f_new = f + M * ((t - f) * M^{-1} mod Mv)
        k = R.mod(R.mul(R.sub(t, f), R.inverse_mod(M, Mv)), Mv)
        f = R.add(f, R.mul(M, k))
        M = R.mul(M, Mv)
    return R.mod(f, M) if R.deg(M) > 0 else f


# -------------------------------------------------------------- big fields

class BigField:
    """F_Q, Q = p^D, in logarithmic form with Zech logarithms.

    Elements of arrays are discrete logs in [0, Q-2]; ZERO (= -1) is zero.
    """

    ZERO = -1

    def __init__(self, p: int, D: int):
        self.p, self.D = p, D
        self.Q = p ** D
        Q = self.Q
        f = _fp_primitive_poly(p, D)
        self.modpoly = f
        exp = np.zeros(Q - 1, dtype=np.int64)
        cur = [1] + [0] * (D - 1)
        weights = [p ** i for i in range(D)]
        for i in range(Q - 1):
            exp[i] = sum(c * w for c, w in zip(cur, weights))
            # multiply by X
            top = cur[-1]
            cur = [0] + cur[:-1]
            if top:
                cur = [(c - top * f[j]) % p for j, c in enumerate(cur)]
        self.exp = exp
        log = np.full(Q, -1, dtype=np.int64)
        log[exp] = np.arange(Q - 1)
        self.log = log
        plus1 = exp - (exp % p) + ((exp % p) + 1) % p
        self.zech = log[plus1]
        self.half = (Q - 1) // 2

    # vectorised log-form arithmetic
    def mul(self, a, b):
        a, b = np.asarray(a), np.asarray(b)
        out = (a + b) % (self.Q - 1)
        return np.where((a < 0) | (b < 0), -1, out)

    def add(self, a, b):
        a, b = np.broadcast_arrays(np.asarray(a), np.asarray(b))
        d = (b - a) % (self.Q - 1)
        z = self.zech[d]
        s = np.where(z < 0, -1, (a + z) % (self.Q - 1))
        s = np.where(a < 0, b, s)
        s = np.where(b < 0, a, s)
        return s

    def neg(self, a):
        a = np.asarray(a)
        return np.where(a < 0, -1, (a + self.half) % (self.Q - 1))

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def power(self, a, e: int):
        a = np.asarray(a)
        return np.where(a < 0, -1 if e > 0 else 0, (a * e) % (self.Q - 1))

    def quad_char(self, a):
        a = np.asarray(a)
        return np.where(a < 0, 0, 1 - 2 * (a % 2))

    def from_prime_int(self, c: int) -> int:
        return int(self.log[c % self.p])

    def all_elements(self) -> np.ndarray:
        return np.arange(-1, self.Q - 1, dtype=np.int64)

    def frobenius_orbits(self, q: int) -> tuple[np.ndarray, np.ndarray]:
        """Representatives (log form) of x -> x^q orbits and their sizes."""
        Q1 = self.Q - 1
        k = round(np.log(self.Q) / np.log(q))
        logs = np.arange(Q1, dtype=np.int64)
        conj = [logs]
        cur = logs
        for _ in range(k - 1):
            cur = (cur * q) % Q1
            conj.append(cur)
        stack = np.stack(conj)
        reps_mask = stack.min(axis=0) == logs
        reps = logs[reps_mask]
        sizes = np.array([len(set(col)) for col in stack[:, reps_mask].T], dtype=np.int64)
        return np.concatenate([[-1], reps]), np.concatenate([[1], sizes])


@lru_cache(maxsize=16)
def get_big_field(p: int, D: int) -> BigField:
    return BigField(p, D)


class Embedding:
    """F_q inside F_{q^k}: maps small-field codes to logs and back."""

    def __init__(self, F: FiniteField, B: BigField):
        self.F, self.B = F, B
        if F.r == 1:
            self.to_big = np.array([B.from_prime_int(c) for c in range(F.q)])
        else:
            # root of the defining polynomial of F_q inside F_Q
            g = F.modulus
            cand = B.all_elements()
            val = np.full(cand.shape, B.from_prime_int(g[-1]))
            for c in reversed(g[:-1]):
                val = B.add(B.mul(val, cand), B.from_prime_int(c))
            rho = int(cand[val == -1][0])
            to_big = []
            for code in range(F.q):
                acc = -1
                for i in reversed(range(F.r)):
                    acc = int(B.add(B.mul(acc, rho), B.from_prime_int((code // F.p ** i) % F.p)))
                to_big.append(acc)
            self.to_big = np.array(to_big)
        self.from_big = {int(l): c for c, l in enumerate(self.to_big)}
        lut = np.full(B.Q, -1, dtype=np.int64)
        for c, l in enumerate(self.to_big):
            lut[int(l) + 1] = c
        self._lut = lut

    def small(self, logs: np.ndarray) -> np.ndarray:
        """Map subfield elements (log form) to F_q codes; -1 if not in F_q."""
        return self._lut[np.asarray(logs) + 1]


# -------------------------------------------------------------- curves

def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


@dataclass
class CurveData:
    """Weierstrass curve over F_q(t) with coefficients in F_q[t]."""

    q: int
    a: tuple  # (a1, a2, a3, a4, a6) as Poly
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        self.F = get_field(self.q)
        self.R = PolyRing(self.F)
        self.p = self.F.p
        if self.p == 2:
            raise ValueError("p = 2 is not supported")
        self.a = tuple(self.R.trim(x) for x in self.a)
        self._short_model()
        self._invariants()
        self._place_cache: dict = {}

    @classmethod
    def from_int_lists(cls, q: int, coeffs: Sequence[Sequence[int]], overrides=None):
        R = PolyRing(get_field(q))
        return cls(q, tuple(R.from_ints(c) for c in coeffs), overrides or {})

    def _short_model(self):
        R, F = self.R, self.F
        a1, a2, a3, a4, a6 = self.a
        c = lambda n: (F.from_int(n),)
        b2 = R.add(R.mul(a1, a1), R.mul(c(4), a2))
        b4 = R.add(R.mul(c(2), a4), R.mul(a1, a3))
        b6 = R.add(R.mul(a3, a3), R.mul(c(4), a6))
        b8 = R.sub(R.add(R.add(R.mul(R.mul(a1, a1), a6), R.mul(R.mul(c(4), a2), a6)),
                         R.mul(a2, R.mul(a3, a3))),
                   R.add(R.mul(R.mul(a1, a3), a4), R.mul(a4, a4)))
        self.b = (b2, b4, b6, b8)
        inv2, inv4 = int(F.inv(F.from_int(2))), int(F.inv(F.from_int(4)))
        # y^2 = x^3 + A2 x^2 + A4 x + A6
        self.short = (R.scale(inv4, b2), R.scale(inv2, b4), R.scale(inv4, b6))
        A2, A4, A6 = self.short
        self.weight_m = max([0] + [_ceil_div(R.deg(A), w) for A, w in ((A2, 2), (A4, 4), (A6, 6)) if A])

    def _invariants(self):
        R, F = self.R, self.F
        b2, b4, b6, b8 = self.b
        c = lambda n: (F.from_int(n),)
        self.c4 = R.sub(R.mul(b2, b2), R.mul(c(24), b4))
        self.c6 = R.add(R.sub(R.mul(c(36), R.mul(b2, b4)), R.mul(b2, R.mul(b2, b2))),
                        R.neg(R.mul(c(216), b6)))
        disc = R.add(R.add(R.neg(R.mul(R.mul(b2, b2), b8)), R.neg(R.mul(c(8), R.pow(b4, 3)))),
                     R.add(R.neg(R.mul(c(27), R.mul(b6, b6))), R.mul(c(9), R.mul(b2, R.mul(b4, b6)))))
        if not disc:
            raise ValueError("singular curve")
        self.disc = disc

    # ---------------------------------------------------------------- basics
    @property
    def is_constant(self) -> bool:
        return all(self.R.deg(A) <= 0 for A in self.short)

    @property
    def deg_disc(self) -> int:
        """Degree of the global minimal discriminant divisor (model assumed minimal)."""
        return 12 * self.weight_m

    def ord_inf(self, poly: Poly, weight: int) -> int:
        return weight * self.weight_m - self.R.deg(poly)

    def infinity_short(self) -> tuple[int, int, int]:
        """Fibre at infinity: coefficients of y^2 = x^3 + A x^2 + B x + C over F_q."""
        out = []
        for A, w in zip(self.short, (2, 4, 6)):
            k = w * self.weight_m
            out.append(int(A[k]) if len(A) > k else 0)
        return tuple(out)

    def bad_places(self) -> list[Place]:
        """Support of the discriminant (finite) plus infinity if bad there."""
        out = [Place(self.q, P) for P, _ in self.R.factor_monic_irreducibles(self.disc)]
        if self.ord_inf(self.disc, 12) > 0:
            out.append(infinity(self.q))
        return out

    def ords(self, v: Place) -> tuple[int, int, int]:
        """(ord c4, ord c6, ord disc) at v; large sentinel for zero polynomials."""
        def o(poly, w):
            if not poly:
                return 10 ** 6
            if v.is_infinite:
                return self.ord_inf(poly, w)
            return self.R.ord_at(poly, v.poly)
        return o(self.c4, 4), o(self.c6, 6), o(self.disc, 12)

    def j_invariant_ord(self, v: Place) -> int:
        o4, _, od = self.ords(v)
        return 3 * o4 - od

    # ----------------------------------------------------------- counting
    def fibre_coeffs_at(self, v: Place) -> tuple[BigField, Embedding, tuple]:
        """Residue field of v as a BigField and the fibre coefficients (log form)."""
        d = v.degree
        B = get_big_field(self.p, self.F.r * d)
        E = Embedding(self.F, B)
        if v.is_infinite:
            coeffs = tuple(int(E.to_big[c]) for c in self.infinity_short())
            return B, E, coeffs
        # a root of P_v in F_{q^d}
        xs = B.all_elements()
        val = evaluate_poly_big(B, E, v.poly, xs)
        root = int(xs[val == -1][0])
        coeffs = tuple(int(evaluate_poly_big(B, E, A, np.array([root]))[0]) for A in self.short)
        return B, E, coeffs

    def fibre_trace(self, v: Place, k: int = 1) -> int:
        """q_v^k + 1 - #(projective points of the reduced fibre over F_{q_v^k})."""
        d = v.degree
        B = get_big_field(self.p, self.F.r * d * k)
        E = Embedding(self.F, B)
        if v.is_infinite:
            A = tuple(int(E.to_big[c]) for c in self.infinity_short())
        else:
            xs = B.all_elements()
            val = evaluate_poly_big(B, E, v.poly, xs)
            root = int(xs[val == -1][0])
            A = tuple(int(evaluate_poly_big(B, E, P, np.array([root]))[0]) for P in self.short)
        return int(-character_sum_cubic(B, np.array([A[0]]), np.array([A[1]]), np.array([A[2]]))[0])


def evaluate_poly_big(B: BigField, E: Embedding, poly: Poly, xs: np.ndarray) -> np.ndarray:
    """Evaluate an F_q[t] polynomial at F_Q points given in log form."""
    acc = np.full(np.shape(xs), -1, dtype=np.int64)
    for c in reversed(poly):
        acc = B.add(B.mul(acc, xs), int(E.to_big[c]))
    return acc


def character_sum_cubic(B: BigField, A: np.ndarray, Bc: np.ndarray, C: np.ndarray,
                        chunk_elems: int = 4_000_000) -> np.ndarray:
    """For each row (A, B, C) return sum over X in F_Q of chi(X^3 + A X^2 + B X + C)."""
    X = B.all_elements()
    X2 = B.power(X, 2)
    X3 = B.power(X, 3)
    n = len(A)
    out = np.zeros(n, dtype=np.int64)
    rows = max(1, chunk_elems // len(X))
    for s in range(0, n, rows):
        a = np.asarray(A[s:s + rows])[:, None]
        b = np.asarray(Bc[s:s + rows])[:, None]
        c = np.asarray(C[s:s + rows])[:, None]
        val = B.add(B.add(X3[None, :], B.mul(a, X2[None, :])), B.add(B.mul(b, X[None, :]), c))
        out[s:s + rows] = B.quad_char(val).sum(axis=1)
    return out


# -------------------------------------------------------- reduction data

@dataclass
class PlaceData:
    place: Place
    reduction: str  # good-ordinary, good-supersingular, split-mult, nonsplit-mult, additive
    lam: int
    alpha: PadicNum | None
    m: int | None
    ord_disc: int
    conductor_exponent: int

    @property
    def is_good(self) -> bool:
        return self.reduction.startswith("good")

    @property
    def is_multiplicative(self) -> bool:
        return self.reduction.endswith("mult")

    @property
    def is_ordinary(self) -> bool:
        return self.reduction in ("good-ordinary", "split-mult", "nonsplit-mult")


def point_count(curve: CurveData, v: Place) -> int:
    """Trace of Frobenius lambda_v at a good place by exhaustive counting."""
    _, _, od = curve.ords(v)
    if od > 0:
        raise BadReduction(f"{v} is a bad place")
    return curve.fibre_trace(v)


def node_is_split(curve: CurveData, v: Place) -> bool:
    """Tangent-slope test: the node's tangents are rational iff 3X0 + A2 is a square."""
    B, E, (A, Bc, C) = curve.fibre_coeffs_at(v)
    xs = B.all_elements()
    g = B.add(B.add(B.power(xs, 3), B.mul(A, B.power(xs, 2))), B.add(B.mul(Bc, xs), C))
    dg = B.add(B.add(B.mul(B.from_prime_int(3), B.power(xs, 2)), B.mul(B.mul(B.from_prime_int(2), A), xs)), Bc)
    node = xs[(g == -1) & (dg == -1)]
    if len(node) != 1:
        raise ValueError("fibre does not have a unique node")
    X0 = int(node[0])
    slope2 = B.add(B.mul(B.from_prime_int(3), X0), A)
    return bool(B.quad_char(slope2) >= 0) and int(slope2) != -1


def classify_reduction(curve: CurveData, v: Place, N: int = 20) -> PlaceData:
    """Reduction type, lambda_v, alpha_v and Tamagawa number at v."""
    key = (v, N)
    if key in curve._place_cache:
        return curve._place_cache[key]
    o4, o6, od = curve.ords(v)
    ov = curve.overrides.get(v.label(), {})
    p = curve.p
    if od >= 12 and o4 >= 4 and o6 >= 6 and "reduction" not in ov:
        raise NotImplementedMinimalization(f"model is not minimal at {v}")
    if od == 0:
        lam = curve.fibre_trace(v)
        if lam % p == 0:
            data = PlaceData(v, "good-supersingular", lam, None, 1, 0, 0)
        else:
            data = PlaceData(v, "good-ordinary", lam, hensel_unit_root(lam, v.qv, p, N), 1, 0, 0)
    elif o4 == 0:
        lam = curve.fibre_trace(v)
        if lam == 1:
            data = PlaceData(v, "split-mult", 1, PadicNum(1, p, N), od, od, 1)
        elif lam == -1:
            data = PlaceData(v, "nonsplit-mult", -1, PadicNum(-1, p, N), 2 if od % 2 == 0 else 1, od, 1)
        else:
            raise ValueError(f"multiplicative fibre at {v} has trace {lam}")
    else:
        m = ov.get("m")
        cond = 2 if p >= 5 else ov.get("conductor")
        if cond is None:
            raise NotImplementedMinimalization(
                f"additive place {v} at p=3 needs a conductor override")
        data = PlaceData(v, "additive", 0, None, m, od, int(cond))
    if "reduction" in ov and ov["reduction"] != data.reduction:
        raise ValueError(f"override {ov['reduction']} disagrees with computed {data.reduction} at {v}")
    if "m" in ov:
        data.m = int(ov["m"])
    curve._place_cache[key] = data
    return data


# -------------------------------------------------------------- Tate periods

@lru_cache(maxsize=None)
def _j_series(terms: int) -> tuple[int, ...]:
    """Coefficients c_{-1}, c_0, c_1, ... of j(Q) = 1/Q + 744 + ..."""
    n = terms + 2
    sigma3 = [0] + [sum(d ** 3 for d in sympy.divisors(k)) for k in range(1, n + 1)]
    E4 = [1] + [240 * sigma3[k] for k in range(1, n + 1)]
    # prod (1 - Q^k)^24
    prod = [1] + [0] * n
    for k in range(1, n + 1):
        for _ in range(24):
            for i in range(n, k - 1, -1):
                prod[i] -= prod[i - k]
    E4c = _series_mul(_series_mul(E4, E4, n), E4, n)
    inv = _series_inv(prod, n)
    jQ = _series_mul(E4c, inv, n)  # = Q * j(Q)
    return tuple(jQ[: terms + 1])


def _series_mul(a, b, n):
    out = [0] * (n + 1)
    for i, x in enumerate(a[: n + 1]):
        if x:
            for j, y in enumerate(b[: n + 1 - i]):
                out[i + j] += x * y
    return out


def _series_inv(a, n):
    assert a[0] in (1, -1)
    out = [0] * (n + 1)
    out[0] = a[0]
    for k in range(1, n + 1):
        s = sum(a[i] * out[k - i] for i in range(1, k + 1) if i < len(a))
        out[k] = -s * a[0]
    return out


@lru_cache(maxsize=None)
def tate_reversion(terms: int) -> tuple[int, ...]:
    """Integer coefficients r_1, r_2, ... with Q = sum r_i J^i where J = 1/j."""
    jQ = list(_j_series(terms))  # Q*j = 1 + 744 Q + ...
    h = _series_inv(jQ, terms)  # J = Q * h(Q)
    # revert J = Q h(Q): Q = J * g(J) by fixed point Q = J / h(Q)
    n = terms
    Qser = [0, 1] + [0] * (n - 1)
    hinv = _series_inv(h, n)
    for _ in range(n + 1):
        # compose hinv(Q(J)) then multiply by J
        comp = [0] * (n + 1)
        powQ = [1] + [0] * n
        for c in hinv:
            if c:
                comp = [x + c * y for x, y in zip(comp, powQ)]
            powQ = _series_mul(powQ, Qser, n)
        Qser = [0] + comp[:n]
    return tuple(Qser[1:])


def tate_parameter(curve: CurveData, v: Place, prec_terms: int) -> tuple[int, Poly]:
    """Tate period at a finite multiplicative place.

    Returns (k, u) with Q_v = P_v^k * u and u the unit part modulo P_v^prec_terms.
    """
    if v.is_infinite:
        raise ValueError("Tate periods are computed at finite places only")
    R = curve.R
    o4, _, od = curve.ords(v)
    k = od - 3 * o4
    if k <= 0:
        raise ValueError(f"{v} has integral j-invariant")
    if prec_terms < 1:
        raise PrecisionTooLow("need at least one digit of the unit part")
    total = k + prec_terms
    M = R.pow(v.poly, total)
    c4_3 = R.pow(curve.c4, 3)
    J = R.mod(R.mul(curve.disc, R.inverse_mod(c4_3, M)), M)
    nterms = total // k + 1
    rev = tate_reversion(nterms)
    F = curve.F
    Qv: Poly = ()
    Jpow: Poly = (1,)
    for i in range(1, nterms + 1):
        Jpow = R.mod(R.mul(Jpow, J), M)
        c = F.from_int(rev[i - 1])
        if c:
            Qv = R.add(Qv, R.scale(c, Jpow))
    Qv = R.mod(Qv, M)
    unit, rem = R.divmod(Qv, R.pow(v.poly, k))
    if rem:
        raise ArithmeticError("Tate period has unexpected valuation")
    return k, R.mod(unit, R.pow(v.poly, prec_terms))


def laurent_digits(curve: CurveData, v: Place, k: int, unit: Poly, digits: int) -> list[int]:
    """Digits of P^k * unit in the local parameter T = t - c (degree-one places)."""
    if v.degree != 1:
        raise ValueError("Laurent digits are reported for degree-one places")
    F, R = curve.F, curve.R
    c = int(F.neg(v.poly[0]))
    # Taylor shift: unit(T + c)
    coeffs = list(unit) + [0] * digits
    out = []
    cur = R.trim(coeffs)
    for _ in range(digits):
        out.append(R.eval(cur, c))
        cur = R.divmod(R.sub(cur, (out[-1],)), v.poly)[0]
    return out
