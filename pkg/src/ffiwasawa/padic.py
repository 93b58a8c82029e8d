"""Exact arithmetic in Z/p^N and in cyclotomic rings Z[zeta_{p^m}] modulo p^N.

Elements of Q_p(zeta) are stored as ``p^(-shift) * sum c_i zeta^i`` with the
integer coefficient vector given in the power basis of length phi(p^m).  A
precision of ``None`` means the element is known exactly; otherwise the
numerator is known modulo p^N, i.e. the value is known modulo p^(N - shift).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, total_ordering
from math import comb, gcd, isqrt
from typing import Iterable, Sequence

import numpy as np


class PrecisionExhausted(ArithmeticError):
    """Raised when a quantity cannot be decided at the working precision."""


class NotOrdinary(ValueError):
    """The Frobenius polynomial has no unit root."""


class NotGaloisStable(ValueError):
    """A value that should lie in Q_p has nonzero irrational coordinates."""


def vp_int(x: int, p: int) -> int | None:
    """p-adic valuation of an integer; None for zero."""
    if x == 0:
        return None
    x = abs(x)
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def _min_opt(a: int | None, b: int | None) -> int | None:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


# ---------------------------------------------------------------- valuations

@total_ordering
@dataclass(frozen=True)
class Valuation:
    """An exact rational valuation or +infinity."""

    value: Fraction | None

    @classmethod
    def infinity(cls) -> "Valuation":
        return cls(None)

    @classmethod
    def of(cls, x) -> "Valuation":
        return cls(Fraction(x))

    @property
    def is_infinite(self) -> bool:
        return self.value is None

    @property
    def numerator(self) -> int | None:
        return None if self.value is None else self.value.numerator

    @property
    def denominator(self) -> int | None:
        return None if self.value is None else self.value.denominator

    def __add__(self, other):
        other = other if isinstance(other, Valuation) else Valuation.of(other)
        if self.is_infinite or other.is_infinite:
            return Valuation.infinity()
        return Valuation(self.value + other.value)

    __radd__ = __add__

    def __eq__(self, other):
        if not isinstance(other, Valuation):
            if other is None:
                return self.is_infinite
            other = Valuation.of(other)
        return self.value == other.value

    def __hash__(self):
        return hash(self.value)

    def __lt__(self, other):
        other = other if isinstance(other, Valuation) else Valuation.of(other)
        if self.is_infinite:
            return False
        if other.is_infinite:
            return True
        return self.value < other.value

    def __repr__(self):
        return "Valuation(inf)" if self.is_infinite else f"Valuation({self.value})"


# ------------------------------------------------------------------- Z/p^N

@dataclass(frozen=True)
class PadicNum:
    """An element of Z/p^N, with a flag for an exactly known zero."""

    residue: int
    prime: int
    precision: int
    exact_zero: bool = False

    def __post_init__(self):
        mod = self.prime ** self.precision
        object.__setattr__(self, "residue", self.residue % mod)

    @property
    def modulus(self) -> int:
        return self.prime ** self.precision

    def _coerce(self, other) -> "PadicNum":
        if isinstance(other, PadicNum):
            if other.prime != self.prime:
                raise ValueError("prime mismatch")
            return other
        return PadicNum(int(other), self.prime, self.precision, exact_zero=(other == 0))

    def _make(self, value: int, prec: int, exact_zero: bool = False) -> "PadicNum":
        return PadicNum(value, self.prime, prec, exact_zero)

    def __add__(self, other):
        o = self._coerce(other)
        prec = min(self.precision, o.precision)
        return self._make(self.residue + o.residue, prec, self.exact_zero and o.exact_zero)

    __radd__ = __add__

    def __neg__(self):
        return self._make(-self.residue, self.precision, self.exact_zero)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        if self.exact_zero or o.exact_zero:
            return self._make(0, min(self.precision, o.precision), True)
        prec = min(self.precision, o.precision)
        return self._make(self.residue * o.residue, prec)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        return self._make(pow(self.residue, k, self.modulus), self.precision,
                          self.exact_zero and k > 0)

    def inverse(self) -> "PadicNum":
        if self.residue % self.prime == 0:
            raise ZeroDivisionError("not a unit")
        return self._make(pow(self.residue, -1, self.modulus), self.precision)

    def valuation(self) -> Valuation:
        if self.exact_zero:
            return Valuation.infinity()
        if self.residue == 0:
            raise PrecisionExhausted("zero modulo p^%d" % self.precision)
        return Valuation.of(vp_int(self.residue, self.prime))

    def is_unit(self) -> bool:
        return self.residue % self.prime != 0

    def __eq__(self, other):
        if isinstance(other, PadicNum):
            prec = min(self.precision, other.precision)
            return (self.residue - other.residue) % self.prime ** prec == 0
        if isinstance(other, int):
            return (self.residue - other) % self.modulus == 0
        return NotImplemented

    def __hash__(self):
        return hash((self.residue, self.prime, self.precision))

    def __int__(self):
        return self.residue

    def signed(self) -> int:
        """Representative in (-p^N/2, p^N/2]."""
        r = self.residue
        return r - self.modulus if r > self.modulus // 2 else r

    def __repr__(self):
        return f"{self.residue} mod {self.prime}^{self.precision}"


def hensel_unit_root(lam: int, qv: int, p: int, N: int) -> PadicNum:
    """Unit root of x^2 - lam*x + qv in Z/p^N."""
    if qv % p != 0 or N < 1:
        raise ValueError("need p | qv and N >= 1")
    if lam % p == 0:
        raise NotOrdinary(f"trace {lam} is divisible by {p}")
    mod = p ** N
    alpha = lam % mod
    # alpha = lam - qv/alpha is a contraction: qv/alpha gains one p per step
    for _ in range(N + 1):
        alpha = (lam - qv * pow(alpha, -1, mod)) % mod
    assert (alpha * alpha - lam * alpha + qv) % mod == 0
    return PadicNum(alpha, p, N)


# --------------------------------------------------------- cyclotomic rings

def phi_pm(p: int, m: int) -> int:
    return 1 if m == 0 else (p - 1) * p ** (m - 1)


def reduce_full(vec: Sequence[int], p: int, m: int) -> list[int]:
    """Reduce an element of Z[x]/(x^(p^m) - 1) to the power basis modulo Phi_{p^m}."""
    if m == 0:
        return [sum(vec)]
    block = p ** (m - 1)
    last = vec[(p - 1) * block:]
    return [vec[j * block + r] - last[r] for j in range(p - 1) for r in range(block)]


def fold_poly(coeffs: Iterable[int], p: int, m: int) -> list[int]:
    """Fold an arbitrary integer polynomial into Z[x]/(x^(p^m) - 1)."""
    P = p ** m
    out = [0] * P
    for i, c in enumerate(coeffs):
        if c:
            out[i % P] += int(c)
    return out


def _convolve(a: Sequence[int], b: Sequence[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] += x * y
    return out


@lru_cache(maxsize=None)
def _binomial_matrix(n: int) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(comb(i, j) for j in range(n)) for i in range(n))


class CycloElt:
    """Element p^(-shift) * sum_i coeffs[i] zeta^i of Q_p(zeta_{p^m}).

    ``precision`` is the number of p-adic digits of the numerator that are
    known (``None`` for exact elements).
    """

    __slots__ = ("prime", "order", "coeffs", "precision", "shift")

    def __init__(self, coeffs: Sequence[int], prime: int, order: int,
                 precision: int | None = None, shift: int = 0, _canonical: bool = False):
        n = phi_pm(prime, order)
        c = [int(x) for x in coeffs]
        if not _canonical:
            if len(c) != n:
                c = reduce_full(fold_poly(c, prime, order), prime, order)
        if precision is not None:
            mod = prime ** precision
            c = [x % mod for x in c]
        self.prime = prime
        self.order = order
        self.coeffs = tuple(c)
        self.precision = precision
        self.shift = shift
        self._normalize_shift()

    def _normalize_shift(self):
        p = self.prime
        c = list(self.coeffs)
        s = self.shift
        prec = self.precision
        if s < 0:
            c = [x * p ** (-s) for x in c]
            prec = None if prec is None else prec - s
            s = 0
        while s > 0 and all(x % p == 0 for x in c) and (prec is None or prec > 0):
            c = [x // p for x in c]
            s -= 1
            if prec is not None:
                prec -= 1
        if prec is not None:
            mod = p ** prec
            c = [x % mod for x in c]
        self.coeffs = tuple(c)
        self.shift = s
        self.precision = prec

    # constructors --------------------------------------------------------
    @classmethod
    def from_int(cls, x: int, p: int, m: int, precision: int | None = None) -> "CycloElt":
        c = [0] * phi_pm(p, m)
        c[0] = int(x)
        return cls(c, p, m, precision, _canonical=True)

    @classmethod
    def from_fraction(cls, x, p: int, m: int, precision: int | None = None) -> "CycloElt":
        """Embed a rational number.  Denominators prime to p need finite precision."""
        x = Fraction(x)
        num, den = x.numerator, x.denominator
        s = vp_int(den, p) or 0
        den_rest = den // p ** s
        if den_rest == 1:
            out = cls.from_int(num, p, m, precision)
            return out.scale_pow_p(-s)
        if precision is None:
            raise PrecisionExhausted("rational with denominator prime to p needs a precision")
        mod = p ** precision
        out = cls.from_int(num * pow(den_rest, -1, mod), p, m, precision)
        return out.scale_pow_p(-s)

    @classmethod
    def zeta_power(cls, j: int, p: int, m: int, precision: int | None = None) -> "CycloElt":
        P = p ** m
        full = [0] * P
        full[j % P] = 1
        return cls(reduce_full(full, p, m), p, m, precision, _canonical=True)

    @classmethod
    def from_full(cls, full: Sequence[int], p: int, m: int, precision: int | None = None,
                  shift: int = 0) -> "CycloElt":
        return cls(reduce_full(list(full), p, m), p, m, precision, shift, _canonical=True)

    @classmethod
    def from_padic(cls, x: PadicNum, m: int) -> "CycloElt":
        return cls.from_int(x.residue, x.prime, m, x.precision)

    # basic properties ----------------------------------------------------
    @property
    def degree(self) -> int:
        return phi_pm(self.prime, self.order)

    @property
    def abs_precision(self) -> int | None:
        return None if self.precision is None else self.precision - self.shift

    def is_exact(self) -> bool:
        return self.precision is None

    def is_zero(self) -> bool:
        return all(x == 0 for x in self.coeffs)

    def is_rational(self) -> bool:
        return all(x == 0 for x in self.coeffs[1:])

    def lift_order(self, m: int) -> "CycloElt":
        """View in the larger field Q_p(zeta_{p^m}), m >= order."""
        if m == self.order:
            return self
        if m < self.order:
            raise ValueError("cannot lower the cyclotomic order")
        P, P0 = self.prime ** m, self.prime ** self.order
        full = [0] * P
        step = P // P0 if self.order > 0 else 0
        for i, c in enumerate(self.coeffs):
            full[(i * step) % P] += c
        return CycloElt.from_full(full, self.prime, m, self.precision, self.shift)

    def _align(self, other) -> tuple["CycloElt", "CycloElt"]:
        if not isinstance(other, CycloElt):
            if isinstance(other, PadicNum):
                other = CycloElt.from_padic(other, self.order)
            elif isinstance(other, Fraction):
                other = CycloElt.from_fraction(other, self.prime, self.order, self.precision)
            else:
                other = CycloElt.from_int(int(other), self.prime, self.order)
        if other.prime != self.prime:
            raise ValueError("prime mismatch")
        m = max(self.order, other.order)
        return self.lift_order(m), other.lift_order(m)

    # ring operations -----------------------------------------------------
    def __add__(self, other):
        a, b = self._align(other)
        p = a.prime
        s = max(a.shift, b.shift)
        fa, fb = p ** (s - a.shift), p ** (s - b.shift)
        prec = _min_opt(None if a.precision is None else a.precision + s - a.shift,
                        None if b.precision is None else b.precision + s - b.shift)
        c = [x * fa + y * fb for x, y in zip(a.coeffs, b.coeffs)]
        return CycloElt(c, p, a.order, prec, s, _canonical=True)

    __radd__ = __add__

    def __neg__(self):
        return CycloElt([-x for x in self.coeffs], self.prime, self.order,
                        self.precision, self.shift, _canonical=True)

    def __sub__(self, other):
        a, b = self._align(other)
        return a + (-b)

    def __rsub__(self, other):
        a, b = self._align(other)
        return b + (-a)

    def _num_vmin(self) -> int | None:
        """Lower bound on the valuation of the numerator (None if exact zero)."""
        vals = [vp_int(x, self.prime) for x in self.coeffs if x != 0]
        if not vals:
            return self.precision  # None when exact
        return min(vals)

    def __mul__(self, other):
        a, b = self._align(other)
        p, m = a.prime, a.order
        raw = _convolve(a.coeffs, b.coeffs)
        c = reduce_full(fold_poly(raw, p, m), p, m)
        va, vb = a._num_vmin(), b._num_vmin()
        prec = None
        if a.precision is not None:
            prec = a.precision + (vb if vb is not None else a.precision)
        if b.precision is not None:
            pb = b.precision + (va if va is not None else b.precision)
            prec = pb if prec is None else min(prec, pb)
        return CycloElt(c, p, m, prec, a.shift + b.shift, _canonical=True)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = CycloElt.from_int(1, self.prime, self.order)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def scale_pow_p(self, k: int) -> "CycloElt":
        """Multiply by p^k (k may be negative)."""
        return CycloElt(self.coeffs, self.prime, self.order, self.precision,
                        self.shift - k, _canonical=True)

    def with_precision(self, N: int | None) -> "CycloElt":
        """Truncate to numerator precision N (never increases precision)."""
        if N is None:
            return self
        prec = N if self.precision is None else min(N, self.precision)
        return CycloElt(self.coeffs, self.prime, self.order, prec, self.shift, _canonical=True)

    def with_abs_precision(self, N: int) -> "CycloElt":
        return self.with_precision(N + self.shift)

    def norm(self) -> "CycloElt":
        """Norm down to Q_p, returned as a rational CycloElt of the same order."""
        out = self
        P = self.prime ** self.order
        for a in range(2, P):
            if a % self.prime:
                out = out * galois_act(a, self)
        return out

    def inverse(self) -> "CycloElt":
        if self.is_zero() and self.is_exact():
            raise ZeroDivisionError("inverse of exact zero")
        P = self.prime ** self.order
        others = CycloElt.from_int(1, self.prime, self.order)
        for a in range(2, P):
            if a % self.prime:
                others = others * galois_act(a, self)
        nm = self * others
        if not nm.is_rational():
            raise NotGaloisStable("norm is not rational")
        n0 = nm.coeffs[0]
        if n0 == 0:
            raise PrecisionExhausted("norm vanishes at working precision")
        v = vp_int(n0, self.prime)
        unit = n0 // self.prime ** v
        if nm.precision is None and unit in (1, -1):
            inv = CycloElt.from_int(unit, self.prime, self.order)
            return (others * inv).scale_pow_p(nm.shift - v)
        prec = nm.precision
        if prec is None:
            raise PrecisionExhausted("exact inverse has denominator prime to p")
        rel = prec - v
        if rel <= 0:
            raise PrecisionExhausted("norm vanishes at working precision")
        inv = CycloElt.from_int(pow(unit, -1, self.prime ** rel), self.prime, self.order, rel)
        return (others * inv).scale_pow_p(nm.shift - v)

    def __truediv__(self, other):
        a, b = self._align(other)
        return a * b.inverse()

    def conj(self) -> "CycloElt":
        return galois_act(-1, self)

    def equals(self, other) -> bool:
        d = self - other
        return d.is_zero()

    def __eq__(self, other):
        if isinstance(other, (CycloElt, int, Fraction, PadicNum)):
            return self.equals(other)
        return NotImplemented

    def __hash__(self):
        return hash((self.coeffs, self.shift))

    def valuation(self) -> Valuation:
        return cyclo_valuation(self)

    def to_fraction(self) -> Fraction:
        """Exact rational value (requires a rational, exact element)."""
        if not self.is_rational():
            raise NotGaloisStable("element is not in Q_p")
        return Fraction(self.coeffs[0], self.prime ** self.shift)

    def reconstruct_rational(self) -> Fraction | None:
        """Smallest-height rational congruent to this Q_p element, if one is determined."""
        if not self.is_rational():
            raise NotGaloisStable("element is not in Q_p")
        if self.precision is None:
            return self.to_fraction()
        r = rational_reconstruction(self.coeffs[0], self.prime ** self.precision)
        return None if r is None else r / self.prime ** self.shift

    def rational_part(self) -> Fraction:
        """Rational value of a Q_p element: numerator residue over p^shift."""
        if not self.is_rational():
            raise NotGaloisStable("element is not in Q_p")
        c = self.coeffs[0]
        if self.precision is not None:
            mod = self.prime ** self.precision
            c %= mod
            if c > mod // 2:
                c -= mod
        return Fraction(c, self.prime ** self.shift)

    def full_vector(self) -> list[int]:
        """Coordinates in Z[x]/(x^(p^m)-1) (a lift of the canonical form)."""
        P = self.prime ** self.order
        out = [0] * P
        out[: len(self.coeffs)] = self.coeffs
        return out

    def __repr__(self):
        terms = []
        for i, c in enumerate(self.coeffs):
            if c:
                terms.append(f"{c}" if i == 0 else f"{c}*z^{i}")
        body = " + ".join(terms) or "0"
        den = f"/{self.prime}^{self.shift}" if self.shift else ""
        prec = "" if self.precision is None else f" (mod {self.prime}^{self.precision})"
        return f"({body}){den}{prec} [zeta_{self.prime}^{self.order}]"


def rational_reconstruction(a: int, m: int) -> Fraction | None:
    """r/s = a mod m with |r|, s <= sqrt(m/2) (extended Euclid); None if no such pair."""
    bound = isqrt(m // 2)
    r0, r1, s0, s1 = m, a % m, 0, 1
    while r1 > bound:
        k = r0 // r1
        r0, r1, s0, s1 = r1, r0 - k * r1, s1, s0 - k * s1
    if s1 == 0 or abs(s1) > bound or gcd(r1, s1) != 1:
        return None
    return Fraction(r1, s1)


def cyclo_normalize(raw_poly: Sequence[int], m: int, p: int, N: int | None) -> CycloElt:
    """Canonical representative of an integer polynomial in zeta modulo (Phi_{p^m}, p^N)."""
    return CycloElt(list(raw_poly) or [0], p, m, N)


def galois_act(a: int, x: CycloElt) -> CycloElt:
    """Apply zeta -> zeta^a."""
    p, m = x.prime, x.order
    if a % p == 0:
        raise ValueError("Galois exponent must be prime to p")
    if m == 0:
        return x
    P = p ** m
    full = [0] * P
    for i, c in enumerate(x.coeffs):
        if c:
            full[(i * a) % P] += c
    return CycloElt(reduce_full(full, p, m), p, m, x.precision, x.shift, _canonical=True)


def cyclo_valuation(x: CycloElt) -> Valuation:
    """p-adic valuation (normalized v(p)=1) of a cyclotomic element.

    The numerator is rewritten in powers of the uniformizer pi = zeta - 1;
    the terms b_j pi^j then have pairwise distinct valuations
    v_p(b_j) + j/phi, so the minimum is the valuation.
    """
    p, m = x.prime, x.order
    phi = phi_pm(p, m)
    if x.is_zero():
        if x.is_exact():
            return Valuation.infinity()
        raise PrecisionExhausted("element is zero at working precision")
    binom = _binomial_matrix(phi)
    best = None
    for j in range(phi):
        b = sum(x.coeffs[i] * binom[i][j] for i in range(j, phi))
        if x.precision is not None:
            b %= p ** x.precision
        if b:
            cand = Fraction(vp_int(b, p)) + Fraction(j, phi)
            if best is None or cand < best:
                best = cand
    if best is None or (x.precision is not None and best >= x.precision):
        raise PrecisionExhausted("valuation beyond working precision")
    return Valuation(best - x.shift)


def resultant_valuation(x: CycloElt) -> Valuation:
    """Valuation through v_p(Res(Phi_{p^m}, numerator)) / phi(p^m); exact elements only."""
    import sympy

    p, m = x.prime, x.order
    if x.is_zero():
        return Valuation.infinity()
    if m == 0:
        return Valuation.of(vp_int(x.coeffs[0], p) - x.shift)
    X = sympy.symbols("X")
    cyc = sum(X ** (j * p ** (m - 1)) for j in range(p))
    num = sum(int(c) * X ** i for i, c in enumerate(x.coeffs))
    res = int(sympy.resultant(cyc, num, X))
    if res == 0:
        return Valuation.infinity()
    return Valuation(Fraction(vp_int(res, p), phi_pm(p, m)) - x.shift)


# -------------------------------------------------- vectorised helpers

def full_to_canonical_array(arr: np.ndarray, p: int, m: int) -> np.ndarray:
    """Vectorised reduce_full along the last axis (object or int arrays)."""
    if m == 0:
        return arr.sum(axis=-1, keepdims=True)
    block = p ** (m - 1)
    last = arr[..., (p - 1) * block:]
    parts = [arr[..., j * block:(j + 1) * block] - last for j in range(p - 1)]
    return np.concatenate(parts, axis=-1)


def roll_full(vec: np.ndarray, shift: int) -> np.ndarray:
    """Multiply an element of Z[x]/(x^P - 1) by x^shift."""
    return np.roll(vec, shift, axis=-1)
