"""Finite-level group rings Z_p[G] for abelian p-groups G = prod Z/m_i, and
truncated power series over Z/p^N.

Group-ring elements carry an integer numerator array, a p-power denominator
exponent (``shift``) and an absolute p-adic precision (``None`` = exact).
Characters use the same convention as ray-class characters: an exponent
vector e with omega(g) = zeta_P^(e . g), P = exponent of G.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from math import comb
from typing import Mapping, Sequence

import numpy as np

from .padic import (CycloElt, NotGaloisStable, PadicNum, PrecisionExhausted, Valuation,
                    cyclo_valuation, full_to_canonical_array, galois_act, vp_int)


class NotSurjective(ValueError):
    pass


class NotPlain(ValueError):
    pass


class ZeroInput(ValueError):
    pass


class NotDivisible(ArithmeticError):
    pass


def _log_p(m: int, p: int) -> int:
    k = 0
    while m % p == 0 and m > 1:
        m //= p
        k += 1
    if m != 1:
        raise ValueError("group moduli must be powers of p")
    return k


def _vp_array_min(arr: np.ndarray, p: int) -> int | None:
    best = None
    for x in arr.flat:
        x = int(x)
        if x:
            v = vp_int(x, p)
            if best is None or v < best:
                best = v
    return best


def _object_array(shape, fill=0) -> np.ndarray:
    out = np.empty(shape, dtype=object)
    out.fill(fill)
    return out


# ------------------------------------------------------------ group rings

class GroupRingElt:
    """p^(-shift) * sum_g coeffs[g] [g] in Q_p[G], known modulo p^precision Z_p[G]."""

    __slots__ = ("p", "moduli", "coeffs", "shift", "precision")

    def __init__(self, p: int, moduli: Sequence[int], coeffs, shift: int = 0,
                 precision: int | None = None):
        self.p = p
        self.moduli = tuple(int(m) for m in moduli)
        arr = np.asarray(coeffs, dtype=object).reshape(self.moduli) if len(self.moduli) else np.asarray(coeffs, dtype=object).reshape(())
        self.coeffs = arr.copy()
        self.shift = int(shift)
        self.precision = precision
        self._normalize()

    def _normalize(self):
        p = self.p
        if self.shift < 0:
            self.coeffs = self.coeffs * p ** (-self.shift)
            self.shift = 0
        if self.precision is not None:
            mod = p ** max(self.precision + self.shift, 0)
            self.coeffs = np.vectorize(lambda x: int(x) % mod, otypes=[object])(self.coeffs) if mod > 1 else _object_array(self.coeffs.shape)
        while self.shift > 0 and all(int(x) % p == 0 for x in self.coeffs.flat):
            self.coeffs = np.vectorize(lambda x: int(x) // p, otypes=[object])(self.coeffs)
            self.shift -= 1

    # -------------------------------------------------------- structure
    @property
    def exponent(self) -> int:
        return max(self.moduli) if self.moduli else 1

    @property
    def order_log(self) -> int:
        return sum(_log_p(m, self.p) for m in self.moduli)

    @property
    def group_order(self) -> int:
        return int(np.prod(self.moduli)) if self.moduli else 1

    def elements(self) -> np.ndarray:
        return group_elements(self.moduli)

    # ------------------------------------------------------ constructors
    @classmethod
    def zero(cls, p, moduli, precision=None):
        return cls(p, moduli, _object_array(tuple(moduli)), 0, precision)

    @classmethod
    def scalar(cls, p, moduli, x, precision=None):
        arr = _object_array(tuple(moduli))
        x = Fraction(x) if not isinstance(x, PadicNum) else x
        if isinstance(x, PadicNum):
            arr[(0,) * len(moduli)] = x.residue
            prec = x.precision if precision is None else min(precision, x.precision)
            return cls(p, moduli, arr, 0, prec)
        s = vp_int(x.denominator, p) or 0
        rest = x.denominator // p ** s
        if rest != 1:
            if precision is None:
                raise PrecisionExhausted("scalar has a denominator prime to p")
            num = x.numerator * pow(rest, -1, p ** (precision + s))
        else:
            num = x.numerator
        arr[(0,) * len(moduli)] = num
        return cls(p, moduli, arr, s, precision)

    @classmethod
    def one(cls, p, moduli, precision=None):
        return cls.scalar(p, moduli, 1, precision)

    @classmethod
    def delta(cls, p, moduli, g, coeff: int = 1, precision=None):
        arr = _object_array(tuple(moduli))
        arr[tuple(int(x) % m for x, m in zip(g, moduli))] = coeff
        return cls(p, moduli, arr, 0, precision)

    # -------------------------------------------------------- arithmetic
    def _align(self, other: "GroupRingElt"):
        if other.moduli != self.moduli or other.p != self.p:
            raise ValueError("group rings differ")
        s = max(self.shift, other.shift)
        a = self.coeffs * self.p ** (s - self.shift)
        b = other.coeffs * self.p ** (s - other.shift)
        return a, b, s

    def _prec_min(self, other):
        if self.precision is None:
            return other.precision
        if other.precision is None:
            return self.precision
        return min(self.precision, other.precision)

    def _coerce(self, x):
        if isinstance(x, GroupRingElt):
            return x
        return GroupRingElt.scalar(self.p, self.moduli, x, self.precision)

    def __add__(self, other):
        other = self._coerce(other)
        a, b, s = self._align(other)
        return GroupRingElt(self.p, self.moduli, a + b, s, self._prec_min(other))

    __radd__ = __add__

    def __neg__(self):
        return GroupRingElt(self.p, self.moduli, -self.coeffs, self.shift, self.precision)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def valuation_min(self) -> int | None:
        """min_g v_p(coefficient), or None for zero."""
        v = _vp_array_min(self.coeffs, self.p)
        return None if v is None else v - self.shift

    def __mul__(self, other):
        if not isinstance(other, GroupRingElt):
            other = self._coerce(other)
        if other.moduli != self.moduli:
            raise ValueError("group rings differ")
        out = _convolve_group(self.coeffs, other.coeffs, self.moduli)
        prec = None
        va, vb = self.valuation_min(), other.valuation_min()
        if self.precision is not None and vb is not None:
            prec = self.precision + vb
        if other.precision is not None and va is not None:
            cand = other.precision + va
            prec = cand if prec is None else min(prec, cand)
        return GroupRingElt(self.p, self.moduli, out, self.shift + other.shift, prec)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = GroupRingElt.one(self.p, self.moduli, self.precision)
        for _ in range(k):
            out = out * self
        return out

    def with_precision(self, N: int | None) -> "GroupRingElt":
        if N is None:
            return self
        prec = N if self.precision is None else min(N, self.precision)
        return GroupRingElt(self.p, self.moduli, self.coeffs, self.shift, prec)

    def is_zero(self) -> bool:
        return all(int(x) == 0 for x in self.coeffs.flat)

    def equals(self, other) -> bool:
        return (self - self._coerce(other)).is_zero()

    def __eq__(self, other):
        if isinstance(other, (GroupRingElt, int, Fraction)):
            return self.equals(other)
        return NotImplemented

    def __hash__(self):
        return hash((self.moduli, self.shift))

    def coefficient(self, g) -> Fraction:
        x = int(self.coeffs[tuple(int(a) % m for a, m in zip(g, self.moduli))])
        if self.precision is not None:
            mod = self.p ** (self.precision + self.shift)
            if x > mod // 2:
                x -= mod
        return Fraction(x, self.p ** self.shift)

    def coefficient_dict(self) -> dict:
        return {tuple(int(a) for a in g): self.coefficient(g) for g in self.elements()}

    def augmentation(self) -> Fraction:
        total = sum(int(x) for x in self.coeffs.flat)
        if self.precision is not None:
            mod = self.p ** (self.precision + self.shift)
            total %= mod
            if total > mod // 2:
                total -= mod
        return Fraction(total, self.p ** self.shift)

    @property
    def aleph(self) -> int:
        """Denominator exponent: smallest a >= 0 with p^a f integral."""
        return max(self.shift, 0)

    def __repr__(self):
        nz = [(tuple(int(a) for a in g), self.coefficient(g)) for g in self.elements()
              if int(self.coeffs[tuple(g)])]
        body = ", ".join(f"{g}:{c}" for g, c in nz[:8]) + (" ..." if len(nz) > 8 else "")
        prec = "" if self.precision is None else f" mod p^{self.precision}"
        return f"GroupRingElt(p={self.p}, G={self.moduli}, {{{body}}}{prec})"

    # ------------------------------------------------------ serialization
    def to_json(self) -> dict:
        n = _log_p(self.exponent, self.p) if self.moduli else 0
        return {"header": {"p": self.p, "N": self.precision, "n": n, "d": len(self.moduli),
                           "aleph": self.aleph},
                "p": self.p, "moduli": list(self.moduli), "shift": self.shift,
                "precision": self.precision,
                "coeffs": [str(int(x)) for x in self.coeffs.flat]}

    @classmethod
    def from_json(cls, data: Mapping) -> "GroupRingElt":
        arr = np.array([int(x) for x in data["coeffs"]], dtype=object)
        return cls(data["p"], data["moduli"], arr.reshape(tuple(data["moduli"])),
                   data["shift"], data["precision"])


def group_elements(moduli: Sequence[int]) -> np.ndarray:
    if not moduli:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.meshgrid(*[np.arange(m) for m in moduli], indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1).astype(np.int64)


def _convolve_group(a: np.ndarray, b: np.ndarray, moduli) -> np.ndarray:
    out = _object_array(tuple(moduli))
    if not moduli:
        out[()] = int(a[()]) * int(b[()])
        return out
    for idx in zip(*np.nonzero(a != 0)):
        c = a[idx]
        out = out + c * np.roll(b, shift=tuple(int(i) for i in idx), axis=tuple(range(len(moduli))))
    return out


# ----------------------------------------------------------- characters

def characters(moduli: Sequence[int]) -> list[tuple[int, ...]]:
    """All exponent vectors e (entries multiples of P/m_i) for G = prod Z/m_i."""
    P = max(moduli) if moduli else 1
    ranges = [[a * (P // m) for a in range(m)] for m in moduli]
    return [tuple(e) for e in itertools.product(*ranges)]


def character_orbits(moduli: Sequence[int], p: int) -> list[tuple[tuple[int, ...], list[int]]]:
    """Galois orbit representatives e with the exponents a such that e*a is in the orbit."""
    P = max(moduli) if moduli else 1
    seen = set()
    out = []
    units = [a for a in range(1, P + 1) if a % p] if P > 1 else [1]
    for e in characters(moduli):
        if e in seen:
            continue
        members = {}
        for a in units:
            ea = tuple((a * x) % P for x in e)
            if ea not in members:
                members[ea] = a
        seen.update(members)
        out.append((e, sorted(members.values())))
    return out


def eval_character(f: GroupRingElt, exps: Sequence[int]) -> CycloElt:
    """omega(f) = sum_g f_g omega(g) in Q_p(zeta_P)."""
    P = f.exponent
    m = _log_p(P, f.p)
    els = f.elements()
    e = np.asarray(exps, dtype=np.int64)
    s = (els @ e) % P if len(e) else np.zeros(len(els), dtype=np.int64)
    full = [0] * P
    flat = f.coeffs.reshape(-1)
    for k, c in zip(s, flat):
        c = int(c)
        if c:
            full[int(k)] += c
    prec = None if f.precision is None else f.precision + f.shift
    return CycloElt.from_full(full, f.p, m, prec, f.shift)


def valuation_at_character(f: GroupRingElt, exps) -> Valuation:
    return cyclo_valuation(eval_character(f, exps))


def averaged_valuation(f: GroupRingElt, exps) -> Valuation:
    """(p^n - p^(n-1))^-1 sum over i in (Z/p^n)^* of v(omega^i(f)), n = order of omega."""
    P = f.exponent
    e = [int(x) % P for x in exps]
    from math import gcd
    g = P
    for x in e:
        g = gcd(g, x)
    order = P // g
    units = [i for i in range(1, order + 1) if i % f.p]
    total = Fraction(0)
    for i in units:
        v = valuation_at_character(f, [(i * x) % P for x in e])
        if v.is_infinite:
            return Valuation.infinity()
        total += v.value
    return Valuation(total / len(units))


def partial_valuation(f: GroupRingElt, exps) -> Valuation:
    """v_p of the norm of omega(f) down to Q_p, divided by the number of conjugates."""
    P = f.exponent
    from math import gcd
    g = P
    for x in exps:
        g = gcd(g, int(x) % P)
    order = P // g
    units = [i for i in range(1, order + 1) if i % f.p]
    prod = None
    for i in units:
        v = eval_character(f, [(i * int(x)) % P for x in exps])
        prod = v if prod is None else prod * v
    if not prod.is_rational():
        raise NotGaloisStable("norm of character value is not rational")
    v = cyclo_valuation(prod)
    if v.is_infinite:
        return v
    return Valuation(v.value / len(units))


# ------------------------------------------------------ Fourier inversion

def fourier_invert(values, moduli: Sequence[int], p: int, galois_fill: bool = True) -> GroupRingElt:
    """Group-ring element with prescribed character values.

    ``values`` is a mapping from exponent vectors to CycloElt, or a callable.
    With ``galois_fill`` a callable is evaluated once per Galois orbit and the
    rest of the orbit is filled in with galois_act.
    """
    moduli = tuple(int(m) for m in moduli)
    P = max(moduli) if moduli else 1
    m = _log_p(P, p)
    chars = characters(moduli)
    vals: dict = {}
    if callable(values):
        if galois_fill:
            for rep, units in character_orbits(moduli, p):
                v = values(rep)
                for a in units:
                    vals[tuple((a * x) % P for x in rep)] = v if a == 1 else galois_act(a, v)
        else:
            for e in chars:
                vals[e] = values(e)
    else:
        vals = {tuple(k): v for k, v in values.items()}
        missing = [e for e in chars if e not in vals]
        if missing:
            raise ValueError(f"missing character values, e.g. {missing[0]}")
        if galois_fill:
            for rep, units in character_orbits(moduli, p):
                for a in units[1:]:
                    ea = tuple((a * x) % P for x in rep)
                    if not vals[ea].equals(galois_act(a, vals[rep])):
                        raise NotGaloisStable(f"values at {rep} and {ea} are not Galois conjugate")
    vlist = [vals[e].lift_order(m) if vals[e].order < m else vals[e] for e in chars]
    shift = max(v.shift for v in vlist)
    abs_precs = [v.abs_precision for v in vlist if v.abs_precision is not None]
    abs_prec = min(abs_precs) if abs_precs else None
    els = group_elements(moduli)
    n_el = len(els)
    acc = _object_array((n_el, P))
    j = np.arange(P)
    for e, v in zip(chars, vlist):
        full = np.array(v.full_vector(), dtype=object) * p ** (shift - v.shift)
        s = (els @ np.asarray(e, dtype=np.int64)) % P if moduli else np.zeros(1, dtype=np.int64)
        idx = (j[None, :] + s[:, None]) % P
        acc = acc + full[idx]
    canon = full_to_canonical_array(acc, p, m)
    k = sum(_log_p(mm, p) for mm in moduli)
    num_prec = None if abs_prec is None else abs_prec + shift
    nonconst = canon[:, 1:]
    if num_prec is not None:
        mod = p ** num_prec
        bad = any(int(x) % mod for x in nonconst.flat)
    else:
        bad = any(int(x) for x in nonconst.flat)
    if bad:
        raise NotGaloisStable("inverted coefficients are not in Q_p")
    coeffs = canon[:, 0].reshape(moduli) if moduli else canon[:, 0].reshape(())
    out_prec = None if abs_prec is None else abs_prec - k
    if out_prec is not None and out_prec <= 0:
        raise PrecisionExhausted("precision exhausted by Fourier inversion")
    return GroupRingElt(p, moduli, coeffs, shift + k, out_prec)


def character_values(f: GroupRingElt) -> dict:
    return {e: eval_character(f, e) for e in characters(f.moduli)}


# ----------------------------------------------------- structural maps

def sharp_involution(f: GroupRingElt) -> GroupRingElt:
    """[g] -> [g^-1]."""
    arr = f.coeffs
    for ax, m in enumerate(f.moduli):
        arr = np.take(arr, (-np.arange(m)) % m, axis=ax)
    return GroupRingElt(f.p, f.moduli, arr, f.shift, f.precision)


def pushforward(f: GroupRingElt, A: np.ndarray, target_moduli: Sequence[int]) -> GroupRingElt:
    """Image under the group map g -> A g (mod target moduli)."""
    target_moduli = tuple(int(m) for m in target_moduli)
    A = np.asarray(A, dtype=np.int64).reshape(len(target_moduli), len(f.moduli))
    els = f.elements()
    img = (els @ A.T) % np.array(target_moduli, dtype=np.int64) if target_moduli else np.zeros((len(els), 0), dtype=np.int64)
    out = _object_array(target_moduli)
    for g, c in zip(img, f.coeffs.reshape(-1)):
        c = int(c)
        if c:
            out[tuple(g)] += c
    return GroupRingElt(f.p, target_moduli, out, f.shift, f.precision)


def fiber_sum(f: GroupRingElt, A: np.ndarray, source_moduli: Sequence[int], scale=1) -> GroupRingElt:
    """Transfer along a surjection B -> G given by A: [g] -> scale * sum_{A b = g} [b]."""
    source_moduli = tuple(int(m) for m in source_moduli)
    A = np.asarray(A, dtype=np.int64).reshape(len(f.moduli), len(source_moduli))
    els = group_elements(source_moduli)
    img = (els @ A.T) % np.array(f.moduli, dtype=np.int64) if f.moduli else np.zeros((len(els), 0), dtype=np.int64)
    flat = np.array([f.coeffs[tuple(g)] for g in img], dtype=object)
    out = GroupRingElt(f.p, source_moduli, flat.reshape(source_moduli), f.shift, f.precision)
    if scale != 1:
        out = out * GroupRingElt.scalar(f.p, source_moduli, scale, f.precision)
    return out


def _rank_mod_p(A: np.ndarray, p: int) -> int:
    M = [list(map(lambda x: int(x) % p, row)) for row in np.asarray(A)]
    rank = 0
    rows, cols = len(M), len(M[0]) if M else 0
    for c in range(cols):
        piv = next((r for r in range(rank, rows) if M[r][c] % p), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        inv = pow(M[rank][c], -1, p)
        M[rank] = [(x * inv) % p for x in M[rank]]
        for r in range(rows):
            if r != rank and M[r][c] % p:
                fac = M[r][c]
                M[r] = [(x - fac * y) % p for x, y in zip(M[r], M[rank])]
        rank += 1
    return rank


def specialize(f: GroupRingElt, A, n: int | None = None) -> GroupRingElt:
    """Pushforward to (Z/p^n)^e along an e x d integer matrix, surjective mod p."""
    A = np.atleast_2d(np.asarray(A, dtype=np.int64)) if np.size(A) else np.zeros((0, len(f.moduli)), dtype=np.int64)
    e = A.shape[0]
    if e and _rank_mod_p(A, f.p) < e:
        raise NotSurjective("specialization matrix is not surjective mod p")
    P = f.exponent if n is None else f.p ** n
    return pushforward(f, A, (P,) * e)


def augmentation_elt(f: GroupRingElt) -> Fraction:
    return f.augmentation()


def subgroup_elements(gens: np.ndarray, moduli: Sequence[int]) -> set:
    """Subgroup of prod Z/m_i spanned by the columns of gens."""
    gens = np.asarray(gens, dtype=np.int64).reshape(len(moduli), -1)
    mods = np.array(moduli, dtype=np.int64)
    span = {tuple([0] * len(moduli))}
    frontier = list(span)
    while frontier:
        new = []
        for x in frontier:
            for j in range(gens.shape[1]):
                y = tuple(int(v) for v in (np.array(x) + gens[:, j]) % mods)
                if y not in span:
                    span.add(y)
                    new.append(y)
        frontier = new
    return span


def restrict_to_subgroup(f: GroupRingElt, sub_gens, ambient_gens=None) -> GroupRingElt:
    """prod over characters chi of (ambient / sub) of f_chi, as an element of Z_p[G].

    With ``ambient_gens`` = None the ambient group is G; otherwise f must be
    supported on the ambient subgroup.  The result is supported on the
    subgroup and must be Galois stable.
    """
    moduli = f.moduli
    P = f.exponent
    sub = subgroup_elements(sub_gens, moduli)
    amb = subgroup_elements(ambient_gens, moduli) if ambient_gens is not None else None
    if amb is not None:
        for g in f.elements():
            if int(f.coeffs[tuple(g)]) and tuple(int(x) for x in g) not in amb:
                raise ValueError("element is not supported on the ambient subgroup")
    sub_arr = np.array(sorted(sub), dtype=np.int64)
    chars = characters(moduli)
    trivial_on_sub = [e for e in chars if not np.any((sub_arr @ np.array(e)) % P)]
    if amb is None:
        reps = trivial_on_sub
    else:
        amb_arr = np.array(sorted(amb), dtype=np.int64)
        classes = {}
        for e in trivial_on_sub:
            key = tuple(int(x) for x in (amb_arr @ np.array(e)) % P)
            classes.setdefault(key, e)
        reps = list(classes.values())

    def value(psi):
        out = None
        for chi in reps:
            v = eval_character(f, [(a + b) % P for a, b in zip(psi, chi)])
            out = v if out is None else out * v
        return out

    res = fourier_invert(value, moduli, f.p, galois_fill=False)
    for g in res.elements():
        if int(res.coeffs[tuple(g)]) and tuple(int(x) for x in g) not in sub:
            raise NotGaloisStable("restriction is not supported on the subgroup")
    return res


# --------------------------------------------------------------- invariants

def mu_invariant(f: GroupRingElt) -> int:
    v = f.valuation_min()
    if v is None:
        raise PrecisionExhausted("element vanishes at working precision")
    return v


# ---------------------------------------------------------- power series

class PowerSeriesRep:
    """Truncated power series over Z/p^N in d variables.

    ``coeffs`` has shape (M_1+1, ..., M_d+1); the ring is
    Z/p^N[[t_1..t_d]] / (t_i^(M_i+1)).  ``known`` optionally records, per
    monomial, the p-adic precision of that coefficient (for series coming
    from finite-level group rings).
    """

    def __init__(self, p: int, N: int, coeffs, known: np.ndarray | None = None):
        self.p, self.N = p, N
        arr = np.asarray(coeffs, dtype=object)
        mod = p ** N
        self.coeffs = np.vectorize(lambda x: int(x) % mod, otypes=[object])(arr) if arr.size else arr
        self.known = known

    @property
    def d(self) -> int:
        return self.coeffs.ndim

    @property
    def bounds(self) -> tuple[int, ...]:
        return tuple(s - 1 for s in self.coeffs.shape)

    @classmethod
    def from_dict(cls, p: int, N: int, bounds: Sequence[int], terms: Mapping) -> "PowerSeriesRep":
        arr = _object_array(tuple(b + 1 for b in bounds))
        for mono, c in terms.items():
            mono = (mono,) if isinstance(mono, int) else tuple(mono)
            if all(a <= b for a, b in zip(mono, bounds)):
                arr[mono] += int(c)
        return cls(p, N, arr)

    @classmethod
    def variable(cls, p, N, bounds, i):
        mono = [0] * len(bounds)
        mono[i] = 1
        return cls.from_dict(p, N, bounds, {tuple(mono): 1})

    def _like(self, arr):
        return PowerSeriesRep(self.p, self.N, arr)

    def __add__(self, other):
        other = self._coerce(other)
        return self._like(self.coeffs + other.coeffs)

    __radd__ = __add__

    def __neg__(self):
        return self._like(-self.coeffs)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def _coerce(self, x):
        if isinstance(x, PowerSeriesRep):
            if x.coeffs.shape != self.coeffs.shape:
                raise ValueError("truncation shapes differ")
            return x
        arr = _object_array(self.coeffs.shape)
        arr[(0,) * self.d] = int(x)
        return self._like(arr)

    def __mul__(self, other):
        other = self._coerce(other)
        shape = self.coeffs.shape
        out = _object_array(shape)
        for idx in zip(*np.nonzero(self.coeffs != 0)):
            c = self.coeffs[idx]
            sl_out = tuple(slice(i, None) for i in idx)
            sl_in = tuple(slice(0, s - i) for i, s in zip(idx, shape))
            out[sl_out] = out[sl_out] + c * other.coeffs[sl_in]
        return self._like(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = self._coerce(1)
        for _ in range(k):
            out = out * self
        return out

    def is_zero(self) -> bool:
        return all(int(x) == 0 for x in self.coeffs.flat)

    def equals(self, other) -> bool:
        return (self - self._coerce(other)).is_zero()

    def __eq__(self, other):
        if isinstance(other, (PowerSeriesRep, int)):
            return self.equals(other)
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs.shape)

    def coefficient(self, mono) -> int:
        mono = (mono,) if isinstance(mono, int) else tuple(mono)
        c = int(self.coeffs[mono])
        mod = self.p ** self.N
        return c - mod if c > mod // 2 else c

    def truncate_total(self, M: int) -> "PowerSeriesRep":
        arr = self.coeffs.copy()
        for idx in np.ndindex(arr.shape):
            if sum(idx) > M:
                arr[idx] = 0
        return self._like(arr)

    def inverse(self) -> "PowerSeriesRep":
        c0 = int(self.coeffs[(0,) * self.d])
        if c0 % self.p == 0:
            raise ZeroDivisionError("not a unit")
        inv0 = pow(c0, -1, self.p ** self.N)
        # u = c0 (1 - x), x nilpotent in the truncated ring
        x = 1 - self * inv0
        out = self._coerce(1)
        term = self._coerce(1)
        steps = sum(self.bounds) + self.N + 1
        for _ in range(steps):
            term = term * x
            if term.is_zero():
                break
            out = out + term
        return out * inv0

    def mu(self) -> int:
        v = _vp_array_min(self.coeffs, self.p)
        if v is None:
            raise PrecisionExhausted("series vanishes at working precision")
        return v

    def homogeneous_part(self, k: int) -> dict:
        return {idx: self.coefficient(idx) for idx in np.ndindex(self.coeffs.shape)
                if sum(idx) == k and int(self.coeffs[idx])}

    def vanishing_order(self) -> int:
        """Least total degree with a nonzero coefficient (within the truncation)."""
        top = min(self.bounds) if self.bounds else 0
        for k in range(top + 1):
            for idx in np.ndindex(self.coeffs.shape):
                if sum(idx) == k and self._known_nonzero(idx):
                    return k
        raise PrecisionExhausted(f"vanishing order exceeds the truncation {top}")

    def _known_nonzero(self, idx) -> bool:
        c = int(self.coeffs[idx])
        if self.known is None:
            return c % self.p ** self.N != 0
        kn = int(self.known[idx])
        return kn > 0 and c % self.p ** kn != 0

    def substitute_line(self, a: Sequence[int], M: int | None = None) -> "PowerSeriesRep":
        """d -> 1 specialization t_i -> (1+t)^(a_i) - 1."""
        M = max(self.bounds) if M is None else M
        base = [binomial_series(ai, M, self.p, self.N) for ai in a]
        powers = []
        for i, b in enumerate(base):
            col = [PowerSeriesRep(self.p, self.N, _unit_vec(M))]
            for _ in range(self.bounds[i]):
                col.append(col[-1] * b)
            powers.append(col)
        out = PowerSeriesRep(self.p, self.N, _object_array((M + 1,)))
        for idx in np.ndindex(self.coeffs.shape):
            c = int(self.coeffs[idx])
            if c:
                term = PowerSeriesRep(self.p, self.N, _unit_vec(M)) * c
                for i, e in enumerate(idx):
                    term = term * powers[i][e]
                out = out + term
        return out

    def __repr__(self):
        terms = []
        for idx in np.ndindex(self.coeffs.shape):
            c = self.coefficient(idx)
            if c:
                mono = "*".join(f"t{i + 1}^{e}" if e > 1 else f"t{i + 1}" for i, e in enumerate(idx) if e)
                terms.append(f"{c}" + ("*" + mono if mono else ""))
        return f"PowerSeries(mod {self.p}^{self.N}: " + (" + ".join(terms[:12]) or "0") + (" ..." if len(terms) > 12 else "") + ")"


def _unit_vec(M: int) -> np.ndarray:
    arr = _object_array((M + 1,))
    arr[0] = 1
    return arr


def binomial_series(a: int, M: int, p: int, N: int) -> PowerSeriesRep:
    """(1+t)^a - 1 to degree M (a may be negative)."""
    arr = _object_array((M + 1,))
    c = Fraction(1)
    for k in range(1, M + 1):
        c = c * (a - k + 1) / k
        arr[k] = int(c)
    return PowerSeriesRep(p, N, arr)


def to_power_series(f: GroupRingElt, M: int, N: int | None = None) -> PowerSeriesRep:
    """sigma_i -> 1 + t_i; coefficient of t^alpha is sum_g f_g prod C(g_i, alpha_i).

    Coefficients carry their known precision: the image of the ideal generated
    by (1+t_i)^(m_i) - 1 only affects t^alpha modulo p^(n_i - floor(log_p alpha_i)).
    Denominators are cleared by recording them in the precision: the returned
    series represents p^shift * f.
    """
    p = f.p
    d = len(f.moduli)
    if N is None:
        N = (f.precision + f.shift) if f.precision is not None else 40
    shape = (M + 1,) * d
    arr = _object_array(shape)
    known = np.zeros(shape, dtype=np.int64)
    els = f.elements()
    flat = [int(x) for x in f.coeffs.reshape(-1)]
    ns = [_log_p(m, p) for m in f.moduli]
    for alpha in np.ndindex(shape):
        total = 0
        for g, c in zip(els, flat):
            if c:
                w = 1
                for gi, ai in zip(g, alpha):
                    w *= comb(int(gi), ai)
                    if not w:
                        break
                total += c * w
        arr[alpha] = total
        kn = N
        for ni, ai in zip(ns, alpha):
            if ai >= 1:
                lim = ni - _floor_log(ai, p)
                kn = min(kn, max(lim, 0))
        known[alpha] = kn
    return PowerSeriesRep(p, N, arr, known)


def _floor_log(k: int, p: int) -> int:
    r = 0
    while p ** (r + 1) <= k:
        r += 1
    return r


def vanishing_order(f: GroupRingElt, M: int | None = None) -> int:
    """Order of f in the augmentation filtration, read off the power series."""
    if M is None:
        M = min(f.moduli) - 1 if f.moduli else 0
    return to_power_series(f, M).vanishing_order()


def homogeneous_part(f: GroupRingElt, k: int) -> dict:
    """Degree-k part as {alpha: (value, known digits)} with p^shift cleared."""
    ps = to_power_series(f, k)
    out = {}
    for idx in np.ndindex(ps.coeffs.shape):
        if sum(idx) == k:
            out[idx] = (Fraction(ps.coefficient(idx), f.p ** f.shift), int(ps.known[idx]) - f.shift)
    return out


# ------------------------------------------------------ Weierstrass theory

def weierstrass_prepare(f: PowerSeriesRep, var: int = 0) -> tuple[PowerSeriesRep, PowerSeriesRep]:
    """f = u * P with u a unit and P monic in t_var with lower coefficients in (p, other t).

    The result holds modulo p^N and t_var^(M_var + 1 - r).
    """
    p, N = f.p, f.N
    arr = np.moveaxis(f.coeffs, var, 0)
    M1 = arr.shape[0] - 1
    rest_shape = arr.shape[1:]
    origin = (0,) * len(rest_shape)
    r = None
    for j in range(M1 + 1):
        if int(arr[(j,) + origin]) % p:
            r = j
            break
    if r is None:
        raise NotPlain("f(t, 0, ..., 0) vanishes mod p")
    g = PowerSeriesRep(p, N, arr)
    B_arr = arr.copy()
    B_arr[r:] = 0
    U_arr = _object_array(arr.shape)
    U_arr[: M1 + 1 - r] = arr[r:]
    B = PowerSeriesRep(p, N, B_arr)
    U = PowerSeriesRep(p, N, U_arr)
    Uinv = U.inverse()

    def tau(h: PowerSeriesRep) -> PowerSeriesRep:
        out = _object_array(arr.shape)
        out[: M1 + 1 - r] = h.coeffs[r:]
        return PowerSeriesRep(p, N, out)

    q = Uinv
    for _ in range(N + sum(f.bounds) + 2):
        q_new = Uinv * (1 - tau(q * B))
        if q_new.equals(q):
            break
        q = q_new
    P = q * g
    P_arr = P.coeffs.copy()
    P_arr[r + 1:] = 0
    P_arr[r] = 0
    P_arr[(r,) + origin] = 1
    u = q.inverse()
    P_out = PowerSeriesRep(p, N, np.moveaxis(P_arr, 0, var))
    u_out = PowerSeriesRep(p, N, np.moveaxis(u.coeffs, 0, var))
    return u_out, P_out


def weierstrass_check(f: PowerSeriesRep, u: PowerSeriesRep, P: PowerSeriesRep, var: int = 0) -> bool:
    """u * P == f modulo t_var^(M + 1 - r)."""
    r = _distinguished_degree(P, var)
    diff = np.moveaxis((u * P - f).coeffs, var, 0)
    M1 = diff.shape[0] - 1
    return all(int(x) % f.p ** f.N == 0 for x in diff[: M1 + 1 - r].flat)


def _distinguished_degree(P: PowerSeriesRep, var: int) -> int:
    arr = np.moveaxis(P.coeffs, var, 0)
    origin = (0,) * (arr.ndim - 1)
    for j in range(arr.shape[0] - 1, -1, -1):
        if int(arr[(j,) + origin]) == 1 and not any(int(x) for x in arr[j + 1:].flat):
            return j
    return 0


def plainness_test(f: GroupRingElt, A) -> bool:
    """True if the specialization along A is not divisible by p."""
    g = specialize(f, A)
    v = g.valuation_min()
    return v is not None and v == 0


def mathring_d1(f: PowerSeriesRep) -> PowerSeriesRep:
    """Strip p^mu and the largest power of t dividing f (one variable)."""
    if f.d != 1:
        raise ValueError("mathring is only implemented for one variable")
    if f.is_zero():
        raise ZeroInput("zero series")
    mu = f.mu()
    arr = np.array([int(x) // f.p ** mu for x in f.coeffs], dtype=object)
    g = PowerSeriesRep(f.p, f.N - mu, arr)
    r = g.vanishing_order()
    out = _object_array(arr.shape)
    out[: len(arr) - r] = g.coeffs[r:]
    return PowerSeriesRep(f.p, f.N - mu, out)


def _series1_mul(a, b, M, mod):
    out = [0] * (M + 1)
    for i, x in enumerate(a):
        if x:
            for j in range(M + 1 - i):
                if b[j]:
                    out[i + j] = (out[i + j] + x * b[j]) % mod
    return out


def _det_series(mat, M, mod):
    n = len(mat)
    if n == 1:
        return mat[0][0]
    total = [0] * (M + 1)
    for j in range(n):
        if not any(mat[0][j]):
            continue
        minor = [row[:j] + row[j + 1:] for row in mat[1:]]
        term = _series1_mul(mat[0][j], _det_series(minor, M, mod), M, mod)
        sign = 1 if j % 2 == 0 else -1
        total = [(x + sign * y) % mod for x, y in zip(total, term)]
    return total


def resultant_coprime(f: PowerSeriesRep, g: PowerSeriesRep) -> bool:
    """Two-variable test: nonzero resultant in t_1 of the distinguished polynomials."""
    if f.d != 2 or g.d != 2:
        raise ValueError("resultant test needs two variables")
    if f.is_zero() or g.is_zero():
        raise ZeroInput("zero series")
    res = resultant_t1(f, g)
    return any(res)


def resultant_t1(f: PowerSeriesRep, g: PowerSeriesRep) -> list[int]:
    """Res_{t_1}(P_f, P_g) as a truncated series in t_2."""
    _, Pf = weierstrass_prepare(f, 0)
    _, Pg = weierstrass_prepare(g, 0)
    r, s = _distinguished_degree(Pf, 0), _distinguished_degree(Pg, 0)
    M2 = f.coeffs.shape[1] - 1
    mod = f.p ** f.N
    cf = [[int(x) for x in Pf.coeffs[j]] for j in range(r + 1)]
    cg = [[int(x) for x in Pg.coeffs[j]] for j in range(s + 1)]
    zero = [0] * (M2 + 1)
    n = r + s
    if n == 0:
        one = [1] + [0] * M2
        return one
    mat = []
    for i in range(s):
        row = [zero] * n
        for j in range(r + 1):
            row[i + j] = cf[r - j]
        mat.append(row)
    for i in range(r):
        row = [zero] * n
        for j in range(s + 1):
            row[i + j] = cg[s - j]
        mat.append(row)
    return _det_series(mat, M2, mod)


def sharp_series(f: PowerSeriesRep) -> PowerSeriesRep:
    """t_i -> (1+t_i)^-1 - 1 in every variable."""
    out = f
    for i in range(f.d):
        out = _substitute_var(out, i, binomial_series(-1, f.bounds[i], f.p, f.N))
    return out


def _substitute_var(f: PowerSeriesRep, i: int, s1: PowerSeriesRep) -> PowerSeriesRep:
    arr = np.moveaxis(f.coeffs, i, 0)
    M = arr.shape[0] - 1
    out = _object_array(arr.shape)
    power = [1] + [0] * M
    s = [int(x) for x in s1.coeffs]
    for k in range(M + 1):
        for j in range(M + 1):
            if power[j]:
                out[j] = out[j] + power[j] * arr[k]
        power = _series1_mul(power, s, M, f.p ** f.N)
    return PowerSeriesRep(f.p, f.N, np.moveaxis(out, 0, i))


# ----------------------------------------------------- division in Z_p[G]

def divide(f: GroupRingElt, g: GroupRingElt, precision: int = 40) -> GroupRingElt:
    """Solve g * h = f in Q_p[G] and assert exactness.

    Character-wise: omega(h) = omega(f)/omega(g) where omega(g) != 0; where
    omega(g) = 0 the value omega(f) must vanish and omega(h) is set to 0.
    Exact divisors whose inverse is not a p-adic fraction are truncated to
    ``precision`` absolute digits (or the dividend's precision) first.
    """
    if f.moduli != g.moduli:
        raise ValueError("group rings differ")
    P = f.exponent

    def value(e):
        a = eval_character(f, e)
        b = eval_character(g, e)
        if b.is_zero():
            if not a.is_zero():
                raise NotDivisible(f"character {e} kills the divisor but not the dividend")
            return CycloElt.from_int(0, f.p, _log_p(P, f.p), a.precision)
        try:
            return a * b.inverse()
        except PrecisionExhausted:
            if not b.is_exact():
                raise
            target = a.abs_precision if a.abs_precision is not None else precision
            return a * b.with_abs_precision(target + 2 * b.degree).inverse()

    h = fourier_invert(value, f.moduli, f.p)
    if not (g * h - f).with_precision(_common_prec(f, h, g)).is_zero():
        raise NotDivisible("division leaves a nonzero remainder")
    return h


def _common_prec(*els):
    precs = [e.precision for e in els if e.precision is not None]
    return min(precs) if precs else None
