"""Finite p-quotients of ray class groups of F_q(t), Artin classes,
p-power order characters, conductors, and Z_p^d tower presentations.

Conventions.  For a modulus D (supported on finite places) the Weil group
W_D is Z x (F_q[t]/D)^* / F_q^*.  A monic polynomial f prime to D has class
(deg f, f mod D); a place v has the class of its monic generator and infinity
has class (1, 1).  A local element P_v^k * u at a place v of Supp(D) has class
(k deg v; u^-1 at v; P_v^k at the other places of D).  The level-n group
G(D, n) is Z/p^n x prod_w U1_w / (U1_w)^{p^n} where U1_w are the one-units
modulo P_w^{e_w}; the prime-to-p part of a unit is removed by raising to
the power q_w - 1.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .funfield import FiniteField, Place, PolyRing, get_field
from .padic import CycloElt


class NotCoprime(ValueError):
    pass


class IncompatibleLevels(ValueError):
    pass


def vp(x: int, p: int) -> int:
    if x == 0:
        return 10 ** 9
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


# ------------------------------------------------------------- Smith form

def smith_mod_pn(rel: np.ndarray, ngens: int, p: int, n: int) -> tuple[list[int], np.ndarray]:
    """Quotient of (Z/p^n)^ngens by the row span of ``rel``.

    Returns the invariant factors (powers of p, trivial ones included) and a
    matrix V with new coordinates y = x V, reduced modulo the factors.
    """
    mod = p ** n
    M = [[int(x) % mod for x in row] for row in rel]
    V = [[int(i == j) for j in range(ngens)] for i in range(ngens)]
    rows = len(M)
    diag = []
    r = 0
    for c in range(ngens):
        # pivot with minimal valuation in the remaining block
        best = None
        for i in range(r, rows):
            for j in range(c, ngens):
                if M[i][j] % mod:
                    v = vp(M[i][j], p)
                    if best is None or v < best[0]:
                        best = (v, i, j)
                        if v == 0:
                            break
            if best is not None and best[0] == 0:
                break
        if best is None:
            break
        v, i, j = best
        M[r], M[i] = M[i], M[r]
        for row in M:
            row[c], row[j] = row[j], row[c]
        for row in V:
            row[c], row[j] = row[j], row[c]
        piv = M[r][c]
        unit = piv // p ** v
        uinv = pow(unit, -1, mod)
        M[r] = [(x * uinv) % mod for x in M[r]]
        # clear column c in other rows
        for i2 in range(rows):
            if i2 != r and M[i2][c] % mod:
                f = (M[i2][c] // p ** v) % mod
                M[i2] = [(a - f * b) % mod for a, b in zip(M[i2], M[r])]
        # clear row r by column operations (tracked in V)
        for j2 in range(c + 1, ngens):
            if M[r][j2] % mod:
                f = (M[r][j2] // p ** v) % mod
                for row in M:
                    row[j2] = (row[j2] - f * row[c]) % mod
                for row in V:
                    row[j2] = (row[j2] - f * row[c]) % mod
        diag.append(p ** v)
        r += 1
    while len(diag) < ngens:
        diag.append(mod)
    return diag, np.array(V, dtype=object)


# ---------------------------------------------------------- local groups

class LocalUnitGroup:
    """One-units modulo P^e, modulo p^n-th powers, with a discrete-log table."""

    def __init__(self, v: Place, e: int, p: int, n: int):
        self.place, self.e, self.p, self.n = v, e, p, n
        self.F = get_field(v.q)
        self.R = PolyRing(self.F)
        self.modulus = self.R.pow(v.poly, e)
        self.E = e * v.degree
        self.qv = v.qv
        q = v.q
        self.size = q ** self.E
        gens: list[tuple] = []
        F = self.F
        basis = [F.p ** i for i in range(F.r)]  # F_p-basis codes of F_q
        for i in range(1, e):
            Pi = self.R.pow(v.poly, i)
            for s in range(v.degree):
                for b in basis:
                    gens.append(self.R.mod(self.R.add((1,), self.R.mul(Pi, self.R.trim([0] * s + [b]))),
                                           self.modulus))
        self.raw_gens = gens
        self._build()

    def code(self, poly) -> int:
        q = self.place.q
        return sum(int(c) * q ** i for i, c in enumerate(poly))

    def decode(self, code: int) -> tuple:
        q = self.place.q
        return self.R.trim([(code // q ** i) % q for i in range(self.E)])

    def _mulcode(self, a: int, b: int) -> int:
        return self.code(self.R.mod(self.R.mul(self.decode(a), self.decode(b)), self.modulus))

    def _build(self):
        p, n = self.p, self.n
        g = len(self.raw_gens)
        one = self.code((1,))
        gen_codes = [self.code(x) for x in self.raw_gens]
        words = {one: (0,) * g}
        rels = []
        queue = deque([one])
        while queue:
            x = queue.popleft()
            wx = words[x]
            for k, gc in enumerate(gen_codes):
                y = self._mulcode(x, gc)
                wy = list(wx)
                wy[k] += 1
                if y in words:
                    rels.append([a - b for a, b in zip(wy, words[y])])
                else:
                    words[y] = tuple(wy)
                    queue.append(y)
        for k in range(g):
            rels.append([p ** n * int(k == j) for j in range(g)])
        rel = np.array(rels, dtype=object) if rels else np.zeros((0, g), dtype=object)
        diag, V = smith_mod_pn(rel, g, p, n) if g else ([], np.zeros((0, 0), dtype=object))
        keep = [j for j, d in enumerate(diag) if d > 1]
        self.moduli = tuple(int(diag[j]) for j in keep)
        self.rank = len(keep)
        mod = p ** n
        # discrete log table on one-units
        dlog = {}
        for code, w in words.items():
            y = [sum(int(w[i]) * int(V[i][j]) for i in range(g)) % mod for j in keep]
            dlog[code] = tuple(int(a) % m for a, m in zip(y, self.moduli))
        self._dlog = dlog
        # table over all residues: coordinates of the p-part, or -1 for non-units
        tab = np.full((self.size, self.rank), -1, dtype=np.int64)
        unit = np.zeros(self.size, dtype=bool)
        inv = pow(self.qv - 1, -1, mod) if self.rank else 1
        P = self.place.poly
        for code in range(self.size):
            r = self.decode(code)
            if not self.R.mod(r, P):
                continue
            unit[code] = True
            u = self.R.powmod(r, self.qv - 1, self.modulus)
            y = dlog[self.code(u)]
            tab[code] = [(a * inv) % m for a, m in zip(y, self.moduli)]
        self.table = tab
        self.is_unit = unit
        # representatives of the Smith generators as residues
        Vinv = _inverse_mod(V, mod) if g else V
        reps = []
        for j in keep:
            acc: tuple = (1,)
            for i in range(g):
                ex = int(Vinv[j][i]) % mod
                if ex:
                    acc = self.R.mod(self.R.mul(acc, self.R.powmod(self.raw_gens[i], ex, self.modulus)),
                                     self.modulus)
            reps.append(acc)
        self.gen_reps = reps

    def coords(self, poly) -> tuple[int, ...]:
        """Coordinates of the p-part of a unit residue."""
        r = self.R.mod(self.R.trim(poly), self.modulus)
        c = self.code(r)
        if not self.is_unit[c]:
            raise NotCoprime(f"{poly} is not a unit at {self.place}")
        return tuple(int(x) for x in self.table[c])

    def filtration_generators(self, k: int) -> list[tuple]:
        """Residues generating the one-units congruent to 1 mod P^k."""
        v = self.place
        F = self.F
        basis = [F.p ** i for i in range(F.r)]
        out = []
        for i in range(k, self.e):
            Pi = self.R.pow(v.poly, i)
            for s in range(v.degree):
                for b in basis:
                    out.append(self.R.mod(self.R.add((1,), self.R.mul(Pi, self.R.trim([0] * s + [b]))),
                                          self.modulus))
        return out


def _inverse_mod(V: np.ndarray, mod: int) -> np.ndarray:
    """Inverse of a square integer matrix modulo a prime power (unit determinant)."""
    import sympy

    M = sympy.Matrix(V.tolist())
    inv = M.inv_mod(mod)
    return np.array(inv.tolist(), dtype=object)


# ------------------------------------------------------------ level groups

def normalize_divisor(D) -> tuple[tuple[Place, int], ...]:
    items = D.items() if isinstance(D, dict) else D
    out = {}
    for v, e in items:
        if v.is_infinite:
            raise ValueError("the modulus must avoid infinity")
        if e > 0:
            out[v] = out.get(v, 0) + int(e)
    return tuple(sorted(out.items()))


def divisor_degree(D) -> int:
    return sum(v.degree * e for v, e in normalize_divisor(D))


class RayLevelGroup:
    """G(D, n) with structure maps from polynomials and local elements."""

    def __init__(self, q: int, D, p: int, n: int):
        self.q, self.p, self.n = q, p, n
        self.D = normalize_divisor(D)
        self.F = get_field(q)
        self.R = PolyRing(self.F)
        self.locals = [LocalUnitGroup(v, e, p, n) for v, e in self.D]
        self.locals = [L for L in self.locals]
        self.moduli = (p ** n,) + tuple(m for L in self.locals for m in L.moduli)
        offs = [1]
        for L in self.locals:
            offs.append(offs[-1] + L.rank)
        self._offsets = offs
        self.exponent = p ** n

    @property
    def rank(self) -> int:
        return len(self.moduli)

    @property
    def order(self) -> int:
        return int(np.prod([int(m) for m in self.moduli]))

    def structure(self) -> tuple[int, ...]:
        return tuple(int(m) for m in self.moduli if m > 1)

    def local_slice(self, v: Place) -> slice:
        for i, L in enumerate(self.locals):
            if L.place == v:
                return slice(self._offsets[i], self._offsets[i + 1])
        raise KeyError(v)

    def reduce(self, g) -> tuple[int, ...]:
        return tuple(int(x) % int(m) for x, m in zip(g, self.moduli))

    def add(self, a, b):
        return self.reduce([x + y for x, y in zip(a, b)])

    def neg(self, a):
        return self.reduce([-x for x in a])

    def scale(self, k: int, a):
        return self.reduce([k * x for x in a])

    def identity(self) -> tuple[int, ...]:
        return (0,) * self.rank

    # ------------------------------------------------------- class maps
    def class_of_poly(self, f, degree: int | None = None) -> tuple[int, ...]:
        f = self.R.trim(f)
        if not f:
            raise NotCoprime("zero polynomial")
        deg = self.R.deg(f) if degree is None else degree
        out = [deg]
        for L in self.locals:
            out.extend(L.coords(f))
        return self.reduce(out)

    def class_of_place(self, v: Place) -> tuple[int, ...]:
        if v.is_infinite:
            return self.reduce([1] + [0] * (self.rank - 1))
        return self.local_element_class(v, 1, (1,))

    def local_element_class(self, v: Place, k: int, unit) -> tuple[int, ...]:
        """Class of the idele equal to P_v^k * unit at v and 1 elsewhere."""
        if v.is_infinite:
            return self.reduce([k] + [0] * (self.rank - 1))
        out = [k * v.degree]
        Pk_pos = self.R.pow(v.poly, abs(k))
        for L in self.locals:
            if L.place == v:
                y = L.coords(unit)
                out.extend(-a for a in y)
            else:
                y = L.coords(Pk_pos)
                out.extend(a if k >= 0 else -a for a in y)
        return self.reduce(out)

    def generator_images_in(self, other: "RayLevelGroup") -> np.ndarray:
        """Integer matrix of the reduction map G(self) -> G(other) (D_other <= D_self)."""
        if other.p != self.p or other.n > self.n:
            raise IncompatibleLevels("cannot map to a higher level")
        cols = [other.reduce([1] + [0] * (other.rank - 1))]
        for L in self.locals:
            for rep in L.gen_reps:
                out = [0]
                for L2 in other.locals:
                    if L2.place == L.place:
                        out.extend(L2.coords(rep))
                    else:
                        out.extend([0] * L2.rank)
                cols.append(other.reduce(out))
        return np.array(cols, dtype=np.int64).T.reshape(other.rank, self.rank)

    def batch_classes(self, coeffs: np.ndarray, degrees: np.ndarray) -> np.ndarray:
        """Classes of many polynomials; coeffs has shape (count, L) over F_q codes.

        Rows whose polynomial is not prime to D get -1 in every coordinate.
        """
        count = coeffs.shape[0]
        out = np.zeros((count, self.rank), dtype=np.int64)
        out[:, 0] = np.asarray(degrees) % self.moduli[0]
        bad = np.zeros(count, dtype=bool)
        col = 1
        for L in self.locals:
            res = reduce_polys_mod(self.F, coeffs, L.modulus)
            codes = (res * (L.place.q ** np.arange(res.shape[1]))).sum(axis=1) if res.shape[1] else np.zeros(count, dtype=np.int64)
            bad |= ~L.is_unit[codes]
            out[:, col:col + L.rank] = L.table[codes]
            col += L.rank
        out[bad] = -1
        return out

    def flat_index(self, g) -> np.ndarray:
        """Mixed-radix index of class vectors (last axis)."""
        g = np.asarray(g)
        idx = np.zeros(g.shape[:-1], dtype=np.int64)
        for j, m in enumerate(self.moduli):
            idx = idx * int(m) + g[..., j]
        return idx

    def all_elements(self) -> np.ndarray:
        grids = np.meshgrid(*[np.arange(int(m)) for m in self.moduli], indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=-1)

    def __repr__(self):
        D = " + ".join(f"{e}*({v})" for v, e in self.D) or "0"
        return f"G(D={D}, n={self.n}) = " + " x ".join(f"Z/{m}" for m in self.structure())


@lru_cache(maxsize=64)
def level_group(q: int, D: tuple, p: int, n: int) -> RayLevelGroup:
    """Cached constructor; D is a tuple of (Place, exponent) pairs."""
    return RayLevelGroup(q, D, p, n)


def get_level_group(q: int, D, p: int, n: int) -> RayLevelGroup:
    return level_group(q, normalize_divisor(D), p, n)


def reduce_polys_mod(F: FiniteField, coeffs: np.ndarray, modulus: tuple) -> np.ndarray:
    """Vectorised remainder of many polynomials modulo one monic polynomial."""
    coeffs = np.array(coeffs, dtype=np.int64, copy=True)
    E = len(modulus) - 1
    L = coeffs.shape[1]
    if L <= E:
        pad = np.zeros((coeffs.shape[0], E - L), dtype=np.int64)
        return np.concatenate([coeffs, pad], axis=1)
    mod = np.asarray(modulus, dtype=np.int64)
    for i in range(L - 1, E - 1, -1):
        c = coeffs[:, i]
        for j in range(E):
            coeffs[:, i - E + j] = F.sub_tab[coeffs[:, i - E + j], F.mul_tab[c, mod[j]]]
    return coeffs[:, :E]


# ------------------------------------------------------------ characters

@dataclass(frozen=True)
class RayCharacter:
    """omega(g) = zeta_{p^n}^(exps . g) on a RayLevelGroup."""

    group: RayLevelGroup
    exps: tuple

    @property
    def p(self) -> int:
        return self.group.p

    @property
    def n(self) -> int:
        return self.group.n

    def exponent(self, g) -> int:
        return int(sum(int(a) * int(x) for a, x in zip(self.exps, g)) % self.group.exponent)

    def value(self, g) -> CycloElt:
        return CycloElt.zeta_power(self.exponent(g), self.p, self.n)

    def power(self, a: int) -> "RayCharacter":
        return RayCharacter(self.group, tuple((a * x) % self.group.exponent for x in self.exps))

    def inverse(self) -> "RayCharacter":
        return self.power(-1)

    def is_trivial(self) -> bool:
        return all(x % self.group.exponent == 0 for x in self.exps)

    def order(self) -> int:
        g = 0
        for x in self.exps:
            g = np.gcd(g, int(x) % self.group.exponent)
        g = np.gcd(g, self.group.exponent)
        return self.group.exponent // int(g) if g else 1

    def conductor(self) -> tuple[tuple[Place, int], ...]:
        return conductor_of(self)


def characters_of(G: RayLevelGroup) -> list[RayCharacter]:
    mod = G.exponent
    ranges = [[a * (mod // int(m)) for a in range(int(m))] for m in G.moduli]
    return [RayCharacter(G, tuple(e)) for e in itertools.product(*ranges)]


def conductor_of(omega: RayCharacter) -> tuple[tuple[Place, int], ...]:
    G = omega.group
    out = []
    for L in G.locals:
        v = L.place
        sl = G.local_slice(v)

        def trivial_from(k: int) -> bool:
            for r in L.filtration_generators(k):
                g = [0] * G.rank
                g[sl] = L.coords(r)
                if omega.exponent(g) != 0:
                    return False
            return True

        k = L.e
        while k > 1 and trivial_from(k - 1):
            k -= 1
        if k == 1:
            # trivial on all one-units: unramified in the p-quotient
            continue
        out.append((v, k))
    return tuple(out)


def artin_class(x, G: RayLevelGroup) -> tuple[int, ...]:
    """Class of a place or a polynomial prime to the modulus."""
    if isinstance(x, Place):
        if not x.is_infinite and any(v == x for v, _ in G.D):
            raise NotCoprime(f"{x} divides the modulus")
        return G.class_of_place(x)
    return G.class_of_poly(x)


# ----------------------------------------------------------------- towers

class TowerCoordinate:
    """One Z_p-valued coordinate of a tower: constant, or cyclotomic at a place."""

    def __init__(self, kind: str, place: Place | None = None):
        self.kind, self.place = kind, place

    def exponent_at(self, p: int, n: int) -> int:
        if self.kind == "constant":
            return 0
        return p ** (n - 1) + 1

    def value_on(self, G: RayLevelGroup, g_residues: dict, degree: int, n: int) -> int:
        mod = G.p ** n
        if self.kind == "constant":
            return degree % mod
        r = g_residues.get(self.place)
        if r is None:
            return 0
        return cyclotomic_coordinate(G.F, self.place, r, G.p, n)

    def poly_value(self, F: FiniteField, f, p: int, n: int) -> int:
        if self.kind == "constant":
            return (len(f) - 1) % p ** n
        return cyclotomic_coordinate(F, self.place, f, p, n)


def cyclotomic_coordinate(F: FiniteField, v: Place, f, p: int, n: int) -> int:
    """Coefficient a_1 mod p^n in f(c+T)/f(c) = prod_{p not | i} (1 - T^i)^{a_i}."""
    if F.r != 1 or v.degree != 1:
        raise ValueError("cyclotomic coordinates need q prime and a degree-one place")
    R = PolyRing(F)
    c = int(F.neg(v.poly[0]))
    e = p ** (n - 1) + 1
    # Taylor expansion of f at c, truncated at T^e
    coeffs = []
    cur = R.trim(f)
    for _ in range(e):
        coeffs.append(R.eval(cur, c))
        cur = R.divmod(R.sub(cur, (coeffs[-1],)), v.poly)[0] if cur else ()
    if coeffs[0] == 0:
        raise NotCoprime("polynomial vanishes at the tower place")
    inv0 = int(F.inv(coeffs[0]))
    u = [int(F.mul(x, inv0)) for x in coeffs]
    mod = p ** n
    a1 = 0
    for i in range(1, e):
        b = u[i]
        if b == 0:
            continue
        # multiply u by (1 - T^i)^b to clear the T^i coefficient
        u = _mul_trunc(u, _one_minus_power(i, b, e, p), p, e)
        s, i0 = 0, i
        while i0 % p == 0:
            i0 //= p
            s += 1
        if i0 == 1:
            a1 = (a1 - b * p ** s) % mod
    assert all(x == 0 for x in u[1:]), u
    return a1


def _one_minus_power(i: int, b: int, e: int, p: int) -> list[int]:
    out = [0] * e
    from math import comb
    for j in range(0, e):
        if i * j >= e:
            break
        out[i * j] = (comb(b, j) * (-1) ** j) % p
    return out


def _mul_trunc(a, b, p, e):
    out = [0] * e
    for i, x in enumerate(a):
        if x:
            for j in range(e - i):
                if b[j]:
                    out[i + j] = (out[i + j] + x * b[j]) % p
    return out


@dataclass
class TowerLevel:
    n: int
    group: RayLevelGroup
    matrix: np.ndarray  # d x rank(G), integers mod p^n

    @property
    def d(self) -> int:
        return self.matrix.shape[0]

    def project(self, g) -> tuple[int, ...]:
        mod = self.group.p ** self.n
        return tuple(int(x) % mod for x in (self.matrix.astype(object) @ np.asarray(g, dtype=object)))


class TowerSpec:
    """A Z_p^d extension presented through compatible level data."""

    def __init__(self, q: int, p: int, coordinates: Sequence[TowerCoordinate] | None = None,
                 explicit: dict | None = None, S: Sequence[Place] | None = None):
        self.q, self.p = q, p
        self.coords = list(coordinates or [])
        self.explicit = explicit or {}
        if self.explicit:
            self.d = next(iter(self.explicit.values()))[1].shape[0]
            places = sorted({v for D, _ in self.explicit.values() for v, _ in normalize_divisor(D)})
            self.S = list(S) if S is not None else places
        else:
            self.d = len(self.coords)
            self.S = sorted({c.place for c in self.coords if c.place is not None})
        self._levels: dict[int, TowerLevel] = {}

    @classmethod
    def constant(cls, q: int, p: int) -> "TowerSpec":
        return cls(q, p, [TowerCoordinate("constant")])

    @classmethod
    def cyclotomic(cls, q: int, p: int, v: Place) -> "TowerSpec":
        return cls(q, p, [TowerCoordinate("cyclotomic", v)])

    @classmethod
    def trivial(cls, q: int, p: int) -> "TowerSpec":
        return cls(q, p, [])

    @property
    def has_constant_direction(self) -> bool:
        return any(c.kind == "constant" for c in self.coords)

    @property
    def is_constant_tower(self) -> bool:
        return self.d == 1 and self.coords and self.coords[0].kind == "constant"

    def modulus(self, n: int):
        if self.explicit:
            return normalize_divisor(self.explicit[n][0])
        D: dict = {}
        for c in self.coords:
            if c.place is not None:
                D[c.place] = max(D.get(c.place, 0), c.exponent_at(self.p, n))
        return normalize_divisor(D)

    def level(self, n: int) -> TowerLevel:
        if n in self._levels:
            return self._levels[n]
        G = get_level_group(self.q, self.modulus(n), self.p, n)
        if self.explicit:
            M = np.asarray(self.explicit[n][1], dtype=np.int64) % self.p ** n
        else:
            cols = []
            # generator images: degree generator, then local Smith generators
            col = [c.value_on(G, {}, 1, n) for c in self.coords]
            cols.append(col)
            for L in G.locals:
                for rep in L.gen_reps:
                    cols.append([c.value_on(G, {L.place: rep}, 0, n) for c in self.coords])
            M = np.array(cols, dtype=np.int64).T.reshape(self.d, G.rank) if self.d else np.zeros((0, G.rank), dtype=np.int64)
        lvl = TowerLevel(n, G, M)
        self._levels[n] = lvl
        return lvl

    def group_moduli(self, n: int) -> tuple[int, ...]:
        return (self.p ** n,) * self.d

    def place_class(self, v: Place, n: int) -> tuple[int, ...]:
        lvl = self.level(n)
        return lvl.project(lvl.group.class_of_place(v))

    def check_compatibility(self, n: int, samples: int = 40, seed: int = 0) -> bool:
        """Projection squares between levels n+1 and n commute on random polynomials."""
        import random
        rng = random.Random(seed)
        hi, lo = self.level(n + 1), self.level(n)
        R = PolyRing(get_field(self.q))
        for _ in range(samples):
            f = R.trim([rng.randrange(self.q) for _ in range(rng.randrange(1, 8))] + [1])
            try:
                a = hi.project(hi.group.class_of_poly(f))
                b = lo.project(lo.group.class_of_poly(f))
            except NotCoprime:
                continue
            if tuple(x % self.p ** n for x in a) != b:
                raise IncompatibleLevels(f"levels {n + 1} -> {n} disagree on {f}")
        return True

    def place_class_exact_zero(self, v: Place, n_check: int) -> bool:
        """Whether [v] is trivial in Gamma, tested at a high level."""
        if v.is_infinite:
            vals = [0 if c.kind != "constant" else 1 for c in self.coords]
            return all(x == 0 for x in vals)
        if self.explicit:
            nmax = max(self.explicit)
            return all(x == 0 for x in self.place_class(v, nmax))
        F = get_field(self.q)
        for c in self.coords:
            if c.kind == "constant":
                return False
            if c.place == v:
                return False
            if c.poly_value(F, v.poly, self.p, n_check) != 0:
                return False
        return True

    def decomposition_group(self, v: Place, n: int) -> list[tuple[int, ...]]:
        """Generators of the image of the decomposition group at v in G_n."""
        lvl = self.level(n)
        G = lvl.group
        gens = [lvl.project(G.class_of_place(v))]
        if any(w == v for w, _ in G.D):
            L = G.locals[[w for w, _ in G.D].index(v)]
            sl = G.local_slice(v)
            for rep in L.gen_reps:
                g = [0] * G.rank
                g[sl] = L.coords(rep)
                gens.append(lvl.project(g))
        return gens

    def sub_tower(self, A: np.ndarray) -> "TowerSpec":
        """The quotient tower cut out by an integer e x d matrix on coordinates."""
        A = np.asarray(A, dtype=np.int64)
        explicit = {}
        for n, lvl in self._levels.items():
            explicit[n] = (lvl.group.D, (A @ lvl.matrix) % self.p ** n)
        return TowerSpec(self.q, self.p, explicit=explicit, S=self.S)


def subgroup_span(gens: Sequence[Sequence[int]], moduli: Sequence[int]) -> set:
    """All elements of the subgroup generated by gens (small groups)."""
    seen = {tuple(0 for _ in moduli)}
    frontier = list(seen)
    while frontier:
        new = []
        for x in frontier:
            for g in gens:
                y = tuple((a + b) % m for a, b, m in zip(x, g, moduli))
                if y not in seen:
                    seen.add(y)
                    new.append(y)
        frontier = new
    return seen


def element_order(g: Sequence[int], p: int, n: int) -> int:
    mod = p ** n
    k = 1
    x = [int(a) % mod for a in g]
    while any(a % mod for a in [k * y for y in x]):
        k *= p
    return k
