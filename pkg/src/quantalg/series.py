"""Exact truncated series over a PBW basis.

Elements live in U(g)[[z]] / z^(N+1) or in tensor squares and cubes of it.
Monomials are exponent tuples over a fixed ordered generator set, so a
monomial is always normally ordered by construction.  All coefficients are
rationals, never floats.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product as _iproduct
from typing import Iterator


Mono = tuple[int, ...]


def mono_degree(m: Mono) -> int:
    return sum(m)


def mono_word(m: Mono) -> tuple[int, ...]:
    """Expand an exponent tuple into the ascending list of generator indices."""
    out = []
    for i, e in enumerate(m):
        out.extend([i] * e)
    return tuple(out)


def unit_mono(n: int) -> Mono:
    return (0,) * n


def gen_mono(n: int, i: int) -> Mono:
    return tuple(1 if j == i else 0 for j in range(n))


def _key_sort(key) -> tuple:
    # plain monomials sort by (degree, exponents); tensor keys by slot degrees
    # then slotwise exponents, so renderings are stable.
    if key and isinstance(key[0], tuple):
        return (tuple(mono_degree(s) for s in key), key)
    return (mono_degree(key), key)


class PBWMonomial:
    """A single basis word with a rational coefficient, mostly for display."""

    __slots__ = ("exponents", "coefficient")

    def __init__(self, exponents: Mono, coefficient: Fraction = Fraction(1)):
        self.exponents = tuple(exponents)
        self.coefficient = Fraction(coefficient)

    def __repr__(self):
        return f"PBWMonomial({self.exponents}, {self.coefficient})"

    def __eq__(self, other):
        return (
            isinstance(other, PBWMonomial)
            and self.exponents == other.exponents
            and self.coefficient == other.coefficient
        )


class Series:
    """z-graded element with plain or tensor keys.

    ``data`` maps z-order -> { key -> coefficient } where a key is an
    exponent tuple (arity 1) or a tuple of 2 or 3 exponent tuples.  Zero
    coefficients are never stored.
    """

    __slots__ = ("n", "arity", "cap", "degree_cap", "data")

    def __init__(self, n: int, arity: int, cap: int, data=None, degree_cap=None):
        self.n = n
        self.arity = arity
        self.cap = cap
        # when set, the element lives in the polynomial-degree truncation
        # regime (basis work) rather than the z-order regime; metadata only
        self.degree_cap = degree_cap
        self.data: dict[int, dict] = {}
        if data:
            for k, sl in data.items():
                if k > cap:
                    continue
                for key, c in sl.items():
                    self._add_term(k, key, c)

    def _add_term(self, k: int, key, c) -> None:
        if k > self.cap or c == 0:
            return
        sl = self.data.setdefault(k, {})
        nc = sl.get(key, Fraction(0)) + c
        if nc == 0:
            sl.pop(key, None)
            if not sl:
                del self.data[k]
        else:
            sl[key] = nc

    def copy(self) -> "Series":
        out = Series(self.n, self.arity, self.cap, degree_cap=self.degree_cap)
        out.data = {k: dict(sl) for k, sl in self.data.items()}
        return out

    def is_zero(self) -> bool:
        return not self.data

    def terms(self) -> Iterator[tuple[int, object, Fraction]]:
        """Canonical iteration: z ascending, then key order."""
        for k in sorted(self.data):
            sl = self.data[k]
            for key in sorted(sl, key=_key_sort):
                yield k, key, sl[key]

    def slice(self, k: int) -> dict:
        return dict(self.data.get(k, {}))

    def max_order(self) -> int:
        return max(self.data) if self.data else -1

    def coefficient(self, k: int, key) -> Fraction:
        return self.data.get(k, {}).get(key, Fraction(0))

    def __add__(self, other: "Series") -> "Series":
        assert self.arity == other.arity and self.n == other.n
        out = self.copy()
        for k, sl in other.data.items():
            for key, c in sl.items():
                out._add_term(k, key, c)
        return out

    def __sub__(self, other: "Series") -> "Series":
        return self + other.scale(Fraction(-1))

    def scale(self, c) -> "Series":
        c = Fraction(c)
        out = Series(self.n, self.arity, self.cap, degree_cap=self.degree_cap)
        if c == 0:
            return out
        for k, sl in self.data.items():
            out.data[k] = {key: v * c for key, v in sl.items()}
        return out

    def zshift(self, j: int) -> "Series":
        """Multiply by z^j, dropping what falls past the cap."""
        out = Series(self.n, self.arity, self.cap, degree_cap=self.degree_cap)
        for k, sl in self.data.items():
            if k + j <= self.cap:
                out.data[k + j] = dict(sl)
        return out

    def truncate(self, cap: int) -> "Series":
        out = Series(self.n, self.arity, cap, degree_cap=self.degree_cap)
        for k, sl in self.data.items():
            if k <= cap:
                out.data[k] = dict(sl)
        return out

    def flip(self) -> "Series":
        assert self.arity == 2
        out = Series(self.n, 2, self.cap, degree_cap=self.degree_cap)
        for k, sl in self.data.items():
            for (a, b), c in sl.items():
                out._add_term(k, (b, a), c)
        return out

    def parity_project(self, sign: int) -> "Series":
        """Component with flip eigenvalue ``sign`` (+1 or -1), arity 2."""
        half = Fraction(1, 2)
        fl = self.flip()
        return (self + fl.scale(sign)).scale(half)

    def degree_filter(self, pred) -> "Series":
        out = Series(self.n, self.arity, self.cap)
        for k, sl in self.data.items():
            for key, c in sl.items():
                d = (
                    mono_degree(key)
                    if self.arity == 1
                    else sum(mono_degree(s) for s in key)
                )
                if pred(k, d):
                    out._add_term(k, key, c)
        return out

    def __eq__(self, other):
        return (
            isinstance(other, Series)
            and self.arity == other.arity
            and self.n == other.n
            and self.data == other.data
        )

    def __repr__(self):
        parts = [f"z^{k}*{c}*{key}" for k, key, c in self.terms()]
        return "Series[" + " + ".join(parts[:8]) + ("..." if len(parts) > 8 else "") + "]"


def from_terms(n: int, arity: int, cap: int, terms) -> Series:
    out = Series(n, arity, cap)
    for k, key, c in terms:
        out._add_term(k, key, Fraction(c))
    return out


class OrderingContext:
    """Normal-ordering engine for one commutator table.

    The table maps (i, j) with i < j to the z-graded expansion of the
    bracket of generators i and j.  Rewriting x_i x_j -> x_j x_i + [x_i, x_j]
    for i > j terminates because every table entry at z^k has polynomial
    degree at most k + 1, which the constructor checks and rejects otherwise:
    each rewrite either lowers the inversion count at fixed degree and z-order
    or spends z-budget, and the budget is finite.
    """

    def __init__(self, n: int, cap: int, table, degree_cap: int | None = None):
        self.n = n
        self.cap = cap
        self.degree_cap = degree_cap
        if hasattr(table, "entries"):
            table = table.entries
        self.table: dict[tuple[int, int], Series] = {}
        for (i, j), s in table.items():
            if not (0 <= i < j < n):
                raise ValueError(f"table key ({i},{j}) must have i < j")
            if s.arity != 1:
                raise ValueError("table entries must have arity 1")
            for k, key, _c in s.terms():
                if mono_degree(key) > k + 1:
                    raise ValueError(
                        f"table entry ({i},{j}) has degree {mono_degree(key)} at "
                        f"z^{k}; normal ordering would not terminate"
                    )
            self.table[(i, j)] = s.truncate(cap)
        self._mul_gen_cache: dict[tuple[Mono, int], Series] = {}
        self._mono_mul_cache: dict[tuple[Mono, Mono], Series] = {}

    def bracket_gens(self, i: int, j: int) -> Series:
        """[x_i, x_j] as a series, any index order."""
        if i == j:
            return Series(self.n, 1, self.cap)
        if i < j:
            s = self.table.get((i, j))
            return s.copy() if s else Series(self.n, 1, self.cap)
        s = self.table.get((j, i))
        return s.scale(-1) if s else Series(self.n, 1, self.cap)

    def _keep(self, m: Mono) -> bool:
        return self.degree_cap is None or mono_degree(m) <= self.degree_cap

    def mono_times_gen(self, m: Mono, j: int) -> Series:
        """Normally order m * x_j."""
        cached = self._mul_gen_cache.get((m, j))
        if cached is not None:
            return cached
        top = -1
        for i in range(self.n - 1, j, -1):
            if m[i] > 0:
                top = i
                break
        if top < 0:
            lifted = list(m)
            lifted[j] += 1
            out = Series(self.n, 1, self.cap)
            lm = tuple(lifted)
            if self._keep(lm):
                out._add_term(0, lm, Fraction(1))
        else:
            rest = list(m)
            rest[top] -= 1
            rest_m = tuple(rest)
            # m x_j = rest x_top x_j = (rest x_j) x_top + rest [x_top, x_j]
            out = self.poly_times_gen(self.mono_times_gen(rest_m, j), top)
            out = out + self.mono_times_series(rest_m, self.bracket_gens(top, j))
        self._mul_gen_cache[(m, j)] = out
        return out

    def poly_times_gen(self, p: Series, j: int) -> Series:
        out = Series(self.n, 1, self.cap)
        for k, m, c in p.terms():
            prod = self.mono_times_gen(m, j)
            for k2, m2, c2 in prod.terms():
                out._add_term(k + k2, m2, c * c2)
        return out

    def mono_times_mono(self, a: Mono, b: Mono) -> Series:
        cached = self._mono_mul_cache.get((a, b))
        if cached is not None:
            return cached
        out = from_terms(self.n, 1, self.cap, [(0, a, 1)]) if self._keep(a) else Series(self.n, 1, self.cap)
        for j in mono_word(b):
            out = self.poly_times_gen(out, j)
        self._mono_mul_cache[(a, b)] = out
        return out

    def mono_times_series(self, a: Mono, s: Series) -> Series:
        out = Series(self.n, 1, self.cap)
        for k, m, c in s.terms():
            prod = self.mono_times_mono(a, m)
            for k2, m2, c2 in prod.terms():
                out._add_term(k + k2, m2, c * c2)
        return out

    def multiply(self, p: Series, q: Series) -> Series:
        """Product of arity-1 series, normally ordered."""
        assert p.arity == 1 and q.arity == 1
        out = Series(self.n, 1, self.cap)
        for k1, m1, c1 in p.terms():
            for k2, m2, c2 in q.terms():
                if k1 + k2 > self.cap:
                    continue
                prod = self.mono_times_mono(m1, m2)
                for k3, m3, c3 in prod.terms():
                    out._add_term(k1 + k2 + k3, m3, c1 * c2 * c3)
        return out

    def commutator(self, p: Series, q: Series) -> Series:
        return self.multiply(p, q) - self.multiply(q, p)

    def tensor_multiply(self, p: Series, q: Series) -> Series:
        """Slotwise product of tensor series of equal arity."""
        assert p.arity == q.arity and p.arity in (2, 3)
        ar = p.arity
        out = Series(self.n, ar, self.cap)
        for k1, key1, c1 in p.terms():
            for k2, key2, c2 in q.terms():
                if k1 + k2 > self.cap:
                    continue
                budget = self.cap - k1 - k2
                slot_prods = [
                    self.mono_times_mono(key1[s], key2[s]).truncate(budget)
                    for s in range(ar)
                ]
                base = c1 * c2
                items = [list(sp.terms()) for sp in slot_prods]
                for combo in _iproduct(*items):
                    kz = k1 + k2 + sum(t[0] for t in combo)
                    if kz > self.cap:
                        continue
                    key = tuple(t[1] for t in combo)
                    coef = base
                    for t in combo:
                        coef *= t[2]
                    out._add_term(kz, key, coef)
        return out

    def tensor_commutator(self, p: Series, q: Series) -> Series:
        return self.tensor_multiply(p, q) - self.tensor_multiply(q, p)


def primitive_tensor(n: int, cap: int, i: int) -> Series:
    """x_i (x) 1 + 1 (x) x_i."""
    u = unit_mono(n)
    g = gen_mono(n, i)
    return from_terms(n, 2, cap, [(0, (g, u), 1), (0, (u, g), 1)])


def classical_coproduct_mono(n: int, cap: int, m: Mono) -> Series:
    """Undeformed coproduct of a PBW monomial via binomial splitting.

    Valid because the splitting never reorders anything: each slot keeps the
    ascending generator order.
    """
    out = Series(n, 2, cap)
    ranges = [range(e + 1) for e in m]
    for split in _iproduct(*ranges):
        coef = Fraction(1)
        for e, s in zip(m, split):
            coef *= _binom(e, s)
        left = tuple(split)
        right = tuple(e - s for e, s in zip(m, split))
        out._add_term(0, (left, right), coef)
    return out


def _binom(nn: int, kk: int) -> int:
    num, den = 1, 1
    for t in range(kk):
        num *= nn - t
        den *= t + 1
    return num // den


class CoproductExtension:
    """Extends generator coproducts multiplicatively to all monomials.

    Snapshots the coproduct table at construction; callers rebuild after the
    table changes.  Extension of a monomial is the ordered product of the
    generator coproducts, computed slotwise in the ordering context.
    """

    def __init__(self, ctx: OrderingContext, coproducts: dict[int, Series]):
        self.ctx = ctx
        self.n = ctx.n
        self.cap = ctx.cap
        self.coproducts = {i: s.truncate(ctx.cap) for i, s in coproducts.items()}
        self._cache: dict[Mono, Series] = {}

    def of_mono(self, m: Mono) -> Series:
        cached = self._cache.get(m)
        if cached is not None:
            return cached
        word = mono_word(m)
        if not word:
            u = unit_mono(self.n)
            out = from_terms(self.n, 2, self.cap, [(0, (u, u), 1)])
        else:
            half = len(word) // 2
            if half == 0:
                out = self.coproducts[word[0]].copy()
            else:
                left = m_of_word(self.n, word[:half])
                right = m_of_word(self.n, word[half:])
                out = self.ctx.tensor_multiply(self.of_mono(left), self.of_mono(right))
        self._cache[m] = out
        return out

    def of_series(self, p: Series) -> Series:
        assert p.arity == 1
        out = Series(self.n, 2, self.cap)
        for k, m, c in p.terms():
            ext = self.of_mono(m)
            for k2, key, c2 in ext.terms():
                out._add_term(k + k2, key, c * c2)
        return out

    def on_slot(self, t: Series, slot: int) -> Series:
        """Apply the coproduct to one slot of an arity-2 series, yielding arity 3."""
        assert t.arity == 2 and slot in (0, 1)
        out = Series(self.n, 3, self.cap)
        for k, (a, b), c in t.terms():
            ext = self.of_mono(a if slot == 0 else b)
            for k2, (u, v), c2 in ext.terms():
                key = (u, v, b) if slot == 0 else (a, u, v)
                out._add_term(k + k2, key, c * c2)
        return out

    def coassociativity_residual(self, i: int) -> Series:
        """(coproduct (x) id - id (x) coproduct) applied to generator i."""
        d = self.coproducts[i]
        return self.on_slot(d, 0) - self.on_slot(d, 1)


def m_of_word(n: int, word) -> Mono:
    m = [0] * n
    for j in word:
        m[j] += 1
    return tuple(m)


def counit_residual(n: int, cap: int, i: int, cop: Series) -> Series:
    """(eps (x) id) of the coproduct minus the generator itself, arity 1.

    Symmetric check on the right slot is the flip of the same computation
    only when the table is flip-stable, so both sides are returned summed
    into a single residual by the caller if needed.
    """
    u = unit_mono(n)
    out = Series(n, 1, cap)
    for k, (a, b), c in cop.terms():
        if a == u:
            out._add_term(k, b, c)
    g = gen_mono(n, i)
    out._add_term(0, g, Fraction(-1))
    return out


class TruncationMismatch(ValueError):
    pass


class CommutatorTable:
    """All generator brackets as z-graded series, keyed (i, j) with i < j."""

    def __init__(self, n: int, cap: int, entries: dict):
        self.n = n
        self.cap = cap
        self.entries: dict[tuple[int, int], Series] = {}
        for (i, j), s in entries.items():
            if not (0 <= i < j < n):
                raise ValueError(f"table key ({i},{j}) must have 0 <= i < j < n")
            if not s.is_zero():
                self.entries[(i, j)] = s.truncate(cap)

    def entry(self, i: int, j: int) -> Series:
        if i == j:
            return Series(self.n, 1, self.cap)
        if i > j:
            return self.entry(j, i).scale(-1)
        s = self.entries.get((i, j))
        return s.copy() if s else Series(self.n, 1, self.cap)

    def copy(self) -> "CommutatorTable":
        return CommutatorTable(self.n, self.cap, {k: s.copy() for k, s in self.entries.items()})

    def truncate(self, cap: int) -> "CommutatorTable":
        return CommutatorTable(self.n, cap, self.entries)

    def grading_violations(self) -> list[str]:
        """Entries whose z^k part exceeds polynomial degree k + 1."""
        out = []
        for (i, j), s in sorted(self.entries.items()):
            for k, m, _c in s.terms():
                if mono_degree(m) > k + 1:
                    out.append(f"entry ({i},{j}): degree {mono_degree(m)} at z^{k}")
        return out

    def __eq__(self, other):
        return (
            isinstance(other, CommutatorTable)
            and self.n == other.n
            and {k: s for k, s in self.entries.items()}
            == {k: s for k, s in other.entries.items()}
        )


class CoproductTable:
    """Generator coproducts as arity-2 series, keyed by generator index."""

    def __init__(self, n: int, cap: int, entries: dict):
        self.n = n
        self.cap = cap
        self.entries: dict[int, Series] = {}
        for i, s in entries.items():
            if not 0 <= i < n:
                raise ValueError(f"coproduct key {i} out of range")
            self.entries[i] = s.truncate(cap)

    def entry(self, i: int) -> Series:
        return self.entries[i].copy()

    def copy(self) -> "CoproductTable":
        return CoproductTable(self.n, self.cap, {k: s.copy() for k, s in self.entries.items()})

    def truncate(self, cap: int) -> "CoproductTable":
        return CoproductTable(self.n, cap, self.entries)

    @classmethod
    def primitive(cls, n: int, cap: int) -> "CoproductTable":
        return cls(n, cap, {i: primitive_tensor(n, cap, i) for i in range(n)})

    def __eq__(self, other):
        return (
            isinstance(other, CoproductTable)
            and self.n == other.n
            and self.entries == other.entries
        )


def classical_table(b, cap: int) -> CommutatorTable:
    """The z-free commutator table of a Lie (bi)algebra's structure constants."""
    entries = {}
    for (i, j), coeffs in b.structure.items():
        s = Series(b.n, 1, cap)
        for t, c in coeffs.items():
            s._add_term(0, gen_mono(b.n, t), c)
        entries[(i, j)] = s
    return CommutatorTable(b.n, cap, entries)


def _gen_index(g) -> int:
    return g.index if hasattr(g, "index") else int(g)


def _ctx_for(table, cap: int, n: int | None = None) -> OrderingContext:
    if isinstance(table, CommutatorTable):
        if cap > table.cap:
            raise TruncationMismatch(
                f"need z-order {cap} but table holds {table.cap}"
            )
        return OrderingContext(table.n, cap, table.entries)
    entries = dict(table)
    if n is None:
        if not entries:
            raise ValueError("cannot infer generator count from an empty table")
        n = next(iter(entries.values())).n
    return OrderingContext(n, cap, entries)


def normal_order(word, table, N: int) -> Series:
    """PBW-normal form of a product of generators, exact to z-order N."""
    idxs = [_gen_index(g) for g in word]
    n = table.n if isinstance(table, CommutatorTable) else None
    if n is None:
        n = (
            next(iter(table.values())).n
            if table
            else (max(idxs) + 1 if idxs else 1)
        )
    ctx = _ctx_for(table, N, n)
    out = from_terms(n, 1, N, [(0, unit_mono(n), 1)])
    for j in idxs:
        out = ctx.poly_times_gen(out, j)
    return out


def multiply(a: Series, b: Series, table) -> Series:
    if a.cap != b.cap:
        raise TruncationMismatch(f"truncations differ: {a.cap} vs {b.cap}")
    return _ctx_for(table, a.cap, a.n).multiply(a, b)


def tensor_multiply(a: Series, b: Series, table) -> Series:
    if a.cap != b.cap:
        raise TruncationMismatch(f"truncations differ: {a.cap} vs {b.cap}")
    return _ctx_for(table, a.cap, a.n).tensor_multiply(a, b)


def flip(t: Series) -> Series:
    return t.flip()


def extend_coproduct(m, cop, table) -> Series:
    """Coproduct of a PBW monomial, multiplicative extension."""
    coeff = Fraction(1)
    if isinstance(m, PBWMonomial):
        coeff = m.coefficient
        m = m.exponents
    entries = cop.entries if isinstance(cop, CoproductTable) else dict(cop)
    cap = cop.cap if isinstance(cop, CoproductTable) else next(iter(entries.values())).cap
    if isinstance(table, CommutatorTable) and isinstance(cop, CoproductTable):
        if table.cap < cop.cap:
            raise TruncationMismatch(
                f"coproduct truncation {cop.cap} exceeds table truncation {table.cap}"
            )
    n = len(m)
    ext = CoproductExtension(_ctx_for(table, cap, n), entries)
    return ext.of_mono(tuple(m)).scale(coeff)


def coassociativity_residual(cop, table, i, k: int) -> Series:
    """z^k slice of the two-sided coproduct extension mismatch on generator i."""
    idx = _gen_index(i)
    entries = cop.entries if isinstance(cop, CoproductTable) else dict(cop)
    cap = cop.cap if isinstance(cop, CoproductTable) else next(iter(entries.values())).cap
    if k > cap:
        raise TruncationMismatch(f"z-order {k} exceeds coproduct truncation {cap}")
    n = next(iter(entries.values())).n
    ext = CoproductExtension(_ctx_for(table, cap, n), entries)
    full = ext.coassociativity_residual(idx)
    out = Series(n, 3, cap)
    for key, c in full.slice(k).items():
        out._add_term(k, key, c)
    return out
