"""Recovery of the distinguished generator basis from an arbitrary basic set.

Any family with an invertible linear part generates the algebra and can
present it, at the price of non-primitive coproducts.  This module walks
such a presentation back to the distinguished basis by iterated
corrections with symmetrized polynomials: each stage reads the surviving
coproduct defect at its degree, solves a coboundary equation for the
correction, and rederives every table in the corrected basis.  In the
deformed setting the same walk lands on the almost primitive basis
produced by the quantizer.

A presentation is anchored: every basic element is stored as its
expansion over the reference realization, and all products are computed
there, exactly.  The basic set's own tables are derived views, exact
through the declared degree bound.  Raw tables with no anchor are not
accepted, because primitivizing them would first require reconstructing
the ambient algebra they present.

Corrections are recorded in symmetrized-word coordinates over the
reference generators: a key of degree d with coefficient c stands for c
times the sum of the letter products over all d! arrangements, repeats
counted separately.  Degree starts at two, so every change is invertible
order by order; purely linear reparametrizations are not corrections and
leave nothing for the stages to do.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

from .bialgebra import InputError, LieBialgebra, validate
from .linalg import InconsistentSystem, solve_components
from .quantizer import (
    DeformationResult,
    _key_degsum,
    _monomials_of_degree,
)
from .series import (
    CommutatorTable,
    CoproductExtension,
    CoproductTable,
    OrderingContext,
    Series,
    _key_sort,
    classical_table,
    from_terms,
    gen_mono,
    mono_degree,
    primitive_tensor,
    unit_mono,
)


class PrimitivizationError(Exception):
    """A stage cannot be completed on the given presentation."""

    def __init__(self, stage: int, where: str, detail: str = ""):
        self.stage = stage
        self.where = where
        self.detail = detail
        super().__init__(f"stage {stage}, {where}: {detail}")


@dataclass
class BasisChange:
    """Per-generator corrections in symmetrized-word coordinates.

    ``corrections[i]`` is an arity-1 series; a term z^k * c * m denotes
    c times z^k times the symmetrization of the word of m, summed over
    all arrangements with no 1/d! factor.  ``stage`` is the
    approximation index the change belongs to; a composite carries the
    last stage it absorbed.
    """

    corrections: dict[int, Series] = field(default_factory=dict)
    stage: int = 0

    def is_identity(self) -> bool:
        return all(s.is_zero() for s in self.corrections.values())


def classical_realization(b: LieBialgebra) -> DeformationResult:
    """The undeformed algebra packaged as a depth-zero deformation."""
    report = validate(b)
    if not report.is_valid:
        raise InputError("; ".join(report.violations))
    cops = {i: primitive_tensor(b.n, 0, i) for i in range(b.n)}
    return DeformationResult(
        b, 0, CoproductTable(b.n, 0, cops), classical_table(b, 0)
    )


def _sym_fill(ctx: OrderingContext, letters: dict, m, cache: dict) -> Series:
    hit = cache.get(m)
    if hit is not None:
        return hit
    if mono_degree(m) == 0:
        out = from_terms(ctx.n, 1, ctx.cap, [(0, unit_mono(ctx.n), 1)])
    else:
        out = Series(ctx.n, 1, ctx.cap)
        for j in range(ctx.n):
            if m[j] == 0:
                continue
            below = list(m)
            below[j] -= 1
            part = ctx.multiply(
                _sym_fill(ctx, letters, tuple(below), cache), letters[j]
            )
            out = out + part.scale(m[j])
    cache[m] = out
    return out


def _sym_value(ctx: OrderingContext, letters: dict, m) -> Series:
    """Sum of the letter products of m over all arrangements.

    Arrangements count repeated letters separately, so the leading
    normal-ordered word carries the full d! multiplicity.
    """
    return _sym_fill(ctx, letters, m, {})


def _change_value(ctx: OrderingContext, letters: dict, corr: Series) -> Series:
    out = Series(ctx.n, 1, ctx.cap)
    for k, m, c in corr.terms():
        out = out + _sym_value(ctx, letters, m).zshift(k).scale(c)
    return out


def _generator_series(n: int, cap: int) -> dict:
    return {
        i: from_terms(n, 1, cap, [(0, gen_mono(n, i), 1)]) for i in range(n)
    }


class _SymCoords:
    """Tensor coordinates over symmetrized words of the reference
    generators.

    The classical coproduct of a symmetrized polynomial splits cleanly
    by degree in these coordinates, which is what lets a stage read off
    its own obstruction; in plain normal-ordered words the reordering
    of mixed letters smears every degree over the lower ones.  The
    change of basis is triangular (z-order first, then word degree
    downward), so it is computed by exact elimination.
    """

    def __init__(self, ctx: OrderingContext, letters: dict):
        self.ctx = ctx
        self.n = ctx.n
        self.N = ctx.cap
        self._letters = letters
        self._values: dict = {}
        self._tensors: dict = {}
        self._columns: dict = {}

    def value(self, m) -> Series:
        return _sym_fill(self.ctx, self._letters, m, self._values)

    def _tensor(self, pair) -> dict:
        hit = self._tensors.get(pair)
        if hit is None:
            hit = {}
            left = list(self.value(pair[0]).terms())
            right = list(self.value(pair[1]).terms())
            for ka, u, ca in left:
                for kb, v, cb in right:
                    k = ka + kb
                    if k > self.N:
                        continue
                    key = (k, (u, v))
                    c = hit.get(key, Fraction(0)) + ca * cb
                    if c == 0:
                        hit.pop(key, None)
                    else:
                        hit[key] = c
            self._tensors[pair] = hit
        return hit

    def convert(self, terms) -> dict:
        """Coordinates of an arity-2 element, keyed (z-order, word pair).

        The element must have no unit slots; in particular it must be a
        sum of coproduct footprints.
        """
        unit = unit_mono(self.n)
        residual: dict = {}
        for k, key, c in terms:
            cur = residual.get((k, key), Fraction(0)) + c
            if cur == 0:
                residual.pop((k, key), None)
            else:
                residual[(k, key)] = cur
        out: dict = {}
        for k in range(self.N + 1):
            while True:
                batch = [key for kk, key in residual if kk == k]
                if not batch:
                    break
                key = max(
                    batch, key=lambda p: (mono_degree(p[0]) + mono_degree(p[1]), p)
                )
                w1, w2 = key
                if w1 == unit or w2 == unit:
                    raise ValueError("unit slot survives footprint subtraction")
                mult = factorial(mono_degree(w1)) * factorial(mono_degree(w2))
                coeff = residual[(k, key)] / mult
                out[(k, key)] = out.get((k, key), Fraction(0)) + coeff
                for (dk, dkey), dc in self._tensor(key).items():
                    kk = k + dk
                    if kk > self.N:
                        continue
                    cur = residual.get((kk, dkey), Fraction(0)) - coeff * dc
                    if cur == 0:
                        residual.pop((kk, dkey), None)
                    else:
                        residual[(kk, dkey)] = cur
        return out

    def column(self, s, m) -> dict:
        """Converted footprint of the symmetrized word of m, unshifted.

        Shifting the correction in z shifts the converted footprint the
        same way, so one conversion per word serves every z-order.
        """
        hit = self._columns.get(m)
        if hit is None:
            fp = s.footprint(self.value(m))
            hit = self.convert(list(fp.terms()))
            self._columns[m] = hit
        return hit


def _check_change(p: BasisChange, n: int, N: int, degree) -> None:
    for i in sorted(p.corrections):
        corr = p.corrections[i]
        if corr.arity != 1 or corr.n != n:
            raise InputError(f"correction for generator {i} has the wrong shape")
        for k, m, _c in corr.terms():
            d = mono_degree(m)
            if d < 2:
                raise InputError(
                    f"correction for generator {i} has a degree-{d} term; "
                    "corrections start at degree two"
                )
            if k > N:
                raise InputError(
                    f"correction for generator {i} exceeds the z-order "
                    f"truncation ({k} > {N})"
                )
            if degree is not None and d > degree:
                raise InputError(
                    f"correction for generator {i} exceeds the degree "
                    f"truncation ({d} > {degree})"
                )


class _Rewriter:
    """Coordinates of reference elements over a basic set, through a
    degree bound.

    Basic-set monomials are evaluated in the reference algebra once; a
    target is then matched against them on every term of degree within
    the bound, higher terms being cut.
    """

    def __init__(self, ctx: OrderingContext, expressions: dict, degree: int):
        self.ctx = ctx
        self.n = ctx.n
        self.degree = degree
        unit = unit_mono(ctx.n)
        self._values: dict = {
            unit: from_terms(ctx.n, 1, ctx.cap, [(0, unit, 1)])
        }
        monos = []
        for d in range(1, degree + 1):
            monos.extend(_monomials_of_degree(ctx.n, d))
        for m in monos:
            top = max(j for j in range(ctx.n) if m[j] > 0)
            below = list(m)
            below[top] -= 1
            self._values[m] = ctx.multiply(
                self._values[tuple(below)], expressions[top]
            )
        self.vars = [(k, m) for k in range(ctx.cap + 1) for m in monos]
        self._rows: dict = {}
        for var in self.vars:
            k0, m0 = var
            for j, mono, c in self._values[m0].terms():
                if j + k0 > ctx.cap or mono_degree(mono) > degree:
                    continue
                self._rows.setdefault((j + k0, mono), {})[var] = c
        self._images: dict = {}

    def plain(self, target: Series) -> Series:
        """Rewrite an arity-1 reference element over the basic set.

        Monomial values can become dependent below the bound when a
        letter's coefficients are tuned against the structure constants,
        so a pivot solution is chosen deterministically; a target
        outside their span cannot be tabulated at this bound.
        """
        keys = set(self._rows)
        for j, mono, _c in target.terms():
            if mono_degree(mono) <= self.degree:
                keys.add((j, mono))
        rows = [
            (self._rows.get(key, {}), target.coefficient(*key))
            for key in sorted(keys, key=lambda p: (p[0], _key_sort(p[1])))
        ]
        try:
            particular, _kernel, _parts = solve_components(self.vars, rows)
        except InconsistentSystem:
            raise InputError(
                "element is not expressible over the basic set within "
                f"degree {self.degree}"
            ) from None
        out = Series(self.n, 1, self.ctx.cap)
        for (k, m), c in particular.items():
            out._add_term(k, m, c)
        return out

    def _mono_image(self, mono) -> Series:
        hit = self._images.get(mono)
        if hit is None:
            hit = self.plain(
                from_terms(self.n, 1, self.ctx.cap, [(0, mono, 1)])
            )
            self._images[mono] = hit
        return hit

    def tensor(self, target: Series) -> Series:
        """Rewrite an arity-2 element slot by slot, keeping slot-degree
        sums within the bound."""
        unit = unit_mono(self.n)
        unit_series = from_terms(self.n, 1, self.ctx.cap, [(0, unit, 1)])
        out = Series(self.n, 2, self.ctx.cap)
        for k, (m1, m2), c in target.terms():
            left = unit_series if m1 == unit else self._mono_image(m1)
            right = unit_series if m2 == unit else self._mono_image(m2)
            for k1, w1, c1 in left.terms():
                for k2, w2, c2 in right.terms():
                    if mono_degree(w1) + mono_degree(w2) > self.degree:
                        continue
                    out._add_term(k + k1 + k2, (w1, w2), c * c1 * c2)
        return out


class BasicSetPresentation:
    """A generating set presented through its own coproduct and
    commutator tables.

    The tables are written in the PBW monomials of the basic set itself
    and are derived from the anchor: ``reference`` (the realization the
    set lives in) and ``expressions`` (each basic element expanded over
    the reference generators).  They reproduce the anchored values
    exactly through ``degree``; z-truncation is inherited from the
    reference.  A classical presentation is one whose reference has
    N = 0.  All recovery arithmetic runs on the anchor, so the
    presentation can be primitivized even when its own monomials fail
    to span a table entry at this degree bound.
    """

    def __init__(self, reference: DeformationResult, expressions: dict, degree: int):
        b = reference.bialgebra
        if degree < 2:
            raise InputError("the degree truncation must be at least two")
        self.bialgebra = b
        self.reference = reference
        self.N = reference.N
        self.degree = degree
        self.expressions = {i: expressions[i].copy() for i in range(b.n)}
        unit = unit_mono(b.n)
        lin_rows = []
        for i in range(b.n):
            e = self.expressions[i]
            if e.arity != 1 or e.n != b.n:
                raise InputError(f"expression for generator {i} has the wrong shape")
            if any(e.coefficient(k, unit) != 0 for k in range(self.N + 1)):
                raise InputError(f"basic element {i} contains a constant term")
            lin_rows.append((
                {j: e.coefficient(0, gen_mono(b.n, j)) for j in range(b.n)},
                Fraction(0),
            ))
        _p, kern, _c = solve_components(list(range(b.n)), lin_rows)
        if kern:
            raise InputError(
                "the proposed set is not basic: its linear part is singular"
            )
        self._ctx = OrderingContext(b.n, self.N, reference.commutators.entries)
        self._ext = CoproductExtension(self._ctx, reference.coproducts.entries)
        self._mixed_ref = {
            i: reference.coproducts.entry(i) - primitive_tensor(b.n, self.N, i)
            for i in range(b.n)
        }
        self._rw = None
        self._cops = None
        self._comms = None

    @classmethod
    def _successor(cls, parent: "BasicSetPresentation", expressions: dict):
        """Waypoint of a stage iteration, sharing the parent's anchor.

        A partially corrected set can lose linear invertibility even
        between two honest endpoints, so successors skip the basicness
        checks; all arithmetic stays in reference coordinates anyway.
        """
        out = object.__new__(cls)
        out.bialgebra = parent.bialgebra
        out.reference = parent.reference
        out.N = parent.N
        out.degree = parent.degree
        out.expressions = {
            i: expressions[i].copy() for i in range(parent.bialgebra.n)
        }
        out._ctx = parent._ctx
        out._ext = parent._ext
        out._mixed_ref = parent._mixed_ref
        out._rw = None
        out._cops = None
        out._comms = None
        return out

    @property
    def _rewriter(self) -> _Rewriter:
        if self._rw is None:
            self._rw = _Rewriter(self._ctx, self.expressions, self.degree)
        return self._rw

    @property
    def coproducts(self) -> CoproductTable:
        """Coproduct table over the basic set's own monomials, derived
        on first use; built lazily because a degenerately tuned set may
        not span its own tables even when it can be primitivized."""
        if self._cops is None:
            self._cops = CoproductTable(
                self.bialgebra.n,
                self.N,
                {
                    i: self._rewriter.tensor(self._ext.of_series(self.expressions[i]))
                    for i in range(self.bialgebra.n)
                },
            )
        return self._cops

    @property
    def commutators(self) -> CommutatorTable:
        if self._comms is None:
            n = self.bialgebra.n
            self._comms = CommutatorTable(
                n,
                self.N,
                {
                    (i, j): self._rewriter.plain(
                        self._ctx.commutator(self.expressions[i], self.expressions[j])
                    )
                    for i in range(n)
                    for j in range(i + 1, n)
                },
            )
        return self._comms

    def is_classical(self) -> bool:
        return self.N == 0

    def footprint(self, v: Series) -> Series:
        """Coproduct deviation of a reference element from the canonical
        pattern of its linear part.

        Linear in v; zero exactly when v behaves like a linear
        combination of the distinguished generators.
        """
        n = self.bialgebra.n
        u = unit_mono(n)
        out = self._ext.of_series(v)
        for k, m, c in v.terms():
            out._add_term(k, (m, u), -c)
            out._add_term(k, (u, m), -c)
        for j in range(n):
            for k in range(self.N + 1):
                a = v.coefficient(k, gen_mono(n, j))
                if a != 0:
                    out = out - self._mixed_ref[j].zshift(k).scale(a)
        return out

    def defect(self, i: int) -> Series:
        """Coproduct defect of one basic element, over the reference
        basis."""
        return self.footprint(self.expressions[i])


def perturb_basis(r, p: BasisChange, degree: int | None = None) -> BasicSetPresentation:
    """Presentation of the basic set obtained by adding ``p`` to the
    reference generators.

    Forward fixture builder: the corrections are symmetrized polynomials
    in the reference generators, and the new set's tables come out by
    substitution and normal ordering.  Classical input may be given as a
    bare algebra.  A correction past the z-order or degree truncation is
    an input error.
    """
    if isinstance(r, LieBialgebra):
        r = classical_realization(r)
    n = r.bialgebra.n
    _check_change(p, n, r.N, degree)
    ctx = OrderingContext(n, r.N, r.commutators.entries)
    gens = _generator_series(n, r.N)
    exprs = {}
    for i in range(n):
        e = gens[i].copy()
        corr = p.corrections.get(i)
        if corr is not None and not corr.is_zero():
            e = e + _change_value(ctx, gens, corr)
        exprs[i] = e
    if degree is None:
        ext = CoproductExtension(ctx, r.coproducts.entries)
        degree = 2
        for i in range(n):
            for _k, key, _c in ext.of_series(exprs[i]).terms():
                degree = max(degree, _key_degsum(key))
    return BasicSetPresentation(r, exprs, degree)


def _sym_coords(s: BasicSetPresentation) -> _SymCoords:
    co = getattr(s, "_symco", None)
    if co is None:
        co = _SymCoords(s._ctx, _generator_series(s.bialgebra.n, s.N))
        s._symco = co
    return co


def _joint_solve(s: BasicSetPresentation, i: int, m: int) -> dict:
    """Symmetrized coordinates of the full correction for one generator.

    The defect and the candidate coboundaries are compared in
    symmetrized tensor coordinates over every key at once.  Degrees
    cannot be solved one at a time in the deformed case: normal
    ordering against the reference tables lets a correction of one
    degree leave same- and lower-degree footprints at deeper z-orders,
    so the degrees and z-orders form a single coupled system.  Its
    solution is unique; the stage index m only labels errors.
    """
    name = s.bialgebra.names[i]
    unit = unit_mono(s.bialgebra.n)
    diff = s.defect(i)
    terms = list(diff.terms())
    for k, key, _c in terms:
        if key[0] == unit or key[1] == unit:
            raise PrimitivizationError(
                m,
                f"generator {name}",
                f"unit-slot obstruction at z^{k}, slots {key}: "
                "coassociativity forces these coefficients to vanish",
            )
    co = _sym_coords(s)
    targets = co.convert(terms)
    if not targets:
        return {}
    variables = []
    columns = {}
    for d in range(2, s.degree + 1):
        for mono in _monomials_of_degree(s.bialgebra.n, d):
            base = co.column(s, mono)
            for j in range(s.N + 1):
                col = {
                    (k + j, key): c for (k, key), c in base.items() if k + j <= s.N
                }
                if col:
                    variables.append((j, mono))
                    columns[(j, mono)] = col
    keyset = set(targets)
    for col in columns.values():
        keyset.update(col)
    rows = [
        (
            {var: columns[var][key] for var in variables if key in columns[var]},
            targets.get(key, Fraction(0)),
        )
        for key in sorted(keyset, key=lambda p: (p[0], _key_sort(p[1])))
    ]
    try:
        particular, kernel, _parts = solve_components(variables, rows)
    except InconsistentSystem:
        raise PrimitivizationError(
            m,
            f"generator {name}",
            "the defect is not the coboundary of any symmetrized "
            "polynomial; the input does not present an enveloping algebra",
        ) from None
    assert not kernel, "symmetrized coboundaries are independent above degree one"
    return {var: c for var, c in particular.items() if c != 0}


def primitivize_step(s: BasicSetPresentation, m: int):
    """One stage: remove the degree-(m + 1) part of every correction.

    Solves the coboundary equation per generator, takes the
    degree-(m + 1) component of the solution, subtracts its symmetrized
    value from the basic elements, and rederives the tables.  Defect
    components the reference realization itself carries are not defects
    and stay.  Returns the stage change and the updated presentation; a
    stage with nothing to do returns an identity change and the
    presentation untouched.  A solution component below the stage means
    an earlier stage was skipped and is an error.
    """
    if m < 1:
        raise ValueError("stages start at one")
    n = s.bialgebra.n
    corrections = {}
    for i in range(n):
        sol = _joint_solve(s, i, m)
        corr = Series(n, 1, s.N)
        for (j, mono), c in sol.items():
            d = mono_degree(mono)
            if d <= m:
                raise PrimitivizationError(
                    m,
                    f"generator {s.bialgebra.names[i]}",
                    f"the defect needs a degree-{d} correction, already "
                    "behind this stage; stages must run in increasing order",
                )
            if d == m + 1:
                corr._add_term(j, mono, c)
        if not corr.is_zero():
            corrections[i] = corr
    if not corrections:
        return BasisChange({}, m), s
    gens = _generator_series(n, s.N)
    new_exprs = {}
    for i in range(n):
        e = s.expressions[i]
        corr = corrections.get(i)
        if corr is not None:
            e = e - _change_value(s._ctx, gens, corr)
        new_exprs[i] = e
    change = BasisChange(corrections, m)
    out = BasicSetPresentation._successor(s, new_exprs)
    out._symco = _sym_coords(s)
    return change, out


def primitivize(s: BasicSetPresentation, M: int | None = None):
    """Iterate stages 1..M and compose the changes.

    Classically the final presentation is primitive through the degrees
    the stages cover; in the deformed case it coincides with the
    quantizer's almost primitive basis there.  Returns the composite
    change and the final presentation.  Stage errors propagate with
    their stage index.  With no explicit M the stages run to the degree
    truncation, far enough for every correction the presentation can
    carry.
    """
    if M is None:
        M = max(1, s.degree - 1)
    if M < 1:
        raise ValueError("at least one stage is required")
    cur = s
    total: dict[int, Series] = {}
    for m in range(1, M + 1):
        change, cur = primitivize_step(cur, m)
        for i, corr in change.corrections.items():
            if i in total:
                total[i] = total[i] + corr
            else:
                total[i] = corr.copy()
    composite = BasisChange(
        {i: total[i] for i in sorted(total) if not total[i].is_zero()}, M
    )
    return composite, cur
