"""Order-by-order deformation of a Lie bialgebra into its quantum algebra.

The coproduct at each z-order is fixed by coassociativity, the commutator
corrections by the homomorphism property, and leftover freedom by the
analytic gauge described in the module functions below.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from itertools import combinations_with_replacement

from .bialgebra import LieBialgebra, validate
from .linalg import (
    InconsistentSystem,
    LinearSystem,
    dot,
    project_off_kernel,
    solve_components,
)
from .series import (
    CommutatorTable,
    CoproductExtension,
    CoproductTable,
    OrderingContext,
    Series,
    _key_sort,
    classical_coproduct_mono,
    classical_table,
    counit_residual,
    from_terms,
    gen_mono,
    m_of_word,
    mono_degree,
    primitive_tensor,
    unit_mono,
)


class QuantizationObstruction(Exception):
    """No solution exists at some order; carries the failing context."""

    def __init__(self, order: int, where: str, detail: str = ""):
        msg = f"obstruction at z^{order} ({where})"
        if detail:
            msg += ": " + detail
        super().__init__(msg)
        self.order = order
        self.where = where


@dataclass
class OrderDiagnostics:
    """Solver bookkeeping for one z-order."""

    order: int
    coproduct_kernel: dict[int, int] = field(default_factory=dict)
    gauge_directions: int = 0
    constrained_directions: int = 0
    residuals_zero: bool = True

    def render(self) -> str:
        parts = [f"order {self.order}"]
        if self.coproduct_kernel:
            per = ",".join(
                f"{g}:{d}" for g, d in sorted(self.coproduct_kernel.items())
            )
            parts.append(f"coproduct kernel dims {per}")
        parts.append(f"gauge directions {self.gauge_directions}")
        if self.constrained_directions:
            parts.append(
                f"consistency-pinned directions {self.constrained_directions}"
            )
        parts.append("residuals zero" if self.residuals_zero else "RESIDUALS NONZERO")
        return "; ".join(parts)


@dataclass
class DeformationResult:
    bialgebra: LieBialgebra
    N: int
    coproducts: CoproductTable
    commutators: CommutatorTable
    diagnostics: list[OrderDiagnostics] = field(default_factory=list)
    gauge: str = "analytic"

    def copy(self) -> "DeformationResult":
        return DeformationResult(
            self.bialgebra,
            self.N,
            self.coproducts.copy(),
            self.commutators.copy(),
            list(self.diagnostics),
            self.gauge,
        )


def init_deformation(b: LieBialgebra, N: int) -> DeformationResult:
    """Seed the deformation: primitive coproducts plus the z-weighted
    cocommutator, commutators at their classical values."""
    report = validate(b)
    if not report.is_valid:
        raise QuantizationObstruction(0, "input", "; ".join(report.violations))
    if N < 1:
        raise ValueError("truncation order must be at least 1")
    cops = {}
    for i in range(b.n):
        s = primitive_tensor(b.n, N, i)
        for (a, c), q in b.delta_tensor(i).items():
            s._add_term(1, (gen_mono(b.n, a), gen_mono(b.n, c)), q)
        cops[i] = s
    return DeformationResult(
        b, N, CoproductTable(b.n, N, cops), classical_table(b, N)
    )


def verify_hopf(r: DeformationResult) -> list[str]:
    """Recheck the finished tables from scratch.

    Covers coassociativity of every generator at every order, the
    homomorphism property of every commutator entry, both counit slots,
    and the flip parity of each coproduct slice.  Returns one line per
    nonzero residual; empty means every axiom holds exactly.
    """
    out: list[str] = []
    n, N = r.bialgebra.n, r.N
    names = r.bialgebra.names
    violations = r.commutators.grading_violations()
    for v in violations:
        out.append(f"grading: {v}")
    if violations:
        return out
    ctx = OrderingContext(n, N, r.commutators.entries)
    ext = CoproductExtension(ctx, r.coproducts.entries)

    for i in range(n):
        res = ext.coassociativity_residual(i)
        for k, key, c in res.terms():
            out.append(
                f"coassociativity: generator {names[i]} at z^{k}, "
                f"term {key} coefficient {c}"
            )

    for (i, j) in sorted(r.commutators.entries) + [
        p for p in ((a, b) for a in range(n) for b in range(a + 1, n))
        if p not in r.commutators.entries
    ]:
        lhs = ext.of_series(r.commutators.entry(i, j))
        rhs = ctx.tensor_commutator(
            r.coproducts.entry(i), r.coproducts.entry(j)
        )
        diff = lhs - rhs
        for k, key, c in diff.terms():
            out.append(
                f"homomorphism: pair ({names[i]},{names[j]}) at z^{k}, "
                f"term {key} coefficient {c}"
            )

    u = unit_mono(n)
    for i in range(n):
        cop = r.coproducts.entry(i)
        left = counit_residual(n, N, i, cop)
        right = counit_residual(n, N, i, cop.flip())
        for label, res in (("left", left), ("right", right)):
            for k, key, c in res.terms():
                out.append(
                    f"counit ({label} slot): generator {names[i]} at z^{k}, "
                    f"term {key} coefficient {c}"
                )

    for i in range(n):
        cop = r.coproducts.entry(i)
        for k in sorted(cop.data):
            sl = cop.data[k]
            sign = 1 if k % 2 == 0 else -1
            for (a, c2), q in sl.items():
                if sl.get((c2, a), Fraction(0)) != sign * q:
                    out.append(
                        f"flip parity: generator {names[i]} at z^{k}, "
                        f"term ({a},{c2})"
                    )
    return out


# --------------------------------------------------------------- order solver


def _monomials_of_degree(n: int, d: int) -> list:
    if d == 0:
        return [unit_mono(n)]
    out = [m_of_word(n, w) for w in combinations_with_replacement(range(n), d)]
    out.sort(key=_key_sort)
    return out


_SPLITS: dict = {}


def _cc_splits(n: int, m) -> dict:
    """Every classical splitting of a basis monomial, unit slots included."""
    hit = _SPLITS.get((n, m))
    if hit is None:
        hit = dict(classical_coproduct_mono(n, 0, m).slice(0))
        _SPLITS[(n, m)] = hit
    return hit


def _delta_tilde_mixed(n: int, m) -> dict:
    """Splittings with both slots nontrivial; zero exactly on linear terms."""
    u = unit_mono(n)
    return {
        key: c for key, c in _cc_splits(n, m).items() if key[0] != u and key[1] != u
    }


def _ansatz_totals(k: int) -> list:
    """Slot-degree sums admitted at order k: k+1, k-1, ... down to 2.

    The recursion only ever sources slices whose total degree has the parity
    of k + 1, so the skipped parities would be pure gauge freedom anyway.
    """
    return list(range(k + 1, 1, -2))


def _orbit_reps(n: int, k: int) -> list:
    """Flip-orbit representatives for the order-k coproduct ansatz.

    Keys m1 (x) m2 with both slot degrees >= 1 and total degree in
    _ansatz_totals(k); the flipped key carries (-1)^k times the
    representative's coefficient, which kills diagonal keys at odd order.
    """
    reps = []
    for total in _ansatz_totals(k):
        for d1 in range(1, total // 2 + 1):
            d2 = total - d1
            lo = _monomials_of_degree(n, d1)
            if d1 < d2:
                hi = _monomials_of_degree(n, d2)
                reps.extend((m1, m2) for m1 in lo for m2 in hi)
            else:
                for i1, m1 in enumerate(lo):
                    for m2 in lo[i1:]:
                        if m1 == m2 and k % 2 == 1:
                            continue
                        reps.append((m1, m2))
    reps.sort(key=_key_sort)
    return reps


def _key_degsum(key) -> int:
    return mono_degree(key[0]) + mono_degree(key[1])


def _expand_orbit(vec: dict, k: int) -> dict:
    """Orbit coordinates to full tensor coordinates at order k."""
    sign = Fraction(-1) if k % 2 else Fraction(1)
    out: dict = {}
    for (m1, m2), c in vec.items():
        if c == 0:
            continue
        out[(m1, m2)] = out.get((m1, m2), Fraction(0)) + c
        if m1 != m2:
            out[(m2, m1)] = out.get((m2, m1), Fraction(0)) + sign * c
    return {key: c for key, c in out.items() if c != 0}


def _collapse_orbit(tensor: dict) -> dict:
    """Tensor coordinates to orbit coordinates; assumes the flip symmetry."""
    out = {}
    for (m1, m2), c in tensor.items():
        if c != 0 and _key_sort((m1, m2)) <= _key_sort((m2, m1)):
            out[(m1, m2)] = c
    return out


def _coassoc_action(n: int, m1, m2) -> dict:
    """Three-slot coassociativity defect of one added coproduct tensor.

    Classical splittings suffice: the added term already carries the full
    power of z at its order, so nothing else in the truncation can multiply
    into its slice.
    """
    u = unit_mono(n)
    out: dict = {}

    def bump(key, c):
        cur = out.get(key, Fraction(0)) + c
        if cur == 0:
            out.pop(key, None)
        else:
            out[key] = cur

    for (a, b), c in _cc_splits(n, m1).items():
        bump((a, b, m2), c)
    bump((m1, m2, u), Fraction(1))
    for (a, b), c in _cc_splits(n, m2).items():
        bump((m1, a, b), -c)
    bump((u, m1, m2), Fraction(-1))
    return out


def _linear_part(poly: dict) -> dict:
    """Degree-one coefficients of a monomial dict, keyed by generator index."""
    out = {}
    for m, c in poly.items():
        if c != 0 and mono_degree(m) == 1:
            out[m.index(1)] = c
    return out


def _composite_flags(b) -> list:
    """Marks generators whose cocommutator has a wedge term avoiding the
    generator itself; rows built on such generators are resolved after the
    plain ones."""
    flags = []
    for i in range(b.n):
        comp = any(
            x != i and y != i for (x, y) in b.delta_tensor(i)
        )
        flags.append(1 if comp else 0)
    return flags


def _acc_many(dst: dict, src: dict, w) -> None:
    if w == 0:
        return
    for key, c in src.items():
        nc = dst.get(key, Fraction(0)) + w * c
        if nc == 0:
            dst.pop(key, None)
        else:
            dst[key] = nc


def _poly_series(n: int, poly: dict) -> Series:
    out = Series(n, 1, 0)
    for m, c in poly.items():
        out._add_term(0, m, c)
    return out


class _Span:
    """Deterministic reduced span of sparse vectors for membership tests."""

    def __init__(self):
        self.pivots: dict = {}

    def copy(self) -> "_Span":
        s = _Span()
        s.pivots = dict(self.pivots)
        return s

    def reduce(self, vec: dict) -> dict:
        v = {key: Fraction(c) for key, c in vec.items() if c != 0}
        while v:
            pivot = min(v, key=_key_sort)
            row = self.pivots.get(pivot)
            if row is None:
                return v
            f = v[pivot]
            for key, c in row.items():
                nc = v.get(key, Fraction(0)) - f * c
                if nc == 0:
                    v.pop(key, None)
                else:
                    v[key] = nc
        return v

    def insert(self, vec: dict) -> bool:
        res = self.reduce(vec)
        if not res:
            return False
        pivot = min(res, key=_key_sort)
        inv = Fraction(1) / res[pivot]
        self.pivots[pivot] = {key: c * inv for key, c in res.items()}
        return True


class _RetryWithFullLinear(Exception):
    pass


class _OrderStep:
    """Scratch state shared by the two solve passes at one z-order."""

    def __init__(self, state: DeformationResult, k: int):
        self.state = state
        self.k = k
        self.b = state.bialgebra
        self.n = self.b.n
        self.names = self.b.names
        self.ctx0 = OrderingContext(self.n, 0, classical_table(self.b, 0))
        self._gens = [
            from_terms(self.n, 1, 0, [(0, gen_mono(self.n, i), 1)])
            for i in range(self.n)
        ]
        self.d0: dict[int, dict] = {}
        self.kern: dict[int, list] = {}
        self.t_dirs: list = []
        self.excess: list = []
        self.diag = OrderDiagnostics(k)

    def _bracket_poly_gen(self, poly: dict, j: int) -> dict:
        s = _poly_series(self.n, poly)
        return self.ctx0.commutator(s, self._gens[j]).slice(0)

    # -- coproduct pass --------------------------------------------------

    def coassoc_phase(self) -> None:
        k, n = self.k, self.n
        reps = _orbit_reps(n, k)
        sign = Fraction(-1) if k % 2 else Fraction(1)
        per_key: dict = {}
        for rep in reps:
            m1, m2 = rep
            act = _coassoc_action(n, m1, m2)
            if m1 != m2:
                for key, c in _coassoc_action(n, m2, m1).items():
                    cur = act.get(key, Fraction(0)) + sign * c
                    if cur == 0:
                        act.pop(key, None)
                    else:
                        act[key] = cur
            for key, c in act.items():
                per_key.setdefault(key, {})[rep] = c
        ctx = OrderingContext(n, k, self.state.commutators)
        ext = CoproductExtension(ctx, self.state.coproducts.entries)
        for i in range(n):
            resid = ext.coassociativity_residual(i).slice(k)
            keys = set(per_key) | set(resid)
            rows = [
                (per_key.get(key, {}), -resid.get(key, Fraction(0)))
                for key in sorted(keys, key=_key_sort)
            ]
            try:
                particular, kernel, _ = solve_components(reps, rows)
            except InconsistentSystem as e:
                raise QuantizationObstruction(
                    k, f"coproduct of {self.names[i]}", str(e)
                ) from None
            self.d0[i] = {key: c for key, c in particular.items() if c != 0}
            self.kern[i] = kernel
            self.diag.coproduct_kernel[i] = len(kernel)
            # provisional write; the gauge pass adds its adjustment on top
            entry = self.state.coproducts.entries[i]
            for key, c in _expand_orbit(self.d0[i], k).items():
                entry._add_term(k, key, c)

    def build_dirs(self) -> None:
        k, n = self.k, self.n
        plist = []
        if k % 2 == 0:
            for d in _ansatz_totals(k):
                if d >= 2:
                    plist.extend(_monomials_of_degree(n, d))
        span = _Span()
        shifts = []
        for P in plist:
            orb = _collapse_orbit(_delta_tilde_mixed(n, P))
            span.insert(orb)
            shifts.append((P, orb))
        for i in range(n):
            for P, orb in shifts:
                self.t_dirs.append((i, P, orb))
            local = span.copy()
            for vec in self.kern.get(i, []):
                res = local.reduce(vec)
                if res and local.insert(res):
                    self.excess.append((i, res))

    # -- commutator pass -------------------------------------------------

    def commutator_phase(self) -> None:
        if self.state.gauge == "kernel-orthogonal":
            self._project_coproduct()
            self._prepare_pairs(with_directions=False)
            try:
                self._resolve_projected(False)
            except _RetryWithFullLinear:
                self._resolve_projected(True)
        else:
            self._prepare_pairs(with_directions=True)
            try:
                self._resolve_greedy(False)
            except _RetryWithFullLinear:
                self._resolve_greedy(True)

    def _prepare_pairs(self, with_directions: bool) -> None:
        k, n = self.k, self.n
        state = self.state
        ctx = OrderingContext(n, k, state.commutators)
        cops = {i: state.coproducts.entry(i).truncate(k) for i in range(n)}
        ext = CoproductExtension(ctx, cops)
        u = unit_mono(n)
        umonos = [m for d in range(2, k + 2) for m in _monomials_of_degree(n, d)]
        per_key: dict = {}
        for m in umonos:
            for key, c in _delta_tilde_mixed(n, m).items():
                per_key.setdefault(key, {})[m] = c
        resids: dict = {}
        wheres: dict = {}
        for a in range(n):
            for b2 in range(a + 1, n):
                lhs = ctx.tensor_commutator(cops[a], cops[b2])
                rhs = ext.of_series(state.commutators.entry(a, b2).truncate(k))
                resid = (lhs - rhs).slice(k)
                where = f"commutator ({self.names[a]},{self.names[b2]})"
                for (x, y), c in resid.items():
                    if (x == u or y == u) and c != 0:
                        raise QuantizationObstruction(
                            k, where, f"irreducible unit-slot residue at {(x, y)}"
                        )
                resids[(a, b2)] = resid
                wheres[(a, b2)] = where
        self.u00: dict = {}
        self.fp: dict = {}
        self.dshift: dict = {}
        self.tvars: list = []
        self.evars: list = []
        if not with_directions:
            for pair in sorted(resids):
                up = self._dtilde_solve(
                    umonos, per_key, resids[pair], wheres[pair]
                )
                if up:
                    self.u00[pair] = up
            return
        for i, P, orb in self.t_dirs:
            var = ("t", i, P)
            self.tvars.append(var)
            self.fp[var] = self._dp_footprint(i, P)
            self.dshift[var] = {i: orb}

        # Unabsorbed coproduct directions shift every pair residual, and the
        # pair solves only close when one shared value assignment works for
        # all of them at once.  Each pair contributes the affine constraints
        # its own solve puts on those values; the intersection fixes a forced
        # part (folded into the slices and the particular corrections) and
        # leaves the rest as gauge directions with honest footprints.
        lam = [self._dir_response(i, vec) for i, vec in self.excess]
        nev = len(lam)
        vvars = [("v", j) for j in range(nev)]
        dirdegs = {
            _key_degsum(key)
            for per_pair in lam
            for shift in per_pair.values()
            for key in shift
        }
        base_u: dict = {}
        glob = LinearSystem(list(range(nev)))
        for pair in sorted(resids):
            resid = resids[pair]
            extra: dict = {}
            for j, per_pair in enumerate(lam):
                for key, c in per_pair.get(pair, {}).items():
                    extra.setdefault(key, {})[("v", j)] = -c
            keys = set(per_key) | set(resid) | set(extra)
            rows = []
            for key in sorted(keys, key=_key_sort):
                cols = dict(per_key.get(key, {}))
                cols.update(extra.get(key, {}))
                rows.append((cols, resid.get(key, Fraction(0))))
            try:
                particular, kernel, _ = solve_components(umonos + vvars, rows)
            except InconsistentSystem as e:
                raise QuantizationObstruction(k, wheres[pair], str(e)) from None
            wproj = []
            for kv in kernel:
                w = {
                    var[1]: c
                    for var, c in kv.items()
                    if var[0] == "v" and c != 0
                }
                if not w:
                    raise AssertionError(
                        "reduced-coproduct solve must be determined above "
                        "the linear terms"
                    )
                wproj.append(w)
            base_u[pair] = {
                m: c
                for m, c in particular.items()
                if m[0] != "v" and c != 0 and mono_degree(m) not in dirdegs
            }
            if nev == 0:
                continue
            q = {
                var[1]: c
                for var, c in particular.items()
                if var[0] == "v" and c != 0
            }
            # the admissible direction values at this pair form the affine
            # set q + span(wproj); impose its defining functionals globally
            _p, funcs, _c = solve_components(
                list(range(nev)), [(w, Fraction(0)) for w in wproj]
            )
            for f in funcs:
                try:
                    glob.add_row(f, dot(f, q))
                except InconsistentSystem as e:
                    raise QuantizationObstruction(
                        k, wheres[pair], f"direction constraints clash: {e}"
                    ) from None
        val0 = {j: c for j, c in glob.particular_solution().items() if c != 0}
        vfree = glob.kernel_basis()
        self.diag.constrained_directions = nev - len(vfree)
        for j, c in sorted(val0.items()):
            i0, vec = self.excess[j]
            tgt = self.d0.setdefault(i0, {})
            for rep, cr in vec.items():
                nc = tgt.get(rep, Fraction(0)) + c * cr
                if nc == 0:
                    tgt.pop(rep, None)
                else:
                    tgt[rep] = nc
            entry = state.coproducts.entries[i0]
            for key, ce in _expand_orbit(vec, k).items():
                entry._add_term(k, key, c * ce)
        # degrees untouched by any direction were final already; the touched
        # blocks are re-solved at the forced point
        sub_monos = [m for m in umonos if mono_degree(m) in dirdegs]
        sub_keys = {key for key in per_key if _key_degsum(key) in dirdegs}
        for pair in sorted(resids):
            up = dict(base_u.get(pair, {}))
            if dirdegs:
                shift = {
                    key: c
                    for key, c in resids[pair].items()
                    if _key_degsum(key) in dirdegs
                }
                for j, c in val0.items():
                    _acc_many(shift, lam[j].get(pair, {}), c)
                up.update(
                    self._dtilde_solve(
                        sub_monos, per_key, shift, wheres[pair], sub_keys
                    )
                )
            if up:
                self.u00[pair] = up
        for r, w in enumerate(vfree):
            var = ("e", r)
            self.evars.append(var)
            shift_by_gen: dict = {}
            for j, c in sorted(w.items()):
                if c == 0:
                    continue
                i0, vec = self.excess[j]
                tgt = shift_by_gen.setdefault(i0, {})
                for rep, cr in vec.items():
                    nc = tgt.get(rep, Fraction(0)) + c * cr
                    if nc == 0:
                        tgt.pop(rep, None)
                    else:
                        tgt[rep] = nc
            self.dshift[var] = {
                i0: vec for i0, vec in shift_by_gen.items() if vec
            }
            fpd: dict = {}
            for pair in sorted(resids):
                lshift: dict = {}
                for j, c in w.items():
                    if c != 0:
                        _acc_many(lshift, lam[j].get(pair, {}), c)
                lshift = {key: c for key, c in lshift.items() if c != 0}
                if not lshift:
                    continue
                up2 = self._dtilde_solve(
                    sub_monos, per_key, lshift, wheres[pair], sub_keys
                )
                if up2:
                    fpd[pair] = up2
            self.fp[var] = fpd

    def _dtilde_solve(
        self, monos, per_key: dict, rhs: dict, where: str, base_keys=None
    ) -> dict:
        """Unique polynomial whose reduced coproduct matches ``rhs`` on the
        mixed keys; obstruction when no polynomial does."""
        keys = (set(per_key) if base_keys is None else set(base_keys)) | set(rhs)
        rows = [
            (per_key.get(key, {}), rhs.get(key, Fraction(0)))
            for key in sorted(keys, key=_key_sort)
        ]
        try:
            particular, kernel, _ = solve_components(monos, rows)
        except InconsistentSystem as e:
            raise QuantizationObstruction(self.k, where, str(e)) from None
        if kernel:
            raise AssertionError(
                "reduced-coproduct solve must be determined above the "
                "linear terms"
            )
        return {m: c for m, c in particular.items() if c != 0}

    def _dp_footprint(self, i: int, P) -> dict:
        """Classical change of the commutator table under moving generator i
        by the degree-(k+1) monomial P at this order."""
        n = self.n
        ppoly = {P: Fraction(1)}
        out: dict = {}
        for a in range(n):
            for b2 in range(a + 1, n):
                acc: dict = {}
                if a == i:
                    _acc_many(acc, self._bracket_poly_gen(ppoly, b2), 1)
                if b2 == i:
                    _acc_many(acc, self._bracket_poly_gen(ppoly, a), -1)
                c = self.b.bracket(a, b2).get(i)
                if c:
                    _acc_many(acc, ppoly, -c)
                if acc:
                    out[(a, b2)] = acc
        return out

    def _dir_response(self, i0: int, vec: dict) -> dict:
        """Per-pair change of the homomorphism residual when the order-k
        coproduct slice of generator i0 moves along a kernel direction."""
        k, n = self.k, self.n
        tens = _expand_orbit(vec, k)
        e_ser = Series(n, 2, 0)
        for key, c in tens.items():
            e_ser._add_term(0, key, c)
        out: dict = {}
        for a in range(n):
            for b2 in range(a + 1, n):
                shift: dict = {}
                if a == i0:
                    _acc_many(
                        shift,
                        self.ctx0.tensor_commutator(
                            e_ser, primitive_tensor(n, 0, b2)
                        ).slice(0),
                        1,
                    )
                if b2 == i0:
                    _acc_many(
                        shift,
                        self.ctx0.tensor_commutator(
                            primitive_tensor(n, 0, a), e_ser
                        ).slice(0),
                        1,
                    )
                c = self.b.bracket(a, b2).get(i0)
                if c:
                    _acc_many(shift, tens, -c)
                shift = {key: cc for key, cc in shift.items() if cc != 0}
                if shift:
                    out[(a, b2)] = shift
        return out

    # -- gauge resolution ------------------------------------------------

    def _linear_vars(self, full_linear: bool) -> list:
        n = self.n
        if full_linear:
            lvars = [
                ("l", a, b2, g)
                for a in range(n)
                for b2 in range(a + 1, n)
                for g in range(n)
            ]
            for var in lvars:
                _, a, b2, g = var
                self.fp[var] = {(a, b2): {gen_mono(n, g): Fraction(1)}}
        else:
            lvars = []
            for (a, b2) in sorted(self.b.structure):
                coeffs = self.b.structure[(a, b2)]
                var = ("s", a, b2)
                lvars.append(var)
                self.fp[var] = {
                    (a, b2): {gen_mono(n, m): c for m, c in coeffs.items()}
                }
        return lvars

    def _resolve_greedy(self, full_linear: bool) -> None:
        n = self.n
        lvars = self._linear_vars(full_linear)
        allvars = self.tvars + self.evars + lvars
        sys = LinearSystem(allvars)

        # stage one: push the coproduct slices toward minimal support.
        # Coordinates run second slot major, so every composite key whose
        # right slot can still be traded away is attempted before the bare
        # slots it would trade into; the surviving coordinates are exactly
        # the ones every basis change has to pay for somewhere earlier.
        gen_cols: dict = {}
        for var in self.tvars + self.evars:
            for i, orb in self.dshift[var].items():
                cols = gen_cols.setdefault(i, {})
                for key, c in orb.items():
                    cols.setdefault(key, {})[var] = c
        for i in range(n):
            cols = gen_cols.get(i, {})
            coords = set(self.d0.get(i, {})) | set(cols)
            for key in sorted(coords, key=lambda q: (_key_sort(q[1]), _key_sort(q[0]))):
                rhs = -self.d0.get(i, {}).get(key, Fraction(0))
                sys.try_add_row(cols.get(key, {}), rhs)

        # stage two: freeze removable nonlinear commutator coordinates,
        # pairs in lexicographic order, monomials in canonical order
        pair_cols: dict = {}
        for var in allvars:
            for pair, poly in self.fp[var].items():
                cols = pair_cols.setdefault(pair, {})
                for m, c in poly.items():
                    cols.setdefault(m, {})[var] = c
        for a in range(n):
            for b2 in range(a + 1, n):
                pair = (a, b2)
                cols = pair_cols.get(pair, {})
                coords = set(self.u00.get(pair, {})) | set(cols)
                for m in sorted(coords, key=_key_sort):
                    if mono_degree(m) < 2:
                        continue
                    rhs = -self.u00.get(pair, {}).get(m, Fraction(0))
                    sys.try_add_row(cols.get(m, {}), rhs)

        # stage three: the Jacobi identity is not negotiable
        for coeffs, rhs, label in self._jacobi_rows(allvars):
            try:
                sys.add_row(coeffs, rhs)
            except InconsistentSystem:
                if not full_linear:
                    raise _RetryWithFullLinear() from None
                raise QuantizationObstruction(
                    self.k, f"jacobi {label}"
                ) from None

        particular = {
            var: c for var, c in sys.particular_solution().items() if c != 0
        }
        kernel = sys.kernel_basis()
        linset = set(lvars)
        # only directions that leave every coproduct slice alone may still
        # move; a kernel vector with a polynomial or unabsorbed component
        # would shift coordinates the coproduct stage deliberately kept
        filtered = [
            v
            for v in kernel
            if all(var in linset for var, c in v.items() if c != 0)
        ]

        # remaining freedom: zero out linear parts reachable by relabeling.
        # Pairs that involve a generator with a quadratic cocommutator term
        # not containing the generator itself go last: their entries pick up
        # forced linear corrections from the rest of the table, and trading
        # those away would push the deformation back into simpler pairs.
        lin_cols: dict = {}
        for var in allvars:
            for pair, poly in self.fp[var].items():
                lp = _linear_part(poly)
                for g, c in lp.items():
                    lin_cols.setdefault(pair, {}).setdefault(g, {})[var] = c
        flags = _composite_flags(self.b)
        pairs = sorted(
            ((a, b2) for a in range(n) for b2 in range(a + 1, n)),
            key=lambda p: (flags[p[0]] + flags[p[1]], p),
        )
        sec = LinearSystem(list(range(len(filtered))))
        for a, b2 in pairs:
            per_g = lin_cols.get((a, b2), {})
            for g in sorted(per_g):
                col = per_g[g]
                val0 = sum(
                    (particular.get(var, Fraction(0)) * c for var, c in col.items()),
                    Fraction(0),
                )
                coeffs = {}
                for d, vec in enumerate(filtered):
                    cd = sum(
                        (vec.get(var, Fraction(0)) * c for var, c in col.items()),
                        Fraction(0),
                    )
                    if cd != 0:
                        coeffs[d] = cd
                sec.try_add_row(coeffs, -val0)
        p_final = dict(particular)
        for d, av in sec.particular_solution().items():
            if av == 0:
                continue
            for var, c in filtered[d].items():
                nc = p_final.get(var, Fraction(0)) + av * c
                if nc == 0:
                    p_final.pop(var, None)
                else:
                    p_final[var] = nc

        self.diag.gauge_directions = len(allvars)
        self._finalize(p_final)

    def _resolve_projected(self, full_linear: bool) -> None:
        lvars = self._linear_vars(full_linear)
        sys = LinearSystem(lvars)
        for coeffs, rhs, label in self._jacobi_rows(lvars):
            try:
                sys.add_row(coeffs, rhs)
            except InconsistentSystem:
                if not full_linear:
                    raise _RetryWithFullLinear() from None
                raise QuantizationObstruction(
                    self.k, f"jacobi {label}"
                ) from None
        particular = sys.particular_solution()
        kernel = sys.kernel_basis()
        p_final = project_off_kernel(particular, kernel) if kernel else particular
        self.diag.gauge_directions = len(lvars)
        self._finalize(p_final)

    def _project_coproduct(self) -> None:
        k = self.k
        for i in range(self.n):
            kernel = self.kern.get(i, [])
            if not kernel:
                continue
            particular = self.d0.get(i, {})
            proj = project_off_kernel(particular, kernel)
            entry = self.state.coproducts.entries[i]
            for key, c in _expand_orbit(particular, k).items():
                entry._add_term(k, key, -c)
            for key, c in _expand_orbit(proj, k).items():
                entry._add_term(k, key, c)
            self.d0[i] = {key: c for key, c in proj.items() if c != 0}

    def _jacobi_rows(self, allvars: list) -> list:
        k, n = self.k, self.n
        ctxk = OrderingContext(n, k, self.state.commutators)
        gens_k = [from_terms(n, 1, k, [(0, gen_mono(n, i), 1)]) for i in range(n)]
        pair_vars: dict = {}
        for var in allvars:
            for pair in self.fp[var]:
                pair_vars.setdefault(pair, []).append(var)
        rows = []
        for a in range(n):
            for b2 in range(a + 1, n):
                for c3 in range(b2 + 1, n):
                    cyc = ((a, b2, c3), (b2, c3, a), (c3, a, b2))
                    base_series = Series(n, 1, k)
                    for (x, y, z) in cyc:
                        inner = self.state.commutators.entry(x, y).truncate(k)
                        if not inner.is_zero():
                            base_series = base_series + ctxk.commutator(
                                inner, gens_k[z]
                            )
                    base = {
                        m: c for m, c in base_series.slice(k).items() if c != 0
                    }
                    _acc_many(base, self._lj(self.u00, a, b2, c3), 1)
                    involved = set()
                    for (x, y, z) in cyc:
                        involved.add((x, y) if x < y else (y, x))
                        for m in self.b.bracket(x, y):
                            if m != z:
                                involved.add((m, z) if m < z else (z, m))
                    touched: list = []
                    seen: set = set()
                    for pair in sorted(involved):
                        for var in pair_vars.get(pair, ()):
                            if var not in seen:
                                seen.add(var)
                                touched.append(var)
                    col: dict = {}
                    for var in touched:
                        for m, c in self._lj(self.fp[var], a, b2, c3).items():
                            col.setdefault(m, {})[var] = c
                    label = "({},{},{})".format(
                        self.names[a], self.names[b2], self.names[c3]
                    )
                    for m in sorted(set(base) | set(col), key=_key_sort):
                        rows.append(
                            (col.get(m, {}), -base.get(m, Fraction(0)), label)
                        )
        return rows

    def _entry_poly(self, fpdict: dict, x: int, y: int):
        if x < y:
            return fpdict.get((x, y))
        p = fpdict.get((y, x))
        return None if p is None else {m: -c for m, c in p.items()}

    def _lj(self, fpdict: dict, a: int, b2: int, c3: int) -> dict:
        """Linear response of the order-k Jacobi slice to a table correction.

        The correction enters once as an inner bracket, commuted classically
        with the outer generator, and once through the linear part of each
        inner bracket hitting a corrected outer entry.
        """
        out: dict = {}
        for (x, y, z) in ((a, b2, c3), (b2, c3, a), (c3, a, b2)):
            exy = self._entry_poly(fpdict, x, y)
            if exy:
                _acc_many(out, self._bracket_poly_gen(exy, z), 1)
            for m, c in self.b.bracket(x, y).items():
                if m == z:
                    continue
                emz = self._entry_poly(fpdict, m, z)
                if emz:
                    _acc_many(out, emz, c)
        return out

    # -- write-back ------------------------------------------------------

    def _finalize(self, p_final: dict) -> None:
        k, n = self.k, self.n
        state = self.state
        for var, val in p_final.items():
            if val == 0 or var[0] not in ("t", "e"):
                continue
            for i, orb in self.dshift[var].items():
                entry = state.coproducts.entries[i]
                for key, c in _expand_orbit(orb, k).items():
                    entry._add_term(k, key, val * c)
        corr: dict = {}
        for pair, poly in self.u00.items():
            _acc_many(corr.setdefault(pair, {}), poly, 1)
        for var, val in p_final.items():
            if val == 0:
                continue
            for pair, poly in self.fp[var].items():
                _acc_many(corr.setdefault(pair, {}), poly, val)
        for pair in sorted(corr):
            poly = {m: c for m, c in corr[pair].items() if c != 0}
            if not poly:
                continue
            entry = state.commutators.entries.get(pair)
            if entry is None:
                entry = Series(n, 1, state.commutators.cap)
                state.commutators.entries[pair] = entry
            for m, c in poly.items():
                entry._add_term(k, m, c)


# ----------------------------------------------------------------- public api


def solve_coproduct_order(state: DeformationResult, k: int) -> DeformationResult:
    """Extend every generator coproduct to order k from coassociativity.

    Writes one particular solution into the tables and keeps the solution
    kernel aside; the commutator pass at the same order spends that freedom.
    Order 1 is pinned at initialization and returns the state unchanged.
    """
    if not 1 <= k <= state.N:
        raise ValueError(f"order {k} outside 1..{state.N}")
    if k == 1:
        return state
    if any(s.data.get(k) for s in state.coproducts.entries.values()):
        raise ValueError(f"coproduct order {k} already present")
    step = _OrderStep(state, k)
    step.coassoc_phase()
    step.build_dirs()
    state._pending = step
    return state


def solve_commutator_order(state: DeformationResult, k: int) -> DeformationResult:
    """Extend the commutator table to order k from the homomorphism property,
    then spend the order's remaining freedom according to the gauge."""
    if not 1 <= k <= state.N:
        raise ValueError(f"order {k} outside 1..{state.N}")
    step = getattr(state, "_pending", None)
    if step is not None and step.k == k:
        del state._pending
    else:
        step = _OrderStep(state, k)
        if k >= 2:
            step.coassoc_phase()
            step.build_dirs()
    step.commutator_phase()
    state.diagnostics.append(step.diag)
    return state


def quantize(
    b: LieBialgebra, N: int, gauge: str = "analytic"
) -> DeformationResult:
    """Run the order-by-order construction up to z^N.

    ``gauge`` picks how the per-order solution freedom is spent.  "analytic"
    freezes removable coordinates to zero greedily: commutator coordinates
    above the linear terms first, then coproduct coordinates, then linear
    parts, the last subject to the Jacobi identity and to realizability as a
    relabeling of the generators compatible with the cocommutator.
    "kernel-orthogonal" instead picks the solution component orthogonal to
    the solution-space kernel at each stage.
    """
    if gauge not in ("analytic", "kernel-orthogonal"):
        raise ValueError(f"unknown gauge {gauge!r}")
    state = init_deformation(b, N)
    state.gauge = gauge
    for k in range(1, N + 1):
        state = solve_coproduct_order(state, k)
        state = solve_commutator_order(state, k)
    return state
