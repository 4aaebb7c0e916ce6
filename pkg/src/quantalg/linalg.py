"""Sparse exact linear systems over the rationals.

Everything is a reduced row echelon form maintained incrementally.  Pivot
choice is the smallest variable in a fixed canonical order, which makes
every solve deterministic.  No tolerances: a residual is zero or it is not.
"""

from __future__ import annotations

from fractions import Fraction


class InconsistentSystem(Exception):
    """Raised when a row reduces to 0 = nonzero."""


class LinearSystem:
    """Incremental RREF over an ordered variable set.

    Rows are dicts {var_position: coefficient} plus a rational right side.
    After every insertion the stored rows stay fully reduced against each
    other, so consistency checks and solution extraction are immediate.
    """

    def __init__(self, variables):
        self.vars = list(variables)
        if len(set(self.vars)) != len(self.vars):
            raise ValueError("duplicate variables")
        self.index = {v: i for i, v in enumerate(self.vars)}
        self.rows: dict[int, tuple[dict[int, Fraction], Fraction]] = {}

    def _reduced(self, coeffs: dict[int, Fraction], rhs: Fraction):
        coeffs = dict(coeffs)
        while True:
            hit = None
            for pos in coeffs:
                if pos in self.rows:
                    hit = pos
                    break
            if hit is None:
                return coeffs, rhs
            factor = coeffs[hit]
            prow, prhs = self.rows[hit]
            for pos, c in prow.items():
                nc = coeffs.get(pos, Fraction(0)) - factor * c
                if nc == 0:
                    coeffs.pop(pos, None)
                else:
                    coeffs[pos] = nc
            coeffs.pop(hit, None)
            rhs = rhs - factor * prhs

    def _insert(self, coeffs: dict[int, Fraction], rhs: Fraction) -> None:
        pivot = min(coeffs)
        inv = Fraction(1) / coeffs[pivot]
        coeffs = {p: c * inv for p, c in coeffs.items()}
        rhs = rhs * inv
        del coeffs[pivot]
        # eliminate the new pivot from every stored row
        for p, (row, r) in list(self.rows.items()):
            if pivot in row:
                f = row[pivot]
                for q, c in coeffs.items():
                    nc = row.get(q, Fraction(0)) - f * c
                    if nc == 0:
                        row.pop(q, None)
                    else:
                        row[q] = nc
                del row[pivot]
                self.rows[p] = (row, r - f * rhs)
        self.rows[pivot] = (coeffs, rhs)

    def add_row(self, coeffs: dict, rhs) -> None:
        """Impose one equation; raises InconsistentSystem if contradictory."""
        prepared = {}
        for v, c in coeffs.items():
            c = Fraction(c)
            if c != 0:
                prepared[self.index[v]] = c
        red, r = self._reduced(prepared, Fraction(rhs))
        if not red:
            if r != 0:
                raise InconsistentSystem(f"0 = {r}")
            return
        self._insert(red, r)

    def try_add_row(self, coeffs: dict, rhs) -> bool:
        """Impose the equation if consistent; returns whether it was."""
        prepared = {}
        for v, c in coeffs.items():
            c = Fraction(c)
            if c != 0:
                prepared[self.index[v]] = c
        red, r = self._reduced(prepared, Fraction(rhs))
        if not red:
            return r == 0
        self._insert(red, r)
        return True

    def rank(self) -> int:
        return len(self.rows)

    def pinned_value(self, var):
        """Value of var if the system determines it fully, else None."""
        pos = self.index[var]
        row = self.rows.get(pos)
        if row is None:
            return None
        coeffs, rhs = row
        return rhs if not coeffs else None

    def particular_solution(self) -> dict:
        """Solution with every free variable set to zero."""
        out = {}
        for pos, (_coeffs, rhs) in self.rows.items():
            if rhs != 0:
                out[self.vars[pos]] = rhs
        return out

    def kernel_basis(self) -> list[dict]:
        """One kernel vector per free variable, in canonical order."""
        free = [i for i in range(len(self.vars)) if i not in self.rows]
        out = []
        for f in free:
            vec = {self.vars[f]: Fraction(1)}
            for pos, (coeffs, _rhs) in self.rows.items():
                c = coeffs.get(f)
                if c is not None and c != 0:
                    vec[self.vars[pos]] = -c
            out.append(vec)
        return out

    def free_variables(self) -> list:
        return [self.vars[i] for i in range(len(self.vars)) if i not in self.rows]


def solve_components(variables, rows):
    """Solve row set split into connected components.

    ``rows`` is an iterable of (coeffs dict, rhs).  Variables never touched
    by any row are free with value zero.  Returns (particular, kernel,
    component count).  Raises InconsistentSystem on contradiction.
    """
    variables = list(variables)
    parent: dict = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    for v in variables:
        parent[v] = v
    rows = [({v: Fraction(c) for v, c in coeffs.items() if Fraction(c) != 0},
             Fraction(rhs)) for coeffs, rhs in rows]
    for coeffs, _rhs in rows:
        it = iter(coeffs)
        first = next(it, None)
        if first is None:
            continue
        for v in it:
            union(first, v)

    groups: dict = {}
    for v in variables:
        groups.setdefault(find(v), []).append(v)
    row_groups: dict = {}
    bare = []
    for coeffs, rhs in rows:
        if not coeffs:
            bare.append(rhs)
            continue
        key = find(next(iter(coeffs)))
        row_groups.setdefault(key, []).append((coeffs, rhs))
    for rhs in bare:
        if rhs != 0:
            raise InconsistentSystem(f"0 = {rhs}")

    particular: dict = {}
    kernel: list[dict] = []
    order = {v: i for i, v in enumerate(variables)}
    comps = sorted(groups.values(), key=lambda g: min(order[v] for v in g))
    for comp in comps:
        comp_sorted = sorted(comp, key=lambda v: order[v])
        sys = LinearSystem(comp_sorted)
        for coeffs, rhs in row_groups.get(find(comp[0]), []):
            sys.add_row(coeffs, rhs)
        particular.update(sys.particular_solution())
        kernel.extend(sys.kernel_basis())
    return particular, kernel, len(comps)


def dot(a: dict, b: dict) -> Fraction:
    if len(b) < len(a):
        a, b = b, a
    s = Fraction(0)
    for k, v in a.items():
        w = b.get(k)
        if w is not None:
            s += v * w
    return s


def project_off_kernel(particular: dict, kernel: list[dict]) -> dict:
    """Component of the affine solution orthogonal to the kernel span.

    Standard coefficient inner product; exact normal-equations solve on the
    kernel Gram matrix.  Returns the unique solution with zero projection
    onto every kernel direction.
    """
    m = len(kernel)
    if m == 0 or not particular:
        return dict(particular)
    gram = [[dot(kernel[i], kernel[j]) for j in range(m)] for i in range(m)]
    rhs = [dot(kernel[i], particular) for i in range(m)]
    # dense exact Gaussian elimination; the Gram matrix of independent
    # vectors is invertible
    for col in range(m):
        piv = next(r for r in range(col, m) if gram[r][col] != 0)
        gram[col], gram[piv] = gram[piv], gram[col]
        rhs[col], rhs[piv] = rhs[piv], rhs[col]
        inv = Fraction(1) / gram[col][col]
        gram[col] = [c * inv for c in gram[col]]
        rhs[col] = rhs[col] * inv
        for r in range(m):
            if r != col and gram[r][col] != 0:
                f = gram[r][col]
                gram[r] = [a - f * b for a, b in zip(gram[r], gram[col])]
                rhs[r] = rhs[r] - f * rhs[col]
    out = dict(particular)
    for i in range(m):
        s = rhs[i]
        if s == 0:
            continue
        for k, v in kernel[i].items():
            nv = out.get(k, Fraction(0)) - s * v
            if nv == 0:
                out.pop(k, None)
            else:
                out[k] = nv
    return out
