"""Lie bialgebra input data, classical axiom validation, and parsing."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction


class SpecFileError(Exception):
    """Parse failure; carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class InputError(Exception):
    pass


@dataclass(frozen=True)
class GeneratorId:
    index: int
    name: str


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def is_valid(self) -> bool:
        return not self.violations

    def __str__(self):
        if self.is_valid:
            return "valid: all bialgebra axioms hold"
        return "\n".join("violation: " + v for v in self.violations)


class LieBialgebra:
    """Finite-dimensional Lie bialgebra (g, delta) over the rationals.

    ``structure`` maps (i, j) with i < j to {k: c} for [X_i, X_j] = sum c X_k.
    ``cocommutator`` maps i to {(j, k): f} with j < k for
    delta(X_i) = sum f (X_j wedge X_k), wedge meaning a x b - b x a with no
    half factor.  delta is stored without any power of z.
    """

    def __init__(self, name, generator_names, structure, cocommutator):
        self.name = name
        self.n = len(generator_names)
        if len(set(generator_names)) != self.n or not generator_names:
            raise InputError("generator names must be nonempty and unique")
        self.generators = [GeneratorId(i, nm) for i, nm in enumerate(generator_names)]
        self.names = list(generator_names)
        self.structure: dict[tuple[int, int], dict[int, Fraction]] = {}
        for (i, j), coeffs in structure.items():
            if not (0 <= i < j < self.n):
                raise InputError(f"bracket key ({i},{j}) out of range or not i<j")
            clean = {k: Fraction(c) for k, c in coeffs.items() if Fraction(c) != 0}
            for k in clean:
                if not 0 <= k < self.n:
                    raise InputError(f"bracket target {k} out of range")
            if clean:
                self.structure[(i, j)] = clean
        self.cocommutator: dict[int, dict[tuple[int, int], Fraction]] = {}
        for i, coeffs in cocommutator.items():
            if not 0 <= i < self.n:
                raise InputError(f"cocommutator index {i} out of range")
            clean = {}
            for (j, k), f in coeffs.items():
                if not (0 <= j < k < self.n):
                    raise InputError(f"wedge key ({j},{k}) must have j<k, in range")
                f = Fraction(f)
                if f != 0:
                    clean[(j, k)] = f
            if clean:
                self.cocommutator[i] = clean

    def index_of(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise InputError(f"unknown generator {name!r}") from None

    def bracket(self, i: int, j: int) -> dict[int, Fraction]:
        """[X_i, X_j] as {k: coefficient}, any index order."""
        if i == j:
            return {}
        if i < j:
            return dict(self.structure.get((i, j), {}))
        return {k: -c for k, c in self.structure.get((j, i), {}).items()}

    def delta_tensor(self, i: int) -> dict[tuple[int, int], Fraction]:
        """delta(X_i) as raw 2-tensor coordinates {(a,b): c}."""
        out: dict[tuple[int, int], Fraction] = {}
        for (j, k), f in self.cocommutator.get(i, {}).items():
            out[(j, k)] = out.get((j, k), Fraction(0)) + f
            out[(k, j)] = out.get((k, j), Fraction(0)) - f
        return {key: c for key, c in out.items() if c != 0}


def adjoint_action(b: LieBialgebra, i: int, t: dict) -> dict:
    """(ad_i x 1 + 1 x ad_i) on a z-free degree-(1,1) tensor {(a,c): q}."""
    out: dict[tuple[int, int], Fraction] = {}
    for (a, c), q in t.items():
        for m, w in b.bracket(i, a).items():
            key = (m, c)
            out[key] = out.get(key, Fraction(0)) + q * w
        for m, w in b.bracket(i, c).items():
            key = (a, m)
            out[key] = out.get(key, Fraction(0)) + q * w
    return {key: v for key, v in out.items() if v != 0}


def validate(b: LieBialgebra) -> ValidationReport:
    report = ValidationReport()
    names = b.names

    def brk(vec: dict[int, Fraction], j: int) -> dict[int, Fraction]:
        # [vec, X_j] for a linear combination vec
        out: dict[int, Fraction] = {}
        for m, c in vec.items():
            for k, w in b.bracket(m, j).items():
                out[k] = out.get(k, Fraction(0)) + c * w
        return {k: v for k, v in out.items() if v != 0}

    for i in range(b.n):
        for j in range(i + 1, b.n):
            for k in range(j + 1, b.n):
                acc: dict[int, Fraction] = {}
                for (a, bb, c) in ((i, j, k), (j, k, i), (k, i, j)):
                    for m, v in brk(b.bracket(a, bb), c).items():
                        acc[m] = acc.get(m, Fraction(0)) + v
                acc = {m: v for m, v in acc.items() if v != 0}
                if acc:
                    report.violations.append(
                        f"Jacobi fails on ({names[i]},{names[j]},{names[k]}): "
                        + _fmt_lin(acc, names)
                    )

    # co-Jacobi: cyclic sum of (delta x 1) applied to delta, as raw 3-tensors
    for i in range(b.n):
        acc3: dict[tuple[int, int, int], Fraction] = {}
        for (a, c), q in b.delta_tensor(i).items():
            for (u, v), w in b.delta_tensor(a).items():
                for key in ((u, v, c), (c, u, v), (v, c, u)):
                    acc3[key] = acc3.get(key, Fraction(0)) + q * w
        acc3 = {key: v for key, v in acc3.items() if v != 0}
        if acc3:
            report.violations.append(f"co-Jacobi fails on delta({names[i]})")

    # 1-cocycle: delta([x,y]) = (ad_x-extended) delta(y) - (ad_y-extended) delta(x)
    for i in range(b.n):
        for j in range(i + 1, b.n):
            lhs: dict[tuple[int, int], Fraction] = {}
            for m, c in b.bracket(i, j).items():
                for key, v in b.delta_tensor(m).items():
                    lhs[key] = lhs.get(key, Fraction(0)) + c * v
            rhs = adjoint_action(b, i, b.delta_tensor(j))
            for key, v in adjoint_action(b, j, b.delta_tensor(i)).items():
                rhs[key] = rhs.get(key, Fraction(0)) - v
            diff = dict(lhs)
            for key, v in rhs.items():
                diff[key] = diff.get(key, Fraction(0)) - v
            diff = {key: v for key, v in diff.items() if v != 0}
            if diff:
                report.violations.append(
                    f"cocycle condition fails on ({names[i]},{names[j]})"
                )
    return report


def _fmt_lin(coeffs: dict[int, Fraction], names) -> str:
    parts = [f"{c}*{names[k]}" for k, c in sorted(coeffs.items())]
    return " + ".join(parts) if parts else "0"


# ---------------------------------------------------------------- builtins

def su2() -> LieBialgebra:
    # basis order H < Y < X, so X*Y rewrites toward Y-first words
    return LieBialgebra(
        "su2",
        ["H", "Y", "X"],
        {
            (0, 1): {1: Fraction(-1)},
            (0, 2): {2: Fraction(1)},
            (1, 2): {0: Fraction(-2)},
        },
        {
            1: {(0, 1): Fraction(1)},
            2: {(0, 2): Fraction(1)},
        },
    )


_U3_ORDER = ["H1", "H2", "H3", "F12", "F23", "F13", "F21", "F32", "F31"]
_U3_ROOTS = {
    "F12": (1, 2), "F23": (2, 3), "F13": (1, 3),
    "F21": (2, 1), "F32": (3, 2), "F31": (3, 1),
}


def u3() -> LieBialgebra:
    idx = {nm: i for i, nm in enumerate(_U3_ORDER)}
    structure: dict[tuple[int, int], dict[int, Fraction]] = {}

    def put(a: str, bn: str, coeffs: dict[str, Fraction]):
        i, j = idx[a], idx[bn]
        assert i < j
        clean = {idx[t]: Fraction(c) for t, c in coeffs.items() if Fraction(c) != 0}
        if clean:
            structure[(i, j)] = clean

    for h in ("H1", "H2", "H3"):
        hi = int(h[1])
        for f, (a, bn) in _U3_ROOTS.items():
            w = (1 if hi == a else 0) - (1 if hi == bn else 0)
            if w:
                put(h, f, {f: Fraction(w)})
    froots = list(_U3_ROOTS)
    for p in range(len(froots)):
        for q in range(p + 1, len(froots)):
            fa, fb = froots[p], froots[q]
            if idx[fa] > idx[fb]:
                fa, fb = fb, fa
            (i, j), (k, l) = _U3_ROOTS[fa], _U3_ROOTS[fb]
            coeffs: dict[str, Fraction] = {}
            if j == k and i != l:
                coeffs[f"F{i}{l}"] = coeffs.get(f"F{i}{l}", Fraction(0)) + 1
            if i == l and k != j:
                coeffs[f"F{k}{j}"] = coeffs.get(f"F{k}{j}", Fraction(0)) - 1
            if j == k and i == l:
                coeffs[f"H{i}"] = coeffs.get(f"H{i}", Fraction(0)) + 1
                coeffs[f"H{j}"] = coeffs.get(f"H{j}", Fraction(0)) - 1
            put(fa, fb, coeffs)

    cocomm: dict[int, dict[tuple[int, int], Fraction]] = {}
    half = Fraction(1, 2)
    for f, (i, j) in _U3_ROOTS.items():
        terms: dict[tuple[int, int], Fraction] = {}

        def wedge(a: str, bn: str, c: Fraction):
            ia, ib = idx[a], idx[bn]
            if ia == ib:
                return
            if ia > ib:
                ia, ib = ib, ia
                c = -c
            terms[(ia, ib)] = terms.get((ia, ib), Fraction(0)) + c

        if i < j:
            wedge(f"H{i}", f, half)
            wedge(f"H{j}", f, -half)
            for k in range(i + 1, j):
                wedge(f"F{i}{k}", f"F{k}{j}", Fraction(1))
        else:
            wedge(f"H{j}", f, half)
            wedge(f"H{i}", f, -half)
            for k in range(j + 1, i):
                wedge(f"F{i}{k}", f"F{k}{j}", Fraction(-1))
        terms = {key: c for key, c in terms.items() if c != 0}
        if terms:
            cocomm[idx[f]] = terms
    return LieBialgebra("u3", _U3_ORDER, structure, cocomm)


def builtin_bialgebra(name: str) -> LieBialgebra:
    if name == "su2":
        return su2()
    if name == "u3":
        return u3()
    raise InputError(f"no builtin bialgebra named {name!r}")


# ---------------------------------------------------------------- parsing

_RAT = r"-?\d+(?:/\d+)?"


def _parse_coeff(tok: str, line_no: int) -> Fraction:
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise SpecFileError(line_no, f"bad rational {tok!r}")


def _split_terms(expr: str, line_no: int) -> list[tuple[int, str]]:
    """Break 'a - b + c' into signed chunks, respecting nothing nested."""
    expr = expr.strip()
    if not expr:
        raise SpecFileError(line_no, "empty right-hand side")
    out = []
    sign, buf = 1, ""
    prev_atom = False
    for ch in expr:
        if ch in "+-" and prev_atom:
            if buf.strip():
                out.append((sign, buf.strip()))
            sign = 1 if ch == "+" else -1
            buf = ""
            prev_atom = False
        else:
            buf += ch
            if not ch.isspace():
                prev_atom = True
    if buf.strip():
        out.append((sign, buf.strip()))
    return out


def parse_bialgebra(text: str, name: str = "custom") -> LieBialgebra:
    """Parse the bialgebra spec file format.

    Sections ``generators``, ``brackets``, ``cocommutators``; ``#`` starts a
    comment; blank lines ignored.  Bracket lines ``[A,B] = q*C + ...``,
    cocommutator lines ``delta(A) = q*(B^C) + ...`` (or ``0``).
    """
    gen_names: list[str] = []
    bracket_lines: list[tuple[int, str]] = []
    delta_lines: list[tuple[int, str]] = []
    section = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head = line.lower().rstrip(":")
        if head in ("generators", "brackets", "cocommutators") and (
            line.endswith(":") or head == line.lower()
        ):
            section = head
            continue
        if line.lower().startswith("generators:"):
            section = "generators"
            line = line.split(":", 1)[1].strip()
            if not line:
                continue
        if section == "generators":
            gen_names.extend(line.replace(",", " ").split())
        elif section == "brackets":
            bracket_lines.append((line_no, line))
        elif section == "cocommutators":
            delta_lines.append((line_no, line))
        else:
            raise SpecFileError(line_no, "content before any section header")
    if not gen_names:
        raise SpecFileError(1, "no generators declared")
    idx = {nm: i for i, nm in enumerate(gen_names)}
    if len(idx) != len(gen_names):
        raise SpecFileError(1, "duplicate generator name")

    structure: dict[tuple[int, int], dict[int, Fraction]] = {}
    seen_pairs = set()
    for line_no, line in bracket_lines:
        m = re.match(r"^\[\s*(\w+)\s*,\s*(\w+)\s*\]\s*=\s*(.+)$", line)
        if not m:
            raise SpecFileError(line_no, f"cannot parse bracket line {line!r}")
        a, bn, expr = m.group(1), m.group(2), m.group(3)
        for g in (a, bn):
            if g not in idx:
                raise SpecFileError(line_no, f"unknown generator {g!r}")
        i, j = idx[a], idx[bn]
        if i == j:
            raise SpecFileError(line_no, "bracket of a generator with itself")
        flip = i > j
        if flip:
            i, j = j, i
        if (i, j) in seen_pairs:
            raise SpecFileError(line_no, f"duplicate bracket [{a},{bn}]")
        seen_pairs.add((i, j))
        coeffs: dict[int, Fraction] = {}
        if expr.strip() != "0":
            for sign, term in _split_terms(expr, line_no):
                tm = re.match(rf"^({_RAT})\s*\*\s*(\w+)$", term) or re.match(
                    r"^(\w+)$", term
                )
                if not tm:
                    raise SpecFileError(line_no, f"cannot parse term {term!r}")
                if tm.lastindex == 2:
                    q = _parse_coeff(tm.group(1), line_no)
                    g = tm.group(2)
                else:
                    q, g = Fraction(1), tm.group(1)
                if g not in idx:
                    raise SpecFileError(line_no, f"unknown generator {g!r}")
                k = idx[g]
                coeffs[k] = coeffs.get(k, Fraction(0)) + sign * q * (-1 if flip else 1)
        structure[(i, j)] = coeffs

    cocomm: dict[int, dict[tuple[int, int], Fraction]] = {}
    seen_delta = set()
    for line_no, line in delta_lines:
        m = re.match(r"^delta\(\s*(\w+)\s*\)\s*=\s*(.+)$", line)
        if not m:
            raise SpecFileError(line_no, f"cannot parse cocommutator line {line!r}")
        a, expr = m.group(1), m.group(2)
        if a not in idx:
            raise SpecFileError(line_no, f"unknown generator {a!r}")
        if a in seen_delta:
            raise SpecFileError(line_no, f"duplicate delta({a})")
        seen_delta.add(a)
        terms: dict[tuple[int, int], Fraction] = {}
        if expr.strip() != "0":
            for sign, term in _split_terms(expr, line_no):
                tm = re.match(
                    rf"^(?:({_RAT})\s*\*\s*)?\(\s*(\w+)\s*\^\s*(\w+)\s*\)$", term
                )
                if not tm:
                    raise SpecFileError(line_no, f"cannot parse wedge term {term!r}")
                q = _parse_coeff(tm.group(1), line_no) if tm.group(1) else Fraction(1)
                u, v = tm.group(2), tm.group(3)
                for g in (u, v):
                    if g not in idx:
                        raise SpecFileError(line_no, f"unknown generator {g!r}")
                iu, iv = idx[u], idx[v]
                if iu == iv:
                    raise SpecFileError(line_no, "wedge of a generator with itself")
                c = sign * q
                if iu > iv:
                    iu, iv = iv, iu
                    c = -c
                terms[(iu, iv)] = terms.get((iu, iv), Fraction(0)) + c
        cocomm[idx[a]] = terms

    return LieBialgebra(name, gen_names, structure, cocomm)


def load_bialgebra(source: str) -> LieBialgebra:
    """Builtin name or path to a spec file."""
    if source in ("su2", "u3"):
        return builtin_bialgebra(source)
    try:
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError:
        raise InputError(
            f"{source!r} is not a builtin (su2, u3) and no file exists there"
        ) from None
    import os

    return parse_bialgebra(text, name=os.path.splitext(os.path.basename(source))[0])
