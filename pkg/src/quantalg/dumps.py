"""Deterministic text dumps of deformation results, with exact parsing.

The dump is a plain line grammar: a fixed-order header describing the
bialgebra, the truncation order and the gauge, then one line per
coproduct term and per commutator term in canonical order.  Rendering
the same result twice gives byte-identical text, and parsing a dump
reconstructs the payload exactly: ``payload_equal(parse_result(
render_result(r)), r)`` always holds.  Solver diagnostics ride along as
``#`` comments; comments are not data and do not survive the round
trip.

Generator names appear inside rendered words, so a dumpable result must
use names made of letters, digits and underscores.
"""

import re

from fractions import Fraction

from .bialgebra import InputError, LieBialgebra, SpecFileError
from .quantizer import DeformationResult
from .series import (
    CommutatorTable,
    CoproductTable,
    Series,
    _key_sort,
    from_terms,
    unit_mono,
)

_NAME = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")

_FORMAT_LINE = "quantalg-dump 1"


def _check_names(names) -> None:
    for nm in names:
        if not _NAME.match(nm):
            raise InputError(
                f"generator name {nm!r} cannot appear in a dump; "
                "use letters, digits and underscores"
            )


def _render_word(names, m) -> str:
    parts = []
    for i, e in enumerate(m):
        if e == 1:
            parts.append(names[i])
        elif e > 1:
            parts.append(f"{names[i]}^{e}")
    return "*".join(parts) if parts else "1"


def _parse_word(token: str, index: dict, n: int, line_no: int):
    if token == "1":
        return unit_mono(n)
    exps = [0] * n
    for factor in token.split("*"):
        if "^" in factor:
            nm, _, power = factor.partition("^")
            try:
                e = int(power)
            except ValueError:
                raise SpecFileError(line_no, f"bad exponent in {factor!r}")
        else:
            nm, e = factor, 1
        if nm not in index:
            raise SpecFileError(line_no, f"unknown generator {nm!r} in word")
        if e < 1:
            raise SpecFileError(line_no, f"bad exponent in {factor!r}")
        exps[index[nm]] += e
    return tuple(exps)


def _parse_fraction(token: str, line_no: int) -> Fraction:
    try:
        return Fraction(token)
    except (ValueError, ZeroDivisionError):
        raise SpecFileError(line_no, f"bad coefficient {token!r}")


def render_result(r: DeformationResult) -> str:
    """Canonical dump text for a deformation result."""
    b = r.bialgebra
    _check_names(b.names)
    lines = [_FORMAT_LINE, f"bialgebra {b.name}", "generators " + " ".join(b.names)]
    for (i, j) in sorted(b.structure):
        for k in sorted(b.structure[(i, j)]):
            lines.append(
                f"bracket {b.names[i]} {b.names[j]} {b.names[k]} "
                f"{b.structure[(i, j)][k]}"
            )
    for i in sorted(b.cocommutator):
        for (j, k) in sorted(b.cocommutator[i]):
            lines.append(
                f"cocommutator {b.names[i]} {b.names[j]} {b.names[k]} "
                f"{b.cocommutator[i][(j, k)]}"
            )
    lines.append(f"order {r.N}")
    lines.append(f"gauge {r.gauge}")
    for i in range(b.n):
        entry = r.coproducts.entry(i)
        for k, key, c in sorted(
            entry.terms(), key=lambda t: (t[0], _key_sort(t[1]))
        ):
            lines.append(
                f"coproduct {b.names[i]} {k} "
                f"{_render_word(b.names, key[0])} "
                f"{_render_word(b.names, key[1])} {c}"
            )
    for (i, j) in sorted(r.commutators.entries):
        entry = r.commutators.entry(i, j)
        for k, m, c in sorted(
            entry.terms(), key=lambda t: (t[0], _key_sort(t[1]))
        ):
            lines.append(
                f"commutator {b.names[i]} {b.names[j]} {k} "
                f"{_render_word(b.names, m)} {c}"
            )
    for d in r.diagnostics:
        lines.append(f"# {d.render()}")
    return "\n".join(lines) + "\n"


def parse_result(text: str) -> DeformationResult:
    """Rebuild a deformation result from dump text.

    Comments are skipped, so parsed results carry no diagnostics.
    """
    name = None
    names: list[str] | None = None
    index: dict = {}
    structure: dict = {}
    cocommutator: dict = {}
    order = None
    gauge = None
    cop_terms: dict = {}
    comm_terms: dict = {}
    saw_format = False
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not saw_format:
            if line != _FORMAT_LINE:
                raise SpecFileError(line_no, "not a quantalg dump")
            saw_format = True
            continue
        fields = line.split()
        kind = fields[0]
        if kind == "bialgebra":
            if len(fields) != 2:
                raise SpecFileError(line_no, "bialgebra line needs one name")
            name = fields[1]
        elif kind == "generators":
            names = fields[1:]
            if not names:
                raise SpecFileError(line_no, "no generators listed")
            index = {nm: i for i, nm in enumerate(names)}
            if len(index) != len(names):
                raise SpecFileError(line_no, "duplicate generator name")
        elif kind in ("bracket", "cocommutator"):
            if names is None:
                raise SpecFileError(line_no, "generators line must come first")
            if len(fields) != 5:
                raise SpecFileError(line_no, f"{kind} line needs 4 fields")
            try:
                a, b_, c = (index[fields[x]] for x in (1, 2, 3))
            except KeyError as e:
                raise SpecFileError(line_no, f"unknown generator {e.args[0]!r}")
            q = _parse_fraction(fields[4], line_no)
            if kind == "bracket":
                structure.setdefault((a, b_), {})[c] = q
            else:
                cocommutator.setdefault(a, {})[(b_, c)] = q
        elif kind == "order":
            if len(fields) != 2 or not fields[1].isdigit():
                raise SpecFileError(line_no, "order line needs one integer")
            order = int(fields[1])
        elif kind == "gauge":
            if len(fields) != 2:
                raise SpecFileError(line_no, "gauge line needs one identifier")
            gauge = fields[1]
        elif kind == "coproduct":
            if names is None or order is None:
                raise SpecFileError(line_no, "header must precede table lines")
            if len(fields) != 6:
                raise SpecFileError(line_no, "coproduct line needs 5 fields")
            if fields[1] not in index:
                raise SpecFileError(line_no, f"unknown generator {fields[1]!r}")
            i = index[fields[1]]
            if not fields[2].isdigit():
                raise SpecFileError(line_no, f"bad z-order {fields[2]!r}")
            k = int(fields[2])
            w1 = _parse_word(fields[3], index, len(names), line_no)
            w2 = _parse_word(fields[4], index, len(names), line_no)
            c = _parse_fraction(fields[5], line_no)
            cop_terms.setdefault(i, []).append((k, (w1, w2), c))
        elif kind == "commutator":
            if names is None or order is None:
                raise SpecFileError(line_no, "header must precede table lines")
            if len(fields) != 6:
                raise SpecFileError(line_no, "commutator line needs 5 fields")
            try:
                i, j = index[fields[1]], index[fields[2]]
            except KeyError as e:
                raise SpecFileError(line_no, f"unknown generator {e.args[0]!r}")
            if not fields[3].isdigit():
                raise SpecFileError(line_no, f"bad z-order {fields[3]!r}")
            k = int(fields[3])
            m = _parse_word(fields[4], index, len(names), line_no)
            c = _parse_fraction(fields[5], line_no)
            comm_terms.setdefault((i, j), []).append((k, m, c))
        else:
            raise SpecFileError(line_no, f"unknown dump line kind {kind!r}")
    if not saw_format:
        raise SpecFileError(1, "empty dump")
    if names is None or name is None or order is None or gauge is None:
        raise SpecFileError(1, "incomplete dump header")
    b = LieBialgebra(name, names, structure, cocommutator)
    n = b.n
    cops = {
        i: from_terms(n, 2, order, cop_terms.get(i, []))
        for i in range(n)
    }
    comms = {
        pair: from_terms(n, 1, order, terms)
        for pair, terms in comm_terms.items()
    }
    out = DeformationResult(
        b,
        order,
        CoproductTable(n, order, cops),
        CommutatorTable(n, order, comms),
    )
    out.gauge = gauge
    return out


def payload_equal(a: DeformationResult, b: DeformationResult) -> bool:
    """Equality on everything a dump carries as data (not diagnostics)."""
    return (
        not diff_results(a, b)
        and a.gauge == b.gauge
        and a.bialgebra.name == b.bialgebra.name
    )


def _table_diff(label, left: dict, right: dict, render_key) -> list[str]:
    out = []
    for key in sorted(set(left) | set(right), key=lambda p: (p if isinstance(p, tuple) else (p,))):
        le = left.get(key)
        re_ = right.get(key)
        terms_l = {(k, w): c for k, w, c in le.terms()} if le is not None else {}
        terms_r = {(k, w): c for k, w, c in re_.terms()} if re_ is not None else {}
        for tkey in sorted(
            set(terms_l) | set(terms_r), key=lambda t: (t[0], _key_sort(t[1]))
        ):
            cl = terms_l.get(tkey)
            cr = terms_r.get(tkey)
            if cl != cr:
                k, w = tkey
                shown = render_key(key, k, w)
                out.append(
                    f"{label} {shown}: "
                    f"{cl if cl is not None else 'absent'} vs "
                    f"{cr if cr is not None else 'absent'}"
                )
    return out


def diff_results(a: DeformationResult, b: DeformationResult) -> list[str]:
    """Term-level differences between two results; empty means identical.

    Compares the algebra data and every table term exactly.  Provenance
    (display name, gauge label, diagnostics) is not term data: the
    closed-form oracle must diff empty against the engine output it
    certifies.
    """
    out = []
    if a.bialgebra.names != b.bialgebra.names:
        return [
            "generators differ: "
            f"{' '.join(a.bialgebra.names)} vs {' '.join(b.bialgebra.names)}"
        ]
    if a.N != b.N:
        out.append(f"order differs: {a.N} vs {b.N}")
    names = a.bialgebra.names
    if a.bialgebra.structure != b.bialgebra.structure:
        out.append("classical brackets differ")
    if a.bialgebra.cocommutator != b.bialgebra.cocommutator:
        out.append("cocommutators differ")
    out.extend(
        _table_diff(
            "coproduct",
            {i: a.coproducts.entry(i) for i in range(a.bialgebra.n)},
            {i: b.coproducts.entry(i) for i in range(b.bialgebra.n)},
            lambda i, k, w: (
                f"{names[i]} z^{k} "
                f"{_render_word(names, w[0])} (x) {_render_word(names, w[1])}"
            ),
        )
    )
    out.extend(
        _table_diff(
            "commutator",
            dict(a.commutators.entries),
            dict(b.commutators.entries),
            lambda p, k, w: (
                f"[{names[p[0]]},{names[p[1]]}] z^{k} {_render_word(names, w)}"
            ),
        )
    )
    return out


def render_change(p, names) -> str:
    """Basis-change text: one assignment per generator.

    The recovered generator equals the basic element minus the listed
    symmetrized polynomial; ``S[...]`` marks the symmetrization of a
    word, summed over all arrangements.  Generators with no correction
    are listed bare so the change is complete on its own.
    """
    _check_names(names)
    lines = [f"quantalg-change stage {p.stage}"]
    for i, nm in enumerate(names):
        corr = p.corrections.get(i)
        if corr is None or corr.is_zero():
            lines.append(f"{nm} := {nm}'")
            continue
        parts = []
        for k, m, c in sorted(
            corr.terms(), key=lambda t: (t[0], _key_sort(t[1]))
        ):
            factors = [] if c == 1 else [str(c)]
            if k > 0:
                factors.append(f"z^{k}" if k > 1 else "z")
            factors.append(f"S[{_render_word(names, m)}]")
            parts.append("*".join(factors))
        lines.append(f"{nm} := {nm}' - ({' + '.join(parts)})")
    return "\n".join(lines) + "\n"


def parse_change(text: str, names, N: int):
    """Rebuild a basis change from its rendered assignments."""
    from .friedrichs import BasisChange

    index = {nm: i for i, nm in enumerate(names)}
    n = len(names)
    stage = 0
    corrections: dict[int, Series] = {}
    saw_header = False
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not saw_header:
            fields = line.split()
            if len(fields) != 3 or fields[0] != "quantalg-change" or fields[1] != "stage":
                raise SpecFileError(line_no, "not a quantalg change")
            try:
                stage = int(fields[2])
            except ValueError:
                raise SpecFileError(line_no, f"bad stage {fields[2]!r}")
            saw_header = True
            continue
        lhs, sep, rhs = line.partition(":=")
        if not sep:
            raise SpecFileError(line_no, "expected an assignment")
        nm = lhs.strip()
        if nm not in index:
            raise SpecFileError(line_no, f"unknown generator {nm!r}")
        rhs = rhs.strip()
        if rhs == f"{nm}'":
            continue
        prefix = f"{nm}' - ("
        if not rhs.startswith(prefix) or not rhs.endswith(")"):
            raise SpecFileError(line_no, "malformed correction")
        body = rhs[len(prefix):-1]
        terms = []
        for part in body.split(" + "):
            part = part.strip()
            hit = re.search(r"S\[([^\]]*)\]\Z", part)
            if hit is None:
                raise SpecFileError(line_no, f"term {part!r} has no S[...] word")
            word = _parse_word(hit.group(1), index, n, line_no)
            coeff = Fraction(1)
            k = 0
            head = part[: hit.start()].rstrip("*")
            if head:
                for factor in head.split("*"):
                    factor = factor.strip()
                    if factor == "z":
                        k = 1
                    elif factor.startswith("z^"):
                        try:
                            k = int(factor[2:])
                        except ValueError:
                            raise SpecFileError(
                                line_no, f"bad z power {factor!r}"
                            )
                    else:
                        coeff = coeff * _parse_fraction(factor, line_no)
            terms.append((k, word, coeff))
        corrections[index[nm]] = from_terms(n, 1, N, terms)
    if not saw_header:
        raise SpecFileError(1, "empty change")
    return BasisChange(corrections, stage)
