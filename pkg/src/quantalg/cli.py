"""Batch front end: validation, quantization, verification, recovery,
reference dumps and exact diffs.

Every command writes a deterministic plain-text report; running the same
command twice gives byte-identical output.  Exit status 0 means no
violations and no differences; 1 means the requested check found some;
2 means the run itself failed (bad input, obstruction, cap exceeded).
"""

import argparse
import sys

from .bialgebra import InputError, SpecFileError, load_bialgebra, validate
from .dumps import (
    diff_results,
    parse_change,
    parse_result,
    render_change,
    render_result,
)
from .friedrichs import (
    BasisChange,
    PrimitivizationError,
    classical_realization,
    perturb_basis,
    primitivize,
)
from .oracles import builtin_reference
from .quantizer import QuantizationObstruction, quantize, verify_hopf

_GAUGES = ("analytic", "kernel-orthogonal")


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="quantalg",
        description="Exact quantization of Lie bialgebras and recovery of "
        "their distinguished generator bases.",
    )
    sub = top.add_subparsers(dest="command", required=True)

    def common(p, order=False, gauge=False, degree=False, out=True):
        if order:
            p.add_argument("--order", type=int, required=True, metavar="N",
                           help="z-truncation order")
        if degree:
            p.add_argument("--degree", type=int, default=None, metavar="D",
                           help="polynomial degree bound of the presentation")
        if gauge:
            p.add_argument("--gauge", choices=_GAUGES, default="analytic",
                           help="how per-order solution freedom is spent")
        if out:
            p.add_argument("--out", default=None, metavar="PATH",
                           help="write the report here instead of stdout")
        p.add_argument("--max-order-cap", type=int, default=8, metavar="C",
                       help="refuse orders and degrees above this bound")

    p = sub.add_parser("validate", help="check the Lie bialgebra axioms")
    p.add_argument("input", help="builtin name or spec file path")
    common(p)

    p = sub.add_parser("quantize", help="run the order-by-order construction")
    p.add_argument("input", help="builtin name or spec file path")
    common(p, order=True, gauge=True)

    p = sub.add_parser("verify", help="recheck the Hopf axioms on a dump")
    p.add_argument("dump", help="dump file produced by quantize or oracle")
    common(p)

    p = sub.add_parser(
        "primitivize",
        help="perturb a reference basis and walk it back",
    )
    p.add_argument("input", help="builtin name or spec file path")
    common(p, order=True, gauge=True, degree=True)
    p.add_argument("--change", default=None, metavar="PATH",
                   help="basis-change file to apply before recovery "
                   "(default: identity)")

    p = sub.add_parser("oracle", help="dump the closed-form reference tables")
    p.add_argument("input", help="builtin name (su2 or u3)")
    common(p, order=True)

    p = sub.add_parser("diff", help="term-level comparison of two dumps")
    p.add_argument("left")
    p.add_argument("right")
    common(p)
    return top


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _check_cap(args) -> None:
    cap = args.max_order_cap
    order = getattr(args, "order", None)
    if order is not None and not (0 <= order <= cap):
        raise InputError(
            f"order {order} outside 0..{cap}; raise --max-order-cap to go higher"
        )
    degree = getattr(args, "degree", None)
    if degree is not None and degree > cap:
        raise InputError(
            f"degree {degree} above cap {cap}; raise --max-order-cap to go higher"
        )


def run(args) -> int:
    _check_cap(args)
    cmd = args.command
    if cmd == "validate":
        report = validate(load_bialgebra(args.input))
        _emit(str(report) + "\n", args.out)
        return 0 if report.is_valid else 1

    if cmd == "quantize":
        if args.order < 1:
            raise InputError("quantize needs --order at least 1")
        r = quantize(load_bialgebra(args.input), args.order, args.gauge)
        _emit(render_result(r), args.out)
        return 0

    if cmd == "verify":
        r = parse_result(_read(args.dump))
        failures = verify_hopf(r)
        if failures:
            _emit("".join(f"{line}\n" for line in failures), args.out)
            return 1
        _emit("no violations\n", args.out)
        return 0

    if cmd == "oracle":
        r = builtin_reference(args.input, args.order)
        _emit(render_result(r), args.out)
        return 0

    if cmd == "diff":
        left = parse_result(_read(args.left))
        right = parse_result(_read(args.right))
        lines = diff_results(left, right)
        if lines:
            _emit("".join(f"{line}\n" for line in lines), args.out)
            return 1
        _emit("identical\n", args.out)
        return 0

    if cmd == "primitivize":
        b = load_bialgebra(args.input)
        if args.order == 0:
            ref = classical_realization(b)
        else:
            ref = quantize(b, args.order, args.gauge)
        if args.change is None:
            change = BasisChange({})
        else:
            change = parse_change(_read(args.change), b.names, ref.N)
        s = perturb_basis(ref, change, args.degree)
        composite, final = primitivize(s)
        clean = all(final.defect(i).is_zero() for i in range(b.n))
        text = render_change(composite, b.names) + "\n" + render_result(
            _presented(final)
        )
        _emit(text, args.out)
        return 0 if clean else 1

    raise InputError(f"unknown command {cmd!r}")


def _presented(final):
    """Final tables repackaged for dumping."""
    from .quantizer import DeformationResult

    r = final.reference
    return DeformationResult(
        r.bialgebra,
        final.N,
        final.coproducts,
        final.commutators,
        [],
        r.gauge,
    )


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return run(args)
    except SpecFileError as e:
        sys.stderr.write(f"error: {e}\n")
        return 2
    except (InputError, QuantizationObstruction, PrimitivizationError) as e:
        sys.stderr.write(f"error: {e}\n")
        return 2
    except OSError as e:
        sys.stderr.write(f"error: {e}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
