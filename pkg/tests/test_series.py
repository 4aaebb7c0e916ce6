from fractions import Fraction as F

from quantalg.bialgebra import su2
from quantalg.quantizer import quantize
from quantalg.series import (
    CoproductExtension,
    OrderingContext,
    Series,
    classical_table,
    from_terms,
    gen_mono,
    primitive_tensor,
    unit_mono,
)

H = (1, 0, 0)
Y = (0, 1, 0)
X = (0, 0, 1)
U = (0, 0, 0)


def test_term_arithmetic():
    a = from_terms(3, 1, 3, [(0, H, F(1)), (1, X, F(1, 2))])
    b = from_terms(3, 1, 3, [(1, X, F(1, 2)), (2, Y, F(-3))])
    s = a + b
    assert s.coefficient(0, H) == 1
    assert s.coefficient(1, X) == 1
    assert s.coefficient(2, Y) == -3
    assert (s - s).is_zero()
    assert s.scale(F(1, 3)).coefficient(2, Y) == -1


def test_truncation_drops_beyond_cap():
    # silently: the cap is the whole point of the representation
    s = from_terms(2, 1, 1, [(3, (1, 0), F(1))])
    assert s.is_zero()
    t = from_terms(2, 1, 2, [(1, (1, 0), F(1))])
    assert t.zshift(2).is_zero()
    assert list(t.zshift(1).terms()) == [(2, (1, 0), F(1))]


def test_slice_and_coefficient():
    s = from_terms(3, 1, 2, [(0, H, F(2)), (2, X, F(5)), (2, Y, F(-1))])
    assert s.slice(1) == {}
    assert s.slice(2) == {X: F(5), Y: F(-1)}
    assert s.coefficient(2, H) == 0


def test_pbw_reorder_su2():
    ctx = OrderingContext(3, 0, classical_table(su2(), 0))
    x = from_terms(3, 1, 0, [(0, X, F(1))])
    y = from_terms(3, 1, 0, [(0, Y, F(1))])
    h = from_terms(3, 1, 0, [(0, H, F(1))])
    # canonical order is H < Y < X, so X*Y rewrites to YX + [X,Y] = YX + 2H
    assert dict(((k, m), c) for k, m, c in ctx.multiply(x, y).terms()) == {
        (0, (0, 1, 1)): F(1),
        (0, H): F(2),
    }
    assert dict(((k, m), c) for k, m, c in ctx.multiply(x, h).terms()) == {
        (0, (1, 0, 1)): F(1),
        (0, X): F(-1),
    }
    # already ordered pairs pass through
    assert list(ctx.multiply(h, x).terms()) == [(0, (1, 0, 1), F(1))]


def test_classical_multiply_associative():
    ctx = OrderingContext(3, 0, classical_table(su2(), 0), degree_cap=6)
    gens = [from_terms(3, 1, 0, [(0, gen_mono(3, i), F(1))]) for i in range(3)]
    words = gens + [ctx.multiply(gens[2], gens[1]), ctx.multiply(gens[2], gens[0])]
    for a in words:
        for b in words:
            for c in gens:
                left = ctx.multiply(ctx.multiply(a, b), c)
                right = ctx.multiply(a, ctx.multiply(b, c))
                assert left == right


def test_deformed_multiply_associative():
    r = quantize(su2(), 2)
    ctx = OrderingContext(3, 2, r.commutators)
    gens = [from_terms(3, 1, 2, [(0, gen_mono(3, i), F(1))]) for i in range(3)]
    for a in gens:
        for b in gens:
            for c in gens:
                assert ctx.multiply(ctx.multiply(a, b), c) == ctx.multiply(
                    a, ctx.multiply(b, c)
                )


def test_primitive_tensor_shape():
    p = primitive_tensor(3, 2, 0)
    assert dict(((k, key), c) for k, key, c in p.terms()) == {
        (0, (H, U)): F(1),
        (0, (U, H)): F(1),
    }
    assert unit_mono(3) == U
    assert gen_mono(3, 2) == X


def test_coproduct_extension_is_multiplicative():
    ctx = OrderingContext(3, 0, classical_table(su2(), 0))
    ext = CoproductExtension(ctx, {i: primitive_tensor(3, 0, i) for i in range(3)})
    got = ext.of_mono((1, 0, 1))
    want = from_terms(3, 2, 0, [
        (0, ((1, 0, 1), U), F(1)),
        (0, (H, X), F(1)),
        (0, (X, H), F(1)),
        (0, (U, (1, 0, 1)), F(1)),
    ])
    assert got == want
    unit = ext.of_mono(U)
    assert list(unit.terms()) == [(0, (U, U), F(1))]


def test_commutator_table_is_antisymmetric_in_lookup():
    tab = classical_table(su2(), 0)
    assert tab.entry(2, 1) == tab.entry(1, 2).scale(F(-1))
    assert tab.entry(0, 0).is_zero()
