"""Unramified p-adic contexts, isocrystal invariants, decency."""

import random
from fractions import Fraction

import pytest

from kotcount.abelian import IntMatrix
from kotcount.galois import FiniteGroup, FiniteGroupAction, GaloisLattice
from kotcount.padic import (
    IsocInvariants,
    PadicMatrix,
    PrecisionError,
    Zq,
    companion_rep,
    degree_n_norm,
    diagonal_rep,
    direct_sum,
    is_decent,
    kottwitz_point,
    kottwitz_point_torus,
    newton_point,
    parse_matrix,
    sigma_conjugate,
)


def rand_unit(ctx, rng):
    while True:
        c = [rng.randrange(-8, 9) for _ in range(ctx.n)]
        if any(x % ctx.p for x in c):
            return ctx.from_coeffs(c)


def rand_invertible(ctx, d, rng, allow_p_powers=True):
    """Unit lower triangle times unit upper triangle, maybe a p-power diagonal."""
    lo = [[ctx.one() if i == j
           else (ctx.from_coeffs([rng.randrange(-4, 5) for _ in range(ctx.n)])
                 if i > j else ctx.zero())
           for j in range(d)] for i in range(d)]
    up = [[rand_unit(ctx, rng) if i == j
           else (ctx.from_coeffs([rng.randrange(-4, 5) for _ in range(ctx.n)])
                 if i < j else ctx.zero())
           for j in range(d)] for i in range(d)]
    m = PadicMatrix(ctx, lo) @ PadicMatrix(ctx, up)
    if allow_p_powers and rng.random() < 0.3:
        m = m @ diagonal_rep(ctx, [rng.randrange(0, 2) for _ in range(d)])
    return m


def test_modulus_selection_is_deterministic():
    assert Zq(3, 2).modulus == (1, 0, 1)
    assert Zq(2, 2).modulus == (1, 1, 1)
    assert Zq(2, 3).modulus == (1, 1, 0, 1)
    assert Zq(5, 1).modulus == (0, 1)
    assert Zq(5, 2).modulus == (2, 0, 1)


def test_frobenius_fixes_prime_field_and_has_order_n():
    rng = random.Random(31)
    for p, n in ((3, 2), (2, 3), (5, 2)):
        ctx = Zq(p, n, 20)
        x = ctx.from_int(rng.randrange(1, 50))
        assert x.frobenius().same(x)
        for _ in range(10):
            y = ctx.from_coeffs([rng.randrange(100) for _ in range(n)],
                                val=rng.randrange(-2, 3))
            z = y
            for _ in range(n):
                z = z.frobenius()
            assert z.same(y)


def test_frobenius_is_ring_homomorphism():
    rng = random.Random(32)
    ctx = Zq(3, 2, 20)
    for _ in range(25):
        x = ctx.from_coeffs([rng.randrange(200) for _ in range(2)])
        y = ctx.from_coeffs([rng.randrange(200) for _ in range(2)])
        assert (x * y).frobenius().same(x.frobenius() * y.frobenius())
        assert (x + y).frobenius().same(x.frobenius() + y.frobenius())


def test_frobenius_reduces_to_p_power_on_residue_field():
    ctx = Zq(3, 2, 20)
    t = ctx.from_coeffs([0, 1])
    st = t.frobenius()
    diff = st - t * t * t
    assert diff.is_zeroish or diff.valuation() >= 1
    # the generator satisfies its modulus exactly
    assert (t * t + ctx.one()).is_zeroish


def test_galois_norm_of_generator_is_rational():
    ctx = Zq(3, 2, 20)
    t = ctx.from_coeffs([0, 1])
    norm = t * t.frobenius()
    assert norm.same(ctx.one())


def test_newton_point_examples():
    ctx = Zq(5, 1, 24)
    assert newton_point(parse_matrix(ctx, "p, 0; 0, 1")) == (1, 0)
    assert newton_point(parse_matrix(ctx, "0, 1; p, 0")) == \
        (Fraction(1, 2), Fraction(1, 2))
    assert newton_point(parse_matrix(ctx, "p^2, 0; 0, p^2")) == (2, 2)
    assert newton_point(companion_rep(ctx, 3, 1)) == \
        (Fraction(1, 3),) * 3
    mixed = direct_sum([companion_rep(ctx, 2, 1), diagonal_rep(ctx, [2])])
    assert newton_point(mixed) == (2, Fraction(1, 2), Fraction(1, 2))


def test_kottwitz_point_examples():
    ctx = Zq(5, 1, 24)
    assert kottwitz_point(parse_matrix(ctx, "p, 0; 0, 1")) == 1
    assert kottwitz_point(diagonal_rep(ctx, [2, 1, 0])) == 3
    rng = random.Random(33)
    for _ in range(10):
        g = rand_invertible(ctx, 3, rng, allow_p_powers=False)
        assert kottwitz_point(g) == 0


def test_kottwitz_point_is_homomorphism():
    rng = random.Random(34)
    ctx = Zq(3, 2, 24)
    for _ in range(15):
        d = rng.choice([2, 3])
        a = rand_invertible(ctx, d, rng)
        b = rand_invertible(ctx, d, rng)
        assert kottwitz_point(a @ b) == kottwitz_point(a) + kottwitz_point(b)


def test_newton_endpoint_matches_kottwitz():
    rng = random.Random(35)
    ctx = Zq(3, 2, 24)
    for _ in range(15):
        b = rand_invertible(ctx, rng.choice([2, 3]), rng)
        assert sum(newton_point(b)) == kottwitz_point(b)


def test_sigma_conjugation_invariance():
    rng = random.Random(36)
    ctx = Zq(3, 2, 24)
    for _ in range(20):
        d = rng.choice([2, 3])
        b = rand_invertible(ctx, d, rng)
        g = rand_invertible(ctx, d, rng)
        b2 = sigma_conjugate(b, g)
        assert newton_point(b2) == newton_point(b)
        assert kottwitz_point(b2) == kottwitz_point(b)
    b = parse_matrix(ctx, "0, 1; p, 0")
    assert sigma_conjugate(b, PadicMatrix.identity(ctx, 2)).same(b)


def test_decency_examples():
    ctx = Zq(5, 1, 24)
    assert is_decent(parse_matrix(ctx, "p, 0; 0, 1"), 1)
    assert is_decent(parse_matrix(ctx, "0, 1; p, 0"), 2)
    assert not is_decent(parse_matrix(ctx, "p, 1; p, 2"), 1)
    assert is_decent(companion_rep(ctx, 3, 2), 3)
    assert is_decent(diagonal_rep(ctx, [3, 1, 0]), 1)
    with pytest.raises(ValueError):
        is_decent(parse_matrix(ctx, "0, 1; p, 0"), 1)


def test_decency_under_context_extension():
    ctx = Zq(3, 2, 24)
    assert is_decent(parse_matrix(ctx, "0, 1; p, 0"), 2)
    # a unit twist that is not rational breaks the scalar equation
    t = ctx.from_coeffs([0, 1])
    twisted = PadicMatrix(ctx, ((ctx.zero(), t), (t * ctx.from_int(3), ctx.zero())))
    assert newton_point(twisted) == (Fraction(1, 2), Fraction(1, 2))


def test_degree_n_norm():
    c1 = Zq(5, 1, 24)
    delta = parse_matrix(c1, "2, 1; 0, 3")
    norm, cp = degree_n_norm(delta)
    assert norm.same(delta)
    c2 = Zq(3, 2, 20)
    swap = parse_matrix(c2, "0, 1; p, 0")
    norm, cp = degree_n_norm(swap)
    assert norm.same(parse_matrix(c2, "p, 0; 0, p"))
    t = c2.from_coeffs([0, 1])
    tmat = PadicMatrix(c2, ((t, c2.zero()), (c2.zero(), t)))
    norm, cp = degree_n_norm(tmat)
    assert norm.same(PadicMatrix.identity(c2, 2))
    for c in cp:
        c.rational_part_certified()


def test_matrix_inverse_roundtrip():
    rng = random.Random(37)
    ctx = Zq(3, 2, 24)
    for _ in range(10):
        g = rand_invertible(ctx, 3, rng)
        assert (g @ g.inverse()).same(PadicMatrix.identity(ctx, 3))


def test_literal_parser():
    ctx = Zq(3, 2, 20)
    assert ctx.parse("p^2").valuation() == 2
    assert ctx.parse("p^-1*(1+2*t)").valuation() == -1
    assert ctx.parse("0").exact
    assert ctx.parse("-p").same(ctx.from_int(-3))
    assert ctx.parse("6").valuation() == 1
    assert ctx.parse("t^1").same(ctx.from_coeffs([0, 1]))
    assert ctx.parse("1+t").same(ctx.from_coeffs([1, 1]))
    with pytest.raises(ValueError):
        ctx.parse("t^5")
    with pytest.raises(ValueError):
        ctx.parse("q+1")
    m = parse_matrix(ctx, "[[p, 1+t]; [0, p^2*(2+t)]]")
    assert m.data[1][1].valuation() == 2


def test_precision_soundness_on_reparse():
    for k1, k2 in ((8, 20), (10, 32)):
        a = parse_matrix(Zq(5, 1, k1), "p^2*(3), 1; p, 2")
        b = parse_matrix(Zq(5, 1, k2), "p^2*(3), 1; p, 2")
        assert newton_point(a) == newton_point(b)
        assert kottwitz_point(a) == kottwitz_point(b)


def test_insufficient_precision_is_loud():
    ctx = Zq(5, 1, 4)
    x = ctx.parse("1+5") - ctx.parse("1") - ctx.parse("5")
    m = PadicMatrix(ctx, ((x,),))
    with pytest.raises(PrecisionError, match="insufficient precision"):
        kottwitz_point(m)
    with pytest.raises(PrecisionError):
        x.valuation()
    with pytest.raises(PrecisionError):
        x.inverse()


def test_laurent_family_specialization():
    # kappa of a diagonal family with unit constant terms is blind to the
    # deformation direction: evaluating at any unit or at zero agrees
    rng = random.Random(38)
    ctx = Zq(5, 1, 24)
    for _ in range(10):
        d = rng.choice([1, 2, 3])
        exps = [rng.randrange(0, 4) for _ in range(d)]
        tilt = [rng.randrange(1, 5) for _ in range(d)]

        def family_at(u):
            entries = [ctx.from_int(ctx.p ** a) * (ctx.one() + ctx.from_int(ctx.p * t * u))
                       for a, t in zip(exps, tilt)]
            rows = [[entries[i] if i == j else ctx.zero() for j in range(d)]
                    for i in range(d)]
            return PadicMatrix(ctx, rows)

        base = kottwitz_point(family_at(0))
        assert base == sum(exps)
        for u in (1, 2, 7):
            assert kottwitz_point(family_at(u)) == base


def test_kottwitz_point_torus_norm_one():
    g = FiniteGroup.cyclic(2)
    lat = GaloisLattice(g, (IntMatrix.identity(1), IntMatrix([[-1]])))
    cgrp, cls = kottwitz_point_torus(lat, (3,))
    assert cgrp.invariants() == (2,)
    assert cls == (1,)
    cgrp2, cls2 = kottwitz_point_torus(lat, (4,))
    assert cls2 == (0,)


def test_isoc_invariants_validation():
    IsocInvariants((Fraction(1, 2), Fraction(1, 2)), 1)
    with pytest.raises(ValueError):
        IsocInvariants((0, 1), 1)
    with pytest.raises(ValueError):
        IsocInvariants((1, 0), 2)
