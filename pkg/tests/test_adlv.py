"""Lattice windows, twisted point sets, and orbital integral counts."""

from fractions import Fraction

import pytest

from kotcount.adlv import (
    _left_multiply,
    adlv_points,
    classify_norm,
    enumerate_lattices,
    orbital_integral_gl2,
    relative_position,
    standard_lattice,
    twisted_orbital_integral,
)
from kotcount.padic import PrecisionError, Zq

from oracles import (
    BruteZq,
    brute_submodule_count,
    brute_twisted_value,
    brute_twisted_value_from_keys,
)


def brute_ring(ctx, prec=44):
    return BruteZq(ctx.p, ctx.n, ctx.modulus, prec)


def brute_embed(R, rows):
    return tuple(tuple(R.embed(x) for x in row) for row in rows)


def scale_lattice(lat, mat_int, extra_shift=0):
    """Left multiply a lattice by an integer matrix, p^-extra_shift scaled."""
    ring = lat.ring
    m = tuple(tuple(ring.from_int(x) for x in row) for row in mat_int)
    return _left_multiply(ring, m, lat, extra_shift)


def oracle_key(lat):
    """The (a, b, c) window key of a rank 2 lattice in Hermite form."""
    a, b = lat.diag
    pa = lat.ring.p ** a
    return (a, b, tuple(x % pa for x in lat.cols[1][0]))


# ---------------------------------------------------------------------------
# window enumeration


def test_enumerate_rank_one_window_is_a_chain():
    for p, n, r in ((2, 1, 0), (3, 1, 2), (2, 2, 3)):
        lats = enumerate_lattices(1, p, n, r)
        assert len(lats) == 2 * r + 1
        assert len({l.key() for l in lats}) == len(lats)


def test_enumerate_counts_match_submodule_oracle():
    # submodules of (O / p^{2r})^2 pulled back to the window, counted by
    # the dumbest closure over cyclic generators
    for p, n in ((2, 1), (3, 1), (2, 2)):
        ctx = Zq(p, n)
        lats = enumerate_lattices(2, p, n, 1)
        want = brute_submodule_count(p, n, ctx.modulus, 1)
        assert len(lats) == want


def test_enumerate_frozen_window_sizes():
    assert len(enumerate_lattices(2, 2, 1, 1)) == 15
    assert len(enumerate_lattices(2, 3, 1, 1)) == 23
    assert len(enumerate_lattices(2, 2, 2, 1)) == 33


def test_enumerate_output_is_canonical():
    ring = None
    for lat in enumerate_lattices(2, 3, 1, 1):
        ring = lat.ring
        a, b = lat.diag
        # pivots on the diagonal, the off entry reduced mod the row pivot
        assert ring.val(lat.cols[0][0]) == a
        assert ring.val(lat.cols[1][1]) == b
        assert lat.cols[0][1] == ring.zero
        c = lat.cols[1][0]
        assert all(x < 3 ** a for x in c)
        # unit content and window bounds honored
        vals = [v for v in (a, b, ring.val(c)) if v is not None]
        assert min(vals) == 0
        assert lat.r_lo <= 1 and lat.r_hi <= 1


def test_enumerate_cap_and_precision_guards():
    with pytest.raises(ValueError, match="enumeration cap exceeded"):
        enumerate_lattices(2, 2, 1, 1, cap=10)
    with pytest.raises(PrecisionError, match="insufficient precision"):
        enumerate_lattices(2, 2, 1, 13)


# ---------------------------------------------------------------------------
# relative position


def test_relative_position_examples():
    ctx = Zq(3, 1)
    l0 = standard_lattice(ctx, 2)
    assert relative_position(l0, l0) == (0, 0)
    assert relative_position(l0, scale_lattice(l0, [[3, 0], [0, 3]])) == (1, 1)
    assert relative_position(l0, scale_lattice(l0, [[3, 0], [0, 1]])) == (1, 0)
    assert relative_position(l0, scale_lattice(l0, [[9, 0], [0, 3]])) == (2, 1)
    shrunk = scale_lattice(l0, [[1, 0], [0, 1]], extra_shift=1)
    assert relative_position(l0, shrunk) == (-1, -1)


def test_relative_position_antisymmetry_on_full_window():
    lats = enumerate_lattices(2, 2, 1, 1)
    for a in lats:
        for b in lats:
            fwd = relative_position(a, b)
            rev = relative_position(b, a)
            assert rev == tuple(sorted((-x for x in fwd), reverse=True))


def test_relative_position_rejects_mixed_contexts():
    a = standard_lattice(Zq(2, 1), 2)
    b = standard_lattice(Zq(3, 1), 2)
    with pytest.raises(ValueError, match="mixed p-adic contexts"):
        relative_position(a, b)


# ---------------------------------------------------------------------------
# twisted point sets


def test_adlv_rank_one_scalar():
    ctx = Zq(2, 1)
    b = ctx.parse_matrix("2")
    rep = adlv_points(b, (1,), 2)
    assert rep.count == 5 and not rep.saturated
    reph = adlv_points(b, (1,), 2, mod_homothety=True)
    assert reph.count == 1 and reph.saturated


def test_adlv_frozen_counts_for_basic_class():
    ctx = Zq(2, 1)
    b = ctx.parse_matrix("0,1;2,0")
    rep = adlv_points(b, (1, 0), 3)
    assert (rep.count, rep.saturated) == (13, False)
    assert adlv_points(b, (1, 0), 4).count == 17
    reph = adlv_points(b, (1, 0), 3, mod_homothety=True)
    assert (reph.count, reph.saturated) == (2, True)


def test_adlv_ordinary_contains_standard_lattice():
    ctx = Zq(3, 1)
    b = ctx.parse_matrix("3,0;0,1")
    rep = adlv_points(b, (1, 0), 2)
    keys = {l.key() for l in rep.points}
    assert standard_lattice(ctx, 2).key() in keys


def test_adlv_empty_when_slope_mass_disagrees():
    ctx = Zq(3, 1)
    b = ctx.parse_matrix("3,0;0,3")
    rep = adlv_points(b, (1, 0), 2)
    assert rep.count == 0 and rep.saturated


def test_adlv_mu_validation():
    ctx = Zq(2, 1)
    b = ctx.parse_matrix("0,1;2,0")
    with pytest.raises(ValueError, match="mu must be dominant"):
        adlv_points(b, (0, 1), 2)
    with pytest.raises(ValueError, match="mu length must match"):
        adlv_points(b, (1, 0, 0), 2)


def test_adlv_cap_and_precision_guards():
    ctx = Zq(2, 1)
    b = ctx.parse_matrix("0,1;2,0")
    with pytest.raises(ValueError, match="enumeration cap exceeded"):
        adlv_points(b, (1, 0), 3, cap=5)
    shallow = Zq(2, 1, precision=8)
    with pytest.raises(PrecisionError, match="insufficient precision"):
        adlv_points(shallow.parse_matrix("0,1;2,0"), (1, 0), 3)


def test_adlv_twisted_conjugation_moves_points():
    # replacing b by g b sigma(g)^-1 must carry the point set to its
    # g translate, lattice by lattice
    cases = [
        (Zq(2, 1), "0,1;2,0", "2,-1;2,-2", [[1, 1], [0, 1]], (1, 0), 3),
        (Zq(3, 2), "0,1;3,0", "-1,1;2,1", [[1, 0], [1, 1]], (1, 0), 2),
    ]
    for ctx, b_lit, bp_lit, g, mu, depth in cases:
        rep = adlv_points(ctx.parse_matrix(b_lit), mu, depth)
        repp = adlv_points(ctx.parse_matrix(bp_lit), mu, depth)
        moved = {scale_lattice(l, g).key() for l in rep.points}
        assert moved == {l.key() for l in repp.points}


# ---------------------------------------------------------------------------
# twisted orbital integrals


def test_twisted_integral_rank_one():
    ctx = Zq(3, 1)
    b = ctx.parse_matrix("3")
    assert twisted_orbital_integral(b, (-1,)) == 1
    assert twisted_orbital_integral(b, (0,)) == 0


def test_twisted_integral_rejects_higher_rank():
    ctx = Zq(3, 1)
    b = ctx.parse_matrix("1,0,0;0,1,0;0,0,1")
    with pytest.raises(ValueError, match="dimension must be 1 or 2"):
        twisted_orbital_integral(b, (0, 0, 0))


def test_twisted_integral_unit_and_central_cells():
    ctx = Zq(3, 1)
    assert twisted_orbital_integral(ctx.parse_matrix("1,0;0,1"), (0, 0)) == 1
    assert twisted_orbital_integral(ctx.parse_matrix("3,0;0,3"), (-1, -1)) == 1
    assert twisted_orbital_integral(ctx.parse_matrix("3,0;0,3"), (0, -2)) == 0
    ctx22 = Zq(2, 2)
    assert twisted_orbital_integral(ctx22.parse_matrix("2,0;0,2"), (-1, -1)) == 1
    # determinant valuation must pay for the cell
    assert twisted_orbital_integral(ctx.parse_matrix("0,-18;1,3"), (0, 0)) == 0


def test_twisted_integral_elliptic_disc_cross_checked():
    ctx = Zq(2, 1)
    b = ctx.parse_matrix("0,1;-1,1")
    got = twisted_orbital_integral(b, (0, 0))
    R = brute_ring(ctx)
    want = brute_twisted_value(R, brute_embed(R, [[0, 1], [-1, 1]]), 0,
                               (0, 0), 3, "elliptic")
    assert got == want == 1


def test_twisted_integral_nonmaximal_order_cross_checked():
    # conductor one step below maximal: the class count doubles but the
    # stabilizer shrinks by the unit index p + 1
    ctx = Zq(3, 1)
    b = ctx.parse_matrix("0,-18;1,3")
    got = twisted_orbital_integral(b, (-1, -1))
    R = brute_ring(ctx)
    want = brute_twisted_value(R, brute_embed(R, [[0, -18], [1, 3]]), 0,
                               (-1, -1), 3, "elliptic")
    assert got == want == Fraction(1, 4)
    assert classify_norm(b) == "elliptic"


def test_twisted_integral_split_cells_cross_checked():
    ctx = Zq(3, 1)
    R = brute_ring(ctx)
    b = ctx.parse_matrix("3,0;0,1")
    got = twisted_orbital_integral(b, (0, -1))
    want = brute_twisted_value(R, brute_embed(R, [[3, 0], [0, 1]]), 0,
                               (0, -1), 3, "split")
    assert got == want == 1
    assert classify_norm(b) == "split"
    b2 = ctx.parse_matrix("9,0;0,1")
    got2 = twisted_orbital_integral(b2, (0, -2))
    want2 = brute_twisted_value(R, brute_embed(R, [[9, 0], [0, 1]]), 0,
                                (0, -2), 3, "split")
    assert got2 == want2 == 1


def test_twisted_integral_basic_class_minuscule_cell():
    ctx = Zq(2, 1)
    b = ctx.parse_matrix("0,1;2,0")
    got = twisted_orbital_integral(b, (0, -1))
    R = brute_ring(ctx)
    want = brute_twisted_value(R, brute_embed(R, [[0, 1], [2, 0]]), 0,
                               (0, -1), 3, "elliptic")
    assert got == want == 1


def test_twisted_integral_inverse_representative_cell():
    # denominator entries exercise the internal rescaling; p * b^-1 is
    # integral, so the oracle sees the same map with a unit shift
    ctx = Zq(2, 1)
    b = ctx.parse_matrix("0,1;2,0").inverse()
    got = twisted_orbital_integral(b, (1, 0))
    R = brute_ring(ctx)
    want = brute_twisted_value(R, brute_embed(R, [[0, 1], [2, 0]]), 1,
                               (1, 0), 3, "elliptic")
    assert got == want == 1


def test_twisted_integral_quaternion_norm_cross_checked():
    ctx = Zq(3, 2)
    b = ctx.parse_matrix("0,1;3,0")
    assert classify_norm(b) == "central"
    got = twisted_orbital_integral(b, (0, -1))
    R = brute_ring(ctx)
    amat = brute_embed(R, [[0, 1], [3, 0]])
    want = brute_twisted_value(R, amat, 0, (0, -1), 2, "quaternion")
    assert got == want == 1


def test_twisted_integral_from_production_points_agrees():
    # the shared enumeration path: production supplies the qualifying
    # window, the oracle reverifies every key and recounts from scratch
    ctx = Zq(3, 2)
    b = ctx.parse_matrix("0,1;3,0")
    rep = adlv_points(b, (1, 0), 2)
    keys = [oracle_key(l) for l in rep.points]
    R = brute_ring(ctx)
    amat = brute_embed(R, [[0, 1], [3, 0]])
    got = brute_twisted_value_from_keys(R, amat, 0, (0, -1), keys,
                                        "quaternion")
    assert got == twisted_orbital_integral(b, (0, -1)) == 1


def test_twisted_integral_invariant_under_twisted_conjugation():
    ctx = Zq(3, 1)
    assert twisted_orbital_integral(ctx.parse_matrix("1,-16;1,2"),
                                    (-1, -1)) == Fraction(1, 4)


def test_twisted_integral_unipotent_is_loud():
    ctx = Zq(3, 1)
    with pytest.raises(ValueError, match="infinite orbit suspected"):
        twisted_orbital_integral(ctx.parse_matrix("1,1;0,1"), (0, 0))
    assert classify_norm(ctx.parse_matrix("1,1;0,1")) == "ambiguous"


def test_twisted_integral_normalization_rescales():
    ctx = Zq(3, 1)
    b = ctx.parse_matrix("0,-18;1,3")
    assert twisted_orbital_integral(b, (-1, -1),
                                    normalization="halved") == Fraction(1, 2)
    with pytest.raises(ValueError, match="unknown normalization"):
        twisted_orbital_integral(b, (-1, -1), normalization="tamagawa")


def test_twisted_integral_precision_guard():
    shallow = Zq(3, 1, precision=8)
    with pytest.raises(PrecisionError, match="insufficient precision"):
        twisted_orbital_integral(shallow.parse_matrix("0,-18;1,3"), (-1, -1))


# ---------------------------------------------------------------------------
# untwisted integrals on the tree


def test_tree_integral_unit_and_shallow_orders():
    assert orbital_integral_gl2([[0, 1], [-1, 1]], 2) == 1
    assert orbital_integral_gl2([[0, -1], [1, 5]], 3) == 1
    assert orbital_integral_gl2([[7, 0], [0, 7]], 5) == 1


def test_tree_integral_matches_window_oracle():
    cases = [
        ([[0, 5], [1, 0]], 2, Fraction(4)),
        ([[1, 10], [2, 1]], 2, Fraction(10)),
        ([[0, -55], [1, 2]], 3, Fraction(4)),
    ]
    for g, ell, want in cases:
        got = orbital_integral_gl2(g, ell)
        R = BruteZq(ell, 1, (0, 1))
        oracle = brute_twisted_value(R, brute_embed(R, g), 0, (0, 0), 3,
                                     "gl2")
        assert got == oracle == want


def test_tree_integral_charpoly_literal():
    assert orbital_integral_gl2((1, 0, -5), 2) == 4
    with pytest.raises(ValueError, match="monic"):
        orbital_integral_gl2((2, 0, -5), 2)


def test_tree_integral_guards():
    assert orbital_integral_gl2([[0, -3], [1, 0]], 3) == 0
    with pytest.raises(ValueError, match="non-elliptic local orbit"):
        orbital_integral_gl2([[2, 0], [0, 1]], 3)
    with pytest.raises(ValueError, match="non-elliptic local orbit"):
        orbital_integral_gl2([[1, 1], [0, 1]], 3)
    assert orbital_integral_gl2([[0, 5], [1, 0]], 2,
                                normalization="halved") == 8
