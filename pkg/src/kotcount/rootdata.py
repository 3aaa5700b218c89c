"""Root data with Galois action, fundamental groups, and endoscopic presets.

Root data are based: character lattice with a chosen dual cocharacter
lattice (standard dot pairing in dual bases), simple roots and coroots,
and a finite Galois action on cocharacters permuting the simple coroots.

Endoscopic enumeration works on the dual side with exact rational
arithmetic: a semisimple class is a torsion point ``s`` of the dual torus
(coordinates in the character lattice tensored with Q/Z), its centralizer
root system is read off from pairings with coroots, and twists are Weyl
elements fixing ``s`` on the nose.  Only the small presets are supported;
everything is derived by the enumeration itself rather than copied from
tables.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product as iproduct
from math import gcd

from .abelian import FgAbGroup, IntMatrix, kernel_basis, torsion_subgroup
from .galois import FiniteGroup, FiniteGroupAction, GaloisLattice, coinvariants

W_CLOSURE_CAP = 20000


class RootDatum:
    """Based root datum with a finite Galois action on the cocharacters.

    ``simple_roots`` live in the character lattice, ``simple_coroots`` in
    the cocharacter lattice; the pairing is the dot product.  The action
    matrices act on cocharacters; the induced action on characters is the
    inverse transpose.
    """

    __slots__ = ("label", "rank", "simple_roots", "simple_coroots", "galois")

    def __init__(self, label, rank, simple_roots, simple_coroots, galois=None):
        simple_roots = tuple(tuple(int(x) for x in r) for r in simple_roots)
        simple_coroots = tuple(tuple(int(x) for x in r) for r in simple_coroots)
        if len(simple_roots) != len(simple_coroots):
            raise ValueError("roots and coroots must come in pairs")
        for v in simple_roots + simple_coroots:
            if len(v) != rank:
                raise ValueError("root vector of wrong rank")
        for i, (a, av) in enumerate(zip(simple_roots, simple_coroots)):
            if _dot(a, av) != 2:
                raise ValueError("pairing of a simple pair must be 2")
            for j, b in enumerate(simple_roots):
                if i != j and _dot(b, av) > 0:
                    raise ValueError("off-diagonal Cartan entries must be <= 0")
        if galois is None:
            galois = FiniteGroupAction(FiniteGroup.cyclic(1),
                                       (IntMatrix.identity(rank),))
        if galois.rank != rank:
            raise ValueError("Galois action rank mismatch")
        coroot_set = set(simple_coroots)
        for m in galois.matrices:
            for av in simple_coroots:
                if m.apply(av) not in coroot_set:
                    raise ValueError("Galois action must permute simple coroots")
        object.__setattr__(self, "label", label)
        object.__setattr__(self, "rank", rank)
        object.__setattr__(self, "simple_roots", simple_roots)
        object.__setattr__(self, "simple_coroots", simple_coroots)
        object.__setattr__(self, "galois", galois)

    def __setattr__(self, *a):
        raise AttributeError("RootDatum is immutable")

    def __repr__(self):
        return "RootDatum(%s)" % self.label

    def weyl_group_on_characters(self):
        """All Weyl elements as matrices on the character lattice."""
        gens = []
        for a, av in zip(self.simple_roots, self.simple_coroots):
            rows = []
            for i in range(self.rank):
                e = tuple(1 if j == i else 0 for j in range(self.rank))
                img = tuple(e[j] - av[i] * a[j] for j in range(self.rank))
                rows.append(img)
            # built row-wise for basis vectors, so transpose into a matrix
            gens.append(IntMatrix(rows).transpose())
        seen = {IntMatrix.identity(self.rank)}
        frontier = list(seen)
        while frontier:
            w = frontier.pop()
            for g in gens:
                nxt = g @ w
                if nxt not in seen:
                    if len(seen) >= W_CLOSURE_CAP:
                        raise ValueError("Weyl closure exceeded the safety cap")
                    seen.add(nxt)
                    frontier.append(nxt)
        return sorted(seen, key=lambda m: m.data)

    def all_coroots(self):
        """Closure of the simple coroots under the Weyl group."""
        gens = []
        for a, av in zip(self.simple_roots, self.simple_coroots):
            gens.append((a, av))
        seen = set(self.simple_coroots) | {tuple(-x for x in c)
                                           for c in self.simple_coroots}
        frontier = list(seen)
        while frontier:
            v = frontier.pop()
            for a, av in gens:
                img = tuple(v[j] - _dot(a, v) * av[j] for j in range(self.rank))
                if img not in seen:
                    seen.add(img)
                    frontier.append(img)
        return sorted(seen)


def _dot(x, y):
    return sum(a * b for a, b in zip(x, y))


# ---------------------------------------------------------------------------
# presets


def gl_datum(n):
    rank = n
    roots = [tuple(1 if j == i else (-1 if j == i + 1 else 0) for j in range(rank))
             for i in range(n - 1)]
    return RootDatum("GL(%d)" % n, rank, roots, roots)


def sl_datum(n):
    # coordinates in the basis of simple coroots
    rank = n - 1
    cartan = [[2 if i == j else (-1 if abs(i - j) == 1 else 0) for j in range(rank)]
              for i in range(rank)]
    coroots = [tuple(1 if j == i else 0 for j in range(rank)) for i in range(rank)]
    return RootDatum("SL(%d)" % n, rank, cartan, coroots)


def pgl_datum(n):
    # coordinates in the basis of fundamental coweights
    rank = n - 1
    roots = [tuple(1 if j == i else 0 for j in range(rank)) for i in range(rank)]
    cartan = [[2 if i == j else (-1 if abs(i - j) == 1 else 0) for j in range(rank)]
              for i in range(rank)]
    return RootDatum("PGL(%d)" % n, rank, roots, cartan)


def gsp4_datum():
    # characters (f1, f2, f0) of diag(t1, t2, v/t2, v/t1); f0 the similitude
    alpha = (1, -1, 0)
    beta = (0, 2, -1)
    alpha_cov = (1, -1, 0)
    beta_cov = (0, 1, 0)
    return RootDatum("GSp(4)", 3, (alpha, beta), (alpha_cov, beta_cov))


def norm_one_torus_datum():
    g = FiniteGroup.cyclic(2)
    act = FiniteGroupAction(g, (IntMatrix.identity(1), IntMatrix([[-1]])))
    return RootDatum("U(1)", 1, (), (), act)


def induced_torus_datum():
    g = FiniteGroup.cyclic(2)
    act = FiniteGroupAction(g, (IntMatrix.identity(2), IntMatrix([[0, 1], [1, 0]])))
    return RootDatum("ResTorus(2)", 2, (), (), act)


def product_datum(a, b):
    """Direct product of two root data over a common acting group."""
    if a.galois.group.table != b.galois.group.table:
        raise ValueError("product requires one acting group")
    rank = a.rank + b.rank

    def pad_left(v):
        return tuple(v) + (0,) * b.rank

    def pad_right(v):
        return (0,) * a.rank + tuple(v)

    roots = tuple(pad_left(r) for r in a.simple_roots) + \
        tuple(pad_right(r) for r in b.simple_roots)
    coroots = tuple(pad_left(r) for r in a.simple_coroots) + \
        tuple(pad_right(r) for r in b.simple_coroots)
    mats = []
    for ma, mb in zip(a.galois.matrices, b.galois.matrices):
        rows = []
        for i in range(a.rank):
            rows.append(tuple(ma.data[i]) + (0,) * b.rank)
        for i in range(b.rank):
            rows.append((0,) * a.rank + tuple(mb.data[i]))
        mats.append(IntMatrix(rows))
    act = FiniteGroupAction(a.galois.group, tuple(mats))
    return RootDatum("%s x %s" % (a.label, b.label), rank, roots, coroots, act)


# ---------------------------------------------------------------------------
# fundamental group and Tamagawa numbers


def pi1(rd):
    """Cocharacters modulo the coroot lattice, with the induced action."""
    rel = IntMatrix.from_cols(rd.all_coroots(), rows=rd.rank) if rd.simple_coroots \
        else IntMatrix.zeros(rd.rank, 0)
    return GaloisLattice(rd.galois.group, rd.galois.matrices, rel)


def component_group_of_center_dual(rd):
    """Torsion of the fundamental group coinvariants under the full action.

    This is the character group of the component group of the Galois-fixed
    center of the dual group.
    """
    lat = pi1(rd)
    cgrp, _ = coinvariants(lat, frozenset(lat.group.elements()))
    tors, _ = torsion_subgroup(cgrp)
    return tors

_TAU_WHITELIST = {
    "U(1)", "ResTorus(2)", "GSp(4)",
    # split group with split center quotient, so the first cohomology
    # kernel vanishes and the component-group formula applies
    "GSp(4)-M",
}


def _tau_label_ok(label):
    parts = label.split(" x ")
    for part in parts:
        if part in _TAU_WHITELIST:
            continue
        if part.startswith(("GL(", "SL(", "PGL(")) and part.endswith(")"):
            try:
                int(part[part.index("(") + 1:-1])
            except ValueError:
                return False
            continue
        return False
    return True


def tamagawa_number(rd):
    """Tamagawa number via the order of the dual-center component group.

    Only certified for the preset whitelist, where the global cohomology
    kernel is known to vanish; anything else raises.
    """
    if not _tau_label_ok(rd.label):
        raise ValueError("ker¹ not certified trivial")
    return Fraction(component_group_of_center_dual(rd).order())


# ---------------------------------------------------------------------------
# elliptic endoscopy for the presets


class EndoscopicDatum:
    """One elliptic endoscopic datum of a preset group.

    ``s_class`` is a torsion point of the dual torus as a tuple of exact
    fractions in [0,1); ``twist`` is the Weyl matrix (on characters) giving
    the Galois action on the endoscopic dual group, with ``twist_label``
    a readable tag.  ``out_order`` is the outer automorphism count.
    """

    __slots__ = ("s_class", "has_free_part", "H_root_datum", "twist",
                 "twist_label", "is_elliptic", "out_order")

    def __init__(self, s_class, H_root_datum, twist, twist_label,
                 is_elliptic, out_order, has_free_part=False):
        object.__setattr__(self, "s_class", tuple(s_class))
        object.__setattr__(self, "has_free_part", has_free_part)
        object.__setattr__(self, "H_root_datum", H_root_datum)
        object.__setattr__(self, "twist", twist)
        object.__setattr__(self, "twist_label", twist_label)
        object.__setattr__(self, "is_elliptic", is_elliptic)
        object.__setattr__(self, "out_order", out_order)

    def __setattr__(self, *a):
        raise AttributeError("EndoscopicDatum is immutable")

    def __repr__(self):
        return "EndoscopicDatum(H=%s, s=%s, twist=%s, out=%d)" % (
            self.H_root_datum.label, self.s_class, self.twist_label, self.out_order)


def _mod1(fr):
    return fr - (fr.numerator // fr.denominator)


def _apply_frac(mat, vec):
    return tuple(_mod1(sum(Fraction(mat.data[i][j]) * vec[j]
                           for j in range(len(vec))))
                 for i in range(mat.rows))


def _pair_frac(svec, coroot):
    return _mod1(sum(a * b for a, b in zip(svec, coroot)))


def _rank_of(rows):
    if not rows:
        return 0
    m = IntMatrix(rows)
    kb = kernel_basis(m)
    return m.cols - kb.cols


def _in_rational_span(rows, vec):
    if all(x == 0 for x in vec):
        return True
    base = _rank_of(rows)
    return _rank_of(rows + [tuple(vec)]) == base


def _h_label(g_label, n_h_roots, twist_order, rank):
    if g_label == "SL(2)":
        return "SL(2)" if n_h_roots else "U(1)"
    if g_label == "GL(2)":
        if n_h_roots:
            return "GL(2)"
        return "ResTorus(2)" if twist_order == 2 else "GL(1) x GL(1)"
    if g_label == "GSp(4)":
        if n_h_roots == 8:
            return "GSp(4)"
        if n_h_roots == 4:
            return "GSp(4)-M"
        return "torus"
    return "H-of-%s" % g_label


def enumerate_elliptic_endoscopy(rd, torsion_bound):
    """All elliptic endoscopic data with ``s`` of order dividing the bound.

    Supports the rank <= 2 presets GL(2), SL(2), GSp(4).  Enumeration is
    by brute force over torsion points of the dual torus modulo central
    translations and the Weyl group, then over Weyl twists fixing ``s``;
    ellipticity is the rational fixed-space containment test.
    """
    if rd.label not in ("GL(2)", "SL(2)", "GSp(4)"):
        raise ValueError("preset enumeration only")
    if torsion_bound < 1:
        raise ValueError("torsion bound must be positive")
    weyl = rd.weyl_group_on_characters()
    coroots = rd.all_coroots()
    center_rows = [tuple(c) for c in coroots]
    center_basis = kernel_basis(IntMatrix(center_rows)) if center_rows \
        else IntMatrix.identity(rd.rank)
    denom = torsion_bound * 2

    def center_shifts():
        cols = [center_basis.col(j) for j in range(center_basis.cols)]
        for coeffs in iproduct(range(denom), repeat=len(cols)):
            yield tuple(_mod1(sum(Fraction(c * v[i], denom) for c, v in zip(coeffs, cols)))
                        for i in range(rd.rank))

    shifts = sorted(set(center_shifts()))

    def canonical_s(s):
        best = None
        for w in weyl:
            ws = _apply_frac(w, s)
            for z in shifts:
                cand = tuple(_mod1(a + b) for a, b in zip(ws, z))
                if best is None or cand < best:
                    best = cand
        return best

    candidates = set()
    grid = [Fraction(k, torsion_bound) for k in range(torsion_bound)]
    for coords in iproduct(grid, repeat=rd.rank):
        candidates.add(canonical_s(coords))

    root_of = _root_lookup(rd)
    out = []
    for s in sorted(candidates):
        h_coroots = [c for c in coroots if _pair_frac(s, c) == 0]
        h_roots = [root_of[c] for c in h_coroots]
        twist_reps = _twist_candidates(weyl, s, h_coroots, rd)
        for twist in twist_reps:
            order = _matrix_order(twist)
            if not _datum_elliptic(rd, h_coroots, twist, coroots):
                continue
            lam = _out_order(weyl, s, h_coroots, twist, shifts, rd)
            h_simples, h_cosimples = _sub_simple_system(h_roots, h_coroots, rd)
            tgroup = FiniteGroup.cyclic(order)
            tmats = []
            cur = IntMatrix.identity(rd.rank)
            xlat_twist = _transpose_inverse(twist)
            for _ in range(order):
                tmats.append(cur)
                cur = xlat_twist @ cur
            act = FiniteGroupAction(tgroup, tuple(tmats))
            label = _h_label(rd.label, len(h_coroots), order, rd.rank)
            hrd = RootDatum(label, rd.rank, h_simples, h_cosimples, act)
            out.append(EndoscopicDatum(
                s_class=s,
                H_root_datum=hrd,
                twist=twist,
                twist_label="trivial" if order == 1 else "order-%d" % order,
                is_elliptic=True,
                out_order=lam,
            ))
    return out


def _root_lookup(rd):
    """Map each coroot to its root via the Weyl orbit of the simple pairs."""
    table = {}
    frontier = list(zip(rd.simple_roots, rd.simple_coroots))
    for a, av in list(frontier):
        frontier.append((tuple(-x for x in a), tuple(-x for x in av)))
    seen = set()
    pending = frontier[:]
    while pending:
        a, av = pending.pop()
        if av in seen:
            continue
        seen.add(av)
        table[av] = a
        for b, bv in zip(rd.simple_roots, rd.simple_coroots):
            a2 = tuple(a[j] - _dot(a, bv) * b[j] for j in range(rd.rank))
            av2 = tuple(av[j] - _dot(b, av) * bv[j] for j in range(rd.rank))
            if av2 not in seen:
                pending.append((a2, av2))
    return table


def _fixes_roots(w, roots):
    rs = set(roots)
    return all(tuple(w.apply(r)) in rs for r in roots)


def _matrix_order(m):
    cur = m
    n = 1
    eye = IntMatrix.identity(m.rows)
    while cur != eye:
        cur = cur @ m
        n += 1
        if n > 64:
            raise AssertionError("matrix order runaway")
    return n


def _transpose_inverse(m):
    """Inverse transpose of a finite-order unimodular matrix."""
    order = _matrix_order(m)
    inv = IntMatrix.identity(m.rows)
    for _ in range(order - 1):
        inv = inv @ m
    return inv.transpose()


def _generated_reflections(weyl, h_roots, h_coroots, rd):
    """The Weyl group of the H-subsystem, as a set of matrices."""
    refl = set()
    for a, av in zip(h_roots, h_coroots):
        rows = []
        for i in range(rd.rank):
            e = tuple(1 if j == i else 0 for j in range(rd.rank))
            rows.append(tuple(e[j] - av[i] * a[j] for j in range(rd.rank)))
        refl.add(IntMatrix(rows).transpose())
    seen = {IntMatrix.identity(rd.rank)}
    frontier = list(seen)
    while frontier:
        w = frontier.pop()
        for g in refl:
            nxt = g @ w
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return seen


def _twist_candidates(weyl, s, h_coroots, rd):
    """Coset representatives (mod the H-Weyl group) of twists fixing s exactly."""
    root_of = _root_lookup(rd)
    h_roots = [root_of[c] for c in h_coroots]
    wh = _generated_reflections(weyl, h_roots, h_coroots, rd)
    fixers = [w for w in weyl
              if _apply_frac(w, s) == tuple(_mod1(x) for x in s)
              and _fixes_roots(w, h_roots)]
    eye = IntMatrix.identity(rd.rank)
    reps = []
    covered = set()
    for w in fixers:
        if w in covered:
            continue
        coset = {w @ h for h in wh}
        covered |= coset
        reps.append(eye if eye in coset else min(coset, key=lambda m: m.data))
    return reps


def _datum_elliptic(rd, h_coroots, twist, all_coroots):
    """Fixed center of the endoscopic dual group sits inside the big center."""
    rows = [tuple(c) for c in h_coroots]
    eye = IntMatrix.identity(rd.rank)
    diff = twist - eye
    rows_twist = rows + [diff.data[i] for i in range(rd.rank)]
    fixed = kernel_basis(IntMatrix(rows_twist)) if rows_twist \
        else IntMatrix.identity(rd.rank)
    if all_coroots:
        z_basis = kernel_basis(IntMatrix([tuple(c) for c in all_coroots]))
        z_rows = [z_basis.col(j) for j in range(z_basis.cols)]
    else:
        z_rows = [tuple(eye.data[i]) for i in range(rd.rank)]
    for j in range(fixed.cols):
        if not _in_rational_span(z_rows, fixed.col(j)):
            return False
    return True


def _out_order(weyl, s, h_coroots, twist, shifts, rd):
    """Order of the datum stabilizer modulo the inner H-Weyl part."""
    root_of = _root_lookup(rd)
    h_roots = [root_of[c] for c in h_coroots]
    wh = _generated_reflections(weyl, h_roots, h_coroots, rd)

    def fixes_class(w):
        ws = _apply_frac(w, s)
        for z in shifts:
            if tuple(_mod1(a + b) for a, b in zip(ws, z)) == tuple(_mod1(x) for x in s):
                return True
        return False

    stab = [w for w in weyl
            if fixes_class(w) and _fixes_roots(w, h_roots)
            and _commutes_mod_inner(w, twist, wh)]
    inner = [w for w in stab if w in wh]
    if len(stab) % max(len(inner), 1) != 0:
        raise AssertionError("stabilizer order not divisible by inner part")
    return len(stab) // max(len(inner), 1)


def _commutes_mod_inner(w, twist, wh):
    lhs = w @ twist
    for h in wh:
        if lhs == twist @ (h @ w):
            return True
    return False


def _sub_simple_system(h_roots, h_coroots, rd):
    """Simple system of a closed subsystem: positive roots that do not split."""
    if not h_roots:
        return (), ()
    weights = [3 ** i + 1 for i in range(rd.rank)]

    def height(r):
        return sum(w * x for w, x in zip(weights, r))

    pos = [(r, c) for r, c in zip(h_roots, h_coroots) if height(r) > 0]
    simples = []
    for r, c in pos:
        splits = False
        for r1, _ in pos:
            for r2, _ in pos:
                if tuple(a + b for a, b in zip(r1, r2)) == r:
                    splits = True
        if not splits:
            simples.append((r, c))
    simples.sort()
    return tuple(r for r, _ in simples), tuple(c for _, c in simples)


def datum_product(d1, d2):
    """Product of two endoscopic data, matching ``product_datum`` groups.

    The twist acts blockwise and the outer automorphism counts multiply,
    since the ambient Weyl group of a product is the product of the
    factors' Weyl groups.
    """
    h1, h2 = d1.H_root_datum, d2.H_root_datum
    k1 = len(h1.galois.group.table)
    k2 = len(h2.galois.group.table)
    period = k1 * k2 // gcd(k1, k2)
    rank = h1.rank + h2.rank

    def block(ma, mb):
        rows = [tuple(ma.data[i]) + (0,) * h2.rank for i in range(h1.rank)]
        rows += [(0,) * h1.rank + tuple(mb.data[i]) for i in range(h2.rank)]
        return IntMatrix(rows)

    mats = tuple(block(h1.galois.matrices[i % k1], h2.galois.matrices[i % k2])
                 for i in range(period))
    act = FiniteGroupAction(FiniteGroup.cyclic(period), mats)
    roots = tuple(tuple(r) + (0,) * h2.rank for r in h1.simple_roots) + \
        tuple((0,) * h1.rank + tuple(r) for r in h2.simple_roots)
    coroots = tuple(tuple(r) + (0,) * h2.rank for r in h1.simple_coroots) + \
        tuple((0,) * h1.rank + tuple(r) for r in h2.simple_coroots)
    hrd = RootDatum("%s x %s" % (h1.label, h2.label), rank, roots, coroots, act)
    return EndoscopicDatum(
        s_class=tuple(d1.s_class) + tuple(d2.s_class),
        H_root_datum=hrd,
        twist=block(d1.twist, d2.twist),
        twist_label="%s|%s" % (d1.twist_label, d2.twist_label),
        is_elliptic=d1.is_elliptic and d2.is_elliptic,
        out_order=d1.out_order * d2.out_order,
    )


def iota(rd_g, datum):
    """The stabilization constant tau(G) / (tau(H) * out_order)."""
    tg = tamagawa_number(rd_g)
    th = tamagawa_number(datum.H_root_datum)
    return tg / th / datum.out_order


# ---------------------------------------------------------------------------
# synthetic destabilization bookkeeping


class DestabPair:
    """One (gamma0, kappa) term with its endoscopic assignment and fiber."""

    __slots__ = ("gamma0", "kappa", "e_label", "iota_g_inv", "value", "fiber")

    def __init__(self, gamma0, kappa, e_label, iota_g_inv, value, fiber):
        object.__setattr__(self, "gamma0", gamma0)
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "e_label", e_label)
        object.__setattr__(self, "iota_g_inv", Fraction(iota_g_inv))
        object.__setattr__(self, "value", Fraction(value))
        object.__setattr__(self, "fiber", tuple((str(g), Fraction(v)) for g, v in fiber))

    def __setattr__(self, *a):
        raise AttributeError("DestabPair is immutable")


class DestabData:
    """Synthetic dataset for the destabilization identity."""

    __slots__ = ("tau_g", "endo", "pairs")

    def __init__(self, tau_g, endo, pairs):
        object.__setattr__(self, "tau_g", Fraction(tau_g))
        object.__setattr__(self, "endo",
                           {k: (int(lam), Fraction(th)) for k, (lam, th) in endo.items()})
        object.__setattr__(self, "pairs", tuple(pairs))

    def __setattr__(self, *a):
        raise AttributeError("DestabData is immutable")


def destabilization_check(data):
    """Compare the (gamma0, kappa) double sum with the endoscopic sum.

    The left side is ``tau_g * sum of iota_g_inv * value`` over pairs; the
    right side distributes each pair to its endoscopic datum as
    ``iota(G,H) * tau_H * sum over the fiber of iota_h_inv * value``.
    Fibers violating the counting identity are flagged, never silently
    accepted.
    """
    lhs = Fraction(0)
    rhs = Fraction(0)
    violations = []
    for idx, pair in enumerate(data.pairs):
        if pair.e_label not in data.endo:
            raise ValueError("pair references unknown endoscopic datum %r" % pair.e_label)
        lam, tau_h = data.endo[pair.e_label]
        lhs += data.tau_g * pair.iota_g_inv * pair.value
        iota_gh = data.tau_g / tau_h / lam
        fiber_sum = sum((v for _, v in pair.fiber), Fraction(0))
        rhs += iota_gh * tau_h * fiber_sum * pair.value
        if pair.iota_g_inv != fiber_sum / lam:
            violations.append(idx)
    return {
        "lhs": lhs,
        "rhs": rhs,
        "equal": lhs == rhs,
        "violations": tuple(violations),
        "ok": lhs == rhs and not violations,
    }
