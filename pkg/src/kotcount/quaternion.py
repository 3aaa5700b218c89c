"""Mass of the definite quaternion algebra ramified at one finite prime.

Everything here is exact.  The algebra is B = (-A, -p) over Q with a small
auxiliary A chosen so that B ramifies exactly at p and infinity; a maximal
order is grown from Z<1, i, j, k> by index-ell enlargements until its
reduced discriminant is p, right ideal classes are walked through the
2-neighbor graph, and the mass is the sum of 1 / |O_L(I)^x| over classes.
No class number or mass formula is consulted on the way.
"""

from fractions import Fraction
from itertools import permutations
from math import gcd, isqrt


# ---------------------------------------------------------------------------
# quaternion arithmetic over Q in the basis (1, i, j, k)


def _qmul(x, y, aa, bb):
    x0, x1, x2, x3 = x
    y0, y1, y2, y3 = y
    return (
        x0 * y0 - aa * x1 * y1 - bb * x2 * y2 - aa * bb * x3 * y3,
        x0 * y1 + x1 * y0 + bb * (x2 * y3 - x3 * y2),
        x0 * y2 + x2 * y0 + aa * (x3 * y1 - x1 * y3),
        x0 * y3 + x3 * y0 + x1 * y2 - x2 * y1,
    )


def _qconj(x):
    return (x[0], -x[1], -x[2], -x[3])


def _qnrd(x, aa, bb):
    return x[0] * x[0] + aa * x[1] * x[1] + bb * x[2] * x[2] + aa * bb * x[3] * x[3]


def _qtrd(x):
    return 2 * x[0]


# ---------------------------------------------------------------------------
# rank 4 lattices: columns over a common denominator, Hermite form


def _hnf_columns(cols):
    """Column Hermite form of a spanning (possibly redundant) column list.

    Pivots sit on the diagonal, entries above each pivot vanish, and
    earlier basis columns are reduced at later pivot rows, so the result
    is a canonical lower triangular basis.
    """
    m = [list(c) for c in cols]
    basis = []
    for row in range(4):
        live = [c for c in m if any(c[row:])]
        piv = None
        for c in live:
            if c[row] and (piv is None or abs(c[row]) < abs(piv[row])):
                piv = c
        while piv is not None:
            rest = [c for c in live if c is not piv and c[row]]
            if not rest:
                break
            for c in rest:
                f = c[row] // piv[row]
                for t in range(4):
                    c[t] -= f * piv[t]
            piv = None
            for c in live:
                if c[row] and (piv is None or abs(c[row]) < abs(piv[row])):
                    piv = c
        if piv is None or piv[row] == 0:
            raise ArithmeticError("column span is not full rank")
        if piv[row] < 0:
            for t in range(4):
                piv[t] = -piv[t]
        for c in basis:
            f = c[row] // piv[row]
            if f:
                for t in range(4):
                    c[t] -= f * piv[t]
        basis.append(piv)
        m = [c for c in live if c is not piv]
    return tuple(tuple(c) for c in basis)


class Lattice:
    """Full rank lattice in B, columns / den in (1, i, j, k) coordinates."""

    __slots__ = ("den", "cols")

    def __init__(self, den, cols):
        cols = _hnf_columns(cols)
        g = den
        for c in cols:
            for x in c:
                g = gcd(g, x)
        self.den = den // g
        self.cols = tuple(tuple(x // g for x in c) for c in cols)

    @classmethod
    def from_vectors(cls, vecs):
        den = 1
        for v in vecs:
            for x in v:
                den = den * x.denominator // gcd(den, x.denominator)
        cols = [[int(x * den) for x in v] for v in vecs if any(v)]
        return cls(den, cols)

    def vectors(self):
        d = self.den
        return [tuple(Fraction(x, d) for x in c) for c in self.cols]

    def det_index(self):
        """Covolume relative to Z<1, i, j, k>, as a positive Fraction."""
        det = 1
        for r in range(4):
            det *= self.cols[r][r]
        return Fraction(abs(det), self.den ** 4)

    def coords(self, vec):
        """Coordinates of ``vec`` in this basis, or None if outside."""
        target = [x * self.den for x in vec]
        out = []
        for r in range(4):
            c = self.cols[r]
            q = target[r] / c[r]
            out.append(q)
            for t in range(4):
                target[t] -= q * c[t]
        if any(target) or any(x.denominator != 1 for x in out):
            return None
        return tuple(int(x) for x in out)

    def contains(self, vec):
        return self.coords(vec) is not None


def _lattice_product(lat1, lat2, aa, bb):
    vecs = []
    for v in lat1.vectors():
        for w in lat2.vectors():
            vecs.append(_qmul(v, w, aa, bb))
    return Lattice.from_vectors(vecs)


def _conj_lattice(lat):
    return Lattice.from_vectors([_qconj(v) for v in lat.vectors()])


# ---------------------------------------------------------------------------
# exact short vector search on a positive definite Gram matrix


class _Found(Exception):
    pass


def _floor_sqrt(fr):
    if fr < 0:
        return -1
    return isqrt(fr.numerator * fr.denominator) // fr.denominator


def _cholesky(gram):
    d = [Fraction(0)] * 4
    mu = [[Fraction(0)] * 4 for _ in range(4)]
    g = [[Fraction(x) for x in row] for row in gram]
    for i in range(4):
        d[i] = g[i][i]
        for k in range(i):
            d[i] -= d[k] * mu[k][i] * mu[k][i]
        if d[i] <= 0:
            raise ArithmeticError("norm form is not positive definite")
        for j in range(i + 1, 4):
            mu[i][j] = g[i][j]
            for k in range(i):
                mu[i][j] -= d[k] * mu[k][i] * mu[k][j]
            mu[i][j] /= d[i]
    return d, mu


def _count_representations(gram, target, first_only=False):
    """Number of integer vectors with Q(v) = target (zero vector excluded)."""
    if target <= 0:
        return 0
    d, mu = _cholesky(gram)
    hits = 0

    def descend(i, rem, tail):
        nonlocal hits
        center = -sum(mu[i][j] * tail[j - i - 1] for j in range(i + 1, 4))
        r = _floor_sqrt(rem / d[i]) + 1
        v = center.numerator // center.denominator - r
        hi = v + 2 * r + 1
        while v <= hi:
            rem2 = rem - d[i] * (v - center) ** 2
            if rem2 >= 0:
                if i == 0:
                    if rem2 == 0 and (v != 0 or any(tail)):
                        hits += 1
                        if first_only:
                            raise _Found
                else:
                    descend(i - 1, rem2, (v,) + tail)
            v += 1

    try:
        descend(3, Fraction(target), ())
    except _Found:
        return 1
    return hits


# ---------------------------------------------------------------------------
# the algebra and a maximal order


def _legendre(a, p):
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def _is_prime(n):
    if n < 2:
        return False
    f = 2
    while f * f <= n:
        if n % f == 0:
            return False
        f += 1
    return True


def hilbert_coefficients(p):
    """Coefficients (A, p) with B = (-A, -p) ramified exactly at p, oo."""
    if p < 3 or not _is_prime(p):
        raise ValueError("p must be an odd prime")
    if p % 4 == 3:
        return 1, p
    a = 3
    while True:
        if _is_prime(a) and a % 4 == 3 and _legendre(-a, p) == -1:
            return a, p
        a += 4


def _gram(vectors, aa, bb):
    out = []
    for v in vectors:
        row = []
        for w in vectors:
            s = _qmul(v, _qconj(w), aa, bb)
            row.append(Fraction(_qtrd(s), 2))
        out.append(row)
    return out


def _det4(m):
    total = 0
    for perm in permutations(range(4)):
        sgn = 1
        for i in range(4):
            for j in range(i + 1, 4):
                if perm[i] > perm[j]:
                    sgn = -sgn
        term = 1
        for i in range(4):
            term *= m[i][perm[i]]
        total += sgn * term
    return total


def _reduced_disc_sq(lat, aa, bb):
    """Square of the reduced discriminant of the order on ``lat``."""
    vecs = lat.vectors()
    det = _det4([[_qtrd(_qmul(v, w, aa, bb)) for w in vecs] for v in vecs])
    return abs(det)


def _is_order(lat, aa, bb):
    vecs = lat.vectors()
    if not lat.contains((Fraction(1), Fraction(0), Fraction(0), Fraction(0))):
        return False
    for v in vecs:
        if _qtrd(v).denominator != 1 or _qnrd(v, aa, bb).denominator != 1:
            return False
        for w in vecs:
            if not lat.contains(_qmul(v, w, aa, bb)):
                return False
    return True


def maximal_order(p):
    """A maximal order of B = (-A, -p), grown by index-ell enlargements.

    Maximality is certified by the reduced discriminant reaching p, not
    assumed from a printed basis.  Returns (lattice, A, p).
    """
    aa, bb = hilbert_coefficients(p)
    basis = [(Fraction(1), Fraction(0), Fraction(0), Fraction(0)),
             (Fraction(0), Fraction(1), Fraction(0), Fraction(0)),
             (Fraction(0), Fraction(0), Fraction(1), Fraction(0)),
             (Fraction(0), Fraction(0), Fraction(0), Fraction(1))]
    lat = Lattice.from_vectors(basis)
    disc_sq = _reduced_disc_sq(lat, aa, bb)
    target = p * p
    while disc_sq != target:
        grew = False
        for ell in (2, aa):
            if ell == 1 or disc_sq % (ell * ell * target) != 0:
                continue
            vecs = lat.vectors()
            for mask in range(1, ell ** 4):
                digits = (mask % ell, mask // ell % ell,
                          mask // ell ** 2 % ell, mask // ell ** 3 % ell)
                x = (Fraction(0),) * 4
                for dgt, v in zip(digits, vecs):
                    if dgt:
                        x = tuple(a + dgt * b for a, b in zip(x, v))
                x = tuple(a / ell for a in x)
                if _qtrd(x).denominator != 1:
                    continue
                if _qnrd(x, aa, bb).denominator != 1:
                    continue
                cand = Lattice.from_vectors(vecs + [x])
                if cand.det_index() == lat.det_index():
                    continue
                if _is_order(cand, aa, bb):
                    lat = cand
                    disc_sq = _reduced_disc_sq(lat, aa, bb)
                    grew = True
                    break
            if grew:
                break
        if not grew:
            raise AssertionError("order enlargement stalled before maximality")
    return lat, aa, bb


# ---------------------------------------------------------------------------
# right ideal classes by 2-neighbor walk


def _nrd_of_ideal(lat, order):
    rel = lat.det_index() / order.det_index()
    num, den = rel.numerator, rel.denominator
    rn, rd = isqrt(num), isqrt(den)
    if rn * rn != num or rd * rd != den:
        raise AssertionError("ideal covolume is not a perfect square")
    return Fraction(rn, rd)


def _right_multipliers(ideal, order, aa, bb, ell):
    """Matrices of right multiplication by the order basis on I / ell I."""
    ivecs = ideal.vectors()
    mats = []
    for g in order.vectors():
        cols = []
        for v in ivecs:
            co = ideal.coords(_qmul(v, g, aa, bb))
            if co is None:
                raise AssertionError("lattice is not a right module")
            cols.append(tuple(x % ell for x in co))
        mats.append(cols)
    return mats


def _stable_planes(mats, ell):
    """Dimension 2 subspaces of F_ell^4 stable under all ``mats``."""
    vectors = [tuple(v // ell ** k % ell for k in range(4))
               for v in range(ell ** 4)]

    def span(gens):
        seen = {(0, 0, 0, 0)}
        frontier = [(0, 0, 0, 0)]
        while frontier:
            nxt = []
            for base in frontier:
                for g in gens:
                    for s in range(1, ell):
                        cand = tuple((base[t] + s * g[t]) % ell
                                     for t in range(4))
                        if cand not in seen:
                            seen.add(cand)
                            nxt.append(cand)
            frontier = nxt
        return seen

    def apply(mat, vec):
        out = [0, 0, 0, 0]
        for idx, coef in enumerate(vec):
            if coef:
                col = mat[idx]
                for t in range(4):
                    out[t] = (out[t] + coef * col[t]) % ell
        return tuple(out)

    planes = {}
    for i, v in enumerate(vectors):
        if not any(v):
            continue
        for w in vectors[i + 1:]:
            if not any(w):
                continue
            sp = span([v, w])
            if len(sp) != ell * ell:
                continue
            key = frozenset(sp)
            if key in planes:
                continue
            stable = True
            for mat in mats:
                for vec in (v, w):
                    if apply(mat, vec) not in sp:
                        stable = False
                        break
                if not stable:
                    break
            if stable:
                planes[key] = (v, w)
    return [planes[k] for k in sorted(planes, key=sorted)]


def _neighbors(ideal, order, aa, bb, ell):
    mats = _right_multipliers(ideal, order, aa, bb, ell)
    planes = _stable_planes(mats, ell)
    if len(planes) != ell + 1:
        raise AssertionError("neighbor count is off the tree valence")
    ivecs = ideal.vectors()
    out = []
    for plane in planes:
        gens = []
        for coef in plane:
            vec = (Fraction(0),) * 4
            for c, bv in zip(coef, ivecs):
                if c:
                    vec = tuple(a + c * b for a, b in zip(vec, bv))
            gens.append(vec)
        scaled = [tuple(ell * x for x in v) for v in ivecs]
        out.append(Lattice.from_vectors(gens + scaled))
    return out


def _equivalent(i1, i2, order, aa, bb):
    prod = _lattice_product(i1, _conj_lattice(i2), aa, bb)
    target = _nrd_of_ideal(i1, order) * _nrd_of_ideal(i2, order)
    gram = _gram(prod.vectors(), aa, bb)
    return _count_representations(gram, target, first_only=True) > 0


def _left_order(ideal, order, aa, bb):
    prod = _lattice_product(ideal, _conj_lattice(ideal), aa, bb)
    scale = 1 / _nrd_of_ideal(ideal, order)
    return Lattice.from_vectors(
        [tuple(scale * x for x in v) for v in prod.vectors()])


def _unit_order(lat, aa, bb):
    gram = _gram(lat.vectors(), aa, bb)
    return _count_representations(gram, Fraction(1))


def ideal_classes(p):
    """Right ideal classes of a maximal order, with unit group orders.

    Returns a list of (lattice, unit_order) pairs, one per class.
    """
    order, aa, bb = maximal_order(p)
    reps = [order]
    units = [_unit_order(order, aa, bb)]
    frontier = [order]
    while frontier:
        nxt = []
        for ideal in frontier:
            for nb in _neighbors(ideal, order, aa, bb, 2):
                if any(_equivalent(nb, rep, order, aa, bb) for rep in reps):
                    continue
                reps.append(nb)
                units.append(_unit_order(_left_order(nb, order, aa, bb),
                                         aa, bb))
                nxt.append(nb)
        frontier = nxt
    return list(zip(reps, units))


_MASS_CACHE = {}


def class_mass(p):
    """Sum of 1 / |O^x| over right ideal classes, as an exact Fraction."""
    if p not in _MASS_CACHE:
        _MASS_CACHE[p] = sum(
            (Fraction(1, u) for _, u in ideal_classes(p)), Fraction(0))
    return _MASS_CACHE[p]
