"""Lattice windows, affine point sets, and twisted orbital integrals.

Everything in this module works with full rank lattices over the
unramified extension ring of degree n inside Q_{p^n}^d, represented by
upper triangular Hermite bases relative to the standard lattice.  The
two entry points consumed by the curve-counting pipeline are
``adlv_points``, which collects the window lattices displaced by a
fixed elementary divisor vector under L -> b sigma(L), and
``twisted_orbital_integral``, which weights the analogous set by unit
orbits of the twisted centralizer.  ``orbital_integral_gl2`` is the
untwisted analogue on the GL(2) lattice tree, used for the prime-to-p
factors.

All arithmetic here is exact: ring elements are integer coefficient
tuples modulo (modulus(t), p^k), valuations are certified, and every
returned count is a Fraction.
"""

import logging
from fractions import Fraction
from itertools import product

from .abelian import FgAbGroup, IntMatrix, column_space_basis, kernel_basis
from .padic import PrecisionError, Zq, degree_n_norm, kottwitz_point, newton_point

_log = logging.getLogger(__name__)

_DEFAULT_CAP = 200000


def _ival(x, p):
    """Valuation of a nonzero integer."""
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


class _Ring:
    """The ring Z_{p^n} truncated at p^k, elements as coefficient tuples."""

    def __init__(self, ctx, k):
        if k < 4:
            raise PrecisionError("insufficient precision")
        self.ctx = ctx
        self.p = ctx.p
        self.n = ctx.n
        self.k = k
        self.pk = ctx.p ** k
        self.mod = ctx.modulus
        self.zero = (0,) * self.n
        self.one = (1,) + (0,) * (self.n - 1)
        # sig[j][i] is sigma^j(t)^i, so sigma^j acts linearly on coefficients
        images = ctx.sigma_images()
        self.sig = []
        for j in range(self.n):
            img = tuple(c % self.pk for c in images[j])
            pows = [self.one]
            for _ in range(self.n - 1):
                pows.append(self.mul(pows[-1], img))
            self.sig.append(tuple(pows))
        self._inv_cache = {}

    def reduce(self, a):
        return tuple(c % self.pk for c in a)

    def add(self, a, b):
        return tuple((x + y) % self.pk for x, y in zip(a, b))

    def sub(self, a, b):
        return tuple((x - y) % self.pk for x, y in zip(a, b))

    def neg(self, a):
        return tuple((-x) % self.pk for x in a)

    def mul(self, a, b):
        n, pk = self.n, self.pk
        conv = [0] * (2 * n - 1) if n > 1 else [0]
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    conv[i + j] += ai * bj
        # the modulus is monic, so the top coefficient folds down exactly
        for i in range(2 * n - 2, n - 1, -1):
            c = conv[i] % pk
            conv[i] = 0
            if c:
                for j in range(n):
                    conv[i - n + j] -= c * self.mod[j]
        return tuple(x % pk for x in conv[:n])

    def smul(self, a, s):
        return tuple((x * s) % self.pk for x in a)

    def is_zero(self, a):
        return all(x % self.pk == 0 for x in a)

    def val(self, a):
        """Minimal coefficient valuation, or None for zero mod p^k."""
        best = None
        for c in a:
            c %= self.pk
            if c == 0:
                continue
            v = _ival(c, self.p)
            if v == 0:
                return 0
            if best is None or v < best:
                best = v
        return best

    def shift_up(self, a, e):
        pe = self.p ** e
        return tuple((x * pe) % self.pk for x in a)

    def shift_down(self, a, e):
        pe = self.p ** e
        out = []
        for x in a:
            x %= self.pk
            if x % pe:
                raise ArithmeticError("inexact division by a power of p")
            out.append(x // pe)
        return tuple(out)

    def sigma(self, a, j=1):
        j %= self.n
        if j == 0:
            return self.reduce(a)
        table = self.sig[j]
        acc = [0] * self.n
        for i, ai in enumerate(a):
            if ai:
                row = table[i]
                for idx in range(self.n):
                    acc[idx] += ai * row[idx]
        return tuple(x % self.pk for x in acc)

    def inv_unit(self, a):
        p, n = self.p, self.n
        a = self.reduce(a)
        a0 = tuple(c % p for c in a)
        base = self._inv_cache.get(a0)
        if base is None:
            one0 = tuple(c % p for c in self.one)
            for code in range(1, p ** n):
                cand = tuple((code // p ** i) % p for i in range(n))
                if tuple(c % p for c in self.mul(cand, a0)) == one0:
                    base = cand
                    break
            else:
                raise ArithmeticError("not a unit")
            self._inv_cache[a0] = base
        x = base
        m = 1
        while m < self.k:
            m = min(2 * m, self.k)
            ax = self.mul(a, x)
            corr = tuple(((2 if i == 0 else 0) - c) % self.pk
                         for i, c in enumerate(ax))
            x = self.mul(x, corr)
        return x

    def from_int(self, m):
        return ((m % self.pk),) + (0,) * (self.n - 1)


def _mat_vec(ring, m, v):
    d = len(v)
    out = []
    for i in range(d):
        acc = ring.zero
        for j in range(d):
            acc = ring.add(acc, ring.mul(m[i][j], v[j]))
        out.append(acc)
    return tuple(out)


def _mat_mul(ring, a, b):
    d = len(a)
    rows = []
    for i in range(d):
        row = []
        for j in range(d):
            acc = ring.zero
            for l in range(d):
                acc = ring.add(acc, ring.mul(a[i][l], b[l][j]))
            row.append(acc)
        rows.append(tuple(row))
    return tuple(rows)


def _mat_sub(ring, a, b):
    return tuple(tuple(ring.sub(x, y) for x, y in zip(ra, rb))
                 for ra, rb in zip(a, b))


def _mat_sigma(ring, m, j=1):
    return tuple(tuple(ring.sigma(x, j) for x in row) for row in m)


def _mat_identity(ring, d):
    return tuple(tuple(ring.one if i == j else ring.zero for j in range(d))
                 for i in range(d))


def _mat_det(ring, m):
    d = len(m)
    if d == 1:
        return ring.reduce(m[0][0])
    if d == 2:
        return ring.sub(ring.mul(m[0][0], m[1][1]), ring.mul(m[0][1], m[1][0]))
    if d == 3:
        acc = ring.zero
        for j, sign in ((0, 1), (1, -1), (2, 1)):
            minor = ring.sub(
                ring.mul(m[1][(j + 1) % 3], m[2][(j + 2) % 3]),
                ring.mul(m[1][(j + 2) % 3], m[2][(j + 1) % 3]))
            acc = ring.add(acc, ring.smul(ring.mul(m[0][j], minor), sign))
        return acc
    raise ValueError("determinant implemented for dimension at most 3")


def _mat_adj2(ring, m):
    return ((m[1][1], ring.neg(m[0][1])), (ring.neg(m[1][0]), m[0][0]))


class LatticeHNF:
    """A full rank lattice p^{-shift} span(cols) in canonical Hermite form.

    ``cols[j]`` is the basis column with pivot p^{diag[j]} at row j;
    entries above a pivot are reduced modulo the pivot of their own
    row, and the columns have unit content.  ``r_lo`` and ``r_hi`` are
    the tightest window bounds, so p^{r_hi} L_0 <= L <= p^{-r_lo} L_0
    for the standard lattice L_0, and ``pow_in`` is the least exponent
    with p^{pow_in} L_0 inside the column span.
    """

    __slots__ = ("ring", "shift", "cols", "diag", "r_lo", "r_hi", "pow_in")

    def __init__(self, ring, shift, cols, diag, r_lo, r_hi, pow_in):
        self.ring = ring
        self.shift = shift
        self.cols = cols
        self.diag = diag
        self.r_lo = r_lo
        self.r_hi = r_hi
        self.pow_in = pow_in

    @property
    def dim(self):
        return len(self.cols)

    def key(self):
        return (self.ring.p, self.ring.n, self.shift, self.cols)

    def class_key(self):
        """Key of the lattice up to scaling by powers of p."""
        return (self.ring.p, self.ring.n, self.cols)

    def __eq__(self, other):
        return isinstance(other, LatticeHNF) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return "LatticeHNF(shift=%d, diag=%s)" % (self.shift, list(self.diag))

    def to_matrix(self):
        from .padic import PadicMatrix
        ctx = self.ring.ctx
        d = self.dim
        rows = []
        for i in range(d):
            rows.append([ctx.from_coeffs(self.cols[j][i], val=-self.shift)
                         for j in range(d)])
        return PadicMatrix(ctx, rows)


def _hnf_columns(ring, cols):
    """Canonical upper triangular column basis of the span of ``cols``."""
    d = len(cols[0])
    work = [list(c) for c in cols]
    out = [None] * d
    for row in range(d - 1, -1, -1):
        pv, pi = None, None
        for idx, c in enumerate(work):
            v = ring.val(c[row])
            if v is not None and (pv is None or v < pv):
                pv, pi = v, idx
        if pv is None:
            raise PrecisionError("insufficient precision")
        piv = work.pop(pi)
        uinv = ring.inv_unit(ring.shift_down(piv[row], pv))
        piv = [ring.mul(uinv, x) for x in piv]
        piv[row] = ring.from_int(ring.p ** pv)
        for c in work:
            v = ring.val(c[row])
            if v is None:
                continue
            q = ring.shift_down(c[row], pv)
            for i in range(row):
                c[i] = ring.sub(c[i], ring.mul(q, piv[i]))
            c[row] = ring.zero
        out[row] = piv
    diag = tuple(ring.val(out[i][i]) for i in range(d))
    # reduce entries above each pivot to canonical residues
    for j in range(d):
        for i in range(j - 1, -1, -1):
            pe = ring.p ** diag[i]
            entry = out[j][i]
            red = tuple((c % ring.pk) % pe for c in entry)
            q = ring.shift_down(ring.sub(entry, red), diag[i])
            if not ring.is_zero(q):
                for r in range(i):
                    out[j][r] = ring.sub(out[j][r], ring.mul(q, out[i][r]))
            out[j][i] = red
    return [tuple(c) for c in out], diag


def _solve_triangular(ring, cols, diag, vec):
    """Coefficients expressing ``vec`` in the triangular basis, or None."""
    d = len(vec)
    rem = list(vec)
    coeffs = [None] * d
    for i in range(d - 1, -1, -1):
        x = rem[i]
        if ring.is_zero(x):
            coeffs[i] = ring.zero
            continue
        v = ring.val(x)
        if v < diag[i]:
            return None
        c = ring.shift_down(x, diag[i])
        coeffs[i] = c
        for r in range(i):
            rem[r] = ring.sub(rem[r], ring.mul(c, cols[i][r]))
        rem[i] = ring.zero
    return coeffs


def _make_lattice(ring, cols, shift):
    hcols, diag = _hnf_columns(ring, cols)
    content = min(diag)
    if content:
        for j in range(len(hcols)):
            for i in range(j):
                v = ring.val(hcols[j][i])
                if v is not None and v < content:
                    content = v
                    if content == 0:
                        break
    if content:
        hcols = [tuple(ring.shift_down(x, content) for x in col)
                 for col in hcols]
        diag = tuple(e - content for e in diag)
        shift -= content
    d = len(hcols)
    # least m with p^m L_0 inside the span, probed from the diagonal bound
    m = max(diag)
    top = sum(diag)
    while m < top:
        ok = True
        for i in range(d):
            vec = [ring.zero] * d
            vec[i] = ring.from_int(ring.p ** m)
            if _solve_triangular(ring, hcols, diag, vec) is None:
                ok = False
                break
        if ok:
            break
        m += 1
    r_lo = max(0, shift)
    r_hi = max(0, m - shift)
    return LatticeHNF(ring, shift, tuple(hcols), diag, r_lo, r_hi, m)


def standard_lattice(ctx, d, precision=None):
    """The standard lattice of rank ``d`` over the ring of ``ctx``."""
    ring = _Ring(ctx, precision or ctx.prec)
    cols = tuple(tuple(ring.one if i == j else ring.zero for i in range(d))
                 for j in range(d))
    return _make_lattice(ring, cols, 0)


def _left_multiply(ring, m, lat, extra_shift=0):
    cols = [_mat_vec(ring, m, col) for col in lat.cols]
    return _make_lattice(ring, cols, lat.shift + extra_shift)


def _apply_semilinear(ring, amat, eshift, lat):
    """Image of ``lat`` under v -> p^{-eshift} A sigma(v)."""
    cols = []
    for col in lat.cols:
        sc = tuple(ring.sigma(x) for x in col)
        cols.append(_mat_vec(ring, amat, sc))
    return _make_lattice(ring, cols, lat.shift + eshift)


def _smith_exponents(ring, mat):
    """Elementary divisor exponents of an invertible ring matrix."""
    d = len(mat)
    work = [[mat[i][j] for j in range(d)] for i in range(d)]
    exps = []
    for step in range(d):
        best = None
        for i in range(step, d):
            for j in range(step, d):
                v = ring.val(work[i][j])
                if v is not None and (best is None or v < best[0]):
                    best = (v, i, j)
        if best is None:
            raise PrecisionError("insufficient precision")
        v, bi, bj = best
        work[step], work[bi] = work[bi], work[step]
        for row in work:
            row[step], row[bj] = row[bj], row[step]
        uinv = ring.inv_unit(ring.shift_down(work[step][step], v))
        for i in range(step, d):
            work[i][step] = ring.mul(work[i][step], uinv)
        for j in range(step + 1, d):
            x = work[step][j]
            if ring.is_zero(x):
                continue
            q = ring.shift_down(x, v)
            for i in range(step, d):
                work[i][j] = ring.sub(work[i][j], ring.mul(q, work[i][step]))
        for i in range(step + 1, d):
            x = work[i][step]
            if ring.is_zero(x):
                continue
            q = ring.shift_down(x, v)
            for j in range(step + 1, d):
                work[i][j] = ring.sub(work[i][j], ring.mul(q, work[step][j]))
            work[i][step] = ring.zero
        exps.append(v)
    return exps


def relative_position(lat, other):
    """Elementary divisor exponents of the lattice pair, decreasing.

    The vector r satisfies: a basis of ``other`` equals a basis of
    ``lat`` times a matrix with elementary divisors p^{r_i}.
    """
    ring = lat.ring
    if (ring.p, ring.n) != (other.ring.p, other.ring.n):
        raise ValueError("mixed p-adic contexts")
    d = lat.dim
    t = lat.pow_in
    pt = ring.p ** t
    xcols = []
    for col in other.cols:
        scaled = tuple(ring.smul(x, pt) for x in col)
        coeffs = _solve_triangular(ring, lat.cols, lat.diag, scaled)
        if coeffs is None:
            raise PrecisionError("insufficient precision")
        xcols.append(coeffs)
    xmat = tuple(tuple(xcols[j][i] for j in range(d)) for i in range(d))
    exps = _smith_exponents(ring, xmat)
    offset = lat.shift - other.shift - t
    return tuple(sorted((e + offset for e in exps), reverse=True))


def _lattice_ring(pm):
    """Working ring, integral matrix, and denominator shift for ``pm``."""
    ctx = pm.ctx
    k = ctx.prec
    vals = []
    for row in pm.data:
        for el in row:
            if el.is_zeroish:
                continue
            vals.append(el.val)
            k = min(k, el.val + el.rel)
    e = max(0, -min(vals)) if vals else 0
    k = min(ctx.prec, k + e)
    if k < 4:
        raise PrecisionError("insufficient precision")
    ring = _Ring(ctx, k)
    rows = []
    for row in pm.data:
        out = []
        for el in row:
            if el.is_zeroish:
                if not el.exact and el.val + e < ring.k:
                    raise PrecisionError("insufficient precision")
                out.append(ring.zero)
                continue
            pv = ring.p ** (el.val + e)
            out.append(tuple((c * pv) % ring.pk for c in el.unit))
        rows.append(tuple(out))
    return ring, tuple(rows), e


def enumerate_lattices(d, p, n, r, cap=_DEFAULT_CAP, precision=32):
    """All lattices L with p^r L_0 <= L <= p^{-r} L_0, sorted by key.

    Raises ValueError("enumeration cap exceeded") when the window holds
    more than ``cap`` lattices.
    """
    if d < 1 or r < 0:
        raise ValueError("dimension must be positive and depth nonnegative")
    if precision < 2 * r + 8:
        raise PrecisionError("insufficient precision")
    ctx = Zq(p, n, precision)
    ring = _Ring(ctx, precision)
    bound = 2 * r
    total = 0
    shapes = []
    for diag in product(range(bound + 1), repeat=d):
        count = 1
        floors = {}
        for j in range(d):
            for i in range(j):
                f = max(0, diag[i] + diag[j] - bound)
                floors[(i, j)] = f
                count *= p ** (n * max(0, diag[i] - f))
        total += count
        if total > cap:
            raise ValueError("enumeration cap exceeded")
        shapes.append((diag, floors))
    found = []
    for diag, floors in shapes:
        slots = [(i, j) for j in range(d) for i in range(j)]
        ranges = []
        for i, j in slots:
            f = floors[(i, j)]
            ranges.append((f, max(0, diag[i] - f)))
        for codes in product(*[range(p ** (n * w)) for _, w in ranges]):
            cols = []
            for j in range(d):
                col = [ring.zero] * d
                col[j] = ring.from_int(p ** diag[j])
                cols.append(col)
            for slot, code in enumerate(codes):
                i, j = slots[slot]
                f, width = ranges[slot]
                if not width:
                    continue
                base = p ** width
                coeffs = []
                rem = code
                for _ in range(n):
                    coeffs.append((rem % base) * p ** f)
                    rem //= base
                cols[j][i] = tuple(c % ring.pk for c in coeffs)
            lat = _make_lattice(ring, [tuple(c) for c in cols], r)
            if d > 2 and (lat.r_lo > r or lat.r_hi > r):
                # the valuation floors are only necessary above rank 2
                continue
            found.append(lat)
    found.sort(key=lambda l: l.key())
    return found


def _validate_mu(mu, d):
    mu = tuple(int(x) for x in mu)
    if len(mu) != d:
        raise ValueError("mu length must match the matrix dimension")
    if any(mu[i] < mu[i + 1] for i in range(d - 1)):
        raise ValueError("mu must be dominant")
    return mu


def _qualifying_lattices(ring, amat, eshift, cond, depth, cap):
    """Window lattices L at the given depth with inv(L, F L) == cond,
    where F(v) = p^{-eshift} A sigma(v)."""
    d = len(amat)
    p, n = ring.p, ring.n

    if d == 1:
        v = ring.val(amat[0][0])
        if v is None:
            raise PrecisionError("insufficient precision")
        if v - eshift != cond[0]:
            return []
        if 2 * depth + 1 > cap:
            raise ValueError("enumeration cap exceeded")
        return [_make_lattice(ring, ((ring.one,),), -a)
                for a in range(-depth, depth + 1)]

    if d != 2:
        lats = enumerate_lattices(d, p, n, depth, cap=cap, precision=ring.k)
        out = []
        for lat in lats:
            img = _apply_semilinear(ring, amat, eshift, lat)
            if relative_position(lat, img) == cond:
                out.append(lat)
        return out

    # rescale so the sought position is nonnegative; then the map must
    # send each qualifying lattice into itself, which prunes the search
    c0 = max(0, -min(cond))
    gs = eshift - c0
    cond2 = tuple(v + c0 for v in cond)

    bound = 2 * depth
    a00, a01 = amat[0][0], amat[0][1]
    a10, a11 = amat[1][0], amat[1][1]
    v10 = ring.val(a10)
    digits = list(product(range(p), repeat=n))
    found = []
    for sa in range(bound + 1):
        for sb in range(bound + 1):
            # image of the first basis column, free of the open entry
            if v10 is not None and v10 < max(0, sb + gs - sa):
                continue
            flo = max(0, sa + sb - bound)
            th1 = max(0, sa + sb + gs)
            th2 = max(0, sb + gs)
            k1 = ring.shift_up(a00, sa + sb)
            c1 = ring.shift_up(a10, sa)
            base_a = ring.shift_up(a01, sb)
            base_b = ring.shift_up(a11, sb)

            def residuals(x, sx):
                e1 = ring.sub(k1, ring.mul(c1, x))
                e2 = ring.add(ring.mul(a10, sx), base_b)
                ta = ring.add(ring.mul(a00, sx), base_a)
                e3 = ring.sub(ring.shift_up(ta, sb), ring.mul(e2, x))
                return (e1, th1), (e2, th2), (e3, th1)

            def dead(x, sx, cut):
                for e, th in residuals(x, sx):
                    v = ring.val(e)
                    if v is not None and v < min(th, cut):
                        return True
                return False

            stack = [(flo, ring.zero, ring.zero)]
            while stack:
                lev, x, sx = stack.pop()
                if lev >= sa:
                    if dead(x, sx, ring.k):
                        continue
                    found.append(((ring.from_int(p ** sa), ring.zero),
                                  (x, ring.from_int(p ** sb))))
                    if len(found) > cap:
                        raise ValueError("enumeration cap exceeded")
                    continue
                pl = p ** lev
                for dv in digits:
                    term = tuple((c * pl) % ring.pk for c in dv)
                    x2 = ring.add(x, term)
                    sx2 = ring.add(sx, ring.sigma(term))
                    # unset digits only perturb residuals above lev
                    if not dead(x2, sx2, lev + 1):
                        stack.append((lev + 1, x2, sx2))

    out = []
    for cols in found:
        lat = _make_lattice(ring, cols, depth)
        img = _apply_semilinear(ring, amat, gs, lat)
        if relative_position(lat, img) == cond2:
            out.append(lat)
    out.sort(key=lambda l: l.key())
    return out


class AdlvReport:
    """Result of a point set search: the lattices found, the depth used,
    and whether the set was already stable one depth further out."""

    __slots__ = ("points", "depth_used", "saturated")

    def __init__(self, points, depth_used, saturated):
        self.points = tuple(points)
        self.depth_used = depth_used
        self.saturated = saturated

    @property
    def count(self):
        return len(self.points)

    def __repr__(self):
        return "AdlvReport(count=%d, depth_used=%d, saturated=%s)" % (
            len(self.points), self.depth_used, self.saturated)


def _precision_need(depth, e):
    return 4 * (depth + 1) + 2 * e + 6


def adlv_points(b, mu, depth, mod_homothety=False, cap=_DEFAULT_CAP):
    """Window lattices L with inv(L, b sigma(L)) equal to dominant mu."""
    d = b.dim
    mu = _validate_mu(mu, d)
    ring, amat, e = _lattice_ring(b)
    if ring.k < _precision_need(depth, e):
        raise PrecisionError("insufficient precision")
    pts = _qualifying_lattices(ring, amat, e, mu, depth, cap)
    nxt = _qualifying_lattices(ring, amat, e, mu, depth + 1, cap)
    if mod_homothety:
        keys = {l.class_key() for l in pts}
        keys_next = {l.class_key() for l in nxt}
        classes = {}
        for l in pts:
            cur = classes.get(l.class_key())
            if cur is None or (l.r_lo + l.r_hi, l.shift) < \
                    (cur.r_lo + cur.r_hi, cur.shift):
                classes[l.class_key()] = l
        pts = sorted(classes.values(), key=lambda l: l.key())
    else:
        keys = {l.key() for l in pts}
        keys_next = {l.key() for l in nxt}
    saturated = keys_next == keys

    # the point set carries an action of the n-fold twist of the map
    # itself; images may leave the window but must keep the position
    for lat in pts:
        cur = lat
        for _ in range(ring.n):
            cur = _apply_semilinear(ring, amat, e, cur)
        img = _apply_semilinear(ring, amat, e, cur)
        if relative_position(cur, img) != mu:
            raise AssertionError("Frobenius moved a point off the set")

    if pts and saturated:
        kappa = kottwitz_point(b)
        slopes = sorted(newton_point(b), reverse=True)
        ok = kappa == sum(mu)
        acc = Fraction(0)
        for i, s in enumerate(slopes):
            acc += s
            if acc > sum(mu[:i + 1]):
                ok = False
        if not ok:
            _log.warning("nonempty stable point set with incompatible "
                         "invariants: kappa=%s mu=%s", kappa, mu)

    return AdlvReport(pts, depth, saturated)


def _solve_integral_system(rows, nvars, p, kb, m_res):
    """Basis of {x : rows @ x == 0 mod p^kb}, resolved modulo p^m_res.

    The congruence kernel is computed exactly, then reduced.  Solution
    directions may carry a small finite index (the solution lattice
    need not be saturated), but any invariant close to p^m_res that is
    not exactly p^m_res means the buffer was too small to separate
    genuine solutions from congruence artifacts.
    """
    pkb = p ** kb
    pm = p ** m_res
    cut = m_res - 4
    mat = IntMatrix([[c % pkb for c in row] for row in rows],
                    cols_hint=nvars)
    aug = mat.hstack(IntMatrix([[pkb if i == j else 0
                                 for j in range(mat.rows)]
                                for i in range(mat.rows)],
                               cols_hint=mat.rows))
    ker = kernel_basis(aug)
    cols = []
    for j in range(ker.cols):
        vec = tuple(ker.data[i][j] % pm for i in range(nvars))
        if any(vec):
            cols.append(vec)
    for i in range(nvars):
        cols.append(tuple(pm if i == idx else 0 for idx in range(nvars)))
    span = IntMatrix.from_cols(cols, rows=nvars)
    big = 0
    for inv in FgAbGroup(nvars, span).invariants():
        if inv == pm:
            big += 1
        elif _ival(inv, p) >= cut:
            raise AssertionError(
                "centralizer order not resolved at this precision")
    basis_cols = column_space_basis(span)
    basis = []
    for j in range(basis_cols.cols):
        vec = tuple(basis_cols.data[i][j] % pm for i in range(nvars))
        content = min((_ival(c, p) for c in vec if c), default=m_res)
        if content < cut:
            basis.append(vec)
    if len(basis) != nvars - big:
        raise AssertionError("centralizer order not resolved at this precision")
    return basis


def _flatten_entry_map(ring, d):
    """Converters between d x d ring matrices and coefficient vectors."""
    n = ring.n

    def to_vec(m, modexp):
        pm = ring.p ** modexp
        out = []
        for i in range(d):
            for j in range(d):
                out.extend(c % pm for c in m[i][j])
        return tuple(out)

    def from_vec(vec):
        rows = []
        idx = 0
        for i in range(d):
            row = []
            for j in range(d):
                row.append(tuple(c % ring.pk for c in vec[idx:idx + n]))
                idx += n
            rows.append(tuple(row))
        return tuple(rows)

    return to_vec, from_vec


def _basis_matrices(ring, d):
    out = []
    for i in range(d):
        for j in range(d):
            for c in range(ring.n):
                m = [[ring.zero] * d for _ in range(d)]
                coeffs = [0] * ring.n
                coeffs[c] = 1
                m[i][j] = tuple(coeffs)
                out.append(tuple(tuple(r) for r in m))
    return out


def _order_basis(ring, tmat, kb, m_res, endo=None):
    """Basis mod p^m_res of the integer matrices X with X T = T sigma(X).

    ``endo`` = (left, right, vdet) adds the constraint that X leaves the
    lattice spanned by the columns of ``right`` stable, encoded as
    left X right == 0 mod p^vdet with ``left`` the adjugate of ``right``.
    """
    d = len(tmat)
    nvars = d * d * ring.n
    to_vec, from_vec = _flatten_entry_map(ring, d)
    images = []
    for em in _basis_matrices(ring, d):
        t = _mat_sub(ring, _mat_mul(ring, em, tmat),
                     _mat_mul(ring, tmat, _mat_sigma(ring, em)))
        images.append(to_vec(t, kb))
    rows = [[images[v][r] for v in range(nvars)] for r in range(nvars)]
    if endo is not None:
        left, right, vdet = endo
        scale = ring.p ** (kb - vdet)
        pkb = ring.p ** kb
        extra = []
        for em in _basis_matrices(ring, d):
            t = _mat_mul(ring, _mat_mul(ring, left, em), right)
            extra.append(tuple((c * scale) % pkb for c in to_vec(t, kb)))
        rows.extend([[extra[v][r] for v in range(nvars)]
                     for r in range(nvars)])
    return [from_vec(v) for v in
            _solve_integral_system(rows, nvars, ring.p, kb, m_res)]


def _combine(ring, basis, codes, d):
    acc = [[ring.zero] * d for _ in range(d)]
    for c, bmat in zip(codes, basis):
        if not c:
            continue
        for i in range(d):
            for j in range(d):
                acc[i][j] = ring.add(acc[i][j], ring.smul(bmat[i][j], c))
    return tuple(tuple(r) for r in acc)


def _residue_unit_data(ring, basis, d):
    """Unit count of the residue algebra and generator codes for it."""
    p = ring.p
    m = len(basis)

    def key_of(mat):
        return tuple(tuple(tuple(c % p for c in x) for x in row)
                     for row in mat)

    units = []
    for codes in product(range(p), repeat=m):
        if not any(codes):
            continue
        e = _combine(ring, basis, codes, d)
        if any(c % p for c in _mat_det(ring, e)):
            units.append((codes, key_of(e)))
    gens = []
    ident = _mat_identity(ring, d)
    seen = {key_of(ident)}
    for codes, k in units:
        if k in seen:
            continue
        gens.append(codes)
        gen_mats = [_combine(ring, basis, g, d) for g in gens]
        seen = {key_of(ident)}
        frontier = [ident]
        while frontier:
            nxt = []
            for f in frontier:
                for g in gen_mats:
                    prod_ = _mat_mul(ring, f, g)
                    kk = key_of(prod_)
                    if kk not in seen:
                        seen.add(kk)
                        nxt.append(prod_)
            frontier = nxt
        if len(seen) > len(units):
            raise AssertionError("residue units failed to close")
    return len(units), gens


def _unit_generators(ring, basis, d, m_act):
    """Topological generators of the order units, as full lifts."""
    _, gen_codes = _residue_unit_data(ring, basis, d)
    gens = [_combine(ring, basis, codes, d) for codes in gen_codes]
    ident = _mat_identity(ring, d)
    for i in range(1, m_act):
        for bmat in basis:
            g = tuple(tuple(ring.add(ident[r][c],
                                     ring.shift_up(bmat[r][c], i))
                            for c in range(d)) for r in range(d))
            gens.append(g)
    return gens


def _glue_moves(ring, basis, d):
    """Order elements with determinant valuation between 1 and d."""
    p = ring.p
    m = len(basis)
    box = p * p if m <= 2 else p
    moves = []
    seen = set()
    first_pass = []
    for codes in product(range(box), repeat=m):
        if not any(codes):
            continue
        e = _combine(ring, basis, codes, d)
        v = ring.val(_mat_det(ring, e))
        if v is not None and 1 <= v <= d:
            key = tuple(tuple(tuple(c % (p * p) for c in x) for x in row)
                        for row in e)
            if key not in seen:
                seen.add(key)
                moves.append(e)
                first_pass.append(e)
        if len(moves) >= 60:
            break
    if m > 2:
        for e in first_pass[:20]:
            for bmat in basis:
                e2 = tuple(tuple(ring.add(e[i][j],
                                          ring.shift_up(bmat[i][j], 1))
                                 for j in range(d)) for i in range(d))
                v = ring.val(_mat_det(ring, e2))
                if v is not None and 1 <= v <= d:
                    key = tuple(tuple(tuple(c % (p * p * p) for c in x)
                                      for x in row) for row in e2)
                    if key not in seen and len(moves) < 90:
                        seen.add(key)
                        moves.append(e2)
    ident = _mat_identity(ring, d)
    moves.append(tuple(tuple(ring.shift_up(x, 1) for x in row)
                       for row in ident))
    return moves


def _order_residue_count(ring, basis, d):
    p = ring.p
    count = 0
    for codes in product(range(p), repeat=len(basis)):
        e = _combine(ring, basis, codes, d)
        if any(c % p for c in _mat_det(ring, e)):
            count += 1
    return count


def _stabilizer_index(ring, amat, lat, base_basis, kb, m_res, d):
    """Index of stab(L) meet units(base order) inside stab(L).

    Computed as |resunits(O_L)| * [O_L : O_L meet O_0] / |resunits(meet)|,
    which counts unit cosets through the congruence filtration.  Both
    orders are written in the frame of ``lat``, where the stabilizer
    order has integer coordinates and the base order picks up the
    stability constraint for the standard lattice pulled through the
    basis matrix.
    """
    bmat = tuple(tuple(lat.cols[j][i] for j in range(d)) for i in range(d))
    vdet = ring.val(_mat_det(ring, bmat))
    badj = _mat_adj2(ring, bmat)
    sigb = _mat_sigma(ring, bmat)
    tmat = _mat_mul(ring, badj, _mat_mul(ring, amat, sigb))
    # the commutant condition is homogeneous in tmat, so dividing out
    # its content costs nothing and keeps skewed frames well resolved;
    # the stripped entries are only certified mod p^(k - tcont), so the
    # solve modulus shrinks with them
    tvals = [ring.val(x) for row in tmat for x in row]
    tcont = min(v for v in tvals if v is not None)
    kb_eff = kb
    if tcont > 0:
        tmat = tuple(tuple(ring.shift_down(x, tcont) for x in row)
                     for row in tmat)
        kb_eff = min(kb, ring.k - tcont)
        if kb_eff < m_res + 6 or vdet >= kb_eff:
            raise PrecisionError("insufficient precision")
    lat_basis = _order_basis(ring, tmat, kb_eff, m_res)
    base_frame = _order_basis(ring, tmat, kb_eff, m_res,
                              endo=(bmat, badj, vdet))
    if len(lat_basis) != len(base_basis) or \
            len(base_frame) != len(base_basis):
        raise AssertionError("twisted centralizer rank changed across lattices")
    m = len(base_basis)
    nvars = d * d * ring.n
    to_vec, from_vec = _flatten_entry_map(ring, d)
    pm = ring.p ** m_res
    lat_cols = [to_vec(b, m_res) for b in lat_basis]
    base_cols = [to_vec(b, m_res) for b in base_frame]
    unit_cols = [tuple(pm if i == rr else 0 for i in range(nvars))
                 for rr in range(nvars)]

    # intersection of the two spans: kernel combos of [A | -B]
    a_cols = lat_cols + unit_cols
    b_cols = base_cols + unit_cols
    paired = IntMatrix.from_cols(
        [tuple(c) for c in a_cols] +
        [tuple(-x for x in c) for c in b_cols], rows=nvars)
    ker = kernel_basis(paired)
    inter = []
    na = len(a_cols)
    for j in range(ker.cols):
        vec = [0] * nvars
        for idx in range(na):
            coeff = ker.data[idx][j]
            if coeff:
                col = a_cols[idx]
                for i in range(nvars):
                    vec[i] += coeff * col[i]
        vec = tuple(v % pm for v in vec)
        if any(vec):
            inter.append(vec)

    inter_span = IntMatrix.from_cols(inter + unit_cols, rows=nvars)
    lat_span = IntMatrix.from_cols(lat_cols + unit_cols, rows=nvars)
    order_inter = FgAbGroup(nvars, inter_span).order()
    order_lat = FgAbGroup(nvars, lat_span).order()
    if order_inter % order_lat:
        raise AssertionError("intersection escaped the lattice order")
    add_index = order_inter // order_lat

    inter_basis = []
    cut = m_res - 4
    cb = column_space_basis(inter_span)
    for j in range(cb.cols):
        vec = tuple(cb.data[i][j] % pm for i in range(nvars))
        content = min((_ival(c, ring.p) for c in vec if c), default=m_res)
        if content < cut:
            inter_basis.append(from_vec(vec))
    if len(inter_basis) != m:
        raise AssertionError("degenerate order intersection")

    cnt_lat = _order_residue_count(ring, lat_basis, d)
    cnt_inter = _order_residue_count(ring, inter_basis, d)
    return Fraction(cnt_lat * add_index, cnt_inter)


def _weighted_count(ring, amat, lats, ugens, glue, depth, base_basis,
                    kb, m_res):
    """Sum of stabilizer-volume weights over twisted classes of ``lats``."""
    if not lats:
        return Fraction(0)
    d = lats[0].dim
    keymap = {lat.key(): i for i, lat in enumerate(lats)}
    orbit_of = {}
    orbits = []
    for lat in lats:
        if lat.key() in orbit_of:
            continue
        oid = len(orbits)
        members = [lat]
        orbit_of[lat.key()] = oid
        frontier = [lat]
        while frontier:
            nxt = []
            for cur in frontier:
                for g in ugens:
                    moved = _left_multiply(ring, g, cur)
                    mk = moved.key()
                    if mk not in keymap:
                        raise AssertionError("unit orbit left the enumerated set")
                    if mk not in orbit_of:
                        orbit_of[mk] = oid
                        members.append(lats[keymap[mk]])
                        nxt.append(lats[keymap[mk]])
            frontier = nxt
        orbits.append(members)

    parent = list(range(len(orbits)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    # forward moves from every member; images beyond the window are
    # dropped, images inside it must already be enumerated
    for oid, members in enumerate(orbits):
        for mv in glue:
            for member in members:
                fwd = _left_multiply(ring, mv, member)
                fk = fwd.key()
                if fk in keymap:
                    union(oid, orbit_of[fk])
                elif fwd.r_lo <= depth and fwd.r_hi <= depth:
                    raise AssertionError("twisted move left the enumerated set")
            det = _mat_det(ring, mv)
            dv = ring.val(det)
            uinv = ring.inv_unit(ring.shift_down(det, dv))
            adj = _mat_adj2(ring, mv)
            inv_m = tuple(tuple(ring.mul(uinv, x) for x in row) for row in adj)
            back = _left_multiply(ring, inv_m, members[0], extra_shift=dv)
            if back.key() in keymap:
                union(oid, orbit_of[back.key()])

    components = {}
    for oid in range(len(orbits)):
        components.setdefault(find(oid), []).append(oid)
    total = Fraction(0)
    for comp in components.values():
        rep = orbits[comp[0]][0]
        size = len(orbits[comp[0]])
        corr = _stabilizer_index(ring, amat, rep, base_basis, kb, m_res, d)
        total += Fraction(size) / corr
    return total


def classify_norm(delta):
    """Coarse type of the n-fold twisted norm of ``delta``: "central",
    "elliptic", "split", or "ambiguous" when precision cannot separate
    the cases.  Dimensions above 2 report "unknown"."""
    norm, cp = degree_n_norm(delta)
    d = delta.dim
    diag0 = norm.data[0][0]
    central = True
    for i in range(d):
        for j in range(d):
            el = norm.data[i][j]
            if i == j:
                if not el.same(diag0):
                    central = False
            elif not el.is_zeroish:
                central = False
    if central:
        return "central"
    if d != 2:
        return "unknown"
    disc = cp[1] * cp[1] - 4 * cp[2]
    if disc.is_zeroish:
        return "ambiguous"
    v, unit, rel = disc.rational_part_certified()
    if rel < 3:
        return "ambiguous"
    if v % 2:
        return "elliptic"
    p = delta.ctx.p
    if p == 2:
        return "split" if unit % 8 == 1 else "elliptic"
    return "split" if pow(unit % p, (p - 1) // 2, p) == 1 else "elliptic"


def twisted_orbital_integral(delta, mu, depth=3, normalization="units",
                             cap=_DEFAULT_CAP):
    """Exact twisted orbital integral of the mu-cell indicator at delta.

    Counts lattices L with inv(L, delta sigma(L)) equal to the sorted
    negative of mu, each weighted by the reciprocal stabilizer volume.
    The unit group of the twisted centralizer order at the standard
    lattice has volume 1 under "units" and 1/2 under "halved".  The
    count is recomputed one window deeper and must agree, otherwise
    ValueError("infinite orbit suspected") is raised.
    """
    if normalization not in ("units", "halved"):
        raise ValueError("unknown normalization: %r" % (normalization,))
    d = delta.dim
    if d > 2:
        raise ValueError("matrix dimension must be 1 or 2")
    mu = _validate_mu(mu, d)
    nu = tuple(sorted((-m for m in mu), reverse=True))
    ring, amat, e = _lattice_ring(delta)
    if ring.k < _precision_need(depth + 1, e):
        raise PrecisionError("insufficient precision")
    factor = Fraction(1) if normalization == "units" else Fraction(2)

    dv = ring.val(_mat_det(ring, amat))
    if dv is None:
        raise PrecisionError("insufficient precision")
    if dv - d * e != sum(nu):
        return Fraction(0)

    if d == 1:
        return factor

    # scalar delta: the twisted form of GL(d) is split and acts
    # transitively on the qualifying set with stabilizer the standard
    # unit group, so the isobaric cell contributes exactly 1
    central = all(delta.data[i][j].is_zeroish and delta.data[i][j].exact
                  for i in range(d) for j in range(d) if i != j)
    central = central and all(delta.data[i][i].same(delta.data[0][0])
                              for i in range(1, d))
    if central:
        if len(set(nu)) == 1:
            return factor
        if ring.n == 1:
            # an untwisted scalar displaces every lattice isobarically
            return Fraction(0)

    # a noncentral norm with vanishing discriminant has a parabolic
    # centralizer and no finite weighted count
    norm, cp = degree_n_norm(delta)
    diag0 = norm.data[0][0]
    norm_central = all(
        norm.data[i][j].is_zeroish if i != j else norm.data[i][i].same(diag0)
        for i in range(d) for j in range(d))
    disc = cp[1] * cp[1] - 4 * cp[2]
    if disc.is_zeroish and not norm_central:
        raise ValueError("infinite orbit suspected")

    m_act = 2 * (depth + 2) + 4
    m_res = m_act + 4
    kb = min(ring.k, m_res + 10)
    if kb < m_res + 6:
        raise PrecisionError("insufficient precision")
    base_basis = _order_basis(ring, amat, kb, m_res)
    if len(base_basis) not in (2, 4):
        raise AssertionError("unexpected twisted centralizer rank")
    ugens = _unit_generators(ring, base_basis, d, m_act)
    glue = _glue_moves(ring, base_basis, d)

    values = []
    for r in (depth, depth + 1):
        lats = _qualifying_lattices(ring, amat, e, nu, r, cap)
        values.append(_weighted_count(ring, amat, lats, ugens, glue, r,
                                      base_basis, kb, m_res))
    if values[0] != values[1]:
        raise ValueError("infinite orbit suspected")
    return values[0] * factor


def _is_square_ql(x, ell):
    if x == 0:
        return True
    v = _ival(x, ell)
    if v % 2:
        return False
    u = x // ell ** v
    if ell == 2:
        return u % 8 == 1
    return pow(u % ell, (ell - 1) // 2, ell) == 1


def _tree_canon(ell, cols, modexp):
    """Canonical (a, b, c) key of the homothety class spanned by cols."""
    big = ell ** modexp
    (m00, m10), (m01, m11) = cols
    m00, m10, m01, m11 = m00 % big, m10 % big, m01 % big, m11 % big

    def val(x):
        return modexp if x == 0 else _ival(x, ell)

    if val(m11) < val(m10):
        m00, m01 = m01, m00
        m10, m11 = m11, m10
    beta = val(m10)
    if beta >= modexp:
        raise ArithmeticError("degenerate lattice basis")
    uin = pow(m10 // ell ** beta, -1, big)
    q = ((m11 // ell ** beta) * uin) % big
    c01 = (m01 - q * m00) % big
    alpha = val(c01)
    if alpha >= modexp:
        raise ArithmeticError("degenerate lattice basis")
    a, b = alpha, beta
    c_entry = (m00 * uin) % big % ell ** a if a else 0
    content = min(a, b, val(c_entry) if c_entry else modexp)
    if content:
        a -= content
        b -= content
        c_entry //= ell ** content
        c_entry %= ell ** a
    return (a, b, c_entry)


def _tree_gamma_at(g, k, ell, key):
    """Entries of gamma / ell^k in the frame of the class ``key``; the
    integrality of the result is exactly the fixed-lattice condition."""
    a, b, c = key
    la, lb = ell ** a, ell ** b
    x00 = lb * (g[0][0] * la) - c * (g[1][0] * la)
    x01 = lb * (g[0][0] * c + g[0][1] * lb) - c * (g[1][0] * c + g[1][1] * lb)
    x10 = la * (g[1][0] * la)
    x11 = la * (g[1][0] * c + g[1][1] * lb)
    den = ell ** (a + b + k)
    if any(x % den for x in (x00, x01, x10, x11)):
        return None
    return (x00 // den, x01 // den, x10 // den, x11 // den)


def orbital_integral_gl2(gamma, ell, radius=4, normalization="units"):
    """Orbital integral of the unit indicator over GL(2, Q_ell).

    Counts homothety classes of lattices fixed by gamma scaled to unit
    determinant, weighted by unit orbits of the maximal compact of the
    centralizer (volume 1, or 1/2 under "halved").  ``gamma`` is a
    2 x 2 integer matrix or a monic integer charpoly triple (1, c1, c2);
    it must be elliptic or central over Q_ell.
    """
    if normalization not in ("units", "halved"):
        raise ValueError("unknown normalization: %r" % (normalization,))
    factor = Fraction(1) if normalization == "units" else Fraction(2)
    if len(gamma) == 3:
        lead, c1, c2 = (int(x) for x in gamma)
        if lead != 1:
            raise ValueError("charpoly must be monic")
        g = ((0, -c2), (1, -c1))
    else:
        g = tuple(tuple(int(x) for x in row) for row in gamma)
    if g[0][1] == 0 and g[1][0] == 0 and g[0][0] == g[1][1]:
        return factor
    tr = g[0][0] + g[1][1]
    det = g[0][0] * g[1][1] - g[0][1] * g[1][0]
    if det == 0:
        raise ValueError("non-elliptic local orbit")
    disc = tr * tr - 4 * det
    if disc == 0 or _is_square_ql(disc, ell):
        raise ValueError("non-elliptic local orbit")
    dv = _ival(det, ell)
    if dv % 2:
        return Fraction(0)
    k = dv // 2

    # enumerate one ring past the radius so boundary effects are loud
    fixed = []
    gamma_at = {}
    for a in range(radius + 2):
        for b in range(radius + 2 - a):
            for c in range(ell ** a):
                if a and b and c % ell == 0:
                    continue
                entries = _tree_gamma_at(g, k, ell, (a, b, c))
                if entries is None:
                    continue
                if a + b > radius:
                    raise AssertionError("fixed lattices reach the search radius")
                fixed.append((a, b, c))
                gamma_at[(a, b, c)] = entries
    if not fixed:
        return Fraction(0)

    # conductor depth of gamma at each fixed class; the deepest class
    # carries the maximal order of the centralizer field
    far = radius + dv + 8
    depth_of = {}
    for key, (x00, x01, x10, x11) in gamma_at.items():
        w = min(_ival(x01, ell) if x01 else far,
                _ival(x10, ell) if x10 else far,
                _ival(x00 - x11, ell) if x00 != x11 else far)
        depth_of[key] = w
    wstar = max(depth_of.values())
    center = max(fixed, key=lambda key: depth_of[key])
    y00, y01, y10, y11 = gamma_at[center]
    rstar = y00 % ell ** wstar if wstar else 0

    # the acting order is generated by gtilde = (gamma/ell^k - rstar)
    # / ell^wstar; scalar denominators drop modulo homothety, so the
    # integer numerator matrices below act faithfully on classes
    def move_matrix(asc, bsc):
        sc = asc * ell ** (wstar + k)
        return ((sc + bsc * (g[0][0] - rstar * ell ** k), bsc * g[0][1]),
                (bsc * g[1][0], sc + bsc * (g[1][1] - rstar * ell ** k)))

    shift_w = ell ** wstar
    gt00 = (y00 - rstar) // shift_w
    gt01 = y01 // shift_w
    gt10 = y10 // shift_w
    gt11 = (y11 - rstar) // shift_w
    trg = gt00 + gt11
    ng = gt00 * gt11 - gt01 * gt10

    def res_mul(x, y):
        a1, b1 = x
        a2, b2 = y
        return ((a1 * a2 - b1 * b2 * ng) % ell,
                (a1 * b2 + b1 * a2 + b1 * b2 * trg) % ell)

    res_units = [(aa, bb) for aa in range(ell) for bb in range(ell)
                 if (aa * aa + aa * bb * trg + bb * bb * ng) % ell]
    res_gens = []
    seen = {(1, 0)}
    for u in res_units:
        if u in seen:
            continue
        res_gens.append(u)
        seen = {(1, 0)}
        frontier = [(1, 0)]
        while frontier:
            nxt = []
            for f in frontier:
                for gg in res_gens:
                    prod_ = res_mul(f, gg)
                    if prod_ not in seen:
                        seen.add(prod_)
                        nxt.append(prod_)
            frontier = nxt

    modexp = 2 * (radius + dv + wstar + 6)
    mact = radius + wstar + k + 3
    moves = [move_matrix(aa, bb) for (aa, bb) in res_gens]
    for i in range(1, mact):
        moves.append(move_matrix(1, ell ** i))

    def apply_move(mv, key):
        a, b, c = key
        cols = ((mv[0][0] * ell ** a, mv[1][0] * ell ** a),
                (mv[0][0] * c + mv[0][1] * ell ** b,
                 mv[1][0] * c + mv[1][1] * ell ** b))
        return _tree_canon(ell, cols, modexp)

    fixed_set = set(fixed)
    orbit_of = {}
    orbits = []
    for key in fixed:
        if key in orbit_of:
            continue
        oid = len(orbits)
        members = [key]
        orbit_of[key] = oid
        frontier = [key]
        while frontier:
            nxt = []
            for cur in frontier:
                for mv in moves:
                    moved = apply_move(mv, cur)
                    if moved not in fixed_set:
                        raise AssertionError("unit orbit left the fixed set")
                    if moved not in orbit_of:
                        orbit_of[moved] = oid
                        members.append(moved)
                        nxt.append(moved)
            frontier = nxt
        orbits.append(members)

    parent = list(range(len(orbits)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    # in the ramified case a norm-valuation-1 element links classes at
    # consecutive levels; b = 1 loses no generality up to units
    glue = []
    for aa in range(ell * ell):
        nval = aa * aa + aa * trg + ng
        if nval and _ival(nval, ell) == 1:
            glue.append(move_matrix(aa, 1))
        if len(glue) >= 4:
            break
    for mv in glue:
        for oid, members in enumerate(orbits):
            moved = apply_move(mv, members[0])
            if moved in orbit_of:
                ra, rb = find(oid), find(orbit_of[moved])
                if ra != rb:
                    parent[ra] = rb

    components = {}
    for oid, members in enumerate(orbits):
        components.setdefault(find(oid), []).append(len(members))
    total = 0
    for sizes in components.values():
        if any(s != sizes[0] for s in sizes):
            raise AssertionError("unequal unit orbits inside one class")
        total += sizes[0]
    return Fraction(total) * factor
