"""Unramified p-adic arithmetic with certified precision.

The field with p^n elements is lifted to (Z/p^k)[t]/(f) for a fixed monic
lift f of the first irreducible polynomial in a deterministic enumeration;
the arithmetic Frobenius is the Hensel refinement of t -> t^p.  Elements
carry their own relative precision and every operation either returns a
value stable under precision increase or raises PrecisionError.  Nothing
here is floating point; coefficients are plain integers mod p^k.

Matrices over the field provide sigma-norms, a division-free
characteristic polynomial, Newton and valuation invariants of isocrystals,
and decency certificates.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction


class PrecisionError(ArithmeticError):
    """Raised when a result cannot be certified at the working precision."""


def _insufficient():
    return PrecisionError("insufficient precision")


# ---------------------------------------------------------------------------
# polynomial helpers over Z/p^m, modulo a fixed monic polynomial


def _poly_trim(c):
    while c and c[-1] == 0:
        c = c[:-1]
    return c


def _poly_mul(a, b, modulus, pm):
    out = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            out[i + j] = (out[i + j] + x * y) % pm
    return _poly_reduce(out, modulus, pm)


def _poly_reduce(c, modulus, pm):
    n = len(modulus) - 1
    c = list(c)
    for i in range(len(c) - 1, n - 1, -1):
        lead = c[i] % pm
        if lead:
            for j in range(n + 1):
                c[i - n + j] = (c[i - n + j] - lead * modulus[j]) % pm
        c.pop()
    while len(c) < n:
        c.append(0)
    return tuple(x % pm for x in c)


def _poly_add(a, b, pm):
    m = max(len(a), len(b))
    return tuple(((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)) % pm
                 for i in range(m))


def _poly_scale(a, s, pm):
    return tuple(x * s % pm for x in a)


def _fp_divmod(a, b, p):
    a = list(a)
    binv = pow(b[-1], -1, p)
    q = [0] * max(len(a) - len(b) + 1, 0)
    for i in range(len(a) - len(b), -1, -1):
        f = a[i + len(b) - 1] * binv % p
        q[i] = f
        if f:
            for j in range(len(b)):
                a[i + j] = (a[i + j] - f * b[j]) % p
    return tuple(q), tuple(_poly_trim(tuple(x % p for x in a)))


def _fp_gcd(a, b, p):
    a = _poly_trim(tuple(x % p for x in a))
    b = _poly_trim(tuple(x % p for x in b))
    while b:
        _, r = _fp_divmod(a, b, p)
        a, b = b, r
    return a


def _fp_ext_inverse(a, modulus, p):
    """Inverse of a modulo (modulus, p) via extended Euclid."""
    r0, r1 = tuple(x % p for x in modulus), _poly_trim(tuple(x % p for x in a))
    s0, s1 = (), (1,)
    while r1:
        q, r = _fp_divmod(r0, r1, p)
        qs1 = (0,)
        if q and s1:
            qs1 = [0] * (len(q) + len(s1) - 1)
            for i, x in enumerate(q):
                for j, y in enumerate(s1):
                    qs1[i + j] = (qs1[i + j] + x * y) % p
            qs1 = tuple(qs1)
        news = tuple(((s0[i] if i < len(s0) else 0) - (qs1[i] if i < len(qs1) else 0)) % p
                     for i in range(max(len(s0), len(qs1))))
        r0, r1, s0, s1 = r1, r, s1, news
    if len(r0) != 1:
        raise ZeroDivisionError("not invertible modulo p")
    c = pow(r0[0], -1, p)
    return tuple(x * c % p for x in s0)


def _irreducible_mod_p(coeffs, n, p):
    """Monic degree-n polynomial irreducibility over the prime field."""
    if n == 1:
        return True
    f = tuple(coeffs) + (1,)

    def powx(e):
        # t^e modulo (f, p), binary exponentiation
        result = (1,)
        base = (0, 1)
        while e:
            if e & 1:
                result = _poly_reduce(_poly_mul_fp(result, base, p), f, p)
            base = _poly_reduce(_poly_mul_fp(base, base, p), f, p)
            e >>= 1
        return result

    def _poly_mul_fp(a, b, pp):
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % pp
        return tuple(out)

    t_pn = powx(p ** n)
    if _poly_trim(tuple((a - b) % p for a, b in
                        zip(t_pn + (0,) * 2, (0, 1) + (0,) * len(t_pn)))) != ():
        return False
    m = n
    q = 2
    primes = []
    while m > 1:
        if m % q == 0:
            primes.append(q)
            while m % q == 0:
                m //= q
        q += 1
    for q in primes:
        t_pd = powx(p ** (n // q))
        diff = tuple((a - b) % p for a, b in
                     zip(t_pd + (0,) * 2, (0, 1) + (0,) * len(t_pd)))
        if len(_fp_gcd(diff, f, p)) != 1:
            return False
    return True


# ---------------------------------------------------------------------------
# the unramified context


class Zq:
    """Unramified extension of degree n over the p-adics, precision p^k."""

    _cache = {}

    def __new__(cls, p, n, precision=32):
        key = (p, n, precision)
        if key not in cls._cache:
            cls._cache[key] = super().__new__(cls)
            cls._cache[key]._setup(p, n, precision)
        return cls._cache[key]

    def _setup(self, p, n, precision):
        if precision < 2:
            raise ValueError("precision must be at least 2")
        self.p = p
        self.n = n
        self.prec = precision
        self.pk = p ** precision
        self.modulus = self._pick_modulus()
        self._sigma_chain = None

    def _pick_modulus(self):
        # first irreducible monic lift, coefficient tuples ordered as
        # base-p integers with the constant coefficient least significant
        n, p = self.n, self.p
        for code in range(p ** n):
            coeffs = tuple((code // p ** i) % p for i in range(n))
            if _irreducible_mod_p(coeffs, n, p):
                return coeffs + (1,)
        raise AssertionError("no irreducible polynomial found")

    def _sigma_t(self):
        """Hensel root of the modulus congruent to t^p, as a coefficient tuple."""
        n, p, k = self.n, self.p, self.prec
        if n == 1:
            return (0,)
        f = self.modulus
        fprime = tuple((i + 1) * f[i + 1] for i in range(n))
        y = _poly_reduce(self._tpow(p, p), f, p)
        m = 1
        while m < k:
            m = min(2 * m, k)
            pm = p ** m
            fy = self._eval_poly(f, y, pm)
            fpy = self._eval_poly(fprime, y, pm)
            inv = self._invert_unit_poly(fpy, m)
            y = tuple((a - b) % pm for a, b in
                      zip(y + (0,) * n, _poly_mul(fy, inv, f, pm) + (0,) * n))[:n]
        return y

    def _tpow(self, e, pm):
        result = (1,) + (0,) * (self.n - 1)
        base = ((0, 1) + (0,) * self.n)[:self.n] if self.n > 1 else (0,)
        while e:
            if e & 1:
                result = _poly_mul(result, base, self.modulus, pm)
            base = _poly_mul(base, base, self.modulus, pm)
            e >>= 1
        return result

    def _eval_poly(self, coeffs, at, pm):
        acc = (0,) * self.n
        for c in reversed(coeffs):
            acc = _poly_mul(acc, at, self.modulus, pm)
            acc = _poly_add(acc, (c % pm,) + (0,) * (self.n - 1), pm)
        return acc

    def _invert_unit_poly(self, c, upto):
        p = self.p
        g = _fp_ext_inverse(c, self.modulus, p)
        g = tuple(g) + (0,) * (self.n - len(g))
        m = 1
        while m < upto:
            m = min(2 * m, upto)
            pm = p ** m
            cg = _poly_mul(c, g, self.modulus, pm)
            two_minus = tuple(((2 if i == 0 else 0) - x) % pm for i, x in enumerate(cg))
            g = _poly_mul(g, two_minus, self.modulus, pm)
        return g

    def sigma_images(self):
        """Tuple of sigma^j(t) coefficient vectors for j = 0..n-1."""
        if self._sigma_chain is None:
            if self.n == 1:
                self._sigma_chain = ((0,),)
            else:
                st = self._sigma_t()
                chain = [(0, 1) + (0,) * (self.n - 2)]
                for _ in range(self.n - 1):
                    # sigma^j(t) is sigma^{j-1}(t) evaluated at sigma(t)
                    chain.append(self._eval_poly(chain[-1], st, self.pk))
                self._sigma_chain = tuple(chain)
        return self._sigma_chain

    # element constructors

    def zero(self):
        return PadicElement(self, 0, None, 0, exact=True)

    def one(self):
        return self.from_int(1)

    def from_int(self, m):
        if m == 0:
            return self.zero()
        v = 0
        while m % self.p == 0:
            m //= self.p
            v += 1
        unit = (m % self.pk,) + (0,) * (self.n - 1)
        return PadicElement(self, v, unit, self.prec)

    def from_coeffs(self, coeffs, val=0):
        """Element p^val * (sum of coeffs[i] t^i), normalized.

        Integer coefficients are exact inputs, so the all-zero vector is
        the true zero rather than a zero to working precision.
        """
        c = list(coeffs) + [0] * (self.n - len(coeffs))
        if all(x == 0 for x in c):
            return self.zero()
        return _normalize(self, val, [x % self.pk for x in c[:self.n]], self.prec)

    def parse(self, text):
        return _parse_element(self, text)

    def parse_matrix(self, text):
        return parse_matrix(self, text)

    def __repr__(self):
        return "Zq(p=%d, n=%d, prec=%d)" % (self.p, self.n, self.prec)


def _normalize(ctx, val, coeffs, abs_rel):
    """Strip the content p-power; abs_rel is precision relative to p^val."""
    if abs_rel <= 0:
        return PadicElement(ctx, val + max(abs_rel, 0), None, 0)
    p = ctx.p
    pa = p ** abs_rel
    cs = [c % pa for c in coeffs]
    if all(c == 0 for c in cs):
        return PadicElement(ctx, val + abs_rel, None, 0)
    w = abs_rel
    for c in cs:
        if c == 0:
            continue
        cv = 0
        while c % p == 0:
            c //= p
            cv += 1
        w = min(w, cv)
    rel = min(abs_rel - w, ctx.prec)
    pr = p ** rel
    unit = tuple((c // p ** w) % pr for c in cs)
    return PadicElement(ctx, val + w, unit, rel)


class PadicElement:
    """One element: p^val * unit known mod p^rel, or a certified zero.

    A zero element stores in ``val`` a lower bound for the valuation;
    ``exact`` marks the true zero with infinite valuation.
    """

    __slots__ = ("ctx", "val", "unit", "rel", "exact")

    def __init__(self, ctx, val, unit, rel, exact=False):
        self.ctx = ctx
        self.val = val
        self.unit = unit
        self.rel = rel
        self.exact = exact

    @property
    def is_zeroish(self):
        return self.unit is None

    def valuation(self):
        if self.unit is not None:
            return self.val
        if self.exact:
            return math.inf
        raise _insufficient()

    def abs_prec(self):
        if self.exact:
            return math.inf
        return self.val + self.rel if self.unit is not None else self.val

    def __add__(self, other):
        other = _coerce(self.ctx, other)
        a, b = self, other
        if a.is_zeroish and b.is_zeroish:
            if a.exact and b.exact:
                return self.ctx.zero()
            bound = min(a.abs_prec(), b.abs_prec())
            return PadicElement(self.ctx, bound, None, 0)
        if a.is_zeroish or b.is_zeroish:
            z, x = (a, b) if a.is_zeroish else (b, a)
            if z.exact:
                return x
            bound = z.val
            if x.val >= bound:
                return PadicElement(self.ctx, bound, None, 0)
            return _normalize(self.ctx, x.val, list(x.unit),
                              min(x.rel, bound - x.val))
        v0 = min(a.val, b.val)
        abs_prec = min(a.val + a.rel, b.val + b.rel)
        arel = abs_prec - v0
        pa = self.ctx.p ** arel
        sa = self.ctx.p ** (a.val - v0)
        sb = self.ctx.p ** (b.val - v0)
        coeffs = [(x * sa + y * sb) % pa for x, y in zip(a.unit, b.unit)]
        return _normalize(self.ctx, v0, coeffs, arel)

    def __radd__(self, other):
        return self.__add__(other)

    def __neg__(self):
        if self.is_zeroish:
            return self
        pr = self.ctx.p ** self.rel
        return PadicElement(self.ctx, self.val,
                            tuple((-x) % pr for x in self.unit), self.rel)

    def __sub__(self, other):
        return self + (-_coerce(self.ctx, other))

    def __rsub__(self, other):
        return _coerce(self.ctx, other) + (-self)

    def __mul__(self, other):
        other = _coerce(self.ctx, other)
        a, b = self, other
        if a.exact or b.exact:
            return self.ctx.zero()
        if a.is_zeroish or b.is_zeroish:
            if a.is_zeroish and b.is_zeroish:
                return PadicElement(self.ctx, a.val + b.val, None, 0)
            z, x = (a, b) if a.is_zeroish else (b, a)
            return PadicElement(self.ctx, z.val + x.val, None, 0)
        rel = min(a.rel, b.rel)
        pm = self.ctx.p ** rel
        unit = _poly_mul(tuple(x % pm for x in a.unit),
                         tuple(x % pm for x in b.unit),
                         self.ctx.modulus, pm)
        return PadicElement(self.ctx, a.val + b.val, unit, rel)

    def __rmul__(self, other):
        return self.__mul__(other)

    def inverse(self):
        if self.is_zeroish:
            if self.exact:
                raise ZeroDivisionError("inverting exact zero")
            raise _insufficient()
        inv = self.ctx._invert_unit_poly(
            tuple(x % self.ctx.p ** self.rel for x in self.unit), self.rel)
        pr = self.ctx.p ** self.rel
        return PadicElement(self.ctx, -self.val,
                            tuple(x % pr for x in inv), self.rel)

    def __truediv__(self, other):
        return self * _coerce(self.ctx, other).inverse()

    def frobenius(self):
        if self.is_zeroish or self.ctx.n == 1:
            return self
        img = self.ctx.sigma_images()[1]
        pr = self.ctx.p ** self.rel
        out = self.ctx._eval_poly(self.unit, img, pr)
        return PadicElement(self.ctx, self.val, tuple(x % pr for x in out), self.rel)

    def residue_coeffs(self):
        """Unit-part coefficients mod p^rel; None for zeros."""
        return self.unit

    def same(self, other):
        """Equality to the joint precision."""
        d = self - _coerce(self.ctx, other)
        return d.is_zeroish

    def rational_part_certified(self):
        """Certify the element lies in the prime field; raise otherwise.

        Returns (valuation, constant coefficient mod p^rel, rel) or the
        exact-zero marker (None).
        """
        if self.is_zeroish:
            return None
        if any(x != 0 for x in self.unit[1:]):
            raise AssertionError("element has a transcendental part")
        return (self.val, self.unit[0], self.rel)

    def __repr__(self):
        if self.exact:
            return "0 (exact)"
        if self.is_zeroish:
            return "O(p^%s)" % self.val
        return "p^%d*%s +O(p^%d)" % (self.val, list(self.unit),
                                     self.val + self.rel)


def _coerce(ctx, x):
    if isinstance(x, PadicElement):
        if x.ctx is not ctx:
            raise ValueError("mixed p-adic contexts")
        return x
    if isinstance(x, int):
        return ctx.from_int(x)
    if isinstance(x, Fraction):
        return ctx.from_int(x.numerator) / ctx.from_int(x.denominator)
    raise TypeError("cannot coerce %r" % (x,))


# ---------------------------------------------------------------------------
# literals


_TOKEN = re.compile(r"\s*(p\^-?\d+|p|t\^\d+|t|-?\d+|[*+()-])")


def _tokenize(text):
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ValueError("bad literal near %r" % text[pos:pos + 8])
        out.append(m.group(1))
        pos = m.end()
    return out


def _parse_element(ctx, text):
    """Entry literal: optional `p^v *` prefix, then integer or (poly in t)."""
    text = text.strip()
    val = 0
    m = re.match(r"^(-?)\s*p(\^(-?\d+))?\s*(\*\s*(.*))?$", text)
    if m and (m.group(4) or m.group(2) or text.replace(" ", "") in ("p", "-p")):
        sign = -1 if m.group(1) == "-" else 1
        val = int(m.group(3)) if m.group(3) else 1
        rest = m.group(5)
        if rest is None or rest.strip() == "":
            body = ctx.from_int(sign)
        else:
            body = _parse_poly_body(ctx, rest.strip())
            if sign < 0:
                body = -body
        if body.is_zeroish:
            return body
        return PadicElement(ctx, body.val + val, body.unit, body.rel)
    return _parse_poly_body(ctx, text)


def _parse_poly_body(ctx, text):
    text = text.strip()
    if text.startswith("(") and text.endswith(")"):
        text = text[1:-1]
    coeffs = [0] * ctx.n
    # split on +/- at top level (no nesting inside the body grammar)
    terms = re.findall(r"[+-]?[^+-]+", text.replace(" ", ""))
    if not terms:
        raise ValueError("empty literal")
    for term in terms:
        sign = 1
        if term.startswith("+"):
            term = term[1:]
        elif term.startswith("-"):
            sign = -1
            term = term[1:]
        m = re.match(r"^(\d+)?(\*)?(t(\^(\d+))?)?$", term)
        if not m or (m.group(1) is None and m.group(3) is None):
            raise ValueError("bad term %r" % term)
        c = int(m.group(1)) if m.group(1) else 1
        deg = 0
        if m.group(3):
            deg = int(m.group(5)) if m.group(5) else 1
        if deg >= ctx.n:
            raise ValueError("t-degree %d too large for n=%d" % (deg, ctx.n))
        coeffs[deg] += sign * c
    return ctx.from_coeffs(coeffs)


def parse_matrix(ctx, text):
    """Rows separated by ';', entries by ',', optional surrounding [ ]."""
    body = text.strip()
    if body.startswith("["):
        body = body.strip("[]")
    rows = []
    for row in body.split(";"):
        entries = [ctx.parse(e.replace("[", "").replace("]", ""))
                   for e in row.split(",")]
        rows.append(tuple(entries))
    d = len(rows[0])
    if any(len(r) != d for r in rows):
        raise ValueError("ragged matrix literal")
    return PadicMatrix(ctx, tuple(rows))


# ---------------------------------------------------------------------------
# matrices


class PadicMatrix:
    __slots__ = ("ctx", "data")

    def __init__(self, ctx, rows):
        self.ctx = ctx
        self.data = tuple(tuple(_coerce(ctx, e) for e in r) for r in rows)
        d = len(self.data)
        if any(len(r) != d for r in self.data):
            raise ValueError("square matrices only")

    @property
    def dim(self):
        return len(self.data)

    @classmethod
    def identity(cls, ctx, d):
        return cls(ctx, tuple(tuple(1 if i == j else 0 for j in range(d))
                              for i in range(d)))

    @classmethod
    def from_int_rows(cls, ctx, rows):
        return cls(ctx, tuple(tuple(r) for r in rows))

    def __matmul__(self, other):
        if self.ctx is not other.ctx:
            raise ValueError("mixed p-adic contexts")
        d = self.dim
        rows = []
        for i in range(d):
            row = []
            for j in range(d):
                acc = self.ctx.zero()
                for k in range(d):
                    acc = acc + self.data[i][k] * other.data[k][j]
                row.append(acc)
            rows.append(tuple(row))
        return PadicMatrix(self.ctx, tuple(rows))

    def __sub__(self, other):
        return PadicMatrix(self.ctx, tuple(
            tuple(a - b for a, b in zip(ra, rb))
            for ra, rb in zip(self.data, other.data)))

    def scale(self, s):
        return PadicMatrix(self.ctx, tuple(tuple(e * s for e in r)
                                           for r in self.data))

    def frobenius(self):
        return PadicMatrix(self.ctx, tuple(tuple(e.frobenius() for e in r)
                                           for r in self.data))

    def same(self, other):
        return all(a.same(b) for ra, rb in zip(self.data, other.data)
                   for a, b in zip(ra, rb))

    def is_zeroish(self):
        return all(e.is_zeroish for r in self.data for e in r)

    def charpoly(self):
        """det(xI - M), leading coefficient first, by Berkowitz (no division)."""
        d = self.dim
        ctx = self.ctx
        coeffs = [ctx.one()]
        for r in range(1, d + 1):
            a = self.data[r - 1][r - 1]
            rrow = [self.data[r - 1][j] for j in range(r - 1)]
            scol = [self.data[i][r - 1] for i in range(r - 1)]
            qs = []
            if r > 1:
                vec = scol
                for _ in range(r - 1):
                    qs.append(_dotmul(ctx, rrow, vec))
                    vec = [_dotmul(ctx, [self.data[i][k] for k in range(r - 1)], vec)
                           for i in range(r - 1)]
            col = [ctx.one(), -a] + [-q for q in qs]
            new = [ctx.zero() for _ in range(r + 1)]
            for c in range(r):
                for i in range(c, r + 1):
                    if i - c >= len(col):
                        break
                    new[i] = new[i] + col[i - c] * coeffs[c]
            coeffs = new
        return coeffs

    def det(self):
        cp = self.charpoly()
        last = cp[-1]
        return -last if self.dim % 2 else last

    def inverse(self):
        d = self.dim
        ctx = self.ctx
        work = [list(r) + [ctx.from_int(1 if j == i else 0) for j in range(d)]
                for i, r in enumerate(self.data)]
        for col in range(d):
            pivot = None
            best = None
            for i in range(col, d):
                e = work[i][col]
                if e.is_zeroish:
                    continue
                if best is None or e.val < best:
                    best = e.val
                    pivot = i
            if pivot is None:
                raise _insufficient()
            work[col], work[pivot] = work[pivot], work[col]
            inv = work[col][col].inverse()
            work[col] = [e * inv for e in work[col]]
            for i in range(d):
                if i == col:
                    continue
                f = work[i][col]
                if f.is_zeroish and f.exact:
                    continue
                work[i] = [x - f * y for x, y in zip(work[i], work[col])]
        return PadicMatrix(ctx, tuple(tuple(row[d:]) for row in work))

    def sigma_norm(self, length):
        """b sigma(b) ... sigma^{length-1}(b)."""
        acc = self
        cur = self
        for _ in range(length - 1):
            cur = cur.frobenius()
            acc = acc @ cur
        return acc

    def __repr__(self):
        return "PadicMatrix(%d x %d over %r)" % (self.dim, self.dim, self.ctx)


def _dotmul(ctx, xs, ys):
    acc = ctx.zero()
    for x, y in zip(xs, ys):
        acc = acc + x * y
    return acc


# ---------------------------------------------------------------------------
# isocrystal invariants


class IsocInvariants:
    """Newton slope vector (weakly decreasing) and the valuation invariant."""

    __slots__ = ("newton", "kappa")

    def __init__(self, newton, kappa):
        newton = tuple(Fraction(x) for x in newton)
        if any(newton[i] < newton[i + 1] for i in range(len(newton) - 1)):
            raise ValueError("slopes must be weakly decreasing")
        if sum(newton) != kappa:
            raise ValueError("slope sum must equal the valuation invariant")
        self.newton = newton
        self.kappa = kappa

    def __eq__(self, other):
        return (self.newton, self.kappa) == (other.newton, other.kappa)

    def __hash__(self):
        return hash((self.newton, self.kappa))

    def __repr__(self):
        return "IsocInvariants(newton=%s, kappa=%s)" % (self.newton, self.kappa)


def _certified_valuations(coeffs):
    """(index, valuation) for charpoly coefficients, leading first.

    Returns known points plus lower bounds for undetermined ones; the
    polygon builder decides whether the bounds are harmless.
    """
    known = []
    bounds = []
    d = len(coeffs) - 1
    for i, c in enumerate(coeffs):
        j = d - i
        if c.unit is not None:
            known.append((j, c.val))
        elif not c.exact:
            bounds.append((j, c.val))
    return known, bounds


def newton_polygon_slopes(coeffs):
    """Root valuations (weakly decreasing) of a monic charpoly, certified."""
    d = len(coeffs) - 1
    known, bounds = _certified_valuations(coeffs)
    pts = dict(known)
    if d not in pts or 0 not in pts:
        raise _insufficient()
    # lower convex hull over increasing index
    hull = []
    for j in sorted(pts):
        pt = (j, pts[j])
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)

    def hull_height(x):
        for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
            if x1 <= x <= x2:
                return Fraction(y1) + Fraction(y2 - y1, x2 - x1) * (x - x1)
        raise AssertionError("hull does not span")

    for j, bound in bounds:
        if 0 <= j <= d and hull_height(j) > bound:
            raise _insufficient()
    slopes = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        s = Fraction(y1 - y2, x2 - x1)
        slopes.extend([s] * (x2 - x1))
    slopes.sort(reverse=True)
    return tuple(slopes)


def newton_point(b):
    """Dominant rational Newton slope vector of the twisted matrix."""
    n = b.ctx.n
    first = tuple(s / n for s in newton_polygon_slopes(b.sigma_norm(n).charpoly()))
    second = tuple(s / (2 * n)
                   for s in newton_polygon_slopes(b.sigma_norm(2 * n).charpoly()))
    if first != second:
        raise AssertionError("norm length instability; input is not certified")
    return first


def kottwitz_point(b):
    """Valuation of the determinant."""
    return b.det().valuation()


def kottwitz_point_torus(lat, coweight):
    """Class of a coweight in the full coinvariants of a torus lattice."""
    from .galois import coinvariants
    cgrp, proj = coinvariants(lat, frozenset(lat.group.elements()))
    return cgrp, cgrp.canonical(proj(tuple(coweight)))


def isoc_invariants(b):
    nu = newton_point(b)
    kappa = kottwitz_point(b)
    return IsocInvariants(nu, kappa)


def is_decent(b, degree):
    """Whether the degree-fold norm equals the p-power of the slope vector.

    Central slope: exact matrix equality with the scalar matrix to
    precision.  Otherwise: characteristic polynomial match with the
    p-power diagonal plus an annihilating product over the distinct
    eigenvalue p-powers, which certifies semisimplicity.
    """
    nu = newton_point(b)
    exps = [degree * s for s in nu]
    if any(e.denominator != 1 for e in exps):
        raise ValueError("decency degree does not clear the slope denominators")
    exps = [int(e) for e in exps]
    ctx = b.ctx
    norm = b.sigma_norm(degree)
    d = b.dim
    if len(set(exps)) == 1:
        target = PadicMatrix.identity(ctx, d).scale(ctx.from_int(ctx.p ** exps[0])
                                                    if exps[0] >= 0
                                                    else ctx.from_int(ctx.p ** -exps[0]).inverse())
        return norm.same(target)
    target_cp = _power_charpoly(ctx, exps)
    got_cp = norm.charpoly()
    if not all(a.same(bc) for a, bc in zip(got_cp, target_cp)):
        return False
    prod = PadicMatrix.identity(ctx, d)
    for e in sorted(set(exps)):
        pe = ctx.from_int(ctx.p ** e) if e >= 0 else ctx.from_int(ctx.p ** -e).inverse()
        prod = prod @ (norm - PadicMatrix.identity(ctx, d).scale(pe))
    return prod.is_zeroish()


def _power_charpoly(ctx, exps):
    """Coefficients of the product of (x - p^e), leading first."""
    coeffs = [ctx.one()]
    for e in exps:
        pe = ctx.from_int(ctx.p ** e) if e >= 0 else ctx.from_int(ctx.p ** -e).inverse()
        new = [ctx.zero() for _ in range(len(coeffs) + 1)]
        for i, c in enumerate(coeffs):
            new[i] = new[i] + c
            new[i + 1] = new[i + 1] - c * pe
        coeffs = new
    return coeffs


def degree_n_norm(delta):
    """The n-fold sigma norm together with its prime-field charpoly.

    The characteristic polynomial of the norm is Galois invariant, so its
    coefficients must have no transcendental part; this is asserted and
    the coefficients are returned alongside the matrix.
    """
    n = delta.ctx.n
    norm = delta.sigma_norm(n)
    cp = norm.charpoly()
    for c in cp:
        c.rational_part_certified()
    return norm, tuple(cp)


def sigma_conjugate(b, g):
    """g b sigma(g)^{-1}."""
    return (g @ b) @ g.frobenius().inverse()


# ---------------------------------------------------------------------------
# decent representative constructors


def diagonal_rep(ctx, exponents):
    d = len(exponents)
    rows = []
    for i in range(d):
        row = []
        for j in range(d):
            if i != j:
                row.append(ctx.zero())
            else:
                e = exponents[i]
                row.append(ctx.from_int(ctx.p ** e) if e >= 0
                           else ctx.from_int(ctx.p ** -e).inverse())
        rows.append(tuple(row))
    return PadicMatrix(ctx, tuple(rows))


def companion_rep(ctx, d, a):
    """Companion matrix of x^d - p^a; a basic class of slope a/d."""
    rows = []
    for i in range(d):
        row = [ctx.zero()] * d
        if i == 0:
            row[d - 1] = ctx.from_int(ctx.p ** a) if a >= 0 \
                else ctx.from_int(ctx.p ** -a).inverse()
        else:
            row[i - 1] = ctx.one()
        rows.append(tuple(row))
    return PadicMatrix(ctx, tuple(rows))


def direct_sum(blocks):
    ctx = blocks[0].ctx
    d = sum(b.dim for b in blocks)
    rows = [[ctx.zero()] * d for _ in range(d)]
    off = 0
    for b in blocks:
        for i in range(b.dim):
            for j in range(b.dim):
                rows[off + i][off + j] = b.data[i][j]
        off += b.dim
    return PadicMatrix(ctx, tuple(tuple(r) for r in rows))
