"""Global parameter packages in beta coordinates and their invariant.

A parameter couples a rational conjugacy class descriptor with finitely
supported coefficient data over the places of a fixed ambient frame
``K -> I0 -> G``.  The frame is an :class:`~kotcount.galois.ESetting`
together with a designated finite place playing the role of p and a
chosen Hodge coweight ``mu`` on the middle lattice.  Admissibility at p
compares the pushed class against ``-[mu]``, the archimedean slot stores
the image of a coweight, and the global invariant ``alpha`` is built by
lifting the local data to the kernel lattice, summing, and classifying
in the obstruction group.  The finite Fourier identity against the
character dual is evaluated with exact rational angles.

The norm compatibility check at p for GL is a pure bookkeeping
criterion on Newton slopes and determinant valuations; it never touches
truncated arithmetic because the class descriptor is rational.
"""

from fractions import Fraction
from math import lcm

from .abelian import IntMatrix, kernel_basis, solve_columns, torsion_subgroup
from .galois import coinvariants, ESetting, preset_gl2_elliptic, preset_sl2


# ---------------------------------------------------------------------------
# ambient frame


class AmbientData:
    """Ambient frame: an obstruction setting, a p-place, and a Hodge lift.

    ``mu`` is an ambient coweight vector of the middle lattice; its image
    under the projection is the Hodge class in the target group.  The
    designated finite place stands for p.  Every other finite place may
    only carry torsion coefficients that die in the target.
    """

    __slots__ = ("setting", "p_label", "mu", "g_datum", "i0_datum")

    def __init__(self, K_in_I, I_to_G, places, p_label, mu,
                 g_datum=None, i0_datum=None):
        setting = ESetting(K_in_I, I_to_G, places)
        finite = [pl.label for pl in places.all_places()
                  if not pl.is_archimedean()]
        if p_label not in finite:
            raise ValueError("p must be the label of a finite place")
        mu = tuple(int(x) for x in mu)
        if len(mu) != I_to_G.domain.rank:
            raise ValueError("mu must live on the middle lattice")
        object.__setattr__(self, "setting", setting)
        object.__setattr__(self, "p_label", p_label)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "g_datum", g_datum)
        object.__setattr__(self, "i0_datum", i0_datum)

    def __setattr__(self, *a):
        raise AttributeError("AmbientData is immutable")

    def place(self, label):
        for pl in self.setting.places.all_places():
            if pl.label == label:
                return pl
        raise KeyError(label)

    def arch_place(self):
        for pl in self.setting.places.all_places():
            if pl.is_archimedean():
                return pl
        raise AssertionError("place system lost its archimedean place")

    def mu_class(self):
        """Canonical coordinates of the Hodge class in the target group."""
        glat = self.setting.proj.codomain
        return glat.canonical(self.setting.proj(self.mu))


def ambient_gl2(mu=(1, 0)):
    """GL(2) frame over its elliptic maximal torus, p at the inert place."""
    from .rootdata import gl_datum, induced_torus_datum
    incl, proj, places = preset_gl2_elliptic()
    return AmbientData(incl, proj, places, "v1", mu,
                       g_datum=gl_datum(2), i0_datum=induced_torus_datum())


def ambient_sl2(mu=(0,)):
    """SL(2) frame over its elliptic maximal torus, p at the inert place."""
    from .rootdata import norm_one_torus_datum, sl_datum
    incl, proj, places = preset_sl2()
    return AmbientData(incl, proj, places, "v1", mu,
                       g_datum=sl_datum(2), i0_datum=norm_one_torus_datum())


_AMBIENT_PRESETS = {"gl2": ambient_gl2, "sl2": ambient_sl2}


# ---------------------------------------------------------------------------
# parameters


class KottwitzParameter:
    """Class descriptor plus beta data over the places of an ambient frame.

    ``beta_finite`` maps finite place labels other than p to ambient
    vectors of the middle lattice; each such class must be torsion in the
    local coinvariants and must die in the target group locally.
    ``beta_p`` and ``beta_infty`` are ambient vectors read as local
    coinvariant classes at p and at the archimedean place.  ``gamma0``
    is an opaque descriptor: a rational matrix, a monic characteristic
    polynomial (leading coefficient first), or a string label.
    """

    __slots__ = ("ambient", "gamma0", "beta_finite", "beta_p", "beta_infty")

    def __init__(self, ambient, gamma0, beta_finite=None, beta_p=None,
                 beta_infty=None):
        if not isinstance(ambient, AmbientData):
            raise TypeError("ambient must be an AmbientData")
        ilat = ambient.setting.proj.domain
        glat = ambient.setting.proj.codomain
        zero = (0,) * ilat.rank
        beta_p = zero if beta_p is None else tuple(int(x) for x in beta_p)
        beta_infty = zero if beta_infty is None \
            else tuple(int(x) for x in beta_infty)
        if len(beta_p) != ilat.rank or len(beta_infty) != ilat.rank:
            raise ValueError("beta vectors must live on the middle lattice")
        clean = {}
        for label, vec in (beta_finite or {}).items():
            place = ambient.place(label)
            if place.is_archimedean() or label == ambient.p_label:
                raise ValueError("finite beta data must avoid p and infinity")
            vec = tuple(int(x) for x in vec)
            if len(vec) != ilat.rank:
                raise ValueError("beta vectors must live on the middle lattice")
            cloc, _ = coinvariants(ilat, place.decomposition)
            if cloc.is_zero(vec):
                continue
            if cloc.element_order(vec) is None:
                raise ValueError("finite beta classes must be torsion")
            cgv, _ = coinvariants(glat, place.decomposition)
            if not cgv.is_zero(ambient.setting.proj(vec)):
                raise ValueError("finite beta classes must die in the target")
            clean[label] = vec
        object.__setattr__(self, "ambient", ambient)
        object.__setattr__(self, "gamma0", gamma0)
        object.__setattr__(self, "beta_finite", dict(clean))
        object.__setattr__(self, "beta_p", beta_p)
        object.__setattr__(self, "beta_infty", beta_infty)

    def __setattr__(self, *a):
        raise AttributeError("KottwitzParameter is immutable")

    def combine(self, other):
        """Componentwise sum of the beta data within one frame."""
        if other.ambient is not self.ambient:
            raise ValueError("parameters live in different frames")
        merged = dict(self.beta_finite)
        for label, vec in other.beta_finite.items():
            base = merged.get(label, (0,) * len(vec))
            merged[label] = tuple(a + b for a, b in zip(base, vec))
        return KottwitzParameter(
            self.ambient, self.gamma0, merged,
            tuple(a + b for a, b in zip(self.beta_p, other.beta_p)),
            tuple(a + b for a, b in zip(self.beta_infty, other.beta_infty)))


def beta_infinity_from_mu(ambient, mu_h):
    """Class of a coweight in the archimedean coinvariants of the frame."""
    ilat = ambient.setting.proj.domain
    mu_h = tuple(int(x) for x in mu_h)
    if len(mu_h) != ilat.rank:
        raise ValueError("mu must live on the middle lattice")
    cgrp, _ = coinvariants(ilat, ambient.arch_place().decomposition)
    return cgrp.canonical(mu_h)


# ---------------------------------------------------------------------------
# admissibility


def check_kp0(param):
    """Pushed class at p must equal the image of the negated Hodge class."""
    amb = param.ambient
    proj = amb.setting.proj
    place = amb.place(amb.p_label)
    cg, _ = coinvariants(proj.codomain, place.decomposition)
    push = proj(param.beta_p)
    neg_mu = tuple(-x for x in proj(amb.mu))
    return cg.same(push, neg_mu)


def _val_p(x, p):
    x = Fraction(x)
    if x == 0:
        raise ValueError("zero has no finite valuation")
    v = 0
    n = x.numerator
    while n % p == 0:
        n //= p
        v += 1
    d = x.denominator
    while d % p == 0:
        d //= p
        v -= 1
    return v


def _charpoly_fractions(rows):
    """Characteristic polynomial of a rational matrix, leading first.

    Faddeev iteration; divisions by step counts are exact over Q.
    """
    d = len(rows)
    m = [[Fraction(x) for x in row] for row in rows]
    if any(len(row) != d for row in m):
        raise ValueError("matrix must be square")
    coeffs = [Fraction(1)]
    work = [row[:] for row in m]
    for k in range(1, d + 1):
        c = -sum(work[i][i] for i in range(d)) / k
        coeffs.append(c)
        if k == d:
            break
        for i in range(d):
            work[i][i] += c
        work = [[sum(m[i][t] * work[t][j] for t in range(d))
                 for j in range(d)] for i in range(d)]
    return tuple(coeffs)


def _gamma0_charpoly(gamma0):
    if isinstance(gamma0, str):
        raise ValueError("synthetic descriptor has no characteristic polynomial")
    seq = list(gamma0)
    if seq and isinstance(seq[0], (list, tuple)):
        return _charpoly_fractions(seq)
    coeffs = tuple(Fraction(x) for x in seq)
    if not coeffs or coeffs[0] != 1:
        raise ValueError("characteristic polynomial must be monic")
    return coeffs


def _eigenvalue_valuations(coeffs, p):
    """Valuations of the roots, weakly decreasing, from the lower hull."""
    d = len(coeffs) - 1
    if coeffs[-1] == 0:
        raise ValueError("descriptor must be invertible")
    pts = [(d - i, _val_p(c, p)) for i, c in enumerate(coeffs) if c != 0]
    pts.sort()
    hull = []
    for pt in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    vals = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        slope = Fraction(y2 - y1, x2 - x1)
        vals.extend([-slope] * (x2 - x1))
    vals.sort(reverse=True)
    return tuple(vals)


def check_kp1_gl(gamma0, b_invariants, n, p):
    """Degree-n norm criterion for GL: Newton match and determinant match.

    The descriptor must be a rational matrix or a monic characteristic
    polynomial; its root valuations over Q_p divided by n must equal the
    slope vector of the isocrystal, and the determinant valuation must
    equal n times the valuation invariant.
    """
    coeffs = _gamma0_charpoly(gamma0)
    d = len(coeffs) - 1
    if len(b_invariants.newton) != d:
        return False
    vals = _eigenvalue_valuations(coeffs, p)
    if tuple(Fraction(v, n) for v in vals) != b_invariants.newton:
        return False
    return _val_p(coeffs[-1], p) == n * b_invariants.kappa


# ---------------------------------------------------------------------------
# the invariant


def _lift_at_place(ilat, glat, pmat, place, beta, target, rng):
    """Ambient vector in the local class of beta with exact target image.

    The congruence freedom at the place is spanned by the local relation
    columns; the target condition is imposed modulo the relations of the
    target lattice only, so the image is pinned globally and not merely
    in the local coinvariants.
    """
    rel = ilat.relations
    eye = IntMatrix.identity(ilat.rank)
    for h in sorted(place.decomposition):
        if h != 0:
            rel = rel.hstack(eye - ilat.action[h])
    sys = (pmat @ rel).hstack(glat.relations)
    rhs = tuple(t - s for t, s in zip(target, pmat.apply(beta)))
    sol = solve_columns(sys, rhs)
    if sol is None:
        raise AssertionError("place lift infeasible despite surjectivity")
    y = list(sol[: rel.cols])
    if rng is not None and sys.cols:
        null = kernel_basis(sys)
        for j in range(null.cols):
            c = rng.randrange(-3, 4)
            col = null.col(j)
            for i in range(rel.cols):
                y[i] += c * col[i]
    shift = rel.apply(tuple(y)) if rel.cols else (0,) * ilat.rank
    return tuple(b + s for b, s in zip(beta, shift))


def _express_in_kernel(setting, total, rng):
    """Kernel-lattice coordinates of a middle-lattice vector."""
    incl = setting.incl
    stacked = incl.matrix.hstack(incl.codomain.relations)
    sol = solve_columns(stacked, total)
    if sol is None:
        raise AssertionError("lift sum escaped the kernel lattice")
    k = list(sol[: incl.domain.rank])
    if rng is not None and stacked.cols:
        null = kernel_basis(stacked)
        for j in range(null.cols):
            c = rng.randrange(-3, 4)
            col = null.col(j)
            for i in range(len(k)):
                k[i] += c * col[i]
    return tuple(k)


def kottwitz_invariant(param, rng=None):
    """Obstruction class of a parameter, independent of all lift choices.

    Lifts with prescribed target images (zero away from p and infinity,
    minus the Hodge class at p, plus the Hodge class at infinity) are
    solved as integer linear systems; passing ``rng`` draws a random
    solution instead of the particular one, which must not change the
    answer.
    """
    if not check_kp0(param):
        raise ValueError("parameter violates KP0")
    amb = param.ambient
    setting = amb.setting
    proj = setting.proj
    ilat, glat = proj.domain, proj.codomain
    mu_g = proj(amb.mu)
    total = (0,) * ilat.rank
    for place in setting.places.all_places():
        if place.is_archimedean():
            beta, target = param.beta_infty, mu_g
        elif place.label == amb.p_label:
            beta = param.beta_p
            target = tuple(-x for x in mu_g)
        else:
            beta = param.beta_finite.get(place.label, (0,) * ilat.rank)
            target = (0,) * glat.rank
        x = _lift_at_place(ilat, glat, proj.matrix, place, beta, target, rng)
        total = tuple(a + b for a, b in zip(total, x))
    k = _express_in_kernel(setting, total, rng)
    egrp, eproj = setting.e_group()
    return egrp.canonical(eproj(setting.classify(k)))


def fourier_sum(param, sign=1):
    """Character sum over the dual of the obstruction group, exactly.

    The angles form a coset structure over a cyclic subgroup of Q/Z, so
    the sum of roots of unity collapses to the dual order when the
    invariant vanishes and to zero otherwise; both branches are integer
    arithmetic with the subgroup structure verified on the way.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    alpha = kottwitz_invariant(param)
    setting = param.ambient.setting
    dual, pairing = setting.k_group()
    angles = [pairing(alpha, chi) for chi in dual.elements()]
    m = 1
    for a in angles:
        m = lcm(m, a.denominator)
    if m == 1:
        return sign * len(angles)
    seen = {}
    for a in angles:
        seen[a] = seen.get(a, 0) + 1
    if set(seen) != {Fraction(j, m) for j in range(m)} \
            or len(set(seen.values())) != 1:
        raise AssertionError("character angles are not a subgroup coset")
    return 0


# ---------------------------------------------------------------------------
# fixture records (consumed by the command line fourier runner)


def fixtures_to_text(records):
    """Serialize fixture records, one block per parameter."""
    lines = ["# parameter fixtures v1"]
    for rec in records:
        lines.append("param %s" % rec["name"])
        lines.append("ambient %s" % rec["ambient"])
        if rec.get("mu") is not None:
            lines.append("mu %s" % " ".join(str(x) for x in rec["mu"]))
        if rec.get("gamma0") is not None:
            lines.append("gamma0 label %s" % rec["gamma0"])
        for label in sorted(rec.get("beta", {})):
            vec = rec["beta"][label]
            lines.append("beta %s %s" % (label, " ".join(str(x) for x in vec)))
        lines.append("sign %d" % rec.get("sign", 1))
        lines.append("end")
    return "\n".join(lines) + "\n"


def parse_fixtures(text):
    """Parse fixture records; inverse of :func:`fixtures_to_text`."""
    records = []
    current = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "param":
            if current is not None:
                raise ValueError("fixture block not closed before %r" % line)
            current = {"name": parts[1] if len(parts) > 1 else "",
                       "ambient": None, "mu": None, "gamma0": None,
                       "beta": {}, "sign": 1}
        elif current is None:
            raise ValueError("directive outside a fixture block: %r" % line)
        elif parts[0] == "ambient":
            current["ambient"] = parts[1]
        elif parts[0] == "mu":
            current["mu"] = tuple(int(x) for x in parts[1:])
        elif parts[0] == "gamma0":
            current["gamma0"] = " ".join(parts[2:]) if parts[1] == "label" \
                else parts[1]
        elif parts[0] == "beta":
            current["beta"][parts[1]] = tuple(int(x) for x in parts[2:])
        elif parts[0] == "sign":
            current["sign"] = int(parts[1])
        elif parts[0] == "end":
            if current["ambient"] not in _AMBIENT_PRESETS:
                raise ValueError("unknown ambient %r" % (current["ambient"],))
            records.append(current)
            current = None
        else:
            raise ValueError("unknown fixture directive %r" % parts[0])
    if current is not None:
        raise ValueError("unterminated fixture block")
    return records


def build_parameter(record, ambient=None):
    """Instantiate a parameter from a fixture record.

    Frames are cached per call site via the ``ambient`` argument so that
    many records against one preset share the obstruction data.
    """
    if ambient is None:
        maker = _AMBIENT_PRESETS[record["ambient"]]
        ambient = maker() if record.get("mu") is None \
            else maker(record["mu"])
    beta_finite = {}
    beta_p = None
    beta_infty = None
    for label, vec in record.get("beta", {}).items():
        if label == ambient.p_label:
            beta_p = vec
        elif ambient.place(label).is_archimedean():
            beta_infty = vec
        else:
            beta_finite[label] = vec
    return KottwitzParameter(ambient, record.get("gamma0"),
                             beta_finite, beta_p, beta_infty)


def run_fixture(record, ambient=None):
    """Fourier sum of one fixture record."""
    param = build_parameter(record, ambient)
    return fourier_sum(param, record.get("sign", 1))
