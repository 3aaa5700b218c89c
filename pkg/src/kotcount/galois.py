"""Finite group actions on lattices, places, and the obstruction group.

A Galois action is modeled by a finite group (multiplication table, order
capped at 24) acting on a presented abelian group through integer
matrices.  Places of the rationals enter only through their decomposition
subgroups: a place system carries one finite place per conjugacy class of
cyclic subgroups (by Chebotarev every such subgroup occurs for infinitely
many primes, and repeated places contribute nothing new) plus one
designated archimedean involution.

On top of this the module computes, for an exact sequence of lattices
``K -> I -> G``, the finite obstruction group

    E = K_{tors coinvariants} / sum over places of the local kernels

together with its character dual and evaluation pairing.
"""

from __future__ import annotations

from .abelian import (
    AbHom,
    FgAbGroup,
    IntMatrix,
    column_space_basis,
    dual_and_pairing,
    kernel,
    kernel_basis,
    solve_columns,
    torsion_subgroup,
)

MAX_GROUP_ORDER = 24


class FiniteGroup:
    """Finite group given by its multiplication table.

    Element ``0`` is the identity.  The full set of group axioms is
    verified at construction; with the order capped at 24 the cubic
    associativity scan is immediate.
    """

    __slots__ = ("order", "table", "_inv")

    def __init__(self, table):
        table = tuple(tuple(int(x) for x in row) for row in table)
        n = len(table)
        if n == 0 or n > MAX_GROUP_ORDER:
            raise ValueError("finite group order must be between 1 and %d" % MAX_GROUP_ORDER)
        if any(len(r) != n for r in table):
            raise ValueError("multiplication table must be square")
        if any(not 0 <= x < n for r in table for x in r):
            raise ValueError("table entries out of range")
        for g in range(n):
            if table[0][g] != g or table[g][0] != g:
                raise ValueError("element 0 must be the identity")
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    if table[table[a][b]][c] != table[a][table[b][c]]:
                        raise ValueError("table is not associative")
        inv = [None] * n
        for g in range(n):
            for h in range(n):
                if table[g][h] == 0:
                    inv[g] = h
        if any(x is None for x in inv):
            raise ValueError("table has no inverses")
        object.__setattr__(self, "order", n)
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "_inv", tuple(inv))

    def __setattr__(self, *a):
        raise AttributeError("FiniteGroup is immutable")

    @staticmethod
    def cyclic(n):
        return FiniteGroup([[(i + j) % n for j in range(n)] for i in range(n)])

    def mul(self, g, h):
        return self.table[g][h]

    def inv(self, g):
        return self._inv[g]

    def elements(self):
        return range(self.order)

    def subgroup_generated(self, gens):
        seen = {0}
        frontier = [0]
        gens = list(gens)
        while frontier:
            x = frontier.pop()
            for g in gens:
                y = self.table[x][g]
                if y not in seen:
                    seen.add(y)
                    frontier.append(y)
        return frozenset(seen)

    def cyclic_subgroups(self):
        return sorted({self.subgroup_generated([g]) for g in self.elements()},
                      key=lambda s: (len(s), sorted(s)))

    def conjugate_subgroup(self, sub, g):
        gi = self.inv(g)
        return frozenset(self.table[self.table[g][h]][gi] for h in sub)

    def cyclic_subgroup_classes(self):
        """One representative per conjugacy class of cyclic subgroups."""
        reps = []
        seen = set()
        for sub in self.cyclic_subgroups():
            if sub in seen:
                continue
            orbit = {self.conjugate_subgroup(sub, g) for g in self.elements()}
            seen |= orbit
            reps.append(min(orbit, key=lambda s: sorted(s)))
        return reps


class FiniteGroupAction:
    """A finite group together with a unimodular representation on ``Z^r``."""

    __slots__ = ("group", "rank", "matrices")

    def __init__(self, group, matrices):
        matrices = tuple(matrices)
        if len(matrices) != group.order:
            raise ValueError("need one matrix per group element")
        rank = matrices[0].rows
        for m in matrices:
            if m.rows != rank or m.cols != rank:
                raise ValueError("representation matrices must be square of equal size")
            if rank and not m.is_unimodular():
                raise ValueError("representation matrices must be unimodular")
        if matrices[0] != IntMatrix.identity(rank):
            raise ValueError("identity element must act as the identity matrix")
        for g in group.elements():
            for h in group.elements():
                if matrices[g] @ matrices[h] != matrices[group.mul(g, h)]:
                    raise ValueError("matrices do not satisfy the group law")
        object.__setattr__(self, "group", group)
        object.__setattr__(self, "rank", rank)
        object.__setattr__(self, "matrices", matrices)

    def __setattr__(self, *a):
        raise AttributeError("FiniteGroupAction is immutable")


class GaloisLattice(FgAbGroup):
    """Presented abelian group with an action of a finite group.

    The action matrices live on ambient coordinates; they must preserve
    the relation span and satisfy the group law modulo relations.  A free
    module (no relations) with unimodular matrices is the lattice case;
    torsion quotients (fundamental groups of non-simply-connected groups)
    are admitted with the same interface.
    """

    __slots__ = ("group", "action")

    def __init__(self, group, matrices, relations=None):
        matrices = tuple(matrices)
        if len(matrices) != group.order:
            raise ValueError("need one action matrix per group element")
        rank = matrices[0].rows if matrices else 0
        super().__init__(rank, relations)
        for m in matrices:
            if m.rows != rank or m.cols != rank:
                raise ValueError("action matrices must be square of equal size")
            for j in range(self.relations.cols):
                if not self.is_zero(m.apply(self.relations.col(j))):
                    raise ValueError("action does not preserve relations")
        for g in group.elements():
            for h in group.elements():
                prod = matrices[g] @ matrices[h]
                tgt = matrices[group.mul(g, h)]
                for j in range(rank):
                    if not self.is_zero(tuple(a - b for a, b in
                                              zip(prod.col(j), tgt.col(j)))):
                        raise ValueError("action matrices violate the group law")
        object.__setattr__(self, "group", group)
        object.__setattr__(self, "action", matrices)

    @staticmethod
    def from_action(fga, relations=None):
        return GaloisLattice(fga.group, fga.matrices, relations)

    def act(self, g, x):
        return self.action[g].apply(x)


class Place:
    """A place, known only through its decomposition subgroup."""

    __slots__ = ("kind", "decomposition", "label")

    def __init__(self, kind, decomposition, label):
        decomposition = frozenset(decomposition)
        if kind not in ("finite", "archimedean"):
            raise ValueError("place kind must be finite or archimedean")
        if kind == "archimedean" and len(decomposition) > 2:
            raise ValueError("archimedean decomposition group has order at most 2")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "decomposition", decomposition)
        object.__setattr__(self, "label", label)

    def __setattr__(self, *a):
        raise AttributeError("Place is immutable")

    def is_archimedean(self):
        return self.kind == "archimedean"

    def __repr__(self):
        return "Place(%s, %s)" % (self.label, sorted(self.decomposition))


class PlaceSystem:
    """One archimedean place plus one finite place per cyclic class.

    Finite places carry every cyclic subgroup of the acting group exactly
    once up to conjugacy, the trivial subgroup (a split place) included.
    """

    __slots__ = ("group", "archimedean", "finite_places")

    def __init__(self, group, archimedean, finite_places):
        object.__setattr__(self, "group", group)
        object.__setattr__(self, "archimedean", archimedean)
        object.__setattr__(self, "finite_places", tuple(finite_places))

    def __setattr__(self, *a):
        raise AttributeError("PlaceSystem is immutable")

    @staticmethod
    def standard(group, arch_element=0):
        if group.mul(arch_element, arch_element) != 0:
            raise ValueError("archimedean element must be an involution or the identity")
        arch = Place("archimedean", group.subgroup_generated([arch_element]), "oo")
        finites = []
        for i, sub in enumerate(group.cyclic_subgroup_classes()):
            gen = None
            for g in sub:
                if group.subgroup_generated([g]) == sub:
                    gen = g
                    break
            if gen is None:
                raise AssertionError("cyclic class without a generator")
            finites.append(Place("finite", sub, "v%d" % i))
        return PlaceSystem(group, arch, finites)

    def all_places(self):
        return self.finite_places + (self.archimedean,)


# ---------------------------------------------------------------------------
# coinvariants and the place-wise functor


def coinvariants(lat, subgroup):
    """Quotient by the sublattice of ``m - h.m`` over ``h`` in the subgroup.

    Returns ``(group, projection)`` with the projection defined on the
    ambient coordinates of ``lat``.
    """
    cols = [lat.relations]
    eye = IntMatrix.identity(lat.rank)
    for h in sorted(subgroup):
        if h != 0:
            cols.append(eye - lat.action[h])
    rel = cols[0]
    for extra in cols[1:]:
        rel = rel.hstack(extra)
    grp = FgAbGroup(lat.rank, rel)
    proj = AbHom(lat, grp, eye)
    return grp, proj


def _express_through(incl, x):
    """Coordinates ``t`` with ``incl(t)`` equal to the class of ``x``.

    ``incl`` is an inclusion ``T -> C`` and ``x`` lives on the ambient
    coordinates of ``C``.  Raises if the class of ``x`` is not in the
    image (for torsion subgroups: not a torsion class).
    """
    stacked = incl.matrix.hstack(incl.codomain.relations)
    sol = solve_columns(stacked, x)
    if sol is None:
        raise ArithmeticError("class does not lie in the designated subgroup")
    return tuple(sol[: incl.domain.rank])


def a_functor(lat, place):
    """Local coefficient group at a place, with its map to coinvariant torsion.

    Finite place: the torsion subgroup of the local coinvariants (the map
    is the identity).  Archimedean place with involution ``i``: the Tate
    group ``ker(1 + i) / im(1 - i)``, mapped canonically into the local
    coinvariant torsion.
    """
    cgrp, _ = coinvariants(lat, place.decomposition)
    tors, tincl = torsion_subgroup(cgrp)
    if not place.is_archimedean():
        return tors, AbHom(tors, tors, IntMatrix.identity(tors.rank))
    iota = None
    for h in place.decomposition:
        if h != 0:
            iota = h
    if iota is None:
        return FgAbGroup(0), AbHom(FgAbGroup(0), tors, IntMatrix.zeros(tors.rank, 0))
    eye = IntMatrix.identity(lat.rank)
    norm = eye + lat.action[iota]
    stacked = norm.hstack(-lat.relations)
    kb = kernel_basis(stacked)
    gens = IntMatrix.from_cols([kb.col(j)[: lat.rank] for j in range(kb.cols)],
                               rows=lat.rank)
    basis = column_space_basis(gens) if gens.cols else IntMatrix.zeros(lat.rank, 0)
    rel_cols = []
    aug = eye - lat.action[iota]
    for j in range(lat.rank):
        w = solve_columns(basis, aug.col(j))
        if w is None:
            raise AssertionError("augmentation vector escaped the norm kernel")
        rel_cols.append(w)
    for j in range(lat.relations.cols):
        w = solve_columns(basis, lat.relations.col(j))
        if w is None:
            raise AssertionError("relation escaped the norm kernel")
        rel_cols.append(w)
    hgrp = FgAbGroup(basis.cols, IntMatrix.from_cols(rel_cols, rows=basis.cols))
    to_tors = IntMatrix.from_cols(
        [_express_through(tincl, basis.col(j)) for j in range(basis.cols)],
        rows=tors.rank)
    return hgrp, AbHom(hgrp, tors, to_tors)


def p_map(lat, places):
    """The sum-over-places map into the global coinvariant torsion.

    Returns an ``AbHom`` whose domain is the direct sum of the local
    coefficient groups (finite places first, archimedean last, matching
    ``places.all_places()``) and whose codomain is the torsion subgroup of
    the full coinvariants.
    """
    cglob, _ = coinvariants(lat, frozenset(lat.group.elements()))
    tglob, tincl = torsion_subgroup(cglob)
    blocks = []
    for place in places.all_places():
        cloc, _ = coinvariants(lat, place.decomposition)
        tloc, tloc_incl = torsion_subgroup(cloc)
        agrp, amap = a_functor(lat, place)
        # ambient image of each local generator inside the lattice coordinates
        cols = []
        for j in range(agrp.rank):
            ambient = tloc_incl.matrix.apply(amap.matrix.col(j))
            cols.append(_express_through(tincl, ambient))
        blocks.append((agrp, IntMatrix.from_cols(cols, rows=tglob.rank)))
    total_rank = sum(g.rank for g, _ in blocks)
    offset = 0
    rel_cols = []
    for g, _ in blocks:
        for j in range(g.relations.cols):
            col = [0] * total_rank
            for i in range(g.rank):
                col[offset + i] = g.relations.data[i][j]
            rel_cols.append(tuple(col))
        offset += g.rank
    domain = FgAbGroup(total_rank, IntMatrix.from_cols(rel_cols, rows=total_rank))
    mat_cols = []
    for g, m in blocks:
        for j in range(g.rank):
            mat_cols.append(m.col(j))
    mat = IntMatrix.from_cols(mat_cols, rows=tglob.rank)
    return AbHom(domain, tglob, mat)


# ---------------------------------------------------------------------------
# the obstruction group


def _check_equivariant(hom):
    dom, cod = hom.domain, hom.codomain
    if not isinstance(dom, GaloisLattice) or not isinstance(cod, GaloisLattice):
        raise TypeError("equivariant maps need GaloisLattice endpoints")
    if dom.group.table != cod.group.table:
        raise ValueError("maps must respect a single acting group")
    for g in dom.group.elements():
        left = cod.action[g] @ hom.matrix
        right = hom.matrix @ dom.action[g]
        for j in range(dom.rank):
            if not cod.is_zero(tuple(a - b for a, b in zip(left.col(j), right.col(j)))):
                raise ValueError("map is not equivariant")


class ESetting:
    """Bundle ``K -> I -> G`` with a place system, caching the quotient data.

    ``K_in_I`` and ``I_to_G`` are homomorphisms between GaloisLattices over
    one acting group.  The kernel lattice must be torsion-free and the
    projection surjective.
    """

    __slots__ = ("incl", "proj", "places", "_cache")

    def __init__(self, K_in_I, I_to_G, places):
        _check_equivariant(K_in_I)
        _check_equivariant(I_to_G)
        if K_in_I.codomain is not I_to_G.domain:
            raise ValueError("middle terms do not match")
        if not I_to_G.is_surjective():
            raise ValueError("π₁ map must be surjective")
        klat = K_in_I.domain
        if klat.invariants() != ():
            raise ValueError("kernel lattice must be torsion-free")
        comp = I_to_G.matrix @ K_in_I.matrix
        for j in range(klat.rank):
            if not I_to_G.codomain.is_zero(comp.col(j)):
                raise ValueError("composite K -> G must vanish")
        kergrp, kerincl = kernel(I_to_G)
        for j in range(kergrp.rank):
            x = kerincl.matrix.col(j)
            stacked = K_in_I.matrix.hstack(I_to_G.domain.relations)
            if solve_columns(stacked, x) is None:
                raise ValueError("K is smaller than the kernel of the projection")
        object.__setattr__(self, "incl", K_in_I)
        object.__setattr__(self, "proj", I_to_G)
        object.__setattr__(self, "places", places)
        object.__setattr__(self, "_cache", {})

    def __setattr__(self, *a):
        raise AttributeError("ESetting is immutable")

    def _global_torsion(self):
        if "glob" not in self._cache:
            klat = self.incl.domain
            cglob, _ = coinvariants(klat, frozenset(klat.group.elements()))
            tors, tincl = torsion_subgroup(cglob)
            self._cache["glob"] = (cglob, tors, tincl)
        return self._cache["glob"]

    def local_kernel_images(self):
        """Per place: generators (in global torsion coordinates) of the kernel
        of ``K`` local coinvariant torsion mapped into the ``I`` coinvariants,
        plus the kernel order for diagnostics."""
        if "locals" in self._cache:
            return self._cache["locals"]
        klat, ilat = self.incl.domain, self.incl.codomain
        _, tors, tincl = self._global_torsion()
        out = []
        for place in self.places.all_places():
            ckv, _ = coinvariants(klat, place.decomposition)
            tkv, tkv_incl = torsion_subgroup(ckv)
            civ, _ = coinvariants(ilat, place.decomposition)
            phi = AbHom(tkv, civ, self.incl.matrix @ tkv_incl.matrix)
            kv, kv_incl = kernel(phi)
            gens = []
            for j in range(kv.rank):
                ambient = tkv_incl.matrix.apply(kv_incl.matrix.col(j))
                gens.append(_express_through(tincl, ambient))
            out.append((place, kv.order(), gens))
        self._cache["locals"] = out
        return out

    def e_group(self):
        """The obstruction group with the projection from global torsion."""
        if "e" in self._cache:
            return self._cache["e"]
        _, tors, _ = self._global_torsion()
        cols = [c for _, _, gens in self.local_kernel_images() for c in gens]
        rel = tors.relations.hstack(IntMatrix.from_cols(cols, rows=tors.rank)) \
            if cols else tors.relations
        egrp = FgAbGroup(tors.rank, rel)
        eproj = AbHom(tors, egrp, IntMatrix.identity(tors.rank))
        self._cache["e"] = (egrp, eproj)
        return egrp, eproj

    def classify(self, x):
        """Class in the obstruction group of an ambient kernel-lattice vector.

        The class of ``x`` in the full coinvariants must be torsion; for a
        torsion-free kernel of an elliptic setting this always holds.
        """
        cglob, tors, tincl = self._global_torsion()
        return _express_through(tincl, tuple(x))

    def k_group(self):
        """Character dual of the obstruction group with the pairing."""
        egrp, _ = self.e_group()
        return dual_and_pairing(egrp)


def e_group(K_in_I, I_to_G, places):
    """Obstruction group of the sequence, with projection from global torsion."""
    return ESetting(K_in_I, I_to_G, places).e_group()


def kottwitz_k_group(K_in_I, I_to_G, places):
    """Dual of the obstruction group together with the evaluation pairing."""
    return ESetting(K_in_I, I_to_G, places).k_group()


def tn_sequence_check(K_in_I, I_to_G, places):
    """Vanishing of the two-step composite at each place and globally.

    Returns a dict keyed by place label (plus ``"global"``), each entry
    reporting whether the composite ``A_v(K) -> A_v(I) -> A_v(G)`` is zero
    along with the local coefficient group orders.
    """
    setting = ESetting(K_in_I, I_to_G, places)
    klat, ilat = K_in_I.domain, K_in_I.codomain
    glat = I_to_G.codomain
    report = {}

    def composite_zero(subgroup):
        ckv, _ = coinvariants(klat, subgroup)
        tkv, tkv_incl = torsion_subgroup(ckv)
        cgv, _ = coinvariants(glat, subgroup)
        comp = I_to_G.matrix @ K_in_I.matrix @ tkv_incl.matrix
        ok = all(cgv.is_zero(comp.col(j)) for j in range(comp.cols))
        return ok, tkv.order()

    for place, ker_order, _ in setting.local_kernel_images():
        ok, t_order = composite_zero(place.decomposition)
        report[place.label] = {
            "composite_zero": ok,
            "kernel_order": ker_order,
            "torsion_order": t_order,
        }
    ok, t_order = composite_zero(frozenset(klat.group.elements()))
    egrp, _ = setting.e_group()
    report["global"] = {
        "composite_zero": ok,
        "torsion_order": t_order,
        "e_group_order": egrp.order(),
    }
    return report


# ---------------------------------------------------------------------------
# presets


def preset_gl2_elliptic():
    """Elliptic maximal torus in GL(2): returns ``(K_in_I, I_to_G, places)``.

    The cocharacter lattice of the torus is ``Z^2`` with the swap action,
    the ambient fundamental group is ``Z`` with the trivial action, and
    the kernel is spanned by ``(1, -1)``.
    """
    g = FiniteGroup.cyclic(2)
    ilat = GaloisLattice(g, (IntMatrix.identity(2), IntMatrix([[0, 1], [1, 0]])))
    glat = GaloisLattice(g, (IntMatrix.identity(1), IntMatrix.identity(1)))
    klat = GaloisLattice(g, (IntMatrix.identity(1), IntMatrix([[-1]])))
    incl = AbHom(klat, ilat, IntMatrix([[1], [-1]]))
    proj = AbHom(ilat, glat, IntMatrix([[1, 1]]))
    return incl, proj, PlaceSystem.standard(g, 1)


def preset_sl2():
    """Elliptic maximal torus in SL(2): returns ``(K_in_I, I_to_G, places)``.

    Here the torus fundamental group is ``Z`` with the sign action, the
    ambient group is simply connected, and the kernel is everything.
    """
    g = FiniteGroup.cyclic(2)
    ilat = GaloisLattice(g, (IntMatrix.identity(1), IntMatrix([[-1]])))
    glat = GaloisLattice(g, (IntMatrix.identity(0), IntMatrix.identity(0)))
    klat = GaloisLattice(g, (IntMatrix.identity(1), IntMatrix([[-1]])))
    incl = AbHom(klat, ilat, IntMatrix.identity(1))
    proj = AbHom(ilat, glat, IntMatrix.zeros(0, 1))
    return incl, proj, PlaceSystem.standard(g, 1)


# ---------------------------------------------------------------------------
# textual serialization (consumed by the CLI kgroup subcommand)


def _matrix_to_line(m):
    if m.rows == 0 or m.cols == 0:
        return "(%dx%d)" % (m.rows, m.cols)
    return " ; ".join(" ".join(str(x) for x in row) for row in m.data)


def _matrix_from_line(line):
    line = line.strip()
    if line.startswith("("):
        shape = line.strip("()").split("x")
        return IntMatrix.zeros(int(shape[0]), int(shape[1]))
    rows = [r.split() for r in line.split(";")]
    return IntMatrix([[int(x) for x in r] for r in rows])


def lattice_to_text(lat):
    """Line-based serialization of a GaloisLattice."""
    lines = ["lattice rank %d" % lat.rank,
             "group %d" % lat.group.order]
    for row in lat.group.table:
        lines.append(" ".join(str(x) for x in row))
    lines.append("relations " + _matrix_to_line(lat.relations))
    for g in lat.group.elements():
        lines.append("act " + _matrix_to_line(lat.action[g]))
    return "\n".join(lines) + "\n"


def lattice_from_text(text):
    lines = [ln for ln in (l.strip() for l in text.splitlines())
             if ln and not ln.startswith("#")]
    if not lines[0].startswith("lattice rank "):
        raise ValueError("expected 'lattice rank <r>' header")
    rank = int(lines[0].split()[2])
    if not lines[1].startswith("group "):
        raise ValueError("expected 'group <n>' line")
    n = int(lines[1].split()[1])
    table = [[int(x) for x in lines[2 + i].split()] for i in range(n)]
    group = FiniteGroup(table)
    pos = 2 + n
    if not lines[pos].startswith("relations"):
        raise ValueError("expected 'relations' line")
    rel = _matrix_from_line(lines[pos][len("relations"):])
    if rel.rows == 0 and rel.cols == 0 and rank:
        rel = IntMatrix.zeros(rank, 0)
    pos += 1
    mats = []
    for g in range(n):
        if not lines[pos].startswith("act"):
            raise ValueError("expected 'act' line for element %d" % g)
        m = _matrix_from_line(lines[pos][len("act"):])
        if m.rows == 0 and m.cols == 0 and rank:
            m = IntMatrix.zeros(rank, rank)
        mats.append(m)
        pos += 1
    return GaloisLattice(group, mats, rel)


def setting_to_text(K_in_I, I_to_G, places):
    """Serialization of a full ``K -> I -> G`` setting with its places."""
    arch_elems = sorted(places.archimedean.decomposition - {0})
    arch = arch_elems[0] if arch_elems else 0
    parts = ["setting v1", "arch %d" % arch, "[K]", lattice_to_text(K_in_I.domain),
             "[I]", lattice_to_text(K_in_I.codomain),
             "[G]", lattice_to_text(I_to_G.codomain),
             "incl " + _matrix_to_line(K_in_I.matrix),
             "proj " + _matrix_to_line(I_to_G.matrix)]
    return "\n".join(parts)


def setting_from_text(text):
    lines = text.splitlines()
    if not lines or lines[0].strip() != "setting v1":
        raise ValueError("expected 'setting v1' header")
    arch = None
    sections = {}
    current = None
    buf = []
    tail = {}
    for ln in lines[1:]:
        s = ln.strip()
        if not s or s.startswith("#"):
            continue
        if s.startswith("arch "):
            arch = int(s.split()[1])
        elif s in ("[K]", "[I]", "[G]"):
            if current:
                sections[current] = "\n".join(buf)
            current = s
            buf = []
        elif s.startswith("incl ") or s.startswith("proj "):
            if current:
                sections[current] = "\n".join(buf)
                current = None
                buf = []
            key, _, rest = s.partition(" ")
            tail[key] = _matrix_from_line(rest)
        else:
            buf.append(s)
    if current:
        sections[current] = "\n".join(buf)
    if arch is None or set(sections) != {"[K]", "[I]", "[G]"} or set(tail) != {"incl", "proj"}:
        raise ValueError("incomplete setting serialization")
    klat = lattice_from_text(sections["[K]"])
    ilat = lattice_from_text(sections["[I]"])
    glat = lattice_from_text(sections["[G]"])
    incl_m = tail["incl"]
    proj_m = tail["proj"]
    if incl_m.rows == 0 and incl_m.cols == 0:
        incl_m = IntMatrix.zeros(ilat.rank, klat.rank)
    if proj_m.rows == 0 and proj_m.cols == 0:
        proj_m = IntMatrix.zeros(glat.rank, ilat.rank)
    incl = AbHom(klat, ilat, incl_m)
    proj = AbHom(ilat, glat, proj_m)
    return incl, proj, PlaceSystem.standard(klat.group, arch)
