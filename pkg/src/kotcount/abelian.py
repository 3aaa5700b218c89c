"""Exact integer matrix algebra and finitely generated abelian groups.

Everything here is exact: matrices have Python ``int`` entries, group
elements are integer coordinate vectors, and character values are
``Fraction`` angles (the angle ``k/n`` stands for ``exp(2*pi*i*k/n)``).

A group is always given by a presentation: an ambient free module
``Z^rank`` modulo the column span of a relation matrix.  All structure
(invariant factors, equality of classes, torsion, duals) is derived from
one Smith normal form of the relation matrix.

>>> U, D, V = smith_normal_form(IntMatrix([[2, 4], [6, 8]]))
>>> D.data
((2, 0), (0, 4))
>>> (U @ IntMatrix([[2, 4], [6, 8]]) @ V) == D
True
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product
from math import gcd, lcm


class IntMatrix:
    """Immutable integer matrix.

    >>> a = IntMatrix([[1, 2], [3, 4]])
    >>> (a @ a).data
    ((7, 10), (15, 22))
    >>> a.det()
    -2
    """

    __slots__ = ("data", "rows", "cols")

    def __init__(self, rows, cols_hint=None):
        # cols_hint fixes the width of a rowless matrix; 0-by-n shapes
        # occur as maps out of rank-n groups into rank-0 groups.
        data = tuple(tuple(int(x) for x in r) for r in rows)
        if data and any(len(r) != len(data[0]) for r in data):
            raise ValueError("ragged matrix")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "rows", len(data))
        object.__setattr__(self, "cols", len(data[0]) if data else (cols_hint or 0))

    def __setattr__(self, *a):
        raise AttributeError("IntMatrix is immutable")

    @staticmethod
    def identity(n):
        return IntMatrix([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @staticmethod
    def zeros(m, n):
        return IntMatrix([[0] * n for _ in range(m)], cols_hint=n)

    @staticmethod
    def from_cols(cols, rows=None):
        """Build a matrix whose columns are the given vectors."""
        cols = [tuple(c) for c in cols]
        if not cols:
            return IntMatrix.zeros(rows or 0, 0)
        return IntMatrix([[c[i] for c in cols] for i in range(len(cols[0]))],
                         cols_hint=len(cols))

    def col(self, j):
        return tuple(r[j] for r in self.data)

    def columns(self):
        return [self.col(j) for j in range(self.cols)]

    def transpose(self):
        return IntMatrix([self.col(j) for j in range(self.cols)], cols_hint=self.rows)

    def hstack(self, other):
        if self.rows != other.rows:
            raise ValueError("row mismatch in hstack")
        return IntMatrix([ra + rb for ra, rb in zip(self.data, other.data)],
                         cols_hint=self.cols + other.cols)

    def apply(self, vec):
        """Matrix times column vector, returned as a tuple."""
        vec = tuple(vec)
        if len(vec) != self.cols:
            raise ValueError("dimension mismatch")
        return tuple(sum(a * b for a, b in zip(row, vec)) for row in self.data)

    def __matmul__(self, other):
        if self.cols != other.rows:
            raise ValueError("dimension mismatch")
        bt = other.transpose().data
        return IntMatrix(
            [[sum(a * b for a, b in zip(row, col)) for col in bt] for row in self.data],
            cols_hint=other.cols,
        )

    def __add__(self, other):
        return IntMatrix(
            [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.data, other.data)],
            cols_hint=self.cols,
        )

    def __sub__(self, other):
        return IntMatrix(
            [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(self.data, other.data)],
            cols_hint=self.cols,
        )

    def __neg__(self):
        return IntMatrix([[-a for a in r] for r in self.data], cols_hint=self.cols)

    def __eq__(self, other):
        return (isinstance(other, IntMatrix) and self.data == other.data
                and self.cols == other.cols)

    def __hash__(self):
        return hash((self.data, self.cols))

    def __repr__(self):
        return "IntMatrix(%s)" % (list(list(r) for r in self.data),)

    def det(self):
        """Determinant by fraction-free (Bareiss) elimination."""
        if self.rows != self.cols:
            raise ValueError("determinant of non-square matrix")
        n = self.rows
        if n == 0:
            return 1
        a = [list(r) for r in self.data]
        sign = 1
        prev = 1
        for k in range(n - 1):
            if a[k][k] == 0:
                for i in range(k + 1, n):
                    if a[i][k] != 0:
                        a[k], a[i] = a[i], a[k]
                        sign = -sign
                        break
                else:
                    return 0
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
                a[i][k] = 0
            prev = a[k][k]
        return sign * a[n - 1][n - 1]

    def is_unimodular(self):
        return self.rows == self.cols and abs(self.det()) == 1


def _snf_ext(mat):
    """Smith normal form with transforms.

    Returns ``(U, Uinv, D, V)`` with ``U @ mat @ V == D``, ``U`` and ``V``
    unimodular, ``Uinv`` the exact inverse of ``U``, and the diagonal of
    ``D`` nonnegative with each entry dividing the next.
    """
    m, n = mat.rows, mat.cols
    a = [list(r) for r in mat.data]
    u = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    ui = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    v = [[1 if i == j else 0 for j in range(n)] for i in range(n)]

    def row_add(i, t, c):
        a[i] = [x + c * y for x, y in zip(a[i], a[t])]
        u[i] = [x + c * y for x, y in zip(u[i], u[t])]
        for r in ui:
            r[t] -= c * r[i]

    def row_swap(i, t):
        a[i], a[t] = a[t], a[i]
        u[i], u[t] = u[t], u[i]
        for r in ui:
            r[i], r[t] = r[t], r[i]

    def row_neg(i):
        a[i] = [-x for x in a[i]]
        u[i] = [-x for x in u[i]]
        for r in ui:
            r[i] = -r[i]

    def col_add(j, t, c):
        for r in a:
            r[j] += c * r[t]
        for r in v:
            r[j] += c * r[t]

    def col_swap(j, t):
        for r in a:
            r[j], r[t] = r[t], r[j]
        for r in v:
            r[j], r[t] = r[t], r[j]

    for t in range(min(m, n)):
        # Pull a nonzero entry of smallest magnitude into the pivot slot.
        best = None
        for i in range(t, m):
            for j in range(t, n):
                if a[i][j] != 0 and (best is None or abs(a[i][j]) < abs(a[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        if best[0] != t:
            row_swap(t, best[0])
        if best[1] != t:
            col_swap(t, best[1])
        while True:
            dirty = False
            for i in range(t + 1, m):
                if a[i][t] != 0:
                    q = a[i][t] // a[t][t]
                    row_add(i, t, -q)
                    if a[i][t] != 0:
                        row_swap(t, i)
                        dirty = True
            if dirty:
                continue
            for j in range(t + 1, n):
                if a[t][j] != 0:
                    q = a[t][j] // a[t][t]
                    col_add(j, t, -q)
                    if a[t][j] != 0:
                        col_swap(t, j)
                        dirty = True
            if dirty:
                continue
            # Row and column are clear; enforce divisibility of the block.
            offender = None
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if a[i][j] % a[t][t] != 0:
                        offender = j
                        break
                if offender is not None:
                    break
            if offender is None:
                break
            col_add(t, offender, 1)
        if a[t][t] < 0:
            row_neg(t)
    return (IntMatrix(u, cols_hint=m), IntMatrix(ui, cols_hint=m),
            IntMatrix(a, cols_hint=n), IntMatrix(v, cols_hint=n))


def smith_normal_form(mat):
    """Return ``(U, D, V)`` with ``U @ mat @ V == D`` in Smith normal form.

    ``U`` and ``V`` are unimodular and the diagonal invariants of ``D``
    are nonnegative with ``d[i]`` dividing ``d[i+1]``.
    """
    u, _, d, v = _snf_ext(mat)
    return u, d, v


def solve_columns(mat, target):
    """One integer solution ``x`` of ``mat @ x == target``, or ``None``.

    ``target`` is a vector; the solution expresses it in the column span.
    """
    u, _, d, v = _snf_ext(mat)
    rhs = u.apply(target)
    y = [0] * mat.cols
    k = min(mat.rows, mat.cols)
    for i in range(mat.rows):
        di = d.data[i][i] if i < k else 0
        if di == 0:
            if rhs[i] != 0:
                return None
        else:
            if rhs[i] % di != 0:
                return None
            y[i] = rhs[i] // di
    return v.apply(y)


def kernel_basis(mat):
    """Basis of the integer kernel ``{x : mat @ x == 0}`` as matrix columns."""
    _, _, d, v = _snf_ext(mat)
    k = min(mat.rows, mat.cols)
    free = [j for j in range(mat.cols) if j >= k or d.data[j][j] == 0]
    return IntMatrix.from_cols([v.col(j) for j in free], rows=mat.cols)


def column_span_contains(mat, target):
    return solve_columns(mat, target) is not None


def column_space_basis(mat):
    """Basis of the column span, as matrix columns.

    With ``U @ mat @ V == D`` the span equals ``Uinv`` applied to the span
    of ``D``, so the nonzero diagonal entries give independent generators.
    """
    u, ui, d, v = _snf_ext(mat)
    k = min(mat.rows, mat.cols)
    cols = []
    for i in range(k):
        di = d.data[i][i]
        if di != 0:
            cols.append(tuple(di * x for x in ui.col(i)))
    return IntMatrix.from_cols(cols, rows=mat.rows)


class FgAbGroup:
    """Finitely generated abelian group ``Z^rank / (column span of relations)``.

    Elements are coordinate tuples of length ``rank`` in the ambient free
    module; two tuples represent the same class when their difference lies
    in the relation span.

    >>> g = FgAbGroup(2, IntMatrix([[2, 0], [0, 4]]))
    >>> g.invariants()
    (2, 4)
    >>> g.order()
    8
    >>> g.same((1, 1), (3, 5))
    True
    """

    __slots__ = ("rank", "relations", "_snf")

    def __init__(self, rank, relations=None):
        rank = int(rank)
        if relations is None:
            relations = IntMatrix.zeros(rank, 0)
        if relations.rows != rank:
            raise ValueError("relation matrix must have one row per generator")
        object.__setattr__(self, "rank", rank)
        object.__setattr__(self, "relations", relations)
        object.__setattr__(self, "_snf", None)

    def __setattr__(self, *a):
        raise AttributeError("FgAbGroup is immutable")

    def _data(self):
        """Cached ``(U, Uinv, diag)`` for the relation matrix.

        ``diag[i]`` is the i-th invariant of the relation lattice in the
        transformed coordinates ``z = U x``; zero marks a free coordinate.
        """
        if self._snf is None:
            u, ui, d, _ = _snf_ext(self.relations)
            k = min(self.relations.rows, self.relations.cols)
            diag = tuple(d.data[i][i] if i < k else 0 for i in range(self.rank))
            object.__setattr__(self, "_snf", (u, ui, diag))
        return self._snf

    def zero(self):
        return (0,) * self.rank

    def canonical(self, x):
        """Canonical representative of the class of ``x``."""
        u, ui, diag = self._data()
        z = list(u.apply(x))
        for i, di in enumerate(diag):
            if di != 0:
                z[i] %= di
        return ui.apply(z)

    def is_zero(self, x):
        u, _, diag = self._data()
        z = u.apply(x)
        return all((di != 0 and zi % di == 0) or (di == 0 and zi == 0)
                   for zi, di in zip(z, diag))

    def same(self, x, y):
        return self.is_zero(tuple(a - b for a, b in zip(x, y)))

    def add(self, x, y):
        return tuple(a + b for a, b in zip(x, y))

    def neg(self, x):
        return tuple(-a for a in x)

    def scale(self, c, x):
        return tuple(c * a for a in x)

    def invariants(self):
        """Torsion invariant factors, each > 1, in divisibility order."""
        _, _, diag = self._data()
        return tuple(di for di in diag if di > 1)

    def free_rank(self):
        _, _, diag = self._data()
        return sum(1 for di in diag if di == 0)

    def is_finite(self):
        return self.free_rank() == 0

    def order(self):
        """Number of elements, or ``None`` for an infinite group."""
        if not self.is_finite():
            return None
        n = 1
        for di in self.invariants():
            n *= di
        return n

    def element_order(self, x):
        """Order of the class of ``x``; ``None`` when infinite."""
        u, _, diag = self._data()
        z = u.apply(x)
        n = 1
        for zi, di in zip(z, diag):
            if di == 0:
                if zi != 0:
                    return None
            else:
                n = lcm(n, di // gcd(zi, di))
        return n

    def elements(self):
        """Iterate one representative per class.  Finite groups only."""
        if not self.is_finite():
            raise ValueError("cannot enumerate an infinite group")
        _, ui, diag = self._data()
        ranges = [range(di) if di > 0 else range(1) for di in diag]
        for z in product(*ranges):
            yield ui.apply(z)

    def __repr__(self):
        inv = self.invariants()
        f = self.free_rank()
        parts = ["Z/%d" % d for d in inv] + ["Z"] * f
        return "FgAbGroup(%s)" % (" + ".join(parts) if parts else "0")


class AbHom:
    """Homomorphism between presented groups, given on ambient coordinates.

    The matrix has ``codomain.rank`` rows and ``domain.rank`` columns and
    must send every relation of the domain into the relation span of the
    codomain; this is checked at construction time.
    """

    __slots__ = ("domain", "codomain", "matrix")

    def __init__(self, domain, codomain, matrix):
        if matrix.rows != codomain.rank or matrix.cols != domain.rank:
            raise ValueError("homomorphism matrix has wrong shape")
        for j in range(domain.relations.cols):
            image = matrix.apply(domain.relations.col(j))
            if not codomain.is_zero(image):
                raise ValueError("matrix does not send relations to relations")
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "codomain", codomain)
        object.__setattr__(self, "matrix", matrix)

    def __setattr__(self, *a):
        raise AttributeError("AbHom is immutable")

    def __call__(self, x):
        return self.matrix.apply(x)

    def compose(self, other):
        """``self`` after ``other``."""
        if other.codomain is not self.domain and other.codomain.rank != self.domain.rank:
            raise ValueError("composition mismatch")
        return AbHom(other.domain, self.codomain, self.matrix @ other.matrix)

    @staticmethod
    def identity(group):
        return AbHom(group, group, IntMatrix.identity(group.rank))

    def is_surjective(self):
        """Surjectivity onto the codomain group.

        The map is onto iff ambient columns of the matrix together with the
        codomain relations span the codomain ambient lattice.
        """
        span = self.matrix.hstack(self.codomain.relations)
        _, _, d, _ = _snf_ext(span)
        k = min(span.rows, span.cols)
        if k < span.rows:
            return False
        return all(d.data[i][i] == 1 for i in range(span.rows))

    def __repr__(self):
        return "AbHom(%r -> %r)" % (self.domain, self.codomain)


def cokernel(f):
    """Cokernel of ``f`` with the projection from the codomain.

    Returns ``(group, proj)`` where ``proj`` is induced by the identity on
    ambient coordinates.
    """
    rel = f.codomain.relations.hstack(f.matrix)
    coker = FgAbGroup(f.codomain.rank, rel)
    proj = AbHom(f.codomain, coker, IntMatrix.identity(f.codomain.rank))
    return coker, proj


def kernel(f):
    """Kernel of ``f`` with its inclusion into the domain.

    Returns ``(group, incl)``.  The kernel is the lattice of ambient
    vectors mapping into the codomain's relation span, modulo the domain's
    own relations.
    """
    stacked = f.matrix.hstack(-f.codomain.relations)
    kb = kernel_basis(stacked)
    xs = IntMatrix([row[: f.domain.rank] for row in kb.transpose().data]).transpose() \
        if kb.cols else IntMatrix.zeros(f.domain.rank, 0)
    # xs columns generate the preimage lattice; reduce to an honest basis.
    basis = column_space_basis(xs) if xs.cols else IntMatrix.zeros(f.domain.rank, 0)
    rel_cols = []
    for j in range(f.domain.relations.cols):
        w = solve_columns(basis, f.domain.relations.col(j))
        if w is None:
            raise AssertionError("domain relation escaped the kernel lattice")
        rel_cols.append(w)
    grp = FgAbGroup(basis.cols, IntMatrix.from_cols(rel_cols, rows=basis.cols))
    incl = AbHom(grp, f.domain, basis)
    return grp, incl


def torsion_subgroup(group):
    """Torsion subgroup with its inclusion.

    Returns ``(tors, incl)`` where ``tors`` has one generator per torsion
    invariant of ``group``.
    """
    _, ui, diag = group._data()
    idx = [i for i, di in enumerate(diag) if di > 1]
    rel = IntMatrix([[diag[idx[i]] if i == j else 0 for j in range(len(idx))]
                     for i in range(len(idx))])
    tors = FgAbGroup(len(idx), rel)
    incl = AbHom(tors, group, IntMatrix.from_cols([ui.col(i) for i in idx],
                                                  rows=group.rank))
    return tors, incl


def dual_and_pairing(group):
    """Character dual of a finite group with the evaluation pairing.

    Returns ``(dual, pairing)`` where ``pairing(x, chi)`` is the exact
    angle in ``[0, 1)`` as a ``Fraction``; the angle ``k/n`` stands for the
    root of unity ``exp(2*pi*i*k/n)``.  The dual is abstractly isomorphic
    to the group itself and nondegeneracy holds on the nose.
    """
    if not group.is_finite():
        raise ValueError("non-finite group has no implemented dual")
    u, _, diag = group._data()
    inv = [(i, di) for i, di in enumerate(diag) if di > 1]
    rel = IntMatrix([[inv[i][1] if i == j else 0 for j in range(len(inv))]
                     for i in range(len(inv))])
    dual = FgAbGroup(len(inv), rel)

    def pairing(x, chi):
        z = u.apply(x)
        total = Fraction(0)
        for (i, di), c in zip(inv, chi):
            total += Fraction(z[i] * c, di)
        return total - (total.numerator // total.denominator)

    return dual, pairing
