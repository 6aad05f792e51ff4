"""Exact linear algebra helpers: Smith normal form over Z and sparse
Gaussian elimination over Q.

Matrices are lists of lists of python ints (arbitrary precision), or sparse
dicts column->Fraction for the rational routines.  Everything here is sized
for quiver-scale problems (tens of rows), not for bulk numerics.
"""
from __future__ import annotations

from fractions import Fraction


def _identity(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def smith_normal_form(mat):
    """Return (diag, U, V) with U * mat * V diagonal and U, V unimodular.

    diag is the list of diagonal entries (nonnegative, divisibility chain).
    """
    m = len(mat)
    n = len(mat[0]) if m else 0
    A = [list(row) for row in mat]
    U = _identity(m)
    V = _identity(n)

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def addmul_row(dst, src, q):
        if not q:
            return
        Ad, As = A[dst], A[src]
        for k in range(n):
            Ad[k] += q * As[k]
        Ud, Us = U[dst], U[src]
        for k in range(m):
            Ud[k] += q * Us[k]

    def addmul_col(dst, src, q):
        if not q:
            return
        for row in A:
            row[dst] += q * row[src]
        for row in V:
            row[dst] += q * row[src]

    t = 0
    limit = min(m, n)
    while t < limit:
        # locate smallest nonzero entry in the remaining block
        piv = None
        best = None
        for i in range(t, m):
            row = A[i]
            for j in range(t, n):
                a = row[j]
                if a and (best is None or abs(a) < best):
                    best = abs(a)
                    piv = (i, j)
        if piv is None:
            break
        swap_rows(t, piv[0])
        swap_cols(t, piv[1])
        while True:
            done = True
            for i in range(t + 1, m):
                q = A[i][t] // A[t][t]
                addmul_row(i, t, -q)
                if A[i][t]:
                    swap_rows(t, i)
                    done = False
            for j in range(t + 1, n):
                q = A[t][j] // A[t][t]
                addmul_col(j, t, -q)
                if A[t][j]:
                    swap_cols(t, j)
                    done = False
            if done:
                break
        if A[t][t] < 0:
            for k in range(n):
                A[t][k] = -A[t][k]
            for k in range(m):
                U[t][k] = -U[t][k]
        t += 1

    # enforce the divisibility chain d_i | d_{i+1}
    changed = True
    while changed:
        changed = False
        for i in range(t - 1):
            a, b = A[i][i], A[i + 1][i + 1]
            if a and b % a:
                # fold b into the (i,i) pivot and redo the two-by-two block
                addmul_col(i, i + 1, 1)
                while True:
                    q = A[i + 1][i] // A[i][i]
                    addmul_row(i + 1, i, -q)
                    if not A[i + 1][i]:
                        break
                    swap_rows(i, i + 1)
                q = A[i][i + 1] // A[i][i]
                addmul_col(i + 1, i, -q)
                if A[i][i] < 0:
                    for k in range(n):
                        A[i][k] = -A[i][k]
                    for k in range(m):
                        U[i][k] = -U[i][k]
                if A[i + 1][i + 1] < 0:
                    for k in range(n):
                        A[i + 1][k] = -A[i + 1][k]
                    for k in range(m):
                        U[i + 1][k] = -U[i + 1][k]
                changed = True
    diag = [A[i][i] for i in range(limit)]
    return diag, U, V


class IntRowSpan:
    """Membership and coset reduction for the integer row span of a matrix."""

    def __init__(self, mat, ncols=None):
        if not mat:
            if ncols is None:
                raise ValueError("need ncols for an empty matrix")
            self.ncols = ncols
            self.diag = []
            self.V = _identity(ncols)
            return
        self.ncols = len(mat[0])
        self.diag, _, self.V = smith_normal_form(mat)

    def _transform(self, v):
        if len(v) != self.ncols:
            raise ValueError("vector length mismatch")
        V = self.V
        return [sum(v[i] * V[i][j] for i in range(self.ncols))
                for j in range(self.ncols)]

    def contains(self, v):
        w = self._transform(v)
        for j, x in enumerate(w):
            d = self.diag[j] if j < len(self.diag) else 0
            if d:
                if x % d:
                    return False
            elif x:
                return False
        return True

    def coset_rep(self, v):
        """Canonical representative of v modulo the row span (hashable)."""
        w = self._transform(v)
        rep = []
        for j, x in enumerate(w):
            d = self.diag[j] if j < len(self.diag) else 0
            rep.append(x % d if d else x)
        return tuple(rep)


def int_left_kernel(mat):
    """Basis of {x : x * mat = 0} over Z (list of integer row vectors)."""
    m = len(mat)
    if m == 0:
        return []
    diag, U, _ = smith_normal_form(mat)
    basis = []
    for i in range(m):
        d = diag[i] if i < len(diag) else 0
        if d == 0:
            basis.append(list(U[i]))
    return basis


def rational_rank(mat):
    """Rank of an integer or rational matrix."""
    rows = [[Fraction(x) for x in row] for row in mat if any(row)]
    rank = 0
    ncols = len(mat[0]) if mat else 0
    col = 0
    while rows and col < ncols:
        piv = next((r for r in rows if r[col]), None)
        if piv is None:
            col += 1
            continue
        rows.remove(piv)
        inv = 1 / piv[col]
        piv = [x * inv for x in piv]
        for r in rows:
            f = r[col]
            if f:
                for k in range(col, ncols):
                    r[k] -= f * piv[k]
        rank += 1
        col += 1
    return rank


def solve_sparse(rows, unknowns=None):
    """Solve a sparse rational linear system.

    rows: list of (coeffs, rhs) where coeffs maps unknown-key -> Fraction.
    Returns one solution as a dict (unset unknowns are zero), or None when
    the system is inconsistent.
    """
    work = []
    for coeffs, rhs in rows:
        c = {k: Fraction(v) for k, v in coeffs.items() if v}
        r = Fraction(rhs)
        if c or r:
            work.append((c, r))
    pivots = []  # (key, coeffs, rhs) in elimination order
    for coeffs, rhs in work:
        coeffs = dict(coeffs)
        for key, pc, pr in pivots:
            f = coeffs.get(key)
            if f:
                for k, v in pc.items():
                    acc = coeffs.get(k, Fraction(0)) - f * v
                    if acc:
                        coeffs[k] = acc
                    elif k in coeffs:
                        del coeffs[k]
                rhs -= f * pr
        if not coeffs:
            if rhs:
                return None
            continue
        key = min(coeffs)  # deterministic pivot choice
        inv = 1 / coeffs.pop(key)
        coeffs = {k: v * inv for k, v in coeffs.items()}
        rhs *= inv
        pivots.append((key, coeffs, rhs))
    solution = {}
    for key, coeffs, rhs in reversed(pivots):
        val = rhs - sum(v * solution.get(k, Fraction(0))
                        for k, v in coeffs.items())
        if val:
            solution[key] = val
    return solution


def nullspace_sparse(rows, unknowns):
    """Basis of the nullspace of a sparse homogeneous system.

    rows: list of coeff dicts (unknown-key -> Fraction), implicitly = 0.
    unknowns: ordered list of all unknown keys.
    Returns a list of dicts, one basis vector each.
    """
    pivots = []
    for coeffs in rows:
        coeffs = {k: Fraction(v) for k, v in coeffs.items() if v}
        for key, pc in pivots:
            f = coeffs.get(key)
            if f:
                for k, v in pc.items():
                    acc = coeffs.get(k, Fraction(0)) - f * v
                    if acc:
                        coeffs[k] = acc
                    elif k in coeffs:
                        del coeffs[k]
        if coeffs:
            key = min(coeffs)
            inv = 1 / coeffs.pop(key)
            pivots.append((key, {k: v * inv for k, v in coeffs.items()}))
    pivot_keys = {key for key, _ in pivots}
    basis = []
    for free in unknowns:
        if free in pivot_keys:
            continue
        vec = {free: Fraction(1)}
        for key, pc in reversed(pivots):
            val = -sum(v * vec.get(k, Fraction(0)) for k, v in pc.items())
            if val:
                vec[key] = val
        basis.append(vec)
    return basis
