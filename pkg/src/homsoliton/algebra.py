"""Real Lie algebras given by structure constants, and their structural linear algebra.

Structure constants follow ``c[i, j, k]`` = coefficient of ``e_k`` in
``[e_i, e_j]``.  The matrix of ``ad(e_i)`` therefore has entry ``[k, j] =
c[i, j, k]`` (column ``j`` is ``[e_i, e_j]``).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np

from .linalg import EXACT, Field, LinAlgError, contract, in_span, inverse, max_abs, nullspace, rank, row_space, solve


class LieAlgebraError(ValueError):
    """Structure constants that do not define a Lie algebra, or bad dimensions."""


class Subspace:
    """Linear subspace of ``field**ambient_dim``.

    The stored basis is the reduced row echelon form of the spanning vectors,
    so two subspaces are equal exactly when their bases are equal.
    """

    def __init__(self, vectors, ambient_dim: int, field: Field = EXACT):
        self.ambient_dim = ambient_dim
        self.field = field
        if np.asarray(vectors).size == 0:
            vecs = field.zeros((0, ambient_dim))
        else:
            vecs = field.array(vectors).reshape(-1, ambient_dim)
        self.basis = row_space(vecs, field, ambient_dim)

    @classmethod
    def zero(cls, n: int, field: Field = EXACT) -> Subspace:
        return cls(field.zeros((0, n)), n, field)

    @classmethod
    def full(cls, n: int, field: Field = EXACT) -> Subspace:
        return cls(field.eye(n), n, field)

    @classmethod
    def coordinate(cls, indices: Iterable[int], n: int, field: Field = EXACT) -> Subspace:
        eye = field.eye(n)
        return cls(eye[list(indices)], n, field)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        """Basis as columns, i.e. the reduced column echelon form."""
        return self.basis.T

    def contains(self, v) -> bool:
        return in_span(self.basis, self.field.array(v), self.field)

    __contains__ = contains

    def issubspace(self, other: Subspace) -> bool:
        return all(other.contains(v) for v in self.basis)

    __le__ = issubspace

    def __eq__(self, other) -> bool:
        if not isinstance(other, Subspace):
            return NotImplemented
        if self.ambient_dim != other.ambient_dim or self.dim != other.dim:
            return False
        if self.field.exact:
            return bool(np.all(self.basis == other.basis))
        return self.field.all_zero(self.basis - other.basis)

    def __hash__(self):
        return hash((self.ambient_dim, tuple(map(str, self.basis.flat))))

    def __add__(self, other: Subspace) -> Subspace:
        return Subspace(np.concatenate([self.basis, other.basis]), self.ambient_dim, self.field)

    def intersect(self, other: Subspace) -> Subspace:
        if self.dim == 0 or other.dim == 0:
            return Subspace.zero(self.ambient_dim, self.field)
        # a.A = b.B  <=>  (a, -b) in the left kernel of [A; B]
        stacked = np.concatenate([self.basis, -other.basis]).T
        coeffs = nullspace(stacked, self.field)
        return Subspace(coeffs[:, : self.dim] @ self.basis, self.ambient_dim, self.field)

    def coordinates(self, v) -> np.ndarray:
        x = solve(self.basis.T, self.field.array(v), self.field)
        if x is None:
            raise LinAlgError("vector not in subspace")
        return x

    def __repr__(self):
        rows = ["[" + ", ".join(str(x) for x in row) + "]" for row in self.basis]
        return f"Subspace(dim={self.dim}, ambient={self.ambient_dim}, basis=[{', '.join(rows)}])"


class LieAlgebra:
    """Finite-dimensional real Lie algebra, immutable after construction."""

    def __init__(self, constants, names: Sequence[str] | None = None, field: Field = EXACT, check: bool = True):
        c = field.array(constants)
        if c.ndim != 3 or not (c.shape[0] == c.shape[1] == c.shape[2]):
            raise LieAlgebraError(f"structure constants must have shape (n, n, n), got {c.shape}")
        self.c = c
        self.field = field
        self.dim = c.shape[0]
        self.names = list(names) if names is not None else [f"e{i + 1}" for i in range(self.dim)]
        if len(self.names) != self.dim:
            raise LieAlgebraError("number of basis names does not match the dimension")
        if not field.all_zero(c + c.transpose(1, 0, 2)):
            raise LieAlgebraError("structure constants are not antisymmetric")
        if check:
            defect = self.jacobi_defect()
            if not field.is_zero(defect):
                raise LieAlgebraError(f"Jacobi identity fails (defect {defect})")

    # -- construction -------------------------------------------------
    @classmethod
    def from_brackets(cls, dim: int, brackets: Mapping[tuple[int, int], Mapping[int, object]],
                      names: Sequence[str] | None = None, field: Field = EXACT, check: bool = True) -> LieAlgebra:
        """Build from ``{(i, j): {k: coeff}}`` for ``[e_i, e_j]``; antisymmetry is filled in."""
        c = field.zeros((dim, dim, dim))
        for (i, j), out in brackets.items():
            for k, v in out.items():
                x = field.scalar(v)
                c[i, j, k] = x
                c[j, i, k] = -x
        return cls(c, names, field, check)

    @classmethod
    def from_matrices(cls, mats: Sequence[np.ndarray], names: Sequence[str] | None = None,
                      field: Field = EXACT) -> LieAlgebra:
        """Lie algebra spanned by matrices under the commutator."""
        mats = [field.array(m) for m in mats]
        flat = np.array([m.flatten() for m in mats], dtype=field.dtype)
        if rank(flat, field) != len(mats):
            raise LieAlgebraError("matrices are linearly dependent")
        n = len(mats)
        c = field.zeros((n, n, n))
        for i, j in combinations(range(n), 2):
            comm = (mats[i] @ mats[j] - mats[j] @ mats[i]).flatten()
            x = solve(flat.T, comm, field)
            if x is None:
                raise LieAlgebraError("matrix span is not closed under the commutator")
            c[i, j] = x
            c[j, i] = -x
        return cls(c, names, field)

    @classmethod
    def abelian(cls, n: int, field: Field = EXACT) -> LieAlgebra:
        return cls(field.zeros((n, n, n)), field=field)

    def change_basis(self, p, names: Sequence[str] | None = None) -> LieAlgebra:
        """Same algebra in the basis given by the columns of ``p``."""
        p = self.field.array(p)
        pinv = inverse(p, self.field)
        # [P_a, P_b] = sum_ij P_ia P_jb c_ij. ; then express in the new basis
        raw = contract("ia,jb,ijk->abk", p, p, self.c, field=self.field)
        c = contract("lk,abk->abl", pinv, raw, field=self.field)
        return LieAlgebra(c, names, self.field, check=False)

    def subalgebra(self, basis, names: Sequence[str] | None = None) -> LieAlgebra:
        """Structure constants of the subalgebra spanned by the rows of ``basis``."""
        b = self.field.array(basis).reshape(-1, self.dim)
        m = b.shape[0]
        c = self.field.zeros((m, m, m))
        for i, j in combinations(range(m), 2):
            x = solve(b.T, self.bracket(b[i], b[j]), self.field)
            if x is None:
                raise LieAlgebraError("span is not closed under the bracket")
            c[i, j] = x
            c[j, i] = -x
        return LieAlgebra(c, names, self.field, check=False)

    # -- basic operations ---------------------------------------------
    def vector(self, v) -> np.ndarray:
        v = self.field.array(v)
        if v.shape != (self.dim,):
            raise LieAlgebraError(f"vector of length {v.shape} does not match dimension {self.dim}")
        return v

    def basis_vector(self, i: int) -> np.ndarray:
        return self.field.eye(self.dim)[i]

    def bracket(self, x, y) -> np.ndarray:
        x, y = self.vector(x), self.vector(y)
        return contract("i,j,ijk->k", x, y, self.c, field=self.field)

    @cached_property
    def ad_basis(self) -> np.ndarray:
        """``ad_basis[i]`` is the matrix of ``ad(e_i)``."""
        return self.c.transpose(0, 2, 1).copy()

    def ad(self, x) -> np.ndarray:
        return contract("i,ikj->kj", self.vector(x), self.ad_basis, field=self.field)

    @cached_property
    def killing_form(self) -> np.ndarray:
        return contract("ilk,jkl->ij", self.c, self.c, field=self.field)

    @cached_property
    def trace_form(self) -> np.ndarray:
        """Vector of ``tr ad(e_i)``."""
        return contract("ikk->i", self.c, field=self.field)

    @cached_property
    def key(self) -> tuple:
        """Hashable structure constants; equal keys mean identical algebras in identical bases."""
        return (self.field, self.dim, tuple(self.c.flat))

    def jacobi_defect(self):
        return _jacobi_defect(self)

    def _jacobi_defect_uncached(self):
        t = contract("ijm,mkl->ijkl", self.c, self.c, field=self.field)
        cyc = t + np.transpose(t, (2, 0, 1, 3)) + np.transpose(t, (1, 2, 0, 3))
        return max_abs(cyc)

    def derivation_defect(self, a) -> object:
        """Max entry of ``A[x,y] - [Ax,y] - [x,Ay]`` over basis pairs."""
        a = self.field.array(a)
        lhs = contract("lk,ijk->ijl", a, self.c, field=self.field)
        t2 = contract("mi,mjl->ijl", a, self.c, field=self.field)
        t3 = contract("mj,iml->ijl", a, self.c, field=self.field)
        return max_abs(lhs - t2 - t3)

    def is_derivation(self, a) -> bool:
        return self.field.is_zero(self.derivation_defect(a))

    def bracket_span(self, v: Subspace, w: Subspace) -> Subspace:
        if v.dim == 0 or w.dim == 0:
            return Subspace.zero(self.dim, self.field)
        vecs = contract("ai,bj,ijk->abk", v.basis, w.basis, self.c, field=self.field)
        return Subspace(vecs.reshape(-1, self.dim), self.dim, self.field)

    @cached_property
    def whole(self) -> Subspace:
        return Subspace.full(self.dim, self.field)

    def derived(self) -> Subspace:
        return self.bracket_span(self.whole, self.whole)

    def center(self) -> Subspace:
        return centralizer(self, self.whole)

    def is_abelian(self) -> bool:
        return self.field.all_zero(self.c)

    def is_solvable(self) -> bool:
        return _series_terminates(self, self.whole, derived=True)

    def is_nilpotent(self) -> bool:
        return _series_terminates(self, self.whole, derived=False)

    def is_unimodular(self) -> bool:
        return self.field.all_zero(self.trace_form)

    def __repr__(self):
        return f"LieAlgebra(dim={self.dim}, names={self.names})"


def _series_terminates(L: LieAlgebra, v: Subspace, derived: bool) -> bool:
    """Derived series (``derived=True``) or lower central series of ``v`` reaches 0."""
    current = v
    while current.dim:
        nxt = L.bracket_span(current, current if derived else v)
        if nxt.dim == current.dim:
            return False
        current = nxt
    return True


def centralizer(L: LieAlgebra, v: Subspace, within: Subspace | None = None) -> Subspace:
    """``{x in within : [x, v] = 0}`` (``within`` defaults to the whole algebra)."""
    within = within if within is not None else L.whole
    if within.dim == 0:
        return within
    # x = t . within.basis ;  [x, v_j] = 0 for each basis vector of v
    rows = []
    for y in v.basis:
        rows.append(np.array([L.bracket(w, y) for w in within.basis], dtype=L.field.dtype).T)
    if not rows:
        return within
    t = nullspace(np.concatenate(rows), L.field)
    return Subspace(t @ within.basis if t.size else L.field.zeros((0, L.dim)), L.dim, L.field)


# -- spec-level operations ----------------------------------------------

def bracket(x, y, L: LieAlgebra) -> np.ndarray:
    return L.bracket(x, y)


def jacobi_defect(L: LieAlgebra):
    return L.jacobi_defect()


def killing_form(L: LieAlgebra) -> np.ndarray:
    return L.killing_form


def derivation_space(L: LieAlgebra) -> np.ndarray:
    """Basis of Der(L) as an array of shape (d, n, n)."""
    n, c, f = L.dim, L.c, L.field
    blocks = []
    for i, j in combinations(range(n), 2):
        r = f.zeros((n, n * n))
        for l in range(n):
            for k in range(n):
                r[l, l * n + k] += c[i, j, k]
            for m in range(n):
                r[l, m * n + i] -= c[m, j, l]
                r[l, m * n + j] -= c[i, m, l]
        blocks.append(r)
    if not blocks:
        return f.eye(n * n).reshape(n * n, n, n)
    system = np.concatenate(blocks)
    sol = nullspace(system, f)
    return sol.reshape(-1, n, n)


def solvable_radical(L: LieAlgebra) -> Subspace:
    """Killing-orthogonal complement of [L, L]."""
    L.field.require_exact("solvable_radical")
    d = L.derived()
    if d.dim == 0:
        return L.whole
    x = nullspace(d.basis @ L.killing_form, L.field)
    return Subspace(x, L.dim, L.field)


def _associative_closure(gens: list[np.ndarray], field: Field) -> np.ndarray:
    """Basis (as flattened rows) of the non-unital associative algebra generated by ``gens``."""
    n = gens[0].shape[0]
    basis = row_space(np.array([g.flatten() for g in gens], dtype=field.dtype), field)
    newest = basis
    while newest.shape[0]:
        prods = [(g @ b.reshape(n, n)).flatten() for g in gens for b in newest]
        candidate = row_space(np.concatenate([basis, np.array(prods, dtype=field.dtype)]), field)
        if candidate.shape[0] == basis.shape[0]:
            break
        added = [p for p in prods if not in_span(basis, p, field)]
        basis = candidate
        newest = np.array(added, dtype=field.dtype)
    return basis


# Families that vary only the metric rebuild the same algebra many times, so the
# two expensive structural computations are memoized on the exact constants.
_JACOBI_CACHE: dict[tuple, object] = {}
_NILRADICAL_CACHE: dict[tuple, np.ndarray] = {}
_CACHE_LIMIT = 4096


def _remember(cache: dict, key, value):
    if len(cache) >= _CACHE_LIMIT:
        cache.clear()
    cache[key] = value
    return value


def _jacobi_defect(L: LieAlgebra):
    hit = _JACOBI_CACHE.get(L.key)
    if hit is None:
        hit = _remember(_JACOBI_CACHE, L.key, L._jacobi_defect_uncached())
    return hit


def nilradical(L: LieAlgebra) -> Subspace:
    """Maximal nilpotent ideal (exact mode only)."""
    L.field.require_exact("nilradical")
    basis = _NILRADICAL_CACHE.get(L.key)
    if basis is None:
        basis = _remember(_NILRADICAL_CACHE, L.key, _nilradical(L).basis)
    return Subspace(basis.copy(), L.dim, L.field)


def _nilradical(L: LieAlgebra) -> Subspace:
    """Inside the radical, ``x`` is in the nilradical exactly when ``ad x`` is
    trace-orthogonal to the associative algebra generated by ``ad(rad)``,
    which is triangularizable, so trace-orthogonality means nilpotency.
    """
    rad = solvable_radical(L)
    if rad.dim == 0:
        return rad
    mats = [L.ad(r) for r in rad.basis]
    alg = _associative_closure(mats, L.field)
    if alg.shape[0] == 0:
        return rad
    n = L.dim
    m = np.array([[sum((mi @ b.reshape(n, n)).diagonal()) for mi in mats] for b in alg], dtype=object)
    t = nullspace(m, L.field)
    return Subspace(t @ rad.basis if t.size else L.field.zeros((0, n)), n, L.field)


def unimodular_kernel(L: LieAlgebra) -> Subspace:
    """Kernel of ``X -> tr ad X``."""
    t = L.trace_form.reshape(1, -1)
    return Subspace(nullspace(t, L.field), L.dim, L.field)


@dataclass(frozen=True)
class SubalgebraInfo:
    is_subalgebra: bool
    is_ideal: bool
    is_nilpotent: bool
    is_abelian: bool
    center: Subspace
    derived: Subspace
    bracket_closure: Subspace


def is_ideal(L: LieAlgebra, v: Subspace) -> bool:
    return L.bracket_span(L.whole, v).issubspace(v)


def is_subalgebra(L: LieAlgebra, v: Subspace) -> bool:
    return L.bracket_span(v, v).issubspace(v)


def subalgebra_queries(L: LieAlgebra, v: Subspace) -> SubalgebraInfo:
    """Closure flags for ``v``; ``center`` is the centralizer of ``v`` in ``v``."""
    if v.ambient_dim != L.dim:
        raise LieAlgebraError("subspace does not live in this algebra")
    derived = L.bracket_span(v, v)
    sub = derived.issubspace(v)
    return SubalgebraInfo(
        is_subalgebra=sub,
        is_ideal=sub and is_ideal(L, v),
        is_nilpotent=sub and _series_terminates(L, v, derived=False),
        is_abelian=derived.dim == 0,
        center=centralizer(L, v, within=v),
        derived=derived,
        bracket_closure=v + derived,
    )


def is_ad_nilpotent(L: LieAlgebra, x) -> bool:
    a = L.ad(x)
    p = a
    for _ in range(L.dim):
        p = p @ a
    return L.field.all_zero(p)


def direct_sum(l1: LieAlgebra, l2: LieAlgebra) -> LieAlgebra:
    if l1.field != l2.field:
        raise LieAlgebraError("summands live over different fields")
    n1, n2 = l1.dim, l2.dim
    c = l1.field.zeros((n1 + n2,) * 3)
    c[:n1, :n1, :n1] = l1.c
    c[n1:, n1:, n1:] = l2.c
    names = list(l1.names)
    for nm in l2.names:
        while nm in names:
            nm = nm + "'"
        names.append(nm)
    return LieAlgebra(c, names, l1.field, check=False)


def wang_gap_admissible(n: int, d: int) -> bool:
    """False exactly when no isometry group of an n-manifold can have dimension d."""
    if n < 1:
        raise ValueError("manifold dimension must be positive")
    if n == 4:
        return True
    return not (n * (n - 1) // 2 + 1 < d < n * (n + 1) // 2)
