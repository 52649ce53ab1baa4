"""Dense linear algebra over an exact or tolerance-based scalar field.

Matrices are numpy arrays. In exact mode the dtype is ``object`` and every
entry is a :class:`fractions.Fraction`; in float mode the dtype is ``float64``
and zero tests use the field tolerance.  All routines return fresh arrays and
never mutate their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational, Real

import numpy as np

DEFAULT_FLOAT_TOL = 1e-9


class LinAlgError(ValueError):
    """Raised for singular systems, shape mismatches and refused float decisions."""


@dataclass(frozen=True)
class Field:
    """Scalar field: exact rationals when ``tol == 0``, floats otherwise."""

    tol: float = 0.0

    @property
    def exact(self) -> bool:
        return self.tol == 0

    @property
    def dtype(self):
        return object if self.exact else np.float64

    def scalar(self, x) -> Fraction | float:
        if self.exact:
            if isinstance(x, Fraction):
                return x
            if isinstance(x, (int, np.integer)):
                return Fraction(int(x))
            if isinstance(x, Rational):
                return Fraction(x.numerator, x.denominator)
            if isinstance(x, str):
                return Fraction(x.strip())
            if isinstance(x, (float, np.floating)):
                raise LinAlgError(f"float value {x!r} not allowed in exact mode")
            raise LinAlgError(f"cannot convert {x!r} to an exact scalar")
        if isinstance(x, str):
            return float(Fraction(x.strip())) if "/" in x else float(x)
        if isinstance(x, Real):
            return float(x)
        raise LinAlgError(f"cannot convert {x!r} to a float scalar")

    def array(self, data) -> np.ndarray:
        arr = np.asarray(data, dtype=object)
        out = np.empty(arr.shape, dtype=object)
        for idx, x in np.ndenumerate(arr):
            out[idx] = self.scalar(x)
        return out if self.exact else out.astype(np.float64)

    def zeros(self, shape) -> np.ndarray:
        if self.exact:
            out = np.empty(shape, dtype=object)
            out.fill(Fraction(0))
            return out
        return np.zeros(shape)

    def eye(self, n: int) -> np.ndarray:
        out = self.zeros((n, n))
        for i in range(n):
            out[i, i] = self.scalar(1)
        return out

    def is_zero(self, x) -> bool:
        return abs(x) <= self.tol

    def all_zero(self, a) -> bool:
        a = np.asarray(a)
        return a.size == 0 or bool(max_abs(a) <= self.tol)

    def require_exact(self, what: str) -> None:
        if not self.exact:
            raise LinAlgError(f"{what} requires exact mode (rank decisions must be exact)")


EXACT = Field()


def max_abs(a) -> Fraction | float:
    a = np.asarray(a)
    if a.size == 0:
        return Fraction(0) if a.dtype == object else 0.0
    return max(abs(x) for x in a.flat)


def rref(m: np.ndarray, field: Field = EXACT) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form and pivot columns.

    The canonical form does not depend on the pivot-row choice, so float mode
    uses partial pivoting while exact mode takes the first nonzero row.
    """
    a = field.array(m)
    if a.ndim != 2:
        raise LinAlgError("rref expects a 2-d array")
    nrows, ncols = a.shape
    pivots: list[int] = []
    r = 0
    for col in range(ncols):
        if r == nrows:
            break
        column = a[r:, col]
        if field.exact:
            nz = [i for i, x in enumerate(column) if x != 0]
            if not nz:
                continue
            p = r + nz[0]
        else:
            p = r + int(np.argmax(np.abs(column)))
            if abs(a[p, col]) <= field.tol:
                a[r:, col] = 0.0
                continue
        if p != r:
            a[[r, p]] = a[[p, r]]
        a[r] = a[r] / a[r, col]
        factors = a[:, col].copy()
        factors[r] = 0
        rows = [i for i in range(nrows) if not field.is_zero(factors[i])]
        if rows:
            a[rows] = a[rows] - np.outer(factors[rows], a[r]).astype(a.dtype)
        if not field.exact:
            a[:, col] = 0.0
            a[r, col] = 1.0
        pivots.append(col)
        r += 1
    if not field.exact:
        a[np.abs(a) <= field.tol] = 0.0
    return a[:r] if r else a[:0], pivots


def rank(m: np.ndarray, field: Field = EXACT) -> int:
    m = np.asarray(m)
    if m.size == 0:
        return 0
    return len(rref(m, field)[1])


def nullspace(m: np.ndarray, field: Field = EXACT, ncols: int | None = None) -> np.ndarray:
    """Basis of ``{x : m @ x = 0}`` as the rows of the returned array."""
    m = np.asarray(m)
    if m.size == 0:
        n = m.shape[1] if m.ndim == 2 and m.shape[1] else (ncols or 0)
        return field.eye(n)
    n = m.shape[1]
    r, pivots = rref(m, field)
    free = [j for j in range(n) if j not in pivots]
    basis = field.zeros((len(free), n))
    for b, j in enumerate(free):
        basis[b, j] = field.scalar(1)
        for row, pc in enumerate(pivots):
            basis[b, pc] = -r[row, j]
    return basis


def solve(a: np.ndarray, b: np.ndarray, field: Field = EXACT) -> np.ndarray | None:
    """One solution of ``a @ x = b`` (free variables set to 0), or None."""
    a = np.asarray(a)
    b = np.asarray(b)
    vec = b.ndim == 1
    bb = b.reshape(-1, 1) if vec else b
    n = a.shape[1]
    aug = np.concatenate([field.array(a), field.array(bb)], axis=1)
    r, pivots = rref(aug, field)
    if any(p >= n for p in pivots):
        return None
    x = field.zeros((n, bb.shape[1]))
    for row, pc in enumerate(pivots):
        x[pc] = r[row, n:]
    return x[:, 0] if vec else x


def inverse(a: np.ndarray, field: Field = EXACT) -> np.ndarray:
    a = np.asarray(a)
    n = a.shape[0]
    if a.shape != (n, n):
        raise LinAlgError("inverse of a non-square matrix")
    if n == 0:
        return field.zeros((0, 0))
    r, pivots = rref(np.concatenate([field.array(a), field.eye(n)], axis=1), field)
    if pivots[:n] != list(range(n)):
        raise LinAlgError("matrix is singular")
    return r[:, n:]


def is_positive_definite(g: np.ndarray, field: Field = EXACT) -> bool:
    """Symmetric positive definiteness via symmetric Gaussian elimination."""
    g = field.array(g)
    n = g.shape[0]
    if g.shape != (n, n) or not field.all_zero(g - g.T):
        return False
    for i in range(n):
        piv = g[i, i]
        if piv <= field.tol:
            return False
        if i + 1 < n:
            g[i + 1:, i + 1:] = g[i + 1:, i + 1:] - np.outer(g[i + 1:, i], g[i, i + 1:]).astype(g.dtype) / piv
    return True


def is_negative_definite(g: np.ndarray, field: Field = EXACT) -> bool:
    return is_positive_definite(-np.asarray(g), field)


def inertia(g: np.ndarray, field: Field = EXACT) -> tuple[int, int, int]:
    """(positive, negative, zero) counts of a symmetric matrix, via congruence."""
    g = field.array(g)
    n = g.shape[0]
    pos = neg = 0
    active = list(range(n))
    while active:
        diag = [i for i in active if not field.is_zero(g[i, i])]
        if diag:
            i = diag[0]
        else:
            pair = next(((i, j) for i in active for j in active if i < j and not field.is_zero(g[i, j])), None)
            if pair is None:
                break
            i, j = pair
            # x_i -> x_i + x_j creates a nonzero diagonal entry
            g[i] = g[i] + g[j]
            g[:, i] = g[:, i] + g[:, j]
        piv = g[i, i]
        if piv > 0:
            pos += 1
        else:
            neg += 1
        rest = [j for j in active if j != i]
        if rest:
            col = g[rest, i]
            g[np.ix_(rest, rest)] = g[np.ix_(rest, rest)] - np.outer(col, col).astype(g.dtype) / piv
        active = rest
    return pos, neg, n - pos - neg


def row_space(vectors, field: Field = EXACT, ambient: int | None = None) -> np.ndarray:
    """Canonical (reduced echelon) basis of the span of ``vectors``, as rows."""
    v = np.asarray(vectors)
    if v.size == 0:
        return field.zeros((0, ambient if ambient is not None else (v.shape[-1] if v.ndim == 2 else 0)))
    r, _ = rref(v, field)
    return r


def in_span(basis: np.ndarray, vec: np.ndarray, field: Field = EXACT) -> bool:
    basis = np.asarray(basis)
    if basis.size == 0:
        return field.all_zero(vec)
    return solve(basis.T, vec, field) is not None


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def block_diag(*blocks: np.ndarray, field: Field = EXACT) -> np.ndarray:
    n = sum(b.shape[0] for b in blocks)
    out = field.zeros((n, n))
    i = 0
    for b in blocks:
        k = b.shape[0]
        out[i:i + k, i:i + k] = b
        i += k
    return out


def trace(a: np.ndarray, field: Field = EXACT):
    if a.shape[0] == 0:
        return field.scalar(0)
    return sum(a[i, i] for i in range(a.shape[0]))


def _sparse_operand(sub: str, a: np.ndarray) -> tuple[str, list[tuple[tuple[int, ...], object]]]:
    """Nonzero entries of ``a`` with repeated subscripts resolved to the diagonal."""
    uniq = "".join(dict.fromkeys(sub))
    first = [sub.index(ch) for ch in uniq]
    a = np.asarray(a)
    nz = np.argwhere(a != 0) if a.size else np.zeros((0, a.ndim), dtype=int)
    repeated = len(uniq) != len(sub)
    entries = []
    for idx in map(tuple, nz.tolist()):
        if repeated and not all(idx[i] == idx[sub.index(ch)] for i, ch in enumerate(sub)):
            continue
        entries.append((tuple(idx[i] for i in first), a[idx]))
    return uniq, entries


def contract(spec: str, *ops: np.ndarray, field: Field = EXACT) -> np.ndarray:
    """``np.einsum`` that, in exact mode, only multiplies nonzero entries.

    Structure-constant tensors are sparse, and Fraction arithmetic dominates
    the cost of dense contraction.
    """
    if not field.exact:
        return np.einsum(spec, *ops)
    ins, out = spec.replace(" ", "").split("->")
    subs = ins.split(",")
    if len(subs) != len(ops):
        raise LinAlgError("subscript count does not match operand count")
    sizes: dict[str, int] = {}
    for sub, op in zip(subs, ops):
        if len(sub) != op.ndim:
            raise LinAlgError(f"operand of shape {op.shape} does not match subscripts {sub!r}")
        sizes.update(zip(sub, op.shape))
    sparse = [_sparse_operand(sub, op) for sub, op in zip(subs, ops)]
    letters, entries = sparse[0]
    acc: dict[tuple, object] = dict(entries)
    for k in range(1, len(sparse)):
        sub, ops_k = sparse[k]
        later = set(out).union(*subs[k + 1:])
        shared = [ch for ch in sub if ch in letters]
        merged = letters + "".join(ch for ch in sub if ch not in letters)
        keep = "".join(ch for ch in merged if ch in later)
        pos_a = [letters.index(ch) for ch in shared]
        pos_b = [sub.index(ch) for ch in shared]
        extra = [sub.index(ch) for ch in merged[len(letters):]]
        pick = [merged.index(ch) for ch in keep]
        groups: dict[tuple, list] = {}
        for idx, x in ops_k:
            groups.setdefault(tuple(idx[p] for p in pos_b), []).append((tuple(idx[p] for p in extra), x))
        nxt: dict[tuple, object] = {}
        for ia, xa in acc.items():
            for ib, xb in groups.get(tuple(ia[p] for p in pos_a), ()):
                full = ia + ib
                key = tuple(full[p] for p in pick)
                v = xa * xb
                nxt[key] = nxt[key] + v if key in nxt else v
        acc, letters = nxt, keep
    result = field.zeros(tuple(sizes[ch] for ch in out))
    perm = [letters.index(ch) for ch in out]
    for idx, x in acc.items():
        key = tuple(idx[p] for p in perm)
        result[key] = result[key] + x
    return result
