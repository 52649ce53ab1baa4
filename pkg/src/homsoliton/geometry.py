"""Metric reductive decompositions and the curvature operators built from them.

Everything is expressed in (generally non-orthonormal) bases with Gram
matrices, so no square roots are taken: an operator ``A`` on a space with
Gram matrix ``G`` has metric transpose ``G^{-1} A^T G``, and sums over an
orthonormal frame become contractions with ``G^{-1}``.
"""

from __future__ import annotations

from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .algebra import LieAlgebra, Subspace, nilradical, is_ad_nilpotent, is_ideal
from .linalg import EXACT, Field, LinAlgError, contract, inverse, is_negative_definite, is_positive_definite, max_abs, rank

HALF = Fraction(1, 2)


class InvalidMRD(ValueError):
    """A decomposition violating one or more structural invariants."""

    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("invalid metric reductive decomposition: " + "; ".join(self.violations))


def _half(field: Field):
    return field.scalar(HALF) if field.exact else 0.5


def metric_transpose(a: np.ndarray, gram: np.ndarray, field: Field = EXACT) -> np.ndarray:
    """``G^{-1} A^T G``, the adjoint of ``A`` for the inner product with Gram matrix ``G``."""
    a, gram = field.array(a), field.array(gram)
    if a.shape != gram.shape:
        raise LinAlgError("operator and Gram matrix sizes differ")
    return inverse(gram, field) @ a.T @ gram


def symmetric_part(a: np.ndarray, gram: np.ndarray, field: Field = EXACT) -> np.ndarray:
    return _half(field) * (field.array(a) + metric_transpose(a, gram, field))


class ReductivePair:
    """Homogeneous metric data ``g = k + p`` with an inner product on ``p``.

    ``algebra`` is in adapted coordinates: its first ``nk`` basis vectors
    span ``k`` and the rest span ``p``; ``gram`` is the inner product on
    ``p`` in that basis.  Projections ``[X, Y]_p`` are coordinate truncations.
    """

    def __init__(self, algebra: LieAlgebra, nk: int, gram):
        self.algebra = algebra
        self.field = algebra.field
        self.nk = nk
        self.gram = self.field.array(gram)
        self.np = algebra.dim - nk
        if self.gram.shape != (self.np, self.np):
            raise LinAlgError(f"Gram matrix must be {self.np}x{self.np}")

    @cached_property
    def gram_inv(self) -> np.ndarray:
        return inverse(self.gram, self.field)

    @cached_property
    def _pp(self) -> np.ndarray:
        """``[e_a, e_b]_p``: p x p -> p block of the structure constants."""
        k = self.nk
        return self.algebra.c[k:, k:, k:]

    def violations(self) -> list[str]:
        out = []
        f, k, c = self.field, self.nk, self.algebra.c
        if not is_positive_definite(self.gram, f):
            out.append("gram not positive definite")
        if not f.all_zero(c[:k, :k, k:]):
            out.append("[k,k] not contained in k")
        if not f.all_zero(c[:k, k:, :k]):
            out.append("[k,p] not contained in p")
        for z in range(k):
            adz = self.algebra.ad_basis[z][k:, k:]
            if not f.all_zero(self.gram @ adz + adz.T @ self.gram):
                out.append(f"ad({self.algebra.names[z]}) is not skew-symmetric on p")
        return out

    def mean_curvature(self) -> np.ndarray:
        """``H in p`` with ``<H, X> = tr ad X`` for all ``X in p``."""
        t = self.algebra.trace_form
        if not self.field.all_zero(t[: self.nk]):
            raise ValueError("tr ad is nonzero on the isotropy algebra")
        return self.gram_inv @ t[self.nk:]

    def ad_p(self, x_p) -> np.ndarray:
        """Matrix of ``Y -> [X, Y]_p`` on ``p`` for ``X`` given in p-coordinates."""
        return contract("a,abu->ub", self.field.array(x_p), self._pp, field=self.field)

    def ricci_form(self) -> np.ndarray:
        """Ricci tensor on ``p`` as a symmetric bilinear form (matrix in the p basis)."""
        f = self.field
        if self.np == 0:
            return f.zeros((0, 0))
        g, gi, a = self.gram, self.gram_inv, self._pp
        half = _half(f)
        quarter = half * half
        # -1/2 sum_ab G^ab <[X,e_a]_p, [Y,e_b]_p>
        a1 = contract("xau,uv->xav", a, g, field=self.field)
        a2 = contract("ab,xav->xbv", gi, a1, field=self.field)
        t1 = contract("xbv,ybv->xy", a2, a, field=self.field)
        k = self.nk
        b = self.algebra.killing_form[k:, k:]
        # 1/4 sum G^ac G^bd <[e_a,e_b]_p, X> <[e_c,e_d]_p, Y>
        fm = contract("abu,ux->abx", a, g, field=self.field)
        u1 = contract("ac,abx->cbx", gi, fm, field=self.field)
        u2 = contract("bd,cbx->cdx", gi, u1, field=self.field)
        t3 = contract("cdx,cdy->xy", u2, fm, field=self.field)
        mh = self.ad_p(self.mean_curvature())
        kh = mh.T @ g
        return -half * t1 - half * b + quarter * t3 - half * (kh + kh.T)

    def ricci(self) -> np.ndarray:
        """Ricci operator on ``p`` (gram-symmetric)."""
        return self.gram_inv @ self.ricci_form()


class MetricReductiveDecomposition:
    """``g = k + h + n`` with ``n`` the nilradical and an inner product on ``p = h + n``.

    ``k``, ``h``, ``n`` are lists of basis indices or arrays of row vectors in
    the coordinates of ``algebra``; ``gram`` is the inner product on ``p`` in
    the declared basis (``h`` vectors first, then ``n``).  Internally the
    algebra is rewritten in the adapted basis ``(k, h, n)``.
    """

    def __init__(self, algebra: LieAlgebra, k, h, n, gram, names: Sequence[str] | None = None,
                 validate: bool = True):
        f = algebra.field
        self.source = algebra
        self.field = f
        self.k_basis, self.h_basis, self.n_basis = (self._rows(algebra, s) for s in (k, h, n))
        self.nk, self.nh, self.nn = (b.shape[0] for b in (self.k_basis, self.h_basis, self.n_basis))
        adapted = np.concatenate([self.k_basis, self.h_basis, self.n_basis])
        if adapted.shape[0] != algebra.dim or rank(adapted, f) != algebra.dim:
            raise InvalidMRD(["k, h, n do not form a direct sum decomposition of g"])
        if names is None:
            names = [self._name(algebra, v) for v in adapted]
        self.g = algebra.change_basis(adapted.T, names)
        self.gram = f.array(gram)
        if self.gram.shape != (self.nh + self.nn,) * 2:
            raise InvalidMRD([f"gram must be {(self.nh + self.nn,) * 2}, got {self.gram.shape}"])
        if validate:
            errs = self.violations()
            if errs:
                raise InvalidMRD(errs)

    @staticmethod
    def _rows(algebra: LieAlgebra, spec) -> np.ndarray:
        f = algebra.field
        arr = np.asarray(spec, dtype=object)
        if arr.size == 0:
            return f.zeros((0, algebra.dim))
        if arr.ndim == 1:
            return f.eye(algebra.dim)[[int(i) for i in arr]]
        return f.array(arr).reshape(-1, algebra.dim)

    @staticmethod
    def _name(algebra: LieAlgebra, v) -> str:
        nz = [i for i, x in enumerate(v) if x != 0]
        if len(nz) == 1 and v[nz[0]] == 1:
            return algebra.names[nz[0]]
        return "+".join(f"{x}*{algebra.names[i]}" for i, x in zip(nz, (v[i] for i in nz)))

    # -- index blocks in adapted coordinates ---------------------------
    @property
    def K(self) -> slice:
        return slice(0, self.nk)

    @property
    def H(self) -> slice:
        return slice(self.nk, self.nk + self.nh)

    @property
    def N(self) -> slice:
        return slice(self.nk + self.nh, self.g.dim)

    @property
    def P(self) -> slice:
        return slice(self.nk, self.g.dim)

    @property
    def dim(self) -> int:
        return self.g.dim

    @property
    def gram_h(self) -> np.ndarray:
        return self.gram[: self.nh, : self.nh]

    @property
    def gram_n(self) -> np.ndarray:
        return self.gram[self.nh:, self.nh:]

    def subspace(self, which: str) -> Subspace:
        idx = {"k": self.K, "h": self.H, "n": self.N, "p": self.P, "u": slice(0, self.nk + self.nh)}[which]
        return Subspace.coordinate(range(self.g.dim)[idx], self.g.dim, self.field)

    @cached_property
    def theta(self) -> np.ndarray:
        """``theta[i] = ad(e_i)|_n`` for the basis of ``u = k + h`` (shape (nk+nh, nn, nn))."""
        n = self.N
        return np.array([self.g.ad_basis[i][n, n] for i in range(self.nk + self.nh)], dtype=self.field.dtype
                        ).reshape(self.nk + self.nh, self.nn, self.nn)

    @property
    def theta_h(self) -> np.ndarray:
        return self.theta[self.nk:]

    # -- derived metric data -------------------------------------------
    def full_pair(self) -> ReductivePair:
        return ReductivePair(self.g, self.nk, self.gram)

    def u_is_subalgebra(self) -> bool:
        u = self.nk + self.nh
        return self.field.all_zero(self.g.c[:u, :u, u:])

    def u_algebra(self) -> LieAlgebra:
        if not self.u_is_subalgebra():
            raise ValueError("[h,h] is not contained in k+h, so u is not a subalgebra")
        u = self.nk + self.nh
        return LieAlgebra(self.g.c[:u, :u, :u], self.g.names[:u], self.field, check=False)

    def u_pair(self) -> ReductivePair:
        return ReductivePair(self.u_algebra(), self.nk, self.gram_h)

    def n_algebra(self) -> LieAlgebra:
        n = self.N
        return LieAlgebra(self.g.c[n, n, n], self.g.names[n], self.field, check=False)

    def n_pair(self) -> ReductivePair:
        return ReductivePair(self.n_algebra(), 0, self.gram_n)

    def extended_gram(self) -> np.ndarray:
        """Inner product on all of ``g``: ``-B`` on ``k``, the metric on ``p``, ``k`` orthogonal to ``p``."""
        f = self.field
        out = f.zeros((self.dim, self.dim))
        out[self.K, self.K] = -self.g.killing_form[self.K, self.K]
        out[self.P, self.P] = self.gram
        return out

    def scaled(self, s) -> MetricReductiveDecomposition:
        """Same decomposition with the metric on ``p`` multiplied by ``s``."""
        return MetricReductiveDecomposition(self.source, self.k_basis, self.h_basis, self.n_basis,
                                            self.field.scalar(s) * self.gram, self.g.names)

    def violations(self) -> list[str]:
        out = []
        f, c, g = self.field, self.g.c, self.g
        K, H, N = self.K, self.H, self.N
        nk, nh = self.nk, self.nh
        if not f.all_zero(self.gram - self.gram.T) or not is_positive_definite(self.gram, f):
            out.append("gram not positive definite")
        if not f.all_zero(self.gram[:nh, nh:]):
            out.append("h and n are not orthogonal")
        if not f.all_zero(c[K, K, nk:]):
            out.append("[k,k] not contained in k")
        not_h = [i for i in range(self.dim) if not (nk <= i < nk + nh)]
        if not f.all_zero(c[K, H][:, :, not_h]):
            out.append("[k,h] not contained in h")
        if not f.all_zero(c[:, N, : nk + nh]):
            out.append("[g,n] not contained in n")
        b = g.killing_form
        if not f.all_zero(b[K, nk:]):
            out.append("k and p are not Killing-orthogonal")
        if nk and not is_negative_definite(b[K, K], f):
            out.append("Killing form is not negative definite on k")
        for z in range(nk):
            adz = g.ad_basis[z][nk:, nk:]
            if not f.all_zero(self.gram @ adz + adz.T @ self.gram):
                out.append(f"ad({g.names[z]}) is not skew-symmetric on p")
        out.extend(self._nilradical_violations())
        return out

    def _nilradical_violations(self) -> list[str]:
        g, f = self.g, self.field
        declared = self.subspace("n")
        if f.exact:
            nil = nilradical(g)
            if nil != declared:
                src = nil.basis @ np.concatenate([self.k_basis, self.h_basis, self.n_basis])
                shown = ", ".join("(" + ", ".join(str(x) for x in v) + ")" for v in src)
                return [f"n is not the nilradical; computed nilradical is span{{{shown}}}"]
            return []
        # float mode cannot decide maximality; check the declared space is a nilpotent ideal
        if not is_ideal(g, declared) or not all(is_ad_nilpotent(g, v) for v in declared.basis):
            return ["n is not an ideal of ad-nilpotent elements"]
        return []

    def __repr__(self):
        return f"MRD(dim g={self.dim}, k={self.nk}, h={self.nh}, n={self.nn})"


# -- operations -------------------------------------------------------

def _pair(obj, on: str = "full_p") -> ReductivePair:
    if isinstance(obj, ReductivePair):
        return obj
    if on == "full_p":
        return obj.full_pair()
    if on == "u_part":
        return obj.u_pair()
    if on == "n_part":
        return obj.n_pair()
    raise ValueError(f"unknown part {on!r}; expected full_p, u_part or n_part")


def ricci_operator(mrd, on: str = "full_p") -> np.ndarray:
    """Ricci operator of the full space, of ``U/K``, or of the metric nilradical."""
    return _pair(mrd, on).ricci()


def mean_curvature(mrd) -> np.ndarray:
    """``H`` in p-coordinates (``h`` block then ``n`` block)."""
    return _pair(mrd).mean_curvature()


def contract_theta(theta_h: np.ndarray, gram_h: np.ndarray, gram_n: np.ndarray, field: Field = EXACT):
    """Frame-free sums ``sum_i th(Y_i) th(Y_i)^t`` style terms for an orthonormal basis of ``h``.

    Returns ``(defect, norm2)`` with ``defect = sum [th_i, th_i^t]`` and
    ``norm2 = sum tr th_i th_i^t``.
    """
    nn = gram_n.shape[0]
    ghi = inverse(gram_h, field) if gram_h.shape[0] else field.zeros((0, 0))
    gni = inverse(gram_n, field) if nn else field.zeros((0, 0))
    tt = np.array([gni @ t.T @ gram_n for t in theta_h], dtype=field.dtype).reshape(theta_h.shape)
    defect = field.zeros((nn, nn))
    norm2 = field.scalar(0)
    for a in range(theta_h.shape[0]):
        for b in range(theta_h.shape[0]):
            w = ghi[a, b]
            if field.is_zero(w):
                continue
            defect = defect + w * (theta_h[a] @ tt[b] - tt[b] @ theta_h[a])
            norm2 = norm2 + w * sum((theta_h[a] @ tt[b]).diagonal())
    return defect, norm2


def c_theta(mrd: MetricReductiveDecomposition) -> np.ndarray:
    """Operator on ``h`` with ``<C Y, Y> = tr S(ad Y|_n)^2``."""
    f = mrd.field
    gn = mrd.gram_n
    sym = [symmetric_part(t, gn, f) for t in mrd.theta_h]
    nh = mrd.nh
    form = f.zeros((nh, nh))
    for i in range(nh):
        for j in range(nh):
            form[i, j] = sum((sym[i] @ sym[j]).diagonal()) if mrd.nn else f.scalar(0)
    return inverse(mrd.gram_h, f) @ form if nh else form


def compatibility_defect(mrd: MetricReductiveDecomposition) -> np.ndarray:
    """``sum [ad Y_i|_n, (ad Y_i|_n)^t]`` over an orthonormal basis of ``h``."""
    return contract_theta(mrd.theta_h, mrd.gram_h, mrd.gram_n, mrd.field)[0]


def moment_map(theta_h: np.ndarray, gram_h: np.ndarray, gram_n: np.ndarray, field: Field = EXACT) -> np.ndarray:
    """Normalized compatibility defect; undefined for the zero representation."""
    theta_h, gram_h, gram_n = field.array(theta_h), field.array(gram_h), field.array(gram_n)
    defect, norm2 = contract_theta(theta_h, gram_h, gram_n, field)
    if field.is_zero(norm2):
        raise ValueError("moment map undefined: theta is zero")
    return defect / norm2


def mrd_moment_map(mrd: MetricReductiveDecomposition) -> np.ndarray:
    return moment_map(mrd.theta_h, mrd.gram_h, mrd.gram_n, mrd.field)


def theta_homomorphism_defect(mrd: MetricReductiveDecomposition):
    """Max entry of ``theta([X,Y]) - [theta X, theta Y]`` over basis pairs of ``u``."""
    g, f = mrd.g, mrd.field
    nu = mrd.nk + mrd.nh
    n = mrd.N
    worst = f.scalar(0)
    for i in range(nu):
        for j in range(nu):
            lhs = g.ad(g.c[i, j])[n, n]
            rhs = mrd.theta[i] @ mrd.theta[j] - mrd.theta[j] @ mrd.theta[i]
            worst = max(worst, max_abs(lhs - rhs))
    return worst


def theta_derivation_defect(mrd: MetricReductiveDecomposition):
    """Max derivation defect of ``theta(Y)`` on ``n`` over the basis of ``u``."""
    na = mrd.n_algebra()
    return max((na.derivation_defect(t) for t in mrd.theta), default=mrd.field.scalar(0))


def is_gram_symmetric(a: np.ndarray, gram: np.ndarray, field: Field = EXACT) -> bool:
    return field.all_zero(metric_transpose(a, gram, field) - field.array(a))
