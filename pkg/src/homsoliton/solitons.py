"""Soliton certification and the obstruction checks built on it."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from itertools import product
from typing import Mapping, Sequence

import numpy as np

from .algebra import LieAlgebra, Subspace, derivation_space, direct_sum
from .geometry import (
    MetricReductiveDecomposition,
    ReductivePair,
    c_theta,
    compatibility_defect,
    metric_transpose,
    mrd_moment_map,
)
from .linalg import (
    EXACT, Field, block_diag, contract, is_negative_definite, is_positive_definite, max_abs,
    rank, solve, trace,
)

EINSTEIN = "einstein"
ALGEBRAIC_SOLITON = "algebraic_soliton"
SOLVSOLITON = "solvsoliton"
NILSOLITON = "nilsoliton"
NOT_SOLITON = "not_soliton"
VERDICTS = (EINSTEIN, ALGEBRAIC_SOLITON, SOLVSOLITON, NILSOLITON, NOT_SOLITON)


class FlatFactorError(ValueError):
    """A product check was given a Ricci-flat factor."""


def sign_class(c) -> str | None:
    if c is None:
        return None
    if c < 0:
        return "expanding"
    return "steady" if c == 0 else "shrinking"


@dataclass(frozen=True)
class SolitonCertificate:
    verdict: str
    c: object = None
    D: np.ndarray | None = None
    D1: np.ndarray | None = None
    residuals: Mapping[str, object] = dc_field(default_factory=dict)
    trivial: bool = False
    reasons: tuple[str, ...] = ()

    @property
    def sign_class(self) -> str | None:
        return sign_class(self.c)

    @property
    def is_soliton(self) -> bool:
        return self.verdict != NOT_SOLITON

    @property
    def expanding(self) -> bool:
        return self.c is not None and self.c < 0


@dataclass(frozen=True)
class CartanSplit:
    """``h = h_minus + h_plus``, both given as row vectors in h-coordinates."""

    h_minus: np.ndarray
    h_plus: np.ndarray


def _zero_scalar(f: Field):
    return f.scalar(0)


def _is_reductive(u: LieAlgebra) -> bool:
    # u = z(u) + [u,u] with [u,u] semisimple; only rank decisions, so float mode works too
    z, d = u.center(), u.derived()
    if z.dim + d.dim != u.dim or (z + d).dim != u.dim:
        return False
    return d.dim == 0 or rank(d.basis @ u.killing_form @ d.basis.T, u.field) == d.dim


# -- certificate for an MRD ------------------------------------------

def _feasible_constant(ric: np.ndarray, der: np.ndarray, f: Field):
    """``(c, coefficients)`` with ``ric = c I + sum t_i der[i]``, or None.

    Returns ``c = 0`` when the identity is itself a derivation (abelian case),
    where ``c`` is otherwise undetermined.
    """
    n = ric.shape[0]
    ident = f.eye(n)
    cols = [ident.flatten()] + [d.flatten() for d in der]
    a = np.array(cols, dtype=f.dtype).T
    sol = solve(a, ric.flatten(), f)
    if sol is None:
        return None
    identity_is_derivation = der.shape[0] and solve(np.array([d.flatten() for d in der], dtype=f.dtype).T,
                                                    ident.flatten(), f) is not None
    if identity_is_derivation:
        if solve(np.array([d.flatten() for d in der], dtype=f.dtype).T, ric.flatten(), f) is None:
            return None
        return f.scalar(0)
    return sol[0]


def check_algebraic_soliton(mrd: MetricReductiveDecomposition) -> SolitonCertificate:
    """Run the four algebraic conditions and assemble the soliton derivation."""
    f = mrd.field
    if mrd.nh == 0 and mrd.nn == 0:
        raise ValueError("empty problem: h and n are both zero")
    res: dict[str, object] = {}
    reasons: list[str] = []
    g = mrd.g
    # reductive subalgebra u
    res["u_subalgebra"] = max_abs(g.c[: mrd.nk + mrd.nh, : mrd.nk + mrd.nh, mrd.N])
    if not f.is_zero(res["u_subalgebra"]):
        return SolitonCertificate(NOT_SOLITON, residuals=res, reasons=("[h,h] has a component in n",))
    u = mrd.u_algebra()
    reductive = _is_reductive(u)
    res["u_reductive"] = _zero_scalar(f) if reductive else f.scalar(1)
    if not reductive:
        return SolitonCertificate(NOT_SOLITON, residuals=res, reasons=("u is not reductive",))

    ric_n = mrd.n_pair().ricci() if mrd.nn else f.zeros((0, 0))
    na = mrd.n_algebra()
    if mrd.nh:
        m = mrd.u_pair().ricci() - c_theta(mrd)
        c = trace(m, f) / mrd.nh
        res["ricci_u"] = max_abs(m - c * f.eye(mrd.nh))
        if not f.is_zero(res["ricci_u"]):
            reasons.append("ric_u - C_theta is not a multiple of the identity")
    else:
        c = _feasible_constant(ric_n, derivation_space(na), f)
        res["ricci_u"] = _zero_scalar(f)
        if c is None:
            res["nilsoliton_n"] = f.scalar(1)
            return SolitonCertificate(NOT_SOLITON, residuals=res,
                                      reasons=("ric_n - cI is not a derivation for any c",))

    d1 = ric_n - c * f.eye(mrd.nn)
    res["nilsoliton_n"] = na.derivation_defect(d1) if mrd.nn else _zero_scalar(f)
    if not f.is_zero(res["nilsoliton_n"]):
        reasons.append("ric_n - cI is not a derivation of n")
    res["compatibility"] = max_abs(compatibility_defect(mrd))
    if not f.is_zero(res["compatibility"]):
        reasons.append("sum of [theta, theta^t] over h is nonzero")
    if reasons:
        return SolitonCertificate(NOT_SOLITON, c=c, D1=d1, residuals=res, reasons=tuple(reasons))

    d = _assemble_derivation(mrd, c, d1)
    res["derivation"] = g.derivation_defect(d)
    res["image_in_n"] = max_abs(d[: mrd.nk + mrd.nh, :])
    res["zero_on_k"] = max_abs(d[:, mrd.K])
    d_p = d[mrd.P, mrd.P]
    full = mrd.full_pair().ricci()
    res["ricci_full"] = max_abs(full - c * f.eye(mrd.dim - mrd.nk) - d_p)
    bad = [k for k in ("derivation", "image_in_n", "zero_on_k", "ricci_full") if not f.is_zero(res[k])]
    if bad:
        # conditions hold but the assembled data is inconsistent: never expected
        return SolitonCertificate(NOT_SOLITON, c=c, D=d, D1=d1, residuals=res,
                                  reasons=tuple(f"assembled derivation check failed: {k}" for k in bad))
    verdict = EINSTEIN if f.all_zero(d_p) else ALGEBRAIC_SOLITON
    trivial = f.all_zero(mrd.theta_h) and f.all_zero(ric_n)
    return SolitonCertificate(verdict, c=c, D=d, D1=d1, residuals=res, trivial=bool(trivial))


def _ad_h_full(mrd: MetricReductiveDecomposition) -> np.ndarray:
    f = mrd.field
    h = mrd.full_pair().mean_curvature()
    vec = np.concatenate([f.zeros(mrd.nk), h])
    return mrd.g.ad(vec)


def _assemble_derivation(mrd: MetricReductiveDecomposition, c, d1) -> np.ndarray:
    f = mrd.field
    a = _ad_h_full(mrd)
    sym = (a + metric_transpose(a, mrd.extended_gram(), f)) * (f.scalar(Fraction(1, 2)) if f.exact else 0.5)
    d = -sym
    d[mrd.N, mrd.N] = d[mrd.N, mrd.N] + f.array(d1)
    return d


def soliton_derivation(mrd: MetricReductiveDecomposition, c, d1) -> np.ndarray:
    """``-S(ad H) + (0, 0, D1)`` on ``g``; raises when it is not a derivation with image in ``n``."""
    f = mrd.field
    d = _assemble_derivation(mrd, f.scalar(c), d1)
    defect = mrd.g.derivation_defect(d)
    if not f.is_zero(defect):
        raise ValueError(f"assembled endomorphism is not a derivation (defect {defect})")
    if not f.all_zero(d[: mrd.nk + mrd.nh, :]):
        raise ValueError("assembled derivation does not take values in n")
    return d


# -- left-invariant metrics on solvable and nilpotent groups ------------

def _metric_algebra(obj, gram=None) -> ReductivePair:
    if isinstance(obj, MetricReductiveDecomposition):
        if obj.nk:
            raise ValueError("isotropy must be trivial for a left-invariant metric")
        return obj.full_pair()
    if isinstance(obj, ReductivePair):
        if obj.nk:
            raise ValueError("isotropy must be trivial for a left-invariant metric")
        return obj
    if isinstance(obj, LieAlgebra):
        if gram is None:
            gram = obj.field.eye(obj.dim)
        return ReductivePair(obj, 0, gram)
    raise TypeError(f"cannot interpret {type(obj).__name__} as a metric Lie algebra")


def _left_invariant_certificate(pair: ReductivePair, tag: str) -> SolitonCertificate:
    f = pair.field
    alg = pair.algebra
    ric = pair.ricci()
    der = derivation_space(alg)
    c = _feasible_constant(ric, der, f)
    if c is None:
        return SolitonCertificate(NOT_SOLITON, residuals={"feasibility": f.scalar(1) if f.exact else 1.0},
                                  reasons=("Ric - cI is not a derivation for any c",))
    d = ric - c * f.eye(alg.dim)
    res = {"derivation": alg.derivation_defect(d), "ricci_full": max_abs(ric - c * f.eye(alg.dim) - d)}
    verdict = EINSTEIN if f.all_zero(d) else tag
    return SolitonCertificate(verdict, c=c, D=d, residuals=res, trivial=bool(f.all_zero(ric)))


def check_solvsoliton(obj, gram=None) -> SolitonCertificate:
    """Decide ``Ric = cI + D`` with ``D`` a derivation, for a metric solvable Lie algebra."""
    pair = _metric_algebra(obj, gram)
    if not pair.algebra.is_solvable():
        raise ValueError("input algebra is not solvable")
    return _left_invariant_certificate(pair, SOLVSOLITON)


def check_nilsoliton(obj, gram=None) -> SolitonCertificate:
    pair = _metric_algebra(obj, gram)
    if not pair.algebra.is_nilpotent():
        raise ValueError("input algebra is not nilpotent")
    return _left_invariant_certificate(pair, NILSOLITON)


# -- products ------------------------------------------------------------

def direct_sum_mrd(m1: MetricReductiveDecomposition, m2: MetricReductiveDecomposition) -> MetricReductiveDecomposition:
    """Orthogonal product of two decompositions."""
    g = direct_sum(m1.g, m2.g)
    d1 = m1.dim
    off = lambda m, base, s: [base + i for i in range(m.dim)[s]]
    k = off(m1, 0, m1.K) + off(m2, d1, m2.K)
    h = off(m1, 0, m1.H) + off(m2, d1, m2.H)
    n = off(m1, 0, m1.N) + off(m2, d1, m2.N)
    gram = block_diag(m1.gram_h, m2.gram_h, m1.gram_n, m2.gram_n, field=m1.field)
    return MetricReductiveDecomposition(g, k, h, n, gram)


def product_soliton_check(m1: MetricReductiveDecomposition, m2: MetricReductiveDecomposition) -> SolitonCertificate:
    """Certificate of the product of two non-flat Einstein factors."""
    for i, m in enumerate((m1, m2), 1):
        if m.field.all_zero(m.full_pair().ricci()):
            raise FlatFactorError(f"factor {i} is Ricci-flat; use trivial_product_soliton")
        cert = check_algebraic_soliton(m)
        if cert.verdict != EINSTEIN:
            raise ValueError(f"factor {i} is not certified Einstein (verdict {cert.verdict})")
    return check_algebraic_soliton(direct_sum_mrd(m1, m2))


def euclidean_factor(dim: int, field: Field = EXACT) -> MetricReductiveDecomposition:
    return MetricReductiveDecomposition(LieAlgebra.abelian(dim, field), [], [], list(range(dim)), field.eye(dim))


def trivial_product_soliton(einstein: MetricReductiveDecomposition, flat_dim: int = 1) -> SolitonCertificate:
    """Einstein factor times a flat Euclidean factor."""
    return check_algebraic_soliton(direct_sum_mrd(einstein, euclidean_factor(flat_dim, einstein.field)))


# -- obstructions ----------------------------------------------------------

def _theta_of(mrd: MetricReductiveDecomposition, y_h) -> np.ndarray:
    return contract("i,ijk->jk", mrd.field.array(y_h), mrd.theta_h, field=mrd.field)


def cartan_split_violations(mrd: MetricReductiveDecomposition, split: CartanSplit) -> list[str]:
    f = mrd.field
    nh = mrd.nh
    hm = f.array(split.h_minus).reshape(-1, nh)
    hp = f.array(split.h_plus).reshape(-1, nh)
    out = []
    both = np.concatenate([hm, hp])
    if both.shape[0] != nh or Subspace(both, nh, f).dim != nh:
        out.append("h_minus and h_plus do not span h as a direct sum")
    if hm.shape[0] and hp.shape[0] and not f.all_zero(hm @ mrd.gram_h @ hp.T):
        out.append("h_minus and h_plus are not orthogonal")
    u = mrd.u_algebra()
    nk = mrd.nk
    emb = lambda rows: np.concatenate([f.zeros((rows.shape[0], nk)), rows], axis=1)
    kmax = np.concatenate([f.eye(u.dim)[:nk], emb(hm)])
    hplus = emb(hp)
    kmax_s = Subspace(kmax, u.dim, f)
    hplus_s = Subspace(hplus, u.dim, f)
    if not u.bracket_span(kmax_s, hplus_s).issubspace(hplus_s):
        out.append("[k_max, h_plus] not contained in h_plus")
    if not u.bracket_span(hplus_s, hplus_s).issubspace(kmax_s):
        out.append("[h_plus, h_plus] not contained in k_max")
    b = u.killing_form
    z = u.center()
    # central directions are invisible to the Killing form; they may sit on either side
    for name, rows, definite in (("k_max", kmax, is_negative_definite), ("h_plus", hplus, is_positive_definite)):
        sub = Subspace(rows, u.dim, f)
        noncentral = _complement_rows(sub, z.intersect(sub))
        if noncentral.shape[0] and not definite(noncentral @ b @ noncentral.T, f):
            out.append(f"Killing form has the wrong sign on {name}")
    return out


def _complement_rows(v: Subspace, w: Subspace) -> np.ndarray:
    """Rows of ``v`` completing a basis of ``w`` to one of ``v``."""
    f = v.field
    rows = list(w.basis)
    out = []
    for x in v.basis:
        cand = Subspace(np.array(rows + [x], dtype=f.dtype), v.ambient_dim, f) if rows else Subspace([x], v.ambient_dim, f)
        if cand.dim > len(rows):
            rows.append(x)
            out.append(x)
    return np.array(out, dtype=f.dtype).reshape(-1, v.ambient_dim)


def cartan_split_defect(mrd: MetricReductiveDecomposition, split: CartanSplit):
    """Largest entry of ``theta^t + theta`` on ``h_minus`` and ``theta^t - theta`` on ``h_plus``."""
    errs = cartan_split_violations(mrd, split)
    if errs:
        raise ValueError("invalid Cartan split: " + "; ".join(errs))
    f = mrd.field
    gn = mrd.gram_n
    worst = _zero_scalar(f)
    for rows, sign in ((split.h_minus, 1), (split.h_plus, -1)):
        for y in f.array(rows).reshape(-1, mrd.nh):
            t = _theta_of(mrd, y)
            worst = max(worst, max_abs(metric_transpose(t, gn, f) + sign * t))
    return worst


@dataclass(frozen=True)
class ObstructionReport:
    status: str  # obstructed | not_obstructed | not_applicable
    detail: str
    cartan_defect: object = None


def compact_u_obstruction(mrd: MetricReductiveDecomposition, assume_compact_center: bool = False) -> ObstructionReport:
    """Compact ``u`` rules out expanding solitons unless ``h = 0``.

    ``u`` counts as compact when it is reductive, its Killing form is negative
    definite on ``[u, u]``, and its center is trivial (or declared compact).
    """
    f = mrd.field
    if not mrd.u_is_subalgebra():
        return ObstructionReport("not_applicable", "u is not a subalgebra")
    u = mrd.u_algebra()
    if not _is_reductive(u):
        return ObstructionReport("not_applicable", "u is not reductive")
    d = u.derived()
    compact_type = d.dim == 0 or is_negative_definite(d.basis @ u.killing_form @ d.basis.T, f)
    if not compact_type:
        return ObstructionReport("not_applicable", "Killing form of u is not negative definite on [u,u]")
    if u.center().dim and not assume_compact_center:
        return ObstructionReport("not_applicable", "u has a center whose compactness is not decided at the algebra level")
    if mrd.nh == 0:
        return ObstructionReport("not_obstructed", "h = 0")
    split = CartanSplit(f.eye(mrd.nh), f.zeros((0, mrd.nh)))
    defect = cartan_split_defect(mrd, split) if not cartan_split_violations(mrd, split) else None
    return ObstructionReport(
        "obstructed",
        "compact u forces C_theta = 0, so ric_u = cI; compact homogeneous spaces carry no Einstein metric with c < 0",
        defect,
    )


# -- Milnor frame scan ------------------------------------------------------

MILNOR_DEFAULT_GRID = {
    "a": ["1/2", "1", "2", "3"],
    "b": ["1/2", "1", "2", "3"],
    "d": ["-1/2", "-1", "-2", "-3"],
    "lam": ["1/2", "1", "2", "3"],
}


def milnor_sl2(a, b, d, field: Field = EXACT) -> LieAlgebra:
    """``[e2,e3] = a e1, [e3,e1] = b e2, [e1,e2] = d e3``."""
    return LieAlgebra.from_brackets(3, {(1, 2): {0: a}, (2, 0): {1: b}, (0, 1): {2: d}}, field=field)


def milnor_point(a, b, d, lam) -> dict:
    a, b, d, lam = (Fraction(x) for x in (a, b, d, lam))
    if not (a > 0 and b > 0 and d < 0 and lam > 0):
        raise ValueError(f"point (a={a}, b={b}, d={d}, lam={lam}) violates a, b > 0, d < 0, lam > 0")
    alg = milnor_sl2(a, b, d)
    ric = ReductivePair(alg, 0, EXACT.eye(3)).ricci()
    kill = alg.killing_form
    c = Fraction(1, 2) * (d * d - (a - b) ** 2)
    lhs1 = Fraction(1, 2) * (a * a - (b - d) ** 2)
    lhs2 = Fraction(1, 2) * (b * b - (a - d) ** 2)
    frame = max(abs(ric[0, 0] - lhs1), abs(ric[1, 1] - lhs2), abs(ric[2, 2] - c),
                abs(kill[0, 0] + 2 * b * d), abs(kill[1, 1] + 2 * a * d), max_abs(ric - np.diag(ric.diagonal())))
    r1 = lhs1 - (c - 2 * lam * b * d)
    r2 = lhs2 - (c - 2 * lam * a * d)
    factor = (a - b) * (a + b - (2 * lam + 1) * d)
    return {
        "a": a, "b": b, "d": d, "lam": lam, "c": c,
        "r1": r1, "r2": r2,
        "identity_residual": (r1 - r2) - factor,
        "frame_residual": frame,
        "solves": r1 == 0 and r2 == 0,
    }


def _grid_points(grid: Mapping[str, Sequence], names: Sequence[str]) -> list[tuple]:
    missing = [n for n in names if n not in grid]
    if missing:
        raise ValueError(f"grid is missing parameters {missing}")
    return list(product(*(tuple(Fraction(x) for x in grid[n]) for n in names)))


def _milnor_star(pt):
    return milnor_point(*pt)


def milnor_sl2_scan(grid: Mapping[str, Sequence] | None = None, workers: int = 1) -> dict:
    """Evaluate the Milnor-frame soliton equations over a rational grid."""
    points = _grid_points(grid or MILNOR_DEFAULT_GRID, ("a", "b", "d", "lam"))
    if not points:
        raise ValueError("empty grid")
    for pt in points:
        a, b, d, lam = pt
        if not (a > 0 and b > 0 and d < 0 and lam > 0):
            raise ValueError(f"point {pt} violates a, b > 0, d < 0, lam > 0")
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            records = list(ex.map(_milnor_star, points, chunksize=16))
    else:
        records = [milnor_point(*pt) for pt in points]
    solutions = [r for r in records if r["solves"]]
    return {
        "points": records,
        "n_points": len(records),
        "solutions": len(solutions),
        "expanding_solutions": sum(1 for r in solutions if r["c"] < 0),
        "identity_holds": all(r["identity_residual"] == 0 for r in records),
        "frame_consistent": all(r["frame_residual"] == 0 for r in records),
        "equal_ab_constants": sorted({r["c"] for r in records if r["a"] == r["b"]}),
        "equal_ab_all_positive": all(r["c"] > 0 for r in records if r["a"] == r["b"]),
    }


# -- border-case lemma audit ---------------------------------------------------

@dataclass(frozen=True)
class AuditItem:
    item: str
    applicable: bool
    passed: bool
    detail: str


def lemadimn_audit(mrd: MetricReductiveDecomposition, certificate: SolitonCertificate | None = None) -> list[AuditItem]:
    """Border-case consequences of being an expanding algebraic soliton.

    Unimodularity of the group is replaced by the algebra-level condition
    ``tr ad X = 0`` for all ``X``.
    """
    f = mrd.field
    g = mrd.g
    out = []
    cert = certificate
    if mrd.nn == 0:
        if cert is None and mrd.nh:
            cert = check_algebraic_soliton(mrd)
        ok = cert is not None and (not cert.is_soliton or cert.verdict == EINSTEIN)
        out.append(AuditItem("semisimple_einstein", True, ok, f"n = 0, verdict {cert.verdict if cert else 'n/a'}"))
    else:
        out.append(AuditItem("semisimple_einstein", False, True, "n != 0"))
    unimodular = f.all_zero(g.trace_form)
    if mrd.nn == 1 and unimodular:
        ok = f.all_zero(mrd.theta)
        out.append(AuditItem("unimodular_line_theta_trivial", True, ok, "tr ad = 0 and dim n = 1"))
    else:
        out.append(AuditItem("unimodular_line_theta_trivial", False, True, "needs dim n = 1 and tr ad = 0"))
    if mrd.u_is_subalgebra():
        u = mrd.u_algebra()
        z = u.center()
        if mrd.nn == 1:
            ok = f.all_zero(z.basis[:, : mrd.nk]) if z.dim else True
            out.append(AuditItem("line_center_in_h", True, ok, f"dim z(u) = {z.dim}"))
        else:
            out.append(AuditItem("line_center_in_h", False, True, "needs dim n = 1"))
        out.append(AuditItem("center_bound", True, z.dim <= mrd.nn ** 2, f"dim z(u) = {z.dim} <= {mrd.nn ** 2}"))
        if u.dim <= 2:
            ok = g.is_solvable()
            if ok and mrd.nk == 0:
                ok = check_solvsoliton(mrd).is_soliton
            out.append(AuditItem("small_u_solvable", True, ok, f"dim u = {u.dim}"))
        else:
            out.append(AuditItem("small_u_solvable", False, True, "needs dim u <= 2"))
    else:
        out.append(AuditItem("line_center_in_h", False, True, "u is not a subalgebra"))
        out.append(AuditItem("center_bound", False, True, "u is not a subalgebra"))
        out.append(AuditItem("small_u_solvable", False, True, "u is not a subalgebra"))
    return out


def moment_map_if_defined(mrd: MetricReductiveDecomposition) -> np.ndarray | None:
    if mrd.field.all_zero(mrd.theta_h):
        return None
    return mrd_moment_map(mrd)
