from fractions import Fraction as F
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from corpus import H3, SL2, SU2
from homsoliton.algebra import LieAlgebra
from homsoliton.catalogue import FAMILIES, build_family, certified_point, hyperbolic_plane, hyperbolic_space3
from homsoliton.geometry import (
    MetricReductiveDecomposition, compatibility_defect, mrd_moment_map,
)
from homsoliton.linalg import EXACT, Field
from homsoliton.solitons import (
    ALGEBRAIC_SOLITON, EINSTEIN, NILSOLITON, NOT_SOLITON, SOLVSOLITON, CartanSplit, FlatFactorError,
    cartan_split_defect, cartan_split_violations, check_algebraic_soliton, check_nilsoliton, check_solvsoliton,
    compact_u_obstruction, euclidean_factor, lemadimn_audit, milnor_point, milnor_sl2_scan, product_soliton_check,
    sign_class, soliton_derivation,
)
from oracles import nomizu_ricci
from strategies import positive

ALL_POINTS = [(name, p) for name, spec in FAMILIES.items() for p in spec.default_points()]
CERTIFIED = [(n, p) for n, p in ALL_POINTS if certified_point(n, p)[1].is_soliton]


def diag(*xs):
    return EXACT.array(np.diag([F(x) for x in xs]).astype(object))


def items(points):
    for name, params in points:
        yield (name, params, *certified_point(name, params))


# -- check_algebraic_soliton --------------------------------------------------------------------------

def test_sl2_plane_unit_point():
    cert = check_algebraic_soliton(build_family("sl2_semi_r2", alpha=1, beta=1))
    assert cert.verdict == ALGEBRAIC_SOLITON and cert.c == -6
    assert cert.sign_class == "expanding" and cert.expanding
    assert all(v == 0 for v in cert.residuals.values())


def test_faithful_dim6_constraint():
    assert check_algebraic_soliton(build_family("dim6_n2", alpha=1, beta=3, gamma=2)).verdict == EINSTEIN
    assert check_algebraic_soliton(build_family("dim6_n2", alpha=1, beta=2, gamma=2)).verdict == NOT_SOLITON


def test_heisenberg_action_constraint():
    on = check_algebraic_soliton(build_family("theta_12_heis", alpha=4, beta=1, gamma=1))
    assert on.is_soliton
    assert not check_algebraic_soliton(build_family("theta_12_heis", alpha=2, beta=1, gamma=1)).is_soliton


def test_empty_problem_rejected():
    mrd = MetricReductiveDecomposition(SU2, [0, 1, 2], [], [], EXACT.zeros((0, 0)))
    with pytest.raises(ValueError, match="empty"):
        check_algebraic_soliton(mrd)


def test_not_soliton_reports_failing_condition():
    cert = check_algebraic_soliton(build_family("theta_ad", alpha=1, beta=2, gamma=3))
    assert cert.verdict == NOT_SOLITON
    assert cert.residuals["compatibility"] != 0
    assert cert.reasons


def test_sign_class():
    assert sign_class(F(-1)) == "expanding"
    assert sign_class(0) == "steady"
    assert sign_class(F(1, 2)) == "shrinking"


# -- solvsolitons and nilsolitons ---------------------------------------------------------------------

def test_solvsoliton_examples():
    cert = check_solvsoliton(build_family("subals_solv", alpha=2, beta=5))
    assert cert.verdict == SOLVSOLITON and cert.c == -3
    assert np.array_equal(cert.D, diag(0, 0, 3, 3))
    flat = check_solvsoliton(LieAlgebra.abelian(3), diag(1, 2, 3))
    assert flat.c == 0 and EXACT.all_zero(flat.D) and flat.sign_class == "steady"
    h3 = check_solvsoliton(H3)
    assert h3.c == F(-3, 2) and np.array_equal(h3.D, diag(1, 1, 2))
    with pytest.raises(ValueError, match="solvable"):
        check_solvsoliton(SL2)


def test_nilsoliton_examples():
    cert = check_nilsoliton(H3)
    assert cert.verdict == NILSOLITON and cert.c == F(-3, 2)
    assert check_nilsoliton(LieAlgebra.abelian(2)).c == 0
    with pytest.raises(ValueError, match="nilpotent"):
        check_nilsoliton(LieAlgebra.from_brackets(2, {(0, 1): {1: 1}}))


def test_non_soliton_left_invariant_metric():
    # R^3 extended by a non-normal derivation with the flat metric is not a solvsoliton
    alg = LieAlgebra.from_brackets(3, {(0, 1): {1: 1}, (0, 2): {1: 1, 2: 2}})
    assert check_solvsoliton(alg).verdict == NOT_SOLITON


@pytest.mark.parametrize("name,params", CERTIFIED[::7], ids=lambda v: str(v))
def test_nilradical_part_is_nilsoliton(name, params):
    mrd, cert = certified_point(name, params)
    if mrd.nn == 0:
        return
    nil = check_nilsoliton(mrd.n_pair())
    assert nil.is_soliton
    if cert.D1 is not None:
        assert mrd.n_algebra().derivation_defect(cert.D1) == 0
    if not mrd.n_algebra().is_abelian():
        assert nil.c == cert.c


# -- soundness and structure of certificates ------------------------------------------------------

@pytest.mark.parametrize("name,params", CERTIFIED[::3], ids=lambda v: str(v))
def test_certificate_soundness_against_oracle(name, params):
    mrd, cert = certified_point(name, params)
    ric = EXACT.array(nomizu_ricci(mrd.g.c.tolist(), mrd.nk, mrd.gram.tolist()))
    d_p = cert.D[mrd.P, mrd.P]
    assert EXACT.all_zero(ric - cert.c * EXACT.eye(mrd.dim - mrd.nk) - d_p)
    assert mrd.g.derivation_defect(cert.D) == 0
    assert EXACT.all_zero(cert.D[: mrd.nk + mrd.nh, :])
    assert EXACT.all_zero(cert.D[:, mrd.K])
    if cert.verdict == EINSTEIN:
        assert EXACT.all_zero(d_p)


def test_all_certified_are_expanding_with_zero_residuals():
    for name, params, mrd, cert in items(CERTIFIED):
        assert cert.expanding, (name, params)
        assert all(v == 0 for v in cert.residuals.values()), (name, params)


def test_condition_constants_agree():
    # when both the u-part and a non-abelian n-part pin c, they give the same value
    for name, params, mrd, cert in items(CERTIFIED):
        if mrd.nh and mrd.nn and not mrd.n_algebra().is_abelian():
            assert check_nilsoliton(mrd.n_pair()).c == cert.c, (name, params)


def test_moment_map_iff_compatibility():
    for name, params, mrd, cert in items(ALL_POINTS[::2]):
        if EXACT.all_zero(mrd.theta_h):
            continue
        zero_mm = EXACT.all_zero(mrd_moment_map(mrd))
        assert zero_mm == EXACT.all_zero(compatibility_defect(mrd))
        if "compatibility" in cert.residuals:
            assert zero_mm == (cert.residuals["compatibility"] == 0)


@settings(max_examples=12, deadline=None)
@given(st.sampled_from(CERTIFIED), positive)
def test_scaling_law(point, s):
    name, params = point
    mrd, cert = certified_point(name, params)
    sc = FAMILIES[name].certify(mrd.scaled(s))
    assert sc.verdict == cert.verdict
    assert sc.c == cert.c / s
    assert np.array_equal(sc.D, cert.D / s)


def test_soliton_derivation_examples():
    mrd = build_family("sl2_semi_r2", alpha=1, beta=1)
    d = soliton_derivation(mrd, -6, 6 * EXACT.eye(2))
    assert np.array_equal(d[mrd.N, mrd.N], 6 * EXACT.eye(2))
    assert EXACT.all_zero(d[: mrd.nk + mrd.nh, :])
    heis = build_family("theta_12_heis", alpha=4, beta=1, gamma=1)
    cert = check_algebraic_soliton(heis)
    d = soliton_derivation(heis, cert.c, cert.D1)
    assert heis.g.derivation_defect(d) == 0
    with pytest.raises(ValueError):
        # a wrong D1 for the Heisenberg nilradical is not a derivation
        soliton_derivation(heis, cert.c, EXACT.eye(3))


def test_unimodular_derivation_is_block():
    seen = 0
    for name, params, mrd, cert in items(CERTIFIED):
        unimodular = all(sum(m[i, i] for i in range(mrd.dim)) == 0 for m in mrd.g.ad_basis)
        if cert.D1 is None or not unimodular:
            continue
        seen += 1
        expected = EXACT.zeros((mrd.dim, mrd.dim))
        expected[mrd.N, mrd.N] = cert.D1
        assert np.array_equal(cert.D, expected), (name, params)
    assert seen


def test_float_mode_certificate():
    mrd = build_family("sl2_semi_r2", alpha=2, beta=3)
    f = Field(1e-9)
    alg = LieAlgebra(mrd.g.c.astype(float), names=mrd.g.names, field=f)
    fm = MetricReductiveDecomposition(alg, [0], [1, 2], [3, 4], mrd.gram.astype(float))
    cert = check_algebraic_soliton(fm)
    assert cert.verdict == ALGEBRAIC_SOLITON and abs(cert.c + 3) < 1e-12


# -- products -----------------------------------------------------------------------------------------

def test_product_lemma():
    assert product_soliton_check(hyperbolic_plane(4), hyperbolic_space3(F(1, 4))).verdict == NOT_SOLITON
    same = product_soliton_check(hyperbolic_plane(4), hyperbolic_plane(4))
    assert same.verdict == EINSTEIN and same.c == -1
    with pytest.raises(FlatFactorError):
        product_soliton_check(hyperbolic_plane(4), euclidean_factor(2))
    with pytest.raises(ValueError, match="Einstein"):
        product_soliton_check(hyperbolic_plane(4), build_family("sl2_semi_r2", alpha=1, beta=1))


@pytest.mark.parametrize("name", ["rh2_times_r", "rh2_times_r2", "rh2_times_e2", "rh3_times_r"])
def test_einstein_times_flat_is_trivial(name):
    for p in FAMILIES[name].default_points():
        cert = certified_point(name, p)[1]
        assert cert.is_soliton and cert.trivial and cert.verdict == ALGEBRAIC_SOLITON


# -- Cartan split and compact u -----------------------------------------------------------------------

def test_cartan_split_examples():
    mrd = build_family("sl2_semi_r2", alpha=2, beta=1)
    assert cartan_split_defect(mrd, CartanSplit(EXACT.zeros((0, 2)), EXACT.eye(2))) == 0
    wrong = CartanSplit(EXACT.eye(2), EXACT.zeros((0, 2)))
    assert cartan_split_violations(mrd, wrong)
    with pytest.raises(ValueError):
        cartan_split_defect(mrd, wrong)
    flat = build_family("rh2_times_r", alpha=1)
    assert cartan_split_defect(flat, CartanSplit(EXACT.zeros((0, 2)), EXACT.eye(2))) == 0


def _e3():
    # rotations su(2) acting on R^3: [L_i, L_j] = L_k and [L_i, X_j] = X_k cyclically
    br = {}
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        br[(i, j)] = {k: 1}
        br[(i, 3 + j)] = {3 + k: 1}
        br[(j, 3 + i)] = {3 + k: -1}
    alg = LieAlgebra.from_brackets(6, br, ["L1", "L2", "L3", "X1", "X2", "X3"])
    return MetricReductiveDecomposition(alg, [], [0, 1, 2], [3, 4, 5], EXACT.eye(6))


def test_compact_u_obstruction():
    assert compact_u_obstruction(_e3()).status == "obstructed"
    assert not check_algebraic_soliton(_e3()).expanding or not check_algebraic_soliton(_e3()).is_soliton
    assert compact_u_obstruction(build_family("h3_nil", beta=1, gamma=1)).status == "not_obstructed"
    assert compact_u_obstruction(build_family("sl2_semi_r2", alpha=1, beta=1)).status == "not_applicable"


# -- Milnor frame -------------------------------------------------------------------------------------

def test_milnor_examples():
    p = milnor_point(1, 1, -1, 1)
    assert p["identity_residual"] == 0 and p["c"] == F(1, 2)
    q = milnor_point(2, 1, -1, 1)
    assert (q["a"] + q["b"] - 3 * q["d"]) == 6 and not q["solves"]
    with pytest.raises(ValueError):
        milnor_sl2_scan({"a": [1], "b": [1], "d": [1], "lam": [1]})


def test_milnor_default_scan():
    scan = milnor_sl2_scan()
    assert scan["n_points"] == 256 and scan["expanding_solutions"] == 0
    assert scan["identity_holds"] and scan["frame_consistent"]
    assert scan["equal_ab_all_positive"]


def test_milnor_workers_deterministic():
    grid = {"a": ["1", "2"], "b": ["1", "3"], "d": ["-1", "-2"], "lam": ["1/2", "2"]}
    assert milnor_sl2_scan(grid, workers=2) == milnor_sl2_scan(grid, workers=1)


# -- border-case audit -------------------------------------------------------------------------------

def test_audit_examples():
    audit = {i.item: i for i in lemadimn_audit(build_family("sl2_semi_r2", alpha=1, beta=1))}
    assert audit["center_bound"].applicable and audit["center_bound"].passed
    line = {i.item: i for i in lemadimn_audit(build_family("rh2_times_r", alpha=1))}
    assert line["unimodular_line_theta_trivial"].applicable and line["unimodular_line_theta_trivial"].passed
    semi = {i.item: i for i in lemadimn_audit(hyperbolic_plane(2))}
    assert semi["semisimple_einstein"].applicable and semi["semisimple_einstein"].passed


def test_constraint_surfaces_on_extended_grid():
    grid = (F(1, 2), F(1), F(2), F(3), F(4))
    for a, b, g in product(grid, grid, grid):
        p = {"alpha": a, "beta": b, "gamma": g}
        assert certified_point("theta_ad", p)[1].is_soliton == (b == g)
        assert certified_point("theta_12_heis", p)[1].is_soliton == (a == 4 * b * b / g)
        assert certified_point("theta_12_r3", p)[1].is_soliton
