from fractions import Fraction as F

import pytest

from corpus import H3
from homsoliton.catalogue import (
    FAMILIES, ParameterDomainError, _certified, build_family, certified_point, evaluate_point,
    offdiag_entries, offdiag_obstruction_check, scan_family, verify_tables,
)
from homsoliton.algebra import nilradical
from homsoliton.geometry import metric_transpose, theta_homomorphism_defect
from homsoliton.linalg import EXACT
from homsoliton.solitons import EINSTEIN, NOT_SOLITON, SOLVSOLITON
from oracles import brute_nilradical_dim, jacobi_loops

SAMPLES = [(name, spec.default_points()[0]) for name, spec in FAMILIES.items()]


@pytest.fixture(scope="module")
def rows():
    return verify_tables()


def test_build_examples():
    mrd = build_family("theta_ad", alpha=1, beta=2, gamma=2)
    assert mrd.dim == 6 and mrd.nn == 3 and mrd.n_algebra().is_abelian()
    heis = build_family("theta_12_heis", alpha=4, beta=1, gamma=1)
    n = heis.n_algebra()
    assert n.dim == 3 and not n.is_abelian() and n.derived().dim == 1 and n.center().dim == 1
    solv = build_family("subals_solv", alpha=1, beta=1)
    assert solv.dim == 4 and solv.g.jacobi_defect() == 0 and solv.g.is_solvable()


@pytest.mark.parametrize("name,params", SAMPLES, ids=[s[0] for s in SAMPLES])
def test_builder_invariants(name, params):
    mrd = build_family(name, **params)
    g, K, P = mrd.g, mrd.K, mrd.P
    assert jacobi_loops(g.c.tolist()) == 0
    assert EXACT.all_zero(g.killing_form[K, P])
    assert EXACT.all_zero(mrd.gram[: mrd.nh, mrd.nh:])
    for z in range(mrd.nk):
        a = g.ad_basis[z][P, P]
        assert EXACT.all_zero(metric_transpose(a, mrd.gram) + a)
    assert theta_homomorphism_defect(mrd) == 0
    coords = [[F(int(i == j)) for j in range(mrd.dim)] for i in range(mrd.dim)]
    assert brute_nilradical_dim(g.c.tolist(), coords)[0] == mrd.nn
    assert nilradical(g).dim == mrd.nn


def test_tables_all_pass(rows):
    assert [r.family for r in rows if not r.ok] == []
    assert {r.family for r in rows} == set(FAMILIES)
    by_name = {r.family: r for r in rows}
    assert by_name["theta_ad"].points == 64 and by_name["theta_ad"].passing_points == 16
    assert by_name["dim5_g5_n1"].passing_points == 0


def test_each_point_certified_once(rows):
    before = _certified.cache_info()
    verify_tables()
    after = _certified.cache_info()
    assert after.misses == before.misses
    assert after.currsize == before.currsize


def test_expected_fail_is_a_pass():
    r = evaluate_point(FAMILIES["theta_ad"], {"alpha": 1, "beta": 2, "gamma": 3})
    assert r.ok and not r.expected_pass and r.observed_verdict == NOT_SOLITON


def test_dim4_cosmological_constant():
    for a, b, t in ((1, 1, 1), (4, 1, 2), (F(1, 4), 4, 1)):
        r = evaluate_point(FAMILIES["dim4_g5_n1"], {"a": a, "b": b, "t": t})
        assert r.ok and r.observed_verdict == EINSTEIN and r.c == -F(a) * b
    off = evaluate_point(FAMILIES["dim4_g5_n1"], {"a": 1, "b": 1, "t": 2})
    assert off.ok and off.observed_verdict == NOT_SOLITON


def test_subals_certificate():
    mrd, cert = certified_point("subals_solv", {"alpha": 2, "beta": 1})
    assert cert.verdict == SOLVSOLITON and cert.c == -3


def test_scaling_of_theta_ad():
    base = certified_point("theta_ad", {"alpha": 1, "beta": 1, "gamma": 1})[1]
    for s in (F(1, 2), 2, 3):
        sc = certified_point("theta_ad", {"alpha": s, "beta": s, "gamma": s})[1]
        assert sc.c == base.c / s


def test_parameter_domain_errors():
    with pytest.raises(ParameterDomainError):
        build_family("theta_ad", alpha=0, beta=1, gamma=1)
    with pytest.raises(ParameterDomainError):
        build_family("sl2_semi_r2", alpha=-1, beta=1)
    with pytest.raises(ParameterDomainError):
        build_family("sl2_semi_r2", alpha=1)
    with pytest.raises(ParameterDomainError):
        build_family("sl2_semi_r2", alpha=1, beta=1, gamma=1)
    with pytest.raises(ParameterDomainError, match="unknown family"):
        build_family("nope")


def test_scan_workers_identical():
    assert scan_family("sl2_semi_r2", workers=2) == scan_family("sl2_semi_r2", workers=1)


def test_offdiag_examples():
    r = offdiag_entries(1, 2, 3, 1, 0, 0)
    assert r["observed"][0] == F(-1, 2) and r["observed"] == r["expected"]
    assert offdiag_entries(1, 2, 3, 0, 0, 0)["observed"] == (0, 0, 0)
    assert offdiag_entries(1, 1, 2, 0, 0, 0)["ric"][2, 2] == 2


def test_offdiag_dichotomy():
    out = offdiag_obstruction_check()
    assert len(out["rows"]) >= 8
    assert out["all_entries_match"] and out["dichotomy_holds"]
    with pytest.raises(ValueError):
        offdiag_obstruction_check([(0, 1, 1, 0, 0, 0)])


def test_heisenberg_corpus_matches_family():
    n = build_family("h3_nil", beta=1, gamma=1).g
    assert n.derived().dim == H3.derived().dim == 1
