from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from corpus import corpus
from homsoliton.algebra import LieAlgebra
from homsoliton.catalogue import FAMILIES, build_family, certified_point
from homsoliton.geometry import (
    InvalidMRD, MetricReductiveDecomposition, ReductivePair, c_theta, compatibility_defect, contract_theta,
    is_gram_symmetric,
    mean_curvature, metric_transpose, moment_map, mrd_moment_map, ricci_operator, theta_derivation_defect,
)
from homsoliton.linalg import EXACT, Field, LinAlgError, commutator
from oracles import nomizu_ricci
from strategies import invertible, matrices, positive, positive_definite

SAMPLES = [(name, spec.default_points()[0]) for name, spec in FAMILIES.items()]
SAMPLE_IDS = [s[0] for s in SAMPLES]


def diag(*xs):
    return EXACT.array(np.diag([F(x) for x in xs]).astype(object))


def sample(name, params):
    return certified_point(name, params)[0]


# -- metric transpose ---------------------------------------------------------------------------------

def test_metric_transpose_examples():
    beta = F(3)
    assert np.array_equal(metric_transpose(diag(1, -1), beta * EXACT.eye(2)), diag(1, -1))
    skew = EXACT.array([[0, 2], [-2, 0]])
    assert np.array_equal(metric_transpose(skew, EXACT.eye(2)), -skew)
    a = EXACT.array([[0, 1], [0, 0]])
    # G^-1 A^T G; the adjoint identity <A e2, e1> = 1 = <e2, A^t e1> = 4 (A^t)[1, 0] fixes the entry at 1/4
    assert np.array_equal(metric_transpose(a, diag(1, 4)), EXACT.array([[0, 0], ["1/4", 0]]))
    with pytest.raises(LinAlgError):
        metric_transpose(a, EXACT.array([[1, 1], [1, 1]]))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.data())
def test_metric_transpose_adjoint(n, data):
    a = data.draw(matrices(n, n))
    g = data.draw(positive_definite(n))
    at = metric_transpose(a, g)
    assert np.array_equal(metric_transpose(at, g), a)
    assert np.array_equal((a.T @ g), g @ at)  # <Ax, y> = <x, A^t y> on all basis pairs
    sym = a + at
    assert is_gram_symmetric(sym, g)


# -- Ricci operator -----------------------------------------------------------------------------------

def test_ricci_abelian_is_zero():
    pair = ReductivePair(LieAlgebra.abelian(3), 0, diag(1, 2, 3))
    assert EXACT.all_zero(pair.ricci())


@pytest.mark.parametrize("alpha,beta", [(1, 1), (F(1, 2), 3), (2, F(1, 3))])
def test_ricci_solvable_model(alpha, beta):
    mrd = build_family("subals_solv", alpha=alpha, beta=beta)
    alpha = F(alpha)
    want = -6 / alpha * EXACT.eye(4) + diag(0, 0, 6 / alpha, 6 / alpha)
    assert np.array_equal(ricci_operator(mrd), want)


@pytest.mark.parametrize("name,params", SAMPLES, ids=SAMPLE_IDS)
def test_ricci_matches_nomizu_oracle(name, params):
    mrd = sample(name, params)
    ric = ricci_operator(mrd)
    assert np.array_equal(ric, EXACT.array(nomizu_ricci(mrd.g.c.tolist(), mrd.nk, mrd.gram.tolist())))
    assert is_gram_symmetric(ric, mrd.gram)


@settings(max_examples=15, deadline=None)
@given(st.sampled_from([c for c in corpus() if c[1].is_solvable() and 2 <= c[1].dim <= 4]), st.data())
def test_ricci_random_metrics_match_oracle(item, data):
    alg = item[1]
    g = data.draw(positive_definite(alg.dim))
    ric = ReductivePair(alg, 0, g).ricci()
    assert np.array_equal(ric, EXACT.array(nomizu_ricci(alg.c.tolist(), 0, g.tolist())))
    assert is_gram_symmetric(ric, g)


@pytest.mark.parametrize("name", ["sl2_semi_r2", "dim6_n2", "theta_ad", "so2_h3", "rh3_times_r"])
@pytest.mark.parametrize("s", [F(1, 3), F(2), F(5, 2)])
def test_ricci_scale_covariance(name, s):
    mrd = sample(name, FAMILIES[name].default_points()[0])
    assert np.array_equal(ricci_operator(mrd.scaled(s)), ricci_operator(mrd) / s)


@pytest.mark.parametrize("name,params", [s for s in SAMPLES if sample(*s).nk], ids=lambda v: str(v))
def test_ricci_commutes_with_isotropy(name, params):
    mrd = sample(name, params)
    ric = ricci_operator(mrd)
    for z in range(mrd.nk):
        assert EXACT.all_zero(commutator(ric, mrd.g.ad_basis[z][mrd.P, mrd.P]))


# -- mean curvature -----------------------------------------------------------------------------------

def test_mean_curvature_examples():
    aff = LieAlgebra.from_brackets(2, {(0, 1): {1: 1}})
    assert np.array_equal(mean_curvature(ReductivePair(aff, 0, EXACT.eye(2))), EXACT.array([1, 0]))
    assert EXACT.all_zero(mean_curvature(sample("sl2_semi_r2", {"alpha": 1, "beta": 1})))
    assert EXACT.all_zero(mean_curvature(sample("theta_ad", {"alpha": 1, "beta": 2, "gamma": 2})))
    with pytest.raises(ValueError):
        mean_curvature(ReductivePair(aff, 1, EXACT.eye(1)))


@settings(max_examples=20, deadline=None)
@given(st.data())
def test_mean_curvature_pairs_with_trace(data):
    alg = data.draw(st.sampled_from([c[1] for c in corpus() if c[1].is_solvable() and c[1].dim >= 2]))
    g = data.draw(positive_definite(alg.dim))
    h = mean_curvature(ReductivePair(alg, 0, g))
    assert np.array_equal(g @ h, alg.trace_form)


# -- C_theta, compatibility, moment map -----------------------------------------------------------

@pytest.mark.parametrize("alpha,beta", [(1, 1), (F(1, 2), 2), (3, F(1, 2))])
def test_c_theta_on_sl2_plane(alpha, beta):
    mrd = build_family("sl2_semi_r2", alpha=alpha, beta=beta)
    assert np.array_equal(c_theta(mrd), diag(2 / F(alpha), 2 / F(alpha)))


def test_c_theta_zero_for_trivial_action():
    mrd = build_family("rh2_times_r", alpha=2)
    assert EXACT.all_zero(c_theta(mrd))
    assert EXACT.all_zero(compatibility_defect(mrd))


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([s for s in SAMPLES if sample(*s).nh]), st.data())
def test_c_theta_positive_semidefinite(item, data):
    mrd = sample(*item)
    c = c_theta(mrd)
    form = mrd.gram_h @ c
    assert np.array_equal(form, form.T)
    y = data.draw(matrices(1, mrd.nh)).reshape(-1)
    assert y @ form @ y >= 0


def test_compatibility_defect_theta_ad():
    on = build_family("theta_ad", alpha=1, beta=2, gamma=2)
    off = build_family("theta_ad", alpha=1, beta=1, gamma=2)
    assert EXACT.all_zero(compatibility_defect(on))
    assert not EXACT.all_zero(compatibility_defect(off))


def _rebased(mrd, q):
    """Same decomposition with the h-basis replaced by the rows of ``q @ h_basis``."""
    h_new = q @ mrd.h_basis
    gram = mrd.gram.copy()
    gram[: mrd.nh, : mrd.nh] = q @ mrd.gram_h @ q.T
    return MetricReductiveDecomposition(mrd.source, mrd.k_basis, h_new, mrd.n_basis, gram)


@settings(max_examples=15, deadline=None)
@given(st.sampled_from(["theta_ad", "theta_12_heis", "dim6_n2", "sl2_semi_r2", "so2_solv4"]), st.data())
def test_compatibility_defect_is_basis_independent(name, data):
    mrd = sample(name, FAMILIES[name].default_points()[1])
    q = data.draw(invertible(mrd.nh))
    moved = _rebased(mrd, q)
    assert np.array_equal(compatibility_defect(moved), compatibility_defect(mrd))
    s = data.draw(positive)
    assert np.array_equal(compatibility_defect(_rebased(mrd, s * EXACT.eye(mrd.nh))), compatibility_defect(mrd))


def test_moment_map_examples():
    for a, b in [(1, 1), (2, 3)]:
        assert EXACT.all_zero(mrd_moment_map(build_family("sl2_semi_r2", alpha=a, beta=b)))
    off = build_family("theta_ad", alpha=1, beta=1, gamma=2)
    m = mrd_moment_map(off)
    assert not EXACT.all_zero(m)
    assert np.array_equal(m, m.T)
    with pytest.raises(ValueError):
        mrd_moment_map(build_family("rh2_times_r", alpha=1))


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 2), st.integers(1, 3), st.data())
def test_moment_map_normalization(nh, nn, data):
    theta = np.array([data.draw(matrices(nn, nn)) for _ in range(nh)], dtype=object)
    gh, gn = data.draw(positive_definite(nh)), data.draw(positive_definite(nn))
    defect, norm2 = contract_theta(theta, gh, gn)
    if norm2 == 0:
        with pytest.raises(ValueError):
            moment_map(theta, gh, gn)
        return
    m = moment_map(theta, gh, gn)
    assert np.array_equal(m * norm2, defect)
    assert np.array_equal(gn @ m, (gn @ m).T)


@pytest.mark.parametrize("name,params", SAMPLES, ids=SAMPLE_IDS)
def test_theta_acts_by_derivations(name, params):
    assert theta_derivation_defect(sample(name, params)) == 0


# -- validation ---------------------------------------------------------------------------------------

def test_rejects_bad_decompositions():
    mrd = build_family("sl2_semi_r2", alpha=1, beta=1)
    g = mrd.source
    bad_gram = mrd.gram.copy()
    bad_gram[0, 0] = EXACT.scalar(0)
    with pytest.raises(InvalidMRD, match="gram not positive definite"):
        MetricReductiveDecomposition(g, [0], [1, 2], [3, 4], bad_gram)
    mixed = mrd.gram.copy()
    mixed[0, 2] = mixed[2, 0] = EXACT.scalar(F(1, 10))
    with pytest.raises(InvalidMRD, match="orthogonal"):
        MetricReductiveDecomposition(g, [0], [1, 2], [3, 4], mixed)
    with pytest.raises(InvalidMRD, match="nilradical"):
        MetricReductiveDecomposition(g, [0], [1, 2, 3], [4], mrd.gram)
    tilted = [[1, 1, 0, 0, 0], [0, 0, 1, 0, 0]]
    with pytest.raises(InvalidMRD) as err:
        MetricReductiveDecomposition(g, [0], tilted, [3, 4], mrd.gram)
    assert any("Killing" in v or "[k,h]" in v for v in err.value.violations)


def test_float_mode_matches_exact():
    mrd = build_family("sl2_semi_r2", alpha=2, beta=3)
    f = Field(1e-9)
    alg = LieAlgebra(mrd.g.c.astype(float), names=mrd.g.names, field=f)
    fm = MetricReductiveDecomposition(alg, [0], [1, 2], [3, 4], mrd.gram.astype(float))
    assert np.allclose(ricci_operator(fm), ricci_operator(mrd).astype(float), atol=1e-12)
    assert np.allclose(c_theta(fm), c_theta(mrd).astype(float), atol=1e-12)
