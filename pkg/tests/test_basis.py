import numpy as np
import pytest
from hypothesis import given, strategies as st

from spectral_perturb.basis import (ProjectionFamily, basis_constant, counterexample_closed_form,
                                    counterexample_family, counterexample_growth, kato_bounds, kato_sum,
                                    linear_fit, riesz_report, similarity_transform)
from spectral_perturb.errors import CriterionFailure, PreconditionError


def _eig_family(L):
    """Rank-one eigenprojections of L, sorted by real part, against coordinate projections."""
    n = L.shape[0]
    lam, V = np.linalg.eig(L)
    order = np.argsort(lam.real)
    Vi = np.linalg.inv(V)
    pert = [np.outer(V[:, k], Vi[k, :]) for k in order]
    ref = []
    for k in range(n):
        E = np.zeros((n, n), dtype=complex)
        E[k, k] = 1
        ref.append(E)
    return ProjectionFamily(reference=ref, perturbed=pert)


L2 = np.array([[1, 0.1], [0, 2]], dtype=complex)


def test_two_by_two_example():
    fam = _eig_family(L2)
    assert kato_sum(fam) == pytest.approx(0.01)
    W, cond = similarity_transform(fam)
    assert np.allclose(W, [[1, -0.1], [0, 1]], atol=1e-12)
    assert similarity_transform(fam).conjugation_error < 1e-12


def test_identical_families():
    fam = _eig_family(np.diag([1.0, 2.0, 3.0]).astype(complex))
    assert kato_sum(fam) == 0.0
    res = similarity_transform(fam)
    assert np.allclose(res.W, np.eye(3)) and res.cond == pytest.approx(1.0)
    assert basis_constant(fam) == pytest.approx(1.0)


def test_counterexample_fails_criterion():
    fam = counterexample_family(10)
    assert kato_sum(fam) > 1
    with pytest.raises(CriterionFailure):
        similarity_transform(fam)
    assert basis_constant(fam) >= 10 - 1e-6


def test_counterexample_growth_values():
    g = counterexample_growth(10)
    assert g[0] == pytest.approx(2.0) and g[-1] == pytest.approx(10.0)
    slope, _, r2 = linear_fit(range(2, 11), g)
    assert slope == pytest.approx(1.0, abs=1e-9) and r2 > 0.999
    assert all(counterexample_closed_form(m) == pytest.approx(m, rel=1e-12) for m in range(2, 12))


def test_constant_angle_blocks_stay_bounded():
    # h fixed: every block has the same angle, so the Kato sum does not grow
    vals = [kato_sum(counterexample_family(m, h=0.5)) for m in (5, 10, 20, 40)]
    assert max(vals) - min(vals) < 1e-12


def test_shrinking_angle_grows_linearly():
    sizes = (5, 10, 20, 40)
    consts = [basis_constant(counterexample_family(m), n_subsets=20) for m in sizes]
    slope, _, r2 = linear_fit(sizes, consts)
    assert slope == pytest.approx(1.0, abs=1e-6) and r2 > 0.999


def test_validation_rejects_broken_family():
    fam = _eig_family(L2)
    fam.perturbed[0] = fam.perturbed[0] * 1.5
    with pytest.raises(PreconditionError):
        fam.validate()


@st.composite
def small_perturbations(draw):
    n = draw(st.integers(2, 8))
    seed = draw(st.integers(0, 10 ** 6))
    eps = draw(st.floats(1e-4, 0.15))
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return np.diag(np.arange(1.0, n + 1)) + eps * B / np.linalg.norm(B, 2)


def _brute_kato(fam):
    # largest eigenvalue of sum_j A_j^H A_j with A_j = R_j (Q_j - R_j)
    G = sum((R @ (Q - R)).conj().T @ (R @ (Q - R)) for _, Q, R in fam.pairs())
    return float(np.linalg.eigvalsh(G)[-1])


@given(small_perturbations())
def test_kato_sum_matches_gram_oracle(L):
    fam = _eig_family(L)
    exact, sampled = kato_bounds(fam, 32, 0)
    assert exact == pytest.approx(_brute_kato(fam), rel=1e-9, abs=1e-14)
    assert sampled <= exact * (1 + 1e-10) + 1e-14


@given(small_perturbations())
def test_similarity_conjugates_each_pair(L):
    fam = _eig_family(L)
    if kato_sum(fam) >= 1:
        return
    res = similarity_transform(fam)
    assert res.conjugation_error < 1e-8
    Winv = np.linalg.inv(res.W)
    for _, Q, R in fam.pairs():
        assert np.allclose(res.W @ Q @ Winv, R, atol=1e-8)


@given(small_perturbations())
def test_basis_constant_at_least_one(L):
    assert basis_constant(_eig_family(L), n_subsets=20) >= 1 - 1e-12


def test_report_rows():
    rep = riesz_report(_eig_family(L2), n_samples=8, n_subsets=8)
    assert rep.passed
    names = [c.name for c in rep.checks]
    assert "kato sum < 1" in names and "similarity conjugation" in names
