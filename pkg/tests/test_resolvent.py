import numpy as np
import pytest
from hypothesis import given, strategies as st

from spectral_perturb.enclosure import Rectangle, contour_nodes, power_enclosures
from spectral_perturb.errors import (AmbiguousRankError, ContourDegeneracyError, QuadratureFailure,
                                     SingularPointError)
from spectral_perturb.operators import PerturbationSpec, TruncatedOperator, assemble
from spectral_perturb.resolvent import (SchurForm, _guard_collision, converged_contour, enclosure_spectrum_report, family_projections,
                                        homotopy_ranks, max_neumann_factor, max_resolvent_norm,
                                        neumann_factor, neumann_factors, projection_rank,
                                        resolvent_norm, resolvent_norms, riesz_projection)
from spectral_perturb.spectrum import EigenSequence, make_sequence

D12 = np.diag([1.0, 2.0])


def test_resolvent_norm_examples():
    assert resolvent_norm(D12, 1.5) == pytest.approx(2.0)
    with pytest.raises(SingularPointError):
        resolvent_norm(D12, 1.0)
    L = np.array([[1, 1], [0, 2]], dtype=complex)
    explicit = np.linalg.norm(np.linalg.inv(1.5 * np.eye(2) - L), 2)
    assert resolvent_norm(L, 1.5) == pytest.approx(explicit) and explicit >= 2.0


def test_neumann_examples():
    assert neumann_factor([1, 2], np.zeros((2, 2)), 1.7 + 0.3j) == 0.0
    assert neumann_factor([1, 2], 0.1 * np.eye(2), 1.5) == pytest.approx(0.2)


def test_projection_examples():
    sq = Rectangle(0.5, 1.5, -0.5, 0.5)
    pr = riesz_projection(D12, sq)
    assert np.allclose(pr.matrix, np.diag([1, 0]), atol=1e-12) and pr.rank == 1
    pr = riesz_projection(D12, Rectangle(0.5, 2.5, -0.5, 0.5))
    assert np.allclose(pr.matrix, np.eye(2), atol=1e-12) and pr.rank == 2
    L = np.array([[1, 0.1], [0, 2]], dtype=complex)
    pr = riesz_projection(L, contour_nodes(sq, 16, "gauss"))
    assert pr.rank == 1
    assert np.allclose(pr.matrix, (L - 2 * np.eye(2)) / (1 - 2), atol=1e-10)


def test_projection_rank_examples():
    assert projection_rank(0.9999999) == 1
    with pytest.raises(AmbiguousRankError):
        projection_rank(1.4, tol=1e-6)
    assert projection_rank(2 + 3e-9j) == 2


def test_eigenvalue_on_contour_is_inflated_once():
    rect, inflated = _guard_collision(Rectangle(1.0, 1.5, -0.5, 0.5), np.array([1.0, 2.0]))
    assert inflated and rect.re_min < 1.0
    # a pole 1e-6 from the path is out of reach of the node cap
    with pytest.raises(QuadratureFailure):
        riesz_projection(D12, Rectangle(1.0, 1.5, -0.5, 0.5))


def test_persistent_collision_raises():
    # one eigenvalue on the edge, another on the inflated edge
    with pytest.raises(ContourDegeneracyError):
        _guard_collision(Rectangle(0.0, 1.0, -0.5, 0.5), np.array([0.0, -1e-6]))


def test_trapezoid_rule_converges_slowly_on_corners():
    lam = np.array([1.0 + 0j])
    with pytest.raises(QuadratureFailure):
        converged_contour(lam, Rectangle(0.5, 1.5, -0.5, 0.5), 16, "trapezoid", tol=1e-12)


def _nonnormal(n, seed):
    rng = np.random.default_rng(seed)
    t = np.arange(1, n + 1, dtype=float) * 2
    b = 0.2 * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(n)
    return TruncatedOperator.from_parts(t, b)


@given(st.integers(0, 10 ** 6), st.integers(3, 12))
def test_projection_matches_eigendecomposition(seed, n):
    op = _nonnormal(n, seed)
    lam, V = np.linalg.eig(op.l)
    k = int(np.argmin(np.abs(lam - 2)))
    if np.sort(np.abs(lam - 2))[1] < 1.2 or abs(lam[k] - 2) > 0.8:
        return
    P_exact = np.outer(V[:, k], np.linalg.inv(V)[k, :])
    pr = riesz_projection(op, Rectangle(1.0, 3.0, -1.0, 1.0))
    assert pr.rank == 1
    assert np.allclose(pr.matrix, P_exact, atol=1e-8)
    assert np.linalg.norm(pr.matrix @ op.l - op.l @ pr.matrix) < 1e-8


@given(st.integers(0, 10 ** 6))
def test_pruned_maxima_equal_brute_force(seed):
    op = _nonnormal(8, seed)
    nodes = contour_nodes(Rectangle(1.0, 5.0, -1.0, 1.0), 16, "gauss").nodes
    assert max_resolvent_norm(op, nodes) == pytest.approx(resolvent_norms(op, nodes).max(), rel=1e-12)
    assert max_neumann_factor(op.t, op.b, nodes) == pytest.approx(
        neumann_factors(op.t, op.b, nodes).max(), rel=1e-12)


@given(st.integers(0, 10 ** 6))
def test_resolvent_at_least_inverse_distance(seed):
    op = _nonnormal(6, seed)
    z = 3.3 + 0.7j
    dist = np.abs(np.linalg.eigvals(op.l) - z).min()
    assert resolvent_norm(op, z) >= 1 / dist * (1 - 1e-12)


def test_schur_form_reconstructs():
    op = _nonnormal(10, 1)
    sf = SchurForm.of(op)
    assert np.allclose(sf.U @ sf.S @ sf.U.conj().T, op.l, atol=1e-12)
    assert np.allclose(np.tril(sf.S, -1), 0)


@pytest.fixture(scope="module")
def power_model():
    t = make_sequence(EigenSequence.power_law(2, 2, 64, t1=1))
    op = assemble(t, PerturbationSpec(kind="random-column", c=0.05, alpha=2, seed=7))
    fam = power_enclosures(t, np.full(64, 0.05), 2, 2)
    return op, fam, family_projections(op, fam)


def test_zero_perturbation_report_passes():
    t = make_sequence(EigenSequence.power_law(2, 2, 16, t1=1))
    op = assemble(t, PerturbationSpec())
    fam = power_enclosures(t, np.full(16, 0.05), 2, 2)
    rep = enclosure_spectrum_report(op, fam)
    assert rep.passed, [c for c in rep.failures()]


def test_power_model_rank_rows(power_model):
    op, fam, fp = power_model
    rep = enclosure_spectrum_report(op, fam, projections=fp)
    by = {c.name: c for c in rep.checks}
    for name in ("spectral inclusion", "one eigenvalue per tail rectangle", "head projection rank",
                 "tail projection ranks", "integer traces", "idempotency",
                 "rank constant along T + sB", "resolution of identity"):
        assert by[name].verdict == "pass", by[name]
    assert by["head projection rank"].measured == 3


def test_literal_head_neumann_row_fails(power_model):
    # the thin literal head fails the Neumann bound on its top edge
    op, fam, fp = power_model
    rep = enclosure_spectrum_report(op, fam, projections=fp, homotopy=False)
    row = next(c for c in rep.checks if c.name.startswith("Neumann"))
    assert row.verdict == "fail" and row.measured > 1.0


def test_column_sum_head_repairs_neumann(power_model):
    op, _, _ = power_model
    fam = power_enclosures(op.t, np.full(64, 0.05), 2, 2, head_height="column-sum")
    nodes = np.concatenate([contour_nodes(r, 64, "gauss").nodes for r in fam.rectangles()])
    assert max_neumann_factor(op.t, op.b, nodes) <= 0.5


def test_tail_contours_alone_satisfy_neumann(power_model):
    op, fam, _ = power_model
    nodes = np.concatenate([contour_nodes(r, 64, "gauss").nodes for r in fam.tail])
    assert max_neumann_factor(op.t, op.b, nodes) < 0.1


def test_violated_hypothesis_reports_containment_failures():
    t = make_sequence(EigenSequence.power_law(2, 2, 64, t1=1))
    op = assemble(t, PerturbationSpec(kind="random-column", c=5.0, alpha=2, seed=1))
    fam = power_enclosures(t, np.full(64, 5.0), 2, 2, strict=False)
    rep = enclosure_spectrum_report(op, fam, homotopy=False)
    assert not rep.passed
    assert any(c.name == "containment-failure" for c in rep.checks)


def test_homotopy_single_rectangle():
    ranks = homotopy_ranks(TruncatedOperator.from_parts([1.0, 2.0], 0.05 * np.ones((2, 2))),
                           Rectangle(0.5, 1.5, -0.5, 0.5))
    assert ranks == [1] * 5
