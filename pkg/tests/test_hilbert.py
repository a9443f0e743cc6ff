import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spectral_perturb.errors import EstimationFailure, InvalidInputError, SingularKernelError
from spectral_perturb.hilbert import (TransformSpec, lemma_b_bound, apply_transform, apply_vector_transform,
                                      divergence_witness, estimate_opnorm, grid_rounding, is_separated,
                                      power_law_nodes, rounding_split, separated_sequence,
                                      shift_constraints, shifted_targets, theoretical_bound,
                                      transform_matrix, weighted_section_norms)

CLASSICAL = TransformSpec.make("classical")


def _loop_matrix(a, z, w):
    # entry-by-entry oracle
    n = len(a)
    A = np.zeros((n, n), dtype=complex)
    for r in range(n):
        for k in range(n):
            if k != r:
                A[r, k] = w[k] / (a[k] - z[r])
    return A


def test_e1_examples():
    e1 = np.eye(4)[0]
    assert np.allclose(transform_matrix(CLASSICAL, 4) @ e1, [0, -1, -1 / 2, -1 / 3])
    spec = TransformSpec.make("gdht", a=[2, 4, 6])
    assert np.allclose(apply_transform(spec, np.eye(3)[0]), [0, -1 / 2, -1 / 4])
    t = np.arange(1, 4, dtype=float) ** 2
    spec = TransformSpec.make("weighted", t=t, alpha=2)
    assert apply_transform(spec, np.eye(3)[0])[1] == pytest.approx(-1 / 3)


@given(st.integers(0, 10 ** 6), st.integers(2, 25), st.sampled_from(["gdht", "shifted", "weighted"]))
def test_matrix_matches_loop_oracle(seed, n, kind):
    rng = np.random.default_rng(seed)
    a = separated_sequence(n, 2.0, rng)
    if kind == "gdht":
        spec, z, w = TransformSpec.make("gdht", a=a), a, np.ones(n)
    elif kind == "shifted":
        z = shifted_targets(a, 0.9, rng)
        spec, w = TransformSpec.make("shifted", a=a, z=z), np.ones(n)
    else:
        alpha = 0.6 + rng.random()
        spec = TransformSpec.make("weighted", t=a + 1, alpha=alpha)
        a, z = a + 1, a + 1
        w = np.arange(1, n + 1) ** (alpha - 1)
    assert np.allclose(transform_matrix(spec, n), _loop_matrix(a, z, w), rtol=1e-13)


def test_classical_norms_below_pi_and_nondecreasing():
    norms = [estimate_opnorm(CLASSICAL, n) for n in (100, 200, 400)]
    assert all(2.5 <= x <= math.pi for x in norms)
    assert norms == sorted(norms)


def test_power_iteration_matches_svd():
    spec = TransformSpec.make("weighted", t=power_law_nodes(0.75, 300), alpha=0.75)
    power = estimate_opnorm(spec, 300, method="power")
    dense = estimate_opnorm(spec, 300, method="dense")
    # Rayleigh-type iterates approach the top singular value from below
    assert power <= dense * (1 + 1e-12) and power == pytest.approx(dense, rel=1e-4)


def test_power_iteration_budget():
    with pytest.raises(EstimationFailure) as info:
        estimate_opnorm(CLASSICAL, 300, method="power", tol=1e-15, max_iter=3)
    assert info.value.last_value > 0 and info.value.last_iterate.shape == (300,)


@given(st.integers(2, 120))
def test_integer_nodes_stay_below_pi(n):
    spec = TransformSpec.make("gdht", a=np.arange(n, dtype=float) * 3 + 5)
    assert estimate_opnorm(spec, n) <= math.pi / 3 + 1e-9


def test_bound_arithmetic():
    assert theoretical_bound(TransformSpec.make("gdht", a=[0, 3], delta=2)) == pytest.approx(6.4315, abs=1e-4)
    spec = TransformSpec.make("shifted", a=[0, 3], z=[0.1, 3.1], delta=1, Delta=1)
    assert theoretical_bound(spec) == pytest.approx(math.pi / 2 + 2 * math.pi ** 2 / 3)
    with pytest.raises(InvalidInputError):
        theoretical_bound(TransformSpec.make("gdht", a=[0, 3]))


def test_shifted_bound_fails_for_large_delta_ratio():
    # the second term vanishes as Delta grows, leaving pi/(2 delta) < ||section||
    n = 400
    a = 2.0 * np.arange(n)
    z = a + 0.89j
    assert all(shift_constraints(a, z, 0.9, 1e6).values())
    spec = TransformSpec.make("shifted", a=a, z=z, delta=0.9, Delta=1e6)
    assert estimate_opnorm(spec, n) > 1.2 * theoretical_bound(spec)


@given(st.integers(0, 10 ** 6), st.sampled_from([0.5, 1.0, 2.0]))
def test_separated_bound_holds(seed, delta):
    rng = np.random.default_rng(seed)
    a = separated_sequence(60, delta, rng)
    assert is_separated(a, delta)
    spec = TransformSpec.make("gdht", a=a, delta=delta)
    assert estimate_opnorm(spec, 60) <= theoretical_bound(spec)


@given(st.integers(0, 10 ** 6), st.sampled_from([0.5, 1.0, 2.0]))
def test_shifted_bound_holds_for_tight_delta(seed, delta):
    rng = np.random.default_rng(seed)
    a = separated_sequence(60, 2 * delta, rng)
    z = shifted_targets(a, delta, rng)
    Delta = float(np.max(np.abs(z.real - a))) * (1 + 1e-9)
    assert all(shift_constraints(a, z, delta, Delta).values())
    spec = TransformSpec.make("shifted", a=a, z=z, delta=delta, Delta=Delta)
    assert estimate_opnorm(spec, 60) <= theoretical_bound(spec)


@given(st.integers(0, 10 ** 6), st.floats(0.3, 3))
def test_rounding_split_pieces(seed, delta):
    a = separated_sequence(50, delta, np.random.default_rng(seed))
    at = grid_rounding(a, delta)
    assert np.all(np.diff(at) > 0) and np.max(np.abs(at - a)) <= delta / 4 + 1e-12
    r = rounding_split(a, delta)
    assert r.difference_norm <= r.difference_bound and r.rounded_norm <= r.rounded_bound
    assert r.entry_ratio <= 1 + 1e-9


@given(st.integers(0, 10 ** 6), st.integers(2, 60), st.floats(0.1, 5))
def test_inverse_square_decay_bound(seed, n, C):
    rng = np.random.default_rng(seed)
    k = np.arange(n)
    d2 = (k[:, None] - k[None, :]).astype(float) ** 2
    np.fill_diagonal(d2, np.inf)
    A = C * (2 * rng.random((n, n)) - 1) / d2
    assert np.linalg.norm(A, 2) <= lemma_b_bound(C)


@pytest.mark.parametrize("k", [1, 2, 5])
def test_vector_transform_norm_equals_scalar(k):
    n = 30
    spec = TransformSpec.make("gdht", a=np.cumsum(1 + np.random.default_rng(k).random(n)))
    cols = []
    for j in range(n * k):
        X = np.zeros(n * k)
        X[j] = 1
        cols.append(apply_vector_transform(spec, X.reshape(n, k)).ravel())
    big = np.linalg.svd(np.array(cols).T, compute_uv=False)[0]
    assert big == pytest.approx(estimate_opnorm(spec, n), abs=1e-10)


def test_singular_kernel():
    spec = TransformSpec.make("shifted", a=[0, 1, 2], z=[0, 0, 2])
    with pytest.raises(SingularKernelError):
        transform_matrix(spec)


def test_horizon_mismatch():
    with pytest.raises(InvalidInputError):
        apply_transform(TransformSpec.make("gdht", a=[0, 1, 2]), np.ones(4))


def test_vector_transform_decouples():
    spec = TransformSpec.make("gdht", a=np.arange(50.0) * 1.5)
    rng = np.random.default_rng(0)
    x = rng.standard_normal(50)
    assert np.allclose(apply_vector_transform(spec, x[:, None])[:, 0], apply_transform(spec, x))
    X = np.zeros((50, 3))
    X[:, 0] = x
    Y = apply_vector_transform(spec, X)
    assert np.allclose(Y[:, 0], apply_transform(spec, x)) and not Y[:, 1:].any()
    X = rng.standard_normal((50, 2)) + 1j * rng.standard_normal((50, 2))
    assert np.linalg.norm(apply_vector_transform(spec, X)) <= estimate_opnorm(spec, 50) * np.linalg.norm(X) + 1e-9
    with pytest.raises(InvalidInputError):
        apply_vector_transform(spec, [[1, 2], [3]] + [[0, 0]] * 48)


def test_divergence_examples():
    n = np.arange(1, 10001, dtype=float)
    s100, s10k = divergence_witness(0.4, n ** 0.4, [100, 10000])
    assert s10k > 1.5 * s100
    a, b = divergence_witness(1.5, n, [100, 10000])
    assert b - a < 0.02
    assert len(divergence_witness(0.4, n ** 0.4, [50])) == 1


@given(st.floats(0.2, 2.5), st.integers(2, 300))
def test_divergence_partial_sums_oracle(alpha, N):
    t = power_law_nodes(alpha, 300)
    direct = math.fsum(1 / (t[0] - t[k]) ** 2 for k in range(1, N))
    assert divergence_witness(alpha, t, [N])[0] == pytest.approx(direct, rel=1e-12)


def test_weighted_norms_settle_above_half():
    norms = weighted_section_norms(0.6, [250, 1000])
    assert norms[1] / norms[0] < 1.2
