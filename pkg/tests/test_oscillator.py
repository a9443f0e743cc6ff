import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import beta as beta_fn

from spectral_perturb.errors import DomainTooSmallError, PreconditionError
from spectral_perturb.oscillator import (MultiplierSpec, gap_exponent_fit, gram_defect,
                                         multiplier_norms, omega_beta, parity_defect,
                                         predicted_gap_exponent, read_eigenvalues_csv, solve_eigen,
                                         unconditional_basis_predicate, wkb_phase, wkb_residual,
                                         write_eigen_csv, xi_exponent)


@pytest.fixture(scope="module")
def harmonic():
    return solve_eigen(2, 40)


@pytest.fixture(scope="module")
def quartic():
    return solve_eigen(4, 40)


def _omega_oracle(b):
    # 2 int_0^1 sqrt(1 - u^b) du = (2/b) B(1/b, 3/2)
    return 2.0 / b * beta_fn(1.0 / b, 1.5)


def test_harmonic_spectrum(harmonic):
    n = np.arange(6)
    assert np.max(np.abs(harmonic.eigenvalues[:6] - (2 * n + 1))) < 1e-3
    assert np.max(np.abs(wkb_residual(harmonic)[:6])) < 1e-3
    assert gram_defect(harmonic) < 1e-10 and parity_defect(harmonic) < 1e-6
    assert harmonic.richardson_change < 1e-4


def test_quartic_ground_state_against_fine_grid(quartic):
    fine = solve_eigen(4, 1, X=8.0, m=16000, richardson=False)
    assert fine.eigenvalues[0] == pytest.approx(1.0604, abs=1e-3)
    assert quartic.eigenvalues[0] == pytest.approx(fine.eigenvalues[0], abs=1e-3)


def test_domain_too_small():
    with pytest.raises(DomainTooSmallError):
        solve_eigen(1.5, 10, X=1.0)


def test_wkb_phase_values():
    assert wkb_phase(3, 2) == pytest.approx(3 * math.pi / 2)
    assert wkb_phase(1, 2) == pytest.approx(math.pi / 2)
    assert wkb_phase(1, 4) == pytest.approx(omega_beta(4))


@given(st.floats(1.1, 12))
def test_omega_matches_beta_function(b):
    assert omega_beta(b) == pytest.approx(_omega_oracle(b), rel=1e-9)


def test_omega_examples():
    assert omega_beta(2) == pytest.approx(math.pi / 2)
    assert omega_beta(4) == pytest.approx(1.7479, abs=1e-3)
    assert omega_beta(10) > omega_beta(4) > omega_beta(2)


@given(st.floats(1.2, 8), st.floats(0.5, 200))
def test_phase_scales_with_lambda(b, lam):
    assert wkb_phase(lam, b) == pytest.approx(omega_beta(b) * lam ** ((2 + b) / (2 * b)), rel=1e-9)


def test_quartic_residuals_decay(quartic):
    r = wkb_residual(quartic)
    assert abs(r[20]) < abs(r[5]) and abs(r[20]) < 0.05


def test_gap_exponents(harmonic, quartic):
    fitted, predicted = gap_exponent_fit(quartic)
    assert predicted == pytest.approx(1 / 3) and abs(fitted - predicted) < 0.05
    fitted, predicted = gap_exponent_fit(harmonic)
    assert predicted == 0 and abs(fitted) < 0.02
    assert predicted_gap_exponent(6) == pytest.approx(0.5)


def test_multiplier_norms(harmonic, quartic):
    norms, _, _ = multiplier_norms(harmonic, MultiplierSpec(lambda x: np.ones_like(x)))
    assert np.allclose(norms, 1.0, atol=1e-10)
    norms, fitted, predicted = multiplier_norms(harmonic, MultiplierSpec(lambda x: x, alpha_w=1))
    n = np.arange(harmonic.n_modes)
    assert np.allclose(norms, np.sqrt((2 * n + 1) / 2), rtol=1e-3)
    assert predicted == pytest.approx(0.5) and abs(fitted - 0.5) < 0.02
    _, fitted, predicted = multiplier_norms(quartic, MultiplierSpec(lambda x: 1 / (1 + x * x)))
    assert fitted <= predicted + 0.1


def test_predicate_examples():
    assert unconditional_basis_predicate(4, 2, 0)
    assert not unconditional_basis_predicate(1.1, 2, 0)
    assert unconditional_basis_predicate(4, 6, 0)
    with pytest.raises(PreconditionError):
        unconditional_basis_predicate(1.0, 2, 0)


def test_xi_at_infinity():
    assert xi_exponent(2, math.inf, 1) == pytest.approx(0.5)


def test_eigen_csv_round_trip(harmonic, tmp_path):
    write_eigen_csv(harmonic, tmp_path / "v.csv", tmp_path / "f.csv")
    assert np.array_equal(read_eigenvalues_csv(tmp_path / "v.csv"), harmonic.eigenvalues)
    assert (tmp_path / "f.csv").read_text().count("\n") == harmonic.x.size + 1
