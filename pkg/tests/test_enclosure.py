import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spectral_perturb.enclosure import (Rectangle, contour_nodes, lorentz_series, minimal_h,
                                        power_enclosures, uniform_enclosures)
from spectral_perturb.errors import DegenerateInputError, HypothesisFailure
from spectral_perturb.spectrum import EigenSequence, cluster_uniform, make_sequence


def _power_t(n=64):
    return make_sequence(EigenSequence.power_law(2, 2, n, t1=1))


def test_uniform_zero_perturbation():
    t = np.arange(1, 21, dtype=float)
    fam = uniform_enclosures(cluster_uniform(t, 1, 0.9), np.zeros(20), 1, 0.9, t=t)
    assert fam.constants["M"] == 1 and fam.constants["N"] == 1 and fam.hypotheses_hold


def test_uniform_small_beta():
    t = np.arange(1, 41, dtype=float) * 1.1
    fam = uniform_enclosures(cluster_uniform(t, 1, 1.0), np.full(40, 0.001), 1, 1.0, t=t)
    assert fam.constants["M"] == 1 and fam.constants["N"] == 1
    assert fam.constants["h"] == pytest.approx(0.092, abs=1e-3)


def test_uniform_large_beta_fails():
    t = np.arange(1, 41, dtype=float) * 1.1
    with pytest.raises(HypothesisFailure):
        uniform_enclosures(cluster_uniform(t, 1, 1.0), np.ones(40), 1, 1.0, t=t)


def _lorentz_closed(h, delta):
    # sum_{j>=0} 1/(h^2 + (j delta)^2) via the coth partial-fraction identity
    return 1 / (2 * h * h) + math.pi / (2 * h * delta) / math.tanh(math.pi * h / delta)


@given(st.floats(0.01, 10), st.floats(0.1, 4))
def test_lorentz_series_matches_closed_form(h, delta):
    assert lorentz_series(h, delta, 1.0) == pytest.approx(_lorentz_closed(h, delta), rel=1e-6)


@given(st.floats(1e-4, 0.5), st.integers(1, 3), st.floats(0.5, 4))
def test_minimal_h_is_the_threshold(beta, p, d):
    h = minimal_h(beta, p, d)
    target = 1 / (8 * p * beta)
    delta = d / (2 * p)
    assert _lorentz_closed(h, delta) <= target * (1 + 1e-6)
    assert _lorentz_closed(h * (1 - 1e-6), delta) >= target * (1 - 1e-6)


def test_power_constants():
    t = _power_t()
    fam = power_enclosures(t, np.full(64, 0.05), 2, 2)
    c = fam.constants
    assert (c["N"], c["ell"]) == (1, 3) and c["Y"] == pytest.approx(0.1)


def test_power_hypothesis_failure_and_degenerate():
    t = _power_t()
    with pytest.raises(HypothesisFailure):
        power_enclosures(t, np.full(64, 0.1), 2, 2)
    with pytest.raises(DegenerateInputError):
        power_enclosures(t, np.zeros(64), 2, 2)


def test_column_sum_head_is_taller():
    t = _power_t()
    lit = power_enclosures(t, np.full(64, 0.05), 2, 2)
    fix = power_enclosures(t, np.full(64, 0.05), 2, 2, head_height="column-sum")
    assert fix.constants["Y"] > lit.constants["Y"] == fix.constants["Y_literal"]


@given(st.floats(0.01, 0.06), st.sampled_from([(2, 2), (2, 0.75), (1, 3), (4, 1.5)]))
def test_power_family_covers_reference_points(c, ka):
    kappa, alpha = ka
    t = make_sequence(EigenSequence.power_law(kappa, alpha, 64, t1=1))
    try:
        fam = power_enclosures(t, np.full(64, c), kappa, alpha)
    except HypothesisFailure:
        return
    assert fam.contains(t).all() and fam.overlap() == 0.0
    assert all(r.contains(t).sum() == 1 for r in fam.tail)


@given(st.floats(1e-4, 0.007), st.integers(1, 3))
def test_uniform_family_covers_reference_points(beta, p):
    t = np.arange(60, dtype=float) * 1.2 / p
    fam = uniform_enclosures(cluster_uniform(t, p, 1.0), np.full(60, beta / p), p, 1.0, t=t, strict=False)
    assert fam.contains(t).all() and fam.overlap() == 0.0


def test_tail_rectangles_touch_but_do_not_overlap():
    fam = power_enclosures(_power_t(), np.full(64, 0.05), 2, 2)
    assert fam.overlap() == 0.0 and fam.min_separation() == 0.0


def test_contour_examples():
    c = contour_nodes(Rectangle(0, 1, -0.5, 0.5), 4)
    assert c.nodes.size == 16 and np.abs(c.weights).sum() == pytest.approx(4)
    assert contour_nodes(Rectangle(0, 3, -1, 2), 2).nodes.size == 8
    c = contour_nodes(Rectangle(0, 2, -1, 1), 64)
    assert abs(c.weights.sum()) < 1e-14


@given(st.floats(-5, 5), st.floats(0.1, 5), st.floats(0.1, 5), st.sampled_from(["trapezoid", "gauss"]),
       st.integers(2, 128))
def test_contour_integrates_one_over_z(x0, w, h, rule, per_edge):
    rect = Rectangle(x0, x0 + w, -h, h)
    c = contour_nodes(rect, per_edge, rule)
    assert abs(c.weights.sum()) < 1e-12 * (1 + w + h)
    assert np.abs(c.weights).sum() == pytest.approx(rect.perimeter)
    inside = complex(x0 + w / 2, 0)
    if rule == "gauss" and per_edge >= 64 and 0.5 < w / (2 * h) < 2:
        val = np.sum(c.weights / (c.nodes - inside)) / (2j * math.pi)
        assert abs(val - 1) < 1e-6
