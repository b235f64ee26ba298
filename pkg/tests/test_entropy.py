import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlhrv.entropy import (
    conditional_probabilities,
    local_sample_entropy,
    nci,
    neighborhood_counts,
    sample_entropy,
)
from nlhrv.errors import InsufficientDataError, ParameterError, UndefinedEntropyError
from nlhrv.series import AnalysisParams, normalize

from oracles import lsampen_from_counts, pair_counts, sampen_from_counts


def alternating(n=60):
    return normalize(np.where(np.arange(n) % 2 == 0, 1.0, -1.0))


def test_periodic_series_is_fully_regular():
    x = alternating()
    assert sample_entropy(x, 2, 0.2) == 0.0
    assert local_sample_entropy(x, 2, 0.2) == 0.0
    assert nci(x) == 0.0


def test_all_patterns_within_r_gives_zero():
    x = normalize(np.tile([0.0, 0.0, 0.0, 0.001], 25))
    # every pattern matches every other at a large tolerance
    assert sample_entropy(x, 2, 100.0) == 0.0
    assert local_sample_entropy(x, 2, 100.0) == 0.0


@pytest.mark.parametrize("seed", range(5))
def test_counts_match_bruteforce(seed):
    x = normalize(np.random.default_rng(seed).normal(size=120))
    hist, joint = pair_counts(x, 2, 0.2)
    c = neighborhood_counts(x, 2, 0.2)
    assert c.history_matches.tolist() == hist
    assert c.joint_matches.tolist() == joint
    assert abs(sample_entropy(x, 2, 0.2) - sampen_from_counts(hist, joint)) <= 1e-12
    assert abs(local_sample_entropy(x, 2, 0.2) - lsampen_from_counts(hist, joint, x.size, 2)) <= 1e-12


def test_blocked_counting_matches_bruteforce_beyond_one_block():
    x = normalize(np.random.default_rng(7).normal(size=700))
    hist, joint = pair_counts(x, 1, 0.3)
    c = neighborhood_counts(x, 1, 0.3)
    assert c.history_matches.tolist() == hist
    assert c.joint_matches.tolist() == joint


def test_isolated_history_gets_singleton_probability():
    x = np.sin(np.arange(80) * 0.7)
    x[40] = 25.0  # outlier isolates every history that contains it
    x = normalize(x)
    c = neighborhood_counts(x, 2, 0.2)
    p = conditional_probabilities(x, 2, 0.2)
    iso = c.history_matches == 0
    assert iso.any()
    np.testing.assert_array_equal(p[iso], 1.0 / (x.size - 2 + 1))
    hist, joint = pair_counts(x, 2, 0.2)
    assert abs(local_sample_entropy(x, 2, 0.2) - lsampen_from_counts(hist, joint, x.size, 2)) <= 1e-12


def test_joint_never_exceeds_history(rng):
    c = neighborhood_counts(normalize(rng.normal(size=200)), 2, 0.3)
    assert np.all(c.joint_matches <= c.history_matches)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.05, 0.5), st.floats(0.01, 0.5))
def test_counts_monotone_in_r(seed, r, dr):
    x = normalize(np.random.default_rng(seed).normal(size=80))
    a = neighborhood_counts(x, 2, r)
    b = neighborhood_counts(x, 2, r + dr)
    assert np.all(b.history_matches >= a.history_matches)
    assert np.all(b.joint_matches >= a.joint_matches)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_entropies_nonnegative(seed):
    x = normalize(np.random.default_rng(seed).normal(size=150))
    assert local_sample_entropy(x, 2, 0.2) >= 0
    try:
        assert sample_entropy(x, 2, 0.2) >= 0
    except UndefinedEntropyError:
        pass


def test_sampen_undefined_without_matches():
    x = normalize(np.arange(30.0) ** 2)
    with pytest.raises(UndefinedEntropyError):
        sample_entropy(x, 2, 1e-6)


def test_chebyshev_norm_matches_classical_definition(rng):
    x = normalize(rng.normal(size=100))
    c = neighborhood_counts(x, 2, 0.2, norm="chebyshev")
    pats = np.array([[x[n - 1], x[n - 2], x[n]] for n in range(2, x.size)])
    d = np.max(np.abs(pats[:, None, :] - pats[None, :, :]), axis=2)
    dh = np.max(np.abs(pats[:, None, :2] - pats[None, :, :2]), axis=2)
    np.fill_diagonal(d, np.inf)
    np.fill_diagonal(dh, np.inf)
    np.testing.assert_array_equal(c.joint_matches, (d <= 0.2).sum(axis=1))
    np.testing.assert_array_equal(c.history_matches, (dh <= 0.2).sum(axis=1))


def test_nci_affine_invariance(rng):
    x = rng.normal(size=300)
    ref = nci(normalize(x))
    assert nci(3.5 * x + 800.0) == pytest.approx(ref, abs=1e-12)


def test_nci_equals_lsampen_on_normalized(rng):
    x = normalize(rng.normal(size=300))
    assert nci(x, AnalysisParams()) == local_sample_entropy(x, 2, 0.2)


def test_validation():
    x = normalize(np.arange(10.0))
    with pytest.raises(ParameterError):
        sample_entropy(x, 2, 0.0)
    with pytest.raises(ParameterError):
        sample_entropy(x, 2, 0.2, norm="manhattan")
    with pytest.raises(InsufficientDataError):
        sample_entropy(x[:3], 2, 0.2)


def test_iid_value_in_expected_range(rng):
    # Euclidean r=0.2 in 3-D is a small ball; iid entropy is large
    vals = [nci(rng.normal(size=300)) for _ in range(10)]
    assert 2.0 < np.mean(vals) < 4.0
    assert math.isfinite(np.std(vals))
