"""Maximum likelihood fitting, closed forms and the EM mixture path."""

import math

import numpy as np
import pytest

import agof
from agof import (
    DegenerateDataError,
    DegenerateFitError,
    DomainError,
    EmConfig,
    FamilyId,
    FittedModel,
    InsufficientDataError,
    Sample,
    UnsupportedError,
)


def test_exponential_is_the_mean():
    p = agof.fit_mle(FamilyId.exponential(), Sample(np.array([1.0, 2.0, 3.0])))
    assert p.values[0] == 2.0


def test_normal_uses_n_denominator_sd():
    p = agof.fit_mle(FamilyId.normal(), Sample(np.array([0.0, 2.0])))
    assert tuple(p.values) == (1.0, 1.0)


def test_exponential_rejects_nonpositive_data():
    with pytest.raises(DomainError):
        agof.fit_mle(FamilyId.exponential(), Sample(np.array([-1.0, 2.0])))
    with pytest.raises(DomainError):
        agof.fit_mle(FamilyId.exponential(), Sample(np.array([0.0, 2.0])))


def test_normal_needs_two_points():
    with pytest.raises(InsufficientDataError):
        agof.fit_mle(FamilyId.normal(), Sample(np.array([1.0])))


def test_normal_rejects_zero_spread():
    with pytest.raises(DegenerateDataError):
        agof.fit_mle(FamilyId.normal(), Sample(np.array([2.0, 2.0, 2.0])))


def test_weibull_is_generator_only():
    with pytest.raises(UnsupportedError):
        agof.fit_mle(FamilyId.weibull(), Sample(np.array([1.0, 2.0])))


def test_dirac_fit_is_the_mean():
    p = agof.fit_mle(FamilyId.dirac(), Sample(np.array([1.0, 3.0])))
    assert p.values[0] == 2.0


def test_exponential_scale_equivariance_exact():
    # powers of two make the scaling lossless in binary floats
    x = np.array([0.5, 1.25, 3.75, 9.5])
    base = agof.fit_mle(FamilyId.exponential(), Sample(x)).values[0]
    for a in (2.0, 8.0, 0.25):
        scaled = agof.fit_mle(FamilyId.exponential(), Sample(a * x)).values[0]
        assert scaled == a * base


def test_normal_location_scale_equivariance():
    x = np.array([0.5, 1.25, 3.75, 9.5, -2.0])
    mu, sd = agof.fit_mle(FamilyId.normal(), Sample(x)).values
    for a, b in ((2.0, 0.0), (4.0, 8.0), (0.5, -1.0)):
        mu2, sd2 = agof.fit_mle(FamilyId.normal(), Sample(a * x + b)).values
        assert mu2 == pytest.approx(a * mu + b, rel=1e-14, abs=1e-14)
        assert sd2 == pytest.approx(a * sd, rel=1e-14)


class TestEm:
    def test_k1_matches_closed_form_normal(self):
        rng = np.random.default_rng(5)
        s = Sample(rng.normal(1.3, 0.7, size=200))
        closed = agof.fit_mle(FamilyId.normal(), s).values
        em = agof.em_fit_mixture(s, 1).values
        assert em[0] == pytest.approx(1.0, abs=1e-15)  # weight
        assert em[1] == pytest.approx(closed[0], abs=1e-10)
        assert em[2] == pytest.approx(closed[1], abs=1e-10)

    def test_two_cluster_recovery_against_per_cluster_mle(self):
        rng = np.random.default_rng(12)
        lo = rng.normal(-10.0, 1.0, size=50)
        hi = rng.normal(10.0, 1.0, size=50)
        s = Sample(np.concatenate([lo, hi]))
        v = agof.em_fit_mixture(s, 2).values
        w, mu, sd = v[:2], v[2:4], v[4:]
        assert np.all(np.abs(w - 0.5) < 0.1)
        assert abs(mu[0] - (-10.0)) < 0.5 and abs(mu[1] - 10.0) < 0.5
        # with this separation EM must land on the per-cluster MLE
        assert mu[0] == pytest.approx(lo.mean(), abs=1e-6)
        assert mu[1] == pytest.approx(hi.mean(), abs=1e-6)
        assert sd[0] == pytest.approx(lo.std(), abs=1e-5)
        assert sd[1] == pytest.approx(hi.std(), abs=1e-5)

    def test_ascent_every_restart(self):
        rng = np.random.default_rng(77)
        x = np.concatenate([rng.normal(0, 1, 80), rng.normal(4, 2, 40)])
        _, det = agof.em_fit_mixture(Sample(x), 2, return_details=True)
        for trace in det.ll_traces:
            diffs = np.diff(np.asarray(trace))
            assert np.all(diffs >= -1e-9)

    def test_dominates_generating_params(self):
        true = agof.mixture_model([0.6, 0.4], [0.0, 3.0], [1.0, 0.5])
        for seed in (1, 2, 3):
            s = agof.draw_sample(true, 300, seed)
            fitted = FittedModel(FamilyId.gaussian_mixture(2),
                                 agof.em_fit_mixture(s, 2))
            assert (agof.log_likelihood(fitted, s)
                    >= agof.log_likelihood(true, s) - 1e-9)

    def test_determinism(self):
        rng = np.random.default_rng(3)
        s = Sample(rng.normal(0, 1, 150))
        cfg = EmConfig(restarts=4, seed=99)
        a = agof.em_fit_mixture(s, 2, cfg).values
        b = agof.em_fit_mixture(s, 2, cfg).values
        assert np.array_equal(a, b)

    def test_restart_bookkeeping(self):
        s = agof.draw_sample(agof.mixture_model([0.5, 0.5], [-3.0, 3.0],
                                                [1.0, 1.0]), 200, 1)
        _, det = agof.em_fit_mixture(s, 2, return_details=True)
        assert len(det.ll_finals) == EmConfig().restarts
        assert det.ll_finals[det.chosen_restart] == max(det.ll_finals)
        assert det.variance_floor > 0.0

    def test_components_sorted_by_mean(self):
        rng = np.random.default_rng(8)
        x = np.concatenate([rng.normal(5, 1, 60), rng.normal(-5, 1, 60)])
        v = agof.em_fit_mixture(Sample(x), 2).values
        assert v[2] < v[3]

    def test_all_floored_raises(self):
        x = np.array([0.0, 0.0, 1.0, 1.0, 0.0, 1.0])
        with pytest.raises(DegenerateFitError):
            agof.em_fit_mixture(Sample(x), 2)

    def test_needs_enough_points(self):
        with pytest.raises(InsufficientDataError):
            agof.em_fit_mixture(Sample(np.array([1.0, 2.0, 3.0])), 2)

    def test_config_validation(self):
        with pytest.raises(DomainError):
            EmConfig(restarts=0)
        with pytest.raises(DomainError):
            EmConfig(variance_floor_factor=1.0)
        with pytest.raises(DomainError):
            EmConfig(rel_tol=0.0)
        with pytest.raises(DomainError):
            EmConfig(max_iter=0)

    def test_weights_strictly_positive(self):
        rng = np.random.default_rng(21)
        s = Sample(rng.normal(0, 1, 120))
        v = agof.em_fit_mixture(s, 3).values
        w = v[:3]
        assert np.all(w > 0.0)
        assert w.sum() == pytest.approx(1.0, abs=1e-12)
