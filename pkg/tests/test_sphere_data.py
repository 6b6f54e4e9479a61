import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sphereflow.kernels import gram, ntk2_profile, phi
from sphereflow.sphere_data import (
    SphereSample,
    dataset_from_csv,
    dataset_to_csv,
    generate_dataset,
    make_target,
    sample_sphere,
)


class TestSampleSphere:
    def test_unit_norms(self):
        s = sample_sphere(12, 500, seed=1)
        assert np.max(np.abs(np.linalg.norm(s.points, axis=1) - 1.0)) <= 1e-12

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            sample_sphere(0, 5, seed=1)
        with pytest.raises(ValueError):
            sample_sphere(3, 0, seed=1)

    @given(d=st.integers(1, 20), n=st.integers(1, 50), seed=st.integers(0, 2**62))
    @settings(max_examples=25, deadline=None)
    def test_seed_determinism(self, d, n, seed):
        a = sample_sphere(d, n, seed)
        b = sample_sphere(d, n, seed)
        assert np.array_equal(a.points, b.points)

    def test_pair_dot_mean_is_zero(self):
        # sign symmetry of the uniform measure
        a = sample_sphere(9, 100_000, seed=21)
        b = sample_sphere(9, 100_000, seed=22)
        dots = np.sum(a.points * b.points, axis=1)
        se = dots.std(ddof=1) / np.sqrt(dots.size)
        assert abs(dots.mean()) <= 3 * se

    def test_pair_dot_second_moment(self):
        # E <x, x'>^2 = 1/(d+1); d = 9 gives 1/10
        a = sample_sphere(9, 100_000, seed=31)
        b = sample_sphere(9, 100_000, seed=32)
        sq = np.sum(a.points * b.points, axis=1) ** 2
        se = sq.std(ddof=1) / np.sqrt(sq.size)
        assert abs(sq.mean() - 0.1) <= 3 * se


class TestMakeTarget:
    def test_single_anchor_value_at_anchor(self):
        prof = ntk2_profile()
        target = make_target(prof, 6, 1, seed=3)
        val = target(target.anchors)[0]
        assert val == pytest.approx(prof.phi_at_one, abs=1e-12)

    def test_three_anchor_sum_matches_direct(self):
        prof = ntk2_profile()
        target = make_target(prof, 8, 3, seed=4)
        x = sample_sphere(8, 40, seed=5).points
        direct = sum(np.asarray(phi(prof, x @ u)) for u in target.anchors)
        assert target(x) == pytest.approx(direct, rel=1e-12)

    def test_single_anchor_h_norm(self):
        # reproducing property: ||Phi(<., u>)||_H^2 = Phi(<u, u>) = Phi(1)
        prof = ntk2_profile()
        target = make_target(prof, 5, 1, seed=6)
        assert target.h_norm_sq == pytest.approx(prof.phi_at_one, abs=1e-12)

    def test_h_norm_matches_gram_quadratic_form(self):
        prof = ntk2_profile()
        target = make_target(prof, 5, 4, seed=7)
        anchor_sample = SphereSample(d=5, points=target.anchors, seed=0)
        G = gram(prof, anchor_sample).entries
        assert target.h_norm_sq == pytest.approx(float(target.weights @ G @ target.weights), rel=1e-12)

    def test_anchors_are_unit(self):
        target = make_target(ntk2_profile(), 30, 3, seed=8)
        assert np.max(np.abs(np.linalg.norm(target.anchors, axis=1) - 1.0)) <= 1e-12

    def test_needs_anchor(self):
        with pytest.raises(ValueError):
            make_target(ntk2_profile(), 5, 0, seed=1)


class TestGenerateDataset:
    def test_zero_noise_is_exact(self):
        prof = ntk2_profile()
        target = make_target(prof, 4, 3, seed=1)
        s = sample_sphere(4, 50, seed=2)
        data = generate_dataset(target, s, 0.0, seed=3)
        assert np.array_equal(data.responses, target(s.points))

    def test_noise_variance(self):
        prof = ntk2_profile()
        target = make_target(prof, 4, 3, seed=1)
        s = sample_sphere(4, 10_000, seed=2)
        data = generate_dataset(target, s, 1.0, seed=3)
        resid = data.responses - target(s.points)
        # sample variance of N(0,1): se of variance ~ sqrt(2/n)
        assert abs(resid.var(ddof=1) - 1.0) <= 3 * np.sqrt(2 / resid.size)

    def test_dimension_mismatch(self):
        target = make_target(ntk2_profile(), 4, 2, seed=1)
        with pytest.raises(ValueError):
            generate_dataset(target, sample_sphere(5, 10, seed=2), 1.0, seed=3)

    def test_negative_noise_rejected(self):
        target = make_target(ntk2_profile(), 4, 2, seed=1)
        with pytest.raises(ValueError):
            generate_dataset(target, sample_sphere(4, 10, seed=2), -0.1, seed=3)

    def test_noise_reproducible_from_seed(self):
        prof = ntk2_profile()
        target = make_target(prof, 4, 3, seed=1)
        s = sample_sphere(4, 64, seed=2)
        a = generate_dataset(target, s, 0.7, seed=9)
        b = generate_dataset(target, s, 0.7, seed=9)
        assert np.array_equal(a.responses, b.responses)


class TestRotationInvariance:
    def test_gram_invariant_under_orthogonal_map(self):
        rng = np.random.default_rng(11)
        d = 6
        q, _ = np.linalg.qr(rng.standard_normal((d + 1, d + 1)))
        s = sample_sphere(d, 40, seed=12)
        rotated = SphereSample(d=d, points=s.points @ q.T, seed=12)
        g1 = gram(ntk2_profile(), s).entries
        g2 = gram(ntk2_profile(), rotated).entries
        assert np.max(np.abs(g1 - g2)) <= 1e-12


class TestCsv:
    def test_round_trip_exact(self):
        prof = ntk2_profile()
        target = make_target(prof, 3, 2, seed=1)
        s = sample_sphere(3, 17, seed=2)
        data = generate_dataset(target, s, 0.5, seed=3)
        text = dataset_to_csv(data)
        assert text.splitlines()[0] == "x_0,x_1,x_2,x_3,y"
        pts, ys = dataset_from_csv(text)
        assert np.array_equal(pts, s.points)
        assert np.array_equal(ys, data.responses)
