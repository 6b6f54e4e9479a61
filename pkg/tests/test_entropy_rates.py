import math
from fractions import Fraction

import numpy as np
import pytest

from sphereflow.entropy_rates import (
    certify_lower_bound,
    covering_radius,
    metric_entropy,
    rate_curve,
    rate_table,
)
from sphereflow.kernels import ntk2_profile, taylor_profile
from sphereflow.spectrum import build_spectrum


class TestMetricEntropy:
    def test_empty_active_set(self):
        spec = build_spectrum(ntk2_profile(), 6)
        mu_max = float(spec.mus.max())
        assert metric_entropy(spec, math.sqrt(mu_max) * 1.001) == 0.0

    def test_single_level_hand_value(self):
        # linear kernel: one level mu_1 = 1/(d+1) with N = d+1 entries;
        # at eps = exp(-1) sqrt(mu_1) each entry contributes (1/2) log e^2 = 1
        d = 9
        spec = build_spectrum(taylor_profile([0.0, 1.0]), d)
        K = metric_entropy(spec, math.exp(-1) * math.sqrt(1 / (d + 1)))
        assert K == pytest.approx(d + 1, rel=1e-10)

    def test_monotone_nonincreasing(self):
        spec = build_spectrum(ntk2_profile(), 8)
        grid = np.linspace(1e-4, math.sqrt(float(spec.mus.max())) * 1.1, 100)
        vals = [metric_entropy(spec, float(e)) for e in grid]
        assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))

    def test_matches_expanded_brute_force(self):
        # oracle: explicit multiplicity expansion with <= 1e3 eigenvalues
        spec = build_spectrum(ntk2_profile(), 4)
        lam = spec.expanded_eigenvalues(1000)
        for eps in (0.05, 0.1, 0.3):
            active = lam > eps**2
            brute = 0.5 * float(np.log(lam[active] / eps**2).sum())
            # restrict the spectrum sum to levels fully inside the expansion
            assert metric_entropy(spec, eps) == pytest.approx(brute, rel=1e-9)

    def test_requires_positive_eps(self):
        spec = build_spectrum(ntk2_profile(), 6)
        with pytest.raises(ValueError):
            metric_entropy(spec, 0.0)


class TestCoveringRadius:
    def test_residual_small(self):
        spec = build_spectrum(ntk2_profile(), 10)
        for n in (100, 1000, 10000):
            fx = covering_radius(spec, n, 1.0)
            assert fx.residual <= 1e-10 * n * fx.eps_bar**2

    def test_decreasing_in_n(self):
        spec = build_spectrum(ntk2_profile(), 10)
        vals = [covering_radius(spec, n, 1.0).eps_bar for n in (100, 1000, 10000)]
        assert vals[0] > vals[1] > vals[2]

    def test_interval_endpoints_ordered(self):
        # K is decreasing, so the deflated-argument root is larger
        spec = build_spectrum(ntk2_profile(), 10)
        fx = covering_radius(spec, 500, 1.0)
        assert fx.eps_bar < fx.eps_bar_upper

    def test_sqrt_n_corridor_at_gamma_two(self):
        # eps_bar^2 sqrt(n) lands in a wide frozen corridor at gamma = 2
        spec = build_spectrum(ntk2_profile(), 20)
        fx = covering_radius(spec, 400, 1.0)
        assert 0.01 <= fx.eps_bar**2 * math.sqrt(400) <= 100.0

    def test_sigma_validated(self):
        spec = build_spectrum(ntk2_profile(), 10)
        with pytest.raises(ValueError):
            covering_radius(spec, 100, 0.0)


class TestCertifyLowerBound:
    def test_sides_finite_and_returned(self):
        spec = build_spectrum(ntk2_profile(), 20)
        cert = certify_lower_bound(spec, 400, 1.0)
        assert math.isfinite(cert.lhs) and math.isfinite(cert.rhs)
        assert cert.rhs == pytest.approx(10 * 400 * cert.eps_bar**2, rel=1e-12)
        assert cert.risk_lower_bound == pytest.approx(0.5 * (cert.c2 / 12) ** 2 * cert.eps_bar**2, rel=1e-12)

    def test_small_c2_always_certifies(self):
        spec = build_spectrum(ntk2_profile(), 12)
        assert certify_lower_bound(spec, 144, 1.0, c2=1e-4).holds

    def test_invalid_c2(self):
        spec = build_spectrum(ntk2_profile(), 12)
        with pytest.raises(ValueError):
            certify_lower_bound(spec, 100, 1.0, c2=0.0)


class TestRateCurveInner:
    def test_figure_values_exact(self):
        assert rate_curve(0.5, "inner").n_exponent == 1.0
        assert rate_curve(0.8, "inner").n_exponent == 1.0
        assert rate_curve(1.5, "inner").n_exponent == 2 / 3
        assert rate_curve(1.8, "inner").n_exponent == 5 / 9
        assert rate_curve(2.0, "inner").n_exponent == 0.5

    def test_even_integers_matched_half(self):
        for g in (2, 4, 6, 8):
            pt = rate_curve(g, "inner")
            assert pt.n_exponent == 0.5
            assert pt.match_status == "matched"
            assert not pt.log_factor

    def test_odd_boundary_half_open(self):
        # gamma = 3 sits in the right-closed (2, 3] branch: log factor on
        at3 = rate_curve(3.0, "inner")
        assert at3.log_factor and at3.match_status == "matched_up_to_epsilon"
        assert at3.n_exponent == 2 / 3
        just_above = rate_curve(Fraction(301, 100), "inner")
        assert not just_above.log_factor and just_above.match_status == "matched"

    def test_continuity_across_boundaries(self):
        # the exponent value is continuous; only flags flip at the endpoints
        for edge in (1, 2, 3, 4, 5, 6, 7):
            lo = rate_curve(Fraction(edge * 1000 - 1, 1000), "inner").n_exponent
            at = rate_curve(Fraction(edge), "inner").n_exponent
            hi = rate_curve(Fraction(edge * 1000 + 1, 1000), "inner").n_exponent
            assert abs(lo - at) <= 2e-3 and abs(hi - at) <= 2e-3

    def test_exponent_and_d_exponent_consistent(self):
        for i in range(10, 800, 7):
            g = Fraction(i, 100)
            pt = rate_curve(g, "inner")
            assert 0 < pt.n_exponent <= 1
            assert pt.d_exponent == pytest.approx(float(g) * pt.n_exponent, abs=1e-12)

    def test_multiple_descent_extremes(self):
        # exponent minima 1/2 exactly at even integers, isolated maxima at odd
        pts = {Fraction(i, 100): rate_curve(Fraction(i, 100), "inner") for i in range(150, 801)}
        halves = sorted(g for g, p in pts.items() if p.n_exponent == 0.5)
        assert halves == [2, 4, 6, 8]
        for odd in (3, 5, 7):
            center = pts[Fraction(odd)].n_exponent
            assert center > pts[Fraction(odd * 100 - 1, 100)].n_exponent
            assert center > pts[Fraction(odd * 100 + 1, 100)].n_exponent

    def test_periodic_plateau_in_d_scale(self):
        # d-exponent is constant p + 1 on each (2j+1, 2j+2)
        for j in (0, 1, 2):
            vals = {
                rate_curve(Fraction(i, 1000), "inner").d_exponent
                for i in range((2 * j + 1) * 1000 + 1, (2 * j + 2) * 1000)
                if i % 37 == 0
            }
            assert vals == {float(j + 1)}

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            rate_curve(0.0, "inner")


class TestRateCurveNtk:
    def test_matched_half_set(self):
        for g in (2, 4, 8, 12):
            pt = rate_curve(g, "ntk")
            assert pt.n_exponent == 0.5 and pt.match_status == "matched"

    def test_p_definition_switches_at_four(self):
        assert rate_curve(3.0, "ntk").p == 1  # floor(3/2)
        assert rate_curve(5.0, "ntk").p == 2  # 2 floor(5/4)
        assert rate_curve(7.0, "ntk").p == 2
        assert rate_curve(9.0, "ntk").p == 4

    def test_log_branch_intervals(self):
        for g in (0.5, 1.0, 2.5, 3.0, 4.5, 6.0, 8.5):
            assert rate_curve(g, "ntk").log_factor, g
        for g in (1.5, 3.5, 6.5, 7.0, 10.5):
            assert not rate_curve(g, "ntk").log_factor, g

    def test_indicator_exponent_branch(self):
        # gamma in (4j+2, 4j+4): exponent (p + 1 + 1{p >= 2})/gamma
        pt = rate_curve(7.0, "ntk")
        assert pt.n_exponent == pytest.approx(4 / 7)
        pt = rate_curve(1.5, "ntk")
        assert pt.n_exponent == pytest.approx(1 / 1.5)

    def test_continuity(self):
        for edge in (1, 2, 3, 4, 6, 8, 10):
            lo = rate_curve(Fraction(edge * 1000 - 1, 1000), "ntk").n_exponent
            hi = rate_curve(Fraction(edge * 1000 + 1, 1000), "ntk").n_exponent
            assert abs(lo - hi) <= 3e-3, edge


class TestRateCurveInterpolation:
    def test_eta_three_halves(self):
        assert rate_curve(1.5, "interpolation").n_exponent == 1 / 3

    def test_eta_zero_at_integers(self):
        for g in (2, 3, 5):
            assert rate_curve(g, "interpolation").n_exponent == 0.0

    def test_upper_only_status(self):
        assert rate_curve(2.5, "interpolation").match_status == "upper_only"

    def test_requires_gamma_above_one(self):
        with pytest.raises(ValueError):
            rate_curve(1.0, "interpolation")

    def test_dominated_by_inner_everywhere(self):
        for i in range(101, 801):
            g = Fraction(i, 100)
            assert rate_curve(g, "interpolation").n_exponent < rate_curve(g, "inner").n_exponent


class TestRateTable:
    def test_empty_grid(self):
        assert rate_table([], ["inner"]) == []

    def test_collects_errors(self):
        errors = []
        pts = rate_table([0.5, 1.5], ["interpolation"], errors=errors)
        assert len(pts) == 1 and len(errors) == 1

    def test_grid_sweep_matches_pointwise(self):
        gammas = [Fraction(i, 10) for i in range(5, 40)]
        pts = rate_table(gammas, ["inner", "ntk"])
        assert len(pts) == 2 * len(gammas)
        assert pts[0] == rate_curve(gammas[0], "inner")
