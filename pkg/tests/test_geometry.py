"""Curvature, Dupin gap model, delay factor, Gauss-Bonnet, spectrum."""

from __future__ import annotations

import numpy as np
import pytest
from scipy.integrate import quad

import morseaqc as m
import morseaqc.fields as fields


def grover_report(N):
    field = m.CharPolyField(m.build_grover_reduced(N))
    census = m.find_critical_points(field)
    return field, census.points[0], m.curvature_report(field, census.points[0])


class TestCurvature:
    def test_grover_K(self):
        _, _, r = grover_report(4)
        assert r.K == pytest.approx(-4 * (1 - 1 / 4), rel=1e-9)

    def test_flat_field(self):
        f = m.polynomial_field({(0, 0): 5.0}, m.Window(-1, 1, -1, 1))
        assert m.gauss_curvature(f, 0.2, -0.3) == pytest.approx(0.0, abs=1e-12)

    def test_bowl_curvature_at_bottom(self):
        f = fields.bowl_field()
        assert m.gauss_curvature(f, 0.0, 0.0) == pytest.approx(4.0, rel=1e-10)

    def test_printed_numerator_switch_differs_off_critical(self):
        f = fields.bowl_field()
        standard = m.gauss_curvature(f, 0.3, 0.4)
        printed = m.gauss_curvature(f, 0.3, 0.4, printed_numerator=True)
        assert standard != pytest.approx(printed)

    def test_principal_curvatures(self):
        for N in (4, 64):
            _, p, _ = grover_report(N)
            k1, k2 = m.principal_curvatures(m.CharPolyField(m.build_grover_reduced(N)), p)
            assert k1 == pytest.approx(-2 * (N - 1) / N, rel=1e-9)
            assert k2 == pytest.approx(2.0, rel=1e-9)

    def test_saddle_principal_pair(self):
        f = fields.saddle_field()
        census = m.find_critical_points(f)
        assert m.principal_curvatures(f, census.points[0]) == pytest.approx((-2.0, 2.0))

    def test_reversed_bowl(self):
        f = fields.quadratic_field(-2.0, -2.0)
        census = m.find_critical_points(f)
        assert m.principal_curvatures(f, census.points[0]) == pytest.approx((-2.0, -2.0))

    def test_degenerate_rejected(self):
        f = fields.monkey_saddle_field()
        census = m.find_critical_points(f)
        with pytest.raises(m.DegenerateCriticalPointError):
            m.principal_curvatures(f, census.points[0])


class TestDupinGap:
    def test_grover_center_gap(self):
        for N in (4, 1024):
            _, _, r = grover_report(N)
            assert m.dupin_gap(r, 0.5) == pytest.approx(1 / np.sqrt(N), rel=1e-9)

    def test_grover_endpoint_gap(self):
        _, _, r = grover_report(4)
        assert m.dupin_gap(r, 0.0) == pytest.approx(1.0, rel=1e-9)

    def test_exactness_on_quadratic_landscape(self):
        # globally quadratic f: conic gap equals the diagonalization gap
        N = 1024
        field, _, r = grover_report(N)
        path = field.path
        ss = np.linspace(0, 1, 101)
        exact = np.array([np.diff(m.eigenvalues(m.evaluate(path, float(s))))[0] for s in ss])
        model = m.dupin_gap(r, ss)
        assert np.max(np.abs(model - exact) / exact) < 1e-9

    def test_touching_cone(self):
        # saddle at level zero: slice through the center has zero gap
        f = fields.saddle_field()
        census = m.find_critical_points(f)
        r = m.curvature_report(f, census.points[0])
        assert m.dupin_gap(r, 0.0) == pytest.approx(0.0, abs=1e-9)

    def test_no_intersection(self):
        # positive level with f_lamlam > 0: vertical slice misses the conic
        f = fields.quadratic_field(2.0, -2.0, level=-0.1)
        census = m.find_critical_points(f)
        r = m.curvature_report(f, census.points[0])
        # here the roles flip: the transverse direction has k < 0 and the
        # level is negative, so slices near the center miss the local conic
        with pytest.raises(m.NoIntersectionError):
            m.dupin_gap(r, 0.0)

    def test_third_order_local_accuracy_pspin(self):
        # |conic gap - exact gap| = O(ds^3) at the minimum-gap saddle;
        # the conic model holds out to |ds| ~ 1e-2 on this landscape
        path = m.build_pspin(7, 5, 1.0, 2)
        w = m.window_from_path(path, s_margin=0.1, lam_margin=0.5)
        field = m.CharPolyField(path, window=w)
        census = m.find_critical_points(field)
        saddles = census.by_index(1)

        def exact_gap(s_arr, channel):
            H = path.matrix_stack(np.asarray(s_arr))
            mu = np.linalg.eigvalsh(0.5 * (H + np.swapaxes(H, -1, -2)))
            return mu[:, channel + 1] - mu[:, channel]

        def channel_of(p):
            mu = m.eigenvalues(m.evaluate(path, min(max(p.s, 0.0), 1.0)))
            return int(np.argmin(np.abs(0.5 * (mu[1:] + mu[:-1]) - p.lam)))

        gaps = []
        for p in saddles:
            ch = channel_of(p)
            gaps.append((float(exact_gap([p.s], ch)[0]), p, ch))
        gap0, p0, ch = min(gaps, key=lambda t: t[0])
        assert gap0 < 1e-3   # the near-degenerate avoided crossing
        r = m.curvature_report(field, p0)
        deltas = np.logspace(-3, -2, 9)
        ss = p0.s - deltas   # stay inside the evolution domain
        err = np.abs(m.dupin_gap(r, ss) - exact_gap(ss, ch))
        slope = np.polyfit(np.log(deltas), np.log(err), 1)[0]
        assert slope >= 2.5


class TestDelayFactor:
    def test_grover4_closed_form(self):
        _, _, r = grover_report(4)
        expected = 4 * np.pi / (3 * np.sqrt(3))
        # independent oracle: adaptive quadrature of 1/(1 - 3s + 3s^2)
        oracle, _ = quad(lambda s: 1.0 / (1 - 3 * s + 3 * s ** 2), 0, 1, epsabs=1e-14)
        assert oracle == pytest.approx(expected, rel=1e-10)
        assert m.delay_factor(r, (0.0, 1.0)) == pytest.approx(expected, rel=1e-8)

    def test_closed_form_cross_check(self):
        _, _, r = grover_report(16)
        v = m.delay_factor(r, (0.0, 1.0))
        c = m.delay_factor_closed_form(r, (0.0, 1.0))
        assert c == pytest.approx(v, rel=1e-9)

    @pytest.mark.parametrize("n_exp", [8, 12, 16, 20])
    def test_speedup_asymptotics(self, n_exp):
        N = 2 ** n_exp
        _, _, r = grover_report(N)
        d = m.delay_factor(r, (0.0, 1.0))
        target = (np.pi / 2) * np.sqrt(N) - 1
        assert abs(d - target) <= (3 / np.sqrt(N)) * (np.pi / 2) * np.sqrt(N)

    def test_asymptotic_ratio_monotone(self):
        ratios = []
        for n_exp in (8, 12, 16, 20):
            N = 2 ** n_exp
            _, _, r = grover_report(N)
            ratios.append(m.delay_factor(r, (0.0, 1.0)) / np.sqrt(N))
        # rises toward pi/2 through the sequence
        assert all(a < b for a, b in zip(ratios, ratios[1:]))
        assert ratios[-1] < np.pi / 2

    def test_nearly_constant_gap(self):
        # almost-flat saddle channel: g(s) ~ c, integral over [0,1] -> 1/c^2
        f = fields.quadratic_field(-1e-6, 2.0, window=m.Window(-1, 1, -1, 1), level=-0.02)
        census = m.find_critical_points(f)
        [p] = census.points
        r = m.curvature_report(f, p)
        c = m.dupin_gap(r, 0.5)
        assert m.delay_factor(r, (0.0, 1.0)) == pytest.approx(1 / c ** 2, rel=1e-4)

    def test_divergent_delay(self):
        # saddle with zero level: the gap vanishes at the center slice
        f = fields.saddle_field()
        census = m.find_critical_points(f)
        r = m.curvature_report(f, census.points[0])
        with pytest.raises(m.DivergentDelayError):
            m.delay_factor(r, (-0.5, 0.5))


class TestGaussBonnet:
    def test_quadratic_saddle_budget(self):
        w = m.Window(-50, 50, -50, 50)
        gb = m.gauss_bonnet_integral(fields.quadratic_field(-2.0, 2.0, w),
                                     quadrature_density=256)
        assert gb.value == pytest.approx(-2 * np.pi, rel=0.05)
        assert gb.converged

    def test_bowl_budget(self):
        w = m.Window(-50, 50, -50, 50)
        gb = m.gauss_bonnet_integral(fields.quadratic_field(2.0, 2.0, w),
                                     quadrature_density=256)
        assert gb.value == pytest.approx(2 * np.pi, rel=0.05)

    def test_flat_field_zero(self):
        f = m.polynomial_field({(0, 0): 1.0}, m.Window(-5, 5, -5, 5))
        gb = m.gauss_bonnet_integral(f, quadrature_density=64)
        assert gb.value == pytest.approx(0.0, abs=1e-12)

    def test_window_total_matches_index_sum(self):
        # steep confining far field localizes all curvature at the three
        # critical points: total = 2 pi (sum of (-1)^index) = 2 pi
        w = m.Window(-6, 6, -6, 6)
        f = m.polynomial_field({(4, 0): 1.0, (2, 0): -2.0, (0, 0): 1.0,
                                (0, 2): 1.0, (0, 4): 1.0}, w, label="confined-double-well")
        census = m.find_critical_points(f)
        index_sum = sum((-1) ** p.index for p in census.points)
        assert index_sum == 1
        gb = m.gauss_bonnet_integral(f, quadrature_density=256)
        assert gb.value == pytest.approx(2 * np.pi * index_sum, rel=0.05)


class TestSpectrumTrace:
    def test_grover_min_gap(self):
        path = m.build_grover_reduced(4)
        branches = m.spectrum_trace(path, np.linspace(0, 1, 101))
        assert len(branches) == 2
        assert sorted(b.values[0] for b in branches) == pytest.approx([0.0, 1.0], abs=1e-12)
        assert branches[0].min_gap_to_next == pytest.approx(0.5, rel=1e-9)
        assert branches[0].min_gap_location == pytest.approx(0.5, abs=1e-2)

    def test_pspin_symmetric_at_zero(self):
        branches = m.spectrum_trace(m.build_pspin(2, 1, 1.0), np.linspace(0, 1, 41))
        start = sorted(b.values[0] for b in branches)
        assert start == pytest.approx([-2.0, 0.0, 2.0], abs=1e-10)

    def test_constant_path(self):
        path = m.HamiltonianPath([(m.affine_coefficient(1.0, 0.0),
                                   m.HermitianOperator(np.diag([1.0, 2.0, 3.0])))])
        branches = m.spectrum_trace(path, np.linspace(0, 1, 21))
        for b in branches:
            assert np.ptp(b.values) == pytest.approx(0.0, abs=1e-13)

    def test_branch_samples_satisfy_level_set(self):
        path = m.build_pspin(7, 5, 1.0, 2)
        field = m.CharPolyField(path)
        branches = m.spectrum_trace(path, np.linspace(0, 1, 101), field)
        scale = field.spectrum_scale()
        for b in branches:
            resid = np.abs(field.value(b.s, b.values))
            assert np.max(resid) <= 1e-9 * scale

    def test_exact_crossing_flagged(self):
        # fully non-stoquastic path commutes with S_x: exact crossings
        branches = m.spectrum_trace(m.build_pspin(3, 2, 0.0, 2), np.linspace(0, 1, 101))
        assert any(b.flagged for b in branches)
