"""Semiclassical p-spin energy and the quantum stoquasticity sweep."""

from __future__ import annotations

import numpy as np
import pytest

import morseaqc as m

SPINODAL_P5 = 0.3811269542  # fold of the magnetized well: 1/(1 + 5 sin^3(pi/3) cos(pi/3))


class TestClassicalMinimizer:
    def test_p2_closed_form(self):
        energy = m.ClassicalEnergy(p=2, b=1.0)
        theta = m.classical_minimizer(energy, 0.8)
        assert np.cos(theta) == pytest.approx((1 - 0.8) / (2 * 0.8), abs=1e-7)

    def test_p2_formula_across_range(self):
        # matches theta = pi - arccos((s-1)/2s) wherever |(1-s)/2s| <= 1
        energy = m.ClassicalEnergy(p=2, b=1.0)
        for s in np.linspace(0.4, 1.0, 31):
            theta = m.classical_minimizer(energy, float(s))
            expected = np.pi - np.arccos((s - 1) / (2 * s))
            assert abs(theta - expected) < 1e-6

    def test_small_s_transverse_phase(self):
        for p in (2, 3, 5):
            theta = m.classical_minimizer(m.ClassicalEnergy(p=p, b=1.0), 0.02)
            assert theta == pytest.approx(0.0, abs=1e-6)

    def test_p5_magnetized_past_transition(self):
        theta = m.classical_minimizer(m.ClassicalEnergy(p=5, b=1.0), 0.5)
        assert theta > 1.0  # deep in the large-angle well

    def test_requires_unit_interval(self):
        with pytest.raises(m.InvalidArgumentError):
            m.classical_minimizer(m.ClassicalEnergy(p=2), 1.5)


class TestTransitionLocator:
    def test_p5_first_order(self):
        events = m.transition_locator(m.ClassicalEnergy(p=5, b=1.0))
        assert len(events) == 1
        assert 0.37 <= events[0].s_star <= 0.39
        assert events[0].s_star == pytest.approx(SPINODAL_P5, abs=2e-3)
        assert events[0].jump > 0.1

    def test_p2_second_order(self):
        assert m.transition_locator(m.ClassicalEnergy(p=2, b=1.0)) == []

    def test_p5_nonstoquastic_softened(self):
        # b = 0.1, k = 2: the jump disappears
        assert m.transition_locator(m.ClassicalEnergy(p=5, k=2, b=0.1)) == []

    def test_global_mode_reports_value_crossing(self):
        events = m.transition_locator(m.ClassicalEnergy(p=5, b=1.0), mode="global")
        assert len(events) == 1
        # the two wells' values cross later than the fold
        assert 0.46 <= events[0].s_star <= 0.48

    def test_resolution_guard(self):
        with pytest.raises(m.InvalidArgumentError):
            m.transition_locator(m.ClassicalEnergy(p=5), s_resolution=1e-2)


class TestBSweep:
    def test_single_point_two_level(self):
        records = m.b_sweep(1, 1, 2, b_grid=[1.0])
        assert len(records) == 1
        r = records[0]
        assert not r.flagged
        assert r.counts == (0, 1, 0)
        assert r.chi == -1

    def test_small_coarse_sweep_constant_chi(self):
        records = m.b_sweep(3, 3, 2, b_grid=np.linspace(0, 1, 5))
        chis = {r.chi for r in records if not r.flagged}
        assert len(chis) == 1
        verdict = m.homotopy_check(records)
        assert verdict.passed

    def test_homotopy_check_rejects_unequal_chi(self):
        a = m.BSweepRecord(b=0.0, counts=(1, 1, 2), chi=2, flagged=False, census=None)
        b = m.BSweepRecord(b=1.0, counts=(1, 2, 2), chi=1, flagged=False, census=None)
        verdict = m.homotopy_check([a, b])
        assert not verdict.passed
        assert any("Euler" in msg for msg in verdict.failures)

    def test_homotopy_check_accepts_pair_birth(self):
        a = m.BSweepRecord(b=0.0, counts=(1, 2, 1), chi=0, flagged=False, census=None)
        b = m.BSweepRecord(b=1.0, counts=(1, 1, 0), chi=0, flagged=False, census=None)
        assert m.homotopy_check([a, b]).passed

    def test_homotopy_check_rejects_odd_change(self):
        # artificial records: a missed point shows up as an odd total change
        a = m.BSweepRecord(b=0.0, counts=(1, 1, 1), chi=1, flagged=False, census=None)
        b = m.BSweepRecord(b=1.0, counts=(2, 1, 1), chi=1, flagged=False, census=None)
        verdict = m.homotopy_check([a, b])
        assert not verdict.passed
        assert any("odd" in msg for msg in verdict.failures)

    def test_rejects_out_of_range_grid(self):
        with pytest.raises(m.InvalidArgumentError):
            m.b_sweep(3, 3, 2, b_grid=[0.5, 1.2])

    def test_rejects_large_sector(self):
        with pytest.raises(m.InvalidArgumentError):
            m.b_sweep(15, 3, 2, b_grid=[1.0])


class TestEnergyForm:
    def test_stoquastic_kills_nonstoquastic_term(self):
        e1 = m.ClassicalEnergy(p=4, k=2, b=1.0)
        e2 = m.ClassicalEnergy(p=4, k=6, b=1.0)
        s = np.linspace(0, 1, 11)
        th = np.linspace(0, np.pi, 13)
        assert np.allclose(e1.value(s[:, None], th[None, :]),
                           e2.value(s[:, None], th[None, :]))

    def test_continuity(self):
        e = m.ClassicalEnergy(p=5, k=2, b=0.3)
        s = np.linspace(0, 1, 101)
        th = np.linspace(0, np.pi, 101)
        vals = e.value(s[:, None], th[None, :])
        assert np.all(np.isfinite(vals))

    def test_validation(self):
        with pytest.raises(m.InvalidArgumentError):
            m.ClassicalEnergy(p=0)
        with pytest.raises(m.InvalidArgumentError):
            m.ClassicalEnergy(p=2, b=1.4)
