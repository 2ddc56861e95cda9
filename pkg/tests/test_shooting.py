"""Integrators, monodromy, seeding, Gauss-Newton refinement, amplitude sweeps."""

from dataclasses import replace

import numpy as np
import pytest

from lyapcenter.conley import HypothesisError
from lyapcenter.critical_orbits import find_critical_orbits
from lyapcenter.potentials import parse_potential
from lyapcenter.shooting import (
    DivergenceError,
    amplitude_sweep,
    export_csv,
    integrate,
    refine_orbit,
    seed_from_linearization,
)
from lyapcenter.symmetry import BlockRotation

from oracles import radial_period

OSC = parse_potential("radial: 1/2*t")  # x'' = -x, period 2*pi
EX1 = parse_potential("radial: -2*t^2 + 5/3*t^3 - 1/4*t^4")
PLANE = BlockRotation(n=2, blocks=((0, 1),))


class TestIntegrate:
    def test_harmonic_oscillator_rk4(self):
        traj = integrate(OSC, [1.0, 0.0], [0.0, 0.0], 2.0 * np.pi,
                         steps=1024, method="rk4")
        err = np.linalg.norm(traj.final_state - np.array([1.0, 0.0, 0.0, 0.0]))
        assert err < 1e-8

    def test_verlet_is_second_order(self):
        errs = []
        for steps in (256, 512):
            traj = integrate(OSC, [1.0, 0.0], [0.0, 0.0], 2.0 * np.pi,
                             steps=steps, method="verlet")
            errs.append(np.linalg.norm(traj.final_state
                                       - np.array([1.0, 0.0, 0.0, 0.0])))
        assert 3.2 < errs[0] / errs[1] < 4.8

    def test_verlet_energy_stays_bounded(self):
        traj = integrate(EX1, [1.05, 0.0], [0.0, 0.0], 1.82, steps=4096)
        assert traj.energy_drift < 1e-6

    def test_harmonic_monodromy_is_identity_after_one_turn(self):
        traj = integrate(OSC, [0.3, -0.2], [0.1, 0.4], 2.0 * np.pi,
                         steps=2048, method="rk4", with_monodromy=True)
        assert np.linalg.norm(traj.monodromy - np.eye(4)) < 1e-7

    @pytest.mark.parametrize("method", ["verlet", "rk4"])
    def test_monodromy_differentiates_the_discrete_flow(self, method):
        x0 = np.array([1.05, 0.0])
        v0 = np.array([0.0, 0.1])
        T, steps = 1.0, 512
        traj = integrate(EX1, x0, v0, T, steps=steps, method=method,
                         with_monodromy=True)
        z0 = np.concatenate([x0, v0])
        eps = 1e-6
        fd = np.zeros((4, 4))
        for j in range(4):
            e = np.zeros(4)
            e[j] = eps
            zp = z0 + e
            zm = z0 - e
            tp = integrate(EX1, zp[:2], zp[2:], T, steps=steps, method=method)
            tm = integrate(EX1, zm[:2], zm[2:], T, steps=steps, method=method)
            fd[:, j] = (tp.final_state - tm.final_state) / (2.0 * eps)
        assert np.linalg.norm(traj.monodromy - fd) < 1e-6

    def test_domain_guard(self):
        spread = parse_potential("radial: -1/2*t")  # x'' = +x, runs away
        with pytest.raises(DivergenceError):
            integrate(spread, [1.0, 0.0], [0.0, 0.0], 10.0, steps=512,
                      bound_radius=5.0)

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            integrate(OSC, [1.0, 0.0], [0.0, 0.0], -1.0)
        with pytest.raises(ValueError):
            integrate(OSC, [1.0, 0.0], [0.0, 0.0], 1.0, method="euler")


class TestSeeding:
    def setup_method(self):
        self.records = find_critical_orbits(EX1, PLANE)

    def test_seed_geometry(self):
        state = seed_from_linearization(self.records[1], amplitude=0.05)
        assert state.x0 == pytest.approx([1.05, 0.0])
        assert state.v0 == pytest.approx([0.0, 0.0])
        assert state.period == pytest.approx(2.0 * np.pi / np.sqrt(12.0))
        assert state.beta == pytest.approx(np.sqrt(12.0))

    def test_ineligible_orbits_are_refused(self):
        with pytest.raises(HypothesisError, match="no positive eigenvalue"):
            seed_from_linearization(self.records[2])
        with pytest.raises(HypothesisError):
            seed_from_linearization(self.records[0])

    def test_amplitude_must_be_positive(self):
        with pytest.raises(ValueError):
            seed_from_linearization(self.records[1], amplitude=0.0)


class TestRefinement:
    def setup_method(self):
        self.records = find_critical_orbits(EX1, PLANE)
        self.s1 = self.records[1]

    def test_residual_and_release_from_rest(self):
        sol = refine_orbit(EX1, self.s1, PLANE, amplitude=0.05)
        assert sol.residual_norm <= 1e-10
        assert np.linalg.norm(sol.v0) < 1e-9
        assert sol.x0 == pytest.approx([1.05, 0.0], abs=1e-9)
        assert sol.period_multiplier == 1
        assert sol.energy_drift < 1e-6

    def test_period_matches_quadrature_oracle(self):
        sol = refine_orbit(EX1, self.s1, PLANE, amplitude=0.05)
        assert abs(sol.period - radial_period(EX1, 1.05)) < 1e-6

    def test_rk4_agrees_with_verlet(self):
        a = refine_orbit(EX1, self.s1, PLANE, amplitude=0.05)
        b = refine_orbit(EX1, self.s1, PLANE, amplitude=0.05, method="rk4")
        # the verlet period carries an O(h^2) discretization bias
        assert abs(a.period - b.period) < 2e-6

    def test_doubled_window_reports_minimal_period(self):
        st = seed_from_linearization(self.s1, amplitude=0.05)
        st2 = replace(st, period=2.0 * st.period)
        # doubled steps keep h equal to the single-period run
        sol = refine_orbit(EX1, self.s1, PLANE, state=st2, steps=4096)
        assert sol.period_multiplier == 2
        assert abs(sol.minimal_period - 0.5 * sol.period) < 1e-12
        ref = refine_orbit(EX1, self.s1, PLANE, amplitude=0.05)
        assert abs(sol.minimal_period - ref.period) < 1e-6

    def test_tight_domain_bound_propagates(self):
        with pytest.raises(DivergenceError):
            refine_orbit(EX1, self.s1, PLANE, amplitude=0.05, bound_radius=1.0)

    def test_floquet_contains_unit_pair(self):
        sol = refine_orbit(EX1, self.s1, PLANE, amplitude=0.05)
        mags = sorted(abs(m) for m in sol.floquet)
        assert np.allclose(mags, 1.0, atol=1e-4)


class TestSweep:
    def test_periods_converge_monotonically(self):
        records = find_critical_orbits(EX1, PLANE)
        sweep = amplitude_sweep(EX1, records[1], PLANE,
                                amplitudes=(0.1, 0.03, 0.01))
        assert not sweep.failures
        target = 2.0 * np.pi / np.sqrt(12.0)
        gaps = [abs(T - target) for T in sweep.periods]
        assert all(a > b for a, b in zip(gaps, gaps[1:]))
        assert gaps[-1] < 1e-3
        assert all(s.residual_norm <= 1e-10 for s in sweep.solutions)


def test_export_csv(tmp_path):
    records = find_critical_orbits(EX1, PLANE)
    sol = refine_orbit(EX1, records[1], PLANE, amplitude=0.05, steps=256)
    out = tmp_path / "orbit.csv"
    export_csv(sol, out)
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "t,x1,x2,v1,v2,E"
    assert len(lines) == 258
    first = [float(c) for c in lines[1].split(",")]
    assert first[0] == 0.0
    assert first[1] == pytest.approx(1.05)
