import numpy as np
import pytest

from pseudobath.dynamics import evolve
from pseudobath.model import (
    BathModel,
    InitialState,
    LorentzPeak,
    SystemHamiltonian,
    TimeGrid,
    lorentz_correlation,
)
from pseudobath.pseudomode import build_effective_hamiltonian
from pseudobath.volterra import (
    GridMismatchError,
    StepTooCoarseError,
    compare_trajectories,
    solve_cutoff_family,
    solve_integro_differential,
    solve_renormalized,
)

PSI0 = np.array([1.0 + 0.0j])


def peak_kernel(*peaks):
    peaks = tuple(peaks)
    return lambda t: lorentz_correlation(peaks, t)


class TestIntegroDifferential:
    def test_memoryless_limit(self):
        h = SystemHamiltonian(np.array([[1.0]]))
        traj = solve_integro_differential(h, None, PSI0, np.pi, 2000)
        assert abs(traj.states[-1, 0] - (-1.0)) < 1e-5

    def test_matches_pseudomode_route(self):
        # two independent derivations of the same dynamics
        peak = LorentzPeak(g=0.5, gamma=0.2, epsilon=0.0)
        h = SystemHamiltonian(np.zeros((1, 1)))
        oracle = solve_integro_differential(h, peak_kernel(peak), PSI0, 10.0, 4000)
        heff = build_effective_hamiltonian(h, BathModel(peaks=(peak,)))
        init = InitialState(psi=PSI0, psi0=0.0)
        traj = evolve(heff, init, TimeGrid(oracle.times))
        assert compare_trajectories(traj, oracle) < 1e-6

    def test_second_order_convergence(self):
        peak = LorentzPeak(g=1.5, gamma=0.5, epsilon=1.0)
        h = SystemHamiltonian(np.array([[0.8]]))
        kernel = peak_kernel(peak)
        fine = solve_integro_differential(h, kernel, PSI0, 10.0, 16000)
        errs = []
        for steps in (1000, 2000, 4000):
            traj = solve_integro_differential(h, kernel, PSI0, 10.0, steps)
            errs.append(compare_trajectories(traj, fine))
        orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
        assert all(1.7 <= p <= 2.3 for p in orders)

    def test_extrapolation_improves_accuracy(self):
        peak = LorentzPeak(g=2.0, gamma=0.3, epsilon=2.0)
        h = SystemHamiltonian(np.array([[1.0]]))
        heff = build_effective_hamiltonian(h, BathModel(peaks=(peak,)))
        lam, v = np.linalg.eig(heff.matrix)
        c = np.linalg.solve(v, np.array([1.0, 0.0], dtype=complex))
        kernel = peak_kernel(peak)
        plain = solve_integro_differential(h, kernel, PSI0, 10.0, 4000)
        extra = solve_integro_differential(h, kernel, PSI0, 10.0, 4000, extrapolate=True)
        exact = (v[0, :] * (np.exp(-1j * np.outer(plain.times, lam)) * c)).sum(axis=1)
        err_plain = np.abs(plain.states[:, 0] - exact).max()
        err_extra = np.abs(extra.states[:, 0] - exact).max()
        assert err_extra < err_plain / 50
        assert err_extra < 1e-7

    def test_norm_bounded_for_lorentz_kernel(self):
        peak = LorentzPeak(g=1.0, gamma=1.0, epsilon=0.0)
        h = SystemHamiltonian(np.array([[0.0]]))
        traj = solve_integro_differential(h, peak_kernel(peak), PSI0, 10.0, 2000)
        norms = np.linalg.norm(traj.states, axis=1)
        assert norms.max() <= 1.0 + 10 * traj.step


class TestRenormalized:
    def test_eta_zero_identical(self):
        peak = LorentzPeak(g=0.7, gamma=0.9, epsilon=-0.4)
        h = SystemHamiltonian(np.array([[0.6]]))
        a = solve_integro_differential(h, peak_kernel(peak), PSI0, 5.0, 500)
        b = solve_renormalized(h, 0.0, peak_kernel(peak), PSI0, 5.0, 500)
        np.testing.assert_array_equal(a.states, b.states)

    def test_scalar_closed_form(self):
        # G_c = 0: psi(t) = psi(0)/(1+i eta/2) * exp(-i E t/(1+i eta/2))
        eta, energy = 1.2, 0.8
        h = SystemHamiltonian(np.array([[energy]]))
        traj = solve_renormalized(h, eta, None, PSI0, 4.0, 4000)
        f = 1.0 / (1.0 + 0.5j * eta)
        exact = f * np.exp(-1j * energy * f * traj.times)
        assert np.abs(traj.states[:, 0] - exact).max() < 1e-6

    def test_matches_ohmic_pseudomode_route(self):
        peak = LorentzPeak(g=0.5, gamma=1.0, epsilon=0.3)
        h = SystemHamiltonian(np.array([[1.0]]))
        eta = 1.0
        oracle = solve_renormalized(
            h, eta, peak_kernel(peak), PSI0, 10.0, 4000, extrapolate=True
        )
        heff = build_effective_hamiltonian(h, BathModel(peaks=(peak,), eta=eta))
        init = InitialState(psi=PSI0, psi0=0.0)
        traj = evolve(heff, init, TimeGrid(oracle.times))
        assert compare_trajectories(traj, oracle) < 1e-6


class TestCutoffFamily:
    def test_eta_zero_reduces_to_plain_solver(self):
        peak = LorentzPeak(g=0.8, gamma=0.7, epsilon=0.1)
        h = SystemHamiltonian(np.array([[0.5]]))
        plain = solve_integro_differential(h, peak_kernel(peak), PSI0, 2.0, 400)
        family = solve_cutoff_family(h, 0.0, [50.0], peak_kernel(peak), PSI0, 2.0, 400)
        np.testing.assert_allclose(family[0].states, plain.states, atol=1e-14)

    def test_step_too_coarse_rejected(self):
        h = SystemHamiltonian(np.array([[1.0]]))
        with pytest.raises(StepTooCoarseError):
            solve_cutoff_family(h, 0.5, [1000.0], None, PSI0, 5.0, 100)

    def test_counterterm_cancellation_keeps_trajectories_bounded(self):
        h = SystemHamiltonian(np.array([[1.0]]))
        family = solve_cutoff_family(h, 0.5, [20.0, 40.0], None, PSI0, 5.0, 4000)
        for traj in family:
            assert np.linalg.norm(traj.states, axis=1).max() <= 2.0

    def test_converges_to_renormalized_limit(self):
        h = SystemHamiltonian(np.array([[1.0]]))
        eta = 0.5
        ref = solve_renormalized(h, eta, None, PSI0, 5.0, 8000, extrapolate=True)
        family = solve_cutoff_family(h, eta, [20.0, 80.0], None, PSI0, 5.0, 8000)
        mask = ref.times >= 0.5
        devs = [
            np.linalg.norm(traj.states - ref.states, axis=1)[mask].max()
            for traj in family
        ]
        assert devs[1] < devs[0]


class TestCompare:
    def test_identical_is_zero(self):
        h = SystemHamiltonian(np.array([[0.3]]))
        traj = solve_integro_differential(h, None, PSI0, 1.0, 100)
        assert compare_trajectories(traj, traj) == 0.0
        assert compare_trajectories(traj, traj, norm="L2") == 0.0

    def test_grid_mismatch(self):
        h = SystemHamiltonian(np.array([[0.3]]))
        a = solve_integro_differential(h, None, PSI0, 1.0, 100)
        b = solve_integro_differential(h, None, PSI0, 0.7713, 100)
        with pytest.raises(GridMismatchError):
            compare_trajectories(a, b)

    def test_refined_grid_comparison_uses_shared_points(self):
        h = SystemHamiltonian(np.array([[0.3]]))
        a = solve_integro_differential(h, None, PSI0, 1.0, 100)
        b = solve_integro_differential(h, None, PSI0, 1.0, 200)
        assert compare_trajectories(a, b) < 1e-5

    def test_shift_by_one_point_scales_with_derivative(self):
        h = SystemHamiltonian(np.array([[2.0]]))
        traj = solve_integro_differential(h, None, PSI0, 5.0, 1000)
        shifted = np.roll(traj.states, 1, axis=0)
        diff = np.abs(traj.states[1:] - shifted[1:]).max()
        # |dpsi/dt| = |E| = 2, h = 0.005
        assert diff == pytest.approx(2.0 * traj.step, rel=0.05)
