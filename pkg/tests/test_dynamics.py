import numpy as np
import pytest

from pseudobath.dynamics import (
    ExtendedState,
    NormExceededError,
    evolve,
    evolve_closed,
    observables,
    reduced_density,
)
from pseudobath.model import BathModel, InitialState, LorentzPeak, SystemHamiltonian, TimeGrid
from pseudobath.pseudomode import build_effective_hamiltonian


def scalar_setup(g, gamma, epsilon=0.0, e0=0.0):
    h = SystemHamiltonian(np.array([[e0]]))
    bath = BathModel(peaks=(LorentzPeak(g=g, gamma=gamma, epsilon=epsilon),))
    heff = build_effective_hamiltonian(h, bath)
    init = InitialState(psi=np.array([1.0 + 0.0j]), psi0=0.0)
    return heff, init


class TestEvolve:
    def test_pseudomodes_start_at_zero(self):
        heff, init = scalar_setup(0.5, 0.2)
        traj = evolve(heff, init, TimeGrid.uniform(1.0, 11))
        assert np.linalg.norm(traj.states[0].pseudomode(1)) == 0.0
        np.testing.assert_array_equal(traj.states[0].system_part, init.psi)

    def test_decoupled_limit_constant(self):
        heff, init = scalar_setup(1e-12, 1.0)
        traj = evolve(heff, init, TimeGrid.uniform(1.0, 11))
        sys = traj.system_parts()
        assert np.abs(sys - sys[0]).max() < 1e-9

    def test_rabi_limit_tiny_width(self):
        # gamma -> 0: the system-pseudomode pair is a bare two-level rotation
        heff, init = scalar_setup(1.0, 1e-9)
        traj = evolve(heff, init, TimeGrid(np.array([0.0, np.pi / 2])))
        assert abs(np.linalg.norm(traj.states[-1].system_part) - abs(np.cos(np.pi / 2))) < 1e-4

    def test_matches_matrix_exponential(self):
        heff, init = scalar_setup(0.5, 0.2)
        grid = TimeGrid(np.array([0.0, 1.0, 5.0, 10.0]))
        traj = evolve(heff, init, grid)
        lam, v = np.linalg.eig(heff.matrix)
        c = np.linalg.solve(v, np.array([1.0, 0.0], dtype=complex))
        for t, state in zip(grid.points, traj.states):
            exact = v @ (np.exp(-1j * lam * t) * c)
            assert np.abs(state.vector - exact).max() < 1e-8

    def test_renormalized_initial_condition(self):
        h = SystemHamiltonian(np.array([[1.0]]))
        bath = BathModel(peaks=(LorentzPeak(0.5, 1.0, 0.0),), eta=1.0)
        heff = build_effective_hamiltonian(h, bath)
        init = InitialState(psi=np.array([1.0 + 0.0j]), psi0=0.0)
        grid = TimeGrid.uniform(1.0, 3)
        scaled = evolve(heff, init, grid)
        bare = evolve(heff, init, grid, renormalize_init=False)
        f = 1.0 / (1.0 + 0.5j)
        assert scaled.states[0].system_part[0] == pytest.approx(f)
        assert bare.states[0].system_part[0] == pytest.approx(1.0)


class TestReducedDensity:
    def test_theorem_substitution(self):
        state = ExtendedState(n=1, k=0, vector=np.array([0.6 + 0.0j]))
        init = InitialState(psi=np.array([0.6]), psi0=0.8)
        rho = reduced_density(state, init).matrix
        np.testing.assert_allclose(rho, np.array([[0.64, 0.48], [0.48, 0.36]]), atol=1e-15)
        assert np.trace(rho).real == pytest.approx(1.0)

    def test_full_decay_is_pure_ground(self):
        state = ExtendedState(n=2, k=0, vector=np.zeros(2, dtype=complex))
        init = InitialState(psi=np.array([1.0, 0.0]), psi0=0.0)
        rho = reduced_density(state, init).matrix
        np.testing.assert_allclose(rho, np.diag([1.0, 0.0, 0.0]), atol=1e-15)

    def test_initial_excited_state_rank_one(self):
        psi = np.array([0.6, 0.8j])
        state = ExtendedState(n=2, k=0, vector=psi.astype(complex))
        init = InitialState(psi=psi, psi0=0.0)
        rho = reduced_density(state, init).matrix
        assert rho[0, 0] == pytest.approx(0.0, abs=1e-15)
        eigs = np.sort(np.linalg.eigvalsh(rho))
        np.testing.assert_allclose(eigs, [0.0, 0.0, 1.0], atol=1e-12)

    def test_norm_overflow_rejected(self):
        state = ExtendedState(n=1, k=0, vector=np.array([1.1 + 0.0j]))
        init = InitialState(psi=np.array([1.0]), psi0=0.0)
        with pytest.raises(NormExceededError):
            reduced_density(state, init)


class TestObservables:
    def test_initial_population(self):
        heff, init = scalar_setup(0.5, 0.2)
        traj = evolve(heff, init, TimeGrid.uniform(1.0, 5))
        obs = observables(traj, init)
        assert obs[0][1] == pytest.approx(1.0)
        for _, excited, ground, _ in obs:
            assert excited + ground == pytest.approx(1.0, abs=0.0)

    def test_closed_system_population_constant(self):
        h = SystemHamiltonian(np.array([[0.0, 0.4], [0.4, 1.0]]))
        init = InitialState(psi=np.array([1.0, 0.0], dtype=complex), psi0=0.0)
        traj = evolve_closed(h, init, TimeGrid.uniform(10.0, 41))
        obs = observables(traj, init)
        pops = [o[1] for o in obs]
        assert max(abs(p - 1.0) for p in pops) < 1e-9

    def test_dissipative_population_decays(self):
        heff, init = scalar_setup(0.5, 1.0)
        traj = evolve(heff, init, TimeGrid.uniform(20.0, 201))
        obs = observables(traj, init)
        assert obs[-1][1] < 0.05

    def test_norm_non_increasing_when_dilatable(self):
        heff, init = scalar_setup(0.8, 0.5, epsilon=0.3)
        traj = evolve(heff, init, TimeGrid.uniform(10.0, 101))
        norms = np.array([s.norm for s in traj.states])
        assert np.all(np.diff(norms) <= 1e-9)

    def test_rho_invariants_along_trajectory(self):
        heff, init = scalar_setup(1.0, 0.4, epsilon=-0.7, e0=0.5)
        traj = evolve(heff, init, TimeGrid.uniform(10.0, 51))
        for _, _, _, rho in observables(traj, init):
            m = rho.matrix
            assert np.abs(m - m.conj().T).max() < 1e-10
            assert abs(np.trace(m).real - 1.0) < 1e-10
            assert np.linalg.eigvalsh(m).min() > -1e-10
