"""Time evolution of the extended state and reduced-density-matrix
reconstruction.

The extended state stacks the system amplitudes with one pseudomode copy per
Lorentz peak.  Tracing out the reservoirs maps the system part straight onto
an (N+1) x (N+1) density matrix: the ground population is the missing norm.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import integrate_linear_ode
from .model import InitialState, SystemHamiltonian, TimeGrid
from .pseudomode import EffectiveHamiltonian, _scale_factor


class NormExceededError(Exception):
    """System norm grew beyond 1: integrator failure or non-dilatable model."""


@dataclass(frozen=True)
class ExtendedState:
    """System amplitudes plus K pseudomode copies, stacked as one vector."""

    n: int
    k: int
    vector: np.ndarray

    @property
    def system_part(self) -> np.ndarray:
        return self.vector[: self.n]

    def pseudomode(self, j: int) -> np.ndarray:
        """Amplitudes of pseudomode j (1-based, matching the bath peaks)."""
        if not 1 <= j <= self.k:
            raise IndexError(f"pseudomode index {j} out of range 1..{self.k}")
        return self.vector[j * self.n : (j + 1) * self.n]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))


@dataclass(frozen=True)
class Trajectory:
    grid: TimeGrid
    states: tuple[ExtendedState, ...]

    def __post_init__(self):
        if len(self.grid) != len(self.states):
            raise ValueError("grid and state list lengths differ")

    def system_parts(self) -> np.ndarray:
        """(T, N) array of system amplitudes along the grid."""
        return np.array([s.system_part for s in self.states])


@dataclass(frozen=True)
class ReducedDensityMatrix:
    """(N+1) x (N+1) Hermitian, trace-1, PSD density matrix; index 0 is the
    ground state."""

    matrix: np.ndarray

    HERMITICITY_TOL = 1e-10
    TRACE_TOL = 1e-10
    PSD_TOL = 1e-10

    @property
    def ground_population(self) -> float:
        return float(self.matrix[0, 0].real)

    @property
    def excited_population(self) -> float:
        return float(np.trace(self.matrix[1:, 1:]).real)


def evolve(
    heff: EffectiveHamiltonian,
    init: InitialState,
    grid: TimeGrid,
    rtol: float = 1e-9,
    atol: float = 1e-12,
    renormalize_init: bool = True,
) -> Trajectory:
    """Integrate the extended Schroedinger equation from psi(0) + zero
    pseudomodes.

    With an Ohmic bath the system part of the initial vector is scaled by
    1/(1 + i*eta/2), matching the cutoff-removal limit; pass
    ``renormalize_init=False`` to start from the bare psi(0) instead.
    """
    if init.n != heff.n:
        raise ValueError(f"initial state dim {init.n} != system dim {heff.n}")
    y0 = np.zeros(heff.dim, dtype=complex)
    y0[: heff.n] = init.psi
    if heff.eta > 0.0 and renormalize_init:
        y0[: heff.n] *= _scale_factor(heff.eta)
    ys = integrate_linear_ode(heff.matrix, y0, grid.points, rtol=rtol, atol=atol)
    states = tuple(ExtendedState(n=heff.n, k=heff.k, vector=y) for y in ys)
    return Trajectory(grid=grid, states=states)


def evolve_closed(
    h: SystemHamiltonian,
    init: InitialState,
    grid: TimeGrid,
    rtol: float = 1e-9,
    atol: float = 1e-12,
) -> Trajectory:
    """Unitary evolution of the bare system (empty bath)."""
    if init.n != h.n:
        raise ValueError(f"initial state dim {init.n} != system dim {h.n}")
    ys = integrate_linear_ode(h.matrix, init.psi, grid.points, rtol=rtol, atol=atol)
    states = tuple(ExtendedState(n=h.n, k=0, vector=y) for y in ys)
    return Trajectory(grid=grid, states=states)


def reduced_density(state: ExtendedState, init: InitialState) -> ReducedDensityMatrix:
    """Reconstruct the reduced density matrix from the system amplitudes.

    Layout: rho[0, 0] = 1 - ||psi||^2, rho[0, i] = psi0(0) * conj(psi_i),
    rho[i, j] = psi_i * conj(psi_j).
    """
    psi = state.system_part
    norm2 = float(np.vdot(psi, psi).real)
    if norm2 > (1.0 + 1e-9) ** 2:
        raise NormExceededError(
            f"system norm {np.sqrt(norm2):.12f} exceeds 1: integration failed "
            "or the model is not dilatable"
        )
    n = psi.shape[0]
    rho = np.zeros((n + 1, n + 1), dtype=complex)
    rho[0, 0] = 1.0 - norm2
    rho[0, 1:] = init.psi0 * np.conj(psi)
    rho[1:, 0] = np.conj(rho[0, 1:])
    rho[1:, 1:] = np.outer(psi, np.conj(psi))
    return ReducedDensityMatrix(matrix=rho)


def observables(traj: Trajectory, init: InitialState):
    """Per-grid-point populations and density matrices.

    Returns a list of (t, excited_population, ground_population, rho); the
    two populations sum to 1 by construction.
    """
    out = []
    for t, state in zip(traj.grid.points, traj.states):
        psi = state.system_part
        excited = float(np.vdot(psi, psi).real)
        rho = reduced_density(state, init)
        out.append((float(t), excited, 1.0 - excited, rho))
    return out


__all__ = [
    "ExtendedState",
    "NormExceededError",
    "ReducedDensityMatrix",
    "Trajectory",
    "evolve",
    "evolve_closed",
    "observables",
    "reduced_density",
]
