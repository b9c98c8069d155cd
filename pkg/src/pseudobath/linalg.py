"""Dense complex linear algebra and linear-ODE integration.

Everything here operates on plain numpy arrays (complex128).  Matrices are
small ((K+1)N with N, K in the single digits for typical runs), so the
Hermitian eigensolver is a cyclic Jacobi iteration: robust, dependency-free
and exact enough for certification work.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp


class LinAlgError(Exception):
    """Base class for numerics failures."""


class NotHermitianError(LinAlgError):
    """Input matrix fails the Hermiticity check."""


class NoConvergenceError(LinAlgError):
    """Jacobi sweeps exceeded the iteration cap."""


class DimensionMismatchError(LinAlgError):
    """Operands have incompatible shapes."""


class StepUnderflowError(LinAlgError):
    """Adaptive integrator drove the step size below the floor."""


#: Relative Hermiticity tolerance, deliberately stricter than any solver
#: tolerance so that symmetry errors and integration errors stay separable.
HERMITICITY_RTOL = 1e-12

_MAX_JACOBI_SWEEPS = 100


def as_square_matrix(a) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a.view(float))):
        raise LinAlgError("matrix contains non-finite entries")
    return a


def hermiticity_defect(a: np.ndarray) -> float:
    """Max-norm of A - A^dagger relative to 1 + max-norm of A."""
    a = np.asarray(a, dtype=complex)
    scale = 1.0 + np.abs(a).max(initial=0.0)
    return float(np.abs(a - a.conj().T).max(initial=0.0) / scale)


def is_hermitian(a: np.ndarray, rtol: float = HERMITICITY_RTOL) -> bool:
    return hermiticity_defect(a) <= rtol


@dataclass(frozen=True)
class HermitianEigenResult:
    """Ascending eigenvalues and matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def hermitian_eigen(a) -> HermitianEigenResult:
    """Diagonalize a Hermitian matrix by cyclic complex Jacobi rotations.

    Raises NotHermitianError when the input is not Hermitian to
    ``HERMITICITY_RTOL`` and NoConvergenceError if the off-diagonal mass
    fails to vanish within the sweep cap (does not happen for finite
    Hermitian input in practice).
    """
    a = as_square_matrix(a)
    if not is_hermitian(a):
        raise NotHermitianError(
            f"matrix is not Hermitian (relative defect {hermiticity_defect(a):.3e})"
        )
    n = a.shape[0]
    # Work on an exactly Hermitian copy so rotations preserve symmetry.
    w = 0.5 * (a + a.conj().T)
    v = np.eye(n, dtype=complex)
    off_tol = 1e-15 * (1.0 + np.abs(w).max())
    for _ in range(_MAX_JACOBI_SWEEPS):
        off = np.abs(w - np.diag(np.diag(w))).max(initial=0.0)
        if off <= off_tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                wpq = w[p, q]
                if abs(wpq) <= off_tol:
                    continue
                app = w[p, p].real
                aqq = w[q, q].real
                # Phase rotation makes the 2x2 subproblem real symmetric,
                # then a real plane rotation zeroes the off-diagonal entry.
                phase = wpq / abs(wpq)
                theta = 0.5 * np.arctan2(2.0 * abs(wpq), app - aqq)
                c = np.cos(theta)
                s = np.sin(theta)
                # Plane rotation J: [[c, -s], [s/phase, c/phase]] on (p, q).
                jpp, jpq = c, -s
                jqp, jqq = s * np.conj(phase), c * np.conj(phase)
                col_p = w[:, p].copy()
                col_q = w[:, q].copy()
                w[:, p] = jpp * col_p + jqp * col_q
                w[:, q] = jpq * col_p + jqq * col_q
                row_p = w[p, :].copy()
                row_q = w[q, :].copy()
                w[p, :] = np.conj(jpp) * row_p + np.conj(jqp) * row_q
                w[q, :] = np.conj(jpq) * row_p + np.conj(jqq) * row_q
                w[p, q] = 0.0
                w[q, p] = 0.0
                w[p, p] = w[p, p].real
                w[q, q] = w[q, q].real
                col_p = v[:, p].copy()
                col_q = v[:, q].copy()
                v[:, p] = jpp * col_p + jqp * col_q
                v[:, q] = jpq * col_p + jqq * col_q
    else:
        raise NoConvergenceError(
            f"Jacobi iteration did not converge in {_MAX_JACOBI_SWEEPS} sweeps"
        )
    eigenvalues = np.diag(w).real
    order = np.argsort(eigenvalues, kind="stable")
    return HermitianEigenResult(
        eigenvalues=np.ascontiguousarray(eigenvalues[order]),
        eigenvectors=np.ascontiguousarray(v[:, order]),
    )


def integrate_linear_ode(
    m,
    y0,
    grid,
    rtol: float = 1e-9,
    atol: float = 1e-12,
) -> list[np.ndarray]:
    """Solve d/dt y = -i M y on a fixed output grid.

    Uses an adaptive high-order embedded Runge-Kutta pair (scipy DOP853)
    with dense output evaluated exactly at the grid points.  The grid must
    be strictly increasing and start at 0.
    """
    m = as_square_matrix(m)
    y0 = np.ascontiguousarray(y0, dtype=complex).ravel()
    if y0.shape[0] != m.shape[0]:
        raise DimensionMismatchError(
            f"matrix dim {m.shape[0]} does not match state dim {y0.shape[0]}"
        )
    t = np.asarray(grid, dtype=float).ravel()
    if t.size == 0 or t[0] != 0.0 or (t.size > 1 and np.any(np.diff(t) <= 0.0)):
        raise LinAlgError("time grid must be strictly increasing and start at 0")
    if t.size == 1:
        return [y0.copy()]
    gen = -1j * m
    sol = solve_ivp(
        lambda _, y: gen @ y,
        (t[0], t[-1]),
        y0,
        method="DOP853",
        t_eval=t,
        rtol=rtol,
        atol=atol,
    )
    if not sol.success:
        raise StepUnderflowError(f"integration failed: {sol.message}")
    return [np.ascontiguousarray(sol.y[:, k]) for k in range(t.size)]
