"""Time-domain Lindblad integration, used as an independent check on the RWA maps.

Two entry points:

* :func:`evolve` integrates a general N-level density matrix under a
  time-dependent Hamiltonian with relaxation on one level pair, checking trace,
  Hermiticity and positivity after every accepted step.
* :func:`steady_state_polarization` runs the two-level problem defined by a
  :class:`~nvmix.rwa.DriveDecomposition` to its periodic steady state and
  reports the empirical polarization coefficient ``1 - P0 / Ps``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import DOP853

from . import kernels
from .rwa import DriveDecomposition, RelaxationRates

INVARIANT_TOL = 1e-9


class StiffnessError(RuntimeError):
    """The adaptive step size collapsed before reaching the requested time."""


class NonConvergenceError(RuntimeError):
    """Window averages did not settle within the allowed number of drive periods."""


class InvariantError(RuntimeError):
    """The propagated state stopped being a density matrix."""


@dataclass(frozen=True)
class DensityMatrix:
    rho: np.ndarray

    def __post_init__(self):
        m = np.array(self.rho, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "rho", m)
        problem = invariant_violation(m, INVARIANT_TOL)
        if problem:
            raise ValueError(problem)

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    def polarization(self, pair=(0, 1)) -> float:
        """Population difference ``rho_aa - rho_bb`` for the 0-based ``pair``."""
        a, b = pair
        return float((self.rho[a, a] - self.rho[b, b]).real)

    @classmethod
    def polarized(cls, dim: int, equilibrium: float = 1.0, pair=(0, 1)) -> DensityMatrix:
        """Diagonal state with polarization ``equilibrium`` on ``pair`` and nothing elsewhere."""
        if not -1.0 <= equilibrium <= 1.0:
            raise ValueError("equilibrium polarization must lie in [-1, 1]")
        rho = np.zeros((dim, dim), dtype=complex)
        a, b = pair
        rho[a, a] = 0.5 * (1.0 + equilibrium)
        rho[b, b] = 0.5 * (1.0 - equilibrium)
        return cls(rho)


def invariant_violation(rho: np.ndarray, tol: float) -> str | None:
    """Description of the first broken density-matrix property, or None."""
    herm = float(np.abs(rho - rho.conj().T).max())
    if herm > tol:
        return f"not Hermitian (deviation {herm:.3g})"
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > tol:
        return f"trace {tr.real:.12g} differs from 1"
    lo = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min())
    if lo < -tol:
        return f"negative eigenvalue {lo:.3g}"
    return None


def relaxation_channels(rates: RelaxationRates, equilibrium: float = 1.0, convention: str = "total"):
    """``(down, up, coherence_decay)`` for a level pair.

    ``down`` feeds the lower level. With ``convention="total"`` the coherence
    decays at ``gamma2``; with ``"pure"``, ``gamma2`` is the pure dephasing
    part and the total is ``gamma2 + gamma1 / 2``.
    """
    if not -1.0 <= equilibrium <= 1.0:
        raise ValueError("equilibrium polarization must lie in [-1, 1]")
    g1, g2 = rates.gamma1, rates.gamma2
    down = 0.5 * g1 * (1.0 + equilibrium)
    up = 0.5 * g1 * (1.0 - equilibrium)
    if convention == "total":
        coh = g2
    elif convention == "pure":
        coh = g2 + 0.5 * g1
    else:
        raise ValueError(f"unknown gamma2 convention {convention!r}")
    if coh < 0.5 * g1:
        raise ValueError("coherence decay below gamma1 / 2 needs negative pure dephasing")
    return down, up, coh


def _dissipator_ops(dim, pair, down, up, coh):
    a, b = pair
    ops = []
    lower = np.zeros((dim, dim), dtype=complex)
    lower[a, b] = 1.0
    if down > 0:
        ops.append(math.sqrt(down) * lower)
    if up > 0:
        ops.append(math.sqrt(up) * lower.conj().T)
    # pure dephasing rate kappa on each level gives 2 kappa on the coherence
    kappa = 0.5 * (coh - 0.5 * (down + up))
    if kappa > 0:
        z = np.zeros((dim, dim), dtype=complex)
        z[a, a], z[b, b] = 1.0, -1.0
        ops.append(math.sqrt(kappa) * z)
    return ops


def _lindblad_rhs(hamiltonian_of_t, dim, ops):
    lsum = sum((l.conj().T @ l for l in ops), np.zeros((dim, dim), dtype=complex))

    def rhs(t, y):
        rho = y.reshape(dim, dim)
        h = np.asarray(hamiltonian_of_t(t), dtype=complex)
        d = -1j * (h @ rho - rho @ h)
        for l in ops:
            d += l @ rho @ l.conj().T
        d -= 0.5 * (lsum @ rho + rho @ lsum)
        return d.ravel()

    return rhs


def evolve_trajectory(
    hamiltonian_of_t,
    rates: RelaxationRates,
    rho0,
    t_final: float,
    dt_max: float,
    sample_times=None,
    *,
    equilibrium: float = 1.0,
    pair=(0, 1),
    gamma2_convention: str = "total",
    rtol: float = 1e-10,
    atol: float = 1e-11,
    min_step: float | None = None,
    max_steps: int = 10_000_000,
):
    """Integrate the master equation and return ``(times, states)``.

    ``states`` has shape ``(len(times), N, N)``. With ``sample_times=None``
    only the final state is returned. Invariants are checked after every
    accepted step; :class:`InvariantError` is raised on the first breach.
    :class:`StiffnessError` is raised when the step size falls below
    ``min_step`` (default ``1e-12 * t_final``) or ``max_steps`` is exceeded.
    """
    rho0 = rho0 if isinstance(rho0, DensityMatrix) else DensityMatrix(rho0)
    if not (t_final > 0 and dt_max > 0):
        raise ValueError("t_final and dt_max must be positive")
    dim = rho0.dim
    down, up, coh = relaxation_channels(rates, equilibrium, gamma2_convention)
    rhs = _lindblad_rhs(hamiltonian_of_t, dim, _dissipator_ops(dim, pair, down, up, coh))
    if sample_times is None:
        sample_times = [t_final]
    samples = np.asarray(sample_times, dtype=float)
    if np.any(np.diff(samples) < 0) or samples[0] < 0 or samples[-1] > t_final:
        raise ValueError("sample_times must be sorted and within [0, t_final]")

    solver = DOP853(rhs, 0.0, rho0.rho.ravel().copy(), t_final, max_step=dt_max, rtol=rtol, atol=atol)
    out = np.empty((len(samples), dim, dim), dtype=complex)
    k = 0
    while k < len(samples) and samples[k] <= 0.0:
        out[k] = rho0.rho
        k += 1
    min_step = 1e-12 * t_final if min_step is None else min_step
    n_steps = 0
    while solver.status == "running":
        msg = solver.step()
        n_steps += 1
        if solver.status == "failed":
            raise StiffnessError(f"step size underflow at t = {solver.t:.6g}: {msg}")
        if solver.status == "running" and solver.step_size < min_step:
            raise StiffnessError(f"step size {solver.step_size:.3g} below {min_step:.3g} at t = {solver.t:.6g}")
        if n_steps >= max_steps and solver.status == "running":
            raise StiffnessError(f"more than {max_steps} steps before t = {t_final:.6g}")
        rho = solver.y.reshape(dim, dim)
        problem = invariant_violation(rho, INVARIANT_TOL)
        if problem:
            raise InvariantError(f"at t = {solver.t:.6g}: {problem}")
        if k < len(samples) and samples[k] <= solver.t:
            dense = solver.dense_output()
            while k < len(samples) and samples[k] <= solver.t:
                out[k] = dense(samples[k]).reshape(dim, dim)
                k += 1
    return samples, out


def evolve(hamiltonian_of_t, rates: RelaxationRates, rho0, t_final: float, dt_max: float, **kw) -> DensityMatrix:
    """Final state of :func:`evolve_trajectory`."""
    _, states = evolve_trajectory(hamiltonian_of_t, rates, rho0, t_final, dt_max, None, **kw)
    return DensityMatrix(states[-1])


def two_level_hamiltonian(d: DriveDecomposition, linear: bool = True):
    """``H(t)`` of the driven pair as a 2x2 callable, lower level first."""

    def h(t):
        eps = d.splitting(t)
        if linear:
            c = 2.0 * d.Omega_T1 * math.cos(d.Omega_T * t)
        else:
            c = d.Omega_T1 * complex(math.cos(d.Omega_T * t), math.sin(d.Omega_T * t))
        return np.array([[-0.5 * eps, c], [np.conj(c), 0.5 * eps]], dtype=complex)

    return h


@dataclass(frozen=True)
class SteadyStateResult:
    P0: float
    Ps: float
    P_emp: float
    periods: int
    state: tuple


def _drive_period(d: DriveDecomposition) -> float:
    w = d.Omega_L if d.Omega_L1 != 0.0 else d.Omega_T
    return 2.0 * math.pi / w


def _settle(d, channels, equilibrium, linear, atol, tol, max_periods):
    period = _drive_period(d)
    g1 = channels[0] + channels[1]
    per_window = max(1, math.ceil(0.1 / (g1 * period)))
    window = per_window * period
    state = (0.5 * (1.0 + equilibrium), 0.5 * (1.0 - equilibrium), 0.0, 0.0)
    params = (d.Omega_0, d.Omega_L1, d.Omega_L, d.Omega_T1, d.Omega_T, 1 if linear else 0)
    h = period / 20.0
    t = 0.0
    prev = math.nan
    periods = 0
    while periods + per_window <= max_periods:
        state, mean, h, _, status = kernels.two_level_window(
            state, t, window, params, channels, atol, h, 50_000_000
        )
        periods += per_window
        t = periods * period
        if status == kernels.NOT_POSITIVE:
            raise InvariantError(f"state left the positive cone after {periods} periods")
        if status != kernels.OK:
            raise StiffnessError(f"integrator stopped with status {status} after {periods} periods")
        if abs(mean - prev) < tol:
            return mean, periods, state
        prev = mean
    raise NonConvergenceError(
        f"window averages still moving after {periods} drive periods (last change {abs(mean - prev):.3g})"
    )


def steady_state_polarization(
    d: DriveDecomposition,
    rates: RelaxationRates,
    equilibrium: float = 1.0,
    *,
    linear: bool = True,
    gamma2_convention: str = "total",
    atol: float = 1e-9,
    tol: float = 1e-6,
    max_periods: int | None = None,
) -> SteadyStateResult:
    """Driven and undriven steady-state polarizations and ``P_emp = 1 - P0 / Ps``.

    Averages are taken over windows of whole drive periods, each at least
    ``0.1 / gamma1`` long. Convergence means two successive window averages
    differ by less than ``tol``. ``max_periods`` defaults to ``200 / gamma1``
    worth of periods.
    """
    if equilibrium == 0.0:
        raise ValueError("equilibrium polarization must be non-zero")
    channels = relaxation_channels(rates, equilibrium, gamma2_convention)
    if max_periods is None:
        max_periods = max(4, math.ceil(200.0 / (rates.gamma1 * _drive_period(d))))
    p0, periods, state = _settle(d, channels, equilibrium, linear, atol, tol, max_periods)
    undriven = DriveDecomposition(d.Omega_0, d.Omega_L1, d.Omega_L, 0.0, d.Omega_T, d.level_pair)
    ps, _, _ = _settle(undriven, channels, equilibrium, linear, atol, tol, max_periods)
    return SteadyStateResult(P0=p0, Ps=ps, P_emp=1.0 - p0 / ps, periods=periods, state=state)
