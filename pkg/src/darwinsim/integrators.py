"""Phase-space integration of the Darwin equations of motion.

The Euler-Lagrange equations are implicit in the accelerations because the
velocity-coupling matrix M depends on positions. Working in (r, p) avoids
differentiating M along the trajectory:

    dr/dt = v,  with  M(r) v = p        (SPD linear solve per evaluation)
    dp/dt = dL/dr (r, v)

The default scheme is the implicit midpoint rule solved by fixed-point
iteration: it is time-symmetric, conserves quadratic invariants (total
momentum, angular momentum) up to iteration tolerance, and keeps the energy
error bounded. Semi-implicit Euler is provided as a cheap fallback.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .errors import (
    DarwinSimError,
    FixedPointDidNotConvergeError,
    IntegrationAbortedError,
    NotPositiveDefiniteError,
    SolverDidNotConvergeError,
)
from .lagrangian import (
    EnergyBreakdown,
    PairGeometry,
    generalized_momenta,
    mass_matrix_arrays,
    momenta_arrays,
    position_gradient_arrays,
    total_energy,
)
from .particles import InteractionParams, SystemState, validate_state

SCHEMES = ("implicit-midpoint", "semi-implicit-euler")
SOLVERS = ("cholesky", "cg")


@dataclass(frozen=True)
class IntegratorConfig:
    """Time-stepping configuration.

    dt may be negative for backward integration (used by reversibility
    checks); it must not be zero. n_steps must be a multiple of
    output_stride so recorded samples stay uniformly spaced.
    """

    dt: float
    n_steps: int
    scheme: str = "implicit-midpoint"
    fixed_point_tol: float = 1e-12
    fixed_point_max_iter: int = 50
    solver_tol: float = 1e-12
    solver: str = "cholesky"
    output_stride: int = 1

    def __post_init__(self):
        if self.dt == 0.0:
            raise ValueError("dt must be nonzero")
        if self.n_steps < 0:
            raise ValueError(f"n_steps must be >= 0, got {self.n_steps}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.solver not in SOLVERS:
            raise ValueError(f"solver must be one of {SOLVERS}, got {self.solver!r}")
        for name in ("fixed_point_tol", "solver_tol"):
            tol = getattr(self, name)
            if not 0.0 < tol < 1.0:
                raise ValueError(f"{name} must be in (0, 1), got {tol}")
        if self.fixed_point_max_iter < 1:
            raise ValueError("fixed_point_max_iter must be >= 1")
        if self.output_stride < 1:
            raise ValueError(f"output_stride must be >= 1, got {self.output_stride}")
        if self.n_steps % self.output_stride != 0:
            raise ValueError(
                f"n_steps ({self.n_steps}) must be a multiple of "
                f"output_stride ({self.output_stride})"
            )


@dataclass(frozen=True)
class TrajectorySample:
    time: float
    state: SystemState
    energy: EnergyBreakdown


@dataclass(frozen=True)
class Trajectory:
    """Recorded samples plus the largest per-step relative energy jump.

    max_step_energy_jump backs the dt warning heuristic: per-step changes
    above 1e-4 relative indicate dt is too coarse for the scenario.
    """

    samples: tuple[TrajectorySample, ...]
    max_step_energy_jump: float = 0.0

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def final_state(self) -> SystemState:
        return self.samples[-1].state

    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.samples])


@dataclass(frozen=True)
class ConservationReport:
    """Maximum relative drifts against the initial sample (all >= 0)."""

    energy_drift: float
    momentum_drift: float
    angular_momentum_drift: float


def _spd_solve(mat: np.ndarray, p: np.ndarray, solver: str, solver_tol: float) -> np.ndarray:
    if solver == "cholesky":
        try:
            cho = scipy.linalg.cho_factor(mat, lower=True, check_finite=False)
        except scipy.linalg.LinAlgError as exc:
            raise NotPositiveDefiniteError(
                f"velocity-coupling matrix is not positive definite: {exc}"
            ) from exc
        v = scipy.linalg.cho_solve(cho, p, check_finite=False)
    elif solver == "cg":
        v, info = scipy.sparse.linalg.cg(mat, p, rtol=solver_tol, atol=0.0,
                                         maxiter=30 * p.size)
        if info != 0:
            raise SolverDidNotConvergeError(f"cg failed to converge (info={info})")
    else:
        raise ValueError(f"solver must be one of {SOLVERS}, got {solver!r}")
    residual = np.linalg.norm(mat @ v - p)
    if residual > solver_tol * np.linalg.norm(p):
        raise SolverDidNotConvergeError(
            f"linear solve residual {residual:.3e} exceeds {solver_tol:.1e} * ||p||"
        )
    return v


def velocities_from_momenta(state: SystemState, params: InteractionParams,
                            momenta: np.ndarray, solver: str = "cholesky",
                            solver_tol: float = 1e-12) -> np.ndarray:
    """Solve M(r) v = p for the stacked velocity vector.

    Uses a symmetric positive-definite Cholesky factorization by default;
    the "cg" solver handles the same contract iteratively. The residual
    ||M v - p|| <= solver_tol * ||p|| is verified in either case. With no
    charges the system is diagonal and v = p/m exactly.

    Raises NotPositiveDefiniteError when M has lost definiteness, which
    means the state has left the validity regime of the order-(v/c)^2
    interaction; aborting beats silently regularizing.
    """
    p = np.asarray(momenta, dtype=float)
    if p.shape != (3 * state.n,):
        raise ValueError(f"momenta must have shape ({3 * state.n},), got {p.shape}")
    if state.n < 2 or not np.any(state.charges()):
        return (p.reshape(-1, 3) / state.masses()[:, None]).ravel()
    g = PairGeometry(state.positions(), params.softening)
    mat = mass_matrix_arrays(g, state.charges(), state.masses(), params.c)
    return _spd_solve(mat, p, solver, solver_tol)


class _Stepper:
    """Array-level stepping context for one system composition.

    Charges and masses are fixed along a trajectory; only positions and
    momenta move. Keeping them here avoids rebuilding particle objects
    inside the fixed-point loop.
    """

    def __init__(self, state: SystemState, params: InteractionParams,
                 config: IntegratorConfig, include_ampere: bool):
        self.n = state.n
        self.q = state.charges()
        self.m = state.masses()
        self.params = params
        self.config = config
        self.has_charge = bool(np.any(self.q)) and self.n >= 2
        self.coupled = include_ampere and self.has_charge
        self.include_ampere = include_ampere

    def velocities(self, pos: np.ndarray, p: np.ndarray,
                   geom: PairGeometry | None = None) -> np.ndarray:
        """(3N,) velocities from stacked momenta at positions pos (N,3)."""
        if not self.coupled:
            return (p.reshape(self.n, 3) / self.m[:, None]).ravel()
        if geom is None:
            geom = PairGeometry(pos, self.params.softening)
        mat = mass_matrix_arrays(geom, self.q, self.m, self.params.c)
        return _spd_solve(mat, p, self.config.solver, self.config.solver_tol)

    def rhs(self, x: np.ndarray, p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Phase-space derivative (dr/dt, dp/dt) at stacked (x, p)."""
        pos = x.reshape(self.n, 3)
        if not self.has_charge:
            return (p.reshape(self.n, 3) / self.m[:, None]).ravel(), np.zeros(3 * self.n)
        geom = PairGeometry(pos, self.params.softening)
        v = self.velocities(pos, p, geom)
        grad = position_gradient_arrays(geom, v.reshape(self.n, 3), self.q,
                                        self.params.c, self.include_ampere)
        return v, grad.ravel()

    def momenta(self, state: SystemState) -> np.ndarray:
        if not self.coupled:
            return (self.m[:, None] * state.velocities()).ravel()
        return generalized_momenta(state, self.params)


def _advance(state: SystemState, params: InteractionParams,
             config: IntegratorConfig, include_ampere: bool) -> SystemState:
    validate_state(state, params)
    eng = _Stepper(state, params, config, include_ampere)
    dt = config.dt
    x0 = state.positions().ravel()
    p0 = eng.momenta(state)

    if config.scheme == "implicit-midpoint":
        x_mid, p_mid = x0, p0
        converged = False
        for _ in range(config.fixed_point_max_iter):
            v, g = eng.rhs(x_mid, p_mid)
            x_new = x0 + 0.5 * dt * v
            p_new = p0 + 0.5 * dt * g
            dx = np.linalg.norm(x_new - x_mid)
            dp = np.linalg.norm(p_new - p_mid)
            x_mid, p_mid = x_new, p_new
            if (dx <= config.fixed_point_tol * np.linalg.norm(x_new)
                    and dp <= config.fixed_point_tol * np.linalg.norm(p_new)):
                converged = True
                break
        if not converged:
            raise FixedPointDidNotConvergeError(
                f"implicit midpoint stage did not converge in "
                f"{config.fixed_point_max_iter} iterations (dt may be too large)"
            )
        x1 = 2.0 * x_mid - x0
        p1 = 2.0 * p_mid - p0
    else:  # semi-implicit-euler
        _, g0 = eng.rhs(x0, p0)
        p1 = p0 + dt * g0
        v1 = eng.velocities(x0.reshape(eng.n, 3), p1)
        x1 = x0 + dt * v1

    pos1 = x1.reshape(eng.n, 3)
    v_out = eng.velocities(pos1, p1).reshape(eng.n, 3)
    return state.with_phase(pos1, v_out, state.time + dt)


def step(state: SystemState, params: InteractionParams,
         config: IntegratorConfig) -> SystemState:
    """Advance one time step under the full Darwin dynamics."""
    return _advance(state, params, config, include_ampere=True)


def coulomb_reference_step(state: SystemState, params: InteractionParams,
                           config: IntegratorConfig) -> SystemState:
    """Advance one step with all magnetic couplings forced to zero.

    The c -> infinity comparison baseline: same discretization, diagonal
    mass matrix, Coulomb forces only.
    """
    return _advance(state, params, config, include_ampere=False)


def integrate(state: SystemState, params: InteractionParams,
              config: IntegratorConfig, include_ampere: bool = True) -> Trajectory:
    """Repeatedly step, recording a sample every output_stride steps.

    On a numerical failure the partial trajectory is attached to the
    raised IntegrationAbortedError together with the failing step index.
    """
    samples = [TrajectorySample(
        time=state.time,
        state=state,
        energy=total_energy(state, params, include_ampere=include_ampere),
    )]
    max_jump = 0.0
    current = state
    prev_total = samples[0].energy.total
    for i in range(config.n_steps):
        try:
            current = _advance(current, params, config, include_ampere)
        except DarwinSimError as exc:
            raise IntegrationAbortedError(
                step_index=i, cause=exc,
                trajectory=Trajectory(tuple(samples), max_jump),
            ) from exc
        energy = total_energy(current, params, include_ampere=include_ampere)
        scale = abs(prev_total)
        jump = abs(energy.total - prev_total) / scale if scale > 0.0 else abs(energy.total)
        max_jump = max(max_jump, jump)
        prev_total = energy.total
        if (i + 1) % config.output_stride == 0:
            samples.append(TrajectorySample(time=current.time, state=current, energy=energy))
    return Trajectory(tuple(samples), max_jump)


def conservation_report(traj: Trajectory, params: InteractionParams,
                        include_ampere: bool = True) -> ConservationReport:
    """Maximum drifts of energy, total momentum and angular momentum.

    Drifts are measured against the first sample. Momentum drift is
    normalized by sum_a |p_a| at t=0 and angular-momentum drift by
    sum_a |r_a x p_a| at t=0 (absolute when such a scale is zero), so a
    total that vanishes by symmetry does not blow up the ratio.
    """
    if len(traj) < 2:
        raise ValueError("conservation report needs a trajectory with >= 2 samples")

    e0 = traj.samples[0].energy.total
    energy_drift = 0.0
    momenta = []
    angulars = []
    for sample in traj.samples:
        if include_ampere:
            p = generalized_momenta(sample.state, params).reshape(-1, 3)
        else:
            p = sample.state.masses()[:, None] * sample.state.velocities()
        r = sample.state.positions()
        momenta.append(p)
        angulars.append(np.cross(r, p))
        diff = abs(sample.energy.total - e0)
        energy_drift = max(energy_drift, diff / abs(e0) if e0 != 0.0 else diff)

    p_scale = float(np.sum(np.linalg.norm(momenta[0], axis=1)))
    j_scale = float(np.sum(np.linalg.norm(angulars[0], axis=1)))
    p_tot0 = momenta[0].sum(axis=0)
    j_tot0 = angulars[0].sum(axis=0)

    momentum_drift = 0.0
    angular_drift = 0.0
    for p, j in zip(momenta, angulars):
        dp = float(np.linalg.norm(p.sum(axis=0) - p_tot0))
        dj = float(np.linalg.norm(j.sum(axis=0) - j_tot0))
        momentum_drift = max(momentum_drift, dp / p_scale if p_scale > 0.0 else dp)
        angular_drift = max(angular_drift, dj / j_scale if j_scale > 0.0 else dj)

    return ConservationReport(
        energy_drift=energy_drift,
        momentum_drift=momentum_drift,
        angular_momentum_drift=angular_drift,
    )
