"""Particle and system-state types for charged-particle dynamics.

Everything is stored in Gaussian CGS: charge in statcoulomb, mass in grams,
position in cm, velocity in cm/s, time in seconds.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .constants import C_LIGHT
from .errors import CoincidentParticlesError, VelocityCapExceededError


def _as_vec3(x, name: str) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"{name} must be a 3-vector, got shape {v.shape}")
    return v


@dataclass(frozen=True)
class Particle:
    """One classical point charge."""

    id: int
    charge: float        # signed [statC]
    mass: float          # [g]
    position: np.ndarray  # [cm]
    velocity: np.ndarray  # [cm/s]

    def __post_init__(self):
        if not self.mass > 0.0:
            raise ValueError(f"particle {self.id}: mass must be positive, got {self.mass}")
        object.__setattr__(self, "position", _as_vec3(self.position, "position"))
        object.__setattr__(self, "velocity", _as_vec3(self.velocity, "velocity"))

    @property
    def speed(self) -> float:
        return float(np.linalg.norm(self.velocity))


@dataclass(frozen=True)
class InteractionParams:
    """Knobs of the pairwise interaction.

    softening: Plummer length eps >= 0 [cm]; pair separations enter the
        potential and the magnetic coupling as sqrt(r^2 + eps^2).
    c: speed of light [cm/s]. A runtime parameter so the c -> infinity
        Coulomb limit can be tested by scaling it.
    velocity_cap: maximum allowed |v| as a fraction of c. The interaction
        is an order-(v/c)^2 expansion, so fast particles are rejected
        rather than silently mistreated.
    """

    softening: float = 0.0
    c: float = C_LIGHT
    velocity_cap: float = 0.5

    def __post_init__(self):
        if self.softening < 0.0:
            raise ValueError(f"softening must be >= 0, got {self.softening}")
        if not self.c > 0.0:
            raise ValueError(f"c must be positive, got {self.c}")
        if not 0.0 < self.velocity_cap:
            raise ValueError(f"velocity_cap must be positive, got {self.velocity_cap}")


@dataclass(frozen=True)
class SystemState:
    """A timestamped, ordered collection of particles."""

    particles: tuple[Particle, ...]
    time: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "particles", tuple(self.particles))
        ids = [p.id for p in self.particles]
        if len(set(ids)) != len(ids):
            raise ValueError(f"particle ids must be unique, got {ids}")

    def __len__(self) -> int:
        return len(self.particles)

    @property
    def n(self) -> int:
        return len(self.particles)

    def positions(self) -> np.ndarray:
        """(N, 3) array of positions in particle order."""
        return np.array([p.position for p in self.particles])

    def velocities(self) -> np.ndarray:
        return np.array([p.velocity for p in self.particles])

    def charges(self) -> np.ndarray:
        return np.array([p.charge for p in self.particles])

    def masses(self) -> np.ndarray:
        return np.array([p.mass for p in self.particles])

    def with_phase(self, positions: np.ndarray, velocities: np.ndarray,
                   time: float) -> "SystemState":
        """Copy with new positions/velocities ((N,3) each) and time."""
        parts = tuple(
            replace(p, position=positions[i], velocity=velocities[i])
            for i, p in enumerate(self.particles)
        )
        return SystemState(particles=parts, time=time)


def validate_state(state: SystemState, params: InteractionParams) -> None:
    """Check separations and the velocity cap; raise on violation.

    Softening regularizes near coincidence, but exactly coincident
    particles are always an error: the pair direction is undefined.
    """
    pos = state.positions()
    n = state.n
    if n >= 2:
        diff = pos[:, None, :] - pos[None, :, :]
        dist2 = np.einsum("ijk,ijk->ij", diff, diff)
        iu = np.triu_indices(n, k=1)
        if np.any(dist2[iu] == 0.0):
            a, b = next(
                (i, j) for i, j in zip(*iu) if dist2[i, j] == 0.0
            )
            ida, idb = state.particles[a].id, state.particles[b].id
            raise CoincidentParticlesError(
                f"particles {ida} and {idb} are exactly coincident"
            )
    cap = params.velocity_cap * params.c
    for p in state.particles:
        if p.speed >= cap:
            raise VelocityCapExceededError(
                f"particle {p.id}: |v| = {p.speed:.6g} cm/s exceeds the cap "
                f"{params.velocity_cap:g} c = {cap:.6g} cm/s"
            )
