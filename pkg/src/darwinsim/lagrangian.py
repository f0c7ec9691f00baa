"""Darwin-Lagrangian energetics of interacting point charges.

The effective Lagrangian for non-relativistic charges (Darwin 1920; see
Jackson ch. 12 or Landau-Lifshitz vol. 2) is L = K - U with

    U = sum_{a<b} e_a e_b / r_ab
    K = sum_a m_a |v_a|^2 / 2
        + sum_{a<b} e_a e_b / (2 c^2 r_ab) * (v_a.v_b + (n.v_a)(n.v_b))

where n = r_ab / |r_ab|. The velocity-velocity term is the magnetic Ampere
interaction between moving charges, accurate through order (v/c)^2.

Separations are Plummer-softened, r -> sqrt(r^2 + eps^2), identically in U
and in the Ampere denominators, so the softened system is itself a
consistent Lagrangian system and conservation laws survive exactly.

All pair sums run in fixed lexicographic (a < b) order so results are
bit-reproducible. The module keeps an array-level core (positions,
velocities, charges, masses as plain ndarrays) that the integrator drives
directly; the public functions wrap it for SystemState inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import CoincidentParticlesError
from .particles import InteractionParams, SystemState


@dataclass(frozen=True)
class EnergyBreakdown:
    """Energy decomposition [erg]; total = coulomb + mechanical + ampere."""

    coulomb: float
    mechanical_kinetic: float
    ampere_kinetic: float
    total: float


@lru_cache(maxsize=128)
def pair_indices(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Upper-triangle index pair arrays in lexicographic (a < b) order."""
    a, b = np.triu_indices(n, k=1)
    a.setflags(write=False)
    b.setflags(write=False)
    return a, b


class PairGeometry:
    """Pair separations in lexicographic (a < b) order.

    dist is the true separation; soft = sqrt(dist^2 + eps^2) is what enters
    every interaction denominator; nhat is the true unit vector, which is
    undefined (and an error) for exactly coincident particles.
    """

    __slots__ = ("a", "b", "rvec", "dist", "soft", "nhat")

    def __init__(self, pos: np.ndarray, softening: float):
        self.a, self.b = pair_indices(pos.shape[0])
        self.rvec = pos[self.a] - pos[self.b]
        self.dist = np.sqrt(np.einsum("ij,ij->i", self.rvec, self.rvec))
        if np.any(self.dist == 0.0):
            k = int(np.argmin(self.dist))
            raise CoincidentParticlesError(
                f"particles at indices {self.a[k]} and {self.b[k]} are exactly coincident"
            )
        self.soft = np.sqrt(self.dist ** 2 + softening ** 2)
        self.nhat = self.rvec / self.dist[:, None]


# --- array-level core ----------------------------------------------------

def coulomb_energy_arrays(g: PairGeometry, q: np.ndarray) -> float:
    return float(np.sum(q[g.a] * q[g.b] / g.soft))


def ampere_energy_arrays(g: PairGeometry, vel: np.ndarray, q: np.ndarray, c: float) -> float:
    va, vb = vel[g.a], vel[g.b]
    nva = np.einsum("ij,ij->i", g.nhat, va)
    nvb = np.einsum("ij,ij->i", g.nhat, vb)
    coupling = q[g.a] * q[g.b] / (2.0 * c * c * g.soft)
    return float(np.sum(coupling * (np.einsum("ij,ij->i", va, vb) + nva * nvb)))


def mechanical_energy_arrays(vel: np.ndarray, m: np.ndarray) -> float:
    return float(np.sum(0.5 * m * np.einsum("ij,ij->i", vel, vel)))


def momenta_arrays(g: PairGeometry | None, vel: np.ndarray, q: np.ndarray,
                   m: np.ndarray, c: float) -> np.ndarray:
    """(N, 3) canonical momenta; pass g=None for the charge-free case."""
    p = m[:, None] * vel
    if g is not None and g.a.size:
        coupling = q[g.a] * q[g.b] / (2.0 * c * c * g.soft)
        va, vb = vel[g.a], vel[g.b]
        nva = np.einsum("ij,ij->i", g.nhat, va)
        nvb = np.einsum("ij,ij->i", g.nhat, vb)
        # contribution of b to p_a and of a to p_b; nhat sign cancels in n(n.v)
        np.add.at(p, g.a, coupling[:, None] * (vb + g.nhat * nvb[:, None]))
        np.add.at(p, g.b, coupling[:, None] * (va + g.nhat * nva[:, None]))
    return p


def mass_matrix_arrays(g: PairGeometry, q: np.ndarray, m: np.ndarray, c: float) -> np.ndarray:
    n = m.shape[0]
    blocks = np.zeros((n, n, 3, 3))
    eye = np.eye(3)
    blocks[np.arange(n), np.arange(n)] = m[:, None, None] * eye
    if g.a.size:
        coupling = q[g.a] * q[g.b] / (2.0 * c * c * g.soft)
        pair_blocks = coupling[:, None, None] * (
            eye + g.nhat[:, :, None] * g.nhat[:, None, :]
        )
        blocks[g.a, g.b] = pair_blocks
        blocks[g.b, g.a] = pair_blocks
    return blocks.transpose(0, 2, 1, 3).reshape(3 * n, 3 * n)


def position_gradient_arrays(g: PairGeometry, vel: np.ndarray, q: np.ndarray,
                             c: float, include_ampere: bool = True) -> np.ndarray:
    """(N, 3) gradient dL/dr; see lagrangian_position_gradient."""
    n = vel.shape[0]
    grad = np.zeros((n, 3))
    if not g.a.size:
        return grad
    qq = q[g.a] * q[g.b]
    inv_s3 = 1.0 / g.soft ** 3

    # Coulomb: -dU/dr_a
    pair_grad = qq[:, None] * g.rvec * inv_s3[:, None]

    if include_ampere:
        va, vb = vel[g.a], vel[g.b]
        nva = np.einsum("ij,ij->i", g.nhat, va)
        nvb = np.einsum("ij,ij->i", g.nhat, vb)
        scal = np.einsum("ij,ij->i", va, vb) + nva * nvb
        proj_a = (va - g.nhat * nva[:, None]) / g.dist[:, None]
        proj_b = (vb - g.nhat * nvb[:, None]) / g.dist[:, None]
        pair_grad += (qq / (2.0 * c * c))[:, None] * (
            -scal[:, None] * g.rvec * inv_s3[:, None]
            + (nvb[:, None] * proj_a + nva[:, None] * proj_b) / g.soft[:, None]
        )

    np.add.at(grad, g.a, pair_grad)
    np.add.at(grad, g.b, -pair_grad)
    return grad


# --- public SystemState API ----------------------------------------------

def _geometry(state: SystemState, params: InteractionParams) -> PairGeometry:
    return PairGeometry(state.positions(), params.softening)


def coulomb_energy(state: SystemState, params: InteractionParams) -> float:
    """Pairwise electrostatic energy U = sum_{a<b} e_a e_b / r_ab [erg]."""
    if state.n < 2:
        return 0.0
    return coulomb_energy_arrays(_geometry(state, params), state.charges())


def darwin_kinetic_energy(state: SystemState, params: InteractionParams) -> float:
    """Kinetic energy including the pairwise magnetic Ampere coupling [erg]."""
    mech = mechanical_energy_arrays(state.velocities(), state.masses())
    if state.n < 2:
        return mech
    return mech + ampere_energy_arrays(
        _geometry(state, params), state.velocities(), state.charges(), params.c
    )


def lagrangian(state: SystemState, params: InteractionParams) -> float:
    """L = K - U [erg]."""
    return darwin_kinetic_energy(state, params) - coulomb_energy(state, params)


def total_energy(state: SystemState, params: InteractionParams,
                 include_ampere: bool = True) -> EnergyBreakdown:
    """Conserved energy E = K + U, broken into its three parts.

    K is quadratic in the velocities, so the Legendre transform
    sum_a p_a.v_a - L collapses to K + U. With include_ampere=False this
    is the conserved energy of the pure-Coulomb reference dynamics.
    """
    mech = mechanical_energy_arrays(state.velocities(), state.masses())
    if state.n < 2:
        return EnergyBreakdown(0.0, mech, 0.0, mech)
    g = _geometry(state, params)
    u = coulomb_energy_arrays(g, state.charges())
    ampere = 0.0
    if include_ampere:
        ampere = ampere_energy_arrays(g, state.velocities(), state.charges(), params.c)
    return EnergyBreakdown(
        coulomb=u,
        mechanical_kinetic=mech,
        ampere_kinetic=ampere,
        total=u + mech + ampere,
    )


def generalized_momenta(state: SystemState, params: InteractionParams) -> np.ndarray:
    """Canonical momenta dL/dv as a stacked 3N vector [g cm/s].

    p_a = m_a v_a + sum_{b != a} e_a e_b / (2 c^2 r_ab) * (v_b + n (n.v_b))
    """
    g = _geometry(state, params) if state.n >= 2 else None
    return momenta_arrays(g, state.velocities(), state.charges(),
                          state.masses(), params.c).ravel()


def assemble_mass_matrix(state: SystemState, params: InteractionParams) -> np.ndarray:
    """Dense symmetric 3N x 3N velocity-coupling matrix M with p = M v.

    Diagonal blocks are m_a I; off-diagonal blocks are
    e_a e_b / (2 c^2 r_ab) * (I + n n^T). Both (a,b) and (b,a) blocks are
    assigned from the same array, so M is exactly symmetric. Positive
    definiteness holds for physically admissible states and is checked by
    the solver, not here.
    """
    return mass_matrix_arrays(_geometry(state, params), state.charges(),
                              state.masses(), params.c)


def lagrangian_position_gradient(state: SystemState, params: InteractionParams,
                                 include_ampere: bool = True) -> np.ndarray:
    """dL/dr as a stacked 3N vector [dyn]; this is dp/dt along the motion.

    Per pair, with s = softened separation and rl = true separation:
      Coulomb part:   + e_a e_b r_ab / s^3 on particle a
      Ampere part:    differentiates into a -r_ab/s^3 piece from 1/s and a
                      projector-derivative piece (v - n (n.v)) / rl from each
                      n.v factor.
    The pair term depends only on r_a - r_b, so the gradient on b is the
    exact negative of the gradient on a and internal forces sum to zero.
    With include_ampere=False only the Coulomb part is returned (the
    pure-Coulomb reference dynamics).
    """
    if state.n < 2:
        return np.zeros(3 * state.n)
    return position_gradient_arrays(
        _geometry(state, params), state.velocities(), state.charges(),
        params.c, include_ampere=include_ampere,
    ).ravel()
