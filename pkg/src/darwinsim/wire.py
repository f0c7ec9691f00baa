"""Inductive energetics of a current channel.

For charges moving along a thin wire of length Lambda and inductance L, the
magnetic part of the kinetic energy takes the lumped inductive form
(1/2) L (I/c)^2 with I = (1/Lambda) sum_a e_a n.v_a. Destroying one carrier
changes the kinetic energy by

    k = m |v|^2 / 2 + eta (e I / c) (n.v) / c,    eta = L / Lambda,

and the collective magnetic enhancement of a single electron's energy is

    W = -eta m c^2 (I / I0) (v / c),    I0 = m c^3 / e  (Alfven current).

For currents beyond I0 this sits in the MeV range, which is what makes the
comparison against the inverse-beta threshold p + e -> n + nu interesting.
All wire quantities are pure post-hoc bookkeeping over states; nothing here
feeds back into the dynamics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import CODATA2018, PhysicalConstants, alfven_current_statamp
from .errors import ThinWireAssumptionViolated
from .particles import Particle, SystemState

# Inverse beta decay threshold Q = (m_n - m_p - m_e) c^2.
# From CODATA mass differences: (m_n - m_p) c^2 = 1.29333236 MeV and
# m_e c^2 = 0.51099895 MeV. Stored rather than derived to avoid dragging in
# a nuclear mass table for one number.
BETA_THRESHOLD_MEV = 1.29333236 - 0.51099895


def thin_wire_eta(length: float, radius: float) -> float:
    """Inductance per unit length of a thin straight wire, dimensionless.

    L = 2 Lambda [ln(2 Lambda / a) - 1] in Gaussian units, so
    eta = 2 [ln(2 Lambda / a) - 1]. Valid only for a << Lambda; radii
    above Lambda/10 are rejected, which also keeps the log factor > 1.
    """
    if not length > 0.0:
        raise ValueError(f"wire length must be positive, got {length}")
    if not radius > 0.0:
        raise ValueError(f"wire radius must be positive, got {radius}")
    if radius >= length / 10.0:
        raise ThinWireAssumptionViolated(
            f"radius {radius:g} is not small against length {length:g} "
            "(need a < Lambda/10)"
        )
    log_term = math.log(2.0 * length / radius)
    if log_term <= 1.0:
        raise ThinWireAssumptionViolated(
            f"ln(2 Lambda / a) = {log_term:g} <= 1; geometry outside the model"
        )
    return 2.0 * (log_term - 1.0)


@dataclass(frozen=True)
class WireSpec:
    """Geometry and inductance of a straight current channel.

    eta may be supplied directly (to match a published experiment) or left
    None to be computed from the thin-wire model using radius. The report
    records which path was used.
    """

    length: float                 # Lambda [cm]
    direction: np.ndarray         # unit 3-vector
    radius: float | None = None   # a [cm], for the built-in model
    eta: float | None = None      # L/Lambda, dimensionless

    def __post_init__(self):
        if not self.length > 0.0:
            raise ValueError(f"wire length must be positive, got {self.length}")
        n = np.asarray(self.direction, dtype=float)
        if n.shape != (3,):
            raise ValueError(f"direction must be a 3-vector, got shape {n.shape}")
        if abs(np.linalg.norm(n) - 1.0) > 1e-12:
            raise ValueError(f"direction must be a unit vector, |n| = {np.linalg.norm(n)!r}")
        object.__setattr__(self, "direction", n)
        if self.eta is None:
            if self.radius is None:
                raise ValueError("specify either eta or radius")
            if not 0.0 < self.radius < self.length:
                raise ValueError(
                    f"radius must satisfy 0 < a < Lambda, got a={self.radius}, "
                    f"Lambda={self.length}"
                )
            object.__setattr__(self, "eta", thin_wire_eta(self.length, self.radius))
        if not self.eta > 0.0:
            raise ValueError(f"eta must be positive, got {self.eta}")

    @property
    def eta_source(self) -> str:
        return "thin-wire-model" if self.radius is not None else "user"

    @property
    def inductance(self) -> float:
        """Total inductance L = eta * Lambda [cm]."""
        return self.eta * self.length


def wire_current(state: SystemState, wire: WireSpec) -> float:
    """Channel current I = (1/Lambda) sum_a e_a n.v_a [statA].

    Signed; summation runs in particle order for reproducibility.
    """
    q = state.charges()
    v = state.velocities()
    return float(np.sum(q * (v @ wire.direction))) / wire.length


def inductive_kinetic_energy(state: SystemState, wire: WireSpec,
                             consts: PhysicalConstants = CODATA2018) -> float:
    """Total kinetic energy with the lumped inductive magnetic term [erg].

    K = sum_a m_a |v_a|^2 / 2 + (1/2) L (I/c)^2. The magnetic term is
    algebraically the double sum (L / 2 c^2 Lambda^2) sum_{a,b} e_a e_b
    (n.v_a)(n.v_b); both are evaluated and cross-checked here to guard
    against non-finite inputs sneaking through.
    """
    c = consts.c
    v = state.velocities()
    m = state.masses()
    q = state.charges()
    mech = float(np.sum(0.5 * m * np.einsum("ij,ij->i", v, v)))
    current = wire_current(state, wire)
    magnetic = 0.5 * wire.inductance * (current / c) ** 2
    along = q * (v @ wire.direction)
    double_sum = wire.inductance / (2.0 * c ** 2 * wire.length ** 2) * float(
        np.sum(along[:, None] * along[None, :])
    )
    if not math.isclose(magnetic, double_sum, rel_tol=1e-12, abs_tol=1e-300):
        raise AssertionError(
            f"inductive energy forms disagree: {magnetic!r} vs {double_sum!r}"
        )
    return mech + magnetic


def wire_coupling_energy(charge: float, current: float, n_dot_v: float,
                         eta: float, consts: PhysicalConstants = CODATA2018) -> float:
    """Magnetic cross term eta (e I / c) (n.v) / c of the removal energy [erg]."""
    return eta * (charge * current / consts.c) * n_dot_v / consts.c


def removal_energy(particle: Particle, wire: WireSpec, total_current: float,
                   consts: PhysicalConstants = CODATA2018) -> float:
    """Kinetic energy released by destroying one carrier [erg].

    k = m |v|^2 / 2 + eta (e I / c)(n.v) / c, with I the full wire current
    including this particle. Signs of the cross term follow the signs of
    e, I and n.v as given.
    """
    v = particle.velocity
    kinetic = 0.5 * particle.mass * float(v @ v)
    n_dot_v = float(v @ wire.direction)
    return kinetic + wire_coupling_energy(particle.charge, total_current,
                                          n_dot_v, wire.eta, consts)


def magnetic_enhancement(eta: float, current: float, speed: float,
                         consts: PhysicalConstants = CODATA2018) -> float:
    """Collective magnetic enhancement W = -eta m c^2 (I/I0) (v/c) [erg].

    current is in statA (signed); speed is the carrier speed, >= 0. Exactly
    linear in each of eta, I and v.
    """
    if not eta > 0.0:
        raise ValueError(f"eta must be positive, got {eta}")
    if speed < 0.0:
        raise ValueError(f"speed must be >= 0, got {speed}")
    i0 = alfven_current_statamp(consts)
    return -eta * consts.electron_rest_energy * (current / i0) * (speed / consts.c)


def beta_threshold_check(available_energy: float,
                         consts: PhysicalConstants = CODATA2018) -> tuple[str, float]:
    """Compare an energy [erg] against the inverse-beta threshold.

    Returns ("above" | "below", margin in MeV); the boundary counts as
    above. Negative margin means the energy falls short.
    """
    margin = consts.mev_from_erg(available_energy) - BETA_THRESHOLD_MEV
    return ("above" if margin >= 0.0 else "below", margin)


@dataclass(frozen=True)
class WireEnergyReport:
    """Wire energetics summary; None entries were not computable from the inputs."""

    current_statamp: float
    current_ampere: float
    alfven_ratio: float                       # I / I0 (signed)
    eta: float
    eta_source: str
    w_magnetic_erg: float
    w_magnetic_mev: float
    threshold_verdict: str                    # "above" or "below"
    threshold_margin_mev: float
    carrier_speed: float                      # v entering W [cm/s]
    inductive_energy_erg: float | None = None
    removal_energies_erg: tuple[float, ...] | None = None


def mean_drift_speed(state: SystemState, wire: WireSpec) -> float:
    """Charge-weighted mean longitudinal speed |sum e_a n.v_a| / sum |e_a|.

    This is the carrier speed used for the collective enhancement when a
    full particle state is available: |I| Lambda / sum |e_a|. Zero for a
    chargeless state.
    """
    q = state.charges()
    total = float(np.sum(np.abs(q)))
    if total == 0.0:
        return 0.0
    v = state.velocities()
    return abs(float(np.sum(q * (v @ wire.direction)))) / total


def report_from_state(state: SystemState, wire: WireSpec,
                      consts: PhysicalConstants = CODATA2018) -> WireEnergyReport:
    """Full energetics report for a particle state threading a wire."""
    current = wire_current(state, wire)
    speed = mean_drift_speed(state, wire)
    w = magnetic_enhancement(wire.eta, current, speed, consts)
    verdict, margin = beta_threshold_check(abs(w), consts)
    removals = tuple(
        removal_energy(p, wire, current, consts) for p in state.particles
    )
    return WireEnergyReport(
        current_statamp=current,
        current_ampere=current / consts.statamp_per_ampere,
        alfven_ratio=current / alfven_current_statamp(consts),
        eta=wire.eta,
        eta_source=wire.eta_source,
        w_magnetic_erg=w,
        w_magnetic_mev=consts.mev_from_erg(w),
        threshold_verdict=verdict,
        threshold_margin_mev=margin,
        carrier_speed=speed,
        inductive_energy_erg=inductive_kinetic_energy(state, wire, consts),
        removal_energies_erg=removals,
    )


def report_from_current(eta: float, current_ampere: float, beta: float,
                        length: float | None = None,
                        consts: PhysicalConstants = CODATA2018) -> WireEnergyReport:
    """Energetics report from (eta, current, v/c) without a particle state.

    beta is the carrier speed as a fraction of c. The inductive energy
    (which needs the wire length) and per-particle removal energies are
    omitted; with length given, the pure magnetic part (1/2) L (I/c)^2 is
    reported.
    """
    if not 0.0 <= beta < 1.0:
        raise ValueError(f"beta must be in [0, 1), got {beta}")
    current = current_ampere * consts.statamp_per_ampere
    speed = beta * consts.c
    w = magnetic_enhancement(eta, current, speed, consts)
    verdict, margin = beta_threshold_check(abs(w), consts)
    inductive = None
    if length is not None:
        inductive = 0.5 * eta * length * (current / consts.c) ** 2
    return WireEnergyReport(
        current_statamp=current,
        current_ampere=current_ampere,
        alfven_ratio=current / alfven_current_statamp(consts),
        eta=eta,
        eta_source="user",
        w_magnetic_erg=w,
        w_magnetic_mev=consts.mev_from_erg(w),
        threshold_verdict=verdict,
        threshold_margin_mev=margin,
        carrier_speed=speed,
        inductive_energy_erg=inductive,
        removal_energies_erg=None,
    )
