"""Physical constants in Gaussian CGS, unit conversions, and the Alfvén current.

Internal unit system is Gaussian CGS (cm, g, s, statcoulomb, statampere, erg):
the governing formulas carry explicit 4*pi and 1/c factors and e_a*e_b/r
potentials, which is how they are written in that system. SI appears only at
I/O boundaries through the conversion helpers here.

Values are CODATA 2018.
"""

from __future__ import annotations

from dataclasses import dataclass

# SI anchors (CODATA 2018).
C_LIGHT_SI = 2.99792458e8          # speed of light [m/s], exact
E_CHARGE_SI = 1.602176634e-19      # elementary charge [C], exact
M_ELECTRON_SI = 9.1093837015e-31   # electron mass [kg]

# Exact conversion factors, Gaussian value = SI value * factor.
STATC_PER_COULOMB = 10.0 * C_LIGHT_SI       # 2.99792458e9 statC/C
STATA_PER_AMPERE = 10.0 * C_LIGHT_SI        # same factor for current
ERG_PER_JOULE = 1.0e7
CM_PER_METER = 1.0e2
G_PER_KG = 1.0e3
# Gaussian inductance is a length; 1 cm of inductance = 1e-9 H, so
# eta = L/Lambda (dimensionless) maps to 1e-7 * eta in H/m.
ETA_PER_HENRY_PER_METER = 1.0e7

ERG_PER_MEV = E_CHARGE_SI * 1.0e6 * ERG_PER_JOULE   # 1.602176634e-6 erg/MeV

# Gaussian CGS values.
C_LIGHT = C_LIGHT_SI * CM_PER_METER                  # [cm/s]
E_CHARGE = E_CHARGE_SI * STATC_PER_COULOMB           # [statC]
M_ELECTRON = M_ELECTRON_SI * G_PER_KG                # [g]

_CONVERSION_FACTORS = {
    # quantity kind -> Gaussian units per SI unit
    "charge": STATC_PER_COULOMB,             # statC per C
    "current": STATA_PER_AMPERE,             # statA per A
    "energy": ERG_PER_JOULE,                 # erg per J
    "length": CM_PER_METER,                  # cm per m
    "mass": G_PER_KG,                        # g per kg
    "inductance-per-length": ETA_PER_HENRY_PER_METER,  # eta per (H/m)
}

QUANTITY_KINDS = tuple(sorted(_CONVERSION_FACTORS))


@dataclass(frozen=True)
class PhysicalConstants:
    """Constants of the internal Gaussian CGS system.

    c is carried as a runtime value rather than a baked-in constant so the
    c -> infinity Coulomb limit can be probed by scaling it.
    """

    c: float = C_LIGHT                      # speed of light [cm/s]
    e_mag: float = E_CHARGE                 # elementary charge magnitude [statC]
    m_e: float = M_ELECTRON                 # electron mass [g]
    statamp_per_ampere: float = STATA_PER_AMPERE
    erg_per_mev: float = ERG_PER_MEV

    def __post_init__(self):
        for name in ("c", "e_mag", "m_e", "statamp_per_ampere", "erg_per_mev"):
            value = getattr(self, name)
            if not value > 0.0:
                raise ValueError(f"PhysicalConstants.{name} must be strictly positive, got {value}")

    @property
    def electron_rest_energy(self) -> float:
        """m_e c^2 [erg]."""
        return self.m_e * self.c ** 2

    @property
    def electron_rest_energy_mev(self) -> float:
        return self.electron_rest_energy / self.erg_per_mev

    def mev_from_erg(self, energy_erg: float) -> float:
        return energy_erg / self.erg_per_mev

    def erg_from_mev(self, energy_mev: float) -> float:
        return energy_mev * self.erg_per_mev


CODATA2018 = PhysicalConstants()


def to_gaussian(value: float, kind: str) -> float:
    """Convert an SI value to Gaussian CGS. Exact multiplicative factor."""
    try:
        return value * _CONVERSION_FACTORS[kind]
    except KeyError:
        raise ValueError(
            f"unknown quantity kind {kind!r}; expected one of {', '.join(QUANTITY_KINDS)}"
        ) from None


def to_si(value: float, kind: str) -> float:
    """Convert a Gaussian CGS value to SI. Inverse of to_gaussian."""
    try:
        return value / _CONVERSION_FACTORS[kind]
    except KeyError:
        raise ValueError(
            f"unknown quantity kind {kind!r}; expected one of {', '.join(QUANTITY_KINDS)}"
        ) from None


def alfven_current_statamp(consts: PhysicalConstants = CODATA2018) -> float:
    """Alfven current scale I0 = m c^3 / e [statA].

    The current at which a wire's magnetic energy per conduction electron
    reaches the electron rest energy; approximately 17.045 kA.
    """
    return consts.m_e * consts.c ** 3 / consts.e_mag


def alfven_current(consts: PhysicalConstants = CODATA2018) -> float:
    """Alfven current I0 = m c^3 / e, converted to ampere."""
    return alfven_current_statamp(consts) / consts.statamp_per_ampere
