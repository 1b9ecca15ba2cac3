"""Natural-unit system: hbar = 1, energies in meV, lengths in nm, times in 1/meV.

Two CODATA-derived constants fix every physical scale in the simulator:

* ``kinetic_coeff`` = hbar^2 / (2 m_e) expressed in meV nm^2, so the kinetic
  energy of a plane wave with wavenumber p (in 1/nm) for a particle of mass
  ``mass_ratio`` * m_e is ``kinetic_coeff / mass_ratio * p**2``.
* ``tesla_to_inv_len2`` = e / hbar in 1/nm^2 per tesla, so the coupling
  q B / c of a particle with charge sign sigma in a field of B tesla is
  ``sigma * tesla_to_inv_len2 * B`` (units 1/nm^2).

Both are evaluated once at import time and are bit-stable across runs.
"""

from dataclasses import dataclass, field

# CODATA 2018 values.
_HBAR_J_S = 1.054571817e-34
_ELECTRON_MASS_KG = 9.1093837015e-31
_ELEMENTARY_CHARGE_C = 1.602176634e-19

# hbar^2/(2 m_e): J m^2 -> meV nm^2  (1 J = 1/(e*1e-3) meV, 1 m^2 = 1e18 nm^2)
_KINETIC_COEFF = _HBAR_J_S**2 / (2.0 * _ELECTRON_MASS_KG) / (_ELEMENTARY_CHARGE_C * 1e-3) * 1e18

# e/hbar: 1/m^2 per T -> 1/nm^2 per T
_TESLA_TO_INV_NM2 = _ELEMENTARY_CHARGE_C / _HBAR_J_S * 1e-18


@dataclass(frozen=True)
class UnitSystem:
    kinetic_coeff: float = field(default=_KINETIC_COEFF)        # meV nm^2
    tesla_to_inv_len2: float = field(default=_TESLA_TO_INV_NM2)  # nm^-2 T^-1
    electron_charge_sign: float = -1.0

    def inv_mass(self, mass_ratio: float) -> float:
        """hbar^2/m in meV nm^2 for a particle of mass ``mass_ratio * m_e``."""
        return 2.0 * self.kinetic_coeff / mass_ratio

    def cyclotron_energy(self, b_tesla: float, mass_ratio: float) -> float:
        """hbar |e| B / m in meV (the Landau-level spacing)."""
        return 2.0 * self.kinetic_coeff * self.tesla_to_inv_len2 * abs(b_tesla) / mass_ratio


UNITS = UnitSystem()
