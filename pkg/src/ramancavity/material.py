"""Conversion of material/cavity parameters to the dimensionless coupling.

On parametric resonance (omega_c = omega_R/2) the Raman-cavity coupling is

    g / omega_R = (1/4) R_tilde sqrt(V_samp V_cell) / V_eff

with R_tilde the dimensionless Raman coupling of the material, V_cell the
unit-cell volume, V_samp the sample volume and V_eff the effective cavity
mode volume.  For 2-D samples the volumes may be replaced by areas times a
common thickness, which cancels in the ratio.

These are order-of-magnitude estimates; treat results as carrying roughly a
decade of uncertainty either way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# CODATA 2018 values.
EPSILON_0 = 8.8541878128e-12   # F/m
HBAR = 1.054571817e-34         # J s


@dataclass(frozen=True)
class MaterialParams:
    R_tilde: float
    V_cell: float                # m^3
    V_samp: float                # m^3
    V_eff: float                 # m^3
    omega_R_hz: float = 1.0e12   # rad/s, for dimensional outputs

    def __post_init__(self):
        if self.V_cell <= 0.0 or self.V_samp <= 0.0 or self.V_eff <= 0.0:
            raise ValueError("volumes must be > 0")
        if self.V_samp < self.V_cell:
            raise ValueError("sample volume must be at least one unit cell")

    @classmethod
    def from_areas(
        cls,
        R_tilde: float,
        A_cell: float,
        A_samp: float,
        A_eff: float,
        thickness: float = 1.0e-9,
        omega_R_hz: float = 1.0e12,
    ) -> "MaterialParams":
        """2-D variant: areas (m^2) with a common thickness that cancels in
        the coupling ratio."""
        return cls(
            R_tilde=R_tilde,
            V_cell=A_cell * thickness,
            V_samp=A_samp * thickness,
            V_eff=A_eff * thickness,
            omega_R_hz=omega_R_hz,
        )


def coupling_from_material(mat: MaterialParams) -> float:
    """Dimensionless coupling g/omega_R on parametric resonance."""
    return 0.25 * mat.R_tilde * math.sqrt(mat.V_samp * mat.V_cell) / mat.V_eff


def coupling_decade_bounds(mat: MaterialParams) -> tuple[float, float]:
    """(low, high) one-decade uncertainty band around the estimate."""
    g = coupling_from_material(mat)
    return g / 10.0, g * 10.0


def cavity_field_noise(omega_c: float, V_eff: float) -> float:
    """Vacuum electric-field amplitude sqrt(hbar omega_c / (eps0 V_eff)).

    omega_c is the angular cavity frequency in rad/s, V_eff in m^3; the
    result is in volts per meter.
    """
    if omega_c <= 0.0 or V_eff <= 0.0:
        raise ValueError("omega_c and V_eff must be > 0")
    return math.sqrt(HBAR * omega_c / (EPSILON_0 * V_eff))
