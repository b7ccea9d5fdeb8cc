"""Physical constants (CODATA via scipy) used throughout the simulator."""

import numpy as np
from scipy.constants import c as C_LIGHT
from scipy.constants import e as E_CHARGE
from scipy.constants import epsilon_0 as EPS0
from scipy.constants import hbar as HBAR
from scipy.constants import mu_0 as MU0

ETA0 = np.sqrt(MU0 / EPS0)  # vacuum impedance, ~376.73 ohm

# Gaussian shape factors.  Pulse widths are quoted as intensity FWHM;
# the field envelope exp(-t^2 / (2 sigma_t^2)) has intensity FWHM
# 2 sigma_t sqrt(ln 2).
FWHM_TO_SIGMA = 1.0 / (2.0 * np.sqrt(np.log(2.0)))
SIGMA_TO_FWHM = 1.0 / FWHM_TO_SIGMA


def wavelength_to_omega(wavelength_m: float) -> float:
    """Angular frequency of a vacuum wavelength."""
    return 2.0 * np.pi * C_LIGHT / wavelength_m


def ev_to_omega(energy_ev: float) -> float:
    """Convert a photon-energy span in eV to angular frequency (rad/s)."""
    return energy_ev * E_CHARGE / HBAR
