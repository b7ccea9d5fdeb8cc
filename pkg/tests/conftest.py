import warnings

import numpy as np
import pytest

warnings.filterwarnings("ignore", message=".*TBB.*")

from fringesim.medium import EnsembleSpec, MediumSpec


@pytest.fixture(scope="session")
def frozen_medium():
    """Inverted medium with relaxation frozen (for clean coherent tests)."""
    return MediumSpec(
        t2_s=1.0,
        tau_res_to_es_s=1e3,
        tau_es_to_gs_s=1e3,
        tau_recomb_s=1e3,
        pump_rate_per_s=0.0,
    )


@pytest.fixture
def single_group():
    return EnsembleSpec(
        center_wavelength_m=1.55e-6,
        inhomog_fwhm_eV=0.0,
        num_groups=1,
        dipole_moment_Cm=6e-29,
    )


def gaussian_field(t, omega0, sigma, t_peak, e0=1.0, beta=0.0):
    tt = t - t_peak
    return e0 * np.exp(-0.5 * (tt / sigma) ** 2) * np.cos(omega0 * tt + beta * tt * tt)
