"""1-D staggered-grid layout: vacuum pads, index tapers, active region.

The permittivity profile runs vacuum | taper | waveguide core | taper |
vacuum.  The raised-cosine tapers emulate the anti-reflection-coated facets
(a hard index step would reflect ~30% of the power and re-pump the medium
backwards).  The source sits in the left vacuum pad; the tap in the right
one, so recorded waveforms are plane running waves in vacuum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import C_LIGHT
from .errors import ValidationError
from .medium import EnsembleSpec, MediumSpec

MIN_PAD_M = 10e-6
MIN_CELLS_PER_WAVELENGTH = 20


@dataclass(frozen=True)
class GridSpec:
    """Discretization: spatial step, time step, cell count, Courant ratio."""

    dz_m: float
    dt_s: float
    num_cells: int
    courant: float

    def __post_init__(self):
        if self.dz_m <= 0 or self.dt_s <= 0 or self.num_cells < 8:
            raise ValidationError("grid must have positive steps and >= 8 cells")
        if self.courant > 1.0 + 1e-12:
            raise ValidationError(
                f"courant ratio {self.courant:.4f} violates the stability bound <= 1"
            )


@dataclass(frozen=True)
class GridLayout:
    """Concrete grid: spec, permittivity profile and named cell indices."""

    spec: GridSpec
    eps_r: np.ndarray
    med_lo: int  # first cell of the dotted active region
    med_hi: int  # one past the last active cell
    src_cell: int
    tap_cell: int

    @property
    def num_medium_cells(self) -> int:
        return self.med_hi - self.med_lo

    def z_of(self, cell: int) -> float:
        return cell * self.spec.dz_m

    def flight_time_s(self) -> float:
        """Source-to-tap transit estimate from the local background index."""
        n = np.sqrt(self.eps_r[self.src_cell : self.tap_cell + 1])
        return float(np.sum(n) * self.spec.dz_m / C_LIGHT)


def make_grid(
    medium: MediumSpec,
    ensemble: EnsembleSpec,
    cells_per_wavelength: int = 20,
    courant: float = 0.98,
    pad_vacuum_m: float = 12e-6,
    taper_m: float = 4e-6,
) -> GridLayout:
    """Build the grid for a device, enforcing resolution and padding bounds.

    dz resolves the in-medium wavelength with ``cells_per_wavelength``
    cells (>= 20); dt follows from the vacuum-referenced Courant ratio,
    which must not exceed 1 because the padded grid contains vacuum.
    """
    if cells_per_wavelength < MIN_CELLS_PER_WAVELENGTH:
        raise ValidationError(
            f"cells_per_wavelength must be >= {MIN_CELLS_PER_WAVELENGTH}"
        )
    if pad_vacuum_m < MIN_PAD_M:
        raise ValidationError("vacuum padding must be >= 10 um on each side")
    if taper_m < 0:
        raise ValidationError("taper_m must be >= 0")

    lam = ensemble.center_wavelength_m
    n_bg = medium.background_index
    dz = lam / (cells_per_wavelength * n_bg)
    dt = courant * dz / C_LIGHT

    n_pad = int(round(pad_vacuum_m / dz))
    n_taper = int(round(taper_m / dz))
    n_med = int(round(medium.length_m / dz))
    num_cells = 2 * n_pad + 2 * n_taper + n_med

    eps = np.ones(num_cells)
    med_lo = n_pad + n_taper
    med_hi = med_lo + n_med
    eps[med_lo:med_hi] = n_bg * n_bg
    if n_taper > 0:
        ramp = 0.5 * (1.0 - np.cos(np.pi * (np.arange(n_taper) + 0.5) / n_taper))
        n_profile_up = 1.0 + (n_bg - 1.0) * ramp
        eps[n_pad : n_pad + n_taper] = n_profile_up**2
        eps[med_hi : med_hi + n_taper] = n_profile_up[::-1] ** 2

    src_cell = max(4, n_pad // 3)
    tap_cell = num_cells - 1 - max(4, n_pad // 3)

    spec = GridSpec(dz_m=dz, dt_s=dt, num_cells=num_cells, courant=courant)
    if num_cells * dz < medium.length_m + 2 * MIN_PAD_M - 1e-12:
        raise ValidationError("grid shorter than device plus 10 um pads")
    return GridLayout(
        spec=spec,
        eps_r=eps,
        med_lo=med_lo,
        med_hi=med_hi,
        src_cell=src_cell,
        tap_cell=tap_cell,
    )


def make_uniform_grid(
    length_m: float,
    refractive_index: float,
    wavelength_m: float,
    cells_per_wavelength: int = 20,
    courant: float = 0.98,
    pad_vacuum_m: float = 12e-6,
) -> GridLayout:
    """Passive grid: a uniform dielectric slab (or pure vacuum) with pads.

    Used by propagation sanity checks; carries no active medium cells.
    """
    if pad_vacuum_m < MIN_PAD_M:
        raise ValidationError("vacuum padding must be >= 10 um on each side")
    dz = wavelength_m / (cells_per_wavelength * max(refractive_index, 1.0))
    dt = courant * dz / C_LIGHT
    n_pad = int(round(pad_vacuum_m / dz))
    n_slab = int(round(length_m / dz))
    num_cells = 2 * n_pad + n_slab
    eps = np.ones(num_cells)
    eps[n_pad : n_pad + n_slab] = refractive_index**2
    spec = GridSpec(dz_m=dz, dt_s=dt, num_cells=num_cells, courant=courant)
    return GridLayout(
        spec=spec,
        eps_r=eps,
        med_lo=n_pad,
        med_hi=n_pad + n_slab,
        src_cell=max(4, n_pad // 3),
        tap_cell=num_cells - 1 - max(4, n_pad // 3),
    )
