"""Pump/probe waveform synthesis, spectral phase shaping and delay planning.

Waveforms are carrier-resolved real fields sampled on a uniform time grid.
Pulse energies are converted to field amplitudes through the waveguide mode
area, using the vacuum running-wave relation U = eps0 c A integral(E^2 dt)
(the launch region of the grid is vacuum).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import C_LIGHT, EPS0, FWHM_TO_SIGMA, wavelength_to_omega
from .errors import OverlapError, ValidationError, WindowError

# A delay is accepted when the normalized envelope overlap integral of the
# pair stays below this fraction of the single-pulse energy.
MAX_OVERLAP_FRACTION = 1e-4

# Fraction of pulse energy that may be clipped by the sampling window.
MAX_TRUNCATION_FRACTION = 1e-6


@dataclass(frozen=True)
class PulseSpec:
    """Analytic pulse definition: Gaussian envelope with polynomial spectral phase."""

    center_wavelength_m: float = 1.55e-6
    fwhm_s: float = 150e-15
    energy_J: float = 35e-12
    carrier_phase_rad: float = 0.0
    spectral_phase_coeffs: tuple[float, ...] = ()

    def __post_init__(self):
        if self.fwhm_s <= 0:
            raise ValidationError("pulse fwhm_s must be > 0")
        if self.energy_J < 0:
            raise ValidationError("pulse energy_J must be >= 0")
        object.__setattr__(
            self, "spectral_phase_coeffs", tuple(self.spectral_phase_coeffs)
        )

    @property
    def omega0(self) -> float:
        return wavelength_to_omega(self.center_wavelength_m)

    @property
    def sigma_t(self) -> float:
        """Field-envelope sigma for the configured intensity FWHM."""
        return self.fwhm_s * FWHM_TO_SIGMA


@dataclass(frozen=True)
class ScanPlan:
    """Nominal delays plus the fine scan around each of them."""

    nominal_delays_s: tuple[float, ...] = (600e-15, 650e-15, 750e-15, 900e-15)
    fine_span_s: float = 12e-15
    fine_step_s: float = 1e-15

    def __post_init__(self):
        object.__setattr__(self, "nominal_delays_s", tuple(self.nominal_delays_s))
        if self.fine_step_s <= 0:
            raise ValidationError("fine_step_s must be > 0")
        if self.fine_span_s < 0:
            raise ValidationError("fine_span_s must be >= 0")
        if not self.nominal_delays_s:
            raise ValidationError("nominal_delays_s must not be empty")


def peak_field_amplitude(spec: PulseSpec, mode_area_m2: float) -> float:
    """Vacuum peak field (V/m) carrying the pulse energy through the mode area.

    For E(t) = E0 exp(-t^2/(2 sigma^2)) cos(...), the cycle-averaged energy
    is U = eps0 c A E0^2 sigma sqrt(pi) / 2... more precisely the cos^2
    average gives U = (1/2) eps0 c A E0^2 sigma sqrt(pi).
    """
    if mode_area_m2 <= 0:
        raise ValidationError("mode_area_m2 must be > 0")
    denom = 0.5 * EPS0 * C_LIGHT * mode_area_m2 * spec.sigma_t * np.sqrt(np.pi)
    return float(np.sqrt(spec.energy_J / denom)) if spec.energy_J > 0 else 0.0


def waveform_energy(t: np.ndarray, e: np.ndarray, mode_area_m2: float) -> float:
    """Pulse energy of a sampled vacuum waveform through the mode area."""
    dt = t[1] - t[0]
    return float(EPS0 * C_LIGHT * mode_area_m2 * np.sum(e * e) * dt)


def synthesize(
    spec: PulseSpec,
    mode_area_m2: float,
    t: np.ndarray,
    t_peak_s: float = 0.0,
) -> np.ndarray:
    """Sample the pulse field on the time grid ``t`` with its peak at ``t_peak_s``.

    Transform-limited pulses are evaluated analytically; nonzero spectral
    phase coefficients route through :func:`apply_phase_mask`.  Raises if the
    grid window clips more than 1e-6 of the pulse energy.
    """
    t = np.asarray(t, dtype=float)
    if t.size < 2:
        raise ValidationError("time grid needs at least two samples")
    sigma = spec.sigma_t
    from scipy.special import erfc

    if any(c != 0.0 for c in spec.spectral_phase_coeffs):
        return _synthesize_shaped(spec, mode_area_m2, t, t_peak_s)

    # Gaussian energy fraction beyond the window edges.
    lo = (t_peak_s - t[0]) / sigma
    hi = (t[-1] - t_peak_s) / sigma
    clipped = 0.5 * (erfc(lo) + erfc(hi))
    if clipped > MAX_TRUNCATION_FRACTION:
        raise WindowError(
            f"time window clips {clipped:.2e} of the pulse energy (limit 1e-6)"
        )
    e0 = peak_field_amplitude(spec, mode_area_m2)
    tt = t - t_peak_s
    env = np.exp(-0.5 * (tt / sigma) ** 2)
    return e0 * env * np.cos(spec.omega0 * tt + spec.carrier_phase_rad)


def chirped_fwhm(spec: PulseSpec) -> float:
    """Intensity FWHM after the quadratic term of the spectral phase."""
    coeffs = spec.spectral_phase_coeffs
    c2 = coeffs[2] if len(coeffs) > 2 else 0.0
    stretch = np.sqrt(1.0 + (2.0 * c2 / spec.sigma_t**2) ** 2)
    return spec.fwhm_s * float(stretch)


def _synthesize_shaped(spec, mode_area_m2, t, t_peak_s):
    """Shaped-pulse path: mask on a private well-padded grid, then splice.

    The private grid shares the sample spacing and phase of ``t`` so the
    result adds into the caller's grid without interpolation; tails falling
    outside the caller's window must carry < 1e-6 of the pulse energy.
    """
    dt = t[1] - t[0]
    coeffs = spec.spectral_phase_coeffs
    c1 = coeffs[1] if len(coeffs) > 1 else 0.0
    half_width = 8.0 * spec.sigma_t + 4.0 * chirped_fwhm(spec) + abs(c1)
    i_lo = int(np.floor((t_peak_s - half_width - t[0]) / dt))
    i_hi = int(np.ceil((t_peak_s + half_width - t[0]) / dt))
    t_loc = t[0] + dt * np.arange(i_lo, i_hi)

    flat = PulseSpec(
        center_wavelength_m=spec.center_wavelength_m,
        fwhm_s=spec.fwhm_s,
        energy_J=spec.energy_J,
        carrier_phase_rad=spec.carrier_phase_rad,
    )
    e_loc = synthesize(flat, mode_area_m2, t_loc, t_peak_s)
    e_loc = apply_phase_mask(t_loc, e_loc, coeffs, spec.omega0)

    out = np.zeros_like(t)
    src_lo = max(0, -i_lo)
    src_hi = min(t_loc.size, t.size - i_lo)
    if src_hi > src_lo:
        out[i_lo + src_lo : i_lo + src_hi] = e_loc[src_lo:src_hi]
    total = np.sum(e_loc**2)
    kept = np.sum(e_loc[src_lo:src_hi] ** 2)
    if total > 0 and (total - kept) > MAX_TRUNCATION_FRACTION * total:
        raise WindowError(
            f"time window clips {(total - kept) / total:.2e} of the shaped pulse "
            "energy (limit 1e-6)"
        )
    return out


def apply_phase_mask(
    t: np.ndarray,
    e: np.ndarray,
    coeffs,
    omega0: float,
) -> np.ndarray:
    """Multiply the positive-frequency spectrum by exp(i sum_k c_k (w - w0)^k).

    Energy-preserving by construction (|mask| = 1).  A pure linear term c1
    advances the envelope by c1 seconds.  The waveform must be padded with
    at least four pulse durations of near-zero field; enforced loosely by
    requiring the edge samples to carry < 1e-6 of the peak amplitude.
    """
    e = np.asarray(e, dtype=float)
    t = np.asarray(t, dtype=float)
    if e.shape != t.shape:
        raise ValidationError("t and e must have matching shapes")
    peak = np.max(np.abs(e))
    if peak > 0 and max(abs(e[0]), abs(e[-1])) > 1e-6 * peak:
        raise WindowError("waveform not padded enough for spectral masking")
    coeffs = tuple(coeffs)
    if not coeffs or all(c == 0.0 for c in coeffs):
        return e.copy()
    dt = t[1] - t[0]
    spec = np.fft.rfft(e)
    omega = 2.0 * np.pi * np.fft.rfftfreq(e.size, dt)
    d = omega - omega0
    phase = np.zeros_like(d)
    for k, c in enumerate(coeffs):
        if c != 0.0:
            phase += c * d**k
    out = np.fft.irfft(spec * np.exp(1j * phase), n=e.size)
    return out


def envelope_overlap_fraction(pump: PulseSpec, probe: PulseSpec, delay_s: float) -> float:
    """Normalized envelope overlap integral of the delayed pair.

    integral(env_pump * env_probe) / sqrt(integral env_pump^2 * integral env_probe^2)
    evaluated in closed form for Gaussian envelopes.
    """
    s1, s2 = pump.sigma_t, probe.sigma_t
    # Product of two Gaussians offset by delay: exp(-delay^2 / (2 (s1^2+s2^2)))
    # times width factors; normalize by the self-overlaps.
    num = np.sqrt(2.0 * s1 * s2 / (s1 * s1 + s2 * s2)) * np.exp(
        -(delay_s**2) / (2.0 * (s1 * s1 + s2 * s2))
    )
    return float(num)


def compose_pair(
    pump: PulseSpec,
    probe: PulseSpec,
    delay_s: float,
    mode_area_m2: float,
    t: np.ndarray,
    t_pump_peak_s: float = 0.0,
) -> np.ndarray:
    """Sum of the pump waveform and the probe delayed by ``delay_s``.

    The delay shifts the full carrier-resolved probe waveform, so changing
    the delay by one carrier period leaves the relative carrier phase
    unchanged.  Rejects delays whose envelope overlap exceeds 1e-4.
    """
    frac = envelope_overlap_fraction(pump, probe, delay_s)
    if frac > MAX_OVERLAP_FRACTION:
        raise OverlapError(
            f"pump/probe envelope overlap {frac:.2e} exceeds {MAX_OVERLAP_FRACTION:.0e} "
            f"at delay {delay_s * 1e15:.0f} fs"
        )
    e = synthesize(pump, mode_area_m2, t, t_pump_peak_s)
    e += synthesize(probe, mode_area_m2, t, t_pump_peak_s + delay_s)
    return e


def plan_scan(plan: ScanPlan) -> list[float]:
    """Absolute delays: each nominal delay plus fine steps up to the span."""
    delays = []
    n_fine = int(round(plan.fine_span_s / plan.fine_step_s))
    for nominal in plan.nominal_delays_s:
        for i in range(n_fine + 1):
            delays.append(nominal + i * plan.fine_step_s)
    return delays
