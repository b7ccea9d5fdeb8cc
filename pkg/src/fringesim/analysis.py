"""Observables extracted from output-facet field records.

The output of a propagation run is a carrier-resolved field time series at
the tap cell.  This module demodulates it into envelope intensity and
instantaneous frequency, splits pump and probe windows, builds spectrograms,
fits the fine-delay fringes with sinusoids, and extracts a coherence time
from the visibility decay.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit

from .constants import C_LIGHT, EPS0
from .errors import ValidationError, WindowError

# Intensity threshold (fraction of record max) below which inst. frequency
# is left undefined (NaN).
INST_FREQ_MASK = 0.01

# Peaks must exceed this fraction of the record max to count in the
# pump/probe window split.
PEAK_THRESHOLD = 0.05


@dataclass
class EnvelopeRecord:
    """Demodulated record: intensity, instantaneous frequency, pulse windows."""

    t_s: np.ndarray
    intensity_W: np.ndarray
    inst_freq_rad_per_s: np.ndarray
    pump_window: tuple[int, int]
    probe_window: tuple[int, int]
    envelope: np.ndarray  # complex analytic envelope (V/m)
    omega0: float


@dataclass
class FringeRecord:
    """Per-delay observables of one propagation run."""

    delay_s: float
    probe_peak_W: float
    probe_peak_time_s: float
    pump_peak_time_s: float
    separation_s: float
    probe_energy_J: float
    peak_inst_freq_rad_per_s: float


@dataclass
class FringeSeriesFit:
    """Shared-period sinusoid fit of one fine-delay series pair."""

    visibility: float
    period_s: float
    intensity_phase_rad: float
    separation_phase_rad: float
    lag_cycles: float
    intensity_amplitude: float
    intensity_offset: float
    separation_amplitude: float
    fringe_free: bool
    intensity_r2: float
    separation_r2: float


@dataclass
class CoherenceFit:
    """Exponential fit V(tau) = A exp(-tau / t_coh)."""

    t_coh_s: float
    amplitude: float
    r_squared: float
    visibilities: np.ndarray
    delays_s: np.ndarray
    non_decaying: bool


def _quadratic_peak(x: np.ndarray, y: np.ndarray, idx: int) -> tuple[float, float]:
    """Sub-sample peak location/value via a parabola through three points."""
    if idx <= 0 or idx >= len(y) - 1:
        return float(x[idx]), float(y[idx])
    y0, y1, y2 = y[idx - 1], y[idx], y[idx + 1]
    denom = y0 - 2.0 * y1 + y2
    if denom == 0.0:
        return float(x[idx]), float(y[idx])
    shift = 0.5 * (y0 - y2) / denom
    shift = float(np.clip(shift, -1.0, 1.0))
    dx = x[1] - x[0]
    peak_val = y1 - 0.25 * (y0 - y2) * shift
    return float(x[idx] + shift * dx), float(peak_val)


def demodulate(
    t: np.ndarray,
    e: np.ndarray,
    omega0: float,
    lowpass_rad_per_s: float,
    mode_area_m2: float = 1.0,
) -> EnvelopeRecord:
    """Quadrature demodulation at ``omega0`` with a flat-top low-pass filter.

    The filter passes |w - w0| < lowpass (cosine rolloff to 1.5x) applied on
    the analytic signal; intensity is the cycle-averaged power through the
    mode area; instantaneous frequency comes from centered differences on the
    unwrapped envelope phase and is masked below 1% of the peak intensity.
    """
    t = np.asarray(t, dtype=float)
    e = np.asarray(e, dtype=float)
    dt = t[1] - t[0]
    if omega0 * dt > 2.0 * np.pi / 25.0:
        raise ValidationError("record undersampled: need >= 25 samples per carrier cycle")

    # Analytic signal restricted to a band around +omega0.
    n = e.size
    spec = np.fft.fft(e)
    omega = 2.0 * np.pi * np.fft.fftfreq(n, dt)
    d = np.abs(omega - omega0)
    w1 = lowpass_rad_per_s
    w2 = 1.5 * lowpass_rad_per_s
    gate = np.where(
        d <= w1, 1.0, np.where(d >= w2, 0.0, 0.5 * (1.0 + np.cos(np.pi * (d - w1) / (w2 - w1))))
    )
    analytic = np.fft.ifft(2.0 * spec * gate)
    envelope = analytic * np.exp(-1j * omega0 * t)

    power_scale = 0.5 * EPS0 * C_LIGHT * mode_area_m2
    intensity = power_scale * np.abs(envelope) ** 2

    phase = np.unwrap(np.angle(envelope))
    inst = np.full(n, np.nan)
    dphase = np.gradient(phase, dt)
    mask = intensity > INST_FREQ_MASK * intensity.max() if intensity.max() > 0 else np.zeros(n, bool)
    inst[mask] = omega0 + dphase[mask]

    pump_win, probe_win = _split_windows(intensity)
    return EnvelopeRecord(
        t_s=t,
        intensity_W=intensity,
        inst_freq_rad_per_s=inst,
        pump_window=pump_win,
        probe_window=probe_win,
        envelope=envelope,
        omega0=omega0,
    )


def _split_windows(intensity: np.ndarray) -> tuple[tuple[int, int], tuple[int, int]]:
    """Assign pump/probe windows split at the minimum between the two main peaks."""
    peak = intensity.max()
    if peak <= 0:
        raise WindowError("record carries no power; cannot split windows")
    # Local maxima above threshold.
    y = intensity
    idx = np.where((y[1:-1] >= y[:-2]) & (y[1:-1] > y[2:]) & (y[1:-1] > PEAK_THRESHOLD * peak))[0] + 1
    if idx.size < 2:
        raise WindowError("fewer than two peaks above 5% of max; cannot split windows")
    # Two largest, in time order.
    top2 = idx[np.argsort(y[idx])[-2:]]
    i1, i2 = int(min(top2)), int(max(top2))
    split = i1 + int(np.argmin(y[i1 : i2 + 1]))
    return (0, split), (split, y.size)


def window_observables(
    rec: EnvelopeRecord, delay_s: float, mode: str = "peak"
) -> FringeRecord:
    """Pulse timing (quadratic-refined peaks or centroids), probe peak power,
    probe energy and pump-probe separation for one record."""
    if mode not in ("peak", "centroid"):
        raise ValidationError("separation mode must be 'peak' or 'centroid'")
    t = rec.t_s
    y = rec.intensity_W
    dt = t[1] - t[0]
    p0, p1 = rec.pump_window
    q0, q1 = rec.probe_window
    i_pump = p0 + int(np.argmax(y[p0:p1]))
    i_probe = q0 + int(np.argmax(y[q0:q1]))
    t_pump, _ = _quadratic_peak(t, y, i_pump)
    t_probe, peak_w = _quadratic_peak(t, y, i_probe)
    if mode == "centroid":
        t_pump = float(np.sum(t[p0:p1] * y[p0:p1]) / np.sum(y[p0:p1]))
        t_probe = float(np.sum(t[q0:q1] * y[q0:q1]) / np.sum(y[q0:q1]))
    energy = float(np.sum(y[q0:q1]) * dt)
    # Instantaneous frequency at the probe peak (nearest defined sample).
    inst = rec.inst_freq_rad_per_s
    j = i_probe
    peak_inst = inst[j]
    if not np.isfinite(peak_inst):
        finite = np.where(np.isfinite(inst[q0:q1]))[0]
        peak_inst = inst[q0 + finite[np.argmin(np.abs(finite + q0 - j))]] if finite.size else np.nan
    if t_probe <= t_pump:
        raise ValidationError("probe peak precedes pump peak; corrupt record")
    return FringeRecord(
        delay_s=delay_s,
        probe_peak_W=peak_w,
        probe_peak_time_s=t_probe,
        pump_peak_time_s=t_pump,
        separation_s=t_probe - t_pump,
        probe_energy_J=energy,
        peak_inst_freq_rad_per_s=float(peak_inst),
    )


def xfrog_trace(
    t: np.ndarray,
    envelope: np.ndarray,
    ref_envelope: np.ndarray,
    freq_bins: int,
    time_bins: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cross-correlation spectrogram of the signal gated by the reference.

    Returns (trace, gate_times, rel_omega): trace[i, j] is the magnitude
    squared of the windowed Fourier transform at gate delay gate_times[i]
    and angular frequency offset rel_omega[j] from the demodulation carrier.
    """
    t = np.asarray(t, float)
    sig = np.asarray(envelope)
    ref = np.asarray(ref_envelope)
    if sig.shape != t.shape or ref.shape != t.shape:
        raise ValidationError("signal, reference and time grid shapes must match")
    dt = t[1] - t[0]
    gate_times = np.linspace(t[0], t[-1], time_bins)
    n = t.size
    trace = np.empty((time_bins, freq_bins))
    omega = 2.0 * np.pi * np.fft.fftfreq(n, dt)
    order = np.argsort(omega)
    lo = n // 2 - freq_bins // 2
    sel = order[lo : lo + freq_bins]
    for i, tg in enumerate(gate_times):
        gate = _shifted_to(ref, int(round((tg - t[0]) / dt)))
        ft = np.fft.fft(sig * gate) * dt
        trace[i] = np.abs(ft[sel]) ** 2
    return trace, gate_times, omega[sel]


def _shifted_to(ref: np.ndarray, target_idx: int) -> np.ndarray:
    """Reference envelope shifted so its peak lands on ``target_idx``."""
    peak = int(np.argmax(np.abs(ref)))
    out = np.zeros_like(ref)
    k = target_idx - peak
    n = ref.size
    src_lo = max(0, -k)
    src_hi = min(n, n - k)
    if src_hi > src_lo:
        out[src_lo + k : src_hi + k] = ref[src_lo:src_hi]
    return out


def _sin_basis_fit(tau: np.ndarray, y: np.ndarray, period: float):
    """Least squares of y = p sin(2 pi tau / T) + q cos(...) + b for fixed T."""
    x = 2.0 * np.pi * tau / period
    a_mat = np.column_stack([np.sin(x), np.cos(x), np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(a_mat, y, rcond=None)
    resid = y - a_mat @ coef
    return coef, float(np.sum(resid**2))


def fit_sinusoid(
    tau: np.ndarray,
    y: np.ndarray,
    period_bounds_s: tuple[float, float],
    fixed_period_s: float | None = None,
):
    """Fit y = a sin(2 pi tau / T + phi) + b with free (grid + refined) period.

    Returns (a, phi, b, T, r_squared, amp_stderr).
    """
    tau = np.asarray(tau, float)
    y = np.asarray(y, float)
    if fixed_period_s is not None:
        best_t = fixed_period_s
    else:
        t_lo, t_hi = period_bounds_s
        grid = np.linspace(t_lo, t_hi, 1200)
        sses = np.array([_sin_basis_fit(tau, y, tv)[1] for tv in grid])
        k = int(np.argmin(sses))
        # Parabolic refinement on the SSE around the grid minimum.
        if 0 < k < grid.size - 1:
            denom = sses[k - 1] - 2 * sses[k] + sses[k + 1]
            shift = 0.5 * (sses[k - 1] - sses[k + 1]) / denom if denom != 0 else 0.0
            best_t = grid[k] + np.clip(shift, -1, 1) * (grid[1] - grid[0])
        else:
            best_t = grid[k]
    coef, sse = _sin_basis_fit(tau, y, best_t)
    p, q, b = coef
    a = float(np.hypot(p, q))
    phi = float(np.arctan2(q, p))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - sse / ss_tot if ss_tot > 0 else 1.0
    dof = max(1, y.size - 3)
    amp_se = float(np.sqrt(2.0 * (sse / dof) / y.size))
    return a, phi, b, float(best_t), r2, amp_se


def fringe_series(
    records: list[FringeRecord],
    period_bounds_s: tuple[float, float] = (2.5e-15, 9e-15),
) -> FringeSeriesFit:
    """Shared-period sinusoid fit of probe peak intensity and pulse separation.

    One free period T is chosen by minimizing the combined (variance
    normalized) residual of both series; amplitudes, phases and offsets are
    fit per series.  Visibility comes from the intensity fit; the reported
    lag is (phi_int - phi_sep) in cycles, wrapped to [0, 1).

    The separation series is fit as separation minus input delay: the input
    delay advances one-for-one with the fine scan, and only the
    propagation-induced shift around that trend carries fringe information.
    """
    if len(records) < 8:
        raise ValidationError("need at least 8 fine-delay samples for a fringe fit")
    tau = np.array([r.delay_s for r in records])
    y_int = np.array([r.probe_peak_W for r in records])
    y_sep = np.array([r.separation_s - r.delay_s for r in records])
    span = tau.max() - tau.min()
    if span < 1.5 * period_bounds_s[0]:
        raise ValidationError("fine scan span covers fewer than 1.5 fringe periods")

    def norm(y):
        s = np.std(y)
        return (y - y.mean()) / s if s > 0 else y - y.mean()

    yn_int, yn_sep = norm(y_int), norm(y_sep)
    t_lo, t_hi = period_bounds_s
    t_hi = min(t_hi, span / 1.5)
    grid = np.linspace(t_lo, t_hi, 1200)
    sses = np.array(
        [
            _sin_basis_fit(tau, yn_int, tv)[1] + _sin_basis_fit(tau, yn_sep, tv)[1]
            for tv in grid
        ]
    )
    k = int(np.argmin(sses))
    if 0 < k < grid.size - 1:
        denom = sses[k - 1] - 2 * sses[k] + sses[k + 1]
        shift = 0.5 * (sses[k - 1] - sses[k + 1]) / denom if denom != 0 else 0.0
        best_t = float(grid[k] + np.clip(shift, -1, 1) * (grid[1] - grid[0]))
    else:
        best_t = float(grid[k])

    a_i, phi_i, b_i, _, r2_i, se_i = fit_sinusoid(tau, y_int, period_bounds_s, fixed_period_s=best_t)
    a_s, phi_s, b_s, _, r2_s, se_s = fit_sinusoid(tau, y_sep, period_bounds_s, fixed_period_s=best_t)

    fringe_free = a_i < 3.0 * se_i
    visibility = a_i / b_i if b_i > 0 else np.nan
    lag = ((phi_i - phi_s) % (2.0 * np.pi)) / (2.0 * np.pi)
    return FringeSeriesFit(
        visibility=float(visibility),
        period_s=best_t,
        intensity_phase_rad=_wrap_phase(phi_i),
        separation_phase_rad=_wrap_phase(phi_s),
        lag_cycles=float(lag),
        intensity_amplitude=float(a_i),
        intensity_offset=float(b_i),
        separation_amplitude=float(a_s),
        fringe_free=bool(fringe_free),
        intensity_r2=float(r2_i),
        separation_r2=float(r2_s),
    )


def _wrap_phase(phi: float) -> float:
    """Wrap to (-pi, pi]."""
    out = (phi + np.pi) % (2.0 * np.pi) - np.pi
    if out == -np.pi:
        out = np.pi
    return float(out)


def fit_coherence(delays_s, visibilities) -> CoherenceFit:
    """Nonlinear least squares of V(tau) = A exp(-tau / t_coh).

    A non-decaying series is fitted anyway and flagged, never clamped.
    """
    tau = np.asarray(delays_s, float)
    vis = np.asarray(visibilities, float)
    if tau.size < 3:
        raise ValidationError("need at least 3 nominal delays for a coherence fit")
    # Log-linear seed (guard against non-positive visibilities).
    pos = vis > 0
    if pos.sum() >= 2:
        slope, intercept = np.polyfit(tau[pos], np.log(vis[pos]), 1)
    else:
        slope, intercept = 0.0, np.log(max(vis.max(), 1e-30))
    t0 = -1.0 / slope if slope < 0 else tau.max() * 10.0
    a0 = float(np.exp(intercept))

    def model(x, a, t_coh):
        return a * np.exp(-x / t_coh)

    try:
        popt, _ = curve_fit(model, tau, vis, p0=[a0, t0], maxfev=20000)
        a_fit, t_fit = float(popt[0]), float(popt[1])
    except RuntimeError:
        a_fit, t_fit = a0, t0
    # Diagnostic only, never clamped: rising trend, or a fitted constant so
    # long relative to the span that no decay was actually resolved.
    span = float(tau.max() - tau.min())
    non_decaying = bool(
        slope > 0 or not np.isfinite(t_fit) or t_fit <= 0 or t_fit > 100.0 * span
    )
    resid = vis - model(tau, a_fit, t_fit)
    ss_tot = float(np.sum((vis - vis.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return CoherenceFit(
        t_coh_s=t_fit,
        amplitude=a_fit,
        r_squared=r2,
        visibilities=vis,
        delays_s=tau,
        non_decaying=bool(non_decaying),
    )
