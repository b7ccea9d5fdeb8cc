"""The four figure kinds: fringes, decay, lag, spectrogram.

Colors follow the measurement convention: intensity blue, instantaneous
frequency green, separation red.  Rendering never mutates its inputs; the
same inputs and dpi produce identical image dimensions and plotted arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .io import SchemaError, read_matrix_dump, read_results, read_summary

KINDS = ("fringes", "decay", "lag", "spectrogram")

COLOR_INTENSITY = "tab:blue"
COLOR_FREQ = "tab:green"
COLOR_SEPARATION = "tab:red"


@dataclass(frozen=True)
class FigureRequest:
    kind: str
    input_path: str
    output_path: str
    summary_path: str | None = None
    dpi: int = 150

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}")
        if not Path(self.input_path).exists():
            raise SchemaError(f"input not found: {self.input_path}")
        if self.summary_path is not None and not Path(self.summary_path).exists():
            raise SchemaError(f"summary not found: {self.summary_path}")


def render(request: FigureRequest) -> Path:
    """Render one figure; returns the written path."""
    builder = {
        "fringes": _build_fringes,
        "decay": _build_decay,
        "lag": _build_lag,
        "spectrogram": _build_spectrogram,
    }[request.kind]
    fig, title = builder(request)
    out = Path(request.output_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=request.dpi, metadata={"Title": title})
    plt.close(fig)
    return out


def _group_rows(results, nominal_fs, span_fs=12.5):
    sel = (results["delay_fs"] >= nominal_fs - 0.5) & (
        results["delay_fs"] <= nominal_fs + span_fs
    )
    return {k: v[sel] for k, v in results.items()}


def _sin_overlay(tau_fs, y, period_fs, phase_rad):
    """Amplitude/offset of a sinusoid with known period and phase (least squares)."""
    basis = np.sin(2 * np.pi * tau_fs / period_fs + phase_rad)
    a_mat = np.column_stack([basis, np.ones_like(basis)])
    (amp, off), *_ = np.linalg.lstsq(a_mat, y, rcond=None)
    grid = np.linspace(tau_fs.min(), tau_fs.max(), 300)
    return grid, amp * np.sin(2 * np.pi * grid / period_fs + phase_rad) + off


def _build_fringes(request):
    results = read_results(request.input_path)
    summary = read_summary(request.summary_path) if request.summary_path else None
    entries = summary["per_nominal_delay"] if summary else []
    nominals = (
        [e["nominal_delay_fs"] for e in entries]
        if entries
        else [float(results["delay_fs"].min())]
    )
    fig, axes = plt.subplots(
        len(nominals), 1, figsize=(6.4, 2.2 * len(nominals)), sharex=False,
        squeeze=False,
    )
    for ax, nominal in zip(axes[:, 0], nominals):
        rows = _group_rows(results, nominal)
        tau = rows["delay_fs"]
        y = rows["probe_peak_W"]
        ax.plot(tau - nominal, y, "o", color=COLOR_INTENSITY, ms=4)
        entry = next(
            (e for e in entries if e["nominal_delay_fs"] == nominal), None
        )
        if entry and entry.get("fitted_period_fs"):
            grid, fit = _sin_overlay(
                tau, y, entry["fitted_period_fs"], entry["intensity_phase_rad"]
            )
            ax.plot(grid - nominal, fit, "-", color=COLOR_INTENSITY, lw=1)
            ax.set_title(
                f"{nominal:.0f} fs: visibility {entry['visibility']:.3f}, "
                f"period {entry['fitted_period_fs']:.2f} fs",
                fontsize=9,
            )
        ax.set_ylabel("probe peak (W)", fontsize=8)
    axes[-1, 0].set_xlabel("fine delay (fs)")
    fig.tight_layout()
    return fig, "probe-peak fringes per nominal delay"


def _build_decay(request):
    summary = read_summary(request.input_path)
    entries = [
        e for e in summary["per_nominal_delay"] if e.get("visibility") is not None
    ]
    if not entries:
        raise SchemaError("summary carries no fitted visibilities")
    tau = np.array([e["nominal_delay_fs"] for e in entries])
    vis = np.array([e["visibility"] for e in entries])
    coh = summary.get("coherence")
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    ax.plot(tau, vis, "o", color=COLOR_INTENSITY, label="visibility")
    title = "visibility decay"
    if coh:
        t_coh = coh["t_coh_fs"]
        grid = np.linspace(tau.min() * 0.95, tau.max() * 1.05, 200)
        ax.plot(
            grid,
            coh["amplitude"] * np.exp(-grid / t_coh),
            "-",
            color=COLOR_INTENSITY,
            lw=1,
            label="exponential fit",
        )
        title = (
            f"visibility decay: T_coh = {t_coh:.0f} fs "
            f"(R^2 = {coh['r_squared']:.2f})"
        )
    ax.set_title(title, fontsize=10)
    ax.set_xlabel("nominal delay (fs)")
    ax.set_ylabel("fringe visibility")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig, title


def _build_lag(request):
    results = read_results(request.input_path)
    summary = read_summary(request.summary_path) if request.summary_path else None
    entries = summary["per_nominal_delay"] if summary else []
    nominal = (
        entries[0]["nominal_delay_fs"] if entries else float(results["delay_fs"].min())
    )
    rows = _group_rows(results, nominal)
    tau = rows["delay_fs"]
    inten = rows["probe_peak_W"]
    sep = rows["separation_fs"] - rows["delay_fs"]

    def normalized(y):
        span = y.max() - y.min()
        return (y - y.min()) / span if span > 0 else y * 0.0

    fig, ax1 = plt.subplots(figsize=(5.6, 3.6))
    ax2 = ax1.twinx()
    ax1.plot(tau, normalized(inten), "o-", color=COLOR_INTENSITY, ms=4,
             label="normalized intensity")
    ax2.plot(tau, normalized(sep), "s--", color=COLOR_SEPARATION, ms=4,
             label="normalized separation shift")
    entry = next((e for e in entries if e["nominal_delay_fs"] == nominal), None)
    title = f"intensity vs separation at {nominal:.0f} fs"
    if entry and entry.get("lag_cycles") is not None:
        title += f": separation lags by {entry['lag_cycles']:.3f} cycles"
    ax1.set_title(title, fontsize=10)
    ax1.set_xlabel("delay (fs)")
    ax1.set_ylabel("intensity (norm.)", color=COLOR_INTENSITY)
    ax2.set_ylabel("separation shift (norm.)", color=COLOR_SEPARATION)
    fig.tight_layout()
    return fig, title


def _build_spectrogram(request):
    data, row_step, col_step, row_origin, col_origin = read_matrix_dump(
        request.input_path
    )
    t_axis = (row_origin + row_step * np.arange(data.shape[0])) * 1e15
    f_axis = (col_origin + col_step * np.arange(data.shape[1])) / (2 * np.pi) / 1e12
    fig, ax = plt.subplots(figsize=(5.6, 3.8))
    mesh = ax.pcolormesh(t_axis, f_axis, data.T, shading="auto", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label="spectral density")
    ax.set_xlabel("gate time (fs)")
    ax.set_ylabel("frequency offset (THz)")
    title = "cross-correlation spectrogram"
    ax.set_title(title, fontsize=10)
    fig.tight_layout()
    return fig, title
