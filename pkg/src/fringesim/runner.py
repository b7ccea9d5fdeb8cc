"""Config-driven delay scan: propagate, analyze, persist.

One propagation per planned delay, scheduled on a bounded process pool
(workers share only the read-only config); rows are aggregated in delay
order before writing, so results are byte-identical at any parallelism.
Partial outputs carry a ``.partial`` suffix until the scan completes.
"""

from __future__ import annotations

import json
import multiprocessing
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .analysis import (
    FringeRecord,
    demodulate,
    fit_coherence,
    fringe_series,
    window_observables,
    xfrog_trace,
)
from .config import RunConfig
from .constants import FWHM_TO_SIGMA
from .errors import (
    DelayRunError,
    NumericalBlowupError,
    PhysicsInvariantError,
    ValidationError,
)
from .grid import make_grid
from .io_binary import MatrixDump, write_matrix
from .medium import EnsembleSpec, calibrate_dipole_moment
from .pulses import PulseSpec, chirped_fwhm, compose_pair, plan_scan
from .solver import run_propagation

CSV_HEADER = (
    "delay_fs,probe_peak_W,pump_peak_time_fs,probe_peak_time_fs,"
    "separation_fs,probe_energy_pJ,peak_inst_freq_THz"
)

# Tail appended after the probe peak: envelope tail, gain ringing, timing slop.
_TAIL_MARGIN_S = 350e-15


@dataclass
class ScanResult:
    results_csv: Path
    summary_json: Path
    records: list[FringeRecord]
    summary: dict


def coupled_pulses(config: RunConfig) -> tuple[PulseSpec, PulseSpec]:
    """Pump/probe specs with the per-arm coupling folded into the energy."""
    pump = replace(
        config.pump, energy_J=config.pump.energy_J * config.injection.pump_coupling_factor
    )
    probe = replace(
        config.probe,
        energy_J=config.probe.energy_J * config.injection.probe_coupling_factor,
    )
    return pump, probe


def calibrated_ensemble(config: RunConfig) -> EnsembleSpec:
    mu = calibrate_dipole_moment(
        config.medium, config.ensemble, config.injection.mode_area_m2
    )
    return replace(config.ensemble, dipole_moment_Cm=mu)


def _run_window(config: RunConfig, layout, pump: PulseSpec, probe: PulseSpec, delay_s):
    """(pump peak time, total duration) for one delay."""
    t_pump = 3.6 * chirped_fwhm(pump) * FWHM_TO_SIGMA
    slow_light = config.medium.length_m * config.medium.modal_gain_peak_per_m * (
        config.medium.t2_s / 2.0
    )
    duration = (
        t_pump
        + delay_s
        + 3.6 * chirped_fwhm(probe) * FWHM_TO_SIGMA
        + layout.flight_time_s()
        + slow_light
        + _TAIL_MARGIN_S
    )
    return t_pump, duration


def run_one_delay(config: RunConfig, delay_s: float, out_dir: Path | None = None):
    """Propagate one delay and extract its fringe observables."""
    ensemble = calibrated_ensemble(config)
    layout = make_grid(
        config.medium,
        ensemble,
        cells_per_wavelength=config.grid.cells_per_wavelength,
        courant=config.grid.courant,
        pad_vacuum_m=config.grid.pad_vacuum_m,
        taper_m=config.grid.taper_m,
    )
    pump, probe = coupled_pulses(config)
    mode_area = config.injection.mode_area_m2
    t_pump, duration = _run_window(config, layout, pump, probe, delay_s)

    def waveform(t):
        return compose_pair(pump, probe, delay_s, mode_area, np.atleast_1d(t), t_pump)

    snap_every = 0
    if config.outputs.emit_field_dumps:
        snap_every = max(1, int(duration / layout.spec.dt_s) // 400)
    result = run_propagation(
        config.medium,
        ensemble,
        layout,
        waveform,
        duration,
        mode_area_m2=mode_area,
        snap_every=snap_every,
    )
    tap = result.tap
    t = np.arange(tap.e_samples.size) * tap.dt_s
    bandwidth = 2.0 * np.pi * 0.441 / probe.fwhm_s
    record = demodulate(
        t, tap.e_samples, pump.omega0, 3.0 * bandwidth, mode_area
    )
    obs = window_observables(record, delay_s, mode=config.outputs.separation_mode)

    if out_dir is not None and config.outputs.emit_spectrograms:
        ref = np.exp(
            -0.5 * ((t - t.mean()) / (probe.fwhm_s * FWHM_TO_SIGMA)) ** 2
        )
        trace, gate_t, rel_omega = xfrog_trace(t, record.envelope, ref, 128, 256)
        write_matrix(
            out_dir / f"spectrogram_{_attoseconds(delay_s)}as.bin",
            MatrixDump(
                data=trace,
                row_step=float(gate_t[1] - gate_t[0]),
                col_step=float(rel_omega[1] - rel_omega[0]),
                row_origin=float(gate_t[0]),
                col_origin=float(rel_omega[0]),
            ),
        )
    if out_dir is not None and config.outputs.emit_field_dumps:
        spec = layout.spec
        write_matrix(
            out_dir / f"field_{_attoseconds(delay_s)}as.bin",
            MatrixDump(
                data=result.snapshots_e,
                row_step=spec.dt_s * snap_every,
                col_step=spec.dz_m * 8,
            ),
        )
        write_matrix(
            out_dir / f"inversion_{_attoseconds(delay_s)}as.bin",
            MatrixDump(
                data=result.snapshots_inversion,
                row_step=spec.dt_s * snap_every,
                col_step=spec.dz_m * 8,
                col_origin=layout.med_lo * spec.dz_m,
            ),
        )
    return obs


def _attoseconds(delay_s: float) -> int:
    return int(round(delay_s * 1e18))


def _guarded_delay(config, delay_s, out_dir):
    try:
        return run_one_delay(config, delay_s, out_dir)
    except (NumericalBlowupError, PhysicsInvariantError) as exc:
        raise DelayRunError(delay_s, str(exc), kind="numerical") from exc
    except ValidationError as exc:
        raise DelayRunError(delay_s, str(exc), kind="config") from exc


def _worker(payload):
    config, delay_s, out_dir, threads = payload
    import numba

    numba.set_num_threads(threads)
    obs = _guarded_delay(config, delay_s, Path(out_dir) if out_dir else None)
    return delay_s, obs


def _csv_row(r: FringeRecord) -> str:
    cols = (
        r.delay_s * 1e15,
        r.probe_peak_W,
        r.pump_peak_time_s * 1e15,
        r.probe_peak_time_s * 1e15,
        r.separation_s * 1e15,
        r.probe_energy_J * 1e12,
        r.peak_inst_freq_rad_per_s / (2.0 * np.pi) / 1e12,
    )
    return ",".join(f"{c:.6f}" for c in cols)


def run_scan(
    config: RunConfig,
    output_dir: str | None = None,
    parallelism: int | None = None,
) -> ScanResult:
    """Run every planned delay, then write results.csv and summary.json."""
    out_dir = Path(output_dir if output_dir is not None else config.outputs.directory)
    out_dir.mkdir(parents=True, exist_ok=True)
    workers = parallelism if parallelism is not None else config.parallelism
    if workers == 0:
        workers = os.cpu_count() or 1

    delays = plan_scan(config.scan)
    cpu = os.cpu_count() or 1
    threads = max(1, cpu // max(1, min(workers, len(delays))))

    results_path = out_dir / "results.csv"
    summary_path = out_dir / "summary.json"
    partial_csv = out_dir / "results.csv.partial"
    partial_json = out_dir / "summary.json.partial"

    outcome = []
    with open(partial_csv, "w", encoding="utf-8") as partial:
        partial.write(CSV_HEADER + "\n")
        if workers <= 1:
            import numba

            numba.set_num_threads(cpu)
            for d in delays:
                obs = _guarded_delay(config, d, out_dir)
                outcome.append((d, obs))
                partial.write(_csv_row(obs) + "\n")
                partial.flush()
        else:
            payloads = [(config, d, str(out_dir), threads) for d in delays]
            # spawn: forking after the parent has run parallel numba kernels
            # is unsafe with the workqueue threading layer
            ctx = multiprocessing.get_context("spawn")
            with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
                for d, obs in pool.map(_worker, payloads):
                    outcome.append((d, obs))
                    partial.write(_csv_row(obs) + "\n")
                    partial.flush()

    outcome.sort(key=lambda item: item[0])
    records = [obs for _, obs in outcome]

    lines = [CSV_HEADER] + [_csv_row(r) for r in records]
    partial_csv.write_text("\n".join(lines) + "\n", encoding="utf-8")
    partial_csv.replace(results_path)

    summary = build_summary(config, records)
    partial_json.write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    partial_json.replace(summary_path)

    return ScanResult(
        results_csv=results_path,
        summary_json=summary_path,
        records=records,
        summary=summary,
    )


def build_summary(config: RunConfig, records: list[FringeRecord]) -> dict:
    """Per-nominal-delay fringe fits plus the global coherence fit."""
    per_delay = []
    visibilities = []
    nominals = []
    for nominal in config.scan.nominal_delays_s:
        lo = nominal - 0.5 * config.scan.fine_step_s
        hi = nominal + config.scan.fine_span_s + 0.5 * config.scan.fine_step_s
        group = [r for r in records if lo <= r.delay_s <= hi]
        if len(group) < 8:
            # too sparse for a fringe fit (e.g. zero-span scans)
            per_delay.append(
                {
                    "nominal_delay_fs": nominal * 1e15,
                    "visibility": None,
                    "fitted_period_fs": None,
                    "intensity_phase_rad": None,
                    "separation_phase_rad": None,
                    "lag_cycles": None,
                    "separation_amplitude_fs": None,
                    "fringe_free": None,
                }
            )
            continue
        fit = fringe_series(group)
        per_delay.append(
            {
                "nominal_delay_fs": nominal * 1e15,
                "visibility": fit.visibility,
                "fitted_period_fs": fit.period_s * 1e15,
                "intensity_phase_rad": fit.intensity_phase_rad,
                "separation_phase_rad": fit.separation_phase_rad,
                "lag_cycles": fit.lag_cycles,
                "separation_amplitude_fs": fit.separation_amplitude * 1e15,
                "fringe_free": fit.fringe_free,
            }
        )
        visibilities.append(fit.visibility)
        nominals.append(nominal)
    if len(nominals) >= 3:
        coh = fit_coherence(np.array(nominals), np.array(visibilities))
        coherence = {
            "t_coh_fs": coh.t_coh_s * 1e15,
            "r_squared": coh.r_squared,
            "amplitude": coh.amplitude,
            "non_decaying": coh.non_decaying,
        }
    else:
        coherence = None  # needs >= 3 nominal delays
    return {"per_nominal_delay": per_delay, "coherence": coherence}
