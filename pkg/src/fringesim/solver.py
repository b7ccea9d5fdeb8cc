"""Co-integration of the 1-D field and the per-cell, per-group density matrices.

The electric and magnetic fields leapfrog on a staggered Yee grid with
first-order Mur absorbing ends; a one-way total-field/scattered-field seam
in the left vacuum pad launches the injected waveform.  Each grid step the
density matrices advance with a second-order predictor-corrector: a
predictor Bloch pass under the current field yields a provisional
polarization and field, and the committed pass runs under the midpoint
field.  Optional two-photon absorption and Kerr corrections apply as local
intensity-dependent terms in the field update.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .constants import C_LIGHT, EPS0, ETA0, HBAR, MU0
from .errors import NumericalBlowupError, PhysicsInvariantError, ValidationError
from .grid import GridLayout
from .medium import (
    EnsembleSpec,
    MediumSpec,
    SpectralGroup,
    build_ensemble,
    calibrate_dipole_moment,
    effective_dot_density,
    group_frequencies,
    group_weights,
    steady_state_occupations,
)

MIN_STEPS_PER_CYCLE = 25

# A run must end with a quiet tap: trailing field above this fraction of the
# record peak means the window truncated the probe pulse.
TAP_TAIL_WINDOW_S = 30e-15
TAP_TAIL_FRACTION = 0.02


@dataclass
class FieldState:
    """Staggered field arrays plus the medium polarization at E-cells."""

    e_field: np.ndarray
    h_field: np.ndarray
    polarization: np.ndarray
    time_s: float


@dataclass
class ProbeTap:
    """Output-facet field samples, one per executed step."""

    position_cell: int
    e_samples: np.ndarray
    dt_s: float


@dataclass
class PropagationResult:
    tap: ProbeTap
    final_field: FieldState
    groups: list[SpectralGroup]
    input_facet_samples: np.ndarray | None = None
    energy_vs_step: np.ndarray | None = None
    snapshots_e: np.ndarray | None = None
    snapshots_inversion: np.ndarray | None = None


class BlochState:
    """Packed (groups x cells) density-matrix arrays for the active region."""

    def __init__(self, num_cells: int, ensemble: EnsembleSpec):
        ng = ensemble.num_groups
        self.omegas = group_frequencies(ensemble)
        self.weights = group_weights(ensemble)
        shape = (ng, num_cells)
        self.u = np.zeros(shape)
        self.v = np.zeros(shape)
        self.oee = np.zeros(shape)
        self.ogg = np.zeros(shape)
        self.oes = np.zeros(shape)
        self.ores = np.zeros(shape)

    @classmethod
    def from_groups(cls, groups: list[SpectralGroup], ensemble: EnsembleSpec):
        state = cls(groups[0].rho_gg.size, ensemble)
        for g, grp in enumerate(groups):
            state.u[g] = grp.coh_re
            state.v[g] = grp.coh_im
            state.oee[g] = grp.rho_ee
            state.ogg[g] = grp.rho_gg
            state.oes[g] = grp.rho_es
            state.ores[g] = grp.rho_res
        return state

    def to_groups(self, ensemble: EnsembleSpec) -> list[SpectralGroup]:
        groups = build_ensemble(ensemble, self.u.shape[1])
        for g, grp in enumerate(groups):
            grp.coh_re[:] = self.u[g]
            grp.coh_im[:] = self.v[g]
            grp.rho_ee[:] = self.oee[g]
            grp.rho_gg[:] = self.ogg[g]
            grp.rho_es[:] = self.oes[g]
            grp.rho_res[:] = self.ores[g]
        return groups

    def set_steady_state(self, medium: MediumSpec):
        rs, es, ee, gg = steady_state_occupations(medium)
        self.ores[:] = rs
        self.oes[:] = es
        self.oee[:] = ee
        self.ogg[:] = gg

    def set_inversion(self, rho_ee: float, rho_gg: float = 0.0):
        self.oee[:] = rho_ee
        self.ogg[:] = rho_gg
        self.oes[:] = 0.0
        self.ores[:] = 0.0


@dataclass(frozen=True)
class SolverParams:
    """Scalar coefficients handed to the kernels."""

    mu_over_hbar: float
    pol_prefactor: float
    decay_half: float
    pump: float
    inv_tau_cap: float
    inv_tau_rel: float
    inv_tau_rec: float
    tpa_sigma_coef: float
    kerr_coef: float


def solver_params(
    medium: MediumSpec,
    ensemble: EnsembleSpec,
    dt_s: float,
    mode_area_m2: float,
) -> SolverParams:
    mu = ensemble.dipole_moment_Cm
    n_eff = (
        effective_dot_density(medium, mode_area_m2)
        if medium.dot_sheet_density_per_m2 > 0
        else 0.0
    )
    n_bg = medium.background_index
    tpa_sigma = (
        (2.0 / 3.0) * medium.tpa_coeff_m_per_W * (EPS0 * C_LIGHT * n_bg) ** 2
        if medium.tpa_coeff_m_per_W
        else 0.0
    )
    kerr = (
        2.0 * n_bg * medium.kerr_index_m2_per_W * (EPS0 * C_LIGHT * n_bg)
        if medium.kerr_index_m2_per_W
        else 0.0
    )
    return SolverParams(
        mu_over_hbar=mu / HBAR,
        pol_prefactor=n_eff * mu,
        decay_half=float(np.exp(-dt_s / (2.0 * medium.t2_s))),
        pump=medium.pump_rate_per_s,
        inv_tau_cap=1.0 / medium.tau_res_to_es_s,
        inv_tau_rel=1.0 / medium.tau_es_to_gs_s,
        inv_tau_rec=1.0 / medium.tau_recomb_s,
        tpa_sigma_coef=tpa_sigma,
        kerr_coef=kerr,
    )


def step_bloch(
    groups: list[SpectralGroup],
    e_field_at_cells: np.ndarray,
    medium: MediumSpec,
    dt_s: float,
    ensemble: EnsembleSpec,
    mode_area_m2: float = 0.5e-12,
) -> list[SpectralGroup]:
    """Advance the density matrices one step under a prescribed field.

    For second-order accuracy pass the field evaluated at the step midpoint.
    Checks the fastest-transition sampling bound and, afterwards, the
    occupation/positivity invariants.
    """
    omegas = group_frequencies(ensemble)
    if omegas.max() * dt_s > 2.0 * np.pi / MIN_STEPS_PER_CYCLE:
        raise ValidationError(
            "dt too coarse: need >= 25 steps per optical cycle of the fastest group"
        )
    state = BlochState.from_groups(groups, ensemble)
    params = solver_params(medium, ensemble, dt_s, mode_area_m2)
    pol = np.empty(state.u.shape[1])
    kernels.bloch_pass(
        state.u, state.v, state.oee, state.ogg, state.oes, state.ores,
        np.ascontiguousarray(e_field_at_cells, dtype=float), True,
        omegas, state.weights,
        params.mu_over_hbar, dt_s, params.decay_half,
        params.pump, params.inv_tau_cap, params.inv_tau_rel, params.inv_tau_rec,
        params.pol_prefactor, pol,
    )
    bad = kernels.check_invariants(
        state.u, state.v, state.oee, state.ogg, state.oes, state.ores
    )
    if bad >= 0:
        raise PhysicsInvariantError(0, bad // ensemble.num_groups)
    return state.to_groups(ensemble)


def make_injection_arrays(
    waveform_fn,
    nsteps: int,
    dt_s: float,
    dz_m: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Incident E and impedance-scaled H series for the one-way source seam.

    ``waveform_fn(t)`` is the incident field at the seam cell.  The H series
    is evaluated at the half-step time plus the half-cell flight offset of
    the staggered grid and divided by the vacuum impedance.
    """
    tgrid = np.arange(nsteps) * dt_s
    einc = waveform_fn(tgrid)
    hinc = waveform_fn(tgrid + 0.5 * dt_s + 0.5 * dz_m / C_LIGHT) / ETA0
    return einc, hinc


def run_propagation(
    medium: MediumSpec,
    ensemble: EnsembleSpec,
    layout: GridLayout,
    waveform_fn,
    duration_s: float,
    mode_area_m2: float = 0.5e-12,
    initial_inversion: float | None = None,
    record_energy: bool = False,
    record_input_facet: bool = False,
    debug_checks: bool = False,
    snap_every: int = 0,
    snap_stride: int = 8,
) -> PropagationResult:
    """Propagate an injected waveform and record the output-facet field.

    The medium starts from the field-free pumped fixed point unless
    ``initial_inversion`` pins rho_ee directly.  Deterministic: identical
    inputs produce bit-identical outputs.
    """
    spec = layout.spec
    dt, dz = spec.dt_s, spec.dz_m
    nsteps = int(np.ceil(duration_s / dt))
    n = spec.num_cells
    e = np.zeros(n)
    h = np.zeros(n - 1)
    ce = dt / (EPS0 * layout.eps_r * dz)
    inv_eps = 1.0 / (EPS0 * layout.eps_r)
    ch = dt / (MU0 * dz)
    kmur = (C_LIGHT * dt - dz) / (C_LIGHT * dt + dz)

    nmed = layout.num_medium_cells
    has_medium = (
        nmed > 0
        and medium.dot_sheet_density_per_m2 > 0
        and medium.modal_gain_peak_per_m > 0
    )
    if has_medium:
        omega_fast = group_frequencies(ensemble).max()
        if omega_fast * dt > 2.0 * np.pi / MIN_STEPS_PER_CYCLE:
            raise ValidationError("dt too coarse for the fastest transition frequency")
    mu = ensemble.dipole_moment_Cm
    if has_medium and mu == 0.0:
        ensemble = EnsembleSpec(
            center_wavelength_m=ensemble.center_wavelength_m,
            inhomog_fwhm_eV=ensemble.inhomog_fwhm_eV,
            num_groups=ensemble.num_groups,
            dipole_moment_Cm=calibrate_dipole_moment(medium, ensemble, mode_area_m2),
        )

    state = BlochState(max(nmed, 1), ensemble)
    if has_medium:
        if initial_inversion is None:
            state.set_steady_state(medium)
        else:
            state.set_inversion(initial_inversion)
    params = solver_params(medium, ensemble, dt, mode_area_m2)
    min_tau = min(medium.tau_res_to_es_s, medium.tau_es_to_gs_s, medium.tau_recomb_s)
    if dt > 0.2 * min_tau:
        raise ValidationError("dt too coarse for the fastest relaxation time constant")
    relax_every = int(max(1, min(16, 0.1 * min_tau / dt)))

    einc, hinc = make_injection_arrays(waveform_fn, nsteps, dt, dz)

    tap = np.empty(nsteps)
    aux = np.empty(nsteps if record_input_facet else 0)
    energy = np.empty(nsteps if record_energy else 0)
    if snap_every > 0:
        rows = nsteps // snap_every + 1
        snap_e = np.zeros((rows, (n + snap_stride - 1) // snap_stride))
        snap_inv = np.zeros((rows, (max(nmed, 1) + snap_stride - 1) // snap_stride))
    else:
        snap_e = np.zeros((0, 0))
        snap_inv = np.zeros((0, 0))

    status, step, cell = kernels.run_core(
        e, h, ce, inv_eps, ch, kmur,
        layout.med_lo, layout.med_hi if has_medium else layout.med_lo,
        layout.src_cell, einc, hinc, layout.tap_cell, layout.med_lo, nsteps,
        state.u, state.v, state.oee, state.ogg, state.oes, state.ores,
        state.omegas, state.weights,
        params.mu_over_hbar, dt, params.decay_half,
        params.pump, params.inv_tau_cap, params.inv_tau_rel, params.inv_tau_rec,
        params.pol_prefactor, relax_every, has_medium,
        params.tpa_sigma_coef, params.kerr_coef,
        tap, aux, energy, dz, layout.eps_r, EPS0, MU0,
        debug_checks, snap_every, snap_stride, snap_e, snap_inv,
    )
    if status == kernels.STATUS_NAN:
        raise NumericalBlowupError(step, cell)
    if status == kernels.STATUS_INVARIANT:
        raise PhysicsInvariantError(step, cell)

    peak = np.max(np.abs(tap))
    if peak > 0:
        tail = tap[-max(2, int(TAP_TAIL_WINDOW_S / dt)):]
        if np.max(np.abs(tail)) > TAP_TAIL_FRACTION * peak:
            raise ValidationError(
                "run length overflow: the tap window truncates the probe "
                "pulse (field still present at the final step)"
            )

    pol = np.zeros(n)
    if has_medium:
        pol[layout.med_lo : layout.med_hi] = (
            params.pol_prefactor * 2.0 * (state.u * state.weights[:, None]).sum(axis=0)
        )
    return PropagationResult(
        tap=ProbeTap(position_cell=layout.tap_cell, e_samples=tap, dt_s=dt),
        input_facet_samples=aux if record_input_facet else None,
        final_field=FieldState(
            e_field=e, h_field=h, polarization=pol, time_s=nsteps * dt
        ),
        groups=state.to_groups(ensemble) if has_medium else [],
        energy_vs_step=energy if record_energy else None,
        snapshots_e=snap_e if snap_every > 0 else None,
        snapshots_inversion=snap_inv if snap_every > 0 else None,
    )


def step_field(
    field: FieldState,
    layout: GridLayout,
    new_polarization: np.ndarray | None = None,
) -> FieldState:
    """One leapfrog field step with Mur boundaries and an optional dP source.

    ``new_polarization`` is the polarization after this step at E-cells;
    the update consumes its difference from ``field.polarization``.
    """
    spec = layout.spec
    dt, dz = spec.dt_s, spec.dz_m
    e = field.e_field.copy()
    h = field.h_field.copy()
    ce = dt / (EPS0 * layout.eps_r * dz)
    ch = dt / (MU0 * dz)
    kmur = (C_LIGHT * dt - dz) / (C_LIGHT * dt + dz)
    n = e.size
    e0_old, e1_old = e[0], e[1]
    em1_old, em2_old = e[-1], e[-2]
    kernels.field_update_h(e, h, ch)
    enew = np.empty_like(e)
    kernels.field_update_e_linear(e, h, ce, enew)
    if new_polarization is not None:
        dp = new_polarization - field.polarization
        enew[1:-1] -= dp[1:-1] / (EPS0 * layout.eps_r[1:-1])
        pol = np.asarray(new_polarization, dtype=float)
    else:
        pol = field.polarization
    enew[0] = e1_old + kmur * (enew[1] - e0_old)
    enew[-1] = em2_old + kmur * (enew[-2] - em1_old)
    if not np.all(np.isfinite(enew)):
        bad = int(np.where(~np.isfinite(enew))[0][0])
        raise NumericalBlowupError(int(round(field.time_s / dt)), bad)
    return FieldState(
        e_field=enew, h_field=h, polarization=pol, time_s=field.time_s + dt
    )
