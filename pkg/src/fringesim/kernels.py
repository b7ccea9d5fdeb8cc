"""Numba kernels for the coupled field/density-matrix time stepping.

The update rule: the coherent part of each step is an exact rotation of the
Bloch vector (u, v, w/2) about the axis (2*Omega, 0, -omega_g), with sin/cos
evaluated by a branchless degree-7/8 Taylor expansion (error < 6e-9 for
angles up to 0.5 rad; the stability validator caps omega*dt at 0.25).
Dephasing and the reservoir chain are split symmetrically around the
rotation.  :func:`bloch_pass` implements it for the single-step API;
:func:`bloch_fused_step` carries the same rule through the
predictor-corrector of the propagation loop with the reservoir chain
subcycled out (see :func:`relax_pass`) - the solver-versus-reference tests
pin the two paths together.  State arrays are (num_groups, num_cells) so
the inner loops run contiguously over cells and vectorize.
"""

import math

import numpy as np
from numba import njit, prange

STATUS_OK = 0
STATUS_NAN = 1
STATUS_INVARIANT = 2

INVARIANT_TOL = 1e-9

# Fields beyond this are treated as a numerical blowup even while finite.
FIELD_SANITY_VPM = 1e12

_BLOCK = 256


@njit(cache=True, parallel=True, fastmath=True)
def bloch_pass(
    u,
    v,
    oee,
    ogg,
    oes,
    ores,
    evals,
    commit,
    omegas,
    weights,
    mu_over_hbar,
    dt,
    decay_half,
    pump,
    inv_tau_cap,
    inv_tau_rel,
    inv_tau_rec,
    pol_prefactor,
    pol_out,
):
    """Advance every (group, cell) pair by one dt under the field ``evals``.

    With ``commit`` false the pass only evaluates the would-be polarization
    (predictor); with it true the new state is stored.  ``pol_out`` receives
    pol_prefactor * 2 * sum_g weight_g * u_g per cell.
    """
    ng, ncells = u.shape
    h = 0.5 * dt
    pref2 = 2.0 * pol_prefactor
    nblocks = (ncells + _BLOCK - 1) // _BLOCK
    for b in prange(nblocks):
        lo = b * _BLOCK
        hi = min(ncells, lo + _BLOCK)
        for i in range(lo, hi):
            pol_out[i] = 0.0
        for g in range(ng):
            om = omegas[g]
            wgt = weights[g]
            if commit:
                for i in range(lo, hi):
                    uu = u[g, i]
                    vv = v[g, i]
                    ee = oee[g, i]
                    gg = ogg[g, i]
                    es = oes[g, i]
                    rs = ores[g, i]

                    fill_es = rs * (1.0 - es) * inv_tau_cap
                    fill_ee = es * (1.0 - ee) * inv_tau_rel
                    rs += (pump * (1.0 - rs) - fill_es) * h
                    es += (fill_es - fill_ee) * h
                    ee += (fill_ee - ee * inv_tau_rec) * h
                    gg -= gg * inv_tau_rec * h
                    uu *= decay_half
                    vv *= decay_half

                    drive = mu_over_hbar * evals[i]
                    w2 = 0.5 * (ee - gg)
                    m = 0.5 * (ee + gg)
                    tx = 2.0 * drive
                    tn = math.sqrt(tx * tx + om * om)
                    x = tn * dt
                    x2 = x * x
                    s = x * (1.0 - x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0)))
                    c = 1.0 - x2 / 2.0 * (
                        1.0 - x2 / 12.0 * (1.0 - x2 / 30.0 * (1.0 - x2 / 56.0))
                    )
                    a1 = tx / tn
                    a3 = -om / tn
                    adotr = a1 * uu + a3 * w2
                    omc = 1.0 - c
                    un = uu * c - a3 * vv * s + a1 * adotr * omc
                    vn = vv * c + (a3 * uu - a1 * w2) * s
                    w2n = w2 * c + a1 * vv * s + a3 * adotr * omc
                    uu = un
                    vv = vn
                    ee = m + w2n
                    gg = m - w2n

                    uu *= decay_half
                    vv *= decay_half
                    fill_es = rs * (1.0 - es) * inv_tau_cap
                    fill_ee = es * (1.0 - ee) * inv_tau_rel
                    rs += (pump * (1.0 - rs) - fill_es) * h
                    es += (fill_es - fill_ee) * h
                    ee += (fill_ee - ee * inv_tau_rec) * h
                    gg -= gg * inv_tau_rec * h

                    pol_out[i] += wgt * uu
                    u[g, i] = uu
                    v[g, i] = vv
                    oee[g, i] = ee
                    ogg[g, i] = gg
                    oes[g, i] = es
                    ores[g, i] = rs
            else:
                for i in range(lo, hi):
                    uu = u[g, i]
                    vv = v[g, i]
                    ee = oee[g, i]
                    gg = ogg[g, i]

                    uu *= decay_half
                    vv *= decay_half
                    drive = mu_over_hbar * evals[i]
                    w2 = 0.5 * (ee - gg)
                    tx = 2.0 * drive
                    tn = math.sqrt(tx * tx + om * om)
                    x = tn * dt
                    x2 = x * x
                    s = x * (1.0 - x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0)))
                    c = 1.0 - x2 / 2.0 * (
                        1.0 - x2 / 12.0 * (1.0 - x2 / 30.0 * (1.0 - x2 / 56.0))
                    )
                    a1 = tx / tn
                    a3 = -om / tn
                    adotr = a1 * uu + a3 * w2
                    un = (uu * c - a3 * vv * s + a1 * adotr * (1.0 - c)) * decay_half
                    pol_out[i] += wgt * un
        for i in range(lo, hi):
            pol_out[i] *= pref2


@njit(cache=True, parallel=True, fastmath=True)
def bloch_fused_step(
    u,
    v,
    oee,
    ogg,
    oes,
    ores,
    e_old,
    elin,
    inv_eps_med,
    pol_old,
    enew_med,
    omegas,
    weights,
    mu_over_hbar,
    dt,
    decay_half,
    pol_prefactor,
    scr_pstar,
    scr_emid,
    scr_pacc,
):
    """One predictor-corrector Bloch/field-coupling step, fused per cell block.

    The predictor sweep (no stores) yields the provisional polarization, the
    midpoint field follows per cell, and the corrector sweep commits the new
    state; the corrected E is written to ``enew_med``.  Reservoir-chain
    relaxation is handled separately by :func:`relax_pass`.  Scratch arrays
    are (nblocks, block) to keep the loop allocation-free.
    """
    ng, ncells = u.shape
    pref2 = 2.0 * pol_prefactor
    nblocks = (ncells + _BLOCK - 1) // _BLOCK
    for b in prange(nblocks):
        lo = b * _BLOCK
        hi = min(ncells, lo + _BLOCK)
        nb = hi - lo
        pstar = scr_pstar[b]
        emid = scr_emid[b]
        pacc = scr_pacc[b]
        for k in range(nb):
            pstar[k] = 0.0
            pacc[k] = 0.0
        for g in range(ng):
            om = omegas[g]
            wgt = weights[g]
            for k in range(nb):
                i = lo + k
                uu = u[g, i] * decay_half
                vv = v[g, i] * decay_half
                w2 = 0.5 * (oee[g, i] - ogg[g, i])
                tx = 2.0 * mu_over_hbar * e_old[i]
                tn = math.sqrt(tx * tx + om * om)
                x = tn * dt
                x2 = x * x
                s = x * (1.0 - x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0)))
                c = 1.0 - x2 / 2.0 * (
                    1.0 - x2 / 12.0 * (1.0 - x2 / 30.0 * (1.0 - x2 / 56.0))
                )
                a1 = tx / tn
                a3 = -om / tn
                adotr = a1 * uu + a3 * w2
                un = (uu * c - a3 * vv * s + a1 * adotr * (1.0 - c)) * decay_half
                pstar[k] += wgt * un
        for k in range(nb):
            i = lo + k
            estar = elin[i] - inv_eps_med[i] * (pref2 * pstar[k] - pol_old[i])
            emid[k] = 0.5 * (e_old[i] + estar)
        for g in range(ng):
            om = omegas[g]
            wgt = weights[g]
            for k in range(nb):
                i = lo + k
                uu = u[g, i] * decay_half
                vv = v[g, i] * decay_half
                ee = oee[g, i]
                gg = ogg[g, i]
                w2 = 0.5 * (ee - gg)
                m = 0.5 * (ee + gg)
                tx = 2.0 * mu_over_hbar * emid[k]
                tn = math.sqrt(tx * tx + om * om)
                x = tn * dt
                x2 = x * x
                s = x * (1.0 - x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0)))
                c = 1.0 - x2 / 2.0 * (
                    1.0 - x2 / 12.0 * (1.0 - x2 / 30.0 * (1.0 - x2 / 56.0))
                )
                a1 = tx / tn
                a3 = -om / tn
                adotr = a1 * uu + a3 * w2
                omc = 1.0 - c
                un = (uu * c - a3 * vv * s + a1 * adotr * omc) * decay_half
                vn = (vv * c + (a3 * uu - a1 * w2) * s) * decay_half
                w2n = w2 * c + a1 * vv * s + a3 * adotr * omc
                u[g, i] = un
                v[g, i] = vn
                oee[g, i] = m + w2n
                ogg[g, i] = m - w2n
                pacc[k] += wgt * un
        for k in range(nb):
            i = lo + k
            pnew = pref2 * pacc[k]
            enew_med[i] = elin[i] - inv_eps_med[i] * (pnew - pol_old[i])
            pol_old[i] = pnew


@njit(cache=True, parallel=True, fastmath=True)
def relax_pass(oee, ogg, oes, ores, pump, inv_tau_cap, inv_tau_rel, inv_tau_rec, h):
    """Reservoir chain over a window ``h``: pump feed, capture, fill, drain.

    The chain's time constants sit three to five decades above the field
    step, so it is subcycled out of the hot loop.
    """
    ng, ncells = oee.shape
    nblocks = (ncells + _BLOCK - 1) // _BLOCK
    for b in prange(nblocks):
        lo = b * _BLOCK
        hi = min(ncells, lo + _BLOCK)
        for g in range(ng):
            for i in range(lo, hi):
                ee = oee[g, i]
                gg = ogg[g, i]
                es = oes[g, i]
                rs = ores[g, i]
                fill_es = rs * (1.0 - es) * inv_tau_cap
                fill_ee = es * (1.0 - ee) * inv_tau_rel
                ores[g, i] = rs + (pump * (1.0 - rs) - fill_es) * h
                oes[g, i] = es + (fill_es - fill_ee) * h
                oee[g, i] = ee + (fill_ee - ee * inv_tau_rec) * h
                ogg[g, i] = gg - gg * inv_tau_rec * h


@njit(cache=True, fastmath=False)
def check_invariants(u, v, oee, ogg, oes, ores):
    """Return the flat index of the first pair violating bounds/positivity, or -1."""
    ng, ncells = u.shape
    lo = -INVARIANT_TOL
    hi = 1.0 + INVARIANT_TOL
    for g in range(ng):
        for i in range(ncells):
            ee = oee[g, i]
            gg = ogg[g, i]
            es = oes[g, i]
            rs = ores[g, i]
            if ee < lo or ee > hi or gg < lo or gg > hi:
                return g * ncells + i
            if es < lo or es > hi or rs < lo or rs > hi:
                return g * ncells + i
            csq = u[g, i] * u[g, i] + v[g, i] * v[g, i]
            if csq > ee * gg + INVARIANT_TOL:
                return g * ncells + i
    return -1


@njit(cache=True, fastmath=False)
def _first_bad(e):
    for i in range(e.size):
        if not math.isfinite(e[i]) or abs(e[i]) > FIELD_SANITY_VPM:
            return i
    return -1


@njit(cache=True, fastmath=True)
def field_update_h(e, hfield, ch):
    """Leapfrog H update: h[i] lives at cell i + 1/2."""
    for i in range(hfield.size):
        hfield[i] -= ch * (e[i + 1] - e[i])


@njit(cache=True, fastmath=True)
def field_update_e_linear(e, hfield, ce, enew):
    """Source-free interior E update into ``enew`` (boundaries left as-is)."""
    n = e.size
    enew[0] = e[0]
    enew[n - 1] = e[n - 1]
    for i in range(1, n - 1):
        enew[i] = e[i] - ce[i] * (hfield[i] - hfield[i - 1])


@njit(cache=True, fastmath=True)
def run_core(
    e,
    hfield,
    ce,
    inv_eps,
    ch,
    kmur,
    med_lo,
    med_hi,
    src_cell,
    einc,
    hinc_scaled,
    tap_cell,
    aux_cell,
    nsteps,
    u,
    v,
    oee,
    ogg,
    oes,
    ores,
    omegas,
    weights,
    mu_over_hbar,
    dt,
    decay_half,
    pump,
    inv_tau_cap,
    inv_tau_rel,
    inv_tau_rec,
    pol_prefactor,
    relax_every,
    has_medium,
    tpa_sigma_coef,
    kerr_coef,
    tap_out,
    aux_out,
    energy_out,
    dz,
    eps_r,
    eps0,
    mu0,
    debug_checks,
    snap_every,
    snap_stride,
    snap_e,
    snap_inv,
):
    """Fused propagation loop.  Returns (status, step, cell).

    The reservoir chain relaxes every ``relax_every`` steps (its time
    constants sit far above dt); coherent rotation and T2 decay run every
    step inside :func:`bloch_fused_step`.
    """
    n = e.size
    nmed = med_hi - med_lo
    ncells_med = nmed if nmed > 0 else 1
    pol_old = np.zeros(ncells_med)
    enew = np.empty(n)
    nblocks = (ncells_med + _BLOCK - 1) // _BLOCK
    scr_pstar = np.empty((nblocks, _BLOCK))
    scr_emid = np.empty((nblocks, _BLOCK))
    scr_pacc = np.empty((nblocks, _BLOCK))
    nonlinear = (tpa_sigma_coef != 0.0) or (kerr_coef != 0.0)

    if has_medium:
        for i in range(nmed):
            pol = 0.0
            for g in range(u.shape[0]):
                pol += weights[g] * u[g, i]
            pol_old[i] = pol_prefactor * 2.0 * pol

    record_energy = energy_out.size > 0
    record_aux = aux_out.size > 0
    snap_row = 0
    relax_h = relax_every * dt
    for step in range(nsteps):
        tap_out[step] = e[tap_cell]
        if record_aux:
            aux_out[step] = e[aux_cell]
        if record_energy:
            acc = 0.0
            for i in range(n):
                acc += 0.5 * eps0 * eps_r[i] * e[i] * e[i]
            for i in range(n - 1):
                acc += 0.5 * mu0 * hfield[i] * hfield[i]
            energy_out[step] = acc * dz
        if snap_every > 0 and step % snap_every == 0 and snap_row < snap_e.shape[0]:
            k = 0
            for i in range(0, n, snap_stride):
                if k < snap_e.shape[1]:
                    snap_e[snap_row, k] = e[i]
                    k += 1
            if has_medium:
                k = 0
                for i in range(0, nmed, snap_stride):
                    if k < snap_inv.shape[1]:
                        snap_inv[snap_row, k] = oee[0, i] - ogg[0, i]
                        k += 1
            snap_row += 1

        e0_old = e[0]
        e1_old = e[1]
        em1_old = e[n - 1]
        em2_old = e[n - 2]

        # H half step with the total-field/scattered-field seam fix.
        field_update_h(e, hfield, ch)
        hfield[src_cell - 1] += ch * einc[step]

        # Linear part of the E update (shared by predictor and corrector).
        field_update_e_linear(e, hfield, ce, enew)
        enew[src_cell] += ce[src_cell] * hinc_scaled[step]

        if has_medium:
            bloch_fused_step(
                u, v, oee, ogg, oes, ores,
                e[med_lo:med_hi], enew[med_lo:med_hi], inv_eps[med_lo:med_hi],
                pol_old, enew[med_lo:med_hi],
                omegas, weights, mu_over_hbar, dt, decay_half, pol_prefactor,
                scr_pstar, scr_emid, scr_pacc,
            )
            if step % relax_every == relax_every - 1:
                relax_pass(
                    oee, ogg, oes, ores,
                    pump, inv_tau_cap, inv_tau_rel, inv_tau_rec, relax_h,
                )

        if nonlinear:
            for i in range(med_lo, med_hi):
                eo = e[i]
                if tpa_sigma_coef != 0.0:
                    enew[i] -= inv_eps[i] * dt * tpa_sigma_coef * eo * eo * eo
                if kerr_coef != 0.0:
                    # Instantaneous index shift: rescale this step's change.
                    deps = kerr_coef * eo * eo
                    enew[i] = e[i] + (enew[i] - e[i]) * eps_r[i] / (eps_r[i] + deps)

        # First-order Mur absorbing boundaries.
        enew[0] = e1_old + kmur * (enew[1] - e0_old)
        enew[n - 1] = em2_old + kmur * (enew[n - 2] - em1_old)

        for i in range(n):
            e[i] = enew[i]

        if debug_checks and has_medium:
            bad = check_invariants(u, v, oee, ogg, oes, ores)
            if bad >= 0:
                return STATUS_INVARIANT, step, med_lo + bad % u.shape[1]
        if step % 256 == 255:
            bad = _first_bad(e)
            if bad >= 0:
                return STATUS_NAN, step, bad
    bad = _first_bad(e)
    if bad >= 0:
        return STATUS_NAN, nsteps - 1, bad
    return STATUS_OK, nsteps - 1, -1
