import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fringesim.constants import C_LIGHT, EPS0, FWHM_TO_SIGMA
from fringesim.errors import OverlapError, ValidationError, WindowError
from fringesim.pulses import (
    PulseSpec,
    ScanPlan,
    apply_phase_mask,
    chirped_fwhm,
    compose_pair,
    envelope_overlap_fraction,
    peak_field_amplitude,
    plan_scan,
    synthesize,
    waveform_energy,
)

T0 = 1.55e-6 / C_LIGHT  # carrier period, ~5.1702 fs
MODE_AREA = 0.5e-12


def time_grid(duration, dt=1e-16):
    return np.arange(0.0, duration, dt)


class TestSynthesize:
    def test_carrier_period(self):
        spec = PulseSpec(fwhm_s=150e-15, energy_J=1e-12)
        assert 2 * np.pi / spec.omega0 == pytest.approx(5.171e-15, rel=2e-4)

    def test_peak_power_35pJ_150fs(self):
        # oracle: numerical integration of the Gaussian envelope energy
        spec = PulseSpec(fwhm_s=150e-15, energy_J=35e-12)
        t = time_grid(2e-12, dt=2e-17)
        e = synthesize(spec, MODE_AREA, t, t_peak_s=1e-12)
        env_sq = np.max(e) ** 2  # peak of cos^2 ~ envelope^2 at the crest
        peak_power = 0.5 * EPS0 * C_LIGHT * MODE_AREA * env_sq
        # independent numerical check of the energy/peak relation
        sigma = 150e-15 * FWHM_TO_SIGMA
        tt = np.linspace(-1e-12, 1e-12, 200001)
        envelope = np.exp(-0.5 * (tt / sigma) ** 2)
        integral = np.trapezoid(envelope**2, tt)
        expected_peak = 35e-12 / integral  # P(t) = P0 exp(-t^2/sigma^2)
        assert peak_power == pytest.approx(expected_peak, rel=5e-3)
        assert peak_power == pytest.approx(219.0, rel=5e-3)

    def test_energy_matches_spec_within_0p1_percent(self):
        for fwhm in (50e-15, 150e-15, 500e-15):
            spec = PulseSpec(fwhm_s=fwhm, energy_J=7e-12)
            t = time_grid(20 * fwhm, dt=2e-17)
            e = synthesize(spec, MODE_AREA, t, t_peak_s=10 * fwhm)
            assert waveform_energy(t, e, MODE_AREA) == pytest.approx(7e-12, rel=1e-3)

    def test_zero_coeffs_identical_to_direct_synthesis(self):
        base = PulseSpec(fwhm_s=100e-15, energy_J=1e-12)
        masked = PulseSpec(
            fwhm_s=100e-15, energy_J=1e-12, spectral_phase_coeffs=(0.0, 0.0, 0.0)
        )
        t = time_grid(2e-12)
        a = synthesize(base, MODE_AREA, t, 1e-12)
        b = synthesize(masked, MODE_AREA, t, 1e-12)
        assert np.max(np.abs(a - b)) <= 1e-10 * np.max(np.abs(a))

    def test_truncation_rejected(self):
        spec = PulseSpec(fwhm_s=150e-15, energy_J=1e-12)
        t = time_grid(400e-15)
        with pytest.raises(WindowError):
            synthesize(spec, MODE_AREA, t, t_peak_s=350e-15)

    def test_validation(self):
        with pytest.raises(ValidationError):
            PulseSpec(fwhm_s=0.0)
        with pytest.raises(ValidationError):
            PulseSpec(energy_J=-1e-12)


class TestPhaseMask:
    def test_zero_coeffs_identity(self):
        t = time_grid(2e-12)
        spec = PulseSpec(fwhm_s=100e-15, energy_J=1e-12)
        e = synthesize(spec, MODE_AREA, t, 1e-12)
        out = apply_phase_mask(t, e, (0.0,), spec.omega0)
        assert np.array_equal(out, e)

    def test_linear_phase_shifts_envelope_by_c1(self):
        t = time_grid(3e-12)
        spec = PulseSpec(fwhm_s=100e-15, energy_J=1e-12)
        e = synthesize(spec, MODE_AREA, t, 1.5e-12)
        c1 = 120e-15
        out = apply_phase_mask(t, e, (0.0, c1), spec.omega0)
        def centroid(x):
            w = x * x
            return float((t * w).sum() / w.sum())
        shift = centroid(out) - centroid(e)
        assert abs(shift) == pytest.approx(c1, rel=1e-3)

    def test_quadratic_phase_broadens_per_closed_form(self):
        # oracle: chirped-Gaussian width formula
        # FWHM' = FWHM * sqrt(1 + (2 c2 / sigma_t^2)^2)
        t = time_grid(6e-12, dt=2e-17)
        fwhm = 100e-15
        sigma = fwhm * FWHM_TO_SIGMA
        spec = PulseSpec(fwhm_s=fwhm, energy_J=1e-12)
        e = synthesize(spec, MODE_AREA, t, 3e-12)
        c2 = 0.8 * sigma**2  # stretch factor sqrt(1+1.6^2)
        out = apply_phase_mask(t, e, (0.0, 0.0, c2), spec.omega0)

        def measured_fwhm(x):
            analytic = np.abs(
                np.fft.ifft(np.fft.fft(x) * (np.abs(np.fft.fftfreq(x.size)) < 0.25))
            )
            inten = analytic**2
            half = inten > inten.max() / 2
            idx = np.where(half)[0]
            return (idx[-1] - idx[0]) * (t[1] - t[0])

        expected = fwhm * np.sqrt(1.0 + (2 * c2 / sigma**2) ** 2)
        assert measured_fwhm(out) == pytest.approx(expected, rel=0.02)
        assert chirped_fwhm(
            PulseSpec(fwhm_s=fwhm, energy_J=1e-12, spectral_phase_coeffs=(0, 0, c2))
        ) == pytest.approx(expected, rel=1e-12)
        # peak drops, energy conserved
        assert out.max() < e.max()

    @given(
        c1=st.floats(-200e-15, 200e-15),
        c2=st.floats(-5e-27, 5e-27),
        c3=st.floats(-1e-41, 1e-41),
    )
    @settings(max_examples=25, deadline=None)
    def test_energy_unitary(self, c1, c2, c3):
        t = np.arange(0.0, 4e-12, 2e-16)
        spec = PulseSpec(fwhm_s=120e-15, energy_J=2e-12)
        e = synthesize(spec, MODE_AREA, t, 2e-12)
        out = apply_phase_mask(t, e, (0.3, c1, c2, c3), spec.omega0)
        u0 = waveform_energy(t, e, MODE_AREA)
        u1 = waveform_energy(t, out, MODE_AREA)
        assert abs(u1 - u0) <= 1e-9 * u0

    def test_unpadded_waveform_rejected(self):
        t = time_grid(300e-15)
        e = np.cos(1.2e15 * t)  # carrier with hard edges
        with pytest.raises(WindowError):
            apply_phase_mask(t, e, (0.0, 1e-15), 1.2e15)


class TestComposePair:
    def test_600fs_accepted_200fs_rejected(self):
        pump = PulseSpec(fwhm_s=150e-15, energy_J=1e-12)
        probe = PulseSpec(fwhm_s=150e-15, energy_J=1e-12)
        assert envelope_overlap_fraction(pump, probe, 600e-15) < 1e-4
        t = time_grid(3e-12)
        compose_pair(pump, probe, 600e-15, MODE_AREA, t, 700e-15)
        with pytest.raises(OverlapError):
            compose_pair(pump, probe, 200e-15, MODE_AREA, t, 700e-15)

    def test_delay_plus_period_preserves_relative_carrier_phase(self):
        pump = PulseSpec(fwhm_s=150e-15, energy_J=1e-12)
        probe = PulseSpec(fwhm_s=150e-15, energy_J=0.5e-12)
        t = time_grid(4e-12, dt=2e-17)
        omega0 = pump.omega0

        def probe_phase_at_peak(delay):
            e = compose_pair(pump, probe, delay, MODE_AREA, t, 700e-15)
            # quadrature phase of the probe around its peak
            sel = np.abs(t - (700e-15 + delay)) < 30e-15
            zc = e[sel] * np.exp(1j * omega0 * t[sel])
            return np.angle(zc.sum())

        base = probe_phase_at_peak(600e-15)
        for k in (1, 2, 5):
            shifted = probe_phase_at_peak(600e-15 + k * T0)
            dphi = (shifted - base + np.pi) % (2 * np.pi) - np.pi
            assert abs(dphi) < 1e-3

    def test_one_fs_delay_changes_phase_by_expected_fraction(self):
        pump = PulseSpec(fwhm_s=150e-15, energy_J=1e-12)
        probe = PulseSpec(fwhm_s=150e-15, energy_J=0.5e-12)
        t = time_grid(4e-12, dt=2e-17)
        omega0 = pump.omega0

        def phase(delay):
            e = compose_pair(pump, probe, delay, MODE_AREA, t, 700e-15)
            sel = np.abs(t - (700e-15 + delay)) < 30e-15
            return np.angle((e[sel] * np.exp(1j * omega0 * t[sel])).sum())

        dphi = (phase(601e-15) - phase(600e-15)) % (2 * np.pi)
        expected = (2 * np.pi * 1e-15 / T0) % (2 * np.pi)
        assert dphi == pytest.approx(expected, abs=0.02) or (
            2 * np.pi - dphi
        ) == pytest.approx(expected, abs=0.02)


class TestPlanScan:
    def test_default_counts(self):
        plan = ScanPlan()
        delays = plan_scan(plan)
        assert len(delays) == 4 * 13

    def test_single_nominal_span_12(self):
        plan = ScanPlan(nominal_delays_s=(600e-15,), fine_span_s=12e-15, fine_step_s=1e-15)
        delays = plan_scan(plan)
        assert len(delays) == 13
        assert delays[0] == pytest.approx(600e-15)
        assert delays[-1] == pytest.approx(612e-15)

    def test_zero_span_yields_nominals(self):
        plan = ScanPlan(nominal_delays_s=(600e-15, 900e-15), fine_span_s=0.0)
        assert plan_scan(plan) == [600e-15, 900e-15]

    def test_half_femtosecond_steps(self):
        plan = ScanPlan(nominal_delays_s=(600e-15,), fine_span_s=12e-15, fine_step_s=0.5e-15)
        assert len(plan_scan(plan)) == 25

    def test_validation(self):
        with pytest.raises(ValidationError):
            ScanPlan(fine_step_s=0.0)
        with pytest.raises(ValidationError):
            ScanPlan(nominal_delays_s=())
