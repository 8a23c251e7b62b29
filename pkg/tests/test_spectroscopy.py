"""Peak extraction on synthetic data and the spectrum-scan plumbing."""

import numpy as np
import pytest

from ramancavity.model import ModelParams, ProbeParams, ScheduleParams
from ramancavity.spectroscopy import (
    NoPeaksFound,
    PeakUnresolved,
    Spectrum,
    SpectrumRequest,
    default_shift_grid,
    find_peaks,
    raman_spectrum,
    shift_grid_to_omega_s,
)


def lorentzian(x, center, hwhm, height):
    return height * hwhm**2 / (hwhm**2 + (x - center) ** 2)


def test_single_lorentzian_recovery():
    x = np.linspace(0.7, 1.3, 80)
    dx = x[1] - x[0]
    y = lorentzian(x, 0.983, 0.02, 5.0)
    peaks = find_peaks((x, y), min_prominence=1.0)
    assert len(peaks.peaks) == 1
    p = peaks.peaks[0]
    assert abs(p.center - 0.983) < dx / 4
    assert p.fwhm == pytest.approx(0.04, rel=0.10)
    assert p.height == pytest.approx(5.0, rel=0.02)


def test_two_lorentzians_in_order():
    x = np.linspace(0.7, 1.3, 120)
    y = lorentzian(x, 0.9, 0.015, 4.0) + lorentzian(x, 1.1, 0.02, 2.5)
    peaks = find_peaks((x, y), min_prominence=0.5)
    assert len(peaks.peaks) == 2
    assert peaks.peaks[0].center == pytest.approx(0.9, abs=0.01)
    assert peaks.peaks[1].center == pytest.approx(1.1, abs=0.01)
    lo, hi = peaks.dominant_pair()
    assert lo.center < hi.center


def test_monotone_spectrum_no_peaks():
    x = np.linspace(0.0, 1.0, 50)
    y = 2.0 + 3.0 * x
    with pytest.raises(NoPeaksFound):
        find_peaks((x, y), min_prominence=0.1)


def test_too_few_points_rejected():
    with pytest.raises(ValueError):
        find_peaks((np.array([0, 1, 2]), np.array([0, 1, 0])), 0.1)


def test_unresolved_pair():
    x = np.linspace(0.7, 1.3, 120)
    y = lorentzian(x, 0.99, 0.05, 4.0) + lorentzian(x, 1.01, 0.05, 4.0)
    peaks = find_peaks((x, y), min_prominence=0.05)
    if len(peaks.peaks) >= 2:
        lo, hi = peaks.dominant_pair()
        assert (hi.center - lo.center) < max(lo.fwhm, hi.fwhm)


def test_grid_helpers():
    m = ModelParams(omega_c=0.5)
    shifts = default_shift_grid(m)
    assert shifts.size == 80
    assert shifts[0] == pytest.approx(0.7) and shifts[-1] == pytest.approx(1.3)
    ws = shift_grid_to_omega_s(shifts, 5.0)
    assert all(b > a for a, b in zip(ws, ws[1:]))
    assert ws[0] == pytest.approx(3.7) and ws[-1] == pytest.approx(4.3)


def test_request_validation():
    m = ModelParams(omega_c=0.5, g=0.04, g4=0.01, kappa=0.01, gamma=0.01)
    probe = ProbeParams(gs_Ep0=0.04, omega_p=5.0, omega_s=4.0, kappa_s=0.01)
    sched = ScheduleParams.standard(m, probe)
    with pytest.raises(ValueError):
        SpectrumRequest(model=m, probe=probe, schedule=sched,
                        omega_s_grid=(4.0, 4.0), n_traj=10)


def test_spectrum_scan_smoke():
    """Tiny end-to-end scan: scattered occupation finite, near vacuum off
    resonance, and bit-reproducible."""
    m = ModelParams(omega_c=0.5, g=0.0, g4=0.0, kappa=0.01, gamma=0.01)
    probe = ProbeParams(gs_Ep0=0.0, omega_p=5.0, omega_s=4.0, kappa_s=0.01)
    sched = ScheduleParams(t0=10.0, tp=30.0, tstar=50.0, tau=1.0,
                           dt=ScheduleParams.default_dt(m, probe))
    req = SpectrumRequest(model=m, probe=probe, schedule=sched,
                          omega_s_grid=(3.9, 4.0, 4.1), n_traj=60,
                          master_seed=5)
    spec = raman_spectrum(req)
    assert spec.omega_s.size == 3
    assert np.all(spec.ns_mean >= 0)
    # probe off: detector mode stays at vacuum
    assert np.all(np.abs(spec.ns_mean - 0.5) < 5 * spec.ns_stderr)
    assert np.allclose(spec.raman_shift, 5.0 - spec.omega_s)

    spec2 = raman_spectrum(req)
    assert np.array_equal(spec.ns_mean, spec2.ns_mean)


def test_spectrum_rows():
    spec = Spectrum(
        omega_s=np.array([3.9, 4.0]),
        raman_shift=np.array([1.1, 1.0]),
        ns_mean=np.array([0.5, 0.7]),
        ns_stderr=np.array([0.01, 0.01]),
        n_diverged=np.array([0, 0]),
        omega_p=5.0,
    )
    rows = list(spec.rows())
    assert rows[0] == (3.9, 1.1, 0.5, 0.01)
