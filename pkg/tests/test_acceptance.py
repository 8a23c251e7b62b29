"""Acceptance criteria, one test per criterion, at the stated tolerances.

Desk-scale trajectory counts (2000-5000) with correspondingly widened Monte
Carlo tolerances, per the acceptance protocol.  Every test prints one
machine-readable line:

    [acceptance] criterion NN PASS|FAIL -- detail

Heavy runs (the avoided-crossing scan) are computed once in module fixtures
and shared between criteria.  Artifacts consumed by the plotting front end
are written to artifacts/.
"""

import json
import math
import os
import shutil
import subprocess
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
import pytest

import ramancavity as rc
from ramancavity.ensemble import (
    EnsembleConfig,
    relative_cooling,
    run_ensemble,
    steady_observables,
)
from ramancavity.gaussian import (
    linearized_modes,
    polariton_frequencies,
    rabi_splitting,
    renormalized_cavity_freq,
    resonant_omega_c,
)
from ramancavity.model import ModelParams, ProbeParams, ScheduleParams
from ramancavity.spectroscopy import (
    NoPeaksFound,
    SpectrumRequest,
    find_peaks,
    raman_spectrum,
    shift_grid_to_omega_s,
)

ARTIFACTS = Path(__file__).resolve().parent.parent / "artifacts"
ARTIFACTS.mkdir(exist_ok=True)

WORKERS = min(2, os.cpu_count() or 1)


def report(num, ok, detail):
    status = "PASS" if ok else "FAIL"
    print(f"[acceptance] criterion {num:>2} {status} -- {detail}", flush=True)
    return ok


def fig2_model(g=0.04, g4=0.01, kappa=0.01, gamma=0.01, temperature=0.0,
               on_resonance=True, omega_c=None):
    if omega_c is None:
        probe_model = ModelParams(omega_c=0.5, g=g, g4=g4)
        omega_c = resonant_omega_c(probe_model) if on_resonance else 0.5
    return ModelParams(omega_c=omega_c, g=g, g4=g4, kappa=kappa, gamma=gamma,
                       temperature=temperature)


def steady_config(model, n_traj, seed, tp=100.0):
    sched = ScheduleParams(t0=10.0, tp=tp, tstar=tp + 150.0, tau=1.0,
                           dt=ScheduleParams.default_dt(model))
    return EnsembleConfig(model=model, schedule=sched, n_traj=n_traj,
                          master_seed=seed)


def spectrum_csv(path, spec):
    with open(path, "w", newline="") as fh:
        fh.write("omega_s,raman_shift,n_s_mean,n_s_stderr\n")
        for row in spec.rows():
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


# --------------------------------------------------------------------------
# 1. Vacuum oracle
# --------------------------------------------------------------------------

def test_criterion_01_vacuum_oracle():
    m = ModelParams(omega_c=0.5, g=0.0, g4=0.0, kappa=0.01, gamma=0.01)
    cfg = steady_config(m, n_traj=5000, seed=101)
    res = run_ensemble(
        EnsembleConfig(model=m, schedule=cfg.schedule, n_traj=5000,
                       master_seed=101, window=(80.0, 100.0)))
    a2 = res.window["abs_a2"].mean
    q2 = 2.0 * res.window["br2"].mean / m.omega_R
    ok_a = abs(a2 - 0.5) < 0.02
    ok_q = abs(q2 - 0.5) < 0.04 * 0.5
    ok = report(1, ok_a and ok_q,
                f"<|a|^2> = {a2:.4f} (0.500 +- 0.02), "
                f"<Q^2> = {q2:.4f} (0.500 +- 4%), wall {res.wall_time:.1f}s")
    assert ok


# --------------------------------------------------------------------------
# 2. Thermal fluctuation-dissipation
# --------------------------------------------------------------------------

def test_criterion_02_thermal_fdt():
    m = ModelParams(omega_c=0.5, g=0.0, g4=0.0, kappa=0.01, gamma=0.01,
                    temperature=2.5)
    sched = ScheduleParams(t0=10.0, tp=100.0, tstar=250.0, tau=1.0,
                           dt=ScheduleParams.default_dt(m))
    res = run_ensemble(EnsembleConfig(model=m, schedule=sched, n_traj=5000,
                                      master_seed=102, window=(80.0, 100.0)))
    a2 = res.window["abs_a2"].mean
    target = (1.0 / math.tanh(m.omega_c / 5.0)) / 2.0
    ok = report(2, abs(a2 - target) / target < 0.04,
                f"<|a|^2> = {a2:.4f}, coth(omega_c/5)/2 = {target:.4f} (4%)")
    assert ok


# --------------------------------------------------------------------------
# 3. Resonant amplification/localization
# --------------------------------------------------------------------------

def test_criterion_03_resonant_localization():
    m = fig2_model()
    obs = steady_observables(steady_config(m, n_traj=5000, seed=103))
    ok_q = -0.5 <= obs.deltaQ2 <= -0.3
    ok_x = 0.3 <= obs.deltax2 <= 0.5
    ok_sign = obs.deltaQ2 < 0 < obs.deltax2
    ok = report(3, ok_q and ok_x and ok_sign,
                f"deltaQ2 = {obs.deltaQ2:+.4f} ({obs.deltaQ2_stderr:.4f}) "
                f"target [-0.5,-0.3]; deltax2 = {obs.deltax2:+.4f} "
                f"({obs.deltax2_stderr:.4f}) target [+0.3,+0.5]")
    assert ok, (
        "faithful dynamics gives deltaQ2 ~ -0.24 at the stated point; "
        "see decisions ledger (resonant localization magnitude)")


# --------------------------------------------------------------------------
# 4. Off-resonance null
# --------------------------------------------------------------------------

def test_criterion_04_off_resonance_null():
    m = fig2_model(omega_c=0.9)
    obs = steady_observables(steady_config(m, n_traj=5000, seed=104))
    ok = report(4, abs(obs.deltaQ2) < 0.05 and abs(obs.deltax2) < 0.05,
                f"deltaQ2 = {obs.deltaQ2:+.4f}, deltax2 = {obs.deltax2:+.4f} "
                "(both |.| < 0.05)")
    assert ok


# --------------------------------------------------------------------------
# 5 & 6. Avoided crossing and Rabi splitting (shared heavy scan)
# --------------------------------------------------------------------------

N_TRAJ_SPEC = 2000
SHIFT_GRID = np.linspace(0.85, 1.15, 40)


def _crossing_request(omega_c, seed):
    m = fig2_model(omega_c=omega_c)
    probe = ProbeParams(gs_Ep0=0.04, omega_p=5.0, omega_s=4.0, kappa_s=0.01)
    # dt = 0.005 (0.025 rad per step at omega_p) validated against the
    # default step within Monte Carlo error; coarse pre-probe equilibration
    # is exact in distribution.
    sched = ScheduleParams.standard(m, probe, dt=0.005)
    return SpectrumRequest(
        model=m, probe=probe, schedule=sched,
        omega_s_grid=shift_grid_to_omega_s(SHIFT_GRID, probe.omega_p),
        n_traj=N_TRAJ_SPEC, master_seed=seed)


@pytest.fixture(scope="module")
def avoided_crossing_scan():
    m_res = fig2_model()
    omega_cs = [0.40, 0.445, m_res.omega_c, 0.535, 0.58]
    spectra = {}
    with ProcessPoolExecutor(max_workers=WORKERS) as pool:
        for i, wc in enumerate(omega_cs):
            req = _crossing_request(wc, seed=105 + i)
            spectra[wc] = raman_spectrum(req, pool_map=pool.map)
    for i, wc in enumerate(omega_cs):
        spectrum_csv(ARTIFACTS / f"spectrum_wc{i}.csv", spectra[wc])
    return omega_cs, spectra


def test_criterion_05_avoided_crossing(avoided_crossing_scan):
    omega_cs, spectra = avoided_crossing_scan
    m_res = fig2_model()
    pb = polariton_frequencies(m_res)
    tol = m_res.kappa + m_res.gamma

    spec_res = spectra[m_res.omega_c]
    # low threshold so the weak pair-like upper branch is still located and
    # the criterion evaluates peak positions
    prom = 0.04 * float(np.max(spec_res.ns_mean) - np.min(spec_res.ns_mean))
    peaks = find_peaks(spec_res, min_prominence=prom)
    msgs = []
    ok = True
    if len(peaks.peaks) < 2:
        ok = False
        msgs.append(f"only {len(peaks.peaks)} peak(s) at resonance")
        lrp = urp = None
    else:
        lrp, urp = peaks.dominant_pair()
        ok &= abs(lrp.center - pb.omega_minus) < tol
        ok &= abs(urp.center - pb.omega_plus) < tol
        msgs.append(f"LRP {lrp.center:.4f} vs {pb.omega_minus:.4f}, "
                    f"URP {urp.center:.4f} vs {pb.omega_plus:.4f} (tol {tol})")

    for wc in (omega_cs[0], omega_cs[-1]):
        spec = spectra[wc]
        prom_off = 0.25 * float(np.max(spec.ns_mean) - np.min(spec.ns_mean))
        try:
            pk = find_peaks(spec, min_prominence=prom_off)
            n_dominant = len(pk.peaks)
        except NoPeaksFound:
            n_dominant = 0
        ok &= n_dominant == 1
        msgs.append(f"omega_c={wc}: {n_dominant} dominant peak(s)")

    ok = report(5, ok, "; ".join(msgs))
    assert ok, (
        "probe back-action at gs_Ep0 = g displaces the lower branch by about "
        "-0.04; see decisions ledger (criterion 5/6)")


def test_criterion_06_rabi_linearity(avoided_crossing_scan):
    omega_cs, spectra = avoided_crossing_scan
    # analytic delta(g) linear within the O(g^3) correction
    gs = [0.01, 0.02, 0.03, 0.04]
    deltas = []
    for g in gs:
        m = fig2_model(g=g)
        deltas.append(rabi_splitting(m, x2=1.0 / (2.0 * m.omega_c)))
    slope = deltas[0] / gs[0]
    lin_ok = all(abs(d - slope * g) <= max(5.0 * g**3, 1e-12)
                 for g, d in zip(gs, deltas))

    m_res = fig2_model()
    spec_res = spectra[m_res.omega_c]
    prom = 0.04 * float(np.max(spec_res.ns_mean) - np.min(spec_res.ns_mean))
    lrp, urp = find_peaks(spec_res, min_prominence=prom).dominant_pair()
    measured = urp.center - lrp.center
    two_delta = 2.0 * rabi_splitting(m_res)
    tol = m_res.kappa + m_res.gamma
    agree_ok = abs(measured - two_delta) < tol
    ok = report(6, lin_ok and agree_ok,
                f"delta(g) linear: {lin_ok}; numerical splitting "
                f"{measured:.4f} vs 2*delta {two_delta:.4f} (tol {tol})")
    assert ok, (
        "probe back-action inflates the measured splitting at gs_Ep0 = g; "
        "see decisions ledger (criterion 5/6)")


# --------------------------------------------------------------------------
# 7. Closed form vs eigen-oracle
# --------------------------------------------------------------------------

def test_criterion_07_eigen_oracle():
    rng = np.random.default_rng(7)
    worst = 0.0
    checked = 0
    while checked < 100:
        g4 = rng.uniform(0.002, 0.08)
        g = rng.uniform(0.0, 0.95) * math.sqrt(g4) / 2.0
        m = ModelParams(omega_c=rng.uniform(0.2, 0.9), g=g, g4=g4,
                        kappa=0.01, gamma=0.01)
        x0sq = rng.uniform(0.3, 2.0)
        pb = polariton_frequencies(m, x0sq)
        if not pb.stable:
            continue
        ev = linearized_modes(m, x0sq)
        osc = np.sort(np.abs(ev.imag[np.abs(ev.imag) > 1e-10]))
        worst = max(worst,
                    abs(osc[0] - pb.omega_minus) / pb.omega_minus,
                    abs(osc[3] - pb.omega_plus) / pb.omega_plus)
        checked += 1
    m0 = ModelParams(omega_c=0.4, g=0.0, g4=0.0, kappa=0.01)
    pb0 = polariton_frequencies(m0, x0sq=1.25)
    exact = (pb0.omega_minus == pytest.approx(0.8, abs=1e-14)
             and pb0.omega_plus == pytest.approx(1.0, abs=1e-14))
    ok = report(7, worst < 1e-8 and exact,
                f"100 stable sets, worst relative error {worst:.2e}; "
                f"decoupled limit exact: {exact}")
    assert ok


# --------------------------------------------------------------------------
# 8. Resonance-shift formula
# --------------------------------------------------------------------------

def _crit8_point(wc):
    m = ModelParams(omega_c=wc, g=0.04, g4=0.04, kappa=0.01, gamma=0.01)
    return steady_observables(steady_config(m, n_traj=2000, seed=108)).deltaQ2


def test_criterion_08_resonance_shift():
    predicted = 0.5 + 12 * 0.04**2 - 3 * 0.04
    omega_cs = np.arange(0.35, 0.4601, 0.01)
    with ProcessPoolExecutor(max_workers=WORKERS) as pool:
        d = list(pool.map(_crit8_point, [float(wc) for wc in omega_cs]))
    best = float(omega_cs[int(np.argmin(d))])
    ok = report(8, abs(best - predicted) <= 0.0101,
                f"deltaQ2 minimum at omega_c = {best:.2f}, "
                f"predicted 0.5 + 12g^2 - 3g4 = {predicted:.4f} (+- 0.01)")
    assert ok


# --------------------------------------------------------------------------
# 9. Instability detection
# --------------------------------------------------------------------------

def test_criterion_09_instability_detection():
    m = fig2_model(g=0.06, g4=0.01)
    assert not m.stable and m.g_max == pytest.approx(0.05)
    obs = steady_observables(steady_config(m, n_traj=1000, seed=109))
    frac = obs.n_diverged / 1000.0
    reported = obs.near_instability
    ok = report(9, frac > 0.5 and reported,
                f"divergent fraction {frac:.2f} at g = 0.06 (target > 0.5); "
                f"instability flagged: {reported}")
    assert ok, (
        "above-threshold instability is an activated barrier escape at these "
        "parameters, not a prompt runaway; see decisions ledger")


# --------------------------------------------------------------------------
# 10. Thermal anti-Stokes
# --------------------------------------------------------------------------

def _antistokes_spectrum(temperature, seed):
    m = fig2_model(temperature=temperature)
    probe = ProbeParams(gs_Ep0=0.04, omega_p=5.0, omega_s=6.0, kappa_s=0.01)
    sched = ScheduleParams.standard(m, probe, dt=0.005)
    grid = tuple(float(w) for w in np.linspace(5.7, 6.3, 21))
    req = SpectrumRequest(model=m, probe=probe, schedule=sched,
                          omega_s_grid=grid, n_traj=2000, master_seed=seed)
    with ProcessPoolExecutor(max_workers=WORKERS) as pool:
        return raman_spectrum(req, pool_map=pool.map)


def test_criterion_10_thermal_anti_stokes():
    hot = _antistokes_spectrum(2.5, seed=110)
    cold = _antistokes_spectrum(0.0, seed=111)
    spectrum_csv(ARTIFACTS / "antistokes_hot.csv", hot)
    spectrum_csv(ARTIFACTS / "antistokes_cold.csv", cold)

    # The recorded |a_s|^2 is the symmetric (Wigner) moment; the photon
    # *number* is normal ordered, i.e. the moment minus the vacuum half.
    def peak_and_baseline(spec):
        near = np.abs(spec.omega_s - 6.0) < 0.15
        far = np.abs(spec.omega_s - 6.0) > 0.25
        peak = float(np.max(spec.ns_mean[near])) - 0.5
        base = float(np.median(spec.ns_mean[far])) - 0.5
        return peak, base

    hot_peak, hot_base = peak_and_baseline(hot)
    cold_peak, cold_base = peak_and_baseline(cold)
    cold_spread = float(np.max(cold.ns_stderr))
    hot_ok = hot_peak > 5.0 * hot_base
    cold_ok = cold_peak < 5.0 * cold_spread + 0.1 * abs(hot_peak)
    ok = report(10, hot_ok and cold_ok,
                f"T=2.5: anti-Stokes photon number {hot_peak:.3f} vs baseline "
                f"{hot_base:.3f} (>5x: {hot_ok}); T=0: {cold_peak:.3f} "
                f"(absent: {cold_ok})")
    assert ok


# --------------------------------------------------------------------------
# 11. Thermal localization
# --------------------------------------------------------------------------

def test_criterion_11_thermal_localization():
    # thermally renormalized resonance: omega_c + coth(omega_c/2T)(3g4-12g^2)
    # = omega_R/2, solved by iteration
    g, g4, temp = 0.01, 0.01, 0.5
    wc = 0.47
    for _ in range(50):
        wc = 0.5 - (3 * g4 - 12 * g**2) / math.tanh(wc / (2 * temp))
    m = ModelParams(omega_c=wc, g=g, g4=g4, kappa=0.01, gamma=0.01,
                    temperature=temp)
    obs = steady_observables(steady_config(m, n_traj=5000, seed=112))
    dq_ok = abs(obs.deltaQ2 - (-0.05)) <= 0.03
    cooling = relative_cooling(obs.Q2, m)
    cool_ok = abs(cooling - (-0.09)) <= 0.05
    ok = report(11, dq_ok and cool_ok,
                f"omega_c = {wc:.4f}, deltaQ2 = {obs.deltaQ2:+.4f} "
                f"(target -0.05 +- 0.03), dT/T = {cooling:+.4f} "
                f"(target -0.09 +- 0.05)")
    assert ok, (
        "equilibrated thermal steady state shows no net cooling dip at "
        "T = 0.5, g = 0.01; see decisions ledger (thermal localization)")


# --------------------------------------------------------------------------
# 12. Material estimate round trip
# --------------------------------------------------------------------------

def test_criterion_12_material_round_trip():
    from ramancavity.material import MaterialParams, coupling_from_material

    mat = MaterialParams.from_areas(R_tilde=1.0, A_cell=1e-16,
                                    A_samp=1.6e-11, A_eff=1e-12)
    g_est = coupling_from_material(mat)
    est_ok = 0.005 <= g_est <= 0.02

    m = fig2_model(g=g_est)
    obs = steady_observables(steady_config(m, n_traj=5000, seed=113))
    sim_ok = (abs(obs.deltaQ2 - (-0.2)) <= 0.1) and (abs(obs.deltax2 - 0.2) <= 0.1)
    ok = report(12, est_ok and sim_ok,
                f"g/omega_R = {g_est:.4f} (0.01 within 2x: {est_ok}); "
                f"deltaQ2 = {obs.deltaQ2:+.4f}, deltax2 = {obs.deltax2:+.4f} "
                f"(-+0.2 within 0.1: {sim_ok})")
    assert ok


# --------------------------------------------------------------------------
# 13. Determinism and parallel safety
# --------------------------------------------------------------------------

def test_criterion_13_determinism(tmp_path):
    from ramancavity.cli import main as cli_main

    common = ["--seed", "114",
              "--set", "ensemble.n_traj=500",
              "--set", "model.g=0.04", "--set", "model.omega_c=0.4892",
              "--set", "sweep.omega_c_min=0.45", "--set", "sweep.omega_c_max=0.53",
              "--set", "sweep.omega_c_count=3",
              "--set", "sweep.g_min=0.0", "--set", "sweep.g_max=0.04",
              "--set", "sweep.g_count=2"]
    out1, out2 = tmp_path / "w1.csv", tmp_path / "w2.csv"
    assert cli_main(["sweep2d", "--out", str(out1), "--workers", "1"] + common) == 0
    assert cli_main(["sweep2d", "--out", str(out2), "--workers", "2"] + common) == 0
    identical = out1.read_bytes() == out2.read_bytes()
    shutil.copy(out1, ARTIFACTS / "sweep2d_small.csv")
    ok = report(13, identical,
                f"sweep2d with 1 vs 2 workers byte-identical: {identical}")
    assert ok


# --------------------------------------------------------------------------
# Artifact for the figure front end: analytic polariton overlay
# --------------------------------------------------------------------------

def test_write_polariton_artifact():
    from ramancavity.cli import main as cli_main

    out = ARTIFACTS / "polariton.csv"
    code = cli_main(["polariton", "--out", str(out),
                     "--set", "sweep.omega_c_min=0.40",
                     "--set", "sweep.omega_c_max=0.58",
                     "--set", "sweep.omega_c_count=10"])
    assert code == 0
    assert out.exists()
