"""Parameter/state types and the deterministic part of the equations of motion.

Unit conventions used throughout the package: hbar = 1 and every frequency,
coupling, decay rate and temperature is quoted in units of the Raman mode
frequency omega_R (temperature in units hbar*omega_R/k_B).  In typical use
omega_R = 1.0 and everything else is dimensionless.

The dynamical variables are the complex mode amplitudes

    a   -- cavity field
    b   -- Raman mode (Re b is position-like, Im b is momentum-like)
    a_s -- scattered (detector) photon mode used for Raman spectroscopy

and their coupled equations of motion are

    da/dt   = -(i*omega_c + kappa) a - i [2 g(t) Xa Xb + g4 Xa^3]
    db/dt   = -i*omega_R b - i g(t) Xa^2 - 2i E(t) Re(a_s) - i gamma Im(b)
    da_s/dt = -(i*omega_s + kappa_s) a_s - i E(t) Xb

with Xa = a + a*, Xb = b + b*, E(t) the probe drive (see ProbeParams) and
g(t) the tanh-ramped Raman-cavity coupling.  Raman damping acts only on the
momentum quadrature Im(b), Brownian-motion style.  Noise is handled
separately in ramancavity.dynamics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Any state component exceeding this magnitude marks the trajectory as
# divergent (used to detect the g > g_max parametric instability).
OVERFLOW_THRESHOLD = 1.0e6


def coth_factor(omega: float, temperature: float) -> float:
    """Thermal factor coth(omega / 2 T), with the exact T -> 0 limit of 1."""
    if temperature == 0.0:
        return 1.0
    if omega <= 0.0:
        raise ValueError("coth_factor requires omega > 0")
    return 1.0 / math.tanh(omega / (2.0 * temperature))


def stability_threshold(g4: float, omega_R: float) -> float:
    """Largest stable Raman-cavity coupling, sqrt(g4 * omega_R) / 2.

    The quartic cavity nonlinearity g4 bounds the parametric runaway; for
    g >= this value trajectories diverge.
    """
    if g4 < 0.0:
        raise ValueError("g4 must be >= 0")
    if omega_R <= 0.0:
        raise ValueError("omega_R must be > 0")
    return math.sqrt(g4 * omega_R) / 2.0


@dataclass(frozen=True)
class ModelParams:
    """Frequencies, couplings and decay rates of the Raman-cavity system."""

    omega_c: float
    omega_R: float = 1.0
    g: float = 0.0
    g4: float = 0.0
    kappa: float = 0.0
    gamma: float = 0.0
    temperature: float = 0.0

    def __post_init__(self):
        if self.omega_c <= 0.0:
            raise ValueError("omega_c must be > 0")
        if self.omega_R <= 0.0:
            raise ValueError("omega_R must be > 0")
        for name in ("g4", "kappa", "gamma", "temperature"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be >= 0")

    @property
    def g_max(self) -> float:
        return stability_threshold(self.g4, self.omega_R)

    @property
    def stable(self) -> bool:
        """True iff g is strictly below the parametric stability bound.

        g = 0 counts as stable regardless of g4 (no Raman-cavity coupling,
        hence no parametric channel).
        """
        return self.g == 0.0 or self.g < self.g_max

    @property
    def coth_c(self) -> float:
        return coth_factor(self.omega_c, self.temperature)

    @property
    def coth_R(self) -> float:
        return coth_factor(self.omega_R, self.temperature)


@dataclass(frozen=True)
class ProbeParams:
    """Stimulated-Raman probe: drive strength g_s*Ep0, laser frequency
    omega_p, detector mode frequency omega_s and its decay rate kappa_s."""

    gs_Ep0: float
    omega_p: float
    omega_s: float
    kappa_s: float = 0.0

    def __post_init__(self):
        if self.gs_Ep0 < 0.0:
            raise ValueError("gs_Ep0 must be >= 0")
        if self.omega_p <= 0.0:
            raise ValueError("omega_p must be > 0")
        if self.omega_s <= 0.0:
            raise ValueError("omega_s must be > 0")
        if self.kappa_s < 0.0:
            raise ValueError("kappa_s must be >= 0")

    def is_weak(self, model: ModelParams) -> bool:
        """Weak-probe validity condition gs_Ep0 <= g (non-fatal diagnostic)."""
        return self.gs_Ep0 <= model.g


@dataclass(frozen=True)
class ScheduleParams:
    """Timing of a run: coupling ramp center t0, probe turn-on tp,
    measurement time tstar, tanh ramp width tau and integrator step dt."""

    t0: float
    tp: float
    tstar: float
    tau: float
    dt: float

    def __post_init__(self):
        if not (0.0 < self.t0 < self.tp < self.tstar):
            raise ValueError("schedule must satisfy 0 < t0 < tp < tstar")
        if self.tau <= 0.0:
            raise ValueError("tau must be > 0")
        if self.dt <= 0.0:
            raise ValueError("dt must be > 0")

    @staticmethod
    def max_frequency(model: ModelParams, probe: ProbeParams | None) -> float:
        """Fastest frequency the integrator has to resolve.

        The squeezing (two-photon) oscillation of the cavity runs at
        2*omega_c, hence the factor 2.
        """
        fmax = max(model.omega_R, 2.0 * model.omega_c)
        if probe is not None:
            fmax = max(fmax, probe.omega_p, probe.omega_s)
        return fmax

    @staticmethod
    def default_dt(model: ModelParams, probe: ProbeParams | None = None) -> float:
        """Default step: 0.002 of the shortest oscillation period."""
        return 0.002 * (2.0 * math.pi / ScheduleParams.max_frequency(model, probe))

    @classmethod
    def standard(
        cls,
        model: ModelParams,
        probe: ProbeParams | None = None,
        t0: float = 10.0,
        tp: float = 100.0,
        tstar: float = 250.0,
        tau: float = 1.0,
        dt: float | None = None,
    ) -> "ScheduleParams":
        """Timing constants of the reference protocol (omega_R*t0 = 10,
        omega_R*tp = 100, omega_R*tstar = 250, tau = 1/omega_R)."""
        if dt is None:
            dt = cls.default_dt(model, probe)
        return cls(t0=t0, tp=tp, tstar=tstar, tau=tau, dt=dt)

    def validate_against(self, model: ModelParams, probe: ProbeParams | None):
        """Enforce dt * max-frequency < 0.1 (well-resolved oscillations)."""
        fmax = self.max_frequency(model, probe)
        if self.dt * fmax >= 0.1:
            raise ValueError(
                f"dt={self.dt} too coarse for max frequency {fmax} "
                "(require dt * fmax < 0.1)"
            )


def ramp_value(t, t_on, tau, final_value):
    """Tanh turn-on: final_value * (tanh((t - t_on)/tau) + 1) / 2."""
    return final_value * (np.tanh((t - t_on) / tau) + 1.0) / 2.0


@dataclass(frozen=True)
class SystemState:
    """One stochastic trajectory's instantaneous state."""

    a: complex
    b: complex
    a_s: complex
    t: float

    def max_abs_component(self) -> float:
        return max(
            abs(self.a.real), abs(self.a.imag),
            abs(self.b.real), abs(self.b.imag),
            abs(self.a_s.real), abs(self.a_s.imag),
        )

    def diverged(self, threshold: float = OVERFLOW_THRESHOLD) -> bool:
        m = self.max_abs_component()
        return not (m <= threshold)  # NaN compares False, so NaN counts as diverged


@dataclass(frozen=True)
class SystemStateDerivative:
    da: complex
    db: complex
    da_s: complex


def coupling_at(t, model: ModelParams, schedule: ScheduleParams):
    """Ramped Raman-cavity coupling g(t)."""
    return ramp_value(t, schedule.t0, schedule.tau, model.g)


def probe_drive_at(t, probe: ProbeParams | None, schedule: ScheduleParams):
    """Instantaneous probe drive g_s*Ep(t) = ramp(t) * gs_Ep0 * sin(omega_p t)."""
    if probe is None or probe.gs_Ep0 == 0.0:
        return 0.0
    return ramp_value(t, schedule.tp, schedule.tau, probe.gs_Ep0) * np.sin(probe.omega_p * t)


def drift_arrays(a, b, s, model: ModelParams, probe: ProbeParams | None, g_t, drive):
    """Deterministic right-hand side for (possibly batched) amplitudes.

    a, b, s are complex scalars or equal-shape complex arrays; s may be None
    when the scattered mode is not evolved (probe absent).  g_t and drive are
    the coupling and probe drive already evaluated at the current time.
    Returns (da, db, ds) with ds = None when s is None.
    """
    xa = 2.0 * np.real(a)
    xb = 2.0 * np.real(b)
    da = -(1j * model.omega_c + model.kappa) * a \
        - 1j * (2.0 * g_t * xa * xb + model.g4 * xa * xa * xa)
    db = -1j * model.omega_R * b - 1j * (g_t * xa * xa) \
        - 1j * (model.gamma * np.imag(b))
    if s is None:
        return da, db, None
    if drive != 0.0:
        db = db - 1j * (2.0 * drive * np.real(s))
        ds = -(1j * probe.omega_s + probe.kappa_s) * s - 1j * (drive * xb)
    else:
        ds = -(1j * probe.omega_s + probe.kappa_s) * s
    return da, db, ds


def drift(
    state: SystemState,
    model: ModelParams,
    probe: ProbeParams | None,
    schedule: ScheduleParams,
) -> SystemStateDerivative:
    """Noise-free time derivative of the state at state.t.

    The coupling and probe strength are evaluated through their tanh ramps;
    pure function of its inputs.
    """
    g_t = coupling_at(state.t, model, schedule)
    drive = probe_drive_at(state.t, probe, schedule)
    s = state.a_s if probe is not None else None
    da, db, ds = drift_arrays(state.a, state.b, s, model, probe, g_t, drive)
    return SystemStateDerivative(
        da=complex(da), db=complex(db),
        da_s=complex(ds) if ds is not None else 0j,
    )
