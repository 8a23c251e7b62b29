"""Stochastic time stepping of trajectories.

One trajectory follows the Langevin equations of ramancavity.model with
additive delta-correlated Gaussian noise:

    <xi_a*(t1) xi_a(t2)>   = kappa   * coth(omega_c/2T) * delta(t1 - t2)
    <xi_b(t1)  xi_b(t2)>   = gamma/2 * coth(omega_R/2T) * delta(t1 - t2)
    <xi_s*(t1) xi_s(t2)>   = kappa_s * delta(t1 - t2)

xi_a and xi_s are complex (independent quadratures), xi_b is real and enters
only the momentum quadrature Im(b).  The factor gamma/2 (rather than gamma)
is fixed by the fluctuation-dissipation balance of the single-quadrature
damping: it is the unique strength for which the uncoupled Raman mode is
stationary at the Wigner width <Im(b)^2> = coth(omega_R/2T)/4, i.e. the
vacuum value 1/4 at T = 0.  The scattered mode's bath is always at T = 0.

The integrator is stochastic Heun (predictor-corrector, one noise sample per
step shared by both stages); for additive noise the Ito and Stratonovich
readings coincide, so the scheme is 2nd order in dt deterministically and
exact in the noise to the usual strong order 1.

Random numbers: every trajectory owns a counter-based Philox stream keyed by
(master_seed, trajectory_index), so distinct trajectories are independent by
construction, results are reproducible bit-for-bit, and work can be split
across processes in any way without changing the outcome.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (
    OVERFLOW_THRESHOLD,
    ModelParams,
    ProbeParams,
    ScheduleParams,
    SystemState,
    coth_factor,
    coupling_at,
    drift_arrays,
    probe_drive_at,
    ramp_value,
)

__all__ = [
    "DivergedTrajectory",
    "NoiseSpec",
    "RngStream",
    "ramp_value",
    "sample_noise_increments",
    "step",
    "BlockRequest",
    "BlockResult",
    "integrate_block",
]

# Per-step standard-normal draw layout (consumed in this order for every
# trajectory at every step, whether or not the component is active):
#   [Re xi_a, Im xi_a, xi_b, Re xi_s, Im xi_s]
DRAWS_PER_STEP = 5
# Wigner initialization draw layout: [Re a, Im a, Re b, Im b, Re a_s, Im a_s]
DRAWS_INIT = 6


class DivergedTrajectory(RuntimeError):
    """A state component exceeded the overflow threshold."""


@dataclass(frozen=True)
class NoiseSpec:
    """Noise strengths and thermal factors for the three baths."""

    kappa: float
    gamma: float
    kappa_s: float
    coth_c: float
    coth_R: float

    def __post_init__(self):
        if self.coth_c < 1.0 or self.coth_R < 1.0:
            raise ValueError("coth factors must be >= 1")

    @classmethod
    def from_params(cls, model: ModelParams, probe: ProbeParams | None = None) -> "NoiseSpec":
        return cls(
            kappa=model.kappa,
            gamma=model.gamma,
            kappa_s=probe.kappa_s if probe is not None else 0.0,
            coth_c=coth_factor(model.omega_c, model.temperature),
            coth_R=coth_factor(model.omega_R, model.temperature),
        )

    def sigmas(self, dt: float) -> tuple[float, float, float]:
        """Standard deviations of the per-step increments.

        Returns (sigma_a_quadrature, sigma_b, sigma_s_quadrature):
        each quadrature of dW_a has variance kappa*coth_c*dt/2, dW_b has
        variance (gamma/2)*coth_R*dt, each quadrature of dW_s has variance
        kappa_s*dt/2.
        """
        return (
            math.sqrt(0.5 * self.kappa * self.coth_c * dt),
            math.sqrt(0.5 * self.gamma * self.coth_R * dt),
            math.sqrt(0.5 * self.kappa_s * dt),
        )


@dataclass(frozen=True)
class RngStream:
    """Deterministic per-trajectory random stream (counter-based splitting)."""

    master_seed: int
    trajectory_index: int

    def generator(self) -> np.random.Generator:
        # Distinct Philox keys give statistically independent streams.
        key = np.array([self.master_seed, self.trajectory_index], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


def sample_noise_increments(dt: float, noise: NoiseSpec, rng: np.random.Generator):
    """Draw one step's noise increments (dW_a complex, dW_b real, dW_s complex).

    Always consumes DRAWS_PER_STEP standard normals so the stream layout does
    not depend on which baths are active.
    """
    if dt <= 0.0:
        raise ValueError("dt must be > 0")
    z = rng.standard_normal(DRAWS_PER_STEP)
    s_a, s_b, s_s = noise.sigmas(dt)
    dW_a = complex(s_a * z[0], s_a * z[1])
    dW_b = s_b * z[2]
    dW_s = complex(s_s * z[3], s_s * z[4])
    return dW_a, dW_b, dW_s


def _heun_update(a, b, s, t, dt, model, probe, schedule, dW_a, dW_b, dW_s):
    """One Heun step for scalar or batched amplitudes; returns new (a, b, s)."""
    g0 = coupling_at(t, model, schedule)
    e0 = probe_drive_at(t, probe, schedule)
    da0, db0, ds0 = drift_arrays(a, b, s, model, probe, g0, e0)

    ap = a + da0 * dt + dW_a
    bp = b + db0 * dt + 1j * dW_b
    sp = s + ds0 * dt + dW_s if s is not None else None

    t1 = t + dt
    g1 = coupling_at(t1, model, schedule)
    e1 = probe_drive_at(t1, probe, schedule)
    da1, db1, ds1 = drift_arrays(ap, bp, sp, model, probe, g1, e1)

    half = 0.5 * dt
    a_new = a + (da0 + da1) * half + dW_a
    b_new = b + (db0 + db1) * half + 1j * dW_b
    s_new = s + (ds0 + ds1) * half + dW_s if s is not None else None
    return a_new, b_new, s_new


def step(
    state: SystemState,
    dt: float,
    model: ModelParams,
    probe: ProbeParams | None,
    schedule: ScheduleParams,
    rng: np.random.Generator,
) -> SystemState:
    """Advance one trajectory by one stochastic Heun step.

    The noise increment is sampled once and used in both predictor and
    corrector.  Raises DivergedTrajectory if the post-step state exceeds the
    overflow threshold.
    """
    noise = NoiseSpec.from_params(model, probe)
    dW_a, dW_b, dW_s = sample_noise_increments(dt, noise, rng)
    # Run through 1-element arrays so the arithmetic is bit-identical to the
    # vectorized block path.
    a0 = np.array([state.a], dtype=complex)
    b0 = np.array([state.b], dtype=complex)
    s0 = np.array([state.a_s], dtype=complex) if probe is not None else None
    a, b, s = _heun_update(
        a0, b0, s0, state.t, dt, model, probe, schedule,
        np.array([dW_a]), np.array([dW_b]),
        np.array([dW_s]) if probe is not None else 0.0,
    )
    new = SystemState(
        a=complex(a[0]), b=complex(b[0]),
        a_s=complex(s[0]) if s is not None else state.a_s,
        t=state.t + dt,
    )
    if new.diverged():
        raise DivergedTrajectory(f"state overflow at t={new.t}")
    return new


# ---------------------------------------------------------------------------
# Vectorized block integration.  A block is a contiguous range of trajectory
# indices stepped together; all math is elementwise across the batch, so the
# per-trajectory results are bit-identical no matter how trajectories are
# grouped into blocks or distributed over workers.
# ---------------------------------------------------------------------------

# Observables recorded per trajectory (window averages and snapshots).
OBSERVABLE_NAMES = (
    "re_a", "im_a", "re_b", "im_b",
    "abs_a2", "abs_b2", "br2", "xa2", "ns",
)

_NOISE_BUFFER_STEPS = 256


@dataclass(frozen=True)
class BlockRequest:
    model: ModelParams
    probe: ProbeParams | None
    schedule: ScheduleParams
    master_seed: int
    stream_lo: int            # first trajectory/stream index (inclusive)
    stream_hi: int            # last trajectory/stream index (exclusive)
    t_end: float
    window: tuple[float, float] | None = None
    record_times: tuple[float, ...] = ()
    # Optional coarse equilibration segment: integrate [0, warmup_t] at
    # warmup_dt before switching to schedule.dt.  Only valid while the probe
    # drive is still negligible (the scattered mode's stationary state is
    # rotation invariant, so its coarse-step phase error carries no
    # statistical weight).  Windows and record times must lie beyond it.
    warmup_t: float = 0.0
    warmup_dt: float | None = None


@dataclass
class BlockResult:
    stream_lo: int
    stream_hi: int
    diverged: np.ndarray                      # bool, per trajectory
    window_means: dict | None                 # name -> per-trajectory mean
    snapshots: list                           # [(t, {name: per-traj values})]


def _wigner_init(model: ModelParams, gens: list) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sample initial amplitudes from the Wigner distribution of each mode.

    Every quadrature is a zero-mean Gaussian of standard deviation 1/2 at
    T = 0; the a and b quadratures widen to sqrt(coth(omega/2T))/2 at finite
    temperature while the scattered mode starts in vacuum.
    """
    n = len(gens)
    z = np.empty((n, DRAWS_INIT))
    for j, gen in enumerate(gens):
        z[j] = gen.standard_normal(DRAWS_INIT)
    w_a = 0.5 * math.sqrt(coth_factor(model.omega_c, model.temperature))
    w_b = 0.5 * math.sqrt(coth_factor(model.omega_R, model.temperature))
    a = w_a * z[:, 0] + 1j * (w_a * z[:, 1])
    b = w_b * z[:, 2] + 1j * (w_b * z[:, 3])
    s = 0.5 * z[:, 4] + 1j * (0.5 * z[:, 5])
    return a, b, s


def _observe(a, b, s, out: dict, weight: float = 1.0, accumulate: bool = False):
    ar, ai = a.real, a.imag
    br, bi = b.real, b.imag
    vals = {
        "re_a": ar, "im_a": ai, "re_b": br, "im_b": bi,
        "abs_a2": ar * ar + ai * ai,
        "abs_b2": br * br + bi * bi,
        "br2": br * br,
        "xa2": 4.0 * ar * ar,  # (a + a*)^2 = 4 Re(a)^2
        "ns": (s.real ** 2 + s.imag ** 2) if s is not None else np.zeros_like(ar),
    }
    for name in OBSERVABLE_NAMES:
        if accumulate:
            out[name] += weight * vals[name]
        else:
            out[name] = weight * vals[name]
    return out


class _BlockState:
    """Mutable integration state shared between segments of one block."""

    def __init__(self, req: BlockRequest):
        self.req = req
        self.n = req.stream_hi - req.stream_lo
        if self.n <= 0:
            raise ValueError("empty block")
        self.gens = [
            RngStream(req.master_seed, j).generator()
            for j in range(req.stream_lo, req.stream_hi)
        ]
        self.a, self.b, s_full = _wigner_init(req.model, self.gens)
        self.s = s_full if req.probe is not None else None
        self.noise = NoiseSpec.from_params(req.model, req.probe)
        self.diverged = np.zeros(self.n, dtype=bool)
        self.buf = np.empty((self.n, _NOISE_BUFFER_STEPS, DRAWS_PER_STEP))

    def run_segment(self, t_start, n_steps, dt, on_step=None):
        """Advance n_steps of size dt from t_start; on_step(k) is called after
        step k (1-based within the segment) with the state updated."""
        model, probe, schedule = self.req.model, self.req.probe, self.req.schedule
        s_a, s_b, s_s = self.noise.sigmas(dt)
        thr = OVERFLOW_THRESHOLD
        a, b, s = self.a, self.b, self.s
        buf = self.buf
        with np.errstate(over="ignore", invalid="ignore"):
            for k0 in range(0, n_steps, _NOISE_BUFFER_STEPS):
                kn = min(_NOISE_BUFFER_STEPS, n_steps - k0)
                for j, gen in enumerate(self.gens):
                    buf[j, :kn] = gen.standard_normal((kn, DRAWS_PER_STEP))
                for kk in range(kn):
                    k = k0 + kk
                    t = t_start + k * dt
                    dW_a = s_a * buf[:, kk, 0] + 1j * (s_a * buf[:, kk, 1])
                    dW_b = s_b * buf[:, kk, 2]
                    dW_s = (s_s * buf[:, kk, 3] + 1j * (s_s * buf[:, kk, 4])
                            if s is not None else 0.0)
                    a, b, s = _heun_update(
                        a, b, s, t, dt, model, probe, schedule, dW_a, dW_b, dW_s
                    )

                    # Overflow check; NaN fails <= and is caught too.
                    ok = (np.abs(a.real) <= thr) & (np.abs(a.imag) <= thr)
                    ok &= (np.abs(b.real) <= thr) & (np.abs(b.imag) <= thr)
                    if s is not None:
                        ok &= (np.abs(s.real) <= thr) & (np.abs(s.imag) <= thr)
                    newly = ~ok & ~self.diverged
                    if newly.any():
                        self.diverged |= newly
                        a[newly] = 0.0
                        b[newly] = 0.0
                        if s is not None:
                            s[newly] = 0.0

                    if on_step is not None:
                        self.a, self.b, self.s = a, b, s
                        on_step(k + 1)
        self.a, self.b, self.s = a, b, s


def integrate_block(req: BlockRequest) -> BlockResult:
    """Integrate a contiguous block of trajectories to t_end.

    Returns per-trajectory window-averaged observables (if a window was
    requested), per-trajectory snapshots at the recorded times, and the
    divergence flags.  Diverged trajectories are frozen at zero once flagged
    and excluded later at the ensemble level.
    """
    schedule = req.schedule
    dt = schedule.dt
    state = _BlockState(req)

    # Optional coarse warmup segment.
    t_offset = 0.0
    if req.warmup_t > 0.0:
        wdt = req.warmup_dt if req.warmup_dt is not None else dt
        n_a = int(round(req.warmup_t / wdt))
        t_offset = n_a * wdt
        bounds = list(req.record_times)
        if req.window is not None:
            bounds.append(req.window[0])
        earliest = min(bounds) if bounds else req.t_end
        if t_offset > earliest:
            raise ValueError("warmup segment overlaps windows/record times")
        state.run_segment(0.0, n_a, wdt)

    n_steps = int(round((req.t_end - t_offset) / dt))

    if req.window is not None:
        w_lo, w_hi = req.window
        k_lo = max(0, int(math.ceil((w_lo - t_offset) / dt)))
        k_hi = min(n_steps, int(math.floor((w_hi - t_offset) / dt)))
        if k_hi < k_lo:
            raise ValueError("window contains no steps")
        w_count = k_hi - k_lo + 1
        w_sums = {name: np.zeros(state.n) for name in OBSERVABLE_NAMES}
    else:
        k_lo = k_hi = -1
        w_count = 0
        w_sums = None

    record_steps = {}
    for t_rec in req.record_times:
        k = int(round((t_rec - t_offset) / dt))
        if not (0 <= k <= n_steps):
            raise ValueError(f"record time {t_rec} outside the fine segment")
        record_steps.setdefault(k, t_rec)
    snapshots = []

    def on_step(k):
        if w_sums is not None and k_lo <= k <= k_hi:
            _observe(state.a, state.b, state.s, w_sums, accumulate=True)
        if k in record_steps:
            snapshots.append(
                (record_steps[k], _observe(state.a, state.b, state.s, {})))

    on_step(0)
    state.run_segment(t_offset, n_steps, dt, on_step=on_step)

    window_means = None
    if w_sums is not None:
        window_means = {name: w_sums[name] / w_count for name in OBSERVABLE_NAMES}
    return BlockResult(
        stream_lo=req.stream_lo,
        stream_hi=req.stream_hi,
        diverged=state.diverged,
        window_means=window_means,
        snapshots=snapshots,
    )
