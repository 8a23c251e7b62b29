"""Trajectory ensembles: Wigner sampling, parallel execution, steady-state
observables.

An ensemble is n_traj independent trajectories, each seeded from
(master_seed, stream_base + trajectory_index).  Trajectories are grouped in
fixed-size blocks purely for vectorization; since all per-trajectory math is
elementwise and each trajectory owns its noise stream, the result is
bit-identical for any worker count or block assignment.  Reductions over the
ensemble are numpy pairwise sums over trajectory-index-ordered arrays, which
fixes the summation order once and for all.

Steady-state estimators (relative fluctuation changes of the Raman and
cavity modes, and the static Raman shift):

    <Q^2>  = (2/omega_R) <Re(b)^2>        reference coth(omega_R/2T)/(2 omega_R)
    <x^2>  = <(2 Re a)^2> / (2 omega_c)   reference coth(omega_c/2T)/(2 omega_c)
    <Q>    = sqrt(2/omega_R) <Re(b)>      quoted in units Q0 = 1/sqrt(omega_R)

deltaQ2 and deltax2 are the relative deviations of <Q^2>, <x^2> from the
uncoupled references.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .dynamics import (
    DRAWS_INIT,
    BlockRequest,
    BlockResult,
    OBSERVABLE_NAMES,
    integrate_block,
)
from .model import (
    ModelParams,
    ProbeParams,
    ScheduleParams,
    SystemState,
    coth_factor,
)

__all__ = [
    "AllTrajectoriesDiverged",
    "EnsembleConfig",
    "EnsembleResult",
    "SteadyObservables",
    "Summary",
    "sample_initial_state",
    "run_ensemble",
    "steady_observables",
    "effective_temperature",
    "relative_cooling",
]

BLOCK_SIZE = 2048  # vectorization granularity; results are independent of it


class AllTrajectoriesDiverged(RuntimeError):
    """Every trajectory of the ensemble hit the overflow threshold."""


@dataclass(frozen=True)
class EnsembleConfig:
    model: ModelParams
    schedule: ScheduleParams
    probe: ProbeParams | None = None
    n_traj: int = 15000
    master_seed: int = 0
    stream_base: int = 0
    window: tuple[float, float] | None = None
    record_times: tuple[float, ...] = ()
    # Optional coarse pre-measurement segment (see dynamics.BlockRequest);
    # warmup_dt only needs to resolve the slow (cavity/Raman) frequencies.
    warmup_t: float = 0.0
    warmup_dt: float | None = None

    def __post_init__(self):
        if self.n_traj < 1:
            raise ValueError("n_traj must be >= 1")
        if self.warmup_t > 0.0 and self.warmup_dt is not None:
            slow = max(self.model.omega_R, 2.0 * self.model.omega_c)
            if self.warmup_dt * slow >= 0.1:
                raise ValueError("warmup_dt too coarse for the slow dynamics")
        for t in self.record_times:
            if not (0.0 <= t <= self.schedule.tstar):
                raise ValueError("record times must lie in [0, tstar]")
        if self.window is not None:
            lo, hi = self.window
            if not (0.0 <= lo < hi <= self.schedule.tstar):
                raise ValueError("window must satisfy 0 <= lo < hi <= tstar")
        self.schedule.validate_against(self.model, self.probe)

    def t_end(self) -> float:
        """Last time the integrator must reach."""
        t = 0.0
        if self.record_times:
            t = max(t, max(self.record_times))
        if self.window is not None:
            t = max(t, self.window[1])
        if t == 0.0:
            t = self.schedule.tp
        return t


@dataclass(frozen=True)
class Summary:
    """Trajectory-averaged observable with its Monte Carlo uncertainty."""

    mean: float
    var: float
    stderr: float
    n: int


@dataclass
class EnsembleResult:
    n_traj: int
    n_diverged: int
    window: dict | None                  # name -> Summary over the time window
    snapshots: list                      # [(t, {name: Summary})]
    wall_time: float
    diverged_mask: np.ndarray = field(repr=False, default=None)

    @property
    def n_valid(self) -> int:
        return self.n_traj - self.n_diverged

    @property
    def divergence_fraction(self) -> float:
        return self.n_diverged / self.n_traj


def sample_initial_state(model: ModelParams, rng: np.random.Generator) -> SystemState:
    """Draw one trajectory's initial condition from the Wigner distribution.

    Quadrature standard deviations: sqrt(coth(omega/2T))/2 for the cavity and
    Raman modes (1/2 at T = 0), always 1/2 for the scattered mode.
    """
    z = rng.standard_normal(DRAWS_INIT)
    w_a = 0.5 * math.sqrt(coth_factor(model.omega_c, model.temperature))
    w_b = 0.5 * math.sqrt(coth_factor(model.omega_R, model.temperature))
    return SystemState(
        a=complex(w_a * z[0], w_a * z[1]),
        b=complex(w_b * z[2], w_b * z[3]),
        a_s=complex(0.5 * z[4], 0.5 * z[5]),
        t=0.0,
    )


def _block_requests(config: EnsembleConfig) -> list[BlockRequest]:
    t_end = config.t_end()
    reqs = []
    for lo in range(0, config.n_traj, BLOCK_SIZE):
        hi = min(lo + BLOCK_SIZE, config.n_traj)
        reqs.append(
            BlockRequest(
                model=config.model,
                probe=config.probe,
                schedule=config.schedule,
                master_seed=config.master_seed,
                stream_lo=config.stream_base + lo,
                stream_hi=config.stream_base + hi,
                t_end=t_end,
                window=config.window,
                record_times=config.record_times,
                warmup_t=config.warmup_t,
                warmup_dt=config.warmup_dt,
            )
        )
    return reqs


def _summarize(values: np.ndarray, valid: np.ndarray) -> Summary:
    v = values[valid]
    n = v.size
    mean = float(np.sum(v) / n)           # numpy pairwise sum, fixed order
    var = float(np.sum((v - mean) ** 2) / max(n - 1, 1))
    return Summary(mean=mean, var=var, stderr=math.sqrt(var / n), n=n)


def run_ensemble(config: EnsembleConfig, pool_map=None) -> EnsembleResult:
    """Run the full ensemble and reduce per-trajectory observables.

    pool_map, when given, must behave like an order-preserving map (e.g.
    concurrent.futures.Executor.map); blocks are independent pure jobs.
    Divergent trajectories are counted and excluded from every average.
    Raises AllTrajectoriesDiverged when nothing survives.
    """
    t_start = time.perf_counter()
    reqs = _block_requests(config)
    mapper = pool_map if pool_map is not None else map
    results: list[BlockResult] = list(mapper(integrate_block, reqs))

    diverged = np.concatenate([r.diverged for r in results])
    valid = ~diverged
    n_diverged = int(diverged.sum())
    if n_diverged == config.n_traj:
        raise AllTrajectoriesDiverged(
            f"all {config.n_traj} trajectories exceeded the overflow threshold"
        )

    window = None
    if config.window is not None:
        window = {}
        for name in OBSERVABLE_NAMES:
            vals = np.concatenate([r.window_means[name] for r in results])
            window[name] = _summarize(vals, valid)

    snapshots = []
    n_snap = len(results[0].snapshots)
    for i in range(n_snap):
        t_rec = results[0].snapshots[i][0]
        summaries = {}
        for name in OBSERVABLE_NAMES:
            vals = np.concatenate([r.snapshots[i][1][name] for r in results])
            summaries[name] = _summarize(vals, valid)
        snapshots.append((t_rec, summaries))

    return EnsembleResult(
        n_traj=config.n_traj,
        n_diverged=n_diverged,
        window=window,
        snapshots=snapshots,
        wall_time=time.perf_counter() - t_start,
        diverged_mask=diverged,
    )


@dataclass(frozen=True)
class SteadyObservables:
    """Relative steady-state deviations from the uncoupled system."""

    deltaQ2: float
    deltax2: float
    Q_over_Q0: float
    deltaQ2_stderr: float
    deltax2_stderr: float
    Q_over_Q0_stderr: float
    Q2: float                      # <Q^2> itself, for thermometry
    n_diverged: int
    n_valid: int
    near_instability: bool


def steady_observables(
    config: EnsembleConfig,
    pool_map=None,
    time_window: bool = True,
) -> SteadyObservables:
    """Estimate deltaQ2, deltax2 and the Raman shift at the steady state.

    The probe must be off (the estimators describe the undriven equilibrium).
    By default each trajectory is time-averaged over [0.8*tp, tp] before the
    ensemble average; time_window=False instead takes a single snapshot at tp
    for strict protocol reproduction.
    """
    if config.probe is not None and config.probe.gs_Ep0 > 0.0:
        raise ValueError("steady_observables requires the probe to be disabled")
    tp = config.schedule.tp
    if time_window:
        config = replace(config, window=(0.8 * tp, tp), record_times=())
    else:
        config = replace(config, window=None, record_times=(tp,))

    res = run_ensemble(config, pool_map=pool_map)
    obs = res.window if time_window else res.snapshots[0][1]

    m = config.model
    coth_R = coth_factor(m.omega_R, m.temperature)
    coth_c = coth_factor(m.omega_c, m.temperature)

    # <Q^2>/<Q^2>_0 - 1 = 4 <Re b^2>/coth_R - 1, and similarly for x.
    q2 = (2.0 / m.omega_R) * obs["br2"].mean
    deltaQ2 = 4.0 * obs["br2"].mean / coth_R - 1.0
    deltax2 = obs["xa2"].mean / (2.0 * m.omega_c) / (coth_c / (2.0 * m.omega_c)) - 1.0
    q_over_q0 = math.sqrt(2.0) * obs["re_b"].mean

    return SteadyObservables(
        deltaQ2=deltaQ2,
        deltax2=deltax2,
        Q_over_Q0=q_over_q0,
        deltaQ2_stderr=4.0 * obs["br2"].stderr / coth_R,
        deltax2_stderr=obs["xa2"].stderr / coth_c,
        Q_over_Q0_stderr=math.sqrt(2.0) * obs["re_b"].stderr,
        Q2=q2,
        n_diverged=res.n_diverged,
        n_valid=res.n_valid,
        near_instability=m.g > 0 and m.g > 0.95 * m.g_max,
    )


def effective_temperature(q2: float, omega_R: float) -> float:
    """Invert <Q^2> = coth(omega_R/2T)/(2 omega_R) for the temperature."""
    x = 2.0 * omega_R * q2
    if x <= 1.0:
        return 0.0
    # arccoth(x) = atanh(1/x)
    return omega_R / (2.0 * math.atanh(1.0 / x))


def relative_cooling(q2: float, model: ModelParams) -> float:
    """Relative temperature change of the Raman mode inferred from <Q^2>."""
    if model.temperature <= 0.0:
        raise ValueError("relative cooling is only defined at T > 0")
    t_eff = effective_temperature(q2, model.omega_R)
    return (t_eff - model.temperature) / model.temperature
