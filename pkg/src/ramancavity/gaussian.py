"""Closed-form and self-consistent Gaussian analytics for the coupled system.

This module is the analytic counterpart of the stochastic simulation: it
provides the renormalized cavity frequency, the frequency-dependent squeezing
force, perturbative and self-consistent stationary fluctuation spectra of the
cavity field, the equilibrium Raman shift, the collective-mode (polariton)
frequencies of the linearized dynamics and the Rabi splitting.

Stationary cavity fluctuations are encoded in two spectral functions on a
symmetric frequency grid,

    <a*(w) a(w')> = 2 pi delta(w - w') n(w)      occupation spectrum
    <a(w)  a(w')> = 2 pi delta(w + w') f(w)      squeezing spectrum

(Fourier convention a(w) = int dt e^{i w t} a(t)).  Within the Gaussian
closure the cavity obeys a linear response equation

    (-i w + kappa) a(w) = -i wbar_c(w) a(w) - i Delta(w) a*(-w) + xi_a(w)

with an effective frequency wbar_c(w) and squeezing force Delta(w) that are
themselves functionals of n and f:

    wbar_c(w) = omega_c + B(w),   Delta(w) = B(w),
    B(w) = (-4 g^2/omega_R + 3 g4) I0 - 8 g^2 I1(w),
    I0    = int dw'/2pi G(w'),
    I1(w) = int dw'/2pi chi_R(w') G(w - w'),
    G     = 2 n + f + f*,
    chi_R(w) = omega_R / (omega_R^2 - w^2 - i gamma w).

Solving the 2x2 response system for a(w) and squaring against the noise
correlator <xi_a* xi_a> = kappa_eff gives the closed update used both for the
perturbative solution (one pass, free response) and the damped fixed-point
iteration (self-consistent solution):

    A(w) = -i w + kappa - i wbar_c(-w)
    D(w) = (-i w + kappa + i wbar_c(w)) A(w) - Delta(w) Delta(-w)
    n(w) = kappa_eff (|A(w)|^2 + |Delta(w)|^2) / |D(w)|^2
    f(w) = -i kappa_eff (A(w) Delta(-w) + Delta(w) A(-w)) / (D(w) D(-w))

kappa_eff = kappa coth(omega_c/2T); the free (g = g4 = 0) limit is the
Lorentzian n = kappa_eff/(kappa^2 + (w - omega_c)^2), f = 0, whose grid
integral is coth(omega_c/2T)/2.  Thermal input enters only through this
noise normalization; the full thermal self-consistency should be considered
experimental.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .model import ModelParams, coth_factor

__all__ = [
    "NotConverged",
    "FrequencyGrid",
    "GaussianSolution",
    "PolaritonBranches",
    "renormalized_cavity_freq",
    "resonant_omega_c",
    "squeezing_force",
    "free_occupation",
    "perturbative_fluctuations",
    "selfconsistent_fluctuations",
    "pair_branch_frequencies",
    "equilibrium_shift",
    "polariton_frequencies",
    "rabi_splitting",
    "linearized_modes",
]


class NotConverged(RuntimeError):
    def __init__(self, iterations, residual):
        super().__init__(
            f"fixed point not converged after {iterations} iterations "
            f"(sup-norm residual {residual:.3e})"
        )
        self.iterations = iterations
        self.residual = residual


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform grid symmetric about w = 0 (odd point count).

    Spacing must resolve the cavity linewidth (<= kappa/8) and the extent
    must cover the Lorentzian tails (>= 10 max(omega_R, 2 omega_c)).
    """

    omega: np.ndarray
    spacing: float

    def __post_init__(self):
        n = self.omega.size
        if n % 2 != 1:
            raise ValueError("grid must have an odd number of points")
        if not np.allclose(self.omega, -self.omega[::-1], atol=1e-12):
            raise ValueError("grid must be symmetric about 0")

    @classmethod
    def for_model(
        cls,
        model: ModelParams,
        points_per_linewidth: int = 8,
        extent_factor: float = 10.0,
    ) -> "FrequencyGrid":
        if model.kappa <= 0.0:
            raise ValueError("frequency grid requires kappa > 0")
        spacing = model.kappa / points_per_linewidth
        extent = extent_factor * max(model.omega_R, 2.0 * model.omega_c)
        m = int(math.ceil(extent / spacing))
        omega = spacing * np.arange(-m, m + 1)
        return cls(omega=omega, spacing=spacing)

    def integrate(self, values: np.ndarray):
        """Trapezoidal int dw/2pi."""
        return np.trapezoid(values, dx=self.spacing) / (2.0 * math.pi)

    def flip(self, values: np.ndarray) -> np.ndarray:
        """values(-w) on the symmetric grid."""
        return values[::-1]

    def convolve(self, kernel: np.ndarray, values: np.ndarray) -> np.ndarray:
        """(kernel * values)(w) = int dw'/2pi kernel(w') values(w - w').

        Linear convolution truncated to the grid; both functions are assumed
        negligible beyond the grid extent.
        """
        out = fftconvolve(kernel, values, mode="same")
        return out * (self.spacing / (2.0 * math.pi))


@dataclass(frozen=True)
class GaussianSolution:
    grid: FrequencyGrid
    n: np.ndarray                 # occupation spectrum, real
    f: np.ndarray                 # squeezing spectrum, complex
    omega_c_bar: float            # effective cavity response frequency
    Delta: complex                # squeezing force at w = omega_c
    x2: float                     # equal-time <x^2>
    converged: bool
    iterations: int
    omega_c_bar_fn: np.ndarray = None   # wbar_c(w) on the grid
    Delta_fn: np.ndarray = None         # Delta(w) on the grid
    response_det: np.ndarray = None     # D(w) on the grid


@dataclass(frozen=True)
class PolaritonBranches:
    omega_minus: float
    omega_plus: float
    delta: float                  # Rabi half-splitting (omega_plus - omega_minus)/2
    stable: bool


def renormalized_cavity_freq(model: ModelParams) -> float:
    """Effective cavity response frequency omega_c - 12 g^2/omega_R + 3 g4.

    The true parametric resonance sits at wbar_c = omega_R/2 rather than at
    omega_c = omega_R/2.
    """
    return model.omega_c - 12.0 * model.g**2 / model.omega_R + 3.0 * model.g4


def resonant_omega_c(model: ModelParams, target: float | None = None) -> float:
    """Bare omega_c that places the renormalized frequency at target
    (default omega_R/2)."""
    if target is None:
        target = model.omega_R / 2.0
    return target + 12.0 * model.g**2 / model.omega_R - 3.0 * model.g4


def squeezing_force(model: ModelParams, omega) -> complex:
    """Leading-order squeezing force Delta(w).

    Delta(w) = -4 g^2/omega_R + 3 g4
               - 8 g^2 omega_R / (omega_R^2 - (w - omega_c)^2
                                  - i (gamma + 2 kappa)(w - omega_c)
                                  + gamma kappa + kappa^2)

    At w = omega_c and small kappa, gamma this reduces to
    -12 g^2/omega_R + 3 g4.
    """
    m = model
    d = omega - m.omega_c
    denom = (m.omega_R**2 - d**2 - 1j * (m.gamma + 2.0 * m.kappa) * d
             + m.gamma * m.kappa + m.kappa**2)
    return (-4.0 * m.g**2 / m.omega_R + 3.0 * m.g4
            - 8.0 * m.g**2 * m.omega_R / denom)


def _raman_response(model: ModelParams, omega: np.ndarray) -> np.ndarray:
    """chi_R(w) = omega_R / (omega_R^2 - w^2 - i gamma w)."""
    return model.omega_R / (model.omega_R**2 - omega**2 - 1j * model.gamma * omega)


def _noise_response(model, grid, wbar_fn, delta_fn):
    """n, f from the 2x2 response solution driven by the cavity noise."""
    kappa_eff = model.kappa * coth_factor(model.omega_c, model.temperature)
    w = grid.omega
    wbar_m = grid.flip(wbar_fn)
    delta_m = grid.flip(delta_fn)
    A = -1j * w + model.kappa - 1j * wbar_m
    A_m = grid.flip(A)
    D = (-1j * w + model.kappa + 1j * wbar_fn) * A - delta_fn * delta_m
    D_m = grid.flip(D)
    n = kappa_eff * (np.abs(A) ** 2 + np.abs(delta_fn) ** 2) / np.abs(D) ** 2
    f = -1j * kappa_eff * (A * delta_m + delta_fn * A_m) / (D * D_m)
    return n, f, D


def _effective_params(model, grid, n, f):
    """One application of the Gaussian closure maps wbar_c(w), Delta(w).

    The position-spectrum entering the Wick contraction is the symmetrized
    S_xx(v) = n(v) + n(-v) + f(v) + f*(v); the counter-rotating n(-v) part is
    what carries the parametric-gain feedback at 2 wbar_c ~ omega_R (it is
    purely imaginary there, so the resonance-condition formula
    wbar_c = omega_c - 12 g^2/omega_R + 3 g4 is unaffected).
    """
    G = n + grid.flip(n) + 2.0 * np.real(f)
    I0 = grid.integrate(G)
    I1 = grid.convolve(_raman_response(model, grid.omega), G)
    B = (-4.0 * model.g**2 / model.omega_R + 3.0 * model.g4) * I0 \
        - 8.0 * model.g**2 * I1
    return model.omega_c + B, B


def _equal_time_x2(model, grid, n, f):
    return float(np.real(grid.integrate(2.0 * n + 2.0 * np.real(f)))) / (2.0 * model.omega_c)


def free_occupation(model: ModelParams, grid: FrequencyGrid) -> np.ndarray:
    """Uncoupled Lorentzian occupation spectrum (thermal when T > 0)."""
    kappa_eff = model.kappa * coth_factor(model.omega_c, model.temperature)
    return kappa_eff / (model.kappa**2 + (grid.omega - model.omega_c) ** 2)


def _interp_complex(x, xs, ys):
    return complex(np.interp(x, xs, ys.real), np.interp(x, xs, ys.imag))


def perturbative_fluctuations(model: ModelParams, grid: FrequencyGrid) -> GaussianSolution:
    """Leading-order stationary spectra: one pass of the closure map applied
    to the free theory.

    The effective parameters are built from the uncoupled Lorentzian, so the
    occupation comes out Lorentzian at the renormalized cavity frequency and
    f is the free-response squeezing driven by the leading-order Delta(w).
    Valid for small g, g4 (advisory, not enforced).
    """
    n0 = free_occupation(model, grid)
    f0 = np.zeros(grid.omega.size, dtype=complex)
    wbar_fn, delta_fn = _effective_params(model, grid, n0, f0)
    n, f, det = _noise_response(model, grid, wbar_fn, delta_fn)
    x2 = _equal_time_x2(model, grid, n, f)
    return GaussianSolution(
        grid=grid, n=n, f=f,
        omega_c_bar=renormalized_cavity_freq(model),
        Delta=_interp_complex(model.omega_c, grid.omega, delta_fn),
        x2=x2, converged=True, iterations=1,
        omega_c_bar_fn=wbar_fn,
        Delta_fn=delta_fn,
        response_det=det,
    )


def selfconsistent_fluctuations(
    model: ModelParams,
    grid: FrequencyGrid,
    tol: float = 1e-8,
    max_iter: int = 500,
    mixing: float = 0.5,
) -> GaussianSolution:
    """Damped fixed-point solution of the coupled (wbar_c, Delta, n, f) maps.

    Starts from the perturbative solution; each iteration recomputes the
    effective parameters from (n, f), solves the noise response, and mixes
    new = mixing*map(old) + (1-mixing)*old.  Converged when the sup-norm
    change of n and f drops below tol.  Raises NotConverged otherwise.
    """
    if not model.stable:
        raise ValueError("self-consistent solution requires a stable model (g < g_max)")
    start = perturbative_fluctuations(model, grid)
    n, f = start.n.copy(), start.f.copy()

    residual = math.inf
    for it in range(1, max_iter + 1):
        wbar_fn, delta_fn = _effective_params(model, grid, n, f)
        n_new, f_new, det = _noise_response(model, grid, wbar_fn, delta_fn)
        n_next = mixing * n_new + (1.0 - mixing) * n
        f_next = mixing * f_new + (1.0 - mixing) * f
        residual = max(
            float(np.max(np.abs(n_next - n))),
            float(np.max(np.abs(f_next - f))),
        )
        n, f = n_next, f_next
        if residual < tol:
            peak = float(grid.omega[int(np.argmax(n))])
            delta_at_wc = _interp_complex(model.omega_c, grid.omega, delta_fn)
            return GaussianSolution(
                grid=grid, n=n, f=f,
                omega_c_bar=peak,
                Delta=delta_at_wc,
                x2=_equal_time_x2(model, grid, n, f),
                converged=True, iterations=it,
                omega_c_bar_fn=wbar_fn, Delta_fn=delta_fn, response_det=det,
            )
    raise NotConverged(max_iter, residual)


def pair_branch_frequencies(solution: GaussianSolution) -> tuple[float, float]:
    """Polariton branch estimates from the pole structure of the response.

    The stationary response determinant D(w) develops two near-zeros around
    the (half) polariton frequencies; a squeezing excitation at energy eps is
    a photon pair at eps/2, so the branches are twice the pole positions.
    Returns the two pair energies in increasing order.
    """
    w = solution.grid.omega
    absd = np.abs(solution.response_det)
    pos = w > 0
    wp, dp = w[pos], absd[pos]
    minima = np.where((dp[1:-1] < dp[:-2]) & (dp[1:-1] < dp[2:]))[0] + 1
    if minima.size < 2:
        raise ValueError("response determinant shows fewer than two poles")
    order = np.argsort(dp[minima])
    picked = np.sort(wp[minima[order][:2]])
    return 2.0 * picked[0], 2.0 * picked[1]


def equilibrium_shift(model: ModelParams, x0sq: float) -> tuple[float, float]:
    """Static equilibrium values (Q0, p0^2) driven by cavity fluctuations x0^2.

    Q0   = -(2 g omega_c sqrt(2 omega_R) / omega_R^2) x0^2
    p0^2 = omega_c^2 x0^2 - 2 (2 g omega_c sqrt(2 omega_R))^2 x0^4 / omega_R^2
           + 12 g4 omega_c^2 x0^4
    """
    if x0sq <= 0.0:
        raise ValueError("x0sq must be > 0")
    m = model
    alpha = 2.0 * m.g * m.omega_c * math.sqrt(2.0 * m.omega_R)
    q0 = -(alpha / m.omega_R**2) * x0sq
    p0sq = (m.omega_c**2 * x0sq
            - 2.0 * alpha**2 * x0sq**2 / m.omega_R**2
            + 12.0 * m.g4 * m.omega_c**2 * x0sq**2)
    return q0, p0sq


def _linearized_matrix(model: ModelParams, x0sq: float) -> np.ndarray:
    """Linear dynamics of (Q1, P1, x^2_1, {x,p}_1, p^2_1) around equilibrium."""
    m = model
    alpha = 2.0 * m.g * m.omega_c * math.sqrt(2.0 * m.omega_R)
    q0, _ = equilibrium_shift(model, x0sq)
    gamma_sq = 2.0 * m.omega_c**2 * (
        1.0 + (-16.0 * m.g**2 / m.omega_R + 24.0 * m.g4) * x0sq
    )
    c5 = -m.omega_c**2 - 2.0 * alpha * q0 - 12.0 * m.g4 * m.omega_c**2 * x0sq
    mat = np.zeros((5, 5))
    mat[0, 1] = 1.0
    mat[1, 0] = -m.omega_R**2
    mat[1, 2] = -alpha
    mat[2, 3] = 1.0
    mat[3, 0] = -4.0 * alpha * x0sq
    mat[3, 2] = -gamma_sq
    mat[3, 4] = 2.0
    mat[4, 3] = c5
    return mat


def linearized_modes(model: ModelParams, x0sq: float) -> np.ndarray:
    """Eigenvalues of the linearized 5-variable collective-mode system.

    Purely imaginary pairs +-i omega correspond to stable oscillation; a
    positive real eigenvalue signals the parametric instability.
    """
    return np.linalg.eigvals(_linearized_matrix(model, x0sq))


def polariton_frequencies(model: ModelParams, x0sq: float | None = None) -> PolaritonBranches:
    """Collective-mode frequencies omega_-, omega_+ in closed form.

    omega_+-^2 = (1/2 omega_R) [ 4 w_c^2 w_R + w_R^3 + 72 g4 w_c^2 w_R x0^2
                                 - 64 g^2 w_c^2 x0^2
        +- sqrt( -16 w_c^2 w_R^3 (w_R + 18 g4 x0^2 w_R - 24 g^2 x0^2)
                 + (w_R^3 + (4 + 72 g4 x0^2) w_c^2 w_R - 64 g^2 x0^2 w_c^2)^2 ) ]

    x0sq defaults to the perturbative cavity fluctuation 1/(2 omega_c); the
    self-consistent or simulation-measured value may be passed instead.
    stable=False when a squared frequency is non-positive or the discriminant
    is negative.
    """
    m = model
    if x0sq is None:
        x0sq = 1.0 / (2.0 * m.omega_c)
    if x0sq <= 0.0:
        raise ValueError("x0sq must be > 0")
    wc2 = m.omega_c**2
    wr = m.omega_R
    s = (4.0 * wc2 * wr + wr**3 + 72.0 * m.g4 * wc2 * wr * x0sq
         - 64.0 * m.g**2 * wc2 * x0sq)
    disc = (-16.0 * wc2 * wr**3 * (wr + 18.0 * m.g4 * x0sq * wr - 24.0 * m.g**2 * x0sq)
            + (wr**3 + (4.0 + 72.0 * m.g4 * x0sq) * wc2 * wr
               - 64.0 * m.g**2 * x0sq * wc2) ** 2)
    if disc < 0.0:
        return PolaritonBranches(math.nan, math.nan, math.nan, stable=False)
    root = math.sqrt(disc)
    w_minus_sq = (s - root) / (2.0 * wr)
    w_plus_sq = (s + root) / (2.0 * wr)
    if w_minus_sq <= 0.0 or w_plus_sq <= 0.0:
        return PolaritonBranches(
            math.nan if w_minus_sq <= 0 else math.sqrt(w_minus_sq),
            math.nan if w_plus_sq <= 0 else math.sqrt(w_plus_sq),
            math.nan, stable=False,
        )
    w_minus = math.sqrt(w_minus_sq)
    w_plus = math.sqrt(w_plus_sq)
    return PolaritonBranches(
        omega_minus=w_minus,
        omega_plus=w_plus,
        delta=(w_plus - w_minus) / 2.0,
        stable=True,
    )


def rabi_splitting(model: ModelParams, x2: float | None = None) -> float:
    """Rabi half-splitting delta = sqrt(2 x2 omega_R) (1 - 27 g4 x2^3 / 2) g.

    Linear in g up to O(g^3); x2 defaults to the perturbative 1/(2 omega_c).
    """
    if x2 is None:
        x2 = 1.0 / (2.0 * model.omega_c)
    if x2 <= 0.0:
        raise ValueError("x2 must be > 0")
    return (math.sqrt(2.0 * x2 * model.omega_R)
            * (1.0 - 27.0 * model.g4 * x2**3 / 2.0) * model.g)
