"""Static NV ensemble spin physics.

Resonance-line layout under a [111] bias field, Ramsey fringe model with a
stretched-exponential envelope, the slope of the demodulated Ramsey response,
and the photon-shot-noise sensitivity limit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

ELEMENTARY_CHARGE = 1.602176634e-19  # C

# Standard literature values; not free parameters of the fringe model.
ZERO_FIELD_SPLITTING_D = 2.870e9  # Hz
HYPERFINE_A_PARALLEL = -2.16e6  # Hz, 14N
GYROMAGNETIC_RATIO = 28e9  # Hz/T

# The four <111> NV axes of the diamond lattice (unit vectors, crystal frame).
NV_AXES = np.array(
    [
        [1.0, 1.0, 1.0],
        [1.0, -1.0, -1.0],
        [-1.0, 1.0, -1.0],
        [-1.0, -1.0, 1.0],
    ]
) / np.sqrt(3.0)


@dataclass(frozen=True)
class EnsembleParams:
    """Static parameters of the NV ensemble and readout chain."""

    photocurrent: float  # A
    contrast: float  # Rabi contrast, dimensionless fraction
    t2_star: float  # s
    stretch_p: float = 1.0
    delta_ms: int = 2  # 1 (SQ) or 2 (DQ)
    gyromagnetic_ratio: float = GYROMAGNETIC_RATIO  # Hz/T
    zero_field_splitting: float = ZERO_FIELD_SPLITTING_D  # Hz
    hyperfine_a_parallel: float = HYPERFINE_A_PARALLEL  # Hz

    def __post_init__(self):
        if self.photocurrent <= 0:
            raise ValueError("photocurrent must be positive")
        if not 0 < self.contrast < 1:
            raise ValueError("contrast must lie in (0, 1)")
        if self.t2_star <= 0:
            raise ValueError("t2_star must be positive")
        if self.stretch_p <= 0:
            raise ValueError("stretch_p must be positive")
        if self.delta_ms not in (1, 2):
            raise ValueError("delta_ms must be 1 or 2")
        if self.gyromagnetic_ratio <= 0:
            raise ValueError("gyromagnetic_ratio must be positive")


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("zero vector has no direction")
    return v / n


@dataclass(frozen=True)
class BiasField:
    """Bias magnetic field in the crystal frame."""

    magnitude: float  # T
    axis: np.ndarray = field(default_factory=lambda: NV_AXES[0].copy())
    nv_axes: np.ndarray = field(default_factory=lambda: NV_AXES.copy())

    def __post_init__(self):
        if self.magnitude < 0:
            raise ValueError("field magnitude must be non-negative")
        axis = np.asarray(self.axis, dtype=float)
        if abs(np.linalg.norm(axis) - 1.0) > 1e-12:
            raise ValueError("bias axis must be a unit vector")
        nv_axes = np.asarray(self.nv_axes, dtype=float)
        if nv_axes.shape != (4, 3):
            raise ValueError("nv_axes must be four 3-vectors")
        dots = nv_axes @ nv_axes.T
        if np.max(np.abs(np.diag(dots) - 1.0)) > 1e-12:
            raise ValueError("nv_axes must be unit vectors")
        off = dots[~np.eye(4, dtype=bool)]
        if np.max(np.abs(off + 1.0 / 3.0)) > 1e-12:
            raise ValueError("nv_axes must form the tetrahedral <111> set")
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "nv_axes", nv_axes)


@dataclass(frozen=True)
class RamseyFringeParams:
    """Parameters of a single Ramsey fringe record."""

    detuning: float  # Hz
    t2_star: float  # s
    contrast: float
    stretch_p: float = 1.0
    delta_ms: int = 2
    phase: float = 0.0  # rad

    def __post_init__(self):
        if self.t2_star <= 0:
            raise ValueError("t2_star must be positive")
        if self.stretch_p <= 0:
            raise ValueError("stretch_p must be positive")


def resonance_lines(params: EnsembleParams, bias: BiasField):
    """All 24 hyperfine-split spin resonance frequencies.

    Returns a list of (axis_index, ms_sign, m_i, frequency_hz) with
    f = D + ms_sign * gamma_e * B * |cos(theta_k)| + m_i * A_parallel.
    """
    lines = []
    for k, axis in enumerate(bias.nv_axes):
        proj = abs(float(np.dot(bias.axis, axis)))
        zeeman = params.gyromagnetic_ratio * bias.magnitude * proj
        for ms_sign in (-1, +1):
            for m_i in (-1, 0, +1):
                f = (
                    params.zero_field_splitting
                    + ms_sign * zeeman
                    + m_i * params.hyperfine_a_parallel
                )
                lines.append((k, ms_sign, m_i, f))
    return lines


def odmr_spectrum(params, bias, linewidth, freq_grid, dip_depth=0.01, line_weights=None):
    """Pulsed-ODMR contrast spectrum: unit baseline with Lorentzian dips.

    ``linewidth`` is the FWHM. ``line_weights`` optionally scales the dip of
    each NV axis (length-4), standing in for the laser-polarization tuning of
    relative peak amplitudes; default is equal depth per line.
    """
    if linewidth <= 0:
        raise ValueError("linewidth must be positive")
    grid = np.asarray(freq_grid, dtype=float)
    if grid.size == 0:
        raise ValueError("frequency grid is empty")
    if grid.size > 1 and np.any(np.diff(grid) <= 0):
        raise ValueError("frequency grid must be strictly increasing")
    if line_weights is None:
        line_weights = np.ones(4)
    line_weights = np.asarray(line_weights, dtype=float)

    hwhm = linewidth / 2.0
    spectrum = np.ones_like(grid)
    for k, _ms, _mi, f0 in resonance_lines(params, bias):
        spectrum -= dip_depth * line_weights[k] * hwhm**2 / ((grid - f0) ** 2 + hwhm**2)
    return spectrum


def ramsey_fringe(tau, p: RamseyFringeParams):
    """Normalized Ramsey signal C * exp(-(tau/T2*)^p) * cos(2 pi dms delta tau + phi)."""
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise ValueError("tau must be non-negative")
    envelope = p.contrast * np.exp(-((tau / p.t2_star) ** p.stretch_p))
    return envelope * np.cos(2.0 * np.pi * p.delta_ms * p.detuning * tau + p.phase)


class FitConvergenceError(RuntimeError):
    """Raised when a nonlinear fit fails to converge or is degenerate."""


@dataclass(frozen=True)
class RamseyFit:
    """Result of a Ramsey fringe fit, with 1-sigma uncertainties."""

    t2_star: float
    detuning: float
    contrast: float
    stretch_p: float
    phase: float
    sigma: dict
    residual_norm: float
    converged: bool


def fit_ramsey(taus, values, init, delta_ms=2, fit_stretch=True, max_nfev=200):
    """Least-squares fit of a Ramsey fringe record.

    ``init`` is a dict with starting values for t2_star, detuning, contrast and
    optionally stretch_p, phase. Raises FitConvergenceError when the solver
    fails or the solution is degenerate; no silent fallback.
    """
    taus = np.asarray(taus, dtype=float)
    values = np.asarray(values, dtype=float)
    if taus.size < 8:
        raise ValueError("need at least 8 samples")
    span = taus.max() - taus.min()
    if init["detuning"] != 0 and span * abs(init["detuning"]) * delta_ms < 1.0:
        raise ValueError("samples must span at least one oscillation period")
    if np.ptp(values) == 0:
        raise FitConvergenceError("degenerate input: constant signal")

    init = dict(init)
    # Sinusoid fits need a frequency start within a fraction of a cycle over
    # the record; refine the detuning guess from the periodogram peak when the
    # record is uniformly sampled.
    dt = np.diff(taus)
    if np.allclose(dt, dt[0], rtol=1e-6):
        spec = np.abs(np.fft.rfft(values - values.mean()))
        freqs = np.fft.rfftfreq(values.size, d=dt[0])
        peak = int(np.argmax(spec))
        if peak > 0:
            init["detuning"] = freqs[peak] / delta_ms

    p0 = init.get("stretch_p", 1.0)
    phi0 = init.get("phase", 0.0)
    x0 = [init["t2_star"], init["detuning"], init["contrast"]]
    if fit_stretch:
        x0.append(p0)
    x0.append(phi0)

    def unpack(x):
        if fit_stretch:
            return x[0], x[1], x[2], x[3], x[4]
        return x[0], x[1], x[2], p0, x[3]

    def residuals(x):
        t2, delta, c, p, phi = unpack(x)
        model = c * np.exp(-((taus / abs(t2)) ** abs(p))) * np.cos(
            2.0 * np.pi * delta_ms * delta * taus + phi
        )
        return model - values

    scales = np.abs(np.asarray(x0, dtype=float))
    scales[scales == 0] = 1.0
    sol = least_squares(
        residuals, x0, method="lm", max_nfev=max_nfev, xtol=1e-12, x_scale=scales
    )
    if not sol.success:
        raise FitConvergenceError(f"fit did not converge: {sol.message}")

    t2, delta, c, p, phi = unpack(sol.x)
    # Covariance from the Jacobian at the solution. Columns are normalized
    # before inversion so unit disparity (seconds vs radians) does not fake a
    # rank deficiency; a truly unconstrained parameter still shows up as a
    # zero or numerically singular column.
    jac = sol.jac
    dof = max(taus.size - sol.x.size, 1)
    s2 = 2.0 * sol.cost / dof
    col = np.linalg.norm(jac, axis=0)
    if np.any(col == 0):
        raise FitConvergenceError("degenerate fit: unconstrained parameter")
    jn = jac / col
    jtj = jn.T @ jn
    if np.linalg.cond(jtj) > 1e12:
        raise FitConvergenceError("degenerate fit: singular normal equations")
    cov = s2 * np.linalg.inv(jtj) / np.outer(col, col)
    err = np.sqrt(np.maximum(np.diag(cov), 0.0))
    names = ["t2_star", "detuning", "contrast"] + (["stretch_p"] if fit_stretch else []) + ["phase"]
    sigma = dict(zip(names, err))
    if not fit_stretch:
        sigma["stretch_p"] = 0.0

    return RamseyFit(
        t2_star=abs(t2),
        detuning=delta,
        contrast=c,
        stretch_p=abs(p),
        phase=phi,
        sigma=sigma,
        residual_norm=float(np.sqrt(2.0 * sol.cost)),
        converged=True,
    )


def ramsey_slope(params: EnsembleParams, tau: float) -> float:
    """Slope of the demodulated Ramsey response at the zero crossing, A/Hz."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    return (
        2.0
        * np.pi
        * tau
        * params.delta_ms
        * params.photocurrent
        * params.contrast
        * np.exp(-((tau / params.t2_star) ** params.stretch_p))
    )


def optimal_tau(t2_star: float, p: float = 1.0) -> float:
    """Free precession time maximizing tau * exp(-(tau/T2*)^p)."""
    if t2_star <= 0 or p <= 0:
        raise ValueError("t2_star and p must be positive")
    return t2_star * (1.0 / p) ** (1.0 / p)


def shot_noise_sensitivity(photocurrent, slope, gamma_e=GYROMAGNETIC_RATIO, k_bal=1.0):
    """Photon-shot-noise-limited sensitivity sqrt(2 q I) / (gamma_e |dI/ddelta|), T/sqrt(Hz).

    ``k_bal`` is an optional extra noise factor for alternate readings of the
    balanced-detection contribution; the default 1.0 evaluates the formula as
    printed.
    """
    if photocurrent <= 0:
        raise ValueError("photocurrent must be positive")
    if slope <= 0:
        raise ValueError("slope must be positive")
    return k_bal * np.sqrt(2.0 * ELEMENTARY_CHARGE * photocurrent) / (gamma_e * slope)
