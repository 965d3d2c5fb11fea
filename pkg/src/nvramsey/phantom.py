"""Current-dipole-in-a-conducting-sphere forward model and phantom scenarios.

Field of an equivalent current dipole (ECD) inside a homogeneous conducting
sphere, with analytic gradient, rectangular-aperture spatial averaging by
Gauss-Legendre quadrature, scan maps, and drive-current time series. The
sphere center is the coordinate origin.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .timeseries import TimeSeries

MU_0 = 4.0e-7 * np.pi  # T*m/A


class SingularFieldError(ValueError):
    """Field requested at or too close to the dipole singularity."""


@dataclass(frozen=True)
class DipoleScene:
    """One dipole and one field point, sphere-center frame."""

    q: np.ndarray  # A*m
    r0: np.ndarray  # m, dipole position
    r: np.ndarray  # m, field point

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        r0 = np.asarray(self.r0, dtype=float)
        r = np.asarray(self.r, dtype=float)
        if np.linalg.norm(r) <= np.linalg.norm(r0):
            raise ValueError("field point must lie outside the source radius")
        if np.allclose(r, r0):
            raise ValueError("field point coincides with the dipole")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "r0", r0)
        object.__setattr__(self, "r", r)


@dataclass(frozen=True)
class SensorAperture:
    """Rectangular sensing area over which the field is averaged."""

    center: np.ndarray
    sides: tuple = (0.9e-3, 0.9e-3)  # m
    axis_u: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0]))
    axis_v: np.ndarray = field(default_factory=lambda: np.array([0.0, 1.0, 0.0]))
    sensitive_axis: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float)
        u = np.asarray(self.axis_u, dtype=float)
        v = np.asarray(self.axis_v, dtype=float)
        s = np.asarray(self.sensitive_axis, dtype=float)
        for name, vec in (("axis_u", u), ("axis_v", v), ("sensitive_axis", s)):
            if abs(np.linalg.norm(vec) - 1.0) > 1e-9:
                raise ValueError(f"{name} must be a unit vector")
        if abs(np.dot(u, v)) > 1e-9:
            raise ValueError("in-plane axes must be orthogonal")
        if min(self.sides) <= 0:
            raise ValueError("side lengths must be positive")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "axis_u", u)
        object.__setattr__(self, "axis_v", v)
        object.__setattr__(self, "sensitive_axis", s)

    def shifted(self, new_center) -> "SensorAperture":
        return SensorAperture(
            center=np.asarray(new_center, dtype=float),
            sides=self.sides,
            axis_u=self.axis_u,
            axis_v=self.axis_v,
            sensitive_axis=self.sensitive_axis,
        )


@dataclass(frozen=True)
class PhantomDrive:
    """AC current drive of the phantom's dipole segment."""

    current: float = 50e-6  # A
    frequency: float = 77.0  # Hz
    dipole_length: float = 0.7e-3  # m
    phase: float = 0.0  # rad

    def __post_init__(self):
        if self.current < 0:
            raise ValueError("current must be non-negative")
        if self.frequency <= 0:
            raise ValueError("frequency must be positive")
        if self.dipole_length <= 0:
            raise ValueError("dipole_length must be positive")

    @property
    def moment(self) -> float:
        """|Q| = current * dipole_length, A*m."""
        return self.current * self.dipole_length


def sarvas_F(r, r0) -> float:
    """F = |r - r0| (|r - r0| |r| + |r|^2 - r0 . r), m^3."""
    r = np.asarray(r, dtype=float)
    r0 = np.asarray(r0, dtype=float)
    a_vec = r - r0
    a = np.linalg.norm(a_vec)
    if a == 0:
        raise SingularFieldError("field point coincides with the dipole")
    rn = np.linalg.norm(r)
    return a * (a * rn + rn**2 - float(np.dot(r0, r)))


def sarvas_gradF(r, r0) -> np.ndarray:
    """Gradient of F with respect to the field point r, m^2."""
    r = np.asarray(r, dtype=float)
    r0 = np.asarray(r0, dtype=float)
    a_vec = r - r0
    a = np.linalg.norm(a_vec)
    if a == 0:
        raise SingularFieldError("field point coincides with the dipole")
    rn = np.linalg.norm(r)
    if rn == 0:
        raise SingularFieldError("field point at the sphere center")
    adotr = float(np.dot(a_vec, r))
    cr = a**2 / rn + adotr / a + 2.0 * a + 2.0 * rn
    c0 = a + 2.0 * rn + adotr / a
    return cr * r - c0 * r0


def dipole_field(scene: DipoleScene) -> np.ndarray:
    """Magnetic field of the dipole at the field point, T.

    B = mu0 / (4 pi F^2) [F Q x r0 - ((Q x r0) . r) grad F].
    """
    F = sarvas_F(scene.r, scene.r0)
    if F == 0:
        raise SingularFieldError("F vanished at the requested field point")
    qxr0 = np.cross(scene.q, scene.r0)
    gradF = sarvas_gradF(scene.r, scene.r0)
    return MU_0 / (4.0 * np.pi * F**2) * (F * qxr0 - float(np.dot(qxr0, scene.r)) * gradF)


def _aperture_average(q, r0, aperture, n):
    nodes, weights = leggauss(n)
    su, sv = aperture.sides
    total = 0.0
    peak = 0.0
    for wu, xu in zip(weights, nodes):
        for wv, xv in zip(weights, nodes):
            point = aperture.center + 0.5 * su * xu * aperture.axis_u + 0.5 * sv * xv * aperture.axis_v
            b = dipole_field(DipoleScene(q=q, r0=r0, r=point))
            value = float(np.dot(b, aperture.sensitive_axis))
            total += wu * wv * value
            peak = max(peak, abs(value))
    return total / 4.0, peak  # leggauss weights sum to 2 per axis


def averaged_field(q, r0, aperture: SensorAperture, quadrature_n: int = 8) -> float:
    """Mean field along the sensitive axis over the aperture, T.

    Tensor-product Gauss-Legendre quadrature; the result is checked for
    self-convergence between n and 2n nodes (relative 1e-3).
    """
    if quadrature_n < 2:
        raise ValueError("quadrature_n must be >= 2")
    r0 = np.asarray(r0, dtype=float)
    # Reject apertures whose plane passes near the singular point.
    rel = r0 - aperture.center
    in_plane = rel - np.dot(rel, aperture.sensitive_axis) * aperture.sensitive_axis
    normal_dist = abs(np.dot(rel, aperture.sensitive_axis))
    if normal_dist < 1e-12 and np.linalg.norm(in_plane) < max(aperture.sides):
        raise SingularFieldError("aperture intersects the dipole position")

    coarse, _ = _aperture_average(q, r0, aperture, quadrature_n)
    fine, peak = _aperture_average(q, r0, aperture, 2 * quadrature_n)
    # Near symmetry points the average itself crosses zero; normalize the
    # convergence check by the field scale over the aperture instead.
    scale = max(abs(fine), peak, 1e-30)
    if abs(fine - coarse) / scale > 1e-3:
        raise RuntimeError(
            f"quadrature not converged: n={quadrature_n} vs {2 * quadrature_n} "
            f"differ by {abs(fine - coarse) / scale:.2e} relative"
        )
    return fine


def phantom_map(q, r0, aperture: SensorAperture, x_coords, y_coords, quadrature_n=8):
    """Averaged sensitive-axis field with the aperture center swept over a grid.

    ``x_coords``/``y_coords`` are offsets (m) along the aperture's in-plane
    axes from its nominal center. Returns an array of shape (len(y), len(x)).
    """
    x_coords = np.asarray(x_coords, dtype=float)
    y_coords = np.asarray(y_coords, dtype=float)
    out = np.empty((y_coords.size, x_coords.size))
    for i, y in enumerate(y_coords):
        for j, x in enumerate(x_coords):
            center = aperture.center + x * aperture.axis_u + y * aperture.axis_v
            out[i, j] = averaged_field(q, r0, aperture.shifted(center), quadrature_n)
    return out


def map_to_csv(path, x_coords, y_coords, field_map, header_lines=()):
    """CSV matrix with coordinate header row/column in mm and values in pT."""
    with open(path, "w") as f:
        for line in header_lines:
            f.write(f"# {line}\n")
        f.write("y_mm\\x_mm," + ",".join(f"{x * 1e3:.6g}" for x in x_coords) + "\n")
        for y, row in zip(y_coords, field_map):
            f.write(f"{y * 1e3:.6g}," + ",".join(f"{v * 1e12:.9g}" for v in row) + "\n")


def phantom_timeseries(
    drive: PhantomDrive, q_direction, r0, aperture: SensorAperture,
    duration: float, sample_rate: float, quadrature_n: int = 8,
) -> TimeSeries:
    """Sensor-averaged field of the AC-driven phantom, B(t) = A sin(2 pi f t + phi)."""
    if sample_rate <= 2.0 * drive.frequency:
        raise ValueError("sample rate violates Nyquist for the drive frequency")
    q = drive.moment * np.asarray(q_direction, dtype=float) / np.linalg.norm(q_direction)
    amplitude = averaged_field(q, r0, aperture, quadrature_n)
    n = int(round(duration * sample_rate))
    t = np.arange(n) / sample_rate
    return TimeSeries(
        sample_rate=sample_rate,
        samples=amplitude * np.sin(2.0 * np.pi * drive.frequency * t + drive.phase),
        unit="T",
    )


def geometric_attenuation(d_near: float, d_far: float, amplitude_near: float) -> float:
    """Inverse-square scaling of a dipole signal with standoff distance."""
    if d_near <= 0 or d_far <= 0:
        raise ValueError("distances must be positive")
    return amplitude_near * (d_near / d_far) ** 2
