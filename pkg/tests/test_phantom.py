import numpy as np
import pytest

from nvramsey import phantom as ph

REF_Q = np.array([0.0, 35e-9, 0.0])
REF_R0 = np.array([0.0, 0.0, 9.5e-3])
REF_R = np.array([0.0, 0.0, 12e-3])


def sarvas_independent(q, r0, r):
    """Second implementation of the conducting-sphere dipole field, written
    from the w_r/w_r0 expansion rather than the direct gradient form."""
    a_vec = r - r0
    na = np.linalg.norm(a_vec)
    nr = np.linalg.norm(r)
    rdot = r.dot(r0)
    F = na * (na * nr + nr**2 - rdot)
    wr = ((na + nr) ** 3 - na * nr * (na + nr) - nr * rdot) / (na * nr)
    wr0 = (rdot - (na + nr) ** 2) / na
    grad_f = wr * r + wr0 * r0
    return 1e-7 * (np.cross(F * q, r0) - np.cross(q, r0).dot(r) * grad_f) / F**2


def random_scenes(n, seed=0):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        r0 = rng.uniform(-1, 1, 3)
        r0 *= rng.uniform(1e-3, 8e-3) / np.linalg.norm(r0)
        r = rng.uniform(-1, 1, 3)
        r *= rng.uniform(10e-3, 50e-3) / np.linalg.norm(r)
        yield r, r0


class TestSarvasF:
    def test_central_dipole(self):
        r = np.array([3e-3, 4e-3, 12e-3])
        assert ph.sarvas_F(r, np.zeros(3)) == pytest.approx(2 * np.linalg.norm(r) ** 3, rel=1e-12)

    def test_hand_arithmetic_reference_geometry(self):
        # a = 2.5 mm; F = 2.5e-3 * (2.5e-3*12e-3 + 144e-6 - 114e-6) = 1.5e-7 m^3
        assert ph.sarvas_F(REF_R, REF_R0) == pytest.approx(1.5e-7, rel=1e-9)

    def test_scaling_homogeneity(self):
        for r, r0 in random_scenes(50, seed=4):
            s = 3.7
            assert ph.sarvas_F(s * r, s * r0) == pytest.approx(s**3 * ph.sarvas_F(r, r0), rel=1e-10)

    def test_singularity(self):
        r = np.array([1e-3, 0, 1e-3])
        with pytest.raises(ph.SingularFieldError):
            ph.sarvas_F(r, r)


class TestSarvasGradF:
    def test_finite_difference_oracle(self):
        worst = 0.0
        for r, r0 in random_scenes(300, seed=1):
            g = ph.sarvas_gradF(r, r0)
            h = 1e-6 * np.linalg.norm(r)
            fd = np.empty(3)
            for k in range(3):
                e = np.zeros(3)
                e[k] = h
                fd[k] = (ph.sarvas_F(r + e, r0) - ph.sarvas_F(r - e, r0)) / (2 * h)
            worst = max(worst, np.linalg.norm(g - fd) / np.linalg.norm(g))
        assert worst < 1e-6

    def test_central_dipole_matches_finite_differences(self):
        r = np.array([2e-3, -1e-3, 11e-3])
        g = ph.sarvas_gradF(r, np.zeros(3))
        h = 1e-6 * np.linalg.norm(r)
        fd = np.array([
            (ph.sarvas_F(r + h * e, np.zeros(3)) - ph.sarvas_F(r - h * e, np.zeros(3))) / (2 * h)
            for e in np.eye(3)
        ])
        assert np.allclose(g, fd, rtol=1e-8)

    def test_homogeneity(self):
        for r, r0 in random_scenes(50, seed=5):
            s = 2.5
            assert np.allclose(ph.sarvas_gradF(s * r, s * r0), s**2 * ph.sarvas_gradF(r, r0), rtol=1e-10)


class TestDipoleField:
    def test_radial_dipole_silent(self):
        r0 = np.array([1e-3, 2e-3, 9e-3])
        scene = ph.DipoleScene(q=r0 * 2.0**-20, r0=r0, r=np.array([2e-3, -1e-3, 14e-3]))
        assert np.all(ph.dipole_field(scene) == 0.0)

    def test_dual_implementation_oracle(self):
        for r, r0 in random_scenes(200, seed=2):
            q = np.random.default_rng(0).uniform(-1, 1, 3) * 35e-9
            b1 = ph.dipole_field(ph.DipoleScene(q=q, r0=r0, r=r))
            b2 = sarvas_independent(q, r0, r)
            assert np.allclose(b1, b2, rtol=1e-12, atol=1e-30)

    def test_pinned_regression_values(self):
        # frozen from two independent implementations agreeing to 3e-16
        scene = ph.DipoleScene(q=REF_Q, r0=REF_R0, r=np.array([0.4e-3, -0.3e-3, 12e-3]))
        b = ph.dipole_field(scene)
        assert b == pytest.approx([2.05080191e-10, 6.87961725e-12, -7.35446466e-11], rel=1e-8)
        # on-axis reference scene: B = 1e-7 * |Q x r0| / F along x
        b_axis = ph.dipole_field(ph.DipoleScene(q=REF_Q, r0=REF_R0, r=REF_R))
        assert b_axis[0] == pytest.approx(1e-7 * 35e-9 * 9.5e-3 / 1.5e-7, rel=1e-12)
        assert b_axis[1] == b_axis[2] == 0.0

    def test_rotational_covariance(self):
        from scipy.spatial.transform import Rotation

        rng = np.random.default_rng(6)
        r = np.array([2e-3, 1e-3, 13e-3])
        for _ in range(30):
            rot = Rotation.random(random_state=rng).as_matrix()
            b = ph.dipole_field(ph.DipoleScene(q=REF_Q, r0=REF_R0, r=r))
            b_rot = ph.dipole_field(
                ph.DipoleScene(q=rot @ REF_Q, r0=rot @ REF_R0, r=rot @ r)
            )
            assert np.linalg.norm(b_rot - rot @ b) / np.linalg.norm(b) < 1e-12

    def test_linearity_in_q(self):
        q1 = np.array([10e-9, 0, 5e-9])
        q2 = np.array([0, -7e-9, 3e-9])
        r = np.array([1e-3, 2e-3, 14e-3])
        b = lambda q: ph.dipole_field(ph.DipoleScene(q=q, r0=REF_R0, r=r))
        assert np.allclose(b(2.0 * q1 + 0.5 * q2), 2.0 * b(q1) + 0.5 * b(q2), rtol=1e-12)

    def test_divergence_free(self):
        worst = 0.0
        for r, _ in random_scenes(30, seed=8):
            h = 1e-7 * np.linalg.norm(r)
            div = 0.0
            for k in range(3):
                e = np.zeros(3)
                e[k] = h
                bp = ph.dipole_field(ph.DipoleScene(q=REF_Q, r0=REF_R0, r=r + e))[k]
                bm = ph.dipole_field(ph.DipoleScene(q=REF_Q, r0=REF_R0, r=r - e))[k]
                div += (bp - bm) / (2 * h)
            bnorm = np.linalg.norm(ph.dipole_field(ph.DipoleScene(q=REF_Q, r0=REF_R0, r=r)))
            worst = max(worst, abs(div) * np.linalg.norm(r) / bnorm)
        assert worst < 1e-6

    def test_scene_invariants(self):
        with pytest.raises(ValueError):
            ph.DipoleScene(q=REF_Q, r0=REF_R0, r=np.array([0.0, 0.0, 5e-3]))


class TestAveragedField:
    def test_uniform_field_limit(self):
        # dipole far away relative to the aperture: average equals center value
        r0 = np.array([0.0, 0.0, 0.05])
        aperture = ph.SensorAperture(center=np.array([0.0, 0.0, 2.0]), sides=(0.9e-3, 0.9e-3))
        avg = ph.averaged_field(REF_Q, r0, aperture)
        center = ph.dipole_field(ph.DipoleScene(q=REF_Q, r0=r0, r=aperture.center))[2]
        assert avg == pytest.approx(center, rel=1e-4)

    def test_quadrature_self_convergence(self):
        aperture = ph.SensorAperture(center=np.array([0.5e-3, 0.2e-3, 12e-3]))
        a8, _ = ph._aperture_average(REF_Q, REF_R0, aperture, 8)
        a16, _ = ph._aperture_average(REF_Q, REF_R0, aperture, 16)
        assert abs(a16 - a8) / abs(a16) < 1e-3

    def test_point_limit_as_aperture_shrinks(self):
        center = np.array([0.5e-3, 0.2e-3, 12e-3])
        tiny = ph.SensorAperture(center=center, sides=(1e-7, 1e-7))
        point = ph.dipole_field(ph.DipoleScene(q=REF_Q, r0=REF_R0, r=center))[2]
        assert ph.averaged_field(REF_Q, REF_R0, tiny) == pytest.approx(point, rel=1e-8)

    def test_rejects_low_quadrature(self):
        aperture = ph.SensorAperture(center=np.array([0, 0, 12e-3]))
        with pytest.raises(ValueError):
            ph.averaged_field(REF_Q, REF_R0, aperture, quadrature_n=1)


class TestPhantomMap:
    @pytest.fixture(scope="class")
    @classmethod
    def reference_map(cls):
        aperture = ph.SensorAperture(center=np.array([0.0, 0.0, 12e-3]))
        coords = np.linspace(-1e-3, 1e-3, 11)
        return coords, ph.phantom_map(REF_Q, REF_R0, aperture, coords, coords)

    def test_antisymmetric_in_x(self, reference_map):
        coords, fmap = reference_map
        assert np.allclose(fmap, -fmap[:, ::-1], rtol=1e-9, atol=1e-20)

    def test_amplitude_bound(self, reference_map):
        _, fmap = reference_map
        peak = np.max(np.abs(fmap))
        assert peak <= 150e-12 * 1.2
        assert peak >= 150e-12 * 0.8

    def test_zero_dipole(self):
        aperture = ph.SensorAperture(center=np.array([0.0, 0.0, 12e-3]))
        coords = np.linspace(-1e-3, 1e-3, 3)
        fmap = ph.phantom_map(np.zeros(3), REF_R0, aperture, coords, coords)
        assert np.all(fmap == 0.0)

    def test_csv_export(self, tmp_path, reference_map):
        coords, fmap = reference_map
        path = tmp_path / "map.csv"
        ph.map_to_csv(path, coords, coords, fmap)
        lines = path.read_text().splitlines()
        assert lines[0].startswith("y_mm\\x_mm,-1,")
        assert len(lines) == 1 + len(coords)


class TestPhantomTimeseries:
    def test_moment_arithmetic(self):
        drive = ph.PhantomDrive(current=50e-6, dipole_length=0.7e-3)
        assert drive.moment == pytest.approx(35e-9, rel=1e-12)

    def test_amplitude_linear_in_current(self):
        aperture = ph.SensorAperture(center=np.array([0.5e-3, 0.0, 12e-3]))
        kwargs = dict(q_direction=[0, 1, 0], r0=REF_R0, aperture=aperture,
                      duration=0.5, sample_rate=1000.0)
        full = ph.phantom_timeseries(ph.PhantomDrive(current=50e-6), **kwargs)
        half = ph.phantom_timeseries(ph.PhantomDrive(current=25e-6), **kwargs)
        assert np.allclose(half.samples, full.samples / 2, rtol=1e-12, atol=1e-25)

    def test_nyquist(self):
        aperture = ph.SensorAperture(center=np.array([0.5e-3, 0.0, 12e-3]))
        with pytest.raises(ValueError):
            ph.phantom_timeseries(ph.PhantomDrive(frequency=77.0), [0, 1, 0],
                                  REF_R0, aperture, duration=1.0, sample_rate=100.0)


class TestGeometricAttenuation:
    def test_distant_standoff_comparison(self):
        out = ph.geometric_attenuation(2.5e-3, 7.1e-3, 77.7e-12)
        assert out == pytest.approx(9.63e-12, abs=0.01e-12)

    def test_identity_and_inverse_square(self):
        assert ph.geometric_attenuation(3e-3, 3e-3, 1.0) == 1.0
        assert ph.geometric_attenuation(3e-3, 6e-3, 1.0) == pytest.approx(0.25)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            ph.geometric_attenuation(0.0, 1e-3, 1.0)
