import numpy as np
import pytest

from pik.chainmodel import (
    DesiredTrajectory,
    KinematicModel,
    RegionTheta,
    TaskDef,
    TaskTrajectory,
    sample_region,
)
from pik.errors import ConfigError


def two_link():
    return KinematicModel([1.0, 1.0], [TaskDef("link_point", link=2)])


def fd_jacobian(model, t, q, h=1e-6):
    # central-difference oracle for F_q
    n = q.size
    cols = []
    for k in range(n):
        e = np.zeros(n)
        e[k] = h
        cols.append((model.forward(t, q + e) - model.forward(t, q - e)) / (2 * h))
    return np.stack(cols, axis=1)


def fd_jacobian_derivative(model, t, q, h=1e-5):
    n = q.size
    slices = []
    for k in range(n):
        e = np.zeros(n)
        e[k] = h
        slices.append((model.jacobian(t, q + e) - model.jacobian(t, q - e)) / (2 * h))
    return np.stack(slices, axis=2)


class TestForward:
    def test_straight_chain(self):
        f = two_link().forward(0.0, np.zeros(2))
        np.testing.assert_allclose(f, [2.0, 0.0])

    def test_bent_chain_by_hand(self):
        # q = (pi/2, 0): both links point straight up
        model = two_link()
        q = np.array([np.pi / 2, 0.0])
        np.testing.assert_allclose(model.forward(0.0, q), [0.0, 2.0], atol=1e-15)
        F = model.jacobian(0.0, q)
        np.testing.assert_allclose(F, [[-2.0, -1.0], [0.0, 0.0]], atol=1e-15)

    def test_posture_task(self):
        model = KinematicModel([1.0, 1.0, 1.0], [TaskDef("posture", joints=(1, 3))])
        q = np.array([0.3, 0.5, -0.2])
        np.testing.assert_allclose(model.forward(0.0, q), [0.3, -0.2])
        F = model.jacobian(0.0, q)
        np.testing.assert_allclose(F, [[1, 0, 0], [0, 0, 1]])
        assert np.abs(model.jacobian_derivative(0.0, q)).max() == 0.0

    def test_m_le_n_enforced(self):
        with pytest.raises(ConfigError):
            KinematicModel([1.0], [TaskDef("link_point", link=1)])

    def test_linear_bound_holds_on_samples(self):
        model = KinematicModel(
            [1.0, 0.5, 0.25],
            [TaskDef("link_point", link=3), TaskDef("posture", joints=(1,))],
        )
        gamma, c = model.linear_bound()
        rng = np.random.default_rng(0)
        for _ in range(200):
            q = rng.uniform(-np.pi, np.pi, 3)
            assert np.linalg.norm(model.forward(0.0, q)) <= gamma * np.linalg.norm(q) + c + 1e-12


class TestJacobians:
    def test_jacobian_matches_finite_differences(self):
        model = KinematicModel(
            [1.0, 0.7, 0.4],
            [TaskDef("link_point", link=3), TaskDef("posture", joints=(2,))],
        )
        rng = np.random.default_rng(1)
        for _ in range(100):
            q = rng.uniform(-np.pi, np.pi, 3)
            F = model.jacobian(0.0, q)
            Fd = fd_jacobian(model, 0.0, q)
            scale = max(1.0, np.abs(F).max())
            assert np.abs(F - Fd).max() / scale <= 1e-5

    def test_jacobian_derivative_matches_finite_differences(self):
        model = KinematicModel(
            [1.0, 0.7, 0.4], [TaskDef("link_point", link=3)]
        )
        rng = np.random.default_rng(2)
        for _ in range(50):
            q = rng.uniform(-np.pi, np.pi, 3)
            D = model.jacobian_derivative(0.0, q)
            Dd = fd_jacobian_derivative(model, 0.0, q)
            scale = max(1.0, np.abs(D).max())
            assert np.abs(D - Dd).max() / scale <= 1e-4

    def test_time_invariance(self):
        model = two_link()
        q = np.array([0.2, 0.4])
        assert np.all(model.f_t(0.0, q) == 0.0)
        np.testing.assert_array_equal(model.forward(0.0, q), model.forward(5.0, q))
        Fmap = model.velocity_map(0.0, q)
        assert np.all(Fmap[:, 0] == 0.0)
        np.testing.assert_array_equal(Fmap[:, 1:], model.jacobian(0.0, q))


class TestTrajectories:
    def test_set_point(self):
        tr = TaskTrajectory("set_point", target=[1.0, 2.0])
        np.testing.assert_array_equal(tr.value(3.0), [1.0, 2.0])
        assert np.all(tr.velocity(3.0) == 0.0)
        assert tr.psi(0.0) == 0.0
        assert tr.psi_integral() == 0.0

    def test_settling_envelope(self):
        tr = TaskTrajectory("settling", target=[1.0], start=[0.0], rate=2.0, t0=1.0)
        ts = np.linspace(1.0, 6.0, 50)
        for t in ts:
            assert np.linalg.norm(tr.velocity(t)) == pytest.approx(tr.psi(t), rel=1e-12)
        # envelope decreases monotonically
        psis = [tr.psi(t) for t in ts]
        assert all(a >= b for a, b in zip(psis, psis[1:]))

    def test_psi_integral_matches_quadrature(self):
        tr = TaskTrajectory("settling", target=[2.0, 0.0], start=[[-1.0, 1.0]][0], rate=1.5)
        from scipy.integrate import quad

        val, _ = quad(tr.psi, 0.0, 80.0)
        assert val == pytest.approx(tr.psi_integral(), abs=1e-6)
        assert tr.psi_integral() == pytest.approx(np.linalg.norm([3.0, -1.0]))

    def test_stack(self):
        traj = DesiredTrajectory(
            [
                TaskTrajectory("set_point", target=[1.0, 0.0]),
                TaskTrajectory("settling", target=[0.5], start=[0.0], rate=1.0),
            ]
        )
        assert traj.m == 3
        assert not traj.is_set_point
        assert traj.value(0.0).shape == (3,)
        np.testing.assert_allclose(traj.psi_integrals(), [0.0, 0.5])


class TestRegion:
    def region(self, n=2):
        return RegionTheta(
            lo=np.zeros(n),
            hi=np.ones(n),
            shell_width=0.1,
            theta=np.array([0.2]),
            theta_inner=np.array([0.1]),
        )

    def test_validation(self):
        with pytest.raises(ConfigError):
            RegionTheta(np.zeros(2), np.zeros(2), 0.1, np.array([0.2]), np.array([0.1]))
        with pytest.raises(ConfigError):
            RegionTheta(np.zeros(2), np.ones(2), 0.1, np.array([0.2]), np.array([0.2]))

    def test_grid_counts(self):
        samples2 = sample_region(self.region(), 2, n_lowdisc=16, n_shell=16)
        corners = {(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)}
        got = {tuple(row) for row in samples2.interior[:4]}
        assert corners == got
        samples3 = sample_region(self.region(), 3, n_lowdisc=16, n_shell=16)
        assert samples3.interior.shape[0] == 9 + 16

    def test_shell_distances(self):
        region = self.region(3)
        samples = sample_region(region, 2, n_lowdisc=16, n_shell=64)
        for q in samples.shell:
            d = region.sup_distance(q)
            assert 0.0 < d <= region.shell_width + 1e-15
        for q in samples.interior:
            assert region.contains(q, tol=1e-12)

    def test_determinism(self):
        a = sample_region(self.region(), 3, n_lowdisc=32, n_shell=32)
        b = sample_region(self.region(), 3, n_lowdisc=32, n_shell=32)
        np.testing.assert_array_equal(a.interior, b.interior)
        np.testing.assert_array_equal(a.shell, b.shell)
