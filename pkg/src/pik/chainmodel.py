"""Planar revolute chains, task stacks, desired trajectories, joint regions.

Everything here is analytic: forward kinematics are sums of sines/cosines,
so the Jacobian and its joint-derivative tensor have closed forms that the
finite-difference oracles in the tests can check to tight tolerances.

Units: radians, meters, seconds.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from .errors import ConfigError, NonFiniteError, ShapeError


@dataclass(frozen=True)
class TaskDef:
    """One prioritized task on a chain.

    kind "link_point": planar position of the tip of link ``link``
    (1-based), output dimension 2.  kind "posture": the joint angles of the
    1-based ``joints`` subset, output dimension len(joints).
    """

    kind: str
    link: int | None = None
    joints: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind == "link_point":
            if self.link is None or self.link < 1:
                raise ConfigError("link_point task needs a 1-based link index")
        elif self.kind == "posture":
            if not self.joints or any(j < 1 for j in self.joints):
                raise ConfigError("posture task needs 1-based joint indices")
        else:
            raise ConfigError(f"unknown task kind {self.kind!r}")

    @property
    def dim(self):
        return 2 if self.kind == "link_point" else len(self.joints)


class KinematicModel:
    """A planar chain with a prioritized task stack.

    Evaluators: ``forward`` (f), ``f_t`` (partial of f in t, identically
    zero for these chains), ``jacobian`` (F_q), ``jacobian_derivative``
    (the m x n x n tensor whose slice k is the partial of F_q in q_k), and
    ``velocity_map`` (the m x (n+1) matrix [f_t F_q]).
    """

    def __init__(self, link_lengths, tasks):
        self.link_lengths = np.asarray(link_lengths, dtype=float)
        if self.link_lengths.ndim != 1 or self.link_lengths.size == 0:
            raise ConfigError("link_lengths must be a nonempty 1-d sequence")
        if np.any(self.link_lengths <= 0):
            raise ConfigError("link lengths must be positive")
        self.tasks = tuple(tasks)
        if not self.tasks:
            raise ConfigError("at least one task is required")
        self.n = self.link_lengths.size
        self.task_dims = tuple(t.dim for t in self.tasks)
        self.m = sum(self.task_dims)
        self.l = len(self.tasks)
        if self.m > self.n:
            raise ConfigError(
                f"stacked task dimension m={self.m} exceeds joint count n={self.n}"
            )
        for t in self.tasks:
            if t.kind == "link_point" and t.link > self.n:
                raise ConfigError(f"task link {t.link} exceeds chain length {self.n}")
            if t.kind == "posture" and max(t.joints) > self.n:
                raise ConfigError("posture joint index exceeds chain length")
        offs = np.concatenate([[0], np.cumsum(self.task_dims)])
        self.task_slices = tuple(
            slice(int(offs[a]), int(offs[a + 1])) for a in range(self.l)
        )

    def _check_q(self, q):
        q = np.asarray(q, dtype=float)
        if q.shape != (self.n,):
            raise ShapeError(f"q must have shape ({self.n},)")
        if not np.all(np.isfinite(q)):
            raise NonFiniteError("q contains NaN or Inf")
        return q

    def forward(self, t, q):
        q = self._check_q(q)
        cum = np.cumsum(q)
        lc = self.link_lengths * np.cos(cum)
        ls = self.link_lengths * np.sin(cum)
        out = np.empty(self.m)
        for task, sl in zip(self.tasks, self.task_slices):
            if task.kind == "link_point":
                j = task.link
                out[sl] = (lc[:j].sum(), ls[:j].sum())
            else:
                out[sl] = q[[j - 1 for j in task.joints]]
        return out

    def f_t(self, t, q):
        return np.zeros(self.m)

    def jacobian(self, t, q):
        q = self._check_q(q)
        cum = np.cumsum(q)
        lc = self.link_lengths * np.cos(cum)
        ls = self.link_lengths * np.sin(cum)
        F = np.zeros((self.m, self.n))
        for task, sl in zip(self.tasks, self.task_slices):
            if task.kind == "link_point":
                j = task.link
                # dx/dq_k = -sum_{i=k..j-1} l_i sin(c_i), dy/dq_k the cosine sum
                sx = np.zeros(self.n)
                sy = np.zeros(self.n)
                sx[:j] = np.cumsum(ls[:j][::-1])[::-1]
                sy[:j] = np.cumsum(lc[:j][::-1])[::-1]
                F[sl.start] = -sx
                F[sl.start + 1] = sy
            else:
                for r, jj in enumerate(task.joints):
                    F[sl.start + r, jj - 1] = 1.0
        return F

    def jacobian_derivative(self, t, q):
        q = self._check_q(q)
        cum = np.cumsum(q)
        lc = self.link_lengths * np.cos(cum)
        ls = self.link_lengths * np.sin(cum)
        idx = np.arange(self.n)
        maxkr = np.maximum.outer(idx, idx)
        D = np.zeros((self.m, self.n, self.n))
        for task, sl in zip(self.tasks, self.task_slices):
            if task.kind != "link_point":
                continue
            j = task.link
            sx = np.zeros(self.n + 1)
            sy = np.zeros(self.n + 1)
            sx[:j] = np.cumsum(ls[:j][::-1])[::-1]
            sy[:j] = np.cumsum(lc[:j][::-1])[::-1]
            # d2x/dq_k dq_r = -sum_{i=max(k,r)..j-1} l_i cos(c_i)
            D[sl.start] = -sy[maxkr]
            D[sl.start + 1] = -sx[maxkr]
        return D

    def velocity_map(self, t, q):
        F = np.zeros((self.m, self.n + 1))
        F[:, 0] = self.f_t(t, q)
        F[:, 1:] = self.jacobian(t, q)
        return F

    def linear_bound(self):
        """(gamma, c) with ||f(t,q)|| <= gamma ||q|| + c for all q.

        Position tasks are bounded by their reachable radius (gamma 0),
        posture tasks copy joint values (gamma 1 per task).
        """
        csq = 0.0
        n_posture = 0
        for task in self.tasks:
            if task.kind == "link_point":
                csq += float(self.link_lengths[: task.link].sum()) ** 2
            else:
                n_posture += 1
        return float(np.sqrt(n_posture)), float(np.sqrt(csq))


@dataclass(frozen=True)
class TaskTrajectory:
    """Desired trajectory for one task: a set-point or an exponential
    settling motion p(t) = target + (start - target) exp(-rate (t - t0))."""

    kind: str
    target: np.ndarray
    start: np.ndarray | None = None
    rate: float | None = None
    t0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "target", np.asarray(self.target, dtype=float))
        if self.kind == "set_point":
            if self.start is not None or self.rate is not None:
                raise ConfigError("set_point takes only a target")
        elif self.kind == "settling":
            if self.start is None or self.rate is None or self.rate <= 0:
                raise ConfigError("settling needs start, target and a positive rate")
            object.__setattr__(self, "start", np.asarray(self.start, dtype=float))
            if self.start.shape != self.target.shape:
                raise ConfigError("settling start/target dimensions differ")
        else:
            raise ConfigError(f"unknown trajectory kind {self.kind!r}")

    @property
    def dim(self):
        return self.target.size

    def value(self, t):
        if self.kind == "set_point":
            return self.target
        return self.target + (self.start - self.target) * np.exp(
            -self.rate * (t - self.t0)
        )

    def velocity(self, t):
        if self.kind == "set_point":
            return np.zeros(self.dim)
        return -self.rate * (self.start - self.target) * np.exp(
            -self.rate * (t - self.t0)
        )

    def psi(self, t):
        """Monotone integrable envelope of ||dp/dt||."""
        if self.kind == "set_point":
            return 0.0
        amp = self.rate * np.linalg.norm(self.start - self.target)
        return float(amp * np.exp(-self.rate * (t - self.t0)))

    def psi_integral(self):
        """Integral of psi over [t0, infinity)."""
        if self.kind == "set_point":
            return 0.0
        return float(np.linalg.norm(self.start - self.target))


class DesiredTrajectory:
    """Per-task desired trajectories, stacked in priority order."""

    def __init__(self, tasks):
        self.tasks = tuple(tasks)
        self.dims = tuple(t.dim for t in self.tasks)
        offs = np.concatenate([[0], np.cumsum(self.dims)])
        self.slices = tuple(
            slice(int(offs[a]), int(offs[a + 1])) for a in range(len(self.tasks))
        )
        self.m = int(offs[-1])

    @property
    def is_set_point(self):
        return all(t.kind == "set_point" for t in self.tasks)

    def value(self, t):
        return np.concatenate([tt.value(t) for tt in self.tasks])

    def velocity(self, t):
        if self.is_set_point:
            return np.zeros(self.m)
        return np.concatenate([tt.velocity(t) for tt in self.tasks])

    def psi(self, t):
        return np.array([tt.psi(t) for tt in self.tasks])

    def psi_integrals(self):
        return np.array([tt.psi_integral() for tt in self.tasks])

    def max_rates(self, t0):
        """Per-task sup of ||dp_a/dt|| on [t0, inf) (envelopes decrease)."""
        return self.psi(t0)


@dataclass(frozen=True)
class RegionTheta:
    """Axis-aligned joint-space box with a shell and per-task error tubes.

    ``theta_inner`` (the radii trajectories are certified to stay inside in
    continuous time) must be strictly below ``theta`` (the discrete-time
    radii).
    """

    lo: np.ndarray
    hi: np.ndarray
    shell_width: float
    theta: np.ndarray
    theta_inner: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lo", np.asarray(self.lo, dtype=float))
        object.__setattr__(self, "hi", np.asarray(self.hi, dtype=float))
        object.__setattr__(self, "theta", np.asarray(self.theta, dtype=float))
        object.__setattr__(self, "theta_inner", np.asarray(self.theta_inner, dtype=float))
        if self.lo.shape != self.hi.shape or self.lo.ndim != 1:
            raise ConfigError("region lo/hi must be 1-d and of equal length")
        if np.any(self.hi <= self.lo):
            raise ConfigError("region box is empty")
        if self.shell_width <= 0:
            raise ConfigError("shell width must be positive")
        if self.theta.shape != self.theta_inner.shape:
            raise ConfigError("theta and theta_inner lengths differ")
        if np.any(self.theta_inner <= 0) or np.any(self.theta_inner >= self.theta):
            raise ConfigError("need 0 < theta_inner < theta per task")

    @property
    def n(self):
        return self.lo.size

    @property
    def center(self):
        return 0.5 * (self.lo + self.hi)

    def contains(self, q, tol=0.0):
        return bool(np.all(q >= self.lo - tol) and np.all(q <= self.hi + tol))

    def sup_distance(self, q):
        """Sup-norm distance from q to the box (0 inside)."""
        d = np.maximum(self.lo - q, q - self.hi)
        return float(max(0.0, d.max()))


@dataclass(frozen=True)
class RegionSamples:
    interior: np.ndarray
    shell: np.ndarray
    grid_density: int = field(default=0)


def _sobol(d, count):
    eng = qmc.Sobol(d=d, scramble=False)
    return eng.random_base2(int(np.log2(count)))


def sample_region(region, grid_density, n_lowdisc=256, n_shell=256):
    """Deterministic grid plus low-discrepancy interior and shell samples.

    Shell samples sit at sup-norm distance in (0, shell_width] outside the
    box (faces and edges).
    """
    if grid_density < 2:
        raise ConfigError("grid density must be at least 2 per axis")
    n = region.n
    axes = [np.linspace(region.lo[k], region.hi[k], grid_density) for k in range(n)]
    mesh = np.meshgrid(*axes, indexing="ij")
    grid = np.stack([g.ravel() for g in mesh], axis=1)
    span = region.hi - region.lo
    low = region.lo + span * _sobol(n, n_lowdisc)
    interior = np.vstack([grid, low])

    u = _sobol(n + 4, n_shell)
    base = region.lo + span * u[:, :n]
    axis = np.minimum((u[:, n] * n).astype(int), n - 1)
    side = u[:, n + 1] >= 0.5
    dist = region.shell_width * (1e-3 + (1 - 1e-3) * u[:, n + 2])
    shell = base.copy()
    rows = np.arange(n_shell)
    shell[rows, axis] = np.where(side, region.hi[axis] + dist, region.lo[axis] - dist)
    if n >= 2:
        # push a second axis for a third of the samples to cover edges,
        # never beyond the first push so the sup-distance stays = dist
        second = u[:, n + 3] < 1 / 3
        axis2 = (axis + 1 + np.minimum((u[:, n + 3] * 3 * (n - 1)).astype(int), n - 2)) % n
        d2 = dist * np.clip(3 * u[:, n + 3], 0.0, 1.0)
        sel = rows[second]
        shell[sel, axis2[sel]] = np.where(
            side[sel], region.hi[axis2[sel]] + d2[sel], region.lo[axis2[sel]] - d2[sel]
        )
    return RegionSamples(interior=interior, shell=shell, grid_density=grid_density)
