"""Classical driven Harper dynamics.

Integrates H_cl(t) = -J'_x cos(p - omega_x t) - J'_y cos(x + omega_y t)
with a second-order Strang splitting whose two sub-flows (x-shift from the
p-dependent part, p-kick from the x-dependent part) are each exact shears,
with the explicit time dependence frozen at sub-step midpoints.  Both maps
have unit Jacobian, so the composition is symplectic and exactly
time-reversible.

The transformed Hamiltonian H' = -J'_x cos(p') - J'_y cos(x') + omega_x x'
+ omega_y p' (p' = p - omega_x t, x' = x + omega_y t) is an exact integral
of the motion and serves as the built-in accuracy monitor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .model import DerivedParams

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# types

@dataclass(frozen=True)
class PhasePoint:
    x: float
    p: float


@dataclass
class Trajectory:
    """Sampled phase-space path; x, p are parallel to times."""

    times: np.ndarray
    x: np.ndarray
    p: np.ndarray
    wrapped: bool = False

    def __post_init__(self):
        if not (len(self.times) == len(self.x) == len(self.p)):
            raise ValueError("times, x, p must have equal length")
        if len(self.times) > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")


@dataclass
class Ensemble:
    """Initial conditions for many trajectories plus the seed that made them."""

    x: np.ndarray
    p: np.ndarray
    seed: int | None = None

    @classmethod
    def uniform_cell(cls, n: int, seed: int) -> "Ensemble":
        """n points uniform over the elementary cell -pi <= p, x < pi (Philox)."""
        rng = np.random.Generator(np.random.Philox(seed))
        x = rng.uniform(-np.pi, np.pi, n)
        p = rng.uniform(-np.pi, np.pi, n)
        return cls(x=x, p=p, seed=seed)

    def __len__(self) -> int:
        return len(self.x)


@dataclass
class IslandScan:
    """Transporting/non-transporting classification of the elementary cell."""

    grid_nx: int
    grid_np: int
    x_centers: np.ndarray
    p_centers: np.ndarray
    labels: np.ndarray        # bool, shape (grid_np, grid_nx)
    v_mean: np.ndarray        # measured mean velocity per cell
    S: float                  # transporting fraction in [0, 1]


@dataclass
class SpreadingFit:
    """Ballistic rate from the linear law sigma(t) = A t."""

    A: float
    window: tuple[float, float]
    residual: float           # RMS relative fit residual over the window
    ballistic: bool           # False when residual > 0.1


# ---------------------------------------------------------------------------
# Hamiltonian, equations of motion, invariant

def classical_hamiltonian(x, p, t, d: DerivedParams):
    """H_cl(x, p, t) of the driven model."""
    return -d.jp_x * np.cos(p - d.omega_x * t) - d.jp_y * np.cos(x + d.omega_y * t)


def eom_rhs(pt, t, d: DerivedParams):
    """Hamilton's equations: (dx/dt, dp/dt) at phase point pt and time t."""
    x, p = (pt.x, pt.p) if isinstance(pt, PhasePoint) else pt
    dxdt = d.jp_x * np.sin(p - d.omega_x * t)
    dpdt = -d.jp_y * np.sin(x + d.omega_y * t)
    return dxdt, dpdt


def conserved_quantity(pt, t, d: DerivedParams):
    """Exact invariant H' evaluated at a plane (unwrapped) phase point."""
    x, p = (pt.x, pt.p) if isinstance(pt, PhasePoint) else pt
    pp = p - d.omega_x * t
    xp = x + d.omega_y * t
    return (-d.jp_x * np.cos(pp) - d.jp_y * np.cos(xp)
            + d.omega_x * xp + d.omega_y * pp)


# ---------------------------------------------------------------------------
# Strang-splitting kernels (serial, deterministic)

@njit(cache=True)
def _strang_advance(x, p, t0, n_steps, dt, jpx, jpy, omx, omy):
    """Advance all members n_steps from t0 in place."""
    m = x.size
    half = 0.5 * dt * jpx
    for k in range(n_steps):
        t = t0 + k * dt
        a1 = omx * (t + 0.25 * dt)
        a2 = omy * (t + 0.5 * dt)
        a3 = omx * (t + 0.75 * dt)
        for i in range(m):
            x[i] += half * math.sin(p[i] - a1)
        kick = dt * jpy
        for i in range(m):
            p[i] -= kick * math.sin(x[i] + a2)
        for i in range(m):
            x[i] += half * math.sin(p[i] - a3)


@njit(cache=True)
def _strang_advance_record(x, p, t0, n_segments, steps_per, dt,
                           jpx, jpy, omx, omy, xout, pout):
    """Advance and write the state after each segment into row k+1."""
    m = x.size
    for i in range(m):
        xout[0, i] = x[i]
        pout[0, i] = p[i]
    for seg in range(n_segments):
        tseg = t0 + seg * steps_per * dt
        _strang_advance(x, p, tseg, steps_per, dt, jpx, jpy, omx, omy)
        for i in range(m):
            xout[seg + 1, i] = x[i]
            pout[seg + 1, i] = p[i]


def _check_dt(dt: float, d: DerivedParams):
    if not (dt > 0):
        raise ValueError("dt must be > 0")
    if dt > d.t_y / 50 * (1 + 1e-12):
        raise ValueError(f"dt={dt} too coarse: need dt <= T_y/50 = {d.t_y / 50}")


def _check_finite(x, p, t):
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(p))):
        raise FloatingPointError(
            f"non-finite phase-space state at t={t}; parameters are likely corrupt")


# ---------------------------------------------------------------------------
# public operations

def integrate(pt, t_end: float, dt: float, d: DerivedParams,
              t0: float = 0.0, record_stride: int = 1) -> Trajectory:
    """Integrate one phase point on the plane, sampling every record_stride steps.

    The step count is rounded so the last sample lands on t_end exactly.
    """
    _check_dt(dt, d)
    x0, p0 = (pt.x, pt.p) if isinstance(pt, PhasePoint) else pt
    n_steps = max(1, int(round((t_end - t0) / dt)))
    dt = (t_end - t0) / n_steps
    n_segments = n_steps // record_stride
    if n_segments * record_stride != n_steps:
        raise ValueError("record_stride must divide the number of steps")
    x = np.array([float(x0)])
    p = np.array([float(p0)])
    xout = np.empty((n_segments + 1, 1))
    pout = np.empty((n_segments + 1, 1))
    _strang_advance_record(x, p, t0, n_segments, record_stride, dt,
                           d.jp_x, d.jp_y, d.omega_x, d.omega_y, xout, pout)
    times = t0 + np.arange(n_segments + 1) * (record_stride * dt)
    _check_finite(xout, pout, times[-1])
    return Trajectory(times=times, x=xout[:, 0], p=pout[:, 0], wrapped=False)


def wrap_torus(a):
    """Reduce coordinates to the elementary cell [-pi, pi)."""
    return (np.asarray(a) + np.pi) % TWO_PI - np.pi


def stroboscopic_map(pt, n_periods: int, d: DerivedParams,
                     dt: float | None = None) -> Trajectory:
    """Sample the flow at t = k*T_y, k = 0..n_periods, reduced to the torus."""
    if n_periods < 0:
        raise ValueError("n_periods must be >= 0")
    if dt is None:
        dt = d.t_y / 200
    _check_dt(dt, d)
    steps_per = max(50, int(round(d.t_y / dt)))
    dt = d.t_y / steps_per
    x0, p0 = (pt.x, pt.p) if isinstance(pt, PhasePoint) else pt
    x = np.array([float(x0)])
    p = np.array([float(p0)])
    xout = np.empty((n_periods + 1, 1))
    pout = np.empty((n_periods + 1, 1))
    _strang_advance_record(x, p, 0.0, n_periods, steps_per, dt,
                           d.jp_x, d.jp_y, d.omega_x, d.omega_y, xout, pout)
    times = np.arange(n_periods + 1) * d.t_y
    _check_finite(xout, pout, times[-1])
    return Trajectory(times=times, x=wrap_torus(xout[:, 0]),
                      p=wrap_torus(pout[:, 0]), wrapped=True)


def _fit_slope(t, y):
    """Least-squares slope of y(t)."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    tm = t.mean()
    ym = y.mean()
    return float(((t - tm) * (y - ym)).sum() / ((t - tm) ** 2).sum())


def mean_velocity(traj: Trajectory) -> float:
    """Mean transport velocity: slope of x(t) fitted over the second half.

    Regression on the latter half kills the O(1/T) initial-condition bias
    of the naive x(T)/T estimate.
    """
    if traj.wrapped:
        raise ValueError("mean_velocity needs a plane (unwrapped) trajectory")
    t = traj.times
    half = t[0] + 0.5 * (t[-1] - t[0])
    sel = t >= half
    return _fit_slope(t[sel], traj.x[sel])


def ensemble_dispersion(e: Ensemble, t_grid, d: DerivedParams,
                        dt: float) -> np.ndarray:
    """sigma(t) = std of unwrapped x over the ensemble at each grid time.

    t_grid must start at 0 and increase; steps are sized to hit each grid
    time exactly.
    """
    _check_dt(dt, d)
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid[0] != 0.0 or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must start at 0 and be strictly increasing")
    x = e.x.astype(float).copy()
    p = e.p.astype(float).copy()
    sigma = np.empty(len(t_grid))
    sigma[0] = x.std()
    for k in range(len(t_grid) - 1):
        gap = t_grid[k + 1] - t_grid[k]
        n = max(1, int(round(gap / dt)))
        _strang_advance(x, p, t_grid[k], n, gap / n,
                        d.jp_x, d.jp_y, d.omega_x, d.omega_y)
        sigma[k + 1] = x.std()
    _check_finite(x, p, t_grid[-1])
    return sigma


def spreading_rate(times, sigma) -> SpreadingFit:
    """Fit the asymptotic linear law sigma(t) = A t over the final half.

    A fit with RMS relative residual above 0.1 is flagged non-ballistic
    (returned, not rejected).
    """
    times = np.asarray(times, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    half = times[0] + 0.5 * (times[-1] - times[0])
    sel = times >= half
    t = times[sel]
    s = sigma[sel]
    A = _fit_slope(t, s)
    fit = s.mean() + A * (t - t.mean())
    scale = math.sqrt(float((s ** 2).mean()))
    residual = math.sqrt(float(((s - fit) ** 2).mean())) / scale if scale > 0 else 0.0
    return SpreadingFit(A=A, window=(float(t[0]), float(t[-1])),
                        residual=residual, ballistic=residual <= 0.1)


def island_scan(d: DerivedParams, grid_nx: int = 40, grid_np: int = 40,
                t_measure: float | None = None, dt: float | None = None,
                band: float = 0.1) -> IslandScan:
    """Transporting-island fraction S of the elementary cell.

    Each cell center is integrated for t_measure (default 200 T_y) and
    classified transporting iff its fitted mean velocity is within
    band*omega_y of the island velocity -omega_y.
    """
    if t_measure is None:
        t_measure = 200 * d.t_y
    if dt is None:
        dt = d.t_y / 200
    _check_dt(dt, d)
    n_periods = max(100, int(round(t_measure / d.t_y)))
    steps_per = max(50, int(round(d.t_y / dt)))
    dt = d.t_y / steps_per

    xc = (np.arange(grid_nx) + 0.5) / grid_nx * TWO_PI - np.pi
    pc = (np.arange(grid_np) + 0.5) / grid_np * TWO_PI - np.pi
    xg, pg = np.meshgrid(xc, pc)
    x = xg.ravel().copy()
    p = pg.ravel().copy()
    xout = np.empty((n_periods + 1, x.size))
    pout = np.empty((n_periods + 1, x.size))
    _strang_advance_record(x, p, 0.0, n_periods, steps_per, dt,
                           d.jp_x, d.jp_y, d.omega_x, d.omega_y, xout, pout)
    _check_finite(x, p, n_periods * d.t_y)

    times = np.arange(n_periods + 1) * d.t_y
    sel = times >= 0.5 * times[-1]
    t = times[sel]
    tc = t - t.mean()
    denom = (tc ** 2).sum()
    xs = xout[sel, :]
    v = (tc[:, None] * (xs - xs.mean(axis=0))).sum(axis=0) / denom
    labels = np.abs(v + d.omega_y) < band * d.omega_y
    return IslandScan(grid_nx=grid_nx, grid_np=grid_np,
                      x_centers=xc, p_centers=pc,
                      labels=labels.reshape(grid_np, grid_nx),
                      v_mean=v.reshape(grid_np, grid_nx),
                      S=float(labels.mean()))


def torus_curve_thickness(x, p, n_neighbors: int = 12) -> float:
    """Median local thickness of a torus point set.

    For each point, fit a line through its nearest neighbors (torus metric)
    by local PCA and take the RMS transverse spread; curve-like sets give
    values far below the typical nearest-neighbor spacing, scattered 2D
    sets give values of its order.
    """
    x = np.asarray(x)
    p = np.asarray(p)
    n = len(x)
    if n < n_neighbors + 1:
        raise ValueError("need more points than neighbors")
    dx = np.abs(x[:, None] - x[None, :])
    dp = np.abs(p[:, None] - p[None, :])
    dx = np.minimum(dx, TWO_PI - dx)
    dp = np.minimum(dp, TWO_PI - dp)
    dist2 = dx ** 2 + dp ** 2
    thick = np.empty(n)
    for i in range(n):
        idx = np.argpartition(dist2[i], n_neighbors + 1)[: n_neighbors + 1]
        ux = x[idx] - x[i]
        up = p[idx] - p[i]
        ux = (ux + np.pi) % TWO_PI - np.pi
        up = (up + np.pi) % TWO_PI - np.pi
        pts = np.column_stack([ux, up])
        pts -= pts.mean(axis=0)
        w = np.linalg.eigvalsh(pts.T @ pts / len(pts))
        thick[i] = math.sqrt(max(w[0], 0.0))
    return float(np.median(thick))
