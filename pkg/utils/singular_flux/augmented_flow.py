# utils/singular_flux/augmented_flow.py
"""
Augmented lift of a continuity-equation pair

Pipeline: mollify (mu, nu) on a space-time grid, normalize the velocity to the
unit field (tau, v) = (mu, nu) / ||(mu, nu)||, integrate the augmented
characteristics y' = (tau, v)(y) with fixed-step RK4, then assemble the
augmented measures sigma, sigma0 = tau sigma and sigma_vec = v sigma.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import RegularGridInterpolator

from .curves import LipCurve
from .measures import (
    AtomicVectorMeasure,
    DEFAULT_NORM,
    MeasureLike,
    NormSpec,
    SymbolicMeasure,
    _as_norm,
    to_atoms,
)
from .weak_form import ResidualReport, TestBasis

logger = logging.getLogger(__name__)

KERNEL_CUTOFF = 6.0
BACKGROUND_DENSITY = 1e-12
TAU_FLOOR = 1e-6


# ==================== Kernels ====================

def time_kernel_cdf(u: np.ndarray) -> np.ndarray:
    """CDF of the quartic bump 30 u^2 (1 - u)^2 on [0, 1]"""
    u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
    return u ** 3 * (10.0 - 15.0 * u + 6.0 * u * u)


def _gaussian_weights(grid: np.ndarray, centers: np.ndarray, sigma: float) -> np.ndarray:
    """(n_centers, n_grid) truncated Gaussian weights, each row integrating to 1 on the grid"""
    h = grid[1] - grid[0]
    r = (grid[None, :] - centers[:, None]) / sigma
    w = np.where(np.abs(r) <= KERNEL_CUTOFF, np.exp(-0.5 * r * r), 0.0)
    total = w.sum(axis=1) * h
    ok = total > 0
    w[ok] /= total[ok, None]
    w[~ok] = 0.0
    return w


# ==================== Grid fields ====================

@dataclass(eq=False)
class GridField:
    """Samples on a tensor grid; values have shape (n_0, ..., n_k) or (n_0, ..., n_k, m)"""
    axes: List[np.ndarray]
    values: np.ndarray
    _interp: Optional[RegularGridInterpolator] = field(default=None, repr=False)

    def __post_init__(self):
        self.axes = [np.asarray(a, dtype=float) for a in self.axes]
        grid_shape = tuple(a.shape[0] for a in self.axes)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape[:len(grid_shape)] != grid_shape:
            raise ValueError(f"Values shape {self.values.shape} does not match grid {grid_shape}")

    @property
    def n_axes(self) -> int:
        return len(self.axes)

    @property
    def steps(self) -> np.ndarray:
        return np.array([a[1] - a[0] if a.shape[0] > 1 else 1.0 for a in self.axes])

    @property
    def lower(self) -> np.ndarray:
        return np.array([a[0] for a in self.axes])

    @property
    def upper(self) -> np.ndarray:
        return np.array([a[-1] for a in self.axes])

    @property
    def is_vector(self) -> bool:
        return self.values.ndim > self.n_axes

    def interpolator(self) -> RegularGridInterpolator:
        if self._interp is None:
            self._interp = RegularGridInterpolator(self.axes, self.values, method='linear',
                                                   bounds_error=False, fill_value=None)
        return self._interp

    def clamp(self, coords: np.ndarray) -> np.ndarray:
        return np.clip(coords, self.lower, self.upper)

    def __call__(self, coords: np.ndarray) -> np.ndarray:
        """Multilinear interpolation at (n, n_axes) points, clamped to the grid box"""
        coords = np.atleast_2d(np.asarray(coords, dtype=float))
        return self.interpolator()(self.clamp(coords))

    def contains(self, coords: np.ndarray, tol: float = 1e-12) -> np.ndarray:
        coords = np.atleast_2d(coords)
        return np.all((coords >= self.lower - tol) & (coords <= self.upper + tol), axis=1)

    def node_coords(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes, indexing='ij')
        return np.column_stack([m.ravel() for m in mesh])

    def trapezoid_weights(self) -> np.ndarray:
        """Tensor trapezoid weights per node, flattened"""
        per_axis = []
        for a in self.axes:
            w = np.gradient(a) if a.shape[0] > 1 else np.ones(1)
            if a.shape[0] > 1:
                w[0] = (a[1] - a[0]) / 2.0
                w[-1] = (a[-1] - a[-2]) / 2.0
            per_axis.append(w)
        mesh = np.meshgrid(*per_axis, indexing='ij')
        return np.prod([m.ravel() for m in mesh], axis=0)

    def flat_values(self) -> np.ndarray:
        n_nodes = int(np.prod([a.shape[0] for a in self.axes]))
        return self.values.reshape(n_nodes, -1)

    def to_atoms(self, norm: NormSpec = DEFAULT_NORM) -> AtomicVectorMeasure:
        """Space-time atoms at grid nodes with trapezoid weights (first axis is time)"""
        coords = self.node_coords()
        weights = self.flat_values() * self.trapezoid_weights()[:, None]
        return AtomicVectorMeasure(coords[:, 0], coords[:, 1:], weights, norm)

    def slice_mass(self) -> np.ndarray:
        """Spatial mass per node of the first axis (rectangle rule in space)"""
        spatial_cell = float(np.prod(self.steps[1:]))
        flat = self.values.reshape(self.values.shape[0], -1)
        return flat.sum(axis=1) * spatial_cell


def max_gradient(grid_field: GridField) -> float:
    """Largest spatial gradient norm of a scalar space-time field"""
    if grid_field.is_vector:
        raise ValueError("max_gradient expects a scalar field")
    spatial_axes = list(range(1, grid_field.n_axes))
    grads = np.gradient(grid_field.values, *[grid_field.axes[a] for a in spatial_axes], axis=spatial_axes)
    if len(spatial_axes) == 1:
        grads = [grads]
    return float(np.max(np.sqrt(sum(g * g for g in grads))))


# ==================== Mollification ====================

def _spatial_axes(lower: np.ndarray, upper: np.ndarray, step: float) -> List[np.ndarray]:
    axes = []
    for lo, hi in zip(lower, upper):
        n = int(np.ceil((hi - lo) / step)) + 1
        axes.append(lo + step * np.arange(n))
    return axes


def _spatial_kernel_matrix(points: np.ndarray, axes: List[np.ndarray], sigma: float) -> np.ndarray:
    """(n_points, n_spatial_nodes) tensor Gaussian weights"""
    mats = [_gaussian_weights(ax, points[:, k], sigma) for k, ax in enumerate(axes)]
    out = mats[0]
    for m in mats[1:]:
        out = (out[:, :, None] * m[:, None, :]).reshape(points.shape[0], -1)
    return out


def _has_support(m: MeasureLike) -> bool:
    if isinstance(m, SymbolicMeasure):
        return bool(m.components)
    return m.n_atoms > 0


def mollify(mu: MeasureLike, nu: MeasureLike, mu0: MeasureLike, eps: float, grid_step: float,
            horizon: float, box: Optional[Tuple[np.ndarray, np.ndarray]] = None
            ) -> Tuple[GridField, GridField, GridField]:
    """
    Space-time convolution of (mu, nu) on a regular grid

    The time kernel looks back over [t - eps, t]; for t < 0 mu is continued by
    L^1 x mu0 and nu by zero. The spatial kernel is a Gaussian of width eps cut
    at six widths and renormalized on the grid. A constant background density
    keeps mu_eps positive on every node.

    Returns:
        Tuple of (mu_eps, nu_eps, mu0_eps) grid fields; mu0_eps is spatial only
    """
    if eps <= 0:
        raise ValueError(f"Mollification width must be positive, got {eps}")
    if grid_step <= 0:
        raise ValueError(f"Grid step must be positive, got {grid_step}")
    if eps < grid_step:
        logger.warning(f"⚠️ Mollification width {eps} is below the grid step {grid_step}")

    t_axis = grid_step * np.arange(int(round(horizon / grid_step)) + 1)
    if box is None:
        boxes = [m.bbox() for m in (mu, nu, mu0) if _has_support(m)]
        lower = np.min([b[0][1:] for b in boxes], axis=0)
        upper = np.max([b[1][1:] for b in boxes], axis=0)
    else:
        lower, upper = np.asarray(box[0], dtype=float), np.asarray(box[1], dtype=float)
    pad = KERNEL_CUTOFF * eps + 2 * grid_step
    x_axes = _spatial_axes(lower - pad, upper + pad, grid_step)
    knots = [t_axis] + x_axes

    mu_a = to_atoms(mu, knots, 1)
    nu_a = to_atoms(nu, knots, 1)
    mu0_a = to_atoms(mu0, knots, 1)
    d = len(x_axes)
    n_cells = t_axis.shape[0] - 1

    # time weights c[n, j] of cell j at node n, averaged over the cell
    cdf = lambda u: time_kernel_cdf(u / eps)
    cell_lo, cell_hi = t_axis[:-1], t_axis[1:]
    c = (cdf(t_axis[:, None] - cell_lo[None, :]) - cdf(t_axis[:, None] - cell_hi[None, :])) / grid_step
    extension = 1.0 - cdf(t_axis)

    def binned(atoms: AtomicVectorMeasure) -> np.ndarray:
        if atoms.n_atoms == 0:
            return np.zeros((n_cells, int(np.prod([a.shape[0] for a in x_axes])), atoms.m))
        cells = np.clip(np.floor(atoms.times / grid_step).astype(int), 0, n_cells - 1)
        onehot = sparse.csr_matrix((np.ones(atoms.n_atoms), (cells, np.arange(atoms.n_atoms))),
                                   shape=(n_cells, atoms.n_atoms))
        kernel = _spatial_kernel_matrix(atoms.points, x_axes, eps)
        return np.stack([onehot @ (atoms.weights[:, k:k + 1] * kernel) for k in range(atoms.m)], axis=-1)

    grid_shape = tuple(a.shape[0] for a in x_axes)
    mu0_density = (mu0_a.weights[:, 0:1] * _spatial_kernel_matrix(mu0_a.points, x_axes, eps)).sum(axis=0)
    mu_cells = binned(mu_a)[..., 0]
    mu_vals = c @ mu_cells + extension[:, None] * mu0_density[None, :] + BACKGROUND_DENSITY
    nu_m = nu_a.m if nu_a.n_atoms else d
    nu_cells = binned(nu_a) if nu_a.n_atoms else np.zeros((n_cells, mu_vals.shape[1], d))
    nu_vals = np.stack([c @ nu_cells[..., k] for k in range(nu_m)], axis=-1)

    mu_eps = GridField([t_axis] + x_axes, mu_vals.reshape((t_axis.shape[0],) + grid_shape))
    nu_eps = GridField([t_axis] + x_axes, nu_vals.reshape((t_axis.shape[0],) + grid_shape + (nu_m,)))
    mu0_eps = GridField(x_axes, (mu0_density + BACKGROUND_DENSITY).reshape(grid_shape))
    logger.info(f"✅ Mollified on {t_axis.shape[0]} x {grid_shape} grid (eps={eps}, h={grid_step})")
    return mu_eps, nu_eps, mu0_eps


# ==================== Velocity fields ====================

class VelocityField:
    """Unit-norm field (tau, v) sampled on a grid, renormalized after interpolation"""

    def __init__(self, tau: GridField, v: GridField, norm: NormSpec = DEFAULT_NORM):
        self.tau = tau
        self.v = v
        self.norm = _as_norm(norm)

    @property
    def dim(self) -> int:
        return self.v.values.shape[-1]

    def __call__(self, t: np.ndarray, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        t = np.asarray(t, dtype=float).reshape(-1)
        coords = np.column_stack([t, np.asarray(X, dtype=float).reshape(t.shape[0], -1)])
        tau = self.tau(coords).reshape(-1)
        v = self.v(coords).reshape(t.shape[0], -1)
        scale = self.norm(np.column_stack([tau, v]))
        scale = np.where(scale > 0, scale, 1.0)
        return tau / scale, v / scale[:, None]

    def contains(self, coords: np.ndarray) -> np.ndarray:
        return self.tau.contains(coords)

    def node_defect(self) -> float:
        """Max deviation of ||(tau, v)|| from 1 over grid nodes"""
        stacked = np.concatenate([self.tau.values[..., None], self.v.values], axis=-1)
        return float(np.max(np.abs(self.norm(stacked) - 1.0)))


class ConstantField:
    """Spatially constant (tau, v), normalized on construction"""

    def __init__(self, tau: float, v: Sequence[float], norm: NormSpec = DEFAULT_NORM):
        self.norm = _as_norm(norm)
        vec = np.concatenate([[tau], np.asarray(v, dtype=float).reshape(-1)])
        vec = vec / self.norm(vec)
        self._tau, self._v = float(vec[0]), vec[1:]

    @property
    def dim(self) -> int:
        return self._v.shape[0]

    def __call__(self, t: np.ndarray, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        n = np.asarray(t).reshape(-1).shape[0]
        return np.full(n, self._tau), np.tile(self._v, (n, 1))

    def contains(self, coords: np.ndarray) -> np.ndarray:
        return np.ones(np.atleast_2d(coords).shape[0], dtype=bool)


def velocity(mu_eps: GridField, nu_eps: GridField, norm: NormSpec = DEFAULT_NORM) -> VelocityField:
    """(tau, v) = (1, w) / ||(1, w)|| with w = nu_eps / mu_eps, computed as (mu, nu) / ||(mu, nu)||"""
    if np.any(mu_eps.values <= 0):
        raise ValueError("velocity needs mu_eps > 0 on every grid node")
    norm = _as_norm(norm)
    stacked = np.concatenate([mu_eps.values[..., None], nu_eps.values], axis=-1)
    scale = norm(stacked)
    tau = GridField(mu_eps.axes, mu_eps.values / scale)
    v = GridField(nu_eps.axes, nu_eps.values / scale[..., None])
    return VelocityField(tau, v, norm)


# ==================== Characteristics ====================

@dataclass(eq=False)
class Trajectory:
    """Augmented characteristic (T_s, Y_s) on a uniform s-grid"""
    s: np.ndarray
    states: np.ndarray
    start: np.ndarray
    truncated: bool = False
    end_index: Optional[int] = None

    def __post_init__(self):
        if self.end_index is None:
            self.end_index = self.s.shape[0] - 1

    @property
    def times(self) -> np.ndarray:
        return self.states[:self.end_index + 1, 0]

    @property
    def positions(self) -> np.ndarray:
        return self.states[:self.end_index + 1, 1:]

    @property
    def final_time(self) -> float:
        return float(self.states[self.end_index, 0])

    def active(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.s[:self.end_index + 1], self.states[:self.end_index + 1]

    def to_curve(self, norm: NormSpec = DEFAULT_NORM) -> LipCurve:
        """LipCurve through the integrated nodes (speeds of RK4 combinations stay <= 1)"""
        s, states = self.active()
        return LipCurve(s, states, norm, anchored=abs(states[0, 0]) <= 1e-12)


def _inside(field_obj: Any, coords: np.ndarray) -> np.ndarray:
    contains = getattr(field_obj, 'contains', None)
    if contains is None:
        return np.ones(coords.shape[0], dtype=bool)
    return contains(coords)


def _rhs(field_obj: Callable, Y: np.ndarray) -> np.ndarray:
    tau, v = field_obj(Y[:, 0], Y[:, 1:])
    return np.column_stack([tau, v])


def flow(field_obj: Callable, starts: np.ndarray, ds: float, s_max: float) -> List[Trajectory]:
    """
    Fixed-step RK4 for y' = (tau, v)(y) from each start (t, x)

    A trajectory whose next state leaves the field's cover is frozen and
    flagged as truncated.
    """
    if ds <= 0:
        raise ValueError(f"ds must be positive, got {ds}")
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    n, width = starts.shape
    n_steps = int(round(s_max / ds))
    s = ds * np.arange(n_steps + 1)
    states = np.empty((n_steps + 1, n, width))
    Y = starts.copy()
    states[0] = Y
    active = np.ones(n, dtype=bool)
    end_index = np.full(n, n_steps)

    for k in range(n_steps):
        if active.any():
            idx = np.flatnonzero(active)
            y = Y[idx]
            k1 = _rhs(field_obj, y)
            k2 = _rhs(field_obj, y + 0.5 * ds * k1)
            k3 = _rhs(field_obj, y + 0.5 * ds * k2)
            k4 = _rhs(field_obj, y + ds * k3)
            new = y + (ds / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            ok = _inside(field_obj, new)
            Y[idx[ok]] = new[ok]
            exited = idx[~ok]
            active[exited] = False
            end_index[exited] = k
        states[k + 1] = Y

    n_truncated = int((~active).sum())
    if n_truncated:
        logger.debug(f"{n_truncated} of {n} trajectories left the grid cover")
    return [
        Trajectory(s, states[:, j, :].copy(), starts[j], bool(not active[j]), int(end_index[j]))
        for j in range(n)
    ]


def classical_flow(field_obj: Callable, x0: Sequence[float], t_grid: np.ndarray) -> np.ndarray:
    """RK4 for X' = w(t, X) = v / tau on the given time grid"""
    def w(t, X):
        tau, v = field_obj(np.full(X.shape[0], t), X)
        return v / tau[:, None]

    t_grid = np.asarray(t_grid, dtype=float)
    X = np.atleast_2d(np.asarray(x0, dtype=float))
    out = np.empty((t_grid.shape[0], X.shape[1]))
    out[0] = X[0]
    for k in range(t_grid.shape[0] - 1):
        t, h = t_grid[k], t_grid[k + 1] - t_grid[k]
        if h <= 0:
            out[k + 1] = X[0]
            continue
        k1 = w(t, X)
        k2 = w(t + h / 2, X + h / 2 * k1)
        k3 = w(t + h / 2, X + h / 2 * k2)
        k4 = w(t + h, X + h * k3)
        X = X + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[k + 1] = X[0]
    return out


def link_residual(traj: Trajectory, field_obj: Callable) -> float:
    """Max ||Y_s - X(T_s)|| with X the classical flow from the same start"""
    times = traj.times
    X = classical_flow(field_obj, traj.positions[0], times)
    return float(np.max(np.sqrt(np.sum((X - traj.positions) ** 2, axis=1))))


def reparam_roundtrip(traj: Trajectory, field_obj: Callable) -> float:
    """
    Max |S(T_s, x) - s| where S(t, x) integrates ||(1, w)|| dt along the trajectory

    On steps with tau >= TAU_FLOOR at both ends the integrand is taken at the
    step's secant slope w = dX / dt, so the increment is ||(dt, dX)||. Flat
    steps (tau below the floor) carry no time and add ds exactly.
    """
    s, states = traj.active()
    if s.shape[0] < 2:
        return 0.0
    norm = _as_norm(getattr(field_obj, 'norm', DEFAULT_NORM))
    tau, _ = field_obj(states[:, 0], states[:, 1:])
    steps = np.diff(states, axis=0)
    ds = np.diff(s)
    timed = np.minimum(tau[:-1], tau[1:]) >= TAU_FLOOR
    increments = np.where(timed, norm(steps), ds)
    S = np.concatenate([[0.0], np.cumsum(increments)])
    return float(np.max(np.abs(S - (s - s[0]))))


# ==================== Augmented measures ====================

def build_sigma(trajs: Sequence[Trajectory], weights: Sequence[float], field_obj: Optional[Callable] = None,
                dim: Optional[int] = None, norm: NormSpec = DEFAULT_NORM
                ) -> Tuple[AtomicVectorMeasure, AtomicVectorMeasure, AtomicVectorMeasure]:
    """
    Midpoint atoms of sigma, sigma0 = tau sigma, sigma_vec = v sigma over (s, t, x)

    Without a field the densities are the step slopes of the trajectories.
    """
    weights = np.asarray(weights, dtype=float).reshape(-1)
    if len(trajs) != weights.shape[0]:
        raise ValueError("One weight per trajectory is required")
    if len(trajs) and abs(weights.sum() - 1.0) > 1e-9:
        raise ValueError(f"Trajectory weights must sum to 1, got {weights.sum()}")
    if not len(trajs):
        d = dim if dim is not None else 1
        return (AtomicVectorMeasure.empty(1 + d, 1, norm), AtomicVectorMeasure.empty(1 + d, 1, norm),
                AtomicVectorMeasure.empty(1 + d, d, norm))

    s_parts, pt_parts, w_parts, tau_parts, v_parts = [], [], [], [], []
    for traj, p in zip(trajs, weights):
        s, states = traj.active()
        if s.shape[0] < 2:
            continue
        ds = np.diff(s)
        mid = 0.5 * (states[:-1] + states[1:])
        if field_obj is None:
            slopes = np.diff(states, axis=0) / ds[:, None]
            tau, v = slopes[:, 0], slopes[:, 1:]
        else:
            tau, v = field_obj(mid[:, 0], mid[:, 1:])
        s_parts.append(0.5 * (s[:-1] + s[1:]))
        pt_parts.append(mid)
        w_parts.append(p * ds)
        tau_parts.append(tau)
        v_parts.append(v)

    d = trajs[0].states.shape[1] - 1
    if not s_parts:
        return build_sigma([], [], dim=d, norm=norm)
    s_all = np.concatenate(s_parts)
    pts = np.vstack(pt_parts)
    w = np.concatenate(w_parts)
    tau = np.concatenate(tau_parts)
    v = np.vstack(v_parts)
    sigma = AtomicVectorMeasure(s_all, pts, w[:, None], norm)
    sigma0 = AtomicVectorMeasure(s_all, pts, (tau * w)[:, None], norm)
    sigma_vec = AtomicVectorMeasure(s_all, pts, v * w[:, None], norm)
    return sigma, sigma0, sigma_vec


def normalization_defect(sigma: AtomicVectorMeasure, sigma0: AtomicVectorMeasure,
                         sigma_vec: AtomicVectorMeasure) -> float:
    """Max deviation of the density ||(sigma0, sigma_vec)|| / sigma from 1"""
    if sigma.n_atoms == 0:
        return 0.0
    stacked = np.column_stack([sigma0.weights, sigma_vec.weights])
    ratio = sigma.norm(stacked) / sigma.weights[:, 0]
    return float(np.max(np.abs(ratio - 1.0)))


def _project(aug: AtomicVectorMeasure) -> AtomicVectorMeasure:
    """Drop the s coordinate: atoms (s, t, x) -> (t, x)"""
    return AtomicVectorMeasure(aug.points[:, 0], aug.points[:, 1:], aug.weights, aug.norm)


def marginal_check(sigma0: AtomicVectorMeasure, sigma_vec: AtomicVectorMeasure, mu_eps: GridField,
                   nu_eps: GridField, basis: TestBasis, tol: float = 5e-2,
                   tight_t: Optional[float] = None, tight_s: Optional[float] = None,
                   tight_tol: float = 1e-3) -> ResidualReport:
    """
    Compare pi # sigma0 and pi # sigma_vec with mu_eps and nu_eps on the basis

    Also checks sigma0((S, inf) x [0, T] x R^d) <= (T / S) |(mu, nu)|([0, T] x R^d).
    The per-function deviation is the worse of the two marginals.
    """
    norm = sigma0.norm
    proj0 = _project(sigma0)
    proj_vec = _project(sigma_vec)
    mu_atoms = mu_eps.to_atoms(norm)
    nu_atoms = nu_eps.to_atoms(norm)

    dev_mu = (basis.pair_scalar(proj0.coords, proj0.weights[:, 0])
              - basis.pair_scalar(mu_atoms.coords, mu_atoms.weights[:, 0]))
    dev_nu = np.zeros(basis.size)
    for k in range(proj_vec.m):
        dev_nu += np.abs(basis.pair_scalar(proj_vec.coords, proj_vec.weights[:, k])
                         - basis.pair_scalar(nu_atoms.coords, nu_atoms.weights[:, k]))
    per_fn = np.maximum(np.abs(dev_mu), dev_nu)

    T = tight_t if tight_t is not None else float(basis.upper[0])
    S = tight_s if tight_s is not None else 10.0 * T
    joint = np.concatenate([mu_atoms.weights, nu_atoms.weights], axis=1)
    in_window = (mu_atoms.times >= 0) & (mu_atoms.times <= T)
    joint_tv = float(np.sum(norm(joint[in_window])))
    tail = float(np.sum(sigma0.weights[(sigma0.times > S) & (sigma0.points[:, 0] <= T), 0]))
    bound = (T / S) * joint_tv
    tight_ok = tail <= bound + tight_tol

    report = ResidualReport(per_fn, 1.0 + basis.c1_norms(), tol, label='marginals', extras={
        'tightness': {'S': S, 'T': T, 'tail_mass': tail, 'bound': bound, 'pass': tight_ok},
    })
    if not tight_ok:
        logger.warning(f"⚠️ Tightness bound violated: {tail:.4e} > {bound:.4e}")
    return report


# ==================== Rescaling and sampling ====================

def time_change(y: LipCurve, theta: Callable[[np.ndarray], np.ndarray], c: float,
                n_samples: int = 2000) -> Tuple[np.ndarray, np.ndarray]:
    """s-grid and Theta(s) = int_0^s 1 / theta(y(r)) dr by cumulative trapezoid"""
    if c < 1:
        raise ValueError(f"Bound c must be >= 1, got {c}")
    s = np.union1d(y.breakpoints, np.linspace(0.0, y.s_end, n_samples))
    values = np.asarray(theta(y(s)), dtype=float).reshape(-1)
    if np.any(values < 1.0 / c - 1e-12) or np.any(values > c + 1e-12):
        raise ValueError(f"theta leaves [1/c, c] = [{1.0 / c}, {c}] along the curve "
                         f"(range {values.min():.6g}..{values.max():.6g})")
    Theta = cumulative_trapezoid(1.0 / values, s, initial=0.0)
    return s, Theta


def rescale_curve(y: LipCurve, theta: Callable[[np.ndarray], np.ndarray], c: float,
                  n_samples: int = 2000) -> LipCurve:
    """y composed with the inverse of Theta; speed is multiplied by theta along the curve"""
    s, Theta = time_change(y, theta, c, n_samples)
    return LipCurve(Theta, y(s), y.norm, c * y.lipschitz, y.anchored)


def sample_starts(mu0_eps: GridField, n: int, seed: int = 42) -> Tuple[np.ndarray, np.ndarray]:
    """
    Systematic inverse-CDF sample of n equally weighted starts from a spatial density

    One uniform offset is drawn from the seeded generator; on the line the CDF
    is inverted by linear interpolation, in higher dimension nodes are picked
    and jittered within their cell.
    """
    if n < 1:
        raise ValueError(f"Number of starts must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    u = (np.arange(n) + rng.uniform()) / n
    weights = np.full(n, 1.0 / n)
    if mu0_eps.n_axes == 1:
        grid = mu0_eps.axes[0]
        cdf = cumulative_trapezoid(mu0_eps.values, grid, initial=0.0)
        cdf = cdf / cdf[-1]
        keep = np.concatenate([[True], np.diff(cdf) > 0])
        return np.interp(u, cdf[keep], grid[keep])[:, None], weights
    nodes = mu0_eps.node_coords()
    mass = mu0_eps.values.ravel()
    cdf = np.cumsum(mass) / mass.sum()
    idx = np.minimum(np.searchsorted(cdf, u, side='right'), nodes.shape[0] - 1)
    jitter = (rng.uniform(size=(n, nodes.shape[1])) - 0.5) * mu0_eps.steps[None, :]
    return mu0_eps.clamp(nodes[idx] + jitter), weights


# ==================== Pipeline ====================

@dataclass(eq=False)
class LiftResult:
    """Everything the lift pipeline produces, plus its diagnostics"""
    mu_eps: GridField
    nu_eps: GridField
    mu0_eps: GridField
    field: VelocityField
    trajectories: List[Trajectory]
    weights: np.ndarray
    sigma: AtomicVectorMeasure
    sigma0: AtomicVectorMeasure
    sigma_vec: AtomicVectorMeasure
    diagnostics: Dict[str, Any] = field(default_factory=dict)


def lift(mu: MeasureLike, nu: MeasureLike, mu0: MeasureLike, horizon: float, eps: float = 0.05,
         grid_step: float = 0.01, ds: float = 1e-3, s_max: float = 4.0, n_starts: int = 400,
         seed: int = 42, norm: NormSpec = DEFAULT_NORM) -> LiftResult:
    """Mollify, normalize, integrate from sampled starts at t = 0 and assemble sigma"""
    mu_eps, nu_eps, mu0_eps = mollify(mu, nu, mu0, eps, grid_step, horizon)
    vel = velocity(mu_eps, nu_eps, norm)
    points, weights = sample_starts(mu0_eps, n_starts, seed)
    starts = np.column_stack([np.zeros(points.shape[0]), points])
    trajs = flow(vel, starts, ds, s_max)
    sigma, sigma0, sigma_vec = build_sigma(trajs, weights, vel, dim=points.shape[1], norm=norm)
    diagnostics = {
        'unit_norm_defect': vel.node_defect(),
        'slice_mass_error': float(np.max(np.abs(mu_eps.slice_mass() - 1.0))),
        'n_truncated': int(sum(t.truncated for t in trajs)),
        'min_final_time': float(min(t.final_time for t in trajs)),
    }
    logger.info(f"✅ Lift: {len(trajs)} trajectories, unit-norm defect {diagnostics['unit_norm_defect']:.2e}")
    return LiftResult(mu_eps, nu_eps, mu0_eps, vel, trajs, weights, sigma, sigma0, sigma_vec, diagnostics)
