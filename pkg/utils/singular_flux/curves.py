# utils/singular_flux/curves.py
"""
Augmented curves in (t, x) space

LipCurve is a piecewise-linear 1-Lipschitz curve s -> (t(s), x(s)) with a
nondecreasing time component. ABVCurve stores a left-continuous BV skeleton on
a time grid together with constant-speed transition paths at jump times.
to_lip and to_abv convert between unit-speed LipCurves and ABVCurves.
"""

import logging
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .measures import (
    AtomicVectorMeasure,
    DEFAULT_GAUSS_NODES,
    DEFAULT_NORM,
    NormSpec,
    _as_norm,
    concatenate_all,
    gauss_on_pieces,
    split_parameters,
)

logger = logging.getLogger(__name__)

SPEED_TOL = 1e-9
FLAT_RATIO = 1e-12
TIME_TOL = 1e-12

PairedTestFunction = Callable[[np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray]]


def _segment_atoms(p0: np.ndarray, p1: np.ndarray, knots: Optional[Sequence[np.ndarray]],
                   n_gauss: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre parameters u and weights on a segment, split where it crosses knots"""
    return gauss_on_pieces(split_parameters(p0, p1, knots), n_gauss)


# ==================== Lipschitz curves ====================

@dataclass(frozen=True, eq=False)
class LipCurve:
    """
    Piecewise-linear augmented curve with breakpoints s_0 = 0 < s_1 < ...

    points[k] = (t, x) at breakpoint k. Beyond the last breakpoint the curve
    is held constant.
    """
    breakpoints: np.ndarray
    points: np.ndarray
    norm: NormSpec = DEFAULT_NORM
    lipschitz: float = 1.0
    anchored: bool = True

    def __post_init__(self):
        s = np.array(self.breakpoints, dtype=float).reshape(-1)
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if s.shape[0] < 1 or s.shape[0] != pts.shape[0]:
            raise ValueError("LipCurve needs one (t, x) point per breakpoint")
        if pts.shape[1] < 2:
            raise ValueError("Curve points must carry a time and at least one spatial coordinate")
        if abs(s[0]) > TIME_TOL:
            raise ValueError(f"Breakpoints must start at 0, got {s[0]}")
        if np.any(np.diff(s) <= 0):
            raise ValueError("Breakpoints must be strictly increasing")
        if np.any(np.diff(pts[:, 0]) < -TIME_TOL):
            raise ValueError("Time component must be nondecreasing")
        norm = _as_norm(self.norm)
        if s.shape[0] > 1:
            speeds = norm(np.diff(pts, axis=0)) / np.diff(s)
            if np.any(speeds > self.lipschitz * (1.0 + SPEED_TOL) + SPEED_TOL):
                raise ValueError(
                    f"Curve exceeds its Lipschitz bound {self.lipschitz}: max speed {speeds.max():.12g}"
                )
        if self.anchored and abs(pts[0, 0]) > TIME_TOL:
            raise ValueError(f"Anchored curves start at t = 0, got t = {pts[0, 0]}")
        s.setflags(write=False)
        pts.setflags(write=False)
        object.__setattr__(self, 'breakpoints', s)
        object.__setattr__(self, 'points', pts)
        object.__setattr__(self, 'norm', norm)

    # ---------- construction ----------

    @classmethod
    def from_vertices(cls, vertices: np.ndarray, norm: Union[str, NormSpec, None] = None,
                      anchored: bool = True) -> 'LipCurve':
        """Unit-speed curve through (t, x) vertices; repeated vertices are dropped"""
        vertices = np.asarray(vertices, dtype=float)
        norm = _as_norm(norm)
        keep = [0]
        for k in range(1, vertices.shape[0]):
            if norm(vertices[k] - vertices[keep[-1]]) > 0:
                keep.append(k)
        vertices = vertices[keep]
        lengths = norm(np.diff(vertices, axis=0))
        breakpoints = np.concatenate([[0.0], np.cumsum(lengths)])
        return cls(breakpoints, vertices, norm, 1.0, anchored)

    @classmethod
    def from_dict(cls, data: Dict[str, Any], norm: Union[str, NormSpec, None] = None) -> 'LipCurve':
        return cls(
            np.asarray(data['breakpoints'], dtype=float),
            np.asarray(data['points'], dtype=float),
            _as_norm(data.get('norm', norm)),
            float(data.get('lipschitz', 1.0)),
            bool(data.get('anchored', True)),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {'breakpoints': self.breakpoints.tolist(), 'points': self.points.tolist()}

    # ---------- geometry ----------

    @property
    def dim(self) -> int:
        return self.points.shape[1] - 1

    @property
    def n_segments(self) -> int:
        return self.breakpoints.shape[0] - 1

    @property
    def s_end(self) -> float:
        return float(self.breakpoints[-1])

    @property
    def t_end(self) -> float:
        return float(self.points[-1, 0])

    def durations(self) -> np.ndarray:
        return np.diff(self.breakpoints)

    def velocities(self) -> np.ndarray:
        """(n_segments, 1 + d) slopes (t', x') per segment"""
        return np.diff(self.points, axis=0) / self.durations()[:, None]

    def speeds(self) -> np.ndarray:
        return self.norm(self.velocities())

    def is_normalized(self, tol: float = SPEED_TOL) -> bool:
        return self.n_segments > 0 and bool(np.all(np.abs(self.speeds() - 1.0) <= tol))

    def __call__(self, s: Union[float, np.ndarray]) -> np.ndarray:
        """Evaluate at s (clamped to [0, s_end]); returns (n, 1 + d) or (1 + d,)"""
        s_arr = np.atleast_1d(np.asarray(s, dtype=float))
        out = np.column_stack([np.interp(s_arr, self.breakpoints, self.points[:, k])
                               for k in range(self.points.shape[1])])
        return out[0] if np.ndim(s) == 0 else out

    def restrict(self, s_max: float) -> 'LipCurve':
        """The curve on [0, s_max]"""
        if s_max >= self.s_end:
            return self
        if s_max <= 0:
            raise ValueError(f"s_max must be positive, got {s_max}")
        inner = self.breakpoints < s_max
        s = np.append(self.breakpoints[inner], s_max)
        pts = np.vstack([self.points[inner], self(s_max)])
        return LipCurve(s, pts, self.norm, self.lipschitz, self.anchored)

    def flat_mask(self) -> np.ndarray:
        """Segments on which the time component is constant"""
        dt = np.diff(self.points[:, 0])
        return dt <= FLAT_RATIO * self.durations()

    # ---------- curve-carried measures ----------

    def quadrature(self, knots: Optional[Sequence[np.ndarray]] = None,
                   n_gauss: int = DEFAULT_GAUSS_NODES) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Gauss-Legendre nodes along the curve

        Returns:
            Tuple of (points (n, 1 + d), ds weights (n,), segment index (n,))
        """
        if self.n_segments == 0:
            return np.zeros((0, self.dim + 1)), np.zeros(0), np.zeros(0, dtype=int)
        pts_parts, w_parts, idx_parts = [], [], []
        dur = self.durations()
        for k in range(self.n_segments):
            p0, p1 = self.points[k], self.points[k + 1]
            u, w = _segment_atoms(p0, p1, knots, n_gauss)
            pts_parts.append(p0[None, :] + u[:, None] * (p1 - p0)[None, :])
            w_parts.append(dur[k] * w)
            idx_parts.append(np.full(u.shape[0], k))
        return np.vstack(pts_parts), np.concatenate(w_parts), np.concatenate(idx_parts)

    def omega_measure(self, knots: Optional[Sequence[np.ndarray]] = None,
                      n_gauss: int = DEFAULT_GAUSS_NODES) -> AtomicVectorMeasure:
        """Atoms of the integration measure along the curve, weights y'(s) ds in (1 + d)"""
        if self.n_segments == 0:
            return AtomicVectorMeasure.empty(self.dim, self.dim + 1, self.norm)
        pts, ds, seg = self.quadrature(knots, n_gauss)
        weights = ds[:, None] * self.velocities()[seg]
        return AtomicVectorMeasure(pts[:, 0], pts[:, 1:], weights, self.norm)

    def omega_curve(self, phi: Callable[[np.ndarray, np.ndarray], np.ndarray],
                    knots: Optional[Sequence[np.ndarray]] = None) -> float:
        """Integral of phi(y(s)) . y'(s) ds, phi returning (n, 1 + d) vectors"""
        return self.omega_measure(knots).pair(phi)


def stationary_curve(x0: Sequence[float], t_end: float, norm: Union[str, NormSpec, None] = None) -> LipCurve:
    """y(s) = (s, x0) on [0, t_end]"""
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    return LipCurve.from_vertices(np.vstack([np.concatenate([[0.0], x0]), np.concatenate([[t_end], x0])]), norm)


def d_metric(y1: LipCurve, y2: LipCurve, n_terms: int = 20) -> float:
    """Sum over n of 2^-n min(sup_[0, n] ||y1 - y2||, 1)"""
    if n_terms < 1:
        raise ValueError(f"n_terms must be >= 1, got {n_terms}")
    grid = np.union1d(y1.breakpoints, y2.breakpoints)
    grid = np.union1d(grid, np.arange(1, n_terms + 1, dtype=float))
    gaps = y1.norm(y1(grid) - y2(grid))
    total = 0.0
    for n in range(1, n_terms + 1):
        sup = float(gaps[grid <= n].max())
        total += 2.0 ** (-n) * min(sup, 1.0)
    return total


def s_bounds(y: LipCurve, t: float) -> Tuple[float, float]:
    """
    (s_minus, s_plus) = (sup{s : t(s) < t}, inf{s : t(s) > t}) with sup of the empty set = 0

    At the final time s_plus is the end of the curve.
    """
    tb = y.points[:, 0]
    s = y.breakpoints
    if t > tb[-1] + TIME_TOL:
        raise ValueError(f"t = {t} is beyond the curve's final time {tb[-1]}")
    if t < tb[0] - TIME_TOL:
        raise ValueError(f"t = {t} is before the curve's initial time {tb[0]}")
    if t <= tb[0]:
        s_minus = 0.0
    else:
        i = int(np.searchsorted(tb, t, side='left'))
        s_minus = float(s[i - 1] + (t - tb[i - 1]) / (tb[i] - tb[i - 1]) * (s[i] - s[i - 1]))
    j = int(np.searchsorted(tb, t, side='right')) - 1
    if j >= tb.shape[0] - 1:
        s_plus = float(s[-1])
    else:
        s_plus = float(s[j] + (t - tb[j]) / (tb[j + 1] - tb[j]) * (s[j + 1] - s[j]))
    return s_minus, max(s_minus, s_plus)


# ==================== ABV curves ====================

@dataclass(frozen=True, eq=False)
class Jump:
    """Transition path at time t, traversed at constant speed on r in [0, 1]"""
    t: float
    path: np.ndarray

    def __post_init__(self):
        path = np.array(self.path, dtype=float)
        if path.ndim == 1:
            path = path.reshape(-1, 1)
        if path.shape[0] < 2:
            raise ValueError(f"Transition at t={self.t} needs at least 2 path points")
        path.setflags(write=False)
        object.__setattr__(self, 'path', path)

    def length(self, norm: NormSpec) -> float:
        return float(np.sum(norm(np.diff(self.path, axis=0))))

    @property
    def displacement(self) -> np.ndarray:
        return self.path[-1] - self.path[0]

    def at(self, r: np.ndarray, norm: NormSpec) -> np.ndarray:
        """u(t, r) for r in [0, 1] under constant-speed parametrization"""
        seg = norm(np.diff(self.path, axis=0))
        cum = np.concatenate([[0.0], np.cumsum(seg)]) / np.sum(seg)
        r = np.clip(np.asarray(r, dtype=float), 0.0, 1.0)
        return np.column_stack([np.interp(r, cum, self.path[:, k]) for k in range(self.path.shape[1])])

    def to_dict(self) -> Dict[str, Any]:
        return {'t': self.t, 'path': self.path.tolist()}


@dataclass(frozen=True, eq=False)
class ABVCurve:
    """
    Left-continuous skeleton on sample times with transitions at jump times

    values[k] is the skeleton value at sample_times[k] (the left limit). The
    skeleton is linear on (t_k, t_{k+1}] starting from the right limit at t_k,
    which is the end of the transition at t_k when there is one.
    """
    sample_times: np.ndarray
    values: np.ndarray
    jumps: Tuple[Jump, ...] = ()
    norm: NormSpec = DEFAULT_NORM

    def __post_init__(self):
        times = np.array(self.sample_times, dtype=float).reshape(-1)
        values = np.array(self.values, dtype=float)
        if values.ndim == 1:
            values = values.reshape(-1, 1)
        if times.shape[0] < 1 or values.shape[0] != times.shape[0]:
            raise ValueError("ABVCurve needs one skeleton value per sample time")
        if np.any(np.diff(times) <= 0):
            raise ValueError("Sample times must be strictly increasing")
        norm = _as_norm(self.norm)
        jumps = tuple(sorted(self.jumps, key=lambda j: j.t))
        seen = set()
        for jump in jumps:
            k = int(np.argmin(np.abs(times - jump.t)))
            if abs(times[k] - jump.t) > TIME_TOL:
                raise ValueError(f"Jump time {jump.t} is not a sample time")
            if k in seen:
                raise ValueError(f"Two transitions at time {jump.t}")
            seen.add(k)
            if jump.path.shape[1] != values.shape[1]:
                raise ValueError("Transition path dimension does not match the skeleton")
            if norm(jump.path[0] - values[k]) > 1e-9:
                raise ValueError(f"Transition at t={jump.t} does not start at the skeleton value")
            if jump.length(norm) <= 0:
                raise ValueError(f"Transition at t={jump.t} has zero length")
        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, 'sample_times', times)
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'jumps', jumps)
        object.__setattr__(self, 'norm', norm)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def t_end(self) -> float:
        return float(self.sample_times[-1])

    def jump_index(self) -> Dict[int, Jump]:
        return {int(np.argmin(np.abs(self.sample_times - j.t))): j for j in self.jumps}

    def right_values(self) -> np.ndarray:
        """Right limits at every sample time"""
        right = np.array(self.values)
        for k, jump in self.jump_index().items():
            right[k] = jump.path[-1]
        return right

    def skeleton(self, t: Union[float, np.ndarray], side: str = 'left') -> np.ndarray:
        """Skeleton value (side='left') or right limit (side='right') at times t"""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        times = self.sample_times
        right = self.right_values()
        out = np.zeros((t_arr.shape[0], self.dim))
        for n, tt in enumerate(t_arr):
            if tt <= times[0]:
                out[n] = self.values[0] if (side == 'left' or tt < times[0]) else right[0]
                continue
            if tt >= times[-1]:
                out[n] = right[-1] if (side == 'right' or tt > times[-1]) else self.values[-1]
                continue
            k = int(np.searchsorted(times, tt, side='left'))
            if abs(times[k] - tt) <= TIME_TOL:
                out[n] = right[k] if side == 'right' else self.values[k]
                continue
            k -= 1
            frac = (tt - times[k]) / (times[k + 1] - times[k])
            out[n] = right[k] + frac * (self.values[k + 1] - right[k])
        return out[0] if np.ndim(t) == 0 else out

    def to_dict(self) -> Dict[str, Any]:
        return {
            'times': self.sample_times.tolist(),
            'values': self.values.tolist(),
            'jumps': [j.to_dict() for j in self.jumps],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any], norm: Union[str, NormSpec, None] = None) -> 'ABVCurve':
        values = np.asarray(data['values'], dtype=float)
        dim = values.shape[1] if values.ndim == 2 else 1
        jumps = tuple(Jump(float(j['t']), np.asarray(j['path'], dtype=float).reshape(-1, dim))
                      for j in data.get('jumps', []))
        return cls(np.asarray(data['times'], dtype=float), values.reshape(-1, dim), jumps,
                   _as_norm(data.get('norm', norm)))

    # ---------- carried measure ----------

    def theta_measure(self, knots: Optional[Sequence[np.ndarray]] = None,
                      n_gauss: int = DEFAULT_GAUSS_NODES) -> AtomicVectorMeasure:
        """
        Atoms of (1, d_t^L u) dt along the skeleton graph plus the jump measures

        Transition atoms sit at (t, u(t, r)) with weights (0, d_r u dr).
        """
        parts = []
        right = self.right_values()
        times = self.sample_times
        jumps = self.jump_index()
        d = self.dim
        for k in range(times.shape[0]):
            if k in jumps:
                path = jumps[k].path
                for a, b in zip(path[:-1], path[1:]):
                    if not np.any(b != a):
                        continue
                    p0 = np.concatenate([[times[k]], a])
                    p1 = np.concatenate([[times[k]], b])
                    u, w = _segment_atoms(p0, p1, knots, n_gauss)
                    pts = a[None, :] + u[:, None] * (b - a)[None, :]
                    weights = np.column_stack([np.zeros(u.shape[0]), w[:, None] * (b - a)[None, :]])
                    parts.append(AtomicVectorMeasure(np.full(u.shape[0], times[k]), pts, weights, self.norm))
            if k + 1 < times.shape[0]:
                dt = times[k + 1] - times[k]
                slope = (self.values[k + 1] - right[k]) / dt
                p0 = np.concatenate([[times[k]], right[k]])
                p1 = np.concatenate([[times[k + 1]], self.values[k + 1]])
                u, w = _segment_atoms(p0, p1, knots, n_gauss)
                pts = p0[None, :] + u[:, None] * (p1 - p0)[None, :]
                weights = (dt * w)[:, None] * np.concatenate([[1.0], slope])[None, :]
                parts.append(AtomicVectorMeasure(pts[:, 0], pts[:, 1:], weights, self.norm))
        return concatenate_all(parts, d, d + 1, self.norm)


@dataclass(frozen=True, eq=False)
class DerivativeDecomposition:
    """Diffuse (per-interval slopes), Cantor (zero) and jump parts of the skeleton derivative"""
    interval_starts: np.ndarray
    interval_ends: np.ndarray
    ac_slopes: np.ndarray
    cantor_part: np.ndarray
    jump_times: np.ndarray
    jump_displacements: np.ndarray
    jump_lengths: np.ndarray

    def reconstruct_increments(self, sample_times: np.ndarray) -> np.ndarray:
        """Skeleton increments values[k+1] - values[k] rebuilt from the parts"""
        inc = self.ac_slopes * (self.interval_ends - self.interval_starts)[:, None]
        for t, disp in zip(self.jump_times, self.jump_displacements):
            k = int(np.argmin(np.abs(sample_times - t)))
            if k < inc.shape[0]:
                inc[k] += disp
        return inc


def derivative_decomposition(u: ABVCurve) -> DerivativeDecomposition:
    times = u.sample_times
    right = u.right_values()
    dt = np.diff(times)
    slopes = (u.values[1:] - right[:-1]) / dt[:, None] if dt.size else np.zeros((0, u.dim))
    jumps = u.jumps
    return DerivativeDecomposition(
        interval_starts=times[:-1],
        interval_ends=times[1:],
        ac_slopes=slopes,
        cantor_part=np.zeros(u.dim),
        jump_times=np.array([j.t for j in jumps]),
        jump_displacements=np.array([j.displacement for j in jumps]).reshape(-1, u.dim),
        jump_lengths=np.array([j.length(u.norm) for j in jumps]),
    )


# ==================== Transforms ====================

def to_abv(y: LipCurve) -> ABVCurve:
    """Skeleton x(s_minus(t)) with transitions on the flat-time intervals of a unit-speed curve"""
    if not y.is_normalized():
        raise ValueError("to_abv needs a unit-speed curve (max speed deviation "
                         f"{np.max(np.abs(y.speeds() - 1.0)) if y.n_segments else 'n/a'})")
    flat = y.flat_mask()
    times: List[float] = []
    values: List[np.ndarray] = []
    jumps: List[Jump] = []
    k = 0
    n = y.n_segments
    times.append(float(y.points[0, 0]))
    values.append(y.points[0, 1:])
    while k < n:
        if flat[k]:
            start = k
            while k < n and flat[k]:
                k += 1
            path = y.points[start:k + 1, 1:]
            jumps.append(Jump(times[-1], path))
        else:
            times.append(float(y.points[k + 1, 0]))
            values.append(y.points[k + 1, 1:])
            k += 1
    return ABVCurve(np.array(times), np.vstack(values), tuple(jumps), y.norm)


def to_lip(u: ABVCurve) -> LipCurve:
    """Arclength curve of u: transitions are traversed at unit speed with frozen time"""
    jumps = u.jump_index()
    vertices = [np.concatenate([[u.sample_times[0]], u.values[0]])]
    for k, t in enumerate(u.sample_times):
        if k in jumps:
            for p in jumps[k].path[1:]:
                vertices.append(np.concatenate([[t], p]))
        if k + 1 < u.sample_times.shape[0]:
            vertices.append(np.concatenate([[u.sample_times[k + 1]], u.values[k + 1]]))
    return LipCurve.from_vertices(np.vstack(vertices), u.norm, anchored=abs(u.sample_times[0]) <= TIME_TOL)


def theta_u(u: ABVCurve, phi: PairedTestFunction, knots: Optional[Sequence[np.ndarray]] = None) -> float:
    """Pairing of the ABV-carried measure with phi(t, X) -> (phi0, phivec)"""
    def stacked(t, X):
        phi0, phivec = phi(t, X)
        return np.column_stack([np.asarray(phi0).reshape(-1), np.asarray(phivec).reshape(len(t), -1)])
    return u.theta_measure(knots).pair(stacked)


# ==================== Predicates ====================

def _closest_parameters(p1, d1, p2, d2):
    """Vectorized closest points between segments p1 + a d1 and p2 + b d2, a, b in [0, 1]"""
    r = p1 - p2
    a_len = np.sum(d1 * d1, axis=1)
    e_len = np.sum(d2 * d2, axis=1)
    f = np.sum(d2 * r, axis=1)
    c = np.sum(d1 * r, axis=1)
    b = np.sum(d1 * d2, axis=1)
    denom = a_len * e_len - b * b
    safe_a = np.where(a_len > 0, a_len, 1.0)
    safe_e = np.where(e_len > 0, e_len, 1.0)
    s = np.where(denom > 1e-14 * np.maximum(a_len * e_len, 1e-300),
                 np.clip((b * f - c * e_len) / np.where(denom > 0, denom, 1.0), 0.0, 1.0), 0.0)
    t = (b * s + f) / safe_e
    low = t < 0
    high = t > 1
    s = np.where(low, np.clip(-c / safe_a, 0.0, 1.0), s)
    s = np.where(high, np.clip((b - c) / safe_a, 0.0, 1.0), s)
    t = np.clip(t, 0.0, 1.0)
    s = np.where(a_len > 0, s, 0.0)
    t = np.where(e_len > 0, t, 0.0)
    gap = (p1 + s[:, None] * d1) - (p2 + t[:, None] * d2)
    return np.sqrt(np.sum(gap * gap, axis=1)), s, t


def injectivity_check(y: LipCurve, tol: float = 1e-9) -> bool:
    """False iff two curve points closer than tol in (t, x) are farther than tol in s"""
    n = y.n_segments
    if n < 2:
        return True
    starts = y.points[:-1]
    deltas = np.diff(y.points, axis=0)
    s0 = y.breakpoints[:-1]
    dur = y.durations()

    # adjacent segments folding back onto each other
    d1, d2 = deltas[:-1], deltas[1:]
    n1 = np.sqrt(np.sum(d1 * d1, axis=1))
    n2 = np.sqrt(np.sum(d2 * d2, axis=1))
    cos = np.sum(d1 * d2, axis=1) / np.maximum(n1 * n2, 1e-300)
    if np.any((cos < -1.0 + 1e-12) & (n1 > 0) & (n2 > 0)):
        return False

    i, j = np.triu_indices(n, k=2)
    if i.size == 0:
        return True
    dist, a, b = _closest_parameters(starts[i], deltas[i], starts[j], deltas[j])
    param_gap = (s0[j] + b * dur[j]) - (s0[i] + a * dur[i])
    return not bool(np.any((dist < tol) & (param_gap > tol)))


def segment_check(y: LipCurve, tol: float = 1e-9) -> bool:
    """
    True iff every maximal flat-time run is a straight segment traversed at unit speed

    Each spatial increment of the run must be a nonnegative multiple of the
    run's chord, tested in Euclidean coordinates. Under l1 and linf a bent
    path can have length equal to its chord.
    """
    if not y.is_normalized():
        raise ValueError("segment_check needs a unit-speed curve")
    flat = y.flat_mask()
    k, n = 0, y.n_segments
    while k < n:
        if not flat[k]:
            k += 1
            continue
        start = k
        while k < n and flat[k]:
            k += 1
        length = float(y.breakpoints[k] - y.breakpoints[start])
        chord_vec = y.points[k, 1:] - y.points[start, 1:]
        if abs(length - float(y.norm(chord_vec))) > tol:
            return False
        chord_len = float(np.linalg.norm(chord_vec))
        if chord_len == 0.0:
            continue
        direction = chord_vec / chord_len
        steps = np.diff(y.points[start:k + 1, 1:], axis=0)
        along = steps @ direction
        across = steps - along[:, None] * direction
        if np.any(along < -tol) or np.any(np.sqrt(np.sum(across * across, axis=1)) > tol):
            return False
    return True


# ==================== Random curves ====================

def random_normalized_curve(rng: np.random.Generator, n_segments: int = 8, dim: int = 2,
                            norm: Union[str, NormSpec, None] = None, flat_prob: float = 0.3,
                            max_length: float = 0.5) -> LipCurve:
    """
    Unit-speed anchored curve with random directions and some flat-time runs

    Moving segments get a positive time slope; flat segments have t' = 0.
    """
    norm = _as_norm(norm)
    directions = rng.normal(size=(n_segments, dim + 1))
    flat = rng.uniform(size=n_segments) < flat_prob
    directions[:, 0] = np.where(flat, 0.0, np.abs(directions[:, 0]) + 0.1)
    directions[flat, 1:] += np.where(np.abs(directions[flat, 1:]) < 1e-3, 1e-3, 0.0)
    directions /= norm(directions)[:, None]
    lengths = rng.uniform(0.05, max_length, size=n_segments)
    vertices = np.vstack([np.zeros(dim + 1), np.cumsum(lengths[:, None] * directions, axis=0)])
    return LipCurve.from_vertices(vertices, norm)
