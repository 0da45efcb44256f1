# utils/singular_flux/measures.py
"""
Measure values for space-time pairs (mu, nu)

Atomic measures are the universal discretization used by every check in the
package; symbolic measures describe exact product components (time part x
space part) and discretize either by the midpoint rule or by Gauss-Legendre
quadrature split at test-basis knots.

Time is always the first coordinate; spatial points have dimension d.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.spatial import cKDTree

logger = logging.getLogger(__name__)

NORM_KINDS = ('l1', 'l2', 'linf')
DEFAULT_GAUSS_NODES = 4

TestFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]
PointMap = Callable[[np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray]]


# ==================== Norms ====================

@dataclass(frozen=True)
class NormSpec:
    """Norm on the ambient coordinate space, applied along the last axis"""
    kind: str = 'l2'

    def __post_init__(self):
        kind = str(self.kind).lower()
        if kind not in NORM_KINDS:
            raise ValueError(f"Unknown norm kind: {self.kind}. Use one of {NORM_KINDS}")
        object.__setattr__(self, 'kind', kind)

    @property
    def strictly_convex(self) -> bool:
        return self.kind == 'l2'

    def __call__(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape[-1] == 0:
            return np.zeros(v.shape[:-1])
        if self.kind == 'l1':
            return np.sum(np.abs(v), axis=-1)
        if self.kind == 'linf':
            return np.max(np.abs(v), axis=-1)
        return np.sqrt(np.sum(v * v, axis=-1))

    def dual(self) -> 'NormSpec':
        return NormSpec({'l1': 'linf', 'linf': 'l1', 'l2': 'l2'}[self.kind])


DEFAULT_NORM = NormSpec('l2')


def _as_norm(norm: Union[str, NormSpec, None]) -> NormSpec:
    if norm is None:
        return DEFAULT_NORM
    if isinstance(norm, NormSpec):
        return norm
    return NormSpec(norm)


@lru_cache(maxsize=32)
def _gauss_reference(n: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = leggauss(n)
    return (nodes + 1.0) / 2.0, weights / 2.0


def gauss_on_pieces(breaks: np.ndarray, n_gauss: int = DEFAULT_GAUSS_NODES) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on consecutive pieces [breaks[i], breaks[i+1]]"""
    breaks = np.asarray(breaks, dtype=float)
    ref_nodes, ref_weights = _gauss_reference(n_gauss)
    lengths = np.diff(breaks)
    span = breaks[-1] - breaks[0] if breaks.size else 0.0
    keep = lengths > 1e-12 * max(1.0, span)
    lo = breaks[:-1][keep]
    lengths = lengths[keep]
    nodes = (lo[:, None] + lengths[:, None] * ref_nodes[None, :]).ravel()
    weights = (lengths[:, None] * ref_weights[None, :]).ravel()
    return nodes, weights


def split_parameters(p0: np.ndarray, p1: np.ndarray, knots: Optional[Sequence[np.ndarray]]) -> np.ndarray:
    """
    Parameters u in [0, 1] where the segment p0 + u (p1 - p0) crosses a knot of any axis

    Returns the sorted break list including 0 and 1.
    """
    breaks = [0.0, 1.0]
    if knots is not None:
        delta = np.asarray(p1, dtype=float) - np.asarray(p0, dtype=float)
        for axis, axis_knots in enumerate(knots):
            if axis_knots is None or delta[axis] == 0.0:
                continue
            u = (np.asarray(axis_knots, dtype=float) - p0[axis]) / delta[axis]
            breaks.extend(u[(u > 0.0) & (u < 1.0)].tolist())
    return np.unique(np.asarray(breaks))


# ==================== Atomic measures ====================

@dataclass(frozen=True, eq=False)
class AtomicVectorMeasure:
    """
    Finite list of space-time atoms (t_i, x_i) carrying weight vectors w_i

    times: (n,), points: (n, d), weights: (n, m). Arrays are stored read-only.
    """
    times: np.ndarray
    points: np.ndarray
    weights: np.ndarray
    norm: NormSpec = DEFAULT_NORM

    def __post_init__(self):
        times = np.array(self.times, dtype=float).reshape(-1)
        n = times.shape[0]
        points = np.array(self.points, dtype=float)
        if points.ndim == 1:
            points = points.reshape(n, -1) if n > 0 else points.reshape(0, 0)
        weights = np.array(self.weights, dtype=float)
        if weights.ndim == 1:
            weights = weights.reshape(n, -1) if n > 0 else weights.reshape(0, 1)
        if points.ndim != 2 or points.shape[0] != n:
            raise ValueError(f"points must have shape ({n}, d), got {points.shape}")
        if weights.ndim != 2 or weights.shape[0] != n:
            raise ValueError(f"weights must have shape ({n}, m), got {weights.shape}")
        if n and not (np.all(np.isfinite(times)) and np.all(np.isfinite(points)) and np.all(np.isfinite(weights))):
            raise ValueError("Atomic measure contains non-finite values")
        if n and times.min() < -1e-12:
            raise ValueError(f"Atom times must be nonnegative, found {times.min()}")
        for arr in (times, points, weights):
            arr.setflags(write=False)
        object.__setattr__(self, 'times', times)
        object.__setattr__(self, 'points', points)
        object.__setattr__(self, 'weights', weights)
        object.__setattr__(self, 'norm', _as_norm(self.norm))

    @classmethod
    def empty(cls, dim: int, m: int = 1, norm: Union[str, NormSpec, None] = None) -> 'AtomicVectorMeasure':
        return cls(np.zeros(0), np.zeros((0, dim)), np.zeros((0, m)), _as_norm(norm))

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def m(self) -> int:
        return self.weights.shape[1]

    @property
    def n_atoms(self) -> int:
        return self.times.shape[0]

    @property
    def coords(self) -> np.ndarray:
        """(n, 1 + d) array of space-time coordinates"""
        return np.column_stack([self.times, self.points])

    def __len__(self) -> int:
        return self.n_atoms

    def atom_norms(self) -> np.ndarray:
        return self.norm(self.weights)

    def total_variation(self, window: Optional[Tuple[float, float]] = None, right_open: bool = False) -> float:
        """Sum of weight norms over atoms with t in window (closed, or [a, b) when right_open)"""
        norms = self.atom_norms()
        if window is not None:
            a, b = window
            if a > b:
                raise ValueError(f"Window must satisfy a <= b, got [{a}, {b}]")
            upper = self.times < b if right_open else self.times <= b
            norms = norms[(self.times >= a) & upper]
        return float(np.sum(norms))

    def mass(self) -> float:
        """Signed total of a scalar measure"""
        if self.m != 1:
            raise ValueError("mass() is defined for scalar measures only")
        return float(np.sum(self.weights[:, 0]))

    def pair(self, f: TestFunction) -> float:
        """Return sum_i f(t_i, x_i) . w_i"""
        if self.n_atoms == 0:
            return 0.0
        values = np.asarray(f(self.times, self.points), dtype=float)
        if values.ndim == 1 and self.m == 1:
            values = values[:, None]
        if values.shape != self.weights.shape:
            raise ValueError(
                f"Test function returned shape {values.shape}, weights have shape {self.weights.shape}"
            )
        return float(np.sum(values * self.weights))

    def pushforward(self, p: PointMap) -> 'AtomicVectorMeasure':
        """Relocate atoms through (t, x) -> p(t, x); weights are preserved"""
        new_t, new_x = p(self.times, self.points)
        new_t = np.asarray(new_t, dtype=float).reshape(-1)
        new_x = np.asarray(new_x, dtype=float).reshape(self.n_atoms, -1)
        return AtomicVectorMeasure(new_t, new_x, self.weights, self.norm)

    def restrict(self, window: Tuple[float, float], right_open: bool = False) -> 'AtomicVectorMeasure':
        a, b = window
        upper = self.times < b if right_open else self.times <= b
        return self.select((self.times >= a) & upper)

    def select(self, mask: np.ndarray) -> 'AtomicVectorMeasure':
        return AtomicVectorMeasure(self.times[mask], self.points[mask], self.weights[mask], self.norm)

    def with_weights(self, weights: np.ndarray) -> 'AtomicVectorMeasure':
        return AtomicVectorMeasure(self.times, self.points, weights, self.norm)

    def scale(self, c: float) -> 'AtomicVectorMeasure':
        return self.with_weights(c * self.weights)

    def component(self, k: int) -> 'AtomicVectorMeasure':
        return self.with_weights(self.weights[:, k:k + 1])

    def concatenate(self, other: 'AtomicVectorMeasure') -> 'AtomicVectorMeasure':
        if self.n_atoms == 0:
            return other
        if other.n_atoms == 0:
            return self
        if other.dim != self.dim or other.m != self.m:
            raise ValueError(
                f"Cannot concatenate measures with (d, m) = ({self.dim}, {self.m}) and ({other.dim}, {other.m})"
            )
        return AtomicVectorMeasure(
            np.concatenate([self.times, other.times]),
            np.vstack([self.points, other.points]),
            np.vstack([self.weights, other.weights]),
            self.norm,
        )

    def __add__(self, other: 'AtomicVectorMeasure') -> 'AtomicVectorMeasure':
        return self.concatenate(other)

    def bbox(self) -> Tuple[np.ndarray, np.ndarray]:
        """Bounding box of the space-time coordinates (lower, upper)"""
        coords = self.coords
        return coords.min(axis=0), coords.max(axis=0)


def concatenate_all(measures: Sequence[AtomicVectorMeasure], dim: int, m: int,
                    norm: Union[str, NormSpec, None] = None) -> AtomicVectorMeasure:
    non_empty = [mm for mm in measures if mm.n_atoms > 0]
    if not non_empty:
        return AtomicVectorMeasure.empty(dim, m, norm)
    return AtomicVectorMeasure(
        np.concatenate([mm.times for mm in non_empty]),
        np.vstack([mm.points for mm in non_empty]),
        np.vstack([mm.weights for mm in non_empty]),
        _as_norm(norm) if norm is not None else non_empty[0].norm,
    )


# ==================== Symbolic components ====================

@dataclass(frozen=True)
class LebesgueInterval:
    """Lebesgue measure on [a, b] with affine density c0 + c1 t"""
    a: float
    b: float
    density: Tuple[float, float] = (1.0, 0.0)
    kind: str = field(default='lebesgue', init=False)

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"Lebesgue interval needs a < b, got [{self.a}, {self.b}]")
        if self.a < 0:
            raise ValueError(f"Time interval must lie in t >= 0, got a = {self.a}")
        object.__setattr__(self, 'density', (float(self.density[0]), float(self.density[1])))

    def density_at(self, t: np.ndarray) -> np.ndarray:
        return self.density[0] + self.density[1] * np.asarray(t, dtype=float)

    def abs_mass(self) -> float:
        c0, c1 = self.density
        pieces = [self.a, self.b]
        if c1 != 0.0 and self.a < -c0 / c1 < self.b:
            pieces = [self.a, -c0 / c1, self.b]
        total = 0.0
        for lo, hi in zip(pieces[:-1], pieces[1:]):
            total += abs(c0 * (hi - lo) + 0.5 * c1 * (hi * hi - lo * lo))
        return total

    def midpoint_nodes(self, res: int) -> Tuple[np.ndarray, np.ndarray]:
        h = (self.b - self.a) / res
        nodes = self.a + (np.arange(res) + 0.5) * h
        return nodes, h * self.density_at(nodes)

    def gauss_nodes(self, knots: Optional[np.ndarray], n_gauss: int) -> Tuple[np.ndarray, np.ndarray]:
        breaks = [self.a, self.b]
        if knots is not None:
            k = np.asarray(knots, dtype=float)
            breaks.extend(k[(k > self.a) & (k < self.b)].tolist())
        nodes, weights = gauss_on_pieces(np.unique(breaks), n_gauss)
        return nodes, weights * self.density_at(nodes)

    def breakpoints(self) -> List[float]:
        return [self.a, self.b]

    def to_dict(self) -> Dict[str, Any]:
        return {'kind': 'lebesgue', 'a': self.a, 'b': self.b, 'density': list(self.density)}


@dataclass(frozen=True)
class Dirac:
    """Dirac mass at time t0"""
    t: float
    kind: str = field(default='dirac', init=False)

    def __post_init__(self):
        if self.t < 0:
            raise ValueError(f"Dirac time must be nonnegative, got {self.t}")

    def abs_mass(self) -> float:
        return 1.0

    def midpoint_nodes(self, res: int) -> Tuple[np.ndarray, np.ndarray]:
        return np.array([self.t], dtype=float), np.array([1.0])

    def gauss_nodes(self, knots: Optional[np.ndarray], n_gauss: int) -> Tuple[np.ndarray, np.ndarray]:
        return self.midpoint_nodes(1)

    def breakpoints(self) -> List[float]:
        return [self.t]

    def to_dict(self) -> Dict[str, Any]:
        return {'kind': 'dirac', 't': self.t}


@dataclass(frozen=True, eq=False)
class Atoms:
    """Finitely many spatial atoms with weight vectors"""
    points: np.ndarray
    weights: np.ndarray
    kind: str = field(default='atoms', init=False)

    def __post_init__(self):
        points = np.array(self.points, dtype=float)
        weights = np.array(self.weights, dtype=float)
        if points.ndim == 1:
            points = points.reshape(-1, 1)
        if weights.ndim == 1:
            weights = weights.reshape(-1, 1)
        if points.shape[0] != weights.shape[0]:
            raise ValueError("Atoms: points and weights must have the same length")
        points.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, 'points', points)
        object.__setattr__(self, 'weights', weights)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def weight_dim(self) -> int:
        return self.weights.shape[1]

    def abs_mass(self, norm: NormSpec) -> float:
        return float(np.sum(norm(self.weights)))

    def midpoint_nodes(self, res: int) -> Tuple[np.ndarray, np.ndarray]:
        return self.points, self.weights

    def gauss_nodes(self, knots, n_gauss: int) -> Tuple[np.ndarray, np.ndarray]:
        return self.points, self.weights

    def vertices(self) -> np.ndarray:
        return self.points

    def to_dict(self) -> Dict[str, Any]:
        return {'kind': 'atoms', 'points': self.points.tolist(), 'weights': self.weights.tolist()}


def _check_segments(vertices: np.ndarray, label: str) -> np.ndarray:
    lengths = np.sqrt(np.sum(np.diff(vertices, axis=0) ** 2, axis=1))
    if np.any(lengths <= 0.0):
        raise ValueError(f"{label} has a degenerate segment (repeated consecutive vertex)")
    return lengths


@dataclass(frozen=True, eq=False)
class TangentOnPolyline:
    """Unit tangent field times arclength on a polyline, oriented by +1 / -1"""
    vertices: np.ndarray
    orientation: int = 1
    kind: str = field(default='polyline', init=False)

    def __post_init__(self):
        vertices = np.array(self.vertices, dtype=float)
        if vertices.ndim == 1:
            vertices = vertices.reshape(-1, 1)
        if vertices.shape[0] < 2 or np.unique(vertices, axis=0).shape[0] < 2:
            raise ValueError("Polyline needs at least 2 distinct vertices")
        if self.orientation not in (1, -1):
            raise ValueError(f"Polyline orientation must be +1 or -1, got {self.orientation}")
        _check_segments(vertices, "Polyline")
        vertices.setflags(write=False)
        object.__setattr__(self, 'vertices', vertices)

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    @property
    def closed(self) -> bool:
        return bool(np.allclose(self.vertices[0], self.vertices[-1], atol=1e-12))

    def weight_dim(self) -> int:
        return self.dim

    def segment_lengths(self) -> np.ndarray:
        return np.sqrt(np.sum(np.diff(self.vertices, axis=0) ** 2, axis=1))

    def length(self) -> float:
        return float(np.sum(self.segment_lengths()))

    def tangents(self) -> np.ndarray:
        deltas = np.diff(self.vertices, axis=0)
        return self.orientation * deltas / self.segment_lengths()[:, None]

    def abs_mass(self, norm: NormSpec) -> float:
        return float(np.sum(self.segment_lengths() * norm(self.tangents())))

    def midpoint_nodes(self, res: int) -> Tuple[np.ndarray, np.ndarray]:
        n_seg = self.vertices.shape[0] - 1
        pieces = max(1, res // n_seg)
        u = (np.arange(pieces) + 0.5) / pieces
        starts = self.vertices[:-1]
        deltas = np.diff(self.vertices, axis=0)
        points = (starts[:, None, :] + u[None, :, None] * deltas[:, None, :]).reshape(-1, self.dim)
        seg_w = (self.segment_lengths() / pieces)[:, None] * self.tangents()
        weights = np.repeat(seg_w, pieces, axis=0)
        return points, weights

    def gauss_nodes(self, knots: Optional[Sequence[np.ndarray]], n_gauss: int) -> Tuple[np.ndarray, np.ndarray]:
        all_points, all_weights = [], []
        lengths = self.segment_lengths()
        tangents = self.tangents()
        for i in range(self.vertices.shape[0] - 1):
            p0, p1 = self.vertices[i], self.vertices[i + 1]
            u, w = gauss_on_pieces(split_parameters(p0, p1, knots), n_gauss)
            all_points.append(p0[None, :] + u[:, None] * (p1 - p0)[None, :])
            all_weights.append((lengths[i] * w)[:, None] * tangents[i][None, :])
        return np.vstack(all_points), np.vstack(all_weights)

    def vertices_array(self) -> np.ndarray:
        return self.vertices

    def to_dict(self) -> Dict[str, Any]:
        return {'kind': 'polyline', 'points': self.vertices.tolist(), 'orientation': self.orientation}


@dataclass(frozen=True, eq=False)
class LebesgueSegment:
    """Scalar arclength measure on the segment [a, b]"""
    a: np.ndarray
    b: np.ndarray
    kind: str = field(default='segment', init=False)

    def __post_init__(self):
        a = np.array(self.a, dtype=float).reshape(-1)
        b = np.array(self.b, dtype=float).reshape(-1)
        if a.shape != b.shape:
            raise ValueError("Segment endpoints must have the same dimension")
        if np.array_equal(a, b):
            raise ValueError("Degenerate segment: a_point equals b_point")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, 'a', a)
        object.__setattr__(self, 'b', b)

    @property
    def dim(self) -> int:
        return self.a.shape[0]

    def weight_dim(self) -> int:
        return 1

    def length(self) -> float:
        return float(np.sqrt(np.sum((self.b - self.a) ** 2)))

    def abs_mass(self, norm: NormSpec) -> float:
        return self.length()

    def midpoint_nodes(self, res: int) -> Tuple[np.ndarray, np.ndarray]:
        u = (np.arange(res) + 0.5) / res
        points = self.a[None, :] + u[:, None] * (self.b - self.a)[None, :]
        return points, np.full((res, 1), self.length() / res)

    def gauss_nodes(self, knots: Optional[Sequence[np.ndarray]], n_gauss: int) -> Tuple[np.ndarray, np.ndarray]:
        u, w = gauss_on_pieces(split_parameters(self.a, self.b, knots), n_gauss)
        points = self.a[None, :] + u[:, None] * (self.b - self.a)[None, :]
        return points, (self.length() * w)[:, None]

    def vertices(self) -> np.ndarray:
        return np.vstack([self.a, self.b])

    def to_dict(self) -> Dict[str, Any]:
        return {'kind': 'segment', 'a': self.a.tolist(), 'b': self.b.tolist()}


TimePart = Union[LebesgueInterval, Dirac]
SpacePart = Union[Atoms, TangentOnPolyline, LebesgueSegment]


@dataclass(frozen=True, eq=False)
class SymbolicComponent:
    time: TimePart
    space: SpacePart
    scale: float = 1.0

    def space_vertices(self) -> np.ndarray:
        if isinstance(self.space, TangentOnPolyline):
            return self.space.vertices
        if isinstance(self.space, LebesgueSegment):
            return self.space.vertices()
        return self.space.points

    def _combine(self, t_nodes, t_weights, x_nodes, x_weights) -> AtomicVectorMeasure:
        n_t, n_x = t_nodes.shape[0], x_nodes.shape[0]
        times = np.repeat(t_nodes, n_x)
        points = np.tile(x_nodes, (n_t, 1))
        weights = self.scale * np.repeat(t_weights, n_x)[:, None] * np.tile(x_weights, (n_t, 1))
        return AtomicVectorMeasure(times, points, weights)

    def discretize(self, res: int) -> AtomicVectorMeasure:
        continuous_time = isinstance(self.time, LebesgueInterval)
        continuous_space = not isinstance(self.space, Atoms)
        if continuous_time and continuous_space:
            n_t = n_x = max(2, math.isqrt(res))
        elif continuous_time:
            n_t, n_x = max(2, res // max(1, self.space.points.shape[0])), 1
        else:
            n_t, n_x = 1, res
        t_nodes, t_weights = self.time.midpoint_nodes(n_t)
        x_nodes, x_weights = self.space.midpoint_nodes(n_x)
        return self._combine(t_nodes, t_weights, x_nodes, x_weights)

    def quadrature(self, knots: Optional[Sequence[np.ndarray]], n_gauss: int) -> AtomicVectorMeasure:
        time_knots = knots[0] if knots is not None else None
        space_knots = list(knots[1:]) if knots is not None else None
        t_nodes, t_weights = self.time.gauss_nodes(time_knots, n_gauss)
        x_nodes, x_weights = self.space.gauss_nodes(space_knots, n_gauss)
        return self._combine(t_nodes, t_weights, x_nodes, x_weights)

    def to_dict(self) -> Dict[str, Any]:
        return {'time': self.time.to_dict(), 'space': self.space.to_dict(), 'scale': self.scale}


@dataclass(frozen=True, eq=False)
class SymbolicMeasure:
    """Finite sum of product components scale * (time part) x (space part)"""
    dim: int
    components: Tuple[SymbolicComponent, ...] = ()
    norm: NormSpec = DEFAULT_NORM
    weight_dim: Optional[int] = None

    def __post_init__(self):
        components = tuple(self.components)
        object.__setattr__(self, 'components', components)
        object.__setattr__(self, 'norm', _as_norm(self.norm))
        dims = {c.space.dim for c in components}
        if dims and dims != {self.dim}:
            raise ValueError(f"Component spatial dimensions {sorted(dims)} do not match dim={self.dim}")
        ms = {c.space.weight_dim() for c in components}
        if len(ms) > 1:
            raise ValueError(f"Components carry different weight dimensions {sorted(ms)}")
        m = ms.pop() if ms else (self.weight_dim or 1)
        if self.weight_dim is not None and m != self.weight_dim:
            raise ValueError(f"Components carry weight dimension {m}, expected {self.weight_dim}")
        object.__setattr__(self, 'weight_dim', m)

    @property
    def m(self) -> int:
        return self.weight_dim

    def discretize(self, res: int) -> AtomicVectorMeasure:
        """Midpoint-rule atoms; res is the node budget per component"""
        if res < 2:
            raise ValueError(f"Quadrature resolution must be >= 2, got {res}")
        parts = [c.discretize(res) for c in self.components]
        return concatenate_all(parts, self.dim, self.m, self.norm)

    def quadrature(self, knots: Optional[Sequence[np.ndarray]] = None,
                   n_gauss: int = DEFAULT_GAUSS_NODES) -> AtomicVectorMeasure:
        """Gauss-Legendre atoms on pieces split at the given per-axis knots (time axis first)"""
        parts = [c.quadrature(knots, n_gauss) for c in self.components]
        return concatenate_all(parts, self.dim, self.m, self.norm)

    def total_variation(self) -> float:
        total = 0.0
        for c in self.components:
            space_mass = c.space.abs_mass(self.norm)
            total += abs(c.scale) * c.time.abs_mass() * space_mass
        return total

    def time_breakpoints(self) -> np.ndarray:
        values: List[float] = []
        for c in self.components:
            values.extend(c.time.breakpoints())
        return np.unique(np.asarray(values, dtype=float))

    def space_breakpoints(self) -> List[np.ndarray]:
        if not self.components:
            return [np.zeros(0) for _ in range(self.dim)]
        vertices = np.vstack([c.space_vertices() for c in self.components])
        return [np.unique(vertices[:, k]) for k in range(self.dim)]

    def bbox(self) -> Tuple[np.ndarray, np.ndarray]:
        """Bounding box of the support in (t, x)"""
        if not self.components:
            raise ValueError("Empty measure has no bounding box")
        times = self.time_breakpoints()
        vertices = np.vstack([c.space_vertices() for c in self.components])
        lower = np.concatenate([[times.min()], vertices.min(axis=0)])
        upper = np.concatenate([[times.max()], vertices.max(axis=0)])
        return lower, upper

    def __add__(self, other: 'SymbolicMeasure') -> 'SymbolicMeasure':
        if other.dim != self.dim:
            raise ValueError("Cannot add symbolic measures of different dimension")
        return SymbolicMeasure(self.dim, self.components + other.components, self.norm)

    def scaled(self, c: float) -> 'SymbolicMeasure':
        comps = tuple(SymbolicComponent(x.time, x.space, c * x.scale) for x in self.components)
        return SymbolicMeasure(self.dim, comps, self.norm, self.weight_dim)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'dim': self.dim,
            'norm': self.norm.kind,
            'components': [c.to_dict() for c in self.components],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SymbolicMeasure':
        dim = int(data['dim'])
        components = []
        for comp in data.get('components', []):
            components.append(SymbolicComponent(
                _time_from_dict(comp['time']),
                _space_from_dict(comp['space'], dim),
                float(comp.get('scale', 1.0)),
            ))
        return cls(dim, tuple(components), NormSpec(data.get('norm', 'l2')))


def _time_from_dict(data: Dict[str, Any]) -> TimePart:
    kind = data.get('kind')
    if kind == 'lebesgue':
        density = data.get('density', [1.0, 0.0])
        return LebesgueInterval(float(data['a']), float(data['b']), (float(density[0]), float(density[1])))
    if kind == 'dirac':
        return Dirac(float(data['t']))
    raise ValueError(f"Unknown time part kind: {kind}")


def _space_from_dict(data: Dict[str, Any], dim: int) -> SpacePart:
    kind = data.get('kind')
    if kind == 'atoms':
        points = np.asarray(data['points'], dtype=float).reshape(-1, dim)
        return Atoms(points, np.asarray(data['weights'], dtype=float).reshape(points.shape[0], -1))
    if kind == 'polyline':
        return TangentOnPolyline(np.asarray(data['points'], dtype=float).reshape(-1, dim),
                                 int(data.get('orientation', 1)))
    if kind == 'segment':
        return LebesgueSegment(np.asarray(data['a'], dtype=float), np.asarray(data['b'], dtype=float))
    raise ValueError(f"Unknown space part kind: {kind}")


MeasureLike = Union[AtomicVectorMeasure, SymbolicMeasure]


def to_atoms(measure: MeasureLike, knots: Optional[Sequence[np.ndarray]] = None,
             n_gauss: int = DEFAULT_GAUSS_NODES) -> AtomicVectorMeasure:
    """Atomic view of a measure; symbolic measures use Gauss-Legendre quadrature at the knots"""
    if isinstance(measure, SymbolicMeasure):
        return measure.quadrature(knots, n_gauss)
    return measure


# ==================== Time-sliced measures ====================

@dataclass(frozen=True, eq=False)
class TimeSlicedMeasure:
    """mu = L^1 x mu_t sampled on a time grid, piecewise constant in time"""
    times: np.ndarray
    slices: Tuple[AtomicVectorMeasure, ...]
    horizon: Optional[float] = None
    eps_mass: float = 1e-9

    def __post_init__(self):
        times = np.array(self.times, dtype=float).reshape(-1)
        slices = tuple(self.slices)
        if times.shape[0] == 0 or times.shape[0] != len(slices):
            raise ValueError("TimeSlicedMeasure needs one slice per time node")
        if abs(times[0]) > 1e-12:
            raise ValueError(f"Time grid must start at 0, got {times[0]}")
        if np.any(np.diff(times) <= 0):
            raise ValueError("Time grid must be strictly increasing")
        for t, sl in zip(times, slices):
            if sl.m != 1:
                raise ValueError("Slices must be scalar measures")
            if abs(sl.mass() - 1.0) > self.eps_mass or np.any(sl.weights < -self.eps_mass):
                raise ValueError(f"Slice at t={t} is not a probability measure (mass {sl.mass()})")
        horizon = self.horizon
        if horizon is None:
            horizon = times[-1] + (times[-1] - times[-2] if times.shape[0] > 1 else 1.0)
        if horizon <= times[-1]:
            raise ValueError("Horizon must exceed the last time node")
        times.setflags(write=False)
        object.__setattr__(self, 'times', times)
        object.__setattr__(self, 'slices', slices)
        object.__setattr__(self, 'horizon', float(horizon))

    @property
    def dim(self) -> int:
        return self.slices[0].dim

    def slice_index(self, t: float) -> int:
        return int(np.searchsorted(self.times, t, side='right') - 1)

    def slice_at(self, t: float) -> AtomicVectorMeasure:
        return self.slices[max(0, self.slice_index(t))]

    def to_atomic(self) -> AtomicVectorMeasure:
        """Space-time atoms: each slice weighted by its cell length at the cell start"""
        cells = np.diff(np.append(self.times, self.horizon))
        parts = []
        for t, h, sl in zip(self.times, cells, self.slices):
            parts.append(AtomicVectorMeasure(np.full(sl.n_atoms, t), sl.points, h * sl.weights, sl.norm))
        return concatenate_all(parts, self.dim, 1)

    @classmethod
    def from_symbolic(cls, mu: SymbolicMeasure, times: np.ndarray, horizon: Optional[float] = None,
                      space_res: int = 200, eps_mass: float = 1e-9) -> 'TimeSlicedMeasure':
        """Slice the time-disintegration of mu; Dirac-in-time components are skipped"""
        times = np.asarray(times, dtype=float)
        horizon = horizon if horizon is not None else float(mu.time_breakpoints().max())
        slices = [slice_symbolic(mu, float(t), horizon, space_res) for t in times]
        return cls(times, tuple(slices), horizon if horizon > times[-1] else None, eps_mass)


def slice_symbolic(mu: SymbolicMeasure, t: float, horizon: Optional[float] = None,
                   space_res: int = 200) -> AtomicVectorMeasure:
    """Scalar slice mu_t of mu = L^1 x mu_t at time t"""
    parts = []
    for c in mu.components:
        if not isinstance(c.time, LebesgueInterval):
            continue
        inside = c.time.a <= t < c.time.b or (t == c.time.b and horizon is not None and t >= horizon)
        if not inside:
            continue
        if isinstance(c.space, TangentOnPolyline):
            raise ValueError("Tangential components cannot be sliced as scalar measures")
        points, weights = c.space.midpoint_nodes(space_res)
        density = float(c.time.density_at(t))
        w = c.scale * density * weights
        keep = np.abs(w[:, 0]) > 0
        parts.append(AtomicVectorMeasure(np.full(int(keep.sum()), t), points[keep], w[keep], mu.norm))
    return concatenate_all(parts, mu.dim, 1, mu.norm)


# ==================== Decomposition and submeasures ====================

def _kd_p(norm: NormSpec) -> float:
    return {'l1': 1.0, 'l2': 2.0, 'linf': np.inf}[norm.kind]


def default_eps_loc(nu: AtomicVectorMeasure) -> float:
    """Half the minimum spacing between distinct spatial quadrature nodes of nu"""
    unique = np.unique(nu.points, axis=0) if nu.n_atoms else nu.points
    if unique.shape[0] < 2:
        return 1e-9
    tree = cKDTree(unique)
    dist, _ = tree.query(unique, k=2, p=_kd_p(nu.norm))
    return 0.5 * float(dist[:, 1].min())


def colocated_mask(nu: AtomicVectorMeasure, mu: AtomicVectorMeasure,
                   eps_loc: Optional[float] = None) -> np.ndarray:
    """Boolean mask of nu atoms lying strictly closer than eps_loc to some mu atom in (t, x)"""
    if eps_loc is None:
        eps_loc = default_eps_loc(nu)
    if eps_loc <= 0:
        raise ValueError(f"eps_loc must be positive, got {eps_loc}")
    if nu.n_atoms == 0 or mu.n_atoms == 0:
        return np.zeros(nu.n_atoms, dtype=bool)
    tree = cKDTree(mu.coords)
    dist, _ = tree.query(nu.coords, k=1, p=_kd_p(nu.norm))
    return dist < eps_loc * (1.0 - 1e-9)


def lebesgue_decompose(nu: AtomicVectorMeasure, mu: AtomicVectorMeasure,
                       eps_loc: Optional[float] = None) -> Tuple[AtomicVectorMeasure, AtomicVectorMeasure]:
    """Split nu into atoms colocated with mu (nu_ac) and the remainder (nu_perp)"""
    mask = colocated_mask(nu, mu, eps_loc)
    logger.debug(f"Lebesgue split: {int(mask.sum())} colocated / {nu.n_atoms} atoms")
    return nu.select(mask), nu.select(~mask)


def _same_grid(a: AtomicVectorMeasure, b: AtomicVectorMeasure) -> bool:
    return (a.n_atoms == b.n_atoms and a.dim == b.dim and a.m == b.m
            and np.allclose(a.times, b.times, rtol=0, atol=1e-12)
            and np.allclose(a.points, b.points, rtol=0, atol=1e-12))


def submeasure_check(zeta: AtomicVectorMeasure, theta: AtomicVectorMeasure,
                     tol: float = 1e-9) -> Tuple[bool, np.ndarray]:
    """
    Check zeta = lambda * theta atomwise with lambda in [0, 1]

    Returns:
        Tuple of (is_submeasure, lambda clipped to [0, 1])
    """
    if not _same_grid(zeta, theta):
        raise ValueError("submeasure_check needs co-discretized measures (same atom grid)")
    wz, wt = zeta.weights, theta.weights
    sq = np.sum(wt * wt, axis=1)
    nonzero = sq > 0
    lam = np.zeros(theta.n_atoms)
    lam[nonzero] = np.sum(wz[nonzero] * wt[nonzero], axis=1) / sq[nonzero]
    resid = theta.norm(wz - lam[:, None] * wt)
    scale = np.where(nonzero, theta.norm(wt), 1.0)
    parallel = resid <= tol * scale
    in_range = (lam >= -tol) & (lam <= 1.0 + tol)
    ok = bool(np.all(parallel & in_range))
    return ok, np.clip(lam, 0.0, 1.0)


def joint_variation(mu: AtomicVectorMeasure, nu: AtomicVectorMeasure) -> AtomicVectorMeasure:
    """
    Scalar measure |(mu, nu)|: co-located atoms are merged before taking norms

    mu must be scalar, nu d-vector valued, both over the same d-space.
    """
    if mu.m != 1:
        raise ValueError("joint_variation expects a scalar mu")
    if nu.n_atoms and nu.dim != mu.dim:
        raise ValueError("mu and nu must live on the same space")
    m = 1 + (nu.m if nu.n_atoms else mu.dim)
    coords = np.vstack([mu.coords, nu.coords]) if nu.n_atoms else mu.coords
    weights = np.zeros((coords.shape[0], m))
    weights[:mu.n_atoms, 0] = mu.weights[:, 0]
    if nu.n_atoms:
        weights[mu.n_atoms:, 1:] = nu.weights
    if coords.shape[0] == 0:
        return AtomicVectorMeasure.empty(mu.dim, 1, mu.norm)
    unique, inverse = np.unique(coords, axis=0, return_inverse=True)
    merged = np.zeros((unique.shape[0], m))
    np.add.at(merged, inverse.reshape(-1), weights)
    return AtomicVectorMeasure(unique[:, 0], unique[:, 1:], mu.norm(merged)[:, None], mu.norm)
