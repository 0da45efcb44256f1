# utils/singular_flux/examples_corpus.py
"""
Closed-form measure pairs with singular flux and their representing ensembles

Each fixture carries symbolic (mu, nu, mu0) on the window [0, horizon], the
curve ensemble that represents the pair where one exists, and the expected
values the checks are measured against.
"""

import logging
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .curves import LipCurve, stationary_curve
from .measures import (
    Atoms,
    DEFAULT_NORM,
    Dirac,
    LebesgueInterval,
    LebesgueSegment,
    NormSpec,
    SymbolicComponent,
    SymbolicMeasure,
    TangentOnPolyline,
    _as_norm,
    slice_symbolic,
)
from .superposition import SuperpositionMeasure
from .weak_form import DEFAULT_KNOTS, TestBasis, initial_datum

logger = logging.getLogger(__name__)

HORIZON = 2.0
T0 = 0.5
CIRCLE_SEGMENTS = 128
ARC_SEGMENTS = 64
DEFAULT_CURVES = 200
DEFAULT_LOOPS = 10
MEMBERSHIP_TOL = 1e-9

EXAMPLE_IDS = ("2.5", "7.1", "7.2", "7.3", "7.3b", "7.4(n)", "7.5", "7.6")


# ==================== Fixture type ====================

@dataclass(eq=False)
class ExampleFixture:
    """Symbolic (mu, nu, mu0) with an optional representing ensemble"""
    id: str
    mu: SymbolicMeasure
    nu: SymbolicMeasure
    mu0: SymbolicMeasure
    eta: Optional[SuperpositionMeasure] = None
    horizon: float = HORIZON
    representable: bool = True
    expectations: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    metadata: Dict[str, Any] = field(default_factory=dict)
    alternatives: Dict[str, SuperpositionMeasure] = field(default_factory=dict)
    references: Dict[str, SymbolicMeasure] = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.mu.dim

    def expected(self, name: str) -> Any:
        return self.expectations[name]['value']

    def basis(self, n_knots: int = DEFAULT_KNOTS) -> TestBasis:
        """Spline basis covering the fixture and vanishing at the horizon"""
        return TestBasis.auto([self.mu, self.nu], n_knots, self.horizon)

    def slice_at(self, t: float, space_res: int = 200):
        return slice_symbolic(self.mu, t, self.horizon, space_res)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'id': self.id,
            'horizon': self.horizon,
            'representable': self.representable,
            'mu': self.mu.to_dict(),
            'nu': self.nu.to_dict(),
            'mu0': self.mu0.to_dict(),
            'expectations': self.expectations,
            'metadata': self.metadata,
        }


def _expect(value: Any, source: str) -> Dict[str, Any]:
    return {'value': value, 'source': source}


# ==================== Geometry helpers ====================

def stratified(n: int) -> np.ndarray:
    """Midpoints (j - 1/2) / n of a uniform partition of [0, 1]"""
    if n < 1:
        raise ValueError(f"Number of curves must be >= 1, got {n}")
    return (np.arange(n) + 0.5) / n


def circle_polyline(n_segments: int = CIRCLE_SEGMENTS, center: Sequence[float] = (0.0, 0.0),
                    radius: float = 1.0) -> np.ndarray:
    """Closed counter-clockwise polygon inscribed in a circle, starting at angle 0"""
    angles = 2.0 * np.pi * np.arange(n_segments) / n_segments
    pts = np.column_stack([np.cos(angles), np.sin(angles)]) * radius + np.asarray(center, dtype=float)
    return np.vstack([pts, pts[:1]])


def quarter_arc(n_segments: int = ARC_SEGMENTS) -> np.ndarray:
    """Polyline on (1 - cos a, sin a), a in [0, pi/2], from (0, 0) to (1, 1)"""
    a = 0.5 * np.pi * np.arange(n_segments + 1) / n_segments
    pts = np.column_stack([1.0 - np.cos(a), np.sin(a)])
    pts[0], pts[-1] = (0.0, 0.0), (1.0, 1.0)
    return pts


def _point(x: Sequence[float]) -> np.ndarray:
    return np.asarray(x, dtype=float).reshape(1, -1)


def _dirac_space(x: Sequence[float]) -> Atoms:
    return Atoms(_point(x), np.ones((1, 1)))


def _lebesgue(a: float, b: float, density: Tuple[float, float] = (1.0, 0.0)) -> LebesgueInterval:
    return LebesgueInterval(a, b, density)


def transfer_mu(x0: Sequence[float], x1: Sequence[float], horizon: float, norm: NormSpec,
                scale: float = 1.0) -> SymbolicMeasure:
    """(1 - t) delta_x0 + t delta_x1 on [0, 1], then delta_x1 up to the horizon"""
    dim = len(x0)
    comps = (
        SymbolicComponent(_lebesgue(0.0, 1.0, (1.0, -1.0)), _dirac_space(x0), scale),
        SymbolicComponent(_lebesgue(0.0, 1.0, (0.0, 1.0)), _dirac_space(x1), scale),
        SymbolicComponent(_lebesgue(1.0, horizon), _dirac_space(x1), scale),
    )
    return SymbolicMeasure(dim, comps, norm)


def jump_curves(path: np.ndarray, t_bars: np.ndarray, horizon: float, norm: NormSpec) -> List[LipCurve]:
    """Wait at path[0] until t_bar, run along the path with frozen time, then wait at path[-1]"""
    path = np.asarray(path, dtype=float)
    curves = []
    for t_bar in t_bars:
        start = np.concatenate([[0.0], path[0]])
        transit = np.column_stack([np.full(path.shape[0], t_bar), path])
        end = np.concatenate([[horizon], path[-1]])
        curves.append(LipCurve.from_vertices(np.vstack([start, transit, end]), norm))
    return curves


def _uniform(curves: List[LipCurve], s_max: Optional[float] = None) -> SuperpositionMeasure:
    return SuperpositionMeasure(curves, np.full(len(curves), 1.0 / len(curves)), s_max)


def loop_curve(start: Sequence[float], loop: np.ndarray, t_loop: float, horizon: float, norm: NormSpec,
               n_loops: int = 1) -> LipCurve:
    """Wait at start, go n_loops times around the closed polyline at t_loop, then wait again"""
    loop = np.asarray(loop, dtype=float)
    body = np.vstack([loop[:-1]] * n_loops + [loop[-1:]])
    vertices = np.vstack([
        np.concatenate([[0.0], start]),
        np.column_stack([np.full(body.shape[0], t_loop), body]),
        np.concatenate([[horizon], start]),
    ])
    return LipCurve.from_vertices(vertices, norm)


# ==================== Builders ====================

def _build_transfer(example_id: str, path: np.ndarray, n_curves: int, horizon: float,
                    norm: NormSpec) -> ExampleFixture:
    """Mass moving from path[0] to path[-1] along the path, diffusely in time on [0, 1]"""
    x0, x1 = path[0], path[-1]
    dim = path.shape[1]
    mu = transfer_mu(x0, x1, horizon, norm)
    if dim == 1:
        space = LebesgueSegment(x0, x1)
    else:
        space = TangentOnPolyline(path)
    nu = SymbolicMeasure(dim, (SymbolicComponent(_lebesgue(0.0, 1.0), space),), norm)
    mu0 = initial_datum(_point(x0), norm=norm)
    eta = _uniform(jump_curves(path, stratified(n_curves), horizon, norm))
    length = float(np.sum(np.sqrt(np.sum(np.diff(path, axis=0) ** 2, axis=1))))
    return ExampleFixture(
        id=example_id, mu=mu, nu=nu, mu0=mu0, eta=eta, horizon=horizon,
        metadata={'x0': x0.tolist(), 'x1': x1.tolist(), 'path': path.tolist(), 'n_curves': n_curves},
        expectations={
            'tv_nu': _expect(length, 'derived'),
            'lambda_min': _expect(1.0, 'closed_form'),
        },
    )


def build_7_1(n_curves: int = DEFAULT_CURVES, horizon: float = HORIZON,
              norm: NormSpec = DEFAULT_NORM) -> ExampleFixture:
    fixture = _build_transfer("7.1", np.array([[0.0], [1.0]]), n_curves, horizon, norm)
    fixture.expectations.update({
        'w1_slices': _expect('|t - s|', 'closed_form'),
        'var_w1': _expect(1.0, 'closed_form'),
        'segment_check': _expect(True, 'closed_form'),
        'injective': _expect(True, 'closed_form'),
    })
    return fixture


def build_2_5(n_curves: int = DEFAULT_CURVES, horizon: float = HORIZON,
              norm: NormSpec = DEFAULT_NORM) -> ExampleFixture:
    path = np.array([[0.0, 0.0], [0.5, 0.3], [1.0, 0.0]])
    return _build_transfer("2.5", path, n_curves, horizon, norm)


def build_7_5(n_curves: int = DEFAULT_CURVES, horizon: float = HORIZON,
              norm: NormSpec = DEFAULT_NORM) -> ExampleFixture:
    fixture = _build_transfer("7.5", quarter_arc(), n_curves, horizon, norm)
    fixture.metadata['arc'] = f'quarter circle (1 - cos a, sin a), {ARC_SEGMENTS} segments'
    fixture.expectations['injective'] = _expect(True, 'closed_form')
    return fixture


def _circle_flux(time_part, norm: NormSpec) -> SymbolicMeasure:
    return SymbolicMeasure(2, (SymbolicComponent(time_part, TangentOnPolyline(circle_polyline())),), norm)


def build_7_2(horizon: float = HORIZON, norm: NormSpec = DEFAULT_NORM) -> ExampleFixture:
    """Mass at the centre of a circle carrying a rotating flux at one instant"""
    x0 = np.array([0.0, 0.0])
    mu = SymbolicMeasure(2, (SymbolicComponent(_lebesgue(0.0, horizon), _dirac_space(x0)),), norm)
    nu = _circle_flux(Dirac(T0), norm)
    circulation = float(nu.quadrature().pair(lambda t, X: np.column_stack([-X[:, 1], X[:, 0]])))
    return ExampleFixture(
        id="7.2", mu=mu, nu=nu, mu0=initial_datum(_point(x0), norm=norm), eta=None, horizon=horizon,
        representable=False,
        metadata={'x0': x0.tolist(), 't0': T0, 'circle_segments': CIRCLE_SEGMENTS},
        expectations={
            'minimal_objective': _expect(0.0, 'closed_form'),
            'push_nu': _expect(0.0, 'closed_form'),
            'tangent_pairing': _expect(circulation, 'derived'),
        },
    )


def build_7_3(horizon: float = HORIZON, norm: NormSpec = DEFAULT_NORM) -> ExampleFixture:
    """Mass on the circle itself running once around it at t0"""
    x1 = np.array([1.0, 0.0])
    mu = SymbolicMeasure(2, (SymbolicComponent(_lebesgue(0.0, horizon), _dirac_space(x1)),), norm)
    nu = _circle_flux(Dirac(T0), norm)
    curve = loop_curve(x1, circle_polyline(), T0, horizon, norm)
    return ExampleFixture(
        id="7.3", mu=mu, nu=nu, mu0=initial_datum(_point(x1), norm=norm),
        eta=SuperpositionMeasure([curve], np.ones(1)), horizon=horizon,
        metadata={'x1': x1.tolist(), 't0': T0, 'circle_segments': CIRCLE_SEGMENTS},
        expectations={
            'segment_check': _expect(False, 'closed_form'),
            'injective': _expect(False, 'derived'),
            'minimal_objective': _expect(0.0, 'derived'),
        },
    )


def build_7_3b(n_curves: int = DEFAULT_CURVES, horizon: float = HORIZON,
               norm: NormSpec = DEFAULT_NORM) -> ExampleFixture:
    """Circle flux spread uniformly over t in [0, 1]"""
    x1 = np.array([1.0, 0.0])
    mu = SymbolicMeasure(2, (SymbolicComponent(_lebesgue(0.0, horizon), _dirac_space(x1)),), norm)
    nu = _circle_flux(_lebesgue(0.0, 1.0), norm)
    curves = [loop_curve(x1, circle_polyline(), t_bar, horizon, norm) for t_bar in stratified(n_curves)]
    return ExampleFixture(
        id="7.3b", mu=mu, nu=nu, mu0=initial_datum(_point(x1), norm=norm), eta=_uniform(curves),
        horizon=horizon,
        metadata={'x1': x1.tolist(), 'circle_segments': CIRCLE_SEGMENTS, 'n_curves': n_curves},
        expectations={'segment_check': _expect(False, 'derived')},
    )


def build_7_4(n: int = DEFAULT_LOOPS, horizon: float = HORIZON,
              norm: NormSpec = DEFAULT_NORM) -> ExampleFixture:
    """
    Mass 1/n on the circle looping n times against mass 1 - 1/n at the centre

    The ensembles converge weak* to the stationary curve at the centre, which
    carries no flux, while nu stays fixed.
    """
    if n < 1:
        raise ValueError(f"Example 7.4 needs n >= 1, got {n}")
    x0, x1 = np.array([0.0, 0.0]), np.array([1.0, 0.0])
    p = 1.0 / n
    comps = [SymbolicComponent(_lebesgue(0.0, horizon), _dirac_space(x1), p)]
    if n > 1:
        comps.insert(0, SymbolicComponent(_lebesgue(0.0, horizon), _dirac_space(x0), 1.0 - p))
    mu = SymbolicMeasure(2, tuple(comps), norm)
    nu = _circle_flux(Dirac(T0), norm)
    if n > 1:
        mu0 = initial_datum(np.vstack([x0, x1]), np.array([1.0 - p, p]), norm)
    else:
        mu0 = initial_datum(_point(x1), norm=norm)

    y0 = stationary_curve(x0, horizon, norm)
    y1 = loop_curve(x1, circle_polyline(), T0, horizon, norm, n_loops=n)
    if n > 1:
        eta = SuperpositionMeasure([y0, y1], np.array([1.0 - p, p]))
    else:
        eta = SuperpositionMeasure([y1], np.ones(1))
    limit_mu = SymbolicMeasure(2, (SymbolicComponent(_lebesgue(0.0, horizon), _dirac_space(x0)),), norm)
    return ExampleFixture(
        id=f"7.4({n})", mu=mu, nu=nu, mu0=mu0, eta=eta, horizon=horizon,
        metadata={'n': n, 'x0': x0.tolist(), 'x1': x1.tolist(), 't0': T0},
        alternatives={'weak_star_limit': SuperpositionMeasure([y0], np.ones(1))},
        references={'mu_limit': limit_mu},
        expectations={'limit_nu_deviation': _expect(2.0 * np.pi, 'derived')},
    )


def build_7_6(n_curves: int = DEFAULT_CURVES, horizon: float = HORIZON,
              norm: NormSpec = DEFAULT_NORM) -> ExampleFixture:
    """
    Half of the mass transfers as in 7.1, the other half is spread on (0, 1)

    The flux is absolutely continuous with respect to mu. On t < 1 the interior
    mass moves with dx/dt = 1, so curves leaving 0 and interior curves run
    diagonally until t = 1 or until they reach x = 1.
    """
    mu = transfer_mu([0.0], [1.0], horizon, norm, 0.5)
    interior = LebesgueSegment([0.0], [1.0])
    # split at t = 1 so the interior quadrature nodes coincide with those of nu
    resting = (SymbolicComponent(_lebesgue(0.0, 1.0), interior, 0.5),
               SymbolicComponent(_lebesgue(1.0, horizon), interior, 0.5))
    mu = SymbolicMeasure(1, mu.components + resting, norm)
    nu = SymbolicMeasure(1, (SymbolicComponent(_lebesgue(0.0, 1.0), interior, 0.5),), norm)
    mu0 = SymbolicMeasure(1, (
        SymbolicComponent(Dirac(0.0), _dirac_space([0.0]), 0.5),
        SymbolicComponent(Dirac(0.0), interior, 0.5),
    ), norm)

    grid = stratified(n_curves)
    departing = [LipCurve.from_vertices(np.array([[0.0, 0.0], [t, 0.0], [1.0, 1.0 - t], [horizon, 1.0 - t]]), norm)
                 for t in grid]
    moving = [LipCurve.from_vertices(np.array([[0.0, x], [1.0 - x, 1.0], [horizon, 1.0]]), norm) for x in grid]
    eta = SuperpositionMeasure(departing + moving, np.full(2 * n_curves, 0.5 / n_curves))

    jumping = jump_curves(np.array([[0.0], [1.0]]), grid, horizon, norm)
    still = [stationary_curve([x], horizon, norm) for x in grid]
    alternative = SuperpositionMeasure(jumping + still, np.full(2 * n_curves, 0.5 / n_curves))

    return ExampleFixture(
        id="7.6", mu=mu, nu=nu, mu0=mu0, eta=eta, horizon=horizon,
        metadata={'n_curves': n_curves, 'nu_window': [0.0, 1.0]},
        alternatives={'alternative': alternative},
        expectations={
            'interior_field': _expect([1.0 / np.sqrt(2.0), 1.0 / np.sqrt(2.0)], 'closed_form'),
            'alternative_residual_min': _expect(0.2, 'closed_form'),
            'injective': _expect(True, 'closed_form'),
        },
    )


def _parse_id(example_id: str) -> Tuple[str, Optional[int]]:
    match = re.fullmatch(r"7\.4(?:\((\d+)\))?", example_id.strip())
    if match:
        return "7.4(n)", int(match.group(1)) if match.group(1) else DEFAULT_LOOPS
    return example_id.strip(), None


def build(example_id: str, n_curves: int = DEFAULT_CURVES, horizon: float = HORIZON,
          norm: Optional[str] = None) -> ExampleFixture:
    """
    Build a fixture by id

    Args:
        example_id: one of EXAMPLE_IDS; "7.4(n)" takes the loop count, e.g. "7.4(10)"
        n_curves: number of stratified curves for diffuse-in-time ensembles
        horizon: end of the time window
        norm: norm on (t, x) for curves and variations

    Returns:
        ExampleFixture
    """
    key, n = _parse_id(example_id)
    norm_spec = _as_norm(norm)
    builders: Dict[str, Callable[[], ExampleFixture]] = {
        "2.5": lambda: build_2_5(n_curves, horizon, norm_spec),
        "7.1": lambda: build_7_1(n_curves, horizon, norm_spec),
        "7.2": lambda: build_7_2(horizon, norm_spec),
        "7.3": lambda: build_7_3(horizon, norm_spec),
        "7.3b": lambda: build_7_3b(n_curves, horizon, norm_spec),
        "7.4(n)": lambda: build_7_4(n, horizon, norm_spec),
        "7.5": lambda: build_7_5(n_curves, horizon, norm_spec),
        "7.6": lambda: build_7_6(n_curves, horizon, norm_spec),
    }
    if key not in builders:
        raise ValueError(f"Unknown example id: {example_id!r} (expected one of {', '.join(EXAMPLE_IDS)})")
    fixture = builders[key]()
    logger.debug(f"Built fixture {fixture.id}")
    return fixture


# ==================== Closed-form fields ====================

class ClosedFormField:
    """(tau, v) evaluated from a closed-form rule; defined everywhere"""

    def __init__(self, rule: Callable[[np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray]],
                 dim: int, label: str = ''):
        self.rule = rule
        self._dim = dim
        self.label = label

    @property
    def dim(self) -> int:
        return self._dim

    def __call__(self, t: np.ndarray, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        t = np.asarray(t, dtype=float).reshape(-1)
        X = np.asarray(X, dtype=float).reshape(t.shape[0], self._dim)
        return self.rule(t, X)

    def contains(self, coords: np.ndarray) -> np.ndarray:
        return np.ones(np.atleast_2d(coords).shape[0], dtype=bool)


def _rest(n: int, dim: int) -> Tuple[np.ndarray, np.ndarray]:
    return np.ones(n), np.zeros((n, dim))


def _on_polyline(X: np.ndarray, path: np.ndarray, tol: float) -> Tuple[np.ndarray, np.ndarray]:
    """Mask of points on the polyline and the unit tangent of the nearest segment"""
    a = path[:-1]
    d = np.diff(path, axis=0)
    lengths2 = np.sum(d * d, axis=1)
    rel = X[:, None, :] - a[None, :, :]
    u = np.clip(np.sum(rel * d[None], axis=2) / lengths2[None], 0.0, 1.0)
    gap = rel - u[..., None] * d[None]
    dist = np.sqrt(np.sum(gap * gap, axis=2))
    k = np.argmin(dist, axis=1)
    tangents = d / np.sqrt(lengths2)[:, None]
    return dist[np.arange(X.shape[0]), k] <= tol, tangents[k]


def _transfer_rule(path: np.ndarray) -> Callable:
    """v = unit tangent on the open path for t < 1, tau = 1 elsewhere (endpoints included)"""
    x0, x1 = path[0], path[-1]

    def rule(t, X):
        tau, v = _rest(t.shape[0], X.shape[1])
        on, tangent = _on_polyline(X, path, MEMBERSHIP_TOL)
        at_end = (np.sqrt(np.sum((X - x0) ** 2, axis=1)) <= MEMBERSHIP_TOL) | \
                 (np.sqrt(np.sum((X - x1) ** 2, axis=1)) <= MEMBERSHIP_TOL)
        moving = on & ~at_end & (t < 1.0)
        tau[moving] = 0.0
        v[moving] = tangent[moving]
        return tau, v
    return rule


def _circle_rule(active: Callable[[np.ndarray], np.ndarray]) -> Callable:
    """v = counter-clockwise unit tangent on the unit circle while active(t)"""
    band = 1.0 - np.cos(np.pi / CIRCLE_SEGMENTS) + MEMBERSHIP_TOL

    def rule(t, X):
        tau, v = _rest(t.shape[0], 2)
        r = np.sqrt(np.sum(X * X, axis=1))
        on = (np.abs(r - 1.0) <= band) & active(t)
        tau[on] = 0.0
        v[on] = np.column_stack([-X[on, 1], X[on, 0]]) / r[on, None]
        return tau, v
    return rule


def _diagonal_rule(t, X):
    tau, v = _rest(t.shape[0], 1)
    inside = (X[:, 0] > MEMBERSHIP_TOL) & (X[:, 0] < 1.0 - MEMBERSHIP_TOL) & (t < 1.0)
    tau[inside] = 1.0 / np.sqrt(2.0)
    v[inside, 0] = 1.0 / np.sqrt(2.0)
    return tau, v


def expected_fields(example_id: str) -> ClosedFormField:
    """
    Normalized (tau, v) of a fixture in closed form

    Off the supports of mu and nu the field is (1, 0), i.e. curves rest.
    """
    key, _ = _parse_id(example_id)
    if key == "7.1":
        return ClosedFormField(_transfer_rule(np.array([[0.0], [1.0]])), 1, key)
    if key == "2.5":
        return ClosedFormField(_transfer_rule(np.array([[0.0, 0.0], [0.5, 0.3], [1.0, 0.0]])), 2, key)
    if key == "7.5":
        return ClosedFormField(_transfer_rule(quarter_arc()), 2, key)
    if key in ("7.2", "7.3", "7.4(n)"):
        return ClosedFormField(_circle_rule(lambda t: np.abs(t - T0) <= MEMBERSHIP_TOL), 2, key)
    if key == "7.3b":
        return ClosedFormField(_circle_rule(lambda t: t <= 1.0), 2, key)
    if key == "7.6":
        return ClosedFormField(_diagonal_rule, 1, key)
    raise ValueError(f"Unknown example id: {example_id!r}")


def tangent_test_field(t0: float = T0, width: float = 0.25) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    """
    Vector test field b(t) (-x2, x1) with a C1 bump b centred at t0

    On the unit circle it is the counter-clockwise tangent at t = t0.
    """
    if width <= 0:
        raise ValueError(f"Bump width must be positive, got {width}")

    def phi(t: np.ndarray, X: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float).reshape(-1)
        X = np.asarray(X, dtype=float).reshape(t.shape[0], 2)
        r = (t - t0) / width
        bump = np.where(np.abs(r) < 1.0, (1.0 - r * r) ** 2, 0.0)
        return bump[:, None] * np.column_stack([-X[:, 1], X[:, 0]])
    return phi


def flux_pairing(measure, phi: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> float:
    """<nu, phi> for a flux measure, or sum_j p_j int phi(y) . x' ds for an ensemble"""
    if isinstance(measure, SuperpositionMeasure):
        omega = measure.omega()
        return omega.pair(lambda t, X: np.column_stack([np.zeros(t.shape[0]), phi(t, X)]))
    if isinstance(measure, SymbolicMeasure):
        measure = measure.quadrature()
    return measure.pair(phi)
