# utils/singular_flux/validations.py
"""
Validation functions for measure, curve and ensemble input files
and for run configurations
"""

import logging
import math
from dataclasses import asdict, is_dataclass
from typing import Any, Dict, List, Tuple

from .measures import NORM_KINDS

logger = logging.getLogger(__name__)

TIME_KINDS = ('lebesgue', 'dirac')
SPACE_KINDS = ('atoms', 'polyline', 'segment')
MIN_BASIS_GRID = 8
WEIGHT_SUM_TOL = 1e-9


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def _is_matrix(value: Any, width: int) -> bool:
    """List of rows of `width` finite numbers; 1-D lists are accepted when width is 1"""
    if not isinstance(value, list) or not value:
        return False
    for row in value:
        if width == 1 and _is_number(row):
            continue
        if not isinstance(row, list) or len(row) != width or not all(_is_number(v) for v in row):
            return False
    return True


def _validate_time_part(part: Dict, label: str) -> List[str]:
    errors = []
    kind = part.get('kind') if isinstance(part, dict) else None
    if kind not in TIME_KINDS:
        return [f"{label}: unknown time kind {kind!r} (expected one of {', '.join(TIME_KINDS)})"]
    if kind == 'lebesgue':
        a, b = part.get('a'), part.get('b')
        if not (_is_number(a) and _is_number(b)):
            errors.append(f"{label}: lebesgue interval needs numeric a and b")
        elif not a < b:
            errors.append(f"{label}: lebesgue interval needs a < b, got [{a}, {b}]")
        elif a < 0:
            errors.append(f"{label}: time interval must lie in t >= 0")
        density = part.get('density', [1.0, 0.0])
        if not (isinstance(density, list) and len(density) == 2 and all(_is_number(c) for c in density)):
            errors.append(f"{label}: density must be [c0, c1]")
    else:
        t = part.get('t')
        if not _is_number(t) or t < 0:
            errors.append(f"{label}: dirac time must be a number >= 0")
    return errors


def _validate_space_part(part: Dict, dim: int, label: str) -> List[str]:
    errors = []
    kind = part.get('kind') if isinstance(part, dict) else None
    if kind not in SPACE_KINDS:
        return [f"{label}: unknown space kind {kind!r} (expected one of {', '.join(SPACE_KINDS)})"]
    if kind == 'atoms':
        points, weights = part.get('points'), part.get('weights')
        if not _is_matrix(points, dim):
            errors.append(f"{label}: atom points must be rows of {dim} numbers")
        elif not isinstance(weights, list) or len(weights) != len(points):
            errors.append(f"{label}: one weight per atom point is required")
        else:
            arity = 1 if _is_number(weights[0]) else len(weights[0]) if isinstance(weights[0], list) else 0
            if arity not in (1, dim, dim + 1) or not _is_matrix(weights, arity):
                errors.append(f"{label}: atom weights must have arity 1, d or d + 1 (d = {dim})")
    elif kind == 'polyline':
        points = part.get('points')
        if not _is_matrix(points, dim) or len(points) < 2:
            errors.append(f"{label}: polyline needs at least 2 vertices of dimension {dim}")
        else:
            rows = [tuple(p) if isinstance(p, list) else (p,) for p in points]
            if len(set(rows)) < 2:
                errors.append(f"{label}: polyline needs at least 2 distinct vertices")
            if any(a == b for a, b in zip(rows[:-1], rows[1:])):
                errors.append(f"{label}: polyline has a degenerate segment (repeated consecutive vertex)")
        if part.get('orientation', 1) not in (1, -1):
            errors.append(f"{label}: orientation must be +1 or -1")
    else:
        a, b = part.get('a'), part.get('b')
        if not (_is_matrix([a], dim) and _is_matrix([b], dim)):
            errors.append(f"{label}: segment endpoints must have dimension {dim}")
        elif a == b:
            errors.append(f"{label}: degenerate segment (a equals b)")
    return errors


def validate_measure_json(data: Dict) -> Tuple[bool, List[str]]:
    """
    Validate a symbolic measure document

    Args:
        data: {"dim": d, "norm": ..., "components": [{"time": ..., "space": ..., "scale": ...}]}

    Returns:
        Tuple of (is_valid, list_of_errors)
    """
    errors = []
    if not isinstance(data, dict):
        return False, ["Measure must be a JSON object"]

    # 1. Dimension and norm
    dim = data.get('dim')
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        errors.append(f"dim must be an integer >= 1, got {dim!r}")
        return False, errors
    if data.get('norm', 'l2') not in NORM_KINDS:
        errors.append(f"norm must be one of {', '.join(NORM_KINDS)}")

    # 2. Components
    components = data.get('components', [])
    if not isinstance(components, list):
        errors.append("components must be a list")
        return False, errors
    for k, comp in enumerate(components):
        label = f"Component {k + 1}"
        if not isinstance(comp, dict):
            errors.append(f"{label}: must be an object")
            continue
        errors.extend(_validate_time_part(comp.get('time'), label))
        errors.extend(_validate_space_part(comp.get('space'), dim, label))
        if not _is_number(comp.get('scale', 1.0)):
            errors.append(f"{label}: scale must be finite")

    return len(errors) == 0, errors


def validate_pair_json(data: Dict) -> Tuple[bool, List[str]]:
    """Validate {"mu": ..., "nu": ..., "mu0": ...} with matching dimensions"""
    errors = []
    if not isinstance(data, dict):
        return False, ["Input must be a JSON object"]
    for key in ('mu', 'nu', 'mu0'):
        if key not in data:
            errors.append(f"Missing required field: {key}")
            continue
        ok, sub = validate_measure_json(data[key])
        errors.extend(f"{key}: {e}" for e in sub)
    if not errors:
        dims = {data[k]['dim'] for k in ('mu', 'nu', 'mu0')}
        if len(dims) > 1:
            errors.append(f"mu, nu and mu0 must share the spatial dimension, got {sorted(dims)}")
    return len(errors) == 0, errors


def validate_curve_json(data: Dict) -> Tuple[bool, List[str]]:
    """Validate {"breakpoints": [...], "points": [[t, x...], ...]}"""
    errors = []
    if not isinstance(data, dict):
        return False, ["Curve must be a JSON object"]
    s, points = data.get('breakpoints'), data.get('points')
    if not isinstance(s, list) or not s or not all(_is_number(v) for v in s):
        errors.append("breakpoints must be a non-empty list of numbers")
        return False, errors
    width = len(points[0]) if isinstance(points, list) and points and isinstance(points[0], list) else 0
    if width < 2 or not _is_matrix(points, width):
        errors.append("points must be rows (t, x1, ..., xd) with d >= 1")
        return False, errors
    if len(points) != len(s):
        errors.append("One point per breakpoint is required")
    if abs(s[0]) > 1e-12:
        errors.append("breakpoints must start at 0")
    if any(b <= a for a, b in zip(s[:-1], s[1:])):
        errors.append("breakpoints must be strictly increasing")
    if any(q[0] < p[0] - 1e-12 for p, q in zip(points[:-1], points[1:])):
        errors.append("time component must be nondecreasing")
    return len(errors) == 0, errors


def validate_abv_json(data: Dict) -> Tuple[bool, List[str]]:
    """Validate {"times": [...], "values": [[x...], ...], "jumps": [{"t": ..., "path": [...]}]}"""
    errors = []
    if not isinstance(data, dict):
        return False, ["ABV curve must be a JSON object"]
    times, values = data.get('times'), data.get('values')
    if not isinstance(times, list) or not times or not all(_is_number(v) for v in times):
        return False, ["times must be a non-empty list of numbers"]
    width = len(values[0]) if isinstance(values, list) and values and isinstance(values[0], list) else 1
    if not _is_matrix(values, width) or len(values) != len(times):
        errors.append("values must hold one skeleton point per sample time")
    if any(b <= a for a, b in zip(times[:-1], times[1:])):
        errors.append("times must be strictly increasing")
    for k, jump in enumerate(data.get('jumps', [])):
        if not isinstance(jump, dict) or not _is_number(jump.get('t')):
            errors.append(f"Jump {k + 1}: needs a numeric time t")
            continue
        if jump['t'] not in times:
            errors.append(f"Jump {k + 1}: time {jump['t']} is not a sample time")
        path = jump.get('path')
        if not _is_matrix(path, width) or len(path) < 2:
            errors.append(f"Jump {k + 1}: path needs at least 2 points of dimension {width}")
    return len(errors) == 0, errors


def validate_ensemble_json(data: Dict) -> Tuple[bool, List[str]]:
    """Validate {"weights": [...], "curves": [<curve>...], "s_max": ..., "s_step": ...}"""
    errors = []
    if not isinstance(data, dict):
        return False, ["Ensemble must be a JSON object"]
    weights, curves = data.get('weights'), data.get('curves')
    if not isinstance(curves, list) or not curves:
        return False, ["curves must be a non-empty list"]
    if not isinstance(weights, list) or len(weights) != len(curves) or not all(_is_number(w) for w in weights):
        errors.append("One numeric weight per curve is required")
    else:
        if any(w < 0 for w in weights):
            errors.append("Weights must be nonnegative")
        if abs(sum(weights) - 1.0) > WEIGHT_SUM_TOL:
            errors.append(f"Weights must sum to 1, got {sum(weights):.12g}")
    for k, curve in enumerate(curves):
        ok, sub = validate_curve_json(curve)
        errors.extend(f"Curve {k + 1}: {e}" for e in sub)
        if ok and abs(curve['points'][0][0]) > 1e-12:
            errors.append(f"Curve {k + 1}: must start at t = 0")
    for key in ('s_max', 's_step'):
        value = data.get(key)
        if value is not None and (not _is_number(value) or value <= 0):
            errors.append(f"{key} must be positive")
    return len(errors) == 0, errors


def validate_run_config(cfg: Any) -> Tuple[bool, List[str]]:
    """
    Validate numeric knobs of a run configuration

    Args:
        cfg: RunConfig dataclass or plain dictionary

    Returns:
        Tuple of (is_valid, list_of_errors)
    """
    data = asdict(cfg) if is_dataclass(cfg) else dict(cfg)
    errors = []

    positive = ['tol', 'eps', 'grid_step', 'ds', 's_max', 'eps_con', 'eps_flat']
    for key in positive:
        value = data.get(key)
        if value is not None and (not _is_number(value) or value <= 0):
            errors.append(f"{key} must be positive, got {value!r}")

    if data.get('eps_loc') is not None and (not _is_number(data['eps_loc']) or data['eps_loc'] <= 0):
        errors.append(f"eps_loc must be positive, got {data['eps_loc']!r}")

    for key in ('starts', 'n_curves', 'n'):
        value = data.get(key)
        if value is not None and (not isinstance(value, int) or value < 1):
            errors.append(f"{key} must be an integer >= 1, got {value!r}")

    grid = data.get('basis_grid')
    if grid is not None and (not isinstance(grid, int) or grid < MIN_BASIS_GRID):
        errors.append(f"basis_grid must be an integer >= {MIN_BASIS_GRID}, got {grid!r}")

    if data.get('norm') is not None and data['norm'] not in NORM_KINDS:
        errors.append(f"norm must be one of {', '.join(NORM_KINDS)}")

    seed = data.get('seed')
    if seed is not None and (not isinstance(seed, int) or seed < 0):
        errors.append(f"seed must be a nonnegative integer, got {seed!r}")

    return len(errors) == 0, errors


def get_validation_summary(errors: List[str]) -> str:
    """
    Format validation errors for display

    Args:
        errors: List of error messages

    Returns:
        Formatted error summary
    """
    if not errors:
        return "All validations passed"

    if len(errors) == 1:
        return f"Validation error: {errors[0]}"

    summary = f"Found {len(errors)} validation errors:\n"
    for i, error in enumerate(errors[:10], 1):
        summary += f"{i}. {error}\n"

    if len(errors) > 10:
        summary += f"... and {len(errors) - 10} more errors"

    return summary
