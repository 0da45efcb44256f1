# utils/singular_flux/minimal_flux.py
"""
Minimal flux submeasures by linear programming

For a vector measure theta with atoms (t_i, x_i, w_i) the minimal submeasure
zeta = lambda * theta solves

    min  sum_i ||w_i|| lambda_i
    s.t. |sum_i (1 - lambda_i) D phi_k(t_i, x_i) . w_i| <= eps_k   for every basis phi_k
         0 <= lambda_i <= 1

lambda = 1 is always feasible, so the optimum never exceeds |theta|.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np
from scipy.optimize import linprog

from .measures import (
    AtomicVectorMeasure,
    MeasureLike,
    colocated_mask,
    to_atoms,
)
from .weak_form import TestBasis, divergence_matrix

logger = logging.getLogger(__name__)

DEFAULT_EPS_CON = 1e-8
MAX_PIVOTS = 1_000_000
SOLVER_TOL = 1e-10
IDENTITY_SNAP = 1e-6


class LpSolveError(RuntimeError):
    """LP backend stopped without an optimal solution"""


@dataclass(eq=False)
class LpProblem:
    """Box-bounded LP with relaxed equality rows A (1 - lambda) = 0"""
    cost: np.ndarray
    rows: np.ndarray
    eps: np.ndarray

    def __post_init__(self):
        self.cost = np.asarray(self.cost, dtype=float).reshape(-1)
        n = self.cost.shape[0]
        rows = np.asarray(self.rows, dtype=float)
        self.rows = np.zeros((0, n)) if rows.size == 0 else rows.reshape(-1, n)
        self.eps = np.asarray(self.eps, dtype=float).reshape(-1)
        if self.eps.shape[0] != self.rows.shape[0]:
            raise ValueError("One relaxation per constraint row is required")
        if np.any(self.eps <= 0):
            raise ValueError("Constraint relaxations must be positive")
        if np.any(self.cost < 0):
            raise ValueError("Objective coefficients must be nonnegative")

    @property
    def n_vars(self) -> int:
        return self.cost.shape[0]

    @property
    def n_rows(self) -> int:
        return self.rows.shape[0]

    @classmethod
    def from_measure(cls, theta: AtomicVectorMeasure, basis: TestBasis,
                     eps_con: float = DEFAULT_EPS_CON) -> 'LpProblem':
        """
        Build the LP for theta against the basis

        Rows are normalized by their largest entry so that eps_con is a relative
        slack; rows that vanish on theta are dropped.
        """
        if eps_con <= 0:
            raise ValueError(f"eps_con must be positive, got {eps_con}")
        cost = theta.atom_norms()
        if theta.n_atoms == 0:
            return cls(cost, np.zeros((0, 0)), np.zeros(0))
        rows = divergence_matrix(theta, basis)
        scale = np.max(np.abs(rows), axis=1)
        live = scale > 0
        rows = rows[live] / scale[live, None]
        return cls(cost, rows, np.full(rows.shape[0], eps_con))

    def violation(self, lam: np.ndarray) -> np.ndarray:
        """|A (1 - lambda)| / eps per row"""
        if self.n_rows == 0:
            return np.zeros(0)
        return np.abs(self.rows @ (1.0 - np.asarray(lam, dtype=float))) / self.eps


def solve_lp(problem: LpProblem) -> Tuple[np.ndarray, float]:
    """
    Solve the relaxed LP with the HiGHS dual simplex

    Returns:
        Tuple of (lambda, objective)
    """
    n = problem.n_vars
    if n == 0:
        return np.zeros(0), 0.0
    if problem.n_rows == 0:
        return np.zeros(n), 0.0
    row_sums = problem.rows.sum(axis=1)
    a_ub = np.vstack([problem.rows, -problem.rows])
    b_ub = np.concatenate([row_sums + problem.eps, -row_sums + problem.eps])
    result = linprog(
        problem.cost,
        A_ub=a_ub,
        b_ub=b_ub,
        bounds=(0.0, 1.0),
        method='highs-ds',
        options={
            'maxiter': MAX_PIVOTS,
            'primal_feasibility_tolerance': SOLVER_TOL,
            'dual_feasibility_tolerance': SOLVER_TOL,
        },
    )
    if result.status != 0:
        raise LpSolveError(f"LP solver status {result.status}: {result.message}")
    lam = np.clip(result.x, 0.0, 1.0)
    objective = float(problem.cost @ lam)
    logger.debug(f"LP solved: {n} variables, {problem.n_rows} rows, objective {objective:.6e}")
    return lam, objective


def snap_identity(lam: np.ndarray, objective: float, total: float,
                  snap: float = IDENTITY_SNAP) -> Tuple[np.ndarray, float]:
    """
    Return lambda = 1 when the optimum matches |theta| to relative precision snap

    A submeasure with |zeta| >= |theta| equals theta; inside the relaxed polytope
    the solver can only shave mass of the order of eps_con off the identity.
    """
    if total - objective <= snap * total:
        return np.ones_like(lam), float(total)
    return lam, objective


def minimal_submeasure(theta: AtomicVectorMeasure, basis: TestBasis,
                       eps_con: float = DEFAULT_EPS_CON,
                       snap: float = IDENTITY_SNAP) -> Tuple[np.ndarray, AtomicVectorMeasure]:
    """Per-atom lambda and the submeasure zeta = lambda * theta"""
    problem = LpProblem.from_measure(theta, basis, eps_con)
    lam, objective = solve_lp(problem)
    lam, _ = snap_identity(lam, objective, theta.total_variation(), snap)
    return lam, theta.with_weights(lam[:, None] * theta.weights)


# ==================== Minimal pairs ====================

@dataclass(eq=False)
class MinimalPair:
    """Reduced flux nu_bar = nu_ac + lambda * nu_perp on the atom grid of nu"""
    lam: np.ndarray
    nu: AtomicVectorMeasure
    nu_bar: AtomicVectorMeasure
    colocated: np.ndarray
    objective: float
    tv_perp: float
    max_violation: float
    extras: Dict[str, Any] = field(default_factory=dict)
    objective_raw: Optional[float] = None
    snapped: bool = False

    @property
    def lam_full(self) -> np.ndarray:
        """Densities on every nu atom (1 on the colocated part)"""
        full = np.ones(self.nu.n_atoms)
        full[~self.colocated] = self.lam
        return full

    @property
    def is_identity(self) -> bool:
        return bool(self.lam.size == 0 or np.min(self.lam) >= 1.0 - 1e-6)

    def to_dict(self) -> Dict[str, Any]:
        result = {
            'lambda': self.lam.tolist(),
            'objective': self.objective,
            'objective_raw': self.objective if self.objective_raw is None else self.objective_raw,
            'snapped': self.snapped,
            'tv_perp': self.tv_perp,
            'tv_nu_bar': self.nu_bar.total_variation(),
            'n_colocated': int(self.colocated.sum()),
            'max_violation': self.max_violation,
            'lambda_min': float(self.lam.min()) if self.lam.size else 1.0,
        }
        result.update(self.extras)
        return result


def minimal_pair(mu: MeasureLike, nu: MeasureLike, basis: TestBasis,
                 eps_loc: Optional[float] = None, eps_con: float = DEFAULT_EPS_CON,
                 n_gauss: int = 4, snap: float = IDENTITY_SNAP) -> MinimalPair:
    """
    Reduce nu to its minimal flux

    nu is split into atoms colocated with mu and the singular remainder; only the
    remainder enters the LP.
    """
    mu = to_atoms(mu, basis.knots, n_gauss)
    nu = to_atoms(nu, basis.knots, n_gauss)
    colocated = colocated_mask(nu, mu, eps_loc) if nu.n_atoms else np.zeros(0, dtype=bool)
    nu_perp = nu.select(~colocated)

    problem = LpProblem.from_measure(nu_perp, basis, eps_con)
    lam_raw, objective_raw = solve_lp(problem)
    tv_perp = nu_perp.total_variation()
    lam, objective = snap_identity(lam_raw, objective_raw, tv_perp, snap)
    snapped = not np.array_equal(lam, lam_raw)
    if snapped:
        logger.info(f"Snapped lambda to 1: LP objective {objective_raw:.12e} vs |nu_perp| = {tv_perp:.12e}")
    violation = problem.violation(lam)

    full = np.ones(nu.n_atoms)
    full[~colocated] = lam
    nu_bar = nu.with_weights(full[:, None] * nu.weights)
    logger.info(
        f"✅ Minimal pair: {int(colocated.sum())} colocated / {nu.n_atoms} atoms, "
        f"objective {objective:.6e} of |nu_perp| = {tv_perp:.6e}"
    )
    return MinimalPair(
        lam=lam,
        nu=nu,
        nu_bar=nu_bar,
        colocated=colocated,
        objective=objective,
        tv_perp=tv_perp,
        max_violation=float(violation.max()) if violation.size else 0.0,
        extras={'n_rows': problem.n_rows, 'eps_con': eps_con},
        objective_raw=objective_raw,
        snapped=snapped,
    )
