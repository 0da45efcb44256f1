# utils/singular_flux/cli.py
"""
Command-line pipelines for the singular-flux toolkit

Every subcommand returns a result dictionary with a 'pass' flag; run() writes
it as a JSON report and maps the outcome to an exit code (0 pass, 1 failed
check, 2 usage or input error).
"""

import argparse
import json
import logging
import math
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..config import config
from .augmented_flow import flow, lift, marginal_check, reparam_roundtrip
from .curves import (
    d_metric,
    injectivity_check,
    random_normalized_curve,
    segment_check,
    to_abv,
    to_lip,
)
from .examples_corpus import (
    EXAMPLE_IDS,
    ExampleFixture,
    build,
    expected_fields,
    flux_pairing,
    tangent_test_field,
)
from .export import (
    curves_to_frame,
    export_to_excel,
    profile_to_frame,
    read_json,
    series_to_frame,
    write_csv,
    write_json,
)
from .measures import AtomicVectorMeasure, SymbolicMeasure, to_atoms
from .minimal_flux import LpSolveError, minimal_pair
from .superposition import (
    AbvEnsemble,
    SuperpositionMeasure,
    bv_representation,
    characteristic_residual,
    compare_pairings,
    measure_pairings,
    push_mu,
    push_nu,
    representation_report,
    split_D,
)
from .validations import (
    get_validation_summary,
    validate_ensemble_json,
    validate_pair_json,
    validate_run_config,
)
from .wasserstein import var_w1_refined, w1
from .weak_form import TestBasis, augmented_residual, ce_residual

logger = logging.getLogger(__name__)

COMMANDS = ('ce-verify', 'minimal-flux', 'lift', 'superpose', 'roundtrip', 'example', 'report')

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

SYMBOLIC_TOL = 1e-10
REPRESENTATION_TOL = 2e-2
ROUNDTRIP_TOL = 1e-9
IDENTITY_TOL = 1e-6
AUG_BASIS_GRID = 10
REFINEMENT_RATIO = 1.5
DEFAULT_HORIZON = 2.0


# ==================== Run configuration ====================

@dataclass
class RunConfig:
    """Parsed command line with configuration defaults filled in"""
    command: str
    example: Optional[str] = None
    input: Optional[str] = None
    ensemble: Optional[str] = None
    output: Optional[str] = None
    emit: Optional[str] = None
    xlsx: Optional[str] = None
    res: Optional[int] = None
    eps: float = 0.05
    grid_step: float = 0.01
    ds: float = 1e-3
    s_max: float = 4.0
    starts: int = 400
    basis_grid: int = 16
    n_curves: int = 200
    n: int = 100
    seed: int = 42
    tol: Optional[float] = None
    eps_con: float = 1e-8
    eps_loc: Optional[float] = None
    eps_flat: float = 1e-6
    norm: str = 'l2'
    skip_lift: bool = False

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> 'RunConfig':
        def pick(name: str, key: str):
            value = getattr(args, name, None)
            return value if value is not None else config.get_app_setting(key)

        return cls(
            command=args.command,
            example=getattr(args, 'example', None),
            input=getattr(args, 'input', None),
            ensemble=getattr(args, 'ensemble', None),
            output=getattr(args, 'output', None),
            emit=getattr(args, 'emit', None),
            xlsx=getattr(args, 'xlsx', None),
            res=getattr(args, 'res', None),
            eps=float(pick('eps', 'MOLLIFY_EPS')),
            grid_step=float(pick('grid_step', 'GRID_STEP')),
            ds=float(pick('ds', 'ODE_STEP')),
            s_max=float(pick('s_max', 'S_MAX')),
            starts=int(pick('starts', 'N_STARTS')),
            basis_grid=int(pick('basis_grid', 'BASIS_GRID')),
            n_curves=int(pick('n_curves', 'N_CURVES')),
            n=int(getattr(args, 'n', None) or 100),
            seed=int(pick('seed', 'SEED')),
            tol=getattr(args, 'tol', None),
            eps_con=float(pick('eps_con', 'EPS_CON')),
            eps_loc=pick('eps_loc', 'EPS_LOC'),
            eps_flat=float(pick('eps_flat', 'EPS_FLAT')),
            norm=getattr(args, 'norm', None) or 'l2',
            skip_lift=bool(getattr(args, 'skip_lift', False)),
        )

    def report_path(self) -> Path:
        if self.output:
            return Path(self.output)
        return Path(config.get_app_setting('REPORT_DIR', 'reports')) / f"{self.command}.json"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='singular-flux',
                                     description="Verification pipelines for continuity equations with singular flux")
    sub = parser.add_subparsers(dest='command', required=True)

    def common(p: argparse.ArgumentParser, source: bool = True):
        if source:
            p.add_argument('--example', type=str, help=f"fixture id, one of {', '.join(EXAMPLE_IDS)}")
            p.add_argument('--input', type=str, help='JSON file with {"mu", "nu", "mu0"[, "horizon"]}')
        p.add_argument('--output', type=str, help='JSON report path (default REPORT_DIR/<command>.json)')
        p.add_argument('--basis-grid', dest='basis_grid', type=int, help='knots per axis of the test basis')
        p.add_argument('--tol', type=float, help='acceptance tolerance')
        p.add_argument('--norm', choices=('l1', 'l2', 'linf'), help='norm on (t, x)')
        p.add_argument('--seed', type=int, help='random seed (default 42)')

    p = sub.add_parser('ce-verify', help='weak-form residual of the continuity equation')
    common(p)
    p.add_argument('--res', type=int, help='midpoint discretization with this node budget instead of quadrature')

    p = sub.add_parser('minimal-flux', help='minimal flux submeasure by linear programming')
    common(p)
    p.add_argument('--eps-con', dest='eps_con', type=float)
    p.add_argument('--eps-loc', dest='eps_loc', type=float)

    p = sub.add_parser('lift', help='augmented lift through mollified characteristics')
    common(p)
    p.add_argument('--eps', type=float)
    p.add_argument('--grid', dest='grid_step', type=float)
    p.add_argument('--ds', type=float)
    p.add_argument('--s-max', dest='s_max', type=float)
    p.add_argument('--starts', type=int)
    p.add_argument('--emit', type=str, help='directory for trajectory CSV files')

    p = sub.add_parser('superpose', help='pushforward checks of a curve ensemble')
    common(p)
    p.add_argument('--ensemble', type=str, help='ensemble JSON (defaults to the fixture ensemble)')
    p.add_argument('--n-curves', dest='n_curves', type=int)
    p.add_argument('--ds', type=float)
    p.add_argument('--eps-flat', dest='eps_flat', type=float)
    p.add_argument('--emit', type=str, help='directory for curve CSV files')

    p = sub.add_parser('roundtrip', help='ABV / Lipschitz curve transform round trips')
    common(p, source=False)
    p.add_argument('--n', type=int, help='number of random curves')
    p.add_argument('--emit', type=str, help='directory for curve CSV files')

    p = sub.add_parser('example', help='build a fixture and check its continuity residual')
    common(p)
    p.add_argument('--n-curves', dest='n_curves', type=int)
    p.add_argument('--emit', type=str, help='directory for measure / ensemble JSON files')

    p = sub.add_parser('report', help='run the acceptance suite')
    common(p, source=False)
    p.add_argument('--xlsx', type=str, help='also write an Excel workbook')
    p.add_argument('--skip-lift', dest='skip_lift', action='store_true', help='leave out the augmented lift checks')
    p.add_argument('--n-curves', dest='n_curves', type=int)
    return parser


# ==================== Inputs ====================

@dataclass
class Problem:
    mu: SymbolicMeasure
    nu: SymbolicMeasure
    mu0: SymbolicMeasure
    horizon: float
    fixture: Optional[ExampleFixture] = None

    def basis(self, n_knots: int) -> TestBasis:
        return TestBasis.auto([self.mu, self.nu], n_knots, self.horizon)


def load_problem(cfg: RunConfig) -> Problem:
    """Fixture by id or a pair file; exactly one source is required"""
    if bool(cfg.example) == bool(cfg.input):
        raise ValueError("Give exactly one of --example or --input")
    if cfg.example:
        fixture = build(cfg.example, cfg.n_curves, norm=cfg.norm)
        return Problem(fixture.mu, fixture.nu, fixture.mu0, fixture.horizon, fixture)
    data = read_json(cfg.input)
    ok, errors = validate_pair_json(data)
    if not ok:
        raise ValueError(get_validation_summary(errors))
    mu = SymbolicMeasure.from_dict(data['mu'])
    nu = SymbolicMeasure.from_dict(data['nu'])
    mu0 = SymbolicMeasure.from_dict(data['mu0'])
    horizon = float(data.get('horizon', mu.time_breakpoints().max() if mu.components else DEFAULT_HORIZON))
    return Problem(mu, nu, mu0, horizon)


def _tol(cfg: RunConfig, default: float) -> float:
    return cfg.tol if cfg.tol is not None else default


# ==================== Pipelines ====================

def run_ce_verify(cfg: RunConfig) -> Dict[str, Any]:
    problem = load_problem(cfg)
    basis = problem.basis(cfg.basis_grid)
    mu, nu = problem.mu, problem.nu
    if cfg.res:
        mu, nu = mu.discretize(cfg.res), nu.discretize(cfg.res)
    report = ce_residual(mu, nu, problem.mu0, basis, tol=_tol(cfg, config.get_app_setting('CE_TOL', 1e-3)))
    status = '✅' if report.passed else '⚠️'
    logger.info(f"{status} Continuity residual max_abs={report.max_abs:.3e} ({report.n_basis} test functions)")
    return {'pass': report.passed, 'result': report.to_dict()}


def _minimal_flux_pass(mp, fixture: Optional[ExampleFixture]) -> bool:
    expectations = fixture.expectations if fixture else {}
    if 'minimal_objective' in expectations:
        return mp.objective <= IDENTITY_TOL
    if 'lambda_min' in expectations:
        return mp.is_identity
    return mp.max_violation <= 1.0 + IDENTITY_TOL


def run_minimal_flux(cfg: RunConfig) -> Dict[str, Any]:
    problem = load_problem(cfg)
    basis = problem.basis(cfg.basis_grid)
    mp = minimal_pair(problem.mu, problem.nu, basis, eps_loc=cfg.eps_loc, eps_con=cfg.eps_con)
    return {'pass': _minimal_flux_pass(mp, problem.fixture), 'result': mp.to_dict()}


def _initial_atoms(trajectories, weights) -> AtomicVectorMeasure:
    starts = np.vstack([t.start for t in trajectories])
    return AtomicVectorMeasure(np.zeros(starts.shape[0]), starts[:, 1:], np.asarray(weights)[:, None])


def lift_checks(problem: Problem, cfg: RunConfig) -> Dict[str, Any]:
    """Lift the pair and evaluate unit norm, marginals, tightness, reparametrization and the augmented residual"""
    result = lift(problem.mu, problem.nu, problem.mu0, problem.horizon, cfg.eps, cfg.grid_step, cfg.ds,
                  cfg.s_max, cfg.starts, cfg.seed, problem.mu.norm)
    basis = problem.basis(cfg.basis_grid)
    marginals = marginal_check(result.sigma0, result.sigma_vec, result.mu_eps, result.nu_eps, basis)
    aug_basis = TestBasis.from_box(
        np.concatenate([[-0.5], basis.lower]),
        np.concatenate([[cfg.s_max], basis.upper]),
        AUG_BASIS_GRID,
    )
    mu0_atoms = _initial_atoms(result.trajectories, result.weights)
    augmented = augmented_residual(result.sigma, result.sigma0, result.sigma_vec, mu0_atoms, aug_basis)
    inversion = max(reparam_roundtrip(t, result.field) for t in result.trajectories)
    tightness = marginals.extras['tightness']
    checks = {
        'unit_norm': result.diagnostics['unit_norm_defect'] <= 1e-12,
        'marginals': marginals.passed,
        'tightness': bool(tightness['pass']),
        'inversion': inversion <= 1e-4,
        'augmented': augmented.passed,
    }
    return {
        'pass': all(checks.values()),
        'checks': checks,
        'diagnostics': result.diagnostics,
        'marginals': {'max_normalized': marginals.max_normalized, 'tightness': tightness},
        'augmented_residual': augmented.max_normalized,
        'inversion_residual': inversion,
        'result': result,
    }


def run_lift(cfg: RunConfig) -> Dict[str, Any]:
    problem = load_problem(cfg)
    out = lift_checks(problem, cfg)
    result = out.pop('result')
    if cfg.emit:
        curves = [t.to_curve(problem.mu.norm) for t in result.trajectories]
        write_csv(curves_to_frame(curves), Path(cfg.emit) / 'trajectories.csv')
    return out


def _flow_ensemble(problem: Problem, cfg: RunConfig, example_id: str) -> SuperpositionMeasure:
    """Characteristics of the closed-form field started from the atoms of mu0"""
    field_obj = expected_fields(example_id)
    mu0 = to_atoms(problem.mu0)
    starts = np.column_stack([np.zeros(mu0.n_atoms), mu0.points])
    weights = mu0.weights[:, 0] / mu0.weights[:, 0].sum()
    trajs = flow(field_obj, starts, cfg.ds, problem.horizon)
    return SuperpositionMeasure([t.to_curve(problem.mu.norm) for t in trajs], weights)


def load_ensemble(cfg: RunConfig, problem: Problem) -> SuperpositionMeasure:
    if cfg.ensemble:
        data = read_json(cfg.ensemble)
        ok, errors = validate_ensemble_json(data)
        if not ok:
            raise ValueError(get_validation_summary(errors))
        return SuperpositionMeasure.from_dict(data, cfg.norm)
    fixture = problem.fixture
    if fixture is None:
        raise ValueError("superpose with --input also needs --ensemble")
    if fixture.eta is not None:
        return fixture.eta
    return _flow_ensemble(problem, cfg, fixture.id)


def run_superpose(cfg: RunConfig) -> Dict[str, Any]:
    problem = load_problem(cfg)
    eta = load_ensemble(cfg, problem)
    basis = problem.basis(cfg.basis_grid)
    fixture = problem.fixture
    out: Dict[str, Any] = {}
    if fixture is not None and not fixture.representable:
        phi = tangent_test_field(fixture.metadata.get('t0', 0.5))
        flux = float(np.max(np.abs(push_nu(eta, basis)))) if eta.n_curves else 0.0
        pairing = flux_pairing(problem.nu, phi)
        out['witness'] = {'push_nu_max': flux, 'tangent_pairing': pairing}
        out['pass'] = flux <= 1e-12 and pairing >= 2.0 * math.pi - 0.1
    else:
        report = representation_report(eta, problem.mu, problem.nu, basis, _tol(cfg, REPRESENTATION_TOL),
                                       cfg.eps_flat)
        out['representation'] = report.to_dict()
        out['pass'] = report.passed
    if fixture is not None:
        out['characteristic_residual'] = characteristic_residual(eta, expected_fields(fixture.id))
    if cfg.emit:
        write_csv(curves_to_frame(eta.curves), Path(cfg.emit) / 'ensemble_curves.csv')
    return out


def roundtrip_residuals(n: int, seed: int, norm: str = 'l2') -> Dict[str, Any]:
    """T after S and S after T on random normalized curves"""
    rng = np.random.default_rng(seed)
    curves = [random_normalized_curve(rng, int(rng.integers(3, 10)), int(rng.integers(1, 4)), norm)
              for _ in range(n)]
    lip_gap, abv_gap = 0.0, 0.0
    unit_speed, monotone = True, True
    for y in curves:
        u = to_abv(y)
        back = to_lip(u)
        lip_gap = max(lip_gap, d_metric(y, back))
        unit_speed = unit_speed and back.is_normalized()
        monotone = monotone and bool(np.all(np.diff(back.points[:, 0]) >= 0))
        again = to_abv(back)
        if again.values.shape != u.values.shape or len(again.jumps) != len(u.jumps):
            abv_gap = math.inf
            continue
        gaps = [np.max(np.abs(again.values - u.values)), np.max(np.abs(again.sample_times - u.sample_times))]
        for a, b in zip(again.jumps, u.jumps):
            gaps.append(abs(a.t - b.t))
            gaps.append(np.max(np.abs(a.path - b.path)) if a.path.shape == b.path.shape else math.inf)
        abv_gap = max(abv_gap, float(max(gaps)))
    return {
        'n_curves': n,
        'max_d_metric': lip_gap,
        'max_abv_gap': abv_gap,
        'unit_speed': unit_speed,
        'monotone_time': monotone,
        'curves': curves,
    }


def run_roundtrip(cfg: RunConfig) -> Dict[str, Any]:
    out = roundtrip_residuals(cfg.n, cfg.seed, cfg.norm)
    curves = out.pop('curves')
    tol = _tol(cfg, ROUNDTRIP_TOL)
    out['pass'] = (out['max_d_metric'] <= tol and out['max_abv_gap'] <= tol
                   and out['unit_speed'] and out['monotone_time'])
    if cfg.emit:
        write_csv(curves_to_frame(curves), Path(cfg.emit) / 'roundtrip_curves.csv')
    return out


def emit_fixture(fixture: ExampleFixture, directory: Path) -> List[str]:
    """Write the fixture's measures and ensembles as JSON (curves also as CSV)"""
    stem = fixture.id.replace('(', '_').replace(')', '')
    files = [
        write_json(fixture.to_dict(), directory / f"fixture_{stem}.json"),
        write_json(fixture.mu.to_dict(), directory / f"mu_{stem}.json"),
        write_json(fixture.nu.to_dict(), directory / f"nu_{stem}.json"),
        write_json(fixture.mu0.to_dict(), directory / f"mu0_{stem}.json"),
    ]
    if fixture.eta is not None:
        files.append(write_json(fixture.eta.to_dict(), directory / f"eta_{stem}.json"))
        files.append(write_csv(curves_to_frame(fixture.eta.curves), directory / f"eta_{stem}.csv"))
    for name, alt in sorted(fixture.alternatives.items()):
        files.append(write_json(alt.to_dict(), directory / f"eta_{stem}_{name}.json"))
    return [str(f) for f in files]


def run_example(cfg: RunConfig) -> Dict[str, Any]:
    if not cfg.example:
        raise ValueError("example needs --example")
    problem = load_problem(cfg)
    fixture = problem.fixture
    report = ce_residual(fixture.mu, fixture.nu, fixture.mu0, fixture.basis(cfg.basis_grid),
                         tol=_tol(cfg, SYMBOLIC_TOL))
    out = {
        'id': fixture.id,
        'representable': fixture.representable,
        'expectations': fixture.expectations,
        'metadata': fixture.metadata,
        'ce_max_abs': report.max_abs,
        'pass': report.max_abs <= _tol(cfg, SYMBOLIC_TOL),
    }
    if cfg.emit:
        out['files'] = emit_fixture(fixture, Path(cfg.emit))
    return out


# ==================== Acceptance suite ====================

def _check(name: str, value: float, tol: float, passed: bool, detail: str = '', **extra) -> Dict[str, Any]:
    entry = {'name': name, 'value': float(value), 'tol': tol, 'pass': bool(passed), 'detail': detail}
    entry.update(extra)
    return entry


def check_w1_identity(cfg: RunConfig) -> Dict[str, Any]:
    fixture = build("7.1", 2, norm=cfg.norm)
    rng = np.random.default_rng(cfg.seed)
    pairs = rng.uniform(0.0, 1.0, size=(10, 2))
    worst = max(abs(w1(fixture.slice_at(s), fixture.slice_at(t)) - abs(t - s)) for s, t in pairs)
    return _check('w1_identity_7.1', worst, 1e-9, worst <= 1e-9, '10 random (s, t) in [0, 1]^2')


def check_flux_variation(cfg: RunConfig) -> Dict[str, Any]:
    fixture = build("7.1", 2, norm=cfg.norm)
    profile = var_w1_refined(fixture.slice_at, 0.0, 1.0, tol=1e-8, max_slices=2 ** 14)
    tv = to_atoms(fixture.nu).total_variation()
    gap = max(abs(profile.total - 1.0), abs(tv - 1.0))
    if cfg.emit:
        write_csv(profile_to_frame(profile), Path(cfg.emit) / 'variation_7.1.csv')
    return _check('flux_variation_7.1', gap, 1e-6, gap <= 1e-6, f"Var = {profile.total:.12g}, |nu| = {tv:.12g}")


def check_symbolic_residuals(cfg: RunConfig) -> List[Dict[str, Any]]:
    checks = []
    for example_id in ("7.1", "7.2", "7.3", "7.5", "7.6"):
        fixture = build(example_id, 2, norm=cfg.norm)
        report = ce_residual(fixture.mu, fixture.nu, fixture.mu0, fixture.basis(cfg.basis_grid))
        checks.append(_check(f'ce_symbolic_{example_id}', report.max_abs, SYMBOLIC_TOL,
                             report.max_abs <= SYMBOLIC_TOL))
    return checks


def check_minimal_flux(cfg: RunConfig) -> List[Dict[str, Any]]:
    checks = []
    fixture = build("2.5", 2, norm=cfg.norm)
    mp = minimal_pair(fixture.mu, fixture.nu, fixture.basis(cfg.basis_grid), eps_con=cfg.eps_con)
    lam_min = float(mp.lam.min()) if mp.lam.size else 1.0
    checks.append(_check('minimal_flux_2.5', lam_min, 1.0 - IDENTITY_TOL, lam_min >= 1.0 - IDENTITY_TOL,
                         'smallest lambda'))
    fixture = build("7.2", norm=cfg.norm)
    mp = minimal_pair(fixture.mu, fixture.nu, fixture.basis(cfg.basis_grid), eps_con=cfg.eps_con)
    checks.append(_check('minimal_flux_7.2', mp.objective, IDENTITY_TOL, mp.objective <= IDENTITY_TOL,
                         'objective |nu_bar|'))
    return checks


def check_roundtrip(cfg: RunConfig) -> Dict[str, Any]:
    out = roundtrip_residuals(cfg.n, cfg.seed, cfg.norm)
    worst = max(out['max_d_metric'], out['max_abv_gap'])
    passed = worst <= ROUNDTRIP_TOL and out['unit_speed'] and out['monotone_time']
    return _check('curve_roundtrip', worst, ROUNDTRIP_TOL, passed, f"{cfg.n} random curves")


def _representation_deviation(fixture: ExampleFixture, eta: SuperpositionMeasure, basis: TestBasis) -> float:
    report = representation_report(eta, fixture.mu, fixture.nu, basis, REPRESENTATION_TOL)
    return max(report.deviations.values())


def check_superposition(cfg: RunConfig) -> List[Dict[str, Any]]:
    coarse = build("7.1", 200, norm=cfg.norm)
    fine = build("7.1", 1600, norm=cfg.norm)
    basis = coarse.basis(cfg.basis_grid)
    dev_coarse = _representation_deviation(coarse, coarse.eta, basis)
    dev_fine = _representation_deviation(fine, fine.eta, basis)
    if cfg.emit:
        write_csv(series_to_frame([200, 1600], [1 / 200, 1 / 1600], [dev_coarse, dev_fine]),
                  Path(cfg.emit) / 'superposition_refinement_7.1.csv')
    return [
        _check('superposition_7.1_M200', dev_coarse, REPRESENTATION_TOL, dev_coarse <= REPRESENTATION_TOL),
        _check('superposition_7.1_M1600', dev_fine, 5e-3,
               dev_fine <= 5e-3 and dev_fine <= dev_coarse / 3.0 + 1e-12,
               f"ratio {dev_coarse / dev_fine if dev_fine > 0 else math.inf:.3g}"),
    ]


def check_split(cfg: RunConfig) -> List[Dict[str, Any]]:
    checks = []
    for example_id, flat_expected in (("7.1", True), ("7.6", False)):
        fixture = build(example_id, cfg.n_curves, norm=cfg.norm)
        basis = fixture.basis(cfg.basis_grid)
        split = split_D(fixture.eta, basis, cfg.eps_flat)
        target = measure_pairings(fixture.mu, fixture.nu, basis)['nu']
        if flat_expected:
            deviation = compare_pairings(split.zero_flux, target, basis)
            stray = split.plus_mass
        else:
            deviation = compare_pairings(split.plus_flux, target, basis)
            stray = split.zero_mass
        value = max(deviation, stray)
        checks.append(_check(f'split_{example_id}', value, REPRESENTATION_TOL, value <= REPRESENTATION_TOL,
                             f"flux deviation {deviation:.3e}, other part mass {stray:.3e}"))
    return checks


def check_bv_representation(cfg: RunConfig) -> Dict[str, Any]:
    fixture = build("7.1", cfg.n_curves, norm=cfg.norm)
    basis = fixture.basis(cfg.basis_grid)
    eta_hat = AbvEnsemble.from_superposition(fixture.eta)
    report = bv_representation(eta_hat, basis, fixture.mu, fixture.nu)
    gap = max(np.max(np.abs(report.extras['theta_mu'] - push_mu(fixture.eta, basis))),
              np.max(np.abs(report.extras['theta_nu'] - push_nu(fixture.eta, basis))))
    return _check('bv_switch_7.1', gap, 1e-9, gap <= 1e-9, 'theta pairings against Lipschitz pushforwards')


def check_witnesses(cfg: RunConfig) -> List[Dict[str, Any]]:
    checks = []
    two_pi = 2.0 * math.pi

    fixture = build("7.2", norm=cfg.norm)
    problem = Problem(fixture.mu, fixture.nu, fixture.mu0, fixture.horizon, fixture)
    eta = _flow_ensemble(problem, cfg, "7.2")
    basis = fixture.basis(cfg.basis_grid)
    flux = float(np.max(np.abs(push_nu(eta, basis))))
    pairing = flux_pairing(fixture.nu, tangent_test_field(fixture.metadata['t0']))
    checks.append(_check('witness_7.2', pairing, two_pi - 0.1, flux <= 1e-12 and pairing >= two_pi - 0.1,
                         f"flow ensemble push_nu max {flux:.3e}"))

    fixture = build("7.4(10)", norm=cfg.norm)
    basis = fixture.basis(cfg.basis_grid)
    dev = _representation_deviation(fixture, fixture.eta, basis)
    limit = fixture.alternatives['weak_star_limit']
    phi = tangent_test_field(fixture.metadata['t0'])
    gap = abs(flux_pairing(fixture.nu, phi) - flux_pairing(limit, phi))
    checks.append(_check('witness_7.4', gap, two_pi - 0.1, dev <= REPRESENTATION_TOL and gap >= two_pi - 0.1,
                         f"n = 10 ensemble deviation {dev:.3e}"))

    fixture = build("7.6", cfg.n_curves, norm=cfg.norm)
    residual = characteristic_residual(fixture.alternatives['alternative'], expected_fields("7.6"))
    checks.append(_check('witness_7.6', residual, 0.2, residual >= 0.2, 'alternative ensemble vs closed-form field'))
    return checks


def check_predicates(cfg: RunConfig) -> List[Dict[str, Any]]:
    injective = all(injectivity_check(c) for example_id in ("7.1", "7.5", "7.6")
                    for c in build(example_id, 20, norm=cfg.norm).eta.curves)
    segments_7_1 = all(segment_check(c) for c in build("7.1", 20, norm=cfg.norm).eta.curves)
    segments_7_3 = segment_check(build("7.3", norm=cfg.norm).eta.curves[0])
    return [
        _check('injectivity', float(injective), 1.0, injective, '7.1, 7.5, 7.6 representing curves'),
        _check('segment_check', float(segments_7_1 and not segments_7_3), 1.0, segments_7_1 and not segments_7_3,
               'true on 7.1, false on the circular transition of 7.3'),
    ]


def check_lift(cfg: RunConfig) -> List[Dict[str, Any]]:
    """Lift 7.1 at (h, ds) and at (2h, 2ds); the augmented residual should roughly halve"""
    fixture = build("7.1", 2, norm=cfg.norm)
    problem = Problem(fixture.mu, fixture.nu, fixture.mu0, fixture.horizon, fixture)
    fine = lift_checks(problem, cfg)
    coarse = lift_checks(problem, replace(cfg, grid_step=2.0 * cfg.grid_step, ds=2.0 * cfg.ds))
    ratio = coarse['augmented_residual'] / max(fine['augmented_residual'], 1e-300)
    halves = ratio >= REFINEMENT_RATIO or fine['augmented_residual'] <= 1e-12
    return [
        _check('augmented_lift_7.1', fine['augmented_residual'], 5e-2, fine['pass'],
               ', '.join(f"{k}={'ok' if v else 'FAIL'}" for k, v in fine['checks'].items()),
               inversion_residual=fine['inversion_residual']),
        _check('augmented_refinement_7.1', ratio, REFINEMENT_RATIO, halves,
               f"residual {coarse['augmented_residual']:.3e} at (2h, 2ds), "
               f"{fine['augmented_residual']:.3e} at (h, ds)"),
    ]


SUITE: Sequence[Tuple[str, Callable[[RunConfig], Any]]] = (
    ('w1_identity', check_w1_identity),
    ('flux_variation', check_flux_variation),
    ('symbolic_residuals', check_symbolic_residuals),
    ('minimal_flux', check_minimal_flux),
    ('roundtrip', check_roundtrip),
    ('superposition', check_superposition),
    ('split', check_split),
    ('bv_representation', check_bv_representation),
    ('witnesses', check_witnesses),
    ('predicates', check_predicates),
    ('lift', check_lift),
)


def run_report(cfg: RunConfig) -> Dict[str, Any]:
    suite: List[Dict[str, Any]] = []
    steps = [(name, step) for name, step in SUITE if not (cfg.skip_lift and name == 'lift')]
    for name, step in steps:
        try:
            result = step(cfg)
            suite.extend(result if isinstance(result, list) else [result])
        except (ValueError, RuntimeError) as e:
            logger.error(f"Error in acceptance step {name}: {e}")
            suite.append(_check(name, math.nan, math.nan, False, f"error: {e}"))
    passed = all(c['pass'] for c in suite)
    n_failed = sum(not c['pass'] for c in suite)
    logger.info(f"{'✅' if passed else '⚠️'} Acceptance suite: {len(suite) - n_failed}/{len(suite)} checks passed")
    if cfg.xlsx:
        if config.is_feature_enabled('EXCEL_EXPORT'):
            export_to_excel(suite, cfg.xlsx)
        else:
            logger.warning("⚠️ Excel export is disabled (ENABLE_EXCEL_EXPORT=false)")
    return {'suite': suite, 'pass': passed}


PIPELINES: Dict[str, Callable[[RunConfig], Dict[str, Any]]] = {
    'ce-verify': run_ce_verify,
    'minimal-flux': run_minimal_flux,
    'lift': run_lift,
    'superpose': run_superpose,
    'roundtrip': run_roundtrip,
    'example': run_example,
    'report': run_report,
}


# ==================== Entry point ====================

def _finite(value: Any) -> Any:
    """NaN and infinities become strings so reports stay strict JSON"""
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, dict):
        return {k: _finite(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite(v) for v in value]
    return value


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse arguments, run one pipeline and write its JSON report

    Returns:
        0 when every check passes, 1 when a check fails, 2 on usage or input errors
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    cfg = RunConfig.from_args(args)
    ok, errors = validate_run_config(cfg)
    if not ok:
        logger.error(get_validation_summary(errors))
        return EXIT_USAGE

    try:
        result = PIPELINES[cfg.command](cfg)
        report = {'command': cfg.command, 'config': asdict(cfg), **result}
        path = write_json(_finite(report), cfg.report_path())
    except (ValueError, OSError, json.JSONDecodeError, LpSolveError) as e:
        logger.error(f"Error running {cfg.command}: {e}")
        return EXIT_USAGE

    status = '✅' if result['pass'] else '❌'
    logger.info(f"{status} {cfg.command} finished, report written to {path}")
    return EXIT_OK if result['pass'] else EXIT_FAIL
