"""Seeded verification campaigns shared by the CLI and the acceptance suite.

Case ``k`` of a campaign draws from ``default_rng([seed, k])``, so reports
are identical for any worker count.
"""
from __future__ import annotations

import time
from functools import partial

import numpy as np

from . import discrimination as disc
from . import measures, qmath, sdp, states
from .errors import UnboundedProgram
from .report import CaseRecord, ScenarioReport, parallel_map

ALPHA_TOL = 1e-4
PURE_TOL = 1e-8
PERFECT_TOL = 1e-8


def _rng(seed, k):
    return np.random.default_rng([seed, k])


def _random_rank_state(d, rng):
    return states.random_density(d, int(rng.integers(1, d + 1)), rng)


def _finish(report: ScenarioReport, rows, start: float) -> ScenarioReport:
    for k, row in enumerate(rows):
        for rec in (row if isinstance(row, list) else [row]):
            rec.extra.setdefault("trial", k)
            rec.case_id = len(report.cases)
            report.add(rec)
    report.notes["by_check"] = report.by_check()
    report.wall_time = time.perf_counter() - start
    return report


# -- closed form of the alpha measure against its definition -------------------------


def _alpha_case(d, alphas, seed, k):
    rng = _rng(seed, k)
    rho = _random_rank_state(d, rng)
    out = []
    for alpha in alphas:
        closed = measures.alpha_superiority(rho, alpha).value
        direct = measures.alpha_superiority_direct(rho, alpha).value
        res = abs(closed - direct)
        out.append(CaseRecord(k, d, closed, direct, res, res <= ALPHA_TOL,
                              alpha=alpha, extra={"check": "alpha_closed_form"}))
    return out


def verify_alpha_closed_form(d: int = 2, alphas=(0.0, 0.2, 0.8), trials: int = 100, seed: int = 0,
                    workers=None) -> ScenarioReport:
    alphas = tuple(float(a) for a in alphas)
    for a in alphas:
        measures._check_alpha(np.eye(d), a)
    start = time.perf_counter()
    rows = parallel_map(partial(_alpha_case, d, alphas, seed), range(trials), workers)
    rep = ScenarioReport("verify-theorem2", {"d": d, "alphas": list(alphas), "trials": trials}, seed)
    return _finish(rep, rows, start)


# -- discrimination ratios -----------------------------------------------------------


def _ratio_case(d, n_random, alphas, seed, k):
    rng = _rng(seed, k)
    rho = _random_rank_state(d, rng)
    sigma = states.random_density(d, d, rng)
    sweep = disc.ratio_sweep(rho, sigma, n_random, rng, alphas=alphas, case_id=k)
    return sweep.cases


def verify_ratio(d: int = 2, pairs: int = 50, n_random: int = 500, seed: int = 0, alphas=(),
                  workers=None) -> ScenarioReport:
    """Constructed ratio and random-strategy bound on ``pairs`` random pairs (full-support sigma)."""
    start = time.perf_counter()
    rows = parallel_map(partial(_ratio_case, d, n_random, tuple(alphas), seed), range(pairs), workers)
    rep = ScenarioReport("verify-lemma3", {"d": d, "pairs": pairs, "n_random": n_random,
                                           "alphas": list(alphas)}, seed)
    return _finish(rep, rows, start)


def _alpha_set_case(d, alphas, seed, k):
    rng = _rng(seed, k)
    rho = _random_rank_state(d, rng)
    return [disc.alpha_set_ratio_case(rho, a, seed=rng, case_id=k) for a in alphas]


def verify_alpha_set_ratio(d: int = 2, alphas=(0.0, 0.5), trials: int = 30, seed: int = 0,
                      workers=None) -> ScenarioReport:
    start = time.perf_counter()
    rows = parallel_map(partial(_alpha_set_case, d, tuple(alphas), seed), range(trials), workers)
    rep = ScenarioReport("verify-alpha-set", {"d": d, "alphas": list(alphas), "trials": trials}, seed)
    return _finish(rep, rows, start)


def mismatched_pair(d: int, rng):
    """Random ``(rho, sigma)`` with ``supp(rho)`` not inside ``supp(sigma)``."""
    r = int(rng.integers(1, d))
    u = states.random_unitary(d, rng)
    w = rng.dirichlet(np.ones(r))
    sigma = qmath.hermitian_part((u[:, :r] * w) @ u[:, :r].conj().T)
    rho = _random_rank_state(d, rng)
    if rng.uniform() < 0.5:
        # rho living entirely in the kernel of sigma
        k = d - r
        q = rng.dirichlet(np.ones(k))
        rho = qmath.hermitian_part((u[:, r:] * q) @ u[:, r:].conj().T)
    return rho, sigma


def _infinite_case(d, seed, k):
    rng = _rng(seed, k)
    rho, sigma = mismatched_pair(d, rng)
    try:
        sdp.solve_relative_dual(rho, sigma)
        signalled = False
    except UnboundedProgram:
        signalled = True
    strat = disc.infinite_ratio_strategy(rho, sigma)
    p_sigma = disc.succ_probability(strat, sigma).p_succ
    c = strat.info["c"]
    ok = signalled and p_sigma <= disc.ZERO_SUCCESS_TOL and c > 0
    return CaseRecord(k, d, np.inf, c, p_sigma, bool(ok),
                      extra={"check": "infinite_branch", "unbounded_signal": signalled})


def verify_infinite_branch(d: int = 3, pairs: int = 50, seed: int = 0, workers=None) -> ScenarioReport:
    start = time.perf_counter()
    rows = parallel_map(partial(_infinite_case, d, seed), range(pairs), workers)
    rep = ScenarioReport("verify-infinite", {"d": d, "pairs": pairs}, seed)
    return _finish(rep, rows, start)


# -- perfect strategies --------------------------------------------------------------

PERTURBATIONS = ("povm", "rotate", "swap")


def _perfect_case(seed, k):
    rng = _rng(seed, k)
    d = int(rng.integers(2, 4))
    psi = states.random_pure(d, rng)
    sigma = qmath.projector(psi)
    n = int(rng.integers(1, d + 1))
    strat = disc.omega_sigma_strategy(psi, rng.dirichlet(np.ones(n)), rng, basis="random")
    label = "constructed"
    if k % 2:
        mode = PERTURBATIONS[(k // 2) % len(PERTURBATIONS)]
        if mode == "swap" and n < 2:
            mode = "povm"
        eps = float(10 ** rng.uniform(-3, np.log10(0.5)))
        strat = disc.perturb_strategy(strat, eps, rng, mode)
        label = f"perturbed-{mode}"
    p = disc.succ_probability(strat, sigma).p_succ
    perfect = disc.is_perfect_strategy(strat, sigma)
    agree = perfect == (abs(p - 1.0) <= PERFECT_TOL)
    return CaseRecord(k, d, float(perfect), p, 0.0 if agree else 1.0, bool(agree),
                      extra={"check": "perfect_predicate", "strategy": label})


def verify_perfect_predicate(trials: int = 200, seed: int = 0, workers=None) -> ScenarioReport:
    """Perfect-strategy predicate against ``P_succ = 1`` on constructed and perturbed strategies."""
    start = time.perf_counter()
    rows = parallel_map(partial(_perfect_case, seed), range(trials), workers)
    rep = ScenarioReport("verify-perfect", {"trials": trials}, seed)
    return _finish(rep, rows, start)


# -- deficiency ----------------------------------------------------------------------


def _maxmin_case(theory, d, seed, k):
    rng = _rng(seed, k)
    n = d * d if theory == "entanglement" else d
    rho = _random_rank_state(n, rng)
    dims = (d, d) if theory == "entanglement" else None
    rep = disc.theorem7_check(rho, theory, dims, seed=rng, case_id=k)
    return rep.cases


def verify_maxmin(theory: str = "coherence", d: int = 2, trials: int = 50, seed: int = 0,
                    workers=None) -> ScenarioReport:
    start = time.perf_counter()
    rows = parallel_map(partial(_maxmin_case, theory, d, seed), range(trials), workers)
    rep = ScenarioReport("verify-theorem7", {"theory": theory, "d": d, "trials": trials}, seed)
    return _finish(rep, rows, start)


def _pure_case(theory, d, seed, k):
    rng = _rng(seed, k)
    if theory == "coherence":
        psi = states.random_pure(d, rng)
        rho = qmath.projector(psi)
        closed = 1.0 - float(np.sum(np.abs(rho))) / d
        value = measures.coherence_deficiency(rho).value
    else:
        psi = states.random_pure(d * d, rng)
        rho = qmath.projector(psi)
        q = np.linalg.svd(psi.reshape(d, d), compute_uv=False)
        closed = 1.0 - float(np.sum(q)) ** 2 / d
        value = measures.entanglement_deficiency(rho, (d, d)).value
    res = abs(value - closed)
    return CaseRecord(k, d, closed, value, res, res <= PURE_TOL,
                      extra={"check": f"pure_{theory}"})


def verify_pure_closed_forms(theory: str = "coherence", d: int = 2, trials: int = 100,
                             seed: int = 0, workers=None) -> ScenarioReport:
    start = time.perf_counter()
    rows = parallel_map(partial(_pure_case, theory, d, seed), range(trials), workers)
    rep = ScenarioReport("verify-pure", {"theory": theory, "d": d, "trials": trials}, seed)
    return _finish(rep, rows, start)


def merge(command: str, reports, params=None, seed=None) -> ScenarioReport:
    """Concatenate campaign reports, renumbering cases."""
    out = ScenarioReport(command, params or {}, seed)
    wall = 0.0
    for rep in reports:
        for c in rep.cases:
            c.case_id = len(out.cases)
            c.extra.setdefault("campaign", rep.params)
            out.add(c)
        wall += rep.wall_time or 0.0
    out.notes["by_check"] = out.by_check()
    out.wall_time = wall
    return out
