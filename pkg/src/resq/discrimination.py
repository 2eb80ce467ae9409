"""Subchannel discrimination: strategies, success probabilities and optimal constructions."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import qmath, sdp, states
from .measures import (coherence_deficiency, entanglement_deficiency, relative_robustness,
                       robustness)
from .report import CaseRecord, ScenarioReport
from .errors import (
    BadDistribution,
    DimensionMismatch,
    InvalidStrategy,
    SupportsActuallyNested,
    UnboundedProgram,
    UnboundedRatio,
)

STRATEGY_TOL = 1e-9
PERFECT_TOL = 1e-8
SUPPORT_TOL = 1e-10


@dataclass(frozen=True)
class Subchannel:
    """Completely positive trace-nonincreasing map given by Kraus operators."""

    kraus: tuple

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=complex) for k in self.kraus)
        if not ops:
            raise InvalidStrategy("a subchannel needs at least one Kraus operator")
        if any(k.ndim != 2 or k.shape != ops[0].shape for k in ops):
            raise InvalidStrategy("Kraus operators of a subchannel must share one 2-D shape")
        object.__setattr__(self, "kraus", ops)
        gram = self.gram()
        excess = qmath.max_eigenvalue(gram) - 1.0
        if excess > STRATEGY_TOL:
            raise InvalidStrategy(f"sum K^dagger K exceeds the identity by {excess:.3e}")

    @classmethod
    def scaled_unitary(cls, p: float, u) -> "Subchannel":
        """``rho -> p U rho U^dagger``."""
        return cls([np.sqrt(p) * np.asarray(u, dtype=complex)])

    @property
    def dim_in(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def dim_out(self) -> int:
        return self.kraus[0].shape[0]

    def gram(self) -> np.ndarray:
        return sum(k.conj().T @ k for k in self.kraus)

    def __call__(self, rho) -> np.ndarray:
        return qmath.hermitian_part(sum(k @ rho @ k.conj().T for k in self.kraus))

    def adjoint(self, m) -> np.ndarray:
        return qmath.hermitian_part(sum(k.conj().T @ m @ k for k in self.kraus))


@dataclass(frozen=True)
class Strategy:
    """Subchannels summing to a CPTP map, and a POVM aligned with them by index."""

    subchannels: tuple
    povm: tuple
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        subs = tuple(s if isinstance(s, Subchannel) else Subchannel(s) for s in self.subchannels)
        povm = tuple(qmath.hermitian_part(np.asarray(m, dtype=complex)) for m in self.povm)
        object.__setattr__(self, "subchannels", subs)
        object.__setattr__(self, "povm", povm)
        if not subs or len(subs) != len(povm):
            raise InvalidStrategy(f"{len(subs)} subchannels but {len(povm)} POVM elements")
        d_in, d_out = subs[0].dim_in, subs[0].dim_out
        if any(s.dim_in != d_in or s.dim_out != d_out for s in subs):
            raise InvalidStrategy("subchannels have inconsistent dimensions")
        if any(m.shape != (d_out, d_out) for m in povm):
            raise InvalidStrategy("POVM elements do not match the subchannel output dimension")
        res = float(np.linalg.norm(sum(s.gram() for s in subs) - np.eye(d_in)))
        if res > STRATEGY_TOL:
            raise InvalidStrategy(f"subchannels do not sum to a CPTP map (residual {res:.3e})")
        res = float(np.linalg.norm(sum(povm) - np.eye(d_out)))
        if res > STRATEGY_TOL:
            raise InvalidStrategy(f"POVM does not sum to the identity (residual {res:.3e})")
        for i, m in enumerate(povm):
            if qmath.min_eigenvalue(m) < -STRATEGY_TOL:
                raise InvalidStrategy(f"POVM element {i} is not PSD")

    @property
    def dim_in(self) -> int:
        return self.subchannels[0].dim_in

    def __len__(self) -> int:
        return len(self.subchannels)


@dataclass(frozen=True)
class DiscriminationOutcome:
    p_succ: float
    per_branch: tuple


def succ_probability(strategy: Strategy, rho) -> DiscriminationOutcome:
    """``sum_i tr(M_i Psi_i(rho))``."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (strategy.dim_in, strategy.dim_in):
        raise DimensionMismatch(f"state of shape {rho.shape} vs strategy input dim {strategy.dim_in}")
    branch = tuple(float(np.trace(m @ s(rho)).real) for s, m in zip(strategy.subchannels, strategy.povm))
    return DiscriminationOutcome(float(sum(branch)), branch)


def success_ratio(strategy: Strategy, rho, sigma) -> float:
    return succ_probability(strategy, rho).p_succ / succ_probability(strategy, sigma).p_succ


# -- optimal constructions ---------------------------------------------------------


def shift_matrix(d: int) -> np.ndarray:
    """``|j> -> |j + 1 mod d>``."""
    return np.roll(np.eye(d), 1, axis=0).astype(complex)


def twirl_unitaries(d: int, basis=None) -> list:
    """Powers of the cyclic shift conjugated into ``basis`` (columns).

    For every basis vector ``v_j``, ``sum_i U_i |v_j><v_j| U_i^dagger = I``.
    """
    v = np.eye(d, dtype=complex) if basis is None else np.asarray(basis, dtype=complex)
    s = shift_matrix(d)
    out, power = [], np.eye(d, dtype=complex)
    for _ in range(d):
        out.append(v @ power @ v.conj().T)
        power = s @ power
    return out


def _distribution(p, n: int | None = None) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise BadDistribution("probabilities must form a non-empty vector")
    if n is not None and p.size != n:
        raise BadDistribution(f"expected {n} probabilities, got {p.size}")
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
        raise BadDistribution("probabilities must be nonnegative and sum to one")
    return p


def lemma3_strategy(rho, sigma, p=None) -> Strategy:
    """Strategy whose success ratio between ``rho`` and ``sigma`` is ``1 + R+(rho, sigma)``.

    ``Psi_i = p_i U_i . U_i^dagger`` and ``M_i = U_i X U_i^dagger / tr X`` with
    ``X`` the dual witness and ``U_i`` the shift twirl in its eigenbasis.
    The ratio does not depend on ``p`` (uniform by default).
    """
    try:
        sol = sdp.solve_relative_dual(rho, sigma)
    except UnboundedProgram as exc:
        raise UnboundedRatio(str(exc), leakage=exc.leakage) from exc
    x = sol.witness
    d = x.shape[0]
    p = np.full(d, 1.0 / d) if p is None else _distribution(p, d)
    _, vecs = qmath.hermitian_eig(x)
    us = twirl_unitaries(d, vecs)
    tr_x = float(np.trace(x).real)
    subs = [Subchannel.scaled_unitary(pi, u) for pi, u in zip(p, us)]
    povm = [u @ x @ u.conj().T / tr_x for u in us]
    return Strategy(subs, povm, info={"relative_robustness": sol.optimal_value,
                                      "duality_gap": sol.duality_gap})


def infinite_ratio_strategy(rho, sigma) -> Strategy:
    """Strategy with zero success on ``sigma`` and positive success on ``rho``.

    One identity branch measured by the projector ``P`` onto the kernel of
    ``sigma``, and a zero branch holding ``I - P``. The success on ``rho``
    is ``tr(P rho)``, stored as ``info['c']``; no strategy with zero success
    on ``sigma`` does better.
    """
    rho = qmath.check_hermitian(rho)
    sigma = qmath.check_hermitian(sigma)
    if rho.shape != sigma.shape:
        raise DimensionMismatch(f"{rho.shape} vs {sigma.shape}")
    leak = sdp.support_leakage(rho, sigma)
    if leak <= sdp.LEAKAGE_TOL:
        raise SupportsActuallyNested(f"support of rho lies inside support of sigma (leakage {leak:.3e})")
    d = rho.shape[0]
    _, ker = qmath.support_basis(sigma, sdp.SUPPORT_TOL)
    proj = ker @ ker.conj().T
    strat = Strategy([Subchannel([np.eye(d)]), Subchannel([np.zeros((d, d))])],
                     [proj, qmath.hermitian_part(np.eye(d) - proj)], info={"leakage": leak})
    strat.info["c"] = succ_probability(strat, rho).p_succ
    return strat


def is_perfect_strategy(strategy: Strategy, sigma, tol: float = PERFECT_TOL) -> bool:
    """True iff ``M_i - Pi_{Psi_i(sigma)}`` is PSD for every branch."""
    sigma = np.asarray(sigma, dtype=complex)
    for sub, m in zip(strategy.subchannels, strategy.povm):
        out = sub(sigma)
        supp, _ = qmath.support_basis(out, SUPPORT_TOL)
        if supp.shape[1] == 0:
            continue
        if qmath.min_eigenvalue(m - supp @ supp.conj().T) < -tol:
            return False
    return True


def _unitary_with_first_column(vec, rng) -> np.ndarray:
    """A unitary whose first column is ``vec``; the completion is Haar-random."""
    d = len(vec)
    a = np.column_stack([vec, states.random_unitary(d, rng)[:, : d - 1]])
    q, r = np.linalg.qr(a)
    q = q * (np.diag(r) / np.abs(np.diag(r)))  # fix column phases so q[:, 0] == vec
    return q


def omega_sigma_strategy(sigma, p=None, seed=None, basis=None) -> Strategy:
    """A perfect strategy for the pure state ``sigma``.

    ``U_i`` sends ``|phi_sigma>`` to the basis vector ``|phi_i>`` and
    ``M_i = |phi_i><phi_i|``; with fewer than ``d`` branches the leftover
    part of the identity is added to the last POVM element. ``basis``
    defaults to the computational basis; ``seed`` draws the unitary
    completions (and the basis, when ``basis="random"``).
    """
    sigma = np.asarray(sigma, dtype=complex)
    phi = states.dominant_vector(sigma) if sigma.ndim == 2 else sigma / np.linalg.norm(sigma)
    d = phi.shape[0]
    p = np.full(d, 1.0 / d) if p is None else _distribution(p)
    n = p.size
    if n > d:
        raise BadDistribution(f"at most {d} branches fit orthogonal targets in dimension {d}")
    rng = np.random.default_rng(seed)
    if basis is None:
        basis = np.eye(d, dtype=complex)
    elif isinstance(basis, str) and basis == "random":
        basis = states.random_unitary(d, rng)
    else:
        basis = np.asarray(basis, dtype=complex)
    a = _unitary_with_first_column(phi, rng)
    subs, povm = [], []
    for i in range(n):
        b = _unitary_with_first_column(basis[:, i], rng)
        subs.append(Subchannel.scaled_unitary(p[i], b @ a.conj().T))
        povm.append(qmath.projector(basis[:, i]))
    povm[-1] = povm[-1] + qmath.hermitian_part(np.eye(d) - sum(povm))
    return Strategy(subs, povm)


def min_succ_over_omega(rho, sigma, n_random: int = 0, seed=None, *, slack: float = 1e-6):
    """``min`` of ``P_succ(rho)`` over perfect strategies for the pure state ``sigma``.

    Returns ``(value, sampled_min)``: the success of the minimizing
    construction, and the smallest success among ``n_random`` sampled
    perfect strategies (``inf`` when none are sampled). A sampled value
    below ``F(sigma, rho) - slack`` raises, as it would contradict the
    lower bound.
    """
    rho = np.asarray(rho, dtype=complex)
    value = succ_probability(omega_sigma_strategy(sigma, seed=seed), rho).p_succ
    fid = qmath.fidelity(rho, sigma)
    rng = np.random.default_rng(seed)
    sampled = np.inf
    d = rho.shape[0]
    for _ in range(n_random):
        n = int(rng.integers(1, d + 1))
        strat = omega_sigma_strategy(sigma, rng.dirichlet(np.ones(n)), rng, basis="random")
        sampled = min(sampled, succ_probability(strat, rho).p_succ)
    if sampled < fid - slack:
        raise AssertionError(f"perfect strategy succeeded with {sampled} < F = {fid}")
    return value, sampled


# -- random strategies -------------------------------------------------------------


def random_povm(d: int, n: int, seed=None) -> list:
    """Normalized Wishart POVM with ``n`` elements."""
    rng = np.random.default_rng(seed)
    ws = []
    for _ in range(n):
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        ws.append(g @ g.conj().T)
    inv_sqrt = qmath.psd_function(sum(ws), lambda w: 1.0 / np.sqrt(w))
    return [qmath.hermitian_part(inv_sqrt @ w @ inv_sqrt) for w in ws]


def random_strategy(d: int, n: int, seed=None, n_kraus: int | None = None) -> Strategy:
    """Random CPTP map split into ``n`` subchannels by a random instrument, plus a random POVM."""
    rng = np.random.default_rng(seed)
    n_kraus = int(rng.integers(1, d + 1)) if n_kraus is None else n_kraus
    ch = states.random_kraus_channel(d, n_kraus, rng)
    split = random_povm(d, n, rng)
    subs = []
    for e in split:
        root = qmath.sqrtm_psd(e)
        subs.append(Subchannel([root @ k for k in ch.kraus]))
    return Strategy(subs, random_povm(d, n, rng))


def perturb_strategy(strategy: Strategy, eps: float, seed=None, mode: str = "povm") -> Strategy:
    """Valid nearby strategy.

    ``povm`` mixes the POVM with a random one; ``rotate`` applies a random
    unitary ``exp(i eps H)`` after every subchannel; ``swap`` exchanges two
    POVM elements.
    """
    rng = np.random.default_rng(seed)
    d = strategy.subchannels[0].dim_out
    subs, povm = list(strategy.subchannels), list(strategy.povm)
    if mode == "povm":
        other = random_povm(d, len(povm), rng)
        povm = [(1 - eps) * m + eps * r for m, r in zip(povm, other)]
    elif mode == "rotate":
        h = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        h = h + h.conj().T
        h /= np.linalg.norm(h, 2)
        w, v = np.linalg.eigh(h)
        u = (v * np.exp(1j * eps * w)) @ v.conj().T
        subs = [Subchannel([u @ k for k in s.kraus]) for s in subs]
    elif mode == "swap":
        if len(povm) < 2:
            raise ValueError("swap needs at least two branches")
        i, j = rng.choice(len(povm), size=2, replace=False)
        povm[i], povm[j] = povm[j], povm[i]
    else:
        raise ValueError(f"unknown perturbation mode {mode!r}")
    return Strategy(subs, povm)


def identity_strategy(d: int) -> Strategy:
    return Strategy([Subchannel([np.eye(d)])], [np.eye(d)])


# -- verification sweeps -----------------------------------------------------------

RATIO_TOL = 1e-5
BOUND_SLACK = 1e-6
ALPHA_SET_TOL = 1e-4
MAXMIN_TOL = 1e-4
ZERO_SUCCESS_TOL = 1e-10


def _sample_alpha_set(d: int, alpha: float, rng) -> np.ndarray:
    """A state with ``R_r <= alpha``: a random state pulled toward its diagonal."""
    tau = states.random_density(d, int(rng.integers(1, d + 1)), rng)
    r = robustness(tau).value
    if r <= alpha:
        return tau
    lam = alpha / r  # R_r is convex and vanishes on the diagonal part
    return lam * tau + (1 - lam) * np.diag(np.diag(tau))


def alpha_set_ratio_case(rho, alpha: float, *, n_samples: int = 20, seed=None, case_id: int = 0):
    """``min_{sigma in C^alpha} max_strategies P(rho)/P(sigma)`` against ``max((1+R_r)/(1+alpha), 1)``.

    The minimizing ``sigma`` comes from a joint program (or from the
    robustness certificate at ``alpha = 0``) and the inner maximum is realized
    by the twirled ratio strategy. Sampled members of ``C^alpha`` must not do better.
    """
    rho = np.asarray(rho, dtype=complex)
    d = rho.shape[0]
    base = robustness(rho)
    target = max((1.0 + base.value) / (1.0 + alpha), 1.0)
    if alpha == 0:
        cert = sdp.solve_robustness_coherence(rho).certificate
        sigma_star = cert / np.trace(cert).real
    else:
        _, sigma_star = sdp.min_relative_over_alpha_set(rho, alpha)
    constructed = success_ratio(lemma3_strategy(rho, sigma_star), rho, sigma_star)
    rng = np.random.default_rng(seed)
    sampled = np.inf
    for k in range(n_samples):
        s = _sample_alpha_set(d, alpha, rng)
        if k % 2:
            s = 0.5 * (s + sigma_star)  # C^alpha is convex
        sampled = min(sampled, 1.0 + relative_robustness(rho, s).value)
    residual = abs(constructed - target)
    ok = residual <= ALPHA_SET_TOL and sampled >= constructed - BOUND_SLACK
    return CaseRecord(case_id, d, target, constructed, residual, bool(ok), alpha=alpha,
                      extra={"check": "alpha_set_ratio", "robustness": base.value,
                             "sampled_min_ratio": sampled})


def ratio_sweep(rho, sigma, n_random: int = 500, seed=None, *, alphas=(), case_id: int = 0):
    """Ratio checks on one pair: the constructed ratio and the bound over random strategies.

    For support-mismatched pairs the infinite-ratio construction is checked
    instead. Each ``alpha`` in ``alphas`` adds an ``alpha_set_ratio_case`` record for ``rho``.
    """
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    d = rho.shape[0]
    report = ScenarioReport("ratio_sweep", params={"n_random": n_random, "alphas": list(alphas)},
                            seed=seed if isinstance(seed, int) else None)
    rr = relative_robustness(rho, sigma).value
    rng = np.random.default_rng(seed)
    if np.isinf(rr):
        strat = infinite_ratio_strategy(rho, sigma)
        p_sigma = succ_probability(strat, sigma).p_succ
        c = strat.info["c"]
        ok = p_sigma <= ZERO_SUCCESS_TOL and c > 0
        report.add(CaseRecord(case_id, d, np.inf, c, p_sigma, bool(ok),
                              extra={"check": "infinite_branch", "p_succ_sigma": p_sigma}))
    else:
        strat = lemma3_strategy(rho, sigma, p=rng.dirichlet(np.ones(d)))
        constructed = success_ratio(strat, rho, sigma)
        residual = abs(constructed - (1.0 + rr))
        report.add(CaseRecord(case_id, d, 1.0 + rr, constructed, residual,
                              residual <= RATIO_TOL, extra={"check": "ratio_constructed"}))
        best = 0.0
        for _ in range(n_random):
            s = random_strategy(d, int(rng.integers(2, 2 * d + 1)), rng)
            best = max(best, success_ratio(s, rho, sigma))
        excess = max(best - (1.0 + rr), 0.0)
        report.add(CaseRecord(case_id, d, 1.0 + rr, best, excess, excess <= BOUND_SLACK,
                              extra={"check": "ratio_bound", "samples": n_random}))
    for alpha in alphas:
        report.add(alpha_set_ratio_case(rho, alpha, seed=rng, case_id=case_id))
    return report


def random_maximal_state(theory: str, d: int, seed=None) -> np.ndarray:
    rng = np.random.default_rng(seed)
    if theory == "coherence":
        return states.max_coherent(d, states.random_phases(d, rng))
    if theory == "entanglement":
        return states.max_entangled(d, states.random_unitary(d, rng), states.random_unitary(d, rng))
    raise ValueError(f"unknown theory {theory!r}")


def theorem7_check(rho, theory: str = "coherence", dims=None, *, n_random: int = 64,
                   n_omega: int = 8, seed=None, case_id: int = 0):
    """``max_sigma min_{Omega_sigma} P_succ(rho)`` against ``1 - D_g(rho)``.

    Candidates are the deficiency optimizer's argmax plus ``n_random``
    random maximal states. ``notes['argmax_margin']`` is how far the argmax
    beats the best random candidate.
    """
    rho = np.asarray(rho, dtype=complex)
    if theory == "coherence":
        res = coherence_deficiency(rho)
        d_local = rho.shape[0]
    elif theory == "entanglement":
        res = entanglement_deficiency(rho, dims)
        d_local = res.local_unitaries[0].shape[0]
    else:
        raise ValueError(f"unknown theory {theory!r}")
    rng = np.random.default_rng(seed)
    best_arg, _ = min_succ_over_omega(rho, res.argmax_state, n_omega, rng)
    best_rand = -np.inf
    for _ in range(n_random):
        cand = random_maximal_state(theory, d_local, rng)
        val, _ = min_succ_over_omega(rho, cand, 0, rng)
        best_rand = max(best_rand, val)
    maxmin = max(best_arg, best_rand)
    target = 1.0 - res.value
    residual = abs(maxmin - target)
    report = ScenarioReport("maxmin", params={"theory": theory, "n_random": n_random},
                            seed=seed if isinstance(seed, int) else None)
    report.add(CaseRecord(case_id, rho.shape[0], target, maxmin, residual, residual <= MAXMIN_TOL,
                          extra={"check": "maxmin_fidelity", "theory": theory,
                                 "argmax_value": best_arg, "random_best": best_rand,
                                 "certified": res.certified}))
    report.notes["argmax_margin"] = best_arg - best_rand
    report.notes["argmax_wins"] = bool(best_arg - best_rand > 1e-6)
    report.notes["witness"] = res.argmax_state
    return report
