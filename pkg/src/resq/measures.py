"""Resource quantifiers: robustness family and geometric deficiencies.

Coherence is measured in the computational basis; the free set is the set
of diagonal density matrices. Entanglement deficiency is defined for
bipartitions with equal local dimensions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial

import numpy as np
from scipy.optimize import minimize
from scipy.stats import unitary_group

from . import qmath, sdp
from .errors import (AlphaOutOfRange, DimensionMismatch, NonSquareBipartition,
                     OptimizerStalled, UnboundedProgram)
from .states import dominant_vector, is_pure, max_coherent, max_entangled, schmidt

ZERO_TOL = 1e-7
FEASIBILITY_TOL = 5e-8
PHASE_RESTARTS = 32
UNITARY_RESTARTS = 16


@dataclass
class RobustnessResult:
    value: float
    witness: np.ndarray | None = None
    mixing_state: np.ndarray | None = None
    alpha: float | None = None
    duality_gap: float | None = None

    @property
    def infinite(self) -> bool:
        return math.isinf(self.value)

    def mixture(self, rho) -> np.ndarray:
        """``(rho + s tau) / (1 + s)`` for the attached mixing state."""
        if self.mixing_state is None:
            return np.asarray(rho, dtype=complex)
        s = self.value
        return (np.asarray(rho) + s * self.mixing_state) / (1.0 + s)


@dataclass
class DeficiencyResult:
    value: float
    argmax_state: np.ndarray
    optimizer_trace: list = field(default_factory=list)
    certified: bool = False
    phases: np.ndarray | None = None
    local_unitaries: tuple | None = None

    @property
    def fidelity(self) -> float:
        return 1.0 - self.value


# -- robustness --------------------------------------------------------------------


def robustness(rho) -> RobustnessResult:
    """Generalized robustness of coherence with its mixing state."""
    sol = sdp.solve_robustness_coherence(rho)
    s = sol.optimal_value
    tau = None
    if s > ZERO_TOL:
        tau = qmath.hermitian_part((sol.certificate - np.asarray(rho)) / s)
    return RobustnessResult(s, witness=sol.witness, mixing_state=tau, duality_gap=sol.duality_gap)


def _check_alpha(rho, alpha: float) -> int:
    d = np.asarray(rho).shape[0]
    if not 0.0 <= alpha < d - 1:
        raise AlphaOutOfRange(f"alpha must lie in [0, {d - 1}), got {alpha}")
    return d


def alpha_superiority(rho, alpha: float) -> RobustnessResult:
    """``max((R_r - alpha) / (1 + alpha), 0)``."""
    _check_alpha(rho, alpha)
    base = robustness(rho)
    value = max((base.value - alpha) / (1.0 + alpha), 0.0)
    # the mixing state of R_r also reaches the alpha set at the smaller weight
    tau = base.mixing_state if value > 0 else None
    return RobustnessResult(value, witness=base.witness, mixing_state=tau, alpha=alpha,
                            duality_gap=base.duality_gap)


def alpha_superiority_direct(rho, alpha: float, *, value_tol: float = 2 * FEASIBILITY_TOL,
                             max_solves: int = 60) -> RobustnessResult:
    """Minimal mixing weight reaching ``{sigma : R_r(sigma) <= alpha}``, from the definition.

    In the mixing fraction ``lam = s / (1 + s)`` the reachable minimum
    ``h(lam) = min_tau R_r((1 - lam) rho + lam tau)`` is convex and
    nonincreasing. The crossing ``h = alpha`` is bracketed and found by
    Newton steps from the left, with secant and bisection fallbacks.
    """
    d = _check_alpha(rho, alpha)
    rho = np.asarray(rho, dtype=complex)

    h = partial(_mixture_value, rho)
    h_lo, tau_lo, slope_lo = h(0.0)
    if h_lo <= alpha + FEASIBILITY_TOL:
        return RobustnessResult(0.0, alpha=alpha)
    lo, hi = 0.0, d / (d + 1.0)
    h_hi, tau_hi, _ = h(hi)
    if h_hi > alpha + FEASIBILITY_TOL:
        raise OptimizerStalled(f"mixing weight {d} does not reach the alpha set",
                               best_value=None)
    for _ in range(max_solves):
        if h_lo - alpha <= value_tol:
            lam, tau = lo, tau_lo
            break
        # for alpha > 0 h is strictly decreasing near the crossing; at alpha = 0
        # it flattens past the root, so only the left end can certify it there
        if (alpha > 0 and alpha - h_hi <= value_tol) or hi - lo <= 1e-10:
            lam, tau = hi, tau_hi
            break
        cand = lo + (h_lo - alpha) / -slope_lo if slope_lo < 0 else None
        if cand is None or not lo < cand < hi:
            # secant through the bracket ends, kept away from either end
            cand = lo + (h_lo - alpha) * (hi - lo) / (h_lo - h_hi)
            width = hi - lo
            if not lo + 0.01 * width < cand < hi - 0.01 * width:
                cand = 0.5 * (lo + hi)
        val, tau, slope = h(cand)
        if val > alpha + FEASIBILITY_TOL:
            lo, h_lo, tau_lo, slope_lo = cand, val, tau, slope
        else:
            hi, h_hi, tau_hi = cand, val, tau
    else:
        raise OptimizerStalled("root search did not converge", best_value=hi / (1 - hi))
    return RobustnessResult(lam / (1.0 - lam), mixing_state=tau, alpha=alpha)


def _mixture_value(rho, lam: float):
    """``h(lam)``, the optimal tau, and the envelope derivative ``tr Z (tau - rho)``."""
    val, tau, z = sdp.mixture_program(rho, lam)
    slope = float(np.trace(z @ (tau - rho)).real)
    return val, tau, slope


def relative_robustness(rho, sigma) -> RobustnessResult:
    """Relative robustness of ``rho`` with respect to ``sigma``; ``inf`` when supports mismatch."""
    try:
        sol = sdp.solve_relative_dual(rho, sigma)
    except UnboundedProgram:
        return RobustnessResult(math.inf)
    s = sol.optimal_value
    tau = None
    if s > ZERO_TOL:
        tau = qmath.hermitian_part(((1.0 + s) * np.asarray(sigma) - np.asarray(rho)) / s)
    return RobustnessResult(s, witness=sol.witness, mixing_state=tau, duality_gap=sol.duality_gap)


# -- coherence deficiency ----------------------------------------------------------


def phase_objective(rho, theta) -> float:
    """``<psi(theta)| rho |psi(theta)>`` for the maximally coherent ``psi(theta)``."""
    u = np.exp(1j * np.asarray(theta, dtype=float))
    return float(np.real(np.vdot(u, rho @ u))) / len(u)


def phase_gradient(rho, theta) -> np.ndarray:
    u = np.exp(1j * np.asarray(theta, dtype=float))
    return 2.0 * np.imag(u.conj() * (rho @ u)) / len(u)


def _phase_ascent(rho, theta, max_sweeps=5000, tol=1e-14):
    """Batched exact coordinate ascent on the phases; ``theta`` is (restarts, d)."""
    d = rho.shape[0]
    u = np.exp(1j * theta)
    diag = np.diag(rho)
    trace = []
    prev = None
    for sweep in range(max_sweeps):
        for k in range(d):
            # maximize Re(conj(u_k) * c_k): u_k -> c_k / |c_k|
            ck = (rho[k] @ u.T) - diag[k] * u[:, k]
            mag = np.abs(ck)
            ok = mag > 1e-300
            u[ok, k] = ck[ok] / mag[ok]
        vals = np.real(np.einsum("ri,ij,rj->r", u.conj(), rho, u)) / d
        trace.append((sweep, float(vals.max())))
        if prev is not None and np.max(np.abs(vals - prev)) < tol:
            break
        prev = vals
    return np.angle(u), vals, trace


def coherent_fraction(rho, *, restarts: int = PHASE_RESTARTS, seed=0, force_optimizer=False):
    """Maximal overlap with a maximally coherent state and the optimal phases."""
    rho = qmath.check_hermitian(rho)
    d = rho.shape[0]
    if not force_optimizer and is_pure(rho):
        psi = dominant_vector(rho)
        theta = np.angle(psi)
        theta = theta - theta[0]
        return float(np.sum(np.abs(psi)) ** 2 / d), theta, [], True
    rng = np.random.default_rng(seed)
    starts = rng.uniform(0, 2 * np.pi, size=(restarts, d))
    # include the phases of the dominant eigenvector as a warm start
    starts[0] = np.angle(dominant_vector(rho))
    theta, vals, trace = _phase_ascent(rho, starts)
    best = int(np.argmax(vals))
    res = minimize(lambda t: -phase_objective(rho, t), theta[best],
                   jac=lambda t: -phase_gradient(rho, t), method="BFGS",
                   options={"gtol": 1e-12})
    th = res.x if -res.fun >= vals[best] else theta[best]
    f = phase_objective(rho, th)
    trace.append((len(trace), f))
    bound = float(np.sum(np.abs(rho))) / d
    th = np.mod(th - th[0], 2 * np.pi)
    return f, th, trace, bool(bound - f <= 1e-9)


def coherence_deficiency(rho, *, restarts: int = PHASE_RESTARTS, seed=0,
                         force_optimizer: bool = False) -> DeficiencyResult:
    """``1 - max_theta <psi(theta)| rho |psi(theta)>``.

    Pure inputs use the closed form ``1 - sum_ij |rho_ij| / d`` unless
    ``force_optimizer`` is set. Mixed inputs run ``restarts`` coordinate
    ascents on the phases and polish the best with BFGS; the result is
    flagged ``certified`` only when it meets the upper bound
    ``sum_ij |rho_ij| / d``.
    """
    f, theta, trace, certified = coherent_fraction(rho, restarts=restarts, seed=seed,
                                                   force_optimizer=force_optimizer)
    d = np.asarray(rho).shape[0]
    value = float(np.clip(1.0 - f, 0.0, 1.0))
    return DeficiencyResult(value, max_coherent(d, theta), trace, certified, phases=theta)


# -- entanglement deficiency -------------------------------------------------------


def _square_dim(rho, dims) -> int:
    n = np.asarray(rho).shape[0]
    if dims is None:
        d = int(round(math.sqrt(n)))
        dims = (d, d)
    d_a, d_b = (int(x) for x in dims)
    if d_a != d_b:
        raise NonSquareBipartition(f"local dimensions differ: {d_a} x {d_b}")
    if d_a * d_b != n:
        raise DimensionMismatch(f"state of dimension {n} is not {d_a} x {d_b}")
    return d_a


def _unitary_ascent(rho, u, max_iter=5000, tol=1e-14):
    """Minorize-maximize ascent of ``<Phi_U| rho |Phi_U>`` over unitaries.

    ``u`` is (restarts, d, d); ``Phi_U = (I (x) U) |Phi+>``. The objective is
    a convex quadratic in ``U``, so maximizing its linearization (a polar
    decomposition) never decreases it.
    """
    r, d, _ = u.shape
    trace = []
    prev = None
    for it in range(max_iter):
        v = np.swapaxes(u, 1, 2).reshape(r, d * d) / np.sqrt(d)
        w = v @ rho.T
        vals = np.real(np.einsum("ri,ri->r", v.conj(), w))
        trace.append((it, float(vals.max())))
        if prev is not None and np.max(np.abs(vals - prev)) < tol:
            break
        prev = vals
        a = np.conj(w.reshape(r, d, d))
        p, _, qh = np.linalg.svd(a)
        u = np.conj(np.swapaxes(qh, 1, 2)) @ np.conj(np.swapaxes(p, 1, 2))
    return u, vals, trace


def fully_entangled_fraction(rho, dims=None, *, restarts: int = UNITARY_RESTARTS, seed=0,
                             force_optimizer=False):
    rho = qmath.check_hermitian(rho)
    d = _square_dim(rho, dims)
    if not force_optimizer and is_pure(rho):
        sd = schmidt(dominant_vector(rho), (d, d))
        return float(np.sum(sd.coefficients) ** 2 / d), (sd.basis_a, sd.basis_b), [], True
    rng = np.random.default_rng(seed)
    starts = np.array([unitary_group.rvs(d, random_state=rng) for _ in range(restarts)])
    starts[0] = np.eye(d)
    u, vals, trace = _unitary_ascent(rho, starts)
    best = int(np.argmax(vals))
    return float(vals[best]), (np.eye(d, dtype=complex), u[best]), trace, False


def entanglement_deficiency(rho, dims=None, *, restarts: int = UNITARY_RESTARTS, seed=0,
                            force_optimizer: bool = False) -> DeficiencyResult:
    """``1 - max`` fidelity with a maximally entangled state (equal local dimensions).

    Pure inputs use the Schmidt formula ``1 - (sum_i q_i)^2 / d``.
    """
    f, (u_a, u_b), trace, certified = fully_entangled_fraction(
        rho, dims, restarts=restarts, seed=seed, force_optimizer=force_optimizer)
    d = u_a.shape[0]
    value = float(np.clip(1.0 - f, 0.0, 1.0))
    return DeficiencyResult(value, max_entangled(d, u_a, u_b), trace, certified,
                            local_unitaries=(u_a, u_b))


MEASURES = {
    "robustness": robustness,
    "alpha_superiority": alpha_superiority,
    "alpha_superiority_direct": alpha_superiority_direct,
    "coherence_deficiency": coherence_deficiency,
    "entanglement_deficiency": entanglement_deficiency,
}
