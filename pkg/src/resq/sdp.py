"""Small dense SDP solver and the convex programs built on it.

The solver handles problems in inequality form::

    minimize    c . y
    subject to  F0_b + sum_k y_k Fk_b  >= 0      for every block b

with complex Hermitian blocks. It follows the central path of the log-det
barrier with damped Newton steps, shrinking the barrier weight by a constant
factor after each centering. Dual matrices ``Z_b = S_b^{-1} / t`` are read
off the central path; each program below restores exact dual feasibility
before reporting a certified duality gap.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import qmath
from .errors import DimensionMismatch, SolverDiverged, UnboundedProgram

GAP_TOL = 1e-8
MU_FACTOR = 0.25
MAX_ITER = 500
MAX_CENTERING = 40
SUPPORT_TOL = 1e-9
LEAKAGE_TOL = 1e-8


@dataclass
class Block:
    f0: np.ndarray  # (n, n)
    fk: np.ndarray  # (m, n, n)


@dataclass
class BarrierResult:
    y: np.ndarray
    z: list  # dual matrix per block
    iterations: int
    gap_bound: float
    trace: list = field(default_factory=list)  # (newton_iter, t, primal, duality measure)


def _slacks(blocks, y):
    return [b.f0 + np.tensordot(y, b.fk, axes=1) for b in blocks]


def _logdet_or_none(slacks):
    total = 0.0
    for s in slacks:
        try:
            c = np.linalg.cholesky(s)
        except np.linalg.LinAlgError:
            return None
        total += 2.0 * float(np.sum(np.log(np.abs(np.diag(c)))))
    return total


def barrier_solve(c, blocks, y0, *, gap_tol=GAP_TOL, mu_factor=MU_FACTOR, max_iter=MAX_ITER,
                  t0=None, on_center=None) -> BarrierResult:
    """Path-following log-det barrier method.

    ``y0`` must be strictly feasible. ``on_center(y, z, t)`` is called after
    every centering, which lets callers record restored dual values.
    """
    c = np.asarray(c, dtype=float)
    y = np.asarray(y0, dtype=float).copy()
    nu = sum(b.f0.shape[0] for b in blocks)
    slacks = _slacks(blocks, y)
    logdet = _logdet_or_none(slacks)
    if logdet is None:
        raise SolverDiverged("initial point is not strictly feasible")
    t = t0 if t0 is not None else nu / max(1.0, abs(float(c @ y)))
    trace = []
    it = 0
    while True:
        inner = 0
        while inner < MAX_CENTERING:
            inner += 1
            if it >= max_iter:
                raise SolverDiverged(f"iteration cap {max_iter} reached (t = {t:.3e})",
                                     best_value=float(c @ y))
            it += 1
            grad = t * c
            hess = np.zeros((len(y), len(y)))
            for s, b in zip(slacks, blocks):
                s_inv = np.linalg.inv(s)
                a = np.matmul(s_inv, b.fk)  # (m, n, n)
                grad = grad - np.einsum("kii->k", a).real
                hess += np.einsum("kij,lji->kl", a, a).real
            try:
                dy = -np.linalg.solve(hess, grad)
            except np.linalg.LinAlgError:
                dy = -np.linalg.lstsq(hess, grad, rcond=None)[0]
            decrement = float(-grad @ dy)
            if decrement < 1e-8:
                break
            # Armijo on the barrier merit, written as a difference to avoid
            # cancelling the large t * c.y term
            slope = t * float(c @ dy)
            step = 1.0
            while step >= 1e-14:
                y_new = y + step * dy
                s_new = _slacks(blocks, y_new)
                ld = _logdet_or_none(s_new)
                if ld is not None and step * slope - (ld - logdet) <= -0.25 * step * decrement:
                    break
                step *= 0.5
            else:
                break
            if np.array_equal(y_new, y):
                break
            y, slacks, logdet = y_new, s_new, ld
        z = [qmath.hermitian_part(np.linalg.inv(s)) / t for s in slacks]
        trace.append((it, t, float(c @ y), nu / t))
        if on_center is not None:
            on_center(y, z, t)
        if nu / t <= gap_tol:
            return BarrierResult(y, z, it, nu / t, trace)
        t /= mu_factor


@dataclass
class SdpSolution:
    """Optimal value with both witnesses.

    ``witness`` is the maximizer ``X`` of the max-form program
    ``max tr(rho X) - 1``; ``certificate`` is the matrix of the min-form
    program (the dominating diagonal ``D`` for robustness, ``t * sigma`` for
    relative robustness).
    """

    optimal_value: float
    witness: np.ndarray
    certificate: np.ndarray
    duality_gap: float
    iterations: int
    primal_trace: list = field(default_factory=list)
    dual_trace: list = field(default_factory=list)

    @property
    def primal_witness(self) -> np.ndarray:
        return self.witness


# -- robustness of coherence -------------------------------------------------------


def _coherence_dual(z, rho):
    """Rescale ``z`` to unit diagonal; returns (Z, tr(rho Z) - 1)."""
    dz = np.sqrt(np.clip(np.diag(z).real, 1e-300, None))
    zn = z / np.outer(dz, dz)
    return zn, float(np.trace(rho @ zn).real) - 1.0


def solve_robustness_coherence(rho, **kw) -> SdpSolution:
    """``min { tr D - 1 : D diagonal, D >= rho }``.

    Dual: ``max { tr(rho Z) - 1 : Z >= 0, Z_ii = 1 }``.
    """
    rho = qmath.check_hermitian(rho)
    d = rho.shape[0]
    fk = np.zeros((d, d, d), dtype=complex)
    fk[np.arange(d), np.arange(d), np.arange(d)] = 1.0
    block = Block(-rho, fk)
    y0 = np.full(d, qmath.max_eigenvalue(rho) + 0.1)
    primal, dual = [], []

    def record(y, z, t):
        primal.append(float(y.sum()) - 1.0)
        dual.append(_coherence_dual(z[0], rho)[1])

    res = barrier_solve(np.ones(d), [block], y0, on_center=record, **kw)
    z, dval = _coherence_dual(res.z[0], rho)
    pval = float(res.y.sum()) - 1.0
    return SdpSolution(
        optimal_value=max(pval, 0.0),
        witness=z,
        certificate=np.diag(res.y).astype(complex),
        duality_gap=pval - dval,
        iterations=res.iterations,
        primal_trace=primal,
        dual_trace=dual,
    )


# -- relative robustness -----------------------------------------------------------


def support_leakage(rho, sigma, tol: float = SUPPORT_TOL) -> float:
    """``||rho P_ker(sigma)||_F``; zero iff supp(rho) lies inside supp(sigma)."""
    _, ker = qmath.support_basis(sigma, tol)
    if ker.shape[1] == 0:
        return 0.0
    return float(np.linalg.norm(rho @ ker))


def solve_relative_dual(rho, sigma, **kw) -> SdpSolution:
    """``max { tr(rho X) - 1 : X >= 0, tr(sigma X) <= 1 }``.

    Solved through its min-form ``min { t - 1 : t sigma >= rho }`` restricted
    to the support of ``sigma``; the maximizer ``X`` comes from the central
    path, normalized to ``tr(sigma X) = 1``.
    """
    rho = qmath.check_hermitian(rho)
    sigma = qmath.check_hermitian(sigma)
    if rho.shape != sigma.shape:
        raise DimensionMismatch(f"{rho.shape} vs {sigma.shape}")
    leak = support_leakage(rho, sigma)
    if leak > LEAKAGE_TOL:
        raise UnboundedProgram(f"support of rho leaks out of support of sigma ({leak:.3e})",
                               leakage=leak)
    v, _ = qmath.support_basis(sigma)
    rho_s = v.conj().T @ rho @ v
    sig_s = v.conj().T @ sigma @ v
    block = Block(-rho_s, sig_s[None, :, :])
    t0 = qmath.max_eigenvalue(rho_s) / qmath.min_eigenvalue(sig_s) + 1.0
    primal, dual = [], []

    def normalized(z):
        return z / float(np.trace(sig_s @ z).real)

    def record(y, z, t):
        primal.append(float(y[0]) - 1.0)
        dual.append(float(np.trace(rho_s @ normalized(z[0])).real) - 1.0)

    res = barrier_solve(np.ones(1), [block], np.array([t0]), on_center=record, **kw)
    x_s = normalized(res.z[0])
    x = qmath.hermitian_part(v @ x_s @ v.conj().T)
    pval = float(res.y[0]) - 1.0
    dval = float(np.trace(rho @ x).real) - 1.0
    return SdpSolution(
        optimal_value=max(pval, 0.0),
        witness=x,
        certificate=res.y[0] * sigma,
        duality_gap=pval - dval,
        iterations=res.iterations,
        primal_trace=primal,
        dual_trace=dual,
    )


# -- programs used by the alpha-superiority checks ---------------------------------


def traceless_hermitian_basis(d: int) -> np.ndarray:
    """Orthonormal (Hilbert-Schmidt) basis of traceless Hermitian d x d matrices."""
    basis = []
    for j in range(d):
        for k in range(j + 1, d):
            m = np.zeros((d, d), dtype=complex)
            m[j, k] = m[k, j] = 1 / np.sqrt(2)
            basis.append(m)
            m = np.zeros((d, d), dtype=complex)
            m[j, k], m[k, j] = -1j / np.sqrt(2), 1j / np.sqrt(2)
            basis.append(m)
    for k in range(1, d):
        diag = np.zeros(d)
        diag[:k] = 1.0
        diag[k] = -k
        basis.append(np.diag(diag / np.linalg.norm(diag)).astype(complex))
    return np.array(basis).reshape(-1, d, d)


def hermitian_basis(d: int) -> np.ndarray:
    return np.concatenate([np.eye(d)[None] / np.sqrt(d), traceless_hermitian_basis(d)])


def mixture_program(rho, lam: float, **kw):
    """``min_tau R_r((1 - lam) rho + lam tau)`` over all states ``tau``.

    Joint program in ``(D, tau)``: minimize ``tr D - 1`` subject to
    ``D >= (1 - lam) rho + lam tau`` with ``D`` diagonal, ``tau >= 0`` and
    ``tr tau = 1``. Returns ``(value, tau, Z)`` where ``Z`` is the dual
    matrix of the first constraint.
    """
    rho = qmath.check_hermitian(rho)
    d = rho.shape[0]
    basis = traceless_hermitian_basis(d)
    nb = len(basis)
    fk1 = np.zeros((d + nb, d, d), dtype=complex)
    fk1[np.arange(d), np.arange(d), np.arange(d)] = 1.0
    fk1[d:] = -lam * basis
    fk2 = np.zeros((d + nb, d, d), dtype=complex)
    fk2[d:] = basis
    blocks = [
        Block(-((1 - lam) * rho + lam * np.eye(d) / d), fk1),
        Block(np.eye(d, dtype=complex) / d, fk2),
    ]
    c = np.concatenate([np.ones(d), np.zeros(nb)])
    y0 = np.concatenate([np.full(d, 1.1), np.zeros(nb)])
    res = barrier_solve(c, blocks, y0, **kw)
    tau = qmath.hermitian_part(np.eye(d) / d + np.tensordot(res.y[d:], basis, axes=1))
    return float(res.y[:d].sum()) - 1.0, tau, res.z[0]


def min_robustness_of_mixture(rho, s: float, **kw):
    """``min_tau R_r((rho + s tau) / (1 + s))``; returns ``(value, tau)``."""
    value, tau, _ = mixture_program(rho, s / (1.0 + s), **kw)
    return value, tau


def min_relative_over_alpha_set(rho, alpha: float, **kw):
    """``min_{sigma : R_r(sigma) <= alpha} (1 + R+(rho, sigma))`` for ``alpha > 0``.

    With ``S = t sigma`` and ``W = t D`` the program is linear:
    minimize ``tr S`` subject to ``S >= rho``, ``W >= S`` with ``W`` diagonal
    and ``(1 + alpha) tr S >= tr W``. Returns ``(t, sigma)``.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive; at alpha = 0 use the robustness program")
    rho = qmath.check_hermitian(rho)
    d = rho.shape[0]
    hb = hermitian_basis(d)
    nh = len(hb)
    m = nh + d
    fk_a = np.zeros((m, d, d), dtype=complex)
    fk_a[:nh] = hb
    fk_b = np.zeros((m, d, d), dtype=complex)
    fk_b[:nh] = -hb
    fk_b[nh + np.arange(d), np.arange(d), np.arange(d)] = 1.0
    tr_hb = np.einsum("kii->k", hb).real
    fk_c = np.zeros((m, 1, 1), dtype=complex)
    fk_c[:nh, 0, 0] = (1 + alpha) * tr_hb
    fk_c[nh:, 0, 0] = -1.0
    blocks = [
        Block(-rho, fk_a),
        Block(np.zeros((d, d), dtype=complex), fk_b),
        Block(np.zeros((1, 1), dtype=complex), fk_c),
    ]
    c = np.concatenate([tr_hb, np.zeros(d)])
    # start at S = rho + k I, W = (lambda_max(S) + 1) I with k large enough
    k = (2.0 * d + 2.0) / (alpha * d) + 1.0
    s0 = rho + k * np.eye(d)
    y_s = np.einsum("kij,ji->k", hb, s0).real  # HS coordinates (basis is orthonormal)
    y0 = np.concatenate([y_s, np.full(d, qmath.max_eigenvalue(s0) + 0.5)])
    res = barrier_solve(c, blocks, y0, **kw)
    s_mat = qmath.hermitian_part(np.tensordot(res.y[:nh], hb, axes=1))
    t = float(np.trace(s_mat).real)
    return t, s_mat / t
