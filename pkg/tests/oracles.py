"""Reference values computed without the package's own solvers."""
from __future__ import annotations

import cvxpy as cp
import numpy as np
from scipy.linalg import eigh

MAGIC = np.array([[1, 0, 0, 1], [1j, 0, 0, -1j], [0, 1j, 1j, 0], [0, 1, -1, 0]]).T / np.sqrt(2)


def robustness_cvx(rho) -> float:
    """``min tr D - 1`` over diagonal ``D`` dominating ``rho`` (conic solver)."""
    rho = np.asarray(rho, dtype=complex)
    x = cp.Variable(rho.shape[0])
    prob = cp.Problem(cp.Minimize(cp.sum(x) - 1), [cp.diag(x) - rho >> 0])
    prob.solve(solver=cp.CLARABEL)
    return float(prob.value)


def l1_coherence(rho) -> float:
    rho = np.asarray(rho)
    return float(np.sum(np.abs(rho)) - np.sum(np.abs(np.diag(rho))))


def relative_lambda_max(rho, sigma) -> float:
    """``lambda_max(sigma^-1/2 rho sigma^-1/2) - 1`` for full-rank ``sigma``."""
    w, v = np.linalg.eigh(sigma)
    s = (v / np.sqrt(w)) @ v.conj().T
    return float(np.linalg.eigvalsh(s @ rho @ s)[-1] - 1.0)


def relative_bisection(rho, sigma, tol=1e-12) -> float:
    """Smallest ``t`` with ``t sigma - rho`` PSD, minus one."""
    lo, hi = 1.0, 2.0
    while np.linalg.eigvalsh(hi * sigma - rho)[0] < 0:
        hi *= 2.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if np.linalg.eigvalsh(mid * sigma - rho)[0] >= 0:
            hi = mid
        else:
            lo = mid
    return hi - 1.0


def relative_generalized(rho, sigma) -> float:
    """Same quantity through the generalized eigenproblem ``rho v = t sigma v``."""
    return float(eigh(rho, sigma, eigvals_only=True)[-1] - 1.0)


def coherent_fraction_qubit(rho) -> float:
    return 0.5 + abs(rho[0, 1])


def coherent_fraction_qutrit(rho, step=1e-3) -> float:
    """Grid over the first relative phase; the second is maximized exactly."""
    t = np.arange(0.0, 2 * np.pi, step)
    e = np.exp(1j * t)
    a = 1.0 + 2.0 * np.real(rho[0, 1] * e)
    c = rho[0, 2] + rho[1, 2] * np.conj(e)
    return float(np.max(a + 2.0 * np.abs(c)) / 3.0)


def fully_entangled_fraction_2x2(rho) -> float:
    """Largest eigenvalue of the real part of ``rho`` in the magic basis."""
    r = MAGIC.conj().T @ np.asarray(rho) @ MAGIC
    return float(np.linalg.eigvalsh(r.real)[-1])


def pure_coherence_deficiency(psi) -> float:
    psi = np.asarray(psi)
    return 1.0 - float(np.sum(np.abs(psi))) ** 2 / psi.size


def pure_entanglement_deficiency(psi, d) -> float:
    q = np.linalg.svd(np.asarray(psi).reshape(d, d), compute_uv=False)
    return 1.0 - float(np.sum(q)) ** 2 / d
