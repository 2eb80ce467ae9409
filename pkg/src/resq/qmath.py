"""Dense complex linear algebra kernel.

Everything here works on plain ``numpy`` arrays; matrices are never wrapped.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatch, NoConvergence, NotHermitian

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-9
PURE_TOL = 1e-12


class HermitianEig(NamedTuple):
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # columns


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return (a + a.conj().T) / 2


def _as_square(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def hermiticity_residual(m: np.ndarray) -> float:
    return float(np.linalg.norm(m - m.conj().T))


def check_hermitian(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return ``m`` as a complex array, exactly symmetrized, or raise NotHermitian."""
    m = _as_square(m)
    res = hermiticity_residual(m)
    if res > tol * max(1.0, float(np.linalg.norm(m))):
        raise NotHermitian(f"||M - M^dagger||_F = {res:.3e} exceeds {tol:g}")
    return hermitian_part(m)


def hermitian_eig(m, tol: float = HERMITIAN_TOL) -> HermitianEig:
    """Spectral decomposition of a Hermitian matrix, eigenvalues ascending."""
    m = check_hermitian(m, tol)
    try:
        w, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    return HermitianEig(w, v)


def min_eigenvalue(m) -> float:
    return float(hermitian_eig(m).eigenvalues[0])


def max_eigenvalue(m) -> float:
    return float(hermitian_eig(m).eigenvalues[-1])


def psd_threshold(m: np.ndarray, tol: float = PSD_TOL) -> float:
    return -tol * max(1.0, float(np.linalg.norm(m)))


def is_psd(m, tol: float = PSD_TOL) -> bool:
    m = check_hermitian(m)
    return min_eigenvalue(m) >= psd_threshold(m, tol)


def psd_function(m, fn, tol: float = PSD_TOL) -> np.ndarray:
    """Apply ``fn`` to the spectrum of a PSD matrix.

    Eigenvalues in ``[-tol*max(1,||M||_F), 0)`` are clamped to zero first;
    anything more negative is rejected.
    """
    w, v = hermitian_eig(m)
    floor = psd_threshold(m, tol)
    if w[0] < floor:
        raise ValueError(f"matrix is not PSD (lambda_min = {w[0]:.3e})")
    w = np.clip(w, 0.0, None)
    return hermitian_part((v * fn(w)) @ v.conj().T)


def sqrtm_psd(m, tol: float = PSD_TOL) -> np.ndarray:
    return psd_function(m, np.sqrt, tol)


def trace_norm(m) -> float:
    return float(np.sum(np.linalg.svd(np.asarray(m), compute_uv=False)))


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity ``||sqrt(sigma) sqrt(rho)||_1 ** 2``.

    Accepts state vectors on either side, in which case the overlap formula
    is used directly.
    """
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if rho.shape[0] != sigma.shape[0]:
        raise DimensionMismatch(f"dimensions differ: {rho.shape[0]} vs {sigma.shape[0]}")
    if rho.ndim == 1 and sigma.ndim == 1:
        return float(abs(np.vdot(rho, sigma)) ** 2)
    if rho.ndim == 1:
        rho, sigma = sigma, rho
    if sigma.ndim == 1:
        return float(np.clip(np.real(np.vdot(sigma, rho @ sigma)), 0.0, 1.0))
    # a pure side gives an exact overlap; the square root of its rounding-level
    # eigenvalues would otherwise leak ~1e-8 into the result
    for a, b in ((sigma, rho), (rho, sigma)):
        w, v = hermitian_eig(a)
        if w[-1] >= 1.0 - PURE_TOL:
            return fidelity(b, v[:, -1])
    f = trace_norm(sqrtm_psd(sigma) @ sqrtm_psd(rho)) ** 2
    return float(np.clip(f, 0.0, 1.0))


def projector(vec) -> np.ndarray:
    vec = np.asarray(vec, dtype=complex)
    return np.outer(vec, vec.conj())


def kron(*ops) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for op in ops:
        out = np.kron(out, op)
    return out


def partial_trace(rho, dims, keep="A") -> np.ndarray:
    """Reduced state of a bipartite operator.

    ``keep`` is ``"A"``/``0`` for the first factor or ``"B"``/``1`` for the second.
    """
    rho = np.asarray(rho, dtype=complex)
    d_a, d_b = (int(x) for x in dims)
    if rho.shape != (d_a * d_b, d_a * d_b):
        raise DimensionMismatch(f"shape {rho.shape} does not factor as {d_a}x{d_b}")
    t = rho.reshape(d_a, d_b, d_a, d_b)
    if keep in ("A", 0):
        return np.einsum("ijkj->ik", t)
    if keep in ("B", 1):
        return np.einsum("ijil->jl", t)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def support_basis(m, tol: float = PSD_TOL):
    """Orthonormal bases (support, kernel) of a PSD matrix."""
    w, v = hermitian_eig(m)
    mask = w > tol
    return v[:, mask], v[:, ~mask]


def is_unitary(u, tol: float = 1e-9) -> bool:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return bool(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0])) <= tol)


def polar_unitary(a) -> np.ndarray:
    """Unitary factor ``W`` of the polar decomposition ``a = W P``."""
    u, _, vh = np.linalg.svd(a)
    return u @ vh
