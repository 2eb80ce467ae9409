"""States, state families and Kraus channels.

Density matrices and pure states are plain numpy arrays (2-D and 1-D).
Samplers take an explicit ``seed`` (int or ``numpy.random.Generator``) so
campaigns are reproducible without shared RNG state.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from typing import Sequence

import numpy as np
from scipy.stats import unitary_group

from . import qmath
from .errors import (
    BadDimension,
    BadDistribution,
    BadRank,
    DimensionMismatch,
    NotHermitian,
    NotPSD,
    NotUnitary,
    NotUnitTrace,
    ValidationError,
)

STATE_TOL = 1e-10
CHANNEL_TOL = 1e-9
BRANCH_CUTOFF = 1e-12
PURITY_TOL = 1e-9


def validate_state(m, tol: float = STATE_TOL, psd_tol: float = qmath.PSD_TOL) -> np.ndarray:
    """Check that ``m`` is a density matrix and return it as a Hermitian array."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"density matrix must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError("density matrix has non-finite entries")
    herm = qmath.hermiticity_residual(m)
    if herm > tol:
        raise NotHermitian(f"Hermiticity residual {herm:.3e} > {tol:g}")
    m = qmath.hermitian_part(m)
    tr = float(np.trace(m).real)
    if abs(tr - 1.0) > tol:
        raise NotUnitTrace(f"trace residual {abs(tr - 1.0):.3e} > {tol:g} (trace = {tr:.12g})")
    lmin = qmath.min_eigenvalue(m)
    if lmin < -psd_tol:
        raise NotPSD(f"lambda_min = {lmin:.3e} < -{psd_tol:g}")
    return m


def as_density(state) -> np.ndarray:
    """Promote a state vector to a projector; pass density matrices through."""
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        return qmath.projector(state / np.linalg.norm(state))
    return state


def is_pure(rho, tol: float = PURITY_TOL) -> bool:
    return qmath.max_eigenvalue(rho) >= 1.0 - tol


def dominant_vector(rho) -> np.ndarray:
    w, v = qmath.hermitian_eig(rho)
    return v[:, -1]


# -- state families ---------------------------------------------------------------


def _gauge_phases(theta, d: int) -> np.ndarray:
    if theta is None:
        return np.zeros(d)
    theta = np.asarray(theta, dtype=float)
    if theta.shape == (d - 1,):
        theta = np.concatenate([[0.0], theta])
    if theta.shape != (d,):
        raise BadDimension(f"phase vector must have length {d} (or {d - 1}), got {theta.shape}")
    return theta - theta[0]


def max_coherent(d: int, theta=None) -> np.ndarray:
    """``sum_i exp(i theta_i) |i> / sqrt(d)`` with the gauge ``theta_0 = 0``."""
    if d < 2:
        raise BadDimension(f"d must be >= 2, got {d}")
    theta = _gauge_phases(theta, d)
    return np.exp(1j * theta) / np.sqrt(d)


def max_entangled(d: int, u_a=None, u_b=None) -> np.ndarray:
    """``sum_i (U_A|i>) (x) (U_B|i>) / sqrt(d)``."""
    if d < 2:
        raise BadDimension(f"d must be >= 2, got {d}")
    eye = np.eye(d)
    u_a = eye if u_a is None else np.asarray(u_a, dtype=complex)
    u_b = eye if u_b is None else np.asarray(u_b, dtype=complex)
    for name, u in (("U_A", u_a), ("U_B", u_b)):
        if u.shape != (d, d) or not qmath.is_unitary(u):
            raise NotUnitary(f"{name} is not a {d}x{d} unitary")
    # coefficient matrix C[a, b] = sum_i U_A[a, i] U_B[b, i] / sqrt(d)
    return (u_a @ u_b.T).reshape(-1) / np.sqrt(d)


@dataclass(frozen=True)
class SchmidtDecomposition:
    coefficients: np.ndarray  # descending, nonnegative
    basis_a: np.ndarray  # columns
    basis_b: np.ndarray  # columns

    def reconstruct(self) -> np.ndarray:
        c = (self.basis_a * self.coefficients) @ self.basis_b.T
        return c.reshape(-1)


def schmidt(psi, dims) -> SchmidtDecomposition:
    psi = np.asarray(psi, dtype=complex)
    d_a, d_b = (int(x) for x in dims)
    if psi.shape != (d_a * d_b,):
        raise DimensionMismatch(f"vector of length {psi.shape} does not factor as {d_a}x{d_b}")
    u, s, vh = np.linalg.svd(psi.reshape(d_a, d_b))
    k = len(s)
    return SchmidtDecomposition(s, u[:, :k], vh[:k, :].T)


# -- random sampling --------------------------------------------------------------


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_unitary(d: int, seed=None) -> np.ndarray:
    return unitary_group.rvs(d, random_state=_rng(seed)) if d > 1 else np.ones((1, 1), complex)


def random_pure(d: int, seed=None) -> np.ndarray:
    rng = _rng(seed)
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_density(d: int, rank: int | None = None, seed=None) -> np.ndarray:
    """Reduced state of a Haar-random pure state on ``C^d (x) C^rank``."""
    rank = d if rank is None else int(rank)
    if not 1 <= rank <= d:
        raise BadRank(f"rank must lie in [1, {d}], got {rank}")
    rng = _rng(seed)
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return qmath.hermitian_part(rho / np.trace(rho).real)


def random_phases(d: int, seed=None) -> np.ndarray:
    theta = _rng(seed).uniform(0.0, 2 * np.pi, size=d)
    theta[0] = 0.0
    return theta


# -- channels ---------------------------------------------------------------------


@dataclass(frozen=True)
class KrausChannel:
    kraus: tuple
    trace_preserving: bool = True

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=complex) for k in self.kraus)
        if not ops:
            raise ValidationError("a channel needs at least one Kraus operator")
        shape = ops[0].shape
        if any(k.shape != shape for k in ops):
            raise DimensionMismatch("Kraus operators have inconsistent shapes")
        object.__setattr__(self, "kraus", ops)
        gram = self.completeness()
        eye = np.eye(shape[1])
        if self.trace_preserving:
            res = float(np.linalg.norm(gram - eye))
            if res > CHANNEL_TOL:
                raise ValidationError(f"completeness residual {res:.3e} > {CHANNEL_TOL:g}")
        elif qmath.min_eigenvalue(eye - gram) < -CHANNEL_TOL:
            raise ValidationError("sum of K^dagger K exceeds the identity")

    @property
    def dim_in(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def dim_out(self) -> int:
        return self.kraus[0].shape[0]

    def completeness(self) -> np.ndarray:
        return sum(k.conj().T @ k for k in self.kraus)

    def __call__(self, rho) -> np.ndarray:
        return apply_channel(rho, self)

    def tensor(self, other: "KrausChannel") -> "KrausChannel":
        ops = [np.kron(a, b) for a in self.kraus for b in other.kraus]
        return KrausChannel(ops, self.trace_preserving and other.trace_preserving)


def identity_channel(d: int) -> KrausChannel:
    return KrausChannel([np.eye(d)])


def dephasing_channel(d: int) -> KrausChannel:
    return KrausChannel([np.diag(np.eye(d)[i]) for i in range(d)])


def apply_channel(rho, ch: KrausChannel, selective: bool = False):
    """Apply a Kraus channel.

    Deterministic mode returns ``sum_n K_n rho K_n^dagger``. Selective mode
    returns ``[(p_n, sigma_n), ...]`` with ``sigma_n = K_n rho K_n^dagger / p_n``;
    branches with ``p_n < 1e-12`` are dropped.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (ch.dim_in, ch.dim_in):
        raise DimensionMismatch(f"state of shape {rho.shape} vs channel input dim {ch.dim_in}")
    outs = [k @ rho @ k.conj().T for k in ch.kraus]
    if not selective:
        return qmath.hermitian_part(sum(outs))
    branches = []
    for out in outs:
        p = float(np.trace(out).real)
        if p >= BRANCH_CUTOFF:
            branches.append((p, qmath.hermitian_part(out / p)))
    return branches


def permutation_matrix(perm: Sequence[int]) -> np.ndarray:
    d = len(perm)
    p = np.zeros((d, d))
    p[list(perm), np.arange(d)] = 1.0
    return p


def permutation_channel(perms, probs) -> KrausChannel:
    """``rho -> sum_n p_n P_n rho P_n^dagger``."""
    probs = np.asarray(probs, dtype=float)
    if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
        raise BadDistribution("probabilities must be nonnegative and sum to one")
    return KrausChannel([np.sqrt(p) * permutation_matrix(pi) for p, pi in zip(probs, perms)])


def random_permutation_channel(d: int, n: int, seed=None) -> KrausChannel:
    rng = _rng(seed)
    perms = [rng.permutation(d) for _ in range(n)]
    return permutation_channel(perms, rng.dirichlet(np.ones(n)))


def _composition(n: int, rng) -> list[int]:
    """Random split of ``n`` into positive parts."""
    cuts = sorted(rng.choice(np.arange(1, n), size=rng.integers(0, n), replace=False)) if n > 1 else []
    edges = [0, *cuts, n]
    return [b - a for a, b in zip(edges, edges[1:])]


def sample_incoherent_channel(d: int, n_kraus: int, seed=None) -> KrausChannel:
    """Random incoherent channel with exactly ``n_kraus`` Kraus operators.

    The operators are split into groups. Inside a group of size ``N`` all
    operators share one column-to-row map ``f`` whose fibres hold at most
    ``N`` columns, and the coefficients of columns that land on the same row
    come from an ``N``-row isometry, which makes the group complete on its
    own. Groups are then mixed with Dirichlet weights.
    """
    if n_kraus < 1:
        raise ValidationError("n_kraus must be >= 1")
    rng = _rng(seed)
    sizes = _composition(n_kraus, rng)
    weights = rng.dirichlet(np.ones(len(sizes)))
    ops = []
    for size, w in zip(sizes, weights):
        rows = _bounded_fibre_map(d, size, rng)
        coeff = np.zeros((size, d), dtype=complex)
        for r in np.unique(rows):
            cols = np.flatnonzero(rows == r)
            iso = unitary_group.rvs(size, random_state=rng) if size > 1 else np.exp(
                1j * rng.uniform(0, 2 * np.pi, (1, 1)))
            coeff[:, cols] = iso[:, : len(cols)]
        for m in range(size):
            k = np.zeros((d, d), dtype=complex)
            k[rows, np.arange(d)] = coeff[m]
            ops.append(np.sqrt(w) * k)
    return KrausChannel(ops)


def _bounded_fibre_map(d: int, max_fibre: int, rng) -> np.ndarray:
    rows = np.empty(d, dtype=int)
    load = np.zeros(d, dtype=int)
    for j in rng.permutation(d):
        free = np.flatnonzero(load < max_fibre)
        r = rng.choice(free)
        rows[j] = r
        load[r] += 1
    return rows


def random_kraus_channel(d_in: int, n_kraus: int, seed=None, d_out: int | None = None) -> KrausChannel:
    """Generic CPTP map from a Haar isometry ``C^d_in -> C^(n d_out)``."""
    d_out = d_in if d_out is None else d_out
    v = unitary_group.rvs(n_kraus * d_out, random_state=_rng(seed))[:, :d_in] if n_kraus * d_out > 1 \
        else np.ones((1, 1), complex)
    return KrausChannel([v[i * d_out:(i + 1) * d_out] for i in range(n_kraus)])


def local_channel(ch_a: KrausChannel, ch_b: KrausChannel) -> KrausChannel:
    return ch_a.tensor(ch_b)


def all_permutations(d: int):
    return [np.array(p) for p in permutations(range(d))]


def is_incoherent_kraus(k, tol: float = 1e-12) -> bool:
    """At most one nonzero entry per column."""
    return bool(np.all(np.sum(np.abs(np.asarray(k)) > tol, axis=0) <= 1))
