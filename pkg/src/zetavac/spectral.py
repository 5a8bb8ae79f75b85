"""Dense Hermitian spectral tools.

Eigendecomposition with a deterministic eigenvector phase convention,
matrix functions through the functional calculus, a Lanczos iteration
for the smallest eigenpair, and (optionally damped) unitary evolution
operators built from the spectrum.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

from .errors import (
    ConvergenceFailure,
    DimensionMismatch,
    NonHermitianInput,
    SingularFunctionValue,
)

__all__ = [
    "EigenSystem",
    "require_hermitian",
    "eig_hermitian",
    "smallest_eigenpair",
    "matrix_function",
    "evolution_operator",
]


def require_hermitian(M, tol: float = 1e-12) -> np.ndarray:
    """Validate Hermitian symmetry and return ``M`` as a complex array.

    The tolerance is relative to the largest entry magnitude, so matrices
    assembled from floating-point arithmetic pass as long as their
    asymmetry is at rounding level.
    """
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {M.shape}")
    scale = np.abs(M).max() if M.size else 0.0
    dev = np.abs(M - M.conj().T).max()
    if dev > tol * max(scale, 1e-300):
        raise NonHermitianInput(
            f"matrix deviates from Hermitian symmetry by {dev:.3e} "
            f"(allowed {tol:.1e} * {scale:.3e})"
        )
    return M


def _fix_phases(vectors: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude entry is real-positive."""
    idx = np.argmax(np.abs(vectors), axis=0)
    lead = vectors[idx, np.arange(vectors.shape[1])]
    phases = np.where(np.abs(lead) > 0, lead / np.maximum(np.abs(lead), 1e-300), 1.0)
    return vectors * phases.conj()


@dataclass(frozen=True)
class EigenSystem:
    """Ascending eigenvalues and a unitary matrix of column eigenvectors."""

    eigenvalues: np.ndarray
    vectors: np.ndarray

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=float)
        if np.any(np.diff(ev) < 0):
            raise ValueError("eigenvalues must be non-decreasing")
        object.__setattr__(self, "eigenvalues", ev)
        object.__setattr__(self, "vectors", np.asarray(self.vectors, dtype=complex))

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]


def eig_hermitian(M) -> EigenSystem:
    """Full eigendecomposition of a Hermitian matrix.

    Eigenvalues come back ascending; eigenvector phases are fixed by making
    the largest-magnitude component of each column real-positive, which makes
    repeated runs bit-reproducible.
    """
    M = require_hermitian(M)
    try:
        vals, vecs = np.linalg.eigh(M)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails
        raise ConvergenceFailure(f"dense eigensolver did not converge: {exc}") from exc
    return EigenSystem(vals, _fix_phases(vecs))


def smallest_eigenpair(
    M,
    tol: float = 1e-10,
    max_iter: int | None = None,
    seed: int = 0,
) -> tuple[float, np.ndarray]:
    """Smallest eigenvalue and eigenvector via Lanczos iteration.

    Full reorthogonalization is applied at every step, so the method is
    reliable (if memory-hungry) up to a few thousand dimensions.  The
    iteration stops once the Ritz residual drops below ``tol * max|M|``;
    because the basis is kept orthonormal it terminates after at most
    ``dim`` steps with the exact answer up to rounding.

    Returns
    -------
    (value, vector)
        The eigenvalue and a unit-norm, phase-fixed eigenvector.

    Raises
    ------
    ConvergenceFailure
        If the residual target is still unmet when the iteration budget
        (default: the dimension) is exhausted.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    M = require_hermitian(M)
    n = M.shape[0]
    scale = max(np.abs(M).max(), 1e-300)
    if n == 1:
        return float(M[0, 0].real), np.ones(1, dtype=complex)

    m_max = n if max_iter is None else min(max_iter, n)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)

    V = np.empty((m_max, n), dtype=complex)
    alpha = np.empty(m_max)
    beta = np.empty(m_max)
    V[0] = v
    target = tol * scale
    m = 0
    for j in range(m_max):
        w = M @ V[j]
        alpha[j] = np.real(np.vdot(V[j], w))
        w -= alpha[j] * V[j]
        if j > 0:
            w -= beta[j - 1] * V[j - 1]
        # Full reorthogonalization, twice for good measure.  The inner
        # products are computed as conj(V w*) so the big basis slice is
        # never copied, only the length-n work vector.
        for _ in range(2):
            coeffs = (V[: j + 1] @ w.conj()).conj()
            w -= V[: j + 1].T @ coeffs
        beta[j] = np.linalg.norm(w)
        m = j + 1
        if beta[j] <= 1e-14 * scale:
            break  # invariant subspace found; Ritz values are exact
        if m == m_max:
            break
        if m % 10 == 0 and _ritz_residual(alpha[:m], beta[: m - 1], beta[j]) <= target:
            break
        V[j + 1] = w / beta[j]

    theta, s = _smallest_ritz(alpha[:m], beta[: m - 1])
    vec = V[:m].T @ s
    vec /= np.linalg.norm(vec)
    residual = np.linalg.norm(M @ vec - theta * vec)
    if residual > target:
        raise ConvergenceFailure(
            f"Lanczos residual {residual:.3e} above target {target:.3e} "
            f"after {m} iterations",
            residual=residual,
        )
    vec = _fix_phases(vec[:, None])[:, 0]
    return float(theta), vec


def _smallest_ritz(alpha, beta):
    vals, vecs = scipy.linalg.eigh_tridiagonal(alpha, beta, select="i", select_range=(0, 0))
    return float(vals[0]), vecs[:, 0]


def _ritz_residual(alpha, beta, beta_last):
    _, s = _smallest_ritz(alpha, beta)
    return abs(beta_last * s[-1])


def matrix_function(E: EigenSystem, f: Callable[[float], complex]) -> np.ndarray:
    """Apply a scalar function to a Hermitian operator through its spectrum.

    Returns ``V diag(f(lambda)) V^dagger``.  ``f`` is evaluated once per
    eigenvalue and must be finite on all of them.
    """
    vals = np.array([f(x) for x in E.eigenvalues], dtype=complex)
    bad = ~np.isfinite(vals)
    if np.any(bad):
        where = E.eigenvalues[bad][:3]
        raise SingularFunctionValue(f"f is non-finite at eigenvalue(s) {where}")
    return (E.vectors * vals) @ E.vectors.conj().T


def evolution_operator(E: EigenSystem, T: float, eps: float = 0.0) -> np.ndarray:
    """Evolution operator ``exp(-i (1 - i eps) T H)`` from a spectrum.

    With ``eps = 0`` this is the unitary time evolution; ``eps > 0`` damps
    high-energy contributions so that long-time traces are dominated by the
    bottom of the spectrum.
    """
    if eps < 0:
        raise ValueError("eps must be non-negative")
    lam = E.eigenvalues
    # The real part of the exponent is -eps*T*lambda; it only overflows
    # when that is large and positive (negative spectrum, or negative T).
    growth = max(-eps * T * lam.min(), -eps * T * lam.max()) if lam.size else 0.0
    if growth > 700.0:
        raise OverflowError(f"damping exponent {growth:.1f} exceeds 700")
    phases = np.exp(-1j * (1.0 - 1j * eps) * T * lam)
    return (E.vectors * phases) @ E.vectors.conj().T
