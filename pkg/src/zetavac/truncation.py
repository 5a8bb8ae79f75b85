"""Nested truncation of operators onto finite Fourier bases.

The plane-wave basis is ordered ``0, -1, +1, -2, +2, ...`` so that the
span of the first ``m`` vectors is contained in the span of the first
``n`` for every ``m <= n``.  Truncating an operator to such a basis is
then literally taking leading principal submatrices, and quantities
computed at different sizes can be compared by zero-padding.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, GridTooSmall, HermiticityViolation, NonHermitianInput
from .spectral import eig_hermitian, require_hermitian, smallest_eigenpair

__all__ = [
    "mode_of_index",
    "index_of_mode",
    "mode_list",
    "SobolevWeight",
    "DiscretizedVacuum",
    "project_operator",
    "vacuum_state",
    "expectation",
    "zero_pad",
    "strong_convergence_probe",
    "schatten_convergence_probe",
]

# Dense eigendecomposition below this size, Lanczos above.
_DENSE_CUTOFF = 512


def mode_of_index(j: int) -> int:
    """Fourier mode sitting at ordered position ``j``.

    Position 0 carries mode 0, odd positions carry negative modes and
    even positions positive ones: 0, -1, +1, -2, +2, ...
    """
    if j < 0:
        raise ValueError("index must be non-negative")
    if j == 0:
        return 0
    return -((j + 1) // 2) if j % 2 else j // 2


def index_of_mode(k: int) -> int:
    """Ordered position of Fourier mode ``k`` (inverse of mode_of_index)."""
    if k == 0:
        return 0
    return -2 * k - 1 if k < 0 else 2 * k


def mode_list(n: int) -> np.ndarray:
    """Modes of the first ``n`` ordered basis vectors."""
    if n < 1:
        raise ValueError("basis size must be at least 1")
    j = np.arange(n)
    return np.where(j % 2 == 1, -((j + 1) // 2), j // 2)


@dataclass(frozen=True)
class SobolevWeight:
    """Diagonal weights ``(1 + k^2)^s`` over Fourier modes."""

    s: float

    def values(self, modes) -> np.ndarray:
        modes = np.asarray(modes, dtype=float)
        return (1.0 + modes**2) ** self.s


@dataclass(frozen=True)
class DiscretizedVacuum:
    """Ground state of a truncated Hamiltonian."""

    n: int
    energy: float
    state: np.ndarray

    def __post_init__(self):
        state = np.asarray(self.state, dtype=complex)
        if state.shape != (self.n,):
            raise DimensionMismatch(
                f"state has shape {state.shape}, expected ({self.n},)"
            )
        nrm = np.linalg.norm(state)
        if abs(nrm - 1.0) > 1e-12:
            raise ValueError(f"state norm {nrm} deviates from 1 beyond 1e-12")
        object.__setattr__(self, "state", state)


def project_operator(element, n: int, check_pairs: int = 8) -> np.ndarray:
    """Truncate a conjugate-symmetric matrix-element function to size ``n``.

    ``element(l, k)`` returns the matrix element between Fourier modes
    ``l`` (row) and ``k`` (column).  Conjugate symmetry is verified on all
    mode pairs drawn from the first ``check_pairs`` ordered positions; the
    matrix itself is assembled from the upper triangle and mirrored, so
    the result is Hermitian bit-exactly and the leading principal
    submatrices agree exactly across sizes.
    """
    if n < 1:
        raise ValueError("basis size must be at least 1")
    sample = mode_list(min(n, check_pairs))
    for a, l in enumerate(sample):
        for k in sample[a:]:
            lk, kl = complex(element(l, k)), complex(element(k, l))
            if abs(lk - np.conj(kl)) > 1e-12 * max(1.0, abs(lk)):
                raise HermiticityViolation(
                    f"element({l},{k})={lk} vs conj(element({k},{l}))={np.conj(kl)}"
                )
    md = mode_list(n)
    M = np.zeros((n, n), dtype=complex)
    for j in range(n):
        for i in range(j + 1):
            M[i, j] = element(md[i], md[j])
            M[j, i] = np.conj(M[i, j])
    return M


def vacuum_state(H, solver: str = "auto", tol: float = 1e-12) -> DiscretizedVacuum:
    """Ground-state energy and vector of a truncated Hamiltonian.

    Small problems go through the dense eigendecomposition; large ones
    (above 512) use the Lanczos iteration.  Both paths return the same
    phase convention.
    """
    H = require_hermitian(H)
    n = H.shape[0]
    if solver == "auto":
        solver = "dense" if n <= _DENSE_CUTOFF else "lanczos"
    if solver == "dense":
        E = eig_hermitian(H)
        return DiscretizedVacuum(n, float(E.eigenvalues[0]), E.vectors[:, 0])
    if solver == "lanczos":
        val, vec = smallest_eigenpair(H, tol=tol)
        return DiscretizedVacuum(n, val, vec)
    raise ValueError(f"unknown solver {solver!r}")


def expectation(state, A) -> float:
    """Real quadratic form <state, A state> of a Hermitian operator."""
    state = np.asarray(state, dtype=complex)
    A = np.asarray(A, dtype=complex)
    if A.shape != (state.shape[0], state.shape[0]):
        raise DimensionMismatch(f"operator {A.shape} does not match state {state.shape}")
    nrm = np.linalg.norm(state)
    if abs(nrm - 1.0) > 1e-9:
        raise ValueError(f"state norm {nrm} deviates from 1 beyond 1e-9")
    val = np.vdot(state, A @ state)
    scale = max(np.abs(A).max(), 1e-300)
    if abs(val.imag) > 1e-10 * scale:
        raise NonHermitianInput(
            f"expectation has imaginary part {val.imag:.3e} (operator not Hermitian?)"
        )
    return float(val.real)


def zero_pad(x, n: int) -> np.ndarray:
    """Embed coefficients into a larger nested basis by zero-padding."""
    x = np.asarray(x, dtype=complex)
    if n < x.shape[0]:
        raise DimensionMismatch(f"cannot pad length {x.shape[0]} down to {n}")
    out = np.zeros(n, dtype=complex)
    out[: x.shape[0]] = x
    return out


def _as_reference_matrix(A, n_ref: int) -> np.ndarray:
    if callable(A):
        return project_operator(A, n_ref)
    A = np.asarray(A, dtype=complex)
    if A.shape != (n_ref, n_ref):
        raise DimensionMismatch(f"reference operator {A.shape} vs grid {n_ref}")
    return A


def strong_convergence_probe(A, x, n_list) -> np.ndarray:
    """Residuals of truncated operator application against a reference grid.

    For each ``n`` the probe computes ``|| A_ref x - pad(A_n x_n) ||_2``
    where ``A_n`` and ``x_n`` are the leading ``n``-blocks.  ``A`` may be
    an element function or a prebuilt matrix on the grid of ``x``.  The
    reference grid must be at least twice the largest probed size.
    """
    x = np.asarray(x, dtype=complex)
    n_ref = x.shape[0]
    n_list = list(n_list)
    if n_ref < 2 * max(n_list):
        raise GridTooSmall(
            f"reference grid {n_ref} is smaller than twice max(n_list)={max(n_list)}"
        )
    A_ref = _as_reference_matrix(A, n_ref)
    ref = A_ref @ x
    out = np.empty(len(n_list))
    for i, n in enumerate(n_list):
        approx = zero_pad(A_ref[:n, :n] @ x[:n], n_ref)
        out[i] = np.linalg.norm(ref - approx)
    return out


def schatten_convergence_probe(
    A,
    weight: SobolevWeight,
    n_list,
    rank_r: int | None = None,
    n_ref: int | None = None,
) -> np.ndarray:
    """Trace-norm residuals of truncation on a Sobolev-weighted operator.

    The operator is symmetrically scaled by ``(1 + k^2)^(-s/2)`` on both
    sides, which for the identity element and s=1 reproduces the diagonal
    ``1/(1 + k^2)``.  Residuals are nuclear norms of the difference between
    the reference operator and its leading-block truncation, computed from
    singular values on the reference grid.  ``rank_r`` optionally replaces
    the reference by its best rank-``r`` approximation first.
    """
    n_list = list(n_list)
    if n_ref is None:
        n_ref = (2 * max(n_list)) if not hasattr(A, "shape") else np.asarray(A).shape[0]
    if n_ref < 2 * max(n_list):
        raise GridTooSmall(
            f"reference grid {n_ref} is smaller than twice max(n_list)={max(n_list)}"
        )
    A_ref = _as_reference_matrix(A, n_ref)
    half = weight.values(mode_list(n_ref)) ** -0.5
    A_w = half[:, None] * A_ref * half[None, :]
    if rank_r is not None:
        u, s, vh = np.linalg.svd(A_w)
        s[rank_r:] = 0.0
        A_w = (u * s) @ vh
    out = np.empty(len(n_list))
    for i, n in enumerate(n_list):
        diff = A_w.copy()
        diff[:n, :n] = 0.0
        out[i] = scipy.linalg.svdvals(diff).sum()
    return out
