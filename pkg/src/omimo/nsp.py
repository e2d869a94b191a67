"""
Null-space projection of radar transmissions.

Given the radar-to-communications interference channel H (N_R x M_T), the
projector P = V S' V^H keeps every right-singular direction of H whose
singular value is numerically zero, so that H P = 0 and P^2 = P.
"""

from dataclasses import dataclass

import numpy as np

DEFAULT_TOL = 1e-12


class InfeasibleProjectionError(ValueError):
    """The channel leaves no null space to project onto."""


@dataclass(frozen=True)
class ProjectionMatrix:
    """
    Orthogonal projector onto the null space of a channel.

    Attributes
    ----------
    matrix : np.ndarray
        P, shape ``(M_T, M_T)``.
    rank : int
        rank(P) = M_T - numerical rank of H.
    tol : float
        Relative singular-value threshold used.
    singular_values : np.ndarray
        Spectrum of H, nonincreasing.
    """

    matrix: np.ndarray
    rank: int
    tol: float
    singular_values: np.ndarray

    @property
    def channel_rank(self) -> int:
        return self.matrix.shape[0] - self.rank

    @classmethod
    def identity(cls, num_elements: int) -> "ProjectionMatrix":
        return cls(np.eye(num_elements, dtype=complex), num_elements, DEFAULT_TOL, np.zeros(0))


def _as_channel(H) -> np.ndarray:
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2:
        raise ValueError(f"channel must be a 2-D matrix, got shape {H.shape}")
    if not np.all(np.isfinite(H)):
        raise ValueError("channel matrix has non-finite entries")
    return H


def numerical_rank(singular_values, tol: float = DEFAULT_TOL) -> int:
    """Count of singular values above ``tol * sigma_1`` (``tol`` if sigma_1 == 0)."""
    s = np.asarray(singular_values)
    if s.size == 0:
        return 0
    threshold = tol * s[0] if s[0] > 0 else tol
    return int(np.count_nonzero(s > threshold))


def null_space_projection(H, tol: float = DEFAULT_TOL) -> ProjectionMatrix:
    """
    Build P from a full SVD of ``H``.

    Parameters
    ----------
    H : array_like
        Interference channel, shape ``(N_R, M_T)``.
    tol : float
        Relative threshold for the numerical rank.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    H = _as_channel(H)
    _, s, vh = np.linalg.svd(H, full_matrices=True)
    p = numerical_rank(s, tol)
    v_null = vh[p:].conj().T
    P = v_null @ v_null.conj().T
    return ProjectionMatrix(P, H.shape[1] - p, tol, s)


def project_signal(P, x) -> np.ndarray:
    """
    Apply the projector to a transmit vector or a per-sample matrix.

    ``x`` has shape ``(M_T,)`` or ``(M_T, N_s)``; columns are time samples.
    """
    P = P.matrix if isinstance(P, ProjectionMatrix) else np.asarray(P)
    x = np.asarray(x)
    if x.shape[0] != P.shape[1]:
        raise ValueError(f"signal has {x.shape[0]} rows, projector expects {P.shape[1]}")
    return P @ x


def null_space_dim(H, tol: float = DEFAULT_TOL) -> int:
    H = _as_channel(H)
    s = np.linalg.svd(H, compute_uv=False)
    return H.shape[1] - numerical_rank(s, tol)


@dataclass(frozen=True)
class Feasibility:
    feasible: bool
    null_dims: int
    effective_aperture: int | None
    message: str

    def __bool__(self):
        return self.feasible


def feasibility(num_tx: int, num_comm_rx: int, num_subarrays: int | None = None) -> Feasibility:
    """
    Whether NSP has room to act: true iff M_T > N_R.

    ``effective_aperture`` is reported for the given K (if any) as a
    diagnostic only; the projector acts on the physical M_T elements.
    """
    from omimo.overlapped import effective_aperture

    if num_tx < 1 or num_comm_rx < 1:
        raise ValueError("antenna counts must be at least 1")
    dims = num_tx - num_comm_rx
    m_eps = effective_aperture(num_tx, num_subarrays) if num_subarrays is not None else None
    if dims > 0:
        msg = f"feasible: {dims} null-space dimension(s) for M_T={num_tx}, N_R={num_comm_rx}"
    else:
        msg = f"infeasible: M_T={num_tx} <= N_R={num_comm_rx}, no null space for a generic channel"
    if m_eps is not None:
        msg += f"; M_eps={m_eps} at K={num_subarrays}"
    return Feasibility(dims > 0, max(dims, 0), m_eps, msg)
