"""
Overlapped-subarray transmit architecture.

The M_T-element transmit ULA is split into K contiguous subarrays of
M_m = M_T - K + 1 elements; subarray k (1-based) covers physical elements
k-1 .. k-1+M_m-1. K = 1 is a phased array, K = M_T is pure MIMO.

Phase bookkeeping: the within-subarray phase of element m lives in a_k
(and therefore in c), the offset of subarray k lives in the diversity
vector d, so c * d carries the phase of physical element (k-1)+(m-1).
Vectors of length M_m * K are ordered subarray-major, index
``(k - 1) * M_m + (m - 1)``.
"""

from dataclasses import dataclass

import numpy as np

from omimo.array_model import UniformLinearArray, _phase_ramp


@dataclass(frozen=True)
class SubarrayPartition:
    num_elements: int
    num_subarrays: int

    def __post_init__(self):
        if self.num_elements < 1:
            raise ValueError("M_T must be at least 1")
        if not 1 <= self.num_subarrays <= self.num_elements:
            raise ValueError(
                f"K={self.num_subarrays} outside 1..M_T={self.num_elements}"
            )

    @property
    def elements_per_subarray(self) -> int:
        return self.num_elements - self.num_subarrays + 1

    @property
    def size(self) -> int:
        """Number of (m, k) pairs, M_m * K."""
        return self.elements_per_subarray * self.num_subarrays

    def members(self, k: int) -> np.ndarray:
        """0-based physical element indices of subarray ``k`` (1-based)."""
        if not 1 <= k <= self.num_subarrays:
            raise IndexError(f"subarray {k} outside 1..{self.num_subarrays}")
        return np.arange(k - 1, k - 1 + self.elements_per_subarray)

    def physical_index(self) -> np.ndarray:
        """Physical element of every (m, k) pair, subarray-major."""
        m = np.arange(self.elements_per_subarray)
        k = np.arange(self.num_subarrays)
        return (k[:, None] + m[None, :]).reshape(-1)


def make_partition(num_elements: int, num_subarrays: int) -> SubarrayPartition:
    return SubarrayPartition(num_elements, num_subarrays)


def effective_aperture(num_elements: int, num_subarrays: int) -> int:
    """Virtual transmit dimension (M_T - K + 1) * K."""
    return make_partition(num_elements, num_subarrays).size


def optimal_subarrays(num_elements: int) -> int:
    """floor((M_T + 1) / 2), a maximizer of the effective aperture."""
    if num_elements < 1:
        raise ValueError("M_T must be at least 1")
    return (num_elements + 1) // 2


def transmit_weights(partition: SubarrayPartition, theta_s: float, spacing: float) -> np.ndarray:
    """
    Non-adaptive subarray weights w_k = a_k(theta_s) / ||a_k(theta_s)||.

    Returns
    -------
    np.ndarray
        Shape ``(K, M_m)``; every row has unit norm. For a ULA all
        subarrays share the same phase-referenced steering vector.
    """
    a_k = _phase_ramp(partition.elements_per_subarray, spacing, theta_s)
    w = a_k / np.linalg.norm(a_k)
    return np.tile(w, (partition.num_subarrays, 1))


def diversity_vector(partition: SubarrayPartition, theta, spacing: float) -> np.ndarray:
    """
    Waveform diversity vector d(theta): entry (m, k) is
    ``exp(-j 2 pi d_T (k - 1) sin(theta))``.

    Shape ``theta.shape + (M_m * K,)``.
    """
    offsets = _phase_ramp(partition.num_subarrays, spacing, theta)
    return np.repeat(offsets, partition.elements_per_subarray, axis=-1)


def _check_weights(partition, weights):
    weights = np.asarray(weights)
    expected = (partition.num_subarrays, partition.elements_per_subarray)
    if weights.shape != expected:
        raise ValueError(f"weights have shape {weights.shape}, expected {expected}")
    return weights


def c_vector(partition: SubarrayPartition, weights, theta, spacing: float) -> np.ndarray:
    """
    Intermediate vector c(theta), entry (m, k) = conj(w_k[m]) * a_k[m](theta).
    """
    weights = _check_weights(partition, weights)
    a_k = _phase_ramp(partition.elements_per_subarray, spacing, theta)
    return (weights.conj() * a_k[..., None, :]).reshape(a_k.shape[:-1] + (partition.size,))


@dataclass(frozen=True)
class VirtualSteering:
    """u = (c * d) kron b together with its constituents."""

    u: np.ndarray
    c: np.ndarray
    d: np.ndarray
    b: np.ndarray


def virtual_steering(
    partition: SubarrayPartition,
    weights,
    theta,
    spacing: float,
    rx: UniformLinearArray,
) -> VirtualSteering:
    """Virtual steering vector of length M_m * K * M_R (vectorized over theta)."""
    c = c_vector(partition, weights, theta, spacing)
    d = diversity_vector(partition, theta, spacing)
    b = rx.steering_vector(theta)
    cd = c * d
    u = (cd[..., :, None] * b[..., None, :]).reshape(cd.shape[:-1] + (cd.shape[-1] * b.shape[-1],))
    return VirtualSteering(u=u, c=c, d=d, b=b)


def _normalized_gain(ref: np.ndarray, u: np.ndarray) -> np.ndarray:
    energy = np.vdot(ref, ref).real
    if energy == 0.0:
        raise ZeroDivisionError("reference virtual steering vector has zero norm")
    return np.abs(u @ ref.conj()) ** 2 / energy**2


def beampattern(
    partition: SubarrayPartition,
    weights,
    theta_s: float,
    theta,
    spacing: float,
    rx: UniformLinearArray,
) -> np.ndarray:
    """
    Normalized overall transmit/receive beampattern
    ``G(theta) = |u(theta_s)^H u(theta)|^2 / ||u(theta_s)||^4``.

    Evaluated from explicitly formed virtual steering vectors; vectorizes
    over ``theta``.
    """
    ref = virtual_steering(partition, weights, theta_s, spacing, rx).u
    u = virtual_steering(partition, weights, theta, spacing, rx).u
    return _normalized_gain(ref, u)


def beampattern_ula_closed_form(
    partition: SubarrayPartition,
    theta_s: float,
    theta,
    spacing: float,
    rx: UniformLinearArray,
) -> np.ndarray:
    """
    ULA beampattern in factored form: one subarray's coherent response
    a_K(theta_s)^H a_K(theta) times the (d kron b) correlation.
    """
    mm = partition.elements_per_subarray
    a_s = _phase_ramp(mm, spacing, theta_s)
    a = _phase_ramp(mm, spacing, theta)
    sub = a @ a_s.conj()

    db_s = np.kron(diversity_vector(partition, theta_s, spacing), rx.steering_vector(theta_s))
    d = diversity_vector(partition, theta, spacing)
    b = rx.steering_vector(theta)
    db = (d[..., :, None] * b[..., None, :]).reshape(d.shape[:-1] + (db_s.size,))
    cross = db @ db_s.conj()

    num = np.abs(sub * cross) ** 2
    den = np.vdot(a_s, a_s).real ** 2 * np.vdot(db_s, db_s).real ** 2
    return num / den


def build_mixing_matrix(partition: SubarrayPartition, weights) -> np.ndarray:
    """
    Per-element excitation of every waveform, shape ``(M_T, M_m * K)``.

    Column (m, k) holds ``sqrt(M_T / K) * w_k[m]`` at physical element
    (k-1)+(m-1) and zeros elsewhere, so that
    ``W^H a(theta) == sqrt(M_T / K) * c(theta) * d(theta)``.
    """
    weights = _check_weights(partition, weights)
    scale = np.sqrt(partition.num_elements / partition.num_subarrays)
    mixing = np.zeros((partition.num_elements, partition.size), dtype=complex)
    mixing[partition.physical_index(), np.arange(partition.size)] = scale * weights.reshape(-1)
    return mixing
