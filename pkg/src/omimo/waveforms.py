"""
Orthogonal waveform bank for the overlapped subarrays and the matched filter.

Waveforms are indexed by (m, k), 1-based, with m the element within a
subarray and k the subarray. Rows of the bank are ordered subarray-major:
row ``(k - 1) * M_m + (m - 1)``. The same ordering is used for the
c/d/u vectors and the mixing matrix columns in :mod:`omimo.overlapped`.

Two frequency-index maps are available:

``"linear"`` (default)
    ``f(m, k) = (k - 1) * M_m + (m - 1)``; all indices distinct, so the
    bank is exactly orthogonal over the pulse.
``"paper-literal"``
    ``f(m, k) = m * k``; distinct pairs can share an index (e.g. (1, 2)
    and (2, 1)) and are then fully correlated.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

INDEX_MODES = ("linear", "paper-literal")
PULSE_KINDS = ("rectangular",)


@dataclass(frozen=True)
class PulseShape:
    """Unit-energy baseband pulse Q(t) on [0, duration)."""

    kind: str = "rectangular"
    duration: float = 1.0

    def __post_init__(self):
        if self.kind not in PULSE_KINDS:
            raise ValueError(f"unknown pulse kind {self.kind!r}; expected one of {PULSE_KINDS}")
        if not self.duration > 0:
            raise ValueError("pulse duration must be positive")

    def samples(self, num_samples: int) -> np.ndarray:
        # rectangular: constant amplitude with sum(|Q|^2) * dt == 1
        return np.full(num_samples, 1.0 / np.sqrt(self.duration))


@dataclass(frozen=True)
class WaveformBank:
    """
    Sampled waveforms phi_k^m(t_n), t_n = n * T_0 / N_s.

    Parameters
    ----------
    elements_per_subarray : int
        M_m.
    num_subarrays : int
        K.
    num_samples : int
        N_s, samples per pulse.
    mode : {"linear", "paper-literal"}
    pulse : PulseShape
    """

    elements_per_subarray: int
    num_subarrays: int
    num_samples: int = 1024
    mode: str = "linear"
    pulse: PulseShape = field(default_factory=PulseShape)

    def __post_init__(self):
        if self.elements_per_subarray < 1 or self.num_subarrays < 1:
            raise ValueError("bank dimensions must be positive")
        if self.mode not in INDEX_MODES:
            raise ValueError(f"unknown index mode {self.mode!r}; expected one of {INDEX_MODES}")
        needed = 2 * int(self.frequency_indices.max()) + 2
        if self.num_samples < needed:
            raise ValueError(
                f"num_samples={self.num_samples} aliases the highest frequency index; need >= {needed}"
            )

    @classmethod
    def for_partition(cls, partition, **kwargs) -> "WaveformBank":
        return cls(partition.elements_per_subarray, partition.num_subarrays, **kwargs)

    @property
    def size(self) -> int:
        return self.elements_per_subarray * self.num_subarrays

    @property
    def dt(self) -> float:
        return self.pulse.duration / self.num_samples

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.num_samples) * self.dt

    def frequency_index(self, m: int, k: int) -> int:
        self._check_index(m, k)
        if self.mode == "paper-literal":
            return m * k
        return (k - 1) * self.elements_per_subarray + (m - 1)

    @property
    def frequency_indices(self) -> np.ndarray:
        """Frequency index per bank row (subarray-major)."""
        mm = np.tile(np.arange(1, self.elements_per_subarray + 1), self.num_subarrays)
        kk = np.repeat(np.arange(1, self.num_subarrays + 1), self.elements_per_subarray)
        if self.mode == "paper-literal":
            return mm * kk
        return (kk - 1) * self.elements_per_subarray + (mm - 1)

    def row(self, m: int, k: int) -> int:
        self._check_index(m, k)
        return (k - 1) * self.elements_per_subarray + (m - 1)

    def _check_index(self, m, k):
        if not (1 <= m <= self.elements_per_subarray and 1 <= k <= self.num_subarrays):
            raise IndexError(
                f"waveform index (m={m}, k={k}) outside 1..{self.elements_per_subarray} x 1..{self.num_subarrays}"
            )

    @cached_property
    def matrix(self) -> np.ndarray:
        """All waveforms, shape ``(M_m * K, N_s)``."""
        n = np.arange(self.num_samples)
        # f * t_n / T_0 == f * n / N_s; integer product keeps the phase exact
        cycles = np.multiply.outer(self.frequency_indices, n) % self.num_samples
        carrier = np.exp(2j * np.pi * cycles / self.num_samples)
        return self.pulse.samples(self.num_samples) * carrier

    def generate(self, m: int, k: int) -> np.ndarray:
        return self.matrix[self.row(m, k)].copy()


def generate_waveform(bank: WaveformBank, m: int, k: int) -> np.ndarray:
    """Samples of phi_k^m over one pulse (1-based ``m`` and ``k``)."""
    return bank.generate(m, k)


def gram_matrix(bank: WaveformBank) -> np.ndarray:
    """
    Discrete approximation of the pulse integral of phi_p phi_q^*.

    Uses left-endpoint quadrature with weight ``T_0 / N_s``; in linear mode
    the result is the identity to roundoff.
    """
    phi = bank.matrix
    return (phi @ phi.conj().T) * bank.dt


def matched_filter(received, bank: WaveformBank) -> np.ndarray:
    """
    Correlate received sample streams against every waveform in the bank.

    Parameters
    ----------
    received : array_like
        Shape ``(N_s,)`` for one element or ``(M_R, N_s)`` for an array.
    bank : WaveformBank

    Returns
    -------
    np.ndarray
        Shape ``(M_m * K,)`` or ``(M_R, M_m * K)``.
    """
    received = np.asarray(received)
    if received.shape[-1] != bank.num_samples:
        raise ValueError(
            f"received stream has {received.shape[-1]} samples, bank expects {bank.num_samples}"
        )
    return (received @ bank.matrix.conj().T) * bank.dt


def virtual_data_vector(received, bank: WaveformBank) -> np.ndarray:
    """
    Stack matched-filter outputs into the ``M_m * K * M_R`` virtual vector.

    Entry ``q * M_R + r`` is the response of receive element ``r`` to bank
    row ``q``, the ordering of ``(c * d) kron b``.
    """
    out = matched_filter(np.atleast_2d(received), bank)
    return out.T.reshape(-1)
