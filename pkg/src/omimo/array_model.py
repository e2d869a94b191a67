"""
Uniform linear array geometry and steering vectors.

Angles are in radians throughout the library; degrees only appear at the
command-line and file boundaries. Element indices are 0-based, so the first
element is the phase reference and its steering entry is exactly 1.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class UniformLinearArray:
    """
    Equally spaced, omnidirectional elements along a line.

    Parameters
    ----------
    num_elements : int
        Number of elements (M_T or M_R).
    spacing : float
        Inter-element spacing in wavelengths.
    """

    num_elements: int
    spacing: float = 0.5

    def __post_init__(self):
        if int(self.num_elements) != self.num_elements or self.num_elements < 1:
            raise ValueError(f"num_elements must be a positive integer, got {self.num_elements!r}")
        if not np.isfinite(self.spacing) or self.spacing <= 0:
            raise ValueError(f"spacing must be positive, got {self.spacing!r}")

    @property
    def positions(self) -> np.ndarray:
        """Element positions in wavelengths."""
        return self.spacing * np.arange(self.num_elements)

    def steering_vector(self, theta):
        return steering_vector(self, theta)


def _phase_ramp(num: int, spacing: float, theta) -> np.ndarray:
    # exp(-j 2 pi d m sin(theta)); rows follow theta when theta is an array
    theta = np.asarray(theta, dtype=float)
    m = np.arange(num)
    phase = -2j * np.pi * spacing * np.multiply.outer(np.sin(theta), m)
    return np.exp(phase)


def steering_vector(array: UniformLinearArray, theta) -> np.ndarray:
    """
    Steering vector a(theta) of a ULA.

    Parameters
    ----------
    array : UniformLinearArray
    theta : float or array_like
        Direction(s) in radians, measured from broadside.

    Returns
    -------
    np.ndarray
        Shape ``(M,)`` for scalar ``theta``; ``theta.shape + (M,)`` otherwise.
        Entry ``m`` is ``exp(-j 2 pi d m sin(theta))``.
    """
    return _phase_ramp(array.num_elements, array.spacing, theta)


def virtual_steering_full_mimo(
    tx: UniformLinearArray, rx: UniformLinearArray, theta
) -> np.ndarray:
    """
    Full-MIMO virtual steering vector ``a(theta) kron b(theta)``.

    Entry ``m_t * M_R + m_r`` equals
    ``exp(-j 2 pi (m_t d_T + m_r d_R) sin(theta))``. Vectorizes over
    ``theta`` along leading axes.
    """
    a = steering_vector(tx, theta)
    b = steering_vector(rx, theta)
    v = a[..., :, None] * b[..., None, :]
    return v.reshape(v.shape[:-2] + (tx.num_elements * rx.num_elements,))
