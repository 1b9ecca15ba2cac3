"""Fourier machinery: centered transform per axis and the cyclic shift unitary.

The centered transform maps position amplitudes to amplitudes on the momenta
p = (s - N/2) dp.  With x_k = k dx and p_s = (s - N/2) dp the analysis
coefficients are

    c_s = (1/sqrt(N)) sum_k exp(-i p_s x_k) psi_k
        = DFT[ (-1)^k psi_k ]_s / sqrt(N),

i.e. a standard unitary FFT composed with an alternating-sign
premultiplication that realizes the N/2 index shift.  Conjugating a diagonal
kinetic phase with this transform reproduces exp(-i T0 dt) exactly on the
grid.

The cyclic shift |j> -> |j + d mod N> is realized, as in the interferometric
derivative circuits, by an ordinary QFT sandwiching the diagonal phase
exp(-i 2 pi d j / N); it equals a direct index rotation.

Transforms are batched over branches and all orthogonal lines through
numpy's pocketfft, which plays the role of the radix-2 kernel an in-place
implementation would provide; alternating-sign vectors are cached per axis
length.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .grid import BranchState


@dataclass(frozen=True)
class AxisSelector:
    """One coordinate axis of one particle register (axis 0 = x)."""

    axis: int
    particle: int = 0

    def flat(self, dims: int) -> int:
        if not (0 <= self.axis < dims):
            raise ValueError(f"axis {self.axis} out of range for dims = {dims}")
        return self.particle * dims + self.axis


@lru_cache(maxsize=None)
def _alternating_signs(n: int) -> np.ndarray:
    signs = np.ones(n)
    signs[1::2] = -1.0
    return signs


def _sign_shape(ndim: int, axis: int, n: int) -> tuple[int, ...]:
    shape = [1] * ndim
    shape[axis] = n
    return tuple(shape)


def cqft_axis_raw(arr: np.ndarray, np_axis: int, inverse: bool = False) -> np.ndarray:
    """Centered transform of a plain array along one tensor dimension."""
    n = arr.shape[np_axis]
    signs = _alternating_signs(n).reshape(_sign_shape(arr.ndim, np_axis, n))
    if not inverse:
        return np.fft.fft(arr * signs, axis=np_axis, norm="ortho")
    return np.fft.ifft(arr, axis=np_axis, norm="ortho") * signs


def cqft_axis(state: BranchState, axis: AxisSelector, inverse: bool = False) -> BranchState:
    """Centered transform along one axis of a BranchState (all branches).

    Forward fills the momentum representation for that axis; inverse
    restores position.  The representation tag is updated accordingly.
    """
    flat_axis = axis.flat(state.grid.dims)
    if inverse:
        state.require_momentum(flat_axis)
    elif flat_axis in state.momentum_axes:
        raise ValueError(f"axis {flat_axis} is already in the momentum representation")
    tensor = state.tensor()
    out = cqft_axis_raw(tensor, state.numpy_axis(flat_axis), inverse=inverse)
    state.amplitudes = out.reshape(state.amplitudes.shape)
    if inverse:
        state.momentum_axes = state.momentum_axes - {flat_axis}
    else:
        state.momentum_axes = state.momentum_axes | {flat_axis}
    return state


def shift_axis_raw(arr: np.ndarray, np_axis: int, d: int) -> np.ndarray:
    """|j> -> |j + d mod N> along one tensor dimension via the QFT sandwich."""
    n = arr.shape[np_axis]
    phases = np.exp(-2j * np.pi * (d % n) * np.arange(n) / n)
    phases = phases.reshape(_sign_shape(arr.ndim, np_axis, n))
    work = np.fft.fft(arr, axis=np_axis, norm="ortho")
    work *= phases
    return np.fft.ifft(work, axis=np_axis, norm="ortho")


def shift_unitary(state: BranchState, axis: AxisSelector, d: int) -> BranchState:
    """Cyclic basis relabeling |j> -> |j + d mod N> along an axis."""
    flat_axis = axis.flat(state.grid.dims)
    state.require_position([flat_axis])
    tensor = state.tensor()
    out = shift_axis_raw(tensor, state.numpy_axis(flat_axis), d)
    state.amplitudes = out.reshape(state.amplitudes.shape)
    return state
