"""Discretized simulation cell, qubit encoding of wavefunctions, initial states.

Each coordinate axis is discretized into N = 2**n equidistant points on
[0, L) with grid step dx = L/N; the coordinate of index k is k*dx.  A
wavefunction psi normalized over the cell is stored through its encoded
amplitudes ``c_k = dV**(1/2) * psi(r_k)`` so that the amplitude vector has
unit 2-norm.

Amplitudes are kept row-major with the x index fastest: the flat index of
grid point (k_x, k_y) in two dimensions is ``k_y * N + k_x``.  For multiple
particle registers, particle 0's axes vary fastest.

Ancilla qubits are represented as independent branches: a state entangled
with one ancilla holds two amplitude arrays (branch index = ancilla
computational basis state), with two ancillae four.  All circuits used here
couple ancillae to the register only through controlled diagonal or
evolution operators, so branches evolve independently between the explicit
ancilla gates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class Grid:
    n_per_axis: int      # qubits per coordinate axis
    dims: int            # spatial dimensions, 1..3
    box_len: float       # cell edge L in nm
    n_points: int        # N = 2**n_per_axis
    dx: float            # L / N
    dp: float            # 2 pi / L
    cell_volume: float   # dx**dims

    @property
    def total_points(self) -> int:
        return self.n_points**self.dims

    def coordinates(self) -> np.ndarray:
        """Per-axis coordinate values k*dx, shape (N,)."""
        return np.arange(self.n_points) * self.dx

    def centered_momenta(self) -> np.ndarray:
        """Momentum values (s - N/2)*dp at the centered-transform output
        index s, shape (N,)."""
        return (np.arange(self.n_points) - self.n_points // 2) * self.dp

    def axis_values(self, axis: int, n_particles: int = 1) -> np.ndarray:
        """Coordinates of one logical axis broadcast over the full register,
        flattened to (N**(dims*n_particles),)."""
        total_axes = self.dims * n_particles
        shape = [1] * total_axes
        shape[total_axes - 1 - axis] = self.n_points
        full = np.broadcast_to(
            self.coordinates().reshape(shape), (self.n_points,) * total_axes
        )
        return full.reshape(-1)


def build_grid(n_per_axis: int, dims: int, box_len: float) -> Grid:
    """Construct the cell descriptor; n is capped at 12 as a memory guard."""
    if not (1 <= int(n_per_axis) <= 12):
        raise ValueError(f"n_per_axis must be in [1, 12], got {n_per_axis}")
    if dims not in (1, 2, 3):
        raise ValueError(f"dims must be 1, 2 or 3, got {dims}")
    if not (box_len > 0):
        raise ValueError(f"box_len must be positive, got {box_len}")
    n_points = 2 ** int(n_per_axis)
    dx = box_len / n_points
    return Grid(
        n_per_axis=int(n_per_axis),
        dims=int(dims),
        box_len=float(box_len),
        n_points=n_points,
        dx=dx,
        dp=2.0 * np.pi / box_len,
        cell_volume=dx**dims,
    )


class BranchState:
    """Complex amplitudes over grid indices, one array per ancilla branch.

    ``amplitudes`` has shape (n_branches, N**(dims*n_particles)).  The total
    squared norm over all branches stays 1 under every unitary operation.
    ``momentum_axes`` tags which logical axes are currently in the momentum
    representation (filled by the centered transform), so that diagonal
    phase operators can verify they act in the right basis.
    """

    __slots__ = ("grid", "amplitudes", "n_particles", "momentum_axes")

    def __init__(self, grid: Grid, amplitudes: np.ndarray, n_particles: int = 1,
                 momentum_axes: frozenset[int] = frozenset()):
        amplitudes = np.asarray(amplitudes, dtype=complex)
        if amplitudes.ndim == 1:
            amplitudes = amplitudes[None, :]
        if amplitudes.shape[0] not in (1, 2, 4):
            raise ValueError("n_branches must be 1, 2 or 4")
        expected = grid.total_points**n_particles
        if amplitudes.shape[1] != expected:
            raise ValueError(
                f"amplitude length {amplitudes.shape[1]} does not match "
                f"{n_particles} register(s) on the grid ({expected})"
            )
        self.grid = grid
        self.amplitudes = amplitudes
        self.n_particles = n_particles
        self.momentum_axes = momentum_axes

    @property
    def n_branches(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def total_axes(self) -> int:
        return self.grid.dims * self.n_particles

    def numpy_axis(self, logical_axis: int) -> int:
        """Tensor dimension of a logical axis (particle*dims + axis, x = 0).

        Axis 0 of particle 0 is the fastest (last) tensor dimension.
        """
        if not (0 <= logical_axis < self.total_axes):
            raise ValueError(f"axis {logical_axis} out of range")
        return 1 + (self.total_axes - 1 - logical_axis)

    def tensor(self) -> np.ndarray:
        """View shaped (n_branches, N, ..., N) for per-axis operations."""
        n = self.grid.n_points
        return self.amplitudes.reshape((self.n_branches,) + (n,) * self.total_axes)

    def total_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def copy(self) -> "BranchState":
        return BranchState(self.grid, self.amplitudes.copy(), self.n_particles,
                           self.momentum_axes)

    def require_position(self, axes: Iterable[int] | None = None) -> None:
        axes = set(range(self.total_axes)) if axes is None else set(axes)
        bad = axes & self.momentum_axes
        if bad:
            raise ValueError(f"axes {sorted(bad)} are in the momentum representation")

    def require_momentum(self, axis: int) -> None:
        if axis not in self.momentum_axes:
            raise ValueError(f"axis {axis} is not in the momentum representation")

    def single_branch(self) -> np.ndarray:
        if self.n_branches != 1:
            raise ValueError("operation requires a single-branch state")
        return self.amplitudes[0]


@dataclass(frozen=True)
class InitialStateSpec:
    """Constructor parameters for the built-in initial states.

    kinds: gaussian, exponential, bonding_s, antibonding_s, bonding_px,
    position_basis, custom_table.  Lengths in nm; offsets are measured from
    the cell center.
    """

    kind: str
    x_c: float = 0.0           # gaussian center offset along x
    width: float = 0.0         # gaussian width w
    decay: float = 0.0         # exponential decay length d
    well_offset: float = 0.0   # a in the two-center combinations
    indices: tuple[int, ...] = ()
    table: Sequence[tuple[int, int, float, float]] | None = None


def _gaussian(grid: Grid, x_c: float, w: float) -> np.ndarray:
    if w <= 0:
        raise ValueError("gaussian width must be positive")
    axes = [grid.coordinates() - grid.box_len / 2.0 for _ in range(grid.dims)]
    mesh = np.meshgrid(*axes[::-1], indexing="ij")  # (..., Y, X)
    sq = (mesh[-1] - x_c) ** 2
    for m in mesh[:-1]:
        sq = sq + m**2
    return np.exp(-sq / w**2).reshape(-1).astype(complex)


def init_state(grid: Grid, spec: InitialStateSpec) -> BranchState:
    """Build a normalized single-branch state on the grid."""
    kind = spec.kind
    if kind == "gaussian":
        values = _gaussian(grid, spec.x_c, spec.width)
    elif kind == "exponential":
        if spec.decay <= 0:
            raise ValueError("exponential decay length must be positive")
        axes = [grid.coordinates() - grid.box_len / 2.0 for _ in range(grid.dims)]
        mesh = np.meshgrid(*axes[::-1], indexing="ij")
        values = np.exp(-sum(np.abs(m) for m in mesh) / spec.decay)
        values = values.reshape(-1).astype(complex)
    elif kind == "bonding_s":
        a = spec.well_offset
        values = _gaussian(grid, a, spec.width) + _gaussian(grid, -a, spec.width)
    elif kind == "antibonding_s":
        a = spec.well_offset
        values = _gaussian(grid, a, spec.width) - _gaussian(grid, -a, spec.width)
    elif kind == "bonding_px":
        a = spec.well_offset
        values = (
            _gaussian(grid, 1.5 * a, spec.width)
            + _gaussian(grid, -1.5 * a, spec.width)
            - 2.5 * _gaussian(grid, 0.0, spec.width)
        )
    elif kind == "position_basis":
        if len(spec.indices) != grid.dims:
            raise ValueError("position_basis needs one index per dimension")
        flat = 0
        for axis in reversed(range(grid.dims)):  # slowest (last axis) first
            k = spec.indices[axis]
            if not (0 <= k < grid.n_points):
                raise ValueError(f"index {k} outside the grid")
            flat = flat * grid.n_points + k
        values = np.zeros(grid.total_points, dtype=complex)
        values[flat] = 1.0
    elif kind == "custom_table":
        if grid.dims != 2:
            raise ValueError("custom_table is defined for dims = 2")
        if not spec.table:
            raise ValueError("custom_table requires rows (k_x, k_y, re, im)")
        values = np.zeros(grid.total_points, dtype=complex)
        for k_x, k_y, re, im in spec.table:
            k_x, k_y = int(k_x), int(k_y)
            if not (0 <= k_x < grid.n_points and 0 <= k_y < grid.n_points):
                raise ValueError(f"table index ({k_x}, {k_y}) outside the grid")
            values[k_y * grid.n_points + k_x] = re + 1j * im
    else:
        raise ValueError(f"unknown initial state kind {kind!r}")

    norm = np.linalg.norm(values)
    if norm < 1e-300:
        raise ValueError("initial state has zero norm")
    return BranchState(grid, values / norm)


def inversion_map(state: BranchState) -> np.ndarray:
    """Amplitudes with every axis index inverted through the cell center,
    k -> (N - k) mod N (the periodic image of X -> -X per axis)."""
    tensor = state.tensor()
    out = tensor
    for axis in range(state.total_axes):
        np_axis = state.numpy_axis(axis)
        out = np.roll(np.flip(out, axis=np_axis), 1, axis=np_axis)
    return out.reshape(state.amplitudes.shape)


def parity_expectation(state: BranchState) -> float:
    """<psi|P|psi> for the inversion P through the cell center; in [-1, 1]."""
    if state.grid.dims != 2:
        raise ValueError("parity_expectation is defined for dims = 2")
    psi = state.single_branch()
    inverted = inversion_map(state)[0]
    value = np.vdot(psi, inverted)
    return float(value.real)


@dataclass(frozen=True)
class EigenWeights:
    """Projection weights |<phi_nu|psi>|^2, individually and grouped by
    degenerate eigenvalue cluster."""

    individual: np.ndarray
    groups: tuple[tuple[int, ...], ...]
    grouped: np.ndarray

    def group_weight_of(self, index: int) -> float:
        for g, members in enumerate(self.groups):
            if index in members:
                return float(self.grouped[g])
        raise IndexError(index)


def eigenweights(state: BranchState, eig) -> EigenWeights:
    """Weights of ``state`` on the eigenvectors of an EigenSet."""
    if eig.grid is not None and eig.grid != state.grid:
        raise ValueError("EigenSet was computed on a different grid")
    psi = state.single_branch()
    if eig.eigenvectors.shape[1] != psi.shape[0]:
        raise ValueError("EigenSet dimension does not match the state")
    amps = eig.eigenvectors.conj() @ psi
    individual = np.abs(amps) ** 2
    grouped = np.array([individual[list(g)].sum() for g in eig.degeneracy_groups])
    return EigenWeights(individual=individual, groups=eig.degeneracy_groups,
                        grouped=grouped)
