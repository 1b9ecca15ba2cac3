"""Diagonal phase operators, Trotterized real-time evolution, gate sequences.

The kinetic evolution exp(-i T dt) under the Landau gauge decouples into
per-axis factors once the magnetic phase

    U_mag = exp(i mu (x - x_g) y),   mu = (q/c) B,

conjugates the y factor:

    exp(-i T dt) = U_mag exp(-i T0y dt) U_mag^dag exp(-i T0x dt)
                   exp(-i T0z dt) + O(dt^2).

Each exp(-i T0 dt) is a centered-transform sandwich around the diagonal
kinetic phase.  Two splittings of the full step exp(-i (T+V) dt) are
provided: the first-order TV product and the second-order TVT product
whose kinetic half-steps are mirrored so that the whole step is palindromic
(the internal x/y ordering of the second half is reversed; the circuit
picture leaves that ordering free, and the mirrored form makes the step
genuinely second order in dt).

Controlled operations act on the ancilla-1 branches only; the simulator
applies per-branch operators, which is operatorially identical to the
controlled-gate circuits including the cancellations between uncontrolled
and controlled-squared pieces.  Global phases are always tracked: the
diagonal kinetic phase exp(-i E_kin dt) carries the overall factor
exp(-i N^2 e_kin dt / 4) that becomes physical under control.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .grid import BranchState, Grid
from .hamiltonian import HamiltonianSpec, evaluate_potential, _gauge_momentum_offset
from .spectral import AxisSelector, cqft_axis_raw


class Splitting(str, Enum):
    TV = "TV"
    TVT = "TVT"


def _branch_rows(state: BranchState, branch_mask) -> Sequence[int]:
    if branch_mask is None:
        return range(state.n_branches)
    rows = [int(b) for b in branch_mask]
    for b in rows:
        if not (0 <= b < state.n_branches):
            raise ValueError(f"branch {b} out of range")
    return rows


def kinetic_phase_values(grid: Grid, mass_ratio: float, dt: float) -> np.ndarray:
    """exp(-i E_kin(s) dt) on the centered momentum grid, shape (N,)."""
    from .units import UNITS

    e_kin = (UNITS.kinetic_coeff / mass_ratio) * grid.centered_momenta() ** 2
    return np.exp(-1j * e_kin * dt)


def apply_kinetic_phase(state: BranchState, axis: AxisSelector, dt: float,
                        mass_ratio: float, branch_mask=None) -> BranchState:
    """Diagonal momentum phase exp(-i E_kin dt) along one axis.

    The axis must already be in the momentum representation.
    """
    flat_axis = axis.flat(state.grid.dims)
    state.require_momentum(flat_axis)
    phases = kinetic_phase_values(state.grid, mass_ratio, dt)
    tensor = state.tensor()
    np_axis = state.numpy_axis(flat_axis)
    shape = [1] * tensor.ndim
    shape[np_axis] = state.grid.n_points
    phases = phases.reshape(shape)
    for b in _branch_rows(state, branch_mask):
        tensor[b] *= phases[0]
    return state


def _magnetic_phase_tensor(grid: Grid, gauge, sign: int) -> np.ndarray:
    """exp(sign * i mu (x - x_g) y) over one particle's (x, y), shape (N, N)
    with y slow, x fast."""
    x = grid.coordinates() - gauge.gauge_center
    y = grid.coordinates()
    return np.exp(1j * sign * gauge.mu * y[:, None] * x[None, :])


def apply_magnetic_phase(state: BranchState, gauge, dagger: bool = False,
                         branch_mask=None) -> BranchState:
    """Multiply amplitudes by exp(+/- i mu (x - x_g) y) per particle."""
    grid = state.grid
    if grid.dims < 2:
        raise ValueError("the magnetic phase requires dims >= 2")
    state.require_position()
    if gauge.mu == 0.0:
        return state
    sign = -1 if dagger else +1
    phase2d = _magnetic_phase_tensor(grid, gauge, sign)
    tensor = state.tensor()
    rows = _branch_rows(state, branch_mask)
    for p in range(state.n_particles):
        x_ax = state.numpy_axis(p * grid.dims + 0)
        y_ax = state.numpy_axis(p * grid.dims + 1)
        shape = [1] * tensor.ndim
        shape[x_ax] = grid.n_points
        shape[y_ax] = grid.n_points
        block = phase2d if y_ax < x_ax else phase2d.T
        block = block.reshape(shape)
        for b in rows:
            tensor[b] *= block[0]
    return state


def apply_potential_phase(state: BranchState, spec: HamiltonianSpec, dt: float,
                          branch_mask=None) -> BranchState:
    """Diagonal multiply by exp(-i V(r) dt) per particle register."""
    state.require_position()
    grid = state.grid
    v = evaluate_potential(spec).reshape((grid.n_points,) * grid.dims)
    phase = np.exp(-1j * v * dt)
    tensor = state.tensor()
    rows = _branch_rows(state, branch_mask)
    for p in range(state.n_particles):
        shape = [1] * tensor.ndim
        for ax in range(grid.dims):
            shape[state.numpy_axis(p * grid.dims + ax)] = grid.n_points
        block = phase.reshape(shape)
        for b in rows:
            tensor[b] *= block[0]
    return state


# ---------------------------------------------------------------------------
# Trotterized step as a primitive-operation list
# ---------------------------------------------------------------------------

def _rte_op_list(spec: HamiltonianSpec, dt: float, splitting: Splitting):
    """Application-ordered primitive list for one RTE step."""
    d = spec.grid.dims
    has_mag = spec.gauge.mu != 0.0 and d >= 2

    def kin_block(t):
        ops = []
        if d == 3:
            ops.append(("kin", 2, t))
        ops.append(("kin", 0, t))
        if d >= 2:
            if has_mag:
                ops += [("mag", -1), ("kin", 1, t), ("mag", +1)]
            else:
                ops.append(("kin", 1, t))
        return ops

    if splitting == Splitting.TV:
        return [("pot", dt)] + kin_block(dt)
    if splitting == Splitting.TVT:
        first = kin_block(dt / 2.0)
        return first + [("pot", dt)] + _mirror_kin_block(first)
    raise ValueError(f"unknown splitting {splitting!r}")


def _mirror_kin_block(ops):
    """Mirror a kinetic block so the full TVT list is palindromic: the
    per-axis factors reverse order while each mag sandwich keeps its
    internal (dagger, phase, undagger) structure."""
    groups = []
    i = 0
    while i < len(ops):
        if ops[i][0] == "mag":
            groups.append(ops[i:i + 3])
            i += 3
        else:
            groups.append([ops[i]])
            i += 1
    out = []
    for g in reversed(groups):
        out.extend(g)
    return out


def _adjoint_ops(ops):
    out = []
    for op in reversed(ops):
        if op[0] == "kin":
            out.append(("kin", op[1], -op[2]))
        elif op[0] == "pot":
            out.append(("pot", -op[1]))
        else:
            out.append(("mag", -op[1]))
    return out


def _run_ops(state: BranchState, ops, spec: HamiltonianSpec, branch_mask):
    from .spectral import cqft_axis

    for op in ops:
        if op[0] == "kin":
            _, axis, t = op
            sel = AxisSelector(axis=axis)
            cqft_axis(state, sel)
            apply_kinetic_phase(state, sel, t, spec.mass_ratio, branch_mask)
            cqft_axis(state, sel, inverse=True)
        elif op[0] == "pot":
            apply_potential_phase(state, spec, op[1], branch_mask)
        else:
            apply_magnetic_phase(state, spec.gauge, dagger=(op[1] < 0),
                                 branch_mask=branch_mask)
    return state


def rte_step(state: BranchState, spec: HamiltonianSpec, dt: float,
             splitting: Splitting = Splitting.TVT, branch_mask=None) -> BranchState:
    """One Trotterized real-time step exp(-i H dt) on the selected branches.

    Position representation in and out.
    """
    if state.n_particles != 1:
        raise ValueError("real-time evolution is implemented per particle register")
    state.require_position()
    return _run_ops(state, _rte_op_list(spec, dt, splitting), spec, branch_mask)


# ---------------------------------------------------------------------------
# Raw-array executor and propagator backends
# ---------------------------------------------------------------------------

def _apply_ops_raw(vec: np.ndarray, ops, spec: HamiltonianSpec) -> np.ndarray:
    """Primitive list applied to flat amplitudes (..., N**dims)."""
    from .units import UNITS

    grid = spec.grid
    n, d = grid.n_points, grid.dims
    arr = np.asarray(vec, dtype=complex).reshape(vec.shape[:-1] + (n,) * d)
    inv2m = UNITS.kinetic_coeff / spec.mass_ratio
    p2 = grid.centered_momenta() ** 2
    v = None
    for op in ops:
        if op[0] == "kin":
            _, axis, t = op
            np_axis = arr.ndim - 1 - axis
            shape = [n if ax == np_axis else 1 for ax in range(arr.ndim)]
            ph = np.exp(-1j * inv2m * p2 * t).reshape(shape)
            arr = cqft_axis_raw(cqft_axis_raw(arr, np_axis) * ph, np_axis, inverse=True)
        elif op[0] == "pot":
            if v is None:
                v = evaluate_potential(spec).reshape((n,) * d)
            arr = arr * np.exp(-1j * v * op[1])
        else:
            sign = op[1]
            x = (grid.coordinates() - spec.gauge.gauge_center).reshape((1,) * (arr.ndim - 1) + (n,))
            y = grid.coordinates().reshape((1,) * (arr.ndim - 2) + (n, 1))
            arr = arr * np.exp(1j * sign * spec.gauge.mu * x * y)
    return arr.reshape(vec.shape)


class TrotterPropagator:
    """U(dt) as the Trotterized product of one RTE step (optionally sliced
    into substeps of bounded width); the adjoint is the exact reverse."""

    def __init__(self, spec: HamiltonianSpec, splitting: Splitting = Splitting.TVT,
                 substep: float | None = None):
        self.spec = spec
        self.splitting = Splitting(splitting)
        self.substep = substep

    def apply(self, psi: np.ndarray, dt: float, adjoint: bool = False) -> np.ndarray:
        if dt == 0.0:
            return np.array(psi, dtype=complex, copy=True)
        n_slices = 1
        if self.substep is not None and self.substep > 0:
            n_slices = max(1, int(np.ceil(abs(dt) / self.substep)))
        ops = _rte_op_list(self.spec, dt / n_slices, self.splitting)
        if adjoint:
            ops = _adjoint_ops(ops)
        out = np.asarray(psi, dtype=complex)
        for _ in range(n_slices):
            out = _apply_ops_raw(out, ops, self.spec)
        return out


class DensePropagator:
    """Exact exp(-i H dt) from dense diagonalization (small grids)."""

    def __init__(self, spec: HamiltonianSpec):
        from .hamiltonian import dense_hamiltonian

        h = dense_hamiltonian(spec)
        self.eigenvalues, self.eigenvectors = np.linalg.eigh(h)
        self.spec = spec

    def apply(self, psi: np.ndarray, dt: float, adjoint: bool = False) -> np.ndarray:
        t = -dt if adjoint else dt
        coeff = self.eigenvectors.conj().T @ psi
        return self.eigenvectors @ (np.exp(-1j * self.eigenvalues * t) * coeff)


class SpectralPropagator:
    """Exact propagation inside the subspace spanned by an EigenSet.

    remainder = "error" rejects inputs with weight outside the subspace
    beyond ``tol``; "project" silently drops that weight (recorded in
    ``discarded_weight``).
    """

    def __init__(self, eig, remainder: str = "error", tol: float = 1e-9):
        self.eig = eig
        self.remainder = remainder
        self.tol = tol
        self.discarded_weight = 0.0

    def project(self, psi: np.ndarray) -> np.ndarray:
        coeff = self.eig.eigenvectors.conj() @ psi
        inside = self.eig.eigenvectors.T @ coeff
        self.discarded_weight = max(
            self.discarded_weight,
            float(np.linalg.norm(psi) ** 2 - np.linalg.norm(coeff) ** 2),
        )
        return inside

    def apply(self, psi: np.ndarray, dt: float, adjoint: bool = False) -> np.ndarray:
        t = -dt if adjoint else dt
        coeff = self.eig.eigenvectors.conj() @ psi
        outside = float(np.linalg.norm(psi) ** 2 - np.linalg.norm(coeff) ** 2)
        if self.remainder == "error" and outside > self.tol:
            raise ValueError(
                f"state has weight {outside:.3e} outside the eigen-subspace"
            )
        self.discarded_weight = max(self.discarded_weight, outside)
        return self.eig.eigenvectors.T @ (np.exp(-1j * self.eig.eigenvalues * t) * coeff)


def default_propagator(spec: HamiltonianSpec, splitting: Splitting = Splitting.TVT,
                       substep: float = 0.01):
    """Dense exact propagator on small grids, substepped Trotter otherwise."""
    if spec.grid.total_points <= 1024:
        return DensePropagator(spec)
    return TrotterPropagator(spec, splitting, substep=substep)


def conjugation_form_dense(spec: HamiltonianSpec) -> np.ndarray:
    """Dense matrix of the dt -> 0 generator of the splitting itself,
    T0x (+ T0z) + U_mag T0y U_mag^dag + V, used as the reference for
    Trotter-order checks."""
    from .units import UNITS

    grid = spec.grid
    total = grid.total_points
    if total > 4096:
        raise ValueError("conjugation-form generator guarded to 4096 points")
    n, d = grid.n_points, grid.dims
    inv2m = UNITS.kinetic_coeff / spec.mass_ratio
    # identity columns stacked along the first index: batch[i] = e_i
    batch = np.eye(total, dtype=complex).reshape(total, *(n,) * d)
    p2 = grid.centered_momenta() ** 2

    def kin_axis(arr, axis):
        np_axis = arr.ndim - 1 - axis
        shape = [n if ax == np_axis else 1 for ax in range(arr.ndim)]
        return cqft_axis_raw(
            inv2m * p2.reshape(shape) * cqft_axis_raw(arr, np_axis),
            np_axis, inverse=True,
        )

    result = kin_axis(batch, 0)
    if d == 3:
        result = result + kin_axis(batch, 2)
    if d >= 2:
        if spec.gauge.mu != 0.0:
            x = (grid.coordinates() - spec.gauge.gauge_center).reshape(
                (1,) * (batch.ndim - 1) + (n,))
            y = grid.coordinates().reshape((1,) * (batch.ndim - 2) + (n, 1))
            mag = np.exp(1j * spec.gauge.mu * x * y)
            result = result + mag * kin_axis(batch * np.conj(mag), 1)
        else:
            result = result + kin_axis(batch, 1)
    h = result.reshape(total, total).T  # batch rows are H columns
    h[np.diag_indices(total)] += evaluate_potential(spec)
    return h


# ---------------------------------------------------------------------------
# Gate-sequence forms of the diagonal phase operators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhaseGateElement:
    targets: tuple[int, ...]
    controls: tuple[int, ...]
    angle: float
    layer: int


@dataclass(frozen=True)
class PhaseGateSequence:
    """Diagonal unitary as phase gates: each element multiplies basis states
    whose control and target bits are all 1 by exp(i angle); the whole
    sequence carries exp(i global_phase)."""

    n_qubits: int
    elements: tuple[PhaseGateElement, ...]
    global_phase: float

    @property
    def n_layers(self) -> int:
        return 1 + max((e.layer for e in self.elements), default=-1)

    def controlled_count(self) -> int:
        return sum(1 for e in self.elements if e.controls)

    def diagonal(self) -> np.ndarray:
        """Dense diagonal over the 2**n_qubits computational basis (qubit l
        is bit l of the index)."""
        if self.n_qubits > 16:
            raise ValueError("diagonal reconstruction guarded to 16 qubits")
        dim = 1 << self.n_qubits
        idx = np.arange(dim)
        phases = np.full(dim, self.global_phase)
        for e in self.elements:
            mask = np.ones(dim, dtype=bool)
            for q in e.controls + e.targets:
                mask &= (idx >> q) & 1 == 1
            phases[mask] += e.angle
        return np.exp(1j * phases)

    def to_json(self) -> str:
        return json.dumps(
            {
                "n_qubits": self.n_qubits,
                "global_phase": self.global_phase,
                "elements": [
                    {
                        "targets": list(e.targets),
                        "controls": list(e.controls),
                        "angle": e.angle,
                        "layer": e.layer,
                    }
                    for e in self.elements
                ],
            },
            indent=2,
        )


def _greedy_layers(pairs, start_layer):
    """Assign each qubit-set the smallest layer where it is disjoint."""
    layers: list[set[int]] = []
    out = []
    for qubits in pairs:
        placed = None
        for i, used in enumerate(layers):
            if not (used & qubits):
                placed = i
                used.update(qubits)
                break
        if placed is None:
            layers.append(set(qubits))
            placed = len(layers) - 1
        out.append(start_layer + placed)
    return out


def emit_kinetic_phase_sequence(n: int, e_kin_dt: float) -> PhaseGateSequence:
    """Phase-gate form of the diagonal exp(-i e_kin (j - N/2)^2 dt):
    n single-qubit gates with parameters 2^l (N - 2^l), n(n-1)/2 controlled
    gates with parameters -2^(l+l'+1), and global phase -N^2 e_kin dt / 4."""
    if not (1 <= n <= 8):
        raise ValueError("gate emission guarded to n <= 8")
    big_n = 1 << n
    elements = [
        PhaseGateElement(targets=(l,), controls=(), layer=0,
                         angle=(2**l) * (big_n - 2**l) * e_kin_dt)
        for l in range(n)
    ]
    pairs = [(l, lp) for l in range(n) for lp in range(l)]
    layer_ids = _greedy_layers([{l, lp} for l, lp in pairs], start_layer=1)
    for (l, lp), lay in zip(pairs, layer_ids):
        elements.append(
            PhaseGateElement(targets=(lp,), controls=(l,), layer=lay,
                             angle=-(2 ** (l + lp + 1)) * e_kin_dt)
        )
    return PhaseGateSequence(n_qubits=n, elements=tuple(elements),
                             global_phase=-big_n**2 * e_kin_dt / 4.0)


def emit_magnetic_phase_sequence(n: int, mu_dx2: float) -> PhaseGateSequence:
    """Phase-gate form of exp(i mu x y): n^2 controlled gates with
    parameters 2^(l+l') scheduled into n layers indexed by d with
    l' = l + d mod n.  Qubits 0..n-1 hold x, n..2n-1 hold y."""
    if not (1 <= n <= 8):
        raise ValueError("gate emission guarded to n <= 8")
    elements = []
    for d in range(n):
        for l in range(n):
            lp = (l + d) % n
            elements.append(
                PhaseGateElement(targets=(n + lp,), controls=(l,), layer=d,
                                 angle=(2 ** (l + lp)) * mu_dx2)
            )
    return PhaseGateSequence(n_qubits=2 * n, elements=tuple(elements),
                             global_phase=0.0)


def emit_phase_gate_sequence(kind: str, n: int, *, e_kin_dt: float | None = None,
                             mu_dx2: float | None = None) -> PhaseGateSequence:
    if kind == "kinetic":
        if e_kin_dt is None:
            raise ValueError("kinetic sequence needs e_kin_dt = e_kin * dt")
        return emit_kinetic_phase_sequence(n, e_kin_dt)
    if kind == "magnetic":
        if mu_dx2 is None:
            raise ValueError("magnetic sequence needs mu_dx2 = mu * dx^2")
        return emit_magnetic_phase_sequence(n, mu_dx2)
    raise ValueError(f"unknown sequence kind {kind!r}")


def kinetic_diagonal(n: int, e_kin_dt: float) -> np.ndarray:
    """Analytic diagonal exp(-i e_kin (j - N/2)^2 dt) for comparison."""
    big_n = 1 << n
    j = np.arange(big_n)
    return np.exp(-1j * e_kin_dt * (j - big_n / 2.0) ** 2)


def magnetic_diagonal(n: int, mu_dx2: float) -> np.ndarray:
    """Analytic diagonal exp(i mu x y) on the flat (k' slow, k fast) basis."""
    big_n = 1 << n
    k = np.arange(big_n)
    return np.exp(1j * mu_dx2 * np.outer(k, k)).reshape(-1)
