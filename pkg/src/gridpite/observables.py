"""Measurement-model observables: density, one-electron density matrix,
paramagnetic / diamagnetic / total current, derivative distributions.

The paramagnetic current is extracted with shift interferometry: an ancilla
Hadamard pair around a controlled cyclic displacement and a phase gate.
With displacement +d along an axis and ancilla phase phi, the probability of
register outcome k together with ancilla 0 is

    P_k0 = |psi_k + e^{i phi} psi_{k-d}|^2 / 4,

whose phi = pi/2 runs at +/- d combine with the density profile into the
x component of the paramagnetic current density

    j_x(r_k) = (1/m) (1/(2 d dx)) [ (2 n_e / dV)(P_k0(d) - P_k0(-d))
               + (rho(r + d dx e_x) - rho(r - d dx e_x)) / 2 ] + O(dx^2),

stated here as probability current (electric current divided by the
electron charge -e); a flag restores charge units.

The same interferometric probabilities feed the generic reconstruction of
derivative distributions g^(l) = f d^l f* / l! from finite-difference
combinations G^(r), solved per grid point as a small linear system whose
unknown count is fixed by the parity-restricted multi-index census.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .grid import BranchState, Grid
from .hamiltonian import GaugeSpec
from .spectral import cqft_axis_raw
from .units import UNITS


@dataclass(frozen=True)
class MeasurementModel:
    """Exact Born probabilities or multinomial shot sampling."""

    mode: str = "exact"
    shot_count: int = 0
    rng_seed: int = 0

    def __post_init__(self):
        if self.mode not in ("exact", "sampled"):
            raise ValueError(f"unknown measurement mode {self.mode!r}")
        if self.mode == "sampled" and self.shot_count <= 0:
            raise ValueError("sampled mode needs a positive shot_count")

    def realize(self, probs: np.ndarray, stream: int = 0) -> np.ndarray:
        """Probability vector as measured: exact, or a shot-count estimate."""
        if self.mode == "exact":
            return probs
        rng = np.random.default_rng((self.rng_seed, stream))
        p = np.clip(probs, 0.0, None)
        p = p / p.sum()
        counts = rng.multinomial(self.shot_count, p)
        return counts / self.shot_count


EXACT = MeasurementModel()


@dataclass(frozen=True)
class ScalarField:
    grid: Grid
    values: np.ndarray      # flat (N**dims,)
    units: str = ""


@dataclass(frozen=True)
class VectorField:
    grid: Grid
    values: np.ndarray      # (dims, N**dims)
    units: str = ""

    def component(self, axis: int) -> np.ndarray:
        return self.values[axis]


def _register_probabilities(state: BranchState) -> np.ndarray:
    """Marginal probability of particle 0's register outcomes, flat."""
    pts = state.grid.total_points
    amps = state.single_branch().reshape(-1, pts)
    return np.sum(np.abs(amps) ** 2, axis=0)


def density(state: BranchState, n_e: int = 1,
            model: MeasurementModel = EXACT) -> ScalarField:
    """Particle density rho(r_k) = (n_e / dV) P_k from register measurement."""
    probs = model.realize(_register_probabilities(state))
    return ScalarField(state.grid, n_e / state.grid.cell_volume * probs,
                       units="1/nm^dims")


@dataclass(frozen=True)
class OneElectronDM:
    """One-particle reduction gamma(r, r'); dV * trace = n_e."""

    gamma: np.ndarray
    n_e: int
    grid: Grid


def one_electron_dm(state: BranchState, n_e: int) -> OneElectronDM:
    """gamma(r_k, r_k') = (n_e / dV) sum_rest c[k, rest] c*[k', rest]."""
    if state.n_particles != n_e:
        raise ValueError("state must hold one register per particle")
    pts = state.grid.total_points
    if n_e >= 2 and pts > 64:
        raise ValueError("one_electron_dm guarded to 64 grid points for n_e >= 2")
    c = state.single_branch().reshape(-1, pts)
    gamma = (n_e / state.grid.cell_volume) * (c.T @ c.conj())
    return OneElectronDM(gamma=gamma, n_e=n_e, grid=state.grid)


def _roll_axis(arr: np.ndarray, np_axis: int, d: int) -> np.ndarray:
    return np.roll(arr, d, axis=np_axis)


def interferometry_probabilities(state: BranchState, axis: int, d: int,
                                 phi: float,
                                 model: MeasurementModel = EXACT,
                                 stream: int = 0) -> np.ndarray:
    """P(register outcome of particle 0, ancilla = 0) for the shift
    interferometer with displacement +d along ``axis`` and ancilla phase
    phi, marginal over the other registers.  Flat (N**dims,)."""
    grid = state.grid
    psi = state.single_branch()
    tensor = psi.reshape((grid.n_points,) * state.total_axes)
    np_axis = tensor.ndim - 1 - axis  # particle 0 axes are the trailing dims
    shifted = _roll_axis(tensor, np_axis, d)
    branch0 = 0.5 * (tensor + np.exp(1j * phi) * shifted)
    branch1 = 0.5 * (tensor - np.exp(1j * phi) * shifted)
    pts = grid.total_points
    p0 = np.sum(np.abs(branch0.reshape(-1, pts)) ** 2, axis=0)
    if model.mode == "exact":
        return p0
    p1 = np.sum(np.abs(branch1.reshape(-1, pts)) ** 2, axis=0)
    joint = model.realize(np.concatenate([p0, p1]), stream=stream)
    return joint[:pts]


def paramagnetic_current_measured(state: BranchState, axis: int, d: int,
                                  mass_ratio: float, n_e: int = 1,
                                  model: MeasurementModel = EXACT,
                                  charge_units: bool = False) -> ScalarField:
    """One component of the paramagnetic current from the circuit-pair
    probabilities at displacements +/- d (default: probability current)."""
    grid = state.grid
    if not (1 <= d < grid.n_points // 2):
        raise ValueError(f"displacement d must satisfy 1 <= d < N/2, got {d}")
    if axis >= grid.dims:
        raise ValueError("axis out of range")
    p_plus = interferometry_probabilities(state, axis, d, math.pi / 2.0,
                                          model, stream=1)
    p_minus = interferometry_probabilities(state, axis, -d, math.pi / 2.0,
                                           model, stream=2)
    rho = density(state, n_e, model).values
    shape = (grid.n_points,) * grid.dims
    np_axis = grid.dims - 1 - axis
    rho_fwd = _roll_axis(rho.reshape(shape), np_axis, -d).reshape(-1)
    rho_bwd = _roll_axis(rho.reshape(shape), np_axis, +d).reshape(-1)
    bracket = (2.0 * n_e / grid.cell_volume) * (p_plus - p_minus)
    bracket += 0.5 * (rho_fwd - rho_bwd)
    j = UNITS.inv_mass(mass_ratio) / (2.0 * d * grid.dx) * bracket
    if charge_units:
        j = UNITS.electron_charge_sign * j
    return ScalarField(grid, j, units="current")


def _derivative_momenta(grid: Grid) -> np.ndarray:
    """Centered momenta with the unpaired +-N/2 mode zeroed, keeping the
    first-derivative operator skew-adjoint on the grid."""
    p = grid.centered_momenta().copy()
    p[0] = 0.0
    return p


def spectral_gradient(psi_flat: np.ndarray, grid: Grid) -> np.ndarray:
    """Per-axis spectral derivatives of encoded amplitudes, (dims, N**dims)."""
    tensor = psi_flat.reshape((grid.n_points,) * grid.dims)
    p = _derivative_momenta(grid)
    out = np.empty((grid.dims,) + tensor.shape, dtype=complex)
    for axis in range(grid.dims):
        np_axis = tensor.ndim - 1 - axis
        shape = [grid.n_points if ax == np_axis else 1 for ax in range(tensor.ndim)]
        out[axis] = cqft_axis_raw(
            1j * p.reshape(shape) * cqft_axis_raw(tensor, np_axis),
            np_axis, inverse=True)
    return out.reshape(grid.dims, -1)


def paramagnetic_current_oracle(state: BranchState, mass_ratio: float,
                                charge_units: bool = False) -> VectorField:
    """(1/m) Im(psi* grad psi), exact on the periodic grid via the centered
    transform (single particle)."""
    if state.n_particles != 1:
        raise ValueError("oracle current is defined for a single particle")
    grid = state.grid
    psi = state.single_branch()
    grad = spectral_gradient(psi, grid)
    j = UNITS.inv_mass(mass_ratio) * np.imag(psi.conj()[None, :] * grad)
    j = j / grid.cell_volume
    if charge_units:
        j = UNITS.electron_charge_sign * j
    return VectorField(grid, j, units="current")


def diamagnetic_current(rho: ScalarField, gauge: GaugeSpec, mass_ratio: float,
                        charge_units: bool = False) -> VectorField:
    """-(1/m) (q/c) A rho: only the y component is nonzero in the Landau
    gauge A = (x - x_g) B e_y."""
    grid = rho.grid
    values = np.zeros((grid.dims, grid.total_points))
    if gauge.mu != 0.0:
        if grid.dims < 2:
            raise ValueError("the Landau gauge requires dims >= 2")
        x = grid.axis_values(0) - gauge.gauge_center
        values[1] = -UNITS.inv_mass(mass_ratio) * gauge.mu * x * rho.values
    if charge_units:
        values = UNITS.electron_charge_sign * values
    return VectorField(grid, values, units="current")


def total_current(j_para: VectorField, j_dia: VectorField) -> VectorField:
    if j_para.grid != j_dia.grid:
        raise ValueError("fields live on different grids")
    return VectorField(j_para.grid, j_para.values + j_dia.values,
                       units=j_para.units)


def divergence(field: VectorField) -> ScalarField:
    """Spectral divergence of a vector field."""
    grid = field.grid
    out = np.zeros(grid.total_points, dtype=complex)
    p = _derivative_momenta(grid)
    for axis in range(grid.dims):
        tensor = field.values[axis].astype(complex).reshape(
            (grid.n_points,) * grid.dims)
        np_axis = tensor.ndim - 1 - axis
        shape = [grid.n_points if ax == np_axis else 1 for ax in range(tensor.ndim)]
        out += cqft_axis_raw(1j * p.reshape(shape) * cqft_axis_raw(tensor, np_axis),
                             np_axis, inverse=True).reshape(-1)
    return ScalarField(grid, out.real, units="divergence")


# ---------------------------------------------------------------------------
# Derivative distributions from shift-interferometry probabilities
# ---------------------------------------------------------------------------

def combinatorics(l: int, m: int) -> int:
    """|D(l)| = (l + m - 1)! / (l! (m - 1)!), the number of order-l
    multi-indices over m variables."""
    if l < 0 or m < 1:
        raise ValueError("need l >= 0 and m >= 1")
    return math.comb(l + m - 1, l)


def unknown_count(r: int, m: int) -> int:
    """N^(r): total unknowns of parity matching r up to order r."""
    if r < 0 or m < 1:
        raise ValueError("need r >= 0 and m >= 1")
    start = 0 if r % 2 == 0 else 1
    return sum(combinatorics(l, m) for l in range(start, r + 1, 2))


@lru_cache(maxsize=None)
def multi_indices(l: int, m: int) -> tuple[tuple[int, ...], ...]:
    """Order-l multi-indices over m variables, descending-lexicographic in
    the leading variable: for m = 2, l = 2 this is (2,0), (1,1), (0,2)."""
    if m == 1:
        return ((l,),)
    out = []
    for first in range(l, -1, -1):
        for rest in multi_indices(l - first, m - 1):
            out.append((first,) + rest)
    return tuple(out)


def unknown_multi_indices(r: int, m: int) -> tuple[tuple[int, ...], ...]:
    start = 0 if r % 2 == 0 else 1
    out = []
    for l in range(start, r + 1, 2):
        out.extend(multi_indices(l, m))
    return tuple(out)


@dataclass(frozen=True)
class DerivativeProblem:
    """Reconstruction setup: m variables, target order r, and one integer
    displacement vector per unknown."""

    m_vars: int
    order_r: int
    displacements: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        need = unknown_count(self.order_r, self.m_vars)
        if len(self.displacements) != need:
            raise ValueError(
                f"need N^({self.order_r}) = {need} displacements, "
                f"got {len(self.displacements)}"
            )
        for dvec in self.displacements:
            if len(dvec) != self.m_vars:
                raise ValueError("displacement dimension mismatch")


def displacement_matrix(problem: DerivativeProblem, dx: float) -> np.ndarray:
    """Monomial matrix M[d, u] = prod_i h_i^{u_i} with h = d * dx."""
    unknowns = unknown_multi_indices(problem.order_r, problem.m_vars)
    mat = np.empty((len(problem.displacements), len(unknowns)))
    for row, dvec in enumerate(problem.displacements):
        h = np.asarray(dvec, dtype=float) * dx
        for col, u in enumerate(unknowns):
            mat[row, col] = np.prod(h ** np.asarray(u))
    return mat


def _pair_product_from_probabilities(f: np.ndarray, dvec, model: MeasurementModel,
                                     stream: int) -> np.ndarray:
    """f(x) f(x - h)* assembled from the phi = 0 and phi = pi/2 circuit
    probabilities plus the marginals, for an encoded array f."""
    marg = model.realize(np.abs(f) ** 2, stream=8 * stream)
    shifted = f
    for axis, d in enumerate(dvec):
        shifted = np.roll(shifted, d, axis=axis)  # displace f by +h
    p = {}
    for idx, phi in enumerate((0.0, math.pi / 2.0)):
        b0 = 0.5 * (f + np.exp(1j * phi) * shifted)
        b1 = 0.5 * (f - np.exp(1j * phi) * shifted)
        if model.mode == "exact":
            p[phi] = np.abs(b0) ** 2
        else:
            joint = model.realize(
                np.concatenate([np.abs(b0).reshape(-1) ** 2,
                                np.abs(b1).reshape(-1) ** 2]),
                stream=8 * stream + 1 + idx)
            p[phi] = joint[: f.size].reshape(f.shape)
    marg_shift = marg
    for axis, d in enumerate(dvec):
        marg_shift = np.roll(marg_shift, d, axis=axis)  # P at x - h
    return (2.0 * (p[0.0] + 1j * p[math.pi / 2.0])
            - 0.5 * (1.0 + 1j) * (marg + marg_shift))


def finite_difference_combination(f: np.ndarray, dvec, r: int,
                                  model: MeasurementModel = EXACT,
                                  stream: int = 0) -> np.ndarray:
    """G^(r)(x, h) = [f(x) f(x+h)* + (-1)^r f(x) f(x-h)*] / 2 from circuit
    probabilities."""
    plus = _pair_product_from_probabilities(
        f, tuple(-d for d in dvec), model, stream=2 * stream)
    minus = _pair_product_from_probabilities(f, dvec, model, stream=2 * stream + 1)
    sign = 1.0 if r % 2 == 0 else -1.0
    return 0.5 * (plus + sign * minus)


def reconstruct_derivatives(problem: DerivativeProblem, f: np.ndarray, dx: float,
                            model: MeasurementModel = EXACT):
    """Solve the per-point linear system for all derivative distributions
    g^(l) with l <= r of parity matching r.

    ``f`` is the encoded normalized array over (N,)*m grid points.  Returns
    a dict keyed by multi-index tuple.
    """
    f = np.asarray(f, dtype=complex)
    if f.ndim != problem.m_vars:
        raise ValueError("encoded array dimensionality != m_vars")
    mat = displacement_matrix(problem, dx)
    if abs(np.linalg.det(mat)) < 1e-300:
        raise ValueError("displacement matrix is singular")
    g_stack = np.stack([
        finite_difference_combination(f, dvec, problem.order_r, model, stream=i)
        .reshape(-1)
        for i, dvec in enumerate(problem.displacements)
    ])
    solved = np.linalg.solve(mat, g_stack)
    unknowns = unknown_multi_indices(problem.order_r, problem.m_vars)
    return {u: solved[i].reshape(f.shape) for i, u in enumerate(unknowns)}
