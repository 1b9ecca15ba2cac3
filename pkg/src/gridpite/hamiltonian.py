"""Potentials, gauge, matrix-free Hamiltonian application, diagonalization.

The single-particle Hamiltonian is H = T + V with

    T = (1/2m) (p - (q/c) A(r))^2,   A(r) = (x - x_g) B e_y,

for a uniform field B along z in the (optionally shifted) Landau gauge.  On
the periodic grid the kinetic operator is represented through the
non-hermitian factor matrices Pi_nu with entries

    Pi[k, s] = (p_nu(s) - a_nu(r_k)) exp(i p_s . r_k),   a = (q/c) A,

giving T = (1/(2m N^dims)) sum_nu Pi_nu Pi_nu^dagger, which is applied
matrix-free with two centered-FFT passes per component.  The same matrices
evaluated explicitly provide an independent dense construction used as the
test oracle and as the diagonalization backend for small grids.

Eigenpairs come from a Lanczos iteration with full reorthogonalization on
the matrix-free operator, with deflation restarts to recover degenerate
copies, or from dense diagonalization when the grid is small.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConvergenceError
from .grid import Grid
from .spectral import cqft_axis_raw
from .units import UNITS

DEGENERACY_TOL_MEV = 1e-6  # eigenvalue clustering tolerance for grouping


@dataclass(frozen=True)
class GaugeSpec:
    """Uniform magnetic field B e_z in the shifted Landau gauge
    A = (x - x_g) B e_y."""

    field_strength: float         # tesla
    gauge_center: float = 0.0     # x_g in nm

    @property
    def mu(self) -> float:
        """(q/c) B for the electron in 1/nm^2 (signed)."""
        return UNITS.electron_charge_sign * UNITS.tesla_to_inv_len2 * self.field_strength


@dataclass(frozen=True)
class PotentialSpec:
    """External potential: harmonic, double_well, zero, or a value table.

    harmonic:    V = m omega0^2 (X^2 + Y^2) / 2 with X = x - L/2 etc.
    double_well: two Gaussian dots at X = -/+ a of depth v0 and width delta
                 plus a plunger barrier of height vp with widths
                 (delta_x, delta_y).
    """

    kind: str
    omega0: float = 0.0
    v0: float = 0.0
    vp: float = 0.0
    a: float = 0.0
    delta: float = 0.0
    delta_x: float = 0.0
    delta_y: float = 0.0
    table_values: np.ndarray | None = None


@dataclass(frozen=True)
class HamiltonianSpec:
    grid: Grid
    mass_ratio: float
    gauge: GaugeSpec
    potential: PotentialSpec

    def __post_init__(self):
        if not (self.mass_ratio > 0):
            raise ValueError("mass_ratio must be positive")
        if self.gauge.mu != 0.0 and self.grid.dims < 2:
            raise ValueError("a magnetic field requires dims >= 2")

    @property
    def inv_two_mass(self) -> float:
        """1/(2m) in meV nm^2."""
        return UNITS.kinetic_coeff / self.mass_ratio


def _centered_axes(grid: Grid) -> list[np.ndarray]:
    """Per-dimension meshes of X = x - L/2 etc., shaped (N,)*dims with the
    x axis last; returned in logical order (X, Y, Z)."""
    c = grid.coordinates() - grid.box_len / 2.0
    mesh = np.meshgrid(*([c] * grid.dims), indexing="ij")  # (Z, Y, X) order
    return mesh[::-1]


def evaluate_potential(spec: HamiltonianSpec) -> np.ndarray:
    """Potential values at every grid point, flat (N**dims,)."""
    grid = spec.grid
    pot = spec.potential
    if pot.kind == "zero":
        return np.zeros(grid.total_points)
    if pot.kind == "table":
        values = np.asarray(pot.table_values, dtype=float)
        if values.size != grid.total_points:
            raise ValueError(
                f"table has {values.size} entries, grid has {grid.total_points}"
            )
        return values.reshape(-1)
    axes = _centered_axes(grid)
    r2 = sum(m**2 for m in axes)
    if pot.kind == "harmonic":
        m_eff = spec.mass_ratio / (2.0 * UNITS.kinetic_coeff)  # m in meV^-1 nm^-2
        return (0.5 * m_eff * pot.omega0**2 * r2).reshape(-1)
    if pot.kind == "double_well":
        if grid.dims < 2:
            raise ValueError("double_well potential is two-dimensional")
        x, y = axes[0], axes[1]
        perp2 = r2 - x**2 - y**2  # zero for dims = 2
        v = pot.v0 * np.exp(-((x + pot.a) ** 2 + y**2 + perp2) / pot.delta**2)
        v += pot.v0 * np.exp(-((x - pot.a) ** 2 + y**2 + perp2) / pot.delta**2)
        v += pot.vp * np.exp(-(x**2) / pot.delta_x**2 - (y**2 + perp2) / pot.delta_y**2)
        return v.reshape(-1)
    raise ValueError(f"unknown potential kind {pot.kind!r}")


def _gauge_momentum_offset(spec: HamiltonianSpec) -> np.ndarray:
    """(q/c) A_y = mu (x - x_g) as a function of the x coordinate, (N,)."""
    return spec.gauge.mu * (spec.grid.coordinates() - spec.gauge.gauge_center)


def apply_hamiltonian_raw(vec: np.ndarray, spec: HamiltonianSpec) -> np.ndarray:
    """(T + V) applied to amplitudes of shape (..., N**dims), matrix-free.

    Per kinetic component: w = p F(psi) - F(a psi) followed by
    F^-1(p w) - a F^-1(w), with F the centered transform along that axis and
    a the gauge momentum offset (nonzero only for the y component).
    """
    grid = spec.grid
    n, d = grid.n_points, grid.dims
    vec = np.asarray(vec, dtype=complex)
    arr = vec.reshape(vec.shape[:-1] + (n,) * d)
    p_axis = grid.centered_momenta()
    out = np.zeros_like(arr)
    mu = spec.gauge.mu
    for axis in range(d):
        np_axis = arr.ndim - 1 - axis
        p = p_axis.reshape([n if ax == np_axis else 1 for ax in range(arr.ndim)])
        f_psi = cqft_axis_raw(arr, np_axis)
        if axis == 1 and mu != 0.0:
            x_np_axis = arr.ndim - 1  # offset varies along x
            a = _gauge_momentum_offset(spec).reshape(
                [n if ax == x_np_axis else 1 for ax in range(arr.ndim)]
            )
            w = p * f_psi - cqft_axis_raw(a * arr, np_axis)
            out += cqft_axis_raw(p * w, np_axis, inverse=True)
            out -= a * cqft_axis_raw(w, np_axis, inverse=True)
        else:
            out += cqft_axis_raw(p**2 * f_psi, np_axis, inverse=True)
    out *= spec.inv_two_mass
    v = evaluate_potential(spec).reshape((n,) * d)
    out += v * arr
    return out.reshape(vec.shape)


def energy_expectation(psi: np.ndarray, spec: HamiltonianSpec) -> float:
    """<psi|H|psi> for a flat normalized amplitude vector."""
    return float(np.vdot(psi, apply_hamiltonian_raw(psi, spec)).real)


def _axis_broadcast(values: np.ndarray, axis: int, dims: int) -> np.ndarray:
    """Broadcast per-axis values over the full register, flat (N**dims,)."""
    n = values.shape[0]
    shape = [1] * dims
    shape[dims - 1 - axis] = n
    return np.broadcast_to(values.reshape(shape), (n,) * dims).reshape(-1)


def dense_hamiltonian(spec: HamiltonianSpec) -> np.ndarray:
    """Hermitian matrix of H built directly from the factor matrices.

    Independent of the FFT path: the plane-wave matrix E[k, s] =
    exp(i p_s . r_k) is formed explicitly.  Guarded to N**dims <= 4096.
    """
    grid = spec.grid
    total = grid.total_points
    if total > 4096:
        raise ValueError(f"dense Hamiltonian guarded to 4096 points, got {total}")
    d = grid.dims
    coords = [_axis_broadcast(grid.coordinates(), ax, d) for ax in range(d)]
    moms = [_axis_broadcast(grid.centered_momenta(), ax, d) for ax in range(d)]
    phase = np.zeros((total, total))
    for ax in range(d):
        phase += coords[ax][:, None] * moms[ax][None, :]
    e_mat = np.exp(1j * phase)
    h = np.zeros((total, total), dtype=complex)
    mu = spec.gauge.mu
    for ax in range(d):
        pi = e_mat * moms[ax][None, :]
        if ax == 1 and mu != 0.0:
            offset = spec.gauge.mu * (coords[0] - spec.gauge.gauge_center)
            pi = pi - offset[:, None] * e_mat
        h += pi @ pi.conj().T
    h *= spec.inv_two_mass / total
    h[np.diag_indices(total)] += evaluate_potential(spec)
    return h


def group_degenerate(eigenvalues: np.ndarray,
                     tol: float = DEGENERACY_TOL_MEV) -> tuple[tuple[int, ...], ...]:
    """Partition ascending eigenvalues into clusters of spacing < tol."""
    groups: list[list[int]] = []
    for i, e in enumerate(eigenvalues):
        if groups and e - eigenvalues[groups[-1][-1]] < tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return tuple(tuple(g) for g in groups)


@dataclass(frozen=True)
class EigenSet:
    """Sorted lowest eigenpairs with verified residuals and degeneracy
    grouping.  Eigenvectors are rows, orthonormal, with a deterministic
    phase (largest-magnitude component real positive)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray
    degeneracy_groups: tuple[tuple[int, ...], ...]
    grid: Grid | None = None

    def __len__(self) -> int:
        return len(self.eigenvalues)


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    out = vecs.copy()
    for i in range(out.shape[0]):
        j = int(np.argmax(np.abs(out[i])))
        ph = out[i, j] / abs(out[i, j])
        out[i] /= ph
    return out


def _residuals(apply_h: Callable[[np.ndarray], np.ndarray],
               vals: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    res = np.empty(len(vals))
    for i in range(len(vals)):
        res[i] = np.linalg.norm(apply_h(vecs[i]) - vals[i] * vecs[i])
    return res


def _lanczos_run(apply_h, dim, deflate, rng, tol, max_iter, n_wanted, start=None):
    """One deflated Lanczos sweep with full reorthogonalization.

    Returns (pairs, carry): the converged (value, vector, residual) pairs
    found in this Krylov space, and the lowest unconverged Ritz pair
    (value, vector) to warm-start the next sweep, or None.
    """
    q = start if start is not None else (
        rng.standard_normal(dim) + 1j * rng.standard_normal(dim))
    q = np.asarray(q, dtype=complex)
    if deflate is not None and len(deflate):
        q -= deflate.T @ (deflate.conj() @ q)
    nq = np.linalg.norm(q)
    if nq < 1e-12:
        return [], None
    q = q / nq

    basis = np.empty((max_iter, dim), dtype=complex)
    alphas: list[float] = []
    betas: list[float] = []
    k = 0
    while k < max_iter:
        basis[k] = q
        w = apply_h(q)
        alpha = float(np.vdot(q, w).real)
        alphas.append(alpha)
        w -= alpha * q
        if k > 0:
            w -= betas[-1] * basis[k - 1]
        # full reorthogonalization against the Krylov basis and the
        # deflation space, twice for roundoff safety
        for _ in range(2):
            w -= basis[: k + 1].T @ (basis[: k + 1].conj() @ w)
            if deflate is not None and len(deflate):
                w -= deflate.T @ (deflate.conj() @ w)
        beta = float(np.linalg.norm(w))
        k += 1
        if beta < 1e-13:
            break  # invariant subspace exhausted
        betas.append(beta)
        q = w / beta
        if k % 10 == 0 and k >= n_wanted + 2:
            t = np.diag(alphas) + np.diag(betas[: k - 1], 1) + np.diag(betas[: k - 1], -1)
            theta, y = np.linalg.eigh(t)
            bounds = abs(betas[-1]) * np.abs(y[-1, :])
            ok = bounds[:n_wanted] <= 0.1 * tol * np.maximum(1.0, np.abs(theta[:n_wanted]))
            if np.all(ok):
                break

    t = np.diag(alphas)
    if len(betas) >= k:
        betas = betas[: k - 1]
    if k > 1:
        t += np.diag(betas[: k - 1], 1) + np.diag(betas[: k - 1], -1)
    theta, y = np.linalg.eigh(t)
    pairs = []
    carry = None
    for i in range(min(k, n_wanted + 4)):
        v = (y[:, i][None, :] @ basis[:k]).reshape(-1)
        nv = np.linalg.norm(v)
        if nv < 1e-12:
            continue
        v /= nv
        res = np.linalg.norm(apply_h(v) - theta[i] * v)
        if res <= tol * max(1.0, abs(theta[i])):
            pairs.append((float(theta[i]), v, float(res)))
        elif carry is None:
            carry = (float(theta[i]), v)
    return pairs, carry


def lowest_eigenpairs(spec: HamiltonianSpec, count: int, *, seed: int = 7,
                      tol: float = 1e-8, max_iter: int = 500,
                      max_restarts: int = 40) -> EigenSet:
    """Lowest ``count`` eigenpairs of H (dense below 1025 points, Lanczos
    with deflation restarts above).

    Restarts continue until a fresh deflated sweep adds nothing below the
    current count-th eigenvalue, so degenerate copies are recovered.
    """
    if not (1 <= count <= 32):
        raise ValueError("count must be in [1, 32]")
    grid = spec.grid
    total = grid.total_points
    if count > total:
        raise ValueError("count exceeds the Hilbert-space dimension")

    if total <= 1024:
        h = dense_hamiltonian(spec)
        vals_all, vecs_all = np.linalg.eigh(h)
        vals = vals_all[:count].copy()
        vecs = _fix_phases(vecs_all[:, :count].T.copy())
        res = _residuals(lambda v: h @ v, vals, vecs)
    else:
        apply_h = lambda v: apply_hamiltonian_raw(v, spec)
        rng = np.random.default_rng(seed)
        pool_vals: list[float] = []
        pool_vecs: list[np.ndarray] = []
        pool_res: list[float] = []
        start = None
        stalls = 0
        for _ in range(max_restarts):
            deflate = np.array(pool_vecs) if pool_vecs else None
            pairs, carry = _lanczos_run(
                apply_h, total, deflate, rng, tol, max_iter,
                n_wanted=count - min(len(pool_vals), count) + 1, start=start)
            for val, vec, r in pairs:
                pool_vals.append(val)
                pool_vecs.append(vec)
                pool_res.append(r)
            # warm-start the next sweep from the lowest unconverged Ritz
            # vector; fall back to a fresh random vector after repeated
            # sweeps without any new converged pair
            stalls = 0 if pairs else stalls + 1
            start = carry[1] if carry is not None and stalls < 4 else None
            if stalls >= 6:
                break
            if len(pool_vals) >= count:
                kth = np.sort(pool_vals)[count - 1]
                floor_new = min(
                    [p[0] for p in pairs] + ([carry[0]] if carry else []),
                    default=np.inf,
                )
                if floor_new > kth + DEGENERACY_TOL_MEV:
                    break
        if len(pool_vals) < count:
            raise ConvergenceError(
                f"Lanczos converged only {len(pool_vals)} of {count} pairs",
                residuals=np.array(pool_res),
            )
        order = np.argsort(pool_vals)[:count]
        vals = np.array([pool_vals[i] for i in order])
        vecs = _fix_phases(np.array([pool_vecs[i] for i in order]))
        res = _residuals(apply_h, vals, vecs)

    bad = res > tol * np.maximum(1.0, np.abs(vals))
    if np.any(bad):
        raise ConvergenceError(
            f"eigenpairs {np.nonzero(bad)[0].tolist()} exceed the residual tolerance",
            residuals=res,
        )
    return EigenSet(
        eigenvalues=vals,
        eigenvectors=vecs,
        residuals=res,
        degeneracy_groups=group_degenerate(vals),
        grid=grid,
    )


def fock_darwin_levels(omega0: float, b_tesla: float, mass_ratio: float,
                       count: int) -> np.ndarray:
    """Analytic levels (n1 + 1) Omega - l omega_c / 2 of a 2-D harmonic trap
    in a perpendicular field, ascending.

    Omega = sqrt(omega0^2 + omega_c^2 / 4); the angular quantum number l
    runs over even values for even n1 and odd values for odd n1 with
    |l| <= n1.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    omega_c = UNITS.cyclotron_energy(b_tesla, mass_ratio)
    big_omega = float(np.hypot(omega0, omega_c / 2.0))
    levels: list[float] = []
    n1 = 0
    cap = 4 * count + 8  # enumeration cap for the flat Landau-level limit
    while n1 <= cap:
        floor = (n1 + 1) * big_omega - n1 * omega_c / 2.0
        if len(levels) >= count and floor > sorted(levels)[count - 1]:
            break
        for l in range(-n1, n1 + 1, 2):
            levels.append((n1 + 1) * big_omega - l * omega_c / 2.0)
        n1 += 1
    return np.sort(levels)[:count]
