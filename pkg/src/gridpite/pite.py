"""Probabilistic imaginary-time step, time-step schedules, trajectory driver.

A single step uses one ancilla to realize m0 exp(-H dtau) on the success
branch.  With theta0 = arccos(m0) and the renormalized real-time step
dt = s1 dtau, s1 = m0 / sqrt(1 - m0^2), the pre-measurement branches for a
real-time propagator U are

    amp0 = (exp(-i theta0) U + exp(+i theta0) U^dag) / 2 |psi>
    amp1 = -i (exp(-i theta0) U - exp(+i theta0) U^dag) / 2 |psi>,

so that amp0 = cos(H dt + theta0)|psi> when U = exp(-i H dt), which equals
m0 exp(-H dtau)|psi> up to O(dtau^2).  Post-selection is deterministic: the
driver always follows the success branch and records the probabilities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import NumericalFailure
from .evolution import Splitting, TrotterPropagator
from .grid import BranchState, eigenweights, parity_expectation
from .hamiltonian import EigenSet, HamiltonianSpec, energy_expectation

SUCCESS_PROBABILITY_FLOOR = 1e-12


@dataclass(frozen=True)
class PiteParams:
    """Step parameters: m0 in (0, 1), the Trotter splitting, and the energy
    reference of the real-time phases.

    ``energy_shift`` replaces H by H - energy_shift inside the step (a
    global phase on the controlled evolution).  Convergence requires the
    occupied spectrum to sit in the decreasing window of
    cos((E - energy_shift) dt + theta0), so scenario presets set it to the
    estimated ground-state energy; an eigenstate at the shift energy then
    succeeds with probability exactly m0^2.
    """

    m0: float
    splitting: Splitting = Splitting.TVT
    energy_shift: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.m0 < 1.0):
            raise ValueError("m0 must lie strictly between 0 and 1")

    @property
    def theta0(self) -> float:
        return math.acos(self.m0)

    @property
    def s1(self) -> float:
        return self.m0 / math.sqrt(1.0 - self.m0**2)


@dataclass(frozen=True)
class Schedule:
    """Constant or saturating-ramp imaginary-time step sequence."""

    kind: str
    dtau: float = 0.0
    dtau_min: float = 0.0
    dtau_max: float = 0.0
    kappa: float = 1.0

    def __post_init__(self):
        if self.kind == "constant":
            if not (self.dtau > 0):
                raise ValueError("constant schedule requires dtau > 0")
        elif self.kind == "ramp":
            if not (0 < self.dtau_min <= self.dtau_max):
                raise ValueError("ramp requires 0 < dtau_min <= dtau_max")
            if not (self.kappa > 0):
                raise ValueError("ramp requires kappa > 0")
        else:
            raise ValueError(f"unknown schedule kind {self.kind!r}")


def tau_at_step(schedule: Schedule, k: int) -> float:
    """Step width for the k-th step (k >= 0); the ramp saturates as
    (1 - exp(-k/kappa)) (dtau_max - dtau_min) + dtau_min."""
    if k < 0:
        raise ValueError("step index must be >= 0")
    if schedule.kind == "constant":
        return schedule.dtau
    return (1.0 - math.exp(-k / schedule.kappa)) * (
        schedule.dtau_max - schedule.dtau_min
    ) + schedule.dtau_min


def pite_branches(psi: np.ndarray, params: PiteParams, dtau: float,
                  propagator) -> tuple[np.ndarray, np.ndarray]:
    """Pre-measurement (success, failure) branch amplitudes for flat psi."""
    dt = params.s1 * dtau
    u = np.exp(+1j * params.energy_shift * dt) * propagator.apply(psi, dt)
    v = np.exp(-1j * params.energy_shift * dt) * propagator.apply(psi, dt, adjoint=True)
    fwd = np.exp(-1j * params.theta0)
    bwd = np.exp(+1j * params.theta0)
    amp0 = 0.5 * (fwd * u + bwd * v)
    amp1 = -0.5j * (fwd * u - bwd * v)
    return amp0, amp1


@dataclass(frozen=True)
class PiteStepResult:
    success_state: BranchState
    p_success: float


def pite_step(state: BranchState, spec: HamiltonianSpec, params: PiteParams,
              dtau: float, propagator=None) -> PiteStepResult:
    """One probabilistic imaginary-time step on a normalized single-branch
    state; returns the normalized success state and its probability."""
    psi = state.single_branch()
    if propagator is None:
        propagator = TrotterPropagator(spec, params.splitting)
    amp0, _ = pite_branches(psi, params, dtau, propagator)
    p0 = float(np.linalg.norm(amp0) ** 2)
    if p0 < SUCCESS_PROBABILITY_FLOOR:
        raise NumericalFailure(f"success probability {p0:.3e} below floor")
    success = BranchState(state.grid, amp0 / math.sqrt(p0), state.n_particles)
    return PiteStepResult(success_state=success, p_success=p0)


@dataclass(frozen=True)
class TrajectoryRow:
    step: int
    dtau: float
    p_success: float
    p_cumulative: float
    weights: np.ndarray          # on the lowest eigenstates, individually
    energy: float
    parity: float


@dataclass
class Trajectory:
    rows: list[TrajectoryRow] = field(default_factory=list)
    n_weights: int = 10

    def weight_series(self, index: int) -> np.ndarray:
        return np.array([r.weights[index] if index < len(r.weights) else np.nan
                         for r in self.rows])

    def csv_header(self) -> str:
        cols = ["step", "dtau", "p_success", "p_cumulative"]
        cols += [f"w{i}" for i in range(self.n_weights)]
        cols += ["energy_meV", "parity"]
        return ",".join(cols)

    def csv_lines(self) -> list[str]:
        lines = []
        for r in self.rows:
            w = [f"{r.weights[i]:.17g}" if i < len(r.weights) else "nan"
                 for i in range(self.n_weights)]
            lines.append(
                ",".join(
                    [str(r.step), f"{r.dtau:.17g}", f"{r.p_success:.17g}",
                     f"{r.p_cumulative:.17g}"]
                    + w
                    + [f"{r.energy:.17g}", f"{r.parity:.17g}"]
                )
            )
        return lines


def run_pite(initial: BranchState, spec: HamiltonianSpec, params: PiteParams,
             schedule: Schedule, n_steps: int, eig: EigenSet | None = None,
             propagator=None, record_parity: bool | None = None) -> Trajectory:
    """Iterate pite_step on the success branch, recording one row per
    executed step (state after the step).

    Raises NumericalFailure with the step index if a success branch
    collapses below the probability floor.
    """
    if n_steps < 0:
        raise ValueError("n_steps must be >= 0")
    if propagator is None:
        propagator = TrotterPropagator(spec, params.splitting)
    if record_parity is None:
        record_parity = spec.grid.dims == 2 and initial.n_particles == 1

    traj = Trajectory(n_weights=len(eig) if eig is not None else 10)
    state = initial.copy()
    cumulative = 1.0
    for k in range(n_steps):
        dtau = tau_at_step(schedule, k)
        try:
            result = pite_step(state, spec, params, dtau, propagator)
        except NumericalFailure as exc:
            raise NumericalFailure(f"PITE step {k}: {exc}") from exc
        state = result.success_state
        cumulative *= result.p_success
        psi = state.single_branch()
        weights = (eigenweights(state, eig).individual if eig is not None
                   else np.array([]))
        traj.rows.append(
            TrajectoryRow(
                step=k,
                dtau=dtau,
                p_success=result.p_success,
                p_cumulative=cumulative,
                weights=weights,
                energy=energy_expectation(psi, spec),
                parity=parity_expectation(state) if record_parity else float("nan"),
            )
        )
    return traj
