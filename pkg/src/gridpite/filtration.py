"""Probabilistic filtration circuits that remove one energy eigenstate.

First order (one ancilla): for a target elimination energy lambda and time
step dt_f, the pre-measurement branches are

    success = (exp(-i lambda dt_f / 2) - exp(i (lambda/2 - H) dt_f)) / 2 |psi>
    failure = (exp(-i lambda dt_f / 2) + exp(i (lambda/2 - H) dt_f)) / 2 |psi>,

so an eigenstate at exactly lambda vanishes from the success branch.  On the
eigenbasis the success amplitude of |phi_k> is
i c_k exp(-i E_k dt_f / 2) sin((E_k - lambda) dt_f / 2).

Second order (two ancillae q1 q0): the success branch (outcome |1> x |0>)
is sin^2((H - lambda) dt_f / 2) |psi>, with cos^2 on |00> and
+/- (i/2) sin((H - lambda) dt_f) split across |01> / |11>, making the
residual amplitude of the filtered state quadratic in an energy error
instead of linear.

The natural time step paired with an estimated gap is dt_1 = pi / (E1 - E0),
which maximizes the kept state's sin^2 factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .evolution import default_propagator
from .grid import BranchState, eigenweights
from .hamiltonian import EigenSet, HamiltonianSpec


@dataclass(frozen=True)
class FiltrationParams:
    """Target elimination energy, time step, and circuit order."""

    lam: float
    dt_f: float
    order: int = 1

    def __post_init__(self):
        if not (self.dt_f != 0.0):
            raise ValueError("dt_f must be nonzero")
        if self.order not in (1, 2):
            raise ValueError("order must be 1 or 2")


@dataclass(frozen=True)
class FiltrationReport:
    success_state: BranchState | None
    p_success: float
    eigenweights_before: np.ndarray
    eigenweights_after: np.ndarray
    branch_norms: tuple[float, ...]


def optimal_dt(e1_est: float, e0_est: float) -> float:
    """pi over the estimated gap; the step that maximizes the kept weight."""
    gap = e1_est - e0_est
    if not (gap > 0):
        raise ValueError(f"estimated gap must be positive, got {gap}")
    return math.pi / gap


def filt1_branches(psi: np.ndarray, lam: float, dt_f: float, propagator):
    u = propagator.apply(psi, dt_f)
    a = np.exp(-0.5j * lam * dt_f)
    b = np.exp(+0.5j * lam * dt_f)
    success = 0.5 * (a * psi - b * u)
    failure = 0.5 * (a * psi + b * u)
    return success, failure


def filt2_branches(psi: np.ndarray, lam: float, dt_f: float, propagator):
    """Branches on (q1, q0) = (0,0), (1,0), (0,1), (1,1)."""
    u = propagator.apply(psi, dt_f)
    v = propagator.apply(psi, dt_f, adjoint=True)
    eu = np.exp(+1j * lam * dt_f) * u
    ev = np.exp(-1j * lam * dt_f) * v
    b00 = 0.25 * (2.0 * psi + ev + eu)
    b10 = 0.25 * (2.0 * psi - ev - eu)
    b01 = 0.25 * (ev - eu)
    b11 = -b01
    return b00, b10, b01, b11


def _report(state: BranchState, success: np.ndarray, p: float,
            branch_norms, eig: EigenSet | None) -> FiltrationReport:
    before = (eigenweights(state, eig).individual if eig is not None
              else np.array([]))
    if p <= 0.0 or not np.isfinite(p):
        return FiltrationReport(None, max(p, 0.0), before, np.array([]),
                                tuple(branch_norms))
    out = BranchState(state.grid, success / math.sqrt(p), state.n_particles)
    after = (eigenweights(out, eig).individual if eig is not None
             else np.array([]))
    return FiltrationReport(out, p, before, after, tuple(branch_norms))


def filt1(state: BranchState, spec: HamiltonianSpec, params: FiltrationParams,
          propagator=None, eig: EigenSet | None = None) -> FiltrationReport:
    """First-order filtration; success_state is None when the success branch
    has (numerically) zero norm."""
    psi = state.single_branch()
    if propagator is None:
        propagator = default_propagator(spec)
    success, failure = filt1_branches(psi, params.lam, params.dt_f, propagator)
    p = float(np.linalg.norm(success) ** 2)
    norms = (p, float(np.linalg.norm(failure) ** 2))
    return _report(state, success, p if p > 1e-24 else 0.0, norms, eig)


def filt2(state: BranchState, spec: HamiltonianSpec, params: FiltrationParams,
          propagator=None, eig: EigenSet | None = None) -> FiltrationReport:
    """Second-order filtration (success branch |1> x |0>)."""
    psi = state.single_branch()
    if propagator is None:
        propagator = default_propagator(spec)
    b00, b10, b01, b11 = filt2_branches(psi, params.lam, params.dt_f, propagator)
    p = float(np.linalg.norm(b10) ** 2)
    norms = tuple(float(np.linalg.norm(b) ** 2) for b in (b00, b10, b01, b11))
    return _report(state, b10, p if p > 1e-24 else 0.0, norms, eig)


def apply_filtration(state: BranchState, spec: HamiltonianSpec,
                     params: FiltrationParams, propagator=None,
                     eig: EigenSet | None = None) -> FiltrationReport:
    fn = filt1 if params.order == 1 else filt2
    return fn(state, spec, params, propagator=propagator, eig=eig)


def residual_weight_ratio(c0: complex, c1: complex, de0_rel: float,
                          de1_rel: float) -> float:
    """Ground-to-first-excited weight ratio left by first-order filtration
    at dt_1, as a function of the relative energy errors
    de_k = deltaE_k / (E1 - E0)."""
    if c1 == 0:
        raise ValueError("c1 must be nonzero")
    denom_scale = 1.0 + de1_rel - de0_rel
    num = math.sin(math.pi * de0_rel / (2.0 * denom_scale)) ** 2
    den = math.cos(math.pi * de1_rel / (2.0 * denom_scale)) ** 2
    if den < 1e-300:
        return math.inf
    return abs(c0 / c1) ** 2 * num / den


@dataclass(frozen=True)
class TauUpperBounds:
    exact_ub1: float
    approx_ub1: float
    approx_ub2: float


def tau_upper_bounds(c0: complex, c1: complex, de0_rel: float, de1_rel: float,
                     eps: float, gap: float) -> TauUpperBounds:
    """Imaginary-time budgets keeping the filtered state's relative weight
    below eps: the exact first-order bound and the small-error
    approximations for both orders.  Zero energy error gives an infinite
    budget."""
    if not (0.0 < eps < 1.0):
        raise ValueError("eps must lie in (0, 1)")
    if not (gap > 0):
        raise ValueError("gap must be positive")
    if c0 == 0 or c1 == 0:
        raise ValueError("c0 and c1 must be nonzero")
    ratio = abs(c1 / c0)
    denom_scale = 1.0 + de1_rel - de0_rel
    sin0 = math.sin(math.pi * de0_rel / (2.0 * denom_scale))
    cos1 = math.cos(math.pi * de1_rel / (2.0 * denom_scale))
    if cos1 <= 0.0:
        raise ValueError("cos factor in the exact bound is not positive")
    if sin0 == 0.0:
        exact = math.inf
    else:
        exact = (math.log(eps) + 2.0 * math.log(ratio)
                 + 2.0 * math.log(abs(cos1 / sin0))) / gap
    if de0_rel == 0.0:
        return TauUpperBounds(exact, math.inf, math.inf)
    a1 = (math.log(4.0 * eps / math.pi**2) + 2.0 * math.log(ratio)
          + 2.0 * math.log(1.0 / abs(de0_rel))) / gap
    a2 = (math.log(16.0 * eps / math.pi**4) + 2.0 * math.log(ratio)
          + 4.0 * math.log(1.0 / abs(de0_rel))) / gap
    return TauUpperBounds(exact, a1, a2)
