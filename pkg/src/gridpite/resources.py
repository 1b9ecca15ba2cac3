"""Closed-form CNOT and subroutine-call counting for the step circuits.

Subroutine calls per step for a single particle in three dimensions come
from the circuit layouts directly and are tabulated exactly.  CNOT counts
use the standard conversions (singly controlled single-qubit gate = 2
CNOTs, doubly controlled = 6) applied to the phase-gate decompositions:

    c(QFT)    = n^2 + n/2
    c(U_kin)  = n (n - 1)          (n(n-1)/2 controlled phases)
    c(CU_kin) = 3 n^2 - n          (n singly + n(n-1)/2 doubly controlled)
    c(U_mag)  = 2 n^2              (n^2 controlled phases)

and the per-step totals

    c_TV  = c(U_pot) + c(CU_pot) + 6 c(QFT) + 2 c(U_kin) + 2 c(CU_kin)
            + 2 c(U_mag)                          = c(U_pot) + c(CU_pot) + 18 n^2 - n
    c_TVT = c(U_pot) + c(CU_pot) + 14 c(QFT) + 4 c(U_kin) + 4 c(CU_kin)
            + 6 c(U_mag)                          = c(U_pot) + c(CU_pot) + 42 n^2 - n.

For the harmonic scenario the potential phase is two kinetic-like factors,
c(U_pot) = 2 c(U_kin) and c(CU_pot) = 2 c(CU_kin), collapsing the totals to
26 n^2 - 5 n and 50 n^2 - 5 n.  For the double-well scenario the potential
evolution is three Gaussian-evolution blocks built from a squared-distance
unitary S, an adder, and an exponential phase gate, giving
c(U_pot) = 12 c(S) + 6 c(ADD) + 3 c(U_e); those block costs (and the
controlled exponential gate's) are pluggable inputs with no defaults.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .evolution import Splitting


@dataclass(frozen=True)
class CallCounts:
    """Calls of the major subroutines in one step; ``*_controlled`` are the
    controlled subsets of the totals."""

    qft: int
    u_kin: int
    u_kin_controlled: int
    u_mag: int
    u_pot: int
    u_pot_controlled: int


_CALL_TABLE = {
    # (splitting, magnetic): qft, u_kin (controlled), u_mag, u_pot (controlled)
    (Splitting.TV, False): CallCounts(6, 6, 3, 0, 2, 1),
    (Splitting.TVT, False): CallCounts(18, 12, 6, 0, 2, 1),
    (Splitting.TV, True): CallCounts(8, 6, 3, 2, 2, 1),
    (Splitting.TVT, True): CallCounts(20, 12, 6, 6, 2, 1),
}


def subroutine_calls(splitting: Splitting, magnetic: bool) -> CallCounts:
    """Subroutine calls in a single step for one particle in 3-D."""
    return _CALL_TABLE[(Splitting(splitting), bool(magnetic))]


@dataclass(frozen=True)
class CnotModel:
    """Qubits per axis plus the pluggable double-well block costs."""

    n: int
    c_squared_distance: int | None = None   # c(S)
    c_adder: int | None = None               # c(ADD)
    c_exp_phase: int | None = None            # c(U_e)
    c_exp_phase_controlled: int | None = None  # controlled U_e

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")


def c_qft(n: int) -> Fraction:
    return Fraction(n * n) + Fraction(n, 2)


def c_u_kin(n: int) -> int:
    return n * (n - 1)


def c_cu_kin(n: int) -> int:
    return 3 * n * n - n


def c_u_mag(n: int) -> int:
    return 2 * n * n


def step_base(n: int, splitting: Splitting) -> Fraction:
    """Per-step CNOTs excluding the potential blocks (2-D, magnetic)."""
    if Splitting(splitting) == Splitting.TV:
        return 6 * c_qft(n) + 2 * c_u_kin(n) + 2 * c_cu_kin(n) + 2 * c_u_mag(n)
    return 14 * c_qft(n) + 4 * c_u_kin(n) + 4 * c_cu_kin(n) + 6 * c_u_mag(n)


def step_base_collapsed(n: int, splitting: Splitting) -> int:
    """The same base in collapsed form: 18 n^2 - n (TV) or 42 n^2 - n (TVT)."""
    if Splitting(splitting) == Splitting.TV:
        return 18 * n * n - n
    return 42 * n * n - n


def cnot_counts(model: CnotModel, splitting: Splitting, scenario: str):
    """Per-step CNOT count: an integer for 'harmonic' (and for
    'double_well' once all block costs are supplied), or the base plus a
    symbolic potential term for 'symbolic'."""
    n = model.n
    base = step_base(n, splitting)
    if scenario == "harmonic":
        total = base + 2 * c_u_kin(n) + 2 * c_cu_kin(n)
        assert total.denominator == 1
        return int(total)
    if scenario == "double_well":
        needed = (model.c_squared_distance, model.c_adder, model.c_exp_phase,
                  model.c_exp_phase_controlled)
        if any(c is None for c in needed):
            raise ValueError(
                "double_well needs c(S), c(ADD), c(U_e) and the controlled "
                "exponential-phase cost"
            )
        c_s, c_add, c_ue, c_cue = needed
        c_upot = 12 * c_s + 6 * c_add + 3 * c_ue
        c_cupot = 12 * c_s + 6 * c_add + 3 * c_cue
        total = base + c_upot + c_cupot
        assert total.denominator == 1
        return int(total)
    if scenario == "symbolic":
        assert (base - step_base_collapsed(n, splitting)) == 0
        return f"c(U_pot) + c(CU_pot) + {step_base_collapsed(n, splitting)}"
    raise ValueError(f"unknown scenario {scenario!r}")
