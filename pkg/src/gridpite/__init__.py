"""Real-space qubit-grid simulator for probabilistic imaginary-time
eigensolvers of a charged particle under a uniform magnetic field.

The package provides the discretized cell and wavefunction encoding, the
centered Fourier machinery, matrix-free Hamiltonian application with an
exact-diagonalization oracle, Trotterized real-time evolution with
Landau-gauge magnetic phase gates, the probabilistic imaginary-time step
with schedules and trajectory recording, eigenstate filtration circuits,
measurement-based density and current extraction, and closed-form CNOT
resource counting, plus a config-driven CLI.
"""

from .errors import ConfigError, ConvergenceError, GridPiteError, NumericalFailure
from .evolution import (DensePropagator, PhaseGateElement, PhaseGateSequence,
                        SpectralPropagator, Splitting, TrotterPropagator,
                        apply_kinetic_phase, apply_magnetic_phase,
                        apply_potential_phase, emit_kinetic_phase_sequence,
                        emit_magnetic_phase_sequence, emit_phase_gate_sequence,
                        rte_step)
from .filtration import (FiltrationParams, FiltrationReport, apply_filtration,
                         filt1, filt2, optimal_dt, residual_weight_ratio,
                         tau_upper_bounds)
from .grid import (BranchState, EigenWeights, Grid, InitialStateSpec,
                   build_grid, eigenweights, init_state, parity_expectation)
from .hamiltonian import (EigenSet, GaugeSpec, HamiltonianSpec, PotentialSpec,
                          apply_hamiltonian_raw, dense_hamiltonian,
                          energy_expectation, evaluate_potential,
                          fock_darwin_levels, lowest_eigenpairs)
from .observables import (DerivativeProblem, MeasurementModel, OneElectronDM,
                          ScalarField, VectorField, combinatorics, density,
                          diamagnetic_current, divergence, one_electron_dm,
                          paramagnetic_current_measured,
                          paramagnetic_current_oracle, reconstruct_derivatives,
                          total_current, unknown_count)
from .pite import (PiteParams, PiteStepResult, Schedule, Trajectory,
                   pite_step, run_pite, tau_at_step)
from .resources import CallCounts, CnotModel, cnot_counts, subroutine_calls
from .spectral import AxisSelector, cqft_axis, shift_unitary
from .units import UNITS, UnitSystem

__version__ = "0.1.0"
