"""Hamiltonian application, dense oracle, diagonalization, analytic levels."""

import numpy as np
import pytest

from gridpite import (GaugeSpec, HamiltonianSpec, PotentialSpec, UNITS,
                      apply_hamiltonian_raw, build_grid, dense_hamiltonian,
                      evaluate_potential, fock_darwin_levels, lowest_eigenpairs)

from conftest import MASS, OMEGA0, double_well_spec, harmonic_spec, random_state


class TestPotential:
    def test_harmonic_center_is_zero(self):
        spec = harmonic_spec(4)
        v = evaluate_potential(spec)
        n = spec.grid.n_points
        assert v[(n // 2) * n + n // 2] == pytest.approx(0.0, abs=1e-14)

    def test_double_well_center_value(self):
        # direct evaluation of the three-Gaussian form with the quoted
        # depth/width parameters and a = 2 nm fed through as-is
        grid = build_grid(6, 2, 120.0)
        pot = PotentialSpec("double_well", v0=-59.3, vp=41.51, a=2.0,
                            delta=24.48, delta_x=2.94, delta_y=24.48)
        spec = HamiltonianSpec(grid, MASS, GaugeSpec(0.0), pot)
        v = evaluate_potential(spec)
        n = grid.n_points
        center = v[(n // 2) * n + n // 2]
        oracle = 2 * (-59.3) * np.exp(-4.0 / 24.48**2) + 41.51
        assert center == pytest.approx(oracle, rel=1e-12)
        assert center == pytest.approx(-76.30, abs=0.01)

    def test_zero_potential(self):
        grid = build_grid(3, 2, 10.0)
        spec = HamiltonianSpec(grid, 1.0, GaugeSpec(0.0), PotentialSpec("zero"))
        assert np.all(evaluate_potential(spec) == 0.0)

    def test_table_size_mismatch(self):
        grid = build_grid(3, 2, 10.0)
        spec = HamiltonianSpec(grid, 1.0, GaugeSpec(0.0),
                               PotentialSpec("table", table_values=np.ones(7)))
        with pytest.raises(ValueError):
            evaluate_potential(spec)


class TestApplyHamiltonian:
    def test_momentum_eigenstate_kinetic_eigenvalue(self):
        grid = build_grid(3, 1, 9.0)
        spec = HamiltonianSpec(grid, MASS, GaugeSpec(0.0), PotentialSpec("zero"))
        n = grid.n_points
        k = np.arange(n)
        for s in range(n):
            p = (s - n // 2) * grid.dp
            mom = np.exp(1j * p * k * grid.dx) / np.sqrt(n)
            out = apply_hamiltonian_raw(mom, spec)
            e_kin = UNITS.kinetic_coeff / MASS * p**2
            assert np.abs(out - e_kin * mom).max() < 1e-12

    def test_hermiticity_inner_product(self, h3):
        spec, _, _, _ = h3
        total = spec.grid.total_points
        psi, phi = random_state(total, 1), random_state(total, 2)
        lhs = np.vdot(phi, apply_hamiltonian_raw(psi, spec))
        rhs = np.vdot(apply_hamiltonian_raw(phi, spec), psi)
        assert abs(lhs - rhs) < 1e-10

    @pytest.mark.parametrize("dims,b", [(1, 0.0), (2, 0.0), (2, 3.0)])
    def test_matrix_free_equals_dense(self, dims, b):
        grid = build_grid(3, dims, 30.0)
        spec = HamiltonianSpec(
            grid, MASS, GaugeSpec(b, 15.0),
            PotentialSpec("harmonic", omega0=OMEGA0))
        h = dense_hamiltonian(spec)
        for seed in range(20):
            v = random_state(grid.total_points, seed)
            assert np.abs(h @ v - apply_hamiltonian_raw(v, spec)).max() < 1e-10

    def test_batched_application(self, h3):
        spec, h, _, _ = h3
        batch = np.stack([random_state(64, s) for s in range(4)])
        out = apply_hamiltonian_raw(batch, spec)
        for i in range(4):
            assert np.abs(out[i] - h @ batch[i]).max() < 1e-10


class TestDenseHamiltonian:
    def test_hermitian(self):
        spec = double_well_spec(n=3)
        h = dense_hamiltonian(spec)
        assert np.abs(h - h.conj().T).max() < 1e-12

    def test_free_particle_spectral_form(self):
        # B = 0, V = 0 in one dimension: H = F^dag diag(E_kin) F with the
        # analysis matrix F[s, k] = exp(-i p_s x_k) / sqrt(N) built directly
        grid = build_grid(2, 1, 5.0)
        spec = HamiltonianSpec(grid, MASS, GaugeSpec(0.0), PotentialSpec("zero"))
        h = dense_hamiltonian(spec)
        n = grid.n_points
        f = np.exp(-1j * np.outer(grid.centered_momenta(),
                                  grid.coordinates())) / np.sqrt(n)
        e_kin = UNITS.kinetic_coeff / MASS * grid.centered_momenta() ** 2
        ref = f.conj().T @ np.diag(e_kin) @ f
        assert np.abs(h - ref).max() < 1e-12

    def test_trace_against_brute_force(self):
        # explicit triple loop over the factor-matrix definition at n = 2
        grid = build_grid(2, 2, 8.0)
        spec = HamiltonianSpec(grid, MASS, GaugeSpec(2.0, 4.0),
                               PotentialSpec("harmonic", omega0=OMEGA0))
        h = dense_hamiltonian(spec)
        n = grid.n_points
        total = grid.total_points
        coords = grid.coordinates()
        moms = grid.centered_momenta()
        mu = spec.gauge.mu
        acc = 0.0
        for ky in range(n):
            for kx in range(n):
                for sy in range(n):
                    for sx in range(n):
                        a_y = mu * (coords[kx] - spec.gauge.gauge_center)
                        acc += moms[sx] ** 2 + (moms[sy] - a_y) ** 2
        kinetic_trace = acc * spec.inv_two_mass / total
        v_trace = evaluate_potential(spec).sum()
        assert np.trace(h).real == pytest.approx(kinetic_trace + v_trace,
                                                 rel=1e-12)

    def test_memory_guard(self):
        grid = build_grid(7, 2, 10.0)
        spec = HamiltonianSpec(grid, 1.0, GaugeSpec(0.0), PotentialSpec("zero"))
        with pytest.raises(ValueError):
            dense_hamiltonian(spec)


class TestLowestEigenpairs:
    def test_harmonic_b0_ground_level(self):
        spec = harmonic_spec(5, b_tesla=0.0)
        eig = lowest_eigenpairs(spec, 3)
        assert eig.eigenvalues[0] == pytest.approx(OMEGA0, rel=0.01)
        # second level twofold degenerate at 2 omega0
        assert eig.eigenvalues[1] == pytest.approx(2 * OMEGA0, rel=0.01)
        assert eig.eigenvalues[2] == pytest.approx(2 * OMEGA0, rel=0.01)

    def test_harmonic_b5_ground_level(self, harmonic6):
        spec, eig = harmonic6
        omega_c = UNITS.cyclotron_energy(5.0, MASS)
        big_omega = np.hypot(OMEGA0, omega_c / 2)
        assert eig.eigenvalues[0] == pytest.approx(big_omega, rel=0.01)

    def test_residuals_and_orthonormality(self, harmonic6):
        _, eig = harmonic6
        assert np.all(eig.residuals <= 1e-8 * np.maximum(1.0,
                                                         np.abs(eig.eigenvalues)))
        gram = eig.eigenvectors.conj() @ eig.eigenvectors.T
        assert np.abs(gram - np.eye(len(eig))).max() < 1e-8

    def test_spectrum_convergence_with_grid_refinement(self):
        devs = []
        fd = fock_darwin_levels(OMEGA0, 5.0, MASS, 6)
        for n in (4, 5, 6):
            eig = lowest_eigenpairs(harmonic_spec(n), 6)
            devs.append(np.abs(eig.eigenvalues - fd).max() / fd.max())
        assert devs[0] > devs[1] > devs[2]

    def test_gauge_center_spectrum_invariance(self):
        eig_center = lowest_eigenpairs(harmonic_spec(5, gauge_center=60.0), 4)
        eig_zero = lowest_eigenpairs(harmonic_spec(5, gauge_center=0.0), 4)
        fd = fock_darwin_levels(OMEGA0, 5.0, MASS, 4)
        disc_error = np.abs(eig_center.eigenvalues - fd).max()
        shift_effect = np.abs(eig_center.eigenvalues - eig_zero.eigenvalues).max()
        assert shift_effect <= 2.0 * disc_error

    def test_count_guard(self, h3):
        spec, _, _, _ = h3
        with pytest.raises(ValueError):
            lowest_eigenpairs(spec, 33)


class TestFockDarwin:
    def test_b0_degeneracy_ladder(self):
        levels = fock_darwin_levels(OMEGA0, 0.0, MASS, 6)
        assert np.allclose(levels, [4.0, 8.0, 8.0, 12.0, 12.0, 12.0], atol=1e-12)

    def test_landau_limit(self):
        omega_c = UNITS.cyclotron_energy(5.0, MASS)
        levels = fock_darwin_levels(0.0, 5.0, MASS, 4)
        # all levels collapse onto the (k + 1/2) omega_c ladder
        ratios = levels / (omega_c / 2.0)
        assert np.abs(ratios - np.round(ratios)).max() < 1e-9
        assert levels[0] == pytest.approx(omega_c / 2.0, rel=1e-12)

    def test_b5_lowest_three(self):
        # full enumeration: the (n1, l) = (2, 2) level 3 Omega - omega_c
        # undercuts 2 Omega + omega_c / 2 at this field strength, as the
        # numerical diagonalization confirms
        omega_c = UNITS.cyclotron_energy(5.0, MASS)
        big_omega = np.hypot(OMEGA0, omega_c / 2.0)
        expected = np.sort([big_omega, 2 * big_omega - omega_c / 2.0,
                            3 * big_omega - omega_c])
        levels = fock_darwin_levels(OMEGA0, 5.0, MASS, 3)
        assert np.allclose(levels, expected, rtol=1e-12)
        assert np.allclose(levels, [5.887, 7.455, 9.022], atol=5e-3)

    def test_rejects_bad_count(self):
        with pytest.raises(ValueError):
            fock_darwin_levels(4.0, 1.0, MASS, 0)
