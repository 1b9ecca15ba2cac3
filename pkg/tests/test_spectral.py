"""Centered transform and cyclic shift contracts."""

import numpy as np
import pytest

from gridpite import BranchState, build_grid
from gridpite.spectral import (AxisSelector, cqft_axis, cqft_axis_raw,
                               shift_axis_raw, shift_unitary)

from conftest import random_state


class TestCqft:
    def test_roundtrip_identity(self):
        g = build_grid(4, 2, 10.0)
        psi = random_state(g.total_points, 1)
        st = BranchState(g, psi.copy())
        for axis in (0, 1):
            cqft_axis(st, AxisSelector(axis))
            cqft_axis(st, AxisSelector(axis), inverse=True)
        assert np.abs(st.amplitudes[0] - psi).max() < 1e-12

    def test_unitarity(self):
        g = build_grid(5, 1, 7.0)
        for seed in range(5):
            st = BranchState(g, random_state(g.total_points, seed))
            cqft_axis(st, AxisSelector(0))
            assert abs(st.total_norm() - 1.0) < 1e-12

    def test_position_state_flattens(self):
        g = build_grid(3, 1, 8.0)
        amps = np.zeros(8, dtype=complex)
        amps[5] = 1.0
        st = BranchState(g, amps)
        cqft_axis(st, AxisSelector(0))
        assert np.abs(np.abs(st.amplitudes[0]) - 1 / np.sqrt(8)).max() < 1e-12

    def test_momentum_eigenstate_maps_to_basis(self):
        # direct summation of the defining plane-wave sum at n = 3
        g = build_grid(3, 1, 7.0)
        n = g.n_points
        k = np.arange(n)
        for s in range(n):
            p = (s - n // 2) * g.dp
            mom = np.exp(1j * p * k * g.dx) / np.sqrt(n)
            out = cqft_axis_raw(mom, 0)
            expected = np.zeros(n)
            expected[s] = 1.0
            assert np.abs(out - expected).max() < 1e-12

    def test_kinetic_conjugation_identity(self):
        # forward transform, diagonal kinetic phase, inverse equals the
        # momentum-eigenstate phase multiplication
        g = build_grid(3, 1, 9.0)
        n = g.n_points
        dt, inv2m = 0.37, 1.83
        k = np.arange(n)
        for s in range(n):
            p = (s - n // 2) * g.dp
            mom = np.exp(1j * p * k * g.dx) / np.sqrt(n)
            work = cqft_axis_raw(mom, 0)
            work = work * np.exp(-1j * inv2m * g.centered_momenta() ** 2 * dt)
            work = cqft_axis_raw(work, 0, inverse=True)
            expected = np.exp(-1j * inv2m * p**2 * dt) * mom
            assert np.abs(work - expected).max() < 1e-12

    def test_representation_tags(self):
        g = build_grid(3, 2, 8.0)
        st = BranchState(g, random_state(g.total_points))
        cqft_axis(st, AxisSelector(0))
        with pytest.raises(ValueError):
            cqft_axis(st, AxisSelector(0))  # already in momentum
        with pytest.raises(ValueError):
            cqft_axis(st, AxisSelector(1), inverse=True)  # still in position


class TestShiftUnitary:
    def test_identity_cases(self):
        g = build_grid(4, 1, 5.0)
        psi = random_state(16, 2)
        for d in (0, 16, -16):
            st = BranchState(g, psi.copy())
            shift_unitary(st, AxisSelector(0), d)
            assert np.abs(st.amplitudes[0] - psi).max() < 1e-12

    def test_basis_relabeling(self):
        g = build_grid(4, 1, 5.0)
        amps = np.zeros(16, dtype=complex)
        amps[5] = 1.0
        st = BranchState(g, amps)
        shift_unitary(st, AxisSelector(0), 3)
        assert abs(st.amplitudes[0][8] - 1.0) < 1e-12

    def test_exhaustive_against_roll(self):
        g = build_grid(4, 1, 5.0)
        psi = random_state(16, 3)
        for d in range(-16, 17):
            out = shift_axis_raw(psi, 0, d)
            assert np.abs(out - np.roll(psi, d)).max() < 1e-12

    def test_two_dimensional_axis_selection(self):
        g = build_grid(3, 2, 6.0)
        psi = random_state(64, 4)
        st = BranchState(g, psi.copy())
        shift_unitary(st, AxisSelector(1), 2)  # shift along y
        ref = np.roll(psi.reshape(8, 8), 2, axis=0).reshape(-1)
        assert np.abs(st.amplitudes[0] - ref).max() < 1e-12

    def test_requires_position_representation(self):
        g = build_grid(3, 1, 6.0)
        st = BranchState(g, random_state(8))
        cqft_axis(st, AxisSelector(0))
        with pytest.raises(ValueError):
            shift_unitary(st, AxisSelector(0), 1)
