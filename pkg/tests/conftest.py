"""Shared fixtures: the production-size scenarios are diagonalized once per
session since the Lanczos runs dominate the suite's runtime."""

import numpy as np
import pytest

from gridpite import (GaugeSpec, HamiltonianSpec, PotentialSpec, build_grid,
                      dense_hamiltonian, lowest_eigenpairs)
from gridpite.presets import DOUBLE_WELL_A_NM

MASS = 0.067
OMEGA0 = 4.0


def harmonic_spec(n, b_tesla=5.0, length=120.0, dims=2, gauge_center=None):
    grid = build_grid(n, dims, length)
    if gauge_center is None:
        gauge_center = length / 2.0
    return HamiltonianSpec(grid, MASS, GaugeSpec(b_tesla, gauge_center),
                           PotentialSpec("harmonic", omega0=OMEGA0))


def double_well_spec(n=6, b_tesla=3.0, length=120.0):
    grid = build_grid(n, 2, length)
    pot = PotentialSpec("double_well", v0=-59.3, vp=41.51, a=DOUBLE_WELL_A_NM,
                        delta=24.48, delta_x=2.94, delta_y=24.48)
    return HamiltonianSpec(grid, MASS, GaugeSpec(b_tesla, length / 2.0), pot)


@pytest.fixture(scope="session")
def h3():
    """Small harmonic system (n=3, dims=2, B=3 T) with its dense matrix and
    full eigendecomposition: the exact oracle for contract tests."""
    spec = harmonic_spec(3, b_tesla=3.0, length=30.0)
    h = dense_hamiltonian(spec)
    evals, evecs = np.linalg.eigh(h)
    return spec, h, evals, evecs


@pytest.fixture(scope="session")
def harmonic6():
    spec = harmonic_spec(6)
    eig = lowest_eigenpairs(spec, 10)
    return spec, eig


@pytest.fixture(scope="session")
def dw6():
    spec = double_well_spec()
    eig = lowest_eigenpairs(spec, 32)
    return spec, eig


def random_state(total, seed=0):
    rng = np.random.default_rng(seed)
    psi = rng.standard_normal(total) + 1j * rng.standard_normal(total)
    return psi / np.linalg.norm(psi)
