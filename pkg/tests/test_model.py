import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dmfpo import model
from dmfpo.core import gate_fidelity, is_hermitian
from dmfpo.exceptions import NoPeriodFound
from dmfpo.model import HamiltonianKind
from oracles import block_propagator, dm_hamiltonian, fidelity, taylor_expm

gammas = st.floats(0, 3, allow_nan=False)
taus = st.floats(-20, 20, allow_nan=False)


def test_hamiltonian_matches_oracle():
    for g in (0.0, 0.4, 1.0, 2.5):
        h = model.hamiltonian(HamiltonianKind.dm_xy(g))
        assert is_hermitian(h)
        assert np.allclose(h, dm_hamiltonian(g))


def test_primed_hamiltonian_is_rescaled():
    # gamma' (XX+YY) + (XY-YX) = gamma' H(1/gamma')
    g = 0.4
    hp = model.hamiltonian(HamiltonianKind.dm_xy_primed(g))
    assert np.allclose(hp, g * dm_hamiltonian(1 / g))


def test_spectrum_of_dm_xy():
    g = 0.75
    evals = np.linalg.eigvalsh(model.hamiltonian(HamiltonianKind.dm_xy(g)))
    r = 2 * math.sqrt(1 + g * g)
    assert np.allclose(evals, [-r, 0, 0, r])


@settings(max_examples=60, deadline=None)
@given(gammas, taus)
def test_propagator_matches_block_closed_form(g, t):
    u = model.propagator(HamiltonianKind.dm_xy(g), t)
    assert np.max(np.abs(u - block_propagator(g, t))) < 1e-10


def test_propagator_matches_series_oracle():
    for g, t in [(0.0, 1.0), (0.33, 2.2), (1.0, -0.7), (2.0, 0.3)]:
        u = model.propagator(HamiltonianKind.dm_xy(g), t)
        assert np.max(np.abs(u - taylor_expm(-1j * t * dm_hamiltonian(g)))) < 1e-10


def test_spin_units_divide_time_by_four():
    k = HamiltonianKind.dm_xy(0.3)
    assert np.allclose(model.propagator(k, 8.0, units="spin"), model.propagator(k, 2.0))
    with pytest.raises(ValueError):
        model.propagator(k, 1.0, units="hartree")


def test_dm_propagator_broadcasts():
    g = np.array([[0.0], [0.5], [2.0]])
    t = np.array([0.0, 1.0, 3.0])
    u = model.dm_propagator(g, t)
    assert u.shape == (3, 3, 4, 4)
    for i in range(3):
        for j in range(3):
            assert np.allclose(u[i, j], block_propagator(g[i, 0], t[j]))
    up = model.dm_propagator(0.5, 1.2, primed=True)
    assert np.allclose(up, model.propagator(HamiltonianKind.dm_xy_primed(0.5), 1.2))


def test_propagator_zero_time():
    assert np.allclose(model.propagator(HamiltonianKind.dm_xy(0.9), 0.0), np.eye(4))


def test_other_kinds():
    zz = model.hamiltonian(HamiltonianKind.zz(0.5))
    assert np.allclose(zz, 0.5 * np.diag([1, -1, -1, 1]))
    xyz = model.hamiltonian(HamiltonianKind.xyz(1.0))
    assert np.allclose(xyz, dm_hamiltonian(0.0) + np.diag([1, -1, -1, 1]))
    with pytest.raises(ValueError):
        HamiltonianKind("ising", 1.0)


def test_evolution_params_validation():
    model.EvolutionParams(0.5, -3.0)
    for bad in [(-0.1, 0.0), (math.nan, 0.0), (0.1, math.inf)]:
        with pytest.raises(ValueError):
            model.EvolutionParams(*bad)


def test_find_period_examples():
    assert abs(model.find_period(0.0) - math.pi) < 1e-6
    assert abs(model.find_period(1.0) - math.pi / math.sqrt(2)) < 1e-6


@pytest.mark.parametrize("g", [0.0, 0.1, 0.66, 1.0, 2.0, 3.0])
def test_find_period_closed_form(g):
    # eigenphases 0, +-2 sqrt(1+g^2) tau coincide mod 2 pi after pi / sqrt(1+g^2)
    assert abs(model.find_period(g) - math.pi / math.sqrt(1 + g * g)) < 1e-6


def test_find_period_units():
    assert abs(model.find_period(0.5, units="spin") - 4 * model.find_period(0.5)) < 1e-9


def test_find_period_bound():
    with pytest.raises(NoPeriodFound):
        model.find_period(0.0, bound=2.0)


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 2), taus)
def test_propagator_is_periodic(g, t):
    k = HamiltonianKind.dm_xy(g)
    p = model.find_period(g)
    f = fidelity(model.propagator(k, t + p), model.propagator(k, t))
    assert f >= 1 - 1e-8


def test_period_is_the_smallest():
    g = 0.5
    p = model.find_period(g)
    k = HamiltonianKind.dm_xy(g)
    grid = np.linspace(0.05, p - 0.05, 200)
    assert np.all(gate_fidelity(model.propagator(k, grid), np.eye(4)) < 1 - 1e-6)


def test_period_poly():
    p = model.PeriodPoly(1.0, -2.0, 3.0, 4.0)
    assert p(0.0) == 4.0
    assert model.period_fit_eval(p, 2.0) == 8 - 8 + 6 + 4
    assert model.REFERENCE_PERIOD_POLY(0.0) == 12.59
