import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ringmes import ModelParams, construct_mes, lz_probability, mes_condition_mixed, mes_phases
from ringmes.analytic import winding_phase
from ringmes.errors import DomainError
from ringmes.fock import enumerate_basis, hop
from ringmes.measures import schmidt_number
from ringmes.model import build_hamiltonian, build_interaction, build_kinetic

PI = math.pi


@pytest.mark.parametrize(
    "L,m,phi",
    [(3, 3, PI / 2), (3, 2, PI / 6), (3, 1, 11 * PI / 6), (4, 2, 0.0)],
)
def test_mes_phases(L, m, phi):
    assert mes_phases(L, m) == pytest.approx(phi, abs=1e-15)


def test_mes_phases_keeps_full_ladder():
    vals = [mes_phases(3, m) for m in range(1, 7)]
    assert len(set(np.round(vals, 12))) == 6
    with pytest.raises(DomainError):
        mes_phases(2, 1)


@pytest.mark.parametrize("m", [3, 0])
def test_uniform_amplitudes(m):
    mes = construct_mes(enumerate_basis(3, 2), m)
    d = mes.d
    paired = mes.vector[np.arange(d) * d + np.arange(d)]
    assert np.allclose(paired, 1 / math.sqrt(6), atol=1e-15)


@pytest.mark.parametrize("L,N", [(3, 1), (3, 2), (4, 2), (5, 2)])
@pytest.mark.parametrize("m", range(0, 7))
def test_mes_state_invariants(L, N, m):
    b = enumerate_basis(L, N)
    mes = construct_mes(b, m)
    v = mes.vector
    d = b.dim
    assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-14)
    nz = np.flatnonzero(np.abs(v) > 0)
    assert len(nz) == d
    assert all(k // d == k % d for k in nz)
    assert np.allclose(np.abs(v[nz]), 1 / math.sqrt(d), atol=1e-15)
    assert mes.m == m % L
    # p recursion: moving a particle from site j+1 to j raises p by one
    for s in b:
        for j in range(L - 1):
            moved = hop(s, j + 1, j)
            if moved is not None:
                assert mes.phase_function(moved[0]) == mes.phase_function(s) + 1
    assert schmidt_number(v, d)[1] == pytest.approx(1.0, abs=1e-12)


def test_winding_phase_formula():
    assert winding_phase((2, 0, 0)) == -2
    assert winding_phase((0, 1, 1)) == -5


@pytest.mark.parametrize("L", [3, 4, 5])
@pytest.mark.parametrize("N", [1, 2])
def test_zero_energy_full_hamiltonian(L, N):
    for m in range(1, 2 * L + 1):
        p = ModelParams(L, N, C=1.0, U=0.7, V=0.7).with_phase(mes_phases(L, m))
        psi = construct_mes(p.basis, m).vector
        assert np.linalg.norm(build_hamiltonian(p) @ psi) < 1e-12
        assert np.linalg.norm(build_kinetic(p) @ psi) < 1e-12
        assert np.linalg.norm(build_interaction(p.basis, p.U, p.V) @ psi) < 1e-12


@pytest.mark.parametrize("m", range(1, 7))
@pytest.mark.parametrize("sign", [1.0, -1.0])
def test_condition_is_sharp(m, sign):
    p = ModelParams(3, 2, C=1.0).with_phase(mes_phases(3, m) + sign * 0.1)
    psi = construct_mes(p.basis, m).vector
    assert np.linalg.norm(build_kinetic(p) @ psi) > 0.1 * p.C


@pytest.mark.parametrize("delta", [0.1, 0.3, 0.7])
def test_mixed_phase_family(delta):
    p = ModelParams(3, 2, C=1.0, U=2.0, V=2.0, phi_a=PI / 2 + delta, phi_b=PI / 2 - delta)
    psi = construct_mes(p.basis, 3).vector
    assert np.linalg.norm(build_hamiltonian(p) @ psi) < 1e-12


def test_mes_condition_mixed():
    assert mes_condition_mixed(PI / 2, PI / 2, 3) == 3
    assert mes_condition_mixed(PI / 2 + 0.3, PI / 2 - 0.3, 3) == 3
    assert mes_condition_mixed(0.0, 0.0, 3) is None
    assert mes_condition_mixed(PI / 6 + 1e-10, PI / 6, 3) == 2
    assert mes_condition_mixed(PI / 6 + 1e-7, PI / 6, 3) is None


def test_lz_examples():
    assert lz_probability(0.0, 1.0, 0.1) == 1.0
    assert lz_probability(0.2, 1.0, 1e-9) < 1e-300
    # 2 pi (gap/2)^2 / (alpha slope) = ln 2
    gap, slope = 0.3, 2.0
    alpha = 2 * math.pi * (gap / 2) ** 2 / (slope * math.log(2))
    assert lz_probability(gap, slope, alpha) == pytest.approx(0.5, rel=1e-14)
    for bad in [(-0.1, 1.0, 0.1), (0.1, 0.0, 0.1), (0.1, 1.0, 0.0), (0.1, -1.0, 0.1)]:
        with pytest.raises(DomainError):
            lz_probability(*bad)


@settings(max_examples=100, deadline=None)
@given(
    st.floats(0.0, 2.0),
    st.floats(1e-3, 10.0),
    st.floats(1e-4, 1.0),
    st.floats(1e-4, 1.0),
)
def test_lz_monotone_in_alpha(gap, slope, a1, a2):
    lo, hi = sorted((a1, a2))
    p_lo, p_hi = lz_probability(gap, slope, lo), lz_probability(gap, slope, hi)
    assert 0.0 <= p_lo <= p_hi <= 1.0
