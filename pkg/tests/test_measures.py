import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ringmes import ModelParams, construct_mes, current_expectation, fidelity, reduce_to_A, reduce_to_B, schmidt_number
from ringmes.fock import enumerate_basis
from ringmes.measures import entanglement_entropy, schmidt_coefficients
from ringmes.model import build_hamiltonian, build_kinetic_single

D = 6


def product(a, b, d=D):
    v = np.zeros(d * d, complex)
    v[a * d + b] = 1.0
    return v


def state_from_seed(seed, d=D):
    r = np.random.default_rng(seed)
    v = r.normal(size=d * d) + 1j * r.normal(size=d * d)
    return v / np.linalg.norm(v)


def test_product_state():
    rho = reduce_to_B(product(2, 4)).matrix
    expected = np.zeros((D, D))
    expected[4, 4] = 1.0
    assert np.array_equal(rho, expected)
    assert schmidt_number(product(2, 4), D) == (1.0, 0.0)


def test_mes_reduced_is_maximally_mixed():
    mes = construct_mes(enumerate_basis(3, 2), 2).vector
    assert np.allclose(reduce_to_B(mes).matrix, np.eye(D) / D, atol=1e-15)
    K0, K = schmidt_number(mes, D)
    assert K0 == pytest.approx(6.0, abs=1e-12) and K == pytest.approx(1.0, abs=1e-12)


def test_two_term_schmidt_state():
    v = (product(0, 0) + product(1, 1)) / math.sqrt(2)
    assert reduce_to_B(v).purity() == pytest.approx(0.5, abs=1e-15)
    K0, K = schmidt_number(v, D)
    assert K0 == pytest.approx(2.0) and K == pytest.approx(0.2)


def test_reduce_by_formula(rng):
    psi = state_from_seed(7)
    rho = reduce_to_B(psi, D).matrix
    for q in range(D):
        for qq in range(D):
            ref = sum(psi[p * D + q] * np.conj(psi[p * D + qq]) for p in range(D))
            assert rho[q, qq] == pytest.approx(ref, abs=1e-15)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        reduce_to_B(np.ones(35) / math.sqrt(35), 6)
    with pytest.raises(ValueError):
        fidelity(np.ones(4), np.ones(5))


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 3, 6, 10]))
def test_partial_trace_fuzz(seed, d):
    psi = state_from_seed(seed, d)
    rho = reduce_to_B(psi, d)
    rho.check()
    assert rho.trace() == pytest.approx(1.0, abs=1e-12)
    assert rho.eigenvalues().min() >= -1e-12
    K0_b = 1 / rho.purity()
    K0_a = 1 / reduce_to_A(psi, d).purity()
    assert abs(K0_a - K0_b) < 1e-10
    assert 1.0 - 1e-12 <= K0_b <= d + 1e-12


def test_partial_trace_bulk(rng):
    # 10^4 random states, vectorised
    psi = rng.normal(size=(10_000, D * D)) + 1j * rng.normal(size=(10_000, D * D))
    psi /= np.linalg.norm(psi, axis=1, keepdims=True)
    for v in psi[::997]:
        reduce_to_B(v, D).check()
    M = psi.reshape(-1, D, D)
    rho = np.einsum("kpq,kpr->kqr", M, M.conj())
    assert np.allclose(np.trace(rho, axis1=1, axis2=2), 1.0, atol=1e-12)
    assert np.linalg.eigvalsh(rho).min() > -1e-12


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-10, 10))
def test_fidelity_phase_invariance(seed, theta):
    psi = state_from_seed(seed)
    assert fidelity(psi, np.exp(1j * theta) * psi) == pytest.approx(1.0, abs=1e-14)


def test_fidelity_examples():
    psi, chi = product(0, 0), product(1, 2)
    assert fidelity(psi, psi) == 1.0
    assert fidelity(psi, chi) == 0.0
    assert fidelity((psi + chi) / math.sqrt(2), psi) == pytest.approx(0.5)


def test_schmidt_coefficients_and_entropy():
    v = (product(0, 0) + product(1, 1)) / math.sqrt(2)
    c = schmidt_coefficients(v, D)
    assert np.allclose(np.sort(c)[::-1][:2], 0.5) and np.sum(c) == pytest.approx(1.0)
    assert entanglement_entropy(v, D) == pytest.approx(math.log(2))


def test_current_examples():
    p = ModelParams(3, 2, C=1.0, U=0.5, V=0.5).with_phase(math.pi / 2)
    J, calJ = current_expectation(construct_mes(p.basis, 3).vector, p)
    assert abs(J) < 1e-14 and calJ == pytest.approx(1.0, abs=1e-14)

    q = ModelParams(3, 2, C=1.0, U=0.5, V=0.1)
    w, v = np.linalg.eigh(build_hamiltonian(q).dense())
    J0, _ = current_expectation(v[:, 0].real.astype(complex) / np.linalg.norm(v[:, 0].real), q)
    assert abs(J0) < 1e-14


def test_plane_wave_product_current():
    p = ModelParams(3, 1, C=1.0).with_phase(math.pi / 6)
    # k = 0 plane wave for each species
    w, v = np.linalg.eigh(build_kinetic_single(p.basis, p.C, p.phi_a).dense())
    idx = int(np.argmin(np.abs(w + 2 * math.cos(math.pi / 6))))
    psi = np.kron(v[:, idx], v[:, idx])
    J, calJ = current_expectation(psi, p)
    assert J == pytest.approx(2 * p.C / 3, abs=1e-13)
    assert calJ == pytest.approx(1 / 3, abs=1e-13)


def test_current_hellmann_feynman_eigenstates():
    p = ModelParams(3, 2, C=1.0, U=0.8, V=0.3)
    h = 1e-5
    for phi in (0.3, 1.1, 2.5):
        w, v = np.linalg.eigh(build_hamiltonian(p.with_phase(phi)).dense())
        wp = np.linalg.eigvalsh(build_hamiltonian(p.with_phase(phi + h)).dense())
        wm = np.linalg.eigvalsh(build_hamiltonian(p.with_phase(phi - h)).dense())
        for i in (0, 5, 20, 35):
            if min(np.abs(np.delete(w, i) - w[i])) < 1e-3:
                continue
            J, _ = current_expectation(v[:, i], p.with_phase(phi))
            assert abs(J - (wp[i] - wm[i]) / (2 * h) / p.L) < 1e-6 * p.C
