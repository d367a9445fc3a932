import cmath
import math

import numpy as np
import pytest

from ringmes import ModelParams, construct_mes, mes_phases
from ringmes.fock import enumerate_basis
from ringmes.model import (
    HermitianOperator,
    build_current,
    build_hamiltonian,
    build_interaction,
    build_joint_current,
    build_kinetic,
    build_kinetic_single,
    joint_index,
    lift_to_joint,
    split_joint,
)
from ringmes.spectra import eigendecompose


def test_kinetic_matrix_element():
    b = enumerate_basis(3, 2)
    phi, C = 0.37, 1.3
    K = build_kinetic_single(b, C, phi).dense()
    i, j = b.index((1, 1, 0)), b.index((2, 0, 0))
    assert K[i, j] == pytest.approx(-math.sqrt(2) * C * cmath.exp(-1j * phi), abs=1e-14)


@pytest.mark.parametrize("phi", [0.0, 0.3, math.pi / 6, 2.0])
def test_single_particle_circulant(phi):
    C = 0.7
    w = np.linalg.eigvalsh(build_kinetic_single(enumerate_basis(3, 1), C, phi).dense())
    exact = sorted(-2 * C * math.cos(phi + 2 * math.pi * k / 3) for k in range(3))
    assert np.allclose(w, exact, atol=1e-13)


def test_real_at_zero_phase():
    K = build_kinetic_single(enumerate_basis(4, 2), 1.0, 0.0).dense()
    assert np.abs(K.imag).max() == 0.0
    assert np.allclose(K, K.T)


def test_lift_examples(rng):
    d = 6
    z = HermitianOperator(np.zeros((d, d)), "kinetic-A")
    assert np.count_nonzero(lift_to_joint(z, z).dense()) == 0
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    b = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    X = HermitianOperator(a + a.conj().T, "kinetic-A")
    Y = HermitianOperator(b + b.conj().T, "kinetic-B")
    lifted = lift_to_joint(X, Y).dense()
    assert np.trace(lifted).real == pytest.approx(d * (np.trace(X.dense()) + np.trace(Y.dense())).real, rel=1e-12)
    sums = np.sort(np.add.outer(np.linalg.eigvalsh(X.dense()), np.linalg.eigvalsh(Y.dense())).ravel())
    assert np.allclose(np.linalg.eigvalsh(lifted), sums, atol=1e-11)
    with pytest.raises(ValueError):
        lift_to_joint(X, HermitianOperator(np.eye(3), "kinetic-B"))


def test_joint_index_convention():
    d = 6
    for a in range(d):
        for b in range(d):
            k = joint_index(a, b, d)
            assert k == a * d + b and split_joint(k, d) == (a, b)


def test_interaction_examples():
    b = enumerate_basis(3, 2)
    d = b.dim
    H = build_interaction(b, 1.0, 1.0).dense()
    ia, ib = b.index((2, 0, 0)), b.index((0, 2, 0))
    assert H[ia * d + ia, ia * d + ia] == 0.0
    assert H[ia * d + ib, ia * d + ib] == pytest.approx(4.0)
    assert np.count_nonzero(build_interaction(b, 0.0, 0.0).dense()) == 0
    assert np.count_nonzero(H - np.diag(np.diag(H))) == 0


def test_interaction_commutes_with_number_operators():
    b = enumerate_basis(3, 2)
    H = build_interaction(b, 0.8, 0.3).dense()
    occ = b.occupations
    for j in range(3):
        for which in range(2):
            n = np.kron(np.diag(occ[:, j]), np.eye(b.dim)) if which == 0 else np.kron(np.eye(b.dim), np.diag(occ[:, j]))
            assert np.abs(H @ n - n @ H).max() == 0.0


def test_hamiltonian_without_hopping():
    # with C = 0 and U = V only (U/2) sum (n_A - n_B)^2 remains: diagonal, zero on paired states
    H = build_hamiltonian(ModelParams(3, 2, C=0.0, U=2.0, V=2.0)).dense()
    assert np.count_nonzero(H - np.diag(np.diag(H))) == 0
    b = enumerate_basis(3, 2)
    for i in range(b.dim):
        assert H[i * b.dim + i, i * b.dim + i] == 0.0


def test_hamiltonian_zero_matrix_C0_U_eq_V_on_paired():
    H = build_hamiltonian(ModelParams(3, 2, C=0.0, U=0.0, V=0.0)).dense()
    assert np.count_nonzero(H) == 0


def test_zero_eigenvalue_at_pi6(strong_u):
    w = np.linalg.eigvalsh(build_hamiltonian(strong_u.with_phase(math.pi / 6)).dense())
    assert np.abs(w).min() < 1e-10


@pytest.mark.parametrize("phi", [0.1, 0.77, 2.3])
def test_gauge_periodicity(strong_u, phi):
    w0 = np.linalg.eigvalsh(build_hamiltonian(strong_u.with_phase(phi)).dense())
    w1 = np.linalg.eigvalsh(build_hamiltonian(strong_u.with_phase(phi + 2 * math.pi / 3)).dense())
    assert np.allclose(w0, w1, atol=1e-11)


def test_species_relabel_symmetry():
    p = ModelParams(3, 2, C=1.0, U=0.6, V=0.2, phi_a=0.4, phi_b=1.3)
    q = p.replace(phi_a=p.phi_b, phi_b=p.phi_a)
    w0 = np.linalg.eigvalsh(build_hamiltonian(p).dense())
    w1 = np.linalg.eigvalsh(build_hamiltonian(q).dense())
    assert np.allclose(w0, w1, atol=1e-12)


@pytest.mark.parametrize("L,N", [(3, 1), (3, 2), (4, 2), (5, 2), (4, 3)])
def test_all_operators_hermitian(L, N):
    p = ModelParams(L, N, C=1.1, U=0.7, V=0.4, phi_a=0.9, phi_b=2.1)
    for op in (build_kinetic(p), build_interaction(p.basis, p.U, p.V), build_hamiltonian(p), build_joint_current(p)):
        assert op.is_hermitian(), op.label
        assert op.dim == p.d**2
    for op in (build_kinetic_single(p.basis, 1.0, 0.3), build_current(p.basis, 1.0, 0.3)):
        assert op.is_hermitian() and op.dim == p.d


@pytest.mark.parametrize("k", range(3))
def test_plane_wave_current(k):
    C, phi = 1.0, 0.45
    b = enumerate_basis(3, 1)
    K = build_kinetic_single(b, C, phi).dense()
    J = build_current(b, C, phi).dense()
    w, v = np.linalg.eigh(K)
    target = -2 * C * math.cos(phi + 2 * math.pi * k / 3)
    idx = int(np.argmin(np.abs(w - target)))
    j = np.vdot(v[:, idx], J @ v[:, idx]).real
    assert j == pytest.approx(2 * C / 3 * math.sin(phi + 2 * math.pi * k / 3), abs=1e-12)


def test_real_eigenvectors_carry_no_current():
    p = ModelParams(3, 2, C=1.0, U=0.3, V=0.1)
    w, v = eigendecompose(build_hamiltonian(p))
    v = v.real.astype(complex)
    J = build_joint_current(p).dense()
    for i in range(v.shape[1]):
        x = v[:, i] / np.linalg.norm(v[:, i])
        assert abs(np.vdot(x, J @ x)) < 1e-14


def test_hellmann_feynman_grid():
    p = ModelParams(3, 2, C=1.0, U=0.4, V=0.25)
    h = 1e-5
    for phi in np.linspace(0.05, 2 * math.pi - 0.05, 20):
        w, v = np.linalg.eigh(build_hamiltonian(p.with_phase(phi)).dense())
        wp = np.linalg.eigvalsh(build_hamiltonian(p.with_phase(phi + h)).dense())
        wm = np.linalg.eigvalsh(build_hamiltonian(p.with_phase(phi - h)).dense())
        J = build_joint_current(p.with_phase(phi)).dense()
        gaps = np.diff(w)
        for i in range(len(w)):
            near = min(gaps[i - 1] if i > 0 else np.inf, gaps[i] if i < len(gaps) else np.inf)
            if near < 1e-3:
                continue
            fd = (wp[i] - wm[i]) / (2 * h) / p.L
            jv = np.vdot(v[:, i], J @ v[:, i]).real
            assert abs(fd - jv) < 1e-6 * p.C / p.L


@pytest.mark.parametrize("L,m", [(3, 1), (3, 3), (4, 2), (5, 4)])
def test_mes_annihilated_separately(L, m):
    p = ModelParams(L, 2, C=1.0, U=0.9, V=0.9).with_phase(mes_phases(L, m))
    psi = construct_mes(p.basis, m).vector
    assert np.linalg.norm(build_kinetic(p) @ psi) < 1e-12
    assert np.linalg.norm(build_interaction(p.basis, p.U, p.V) @ psi) < 1e-12


def test_params_validation():
    from ringmes.errors import DomainError

    with pytest.raises(DomainError):
        ModelParams(3, 2, C=-1.0)
    with pytest.raises(DomainError):
        ModelParams(3, 2, U=-0.1)
    with pytest.raises(DomainError):
        ModelParams(2, 2)
    p = ModelParams(3, 2, phi_a=-math.pi / 6, phi_b=7.0)
    assert 0 <= p.phi_a < 2 * math.pi and p.phi_a == pytest.approx(11 * math.pi / 6)
    assert p.phi_b == pytest.approx(7.0 - 2 * math.pi)


def test_sparse_path_large_dimension():
    p = ModelParams(5, 4, C=1.0, U=0.5, V=0.5, phi_a=0.3, phi_b=0.3)
    H = build_hamiltonian(p)
    assert H.dim == 4900 and H.is_sparse and H.is_hermitian()
