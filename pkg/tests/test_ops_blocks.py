from functools import reduce
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from snqnn import blocks
from snqnn.ops import (
    GeneratorId,
    ObservableId,
    apply_generator,
    apply_observable,
    generator_matrix,
    observable_matrix,
    sum_zz_spectrum,
)
from snqnn.repsn import build_schur_basis, restrict, sigma_blocks

from conftest import random_state

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]])
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0])


def kron_at(ops: dict, n: int):
    return reduce(np.kron, [ops.get(j, I2) for j in range(n)])


def reference(name, n):
    if name == "SumX":
        return sum(kron_at({j: X}, n) for j in range(n)) / n
    if name == "SumY":
        return sum(kron_at({j: Y}, n) for j in range(n)) / n
    if name == "SumZZ":
        return sum(kron_at({j: Z, k: Z}, n) for j, k in combinations(range(n), 2)) * 2 / (n * (n - 1))
    if name == "SumXX":
        return sum(kron_at({j: X, k: X}, n) for j, k in combinations(range(n), 2)) * 2 / (n * (n - 1))
    if name == "ProdX":
        return kron_at({j: X for j in range(n)}, n)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_dense_operators_match_kronecker_products(n):
    for g in GeneratorId:
        assert np.allclose(generator_matrix(g, n), reference(g.value, n))
    for o in ObservableId:
        assert np.allclose(observable_matrix(o, n), reference(o.value, n))


def test_parse_names():
    assert GeneratorId.parse("sumzz") is GeneratorId.SUM_ZZ
    assert ObservableId.parse("ProdX") is ObservableId.PROD_X
    with pytest.raises(ValueError):
        GeneratorId.parse("SumW")


def test_sum_zz_spectrum_two_qubits():
    # unnormalized sum_{j<k} Z_j Z_k on |00>, |01>, |11>
    assert list(sum_zz_spectrum(2, np.array([0, 1, 2]))) == [1, -1, 1]
    assert list(sum_zz_spectrum(4, np.array([0, 1, 2]))) == [6, 0, -2]


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2 ** 32 - 1))
def test_matrix_free_application(n, seed):
    rng = np.random.default_rng(seed)
    psi = np.stack([random_state(n, rng) for _ in range(2)], axis=1)
    for g in GeneratorId:
        assert np.allclose(apply_generator(g, psi, n), generator_matrix(g, n) @ psi)
    for o in ObservableId:
        assert np.allclose(apply_observable(o, psi, n), observable_matrix(o, n) @ psi)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_blocks_match_restrictions(n):
    basis = build_schur_basis(n)
    for m in range(n // 2 + 1):
        for g in GeneratorId:
            assert np.allclose(restrict(basis, generator_matrix(g, n), m, 0),
                               blocks.generator_block(g, n, m), atol=1e-10)
        for o in ObservableId:
            assert np.allclose(restrict(basis, observable_matrix(o, n), m, 0),
                               blocks.observable_block(o, n, m), atol=1e-10)


def test_spin_matrix_algebra():
    for two_j in range(5):
        jx, jy, jz = blocks.spin_matrices(two_j)
        assert np.allclose(jx @ jy - jy @ jx, 1j * jz)
        j = two_j / 2
        assert np.allclose(jx @ jx + jy @ jy + jz @ jz, j * (j + 1) * np.eye(two_j + 1))


def test_pack_roundtrip(rng):
    n = 5
    bl = {m: rng.normal(size=(n - 2 * m + 1,) * 2) for m in range(3)}
    P = blocks.pack(bl, n)
    assert P.shape == (6 + 4 + 2,) * 2
    back = blocks.unpack(P, n)
    for m in bl:
        assert np.allclose(back[m], bl[m])


def _dense_loss(gens, thetas, obs, n, psis, weights):
    from scipy.linalg import expm
    U = np.eye(2 ** n, dtype=complex)
    for g, t in zip(gens, thetas):
        U = expm(-1j * t * generator_matrix(g, n)) @ U
    out = U @ psis.T
    O = observable_matrix(obs, n)
    return float(np.real(np.einsum("ij,ik,kj->j", out.conj(), O, out) @ weights))


@pytest.mark.parametrize("n", [3, 4])
def test_block_loss_and_gradient_match_dense(n, rng):
    gens = [GeneratorId.SUM_ZZ, GeneratorId.SUM_X, GeneratorId.SUM_Y] * 2
    thetas = rng.uniform(-np.pi, np.pi, len(gens))
    psis = np.stack([random_state(n, rng) for _ in range(3)])
    w = np.array([0.5, -0.25, 0.75])
    S = sigma_blocks(build_schur_basis(n), psis, w)
    for obs in ObservableId:
        loss, grad = blocks.loss_and_grad(gens, thetas, obs, n, S)
        assert loss == pytest.approx(_dense_loss(gens, thetas, obs, n, psis, w), abs=1e-10)
        h = 1e-6
        for l in range(len(gens)):
            e = np.zeros(len(gens))
            e[l] = h
            fd = (_dense_loss(gens, thetas + e, obs, n, psis, w)
                  - _dense_loss(gens, thetas - e, obs, n, psis, w)) / (2 * h)
            assert grad[l] == pytest.approx(fd, abs=1e-7)
        mu = 2
        batch = np.stack([thetas, thetas[::-1]])
        gs = blocks.gradient_samples(gens, mu, batch, obs, n, S)
        assert gs[0] == pytest.approx(grad[mu], abs=1e-10)
        assert gs[1] == pytest.approx(blocks.loss_and_grad(gens, batch[1], obs, n, S)[1][mu],
                                      abs=1e-10)


def test_circuit_unitary_is_unitary(rng):
    n = 4
    gens = [GeneratorId.SUM_ZZ, GeneratorId.SUM_X, GeneratorId.SUM_Y]
    U = blocks.circuit_unitary(gens, rng.uniform(size=(2, 3)), n)
    for u in U:
        assert np.allclose(u.conj().T @ u, np.eye(len(u)))
    # D = 5 + 3 + 1 for four qubits
    assert np.allclose(blocks.circuit_unitary([], np.zeros(0), n), np.eye(9))
