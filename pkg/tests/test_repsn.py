import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from snqnn.errors import CapacityError, ValidationError
from snqnn.ops import GeneratorId, ObservableId, generator_matrix, observable_matrix
from snqnn.repsn import (
    build_schur_basis,
    hook_length_dim,
    isotypic_blocks,
    multiplicity,
    permutation_matrix,
    permute_state,
    restrict,
    sigma_blocks,
    state_blocks,
    tetrahedral,
    twirl,
    two_row_irreps,
)

from conftest import random_state


# Hand-derived from the hook length formula.
@pytest.mark.parametrize("partition, dim", [
    ((1,), 1), ((2,), 1), ((1, 1), 1), ((2, 1), 2), ((3, 1), 3), ((2, 2), 2),
    ((4, 2), 9), ((3, 3), 5), ((5, 1), 5), ((4, 4), 14), ((7, 3), 75),
])
def test_hook_length_known_values(partition, dim):
    assert hook_length_dim(partition) == dim


def test_two_row_irreps_n6():
    labels = two_row_irreps(6)
    assert [lam.partition for lam in labels] == [(6, 0), (5, 1), (4, 2), (3, 3)]
    assert [lam.d_lambda for lam in labels] == [7, 5, 3, 1]
    assert [lam.m_lambda for lam in labels] == [1, 5, 9, 5]
    assert [lam.spin for lam in labels] == [3.0, 2.0, 1.0, 0.0]


@pytest.mark.parametrize("n", range(1, 15))
def test_sum_rules(n):
    labels = two_row_irreps(n)
    assert sum(lam.m_lambda * lam.d_lambda for lam in labels) == 2 ** n
    assert sum(lam.d_lambda ** 2 for lam in labels) == tetrahedral(n) == math.comb(n + 3, 3)


@given(st.integers(1, 30), st.data())
def test_multiplicity_matches_hook_length(n, data):
    m = data.draw(st.integers(0, n // 2))
    assert multiplicity(n, m) == hook_length_dim((n - m, m) if m else (n,))


def test_hook_length_rejects_three_rows():
    with pytest.raises(ValidationError):
        hook_length_dim((3, 2, 1))
    with pytest.raises(ValidationError):
        hook_length_dim((1, 2))


def test_capacity_and_validation():
    with pytest.raises(CapacityError):
        two_row_irreps(15)
    with pytest.raises(ValidationError):
        build_schur_basis(0)
    with pytest.raises(ValidationError):
        build_schur_basis(2.5)


@pytest.mark.parametrize("n", range(1, 8))
def test_schur_basis_orthogonal(n):
    Q = build_schur_basis(n).matrix
    assert np.allclose(Q.T @ Q, np.eye(2 ** n), atol=1e-12)


def test_two_qubit_basis_is_triplet_singlet():
    b = build_schur_basis(2)
    s = 1 / np.sqrt(2)
    triplet = np.array([[1, 0, 0], [0, s, 0], [0, s, 0], [0, 0, 1]])
    assert np.allclose(b.matrix[:, b.columns(0, 0)], triplet)
    singlet = b.matrix[:, b.columns(1, 0)][:, 0]
    assert np.allclose(np.abs(singlet), [0, s, s, 0])
    assert singlet[1] == pytest.approx(-singlet[2])


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_equivariant_operators_are_block_diagonal(n):
    b = build_schur_basis(n)
    ops = [generator_matrix(g, n) for g in GeneratorId]
    ops += [observable_matrix(o, n) for o in ObservableId]
    for A in ops:
        T = b.matrix.T @ A @ b.matrix
        mask = np.zeros_like(T, dtype=bool)
        for m, lam in enumerate(b.irreps):
            for nu in range(lam.m_lambda):
                c = b.columns(m, nu)
                mask[c, c] = True
        assert np.max(np.abs(T[~mask]), initial=0.0) < 1e-10
        # identical copies across the multiplicity index
        for m, lam in enumerate(b.irreps):
            blocks = isotypic_blocks(b, A, m)
            assert np.allclose(blocks, blocks[0], atol=1e-10)


def test_restrict_rejects_bad_input():
    b = build_schur_basis(3)
    with pytest.raises(ValidationError):
        restrict(b, np.eye(4), 0, 0)
    with pytest.raises(ValidationError):
        restrict(b, np.triu(np.ones((8, 8))), 0, 0)
    with pytest.raises(ValidationError):
        restrict(b, np.eye(8), 1, 5)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2 ** 32 - 1))
def test_permute_state_matches_permutation_matrix(n, seed):
    rng = np.random.default_rng(seed)
    psi = random_state(n, rng)
    perm = rng.permutation(n)
    assert np.allclose(permutation_matrix(perm) @ psi, permute_state(psi, perm))


def test_permute_state_moves_qubits():
    # |100> with qubit 0 sent to position 2 becomes |001>
    psi = np.zeros(8)
    psi[0b100] = 1
    out = permute_state(psi, [2, 0, 1])
    assert out[0b001] == 1


@pytest.mark.parametrize("n", [2, 3, 4])
def test_twirl_is_projection_onto_commutant(n, rng):
    A = rng.normal(size=(2 ** n, 2 ** n))
    A = A + A.T
    T = twirl(A)
    assert np.allclose(twirl(T), T, atol=1e-10)
    for perm in itertools.permutations(range(n)):
        P = permutation_matrix(perm)
        assert np.allclose(P @ T, T @ P, atol=1e-10)
    assert np.trace(T) == pytest.approx(np.trace(A))


@pytest.mark.parametrize("n", [3, 4, 5])
def test_state_and_sigma_blocks(n, rng):
    b = build_schur_basis(n)
    psis = np.stack([random_state(n, rng) for _ in range(3)])
    w = np.array([0.2, 0.3, 0.5])
    S = sigma_blocks(b, psis, w)
    total = 0.0
    for m, lam in enumerate(b.irreps):
        expect = np.zeros((lam.d_lambda, lam.d_lambda), dtype=complex)
        for psi, wi in zip(psis, w):
            V = state_blocks(b, psi)[m]
            assert V.shape == (lam.d_lambda, lam.m_lambda)
            expect += wi * V @ V.conj().T
        assert np.allclose(S[m], expect)
        total += np.trace(S[m]).real
    assert total == pytest.approx(1.0)
