import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from snqnn.errors import CapacityError, ValidationError
from snqnn.ops import observable_matrix, ObservableId
from snqnn.repsn import permute_state
from snqnn.states import (
    TABLE_FAMILIES,
    Graph,
    StateFamilySpec,
    classification_dataset,
    conditional_er,
    dicke_state,
    erdos_renyi,
    global_haar,
    graph_state,
    hamming_encode,
    haar_unitary,
    hea_state,
    k_regular,
    local_haar,
    random_hamming_state,
    read_graph,
    read_state,
    symmetric_state,
    weight_k_indices,
    write_graph,
    write_state,
)


def test_graph_normalizes_edges():
    g = Graph(4, [(2, 1), (0, 3)])
    assert g.edges == ((0, 3), (1, 2))
    assert list(g.degrees()) == [1, 1, 1, 1]
    assert not g.is_connected
    assert Graph(3, [(0, 1), (1, 2)]).is_connected
    with pytest.raises(ValidationError):
        Graph(3, [(0, 0)])
    with pytest.raises(ValidationError):
        Graph(3, [(0, 3)])
    with pytest.raises(ValidationError):
        Graph(3, [(0, 1), (1, 0)])


def test_graph_text_roundtrip(tmp_path):
    g = Graph(5, [(0, 1), (1, 4), (2, 3)])
    assert Graph.from_text(g.to_text()) == g
    path = tmp_path / "g.txt"
    write_graph(path, g)
    assert read_graph(path) == g
    with pytest.raises(ValidationError, match="line 2"):
        Graph.from_text("3\n0 x\n")


def test_two_node_graph_state():
    psi = graph_state(Graph(2, [(0, 1)]))
    assert np.allclose(psi, np.array([1, 1, 1, -1]) / 2)
    # general phase
    psi = graph_state(Graph(2, [(0, 1)]), phi=np.pi / 2)
    assert np.allclose(psi, np.array([1, 1, 1, 1j]) / 2)


def test_graph_state_stabilizers():
    g = Graph(3, [(0, 1), (1, 2)])
    psi = graph_state(g)
    X = np.array([[0, 1], [1, 0]])
    Z = np.diag([1, -1])
    I2 = np.eye(2)
    # K_1 = Z_0 X_1 Z_2
    K = np.kron(np.kron(Z, X), Z)
    assert np.allclose(K @ psi, psi)
    K0 = np.kron(np.kron(X, Z), I2)
    assert np.allclose(K0 @ psi, psi)


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 7), st.integers(0, 2 ** 32 - 1))
def test_graph_state_relabel_is_permutation(n, seed):
    rng = np.random.default_rng(seed)
    g = erdos_renyi(n, 0.5, rng)
    perm = rng.permutation(n)
    assert np.allclose(graph_state(g.relabel(perm)), permute_state(graph_state(g), perm))


@pytest.mark.parametrize("n, k", [(4, 3), (6, 3), (8, 4), (12, 6), (10, 3)])
def test_k_regular(n, k, rng):
    g = k_regular(n, k, rng)
    assert np.all(g.degrees() == k)
    assert len(g.edges) == n * k // 2
    with pytest.raises(ValidationError):
        k_regular(5, 3, rng)


def test_conditional_er(rng):
    assert conditional_er(6, 0.4, True, rng).is_connected
    assert not conditional_er(6, 0.4, False, rng).is_connected


def test_haar_samplers(rng):
    U = haar_unitary(8, rng)
    assert np.allclose(U.conj().T @ U, np.eye(8))
    for psi in (local_haar(4, rng), global_haar(4, rng), hea_state(4, 3, rng)):
        assert np.linalg.norm(psi) == pytest.approx(1.0)
    with pytest.raises(CapacityError):
        global_haar(13, rng)


def test_local_haar_is_product(rng):
    psi = local_haar(3, rng).reshape(2, 4)
    assert np.linalg.matrix_rank(psi, tol=1e-10) == 1


def test_hamming_encoding():
    idx = weight_k_indices(4, 2)
    assert len(idx) == math.comb(4, 2)
    assert all(bin(i).count("1") == 2 for i in idx)
    x = np.ones(6) / np.sqrt(6)
    assert np.allclose(hamming_encode(x, 2, 4), dicke_state(4, 2))
    with pytest.raises(ValidationError):
        hamming_encode(np.ones(5) / np.sqrt(5), 2, 4)
    with pytest.raises(ValidationError):
        hamming_encode(np.ones(6), 2, 4)


def test_symmetric_states_are_invariant(rng):
    for psi in (symmetric_state(5, rng), dicke_state(5, 2)):
        for perm in ([1, 0, 2, 3, 4], [4, 3, 2, 1, 0]):
            assert np.allclose(permute_state(psi, perm), psi)


def test_random_hamming_weight(rng):
    psi = random_hamming_state(5, 1, rng)
    support = np.flatnonzero(np.abs(psi) > 0)
    assert all(bin(i).count("1") == 1 for i in support)


def test_classification_dataset(rng):
    data, graphs = classification_dataset(5, 6, rng, return_graphs=True)
    assert list(data.labels) == [1, 1, 1, -1, -1, -1]
    assert [g.is_connected for g in graphs] == [True] * 3 + [False] * 3
    assert np.allclose(np.linalg.norm(data.states, axis=1), 1)
    with pytest.raises(ValidationError):
        classification_dataset(5, 5, rng)
    with pytest.raises(ValidationError):
        classification_dataset(4, 2, rng, p=0.0)


def test_classification_dataset_rejection_limit(rng, monkeypatch):
    import snqnn.states as st_mod
    monkeypatch.setattr(st_mod, "MAX_REJECTIONS", 10)
    with pytest.raises(ValidationError, match="label bins"):
        classification_dataset(8, 4, rng, p=0.99)


def test_state_file_roundtrip(tmp_path, rng):
    psi = global_haar(3, rng)
    path = tmp_path / "psi.bin"
    write_state(path, psi)
    assert np.array_equal(read_state(path), psi)
    path.write_bytes(b"\x00" * 5)
    with pytest.raises(ValidationError):
        read_state(path)


def test_family_spec_parsing():
    spec = StateFamilySpec.parse("regular:n/2")
    assert spec.supports(6) and not spec.supports(5)
    assert StateFamilySpec.parse("hamming").param in (1, "1")
    assert not StateFamilySpec.parse("global-haar").supports(13)
    with pytest.raises(ValidationError):
        StateFamilySpec.parse("nonsense")
    assert len(TABLE_FAMILIES) == 10


@pytest.mark.parametrize("tag", [t for t, _ in TABLE_FAMILIES] + ["generalized:0.4"])
def test_every_family_samples_unit_vectors(tag, rng):
    spec = StateFamilySpec.parse(tag)
    n = 6
    psi = spec.sampler()(n, rng)
    assert psi.shape == (2 ** n,)
    assert np.linalg.norm(psi) == pytest.approx(1.0)


def test_disconnected_graph_state_factorizes():
    # isolated vertex 2 leaves |+> on that qubit: <X_2> = 1
    psi = graph_state(Graph(3, [(0, 1)]))
    X2 = np.kron(np.eye(4), np.array([[0, 1], [1, 0]]))
    assert np.real(psi.conj() @ X2 @ psi) == pytest.approx(1.0)
    assert np.real(psi.conj() @ observable_matrix(ObservableId.PROD_X, 3) @ psi) == pytest.approx(0.0)
