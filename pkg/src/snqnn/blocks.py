"""Reduced simulation of S_n-equivariant circuits on the irrep blocks.

An equivariant circuit acts as ``(+)_lambda I_{m_lambda} (x) U_lambda``.  Every
quantity of interest (loss, gradients, QFIM) therefore depends on an input
state only through the ``d_lambda x d_lambda`` matrices
``S_lambda = sum_nu rho_lambda^nu`` (see :func:`snqnn.repsn.sigma_blocks`).
This module evolves those matrices directly.  All irreps are packed into one
block-diagonal matrix of size ``sum_lambda d_lambda = O(n^2)``, so a layer
costs a single small matrix product instead of ``n 2^n`` work.

Block operators are written in the ``|j, M>`` basis with ``M`` decreasing,
matching the Schur-basis column order of :mod:`snqnn.repsn`.
"""
from __future__ import annotations

import functools
from typing import Mapping, Sequence

import numpy as np
from scipy.linalg import block_diag, expm

from .ops import GeneratorId, ObservableId

Blocks = Mapping[int, np.ndarray]


@functools.lru_cache(maxsize=None)
def spin_matrices(two_j: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(J_x, J_y, J_z)`` for spin ``j = two_j / 2`` (Condon-Shortley phases)."""
    j = two_j / 2
    M = j - np.arange(two_j + 1)
    # <j, M + 1 | J_+ | j, M>
    jp = np.zeros((two_j + 1, two_j + 1))
    for c in range(1, two_j + 1):
        jp[c - 1, c] = np.sqrt(j * (j + 1) - M[c] * (M[c] + 1))
    jx = (jp + jp.T) / 2
    jy = (jp - jp.T) / 2j
    jz = np.diag(M)
    return jx, jy, jz


@functools.lru_cache(maxsize=None)
def generator_block(gen: GeneratorId, n: int, m: int) -> np.ndarray:
    """Restriction of a generator to irrep ``(n - m, m)``."""
    jx, jy, jz = spin_matrices(n - 2 * m)
    if gen is GeneratorId.SUM_X:
        return 2 * jx / n
    if gen is GeneratorId.SUM_Y:
        return 2 * jy / n
    if gen is GeneratorId.SUM_ZZ:
        if n == 1:
            return np.zeros_like(jz)
        return (4 * jz @ jz - n * np.eye(len(jz))) / (n * (n - 1))
    raise ValueError(f"unknown generator {gen!r}")


@functools.lru_cache(maxsize=None)
def observable_block(obs: ObservableId, n: int, m: int) -> np.ndarray:
    """Restriction of a measurement operator to irrep ``(n - m, m)``."""
    jx, _, _ = spin_matrices(n - 2 * m)
    if obs is ObservableId.SUM_X:
        return 2 * jx / n
    if obs is ObservableId.SUM_XX:
        if n == 1:
            return np.zeros_like(jx)
        return (4 * jx @ jx - n * np.eye(len(jx))) / (n * (n - 1))
    if obs is ObservableId.PROD_X:
        # X^{(x)n} = i^n exp(-i pi/2 sum_j X_j) = i^n exp(-i pi J_x)
        return np.real((1j) ** n * expm(-1j * np.pi * jx))
    raise ValueError(f"unknown observable {obs!r}")


def _dag(A: np.ndarray) -> np.ndarray:
    return np.swapaxes(A, -1, -2).conj()


@functools.lru_cache(maxsize=None)
def offsets(n: int) -> tuple[int, ...]:
    """Start of each irrep block in the packed matrix; last entry is the size."""
    out = [0]
    for m in range(n // 2 + 1):
        out.append(out[-1] + n - 2 * m + 1)
    return tuple(out)


def pack(blocks: Blocks, n: int) -> np.ndarray:
    """Block-diagonal matrix from ``{m: block}``; blocks may carry leading batch axes."""
    off = offsets(n)
    first = np.asarray(blocks[0])
    out = np.zeros(first.shape[:-2] + (off[-1], off[-1]), dtype=complex)
    for m in range(n // 2 + 1):
        out[..., off[m]:off[m + 1], off[m]:off[m + 1]] = blocks[m]
    return out


def unpack(A: np.ndarray, n: int) -> dict[int, np.ndarray]:
    off = offsets(n)
    return {m: A[..., off[m]:off[m + 1], off[m]:off[m + 1]] for m in range(n // 2 + 1)}


@functools.lru_cache(maxsize=None)
def packed_generator(gen: GeneratorId, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(H, eigenvalues, eigenvectors)`` of the packed generator."""
    H = block_diag(*[generator_block(gen, n, m) for m in range(n // 2 + 1)]).astype(complex)
    e, V = np.linalg.eigh(H)
    return H, e, V


@functools.lru_cache(maxsize=None)
def packed_observable(obs: ObservableId, n: int) -> np.ndarray:
    return block_diag(*[observable_block(obs, n, m) for m in range(n // 2 + 1)]).astype(complex)


def layer_unitaries(gens: Sequence[GeneratorId], thetas: np.ndarray, n: int) -> np.ndarray:
    """Packed ``exp(-i theta_l H_l)``, shape ``thetas.shape + (D, D)``."""
    thetas = np.asarray(thetas, dtype=float)
    D = offsets(n)[-1]
    out = np.empty(thetas.shape + (D, D), dtype=complex)
    gens = list(gens)
    for g in set(gens):
        _, e, V = packed_generator(g, n)
        idx = [l for l, h in enumerate(gens) if h is g]
        phase = np.exp(-1j * thetas[..., idx, None] * e)
        out[..., idx, :, :] = (V * phase[..., None, :]) @ V.conj().T
    return out


def _chain(U: np.ndarray) -> np.ndarray:
    """Product of ``U[..., 0, :, :]`` through ``U[..., -1, :, :]``, layer 0 first."""
    L = U.shape[-3]
    D = U.shape[-1]
    P = np.broadcast_to(np.eye(D, dtype=complex), U.shape[:-3] + (D, D)).copy()
    for l in range(L):
        P = U[..., l, :, :] @ P
    return P


def circuit_unitary(gens: Sequence[GeneratorId], thetas: np.ndarray, n: int) -> np.ndarray:
    """Packed ``U`` for layers applied in order; ``thetas`` is ``(L,)`` or ``(S, L)``."""
    thetas = np.asarray(thetas, dtype=float)
    if len(gens) == 0:
        D = offsets(n)[-1]
        return np.broadcast_to(np.eye(D, dtype=complex), thetas.shape[:-1] + (D, D)).copy()
    return _chain(layer_unitaries(gens, thetas, n))


def heisenberg_observable(
    gens: Sequence[GeneratorId], thetas: np.ndarray, obs: ObservableId, n: int
) -> np.ndarray:
    """Packed ``U^dagger O U``."""
    U = circuit_unitary(gens, thetas, n)
    return _dag(U) @ packed_observable(obs, n) @ U


def pack_states(state_blocks: Sequence[Blocks], n: int) -> np.ndarray:
    """Stack per-state block dicts as packed ``(M, D, D)`` matrices."""
    D = offsets(n)[-1]
    if not state_blocks:
        return np.zeros((0, D, D), dtype=complex)
    return np.stack([pack(S, n) for S in state_blocks])


def batch_expectations(heis: np.ndarray, states: np.ndarray) -> np.ndarray:
    """``Tr[S_i H]`` for packed states ``(M, D, D)``; ``heis`` may be ``(T, D, D)``."""
    if heis.ndim == 2:
        return np.einsum("iab,ba->i", states, heis).real
    return np.einsum("iab,tba->ti", states, heis).real


def loss_and_grad(
    gens: Sequence[GeneratorId], thetas: np.ndarray, obs: ObservableId, n: int,
    sigma: Blocks | np.ndarray,
) -> tuple[float, np.ndarray]:
    """Loss ``Tr[U sigma U^dagger O]`` and its gradient.

    With ``rho_l`` the state after layer ``l`` and ``O_l`` the observable
    pulled back to the same point, ``d_l = i Tr[rho_l [H_l, O_l]]``.
    """
    thetas = np.asarray(thetas, dtype=float)
    S = sigma if isinstance(sigma, np.ndarray) else pack(sigma, n)
    O = packed_observable(obs, n)
    L = len(gens)
    if L == 0:
        return float(np.real(np.trace(S @ O))), np.zeros(0)
    U = layer_unitaries(gens, thetas, n)
    D = S.shape[-1]
    pre = np.empty((L, D, D), dtype=complex)
    P = np.eye(D, dtype=complex)
    for l in range(L):
        P = U[l] @ P
        pre[l] = P
    post = np.empty((L, D, D), dtype=complex)
    Q = np.eye(D, dtype=complex)
    for l in range(L - 1, -1, -1):
        post[l] = Q
        Q = Q @ U[l]
    rho = pre @ S @ _dag(pre)
    Ol = _dag(post) @ O @ post
    H = np.stack([packed_generator(g, n)[0] for g in gens])
    comm = H @ Ol - Ol @ H
    grad = np.real(1j * np.einsum("lab,lba->l", rho, comm))
    loss = float(np.real(np.trace(rho[-1] @ O)))
    return loss, grad


def gradient_samples(
    gens: Sequence[GeneratorId], mu: int, thetas: np.ndarray, obs: ObservableId,
    n: int, sigma: Blocks | np.ndarray,
) -> np.ndarray:
    """``d L / d theta_mu`` for each row of ``thetas`` (shape ``(S, L)``)."""
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    S = sigma if isinstance(sigma, np.ndarray) else pack(sigma, n)
    UB = circuit_unitary(gens[: mu + 1], thetas[:, : mu + 1], n)
    UA = circuit_unitary(gens[mu + 1:], thetas[:, mu + 1:], n)
    rho = UB @ S @ _dag(UB)
    O = _dag(UA) @ packed_observable(obs, n) @ UA
    H = packed_generator(gens[mu], n)[0]
    comm = H @ O - O @ H
    return np.real(1j * np.einsum("sab,sba->s", rho, comm))


def qfim(
    gens: Sequence[GeneratorId], thetas: np.ndarray, n: int,
    state_blocks: Sequence[Blocks] | np.ndarray,
) -> np.ndarray:
    """Quantum Fisher information matrix, averaged over the given pure states.

    For one state this is ``4 Re[<d_j psi|d_k psi> - <d_j psi|psi><psi|d_k psi>]``.
    With ``G_j = U_{>j} H_j U_{>j}^dagger`` and the output blocks ``S_f``,
    ``<d_j psi|d_k psi> = Tr[G_j G_k S_f]`` and ``<psi|d_k psi> = -i Tr[G_k S_f]``.
    """
    thetas = np.asarray(thetas, dtype=float)
    states = state_blocks if isinstance(state_blocks, np.ndarray) else pack_states(state_blocks, n)
    L = len(gens)
    U = layer_unitaries(gens, thetas, n)
    D = offsets(n)[-1]
    G = np.empty((L, D, D), dtype=complex)
    W = np.eye(D, dtype=complex)
    for j in range(L - 1, -1, -1):
        G[j] = W @ packed_generator(gens[j], n)[0] @ _dag(W)
        W = W @ U[j]
    Sf = W @ states @ _dag(W)
    GS = G @ Sf.sum(axis=0)
    T = np.einsum("jab,kba->jk", G, GS)
    g = np.einsum("jab,iba->ji", G, Sf).real
    F = 4 * (np.real(T) - g @ g.T) / len(states)
    return (F + F.T) / 2
