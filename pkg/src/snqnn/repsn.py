"""Representation theory of S_n acting on n qubits by wire permutation.

Only two-row Young diagrams ``(n - m, m)`` occur in the qubit representation,
so everything here is indexed by the row parameter ``m``.  The Schur basis is
built by coupling spins one qubit at a time; in that basis every permutation
acts as ``r_lambda(pi) (x) I_{d_lambda}`` and every permutation-equivariant
operator as ``I_{m_lambda} (x) A_lambda``.

Column layout of :attr:`SchurBasis.matrix`: irreps by increasing ``m``, then
coupling paths ``nu`` in lexicographic order, then magnetic number from
``+s`` down to ``-s`` (i.e. Hamming weight ``m .. n - m``).  All indices are
zero-based.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field
from math import comb, factorial
from typing import Sequence

import numpy as np

from .errors import CapacityError, ValidationError

MAX_QUBITS = 14


@dataclass(frozen=True)
class IrrepLabel:
    """Irrep ``lambda = (n - m, m)`` with block dimension and multiplicity."""

    n: int
    m: int
    d_lambda: int
    m_lambda: int

    @property
    def partition(self) -> tuple[int, int]:
        return (self.n - self.m, self.m)

    @property
    def spin(self) -> float:
        return (self.n - 2 * self.m) / 2


def _check_n(n: int, cap: int = MAX_QUBITS) -> None:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValidationError(f"qubit count must be a positive integer, got {n!r}")
    if n > cap:
        raise CapacityError(f"n={n} exceeds the qubit cap of {cap}")


def multiplicity(n: int, m: int) -> int:
    """Dimension of the S_n irrep (n - m, m), closed two-row form."""
    num = factorial(n) * factorial(n - 2 * m + 1)
    den = factorial(n - m + 1) * factorial(m) * factorial(n - 2 * m)
    return num // den


def two_row_irreps(n: int, cap: int = MAX_QUBITS) -> list[IrrepLabel]:
    """All irreps in the n-qubit permutation representation, by increasing m."""
    _check_n(n, cap)
    return [IrrepLabel(n, m, n - 2 * m + 1, multiplicity(n, m)) for m in range(n // 2 + 1)]


def hook_length_dim(partition: Sequence[int]) -> int:
    """Dimension of the S_n irrep labelled by ``partition`` via hook lengths.

    Only shapes with at most two non-empty rows are accepted, since no other
    shape occurs on qubits.
    """
    rows = [int(r) for r in partition if r != 0]
    if any(r < 0 for r in partition) or rows != sorted(rows, reverse=True):
        raise ValidationError(f"not a partition: {tuple(partition)}")
    if len(rows) > 2:
        raise ValidationError(f"unsupported shape with {len(rows)} rows: {tuple(partition)}")
    if not rows:
        return 1
    n = sum(rows)
    cols = [sum(1 for r in rows if r > c) for c in range(rows[0])]
    hooks = 1
    for i, r in enumerate(rows):
        for j in range(r):
            hooks *= (r - j - 1) + (cols[j] - i - 1) + 1
    return factorial(n) // hooks


def tetrahedral(n: int) -> int:
    """``Te_{n+1} = C(n + 3, 3)``, the free-parameter count of an S_n-equivariant unitary."""
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    return comb(n + 3, 3)


@dataclass(frozen=True, eq=False)
class SchurBasis:
    """Real orthogonal change of basis that block-diagonalises the S_n action.

    ``matrix[:, c]`` is the Schur vector for column ``c``; ``col_m``, ``col_nu``
    and ``col_k`` give its irrep row parameter, coupling-path index and
    magnetic index.  ``paths[m]`` lists the coupling paths ``(2 j_1, ..., 2 j_n)``
    of irrep ``m`` in the order of ``nu``.
    """

    n: int
    matrix: np.ndarray
    irreps: tuple[IrrepLabel, ...]
    col_m: np.ndarray
    col_nu: np.ndarray
    col_k: np.ndarray
    paths: dict[int, tuple[tuple[int, ...], ...]]
    offsets: dict[int, int] = field(repr=False)

    @property
    def dim(self) -> int:
        return 2 ** self.n

    def irrep(self, m: int) -> IrrepLabel:
        return self.irreps[m]

    def columns(self, m: int, nu: int) -> slice:
        """Column slice of the copy ``nu`` of irrep ``m``."""
        lam = self.irreps[m]
        if not 0 <= nu < lam.m_lambda:
            raise ValidationError(f"nu={nu} out of range for m={m} (m_lambda={lam.m_lambda})")
        start = self.offsets[m] + nu * lam.d_lambda
        return slice(start, start + lam.d_lambda)

    def isotypic(self, m: int) -> slice:
        lam = self.irreps[m]
        return slice(self.offsets[m], self.offsets[m] + lam.m_lambda * lam.d_lambda)

    def q_matrix(self, m: int, nu: int) -> np.ndarray:
        """The isometry ``Q_lambda^nu`` as a ``d_lambda x 2^n`` matrix."""
        return self.matrix[:, self.columns(m, nu)].T


def _couple_up(V: np.ndarray, two_j: int) -> np.ndarray:
    """Couple spin j (V: dim x paths x (2j+1)) with spin 1/2 into j + 1/2."""
    dim, paths, _ = V.shape
    j = two_j / 2
    jp = j + 0.5
    d_new = two_j + 2
    W = np.zeros((dim, 2, paths, d_new))
    for c in range(d_new):
        M = jp - c
        if M - 0.5 >= -j:  # |j, M - 1/2> (x) |up>
            W[:, 0, :, c] = np.sqrt((j + M + 0.5) / (2 * j + 1)) * V[:, :, round(j - (M - 0.5))]
        if M + 0.5 <= j:  # |j, M + 1/2> (x) |down>
            W[:, 1, :, c] = np.sqrt((j - M + 0.5) / (2 * j + 1)) * V[:, :, round(j - (M + 0.5))]
    return W.reshape(2 * dim, paths, d_new)


def _couple_down(V: np.ndarray, two_j: int) -> np.ndarray:
    """Couple spin j with spin 1/2 into j - 1/2 (Condon-Shortley signs)."""
    dim, paths, _ = V.shape
    j = two_j / 2
    jm = j - 0.5
    d_new = two_j
    W = np.zeros((dim, 2, paths, d_new))
    for c in range(d_new):
        M = jm - c
        W[:, 0, :, c] = -np.sqrt((j - M + 0.5) / (2 * j + 1)) * V[:, :, round(j - (M - 0.5))]
        W[:, 1, :, c] = np.sqrt((j + M + 0.5) / (2 * j + 1)) * V[:, :, round(j - (M + 0.5))]
    return W.reshape(2 * dim, paths, d_new)


@functools.lru_cache(maxsize=4)
def build_schur_basis(n: int, cap: int = MAX_QUBITS) -> SchurBasis:
    """Construct the Schur basis on n qubits by sequential spin coupling.

    Qubit 0 is the most significant bit and ``|0>`` is spin up.  Results are
    cached and read-only.
    """
    _check_n(n, cap)
    # two_j -> (paths, array of shape (2^k, n_paths, 2j + 1))
    sectors: dict[int, tuple[list[tuple[int, ...]], np.ndarray]] = {
        1: ([(1,)], np.eye(2).reshape(2, 1, 2))
    }
    for _ in range(n - 1):
        nxt: dict[int, tuple[list[tuple[int, ...]], list[np.ndarray]]] = {}
        for two_j, (paths, V) in sectors.items():
            targets = [(two_j + 1, _couple_up)]
            if two_j >= 1:
                targets.append((two_j - 1, _couple_down))
            for t_new, couple in targets:
                plist, arrs = nxt.setdefault(t_new, ([], []))
                plist.extend(p + (t_new,) for p in paths)
                arrs.append(couple(V, two_j))
        sectors = {t: (p, np.concatenate(a, axis=1)) for t, (p, a) in nxt.items()}

    irreps = tuple(two_row_irreps(n, cap))
    blocks, col_m, col_nu, col_k = [], [], [], []
    paths_out: dict[int, tuple[tuple[int, ...], ...]] = {}
    offsets: dict[int, int] = {}
    offset = 0
    for lam in irreps:
        paths, V = sectors[n - 2 * lam.m]
        order = sorted(range(len(paths)), key=lambda i: paths[i])
        V = V[:, order, :]
        paths_out[lam.m] = tuple(paths[i] for i in order)
        offsets[lam.m] = offset
        blocks.append(V.reshape(V.shape[0], -1))
        col_m.append(np.full(lam.m_lambda * lam.d_lambda, lam.m))
        col_nu.append(np.repeat(np.arange(lam.m_lambda), lam.d_lambda))
        col_k.append(np.tile(np.arange(lam.d_lambda), lam.m_lambda))
        offset += lam.m_lambda * lam.d_lambda

    matrix = np.concatenate(blocks, axis=1)
    arrays = [matrix] + [np.concatenate(c) for c in (col_m, col_nu, col_k)]
    for a in arrays:
        a.setflags(write=False)
    return SchurBasis(n, arrays[0], irreps, arrays[1], arrays[2], arrays[3], paths_out, offsets)


def _label_m(lam: IrrepLabel | int) -> int:
    return lam.m if isinstance(lam, IrrepLabel) else int(lam)


def restrict(basis: SchurBasis, A: np.ndarray, lam: IrrepLabel | int, nu: int) -> np.ndarray:
    """Restriction ``Q_lambda^nu A (Q_lambda^nu)^dagger`` of a Hermitian operator."""
    A = np.asarray(A)
    if A.shape != (basis.dim, basis.dim):
        raise ValidationError(f"operator shape {A.shape} does not match n={basis.n}")
    if np.max(np.abs(A - A.conj().T), initial=0.0) > 1e-10:
        raise ValidationError("operator is not Hermitian")
    Q = basis.q_matrix(_label_m(lam), nu)
    return Q @ A @ Q.T


def isotypic_blocks(basis: SchurBasis, A: np.ndarray, m: int) -> np.ndarray:
    """All diagonal blocks ``A_lambda^{nu,nu}`` of irrep m, shape ``(m_lambda, d, d)``."""
    lam = basis.irreps[m]
    cols = basis.matrix[:, basis.isotypic(m)]
    sub = cols.T @ np.asarray(A) @ cols
    d, mult = lam.d_lambda, lam.m_lambda
    sub = sub.reshape(mult, d, mult, d)
    return np.einsum("adae->ade", sub)


def state_blocks(basis: SchurBasis, psi: np.ndarray) -> dict[int, np.ndarray]:
    """Coefficients of a state in each isotypic component.

    Returns ``{m: V}`` with ``V`` of shape ``(d_lambda, m_lambda)`` whose column
    ``nu`` is ``Q_lambda^nu psi``; hence ``V V^dagger = sum_nu psi_lambda^nu``.
    Accepts a batch of states stacked along the last axis as well.
    """
    psi = np.asarray(psi)
    if np.iscomplexobj(psi):
        # avoid upcasting the real basis matrix to complex
        coeffs = basis.matrix.T @ psi.real + 1j * (basis.matrix.T @ psi.imag)
    else:
        coeffs = basis.matrix.T @ psi
    out = {}
    for lam in basis.irreps:
        c = coeffs[basis.isotypic(lam.m)]
        c = c.reshape((lam.m_lambda, lam.d_lambda) + psi.shape[1:])
        out[lam.m] = np.moveaxis(c, 0, 1)
    return out


def sigma_blocks(
    basis: SchurBasis, states: np.ndarray, weights: Sequence[float] | None = None
) -> dict[int, np.ndarray]:
    """``sum_nu sigma_lambda^nu`` for ``sigma = sum_i c_i |psi_i><psi_i|``.

    ``states`` is ``(M, 2^n)``; a single state vector is also accepted.  Only
    ``d_lambda x d_lambda`` accumulators are formed.
    """
    states = np.atleast_2d(np.asarray(states))
    if weights is None:
        weights = np.ones(len(states))
    weights = np.asarray(weights, dtype=float)
    if len(weights) != len(states):
        raise ValidationError("weights and states differ in length")
    blocks = state_blocks(basis, states.T)
    out = {}
    for m, V in blocks.items():
        # V: (d, m_lambda, M)
        out[m] = np.einsum("aki,bki,i->ab", V, V.conj(), weights)
    return out


def twirl(A: np.ndarray, basis: SchurBasis | None = None) -> np.ndarray:
    """Project an operator onto the commutant of the permutation action.

    Implemented by averaging the diagonal blocks ``A_lambda^{nu,nu}`` over ``nu``
    and reassembling ``(+)_lambda I_{m_lambda} (x) mean_lambda``.
    """
    A = np.asarray(A)
    n = int(round(np.log2(A.shape[0])))
    if A.shape != (2**n, 2**n):
        raise ValidationError(f"expected a 2^n x 2^n matrix, got {A.shape}")
    basis = basis or build_schur_basis(n)
    B = basis.matrix
    core = np.zeros(A.shape, dtype=np.result_type(A.dtype, float))
    for lam in basis.irreps:
        mean = isotypic_blocks(basis, A, lam.m).mean(axis=0)
        sl = basis.isotypic(lam.m)
        core[sl, sl] = np.kron(np.eye(lam.m_lambda), mean)
    return B @ core @ B.T


def _validate_perm(perm: Sequence[int]) -> np.ndarray:
    p = np.asarray(perm)
    if p.ndim != 1 or p.size == 0 or sorted(p.tolist()) != list(range(p.size)):
        raise ValidationError(f"not a permutation: {list(perm)!r}")
    return p


def permute_state(psi: np.ndarray, perm: Sequence[int]) -> np.ndarray:
    """Apply ``R(pi)`` to a state vector; qubit ``j`` is moved to position ``perm[j]``."""
    p = _validate_perm(perm)
    n = p.size
    psi = np.asarray(psi)
    T = psi.reshape((2,) * n + psi.shape[1:])
    axes = list(np.argsort(p)) + list(range(n, T.ndim))
    return np.transpose(T, axes).reshape(psi.shape)


def permutation_matrix(perm: Sequence[int]) -> np.ndarray:
    """Dense 0/1 matrix of ``R(pi)`` with ``pi(j) = perm[j]``.

    Satisfies ``R(pi) R(pi') = R(pi o pi')``.
    """
    p = _validate_perm(perm)
    dim = 2**p.size
    return permute_state(np.eye(dim), p)
