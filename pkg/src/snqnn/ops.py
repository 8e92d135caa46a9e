"""Equivariant generators and observables, as dense matrices and matrix-free actions.

Qubit 0 is the most significant bit of a computational-basis index and
``|0>`` is the +1 eigenstate of ``Z``.
"""
from __future__ import annotations

import enum
import functools

import numpy as np

from .errors import ValidationError


class GeneratorId(str, enum.Enum):
    """Equivariant layer generators, each normalized to operator norm 1."""

    SUM_X = "SumX"
    SUM_Y = "SumY"
    SUM_ZZ = "SumZZ"

    @classmethod
    def parse(cls, name: str) -> "GeneratorId":
        for g in cls:
            if name.lower() in (g.value.lower(), g.name.lower()):
                return g
        raise ValidationError(f"unknown generator {name!r}")


class ObservableId(str, enum.Enum):
    """Equivariant measurement operators with operator norm 1."""

    SUM_X = "SumX"
    SUM_XX = "SumXX"
    PROD_X = "ProdX"

    @classmethod
    def parse(cls, name: str) -> "ObservableId":
        for o in cls:
            if name.lower() in (o.value.lower(), o.name.lower()):
                return o
        raise ValidationError(f"unknown observable {name!r}")


DEFAULT_CYCLE = (GeneratorId.SUM_ZZ, GeneratorId.SUM_X, GeneratorId.SUM_Y)

_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def _pair_norm(n: int) -> float:
    return 2 / (n * (n - 1)) if n > 1 else 0.0


def single_site(op: np.ndarray, j: int, n: int) -> np.ndarray:
    """Dense ``op`` acting on qubit ``j`` of ``n``."""
    return np.kron(np.kron(np.eye(2 ** j), op), np.eye(2 ** (n - j - 1)))


@functools.lru_cache(maxsize=None)
def hamming_weights(n: int) -> np.ndarray:
    """Number of ones in each computational-basis index."""
    idx = np.arange(2 ** n)
    w = np.zeros(2 ** n, dtype=np.int64)
    for j in range(n):
        w += (idx >> j) & 1
    w.setflags(write=False)
    return w


def sum_zz_spectrum(n: int, w) -> np.ndarray:
    """Eigenvalue of ``sum_{k<j} Z_j Z_k`` on Hamming weight ``w``."""
    w = np.asarray(w)
    return (n * n - n * (4 * w + 1) + 4 * w * w) / 2


def generator_matrix(gen: GeneratorId, n: int) -> np.ndarray:
    """Dense ``2^n x 2^n`` matrix of a normalized generator."""
    if gen is GeneratorId.SUM_ZZ:
        return np.diag(_pair_norm(n) * sum_zz_spectrum(n, hamming_weights(n))).astype(complex)
    P = _X if gen is GeneratorId.SUM_X else _Y
    return sum(single_site(P, j, n) for j in range(n)) / n


def observable_matrix(obs: ObservableId, n: int) -> np.ndarray:
    """Dense ``2^n x 2^n`` matrix of a normalized observable."""
    if obs is ObservableId.SUM_X:
        return generator_matrix(GeneratorId.SUM_X, n)
    if obs is ObservableId.SUM_XX:
        xs = [single_site(_X, j, n) for j in range(n)]
        out = np.zeros((2 ** n, 2 ** n), dtype=complex)
        for j in range(n):
            for k in range(j):
                out += xs[j] @ xs[k]
        return _pair_norm(n) * out
    out = np.ones((1, 1), dtype=complex)
    for _ in range(n):
        out = np.kron(out, _X)
    return out


def _flip(psi: np.ndarray, j: int, n: int) -> np.ndarray:
    """Apply ``X_j`` to a state or batch of states (batch on the last axis)."""
    shape = psi.shape
    t = psi.reshape((2 ** j, 2, 2 ** (n - j - 1)) + shape[1:])
    return t[:, ::-1].reshape(shape)


def _sign(j: int, n: int) -> np.ndarray:
    """``Z_j`` diagonal."""
    return 1 - 2 * ((np.arange(2 ** n) >> (n - 1 - j)) & 1)


def apply_generator(gen: GeneratorId, psi: np.ndarray, n: int) -> np.ndarray:
    """``H psi`` without forming ``H``; ``psi`` is ``(2^n,)`` or ``(2^n, B)``."""
    extra = (slice(None),) + (None,) * (psi.ndim - 1)
    if gen is GeneratorId.SUM_ZZ:
        diag = _pair_norm(n) * sum_zz_spectrum(n, hamming_weights(n))
        return diag[extra] * psi
    out = np.zeros_like(psi, dtype=complex)
    for j in range(n):
        f = _flip(psi, j, n)
        if gen is GeneratorId.SUM_Y:
            # Y = i Z X: <b|Y|a> picks up +i when b=1
            f = -1j * _sign(j, n)[extra] * f
        out += f
    return out / n


def apply_observable(obs: ObservableId, psi: np.ndarray, n: int) -> np.ndarray:
    """``O psi`` without forming ``O``."""
    if obs is ObservableId.SUM_X:
        return apply_generator(GeneratorId.SUM_X, psi, n)
    if obs is ObservableId.PROD_X:
        return psi[::-1].copy()
    flips = [_flip(psi, j, n) for j in range(n)]
    out = np.zeros_like(psi, dtype=complex)
    for j in range(n):
        for k in range(j):
            out += _flip(flips[k], j, n)
    return _pair_norm(n) * out
