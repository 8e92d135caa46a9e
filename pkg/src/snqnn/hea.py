"""Hardware-efficient ansatz: RY layers followed by a line of CNOTs.

Used both to prepare HEA input states and as the non-equivariant baseline
classifier.  Parameters fill layers qubit by qubit; a CNOT ladder closes each
completed layer, so a budget that is not a multiple of ``n`` leaves a partial
final layer of rotations.
"""
from __future__ import annotations

import numpy as np

from .errors import ValidationError

_Y = np.array([[0, -1j], [1j, 0]])


def _split(psi, j, n):
    return psi.reshape((2 ** j, 2, 2 ** (n - j - 1)) + psi.shape[1:])


def apply_ry(psi: np.ndarray, j: int, theta: float, n: int) -> np.ndarray:
    """``exp(-i theta Y_j / 2) psi``."""
    t = _split(psi, j, n)
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    a0, a1 = t[:, 0], t[:, 1]
    return np.stack([c * a0 - s * a1, s * a0 + c * a1], axis=1).reshape(psi.shape)


def apply_y(psi: np.ndarray, j: int, n: int) -> np.ndarray:
    t = _split(psi, j, n)
    return np.stack([-1j * t[:, 1], 1j * t[:, 0]], axis=1).reshape(psi.shape)


def apply_cnot(psi: np.ndarray, control: int, target: int, n: int) -> np.ndarray:
    """CNOT; self-inverse."""
    idx = np.arange(2 ** n)
    cbit = (idx >> (n - 1 - control)) & 1
    perm = np.where(cbit == 1, idx ^ (1 << (n - 1 - target)), idx)
    return psi[perm]


def _ladder(psi, n, inverse=False):
    pairs = [(q, q + 1) for q in range(n - 1)]
    for c, t in (reversed(pairs) if inverse else pairs):
        psi = apply_cnot(psi, c, t, n)
    return psi


def schedule(n: int, n_params: int) -> list[tuple]:
    """Gate list: ``("ry", qubit, param_index)`` and ``("ladder",)`` entries."""
    if n < 1 or n_params < 0:
        raise ValidationError("need n >= 1 and a nonnegative parameter count")
    gates: list[tuple] = []
    for p in range(n_params):
        gates.append(("ry", p % n, p))
        if p % n == n - 1 and n > 1:
            gates.append(("ladder",))
    return gates


def hea_apply(psi: np.ndarray, thetas: np.ndarray, n: int) -> np.ndarray:
    """Apply the ansatz with ``len(thetas)`` rotation parameters."""
    psi = np.asarray(psi, dtype=complex)
    for g in schedule(n, len(thetas)):
        if g[0] == "ry":
            psi = apply_ry(psi, g[1], thetas[g[2]], n)
        else:
            psi = _ladder(psi, n)
    return psi


def local_x_observable(psi: np.ndarray, n: int, qubits=(0, 1)) -> np.ndarray:
    """``(1/|Q|) sum_{q in Q} X_q psi``."""
    out = np.zeros_like(psi)
    for q in qubits:
        out += _split(psi, q, n)[:, ::-1].reshape(psi.shape)
    return out / len(qubits)


def hea_losses(thetas, states: np.ndarray, n: int) -> np.ndarray:
    """Per-state ``<psi|U^dagger O U|psi>`` with ``O = (X_0 + X_1)/2``; states are rows."""
    phi = hea_apply(np.asarray(states, dtype=complex).T, thetas, n)
    return np.real(np.sum(phi.conj() * local_x_observable(phi, n), axis=0))


def hea_loss_and_grad(thetas, states: np.ndarray, weights: np.ndarray, n: int):
    """Weighted loss and adjoint gradient for the baseline classifier."""
    thetas = np.asarray(thetas, dtype=float)
    phi = hea_apply(np.asarray(states, dtype=complex).T, thetas, n)
    lam = local_x_observable(phi, n)
    loss = float(np.dot(weights, np.real(np.sum(phi.conj() * lam, axis=0))))
    grad = np.zeros(len(thetas))
    for g in reversed(schedule(n, len(thetas))):
        if g[0] == "ry":
            _, q, p = g
            # d/dtheta <O> = 2 Im <lam| (Y/2) |phi>
            yphi = apply_y(phi, q, n)
            grad[p] = np.dot(weights, np.imag(np.sum(lam.conj() * yphi, axis=0)))
            phi = apply_ry(phi, q, -thetas[p], n)
            lam = apply_ry(lam, q, -thetas[p], n)
        else:
            phi = _ladder(phi, n, inverse=True)
            lam = _ladder(lam, n, inverse=True)
    return loss, grad
