"""Statevector simulation of S_n-equivariant circuits.

States are plain complex arrays of length ``2^n`` (or ``(2^n, B)`` batches with
states in columns).  Density matrices are accepted by :func:`evolve_density`
and :func:`expectation` for ``n <= 10``.

The dense routines here are the reference implementation.  Training and
depth sweeps default to the block-reduced engine in :mod:`snqnn.blocks`,
which gives identical numbers at a fraction of the cost.
"""
from __future__ import annotations

import dataclasses
import math
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from . import blocks
from .errors import CapacityError, ValidationError
from .ops import (
    DEFAULT_CYCLE,
    GeneratorId,
    ObservableId,
    apply_generator,
    apply_observable,
    hamming_weights,
    sum_zz_spectrum,
)
from .repsn import build_schur_basis, sigma_blocks, state_blocks, tetrahedral

NORM_TOL = 1e-10
DENSITY_MAX_QUBITS = 10


def num_qubits(dim: int) -> int:
    n = int(round(math.log2(dim))) if dim > 0 else -1
    if n < 1 or 2 ** n != dim:
        raise ValidationError(f"dimension {dim} is not a power of two")
    return n


def validate_state(psi, n: int | None = None) -> np.ndarray:
    """Return ``psi`` as a complex array after checking shape and norm."""
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim not in (1, 2):
        raise ValidationError("state must be a vector or a (2^n, B) batch")
    k = num_qubits(psi.shape[0])
    if n is not None and k != n:
        raise ValidationError(f"state has {k} qubits, expected {n}")
    norms = np.linalg.norm(psi, axis=0)
    if not np.all(np.abs(norms - 1) <= NORM_TOL):
        raise ValidationError("state is not normalized")
    return psi


@dataclasses.dataclass(frozen=True)
class Circuit:
    """Ordered layers ``exp(-i theta_l H_l)``; layer 0 acts first."""

    n: int
    layers: tuple[tuple[GeneratorId, float], ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("n must be >= 1")
        object.__setattr__(
            self, "layers",
            tuple((GeneratorId(g), float(t)) for g, t in self.layers),
        )

    @classmethod
    def cycled(cls, n: int, depth: int, thetas=None,
               cycle: Sequence[GeneratorId] = DEFAULT_CYCLE) -> "Circuit":
        """``depth`` layers cycling through ``cycle``; zero angles by default."""
        gens = cycle_generators(depth, cycle)
        thetas = np.zeros(depth) if thetas is None else np.asarray(thetas, dtype=float)
        if thetas.shape != (depth,):
            raise ValidationError(f"expected {depth} angles, got shape {thetas.shape}")
        return cls(n, tuple(zip(gens, thetas)))

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def generators(self) -> tuple[GeneratorId, ...]:
        return tuple(g for g, _ in self.layers)

    @property
    def thetas(self) -> np.ndarray:
        return np.array([t for _, t in self.layers])

    def with_thetas(self, thetas) -> "Circuit":
        thetas = np.asarray(thetas, dtype=float)
        if thetas.shape != (self.depth,):
            raise ValidationError("angle vector length does not match depth")
        return Circuit(self.n, tuple(zip(self.generators, thetas)))


def cycle_generators(depth: int, cycle: Sequence[GeneratorId] = DEFAULT_CYCLE):
    if depth < 0:
        raise ValidationError("depth must be nonnegative")
    return tuple(cycle[l % len(cycle)] for l in range(depth))


@dataclasses.dataclass(frozen=True)
class LabeledDataset:
    """Pure states (rows), labels in {-1, +1}, and loss weights ``c_i``."""

    n: int
    states: np.ndarray
    labels: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        states = np.asarray(self.states, dtype=complex).reshape(-1, 2 ** self.n) \
            if np.size(self.states) else np.zeros((0, 2 ** self.n), dtype=complex)
        labels = np.asarray(self.labels, dtype=int).reshape(-1)
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if not (len(states) == len(labels) == len(weights)):
            raise ValidationError("states, labels and weights differ in length")
        if len(states) and np.any(np.abs(np.abs(labels) - 1) > 0):
            raise ValidationError("labels must be -1 or +1")
        if len(states):
            validate_state(states.T, self.n)
        for name, arr in (("states", states), ("labels", labels), ("weights", weights)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def hinge(cls, states, labels, n: int | None = None) -> "LabeledDataset":
        """Dataset with hinge weights ``c_i = -y_i / M``."""
        states = np.atleast_2d(np.asarray(states, dtype=complex))
        labels = np.asarray(labels, dtype=int).reshape(-1)
        if n is None:
            n = num_qubits(states.shape[1])
        elif states.shape[1] != 2 ** n:
            raise ValidationError("states do not match n")
        M = len(labels)
        weights = -labels / M if M else np.zeros(0)
        return cls(n, states, labels, weights)

    def __len__(self) -> int:
        return len(self.labels)

    def subset(self, idx) -> "LabeledDataset":
        """Rows ``idx`` re-weighted as a fresh hinge dataset."""
        return LabeledDataset.hinge(self.states[idx], self.labels[idx], self.n)

    def blocks(self) -> list[dict[int, np.ndarray]]:
        """Per-state irrep blocks ``S_lambda``."""
        basis = build_schur_basis(self.n)
        V = state_blocks(basis, self.states.T)
        return [
            {m: v[:, :, i] @ v[:, :, i].conj().T for m, v in V.items()}
            for i in range(len(self))
        ]

    def sigma(self) -> dict[int, np.ndarray]:
        """Weighted blocks ``sum_i c_i S_lambda(rho_i)``."""
        basis = build_schur_basis(self.n)
        return sigma_blocks(basis, self.states, self.weights)


def _check_n(circuit: Circuit, n: int):
    if circuit.n != n:
        raise ValidationError(f"circuit has {circuit.n} qubits but data has {n}")


def _rotate_all(psi: np.ndarray, n: int, theta, y: bool) -> np.ndarray:
    """``prod_j exp(-i a P_j)`` with ``a = theta / n`` and ``P = X`` or ``Y``."""
    a = np.asarray(theta, dtype=float) / n
    c, s = np.cos(a), np.sin(a)
    shape = psi.shape
    batch = shape[1:]
    for j in range(n):
        t = psi.reshape((2 ** j, 2, 2 ** (n - j - 1)) + batch)
        a0, a1 = t[:, 0], t[:, 1]
        if y:
            # exp(-i a Y) = [[c, -s], [s, c]]
            new = np.stack([c * a0 - s * a1, s * a0 + c * a1], axis=1)
        else:
            # exp(-i a X) = [[c, -is], [-is, c]]
            new = np.stack([c * a0 - 1j * s * a1, c * a1 - 1j * s * a0], axis=1)
        psi = new.reshape(shape)
    return psi


def apply_layer(psi, gen: GeneratorId, theta, n: int | None = None) -> np.ndarray:
    """``exp(-i theta H) psi``.

    ``psi`` may be a ``(2^n, B)`` batch, in which case ``theta`` may be a
    length-``B`` vector of per-column angles.  SumX and SumY factor into
    commuting single-qubit rotations; SumZZ is diagonal in the computational
    basis and applied as a phase indexed by Hamming weight.
    """
    psi = np.asarray(psi, dtype=complex)
    if n is None:
        n = num_qubits(psi.shape[0])
    gen = GeneratorId(gen)
    if gen is GeneratorId.SUM_ZZ:
        norm = 2 / (n * (n - 1)) if n > 1 else 0.0
        e = norm * sum_zz_spectrum(n, hamming_weights(n))
        theta = np.asarray(theta, dtype=float)
        phase = np.exp(-1j * np.multiply.outer(e, theta))
        if psi.ndim == 2 and phase.ndim == 1:
            phase = phase[:, None]
        return phase * psi
    return _rotate_all(psi, n, theta, gen is GeneratorId.SUM_Y)


def evolve(circuit: Circuit, psi) -> np.ndarray:
    """Apply every layer of ``circuit`` to a state or batch of states."""
    psi = np.asarray(psi, dtype=complex)
    if psi.shape[0] != 2 ** circuit.n:
        raise ValidationError("state dimension does not match circuit")
    for gen, theta in circuit.layers:
        psi = apply_layer(psi, gen, theta, circuit.n)
    return psi


def evolve_density(circuit: Circuit, rho) -> np.ndarray:
    """``U rho U^dagger`` by direct conjugation; limited to ``n <= 10``."""
    if circuit.n > DENSITY_MAX_QUBITS:
        raise CapacityError(f"density matrices limited to n <= {DENSITY_MAX_QUBITS}")
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2 ** circuit.n,) * 2:
        raise ValidationError("density matrix shape does not match circuit")
    left = evolve(circuit, rho)
    return evolve(circuit, left.conj().T).conj().T


def expectation(state, obs: ObservableId) -> float | np.ndarray:
    """``<psi|O|psi>`` for a state, a ``(2^n, B)`` batch, or ``Tr[rho O]``."""
    state = np.asarray(state, dtype=complex)
    obs = ObservableId(obs)
    n = num_qubits(state.shape[0])
    if state.ndim == 2 and state.shape[0] == state.shape[1] and _looks_like_density(state):
        if n > DENSITY_MAX_QUBITS:
            raise CapacityError(f"density matrices limited to n <= {DENSITY_MAX_QUBITS}")
        return float(np.real(np.trace(apply_observable(obs, state, n))))
    vals = np.real(np.sum(state.conj() * apply_observable(obs, state, n), axis=0))
    return float(vals) if state.ndim == 1 else vals


def _looks_like_density(A: np.ndarray) -> bool:
    return bool(
        np.allclose(A, A.conj().T, atol=1e-10)
        and abs(np.trace(A) - 1) < 1e-8
    )


def per_state_losses(circuit: Circuit, data: LabeledDataset, obs: ObservableId) -> np.ndarray:
    """``ell_theta(rho_i)`` for every state in the dataset."""
    _check_n(circuit, data.n)
    if len(data) == 0:
        return np.zeros(0)
    return np.atleast_1d(expectation(evolve(circuit, data.states.T), obs))


def empirical_loss(circuit: Circuit, data: LabeledDataset, obs: ObservableId) -> float:
    """``sum_i c_i ell_theta(rho_i)``."""
    return float(np.dot(data.weights, per_state_losses(circuit, data, obs)))


def gradient(circuit: Circuit, data: LabeledDataset, obs: ObservableId) -> np.ndarray:
    """Analytic gradient of :func:`empirical_loss` by an adjoint sweep."""
    _check_n(circuit, data.n)
    L, n = circuit.depth, circuit.n
    grad = np.zeros(L)
    if len(data) == 0 or L == 0:
        return grad
    phi = evolve(circuit, data.states.T)
    lam = apply_observable(ObservableId(obs), phi, n)
    for l in range(L - 1, -1, -1):
        gen, theta = circuit.layers[l]
        hphi = apply_generator(gen, phi, n)
        # d ell / d theta_l = 2 Im <lam|H_l|phi> in the frame after layer l
        grad[l] = 2 * np.dot(data.weights, np.imag(np.sum(lam.conj() * hphi, axis=0)))
        phi = apply_layer(phi, gen, -theta, n)
        lam = apply_layer(lam, gen, -theta, n)
    return grad


def state_derivatives(circuit: Circuit, psi) -> tuple[np.ndarray, np.ndarray]:
    """Output state and ``|d_j psi>`` for every layer, as columns.

    Each derivative inserts ``-i H_j`` after layer ``j`` and propagates the
    result through the remaining layers.
    """
    psi = validate_state(psi, circuit.n)
    n = circuit.n
    D = np.zeros((2 ** n, 0), dtype=complex)
    for gen, theta in circuit.layers:
        psi = apply_layer(psi, gen, theta, n)
        if D.shape[1]:
            D = apply_layer(D, gen, theta, n)
        D = np.column_stack([D, -1j * apply_generator(gen, psi, n)])
    return psi, D


def qfim(circuit: Circuit, psi) -> np.ndarray:
    """Quantum Fisher information ``4 Re[<d_j|d_k> - <d_j|psi><psi|d_k>]``."""
    out, D = state_derivatives(circuit, psi)
    overlaps = D.conj().T @ out
    F = 4 * np.real(D.conj().T @ D - np.outer(overlaps, overlaps.conj()))
    return (F + F.T) / 2


def qfim_rank(F, tol: float = 1e-8) -> int:
    """Number of eigenvalues above ``tol`` times the largest."""
    F = np.asarray(F, dtype=float)
    if F.size == 0:
        return 0
    ev = np.linalg.eigvalsh((F + F.T) / 2)
    top = ev.max()
    if top <= 0:
        return 0
    return int(np.sum(ev > tol * top))


@dataclasses.dataclass(frozen=True)
class OverparamResult:
    """Rank sweep along a fixed generator cycle."""

    l_ovp: int
    ranks: np.ndarray
    saturated: bool

    @property
    def max_rank(self) -> int:
        return int(self.ranks[-1]) if len(self.ranks) else 0


def rank_sweep(F: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Ranks of the leading ``L x L`` submatrices for ``L = 1..len(F)``.

    The QFIM of the first ``L`` layers equals the leading block of the full
    QFIM: trailing layers act as a fixed unitary and leave overlaps unchanged.
    """
    return np.array([qfim_rank(F[:L, :L], tol) for L in range(1, len(F) + 1)])


def find_overparam_depth(
    psi, generator_cycle: Sequence[GeneratorId] = DEFAULT_CYCLE, l_max: int = 50,
    rng: np.random.Generator | None = None, tol: float = 1e-8,
) -> OverparamResult:
    """Smallest depth at which the QFIM rank reaches its value at ``l_max``.

    ``psi`` may be a single state or a ``(2^n, M)`` batch, in which case the
    per-state QFIMs are averaged.  ``saturated`` is False when the maximal
    rank is first reached only at ``l_max`` itself.
    """
    if l_max < 1:
        raise ValidationError("l_max must be >= 1")
    rng = np.random.default_rng() if rng is None else rng
    psi = validate_state(psi)
    n = num_qubits(psi.shape[0])
    cols = psi if psi.ndim == 2 else psi[:, None]
    gens = cycle_generators(l_max, generator_cycle)
    thetas = rng.uniform(-np.pi, np.pi, l_max)
    basis = build_schur_basis(n)
    V = state_blocks(basis, cols)
    sb = [{m: v[:, :, i] @ v[:, :, i].conj().T for m, v in V.items()}
          for i in range(cols.shape[1])]
    F = blocks.qfim(gens, thetas, n, sb)
    ranks = rank_sweep(F, tol)
    l_ovp = int(np.argmax(ranks == ranks[-1])) + 1
    return OverparamResult(l_ovp, ranks, saturated=l_ovp < l_max or l_max == 1)


@dataclasses.dataclass(frozen=True)
class OptConfig:
    """Optimizer settings; ``method`` is ``"L-BFGS-B"`` or ``"adam"``."""

    method: str = "L-BFGS-B"
    maxiter: int = 10_000
    gtol: float = 1e-8
    learning_rate: float = 0.05
    fallback: bool = True

    def __post_init__(self):
        if self.method not in ("L-BFGS-B", "adam"):
            raise ValidationError(f"unknown optimizer {self.method!r}")
        if self.maxiter < 1 or self.gtol <= 0:
            raise ValidationError("maxiter and gtol must be positive")


@dataclasses.dataclass(frozen=True)
class TrainResult:
    thetas: np.ndarray
    loss_trace: np.ndarray
    loss: float
    accuracy: float
    converged: bool
    status: str
    iterations: int


def _block_objective(circuit: Circuit, data: LabeledDataset, obs: ObservableId):
    gens = circuit.generators
    sigma = data.sigma()

    def f(theta):
        return blocks.loss_and_grad(gens, theta, obs, circuit.n, sigma)

    return f


def _dense_objective(circuit: Circuit, data: LabeledDataset, obs: ObservableId):
    def f(theta):
        c = circuit.with_thetas(theta)
        return empirical_loss(c, data, obs), gradient(c, data, obs)

    return f


def predict(circuit: Circuit, data: LabeledDataset, obs: ObservableId,
            backend: str = "blocks") -> np.ndarray:
    """``ell_theta(rho_i)`` for every state; the sign is the predicted label."""
    _check_n(circuit, data.n)
    if backend == "dense":
        return per_state_losses(circuit, data, obs)
    if len(data) == 0:
        return np.zeros(0)
    heis = blocks.heisenberg_observable(circuit.generators, circuit.thetas, obs, circuit.n)
    return blocks.batch_expectations(heis, blocks.pack_states(data.blocks(), circuit.n))


def accuracy(predictions: np.ndarray, labels: np.ndarray) -> float:
    if len(labels) == 0:
        return float("nan")
    return float(np.mean(np.where(predictions >= 0, 1, -1) == labels))


def _adam(f: Callable, x0: np.ndarray, cfg: OptConfig, trace: list):
    x = x0.copy()
    m = np.zeros_like(x)
    v = np.zeros_like(x)
    b1, b2, eps = 0.9, 0.999, 1e-12
    for t in range(1, cfg.maxiter + 1):
        val, g = f(x)
        trace.append(val)
        if not np.isfinite(val):
            return x, False, "non-finite loss", t
        if np.max(np.abs(g)) < cfg.gtol:
            return x, True, "gradient below tolerance", t
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        x = x - cfg.learning_rate * (m / (1 - b1 ** t)) / (np.sqrt(v / (1 - b2 ** t)) + eps)
    return x, False, "iteration limit reached", cfg.maxiter


def train(
    circuit: Circuit, data: LabeledDataset, obs: ObservableId,
    opt_config: OptConfig | None = None, backend: str = "blocks",
) -> TrainResult:
    """Minimize the empirical loss starting from ``circuit``'s angles.

    The returned trace is the best loss seen so far after each objective
    evaluation, so it never increases.  Failures are reported in ``status``.
    """
    cfg = opt_config or OptConfig()
    _check_n(circuit, data.n)
    obs = ObservableId(obs)
    if backend not in ("blocks", "dense"):
        raise ValidationError(f"unknown backend {backend!r}")
    obj = (_block_objective if backend == "blocks" else _dense_objective)(circuit, data, obs)
    raw: list[float] = []
    best = {"x": circuit.thetas.copy(), "f": np.inf}

    def tracked(theta):
        val, g = obj(theta)
        if np.isfinite(val) and val < best["f"]:
            best["f"], best["x"] = val, np.array(theta, copy=True)
        return val, g

    x0 = circuit.thetas.copy()
    converged, status, nit = False, "", 0
    if cfg.method == "L-BFGS-B" and circuit.depth:
        def fun(theta):
            val, g = tracked(theta)
            raw.append(val)
            return val, g
        try:
            res = minimize(fun, x0, jac=True, method="L-BFGS-B",
                           options={"maxiter": cfg.maxiter, "gtol": cfg.gtol,
                                    "ftol": 1e-15, "maxfun": 4 * cfg.maxiter})
            converged, status, nit = bool(res.success), str(res.message), int(res.nit)
        except (FloatingPointError, ValueError) as exc:
            status = f"optimizer failed: {exc}"
        if not np.isfinite(best["f"]) and cfg.fallback:
            status += "; falling back to adam"
            _, converged, msg, nit = _adam(tracked, x0, cfg, raw)
            status += f"; {msg}"
    elif circuit.depth:
        _, converged, status, nit = _adam(tracked, x0, cfg, raw)
    else:
        raw.append(obj(x0)[0])
        best["f"], converged, status = raw[0], True, "no parameters"
    trace = np.minimum.accumulate(np.where(np.isfinite(raw), raw, np.inf))
    theta_star = best["x"]
    final = circuit.with_thetas(theta_star)
    acc = accuracy(predict(final, data, obs, backend), data.labels)
    return TrainResult(theta_star, trace, float(best["f"]), acc, converged, status, nit)


def generalization_error(thetas, gens, train_set: LabeledDataset, test_set: LabeledDataset,
                         obs: ObservableId) -> float:
    """``|L(theta) - L_hat(theta)|`` with the test set standing in for ``L``."""
    circuit = Circuit(train_set.n, tuple(zip(gens, thetas)))
    return abs(empirical_loss(circuit, test_set, obs) - empirical_loss(circuit, train_set, obs))


@dataclasses.dataclass(frozen=True)
class GeneralizationReport:
    n: int
    M: int
    depth: int
    test_size: int
    delta: float
    errors: np.ndarray
    normalized: np.ndarray
    loss_std: float
    percentile: float
    bound: float

    def as_row(self) -> dict:
        return {
            "n": self.n, "M": self.M, "depth": self.depth, "test_size": self.test_size,
            "percentile": self.percentile, "bound": self.bound, "loss_std": self.loss_std,
        }


def generalization_bound(n: int, M: int, delta: float = 0.1) -> float:
    """``sqrt(Te_{n+1} / M) + sqrt(log(1/delta) / M)``."""
    if M < 1:
        raise ValidationError("M must be >= 1")
    return math.sqrt(tetrahedral(n) / M) + math.sqrt(math.log(1 / delta) / M)


def generalization_experiment(
    n: int, M: int, depth: int | None = None, test_size: int | None = None,
    trials: int = 200, rng: np.random.Generator | None = None,
    obs: ObservableId = ObservableId.SUM_XX, delta: float = 0.1,
    p: float = 0.4, phi: float = np.pi,
    cycle: Sequence[GeneratorId] = DEFAULT_CYCLE,
) -> GeneralizationReport:
    """Generalization error of random-parameter EQNNs on the connectivity task.

    For each trial a fresh train set of size ``M`` and test set are drawn,
    angles are sampled uniformly, and ``|L_test - L_train|`` is recorded.
    Errors are normalized by the standard deviation of ``ell_theta(rho)``
    pooled over all sampled angles and states, and the ``1 - delta``
    percentile is reported next to the bound.
    """
    from .states import classification_dataset

    if M < 1:
        raise ValidationError("M must be >= 1")
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    rng = np.random.default_rng() if rng is None else rng
    te = tetrahedral(n)
    depth = te if depth is None else depth
    test_size = 2 * te if test_size is None else test_size
    gens = cycle_generators(depth, cycle)
    errors = np.zeros(trials)
    pooled = []
    for t in range(trials):
        train_set = classification_dataset(n, M, rng, p=p, phi=phi)
        test_set = classification_dataset(n, test_size, rng, p=p, phi=phi)
        thetas = rng.uniform(-np.pi, np.pi, depth)
        heis = blocks.heisenberg_observable(gens, thetas, obs, n)
        l_tr = blocks.batch_expectations(heis, blocks.pack_states(train_set.blocks(), n))
        l_te = blocks.batch_expectations(heis, blocks.pack_states(test_set.blocks(), n))
        errors[t] = abs(np.dot(test_set.weights, l_te) - np.dot(train_set.weights, l_tr))
        pooled.append(l_tr)
        pooled.append(l_te)
    std = float(np.std(np.concatenate(pooled), ddof=1))
    normalized = errors / std if std > 0 else np.zeros_like(errors)
    return GeneralizationReport(
        n=n, M=M, depth=depth, test_size=test_size, delta=delta,
        errors=errors, normalized=normalized, loss_std=std,
        percentile=float(np.percentile(normalized, 100 * (1 - delta))),
        bound=generalization_bound(n, M, delta),
    )
