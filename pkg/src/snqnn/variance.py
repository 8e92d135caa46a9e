"""Gradient-variance prediction for S_n-equivariant circuits and its empirical check.

For circuits deep enough to form independent 2-designs on every irrep block,

    Var_theta[d_mu L] = sum_lambda 2 d / (d^2 - 1)^2 * Delta(H_lambda) Delta(O_lambda) Delta(S_lambda)

with ``Delta(B) = Tr[B^2] - Tr[B]^2 / dim B`` and ``S_lambda = sum_nu sigma_lambda^nu``.
Blocks with ``d = 1`` contribute nothing.
"""
from __future__ import annotations

import csv
import dataclasses
import enum
import io
import math
from typing import Callable, Mapping, Sequence

import numpy as np

from . import blocks
from .errors import ValidationError
from .ops import GeneratorId, ObservableId, apply_generator, apply_observable
from .qsim import LabeledDataset, apply_layer
from .repsn import SchurBasis, build_schur_basis, isotypic_blocks, multiplicity, sigma_blocks

DENSE_MAX_QUBITS = 10


def delta(A, B=None) -> float:
    """``Tr[AB] - Tr[A] Tr[B] / dim``; ``Delta(A) = delta(A, A)``."""
    A = np.asarray(A)
    B = A if B is None else np.asarray(B)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape != B.shape:
        raise ValidationError("delta needs square matrices of equal dimension")
    d = A.shape[0]
    return float(np.real(np.sum(A.T * B) - np.trace(A) * np.trace(B) / d))


class OpClass(str, enum.Enum):
    ONE_BODY = "OneBody"
    TWO_BODY = "TwoBody"
    GLOBAL_STRING = "GlobalString"
    K_LOCAL = "KLocal"


def krawtchouk(k: int, w: int, n: int) -> int:
    """Binary Krawtchouk polynomial ``sum_l C(n-w, k-l) C(w, l) (-1)^l``."""
    if not (0 <= k <= n and 0 <= w <= n):
        raise ValidationError("need 0 <= k, w <= n")
    return sum(
        math.comb(n - w, k - l) * math.comb(w, l) * (-1) ** l for l in range(k + 1)
    )


def _m_from_d(d: int, n: int) -> int:
    if n < 1 or not 1 <= d <= n + 1 or (n + 1 - d) % 2:
        raise ValidationError(f"d={d} is not an irrep dimension for n={n}")
    return (n + 1 - d) // 2


def analytic_delta(op_class, d: int, n: int, k: int | None = None) -> float:
    """Closed-form ``Delta`` of an unnormalized equivariant sum on a ``d``-dim block.

    ``OneBody`` is ``sum_j chi_j``, ``TwoBody`` is ``sum_{j<k} chi_j chi_k``,
    ``GlobalString`` is ``prod_j chi_j`` and ``KLocal`` is the sum over all
    ``k``-subsets of ``prod chi``, for any single-qubit Pauli ``chi``.
    """
    op_class = OpClass(op_class)
    m = _m_from_d(d, n)
    if op_class is OpClass.ONE_BODY:
        return 2 * math.comb(d + 1, 3)
    if op_class is OpClass.TWO_BODY:
        return 8 / 3 * math.comb(d + 2, 5)
    if op_class is OpClass.GLOBAL_STRING:
        return (d * d - 1 + n % 2) / d
    if k is None or not 0 <= k <= n:
        raise ValidationError("KLocal needs 0 <= k <= n")
    vals = np.array([krawtchouk(k, w, n) for w in range(m, n - m + 1)], dtype=float)
    return float(np.sum(vals ** 2) - np.sum(vals) ** 2 / d)


def _generator_class(gen: GeneratorId, n: int) -> tuple[OpClass, float]:
    if gen in (GeneratorId.SUM_X, GeneratorId.SUM_Y):
        return OpClass.ONE_BODY, 1 / n
    return OpClass.TWO_BODY, (2 / (n * (n - 1)) if n > 1 else 0.0)


def _observable_class(obs: ObservableId, n: int) -> tuple[OpClass, float]:
    if obs is ObservableId.SUM_X:
        return OpClass.ONE_BODY, 1 / n
    if obs is ObservableId.SUM_XX:
        return OpClass.TWO_BODY, (2 / (n * (n - 1)) if n > 1 else 0.0)
    return OpClass.GLOBAL_STRING, 1.0


def generator_delta(gen: GeneratorId, n: int, d: int) -> float:
    cls, s = _generator_class(GeneratorId(gen), n)
    return s * s * analytic_delta(cls, d, n)


def observable_delta(obs: ObservableId, n: int, d: int) -> float:
    cls, s = _observable_class(ObservableId(obs), n)
    return s * s * analytic_delta(cls, d, n)


@dataclasses.dataclass(frozen=True)
class IrrepContribution:
    m: int
    d_lambda: int
    m_lambda: int
    delta_h: float
    delta_o: float
    delta_sigma: float
    prefactor: float
    contribution: float


@dataclasses.dataclass(frozen=True)
class EmpiricalVariance:
    mean: float
    variance: float
    se_mean: float
    se_variance: float
    samples: int


@dataclasses.dataclass(frozen=True)
class VarianceReport:
    n: int
    generator: GeneratorId
    observable: ObservableId
    records: tuple[IrrepContribution, ...]
    empirical: EmpiricalVariance | None = None

    @property
    def total(self) -> float:
        return float(sum(r.contribution for r in self.records))

    def with_empirical(self, emp: EmpiricalVariance) -> "VarianceReport":
        return dataclasses.replace(self, empirical=emp)

    CSV_COLUMNS = ("n", "lambda_m", "d_lambda", "m_lambda", "delta_H", "delta_O",
                   "delta_sigma", "prefactor", "contribution", "total")

    def rows(self) -> list[dict]:
        total = self.total
        return [
            {"n": self.n, "lambda_m": r.m, "d_lambda": r.d_lambda, "m_lambda": r.m_lambda,
             "delta_H": r.delta_h, "delta_O": r.delta_o, "delta_sigma": r.delta_sigma,
             "prefactor": r.prefactor, "contribution": r.contribution, "total": total}
            for r in self.records
        ]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=self.CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(self.rows())
        return buf.getvalue()


def _basis_and_n(basis) -> tuple[SchurBasis | None, int]:
    if isinstance(basis, SchurBasis):
        return basis, basis.n
    if isinstance(basis, (int, np.integer)):
        return None, int(basis)
    raise ValidationError("expected a SchurBasis or a qubit count")


def sigma_to_blocks(sigma, basis) -> dict[int, np.ndarray]:
    """Normalize the accepted ``sigma`` forms to ``{m: S_lambda}``.

    Accepts a block dict, a :class:`LabeledDataset`, a pure state vector, or
    a dense ``2^n x 2^n`` Hermitian matrix (``n <= 10``).
    """
    B, n = _basis_and_n(basis)
    if isinstance(sigma, Mapping):
        if set(sigma) != set(range(n // 2 + 1)):
            raise ValidationError("block dict does not match n")
        return {m: np.asarray(v) for m, v in sigma.items()}
    if isinstance(sigma, LabeledDataset):
        if sigma.n != n:
            raise ValidationError("dataset n does not match basis")
        return sigma.sigma()
    A = np.asarray(sigma)
    if A.shape[0] != 2 ** n:
        raise ValidationError("sigma dimension does not match basis")
    B = B or build_schur_basis(n)
    if A.ndim == 1:
        return sigma_blocks(B, A[None, :])
    if A.ndim != 2 or A.shape[1] != A.shape[0]:
        raise ValidationError("sigma must be a square matrix")
    if n > DENSE_MAX_QUBITS:
        raise ValidationError(f"dense sigma limited to n <= {DENSE_MAX_QUBITS}")
    if not np.allclose(A, A.conj().T, atol=1e-10):
        raise ValidationError("sigma must be Hermitian")
    return {lam.m: isotypic_blocks(B, A, lam.m).sum(axis=0) for lam in B.irreps}


def predicted_variance(gen: GeneratorId, obs: ObservableId, sigma, basis) -> VarianceReport:
    """Per-irrep prediction of ``Var_theta[d_mu L]`` for generator ``gen``."""
    _, n = _basis_and_n(basis)
    S = sigma_to_blocks(sigma, basis)
    return report_from_deltas(gen, obs, n, {m: delta(S[m]) for m in range(n // 2 + 1)})


def report_from_deltas(
    gen: GeneratorId, obs: ObservableId, n: int, delta_sigma: Mapping[int, float]
) -> VarianceReport:
    """Assemble the prediction from precomputed ``Delta(S_lambda)`` values.

    The prediction is linear in these values, so ensemble averages of
    ``Delta(S_lambda)`` give the ensemble-averaged variance.
    """
    gen, obs = GeneratorId(gen), ObservableId(obs)
    records = []
    for m in range(n // 2 + 1):
        d = n - 2 * m + 1
        dh = generator_delta(gen, n, d)
        do = observable_delta(obs, n, d)
        ds = float(delta_sigma[m])
        if d == 1:
            pref, contrib = 0.0, 0.0
        else:
            pref = 2 * d / (d * d - 1) ** 2
            contrib = pref * dh * do * ds
        records.append(IrrepContribution(m, d, multiplicity(n, m), dh, do, ds, pref, contrib))
    return VarianceReport(n, gen, obs, tuple(records))


def _jackknife(x: np.ndarray) -> EmpiricalVariance:
    N = len(x)
    mean = float(np.mean(x))
    var = float(np.var(x, ddof=1))
    dev2 = (x - mean) ** 2
    # leave-one-out sample variances in closed form
    loo = ((N - 1) * var - N / (N - 1) * dev2) / (N - 2)
    se_var = math.sqrt((N - 1) / N * np.sum((loo - loo.mean()) ** 2))
    return EmpiricalVariance(mean, var, math.sqrt(var / N), se_var, N)


def _dense_gradient_samples(gens, mu, thetas, obs, n, states, weights, chunk_cols=1 << 14):
    """``d_mu L`` per parameter row by batched statevector simulation."""
    S, L = thetas.shape
    M = len(states)
    out = np.zeros(S)
    per = max(1, chunk_cols // max(M, 1) // max(1, 2 ** n // 64))
    for start in range(0, S, per):
        th = thetas[start:start + per]
        s = len(th)
        # columns ordered (sample, state)
        psi = np.tile(states.T, (1, s))
        ang = np.repeat(th, M, axis=0)
        for l in range(mu + 1):
            psi = apply_layer(psi, gens[l], ang[:, l], n)
        hpsi = apply_generator(gens[mu], psi, n)
        phi, hphi = psi, hpsi
        for l in range(mu + 1, L):
            phi = apply_layer(phi, gens[l], ang[:, l], n)
            hphi = apply_layer(hphi, gens[l], ang[:, l], n)
        vals = 2 * np.imag(np.sum(apply_observable(obs, phi, n).conj() * hphi, axis=0))
        out[start:start + s] = vals.reshape(s, M) @ weights
    return out


def empirical_variance(
    mu: int, gens: Sequence[GeneratorId], data: LabeledDataset, obs: ObservableId,
    samples: int, rng: np.random.Generator, backend: str = "auto",
    return_samples: bool = False,
):
    """Monte Carlo mean and variance of ``d_mu L`` over uniform angles in ``[-pi, pi]``.

    ``backend`` is ``"dense"`` (statevector, ``n <= 10``), ``"blocks"`` or
    ``"auto"``.  Standard errors come from the jackknife.
    """
    if samples < 100:
        raise ValidationError("need at least 100 samples")
    gens = tuple(GeneratorId(g) for g in gens)
    if not 0 <= mu < len(gens):
        raise ValidationError("generator position out of range")
    obs = ObservableId(obs)
    n = data.n
    if backend == "auto":
        backend = "dense" if n <= 6 else "blocks"
    thetas = rng.uniform(-np.pi, np.pi, size=(samples, len(gens)))
    if backend == "dense":
        if n > DENSE_MAX_QUBITS:
            raise ValidationError(f"dense backend limited to n <= {DENSE_MAX_QUBITS}")
        vals = _dense_gradient_samples(gens, mu, thetas, obs, n, data.states, data.weights)
    elif backend == "blocks":
        vals = np.zeros(samples)
        sigma = data.sigma()
        for start in range(0, samples, 256):
            vals[start:start + 256] = blocks.gradient_samples(
                gens, mu, thetas[start:start + 256], obs, n, sigma)
    else:
        raise ValidationError(f"unknown backend {backend!r}")
    est = _jackknife(vals)
    return (est, vals) if return_samples else est


def haar_expected_delta(m: int, n: int) -> float:
    """``E[Delta(S_lambda)]`` for a Haar-random pure state: ``m_lambda (d^2 - 1) / (D (D + 1))``."""
    if not 0 <= m <= n // 2:
        raise ValidationError("invalid irrep")
    d = n - 2 * m + 1
    D = 2 ** n
    return multiplicity(n, m) * (d * d - 1) / (D * (D + 1))


def state_deltas(basis: SchurBasis, psi) -> dict[int, float]:
    """``Delta(S_lambda)`` of a single pure state for every irrep."""
    S = sigma_blocks(basis, np.asarray(psi)[None, :] if np.ndim(psi) == 1 else psi)
    return {m: delta(v) for m, v in S.items()}


def ensemble_delta_bound(states, weights, m: int, basis: SchurBasis) -> float:
    """``(sum_i |c_i| Delta(S_lambda(rho_i))^{1/2})^2``, an upper bound on ``Delta(S_lambda(sigma))``."""
    states = np.atleast_2d(np.asarray(states))
    weights = np.asarray(weights, dtype=float)
    if len(states) != len(weights):
        raise ValidationError("states and weights differ in length")
    if not np.all(np.isfinite(weights)):
        raise ValidationError("weights must be finite")
    total = 0.0
    for psi, c in zip(states, weights):
        S = sigma_blocks(basis, psi[None, :])[m]
        total += abs(c) * math.sqrt(max(delta(S), 0.0))
    return total ** 2


def hamming_symmetric_weight(x, k: int, n: int) -> float:
    """``<x|P_sym|x>`` for the weight-``k`` encoding of ``x`` (exact)."""
    from .states import hamming_encode

    psi = hamming_encode(x, k, n)
    basis = build_schur_basis(n)
    V = basis.matrix[:, basis.isotypic(0)]
    return float(np.sum(np.abs(V.T @ psi) ** 2))


def hamming_symmetric_bounds(k: int, n: int) -> dict[str, float]:
    """Candidate lower bounds on ``<x|P_sym|x>`` for nonnegative ``x``.

    ``exact`` is ``k!(n-k)!/n! = 1/C(n, k)``, attained by one-hot ``x``;
    ``max_factorial`` is the weaker ``max(k!, (n-k)!)/n!``.
    """
    return {
        "exact": 1 / math.comb(n, k),
        "max_factorial": max(math.factorial(k), math.factorial(n - k)) / math.factorial(n),
    }


@dataclasses.dataclass(frozen=True)
class FitConfig:
    samples_per_n: int = 20
    seed: int = 0
    aic_margin: float = 2.0
    z_threshold: float = 2.0


@dataclasses.dataclass(frozen=True)
class LineFit:
    intercept: float
    slope: float
    slope_se: float
    rss: float
    aic: float


@dataclasses.dataclass(frozen=True)
class TrainabilityResult:
    label: str
    ns: tuple[int, ...]
    max_delta: tuple[float, ...]
    poly: LineFit | None
    exp: LineFit | None
    degenerate: bool = False

    @property
    def delta_aic(self) -> float:
        if self.poly is None or self.exp is None:
            return float("nan")
        return self.poly.aic - self.exp.aic


def _ols(x: np.ndarray, y: np.ndarray) -> LineFit:
    X = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    N = len(y)
    rss = float(resid @ resid)
    dof = max(N - 2, 1)
    cov = rss / dof * np.linalg.inv(X.T @ X)
    # floor keeps the AIC finite for exact fits
    aic = N * math.log(max(rss, 1e-300) / N) + 4
    return LineFit(float(coef[0]), float(coef[1]), float(math.sqrt(max(cov[1, 1], 0.0))), rss, aic)


def classify_from_deltas(ns, max_delta, cfg: FitConfig | None = None) -> TrainabilityResult:
    """Apply the AIC rule to ``max_lambda Delta`` as a function of ``n``.

    Two models are fitted to ``log Delta``: ``a + b log n`` (polynomial) and
    ``a + b n`` (exponential).  Untrainable when the exponential model wins by
    more than ``aic_margin`` and its decay is significant; Trainable when the
    polynomial model is at least as good or there is no significant decay;
    Inconclusive otherwise.
    """
    cfg = cfg or FitConfig()
    ns = np.asarray(ns, dtype=float)
    vals = np.asarray(max_delta, dtype=float)
    if len(ns) < 4:
        raise ValidationError("need at least four system sizes")
    if np.all(vals <= 0):
        return TrainabilityResult("Untrainable", tuple(map(int, ns)), tuple(vals), None, None, True)
    y = np.log(np.maximum(vals, np.finfo(float).tiny))
    poly = _ols(np.log(ns), y)
    expo = _ols(ns, y)
    decaying = expo.slope < 0 and abs(expo.slope) > cfg.z_threshold * expo.slope_se
    if not decaying or poly.aic <= expo.aic:
        label = "Trainable"
    elif poly.aic - expo.aic > cfg.aic_margin:
        label = "Untrainable"
    else:
        label = "Inconclusive"
    return TrainabilityResult(label, tuple(map(int, ns)), tuple(vals), poly, expo)


def family_max_delta(
    sampler: Callable[[int, np.random.Generator], np.ndarray], n: int, samples: int,
    rng: np.random.Generator,
) -> float:
    """``max_lambda`` of the ensemble-mean ``Delta(S_lambda)`` at ``n`` qubits."""
    basis = build_schur_basis(n)
    acc = np.zeros(n // 2 + 1)
    for _ in range(samples):
        d = state_deltas(basis, sampler(n, rng))
        acc += np.array([d[m] for m in range(n // 2 + 1)])
    return float(np.max(acc / samples))


def classify_trainability(
    sampler: Callable[[int, np.random.Generator], np.ndarray], n_range: Sequence[int],
    fit_config: FitConfig | None = None,
) -> TrainabilityResult:
    """Classify a state family from the scaling of its largest block ``Delta``."""
    cfg = fit_config or FitConfig()
    ns = list(n_range)
    if len(ns) < 4:
        raise ValidationError("need at least four system sizes")
    seeds = np.random.SeedSequence(cfg.seed).spawn(len(ns))
    vals = [
        family_max_delta(sampler, n, cfg.samples_per_n, np.random.default_rng(s))
        for n, s in zip(ns, seeds)
    ]
    return classify_from_deltas(ns, vals, cfg)
