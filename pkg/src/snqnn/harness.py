"""Experiment drivers behind the command-line interface.

Each ``cmd_*`` function takes an :class:`ExperimentConfig` and returns a list
of row dicts (plus, for some commands, auxiliary tables).  Writing rows to
CSV is left to :func:`write_csv` so the drivers stay pure and testable.
Randomness flows from ``config.seed`` through ``SeedSequence.spawn``, one
child per independent unit of work, so results do not depend on loop order.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import re
from pathlib import Path
from typing import Any, Sequence

import numpy as np
from scipy.optimize import minimize

from . import blocks, hea, qsim
from .errors import CapacityError, ValidationError
from .ops import GeneratorId, ObservableId
from .repsn import build_schur_basis, sigma_blocks, tetrahedral
from .states import (
    GLOBAL_HAAR_MAX_QUBITS,
    TABLE_FAMILIES,
    StateFamilySpec,
    classification_dataset,
    conditional_er,
    graph_state,
)
from .variance import (
    FitConfig,
    classify_from_deltas,
    delta,
    empirical_variance,
    family_max_delta,
    predicted_variance,
    report_from_deltas,
)

EXPERIMENTS = (
    "variance-scan", "compare-analytic", "irrep-contributions", "qfim-scan",
    "train", "generalization", "trainability-table",
)

_DEFAULT_DEPTH = {
    "variance-scan": "3n", "compare-analytic": "5te", "irrep-contributions": "te",
    "qfim-scan": "2te", "train": "te", "generalization": "te",
    "trainability-table": "te",
}

LOSSES = ("linear", "hinge", "sq-hinge")


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to rerun one experiment; serializes to JSON."""

    experiment: str
    n: int | None = None
    n_range: tuple[int, int] | None = None
    depth_rule: str | None = None
    depths: tuple[int, ...] | None = None
    family: str = "regular:3"
    obs: str = "SumX"
    generator: str = "SumX"
    samples: int = 50
    states: int = 50
    seed: int = 0
    out: str | None = None
    p: float = 0.4
    phi: tuple[float, ...] = (math.pi,)
    restarts: int = 15
    M: int | None = None
    test_size: int | None = None
    trials: int = 200
    mu: int | None = None
    split: bool = False
    hea: bool = False
    hea_params: int | None = None
    maxiter: int = 10_000
    loss: str = "linear"
    margin: float = 0.3

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValidationError(f"unknown experiment {self.experiment!r}")
        for name in ("n_range", "depths", "phi"):
            v = getattr(self, name)
            if v is not None and not isinstance(v, tuple):
                object.__setattr__(self, name, tuple(v))
        if self.n is not None and self.n_range is not None:
            raise ValidationError("give either n or n_range, not both")
        if self.n is not None and self.n < 1:
            raise ValidationError("n must be >= 1")
        if self.n_range is not None:
            if len(self.n_range) != 2 or not 1 <= self.n_range[0] <= self.n_range[1]:
                raise ValidationError("n_range must be (lo, hi) with 1 <= lo <= hi")
        if self.samples < 1 or self.states < 1 or self.restarts < 1 or self.trials < 1:
            raise ValidationError("sample, state, restart and trial counts must be positive")
        if not 0 <= self.p <= 1:
            raise ValidationError("p must lie in [0, 1]")
        if self.loss not in LOSSES:
            raise ValidationError(f"loss must be one of {', '.join(LOSSES)}")
        ObservableId.parse(self.obs)
        GeneratorId.parse(self.generator)
        if self.family != "table":
            StateFamilySpec.parse(self.family)
        if self.depth_rule is not None:
            resolve_depth(self.depth_rule, 4)

    @property
    def ns(self) -> list[int]:
        if self.n is not None:
            return [self.n]
        if self.n_range is not None:
            return list(range(self.n_range[0], self.n_range[1] + 1))
        raise ValidationError("config needs n or n_range")

    @property
    def rule(self) -> str:
        return self.depth_rule or _DEFAULT_DEPTH[self.experiment]

    @property
    def observable(self) -> ObservableId:
        return ObservableId.parse(self.obs)

    def family_spec(self, phi: float | None = None) -> StateFamilySpec:
        return StateFamilySpec.parse(self.family, phi=self.phi[0] if phi is None else phi,
                                     seed=self.seed)

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in d.items()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str, **overrides) -> "ExperimentConfig":
        """Parse a JSON config; errors name the offending line."""
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"line {exc.lineno}: {exc.msg}") from None
        if not isinstance(raw, dict):
            raise ValidationError("line 1: config must be a JSON object")
        fields = {f.name for f in dataclasses.fields(cls)}
        for key in raw:
            if key not in fields:
                raise ValidationError(f"line {_line_of(text, key)}: unknown key {key!r}")
        raw.update({k: v for k, v in overrides.items() if v is not None})
        try:
            return cls(**raw)
        except ValidationError as exc:
            key = _guess_key(str(exc), raw)
            where = f"line {_line_of(text, key)}: " if key else ""
            raise ValidationError(f"{where}{exc}") from None
        except TypeError as exc:
            raise ValidationError(f"bad config: {exc}") from None


def _line_of(text: str, key: str) -> int:
    m = re.search(rf'"{re.escape(key)}"\s*:', text)
    return text[: m.start()].count("\n") + 1 if m else 1


def _guess_key(msg: str, raw: dict) -> str | None:
    for key in sorted(raw, key=len, reverse=True):
        for form in {key, key.replace("_", " ")}:
            if re.search(rf"\b{re.escape(form)}\b", msg):
                return key
    return None


def resolve_depth(rule: str, n: int) -> int:
    """Depth from a rule: ``"20"``, ``"3n"``, ``"te"``, ``"5te"``, ``"1.5te"``."""
    rule = str(rule).strip().lower()
    m = re.fullmatch(r"(\d+(?:\.\d+)?)?\s*\*?\s*(n|te)", rule)
    if m:
        k = float(m.group(1)) if m.group(1) else 1.0
        base = n if m.group(2) == "n" else tetrahedral(n)
        return max(1, math.ceil(k * base))
    if re.fullmatch(r"\d+", rule) and int(rule) >= 1:
        return int(rule)
    raise ValidationError(f"bad depth rule {rule!r}")


def _middle(L: int) -> int:
    return (L - 1) // 2


def _spawn(seed: int, count: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def _jackknife_var(vals: np.ndarray) -> tuple[float, float]:
    N = len(vals)
    var = float(np.var(vals, ddof=1))
    dev2 = (vals - vals.mean()) ** 2
    loo = ((N - 1) * var - N / (N - 1) * dev2) / (N - 2)
    return var, float(math.sqrt((N - 1) / N * np.sum((loo - loo.mean()) ** 2)))


def _state_sigma(psi: np.ndarray, n: int) -> np.ndarray:
    return blocks.pack(sigma_blocks(build_schur_basis(n), psi[None, :]), n)


# variance-scan ------------------------------------------------------------

def _scan_groups(cfg: ExperimentConfig, phi: float):
    spec = cfg.family_spec(phi)
    groups = [(spec.label, spec.sampler())]
    if cfg.split and spec.tag in ("er", "generalized"):
        p, phi = float(spec.param), spec.phi
        groups.append((f"{spec.label}/connected",
                       lambda k, rng: graph_state(conditional_er(k, p, True, rng), phi)))
        groups.append((f"{spec.label}/disconnected",
                       lambda k, rng: graph_state(conditional_er(k, p, False, rng), phi)))
    return groups


def _supported_ns(cfg: ExperimentConfig) -> list[int]:
    """Sizes in the config where the family exists; oversize requests are errors."""
    spec = cfg.family_spec()
    if spec.tag == "global-haar" and max(cfg.ns) > GLOBAL_HAAR_MAX_QUBITS:
        raise CapacityError(f"global Haar states limited to n <= {GLOBAL_HAAR_MAX_QUBITS}")
    ns = [n for n in cfg.ns if spec.supports(n)]
    if not ns:
        raise ValidationError(f"family {spec.label} is undefined for n in {cfg.ns}")
    return ns


def cmd_variance_scan(cfg: ExperimentConfig) -> list[dict]:
    """Pooled variance of the middle-layer gradient over random states and angles."""
    rows = []
    obs = cfg.observable
    ns = _supported_ns(cfg)
    for n, rng_n in zip(ns, _spawn(cfg.seed, len(ns))):
        L = resolve_depth(cfg.rule, n)
        gens = qsim.cycle_generators(L)
        mu = _middle(L) if cfg.mu is None else cfg.mu
        if not 0 <= mu < L:
            raise ValidationError(f"generator position {mu} outside depth {L}")
        groups = [(phi, g) for phi in cfg.phi for g in _scan_groups(cfg, phi)]
        for (phi, (label, sampler)), rng in zip(groups, rng_n.spawn(len(groups))):
            vals = []
            for rng_s in rng.spawn(cfg.states):
                psi = sampler(n, rng_s)
                thetas = rng_s.uniform(-np.pi, np.pi, size=(cfg.samples, L))
                vals.append(blocks.gradient_samples(gens, mu, thetas, obs, n, _state_sigma(psi, n)))
            vals = np.concatenate(vals)
            var, se = _jackknife_var(vals) if len(vals) > 2 else (float("nan"),) * 2
            rows.append({
                "n": n, "family": label, "phi": phi, "depth": L, "mu": mu,
                "generator": gens[mu].value, "states": cfg.states, "samples": len(vals),
                "mean_grad": float(vals.mean()), "var_grad": var, "stderr": se,
            })
    return rows


# compare-analytic -----------------------------------------------------------

def cmd_compare_analytic(cfg: ExperimentConfig, backend: str = "auto") -> list[dict]:
    """Predicted versus Monte Carlo gradient variance for one state per ``(n, phi)``.

    The three generators are probed at the three positions around the middle
    of the circuit.  ``agree_3sigma`` is the strict statistical check;
    ``agree`` also accepts a 20% relative deviation.
    """
    rows = []
    obs = cfg.observable
    for n, rng_n in zip(cfg.ns, _spawn(cfg.seed, len(cfg.ns))):
        L = resolve_depth(cfg.rule, n)
        gens = qsim.cycle_generators(L)
        mid = _middle(L)
        positions = [p for p in (mid - 1, mid, mid + 1) if 0 <= p < L]
        for phi, rng in zip(cfg.phi, rng_n.spawn(len(cfg.phi))):
            spec = cfg.family_spec(phi)
            psi = spec.sampler()(n, rng)
            data = qsim.LabeledDataset(n, psi[None, :], [1], [1.0])
            for mu, rng_mu in zip(positions, rng.spawn(len(positions))):
                pred = predicted_variance(gens[mu], obs, data, n).total
                if cfg.samples < 100:
                    raise ValidationError("compare-analytic needs at least 100 samples")
                emp = empirical_variance(mu, gens, data, obs, cfg.samples, rng_mu, backend=backend)
                diff = abs(emp.variance - pred)
                rows.append({
                    "n": n, "generator": gens[mu].value, "phi": phi, "depth": L, "mu": mu,
                    "predicted": pred, "empirical": emp.variance, "stderr": emp.se_variance,
                    "rel_error": diff / pred if pred > 0 else float("nan"),
                    "agree_3sigma": bool(diff <= 3 * emp.se_variance),
                    "agree": bool(diff <= max(3 * emp.se_variance, 0.2 * pred)),
                })
    return rows


# irrep-contributions --------------------------------------------------------

def cmd_irrep_contributions(cfg: ExperimentConfig) -> list[dict]:
    """Per-irrep terms of the variance prediction, averaged over sampled states."""
    rows = []
    gen = GeneratorId.parse(cfg.generator)
    obs = cfg.observable
    spec = cfg.family_spec()
    ns = _supported_ns(cfg)
    for n, rng in zip(ns, _spawn(cfg.seed, len(ns))):
        basis = build_schur_basis(n)
        acc = {m: 0.0 for m in range(n // 2 + 1)}
        for rng_s in rng.spawn(cfg.states):
            S = sigma_blocks(basis, spec.sampler()(n, rng_s)[None, :])
            for m in acc:
                acc[m] += delta(S[m]) / cfg.states
        report = report_from_deltas(gen, obs, n, acc)
        for r in report.rows():
            r.update(family=spec.label, generator=gen.value, observable=obs.value)
            rows.append(r)
    return rows


# qfim-scan ------------------------------------------------------------------

def cmd_qfim_scan(cfg: ExperimentConfig) -> tuple[list[dict], list[dict]]:
    """QFIM rank versus depth for random graph states; returns (ranks, onsets)."""
    rank_rows, ovp_rows = [], []
    spec = cfg.family_spec()
    ns = _supported_ns(cfg)
    for n, rng in zip(ns, _spawn(cfg.seed, len(ns))):
        L = resolve_depth(cfg.rule, n)
        te = tetrahedral(n)
        for gid, rng_g in enumerate(rng.spawn(cfg.states)):
            psi = spec.sampler()(n, rng_g)
            res = qsim.find_overparam_depth(psi, l_max=L, rng=rng_g)
            for depth, rank in enumerate(res.ranks, start=1):
                rank_rows.append({"n": n, "graph_id": gid, "L": depth, "rank": int(rank)})
            ovp_rows.append({
                "n": n, "graph_id": gid, "L_ovp": res.l_ovp, "Te": te,
                "max_rank": res.max_rank, "saturated": res.saturated,
            })
    return rank_rows, ovp_rows


# train ----------------------------------------------------------------------

def default_depth_grid(n: int) -> tuple[int, ...]:
    """Roughly geometric grid from ``n`` to ``2 Te_{n+1}``."""
    hi = 2 * tetrahedral(n)
    grid = np.unique(np.round(np.geomspace(n, hi, 10)).astype(int))
    return tuple(int(x) for x in grid)


def margin_loss(ell: np.ndarray, y: np.ndarray, margin: float, kind: str):
    """Hinge-type loss on predictions ``ell`` and its derivative per example.

    ``hinge`` is ``mean max(0, margin - y ell)``; ``sq-hinge`` squares the
    slack, which keeps the objective smooth for quasi-Newton optimizers.
    """
    slack = margin - y * ell
    v = np.maximum(slack, 0.0)
    M = len(y)
    if kind == "hinge":
        return float(v.mean()), -(slack > 0).astype(float) * y / M
    if kind == "sq-hinge":
        return float(np.mean(v ** 2)), -2 * v * y / M
    raise ValidationError(f"unknown margin loss {kind!r}")


def hinge_objective(gens, obs, n, data: qsim.LabeledDataset, margin: float,
                    kind: str = "hinge"):
    """Margin loss of the equivariant model and its gradient.

    The gradient is that of a linear loss with per-state weights
    ``dloss / dell_i``, so it reuses the adjoint sweep of
    :func:`blocks.loss_and_grad`.
    """
    P = blocks.pack_states(data.blocks(), n)
    y = data.labels

    def f(theta):
        ell = blocks.batch_expectations(blocks.heisenberg_observable(gens, theta, obs, n), P)
        val, c = margin_loss(ell, y, margin, kind)
        _, g = blocks.loss_and_grad(gens, theta, obs, n, np.einsum("i,iab->ab", c, P))
        return val, g

    return f


def hea_objective(data: qsim.LabeledDataset, n: int, loss: str, margin: float):
    """Training objective of the baseline for the given loss kind."""
    if loss == "linear":
        return lambda t: hea.hea_loss_and_grad(t, data.states, data.weights, n)
    y = data.labels

    def f(theta):
        val, c = margin_loss(hea.hea_losses(theta, data.states, n), y, margin, loss)
        return val, hea.hea_loss_and_grad(theta, data.states, c, n)[1]

    return f


def train_eqnn(
    n: int, depth: int, train_set, test_set, obs: ObservableId, restarts: int,
    rng: np.random.Generator, maxiter: int = 10_000, loss: str = "linear",
    margin: float = 0.3,
) -> dict:
    """Best-of-``restarts`` training from uniform random initial angles."""
    gens = qsim.cycle_generators(depth)
    cfg = qsim.OptConfig(maxiter=maxiter)
    best = None
    for rng_r in rng.spawn(restarts):
        x0 = rng_r.uniform(-np.pi, np.pi, depth)
        circuit = qsim.Circuit(n, tuple(zip(gens, x0)))
        if loss == "linear":
            res = qsim.train(circuit, train_set, obs, cfg)
            val, x, trace = res.loss, res.thetas, res.loss_trace
        else:
            f = hinge_objective(gens, obs, n, train_set, margin, loss)
            hist: list[float] = []

            def tracked(t):
                v, g = f(t)
                hist.append(v)
                return v, g

            r = minimize(tracked, x0, jac=True, method="L-BFGS-B",
                         options={"maxiter": maxiter, "gtol": cfg.gtol})
            val, x, trace = float(r.fun), r.x, np.minimum.accumulate(hist)
        if best is None or val < best["loss"]:
            best = {"loss": val, "thetas": x, "trace": trace}
    circuit = qsim.Circuit(n, tuple(zip(gens, best["thetas"])))
    best["train_acc"] = qsim.accuracy(qsim.predict(circuit, train_set, obs), train_set.labels)
    best["test_acc"] = (qsim.accuracy(qsim.predict(circuit, test_set, obs), test_set.labels)
                        if test_set is not None and len(test_set) else float("nan"))
    return best


def train_hea(
    n: int, n_params: int, train_set, test_set, restarts: int, rng: np.random.Generator,
    maxiter: int = 10_000, loss: str = "linear", margin: float = 0.3,
) -> dict:
    """Best-of-``restarts`` training of the RY + CNOT-line baseline."""
    f = hea_objective(train_set, n, loss, margin)
    best = None
    for rng_r in rng.spawn(restarts):
        x0 = rng_r.uniform(-np.pi, np.pi, n_params)
        res = minimize(f, x0, jac=True, method="L-BFGS-B", options={"maxiter": maxiter})
        if best is None or res.fun < best["loss"]:
            best = {"loss": float(res.fun), "thetas": res.x}

    def acc(data):
        pred = hea.hea_losses(best["thetas"], data.states, n)
        return qsim.accuracy(pred, data.labels)

    best["train_acc"] = acc(train_set)
    best["test_acc"] = acc(test_set) if test_set is not None and len(test_set) else float("nan")
    return best


def cmd_train(cfg: ExperimentConfig) -> tuple[list[dict], list[dict], dict]:
    """Depth sweep of trained EQNNs; returns (rows, trace rows, summary)."""
    if cfg.n is None:
        raise ValidationError("train needs a single n")
    n = cfg.n
    obs = cfg.observable
    M = cfg.M or 28
    test_size = cfg.test_size if cfg.test_size is not None else 12
    rng_data, rng_ovp, rng_train, rng_hea = _spawn(cfg.seed, 4)
    train_set = classification_dataset(n, M, rng_data, p=cfg.p, phi=cfg.phi[0])
    test_set = classification_dataset(n, test_size, rng_data, p=cfg.p, phi=cfg.phi[0])
    depths = cfg.depths or (
        (resolve_depth(cfg.depth_rule, n),) if cfg.depth_rule else default_depth_grid(n)
    )
    results = {}
    for L, rng in zip(depths, rng_train.spawn(len(depths))):
        results[L] = train_eqnn(n, L, train_set, test_set, obs, cfg.restarts, rng,
                                cfg.maxiter, cfg.loss, cfg.margin)
    best_loss = min(r["loss"] for r in results.values())
    rows, trace_rows = [], []
    for L, r in results.items():
        rel = abs(r["loss"] - best_loss) / abs(best_loss) if best_loss != 0 else 0.0
        rows.append({
            "n": n, "L": L, "loss": r["loss"], "rel_error": rel,
            "train_acc": r["train_acc"], "test_acc": r["test_acc"],
        })
        trace_rows += [{"L": L, "step": i, "loss": v} for i, v in enumerate(r["trace"])]
    ovp = qsim.find_overparam_depth(train_set.states.T, l_max=max(depths), rng=rng_ovp)
    summary = {
        "n": n, "M": M, "test_size": test_size, "observable": obs.value, "loss": cfg.loss,
        "restarts": cfg.restarts, "min_loss": best_loss, "L_ovp": ovp.l_ovp,
        "ovp_saturated": ovp.saturated, "Te": tetrahedral(n),
    }
    if cfg.hea:
        n_params = cfg.hea_params or max(depths)
        h = train_hea(n, n_params, train_set, test_set, cfg.restarts, rng_hea, cfg.maxiter,
                      cfg.loss, cfg.margin)
        eq = results[max(depths)] if cfg.hea_params is None else train_eqnn(
            n, n_params, train_set, test_set, obs, cfg.restarts, rng_hea, cfg.maxiter,
            cfg.loss, cfg.margin)
        summary["comparison"] = {
            "params": n_params,
            "eqnn": {"train_acc": eq["train_acc"], "test_acc": eq["test_acc"], "loss": eq["loss"]},
            "hea": {"train_acc": h["train_acc"], "test_acc": h["test_acc"], "loss": h["loss"]},
        }
    return rows, trace_rows, summary


# generalization -------------------------------------------------------------

def cmd_generalization(cfg: ExperimentConfig) -> list[dict]:
    rows = []
    obs = cfg.observable
    for n, rng in zip(cfg.ns, _spawn(cfg.seed, len(cfg.ns))):
        M = cfg.M or tetrahedral(n)
        M += M % 2
        test = cfg.test_size
        if test is not None:
            test += test % 2
        L = resolve_depth(cfg.rule, n)
        rep = qsim.generalization_experiment(
            n, M, depth=L, test_size=test, trials=cfg.trials, rng=rng, obs=obs,
            p=cfg.p, phi=cfg.phi[0])
        row = rep.as_row()
        row["percentile90_normalized_gen_error"] = row.pop("percentile")
        row["thm4_bound"] = row.pop("bound")
        rows.append(row)
    return rows


# trainability-table ---------------------------------------------------------

def cmd_trainability_table(cfg: ExperimentConfig) -> list[dict]:
    """Trainability verdict per family from the scaling of ``max_lambda Delta``."""
    families = (
        TABLE_FAMILIES if cfg.family == "table"
        else tuple((f, None) for f in cfg.family.split(","))
    )
    ns_all = cfg.ns if (cfg.n_range or cfg.n) else list(range(4, 13))
    rows = []
    for (tag, expected), rng in zip(families, _spawn(cfg.seed, len(families))):
        spec = StateFamilySpec.parse(tag, phi=cfg.phi[0])
        ns = [n for n in ns_all if spec.supports(n)]
        vals = [
            family_max_delta(spec.sampler(), n, cfg.states, r)
            for n, r in zip(ns, rng.spawn(len(ns)))
        ]
        res = classify_from_deltas(ns, vals, FitConfig(samples_per_n=cfg.states, seed=cfg.seed))
        row = {
            "family": spec.label, "label": res.label,
            "expected": "" if expected is None else ("Trainable" if expected else "Untrainable"),
            "delta_aic": res.delta_aic,
            "exp_slope": res.exp.slope if res.exp else float("nan"),
            "exp_slope_se": res.exp.slope_se if res.exp else float("nan"),
            "poly_slope": res.poly.slope if res.poly else float("nan"),
            "ns": " ".join(map(str, ns)),
            "max_delta": " ".join(f"{v:.6g}" for v in vals),
            "degenerate": res.degenerate,
        }
        row["match"] = "" if expected is None else row["label"] == row["expected"]
        rows.append(row)
    return rows


def markdown_table(rows: Sequence[dict], columns: Sequence[str]) -> str:
    def fmt(v):
        return f"{v:.3g}" if isinstance(v, float) else str(v)
    lines = ["| " + " | ".join(columns) + " |", "|" + "---|" * len(columns)]
    lines += ["| " + " | ".join(fmt(r[c]) for c in columns) + " |" for r in rows]
    return "\n".join(lines) + "\n"


# output ---------------------------------------------------------------------

def to_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    return buf.getvalue()


def write_csv(rows: Sequence[dict], path: str | Path | None) -> str:
    text = to_csv(rows)
    if path is not None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)
    return text


def sibling(path: str | None, suffix: str) -> str | None:
    """``results.csv`` -> ``results_<suffix>``."""
    if path is None:
        return None
    p = Path(path)
    return str(p.with_name(p.stem + "_" + suffix))
