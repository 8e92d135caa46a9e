"""Which input families keep gradients alive as n grows.

For each family the largest per-irrep Delta(S_lambda) is averaged over a few
samples and fitted against n.  Polynomial decay means the variance stays
usable, exponential decay means a barren plateau.  Local Haar states decay
slowly at these sizes and sit close to the decision boundary, so their label
depends on the sample count.
"""
import numpy as np

from snqnn.states import StateFamilySpec
from snqnn.variance import FitConfig, classify_from_deltas, family_max_delta

ns = list(range(4, 13))
cfg = FitConfig(samples_per_n=20)
for tag in ("symmetric", "local-haar", "global-haar", "regular:3"):
    spec = StateFamilySpec.parse(tag)
    ok = [n for n in ns if spec.supports(n)]
    rng = np.random.default_rng(1)
    vals = [family_max_delta(spec.sampler(), n, cfg.samples_per_n, rng) for n in ok]
    res = classify_from_deltas(ok, vals, cfg)
    curve = " ".join(f"{v:.2g}" for v in vals)
    print(f"{tag:12s} {res.label:12s} dAIC={res.delta_aic:6.1f}  max Delta: {curve}")
