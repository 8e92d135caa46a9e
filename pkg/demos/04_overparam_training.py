"""QFIM rank and training quality as the circuit gets deeper.

Once the QFIM rank stops growing, extra layers add no new directions and the
training landscape loses its spurious minima; the best found loss then
converges to the global minimum.
"""
import numpy as np

from snqnn import harness, qsim
from snqnn.harness import ExperimentConfig
from snqnn.repsn import tetrahedral
from snqnn.states import classification_dataset

n = 4
rng = np.random.default_rng(3)
data = classification_dataset(n, 12, rng)
res = qsim.find_overparam_depth(data.states.T, l_max=2 * tetrahedral(n), rng=rng)
print(f"n={n}: QFIM rank saturates at L_ovp={res.l_ovp} (Te={tetrahedral(n)}), rank {res.max_rank}")

cfg = ExperimentConfig(experiment="train", n=n, depths=(2, 4, 8, 16, 32), obs="SumXX",
                       restarts=3, seed=3)
rows, _, summary = harness.cmd_train(cfg)
for r in rows:
    print(f"  L={r['L']:3d}  loss={r['loss']:+.6f}  rel error={r['rel_error']:.1e}")
