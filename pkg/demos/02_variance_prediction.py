"""Predicted versus sampled gradient variance for one graph state.

The prediction needs only the per-irrep Delta values of generator,
observable and input state.  For a deep random circuit the sampled variance
of a middle-layer derivative should match it.
"""
import numpy as np

from snqnn import blocks, qsim
from snqnn.ops import GeneratorId, ObservableId
from snqnn.repsn import build_schur_basis, sigma_blocks, tetrahedral
from snqnn.states import graph_state, k_regular
from snqnn.variance import predicted_variance

rng = np.random.default_rng(0)
n = 4
psi = graph_state(k_regular(n, 3, rng))
basis = build_schur_basis(n)
sigma = blocks.pack(sigma_blocks(basis, psi[None]), n)

L = 5 * tetrahedral(n)
thetas = rng.uniform(-np.pi, np.pi, size=(2500, L))
for offset, gen in zip((0, 1, 2), (GeneratorId.SUM_ZZ, GeneratorId.SUM_X, GeneratorId.SUM_Y)):
    # layers cycle ZZ, X, Y so position 3k + offset carries ``gen``
    mu = 3 * (L // 6) + offset
    gens = qsim.cycle_generators(L)
    assert gens[mu] is gen
    samples = blocks.gradient_samples(gens, mu, thetas, ObservableId.SUM_X, n, sigma)
    rep = predicted_variance(gen, ObservableId.SUM_X, psi, basis)
    print(f"{gen.value:6s} predicted {rep.total:.4f}   sampled {samples.var(ddof=1):.4f}")
    for r in rep.records:
        print(f"         lambda m={r.m} (d={r.d_lambda}): {r.contribution:.4f}")
