"""Equivariant model against a hardware-efficient baseline on graph connectivity.

Both models get the same number of parameters and the same squared-hinge
loss.  The equivariant one sees each graph only up to relabeling, which is
the right inductive bias for a graph property.
"""
import numpy as np

from snqnn import harness
from snqnn.ops import ObservableId
from snqnn.states import classification_dataset

n, params = 6, 60
rd, re_, rh = np.random.default_rng(0).spawn(3)
train = classification_dataset(n, 20, rd)
test = classification_dataset(n, 20, rd)
e = harness.train_eqnn(n, params, train, test, ObservableId.PROD_X, 3, re_,
                       maxiter=500, loss="sq-hinge", margin=0.3)
h = harness.train_hea(n, params, train, test, 3, rh, maxiter=500, loss="sq-hinge", margin=0.3)
print(f"EQNN train {e['train_acc']:.2f} test {e['test_acc']:.2f}")
print(f"HEA  train {h['train_acc']:.2f} test {h['test_acc']:.2f}")
