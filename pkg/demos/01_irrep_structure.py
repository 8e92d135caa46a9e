"""How n qubits split under permutations of the qubits.

Every permutation-equivariant operator is block diagonal in the Schur basis,
with one d_lambda x d_lambda block repeated m_lambda times per irrep.  This
script prints the block sizes, checks the two sum rules and shows that the
circuit generators really do land in that pattern.
"""
import math

import numpy as np

from snqnn.ops import GeneratorId, generator_matrix
from snqnn.repsn import build_schur_basis, tetrahedral, two_row_irreps

for n in range(1, 9):
    labels = two_row_irreps(n)
    parts = " + ".join(f"{l.m_lambda}x{l.d_lambda}" for l in labels)
    print(f"n={n}: 2^n = {parts} = {sum(l.m_lambda * l.d_lambda for l in labels)}, "
          f"sum d^2 = {sum(l.d_lambda ** 2 for l in labels)} = C(n+3, 3) = {tetrahedral(n)}")

# The block dimension sum d^2 grows like n^3, while the Hilbert space grows like 2^n.
print("\nn, 2^n, sum d^2:")
for n in (4, 8, 12, 16, 20):
    print(f"  {n:2d}  {2 ** n:8d}  {math.comb(n + 3, 3):5d}")

n = 4
basis = build_schur_basis(n)
H = generator_matrix(GeneratorId.SUM_X, n)
T = (basis.matrix.T @ H @ basis.matrix).real
print(f"\nNonzero pattern of SumX for n={n} in the Schur basis:")
for row in T:
    print(" ".join("#" if abs(v) > 1e-12 else "." for v in row))
print("blocks along the diagonal:", [l.d_lambda for l in basis.irreps for _ in range(l.m_lambda)])
