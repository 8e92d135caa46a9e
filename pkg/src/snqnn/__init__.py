"""Permutation-equivariant quantum neural networks: representation theory,
simulation, gradient-variance theory and the experiments built on them."""
from .errors import CapacityError, ValidationError
from .ops import DEFAULT_CYCLE, GeneratorId, ObservableId
from .qsim import Circuit, LabeledDataset, OptConfig
from .repsn import IrrepLabel, SchurBasis, build_schur_basis, tetrahedral, two_row_irreps

__all__ = [
    "CapacityError", "ValidationError", "DEFAULT_CYCLE", "GeneratorId", "ObservableId",
    "Circuit", "LabeledDataset", "OptConfig", "IrrepLabel", "SchurBasis",
    "build_schur_basis", "tetrahedral", "two_row_irreps",
]
