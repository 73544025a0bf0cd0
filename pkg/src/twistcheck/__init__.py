"""twistcheck: exact verification of twisted Hopf deformations.

The engine certifies, in exact rational arithmetic, the bracket tables,
coproducts, antipodes, universal R-matrices, twist maps, contractions,
subalgebra embeddings, difference-operator realizations and discrete
Schrodinger symmetries collected in the bundled catalog.
"""

__version__ = "0.1.0"
