"""Example showing two-photon interference on a beam splitter"""

import numpy as np

from singleobs import lift_unitary

splitter = lift_unitary(np.array([[1, 1], [1, -1]]) / np.sqrt(2), 2)
basis = splitter.basis
both = basis.index_of((1, 1))

for i, occ in enumerate(basis.states):
    print(occ, abs(splitter.matrix[i, both]) ** 2)
