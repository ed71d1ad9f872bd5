"""Example comparing the three views of one measurement"""

import numpy as np

from singleobs import (EnsembleSpec, build_measurement_matrix, lift_unitary, povm_elements,
                       sample_density_matrix, sample_haar_unitary, simulate_measurements)

rho_0 = sample_density_matrix(EnsembleSpec(dim=10, rank=2, seed=3))
u = sample_haar_unitary(7, seed=4)
lifted = lift_unitary(u, 3)

record = simulate_measurements(rho_0, u, 3, 3, lifted=lifted)
povm = povm_elements(u, 3, 3, lifted=lifted)
a_mat = build_measurement_matrix(u, 3, 3, lifted=lifted)

print(np.abs(record.values - povm.probabilities(rho_0)).max())
print(np.abs(record.values - a_mat.matrix @ rho_0.matrix.flatten(order="F")).max())
