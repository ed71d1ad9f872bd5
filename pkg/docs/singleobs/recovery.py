"""Example recovering a noisy rank-2 state with both solvers"""

from singleobs import (EnsembleSpec, RecoveryConfig, add_noise, build_measurement_matrix, fidelity,
                       lift_unitary, recover, sample_density_matrix, sample_haar_unitary,
                       simulate_measurements)

rho_0 = sample_density_matrix(EnsembleSpec(dim=10, rank=2, seed=5))
u = sample_haar_unitary(7, seed=6)
lifted = lift_unitary(u, 3)
record = add_noise(simulate_measurements(rho_0, u, 3, 3, lifted=lifted), 25, seed=7)
a_mat = build_measurement_matrix(u, 3, 3, lifted=lifted)

for solver in ("logdet", "least_squares"):
    result = recover(record, a_mat, RecoveryConfig(solver=solver))
    print(solver, fidelity(rho_0, result.rho_rec), result.converged)
