"""Example sampling random states"""

from singleobs import EnsembleSpec, numerical_rank, purity, sample_density_matrix

for rank in range(1, 5):
    rho = sample_density_matrix(EnsembleSpec(dim=20, rank=rank, mu=0.02, seed=rank))
    print(rank, numerical_rank(rho, 0.05), purity(rho))
