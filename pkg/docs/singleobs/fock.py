"""Example enumerating a Fock basis"""

from singleobs import dimension, enumerate_basis

basis = enumerate_basis(3, 7)
print(basis)
print("Input subspace", len(basis.original_subspace_indices(4)), "states")
print("Click outcomes", len(basis.click_subset()))
print("D for N=3, M=16:", dimension(3, 16))
