"""Linear coupler lifting to the N-photon Fock space"""

import itertools
import logging

import numpy as np
from scipy import linalg, stats
from scipy.special import factorial

from .density import DensityMatrix, as_matrix
from .exc import LiftingError
from .fock import FockBasis, enumerate_basis


def _gray_code(n):
    """Walk all nonempty column subsets, one column flip per step

    :param n: Number of columns
    :return: Generator of (column flipped, +1 added / -1 removed, subset size is odd)
    """
    prev = 0
    for k in range(1, 1 << n):
        gray = k ^ (k >> 1)
        flip = gray ^ prev
        yield flip.bit_length() - 1, (1 if gray & flip else -1), bin(gray).count("1") & 1
        prev = gray


def permanent(a):
    """Matrix permanent

    Closed forms for n <= 2, Gray-code Ryser formula above.

    :param a: n x n complex matrix
    :return: Permanent
    :rtype: complex
    :raises LiftingError: Occurs if matrix is not square
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise LiftingError("Permanent needs a square matrix")
    n = a.shape[0]
    if n == 0:
        return 1 + 0j
    if n == 1:
        return complex(a[0, 0])
    if n == 2:
        return complex(a[0, 0] * a[1, 1] + a[0, 1] * a[1, 0])
    row_sums = np.zeros(n, dtype=complex)
    total = 0j
    for col, sign, odd in _gray_code(n):
        row_sums += sign * a[:, col]
        term = np.prod(row_sums)
        total += -term if odd else term
    return complex((-1) ** n * total)


class PortUnitary:
    """M x M linear coupler

    :param matrix: M x M complex unitary matrix
    :param check: Whether to verify unitarity
    :raises LiftingError: Occurs if matrix is not square or not unitary
    """

    UNITARY_TOL = 1e-10

    def __init__(self, matrix, check=True):
        """Initialise coupler

        :param matrix: M x M complex unitary matrix
        :param check: Whether to verify unitarity
        """
        u = np.array(matrix, dtype=complex)
        if u.ndim != 2 or u.shape[0] != u.shape[1] or u.shape[0] == 0:
            raise LiftingError("Coupler must be a square matrix")
        if check and unitarity_error(u) > self.UNITARY_TOL:
            raise LiftingError("Coupler is not unitary")
        u.setflags(write=False)
        self._matrix = u

    @property
    def matrix(self):
        """Read-only M x M array"""
        return self._matrix

    @property
    def dim(self):
        """Number of ports M"""
        return self._matrix.shape[0]

    def __matmul__(self, other):
        """Compose couplers"""
        return PortUnitary(self._matrix @ other.matrix)

    def __repr__(self):
        """Short description of coupler"""
        return f"PortUnitary(dim={self.dim})"


class LiftedUnitary:
    """D x D unitary induced on the Fock space by a coupler

    Rows and columns follow the canonical order of basis.

    :param basis: FockBasis the matrix acts on
    :param matrix: D x D complex matrix
    :param check: Whether to verify unitarity
    :raises LiftingError: Occurs if sizes disagree or matrix is not unitary
    """

    UNITARY_TOL = 1e-9

    def __init__(self, basis, matrix, check=True):
        """Initialise lifted unitary

        :param basis: FockBasis the matrix acts on
        :param matrix: D x D complex matrix
        :param check: Whether to verify unitarity
        """
        u = np.array(matrix, dtype=complex)
        if u.shape != (basis.dim, basis.dim):
            raise LiftingError(f"Lifted unitary must be {basis.dim} x {basis.dim}")
        if check and unitarity_error(u) > self.UNITARY_TOL:
            raise LiftingError("Lifted matrix is not unitary")
        u.setflags(write=False)
        self._basis = basis
        self._matrix = u

    @property
    def basis(self):
        """FockBasis of rows and columns"""
        return self._basis

    @property
    def matrix(self):
        """Read-only D x D array"""
        return self._matrix

    @property
    def dim(self):
        """Dimension D"""
        return self._matrix.shape[0]


def unitarity_error(u):
    """Frobenius norm of U^dagger U - I

    :param u: Square matrix
    :return: Error
    :rtype: float
    """
    u = np.asarray(u)
    return float(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0])))


def _as_port_unitary(u):
    if isinstance(u, PortUnitary):
        return u
    return PortUnitary(u)


def lift_unitary(u, photons, basis=None, check=True):
    """Lift an M-port coupler to the N-photon Fock space

    Element <{m}|U|{n}> is Per(U[S, T]) / sqrt(prod m_i! prod n_j!) where S
    repeats row i m_i times and T repeats column j n_j times. All elements
    are evaluated together: the Gray-code Ryser walk runs once over gathered
    D x D factor matrices instead of once per element.

    :param u: PortUnitary or M x M unitary array
    :param photons: Number of photons N
    :param basis: Optional precomputed FockBasis for (N, M)
    :param check: Whether to verify unitarity of the result
    :return: Lifted unitary
    :rtype: LiftedUnitary
    :raises LiftingError: Occurs if coupler is not unitary or basis does not match
    """
    u = _as_port_unitary(u)
    if basis is None:
        basis = enumerate_basis(photons, u.dim)
    elif not isinstance(basis, FockBasis) or basis.photons != photons or basis.ports != u.dim:
        raise LiftingError("Basis does not match coupler and photon count")
    occ = basis.occupation_array()
    # Row r of modes lists the port of each photon in state r, ascending
    modes = np.array([np.repeat(np.arange(u.dim), row) for row in occ], dtype=int)
    n = photons
    um = u.matrix

    def block(i, j):
        return um[np.ix_(modes[:, i], modes[:, j])]

    if n == 1:
        perms = block(0, 0).copy()
    elif n == 2:
        perms = block(0, 0) * block(1, 1) + block(0, 1) * block(1, 0)
    else:
        row_sums = np.zeros((n, basis.dim, basis.dim), dtype=complex)
        perms = np.zeros((basis.dim, basis.dim), dtype=complex)
        for col, sign, odd in _gray_code(n):
            for i in range(n):
                row_sums[i] += sign * block(i, col)
            term = np.prod(row_sums, axis=0)
            if odd:
                perms -= term
            else:
                perms += term
        perms *= (-1) ** n
    norms = np.sqrt(np.prod(factorial(occ), axis=1))
    logging.debug(f"Lifted {u.dim}-port coupler to D={basis.dim} for N={n}")
    return LiftedUnitary(basis, perms / np.outer(norms, norms), check=check)


def evolve_density(rho, lifted):
    """Evolve a Fock-space state through a lifted coupler

    :param rho: DensityMatrix over lifted.basis
    :param lifted: LiftedUnitary
    :return: U rho U^dagger
    :rtype: DensityMatrix
    :raises LiftingError: Occurs if dimensions differ
    """
    if rho.dim != lifted.dim:
        raise LiftingError(f"State dimension {rho.dim} does not match lifted unitary {lifted.dim}")
    u = lifted.matrix
    return DensityMatrix(u @ rho.matrix @ u.conj().T, nominal_rank=rho.nominal_rank)


def embed_with_ancilla(rho_0, basis_d, m):
    """Append vacuum ancilla ports to an m-port state

    :param rho_0: DensityMatrix over enumerate_basis(N, m)
    :param basis_d: FockBasis over all M ports
    :param m: Number of original ports
    :return: D x D state, rho_0 on the original block and zero elsewhere
    :rtype: DensityMatrix
    :raises LiftingError: Occurs if rho_0 does not match the original subspace
    """
    idx = basis_d.original_subspace_indices(m)
    if rho_0.dim != len(idx):
        raise LiftingError(f"State dimension {rho_0.dim} does not match {len(idx)} original states")
    big = np.zeros((basis_d.dim, basis_d.dim), dtype=complex)
    big[np.ix_(idx, idx)] = as_matrix(rho_0)
    return DensityMatrix(big, nominal_rank=rho_0.nominal_rank)


def direct_sum(u_a, u_b):
    """Block-diagonal coupler U_a (+) U_b, with no mixing between the blocks

    :param u_a: PortUnitary or array on the first ports
    :param u_b: PortUnitary or array on the remaining ports
    :return: Combined coupler
    :rtype: PortUnitary
    """
    return PortUnitary(linalg.block_diag(_as_port_unitary(u_a).matrix, _as_port_unitary(u_b).matrix))


def _permutation_sum(a):
    n = a.shape[0]
    return sum(np.prod(a[np.arange(n), list(p)]) for p in itertools.permutations(range(n)))


def check_lifting(photons=(2, 3), port_values=(4, 5, 6, 7, 8), samples=50, seed=0):
    """Run the lifting property suite on Haar random couplers

    For every photon count and port count the lifted couplers must be
    unitary, respect products, and give outcome probabilities summing to 1
    for every input occupation.

    :param photons: Photon count N, or a sequence of them
    :param port_values: Port counts M to test
    :param samples: Couplers per port count
    :param seed: Seed for the couplers and test matrices
    :return: Largest error of each property and a passed flag
    :rtype: dict
    """
    photons = [int(n) for n in np.atleast_1d(photons)]
    rng = np.random.default_rng(seed)
    unitarity = homomorphism = probability = single_photon = 0.0
    for ports in port_values:
        bases = {n: enumerate_basis(n, ports) for n in photons}
        for _ in range(samples):
            u = stats.unitary_group.rvs(ports, random_state=rng)
            v = stats.unitary_group.rvs(ports, random_state=rng)
            single_photon = max(single_photon, float(np.linalg.norm(lift_unitary(u, 1, check=False).matrix - u)))
            for n, basis in bases.items():
                lu = lift_unitary(u, n, basis, check=False).matrix
                lv = lift_unitary(v, n, basis, check=False).matrix
                luv = lift_unitary(u @ v, n, basis, check=False).matrix
                unitarity = max(unitarity, unitarity_error(lu), unitarity_error(lv))
                homomorphism = max(homomorphism, float(np.linalg.norm(luv - lu @ lv)))
                # Outcome distribution of each input occupation
                totals = np.sum(np.abs(lu) ** 2, axis=0)
                probability = max(probability, float(np.max(np.abs(totals - 1))))
    # Balanced beam splitter: |1,1> never leaves as |1,1>
    splitter = lift_unitary(np.array([[1, 1], [1, -1]]) / np.sqrt(2), 2)
    both = splitter.basis.index_of((1, 1))
    hom = float(abs(splitter.matrix[both, both]))
    permanent_error = 0.0
    for n in range(1, 6):
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        oracle = _permutation_sum(a)
        permanent_error = max(permanent_error, float(abs(permanent(a) - oracle) / max(abs(oracle), 1e-300)))
    report = {"photons": photons,
              "port_values": list(port_values),
              "samples": samples,
              "unitarity_error": unitarity,
              "homomorphism_error": homomorphism,
              "probability_error": probability,
              "single_photon_error": single_photon,
              "hom_amplitude": hom,
              "permanent_error": permanent_error}
    report["passed"] = bool(unitarity <= 1e-9 and homomorphism <= 1e-8 and probability <= 1e-10
                            and single_photon <= 1e-10 and hom <= 1e-12 and permanent_error <= 1e-12)
    logging.debug(f"Lifting check: {report}")
    return report
