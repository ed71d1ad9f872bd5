"""Random couplers and random mixed states"""

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import linalg

from .density import DensityMatrix
from .exc import EnsembleError
from .lifting import PortUnitary, direct_sum


class CouplerFamily(Enum):
    """Kind of linear coupler placed after the input and ancilla ports"""

    HAAR = "haar"
    EVANESCENT = "evanescent"
    BLOCK = "block"


@dataclass
class EnsembleSpec:
    """Parameters of the rank-r state ensemble

    :param dim: Dimension d
    :param rank: Rank r, 1 to d
    :param mu: Depolarization fraction, 0 to 1
    :param seed: RNG seed
    """

    dim: int
    rank: int
    mu: float = 0.0
    seed: object = None

    def __post_init__(self):
        """Validate parameters

        :raises EnsembleError: Occurs if rank or mu out of range
        """
        if not (isinstance(self.dim, (int, np.integer)) and self.dim >= 1):
            raise EnsembleError("Invalid dimension")
        if not (isinstance(self.rank, (int, np.integer)) and 1 <= self.rank <= self.dim):
            raise EnsembleError(f"Invalid rank {self.rank} for dimension {self.dim}")
        if not 0 <= self.mu <= 1:
            raise EnsembleError("Depolarization fraction should be 0 to 1")


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _haar_matrix(dim, rng):
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def sample_haar_unitary(dim, seed=None):
    """Haar random coupler

    QR factorisation of a complex Gaussian matrix, with the phases of the R
    diagonal moved into Q.

    :param dim: Number of ports M
    :param seed: Seed or numpy Generator
    :return: Coupler
    :rtype: PortUnitary
    :raises EnsembleError: Occurs if dim < 1
    """
    if not (isinstance(dim, (int, np.integer)) and dim >= 1):
        raise EnsembleError("Invalid dimension")
    return PortUnitary(_haar_matrix(dim, _rng(seed)))


def sample_density_matrix(spec, rng=None):
    """Random state of rank r, then depolarized by spec.mu

    Eigenvalues are uniform on the (r - 1)-simplex (normalised exponentials),
    eigenvectors are the first r columns of a Haar unitary.

    :param spec: EnsembleSpec
    :param rng: Optional numpy Generator overriding spec.seed
    :return: State with nominal_rank r
    :rtype: DensityMatrix
    """
    rng = _rng(spec.seed if rng is None else rng)
    weights = rng.exponential(size=spec.rank)
    weights /= weights.sum()
    v = _haar_matrix(spec.dim, rng)[:, :spec.rank]
    rho = DensityMatrix((v * weights) @ v.conj().T, nominal_rank=spec.rank)
    if spec.mu > 0:
        rho = depolarize(rho, spec.mu)
    return rho


def depolarize(rho, mu):
    """Depolarization channel rho -> (1 - mu) rho + mu I / d

    The output is full rank for mu > 0. Its nominal_rank stays the rank of
    rho, the ensemble label the sweeps group by.

    :param rho: DensityMatrix
    :param mu: Fraction, 0 to 1
    :return: Mixed state carrying the nominal rank of rho
    :rtype: DensityMatrix
    :raises EnsembleError: Occurs if mu out of range
    """
    if not 0 <= mu <= 1:
        raise EnsembleError("Depolarization fraction should be 0 to 1")
    d = rho.dim
    return DensityMatrix((1 - mu) * rho.matrix + (mu / d) * np.eye(d), nominal_rank=rho.nominal_rank)


def evanescent_coupler(dim, theta=1.0):
    """Uniform waveguide array with nearest-neighbour coupling

    U = exp(i theta C), C tridiagonal with zero diagonal and unit off-diagonals.

    :param dim: Number of ports M, at least 2
    :param theta: Coupling constant times length
    :return: Coupler
    :rtype: PortUnitary
    :raises EnsembleError: Occurs if dim < 2 or theta negative
    """
    if not (isinstance(dim, (int, np.integer)) and dim >= 2):
        raise EnsembleError("Evanescent coupler needs at least 2 ports")
    if theta < 0:
        raise EnsembleError("Invalid coupling length")
    c = np.diag(np.ones(dim - 1), 1) + np.diag(np.ones(dim - 1), -1)
    return PortUnitary(linalg.expm(1j * theta * c))


def block_coupler(m, dim, seed=None):
    """Interaction-less coupler: independent Haar couplers on original and ancilla ports

    :param m: Number of original ports
    :param dim: Total number of ports M
    :param seed: Seed or numpy Generator
    :return: Haar U(m) (+) Haar U(M - m)
    :rtype: PortUnitary
    :raises EnsembleError: Occurs if m not below M
    """
    if not 1 <= m < dim:
        raise EnsembleError("Block coupler needs 1 <= m < M")
    rng = _rng(seed)
    return direct_sum(_haar_matrix(m, rng), _haar_matrix(dim - m, rng))


def make_coupler(family, dim, seed=None, theta=1.0, m=None):
    """Build a coupler of the given family

    :param family: CouplerFamily or its value
    :param dim: Number of ports M
    :param seed: Seed for random families
    :param theta: Coupling length for the evanescent family
    :param m: Number of original ports for the block family
    :return: Coupler
    :rtype: PortUnitary
    :raises EnsembleError: Occurs if family is unknown
    """
    try:
        family = CouplerFamily(family)
    except ValueError:
        raise EnsembleError(f"Unknown coupler family {family}") from None
    if family == CouplerFamily.HAAR:
        return sample_haar_unitary(dim, seed)
    elif family == CouplerFamily.EVANESCENT:
        return evanescent_coupler(dim, theta)
    else:
        if m is None:
            raise EnsembleError("Block coupler needs the original port count")
        return block_coupler(m, dim, seed)
