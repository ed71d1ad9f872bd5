"""Density matrix handling functionality"""

import numpy as np
from scipy import linalg

from .exc import DensityMatrixError


class DensityMatrix:
    """Hermitian, positive semidefinite, trace-1 matrix

    The matrix is stored read-only; operations return new objects.

    :param matrix: d x d complex array
    :param nominal_rank: Optional rank the state was sampled with, kept through
        unitary evolution and depolarization
    :param check: Whether to validate the matrix
    :raises DensityMatrixError: Occurs if matrix is not Hermitian, PSD and trace 1
    """

    HERMITIAN_TOL = 1e-10
    PSD_TOL = 1e-9
    TRACE_TOL = 1e-10

    def __init__(self, matrix, nominal_rank=None, check=True):
        """Initialise density matrix

        :param matrix: d x d complex array
        :param nominal_rank: Optional rank the state was constructed with
        :param check: Whether to validate the matrix
        """
        rho = np.array(matrix, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] == 0:
            raise DensityMatrixError("Density matrix must be square")
        if check:
            if np.linalg.norm(rho - rho.conj().T) > self.HERMITIAN_TOL:
                raise DensityMatrixError("Density matrix is not Hermitian")
            if abs(np.trace(rho) - 1) > self.TRACE_TOL:
                raise DensityMatrixError(f"Density matrix trace is {np.trace(rho).real}, not 1")
            if linalg.eigvalsh(rho)[0] < -self.PSD_TOL:
                raise DensityMatrixError("Density matrix is not positive semidefinite")
        # Hermitian part only
        rho = (rho + rho.conj().T) / 2
        rho.setflags(write=False)
        self._matrix = rho
        if nominal_rank is not None and not 1 <= nominal_rank <= rho.shape[0]:
            raise DensityMatrixError("Invalid nominal rank")
        self._nominal_rank = nominal_rank

    @classmethod
    def pure(cls, vector):
        """Pure state |v><v| from a state vector

        :param vector: Nonzero complex vector, normalised here
        :return: Rank-1 density matrix
        :rtype: DensityMatrix
        :raises DensityMatrixError: Occurs if vector is zero
        """
        v = np.asarray(vector, dtype=complex).ravel()
        norm = np.linalg.norm(v)
        if norm == 0:
            raise DensityMatrixError("Zero state vector")
        v = v / norm
        return cls(np.outer(v, v.conj()), nominal_rank=1)

    @classmethod
    def maximally_mixed(cls, dim):
        """I/d

        :param dim: Dimension d
        :return: Maximally mixed state
        :rtype: DensityMatrix
        """
        return cls(np.eye(dim, dtype=complex) / dim, nominal_rank=dim)

    @property
    def matrix(self):
        """Read-only d x d array"""
        return self._matrix

    @property
    def dim(self):
        """Dimension d"""
        return self._matrix.shape[0]

    @property
    def nominal_rank(self):
        """Rank the state was sampled with before any depolarization, or None"""
        return self._nominal_rank

    @property
    def eigenvalues(self):
        """Eigenvalues in ascending order

        :return: Real eigenvalues
        :rtype: numpy.ndarray
        """
        return linalg.eigvalsh(self._matrix)

    def tensor(self, other):
        """Kronecker product with another state

        :param other: DensityMatrix
        :return: Product state
        :rtype: DensityMatrix
        """
        return DensityMatrix(np.kron(self._matrix, other.matrix))

    def to_dict(self):
        """Serialise to a JSON friendly dictionary

        :return: Dictionary with nested real and imaginary arrays
        :rtype: dict
        """
        return {"dim": self.dim,
                "nominal_rank": self._nominal_rank,
                "real": self._matrix.real.tolist(),
                "imag": self._matrix.imag.tolist()}

    @classmethod
    def from_dict(cls, data):
        """Load from the dictionary written by to_dict

        :param data: Dictionary
        :return: Density matrix
        :rtype: DensityMatrix
        :raises DensityMatrixError: Occurs if dictionary lacks matrix data
        """
        try:
            matrix = np.array(data["real"], dtype=float) + 1j * np.array(data["imag"], dtype=float)
        except (KeyError, TypeError, ValueError) as err:
            raise DensityMatrixError(f"Invalid density matrix data: {err}") from None
        return cls(matrix, nominal_rank=data.get("nominal_rank"))

    def __repr__(self):
        """Short description of state"""
        return f"DensityMatrix(dim={self.dim}, nominal_rank={self._nominal_rank})"


def as_matrix(rho):
    """Return the array behind a DensityMatrix, or the argument as a complex array

    :param rho: DensityMatrix or array
    :return: Complex array
    :rtype: numpy.ndarray
    """
    if isinstance(rho, DensityMatrix):
        return rho.matrix
    return np.asarray(rho, dtype=complex)
