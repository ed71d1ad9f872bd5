"""Fock space enumeration for N photons in M ports"""

import functools
import itertools
import logging

import numpy as np
from scipy.special import comb

from .exc import FockBasisError


def dimension(photons, ports):
    """Dimension of the N-photon Fock space over M ports

    :param photons: Number of photons N
    :param ports: Number of ports M
    :return: C(M - 1 + N, N)
    :rtype: int
    :raises FockBasisError: Occurs if photon or port count is not positive
    """
    _validate_counts(photons, ports)
    return int(comb(ports - 1 + photons, photons, exact=True))


def _validate_counts(photons, ports):
    if not (isinstance(photons, (int, np.integer)) and photons >= 1):
        raise FockBasisError("Invalid photon count")
    if not (isinstance(ports, (int, np.integer)) and ports >= 1):
        raise FockBasisError("Invalid port count")


class FockBasis:
    """Canonical basis of the N-photon, M-port Fock space

    Occupations are tuples of M photon counts summing to N. They are kept in
    colexicographic order (compare from the last port backwards), so every
    occupation with empty trailing ports comes before any occupation using
    them, and the m-port basis is a prefix of the M-port basis.

    :param photons: Number of photons N
    :param ports: Number of ports M
    :raises FockBasisError: Occurs if photon or port count is not positive
    """

    def __init__(self, photons, ports):
        """Enumerate the basis

        :param photons: Number of photons N
        :param ports: Number of ports M
        """
        _validate_counts(photons, ports)
        self._photons = int(photons)
        self._ports = int(ports)
        states = []
        for modes in itertools.combinations_with_replacement(range(self._ports), self._photons):
            occ = [0] * self._ports
            for q in modes:
                occ[q] += 1
            states.append(tuple(occ))
        states.sort(key=lambda occ: occ[::-1])
        self._states = tuple(states)
        self._index = {occ: i for i, occ in enumerate(self._states)}
        logging.debug(f"Fock basis N={self._photons} M={self._ports} D={len(self._states)}")

    @property
    def photons(self):
        """Number of photons

        :return: N
        :rtype: int
        """
        return self._photons

    @property
    def ports(self):
        """Number of ports

        :return: M
        :rtype: int
        """
        return self._ports

    @property
    def states(self):
        """Occupations in canonical order

        :return: Tuple of occupation tuples
        :rtype: tuple
        """
        return self._states

    @property
    def dim(self):
        """Number of basis states"""
        return len(self._states)

    def __len__(self):
        """Number of basis states"""
        return len(self._states)

    def __repr__(self):
        """Short description of basis"""
        return f"FockBasis(photons={self._photons}, ports={self._ports}, dim={self.dim})"

    def index_of(self, occ):
        """Position of an occupation in the canonical order

        :param occ: Sequence of M photon counts summing to N
        :return: Position in states
        :rtype: int
        :raises FockBasisError: Occurs if occupation is malformed or not in the basis
        """
        occ = tuple(int(n) for n in occ)
        if len(occ) != self._ports:
            raise FockBasisError(f"Occupation needs {self._ports} ports, got {len(occ)}")
        if sum(occ) != self._photons:
            raise FockBasisError(f"Occupation needs {self._photons} photons, got {sum(occ)}")
        try:
            return self._index[occ]
        except KeyError:
            raise FockBasisError(f"Occupation {occ} not found") from None

    def occupation_array(self):
        """Occupations as an integer array

        :return: D x M array, row i is states[i]
        :rtype: numpy.ndarray
        """
        return np.array(self._states, dtype=int).reshape(self.dim, self._ports)

    def click_subset(self):
        """Indices of collision-free occupations (every port holds at most one photon)

        Empty when there are more photons than ports.

        :return: Ordered list of positions, C(M, N) long
        :rtype: list
        """
        return [i for i, occ in enumerate(self._states) if max(occ) <= 1]

    def original_subspace_indices(self, m):
        """Indices of occupations with no photons in ports m+1..M

        These carry the original m-port system when the ancilla ports are in
        vacuum. Order matches enumerate_basis(N, m) after dropping the
        trailing zeros.

        :param m: Number of original ports
        :return: Ordered list of positions, C(m - 1 + N, N) long
        :rtype: list
        :raises FockBasisError: Occurs if m is not between 1 and M
        """
        if not (isinstance(m, (int, np.integer)) and 1 <= m <= self._ports):
            raise FockBasisError("Invalid original port count")
        return [i for i, occ in enumerate(self._states) if not any(occ[m:])]


@functools.lru_cache(maxsize=32)
def enumerate_basis(photons, ports):
    """Canonical Fock basis for N photons in M ports

    Bases are immutable and cached, so repeated calls share one instance.

    :param photons: Number of photons N
    :param ports: Number of ports M
    :return: Basis of C(M - 1 + N, N) occupations
    :rtype: FockBasis
    :raises FockBasisError: Occurs if photon or port count is not positive
    """
    return FockBasis(photons, ports)
