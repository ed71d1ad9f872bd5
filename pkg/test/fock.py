"""Test Fock basis functionality"""

import unittest

import numpy as np

from singleobs import FockBasis, dimension, enumerate_basis
from singleobs.exc import FockBasisError


class TestFockBasis(unittest.TestCase):
    """Test Fock basis functions"""

    def test_dimension(self):
        """Test dimension bookkeeping"""
        self.assertEqual(dimension(3, 4), 20)
        self.assertEqual(dimension(3, 7), 84)
        self.assertEqual(dimension(3, 16), 816)
        self.assertEqual(len(enumerate_basis(3, 4)), 20)
        self.assertEqual(enumerate_basis(3, 16).dim, 816)

    def test_single_photon(self):
        """Test single photon basis is one-hot in port order"""
        basis = enumerate_basis(1, 5)
        self.assertEqual(basis.states, tuple(tuple(int(i == j) for j in range(5)) for i in range(5)))

    def test_order(self):
        """Test colexicographic order and index round trip"""
        basis = enumerate_basis(3, 6)
        keys = [occ[::-1] for occ in basis.states]
        self.assertEqual(keys, sorted(keys))
        self.assertEqual(basis.index_of(basis.states[0]), 0)
        self.assertEqual(basis.index_of(basis.states[-1]), dimension(3, 6) - 1)
        for k, occ in enumerate(basis.states):
            self.assertEqual(basis.index_of(occ), k)

    def test_index_errors(self):
        """Test malformed occupations"""
        basis = enumerate_basis(3, 4)
        self.assertRaises(FockBasisError, basis.index_of, (1, 1, 1))
        self.assertRaises(FockBasisError, basis.index_of, (1, 1, 0, 0))
        self.assertRaises(FockBasisError, basis.index_of, (4, 0, 0, -1))

    def test_invalid_counts(self):
        """Test invalid photon and port counts"""
        self.assertRaises(FockBasisError, FockBasis, 0, 3)
        self.assertRaises(FockBasisError, FockBasis, 2, 0)
        self.assertRaises(FockBasisError, FockBasis, 1.5, 3)
        self.assertRaises(FockBasisError, dimension, -1, 3)

    def test_click_subset(self):
        """Test collision-free outcomes"""
        self.assertEqual(len(enumerate_basis(3, 11).click_subset()), 165)
        self.assertEqual(len(enumerate_basis(3, 8).click_subset()), 56)
        basis = enumerate_basis(4, 4)
        self.assertEqual([basis.states[i] for i in basis.click_subset()], [(1, 1, 1, 1)])
        self.assertEqual(enumerate_basis(3, 2).click_subset(), [])

    def test_original_subspace(self):
        """Test input subspace is a prefix matching the m-port basis"""
        big = enumerate_basis(3, 7)
        idx = big.original_subspace_indices(3)
        self.assertEqual(idx, list(range(10)))
        small = enumerate_basis(3, 3)
        self.assertEqual([big.states[i][:3] for i in idx], list(small.states))
        self.assertEqual(big.original_subspace_indices(7), list(range(84)))
        self.assertEqual(len(enumerate_basis(3, 16).original_subspace_indices(7)), 84)
        self.assertRaises(FockBasisError, big.original_subspace_indices, 0)
        self.assertRaises(FockBasisError, big.original_subspace_indices, 8)

    def test_occupation_array(self):
        """Test occupation array"""
        basis = enumerate_basis(2, 3)
        occ = basis.occupation_array()
        self.assertEqual(occ.shape, (6, 3))
        self.assertTrue(np.all(occ.sum(axis=1) == 2))

    def test_cache(self):
        """Test bases are shared"""
        self.assertIs(enumerate_basis(2, 5), enumerate_basis(2, 5))


if __name__ == '__main__':
    unittest.main()
