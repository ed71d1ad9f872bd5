"""Test state metric functionality"""

import unittest

import numpy as np

from singleobs import (DensityMatrix, EnsembleSpec, depolarize, evolve_density, fidelity, lift_unitary,
                       numerical_rank, purity, sample_density_matrix, sample_haar_unitary, spearman,
                       trace_distance, von_neumann_entropy)
from singleobs.exc import MetricsError


class TestMetrics(unittest.TestCase):
    """Test metric functions"""

    def test_fidelity(self):
        """Test fidelity special cases"""
        rho = sample_density_matrix(EnsembleSpec(6, 3, seed=1))
        self.assertAlmostEqual(fidelity(rho, rho), 1, delta=1e-9)
        a = DensityMatrix.pure([1, 0, 0])
        b = DensityMatrix.pure([0, 1, 0])
        self.assertLessEqual(fidelity(a, b), 1e-10)
        rng = np.random.default_rng(2)
        for _ in range(5):
            psi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
            phi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
            psi /= np.linalg.norm(psi)
            phi /= np.linalg.norm(phi)
            f = fidelity(DensityMatrix.pure(psi), DensityMatrix.pure(phi))
            self.assertAlmostEqual(f, abs(np.vdot(psi, phi)), delta=1e-7)

    def test_fidelity_large(self):
        """Test self and orthogonal fidelity at d = 20 and d = 84"""
        rng = np.random.default_rng(3)
        for d in (20, 84):
            for seed in range(10):
                rho = sample_density_matrix(EnsembleSpec(d, 1 + seed % 3, seed=seed))
                f = fidelity(rho, rho)
                self.assertLessEqual(abs(f - 1), 1e-9)
                self.assertLessEqual(trace_distance(rho, rho), 1e-6)
            for _ in range(10):
                psi = rng.standard_normal(d) + 1j * rng.standard_normal(d)
                phi = rng.standard_normal(d) + 1j * rng.standard_normal(d)
                psi /= np.linalg.norm(psi)
                phi -= np.vdot(psi, phi) * psi
                f = fidelity(DensityMatrix.pure(psi), DensityMatrix.pure(phi))
                self.assertGreaterEqual(f, 0)
                self.assertLessEqual(f, 1e-10)

    def test_fidelity_one(self):
        """Test fidelity is 1 exactly when the trace distance vanishes"""
        for seed in range(5):
            rho = sample_density_matrix(EnsembleSpec(10, 1 + seed, seed=seed))
            copy = DensityMatrix.from_dict(rho.to_dict())
            self.assertGreaterEqual(fidelity(rho, copy), 1 - 1e-9)
            self.assertLessEqual(trace_distance(rho, copy), 1e-6)
            other = sample_density_matrix(EnsembleSpec(10, 1 + seed, seed=seed + 20))
            self.assertGreater(trace_distance(rho, other), 1e-6)
            self.assertLess(fidelity(rho, other), 1 - 1e-9)

    def test_fidelity_properties(self):
        """Test symmetry, range and agreement with trace distance"""
        for seed in range(5):
            rho = sample_density_matrix(EnsembleSpec(5, 1 + seed % 5, seed=seed))
            sigma = sample_density_matrix(EnsembleSpec(5, 2, seed=seed + 10))
            f = fidelity(rho, sigma)
            self.assertAlmostEqual(f, fidelity(sigma, rho), delta=1e-7)
            self.assertLessEqual(f, 1 + 1e-9)
            self.assertGreaterEqual(f, 0)
            self.assertGreater(trace_distance(rho, sigma), 1e-6)
            self.assertLess(f, 1 - 1e-9)

    def test_fidelity_errors(self):
        """Test incompatible states"""
        self.assertRaises(MetricsError, fidelity, DensityMatrix.maximally_mixed(2), DensityMatrix.maximally_mixed(3))
        self.assertRaises(MetricsError, fidelity, np.diag([1.5, -0.5]), np.eye(2) / 2)
        self.assertRaises(MetricsError, fidelity, np.eye(2) / 2, np.diag([1.5, -0.5]))
        self.assertRaises(MetricsError, trace_distance, np.eye(2) / 2, np.eye(3) / 3)

    def test_purity(self):
        """Test purity bounds and unitary invariance"""
        self.assertAlmostEqual(purity(DensityMatrix.pure([1, 1j])), 1)
        self.assertAlmostEqual(purity(DensityMatrix.maximally_mixed(10)), 0.1)
        rho = sample_density_matrix(EnsembleSpec(10, 3, seed=3))
        lifted = lift_unitary(sample_haar_unitary(3, seed=4), 3)
        out = evolve_density(rho, lifted)
        self.assertAlmostEqual(purity(out), purity(rho), delta=1e-10)
        self.assertAlmostEqual(von_neumann_entropy(out), von_neumann_entropy(rho), delta=1e-9)

    def test_entropy(self):
        """Test entropy special cases and additivity"""
        self.assertAlmostEqual(von_neumann_entropy(DensityMatrix.pure([1, 2, 3])), 0, delta=1e-9)
        self.assertAlmostEqual(von_neumann_entropy(DensityMatrix.maximally_mixed(7)), np.log(7))
        rho = sample_density_matrix(EnsembleSpec(3, 2, seed=5))
        sigma = sample_density_matrix(EnsembleSpec(4, 3, seed=6))
        self.assertAlmostEqual(von_neumann_entropy(rho.tensor(sigma)),
                               von_neumann_entropy(rho) + von_neumann_entropy(sigma), delta=1e-9)

    def test_entropy_depolarized(self):
        """Test entropy grows with the depolarization fraction"""
        rho = sample_density_matrix(EnsembleSpec(6, 2, seed=7))
        values = [von_neumann_entropy(depolarize(rho, mu)) for mu in np.linspace(0, 1, 11)]
        self.assertTrue(np.all(np.diff(values) >= -1e-12))

    def test_rank(self):
        """Test numerical rank"""
        self.assertEqual(numerical_rank(DensityMatrix.pure([1, 1])), 1)
        self.assertEqual(numerical_rank(DensityMatrix.maximally_mixed(9)), 9)
        self.assertRaises(MetricsError, numerical_rank, DensityMatrix.maximally_mixed(2), 0)
        self.assertRaises(MetricsError, numerical_rank, DensityMatrix.maximally_mixed(2), 1)

    def test_trace_distance(self):
        """Test trace distance"""
        a = DensityMatrix.pure([1, 0])
        b = DensityMatrix.pure([0, 1])
        self.assertAlmostEqual(trace_distance(a, b), 1)
        self.assertAlmostEqual(trace_distance(a, a), 0)

    def test_spearman(self):
        """Test rank correlation"""
        self.assertAlmostEqual(spearman([1, 2, 3, 4], [0.99, 0.95, 0.9, 0.7]), -1)
        self.assertAlmostEqual(spearman([1, 2, 3], [1, 4, 9]), 1)


if __name__ == '__main__':
    unittest.main()
