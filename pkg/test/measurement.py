"""Test measurement functionality"""

import unittest

import numpy as np
from scipy import linalg

from singleobs import (DensityMatrix, DetectorMode, EnsembleSpec, MeasurementRecord, NoiseModel, PovmSet,
                       add_noise, block_coupler, build_measurement_matrix, enumerate_basis, lift_unitary,
                       measurement_rank, observable_matrix, observable_spectrum, povm_elements,
                       restrict_to_clicks, sample_density_matrix, sample_haar_unitary, simulate_measurements)
from singleobs.exc import MeasurementError


class TestObservable(unittest.TestCase):
    """Test observable functions"""

    def test_identity_projectors(self):
        """Test identity coupler projectors are the Fock basis vectors"""
        lifted = lift_unitary(np.eye(3), 2)
        for i, vec in observable_spectrum(lifted):
            self.assertLessEqual(np.linalg.norm(vec - np.eye(6)[i]), 1e-15)

    def test_observable(self):
        """Test the observable is Hermitian with orthonormal projectors"""
        lifted = lift_unitary(sample_haar_unitary(4, seed=1), 2)
        a = observable_matrix(lifted)
        self.assertLessEqual(np.linalg.norm(a - a.conj().T), 1e-10)
        vecs = np.array([vec for _, vec in observable_spectrum(lifted)])
        self.assertLessEqual(np.linalg.norm(vecs.conj() @ vecs.T - np.eye(10)), 1e-9)
        self.assertLessEqual(np.abs(np.sort(linalg.eigvalsh(a)) - np.arange(1, 11)).max(), 1e-9)


class TestSimulation(unittest.TestCase):
    """Test simulation functions"""

    def test_identity_coupler(self):
        """Test a Fock state through the identity gives an indicator"""
        rho = DensityMatrix.pure(np.eye(10)[4])
        record = simulate_measurements(rho, np.eye(7), 3, 3)
        expected = np.zeros(84)
        expected[4] = 1
        self.assertLessEqual(np.abs(record.values - expected).max(), 1e-12)
        self.assertEqual(record.ancilla_ports, 4)
        self.assertFalse(record.noisy)

    def test_three_paths(self):
        """Test Fock evolution, POVM and measurement matrix agree"""
        for k in range(20):
            rho = sample_density_matrix(EnsembleSpec(10, 1 + k % 4, seed=k))
            u = sample_haar_unitary(7, seed=100 + k)
            lifted = lift_unitary(u, 3)
            y = simulate_measurements(rho, u, 3, 3, lifted=lifted).values
            povm = povm_elements(u, 3, 3, lifted=lifted)
            a_mat = build_measurement_matrix(u, 3, 3, lifted=lifted)
            self.assertAlmostEqual(y.sum(), 1, delta=1e-10)
            self.assertLessEqual(np.abs(y - povm.probabilities(rho)).max(), 1e-10)
            self.assertLessEqual(np.abs(y - a_mat.forward(rho.matrix)).max(), 1e-10)
            dense = np.real(a_mat.matrix @ rho.matrix.flatten(order="F"))
            self.assertLessEqual(np.abs(y - dense).max(), 1e-10)
            self.assertLessEqual(np.linalg.norm(povm.elements.sum(axis=0) - np.eye(10)), 1e-9)

    def test_povm(self):
        """Test POVM elements are rank 1 and positive"""
        povm = povm_elements(sample_haar_unitary(5, seed=2), 2, 3)
        self.assertEqual(len(povm), 35)
        rng = np.random.default_rng(3)
        psi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        self.assertTrue(np.all(np.real(np.einsum('i,kij,j->k', psi.conj(), povm.elements, psi)) >= -1e-12))
        identity = povm_elements(np.eye(3), 3, 2)
        self.assertLessEqual(np.linalg.norm(identity.elements - np.einsum('ki,kj->kij', np.eye(6), np.eye(6))),
                             1e-12)
        self.assertRaises(MeasurementError, PovmSet, [np.eye(2) / 2, np.eye(2) / 2])
        self.assertRaises(MeasurementError, PovmSet, [np.diag([1.0, 0]), np.diag([0, 0.5])])
        self.assertRaises(MeasurementError, PovmSet, [np.diag([1.0, 0]), np.diag([0, 2.0]), np.diag([0, -1.0])])

    def test_geometry(self):
        """Test mismatched state and port counts"""
        rho = DensityMatrix.maximally_mixed(4)
        self.assertRaises(MeasurementError, simulate_measurements, rho, np.eye(5), 3, 3)
        self.assertRaises(MeasurementError, simulate_measurements, rho, np.eye(5), 6, 3)


class TestNoise(unittest.TestCase):
    """Test noise functions"""

    def setUp(self):
        """Build a noiseless record"""
        self.record = MeasurementRecord(values=np.full(100, 0.01), photons=1, ports=100, original_ports=1)

    def test_noiseless(self):
        """Test infinite SNR leaves the record unchanged"""
        for snr in (None, float("inf")):
            out = add_noise(self.record, snr, seed=1)
            self.assertTrue(np.array_equal(out.values, self.record.values))
            self.assertFalse(out.noisy)
        self.assertRaises(MeasurementError, add_noise, self.record, float("nan"))

    def test_snr(self):
        """Test empirical SNR matches the request"""
        rng = np.random.default_rng(4)
        power = np.mean([np.sum((add_noise(self.record, 25, rng).values - 0.01) ** 2) for _ in range(1000)])
        snr = 10 * np.log10(np.sum(self.record.values ** 2) / power)
        self.assertAlmostEqual(snr, 25, delta=0.5)
        noisy = add_noise(self.record, 25, seed=5)
        self.assertTrue(noisy.noisy)
        self.assertAlmostEqual(noisy.noise_power, 0.01 / 10 ** 2.5)
        self.assertEqual(noisy.noise_seed, 5)

    def test_per_entry(self):
        """Test per-entry SNR"""
        record = MeasurementRecord(values=np.linspace(0.001, 0.019, 100), photons=1, ports=100, original_ports=1)
        noisy = add_noise(record, 20, seed=6, model=NoiseModel.PER_ENTRY)
        self.assertEqual(noisy.noise_model, NoiseModel.PER_ENTRY)
        self.assertAlmostEqual(noisy.noise_power, np.sum(record.values ** 2) / 100)
        self.assertTrue(np.all(np.abs(noisy.values - record.values) <= 5 * record.values / 10))

    def test_clamp(self):
        """Test noisy values stay non-negative"""
        zero = MeasurementRecord(values=np.zeros(50), photons=1, ports=50, original_ports=1)
        self.assertTrue(np.all(add_noise(zero, 10, seed=1).values >= 0))
        small = MeasurementRecord(values=np.full(50, 1e-3), photons=1, ports=50, original_ports=1)
        self.assertTrue(np.all(add_noise(small, -10, seed=2).values >= 0))


class TestClicks(unittest.TestCase):
    """Test click detector functions"""

    def test_restrict(self):
        """Test only collision-free outcomes are kept"""
        rho = sample_density_matrix(EnsembleSpec(10, 2, seed=1))
        record = simulate_measurements(rho, sample_haar_unitary(8, seed=2), 3, 3)
        self.assertEqual(record.values.size, 120)
        clicks = restrict_to_clicks(record)
        self.assertEqual(clicks.values.size, 56)
        self.assertEqual(clicks.mode, DetectorMode.CLICK)
        self.assertLessEqual(clicks.values.sum(), 1 + 1e-12)
        self.assertRaises(MeasurementError, restrict_to_clicks, clicks)

    def test_all_ports(self):
        """Test N = M keeps a single outcome"""
        rho = DensityMatrix.maximally_mixed(4)
        record = simulate_measurements(rho, sample_haar_unitary(3, seed=3), 2, 3)
        self.assertEqual(restrict_to_clicks(record, enumerate_basis(3, 3)).values.size, 1)

    def test_click_matrix(self):
        """Test click rows match restricted records"""
        u = sample_haar_unitary(8, seed=4)
        rho = sample_density_matrix(EnsembleSpec(10, 3, seed=5))
        a_mat = build_measurement_matrix(u, 3, 3, mode=DetectorMode.CLICK)
        clicks = restrict_to_clicks(simulate_measurements(rho, u, 3, 3))
        self.assertEqual(a_mat.n_rows, 56)
        self.assertLessEqual(np.abs(a_mat.forward(rho.matrix) - clicks.values).max(), 1e-10)


class TestRecord(unittest.TestCase):
    """Test measurement record functions"""

    def test_json(self):
        """Test records survive JSON"""
        rho = sample_density_matrix(EnsembleSpec(10, 2, seed=1))
        record = add_noise(simulate_measurements(rho, sample_haar_unitary(7, seed=2), 3, 3, coupler_seed=2),
                           25, seed=3)
        back = MeasurementRecord.from_json(record.to_json())
        self.assertTrue(np.array_equal(back.values, record.values))
        self.assertEqual(back.coupler_seed, 2)
        self.assertEqual(back.snr_db, 25)
        self.assertEqual(back.mode, DetectorMode.FULL)

    def test_invalid_json(self):
        """Test malformed records"""
        self.assertRaises(MeasurementError, MeasurementRecord.from_json, "{")
        self.assertRaises(MeasurementError, MeasurementRecord.from_json, '{"values": [1]}')
        self.assertRaises(MeasurementError, MeasurementRecord.from_dict,
                          {"values": [1], "photons": 1, "ports": 1, "original_ports": 1, "mode": "blink"})


class TestMeasurementMatrix(unittest.TestCase):
    """Test measurement matrix functions"""

    def test_adjoint(self):
        """Test forward and adjoint maps are adjoint"""
        a_mat = build_measurement_matrix(sample_haar_unitary(6, seed=1), 3, 2)
        rng = np.random.default_rng(2)
        x = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        x = x + x.conj().T
        r = rng.standard_normal(a_mat.n_rows)
        self.assertAlmostEqual(float(a_mat.forward(x) @ r), float(np.real(np.vdot(a_mat.adjoint(r), x))))

    def test_norm(self):
        """Test power iteration against singular values"""
        a_mat = build_measurement_matrix(sample_haar_unitary(7, seed=3), 3, 3)
        top = linalg.svdvals(a_mat.matrix)[0] ** 2
        est = a_mat.operator_norm_squared()
        self.assertLessEqual(est, top * (1 + 1e-9))
        self.assertGreaterEqual(est, top * 0.99)

    def test_rows(self):
        """Test every row is a Hermitian rank-1 matrix"""
        a_mat = build_measurement_matrix(sample_haar_unitary(7, seed=12), 3, 3)
        d = a_mat.dim
        dense = a_mat.matrix
        for k in range(a_mat.n_rows):
            e = dense[k].reshape(d, d, order="F")
            self.assertLessEqual(np.linalg.norm(e - e.conj().T), 1e-12)
            s = linalg.svdvals(e)
            self.assertGreater(s[0], 0)
            self.assertLessEqual(s[1], 1e-12 * s[0])
            self.assertAlmostEqual(np.trace(e).real, s[0], delta=1e-12)

    def test_select(self):
        """Test row selection"""
        a_mat = build_measurement_matrix(sample_haar_unitary(7, seed=4), 3, 3)
        sub = a_mat.select([0, 5, 9])
        self.assertEqual(sub.rows, [0, 5, 9])
        self.assertTrue(np.array_equal(sub.factors, a_mat.factors[[0, 5, 9]]))

    def test_rank(self):
        """Test Haar couplers give full rank up to d^2"""
        for ports, expected in ((7, 84), (9, 165), (11, 286), (13, 400)):
            a_mat = build_measurement_matrix(sample_haar_unitary(ports, seed=ports), 4, 3)
            self.assertEqual(measurement_rank(a_mat), expected)

    def test_block_rank(self):
        """Test a coupler that never mixes in the ancilla gives rank at most d"""
        a_mat = build_measurement_matrix(block_coupler(4, 9, seed=5), 4, 3)
        self.assertLessEqual(measurement_rank(a_mat), 20)


if __name__ == '__main__':
    unittest.main()
