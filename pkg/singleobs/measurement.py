"""Single-observable measurement simulation and measurement operators"""

import dataclasses
import json
import logging
from enum import Enum

import numpy as np
from scipy import linalg

from .exc import MeasurementError
from .fock import dimension, enumerate_basis
from .lifting import PortUnitary, embed_with_ancilla, evolve_density, lift_unitary


class DetectorMode(Enum):
    """Which outcomes the detectors resolve"""

    FULL = "full"
    CLICK = "click"


class NoiseModel(Enum):
    """How an SNR in dB maps to a noise level"""

    TOTAL = "total"
    PER_ENTRY = "per_entry"


@dataclasses.dataclass
class MeasurementRecord:
    """Outcome probabilities of the single observable, with provenance

    :param values: Real outcome vector, D long (full) or C(M, N) long (click)
    :param photons: Number of photons N
    :param ports: Total number of ports M
    :param original_ports: Number of input ports m
    :param mode: DetectorMode
    :param snr_db: SNR of added noise, None when noiseless
    :param noise_model: NoiseModel of added noise
    :param noise_power: Expected squared norm of the added noise
    :param coupler_seed: Seed the coupler was drawn with
    :param noise_seed: Seed the noise was drawn with
    :param coupler_family: Name of the CouplerFamily
    :param theta: Coupling length, evanescent couplers only
    """

    values: np.ndarray
    photons: int
    ports: int
    original_ports: int
    mode: DetectorMode = DetectorMode.FULL
    snr_db: object = None
    noise_model: NoiseModel = NoiseModel.TOTAL
    noise_power: float = 0.0
    coupler_seed: object = None
    noise_seed: object = None
    coupler_family: str = "haar"
    theta: object = None

    def __post_init__(self):
        """Normalise field types"""
        self.values = np.asarray(self.values, dtype=float)
        self.mode = DetectorMode(self.mode)
        self.noise_model = NoiseModel(self.noise_model)

    @property
    def ancilla_ports(self):
        """Number of vacuum ancilla ports M - m"""
        return self.ports - self.original_ports

    @property
    def noisy(self):
        """Whether noise has been added"""
        return self.snr_db is not None

    def to_dict(self):
        """Serialise to a JSON friendly dictionary

        :return: Record fields
        :rtype: dict
        """
        data = dataclasses.asdict(self)
        data["values"] = self.values.tolist()
        data["mode"] = self.mode.value
        data["noise_model"] = self.noise_model.value
        return data

    @classmethod
    def from_dict(cls, data):
        """Load from the dictionary written by to_dict

        :param data: Dictionary
        :return: Record
        :rtype: MeasurementRecord
        :raises MeasurementError: Occurs if fields are missing or invalid
        """
        try:
            return cls(**data)
        except (TypeError, ValueError) as err:
            raise MeasurementError(f"Invalid measurement record: {err}") from None

    def to_json(self):
        """Serialise to JSON text"""
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text):
        """Load from JSON text

        :param text: JSON document
        :return: Record
        :rtype: MeasurementRecord
        :raises MeasurementError: Occurs if text is not a valid record
        """
        try:
            data = json.loads(text)
        except json.JSONDecodeError as err:
            raise MeasurementError(f"Invalid measurement record: {err}") from None
        return cls.from_dict(data)


class MeasurementMatrix:
    """Linear map from the column-stacked input state to outcome probabilities

    Row k is the column-stacked B^k = a a^dagger, a being row k of the lifted
    unitary restricted to the original columns. The rows are kept in that
    factor form; the dense rows x d^2 matrix is built on demand.

    :param factors: rows x d complex array of the a vectors
    :param mode: DetectorMode of the rows
    :param rows: Positions of the rows in the full Fock basis
    :param provenance: Dictionary describing coupler and basis
    """

    def __init__(self, factors, mode=DetectorMode.FULL, rows=None, provenance=None):
        """Initialise measurement matrix

        :param factors: rows x d complex array
        :param mode: DetectorMode
        :param rows: Positions of the rows in the full Fock basis
        :param provenance: Dictionary describing coupler and basis
        """
        q = np.array(factors, dtype=complex)
        if q.ndim != 2:
            raise MeasurementError("Factors must be a 2D array")
        q.setflags(write=False)
        self._factors = q
        self.mode = DetectorMode(mode)
        self.rows = list(range(q.shape[0])) if rows is None else list(rows)
        self.provenance = dict(provenance or {})
        self._dense = None
        self._norm_sq = None

    @property
    def factors(self):
        """Read-only rows x d factor array"""
        return self._factors

    @property
    def n_rows(self):
        """Number of measurements"""
        return self._factors.shape[0]

    @property
    def dim(self):
        """Dimension d of the input state"""
        return self._factors.shape[1]

    @property
    def matrix(self):
        """Dense rows x d^2 complex matrix acting on column-stacked states"""
        if self._dense is None:
            q = self._factors
            dense = np.einsum('ki,kj->kji', q, q.conj()).reshape(self.n_rows, self.dim * self.dim)
            dense.setflags(write=False)
            self._dense = dense
        return self._dense

    def forward(self, x):
        """Outcome probabilities of a d x d Hermitian matrix

        :param x: d x d array
        :return: Real vector, one entry per row
        :rtype: numpy.ndarray
        """
        q = self._factors
        return np.real(np.sum((q @ x) * q.conj(), axis=1))

    def adjoint(self, r):
        """Adjoint map: sum_k r_k E_k

        :param r: Real vector, one entry per row
        :return: d x d Hermitian array
        :rtype: numpy.ndarray
        """
        q = self._factors
        return (q.conj().T * r) @ q

    def operator_norm_squared(self, iterations=100, seed=0):
        """Largest eigenvalue of the adjoint-forward product, by power iteration

        :param iterations: Maximum number of iterations
        :param seed: Seed for the start matrix
        :return: Estimate of the squared operator norm
        :rtype: float
        """
        if self._norm_sq is not None:
            return self._norm_sq
        rng = np.random.default_rng(seed)
        x = rng.standard_normal((self.dim, self.dim)) + 1j * rng.standard_normal((self.dim, self.dim))
        x = (x + x.conj().T) / 2
        x /= np.linalg.norm(x)
        est = 0.0
        for _ in range(iterations):
            y = self.adjoint(self.forward(x))
            norm = np.linalg.norm(y)
            if norm == 0:
                break
            x = y / norm
            if abs(norm - est) <= 1e-10 * norm:
                est = norm
                break
            est = norm
        self._norm_sq = float(est)
        return self._norm_sq

    def select(self, positions):
        """Keep a subset of rows

        :param positions: Positions into the current rows
        :return: Reduced measurement matrix
        :rtype: MeasurementMatrix
        """
        positions = list(positions)
        return MeasurementMatrix(self._factors[positions],
                                 mode=self.mode,
                                 rows=[self.rows[p] for p in positions],
                                 provenance=self.provenance)

    def __repr__(self):
        """Short description of map"""
        return f"MeasurementMatrix(rows={self.n_rows}, d={self.dim}, mode={self.mode.value})"


class PovmSet:
    """Rank-1 POVM on the original system equivalent to the single observable

    :param elements: Stack of d x d Hermitian PSD matrices, one per outcome
    :param check: Whether to verify positivity, rank and completeness
    :raises MeasurementError: Occurs if elements do not form a rank-1 POVM
    """

    TOL = 1e-9

    def __init__(self, elements, check=True):
        """Initialise POVM

        :param elements: Stack of d x d matrices
        :param check: Whether to verify the POVM conditions
        """
        e = np.array(elements, dtype=complex)
        if e.ndim != 3 or e.shape[1] != e.shape[2]:
            raise MeasurementError("POVM elements must be a stack of square matrices")
        if check:
            eig = np.linalg.eigvalsh(e)
            if eig.min() < -self.TOL:
                raise MeasurementError("POVM element is not positive semidefinite")
            # Outcomes the coupler never reaches from the input ports give zero elements
            if np.any(np.sum(eig > self.TOL * max(eig.max(), 1.0), axis=1) > 1):
                raise MeasurementError("POVM element is not rank 1")
            if np.linalg.norm(e.sum(axis=0) - np.eye(e.shape[1])) > self.TOL:
                raise MeasurementError("POVM elements do not sum to identity")
        e.setflags(write=False)
        self._elements = e

    @property
    def elements(self):
        """Read-only stack of elements"""
        return self._elements

    def __len__(self):
        """Number of outcomes"""
        return self._elements.shape[0]

    def probabilities(self, rho):
        """Tr(E_i rho) for every outcome

        :param rho: DensityMatrix of dimension d
        :return: Real vector
        :rtype: numpy.ndarray
        """
        return np.real(np.einsum('kij,ji->k', self._elements, rho.matrix))


def _validate_geometry(u, m):
    if not isinstance(u, PortUnitary):
        u = PortUnitary(u)
    if not (isinstance(m, (int, np.integer)) and 1 <= m <= u.dim):
        raise MeasurementError(f"Original port count must be 1 to {u.dim}")
    return u


def _original_factors(u, m, photons, lifted):
    u = _validate_geometry(u, m)
    basis = enumerate_basis(photons, u.dim)
    if lifted is None:
        lifted = lift_unitary(u, photons, basis)
    idx = basis.original_subspace_indices(m)
    return basis, lifted.matrix[:, idx]


def observable_spectrum(lifted):
    """Spectral projectors of the single observable

    :param lifted: LiftedUnitary
    :return: List of (outcome label, vector U^dagger |{n}^i>)
    :rtype: list
    """
    u = lifted.matrix
    return [(i, u[i].conj().copy()) for i in range(lifted.dim)]


def observable_matrix(lifted):
    """The observable itself, U^dagger A U with A = sum_i i |{n}^i><{n}^i|

    :param lifted: LiftedUnitary
    :return: D x D Hermitian array
    :rtype: numpy.ndarray
    """
    u = lifted.matrix
    labels = np.arange(1, lifted.dim + 1)
    return u.conj().T @ (labels[:, None] * u)


def simulate_measurements(rho_0, u, m, photons, lifted=None, coupler_seed=None,
                          coupler_family="haar", theta=None):
    """Outcome probabilities of the single observable

    The input state is padded with the vacuum ancilla, evolved through the
    lifted coupler and read out on the Fock-basis diagonal.

    :param rho_0: DensityMatrix over enumerate_basis(N, m)
    :param u: PortUnitary on M ports
    :param m: Number of input ports
    :param photons: Number of photons N
    :param lifted: Optional precomputed lift_unitary(u, N)
    :param coupler_seed: Seed recorded as provenance
    :param coupler_family: Family recorded as provenance
    :param theta: Coupling length recorded as provenance
    :return: Full-mode record, D entries summing to 1
    :rtype: MeasurementRecord
    :raises MeasurementError: Occurs if rho_0 does not match N photons in m ports
    """
    u = _validate_geometry(u, m)
    d = dimension(photons, m)
    if rho_0.dim != d:
        raise MeasurementError(f"State dimension {rho_0.dim} does not match {d} for N={photons}, m={m}")
    basis = enumerate_basis(photons, u.dim)
    if lifted is None:
        lifted = lift_unitary(u, photons, basis)
    rho_out = evolve_density(embed_with_ancilla(rho_0, basis, m), lifted)
    values = np.maximum(np.real(np.diag(rho_out.matrix)), 0.0)
    return MeasurementRecord(values=values, photons=photons, ports=u.dim, original_ports=m,
                             coupler_seed=coupler_seed, coupler_family=str(coupler_family),
                             theta=theta)


def add_noise(record, snr_db, seed=None, model=NoiseModel.TOTAL):
    """Add white Gaussian noise at a given SNR, clamping negatives to zero

    With the TOTAL model the SNR is 10 log10(|y|^2 / E|n|^2); with PER_ENTRY
    every entry gets noise of standard deviation |y_i| 10^(-snr/20).

    :param record: MeasurementRecord
    :param snr_db: SNR in dB, None or inf for no noise
    :param seed: Seed or numpy Generator
    :param model: NoiseModel
    :return: Noisy record
    :rtype: MeasurementRecord
    :raises MeasurementError: Occurs if snr_db is NaN
    """
    if snr_db is None or np.isposinf(snr_db):
        return dataclasses.replace(record, values=record.values.copy())
    if np.isnan(snr_db) or np.isneginf(snr_db):
        raise MeasurementError("Invalid SNR")
    model = NoiseModel(model)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    y = record.values
    if model == NoiseModel.TOTAL:
        sigma = np.full(y.shape, np.linalg.norm(y) / np.sqrt(max(y.size, 1) * 10 ** (snr_db / 10)))
    else:
        sigma = np.abs(y) * 10 ** (-snr_db / 20)
    noise = rng.standard_normal(y.shape) * sigma
    power = float(np.sum(sigma ** 2))
    logging.debug(f"Noise at {snr_db} dB ({model.value}), expected power {power:.3e}")
    return dataclasses.replace(record,
                               values=np.maximum(y + noise, 0.0),
                               snr_db=float(snr_db),
                               noise_model=model,
                               noise_power=record.noise_power + power,
                               noise_seed=seed if not isinstance(seed, np.random.Generator) else None)


def restrict_to_clicks(record, basis=None):
    """Keep only collision-free outcomes, as seen by click detectors

    :param record: Full-mode MeasurementRecord
    :param basis: Optional FockBasis of the record
    :return: Click-mode record, C(M, N) entries in click_subset order
    :rtype: MeasurementRecord
    :raises MeasurementError: Occurs if record is already click mode or sizes differ
    """
    if record.mode == DetectorMode.CLICK:
        raise MeasurementError("Record is already restricted to click events")
    if basis is None:
        basis = enumerate_basis(record.photons, record.ports)
    if record.values.size != basis.dim:
        raise MeasurementError("Record does not match the Fock basis")
    idx = basis.click_subset()
    return dataclasses.replace(record, values=record.values[idx], mode=DetectorMode.CLICK)


def povm_elements(u, m, photons, lifted=None):
    """POVM on the input system realised by the coupler, ancilla and observable

    E_i = v_i v_i^dagger with v_i the conjugate of row i of the lifted unitary
    restricted to the original columns, so that Tr(E_i rho_0) reproduces the
    simulated outcome probabilities.

    :param u: PortUnitary on M ports
    :param m: Number of input ports
    :param photons: Number of photons N
    :param lifted: Optional precomputed lift_unitary(u, N)
    :return: D rank-1 elements
    :rtype: PovmSet
    """
    _, q = _original_factors(u, m, photons, lifted)
    return PovmSet(np.einsum('ki,kj->kij', q.conj(), q))


def build_measurement_matrix(u, m, photons, mode=DetectorMode.FULL, lifted=None):
    """Measurement matrix of the single observable

    :param u: PortUnitary on M ports
    :param m: Number of input ports
    :param photons: Number of photons N
    :param mode: DetectorMode, CLICK keeps only collision-free rows
    :param lifted: Optional precomputed lift_unitary(u, N)
    :return: Measurement matrix
    :rtype: MeasurementMatrix
    """
    mode = DetectorMode(mode)
    basis, q = _original_factors(u, m, photons, lifted)
    rows = basis.click_subset() if mode == DetectorMode.CLICK else list(range(basis.dim))
    provenance = {"photons": photons, "ports": basis.ports, "original_ports": m}
    return MeasurementMatrix(q[rows], mode=mode, rows=rows, provenance=provenance)


def measurement_rank(a_mat, rel_tol=1e-8):
    """Numerical rank of the measurement matrix

    :param a_mat: MeasurementMatrix
    :param rel_tol: Singular values above rel_tol times the largest count
    :return: Rank
    :rtype: int
    """
    s = linalg.svdvals(a_mat.matrix)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rel_tol * s[0]))
