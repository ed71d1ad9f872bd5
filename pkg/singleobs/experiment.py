"""Seeded experiment runners for the recovery studies"""

import concurrent.futures
import csv
import dataclasses
import functools
import hashlib
import json
import logging
import math
import os
import zlib

import numpy as np
from scipy.special import comb

from .ensembles import CouplerFamily, EnsembleSpec, make_coupler, sample_density_matrix
from .exc import (DensityMatrixError, EnsembleError, ExperimentError, FockBasisError, LiftingError,
                  MeasurementError, MetricsError, RecoveryError)
from .fock import dimension, enumerate_basis
from .lifting import check_lifting, lift_unitary
from .measurement import (DetectorMode, NoiseModel, add_noise, build_measurement_matrix, measurement_rank,
                          restrict_to_clicks, simulate_measurements)
from .metrics import fidelity, spearman
from .recovery import RecoveryConfig, Solver, recover

SCENARIOS = ("sweep", "coupler-study", "coupler-compare", "click", "rank-analysis", "solver-compare", "lift-check")

SCENARIO_DEFAULTS = {
    "sweep": {"photons": 3, "original_ports": 3, "ports": 7, "ranks": [1, 2], "trials": 50, "couplers": 5},
    "coupler-study": {"photons": 3, "original_ports": 4, "ports": 10, "ranks": [2], "trials": 1, "couplers": 30},
    "coupler-compare": {"photons": 3, "original_ports": 3, "ports": 7, "ranks": [1, 2, 3, 4, 5, 6],
                        "trials": 10, "couplers": 5},
    "click": {"photons": 3, "original_ports": 4, "ports": 11, "ranks": [1, 2], "trials": 30, "couplers": 1,
              "snr_db": 25.0, "detector": "click"},
    "rank-analysis": {"photons": 3, "original_ports": 4, "ports": 7, "ranks": [1], "trials": 1, "couplers": 20,
                      "port_values": [7, 9, 11, 13]},
    "solver-compare": {"photons": 3, "original_ports": 4, "ports": 11, "ranks": [1, 2, 3], "trials": 20,
                       "couplers": 2},
    "lift-check": {"photons": 3, "original_ports": 2, "ports": 4, "ranks": [1], "trials": 1, "couplers": 50,
                   "port_values": [4, 5, 6, 7, 8], "photon_values": [2, 3]},
}

CSV_COLUMNS = ["scenario", "rank", "coupler_idx", "trial_idx", "fidelity", "residual", "converged",
               "n_outer_iters", "D", "d", "meas_fraction", "snr_db", "mu", "seed"]

SNR_DEFINITIONS = {
    NoiseModel.TOTAL: "10 log10(|y|^2 / E|n|^2), white Gaussian noise",
    NoiseModel.PER_ENTRY: "10 log10(y_i^2 / E n_i^2) for every entry",
}

# Package errors and numerical failures that end one trial but not the run
_TRIAL_ERRORS = (DensityMatrixError, EnsembleError, LiftingError, MeasurementError, MetricsError, RecoveryError,
                 np.linalg.LinAlgError)


def _is_count(value, low):
    return isinstance(value, (int, np.integer)) and not isinstance(value, bool) and value >= low


@dataclasses.dataclass
class ExperimentSpec:
    """Declarative description of one experiment

    :param scenario: One of SCENARIOS
    :param photons: Number of photons N
    :param original_ports: Number of input ports m
    :param ports: Total number of ports M
    :param ranks: State ranks to sweep
    :param trials: States per rank and coupler
    :param couplers: Couplers per point
    :param mu: Depolarization fraction
    :param snr_db: SNR of the measurement noise, None when noiseless
    :param detector: DetectorMode
    :param recovery: RecoveryConfig, or a dictionary of its fields
    :param seed: Master seed
    :param out: Output directory
    :param coupler: CouplerFamily
    :param thetas: Coupling lengths tried for evanescent couplers
    :param port_values: Port counts M for the rank analysis and lifting check
    :param photon_values: Photon counts N for the lifting check
    :param workers: Worker threads
    :param noise_model: NoiseModel
    """

    scenario: str = "sweep"
    photons: int = 3
    original_ports: int = 3
    ports: int = 7
    ranks: list = dataclasses.field(default_factory=lambda: [1, 2])
    trials: int = 50
    couplers: int = 5
    mu: float = 0.0
    snr_db: object = None
    detector: DetectorMode = DetectorMode.FULL
    recovery: RecoveryConfig = dataclasses.field(default_factory=RecoveryConfig)
    seed: int = 0
    out: object = None
    coupler: CouplerFamily = CouplerFamily.HAAR
    thetas: list = dataclasses.field(default_factory=lambda: [0.5, 1.0, 2.0])
    port_values: list = dataclasses.field(default_factory=lambda: [7, 9, 11, 13])
    photon_values: list = dataclasses.field(default_factory=lambda: [2, 3])
    workers: int = 1
    noise_model: NoiseModel = NoiseModel.TOTAL

    def __post_init__(self):
        """Validate and normalise fields

        :raises ExperimentError: Occurs if a field is invalid
        """
        if self.scenario not in SCENARIOS:
            raise ExperimentError(f"Unknown scenario {self.scenario}")
        try:
            self.detector = DetectorMode(self.detector)
            self.coupler = CouplerFamily(self.coupler)
            self.noise_model = NoiseModel(self.noise_model)
        except ValueError as err:
            raise ExperimentError(str(err)) from None
        if isinstance(self.recovery, dict):
            try:
                self.recovery = RecoveryConfig.from_dict(self.recovery)
            except RecoveryError as err:
                raise ExperimentError(str(err)) from None
        if not (_is_count(self.photons, 1) and _is_count(self.original_ports, 1) and _is_count(self.ports, 1)):
            raise ExperimentError("Photon and port counts should be positive integers")
        if self.original_ports > self.ports:
            raise ExperimentError("Original ports cannot exceed total ports")
        self.ranks = list(self.ranks)
        d = self.dim
        if not self.ranks or not all(_is_count(r, 1) and r <= d for r in self.ranks):
            raise ExperimentError(f"Ranks should be between 1 and {d}")
        if not (_is_count(self.trials, 1) and _is_count(self.couplers, 1) and _is_count(self.workers, 1)):
            raise ExperimentError("Trials, couplers and workers should be at least 1")
        if not 0 <= self.mu <= 1:
            raise ExperimentError("Depolarization fraction should be 0 to 1")
        if self.snr_db is not None:
            self.snr_db = float(self.snr_db)
            if math.isnan(self.snr_db):
                raise ExperimentError("Invalid SNR")
        if not _is_count(self.seed, 0):
            raise ExperimentError("Seed should be a non-negative integer")
        if self.detector == DetectorMode.CLICK and self.photons > self.ports:
            raise ExperimentError("Click detection needs no more photons than ports")
        if self.coupler == CouplerFamily.BLOCK and self.original_ports >= self.ports:
            raise ExperimentError("Block coupler needs ancilla ports")
        if self.coupler == CouplerFamily.EVANESCENT and self.ports < 2:
            raise ExperimentError("Evanescent coupler needs at least 2 ports")
        self.thetas = [float(t) for t in self.thetas]
        if any(t < 0 for t in self.thetas):
            raise ExperimentError("Coupling lengths should be non-negative")
        self.port_values = list(self.port_values)
        if not all(_is_count(p, self.original_ports) for p in self.port_values):
            raise ExperimentError("Port values should be at least the original port count")
        self.photon_values = list(self.photon_values)
        if not self.photon_values or not all(_is_count(n, 1) for n in self.photon_values):
            raise ExperimentError("Photon values should be positive integers")

    @property
    def dim(self):
        """Dimension d of the input system"""
        return dimension(self.photons, self.original_ports)

    @property
    def full_dim(self):
        """Dimension D of the N-photon space over all ports"""
        return dimension(self.photons, self.ports)

    def to_dict(self):
        """Serialise to a JSON friendly dictionary

        :return: Field values
        :rtype: dict
        """
        data = dataclasses.asdict(self)
        data["detector"] = self.detector.value
        data["coupler"] = self.coupler.value
        data["noise_model"] = self.noise_model.value
        data["recovery"] = self.recovery.to_dict()
        return data

    def config_hash(self):
        """Short SHA-256 digest of the configuration, output path excluded

        :return: 12 hex digits
        :rtype: str
        """
        data = self.to_dict()
        data.pop("out", None)
        text = json.dumps(data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]

    @classmethod
    def from_dict(cls, data):
        """Load from a dictionary of field values

        :param data: Dictionary
        :return: Spec
        :rtype: ExperimentSpec
        :raises ExperimentError: Occurs if a key is unknown or a value invalid
        """
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ExperimentError(f"Unknown config keys: {', '.join(unknown)}")
        try:
            return cls(**data)
        except FockBasisError as err:
            raise ExperimentError(str(err)) from None


def load_config(path):
    """Read a JSON config file

    :param path: File path
    :return: Dictionary of ExperimentSpec fields
    :rtype: dict
    :raises ExperimentError: Occurs if the file cannot be read or is not a JSON object
    """
    try:
        with open(path) as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as err:
        raise ExperimentError(f"Cannot read config {path}: {err}") from None
    if not isinstance(data, dict):
        raise ExperimentError(f"Config {path} is not a JSON object")
    return data


def build_spec(scenario, config=None, **overrides):
    """Scenario defaults, then config file values, then explicit overrides

    :param scenario: One of SCENARIOS
    :param config: Optional dictionary from a config file
    :param overrides: Field values taking precedence
    :return: Spec
    :rtype: ExperimentSpec
    :raises ExperimentError: Occurs if scenario is unknown or the result is invalid
    """
    if scenario not in SCENARIO_DEFAULTS:
        raise ExperimentError(f"Unknown scenario {scenario}")
    data = dict(SCENARIO_DEFAULTS[scenario])
    config = dict(config or {})
    if "recovery" in config and isinstance(config["recovery"], dict):
        recovery = dict(data.get("recovery", {}))
        recovery.update(config.pop("recovery"))
        data["recovery"] = recovery
    data.update(config)
    data.update({k: v for k, v in overrides.items() if v is not None})
    data["scenario"] = scenario
    return ExperimentSpec.from_dict(data)


def derive_seed(master, *keys):
    """Child seed for a labelled piece of an experiment

    Strings enter as their CRC-32, integers as themselves, so the same
    (master, keys) always yields the same seed.

    :param master: Master seed
    :param keys: Labels such as scenario, role, rank, coupler and trial index
    :return: 32-bit seed
    :rtype: int
    """
    entropy = [int(master)] + [zlib.crc32(k.encode("utf-8")) if isinstance(k, str) else int(k) for k in keys]
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])


@dataclasses.dataclass
class CouplerSetup:
    """A coupler with its lifted unitary and measurement matrix, shared by trials"""

    index: int
    seed: object
    family: CouplerFamily
    theta: object
    unitary: object
    lifted: object
    a_mat: object


def prepare_coupler(spec, coupler_idx, family=None, theta=None):
    """Draw a coupler and build everything trials need from it

    :param spec: ExperimentSpec
    :param coupler_idx: Coupler index
    :param family: CouplerFamily, spec.coupler when None
    :param theta: Coupling length for evanescent couplers, 1 when None
    :return: Setup
    :rtype: CouplerSetup
    """
    family = spec.coupler if family is None else CouplerFamily(family)
    if family == CouplerFamily.EVANESCENT:
        seed = None
        theta = 1.0 if theta is None else float(theta)
    else:
        seed = derive_seed(spec.seed, spec.scenario, "coupler", coupler_idx)
        theta = None
    u = make_coupler(family, spec.ports, seed=seed, theta=theta, m=spec.original_ports)
    lifted = lift_unitary(u, spec.photons, enumerate_basis(spec.photons, spec.ports))
    a_mat = build_measurement_matrix(u, spec.original_ports, spec.photons, mode=spec.detector, lifted=lifted)
    a_mat.operator_norm_squared()
    return CouplerSetup(coupler_idx, seed, family, theta, u, lifted, a_mat)


@dataclasses.dataclass
class SweepRow:
    """Outcome of one (rank, coupler, trial) instance"""

    scenario: str
    rank: int
    coupler_idx: int
    trial_idx: int
    fidelity: float
    residual: float
    converged: bool
    n_outer_iters: int
    D: int
    d: int
    meas_fraction: float
    snr_db: object
    mu: float
    seed: int
    coupler_seed: object = None
    noise_seed: object = None


def _measure(spec, rho_0, setup, noise_seed):
    record = simulate_measurements(rho_0, setup.unitary, spec.original_ports, spec.photons,
                                   lifted=setup.lifted, coupler_seed=setup.seed,
                                   coupler_family=setup.family.value, theta=setup.theta)
    if spec.detector == DetectorMode.CLICK:
        record = restrict_to_clicks(record)
    return add_noise(record, spec.snr_db, noise_seed, spec.noise_model)


def simulate_instance(spec, rank=None, coupler_idx=0, trial_idx=0, setup=None):
    """Sample one state and its measurement record, as a trial would

    :param spec: ExperimentSpec
    :param rank: State rank, first of spec.ranks when None
    :param coupler_idx: Coupler index
    :param trial_idx: Trial index
    :param setup: Optional CouplerSetup for coupler_idx
    :return: (true state, record)
    :rtype: tuple
    """
    rank = spec.ranks[0] if rank is None else rank
    setup = setup or prepare_coupler(spec, coupler_idx)
    state_seed = derive_seed(spec.seed, spec.scenario, "state", rank, coupler_idx, trial_idx)
    noise_seed = derive_seed(spec.seed, spec.scenario, "noise", rank, coupler_idx, trial_idx)
    rho_0 = sample_density_matrix(EnsembleSpec(spec.dim, rank, spec.mu, state_seed))
    return rho_0, _measure(spec, rho_0, setup, noise_seed)


def run_trial(spec, rank, coupler_idx, trial_idx, setup=None, recovery=None, label=None, state_coupler_idx=None):
    """Sample, measure, recover and score one instance

    Every seed is derived from the spec, so a row can be replayed on its own.
    Failures are logged and give a row with NaN fidelity.

    :param spec: ExperimentSpec
    :param rank: State rank
    :param coupler_idx: Coupler index
    :param trial_idx: Trial index
    :param setup: Optional CouplerSetup, drawn from coupler_idx when None
    :param recovery: RecoveryConfig, spec.recovery when None
    :param label: Scenario column value, spec.scenario when None
    :param state_coupler_idx: Coupler index used in the state seed, coupler_idx when None
    :return: Row
    :rtype: SweepRow
    """
    setup = setup or prepare_coupler(spec, coupler_idx)
    cfg = recovery or spec.recovery
    label = label or spec.scenario
    key_idx = coupler_idx if state_coupler_idx is None else state_coupler_idx
    state_seed = derive_seed(spec.seed, spec.scenario, "state", rank, key_idx, trial_idx)
    noise_seed = derive_seed(spec.seed, spec.scenario, "noise", rank, coupler_idx, trial_idx)
    d = spec.dim
    n_rows = setup.a_mat.n_rows
    row = SweepRow(label, rank, coupler_idx, trial_idx, float("nan"), float("nan"), False, 0, n_rows, d,
                   n_rows / d ** 2, spec.snr_db, spec.mu, state_seed, setup.seed,
                   noise_seed if spec.snr_db is not None else None)
    try:
        rho_0 = sample_density_matrix(EnsembleSpec(d, rank, spec.mu, state_seed))
        record = _measure(spec, rho_0, setup, noise_seed)
        result = recover(record, setup.a_mat, cfg)
        row.fidelity = fidelity(rho_0, result.rho_rec)
        row.residual = result.residual
        row.converged = result.converged
        row.n_outer_iters = result.outer_iters
    except _TRIAL_ERRORS as err:
        logging.warning(f"{label} rank {rank} coupler {coupler_idx} trial {trial_idx} failed: {err}")
    return row


def _run_jobs(jobs, workers):
    # Results come back in submission order whatever order they finish in
    if workers == 1:
        return [job() for job in jobs]
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(job) for job in jobs]
        return [ftr.result() for ftr in futures]


def _sweep(spec, setups, label, recovery=None, shared_states=False):
    jobs = [functools.partial(run_trial, spec, rank, c, t, setup=setup, recovery=recovery, label=label,
                              state_coupler_idx=0 if shared_states else None)
            for rank in spec.ranks
            for c, setup in enumerate(setups)
            for t in range(spec.trials)]
    rows = _run_jobs(jobs, spec.workers)
    logging.info(f"{label}: {len(rows)} trials done")
    return rows


def _haar_setups(spec):
    return [prepare_coupler(spec, c) for c in range(spec.couplers)]


def _write_csv(path, columns, rows):
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow(["" if row[c] is None else row[c] for c in columns])


def _write_json(path, data):
    with open(path, "w") as f:
        json.dump(data, f, indent=2)
        f.write("\n")


class SweepResult:
    """Rows of a seeded sweep and their per (scenario, rank) aggregates

    :param spec: ExperimentSpec that produced the rows
    :param rows: List of SweepRow
    :param metadata: Scenario specific summary values
    """

    def __init__(self, spec, rows, metadata=None):
        """Initialise result

        :param spec: ExperimentSpec
        :param rows: List of SweepRow
        :param metadata: Dictionary
        """
        self.spec = spec
        self.rows = list(rows)
        self.metadata = dict(metadata or {})

    def labels(self):
        """Scenario column values in first-seen order"""
        return list(dict.fromkeys(row.scenario for row in self.rows))

    def fidelities(self, rank=None, label=None):
        """Fidelities of matching rows, NaN for failed trials

        :param rank: Only rows of this rank
        :param label: Only rows with this scenario value
        :return: Array
        :rtype: numpy.ndarray
        """
        return np.array([row.fidelity for row in self.rows
                         if (rank is None or row.rank == rank) and (label is None or row.scenario == label)],
                        dtype=float)

    def mean_fidelity(self, rank=None, label=None):
        """Mean fidelity over successful matching trials, NaN if there are none"""
        fid = self.fidelities(rank, label)
        fid = fid[~np.isnan(fid)]
        return float(np.mean(fid)) if fid.size else float("nan")

    def aggregates(self):
        """Statistics per (scenario, rank), recomputed from the rows

        :return: List of dictionaries in first-seen order
        :rtype: list
        """
        groups = {}
        for row in self.rows:
            groups.setdefault((row.scenario, row.rank), []).append(row)
        out = []
        for (label, rank), rows in groups.items():
            fid = np.array([r.fidelity for r in rows], dtype=float)
            ok = fid[~np.isnan(fid)]
            out.append({"scenario": label,
                        "rank": rank,
                        "n": len(rows),
                        "failures": int(np.isnan(fid).sum()),
                        "mean_fidelity": float(np.mean(ok)) if ok.size else float("nan"),
                        "std_fidelity": float(np.std(ok)) if ok.size else float("nan"),
                        "mean_residual": float(np.nanmean([r.residual for r in rows])) if ok.size else float("nan"),
                        "converged_fraction": float(np.mean([r.converged for r in rows])),
                        "D": rows[0].D,
                        "meas_fraction": rows[0].meas_fraction})
        return out

    def rank_correlation(self):
        """Spearman correlation of mean fidelity against rank, per scenario value"""
        out = {}
        for label in self.labels():
            ranks = sorted({row.rank for row in self.rows if row.scenario == label})
            if len(ranks) > 1:
                out[label] = spearman(ranks, [self.mean_fidelity(r, label) for r in ranks])
        return out

    def to_csv(self, path):
        """Write one line per row, fixed columns then the config hash

        :param path: File path
        """
        digest = self.spec.config_hash()
        rows = []
        for row in self.rows:
            data = dataclasses.asdict(row)
            data["config_hash"] = digest
            rows.append(data)
        _write_csv(path, CSV_COLUMNS + ["config_hash"], rows)

    def summary(self, logfile=None):
        """Config echo and aggregates

        :param logfile: Debug log path to record
        :return: JSON friendly dictionary
        :rtype: dict
        """
        return {"scenario": self.spec.scenario,
                "config": self.spec.to_dict(),
                "config_hash": self.spec.config_hash(),
                "rows": len(self.rows),
                "aggregates": self.aggregates(),
                "rank_correlation": self.rank_correlation(),
                "entropy_log_base": "e",
                "snr_definition": SNR_DEFINITIONS[self.spec.noise_model],
                "metadata": self.metadata,
                "logfile": logfile}

    def write(self, out_dir, logfile=None):
        """Write <scenario>.csv and <scenario>.json

        :param out_dir: Output directory, created if missing
        :param logfile: Debug log path to record
        :return: (csv path, json path)
        :rtype: tuple
        """
        os.makedirs(out_dir, exist_ok=True)
        csv_path = os.path.join(out_dir, f"{self.spec.scenario}.csv")
        json_path = os.path.join(out_dir, f"{self.spec.scenario}.json")
        self.to_csv(csv_path)
        _write_json(json_path, self.summary(logfile))
        return csv_path, json_path


class RankTable:
    """Mean numerical rank of the measurement matrix per port count and coupler arm

    :param spec: ExperimentSpec
    :param rows: List of dictionaries with COLUMNS keys
    """

    COLUMNS = ["M", "D", "d", "arm", "couplers", "mean_rank", "min_rank", "max_rank", "expected"]

    def __init__(self, spec, rows):
        """Initialise table

        :param spec: ExperimentSpec
        :param rows: List of dictionaries
        """
        self.spec = spec
        self.rows = list(rows)

    def row(self, ports, arm="haar"):
        """Entry for one port count and arm

        :param ports: Port count M
        :param arm: "haar" or "block"
        :return: Dictionary
        :rtype: dict
        :raises ExperimentError: Occurs if there is no such entry
        """
        for row in self.rows:
            if row["M"] == ports and row["arm"] == arm:
                return row
        raise ExperimentError(f"No {arm} entry for M={ports}")

    def to_csv(self, path):
        """Write one line per (M, arm)"""
        _write_csv(path, self.COLUMNS, self.rows)

    def summary(self, logfile=None):
        """Config echo and table"""
        return {"scenario": self.spec.scenario,
                "config": self.spec.to_dict(),
                "config_hash": self.spec.config_hash(),
                "table": self.rows,
                "logfile": logfile}

    def write(self, out_dir, logfile=None):
        """Write <scenario>.csv and <scenario>.json

        :param out_dir: Output directory, created if missing
        :param logfile: Debug log path to record
        :return: (csv path, json path)
        :rtype: tuple
        """
        os.makedirs(out_dir, exist_ok=True)
        csv_path = os.path.join(out_dir, f"{self.spec.scenario}.csv")
        json_path = os.path.join(out_dir, f"{self.spec.scenario}.json")
        self.to_csv(csv_path)
        _write_json(json_path, self.summary(logfile))
        return csv_path, json_path


def run_fidelity_sweep(spec):
    """Mean fidelity against rank for one coupler family

    :param spec: ExperimentSpec
    :return: |ranks| x couplers x trials rows
    :rtype: SweepResult
    """
    logging.info(f"Sweep N={spec.photons} m={spec.original_ports} M={spec.ports} ranks {spec.ranks}, "
                 f"{spec.couplers} couplers x {spec.trials} trials")
    return SweepResult(spec, _sweep(spec, _haar_setups(spec), spec.scenario))


def run_coupler_study(spec):
    """Fidelity across many couplers, every coupler seeing the same states

    :param spec: ExperimentSpec
    :return: Rows plus per-coupler mean fidelities in metadata
    :rtype: SweepResult
    """
    if spec.couplers < 30:
        logging.warning(f"Coupler study with {spec.couplers} couplers, 30 or more recommended")
    result = SweepResult(spec, _sweep(spec, _haar_setups(spec), spec.scenario, shared_states=True))
    per_coupler = []
    for c in range(spec.couplers):
        fid = np.array([r.fidelity for r in result.rows if r.coupler_idx == c], dtype=float)
        per_coupler.append(float(np.nanmean(fid)) if not np.all(np.isnan(fid)) else float("nan"))
    result.metadata["per_coupler_mean_fidelity"] = per_coupler
    result.metadata["coupler_std_fidelity"] = float(np.nanstd(per_coupler))
    return result


def run_coupler_comparison(spec):
    """Paired Haar and evanescent arms, one evanescent arm per coupling length

    :param spec: ExperimentSpec
    :return: Rows labelled <scenario>/haar and <scenario>/evanescent-<theta>, with the
        best coupling length and its gap to Haar in metadata
    :rtype: SweepResult
    """
    rows = _sweep(spec, _haar_setups(spec), f"{spec.scenario}/haar")
    arms = {}
    for theta in spec.thetas:
        label = f"{spec.scenario}/evanescent-{theta:g}"
        # Evanescent couplers are deterministic, so one setup serves every coupler index
        setup = prepare_coupler(spec, 0, family=CouplerFamily.EVANESCENT, theta=theta)
        rows += _sweep(spec, [setup] * spec.couplers, label)
        arms[label] = theta
    result = SweepResult(spec, rows)
    gap_rank = 2 if 2 in spec.ranks else spec.ranks[0]
    if arms:
        means = {label: result.mean_fidelity(gap_rank, label) for label in arms}
        best = max(means, key=lambda label: -np.inf if np.isnan(means[label]) else means[label])
        result.metadata["best_theta"] = arms[best]
        result.metadata["gap_rank"] = gap_rank
        result.metadata["haar_gap"] = result.mean_fidelity(gap_rank, f"{spec.scenario}/haar") - means[best]
    return result


def run_click_experiment(spec):
    """Sweep keeping only collision-free outcomes

    :param spec: ExperimentSpec, switched to click detection if needed
    :return: Rows with C(M, N) measurements each
    :rtype: SweepResult
    """
    if spec.detector != DetectorMode.CLICK:
        spec = dataclasses.replace(spec, detector=DetectorMode.CLICK)
    clicks = int(comb(spec.ports, spec.photons, exact=True))
    logging.info(f"Click detection: {clicks} of {spec.full_dim} outcomes, {clicks / spec.dim ** 2:.2%} of d^2")
    result = SweepResult(spec, _sweep(spec, _haar_setups(spec), spec.scenario))
    result.metadata["click_outcomes"] = clicks
    return result


def run_solver_comparison(spec):
    """LogDet and least squares on identical states, couplers and noise

    :param spec: ExperimentSpec
    :return: Rows labelled <scenario>/logdet and <scenario>/least_squares, with the mean
        paired difference in metadata
    :rtype: SweepResult
    """
    setups = _haar_setups(spec)
    rows = []
    for solver in Solver:
        cfg = dataclasses.replace(spec.recovery, solver=solver)
        rows += _sweep(spec, setups, f"{spec.scenario}/{solver.value}", recovery=cfg)
    result = SweepResult(spec, rows)
    logdet = result.fidelities(label=f"{spec.scenario}/{Solver.LOGDET.value}")
    least = result.fidelities(label=f"{spec.scenario}/{Solver.LEAST_SQUARES.value}")
    result.metadata["mean_difference"] = float(np.nanmean(logdet - least))
    return result


def _coupler_rank(spec, coupler_idx, ports, family):
    seed = derive_seed(spec.seed, spec.scenario, "coupler", coupler_idx)
    u = make_coupler(family, ports, seed=seed, m=spec.original_ports)
    return measurement_rank(build_measurement_matrix(u, spec.original_ports, spec.photons, mode=spec.detector))


def run_rank_analysis(spec):
    """Mean numerical rank of the measurement matrix against the number of measurements

    Haar couplers should give min(D, d^2). A block coupler that never mixes
    input and ancilla ports is the control arm, bounded by d.

    :param spec: ExperimentSpec, spec.port_values gives the M values
    :return: Table
    :rtype: RankTable
    """
    d = spec.dim
    rows = []
    for ports in spec.port_values:
        if spec.detector == DetectorMode.CLICK:
            n_rows = int(comb(ports, spec.photons, exact=True))
        else:
            n_rows = dimension(spec.photons, ports)
        arms = [("haar", CouplerFamily.HAAR, min(n_rows, d * d))]
        if ports > spec.original_ports:
            arms.append(("block", CouplerFamily.BLOCK, min(n_rows, d)))
        for arm, family, expected in arms:
            jobs = [functools.partial(_coupler_rank, spec, c, ports, family) for c in range(spec.couplers)]
            ranks = _run_jobs(jobs, spec.workers)
            rows.append({"M": ports, "D": n_rows, "d": d, "arm": arm, "couplers": spec.couplers,
                         "mean_rank": float(np.mean(ranks)), "min_rank": int(min(ranks)),
                         "max_rank": int(max(ranks)), "expected": expected})
            logging.info(f"Rank analysis M={ports} {arm}: mean rank {np.mean(ranks):.2f}, expected {expected}")
    return RankTable(spec, rows)


def run_lift_check(spec):
    """Lifting property suite over spec.photon_values and spec.port_values

    :param spec: ExperimentSpec, spec.couplers gives couplers per port count
    :return: Report with a passed flag
    :rtype: dict
    """
    report = check_lifting(spec.photon_values, spec.port_values, samples=spec.couplers, seed=spec.seed)
    logging.info(f"Lifting check {'passed' if report['passed'] else 'FAILED'}")
    return report


RUNNERS = {
    "sweep": run_fidelity_sweep,
    "coupler-study": run_coupler_study,
    "coupler-compare": run_coupler_comparison,
    "click": run_click_experiment,
    "rank-analysis": run_rank_analysis,
    "solver-compare": run_solver_comparison,
    "lift-check": run_lift_check,
}


def run_scenario(spec):
    """Run the runner registered for spec.scenario

    :param spec: ExperimentSpec
    :return: SweepResult, RankTable or lifting report
    """
    return RUNNERS[spec.scenario](spec)
