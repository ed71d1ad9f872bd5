"""Provide all the classes we need for single-observable state tomography"""

from .density import DensityMatrix
from .ensembles import (CouplerFamily, EnsembleSpec, block_coupler, depolarize, evanescent_coupler,
                        make_coupler, sample_density_matrix, sample_haar_unitary)
from .exc import *  # noqa: F403
from .experiment import (ExperimentSpec, RankTable, SweepResult, SweepRow, build_spec, derive_seed,
                         run_click_experiment, run_coupler_comparison, run_coupler_study,
                         run_fidelity_sweep, run_lift_check, run_rank_analysis, run_solver_comparison,
                         run_trial)
from .fock import FockBasis, dimension, enumerate_basis
from .lifting import (LiftedUnitary, PortUnitary, check_lifting, direct_sum, embed_with_ancilla,
                      evolve_density, lift_unitary, permanent)
from .measurement import (DetectorMode, MeasurementMatrix, MeasurementRecord, NoiseModel, PovmSet, add_noise,
                          build_measurement_matrix, measurement_rank, observable_matrix, observable_spectrum,
                          povm_elements, restrict_to_clicks, simulate_measurements)
from .metrics import fidelity, numerical_rank, purity, spearman, trace_distance, von_neumann_entropy
from .recovery import (Misfit, RecoveryConfig, RecoveryResult, Solver, project_simplex,
                       project_spectrahedron, recover, recover_least_squares, recover_logdet)
