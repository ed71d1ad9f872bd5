"""Exceptions for all single-observable tomography classes"""


class FockBasisError(Exception):
    """Error raised when invalid photon or port counts passed to Fock basis functions"""


class LiftingError(Exception):
    """Error raised when a coupler cannot be lifted or applied to the Fock space"""


class DensityMatrixError(Exception):
    """Error raised when a matrix is not a valid density matrix"""


class EnsembleError(Exception):
    """Error raised when invalid arguments passed to sampling functions"""


class MeasurementError(Exception):
    """Error raised when invalid arguments passed to measurement functions"""


class RecoveryError(Exception):
    """Error raised when invalid arguments passed to recovery functions"""


class MetricsError(Exception):
    """Error raised when states cannot be compared"""


class ExperimentError(Exception):
    """Error raised when an experiment is misconfigured"""
