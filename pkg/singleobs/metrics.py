"""Fidelity, purity, entropy and rank of density matrices"""

import numpy as np
from scipy import linalg, stats

from .density import as_matrix
from .exc import MetricsError

NEGATIVE_TOL = 1e-7
ROUNDOFF = 8 * np.finfo(float).eps


def _hermitian(rho):
    a = as_matrix(rho)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise MetricsError("State must be a square matrix")
    return (a + a.conj().T) / 2


def _significant(w):
    # Eigenvalues at round-off level count as zero
    cutoff = ROUNDOFF * w.size * max(abs(w[-1]), 1.0)
    return np.where(w > cutoff, w, 0.0)


def _sqrt_psd(a):
    w, v = linalg.eigh(a)
    if w[0] < -NEGATIVE_TOL:
        raise MetricsError(f"Negative eigenvalue {w[0]:.2e}")
    return (v * np.sqrt(_significant(w))) @ v.conj().T


def fidelity(rho, sigma):
    """Fidelity Tr sqrt(sqrt(rho) sigma sqrt(rho)), root (not squared) form

    :param rho: DensityMatrix or array
    :param sigma: DensityMatrix or array of the same dimension
    :return: Fidelity in [0, 1]
    :rtype: float
    :raises MetricsError: Occurs if dimensions differ or a state has negative eigenvalues
    """
    a = _hermitian(rho)
    b = _hermitian(sigma)
    if a.shape != b.shape:
        raise MetricsError(f"Cannot compare {a.shape[0]} and {b.shape[0]} dimensional states")
    if linalg.eigvalsh(b)[0] < -NEGATIVE_TOL:
        raise MetricsError("Negative eigenvalue in second state")
    s = _sqrt_psd(a)
    inner = s @ b @ s
    w = linalg.eigvalsh((inner + inner.conj().T) / 2)
    return float(np.sum(np.sqrt(_significant(w))))


def purity(rho):
    """Purity Tr(rho^2)

    :param rho: DensityMatrix or array
    :return: Purity, 1/d to 1
    :rtype: float
    """
    a = _hermitian(rho)
    return float(np.real(np.vdot(a, a)))


def von_neumann_entropy(rho):
    """Von Neumann entropy -Tr(rho log rho), natural log, 0 log 0 = 0

    :param rho: DensityMatrix or array
    :return: Entropy in nats
    :rtype: float
    """
    w = linalg.eigvalsh(_hermitian(rho))
    w = w[w > 1e-12]
    return float(max(-np.sum(w * np.log(w)), 0.0))


def numerical_rank(rho, threshold=1e-3):
    """Count of eigenvalues above threshold times the largest

    :param rho: DensityMatrix or array
    :param threshold: Relative cutoff, between 0 and 1
    :return: Rank
    :rtype: int
    :raises MetricsError: Occurs if threshold out of range
    """
    if not 0 < threshold < 1:
        raise MetricsError("Threshold should be between 0 and 1")
    w = linalg.eigvalsh(_hermitian(rho))
    return int(np.sum(w > threshold * w[-1]))


def trace_distance(rho, sigma):
    """Trace distance half the trace norm of rho - sigma

    :param rho: DensityMatrix or array
    :param sigma: DensityMatrix or array of the same dimension
    :return: Distance in [0, 1]
    :rtype: float
    :raises MetricsError: Occurs if dimensions differ
    """
    a = _hermitian(rho)
    b = _hermitian(sigma)
    if a.shape != b.shape:
        raise MetricsError(f"Cannot compare {a.shape[0]} and {b.shape[0]} dimensional states")
    return float(np.sum(np.abs(linalg.eigvalsh(a - b))) / 2)


def spearman(x, y):
    """Spearman rank correlation

    :param x: Sequence
    :param y: Sequence of the same length
    :return: Correlation, nan when either input is constant
    :rtype: float
    """
    return float(stats.spearmanr(x, y)[0])
