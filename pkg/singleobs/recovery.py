"""Density matrix recovery from single-observable measurements"""

import dataclasses
import logging
from enum import Enum

import numpy as np
from scipy import linalg

from .density import DensityMatrix
from .exc import RecoveryError
from .measurement import MeasurementRecord


class Solver(Enum):
    """Recovery program"""

    LOGDET = "logdet"
    LEAST_SQUARES = "least_squares"


class Misfit(Enum):
    """How epsilon bounds the measurement residual r"""

    L2 = "l2"                # |r|_2^2 <= epsilon
    PER_ENTRY = "per_entry"  # max |r_k| <= epsilon


NOISELESS_EPSILON = 1e-8
EIGEN_CUTOFF = 1e-9


@dataclasses.dataclass
class RecoveryConfig:
    """Recovery settings

    :param solver: Solver or its value
    :param epsilon: Misfit bound, None to derive it from the record
    :param delta: LogDet regulariser
    :param max_outer_iters: LogDet reweighting steps
    :param max_inner_iters: Projected gradient steps per inner solve
    :param convergence_tol: Frobenius tolerance for outer steps and projected gradients
    :param penalty_weight: Starting weight of the misfit penalty
    :param penalty_growth: Factor the penalty grows by until epsilon is met
    :param penalty_max: Largest penalty tried before flagging infeasibility
    :param backtrack: Step shrink factor of the line search
    :param misfit: Misfit or its value
    """

    solver: Solver = Solver.LOGDET
    epsilon: object = None
    delta: float = 1e-3
    max_outer_iters: int = 20
    max_inner_iters: int = 1000
    convergence_tol: float = 1e-6
    penalty_weight: float = 1.0
    penalty_growth: float = 10.0
    penalty_max: float = 1e8
    backtrack: float = 0.5
    misfit: Misfit = Misfit.L2

    def __post_init__(self):
        """Validate settings

        :raises RecoveryError: Occurs if a setting is out of range or unknown
        """
        try:
            self.solver = Solver(self.solver)
        except ValueError:
            raise RecoveryError(f"Unknown solver {self.solver}") from None
        try:
            self.misfit = Misfit(self.misfit)
        except ValueError:
            raise RecoveryError(f"Unknown misfit {self.misfit}") from None
        if self.epsilon is not None and self.epsilon < 0:
            raise RecoveryError("epsilon should be non-negative")
        if self.delta <= 0 or self.convergence_tol <= 0:
            raise RecoveryError("delta and convergence_tol should be positive")
        if self.max_outer_iters < 1 or self.max_inner_iters < 1:
            raise RecoveryError("Iteration caps should be at least 1")
        if self.penalty_weight <= 0 or self.penalty_growth <= 1 or self.penalty_max < self.penalty_weight:
            raise RecoveryError("Invalid penalty schedule")
        if not 0 < self.backtrack < 1:
            raise RecoveryError("backtrack should be between 0 and 1")

    def to_dict(self):
        """Serialise to a JSON friendly dictionary"""
        data = dataclasses.asdict(self)
        data["solver"] = self.solver.value
        data["misfit"] = self.misfit.value
        return data

    @classmethod
    def from_dict(cls, data):
        """Load from a dictionary of field values

        :param data: Dictionary
        :return: Config
        :rtype: RecoveryConfig
        :raises RecoveryError: Occurs if a key is unknown
        """
        try:
            return cls(**data)
        except TypeError as err:
            raise RecoveryError(f"Invalid recovery config: {err}") from None


@dataclasses.dataclass
class RecoveryResult:
    """Recovered state and solver diagnostics

    :param rho_rec: Recovered DensityMatrix
    :param outer_iters: Outer iterations run (1 for least squares)
    :param residual: |A vec(rho_rec) - y|_2
    :param converged: Whether the stopping rule was met
    :param solver: Solver value
    :param diagnostics: Solver specific details
    """

    rho_rec: DensityMatrix
    outer_iters: int
    residual: float
    converged: bool
    solver: str
    diagnostics: dict = dataclasses.field(default_factory=dict)

    def to_dict(self):
        """Serialise to a JSON friendly dictionary"""
        return {"rho_rec": self.rho_rec.to_dict(),
                "outer_iters": self.outer_iters,
                "residual": self.residual,
                "converged": self.converged,
                "solver": self.solver,
                "diagnostics": self.diagnostics}


def project_simplex(v, total=1.0):
    """Euclidean projection onto {x >= 0, sum x = total}, by sorting

    :param v: Real vector
    :param total: Simplex scale
    :return: Projected vector
    :rtype: numpy.ndarray
    """
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - total
    k = np.nonzero(u - css / np.arange(1, v.size + 1) > 0)[0][-1]
    return np.maximum(v - css[k] / (k + 1), 0.0)


def _project(h):
    w, v = linalg.eigh((h + h.conj().T) / 2)
    return (v * project_simplex(w)) @ v.conj().T


def project_spectrahedron(h):
    """Nearest trace-1 PSD matrix in Frobenius norm

    :param h: d x d complex matrix, only its Hermitian part is used
    :return: Projection
    :rtype: DensityMatrix
    """
    return DensityMatrix(_project(np.asarray(h, dtype=complex)))


def _cleanup(x):
    w, v = linalg.eigh((x + x.conj().T) / 2)
    w = np.where(w < EIGEN_CUTOFF, 0.0, w)
    return DensityMatrix((v * (w / w.sum())) @ v.conj().T)


def _values(y, a_mat):
    values = y.values if isinstance(y, MeasurementRecord) else np.asarray(y, dtype=float)
    if values.ndim != 1 or values.size != a_mat.n_rows:
        raise RecoveryError(f"{values.size} measurements for a {a_mat.n_rows}-row measurement matrix")
    return values


def resolve_epsilon(cfg, y):
    """Misfit bound actually used

    :param cfg: RecoveryConfig
    :param y: MeasurementRecord or array
    :return: cfg.epsilon, or the record's expected noise power, or the noiseless default
    :rtype: float
    """
    if cfg.epsilon is not None:
        return float(cfg.epsilon)
    if isinstance(y, MeasurementRecord) and y.noisy:
        if cfg.misfit == Misfit.PER_ENTRY:
            return float(np.sqrt(y.noise_power / max(y.values.size, 1)))
        return float(y.noise_power)
    return NOISELESS_EPSILON


def _misfit_ok(r, eps, misfit):
    if misfit == Misfit.PER_ENTRY:
        return float(np.max(np.abs(r))) <= eps
    return float(r @ r) <= eps


def _minimise(smooth, linear, x0, lipschitz, cfg, on_step=False):
    """Monotone accelerated projected gradient over the spectrahedron

    Minimises <linear, X> + smooth(X). Candidates that raise the objective
    are rejected and momentum restarts, so accepted objectives never increase.
    Stops when the projected gradient norm (or, with on_step, the accepted
    step length) falls below convergence_tol.

    :param smooth: Callable X -> (value, gradient)
    :param linear: d x d Hermitian matrix, or None
    :param x0: Feasible start
    :param lipschitz: Lipschitz constant estimate of the smooth gradient
    :param cfg: RecoveryConfig
    :param on_step: Whether to test the step length instead of the projected gradient
    :return: (X, converged, iterations, objective history)
    """
    def lin(x):
        return 0.0 if linear is None else float(np.real(np.vdot(linear, x)))

    step = 1.0 / lipschitz if lipschitz > 0 else 1.0
    x = x_prev = z = x0
    f_x = smooth(x)[0] + lin(x)
    history = [f_x]
    t = 1.0
    for it in range(1, cfg.max_inner_iters + 1):
        s_z, g_z = smooth(z)
        grad = g_z if linear is None else g_z + linear
        while True:
            cand = _project(z - step * grad)
            diff = cand - z
            s_c = smooth(cand)[0]
            bound = s_z + float(np.real(np.vdot(g_z, diff))) + np.vdot(diff, diff).real / (2 * step)
            if s_c <= bound + 1e-15 * max(abs(bound), 1.0) or step < 1e-300:
                break
            step *= cfg.backtrack
        f_c = s_c + lin(cand)
        t_next = (1 + np.sqrt(1 + 4 * t * t)) / 2
        if f_c <= f_x:
            moved = float(np.linalg.norm(cand - x))
            x_prev, x, f_x = x, cand, f_c
            z = x + ((t - 1) / t_next) * (x - x_prev)
            t = t_next
            history.append(f_x)
            gauge = moved if on_step else float(np.linalg.norm(diff)) / step
            if gauge <= cfg.convergence_tol:
                return x, True, it, history
        else:
            # Restart momentum from the last accepted point
            z = x
            t = 1.0
            history.append(f_x)
    return x, False, cfg.max_inner_iters, history


def _least_squares_problem(a_mat, y):
    def smooth(x):
        r = a_mat.forward(x) - y
        return 0.5 * float(r @ r), a_mat.adjoint(r)
    return smooth


def recover_least_squares(y, a_mat, cfg=None):
    """Constrained least squares: min |A vec(rho) - y|^2 over trace-1 PSD rho

    :param y: MeasurementRecord or outcome vector
    :param a_mat: MeasurementMatrix with matching rows
    :param cfg: RecoveryConfig
    :return: Result, converged when the projected gradient norm fell below convergence_tol
    :rtype: RecoveryResult
    :raises RecoveryError: Occurs if rows and measurements disagree
    """
    cfg = cfg or RecoveryConfig(solver=Solver.LEAST_SQUARES)
    values = _values(y, a_mat)
    d = a_mat.dim
    x, converged, iters, history = _minimise(_least_squares_problem(a_mat, values), None,
                                             np.eye(d, dtype=complex) / d,
                                             a_mat.operator_norm_squared(), cfg)
    rho = _cleanup(x)
    residual = float(np.linalg.norm(a_mat.forward(rho.matrix) - values))
    if not converged:
        logging.warning(f"Least squares stopped after {iters} iterations, residual {residual:.3e}")
    logging.debug(f"Least squares: {iters} iterations, residual {residual:.3e}")
    return RecoveryResult(rho, 1, residual, converged, Solver.LEAST_SQUARES.value,
                          {"inner_iters": iters, "objective_history": history})


def recover_logdet(y, a_mat, cfg=None):
    """LogDet rank minimisation by iterative reweighting

    Step k minimises Tr(W X) + lam |A vec(X) - y|^2 / |y|^2 over trace-1 PSD X,
    with W = (X_{k-1} + delta I)^-1 scaled to unit spectral norm, starting from
    X_0 = I/d. The penalty lam grows until the epsilon misfit bound holds.
    Iteration stops once consecutive X are within convergence_tol.

    :param y: MeasurementRecord or outcome vector
    :param a_mat: MeasurementMatrix with matching rows
    :param cfg: RecoveryConfig
    :return: Result; diagnostics flag infeasibility when epsilon was never met
    :rtype: RecoveryResult
    :raises RecoveryError: Occurs if rows and measurements disagree
    """
    cfg = cfg or RecoveryConfig()
    values = _values(y, a_mat)
    eps = resolve_epsilon(cfg, y)
    d = a_mat.dim
    norm_a = a_mat.operator_norm_squared()
    scale = max(float(values @ values), 1e-300)
    ls_smooth = _least_squares_problem(a_mat, values)

    # W_0 is a multiple of I, so step 1 is the plain constrained least squares fit
    x, _, inner_total, history = _minimise(ls_smooth, None, np.eye(d, dtype=complex) / d, norm_a, cfg)
    stage_histories = [history]
    feasible = _misfit_ok(a_mat.forward(x) - values, eps, cfg.misfit)
    logging.debug(f"LogDet step 1: least squares start, feasible {feasible}")
    lam = cfg.penalty_weight
    lam_ok = None
    converged = False
    k = 1
    for k in range(2, cfg.max_outer_iters + 1):
        wv, vv = linalg.eigh((x + x.conj().T) / 2)
        inv = 1.0 / (np.clip(wv, 0, None) + cfg.delta)
        weight = (vv * (inv / inv.max())) @ vv.conj().T
        lam = cfg.penalty_weight if lam_ok is None else max(cfg.penalty_weight, lam_ok / cfg.penalty_growth)
        while True:
            def smooth(z, lam=lam):
                value, grad = ls_smooth(z)
                return 2 * lam * value / scale, (2 * lam / scale) * grad
            x_new, _, iters, history = _minimise(smooth, weight, x, 2 * lam * norm_a / scale, cfg,
                                                 on_step=True)
            inner_total += iters
            stage_histories.append(history)
            r = a_mat.forward(x_new) - values
            feasible = _misfit_ok(r, eps, cfg.misfit)
            if feasible:
                lam_ok = lam
                break
            if lam * cfg.penalty_growth > cfg.penalty_max:
                break
            lam *= cfg.penalty_growth
            logging.debug(f"LogDet step {k}: misfit {float(r @ r):.3e} above {eps:.3e}, penalty now {lam:.1e}")
        change = float(np.linalg.norm(x_new - x))
        x = x_new
        logging.debug(f"LogDet step {k}: change {change:.3e}, penalty {lam:.1e}, feasible {feasible}")
        if change < cfg.convergence_tol:
            converged = True
            break
    rho = _cleanup(x)
    residual = float(np.linalg.norm(a_mat.forward(rho.matrix) - values))
    if not feasible:
        logging.warning(f"LogDet could not reach epsilon {eps:.3e}, residual {residual:.3e}")
    if not converged:
        logging.warning(f"LogDet stopped after {k} steps without settling")
    return RecoveryResult(rho, k, residual, converged, Solver.LOGDET.value,
                          {"inner_iters": inner_total,
                           "penalty_weight": lam,
                           "feasible": feasible,
                           "epsilon": eps,
                           "misfit": cfg.misfit.value,
                           "objective_histories": stage_histories})


def recover(y, a_mat, cfg=None):
    """Recover with the solver named in the config

    Click-mode records go through unchanged; their measurement matrix already
    holds only the click rows.

    :param y: MeasurementRecord or outcome vector
    :param a_mat: MeasurementMatrix with matching rows
    :param cfg: RecoveryConfig
    :return: Result
    :rtype: RecoveryResult
    :raises RecoveryError: Occurs if solver is unknown
    """
    cfg = cfg or RecoveryConfig()
    try:
        solver = Solver(cfg.solver)
    except ValueError:
        raise RecoveryError(f"Unknown solver {cfg.solver}") from None
    if solver == Solver.LEAST_SQUARES:
        return recover_least_squares(y, a_mat, cfg)
    return recover_logdet(y, a_mat, cfg)
