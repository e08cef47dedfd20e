"""Conditioning and gradient-descent speed on least squares.

For ``min_A sum_i ||y_i - A x_i||^2`` the Hessian is ``sum_i x_i x_i^T`` and
gradient descent with step ``1 / lambda_max`` converges at the linear rate
``1 - 1 / kappa`` where ``kappa = lambda_max / lambda_min``. Whitened inputs
(``kappa = 1``) converge in a single step.

Eigenvalues are computed with the cyclic Jacobi method, which is exact to
working precision for the small (d <= 64) symmetric matrices used here.
"""
import math
from dataclasses import dataclass, field, asdict

import numpy as np

from iclab import error

MAX_DIM = 64
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
# lambda_min below this fraction of lambda_max is treated as singular
SINGULAR_RTOL = 1e-12
# consecutive loss increases that count as divergence
DIVERGENCE_PATIENCE = 10
DEFAULT_MAX_ITERS = 100000

LR_INVERSE_LAMBDA_MAX = "inverse_lambda_max"


def jacobi_eigenvalues(S, tol=JACOBI_TOL, max_sweeps=JACOBI_MAX_SWEEPS):
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps rotate every off-diagonal pair ``(p, q)`` to zero until the
    off-diagonal Frobenius norm is at most ``tol`` times the norm of ``S``.

    Returns
    -------
    ndarray
        eigenvalues in ascending order

    Raises
    ------
    ShapeError
        if ``S`` is not square
    PreconditionError
        if ``S`` is not symmetric
    DivergenceError
        if the sweeps do not converge
    """
    A = np.array(S, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise error.ShapeError(f"expected a square matrix, got {A.shape}")
    if not np.allclose(A, A.T, rtol=1e-12, atol=0):
        raise error.PreconditionError("Jacobi eigensolver needs a symmetric "
                                      "matrix")
    d = A.shape[0]
    scale = np.linalg.norm(A)
    if scale == 0:
        return np.zeros(d)

    for _ in range(max_sweeps):
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off <= tol * scale:
            return np.sort(np.diag(A))
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = A[p, q]
                if apq == 0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2 * apq)
                t = math.copysign(1.0, theta) \
                    / (abs(theta) + math.sqrt(theta * theta + 1))
                c = 1 / math.sqrt(t * t + 1)
                s = t * c
                col_p, col_q = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                row_p, row_q = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
    raise error.DivergenceError(
        f"Jacobi eigensolver did not converge in {max_sweeps} sweeps"
    )


def hessian_condition(X):
    """Condition number ``lambda_max / lambda_min`` of ``sum_i x_i x_i^T``.

    Parameters
    ----------
    X : ndarray
        ``n x d`` design matrix, one sample per row, ``n >= d``, ``d <= 64``

    Returns
    -------
    float
        condition number, ``math.inf`` when the Hessian is singular
        (``lambda_min <= 1e-12 lambda_max``)
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise error.ShapeError(f"X must be n x d, got {X.shape}")
    n, d = X.shape
    if d > MAX_DIM:
        raise error.ParameterError(f"d must be <= {MAX_DIM}: {d}")
    if n < d:
        raise error.ShapeError(f"need n >= d samples, got n={n}, d={d}")
    eigs = jacobi_eigenvalues(X.T @ X)
    lam_min, lam_max = eigs[0], eigs[-1]
    if lam_max <= 0 or lam_min <= SINGULAR_RTOL * lam_max:
        return math.inf
    return float(lam_max / lam_min)


def is_singular(kappa):
    return math.isinf(kappa)


def random_orthonormal(rng, n, d):
    """``n x d`` matrix with orthonormal columns."""
    q, r = np.linalg.qr(rng.normal(0.0, 1.0, (n, d)))
    return q * np.sign(np.diag(r))


def planted_design(rng, n, eigenvalues):
    """Design matrix whose scaled Hessian ``X^T X / n`` has the given
    eigenvalues (in a random eigenbasis)."""
    eigenvalues = np.asarray(eigenvalues, dtype=np.float64)
    d = len(eigenvalues)
    if np.any(eigenvalues < 0):
        raise error.ParameterError("eigenvalues must be non-negative")
    Q = random_orthonormal(rng, n, d)
    V = random_orthonormal(rng, d, d)
    return np.sqrt(n) * (Q * np.sqrt(eigenvalues)) @ V.T


@dataclass
class ConditioningReport:
    """Outcome of one gradient-descent run.

    Attributes
    ----------
    kappa : float
        condition number of the input Hessian
    iterations_to_tol : int
        steps taken until the loss was at most ``tol``
    final_loss : float
        loss when the run stopped
    converged : bool
        whether ``tol`` was reached within the iteration budget
    lr : float
        step size used
    loss_history : list[float]
        loss before the first and after every step
    """

    name: str
    kappa: float
    iterations_to_tol: int
    final_loss: float
    converged: bool
    lr: float
    loss_history: list = field(default_factory=list, repr=False)

    def to_dict(self, with_history=False):
        d = asdict(self)
        if not with_history:
            d.pop("loss_history")
        return d


@dataclass
class RaceResult:
    whitened: ConditioningReport
    correlated: ConditioningReport

    @property
    def iteration_ratio(self):
        return self.correlated.iterations_to_tol \
            / max(self.whitened.iterations_to_tol, 1)

    @property
    def reports(self):
        return [self.whitened, self.correlated]


def least_squares_loss(A, X, Y):
    residual = Y - X @ A.T
    return 0.5 * float(np.sum(residual**2)) / X.shape[0]


def gradient_descent(X, Y, tol, lr_rule=LR_INVERSE_LAMBDA_MAX, A0=None,
                     max_iters=DEFAULT_MAX_ITERS, name="gd"):
    """Full-batch gradient descent on the mean least-squares loss.

    Parameters
    ----------
    X : ndarray
        ``n x d`` inputs
    Y : ndarray
        ``n x m`` targets
    tol : float
        stop once the loss is at most ``tol``
    lr_rule : str or float, optional
        ``"inverse_lambda_max"`` for step ``1 / lambda_max`` or a float
        ``s`` for step ``s / lambda_max`` (default="inverse_lambda_max")
    A0 : ndarray, optional
        ``m x d`` starting point, zeros if None (default=None)
    max_iters : int, optional
        iteration budget (default=100000)
    name : str, optional
        run label used in reports and errors

    Raises
    ------
    DivergenceError
        if the loss increases for 10 consecutive steps or becomes non-finite
    """
    n, d = X.shape
    H = X.T @ X / n
    eigs = jacobi_eigenvalues(H)
    lam_min, lam_max = eigs[0], eigs[-1]
    kappa = math.inf if lam_min <= SINGULAR_RTOL * lam_max \
        else float(lam_max / lam_min)
    scale = 1.0 if lr_rule == LR_INVERSE_LAMBDA_MAX else float(lr_rule)
    lr = scale / lam_max

    A = np.zeros((Y.shape[1], d)) if A0 is None else np.array(A0, dtype=float)
    XtY = Y.T @ X / n
    loss = least_squares_loss(A, X, Y)
    history = [loss]
    iters = 0
    increases = 0
    while loss > tol and iters < max_iters:
        A -= lr * (A @ H - XtY)
        new_loss = least_squares_loss(A, X, Y)
        iters += 1
        history.append(new_loss)
        increases = increases + 1 if new_loss > loss else 0
        if not math.isfinite(new_loss) or increases >= DIVERGENCE_PATIENCE:
            raise error.DivergenceError(
                f"gradient descent '{name}' diverged after {iters} steps "
                f"(kappa={kappa:.4g}, lr={lr:.4g}, lr_rule={lr_rule!r}, "
                f"loss={new_loss:.4g})"
            )
        loss = new_loss

    return ConditioningReport(name=name,
                              kappa=kappa,
                              iterations_to_tol=iters,
                              final_loss=loss,
                              converged=loss <= tol,
                              lr=lr,
                              loss_history=history)


def linreg_gd_race(rng,
                   d,
                   kappa_target,
                   tol,
                   lr_rule=LR_INVERSE_LAMBDA_MAX,
                   n_samples=None,
                   n_outputs=1,
                   exact_start=False,
                   max_iters=DEFAULT_MAX_ITERS):
    """Race gradient descent on whitened against ill-conditioned inputs.

    Both racers fit the same true map ``A*`` from noiseless targets. The
    whitened design has ``X^T X / n = I``, the correlated one has eigenvalues
    spaced geometrically in ``[1, kappa_target]``.

    Parameters
    ----------
    rng : Rng
        random number generator
    d : int
        input dimension, at most 64
    kappa_target : float
        condition number of the correlated design, at least 1
    tol : float
        loss threshold
    lr_rule : str or float, optional
        step rule shared by both racers (default="inverse_lambda_max")
    n_samples : int, optional
        number of samples, ``4 d`` if None (default=None)
    n_outputs : int, optional
        output dimension (default=1)
    exact_start : bool, optional
        start both racers at ``A*`` (default=False)
    max_iters : int, optional
        iteration budget per racer (default=100000)

    Returns
    -------
    RaceResult
    """
    if not 1 <= d <= MAX_DIM:
        raise error.ParameterError(f"d must be in [1, {MAX_DIM}]: {d}")
    if kappa_target < 1:
        raise error.ParameterError(
            f"kappa_target must be >= 1: {kappa_target}"
        )
    n = 4 * d if n_samples is None else n_samples
    if n < d:
        raise error.ParameterError(f"n_samples must be >= d: {n} < {d}")
    A_true = rng.normal(0.0, 1.0, (n_outputs, d))
    designs = {
        "whitened": planted_design(rng, n, np.ones(d)),
        "correlated": planted_design(
            rng, n, np.geomspace(1.0, kappa_target, d)
        ),
    }
    reports = {}
    for name, X in designs.items():
        Y = X @ A_true.T
        A0 = A_true if exact_start else None
        reports[name] = gradient_descent(
            X, Y, tol, lr_rule, A0, max_iters, name=name
        )
    return RaceResult(reports["whitened"], reports["correlated"])
