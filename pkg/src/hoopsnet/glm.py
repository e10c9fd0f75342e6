"""Binary logistic regression by Newton/IRLS, with Wald and likelihood-ratio tests."""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np

_EPS = 1e-15
_FPMIN = 1e-300


class SeparationError(ArithmeticError):
    """The outcome is (quasi-)perfectly separated; the MLE does not exist."""


class FitConvergenceError(ArithmeticError):
    pass


# -- tail probabilities --------------------------------------------------------

def _gamma_p_series(a: float, x: float) -> float:
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(10_000):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_q_contfrac(a: float, x: float) -> float:
    # modified Lentz evaluation of the continued fraction for Q(a, x)
    b = x + 1.0 - a
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, 10_000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def gamma_q(a: float, x: float) -> float:
    """Regularized upper incomplete gamma function Q(a, x)."""
    if a <= 0:
        raise ValueError("a must be positive")
    if x < 0:
        raise ValueError("x must be nonnegative")
    if x == 0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _gamma_p_series(a, x)
    return _gamma_q_contfrac(a, x)


def chi_square_sf(x: float, df: int) -> float:
    """Upper tail P(X > x) of a chi-square variable with ``df`` degrees of freedom."""
    if df < 1:
        raise ValueError("df must be a positive integer")
    if x < 0:
        raise ValueError("x must be nonnegative")
    return min(1.0, max(0.0, gamma_q(df / 2.0, x / 2.0)))


def normal_sf(z: float) -> float:
    """Standard normal upper tail 1 - Phi(z)."""
    return 0.5 * math.erfc(z / math.sqrt(2.0))


# -- model -----------------------------------------------------------------------

@dataclass
class FitResult:
    coefficients: list[float]
    std_errors: list[float]
    z_values: list[float]
    p_values: list[float]
    log_lik: float
    null_log_lik: float
    pseudo_r2: float
    llr_stat: float
    llr_p: float
    converged: bool
    iterations: int
    n_obs: int
    information_ridged: bool = False
    ridge: float = 0.0

    @property
    def df_model(self) -> int:
        return len(self.coefficients) - 1

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "FitResult":
        return cls(**json.loads(text))


def _log_lik(eta: np.ndarray, y: np.ndarray) -> float:
    return float(np.sum(y * eta - np.logaddexp(0.0, eta)))


def _expit(eta: np.ndarray) -> np.ndarray:
    return np.exp(-np.logaddexp(0.0, -eta))


def log_likelihood(beta, X, y) -> float:
    """Bernoulli log-likelihood with ``X`` already carrying the intercept column."""
    return _log_lik(np.asarray(X) @ np.asarray(beta), np.asarray(y, dtype=np.float64))


def score(beta, X, y) -> np.ndarray:
    """Gradient of :func:`log_likelihood`."""
    X = np.asarray(X)
    return X.T @ (np.asarray(y, dtype=np.float64) - _expit(X @ np.asarray(beta)))


def add_intercept(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    return np.hstack([np.ones((X.shape[0], 1)), X])


def _solve(H: np.ndarray, g: np.ndarray) -> np.ndarray:
    try:
        if np.linalg.cond(H) < 1e12:
            return np.linalg.solve(H, g)
    except np.linalg.LinAlgError:
        pass
    return np.linalg.pinv(H, rcond=1e-12, hermitian=True) @ g


def fit_logistic(X, y, *, tol: float = 1e-10, max_iter: int = 100, ridge: float = 0.0,
                 separation_bound: float = 30.0) -> FitResult:
    """Maximum-likelihood logistic regression with an intercept prepended.

    Newton steps with step halving; stops when the log-likelihood changes by
    less than ``tol``. ``ridge > 0`` switches to an L2-penalized fit (intercept
    unpenalized). Raises :class:`SeparationError` if the coefficient norm
    exceeds ``separation_bound`` or the fitted probabilities reproduce the
    labels exactly.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(y, dtype=np.float64).ravel()
    n, k = X.shape
    if y.shape[0] != n:
        raise ValueError(f"{n} rows but {y.shape[0]} labels")
    if not np.all(np.isfinite(X)):
        raise ValueError("design matrix has non-finite entries")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be 0 or 1")
    n_pos = int(y.sum())
    if n_pos == 0 or n_pos == n:
        raise ValueError("labels contain a single class")
    if n <= k + 1:
        warnings.warn(f"only {n} observations for {k + 1} parameters", RuntimeWarning, stacklevel=2)

    Xd = add_intercept(X)
    penalty = np.full(k + 1, ridge)
    penalty[0] = 0.0

    def objective(b):
        return _log_lik(Xd @ b, y) - 0.5 * float(np.sum(penalty * b * b))

    beta = np.zeros(k + 1)
    ybar = n_pos / n
    beta[0] = math.log(ybar / (1 - ybar))
    ll = objective(beta)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        mu = _expit(Xd @ beta)
        grad = Xd.T @ (y - mu) - penalty * beta
        H = (Xd * (mu * (1 - mu))[:, None]).T @ Xd + np.diag(penalty)
        step = _solve(H, grad)
        t = 1.0
        while True:
            cand = beta + t * step
            ll_new = objective(cand)
            if ll_new >= ll - 1e-12 or t < 1e-8:
                break
            t *= 0.5
        beta = cand
        if not np.all(np.isfinite(beta)) or np.linalg.norm(beta) > separation_bound:
            raise SeparationError(
                f"coefficient norm exceeded {separation_bound} after {it} iterations; "
                "suspected perfect or quasi-perfect separation")
        delta = abs(ll_new - ll)
        ll = ll_new
        if delta < tol:
            converged = True
            break

    mu = _expit(Xd @ beta)
    if np.max(np.abs(y - mu)) < 1e-6:
        raise SeparationError("fitted probabilities reproduce the labels; perfect separation")
    if not converged:
        raise FitConvergenceError(f"no convergence in {max_iter} iterations")

    info = (Xd * (mu * (1 - mu))[:, None]).T @ Xd + np.diag(penalty)
    ridged = False
    try:
        if np.linalg.cond(info) > 1e12:
            raise np.linalg.LinAlgError("singular information")
        cov = np.linalg.inv(info)
    except np.linalg.LinAlgError:
        ridged = True
        jitter = 1e-8 * max(float(np.trace(info)) / (k + 1), 1.0)
        cov = np.linalg.inv(info + jitter * np.eye(k + 1))
    se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    z = np.where(se > 0, beta / np.where(se > 0, se, 1.0), 0.0)
    pvals = [2.0 * normal_sf(abs(float(v))) for v in z]

    log_lik = _log_lik(Xd @ beta, y)
    null_ll = n_pos * math.log(ybar) + (n - n_pos) * math.log(1 - ybar)
    llr = max(0.0, 2.0 * (log_lik - null_ll))
    llr_p = chi_square_sf(llr, k) if k > 0 else 1.0
    return FitResult(
        coefficients=[float(b) for b in beta],
        std_errors=[float(s) for s in se],
        z_values=[float(v) for v in z],
        p_values=pvals,
        log_lik=log_lik,
        null_log_lik=null_ll,
        pseudo_r2=1.0 - log_lik / null_ll,
        llr_stat=llr,
        llr_p=llr_p,
        converged=converged,
        iterations=it,
        n_obs=n,
        information_ridged=ridged,
        ridge=ridge,
    )
