"""Damped least-squares (Levenberg-Marquardt) minimizer.

Trust-region flavored LM on the squared-residual objective with Marquardt
diagonal scaling, simple box projection, and a monotone accepted-step
objective trace.  Written in-house so fit contracts (iteration cap,
convergence criteria, best-so-far on failure, step-trace inspection) are
under direct control.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

MAX_LAMBDA = 1e14
LAMBDA_INIT = 1e-3
LAMBDA_SHRINK = 0.3
LAMBDA_GROW = 4.0


class NumericalFailure(RuntimeError):
    """A numerical procedure failed to converge or produced non-finite values."""


@dataclass
class LMResult:
    x: np.ndarray
    sse: float
    converged: bool
    n_iter: int
    grad_inf: float
    objective_trace: list[float] = field(default_factory=list)
    jacobian: np.ndarray | None = None
    message: str = ""


def numeric_jacobian(residual: Callable[[np.ndarray], np.ndarray], x: np.ndarray, r0=None):
    """Forward-difference Jacobian of a residual vector."""
    if r0 is None:
        r0 = residual(x)
    jac = np.empty((r0.size, x.size))
    for j in range(x.size):
        h = 1e-7 * max(abs(x[j]), 1e-9)
        xp = x.copy()
        xp[j] += h
        jac[:, j] = (residual(xp) - r0) / h
    return jac


def lm_least_squares(
    residual: Callable[[np.ndarray], np.ndarray],
    x0,
    jacobian: Callable[[np.ndarray], np.ndarray] | None = None,
    lower=None,
    upper=None,
    max_iter: int = 500,
    xtol: float = 1e-8,
    gtol: float = 1e-10,
) -> LMResult:
    """Minimize sum(residual(x)**2) subject to elementwise box bounds.

    Convergence is declared when an accepted step changes every parameter
    by less than ``xtol`` in relative terms, or when the infinity norm of
    the gradient J^T r drops below ``gtol``.  On hitting ``max_iter`` the
    best point found so far is returned with ``converged = False``.
    """
    x = np.asarray(x0, dtype=float).copy()
    k = x.size
    lo = np.full(k, -np.inf) if lower is None else np.asarray(lower, dtype=float)
    hi = np.full(k, np.inf) if upper is None else np.asarray(upper, dtype=float)
    x = np.clip(x, lo, hi)

    r = residual(x)
    if not np.all(np.isfinite(r)):
        raise NumericalFailure("residual is not finite at the starting point")
    sse = float(r @ r)
    trace = [sse]
    lam = LAMBDA_INIT
    grad_inf = np.inf
    jac = None
    message = "max_iter reached"
    converged = False
    n_iter = 0

    for n_iter in range(1, max_iter + 1):
        jac = jacobian(x) if jacobian is not None else numeric_jacobian(residual, x, r)
        grad = jac.T @ r
        grad_inf = float(np.max(np.abs(grad)))
        if grad_inf < gtol:
            converged = True
            message = "gradient norm below gtol"
            break
        hess = jac.T @ jac
        diag = np.clip(np.diag(hess), 1e-300, None)

        accepted = False
        while lam <= MAX_LAMBDA:
            try:
                step = np.linalg.solve(hess + lam * np.diag(diag), -grad)
            except np.linalg.LinAlgError:
                lam *= LAMBDA_GROW
                continue
            x_trial = np.clip(x + step, lo, hi)
            r_trial = residual(x_trial)
            sse_trial = float(r_trial @ r_trial)
            if np.isfinite(sse_trial) and sse_trial < sse:
                moved = np.abs(x_trial - x)
                rel_move = float(np.max(moved / (np.abs(x) + 1e-300)))
                x, r, sse = x_trial, r_trial, sse_trial
                trace.append(sse)
                lam = max(lam * LAMBDA_SHRINK, 1e-14)
                accepted = True
                if rel_move < xtol:
                    converged = True
                    message = "relative step below xtol"
                break
            lam *= LAMBDA_GROW
        if not accepted:
            # No descent direction at any damping: stationary point.
            converged = True
            message = "no further decrease possible"
            break
        if converged:
            break

    if jacobian is not None:
        jac = jacobian(x)
    else:
        jac = numeric_jacobian(residual, x, r)
    grad_inf = float(np.max(np.abs(jac.T @ r)))
    return LMResult(
        x=x,
        sse=sse,
        converged=converged,
        n_iter=n_iter,
        grad_inf=grad_inf,
        objective_trace=trace,
        jacobian=jac,
        message=message,
    )


def covariance_from_jacobian(jac: np.ndarray, sse: float, n_points: int) -> np.ndarray:
    """Parameter covariance s^2 (J^T J)^+ with s^2 = SSE / (N - k)."""
    k = jac.shape[1]
    dof = max(n_points - k, 1)
    s2 = sse / dof
    return s2 * np.linalg.pinv(jac.T @ jac)
