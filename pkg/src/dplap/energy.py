"""The variational structure: energy, gradient, residuals, p = 2 Hessian.

The sign conventions make "gradient = 0" literally the strong form of the
difference equation, so a converged solver iterate is a solution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import GridFunction, ProblemSpec, p_laplacian, phi_p


def _check_alpha(alpha: float) -> float:
    if not alpha > 0.0:
        raise ValueError("alpha must be positive")
    return float(alpha)


def energy(u: GridFunction, prob: ProblemSpec, alpha: float = 1.0) -> float:
    """J_alpha(u) = (1/p) sum_{k=1}^{T+1} |u(k)-u(k-1)|^p - alpha sum_k F_k(u(k)).

    alpha = 1 recovers the unparametrised functional.
    """
    _check_alpha(alpha)
    du = np.diff(u.values)
    dirichlet = float(np.sum(np.abs(du) ** prob.p)) / prob.p
    pot = float(np.sum(prob.nonlinearity.F_vec(u.interior)))
    return dirichlet - alpha * pot


def gradient(u: GridFunction, prob: ProblemSpec, alpha: float = 1.0) -> np.ndarray:
    """Coordinate gradient <J'_alpha(u), e_k> for k = 1..T.

    Component k equals -[phi_p(u(k+1)-u(k)) - phi_p(u(k)-u(k-1))]
    - alpha f(k, u(k)), the defect of the strong difference equation.
    """
    _check_alpha(alpha)
    return p_laplacian(u, prob.p) - alpha * prob.nonlinearity.f_vec(u.interior)


def strong_residual(u: GridFunction, prob: ProblemSpec, alpha: float = 1.0) -> float:
    """max_k of the difference-equation defect; the sup norm of the gradient."""
    return float(np.max(np.abs(gradient(u, prob, alpha))))


def weak_residual(u: GridFunction, v: GridFunction, prob: ProblemSpec,
                  alpha: float = 1.0) -> float:
    """sum phi_p(du) dv - alpha sum f(k, u(k)) v(k) for the test function v.

    Vanishing for every v is equivalent to a zero strong residual
    (summation by parts with the zero boundary).
    """
    _check_alpha(alpha)
    if v.T != u.T:
        raise ValueError(f"test function has T={v.T}, expected {u.T}")
    du = np.diff(u.values)
    dv = np.diff(v.values)
    bilinear = float(phi_p(du, prob.p) @ dv)
    load = float(prob.nonlinearity.f_vec(u.interior) @ v.interior)
    return bilinear - alpha * load


def hessian_p2(u: GridFunction, prob: ProblemSpec, alpha: float = 1.0) -> np.ndarray:
    """Jacobian of the p = 2 gradient: tridiag(-1, 2, -1) - alpha diag(df/dt).

    Only defined for p = 2 (the energy is not C^2 for p < 2, and the
    Newton path is restricted to the linear-diffusion case).
    """
    _check_alpha(alpha)
    if prob.p != 2.0:
        raise ValueError("hessian_p2 requires p = 2")
    T = u.T
    H = 2.0 * np.eye(T) - np.eye(T, k=1) - np.eye(T, k=-1)
    H -= alpha * np.diag(prob.nonlinearity.df_vec(u.interior))
    return H


@dataclass(frozen=True)
class EnergyReport:
    """Snapshot of the functional at one grid function."""

    value: float
    grad_norm: float
    strong_residual: float
    alpha: float


def energy_report(u: GridFunction, prob: ProblemSpec, alpha: float = 1.0) -> EnergyReport:
    res = strong_residual(u, prob, alpha)
    return EnergyReport(value=energy(u, prob, alpha), grad_norm=res,
                        strong_residual=res, alpha=float(alpha))
