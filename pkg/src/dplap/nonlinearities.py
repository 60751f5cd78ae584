"""Built-in right-hand sides with closed-form potentials.

Each factory returns a Nonlinearity whose potential is exact (no quadrature),
except from_table, whose potential is integrated numerically from the
interpolant.  The is_nonnegative flag follows the convention documented on
Nonlinearity: f(k, t) >= 0 for t >= 0 and each F_k attains its maximum over
[-eps, eps] at the right endpoint.
"""

from __future__ import annotations

import numpy as np

from .core import Nonlinearity


def zero() -> Nonlinearity:
    return Nonlinearity(f=lambda k, t: 0.0,
                        potential=lambda k, xi: 0.0,
                        df=lambda k, t: 0.0,
                        is_nonnegative=True,
                        gamma=None,
                        name="zero")


def constant(value: float = 1.0) -> Nonlinearity:
    v = float(value)
    return Nonlinearity(f=lambda k, t: v,
                        potential=lambda k, xi: v * xi,
                        df=lambda k, t: 0.0,
                        is_nonnegative=v >= 0.0,
                        gamma=None,
                        name=f"constant({v:g})")


def linear(slope: float = 1.0) -> Nonlinearity:
    s = float(slope)
    return Nonlinearity(f=lambda k, t: s * t,
                        potential=lambda k, xi: 0.5 * s * xi * xi,
                        df=lambda k, t: s,
                        is_nonnegative=s >= 0.0,
                        gamma=None,
                        name=f"linear({s:g})")


def power(exponent: float, coeff: float = 1.0) -> Nonlinearity:
    """f(k, t) = coeff * sign(t) |t|^exponent, F_k(xi) = coeff |xi|^(exponent+1)/(exponent+1).

    The odd extension keeps f continuous on all of R for any exponent > 0.
    The analytic derivative is only supplied for exponent >= 1 (below that it
    blows up at 0 and the finite-difference fallback is no better; callers
    needing Newton should stick to exponent >= 1).
    """
    q = float(exponent)
    c = float(coeff)
    if q <= 0.0:
        raise ValueError("exponent must be positive")

    def f(k, t):
        return c * np.sign(t) * abs(t) ** q

    def potential(k, xi):
        return c * abs(xi) ** (q + 1.0) / (q + 1.0)

    df = None
    if q >= 1.0:
        def df(k, t):
            return c * q * abs(t) ** (q - 1.0)

    return Nonlinearity(f=f, potential=potential, df=df,
                        is_nonnegative=c >= 0.0,
                        gamma=None,
                        name=f"power({q:g},{c:g})")


def bounded_rational() -> Nonlinearity:
    """f(k, t) = t / (1 + t^2) with potential F_k(xi) = ln(1 + xi^2) / 2.

    Bounded, odd, nonnegative on [0, inf); F_k(xi)/xi^2 -> 1/2 as xi -> 0,
    so gamma_k = 1/2 is declared.
    """
    return Nonlinearity(f=lambda k, t: t / (1.0 + t * t),
                        potential=lambda k, xi: 0.5 * np.log1p(xi * xi),
                        df=lambda k, t: (1.0 - t * t) / (1.0 + t * t) ** 2,
                        is_nonnegative=True,
                        gamma=0.5,
                        name="bounded_rational")


def from_table(t_samples, f_samples, is_nonnegative: bool = False) -> Nonlinearity:
    """Piecewise-linear f from samples; potential by quadrature on the interpolant.

    t_samples: strictly increasing 1-D abscissae.
    f_samples: either a 1-D array (same f for every k) or a 2-D array with one
    row per node k = 1..T.  Outside the sampled range f is held constant at
    the nearest sample (np.interp semantics).
    """
    ts = np.asarray(t_samples, dtype=float)
    fs = np.asarray(f_samples, dtype=float)
    if ts.ndim != 1 or ts.size < 2 or np.any(np.diff(ts) <= 0.0):
        raise ValueError("t_samples must be a strictly increasing 1-D sequence")
    if fs.ndim == 1:
        if fs.shape != ts.shape:
            raise ValueError("f_samples length must match t_samples")
        rows = fs[None, :]
        shared = True
    elif fs.ndim == 2:
        if fs.shape[1] != ts.size:
            raise ValueError("each f_samples row must match t_samples length")
        rows = fs
        shared = False
    else:
        raise ValueError("f_samples must be 1-D or 2-D")

    def f(k, t):
        row = rows[0] if shared else rows[k - 1]
        return float(np.interp(t, ts, row))

    def _check_k(k):
        if not shared and not 1 <= k <= rows.shape[0]:
            raise ValueError(f"table has {rows.shape[0]} rows; node {k} out of range")

    def f_checked(k, t):
        _check_k(k)
        return f(k, t)

    return Nonlinearity(f=f_checked, potential=None, df=None,
                        is_nonnegative=is_nonnegative,
                        gamma=None,
                        name="custom_table")


def scaled_per_node(nl: Nonlinearity, scale) -> Nonlinearity:
    """Multiply f (and its potential) by a per-node factor scale[k-1]."""
    sc = np.asarray(scale, dtype=float)
    if sc.ndim != 1 or sc.size < 1:
        raise ValueError("scale must be a non-empty 1-D sequence")

    def pick(k):
        if not 1 <= k <= sc.size:
            raise ValueError(f"scale has {sc.size} entries; node {k} out of range")
        return sc[k - 1]

    f = lambda k, t: pick(k) * nl.eval_f(k, t)
    potential = None
    if nl.potential is not None:
        potential = lambda k, xi: pick(k) * nl.eval_F(k, xi)
    df = None
    if nl.df is not None:
        df = lambda k, t: pick(k) * nl.eval_df(k, t)
    gamma = None
    if nl.gamma is not None:
        g = np.broadcast_to(np.asarray(nl.gamma, dtype=float), (sc.size,))
        gamma = tuple(float(s) * float(gk) for s, gk in zip(sc, g))
    keep_flag = nl.is_nonnegative and bool(np.all(sc >= 0.0))
    return Nonlinearity(f=f, potential=potential, df=df,
                        is_nonnegative=keep_flag,
                        gamma=gamma,
                        name=f"{nl.name}*per_node",)
