"""Stability and convergence diagnostics plus the analytic solution oracles.

The explicit scheme's growth-rate budget is the closed form

    rho = 4 sigma / h + 16 k / h^2 + 4 max(a, d) I_u + 4 max(b, c) I_v

built from the invariants of the initial data; runs with rho * tau above
roughly 0.1 are empirically unstable.  The convergence residual Q compares
the numerical and exact pulse energies:

    Q = 4 | max(a,b,c,d) (I_u + I_v)^{3/2}
          - max(a,b,c,d) (I_ue + I_ve)^{3/2} |.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedParametersError
from .field import FieldState, Grid, InvariantPair, Physics, abs2

DEFAULT_RHO_TAU_THRESHOLD = 0.1

VERDICT_STABLE = "stable-regime"
VERDICT_MARGINAL = "marginal"
VERDICT_UNSTABLE = "unstable-regime"


def sech(x):
    """Overflow-safe hyperbolic secant, elementwise."""
    x = np.asarray(x, dtype=float)
    e = np.exp(-np.abs(x))
    return 2.0 * e / (1.0 + e * e)


# ---------------------------------------------------------------------------
# Stability budget


def stability_rho(phys: Physics, grid: Grid, inv: InvariantPair) -> float:
    """Growth-rate bound of the explicit scheme (per unit time)."""
    if inv.i_u < 0 or inv.i_v < 0:
        raise ValueError("invariants must be non-negative")
    h = grid.h
    return (
        4.0 * phys.sigma / h
        + 16.0 * phys.k / (h * h)
        + 4.0 * max(phys.a, phys.d) * inv.i_u
        + 4.0 * max(phys.b, phys.c) * inv.i_v
    )


@dataclass(frozen=True)
class StabilityBudget:
    """rho, rho*tau, and the verdict against the instability threshold."""

    rho: float
    rho_tau: float
    threshold: float
    verdict: str
    recommended_tau: float


def stability_budget(
    phys: Physics,
    grid: Grid,
    inv: InvariantPair,
    threshold: float = DEFAULT_RHO_TAU_THRESHOLD,
) -> StabilityBudget:
    """Evaluate the explicit-scheme budget for a given grid and initial data.

    ``recommended_tau`` is the largest time step keeping rho * tau at the
    threshold (rho itself does not depend on tau).  The verdict is
    unstable-regime above the threshold, marginal above half of it.
    """
    if not threshold > 0:
        raise ValueError("threshold must be > 0")
    rho = stability_rho(phys, grid, inv)
    rho_tau = rho * grid.tau
    if rho_tau > threshold:
        verdict = VERDICT_UNSTABLE
    elif rho_tau > 0.5 * threshold:
        verdict = VERDICT_MARGINAL
    else:
        verdict = VERDICT_STABLE
    recommended = threshold / rho if rho > 0 else math.inf
    return StabilityBudget(rho, rho_tau, threshold, verdict, recommended)


@dataclass(frozen=True)
class ElementBounds:
    """Entrywise bounds on the blocks of the one-step evolution matrix.

    The diagonal blocks are bounded by 1 + tau sigma / h; each off-diagonal
    block by 4 tau k / h^2 plus the peak nonlinear terms of its mode.
    """

    t11: float
    t12: float
    t21: float
    t22: float
    t33: float
    t34: float
    t43: float
    t44: float


def element_bounds(phys: Physics, grid: Grid, state: FieldState) -> ElementBounds:
    """Bounds on the evolution-matrix blocks from the current peak moduli."""
    tau = grid.tau
    h = grid.h
    mu = float(np.max(abs2(state.u)))
    mv = float(np.max(abs2(state.v)))
    diag = 1.0 + tau * phys.sigma / h
    off_u = 4.0 * tau * phys.k / (h * h) + tau * (phys.a * mu + phys.b * mv)
    off_v = 4.0 * tau * phys.k / (h * h) + tau * (phys.c * mv + phys.d * mu)
    return ElementBounds(diag, off_u, off_u, diag, diag, off_v, off_v, diag)


def matrix_norm_bound(phys: Physics, grid: Grid, inv: InvariantPair) -> float:
    """Frobenius-style bound on the one-step evolution matrix.

    Returns 4 + 4 tau sigma / h + 16 tau k / h^2
    + 2 tau (a I_u + b I_v + d I_u + c I_v), exactly as the budget chain
    states it; no claim is made that it stays below exp(rho tau).
    """
    tau = grid.tau
    h = grid.h
    return (
        4.0
        + 4.0 * tau * phys.sigma / h
        + 16.0 * tau * phys.k / (h * h)
        + 2.0 * tau * (phys.a * inv.i_u + phys.b * inv.i_v
                       + phys.d * inv.i_u + phys.c * inv.i_v)
    )


def convergence_q(phys: Physics, numeric: InvariantPair, exact: InvariantPair) -> float:
    """Energy-mismatch residual Q between numerical and exact invariants."""
    for pair in (numeric, exact):
        if pair.i_u < 0 or pair.i_v < 0:
            raise ValueError("invariants must be non-negative")
    top = max(phys.a, phys.b, phys.c, phys.d)
    return 4.0 * abs(top * numeric.total ** 1.5 - top * exact.total ** 1.5)


# ---------------------------------------------------------------------------
# Analytic oracles


def nls_fundamental_soliton(x, t):
    """Stationary unit soliton sech(x) e^{it/2} of i U_t + U_xx/2 + |U|^2 U = 0."""
    return sech(x) * np.exp(0.5j * t)


def nls_breather_a2(x, t):
    """Bound state evolving from 2 sech(x) under i U_t + U_xx/2 + |U|^2 U = 0.

    Implemented as

        U = 4 e^{it/2} [cosh(3x) + 3 e^{4it} cosh(x)]
            / [cosh(4x) + 4 cosh(2x) + 3 cos(4t)]

    which reduces to 2 sech(x) at t = 0 and has |U| periodic in t with
    period pi/2.  Evaluated in a form scaled by e^{-4|x|} so large |x|
    cannot overflow.
    """
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    e1 = np.exp(-ax)
    e2 = e1 * e1
    e3 = e2 * e1
    e4 = e2 * e2
    # cosh(m x) * e^{-4|x|} = (e^{(m-4)|x|} + e^{-(m+4)|x|}) / 2
    cosh3 = 0.5 * (e1 + e3 * e4)
    cosh1 = 0.5 * (e3 + e4 * e1)
    cosh4 = 0.5 * (1.0 + e4 * e4)
    cosh2 = 0.5 * (e2 + e4 * e2)
    numer = 4.0 * (cosh3 + 3.0 * np.exp(4j * t) * cosh1)
    denom = cosh4 + 4.0 * cosh2 + 3.0 * np.cos(4.0 * t) * e4
    return np.exp(0.5j * t) * numer / denom


def manakov_required_k(amplitude: float, phys: Physics) -> float:
    """Dispersion coefficient that makes the stationary vector soliton exact."""
    return 0.5 * amplitude * amplitude * (phys.a + phys.b)


def manakov_soliton(x, t, amplitude: float, phys: Physics):
    """Stationary vector soliton U = V = A sech(x) e^{ikt}.

    Exists only for equal nonlinearities (a = b = c = d), sigma = 0 and
    A^2 (a + b) = 2k; anything else raises UnsupportedParametersError.
    """
    if phys.sigma != 0:
        raise UnsupportedParametersError(
            "vector soliton requires sigma = 0"
        )
    if not (phys.a == phys.b == phys.c == phys.d):
        raise UnsupportedParametersError(
            "vector soliton requires equal nonlinearities a = b = c = d"
        )
    required = manakov_required_k(amplitude, phys)
    if abs(phys.k - required) > 1e-12 * max(1.0, abs(required)):
        raise UnsupportedParametersError(
            f"vector soliton of amplitude {amplitude:g} requires k = "
            f"A^2 (a + b) / 2 = {required:g}, got k = {phys.k:g}"
        )
    profile = amplitude * sech(x) * np.exp(1j * phys.k * t)
    return profile, profile.copy()


# ---------------------------------------------------------------------------
# Error metrics


@dataclass(frozen=True)
class ErrorNorms:
    """Discrete L2 and max-norm distance between a state and an oracle."""

    l2: float
    linf: float


def error_vs_oracle(state: FieldState, oracle, grid: Grid) -> ErrorNorms:
    """Distance between ``state`` and ``oracle(x, state.time)``.

    ``oracle`` must return the (U, V) pair on the grid nodes.  The L2 norm
    treats the pair as one stacked field: h * sqrt(sum |dU|^2 + |dV|^2).
    """
    x = grid.nodes()
    ue, ve = oracle(x, state.time)
    du2 = abs2(state.u - np.asarray(ue))
    dv2 = abs2(state.v - np.asarray(ve))
    l2 = float(grid.h * np.sqrt(np.sum(du2) + np.sum(dv2)))
    linf = float(np.sqrt(max(np.max(du2), np.max(dv2))))
    return ErrorNorms(l2, linf)
