"""The two time-stepping kernels: explicit Euler and six-point Crank-Nicolson.

Both advance the coupled system

    i U_t + i sigma U_x + k U_xx + (a|U|^2 + b|V|^2) U = 0
    i V_t - i sigma V_x + k V_xx + (c|V|^2 + d|U|^2) V = 0

on interior nodes with zero Dirichlet boundaries.  The explicit kernel is
forward in time with centered space differences; the implicit kernel
averages the convection/dispersion stencils over the two time levels and
freezes the nonlinearity at the half step, resolved by fixed-point
iteration.  With the nonlinear coefficient frozen (it is real) the
Crank-Nicolson update is a Cayley transform, so it conserves the discrete
invariants to roundoff regardless of how far the iteration has converged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .errors import BlowUpError, IterationFailureError, SolverError
from .field import FieldState, Grid, Physics, abs2

_TINY = 1e-300


@dataclass(frozen=True)
class IterationPolicy:
    """Controls the implicit scheme's fixed-point loop.

    ``tol`` is the relative convergence tolerance (discrete L2) on the
    half-step iterates; ``divergence_factor`` aborts early when the
    residual grows by that factor between iterations.
    """

    tol: float = 1e-12
    max_iters: int = 25
    divergence_factor: float = 10.0

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be > 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.divergence_factor > 1:
            raise ValueError("divergence_factor must be > 1")


@dataclass(frozen=True)
class StepReport:
    """Iteration diagnostics for one implicit step (0 iterations = explicit)."""

    iterations_used: int
    residual: float


def solve_tridiagonal(lower, diag, upper, rhs) -> np.ndarray:
    """Solve a complex tridiagonal system.

    ``lower``/``upper`` are the length n-1 off-diagonals, ``diag`` and
    ``rhs`` length n.  Backed by LAPACK's pivoted tridiagonal solver; a
    singular system raises SolverError.
    """
    diag = np.asarray(diag, dtype=np.complex128)
    rhs = np.asarray(rhs, dtype=np.complex128)
    lower = np.asarray(lower, dtype=np.complex128)
    upper = np.asarray(upper, dtype=np.complex128)
    n = diag.shape[0]
    if n < 1:
        raise ValueError("diag must have length >= 1")
    if lower.shape[0] != n - 1 or upper.shape[0] != n - 1:
        raise ValueError("lower/upper must have length n - 1")
    if rhs.shape[0] != n:
        raise ValueError("rhs must have length n")
    ab = np.zeros((3, n), dtype=np.complex128)
    ab[0, 1:] = upper
    ab[1, :] = diag
    ab[2, :-1] = lower
    try:
        return solve_banded((1, 1), ab, rhs, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"singular tridiagonal system: {exc}") from exc


def _shifted(f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Neighbor values f_{i+1}, f_{i-1} with zero ghost nodes."""
    plus = np.zeros_like(f)
    plus[:-1] = f[1:]
    minus = np.zeros_like(f)
    minus[1:] = f[:-1]
    return plus, minus


def _check_shapes(state: FieldState, grid: Grid) -> None:
    if state.n_space != grid.n_space:
        raise ValueError(
            f"state has {state.n_space} nodes, grid expects {grid.n_space}"
        )


def _explicit_update_numpy(u, v, h, tau, sigma, k, a, b, c, d):
    with np.errstate(all="ignore"):
        au2 = abs2(u)
        av2 = abs2(v)
        up, um = _shifted(u)
        vp, vm = _shifted(v)
        conv = sigma * tau / (2.0 * h)
        disp = 1j * tau * k / (h * h)
        u_next = u - conv * (up - um) + disp * (up - 2.0 * u + um) \
            + (1j * tau) * (a * au2 + b * av2) * u
        v_next = v + conv * (vp - vm) + disp * (vp - 2.0 * v + vm) \
            + (1j * tau) * (c * av2 + d * au2) * v
        finite = bool(np.isfinite(u_next).all() and np.isfinite(v_next).all())
    return u_next, v_next, finite


try:  # numba shaves the per-step overhead off million-step explicit runs
    import math as _math

    import numba as _numba

    @_numba.njit(cache=True)
    def _explicit_update_jit(u, v, h, tau, sigma, k, a, b, c, d):  # pragma: no cover
        n = u.shape[0]
        u_next = np.empty_like(u)
        v_next = np.empty_like(v)
        conv = sigma * tau / (2.0 * h)
        disp = 1j * tau * k / (h * h)
        itau = 1j * tau
        zero = 0.0 + 0.0j
        acc = 0.0
        for i in range(n):
            up = u[i + 1] if i + 1 < n else zero
            um = u[i - 1] if i >= 1 else zero
            vp = v[i + 1] if i + 1 < n else zero
            vm = v[i - 1] if i >= 1 else zero
            ui = u[i]
            vi = v[i]
            au2 = ui.real * ui.real + ui.imag * ui.imag
            av2 = vi.real * vi.real + vi.imag * vi.imag
            un = ui - conv * (up - um) + disp * (up - 2.0 * ui + um) \
                + itau * (a * au2 + b * av2) * ui
            vn = vi + conv * (vp - vm) + disp * (vp - 2.0 * vi + vm) \
                + itau * (c * av2 + d * au2) * vi
            u_next[i] = un
            v_next[i] = vn
            acc += un.real + un.imag + vn.real + vn.imag
        return u_next, v_next, _math.isfinite(acc)

    @_numba.njit(cache=True)
    def _explicit_run_jit(u0, v0, h, tau, sigma, k, a, b, c, d, n_steps):  # pragma: no cover
        """Advance n_steps explicit updates in one call.

        Returns (failed_step, u, v): failed_step is 0 on success, or the
        step at which non-finite values were detected (checked every 32
        steps and at the end; NaN/Inf persist, so none are missed).
        """
        n = u0.shape[0]
        u = u0.copy()
        v = v0.copy()
        u_next = np.empty_like(u)
        v_next = np.empty_like(v)
        conv = sigma * tau / (2.0 * h)
        disp = 1j * tau * k / (h * h)
        itau = 1j * tau
        zero = 0.0 + 0.0j
        for step in range(n_steps):
            # boundary nodes carry zero ghosts; interior loop is branch-free
            for i in range(1, n - 1):
                ui = u[i]
                vi = v[i]
                up = u[i + 1]
                um = u[i - 1]
                vp = v[i + 1]
                vm = v[i - 1]
                au2 = ui.real * ui.real + ui.imag * ui.imag
                av2 = vi.real * vi.real + vi.imag * vi.imag
                u_next[i] = ui - conv * (up - um) + disp * (up - 2.0 * ui + um) \
                    + itau * (a * au2 + b * av2) * ui
                v_next[i] = vi + conv * (vp - vm) + disp * (vp - 2.0 * vi + vm) \
                    + itau * (c * av2 + d * au2) * vi
            for i in range(0, n, max(n - 1, 1)):
                ui = u[i]
                vi = v[i]
                up = u[i + 1] if i + 1 < n else zero
                um = u[i - 1] if i >= 1 else zero
                vp = v[i + 1] if i + 1 < n else zero
                vm = v[i - 1] if i >= 1 else zero
                au2 = ui.real * ui.real + ui.imag * ui.imag
                av2 = vi.real * vi.real + vi.imag * vi.imag
                u_next[i] = ui - conv * (up - um) + disp * (up - 2.0 * ui + um) \
                    + itau * (a * au2 + b * av2) * ui
                v_next[i] = vi + conv * (vp - vm) + disp * (vp - 2.0 * vi + vm) \
                    + itau * (c * av2 + d * au2) * vi
            u, u_next = u_next, u
            v, v_next = v_next, v
            if (step & 31) == 31 or step == n_steps - 1:
                acc = 0.0
                for i in range(n):
                    acc += u[i].real + u[i].imag + v[i].real + v[i].imag
                if not _math.isfinite(acc):
                    return step + 1, u, v
        return 0, u, v

    _explicit_update = _explicit_update_jit
    explicit_run_chunk = _explicit_run_jit
except ImportError:  # pragma: no cover
    _explicit_update = _explicit_update_numpy
    explicit_run_chunk = None


def explicit_step(state: FieldState, phys: Physics, grid: Grid) -> FieldState:
    """One forward-Euler update with centered space differences.

    Solving the stencil for the new level gives

        U^{j+1} = U^j - (sigma tau / 2h)(U_{i+1} - U_{i-1})
                  + i tau [ k (U_{i+1} - 2U_i + U_{i-1}) / h^2
                            + (a|U_i|^2 + b|V_i|^2) U_i ]

    and the mirrored update (sigma -> -sigma, nonlinearity c|V|^2 + d|U|^2)
    for V.  Non-finite output raises BlowUpError.
    """
    _check_shapes(state, grid)
    sigma, k, a, b, c, d = phys.coefficients()
    u_next, v_next, finite = _explicit_update(
        state.u, state.v, grid.h, grid.tau, sigma, k, a, b, c, d
    )
    new_time = state.time + grid.tau
    if not finite:
        raise BlowUpError(
            f"explicit step produced non-finite values at t={new_time:g}",
            time=new_time,
        )
    return FieldState(u_next, v_next, new_time)


def _cn_apply(diag, sub, sup, f, fp, fm):
    """Action of the tridiagonal operator with scalar off-diagonals."""
    return diag * f + sub * fm + sup * fp


def implicit_step(
    state: FieldState,
    phys: Physics,
    grid: Grid,
    policy: IterationPolicy | None = None,
) -> tuple[FieldState, StepReport]:
    """One Crank-Nicolson (six-point) update.

    The convection and dispersion stencils are averaged over levels n and
    n+1; the nonlinear coefficient is evaluated from the half-step moduli
    |(U^{n+1,(m)} + U^n)/2|^2, frozen, and the resulting complex
    tridiagonal system is solved for the next iterate.  Iteration stops
    when the relative change of the iterate pair drops below
    ``policy.tol``.
    """
    if policy is None:
        policy = IterationPolicy()
    _check_shapes(state, grid)
    h = grid.h
    tau = grid.tau
    sigma, k, a, b, c, d = phys.coefficients()
    u, v = state.u, state.v
    up, um = _shifted(u)
    vp, vm = _shifted(v)

    c_conv = sigma * tau / (4.0 * h)
    c_disp = 0.5j * k * tau / (h * h)
    diag_base = 1.0 + 2.0 * c_disp
    # U carries +sigma convection, V the mirrored sign.
    sub_u = -c_conv - c_disp
    sup_u = +c_conv - c_disp
    sub_v = +c_conv - c_disp
    sup_v = -c_conv - c_disp
    n = grid.n_space
    lower_u = np.full(n - 1, sub_u)
    upper_u = np.full(n - 1, sup_u)
    lower_v = np.full(n - 1, sub_v)
    upper_v = np.full(n - 1, sup_v)

    u_guess, v_guess = u, v
    prev_residual = None
    iterations = 0
    while True:
        iterations += 1
        u_half2 = abs2(0.5 * (u_guess + u))
        v_half2 = abs2(0.5 * (v_guess + v))
        n_u = a * u_half2 + b * v_half2
        n_v = c * v_half2 + d * u_half2
        diag_u = diag_base - 0.5j * tau * n_u
        diag_v = diag_base - 0.5j * tau * n_v
        # (I + L) U^{n+1} = (I - L) U^n, and (I - L) U^n = 2 U^n - (I + L) U^n.
        rhs_u = 2.0 * u - _cn_apply(diag_u, sub_u, sup_u, u, up, um)
        rhs_v = 2.0 * v - _cn_apply(diag_v, sub_v, sup_v, v, vp, vm)
        u_new = solve_tridiagonal(lower_u, diag_u, upper_u, rhs_u)
        v_new = solve_tridiagonal(lower_v, diag_v, upper_v, rhs_v)

        change = np.sum(abs2(u_new - u_guess)) + np.sum(abs2(v_new - v_guess))
        size = np.sum(abs2(u_new)) + np.sum(abs2(v_new))
        residual = float(np.sqrt(change) / max(np.sqrt(size), _TINY))
        u_guess, v_guess = u_new, v_new
        if not np.isfinite(residual):
            raise IterationFailureError(
                f"implicit iteration produced non-finite residual at t={state.time:g}",
                iterations=iterations,
                residual=residual,
            )
        if residual <= policy.tol:
            break
        if prev_residual is not None and residual > policy.divergence_factor * prev_residual:
            raise IterationFailureError(
                f"implicit iteration diverging at t={state.time:g} "
                f"(residual {residual:.3e} after {iterations} iterations)",
                iterations=iterations,
                residual=residual,
            )
        if iterations >= policy.max_iters:
            raise IterationFailureError(
                f"implicit iteration did not converge in {policy.max_iters} "
                f"iterations at t={state.time:g} (residual {residual:.3e})",
                iterations=iterations,
                residual=residual,
            )
        prev_residual = residual

    new_time = state.time + tau
    if not (np.isfinite(u_guess).all() and np.isfinite(v_guess).all()):
        raise BlowUpError(
            f"implicit step produced non-finite values at t={new_time:g}",
            time=new_time,
        )
    return FieldState(u_guess, v_guess, new_time), StepReport(iterations, residual)
