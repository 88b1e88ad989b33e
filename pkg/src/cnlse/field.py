"""Grid, physical coefficients, field state, and the discrete norms built on them.

The solver works on a uniform grid of interior nodes with homogeneous
Dirichlet boundaries: the nodes at ``x_min`` and ``x_max`` carry an
identically zero field and are never stored.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidStateError


def abs2(z: np.ndarray) -> np.ndarray:
    """|z|^2 without the square root that np.abs would take."""
    z = np.asarray(z)
    return z.real ** 2 + z.imag ** 2


@dataclass(frozen=True)
class Grid:
    """Uniform space-time discretization.

    ``n_space`` counts interior nodes; node i (1-based) sits at
    ``x_min + i*h`` with ``h = (x_max - x_min) / (n_space + 1)``.
    """

    x_min: float
    x_max: float
    n_space: int
    tau: float
    n_time: int

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise ValueError("grid requires x_max > x_min")
        if self.n_space < 1:
            raise ValueError("grid requires n_space >= 1")
        if not self.tau > 0:
            raise ValueError("grid requires tau > 0")
        if self.n_time < 1:
            raise ValueError("grid requires n_time >= 1")

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n_space + 1)

    @property
    def final_time(self) -> float:
        return self.n_time * self.tau

    def nodes(self) -> np.ndarray:
        """Positions of the interior nodes."""
        return self.x_min + self.h * np.arange(1, self.n_space + 1)


@dataclass(frozen=True)
class Physics:
    """The six equation coefficients.

    ``sigma`` is the group-velocity half-difference (opposite-sign
    convection in the two modes), ``k`` the dispersion coefficient,
    ``a``/``b`` the self/cross nonlinearities of the first mode and
    ``c``/``d`` those of the second.  All are taken non-negative.
    """

    sigma: float
    k: float
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        for name in ("sigma", "k", "a", "b", "c", "d"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise ValueError(f"physics coefficient {name} must be finite")
            if value < 0:
                raise ValueError(f"physics coefficient {name} must be >= 0")

    def coefficients(self) -> tuple[float, float, float, float, float, float]:
        return (self.sigma, self.k, self.a, self.b, self.c, self.d)


@dataclass(frozen=True, eq=False)
class FieldState:
    """The two complex grid functions at one time level."""

    u: np.ndarray
    v: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "u", np.asarray(self.u, dtype=np.complex128))
        object.__setattr__(self, "v", np.asarray(self.v, dtype=np.complex128))
        if self.u.shape != self.v.shape or self.u.ndim != 1:
            raise ValueError("u and v must be 1-d arrays of equal length")

    @property
    def n_space(self) -> int:
        return self.u.shape[0]

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.u).all() and np.isfinite(self.v).all())


@dataclass(frozen=True)
class InvariantPair:
    """Plain (unweighted) discrete pulse energies of the two modes."""

    i_u: float
    i_v: float

    @property
    def total(self) -> float:
        return self.i_u + self.i_v


def _require_finite(values: np.ndarray, what: str) -> None:
    if not np.isfinite(values).all():
        raise InvalidStateError(f"{what} contains non-finite entries")


def discrete_l2_norm(field: np.ndarray, h: float) -> float:
    """Grid norm ``h * sqrt(sum_i |field_i|^2)`` used for error reporting."""
    if not h > 0:
        raise ValueError("h must be > 0")
    field = np.asarray(field, dtype=np.complex128)
    _require_finite(field, "field")
    return float(h * np.sqrt(np.sum(abs2(field))))


def invariants(state: FieldState) -> InvariantPair:
    """Unweighted sums sum_i |U_i|^2 and sum_i |V_i|^2.

    These are the conserved quantities of the continuous system; the
    stability and convergence diagnostics use them exactly in this
    unweighted form (no factor of h).
    """
    _require_finite(state.u, "u")
    _require_finite(state.v, "v")
    return InvariantPair(float(np.sum(abs2(state.u))), float(np.sum(abs2(state.v))))


def max_amplitude(state: FieldState) -> tuple[float, float]:
    """Peak moduli (max_i |U_i|, max_i |V_i|)."""
    _require_finite(state.u, "u")
    _require_finite(state.v, "v")
    return (
        float(np.sqrt(np.max(abs2(state.u)))),
        float(np.sqrt(np.max(abs2(state.v)))),
    )
