import math

import numpy as np
import pytest

from cnlse import (
    FieldState,
    Grid,
    InvariantPair,
    Physics,
    convergence_q,
    element_bounds,
    error_vs_oracle,
    explicit_step,
    invariants,
    matrix_norm_bound,
    sech,
    stability_budget,
    stability_rho,
)


def grid_with(h, tau, span=(-50.0, 50.0)):
    n_space = int(round((span[1] - span[0]) / h)) - 1
    return Grid(span[0], span[1], n_space, tau, 1)


def test_rho_direct_substitution_nonlinear_only():
    p = Physics(0, 0, 1, 0, 0, 1)
    g = grid_with(0.1, 0.01)
    assert stability_rho(p, g, InvariantPair(1.0, 0.0)) == pytest.approx(4.0)


def test_rho_direct_substitution_convection_only():
    p = Physics(1, 0, 0, 0, 0, 0)
    g = grid_with(0.5, 0.01, span=(-50.0, 50.0))
    assert stability_rho(p, g, InvariantPair(0.0, 0.0)) == pytest.approx(8.0)


def test_rho_manakov_setup_spans_instability_threshold():
    # Invariants of unit sech data from the quadrature value 2/h, then the
    # closed form: rho = 16 k / h^2 + 160 at h = 0.1.  Over the 1e4..1e6
    # step range for t = 15 the product rho*tau crosses 0.1.
    p = Physics(0, 1, 1, 1, 1, 1)
    g = grid_with(0.1, 15.0 / 10_000)
    i_sech = 2.0 / g.h
    inv = InvariantPair(i_sech, i_sech)
    rho = stability_rho(p, g, inv)
    assert rho == pytest.approx(16.0 * p.k / g.h ** 2 + 160.0, rel=1e-9)
    assert rho * (15.0 / 10_000) > 0.1
    assert rho * (15.0 / 1_000_000) < 0.1


def test_rho_monotone_in_parameters():
    rng = np.random.default_rng(21)
    base_p = Physics(0.3, 0.7, 1.0, 0.5, 0.8, 0.2)
    base_g = grid_with(0.2, 0.01)
    base_inv = InvariantPair(3.0, 2.0)
    base = stability_rho(base_p, base_g, base_inv)
    for name in ("sigma", "k", "a", "b", "c", "d"):
        for _ in range(5):
            bump = float(rng.uniform(0, 1))
            kwargs = {f: getattr(base_p, f) for f in ("sigma", "k", "a", "b", "c", "d")}
            kwargs[name] += bump
            assert stability_rho(Physics(**kwargs), base_g, base_inv) >= base
    assert stability_rho(base_p, base_g, InvariantPair(4.0, 2.0)) >= base
    assert stability_rho(base_p, base_g, InvariantPair(3.0, 2.5)) >= base
    finer = grid_with(0.1, 0.01)
    assert stability_rho(base_p, finer, base_inv) >= base


def test_budget_consistency_and_verdicts():
    p = Physics(0, 1, 1, 1, 1, 1)
    inv = InvariantPair(20.0, 20.0)
    for tau in (1.5e-3, 9.46e-5, 5e-5, 1.5e-5):
        g = grid_with(0.1, tau)
        budget = stability_budget(p, g, inv)
        assert budget.rho_tau == pytest.approx(budget.rho * tau, rel=1e-14)
        assert (budget.verdict == "unstable-regime") == (budget.rho_tau > budget.threshold)
        assert budget.recommended_tau * budget.rho == pytest.approx(
            budget.threshold, rel=1e-12
        )
    assert stability_budget(p, grid_with(0.1, 1.5e-3), inv).verdict == "unstable-regime"
    assert stability_budget(p, grid_with(0.1, 1.5e-5), inv).verdict == "stable-regime"


def test_budget_zero_coefficients_stable():
    p = Physics(0, 0, 0, 0, 0, 0)
    budget = stability_budget(p, grid_with(0.1, 0.1), InvariantPair(0, 0))
    assert budget.rho == 0.0
    assert budget.verdict == "stable-regime"
    assert math.isinf(budget.recommended_tau)


def test_element_bounds_zero_coefficients():
    p = Physics(0, 0, 0, 0, 0, 0)
    g = grid_with(0.1, 0.01)
    state = FieldState(np.ones(g.n_space, dtype=complex), np.ones(g.n_space, dtype=complex))
    bounds = element_bounds(p, g, state)
    assert bounds.t11 == bounds.t22 == bounds.t33 == bounds.t44 == 1.0
    assert bounds.t12 == bounds.t21 == bounds.t34 == bounds.t43 == 0.0


def test_element_bounds_convection_only():
    p = Physics(1, 0, 0, 0, 0, 0)
    g = grid_with(0.1, 0.01)
    state = FieldState(np.zeros(g.n_space, dtype=complex), np.zeros(g.n_space, dtype=complex))
    bounds = element_bounds(p, g, state)
    assert bounds.t11 == pytest.approx(1.1)
    assert bounds.t12 == 0.0


def test_element_bounds_sech_fields_match_direct_evaluation():
    # Re-evaluate the bound expressions independently for the two-mode setup
    # with a = c = 1, b = d = 1/3 and sech pulses of amplitudes 1.2 / 1.4.
    p = Physics(0, 0.5, 1.0, 1.0 / 3.0, 1.0, 1.0 / 3.0)
    g = grid_with(0.2, 0.02, span=(-30.0, 30.0))
    x = g.nodes()
    state = FieldState(1.2 * sech(x) * np.exp(0.7j * x), 1.4 * sech(x))
    bounds = element_bounds(p, g, state)
    mu = np.max(np.abs(state.u)) ** 2
    mv = np.max(np.abs(state.v)) ** 2
    assert bounds.t11 == pytest.approx(1.0 + g.tau * p.sigma / g.h, rel=1e-12)
    assert bounds.t12 == pytest.approx(
        4 * g.tau * p.k / g.h ** 2 + g.tau * (p.a * mu + p.b * mv), rel=1e-12
    )
    assert bounds.t43 == pytest.approx(
        4 * g.tau * p.k / g.h ** 2 + g.tau * (p.c * mv + p.d * mu), rel=1e-12
    )
    assert bounds.t12 >= 4 * g.tau * p.k / g.h ** 2
    assert bounds.t11 == bounds.t22 == bounds.t33 == bounds.t44


def test_matrix_norm_bound_trivial_cases():
    g = grid_with(0.1, 0.1)
    zero = Physics(0, 0, 0, 0, 0, 0)
    assert matrix_norm_bound(zero, g, InvariantPair(0, 0)) == pytest.approx(4.0)
    ones = Physics(0, 0, 1, 1, 1, 1)
    assert matrix_norm_bound(ones, g, InvariantPair(1, 1)) == pytest.approx(4.8)


def test_matrix_norm_bound_matches_independent_evaluation():
    p = Physics(0.3, 0.5, 1.0, 0.2, 1.0, 1.6)
    g = grid_with(0.2, 0.02, span=(-30.0, 30.0))
    inv = InvariantPair(22.5, 22.5)
    expected = (
        4
        + 4 * g.tau * p.sigma / g.h
        + 16 * g.tau * p.k / g.h ** 2
        + 2 * g.tau * (p.a * inv.i_u + p.b * inv.i_v + p.d * inv.i_u + p.c * inv.i_v)
    )
    assert matrix_norm_bound(p, g, inv) == pytest.approx(expected, rel=1e-13)


def test_convergence_q_identity_and_substitution():
    p = Physics(0, 0, 1, 1, 1, 1)
    same = InvariantPair(2.5, 1.5)
    assert convergence_q(p, same, same) == 0.0
    q = convergence_q(p, InvariantPair(3.0, 1.0), InvariantPair(0.5, 0.5))
    assert q == pytest.approx(4 * abs(4.0 ** 1.5 - 1.0 ** 1.5))
    assert q == pytest.approx(28.0)


def test_convergence_q_bounded_by_drift_after_explicit_run():
    # After a stable explicit run the energy mismatch against the conserved
    # initial invariants obeys the Lipschitz bound
    # Q <= 4 max(a..d) * 3 sqrt(I_max) * |delta I|.
    g = Grid(-20.0, 20.0, 399, 1e-4, 100)
    p = Physics(0, 1, 1, 1, 1, 1)
    x = g.nodes()
    state = FieldState(sech(x).astype(complex), sech(x).astype(complex))
    exact = invariants(state)
    for _ in range(100):
        state = explicit_step(state, p, g)
    numeric = invariants(state)
    q = convergence_q(p, numeric, exact)
    delta = abs(numeric.total - exact.total)
    assert delta > 0  # forward Euler drifts, so the bound is non-trivial
    bound = 4 * 1.0 * 3.0 * math.sqrt(max(numeric.total, exact.total)) * delta
    assert q <= bound


def test_error_vs_oracle_zero_for_sampled_oracle():
    g = Grid(-20.0, 20.0, 199, 0.01, 1)
    x = g.nodes()

    def oracle(xs, t):
        return sech(xs).astype(complex), np.zeros_like(xs, dtype=complex)

    state = FieldState(*oracle(x, 0.0), 0.0)
    err = error_vs_oracle(state, oracle, g)
    assert err.l2 == 0.0
    assert err.linf == 0.0


def test_error_vs_oracle_constant_offset():
    g = Grid(-20.0, 20.0, 199, 0.01, 1)
    x = g.nodes()
    eps = 1e-3

    def oracle(xs, t):
        return np.zeros_like(xs, dtype=complex), np.zeros_like(xs, dtype=complex)

    state = FieldState(np.full_like(x, eps, dtype=complex), np.zeros_like(x, dtype=complex))
    err = error_vs_oracle(state, oracle, g)
    assert err.l2 == pytest.approx(g.h * eps * math.sqrt(g.n_space), rel=1e-12)
    assert err.linf == pytest.approx(eps, rel=1e-12)
