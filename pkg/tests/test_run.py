import numpy as np
import pytest

from cnlse import (
    FieldState,
    Grid,
    IterationPolicy,
    Physics,
    evolve,
    preset,
    run_scenario,
    sech,
)


def small_state(n=99, span=10.0):
    g = Grid(-span, span, n, 1e-3, 100)
    x = g.nodes()
    return g, FieldState(sech(x).astype(complex), 0.5 * sech(x))


def test_zero_steps_records_only_initial_snapshot():
    g, state = small_state()
    p = Physics(0, 0.5, 1, 1, 1, 1)
    record = evolve(state, p, g, scheme="explicit", n_steps=0)
    assert record.termination.completed
    assert len(record.times) == 1
    assert record.times[0] == 0.0
    assert len(record.snapshots) == 1
    assert np.array_equal(record.snapshots[0].u, state.u)


def test_observation_cadence_and_final_step():
    g, state = small_state()
    p = Physics(0, 0.5, 1, 0, 0, 0)
    record = evolve(state, p, g, scheme="explicit", n_steps=95, observe_every=30)
    assert record.times == pytest.approx([0.0, 0.03, 0.06, 0.09, 0.095])
    assert record.termination.completed


def test_implicit_run_tracks_iterations_per_step():
    g, state = small_state()
    p = Physics(0, 0.5, 1, 0.5, 1, 0.5)
    record = evolve(state, p, g, scheme="implicit", n_steps=20)
    assert record.iterations is not None
    assert len(record.iterations) == 20
    assert all(1 <= m <= 25 for m in record.iterations)
    assert record.scheme == "implicit"


def test_blow_up_recorded_cleanly():
    sc = preset("manakov")
    record = run_scenario(sc, n_time=10_000)  # rho * tau = 2.6, deep instability
    assert record.termination.status == "blow-up"
    assert record.termination.step is not None
    assert record.termination.describe() == f"blew-up-at-step {record.termination.step}"
    t_fail = record.termination.step * (15.0 / 10_000)
    assert t_fail < 15.0
    assert np.all(np.isfinite(record.i_u))


def test_iteration_failure_recorded_cleanly():
    g, state = small_state()
    p = Physics(0, 0.5, 2, 2, 2, 2)
    policy = IterationPolicy(tol=1e-15, max_iters=1)
    record = evolve(state, p, g, scheme="implicit", n_steps=10, policy=policy)
    assert record.termination.status == "iteration-failure"
    assert record.termination.step == 1
    assert "iteration-failure-at-step 1" == record.termination.describe()


def test_run_scenario_tau_override_keeps_final_time():
    sc = preset("explicit-vs-implicit")
    record = run_scenario(sc, tau=0.04)
    assert record.termination.completed
    assert record.times[-1] == pytest.approx(40.0)


def test_run_scenario_steps_override_keeps_final_time():
    sc = preset("explicit-vs-implicit")
    record = run_scenario(sc, n_time=800)
    assert record.termination.completed
    assert record.times[-1] == pytest.approx(40.0)
    assert len(record.iterations) == 800


def test_oracle_errors_logged():
    sc = preset("nls-a1")
    record = run_scenario(sc, n_time=40)
    assert record.err_l2 is not None and record.err_max is not None
    assert record.err_l2[0] == 0.0  # sampled initial condition matches oracle
    assert np.all(record.err_max >= 0)


def test_wall_time_recorded():
    g, state = small_state()
    record = evolve(state, Physics(0, 0, 0, 0, 0, 0), g, n_steps=5)
    assert record.wall_time_s >= 0
