"""Evolution driver: repeated stepping with observation and abort logic."""

from __future__ import annotations

import time as _time
from dataclasses import dataclass

import numpy as np

from .errors import BlowUpError, IterationFailureError
from .field import FieldState, Grid, InvariantPair, Physics, abs2, invariants
from .schemes import IterationPolicy, explicit_run_chunk, explicit_step, implicit_step

SCHEMES = ("explicit", "implicit")

# Relative invariant drift beyond which a run is declared unstable.
DRIFT_LIMIT = 0.1


@dataclass(frozen=True)
class Termination:
    """How a run ended: 'completed', 'blow-up' or 'iteration-failure'."""

    status: str
    step: int | None = None

    @property
    def completed(self) -> bool:
        return self.status == "completed"

    def describe(self) -> str:
        if self.status == "completed":
            return "completed"
        if self.status == "blow-up":
            return f"blew-up-at-step {self.step}"
        return f"iteration-failure-at-step {self.step}"


@dataclass
class RunRecord:
    """Time series and snapshots gathered while a scenario runs."""

    times: np.ndarray
    i_u: np.ndarray
    i_v: np.ndarray
    max_u: np.ndarray
    max_v: np.ndarray
    err_l2: np.ndarray | None
    err_max: np.ndarray | None
    iterations: list[int] | None
    snapshots: list[FieldState]
    termination: Termination
    wall_time_s: float
    initial_invariants: InvariantPair
    scheme: str

    def max_rel_drift(self) -> float:
        """Largest relative invariant drift seen at any observation."""
        drift = 0.0
        for series, start in ((self.i_u, self.initial_invariants.i_u),
                              (self.i_v, self.initial_invariants.i_v)):
            if start > 0 and len(series):
                drift = max(drift, float(np.max(np.abs(series - start)) / start))
        return drift

    def final_state(self) -> FieldState:
        if not self.snapshots:
            raise ValueError("run record holds no snapshots")
        return self.snapshots[-1]


def evolve(
    initial: FieldState,
    phys: Physics,
    grid: Grid,
    scheme: str = "explicit",
    policy: IterationPolicy | None = None,
    n_steps: int | None = None,
    observe_every: int = 1,
    snapshot_every_obs: int | None = None,
    oracle=None,
    drift_limit: float | None = DRIFT_LIMIT,
) -> RunRecord:
    """Apply the chosen step ``n_steps`` times (default ``grid.n_time``).

    Observations (invariants, peak moduli, oracle error when an oracle is
    given) happen at step 0, every ``observe_every`` steps and at the final
    step.  Snapshots are kept every ``snapshot_every_obs`` observations
    (default: roughly 50 per run).  A blow-up or iteration failure ends the
    run cleanly with the failing step recorded; drift of either invariant
    beyond ``drift_limit`` counts as a blow-up (``None`` disables the drift
    detector).  ``n_steps=0`` records just the initial observation and
    snapshot.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}, expected one of {SCHEMES}")
    if n_steps is None:
        n_steps = grid.n_time
    if n_steps < 0:
        raise ValueError("n_steps must be >= 0")
    if observe_every < 1:
        raise ValueError("observe_every must be >= 1")
    n_obs_planned = n_steps // observe_every + 1
    if snapshot_every_obs is None:
        snapshot_every_obs = max(1, n_obs_planned // 50)
    if snapshot_every_obs < 1:
        raise ValueError("snapshot_every_obs must be >= 1")

    t_start = _time.perf_counter()
    x = grid.nodes()
    start_inv = invariants(initial)

    times: list[float] = []
    i_u: list[float] = []
    i_v: list[float] = []
    max_u: list[float] = []
    max_v: list[float] = []
    err_l2: list[float] = []
    err_max: list[float] = []
    iterations: list[int] | None = [] if scheme == "implicit" else None
    snapshots: list[FieldState] = []

    def observe(state: FieldState, obs_index: int) -> None:
        times.append(state.time)
        au2 = abs2(state.u)
        av2 = abs2(state.v)
        i_u.append(float(np.sum(au2)))
        i_v.append(float(np.sum(av2)))
        max_u.append(float(np.sqrt(np.max(au2))))
        max_v.append(float(np.sqrt(np.max(av2))))
        if oracle is not None:
            ue, ve = oracle(x, state.time)
            du2 = abs2(state.u - ue)
            dv2 = abs2(state.v - ve)
            err_l2.append(float(grid.h * np.sqrt(np.sum(du2) + np.sum(dv2))))
            err_max.append(float(np.sqrt(max(np.max(du2), np.max(dv2)))))
        if obs_index % snapshot_every_obs == 0:
            snapshots.append(state)

    def drifted() -> bool:
        if drift_limit is None:
            return False
        for last, start in ((i_u[-1], start_inv.i_u), (i_v[-1], start_inv.i_v)):
            if start > 0 and abs(last - start) / start > drift_limit:
                return True
        return False

    state = initial
    observe(state, 0)
    termination = Termination("completed")
    obs_index = 0

    if scheme == "explicit" and explicit_run_chunk is not None and n_steps > 0:
        # chunked fast path: advance one observation window per call
        coeffs = phys.coefficients()
        u, v = state.u, state.v
        done = 0
        while done < n_steps:
            chunk = min(observe_every - done % observe_every, n_steps - done)
            failed, u, v = explicit_run_chunk(u, v, grid.h, grid.tau, *coeffs, chunk)
            if failed:
                termination = Termination("blow-up", done + failed)
                break
            done += chunk
            state = FieldState(u, v, initial.time + done * grid.tau)
            obs_index += 1
            observe(state, obs_index)
            if drifted():
                termination = Termination("blow-up", done)
                break
    else:
        for step_index in range(1, n_steps + 1):
            try:
                if scheme == "explicit":
                    state = explicit_step(state, phys, grid)
                else:
                    state, report = implicit_step(state, phys, grid, policy)
                    iterations.append(report.iterations_used)
            except BlowUpError:
                termination = Termination("blow-up", step_index)
                break
            except IterationFailureError:
                termination = Termination("iteration-failure", step_index)
                break
            if step_index % observe_every == 0 or step_index == n_steps:
                if not state.is_finite():
                    termination = Termination("blow-up", step_index)
                    break
                obs_index += 1
                observe(state, obs_index)
                if drifted():
                    termination = Termination("blow-up", step_index)
                    break

    if termination.completed and (not snapshots or snapshots[-1] is not state):
        snapshots.append(state)

    return RunRecord(
        times=np.asarray(times),
        i_u=np.asarray(i_u),
        i_v=np.asarray(i_v),
        max_u=np.asarray(max_u),
        max_v=np.asarray(max_v),
        err_l2=np.asarray(err_l2) if oracle is not None else None,
        err_max=np.asarray(err_max) if oracle is not None else None,
        iterations=iterations,
        snapshots=snapshots,
        termination=termination,
        wall_time_s=_time.perf_counter() - t_start,
        initial_invariants=start_inv,
        scheme=scheme,
    )
