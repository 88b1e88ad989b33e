"""Command-line frontend: run scenarios, audit stability, compare runs.

Exit codes: 0 completed, 2 config error, 3 blow-up, 4 iteration failure,
5 I/O failure.
"""

from __future__ import annotations

import argparse
import re
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import analysis, scenarios
from .errors import ConfigError, UnsupportedParametersError
from .field import InvariantPair, abs2, invariants
from .run import RunRecord

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BLOWUP = 3
EXIT_ITERATION = 4
EXIT_IO = 5

_TERMINATION_EXIT = {
    "completed": EXIT_OK,
    "blow-up": EXIT_BLOWUP,
    "iteration-failure": EXIT_ITERATION,
}


@dataclass(frozen=True)
class OutputPlan:
    """Where and how run data is written."""

    directory: Path
    snapshot_cadence: int = 1  # keep every m-th observation as a snapshot
    formats: tuple[str, ...] = ("csv",)
    precision: int = 12

    def __post_init__(self):
        if self.snapshot_cadence < 1:
            raise ValueError("snapshot cadence must be >= 1")
        if not 6 <= self.precision <= 17:
            raise ValueError("precision must be in [6, 17]")
        for fmt in self.formats:
            if fmt != "csv":
                raise ValueError(f"unsupported output format {fmt!r}")


def _fmt(value: float, precision: int) -> str:
    return f"{value:.{precision}g}"


def _write_csv(path: Path, header: list[str], columns: list[np.ndarray], precision: int) -> None:
    rows = len(columns[0])
    with open(path, "w") as handle:
        handle.write(",".join(header) + "\n")
        for i in range(rows):
            handle.write(",".join(_fmt(float(col[i]), precision) for col in columns) + "\n")


def write_run_outputs(
    scenario: scenarios.Scenario,
    record: RunRecord,
    plan: OutputPlan,
    rho_threshold: float = analysis.DEFAULT_RHO_TAU_THRESHOLD,
) -> None:
    """Write scenario.txt, timeseries.csv, snapshots and run_summary.txt."""
    out = plan.directory
    out.mkdir(parents=True, exist_ok=True)
    precision = plan.precision

    (out / "scenario.txt").write_text(scenarios.serialize_scenario(scenario))

    snapshots = record.snapshots[:: plan.snapshot_cadence]
    if record.snapshots and record.snapshots[-1] is not snapshots[-1]:
        snapshots.append(record.snapshots[-1])

    header = ["t", "i_u", "i_v", "max_u", "max_v"]
    columns = [record.times, record.i_u, record.i_v, record.max_u, record.max_v]
    if record.err_l2 is not None:
        header += ["err_l2", "err_max"]
        columns += [record.err_l2, record.err_max]
    if record.iterations is not None:
        # iterations are tracked per step; report the count at each observed step
        iter_col = np.zeros(len(record.times))
        steps_per_obs = scenario.observe_every
        for idx in range(1, len(record.times)):
            step = min(idx * steps_per_obs, len(record.iterations)) - 1
            if 0 <= step < len(record.iterations):
                iter_col[idx] = record.iterations[step]
        header.append("iterations")
        columns.append(iter_col)
    _write_csv(out / "timeseries.csv", header, columns, precision)

    x = scenario.grid.nodes()
    for snap in snapshots:
        path = out / f"snapshot_t{snap.time:.6f}.csv"
        _write_csv(
            path,
            ["x", "re_u", "im_u", "abs_u", "re_v", "im_v", "abs_v"],
            [x, snap.u.real, snap.u.imag, np.abs(snap.u),
             snap.v.real, snap.v.imag, np.abs(snap.v)],
            precision,
        )

    inv0 = record.initial_invariants
    budget = analysis.stability_budget(scenario.phys, scenario.grid, inv0, rho_threshold)
    final = record.final_state()
    numeric = invariants(final) if final.is_finite() else inv0
    oracle = scenarios.oracle_field(scenario)
    if oracle is not None:
        ue, ve = oracle(x, record.times[-1])
        exact = InvariantPair(float(np.sum(abs2(ue))), float(np.sum(abs2(ve))))
    else:
        exact = inv0  # conserved truth when no analytic solution applies
    q_final = analysis.convergence_q(scenario.phys, numeric, exact)

    lines = [
        f"name = {scenario.name or '<unnamed>'}",
        f"scheme = {record.scheme}",
        f"h = {_fmt(scenario.grid.h, precision)}",
        f"tau = {_fmt(scenario.grid.tau, precision)}",
        f"n_time = {scenario.grid.n_time}",
        f"termination = {record.termination.describe()}",
        f"rho = {_fmt(budget.rho, precision)}",
        f"rho_tau = {_fmt(budget.rho_tau, precision)}",
        f"verdict = {budget.verdict}",
        f"q_final = {_fmt(q_final, precision)}",
        f"wall_time_s = {record.wall_time_s:.3f}",
    ]
    (out / "run_summary.txt").write_text("\n".join(lines) + "\n")


def _load_scenario_arg(args) -> scenarios.Scenario:
    if args.preset:
        return scenarios.preset(args.preset)
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    return scenarios.load_scenario(text)


def _apply_overrides(scenario: scenarios.Scenario, args) -> scenarios.Scenario:
    grid = scenario.grid
    tau, steps = args.tau, args.steps
    if tau is not None and steps is None:
        steps = max(1, round(grid.final_time / tau))
    elif steps is not None and tau is None:
        tau = grid.final_time / steps
    if tau is not None:
        if not tau > 0:
            raise ConfigError("--tau must be > 0")
        if steps < 1:
            raise ConfigError("--steps must be >= 1")
        grid = replace(grid, tau=tau, n_time=steps)
        scenario = replace(
            scenario, grid=grid,
            observe_every=max(1, grid.n_time // 200),
        )
    if args.scheme:
        scenario = replace(scenario, scheme=args.scheme)
    return scenario


def _run_one(scenario: scenarios.Scenario, out_dir: Path) -> int:
    record = scenarios.run_scenario(scenario, snapshot_every_obs=1)
    n_obs = len(record.times)
    plan = OutputPlan(out_dir, snapshot_cadence=max(1, (n_obs - 1) // 50 or 1))
    write_run_outputs(scenario, record, plan)
    status = record.termination.status
    if status != "completed":
        print(
            f"{scenario.name or 'run'}: {record.termination.describe()} "
            f"(t = {record.termination.step * scenario.grid.tau:g})",
            file=sys.stderr,
        )
    else:
        print(f"{scenario.name or 'run'}: completed, output in {out_dir}")
    return _TERMINATION_EXIT[status]


def cmd_run(args) -> int:
    try:
        scenario = _load_scenario_arg(args)
        scenario = _apply_overrides(scenario, args)
    except (ConfigError, UnsupportedParametersError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out) if args.out else Path(f"runs/{scenario.name or 'scenario'}")
    try:
        if args.preset == "manakov-stability-sweep" and args.tau is None and args.steps is None:
            # the sweep is a diagnostic suite: blow-ups are expected findings
            for sub in scenarios.stability_sweep():
                sub = replace(sub, scheme=args.scheme or sub.scheme)
                _run_one(sub, out / f"steps_{sub.grid.n_time:07d}")
            return EXIT_OK
        return _run_one(scenario, out)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


def cmd_stability(args) -> int:
    try:
        scenario = _load_scenario_arg(args)
    except (ConfigError, UnsupportedParametersError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    state = scenario.initial_state()
    inv = invariants(state)
    budget = analysis.stability_budget(scenario.phys, scenario.grid, inv, args.threshold)
    bounds = analysis.element_bounds(scenario.phys, scenario.grid, state)
    norm_bound = analysis.matrix_norm_bound(scenario.phys, scenario.grid, inv)
    print(f"rho = {budget.rho:.12g}")
    print(f"rho_tau = {budget.rho_tau:.12g}")
    print(f"threshold = {budget.threshold:.12g}")
    print(f"verdict = {budget.verdict}")
    print(f"recommended_tau = {budget.recommended_tau:.12g}")
    print(f"matrix_norm_bound = {norm_bound:.12g}")
    for name in ("t11", "t12", "t21", "t22", "t33", "t34", "t43", "t44"):
        print(f"bound_{name} = {getattr(bounds, name):.12g}")
    return EXIT_OK


_SNAPSHOT_RE = re.compile(r"snapshot_t(.+)\.csv$")


def load_snapshot(path: Path) -> dict[str, np.ndarray]:
    data = np.genfromtxt(path, delimiter=",", names=True)
    return {name: np.atleast_1d(data[name]) for name in data.dtype.names}


def _snapshot_times(directory: Path) -> dict[str, Path]:
    found = {}
    for path in sorted(directory.glob("snapshot_t*.csv")):
        match = _SNAPSHOT_RE.search(path.name)
        if match:
            found[match.group(1)] = path
    return found


def compare_run_dirs(dir_a: Path, dir_b: Path):
    """Per-time L2 and max differences of |U| and |V| between two runs.

    Returns (times, rows, maxima) where each row holds (l2_u, linf_u,
    l2_v, linf_v) and maxima is the elementwise maximum over times.
    Raises ConfigError when the runs share no snapshot times or grids.
    """
    snaps_a = _snapshot_times(Path(dir_a))
    snaps_b = _snapshot_times(Path(dir_b))
    common = sorted(set(snaps_a) & set(snaps_b), key=float)
    if not common:
        raise ConfigError(
            f"no common snapshot times between {dir_a} and {dir_b}"
        )
    times = []
    rows = []
    for tag in common:
        a = load_snapshot(snaps_a[tag])
        b = load_snapshot(snaps_b[tag])
        if a["x"].shape != b["x"].shape or not np.allclose(a["x"], b["x"], rtol=1e-9, atol=0):
            raise ConfigError(f"snapshot grids differ at t = {tag}")
        h = float(a["x"][1] - a["x"][0]) if len(a["x"]) > 1 else 1.0
        du = a["abs_u"] - b["abs_u"]
        dv = a["abs_v"] - b["abs_v"]
        rows.append((
            h * float(np.sqrt(np.sum(du * du))),
            float(np.max(np.abs(du))),
            h * float(np.sqrt(np.sum(dv * dv))),
            float(np.max(np.abs(dv))),
        ))
        times.append(float(tag))
    maxima = tuple(max(row[i] for row in rows) for i in range(4))
    return times, rows, maxima


def cmd_compare(args) -> int:
    for directory in (args.dir_a, args.dir_b):
        if not Path(directory).is_dir():
            print(f"i/o error: {directory} is not a directory", file=sys.stderr)
            return EXIT_IO
    try:
        times, rows, maxima = compare_run_dirs(Path(args.dir_a), Path(args.dir_b))
    except ConfigError as exc:
        print(f"compare error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for t, (l2u, mxu, l2v, mxv) in zip(times, rows):
        print(f"t={t:.6f} l2_u={l2u:.12g} linf_u={mxu:.12g} "
              f"l2_v={l2v:.12g} linf_v={mxv:.12g}")
    print(f"max_l2_u = {maxima[0]:.12g}")
    print(f"max_linf_u = {maxima[1]:.12g}")
    print(f"max_l2_v = {maxima[2]:.12g}")
    print(f"max_linf_v = {maxima[3]:.12g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cnlse",
        description="Finite-difference solver for coupled nonlinear Schrodinger equations",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a preset or config file")
    source = run.add_mutually_exclusive_group(required=True)
    source.add_argument("--preset", choices=scenarios.PRESET_NAMES)
    source.add_argument("--config", help="path to a scenario document")
    run.add_argument("--scheme", choices=scenarios.SCHEMES)
    run.add_argument("--out", help="output directory (default runs/<name>)")
    run.add_argument("--tau", type=float, help="override time step, keeping final time")
    run.add_argument("--steps", type=int, help="override step count, keeping final time")
    run.set_defaults(func=cmd_run)

    stab = sub.add_parser("stability", help="print the stability budget")
    source = stab.add_mutually_exclusive_group(required=True)
    source.add_argument("--preset", choices=scenarios.PRESET_NAMES)
    source.add_argument("--config")
    stab.add_argument("--threshold", type=float, default=analysis.DEFAULT_RHO_TAU_THRESHOLD)
    stab.set_defaults(func=cmd_stability)

    comp = sub.add_parser("compare", help="diff the snapshots of two runs")
    comp.add_argument("dir_a")
    comp.add_argument("dir_b")
    comp.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
