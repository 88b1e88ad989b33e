"""Initial conditions, experiment presets, and the scenario config format.

A scenario document is flat ``key = value`` text, one pair per line, with
``#`` comments.  Keys are the dotted field names used below (``grid.tau``,
``phys.a``, ``ic_u.kind``, ...).  All six physics coefficients must be
given explicitly; unknown keys are rejected.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from . import analysis
from .errors import ConfigError, UnsupportedParametersError
from .field import FieldState, Grid, Physics, abs2
from .run import RunRecord, evolve
from .schemes import IterationPolicy

IC_KINDS = ("sech", "rectangular", "zero")
ORACLES = ("nls-fundamental", "nls-a2", "manakov")
SCHEMES = ("explicit", "implicit")

# Boundary-adjacent amplitude above this fraction of the peak triggers a
# validation warning: the domain is too narrow for the zero-boundary model.
BOUNDARY_DECAY_LIMIT = 1e-8


@dataclass(frozen=True)
class InitialCondition:
    """One mode's initial waveform.

    ``sech``: amplitude * sech(x + offset) * exp(i velocity x).
    ``rectangular``: amplitude on |x - offset| < width/2 (half amplitude on
    a node landing exactly on the edge), times the same phase factor.
    ``zero``: identically zero.
    """

    kind: str
    amplitude: float = 0.0
    offset: float = 0.0
    velocity: float = 0.0
    width: float | None = None

    def __post_init__(self):
        if self.kind not in IC_KINDS:
            raise ValueError(f"unknown initial-condition kind {self.kind!r}")
        if self.amplitude < 0:
            raise ValueError("amplitude must be >= 0")
        if self.kind == "rectangular":
            if self.width is None or not self.width > 0:
                raise ValueError("rectangular pulse requires width > 0")
        elif self.width is not None:
            raise ValueError("width is only valid for rectangular pulses")


def sample_ic(ic: InitialCondition, grid: Grid) -> np.ndarray:
    """Evaluate an initial condition on the interior nodes."""
    x = grid.nodes()
    if ic.kind == "zero":
        return np.zeros(grid.n_space, dtype=np.complex128)
    phase = np.exp(1j * ic.velocity * x)
    if ic.kind == "sech":
        envelope = ic.amplitude * analysis.sech(x + ic.offset)
    else:
        dist = np.abs(x - ic.offset)
        half = 0.5 * ic.width
        edge = 1e-9 * grid.h
        envelope = np.where(
            dist < half - edge,
            ic.amplitude,
            np.where(dist <= half + edge, 0.5 * ic.amplitude, 0.0),
        )
    return envelope * phase


@dataclass(frozen=True)
class Scenario:
    """Everything needed to run one experiment."""

    grid: Grid
    phys: Physics
    ic_u: InitialCondition
    ic_v: InitialCondition
    scheme: str
    policy: IterationPolicy = field(default_factory=IterationPolicy)
    observe_every: int = 1
    oracle: str | None = None
    name: str = ""

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.observe_every < 1:
            raise ValueError("observe_every must be >= 1")
        if self.oracle is not None and self.oracle not in ORACLES:
            raise ValueError(f"unknown oracle {self.oracle!r}")

    def initial_state(self) -> FieldState:
        return FieldState(
            sample_ic(self.ic_u, self.grid),
            sample_ic(self.ic_v, self.grid),
            0.0,
        )


def oracle_field(scenario: Scenario):
    """Resolve the scenario's oracle to a callable (x, t) -> (U, V) pair.

    Raises UnsupportedParametersError when the scenario's coefficients or
    initial conditions do not admit the requested analytic solution.
    """
    name = scenario.oracle
    if name is None:
        return None
    phys = scenario.phys
    ic_u, ic_v = scenario.ic_u, scenario.ic_v

    if name in ("nls-fundamental", "nls-a2"):
        amp = 1.0 if name == "nls-fundamental" else 2.0
        if ic_v.kind != "zero":
            raise UnsupportedParametersError(f"{name} oracle requires a zero V mode")
        if (ic_u.kind, ic_u.offset, ic_u.velocity) != ("sech", 0.0, 0.0) \
                or ic_u.amplitude != amp:
            raise UnsupportedParametersError(
                f"{name} oracle requires ic_u = {amp:g} * sech(x)"
            )
        if phys.sigma != 0 or phys.k != 0.5 or phys.a != 1.0:
            raise UnsupportedParametersError(
                f"{name} oracle requires sigma = 0, k = 0.5, a = 1"
            )
        scalar = (
            analysis.nls_fundamental_soliton
            if name == "nls-fundamental"
            else analysis.nls_breather_a2
        )

        def pair(x, t):
            return scalar(x, t), np.zeros(np.shape(x), dtype=np.complex128)

        return pair

    # Stationary vector soliton: both modes identical resting sech pulses.
    for which, ic in (("ic_u", ic_u), ("ic_v", ic_v)):
        if (ic.kind, ic.offset, ic.velocity) != ("sech", 0.0, 0.0):
            raise UnsupportedParametersError(
                f"manakov oracle requires {which} to be a resting sech pulse"
            )
    if ic_u.amplitude != ic_v.amplitude:
        raise UnsupportedParametersError(
            "manakov oracle requires equal amplitudes in both modes"
        )
    amp = ic_u.amplitude
    analysis.manakov_soliton(np.zeros(1), 0.0, amp, phys)  # parameter check

    def pair(x, t):
        return analysis.manakov_soliton(x, t, amp, phys)

    return pair


def validate_scenario(scenario: Scenario) -> None:
    """Check oracle admissibility and the boundary-decay rule.

    Type invariants are enforced by the dataclasses themselves; this adds
    the cross-field checks.  A pulse whose boundary-adjacent amplitude
    exceeds 1e-8 of the peak draws a warning: the zero-boundary model then
    visibly truncates it.
    """
    oracle_field(scenario)
    state = scenario.initial_state()
    peak = math.sqrt(max(
        float(np.max(abs2(state.u))),
        float(np.max(abs2(state.v))),
    ))
    if peak > 0:
        edge = max(
            abs(state.u[0]), abs(state.u[-1]),
            abs(state.v[0]), abs(state.v[-1]),
        )
        if edge > BOUNDARY_DECAY_LIMIT * peak:
            warnings.warn(
                f"scenario {scenario.name or '<unnamed>'}: boundary-adjacent "
                f"amplitude {edge:.2e} exceeds {BOUNDARY_DECAY_LIMIT:g} of the "
                f"peak {peak:.2e}; widen the domain",
                stacklevel=2,
            )


def run_scenario(
    scenario: Scenario,
    tau: float | None = None,
    n_time: int | None = None,
    scheme: str | None = None,
    snapshot_every_obs: int | None = None,
    drift_limit: float | None = 0.1,
) -> RunRecord:
    """Evolve a scenario, optionally overriding time step, step count or scheme.

    ``tau`` alone rescales the step count to keep the final time; ``n_time``
    alone rescales the step size the same way.  The observation cadence is
    rescaled along with the step size so observation *times* stay put.
    """
    grid = scenario.grid
    if tau is not None and n_time is None:
        n_time = max(1, round(grid.final_time / tau))
        grid = replace(grid, tau=tau, n_time=n_time)
    elif n_time is not None and tau is None:
        grid = replace(grid, tau=grid.final_time / n_time, n_time=n_time)
    elif tau is not None and n_time is not None:
        grid = replace(grid, tau=tau, n_time=n_time)
    observe_every = scenario.observe_every
    if grid.n_time != scenario.grid.n_time:
        per_run = max(1, scenario.grid.n_time // scenario.observe_every)
        observe_every = max(1, grid.n_time // per_run)
    scenario = replace(scenario, grid=grid, scheme=scheme or scenario.scheme,
                       observe_every=observe_every)
    return evolve(
        scenario.initial_state(),
        scenario.phys,
        scenario.grid,
        scheme=scenario.scheme,
        policy=scenario.policy,
        observe_every=scenario.observe_every,
        snapshot_every_obs=snapshot_every_obs,
        oracle=oracle_field(scenario),
        drift_limit=drift_limit,
    )


# ---------------------------------------------------------------------------
# Presets


def _preset_nls_a1() -> Scenario:
    return Scenario(
        grid=Grid(-50.0, 50.0, 999, 0.005, 3000),
        phys=Physics(sigma=0.0, k=0.5, a=1.0, b=0.0, c=0.0, d=0.0),
        ic_u=InitialCondition("sech", amplitude=1.0),
        ic_v=InitialCondition("zero"),
        scheme="implicit",
        observe_every=20,
        oracle="nls-fundamental",
        name="nls-a1",
    )


def _preset_nls_a2() -> Scenario:
    return Scenario(
        grid=Grid(-20.0, 20.0, 1142, 0.00125, 3200),
        phys=Physics(sigma=0.0, k=0.5, a=1.0, b=0.0, c=0.0, d=0.0),
        ic_u=InitialCondition("sech", amplitude=2.0),
        ic_v=InitialCondition("zero"),
        scheme="implicit",
        observe_every=20,
        oracle="nls-a2",
        name="nls-a2",
    )


def _preset_manakov(n_time: int, name: str) -> Scenario:
    # k = 1 makes the unit-amplitude vector soliton exact: A^2 (a + b) = 2k.
    return Scenario(
        grid=Grid(-50.0, 50.0, 999, 15.0 / n_time, n_time),
        phys=Physics(sigma=0.0, k=1.0, a=1.0, b=1.0, c=1.0, d=1.0),
        ic_u=InitialCondition("sech", amplitude=1.0),
        ic_v=InitialCondition("sech", amplitude=1.0),
        scheme="explicit",
        observe_every=max(1, n_time // 200),
        oracle="manakov",
        name=name,
    )


def _preset_collision() -> Scenario:
    # One unit soliton per mode, launched toward each other; k = 0.5 makes
    # each an exact scalar soliton while the modes stay apart.
    return Scenario(
        grid=Grid(-30.0, 30.0, 599, 0.01, 2000),
        phys=Physics(sigma=0.0, k=0.5, a=1.0, b=1.0, c=1.0, d=1.0),
        ic_u=InitialCondition("sech", amplitude=1.0, offset=10.0, velocity=1.0),
        ic_v=InitialCondition("sech", amplitude=1.0, offset=-10.0, velocity=-1.0),
        scheme="implicit",
        observe_every=10,
        name="collision",
    )


def _preset_group_velocity(v1: float, name: str) -> Scenario:
    return Scenario(
        grid=Grid(-30.0, 30.0, 299, 0.02, 2000),
        phys=Physics(sigma=0.0, k=0.5, a=1.0, b=1.0 / 3.0, c=1.0, d=1.0 / 3.0),
        ic_u=InitialCondition("sech", amplitude=1.2, velocity=v1),
        ic_v=InitialCondition("sech", amplitude=1.4),
        scheme="implicit",
        observe_every=10,
        name=name,
    )


def _preset_explicit_vs_implicit() -> Scenario:
    # Implicit branch of the paired comparison; the explicit partner is the
    # same scenario run with scheme="explicit" and 1_000_000 steps.
    return Scenario(
        grid=Grid(-30.0, 30.0, 299, 0.02, 2000),
        phys=Physics(sigma=0.3, k=0.5, a=1.0, b=0.2, c=1.0, d=1.6),
        ic_u=InitialCondition("sech", amplitude=1.5),
        ic_v=InitialCondition("sech", amplitude=1.5),
        scheme="implicit",
        observe_every=10,
        name="explicit-vs-implicit",
    )


def _preset_rectangular_decay() -> Scenario:
    return Scenario(
        grid=Grid(-30.0, 30.0, 299, 2e-4, 20000),
        phys=Physics(sigma=0.0, k=0.5, a=1.0, b=0.0, c=0.0, d=0.0),
        ic_u=InitialCondition("rectangular", amplitude=1.0, width=2.0),
        ic_v=InitialCondition("zero"),
        scheme="explicit",
        observe_every=100,
        name="rectangular-decay",
    )


_PRESET_BUILDERS = {
    "nls-a1": _preset_nls_a1,
    "nls-a2": _preset_nls_a2,
    "manakov": lambda: _preset_manakov(1_000_000, "manakov"),
    # Base point of the time-step sweep; stability_sweep() yields all six.
    "manakov-stability-sweep": lambda: _preset_manakov(10_000, "manakov-stability-sweep"),
    "collision": _preset_collision,
    "group-velocity-a": lambda: _preset_group_velocity(0.7, "group-velocity-a"),
    "group-velocity-b": lambda: _preset_group_velocity(0.95, "group-velocity-b"),
    "explicit-vs-implicit": _preset_explicit_vs_implicit,
    "rectangular-decay": _preset_rectangular_decay,
}

PRESET_NAMES = tuple(_PRESET_BUILDERS)

SWEEP_STEP_RANGE = (10_000, 1_000_000)
SWEEP_POINTS = 6


def preset(name: str) -> Scenario:
    """Build a named experiment preset."""
    try:
        builder = _PRESET_BUILDERS[name]
    except KeyError:
        raise ConfigError(
            f"unknown preset {name!r}; valid presets: {', '.join(PRESET_NAMES)}"
        ) from None
    return builder()


def stability_sweep(n_points: int = SWEEP_POINTS) -> list[Scenario]:
    """The explicit-scheme sweep: log-spaced step counts from 1e4 to 1e6."""
    lo, hi = SWEEP_STEP_RANGE
    counts = np.logspace(math.log10(lo), math.log10(hi), n_points)
    scenarios = []
    for count in counts:
        n_time = int(round(count))
        scenarios.append(_preset_manakov(n_time, f"manakov-sweep-{n_time}"))
    return scenarios


# ---------------------------------------------------------------------------
# Config documents


def _format_value(value) -> str:
    if isinstance(value, bool):
        raise TypeError("no boolean config values")
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_scenario(scenario: Scenario) -> str:
    """Render a scenario as a config document that parses back equal."""
    lines = [f"# scenario: {scenario.name or '<unnamed>'}"]
    if scenario.name:
        lines.append(f"name = {scenario.name}")
    g = scenario.grid
    lines += [
        "",
        "# grid: n_space interior nodes; h is derived as (x_max - x_min) / (n_space + 1)",
        f"grid.x_min = {_format_value(g.x_min)}",
        f"grid.x_max = {_format_value(g.x_max)}",
        f"grid.n_space = {g.n_space}",
        f"grid.tau = {_format_value(g.tau)}",
        f"grid.n_time = {g.n_time}",
        "",
        "# physics: all six coefficients are required",
    ]
    p = scenario.phys
    lines += [
        f"phys.sigma = {_format_value(p.sigma)}",
        f"phys.k = {_format_value(p.k)}",
        f"phys.a = {_format_value(p.a)}",
        f"phys.b = {_format_value(p.b)}",
        f"phys.c = {_format_value(p.c)}",
        f"phys.d = {_format_value(p.d)}",
    ]
    for label, ic in (("ic_u", scenario.ic_u), ("ic_v", scenario.ic_v)):
        lines += ["", f"{label}.kind = {ic.kind}"]
        if ic.kind != "zero":
            lines.append(f"{label}.amplitude = {_format_value(ic.amplitude)}")
            lines.append(f"{label}.offset = {_format_value(ic.offset)}")
            lines.append(f"{label}.velocity = {_format_value(ic.velocity)}")
        if ic.kind == "rectangular":
            lines.append(f"{label}.width = {_format_value(ic.width)}")
    pol = scenario.policy
    lines += [
        "",
        f"scheme = {scenario.scheme}",
        f"observe_every = {scenario.observe_every}",
        f"policy.tol = {_format_value(pol.tol)}",
        f"policy.max_iters = {pol.max_iters}",
        f"policy.divergence_factor = {_format_value(pol.divergence_factor)}",
        f"oracle = {scenario.oracle or 'none'}",
        "",
    ]
    return "\n".join(lines)


_KNOWN_KEYS = {
    "name",
    "grid.x_min", "grid.x_max", "grid.n_space", "grid.h", "grid.tau", "grid.n_time",
    "phys.sigma", "phys.k", "phys.a", "phys.b", "phys.c", "phys.d",
    "ic_u.kind", "ic_u.amplitude", "ic_u.offset", "ic_u.velocity", "ic_u.width",
    "ic_v.kind", "ic_v.amplitude", "ic_v.offset", "ic_v.velocity", "ic_v.width",
    "scheme", "observe_every",
    "policy.tol", "policy.max_iters", "policy.divergence_factor",
    "oracle",
}

_REQUIRED_KEYS = (
    "grid.x_min", "grid.x_max", "grid.tau", "grid.n_time",
    "phys.sigma", "phys.k", "phys.a", "phys.b", "phys.c", "phys.d",
    "ic_u.kind", "ic_v.kind", "scheme",
)


def _parse_pairs(document: str) -> dict[str, tuple[str, int]]:
    pairs: dict[str, tuple[str, int]] = {}
    for line_no, raw in enumerate(document.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", line=line_no)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"unknown key {key!r}", line=line_no)
        if key in pairs:
            raise ConfigError(f"duplicate key {key!r}", line=line_no)
        if not value:
            raise ConfigError(f"empty value for {key!r}", line=line_no)
        pairs[key] = (value, line_no)
    return pairs


class _Reader:
    def __init__(self, pairs):
        self.pairs = pairs

    def has(self, key):
        return key in self.pairs

    def raw(self, key, default=None):
        if key in self.pairs:
            return self.pairs[key][0]
        return default

    def _convert(self, key, converter, kind):
        value, line_no = self.pairs[key]
        try:
            return converter(value)
        except ValueError:
            raise ConfigError(f"{key} must be {kind}, got {value!r}", line=line_no) from None

    def real(self, key, default=None):
        if key not in self.pairs:
            return default
        return self._convert(key, float, "a real number")

    def integer(self, key, default=None):
        if key not in self.pairs:
            return default
        return self._convert(key, int, "an integer")


def load_scenario(document: str) -> Scenario:
    """Parse and validate a scenario document.

    Parse problems raise ConfigError with the offending line number;
    invariant violations raise ConfigError naming the violated rule (an
    inadmissible oracle propagates as UnsupportedParametersError).
    """
    pairs = _parse_pairs(document)
    for key in _REQUIRED_KEYS:
        if key not in pairs:
            raise ConfigError(f"missing required key {key!r}")
    reader = _Reader(pairs)

    x_min = reader.real("grid.x_min")
    x_max = reader.real("grid.x_max")
    if not x_max > x_min:
        raise ConfigError("grid requires x_max > x_min")
    h = reader.real("grid.h")
    n_space = reader.integer("grid.n_space")
    if h is None and n_space is None:
        raise ConfigError("one of grid.n_space or grid.h is required")
    if h is not None:
        if not h > 0:
            raise ConfigError("grid.h must be > 0")
        derived = int(round((x_max - x_min) / h)) - 1
        if n_space is None:
            n_space = derived
        elif n_space != derived:
            raise ConfigError(
                f"grid.h = {h!r} implies n_space = {derived}, got {n_space}"
            )
    tau = reader.real("grid.tau")
    n_time = reader.integer("grid.n_time")

    def build(cls, kwargs, what):
        try:
            return cls(**kwargs)
        except ValueError as exc:
            raise ConfigError(f"{what}: {exc}") from None

    grid = build(Grid, dict(x_min=x_min, x_max=x_max, n_space=n_space,
                            tau=tau, n_time=n_time), "grid")
    phys = build(Physics, {k: reader.real(f"phys.{k}") for k in
                           ("sigma", "k", "a", "b", "c", "d")}, "physics")

    def read_ic(label):
        kind = reader.raw(f"{label}.kind")
        kwargs = dict(kind=kind)
        if reader.has(f"{label}.amplitude"):
            kwargs["amplitude"] = reader.real(f"{label}.amplitude")
        if reader.has(f"{label}.offset"):
            kwargs["offset"] = reader.real(f"{label}.offset")
        if reader.has(f"{label}.velocity"):
            kwargs["velocity"] = reader.real(f"{label}.velocity")
        if reader.has(f"{label}.width"):
            kwargs["width"] = reader.real(f"{label}.width")
        if kind in ("sech", "rectangular") and "amplitude" not in kwargs:
            raise ConfigError(f"{label}.amplitude is required for kind {kind!r}")
        return build(InitialCondition, kwargs, label)

    ic_u = read_ic("ic_u")
    ic_v = read_ic("ic_v")

    policy = build(IterationPolicy, dict(
        tol=reader.real("policy.tol", 1e-12),
        max_iters=reader.integer("policy.max_iters", 25),
        divergence_factor=reader.real("policy.divergence_factor", 10.0),
    ), "policy")

    oracle = reader.raw("oracle", "none")
    if oracle == "none":
        oracle = None
    scenario = build(Scenario, dict(
        grid=grid,
        phys=phys,
        ic_u=ic_u,
        ic_v=ic_v,
        scheme=reader.raw("scheme"),
        policy=policy,
        observe_every=reader.integer("observe_every", max(1, n_time // 200)),
        oracle=oracle,
        name=reader.raw("name", ""),
    ), "scenario")
    validate_scenario(scenario)
    return scenario
