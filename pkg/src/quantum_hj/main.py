"""
Quantum trajectory command line - Main Module.

Configures a physical setup and a microstate, runs trajectory tables, cycle
averages, hbar sweeps and residual audits, and writes CSV or JSON. Tables go
to --out (or stdout), diagnostics to stderr.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

import argparse
import math
import re
import sys
import time
from dataclasses import asdict, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from src.quantum_hj.analysis.climit import (
    EtaFamily,
    Observable,
    SweepRecord,
    average_principal_function,
    average_time,
    cycle_average,
    eta_family_sweep,
    fit_exponential_rate,
    fit_power_law,
    free_cycle_reference,
    geometric_grid,
    hbar_sweep,
    potential_gap,
    turning_width_sweep,
)
from src.quantum_hj.numerics.microstate import (
    Microstate,
    PhysicalSetup,
    coefficients_from_initials,
    indeterminacy_signature,
    initials_from_coefficients,
    validate,
)
from src.quantum_hj.numerics.potentials import (
    FreeParticle,
    LinearPotential,
    PotentialModel,
    StepBarrier,
    classical_momentum,
    turning_point,
    wavenumber,
)
from src.quantum_hj.numerics.trajectory import (
    ReducedActionConvention,
    TrajectoryPoint,
    qshje_residual,
    reduced_action,
    trajectory_table,
)
from src.quantum_hj.utils.errors import ConfigError, DomainError, NumericError, QuantumHJError
from src.quantum_hj.utils.logging import get_logger, setup_logging
from src.quantum_hj.utils.output import (
    build_document,
    open_output,
    summary_path,
    write_csv,
    write_json,
)
from src.quantum_hj.utils.settings import config

logger = get_logger()

TRAJECTORY_COLUMNS = ("x", "W", "Wx", "Wxx", "Wxxx", "quantum_term", "t_minus_t0", "S", "residual")
SWEEP_COLUMNS = ("hbar", "x", "observable", "value", "envelope_min", "envelope_max")
AVERAGE_COLUMNS = ("quantity", "value", "reference", "delta")
AUDIT_COLUMNS = ("potential", "sample", "a", "b", "c", "max_abs_residual", "tolerance", "passed")

POTENTIALS = ("free", "step", "linear")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")
RESIDUAL_TOLERANCE = 1e-7
AUDIT_GRID_POINTS = 50


class GridSpec(BaseModel):
    """start:stop:points grid, linear or geometric."""

    model_config = ConfigDict(frozen=True)

    start: float
    stop: float
    points: int = Field(ge=1)
    geometric: bool = False

    @model_validator(mode="after")
    def _check_endpoints(self) -> "GridSpec":
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ValueError("grid endpoints must be finite")
        if self.geometric and not (self.start > 0.0 and self.stop > 0.0):
            raise ValueError("geometric grid endpoints must be positive")
        return self

    def values(self) -> List[float]:
        if self.geometric:
            return [float(v) for v in geometric_grid(self.start, self.stop, self.points)]
        return [float(v) for v in np.linspace(self.start, self.stop, self.points)]


class RunConfig(BaseModel):
    """
    Fully resolved configuration of one command-line run.

    Physical defaults are already substituted from the settings, so the
    model dump embedded in every summary reproduces the run.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    command: Literal["trajectory", "sweep", "average", "residual-audit"]
    potential: Optional[Literal["free", "step", "linear"]] = None
    m: float = Field(gt=0.0)
    E: float
    hbar: float = Field(gt=0.0)
    U: float
    f: float
    hbar_grid: Optional[GridSpec] = None
    abc: Optional[Tuple[float, float, float]] = None
    initials: Optional[Tuple[float, float, float]] = None
    x: Optional[float] = None
    x_grid: Optional[GridSpec] = None
    observable: Observable = Observable.WX
    output_format: Literal["csv", "json"] = "csv"
    out: Optional[Path] = None
    convention: ReducedActionConvention = ReducedActionConvention.UNWRAPPED
    sweep: Literal["hbar", "turning-width", "eta"] = "hbar"
    eta: Optional[str] = None
    epsilon: float = Field(default=0.05, gt=0.0)
    seed: int = 0
    samples: int = Field(default=200, ge=1)
    log_level: str = "INFO"

    @model_validator(mode="after")
    def _check_command(self) -> "RunConfig":
        if self.abc is not None and self.initials is not None:
            raise ValueError("supply exactly one of --abc and --initials, not both")
        needs_microstate = self.command in ("trajectory", "average") or (
            self.command == "sweep" and self.sweep != "eta"
        )
        if needs_microstate and self.abc is None and self.initials is None:
            raise ValueError(f"{self.command} needs a microstate: supply --abc or --initials")
        if self.command == "trajectory" and self.x is None and self.x_grid is None:
            raise ValueError("trajectory needs --x or --x-grid")
        if self.command == "average" and self.x is None:
            raise ValueError("average needs --x")
        if self.command == "sweep":
            if self.hbar_grid is None:
                raise ValueError("sweep needs --hbar-grid")
            if self.sweep != "turning-width" and self.x is None:
                raise ValueError(f"{self.sweep} sweep needs --x")
            if self.sweep == "eta" and not self.eta:
                raise ValueError("eta sweep needs --eta")
            if self.sweep == "turning-width" and self.potential != "linear":
                raise ValueError("turning-width sweep needs --potential linear")
        return self


_UNSIGNED = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_ETA_PATTERN = re.compile(
    rf"^(?:(?P<c0>[+-]?{_UNSIGNED})\s*\*\s*)?hbar"
    rf"(?:\s*\^\s*(?P<p>[+-]?{_UNSIGNED}))?"
    rf"(?:\s*(?P<sign>[+-])\s*(?P<c1>{_UNSIGNED}))?$"
)


def parse_eta(expression: str) -> EtaFamily:
    """
    Parse the restricted eta grammar: [c0*]hbar[^p] [+|- c1], or a constant c1.

    Returns:
        EtaFamily labelled with the expression.

        # "hbar" -> eta(hbar) = hbar;  "2*hbar^0.5 + 1" -> 2 hbar^(1/2) + 1;  "1.25" -> 1.25

    Raises:
        ConfigError: If the expression does not match the grammar.
    """
    text = expression.strip()
    if re.fullmatch(rf"[+-]?{_UNSIGNED}", text):
        constant = float(text)
        return EtaFamily(eta_of_hbar=lambda hbar: constant, label=text)
    match = _ETA_PATTERN.match(text)
    if match is None:
        raise ConfigError(f"Cannot parse eta expression {expression!r}; expected [c0*]hbar[^p] [+|- c1] or c1")
    c0 = float(match.group("c0") or 1.0)
    power = float(match.group("p") or 1.0)
    c1 = float(match.group("c1") or 0.0)
    if match.group("sign") == "-":
        c1 = -c1
    return EtaFamily(eta_of_hbar=lambda hbar: c0 * hbar**power + c1, label=text)


def _parse_triplet(text: Optional[str], flag: str) -> Optional[Tuple[float, float, float]]:
    if text is None:
        return None
    parts = text.split(",")
    if len(parts) != 3:
        raise ConfigError(f"{flag} expects three comma-separated numbers, got {text!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as e:
        raise ConfigError(f"{flag} expects numbers, got {text!r}") from e


def _parse_grid(text: Optional[str], flag: str, geometric: bool) -> Optional[Dict[str, Any]]:
    """
    start:stop[:points[:geom|lin]]; a geometric grid without points gets
    points_per_decade per decade.
    """
    if text is None:
        return None
    parts = text.split(":")
    if not 2 <= len(parts) <= 4:
        raise ConfigError(f"{flag} expects start:stop[:points[:geom|lin]], got {text!r}")
    if len(parts) == 4:
        if parts[3] not in ("geom", "lin"):
            raise ConfigError(f"{flag} spacing must be 'geom' or 'lin', got {parts[3]!r}")
        geometric = parts[3] == "geom"
    try:
        start, stop = float(parts[0]), float(parts[1])
        if len(parts) >= 3:
            points = int(parts[2])
        elif geometric and start > 0.0 and stop > 0.0:
            decades = abs(math.log10(stop / start))
            points = int(round(config.sweep.points_per_decade * decades)) + 1
        else:
            raise ConfigError(f"{flag} needs a point count for a linear grid, got {text!r}")
    except ValueError as e:
        raise ConfigError(f"{flag} expects numbers, got {text!r}") from e
    return {"start": start, "stop": stop, "points": points, "geometric": geometric}


def build_run_config(args: argparse.Namespace) -> RunConfig:
    """
    Merge parsed flags over the loaded settings into a validated RunConfig.

    Precedence is built-in defaults < config file < flags. The microstate
    (--abc / --initials) and the position (--x / --x-grid) are replaced as
    a pair: any flag of the pair discards both file values.

    Raises:
        ConfigError: If any value is malformed or the combination is invalid.
    """
    physics = config.physics
    from_file = dict(config.run)

    def pick(value: Optional[Any], default: Any) -> Any:
        return default if value is None else value

    if args.abc is not None or args.initials is not None:
        from_file.pop("abc", None)
        from_file.pop("initials", None)
    if args.x is not None or args.x_grid is not None:
        from_file.pop("x", None)
        from_file.pop("x_grid", None)

    def layered(flag: str, key: str) -> Optional[Any]:
        return pick(getattr(args, flag), from_file.get(key))

    potential = layered("potential", "potential")
    if potential is None and args.command != "residual-audit":
        potential = "free"
    fields = {
        "command": args.command,
        "potential": potential,
        "m": pick(args.m, physics.m),
        "E": pick(args.E, physics.E),
        "hbar": pick(args.hbar, physics.hbar),
        "U": pick(args.U, physics.U),
        "f": pick(args.f, physics.f),
        "hbar_grid": _parse_grid(layered("hbar_grid", "hbar_grid"), "--hbar-grid", geometric=True),
        "abc": _parse_triplet(layered("abc", "abc"), "--abc"),
        "initials": _parse_triplet(layered("initials", "initials"), "--initials"),
        "x": layered("x", "x"),
        "x_grid": _parse_grid(layered("x_grid", "x_grid"), "--x-grid", geometric=False),
        "observable": layered("observable", "observable"),
        "output_format": layered("format", "format"),
        "out": layered("out", "out"),
        "convention": layered("convention", "convention"),
        "sweep": layered("sweep", "sweep"),
        "eta": layered("eta", "eta"),
        "epsilon": layered("epsilon", "epsilon"),
        "seed": layered("seed", "seed"),
        "samples": layered("samples", "samples"),
        "log_level": config.log_level,
    }
    # Unset optional fields take the model defaults
    fields = {key: value for key, value in fields.items() if value is not None}
    try:
        return RunConfig(**fields)
    except ValidationError as e:
        details = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}" for err in e.errors()
        )
        raise ConfigError(f"Invalid run configuration: {details}") from e


def build_potential(name: str, run: RunConfig) -> PotentialModel:
    """Potential model for a name, with U and f from the run."""
    if name == "step":
        return StepBarrier(U=run.U)
    if name == "linear":
        return LinearPotential(f=run.f)
    return FreeParticle()


def build_setup(run: RunConfig, name: Optional[str] = None) -> PhysicalSetup:
    return PhysicalSetup(m=run.m, E=run.E, hbar=run.hbar, potential=build_potential(name or run.potential, run))


def resolve_microstate(run: RunConfig, setup: PhysicalSetup) -> Microstate:
    """
    Microstate from --abc, or converted once from --initials at the run's hbar.

    Raises:
        NonPositiveDefinite: If --abc is not positive definite.
        NoRealSolution: If --initials admit no positive-definite microstate.
    """
    if run.abc is not None:
        return validate(Microstate(*run.abc))
    x0, wx0, wxx0 = run.initials
    ms = coefficients_from_initials(setup, x0, wx0, wxx0)
    logger.info("Microstate resolved from initial values", x0=x0, a=ms.a, b=ms.b, c=ms.c)
    return ms


def settings_snapshot() -> Dict[str, Any]:
    """Every numerical setting in effect, for provenance."""
    return {
        "log_level": config.log_level,
        "specfun": asdict(config.specfun),
        "quadrature": asdict(config.quadrature),
        "sweep": asdict(config.sweep),
        "oracle": asdict(config.oracle),
        "physics": asdict(config.physics),
    }


def microstate_summary(ms: Microstate) -> Dict[str, Any]:
    signature = indeterminacy_signature(ms)
    return {
        "a": ms.a,
        "b": ms.b,
        "c": ms.c,
        "normalization": ms.normalization,
        "amplitude_sq": signature.amplitude_sq,
        "phase": signature.phase,
    }


def emit(
    run: RunConfig,
    columns: Sequence[str],
    rows: List[Dict[str, Any]],
    summary: Dict[str, Any],
) -> None:
    """
    Write the table and its summary.

    JSON embeds the rows in one document. CSV writes the table to --out (or
    stdout) and the summary to <out>.summary.json when --out is given.
    """
    run_config = run.model_dump(mode="json")
    settings = settings_snapshot()
    if run.output_format == "json":
        with open_output(run.out) as stream:
            write_json(stream, build_document(run.command, run_config, settings, summary, columns, rows))
        return
    with open_output(run.out) as stream:
        write_csv(stream, columns, rows)
    if run.out is not None:
        with open_output(summary_path(run.out)) as stream:
            write_json(stream, build_document(run.command, run_config, settings, summary))


def energy_scale(setup: PhysicalSetup, xs: Sequence[float]) -> float:
    """max(|E|, |E - V(x)|) over the grid, the scale of residual tolerances."""
    return max([abs(setup.E)] + [potential_gap(setup, x) for x in xs])


def _stitched_step_table(
    setup: PhysicalSetup,
    ms: Microstate,
    grid: Sequence[float],
    convention: ReducedActionConvention,
) -> List[TrajectoryPoint]:
    """
    Step barrier over a grid reaching x < 0.

    The allowed side is a free particle whose microstate matches W_x and
    W_xx at the wall; W is shifted so it is continuous there.
    """
    inside = [x for x in grid if x >= 0.0]
    outside = [x for x in grid if x < 0.0]
    points: List[TrajectoryPoint] = []
    if outside:
        try:
            free_setup = replace(setup, potential=FreeParticle())
            wx0, wxx0 = initials_from_coefficients(setup, ms, 0.0)
            free_ms = coefficients_from_initials(free_setup, 0.0, wx0, wxx0)
            offset = reduced_action(setup, ms, 0.0, convention) - reduced_action(
                free_setup, free_ms, 0.0, convention
            )
            logger.debug("Allowed side matched at the wall", a=free_ms.a, b=free_ms.b, c=free_ms.c)
            for point in trajectory_table(free_setup, free_ms, outside, convention):
                if point.error is None:
                    point = replace(point, W=point.W + offset, S=point.S + offset)
                points.append(point)
        except QuantumHJError as e:
            logger.warning("Allowed side of the step could not be matched", error=str(e))
            points.extend(TrajectoryPoint.failed(x, str(e)) for x in outside)
    if inside:
        points.extend(trajectory_table(setup, ms, inside, convention))
    return points


def cmd_trajectory(run: RunConfig) -> int:
    """
    Closed-form trajectory table over --x-grid (or the single --x).

    Returns:
        0, or 3 when every grid point failed.
    """
    setup = build_setup(run)
    ms = resolve_microstate(run, setup)
    grid = run.x_grid.values() if run.x_grid is not None else [run.x]
    if isinstance(setup.potential, StepBarrier) and min(grid) < 0.0:
        if any(b < a for a, b in zip(grid, grid[1:])):
            raise DomainError("x grid must be sorted in increasing order")
        points = _stitched_step_table(setup, ms, grid, run.convention)
    else:
        points = trajectory_table(setup, ms, grid, run.convention)

    rows = [{column: getattr(p, column) for column in TRAJECTORY_COLUMNS} for p in points]
    good = [p for p in points if p.error is None]
    max_residual = max((abs(p.residual) for p in good), default=math.nan)
    tolerance = RESIDUAL_TOLERANCE * energy_scale(setup, [p.x for p in good] or grid)
    summary = {
        "potential": setup.potential.name,
        "microstate": microstate_summary(ms),
        "points": len(points),
        "failures": [{"x": p.x, "error": p.error} for p in points if p.error is not None],
        "footer": {
            "max_abs_residual": max_residual,
            "tolerance": tolerance,
            "passed": bool(good) and max_residual < tolerance,
        },
    }
    emit(run, TRAJECTORY_COLUMNS, rows, summary)
    logger.info(
        "Trajectory table written",
        potential=setup.potential.name,
        points=len(points),
        max_residual=max_residual,
    )
    if not good:
        raise NumericError(f"Every trajectory point failed: {points[0].error}")
    return 0


def _sweep_rows(records: Sequence[SweepRecord]) -> List[Dict[str, Any]]:
    return [
        {
            "hbar": r.hbar,
            "x": r.x,
            "observable": r.observable_name,
            "value": r.value,
            "envelope_min": r.envelope_min,
            "envelope_max": r.envelope_max,
        }
        for r in records
    ]


def _fit_dict(fit) -> Optional[Dict[str, Any]]:
    return None if fit is None else asdict(fit)


def cmd_sweep(run: RunConfig) -> int:
    """
    hbar sweep of an observable, turning-region widths or an eta family.

    Fits: log_Wx gets the decay rate d(log W_x)/d(1/hbar), turning-width the
    log-log slope of the width, eta the log-log slope of the envelope width.

    Returns:
        0, or 3 when every grid point failed.
    """
    setup = build_setup(run)
    hbars = run.hbar_grid.values()
    summary: Dict[str, Any] = {"potential": setup.potential.name, "sweep": run.sweep}

    if run.sweep == "turning-width":
        ms = resolve_microstate(run, setup)
        result = turning_width_sweep(setup, ms, hbars, run.epsilon)
        records = result.records
        summary.update(
            microstate=microstate_summary(ms),
            epsilon=run.epsilon,
            fit_model="power_law",
            fit=_fit_dict(result.fit),
        )
    elif run.sweep == "eta":
        family = parse_eta(run.eta)
        records = eta_family_sweep(setup, family, hbars, run.x)
        good = [r for r in records if r.error is None and r.envelope_max > r.envelope_min]
        fit = None
        if len(good) >= 2:
            fit = fit_power_law([r.hbar for r in good], [r.envelope_max - r.envelope_min for r in good])
        summary.update(
            eta=family.label,
            base_phase=family.base_phase,
            classical_momentum=classical_momentum(setup, run.x),
            fit_model="power_law_envelope_width",
            fit=_fit_dict(fit),
        )
    else:
        ms = resolve_microstate(run, setup)
        records = hbar_sweep(setup, ms, run.x, hbars, run.observable, run.convention)
        fit = None
        good = [r for r in records if r.error is None]
        if run.observable is Observable.LOG_WX and len(good) >= 2:
            fit = fit_exponential_rate([r.hbar for r in good], [r.value for r in good])
        summary.update(
            microstate=microstate_summary(ms),
            observable=run.observable.value,
            fit_model="exponential_rate" if fit is not None else None,
            fit=_fit_dict(fit),
        )

    good = [r for r in records if r.error is None]
    summary["points"] = len(records)
    summary["failures"] = [{"hbar": r.hbar, "error": r.error} for r in records if r.error is not None]
    summary["final"] = None if not good else {"hbar": good[-1].hbar, "value": good[-1].value}
    emit(run, SWEEP_COLUMNS, _sweep_rows(records), summary)
    logger.info("Sweep written", sweep=run.sweep, points=len(records), failures=len(records) - len(good))
    if not good:
        raise NumericError(f"Every sweep point failed: {records[0].error}")
    return 0


def cmd_average(run: RunConfig) -> int:
    """
    Cycle averages at --x with closed-form references.

    The free particle is compared with its exact cycle averages and the
    averaged equation of motion; the linear potential's mean is compared
    with the classical momentum, its leading small-hbar value.
    """
    setup = build_setup(run)
    ms = resolve_microstate(run, setup)
    x = run.x
    avg = cycle_average(setup, ms, x)
    nan = math.nan

    if isinstance(setup.potential, FreeParticle):
        ref = free_cycle_reference(setup, ms)
        classical_time = math.sqrt(setup.m / (2.0 * setup.E)) * x
        quantities = [
            ("mean", avg.mean, ref.mean),
            ("mean_square", avg.mean_square, ref.mean_square),
            ("variance", avg.variance, ref.variance),
            ("quantum_term_mean", avg.quantum_term_mean, ref.quantum_term_mean),
            ("wavelength", avg.wavelength, ref.wavelength),
            ("average_time", average_time(setup, ms, x), classical_time),
            ("average_principal_function", average_principal_function(setup, ms, x), setup.E * classical_time),
        ]
    else:
        quantities = [
            ("mean", avg.mean, classical_momentum(setup, x)),
            ("mean_square", avg.mean_square, nan),
            ("variance", avg.variance, nan),
            ("quantum_term_mean", avg.quantum_term_mean, nan),
            ("wavelength", avg.wavelength, nan),
        ]

    rows = [
        {"quantity": name, "value": value, "reference": reference, "delta": value - reference}
        for name, value, reference in quantities
    ]
    deltas = [abs(r["delta"]) for r in rows if math.isfinite(r["delta"])]
    summary = {
        "potential": setup.potential.name,
        "x": x,
        "microstate": microstate_summary(ms),
        "averages": {r["quantity"]: r["value"] for r in rows},
        "references": {r["quantity"]: r["reference"] for r in rows},
        "max_abs_delta": max(deltas, default=nan),
    }
    emit(run, AVERAGE_COLUMNS, rows, summary)
    logger.info("Cycle averages written", potential=setup.potential.name, x=x, variance=avg.variance)
    return 0


def random_microstate(rng: np.random.Generator) -> Microstate:
    """Positive-definite (a, b, c) with a, b log-uniform in [e^-1.5, e^1.5] and |c| < 1.9 (ab)^(1/2)."""
    a = math.exp(rng.uniform(-1.5, 1.5))
    b = math.exp(rng.uniform(-1.5, 1.5))
    c = rng.uniform(-0.95, 0.95) * 2.0 * math.sqrt(a * b)
    return validate(Microstate(a, b, c))


def audit_grid(setup: PhysicalSetup, rng: np.random.Generator) -> List[float]:
    """
    Random sorted grid: |x| <= 1 (free), [0, 1] (step interior), and for the
    linear potential half the points within |zeta| < 5 of the turning point.
    """
    model = setup.potential
    if isinstance(model, FreeParticle):
        xs = rng.uniform(-1.0, 1.0, AUDIT_GRID_POINTS)
    elif isinstance(model, StepBarrier):
        xs = rng.uniform(0.0, 1.0, AUDIT_GRID_POINTS)
    else:
        half = AUDIT_GRID_POINTS // 2
        zetas = np.concatenate(
            [rng.uniform(-5.0, 5.0, half), rng.uniform(-12.0, 6.0, AUDIT_GRID_POINTS - half)]
        )
        xs = turning_point(setup) + zetas / wavenumber(setup)
    return sorted(float(x) for x in xs)


def cmd_residual_audit(run: RunConfig) -> int:
    """
    QSHJE residual over random microstates and grids.

    Each sample passes when max |residual| < 1e-7 max(|E|, |E - V(x)|) on its
    grid. Runs every potential unless --potential narrows it.

    Returns:
        0 when every sample passed, 3 otherwise.
    """
    rng = np.random.default_rng(run.seed)
    names = [run.potential] if run.potential is not None else list(POTENTIALS)
    rows: List[Dict[str, Any]] = []
    for name in names:
        setup = build_setup(run, name)
        for sample in range(run.samples):
            ms = random_microstate(rng)
            xs = run.x_grid.values() if run.x_grid is not None else audit_grid(setup, rng)
            tolerance = RESIDUAL_TOLERANCE * energy_scale(setup, xs)
            try:
                worst = max(abs(qshje_residual(setup, ms, x)) for x in xs)
            except QuantumHJError as e:
                logger.warning("Residual audit sample failed", potential=name, sample=sample, error=str(e))
                worst = math.nan
            rows.append(
                {
                    "potential": name,
                    "sample": sample,
                    "a": ms.a,
                    "b": ms.b,
                    "c": ms.c,
                    "max_abs_residual": worst,
                    "tolerance": tolerance,
                    "passed": bool(worst < tolerance),
                }
            )

    failed = [r for r in rows if not r["passed"]]
    finite = [r["max_abs_residual"] for r in rows if math.isfinite(r["max_abs_residual"])]
    summary = {
        "potentials": names,
        "samples": run.samples,
        "seed": run.seed,
        "max_abs_residual": max(finite, default=math.nan),
        "failed": len(failed),
    }
    emit(run, AUDIT_COLUMNS, rows, summary)
    if failed:
        logger.error("Residual audit failed", failed=len(failed), total=len(rows))
        return 3
    logger.info("Residual audit passed", total=len(rows), max_residual=summary["max_abs_residual"])
    return 0


COMMANDS: Dict[str, Callable[[RunConfig], int]] = {
    "trajectory": cmd_trajectory,
    "sweep": cmd_sweep,
    "average": cmd_average,
    "residual-audit": cmd_residual_audit,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="key=value settings file.")
    common.add_argument("--log-level", type=str.upper, choices=LOG_LEVELS, default=None, dest="log_level")
    common.add_argument("--potential", choices=POTENTIALS, default=None, help="Potential model (default: free).")
    common.add_argument("--U", type=float, default=None, dest="U", help="Step height.")
    common.add_argument("--f", type=float, default=None, dest="f", help="Linear force constant.")
    common.add_argument("--m", type=float, default=None, dest="m", help="Mass.")
    common.add_argument("--E", type=float, default=None, dest="E", help="Energy.")
    common.add_argument("--hbar", type=float, default=None, help="Reduced Planck constant.")
    common.add_argument("--hbar-grid", default=None, dest="hbar_grid", help="start:stop[:points[:geom|lin]], geometric by default.")
    common.add_argument("--abc", default=None, help="Microstate coefficients a,b,c.")
    common.add_argument("--initials", default=None, help="Initial values x0,Wx0,Wxx0.")
    common.add_argument("--x", type=float, default=None, help="Position.")
    common.add_argument("--x-grid", default=None, dest="x_grid", help="start:stop:points[:geom|lin], linear by default.")
    common.add_argument("--observable", choices=[o.value for o in Observable], default=None, help="Swept observable (default: Wx).")
    common.add_argument("--format", choices=("csv", "json"), default=None, help="Output format (default: csv).")
    common.add_argument("--out", type=Path, default=None, help="Output path (default: stdout).")
    common.add_argument(
        "--convention",
        choices=[c.value for c in ReducedActionConvention],
        default=None,
        help="Reduced action branch (default: unwrapped).",
    )
    common.add_argument("--sweep", choices=("hbar", "turning-width", "eta"), default=None, help="Sweep kind (default: hbar).")
    common.add_argument("--eta", default=None, help="eta(hbar): [c0*]hbar[^p] [+|- c1] or a constant.")
    common.add_argument("--epsilon", type=float, default=None, help="Turning-region threshold (default: 0.05).")
    common.add_argument("--seed", type=int, default=None, help="Residual-audit RNG seed (default: 0).")
    common.add_argument("--samples", type=int, default=None, help="Residual-audit microstates per potential (default: 200).")

    parser = argparse.ArgumentParser(
        prog="quantum_hj",
        description="Closed-form quantum stationary Hamilton-Jacobi trajectories and their classical limit.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    subparsers.add_parser("trajectory", parents=[common], help="Trajectory table over an x grid.")
    subparsers.add_parser("sweep", parents=[common], help="hbar, turning-width or eta sweeps.")
    subparsers.add_parser("average", parents=[common], help="Cycle averages at one x.")
    subparsers.add_parser("residual-audit", parents=[common], help="QSHJE residual over random microstates.")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one command.

    Args:
        argv: Arguments without the program name; sys.argv[1:] when None.

    Returns:
        Exit code: 0 success, 2 configuration error, 3 numerical failure.
    """
    args = build_parser().parse_args(argv)

    config.load_defaults()
    try:
        if args.config is not None:
            config.load_file(args.config)
        if config.log_level not in LOG_LEVELS:
            raise ConfigError(f"Unknown LOG_LEVEL {config.log_level!r} in {args.config}")
    except (FileNotFoundError, ValueError, ConfigError) as e:
        setup_logging("INFO")
        logger.error("Invalid settings file", path=str(args.config), error=str(e))
        return 2
    if args.log_level is not None:
        config.log_level = args.log_level
    setup_logging(config.log_level)

    started = time.perf_counter()
    try:
        run = build_run_config(args)
        code = COMMANDS[run.command](run)
    except ConfigError as e:
        logger.error("Invalid configuration", command=args.command, error=str(e))
        return 2
    except NumericError as e:
        logger.error("Numerical failure", command=args.command, error=str(e))
        return 3
    logger.info(
        "Run finished",
        command=args.command,
        exit_code=code,
        elapsed_ms=round(1000.0 * (time.perf_counter() - started), 1),
    )
    return code


if __name__ == "__main__":
    sys.exit(main())
