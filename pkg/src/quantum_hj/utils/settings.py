"""
Configuration management module.

This module holds the numerical defaults of the library and loads overrides
from a plain key=value configuration file. The process environment is never
consulted, so archived config files reproduce runs exactly.
"""

from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Dict, Optional, Union

from dotenv import dotenv_values


@dataclass(frozen=True)
class SpecfunConfig:
    """Airy evaluation switch points."""

    series_max_neg: float
    series_max_pos_ai: float
    asymptotic_pos: float
    asymptotic_neg: float
    taylor_step: float


@dataclass(frozen=True)
class QuadratureConfig:
    """Adaptive Gauss-Legendre settings for cycle averages."""

    order: int
    abs_tol: float
    max_depth: int


@dataclass(frozen=True)
class SweepConfig:
    """hbar sweep and envelope extraction settings."""

    points_per_decade: int
    envelope_samples: int
    window: float
    width_scan_points: int
    width_scan_extent: float


@dataclass(frozen=True)
class OracleConfig:
    """Brute-force oracle settings."""

    step_fraction: float
    convergence_tol: float
    wronskian_tol: float
    quad_abs_tol: float
    quad_limit: int


@dataclass(frozen=True)
class PhysicsDefaults:
    """Default physical setup in natural units."""

    m: float
    E: float
    hbar: float
    U: float
    f: float


class Config:  # pylint: disable=too-many-instance-attributes
    """
    Centralized numerical configuration.

    Implements a singleton so every module reads the same defaults. Values
    start from the built-in defaults and can be overridden once per run from
    a key=value file through ``load_file``.

    Attributes:
        log_level: Logging level (DEBUG/INFO/WARNING/ERROR/CRITICAL). Default: INFO
        specfun: Airy series/asymptotic switch points
        quadrature: Cycle-average quadrature settings
        sweep: hbar sweep settings
        oracle: Integrator and oracle quadrature settings
        physics: Default m, E, hbar, U, f
        run: Run keys from the file (potential, grids, microstate, ...) as text

    File keys (case-insensitive, all optional):
        LOG_LEVEL
        SPECFUN_SERIES_MAX_NEG, SPECFUN_SERIES_MAX_POS_AI, SPECFUN_ASYMPTOTIC_POS,
        SPECFUN_ASYMPTOTIC_NEG, SPECFUN_TAYLOR_STEP
        QUAD_ORDER, QUAD_ABS_TOL, QUAD_MAX_DEPTH
        SWEEP_POINTS_PER_DECADE, SWEEP_ENVELOPE_SAMPLES, SWEEP_WINDOW,
        WIDTH_SCAN_POINTS, WIDTH_SCAN_EXTENT
        ORACLE_STEP_FRACTION, ORACLE_CONVERGENCE_TOL, ORACLE_WRONSKIAN_TOL,
        ORACLE_QUAD_ABS_TOL, ORACLE_QUAD_LIMIT
        M, E, HBAR, U, F
        Run keys, kept as text in ``run`` for the command line to parse:
        POTENTIAL, ABC, INITIALS, X, X_GRID, HBAR_GRID, OBSERVABLE, FORMAT, OUT,
        CONVENTION, SWEEP, ETA, EPSILON, SEED, SAMPLES
    """

    _instance = None
    _loaded = False

    def __new__(cls):
        """
        Create or return the singleton instance.

        Returns:
            The single Config instance.
        """
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __init__(self):
        """Initialize configuration with built-in defaults."""
        if not Config._loaded:
            self.load_defaults()
            Config._loaded = True

    def load_defaults(self) -> None:
        """Reset every setting to its built-in default."""
        self.log_level = "INFO"

        self.specfun = SpecfunConfig(
            series_max_neg=3.0,
            series_max_pos_ai=2.0,
            asymptotic_pos=8.5,
            asymptotic_neg=9.0,
            taylor_step=0.25,
        )

        self.quadrature = QuadratureConfig(order=24, abs_tol=1e-10, max_depth=12)

        self.sweep = SweepConfig(
            points_per_decade=10,
            envelope_samples=33,
            window=1e-6,
            width_scan_points=80,
            width_scan_extent=20.0,
        )

        self.oracle = OracleConfig(
            step_fraction=1e-3,
            convergence_tol=1e-8,
            wronskian_tol=1e-8,
            quad_abs_tol=1e-10,
            quad_limit=200,
        )

        self.physics = PhysicsDefaults(m=1.0, E=0.5, hbar=1e-2, U=1.0, f=1.0)

        self.run: Dict[str, str] = {}

    def load_file(self, path: Union[str, Path]) -> Dict[str, str]:
        """
        Apply overrides from a key=value configuration file.

        Args:
            path: Path to the configuration file.

        Returns:
            The raw key/value pairs read from the file, lower-cased keys.

        Raises:
            FileNotFoundError: If the file does not exist.
            ValueError: If a key is unknown or a value cannot be converted to
                the field's type.
        """
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"Config file not found: {path}")

        raw = {k.lower(): v for k, v in dotenv_values(path).items() if v is not None}

        unknown = sorted(set(raw) - _KNOWN_KEYS)
        if unknown:
            raise ValueError(f"Unknown settings keys in {path}: {', '.join(unknown)}")

        if "log_level" in raw:
            self.log_level = raw["log_level"].upper()

        for group, mapping in _GROUP_KEYS.items():
            setattr(self, group, _override(getattr(self, group), raw, mapping))

        self.run = {key: value.strip() for key, value in raw.items() if key in RUN_KEYS}
        return raw

    def get(self, key: str, default: Optional[object] = None) -> Optional[object]:
        """
        Get a configuration value by key.

        Args:
            key: Configuration key to retrieve.
            default: Default value if key doesn't exist.

        Returns:
            Configuration value or default if not found.
        """
        return getattr(self, key, default)


_GROUP_KEYS: Dict[str, Dict[str, str]] = {
    "specfun": {
        "specfun_series_max_neg": "series_max_neg",
        "specfun_series_max_pos_ai": "series_max_pos_ai",
        "specfun_asymptotic_pos": "asymptotic_pos",
        "specfun_asymptotic_neg": "asymptotic_neg",
        "specfun_taylor_step": "taylor_step",
    },
    "quadrature": {"quad_order": "order", "quad_abs_tol": "abs_tol", "quad_max_depth": "max_depth"},
    "sweep": {
        "sweep_points_per_decade": "points_per_decade",
        "sweep_envelope_samples": "envelope_samples",
        "sweep_window": "window",
        "width_scan_points": "width_scan_points",
        "width_scan_extent": "width_scan_extent",
    },
    "oracle": {
        "oracle_step_fraction": "step_fraction",
        "oracle_convergence_tol": "convergence_tol",
        "oracle_wronskian_tol": "wronskian_tol",
        "oracle_quad_abs_tol": "quad_abs_tol",
        "oracle_quad_limit": "quad_limit",
    },
    "physics": {"m": "m", "e": "E", "hbar": "hbar", "u": "U", "f": "f"},
}

# Parsed and validated by the command line together with its flags
RUN_KEYS = frozenset(
    {
        "potential",
        "abc",
        "initials",
        "x",
        "x_grid",
        "hbar_grid",
        "observable",
        "format",
        "out",
        "convention",
        "sweep",
        "eta",
        "epsilon",
        "seed",
        "samples",
    }
)

_KNOWN_KEYS = frozenset({"log_level"}.union(RUN_KEYS, *(m.keys() for m in _GROUP_KEYS.values())))


def _override(group, raw: Dict[str, str], mapping: Dict[str, str]):
    """Return a copy of a frozen settings group with file values applied."""
    types = {f.name: f.type for f in fields(group)}
    changes = {}
    for key, attr in mapping.items():
        if key in raw:
            cast = int if types[attr] in (int, "int") else float
            changes[attr] = cast(raw[key])
    return replace(group, **changes) if changes else group


# Global config instance
config = Config()
