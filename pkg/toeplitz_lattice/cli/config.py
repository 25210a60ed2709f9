"""
Run configuration: defaults, overridden by a TOML file, overridden by the flags the user typed.
"""

from __future__ import annotations

import dataclasses
import math
import re
import sys
import typing
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Literal, Mapping, Optional

from toeplitz_lattice.exception import BaseToeplitzLatticeException

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

Command = Literal["lattice-check", "quantize", "toeplitz", "povm", "asymptotics", "full-suite"]
COMMANDS: tuple[Command, ...] = typing.get_args(Command)

SymbolChoice = Literal["height", "one", "raised-height", "harmonic"]
ReportFormat = Literal["json", "csv"]
LogLevel = Literal["DEBUG", "INFO", "WARNING", "ERROR"]

_KEY_LINE = re.compile(r"^\s*([A-Za-z0-9_-]+)\s*=")


class ConfigError(BaseToeplitzLatticeException):
    def __init__(self, field: str, detail: str, line: Optional[int] = None, source: Optional[str] = None):
        where = f"{source}:{line}: " if source and line else (f"{source}: " if source else "")
        super().__init__(f"{where}invalid value for '{field}': {detail}")
        self.field = field
        self.line = line


@dataclass(frozen=True)
class RunConfig:
    """
    Everything a CLI run depends on. Equal configs give byte-identical reports.

    params:
        command:
            The suite to run.
        action:
            Group action for `quantize` and `asymptotics`.
        nu_g:
            G label of the isotype swept by `asymptotics`.
        k:
            Tensor power for `toeplitz` and `povm`.
        k_min, k_max, k_step:
            Sweep range for `asymptotics`, inclusive.
        max_k:
            Truncation K of the Hardy space for `quantize`.
        symbol, harmonic_l, harmonic_m:
            The Toeplitz symbol; `harmonic` uses the real spherical harmonic (l, m).
        bands:
            Number of latitude bands of the POVM partition.
        quadrature_degree:
            Exactness degree of the quadrature; None means `2 k + 4` for each k.
        seed:
            Seed of every randomized check (default 42).
    """

    command: Command
    action: Literal["circle", "torus", "su2"] = "circle"
    nu_g: int = 0
    k: int = 10
    k_min: int = 10
    k_max: int = 100
    k_step: int = 10
    max_k: int = 12
    symbol: SymbolChoice = "height"
    harmonic_l: int = 2
    harmonic_m: int = 0
    bands: int = 8
    quadrature_degree: Optional[int] = None
    volume: float = math.pi
    radius: float = 0.5
    dim: int = 2
    trials: int = 1000
    normalized: bool = False
    seed: int = 42
    out: str = "reports"
    format: ReportFormat = "json"
    workers: int = 1
    log_level: LogLevel = "WARNING"
    ledger: Optional[str] = None

    def k_values(self) -> list[int]:
        return list(range(self.k_min, self.k_max + 1, self.k_step))

    def to_dict(self) -> dict[str, Any]:
        # where and how a run is executed does not change its results
        data = dataclasses.asdict(self)
        for name in ("ledger", "log_level", "out", "workers"):
            data.pop(name)
        return data


FIELD_NAMES = tuple(f.name for f in dataclasses.fields(RunConfig))


def _check_type(name: str, value: Any, hint: Any) -> Any:
    origin = typing.get_origin(hint)
    args = typing.get_args(hint)
    if origin is Literal:
        if value not in args:
            raise ValueError(f"expected one of {list(args)}, got {value!r}")
        return value
    if origin is typing.Union:
        if value is None and type(None) in args:
            return None
        inner = [a for a in args if a is not type(None)]
        return _check_type(name, value, inner[0])
    if hint is bool:
        if not isinstance(value, bool):
            raise ValueError(f"expected true or false, got {value!r}")
        return value
    if hint is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValueError(f"expected an integer, got {value!r}")
        return value
    if hint is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValueError(f"expected a number, got {value!r}")
        return float(value)
    if hint is str:
        if not isinstance(value, str):
            raise ValueError(f"expected a string, got {value!r}")
        return value
    raise ValueError(f"unsupported field type {hint!r}")


def load_config_file(path: Path) -> tuple[dict[str, Any], dict[str, int]]:
    """Read a TOML config file; returns the values and the line of every key."""
    if not path.is_file():
        raise ConfigError("config", f"config file not found: {path}")
    text = path.read_text(encoding="utf-8")
    try:
        values = tomllib.loads(text)
    except tomllib.TOMLDecodeError as err:
        raise ConfigError("config", str(err), source=str(path)) from err

    lines: dict[str, int] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        match = _KEY_LINE.match(line)
        if match:
            lines.setdefault(match.group(1).replace("-", "_"), number)
    return {key.replace("-", "_"): value for key, value in values.items()}, lines


def _largest_k(config: RunConfig) -> int:
    if config.command in ("toeplitz", "povm"):
        return config.k
    if config.command == "quantize":
        return config.max_k
    if config.command == "asymptotics":
        return config.k_max
    return max(config.k, config.max_k, config.k_max, 50)


def _validate(config: RunConfig, lines: Mapping[str, int], source: Optional[str]):
    def fail(field: str, detail: str):
        raise ConfigError(field, detail, lines.get(field), source if field in lines else None)

    if config.k < 0:
        fail("k", "must be nonnegative")
    if config.max_k < 0:
        fail("max_k", "must be nonnegative")
    if config.k_min < 1:
        fail("k_min", "must be at least 1 (growth exponents are fitted in log k)")
    if config.k_max < config.k_min:
        fail("k_max", f"must be >= k_min = {config.k_min}")
    if config.k_step < 1:
        fail("k_step", "must be at least 1")
    if config.dim < 1:
        fail("dim", "must be at least 1")
    if config.trials < 1:
        fail("trials", "must be at least 1")
    if config.bands < 1:
        fail("bands", "must be at least 1")
    if config.workers < 1:
        fail("workers", "must be at least 1")
    if config.volume <= 0:
        fail("volume", "must be positive")
    if config.radius <= 0 or not float(2 * config.radius).is_integer():
        fail("radius", "must be a positive half-integer")
    if config.harmonic_l < 0 or abs(config.harmonic_m) > config.harmonic_l:
        fail("harmonic_m", "needs |m| <= l")
    if config.quadrature_degree is not None:
        largest = _largest_k(config)
        if config.quadrature_degree < 2 * largest + 2:
            fail("quadrature_degree", f"must be at least 2 k + 2 = {2 * largest + 2} for the requested k")


def resolve_config(
    command: Optional[str],
    flags: Mapping[str, Any],
    config_path: Optional[Path] = None,
) -> RunConfig:
    """
    Merge defaults, the config file and explicit flags, in increasing precedence.

    `command` may be None when the config file names it (`run --config FILE`).

    Example:
        ```python
        from toeplitz_lattice.cli.config import resolve_config

        config = resolve_config("lattice-check", {"dim": 3})
        assert config.dim == 3 and config.seed == 42
        ```
    """
    file_values: dict[str, Any] = {}
    lines: dict[str, int] = {}
    source = None
    if config_path is not None:
        file_values, lines = load_config_file(config_path)
        source = str(config_path)

    hints = typing.get_type_hints(RunConfig)
    merged: dict[str, Any] = {}
    for origin, values in (("file", file_values), ("flag", dict(flags))):
        for key, value in values.items():
            if key not in FIELD_NAMES:
                raise ConfigError(
                    key, "unknown key", lines.get(key) if origin == "file" else None,
                    source if origin == "file" else None,
                )
            try:
                merged[key] = _check_type(key, value, hints[key])
            except ValueError as err:
                raise ConfigError(
                    key, str(err), lines.get(key) if origin == "file" else None,
                    source if origin == "file" else None,
                ) from err

    if command is not None:
        if "command" in file_values and file_values["command"] != command:
            raise ConfigError(
                "command", f"file says {file_values['command']!r}, command line says {command!r}",
                lines.get("command"), source,
            )
        merged["command"] = command
    if "command" not in merged:
        raise ConfigError("command", "no command given", source=source)

    config = RunConfig(**merged)
    _validate(config, lines, source)
    return config
