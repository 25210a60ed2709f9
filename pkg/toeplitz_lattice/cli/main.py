"""
`toeplitz-lattice` command line.

Exit status: 0 when every check passes, 1 when an invariant check fails, 2 on a usage,
configuration or I/O error.
"""

from __future__ import annotations

import argparse
import logging
from pathlib import Path
from typing import Any, Optional, Sequence

from rich.console import Console
from rich.logging import RichHandler

from toeplitz_lattice.__version__ import __version__
from toeplitz_lattice.cli.config import COMMANDS, ConfigError, RunConfig, resolve_config
from toeplitz_lattice.cli.reports import render_report, write_report
from toeplitz_lattice.cli.suites import run_suite
from toeplitz_lattice.exception import BaseToeplitzLatticeException
from toeplitz_lattice.ledger.session import LedgerError, LedgerSessionFactory

logger = logging.getLogger("toeplitz_lattice")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

DESCRIPTIONS = {
    "lattice-check": "Distributive witness, orthomodular law and Gleason additivity in C^dim.",
    "quantize": "Equivariant decomposition of the truncated Hardy space and its oracles.",
    "toeplitz": "One Toeplitz operator: Hermiticity, trace, spectrum, Berezin symbol.",
    "povm": "Latitude-band POVM: positivity, completeness, Riemann refinement.",
    "asymptotics": "Growth exponents of probabilities, traces and the corrected quantization.",
    "full-suite": "Lattice laws in C^2..C^16, isotypes up to K, Gram and spectra up to k=50, sweeps to k=100.",
}


def _common_options() -> argparse.ArgumentParser:
    # SUPPRESS keeps untyped flags out of the namespace so the config file can supply them
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", type=Path, help="TOML file with run settings")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="report directory (default: reports)")
    common.add_argument("--format", choices=["json", "csv"])
    common.add_argument("--log-level", dest="log_level", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    common.add_argument("--ledger", help="SQLAlchemy URL of the run ledger, e.g. sqlite:///runs.db")
    common.add_argument("--workers", type=int)
    common.add_argument("--quadrature-degree", dest="quadrature_degree", type=int)
    common.add_argument("--volume", type=float, help="volume normalization of P1 (default: pi)")

    common.add_argument("--dim", type=int)
    common.add_argument("--trials", type=int)
    common.add_argument("--max-k", dest="max_k", type=int)
    common.add_argument("--k", type=int)
    common.add_argument("--k-min", dest="k_min", type=int)
    common.add_argument("--k-max", dest="k_max", type=int)
    common.add_argument("--k-step", dest="k_step", type=int)
    common.add_argument("--action", choices=["circle", "torus", "su2"])
    common.add_argument("--nu-g", dest="nu_g", type=int)
    common.add_argument("--radius", type=float, help="su2 representation radius, a half-integer")
    common.add_argument("--normalized", action="store_true")
    common.add_argument("--symbol", choices=["height", "one", "raised-height", "harmonic"])
    common.add_argument("--harmonic", nargs=2, type=int, metavar=("L", "M"))
    common.add_argument("--bands", type=int)
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog="toeplitz-lattice",
        description="Numerical checks of Hilbert lattices and Berezin-Toeplitz quantization of P1.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    commands = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        commands.add_parser(command, parents=[common], help=DESCRIPTIONS[command])
    commands.add_parser("run", parents=[common], help="Run the command named in --config")
    return parser


def _flags(namespace: argparse.Namespace) -> tuple[Optional[str], dict[str, Any], Optional[Path]]:
    values = vars(namespace).copy()
    command = values.pop("command")
    config_path = values.pop("config", None)
    harmonic = values.pop("harmonic", None)
    if harmonic is not None:
        values["harmonic_l"], values["harmonic_m"] = harmonic
    return (None if command == "run" else command), values, config_path


def configure_logging(level: str):
    handler = RichHandler(console=Console(stderr=True), show_path=False, rich_tracebacks=True)
    logging.basicConfig(level=level, format="%(message)s", handlers=[handler], force=True)


def _record(config: RunConfig, report, report_path: Path):
    if config.ledger is None:
        return
    ledger = LedgerSessionFactory.from_url(config.ledger)
    with ledger.begin() as session:
        session.record(report, str(report_path))


def execute(config: RunConfig, console: Console) -> int:
    report = run_suite(config)
    written = write_report(report, Path(config.out), config.format)
    _record(config, report, written[0])
    render_report(report, console)
    for path in written:
        console.print(f"wrote {path}")
    return EXIT_OK if report.passed else EXIT_FAILED


def main(argv: Optional[Sequence[str]] = None) -> int:
    console = Console()
    error_console = Console(stderr=True)
    parser = build_parser()
    try:
        namespace = parser.parse_args(argv)
    except SystemExit as exit:
        return EXIT_OK if exit.code in (0, None) else EXIT_USAGE

    command, flags, config_path = _flags(namespace)
    configure_logging(flags.get("log_level", "WARNING"))
    try:
        config = resolve_config(command, flags, config_path)
        if "log_level" not in flags:
            logging.getLogger().setLevel(config.log_level)
        return execute(config, console)
    except ConfigError as err:
        error_console.print(f"[red]configuration error:[/red] {err}")
        return EXIT_USAGE
    except (LedgerError, OSError) as err:
        error_console.print(f"[red]error:[/red] {err}")
        return EXIT_USAGE
    except BaseToeplitzLatticeException as err:
        # invalid quantum numbers or partitions reached from the command line
        error_console.print(f"[red]invalid input:[/red] {err}")
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
