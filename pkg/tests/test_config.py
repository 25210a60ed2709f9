import math
from pathlib import Path

import pytest

from toeplitz_lattice.cli.config import COMMANDS, ConfigError, RunConfig, resolve_config


def write_config(tmp_path: Path, text: str) -> Path:
    path = tmp_path / "run.toml"
    path.write_text(text)
    return path


def test_defaults():
    config = resolve_config("quantize", {})
    assert config == RunConfig("quantize")
    assert config.seed == 42
    assert config.max_k == 12
    assert config.volume == math.pi
    assert config.k_values() == list(range(10, 101, 10))
    assert len(COMMANDS) == 6


def test_flags_override_file(tmp_path: Path):
    path = write_config(tmp_path, 'command = "asymptotics"\nk-min = 5\nk_max = 40\nseed = 7\n')
    config = resolve_config(None, {"seed": 9}, path)
    assert config.command == "asymptotics"
    assert config.k_min == 5
    assert config.k_max == 40
    assert config.seed == 9


def test_file_errors_carry_the_line(tmp_path: Path):
    path = write_config(tmp_path, 'command = "toeplitz"\n\nk = "ten"\n')
    with pytest.raises(ConfigError) as info:
        resolve_config(None, {}, path)
    assert info.value.field == "k"
    assert info.value.line == 3
    assert ":3:" in str(info.value)


def test_unknown_key_is_rejected(tmp_path: Path):
    path = write_config(tmp_path, "colour = 1\n")
    with pytest.raises(ConfigError, match="unknown key"):
        resolve_config("povm", {}, path)


def test_missing_file_and_missing_command(tmp_path: Path):
    with pytest.raises(ConfigError, match="not found"):
        resolve_config("povm", {}, tmp_path / "nope.toml")
    with pytest.raises(ConfigError, match="no command"):
        resolve_config(None, {}, write_config(tmp_path, "seed = 1\n"))


def test_conflicting_command(tmp_path: Path):
    path = write_config(tmp_path, 'command = "povm"\n')
    with pytest.raises(ConfigError):
        resolve_config("toeplitz", {}, path)


def test_malformed_toml(tmp_path: Path):
    with pytest.raises(ConfigError):
        resolve_config("povm", {}, write_config(tmp_path, "k = = 3\n"))


@pytest.mark.parametrize(
    "flags",
    [
        {"k": -1},
        {"max_k": -2},
        {"k_min": 0},
        {"k_min": 50, "k_max": 40},
        {"dim": 0},
        {"bands": 0},
        {"volume": 0.0},
        {"radius": 0.7},
        {"harmonic_l": 1, "harmonic_m": 2},
        {"symbol": "sine"},
        {"format": "xml"},
        {"trials": True},
    ],
)
def test_invalid_values(flags: dict):
    with pytest.raises(ConfigError):
        resolve_config("toeplitz", flags)


def test_quadrature_degree_depends_on_the_command():
    resolve_config("toeplitz", {"k": 10, "quadrature_degree": 22})
    with pytest.raises(ConfigError, match="2 k \\+ 2"):
        resolve_config("toeplitz", {"k": 10, "quadrature_degree": 21})
    with pytest.raises(ConfigError):
        resolve_config("asymptotics", {"quadrature_degree": 22})


def test_to_dict_leaves_out_run_plumbing():
    flags = {"ledger": "sqlite://", "log_level": "DEBUG", "out": "elsewhere", "workers": 3}
    data = resolve_config("povm", flags).to_dict()
    for name in flags:
        assert name not in data
    assert data == resolve_config("povm", {}).to_dict()
    assert data["command"] == "povm"
