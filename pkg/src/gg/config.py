"""Pipeline configuration: flat key-value files, one key per line.

Format: `key = value`, full-line comments with '#', blank lines ignored.
Lists are comma-separated. `GG_WORKDIR` in the environment overrides the
configured work directory at load time.
"""

import os
import shlex
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import ConfigError

WORKDIR_ENV = "GG_WORKDIR"


@dataclass(frozen=True)
class ToolchainSpec:
    command: str
    flags: str = ""

    def flag_list(self) -> list[str]:
        return shlex.split(self.flags)


@dataclass
class PipelineConfig:
    workdir: str = "work"
    toolchains: dict[str, ToolchainSpec] = field(default_factory=dict)
    runners: dict[str, str] = field(default_factory=dict)  # isa -> native | emulate:<cmd>
    expansion: dict[str, float] = field(default_factory=dict)  # isa -> output/input token ratio
    min_lines: int = 10
    max_lines: int = 16000
    strip_boilerplate: bool = False
    isas: list[str] = field(default_factory=lambda: ["x86_64", "armv8"])
    opts: list[str] = field(default_factory=lambda: ["O0"])
    source_isa: str = "x86_64"
    target_isa: str = "armv8"
    opt: str = "O0"
    backend: str = "oracle"
    backend_url: str = ""
    backend_command: str = ""
    mutant_rule: str = "auto"
    beam_width: int = 8
    context_window: int = 32768
    max_new_tokens: int = 16384
    timeout_s: float = 10.0
    pool_compile: int = 4
    pool_verify: int = 4
    pool_guess: int = 2
    coverage_command: str = "gcov"
    coverage: bool = False
    tests_dir: str = ""
    runtime_dir: str = ""
    vocab_path: str = ""
    prompt_template: str = ""

    _SCALARS = {
        "workdir": str, "min_lines": int, "max_lines": int,
        "strip_boilerplate": bool, "source_isa": str, "target_isa": str,
        "opt": str, "backend": str, "backend_url": str,
        "backend_command": str, "mutant_rule": str, "beam_width": int,
        "context_window": int, "max_new_tokens": int, "timeout_s": float,
        "pool_compile": int, "pool_verify": int, "pool_guess": int,
        "coverage_command": str, "coverage": bool, "tests_dir": str,
        "runtime_dir": str, "vocab_path": str, "prompt_template": str,
    }
    _KEY_ALIASES = {
        "filter.min_lines": "min_lines",
        "filter.max_lines": "max_lines",
        "backend.http.url": "backend_url",
        "backend.command": "backend_command",
        "mutant.rule": "mutant_rule",
        "pool.compile": "pool_compile",
        "pool.verify": "pool_verify",
        "pool.guess": "pool_guess",
        "coverage.command": "coverage_command",
        "coverage.enabled": "coverage",
        "tests.dir": "tests_dir",
        "tests.runtime_dir": "runtime_dir",
        "vocab.path": "vocab_path",
        "prompt.template": "prompt_template",
        "corpus.isas": "isas",
        "corpus.opts": "opts",
    }

    def effective_workdir(self) -> Path:
        return Path(os.environ.get(WORKDIR_ENV) or self.workdir)

    def toolchain(self, isa: str) -> ToolchainSpec:
        try:
            return self.toolchains[isa]
        except KeyError:
            raise ConfigError(f"no toolchain configured for {isa}") from None

    def runner(self, isa: str) -> str:
        return self.runners.get(isa, "native")


def _parse_bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {value!r}")


def parse_config(text: str) -> PipelineConfig:
    config = PipelineConfig()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {line_no}: expected 'key = value', got {raw!r}")
        key = key.strip()
        value = value.strip()
        key = PipelineConfig._KEY_ALIASES.get(key, key)
        parts = key.split(".")
        if parts[0] == "toolchain" and len(parts) == 3:
            isa, attr = parts[1], parts[2]
            spec = config.toolchains.get(isa, ToolchainSpec(command=""))
            if attr == "command":
                spec = replace(spec, command=value)
            elif attr == "flags":
                spec = replace(spec, flags=value)
            else:
                raise ConfigError(f"line {line_no}: unknown toolchain key {key!r}")
            config.toolchains[isa] = spec
            continue
        if parts[0] == "runner" and len(parts) == 2:
            config.runners[parts[1]] = value
            continue
        if parts[0] == "expansion" and len(parts) == 2:
            config.expansion[parts[1]] = float(value)
            continue
        kind = PipelineConfig._SCALARS.get(key)
        if kind is not None:
            if kind is bool:
                setattr(config, key, _parse_bool(value))
            else:
                setattr(config, key, kind(value))
            continue
        if key in ("isas", "opts"):
            setattr(config, key, [item.strip() for item in value.split(",") if item.strip()])
            continue
        raise ConfigError(f"line {line_no}: unknown key {key!r}")
    return config


def dump_config(config: PipelineConfig) -> str:
    lines: list[str] = []
    for isa, spec in sorted(config.toolchains.items()):
        lines.append(f"toolchain.{isa}.command = {spec.command}")
        if spec.flags:
            lines.append(f"toolchain.{isa}.flags = {spec.flags}")
    for isa, runner in sorted(config.runners.items()):
        lines.append(f"runner.{isa} = {runner}")
    for isa, factor in sorted(config.expansion.items()):
        lines.append(f"expansion.{isa} = {factor}")
    defaults = PipelineConfig()
    for name, kind in PipelineConfig._SCALARS.items():
        value = getattr(config, name)
        if value == getattr(defaults, name):
            continue
        if kind is bool:
            value = "true" if value else "false"
        lines.append(f"{name} = {value}")
    for name in ("isas", "opts"):
        value = getattr(config, name)
        if value != getattr(defaults, name):
            lines.append(f"{name} = {','.join(value)}")
    return "\n".join(lines) + "\n"


def load_config(path: str | Path) -> PipelineConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def save_config(config: PipelineConfig, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(dump_config(config), encoding="utf-8")
    return path
