"""Bundled desk corpus: small C programs with unit-test bundles.

Ships with the package so the pipeline can be exercised end to end on a
bare machine: programs under `programs/`, driver bundles under `tests/`
(single `<id>_test.c` drivers plus a couple of makefile-style project
directories), and the freestanding `runtime/` the drivers link against.
"""

import shutil
from pathlib import Path

from ..config import PipelineConfig, ToolchainSpec

_ROOT = Path(__file__).parent

FREESTANDING_FLAGS = ("-static -nostdlib -fuse-ld=lld -fno-stack-protector"
                      " -no-pie -ffreestanding")


def root() -> Path:
    return _ROOT


def runtime_dir() -> Path:
    return _ROOT / "runtime"


def programs_dir() -> Path:
    return _ROOT / "programs"


def tests_dir() -> Path:
    return _ROOT / "tests"


def program_sources() -> list[Path]:
    return sorted(programs_dir().glob("*.c"))


def program_ids() -> list[str]:
    return [path.stem for path in program_sources()]


def runtime_sources() -> list[str]:
    return [str(runtime_dir() / "minirt.c"), str(runtime_dir() / "start.c")]


def include_dirs() -> list[str]:
    return [str(runtime_dir())]


def desk_toolchains() -> dict[str, ToolchainSpec]:
    """Toolchains for this host: native cc for x86_64, clang cross otherwise."""
    host_cc = shutil.which("gcc") or shutil.which("cc") or "gcc"
    clang = shutil.which("clang") or "clang"
    return {
        "x86_64": ToolchainSpec(command=host_cc, flags="-DMR_HOSTED"),
        "armv8": ToolchainSpec(
            command=clang, flags=f"--target=aarch64-linux-gnu {FREESTANDING_FLAGS}"),
        "armv5": ToolchainSpec(
            command=clang, flags=f"--target=arm-linux-gnueabi -marm {FREESTANDING_FLAGS}"),
        "riscv64": ToolchainSpec(
            command=clang, flags=f"--target=riscv64-linux-gnu {FREESTANDING_FLAGS}"),
    }


def desk_config(workdir: str | Path, isas: list[str] | None = None,
                opts: list[str] | None = None) -> PipelineConfig:
    """Pipeline configuration wired to the bundled corpus on this host."""
    config = PipelineConfig()
    config.workdir = str(workdir)
    config.toolchains = desk_toolchains()
    config.runners = {
        "x86_64": "native",
        "armv8": "emulate:gg-emu",
    }
    config.isas = isas or ["x86_64", "armv8"]
    config.opts = opts or ["O0", "O2"]
    config.tests_dir = str(tests_dir())
    config.runtime_dir = str(runtime_dir())
    return config
