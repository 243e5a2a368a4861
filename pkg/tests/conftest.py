import shutil
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gg.config import ToolchainSpec

HOST_CC = shutil.which("gcc") or shutil.which("cc")
CLANG = shutil.which("clang")

X86_TOOLCHAIN = ToolchainSpec(command=HOST_CC or "gcc", flags="-DMR_HOSTED")
ARMV8_TOOLCHAIN = ToolchainSpec(
    command=CLANG or "clang",
    flags="--target=aarch64-linux-gnu -static -nostdlib -fuse-ld=lld"
          " -fno-stack-protector -no-pie -ffreestanding",
)
ARMV5_TOOLCHAIN = ToolchainSpec(
    command=CLANG or "clang",
    flags="--target=arm-linux-gnueabi -static -nostdlib -fuse-ld=lld"
          " -fno-stack-protector -no-pie -ffreestanding -marm",
)
RISCV_TOOLCHAIN = ToolchainSpec(
    command=CLANG or "clang",
    flags="--target=riscv64-linux-gnu -static -nostdlib -fuse-ld=lld"
          " -fno-stack-protector -no-pie -ffreestanding",
)

needs_host_cc = pytest.mark.skipif(HOST_CC is None, reason="no host C compiler")
needs_clang = pytest.mark.skipif(CLANG is None, reason="clang not installed")
needs_gcov = pytest.mark.skipif(
    HOST_CC is None or shutil.which("gcov") is None, reason="gcov not installed")


@pytest.fixture(scope="session")
def x86_toolchain():
    if HOST_CC is None:
        pytest.skip("no host C compiler")
    return X86_TOOLCHAIN


@pytest.fixture(scope="session")
def armv8_toolchain():
    if CLANG is None:
        pytest.skip("clang not installed")
    return ARMV8_TOOLCHAIN
