"""Minimal user-mode emulator for statically linked AArch64 binaries.

Bundled so cross-ISA candidates can be executed on hosts without a
hardware target or an external emulator. Supports little-endian ET_EXEC
images, the integer instruction set emitted by compilers for plain C
code, and the small set of Linux syscalls freestanding test drivers use
(write / exit / exit_group / brk). No floating point, no SIMD, no
threads.
"""

from .elf import ElfFormatError, load_elf
from .arm64 import EmuFault, Emulator, run_elf

__all__ = ["ElfFormatError", "EmuFault", "Emulator", "load_elf", "run_elf"]
