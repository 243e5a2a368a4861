"""Command-line entry: run a static AArch64 binary under emulation.

Exit status mirrors the shell convention: the guest's own exit code on
normal termination, 139 on a memory fault, 132 on an undecodable or
unsupported instruction, 125 on loader/usage errors.
"""

import argparse
import sys

from .arm64 import DEFAULT_MAX_INSTRUCTIONS, EmuFault, Emulator
from .elf import ElfFormatError, load_elf

FAULT_EXIT = {"mem": 139, "decode": 132, "sys": 132, "limit": 124}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="gg-emu",
        description="user-mode emulator for statically linked AArch64 binaries")
    parser.add_argument("binary", help="path to the AArch64 ELF executable")
    parser.add_argument("args", nargs="*", help="argv for the guest")
    parser.add_argument("--max-instructions", type=int,
                        default=DEFAULT_MAX_INSTRUCTIONS)
    opts = parser.parse_args(argv)
    try:
        image = load_elf(opts.binary)
        emulator = Emulator(image, argv=[opts.binary, *opts.args],
                            max_instructions=opts.max_instructions)
        emulator.echo = True
        return emulator.run()
    except ElfFormatError as exc:
        print(f"gg-emu: {exc}", file=sys.stderr)
        return 125
    except EmuFault as exc:
        print(f"gg-emu: fault: {exc}", file=sys.stderr)
        return FAULT_EXIT.get(exc.kind, 132)


if __name__ == "__main__":
    sys.exit(main())
