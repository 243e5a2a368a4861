#!/usr/bin/env python3
"""Regenerate the shipped per-ISA term lists under src/gg/isa_terms/.

Each list holds the ISA's general-purpose register names plus the 64 most
frequent opcodes measured over the bundled desk corpus (all programs,
drivers and runtime sources, O0 and O2), counted with the package's own
opcode histogram machinery. Run from the repo root with the desk
toolchains installed.
"""

import shlex
import subprocess
import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from gg import asmtext, desk  # noqa: E402

TOP_OPCODES = 64

REGISTERS = {
    "x86_64": (
        [f"%r{name}" for name in ("ax", "bx", "cx", "dx", "si", "di", "bp", "sp")]
        + [f"%e{name}" for name in ("ax", "bx", "cx", "dx", "si", "di", "bp", "sp")]
        + [f"%r{i}" for i in range(8, 16)]
        + [f"%r{i}d" for i in range(8, 16)]
    ),
    "armv8": ([f"x{i}" for i in range(31)] + [f"w{i}" for i in range(31)]
              + ["sp", "xzr", "wzr", "lr"]),
    "armv5": ([f"r{i}" for i in range(16)] + ["sp", "lr", "pc", "fp", "ip"]),
    "riscv64": ([f"x{i}" for i in range(32)]
                + ["zero", "ra", "sp", "gp", "tp", "fp"]
                + [f"t{i}" for i in range(7)]
                + [f"s{i}" for i in range(12)]
                + [f"a{i}" for i in range(8)]),
}


def collect_opcode_counts(isa: str, workdir: Path) -> dict[str, int]:
    toolchain = desk.desk_toolchains()[isa]
    sources = (desk.program_sources()
               + sorted(desk.tests_dir().glob("*_test.c"))
               + sorted(desk.tests_dir().glob("*/main.c"))
               + [Path(p) for p in desk.runtime_sources()])
    counts: dict[str, int] = {}
    for opt in ("O0", "O2"):
        for source in sources:
            out = workdir / f"{source.stem}_{isa}_{opt}.s"
            cmd = [toolchain.command, "-S", f"-{opt}", *shlex.split(toolchain.flags),
                   f"-I{desk.runtime_dir()}", "-o", str(out), str(source)]
            proc = subprocess.run(cmd, capture_output=True, text=True)
            if proc.returncode != 0:
                print(f"warning: {source.name} failed for {isa} -{opt}",
                      file=sys.stderr)
                continue
            normalized = asmtext.normalize(out.read_text(), isa)
            hist = asmtext.opcode_histogram(asmtext.extract_instructions(normalized))
            for opcode, count in hist.counts.items():
                counts[opcode] = counts.get(opcode, 0) + count
    return counts


def main() -> int:
    out_dir = Path(__file__).parent.parent / "src" / "gg" / "isa_terms"
    out_dir.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory(prefix="ggterms") as tmp:
        for isa in asmtext.ISAS:
            counts = collect_opcode_counts(isa, Path(tmp))
            ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
            opcodes = [op for op, _ in ranked[:TOP_OPCODES]]
            lines = [
                f"# {isa} tokenizer extension terms",
                "# general-purpose register names plus the 64 most frequent",
                "# opcodes measured on the bundled desk corpus (O0 and O2),",
                "# regenerated by tools/regen_isa_terms.py",
            ]
            lines += REGISTERS[isa]
            lines += opcodes
            (out_dir / f"{isa}.txt").write_text("\n".join(lines) + "\n",
                                                encoding="utf-8")
            print(f"{isa}: {len(REGISTERS[isa])} registers, "
                  f"{len(opcodes)} opcodes ({len(counts)} distinct seen)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
