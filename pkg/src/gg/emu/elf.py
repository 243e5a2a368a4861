"""Bare-bones ELF64 little-endian executable loader."""

import struct
from dataclasses import dataclass
from pathlib import Path

EM_AARCH64 = 183
PT_LOAD = 1

PF_X = 1
PF_W = 2
PF_R = 4


class ElfFormatError(Exception):
    pass


@dataclass(frozen=True)
class Segment:
    vaddr: int
    data: bytes
    memsz: int
    flags: int


@dataclass(frozen=True)
class Image:
    entry: int
    machine: int
    segments: tuple[Segment, ...]


def load_elf(path: str | Path) -> Image:
    blob = Path(path).read_bytes()
    if len(blob) < 64 or blob[:4] != b"\x7fELF":
        raise ElfFormatError(f"{path}: not an ELF file")
    ei_class, ei_data = blob[4], blob[5]
    if ei_class != 2 or ei_data != 1:
        raise ElfFormatError(f"{path}: only little-endian ELF64 is supported")
    e_type, e_machine = struct.unpack_from("<HH", blob, 16)
    if e_type not in (2, 3):  # EXEC or DYN
        raise ElfFormatError(f"{path}: not an executable (e_type={e_type})")
    if e_type == 3:
        raise ElfFormatError(
            f"{path}: position-independent executables are not supported; "
            "link with -no-pie -static")
    (e_entry, e_phoff) = struct.unpack_from("<QQ", blob, 24)
    e_phentsize, e_phnum = struct.unpack_from("<HH", blob, 54)
    segments: list[Segment] = []
    for i in range(e_phnum):
        off = e_phoff + i * e_phentsize
        p_type, p_flags, p_offset, p_vaddr, _p_paddr, p_filesz, p_memsz = \
            struct.unpack_from("<IIQQQQQ", blob, off)
        if p_type != PT_LOAD:
            continue
        segments.append(Segment(
            vaddr=p_vaddr,
            data=blob[p_offset:p_offset + p_filesz],
            memsz=p_memsz,
            flags=p_flags,
        ))
    if not segments:
        raise ElfFormatError(f"{path}: no loadable segments")
    return Image(entry=e_entry, machine=e_machine, segments=tuple(segments))
