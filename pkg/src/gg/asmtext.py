"""ISA-aware assembly text processing.

Normalization, instruction extraction, opcode histograms and word counts.
All functions are pure; everything downstream (corpus hashing, similarity,
edit distance, fertility) builds on the normalized form produced here.
"""

from dataclasses import dataclass, field

ISAS = ("x86_64", "armv8", "armv5", "riscv64")

# Comment leaders per assembler dialect. `;` is accepted everywhere. On
# aarch64 `@` appears inside directives (`.type f,@function`), so a leader
# only starts a comment at the beginning of a line or after whitespace.
_COMMENT_LEADERS = {
    "x86_64": ("#", ";"),
    "armv8": ("//", ";", "@"),
    "armv5": ("@", "//", ";"),
    "riscv64": ("#", ";"),
}

_DROP_DIRECTIVES = (".ident", ".file")


@dataclass(frozen=True)
class Instruction:
    opcode: str
    operands: list[str]
    line_no: int


@dataclass(frozen=True)
class OpcodeHistogram:
    counts: dict[str, int]
    total: int

    @classmethod
    def empty(cls) -> "OpcodeHistogram":
        return cls(counts={}, total=0)


@dataclass
class ParseDiagnostics:
    skipped_lines: list[str] = field(default_factory=list)

    @property
    def skipped(self) -> int:
        return len(self.skipped_lines)


def comment_leaders(isa: str) -> tuple[str, ...]:
    try:
        return _COMMENT_LEADERS[isa]
    except KeyError:
        raise ValueError(f"unknown isa: {isa}") from None


def _scan_line(line: str, leaders: tuple[str, ...]) -> str:
    """Strip comments and collapse blank runs on one line.

    Double-quoted string literals are copied verbatim (backslash escapes
    honored), so `.ascii "a # b"` survives intact. A comment leader only
    counts when it sits at a token boundary.
    """
    out: list[str] = []
    i = 0
    n = len(line)
    in_string = False
    at_boundary = True
    pending_space = False
    while i < n:
        ch = line[i]
        if in_string:
            out.append(ch)
            if ch == "\\" and i + 1 < n:
                out.append(line[i + 1])
                i += 2
                continue
            if ch == '"':
                in_string = False
                at_boundary = False
            i += 1
            continue
        if ch in (" ", "\t"):
            pending_space = True
            at_boundary = True
            i += 1
            continue
        if at_boundary and any(line.startswith(led, i) for led in leaders):
            break
        if pending_space and out:
            out.append(" ")
        pending_space = False
        at_boundary = False
        if ch == '"':
            in_string = True
        out.append(ch)
        i += 1
    return "".join(out)


def normalize(raw: str, isa: str) -> str:
    """Normalize assembly text for hashing and comparison.

    Comments stripped per dialect, blank runs collapsed, trailing
    whitespace removed, blank lines dropped, `.ident`/`.file` metadata
    removed. Labels and all other directives are preserved. Idempotent.
    """
    leaders = comment_leaders(isa)
    lines: list[str] = []
    for line in raw.splitlines():
        cleaned = _scan_line(line, leaders).rstrip()
        if not cleaned:
            continue
        head = cleaned.split(None, 1)[0]
        if head in _DROP_DIRECTIVES:
            continue
        lines.append(cleaned)
    return "\n".join(lines) + ("\n" if lines else "")


def split_operands(text: str) -> list[str]:
    """Split an operand list on top-level commas.

    Commas inside (), [], {} or double quotes do not split, so memory
    operands like `[fp, #-8]` and register lists like `{r4, lr}` stay
    whole.
    """
    operands: list[str] = []
    depth = 0
    in_string = False
    current: list[str] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if in_string:
            current.append(ch)
            if ch == "\\" and i + 1 < len(text):
                current.append(text[i + 1])
                i += 2
                continue
            if ch == '"':
                in_string = False
            i += 1
            continue
        if ch == '"':
            in_string = True
            current.append(ch)
        elif ch in "([{":
            depth += 1
            current.append(ch)
        elif ch in ")]}":
            depth = max(0, depth - 1)
            current.append(ch)
        elif ch == "," and depth == 0:
            operands.append("".join(current).strip())
            current = []
        else:
            current.append(ch)
        i += 1
    tail = "".join(current).strip()
    if tail:
        operands.append(tail)
    return [op for op in operands if op]


def _strip_labels(line: str) -> str:
    """Remove leading label definitions (`foo:` tokens) from a line."""
    rest = line
    while True:
        parts = rest.split(None, 1)
        if parts and parts[0].endswith(":"):
            rest = parts[1] if len(parts) > 1 else ""
        else:
            return rest


def extract_with_diagnostics(text: str) -> tuple[list[Instruction], ParseDiagnostics]:
    """Parse normalized text into instructions plus a skip tally."""
    instructions: list[Instruction] = []
    diags = ParseDiagnostics()
    for line_no, line in enumerate(text.splitlines(), start=1):
        rest = _strip_labels(line)
        if not rest:
            continue
        head, _, tail = rest.partition(" ")
        if head.startswith("."):
            continue
        opcode = head.lower()
        if not opcode or any(c.isspace() for c in opcode) or "," in opcode:
            diags.skipped_lines.append(line)
            continue
        instructions.append(
            Instruction(opcode=opcode, operands=split_operands(tail), line_no=line_no)
        )
    return instructions, diags


def extract_instructions(text: str) -> list[Instruction]:
    return extract_with_diagnostics(text)[0]


def opcode_histogram(instructions: list[Instruction]) -> OpcodeHistogram:
    counts: dict[str, int] = {}
    for ins in instructions:
        counts[ins.opcode] = counts.get(ins.opcode, 0) + 1
    return OpcodeHistogram(counts=counts, total=len(instructions))


def count_words(text: str) -> int:
    """Number of maximal non-whitespace runs (fertility denominator)."""
    return len(text.split())


def line_tokens(line: str) -> list[str]:
    """Lex one normalized line into comparison units.

    Label tokens stand alone; everything else is a leading mnemonic or
    directive plus comma-split operands.
    """
    tokens: list[str] = []
    rest = line
    while True:
        parts = rest.split(None, 1)
        if parts and parts[0].endswith(":"):
            tokens.append(parts[0])
            rest = parts[1] if len(parts) > 1 else ""
        else:
            break
    if rest:
        head, _, tail = rest.partition(" ")
        tokens.append(head)
        tokens.extend(split_operands(tail))
    return tokens


def token_stream(text: str) -> list[str]:
    """Flatten normalized text into the token units used for edit distance."""
    stream: list[str] = []
    for line in text.splitlines():
        stream.extend(line_tokens(line))
    return stream
