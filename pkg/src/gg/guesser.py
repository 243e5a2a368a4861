"""Candidate translation backends and context-budget handling.

Backends implement `guess(request) -> list[GuessCandidate]`:

* HttpBackend    -- POST {base_url}/v1/transpile, JSON in/out
* CommandBackend -- spawn a command, same JSON on stdin/stdout
* OracleBackend  -- returns the paired reference translation
* MutantBackend  -- oracle plus one seeded semantic fault, for
                    fault-injection testing of the verification harness
"""

import json
import math
import re
import shlex
import subprocess
import urllib.error
import urllib.request
import uuid
from dataclasses import dataclass

from . import asmtext
from .corpus import TranspilePair
from .errors import (
    BackendUnavailable,
    ContextOverflow,
    MutationInapplicable,
    ProtocolError,
    TemplateError,
)
from .tokenlab import Vocab, tokenize

DEFAULT_BEAM_WIDTH = 8
DEFAULT_CONTEXT_WINDOW = 32768
DEFAULT_MAX_NEW_TOKENS = 16384

DEFAULT_TEMPLATE = (
    "transpile {src} -> {dst} at -{opt}\n"
    "<<<ASM\n"
    "{asm}\n"
    "ASM>>>\n"
)

_ASM_BLOCK = re.compile(r"<<<ASM\n(.*)\nASM>>>", re.S)


@dataclass
class GuessRequest:
    source_isa: str
    target_isa: str
    opt: str
    input_asm: str
    beam_width: int = DEFAULT_BEAM_WIDTH
    max_new_tokens: int = DEFAULT_MAX_NEW_TOKENS
    context_window: int = DEFAULT_CONTEXT_WINDOW

    def __post_init__(self):
        if self.beam_width < 1:
            raise ValueError("beam_width must be >= 1")
        if self.context_window <= 0:
            raise ValueError("context_window must be positive")


@dataclass
class GuessCandidate:
    rank: int
    text: str
    score: float | None = None
    truncated: bool = False


@dataclass(frozen=True)
class BudgetVerdict:
    estimated_input_tokens: int
    estimated_total: int
    fits: bool


def estimate_budget(request: GuessRequest, vocab: Vocab,
                    expansion: dict[str, float] | None = None) -> BudgetVerdict:
    """Token budget check: input + projected output vs the context window.

    Output size is projected as input * expansion_factor(target); the
    default factor is 1.0 since CISC/RISC assembly token counts for the
    same program are near parity.
    """
    factor = (expansion or {}).get(request.target_isa, 1.0)
    input_tokens = len(tokenize(vocab, request.input_asm))
    total = input_tokens + math.ceil(input_tokens * factor)
    return BudgetVerdict(
        estimated_input_tokens=input_tokens,
        estimated_total=total,
        fits=total <= request.context_window,
    )


def render_prompt(request: GuessRequest, template: str = DEFAULT_TEMPLATE) -> str:
    """Substitute {src}, {dst}, {opt}, {asm} placeholders; {asm} is required."""
    if "{asm}" not in template:
        raise TemplateError("template lacks the {asm} placeholder")
    return (template
            .replace("{src}", request.source_isa)
            .replace("{dst}", request.target_isa)
            .replace("{opt}", request.opt)
            .replace("{asm}", request.input_asm))


def extract_prompt_asm(prompt: str) -> str:
    """Inverse of the shipped default template: pull the assembly block out."""
    match = _ASM_BLOCK.search(prompt)
    if match is None:
        raise TemplateError("prompt does not contain an assembly block")
    return match.group(1)


def _validate_candidates(raw: list[GuessCandidate]) -> list[GuessCandidate]:
    ranked = sorted(raw, key=lambda c: c.rank)
    if [c.rank for c in ranked] != list(range(len(ranked))):
        raise ProtocolError(
            f"candidate ranks not contiguous from 0: {[c.rank for c in raw]}")
    return ranked


def request_guess(backend, request: GuessRequest,
                  verdict: BudgetVerdict | None = None,
                  override: bool = False) -> list[GuessCandidate]:
    """Fetch candidates; refuses over-budget requests unless overridden."""
    if verdict is not None and not verdict.fits and not override:
        raise ContextOverflow(
            f"estimated {verdict.estimated_total} tokens exceed the window")
    return _validate_candidates(backend.guess(request))


# --- wire protocol -----------------------------------------------------------

def _request_body(request: GuessRequest, request_id: str) -> dict:
    return {
        "request_id": request_id,
        "source_isa": request.source_isa,
        "target_isa": request.target_isa,
        "opt": request.opt,
        "input_asm": request.input_asm,
        "beam_width": request.beam_width,
        "max_new_tokens": request.max_new_tokens,
    }


def _parse_response(payload: bytes, request_id: str) -> list[GuessCandidate]:
    try:
        obj = json.loads(payload.decode("utf-8"))
        if obj.get("request_id") != request_id:
            raise ProtocolError(
                f"response correlates to {obj.get('request_id')!r}, "
                f"expected {request_id!r}")
        return [
            GuessCandidate(rank=int(c["rank"]), text=str(c["text"]),
                           score=c.get("score"),
                           truncated=bool(c.get("truncated", False)))
            for c in obj["candidates"]
        ]
    except (ValueError, KeyError, TypeError, UnicodeDecodeError) as exc:
        raise ProtocolError(f"malformed backend response: {exc}") from exc


class HttpBackend:
    def __init__(self, base_url: str, timeout_s: float = 60.0):
        self.base_url = base_url.rstrip("/")
        self.timeout_s = timeout_s

    def guess(self, request: GuessRequest) -> list[GuessCandidate]:
        request_id = uuid.uuid4().hex
        body = json.dumps(_request_body(request, request_id)).encode("utf-8")
        http_req = urllib.request.Request(
            f"{self.base_url}/v1/transpile", data=body,
            headers={"Content-Type": "application/json"}, method="POST")
        try:
            with urllib.request.urlopen(http_req, timeout=self.timeout_s) as resp:
                payload = resp.read()
        except urllib.error.HTTPError as exc:
            raise BackendUnavailable(f"backend returned HTTP {exc.code}") from exc
        except (urllib.error.URLError, OSError) as exc:
            raise BackendUnavailable(f"backend unreachable: {exc}") from exc
        return _parse_response(payload, request_id)


class CommandBackend:
    def __init__(self, command: str, timeout_s: float = 300.0):
        self.command = command
        self.timeout_s = timeout_s

    def guess(self, request: GuessRequest) -> list[GuessCandidate]:
        request_id = uuid.uuid4().hex
        body = json.dumps(_request_body(request, request_id))
        try:
            proc = subprocess.run(
                shlex.split(self.command), input=body, text=True,
                capture_output=True, timeout=self.timeout_s)
        except FileNotFoundError as exc:
            raise BackendUnavailable(f"backend command not found: {exc}") from exc
        except subprocess.TimeoutExpired as exc:
            raise BackendUnavailable("backend command timed out") from exc
        if proc.returncode != 0:
            raise BackendUnavailable(
                f"backend command exited {proc.returncode}: {proc.stderr[:500]}")
        return _parse_response(proc.stdout.encode("utf-8"), request_id)


class OracleBackend:
    """Answers with the paired reference translation (identity pipeline)."""

    def __init__(self, pairs: list[TranspilePair]):
        self._by_input = {
            pair.source.normalized_text: pair.target_reference.normalized_text
            for pair in pairs
        }

    def guess(self, request: GuessRequest) -> list[GuessCandidate]:
        reference = self._by_input.get(request.input_asm)
        if reference is None:
            raise ProtocolError("oracle has no reference for this input")
        return [GuessCandidate(rank=0, text=reference)]


# --- mutation rules ----------------------------------------------------------
#
# Each rule handles both the RISC flavor (`#imm`, `[base, #off]`, w/x/r
# registers) and AT&T x86 (`$imm`, `disp(%base)`, %registers), applies to
# the first matching site only, and always yields assemblable output.

_GPR = re.compile(r"^(?:[wx](?:[0-9]|1[0-9]|2[0-8])|r(?:[0-9]|1[0-2]))$")
_PLAIN_IMM = re.compile(r"^#(-?\d+)$")
_MEM_IMM = re.compile(r"^(\[[^\]]*#)(-?\d+)(\]!?)$")
_ATT_IMM = re.compile(r"^\$(-?\d+)$")
_ATT_MEM = re.compile(r"^(-?\d+)(\(%[a-z0-9]+\))$")
_ATT_GPR = re.compile(r"^%(?:e|r)?(?:ax|bx|cx|dx|si|di|8|9|10|11|12|13|14|15)[dwb]?$")

# opcodes whose immediate can be perturbed and still assemble
_IMMEDIATE_OPS = {"asr", "lsr", "lsl", "ror", "mov", "movz", "movn", "movk",
                  "cmp", "cmn"}
_ATT_IMMEDIATE_OPS = ("sal", "sar", "shl", "shr", "mov", "cmp")
_INDEX_OPS = {"add", "sub", "adds", "subs"}
_ATT_INDEX_OPS = ("add", "sub")
_MEMORY_OPS_PREFIX = ("ldr", "str", "ldu", "stu", "ldp", "stp")
_ATT_MEMORY_OPS = ("mov", "add", "sub", "cmp", "lea")
_SELECT_OPS = {"cset", "csel", "csinc", "csinv", "csneg", "csetm"}
_OVERWRITE_OPS = {"mov", "add", "sub", "mul", "ldr"}

_ATT_REG_CYCLE = {"ax": "cx", "cx": "dx", "dx": "ax", "si": "di", "di": "si",
                  "bx": "cx"}


def _att_base(opcode: str, bases: tuple[str, ...]) -> bool:
    return (opcode in bases
            or (opcode[:-1] in bases and opcode[-1] in "bwlq"))


def _perturb(value: int) -> int:
    return value - 1 if value > 0 else value + 1


def _rewrite_lines(text: str, rewrite) -> str:
    """Apply `rewrite(opcode, operands, line)` to each instruction line
    until it returns replacement lines; single substitution per text."""
    lines = text.splitlines()
    for idx, line in enumerate(lines):
        tokens = asmtext.line_tokens(line)
        if not tokens or tokens[0].endswith(":") or tokens[0].startswith("."):
            continue
        replacement = rewrite(tokens[0].lower(), tokens[1:], line)
        if replacement is not None:
            lines[idx: idx + 1] = replacement
            return "\n".join(lines) + "\n"
    raise MutationInapplicable("no matching site in this text")


def _format(opcode: str, operands: list[str]) -> str:
    return f"{opcode} {', '.join(operands)}" if operands else opcode


def _perturb_immediate(operands: list[str], at: int, pattern, prefix: str,
                       skip_zero: bool = False) -> list[str] | None:
    match = pattern.match(operands[at])
    if not match:
        return None
    value = int(match.group(1))
    if skip_zero and value == 0:
        return None
    out = list(operands)
    out[at] = f"{prefix}{_perturb(value)}"
    return out


def mutate_immediate_value(text: str) -> str:
    def rewrite(opcode, operands, _line):
        if opcode in _IMMEDIATE_OPS and operands:
            new = _perturb_immediate(operands, -1, _PLAIN_IMM, "#")
            if new:
                return [_format(opcode, new)]
        if _att_base(opcode, _ATT_IMMEDIATE_OPS) and operands:
            new = _perturb_immediate(operands, 0, _ATT_IMM, "$")
            if new:
                return [_format(opcode, new)]
        return None
    return _rewrite_lines(text, rewrite)


def mutate_index_offset(text: str) -> str:
    def rewrite(opcode, operands, _line):
        # stack-pointer adjustments are frame plumbing, not index math
        if opcode in _INDEX_OPS and operands and operands[0] != "sp":
            new = _perturb_immediate(operands, -1, _PLAIN_IMM, "#", skip_zero=True)
            if new:
                return [_format(opcode, new)]
        if (_att_base(opcode, _ATT_INDEX_OPS) and operands
                and operands[-1] not in ("%rsp", "%esp")):
            new = _perturb_immediate(operands, 0, _ATT_IMM, "$", skip_zero=True)
            if new:
                return [_format(opcode, new)]
        return None
    return _rewrite_lines(text, rewrite)


def mutate_register_overwrite(text: str) -> str:
    def rewrite(opcode, operands, _line):
        if opcode in _OVERWRITE_OPS and len(operands) >= 2:
            reg = operands[0]
            if _GPR.match(reg):
                number = int(re.sub(r"\D", "", reg))
                replacement = f"{reg.rstrip('0123456789')}{number + 1}"
                if _GPR.match(replacement) and replacement not in operands:
                    return [_format(opcode, [replacement] + operands[1:])]
        # AT&T: destination is the last operand
        if _att_base(opcode, ("mov", "add", "sub", "lea", "imul")) and operands:
            reg = operands[-1]
            if _ATT_GPR.match(reg):
                for old, new in _ATT_REG_CYCLE.items():
                    if old in reg:
                        replacement = reg.replace(old, new)
                        if replacement not in operands:
                            return [_format(opcode,
                                            operands[:-1] + [replacement])]
        return None
    return _rewrite_lines(text, rewrite)


def mutate_instruction_sequence(text: str) -> str:
    def rewrite(opcode, operands, _line):
        if opcode in _SELECT_OPS and operands:
            dest = operands[0]
            return [_format("mov", [dest, "#0"]),
                    _format("orr", [dest, dest, "#1"])]
        if opcode.startswith("set") and len(opcode) <= 5 and operands:
            dest = operands[0]
            return [_format("movb", ["$0", dest]),
                    _format("orb", ["$1", dest])]
        return None
    return _rewrite_lines(text, rewrite)


def mutate_memory_offset(text: str) -> str:
    def rewrite(opcode, operands, _line):
        if opcode.startswith(_MEMORY_OPS_PREFIX):
            for i, operand in enumerate(operands):
                match = _MEM_IMM.match(operand)
                if match:
                    offset = int(match.group(2))
                    new_offset = offset - 4 if offset >= 4 else offset + 4
                    out = list(operands)
                    out[i] = f"{match.group(1)}{new_offset}{match.group(3)}"
                    return [_format(opcode, out)]
        if _att_base(opcode, _ATT_MEMORY_OPS):
            for i, operand in enumerate(operands):
                match = _ATT_MEM.match(operand)
                if match:
                    offset = int(match.group(1))
                    new_offset = offset - 4 if offset >= 4 else offset + 4
                    out = list(operands)
                    out[i] = f"{new_offset}{match.group(2)}"
                    return [_format(opcode, out)]
        return None
    return _rewrite_lines(text, rewrite)


MUTATION_RULES = {
    "immediate_value": mutate_immediate_value,
    "index_offset": mutate_index_offset,
    "register_overwrite": mutate_register_overwrite,
    "instruction_sequence": mutate_instruction_sequence,
    "memory_offset": mutate_memory_offset,
}

RULE_ORDER = list(MUTATION_RULES)


def apply_mutation(text: str, rule: str) -> str:
    if rule == "auto":
        for name in RULE_ORDER:
            try:
                return MUTATION_RULES[name](text)
            except MutationInapplicable:
                continue
        raise MutationInapplicable("no rule applies to this text")
    try:
        mutate = MUTATION_RULES[rule]
    except KeyError:
        raise ValueError(f"unknown mutation rule {rule!r}; "
                         f"known: {', '.join(RULE_ORDER)} or 'auto'") from None
    return mutate(text)


class MutantBackend:
    """Oracle with one injected semantic fault per program."""

    def __init__(self, pairs: list[TranspilePair], rule: str = "auto"):
        if rule != "auto" and rule not in MUTATION_RULES:
            raise ValueError(f"unknown mutation rule {rule!r}")
        self.rule = rule
        self._oracle = OracleBackend(pairs)

    def guess(self, request: GuessRequest) -> list[GuessCandidate]:
        reference = self._oracle.guess(request)[0].text
        return [GuessCandidate(rank=0, text=apply_mutation(reference, self.rule))]


def make_backend(kind: str, *, pairs=None, url: str = "", command: str = "",
                 mutant_rule: str = "auto", timeout_s: float = 300.0):
    if kind == "oracle":
        return OracleBackend(pairs or [])
    if kind == "mutant":
        return MutantBackend(pairs or [], rule=mutant_rule)
    if kind == "http":
        if not url:
            raise ValueError("http backend needs a base URL")
        return HttpBackend(url, timeout_s=timeout_s)
    if kind == "command":
        if not command:
            raise ValueError("command backend needs a command")
        return CommandBackend(command, timeout_s=timeout_s)
    raise ValueError(f"unknown backend kind {kind!r}")
