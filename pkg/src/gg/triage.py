"""Failure triage: error-class rules, token edit distance, line alignment.

Classification is deterministic for a fixed (outcome, pair, candidate):
build-log regexes handle link/assembly failures, crash signals map to
stack/memory errors, and everything else is compared instruction by
instruction against the reference to spot register and immediate slips.
"""

import re
from dataclasses import dataclass, field

from . import asmtext
from .corpus import TranspilePair
from .verify import (
    STATUS_BUILD_FAIL,
    STATUS_CONTEXT_OVERFLOW,
    STATUS_PASS,
    STATUS_RUNTIME_CRASH,
    VerificationOutcome,
)

CLASS_CONTEXT_OVERFLOW = "ContextOverflow"
CLASS_DUPLICATE_FUNCTION = "DuplicateFunction"
CLASS_STACK_MEMORY = "StackMemory"
CLASS_MISSING_FUNCTION = "MissingFunction"
CLASS_UNDEFINED_LABEL = "UndefinedLabel"
CLASS_REGISTER_MISLABEL = "RegisterMislabel"
CLASS_INCORRECT_IMMEDIATE = "IncorrectImmediate"
CLASS_UNCLASSIFIED = "Unclassified"

ERROR_CLASSES = (
    CLASS_CONTEXT_OVERFLOW, CLASS_DUPLICATE_FUNCTION, CLASS_STACK_MEMORY,
    CLASS_MISSING_FUNCTION, CLASS_UNDEFINED_LABEL, CLASS_REGISTER_MISLABEL,
    CLASS_INCORRECT_IMMEDIATE, CLASS_UNCLASSIFIED,
)

# expected classification per fault-injection rule (see guesser mutations);
# the error taxonomy has no dedicated instruction-sequence class, so that
# rule legitimately lands in Unclassified
EXPECTED_CLASS_BY_RULE = {
    "immediate_value": CLASS_INCORRECT_IMMEDIATE,
    "index_offset": CLASS_INCORRECT_IMMEDIATE,
    "register_overwrite": CLASS_REGISTER_MISLABEL,
    "instruction_sequence": CLASS_UNCLASSIFIED,
    "memory_offset": CLASS_INCORRECT_IMMEDIATE,
}

# diagnostic wording varies by toolchain; patterns are per-family and
# extendable by callers
DUPLICATE_SYMBOL_PATTERNS = [
    re.compile(r"multiple definition of [`']?([^\s'`]+)"),
    re.compile(r"duplicate symbol:? (\S+)"),
    re.compile(r"symbol [`']?([^\s'`]+)[`']? is already defined"),
]
UNDEFINED_SYMBOL_PATTERNS = [
    re.compile(r"undefined reference to [`']?([^\s'`]+)"),
    re.compile(r"undefined symbol:? (\S+)"),
]

_LABEL_LIKE = re.compile(r"^\.?L[\w.]*$|^\.")

_REGISTER_TOKEN = re.compile(
    r"%?\b(?:[wxr]\d{1,2}|[re]?(?:ax|bx|cx|dx|si|di|sp|bp)|r\d{1,2}[dwb]?"
    r"|sp|fp|lr|pc|wzr|xzr)\b")
_NUMBER_TOKEN = re.compile(r"-?\d+")


@dataclass
class TriageRecord:
    program_id: str
    classes: list[str]
    edit_distance: int
    notes: str = ""

    def __post_init__(self):
        if not self.classes:
            raise ValueError("a triage record carries at least one class")
        if self.edit_distance < 0:
            raise ValueError("edit distance is non-negative")


# --- token edit distance -----------------------------------------------------

def token_edit_distance(a: list[str], b: list[str]) -> int:
    """Unit-cost Levenshtein over token sequences, two-row DP."""
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, token_a in enumerate(a, start=1):
        current = [i] + [0] * len(b)
        for j, token_b in enumerate(b, start=1):
            cost = 0 if token_a == token_b else 1
            current[j] = min(previous[j] + 1,        # delete
                             current[j - 1] + 1,     # insert
                             previous[j - 1] + cost  # substitute
                             )
        previous = current
    return previous[len(b)]


def edit_distance(reference_asm: str, candidate_asm: str) -> int:
    """Token-level distance over the flattened normalized texts."""
    return token_edit_distance(asmtext.token_stream(reference_asm),
                               asmtext.token_stream(candidate_asm))


# --- instruction alignment ---------------------------------------------------

KIND_MATCHED = "matched"
KIND_SUBSTITUTED = "substituted"
KIND_INSERTED = "inserted"
KIND_DELETED = "deleted"


@dataclass(frozen=True)
class AlignedPair:
    kind: str
    reference: asmtext.Instruction | None
    candidate: asmtext.Instruction | None
    cost: int = 0


def _instruction_tokens(ins: asmtext.Instruction) -> list[str]:
    return [ins.opcode, *ins.operands]


def align_instructions(reference_asm: str, candidate_asm: str) -> list[AlignedPair]:
    """Global alignment over instruction lines minimizing token edit cost."""
    ref = asmtext.extract_instructions(reference_asm)
    cand = asmtext.extract_instructions(candidate_asm)
    ref_tokens = [_instruction_tokens(i) for i in ref]
    cand_tokens = [_instruction_tokens(i) for i in cand]
    n, m = len(ref), len(cand)
    # dp[i][j]: min cost aligning ref[:i] with cand[:j]
    dp = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        dp[i][0] = dp[i - 1][0] + len(ref_tokens[i - 1])
    for j in range(1, m + 1):
        dp[0][j] = dp[0][j - 1] + len(cand_tokens[j - 1])
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            sub = dp[i - 1][j - 1] + token_edit_distance(ref_tokens[i - 1],
                                                         cand_tokens[j - 1])
            dele = dp[i - 1][j] + len(ref_tokens[i - 1])
            ins = dp[i][j - 1] + len(cand_tokens[j - 1])
            dp[i][j] = min(sub, dele, ins)
    pairs: list[AlignedPair] = []
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0:
            sub_cost = token_edit_distance(ref_tokens[i - 1], cand_tokens[j - 1])
            if dp[i][j] == dp[i - 1][j - 1] + sub_cost:
                kind = KIND_MATCHED if sub_cost == 0 else KIND_SUBSTITUTED
                pairs.append(AlignedPair(kind=kind, reference=ref[i - 1],
                                         candidate=cand[j - 1], cost=sub_cost))
                i -= 1
                j -= 1
                continue
        if i > 0 and dp[i][j] == dp[i - 1][j] + len(ref_tokens[i - 1]):
            pairs.append(AlignedPair(kind=KIND_DELETED, reference=ref[i - 1],
                                     candidate=None, cost=len(ref_tokens[i - 1])))
            i -= 1
            continue
        pairs.append(AlignedPair(kind=KIND_INSERTED, reference=None,
                                 candidate=cand[j - 1], cost=len(cand_tokens[j - 1])))
        j -= 1
    pairs.reverse()
    return pairs


# --- classification ----------------------------------------------------------

def _classify_build_log(log: str) -> list[str]:
    classes: list[str] = []
    for pattern in DUPLICATE_SYMBOL_PATTERNS:
        if pattern.search(log):
            classes.append(CLASS_DUPLICATE_FUNCTION)
            break
    undefined: list[str] = []
    for pattern in UNDEFINED_SYMBOL_PATTERNS:
        undefined.extend(match.group(1) for match in pattern.finditer(log))
    if undefined:
        if any(_LABEL_LIKE.match(symbol) for symbol in undefined):
            classes.append(CLASS_UNDEFINED_LABEL)
        if any(not _LABEL_LIKE.match(symbol) for symbol in undefined):
            classes.append(CLASS_MISSING_FUNCTION)
    return classes


def _operand_difference_classes(reference: asmtext.Instruction,
                                candidate: asmtext.Instruction) -> set[str]:
    classes: set[str] = set()
    ref_ops, cand_ops = reference.operands, candidate.operands
    for ref_op, cand_op in zip(ref_ops, cand_ops):
        if ref_op == cand_op:
            continue
        ref_regs = _REGISTER_TOKEN.findall(ref_op)
        cand_regs = _REGISTER_TOKEN.findall(cand_op)
        ref_nums = _NUMBER_TOKEN.findall(_REGISTER_TOKEN.sub("", ref_op))
        cand_nums = _NUMBER_TOKEN.findall(_REGISTER_TOKEN.sub("", cand_op))
        if ref_regs != cand_regs:
            classes.add(CLASS_REGISTER_MISLABEL)
        if ref_nums != cand_nums:
            classes.add(CLASS_INCORRECT_IMMEDIATE)
    if len(ref_ops) != len(cand_ops):
        # same opcode, different arity: treat as register-level slip only
        # when registers differ, otherwise leave for other rules
        if _REGISTER_TOKEN.findall(" ".join(ref_ops)) != \
                _REGISTER_TOKEN.findall(" ".join(cand_ops)):
            classes.add(CLASS_REGISTER_MISLABEL)
    return classes


def classify_outcome(outcome: VerificationOutcome, pair: TranspilePair,
                     candidate_text: str | None = None) -> list[str]:
    """Rule-based mapping of one non-Pass outcome to error classes."""
    if outcome.status == STATUS_PASS:
        raise ValueError("only failures are classified")
    if outcome.status == STATUS_CONTEXT_OVERFLOW:
        return [CLASS_CONTEXT_OVERFLOW]
    classes: list[str] = []
    if outcome.status == STATUS_BUILD_FAIL:
        classes.extend(_classify_build_log(outcome.build_log))
        return classes or [CLASS_UNCLASSIFIED]
    if outcome.status == STATUS_RUNTIME_CRASH:
        classes.append(CLASS_STACK_MEMORY)
    if candidate_text is not None:
        isa = pair.target_reference.spec.isa
        normalized = asmtext.normalize(candidate_text, isa)
        aligned = align_instructions(pair.target_reference.normalized_text,
                                     normalized)
        found: set[str] = set()
        for item in aligned:
            if item.kind == KIND_SUBSTITUTED and \
                    item.reference.opcode == item.candidate.opcode:
                found |= _operand_difference_classes(item.reference,
                                                     item.candidate)
        classes.extend(sorted(found))
    if not classes:
        classes.append(CLASS_UNCLASSIFIED)
    return classes


def make_record(outcome: VerificationOutcome, pair: TranspilePair,
                candidate_text: str | None = None,
                notes: str = "") -> TriageRecord:
    classes = classify_outcome(outcome, pair, candidate_text)
    if candidate_text is not None:
        isa = pair.target_reference.spec.isa
        distance = edit_distance(pair.target_reference.normalized_text,
                                 asmtext.normalize(candidate_text, isa))
    else:
        distance = 0
    return TriageRecord(program_id=outcome.program_id, classes=classes,
                        edit_distance=distance, notes=notes)


# --- report ------------------------------------------------------------------

@dataclass
class TriageReport:
    by_class: dict[str, list[str]]  # class -> sorted program ids
    distance_histogram: dict[str, int]  # bucket label -> count
    records: list[TriageRecord] = field(default_factory=list)


_DISTANCE_BUCKETS = ((1, "1"), (2, "2"), (5, "3-5"), (10, "6-10"),
                     (20, "11-20"), (50, "21-50"), (10 ** 9, ">50"))


def _bucket(distance: int) -> str:
    if distance == 0:
        return "0"
    for upper, label in _DISTANCE_BUCKETS:
        if distance <= upper:
            return label
    return ">50"


def triage_report(records: list[TriageRecord]) -> TriageReport:
    """Group records by class (stable: class order, then program id)."""
    by_class: dict[str, list[str]] = {}
    histogram: dict[str, int] = {}
    for record in records:
        for cls in record.classes:
            by_class.setdefault(cls, []).append(record.program_id)
        label = _bucket(record.edit_distance)
        histogram[label] = histogram.get(label, 0) + 1
    ordered = {cls: sorted(by_class[cls])
               for cls in ERROR_CLASSES if cls in by_class}
    return TriageReport(by_class=ordered, distance_histogram=histogram,
                        records=list(records))
