"""Cross-ISA similarity (character n-gram F-score) and opcode-shift analysis."""

from dataclasses import dataclass, field

from .asmtext import OpcodeHistogram
from .errors import EmptyHistogram

DEFAULT_MAX_N = 6
DEFAULT_BETA = 2.0


def _char_ngram_counts(text: str, max_n: int) -> list[dict[str, int]]:
    """Per-order n-gram multisets over the whitespace-stripped text."""
    chars = "".join(text.split())
    per_order: list[dict[str, int]] = []
    for n in range(1, max_n + 1):
        counts: dict[str, int] = {}
        for i in range(len(chars) - n + 1):
            gram = chars[i:i + n]
            counts[gram] = counts.get(gram, 0) + 1
        per_order.append(counts)
    return per_order


def chrf(reference: str, hypothesis: str, max_n: int = DEFAULT_MAX_N,
         beta: float = DEFAULT_BETA) -> float:
    """Character n-gram F-beta score in percent.

    Precision and recall over n-gram multisets for n = 1..max_n are
    averaged uniformly (orders empty on both sides are skipped), then
    combined as F = (1+b^2)PR/(b^2 P + R). Whitespace is excluded from
    the character stream. Two empty strings score 100, exactly one
    empty scores 0.
    """
    ref_empty = not reference.strip()
    hyp_empty = not hypothesis.strip()
    if ref_empty and hyp_empty:
        return 100.0
    if ref_empty or hyp_empty:
        return 0.0
    ref_orders = _char_ngram_counts(reference, max_n)
    hyp_orders = _char_ngram_counts(hypothesis, max_n)
    precision_sum = 0.0
    recall_sum = 0.0
    orders = 0
    for ref_counts, hyp_counts in zip(ref_orders, hyp_orders):
        ref_total = sum(ref_counts.values())
        hyp_total = sum(hyp_counts.values())
        if ref_total == 0 and hyp_total == 0:
            continue
        orders += 1
        matched = sum(min(count, ref_counts.get(gram, 0))
                      for gram, count in hyp_counts.items())
        precision_sum += matched / hyp_total if hyp_total else 0.0
        recall_sum += matched / ref_total if ref_total else 0.0
    if orders == 0:
        return 0.0
    precision = precision_sum / orders
    recall = recall_sum / orders
    denominator = beta * beta * precision + recall
    if denominator == 0.0:
        return 0.0
    return (1.0 + beta * beta) * precision * recall / denominator * 100.0


@dataclass
class SimilarityReport:
    base_isa: str
    opt: str
    # per other ISA: mean score, program count, per-program scores
    means: dict[str, float] = field(default_factory=dict)
    counts: dict[str, int] = field(default_factory=dict)
    scores: dict[str, dict[str, float]] = field(default_factory=dict)
    skipped: dict[str, list[str]] = field(default_factory=dict)


def isa_similarity(corpus, base_isa: str, other_isas: list[str], opt: str) -> SimilarityReport:
    """Mean chrF between the base ISA's assembly and each other ISA's.

    `corpus` provides `program_ids()` and `normalized_text(id, isa, opt)`
    returning None for missing artifacts; programs missing either side
    are skipped and noted.
    """
    report = SimilarityReport(base_isa=base_isa, opt=opt)
    for other in other_isas:
        per_program: dict[str, float] = {}
        skipped: list[str] = []
        for program_id in corpus.program_ids():
            base_text = corpus.normalized_text(program_id, base_isa, opt)
            other_text = corpus.normalized_text(program_id, other, opt)
            if base_text is None or other_text is None:
                skipped.append(program_id)
                continue
            per_program[program_id] = chrf(base_text, other_text)
        report.scores[other] = per_program
        report.counts[other] = len(per_program)
        report.skipped[other] = skipped
        if per_program:
            report.means[other] = sum(per_program.values()) / len(per_program)
    return report


@dataclass(frozen=True)
class OpcodeShiftRow:
    opcode: str
    share_low: float
    share_high: float

    @property
    def delta(self) -> float:
        return self.share_high - self.share_low


@dataclass
class OpcodeShift:
    rows: list[OpcodeShiftRow]
    top_k: int

    def top_rows(self) -> list[OpcodeShiftRow]:
        ranked = sorted(self.rows, key=lambda r: (-abs(r.delta), r.opcode))
        return ranked[: self.top_k]


def opcode_shift(hist_low: OpcodeHistogram, hist_high: OpcodeHistogram,
                 top_k: int = 15) -> OpcodeShift:
    """Percentage-share shift of each opcode between two optimization levels."""
    if hist_low.total == 0 or hist_high.total == 0:
        raise EmptyHistogram("opcode shift needs two non-empty histograms")
    opcodes = sorted(set(hist_low.counts) | set(hist_high.counts))
    rows = [
        OpcodeShiftRow(
            opcode=op,
            share_low=hist_low.counts.get(op, 0) / hist_low.total * 100.0,
            share_high=hist_high.counts.get(op, 0) / hist_high.total * 100.0,
        )
        for op in opcodes
    ]
    return OpcodeShift(rows=rows, top_k=top_k)
