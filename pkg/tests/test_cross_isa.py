"""Exercises the armv5 / riscv64 corpus and analysis paths on real
compiler output (no execution: those targets have no bundled runner)."""

import pytest

from gg import asmtext, corpus, desk
from gg.analysis import isa_similarity
from gg.corpus import CompileSpec, CorpusView
from gg.tokenlab import Vocab, extend_vocab, load_isa_terms, tokenize

from conftest import needs_clang, needs_host_cc

pytestmark = [needs_host_cc, needs_clang]


@pytest.fixture(scope="module")
def four_isa_corpus(tmp_path_factory):
    work = tmp_path_factory.mktemp("crossisa")
    config = desk.desk_config(work, isas=list(asmtext.ISAS), opts=["O0"])
    sources = [desk.programs_dir() / name
               for name in ("gcd_lcm.c", "fib_iter.c", "popcount.c")]
    report = corpus.build_corpus(
        sources, origin="cross", root=work, toolchains=config.toolchains,
        isas=config.isas, opts=config.opts, jobs=4)
    assert not report.compile_failures, report.compile_failures
    return CorpusView(report.manifest_path)


def test_all_isas_compile_and_normalize(four_isa_corpus):
    for isa in asmtext.ISAS:
        text = four_isa_corpus.normalized_text("gcd_lcm", isa, "O0")
        assert text, isa
        instructions = asmtext.extract_instructions(text)
        assert len(instructions) > 5, isa
        # normalization is stable on real compiler output
        assert asmtext.normalize(text, isa) == text


def test_armv5_comments_stripped_but_immediates_kept(four_isa_corpus):
    text = four_isa_corpus.normalized_text("gcd_lcm", "armv5", "O0")
    # arm gas comments start with '@' at a token boundary; immediates
    # (#imm) and .type annotations must survive
    for line in text.splitlines():
        assert " @ " not in line
    assert "#" in text


def test_riscv_and_x86_hash_comments_stripped(four_isa_corpus):
    for isa in ("riscv64", "x86_64"):
        text = four_isa_corpus.normalized_text("gcd_lcm", isa, "O0")
        for line in text.splitlines():
            assert " # " not in line, (isa, line)


def test_similarity_across_all_risc_targets(four_isa_corpus):
    report = isa_similarity(four_isa_corpus, "x86_64",
                            ["armv8", "armv5", "riscv64"], "O0")
    for isa in ("armv8", "armv5", "riscv64"):
        assert report.counts[isa] == 3
        assert 0.0 < report.means[isa] < 100.0


def test_term_lists_cover_real_opcodes(four_isa_corpus):
    for isa in asmtext.ISAS:
        terms = load_isa_terms(isa)
        assert len(terms) > 50
        text = four_isa_corpus.normalized_text("gcd_lcm", isa, "O0")
        opcodes = {i.opcode for i in asmtext.extract_instructions(text)}
        # the shipped top-64 list covers most opcodes this program uses
        covered = opcodes & set(terms)
        assert len(covered) >= len(opcodes) * 0.6, (isa, opcodes - covered)


def test_extension_reduces_tokens_on_every_isa(four_isa_corpus):
    base = Vocab(entries=list("abcdefghijklmnopqrstuvwxyz0123456789,#[]()%$.-+*"),
                 name="chars")
    for isa in asmtext.ISAS:
        extended = extend_vocab(base, load_isa_terms(isa))
        text = four_isa_corpus.normalized_text("fib_iter", isa, "O0")
        assert len(tokenize(extended, text)) < len(tokenize(base, text)), isa


def test_pairs_exist_for_every_risc_target(four_isa_corpus):
    records = four_isa_corpus.records
    for target in ("armv8", "armv5", "riscv64"):
        pairs, excluded = corpus.build_pairs(
            records, CompileSpec("x86_64", "O0"), CompileSpec(target, "O0"))
        assert len(pairs) == 3 and not excluded
