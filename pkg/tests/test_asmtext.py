import subprocess

import pytest
from hypothesis import given, strategies as st

from gg import asmtext
from gg.asmtext import (
    Instruction,
    count_words,
    extract_instructions,
    extract_with_diagnostics,
    line_tokens,
    normalize,
    opcode_histogram,
    split_operands,
    token_stream,
)


class TestNormalize:
    def test_armv5_comment_and_whitespace(self):
        assert normalize("  ldr   r1, r2   @ load\n", "armv5") == "ldr r1, r2\n"

    def test_string_literal_preserves_comment_char(self):
        out = normalize('.ascii "a # b"\n', "x86_64")
        assert out == '.ascii "a # b"\n'

    def test_string_literal_preserves_blank_runs(self):
        out = normalize('.ascii "a   b"  \n', "x86_64")
        assert out == '.ascii "a   b"\n'

    def test_idempotent_on_compiler_style_text(self):
        raw = "\tmovl\t$1, %eax\t# return value\n\n\tret\n.ident\t\"GCC\"\n"
        once = normalize(raw, "x86_64")
        assert normalize(once, "x86_64") == once
        assert once == "movl $1, %eax\nret\n"

    def test_drops_file_and_ident(self):
        raw = '.file "t.c"\n.file 1 "a" "t.c"\n.ident "x"\nmov r0, r1\n'
        assert normalize(raw, "armv5") == "mov r0, r1\n"

    def test_aarch64_type_directive_keeps_at_sign(self):
        raw = ".type add,@function\nadd w0, w0, w1 // sum\n"
        assert normalize(raw, "armv8") == ".type add,@function\nadd w0, w0, w1\n"

    def test_arm_immediates_not_treated_as_comments(self):
        raw = "ldr r1, [fp, #-8]\n"
        assert normalize(raw, "armv5") == "ldr r1, [fp, #-8]\n"

    def test_blank_lines_dropped(self):
        assert normalize("\n\n\nmov r0, r1\n\n", "armv5") == "mov r0, r1\n"

    def test_double_slash_comment(self):
        assert normalize("ret // done\n", "armv8") == "ret\n"

    def test_unknown_isa_rejected(self):
        with pytest.raises(ValueError):
            normalize("nop\n", "mips")

    @given(st.text(alphabet=" \tabr,#@;[]().:%$-\"\\ldmovstr0123456789\n", max_size=200))
    def test_idempotence_property(self, raw):
        for isa in asmtext.ISAS:
            once = normalize(raw, isa)
            assert normalize(once, isa) == once


class TestSplitOperands:
    def test_plain(self):
        assert split_operands("r0, r1, r2") == ["r0", "r1", "r2"]

    def test_brackets_hold_commas(self):
        assert split_operands("r1, [fp, #-8]") == ["r1", "[fp, #-8]"]

    def test_register_list(self):
        assert split_operands("{r4, lr}") == ["{r4, lr}"]

    def test_quoted_comma(self):
        assert split_operands('"a, b", 4') == ['"a, b"', "4"]

    def test_empty(self):
        assert split_operands("") == []


class TestExtract:
    def test_simple_instruction(self):
        ins = extract_instructions("mov r0, #1\n")
        assert ins == [Instruction(opcode="mov", operands=["r0", "#1"], line_no=1)]

    def test_directive_skipped(self):
        assert extract_instructions(".word 42\n") == []

    def test_labels_skipped(self):
        assert extract_instructions("main:\n.L3:\n") == []

    def test_fixture_hand_count(self):
        # 3 labels, 2 directives, 5 instructions, hand-counted
        text = (
            "main:\n"
            ".cfi_startproc\n"
            "push {fp, lr}\n"
            "mov r0, #0\n"
            ".L2:\n"
            "add r0, r0, #1\n"
            "cmp r0, #3\n"
            ".L3:\n"
            ".align 2\n"
            "bx lr\n"
        )
        out = extract_instructions(text)
        assert len(out) == 5
        assert [i.opcode for i in out] == ["push", "mov", "add", "cmp", "bx"]

    def test_no_opcode_is_directive_or_label(self):
        raw = "main:\n.word 1\nmov r0, r1\nb.ne .L2\n"
        for ins in extract_instructions(normalize(raw, "armv8")):
            assert not ins.opcode.startswith(".")
            assert not ins.opcode.endswith(":")
            assert ins.opcode and not any(c.isspace() for c in ins.opcode)

    def test_label_with_trailing_instruction(self):
        out = extract_instructions("loop: add r0, r0, #1\n")
        assert [i.opcode for i in out] == ["add"]

    def test_unparseable_residue_counted(self):
        ins, diags = extract_with_diagnostics(",,, junk\nmov r0, r1\n")
        assert [i.opcode for i in ins] == ["mov"]
        assert diags.skipped == 1


class TestHistogram:
    def test_empty(self):
        hist = opcode_histogram([])
        assert hist.counts == {} and hist.total == 0

    def test_counts(self):
        ins = extract_instructions("mov r0, r1\nmov r2, r3\nldr r4, [sp]\n")
        hist = opcode_histogram(ins)
        assert hist.counts == {"mov": 2, "ldr": 1}
        assert hist.total == 3

    def test_total_conservation(self):
        text = "mov r0, r1\nadd r0, r0, #1\ncmp r0, #3\nmov r1, r0\n"
        ins = extract_instructions(text)
        hist = opcode_histogram(ins)
        assert hist.total == len(ins) == sum(hist.counts.values())

    def test_matches_shell_first_token_count(self, tmp_path):
        # independent oracle: count first tokens of instruction lines in shell
        text = (
            "f:\n"
            "sub sp, sp, #16\n"
            "str w0, [sp, #12]\n"
            "ldr w8, [sp, #12]\n"
            "add w8, w8, #1\n"
            "ret\n"
        )
        path = tmp_path / "f.s"
        path.write_text(text)
        shell = subprocess.run(
            ["bash", "-c",
             f"grep -v ':$' {path} | grep -v '^\\.' | awk '{{print $1}}' | sort | uniq -c"],
            capture_output=True, text=True, check=True,
        )
        expected = {}
        for line in shell.stdout.splitlines():
            count, op = line.split()
            expected[op] = int(count)
        hist = opcode_histogram(extract_instructions(text))
        assert hist.counts == expected


class TestCountWords:
    def test_three_words(self):
        assert count_words("ldr r1, r2") == 3

    def test_empty(self):
        assert count_words("") == 0

    def test_multiline_equals_per_line_sum(self):
        text = "ldr r1, r2\nadd r0, r0, #1\n\nret\n"
        per_line = sum(len(line.split()) for line in text.splitlines())
        assert count_words(text) == per_line

    @given(st.text(alphabet="ab ,#\t", max_size=80), st.integers(min_value=1, max_value=4))
    def test_whitespace_run_expansion_invariant(self, text, k):
        expanded = text.replace(" ", " " * k)
        assert count_words(expanded) == count_words(text)


class TestTokenStream:
    def test_instruction_units(self):
        assert line_tokens("str r1, [fp, #-8]") == ["str", "r1", "[fp, #-8]"]

    def test_label_and_directive_units(self):
        assert line_tokens(".L8: .word 42") == [".L8:", ".word", "42"]

    def test_stream_flattens_lines(self):
        text = "mov r3, r0\nstr r3, [fp, #-8]\n"
        assert token_stream(text) == ["mov", "r3", "r0", "str", "r3", "[fp, #-8]"]
