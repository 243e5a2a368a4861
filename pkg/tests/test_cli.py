import json

import pytest

from gg import desk
from gg.cli import EXIT_ENVIRONMENT, EXIT_OK, EXIT_RUN_FAILURES, EXIT_USAGE, main

from conftest import needs_clang, needs_host_cc

pytestmark = [needs_host_cc, needs_clang]

MINI = ["gcd_lcm", "median5"]


@pytest.fixture(scope="module")
def cli_workdir(tmp_path_factory):
    """Corpus built once via the CLI; reused by the read-only commands."""
    work = tmp_path_factory.mktemp("cliwork")
    sources = tmp_path_factory.mktemp("clisrc")
    for program in MINI:
        (sources / f"{program}.c").write_text(
            (desk.programs_dir() / f"{program}.c").read_text())
    code = main(["corpus", "build", "--desk", "--workdir", str(work),
                 "--sources", str(sources), "--origin", "mini"])
    assert code == EXIT_OK
    return work


class TestExitCodes:
    def test_usage_error_without_config(self):
        assert main(["doctor"]) == EXIT_USAGE

    def test_unknown_flag(self, capsys):
        assert main(["doctor", "--bogus"]) == EXIT_USAGE
        capsys.readouterr()

    def test_help_exits_zero(self, capsys):
        assert main(["--help"]) == EXIT_OK
        capsys.readouterr()

    def test_bench_requires_binary(self, capsys):
        assert main(["bench"]) == EXIT_USAGE
        capsys.readouterr()


class TestDoctor:
    def test_green_environment(self, tmp_path, capsys):
        assert main(["doctor", "--desk", "--workdir", str(tmp_path)]) == EXIT_OK
        out = capsys.readouterr().out
        assert "[ok ] toolchain.x86_64" in out

    def test_broken_config_exits_2(self, tmp_path, capsys):
        cfg = tmp_path / "gg.cfg"
        cfg.write_text(
            "toolchain.x86_64.command = not-a-compiler-xyz\n"
            "isas = x86_64\n")
        assert main(["doctor", "--config", str(cfg),
                     "--workdir", str(tmp_path)]) == EXIT_ENVIRONMENT
        assert "FAIL" in capsys.readouterr().out


class TestCorpus:
    def test_stats(self, cli_workdir, capsys):
        code = main(["corpus", "stats", "--manifest",
                     str(cli_workdir / "manifest.jsonl")])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "accepted" in out
        assert "armv8:O0" in out


class TestPipelineCommand:
    def test_oracle_run_and_resume(self, cli_workdir, capsys):
        code = main(["pipeline", "--desk", "--workdir", str(cli_workdir),
                     "--backend", "oracle"])
        out = capsys.readouterr().out
        assert code == EXIT_OK
        assert "pass@1 = 100.00" in out
        # resume: a second invocation stays green and is quick
        assert main(["pipeline", "--desk", "--workdir", str(cli_workdir),
                     "--backend", "oracle"]) == EXIT_OK
        capsys.readouterr()

    def test_reports_written(self, cli_workdir):
        reports = cli_workdir / "reports"
        assert (reports / "accuracy.txt").exists()
        assert (reports / "accuracy.csv").exists()
        assert (reports / "accuracy.png").exists()


class TestTranspileVerifyTriage:
    def test_chain(self, cli_workdir, tmp_path, capsys):
        manifest = str(cli_workdir / "manifest.jsonl")
        candidates = tmp_path / "cands"
        code = main(["transpile", "--desk", "--workdir", str(cli_workdir),
                     "--manifest", manifest, "--backend", "mutant",
                     "--mutant-rule", "memory_offset",
                     "--out", str(candidates)])
        assert code == EXIT_OK
        assert (candidates / "gcd_lcm" / "rank0.s").exists()
        meta = json.loads((candidates / "gcd_lcm" / "guess.json").read_text())
        assert meta["fits"] is True

        verify_work = tmp_path / "vwork"
        code = main(["verify", "--desk", "--workdir", str(verify_work),
                     "--pairs", manifest, "--candidates", str(candidates),
                     "--runner", "emulate:gg-emu"])
        out = capsys.readouterr().out
        assert code == EXIT_RUN_FAILURES
        assert "TestFail" in out

        code = main(["triage", "--desk", "--workdir", str(verify_work),
                     "--outcomes", str(verify_work / "verify"),
                     "--pairs", manifest,
                     "--out", str(tmp_path / "triage.txt")])
        out = capsys.readouterr().out
        assert code == EXIT_OK
        assert "IncorrectImmediate" in out
        assert (tmp_path / "triage.png").exists()


class TestAnalyze:
    def test_similarity(self, cli_workdir, tmp_path, capsys):
        code = main(["analyze", "similarity",
                     "--corpus", str(cli_workdir / "manifest.jsonl"),
                     "--base", "x86_64", "--others", "armv8", "--opt", "O0",
                     "--out", str(tmp_path)])
        assert code == EXIT_OK
        assert "mean_chrf" in capsys.readouterr().out
        assert (tmp_path / "similarity.csv").exists()
        assert (tmp_path / "similarity.png").exists()

    def test_opcodes(self, cli_workdir, tmp_path, capsys):
        code = main(["analyze", "opcodes",
                     "--corpus", str(cli_workdir / "manifest.jsonl"),
                     "--isa", "armv8", "--top", "5", "--out", str(tmp_path)])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "delta_points" in out
        assert (tmp_path / "opcode_shift.png").exists()


class TestTokenlab:
    def test_fertility(self, cli_workdir, tmp_path, capsys):
        base = tmp_path / "base.txt"
        base.write_text("".join(f"{c}\n" for c in "ldrmovstpwx0123,#[]"))
        code = main(["tokenlab", "fertility",
                     "--corpus", str(cli_workdir / "manifest.jsonl"),
                     "--base", str(base), "--isa", "x86_64,armv8",
                     "--out", str(tmp_path)])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "delta_pct" in out
        assert (tmp_path / "fertility.csv").exists()


class TestBenchCommand:
    def test_bench_and_compare(self, tmp_path, capsys):
        import subprocess
        binary = tmp_path / "quick"
        src = tmp_path / "quick.c"
        src.write_text("int main(void){ volatile int x = 0;"
                       " for (int i = 0; i < 100000; i++) x += i; return 0; }")
        subprocess.run(["gcc", "-O0", str(src), "-o", str(binary)], check=True)
        records = tmp_path / "records.jsonl"
        lock = tmp_path / "bench.lock"
        for mode in ("native", "transpiled"):
            code = main(["bench", "--binary", str(binary), "--mode", mode,
                         "--runs", "3", "--records", str(records),
                         "--program-id", "quick", "--lock-file", str(lock)])
            assert code == EXIT_OK
        capsys.readouterr()
        code = main(["bench", "compare", "--records", str(records),
                     "--out", str(tmp_path)])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "transpiled" in out and "ratio" in out
        assert (tmp_path / "bench_compare_quick.png").exists()


class TestConfigDump:
    def test_dump_round_trips(self, tmp_path, capsys):
        out_path = tmp_path / "resolved.cfg"
        code = main(["config", "dump", "--desk", "--workdir", str(tmp_path),
                     "--out", str(out_path)])
        assert code == EXIT_OK
        capsys.readouterr()
        assert main(["doctor", "--config", str(out_path)]) == EXIT_OK
        capsys.readouterr()
