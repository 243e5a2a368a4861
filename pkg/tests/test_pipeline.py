import hashlib
import shutil
from pathlib import Path

import pytest

from gg import corpus, desk
from gg.bench import exclusive_lock
from gg.config import ToolchainSpec
from gg.errors import LockHeld
from gg.pipeline import doctor, run_pipeline, sweep
from gg.verify import STATUS_CONTEXT_OVERFLOW, STATUS_PASS

from conftest import needs_clang, needs_host_cc

pytestmark = [needs_host_cc, needs_clang]

MINI_PROGRAMS = ["gcd_lcm", "fib_iter", "median5"]


@pytest.fixture(scope="module")
def mini_workdir(tmp_path_factory):
    """A small corpus + completed oracle pipeline, shared by the module."""
    work = tmp_path_factory.mktemp("miniwork")
    config = desk.desk_config(work, opts=["O0"])
    config.pool_verify = 2
    sources = [desk.programs_dir() / f"{p}.c" for p in MINI_PROGRAMS]
    # one file that fails the length filter, for accounting coverage
    short = work / "shorty.c"
    short.write_text("int tiny;\n")
    report = corpus.build_corpus(
        [*sources, short], origin="mini", root=work,
        toolchains=config.toolchains, isas=config.isas, opts=config.opts,
        jobs=2)
    summary = run_pipeline(config, report.manifest_path)
    return work, config, report, summary


def _outcome_dir_digest(workdir: Path) -> str:
    digest = hashlib.sha256()
    for path in sorted((workdir / "verify").rglob("*")):
        if path.is_file():
            digest.update(str(path.relative_to(workdir)).encode())
            digest.update(path.read_bytes())
    return digest.hexdigest()


class TestOraclePipeline:
    def test_oracle_pass_at_1_is_100(self, mini_workdir):
        _, _, _, summary = mini_workdir
        assert summary.overall_pass_at_1() == 100.0
        assert summary.counts[STATUS_PASS] == len(MINI_PROGRAMS)

    def test_accounting_completeness(self, mini_workdir):
        _, _, _, summary = mini_workdir
        assert summary.total_accounted == summary.manifest_size == 4
        assert summary.counts[corpus.STATUS_SHORT] == 1

    def test_outcome_files_written(self, mini_workdir):
        work, _, _, _ = mini_workdir
        for program in MINI_PROGRAMS:
            scratch = work / "verify" / program / "0"
            assert (scratch / "outcome.json").exists()
            assert (scratch / "candidate.s").exists()
            assert (scratch / "stdout.txt").exists()

    def test_reports_emitted_with_figures(self, mini_workdir):
        _, _, _, summary = mini_workdir
        paths = summary.report_paths["accuracy"]
        for kind in ("txt", "csv", "png"):
            assert Path(paths[kind]).exists()

    def test_resume_is_idempotent(self, mini_workdir):
        work, config, report, _ = mini_workdir
        before = _outcome_dir_digest(work)
        again = run_pipeline(config, report.manifest_path)
        assert _outcome_dir_digest(work) == before
        assert again.overall_pass_at_1() == 100.0

    def test_resume_completes_missing_programs_only(self, mini_workdir):
        work, config, report, _ = mini_workdir
        victim = work / "verify" / MINI_PROGRAMS[0]
        untouched = work / "verify" / MINI_PROGRAMS[1] / "0" / "outcome.json"
        untouched_mtime = untouched.stat().st_mtime_ns
        shutil.rmtree(victim)
        summary = run_pipeline(config, report.manifest_path)
        assert summary.overall_pass_at_1() == 100.0
        assert (victim / "0" / "outcome.json").exists()
        assert untouched.stat().st_mtime_ns == untouched_mtime


class TestMutantPipeline:
    def test_mutations_fail_and_triage_populates(self, tmp_path):
        config = desk.desk_config(tmp_path, opts=["O0"])
        config.backend = "mutant"
        config.mutant_rule = "memory_offset"
        config.pool_verify = 2
        sources = [desk.programs_dir() / f"{p}.c" for p in MINI_PROGRAMS]
        report = corpus.build_corpus(
            sources, origin="mini", root=tmp_path,
            toolchains=config.toolchains, isas=config.isas, opts=config.opts,
            jobs=2)
        summary = run_pipeline(config, report.manifest_path)
        assert summary.overall_pass_at_1() == 0.0
        assert summary.triage_records
        assert "triage" in summary.report_paths


class TestOverflow:
    def test_tiny_window_yields_context_overflow(self, tmp_path):
        config = desk.desk_config(tmp_path, opts=["O0"])
        config.context_window = 8  # nothing fits
        sources = [desk.programs_dir() / "gcd_lcm.c"]
        report = corpus.build_corpus(
            sources, origin="mini", root=tmp_path,
            toolchains=config.toolchains, isas=config.isas, opts=config.opts)
        summary = run_pipeline(config, report.manifest_path)
        assert summary.counts[STATUS_CONTEXT_OVERFLOW] == 1
        assert summary.overall_pass_at_1() == 0.0


class TestSweep:
    def test_context_window_sweep_changes_only_budget(self, tmp_path):
        config = desk.desk_config(tmp_path, opts=["O0"])
        sources = [desk.programs_dir() / "gcd_lcm.c"]
        report = corpus.build_corpus(
            sources, origin="mini", root=tmp_path,
            toolchains=config.toolchains, isas=config.isas, opts=config.opts)
        result = sweep(config, "context_window", [64, 32768, 32768],
                       report.manifest_path)
        assert [row[0] for row in result.rows] == ["64", "32768"]
        assert result.rows[0][1] == 0.0    # overflow at 64 tokens
        assert result.rows[1][1] == 100.0  # oracle passes within budget
        assert any("duplicate" in note for note in result.notes)

    def test_unknown_knob_rejected(self, tmp_path):
        config = desk.desk_config(tmp_path)
        with pytest.raises(ValueError):
            sweep(config, "sideways", [1], tmp_path / "m.jsonl")

    def test_empty_values_rejected(self, tmp_path):
        config = desk.desk_config(tmp_path)
        with pytest.raises(ValueError):
            sweep(config, "beam_width", [], tmp_path / "m.jsonl")


class TestLock:
    def test_pipeline_lock_contention(self, mini_workdir):
        work, config, report, _ = mini_workdir
        with exclusive_lock(work / ".gg-pipeline.lock"):
            with pytest.raises(LockHeld):
                run_pipeline(config, report.manifest_path)


class TestDoctor:
    def test_desk_environment_is_green(self, tmp_path):
        report = doctor(desk.desk_config(tmp_path))
        assert report.ok, [c for c in report.checks if not c.ok]

    def test_missing_toolchain_flagged(self, tmp_path):
        config = desk.desk_config(tmp_path)
        config.toolchains["armv8"] = ToolchainSpec(command="not-a-compiler-xyz")
        report = doctor(config)
        assert not report.ok
        failing = [c.name for c in report.checks if not c.ok]
        assert "toolchain.armv8" in failing

    def test_missing_emulator_flagged(self, tmp_path):
        config = desk.desk_config(tmp_path)
        config.runners["armv8"] = "emulate:not-an-emulator-xyz"
        report = doctor(config)
        assert not report.ok

    def test_unreachable_http_backend_flagged(self, tmp_path):
        config = desk.desk_config(tmp_path)
        config.backend = "http"
        config.backend_url = "http://127.0.0.1:1"
        report = doctor(config)
        assert not report.ok
        failing = [c.name for c in report.checks if not c.ok]
        assert "backend.http" in failing
