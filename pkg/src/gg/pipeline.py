"""Pipeline orchestration: guess -> verify -> triage -> accuracy, resumable.

Each program's verification lands in `<work>/verify/<id>/<rank>/`; a
pre-existing outcome.json short-circuits the program on re-runs, which
makes interrupted runs resumable and completed runs idempotent. A lock
file serializes pipelines per work directory.
"""

import json
import shutil
import subprocess
import threading
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import corpus as corpus_mod
from . import report as report_mod
from . import triage as triage_mod
from . import verify as verify_mod
from .bench import exclusive_lock
from .config import PipelineConfig
from .corpus import CompileSpec, TranspilePair, build_pairs
from .errors import (
    BackendUnavailable,
    ContextOverflow,
    CoverageUnavailable,
    GGError,
    MutationInapplicable,
    ProtocolError,
)
from .guesser import GuessRequest, estimate_budget, make_backend, request_guess
from .tokenlab import Vocab, load_vocab

COUNT_MISSING_ARTIFACT = "missing_artifact"
COUNT_NO_TEST_BUNDLE = "no_test_bundle"
COUNT_GUESS_ERROR = "guess_error"


@dataclass
class RunSummary:
    manifest_size: int
    counts: dict[str, int]
    accuracy: verify_mod.AccuracyTable
    report_paths: dict[str, dict]
    workdir: str
    triage_records: list = field(default_factory=list)

    @property
    def total_accounted(self) -> int:
        return sum(self.counts.values())

    def overall_pass_at_1(self) -> float | None:
        scored = sum(row.total for row in self.accuracy.rows)
        if scored == 0:
            return None
        passed = sum(row.passed for row in self.accuracy.rows)
        return passed / scored * 100.0


def _runtime_sources(config: PipelineConfig) -> tuple[list[str], list[str]]:
    runtime_dir = getattr(config, "runtime_dir", "")
    if not runtime_dir:
        return [], []
    runtime = Path(runtime_dir)
    sources = sorted(str(p) for p in runtime.glob("*.c"))
    return sources, [str(runtime)]


def _load_budget_vocab(config: PipelineConfig) -> Vocab:
    if config.vocab_path:
        return load_vocab(config.vocab_path)
    return Vocab(entries=[], name="chars")


def prepare_pairs(config: PipelineConfig, manifest_path: str | Path,
                  ) -> tuple[list[TranspilePair], list[str], list]:
    records = corpus_mod.load_manifest(manifest_path)
    source_spec = CompileSpec(config.source_isa, config.opt)
    target_spec = CompileSpec(config.target_isa, config.opt)
    pairs, excluded = build_pairs(records, source_spec, target_spec,
                                  tests_dir=config.tests_dir or None)
    return pairs, excluded, records


def _reference_source_path(pair: TranspilePair) -> Path | None:
    """The corpus writes `<id>.c` next to each artifact; use the source
    side's sibling for coverage runs."""
    asm_path = Path(pair.source.path)
    candidate = asm_path.with_suffix(".c")
    return candidate if candidate.exists() else None


@dataclass
class _ProgramResult:
    program_id: str
    bucket: str
    outcome: verify_mod.VerificationOutcome | None = None
    candidate_text: str | None = None
    error: str = ""


def _process_pair(pair: TranspilePair, config: PipelineConfig, backend,
                  vocab: Vocab, workdir: Path,
                  guess_slots: "threading.Semaphore | None" = None,
                  ) -> _ProgramResult:
    program_id = pair.program_id
    scratch_root = workdir / "verify"
    outcome_path = scratch_root / program_id / "0" / "outcome.json"
    candidate_path = workdir / "candidates" / program_id / "rank0.s"
    if outcome_path.exists():  # resume
        outcome = verify_mod.load_outcome(outcome_path)
        text = candidate_path.read_text(encoding="utf-8") \
            if candidate_path.exists() else None
        return _ProgramResult(program_id, outcome.status, outcome, text)
    if pair.test_bundle_path is None:
        return _ProgramResult(program_id, COUNT_NO_TEST_BUNDLE)
    runtime_sources, include_dirs = _runtime_sources(config)
    bundle = verify_mod.bundle_from_path(
        pair.test_bundle_path, runtime_sources=runtime_sources,
        include_dirs=include_dirs, timeout_s=config.timeout_s)
    toolchain = config.toolchain(config.target_isa)
    runner = config.runner(config.target_isa)

    request = GuessRequest(
        source_isa=config.source_isa, target_isa=config.target_isa,
        opt=config.opt, input_asm=pair.source.normalized_text,
        beam_width=config.beam_width, max_new_tokens=config.max_new_tokens,
        context_window=config.context_window)
    verdict = estimate_budget(request, vocab, config.expansion)

    coverage_pct = None
    if config.coverage:
        reference = _reference_source_path(pair)
        if reference is not None:
            try:
                coverage_pct = verify_mod.measure_coverage(
                    bundle, reference, config.toolchain("x86_64"),
                    workdir / "coverage" / program_id,
                    gcov_command=config.coverage_command)
            except (CoverageUnavailable, OSError,
                    subprocess.TimeoutExpired):
                coverage_pct = None

    if not verdict.fits:
        outcome = verify_mod.verify_candidate(
            pair, [], bundle, toolchain=None, scratch_root=scratch_root,
            runner=runner, overflow=True, coverage_pct=coverage_pct)
        return _ProgramResult(program_id, outcome.status, outcome)
    try:
        if guess_slots is not None:
            with guess_slots:  # backend in-flight limit
                candidates = request_guess(backend, request, verdict=verdict)
        else:
            candidates = request_guess(backend, request, verdict=verdict)
    except (BackendUnavailable, ProtocolError, ContextOverflow,
            MutationInapplicable) as exc:
        return _ProgramResult(program_id, COUNT_GUESS_ERROR, error=str(exc))
    candidate_path.parent.mkdir(parents=True, exist_ok=True)
    candidate_path.write_text(candidates[0].text, encoding="utf-8")
    meta = {
        "estimated_input_tokens": verdict.estimated_input_tokens,
        "estimated_total": verdict.estimated_total,
        "fits": verdict.fits,
        "candidates": [
            {"rank": c.rank, "score": c.score, "truncated": c.truncated}
            for c in candidates
        ],
    }
    (candidate_path.parent / "guess.json").write_text(
        json.dumps(meta, sort_keys=True) + "\n", encoding="utf-8")
    outcome = verify_mod.verify_candidate(
        pair, candidates, bundle, toolchain, scratch_root, runner=runner,
        timeout_s=config.timeout_s, coverage_pct=coverage_pct)
    return _ProgramResult(program_id, outcome.status, outcome,
                          candidates[0].text)


def run_pipeline(config: PipelineConfig, manifest_path: str | Path) -> RunSummary:
    workdir = config.effective_workdir()
    workdir.mkdir(parents=True, exist_ok=True)
    with exclusive_lock(workdir / ".gg-pipeline.lock"):
        return _run_pipeline_locked(config, manifest_path, workdir)


def _run_pipeline_locked(config: PipelineConfig, manifest_path: str | Path,
                         workdir: Path) -> RunSummary:
    pairs, excluded, records = prepare_pairs(config, manifest_path)
    vocab = _load_budget_vocab(config)
    backend = make_backend(
        config.backend, pairs=pairs, url=config.backend_url,
        command=config.backend_command, mutant_rule=config.mutant_rule,
        timeout_s=max(config.timeout_s * 10, 60.0))

    counts: dict[str, int] = {}
    for record in records:
        if record.status != corpus_mod.STATUS_ACCEPTED:
            counts[record.status] = counts.get(record.status, 0) + 1
    for _ in excluded:
        counts[COUNT_MISSING_ARTIFACT] = counts.get(COUNT_MISSING_ARTIFACT, 0) + 1

    by_id = {record.id: record for record in records}
    results: list[_ProgramResult] = []
    guess_slots = threading.Semaphore(max(1, config.pool_guess))
    with ThreadPoolExecutor(max_workers=max(1, config.pool_verify)) as pool:
        futures = {pool.submit(_process_pair, pair, config, backend, vocab,
                               workdir, guess_slots): pair for pair in pairs}
        for future, pair in futures.items():
            try:
                result = future.result()
            except GGError as exc:
                result = _ProgramResult(pair.program_id, COUNT_GUESS_ERROR,
                                        error=str(exc))
            results.append(result)

    groups: dict[tuple[str, str, str], list[verify_mod.VerificationOutcome]] = {}
    triage_records: list[triage_mod.TriageRecord] = []
    pair_by_id = {pair.program_id: pair for pair in pairs}
    for result in sorted(results, key=lambda r: r.program_id):
        counts[result.bucket] = counts.get(result.bucket, 0) + 1
        if result.outcome is None:
            continue
        origin = by_id[result.program_id].origin
        key = (origin, config.target_isa, config.opt)
        groups.setdefault(key, []).append(result.outcome)
        if result.outcome.status != verify_mod.STATUS_PASS:
            triage_records.append(triage_mod.make_record(
                result.outcome, pair_by_id[result.program_id],
                result.candidate_text))

    accuracy = verify_mod.accuracy_table(groups)
    reports_dir = workdir / "reports"
    report_paths = {"accuracy": report_mod.accuracy_report(accuracy, reports_dir)}
    if triage_records:
        report_paths["triage"] = report_mod.triage_report_files(
            triage_mod.triage_report(triage_records), reports_dir)
    summary = RunSummary(
        manifest_size=len(records), counts=counts, accuracy=accuracy,
        report_paths=report_paths, workdir=str(workdir),
        triage_records=triage_records)
    (workdir / "run_summary.json").write_text(json.dumps({
        "manifest_size": summary.manifest_size,
        "counts": summary.counts,
        "overall_pass_at_1": summary.overall_pass_at_1(),
    }, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return summary


# --- ablation sweep ------------------------------------------------------------

SWEEP_KNOBS = ("beam_width", "context_window", "backend")


@dataclass
class SweepResult:
    knob: str
    rows: list[tuple[str, float | None]]  # value -> overall pass@1
    notes: list[str] = field(default_factory=list)
    summaries: dict[str, RunSummary] = field(default_factory=dict)


def sweep(config: PipelineConfig, knob: str, values: list,
          manifest_path: str | Path) -> SweepResult:
    """One pipeline run per knob value, everything else held constant."""
    if knob not in SWEEP_KNOBS:
        raise ValueError(f"unknown sweep knob {knob!r}; pick one of {SWEEP_KNOBS}")
    if not values:
        raise ValueError("sweep needs at least one value")
    notes: list[str] = []
    deduped = []
    for value in values:
        if value in deduped:
            notes.append(f"duplicate value {value!r} dropped")
        else:
            deduped.append(value)
    base_workdir = config.effective_workdir()
    result = SweepResult(knob=knob, notes=notes, rows=[])
    for value in deduped:
        sub = replace(config)
        sub.toolchains = dict(config.toolchains)
        sub.runners = dict(config.runners)
        sub.expansion = dict(config.expansion)
        if knob == "beam_width":
            sub.beam_width = int(value)
        elif knob == "context_window":
            sub.context_window = int(value)
        else:
            sub.backend = str(value)
        sub.workdir = str(base_workdir / f"sweep_{knob}_{value}")
        Path(sub.workdir).mkdir(parents=True, exist_ok=True)
        summary = _run_pipeline_locked(sub, manifest_path, Path(sub.workdir))
        result.rows.append((str(value), summary.overall_pass_at_1()))
        result.summaries[str(value)] = summary
    return result


# --- environment doctor ---------------------------------------------------------

@dataclass(frozen=True)
class DoctorCheck:
    name: str
    ok: bool
    detail: str


@dataclass
class DoctorReport:
    checks: list[DoctorCheck]

    @property
    def ok(self) -> bool:
        return all(check.ok for check in self.checks)


def _resolves(command: str) -> bool:
    first = command.split()[0] if command.strip() else ""
    return bool(first) and (shutil.which(first) is not None or Path(first).exists())


def doctor(config: PipelineConfig) -> DoctorReport:
    """Check that every externally referenced command resolves."""
    checks: list[DoctorCheck] = []
    for isa in config.isas:
        spec = config.toolchains.get(isa)
        if spec is None:
            checks.append(DoctorCheck(f"toolchain.{isa}", False, "not configured"))
            continue
        ok = _resolves(spec.command)
        checks.append(DoctorCheck(f"toolchain.{isa}", ok,
                                  spec.command if ok else
                                  f"command not found: {spec.command}"))
    for isa, runner in sorted(config.runners.items()):
        if runner == "native":
            checks.append(DoctorCheck(f"runner.{isa}", True, "native"))
            continue
        if runner.startswith("emulate:"):
            command = runner.split(":", 1)[1]
            ok = _resolves(command)
            checks.append(DoctorCheck(f"runner.{isa}", ok,
                                      command if ok else
                                      f"emulator not found: {command}"))
        else:
            checks.append(DoctorCheck(f"runner.{isa}", False,
                                      f"bad runner spec: {runner}"))
    ok = _resolves(config.coverage_command)
    checks.append(DoctorCheck("coverage.command", ok,
                              config.coverage_command if ok else
                              f"not found: {config.coverage_command}"))
    checks.append(DoctorCheck("make", _resolves("make"),
                              "make" if _resolves("make") else "make not found"))
    if config.backend == "http":
        checks.append(_check_http(config.backend_url))
    elif config.backend == "command":
        ok = _resolves(config.backend_command)
        checks.append(DoctorCheck("backend.command", ok,
                                  config.backend_command if ok else
                                  f"not found: {config.backend_command}"))
    else:
        checks.append(DoctorCheck(f"backend.{config.backend}", True, "in-process"))
    workdir = config.effective_workdir()
    try:
        workdir.mkdir(parents=True, exist_ok=True)
        probe = workdir / ".doctor-probe"
        probe.write_text("ok")
        probe.unlink()
        checks.append(DoctorCheck("workdir", True, str(workdir)))
    except OSError as exc:
        checks.append(DoctorCheck("workdir", False, str(exc)))
    return DoctorReport(checks=checks)


def _check_http(url: str) -> DoctorCheck:
    if not url:
        return DoctorCheck("backend.http", False, "no URL configured")
    try:
        urllib.request.urlopen(url, timeout=3.0)
        return DoctorCheck("backend.http", True, url)
    except urllib.error.HTTPError:
        return DoctorCheck("backend.http", True, f"{url} (responds)")
    except (urllib.error.URLError, OSError) as exc:
        return DoctorCheck("backend.http", False, f"{url}: {exc}")
