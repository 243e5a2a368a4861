"""Candidate verification: build, test, diff, coverage, pass@1 accounting.

A verification runs in a fresh scratch directory laid out as
`<work>/<program_id>/<rank>/{candidate.s, drivers/, build.log, stdout.txt,
outcome.json}` and stamps exactly one status, decided by the first failing
stage of build -> run -> diff.
"""

import json
import re
import shlex
import shutil
import subprocess
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .config import ToolchainSpec
from .corpus import TranspilePair
from .errors import CoverageUnavailable
from .guesser import GuessCandidate

STATUS_PASS = "Pass"
STATUS_TEST_FAIL = "TestFail"
STATUS_BUILD_FAIL = "BuildFail"
STATUS_RUNTIME_CRASH = "RuntimeCrash"
STATUS_TIMEOUT = "Timeout"
STATUS_CONTEXT_OVERFLOW = "ContextOverflow"
STATUS_DIFF_MISMATCH = "DiffMismatch"

ALL_STATUSES = (STATUS_PASS, STATUS_TEST_FAIL, STATUS_BUILD_FAIL,
                STATUS_RUNTIME_CRASH, STATUS_TIMEOUT, STATUS_CONTEXT_OVERFLOW,
                STATUS_DIFF_MISMATCH)

KIND_HUMANEVAL = "humaneval_style"
KIND_MAKEFILE = "makefile_style"

_TESTS_LINE = re.compile(r"^TESTS (\d+)/(\d+)\s*$", re.M)

DEFAULT_TIMEOUT_S = 10.0


@dataclass
class TestBundle:
    __test__ = False  # not a pytest class despite the name

    kind: str
    driver_paths: list[str] = field(default_factory=list)
    expected_output: str | None = None
    timeout_s: float = DEFAULT_TIMEOUT_S
    include_dirs: list[str] = field(default_factory=list)
    project_dir: str | None = None
    runtime_dir: str | None = None

    def __post_init__(self):
        if self.kind == KIND_MAKEFILE and self.expected_output is None:
            raise ValueError("makefile-style bundles need an expected output")
        if self.kind == KIND_HUMANEVAL and not self.driver_paths:
            raise ValueError("driver-style bundles need at least one driver")


def bundle_from_path(path: str | Path, runtime_sources: list[str] | None = None,
                     include_dirs: list[str] | None = None,
                     timeout_s: float = DEFAULT_TIMEOUT_S) -> TestBundle:
    """Build a TestBundle from a bundle path.

    A directory is a makefile-style project (Makefile + main.c +
    expected_output.txt); a single file is a test driver to compile and
    link against the candidate.
    """
    path = Path(path)
    runtime_sources = runtime_sources or []
    include_dirs = include_dirs or []
    if path.is_dir():
        expected_path = path / "expected_output.txt"
        if not expected_path.is_file():
            raise ValueError(f"{path}: makefile bundle lacks expected_output.txt")
        runtime_dir = include_dirs[0] if include_dirs else None
        return TestBundle(
            kind=KIND_MAKEFILE,
            driver_paths=[str(path / "main.c"), *runtime_sources],
            expected_output=expected_path.read_text(encoding="utf-8"),
            timeout_s=timeout_s,
            include_dirs=include_dirs,
            project_dir=str(path),
            runtime_dir=runtime_dir,
        )
    return TestBundle(
        kind=KIND_HUMANEVAL,
        driver_paths=[str(path), *runtime_sources],
        timeout_s=timeout_s,
        include_dirs=include_dirs,
    )


@dataclass
class BuildResult:
    ok: bool
    binary_path: str | None
    log: str


def build_candidate(candidate_text: str, bundle: TestBundle,
                    toolchain: ToolchainSpec, scratch: str | Path,
                    opt: str = "O0") -> BuildResult:
    """Assemble the candidate and link it with the bundle's drivers."""
    scratch = Path(scratch)
    scratch.mkdir(parents=True, exist_ok=True)
    candidate_path = scratch / "candidate.s"
    candidate_path.write_text(candidate_text, encoding="utf-8")
    if bundle.kind == KIND_MAKEFILE:
        return _build_via_makefile(candidate_path, bundle, toolchain, scratch, opt)
    drivers_dir = scratch / "drivers"
    drivers_dir.mkdir(exist_ok=True)
    local_drivers = []
    for src in bundle.driver_paths:
        dst = drivers_dir / Path(src).name
        shutil.copyfile(src, dst)
        local_drivers.append(str(dst))
    binary = scratch / "prog"
    cmd = [toolchain.command, f"-{opt}", *toolchain.flag_list()]
    for inc in bundle.include_dirs:
        cmd.append(f"-I{inc}")
    cmd += [str(candidate_path), *local_drivers, "-o", str(binary)]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    log = proc.stderr
    (scratch / "build.log").write_text(log, encoding="utf-8")
    if proc.returncode != 0:
        return BuildResult(ok=False, binary_path=None, log=log)
    return BuildResult(ok=True, binary_path=str(binary), log=log)


def _build_via_makefile(candidate_path: Path, bundle: TestBundle,
                        toolchain: ToolchainSpec, scratch: Path,
                        opt: str) -> BuildResult:
    project = scratch / "project"
    if project.exists():
        shutil.rmtree(project)
    shutil.copytree(bundle.project_dir, project)
    cflags = f"-{opt} {toolchain.flags}".strip()
    cmd = ["make", "-C", str(project), f"CC={toolchain.command}",
           f"CFLAGS={cflags}", f"CANDIDATE={candidate_path}"]
    if bundle.runtime_dir:
        cmd.append(f"RUNTIME={bundle.runtime_dir}")
    proc = subprocess.run(cmd, capture_output=True, text=True)
    log = proc.stdout + proc.stderr
    (scratch / "build.log").write_text(log, encoding="utf-8")
    binary = project / "prog"
    if proc.returncode != 0 or not binary.exists():
        return BuildResult(ok=False, binary_path=None, log=log)
    return BuildResult(ok=True, binary_path=str(binary), log=log)


@dataclass
class RunResult:
    tests_passed: int
    tests_total: int
    stdout: str
    exit_status: int
    timed_out: bool = False
    crashed: bool = False
    duration_s: float = 0.0


def runner_command(runner: str) -> list[str]:
    """Translate a runner spec ('native' or 'emulate:<command>')."""
    if runner == "native":
        return []
    if runner.startswith("emulate:"):
        command = runner.split(":", 1)[1]
        if not command:
            raise ValueError("empty emulator command in runner spec")
        return shlex.split(command)
    raise ValueError(f"unknown runner spec {runner!r}")


def run_tests(binary: str | Path, bundle: TestBundle, runner: str = "native",
              timeout_s: float | None = None) -> RunResult:
    """Execute the built binary under the runner and parse test results.

    Exit codes >= 128 count as crashes: that is both the shell convention
    for signal deaths and the bundled emulator's fault convention.
    """
    timeout = timeout_s if timeout_s is not None else bundle.timeout_s
    cmd = runner_command(runner) + [str(binary)]
    start = time.monotonic()
    try:
        proc = subprocess.run(cmd, capture_output=True, text=True,
                              timeout=timeout, errors="replace")
    except subprocess.TimeoutExpired as exc:
        stdout = exc.stdout
        if isinstance(stdout, bytes):
            stdout = stdout.decode("utf-8", "replace")
        return RunResult(tests_passed=0, tests_total=0, stdout=stdout or "",
                         exit_status=-1, timed_out=True,
                         duration_s=time.monotonic() - start)
    duration = time.monotonic() - start
    crashed = proc.returncode < 0 or proc.returncode >= 128
    passed, total = _parse_test_protocol(proc.stdout)
    if total == 0 and not crashed:
        # no protocol lines: fall back to the exit status
        total = 1
        passed = 1 if proc.returncode == 0 else 0
    return RunResult(tests_passed=passed, tests_total=total, stdout=proc.stdout,
                     exit_status=proc.returncode, crashed=crashed,
                     duration_s=duration)


def _parse_test_protocol(stdout: str) -> tuple[int, int]:
    match = None
    for match in _TESTS_LINE.finditer(stdout):
        pass
    if match is None:
        return 0, 0
    return int(match.group(1)), int(match.group(2))


def check_diff(actual: str, expected: str) -> tuple[bool, str]:
    """Byte equality after trailing-newline normalization; unified diff on
    mismatch."""
    left = actual.rstrip("\n")
    right = expected.rstrip("\n")
    if left == right:
        return True, ""
    import difflib
    diff = difflib.unified_diff(right.splitlines(), left.splitlines(),
                                fromfile="expected", tofile="actual", lineterm="")
    summary = "\n".join(list(diff)[:200])
    return False, summary


# --- coverage ----------------------------------------------------------------

def measure_coverage(bundle: TestBundle, reference_source: str | Path,
                     toolchain: ToolchainSpec, scratch: str | Path,
                     gcov_command: str = "gcov",
                     runner: str = "native") -> float:
    """Line coverage of the reference source under the bundle's tests.

    Compiles the reference with coverage instrumentation, runs the test
    binary, then parses the coverage tool's per-line report: executable
    lines are those marked with a count or '#####', covered ones have a
    positive count.
    """
    scratch = Path(scratch)
    scratch.mkdir(parents=True, exist_ok=True)
    reference_source = Path(reference_source)
    sources = [reference_source] + [Path(p) for p in bundle.driver_paths]
    objects = []
    for src in sources:
        local = scratch / src.name
        if local != src:
            shutil.copyfile(src, local)
        obj = scratch / (src.stem + ".o")
        cmd = [toolchain.command, "-O0", "--coverage", *toolchain.flag_list()]
        for inc in bundle.include_dirs:
            cmd.append(f"-I{inc}")
        cmd += ["-c", str(local), "-o", str(obj)]
        proc = subprocess.run(cmd, capture_output=True, text=True, cwd=scratch)
        if proc.returncode != 0:
            raise CoverageUnavailable(
                f"instrumented compile failed for {src.name}: {proc.stderr[:500]}")
        objects.append(str(obj))
    binary = scratch / "cov_prog"
    link = subprocess.run(
        [toolchain.command, "--coverage", *objects, "-o", str(binary)],
        capture_output=True, text=True, cwd=scratch)
    if link.returncode != 0:
        raise CoverageUnavailable(f"instrumented link failed: {link.stderr[:500]}")
    run = subprocess.run(runner_command(runner) + [str(binary)],
                         capture_output=True, text=True, cwd=scratch,
                         timeout=bundle.timeout_s)
    if run.returncode != 0:
        raise CoverageUnavailable(
            f"instrumented run exited {run.returncode}; coverage needs a "
            "passing suite")
    gcov = subprocess.run([gcov_command, reference_source.name],
                          capture_output=True, text=True, cwd=scratch)
    if gcov.returncode != 0:
        raise CoverageUnavailable(f"coverage tool failed: {gcov.stderr[:500]}")
    report = scratch / (reference_source.name + ".gcov")
    if not report.exists():
        raise CoverageUnavailable(f"coverage tool produced no {report.name}")
    return parse_gcov_file(report.read_text(encoding="utf-8"))


def parse_gcov_file(text: str) -> float:
    """Percentage of executable lines executed at least once."""
    executable = 0
    covered = 0
    for line in text.splitlines():
        marker = line.split(":", 1)[0].strip()
        if not marker or marker == "-":
            continue
        if marker.startswith("#####") or marker.startswith("====="):
            executable += 1
        elif marker[0].isdigit() or (marker[-1] in "*" and marker[:-1].isdigit()):
            executable += 1
            covered += 1
    if executable == 0:
        raise CoverageUnavailable("no executable lines in coverage report")
    return covered / executable * 100.0


# --- outcome -----------------------------------------------------------------

@dataclass
class VerificationOutcome:
    program_id: str
    candidate_rank: int
    status: str
    build_log: str = ""
    tests_passed: int = 0
    tests_total: int = 0
    coverage_pct: float | None = None
    diff_summary: str | None = None
    runner: str = "native"

    def __post_init__(self):
        if self.status not in ALL_STATUSES:
            raise ValueError(f"unknown status {self.status!r}")
        if self.status == STATUS_PASS:
            if self.tests_passed != self.tests_total:
                raise ValueError("Pass requires all tests passing")
            if self.diff_summary:
                raise ValueError("Pass requires an empty diff")

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "VerificationOutcome":
        return cls(**json.loads(text))


def write_outcome(outcome: VerificationOutcome, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(outcome.to_json() + "\n", encoding="utf-8")
    return path


def load_outcome(path: str | Path) -> VerificationOutcome:
    return VerificationOutcome.from_json(Path(path).read_text(encoding="utf-8"))


def verify_candidate(pair: TranspilePair, candidates: list[GuessCandidate],
                     bundle: TestBundle, toolchain: ToolchainSpec,
                     scratch_root: str | Path, runner: str = "native",
                     timeout_s: float | None = None,
                     overflow: bool = False,
                     coverage_pct: float | None = None,
                     reference_runtime_s: float | None = None,
                     ) -> VerificationOutcome:
    """Evaluate the rank-0 candidate; chain build -> run -> diff.

    A Timeout is only stamped when the effective timeout is at least
    twice the measured reference runtime (when one is known), so slow
    hosts do not turn borderline programs into flaky Timeouts.
    """
    program_id = pair.program_id
    if overflow:
        outcome = VerificationOutcome(
            program_id=program_id, candidate_rank=0,
            status=STATUS_CONTEXT_OVERFLOW, runner=runner,
            coverage_pct=coverage_pct)
        scratch = Path(scratch_root) / program_id / "0"
        write_outcome(outcome, scratch / "outcome.json")
        return outcome
    if not candidates:
        raise ValueError("need candidates or an overflow verdict")
    candidate = min(candidates, key=lambda c: c.rank)
    scratch = Path(scratch_root) / program_id / str(candidate.rank)
    scratch.mkdir(parents=True, exist_ok=True)

    build = build_candidate(candidate.text, bundle, toolchain, scratch)
    if not build.ok:
        outcome = VerificationOutcome(
            program_id=program_id, candidate_rank=candidate.rank,
            status=STATUS_BUILD_FAIL, build_log=build.log, runner=runner,
            coverage_pct=coverage_pct)
        write_outcome(outcome, scratch / "outcome.json")
        return outcome

    timeout = timeout_s if timeout_s is not None else bundle.timeout_s
    if reference_runtime_s is not None:
        timeout = max(timeout, 2.0 * reference_runtime_s)
    result = run_tests(build.binary_path, bundle, runner=runner, timeout_s=timeout)
    (scratch / "stdout.txt").write_text(result.stdout, encoding="utf-8")

    diff_summary = None
    if result.timed_out:
        status = STATUS_TIMEOUT
    elif result.crashed:
        status = STATUS_RUNTIME_CRASH
    else:
        status = STATUS_PASS
        if bundle.expected_output is not None:
            equal, diff_summary = check_diff(result.stdout, bundle.expected_output)
            if not equal:
                status = STATUS_DIFF_MISMATCH
        if status == STATUS_PASS and (result.tests_passed != result.tests_total
                                      or result.exit_status != 0):
            status = STATUS_TEST_FAIL
    outcome = VerificationOutcome(
        program_id=program_id, candidate_rank=candidate.rank, status=status,
        build_log=build.log, tests_passed=result.tests_passed,
        tests_total=result.tests_total, coverage_pct=coverage_pct,
        diff_summary=diff_summary or None, runner=runner)
    write_outcome(outcome, scratch / "outcome.json")
    return outcome


# --- accuracy aggregation ------------------------------------------------------

@dataclass(frozen=True)
class AccuracyRow:
    benchmark: str
    target_isa: str
    opt: str
    passed: int
    total: int

    @property
    def pass_at_1(self) -> float:
        return self.passed / self.total * 100.0


@dataclass
class AccuracyTable:
    rows: list[AccuracyRow]
    notes: list[str] = field(default_factory=list)


def accuracy_table(groups: dict[tuple[str, str, str], list[VerificationOutcome]],
                   ) -> AccuracyTable:
    """pass@1 per (benchmark, target_isa, opt) group.

    Only rank-0 outcomes count; empty groups are dropped with a note.
    """
    rows: list[AccuracyRow] = []
    notes: list[str] = []
    for (benchmark, isa, opt), outcomes in sorted(groups.items()):
        scored = [o for o in outcomes if o.candidate_rank == 0]
        if not scored:
            notes.append(f"{benchmark}/{isa}/{opt}: no rank-0 outcomes, row omitted")
            continue
        passed = sum(1 for o in scored if o.status == STATUS_PASS)
        rows.append(AccuracyRow(benchmark=benchmark, target_isa=isa, opt=opt,
                                passed=passed, total=len(scored)))
    return AccuracyTable(rows=rows, notes=notes)
