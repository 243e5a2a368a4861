"""Benchmark harness: wall clock, peak RSS, geometric means, mode ratios.

Samples are collected sequentially (one binary at a time, machine-wide
lock) and aggregated with geometric means. Peak memory comes from the
child's own resource accounting via wait4, so one large run cannot
inflate later ones.
"""

import json
import math
import os
import re
import shlex
import shutil
import subprocess
import tempfile
import time
from functools import lru_cache
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .errors import BenchUnreliable, LockHeld
from .verify import runner_command

MODE_NATIVE = "native"
MODE_TRANSPILED = "transpiled"
MODE_TRANSLATED = "translated_layer"
MODES = (MODE_NATIVE, MODE_TRANSPILED, MODE_TRANSLATED)

DEFAULT_RUNS = 100
DEFAULT_LOCK_PATH = Path(tempfile.gettempdir()) / "gg-bench.lock"

MAX_INVALID_FRACTION = 0.10

# Measuring a child's ru_maxrss directly from this process is unreliable:
# right after fork the child still shares this interpreter's resident
# pages, so its high-water mark starts at the parent's footprint. A tiny
# compiled shim forks from a ~1 MB image instead and reports the real
# numbers on a marker line.
_SHIM_SOURCE = r"""
#include <stdio.h>
#include <sys/resource.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

int main(int argc, char **argv) {
    if (argc < 2)
        return 125;
    pid_t pid = fork();
    if (pid < 0)
        return 125;
    if (pid == 0) {
        execvp(argv[1], argv + 1);
        _exit(127);
    }
    int status = 0;
    struct rusage ru;
    if (wait4(pid, &status, 0, &ru) < 0)
        return 125;
    int code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
    fprintf(stderr, "GG_RUSAGE maxrss_kib=%ld exit=%d\n", ru.ru_maxrss, code);
    return code;
}
"""

_RUSAGE_LINE = re.compile(rb"GG_RUSAGE maxrss_kib=(\d+) exit=(-?\d+)")


@lru_cache(maxsize=1)
def _measure_shim() -> str | None:
    compiler = shutil.which("cc") or shutil.which("gcc") or shutil.which("clang")
    if compiler is None:
        return None
    workdir = Path(tempfile.mkdtemp(prefix="gg-bench-shim"))
    source = workdir / "measure.c"
    source.write_text(_SHIM_SOURCE, encoding="utf-8")
    shim = workdir / "gg-measure"
    proc = subprocess.run([compiler, "-O2", str(source), "-o", str(shim)],
                          capture_output=True)
    return str(shim) if proc.returncode == 0 else None


@dataclass(frozen=True)
class Sample:
    wall_time_s: float
    peak_rss_bytes: int
    exit_status: int

    @property
    def valid(self) -> bool:
        return self.exit_status == 0


def run_once(binary: str | Path, args: list[str] | None = None,
             runner: str = "native") -> Sample:
    """One measured execution: monotonic wall time around the child's
    lifetime, peak RSS from the child's own resource accounting."""
    cmd = runner_command(runner) + [str(binary), *(args or [])]
    shim = _measure_shim()
    with open(os.devnull, "wb") as devnull:
        if shim is not None:
            start = time.monotonic()
            proc = subprocess.run([shim, *cmd], stdout=devnull,
                                  stderr=subprocess.PIPE)
            wall = time.monotonic() - start
            match = None
            for match in _RUSAGE_LINE.finditer(proc.stderr):
                pass
            if match is not None:
                return Sample(wall_time_s=wall,
                              peak_rss_bytes=int(match.group(1)) * 1024,
                              exit_status=int(match.group(2)))
            return Sample(wall_time_s=wall, peak_rss_bytes=0,
                          exit_status=proc.returncode or 125)
        # fallback without a C compiler: rusage via wait4; small programs
        # inherit this interpreter's footprint as their starting RSS
        start = time.monotonic()
        proc = subprocess.Popen(cmd, stdout=devnull, stderr=devnull)
        _, status, rusage = os.wait4(proc.pid, 0)
        wall = time.monotonic() - start
    proc.returncode = os.waitstatus_to_exitcode(status)
    return Sample(wall_time_s=wall,
                  peak_rss_bytes=rusage.ru_maxrss * 1024,  # Linux: KiB
                  exit_status=proc.returncode)


def geomean(values: list[float]) -> float:
    if not values:
        raise ValueError("geometric mean of an empty sample list")
    if any(v <= 0 for v in values):
        raise ValueError("geometric mean needs positive samples")
    return math.exp(sum(math.log(v) for v in values) / len(values))


class NullEnergyProbe:
    """Default probe: energy measurement absent, never fabricated."""

    def start(self):
        pass

    def stop(self) -> float | None:
        return None


class CommandEnergyProbe:
    """External meter driven by `<cmd> start` / `<cmd> stop`; the stop
    call prints total joules for the window on stdout."""

    def __init__(self, command: str):
        self.command = shlex.split(command)

    def start(self):
        subprocess.run([*self.command, "start"], check=True, capture_output=True)

    def stop(self) -> float:
        proc = subprocess.run([*self.command, "stop"], check=True,
                              capture_output=True, text=True)
        return float(proc.stdout.strip())


@dataclass
class BenchRecord:
    program_id: str
    mode: str
    runner: str
    runs: int
    geomean_time_s: float
    geomean_peak_rss_bytes: float
    energy_j: float | None = None
    time_samples: list[float] = field(default_factory=list)
    rss_samples: list[int] = field(default_factory=list)
    invalid_samples: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.runs != len(self.time_samples):
            raise ValueError("runs must equal the number of kept samples")

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "BenchRecord":
        return cls(**json.loads(text))


def benchmark(binary: str | Path, args: list[str] | None = None,
              runner: str = "native", n_runs: int = DEFAULT_RUNS,
              energy_probe=None, program_id: str = "", mode: str = MODE_NATIVE,
              ) -> BenchRecord:
    """n_runs sequential samples after one discarded warm-up run."""
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    probe = energy_probe or NullEnergyProbe()
    run_once(binary, args, runner)  # warm-up, discarded
    probe.start()
    samples: list[Sample] = [run_once(binary, args, runner)
                             for _ in range(n_runs)]
    joules = probe.stop()
    valid = [s for s in samples if s.valid]
    invalid = len(samples) - len(valid)
    if invalid > MAX_INVALID_FRACTION * n_runs:
        raise BenchUnreliable(
            f"{invalid}/{n_runs} samples invalid (> {MAX_INVALID_FRACTION:.0%})")
    if not valid:
        raise BenchUnreliable("every sample was invalid")
    times = [s.wall_time_s for s in valid]
    rsses = [s.peak_rss_bytes for s in valid]
    return BenchRecord(
        program_id=program_id or Path(binary).name,
        mode=mode,
        runner=runner,
        runs=len(valid),
        geomean_time_s=geomean(times),
        geomean_peak_rss_bytes=geomean([float(r) for r in rsses]),
        energy_j=None if joules is None else joules / len(valid),
        time_samples=times,
        rss_samples=rsses,
        invalid_samples=invalid,
    )


# --- machine-wide lock ---------------------------------------------------------

class exclusive_lock:
    """Exclusive lock file; refuses to start when already held."""

    def __init__(self, path: str | Path = DEFAULT_LOCK_PATH):
        self.path = Path(path)
        self._fd = None

    def __enter__(self):
        try:
            self._fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise LockHeld(f"benchmark lock {self.path} is held; "
                           "another harness is running") from None
        os.write(self._fd, str(os.getpid()).encode())
        return self

    def __exit__(self, *exc_info):
        if self._fd is not None:
            os.close(self._fd)
            self.path.unlink(missing_ok=True)
        return False


bench_lock = exclusive_lock  # the benchmark-facing name


# --- record files ---------------------------------------------------------------

def append_records(records: list[BenchRecord], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("a", encoding="utf-8") as handle:
        for record in records:
            handle.write(record.to_json() + "\n")
    return path


def load_records(path: str | Path) -> list[BenchRecord]:
    records = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            records.append(BenchRecord.from_json(line))
    return records


# --- mode comparison -------------------------------------------------------------

@dataclass(frozen=True)
class RatioRow:
    metric: str
    numerator_mode: str
    denominator_mode: str
    ratio: float


@dataclass
class ComparisonTable:
    program_id: str
    rows: list[RatioRow]
    missing: list[str] = field(default_factory=list)


def compare(records: list[BenchRecord]) -> ComparisonTable:
    """Metric ratios between execution modes of one program.

    Each later mode in (native, transpiled, translated_layer) is reported
    over every earlier one; pairs with a missing mode are omitted.
    """
    if not records:
        raise ValueError("no records to compare")
    program_ids = {r.program_id for r in records}
    if len(program_ids) != 1:
        raise ValueError(f"records span several programs: {sorted(program_ids)}")
    by_mode = {r.mode: r for r in records}
    if len(by_mode) < len(records):
        raise ValueError("multiple records for one mode; compare one run set")
    if len(by_mode) < 2:
        raise ValueError("need at least two modes to compare")
    rows: list[RatioRow] = []
    missing = [m for m in MODES if m not in by_mode]
    present = [m for m in MODES if m in by_mode]
    for hi_idx in range(1, len(present)):
        for lo_idx in range(hi_idx):
            hi, lo = by_mode[present[hi_idx]], by_mode[present[lo_idx]]
            rows.append(RatioRow("time", hi.mode, lo.mode,
                                 hi.geomean_time_s / lo.geomean_time_s))
            rows.append(RatioRow("memory", hi.mode, lo.mode,
                                 hi.geomean_peak_rss_bytes / lo.geomean_peak_rss_bytes))
            if hi.energy_j is not None and lo.energy_j is not None:
                rows.append(RatioRow("energy", hi.mode, lo.mode,
                                     hi.energy_j / lo.energy_j))
    return ComparisonTable(program_id=records[0].program_id, rows=rows,
                           missing=missing)
