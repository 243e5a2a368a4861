"""Corpus construction: ingest C sources, filter, dedupe, compile, persist.

The manifest is UTF-8 JSON-lines, one record per program, sorted by id:
{"id", "origin", "content_hash", "status",
 "artifacts": {"<isa>:<opt>": {"path", "instruction_count"}}}
"""

import hashlib
import json
import re
import subprocess
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import asmtext
from .config import ToolchainSpec
from .errors import CompileFailed, InvalidPairing, ManifestCorrupt, ToolchainUnavailable

STATUS_ACCEPTED = "accepted"
STATUS_SHORT = "rejected_short"
STATUS_LONG = "rejected_long"
STATUS_DUPLICATE = "rejected_duplicate"

OPT_LEVELS = ("O0", "O2")


@dataclass(frozen=True)
class CompileSpec:
    isa: str
    opt: str
    toolchain_id: str = ""

    def __post_init__(self):
        if self.isa not in asmtext.ISAS:
            raise ValueError(f"unknown isa: {self.isa}")
        if self.opt not in OPT_LEVELS:
            raise ValueError(f"opt must be one of {OPT_LEVELS}, got {self.opt!r}")

    @property
    def key(self) -> str:
        return f"{self.isa}:{self.opt}"


@dataclass
class ProgramUnit:
    id: str
    source_text: str
    line_count: int
    content_hash: str
    origin: str
    status: str


@dataclass
class AssemblyArtifact:
    program_id: str
    spec: CompileSpec
    raw_text: str
    normalized_text: str
    instruction_count: int
    opcode_histogram: asmtext.OpcodeHistogram
    path: str = ""


@dataclass
class TranspilePair:
    source: AssemblyArtifact
    target_reference: AssemblyArtifact
    test_bundle_path: str | None = None

    def __post_init__(self):
        if self.source.program_id != self.target_reference.program_id:
            raise InvalidPairing("pair spans two programs")
        if self.source.spec.opt != self.target_reference.spec.opt:
            raise InvalidPairing("pair mixes optimization levels")

    @property
    def program_id(self) -> str:
        return self.source.program_id


@dataclass
class ManifestRecord:
    id: str
    origin: str
    content_hash: str
    status: str
    artifacts: dict[str, dict] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(
            {"id": self.id, "origin": self.origin, "content_hash": self.content_hash,
             "status": self.status, "artifacts": self.artifacts},
            sort_keys=True)

    @classmethod
    def from_json(cls, obj: dict) -> "ManifestRecord":
        return cls(id=obj["id"], origin=obj["origin"],
                   content_hash=obj["content_hash"], status=obj["status"],
                   artifacts=obj.get("artifacts", {}))


@dataclass
class IngestError:
    path: str
    message: str


# --- source normalization and filtering -----------------------------------

_BLOCK_COMMENT = re.compile(r"/\*.*?\*/", re.S)
_LINE_COMMENT = re.compile(r"//[^\n]*")


def _strip_c_comments(source: str) -> str:
    """Drop C comments, keeping string literal contents intact."""
    out: list[str] = []
    i = 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch in ('"', "'"):
            quote = ch
            out.append(ch)
            i += 1
            while i < n:
                out.append(source[i])
                if source[i] == "\\" and i + 1 < n:
                    out.append(source[i + 1])
                    i += 2
                    continue
                if source[i] == quote:
                    i += 1
                    break
                i += 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        if source.startswith("/*", i):
            end = source.find("*/", i + 2)
            i = n if end < 0 else end + 2
            continue
        out.append(ch)
        i += 1
    return "".join(out)


def normalize_source(source: str) -> str:
    """Comment-stripped, whitespace-collapsed C source used for dedup hashing."""
    stripped = _strip_c_comments(source)
    lines = [" ".join(line.split()) for line in stripped.splitlines()]
    return "\n".join(line for line in lines if line)


def content_hash(source: str) -> str:
    return hashlib.sha256(normalize_source(source).encode("utf-8")).hexdigest()


def strip_boilerplate(source: str) -> str:
    """Remove the leading comment-only block (license headers) if present."""
    lines = source.splitlines(keepends=True)
    i = 0
    in_block = False
    while i < len(lines):
        stripped = lines[i].strip()
        if in_block:
            i += 1
            if "*/" in stripped:
                in_block = False
            continue
        if not stripped:
            i += 1
            continue
        if stripped.startswith("//"):
            i += 1
            continue
        if stripped.startswith("/*"):
            if "*/" not in stripped[2:]:
                in_block = True
            i += 1
            continue
        break
    return "".join(lines[i:])


def _filter_status(line_count: int, min_lines: int, max_lines: int) -> str:
    if line_count < min_lines:
        return STATUS_SHORT
    if line_count > max_lines:
        return STATUS_LONG
    return STATUS_ACCEPTED


def ingest_sources(paths: list[str | Path], origin: str, *, min_lines: int = 10,
                   max_lines: int = 16000, strip: bool = False,
                   ) -> tuple[list[ProgramUnit], list[IngestError]]:
    """Turn source files into ProgramUnits; unreadable files are recorded
    as errors and skipped."""
    units: list[ProgramUnit] = []
    errors: list[IngestError] = []
    for path in paths:
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            errors.append(IngestError(path=str(path), message=str(exc)))
            continue
        if strip:
            text = strip_boilerplate(text)
        line_count = len(text.splitlines())
        units.append(ProgramUnit(
            id=path.stem,
            source_text=text,
            line_count=line_count,
            content_hash=content_hash(text),
            origin=origin,
            status=_filter_status(line_count, min_lines, max_lines),
        ))
    return units, errors


def dedupe(units: list[ProgramUnit]) -> list[ProgramUnit]:
    """Mark later units sharing a content_hash as duplicates; order kept."""
    seen: set[str] = set()
    for unit in units:
        if unit.status != STATUS_ACCEPTED:
            continue
        if unit.content_hash in seen:
            unit.status = STATUS_DUPLICATE
        else:
            seen.add(unit.content_hash)
    return units


# --- compilation -----------------------------------------------------------

def compile_unit(unit: ProgramUnit, spec: CompileSpec, toolchain: ToolchainSpec,
                 out_dir: str | Path) -> AssemblyArtifact:
    """Invoke the external compiler with -S and capture the assembly."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    src_path = out_dir / f"{unit.id}.c"
    asm_path = out_dir / f"{unit.id}.s"
    src_path.write_text(unit.source_text, encoding="utf-8")
    cmd = [toolchain.command, "-S", f"-{spec.opt}", *toolchain.flag_list(),
           "-o", str(asm_path), str(src_path)]
    try:
        proc = subprocess.run(cmd, capture_output=True, text=True)
    except FileNotFoundError as exc:
        raise ToolchainUnavailable(f"compiler not found: {toolchain.command}") from exc
    if proc.returncode != 0:
        raise CompileFailed(f"{unit.id}: compiler exited {proc.returncode}",
                            log=proc.stderr)
    raw = asm_path.read_text(encoding="utf-8")
    return artifact_from_text(unit.id, spec, raw, path=str(asm_path))


def artifact_from_text(program_id: str, spec: CompileSpec, raw: str,
                       path: str = "") -> AssemblyArtifact:
    normalized = asmtext.normalize(raw, spec.isa)
    instructions = asmtext.extract_instructions(normalized)
    histogram = asmtext.opcode_histogram(instructions)
    return AssemblyArtifact(
        program_id=program_id, spec=spec, raw_text=raw,
        normalized_text=normalized, instruction_count=histogram.total,
        opcode_histogram=histogram, path=path,
    )


def load_artifact(program_id: str, spec: CompileSpec, path: str | Path) -> AssemblyArtifact:
    raw = Path(path).read_text(encoding="utf-8")
    return artifact_from_text(program_id, spec, raw, path=str(path))


# --- manifest --------------------------------------------------------------

def write_manifest(records: list[ManifestRecord], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [record.to_json() for record in sorted(records, key=lambda r: r.id)]
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return path


def load_manifest(path: str | Path) -> list[ManifestRecord]:
    records: list[ManifestRecord] = []
    text = Path(path).read_text(encoding="utf-8")
    if not text:
        return records
    if not text.endswith("\n"):
        raise ManifestCorrupt("truncated final record", line=text.count("\n") + 1)
    for line_no, line in enumerate(text.splitlines(), start=1):
        try:
            obj = json.loads(line)
            records.append(ManifestRecord.from_json(obj))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ManifestCorrupt(f"bad record: {exc}", line=line_no) from exc
    return records


# --- pairing ---------------------------------------------------------------

def resolve_test_bundle(tests_dir: str | Path | None, program_id: str) -> str | None:
    """Locate the test bundle for a program by naming convention.

    `<tests_dir>/<id>/` (a directory, makefile-style project) wins over
    `<tests_dir>/<id>_test.c` (single driver).
    """
    if not tests_dir:
        return None
    root = Path(tests_dir)
    project = root / program_id
    if project.is_dir():
        return str(project)
    driver = root / f"{program_id}_test.c"
    if driver.is_file():
        return str(driver)
    return None


def build_pairs(records: list[ManifestRecord], source_spec: CompileSpec,
                target_spec: CompileSpec, tests_dir: str | Path | None = None,
                ) -> tuple[list[TranspilePair], list[str]]:
    """Pairs for accepted programs where both compilations succeeded.

    Returns (pairs, excluded program ids).
    """
    if source_spec.opt != target_spec.opt:
        raise InvalidPairing(
            f"source opt {source_spec.opt} != target opt {target_spec.opt}")
    pairs: list[TranspilePair] = []
    excluded: list[str] = []
    for record in records:
        if record.status != STATUS_ACCEPTED:
            continue
        src_meta = record.artifacts.get(source_spec.key)
        dst_meta = record.artifacts.get(target_spec.key)
        if not src_meta or not dst_meta:
            excluded.append(record.id)
            continue
        pairs.append(TranspilePair(
            source=load_artifact(record.id, source_spec, src_meta["path"]),
            target_reference=load_artifact(record.id, target_spec, dst_meta["path"]),
            test_bundle_path=resolve_test_bundle(tests_dir, record.id),
        ))
    return pairs, excluded


# --- whole-corpus build ----------------------------------------------------

@dataclass
class BuildReport:
    manifest_path: Path
    records: list[ManifestRecord]
    ingest_errors: list[IngestError]
    compile_failures: dict[str, str] = field(default_factory=dict)  # "<id> <key>" -> log


def build_corpus(source_paths: list[str | Path], origin: str, root: str | Path,
                 toolchains: dict[str, ToolchainSpec], isas: list[str],
                 opts: list[str], *, min_lines: int = 10, max_lines: int = 16000,
                 strip: bool = False, jobs: int = 4) -> BuildReport:
    """Ingest, dedupe and compile for every (isa, opt); write the manifest."""
    root = Path(root)
    units, ingest_errors = ingest_sources(
        source_paths, origin, min_lines=min_lines, max_lines=max_lines, strip=strip)
    dedupe(units)
    records = {
        unit.id: ManifestRecord(id=unit.id, origin=unit.origin,
                                content_hash=unit.content_hash, status=unit.status)
        for unit in units
    }
    jobs_list = [
        (unit, CompileSpec(isa=isa, opt=opt, toolchain_id=toolchains[isa].command))
        for unit in units if unit.status == STATUS_ACCEPTED
        for isa in isas for opt in opts
    ]
    failures: dict[str, str] = {}

    def _compile(job):
        unit, spec = job
        out_dir = root / "asm" / spec.isa / spec.opt
        return unit.id, spec, compile_unit(unit, spec, toolchains[spec.isa], out_dir)

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        futures = [pool.submit(_compile, job) for job in jobs_list]
        for future, (unit, spec) in zip(futures, jobs_list):
            try:
                program_id, spec, artifact = future.result()
            except CompileFailed as exc:
                failures[f"{unit.id} {spec.key}"] = exc.log
                continue
            records[program_id].artifacts[spec.key] = {
                "path": artifact.path,
                "instruction_count": artifact.instruction_count,
            }
    manifest_path = write_manifest(list(records.values()), root / "manifest.jsonl")
    return BuildReport(manifest_path=manifest_path, records=list(records.values()),
                       ingest_errors=ingest_errors, compile_failures=failures)


class CorpusView:
    """Read access to a built corpus, keyed by (program, isa, opt)."""

    def __init__(self, manifest_path: str | Path):
        self.manifest_path = Path(manifest_path)
        self.records = load_manifest(manifest_path)
        self._by_id = {record.id: record for record in self.records}
        self._cache: dict[tuple[str, str, str], str | None] = {}

    def program_ids(self, accepted_only: bool = True) -> list[str]:
        return [r.id for r in self.records
                if not accepted_only or r.status == STATUS_ACCEPTED]

    def record(self, program_id: str) -> ManifestRecord | None:
        return self._by_id.get(program_id)

    def artifact_path(self, program_id: str, isa: str, opt: str) -> str | None:
        record = self._by_id.get(program_id)
        if record is None:
            return None
        meta = record.artifacts.get(f"{isa}:{opt}")
        return meta["path"] if meta else None

    def normalized_text(self, program_id: str, isa: str, opt: str) -> str | None:
        key = (program_id, isa, opt)
        if key not in self._cache:
            path = self.artifact_path(program_id, isa, opt)
            if path is None or not Path(path).exists():
                self._cache[key] = None
            else:
                raw = Path(path).read_text(encoding="utf-8")
                self._cache[key] = asmtext.normalize(raw, isa)
        return self._cache[key]

    def aggregate_histogram(self, isa: str, opt: str) -> asmtext.OpcodeHistogram:
        counts: dict[str, int] = {}
        total = 0
        for program_id in self.program_ids():
            text = self.normalized_text(program_id, isa, opt)
            if text is None:
                continue
            hist = asmtext.opcode_histogram(asmtext.extract_instructions(text))
            total += hist.total
            for op, count in hist.counts.items():
                counts[op] = counts.get(op, 0) + count
        return asmtext.OpcodeHistogram(counts=counts, total=total)
