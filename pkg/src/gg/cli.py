"""Command-line front end.

Exit codes: 0 success, 1 usage/config error, 2 environment failure
(doctor), 3 run completed with failures.
"""

import argparse
import json
import sys
from pathlib import Path

from . import analysis as analysis_mod
from . import bench as bench_mod
from . import corpus as corpus_mod
from . import desk as desk_mod
from . import pipeline as pipeline_mod
from . import report as report_mod
from . import tokenlab as tokenlab_mod
from . import triage as triage_mod
from . import verify as verify_mod
from .config import PipelineConfig, load_config, save_config
from .corpus import CorpusView
from .errors import GGError
from .guesser import GuessCandidate, GuessRequest, estimate_budget, make_backend, request_guess
from .tokenlab import extend_vocab, load_isa_terms, load_vocab

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_ENVIRONMENT = 2
EXIT_RUN_FAILURES = 3


def _add_config_options(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="flat key-value config file")
    parser.add_argument("--desk", action="store_true",
                        help="use the bundled desk corpus configuration")
    parser.add_argument("--workdir", help="work directory (or set GG_WORKDIR)")


def _resolve_config(args) -> PipelineConfig:
    if getattr(args, "desk", False):
        config = desk_mod.desk_config(args.workdir or "gg-work")
    elif getattr(args, "config", None):
        config = load_config(args.config)
    else:
        raise GGError("pass --config <file> or --desk")
    if getattr(args, "workdir", None):
        config.workdir = args.workdir
    return config


def _print(text: str):
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


# --- corpus -------------------------------------------------------------------

def cmd_corpus_build(args) -> int:
    config = _resolve_config(args)
    workdir = config.effective_workdir()
    if args.sources:
        sources = []
        for entry in args.sources:
            path = Path(entry)
            sources.extend(sorted(path.glob("*.c")) if path.is_dir() else [path])
        origin = args.origin or "local"
    elif args.desk:
        sources = desk_mod.program_sources()
        origin = args.origin or "desk"
    else:
        raise GGError("pass --sources or --desk")
    report = corpus_mod.build_corpus(
        sources, origin=origin, root=workdir, toolchains=config.toolchains,
        isas=config.isas, opts=config.opts, min_lines=config.min_lines,
        max_lines=config.max_lines, strip=config.strip_boilerplate,
        jobs=config.pool_compile)
    statuses: dict[str, int] = {}
    for record in report.records:
        statuses[record.status] = statuses.get(record.status, 0) + 1
    _print(f"manifest: {report.manifest_path}")
    for status, count in sorted(statuses.items()):
        _print(f"  {status}: {count}")
    for error in report.ingest_errors:
        _print(f"  ingest error: {error.path}: {error.message}")
    if report.compile_failures:
        _print(f"  compile failures: {len(report.compile_failures)}")
        for key in sorted(report.compile_failures):
            _print(f"    {key}")
        return EXIT_RUN_FAILURES
    return EXIT_OK


def cmd_corpus_stats(args) -> int:
    records = corpus_mod.load_manifest(args.manifest)
    statuses: dict[str, int] = {}
    artifacts: dict[str, int] = {}
    for record in records:
        statuses[record.status] = statuses.get(record.status, 0) + 1
        for key in record.artifacts:
            artifacts[key] = artifacts.get(key, 0) + 1
    rows = [[status, str(count)] for status, count in sorted(statuses.items())]
    _print(report_mod.format_table(["status", "programs"], rows))
    rows = [[key, str(count)] for key, count in sorted(artifacts.items())]
    _print(report_mod.format_table(["artifact", "count"], rows))
    return EXIT_OK


# --- transpile (guess stage) -----------------------------------------------------

def cmd_transpile(args) -> int:
    config = _resolve_config(args)
    _apply_guess_flags(config, args)
    workdir = config.effective_workdir()
    manifest = args.manifest or (workdir / "manifest.jsonl")
    pairs, excluded, _ = pipeline_mod.prepare_pairs(config, manifest)
    vocab = pipeline_mod._load_budget_vocab(config)
    backend = make_backend(config.backend, pairs=pairs, url=config.backend_url,
                           command=config.backend_command,
                           mutant_rule=config.mutant_rule)
    out_dir = Path(args.out) if args.out else workdir / "candidates"
    failures = 0
    for pair in pairs:
        request = GuessRequest(
            source_isa=config.source_isa, target_isa=config.target_isa,
            opt=config.opt, input_asm=pair.source.normalized_text,
            beam_width=config.beam_width, max_new_tokens=config.max_new_tokens,
            context_window=config.context_window)
        verdict = estimate_budget(request, vocab, config.expansion)
        program_dir = out_dir / pair.program_id
        program_dir.mkdir(parents=True, exist_ok=True)
        meta = {"estimated_input_tokens": verdict.estimated_input_tokens,
                "estimated_total": verdict.estimated_total, "fits": verdict.fits}
        if verdict.fits:
            try:
                candidates = request_guess(backend, request, verdict=verdict)
            except GGError as exc:
                meta["error"] = str(exc)
                failures += 1
                candidates = []
            for candidate in candidates:
                (program_dir / f"rank{candidate.rank}.s").write_text(
                    candidate.text, encoding="utf-8")
            meta["candidates"] = [
                {"rank": c.rank, "score": c.score, "truncated": c.truncated}
                for c in candidates]
        (program_dir / "guess.json").write_text(
            json.dumps(meta, sort_keys=True) + "\n", encoding="utf-8")
    _print(f"candidates: {out_dir} ({len(pairs)} programs, "
           f"{len(excluded)} excluded, {failures} backend failures)")
    return EXIT_RUN_FAILURES if failures else EXIT_OK


def _apply_guess_flags(config: PipelineConfig, args):
    for flag, attr in (("backend", "backend"), ("beam", "beam_width"),
                       ("context_window", "context_window"),
                       ("max_new_tokens", "max_new_tokens"),
                       ("source_isa", "source_isa"),
                       ("target_isa", "target_isa"), ("opt", "opt"),
                       ("mutant_rule", "mutant_rule")):
        value = getattr(args, flag, None)
        if value is not None:
            setattr(config, attr, value)


# --- verify (guarantee stage) ------------------------------------------------------

def cmd_verify(args) -> int:
    config = _resolve_config(args)
    _apply_guess_flags(config, args)
    if args.timeout is not None:
        config.timeout_s = args.timeout
    workdir = config.effective_workdir()
    pairs, excluded, records = pipeline_mod.prepare_pairs(config, args.pairs)
    candidates_dir = Path(args.candidates)
    runner = args.runner or config.runner(config.target_isa)
    toolchain = config.toolchain(config.target_isa)
    runtime_sources, include_dirs = pipeline_mod._runtime_sources(config)
    scratch_root = workdir / "verify"
    by_id = {record.id: record for record in records}
    groups: dict[tuple[str, str, str], list] = {}
    non_pass = 0
    for pair in pairs:
        program_dir = candidates_dir / pair.program_id
        meta_path = program_dir / "guess.json"
        rank0 = program_dir / "rank0.s"
        if not meta_path.exists() and not rank0.exists():
            _print(f"{pair.program_id}: no candidates, skipped")
            continue
        bundle = verify_mod.bundle_from_path(
            pair.test_bundle_path, runtime_sources=runtime_sources,
            include_dirs=include_dirs, timeout_s=config.timeout_s)
        overflow = False
        if meta_path.exists():
            meta = json.loads(meta_path.read_text())
            overflow = not meta.get("fits", True)
        candidates = []
        if not overflow and rank0.exists():
            candidates = [GuessCandidate(rank=0,
                                         text=rank0.read_text(encoding="utf-8"))]
        outcome = verify_mod.verify_candidate(
            pair, candidates, bundle, toolchain, scratch_root, runner=runner,
            timeout_s=config.timeout_s, overflow=overflow)
        origin = by_id[pair.program_id].origin
        groups.setdefault((origin, config.target_isa, config.opt),
                          []).append(outcome)
        if outcome.status != verify_mod.STATUS_PASS:
            non_pass += 1
        _print(f"{pair.program_id}: {outcome.status}")
    table = verify_mod.accuracy_table(groups)
    paths = report_mod.accuracy_report(table, workdir / "reports")
    _print(Path(paths["txt"]).read_text())
    return EXIT_RUN_FAILURES if non_pass else EXIT_OK


# --- triage -------------------------------------------------------------------------

def cmd_triage(args) -> int:
    config = _resolve_config(args)
    pairs, _, _ = pipeline_mod.prepare_pairs(config, args.pairs)
    pair_by_id = {pair.program_id: pair for pair in pairs}
    outcomes_dir = Path(args.outcomes)
    records = []
    for outcome_path in sorted(outcomes_dir.glob("*/*/outcome.json")):
        outcome = verify_mod.load_outcome(outcome_path)
        if outcome.status == verify_mod.STATUS_PASS:
            continue
        pair = pair_by_id.get(outcome.program_id)
        if pair is None:
            continue
        candidate_path = outcome_path.parent / "candidate.s"
        candidate_text = candidate_path.read_text(encoding="utf-8") \
            if candidate_path.exists() else None
        records.append(triage_mod.make_record(outcome, pair, candidate_text))
    report = triage_mod.triage_report(records)
    out_path = Path(args.out)
    paths = report_mod.triage_report_files(report, out_path.parent,
                                           stem=out_path.stem)
    _print(Path(paths["txt"]).read_text())
    return EXIT_OK


# --- analyze -------------------------------------------------------------------------

def cmd_analyze_similarity(args) -> int:
    view = CorpusView(args.corpus)
    others = [isa.strip() for isa in args.others.split(",") if isa.strip()]
    report = analysis_mod.isa_similarity(view, args.base, others, args.opt)
    out_dir = Path(args.out) if args.out else Path(args.corpus).parent / "reports"
    paths = report_mod.similarity_report_files(report, out_dir)
    _print(Path(paths["txt"]).read_text())
    return EXIT_OK


def cmd_analyze_opcodes(args) -> int:
    view = CorpusView(args.corpus)
    low = view.aggregate_histogram(args.isa, args.low_opt)
    high = view.aggregate_histogram(args.isa, args.high_opt)
    shift = analysis_mod.opcode_shift(low, high, top_k=args.top)
    out_dir = Path(args.out) if args.out else Path(args.corpus).parent / "reports"
    paths = report_mod.opcode_shift_report(shift, out_dir,
                                           low_label=args.low_opt,
                                           high_label=args.high_opt)
    _print(Path(paths["txt"]).read_text())
    return EXIT_OK


# --- tokenlab -------------------------------------------------------------------------

def cmd_tokenlab_fertility(args) -> int:
    view = CorpusView(args.corpus)
    isas = [isa.strip() for isa in args.isa.split(",") if isa.strip()]
    base = load_vocab(args.base, name="base")
    if args.extended:
        extended = load_vocab(args.extended, name="extended")
    else:
        terms: list[str] = []
        for isa in isas:
            terms.extend(load_isa_terms(isa))
        extended = extend_vocab(base, terms, name="extended")
    texts_by_isa: dict[str, list[str]] = {}
    for isa in isas:
        texts: list[str] = []
        for program_id in view.program_ids():
            for opt in ("O0", "O2"):
                text = view.normalized_text(program_id, isa, opt)
                if text is not None:
                    texts.append(text)
        texts_by_isa[isa] = texts
    report = tokenlab_mod.fertility_report(texts_by_isa, base, extended)
    out_dir = Path(args.out) if args.out else Path(args.corpus).parent / "reports"
    paths = report_mod.fertility_report_files(report, out_dir)
    _print(Path(paths["txt"]).read_text())
    return EXIT_OK


# --- bench ----------------------------------------------------------------------------

def cmd_bench(args) -> int:
    probe = bench_mod.CommandEnergyProbe(args.energy_probe) \
        if args.energy_probe else None
    with bench_mod.exclusive_lock(args.lock_file):
        record = bench_mod.benchmark(
            args.binary, args=args.args, runner=args.runner, n_runs=args.runs,
            energy_probe=probe, program_id=args.program_id or Path(args.binary).stem,
            mode=args.mode)
    bench_mod.append_records([record], args.records)
    _print(f"{record.program_id} [{record.mode}] runs={record.runs} "
           f"geomean_time={record.geomean_time_s:.6f}s "
           f"geomean_rss={record.geomean_peak_rss_bytes / 1e6:.3f}MB"
           + (f" energy={record.energy_j:.3f}J" if record.energy_j is not None
              else ""))
    _print(f"records: {args.records}")
    return EXIT_OK


def cmd_bench_compare(args) -> int:
    records = bench_mod.load_records(args.records)
    if args.program:
        records = [r for r in records if r.program_id == args.program]
    by_program: dict[str, list] = {}
    for record in records:
        by_program.setdefault(record.program_id, []).append(record)
    out_dir = Path(args.out) if args.out else Path(args.records).parent
    status = EXIT_OK
    for program_id, group in sorted(by_program.items()):
        if len({r.mode for r in group}) < 2:
            _print(f"{program_id}: fewer than two modes, skipped")
            continue
        table = bench_mod.compare(group)
        paths = report_mod.bench_compare_report(
            table, out_dir, stem=f"bench_compare_{program_id}")
        _print(Path(paths["txt"]).read_text())
    return status


# --- sweep ----------------------------------------------------------------------------

def cmd_sweep(args) -> int:
    config = _resolve_config(args)
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    manifest = args.manifest or (config.effective_workdir() / "manifest.jsonl")
    result = pipeline_mod.sweep(config, args.knob, values, manifest)
    rows = [[value, f"{pass1:.2f}%" if pass1 is not None else "n/a"]
            for value, pass1 in result.rows]
    text = report_mod.format_table([args.knob, "pass@1"], rows)
    _print(text)
    for note in result.notes:
        _print(f"note: {note}")
    out_dir = config.effective_workdir() / "reports"
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / f"sweep_{args.knob}.txt").write_text(text, encoding="utf-8")
    return EXIT_OK


# --- doctor ---------------------------------------------------------------------------

def cmd_doctor(args) -> int:
    config = _resolve_config(args)
    report = pipeline_mod.doctor(config)
    for check in report.checks:
        mark = "ok " if check.ok else "FAIL"
        _print(f"[{mark}] {check.name}: {check.detail}")
    return EXIT_OK if report.ok else EXIT_ENVIRONMENT


# --- pipeline ---------------------------------------------------------------------------

def cmd_pipeline(args) -> int:
    config = _resolve_config(args)
    _apply_guess_flags(config, args)
    if args.coverage:
        config.coverage = True
    workdir = config.effective_workdir()
    manifest = Path(args.manifest) if args.manifest else workdir / "manifest.jsonl"
    if not manifest.exists():
        if not args.desk:
            raise GGError(f"manifest {manifest} not found; run corpus build first")
        corpus_mod.build_corpus(
            desk_mod.program_sources(), origin="desk", root=workdir,
            toolchains=config.toolchains, isas=config.isas, opts=config.opts,
            jobs=config.pool_compile)
    summary = pipeline_mod.run_pipeline(config, manifest)
    _print(report_mod.format_table(
        ["terminal state", "programs"],
        [[state, str(count)] for state, count in sorted(summary.counts.items())]))
    accuracy_txt = summary.report_paths.get("accuracy", {}).get("txt")
    if accuracy_txt:
        _print(Path(accuracy_txt).read_text())
    overall = summary.overall_pass_at_1()
    if overall is not None:
        _print(f"pass@1 = {overall:.2f}")
    all_pass = overall == 100.0 and summary.counts.get("guess_error", 0) == 0
    return EXIT_OK if all_pass else EXIT_RUN_FAILURES


# --- config utility -----------------------------------------------------------------------

def cmd_config_dump(args) -> int:
    config = _resolve_config(args)
    path = Path(args.out)
    save_config(config, path)
    _print(f"config written: {path}")
    return EXIT_OK


# --- parser -------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gg",
        description="cross-ISA assembly transpilation pipeline and "
                    "verification toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    corpus = sub.add_parser("corpus", help="build or inspect assembly corpora")
    corpus_sub = corpus.add_subparsers(dest="subcommand", required=True)
    build = corpus_sub.add_parser("build", help="ingest, dedupe and compile")
    _add_config_options(build)
    build.add_argument("--sources", nargs="*", help="C files or directories")
    build.add_argument("--origin", help="provenance tag (benchmark name)")
    build.set_defaults(handler=cmd_corpus_build)
    stats = corpus_sub.add_parser("stats", help="summarize a manifest")
    stats.add_argument("--manifest", required=True)
    stats.set_defaults(handler=cmd_corpus_stats)

    transpile = sub.add_parser("transpile", help="obtain candidate translations")
    _add_config_options(transpile)
    transpile.add_argument("--manifest")
    transpile.add_argument("--backend",
                           choices=["http", "command", "oracle", "mutant"])
    transpile.add_argument("--beam", type=int, dest="beam")
    transpile.add_argument("--context-window", type=int, dest="context_window")
    transpile.add_argument("--max-new-tokens", type=int, dest="max_new_tokens")
    transpile.add_argument("--source-isa", dest="source_isa")
    transpile.add_argument("--target-isa", dest="target_isa")
    transpile.add_argument("--opt", choices=["O0", "O2"])
    transpile.add_argument("--mutant-rule", dest="mutant_rule")
    transpile.add_argument("--out", help="candidates output directory")
    transpile.set_defaults(handler=cmd_transpile)

    verify = sub.add_parser("verify", help="build, test and diff candidates")
    _add_config_options(verify)
    verify.add_argument("--pairs", required=True, help="corpus manifest")
    verify.add_argument("--candidates", required=True)
    verify.add_argument("--runner", help="native or emulate:<command>")
    verify.add_argument("--timeout", type=float)
    verify.add_argument("--source-isa", dest="source_isa")
    verify.add_argument("--target-isa", dest="target_isa")
    verify.add_argument("--opt", choices=["O0", "O2"])
    verify.set_defaults(handler=cmd_verify)

    triage = sub.add_parser("triage", help="classify failures")
    _add_config_options(triage)
    triage.add_argument("--outcomes", required=True)
    triage.add_argument("--pairs", required=True)
    triage.add_argument("--out", default="triage_report.txt")
    triage.set_defaults(handler=cmd_triage)

    analyze = sub.add_parser("analyze", help="similarity and opcode analyses")
    analyze_sub = analyze.add_subparsers(dest="subcommand", required=True)
    similarity = analyze_sub.add_parser("similarity")
    similarity.add_argument("--corpus", required=True, help="manifest path")
    similarity.add_argument("--base", default="x86_64")
    similarity.add_argument("--others", default="armv8,armv5,riscv64")
    similarity.add_argument("--opt", default="O0")
    similarity.add_argument("--out")
    similarity.set_defaults(handler=cmd_analyze_similarity)
    opcodes = analyze_sub.add_parser("opcodes")
    opcodes.add_argument("--corpus", required=True, help="manifest path")
    opcodes.add_argument("--isa", default="armv8")
    opcodes.add_argument("--top", type=int, default=15)
    opcodes.add_argument("--low-opt", default="O0")
    opcodes.add_argument("--high-opt", default="O2")
    opcodes.add_argument("--out")
    opcodes.set_defaults(handler=cmd_analyze_opcodes)

    tokenlab = sub.add_parser("tokenlab", help="tokenizer experiments")
    tokenlab_sub = tokenlab.add_subparsers(dest="subcommand", required=True)
    fertility = tokenlab_sub.add_parser("fertility")
    fertility.add_argument("--corpus", required=True, help="manifest path")
    fertility.add_argument("--base", required=True, help="base vocab file")
    fertility.add_argument("--extended",
                           help="extended vocab file (default: base + "
                                "shipped ISA terms)")
    fertility.add_argument("--isa", required=True, help="comma-separated ISAs")
    fertility.add_argument("--out")
    fertility.set_defaults(handler=cmd_tokenlab_fertility)

    bench = sub.add_parser("bench", help="benchmark binaries")
    bench_sub = bench.add_subparsers(dest="subcommand")
    bench.add_argument("--binary")
    bench.add_argument("--mode", choices=list(bench_mod.MODES),
                       default=bench_mod.MODE_NATIVE)
    bench.add_argument("--runs", type=int, default=bench_mod.DEFAULT_RUNS)
    bench.add_argument("--runner", default="native")
    bench.add_argument("--energy-probe", dest="energy_probe")
    bench.add_argument("--records", default="bench_records.jsonl")
    bench.add_argument("--program-id", dest="program_id")
    bench.add_argument("--lock-file", dest="lock_file",
                       default=str(bench_mod.DEFAULT_LOCK_PATH))
    bench.add_argument("--args", nargs="*", default=[])
    bench.set_defaults(handler=cmd_bench)
    compare = bench_sub.add_parser("compare")
    compare.add_argument("--records", required=True)
    compare.add_argument("--program")
    compare.add_argument("--out")
    compare.set_defaults(handler=cmd_bench_compare)

    sweep = sub.add_parser("sweep", help="ablation sweep over one knob")
    _add_config_options(sweep)
    sweep.add_argument("--manifest")
    sweep.add_argument("--knob", required=True,
                       choices=list(pipeline_mod.SWEEP_KNOBS))
    sweep.add_argument("--values", required=True, help="comma-separated")
    sweep.add_argument("--backend",
                       choices=["http", "command", "oracle", "mutant"])
    sweep.set_defaults(handler=cmd_sweep)

    doctor = sub.add_parser("doctor", help="check external tools resolve")
    _add_config_options(doctor)
    doctor.set_defaults(handler=cmd_doctor)

    pipe = sub.add_parser("pipeline", help="guess -> verify -> triage run")
    _add_config_options(pipe)
    pipe.add_argument("--manifest")
    pipe.add_argument("--backend",
                      choices=["http", "command", "oracle", "mutant"])
    pipe.add_argument("--beam", type=int, dest="beam")
    pipe.add_argument("--context-window", type=int, dest="context_window")
    pipe.add_argument("--max-new-tokens", type=int, dest="max_new_tokens")
    pipe.add_argument("--source-isa", dest="source_isa")
    pipe.add_argument("--target-isa", dest="target_isa")
    pipe.add_argument("--opt", choices=["O0", "O2"])
    pipe.add_argument("--mutant-rule", dest="mutant_rule")
    pipe.add_argument("--coverage", action="store_true")
    pipe.set_defaults(handler=cmd_pipeline)

    config = sub.add_parser("config", help="write the resolved configuration")
    config_sub = config.add_subparsers(dest="subcommand", required=True)
    dump = config_sub.add_parser("dump")
    _add_config_options(dump)
    dump.add_argument("--out", required=True)
    dump.set_defaults(handler=cmd_config_dump)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; remap to the documented code
        return EXIT_USAGE if exc.code == 2 else (exc.code or EXIT_OK)
    if getattr(args, "command", None) == "bench" and \
            getattr(args, "subcommand", None) is None and not args.binary:
        _print("gg bench: --binary is required")
        return EXIT_USAGE
    try:
        return args.handler(args)
    except GGError as exc:
        _print(f"error: {exc}")
        return EXIT_USAGE
    except OSError as exc:
        _print(f"error: {exc}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
