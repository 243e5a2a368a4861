"""Report rendering: plain-text tables with CSV and figure files alongside.

Every report path emits three artifacts into the output directory: a
fixed-width .txt table, the same rows as .csv, and a matplotlib .png.
"""

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .analysis import OpcodeShift, SimilarityReport  # noqa: E402
from .bench import ComparisonTable  # noqa: E402
from .tokenlab import FertilityReport  # noqa: E402
from .triage import TriageReport  # noqa: E402
from .verify import AccuracyTable  # noqa: E402


def format_table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    def line(cells):
        return "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(cells)).rstrip()
    divider = "  ".join("-" * w for w in widths)
    return "\n".join([line(headers), divider, *[line(r) for r in rows]]) + "\n"


def _write(outdir: Path, stem: str, headers, rows, text_extra: str = "") -> dict:
    outdir.mkdir(parents=True, exist_ok=True)
    txt_path = outdir / f"{stem}.txt"
    txt_path.write_text(format_table(headers, rows) + text_extra, encoding="utf-8")
    csv_path = outdir / f"{stem}.csv"
    with csv_path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(headers)
        writer.writerows(rows)
    return {"txt": str(txt_path), "csv": str(csv_path)}


def _save_figure(fig, outdir: Path, stem: str) -> str:
    png_path = outdir / f"{stem}.png"
    fig.tight_layout()
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    return str(png_path)


def accuracy_report(table: AccuracyTable, outdir: str | Path,
                    stem: str = "accuracy") -> dict:
    outdir = Path(outdir)
    headers = ["benchmark", "target_isa", "opt", "passed", "total", "pass@1"]
    rows = [[r.benchmark, r.target_isa, r.opt, str(r.passed), str(r.total),
             f"{r.pass_at_1:.2f}%"] for r in table.rows]
    extra = "".join(f"note: {n}\n" for n in table.notes)
    paths = _write(outdir, stem, headers, rows, extra)
    fig, ax = plt.subplots(figsize=(max(4, 1.2 * len(table.rows) + 2), 3.2))
    labels = [f"{r.benchmark}\n{r.target_isa} -{r.opt}" for r in table.rows]
    ax.bar(labels, [r.pass_at_1 for r in table.rows], color="#6a5acd")
    ax.set_ylabel("pass@1 (%)")
    ax.set_ylim(0, 105)
    for i, row in enumerate(table.rows):
        ax.text(i, row.pass_at_1 + 1, f"{row.pass_at_1:.1f}", ha="center",
                fontsize=8)
    paths["png"] = _save_figure(fig, outdir, stem)
    return paths


def similarity_report_files(report: SimilarityReport, outdir: str | Path,
                            stem: str = "similarity") -> dict:
    outdir = Path(outdir)
    headers = ["base_isa", "other_isa", "opt", "programs", "mean_chrf"]
    rows = [[report.base_isa, other, report.opt,
             str(report.counts.get(other, 0)),
             f"{report.means[other]:.2f}" if other in report.means else "n/a"]
            for other in report.scores]
    notes = "".join(
        f"note: {other}: skipped {len(skipped)} program(s) with missing artifacts\n"
        for other, skipped in report.skipped.items() if skipped)
    paths = _write(outdir, stem, headers, rows, notes)
    fig, ax = plt.subplots(figsize=(4.5, 3.2))
    others = [o for o in report.scores if o in report.means]
    ax.bar(others, [report.means[o] for o in others], color="#2e8b57")
    ax.set_ylabel(f"mean chrF vs {report.base_isa} (%)")
    ax.set_ylim(0, 100)
    paths["png"] = _save_figure(fig, outdir, stem)
    return paths


def opcode_shift_report(shift: OpcodeShift, outdir: str | Path,
                        low_label: str = "O0", high_label: str = "O2",
                        stem: str = "opcode_shift") -> dict:
    outdir = Path(outdir)
    top = shift.top_rows()
    headers = ["opcode", f"share_{low_label}_pct", f"share_{high_label}_pct",
               "delta_points"]
    rows = [[r.opcode, f"{r.share_low:.2f}", f"{r.share_high:.2f}",
             f"{r.delta:+.2f}"] for r in top]
    conservation = sum(r.delta for r in shift.rows)
    extra = f"delta sum over full opcode set: {conservation:+.3f} points\n"
    paths = _write(outdir, stem, headers, rows, extra)
    fig, ax = plt.subplots(figsize=(max(5, 0.6 * len(top) + 2), 3.4))
    x = range(len(top))
    width = 0.38
    ax.bar([i - width / 2 for i in x], [r.share_low for r in top], width,
           label=low_label, color="#4477aa")
    ax.bar([i + width / 2 for i in x], [r.share_high for r in top], width,
           label=high_label, color="#ee6677")
    ax.set_xticks(list(x))
    ax.set_xticklabels([r.opcode for r in top], rotation=45, ha="right")
    ax.set_ylabel("share of instructions (%)")
    ax.legend()
    paths["png"] = _save_figure(fig, outdir, stem)
    return paths


def fertility_report_files(report: FertilityReport, outdir: str | Path,
                           stem: str = "fertility") -> dict:
    outdir = Path(outdir)
    headers = ["vocab", *report.isas]
    rows = [
        [name, *(f"{report.fertility[(name, isa)]:.4f}" for isa in report.isas)]
        for name in (report.base_name, report.extended_name)
    ]
    delta_row = ["delta_pct",
                 *(f"{report.delta_pct(isa):+.2f}%" for isa in report.isas)]
    rows.append(delta_row)
    paths = _write(outdir, stem, headers, rows)
    fig, ax = plt.subplots(figsize=(max(4, 1.1 * len(report.isas) + 2), 3.2))
    x = range(len(report.isas))
    width = 0.38
    base_vals = [report.fertility[(report.base_name, isa)] for isa in report.isas]
    ext_vals = [report.fertility[(report.extended_name, isa)] for isa in report.isas]
    ax.bar([i - width / 2 for i in x], base_vals, width, label=report.base_name,
           color="#888888")
    ax.bar([i + width / 2 for i in x], ext_vals, width,
           label=report.extended_name, color="#6a5acd")
    ax.set_xticks(list(x))
    ax.set_xticklabels(report.isas)
    ax.set_ylabel("fertility (tokens/word)")
    ax.legend()
    paths["png"] = _save_figure(fig, outdir, stem)
    return paths


def triage_report_files(report: TriageReport, outdir: str | Path,
                        stem: str = "triage") -> dict:
    outdir = Path(outdir)
    headers = ["error_class", "programs"]
    rows = [[cls, ", ".join(programs)] for cls, programs in report.by_class.items()]
    hist_lines = "".join(
        f"edit distance {label}: {count}\n"
        for label, count in sorted(report.distance_histogram.items(),
                                   key=lambda kv: _bucket_order(kv[0])))
    paths = _write(outdir, stem, headers, rows,
                   ("\n" + hist_lines) if hist_lines else "")
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ordered = sorted(report.distance_histogram.items(),
                     key=lambda kv: _bucket_order(kv[0]))
    ax.bar([k for k, _ in ordered], [v for _, v in ordered], color="#cc7722")
    ax.set_xlabel("token edit distance")
    ax.set_ylabel("failing programs")
    paths["png"] = _save_figure(fig, outdir, stem)
    return paths


_BUCKET_ORDER = {"0": 0, "1": 1, "2": 2, "3-5": 3, "6-10": 4, "11-20": 5,
                 "21-50": 6, ">50": 7}


def _bucket_order(label: str) -> int:
    return _BUCKET_ORDER.get(label, 99)


def bench_compare_report(table: ComparisonTable, outdir: str | Path,
                         stem: str = "bench_compare") -> dict:
    outdir = Path(outdir)
    headers = ["metric", "numerator", "denominator", "ratio"]
    rows = [[r.metric, r.numerator_mode, r.denominator_mode, f"{r.ratio:.3f}"]
            for r in table.rows]
    extra = "".join(f"note: mode {m} absent\n" for m in table.missing)
    paths = _write(outdir, stem, headers, rows, extra)
    fig, ax = plt.subplots(figsize=(max(4, 1.0 * len(table.rows) + 2), 3.2))
    labels = [f"{r.metric}\n{r.numerator_mode}/{r.denominator_mode}"
              for r in table.rows]
    ax.bar(labels, [r.ratio for r in table.rows], color="#4477aa")
    ax.axhline(1.0, color="black", linewidth=0.8, linestyle="--")
    ax.set_ylabel("ratio")
    plt.setp(ax.get_xticklabels(), fontsize=7)
    paths["png"] = _save_figure(fig, outdir, stem)
    return paths
